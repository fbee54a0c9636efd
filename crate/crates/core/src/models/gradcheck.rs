//! Analytic gradients against central finite differences.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{logistic_loss_and_gradient, validate_rows, MlpModel, ModelError};
use crate::Label;

pub const FINITE_DIFFERENCE_STEP: f64 = 1e-6;

/// Relative deviations are measured against at least this magnitude so
/// that parameters with a vanishing gradient compare absolutely.
const RELATIVE_FLOOR: f64 = 1e-5;

/// Bankrupt weight applied during the logistic check so the weighting path
/// is exercised.
const CHECK_CLASS_WEIGHT: f64 = 9.78;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradCheckTarget {
    Logistic,
    Mlp,
}

fn relative_deviation(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

fn central_difference(params: &mut [f64], i: usize, loss: &mut impl FnMut(&[f64]) -> f64) -> f64 {
    let orig = params[i];
    params[i] = orig + FINITE_DIFFERENCE_STEP;
    let up = loss(params);
    params[i] = orig - FINITE_DIFFERENCE_STEP;
    let down = loss(params);
    params[i] = orig;
    (up - down) / (2.0 * FINITE_DIFFERENCE_STEP)
}

/// Max relative deviation between analytic and finite-difference gradients
/// over every parameter, evaluated at seeded random parameters.
pub fn numeric_gradient_check(
    target: GradCheckTarget,
    features: &[Vec<f64>],
    labels: &[Label],
    seed: u64,
) -> Result<f64, ModelError> {
    let dim = validate_rows(features, labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match target {
        GradCheckTarget::Logistic => {
            let weights: Vec<f64> = labels
                .iter()
                .map(|l| if l.is_bankrupt() { CHECK_CLASS_WEIGHT } else { 1.0 })
                .collect();
            let mut params: Vec<f64> = (0..=dim).map(|_| rng.random_range(-0.5..0.5)).collect();
            let (_, grad, grad_bias) =
                logistic_loss_and_gradient(&params[..dim], params[dim], features, labels, &weights);
            let analytic: Vec<f64> = grad.into_iter().chain([grad_bias]).collect();
            let mut loss = |p: &[f64]| logistic_loss_and_gradient(&p[..dim], p[dim], features, labels, &weights).0;
            let mut worst = 0.0f64;
            for (i, a) in analytic.iter().enumerate() {
                let numeric = central_difference(&mut params, i, &mut loss);
                worst = worst.max(relative_deviation(*a, numeric));
            }
            Ok(worst)
        }
        GradCheckTarget::Mlp => {
            let mut model = MlpModel::new_initialized(dim, rng.random());
            // non-zero biases so every parameter carries signal
            let mut params = model.parameters();
            for p in params.iter_mut() {
                *p += rng.random_range(-0.1..0.1);
            }
            model.set_parameters(&params);
            let weights = alloc::vec![1.0; labels.len()];
            let (_, analytic) = model.loss_and_gradient(features, labels, &weights);
            let mut probe = model.clone();
            let mut loss = |p: &[f64]| {
                probe.set_parameters(p);
                probe.loss_and_gradient(features, labels, &weights).0
            };
            let mut worst = 0.0f64;
            for (i, a) in analytic.iter().enumerate() {
                let numeric = central_difference(&mut params, i, &mut loss);
                worst = worst.max(relative_deviation(*a, numeric));
            }
            Ok(worst)
        }
    }
}
