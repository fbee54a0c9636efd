//! Float helpers that `core` does not provide.

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Sigmoid clamped so the result is strictly inside (0, 1).
pub(crate) fn probability(z: f64) -> f64 {
    sigmoid(z).clamp(f64::EPSILON, 1.0 - f64::EPSILON)
}

/// Binary cross-entropy of a logit against a 0/1 target, computed without
/// forming the probability: `softplus(z) - y*z`.
pub(crate) fn bce_with_logit(z: f64, y: f64) -> f64 {
    let softplus = if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    };
    softplus - y * z
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Mix a base seed with a discriminator (splitmix64 finalizer).
pub(crate) fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_symmetric() {
        for z in [-30.0, -2.5, 0.0, 1.0, 17.0] {
            assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() < 1e-15);
        }
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn probability_stays_open_interval() {
        assert!(probability(1e6) < 1.0);
        assert!(probability(-1e6) > 0.0);
    }

    #[test]
    fn bce_matches_naive_form() {
        for (z, y) in [(0.3, 1.0), (-1.7, 0.0), (2.2, 0.0), (-0.1, 1.0)] {
            let p = sigmoid(z);
            let naive = -(y * libm::log(p) + (1.0 - y) * libm::log(1.0 - p));
            assert!((bce_with_logit(z, y) - naive).abs() < 1e-12);
        }
    }
}
