//! File formats, corpus acquisition, the HTTP API and the command-line
//! stages around [`bankrisk_core`].
//!
//! Every stage reads from and writes to one data root:
//!
//! | stage | reads | writes |
//! |---|---|---|
//! | ingest | article source | `corpus/` |
//! | sentiment | `corpus/`, lexicon | `sentiment.csv` |
//! | ratios | `records.csv` | `ratios.csv` |
//! | build | `records.csv`, `sentiment.csv` | `mapping.json`, `dataset.csv` |
//! | train | `dataset.csv` | `model.json` |
//! | evaluate | `dataset.csv` | `report.json`, `report.txt` |
//! | score | `model.json`, `dataset.csv` | `scores_full.json`, `scores_held_out.json` |
//! | serve | scores, `sentiment.csv`, `dataset.csv` | nothing |

pub mod config;
pub mod corpus;
pub mod lexicon;
pub mod model_io;
pub mod pipeline;
pub mod records;
pub mod report;
pub mod service;
pub mod tables;
