//! Model-spec files: a JSON document describing a finite-state model.
//!
//! Schema (all matrices row-major):
//!
//! ```json
//! {
//!   "dimension": 3,
//!   "states": ["a", "b"],
//!   "transition": [[0.9, 0.1], [0.2, 0.8]],
//!   "increments": [
//!     [{"kind": "point_mass", "v": [0.5, 0.0, 0.0]},
//!      {"kind": "gaussian", "mean": [0,0,0], "cov": [[1,0,0],[0,1,0],[0,0,1]]}],
//!     [{"kind": "mixture", "weights": [0.5, 0.5],
//!       "components": [{"kind": "point_mass", "v": [1,0,0]},
//!                      {"kind": "point_mass", "v": [-1,0,0]}]},
//!      {"kind": "point_mass", "v": [0, 0.5, 0]}]
//!   ],
//!   "initial": "stationary"
//! }
//! ```
//!
//! `increments[x][y]` is the law of the step on the transition `x -> y`;
//! `initial` is either the string `"stationary"` or an explicit probability
//! vector. Validation stops at the first violation and names the offending
//! row/column.

use super::{
    stationary_distribution, IncrementLaw, MarkovAdditiveProcess, MarkovError, StateSpace,
    TransitionMatrix,
};
use crate::linalg::{RMat, RVec};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("cannot read model spec: {0}")]
    Io(#[from] std::io::Error),
    #[error("model spec is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model spec invalid at {context}: {source}")]
    Invalid { context: String, source: MarkovError },
}

fn ctx(context: impl Into<String>) -> impl FnOnce(MarkovError) -> SpecFileError {
    let context = context.into();
    move |source| SpecFileError::Invalid { context, source }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawSpec {
    PointMass { v: Vec<f64> },
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    Mixture { weights: Vec<f64>, components: Vec<LawSpec> },
}

impl LawSpec {
    fn build(&self, context: &str) -> Result<IncrementLaw, SpecFileError> {
        match self {
            LawSpec::PointMass { v } => Ok(IncrementLaw::point_mass(v.clone())),
            LawSpec::Gaussian { mean, cov } => {
                let d = mean.len();
                let rows = cov.len();
                let cols = cov.first().map_or(0, |r| r.len());
                if rows != d || cov.iter().any(|r| r.len() != cols) || cols != d {
                    return Err(SpecFileError::Invalid {
                        context: context.to_string(),
                        source: MarkovError::CovShape { expected: d, rows, cols },
                    });
                }
                let m = RMat::from_fn(d, d, |i, j| cov[i][j]);
                IncrementLaw::gaussian(mean.clone(), m).map_err(ctx(context.to_string()))
            }
            LawSpec::Mixture { weights, components } => {
                let comps = components
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c.build(&format!("{context}, mixture component {k}")))
                    .collect::<Result<Vec<_>, _>>()?;
                IncrementLaw::mixture(weights.clone(), comps).map_err(ctx(context.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Named(String),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpecFile {
    pub dimension: usize,
    pub states: Vec<String>,
    pub transition: Vec<Vec<f64>>,
    pub increments: Vec<Vec<LawSpec>>,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
}

/// A loaded and fully validated model plus its initial distribution.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub map: MarkovAdditiveProcess,
    pub mu: RVec,
}

pub fn parse_model_spec(text: &str) -> Result<LoadedModel, SpecFileError> {
    let spec: ModelSpecFile = serde_json::from_str(text)?;
    build_model(&spec)
}

pub fn load_model_spec(path: &Path) -> Result<LoadedModel, SpecFileError> {
    let text = std::fs::read_to_string(path)?;
    parse_model_spec(&text)
}

pub fn build_model(spec: &ModelSpecFile) -> Result<LoadedModel, SpecFileError> {
    let states = StateSpace::new(spec.states.clone()).map_err(ctx("states"))?;
    let n = states.len();

    if spec.transition.len() != n || spec.transition.iter().any(|r| r.len() != n) {
        return Err(SpecFileError::Invalid {
            context: "transition".into(),
            source: MarkovError::NotSquare {
                rows: spec.transition.len(),
                cols: spec.transition.first().map_or(0, |r| r.len()),
            },
        });
    }
    // Validate rows one at a time so the first offending row is named.
    for (i, row) in spec.transition.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        for (j, &v) in row.iter().enumerate() {
            if !(0.0..=1.0 + 1e-12).contains(&v) {
                return Err(SpecFileError::Invalid {
                    context: format!("transition row {i}, column {j}"),
                    source: MarkovError::EntryRange { row: i, col: j, value: v },
                });
            }
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(SpecFileError::Invalid {
                context: format!("transition row {i}"),
                source: MarkovError::RowSum { row: i, sum, tol: 1e-12 },
            });
        }
    }
    let p = RMat::from_fn(n, n, |i, j| spec.transition[i][j]);
    let transition = TransitionMatrix::new(p).map_err(ctx("transition"))?;

    if spec.increments.len() != n || spec.increments.iter().any(|r| r.len() != n) {
        return Err(SpecFileError::Invalid {
            context: "increments".into(),
            source: MarkovError::IncrementDim {
                row: spec.increments.len(),
                col: 0,
                got: spec.increments.iter().map(|r| r.len()).sum(),
                expected: n * n,
            },
        });
    }
    let mut laws = Vec::with_capacity(n * n);
    for (x, row) in spec.increments.iter().enumerate() {
        for (y, cell) in row.iter().enumerate() {
            let law = cell.build(&format!("increments[{x}][{y}]"))?;
            if law.dim() != spec.dimension {
                return Err(SpecFileError::Invalid {
                    context: format!("increments[{x}][{y}]"),
                    source: MarkovError::IncrementDim {
                        row: x,
                        col: y,
                        got: law.dim(),
                        expected: spec.dimension,
                    },
                });
            }
            laws.push(law);
        }
    }

    let map = MarkovAdditiveProcess::new(states, transition, laws, spec.dimension)
        .map_err(ctx("model"))?;

    let mu = match &spec.initial {
        None | Some(InitialSpec::Named(_)) => {
            if let Some(InitialSpec::Named(name)) = &spec.initial {
                if name != "stationary" {
                    return Err(SpecFileError::Invalid {
                        context: "initial".into(),
                        source: MarkovError::UnknownModel(name.clone()),
                    });
                }
            }
            stationary_distribution(&map.transition)
                .map_err(ctx("initial (stationary)"))?
                .as_vec()
                .clone()
        }
        Some(InitialSpec::Vector(v)) => {
            let ok = v.len() == map.n_states()
                && v.iter().all(|&w| (0.0..=1.0).contains(&w))
                && (v.iter().sum::<f64>() - 1.0).abs() <= 1e-10;
            if !ok {
                return Err(SpecFileError::Invalid {
                    context: "initial".into(),
                    source: MarkovError::BadInitial { expected: map.n_states() },
                });
            }
            RVec::from_vec(v.clone())
        }
    };

    Ok(LoadedModel { map, mu })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "dimension": 3,
        "states": ["a", "b"],
        "transition": [[0.9, 0.1], [0.2, 0.8]],
        "increments": [
            [{"kind": "point_mass", "v": [0.5, 0.0, 0.0]},
             {"kind": "gaussian", "mean": [0,0,0], "cov": [[1,0,0],[0,1,0],[0,0,1]]}],
            [{"kind": "mixture", "weights": [0.5, 0.5],
              "components": [{"kind": "point_mass", "v": [1,0,0]},
                             {"kind": "point_mass", "v": [-1,0,0]}]},
             {"kind": "point_mass", "v": [0, 0.5, 0]}]
        ],
        "initial": "stationary"
    }"#;

    #[test]
    fn good_spec_loads() {
        let loaded = parse_model_spec(GOOD).unwrap();
        assert_eq!(loaded.map.n_states(), 2);
        assert_eq!(loaded.map.dim(), 3);
        // stationary initial: (2/3, 1/3)
        assert!((loaded.mu[0] - 2.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn bad_row_sum_reports_row() {
        let text = GOOD.replace("[0.9, 0.1]", "[0.9, 0.2]");
        match parse_model_spec(&text) {
            Err(SpecFileError::Invalid { context, source }) => {
                assert!(context.contains("row 0"), "context: {context}");
                assert!(matches!(source, MarkovError::RowSum { row: 0, .. }));
            }
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn bad_increment_dimension_reports_cell() {
        let text = GOOD.replace(r#""v": [0, 0.5, 0]"#, r#""v": [0, 0.5]"#);
        match parse_model_spec(&text) {
            Err(SpecFileError::Invalid { context, .. }) => {
                assert!(context.contains("increments[1][1]"), "context: {context}");
            }
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_is_a_json_error() {
        assert!(matches!(
            parse_model_spec("{ not json"),
            Err(SpecFileError::Json(_))
        ));
    }
}
