//! JSON problem descriptions.
//!
//! Three shapes are accepted:
//!
//! ```json
//! {"A": [[0, 10], [0, 0]], "b": [0, 10], "k": [0.3, 0.5], "E": [0, 10], "z_max": 0.1}
//! {"A_cl": [[0, 10], [-3, -5]], "E": [[0], [10]], "z_max": [0.1], "output_index": 1}
//! {"tfc": {"v": 10, "k_d": 0.3, "k_theta": 0.5, "z_max": 0.1, "d_max": 0.4}}
//! ```
//!
//! `E` may be a flat vector (one disturbance channel) or a list of rows;
//! `z_max` may be a scalar applied to every channel. `output_index` is
//! 1-based and defaults to 1.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lti::{build_closed_loop, ClosedLoopSystem, DisturbanceBounds};
use crate::tfc::{build_tfc, TfcParams};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Rows(Vec<Vec<f64>>),
    Column(Vec<f64>),
}

impl MatrixInput {
    fn into_matrix(self, name: &str) -> Result<DMatrix<f64>> {
        match self {
            MatrixInput::Column(c) => Ok(DMatrix::from_column_slice(c.len(), 1, &c)),
            MatrixInput::Rows(rows) => {
                let ncols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(Error::DimensionMismatch(format!("{name} has rows of unequal length")));
                }
                Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ZMax {
    Uniform(f64),
    PerChannel(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(rename = "A")]
    a: Option<MatrixInput>,
    b: Option<Vec<f64>>,
    k: Option<Vec<f64>>,
    #[serde(rename = "A_cl")]
    a_cl: Option<MatrixInput>,
    #[serde(rename = "E")]
    e: Option<MatrixInput>,
    z_max: Option<ZMax>,
    output_index: Option<usize>,
    tfc: Option<TfcParams>,
}

/// A parsed system together with its disturbance bounds and the state to bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub system: ClosedLoopSystem,
    pub z: DisturbanceBounds,
    /// 0-based state index.
    pub output: usize,
    pub tfc: Option<TfcParams>,
}

pub fn parse_problem(json: &str) -> Result<Problem> {
    let raw: RawProblem =
        serde_json::from_str(json).map_err(|e| Error::InvalidParameter(format!("malformed input: {e}")))?;
    let output = match raw.output_index {
        Some(0) => return Err(Error::InvalidParameter("output_index is 1-based".into())),
        Some(i) => i - 1,
        None => 0,
    };

    let (system, tfc, z_default) = match (raw.tfc, raw.a_cl, raw.a) {
        (Some(p), None, None) => {
            if raw.e.is_some() || raw.b.is_some() || raw.k.is_some() {
                return Err(Error::InvalidParameter("tfc input takes no matrices".into()));
            }
            (build_tfc(&p)?, Some(p), Some(ZMax::Uniform(p.z_max)))
        }
        (None, Some(a_cl), None) => {
            if raw.b.is_some() || raw.k.is_some() {
                return Err(Error::InvalidParameter("A_cl input takes no b or k".into()));
            }
            let e = raw.e.ok_or_else(|| Error::InvalidParameter("missing E".into()))?;
            (ClosedLoopSystem::new(a_cl.into_matrix("A_cl")?, e.into_matrix("E")?)?, None, None)
        }
        (None, None, Some(a)) => {
            let missing = |n: &str| Error::InvalidParameter(format!("missing {n}"));
            let b = raw.b.ok_or_else(|| missing("b"))?;
            let k = raw.k.ok_or_else(|| missing("k"))?;
            let e = raw.e.ok_or_else(|| missing("E"))?;
            let sys = build_closed_loop(
                &a.into_matrix("A")?,
                &DVector::from_vec(b),
                &DVector::from_vec(k),
                &e.into_matrix("E")?,
            )?;
            (sys, None, None)
        }
        _ => return Err(Error::InvalidParameter("input needs exactly one of \"A\", \"A_cl\" or \"tfc\"".into())),
    };

    let z = match raw.z_max.or(z_default) {
        Some(ZMax::Uniform(z)) => DisturbanceBounds::uniform(system.n_z(), z)?,
        Some(ZMax::PerChannel(z)) => {
            if z.len() != system.n_z() {
                return Err(Error::DimensionMismatch(format!(
                    "z_max has {} entries, E has {} columns",
                    z.len(),
                    system.n_z()
                )));
            }
            DisturbanceBounds::new(z)?
        }
        None => return Err(Error::InvalidParameter("missing z_max".into())),
    };
    if output >= system.n_x() {
        return Err(Error::IndexOutOfRange(format!("output_index {} exceeds n_x = {}", output + 1, system.n_x())));
    }
    Ok(Problem { system, z, output, tfc })
}
