//! Serializable operator expression trees used by the experiment configs.

use serde::{Deserialize, Serialize};

use super::{
    adjoint_op, backward_shift, block_lower_2x2, compose, direct_sum, example1_weights,
    example2_op, example3_weights, forward_shift, identity, inverse_op, mult_exp,
    projection_constants, scale, sum, volterra, Operator, QuadratureScheme, WeightSchedule,
    ZooError,
};
use crate::linalg::{self, CMat, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorExpr {
    ForwardShift {
        weights: WeightsExpr,
        dim: usize,
    },
    BackwardShift {
        weights: WeightsExpr,
        dim: usize,
    },
    Example1 {
        dim: usize,
    },
    Example2 {
        dim: usize,
    },
    Example3 {
        blocks: usize,
        block_dim: usize,
    },
    Volterra {
        grid: usize,
        #[serde(default)]
        scheme: QuadratureScheme,
    },
    MultExp {
        grid: usize,
    },
    Identity {
        dim: usize,
    },
    ProjectionConstants {
        grid: usize,
    },
    Sum {
        terms: Vec<OperatorExpr>,
    },
    Compose {
        factors: Vec<OperatorExpr>,
    },
    Inverse {
        of: Box<OperatorExpr>,
    },
    Adjoint {
        of: Box<OperatorExpr>,
    },
    Scale {
        of: Box<OperatorExpr>,
        re: f64,
        #[serde(default)]
        im: f64,
    },
    DirectSum {
        blocks: Vec<OperatorExpr>,
    },
    #[serde(rename = "block_lower_2x2")]
    BlockLower2x2 {
        t11: Box<OperatorExpr>,
        t21: CouplingExpr,
        t22: Box<OperatorExpr>,
    },
}

/// Coupling block of `block_lower_2x2`; dimensions come from the diagonal
/// blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingExpr {
    Zero,
    RandomSeed(u64),
    /// Row-major entries as [re, im] pairs.
    Entries(Vec<Vec<[f64; 2]>>),
}

impl CouplingExpr {
    fn build(&self, rows: usize, cols: usize) -> Result<CMat, ZooError> {
        match self {
            CouplingExpr::Zero => Ok(CMat::zeros(rows, cols)),
            CouplingExpr::RandomSeed(seed) => {
                let mut m = CMat::zeros(rows, cols);
                for j in 0..cols {
                    m.column_mut(j).copy_from(&linalg::random_unit_vector(
                        rows,
                        seed.wrapping_add(j as u64),
                    ));
                }
                Ok(m)
            }
            CouplingExpr::Entries(entries) => {
                if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
                    return Err(ZooError::DimensionMismatch(format!(
                        "coupling entries are not {rows}x{cols}"
                    )));
                }
                let mut m = CMat::zeros(rows, cols);
                for (i, row) in entries.iter().enumerate() {
                    for (j, &[re, im]) in row.iter().enumerate() {
                        m[(i, j)] = C64::new(re, im);
                    }
                }
                Ok(m)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsExpr {
    Unit,
    Example1,
    Example3 { n: u64 },
    List(Vec<f64>),
}

impl WeightsExpr {
    pub fn build(&self) -> WeightSchedule {
        match self {
            WeightsExpr::Unit => WeightSchedule::unit("unit"),
            WeightsExpr::Example1 => example1_weights(),
            WeightsExpr::Example3 { n } => example3_weights(*n),
            WeightsExpr::List(ws) => WeightSchedule::from_list(ws.clone()),
        }
    }
}

impl OperatorExpr {
    /// Dimension of the resulting operator, checked before any construction.
    pub fn dim(&self) -> Result<usize, ZooError> {
        match self {
            OperatorExpr::ForwardShift { dim, .. }
            | OperatorExpr::BackwardShift { dim, .. }
            | OperatorExpr::Example1 { dim }
            | OperatorExpr::Example2 { dim }
            | OperatorExpr::Identity { dim } => Ok(*dim),
            OperatorExpr::Example3 { blocks, block_dim } => Ok(blocks * block_dim),
            OperatorExpr::Volterra { grid, .. }
            | OperatorExpr::MultExp { grid }
            | OperatorExpr::ProjectionConstants { grid } => Ok(*grid),
            OperatorExpr::Sum { terms } => common_dim(terms),
            OperatorExpr::Compose { factors } => common_dim(factors),
            OperatorExpr::Inverse { of } | OperatorExpr::Adjoint { of } => of.dim(),
            OperatorExpr::Scale { of, .. } => of.dim(),
            OperatorExpr::DirectSum { blocks } => {
                blocks.iter().map(|b| b.dim()).sum::<Result<usize, _>>()
            }
            OperatorExpr::BlockLower2x2 { t11, t22, .. } => Ok(t11.dim()? + t22.dim()?),
        }
    }

    pub fn build(&self) -> Result<Operator, ZooError> {
        self.dim()?;
        match self {
            OperatorExpr::ForwardShift { weights, dim } => {
                Ok(forward_shift(&weights.build(), *dim))
            }
            OperatorExpr::BackwardShift { weights, dim } => {
                Ok(backward_shift(&weights.build(), *dim))
            }
            OperatorExpr::Example1 { dim } => Ok(forward_shift(&example1_weights(), *dim)),
            OperatorExpr::Example2 { dim } => example2_op(*dim),
            OperatorExpr::Example3 { blocks, block_dim } => {
                Ok(super::example3_op(*blocks, *block_dim))
            }
            OperatorExpr::Volterra { grid, scheme } => Ok(volterra(*grid, *scheme)),
            OperatorExpr::MultExp { grid } => Ok(mult_exp(*grid)),
            OperatorExpr::Identity { dim } => Ok(identity(*dim)),
            OperatorExpr::ProjectionConstants { grid } => Ok(projection_constants(*grid)),
            OperatorExpr::Sum { terms } => {
                let mut ops = terms.iter().map(|t| t.build());
                let first = ops
                    .next()
                    .ok_or_else(|| ZooError::DimensionMismatch("empty sum".into()))??;
                ops.try_fold(first, |acc, op| sum(acc, op?))
            }
            OperatorExpr::Compose { factors } => {
                let mut ops = factors.iter().map(|t| t.build());
                let first = ops
                    .next()
                    .ok_or_else(|| ZooError::DimensionMismatch("empty composition".into()))??;
                ops.try_fold(first, |acc, op| compose(acc, op?))
            }
            OperatorExpr::Inverse { of } => inverse_op(&of.build()?),
            OperatorExpr::Adjoint { of } => Ok(adjoint_op(of.build()?)),
            OperatorExpr::Scale { of, re, im } => Ok(scale(of.build()?, C64::new(*re, *im))),
            OperatorExpr::DirectSum { blocks } => {
                let ops: Result<Vec<_>, _> = blocks.iter().map(|b| b.build()).collect();
                direct_sum(ops?)
            }
            OperatorExpr::BlockLower2x2 { t11, t21, t22 } => {
                let a = t11.build()?;
                let d = t22.build()?;
                let coupling = t21.build(d.dim(), a.dim())?;
                block_lower_2x2(a, coupling, d)
            }
        }
    }
}

fn common_dim(exprs: &[OperatorExpr]) -> Result<usize, ZooError> {
    let dims: Result<Vec<usize>, _> = exprs.iter().map(|e| e.dim()).collect();
    let dims = dims?;
    match dims.first() {
        None => Err(ZooError::DimensionMismatch("empty operator list".into())),
        Some(&d) if dims.iter().all(|&x| x == d) => Ok(d),
        _ => Err(ZooError::DimensionMismatch(format!(
            "incompatible dimensions {dims:?}"
        ))),
    }
}

/// Constructor and combinator names accepted in configs.
pub fn constructor_names() -> Vec<&'static str> {
    vec![
        "forward_shift",
        "backward_shift",
        "example1",
        "example2",
        "example3",
        "volterra",
        "mult_exp",
        "identity",
        "projection_constants",
        "sum",
        "compose",
        "inverse",
        "adjoint",
        "scale",
        "direct_sum",
        "block_lower_2x2",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_build_simple() {
        let expr: OperatorExpr =
            serde_json::from_str(r#"{"op": "example2", "dim": 8}"#).unwrap();
        let op = expr.build().unwrap();
        assert_eq!(op.dim(), 8);
    }

    #[test]
    fn parse_combinator_tree() {
        let json = r#"{
            "op": "sum",
            "terms": [
                {"op": "identity", "dim": 16},
                {"op": "volterra", "grid": 16}
            ]
        }"#;
        let expr: OperatorExpr = serde_json::from_str(json).unwrap();
        assert_eq!(expr.dim().unwrap(), 16);
        expr.build().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let json = r#"{"op": "identity", "dim": 4, "bogus": 1}"#;
        assert!(serde_json::from_str::<OperatorExpr>(json).is_err());
    }

    #[test]
    fn mismatched_sum_rejected() {
        let json = r#"{
            "op": "sum",
            "terms": [
                {"op": "identity", "dim": 4},
                {"op": "identity", "dim": 5}
            ]
        }"#;
        let expr: OperatorExpr = serde_json::from_str(json).unwrap();
        assert!(expr.dim().is_err());
    }

    #[test]
    fn block_lower_expr_builds() {
        let json = r#"{
            "op": "block_lower_2x2",
            "t11": {"op": "scale", "of": {"op": "identity", "dim": 4}, "re": 0.5},
            "t21": {"random_seed": 11},
            "t22": {"op": "identity", "dim": 4}
        }"#;
        let expr: OperatorExpr = serde_json::from_str(json).unwrap();
        let op = expr.build().unwrap();
        assert_eq!(op.dim(), 8);
    }
}
