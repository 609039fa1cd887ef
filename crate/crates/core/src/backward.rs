//! Minimal-norm backward sequences, membership evidence for the set of
//! origins of bounded backward sequences, range-tower membership, and
//! inverse-orbit growth.

use thiserror::Error;

use crate::linalg::{self, CVec};
use crate::zoo::{inverse_op, Operator, ZooError};

const SUPPORT_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum BackwardError {
    #[error("origin vector is zero")]
    ZeroVector,
    #[error("no preimage at step {step}: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NoPreimage { step: usize, residual: f64, tol: f64 },
    #[error("vector is not in the range of T^{m}: residual {residual:.3e}")]
    NotInRange { m: usize, residual: f64 },
    #[error(transparent)]
    Zoo(#[from] ZooError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMode {
    /// x_{n+1} is the minimal-norm preimage of x_n within ran T, so the
    /// chain can keep extending whenever any backward sequence does.
    StepwisePseudoinverse,
    /// x_m solves Tᵐ x_m = x with minimal norm; intermediate elements are
    /// forward images of x_m.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundedVerdict {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainOptions {
    /// Residual bound relative to ‖x₀‖.
    pub chain_tol_rel: f64,
    /// Rank cutoff for the pseudoinverse solves.
    pub rank_tol: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            chain_tol_rel: 1e-8,
            rank_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackwardChain {
    /// x₀ … x_m with T x_{n+1} = x_n.
    pub elements: Vec<CVec>,
    /// ‖T x_{n+1} − x_n‖ per step.
    pub residuals: Vec<f64>,
    pub norm_profile: Vec<f64>,
    pub sup_norm: f64,
    pub bounded_verdict: BoundedVerdict,
    /// Log-linear slope of the norm profile over its second half.
    pub growth_slope: f64,
    pub mode: ChainMode,
    /// Number of leading elements whose supports stay inside the faithful
    /// truncation window.
    pub trusted_prefix: usize,
}

/// Default chain horizon for a given truncation dimension.
pub fn default_horizon(dim: usize) -> usize {
    (dim / 2).clamp(1, 64)
}

pub fn backward_chain(
    op: &Operator,
    x: &CVec,
    m: usize,
    mode: ChainMode,
    opts: &ChainOptions,
) -> Result<BackwardChain, BackwardError> {
    let x_norm = x.norm();
    if x_norm == 0.0 {
        return Err(BackwardError::ZeroVector);
    }
    let chain_tol = opts.chain_tol_rel * x_norm;

    let elements = match mode {
        ChainMode::StepwisePseudoinverse => {
            let mut elements = vec![x.clone()];
            for step in 1..=m {
                let prev = elements.last().unwrap();
                // minimal-norm preimage constrained to ran T: T (T²)⁺ prev
                let w = op.power_min_norm_preimage(prev, 2, opts.rank_tol)?;
                let z = op.apply(&w);
                let residual = (op.apply(&z) - prev).norm();
                if residual > chain_tol {
                    return Err(BackwardError::NoPreimage {
                        step,
                        residual,
                        tol: chain_tol,
                    });
                }
                elements.push(z);
            }
            elements
        }
        ChainMode::Joint => {
            let z = op.power_min_norm_preimage(x, m, opts.rank_tol)?;
            let residual = (op.power_apply(&z, m) - x).norm();
            if residual > chain_tol {
                return Err(BackwardError::NotInRange { m, residual });
            }
            let mut elements: Vec<CVec> = (0..=m).map(|n| op.power_apply(&z, m - n)).collect();
            elements[0] = x.clone();
            elements
        }
    };

    let residuals: Vec<f64> = (0..m)
        .map(|n| (op.apply(&elements[n + 1]) - &elements[n]).norm())
        .collect();
    let norm_profile: Vec<f64> = elements.iter().map(|e| e.norm()).collect();
    let sup_norm = norm_profile.iter().cloned().fold(0.0, f64::max);
    let (bounded_verdict, growth_slope) = growth_fit(&norm_profile);

    let mut trusted_prefix = elements.len();
    for (n, e) in elements.iter().enumerate() {
        if !op.faithful_forward(linalg::support(e, SUPPORT_TOL), 1) {
            trusted_prefix = n;
            break;
        }
    }

    Ok(BackwardChain {
        elements,
        residuals,
        norm_profile,
        sup_norm,
        bounded_verdict,
        growth_slope,
        mode,
        trusted_prefix,
    })
}

/// Least-squares fit of log‖x_n‖ against n over the second half of the
/// profile. Slope above 0.01 reads as growth; a flat small-deviation profile
/// reads as bounded.
fn growth_fit(profile: &[f64]) -> (BoundedVerdict, f64) {
    let half = profile.len() / 2;
    let window: Vec<(f64, f64)> = profile
        .iter()
        .enumerate()
        .skip(half)
        .filter(|&(_, &v)| v > 0.0)
        .map(|(n, &v)| (n as f64, v.ln()))
        .collect();
    if window.len() < 2 {
        return (BoundedVerdict::Inconclusive, 0.0);
    }
    let n = window.len() as f64;
    let sx: f64 = window.iter().map(|(x, _)| x).sum();
    let sy: f64 = window.iter().map(|(_, y)| y).sum();
    let sxx: f64 = window.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = window.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom.abs() < f64::EPSILON {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    };
    let mean = sy / n;
    let max_dev = window
        .iter()
        .map(|(_, y)| (y - mean).abs())
        .fold(0.0, f64::max);
    let verdict = if slope > 0.01 {
        BoundedVerdict::Growing
    } else if slope.abs() < 1e-4 && max_dev < 0.05 {
        BoundedVerdict::Bounded
    } else {
        BoundedVerdict::Inconclusive
    };
    (verdict, slope)
}

/// is_constant iff max_n |‖x_n‖ − ‖x₀‖| ≤ tol·‖x₀‖.
pub fn norm_constancy(chain: &BackwardChain, tol: f64) -> (bool, f64) {
    let x0 = chain.norm_profile[0];
    let max_deviation = chain
        .norm_profile
        .iter()
        .map(|&n| (n - x0).abs())
        .fold(0.0, f64::max);
    (max_deviation <= tol * x0, max_deviation)
}

#[derive(Debug, Clone)]
pub enum MtVerdict {
    /// All joint-minimal chains stay flat under the cap.
    InMt { sup_norm: f64 },
    /// Either the minimal profile outgrew the cap, or some power has no
    /// preimage at all.
    NotInMt { witness: MtWitness },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone)]
pub enum MtWitness {
    ProfileGrowth { m: usize, norm: f64, cap: f64 },
    NoPreimage { m: usize, residual: f64 },
}

/// Evidence for membership in the set of origins of bounded backward
/// sequences. The joint-minimal profile dominates every backward sequence
/// from the same origin, so its growth is a genuine exclusion witness.
pub fn is_in_mt(
    op: &Operator,
    x: &CVec,
    horizon: usize,
    bound_cap: f64,
    opts: &ChainOptions,
) -> Result<MtVerdict, BackwardError> {
    let x_norm = x.norm();
    if x_norm == 0.0 {
        return Err(BackwardError::ZeroVector);
    }
    let chain_tol = opts.chain_tol_rel * x_norm;
    let mut profile = vec![x_norm];
    for m in 1..=horizon {
        let z = op.power_min_norm_preimage(x, m, opts.rank_tol)?;
        let residual = (op.power_apply(&z, m) - x).norm();
        if residual > chain_tol {
            return Ok(MtVerdict::NotInMt {
                witness: MtWitness::NoPreimage { m, residual },
            });
        }
        let norm = z.norm();
        if norm > bound_cap {
            return Ok(MtVerdict::NotInMt {
                witness: MtWitness::ProfileGrowth {
                    m,
                    norm,
                    cap: bound_cap,
                },
            });
        }
        profile.push(norm);
    }
    let sup_norm = profile.iter().cloned().fold(0.0, f64::max);
    let (verdict, slope) = growth_fit(&profile);
    match verdict {
        BoundedVerdict::Bounded => {
            // sanity check: |⟨x, y⟩| ≤ sup‖x_n‖ · min_n ‖T*ⁿy‖ must hold
            for seed in 0..4u64 {
                let y = linalg::random_unit_vector(x.len(), 0xbead + seed);
                let mut ty = y.clone();
                let mut min_adj = y.norm();
                for _ in 0..horizon {
                    ty = op.adjoint_apply(&ty);
                    min_adj = min_adj.min(ty.norm());
                }
                let lhs = linalg::inner(x, &y).norm();
                if lhs > sup_norm * min_adj + 1e-8 {
                    return Ok(MtVerdict::Inconclusive {
                        reason: format!(
                            "duality bound violated: |⟨x,y⟩| = {lhs:.3e} > {:.3e}",
                            sup_norm * min_adj
                        ),
                    });
                }
            }
            Ok(MtVerdict::InMt { sup_norm })
        }
        BoundedVerdict::Growing => Ok(MtVerdict::Inconclusive {
            reason: format!("minimal profile still growing (slope {slope:.3e}) under cap {bound_cap:.3e}"),
        }),
        BoundedVerdict::Inconclusive => Ok(MtVerdict::Inconclusive {
            reason: format!("profile neither flat nor clearly growing (slope {slope:.3e})"),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct TInfinityRecord {
    pub m: usize,
    /// ‖Tᵐ x_m − x‖ for the joint minimal solve.
    pub residual: f64,
    /// ‖x_m‖.
    pub minimal_norm: f64,
}

/// Per-power joint residuals and minimal preimage norms; small residuals at
/// every power are range-tower membership evidence.
pub fn t_infinity_membership(
    op: &Operator,
    x: &CVec,
    m_max: usize,
    opts: &ChainOptions,
) -> Result<Vec<TInfinityRecord>, BackwardError> {
    if x.norm() == 0.0 {
        return Err(BackwardError::ZeroVector);
    }
    let mut records = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let z = op.power_min_norm_preimage(x, m, opts.rank_tol)?;
        let residual = (op.power_apply(&z, m) - x).norm();
        records.push(TInfinityRecord {
            m,
            residual,
            minimal_norm: z.norm(),
        });
    }
    Ok(records)
}

#[derive(Debug, Clone)]
pub struct InverseOrbit {
    /// ‖T⁻ⁿx‖ for n = 0..=n_max.
    pub norms: Vec<f64>,
    pub verdict: BoundedVerdict,
    pub growth_slope: f64,
}

/// Norms of inverse iterates, with a growth verdict from the log-linear fit.
pub fn inverse_orbit_growth(
    op: &Operator,
    x: &CVec,
    n_max: usize,
) -> Result<InverseOrbit, BackwardError> {
    if x.norm() == 0.0 {
        return Err(BackwardError::ZeroVector);
    }
    let inv = inverse_op(op)?;
    let mut norms = Vec::with_capacity(n_max + 1);
    let mut y = x.clone();
    norms.push(y.norm());
    for _ in 0..n_max {
        y = inv.apply(&y);
        norms.push(y.norm());
    }
    let (verdict, growth_slope) = growth_fit(&norms);
    Ok(InverseOrbit {
        norms,
        verdict,
        growth_slope,
    })
}
