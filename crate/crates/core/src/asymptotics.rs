//! Orbit computation, stability classification, Cesàro approximation of the
//! asymptote Gram form, and the two block decompositions.

use thiserror::Error;

use crate::linalg::{self, CMat, CVec, EigSplit, C64};
use crate::zoo::{Operator, ZooError, DENSE_LIMIT};

/// Dense Gram accumulation is refused above this dimension.
pub const GRAM_DIM_LIMIT: usize = 2048;

const SUPPORT_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("orbit start vector is zero")]
    ZeroVector,
    #[error("dimension {dim} exceeds Gram limit {limit}")]
    GramTooLarge { dim: usize, limit: usize },
    #[error("stable-subspace cross-validation failed for basis vector {index} (verdict {verdict:?})")]
    CrossValidation { index: usize, verdict: Verdict },
    #[error("invariance defect {defect:.3e} exceeds {tol:.1e}; Gram not converged")]
    GramNotConverged { defect: f64, tol: f64 },
    #[error(transparent)]
    Zoo(#[from] ZooError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Decaying,
    BoundedBelow,
    Growing,
    Inconclusive,
}

/// Orbit verdict thresholds; the defaults classify every stock operator
/// correctly at the default horizons.
#[derive(Debug, Clone, Copy)]
pub struct OrbitOptions {
    pub decay_tol: f64,
    pub floor_frac: f64,
    pub growth_factor: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            decay_tol: 1e-6,
            floor_frac: 1e-3,
            growth_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub direction: Direction,
    /// ‖Tⁿx‖ for n = 0..=n_max.
    pub norms: Vec<f64>,
    /// Largest n for which the truncation reproduces the untruncated action.
    pub faithful_horizon: usize,
    pub verdict: Verdict,
    /// Minimum norm over the trusted window (n = 1..=faithful_horizon).
    pub liminf_proxy: f64,
}

pub fn orbit(
    op: &Operator,
    x: &CVec,
    n_max: usize,
    direction: Direction,
    opts: &OrbitOptions,
) -> Result<OrbitRecord, AsymptoticsError> {
    let x_norm = x.norm();
    if x_norm == 0.0 {
        return Err(AsymptoticsError::ZeroVector);
    }
    let support = linalg::support(x, SUPPORT_TOL);
    let adjoint = matches!(direction, Direction::Adjoint);
    let faithful_horizon = op.faithful_horizon(support, n_max, adjoint);

    let mut norms = Vec::with_capacity(n_max + 1);
    norms.push(x_norm);
    let mut y = x.clone();
    for _ in 0..n_max {
        y = match direction {
            Direction::Forward => op.apply(&y),
            Direction::Adjoint => op.adjoint_apply(&y),
        };
        norms.push(y.norm());
    }

    let h = faithful_horizon;
    let (verdict, liminf_proxy) = if h == 0 {
        (Verdict::Inconclusive, x_norm)
    } else {
        let window = &norms[1..=h];
        let min_w = window.iter().cloned().fold(f64::INFINITY, f64::min);
        let last = norms[h];
        let verdict = if min_w < opts.decay_tol * x_norm && last <= 10.0 * opts.decay_tol * x_norm
        {
            // envelope check: no rebound past an order of magnitude
            Verdict::Decaying
        } else if last > opts.growth_factor * x_norm {
            Verdict::Growing
        } else if min_w > opts.floor_frac * x_norm {
            Verdict::BoundedBelow
        } else {
            Verdict::Inconclusive
        };
        (verdict, min_w)
    };

    Ok(OrbitRecord {
        direction,
        norms,
        faithful_horizon,
        verdict,
        liminf_proxy,
    })
}

/// max_{1..=n_max} of the operator norm of Tⁿ. Exact singular values for
/// dim ≤ 128, power iteration on the dense power otherwise.
pub fn power_bound_estimate(op: &Operator, n_max: usize) -> (f64, usize) {
    let dim = op.dim();
    let mut best = 0.0;
    let mut attained = 1;
    if dim <= DENSE_LIMIT {
        let mut power = op.to_dense();
        let base = power.clone();
        let mut warm = linalg::random_unit_vector(dim, 0x5eed);
        for n in 1..=n_max {
            let est = if dim <= 128 {
                linalg::operator_norm(&power)
            } else {
                estimate_norm(&power, &mut warm)
            };
            if est > best {
                best = est;
                attained = n;
            }
            if n < n_max {
                power = &base * power;
            }
        }
    } else {
        // matrix-free fallback for very large truncations
        for n in 1..=n_max {
            let mut v = linalg::random_unit_vector(dim, n as u64);
            let mut est = 0.0;
            for _ in 0..20 {
                let w = op.adjoint_power_apply(&op.power_apply(&v, n), n);
                let norm = w.norm();
                if norm == 0.0 {
                    est = 0.0;
                    break;
                }
                est = norm.sqrt();
                v = w / C64::new(norm, 0.0);
            }
            if est > best {
                best = est;
                attained = n;
            }
        }
    }
    (best, attained)
}

fn estimate_norm(a: &CMat, warm: &mut CVec) -> f64 {
    let mut est = 0.0;
    for _ in 0..40 {
        let w = a.adjoint() * (a * &*warm);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        est = norm.sqrt();
        *warm = w / C64::new(norm, 0.0);
    }
    est
}

/// Windowed Cesàro average of the power Grams.
///
/// Adjoint direction: mean of Tⁿ(T*)ⁿ over n in the tail window (N/2, N];
/// ⟨Gx, x⟩ then approximates the limiting value of ‖T*ⁿx‖². The forward
/// direction mirrors this with (T*)ⁿTⁿ and ‖Tⁿx‖².
pub struct AsymptoteGram {
    pub average: CMat,
    pub horizon: usize,
    pub direction: Direction,
    /// sup over checkpoints in the last quarter of ‖G_n − G_N‖/‖G_N‖.
    pub stabilization: f64,
    /// False when the running averages moved by more than 5% near the end.
    pub glim_resolved: bool,
    pub kernel_basis: Vec<CVec>,
    pub range_basis: Vec<CVec>,
    pub eigenvalues: Vec<f64>,
}

pub const GRAM_SPLIT_TOL: f64 = 1e-8;

pub fn asymptote_gram(
    op: &Operator,
    horizon: usize,
    direction: Direction,
) -> Result<AsymptoteGram, AsymptoticsError> {
    let dim = op.dim();
    if dim > GRAM_DIM_LIMIT {
        return Err(AsymptoticsError::GramTooLarge {
            dim,
            limit: GRAM_DIM_LIMIT,
        });
    }
    let n = horizon.max(8);
    let window_start = n / 2; // average over n = window_start+1 ..= n
    let window_len = n - window_start;

    // A_k holds (T*)ᵏ (adjoint direction) or Tᵏ (forward); G accumulates
    // A_k* A_k over the window.
    let mut a = CMat::identity(dim, dim);
    let mut g_sum = CMat::zeros(dim, dim);
    let mut count = 0usize;
    let mut checkpoints: Vec<(usize, CMat)> = Vec::new();
    let checkpoint_every = (window_len / 4).max(1);

    for k in 1..=n {
        let mut next = CMat::zeros(dim, dim);
        for j in 0..dim {
            let col = a.column(j).into_owned();
            let mapped = match direction {
                Direction::Adjoint => op.adjoint_apply(&col),
                Direction::Forward => op.apply(&col),
            };
            next.column_mut(j).copy_from(&mapped);
        }
        a = next;
        if k > window_start {
            g_sum += a.adjoint() * &a;
            count += 1;
            let in_last_quarter = k > n - window_len / 4;
            if dim <= 1024 && in_last_quarter && count % checkpoint_every == 0 && k < n {
                checkpoints.push((count, g_sum.clone()));
            }
        }
    }

    let g = g_sum.scale(1.0 / count as f64);
    let g_norm = g.norm().max(f64::MIN_POSITIVE);
    let stabilization = checkpoints
        .iter()
        .map(|(c, s)| (s.scale(1.0 / *c as f64) - &g).norm() / g_norm)
        .fold(0.0, f64::max);
    let glim_resolved = stabilization <= 0.05;

    // floor = 1: for a power-bounded operator acting on unit vectors the Gram
    // quadratic form lives on the scale of ‖x‖² = 1, so a uniformly tiny Gram
    // means the whole space is stable.
    let EigSplit {
        kernel_basis,
        range_basis,
        eigenvalues,
    } = linalg::hermitian_eig_split_with_floor(&g, GRAM_SPLIT_TOL, 1.0)?;

    Ok(AsymptoteGram {
        average: g,
        horizon: n,
        direction,
        stabilization,
        glim_resolved,
        kernel_basis,
        range_basis,
        eigenvalues,
    })
}

/// Basis of {x : T*ⁿx → 0}, cross-validated by direct adjoint orbits.
pub fn stable_subspace(op: &Operator, horizon: usize) -> Result<Vec<CVec>, AsymptoticsError> {
    let gram = asymptote_gram(op, horizon, Direction::Adjoint)?;
    validate_decaying(op, &gram.kernel_basis, horizon, Direction::Adjoint)?;
    Ok(gram.kernel_basis)
}

fn validate_decaying(
    op: &Operator,
    basis: &[CVec],
    horizon: usize,
    direction: Direction,
) -> Result<(), AsymptoticsError> {
    let opts = OrbitOptions::default();
    for (index, v) in basis.iter().enumerate() {
        let rec = orbit(op, v, horizon.max(8), direction, &opts)?;
        if !matches!(rec.verdict, Verdict::Decaying) {
            return Err(AsymptoticsError::CrossValidation {
                index,
                verdict: rec.verdict,
            });
        }
    }
    Ok(())
}

pub struct Decomposition {
    pub stable_basis: Vec<CVec>,
    pub mt_closure_basis: Vec<CVec>,
    /// max |⟨u, v⟩| across the two bases.
    pub orthogonality_defect: f64,
    /// Set when the defect exceeds 1e−6 (slow Cesàro convergence).
    pub defect_flagged: bool,
}

/// Splits H into the adjoint-stable kernel and the closure of the
/// bounded-backward-sequence origins.
pub fn decompose(op: &Operator, horizon: usize) -> Result<Decomposition, AsymptoticsError> {
    let gram = asymptote_gram(op, horizon, Direction::Adjoint)?;
    let mut defect: f64 = 0.0;
    for u in &gram.kernel_basis {
        for v in &gram.range_basis {
            defect = defect.max(linalg::inner(u, v).norm());
        }
    }
    Ok(Decomposition {
        stable_basis: gram.kernel_basis,
        mt_closure_basis: gram.range_basis,
        orthogonality_defect: defect,
        defect_flagged: defect > 1e-6,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    AllDecaying,
    AllBoundedBelow,
    Mixed,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct ClassReport {
    pub forward: Evidence,
    pub adjoint: Evidence,
    pub per_vector: Vec<(Verdict, Verdict)>,
    pub power_bound: f64,
    pub power_bound_attained_at: usize,
    /// The power-bounded propagation check: once an orbit norm drops below a
    /// level, later norms stay within M_est times that level.
    pub stability_propagation_ok: bool,
    pub horizon: usize,
}

pub fn classify(
    op: &Operator,
    samples: &[CVec],
    n_max: usize,
    opts: &OrbitOptions,
) -> Result<ClassReport, AsymptoticsError> {
    assert!(!samples.is_empty(), "classification needs sample vectors");
    let (m_est, attained) = power_bound_estimate(op, n_max.min(32));
    let mut per_vector = Vec::with_capacity(samples.len());
    let mut propagation_ok = true;
    let mut fwd = Vec::new();
    let mut adj = Vec::new();
    for x in samples {
        let f = orbit(op, x, n_max, Direction::Forward, opts)?;
        let a = orbit(op, x, n_max, Direction::Adjoint, opts)?;
        for rec in [&f, &a] {
            let h = rec.faithful_horizon;
            let mut min_so_far = f64::INFINITY;
            for n in 0..=h {
                min_so_far = min_so_far.min(rec.norms[n]);
                if rec.norms[n] > min_so_far * m_est * (1.0 + 1e-8) + 1e-14 {
                    propagation_ok = false;
                }
            }
        }
        fwd.push(f.verdict);
        adj.push(a.verdict);
        per_vector.push((f.verdict, a.verdict));
    }
    Ok(ClassReport {
        forward: aggregate(&fwd),
        adjoint: aggregate(&adj),
        per_vector,
        power_bound: m_est,
        power_bound_attained_at: attained,
        stability_propagation_ok: propagation_ok,
        horizon: n_max,
    })
}

fn aggregate(verdicts: &[Verdict]) -> Evidence {
    let all = |v: Verdict| verdicts.iter().all(|&x| x == v);
    if all(Verdict::Decaying) {
        Evidence::AllDecaying
    } else if verdicts
        .iter()
        .all(|&x| matches!(x, Verdict::BoundedBelow | Verdict::Growing))
    {
        Evidence::AllBoundedBelow
    } else if verdicts.iter().all(|&x| x == Verdict::Inconclusive) {
        Evidence::Inconclusive
    } else {
        Evidence::Mixed
    }
}

pub const KERCHY_INVARIANCE_TOL: f64 = 1e-8;

pub struct KerchyBlocks {
    /// Orthonormal basis of {x : Tⁿx → 0}.
    pub n_basis: Vec<CVec>,
    /// T restricted to the stable subspace.
    pub t11: CMat,
    /// Coupling from the complement into the stable subspace.
    pub t21: CMat,
    /// Compression of T to the complement.
    pub t22: CMat,
    /// Norm of the block that invariance forces to vanish.
    pub invariance_defect: f64,
}

/// Block form of T along the forward-stable subspace and its complement.
pub fn kerchy_blocks(op: &Operator, horizon: usize) -> Result<KerchyBlocks, AsymptoticsError> {
    let gram = asymptote_gram(op, horizon, Direction::Forward)?;
    validate_decaying(op, &gram.kernel_basis, horizon, Direction::Forward)?;

    let dim = op.dim();
    let k = gram.kernel_basis.len();
    let mut q = CMat::zeros(dim, dim);
    for (j, v) in gram
        .kernel_basis
        .iter()
        .chain(gram.range_basis.iter())
        .enumerate()
    {
        q.column_mut(j).copy_from(v);
    }
    let t = q.adjoint() * op.to_dense() * &q;

    let t11 = t.view((0, 0), (k, k)).into_owned();
    let t21 = t.view((0, k), (k, dim - k)).into_owned();
    let t22 = t.view((k, k), (dim - k, dim - k)).into_owned();
    let defect = t.view((k, 0), (dim - k, k)).norm();
    if defect > KERCHY_INVARIANCE_TOL {
        return Err(AsymptoticsError::GramNotConverged {
            defect,
            tol: KERCHY_INVARIANCE_TOL,
        });
    }
    Ok(KerchyBlocks {
        n_basis: gram.kernel_basis,
        t11,
        t21,
        t22,
        invariance_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis_vector;
    use crate::zoo;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn half_identity(dim: usize) -> Operator {
        zoo::scale(zoo::identity(dim), c(0.5, 0.0))
    }

    #[test]
    fn orbit_scalar_contraction_decays() {
        let op = half_identity(4);
        let rec = orbit(
            &op,
            &basis_vector(4, 0),
            60,
            Direction::Forward,
            &OrbitOptions::default(),
        )
        .unwrap();
        assert_eq!(rec.verdict, Verdict::Decaying);
        for (n, &norm) in rec.norms.iter().enumerate() {
            assert!((norm - 0.5_f64.powi(n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn orbit_unitary_is_bounded_below() {
        let op = zoo::dense(CMat::from_diagonal(&CVec::from_vec(vec![
            c(0.0, 1.0),
            c(-1.0, 0.0),
        ])));
        let x = linalg::random_unit_vector(2, 4);
        let rec = orbit(&op, &x, 100, Direction::Forward, &OrbitOptions::default()).unwrap();
        assert_eq!(rec.verdict, Verdict::BoundedBelow);
        for &n in &rec.norms {
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orbit_rejects_zero_vector() {
        let op = zoo::identity(3);
        let z = CVec::zeros(3);
        assert!(matches!(
            orbit(&op, &z, 5, Direction::Forward, &OrbitOptions::default()),
            Err(AsymptoticsError::ZeroVector)
        ));
    }

    #[test]
    fn orbit_agrees_with_dense_powering() {
        let op = zoo::volterra(24, zoo::QuadratureScheme::Midpoint);
        let x = linalg::random_unit_vector(24, 17);
        let rec = orbit(&op, &x, 12, Direction::Forward, &OrbitOptions::default()).unwrap();
        let dense = op.to_dense();
        let mut power = CMat::identity(24, 24);
        for n in 0..=12 {
            let via_dense = (&power * &x).norm();
            assert!((via_dense - rec.norms[n]).abs() < 1e-10, "n = {n}");
            power = &dense * power;
        }
    }

    #[test]
    fn power_bound_contraction() {
        let op = zoo::backward_shift(&zoo::example3_weights(3), 16);
        let (m, _) = power_bound_estimate(&op, 12);
        assert!(m <= 1.0 + 1e-10);
    }

    #[test]
    fn power_bound_idempotent_flat() {
        let op = zoo::example2_op(12).unwrap();
        let (m, _) = power_bound_estimate(&op, 10);
        let norm1 = linalg::operator_norm(&op.to_dense());
        assert!((m - norm1).abs() < 1e-10);
    }

    #[test]
    fn power_bound_shift_witness() {
        let op = zoo::forward_shift(&zoo::example1_weights(), 70);
        let (m, _) = power_bound_estimate(&op, 12);
        assert!(m >= 4.0, "estimate {m}");
    }

    #[test]
    fn gram_of_unitary_is_identity() {
        let op = zoo::diag_unitary(6, 2);
        let gram = asymptote_gram(&op, 16, Direction::Adjoint).unwrap();
        assert!((&gram.average - CMat::identity(6, 6)).norm() < 1e-10);
        assert!(gram.kernel_basis.is_empty());
        assert!(gram.glim_resolved);
    }

    #[test]
    fn gram_of_contraction_vanishes() {
        let op = half_identity(3);
        let gram = asymptote_gram(&op, 64, Direction::Adjoint).unwrap();
        assert!(gram.average.norm() < 1e-9);
        assert_eq!(gram.kernel_basis.len(), 3);
    }

    #[test]
    fn gram_mixed_block_splits() {
        let op = zoo::direct_sum(vec![half_identity(1), zoo::diag_unitary(1, 3)]).unwrap();
        let gram = asymptote_gram(&op, 64, Direction::Adjoint).unwrap();
        assert_eq!(gram.kernel_basis.len(), 1);
        assert_eq!(gram.range_basis.len(), 1);
        assert!(gram.kernel_basis[0][1].norm() < 1e-10);
        assert!(gram.range_basis[0][0].norm() < 1e-10);
    }

    #[test]
    fn gram_refuses_large_dimension() {
        let op = zoo::identity(GRAM_DIM_LIMIT + 1);
        assert!(matches!(
            asymptote_gram(&op, 8, Direction::Adjoint),
            Err(AsymptoticsError::GramTooLarge { .. })
        ));
    }

    #[test]
    fn stable_subspace_cross_validates() {
        let op = zoo::direct_sum(vec![half_identity(2), zoo::diag_unitary(2, 9)]).unwrap();
        let basis = stable_subspace(&op, 64).unwrap();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(v.rows(2, 2).norm() < 1e-9);
        }
    }

    #[test]
    fn decompose_unitary_and_nilpotent() {
        let u = zoo::diag_unitary(4, 11);
        let d = decompose(&u, 32).unwrap();
        assert!(d.stable_basis.is_empty());
        assert_eq!(d.mt_closure_basis.len(), 4);

        let j = zoo::jordan_nilpotent(4);
        let d = decompose(&j, 32).unwrap();
        assert_eq!(d.stable_basis.len(), 4);
        assert!(d.mt_closure_basis.is_empty());
    }

    #[test]
    fn classify_unitary_never_reports_decay() {
        let op = zoo::random_unitary(6, 21);
        let samples: Vec<CVec> = (0..4).map(|s| linalg::random_unit_vector(6, s)).collect();
        let report = classify(&op, &samples, 50, &OrbitOptions::default()).unwrap();
        assert_eq!(report.forward, Evidence::AllBoundedBelow);
        assert_eq!(report.adjoint, Evidence::AllBoundedBelow);
        assert!(report.stability_propagation_ok);
    }

    #[test]
    fn classify_backward_unit_shift_forward_decay() {
        let op = zoo::backward_shift(&zoo::WeightSchedule::unit("unit"), 64);
        let samples: Vec<CVec> = (0..8).map(|i| basis_vector(64, i)).collect();
        let report = classify(&op, &samples, 70, &OrbitOptions::default()).unwrap();
        assert_eq!(report.forward, Evidence::AllDecaying);
    }

    #[test]
    fn kerchy_pure_cases() {
        let contraction = half_identity(4);
        let blocks = kerchy_blocks(&contraction, 64).unwrap();
        assert_eq!(blocks.n_basis.len(), 4);
        assert_eq!(blocks.t22.nrows(), 0);

        let u = zoo::diag_unitary(4, 5);
        let blocks = kerchy_blocks(&u, 64).unwrap();
        assert!(blocks.n_basis.is_empty());
        assert_eq!(blocks.t11.nrows(), 0);
        assert_eq!(blocks.t22.nrows(), 4);
    }

    #[test]
    fn kerchy_block_diagonal_recovered() {
        let op = zoo::direct_sum(vec![zoo::jordan_nilpotent(3), zoo::diag_unitary(3, 8)]).unwrap();
        let blocks = kerchy_blocks(&op, 48).unwrap();
        assert_eq!(blocks.n_basis.len(), 3);
        assert!(blocks.invariance_defect <= KERCHY_INVARIANCE_TOL);
        for v in &blocks.n_basis {
            assert!(v.rows(3, 3).norm() < 1e-9);
        }
    }
}
