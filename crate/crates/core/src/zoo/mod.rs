//! Operator constructions: weighted shifts, pairwise idempotent sums,
//! quadrature truncations of the Volterra operator, and combinators.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{self, CMat, CVec, C64};

mod weights;
pub mod expr;

pub use weights::{example1_weights, example3_weights, nk_sequence, WeightError, WeightSchedule};

/// Hard cap on dense materialization.
pub const DENSE_LIMIT: usize = 4096;

const INVERSE_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pairwise operator needs even dimension, got {0}")]
    OddDimension(usize),
    #[error("operator is numerically singular (condition estimate {cond:.3e})")]
    Singular { cond: f64 },
    #[error("dimension {dim} exceeds dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindTag {
    ForwardShift,
    BackwardShift,
    Dense,
    Volterra,
    DirectSum,
    Block2x2,
    Inverse,
    Similarity,
    IdempotentPairsum,
}

impl KindTag {
    pub fn as_str(self) -> &'static str {
        match self {
            KindTag::ForwardShift => "forward-shift",
            KindTag::BackwardShift => "backward-shift",
            KindTag::Dense => "dense",
            KindTag::Volterra => "volterra",
            KindTag::DirectSum => "direct-sum",
            KindTag::Block2x2 => "block-2x2",
            KindTag::Inverse => "inverse",
            KindTag::Similarity => "similarity",
            KindTag::IdempotentPairsum => "idempotent-pairsum",
        }
    }
}

#[derive(Clone)]
enum OpKind {
    /// S e_i = w_i e_{i+1}; `weights[j]` is w_{j+1}.
    ForwardShift { weights: Arc<Vec<f64>> },
    /// S e_{i+1} = w_i e_i; same storage convention.
    BackwardShift { weights: Arc<Vec<f64>> },
    Dense { mat: Arc<CMat>, adj: Arc<CMat> },
    DirectSum { blocks: Vec<Operator>, offsets: Vec<usize> },
    /// (a, b) ↦ (T₁₁ a, T₂₁ a + T₂₂ b).
    BlockLower {
        t11: Box<Operator>,
        t21: Arc<CMat>,
        t21_adj: Arc<CMat>,
        t22: Box<Operator>,
    },
    Sum(Box<Operator>, Box<Operator>),
    /// Compose(a, b) applies b first.
    Compose(Box<Operator>, Box<Operator>),
    Scale(Box<Operator>, C64),
    Adjoint(Box<Operator>),
}

/// A finite truncation of a Hilbert-space operator with forward and adjoint
/// application and truncation-faithfulness metadata.
#[derive(Clone)]
pub struct Operator {
    dim: usize,
    kind: OpKind,
    tag: KindTag,
    norm_bound_hint: Option<f64>,
}

impl Operator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind_tag(&self) -> KindTag {
        self.tag
    }

    pub fn norm_bound_hint(&self) -> Option<f64> {
        self.norm_bound_hint
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        assert_eq!(x.len(), self.dim, "vector/operator dimension mismatch");
        match &self.kind {
            OpKind::ForwardShift { weights } => {
                let mut y = CVec::zeros(self.dim);
                for j in 0..self.dim - 1 {
                    y[j + 1] = x[j] * C64::new(weights[j], 0.0);
                }
                y
            }
            OpKind::BackwardShift { weights } => {
                let mut y = CVec::zeros(self.dim);
                for j in 0..self.dim - 1 {
                    y[j] = x[j + 1] * C64::new(weights[j], 0.0);
                }
                y
            }
            OpKind::Dense { mat, .. } => mat.as_ref() * x,
            OpKind::DirectSum { blocks, offsets } => {
                let mut y = CVec::zeros(self.dim);
                for (block, &off) in blocks.iter().zip(offsets) {
                    let xb = x.rows(off, block.dim).into_owned();
                    let yb = block.apply(&xb);
                    y.rows_mut(off, block.dim).copy_from(&yb);
                }
                y
            }
            OpKind::BlockLower { t11, t21, t22, .. } => {
                let d1 = t11.dim;
                let a = x.rows(0, d1).into_owned();
                let b = x.rows(d1, t22.dim).into_owned();
                let mut y = CVec::zeros(self.dim);
                y.rows_mut(0, d1).copy_from(&t11.apply(&a));
                let lower = t21.as_ref() * &a + t22.apply(&b);
                y.rows_mut(d1, t22.dim).copy_from(&lower);
                y
            }
            OpKind::Sum(a, b) => a.apply(x) + b.apply(x),
            OpKind::Compose(a, b) => a.apply(&b.apply(x)),
            OpKind::Scale(a, c) => a.apply(x) * *c,
            OpKind::Adjoint(a) => a.adjoint_apply(x),
        }
    }

    pub fn adjoint_apply(&self, x: &CVec) -> CVec {
        assert_eq!(x.len(), self.dim, "vector/operator dimension mismatch");
        match &self.kind {
            OpKind::ForwardShift { weights } => {
                let mut y = CVec::zeros(self.dim);
                for j in 0..self.dim - 1 {
                    y[j] = x[j + 1] * C64::new(weights[j], 0.0);
                }
                y
            }
            OpKind::BackwardShift { weights } => {
                let mut y = CVec::zeros(self.dim);
                for j in 0..self.dim - 1 {
                    y[j + 1] = x[j] * C64::new(weights[j], 0.0);
                }
                y
            }
            OpKind::Dense { adj, .. } => adj.as_ref() * x,
            OpKind::DirectSum { blocks, offsets } => {
                let mut y = CVec::zeros(self.dim);
                for (block, &off) in blocks.iter().zip(offsets) {
                    let xb = x.rows(off, block.dim).into_owned();
                    let yb = block.adjoint_apply(&xb);
                    y.rows_mut(off, block.dim).copy_from(&yb);
                }
                y
            }
            OpKind::BlockLower {
                t11, t21_adj, t22, ..
            } => {
                let d1 = t11.dim;
                let a = x.rows(0, d1).into_owned();
                let b = x.rows(d1, t22.dim).into_owned();
                let mut y = CVec::zeros(self.dim);
                let upper = t11.adjoint_apply(&a) + t21_adj.as_ref() * &b;
                y.rows_mut(0, d1).copy_from(&upper);
                y.rows_mut(d1, t22.dim).copy_from(&t22.adjoint_apply(&b));
                y
            }
            OpKind::Sum(a, b) => a.adjoint_apply(x) + b.adjoint_apply(x),
            OpKind::Compose(a, b) => b.adjoint_apply(&a.adjoint_apply(x)),
            OpKind::Scale(a, c) => a.adjoint_apply(x) * c.conj(),
            OpKind::Adjoint(a) => a.apply(x),
        }
    }

    pub fn power_apply(&self, x: &CVec, n: usize) -> CVec {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.apply(&y);
        }
        y
    }

    pub fn adjoint_power_apply(&self, x: &CVec, n: usize) -> CVec {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.adjoint_apply(&y);
        }
        y
    }

    /// Whether Tⁿ on vectors supported in the first `support` coordinates
    /// matches the untruncated operator. Conservative for combinators.
    pub fn faithful_forward(&self, support: usize, n: usize) -> bool {
        match &self.kind {
            OpKind::ForwardShift { .. } => support + n <= self.dim,
            OpKind::BackwardShift { .. } | OpKind::Dense { .. } => true,
            OpKind::DirectSum { blocks, offsets } => {
                blocks.iter().zip(offsets).all(|(block, &off)| {
                    let s = support.saturating_sub(off).min(block.dim);
                    block.faithful_forward(s, n)
                })
            }
            OpKind::BlockLower { t11, t22, .. } => {
                t11.faithful_forward(t11.dim, n) && t22.faithful_forward(t22.dim, n)
            }
            OpKind::Sum(a, b) => a.faithful_forward(support, n) && b.faithful_forward(support, n),
            OpKind::Compose(a, b) => {
                a.faithful_forward((support + n).min(self.dim), n) && b.faithful_forward(support, n)
            }
            OpKind::Scale(a, _) => a.faithful_forward(support, n),
            OpKind::Adjoint(a) => a.faithful_adjoint(support, n),
        }
    }

    /// Same as [`faithful_forward`](Self::faithful_forward) for (T*)ⁿ.
    pub fn faithful_adjoint(&self, support: usize, n: usize) -> bool {
        match &self.kind {
            OpKind::ForwardShift { .. } | OpKind::Dense { .. } => true,
            OpKind::BackwardShift { .. } => support + n <= self.dim,
            OpKind::DirectSum { blocks, offsets } => {
                blocks.iter().zip(offsets).all(|(block, &off)| {
                    let s = support.saturating_sub(off).min(block.dim);
                    block.faithful_adjoint(s, n)
                })
            }
            OpKind::BlockLower { t11, t22, .. } => {
                t11.faithful_adjoint(t11.dim, n) && t22.faithful_adjoint(t22.dim, n)
            }
            OpKind::Sum(a, b) => a.faithful_adjoint(support, n) && b.faithful_adjoint(support, n),
            OpKind::Compose(a, b) => {
                b.faithful_adjoint((support + n).min(self.dim), n) && a.faithful_adjoint(support, n)
            }
            OpKind::Scale(a, _) => a.faithful_adjoint(support, n),
            OpKind::Adjoint(a) => a.faithful_forward(support, n),
        }
    }

    /// Largest n ≤ n_max still inside the faithful window for the given
    /// support and direction.
    pub fn faithful_horizon(&self, support: usize, n_max: usize, adjoint: bool) -> usize {
        let ok = |n: usize| {
            if adjoint {
                self.faithful_adjoint(support, n)
            } else {
                self.faithful_forward(support, n)
            }
        };
        let mut h = 0;
        for n in 1..=n_max {
            if ok(n) {
                h = n;
            } else {
                break;
            }
        }
        h
    }

    pub fn to_dense(&self) -> CMat {
        assert!(
            self.dim <= DENSE_LIMIT,
            "dimension {} exceeds dense limit {DENSE_LIMIT}",
            self.dim
        );
        if let OpKind::Dense { mat, .. } = &self.kind {
            return mat.as_ref().clone();
        }
        let mut m = CMat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.apply(&linalg::basis_vector(self.dim, j));
            m.column_mut(j).copy_from(&col);
        }
        m
    }

    /// Dense matrix of Tᵐ; direct sums stay block-wise to avoid large
    /// materializations.
    fn dense_power(&self, m: usize) -> CMat {
        let base = self.to_dense();
        let mut acc = CMat::identity(self.dim, self.dim);
        for _ in 0..m {
            acc = &base * acc;
        }
        acc
    }

    /// Minimal-norm solution of T z = b.
    pub fn min_norm_preimage(&self, b: &CVec, tol: f64) -> Result<CVec, ZooError> {
        self.power_min_norm_preimage(b, 1, tol)
    }

    /// Minimal-norm solution of Tᵐ z = b.
    pub fn power_min_norm_preimage(&self, b: &CVec, m: usize, tol: f64) -> Result<CVec, ZooError> {
        if b.len() != self.dim {
            return Err(ZooError::DimensionMismatch(format!(
                "operator dim {} vs rhs dim {}",
                self.dim,
                b.len()
            )));
        }
        match &self.kind {
            OpKind::DirectSum { blocks, offsets } => {
                let mut z = CVec::zeros(self.dim);
                for (block, &off) in blocks.iter().zip(offsets) {
                    let bb = b.rows(off, block.dim).into_owned();
                    let zb = block.power_min_norm_preimage(&bb, m, tol)?;
                    z.rows_mut(off, block.dim).copy_from(&zb);
                }
                Ok(z)
            }
            // Shift powers are offset-diagonal maps, so the minimal-norm
            // least-squares solution is an exact entrywise division.
            OpKind::ForwardShift { weights } => {
                // (Sᵐ z)_{i+m} = (w_i ··· w_{i+m-1}) z_i
                let mut z = CVec::zeros(self.dim);
                if m < self.dim {
                    let prods: Vec<f64> = (0..self.dim - m)
                        .map(|i| weights[i..i + m].iter().product())
                        .collect();
                    let max_p = prods.iter().cloned().fold(0.0, f64::max);
                    for (i, &p) in prods.iter().enumerate() {
                        if p > tol * max_p {
                            z[i] = b[i + m] / C64::new(p, 0.0);
                        }
                    }
                }
                Ok(z)
            }
            OpKind::BackwardShift { weights } => {
                // (Bᵐ z)_i = (w_i ··· w_{i+m-1}) z_{i+m}
                let mut z = CVec::zeros(self.dim);
                if m < self.dim {
                    let prods: Vec<f64> = (0..self.dim - m)
                        .map(|i| weights[i..i + m].iter().product())
                        .collect();
                    let max_p = prods.iter().cloned().fold(0.0, f64::max);
                    for (i, &p) in prods.iter().enumerate() {
                        if p > tol * max_p {
                            z[i + m] = b[i] / C64::new(p, 0.0);
                        }
                    }
                }
                Ok(z)
            }
            _ => {
                if self.dim > DENSE_LIMIT {
                    return Err(ZooError::TooLarge {
                        dim: self.dim,
                        limit: DENSE_LIMIT,
                    });
                }
                let a = self.dense_power(m);
                Ok(linalg::min_norm_preimage(&a, b, tol)?)
            }
        }
    }

    fn with_hint(mut self, hint: f64) -> Self {
        self.norm_bound_hint = Some(hint);
        self
    }
}

pub fn identity(dim: usize) -> Operator {
    dense(CMat::identity(dim, dim)).with_hint(1.0)
}

pub fn dense(mat: CMat) -> Operator {
    assert_eq!(mat.nrows(), mat.ncols(), "dense operators are square");
    let adj = mat.adjoint();
    Operator {
        dim: mat.nrows(),
        kind: OpKind::Dense {
            mat: Arc::new(mat),
            adj: Arc::new(adj),
        },
        tag: KindTag::Dense,
        norm_bound_hint: None,
    }
}

/// S e_i = w_i e_{i+1}; the top basis vector is annihilated by truncation.
pub fn forward_shift(w: &WeightSchedule, dim: usize) -> Operator {
    assert!(dim >= 2);
    let weights: Vec<f64> = (1..dim).map(|i| w.weight(i)).collect();
    Operator {
        dim,
        kind: OpKind::ForwardShift {
            weights: Arc::new(weights),
        },
        tag: KindTag::ForwardShift,
        norm_bound_hint: None,
    }
}

/// S e_{i+1} = w_i e_i, S e₁ = 0.
pub fn backward_shift(w: &WeightSchedule, dim: usize) -> Operator {
    assert!(dim >= 2);
    let weights: Vec<f64> = (1..dim).map(|i| w.weight(i)).collect();
    let contraction = weights.iter().all(|&x| x <= 1.0);
    Operator {
        dim,
        kind: OpKind::BackwardShift {
            weights: Arc::new(weights),
        },
        tag: KindTag::BackwardShift,
        norm_bound_hint: if contraction { Some(1.0) } else { None },
    }
}

/// Pairwise idempotent: (Tx)_{2k} = x_{2k−1} + x_{2k}, odd coordinates 0.
/// Satisfies T² = T exactly.
pub fn example2_op(dim: usize) -> Result<Operator, ZooError> {
    if dim % 2 != 0 {
        return Err(ZooError::OddDimension(dim));
    }
    let one = C64::new(1.0, 0.0);
    let mut m = CMat::zeros(dim, dim);
    for k in 0..dim / 2 {
        m[(2 * k + 1, 2 * k)] = one;
        m[(2 * k + 1, 2 * k + 1)] = one;
    }
    let mut op = dense(m);
    op.tag = KindTag::IdempotentPairsum;
    // each 2x2 block [[0,0],[1,1]] has norm √2
    Ok(op.with_hint(std::f64::consts::SQRT_2))
}

/// Direct sum of backward shifts with telescoping weights, blocks n = 1..B.
pub fn example3_op(blocks: usize, block_dim: usize) -> Operator {
    let ops: Vec<Operator> = (1..=blocks as u64)
        .map(|n| backward_shift(&example3_weights(n), block_dim))
        .collect();
    direct_sum(ops).unwrap().with_hint(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureScheme {
    Midpoint,
    Trapezoid,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme::Midpoint
    }
}

/// Lower-triangular quadrature truncation of cumulative integration on [0,1].
///
/// Midpoint scheme: entries 1/M below the diagonal and 1/(2M) on it, so that
/// V + V* equals the rank-one averaging matrix with all entries 1/M, exactly.
pub fn volterra(m: usize, scheme: QuadratureScheme) -> Operator {
    assert!(m >= 2);
    let h = 1.0 / m as f64;
    let mut mat = CMat::zeros(m, m);
    match scheme {
        QuadratureScheme::Midpoint => {
            for j in 0..m {
                for k in 0..j {
                    mat[(j, k)] = C64::new(h, 0.0);
                }
                mat[(j, j)] = C64::new(h / 2.0, 0.0);
            }
        }
        QuadratureScheme::Trapezoid => {
            // nodes t_j = j/(M-1); first row is ∫ over the empty interval
            let h = 1.0 / (m as f64 - 1.0);
            for j in 1..m {
                mat[(j, 0)] = C64::new(h / 2.0, 0.0);
                for k in 1..j {
                    mat[(j, k)] = C64::new(h, 0.0);
                }
                mat[(j, j)] = C64::new(h / 2.0, 0.0);
            }
        }
    }
    let mut op = dense(mat);
    op.tag = KindTag::Volterra;
    op
}

/// Midpoint grid of `volterra`.
pub fn volterra_grid(m: usize) -> Vec<f64> {
    (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect()
}

/// Diagonal multiplication by e^t on the midpoint grid.
pub fn mult_exp(m: usize) -> Operator {
    let diag: Vec<C64> = volterra_grid(m)
        .into_iter()
        .map(|t| C64::new(t.exp(), 0.0))
        .collect();
    dense(CMat::from_diagonal(&CVec::from_vec(diag)))
}

/// Rank-one averaging matrix with all entries 1/M (projection onto constants
/// on the midpoint grid).
pub fn projection_constants(m: usize) -> Operator {
    dense(CMat::from_element(m, m, C64::new(1.0 / m as f64, 0.0))).with_hint(1.0)
}

pub fn direct_sum(blocks: Vec<Operator>) -> Result<Operator, ZooError> {
    if blocks.is_empty() {
        return Err(ZooError::DimensionMismatch("empty direct sum".into()));
    }
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut dim = 0;
    for b in &blocks {
        offsets.push(dim);
        dim += b.dim;
    }
    let hint = blocks
        .iter()
        .map(|b| b.norm_bound_hint)
        .try_fold(0.0_f64, |acc, h| h.map(|h| acc.max(h)));
    Ok(Operator {
        dim,
        kind: OpKind::DirectSum { blocks, offsets },
        tag: KindTag::DirectSum,
        norm_bound_hint: hint,
    })
}

/// (a, b) ↦ (T₁₁ a, T₂₁ a + T₂₂ b); `t21` maps the first block into the second.
pub fn block_lower_2x2(t11: Operator, t21: CMat, t22: Operator) -> Result<Operator, ZooError> {
    if t21.nrows() != t22.dim || t21.ncols() != t11.dim {
        return Err(ZooError::DimensionMismatch(format!(
            "coupling is {}x{} but blocks have dims {} and {}",
            t21.nrows(),
            t21.ncols(),
            t11.dim,
            t22.dim
        )));
    }
    let t21_adj = t21.adjoint();
    Ok(Operator {
        dim: t11.dim + t22.dim,
        kind: OpKind::BlockLower {
            t11: Box::new(t11),
            t21: Arc::new(t21),
            t21_adj: Arc::new(t21_adj),
            t22: Box::new(t22),
        },
        tag: KindTag::Block2x2,
        norm_bound_hint: None,
    })
}

pub fn sum(a: Operator, b: Operator) -> Result<Operator, ZooError> {
    if a.dim != b.dim {
        return Err(ZooError::DimensionMismatch(format!(
            "sum of dims {} and {}",
            a.dim, b.dim
        )));
    }
    let dim = a.dim;
    Ok(Operator {
        dim,
        kind: OpKind::Sum(Box::new(a), Box::new(b)),
        tag: KindTag::Dense,
        norm_bound_hint: None,
    })
}

/// compose(a, b) = a ∘ b.
pub fn compose(a: Operator, b: Operator) -> Result<Operator, ZooError> {
    if a.dim != b.dim {
        return Err(ZooError::DimensionMismatch(format!(
            "compose of dims {} and {}",
            a.dim, b.dim
        )));
    }
    let dim = a.dim;
    let hint = match (a.norm_bound_hint, b.norm_bound_hint) {
        (Some(x), Some(y)) => Some(x * y),
        _ => None,
    };
    Ok(Operator {
        dim,
        kind: OpKind::Compose(Box::new(a), Box::new(b)),
        tag: KindTag::Dense,
        norm_bound_hint: hint,
    })
}

pub fn scale(a: Operator, c: C64) -> Operator {
    let dim = a.dim;
    let hint = a.norm_bound_hint.map(|h| h * c.norm());
    Operator {
        dim,
        kind: OpKind::Scale(Box::new(a), c),
        tag: KindTag::Dense,
        norm_bound_hint: hint,
    }
}

pub fn adjoint_op(a: Operator) -> Operator {
    let dim = a.dim;
    let hint = a.norm_bound_hint;
    Operator {
        dim,
        kind: OpKind::Adjoint(Box::new(a)),
        tag: KindTag::Dense,
        norm_bound_hint: hint,
    }
}

/// Dense inverse; fails when the condition estimate exceeds 1e12.
pub fn inverse_op(a: &Operator) -> Result<Operator, ZooError> {
    if a.dim > DENSE_LIMIT {
        return Err(ZooError::TooLarge {
            dim: a.dim,
            limit: DENSE_LIMIT,
        });
    }
    let m = a.to_dense();
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > INVERSE_COND_LIMIT {
        return Err(ZooError::Singular { cond });
    }
    let inv = m
        .try_inverse()
        .ok_or(ZooError::Singular { cond: f64::INFINITY })?;
    let mut op = dense(inv);
    op.tag = KindTag::Inverse;
    Ok(op)
}

/// s⁻¹ ∘ t ∘ s.
pub fn similarity(s: &Operator, t: Operator) -> Result<Operator, ZooError> {
    let s_inv = inverse_op(s)?;
    let mut op = compose(s_inv, compose(t, s.clone())?)?;
    op.tag = KindTag::Similarity;
    Ok(op)
}

/// Seeded random unitary (QR of a random complex Gaussian matrix).
pub fn random_unitary(dim: usize, seed: u64) -> Operator {
    let mut m = CMat::zeros(dim, dim);
    for j in 0..dim {
        m.column_mut(j)
            .copy_from(&linalg::random_unit_vector(dim, seed.wrapping_add(j as u64)));
    }
    let qr = m.qr();
    let mut op = dense(qr.q());
    op.norm_bound_hint = Some(1.0);
    op
}

/// Diagonal unitary with seeded random phases.
pub fn diag_unitary(dim: usize, seed: u64) -> Operator {
    let phases = linalg::random_unit_vector(dim, seed);
    let diag: Vec<C64> = phases
        .iter()
        .map(|z| {
            if z.norm() > 0.0 {
                z / C64::new(z.norm(), 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    dense(CMat::from_diagonal(&CVec::from_vec(diag))).with_hint(1.0)
}

/// Nilpotent Jordan block J e_i = e_{i+1}, with Jᵈⁱᵐ = 0. Built dense: the
/// finite matrix is the object itself, not a truncation of a shift.
pub fn jordan_nilpotent(dim: usize) -> Operator {
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim - 1 {
        m[(i + 1, i)] = C64::new(1.0, 0.0);
    }
    dense(m).with_hint(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis_vector;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn forward_shift_action_and_adjoint() {
        let s = forward_shift(&example1_weights(), 10);
        let e1 = basis_vector(10, 0);
        let y = s.apply(&e1);
        assert!((y - basis_vector(10, 1)).norm() < 1e-15);
        // adjoint of e₂ is w₁ e₁ = e₁
        let back = s.adjoint_apply(&basis_vector(10, 1));
        assert!((back - basis_vector(10, 0)).norm() < 1e-15);
    }

    #[test]
    fn forward_shift_power_lands_on_basis_vectors() {
        let s = forward_shift(&example1_weights(), 70);
        for k in 1..=2u32 {
            let nk = nk_sequence(k).unwrap() as usize;
            let y = s.power_apply(&basis_vector(70, 0), nk);
            assert!((y - basis_vector(70, nk)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn forward_shift_truncation_kills_top() {
        let s = forward_shift(&WeightSchedule::unit("unit"), 4);
        let top = basis_vector(4, 3);
        assert!(s.apply(&top).norm() < 1e-15);
        assert!(s.faithful_forward(1, 3));
        assert!(!s.faithful_forward(1, 4));
    }

    #[test]
    fn backward_shift_action() {
        let s = backward_shift(&WeightSchedule::unit("unit"), 3);
        let y = s.apply(&basis_vector(3, 1));
        assert!((y - basis_vector(3, 0)).norm() < 1e-15);
        assert!(s.apply(&basis_vector(3, 0)).norm() < 1e-15);
    }

    #[test]
    fn backward_shift_block_weight() {
        // second block of the telescoping family at i = 3
        let s = backward_shift(&example3_weights(2), 8);
        let y = s.apply(&basis_vector(8, 3));
        let expected = 0.5_f64.powf(1.0 / 2.0 - 1.0 / 3.0);
        assert!((y[2].re - expected).abs() < 1e-14);
    }

    #[test]
    fn example2_is_idempotent() {
        let t = example2_op(8).unwrap();
        let m = t.to_dense();
        assert!(((&m * &m) - &m).norm() < 1e-15);
        let y = t.apply(&basis_vector(8, 0));
        assert!((y - basis_vector(8, 1)).norm() < 1e-15);
        let z = t.adjoint_apply(&basis_vector(8, 1));
        assert!((z[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((z[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(example2_op(7).is_err());
    }

    #[test]
    fn volterra_plus_adjoint_is_averaging() {
        let m = 32;
        let v = volterra(m, QuadratureScheme::Midpoint).to_dense();
        let p = projection_constants(m).to_dense();
        assert_eq!(&v + v.adjoint(), p);
    }

    #[test]
    fn volterra_integrates_constants() {
        let m = 64;
        let v = volterra(m, QuadratureScheme::Midpoint);
        let ones = CVec::from_element(m, c(1.0, 0.0));
        let y = v.apply(&ones);
        for (j, t) in volterra_grid(m).iter().enumerate() {
            assert!((y[j].re - t).abs() < 1e-12);
            assert!(y[j].im.abs() < 1e-15);
        }
    }

    #[test]
    fn trapezoid_volterra_integrates_linear() {
        let m = 200;
        let v = volterra(m, QuadratureScheme::Trapezoid);
        let h = 1.0 / (m as f64 - 1.0);
        let f = CVec::from_fn(m, |j, _| c(j as f64 * h, 0.0));
        let y = v.apply(&f);
        // ∫₀ᵗ s ds = t²/2, exact for trapezoid on a linear integrand
        for j in 0..m {
            let t = j as f64 * h;
            assert!((y[j].re - t * t / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mult_exp_diagonal_action() {
        let m = 16;
        let e = mult_exp(m);
        let ones = CVec::from_element(m, c(1.0, 0.0));
        let y = e.apply(&ones);
        for (j, t) in volterra_grid(m).iter().enumerate() {
            assert!((y[j].re - t.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn direct_sum_of_identities() {
        let op = direct_sum(vec![identity(2), identity(2)]).unwrap();
        let d = op.to_dense();
        assert!((d - CMat::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn block_lower_action() {
        let u = diag_unitary(3, 5);
        let zero11 = scale(identity(2), c(0.0, 0.0));
        let t = block_lower_2x2(zero11, CMat::zeros(3, 2), u.clone()).unwrap();
        let mut x = CVec::zeros(5);
        let b = linalg::random_unit_vector(3, 9);
        x.rows_mut(2, 3).copy_from(&b);
        let y = t.apply(&x);
        assert!(y.rows(0, 2).norm() < 1e-15);
        assert!((y.rows(2, 3).into_owned() - u.apply(&b)).norm() < 1e-14);
    }

    #[test]
    fn shift_preimage_matches_dense_pseudoinverse() {
        let dim = 12;
        let shifts = [
            forward_shift(&example1_weights(), dim),
            backward_shift(&example3_weights(3), dim),
        ];
        for op in &shifts {
            for m in [1usize, 2, 5, dim, dim + 3] {
                let b = linalg::random_unit_vector(dim, 7 + m as u64);
                let fast = op.power_min_norm_preimage(&b, m, 1e-10).unwrap();
                let reference =
                    linalg::min_norm_preimage(&op.dense_power(m), &b, 1e-10).unwrap();
                assert!(
                    (fast.clone() - reference).norm() < 1e-10,
                    "kind {:?} m = {m}",
                    op.kind_tag()
                );
            }
        }
    }

    #[test]
    fn inverse_contract() {
        let m = 64;
        let iv = sum(identity(m), volterra(m, QuadratureScheme::Midpoint)).unwrap();
        let inv = inverse_op(&iv).unwrap();
        let composed = compose(inv, iv).unwrap().to_dense();
        assert!((composed - CMat::identity(m, m)).norm() < 1e-10);
    }

    #[test]
    fn inverse_rejects_singular() {
        let z = scale(identity(4), c(0.0, 0.0));
        assert!(inverse_op(&z).is_err());
    }

    #[test]
    fn adjoint_consistency_random() {
        let ops = vec![
            forward_shift(&example1_weights(), 20),
            backward_shift(&example3_weights(3), 20),
            example2_op(20).unwrap(),
            volterra(20, QuadratureScheme::Midpoint),
        ];
        for (k, op) in ops.iter().enumerate() {
            let x = linalg::random_unit_vector(20, 100 + k as u64);
            let y = linalg::random_unit_vector(20, 200 + k as u64);
            let lhs = linalg::inner(&op.apply(&x), &y);
            let rhs = linalg::inner(&x, &op.adjoint_apply(&y));
            assert!((lhs - rhs).norm() < 1e-10, "op {k}");
        }
    }

    #[test]
    fn direct_sum_preimage_matches_dense() {
        let op = direct_sum(vec![
            backward_shift(&example3_weights(1), 6),
            backward_shift(&example3_weights(2), 6),
        ])
        .unwrap();
        let b = linalg::random_unit_vector(12, 3);
        let fast = op.power_min_norm_preimage(&b, 2, 1e-10).unwrap();
        let a = op.dense_power(2);
        let slow = linalg::min_norm_preimage(&a, &b, 1e-10).unwrap();
        assert!((fast - slow).norm() < 1e-9);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(8, 42).to_dense();
        assert!(((&u * u.adjoint()) - CMat::identity(8, 8)).norm() < 1e-12);
    }
}
