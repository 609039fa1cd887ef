//! Dense complex linear algebra substrate: minimal-norm least-squares solves
//! and Hermitian eigen-splits shared by the rest of the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// Default relative singular-value cutoff for pseudoinverse solves.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian within tolerance (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("singular operator (condition estimate {cond:.3e})")]
    Singular { cond: f64 },
    #[error("decomposition failed to converge")]
    NoConvergence,
}

/// `⟨x, y⟩ = Σ xᵢ ȳᵢ`, linear in the first argument.
pub fn inner(x: &CVec, y: &CVec) -> C64 {
    y.dotc(x)
}

pub fn norm(x: &CVec) -> f64 {
    x.norm()
}

/// Largest index (1-based) with a nonzero entry, or 0 for the zero vector.
pub fn support(x: &CVec, tol: f64) -> usize {
    for i in (0..x.len()).rev() {
        if x[i].norm() > tol {
            return i + 1;
        }
    }
    0
}

/// Minimal-norm least-squares solution of `A x = b` via SVD.
///
/// Singular values below `tol · σ_max` are treated as zero, so the result is
/// the pseudoinverse applied to `b` with a relative rank cutoff.
pub fn min_norm_preimage(a: &CMat, b: &CVec, tol: f64) -> Result<CVec, LinalgError> {
    if a.nrows() != b.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "matrix has {} rows but rhs has {} entries",
            a.nrows(),
            b.len()
        )));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or(LinalgError::NoConvergence)?;
    let v_t = svd.v_t.as_ref().ok_or(LinalgError::NoConvergence)?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * sigma_max;

    // x = V Σ⁺ U* b, with small singular values dropped.
    let utb = u.adjoint() * b;
    let mut scaled = CVec::zeros(svd.singular_values.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            scaled[i] = utb[i] / C64::new(s, 0.0);
        }
    }
    Ok(v_t.adjoint() * scaled)
}

/// Operator norm (largest singular value) of a dense matrix.
pub fn operator_norm(a: &CMat) -> f64 {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Orthonormal eigen-split of a Hermitian PSD matrix into the near-kernel
/// (eigenvalue ≤ tol · λ_max) and its complement.
pub struct EigSplit {
    pub kernel_basis: Vec<CVec>,
    pub range_basis: Vec<CVec>,
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

pub fn hermitian_eig_split(g: &CMat, tol: f64) -> Result<EigSplit, LinalgError> {
    hermitian_eig_split_with_floor(g, tol, 0.0)
}

/// Like [`hermitian_eig_split`], with the kernel cutoff taken relative to
/// `max(λ_max, floor)`. A positive floor keeps a uniformly tiny Gram from
/// being read as full-rank.
pub fn hermitian_eig_split_with_floor(
    g: &CMat,
    tol: f64,
    floor: f64,
) -> Result<EigSplit, LinalgError> {
    if g.nrows() != g.ncols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            g.nrows(),
            g.ncols()
        )));
    }
    let g_norm = g.norm();
    let defect = (g - g.adjoint()).norm();
    if defect > tol.max(1e-12) * g_norm.max(1.0) {
        return Err(LinalgError::NotHermitian { defect });
    }
    let sym = (g + g.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());

    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let threshold = tol * lambda_max.max(floor);

    let mut kernel_basis = Vec::new();
    let mut range_basis = Vec::new();
    let mut eigenvalues = Vec::with_capacity(order.len());
    for &i in &order {
        let lambda = eig.eigenvalues[i];
        eigenvalues.push(lambda);
        let v: CVec = eig.eigenvectors.column(i).into_owned();
        if lambda <= threshold {
            kernel_basis.push(v);
        } else {
            range_basis.push(v);
        }
    }
    Ok(EigSplit {
        kernel_basis,
        range_basis,
        eigenvalues,
    })
}

/// Seeded random complex vector with independent standard-normal real and
/// imaginary parts, normalized to unit length.
pub fn random_unit_vector(dim: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = CVec::zeros(dim);
    for i in 0..dim {
        v[i] = C64::new(standard_normal(&mut rng), standard_normal(&mut rng));
    }
    let n = v.norm();
    if n > 0.0 {
        v /= C64::new(n, 0.0);
    }
    v
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; keeps the output a pure function of the ChaCha stream.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn basis_vector(dim: usize, index: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}
