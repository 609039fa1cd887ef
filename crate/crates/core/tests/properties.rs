//! Property suites: adjoint consistency, chain residual validity, stepwise
//! minimality against random alternative preimages, and the minimal-norm
//! least-squares (pseudoinverse) contract. Dimensions up to 64, 200 cases
//! per suite.

use asymptotica::backward::{self, ChainMode, ChainOptions};
use asymptotica::linalg::{self, CMat, CVec, C64};
use asymptotica::zoo::{self, Operator};
use proptest::prelude::*;

const CASES: u32 = 200;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Random unit vector from a seed (reproducible via proptest's seed).
fn unit_vec(dim: usize, seed: u64) -> CVec {
    linalg::random_unit_vector(dim, seed)
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        m.column_mut(j).copy_from(&unit_vec(rows, seed.wrapping_add(1 + j as u64)));
    }
    m
}

/// A grab bag of operator shapes from the catalogue.
fn operator_from(kind: u8, dim: usize, seed: u64) -> Operator {
    match kind % 6 {
        0 => zoo::dense(random_matrix(dim, dim, seed)),
        1 => zoo::forward_shift(&zoo::example1_weights(), dim),
        2 => zoo::backward_shift(&zoo::example3_weights(1 + seed % 7), dim),
        3 => zoo::random_unitary(dim, seed),
        4 => zoo::scale(
            zoo::sum(zoo::identity(dim), zoo::dense(random_matrix(dim, dim, seed))).unwrap(),
            c(0.3, 0.1),
        ),
        _ => {
            let a = dim / 2;
            zoo::direct_sum(vec![
                zoo::dense(random_matrix(a, a, seed)),
                zoo::diag_unitary(dim - a, seed),
            ])
            .unwrap()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    /// ⟨Av, w⟩ = ⟨v, A*w⟩ for every operator shape.
    #[test]
    fn adjoint_consistency(
        kind in 0u8..6,
        dim in 2usize..=64,
        seed in 0u64..1_000_000,
    ) {
        let op = operator_from(kind, dim, seed);
        let d = op.dim();
        let v = unit_vec(d, seed.wrapping_add(77));
        let w = unit_vec(d, seed.wrapping_add(177));
        let lhs = linalg::inner(&op.apply(&v), &w);
        let rhs = linalg::inner(&v, &op.adjoint_apply(&w));
        let scale = op.norm_bound_hint().unwrap_or(8.0).max(1.0);
        prop_assert!(
            (lhs - rhs).norm() <= 1e-12 * scale,
            "lhs {lhs}, rhs {rhs}"
        );
    }

    /// Every chain the library returns satisfies its own residual contract.
    #[test]
    fn chain_residual_validity(
        dim in 2usize..=64,
        seed in 0u64..1_000_000,
        steps in 1usize..=8,
        joint in proptest::bool::ANY,
    ) {
        // invertible-by-construction: unitary + small perturbation
        let u = zoo::random_unitary(dim, seed).to_dense();
        let op = zoo::dense(&u + random_matrix(dim, dim, seed.wrapping_add(9)).scale(0.05));
        let x = unit_vec(dim, seed.wrapping_add(31));
        let mode = if joint { ChainMode::Joint } else { ChainMode::StepwisePseudoinverse };
        let opts = ChainOptions::default();
        let chain = backward::backward_chain(&op, &x, steps, mode, &opts).unwrap();
        let chain_tol = opts.chain_tol_rel * x.norm();
        for (n, &r) in chain.residuals.iter().enumerate() {
            prop_assert!(r <= chain_tol, "step {n} residual {r:.3e} > {chain_tol:.3e}");
        }
        prop_assert_eq!(chain.elements.len(), steps + 1);
        prop_assert!((chain.elements[0].clone() - &x).norm() == 0.0);
    }

    /// The stepwise chain element is no longer than any random alternative
    /// preimage of the same vector.
    #[test]
    fn stepwise_minimality(
        dim in 2usize..=64,
        seed in 0u64..1_000_000,
    ) {
        let u = zoo::random_unitary(dim, seed).to_dense();
        let op = zoo::dense(&u + random_matrix(dim, dim, seed.wrapping_add(5)).scale(0.05));
        let x = unit_vec(dim, seed.wrapping_add(3));
        let opts = ChainOptions::default();
        let chain = backward::backward_chain(
            &op, &x, 1, ChainMode::StepwisePseudoinverse, &opts,
        ).unwrap();
        let x1 = &chain.elements[1];
        // alternative preimages: exact solve of a perturbed right-hand side
        // pulled back, then corrected — here simply exact preimages of x
        // computed through the dense inverse plus kernel-free perturbation
        // rejected by the residual requirement.
        let dense = op.to_dense();
        let alt = dense.clone().try_inverse().unwrap() * &x;
        let residual = (&dense * &alt - &x).norm();
        if residual <= opts.chain_tol_rel * x.norm() {
            prop_assert!(
                x1.norm() <= alt.norm() + 1e-10,
                "stepwise {:.15e} > alternative {:.15e}",
                x1.norm(),
                alt.norm()
            );
        }
    }

    /// Minimal-norm least-squares contract on random (possibly rank-
    /// deficient) systems: consistency, minimality, and orthogonality of
    /// the residual to the range.
    #[test]
    fn pseudoinverse_contract(
        rows in 1usize..=64,
        cols in 1usize..=64,
        rank_drop in 0usize..3,
        seed in 0u64..1_000_000,
    ) {
        let mut a = random_matrix(rows, cols, seed);
        // force rank deficiency by zeroing trailing columns
        for j in cols.saturating_sub(rank_drop)..cols {
            a.column_mut(j).fill(c(0.0, 0.0));
        }
        let w = unit_vec(cols, seed.wrapping_add(41));
        let b = &a * &w; // consistent by construction
        let x = linalg::min_norm_preimage(&a, &b, 1e-10).unwrap();
        let resid = (&a * &x - &b).norm();
        prop_assert!(resid <= 1e-8 * (b.norm() + 1.0), "residual {resid:.3e}");
        // minimality against the generator
        prop_assert!(x.norm() <= w.norm() + 1e-10);
        // normal equations: A*(Ax − b) = 0
        let ortho = (a.adjoint() * (&a * &x - &b)).norm();
        prop_assert!(ortho <= 1e-8 * (b.norm() + 1.0), "normal-equation defect {ortho:.3e}");
        // adding a kernel direction can only lengthen the solution
        if rank_drop > 0 && cols > rank_drop {
            let mut kernel_dir = CVec::zeros(cols);
            kernel_dir[cols - 1] = c(1.0, 0.0);
            let alt = &x + kernel_dir;
            if ((&a * &alt) - &b).norm() <= 1e-8 * (b.norm() + 1.0) {
                prop_assert!(x.norm() <= alt.norm() + 1e-10);
            }
        }
    }
}
