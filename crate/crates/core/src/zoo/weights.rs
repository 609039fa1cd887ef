//! Shift weight schedules.

use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("recursion overflows u64 at k = {0}")]
    Overflow(u32),
}

/// `N₁ = 1`, `N_{k+1} = 3N_k + 2N_k²`.
pub fn nk_sequence(k: u32) -> Result<u64, WeightError> {
    if k == 0 {
        return Err(WeightError::ZeroIndex);
    }
    let mut n: u64 = 1;
    for step in 1..k {
        let sq = n.checked_mul(n).ok_or(WeightError::Overflow(step + 1))?;
        n = n
            .checked_mul(3)
            .and_then(|a| a.checked_add(sq.checked_mul(2)?))
            .ok_or(WeightError::Overflow(step + 1))?;
    }
    Ok(n)
}

/// A positive weight per 1-based index, with a human-readable description.
#[derive(Clone)]
pub struct WeightSchedule {
    generator: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    pub description: String,
}

impl WeightSchedule {
    pub fn new(
        generator: impl Fn(usize) -> f64 + Send + Sync + 'static,
        description: impl Into<String>,
    ) -> Self {
        Self {
            generator: Arc::new(generator),
            description: description.into(),
        }
    }

    /// Weight at 1-based index `i`.
    pub fn weight(&self, i: usize) -> f64 {
        assert!(i >= 1, "weight index is 1-based");
        (self.generator)(i)
    }

    /// First `count` weights.
    pub fn truncate(&self, count: usize) -> Vec<f64> {
        (1..=count).map(|i| self.weight(i)).collect()
    }

    pub fn unit(description: &str) -> Self {
        Self::new(|_| 1.0, description)
    }

    pub fn from_list(weights: Vec<f64>) -> Self {
        assert!(weights.iter().all(|&w| w > 0.0), "weights must be positive");
        Self::new(
            move |i| {
                *weights
                    .get(i - 1)
                    .unwrap_or_else(|| panic!("weight list exhausted at index {i}"))
            },
            "explicit list",
        )
    }
}

/// Recursive shift schedule: w₁ = 1, w_i = ½ on (N_k, 3N_k], w_i = 2^{1/N_k}
/// on (3N_k, N_{k+1}]. The product over each segment [1, N_k] is 1.
pub fn example1_weights() -> WeightSchedule {
    WeightSchedule::new(
        |i| {
            if i == 1 {
                return 1.0;
            }
            let i = i as u64;
            let mut nk: u64 = 1;
            loop {
                let next = 3 * nk + 2 * nk * nk;
                if i <= next {
                    return if i <= 3 * nk {
                        0.5
                    } else {
                        2.0_f64.powf(1.0 / nk as f64)
                    };
                }
                nk = next;
            }
        },
        "recursive balanced-product shift weights",
    )
}

/// Block weights w₁ = w₂ = 1, w_i = (1/n)^{1/(i−1) − 1/i} for i > 2.
/// The partial products telescope to (1/n)^{1/2 − 1/m}.
pub fn example3_weights(n: u64) -> WeightSchedule {
    assert!(n >= 1);
    let base = 1.0 / n as f64;
    WeightSchedule::new(
        move |i| {
            if i <= 2 {
                1.0
            } else {
                let e = 1.0 / (i as f64 - 1.0) - 1.0 / i as f64;
                base.powf(e)
            }
        },
        format!("telescoping contraction weights (n = {n})"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nk_values() {
        assert!(nk_sequence(0).is_err());
        assert_eq!(nk_sequence(1).unwrap(), 1);
        assert_eq!(nk_sequence(2).unwrap(), 5);
        assert_eq!(nk_sequence(3).unwrap(), 65);
        assert_eq!(nk_sequence(4).unwrap(), 8645);
    }

    #[test]
    fn nk_overflow_is_reported() {
        assert!(nk_sequence(12).is_err());
    }

    #[test]
    fn example1_first_segment() {
        let w = example1_weights();
        assert_eq!(w.weight(1), 1.0);
        assert_eq!(w.weight(2), 0.5);
        assert_eq!(w.weight(3), 0.5);
        assert_eq!(w.weight(4), 2.0);
        assert_eq!(w.weight(5), 2.0);
        let product: f64 = w.truncate(5).iter().product();
        assert!((product - 1.0).abs() < 1e-12);
    }

    #[test]
    fn example1_segment_products_are_one() {
        let w = example1_weights();
        for k in 1..=3 {
            let nk = nk_sequence(k).unwrap() as usize;
            let product: f64 = w.truncate(nk).iter().product();
            assert!(
                (product - 1.0).abs() < 1e-12,
                "k={k} product {product}"
            );
        }
    }

    #[test]
    fn example3_values() {
        let w1 = example3_weights(1);
        for i in 1..=20 {
            assert_eq!(w1.weight(i), 1.0);
        }
        let w4 = example3_weights(4);
        let expected = 0.25_f64.powf(1.0 / 2.0 - 1.0 / 3.0);
        assert!((w4.weight(3) - expected).abs() < 1e-15);
        assert!((expected - 2.0_f64.powf(-1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn example3_partial_products_telescope() {
        for n in [2u64, 5, 9] {
            let w = example3_weights(n);
            for m in [3usize, 10, 100] {
                let product: f64 = w.truncate(m).iter().product();
                let closed = (1.0 / n as f64).powf(0.5 - 1.0 / m as f64);
                assert!((product - closed).abs() < 1e-12);
            }
        }
    }

    // The partial products settle at n^{-1/2}, not at any faster-decaying
    // power of n; checked by direct multiplication out to m = 10^4.
    #[test]
    fn example3_product_limit_matches_square_root() {
        for n in [2u64, 4, 16] {
            let w = example3_weights(n);
            let product: f64 = w.truncate(10_000).iter().product();
            let sqrt_limit = (n as f64).powf(-0.5);
            let square_limit = (n as f64).powi(-2);
            assert!((product - sqrt_limit).abs() < 1e-3 * sqrt_limit);
            assert!((product - square_limit).abs() > 0.1 * sqrt_limit);
        }
    }
}
