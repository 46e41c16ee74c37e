use crate::error::{Result, WoldlabError};

/// Numerical policy shared by every operation.
///
/// `rank_tol` is a relative singular-value cutoff (rank decisions),
/// `residual_tol` is the pass threshold for identity checks measured in
/// operator norm, and `max_iter` caps stabilization loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl TolerancePolicy {
    pub const DEFAULT_RANK_TOL: f64 = 1e-10;
    pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
    pub const DEFAULT_MAX_ITER: usize = 256;

    pub fn new(rank_tol: f64, residual_tol: f64, max_iter: usize) -> Result<Self> {
        if !(rank_tol > 0.0) || !(residual_tol > 0.0) || max_iter < 1 {
            return Err(WoldlabError::InvalidInput(
                "tolerances must be positive and max_iter >= 1".into(),
            ));
        }
        Ok(Self { rank_tol, residual_tol, max_iter })
    }
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_tol: Self::DEFAULT_RANK_TOL,
            residual_tol: Self::DEFAULT_RESIDUAL_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_values() {
        assert!(TolerancePolicy::new(0.0, 1e-8, 10).is_err());
        assert!(TolerancePolicy::new(1e-10, -1.0, 10).is_err());
        assert!(TolerancePolicy::new(1e-10, 1e-8, 0).is_err());
        assert!(TolerancePolicy::new(1e-10, 1e-8, 1).is_ok());
    }
}
