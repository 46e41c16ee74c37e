//! Finite inner-product spaces with explicit Gram matrices, including
//! truncated bigraded monomial spaces (the home of `D_E(mu1, mu2)`).

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{Result, WoldlabError};
use crate::tol::TolerancePolicy;
use crate::C64;

/// Bidegree of a monomial `z1^m z2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GradedIndex {
    pub m: usize,
    pub n: usize,
}

impl GradedIndex {
    pub fn total(&self) -> usize {
        self.m + self.n
    }
}

/// How many more times a basis direction may be shifted before falling
/// off the truncation.
///
/// Graded spaces share a single total-degree budget across directions;
/// direct-sum constructions track independent per-direction headroom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Budget {
    /// No truncation in any direction.
    Unlimited,
    /// Independent headroom per shift direction (`usize::MAX` = none).
    Independent(Vec<usize>),
    /// All shift directions draw on one shared total-degree budget.
    Shared(usize),
}

impl Budget {
    /// Can this basis direction absorb `r[d]` applications of the shift
    /// in direction `d`, for all `d` simultaneously?
    pub fn admits(&self, r: &[usize]) -> bool {
        match self {
            Budget::Unlimited => true,
            Budget::Independent(h) => r
                .iter()
                .enumerate()
                .all(|(d, &rd)| rd == 0 || h.get(d).copied().unwrap_or(usize::MAX) >= rd),
            Budget::Shared(b) => r.iter().sum::<usize>() <= *b,
        }
    }
}

/// Layout of a truncated bigraded monomial basis: all `z1^m z2^n ⊗ e_i`
/// with `m + n <= cap`, ordered graded-lexicographically on `(m, n)`
/// (by total degree, then ascending `m`), coefficient index innermost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedLayout {
    pub cap: usize,
    pub coeff_dim: usize,
    /// Bidegree of each basis slot (length `dim`).
    pub indices: Vec<GradedIndex>,
}

impl GradedLayout {
    pub fn new(cap: usize, coeff_dim: usize) -> Self {
        assert!(coeff_dim >= 1);
        let mut indices = Vec::new();
        for g in graded_monomials(cap) {
            for _ in 0..coeff_dim {
                indices.push(g);
            }
        }
        Self { cap, coeff_dim, indices }
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Flat index of basis slot `(m, n, coeff)`.
    pub fn slot(&self, m: usize, n: usize, coeff: usize) -> usize {
        let pos = graded_monomials(self.cap)
            .iter()
            .position(|g| g.m == m && g.n == n)
            .expect("bidegree within cap");
        pos * self.coeff_dim + coeff
    }
}

/// Monomial bidegrees with `m + n <= cap` in graded-lex order.
pub fn graded_monomials(cap: usize) -> Vec<GradedIndex> {
    let mut v = Vec::new();
    for d in 0..=cap {
        for m in 0..=d {
            v.push(GradedIndex { m, n: d - m });
        }
    }
    v
}

/// A finite inner-product space: dimension, Hermitian positive-definite
/// Gram matrix, and a Cholesky factorization `G = L L^H` used to move
/// between base coordinates and an orthonormal coordinate system.
#[derive(Debug, Clone)]
pub struct Space {
    dim: usize,
    gram: DMatrix<C64>,
    chol_l: DMatrix<C64>,
    /// Inverse of `L^H`, cached for coordinate changes.
    chol_lh_inv: DMatrix<C64>,
    /// Number of shift directions tracked by budgets (0 for plain spaces).
    ndirs: usize,
    budgets: Vec<Budget>,
    graded: Option<GradedLayout>,
}

impl Space {
    /// Euclidean space of the given dimension, no truncation.
    pub fn euclidean(dim: usize) -> Arc<Self> {
        let gram = DMatrix::identity(dim, dim);
        let chol_l = DMatrix::identity(dim, dim);
        Arc::new(Self {
            dim,
            gram,
            chol_lh_inv: chol_l.clone(),
            chol_l,
            ndirs: 0,
            budgets: vec![Budget::Unlimited; dim],
            graded: None,
        })
    }

    /// General space with an explicit Gram; validates Hermitian
    /// positive definiteness against the policy.
    pub fn with_gram(gram: DMatrix<C64>, tol: &TolerancePolicy) -> Result<Arc<Self>> {
        Self::build(gram, 0, None, None, tol)
    }

    /// Truncated graded space with the given layout and Gram.
    pub fn graded(layout: GradedLayout, gram: DMatrix<C64>, tol: &TolerancePolicy) -> Result<Arc<Self>> {
        let budgets = layout
            .indices
            .iter()
            .map(|g| Budget::Shared(layout.cap - g.total()))
            .collect();
        Self::build(gram, 2, Some(budgets), Some(layout), tol)
    }

    /// Space with explicit per-index budgets (direct-sum constructions).
    pub fn with_budgets(
        gram: DMatrix<C64>,
        ndirs: usize,
        budgets: Vec<Budget>,
        tol: &TolerancePolicy,
    ) -> Result<Arc<Self>> {
        Self::build(gram, ndirs, Some(budgets), None, tol)
    }

    fn build(
        gram: DMatrix<C64>,
        ndirs: usize,
        budgets: Option<Vec<Budget>>,
        graded: Option<GradedLayout>,
        tol: &TolerancePolicy,
    ) -> Result<Arc<Self>> {
        let dim = gram.nrows();
        if gram.ncols() != dim || dim == 0 {
            return Err(WoldlabError::InvalidInput("gram must be square and nonempty".into()));
        }
        let herm_defect = (&gram - gram.adjoint()).norm();
        if herm_defect > tol.residual_tol * (1.0 + gram.norm()) {
            return Err(WoldlabError::InvalidInput("gram is not Hermitian".into()));
        }
        // symmetrize before factoring
        let g = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(g.clone());
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lmin > tol.rank_tol * lmax) {
            return Err(WoldlabError::GramSingular);
        }
        let chol = Cholesky::new(g.clone()).ok_or(WoldlabError::GramSingular)?;
        let chol_l = chol.l();
        let chol_lh_inv = chol_l
            .adjoint()
            .solve_upper_triangular(&DMatrix::identity(dim, dim))
            .ok_or(WoldlabError::GramSingular)?;
        let budgets = budgets.unwrap_or_else(|| vec![Budget::Unlimited; dim]);
        assert_eq!(budgets.len(), dim);
        Ok(Arc::new(Self {
            dim,
            gram: g,
            chol_l,
            chol_lh_inv,
            ndirs,
            budgets,
            graded,
        }))
    }

    /// Direct sum; Grams are placed block-diagonally and budgets are
    /// concatenated. All summands must agree on `ndirs` (0 is promoted).
    pub fn direct_sum(parts: &[Arc<Space>], tol: &TolerancePolicy) -> Result<Arc<Self>> {
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let ndirs = parts.iter().map(|p| p.ndirs).max().unwrap_or(0);
        let mut gram = DMatrix::zeros(dim, dim);
        let mut budgets = Vec::with_capacity(dim);
        let mut off = 0;
        for p in parts {
            gram.view_mut((off, off), (p.dim, p.dim)).copy_from(&p.gram);
            budgets.extend(p.budgets.iter().cloned());
            off += p.dim;
        }
        Self::build(gram, ndirs, Some(budgets), None, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    pub fn ndirs(&self) -> usize {
        self.ndirs
    }

    pub fn graded_layout(&self) -> Option<&GradedLayout> {
        self.graded.as_ref()
    }

    pub fn is_truncated(&self) -> bool {
        self.budgets.iter().any(|b| !matches!(b, Budget::Unlimited))
    }

    /// Basis indices whose budget admits `r` further shift applications.
    pub fn window(&self, r: &[usize]) -> Vec<usize> {
        (0..self.dim).filter(|&j| self.budgets[j].admits(r)).collect()
    }

    /// Window for `extra` applications of the shift in direction `dir`;
    /// `dir = None` means the full space.
    pub fn window_for(&self, dir: Option<usize>, extra: usize) -> Vec<usize> {
        match dir {
            None => (0..self.dim).collect(),
            Some(d) => {
                let mut r = vec![0usize; self.ndirs.max(d + 1)];
                r[d] = extra;
                self.window(&r)
            }
        }
    }

    /// Inner product of coordinate vectors: `<x, y> = y^H G x`.
    pub fn ip(&self, x: &DMatrix<C64>, y: &DMatrix<C64>) -> C64 {
        (y.adjoint() * &self.gram * x)[(0, 0)]
    }

    pub fn chol_l(&self) -> &DMatrix<C64> {
        &self.chol_l
    }

    /// Map column vectors to orthonormal coordinates: `x_on = L^H x`.
    pub fn to_ortho(&self, cols: &DMatrix<C64>) -> DMatrix<C64> {
        self.chol_l.adjoint() * cols
    }

    /// Inverse of `to_ortho`: `x = L^{-H} x_on`.
    pub fn from_ortho(&self, cols: &DMatrix<C64>) -> DMatrix<C64> {
        &self.chol_lh_inv * cols
    }

    pub fn chol_lh_inv(&self) -> &DMatrix<C64> {
        &self.chol_lh_inv
    }

    /// Solve `G x = b`.
    pub fn gram_solve(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        let y = self
            .chol_l
            .solve_lower_triangular(b)
            .expect("cholesky factor invertible");
        self.chol_l
            .adjoint()
            .solve_upper_triangular(&y)
            .expect("cholesky factor invertible")
    }

    /// Gram of a subset of basis vectors.
    pub fn sub_gram(&self, idx: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.gram[(idx[i], idx[j])])
    }
}

/// Spectral norm (largest singular value), via the largest eigenvalue
/// of `M^H M`; the Hermitian eigensolver is more accurate on complex
/// input than the SVD.
pub fn opnorm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.nrows() >= m.ncols() { m.adjoint() * m } else { m * m.adjoint() };
    let eig = SymmetricEigen::new(gram);
    eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn euclidean_roundtrip() {
        let s = Space::euclidean(3);
        let x = DMatrix::from_fn(3, 1, |i, _| C64::new(i as f64 + 1.0, -0.5));
        let on = s.to_ortho(&x);
        let back = s.from_ortho(&on);
        assert!((&x - &back).norm() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_gram() {
        let g = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(2.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(Space::with_gram(g, &tol()), Err(WoldlabError::GramSingular)));
    }

    #[test]
    fn rejects_non_hermitian_gram() {
        let g = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.5, 0.1), C64::new(0.5, 0.2), C64::new(1.0, 0.0)]);
        assert!(Space::with_gram(g, &tol()).is_err());
    }

    #[test]
    fn graded_lex_ordering() {
        let ms = graded_monomials(2);
        let expect = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)];
        assert_eq!(ms.len(), 6);
        for (g, e) in ms.iter().zip(expect.iter()) {
            assert_eq!((g.m, g.n), *e);
        }
    }

    #[test]
    fn shared_budget_window() {
        let layout = GradedLayout::new(3, 1);
        let gram = DMatrix::identity(layout.dim(), layout.dim());
        let s = Space::graded(layout, gram, &tol()).unwrap();
        // degree <= 1 slice admits two more shifts
        let w = s.window(&[1, 1]);
        assert_eq!(w.len(), 3); // (0,0), (0,1), (1,0)
        let w1 = s.window_for(Some(0), 1);
        assert_eq!(w1.len(), 6); // total degree <= 2
    }

    #[test]
    fn ortho_preserves_inner_product() {
        let g = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.0), C64::new(0.0, 0.5), C64::new(0.0, -0.5), C64::new(1.0, 0.0)],
        );
        let s = Space::with_gram(g, &tol()).unwrap();
        let x = DMatrix::from_row_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let y = DMatrix::from_row_slice(2, 1, &[C64::new(0.0, -1.0), C64::new(2.0, 0.0)]);
        let lhs = s.ip(&x, &y);
        let xo = s.to_ortho(&x);
        let yo = s.to_ortho(&y);
        let rhs = (yo.adjoint() * xo)[(0, 0)];
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
