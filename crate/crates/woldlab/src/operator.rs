//! Dense operators between inner-product spaces, together with the
//! pointwise operator identities: adjoint, left inverse, Cauchy dual,
//! 2-isometry, toral 2-isometry, and left-inverse commutation.
//!
//! Identity checks on truncated spaces are evaluated as sesquilinear
//! forms using only Gram entries, restricted to the window of basis
//! directions whose budget still admits the required shifts; truncated
//! adjoint products are never used in the forms.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Result, WoldlabError};
use crate::space::{opnorm, Space};
use crate::tol::TolerancePolicy;
use crate::C64;

/// A bounded operator `T: domain -> codomain` given by its matrix in
/// the basis coordinates of the two spaces.
///
/// `direction` records which shift direction the operator consumes on a
/// truncated space (`None` for unitaries, adjoints and operators on
/// untruncated spaces); it selects the admissible window for checks.
#[derive(Debug, Clone)]
pub struct Operator {
    pub matrix: DMatrix<C64>,
    pub domain: Arc<Space>,
    pub codomain: Arc<Space>,
    pub direction: Option<usize>,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>, domain: Arc<Space>, codomain: Arc<Space>) -> Result<Self> {
        if matrix.ncols() != domain.dim() || matrix.nrows() != codomain.dim() {
            return Err(WoldlabError::InvalidInput("matrix shape does not match spaces".into()));
        }
        Ok(Self { matrix, domain, codomain, direction: None })
    }

    pub fn endo(matrix: DMatrix<C64>, space: Arc<Space>) -> Result<Self> {
        Self::new(matrix, space.clone(), space)
    }

    pub fn with_direction(mut self, dir: usize) -> Self {
        self.direction = Some(dir);
        self
    }

    pub fn identity(space: Arc<Space>) -> Self {
        let n = space.dim();
        Self { matrix: DMatrix::identity(n, n), domain: space.clone(), codomain: space, direction: None }
    }

    pub fn is_endomorphism(&self) -> bool {
        Arc::ptr_eq(&self.domain, &self.codomain) || self.domain.dim() == self.codomain.dim()
    }

    /// Matrix in orthonormal coordinates: `L_cod^H A L_dom^{-H}`.
    pub fn ortho(&self) -> DMatrix<C64> {
        self.codomain.chol_l().adjoint() * &self.matrix * self.domain.chol_lh_inv()
    }

    /// Operator norm with respect to the stored Grams.
    pub fn norm(&self) -> f64 {
        opnorm(&self.ortho())
    }

    pub fn compose(&self, rhs: &Operator) -> Operator {
        debug_assert_eq!(self.domain.dim(), rhs.codomain.dim());
        Operator {
            matrix: &self.matrix * &rhs.matrix,
            domain: rhs.domain.clone(),
            codomain: self.codomain.clone(),
            direction: match (self.direction, rhs.direction) {
                (Some(a), Some(b)) if a == b => Some(a),
                _ => None,
            },
        }
    }

    pub fn pow(&self, k: usize) -> DMatrix<C64> {
        let n = self.matrix.nrows();
        let mut acc = DMatrix::identity(n, n);
        for _ in 0..k {
            acc = &self.matrix * acc;
        }
        acc
    }

    /// Apply to a block of coordinate columns.
    pub fn apply(&self, cols: &DMatrix<C64>) -> DMatrix<C64> {
        &self.matrix * cols
    }
}

/// Adjoint with respect to the stored Grams: `A* = G_dom^{-1} A^H G_cod`.
pub fn adjoint(t: &Operator) -> Operator {
    let rhs = t.matrix.adjoint() * t.codomain.gram();
    let m = t.domain.gram_solve(&rhs);
    Operator { matrix: m, domain: t.codomain.clone(), codomain: t.domain.clone(), direction: None }
}

/// `T*T` compressed to the admissible window columns of the domain.
fn window_normal_matrix(t: &Operator, window: &[usize]) -> DMatrix<C64> {
    let w = window.len();
    let tr = t.matrix.select_columns(window.iter());
    let full = tr.adjoint() * t.codomain.gram() * &tr;
    debug_assert_eq!(full.nrows(), w);
    full
}

fn restricted_columns(m: &DMatrix<C64>, window: &[usize]) -> DMatrix<C64> {
    m.select_columns(window.iter())
}

/// Left inverse `L = (T*T)^{-1} T*` on the admissible window.
///
/// Rows of the returned matrix outside the window are zero.
pub fn left_inverse(t: &Operator, tol: &TolerancePolicy) -> Result<Operator> {
    let window = t.domain.window_for(t.direction, 1);
    if window.is_empty() {
        return Err(WoldlabError::CapTooSmall);
    }
    let m = window_normal_matrix(t, &window);
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > tol.rank_tol * smax) || smax == 0.0 {
        return Err(WoldlabError::NotLeftInvertible);
    }
    let m_inv = m.try_inverse().ok_or(WoldlabError::NotLeftInvertible)?;
    let tr = restricted_columns(&t.matrix, &window);
    let l_rows = m_inv * tr.adjoint() * t.codomain.gram();
    let mut l_full = DMatrix::zeros(t.domain.dim(), t.codomain.dim());
    for (r, &j) in window.iter().enumerate() {
        l_full.row_mut(j).copy_from(&l_rows.row(r));
    }
    Operator::new(l_full, t.codomain.clone(), t.domain.clone())
}

/// Cauchy dual `T' = T (T*T)^{-1}` on the admissible window.
pub fn cauchy_dual(t: &Operator, tol: &TolerancePolicy) -> Result<Operator> {
    let window = t.domain.window_for(t.direction, 1);
    if window.is_empty() {
        return Err(WoldlabError::CapTooSmall);
    }
    let m = window_normal_matrix(t, &window);
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > tol.rank_tol * smax) || smax == 0.0 {
        return Err(WoldlabError::NotLeftInvertible);
    }
    let m_inv = m.try_inverse().ok_or(WoldlabError::NotLeftInvertible)?;
    let tr = restricted_columns(&t.matrix, &window);
    let dual_cols = tr * m_inv;
    let mut dual = DMatrix::zeros(t.codomain.dim(), t.domain.dim());
    for (c, &j) in window.iter().enumerate() {
        dual.column_mut(j).copy_from(&dual_cols.column(c));
    }
    let mut out = Operator::new(dual, t.domain.clone(), t.codomain.clone())?;
    out.direction = t.direction;
    Ok(out)
}

/// Operator norm of `m` restricted to the given domain columns, with
/// the restricted domain carrying the corresponding sub-Gram.
pub fn windowed_norm(m: &DMatrix<C64>, domain: &Space, codomain: &Space, window: &[usize]) -> f64 {
    if window.is_empty() {
        return 0.0;
    }
    let sub = restricted_columns(m, window);
    let gw = domain.sub_gram(window);
    let chol = nalgebra::Cholesky::new(gw).expect("window gram positive definite");
    let lw_h_inv = chol
        .l()
        .adjoint()
        .solve_upper_triangular(&DMatrix::identity(window.len(), window.len()))
        .expect("triangular solve");
    opnorm(&(codomain.chol_l().adjoint() * sub * lw_h_inv))
}

/// Operator norm of the form matrix `M` (entries `<D e_j, e_i>`) seen
/// as an operator on the windowed subspace: `|| Lw^{-1} M_w Lw^{-H} ||`.
fn form_norm(m: &DMatrix<C64>, space: &Space, window: &[usize]) -> f64 {
    if window.is_empty() {
        return 0.0;
    }
    let w = window.len();
    let mw = DMatrix::from_fn(w, w, |i, j| m[(window[i], window[j])]);
    let gw = space.sub_gram(window);
    let chol = nalgebra::Cholesky::new(gw).expect("window gram positive definite");
    let l = chol.l();
    let x = l.solve_lower_triangular(&mw).expect("triangular solve");
    let y = l.solve_lower_triangular(&x.adjoint()).expect("triangular solve").adjoint();
    opnorm(&y)
}

/// Residual of `I - 2 T*T + T*^2 T^2 = 0` on the admissible window,
/// evaluated as the sesquilinear form
/// `<e, f> - 2 <T e, T f> + <T^2 e, T^2 f>`.
pub fn check_two_isometry(t: &Operator, _tol: &TolerancePolicy) -> Result<f64> {
    if !t.is_endomorphism() {
        return Err(WoldlabError::InvalidInput("two-isometry check needs an endomorphism".into()));
    }
    let window = t.domain.window_for(t.direction, 2);
    if window.is_empty() {
        return Err(WoldlabError::CapTooSmall);
    }
    let g = t.domain.gram();
    let a = &t.matrix;
    let a2 = a * a;
    let m = g - (a.adjoint() * g * a) * C64::new(2.0, 0.0) + a2.adjoint() * g * &a2;
    Ok(form_norm(&m, &t.domain, &window))
}

/// Residuals of the toral 2-isometry identity
/// `I - T_i*T_i - T_j*T_j + T_j*T_i*T_iT_j = 0` for all `(i, j)`.
#[derive(Debug, Clone)]
pub struct ToralReport {
    /// residuals indexed by `(i, j)` in `{0,1}^2`
    pub residuals: [[f64; 2]; 2],
    pub max_residual: f64,
    pub pass: bool,
}

pub fn check_toral_two_isometry(
    t1: &Operator,
    t2: &Operator,
    tol: &TolerancePolicy,
) -> Result<ToralReport> {
    if t1.domain.dim() != t2.domain.dim() {
        return Err(WoldlabError::InvalidInput("operators must share a space".into()));
    }
    let space = &t1.domain;
    let g = space.gram();
    let ops = [t1, t2];
    let mut residuals = [[0.0f64; 2]; 2];
    let ndirs = space.ndirs().max(2);
    for i in 0..2 {
        for j in 0..2 {
            let mut r = vec![0usize; ndirs];
            if let Some(d) = ops[i].direction {
                r[d] += 1;
            }
            if let Some(d) = ops[j].direction {
                r[d] += 1;
            }
            let window = space.window(&r);
            if window.is_empty() {
                return Err(WoldlabError::CapTooSmall);
            }
            let ai = &ops[i].matrix;
            let aj = &ops[j].matrix;
            let b = ai * aj;
            let m = g + b.adjoint() * g * &b - ai.adjoint() * g * ai - aj.adjoint() * g * aj;
            residuals[i][j] = form_norm(&m, space, &window);
        }
    }
    let max_residual = residuals.iter().flatten().cloned().fold(0.0, f64::max);
    Ok(ToralReport { residuals, max_residual, pass: max_residual < tol.residual_tol })
}

/// Report for the left-inverse commuting check of an operator tuple.
#[derive(Debug, Clone)]
pub struct LicReport {
    /// `max over i != j` of `|| L_i T_j - T_j L_i ||` on the window
    pub lic_residual: f64,
    /// `max over i < j` of `|| T_i T_j - T_j T_i ||` on the window
    pub commutator_residual: f64,
    pub pairwise_lic: Vec<(usize, usize, f64)>,
    pub pairwise_commutator: Vec<(usize, usize, f64)>,
    pub pass: bool,
}

/// Checks that the tuple is left-inverse commuting: `L_i T_j = T_j L_i`
/// for `i != j`. A commutator above tolerance is reported, not fatal;
/// a non-left-invertible component is.
pub fn check_left_inverse_commuting(ts: &[Operator], tol: &TolerancePolicy) -> Result<LicReport> {
    if ts.is_empty() {
        return Err(WoldlabError::InvalidInput("empty tuple".into()));
    }
    let space = &ts[0].domain;
    for t in ts {
        if t.domain.dim() != space.dim() || !t.is_endomorphism() {
            return Err(WoldlabError::InvalidInput("tuple must share one space".into()));
        }
    }
    let ndirs = space.ndirs().max(ts.len());
    let ls: Vec<Operator> = ts.iter().map(|t| left_inverse(t, tol)).collect::<Result<_>>()?;
    let mut pairwise_lic = Vec::new();
    let mut pairwise_commutator = Vec::new();
    for i in 0..ts.len() {
        for j in 0..ts.len() {
            if i == j {
                continue;
            }
            let mut r = vec![0usize; ndirs];
            if let Some(d) = ts[i].direction {
                r[d] += 1;
            }
            if let Some(d) = ts[j].direction {
                r[d] += 1;
            }
            let window = space.window(&r);
            let d_lic = &ls[i].matrix * &ts[j].matrix - &ts[j].matrix * &ls[i].matrix;
            pairwise_lic.push((i, j, windowed_norm(&d_lic, space, space, &window)));
            if i < j {
                let d_comm = &ts[i].matrix * &ts[j].matrix - &ts[j].matrix * &ts[i].matrix;
                pairwise_commutator.push((i, j, windowed_norm(&d_comm, space, space, &window)));
            }
        }
    }
    let lic_residual = pairwise_lic.iter().map(|x| x.2).fold(0.0, f64::max);
    let commutator_residual = pairwise_commutator.iter().map(|x| x.2).fold(0.0, f64::max);
    Ok(LicReport {
        lic_residual,
        commutator_residual,
        pairwise_lic,
        pairwise_commutator,
        pass: lic_residual < tol.residual_tol && commutator_residual < tol.residual_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn euclidean_adjoint_is_conjugate_transpose() {
        let s = Space::euclidean(2);
        let t = Operator::endo(
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            s,
        )
        .unwrap();
        let a = adjoint(&t);
        let expect = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((&a.matrix - expect).norm() < 1e-14);
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        let s = Space::euclidean(3);
        let t = Operator::identity(s);
        let a = adjoint(&t);
        assert!((&a.matrix - DMatrix::<C64>::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn adjoint_defining_form_under_nontrivial_gram() {
        // <T x, y> = <x, T* y> for all basis pairs
        let g = DMatrix::from_row_slice(
            2,
            2,
            &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.5, 0.0)],
        );
        let s = Space::with_gram(g, &tol()).unwrap();
        let t = Operator::endo(
            DMatrix::from_row_slice(2, 2, &[c(0.1, 0.7), c(-1.0, 0.2), c(0.5, 0.0), c(0.0, -0.3)]),
            s.clone(),
        )
        .unwrap();
        let a = adjoint(&t);
        for i in 0..2 {
            for j in 0..2 {
                let ei = DMatrix::from_fn(2, 1, |k, _| if k == i { c(1.0, 0.0) } else { c(0.0, 0.0) });
                let ej = DMatrix::from_fn(2, 1, |k, _| if k == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
                let lhs = s.ip(&t.apply(&ei), &ej);
                let rhs = s.ip(&ei, &a.apply(&ej));
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_is_involution() {
        let g = DMatrix::from_row_slice(
            2,
            2,
            &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.5, 0.0)],
        );
        let s = Space::with_gram(g, &tol()).unwrap();
        let t = Operator::endo(
            DMatrix::from_row_slice(2, 2, &[c(0.1, 0.7), c(-1.0, 0.2), c(0.5, 0.0), c(0.0, -0.3)]),
            s,
        )
        .unwrap();
        let tt = adjoint(&adjoint(&t));
        assert!((&tt.matrix - &t.matrix).norm() < 1e-12);
    }

    #[test]
    fn left_inverse_of_scalar() {
        let s = Space::euclidean(2);
        let t = Operator::endo(DMatrix::identity(2, 2) * c(2.0, 0.0), s).unwrap();
        let l = left_inverse(&t, &tol()).unwrap();
        assert!((&l.matrix - DMatrix::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-13);
        let d = cauchy_dual(&t, &tol()).unwrap();
        assert!((&d.matrix - DMatrix::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn left_inverse_of_unitary_is_adjoint() {
        let s = Space::euclidean(2);
        let u = Operator::endo(
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]),
            s,
        )
        .unwrap();
        let l = left_inverse(&u, &tol()).unwrap();
        assert!((&l.matrix - adjoint(&u).matrix).norm() < 1e-13);
        // isometry: cauchy dual fixed point
        let d = cauchy_dual(&u, &tol()).unwrap();
        assert!((&d.matrix - &u.matrix).norm() < 1e-13);
    }

    #[test]
    fn zero_matrix_is_not_left_invertible() {
        let s = Space::euclidean(2);
        let t = Operator::endo(DMatrix::zeros(2, 2), s).unwrap();
        assert!(matches!(left_inverse(&t, &tol()), Err(WoldlabError::NotLeftInvertible)));
    }

    #[test]
    fn cauchy_dual_is_involution() {
        let s = Space::euclidean(3);
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.2), c(0.0, 0.0), c(0.3, 0.0),
                c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.1),
                c(0.0, -0.1), c(0.4, 0.0), c(1.5, 0.0),
            ],
        );
        let t = Operator::endo(m, s).unwrap();
        let dd = cauchy_dual(&cauchy_dual(&t, &tol()).unwrap(), &tol()).unwrap();
        assert!((&dd.matrix - &t.matrix).norm() < 1e-10);
    }

    #[test]
    fn two_isometry_residual_of_scalar_two() {
        // I - 2 T*T + T*^2 T^2 with T = 2I gives |1 - 8 + 16| = 9
        let s = Space::euclidean(1);
        let t = Operator::endo(DMatrix::identity(1, 1) * c(2.0, 0.0), s).unwrap();
        let r = check_two_isometry(&t, &tol()).unwrap();
        assert!((r - 9.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_is_two_isometry_and_toral_pair() {
        let s = Space::euclidean(2);
        let u = Operator::endo(
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]),
            s.clone(),
        )
        .unwrap();
        assert!(check_two_isometry(&u, &tol()).unwrap() < 1e-12);
        let v = Operator::endo(DMatrix::identity(2, 2) * c(0.0, 1.0), s).unwrap();
        let rep = check_toral_two_isometry(&u, &v, &tol()).unwrap();
        assert!(rep.pass, "residuals {:?}", rep.residuals);
    }

    #[test]
    fn unitary_pair_is_left_inverse_commuting() {
        let s = Space::euclidean(2);
        let u = Operator::endo(
            DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
            s,
        )
        .unwrap();
        let rep = check_left_inverse_commuting(&[u.clone(), u], &tol()).unwrap();
        assert!(rep.pass);
        assert!(rep.lic_residual < 1e-12);
    }
}
