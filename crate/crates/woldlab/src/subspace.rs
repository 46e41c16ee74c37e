//! Orthonormal-frame subspace arithmetic: ranges, kernels,
//! intersections, joins, complements and invariance verdicts.
//!
//! A subspace is a `dim x k` matrix of Gram-orthonormal columns; the
//! zero subspace (`k = 0`) is a first-class value so stabilization
//! loops terminate cleanly. Intersections go through principal angles
//! (SVD of the frame cross-Gram) rather than double complementation.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, WoldlabError};
use crate::operator::{adjoint, Operator};
use crate::space::{opnorm, Space};
use crate::tol::TolerancePolicy;
use crate::C64;

#[derive(Debug, Clone)]
pub struct Subspace {
    /// Base-coordinate frame; columns are Gram-orthonormal.
    pub frame: DMatrix<C64>,
    pub space: Arc<Space>,
}

impl Subspace {
    pub fn zero(space: Arc<Space>) -> Self {
        let d = space.dim();
        Self { frame: DMatrix::zeros(d, 0), space }
    }

    pub fn full(space: Arc<Space>) -> Self {
        let d = space.dim();
        let frame = space.from_ortho(&DMatrix::identity(d, d));
        Self { frame, space }
    }

    /// Closed span of the given coordinate columns, orthonormalized
    /// with respect to the Gram; rank decided by `rank_tol`.
    ///
    /// Uses column-pivoted Householder QR: the pivoted `R` diagonal is
    /// the rank decision and `Q` is orthonormal to machine precision.
    pub fn from_span(space: Arc<Space>, cols: &DMatrix<C64>, tol: &TolerancePolicy) -> Self {
        if cols.ncols() == 0 {
            return Self::zero(space);
        }
        let on = space.to_ortho(cols);
        let qr = on.col_piv_qr();
        let r = qr.r();
        let k = r.nrows().min(r.ncols());
        // the scale floor of 1 makes numerically-zero spans collapse to
        // the zero subspace instead of keeping noise directions
        let dmax = (0..k).map(|i| r[(i, i)].norm()).fold(0.0f64, f64::max).max(1.0);
        let rank = (0..k).take_while(|&i| r[(i, i)].norm() > tol.rank_tol * dmax).count();
        if rank == 0 {
            return Self::zero(space);
        }
        let q = qr.q();
        let frame = space.from_ortho(&q.columns(0, rank).into_owned());
        Self { frame, space }
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Frame in orthonormal coordinates (Euclidean-orthonormal columns).
    pub fn ortho_frame(&self) -> DMatrix<C64> {
        self.space.to_ortho(&self.frame)
    }

    /// Orthogonal projection in orthonormal coordinates.
    pub fn projection_ortho(&self) -> DMatrix<C64> {
        let f = self.ortho_frame();
        let d = self.space.dim();
        if self.is_zero() {
            return DMatrix::zeros(d, d);
        }
        &f * f.adjoint()
    }

    /// Defect of the orthonormality invariant `F^H G F = I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.dim();
        let m = self.frame.adjoint() * self.space.gram() * &self.frame;
        opnorm(&(m - DMatrix::identity(k, k)))
    }
}

/// Range of `T` (restricted to its admissible window columns).
pub fn range(t: &Operator, tol: &TolerancePolicy) -> Subspace {
    let window = t.domain.window_for(t.direction, 1);
    let cols = t.matrix.select_columns(window.iter());
    Subspace::from_span(t.codomain.clone(), &cols, tol)
}

/// Kernel of `T`, computed as the orthogonal complement of the range
/// of `T*` within the domain.
pub fn kernel(t: &Operator, tol: &TolerancePolicy) -> Subspace {
    let at = adjoint(t);
    let r = Subspace::from_span(at.codomain.clone(), &at.matrix, tol);
    complement(&r, &Subspace::full(t.domain.clone()), tol).expect("range nested in full space")
}

/// Image `T(S)` as a subspace of the codomain.
pub fn image(t: &Operator, s: &Subspace, tol: &TolerancePolicy) -> Subspace {
    Subspace::from_span(t.codomain.clone(), &(&t.matrix * &s.frame), tol)
}

/// Intersection via principal angles: keep directions whose cosine
/// exceeds `1 - rank_tol`, found as the near-unit eigenvalues of
/// `M M^H` for the frame cross-Gram `M` (eigenvalues are squared
/// cosines; eigenvector mixing inside the near-1 cluster is harmless).
pub fn intersect(a: &Subspace, b: &Subspace, tol: &TolerancePolicy) -> Subspace {
    if a.is_zero() || b.is_zero() {
        return Subspace::zero(a.space.clone());
    }
    let (small, big) = if a.dim() <= b.dim() { (a, b) } else { (b, a) };
    let m = small.ortho_frame().adjoint() * big.ortho_frame();
    let mmh = &m * m.adjoint();
    let eig = SymmetricEigen::new(mmh);
    let cut = (1.0 - tol.rank_tol) * (1.0 - tol.rank_tol);
    let keep: Vec<usize> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cut)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Subspace::zero(a.space.clone());
    }
    let dirs = small.ortho_frame() * eig.eigenvectors.select_columns(keep.iter());
    Subspace::from_span(a.space.clone(), &a.space.from_ortho(&dirs), tol)
}

/// Join (closed span of the union).
pub fn join(a: &Subspace, b: &Subspace, tol: &TolerancePolicy) -> Subspace {
    let mut cols = DMatrix::zeros(a.space.dim(), a.dim() + b.dim());
    cols.view_mut((0, 0), (a.space.dim(), a.dim())).copy_from(&a.frame);
    cols.view_mut((0, a.dim()), (b.space.dim(), b.dim())).copy_from(&b.frame);
    Subspace::from_span(a.space.clone(), &cols, tol)
}

/// Orthogonal complement `B ⊖ A`; requires `A ⊆ B`.
pub fn complement(a: &Subspace, within: &Subspace, tol: &TolerancePolicy) -> Result<Subspace> {
    let a_on = a.ortho_frame();
    let b_on = within.ortho_frame();
    if !a.is_zero() {
        let defect = opnorm(&(&a_on - &b_on * (b_on.adjoint() * &a_on)));
        if defect > tol.residual_tol.max(1e-10) * 10.0 {
            return Err(WoldlabError::NotNested);
        }
    }
    let c_on = &b_on - &a_on * (a_on.adjoint() * &b_on);
    Ok(Subspace::from_span(a.space.clone(), &a.space.from_ortho(&c_on), tol))
}

/// Complement within the whole space.
pub fn complement_full(a: &Subspace, tol: &TolerancePolicy) -> Subspace {
    complement(a, &Subspace::full(a.space.clone()), tol).expect("full space contains everything")
}

/// `|| P_A - P_B ||`; the sine of the largest principal angle when the
/// dimensions agree, and at least 1 otherwise.
pub fn principal_angle_residual(a: &Subspace, b: &Subspace) -> f64 {
    opnorm(&(a.projection_ortho() - b.projection_ortho()))
}

/// `|| F_A^H G F_B ||`: cosine of the smallest principal angle; used
/// as an orthogonality residual.
pub fn cross_gram_norm(a: &Subspace, b: &Subspace) -> f64 {
    if a.is_zero() || b.is_zero() {
        return 0.0;
    }
    opnorm(&(a.ortho_frame().adjoint() * b.ortho_frame()))
}

/// Is `inner` contained in `outer` (up to the pass tolerance)?
pub fn contains(outer: &Subspace, inner: &Subspace, tol: &TolerancePolicy) -> bool {
    if inner.is_zero() {
        return true;
    }
    let i_on = inner.ortho_frame();
    let o_on = outer.ortho_frame();
    opnorm(&(&i_on - &o_on * (o_on.adjoint() * &i_on))) < tol.residual_tol.max(1e-9)
}

/// Invariance / reducing residuals of `S` under `T`.
#[derive(Debug, Clone, Copy)]
pub struct InvarianceReport {
    /// `|| (I - P_S) T P_S ||`
    pub invariant: f64,
    /// `max(invariant, || (I - P_S) T* P_S ||)`
    pub reducing: f64,
}

pub fn invariance_report(t: &Operator, s: &Subspace) -> InvarianceReport {
    if s.is_zero() {
        return InvarianceReport { invariant: 0.0, reducing: 0.0 };
    }
    let a = t.ortho();
    let f = s.ortho_frame();
    let p = s.projection_ortho();
    let d = s.space.dim();
    let i = DMatrix::<C64>::identity(d, d);
    let q = &i - &p;
    let invariant = opnorm(&(&q * (&a * &f)));
    let adj = opnorm(&(&q * (a.adjoint() * &f)));
    InvarianceReport { invariant, reducing: invariant.max(adj) }
}
