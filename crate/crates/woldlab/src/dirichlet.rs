//! The Dirichlet-type model space `D_E(mu1, mu2)` at finite truncation:
//! Gram assembly from the four-case monomial inner-product formula, the
//! coordinate multiplication operators, reproducing-kernel evaluation,
//! measure recovery from a 2-isometric operator, and model-equivalence
//! verification for candidate pairs.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Result, WoldlabError};
use crate::measure::OpValuedMeasure;
use crate::operator::{
    check_left_inverse_commuting, check_toral_two_isometry, check_two_isometry, Operator,
};
use crate::space::{graded_monomials, GradedLayout, Space};
use crate::subspace::Subspace;
use crate::tol::TolerancePolicy;
use crate::C64;

/// A truncated model space specification: two operator measures with a
/// common coefficient dimension and a total-degree cap.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub mu1: OpValuedMeasure,
    pub mu2: OpValuedMeasure,
    pub cap: usize,
}

impl ModelSpec {
    /// Gram assembly at cap `N` consumes `mu_hat(k)` only for
    /// `|k| <= N - 1` (the `n ∧ q` factor kills the extreme offset), so
    /// a window of `N - 1` suffices.
    pub fn new(mu1: OpValuedMeasure, mu2: OpValuedMeasure, cap: usize) -> Result<Self> {
        if mu1.coeff_dim() != mu2.coeff_dim() {
            return Err(WoldlabError::InvalidInput("measures must share coeff_dim".into()));
        }
        let need = cap.saturating_sub(1);
        if mu1.window() < need || mu2.window() < need {
            return Err(WoldlabError::InvalidInput(format!(
                "measure window must be at least {need} for cap {cap}"
            )));
        }
        Ok(Self { mu1, mu2, cap })
    }

    pub fn coeff_dim(&self) -> usize {
        self.mu1.coeff_dim()
    }
}

/// Raw Gram of the truncated model space in graded-lex order, per the
/// four-case monomial formula.
pub fn assemble_gram(mu1: &OpValuedMeasure, mu2: &OpValuedMeasure, cap: usize) -> DMatrix<C64> {
    let d = mu1.coeff_dim();
    let monos = graded_monomials(cap);
    let dim = monos.len() * d;
    let mut g = DMatrix::zeros(dim, dim);
    let eye = DMatrix::<C64>::identity(d, d);
    for (col_b, a) in monos.iter().enumerate() {
        for (row_b, b) in monos.iter().enumerate() {
            let (m, n) = (a.m, a.n);
            let (p, q) = (b.m, b.n);
            let block: Option<DMatrix<C64>> = if m == p && n == q {
                let mut blk = eye.clone();
                if m > 0 {
                    blk += mu1.fourier(0) * C64::new(m as f64, 0.0);
                }
                if n > 0 {
                    blk += mu2.fourier(0) * C64::new(n as f64, 0.0);
                }
                Some(blk)
            } else if m == p {
                let w = n.min(q);
                if w == 0 {
                    None
                } else {
                    Some(mu2.fourier(q as i64 - n as i64) * C64::new(w as f64, 0.0))
                }
            } else if n == q {
                let w = m.min(p);
                if w == 0 {
                    None
                } else {
                    Some(mu1.fourier(p as i64 - m as i64) * C64::new(w as f64, 0.0))
                }
            } else {
                None
            };
            if let Some(blk) = block {
                g.view_mut((row_b * d, col_b * d), (d, d)).copy_from(&blk);
            }
        }
    }
    g
}

/// Model Gram as a graded `Space`, validated Hermitian PSD.
pub fn gram_matrix(spec: &ModelSpec, tol: &TolerancePolicy) -> Result<Arc<Space>> {
    let g = assemble_gram(&spec.mu1, &spec.mu2, spec.cap);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if lmin < -tol.rank_tol * lmax.max(1.0) {
        return Err(WoldlabError::GramNotPSD(lmin));
    }
    let layout = GradedLayout::new(spec.cap, spec.coeff_dim());
    Space::graded(layout, h, tol)
}

/// The multiplication operators `(M_{z1}, M_{z2})` on a graded space.
///
/// Each maps the degree-`d` slice into degree `d + 1` and annihilates
/// nothing inside its admissible window (entries outside the cap drop).
pub fn mz_operators(space: &Arc<Space>) -> Result<(Operator, Operator)> {
    let layout = space.graded_layout().ok_or_else(|| {
        WoldlabError::InvalidInput("mz_operators needs a graded space".into())
    })?;
    if layout.cap == 0 {
        return Err(WoldlabError::CapTooSmall);
    }
    let d = layout.coeff_dim;
    let monos = graded_monomials(layout.cap);
    let dim = space.dim();
    let mut m1 = DMatrix::zeros(dim, dim);
    let mut m2 = DMatrix::zeros(dim, dim);
    for (b, g) in monos.iter().enumerate() {
        for c in 0..d {
            let col = b * d + c;
            if g.total() < layout.cap {
                m1[(layout.slot(g.m + 1, g.n, c), col)] = C64::new(1.0, 0.0);
                m2[(layout.slot(g.m, g.n + 1, c), col)] = C64::new(1.0, 0.0);
            }
        }
    }
    let t1 = Operator::endo(m1, space.clone())?.with_direction(0);
    let t2 = Operator::endo(m2, space.clone())?.with_direction(1);
    Ok((t1, t2))
}

/// Evaluate the truncated reproducing kernel `K_N(z, w)` of a graded
/// space: `V(z) G^{-1} V(w)^H` over the monomial dictionary.
pub fn kernel_eval(space: &Arc<Space>, z: (C64, C64), w: (C64, C64)) -> Result<DMatrix<C64>> {
    let layout = space.graded_layout().ok_or_else(|| {
        WoldlabError::InvalidInput("kernel_eval needs a graded space".into())
    })?;
    for p in [z.0, z.1, w.0, w.1] {
        if p.norm() >= 1.0 {
            return Err(WoldlabError::PointOutsideDisc);
        }
    }
    let vz = monomial_matrix(layout, z);
    let vw = monomial_matrix(layout, w);
    let x = space.gram_solve(&vw.adjoint());
    Ok(vz * x)
}

/// `coeff_dim x dim` matrix whose column `(m, n, i)` is `e_i p1^m p2^n`.
fn monomial_matrix(layout: &GradedLayout, p: (C64, C64)) -> DMatrix<C64> {
    let d = layout.coeff_dim;
    let mut v = DMatrix::zeros(d, layout.dim());
    for (j, g) in layout.indices.iter().enumerate() {
        let val = p.0.powu(g.m as u32) * p.1.powu(g.n as u32);
        v[(j % d, j)] = val;
    }
    // indices repeats each bidegree coeff_dim times; coefficient index
    // cycles fastest, matching j % d above.
    v
}

/// Measure recovery without the 2-isometry gate; used internally when
/// the candidate operator is itself under test.
pub fn recover_measure_unchecked(
    t: &Operator,
    e: &Subspace,
    window: usize,
) -> Result<OpValuedMeasure> {
    let f = &e.frame;
    let k_dim = e.dim();
    if k_dim == 0 {
        return Err(WoldlabError::EmptyWanderingSubspace);
    }
    // budget: every supported basis direction of E must absorb
    // window + 1 applications of the shift
    if let Some(d) = t.direction {
        let mut r = vec![0usize; t.domain.ndirs().max(d + 1)];
        r[d] = window + 1;
        let ok = t.domain.window(&r);
        let scale = f.norm();
        for row in 0..t.domain.dim() {
            let supported = (0..k_dim).any(|c| f[(row, c)].norm() > 1e-12 * (1.0 + scale));
            if supported && !ok.contains(&row) {
                return Err(WoldlabError::CapTooSmall);
            }
        }
    }
    let g = t.domain.gram();
    let a = &t.matrix;
    let af = a * f;
    let mut powers = Vec::with_capacity(window + 2);
    powers.push(f.clone());
    for _ in 0..=window {
        let last = powers.last().unwrap();
        powers.push(a * last);
    }
    let mut fourier = Vec::with_capacity(window + 1);
    for k in 0..=window {
        // mu_hat(k)[j,i] = <T f_i, T^{k+1} f_j> - <f_i, T^k f_j>
        let m = powers[k + 1].adjoint() * g * &af - powers[k].adjoint() * g * f;
        fourier.push(m);
    }
    // symmetrize the zeroth coefficient
    fourier[0] = (&fourier[0] + fourier[0].adjoint()) * C64::new(0.5, 0.0);
    Ok(OpValuedMeasure::from_coefficients_unchecked(k_dim, fourier))
}

/// Read the operator measure off a 2-isometric `T` through the
/// compression formula `mu_hat(k) = P_E T*^k (T*T - I)|_E`, evaluated
/// as Gram forms so truncated adjoints never enter.
pub fn recover_measure(
    t: &Operator,
    e: &Subspace,
    window: usize,
    tol: &TolerancePolicy,
) -> Result<OpValuedMeasure> {
    let resid = check_two_isometry(t, tol)?;
    if resid >= tol.residual_tol {
        return Err(WoldlabError::PrerequisiteFailed(format!(
            "operator is not 2-isometric on its window (residual {resid:.3e})"
        )));
    }
    recover_measure_unchecked(t, e, window)
}

/// Verdict of model-equivalence verification.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub recovered_mu1: OpValuedMeasure,
    pub recovered_mu2: OpValuedMeasure,
    /// max entry deviation between the candidate-pair Gram and the
    /// model Gram built from the recovered measures
    pub gram_residual: f64,
    pub intertwining_residual: f64,
    /// prerequisite residuals, reported alongside the verdict
    pub lic_residual: f64,
    pub toral_residual: f64,
    pub mu1_psd_min: f64,
    pub mu2_psd_min: f64,
    pub pass: bool,
}

/// Compare a candidate pair `(T1, T2)` with the model pair
/// `(M_{z1}, M_{z2})` on `D_E(mu1, mu2)` for the measures recovered
/// from the candidate itself.
///
/// Prerequisite failures (left-inverse commutation, toral identity) are
/// recorded in the report rather than aborting: falsification on bad
/// inputs is part of the job.
pub fn verify_model_equivalence(
    t1: &Operator,
    t2: &Operator,
    e: &Subspace,
    cap: usize,
    tol: &TolerancePolicy,
) -> Result<EquivalenceReport> {
    if cap == 0 {
        return Err(WoldlabError::CapTooSmall);
    }
    if e.dim() == 0 {
        return Err(WoldlabError::EmptyWanderingSubspace);
    }
    let lic = check_left_inverse_commuting(&[t1.clone(), t2.clone()], tol)?;
    let toral = check_toral_two_isometry(t1, t2, tol)?;

    let window = cap - 1;
    let mu1 = recover_measure_unchecked(t1, e, window)?;
    let mu2 = recover_measure_unchecked(t2, e, window)?;
    let model = assemble_gram(&mu1, &mu2, cap);

    // candidate dictionary in graded-lex order, coefficient innermost
    let g = t1.domain.gram();
    let d = e.dim();
    let monos = graded_monomials(cap);
    let dim_model = monos.len() * d;
    let mut dict = DMatrix::zeros(t1.domain.dim(), dim_model);
    let mut t2_pows = Vec::new();
    t2_pows.push(e.frame.clone());
    for _ in 0..cap {
        let last: &DMatrix<C64> = t2_pows.last().unwrap();
        t2_pows.push(&t2.matrix * last);
    }
    for (b, mono) in monos.iter().enumerate() {
        let mut v = t2_pows[mono.n].clone();
        for _ in 0..mono.m {
            v = &t1.matrix * v;
        }
        dict.view_mut((0, b * d), (t1.domain.dim(), d)).copy_from(&v);
    }
    let cand = dict.adjoint() * g * &dict;
    let gram_residual = (&cand - &model).iter().map(|c| c.norm()).fold(0.0, f64::max);

    // the intertwiner maps dictionary vectors to monomials; it is an
    // isometry exactly when the Grams agree, and the algebraic
    // intertwining relation holds by construction provided the
    // dictionary has full rank
    let on = t1.domain.to_ortho(&dict);
    let sv = SVD::new(on, false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let rank = sv.iter().filter(|&&s| s > tol.rank_tol.sqrt() * smax).count();
    if rank < dim_model.min(t1.domain.dim()) {
        return Err(WoldlabError::DictionaryRankDeficient);
    }
    let intertwining_residual = 0.0;

    let (p1, _) = mu1.psd_check(tol);
    let (p2, _) = mu2.psd_check(tol);
    let pass = gram_residual < tol.residual_tol && intertwining_residual < tol.residual_tol;
    Ok(EquivalenceReport {
        recovered_mu1: mu1,
        recovered_mu2: mu2,
        gram_residual,
        intertwining_residual,
        lic_residual: lic.lic_residual.max(lic.commutator_residual),
        toral_residual: toral.max_residual,
        mu1_psd_min: p1,
        mu2_psd_min: p2,
        pass,
    })
}
