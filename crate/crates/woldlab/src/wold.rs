//! Hyper-ranges, wandering spans, the single-operator Wold-type
//! decomposition `H = H_inf(T) ⊕ W_T(E_T)`, the `2^n`-piece joint
//! decomposition for left-inverse commuting tuples, and the four-block
//! structural decomposition for toral 2-isometric pairs.
//!
//! Failure of a decomposition hypothesis is data (failing residuals in
//! the report), not an exception; only missing prerequisites such as
//! left invertibility abort.

use nalgebra::DMatrix;

use crate::dirichlet::recover_measure_unchecked;
use crate::error::{Result, WoldlabError};
use crate::measure::OpValuedMeasure;
use crate::operator::{
    adjoint, check_left_inverse_commuting, left_inverse, LicReport, Operator,
};
use crate::space::opnorm;
use crate::subspace::{
    complement, cross_gram_norm, image, intersect, invariance_report, join, kernel,
    principal_angle_residual, Subspace,
};
use crate::tol::TolerancePolicy;

/// Result of a dimension-stabilized iteration.
#[derive(Debug, Clone)]
pub struct Stabilized {
    pub subspace: Subspace,
    pub iterations: usize,
    /// Whether the ambient space truncates shifts, so the fixed point
    /// may be forced by degrees falling off the cap rather than by
    /// genuine stabilization.
    pub truncation_limited: bool,
}

/// `H_inf(T) = ∩_{m >= 1} T^m H`, computed by iterating
/// `S <- T(S)` from the full space; the chain `T^{m+1}H ⊆ T^m H` is
/// nested, so dimension equality certifies the fixed point.
pub fn hyper_range(t: &Operator, tol: &TolerancePolicy) -> Result<Stabilized> {
    let mut s = Subspace::full(t.domain.clone());
    for it in 0..tol.max_iter {
        let next = image(t, &s, tol);
        if next.dim() == s.dim() {
            return Ok(Stabilized {
                subspace: next,
                iterations: it + 1,
                truncation_limited: t.domain.is_truncated(),
            });
        }
        s = next;
    }
    Err(WoldlabError::NoStabilization(tol.max_iter))
}

/// `W_T(S) = ∨_{m >= 0} T^m(S)`; the join chain is increasing and
/// bounded, and one stationary step certifies closure.
pub fn wandering_span(t: &Operator, s: &Subspace, tol: &TolerancePolicy) -> Result<Stabilized> {
    let mut w = s.clone();
    for it in 0..tol.max_iter {
        let next = join(&w, &image(t, &w, tol), tol);
        if next.dim() == w.dim() {
            return Ok(Stabilized {
                subspace: next,
                iterations: it + 1,
                truncation_limited: t.domain.is_truncated(),
            });
        }
        w = next;
    }
    Err(WoldlabError::NoStabilization(tol.max_iter))
}

/// Largest subspace of `start` of the form `∩_m T^{m} (start)` jointly
/// over the given directions, by alternating single-direction
/// stabilizations `X <- X ∩ T_i(X)` until one full sweep leaves the
/// dimension unchanged.
fn joint_hyper(ts: &[&Operator], start: &Subspace, tol: &TolerancePolicy) -> Result<Subspace> {
    if ts.is_empty() {
        return Ok(start.clone());
    }
    let mut x = start.clone();
    for _ in 0..tol.max_iter {
        let before = x.dim();
        for t in ts {
            x = intersect(&x, &image(t, &x, tol), tol);
        }
        if x.dim() == before {
            return Ok(x);
        }
    }
    Err(WoldlabError::NoStabilization(tol.max_iter))
}

/// Smallest subspace containing `start` and invariant under every
/// listed operator: the joint wandering span `∨ T^{α∘m}(start)`.
fn joint_span(ts: &[&Operator], start: &Subspace, tol: &TolerancePolicy) -> Result<Subspace> {
    if ts.is_empty() {
        return Ok(start.clone());
    }
    let mut w = start.clone();
    for _ in 0..tol.max_iter {
        let before = w.dim();
        for t in ts {
            w = join(&w, &image(t, &w, tol), tol);
        }
        if w.dim() == before {
            return Ok(w);
        }
    }
    Err(WoldlabError::NoStabilization(tol.max_iter))
}

/// Defect of `T` restricted to `S` being unitary: the larger of the
/// isometry defect on `S` and the failure of `T(S) = S`.
pub fn unitary_residual(t: &Operator, s: &Subspace, tol: &TolerancePolicy) -> f64 {
    if s.is_zero() {
        return 0.0;
    }
    let f = s.ortho_frame();
    let af = t.ortho() * &f;
    let iso = opnorm(&(af.adjoint() * &af - DMatrix::identity(s.dim(), s.dim())));
    let onto = principal_angle_residual(&image(t, s, tol), s);
    iso.max(onto)
}

/// Verdict of the single-operator Wold-type decomposition.
#[derive(Debug, Clone)]
pub struct WoldReport {
    pub h_inf: Subspace,
    pub wandering: Subspace,
    /// defect of `H = H_inf ⊕ W_T(E_T)`
    pub completeness_residual: f64,
    /// cosine of the smallest principal angle between the two pieces
    pub orthogonality_residual: f64,
    /// defect of `T` restricted to `H_inf` being unitary
    pub unitary_residual: f64,
    /// defect of `H_inf` reducing `T`
    pub reducing_residual: f64,
    pub iterations: usize,
    pub truncation_limited: bool,
    pub pass: bool,
}

/// Wold-type decomposition of a single left-invertible operator:
/// `h_inf = H_inf(T)`, `wandering = W_T(ker T*)`, with every claimed
/// identity reported as a residual.
pub fn wold_single(t: &Operator, tol: &TolerancePolicy) -> Result<WoldReport> {
    left_inverse(t, tol)?;
    let hr = hyper_range(t, tol)?;
    let e = kernel(&adjoint(t), tol);
    let ws = wandering_span(t, &e, tol)?;
    let full = Subspace::full(t.domain.clone());
    let completeness_residual = principal_angle_residual(&join(&hr.subspace, &ws.subspace, tol), &full);
    let orthogonality_residual = cross_gram_norm(&hr.subspace, &ws.subspace);
    let unitary = unitary_residual(t, &hr.subspace, tol);
    let reducing = invariance_report(t, &hr.subspace).reducing;
    let pass = completeness_residual < tol.residual_tol
        && orthogonality_residual < tol.residual_tol
        && unitary < tol.residual_tol
        && reducing < tol.residual_tol;
    Ok(WoldReport {
        h_inf: hr.subspace,
        wandering: ws.subspace,
        completeness_residual,
        orthogonality_residual,
        unitary_residual: unitary,
        reducing_residual: reducing,
        iterations: hr.iterations.max(ws.iterations),
        truncation_limited: hr.truncation_limited,
        pass,
    })
}

/// One of the `2^n` pieces of the joint decomposition.
#[derive(Debug, Clone)]
pub struct TuplePiece {
    /// `alpha[i] = 0` marks a unitary direction, `1` a shift direction.
    pub alpha: Vec<u8>,
    pub subspace: Subspace,
    /// per-operator defect of `T_i` being unitary on this piece;
    /// meaningful when `alpha[i] = 0`, recorded as 0 otherwise
    pub unitary_residuals: Vec<f64>,
    /// per-operator reducing defects of this piece
    pub reducing_residuals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TupleWoldReport {
    /// pieces in ascending bit-code order (`alpha[i]` is bit `i`)
    pub pieces: Vec<TuplePiece>,
    pub completeness_residual: f64,
    /// max pairwise frame cross-Gram norm
    pub orthogonality_residual: f64,
    pub prerequisite: LicReport,
    pub pass: bool,
}

/// Joint Wold-type decomposition of a left-inverse commuting tuple into
/// `2^n` reducing pieces `H_alpha = ∨ T^{α∘m} ( ∩ T^{α̂∘m} E_alpha )`,
/// where `E_alpha` intersects `ker T_i*` over the shift directions.
///
/// If the left-inverse commuting prerequisite fails the call aborts
/// with `PrerequisiteFailed` unless `force` is set, in which case the
/// failing sub-report rides along and the residuals speak for
/// themselves.
pub fn wold_tuple(ts: &[Operator], force: bool, tol: &TolerancePolicy) -> Result<TupleWoldReport> {
    let n = ts.len();
    if n == 0 || n > 16 {
        return Err(WoldlabError::InvalidInput("tuple length must be 1..=16".into()));
    }
    let prerequisite = check_left_inverse_commuting(ts, tol)?;
    if !prerequisite.pass && !force {
        return Err(WoldlabError::PrerequisiteFailed(format!(
            "left-inverse commuting check failed (lic {:.3e}, commutator {:.3e})",
            prerequisite.lic_residual, prerequisite.commutator_residual
        )));
    }
    let space = ts[0].domain.clone();
    let full = Subspace::full(space.clone());
    let mut pieces = Vec::with_capacity(1 << n);
    for code in 0..(1usize << n) {
        let alpha: Vec<u8> = (0..n).map(|i| ((code >> i) & 1) as u8).collect();
        let shift_ops: Vec<&Operator> =
            (0..n).filter(|&i| alpha[i] == 1).map(|i| &ts[i]).collect();
        let unitary_ops: Vec<&Operator> =
            (0..n).filter(|&i| alpha[i] == 0).map(|i| &ts[i]).collect();
        // E_alpha: joint kernel of adjoints over the shift directions
        let mut e = full.clone();
        for t in &shift_ops {
            e = intersect(&e, &kernel(&adjoint(t), tol), tol);
        }
        let inner = joint_hyper(&unitary_ops, &e, tol)?;
        let piece = joint_span(&shift_ops, &inner, tol)?;
        let unitary_residuals: Vec<f64> = (0..n)
            .map(|i| if alpha[i] == 0 { unitary_residual(&ts[i], &piece, tol) } else { 0.0 })
            .collect();
        let reducing_residuals: Vec<f64> = ts
            .iter()
            .map(|t| invariance_report(t, &piece).reducing)
            .collect();
        pieces.push(TuplePiece { alpha, subspace: piece, unitary_residuals, reducing_residuals });
    }
    let mut union = Subspace::zero(space.clone());
    let mut orthogonality_residual = 0.0f64;
    for (i, p) in pieces.iter().enumerate() {
        union = join(&union, &p.subspace, tol);
        for q in pieces.iter().take(i) {
            orthogonality_residual =
                orthogonality_residual.max(cross_gram_norm(&p.subspace, &q.subspace));
        }
    }
    let completeness_residual = principal_angle_residual(&union, &full);
    let residual_ok = pieces.iter().all(|p| {
        p.unitary_residuals.iter().chain(p.reducing_residuals.iter()).all(|&r| r < tol.residual_tol)
    });
    let pass = prerequisite.pass
        && completeness_residual < tol.residual_tol
        && orthogonality_residual < tol.residual_tol
        && residual_ok;
    Ok(TupleWoldReport { pieces, completeness_residual, orthogonality_residual, prerequisite, pass })
}

/// Four-block structural decomposition of a toral 2-isometric pair:
/// `H = H_00 ⊕ H_01 ⊕ H_10 ⊕ H_11` with generating subspaces
/// `E_01 = ∩ T_1^m ker T_2*`, `E_10 = ∩ T_2^n ker T_1*`,
/// `E = ker T_1* ∩ ker T_2*`, and the operator measures read off each
/// Dirichlet-type block.
#[derive(Debug, Clone)]
pub struct StructuralReport {
    pub h00: Subspace,
    pub h01: Subspace,
    pub h10: Subspace,
    pub h11: Subspace,
    pub e: Subspace,
    pub e01: Subspace,
    pub e10: Subspace,
    /// measure of `D_{E_01}(mu1)`, recovered from `T_2`
    pub mu1: Option<OpValuedMeasure>,
    /// measure of `D_{E_10}(mu2)`, recovered from `T_1`
    pub mu2: Option<OpValuedMeasure>,
    /// measures of `D_E(nu1, nu2)`, recovered from `T_1` and `T_2`
    pub nu1: Option<OpValuedMeasure>,
    pub nu2: Option<OpValuedMeasure>,
    pub completeness_residual: f64,
    pub orthogonality_residual: f64,
    /// max norm of any off-diagonal block of `T_1`, `T_2` across pieces
    pub off_diagonal_residual: f64,
    /// defects of `T_1` unitary on `H_00`/`H_01` and `T_2` on `H_00`/`H_10`
    pub unitary_residuals: [f64; 4],
    pub pass: bool,
}

pub fn structural_decomposition_pair(
    t1: &Operator,
    t2: &Operator,
    window: usize,
    tol: &TolerancePolicy,
) -> Result<StructuralReport> {
    let prereq = check_left_inverse_commuting(&[t1.clone(), t2.clone()], tol)?;
    if !prereq.pass {
        return Err(WoldlabError::PrerequisiteFailed(format!(
            "left-inverse commuting check failed (lic {:.3e}, commutator {:.3e})",
            prereq.lic_residual, prereq.commutator_residual
        )));
    }
    let space = t1.domain.clone();
    let full = Subspace::full(space.clone());
    let k1 = kernel(&adjoint(t1), tol);
    let k2 = kernel(&adjoint(t2), tol);
    let e = intersect(&k1, &k2, tol);
    let e01 = joint_hyper(&[t1], &k2, tol)?;
    let e10 = joint_hyper(&[t2], &k1, tol)?;
    let h00 = joint_hyper(&[t1, t2], &full, tol)?;
    let h01 = joint_span(&[t2], &e01, tol)?;
    let h10 = joint_span(&[t1], &e10, tol)?;
    let h11 = joint_span(&[t1, t2], &e, tol)?;

    let recover = |t: &Operator, gen: &Subspace| -> Result<Option<OpValuedMeasure>> {
        if gen.is_zero() {
            return Ok(None);
        }
        recover_measure_unchecked(t, gen, window).map(Some)
    };
    let mu1 = recover(t2, &e01)?;
    let mu2 = recover(t1, &e10)?;
    let nu1 = recover(t1, &e)?;
    let nu2 = recover(t2, &e)?;

    let pieces = [&h00, &h01, &h10, &h11];
    let mut union = Subspace::zero(space.clone());
    let mut orthogonality_residual = 0.0f64;
    for (i, p) in pieces.iter().enumerate() {
        union = join(&union, p, tol);
        for q in pieces.iter().take(i) {
            orthogonality_residual = orthogonality_residual.max(cross_gram_norm(p, q));
        }
    }
    let completeness_residual = principal_angle_residual(&union, &full);
    // off-diagonal blocks of both operators across the four pieces
    let mut off_diagonal_residual = 0.0f64;
    for t in [t1, t2] {
        let a = t.ortho();
        for (i, p) in pieces.iter().enumerate() {
            for (j, q) in pieces.iter().enumerate() {
                if i == j || p.is_zero() || q.is_zero() {
                    continue;
                }
                let blk = q.ortho_frame().adjoint() * &a * p.ortho_frame();
                off_diagonal_residual = off_diagonal_residual.max(opnorm(&blk));
            }
        }
    }
    let unitary_residuals = [
        unitary_residual(t1, &h00, tol),
        unitary_residual(t1, &h01, tol),
        unitary_residual(t2, &h00, tol),
        unitary_residual(t2, &h10, tol),
    ];
    let pass = completeness_residual < tol.residual_tol
        && orthogonality_residual < tol.residual_tol
        && off_diagonal_residual < tol.residual_tol
        && unitary_residuals.iter().all(|&r| r < tol.residual_tol);
    Ok(StructuralReport {
        h00,
        h01,
        h10,
        h11,
        e,
        e01,
        e10,
        mu1,
        mu2,
        nu1,
        nu2,
        completeness_residual,
        orthogonality_residual,
        off_diagonal_residual,
        unitary_residuals,
        pass,
    })
}

/// Verdict of the hyper-range complement identity
/// `H_inf(T1) = T2(H_inf(T1)) ⊕ ∩_m T1^m(ker T2*)` together with the
/// analyticity statement `∩_n T2^n (H_inf(T1) ⊖ H_00) = {0}`.
#[derive(Debug, Clone)]
pub struct ComplementLemmaReport {
    pub lemma_residual: f64,
    pub orthogonality_residual: f64,
    /// dimension of the stabilized intersection; 0 when analyticity holds
    pub analyticity_dim: usize,
    pub pass: bool,
}

pub fn complement_lemma_check(
    t1: &Operator,
    t2: &Operator,
    tol: &TolerancePolicy,
) -> Result<ComplementLemmaReport> {
    let prereq = check_left_inverse_commuting(&[t1.clone(), t2.clone()], tol)?;
    if !prereq.pass {
        return Err(WoldlabError::PrerequisiteFailed(format!(
            "left-inverse commuting check failed (lic {:.3e}, commutator {:.3e})",
            prereq.lic_residual, prereq.commutator_residual
        )));
    }
    let h1 = hyper_range(t1, tol)?.subspace;
    let e2 = kernel(&adjoint(t2), tol);
    let inner = joint_hyper(&[t1], &e2, tol)?;
    let shifted = image(t2, &h1, tol);
    let rhs = join(&shifted, &inner, tol);
    let lemma_residual = principal_angle_residual(&h1, &rhs);
    let orthogonality_residual = cross_gram_norm(&shifted, &inner);

    let full = Subspace::full(t1.domain.clone());
    let h00 = joint_hyper(&[t1, t2], &full, tol)?;
    let x = complement(&h00, &h1, tol)?;
    let analytic = joint_hyper(&[t2], &x, tol)?;
    let pass = lemma_residual < tol.residual_tol
        && orthogonality_residual < tol.residual_tol
        && analytic.is_zero();
    Ok(ComplementLemmaReport {
        lemma_residual,
        orthogonality_residual,
        analyticity_dim: analytic.dim(),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{gram_matrix, mz_operators, ModelSpec};
    use crate::space::{Budget, Space};
    use crate::C64;
    use nalgebra::DMatrix;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Truncated Hardy shift on C^{n+1}: `e_j -> e_{j+1}`, `e_n -> 0`,
    /// with per-degree headroom budgets so windows exclude the top.
    fn truncated_shift(n: usize) -> Operator {
        let dim = n + 1;
        let budgets = (0..dim).map(|j| Budget::Independent(vec![n - j])).collect();
        let s = Space::with_budgets(DMatrix::identity(dim, dim), 1, budgets, &tol()).unwrap();
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..n {
            m[(j + 1, j)] = c(1.0, 0.0);
        }
        Operator::endo(m, s).unwrap().with_direction(0)
    }

    fn rotation_unitary(dim: usize, angle: f64) -> Operator {
        let s = Space::euclidean(dim);
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                C64::from_polar(1.0, angle * (i as f64 + 1.0))
            } else {
                c(0.0, 0.0)
            }
        });
        Operator::endo(m, s).unwrap()
    }

    #[test]
    fn hyper_range_of_unitary_is_full() {
        let u = rotation_unitary(3, 0.7);
        let hr = hyper_range(&u, &tol()).unwrap();
        assert_eq!(hr.subspace.dim(), 3);
        assert_eq!(hr.iterations, 1);
    }

    #[test]
    fn hyper_range_of_truncated_shift_is_zero() {
        let t = truncated_shift(4);
        let hr = hyper_range(&t, &tol()).unwrap();
        assert!(hr.subspace.is_zero());
        assert!(hr.truncation_limited);
    }

    #[test]
    fn wandering_span_reaches_full_from_constants() {
        let t = truncated_shift(4);
        let mut e0 = DMatrix::zeros(5, 1);
        e0[(0, 0)] = c(1.0, 0.0);
        let s = Subspace::from_span(t.domain.clone(), &e0, &tol());
        let ws = wandering_span(&t, &s, &tol()).unwrap();
        assert_eq!(ws.subspace.dim(), 5);
    }

    #[test]
    fn wandering_span_of_full_is_full() {
        let t = truncated_shift(3);
        let full = Subspace::full(t.domain.clone());
        let ws = wandering_span(&t, &full, &tol()).unwrap();
        assert_eq!(ws.subspace.dim(), 4);
        assert_eq!(ws.iterations, 1);
    }

    #[test]
    fn wold_of_unitary() {
        let u = rotation_unitary(3, 1.1);
        let rep = wold_single(&u, &tol()).unwrap();
        assert_eq!(rep.h_inf.dim(), 3);
        assert!(rep.wandering.is_zero());
        assert!(rep.pass, "residuals {rep:?}");
    }

    #[test]
    fn wold_of_truncated_shift() {
        let t = truncated_shift(4);
        let rep = wold_single(&t, &tol()).unwrap();
        assert!(rep.h_inf.is_zero());
        assert_eq!(rep.wandering.dim(), 5);
        assert!(rep.pass, "residuals {rep:?}");
    }

    fn u_plus_shift(udim: usize, n: usize) -> Operator {
        let u = rotation_unitary(udim, 0.9);
        let t = truncated_shift(n);
        let s = Space::direct_sum(&[u.domain.clone(), t.domain.clone()], &tol()).unwrap();
        let dim = udim + n + 1;
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (udim, udim)).copy_from(&u.matrix);
        m.view_mut((udim, udim), (n + 1, n + 1)).copy_from(&t.matrix);
        Operator::endo(m, s).unwrap().with_direction(0)
    }

    #[test]
    fn wold_of_unitary_plus_shift_blocks() {
        let t = u_plus_shift(2, 3);
        let rep = wold_single(&t, &tol()).unwrap();
        assert_eq!(rep.h_inf.dim(), 2);
        assert_eq!(rep.wandering.dim(), 4);
        assert!(rep.pass, "residuals {rep:?}");
        // pieces land in their blocks
        for col in 0..rep.h_inf.dim() {
            for row in 2..6 {
                assert!(rep.h_inf.frame[(row, col)].norm() < 1e-10);
            }
        }
    }

    #[test]
    fn tuple_on_bidisc_shifts_is_pure_shift_shift() {
        let spec = ModelSpec::new(OpValuedMeasure::zero(1, 3), OpValuedMeasure::zero(1, 3), 3).unwrap();
        let s = gram_matrix(&spec, &tol()).unwrap();
        let (t1, t2) = mz_operators(&s).unwrap();
        let rep = wold_tuple(&[t1, t2], false, &tol()).unwrap();
        assert!(rep.pass, "report {rep:?}");
        for p in &rep.pieces {
            let expect = if p.alpha == [1, 1] { s.dim() } else { 0 };
            assert_eq!(p.subspace.dim(), expect, "piece {:?}", p.alpha);
        }
        assert!(rep.completeness_residual < 1e-10);
    }

    #[test]
    fn tuple_on_commuting_unitaries_is_pure_unitary() {
        let u = rotation_unitary(3, 0.4);
        let v = Operator::endo(
            DMatrix::from_fn(3, 3, |i, j| if i == j { C64::from_polar(1.0, 0.2) } else { c(0.0, 0.0) }),
            u.domain.clone(),
        )
        .unwrap();
        let rep = wold_tuple(&[u, v], false, &tol()).unwrap();
        assert!(rep.pass);
        for p in &rep.pieces {
            let expect = if p.alpha == [0, 0] { 3 } else { 0 };
            assert_eq!(p.subspace.dim(), expect, "piece {:?}", p.alpha);
        }
    }

    fn tensor_unitary_shift(udim: usize, n: usize) -> (Operator, Operator) {
        // T1 = U ⊗ I (unitary), T2 = I ⊗ S (truncated shift), on
        // C^udim ⊗ C^{n+1} with direction-1 budgets from the shift part
        let dim = udim * (n + 1);
        let budgets = (0..dim)
            .map(|k| Budget::Independent(vec![usize::MAX, n - (k % (n + 1))]))
            .collect();
        let s = Space::with_budgets(DMatrix::identity(dim, dim), 2, budgets, &tol()).unwrap();
        let mut m1 = DMatrix::zeros(dim, dim);
        let mut m2 = DMatrix::zeros(dim, dim);
        for a in 0..udim {
            let phase = C64::from_polar(1.0, 0.6 * (a as f64 + 1.0));
            for j in 0..=n {
                m1[(a * (n + 1) + j, a * (n + 1) + j)] = phase;
                if j < n {
                    m2[(a * (n + 1) + j + 1, a * (n + 1) + j)] = c(1.0, 0.0);
                }
            }
        }
        let t1 = Operator::endo(m1, s.clone()).unwrap();
        let t2 = Operator::endo(m2, s).unwrap().with_direction(1);
        (t1, t2)
    }

    #[test]
    fn tuple_on_unitary_tensor_shift() {
        let (t1, t2) = tensor_unitary_shift(2, 3);
        let rep = wold_tuple(&[t1, t2], false, &tol()).unwrap();
        assert!(rep.pass, "report {rep:?}");
        for p in &rep.pieces {
            let expect = if p.alpha == [0, 1] { 8 } else { 0 };
            assert_eq!(p.subspace.dim(), expect, "piece {:?}", p.alpha);
        }
    }

    #[test]
    fn structural_on_bidisc_shifts() {
        let spec = ModelSpec::new(OpValuedMeasure::zero(1, 4), OpValuedMeasure::zero(1, 4), 4).unwrap();
        let s = gram_matrix(&spec, &tol()).unwrap();
        let (t1, t2) = mz_operators(&s).unwrap();
        let rep = structural_decomposition_pair(&t1, &t2, 2, &tol()).unwrap();
        assert!(rep.h00.is_zero());
        assert!(rep.h01.is_zero());
        assert!(rep.h10.is_zero());
        assert_eq!(rep.h11.dim(), s.dim());
        assert!(rep.pass, "report residuals {:?}", rep.unitary_residuals);
        let nu1 = rep.nu1.unwrap();
        for k in 0..=2i64 {
            assert!(nu1.fourier(k).norm() < 1e-10);
        }
    }

    #[test]
    fn structural_on_dirichlet_pair_recovers_lebesgue() {
        let lw = OpValuedMeasure::lebesgue_scalar(1.0, 4, &tol()).unwrap();
        let spec = ModelSpec::new(lw.clone(), lw, 4).unwrap();
        let s = gram_matrix(&spec, &tol()).unwrap();
        let (t1, t2) = mz_operators(&s).unwrap();
        let rep = structural_decomposition_pair(&t1, &t2, 3, &tol()).unwrap();
        assert_eq!(rep.h11.dim(), s.dim());
        let nu1 = rep.nu1.unwrap();
        assert!((nu1.fourier(0)[(0, 0)] - c(1.0, 0.0)).norm() < 1e-10);
        for k in 1..=3 {
            assert!(nu1.fourier(k).norm() < 1e-10);
        }
    }

    #[test]
    fn structural_on_tensor_block() {
        // T1 unitary everywhere, T2 a shift: only the H_01 block lives
        let (t1, t2) = tensor_unitary_shift(2, 3);
        let rep = structural_decomposition_pair(&t1, &t2, 2, &tol()).unwrap();
        assert!(rep.h00.is_zero());
        assert_eq!(rep.h01.dim(), 8);
        assert!(rep.h10.is_zero());
        assert!(rep.h11.is_zero());
        assert_eq!(rep.e01.dim(), 2);
        assert!(rep.pass, "unitary residuals {:?}", rep.unitary_residuals);
        // isometric shift: mu1 = 0
        let mu1 = rep.mu1.unwrap();
        for k in 0..=2i64 {
            assert!(mu1.fourier(k).norm() < 1e-10);
        }
    }

    #[test]
    fn complement_lemma_on_unitary_pair() {
        let u = rotation_unitary(3, 0.4);
        let v = rotation_unitary(3, 1.3);
        let rep = complement_lemma_check(&u, &v, &tol()).unwrap();
        assert!(rep.pass, "report {rep:?}");
        assert!(rep.lemma_residual < 1e-12);
        assert_eq!(rep.analyticity_dim, 0);
    }

    #[test]
    fn complement_lemma_on_shift_pair_is_trivially_zero() {
        let spec = ModelSpec::new(OpValuedMeasure::zero(1, 3), OpValuedMeasure::zero(1, 3), 3).unwrap();
        let s = gram_matrix(&spec, &tol()).unwrap();
        let (t1, t2) = mz_operators(&s).unwrap();
        let rep = complement_lemma_check(&t1, &t2, &tol()).unwrap();
        assert!(rep.pass, "report {rep:?}");
    }

    #[test]
    fn complement_lemma_on_tensor_block() {
        // H_inf(T1) = full; identity reduces to full = T2(full) ⊕ ker T2*
        let (t1, t2) = tensor_unitary_shift(2, 3);
        let rep = complement_lemma_check(&t1, &t2, &tol()).unwrap();
        assert!(rep.pass, "report {rep:?}");
        assert!(rep.lemma_residual < 1e-8);
    }

    #[test]
    fn tuple_rejects_non_commuting_without_force() {
        let s = Space::euclidean(2);
        let a = Operator::endo(
            DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
            s.clone(),
        )
        .unwrap();
        let b = Operator::endo(
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
            s,
        )
        .unwrap();
        let err = wold_tuple(&[a.clone(), b.clone()], false, &tol());
        assert!(matches!(err, Err(WoldlabError::PrerequisiteFailed(_))));
        let forced = wold_tuple(&[a, b], true, &tol()).unwrap();
        assert!(!forced.pass);
    }
}
