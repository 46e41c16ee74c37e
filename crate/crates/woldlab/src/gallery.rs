//! Registry of constructed examples with known answers: unitaries,
//! truncated shifts, model pairs on graded spaces, tensor blocks and
//! direct sums realizing every piece of the joint decomposition, plus
//! two deliberate counterexamples (a weighted-Bergman pair violating
//! the toral identity and a non-left-inverse-commuting perturbation).

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::dirichlet::{gram_matrix, mz_operators, ModelSpec};
use crate::error::{Result, WoldlabError};
use crate::measure::OpValuedMeasure;
use crate::operator::Operator;
use crate::space::{Budget, GradedLayout, Space};
use crate::tol::TolerancePolicy;
use crate::C64;

/// Machine-checkable expectations attached to a gallery example; only
/// the fields meaningful for the example are set.
#[derive(Debug, Clone, Default)]
pub struct Expectation {
    pub h_inf_dim: Option<usize>,
    pub wandering_dim: Option<usize>,
    /// joint-piece dims keyed by the alpha bitstring (`alpha[i]` is
    /// character `i`; `0` = unitary direction)
    pub piece_dims: Option<BTreeMap<String, usize>>,
    pub two_isometry_pass: Option<bool>,
    pub toral_pass: Option<bool>,
    pub lic_pass: Option<bool>,
    pub model_pass: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct GalleryExample {
    pub name: String,
    pub cap: usize,
    pub ops: Vec<Operator>,
    pub expect: Expectation,
}

impl GalleryExample {
    pub fn space(&self) -> &Arc<Space> {
        &self.ops[0].domain
    }
}

/// Registered example names, in registry order.
pub fn gallery_names() -> &'static [&'static str] {
    &[
        "unitary",
        "scalar-2i",
        "hardy-shift",
        "dirichlet-shift",
        "u-plus-shift",
        "unitary-pair",
        "hardy-bidisc",
        "dirichlet-pair",
        "bergman-pair",
        "perturbed-pair",
        "four-block",
        "eight-block",
        "structural-sum",
    ]
}

/// One tensor factor of a block: its matrix, diagonal Gram, and the
/// per-basis shift headroom (`usize::MAX` for unitary factors).
struct Factor {
    matrix: DMatrix<C64>,
    gram: DMatrix<C64>,
    head: Vec<usize>,
}

fn unitary_factor(dim: usize, angle: f64) -> Factor {
    let matrix = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::from_polar(1.0, angle * (i as f64 + 1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Factor { matrix, gram: DMatrix::identity(dim, dim), head: vec![usize::MAX; dim] }
}

fn shift_factor(cap: usize, gram_diag: impl Fn(usize) -> f64) -> Factor {
    let dim = cap + 1;
    let mut matrix = DMatrix::zeros(dim, dim);
    for j in 0..cap {
        matrix[(j + 1, j)] = C64::new(1.0, 0.0);
    }
    let gram = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j { C64::new(gram_diag(i), 0.0) } else { C64::new(0.0, 0.0) }
    });
    Factor { matrix, gram, head: (0..dim).map(|n| cap - n).collect() }
}

fn dirichlet_shift_factor(cap: usize) -> Factor {
    shift_factor(cap, |n| 1.0 + n as f64)
}

fn hardy_shift_factor(cap: usize) -> Factor {
    shift_factor(cap, |_| 1.0)
}

/// One direct summand: its space and one matrix per operator slot.
struct Block {
    space: Arc<Space>,
    mats: Vec<DMatrix<C64>>,
}

/// Tensor product of `n` factors, operator slot `d` acting as the
/// `d`-th factor; budgets record independent per-direction headroom.
fn tensor_block(factors: &[Factor], tol: &TolerancePolicy) -> Result<Block> {
    let n = factors.len();
    let mut gram = DMatrix::identity(1, 1);
    for f in factors {
        gram = gram.kronecker(&f.gram);
    }
    let dim = gram.nrows();
    let mut budgets = Vec::with_capacity(dim);
    for flat in 0..dim {
        let mut rem = flat;
        let mut idx = vec![0usize; n];
        for d in (0..n).rev() {
            idx[d] = rem % factors[d].matrix.nrows();
            rem /= factors[d].matrix.nrows();
        }
        budgets.push(Budget::Independent(
            (0..n).map(|d| factors[d].head[idx[d]]).collect(),
        ));
    }
    let space = Space::with_budgets(gram, n, budgets, tol)?;
    let mats = (0..n)
        .map(|d| {
            let mut m = DMatrix::identity(1, 1);
            for (k, f) in factors.iter().enumerate() {
                let part = if k == d {
                    f.matrix.clone()
                } else {
                    DMatrix::identity(f.matrix.nrows(), f.matrix.nrows())
                };
                m = m.kronecker(&part);
            }
            m
        })
        .collect();
    Ok(Block { space, mats })
}

/// Graded model-space block for a measure pair, matrices from the
/// coordinate multiplication operators.
fn model_block(mu1: OpValuedMeasure, mu2: OpValuedMeasure, cap: usize, tol: &TolerancePolicy) -> Result<Block> {
    let spec = ModelSpec::new(mu1, mu2, cap)?;
    let space = gram_matrix(&spec, tol)?;
    let (t1, t2) = mz_operators(&space)?;
    Ok(Block { space, mats: vec![t1.matrix, t2.matrix] })
}

/// Direct sum of blocks into one operator tuple; operator `d` gets
/// shift direction `d`.
fn assemble(blocks: Vec<Block>, tol: &TolerancePolicy) -> Result<Vec<Operator>> {
    let nops = blocks[0].mats.len();
    let spaces: Vec<Arc<Space>> = blocks.iter().map(|b| b.space.clone()).collect();
    let space = Space::direct_sum(&spaces, tol)?;
    let dim = space.dim();
    let mut ops = Vec::with_capacity(nops);
    for d in 0..nops {
        let mut m = DMatrix::zeros(dim, dim);
        let mut off = 0;
        for b in &blocks {
            let bd = b.space.dim();
            m.view_mut((off, off), (bd, bd)).copy_from(&b.mats[d]);
            off += bd;
        }
        ops.push(Operator::endo(m, space.clone())?.with_direction(d));
    }
    Ok(ops)
}

fn pieces(entries: &[(&str, usize)]) -> BTreeMap<String, usize> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Build a registered example; `cap` overrides the per-example default
/// truncation degree where meaningful.
pub fn make_example(name: &str, cap: Option<usize>, tol: &TolerancePolicy) -> Result<GalleryExample> {
    let lebesgue = |window: usize| OpValuedMeasure::lebesgue_scalar(1.0, window.max(1), tol);
    match name {
        "unitary" => {
            let f = unitary_factor(4, 0.7);
            let s = Space::euclidean(4);
            let op = Operator::endo(f.matrix, s)?;
            Ok(GalleryExample {
                name: name.into(),
                cap: 0,
                ops: vec![op],
                expect: Expectation {
                    h_inf_dim: Some(4),
                    wandering_dim: Some(0),
                    two_isometry_pass: Some(true),
                    ..Default::default()
                },
            })
        }
        "scalar-2i" => {
            let s = Space::euclidean(2);
            let op = Operator::endo(DMatrix::identity(2, 2) * C64::new(2.0, 0.0), s)?;
            Ok(GalleryExample {
                name: name.into(),
                cap: 0,
                ops: vec![op],
                expect: Expectation { two_isometry_pass: Some(false), ..Default::default() },
            })
        }
        "hardy-shift" | "dirichlet-shift" => {
            let cap = cap.unwrap_or(if name == "hardy-shift" { 5 } else { 4 });
            if cap == 0 {
                return Err(WoldlabError::CapTooSmall);
            }
            let f = if name == "hardy-shift" { hardy_shift_factor(cap) } else { dirichlet_shift_factor(cap) };
            let budgets = f.head.iter().map(|&h| Budget::Independent(vec![h])).collect();
            let s = Space::with_budgets(f.gram, 1, budgets, tol)?;
            let op = Operator::endo(f.matrix, s)?.with_direction(0);
            Ok(GalleryExample {
                name: name.into(),
                cap,
                ops: vec![op],
                expect: Expectation {
                    h_inf_dim: Some(0),
                    wandering_dim: Some(cap + 1),
                    two_isometry_pass: Some(true),
                    ..Default::default()
                },
            })
        }
        "u-plus-shift" => {
            let cap = cap.unwrap_or(3);
            if cap == 0 {
                return Err(WoldlabError::CapTooSmall);
            }
            let u = unitary_factor(2, 0.9);
            let f = hardy_shift_factor(cap);
            let blocks = vec![
                Block { space: Space::with_budgets(u.gram, 1, u.head.iter().map(|&h| Budget::Independent(vec![h])).collect(), tol)?, mats: vec![u.matrix] },
                Block { space: Space::with_budgets(f.gram, 1, f.head.iter().map(|&h| Budget::Independent(vec![h])).collect(), tol)?, mats: vec![f.matrix] },
            ];
            let ops = assemble(blocks, tol)?;
            Ok(GalleryExample {
                name: name.into(),
                cap,
                ops,
                expect: Expectation {
                    h_inf_dim: Some(2),
                    wandering_dim: Some(cap + 1),
                    two_isometry_pass: Some(true),
                    ..Default::default()
                },
            })
        }
        "unitary-pair" => {
            let b = tensor_block(&[unitary_factor(2, 0.4), unitary_factor(2, 1.1)], tol)?;
            let ops = assemble(vec![b], tol)?;
            Ok(GalleryExample {
                name: name.into(),
                cap: 0,
                ops,
                expect: Expectation {
                    piece_dims: Some(pieces(&[("00", 4), ("01", 0), ("10", 0), ("11", 0)])),
                    toral_pass: Some(true),
                    lic_pass: Some(true),
                    ..Default::default()
                },
            })
        }
        "hardy-bidisc" | "dirichlet-pair" => {
            let cap = cap.unwrap_or(4);
            if cap == 0 {
                return Err(WoldlabError::CapTooSmall);
            }
            let (mu1, mu2) = if name == "hardy-bidisc" {
                (OpValuedMeasure::zero(1, cap), OpValuedMeasure::zero(1, cap))
            } else {
                (lebesgue(cap)?, lebesgue(cap)?)
            };
            let spec = ModelSpec::new(mu1, mu2, cap)?;
            let space = gram_matrix(&spec, tol)?;
            let (t1, t2) = mz_operators(&space)?;
            let dim = space.dim();
            let ops = vec![t1, t2];
            Ok(GalleryExample {
                name: name.into(),
                cap,
                ops,
                expect: Expectation {
                    piece_dims: Some(pieces(&[("00", 0), ("01", 0), ("10", 0), ("11", dim)])),
                    toral_pass: Some(true),
                    lic_pass: Some(true),
                    model_pass: Some(true),
                    ..Default::default()
                },
            })
        }
        "bergman-pair" => {
            // weighted Bergman-like Gram 1/((m+1)(n+1)): not a toral
            // 2-isometry — the negative control for the toral check
            let cap = cap.unwrap_or(4);
            if cap == 0 {
                return Err(WoldlabError::CapTooSmall);
            }
            let layout = GradedLayout::new(cap, 1);
            let gram = DMatrix::from_fn(layout.dim(), layout.dim(), |i, j| {
                if i == j {
                    let g = layout.indices[i];
                    C64::new(1.0 / (((g.m + 1) * (g.n + 1)) as f64), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let space = Space::graded(layout, gram, tol)?;
            let (t1, t2) = mz_operators(&space)?;
            Ok(GalleryExample {
                name: name.into(),
                cap,
                ops: vec![t1, t2],
                expect: Expectation {
                    toral_pass: Some(false),
                    two_isometry_pass: Some(false),
                    ..Default::default()
                },
            })
        }
        "perturbed-pair" => {
            // Hardy bidisc with T2 1 -> z2 + 0.1 z1: commutation with
            // T1's left inverse fails and mixed Gram entries appear
            let cap = cap.unwrap_or(4);
            if cap == 0 {
                return Err(WoldlabError::CapTooSmall);
            }
            let spec = ModelSpec::new(OpValuedMeasure::zero(1, cap), OpValuedMeasure::zero(1, cap), cap)?;
            let space = gram_matrix(&spec, tol)?;
            let (t1, base_t2) = mz_operators(&space)?;
            let mut m2 = base_t2.matrix.clone();
            let layout = t1.domain.graded_layout().expect("model space is graded");
            m2[(layout.slot(1, 0, 0), layout.slot(0, 0, 0))] = C64::new(0.1, 0.0);
            let t2 = Operator::endo(m2, t1.domain.clone())?.with_direction(1);
            Ok(GalleryExample {
                name: name.into(),
                cap,
                ops: vec![t1, t2],
                expect: Expectation {
                    lic_pass: Some(false),
                    model_pass: Some(false),
                    ..Default::default()
                },
            })
        }
        "four-block" => {
            let cap = cap.unwrap_or(3);
            if cap == 0 {
                return Err(WoldlabError::CapTooSmall);
            }
            let b00 = tensor_block(&[unitary_factor(2, 0.4), unitary_factor(2, 1.1)], tol)?;
            let b01 = tensor_block(&[unitary_factor(2, 0.8), dirichlet_shift_factor(cap)], tol)?;
            let b10 = tensor_block(&[dirichlet_shift_factor(cap), unitary_factor(2, 0.3)], tol)?;
            let b11 = model_block(lebesgue(cap)?, lebesgue(cap)?, cap, tol)?;
            let d11 = b11.space.dim();
            let ops = assemble(vec![b00, b01, b10, b11], tol)?;
            Ok(GalleryExample {
                name: name.into(),
                cap,
                ops,
                expect: Expectation {
                    piece_dims: Some(pieces(&[
                        ("00", 4),
                        ("01", 2 * (cap + 1)),
                        ("10", 2 * (cap + 1)),
                        ("11", d11),
                    ])),
                    toral_pass: Some(true),
                    lic_pass: Some(true),
                    ..Default::default()
                },
            })
        }
        "eight-block" => {
            // triple realizing all 8 pieces: every tensor of unitary /
            // Dirichlet-shift factors across the three directions
            let cap = cap.unwrap_or(2);
            if cap == 0 {
                return Err(WoldlabError::CapTooSmall);
            }
            let mut blocks = Vec::new();
            let mut dims = Vec::new();
            for code in 0..8usize {
                let factors: Vec<Factor> = (0..3)
                    .map(|d| {
                        if (code >> d) & 1 == 1 {
                            dirichlet_shift_factor(cap)
                        } else {
                            unitary_factor(1, 0.5 + 0.3 * d as f64 + 0.05 * code as f64)
                        }
                    })
                    .collect();
                let b = tensor_block(&factors, tol)?;
                let alpha: String = (0..3).map(|d| if (code >> d) & 1 == 1 { '1' } else { '0' }).collect();
                dims.push((alpha, b.space.dim()));
                blocks.push(b);
            }
            let ops = assemble(blocks, tol)?;
            Ok(GalleryExample {
                name: name.into(),
                cap,
                ops,
                expect: Expectation {
                    piece_dims: Some(dims.iter().map(|(k, v)| (k.clone(), *v)).collect()),
                    lic_pass: Some(true),
                    ..Default::default()
                },
            })
        }
        "structural-sum" => {
            let cap = cap.unwrap_or(3);
            if cap == 0 {
                return Err(WoldlabError::CapTooSmall);
            }
            let b00 = tensor_block(&[unitary_factor(2, 0.4), unitary_factor(2, 1.1)], tol)?;
            let b01 = tensor_block(&[unitary_factor(2, 0.8), dirichlet_shift_factor(cap)], tol)?;
            let b11 = model_block(lebesgue(cap)?, lebesgue(cap)?, cap, tol)?;
            let d11 = b11.space.dim();
            let ops = assemble(vec![b00, b01, b11], tol)?;
            Ok(GalleryExample {
                name: name.into(),
                cap,
                ops,
                expect: Expectation {
                    piece_dims: Some(pieces(&[
                        ("00", 4),
                        ("01", 2 * (cap + 1)),
                        ("10", 0),
                        ("11", d11),
                    ])),
                    toral_pass: Some(true),
                    lic_pass: Some(true),
                    ..Default::default()
                },
            })
        }
        other => Err(WoldlabError::UnknownExample(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{check_left_inverse_commuting, check_toral_two_isometry, check_two_isometry};
    use crate::wold::{wold_single, wold_tuple};

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(
            make_example("no-such-example", None, &tol()),
            Err(WoldlabError::UnknownExample(_))
        ));
    }

    #[test]
    fn single_examples_match_wold_expectations() {
        for name in ["unitary", "hardy-shift", "dirichlet-shift", "u-plus-shift"] {
            let ex = make_example(name, None, &tol()).unwrap();
            let rep = wold_single(&ex.ops[0], &tol()).unwrap();
            assert_eq!(Some(rep.h_inf.dim()), ex.expect.h_inf_dim, "{name}");
            assert_eq!(Some(rep.wandering.dim()), ex.expect.wandering_dim, "{name}");
            assert!(rep.pass, "{name}: {rep:?}");
        }
    }

    #[test]
    fn scalar_two_i_fails_two_isometry() {
        let ex = make_example("scalar-2i", None, &tol()).unwrap();
        let r = check_two_isometry(&ex.ops[0], &tol()).unwrap();
        assert!((r - 9.0).abs() < 1e-12);
    }

    #[test]
    fn pair_examples_match_toral_and_lic_expectations() {
        for name in ["unitary-pair", "hardy-bidisc", "dirichlet-pair", "bergman-pair", "perturbed-pair", "four-block", "structural-sum"] {
            let ex = make_example(name, None, &tol()).unwrap();
            if let Some(expect) = ex.expect.toral_pass {
                let rep = check_toral_two_isometry(&ex.ops[0], &ex.ops[1], &tol()).unwrap();
                assert_eq!(rep.pass, expect, "{name} toral: {:?}", rep.residuals);
            }
            if let Some(expect) = ex.expect.lic_pass {
                let rep = check_left_inverse_commuting(&ex.ops, &tol()).unwrap();
                assert_eq!(rep.pass, expect, "{name} lic: {} / {}", rep.lic_residual, rep.commutator_residual);
            }
        }
    }

    #[test]
    fn four_block_piece_dims() {
        let ex = make_example("four-block", None, &tol()).unwrap();
        let rep = wold_tuple(&ex.ops, false, &tol()).unwrap();
        assert!(rep.pass, "completeness {} orthogonality {}", rep.completeness_residual, rep.orthogonality_residual);
        let expect = ex.expect.piece_dims.unwrap();
        for p in &rep.pieces {
            let key: String = p.alpha.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
            assert_eq!(p.subspace.dim(), expect[&key], "piece {key}");
        }
    }

    #[test]
    fn eight_block_piece_dims() {
        let ex = make_example("eight-block", None, &tol()).unwrap();
        assert_eq!(ex.space().dim(), 64);
        let rep = wold_tuple(&ex.ops, false, &tol()).unwrap();
        assert!(rep.pass);
        let expect = ex.expect.piece_dims.unwrap();
        for p in &rep.pieces {
            let key: String = p.alpha.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
            assert_eq!(p.subspace.dim(), expect[&key], "piece {key}");
        }
    }
}
