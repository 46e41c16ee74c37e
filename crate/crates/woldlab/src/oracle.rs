//! Independent brute-force oracles. Deliberately duplicated machinery:
//! everything here runs on plain `Vec<Vec<_>>` Gaussian elimination and
//! explicit double sums, sharing no code with the subspace lattice or
//! the model-space Gram assembly it cross-checks.

use crate::error::{Result, WoldlabError};
use crate::operator::Operator;
use crate::C64;

const PIVOT_TOL: f64 = 1e-10;

type Mat = Vec<Vec<C64>>;

fn to_rows(m: &nalgebra::DMatrix<C64>) -> Mat {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![C64::new(0.0, 0.0); m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            if ail.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

fn conj_transpose(a: &Mat) -> Mat {
    let n = a.len();
    let m = if n == 0 { 0 } else { a[0].len() };
    (0..m).map(|j| (0..n).map(|i| a[i][j].conj()).collect()).collect()
}

/// Row-echelon rank by Gaussian elimination with partial pivoting.
fn rank(mut a: Mat) -> usize {
    let n = a.len();
    let m = if n == 0 { 0 } else { a[0].len() };
    let scale = a
        .iter()
        .flatten()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut r = 0;
    for col in 0..m {
        if r >= n {
            break;
        }
        // find the largest pivot in this column below row r
        let mut best = r;
        for row in (r + 1)..n {
            if a[row][col].norm() > a[best][col].norm() {
                best = row;
            }
        }
        if a[best][col].norm() <= PIVOT_TOL * scale {
            continue;
        }
        a.swap(r, best);
        let piv = a[r][col];
        for row in 0..n {
            if row == r {
                continue;
            }
            let f = a[row][col] / piv;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in col..m {
                let sub = f * a[r][c];
                a[row][c] -= sub;
            }
        }
        r += 1;
        if r == n {
            break;
        }
    }
    r
}

/// Null-space basis columns of `a` by reduced row echelon form.
fn null_space(mut a: Mat) -> Mat {
    let n = a.len();
    let m = if n == 0 { 0 } else { a[0].len() };
    let scale = a
        .iter()
        .flatten()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for col in 0..m {
        if r >= n {
            break;
        }
        let mut best = r;
        for row in (r + 1)..n {
            if a[row][col].norm() > a[best][col].norm() {
                best = row;
            }
        }
        if a[best][col].norm() <= PIVOT_TOL * scale {
            continue;
        }
        a.swap(r, best);
        let piv = a[r][col];
        for c in col..m {
            a[r][c] /= piv;
        }
        for row in 0..n {
            if row == r {
                continue;
            }
            let f = a[row][col];
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in col..m {
                let sub = f * a[r][c];
                a[row][c] -= sub;
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    let free_cols: Vec<usize> = (0..m).filter(|c| !pivot_cols.contains(c)).collect();
    // basis vector per free column: x_free = 1, pivots back-substituted
    let mut basis = vec![vec![C64::new(0.0, 0.0); free_cols.len()]; m];
    for (k, &fc) in free_cols.iter().enumerate() {
        basis[fc][k] = C64::new(1.0, 0.0);
        for (row, &pc) in pivot_cols.iter().enumerate() {
            basis[pc][k] = -a[row][fc];
        }
    }
    basis
}

fn hstack(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b.iter())
        .map(|(ra, rb)| ra.iter().chain(rb.iter()).cloned().collect())
        .collect()
}

fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

/// Dimensions `(h_inf, wandering)` of the Wold-type decomposition of a
/// single operator, re-derived from scratch: the hyper-range by
/// repeated multiplication and rank, the wandering span by closing
/// `ker T* = null(A^H G)` under `A`.
pub fn brute_force_wold_oracle(t: &Operator) -> Result<(usize, usize)> {
    let n = t.domain.dim();
    if n > 64 {
        return Err(WoldlabError::InvalidInput("oracle is desk-scale only (dim <= 64)".into()));
    }
    let a = to_rows(&t.matrix);
    let g = to_rows(t.domain.gram());

    // hyper-range: span of columns of A^k until the rank stabilizes
    let mut span = identity(n);
    let mut h_dim = n;
    for _ in 0..=n {
        span = mat_mul(&a, &span);
        let r = rank(span.clone());
        if r == h_dim {
            break;
        }
        h_dim = r;
    }

    // wandering span of ker T*: x with <T y, x> = 0 for all y, i.e.
    // A^H G x = 0
    let e = null_space(mat_mul(&conj_transpose(&a), &g));
    let mut w = e;
    let mut w_dim = rank(w.clone());
    for _ in 0..=n {
        w = hstack(&w, &mat_mul(&a, &w));
        let r = rank(w.clone());
        if r == w_dim {
            break;
        }
        w_dim = r;
    }
    Ok((h_dim, w_dim))
}

/// Scalar measures with closed-form Dirichlet energies, for the
/// one-variable norm oracle.
#[derive(Debug, Clone, Copy)]
pub enum OracleMeasure {
    /// normalized Lebesgue measure with total mass `scale`
    Lebesgue(f64),
    /// single point mass of the given weight at angle `theta`
    Atom { theta: f64, weight: f64 },
}

/// Squared one-variable norm `||f||^2 = sum |a_m|^2 + D_mu(f)` of the
/// polynomial `f = sum a_m z^m`, computed by direct summation with no
/// Gram machinery: `D(f) = sum_m m w |a_m|^2` for Lebesgue, and the
/// explicit double sum `w sum (m ∧ p) e^{-i(p-m)θ} a_m conj(a_p)` for a
/// point mass.
pub fn dirichlet_integral_oracle(coeffs: &[C64], mu: &OracleMeasure) -> f64 {
    let hardy: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
    let energy = match *mu {
        OracleMeasure::Lebesgue(w) => coeffs
            .iter()
            .enumerate()
            .map(|(m, a)| m as f64 * w * a.norm_sqr())
            .sum(),
        OracleMeasure::Atom { theta, weight } => {
            let mut acc = C64::new(0.0, 0.0);
            for (m, am) in coeffs.iter().enumerate() {
                for (p, ap) in coeffs.iter().enumerate() {
                    let wedge = m.min(p) as f64;
                    if wedge == 0.0 {
                        continue;
                    }
                    let phase = C64::from_polar(1.0, -((p as f64) - (m as f64)) * theta);
                    acc += phase * am * ap.conj() * wedge;
                }
            }
            weight * acc.re
        }
    };
    hardy + energy
}
