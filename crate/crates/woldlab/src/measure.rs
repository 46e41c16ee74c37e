//! Positive operator-valued measures on the circle, represented by a
//! finite window of Fourier coefficients `mu_hat(k) = ∫ e^{-ikt} dmu`.
//!
//! Positivity at a finite window is certified by the block Toeplitz
//! moment matrix `[mu_hat(j - k)]_{0 <= j,k <= K}` being PSD.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, WoldlabError};
use crate::tol::TolerancePolicy;
use crate::C64;

#[derive(Debug, Clone)]
pub struct OpValuedMeasure {
    coeff_dim: usize,
    window: usize,
    /// `fourier[k]` is `mu_hat(k)` for `k = 0..=window`; negative
    /// indices follow from `mu_hat(-k) = mu_hat(k)^H`.
    fourier: Vec<DMatrix<C64>>,
}

impl OpValuedMeasure {
    /// Raw constructor; validates Hermitian symmetry of `mu_hat(0)` and
    /// the PSD certificate.
    pub fn from_coefficients(
        coeff_dim: usize,
        fourier: Vec<DMatrix<C64>>,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        if fourier.is_empty() || fourier.iter().any(|m| m.nrows() != coeff_dim || m.ncols() != coeff_dim) {
            return Err(WoldlabError::InvalidInput("fourier coefficients must be coeff_dim square".into()));
        }
        let window = fourier.len() - 1;
        let m = Self { coeff_dim, window, fourier };
        let herm = (&m.fourier[0] - m.fourier[0].adjoint()).norm();
        if herm > tol.residual_tol * (1.0 + m.fourier[0].norm()) {
            return Err(WoldlabError::InvalidInput("mu_hat(0) must be Hermitian".into()));
        }
        let (lmin, lmax) = m.psd_certificate();
        if lmin < -tol.rank_tol * lmax.max(1.0) {
            return Err(WoldlabError::NotPSD(lmin));
        }
        Ok(m)
    }

    /// Same as `from_coefficients` but without the PSD gate; used when
    /// a possibly invalid measure is itself the object under test.
    pub fn from_coefficients_unchecked(coeff_dim: usize, fourier: Vec<DMatrix<C64>>) -> Self {
        let window = fourier.len() - 1;
        Self { coeff_dim, window, fourier }
    }

    /// The zero measure.
    pub fn zero(coeff_dim: usize, window: usize) -> Self {
        Self {
            coeff_dim,
            window,
            fourier: vec![DMatrix::zeros(coeff_dim, coeff_dim); window + 1],
        }
    }

    /// Normalized Lebesgue measure scaled by a PSD weight: all mass in
    /// `mu_hat(0) = W`, every other coefficient zero.
    pub fn lebesgue(weight: DMatrix<C64>, window: usize, tol: &TolerancePolicy) -> Result<Self> {
        let d = weight.nrows();
        let mut fourier = vec![DMatrix::zeros(d, d); window + 1];
        fourier[0] = weight;
        Self::from_coefficients(d, fourier, tol)
    }

    /// Scalar Lebesgue with total mass `scale`.
    pub fn lebesgue_scalar(scale: f64, window: usize, tol: &TolerancePolicy) -> Result<Self> {
        Self::lebesgue(DMatrix::from_element(1, 1, C64::new(scale, 0.0)), window, tol)
    }

    /// Finite sum of point masses: `mu_hat(k) = sum_j e^{-ik theta_j} W_j`.
    pub fn atoms(atoms: &[(f64, DMatrix<C64>)], window: usize, tol: &TolerancePolicy) -> Result<Self> {
        if atoms.is_empty() {
            return Err(WoldlabError::InvalidInput("need at least one atom".into()));
        }
        let d = atoms[0].1.nrows();
        let mut fourier = vec![DMatrix::zeros(d, d); window + 1];
        for k in 0..=window {
            for (theta, w) in atoms {
                let phase = C64::from_polar(1.0, -(k as f64) * theta);
                fourier[k] += w * phase;
            }
        }
        Self::from_coefficients(d, fourier, tol)
    }

    pub fn atom_scalar(theta: f64, weight: f64, window: usize, tol: &TolerancePolicy) -> Result<Self> {
        Self::atoms(&[(theta, DMatrix::from_element(1, 1, C64::new(weight, 0.0)))], window, tol)
    }

    /// Trigonometric-density measure given directly by its coefficient
    /// list; validated through the PSD certificate.
    pub fn trig_density(coeff_dim: usize, fourier: Vec<DMatrix<C64>>, tol: &TolerancePolicy) -> Result<Self> {
        Self::from_coefficients(coeff_dim, fourier, tol)
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// `mu_hat(k)` for any `|k| <= window`.
    pub fn fourier(&self, k: i64) -> DMatrix<C64> {
        let a = k.unsigned_abs() as usize;
        assert!(a <= self.window, "fourier index {k} outside window {}", self.window);
        if k >= 0 {
            self.fourier[a].clone()
        } else {
            self.fourier[a].adjoint()
        }
    }

    /// Extend the window by zero padding (the padded coefficients are
    /// never consumed by Gram assembly at matching caps).
    pub fn padded(&self, window: usize) -> Self {
        let mut fourier = self.fourier.clone();
        while fourier.len() < window + 1 {
            fourier.push(DMatrix::zeros(self.coeff_dim, self.coeff_dim));
        }
        Self { coeff_dim: self.coeff_dim, window: fourier.len() - 1, fourier }
    }

    /// Block Toeplitz moment matrix `[mu_hat(j - k)]_{0 <= j,k <= K}`.
    pub fn moment_matrix(&self) -> DMatrix<C64> {
        let d = self.coeff_dim;
        let kk = self.window + 1;
        let mut m = DMatrix::zeros(d * kk, d * kk);
        for j in 0..kk {
            for k in 0..kk {
                let block = self.fourier(j as i64 - k as i64);
                m.view_mut((j * d, k * d), (d, d)).copy_from(&block);
            }
        }
        m
    }

    /// `(lambda_min, lambda_max)` of the moment matrix.
    pub fn psd_certificate(&self) -> (f64, f64) {
        let m = self.moment_matrix();
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let lmax = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lmin, lmax)
    }

    /// Smallest eigenvalue of the finite positivity certificate and the
    /// pass verdict at the policy's rank tolerance.
    pub fn psd_check(&self, tol: &TolerancePolicy) -> (f64, bool) {
        let (lmin, lmax) = self.psd_certificate();
        (lmin, lmin >= -tol.rank_tol * lmax.max(1.0))
    }

    /// Max deviation from another measure over the shared window.
    pub fn max_deviation(&self, other: &OpValuedMeasure) -> f64 {
        let k = self.window.min(other.window);
        (0..=k as i64)
            .map(|i| {
                (self.fourier(i) - other.fourier(i))
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}
