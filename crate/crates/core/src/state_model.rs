//! Two-source field model.
//!
//! Two equal-intensity Gaussian point sources `h(x ± s/2)` of PSF width `σ`, each
//! tagged by a state of the remaining degrees of freedom. In the basis
//! `{φ1, φ1⊥}` the tags are parametrized by a mixing angle `θ` and a phase `φ`,
//! giving coherence `|γ| = cos θ` and (unnormalized) concurrence
//! `C = sin θ · sqrt(1 - d²)` with `d = exp(-s²/8σ²)`.
//!
//! The reduced spatial state is normalized to unit trace. Its two nonzero
//! eigenvalues and the norms of the separation-derivatives of its eigenvectors
//! are provided by [`spectral`].

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Relative slack accepted when a concurrence sits on its reachable maximum.
pub(crate) const REACH_SLACK: f64 = 1e-12;

/// Physical configuration of the two sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    s: f64,
    sigma: f64,
    theta: f64,
    phi: f64,
}

impl ModelParams {
    pub fn new(s: f64, sigma: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!(
                "sigma must be positive (got {sigma})"
            )));
        }
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::domain(format!(
                "separation must be nonnegative (got {s})"
            )));
        }
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::domain(format!(
                "theta must lie in [0, pi/2] (got {theta})"
            )));
        }
        if !(phi > -PI && phi <= PI) {
            return Err(Error::domain(format!(
                "phi must lie in (-pi, pi] (got {phi})"
            )));
        }
        Ok(Self {
            s,
            sigma,
            theta,
            phi,
        })
    }

    /// Shorthand for the `φ = 0` configuration used by every closed form.
    pub fn real(s: f64, sigma: f64, theta: f64) -> Result<Self> {
        Self::new(s, sigma, theta, 0.0)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(s, self.sigma, self.theta, self.phi)
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.s, self.sigma, theta, self.phi)
    }

    pub(crate) fn require_zero_phase(&self) -> Result<()> {
        if self.phi != 0.0 {
            return Err(Error::NonzeroPhase(self.phi));
        }
        Ok(())
    }

    pub(crate) fn require_separated(&self) -> Result<()> {
        if self.s == 0.0 {
            return Err(Error::Degenerate(
                "s = 0: the antisymmetric eigenvector is undefined".into(),
            ));
        }
        Ok(())
    }
}

/// Gaussian overlap `d` and its first two derivatives with respect to `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapTriple {
    pub d: f64,
    /// `∂d/∂s = -(s/4σ²) d`.
    pub d1: f64,
    /// `∂²d/∂s² = (d/4σ²)(s²/4σ² - 1)`.
    pub d2: f64,
    /// `1 - d`, evaluated without cancellation.
    pub one_minus_d: f64,
}

pub(crate) fn check_geometry(s: f64, sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "sigma must be positive (got {sigma})"
        )));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain(format!(
            "separation must be nonnegative (got {s})"
        )));
    }
    Ok(())
}

pub fn overlap(s: f64, sigma: f64) -> Result<OverlapTriple> {
    check_geometry(s, sigma)?;
    let var = sigma * sigma;
    let u = s * s / (8.0 * var);
    let d = (-u).exp();
    Ok(OverlapTriple {
        d,
        d1: -s / (4.0 * var) * d,
        d2: d / (4.0 * var) * (s * s / (4.0 * var) - 1.0),
        one_minus_d: -(-u).exp_m1(),
    })
}

/// Degree of coherence `|γ| = cos θ`.
pub fn coherence_of(theta: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::domain(format!(
            "theta must lie in [0, pi/2] (got {theta})"
        )));
    }
    Ok(theta.cos())
}

/// `sqrt(1 - d²)`: the largest concurrence reachable at this separation.
pub fn concurrence_max(s: f64, sigma: f64) -> Result<f64> {
    let ov = overlap(s, sigma)?;
    Ok((ov.one_minus_d * (1.0 + ov.d)).sqrt())
}

/// Concurrence as it enters the closed-form Fisher information: `sin θ · sqrt(1 - d²)`.
///
/// This is computed from the unnormalized two-source field; see
/// [`concurrence_normalized`] for the value of the unit-norm state.
pub fn concurrence_unnormalized(p: &ModelParams) -> f64 {
    let ov = overlap(p.s, p.sigma).expect("validated params");
    p.theta.sin() * (ov.one_minus_d * (1.0 + ov.d)).sqrt()
}

/// Concurrence of the two-source field after normalizing it to unit norm.
pub fn concurrence_normalized(p: &ModelParams) -> f64 {
    let ov = overlap(p.s, p.sigma).expect("validated params");
    let norm2 = 1.0 + ov.d * p.theta.cos() * p.phi.cos();
    p.theta.sin() * (ov.one_minus_d * (1.0 + ov.d)).sqrt() / norm2
}

/// Inverse of [`concurrence_unnormalized`] at fixed geometry.
pub fn theta_from_concurrence(s: f64, sigma: f64, c: f64) -> Result<f64> {
    let c_max = concurrence_max(s, sigma)?;
    if !(c >= 0.0) {
        return Err(Error::domain(format!(
            "concurrence must be nonnegative (got {c})"
        )));
    }
    if c > c_max * (1.0 + REACH_SLACK) {
        return Err(Error::OutOfReach {
            requested: c,
            s,
            c_max,
        });
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok((c / c_max).min(1.0).asin())
}

/// Eigen-data of the normalized reduced spatial state (φ = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    /// Weight on the antisymmetric eigenvector `e1 ∝ h₋ - h₊`.
    pub lambda1: f64,
    /// Weight on the symmetric eigenvector `e2 ∝ h₋ + h₊`.
    pub lambda2: f64,
    /// `‖∂e1/∂s‖`.
    pub a3: f64,
    /// `‖∂e2/∂s‖`.
    pub a4: f64,
}

pub fn spectral(p: &ModelParams) -> Result<SpectralData> {
    p.require_zero_phase()?;
    p.require_separated()?;
    let ov = overlap(p.s, p.sigma)?;
    let (a3, a4) = eigvec_speeds(p.s, p.sigma, &ov);
    let c = p.theta.cos();
    let denom = 2.0 * (1.0 + ov.d * c);
    // 1 - cos θ via the half-angle form keeps small θ accurate.
    let one_minus_c = 2.0 * (0.5 * p.theta).sin().powi(2);
    let lambda1 = ov.one_minus_d * one_minus_c / denom;
    let lambda2 = (1.0 + ov.d) * (1.0 + c) / denom;
    Ok(SpectralData {
        lambda1,
        lambda2,
        a3,
        a4,
    })
}

/// `(a3, a4)` from the Gaussian overlap algebra.
///
/// `a3² = [1 + d(1 - s²/4σ²)] / (16σ²(1-d)) - d1² / (4(1-d)²)`
/// `a4² = [1 - d(1 - s²/4σ²)] / (16σ²(1+d)) - d1² / (4(1+d)²)`
pub(crate) fn eigvec_speeds(s: f64, sigma: f64, ov: &OverlapTriple) -> (f64, f64) {
    let var = sigma * sigma;
    let shifted = ov.d * (1.0 - s * s / (4.0 * var));
    let omd = ov.one_minus_d;
    let opd = 1.0 + ov.d;
    let a3_sq = (1.0 + shifted) / (16.0 * var * omd) - ov.d1 * ov.d1 / (4.0 * omd * omd);
    let a4_sq = (1.0 - shifted) / (16.0 * var * opd) - ov.d1 * ov.d1 / (4.0 * opd * opd);
    (a3_sq.max(0.0).sqrt(), a4_sq.max(0.0).sqrt())
}
