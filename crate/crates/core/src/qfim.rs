//! Two-parameter estimation of the separation `s` together with a nuisance
//! parameter describing the auxiliary degree of freedom.
//!
//! Everything is expressed in the orthonormal basis `{e1, e2, e3, e4}` where
//! `e1, e2` diagonalize the reduced spatial state and `e3 = ∂e1/∂s / a3`,
//! `e4 = ∂e2/∂s / a4`. In that basis `ρ = diag(λ1, λ2, 0, 0)` and both
//! derivatives of `ρ` are sparse, so the SLD operators and the QFIM follow in
//! closed form. All closed forms require `φ = 0` and `s > 0`.
//!
//! Terms of the form `λk [L]kk²` are evaluated as `(∂λk)²/λk` with the ratio
//! simplified analytically, so nothing divides by a vanishing eigenvalue. When
//! `λ1` drops below [`LAMBDA_CUTOFF`] the `θ → 0` limits are substituted.

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::state_model::{coherence_of, overlap, spectral, theta_from_concurrence, ModelParams};

/// Eigenvalue (and eigenvalue-pair sum) below which SLD entries are set to zero
/// and the QFIM switches to its `θ → 0` limits.
pub const LAMBDA_CUTOFF: f64 = 1e-12;

/// Nuisance magnitudes below which the Schur-complement correction is dropped.
const NUISANCE_FLOOR: f64 = 1e-14;

/// Distance of `cos θ` from zero below which the concurrence chart is singular.
const CHART_EDGE: f64 = 1e-9;

/// Which nuisance parameter accompanies `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    Theta,
    Gamma,
    Concurrence,
}

/// Reduced spatial state in the `{e1..e4}` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Rho4 {
    pub matrix: Matrix4<f64>,
    pub s: f64,
    pub sigma: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SldPair {
    pub l_s: Matrix4<f64>,
    pub l_theta: Matrix4<f64>,
}

/// QFIM elements for `(s, nuisance)`.
///
/// Elements may be `+∞` on chart boundaries where the nuisance coordinate is
/// singular (`γ = 1`, or `C = C_max` for the concurrence chart).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qfim2 {
    pub f_ss: f64,
    pub f_tt: f64,
    pub f_st: f64,
    pub chart: Chart,
}

impl Qfim2 {
    pub fn determinant(&self) -> f64 {
        self.f_ss * self.f_tt - self.f_st * self.f_st
    }
}

/// Nuisance-corrected precisions `H_s = F_ss - F_sn²/F_nn`, `H_n = F_nn - F_sn²/F_ss`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPair {
    pub h_s: f64,
    pub h_nuisance: f64,
}

/// Rates of change of the two eigenvalues and the corresponding SLD diagonals.
#[derive(Debug, Clone, Copy)]
struct EigenRates {
    lambda1: f64,
    lambda2: f64,
    a3: f64,
    a4: f64,
    dl1_ds: f64,
    dl2_ds: f64,
    dl1_dt: f64,
    dl2_dt: f64,
    /// `∂λk/∂s / λk` and `∂λk/∂θ / λk`, simplified to avoid dividing by `λk`.
    r1_s: f64,
    r2_s: f64,
    r1_t: f64,
    r2_t: f64,
    d: f64,
}

fn eigen_rates(p: &ModelParams) -> Result<EigenRates> {
    p.require_zero_phase()?;
    p.require_separated()?;
    let sp = spectral(p)?;
    let ov = overlap(p.s(), p.sigma())?;
    let (sin_t, cos_t) = p.theta().sin_cos();
    let one_minus_c = 2.0 * (0.5 * p.theta()).sin().powi(2);
    let one_plus_c = 1.0 + cos_t;
    let big_d = 1.0 + ov.d * cos_t;
    let b = ov.d1;
    let omd = ov.one_minus_d;
    let opd = 1.0 + ov.d;
    let diag_s = b * sin_t * sin_t / (2.0 * big_d * big_d);
    let diag_t = omd * opd * sin_t / (2.0 * big_d * big_d);
    Ok(EigenRates {
        lambda1: sp.lambda1,
        lambda2: sp.lambda2,
        a3: sp.a3,
        a4: sp.a4,
        dl1_ds: -diag_s,
        dl2_ds: diag_s,
        dl1_dt: diag_t,
        dl2_dt: -diag_t,
        r1_s: -b * one_plus_c / (big_d * omd),
        r2_s: b * one_minus_c / (big_d * opd),
        r1_t: if one_minus_c > 0.0 {
            opd * sin_t / (big_d * one_minus_c)
        } else {
            f64::INFINITY
        },
        r2_t: -omd * sin_t / (big_d * one_plus_c),
        d: ov.d,
    })
}

pub fn rho4(p: &ModelParams) -> Result<Rho4> {
    p.require_zero_phase()?;
    p.require_separated()?;
    let sp = spectral(p)?;
    Ok(Rho4 {
        matrix: Matrix4::from_diagonal(&nalgebra::Vector4::new(sp.lambda1, sp.lambda2, 0.0, 0.0)),
        s: p.s(),
        sigma: p.sigma(),
        theta: p.theta(),
    })
}

/// `∂ρ/∂s`: diagonal eigenvalue rates plus the eigenvector rotation into `e3`, `e4`.
pub fn drho_ds(p: &ModelParams) -> Result<Matrix4<f64>> {
    let r = eigen_rates(p)?;
    let mut m = Matrix4::zeros();
    m[(0, 0)] = r.dl1_ds;
    m[(1, 1)] = r.dl2_ds;
    m[(0, 2)] = r.lambda1 * r.a3;
    m[(2, 0)] = r.lambda1 * r.a3;
    m[(1, 3)] = r.lambda2 * r.a4;
    m[(3, 1)] = r.lambda2 * r.a4;
    Ok(m)
}

/// `∂ρ/∂θ = x · diag(1, -1, 0, 0)` with `x = (1 - d²) sin θ / (2(1 + d cos θ)²)`.
pub fn drho_dtheta(p: &ModelParams) -> Result<Matrix4<f64>> {
    let r = eigen_rates(p)?;
    let mut m = Matrix4::zeros();
    m[(0, 0)] = r.dl1_dt;
    m[(1, 1)] = r.dl2_dt;
    Ok(m)
}

pub fn sld_pair(p: &ModelParams) -> Result<SldPair> {
    let r = eigen_rates(p)?;
    let mut l_s = Matrix4::zeros();
    let mut l_theta = Matrix4::zeros();
    if r.lambda1 >= LAMBDA_CUTOFF {
        l_s[(0, 0)] = r.r1_s;
        l_s[(0, 2)] = 2.0 * r.a3;
        l_s[(2, 0)] = 2.0 * r.a3;
        l_theta[(0, 0)] = r.r1_t;
    }
    if r.lambda2 >= LAMBDA_CUTOFF {
        l_s[(1, 1)] = r.r2_s;
        l_s[(1, 3)] = 2.0 * r.a4;
        l_s[(3, 1)] = 2.0 * r.a4;
        l_theta[(1, 1)] = r.r2_t;
    }
    Ok(SldPair { l_s, l_theta })
}

/// QFIM in the `(s, θ)` chart from the SLD element formulas.
pub fn qfim(p: &ModelParams) -> Result<Qfim2> {
    let r = eigen_rates(p)?;
    if r.lambda1 < LAMBDA_CUTOFF {
        return Ok(Qfim2 {
            f_ss: 4.0 * r.a4 * r.a4,
            f_tt: (1.0 - r.d) / (1.0 + r.d),
            f_st: 0.0,
            chart: Chart::Theta,
        });
    }
    // λk [L]kk [L']kk = ∂λk · (∂'λk / λk); λ1 [L]13² = 4 λ1 a3².
    let f_ss = r.dl1_ds * r.r1_s
        + 4.0 * r.lambda1 * r.a3 * r.a3
        + r.dl2_ds * r.r2_s
        + 4.0 * r.lambda2 * r.a4 * r.a4;
    let f_tt = r.dl1_dt * r.r1_t + r.dl2_dt * r.r2_t;
    let f_st = r.dl1_ds * r.r1_t + r.dl2_ds * r.r2_t;
    Ok(Qfim2 {
        f_ss,
        f_tt,
        f_st,
        chart: Chart::Theta,
    })
}

/// QFIM from `½ Tr[(Lᵢ Lⱼ + Lⱼ Lᵢ) ρ]` on the assembled 4×4 matrices.
pub fn qfim_from_trace(p: &ModelParams) -> Result<Qfim2> {
    let rho = rho4(p)?.matrix;
    let l = sld_pair(p)?;
    let element = |a: &Matrix4<f64>, b: &Matrix4<f64>| 0.5 * ((a * b + b * a) * rho).trace();
    Ok(Qfim2 {
        f_ss: element(&l.l_s, &l.l_s),
        f_tt: element(&l.l_theta, &l.l_theta),
        f_st: element(&l.l_s, &l.l_theta),
        chart: Chart::Theta,
    })
}

/// Schur complements of a 2×2 QFIM, clamped into `[0, F_ii]`.
pub fn schur_precision(f: &Qfim2) -> PrecisionPair {
    let h_s = if f.f_tt.is_infinite() || (f.f_tt < NUISANCE_FLOOR && f.f_st.abs() < NUISANCE_FLOOR)
    {
        f.f_ss
    } else {
        f.f_ss - f.f_st * f.f_st / f.f_tt
    };
    let h_nuisance = if f.f_tt.is_infinite() {
        f64::INFINITY
    } else if f.f_ss < NUISANCE_FLOOR && f.f_st.abs() < NUISANCE_FLOOR {
        f.f_tt
    } else {
        f.f_tt - f.f_st * f.f_st / f.f_ss
    };
    PrecisionPair {
        h_s: h_s.clamp(0.0, f.f_ss),
        h_nuisance: if h_nuisance.is_finite() {
            h_nuisance.clamp(0.0, f.f_tt)
        } else {
            h_nuisance
        },
    }
}

pub fn precision(p: &ModelParams) -> Result<PrecisionPair> {
    Ok(schur_precision(&qfim(p)?))
}

/// QFIM for `(s, |γ|)`, by the chain rule from the `θ` chart with `dθ/dγ = -1/sin θ`.
pub fn qfim_gamma(s: f64, sigma: f64, gamma: f64) -> Result<Qfim2> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!(
            "coherence must lie in [0, 1] (got {gamma})"
        )));
    }
    let theta = gamma.acos();
    let f = qfim(&ModelParams::real(s, sigma, theta)?)?;
    let sin_t = (1.0 - gamma * gamma).sqrt();
    if sin_t == 0.0 {
        return Ok(Qfim2 {
            f_ss: f.f_ss,
            f_tt: f64::INFINITY,
            f_st: 0.0,
            chart: Chart::Gamma,
        });
    }
    let jac = -1.0 / sin_t;
    Ok(Qfim2 {
        f_ss: f.f_ss,
        f_tt: f.f_tt * jac * jac,
        f_st: f.f_st * jac,
        chart: Chart::Gamma,
    })
}

pub fn precision_gamma(s: f64, sigma: f64, gamma: f64) -> Result<PrecisionPair> {
    Ok(schur_precision(&qfim_gamma(s, sigma, gamma)?))
}

/// QFIM for `(s, C)`. At fixed `C` the angle moves with `s`, so the Jacobian
/// has an off-diagonal entry `∂θ/∂s|_C = tan θ · d d1 / (1 - d²)`.
pub fn qfim_concurrence(s: f64, sigma: f64, c: f64) -> Result<Qfim2> {
    let theta = theta_from_concurrence(s, sigma, c)?;
    let p = ModelParams::real(s, sigma, theta)?;
    let f = qfim(&p)?;
    let cos_t = coherence_of(theta)?;
    if cos_t < CHART_EDGE {
        return Ok(Qfim2 {
            f_ss: f64::INFINITY,
            f_tt: f64::INFINITY,
            f_st: f64::INFINITY,
            chart: Chart::Concurrence,
        });
    }
    let ov = overlap(s, sigma)?;
    let q2 = ov.one_minus_d * (1.0 + ov.d);
    let dtheta_ds = theta.tan() * ov.d * ov.d1 / q2;
    let dtheta_dc = 1.0 / (q2.sqrt() * cos_t);
    Ok(Qfim2 {
        f_ss: f.f_ss + 2.0 * f.f_st * dtheta_ds + f.f_tt * dtheta_ds * dtheta_ds,
        f_tt: f.f_tt * dtheta_dc * dtheta_dc,
        f_st: (f.f_st + f.f_tt * dtheta_ds) * dtheta_dc,
        chart: Chart::Concurrence,
    })
}

/// Precisions with concurrence as nuisance. On the `C = C_max` edge the chart
/// is singular and `H_s` is taken from the `θ` chart, where it is identical.
pub fn precision_concurrence(s: f64, sigma: f64, c: f64) -> Result<PrecisionPair> {
    let g = qfim_concurrence(s, sigma, c)?;
    if g.f_ss.is_finite() {
        return Ok(schur_precision(&g));
    }
    let theta = theta_from_concurrence(s, sigma, c)?;
    let h = precision(&ModelParams::real(s, sigma, theta)?)?;
    Ok(PrecisionPair {
        h_s: h.h_s,
        h_nuisance: f64::INFINITY,
    })
}

/// `Tr(ρ [L_s, L_θ])`. When it vanishes the two-parameter bound is attainable.
pub fn commutator_expectation(p: &ModelParams) -> Result<f64> {
    let rho = rho4(p)?.matrix;
    let l = sld_pair(p)?;
    let comm = l.l_s * l.l_theta - l.l_theta * l.l_s;
    Ok((rho * comm).trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

    fn anchor() -> ModelParams {
        ModelParams::real(2.0, 1.0, FRAC_PI_2).unwrap()
    }

    // Values below are mpmath evaluations (30 digits) of the closed-form reductions.
    const D2: f64 = 0.606_530_659_712_633_4;

    #[test]
    fn rho_is_diagonal_with_unit_trace() {
        let rho = rho4(&anchor()).unwrap().matrix;
        assert_abs_diff_eq!(rho[(0, 0)], 0.196_734_670_143_683_3, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(1, 1)], 0.803_265_329_856_316_7, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-15);
        let pure = rho4(&ModelParams::real(2.0, 1.0, 0.0).unwrap())
            .unwrap()
            .matrix;
        assert_eq!(pure[(0, 0)], 0.0);
        assert_abs_diff_eq!(pure[(1, 1)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn density_derivatives() {
        let ds = drho_ds(&anchor()).unwrap();
        assert_abs_diff_eq!(ds[(0, 0)], 0.151_632_664_928_158_4, epsilon = 1e-15);
        assert_abs_diff_eq!(ds.trace(), 0.0, epsilon = 1e-15);
        let dt = drho_dtheta(&anchor()).unwrap();
        assert_abs_diff_eq!(dt[(0, 0)], 0.316_060_279_414_278_8, epsilon = 1e-15);
        assert_abs_diff_eq!(dt[(1, 1)], -0.316_060_279_414_278_8, epsilon = 1e-15);

        let p0 = ModelParams::real(2.0, 1.0, 0.0).unwrap();
        let ds0 = drho_ds(&p0).unwrap();
        let sp = spectral(&p0).unwrap();
        assert_eq!(ds0[(0, 0)], 0.0);
        assert_eq!(ds0[(1, 1)], 0.0);
        assert_eq!(ds0[(0, 2)], 0.0);
        assert_abs_diff_eq!(ds0[(1, 3)], sp.a4, epsilon = 1e-15);
        assert_eq!(drho_dtheta(&p0).unwrap(), Matrix4::zeros());
    }

    #[test]
    fn sld_elements_at_anchor() {
        let sp = spectral(&anchor()).unwrap();
        let l = sld_pair(&anchor()).unwrap();
        assert_abs_diff_eq!(l.l_s[(0, 2)], 2.0 * sp.a3, epsilon = 1e-15);
        assert_abs_diff_eq!(l.l_s[(1, 3)], 2.0 * sp.a4, epsilon = 1e-15);
        assert_abs_diff_eq!(l.l_theta[(0, 0)], 1.0 + D2, epsilon = 1e-14);
    }

    #[test]
    fn qfim_anchor_reductions() {
        let f = qfim(&anchor()).unwrap();
        assert_abs_diff_eq!(f.f_ss, 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(f.f_tt, 1.0 - D2 * D2, epsilon = 1e-14);
        assert_abs_diff_eq!(f.f_st, D2 * 2.0 / 4.0, epsilon = 1e-14);
        let h = precision(&anchor()).unwrap();
        assert_abs_diff_eq!(h.h_s, 0.104_505_823_282_668_4, epsilon = 1e-14);
    }

    #[test]
    fn qfim_theta_zero_limits() {
        let f = qfim(&ModelParams::real(2.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(f.f_st, 0.0);
        assert_abs_diff_eq!(f.f_tt, 0.244_918_662_403_709_1, epsilon = 1e-15);
        assert_abs_diff_eq!(f.f_ss, 0.119_980_593_651_325_9, epsilon = 1e-15);
        let h = precision(&ModelParams::real(2.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(h.h_s, f.f_ss);
        // the guarded limit joins the unguarded branch continuously
        let near = qfim(&ModelParams::real(2.0, 1.0, 1e-5).unwrap()).unwrap();
        assert_abs_diff_eq!(near.f_tt, f.f_tt, epsilon = 1e-9);
        assert_abs_diff_eq!(near.f_ss, f.f_ss, epsilon = 1e-9);
    }

    #[test]
    fn small_separation_kills_precision() {
        let h = precision(&ModelParams::real(1e-3, 1.0, FRAC_PI_2).unwrap()).unwrap();
        assert!(h.h_s < 1e-6, "{}", h.h_s);
        assert!(precision_gamma(1e-3, 1.0, 0.5).unwrap().h_s < 1e-6);
    }

    #[test]
    fn gamma_chart_matches_theta_chart() {
        let h = precision_gamma(2.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(h.h_s, 0.104_505_823_282_668_4, epsilon = 1e-14);
        let g = qfim_gamma(2.0, 1.0, 1.0).unwrap();
        assert!(g.f_tt.is_infinite());
        assert_eq!(precision_gamma(2.0, 1.0, 1.0).unwrap().h_s, g.f_ss);
    }

    #[test]
    fn commutator_vanishes() {
        assert!(commutator_expectation(&anchor()).unwrap().abs() < 1e-12);
        let p = ModelParams::real(0.5, 1.0, FRAC_PI_8).unwrap();
        assert!(commutator_expectation(&p).unwrap().abs() < 1e-10);
    }

    #[test]
    fn rejects_degenerate_and_phase() {
        let p = ModelParams::real(0.0, 1.0, 0.4).unwrap();
        assert!(matches!(qfim(&p), Err(Error::Degenerate(_))));
        assert!(matches!(sld_pair(&p), Err(Error::Degenerate(_))));
        let p = ModelParams::new(1.0, 1.0, 0.4, 0.1).unwrap();
        assert!(matches!(rho4(&p), Err(Error::NonzeroPhase(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn residual(d: &Matrix4<f64>, l: &Matrix4<f64>, rho: &Matrix4<f64>) -> f64 {
            (d - (l * rho + rho * l) * 0.5).amax()
        }

        proptest! {
            #[test]
            fn sld_defining_relation(s in 1e-2f64..=5.0, theta in 0.0f64..=FRAC_PI_2) {
                let p = ModelParams::real(s, 1.0, theta).unwrap();
                let rho = rho4(&p).unwrap().matrix;
                let l = sld_pair(&p).unwrap();
                prop_assert!(residual(&drho_ds(&p).unwrap(), &l.l_s, &rho) < 1e-10);
                prop_assert!(residual(&drho_dtheta(&p).unwrap(), &l.l_theta, &rho) < 1e-10);
            }

            #[test]
            fn element_formulas_match_trace_formula(s in 5e-2f64..=5.0, theta in 5e-2f64..=FRAC_PI_2) {
                let p = ModelParams::real(s, 1.0, theta).unwrap();
                let a = qfim(&p).unwrap();
                let b = qfim_from_trace(&p).unwrap();
                prop_assert!((a.f_ss - b.f_ss).abs() < 1e-12);
                prop_assert!((a.f_tt - b.f_tt).abs() < 1e-12);
                prop_assert!((a.f_st - b.f_st).abs() < 1e-12);
            }

            #[test]
            fn qfim_is_psd(s in 1e-3f64..=8.0, sigma in 0.3f64..3.0, theta in 0.0f64..=FRAC_PI_2) {
                let f = qfim(&ModelParams::real(s, sigma, theta).unwrap()).unwrap();
                prop_assert!(f.f_ss >= 0.0 && f.f_tt >= 0.0);
                prop_assert!(f.determinant() >= -1e-12);
                let h = schur_precision(&f);
                prop_assert!(h.h_s >= 0.0 && h.h_s <= f.f_ss);
                prop_assert!(h.h_nuisance >= 0.0 && h.h_nuisance <= f.f_tt);
            }

            #[test]
            fn nuisance_corrected_bound_is_eigenvector_motion(s in 1e-2f64..=5.0, theta in 1e-3f64..=FRAC_PI_2) {
                // The eigenvalue rates in s and θ are parallel, so the Schur complement
                // removes them entirely and leaves 4(λ1 a3² + λ2 a4²).
                let p = ModelParams::real(s, 1.0, theta).unwrap();
                let sp = spectral(&p).unwrap();
                let h = precision(&p).unwrap().h_s;
                let expect = 4.0 * (sp.lambda1 * sp.a3 * sp.a3 + sp.lambda2 * sp.a4 * sp.a4);
                prop_assert!((h - expect).abs() < 1e-12 * (1.0 + expect));
            }

            #[test]
            fn chart_invariance(s in 5e-2f64..=5.0, theta in 1e-2f64..1.56) {
                let p = ModelParams::real(s, 1.0, theta).unwrap();
                let h_t = precision(&p).unwrap().h_s;
                let h_g = precision_gamma(s, 1.0, theta.cos()).unwrap().h_s;
                let c = crate::state_model::concurrence_unnormalized(&p);
                let h_c = precision_concurrence(s, 1.0, c).unwrap().h_s;
                prop_assert!((h_t - h_g).abs() < 1e-9);
                prop_assert!((h_t - h_c).abs() < 1e-9);
            }
        }
    }
}
