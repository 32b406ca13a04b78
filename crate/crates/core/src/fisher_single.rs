//! Fisher information for the separation alone, with the coherence or the
//! entanglement of the two sources known in advance.
//!
//! The closed forms are a weighted Fisher information over the two outcomes of
//! the auxiliary degree of freedom, `F_tot = Σᵢ ⟨Φᵢ|Φᵢ⟩ · F(Φ̂ᵢ)`, where `Φ̂ᵢ` is
//! the normalized spatial branch and `F` its pure-state quantum Fisher
//! information. [`weighted_fi_reconstruct`] rebuilds that sum from the
//! Gaussian overlap algebra. Of its two variants, [`WeightedVariant::QuantumOnly`]
//! reproduces the closed forms exactly; adding the classical information carried
//! by the branch weights ([`WeightedVariant::QuantumPlusWeight`]) does not.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::state_model::{concurrence_max, overlap, OverlapTriple, REACH_SLACK};

/// Tolerance on `⟨ψ|ψ⟩ - 1` accepted by [`pure_state_fi`].
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// One evaluation of the single-parameter Fisher information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiRecord {
    pub s: f64,
    pub sigma: f64,
    pub theta: f64,
    pub gamma: f64,
    pub c: f64,
    pub f_tot: f64,
}

/// Closed-form `F_tot(s, |γ|)`.
///
/// `1/4σ² - |γ| d (4σ² - s²)/16σ⁴ - |γ|² d² s² / (8σ⁴ (1 + |γ|² + 2d|γ|))`
pub fn f_tot_coherence(s: f64, sigma: f64, gamma: f64) -> Result<FiRecord> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!(
            "coherence must lie in [0, 1] (got {gamma})"
        )));
    }
    let ov = overlap(s, sigma)?;
    let var = sigma * sigma;
    let d = ov.d;
    let f_tot = 0.25 / var
        - gamma * d * (4.0 * var - s * s) / (16.0 * var * var)
        - gamma * gamma * d * d * s * s
            / (8.0 * var * var * (1.0 + gamma * gamma + 2.0 * d * gamma));
    let q = (ov.one_minus_d * (1.0 + d)).sqrt();
    Ok(FiRecord {
        s,
        sigma,
        theta: gamma.acos(),
        gamma,
        c: (1.0 - gamma * gamma).sqrt() * q,
        f_tot,
    })
}

/// Closed-form `F_tot(s, C)`; requires `s > 0` and `0 ≤ C ≤ sqrt(1 - d²)`.
pub fn f_tot_concurrence(s: f64, sigma: f64, c: f64) -> Result<FiRecord> {
    let ov = overlap(s, sigma)?;
    if s == 0.0 {
        return Err(Error::Degenerate(
            "s = 0: the concurrence form divides by sqrt(1 - d^2)".into(),
        ));
    }
    if !(c >= 0.0) {
        return Err(Error::domain(format!(
            "concurrence must be nonnegative (got {c})"
        )));
    }
    let c_max = concurrence_max(s, sigma)?;
    if c > c_max * (1.0 + REACH_SLACK) {
        return Err(Error::OutOfReach {
            requested: c,
            s,
            c_max,
        });
    }
    let c = c.min(c_max);
    let var = sigma * sigma;
    let d = ov.d;
    let q2 = ov.one_minus_d * (1.0 + d);
    let q = q2.sqrt();
    // factored so that c = C_max gives r = 0 exactly
    let r2 = ((q - c) * (q + c)).max(0.0);
    let r = r2.sqrt();
    let f_tot = 0.25 / var
        - d * (4.0 * var - s * s) * r / (16.0 * q * var * var)
        - d * d * s * s * r2 / (8.0 * var * var * (2.0 * q2 - c * c + 2.0 * d * q * r));
    let gamma = r / q;
    Ok(FiRecord {
        s,
        sigma,
        theta: gamma.acos(),
        gamma,
        c,
        f_tot,
    })
}

/// A one-parameter family of pure states sampled in some finite representation.
pub trait PureStateFamily {
    /// Amplitudes of `ψ(s)`.
    fn state(&self, s: f64) -> Vec<Complex<f64>>;

    /// Amplitudes of `∂ψ/∂s`.
    fn tangent(&self, s: f64) -> Vec<Complex<f64>>;

    /// Inner product `⟨a|b⟩` in this representation (quadrature included).
    fn inner(&self, a: &[Complex<f64>], b: &[Complex<f64>]) -> Complex<f64>;
}

fn checked_jet<F: PureStateFamily + ?Sized>(
    family: &F,
    s: f64,
) -> Result<(Complex<f64>, Complex<f64>, f64)> {
    let psi = family.state(s);
    let dpsi = family.tangent(s);
    let norm = family.inner(&psi, &psi).re;
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let overlap = family.inner(&psi, &dpsi);
    let speed = family.inner(&dpsi, &dpsi).re;
    Ok((overlap, Complex::new(norm, 0.0), speed))
}

/// `2 Tr[(∂ρ)²]` for `ρ = |ψ⟩⟨ψ|`.
///
/// With `∂ρ = |∂ψ⟩⟨ψ| + |ψ⟩⟨∂ψ|` the trace expands to
/// `2 Re⟨ψ|∂ψ⟩² + 2 ⟨ψ|ψ⟩⟨∂ψ|∂ψ⟩`.
pub fn pure_state_fi<F: PureStateFamily + ?Sized>(family: &F, s: f64) -> Result<f64> {
    let (z, norm, speed) = checked_jet(family, s)?;
    let tr = 2.0 * (z * z).re + 2.0 * norm.re * speed;
    Ok(2.0 * tr)
}

/// `4(⟨∂ψ|∂ψ⟩ - |⟨ψ|∂ψ⟩|²)`, equal to [`pure_state_fi`] for normalized families.
pub fn pure_state_fi_overlap_form<F: PureStateFamily + ?Sized>(family: &F, s: f64) -> Result<f64> {
    let (z, _, speed) = checked_jet(family, s)?;
    Ok(4.0 * (speed - z.norm_sqr()))
}

/// Which terms enter the weighted Fisher information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightedVariant {
    /// `Σᵢ Nᵢ F(Φ̂ᵢ)` with `Nᵢ = ⟨Φᵢ|Φᵢ⟩`.
    QuantumOnly,
    /// Adds `Σᵢ (∂pᵢ)²/pᵢ` for the trace-normalized weights `pᵢ = Nᵢ / ΣNⱼ`.
    QuantumPlusWeight,
}

/// `α h₊ + β h₋` with real coefficients.
#[derive(Debug, Clone, Copy)]
struct Branch {
    plus: f64,
    minus: f64,
}

impl Branch {
    fn norm2(&self, ov: &OverlapTriple) -> f64 {
        self.plus * self.plus + self.minus * self.minus + 2.0 * self.plus * self.minus * ov.d
    }

    /// QFI of the normalized branch, `4(‖∂v‖²/N - ⟨v|∂v⟩²/N²)`.
    fn normalized_qfi(&self, s: f64, sigma: f64, ov: &OverlapTriple) -> f64 {
        let n = self.norm2(ov);
        if n == 0.0 {
            return 0.0;
        }
        let var = sigma * sigma;
        // ⟨∂h±|∂h±⟩ = 1/16σ², ⟨∂h₊|∂h₋⟩ = -d(1 - s²/4σ²)/16σ²
        let cross = -ov.d * (1.0 - s * s / (4.0 * var)) / (16.0 * var);
        let speed = (self.plus * self.plus + self.minus * self.minus) / (16.0 * var)
            + 2.0 * self.plus * self.minus * cross;
        let along = self.plus * self.minus * ov.d1;
        4.0 * (speed / n - along * along / (n * n))
    }
}

/// Rebuilds `F_tot` from the branch decomposition of the two-source field (φ = 0).
pub fn weighted_fi_reconstruct(
    p: &crate::state_model::ModelParams,
    variant: WeightedVariant,
) -> Result<f64> {
    p.require_zero_phase()?;
    let ov = overlap(p.s(), p.sigma())?;
    let (sin_t, cos_t) = p.theta().sin_cos();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let branches = [
        Branch {
            plus: half,
            minus: half * cos_t,
        },
        Branch {
            plus: 0.0,
            minus: half * sin_t,
        },
    ];
    let weights = branches.map(|b| b.norm2(&ov));
    let quantum: f64 = branches
        .iter()
        .zip(weights)
        .map(|(b, n)| {
            if n > 0.0 {
                n * b.normalized_qfi(p.s(), p.sigma(), &ov)
            } else {
                0.0
            }
        })
        .sum();
    match variant {
        WeightedVariant::QuantumOnly => Ok(quantum),
        WeightedVariant::QuantumPlusWeight => {
            // Only N1 = (1 + cos²θ + 2d cosθ)/2 depends on s: ∂N1 = cosθ · d1.
            let total = weights[0] + weights[1];
            let dn = [cos_t * ov.d1, 0.0];
            let dtotal = dn[0] + dn[1];
            let classical: f64 = (0..2)
                .filter(|&i| weights[i] > 0.0)
                .map(|i| {
                    let prob = weights[i] / total;
                    let dprob = (dn[i] * total - weights[i] * dtotal) / (total * total);
                    dprob * dprob / prob
                })
                .sum();
            Ok(quantum + classical)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_model::ModelParams;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn incoherent_limit_is_quarter() {
        for s in [0.0, 0.3, 1.0, 4.0] {
            assert_abs_diff_eq!(
                f_tot_coherence(s, 1.0, 0.0).unwrap().f_tot,
                0.25,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn full_coherence_vanishes_at_zero_separation() {
        assert_abs_diff_eq!(
            f_tot_coherence(0.0, 1.0, 1.0).unwrap().f_tot,
            0.0,
            epsilon = 1e-16
        );
        // mpmath, 30 digits
        let v = f_tot_coherence(0.3, 1.0, 1.0).unwrap().f_tot;
        assert_abs_diff_eq!(v, 0.005_593_418_701_544_484, epsilon = 1e-15);
        let v = f_tot_coherence(2.0, 1.0, 1.0).unwrap().f_tot;
        assert_abs_diff_eq!(v, 0.192_752_502_271_378, epsilon = 1e-15);
    }

    #[test]
    fn concurrence_form_values() {
        let r = f_tot_concurrence(0.3, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(r.f_tot, 0.005_593_418_701_544_484, epsilon = 1e-15);
        assert_abs_diff_eq!(r.gamma, 1.0, epsilon = 1e-15);
        let c_max = concurrence_max(0.3, 1.0).unwrap();
        assert_abs_diff_eq!(
            f_tot_concurrence(0.3, 1.0, c_max).unwrap().f_tot,
            0.25,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            f_tot_concurrence(0.3, 1.0, 0.1).unwrap().f_tot,
            0.068_700_058_810_580_95,
            epsilon = 1e-15
        );
    }

    #[test]
    fn concurrence_form_errors() {
        assert!(matches!(
            f_tot_concurrence(0.0, 1.0, 0.0),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            f_tot_concurrence(0.3, 1.0, 0.2),
            Err(Error::OutOfReach { .. })
        ));
        assert!(matches!(
            f_tot_coherence(0.3, 1.0, 1.01),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dimensional_scaling() {
        // F_tot scales as 1/σ² at fixed s/σ.
        let base = f_tot_coherence(0.7, 1.0, 0.6).unwrap().f_tot;
        let scaled = f_tot_coherence(1.4, 2.0, 0.6).unwrap().f_tot;
        assert_abs_diff_eq!(scaled * 4.0, base, epsilon = 1e-15);
    }

    #[test]
    fn reconstruction_variants() {
        let p = ModelParams::real(1.7, 1.0, FRAC_PI_2).unwrap();
        for v in [
            WeightedVariant::QuantumOnly,
            WeightedVariant::QuantumPlusWeight,
        ] {
            assert_abs_diff_eq!(
                weighted_fi_reconstruct(&p, v).unwrap(),
                0.25,
                epsilon = 1e-15
            );
        }
        let p = ModelParams::real(2.0, 1.0, 0.0).unwrap();
        let q = weighted_fi_reconstruct(&p, WeightedVariant::QuantumOnly).unwrap();
        assert_abs_diff_eq!(q, 0.192_752_502_271_378, epsilon = 1e-12);
        let p = ModelParams::real(1.0, 1.0, FRAC_PI_4).unwrap();
        let q = weighted_fi_reconstruct(&p, WeightedVariant::QuantumOnly).unwrap();
        let target = f_tot_coherence(1.0, 1.0, FRAC_PI_4.cos()).unwrap().f_tot;
        assert_abs_diff_eq!(q, target, epsilon = 1e-12);
        let w = weighted_fi_reconstruct(&p, WeightedVariant::QuantumPlusWeight).unwrap();
        assert!((w - target).abs() > 1e-4);
    }

    struct Constant;

    impl PureStateFamily for Constant {
        fn state(&self, _: f64) -> Vec<Complex<f64>> {
            vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]
        }
        fn tangent(&self, _: f64) -> Vec<Complex<f64>> {
            vec![Complex::new(0.0, 0.0); 2]
        }
        fn inner(&self, a: &[Complex<f64>], b: &[Complex<f64>]) -> Complex<f64> {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        }
    }

    /// `(cos s, e^{i s} sin s)` on a qubit.
    struct Qubit;

    impl PureStateFamily for Qubit {
        fn state(&self, s: f64) -> Vec<Complex<f64>> {
            vec![Complex::new(s.cos(), 0.0), Complex::from_polar(s.sin(), s)]
        }
        fn tangent(&self, s: f64) -> Vec<Complex<f64>> {
            let e = Complex::from_polar(1.0, s);
            vec![
                Complex::new(-s.sin(), 0.0),
                e * s.cos() + e * Complex::new(0.0, 1.0) * s.sin(),
            ]
        }
        fn inner(&self, a: &[Complex<f64>], b: &[Complex<f64>]) -> Complex<f64> {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        }
    }

    #[test]
    fn s_independent_family_has_zero_information() {
        assert_eq!(pure_state_fi(&Constant, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn trace_and_overlap_forms_agree_with_complex_phase() {
        for s in [0.1, 0.5, 1.2] {
            let a = pure_state_fi(&Qubit, s).unwrap();
            let b = pure_state_fi_overlap_form(&Qubit, s).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            // 4(1 + sin²s) - 4 sin⁴ s
            let expect = 4.0 * (1.0 + s.sin().powi(2)) - 4.0 * s.sin().powi(4);
            assert_abs_diff_eq!(a, expect, epsilon = 1e-12);
        }
    }

    struct Unnormalized;

    impl PureStateFamily for Unnormalized {
        fn state(&self, _: f64) -> Vec<Complex<f64>> {
            vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)]
        }
        fn tangent(&self, _: f64) -> Vec<Complex<f64>> {
            vec![Complex::new(0.0, 0.0); 2]
        }
        fn inner(&self, a: &[Complex<f64>], b: &[Complex<f64>]) -> Complex<f64> {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        }
    }

    #[test]
    fn rejects_unnormalized_family() {
        assert!(matches!(
            pure_state_fi(&Unnormalized, 0.0),
            Err(Error::NotNormalized(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn concurrence_and_coherence_forms_agree(s in 1e-3f64..=5.0, theta in 0.0f64..=FRAC_PI_2) {
                let p = ModelParams::real(s, 1.0, theta).unwrap();
                let c = crate::state_model::concurrence_unnormalized(&p);
                let fc = f_tot_concurrence(s, 1.0, c).unwrap().f_tot;
                let fg = f_tot_coherence(s, 1.0, theta.cos()).unwrap().f_tot;
                prop_assert!((fc - fg).abs() < 1e-12);
            }

            #[test]
            fn nonnegative_and_bounded_inside_two_sigma(s in 0.0f64..=8.0, sigma in 0.3f64..3.0, g in 0.0f64..=1.0) {
                let f = f_tot_coherence(s, sigma, g).unwrap().f_tot;
                prop_assert!(f >= -1e-15);
                // past s = 2σ interference can push F above the incoherent value
                if s <= 2.0 * sigma {
                    prop_assert!(f <= 0.25 / (sigma * sigma) + 1e-15);
                }
            }

            #[test]
            fn quantum_only_reproduces_closed_form(s in 1e-3f64..=5.0, sigma in 0.5f64..2.0, theta in 0.0f64..=FRAC_PI_2) {
                let p = ModelParams::real(s, sigma, theta).unwrap();
                let q = weighted_fi_reconstruct(&p, WeightedVariant::QuantumOnly).unwrap();
                let f = f_tot_coherence(s, sigma, theta.cos()).unwrap().f_tot;
                prop_assert!((q - f).abs() < 1e-12);
            }
        }
    }
}
