//! Brute-force numerics used to check every closed form in this crate.
//!
//! States live on a uniform position grid with trapezoid quadrature, or in a
//! truncated Hermite-Gauss basis. The auxiliary degree of freedom is an explicit
//! two-dimensional factor, so the partial traces are literal sums. Nothing in
//! here calls into the closed-form modules beyond parameter validation.

use log::warn;
use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fisher_single::{PureStateFamily, NORMALIZATION_TOL};
use crate::qfim::{Chart, Qfim2};
use crate::state_model::{check_geometry, ModelParams};

type C64 = Complex<f64>;

pub const DEFAULT_POINTS: usize = 4096;
pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_RANK_CUTOFF: f64 = 1e-12;

/// Smallest rank cutoff that does not invite amplified round-off.
const CUTOFF_WARN: f64 = 1e-14;
/// Residual norm below which a Gram-Schmidt candidate is treated as dependent.
const DEPENDENT: f64 = 1e-14;

/// Uniform position grid on `[-halfwidth, halfwidth]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    halfwidth: f64,
    n_points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(halfwidth: f64, n_points: usize) -> Result<Self> {
        if !(halfwidth > 0.0) || !halfwidth.is_finite() {
            return Err(Error::Config(format!(
                "grid halfwidth must be positive (got {halfwidth})"
            )));
        }
        if n_points < 1024 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid point count must be a power of two >= 1024 (got {n_points})"
            )));
        }
        Ok(Self {
            halfwidth,
            n_points,
            spacing: 2.0 * halfwidth / (n_points - 1) as f64,
        })
    }

    /// Default sizing `8σ + s`.
    pub fn for_sources(s: f64, sigma: f64, n_points: usize) -> Result<Self> {
        Self::new(8.0 * sigma + s, n_points)
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.halfwidth + i as f64 * self.spacing
    }

    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// Trapezoid `∫ conj(a) b dx`.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| x.conj() * y * self.weight(i))
            .sum()
    }

    /// Trapezoid `∫ a b dx` for real samples.
    pub fn inner_real(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| x * y * self.weight(i))
            .sum()
    }

    fn check_fits(&self, s: f64, sigma: f64) -> Result<()> {
        let need = 8.0 * sigma + s;
        if self.halfwidth < need * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "grid halfwidth {} is narrower than 8 sigma + s = {need}",
                self.halfwidth
            )));
        }
        Ok(())
    }
}

/// Real spatial amplitude sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub amplitudes: Vec<f64>,
}

impl GridField {
    pub fn norm2(&self) -> f64 {
        self.grid.inner_real(&self.amplitudes, &self.amplitudes)
    }

    pub fn overlap(&self, other: &GridField) -> f64 {
        self.grid.inner_real(&self.amplitudes, &other.amplitudes)
    }

    /// Largest `|amplitude|²` at the two grid ends.
    pub fn edge_density(&self) -> f64 {
        let first = self.amplitudes[0];
        let last = self.amplitudes[self.amplitudes.len() - 1];
        (first * first).max(last * last)
    }
}

fn psf(x: f64, sigma: f64) -> f64 {
    (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25)
        * (-x * x / (4.0 * sigma * sigma)).exp()
}

fn psf_slope(x: f64, sigma: f64) -> f64 {
    -x / (2.0 * sigma * sigma) * psf(x, sigma)
}

fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..grid.n_points).map(|i| f(grid.x(i))).collect()
}

/// `h₊(x) = h(x + s/2)` and `h₋(x) = h(x - s/2)`.
pub fn make_sources(s: f64, sigma: f64, grid: &Grid) -> Result<(GridField, GridField)> {
    check_geometry(s, sigma)?;
    grid.check_fits(s, sigma)?;
    Ok(sources_unchecked(s, sigma, grid))
}

fn sources_unchecked(s: f64, sigma: f64, grid: &Grid) -> (GridField, GridField) {
    let plus = sample(grid, |x| psf(x + 0.5 * s, sigma));
    let minus = sample(grid, |x| psf(x - 0.5 * s, sigma));
    (
        GridField {
            grid: *grid,
            amplitudes: plus,
        },
        GridField {
            grid: *grid,
            amplitudes: minus,
        },
    )
}

/// Oracle discretization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub n_points: usize,
    /// `None` sizes the grid as `8σ + s`.
    pub halfwidth: Option<f64>,
    /// Central-difference step, in units of `σ`.
    pub fd_step: f64,
    pub rank_cutoff: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_POINTS,
            halfwidth: None,
            fd_step: DEFAULT_FD_STEP,
            rank_cutoff: DEFAULT_RANK_CUTOFF,
        }
    }
}

impl OracleConfig {
    fn grid(&self, s: f64, sigma: f64) -> Result<Grid> {
        let grid = match self.halfwidth {
            Some(w) => Grid::new(w, self.n_points)?,
            None => Grid::for_sources(s, sigma, self.n_points)?,
        };
        grid.check_fits(s, sigma)?;
        Ok(grid)
    }

    fn step(&self) -> Result<f64> {
        if !(1e-6..=1e-4).contains(&self.fd_step) {
            return Err(Error::Config(format!(
                "finite-difference step must lie in [1e-6, 1e-4] sigma (got {})",
                self.fd_step
            )));
        }
        Ok(self.fd_step)
    }
}

/// Orthonormal basis (trapezoid metric) for the span of a few grid vectors.
struct SpanBasis {
    grid: Grid,
    vectors: Vec<Vec<f64>>,
}

impl SpanBasis {
    /// Modified Gram-Schmidt with one reorthogonalization pass.
    fn new(grid: Grid, candidates: &[&[f64]]) -> Self {
        let mut vectors: Vec<Vec<f64>> = Vec::new();
        for cand in candidates {
            let mut v = cand.to_vec();
            let start = grid.inner_real(&v, &v).sqrt();
            for _ in 0..2 {
                for b in &vectors {
                    let proj = grid.inner_real(b, &v);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let norm = grid.inner_real(&v, &v).sqrt();
            if norm > DEPENDENT * start.max(1.0) {
                v.iter_mut().for_each(|x| *x /= norm);
                vectors.push(v);
            }
        }
        Self { grid, vectors }
    }

    fn dim(&self) -> usize {
        self.vectors.len()
    }

    fn coords(&self, v: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.vectors.iter().map(|b| self.grid.inner_real(b, v)),
        )
    }
}

/// The two auxiliary columns of the (unnormalized) two-source field, as
/// coefficients on `(h₊, h₋)`: `Ψ = Σⱼ (αⱼ h₊ + βⱼ h₋) ⊗ φⱼ` with `φ0 = φ1`, `φ1 = φ1⊥`.
fn aux_columns(theta: f64, phi: f64) -> [(C64, C64); 2] {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let phase = Complex::from_polar(1.0, phi);
    [
        (Complex::new(half, 0.0), phase * (half * theta.cos())),
        (Complex::new(0.0, 0.0), phase * (half * theta.sin())),
    ]
}

/// Reduced spatial state, in span coordinates, of the normalized field.
fn reduced_spatial(
    plus: &DVector<f64>,
    minus: &DVector<f64>,
    theta: f64,
    phi: f64,
) -> DMatrix<C64> {
    let plus = plus.map(|x| Complex::new(x, 0.0));
    let minus = minus.map(|x| Complex::new(x, 0.0));
    let cols: Vec<DVector<C64>> = aux_columns(theta, phi)
        .iter()
        .map(|(a, b)| &plus * *a + &minus * *b)
        .collect();
    let norm2: f64 = cols.iter().map(|c| c.norm_squared()).sum();
    let mut rho = DMatrix::zeros(plus.len(), plus.len());
    for c in &cols {
        rho += c * c.adjoint();
    }
    rho / Complex::new(norm2, 0.0)
}

fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

/// Derivatives of the reduced spatial state projected onto its own eigenbasis.
struct ProjectedDerivatives {
    lambdas: DVector<f64>,
    d_s: DMatrix<C64>,
    d_t: DMatrix<C64>,
    cutoff: f64,
}

impl ProjectedDerivatives {
    fn new(p: &ModelParams, config: &OracleConfig) -> Result<Self> {
        if p.s() == 0.0 {
            return Err(Error::Degenerate("numeric QFIM needs s > 0".into()));
        }
        let (s, sigma, theta, phi) = (p.s(), p.sigma(), p.theta(), p.phi());
        let h = config.step()? * sigma;
        let grid = config.grid(s + h, sigma)?;

        let (p0, m0) = sources_unchecked(s, sigma, &grid);
        let (pu, mu) = sources_unchecked(s + h, sigma, &grid);
        let (pd, md) = sources_unchecked(s - h, sigma, &grid);
        let basis = SpanBasis::new(
            grid,
            &[
                &p0.amplitudes,
                &m0.amplitudes,
                &pu.amplitudes,
                &mu.amplitudes,
                &pd.amplitudes,
                &md.amplitudes,
            ],
        );
        let at = |pl: &GridField, mi: &GridField, th: f64| {
            reduced_spatial(
                &basis.coords(&pl.amplitudes),
                &basis.coords(&mi.amplitudes),
                th,
                phi,
            )
        };

        let rho = hermitize(&at(&p0, &m0, theta));
        let d_s = (at(&pu, &mu, theta) - at(&pd, &md, theta)) * Complex::new(0.5 / h, 0.0);
        // θ is dimensionless; the same relative step is used.
        let t_step = h / sigma;
        let d_t = (at(&p0, &m0, theta + t_step) - at(&p0, &m0, theta - t_step))
            * Complex::new(0.5 / t_step, 0.0);

        let eig = SymmetricEigen::new(rho);
        let vecs = &eig.eigenvectors;
        Ok(Self {
            d_s: hermitize(&(vecs.adjoint() * hermitize(&d_s) * vecs)),
            d_t: hermitize(&(vecs.adjoint() * hermitize(&d_t) * vecs)),
            lambdas: eig.eigenvalues,
            cutoff: config.rank_cutoff,
        })
    }

    /// `Σ_{k≤l} 2 Re[xₖₗ yₗₖ + xₗₖ yₖₗ]/(λk+λl)`, halved on the diagonal. Summing
    /// over unordered pairs makes the result exactly symmetric in `(x, y)`.
    fn element(&self, x: &DMatrix<C64>, y: &DMatrix<C64>) -> f64 {
        let n = self.lambdas.len();
        let mut acc = 0.0;
        for k in 0..n {
            for l in k..n {
                let denom = self.lambdas[k] + self.lambdas[l];
                if denom <= self.cutoff {
                    continue;
                }
                let pair = if k == l {
                    (x[(k, k)] * y[(k, k)]).re
                } else {
                    (x[(k, l)] * y[(l, k)]).re + (x[(l, k)] * y[(k, l)]).re
                };
                acc += 2.0 * pair / denom;
            }
        }
        acc
    }
}

/// QFIM for `(s, θ)` from central finite differences of the grid state and the
/// spectral formula `F_ij = Σ 2 Re[⟨k|∂ᵢρ|l⟩⟨l|∂ⱼρ|k⟩] / (λk + λl)` over pairs with
/// `λk + λl` above the cutoff. Works for any phase `φ`.
///
/// The state at `s` and `s ± h` lives in the span of six displaced grid
/// Gaussians, so it is represented exactly in an orthonormal basis of that span.
pub fn numeric_qfim(p: &ModelParams, config: &OracleConfig) -> Result<Qfim2> {
    if config.rank_cutoff < CUTOFF_WARN {
        warn!(
            "rank cutoff {:e} is below {:e}; near-null eigenvalue pairs will amplify round-off",
            config.rank_cutoff, CUTOFF_WARN
        );
    }
    let jet = ProjectedDerivatives::new(p, config)?;
    Ok(Qfim2 {
        f_ss: jet.element(&jet.d_s, &jet.d_s),
        f_tt: jet.element(&jet.d_t, &jet.d_t),
        f_st: jet.element(&jet.d_s, &jet.d_t),
        chart: Chart::Theta,
    })
}

/// `(F_sθ, F_θs)` evaluated separately.
pub fn numeric_qfim_offdiag_pair(p: &ModelParams, config: &OracleConfig) -> Result<(f64, f64)> {
    let jet = ProjectedDerivatives::new(p, config)?;
    Ok((
        jet.element(&jet.d_s, &jet.d_t),
        jet.element(&jet.d_t, &jet.d_s),
    ))
}

/// `2 Tr[(∂ρ)²]` for `ρ = |ψ⟩⟨ψ|`, with `∂ψ` from central differences of
/// `family.state` and the trace taken in the Gram space of `{ψ, ∂ψ}`.
pub fn numeric_pure_qfi<F: PureStateFamily + ?Sized>(
    family: &F,
    s: f64,
    fd_step: f64,
) -> Result<f64> {
    let psi = family.state(s);
    let up = family.state(s + fd_step);
    let down = family.state(s - fd_step);
    let dpsi: Vec<C64> = up
        .iter()
        .zip(&down)
        .map(|(u, d)| (u - d) / Complex::new(2.0 * fd_step, 0.0))
        .collect();
    let norm = family.inner(&psi, &psi).re;
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(norm));
    }
    // ∂ρ = Σ K_ab |v_a⟩⟨v_b| with v = (ψ, ∂ψ), K = [[0,1],[1,0]]; Tr[(∂ρ)²] = Tr[K G K G].
    let v = [&psi, &dpsi];
    let gram = DMatrix::from_fn(2, 2, |a, b| family.inner(v[a], v[b]));
    let k = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
        ],
    );
    let tr = (&k * &gram * &k * &gram).trace();
    Ok(2.0 * tr.re)
}

/// Weighted Fisher information `Σᵢ ⟨Φᵢ|Φᵢ⟩ F(Φ̂ᵢ)` with branch norms by quadrature
/// and branch QFIs by [`numeric_pure_qfi`].
pub fn numeric_weighted_fi(p: &ModelParams, config: &OracleConfig) -> Result<f64> {
    let h = config.step()? * p.sigma();
    let grid = config.grid(p.s() + h, p.sigma())?;
    let (plus, minus) = sources_unchecked(p.s(), p.sigma(), &grid);
    let mut total = 0.0;
    for (a, b) in aux_columns(p.theta(), p.phi()) {
        let branch: Vec<C64> = plus
            .amplitudes
            .iter()
            .zip(&minus.amplitudes)
            .map(|(hp, hm)| a * *hp + b * *hm)
            .collect();
        let weight = grid.inner(&branch, &branch).re;
        if weight <= 0.0 {
            continue;
        }
        let family = GridCombination::new(grid, p.sigma(), a, b);
        total += weight * numeric_pure_qfi(&family, p.s(), h)?;
    }
    Ok(total)
}

/// Normalized `α h₊ + β h₋` on the position grid.
#[derive(Debug, Clone)]
pub struct GridCombination {
    pub grid: Grid,
    pub sigma: f64,
    pub plus: C64,
    pub minus: C64,
}

impl GridCombination {
    pub fn new(grid: Grid, sigma: f64, plus: C64, minus: C64) -> Self {
        Self {
            grid,
            sigma,
            plus,
            minus,
        }
    }

    /// A single displaced PSF `h(x - s/2)`.
    pub fn displaced(grid: Grid, sigma: f64) -> Self {
        Self::new(grid, sigma, Complex::new(0.0, 0.0), Complex::new(1.0, 0.0))
    }

    fn raw(&self, s: f64) -> (Vec<C64>, Vec<C64>) {
        let n = self.grid.n_points;
        let mut v = Vec::with_capacity(n);
        let mut dv = Vec::with_capacity(n);
        for i in 0..n {
            let x = self.grid.x(i);
            let (hp, hm) = (psf(x + 0.5 * s, self.sigma), psf(x - 0.5 * s, self.sigma));
            let (dp, dm) = (
                0.5 * psf_slope(x + 0.5 * s, self.sigma),
                -0.5 * psf_slope(x - 0.5 * s, self.sigma),
            );
            v.push(self.plus * hp + self.minus * hm);
            dv.push(self.plus * dp + self.minus * dm);
        }
        (v, dv)
    }
}

impl PureStateFamily for GridCombination {
    fn state(&self, s: f64) -> Vec<C64> {
        let (v, _) = self.raw(s);
        let norm = self.grid.inner(&v, &v).re.sqrt();
        v.into_iter().map(|x| x / norm).collect()
    }

    fn tangent(&self, s: f64) -> Vec<C64> {
        let (v, dv) = self.raw(s);
        let n2 = self.grid.inner(&v, &v).re;
        let norm = n2.sqrt();
        let dnorm = self.grid.inner(&v, &dv).re / norm;
        v.iter()
            .zip(&dv)
            .map(|(x, dx)| dx / norm - x * (dnorm / n2))
            .collect()
    }

    fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        self.grid.inner(a, b)
    }
}

/// Coefficients of `h₊` and `h₋` in the Hermite-Gauss basis of width `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HgCoefficients {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

fn displaced_ground(a: f64, n_max: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(n_max + 1);
    c.push((-0.5 * a * a).exp());
    for n in 1..=n_max {
        let prev = c[n - 1];
        c.push(prev * a / (n as f64).sqrt());
    }
    c
}

/// `cₙ = e^{-a²/2} (±a)ⁿ / sqrt(n!)` with `a = s/4σ`; `h₋` takes `+a`.
pub fn hg_coefficients(s: f64, sigma: f64, n_max: usize) -> Result<HgCoefficients> {
    check_geometry(s, sigma)?;
    if n_max < 20 {
        return Err(Error::Config(format!(
            "n_max must be at least 20 (got {n_max})"
        )));
    }
    let a = s / (4.0 * sigma);
    let minus = displaced_ground(a, n_max);
    let plus = displaced_ground(-a, n_max);
    let residual = 1.0 - minus.iter().map(|c| c * c).sum::<f64>();
    if residual > 1e-12 {
        return Err(Error::Config(format!(
            "n_max = {n_max} leaves truncation residual {residual:e} at s = {s}"
        )));
    }
    Ok(HgCoefficients { plus, minus })
}

/// Normalized `α h₊ + β h₋` in the Hermite-Gauss basis.
#[derive(Debug, Clone)]
pub struct HgCombination {
    pub sigma: f64,
    pub n_max: usize,
    pub plus: C64,
    pub minus: C64,
}

impl HgCombination {
    fn raw(&self, s: f64) -> (Vec<C64>, Vec<C64>) {
        let a = s / (4.0 * self.sigma);
        let da = 1.0 / (4.0 * self.sigma);
        let cm = displaced_ground(a, self.n_max);
        let cp = displaced_ground(-a, self.n_max);
        // d/da [e^{-a²/2} aⁿ/√n!] = √n c_{n-1} - a cₙ
        let slope = |c: &[f64], a: f64| -> Vec<f64> {
            (0..c.len())
                .map(|n| {
                    let lower = if n == 0 {
                        0.0
                    } else {
                        (n as f64).sqrt() * c[n - 1]
                    };
                    lower - a * c[n]
                })
                .collect()
        };
        let dm = slope(&cm, a);
        let dp: Vec<f64> = slope(&cp, -a).into_iter().map(|x| -x).collect();
        let v = cp
            .iter()
            .zip(&cm)
            .map(|(p, m)| self.plus * *p + self.minus * *m)
            .collect();
        let dv = dp
            .iter()
            .zip(&dm)
            .map(|(p, m)| (self.plus * *p + self.minus * *m) * da)
            .collect();
        (v, dv)
    }
}

fn plain_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl PureStateFamily for HgCombination {
    fn state(&self, s: f64) -> Vec<C64> {
        let (v, _) = self.raw(s);
        let norm = plain_inner(&v, &v).re.sqrt();
        v.into_iter().map(|x| x / norm).collect()
    }

    fn tangent(&self, s: f64) -> Vec<C64> {
        let (v, dv) = self.raw(s);
        let n2 = plain_inner(&v, &v).re;
        let norm = n2.sqrt();
        let dnorm = plain_inner(&v, &dv).re / norm;
        v.iter()
            .zip(&dv)
            .map(|(x, dx)| dx / norm - x * (dnorm / n2))
            .collect()
    }

    fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        plain_inner(a, b)
    }
}

/// Concurrence of the normalized two-source field from the purity of the
/// auxiliary factor: `C = sqrt(2(1 - Tr ρ_aux²))`.
pub fn numeric_concurrence(p: &ModelParams, config: &OracleConfig) -> Result<f64> {
    let grid = config.grid(p.s(), p.sigma())?;
    let (plus, minus) = sources_unchecked(p.s(), p.sigma(), &grid);
    let cols: Vec<Vec<C64>> = aux_columns(p.theta(), p.phi())
        .iter()
        .map(|(a, b)| {
            plus.amplitudes
                .iter()
                .zip(&minus.amplitudes)
                .map(|(hp, hm)| a * *hp + b * *hm)
                .collect()
        })
        .collect();
    let norm2: f64 = cols.iter().map(|c| grid.inner(c, c).re).sum();
    let rho_aux = DMatrix::from_fn(2, 2, |j, k| grid.inner(&cols[k], &cols[j]) / norm2);
    let purity: f64 = rho_aux.iter().map(|z| z.norm_sqr()).sum();
    Ok((2.0 * (1.0 - purity)).max(0.0).sqrt())
}

/// Overlap of the two grid sources.
pub fn numeric_overlap(s: f64, sigma: f64, config: &OracleConfig) -> Result<f64> {
    let grid = config.grid(s, sigma)?;
    let (plus, minus) = make_sources(s, sigma, &grid)?;
    Ok(plus.overlap(&minus))
}

/// `(‖∂e1/∂s‖, ‖∂e2/∂s‖)` by differencing the grid eigenvectors
/// `e1 ∝ h₋ - h₊`, `e2 ∝ h₋ + h₊`.
pub fn numeric_eigvec_speeds(s: f64, sigma: f64, config: &OracleConfig) -> Result<(f64, f64)> {
    if s == 0.0 {
        return Err(Error::Degenerate("e1 is undefined at s = 0".into()));
    }
    check_geometry(s, sigma)?;
    let h = config.step()? * sigma;
    let grid = config.grid(s + h, sigma)?;
    let eigvecs = |s: f64| {
        let (plus, minus) = sources_unchecked(s, sigma, &grid);
        let unit = |sign: f64| {
            let v: Vec<f64> = minus
                .amplitudes
                .iter()
                .zip(&plus.amplitudes)
                .map(|(m, p)| m + sign * p)
                .collect();
            let n = grid.inner_real(&v, &v).sqrt();
            v.into_iter().map(|x| x / n).collect::<Vec<f64>>()
        };
        (unit(-1.0), unit(1.0))
    };
    let (e1u, e2u) = eigvecs(s + h);
    let (e1d, e2d) = eigvecs(s - h);
    let speed = |u: &[f64], d: &[f64]| {
        let dv: Vec<f64> = u.iter().zip(d).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        grid.inner_real(&dv, &dv).sqrt()
    };
    Ok((speed(&e1u, &e1d), speed(&e2u, &e2d)))
}
