//! Time propagation across the sweep and extraction of Landau-Zener
//! transition probabilities.
//!
//! Both propagators integrate in the interaction picture of the diabatic
//! (diagonal) part of the Hamiltonian. The amplitudes then carry only the
//! slow coupling-driven dynamics, while the fast phases `∫ h_ℓ dt` are known
//! in closed form; populations are identical in both pictures.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::magnus::{LinearTridiagonalSweep, MagnusStepper};
use crate::model::{
    build_manybody_hamiltonian, hopping_element, ManyBodyState, MeanFieldState, ModelParams,
    TridiagonalHamiltonian,
};
use crate::ode::{ComplexSystem, IntegratorConfig, Method, Stepper};

/// Maximum tolerated deviation of the squared norm from one.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Default distance of the window edges from the crossing region, in units
/// of `max(2v, |g|, 1)`.
pub const DEFAULT_WINDOW_FACTOR: f64 = 40.0;

pub const DEFAULT_SAMPLES: usize = 401;

/// How to size the propagation window for a given parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub factor: f64,
    pub samples: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            factor: DEFAULT_WINDOW_FACTOR,
            samples: DEFAULT_SAMPLES,
        }
    }
}

impl WindowSpec {
    pub fn resolve(&self, params: &ModelParams) -> Result<SweepWindow> {
        SweepWindow::for_params(params, self.factor, self.samples)
    }
}

/// Finite stand-in for t → ±∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub sample_count: usize,
}

impl SweepWindow {
    pub fn new(t_start: f64, t_end: f64, sample_count: usize) -> Result<Self> {
        if !(t_start < 0.0 && t_end > 0.0) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "window must satisfy t_start < 0 < t_end, got [{t_start}, {t_end}]"
            )));
        }
        if sample_count < 2 {
            return Err(Error::InvalidParameter("need at least two samples".into()));
        }
        Ok(Self {
            t_start,
            t_end,
            sample_count,
        })
    }

    /// Symmetric window with `|α t| = factor · max(2|v|, |g|, 1)` at both ends.
    pub fn for_params(params: &ModelParams, factor: f64, sample_count: usize) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window factor must be > 0, got {factor}"
            )));
        }
        let scale = (2.0 * params.v().abs()).max(params.g().abs()).max(1.0);
        let t = factor * scale / params.alpha();
        Self::new(-t, t, sample_count)
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        let last = self.sample_count - 1;
        (0..self.sample_count)
            .map(|i| {
                if i == last {
                    self.t_end
                } else {
                    self.t_start + span * i as f64 / last as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FinalState {
    MeanField(MeanFieldState),
    ManyBody(ManyBodyState),
}

/// Observables recorded along one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub times: Vec<f64>,
    pub epsilon: Vec<f64>,
    /// Fraction of the particles in well 1 (`|ψ₁|²` or `⟨n̂₁⟩/N`).
    pub n1_fraction: Vec<f64>,
    pub norm: Vec<f64>,
    pub particles: usize,
    pub final_state: FinalState,
    pub p_lz: f64,
    pub steps: u64,
}

impl SweepRecord {
    pub fn max_norm_drift(&self) -> f64 {
        self.norm
            .iter()
            .map(|n| (n - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `⟨n̂₁⟩` in particle units.
    pub fn n1(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.particles as f64;
        self.n1_fraction.iter().map(move |f| f * n)
    }
}

/// Gross-Pitaevskii equation in the frame rotating with `∓ε`:
/// `ψ₁ = e^{−iαt²/2} φ₁`, `ψ₂ = e^{+iαt²/2} φ₂`.
struct MeanFieldFrame {
    alpha: f64,
    g: f64,
    v: f64,
}

impl ComplexSystem for MeanFieldFrame {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let phase = C64::from_polar(1.0, self.alpha * t * t);
        let minus_i = C64::new(0.0, -1.0);
        dy[0] = minus_i * (y[0] * (self.g * y[0].norm_sqr()) + phase * y[1] * self.v);
        dy[1] = minus_i * (phase.conj() * y[0] * self.v + y[1] * (self.g * y[1].norm_sqr()));
    }
}

/// Many-particle Schrödinger equation in the interaction picture of the
/// diabatic levels: `c_ℓ = e^{−iΦ_ℓ(t)} d_ℓ` with `Φ_ℓ = ∫₀ᵗ h_ℓ`.
///
/// The phase between neighbours is
/// `Φ_ℓ − Φ_{ℓ+1} = −αt² + ḡ(N − 2ℓ − 1) t`, so all phase factors follow
/// from two complex exponentials by recurrence.
struct ManyBodyFrame {
    alpha: f64,
    gbar: f64,
    n: usize,
    hopping: Vec<f64>,
}

impl ManyBodyFrame {
    fn new(params: &ModelParams) -> Self {
        Self {
            alpha: params.alpha(),
            gbar: params.gbar(),
            n: params.n(),
            hopping: (0..params.n())
                .map(|l| hopping_element(params, l))
                .collect(),
        }
    }

    fn phase(&self, params: &ModelParams, ell: usize, t: f64) -> f64 {
        let slope = 2.0 * ell as f64 - self.n as f64;
        0.5 * self.alpha * t * t * slope + params.interaction_energy(ell) * t
    }
}

impl ComplexSystem for ManyBodyFrame {
    fn dim(&self) -> usize {
        self.n + 1
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let nf = self.n as f64;
        let mut factor = C64::from_polar(1.0, -self.alpha * t * t + self.gbar * (nf - 1.0) * t);
        let ratio = C64::from_polar(1.0, -2.0 * self.gbar * t);
        for d in dy.iter_mut() {
            *d = C64::new(0.0, 0.0);
        }
        for (ell, &v) in self.hopping.iter().enumerate() {
            let a = factor * v;
            // -i a y[ell+1] and -i conj(a) y[ell]
            let up = a * y[ell + 1];
            let down = a.conj() * y[ell];
            dy[ell] += C64::new(up.im, -up.re);
            dy[ell + 1] += C64::new(down.im, -down.re);
            factor *= ratio;
        }
    }
}

fn check_norm(t: f64, norm: f64) -> Result<()> {
    let drift = (norm - 1.0).abs();
    if drift > NORM_TOLERANCE || !drift.is_finite() {
        Err(Error::NormDrift { t, drift })
    } else {
        Ok(())
    }
}

/// Common interface of the rotating-frame Runge-Kutta and the lab-frame
/// Magnus steppers; populations agree in both frames.
trait Advance {
    fn advance_to(&mut self, t: f64) -> Result<()>;
    fn amplitudes(&self) -> &[C64];
    fn step_count(&self) -> u64;
}

impl<S: ComplexSystem> Advance for Stepper<'_, S> {
    fn advance_to(&mut self, t: f64) -> Result<()> {
        Stepper::advance_to(self, t)
    }
    fn amplitudes(&self) -> &[C64] {
        self.state()
    }
    fn step_count(&self) -> u64 {
        self.steps()
    }
}

impl Advance for MagnusStepper<'_> {
    fn advance_to(&mut self, t: f64) -> Result<()> {
        MagnusStepper::advance_to(self, t)
    }
    fn amplitudes(&self) -> &[C64] {
        self.state()
    }
    fn step_count(&self) -> u64 {
        self.steps()
    }
}

struct Samples {
    times: Vec<f64>,
    n1_fraction: Vec<f64>,
    norm: Vec<f64>,
    steps: u64,
}

/// Records the well-1 fraction `Σ_k weight_k |y_k|²` and the squared norm
/// at every sample time, rejecting the run as soon as the norm drifts.
fn sample(stepper: &mut dyn Advance, window: &SweepWindow, weights: &[f64]) -> Result<Samples> {
    let times = window.sample_times();
    let mut n1_fraction = Vec::with_capacity(times.len());
    let mut norm = Vec::with_capacity(times.len());
    for &t in &times {
        stepper.advance_to(t)?;
        let y = stepper.amplitudes();
        let nrm: f64 = y.iter().map(|c| c.norm_sqr()).sum();
        check_norm(t, nrm)?;
        n1_fraction.push(y.iter().zip(weights).map(|(c, w)| w * c.norm_sqr()).sum());
        norm.push(nrm);
    }
    Ok(Samples {
        times,
        n1_fraction,
        norm,
        steps: stepper.step_count(),
    })
}

/// Propagates the mean-field state `(1, 0)` across the window and returns
/// `P = |ψ₁(t_end)|² / (|ψ₁(t_end)|² + |ψ₂(t_end)|²)`.
///
/// [`Method::Magnus4`] is accepted only for `g = 0`, where the equation is
/// linear.
pub fn integrate_meanfield(
    params: &ModelParams,
    window: &SweepWindow,
    config: &IntegratorConfig,
) -> Result<SweepRecord> {
    let start = MeanFieldState::lower_well();
    let weights = [1.0, 0.0];
    let (samples, psi1, psi2) = if config.method == Method::Magnus4 {
        if params.g() != 0.0 {
            return Err(Error::InvalidParameter(
                "the Magnus method applies to the linear (g = 0) mean-field equation only".into(),
            ));
        }
        let sweep = LinearTridiagonalSweep::new(
            TridiagonalHamiltonian::new(vec![0.0, 0.0], vec![params.v()])?,
            vec![params.alpha(), -params.alpha()],
        )?;
        let y0 = vec![start.psi1, start.psi2];
        let mut stepper = MagnusStepper::new(&sweep, config, window.t_start, y0)?;
        let samples = sample(&mut stepper, window, &weights)?;
        let y = stepper.into_state();
        (samples, y[0], y[1])
    } else {
        let system = MeanFieldFrame {
            alpha: params.alpha(),
            g: params.g(),
            v: params.v(),
        };
        let half_phase = 0.5 * params.alpha() * window.t_start * window.t_start;
        let y0 = vec![
            start.psi1 * C64::from_polar(1.0, half_phase),
            start.psi2 * C64::from_polar(1.0, -half_phase),
        ];
        let mut stepper = Stepper::new(&system, *config, window.t_start, y0)?;
        let samples = sample(&mut stepper, window, &weights)?;
        let y = stepper.into_state();
        let half_phase = 0.5 * params.alpha() * window.t_end * window.t_end;
        (
            samples,
            y[0] * C64::from_polar(1.0, -half_phase),
            y[1] * C64::from_polar(1.0, half_phase),
        )
    };
    let final_state = MeanFieldState::new(psi1, psi2);
    // Normalized by the final norm so that integrator drift in |ψ|² does not
    // leak into the probability.
    let p_lz = final_state.population1() / final_state.norm_sqr();
    Ok(SweepRecord {
        epsilon: samples.times.iter().map(|&t| params.epsilon(t)).collect(),
        times: samples.times,
        n1_fraction: samples.n1_fraction,
        norm: samples.norm,
        particles: 1,
        final_state: FinalState::MeanField(final_state),
        p_lz,
        steps: samples.steps,
    })
}

/// Propagates `|N⟩` with the tridiagonal many-particle Hamiltonian and
/// returns `P = ⟨n̂₁(t_end)⟩ / N` over the final norm.
pub fn integrate_manybody(
    params: &ModelParams,
    window: &SweepWindow,
    config: &IntegratorConfig,
) -> Result<SweepRecord> {
    let n = params.n();
    let nf = n as f64;
    let mut y0 = vec![C64::new(0.0, 0.0); n + 1];
    let weights: Vec<f64> = (0..=n).map(|k| k as f64 / nf).collect();
    let (samples, coeffs) = if config.method == Method::Magnus4 {
        let sweep = LinearTridiagonalSweep::new(
            build_manybody_hamiltonian(params, 0.0),
            (0..=n)
                .map(|l| params.alpha() * (2.0 * l as f64 - nf))
                .collect(),
        )?;
        y0[n] = C64::new(1.0, 0.0);
        let mut stepper = MagnusStepper::new(&sweep, config, window.t_start, y0)?;
        let samples = sample(&mut stepper, window, &weights)?;
        (samples, stepper.into_state())
    } else {
        let system = ManyBodyFrame::new(params);
        y0[n] = C64::from_polar(1.0, system.phase(params, n, window.t_start));
        let mut stepper = Stepper::new(&system, *config, window.t_start, y0)?;
        let samples = sample(&mut stepper, window, &weights)?;
        let t_end = window.t_end;
        let coeffs = stepper
            .into_state()
            .into_iter()
            .enumerate()
            .map(|(ell, d)| d * C64::from_polar(1.0, -system.phase(params, ell, t_end)))
            .collect();
        (samples, coeffs)
    };
    let final_state = ManyBodyState { coeffs };
    let p_lz = expectation_n1(&final_state) / (nf * final_state.norm_sqr());
    Ok(SweepRecord {
        epsilon: samples.times.iter().map(|&t| params.epsilon(t)).collect(),
        times: samples.times,
        n1_fraction: samples.n1_fraction,
        norm: samples.norm,
        particles: n,
        final_state: FinalState::ManyBody(final_state),
        p_lz,
        steps: samples.steps,
    })
}

/// `⟨n̂₁⟩ = Σ_k k |c_k|²`.
pub fn expectation_n1(state: &ManyBodyState) -> f64 {
    state
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| k as f64 * c.norm_sqr())
        .sum()
}

/// Linear multilevel sweep `H(t) = diag(β_i t + b_i) + V` with constant
/// symmetric couplings `V`, as used for the small validation models.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSweepModel {
    pub slopes: Vec<f64>,
    pub offsets: Vec<f64>,
    pub couplings: DMatrix<f64>,
}

impl LinearSweepModel {
    pub fn new(slopes: Vec<f64>, offsets: Vec<f64>, couplings: DMatrix<f64>) -> Result<Self> {
        let n = slopes.len();
        if offsets.len() != n || couplings.nrows() != n || couplings.ncols() != n || n == 0 {
            return Err(Error::InvalidParameter(
                "inconsistent linear sweep dimensions".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                if (couplings[(i, j)] - couplings[(j, i)]).abs() > 0.0 {
                    return Err(Error::InvalidParameter(
                        "couplings must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(Self {
            slopes,
            offsets,
            couplings,
        })
    }

    pub fn dim(&self) -> usize {
        self.slopes.len()
    }

    pub fn diabatic(&self, i: usize, t: f64) -> f64 {
        self.slopes[i] * t + self.offsets[i]
    }

    pub fn hamiltonian(&self, t: f64) -> DMatrix<f64> {
        let mut h = self.couplings.clone();
        for i in 0..self.dim() {
            h[(i, i)] = self.diabatic(i, t);
        }
        h
    }

    /// Adiabatic energies at time `t`, ascending.
    pub fn adiabatic(&self, t: f64) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .hamiltonian(t)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn phase(&self, i: usize, t: f64) -> f64 {
        0.5 * self.slopes[i] * t * t + self.offsets[i] * t
    }

    /// Symmetric window reaching `factor · max(couplings, 1)` beyond the
    /// outermost diabatic crossing on both sides.
    pub fn window(&self, factor: f64) -> Result<(f64, f64)> {
        let n = self.dim();
        let mut t_far: f64 = 0.0;
        let mut min_rate = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let ds = self.slopes[i] - self.slopes[j];
                if ds != 0.0 {
                    t_far = t_far.max(((self.offsets[j] - self.offsets[i]) / ds).abs());
                    min_rate = min_rate.min(ds.abs());
                }
            }
        }
        if !min_rate.is_finite() {
            return Err(Error::Domain("no level crossings: all slopes equal".into()));
        }
        let scale = self.couplings.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let t = t_far + factor * scale / min_rate;
        Ok((-t, t))
    }

    /// Final diabatic populations after starting in level `initial` at
    /// `t_start` and propagating to `t_end`.
    pub fn propagate(
        &self,
        initial: usize,
        t_start: f64,
        t_end: f64,
        config: &IntegratorConfig,
    ) -> Result<Vec<f64>> {
        if initial >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: initial,
                max: self.dim() - 1,
            });
        }
        let mut y0 = vec![C64::new(0.0, 0.0); self.dim()];
        y0[initial] = C64::new(1.0, 0.0);
        let mut stepper = Stepper::new(self, *config, t_start, y0)?;
        stepper.advance_to(t_end)?;
        let pops: Vec<f64> = stepper.state().iter().map(|c| c.norm_sqr()).collect();
        check_norm(t_end, pops.iter().sum())?;
        Ok(pops)
    }
}

impl ComplexSystem for LinearSweepModel {
    fn dim(&self) -> usize {
        self.slopes.len()
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            let phi_i = self.phase(i, t);
            for j in 0..n {
                let v = self.couplings[(i, j)];
                if i != j && v != 0.0 {
                    acc += C64::from_polar(v, phi_i - self.phase(j, t)) * y[j];
                }
            }
            dy[i] = C64::new(acc.im, -acc.re);
        }
    }
}

/// Parameter varied along a sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAxis {
    Alpha,
    G,
    V,
    N,
}

impl std::str::FromStr for GridAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Self::Alpha),
            "g" => Ok(Self::G),
            "v" => Ok(Self::V),
            "n" => Ok(Self::N),
            other => Err(Error::InvalidParameter(format!(
                "unknown grid axis '{other}' (expected alpha, g, v or n)"
            ))),
        }
    }
}

impl GridAxis {
    pub fn apply(self, params: ModelParams, value: f64) -> Result<ModelParams> {
        match self {
            Self::Alpha => params.set_alpha(value),
            Self::G => params.set_g(value),
            Self::V => params.set_v(value),
            Self::N => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "particle number must be a positive integer, got {value}"
                    )));
                }
                params.set_n(value as usize)
            }
        }
    }
}

/// One grid point; each propagation keeps its own outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub value: f64,
    pub meanfield: Result<f64>,
    pub manybody: Result<f64>,
}

/// Mean-field and many-particle transition probabilities along one
/// parameter axis. Points run in parallel; output order follows `values`.
pub fn run_sweep_grid(
    template: &ModelParams,
    axis: GridAxis,
    values: &[f64],
    window: &WindowSpec,
    config: &IntegratorConfig,
) -> Vec<GridPoint> {
    values
        .par_iter()
        .map(|&value| {
            let params = axis.apply(*template, value);
            let run =
                |f: fn(&ModelParams, &SweepWindow, &IntegratorConfig) -> Result<SweepRecord>| {
                    let p = params.clone()?;
                    let w = window.resolve(&p)?;
                    f(&p, &w, config).map(|r| r.p_lz)
                };
            let (meanfield, manybody) =
                rayon::join(|| run(integrate_meanfield), || run(integrate_manybody));
            GridPoint {
                value,
                meanfield,
                manybody,
            }
        })
        .collect()
}
