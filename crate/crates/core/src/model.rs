//! Parameters and Hamiltonians of the two-mode condensate.
//!
//! Units are scaled so that ħ = 1. The sweep is ε(t) = α t and the state
//! obeys i dψ/dt = H ψ.
//!
//! Number basis: `|k⟩` holds `k` particles in well 1 and `N − k` in well 2,
//! so the initial state with every particle in well 1 is the *last*
//! coefficient of a [`ManyBodyState`].

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Interaction strength as given by the caller. Exactly one form is stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    /// Effective mean-field nonlinearity `g = ḡ N`.
    Effective(f64),
    /// Bare two-particle interaction `ḡ`.
    Bare(f64),
}

/// Physical parameters of one sweep.
///
/// The effective nonlinearity `g` is stored and `ḡ = g / N` is derived, so
/// that the macroscopic limit (N → ∞ at fixed g) is a change of `n` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    v: f64,
    g: f64,
    n: usize,
    alpha: f64,
}

impl ModelParams {
    pub fn new(v: f64, interaction: Interaction, n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "particle number must be >= 1".into(),
            ));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sweep rate alpha must be finite and > 0, got {alpha}"
            )));
        }
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling v must be finite, got {v}"
            )));
        }
        let g = match interaction {
            Interaction::Effective(g) => g,
            Interaction::Bare(gbar) => gbar * n as f64,
        };
        if !g.is_finite() {
            return Err(Error::InvalidParameter("interaction must be finite".into()));
        }
        Ok(Self { v, g, n, alpha })
    }

    /// Shorthand for `new(v, Interaction::Effective(g), n, alpha)`.
    pub fn with_g(v: f64, g: f64, n: usize, alpha: f64) -> Result<Self> {
        Self::new(v, Interaction::Effective(g), n, alpha)
    }

    /// Shorthand for `new(v, Interaction::Bare(gbar), n, alpha)`.
    pub fn with_gbar(v: f64, gbar: f64, n: usize, alpha: f64) -> Result<Self> {
        Self::new(v, Interaction::Bare(gbar), n, alpha)
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Effective nonlinearity `g = ḡ N`.
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Bare interaction `ḡ = g / N`.
    pub fn gbar(&self) -> f64 {
        self.g / self.n as f64
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Critical nonlinearity `g_c = 2v` above which the mean-field level loops.
    pub fn g_critical(&self) -> f64 {
        2.0 * self.v.abs()
    }

    pub fn epsilon(&self, t: f64) -> f64 {
        self.alpha * t
    }

    pub fn set_v(self, v: f64) -> Result<Self> {
        Self::with_g(v, self.g, self.n, self.alpha)
    }

    pub fn set_g(self, g: f64) -> Result<Self> {
        Self::with_g(self.v, g, self.n, self.alpha)
    }

    /// Changes `N` at fixed effective nonlinearity `g`.
    pub fn set_n(self, n: usize) -> Result<Self> {
        Self::with_g(self.v, self.g, n, self.alpha)
    }

    pub fn set_alpha(self, alpha: f64) -> Result<Self> {
        Self::with_g(self.v, self.g, self.n, alpha)
    }

    fn check_level(&self, ell: usize) -> Result<()> {
        if ell > self.n {
            Err(Error::IndexOutOfRange {
                index: ell,
                max: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Interaction part of the diabatic level, `(ḡ/2)(2ℓ² − 2ℓN + N² − N)`.
    pub(crate) fn interaction_energy(&self, ell: usize) -> f64 {
        let l = ell as f64;
        let n = self.n as f64;
        0.5 * self.gbar() * (2.0 * l * l - 2.0 * l * n + n * n - n)
    }
}

/// Normalized amplitude pair of the mean-field (Gross-Pitaevskii) state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub psi1: C64,
    pub psi2: C64,
}

impl MeanFieldState {
    pub fn new(psi1: C64, psi2: C64) -> Self {
        Self { psi1, psi2 }
    }

    /// All population in well 1.
    pub fn lower_well() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi1.norm_sqr() + self.psi2.norm_sqr()
    }

    pub fn population1(&self) -> f64 {
        self.psi1.norm_sqr()
    }
}

/// Coefficients `⟨k|ψ⟩` over the number basis, `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    pub coeffs: Vec<C64>,
}

impl ManyBodyState {
    /// Fock state `|k⟩` in an `N`-particle space.
    pub fn fock(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::IndexOutOfRange { index: k, max: n });
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[k] = C64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }

    /// `|N⟩`: every particle in well 1.
    pub fn all_in_first_well(n: usize) -> Self {
        Self::fock(n, n).expect("k = n is always in range")
    }

    pub fn particles(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Symmetric tridiagonal matrix of the many-particle Hamiltonian in the
/// number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                offdiag.len()
            )));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.offdiag[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.offdiag[i];
            }
            out[i] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        m
    }
}

/// Diabatic level `h_ℓ(t) = α t (2ℓ − N) + (ḡ/2)(2ℓ² − 2ℓN + N² − N)`.
pub fn diabatic_level(params: &ModelParams, ell: usize, t: f64) -> Result<f64> {
    params.check_level(ell)?;
    let slope = 2.0 * ell as f64 - params.n() as f64;
    Ok(params.epsilon(t) * slope + params.interaction_energy(ell))
}

/// Coupling between `|ℓ⟩` and `|ℓ+1⟩`, `v √((ℓ+1)(N−ℓ))`.
pub fn hopping_element(params: &ModelParams, ell: usize) -> f64 {
    let n = params.n() as f64;
    let l = ell as f64;
    params.v() * ((l + 1.0) * (n - l)).sqrt()
}

/// Many-particle (Bose-Hubbard dimer) Hamiltonian at bias `epsilon`.
pub fn build_manybody_hamiltonian(params: &ModelParams, epsilon: f64) -> TridiagonalHamiltonian {
    let n = params.n();
    let diag = (0..=n)
        .map(|ell| epsilon * (2.0 * ell as f64 - n as f64) + params.interaction_energy(ell))
        .collect();
    let offdiag = (0..n).map(|ell| hopping_element(params, ell)).collect();
    TridiagonalHamiltonian { diag, offdiag }
}

/// `2v J_z + (g/N) J_x²` in the number basis, where `J_x |k⟩ = (N−2k)/2 |k⟩`.
///
/// Differs from [`build_manybody_hamiltonian`] at ε = 0 by the constant
/// `−(ḡ/4)(N² − 2N)`.
pub fn build_spin_hamiltonian(params: &ModelParams) -> DMatrix<f64> {
    let n = params.n();
    let nf = n as f64;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        let mx = (nf - 2.0 * k as f64) / 2.0;
        m[(k, k)] = params.g() / nf * mx * mx;
    }
    for k in 0..n {
        let jz = 0.5 * ((k as f64 + 1.0) * (nf - k as f64)).sqrt();
        m[(k, k + 1)] = 2.0 * params.v() * jz;
        m[(k + 1, k)] = 2.0 * params.v() * jz;
    }
    m
}

/// Nonlinear two-mode Hamiltonian `[[ε + g|ψ₁|², v], [v, −ε + g|ψ₂|²]]` as
/// its two diagonal entries.
fn meanfield_diagonal(params: &ModelParams, t: f64, state: &MeanFieldState) -> (f64, f64) {
    let eps = params.epsilon(t);
    let g = params.g();
    (
        eps + g * state.psi1.norm_sqr(),
        -eps + g * state.psi2.norm_sqr(),
    )
}

/// Right-hand side of the Gross-Pitaevskii equation, `−i H(|ψ₁|², |ψ₂|², t) ψ`.
pub fn meanfield_rhs(params: &ModelParams, t: f64, state: &MeanFieldState) -> [C64; 2] {
    let (h11, h22) = meanfield_diagonal(params, t, state);
    let v = params.v();
    let minus_i = C64::new(0.0, -1.0);
    [
        minus_i * (state.psi1 * h11 + state.psi2 * v),
        minus_i * (state.psi1 * v + state.psi2 * h22),
    ]
}

/// Total mean-field energy
/// `ε(|ψ₁|²−|ψ₂|²) + (g/2)(|ψ₁|⁴+|ψ₂|⁴) + v(ψ₁*ψ₂ + ψ₂*ψ₁)`.
pub fn meanfield_total_energy(params: &ModelParams, t: f64, state: &MeanFieldState) -> f64 {
    let n1 = state.psi1.norm_sqr();
    let n2 = state.psi2.norm_sqr();
    // ψ₁*ψ₂ + c.c. is real by construction.
    let hop = 2.0 * (state.psi1.conj() * state.psi2).re;
    params.epsilon(t) * (n1 - n2) + 0.5 * params.g() * (n1 * n1 + n2 * n2) + params.v() * hop
}

/// Total energies of all stationary mean-field states at bias `epsilon`,
/// ascending. Two values away from the loop, four inside it (|g| > 2v).
///
/// Stationary states are parameterized by the imbalance `z = |ψ₁|² − |ψ₂|²`
/// and a relative phase of 0 or π, which turns the problem into root finding
/// for `dE/dz = 0` on `z ∈ (−1, 1)`.
pub fn meanfield_stationary_energies(params: &ModelParams, epsilon: f64) -> Vec<f64> {
    const GRID: usize = 4000;
    let g = params.g();
    let v = params.v();
    let mut energies = Vec::new();
    for phase_sign in [1.0, -1.0] {
        // z = sin θ keeps the tan θ singularity at the ends of the interval.
        let deriv = |theta: f64| epsilon + 0.5 * g * theta.sin() - phase_sign * v * theta.tan();
        let energy = |theta: f64| {
            let z: f64 = theta.sin();
            epsilon * z + 0.25 * g * (1.0 + z * z) + phase_sign * v * theta.cos()
        };
        let half_pi = std::f64::consts::FRAC_PI_2;
        let lo = -half_pi + 1e-12;
        let hi = half_pi - 1e-12;
        let step = (hi - lo) / GRID as f64;
        let mut prev_theta = lo;
        let mut prev = deriv(lo);
        for i in 1..=GRID {
            let theta = lo + step * i as f64;
            let cur = deriv(theta);
            if prev == 0.0 {
                energies.push(energy(prev_theta));
            } else if prev.signum() != cur.signum() && cur != 0.0 {
                let (mut a, mut b, mut fa) = (prev_theta, theta, prev);
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    let fm = deriv(mid);
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                energies.push(energy(0.5 * (a + b)));
            }
            prev_theta = theta;
            prev = cur;
        }
    }
    energies.sort_by(f64::total_cmp);
    energies
}
