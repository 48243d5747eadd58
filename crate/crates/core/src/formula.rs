//! Closed-form Landau-Zener probabilities in the macroscopic limit
//! (N → ∞ at fixed g).
//!
//! Replacing the ICA sums by integrals over the scaled index `x = ℓ/N` with
//! `b̄(x) = 2α(1−x)` gives
//!
//! ```text
//! P ≈ ∫₀¹ exp[−π ∫₀ʸ w²(x)/b̄(x) dx] dy
//! ```
//!
//! which has closed forms for the supercritical profile and for the
//! linearized subcritical profile. [`plz_integral_form`] evaluates the
//! double integral directly for any profile.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gamma::scaled_lower_gamma;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::spectrum::{
    bogoliubov_frequency, critical_index, subcritical_coefficients, SubcriticalW0,
    TwoModeCouplings, DEFAULT_XC_CONSTANT,
};

/// N-free inputs of the closed forms (attractive branch only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormInput {
    pub v: f64,
    pub g: f64,
    pub alpha: f64,
    /// Critical-index fit constant.
    pub a: f64,
    pub w0_form: SubcriticalW0,
}

impl ClosedFormInput {
    pub fn new(v: f64, g: f64, alpha: f64) -> Result<Self> {
        Self::with_constant(v, g, alpha, DEFAULT_XC_CONSTANT)
    }

    pub fn with_constant(v: f64, g: f64, alpha: f64, a: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        if !(g <= 0.0) || !g.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "closed forms cover the attractive branch g <= 0 only, got g = {g}"
            )));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("v must be > 0, got {v}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fit constant a must be > 0, got {a}"
            )));
        }
        Ok(Self {
            v,
            g,
            alpha,
            a,
            w0_form: SubcriticalW0::default(),
        })
    }

    pub fn with_w0_form(self, w0_form: SubcriticalW0) -> Self {
        Self { w0_form, ..self }
    }
}

impl TwoModeCouplings for ClosedFormInput {
    fn coupling(&self) -> f64 {
        self.v
    }
    fn nonlinearity(&self) -> f64 {
        self.g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `|g| > 2v`
    Supercritical,
    /// `|g| <= 2v`
    Subcritical,
}

impl ClosedFormInput {
    pub fn regime(&self) -> Regime {
        if self.g.abs() > 2.0 * self.v {
            Regime::Supercritical
        } else {
            Regime::Subcritical
        }
    }
}

/// `exp(−π v²/α)`, the linear two-level result.
pub fn plz_linear(v: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    Ok((-PI * v * v / alpha).exp())
}

/// `u = π ω² / (2α)`.
pub fn supercritical_exponent(input: &ClosedFormInput) -> Result<f64> {
    let omega = bogoliubov_frequency(input)?;
    Ok(PI * omega * omega / (2.0 * input.alpha))
}

/// `P = x_c + (1 − x_c) e^u γ(u+1, u) / u^{u+1}`.
pub fn plz_supercritical(input: &ClosedFormInput) -> Result<f64> {
    if input.regime() != Regime::Supercritical {
        return Err(Error::Domain(format!(
            "supercritical formula needs |g| > 2v (g = {}, v = {})",
            input.g, input.v
        )));
    }
    let u = supercritical_exponent(input)?;
    let xc = critical_index(input, input.a);
    Ok(xc + (1.0 - xc) * scaled_lower_gamma(u + 1.0, u)?)
}

/// `(c₀, c₁) = (π(w₀² + 2w₀w₁)/(2α), π w₀ w₁/α)`.
pub fn subcritical_exponents(input: &ClosedFormInput) -> Result<(f64, f64)> {
    let (w0, w1) = subcritical_coefficients(input, input.w0_form)?;
    Ok((
        PI * (w0 * w0 + 2.0 * w0 * w1) / (2.0 * input.alpha),
        PI * w0 * w1 / input.alpha,
    ))
}

/// `P = e^{c₁} γ(c₀+1, c₁) / c₁^{c₀+1}`, with `P = 1/(c₀+1)` at `c₁ = 0`.
///
/// Requires `w₀ > 0` so that the linearized `w²` stays positive on [0, 1].
/// The rederived `w₀` is at least `5v/8` on the whole subcritical range; the
/// printed form fails for small `v` near `|g| = 2v`.
pub fn plz_subcritical(input: &ClosedFormInput) -> Result<f64> {
    if input.regime() != Regime::Subcritical {
        return Err(Error::Domain(format!(
            "subcritical formula needs |g| <= 2v (g = {}, v = {})",
            input.g, input.v
        )));
    }
    let (w0, _) = subcritical_coefficients(input, input.w0_form)?;
    if !(w0 > 0.0) {
        return Err(Error::Domain(format!(
            "linear splitting w(x) = w0 + w1 x has w0 = {w0} <= 0; the subcritical profile is outside its range"
        )));
    }
    let (c0, c1) = subcritical_exponents(input)?;
    scaled_lower_gamma(c0 + 1.0, c1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: f64,
    pub regime: Regime,
}

/// Dispatch on the regime; `|g| = 2v` goes to the subcritical branch.
pub fn plz_closed_form(input: &ClosedFormInput) -> Result<ClosedForm> {
    let regime = input.regime();
    let value = match regime {
        Regime::Supercritical => plz_supercritical(input)?,
        Regime::Subcritical => plz_subcritical(input)?,
    };
    Ok(ClosedForm { value, regime })
}

/// Squared splitting as a function of the scaled index.
pub trait SplittingProfile: Sync {
    fn w2(&self, x: f64) -> f64;
    /// Interior points where `w2` has kinks.
    fn breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `ω² (x−x_c)/(1−x_c) H(x−x_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupercriticalProfile {
    pub omega2: f64,
    pub xc: f64,
}

impl SupercriticalProfile {
    pub fn from_input(input: &ClosedFormInput) -> Result<Self> {
        let omega = bogoliubov_frequency(input)?;
        Ok(Self {
            omega2: omega * omega,
            xc: critical_index(input, input.a),
        })
    }
}

impl SplittingProfile for SupercriticalProfile {
    fn w2(&self, x: f64) -> f64 {
        if x <= self.xc {
            0.0
        } else {
            self.omega2 * (x - self.xc) / (1.0 - self.xc)
        }
    }
    fn breaks(&self) -> Vec<f64> {
        vec![self.xc]
    }
}

/// `w₀² + 2 w₀ w₁ x`, the linearization behind the subcritical closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcriticalLinearizedProfile {
    pub w0: f64,
    pub w1: f64,
}

impl SubcriticalLinearizedProfile {
    pub fn from_input(input: &ClosedFormInput) -> Result<Self> {
        let (w0, w1) = subcritical_coefficients(input, input.w0_form)?;
        Ok(Self { w0, w1 })
    }
}

impl SplittingProfile for SubcriticalLinearizedProfile {
    fn w2(&self, x: f64) -> f64 {
        self.w0 * self.w0 + 2.0 * self.w0 * self.w1 * x
    }
}

/// `(w₀ + w₁ x)²` without linearization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcriticalSquaredProfile {
    pub w0: f64,
    pub w1: f64,
}

impl SplittingProfile for SubcriticalSquaredProfile {
    fn w2(&self, x: f64) -> f64 {
        let w = self.w0 + self.w1 * x;
        w * w
    }
}

/// Piecewise-linear interpolation of tabulated `(x_ℓ, w_ℓ²)`, held constant
/// outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    xs: Vec<f64>,
    w2s: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(xs: Vec<f64>, w2s: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != w2s.len() || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "tabulated profile needs matching, strictly increasing abscissae".into(),
            ));
        }
        Ok(Self { xs, w2s })
    }

    /// Profile from splittings `w_ℓ` at `x_ℓ = ℓ/N`.
    pub fn from_splittings(splittings: &[f64]) -> Result<Self> {
        let n = splittings.len() as f64;
        Self::new(
            (0..splittings.len()).map(|l| l as f64 / n).collect(),
            splittings.iter().map(|w| w * w).collect(),
        )
    }
}

impl SplittingProfile for TabulatedProfile {
    fn w2(&self, x: f64) -> f64 {
        let last = self.xs.len() - 1;
        if x <= self.xs[0] {
            return self.w2s[0];
        }
        if x >= self.xs[last] {
            return self.w2s[last];
        }
        let i = self.xs.partition_point(|&xi| xi <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.w2s[i] + t * (self.w2s[i + 1] - self.w2s[i])
    }
}

/// Tolerances of the nested quadrature.
#[derive(Debug, Clone, Copy)]
pub struct IntegralFormConfig {
    pub outer: QuadratureConfig,
    pub inner: QuadratureConfig,
}

impl Default for IntegralFormConfig {
    fn default() -> Self {
        Self {
            outer: QuadratureConfig {
                abs_tol: 1e-10,
                rel_tol: 1e-10,
                max_intervals: 4000,
            },
            inner: QuadratureConfig {
                abs_tol: 1e-13,
                rel_tol: 1e-12,
                max_intervals: 4000,
            },
        }
    }
}

/// `∫₀¹ exp[−π ∫₀ʸ w²(x)/(2α(1−x)) dx] dy` by nested adaptive quadrature.
pub fn plz_integral_form<P: SplittingProfile + ?Sized>(
    profile: &P,
    alpha: f64,
    config: &IntegralFormConfig,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let breaks = profile.breaks();
    let inner = |y: f64| -> Result<f64> {
        integrate(
            |x| profile.w2(x) / (2.0 * alpha * (1.0 - x)),
            0.0,
            y,
            &breaks,
            &config.inner,
        )
    };
    // Quadrature callbacks are infallible; carry the first inner failure out.
    let failure = std::sync::Mutex::new(None);
    let outer = integrate(
        |y| match inner(y) {
            Ok(i) => (-PI * i).exp(),
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        &breaks,
        &config.outer,
    )?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(outer)
}
