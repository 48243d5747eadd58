//! Explicit Runge-Kutta steppers for complex-valued ODE systems.
//!
//! The adaptive stepper is the Dormand-Prince 5(4) pair with FSAL. The error
//! norm is the maximum over components of the mixed absolute/relative
//! scaled error; an RMS norm would dilute the error of the one or two
//! occupied components among many empty ones. The classical RK4 stepper
//! runs at a fixed step and is kept for cross-checks.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// `dy/dt = f(t, y)` for a complex vector `y`.
pub trait ComplexSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Dormand-Prince 5(4), adaptive.
    DormandPrince45,
    /// Classical fourth-order Runge-Kutta with step `max_step`.
    Rk4Fixed,
    /// Fourth-order commutator-free Magnus with step `max_step`; only for
    /// Hamiltonians linear in time (see [`crate::magnus`]).
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub method: Method,
    /// Guardrail against runaway step counts, per propagation.
    pub max_steps: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-11,
            max_step: 1.0,
            method: Method::DormandPrince45,
            max_steps: 500_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        Self {
            max_step: step,
            method: Method::Rk4Fixed,
            ..Self::default()
        }
    }

    pub fn magnus(step: f64) -> Self {
        Self {
            max_step: step,
            method: Method::Magnus4,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rel_tol) || !ok(self.abs_tol) {
            return Err(Error::InvalidParameter(
                "integrator tolerances must be > 0".into(),
            ));
        }
        if !ok(self.max_step) {
            return Err(Error::InvalidParameter("max_step must be > 0".into()));
        }
        Ok(())
    }
}

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (fifth minus embedded fourth order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state carried across successive `advance_to` calls so the
/// adaptive step size survives sampling boundaries.
pub struct Stepper<'a, S: ComplexSystem> {
    system: &'a S,
    config: IntegratorConfig,
    t: f64,
    y: Vec<C64>,
    h: f64,
    steps: u64,
    k: [Vec<C64>; 7],
    fsal_valid: bool,
    scratch: Vec<C64>,
    y_new: Vec<C64>,
}

impl<'a, S: ComplexSystem> Stepper<'a, S> {
    pub fn new(system: &'a S, config: IntegratorConfig, t0: f64, y0: Vec<C64>) -> Result<Self> {
        config.validate()?;
        if config.method == Method::Magnus4 {
            return Err(Error::InvalidParameter(
                "the Magnus method needs a Hamiltonian linear in time, not a general right-hand side"
                    .into(),
            ));
        }
        let n = system.dim();
        if y0.len() != n {
            return Err(Error::InvalidParameter(format!(
                "initial state has length {}, system dimension is {n}",
                y0.len()
            )));
        }
        let zeros = || vec![C64::new(0.0, 0.0); n];
        Ok(Self {
            system,
            h: config.max_step.min(1e-3),
            config,
            t: t0,
            y: y0,
            steps: 0,
            k: [
                zeros(),
                zeros(),
                zeros(),
                zeros(),
                zeros(),
                zeros(),
                zeros(),
            ],
            fsal_valid: false,
            scratch: zeros(),
            y_new: zeros(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[C64] {
        &self.y
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn into_state(self) -> Vec<C64> {
        self.y
    }

    /// Integrates up to exactly `t_target` (which must not lie behind the
    /// current time).
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        match self.config.method {
            Method::DormandPrince45 => self.advance_adaptive(t_target),
            Method::Rk4Fixed => self.advance_rk4(t_target),
            Method::Magnus4 => unreachable!("rejected in Stepper::new"),
        }
    }

    fn bump_steps(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.config.max_steps {
            return Err(Error::StepLimit {
                t: self.t,
                steps: self.config.max_steps,
            });
        }
        Ok(())
    }

    fn advance_rk4(&mut self, t_target: f64) -> Result<()> {
        let span = t_target - self.t;
        if span <= 0.0 {
            return Ok(());
        }
        let nsteps = (span / self.config.max_step).ceil().max(1.0) as u64;
        let h = span / nsteps as f64;
        let t0 = self.t;
        let n = self.y.len();
        for i in 0..nsteps {
            let t = t0 + h * i as f64;
            let [k1, k2, k3, k4, ..] = &mut self.k;
            self.system.rhs(t, &self.y, k1);
            for j in 0..n {
                self.scratch[j] = self.y[j] + k1[j] * (0.5 * h);
            }
            self.system.rhs(t + 0.5 * h, &self.scratch, k2);
            for j in 0..n {
                self.scratch[j] = self.y[j] + k2[j] * (0.5 * h);
            }
            self.system.rhs(t + 0.5 * h, &self.scratch, k3);
            for j in 0..n {
                self.scratch[j] = self.y[j] + k3[j] * h;
            }
            self.system.rhs(t + h, &self.scratch, k4);
            for j in 0..n {
                self.y[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
            }
            self.t = t + h;
            self.bump_steps()?;
        }
        self.t = t_target;
        self.fsal_valid = false;
        Ok(())
    }

    fn advance_adaptive(&mut self, t_target: f64) -> Result<()> {
        const SAFETY: f64 = 0.9;
        const MIN_FACTOR: f64 = 0.2;
        const MAX_FACTOR: f64 = 5.0;
        let n = self.y.len();
        if !self.fsal_valid {
            self.system.rhs(self.t, &self.y, &mut self.k[0]);
            self.fsal_valid = true;
        }
        while self.t < t_target {
            let remaining = t_target - self.t;
            let mut h = self.h.min(self.config.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= f64::EPSILON * self.t.abs().max(1.0) * 4.0 {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            let t = self.t;
            let y = &self.y;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let s = &mut self.scratch;
            for j in 0..n {
                s[j] = y[j] + k1[j] * (h * A21);
            }
            self.system.rhs(t + C2 * h, s, k2);
            for j in 0..n {
                s[j] = y[j] + (k1[j] * A31 + k2[j] * A32) * h;
            }
            self.system.rhs(t + C3 * h, s, k3);
            for j in 0..n {
                s[j] = y[j] + (k1[j] * A41 + k2[j] * A42 + k3[j] * A43) * h;
            }
            self.system.rhs(t + C4 * h, s, k4);
            for j in 0..n {
                s[j] = y[j] + (k1[j] * A51 + k2[j] * A52 + k3[j] * A53 + k4[j] * A54) * h;
            }
            self.system.rhs(t + C5 * h, s, k5);
            for j in 0..n {
                s[j] = y[j]
                    + (k1[j] * A61 + k2[j] * A62 + k3[j] * A63 + k4[j] * A64 + k5[j] * A65) * h;
            }
            self.system.rhs(t + h, s, k6);
            let y_new = &mut self.y_new;
            for j in 0..n {
                y_new[j] =
                    y[j] + (k1[j] * B1 + k3[j] * B3 + k4[j] * B4 + k5[j] * B5 + k6[j] * B6) * h;
            }
            self.system.rhs(t + h, y_new, k7);

            let mut err: f64 = 0.0;
            for j in 0..n {
                let e =
                    (k1[j] * E1 + k3[j] * E3 + k4[j] * E4 + k5[j] * E5 + k6[j] * E6 + k7[j] * E7)
                        * h;
                let scale =
                    self.config.abs_tol + self.config.rel_tol * y[j].norm().max(y_new[j].norm());
                err = err.max(e.norm() / scale);
            }

            self.bump_steps()?;
            if err <= 1.0 {
                self.t = if last { t_target } else { t + h };
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.k.swap(0, 6);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // Keep the step of a truncated final sub-step from shrinking
                // the step used after the sampling boundary.
                if !last || factor * h > self.h {
                    self.h = factor * h;
                }
            } else {
                let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                self.h = factor * h;
            }
        }
        Ok(())
    }
}
