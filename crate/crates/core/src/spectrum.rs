//! Adiabatic spectra of the Bose-Hubbard dimer, anti-crossing data along the
//! sweep and analytic approximations to the level splittings.
//!
//! The initial state `|N⟩` crosses every other diabatic level `|ℓ⟩` once, at
//! `t_{ℓ,N} = −ḡℓ/(2α)` with slope difference `b_{ℓ,N} = 2α(N−ℓ)`. The
//! splitting `w_{ℓ,N}` is the gap of the adjacent adiabatic pair that the two
//! diabatic levels form at that time.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    build_manybody_hamiltonian, diabatic_level, ModelParams, TridiagonalHamiltonian,
};
use crate::tridiag::{eigenvalues_tridiagonal, kth_eigenvalue};

pub use crate::tridiag::eigenvalues_tridiagonal as eigenvalues;

/// Default fit constant of the critical index.
pub const DEFAULT_XC_CONSTANT: f64 = 1.14;

/// Coupling `v` and effective nonlinearity `g`, the only inputs of the
/// N-independent approximations.
pub trait TwoModeCouplings {
    fn coupling(&self) -> f64;
    fn nonlinearity(&self) -> f64;
}

impl TwoModeCouplings for ModelParams {
    fn coupling(&self) -> f64 {
        self.v()
    }
    fn nonlinearity(&self) -> f64 {
        self.g()
    }
}

/// Sorted eigenvalues of the many-particle Hamiltonian at one bias.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub epsilon: f64,
    pub eigenvalues: Vec<f64>,
}

impl SpectrumSlice {
    pub fn gaps(&self) -> Vec<f64> {
        self.eigenvalues.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Data of the anti-crossing between `|N⟩` and `|ℓ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingData {
    pub ell: usize,
    /// Scaled index `ℓ/N`.
    pub x: f64,
    pub t_cross: f64,
    /// Slope difference of the two diabatic levels.
    pub b: f64,
    /// Adiabatic splitting.
    pub w: f64,
    /// Single-crossing diabatic probability.
    pub p: f64,
}

/// Value of an approximation together with whether its validity regime holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approx {
    pub value: f64,
    pub in_regime: bool,
}

pub fn spectrum_slice(params: &ModelParams, epsilon: f64) -> Result<SpectrumSlice> {
    let h = build_manybody_hamiltonian(params, epsilon);
    Ok(SpectrumSlice {
        epsilon,
        eigenvalues: eigenvalues_tridiagonal(&h)?,
    })
}

fn check_crossing(params: &ModelParams, ell: usize) -> Result<()> {
    if ell >= params.n() {
        Err(Error::IndexOutOfRange {
            index: ell,
            max: params.n() - 1,
        })
    } else {
        Ok(())
    }
}

/// `t_{ℓ,N} = −ḡℓ/(2α)`, the solution of `h_N(t) = h_ℓ(t)`.
pub fn crossing_time(params: &ModelParams, ell: usize) -> Result<f64> {
    check_crossing(params, ell)?;
    Ok(-params.gbar() * ell as f64 / (2.0 * params.alpha()))
}

/// `b_{ℓ,N} = 2α(N−ℓ)`.
pub fn slope_difference(params: &ModelParams, ell: usize) -> Result<f64> {
    check_crossing(params, ell)?;
    Ok(2.0 * params.alpha() * (params.n() - ell) as f64)
}

/// How the splitting at a crossing is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplittingMode {
    /// Gap exactly at `t_{ℓ,N}`.
    #[default]
    AtCrossing,
    /// Minimum of the same pair's gap found by golden-section search over
    /// `t_{ℓ,N} ± |ḡ|/(2α)`.
    RefineMin,
}

/// Which adjacent adiabatic pair carries the anti-crossing of `|N⟩` with `|ℓ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairRule {
    /// Pair ranked by the number of diabatic levels below `h_N(t_ℓ)`:
    /// `(ℓ, ℓ+1)` for `ḡ ≤ 0`, `(N−ℓ−1, N−ℓ)` for `ḡ > 0`.
    #[default]
    DiabaticRank,
    /// Pair whose eigenvalues lie closest to `h_N(t_ℓ)`. Interaction shifts
    /// of the adiabatic levels make this pick a neighbouring pair once `|ḡ|N`
    /// is comparable to `v`.
    NearestEnergy,
}

/// Measurement mode and pair rule for exact splittings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SplittingMethod {
    pub mode: SplittingMode,
    pub pair: PairRule,
}

/// Index of the lower member of the adjacent eigenvalue pair nearest `target`.
fn nearest_pair(h: &TridiagonalHamiltonian, target: f64) -> Result<usize> {
    let dim = h.dim();
    let below = crate::tridiag::sturm_count(h, target);
    let lo = below.saturating_sub(2);
    let hi = (below + 1).min(dim - 1);
    let mut cand = Vec::with_capacity(4);
    for k in lo..=hi {
        cand.push((k, kth_eigenvalue(h, k)?));
    }
    let mut best: Option<(usize, f64)> = None;
    for pair in cand.windows(2) {
        let (k, e0) = pair[0];
        let (_, e1) = pair[1];
        let dist = (e0 - target).abs().max((e1 - target).abs());
        if best.map_or(true, |b| dist < b.1) {
            best = Some((k, dist));
        }
    }
    Ok(best.expect("at least two eigenvalues").0)
}

fn rank_pair(params: &ModelParams, ell: usize) -> usize {
    if params.gbar() > 0.0 {
        params.n() - ell - 1
    } else {
        ell
    }
}

/// Adiabatic splitting `w_{ℓ,N}` at the crossing of `|N⟩` with `|ℓ⟩`.
pub fn splitting_at_crossing(params: &ModelParams, ell: usize) -> Result<f64> {
    splitting(params, ell, SplittingMethod::default())
}

pub fn splitting(params: &ModelParams, ell: usize, method: SplittingMethod) -> Result<f64> {
    let t = crossing_time(params, ell)?;
    let h = build_manybody_hamiltonian(params, params.epsilon(t));
    let k = match method.pair {
        PairRule::DiabaticRank => rank_pair(params, ell),
        PairRule::NearestEnergy => nearest_pair(&h, diabatic_level(params, params.n(), t)?)?,
    };
    let gap = |h: &TridiagonalHamiltonian| -> Result<f64> {
        Ok((kth_eigenvalue(h, k + 1)? - kth_eigenvalue(h, k)?).max(0.0))
    };
    let at_crossing = gap(&h)?;
    match method.mode {
        SplittingMode::AtCrossing => Ok(at_crossing),
        SplittingMode::RefineMin => {
            let half_width = params.gbar().abs() / (2.0 * params.alpha());
            if half_width == 0.0 {
                return Ok(at_crossing);
            }
            let at = |tt: f64| gap(&build_manybody_hamiltonian(params, params.epsilon(tt)));
            let refined = golden_section_min(at, t - half_width, t + half_width, 80)?;
            Ok(refined.min(at_crossing))
        }
    }
}

fn golden_section_min<F: Fn(f64) -> Result<f64>>(
    f: F,
    mut a: f64,
    mut b: f64,
    iters: usize,
) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(fc.min(fd))
}

/// Splittings for every crossing `ℓ = 0..N−1`, computed in parallel.
pub fn crossing_splittings(params: &ModelParams, method: SplittingMethod) -> Result<Vec<f64>> {
    (0..params.n())
        .into_par_iter()
        .map(|ell| splitting(params, ell, method))
        .collect()
}

/// Second-order perturbative level `E_{m_z}` for weak interaction, with the
/// constant offset dropped.
pub fn spectrum_perturbative(params: &ModelParams, m_z: f64) -> Approx {
    let v = params.v();
    let n = params.n() as f64;
    let r = params.g() / (2.0 * v);
    let value = if v == 0.0 {
        0.0
    } else {
        2.0 * v * m_z * (1.0 - r * m_z / (2.0 * n) - r * r * m_z * m_z / (4.0 * n * n))
    };
    Approx {
        value,
        in_regime: params.g().abs() < 2.0 * v.abs(),
    }
}

/// Bogoliubov frequency `ω = √(4v² − 2vg)`.
pub fn bogoliubov_frequency<P: TwoModeCouplings + ?Sized>(params: &P) -> Result<f64> {
    let v = params.coupling();
    let w2 = 4.0 * v * v - 2.0 * v * params.nonlinearity();
    if w2 < 0.0 {
        return Err(Error::Domain(format!(
            "4v² − 2vg = {w2} < 0, no Bogoliubov frequency"
        )));
    }
    Ok(w2.sqrt())
}

/// Critical scaled index `x_c = max(0, 1 − a √(2v/|g|))`.
pub fn critical_index<P: TwoModeCouplings + ?Sized>(params: &P, a: f64) -> f64 {
    let g = params.nonlinearity().abs();
    if g == 0.0 {
        return 0.0;
    }
    (1.0 - a * (2.0 * params.coupling().abs() / g).sqrt()).max(0.0)
}

/// Supercritical splitting profile `w² ≈ ω² (x−x_c)/(1−x_c) H(x−x_c)`.
pub fn w2_supercritical<P: TwoModeCouplings + ?Sized>(
    params: &P,
    x: f64,
    a: f64,
) -> Result<Approx> {
    let omega = bogoliubov_frequency(params)?;
    let xc = critical_index(params, a);
    let value = if x <= xc {
        0.0
    } else {
        omega * omega * (x - xc) / (1.0 - xc)
    };
    Ok(Approx {
        value,
        in_regime: params.nonlinearity().abs() > 2.0 * params.coupling().abs(),
    })
}

/// Constant term of the subcritical splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubcriticalW0 {
    /// `w₀ = (16v² + 4gv − 3g²/4)/(8v) = 2v + g/2 − 3g²/(32v)`, the gap of
    /// the lowest pair from the second-order spectrum.
    #[default]
    Rederived,
    /// `w₀ = (16v² + 4g − 3g²/4)/(8v)`, the widely quoted form with `4g` in
    /// place of `4gv`. Dimensionally inconsistent and negative for small `v`.
    AsPrinted,
}

/// Coefficients `(w₀, w₁)` of the subcritical splitting `w(x) = w₀ + w₁ x`.
pub fn subcritical_coefficients<P: TwoModeCouplings + ?Sized>(
    params: &P,
    form: SubcriticalW0,
) -> Result<(f64, f64)> {
    let v = params.coupling();
    let g = params.nonlinearity();
    if v == 0.0 {
        return Err(Error::Domain("subcritical splitting needs v != 0".into()));
    }
    let linear = match form {
        SubcriticalW0::Rederived => 4.0 * g * v,
        SubcriticalW0::AsPrinted => 4.0 * g,
    };
    let w0 = (16.0 * v * v + linear - 0.75 * g * g) / (8.0 * v);
    let w1 = 3.0 * g * g / (8.0 * v) - g;
    Ok((w0, w1))
}

/// Subcritical splitting `w(x) = w₀ + w₁ x`, linear in the scaled index.
pub fn w_subcritical<P: TwoModeCouplings + ?Sized>(
    params: &P,
    x: f64,
    form: SubcriticalW0,
) -> Result<Approx> {
    let (w0, w1) = subcritical_coefficients(params, form)?;
    Ok(Approx {
        value: w0 + w1 * x,
        in_regime: params.nonlinearity().abs() < 2.0 * params.coupling().abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64, g: f64, n: usize, alpha: f64) -> ModelParams {
        ModelParams::with_g(v, g, n, alpha).unwrap()
    }

    #[test]
    fn crossing_time_examples() {
        assert_eq!(crossing_time(&p(0.2, -1.0, 7, 0.3), 0).unwrap(), 0.0);
        let t = crossing_time(&p(0.2, -1.0, 100, 0.01), 50).unwrap();
        assert!((t - 25.0).abs() < 1e-12);
        assert!(crossing_time(&p(0.2, -1.0, 5, 0.1), 5).is_err());
    }

    #[test]
    fn crossing_times_solve_level_equality() {
        let q = p(0.2, -1.0, 100, 0.01);
        for ell in 0..100 {
            let t = crossing_time(&q, ell).unwrap();
            let hn = diabatic_level(&q, 100, t).unwrap();
            let hl = diabatic_level(&q, ell, t).unwrap();
            assert!((hn - hl).abs() <= 1e-12 * hn.abs().max(1.0));
        }
    }

    #[test]
    fn slope_difference_examples() {
        let q = p(0.2, -1.0, 100, 0.01);
        assert!((slope_difference(&q, 99).unwrap() - 0.02).abs() < 1e-15);
        assert!((slope_difference(&q, 0).unwrap() - 2.0).abs() < 1e-15);
        // finite difference of two linear functions
        for ell in [0, 13, 99] {
            let dh =
                |t: f64| diabatic_level(&q, 100, t).unwrap() - diabatic_level(&q, ell, t).unwrap();
            let fd = (dh(1.0) - dh(-1.0)) / 2.0;
            assert!((fd - slope_difference(&q, ell).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_particle_gap() {
        for g in [-3.0, 0.0, 0.5] {
            let w = splitting_at_crossing(&p(0.2, g, 1, 0.1), 0).unwrap();
            assert!((w - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_limit_gap_is_two_v() {
        for n in [2, 5, 10, 31] {
            let q = p(0.2, 0.0, n, 0.1);
            for ell in 0..n {
                let w = splitting_at_crossing(&q, ell).unwrap();
                assert!((w - 0.4).abs() < 1e-10, "n={n} ell={ell} w={w}");
            }
        }
    }

    #[test]
    fn refined_gap_never_exceeds_crossing_gap() {
        let q = p(0.2, -1.0, 30, 0.1);
        for ell in [5, 15, 29] {
            let at = SplittingMethod::default();
            let refine = SplittingMethod {
                mode: SplittingMode::RefineMin,
                ..at
            };
            let w0 = splitting(&q, ell, at).unwrap();
            let w1 = splitting(&q, ell, refine).unwrap();
            assert!(w1 <= w0 && w1 > 0.5 * w0, "{w0} {w1}");
        }
    }

    #[test]
    fn spectrum_is_strictly_increasing() {
        let q = p(0.2, -1.0, 20, 0.1);
        for i in -20..=20 {
            let s = spectrum_slice(&q, 0.05 * i as f64).unwrap();
            assert_eq!(s.eigenvalues.len(), 21);
            assert!(s.gaps().iter().all(|&g| g > 1e-300), "eps={}", s.epsilon);
        }
    }

    #[test]
    fn perturbative_examples() {
        let a = spectrum_perturbative(&p(0.2, 0.0, 50, 1.0), 7.5);
        assert!((a.value - 3.0).abs() < 1e-15 && a.in_regime);
        let a = spectrum_perturbative(&p(0.2, -0.1, 50, 1.0), 25.0);
        assert!((a.value - 10.5859375).abs() < 1e-12);
        assert!(!spectrum_perturbative(&p(0.2, -0.4, 50, 1.0), 1.0).in_regime);
    }

    #[test]
    fn perturbative_spacing_grows_for_attraction() {
        let q = p(0.2, -0.1, 50, 1.0);
        let e = |m: f64| spectrum_perturbative(&q, m).value;
        let gaps: Vec<f64> = (-25..25).map(|m| e(m as f64 + 1.0) - e(m as f64)).collect();
        let lower: f64 = gaps[..25].iter().sum();
        let upper: f64 = gaps[25..].iter().sum();
        assert!(upper > lower);
        assert!(gaps.iter().all(|g| (g - 0.4).abs() < 0.3 * 0.4));
    }

    #[test]
    fn bogoliubov_examples() {
        assert!((bogoliubov_frequency(&p(0.2, 0.0, 1, 1.0)).unwrap() - 0.4).abs() < 1e-15);
        let w = bogoliubov_frequency(&p(0.2, -2.0, 1, 1.0)).unwrap();
        assert!((w - 0.96f64.sqrt()).abs() < 1e-15);
        assert!((w - 0.97980).abs() < 1e-5);
        assert!(bogoliubov_frequency(&p(0.2, 1.0, 1, 1.0)).is_err());
    }

    #[test]
    fn critical_index_examples() {
        let xc = critical_index(&p(0.2, -1.0, 1, 1.0), 1.14);
        assert!((xc - (1.0 - 1.14 * 0.4f64.sqrt())).abs() < 1e-15);
        assert!((xc - 0.27901).abs() < 1e-5);
        assert_eq!(critical_index(&p(0.2, -0.4, 1, 1.0), 1.14), 0.0);
        assert!(critical_index(&p(0.2, -1e8, 1, 1.0), 1.14) > 0.9999);
    }

    #[test]
    fn supercritical_profile_examples() {
        let q = p(0.2, -1.0, 1, 1.0);
        let xc = critical_index(&q, 1.14);
        assert_eq!(w2_supercritical(&q, xc, 1.14).unwrap().value, 0.0);
        assert_eq!(w2_supercritical(&q, 0.1, 1.14).unwrap().value, 0.0);
        assert!((w2_supercritical(&q, 1.0, 1.14).unwrap().value - 0.56).abs() < 1e-14);
        let mid = w2_supercritical(&q, 0.64, 1.14).unwrap();
        assert!((mid.value - 0.2804).abs() < 1e-4 && mid.in_regime);
        assert!(
            !w2_supercritical(&p(0.2, -0.1, 1, 1.0), 0.5, 1.14)
                .unwrap()
                .in_regime
        );
    }

    #[test]
    fn subcritical_profile_examples() {
        let q = p(0.2, 0.0, 1, 1.0);
        for x in [0.0, 0.3, 1.0] {
            for form in [SubcriticalW0::Rederived, SubcriticalW0::AsPrinted] {
                assert!((w_subcritical(&q, x, form).unwrap().value - 0.4).abs() < 1e-15);
            }
        }
        let q = p(0.2, -0.1, 1, 1.0);
        let (w0, w1) = subcritical_coefficients(&q, SubcriticalW0::AsPrinted).unwrap();
        assert!((w0 - 0.1453125).abs() < 1e-15);
        assert!((w1 - 0.11875).abs() < 1e-15);
        let (w0, w1r) = subcritical_coefficients(&q, SubcriticalW0::Rederived).unwrap();
        assert!((w0 - 0.3453125).abs() < 1e-15);
        assert_eq!(w1, w1r);
        assert!(
            !w_subcritical(&p(0.2, -1.0, 1, 1.0), 0.5, SubcriticalW0::default())
                .unwrap()
                .in_regime
        );
    }
}
