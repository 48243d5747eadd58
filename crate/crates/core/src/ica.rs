//! Independent crossings approximation (ICA) for the many-particle sweep.
//!
//! The initial level `|N⟩` meets the levels `ℓ = 0, 1, …, N−1` in that order.
//! At each anti-crossing it stays diabatic with probability
//! `p_ℓ = exp(−κ π w_ℓ² / |b_ℓ|)` and otherwise follows the adiabatic level
//! into `|ℓ⟩`, which gives the cascade
//! `|S_{k,N}|² = (1 − p_k) ∏_{ℓ<k} p_ℓ` with `p_N = 0`.
//!
//! The splittings `w_ℓ` are adiabatic gaps rather than bare couplings (the
//! "modified" ICA); see [`three_level_demo`] for a model where the
//! distinction matters.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::ode::IntegratorConfig;
use crate::propagate::LinearSweepModel;
use crate::spectrum::{
    crossing_splittings, crossing_time, slope_difference, w2_supercritical, w_subcritical,
    CrossingData, SplittingMethod, SubcriticalW0,
};

/// Multiplier `κ` in `p = exp(−κ π w² / |b|)`.
///
/// `κ = 1` with `w` the full adiabatic gap is the convention behind the
/// closed-form formulas. The exact two-level result corresponds to
/// `κ = 1/2` on the full gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapConvention {
    kappa: f64,
}

impl Default for GapConvention {
    fn default() -> Self {
        Self { kappa: 1.0 }
    }
}

impl GapConvention {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be > 0, got {kappa}"
            )));
        }
        Ok(Self { kappa })
    }

    /// Convention that reproduces the exact two-level Landau-Zener result.
    pub fn two_level_exact() -> Self {
        Self { kappa: 0.5 }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Diabatic passage probability of one isolated anti-crossing.
pub fn crossing_probability(w: f64, b: f64, convention: GapConvention) -> Result<f64> {
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Domain(format!(
            "slope difference must be nonzero and finite, got {b}"
        )));
    }
    if !(w >= 0.0) {
        return Err(Error::Domain(format!("splitting must be >= 0, got {w}")));
    }
    Ok((-convention.kappa * PI * w * w / b.abs()).exp())
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    match p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        Some(bad) => Err(Error::Domain(format!("probability {bad} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// `|S_{k,N}|²` for `k = 0..=N` from the single-crossing probabilities
/// `p_0..p_{N−1}`.
pub fn ica_smatrix_row(p: &[f64]) -> Result<Vec<f64>> {
    check_probabilities(p)?;
    let mut row = Vec::with_capacity(p.len() + 1);
    let mut survive = 1.0;
    for &pk in p {
        row.push((1.0 - pk) * survive);
        survive *= pk;
    }
    row.push(survive);
    Ok(row)
}

/// `(1/N) Σ_k k |S_{k,N}|²`.
pub fn plz_from_smatrix_row(row: &[f64]) -> f64 {
    let n = (row.len() - 1) as f64;
    row.iter()
        .enumerate()
        .map(|(k, s)| k as f64 * s)
        .sum::<f64>()
        / n
}

/// `(1/N) Σ_{k=0}^{N−1} ∏_{ℓ≤k} p_ℓ`.
pub fn plz_product_sum(p: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut prod = 1.0;
    for &pk in p {
        prod *= pk;
        acc += prod;
    }
    acc / p.len() as f64
}

/// Where the splittings `w_ℓ` come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplittingSource {
    ExactDiagonalization(SplittingMethod),
    /// Supercritical profile with critical-index constant `a`.
    Supercritical {
        a: f64,
    },
    /// Linear subcritical profile `w₀ + w₁ x`.
    Subcritical(SubcriticalW0),
}

impl Default for SplittingSource {
    fn default() -> Self {
        Self::ExactDiagonalization(SplittingMethod::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcaResult {
    pub crossings: Vec<CrossingData>,
    pub s_row: Vec<f64>,
    /// `(1/N) Σ k |S_{k,N}|²`.
    pub p_lz: f64,
    /// Same probability from the product-sum form.
    pub p_lz_product: f64,
}

/// ICA transition probability for the many-particle sweep.
pub fn plz_ica(
    params: &ModelParams,
    convention: GapConvention,
    source: SplittingSource,
) -> Result<IcaResult> {
    let n = params.n();
    let nf = n as f64;
    let splittings: Vec<f64> = match source {
        SplittingSource::ExactDiagonalization(method) => crossing_splittings(params, method)?,
        SplittingSource::Supercritical { a } => (0..n)
            .map(|l| w2_supercritical(params, l as f64 / nf, a).map(|w2| w2.value.sqrt()))
            .collect::<Result<_>>()?,
        SplittingSource::Subcritical(form) => (0..n)
            .map(|l| w_subcritical(params, l as f64 / nf, form).map(|w| w.value.abs()))
            .collect::<Result<_>>()?,
    };
    let mut crossings = Vec::with_capacity(n);
    for (ell, &w) in splittings.iter().enumerate() {
        let b = slope_difference(params, ell)?;
        crossings.push(CrossingData {
            ell,
            x: ell as f64 / nf,
            t_cross: crossing_time(params, ell)?,
            b,
            w,
            p: crossing_probability(w, b, convention)?,
        });
    }
    let p: Vec<f64> = crossings.iter().map(|c| c.p).collect();
    let s_row = ica_smatrix_row(&p)?;
    let p_lz = plz_from_smatrix_row(&s_row);
    let p_lz_product = plz_product_sum(&p);
    debug_assert!((p_lz - p_lz_product).abs() < 1e-12);
    Ok(IcaResult {
        crossings,
        s_row,
        p_lz,
        p_lz_product,
    })
}

/// S-matrix `[[p, q], [q, p]]` of the linear two-level sweep
/// `H = [[β₁t + b₁, v], [v, β₂t + b₂]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSMatrix {
    pub p: f64,
    pub q: f64,
}

impl TwoLevelSMatrix {
    /// Diabatic passage probability `p²`.
    pub fn diabatic_probability(&self) -> f64 {
        self.p * self.p
    }
}

pub fn two_level_smatrix(
    beta1: f64,
    beta2: f64,
    b1: f64,
    b2: f64,
    v: f64,
) -> Result<TwoLevelSMatrix> {
    let _ = (b1, b2); // offsets shift the crossing time only
    let dbeta = (beta1 - beta2).abs();
    if dbeta == 0.0 {
        return Err(Error::Domain(
            "equal slopes: the diabatic levels never cross".into(),
        ));
    }
    let p = (-PI * v * v / dbeta).exp();
    Ok(TwoLevelSMatrix {
        p,
        q: (1.0 - p * p).max(0.0).sqrt(),
    })
}

/// Numerical and ICA S-matrix elements of the three-level model
/// `[[αt + a, v, w], [v, 0, 0], [w, 0, −αt + a]]`, starting in level 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelReport {
    pub s33_numeric: f64,
    pub s32_numeric: f64,
    pub s31_numeric: f64,
    /// Coupling-based ICA: product of the two crossings of level 3.
    pub s33_ica: f64,
    /// Coupling-based ICA; zero because `⟨2|H|3⟩ = 0`.
    pub s32_ica: f64,
    /// ICA with half the adiabatic gap as effective coupling at each crossing.
    pub s33_modified_ica: f64,
    pub s32_modified_ica: f64,
}

pub fn three_level_model(alpha: f64, a: f64, v: f64, w: f64) -> Result<LinearSweepModel> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let couplings = DMatrix::from_row_slice(3, 3, &[0.0, v, w, v, 0.0, 0.0, w, 0.0, 0.0]);
    LinearSweepModel::new(vec![alpha, 0.0, -alpha], vec![a, 0.0, a], couplings)
}

/// Gap of the adiabatic pair nearest the diabatic crossing of levels `i` and
/// `j` of a linear sweep.
fn adiabatic_gap_at_crossing(model: &LinearSweepModel, i: usize, j: usize) -> Result<f64> {
    let ds = model.slopes[i] - model.slopes[j];
    if ds == 0.0 {
        return Err(Error::Domain("parallel diabatic levels".into()));
    }
    let t = (model.offsets[j] - model.offsets[i]) / ds;
    let target = model.diabatic(i, t);
    let e = model.adiabatic(t);
    let (mut best, mut best_dist) = (0.0, f64::INFINITY);
    for pair in e.windows(2) {
        let dist = (pair[0] - target).abs().max((pair[1] - target).abs());
        if dist < best_dist {
            best_dist = dist;
            best = pair[1] - pair[0];
        }
    }
    Ok(best)
}

pub fn three_level_demo(
    alpha: f64,
    a: f64,
    v: f64,
    w: f64,
    window_factor: f64,
    config: &IntegratorConfig,
) -> Result<ThreeLevelReport> {
    let model = three_level_model(alpha, a, v, w)?;
    let (t0, t1) = model.window(window_factor)?;
    let pops = model.propagate(2, t0, t1, config)?;

    // Level 3 first meets level 1 (coupling w, t = 0), then level 2
    // (coupling 0, t = a/α).
    let with_1 = two_level_smatrix(model.slopes[2], model.slopes[0], a, a, w)?;
    let with_2 = two_level_smatrix(model.slopes[2], model.slopes[1], a, 0.0, 0.0)?;
    let s33_ica = with_1.diabatic_probability() * with_2.diabatic_probability();
    let s32_ica = with_1.diabatic_probability() * (1.0 - with_2.diabatic_probability());

    let half_gap_1 = 0.5 * adiabatic_gap_at_crossing(&model, 2, 0)?;
    let half_gap_2 = 0.5 * adiabatic_gap_at_crossing(&model, 2, 1)?;
    let m1 = two_level_smatrix(model.slopes[2], model.slopes[0], a, a, half_gap_1)?;
    let m2 = two_level_smatrix(model.slopes[2], model.slopes[1], a, 0.0, half_gap_2)?;

    Ok(ThreeLevelReport {
        s33_numeric: pops[2],
        s32_numeric: pops[1],
        s31_numeric: pops[0],
        s33_ica,
        s32_ica,
        s33_modified_ica: m1.diabatic_probability() * m2.diabatic_probability(),
        s32_modified_ica: m1.diabatic_probability() * (1.0 - m2.diabatic_probability()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn crossing_probability_examples() {
        let c = GapConvention::default();
        assert_eq!(crossing_probability(0.0, 2.0, c).unwrap(), 1.0);
        let p = crossing_probability(0.4, 2.0, c).unwrap();
        assert!((p - (-PI * 0.08f64).exp()).abs() < 1e-15);
        assert!((p - 0.77777).abs() < 1e-5);
        assert!((crossing_probability(0.4, 1e300, c).unwrap() - 1.0).abs() < 1e-15);
        assert!(crossing_probability(1e10, 2.0, c).unwrap() < 1e-300);
        assert!(crossing_probability(0.4, 0.0, c).is_err());
        assert!(GapConvention::new(0.0).is_err());
    }

    #[test]
    fn smatrix_row_limits() {
        let row = ica_smatrix_row(&[1.0; 5]).unwrap();
        assert_eq!(row, vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(plz_from_smatrix_row(&row), 1.0);
        let row = ica_smatrix_row(&[0.0; 5]).unwrap();
        assert_eq!(row, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(plz_from_smatrix_row(&row), 0.0);
        assert!(ica_smatrix_row(&[0.5, 1.5]).is_err());
    }

    #[test]
    fn three_particle_cascade() {
        let (p0, p1, p2) = (0.3, 0.6, 0.8);
        let row = ica_smatrix_row(&[p0, p1, p2]).unwrap();
        let want = [
            1.0 - p0,
            p0 * (1.0 - p1),
            p0 * p1 * (1.0 - p2),
            p0 * p1 * p2,
        ];
        for (a, b) in row.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_coupling_is_diabatic() {
        let q = ModelParams::with_g(0.0, -1.0, 20, 0.1).unwrap();
        let r = plz_ica(&q, GapConvention::default(), SplittingSource::default()).unwrap();
        assert!((r.p_lz - 1.0).abs() < 1e-15);
        assert!(r.crossings.iter().all(|c| c.w < 1e-12 && c.p == 1.0));
    }

    #[test]
    fn adiabatic_limit_vanishes() {
        let q = ModelParams::with_g(0.2, -1.0, 10, 1e-7).unwrap();
        let r = plz_ica(&q, GapConvention::default(), SplittingSource::default()).unwrap();
        assert!(r.p_lz < 1e-3, "{}", r.p_lz);
    }

    #[test]
    fn crossing_data_is_consistent() {
        let q = ModelParams::with_g(0.2, -1.0, 40, 0.05).unwrap();
        let r = plz_ica(&q, GapConvention::default(), SplittingSource::default()).unwrap();
        for c in &r.crossings {
            assert!((c.b - 2.0 * 0.05 * (40 - c.ell) as f64).abs() < 1e-12);
            assert!(c.w >= 0.0 && c.p > 0.0 && c.p <= 1.0);
        }
        assert!((r.s_row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_sources_run() {
        let q = ModelParams::with_g(0.2, -1.0, 50, 0.05).unwrap();
        let sup = plz_ica(
            &q,
            GapConvention::default(),
            SplittingSource::Supercritical { a: 1.14 },
        )
        .unwrap();
        assert!(sup.p_lz > 0.0 && sup.p_lz < 1.0);
        let q = ModelParams::with_g(0.2, -0.1, 50, 0.05).unwrap();
        let sub = plz_ica(
            &q,
            GapConvention::default(),
            SplittingSource::Subcritical(SubcriticalW0::default()),
        )
        .unwrap();
        assert!(sub.p_lz > 0.0 && sub.p_lz < 1.0);
    }

    #[test]
    fn two_level_examples() {
        let s = two_level_smatrix(1.0, -1.0, 0.0, 0.0, 0.2).unwrap();
        assert!((s.p - 0.93910).abs() < 1e-5);
        assert!((s.diabatic_probability() - 0.88191).abs() < 1e-5);
        assert!((s.diabatic_probability() - (-PI * 0.04f64).exp()).abs() < 1e-15);
        assert!((s.p * s.p + s.q * s.q - 1.0).abs() < 1e-15);
        let s = two_level_smatrix(1.0, -1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!((s.p, s.q), (1.0, 0.0));
        assert!(two_level_smatrix(1.0, 1.0, 0.0, 2.0, 0.1).is_err());
    }

    #[test]
    fn two_level_propagation_matches_formula() {
        let (b1, b2, v) = (0.7, -0.3, 0.25);
        let model = LinearSweepModel::new(
            vec![b1, b2],
            vec![0.5, -0.2],
            DMatrix::from_row_slice(2, 2, &[0.0, v, v, 0.0]),
        )
        .unwrap();
        let (t0, t1) = model.window(400.0).unwrap();
        let pops = model
            .propagate(0, t0, t1, &IntegratorConfig::default())
            .unwrap();
        let s = two_level_smatrix(b1, b2, 0.5, -0.2, v).unwrap();
        assert!(
            (pops[0] - s.diabatic_probability()).abs() < 2e-3,
            "{pops:?} vs {s:?}"
        );
    }

    #[test]
    fn three_level_uncoupled_is_identity() {
        let r = three_level_demo(0.2, 0.5, 0.0, 0.0, 40.0, &IntegratorConfig::default()).unwrap();
        assert!((r.s33_numeric - 1.0).abs() < 1e-12);
        assert!(r.s32_numeric < 1e-12 && r.s31_numeric < 1e-12);
        assert_eq!(r.s33_ica, 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn smatrix_row_is_distribution(p in prop::collection::vec(0.0f64..=1.0, 1..300)) {
            let row = ica_smatrix_row(&p).unwrap();
            prop_assert_eq!(row.len(), p.len() + 1);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|s| (0.0..=1.0).contains(s)));
            prop_assert!((plz_from_smatrix_row(&row) - plz_product_sum(&p)).abs() < 1e-12);
        }

        #[test]
        fn plz_monotone_in_each_p(
            p in prop::collection::vec(0.0f64..=1.0, 1..100),
            idx in any::<prop::sample::Index>(),
            bump in 0.0f64..=1.0,
        ) {
            let i = idx.index(p.len());
            let mut q = p.clone();
            q[i] = p[i] + (1.0 - p[i]) * bump;
            prop_assert!(plz_product_sum(&q) >= plz_product_sum(&p) - 1e-15);
        }
    }
}
