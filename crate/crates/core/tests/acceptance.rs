//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Runs without the libtest harness so that every line is printed even when
//! earlier criteria fail.

use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use lzbec::formula::{
    plz_integral_form, plz_linear, plz_subcritical, plz_supercritical, supercritical_exponent,
    ClosedFormInput, IntegralFormConfig, SubcriticalLinearizedProfile, SupercriticalProfile,
};
use lzbec::gamma::{
    ln_gamma, lower_incomplete_gamma, regularized_lower_series, regularized_pair,
    regularized_upper_continued_fraction, scaled_lower_gamma, upper_incomplete_gamma,
};
use lzbec::ica::{
    ica_smatrix_row, plz_from_smatrix_row, plz_ica, plz_product_sum, three_level_demo,
    GapConvention, SplittingSource,
};
use lzbec::model::diabatic_level;
use lzbec::quadrature::{integrate, QuadratureConfig};
use lzbec::spectrum::{
    bogoliubov_frequency, critical_index, crossing_splittings, crossing_time, slope_difference,
    spectrum_slice, w2_supercritical, SplittingMethod,
};
use lzbec::{
    integrate_manybody, integrate_meanfield, IntegratorConfig, ModelParams, SweepRecord,
    SweepWindow,
};

/// Window factor for the linear-limit checks; the default window leaves
/// finite-time oscillations of a few 1e-3 in the final population.
const WIDE_WINDOW: f64 = 640.0;

/// Magnus step for the linear-limit checks: converged to about 1e-4 in the
/// final population across the tested rates.
fn magnus_step(alpha: f64) -> f64 {
    (0.025 / alpha).min(0.25)
}

struct RunSummary {
    label: String,
    drift: f64,
    n1_min: f64,
    n1_max: f64,
    particles: f64,
}

static RUNS: Mutex<Vec<RunSummary>> = Mutex::new(Vec::new());

fn record(label: String, r: &SweepRecord) {
    let n1: Vec<f64> = r.n1().collect();
    RUNS.lock().unwrap().push(RunSummary {
        label,
        drift: r.max_norm_drift(),
        n1_min: n1.iter().copied().fold(f64::INFINITY, f64::min),
        n1_max: n1.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        particles: r.particles as f64,
    });
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn params(v: f64, g: f64, n: usize, alpha: f64) -> ModelParams {
    ModelParams::with_g(v, g, n, alpha).unwrap()
}

/// Many-particle runs shared by criteria 8 and 13 (v = 0.2, g = −1, N = 100).
fn manybody_reference(alpha: f64) -> f64 {
    static CACHE: OnceLock<Mutex<Vec<(f64, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    if let Some(&(_, p)) = cache.lock().unwrap().iter().find(|(a, _)| *a == alpha) {
        return p;
    }
    let q = params(0.2, -1.0, 100, alpha);
    let w = SweepWindow::for_params(&q, 40.0, 201).unwrap();
    let r = integrate_manybody(&q, &w, &IntegratorConfig::default()).unwrap();
    record(format!("many-body N=100 g=-1 alpha={alpha}"), &r);
    cache.lock().unwrap().push((alpha, r.p_lz));
    r.p_lz
}

fn c1_linear_meanfield() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut lines = Vec::new();
    for alpha in [0.05, 0.1, 0.5] {
        let q = params(0.2, 0.0, 1, alpha);
        let w = SweepWindow::for_params(&q, WIDE_WINDOW, 101).unwrap();
        let start = Instant::now();
        let r = integrate_meanfield(&q, &w, &IntegratorConfig::magnus(magnus_step(alpha))).unwrap();
        slowest = slowest.max(start.elapsed());
        record(format!("mean-field g=0 alpha={alpha}"), &r);
        let want = plz_linear(0.2, alpha).unwrap();
        worst = worst.max((r.p_lz - want).abs());
        lines.push(format!("α={alpha}: {:.6} vs {want:.6}", r.p_lz));
    }
    outcome(
        worst <= 1e-3 && slowest < Duration::from_secs(1),
        format!(
            "{}; max err {worst:.2e}, slowest {slowest:.2?}",
            lines.join(", ")
        ),
    )
}

fn c2_linear_manybody() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slowest_n20 = Duration::ZERO;
    for n in [1, 10, 20] {
        for alpha in [0.05, 0.1, 0.5] {
            let q = params(0.2, 0.0, n, alpha);
            let w = SweepWindow::for_params(&q, WIDE_WINDOW, 101).unwrap();
            let start = Instant::now();
            let r =
                integrate_manybody(&q, &w, &IntegratorConfig::magnus(magnus_step(alpha))).unwrap();
            if n == 20 {
                slowest_n20 = slowest_n20.max(start.elapsed());
            }
            record(format!("many-body g=0 N={n} alpha={alpha}"), &r);
            worst = worst.max((r.p_lz - plz_linear(0.2, alpha).unwrap()).abs());
        }
    }
    outcome(
        worst <= 1e-3 && slowest_n20 < Duration::from_secs(10),
        format!("max err {worst:.2e} over N ∈ {{1,10,20}}, slowest N=20 run {slowest_n20:.2?}"),
    )
}

fn c3_conservation() -> Outcome {
    let runs = RUNS.lock().unwrap();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for r in runs.iter() {
        worst = worst.max(r.drift);
        let slack = 1e-9 * r.particles;
        if r.drift > 1e-6 || r.n1_min < -slack || r.n1_max > r.particles + slack {
            bad.push(r.label.clone());
        }
    }
    outcome(
        bad.is_empty() && !runs.is_empty(),
        format!(
            "{} runs, worst drift {worst:.2e}, violations: {bad:?}",
            runs.len()
        ),
    )
}

fn c4_spectral_structure() -> Outcome {
    let start = Instant::now();
    let weak = spectrum_slice(&params(0.2, -0.1, 50, 1.0), 0.0)
        .unwrap()
        .gaps();
    let mid = &weak[weak.len() / 4..3 * weak.len() / 4];
    let weak_dev = mid
        .iter()
        .map(|g| (g / 0.4 - 1.0).abs())
        .fold(0.0, f64::max);

    let strong_params = params(0.2, -2.0, 50, 1.0);
    let e = spectrum_slice(&strong_params, 0.0).unwrap().eigenvalues;
    let mut pair_ratio: f64 = 0.0;
    for k in 0..5 {
        let intra = e[2 * k + 1] - e[2 * k];
        let inter = e[2 * k + 2] - e[2 * k + 1];
        pair_ratio = pair_ratio.max(intra / inter);
    }
    let omega = bogoliubov_frequency(&strong_params).unwrap();
    let top = e[50] - e[49];
    let top_dev = (top / omega - 1.0).abs();
    let elapsed = start.elapsed();
    outcome(
        weak_dev <= 0.15
            && pair_ratio < 1e-4
            && top_dev <= 0.05
            && (omega - 0.97980).abs() < 1e-5
            && elapsed < Duration::from_secs(1),
        format!(
            "g=-0.1 mid gaps within {:.1}% of 2v; g=-2 intra/inter ≤ {pair_ratio:.1e}, \
             E_N−E_(N−1) = {top:.5} vs ω = {omega:.5} ({:.2}%), {elapsed:.2?}",
            100.0 * weak_dev,
            100.0 * top_dev
        ),
    )
}

fn c5_crossing_identities() -> Outcome {
    let q = params(0.2, -1.0, 100, 0.01);
    let (mut worst_rel, mut worst_b): (f64, f64) = (0.0, 0.0);
    for ell in 0..100 {
        let t = crossing_time(&q, ell).unwrap();
        let hn = diabatic_level(&q, 100, t).unwrap();
        let hl = diabatic_level(&q, ell, t).unwrap();
        worst_rel = worst_rel.max((hn - hl).abs() / hn.abs().max(1.0));
        let b = slope_difference(&q, ell).unwrap();
        worst_b = worst_b.max((b - 2.0 * 0.01 * (100 - ell) as f64).abs());
    }
    outcome(
        worst_rel <= 1e-12 && worst_b == 0.0,
        format!("max level mismatch {worst_rel:.1e} (rel), max slope mismatch {worst_b:.1e}"),
    )
}

fn c6_splitting_profile() -> Outcome {
    let q = params(0.2, -1.0, 100, 0.01);
    let omega2 = bogoliubov_frequency(&q).unwrap().powi(2);
    let w = crossing_splittings(&q, SplittingMethod::default()).unwrap();
    let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
    let low = (0..100)
        .filter(|&l| (l as f64) < 20.0)
        .map(|l| w2[l])
        .fold(0.0, f64::max);
    let end_dev = (w2[99] / omega2 - 1.0).abs();
    let xc = critical_index(&q, 1.14);
    let mut line_dev: f64 = 0.0;
    for (l, &exact) in w2.iter().enumerate() {
        let x = l as f64 / 100.0;
        if x >= xc + 0.05 {
            let approx = w2_supercritical(&q, x, 1.14).unwrap().value;
            line_dev = line_dev.max((approx - exact).abs());
        }
    }
    outcome(
        low < 0.05 * omega2 && end_dev <= 0.10 && line_dev <= 0.15 * omega2,
        format!(
            "max w²/ω² below x=0.2: {:.2e}; w²(x_99)/ω² = {:.3}; profile line max dev {:.3} ω²",
            low / omega2,
            w2[99] / omega2,
            line_dev / omega2
        ),
    )
}

fn c7_ica_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut worst_plz, mut worst_sum): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=500);
        let p: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powf(0.02)).collect();
        let row = ica_smatrix_row(&p).unwrap();
        worst_plz = worst_plz.max((plz_from_smatrix_row(&row) - plz_product_sum(&p)).abs());
        worst_sum = worst_sum.max((row.iter().sum::<f64>() - 1.0).abs());
    }
    outcome(
        worst_plz <= 1e-12 && worst_sum <= 1e-12,
        format!("1000 vectors: max |ΔP| {worst_plz:.1e}, max |Σ−1| {worst_sum:.1e}"),
    )
}

fn c8_ica_vs_manybody() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for alpha in [0.01, 0.03, 0.1] {
        let q = params(0.2, -1.0, 100, alpha);
        let ica = plz_ica(&q, GapConvention::default(), SplittingSource::default())
            .unwrap()
            .p_lz;
        let mb = manybody_reference(alpha);
        worst = worst.max((ica - mb).abs());
        lines.push(format!("α={alpha}: ICA {ica:.4} MB {mb:.4}"));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 0.1 && elapsed < Duration::from_secs(300),
        format!("{}; max diff {worst:.3}, {elapsed:.1?}", lines.join(", ")),
    )
}

fn c9_closed_vs_integral() -> Outcome {
    let cfg = IntegralFormConfig::default();
    let alphas: Vec<f64> = (0..12)
        .map(|i| 0.005 * 200f64.powf(i as f64 / 11.0))
        .collect();
    let (mut worst_sup, mut worst_sub): (f64, f64) = (0.0, 0.0);
    for g in [-0.5, -1.0, -2.0] {
        for &alpha in &alphas {
            let inp = ClosedFormInput::new(0.2, g, alpha).unwrap();
            let closed = plz_supercritical(&inp).unwrap();
            let integral = plz_integral_form(
                &SupercriticalProfile::from_input(&inp).unwrap(),
                alpha,
                &cfg,
            )
            .unwrap();
            worst_sup = worst_sup.max((closed - integral).abs());
        }
    }
    for g in [0.0, -0.1, -0.2, -0.3] {
        for &alpha in &alphas {
            let inp = ClosedFormInput::new(0.2, g, alpha).unwrap();
            let closed = plz_subcritical(&inp).unwrap();
            let profile = SubcriticalLinearizedProfile::from_input(&inp).unwrap();
            let integral = plz_integral_form(&profile, alpha, &cfg).unwrap();
            worst_sub = worst_sub.max((closed - integral).abs());
        }
    }
    outcome(
        worst_sup <= 1e-6 && worst_sub <= 1e-6,
        format!("supercritical max diff {worst_sup:.1e}, subcritical max diff {worst_sub:.1e}"),
    )
}

fn c10_adiabatic_plateau() -> Outcome {
    let base = ClosedFormInput::new(0.2, -1.0, 1.0).unwrap();
    let xc = critical_index(&base, 1.14);
    let mut ok = (xc - 0.27901).abs() <= 1e-5;
    let mut worst_ratio: f64 = 0.0;
    for alpha in [0.05, 0.01, 1e-3, 1e-4, 1e-6] {
        let inp = ClosedFormInput::new(0.2, -1.0, alpha).unwrap();
        let u = supercritical_exponent(&inp).unwrap();
        if u < 100.0 {
            continue;
        }
        let gap = plz_supercritical(&inp).unwrap() - xc;
        let bound = (2.0 * PI / u).sqrt();
        ok &= gap >= 0.0 && gap <= bound;
        worst_ratio = worst_ratio.max(gap / bound);
    }
    outcome(
        ok,
        format!("x_c = {xc:.6}; max (P − x_c)/√(2π/u) = {worst_ratio:.3}"),
    )
}

fn c11_incomplete_gamma() -> Outcome {
    let g11 = lower_incomplete_gamma(1.0, 1.0).unwrap();
    let g051 = lower_incomplete_gamma(0.5, 1.0).unwrap();
    let mut ok = (g11 - 0.632121).abs() < 1e-6 && (g051 - 1.493648).abs() < 1e-6;

    // Series and continued fraction are independent routes to P and Q. They
    // overlap just above x = s + 1: the fraction needs x > s + 1 and the
    // series sum grows like e^{(x−s)²/2s}.
    let mut worst: f64 = 0.0;
    let ss: [f64; 9] = [0.5, 1.0, 2.5, 7.0, 30.0, 100.0, 170.0, 400.0, 1000.0];
    for &s in &ss {
        for x in [s + 1.0, s + 1.0 + s.sqrt(), s + 1.0 + 3.0 * s.sqrt()] {
            let p = regularized_lower_series(s, x).unwrap();
            let q = regularized_upper_continued_fraction(s, x).unwrap();
            worst = worst.max((p + q - 1.0).abs());
        }
        for f in [0.01, 0.3, 0.8, 1.0, 1.2, 2.0, 5.0] {
            let x: f64 = s * f;
            let (p, q) = regularized_pair(s, x).unwrap();
            worst = worst.max((p - statrs::function::gamma::gamma_lr(s, x)).abs());
            worst = worst.max((q - statrs::function::gamma::gamma_ur(s, x)).abs());
            if s < 170.0 {
                let gamma_s = ln_gamma(s).exp();
                let sum =
                    lower_incomplete_gamma(s, x).unwrap() + upper_incomplete_gamma(s, x).unwrap();
                worst = worst.max((sum / gamma_s - 1.0).abs());
            }
        }
    }
    ok &= worst <= 1e-10;

    // u = 1e4: e^u u^{−(u+1)} γ(u+1, u) = ∫₀¹ τ^u e^{u(1−τ)} dτ.
    let u = 1e4;
    let prefactor = scaled_lower_gamma(u + 1.0, u).unwrap();
    let cfg = QuadratureConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let breaks: Vec<f64> = (1..40).map(|k| 1.0 - k as f64 * 0.25 / u.sqrt()).collect();
    let oracle = integrate(
        |t: f64| (u * (t.ln() + 1.0 - t)).exp(),
        0.0,
        1.0,
        &breaks,
        &cfg,
    )
    .unwrap();
    let pre_err = (prefactor / oracle - 1.0).abs();
    ok &= prefactor.is_finite() && pre_err < 1e-9;
    outcome(
        ok,
        format!(
            "γ(1,1)={g11:.6}, γ(0.5,1)={g051:.6}, max |P+Q−1| {worst:.1e}, \
             prefactor at u=1e4 {prefactor:.10} (rel err {pre_err:.1e})"
        ),
    )
}

fn c12_three_level() -> Outcome {
    let start = Instant::now();
    let r = three_level_demo(0.2, 0.5, 0.2, 0.3, 160.0, &IntegratorConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let diff = (r.s33_numeric - r.s33_ica).abs();
    outcome(
        r.s32_numeric > 1e-4
            && r.s32_ica == 0.0
            && diff <= 0.02
            && elapsed < Duration::from_secs(10),
        format!(
            "|S32|² = {:.4} (ICA {}), |S33|² = {:.4} vs ICA {:.4}, {elapsed:.2?}",
            r.s32_numeric, r.s32_ica, r.s33_numeric, r.s33_ica
        ),
    )
}

fn c13_meanfield_vs_manybody() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for alpha in [0.01, 0.1, 1.0] {
        let q = params(0.2, -1.0, 100, alpha);
        let w = SweepWindow::for_params(&q, 40.0, 201).unwrap();
        let mf = integrate_meanfield(&q, &w, &IntegratorConfig::default()).unwrap();
        record(format!("mean-field g=-1 alpha={alpha}"), &mf);
        let mb = manybody_reference(alpha);
        worst = worst.max((mf.p_lz - mb).abs());
        lines.push(format!("α={alpha}: MF {:.4} MB {mb:.4}", mf.p_lz));
    }
    outcome(
        worst <= 0.05,
        format!("{}; max diff {worst:.4}", lines.join(", ")),
    )
}

fn main() {
    // Criterion 3 audits the runs of the others, so it is evaluated last.
    let order: [(usize, &str, fn() -> Outcome); 12] = [
        (1, "linear limit, mean-field", c1_linear_meanfield),
        (2, "linear limit, many-body", c2_linear_manybody),
        (4, "spectral structure", c4_spectral_structure),
        (5, "crossing identities", c5_crossing_identities),
        (6, "splitting profile", c6_splitting_profile),
        (7, "ICA internal identity", c7_ica_identity),
        (8, "ICA vs many-body", c8_ica_vs_manybody),
        (9, "closed form vs integral form", c9_closed_vs_integral),
        (10, "adiabatic plateau", c10_adiabatic_plateau),
        (11, "incomplete gamma", c11_incomplete_gamma),
        (12, "three-level demo", c12_three_level),
        (13, "mean-field vs many-body", c13_meanfield_vs_manybody),
    ];
    let mut results: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    for (id, name, f) in order {
        let start = Instant::now();
        let out = f();
        results.push((id, name, out, start.elapsed()));
    }
    let start = Instant::now();
    let c3 = c3_conservation();
    results.push((3, "conservation", c3, start.elapsed()));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, out, took) in &results {
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} [{tag}] {name}: {} ({took:.1?})",
            out.detail
        );
        failed += usize::from(!out.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
