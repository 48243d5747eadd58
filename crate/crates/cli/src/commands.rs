use lzbec::formula::{plz_closed_form, plz_subcritical, plz_supercritical, ClosedFormInput, Regime};
use lzbec::ica::plz_ica;
use lzbec::spectrum::{spectrum_slice, w2_supercritical, w_subcritical};
use lzbec::{integrate_manybody, integrate_meanfield, ModelParams};

use crate::output::Table;
use crate::settings::{CrossingArgs, ModelArgs, OutArgs, SolverArgs, SourceArg};
use crate::{CliError, SimKind};

pub fn sim(kind: SimKind, model: &ModelArgs, solver: &SolverArgs, out: &OutArgs) -> Result<(), CliError> {
    let alpha = model.require_alpha()?;
    let default_n = match kind {
        SimKind::Meanfield => Some(1),
        SimKind::Manybody => None,
    };
    let params = model.params_with(alpha, default_n)?;
    let window = solver.window(&params)?;
    let config = solver.config()?;
    let record = match kind {
        SimKind::Meanfield => integrate_meanfield(&params, &window, &config)?,
        SimKind::Manybody => integrate_manybody(&params, &window, &config)?,
    };

    let mut table = Table::new(["t", "epsilon", "n1_fraction", "norm"]);
    for i in 0..record.times.len() {
        table.push(vec![record.times[i], record.epsilon[i], record.n1_fraction[i], record.norm[i]]);
    }
    table.emit(out.out.as_deref())?;
    println!("particles={}", record.particles);
    println!("steps={}", record.steps);
    println!("max_norm_drift={:e}", record.max_norm_drift());
    println!("p_lz={:.12}", record.p_lz);
    Ok(())
}

pub fn spectrum(model: &ModelArgs, grid: &[f64], out: &OutArgs) -> Result<(), CliError> {
    // The spectrum does not depend on the sweep rate.
    let params = model.params_with(model.alpha.unwrap_or(1.0), None)?;
    let mut columns = vec!["epsilon".to_string()];
    columns.extend((0..=params.n()).map(|k| format!("E{k}")));
    let mut table = Table::new(columns);
    for &eps in grid {
        let slice = spectrum_slice(&params, eps)?;
        let mut row = vec![eps];
        row.extend(slice.eigenvalues);
        table.push(row);
    }
    table.emit(out.out.as_deref())
}

/// Regime-appropriate analytic `w²`, NaN where the approximation is undefined.
pub fn w2_approx(params: &ModelParams, x: f64, crossing: &CrossingArgs) -> f64 {
    if params.g().abs() > 2.0 * params.v().abs() {
        w2_supercritical(params, x, crossing.a()).map_or(f64::NAN, |w| w.value)
    } else {
        w_subcritical(params, x, crossing.w0_form()).map_or(f64::NAN, |w| w.value * w.value)
    }
}

pub fn splittings(model: &ModelArgs, crossing: &CrossingArgs, out: &OutArgs) -> Result<(), CliError> {
    let params = model.params_with(model.alpha.unwrap_or(1.0), None)?;
    let result = plz_ica(&params, crossing.convention()?, crossing.source(SourceArg::Exact))?;
    let mut table = Table::new(["ell", "x", "t_cross", "b", "w", "w2", "p", "w2_approx"]);
    for c in &result.crossings {
        table.push(vec![c.ell as f64, c.x, c.t_cross, c.b, c.w, c.w * c.w, c.p, w2_approx(&params, c.x, crossing)]);
    }
    table.emit(out.out.as_deref())
}

pub fn ica(model: &ModelArgs, crossing: &CrossingArgs, source: SourceArg, out: &OutArgs) -> Result<(), CliError> {
    let params = model.params()?;
    let result = plz_ica(&params, crossing.convention()?, crossing.source(source))?;
    let mut table = Table::new(["ell", "x", "t_cross", "b", "w", "p", "s"]);
    for c in &result.crossings {
        table.push(vec![c.ell as f64, c.x, c.t_cross, c.b, c.w, c.p, result.s_row[c.ell]]);
    }
    table.emit(out.out.as_deref())?;
    println!("s_final={:.12}", result.s_row[params.n()]);
    println!("p_lz_ica={:.12}", result.p_lz);
    Ok(())
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Supercritical => "supercritical",
        Regime::Subcritical => "subcritical",
    }
}

pub fn formula(model: &ModelArgs, crossing: &CrossingArgs) -> Result<(), CliError> {
    if crossing.kappa.is_some_and(|k| k != 1.0) {
        return Err(CliError::Usage("the closed forms are defined for kappa = 1 only".into()));
    }
    let alpha = model.require_alpha()?;
    let v = model.v.ok_or_else(|| CliError::Missing("--v".into()))?;
    let g = match (model.g, model.gbar) {
        (Some(g), _) => g,
        (None, Some(_)) => model.params_with(alpha, None)?.g(),
        (None, None) => return Err(CliError::Missing("--g or --gbar".into())),
    };
    let input = ClosedFormInput::with_constant(v, g, alpha, crossing.a())?.with_w0_form(crossing.w0_form());
    let result = plz_closed_form(&input)?;
    println!("regime={}", regime_name(result.regime));
    if g.abs() == 2.0 * v {
        // At the boundary report each branch that is defined there.
        if let Ok(p) = plz_supercritical(&input) {
            println!("p_lz_formula_supercritical={p:.12}");
        }
        if let Ok(p) = plz_subcritical(&input) {
            println!("p_lz_formula_subcritical={p:.12}");
        }
    }
    println!("p_lz_formula={:.12}", result.value);
    Ok(())
}
