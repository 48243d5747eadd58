//! Data series behind the seven figures, one CSV per series plus a
//! `manifest.json` describing them.

use std::path::Path;

use serde_json::{json, Map, Value};

use lzbec::formula::{plz_closed_form, ClosedFormInput};
use lzbec::ica::{plz_ica, three_level_demo, three_level_model};
use lzbec::model::meanfield_stationary_energies;
use lzbec::propagate::{run_sweep_grid, GridAxis, WindowSpec, DEFAULT_SAMPLES};
use lzbec::spectrum::spectrum_slice;
use lzbec::ModelParams;

use crate::commands::w2_approx;
use crate::output::{linspace, logspace, Table};
use crate::settings::{CrossingArgs, SolverArgs, SourceArg};
use crate::CliError;

const GENERATOR: &str = concat!("lzbec-cli ", env!("CARGO_PKG_VERSION"));
const V: f64 = 0.2;

pub struct Request {
    pub id: u32,
    pub n: Option<usize>,
    pub points: Option<usize>,
    pub solver: SolverArgs,
    pub crossing: CrossingArgs,
}

impl Request {
    fn n(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    fn points(&self, default: usize) -> usize {
        self.points.unwrap_or(default)
    }
}

struct Series {
    name: String,
    table: Table,
}

#[derive(Default)]
struct Figure {
    title: &'static str,
    parameters: Map<String, Value>,
    series: Vec<Series>,
    failures: Vec<String>,
}

impl Figure {
    fn new(title: &'static str) -> Self {
        Self { title, ..Default::default() }
    }

    fn param(&mut self, key: &str, value: Value) {
        self.parameters.insert(key.into(), value);
    }

    fn add(&mut self, name: impl Into<String>, table: Table) {
        self.series.push(Series { name: name.into(), table });
    }
}

pub fn write_figure(req: &Request, dir: &Path) -> Result<(), CliError> {
    let figure = match req.id {
        1 => figure_1(req)?,
        2 => figure_2(req)?,
        3 => figure_3(req)?,
        4 => figure_4(req)?,
        5 => figure_5(req)?,
        6 => figure_6(req)?,
        7 => figure_7(req)?,
        other => return Err(CliError::Usage(format!("unknown figure {other} (expected 1 to 7)"))),
    };
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;

    let mut listed = Vec::new();
    for s in &figure.series {
        let file = format!("fig{}_{}.csv", req.id, s.name);
        s.table.write_file(&dir.join(&file))?;
        listed.push(json!({ "name": s.name, "file": file, "columns": s.table.columns }));
    }
    let mut config = Map::new();
    req.solver.to_json(&mut config);
    req.crossing.to_json(&mut config);
    let manifest = json!({
        "figure": req.id,
        "title": figure.title,
        "generator": GENERATOR,
        "parameters": figure.parameters,
        "config": config,
        "series": listed,
        "failures": figure.failures,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), text + "\n")
        .map_err(|e| CliError::Io(format!("cannot write manifest: {e}")))?;

    if figure.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "{} point(s) failed; written as NaN:\n  {}",
            figure.failures.len(),
            figure.failures.join("\n  ")
        )))
    }
}

fn tag(g: f64) -> String {
    format!("g{g}")
}

/// Mean-field stationary energies and many-particle levels per particle
/// against the bias.
fn figure_1(req: &Request) -> Result<Figure, CliError> {
    let (g, n) = (-1.0, req.n(20));
    let eps = linspace(-1.0, 1.0, req.points(201))?;
    let params = ModelParams::with_g(V, g, n, 1.0)?;

    let mut fig = Figure::new("stationary mean-field energies and many-particle levels");
    fig.param("v", json!(V));
    fig.param("g", json!(g));
    fig.param("n", json!(n));

    let mut mf = Table::new(["epsilon", "energy"]);
    for &e in &eps {
        for energy in meanfield_stationary_energies(&params, e) {
            mf.push(vec![e, energy]);
        }
    }
    let mut columns = vec!["epsilon".to_string()];
    columns.extend((0..=n).map(|k| format!("E{k}_per_particle")));
    let mut mb = Table::new(columns);
    for &e in &eps {
        let slice = spectrum_slice(&params, e)?;
        let mut row = vec![e];
        row.extend(slice.eigenvalues.iter().map(|x| x / n as f64));
        mb.push(row);
    }
    fig.add("meanfield", mf);
    fig.add("manybody", mb);
    Ok(fig)
}

/// ICA S-matrix row for three particles against the sweep rate.
fn figure_2(req: &Request) -> Result<Figure, CliError> {
    let (g, n) = (-1.0, 3);
    let alphas = logspace(0.01, 1.0, req.points(41))?;
    let mut fig = Figure::new("ICA S-matrix elements for three particles");
    fig.param("v", json!(V));
    fig.param("g", json!(g));
    fig.param("n", json!(n));

    let mut columns = vec!["alpha".to_string()];
    columns.extend((0..=n).map(|k| format!("S{k}{n}")));
    let mut table = Table::new(columns);
    for &alpha in &alphas {
        let params = ModelParams::with_g(V, g, n, alpha)?;
        let r = plz_ica(&params, req.crossing.convention()?, req.crossing.source(SourceArg::Exact))?;
        let mut row = vec![alpha];
        row.extend(r.s_row);
        table.push(row);
    }
    fig.add("smatrix", table);
    Ok(fig)
}

fn closed_form(g: f64, alpha: f64, crossing: &CrossingArgs) -> f64 {
    ClosedFormInput::with_constant(V, g, alpha, crossing.a())
        .and_then(|input| plz_closed_form(&input.with_w0_form(crossing.w0_form())))
        .map_or(f64::NAN, |c| c.value)
}

fn ica_value(params: &ModelParams, crossing: &CrossingArgs) -> f64 {
    let conv = match crossing.convention() {
        Ok(c) => c,
        Err(_) => return f64::NAN,
    };
    plz_ica(params, conv, crossing.source(SourceArg::Exact)).map_or(f64::NAN, |r| r.p_lz)
}

/// Propagated, ICA and closed-form probabilities along one grid axis.
fn scan(
    req: &Request,
    fig: &mut Figure,
    template: ModelParams,
    axis: GridAxis,
    axis_name: &str,
    values: &[f64],
) -> Result<Table, CliError> {
    let window = WindowSpec {
        factor: req.solver.window_factor(),
        samples: req.solver.samples.unwrap_or(DEFAULT_SAMPLES),
    };
    let config = req.solver.config()?;
    let points = run_sweep_grid(&template, axis, values, &window, &config);
    let mut table = Table::new([axis_name, "p_meanfield", "p_manybody", "p_ica", "p_formula"]);
    for point in points {
        let params = axis.apply(template, point.value)?;
        let mut unwrap = |label: &str, r: lzbec::Result<f64>| {
            r.unwrap_or_else(|e| {
                fig.failures.push(format!(
                    "{label} at g = {}, alpha = {}: {e}",
                    params.g(),
                    params.alpha()
                ));
                f64::NAN
            })
        };
        let mf = unwrap("meanfield", point.meanfield);
        let mb = unwrap("manybody", point.manybody);
        table.push(vec![
            point.value,
            mf,
            mb,
            ica_value(&params, &req.crossing),
            closed_form(params.g(), params.alpha(), &req.crossing),
        ]);
    }
    Ok(table)
}

/// Transition probability against the sweep rate for several interactions.
fn figure_3(req: &Request) -> Result<Figure, CliError> {
    let n = req.n(100);
    let gs = [-0.1, -0.5, -1.0];
    let alphas = logspace(0.01, 1.0, req.points(9))?;
    let mut fig = Figure::new("transition probability against sweep rate");
    fig.param("v", json!(V));
    fig.param("g", json!(gs));
    fig.param("n", json!(n));
    fig.param("alpha_range", json!([0.01, 1.0]));
    for g in gs {
        let template = ModelParams::with_g(V, g, n, alphas[0])?;
        let table = scan(req, &mut fig, template, GridAxis::Alpha, "alpha", &alphas)?;
        fig.add(tag(g), table);
    }
    Ok(fig)
}

/// Spectrum at zero bias, weak and strong interaction.
fn figure_4(req: &Request) -> Result<Figure, CliError> {
    let n = req.n(50);
    let gs = [-0.1, -2.0];
    let mut fig = Figure::new("many-particle spectrum at zero bias");
    fig.param("v", json!(V));
    fig.param("g", json!(gs));
    fig.param("n", json!(n));
    fig.param("epsilon", json!(0.0));
    for g in gs {
        let params = ModelParams::with_g(V, g, n, 1.0)?;
        let slice = spectrum_slice(&params, 0.0)?;
        let mut table = Table::new(["index", "energy"]);
        for (k, e) in slice.eigenvalues.iter().enumerate() {
            table.push(vec![k as f64, *e]);
        }
        fig.add(tag(g), table);
    }
    Ok(fig)
}

/// Squared splittings with their analytic approximation.
fn figure_5(req: &Request) -> Result<Figure, CliError> {
    let n = req.n(100);
    let gs = [-0.1, -1.0];
    let mut fig = Figure::new("squared level splittings");
    fig.param("v", json!(V));
    fig.param("g", json!(gs));
    fig.param("n", json!(n));
    for g in gs {
        let params = ModelParams::with_g(V, g, n, 1.0)?;
        let r = plz_ica(&params, req.crossing.convention()?, req.crossing.source(SourceArg::Exact))?;
        let mut table = Table::new(["x", "w2", "w2_approx"]);
        for c in &r.crossings {
            table.push(vec![c.x, c.w * c.w, w2_approx(&params, c.x, &req.crossing)]);
        }
        fig.add(tag(g), table);
    }
    Ok(fig)
}

/// Three-level model: diabatic and adiabatic curves and S-matrix elements.
fn figure_6(req: &Request) -> Result<Figure, CliError> {
    let (alpha, a, v, w) = (0.2, 0.5, 0.2, 0.3);
    let model = three_level_model(alpha, a, v, w)?;
    let span = 4.0 * a / alpha;
    let ts = linspace(-span, span, req.points(401))?;
    let mut fig = Figure::new("three-level model");
    for (k, val) in [("alpha", alpha), ("a", a), ("v", v), ("w", w)] {
        fig.param(k, json!(val));
    }

    let mut dia = Table::new(["t", "E1", "E2", "E3"]);
    let mut adia = Table::new(["t", "E1", "E2", "E3"]);
    for &t in &ts {
        let mut row = vec![t];
        row.extend((0..3).map(|i| model.diabatic(i, t)));
        dia.push(row);
        let mut row = vec![t];
        row.extend(model.adiabatic(t));
        adia.push(row);
    }
    fig.add("diabatic", dia);
    fig.add("adiabatic", adia);

    let r = three_level_demo(alpha, a, v, w, req.solver.window_factor(), &req.solver.config()?)?;
    let mut s = Table::new(["element", "numeric", "ica", "modified_ica"]);
    s.push(vec![33.0, r.s33_numeric, r.s33_ica, r.s33_modified_ica]);
    s.push(vec![32.0, r.s32_numeric, r.s32_ica, r.s32_modified_ica]);
    s.push(vec![31.0, r.s31_numeric, f64::NAN, f64::NAN]);
    fig.add("smatrix", s);
    Ok(fig)
}

/// Transition probability against the interaction at a slow sweep.
fn figure_7(req: &Request) -> Result<Figure, CliError> {
    let (alpha, n) = (0.01, req.n(100));
    let gs = linspace(-2.0, 0.0, req.points(11))?;
    let mut fig = Figure::new("transition probability against interaction strength");
    fig.param("v", json!(V));
    fig.param("alpha", json!(alpha));
    fig.param("n", json!(n));
    fig.param("g_range", json!([-2.0, 0.0]));
    let template = ModelParams::with_g(V, gs[0], n, alpha)?;
    let table = scan(req, &mut fig, template, GridAxis::G, "g", &gs)?;
    fig.add("scan", table);
    Ok(fig)
}
