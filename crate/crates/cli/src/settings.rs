//! Flag groups and their merge with a `key = value` config file.
//!
//! Every setting is optional on the command line so that a config file can
//! fill the gaps; explicit flags always win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};

use lzbec::ica::{GapConvention, SplittingSource};
use lzbec::spectrum::{PairRule, SplittingMethod, SplittingMode, SubcriticalW0, DEFAULT_XC_CONSTANT};
use lzbec::{IntegratorConfig, Method, ModelParams, SweepWindow};

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "v",
    "g",
    "gbar",
    "n",
    "alpha",
    "window_factor",
    "samples",
    "rel_tol",
    "abs_tol",
    "max_step",
    "max_steps",
    "method",
    "kappa",
    "a",
    "pair",
    "refine_min",
    "w0_form",
    "source",
    "out",
    "format",
];

/// Parsed config file; keys normalized to snake case.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", lineno + 1)));
            }
            entries.insert(key, value.trim().to_string());
        }
        if let Some(fmt) = entries.get("format") {
            if fmt != "csv" {
                return Err(CliError::Usage(format!("unsupported output format `{fmt}` (only csv)")));
            }
        }
        Ok(Self { entries })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`"))),
        }
    }

    fn get_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => T::from_str(raw, true)
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))),
        }
    }

    fn fill<T: std::str::FromStr>(&self, slot: &mut Option<T>, key: &str) -> Result<(), CliError> {
        if slot.is_none() {
            *slot = self.get(key)?;
        }
        Ok(())
    }

    fn fill_enum<T: ValueEnum>(&self, slot: &mut Option<T>, key: &str) -> Result<(), CliError> {
        if slot.is_none() {
            *slot = self.get_enum(key)?;
        }
        Ok(())
    }

    pub fn fill_source(&self, slot: &mut Option<SourceArg>) -> Result<(), CliError> {
        self.fill_enum(slot, "source")
    }
}

fn missing(flag: &str) -> CliError {
    CliError::Missing(format!("--{flag}"))
}

fn insert<T: Into<Value>>(map: &mut Map<String, Value>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        map.insert(key.into(), v.into());
    }
}

#[derive(Args, Debug, Clone, Default)]
#[command(next_help_heading = "Model")]
pub struct ModelArgs {
    /// Coupling v between the two modes
    #[arg(long, allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Effective nonlinearity g = ḡN
    #[arg(long, allow_negative_numbers = true, conflicts_with = "gbar")]
    pub g: Option<f64>,
    /// Bare two-particle interaction ḡ
    #[arg(long, allow_negative_numbers = true)]
    pub gbar: Option<f64>,
    /// Particle number N
    #[arg(long)]
    pub n: Option<usize>,
    /// Sweep rate α = dε/dt
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

impl ModelArgs {
    pub fn merge(&mut self, cfg: &ConfigFile) -> Result<(), CliError> {
        cfg.fill(&mut self.v, "v")?;
        if self.g.is_none() && self.gbar.is_none() {
            cfg.fill(&mut self.g, "g")?;
            cfg.fill(&mut self.gbar, "gbar")?;
            if self.g.is_some() && self.gbar.is_some() {
                return Err(CliError::Usage("config sets both g and gbar; give only one".into()));
            }
        }
        cfg.fill(&mut self.n, "n")?;
        cfg.fill(&mut self.alpha, "alpha")
    }

    pub fn require_alpha(&self) -> Result<f64, CliError> {
        self.alpha.ok_or_else(|| missing("alpha"))
    }

    /// Parameters with `N` falling back to `default_n` when absent.
    pub fn params_with(&self, alpha: f64, default_n: Option<usize>) -> Result<ModelParams, CliError> {
        let v = self.v.ok_or_else(|| missing("v"))?;
        let n = self.n.or(default_n).ok_or_else(|| missing("n"))?;
        let params = match (self.g, self.gbar) {
            (Some(g), None) => ModelParams::with_g(v, g, n, alpha),
            (None, Some(gbar)) => ModelParams::with_gbar(v, gbar, n, alpha),
            (None, None) => return Err(missing("g or --gbar")),
            (Some(_), Some(_)) => return Err(CliError::Usage("give only one of --g and --gbar".into())),
        };
        Ok(params?)
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        self.params_with(self.require_alpha()?, None)
    }

    pub fn to_json(&self, map: &mut Map<String, Value>) {
        insert(map, "v", self.v);
        insert(map, "g", self.g);
        insert(map, "gbar", self.gbar);
        insert(map, "n", self.n.map(|n| n as u64));
        insert(map, "alpha", self.alpha);
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    /// Adaptive Dormand-Prince 5(4)
    Dp45,
    /// Classical Runge-Kutta with step --max-step
    Rk4,
    /// Fourth-order Magnus with step --max-step (linear problems only)
    Magnus4,
}

#[derive(Args, Debug, Clone, Default)]
#[command(next_help_heading = "Propagation")]
pub struct SolverArgs {
    /// Window half-width in units of max(2v, |g|, 1)/α
    #[arg(long)]
    pub window_factor: Option<f64>,
    /// Number of recorded samples
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Largest (adaptive) or fixed (rk4, magnus4) step
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Step budget per propagation
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

impl SolverArgs {
    pub fn merge(&mut self, cfg: &ConfigFile) -> Result<(), CliError> {
        cfg.fill(&mut self.window_factor, "window_factor")?;
        cfg.fill(&mut self.samples, "samples")?;
        cfg.fill(&mut self.rel_tol, "rel_tol")?;
        cfg.fill(&mut self.abs_tol, "abs_tol")?;
        cfg.fill(&mut self.max_step, "max_step")?;
        cfg.fill(&mut self.max_steps, "max_steps")?;
        cfg.fill_enum(&mut self.method, "method")
    }

    pub fn window_factor(&self) -> f64 {
        self.window_factor.unwrap_or(lzbec::propagate::DEFAULT_WINDOW_FACTOR)
    }

    pub fn window(&self, params: &ModelParams) -> Result<SweepWindow, CliError> {
        let samples = self.samples.unwrap_or(lzbec::propagate::DEFAULT_SAMPLES);
        Ok(SweepWindow::for_params(params, self.window_factor(), samples)?)
    }

    pub fn config(&self) -> Result<IntegratorConfig, CliError> {
        let base = IntegratorConfig::default();
        let method = match self.method.unwrap_or(MethodArg::Dp45) {
            MethodArg::Dp45 => Method::DormandPrince45,
            MethodArg::Rk4 => Method::Rk4Fixed,
            MethodArg::Magnus4 => Method::Magnus4,
        };
        if method != Method::DormandPrince45 && self.max_step.is_none() {
            return Err(missing("max-step (required by fixed-step methods)"));
        }
        let cfg = IntegratorConfig {
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(base.abs_tol),
            max_step: self.max_step.unwrap_or(base.max_step),
            max_steps: self.max_steps.unwrap_or(base.max_steps),
            method,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self, map: &mut Map<String, Value>) {
        map.insert("window_factor".into(), json!(self.window_factor()));
        insert(map, "samples", self.samples.map(|s| s as u64));
        insert(map, "rel_tol", self.rel_tol);
        insert(map, "abs_tol", self.abs_tol);
        insert(map, "max_step", self.max_step);
        insert(map, "max_steps", self.max_steps);
        insert(map, "method", self.method.map(|m| format!("{m:?}").to_lowercase()));
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairArg {
    /// Adjacent pair ranked by the diabatic level count below h_N
    Rank,
    /// Adjacent pair closest in energy to h_N
    Nearest,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum W0Arg {
    /// w₀ = 2v + g/2 − 3g²/(32v)
    Rederived,
    /// w₀ = (16v² + 4g − 3g²/4)/(8v)
    Printed,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceArg {
    /// Exact diagonalization
    Exact,
    /// Supercritical w² profile
    Supercritical,
    /// Linear subcritical w profile
    Subcritical,
}

#[derive(Args, Debug, Clone, Default)]
#[command(next_help_heading = "Crossings")]
pub struct CrossingArgs {
    /// Exponent multiplier κ in p = exp(−κπw²/|b|); 0.5 gives the two-level
    /// convention on the full gap
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Fit constant of the critical index x_c = 1 − a√(2v/|g|)
    #[arg(long)]
    pub a: Option<f64>,
    /// Which adiabatic pair carries each crossing
    #[arg(long, value_enum)]
    pub pair: Option<PairArg>,
    /// Minimize each gap near its crossing instead of evaluating it there
    #[arg(long)]
    pub refine_min: bool,
    /// Constant term of the subcritical splitting
    #[arg(long, value_enum)]
    pub w0_form: Option<W0Arg>,
}

impl CrossingArgs {
    pub fn merge(&mut self, cfg: &ConfigFile) -> Result<(), CliError> {
        cfg.fill(&mut self.kappa, "kappa")?;
        cfg.fill(&mut self.a, "a")?;
        cfg.fill_enum(&mut self.pair, "pair")?;
        cfg.fill_enum(&mut self.w0_form, "w0_form")?;
        if !self.refine_min {
            self.refine_min = cfg.get("refine_min")?.unwrap_or(false);
        }
        Ok(())
    }

    pub fn convention(&self) -> Result<GapConvention, CliError> {
        Ok(GapConvention::new(self.kappa.unwrap_or(1.0))?)
    }

    pub fn a(&self) -> f64 {
        self.a.unwrap_or(DEFAULT_XC_CONSTANT)
    }

    pub fn method(&self) -> SplittingMethod {
        SplittingMethod {
            mode: if self.refine_min { SplittingMode::RefineMin } else { SplittingMode::AtCrossing },
            pair: match self.pair.unwrap_or(PairArg::Rank) {
                PairArg::Rank => PairRule::DiabaticRank,
                PairArg::Nearest => PairRule::NearestEnergy,
            },
        }
    }

    pub fn w0_form(&self) -> SubcriticalW0 {
        match self.w0_form.unwrap_or(W0Arg::Rederived) {
            W0Arg::Rederived => SubcriticalW0::Rederived,
            W0Arg::Printed => SubcriticalW0::AsPrinted,
        }
    }

    pub fn source(&self, which: SourceArg) -> SplittingSource {
        match which {
            SourceArg::Exact => SplittingSource::ExactDiagonalization(self.method()),
            SourceArg::Supercritical => SplittingSource::Supercritical { a: self.a() },
            SourceArg::Subcritical => SplittingSource::Subcritical(self.w0_form()),
        }
    }

    pub fn to_json(&self, map: &mut Map<String, Value>) {
        map.insert("kappa".into(), json!(self.kappa.unwrap_or(1.0)));
        map.insert("a".into(), json!(self.a()));
        map.insert("pair".into(), json!(format!("{:?}", self.pair.unwrap_or(PairArg::Rank)).to_lowercase()));
        map.insert("refine_min".into(), json!(self.refine_min));
        map.insert(
            "w0_form".into(),
            json!(format!("{:?}", self.w0_form.unwrap_or(W0Arg::Rederived)).to_lowercase()),
        );
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutArgs {
    /// Output CSV file [default: stdout, before the summary lines]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutArgs {
    pub fn merge(&mut self, cfg: &ConfigFile) -> Result<(), CliError> {
        cfg.fill(&mut self.out, "out")
    }
}
