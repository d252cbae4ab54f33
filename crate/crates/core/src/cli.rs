//! Experiment orchestration for the `permix` binary.
//!
//! Parameters come from an optional JSON config file, overridden by flags.
//! Data files are written only after the whole experiment has succeeded,
//! together with a `<out>.meta.json` sidecar that can be fed back through
//! `--config`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::class_chain::{build_transition, fixed_point_tv_lower, tv_profile, tv_profile_mc};
use crate::coupling::{curvature_lower_estimate, curvature_upper_estimate, fragmentation_samples, steps_at};
use crate::hypergraph::{component_stats, hypergraph_from_walk, DEFAULT_BETA};
use crate::pd::top_cycles_normalized;
use crate::perm::ConjClassSpec;
use crate::plot::{plot_file, PlotError, PlotKind};
use crate::seed::{derive_seed, rng_from_seed, run_replicates};
use crate::theta::{c_gamma, limit_profile, theta, LimitProfile};
use crate::walk::{fine_walk, walk_discrete, walk_poissonized, Uniformity, WalkConfig};

pub const WORKERS_ENV: &str = "PERMIX_WORKERS";
const DEFAULT_CLASS: &str = "2:1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Model(E::Resource(_)) | CliError::Plot(PlotError::Model(E::Resource(_))) => 3,
            CliError::Model(E::NoConvergence { .. } | E::UndefinedRatio(_) | E::NoBound(_)) => 1,
            CliError::Model(_) | CliError::Plot(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Walk,
    Theta,
    Giant,
    Curvature,
    Fragprob,
    Tvprofile,
    Tvlower,
    Pdtest,
    Plot,
}

#[derive(Debug, Parser)]
#[command(name = "permix", version, about = "Random walks on the symmetric group driven by a conjugacy class")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of replicates.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Worker threads; 0 uses every core. Defaults to $PERMIX_WORKERS.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON config file or metadata sidecar.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the walk and print the final permutation.
    Walk(WalkParams),
    /// Solve for the giant fraction θ(c).
    Theta(ThetaParams),
    /// Component sizes of the hypergraph process.
    Giant(GiantParams),
    /// Curvature estimates between id and a product of two transpositions.
    Curvature(CurvatureParams),
    /// Probability that a fresh transposition fragments a cycle.
    Fragprob(FragParams),
    /// Total-variation profile of the walk from the identity.
    Tvprofile(TvProfileParams),
    /// Fixed-point lower bound on the total-variation distance.
    Tvlower(TvLowerParams),
    /// Normalized largest cycles for comparison with Poisson–Dirichlet.
    Pdtest(PdParams),
    /// Render an experiment CSV as SVG.
    Plot(PlotParams),
    /// Run the experiment described by --config.
    Run,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum V {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Option::<V>::deserialize(d)?.map(|v| match v {
        V::One(x) => vec![x],
        V::Many(v) => v,
    }))
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkParams {
    #[arg(long)]
    pub n: Option<usize>,
    /// Cycle counts "j:c,...".
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub t: Option<u64>,
    /// Observe after a Poisson(t) number of steps.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub poisson: Option<bool>,
    /// Stop after this many single transpositions.
    #[arg(long)]
    pub fine: Option<u64>,
    /// strict or relaxed, for --fine.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaParams {
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Limit profile "j:k'_j,..."; overrides --class.
    #[arg(long)]
    pub profile: Option<String>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GiantParams {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub class: Option<String>,
    /// One or more comma-separated values.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub c: Option<Vec<f64>>,
    /// Components of size at least beta·ln n count as large.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Lower,
    Upper,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureParams {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub c: Option<Vec<f64>>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Length of the middle phase in transpositions.
    #[arg(long = "Delta")]
    #[serde(rename = "Delta")]
    pub big_delta: Option<u64>,
    #[arg(long, value_enum)]
    pub estimator: Option<Estimator>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragParams {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub c: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TvMode {
    Exact,
    Mc,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvProfileParams {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub tmax: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<TvMode>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvLowerParams {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub t: Option<u64>,
    /// Fixed-point threshold.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdParams {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Number of largest cycles kept.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotParams {
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, value_parser = ["tvprofile", "curvature_vs_c", "giant_vs_c"])]
    pub kind: Option<String>,
    /// Limit profile for the θ overlay; transpositions by default.
    #[arg(long)]
    pub profile: Option<String>,
}

/// A fully merged experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: Map<String, Value>,
    pub seed: u64,
    pub reps: Option<usize>,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    experiment: Option<Experiment>,
    #[serde(default)]
    params: Map<String, Value>,
    seed: Option<u64>,
    reps: Option<usize>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    // A metadata sidecar wraps the config.
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn flag_params<P: Serialize>(p: &P) -> Map<String, Value> {
    match serde_json::to_value(p) {
        Ok(Value::Object(m)) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| config_err(format!("{WORKERS_ENV}={v:?} is not a non-negative integer"))),
        _ => Ok(None),
    }
}

impl ExperimentConfig {
    /// Merges the config file (if any), the flags and the environment.
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.global.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let (experiment, flags) = match &cli.command {
            Command::Walk(p) => (Experiment::Walk, flag_params(p)),
            Command::Theta(p) => (Experiment::Theta, flag_params(p)),
            Command::Giant(p) => (Experiment::Giant, flag_params(p)),
            Command::Curvature(p) => (Experiment::Curvature, flag_params(p)),
            Command::Fragprob(p) => (Experiment::Fragprob, flag_params(p)),
            Command::Tvprofile(p) => (Experiment::Tvprofile, flag_params(p)),
            Command::Tvlower(p) => (Experiment::Tvlower, flag_params(p)),
            Command::Pdtest(p) => (Experiment::Pdtest, flag_params(p)),
            Command::Plot(p) => (Experiment::Plot, flag_params(p)),
            Command::Run => (
                file.experiment
                    .ok_or_else(|| config_err("`run` needs --config naming an experiment"))?,
                Map::new(),
            ),
        };
        if let Some(e) = file.experiment.filter(|&e| e != experiment) {
            return Err(config_err(format!(
                "config file describes {e:?}, command is {experiment:?}"
            )));
        }
        let mut params = file.params;
        params.extend(flags);
        let g = &cli.global;
        let workers = match g.workers.or(file.workers) {
            Some(w) => w,
            None => workers_from_env()?.unwrap_or(0),
        };
        let cfg = ExperimentConfig {
            experiment,
            params,
            seed: g.seed.or(file.seed).unwrap_or(0),
            reps: g.reps.or(file.reps),
            workers,
            out: g.out.clone().or(file.out),
            format: g.format.or(file.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn typed<P: DeserializeOwned>(&self) -> Result<P, CliError> {
        serde_json::from_value(Value::Object(self.params.clone()))
            .map_err(|e| config_err(format!("{:?} parameters: {e}", self.experiment)))
    }

    fn reps_or(&self, default: usize) -> Result<usize, CliError> {
        match self.reps.unwrap_or(default) {
            0 => Err(config_err("--reps must be positive")),
            r => Ok(r),
        }
    }

    /// Checks presence, types and ranges of all parameters without running
    /// anything.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.experiment {
            Experiment::Walk => {
                let p: WalkParams = self.typed()?;
                spec_of(p.n, p.class.as_deref())?;
                if p.t.is_none() && p.fine.is_none() {
                    return Err(config_err("walk needs --t or --fine"));
                }
                if p.fine.is_some() && p.poisson == Some(true) {
                    return Err(config_err("--fine and --poisson are exclusive"));
                }
                if let Some(m) = &p.mode {
                    m.parse::<Uniformity>()?;
                }
            }
            Experiment::Theta => {
                let p: ThetaParams = self.typed()?;
                theta_profile(&p)?;
                positive("c", require(p.c, "c")?)?;
            }
            Experiment::Giant => {
                let p: GiantParams = self.typed()?;
                spec_of(p.n, p.class.as_deref())?;
                c_list(&p.c)?;
                positive("beta", p.beta.unwrap_or(DEFAULT_BETA))?;
                self.reps_or(1)?;
            }
            Experiment::Curvature => {
                let p: CurvatureParams = self.typed()?;
                spec_of(p.n, p.class.as_deref())?;
                c_list(&p.c)?;
                let d = p.delta.unwrap_or(0.05);
                if !(d > 0.0 && d < 1.0) {
                    return Err(config_err(format!("--delta {d} must lie in (0, 1)")));
                }
                self.reps_or(1)?;
            }
            Experiment::Fragprob => {
                let p: FragParams = self.typed()?;
                spec_of(p.n, p.class.as_deref())?;
                c_list(&p.c)?;
                self.reps_or(1)?;
            }
            Experiment::Tvprofile => {
                let p: TvProfileParams = self.typed()?;
                spec_of(p.n, p.class.as_deref())?;
                require(p.tmax, "tmax")?;
                self.reps_or(1)?;
            }
            Experiment::Tvlower => {
                let p: TvLowerParams = self.typed()?;
                spec_of(p.n, p.class.as_deref())?;
                require(p.t, "t")?;
                if p.m == Some(0) {
                    return Err(config_err("--m must be positive"));
                }
                self.reps_or(1)?;
            }
            Experiment::Pdtest => {
                let p: PdParams = self.typed()?;
                spec_of(p.n, p.class.as_deref())?;
                positive("c", require(p.c, "c")?)?;
                if p.m == Some(0) {
                    return Err(config_err("--m must be positive"));
                }
                self.reps_or(1)?;
            }
            Experiment::Plot => {
                let p: PlotParams = self.typed()?;
                let csv = require(p.csv.as_deref(), "csv")?;
                if !csv.is_file() {
                    return Err(config_err(format!("{} is not a file", csv.display())));
                }
                plot_kind(&p)?;
                plot_profile(&p)?;
            }
        }
        Ok(())
    }
}

fn require<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| config_err(format!("missing --{name}")))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("--{name} {v} must be positive")))
    }
}

fn spec_of(n: Option<usize>, class: Option<&str>) -> Result<ConjClassSpec, CliError> {
    let n = require(n, "n")?;
    ConjClassSpec::parse(n, class.unwrap_or(DEFAULT_CLASS)).map_err(|e| config_err(e.to_string()))
}

fn c_list(c: &Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
    let c = require(c.clone(), "c")?;
    if c.is_empty() {
        return Err(config_err("missing --c"));
    }
    for &x in &c {
        positive("c", x)?;
    }
    Ok(c)
}

fn theta_profile(p: &ThetaParams) -> Result<LimitProfile, CliError> {
    if let Some(s) = &p.profile {
        return LimitProfile::parse(s).map_err(|e| config_err(e.to_string()));
    }
    LimitProfile::from_class(p.class.as_deref().unwrap_or(DEFAULT_CLASS)).map_err(|e| config_err(e.to_string()))
}

fn plot_kind(p: &PlotParams) -> Result<PlotKind, CliError> {
    require(p.kind.as_deref(), "kind")?
        .parse()
        .map_err(|e: PlotError| config_err(e.to_string()))
}

fn plot_profile(p: &PlotParams) -> Result<LimitProfile, CliError> {
    match &p.profile {
        Some(s) => LimitProfile::parse(s).map_err(|e| config_err(e.to_string())),
        None => Ok(LimitProfile::transpositions()),
    }
}

/// Rows with a fixed header, or a single record, or a finished document.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Table { headers: Vec<String>, rows: Vec<Vec<Value>> },
    Record(Map<String, Value>),
    Svg(String),
}

/// What an experiment produced: the data and a free-form summary recorded in
/// the sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub output: Output,
    pub summary: Map<String, Value>,
}

fn names(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(a) => a.iter().map(cell_text).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

impl Output {
    /// Renders in the requested format; tables default to CSV and records
    /// to JSON.
    pub fn render(&self, format: Option<Format>) -> Result<String, CliError> {
        match (self, format) {
            (Output::Svg(s), _) => Ok(s.clone()),
            (Output::Table { headers, rows }, None | Some(Format::Csv)) => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                w.write_record(headers).map_err(std::io::Error::from)?;
                for row in rows {
                    w.write_record(row.iter().map(cell_text)).map_err(std::io::Error::from)?;
                }
                let bytes = w.into_inner().map_err(|e| e.into_error())?;
                Ok(String::from_utf8_lossy(&bytes).into_owned())
            }
            (Output::Table { headers, rows }, Some(Format::Json)) => {
                let objs: Vec<Value> = rows
                    .iter()
                    .map(|r| Value::Object(headers.iter().cloned().zip(r.iter().cloned()).collect()))
                    .collect();
                Ok(serde_json::to_string_pretty(&objs).map_err(std::io::Error::from)? + "\n")
            }
            (Output::Record(m), None | Some(Format::Json)) => {
                Ok(serde_json::to_string_pretty(m).map_err(std::io::Error::from)? + "\n")
            }
            (Output::Record(m), Some(Format::Csv)) => Output::Table {
                headers: m.keys().cloned().collect(),
                rows: vec![m.values().cloned().collect()],
            }
            .render(Some(Format::Csv)),
        }
    }
}

/// Runs a validated experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    cfg.validate()?;
    let seed = cfg.seed;
    let workers = cfg.workers;
    let mut summary = Map::new();
    let output = match cfg.experiment {
        Experiment::Walk => {
            let p: WalkParams = cfg.typed()?;
            let spec = spec_of(p.n, p.class.as_deref())?;
            let wc = WalkConfig::from_identity(spec.clone(), seed);
            let mut rec = Map::new();
            rec.insert("n".into(), json!(spec.n()));
            rec.insert("class".into(), json!(spec.class_string()));
            let perm = if let Some(u) = p.fine {
                let mode: Uniformity = p.mode.as_deref().unwrap_or("strict").parse()?;
                let fw = fine_walk(&wc, u, mode);
                rec.insert("fine_steps".into(), json!(u));
                rec.insert("violations".into(), json!(fw.violations));
                fw.perm
            } else if p.poisson == Some(true) {
                let t = require(p.t, "t")?;
                let pw = walk_poissonized(&wc, t as f64)?;
                rec.insert("steps".into(), json!(pw.steps));
                pw.perm
            } else {
                let t = require(p.t, "t")?;
                rec.insert("steps".into(), json!(t));
                walk_discrete(&wc, t)
            };
            let ct = perm.cycle_type();
            rec.insert("permutation".into(), json!(perm.to_one_based()));
            rec.insert("cycle_type".into(), json!(crate::perm::format_counts(ct.counts())));
            Output::Record(rec)
        }
        Experiment::Theta => {
            let p: ThetaParams = cfg.typed()?;
            let profile = theta_profile(&p)?;
            let r = theta(require(p.c, "c")?, &profile)?;
            let mut rec = Map::new();
            rec.insert("c".into(), num(r.c));
            rec.insert("theta".into(), num(r.theta));
            rec.insert("complement".into(), num(r.complement));
            rec.insert("c_gamma".into(), num(c_gamma(&profile)));
            rec.insert("residual".into(), num(r.residual));
            rec.insert("iterations".into(), json!(r.iterations));
            Output::Record(rec)
        }
        Experiment::Giant => {
            let p: GiantParams = cfg.typed()?;
            let spec = spec_of(p.n, p.class.as_deref())?;
            let reps = cfg.reps_or(20)?;
            let beta = p.beta.unwrap_or(DEFAULT_BETA);
            let n = spec.n();
            let mut rows = Vec::new();
            for (ci, &c) in c_list(&p.c)?.iter().enumerate() {
                let s = steps_at(&spec, c) as usize;
                let stats = run_replicates(reps, derive_seed(seed, ci as u64), workers, |_, rs| {
                    let h = hypergraph_from_walk(&spec, s, &mut rng_from_seed(rs));
                    (rs, component_stats(&h, beta))
                });
                for (rs, st) in stats {
                    rows.push(vec![
                        json!(rs),
                        json!(n),
                        num(c),
                        num(st.largest as f64 / n as f64),
                        json!(st.second_largest),
                        num(st.fraction_large),
                    ]);
                }
            }
            Output::Table {
                headers: names(&["seed", "n", "c", "largest_frac", "second_largest", "fraction_large"]),
                rows,
            }
        }
        Experiment::Curvature => {
            let p: CurvatureParams = cfg.typed()?;
            let spec = spec_of(p.n, p.class.as_deref())?;
            let reps = cfg.reps_or(100)?;
            let delta = p.delta.unwrap_or(0.05);
            let mut rows = Vec::new();
            let mut estimates = Vec::new();
            let estimator = p.estimator.unwrap_or(Estimator::Lower);
            for (ci, &c) in c_list(&p.c)?.iter().enumerate() {
                let cs = derive_seed(seed, ci as u64);
                match estimator {
                    Estimator::Lower => {
                        let est = curvature_lower_estimate(&spec, c, reps, delta, p.big_delta, cs, workers)?;
                        for (r, rec) in est.records.iter().enumerate() {
                            rows.push(vec![
                                json!(r),
                                num(c),
                                json!(rec.final_distance),
                                json!(rec.a_delta_held),
                                json!(rec.matched_at_s2),
                            ]);
                        }
                        estimates.push(json!({
                            "c": c,
                            "estimate": est.estimate,
                            "schedule": est.schedule,
                            "violation_bound": est.violation_bound,
                        }));
                    }
                    Estimator::Upper => {
                        let est = curvature_upper_estimate(&spec, c, reps, cs, workers)?;
                        for (r, s) in est.samples.iter().enumerate() {
                            rows.push(vec![
                                json!(r),
                                num(c),
                                json!(s.pair_increment),
                                json!(s.single_increment),
                                json!(s.fragments),
                            ]);
                        }
                        estimates.push(json!({
                            "c": c,
                            "estimate": est.estimate,
                            "drift": est.drift,
                            "fragmentation": est.fragmentation,
                        }));
                    }
                }
            }
            summary.insert("estimates".into(), Value::Array(estimates));
            let headers = match estimator {
                Estimator::Lower => names(&["replicate", "c", "final_distance", "A_delta_held", "matched_at_s2"]),
                Estimator::Upper => names(&["replicate", "c", "pair_increment", "single_increment", "fragments"]),
            };
            Output::Table { headers, rows }
        }
        Experiment::Fragprob => {
            let p: FragParams = cfg.typed()?;
            let spec = spec_of(p.n, p.class.as_deref())?;
            let reps = cfg.reps_or(1000)?;
            let mut rows = Vec::new();
            let mut estimates = Vec::new();
            for (ci, &c) in c_list(&p.c)?.iter().enumerate() {
                let hits = fragmentation_samples(&spec, c, reps, derive_seed(seed, ci as u64), workers)?;
                let freq = hits.iter().filter(|&&h| h).count() as f64 / reps as f64;
                estimates.push(json!({ "c": c, "probability": freq }));
                rows.extend(hits.iter().enumerate().map(|(r, &h)| vec![json!(r), num(c), json!(h)]));
            }
            summary.insert("estimates".into(), Value::Array(estimates));
            Output::Table {
                headers: names(&["replicate", "c", "fragments"]),
                rows,
            }
        }
        Experiment::Tvprofile => {
            let p: TvProfileParams = cfg.typed()?;
            let spec = spec_of(p.n, p.class.as_deref())?;
            let tmax = require(p.tmax, "tmax")?;
            let profile = match p.mode.unwrap_or(TvMode::Exact) {
                TvMode::Exact => tv_profile(&build_transition(&spec)?, tmax),
                TvMode::Mc => tv_profile_mc(&spec, tmax, cfg.reps_or(1000)?, seed, workers),
            };
            Output::Table {
                headers: names(&["t", "tv_coset", "tv_poissonized"]),
                rows: profile
                    .iter()
                    .map(|pt| vec![json!(pt.t), num(pt.tv_coset), num(pt.tv_poissonized)])
                    .collect(),
            }
        }
        Experiment::Tvlower => {
            let p: TvLowerParams = cfg.typed()?;
            let spec = spec_of(p.n, p.class.as_deref())?;
            let t = require(p.t, "t")?;
            let m = p.m.unwrap_or(4);
            let b = fixed_point_tv_lower(&spec, t, m, cfg.reps_or(1000)?, seed, workers)?;
            let mut rec = Map::new();
            rec.insert("n".into(), json!(spec.n()));
            rec.insert("class".into(), json!(spec.class_string()));
            rec.insert("t".into(), json!(t));
            rec.insert("m".into(), json!(m));
            rec.insert("bound".into(), num(b.bound));
            rec.insert("walk_probability".into(), num(b.walk_probability));
            rec.insert("stationary_probability".into(), num(b.stationary_probability));
            rec.insert("exact".into(), json!(b.exact));
            Output::Record(rec)
        }
        Experiment::Pdtest => {
            let p: PdParams = cfg.typed()?;
            let spec = spec_of(p.n, p.class.as_deref())?;
            let c = require(p.c, "c")?;
            let m = p.m.unwrap_or(10);
            let reps = cfg.reps_or(100)?;
            let samples = run_replicates(reps, seed, workers, |_, s| {
                top_cycles_normalized(&spec, c, m, &mut rng_from_seed(s))
            })
            .into_iter()
            .collect::<crate::Result<Vec<_>>>()?;
            let s = steps_at(&spec, c);
            let c_eff = s as f64 * spec.size() as f64 / spec.n() as f64;
            summary.insert("normalization".into(), json!("n * theta(s k / n)"));
            summary.insert("steps".into(), json!(s));
            summary.insert("theta".into(), num(theta(c_eff, &limit_profile(&spec))?.theta));
            let rows = samples
                .iter()
                .enumerate()
                .flat_map(|(r, v)| v.iter().enumerate().map(move |(i, &x)| vec![json!(r), json!(i + 1), num(x)]))
                .collect();
            Output::Table {
                headers: names(&["replicate", "coord_index", "value"]),
                rows,
            }
        }
        Experiment::Plot => {
            let p: PlotParams = cfg.typed()?;
            let csv = require(p.csv.clone(), "csv")?;
            Output::Svg(plot_file(&csv, plot_kind(&p)?, &plot_profile(&p)?)?)
        }
    };
    Ok(Artifacts { output, summary })
}

/// `<out>.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = ExperimentConfig::from_cli(cli)?;
    let artifacts = run(&cfg)?;
    let body = artifacts.output.render(cfg.format)?;
    match &cfg.out {
        None => print!("{body}"),
        Some(out) => {
            let meta = json!({
                "config": cfg,
                "version": env!("CARGO_PKG_VERSION"),
                "wall_time_seconds": started.elapsed().as_secs_f64(),
                "summary": artifacts.summary,
            });
            let meta = serde_json::to_string_pretty(&meta).map_err(std::io::Error::from)? + "\n";
            std::fs::write(out, body)?;
            std::fs::write(sidecar_path(out), meta)?;
            if !artifacts.summary.is_empty() {
                println!("{}", Value::Object(artifacts.summary));
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the experiment and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("permix: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> Result<ExperimentConfig, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("permix").chain(args.iter().copied()))
            .map_err(|e| config_err(e.to_string()))?;
        ExperimentConfig::from_cli(&cli)
    }

    #[test]
    fn theta_record() {
        let c = cfg(&["theta", "--class", "2:1", "--c", "2"]).unwrap();
        let Output::Record(r) = run(&c).unwrap().output else { panic!() };
        assert!((r["theta"].as_f64().unwrap() - 0.796_812_1).abs() < 1e-7);
        assert_eq!(r["c_gamma"].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn theta_of_three_cycles_uses_limit_profile() {
        let c = cfg(&["theta", "--class", "3:1", "--c", "1"]).unwrap();
        let Output::Record(r) = run(&c).unwrap().output else { panic!() };
        assert_eq!(r["c_gamma"].as_f64().unwrap(), 0.5);
        assert!(r["theta"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn walk_at_zero_is_identity() {
        let c = cfg(&["walk", "--n", "3", "--class", "2:1", "--t", "0", "--seed", "1"]).unwrap();
        let Output::Record(r) = run(&c).unwrap().output else { panic!() };
        assert_eq!(r["permutation"], json!([1, 2, 3]));
        assert_eq!(r["cycle_type"], json!("1:3"));
    }

    #[test]
    fn missing_parameters_are_config_errors() {
        for args in [
            &["walk", "--n", "3"][..],
            &["theta"],
            &["giant", "--n", "100"],
            &["giant", "--c", "1"],
            &["walk", "--n", "3", "--class", "5:1", "--t", "1"],
            &["curvature", "--n", "100", "--c", "1", "--delta", "2"],
            &["pdtest", "--n", "100", "--c", "2", "--reps", "0"],
            &["plot", "--kind", "tvprofile", "--csv", "/nonexistent.csv"],
        ] {
            let e = cfg(args).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{args:?}: {e}");
        }
    }

    #[test]
    fn resource_errors_exit_three() {
        let c = cfg(&["tvprofile", "--n", "40", "--tmax", "2"]).unwrap();
        let e = run(&c).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"experiment":"giant","params":{"n":50,"c":[0.5,1.5]},"seed":9,"reps":3}"#,
        )
        .unwrap();
        let c = cfg(&["giant", "--config", path.to_str().unwrap(), "--n", "60"]).unwrap();
        assert_eq!(c.params["n"], json!(60));
        assert_eq!(c.params["c"], json!([0.5, 1.5]));
        assert_eq!((c.seed, c.reps), (9, Some(3)));
        let c = cfg(&["run", "--config", path.to_str().unwrap()]).unwrap();
        assert_eq!(c.experiment, Experiment::Giant);
        assert!(cfg(&["theta", "--config", path.to_str().unwrap()]).is_err());
        std::fs::write(&path, r#"{"experiment":"giant","params":{"n":50,"c":1,"bogus":1}}"#).unwrap();
        assert_eq!(cfg(&["run", "--config", path.to_str().unwrap()]).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn csv_rendering() {
        let out = Output::Table {
            headers: names(&["a", "b", "c"]),
            rows: vec![vec![json!(1), num(0.5), json!(true)], vec![json!(2), num(2.0), json!(false)]],
        };
        assert_eq!(out.render(None).unwrap(), "a,b,c\n1,0.5,true\n2,2.0,false\n");
        let j: Value = serde_json::from_str(&out.render(Some(Format::Json)).unwrap()).unwrap();
        assert_eq!(j[1]["b"], json!(2.0));
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("/tmp/x/stats.csv")), Path::new("/tmp/x/stats.csv.meta.json"));
    }
}
