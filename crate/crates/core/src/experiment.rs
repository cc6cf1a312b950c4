//! JSON-configured experiments producing CSV rows plus a JSON sidecar.
//!
//! The config schema is documented in `docs/config.md`. Rates are computed in
//! nats and written in bits.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::correlation::{jakes_correlation, scenario_two_user, AngularSpread, ArrayGeometry, CorrelationMatrix, Side};
use crate::det_equiv::{shannon_de_with, FixedPointOptions, DEFAULT_TOLERANCE};
use crate::error::Error;
use crate::monte_carlo::ergodic_estimate;
use crate::system::{PrecoderSet, SystemConfig, UserLink, UserSubset};
use crate::waterfill::{iterative_waterfill_with, WaterfillOptions};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_ETA: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Numerical { context: String, source: Error },
    #[error("{0}")]
    NotConverged(String),
}

impl ExperimentError {
    /// 2 for configuration and I/O problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ReadConfig { .. } | Self::Invalid(_) | Self::Write { .. } => 2,
            Self::Numerical { source, .. } if !source.is_non_convergence() => match source {
                Error::InvalidInput(_) | Error::DimensionMismatch(_) => 2,
                _ => 3,
            },
            Self::Numerical { .. } | Self::NotConverged(_) => 3,
        }
    }

    fn numerical(context: impl Into<String>) -> impl FnOnce(Error) -> Self {
        let context = context.into();
        move |source| Self::Numerical { context, source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    TwoUserLinear,
    TwoUserCubic,
    Custom,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Self::TwoUserLinear => "two_user_linear",
            Self::TwoUserCubic => "two_user_cubic",
            Self::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precoding {
    Uniform,
    Optimal,
}

impl Precoding {
    pub fn label(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Optimal => "optimal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Linear,
    Cubic,
}

impl From<Geometry> for ArrayGeometry {
    fn from(g: Geometry) -> Self {
        match g {
            Geometry::Linear => ArrayGeometry::Linear,
            Geometry::Cubic => ArrayGeometry::Cubic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub epsilon_fp: f64,
    pub eta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            epsilon_fp: DEFAULT_TOLERANCE,
            eta: DEFAULT_ETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomUser {
    /// `[theta_min, theta_max]` in radians; `null` means `T = I`.
    pub transmit_spread: Option<[f64; 2]>,
    /// `null` means `R = I`.
    pub receive_spread: Option<[f64; 2]>,
    pub budget: f64,
    /// Transmit antennas; defaults to the receive array size.
    pub n_tx: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    pub geometry: Geometry,
    pub users: Vec<CustomUser>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Receive array sizes `N`, one block of rows each.
    pub sizes: Vec<usize>,
    pub spacing_over_lambda: f64,
    pub snr_db: f64,
    pub precoding: Vec<Precoding>,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// CSV destination, relative to the config file's directory.
    pub output_path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomScenario>,
}

fn is_number(v: &Value) -> bool {
    v.as_f64().is_some()
}

fn is_count(v: &Value) -> bool {
    v.as_u64().is_some()
}

fn is_spread(v: &Value) -> bool {
    v.is_null() || v.as_array().is_some_and(|a| a.len() == 2 && a.iter().all(is_number))
}

// Type checks on the raw JSON so every offending key is reported at once.
fn check_shape(root: &Value) -> Vec<String> {
    let mut problems = Vec::new();
    let Some(obj) = root.as_object() else {
        return vec!["<root>: expected a JSON object".into()];
    };
    let known = [
        "scenario",
        "sizes",
        "spacing_over_lambda",
        "snr_db",
        "precoding",
        "trials",
        "seed",
        "tolerances",
        "output_path",
        "custom",
    ];
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            problems.push(format!("{key}: unknown key"));
        }
    }
    let mut expect = |key: &str, ok: bool, what: &str, optional: bool| match obj.get(key) {
        None if optional => {}
        None => problems.push(format!("{key}: missing, expected {what}")),
        Some(_) if ok => {}
        Some(v) => problems.push(format!("{key}: expected {what}, got {v}")),
    };
    let get = |key: &str| obj.get(key).unwrap_or(&Value::Null);
    expect(
        "scenario",
        get("scenario").as_str().is_some_and(|s| ["two_user_linear", "two_user_cubic", "custom"].contains(&s)),
        "one of \"two_user_linear\", \"two_user_cubic\", \"custom\"",
        false,
    );
    expect(
        "sizes",
        get("sizes").as_array().is_some_and(|a| !a.is_empty() && a.iter().all(is_count)),
        "a nonempty array of antenna counts",
        false,
    );
    expect("spacing_over_lambda", is_number(get("spacing_over_lambda")), "a number", false);
    expect("snr_db", is_number(get("snr_db")), "a number", false);
    expect(
        "precoding",
        get("precoding")
            .as_array()
            .is_some_and(|a| !a.is_empty() && a.iter().all(|p| matches!(p.as_str(), Some("uniform" | "optimal")))),
        "a nonempty array of \"uniform\" / \"optimal\"",
        false,
    );
    expect("trials", is_count(get("trials")), "a nonnegative integer", false);
    expect("seed", is_count(get("seed")), "a nonnegative integer", false);
    expect("output_path", get("output_path").as_str().is_some_and(|s| !s.is_empty()), "a nonempty string", false);
    expect("tolerances", get("tolerances").is_object(), "an object", true);
    expect("custom", get("custom").is_object() || get("custom").is_null(), "an object", true);

    if let Some(tol) = obj.get("tolerances").and_then(Value::as_object) {
        for (key, v) in tol {
            match key.as_str() {
                "epsilon_fp" | "eta" if is_number(v) => {}
                "epsilon_fp" | "eta" => problems.push(format!("tolerances.{key}: expected a number, got {v}")),
                _ => problems.push(format!("tolerances.{key}: unknown key")),
            }
        }
    }
    if let Some(custom) = obj.get("custom").and_then(Value::as_object) {
        for (key, v) in custom {
            match key.as_str() {
                "geometry" if matches!(v.as_str(), Some("linear" | "cubic")) => {}
                "geometry" => problems.push(format!("custom.geometry: expected \"linear\" or \"cubic\", got {v}")),
                "users" => match v.as_array() {
                    Some(users) if !users.is_empty() => {
                        for (i, u) in users.iter().enumerate() {
                            let Some(u) = u.as_object() else {
                                problems.push(format!("custom.users[{i}]: expected an object"));
                                continue;
                            };
                            for (field, fv) in u {
                                let ok = match field.as_str() {
                                    "transmit_spread" | "receive_spread" => is_spread(fv),
                                    "budget" => is_number(fv),
                                    "n_tx" => fv.is_null() || is_count(fv),
                                    _ => {
                                        problems.push(format!("custom.users[{i}].{field}: unknown key"));
                                        continue;
                                    }
                                };
                                if !ok {
                                    problems.push(format!("custom.users[{i}].{field}: malformed value {fv}"));
                                }
                            }
                            if !u.contains_key("budget") {
                                problems.push(format!("custom.users[{i}].budget: missing"));
                            }
                        }
                    }
                    _ => problems.push("custom.users: expected a nonempty array".into()),
                },
                _ => problems.push(format!("custom.{key}: unknown key")),
            }
        }
        for key in ["geometry", "users"] {
            if !custom.contains_key(key) {
                problems.push(format!("custom.{key}: missing"));
            }
        }
    }
    problems
}

impl ExperimentConfig {
    /// Parses and validates a config, filling defaults.
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let mut root: Value =
            serde_json::from_str(text).map_err(|e| ExperimentError::Invalid(vec![format!("<root>: {e}")]))?;
        let problems = check_shape(&root);
        if !problems.is_empty() {
            return Err(ExperimentError::Invalid(problems));
        }
        let obj = root.as_object_mut().expect("checked object");
        let defaults = Tolerances::default();
        let tol = obj
            .entry("tolerances")
            .or_insert_with(|| Value::Object(Default::default()))
            .as_object_mut()
            .expect("checked object");
        tol.entry("epsilon_fp").or_insert(defaults.epsilon_fp.into());
        tol.entry("eta").or_insert(defaults.eta.into());
        if let Some(users) = obj.get_mut("custom").and_then(|c| c.get_mut("users")).and_then(Value::as_array_mut) {
            for u in users.iter_mut().filter_map(Value::as_object_mut) {
                for key in ["transmit_spread", "receive_spread", "n_tx"] {
                    u.entry(key).or_insert(Value::Null);
                }
            }
        }
        let cfg: Self = serde_json::from_value(root).map_err(|e| ExperimentError::Invalid(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Canonical JSON form: defaults filled, keys in schema order.
    pub fn normalized_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut problems = Vec::new();
        if self.sizes.contains(&0) {
            problems.push("sizes: every size must be at least 1".into());
        }
        let geometry = match (self.scenario, &self.custom) {
            (Scenario::TwoUserLinear, _) => Some(Geometry::Linear),
            (Scenario::TwoUserCubic, _) => Some(Geometry::Cubic),
            (Scenario::Custom, Some(c)) => Some(c.geometry),
            (Scenario::Custom, None) => {
                problems.push("custom: required when scenario is \"custom\"".into());
                None
            }
        };
        if self.scenario != Scenario::Custom && self.custom.is_some() {
            problems.push("custom: only allowed when scenario is \"custom\"".into());
        }
        if geometry == Some(Geometry::Cubic) {
            let bad: Vec<String> = self
                .sizes
                .iter()
                .filter(|&&n| ArrayGeometry::Cubic.array(n, 1.0, 1.0).is_err())
                .map(|n| n.to_string())
                .collect();
            if !bad.is_empty() {
                problems.push(format!("sizes: {} not perfect cubes for a cubic array", bad.join(", ")));
            }
        }
        if !(self.spacing_over_lambda > 0.0) {
            problems.push(format!("spacing_over_lambda: must be positive, got {}", self.spacing_over_lambda));
        }
        if !self.snr_db.is_finite() {
            problems.push("snr_db: must be finite".into());
        }
        if self.trials == 1 {
            problems.push("trials: must be 0 (no Monte Carlo) or at least 2".into());
        }
        if !(self.tolerances.epsilon_fp > 0.0) {
            problems.push(format!("tolerances.epsilon_fp: must be positive, got {}", self.tolerances.epsilon_fp));
        }
        if !(self.tolerances.eta > 0.0) {
            problems.push(format!("tolerances.eta: must be positive, got {}", self.tolerances.eta));
        }
        let mut seen = Vec::new();
        for p in &self.precoding {
            if seen.contains(p) {
                problems.push(format!("precoding: \"{}\" listed twice", p.label()));
            }
            seen.push(*p);
        }
        if let Some(c) = &self.custom {
            if c.users.is_empty() || c.users.len() > crate::system::MAX_USERS {
                problems.push(format!("custom.users: between 1 and {} users", crate::system::MAX_USERS));
            }
            for (i, u) in c.users.iter().enumerate() {
                if !(u.budget > 0.0 && u.budget.is_finite()) {
                    problems.push(format!("custom.users[{i}].budget: must be positive, got {}", u.budget));
                }
                if u.n_tx == Some(0) {
                    problems.push(format!("custom.users[{i}].n_tx: must be at least 1"));
                }
                if let Some(n) = u.n_tx {
                    if c.geometry == Geometry::Cubic && ArrayGeometry::Cubic.array(n, 1.0, 1.0).is_err() {
                        problems.push(format!("custom.users[{i}].n_tx: {n} is not a perfect cube"));
                    }
                }
                for (name, spread) in [("transmit_spread", u.transmit_spread), ("receive_spread", u.receive_spread)] {
                    if let Some([a, b]) = spread {
                        if let Err(e) = AngularSpread::new(a, b) {
                            problems.push(format!("custom.users[{i}].{name}: {e}"));
                        }
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::Invalid(problems))
        }
    }

    /// System for receive array size `n` at the configured SNR.
    pub fn system(&self, n: usize) -> Result<SystemConfig, Error> {
        let base = match self.scenario {
            Scenario::TwoUserLinear => scenario_two_user(ArrayGeometry::Linear, n, self.spacing_over_lambda, 1.0)?,
            Scenario::TwoUserCubic => scenario_two_user(ArrayGeometry::Cubic, n, self.spacing_over_lambda, 1.0)?,
            Scenario::Custom => {
                let custom = self.custom.as_ref().ok_or_else(|| Error::InvalidInput("missing custom block".into()))?;
                custom_system(custom, n, self.spacing_over_lambda)?
            }
        };
        base.with_snr_db(self.snr_db)
    }
}

fn custom_system(custom: &CustomScenario, n_rx: usize, spacing: f64) -> Result<SystemConfig, Error> {
    let geometry = ArrayGeometry::from(custom.geometry);
    let rx_array = geometry.array(n_rx, spacing, 1.0)?;
    let mut users = Vec::with_capacity(custom.users.len());
    for u in &custom.users {
        let n_tx = u.n_tx.unwrap_or(n_rx);
        let receive = match u.receive_spread {
            Some([a, b]) => jakes_correlation(&rx_array, &AngularSpread::new(a, b)?, Side::Receive)?,
            None => CorrelationMatrix::identity(n_rx, Side::Receive),
        };
        let transmit = match u.transmit_spread {
            Some([a, b]) => {
                jakes_correlation(&geometry.array(n_tx, spacing, 1.0)?, &AngularSpread::new(a, b)?, Side::Transmit)?
            }
            None => CorrelationMatrix::identity(n_tx, Side::Transmit),
        };
        users.push(UserLink::new(receive, transmit, u.budget)?);
    }
    SystemConfig::new(users, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub n: usize,
    pub precoding: String,
    pub subset: String,
    /// `sum_rate` for the full user set, `constraint` for proper subsets.
    pub kind: String,
    /// Bits per receive antenna.
    pub det_equiv: f64,
    pub mc_mean: Option<f64>,
    pub mc_std_error: Option<f64>,
    pub rel_gap: Option<f64>,
    pub iterations: usize,
    pub outer_iterations: usize,
}

/// Sum-rate constraints for one `(N, precoding)` cell of a config.
pub fn evaluate_cell(
    cfg: &ExperimentConfig,
    n: usize,
    precoding: Precoding,
) -> Result<Vec<ResultRow>, ExperimentError> {
    let system = cfg
        .system(n)
        .map_err(ExperimentError::numerical(format!("N={n}, {}", precoding.label())))?;
    let mc = (cfg.trials > 0).then_some((cfg.trials, cfg.seed));
    evaluate_system(&system, cfg.scenario.label(), precoding, &cfg.tolerances, mc)
}

/// Constraint rows for every nonempty user subset of `system`, with Monte
/// Carlo columns when `monte_carlo = Some((trials, seed))`.
///
/// Optimal precoding water-fills each subset separately.
pub fn evaluate_system(
    system: &SystemConfig,
    scenario: &str,
    precoding: Precoding,
    tolerances: &Tolerances,
    monte_carlo: Option<(usize, u64)>,
) -> Result<Vec<ResultRow>, ExperimentError> {
    let n = system.n_rx();
    let context = format!("N={n}, {}", precoding.label());
    let fp = FixedPointOptions::with_tolerance(tolerances.epsilon_fp);
    let wf = WaterfillOptions {
        eta: tolerances.eta,
        inner: FixedPointOptions::with_tolerance(tolerances.epsilon_fp.min(1e-12)),
        ..WaterfillOptions::default()
    };
    let all = system.all_users();
    let mut rows = Vec::new();
    for subset in UserSubset::enumerate(system.n_users()) {
        let ctx = format!("{context}, subset {subset}");
        let (precoders, outer_iterations) = match precoding {
            Precoding::Uniform => (PrecoderSet::uniform(system), 0),
            Precoding::Optimal => {
                let result =
                    iterative_waterfill_with(system, subset, &wf).map_err(ExperimentError::numerical(ctx.clone()))?;
                if !result.converged {
                    return Err(ExperimentError::NotConverged(format!(
                        "{ctx}: water-filling did not converge in {} outer iterations (KKT residual {:e})",
                        result.outer_iterations, result.kkt_residual
                    )));
                }
                (result.precoders, result.outer_iterations)
            }
        };
        let sub_system = system.restrict(subset).map_err(ExperimentError::numerical(ctx.clone()))?;
        let sub_p = precoders.restrict(subset).map_err(ExperimentError::numerical(ctx.clone()))?;
        let value = shannon_de_with(&sub_system, system.sigma2(), Some(&sub_p), &fp)
            .map_err(ExperimentError::numerical(ctx.clone()))?;
        let mc = match monte_carlo {
            Some((trials, seed)) => Some(
                ergodic_estimate(system, Some(&precoders), subset, trials, seed)
                    .map_err(ExperimentError::numerical(ctx.clone()))?,
            ),
            None => None,
        };
        rows.push(ResultRow {
            scenario: scenario.into(),
            n,
            precoding: precoding.label().into(),
            subset: subset.to_string(),
            kind: if subset == all { "sum_rate" } else { "constraint" }.into(),
            det_equiv: value.value / LN_2,
            mc_mean: mc.map(|r| r.mean / LN_2),
            mc_std_error: mc.map(|r| r.std_error / LN_2),
            rel_gap: mc.map(|r| r.rel_gap),
            iterations: value.solution.iterations,
            outer_iterations,
        });
    }
    Ok(rows)
}

/// Writes rows as CSV. Monte Carlo columns appear only when `with_mc`.
pub fn write_csv<W: std::io::Write>(out: W, rows: &[ResultRow], with_mc: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["schema_version", "scenario", "n", "precoding", "subset", "kind", "units", "det_equiv"];
    if with_mc {
        header.extend(["mc_mean", "mc_std_error", "rel_gap"]);
    }
    header.extend(["iterations", "outer_iterations"]);
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in rows {
        let mut record = vec![
            SCHEMA_VERSION.to_string(),
            r.scenario.clone(),
            r.n.to_string(),
            r.precoding.clone(),
            r.subset.clone(),
            r.kind.clone(),
            "bits".into(),
            r.det_equiv.to_string(),
        ];
        if with_mc {
            record.extend([opt(r.mc_mean), opt(r.mc_std_error), opt(r.rel_gap)]);
        }
        record.extend([r.iterations.to_string(), r.outer_iterations.to_string()]);
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub csv_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub rows: Vec<ResultRow>,
}

/// The sidecar sits next to the CSV with `.json` appended to its name.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Runs every `(N, precoding)` cell of the config and writes the outputs.
pub fn run_config(cfg: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentSummary, ExperimentError> {
    let started = Instant::now();
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        for &p in &cfg.precoding {
            log::info!("evaluating N={n} with {} precoding", p.label());
            rows.extend(evaluate_cell(cfg, n, p)?);
        }
    }

    let csv_path = base_dir.join(&cfg.output_path);
    let write_err = |path: &Path, message: String| ExperimentError::Write {
        path: path.to_path_buf(),
        message,
    };
    if let Some(parent) = csv_path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| write_err(parent, e.to_string()))?;
    }
    let file = std::fs::File::create(&csv_path).map_err(|e| write_err(&csv_path, e.to_string()))?;
    write_csv(file, &rows, cfg.trials > 0).map_err(|e| write_err(&csv_path, e.to_string()))?;

    let sidecar = sidecar_path(&csv_path);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &rows {
        *counts.entry(r.kind.as_str()).or_default() += 1;
    }
    let meta = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "crate": env!("CARGO_PKG_NAME"),
        "crate_version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "csv": csv_path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "row_counts": counts,
        "units": "bits per receive antenna",
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&sidecar, text + "\n").map_err(|e| write_err(&sidecar, e.to_string()))?;

    Ok(ExperimentSummary {
        csv_path,
        sidecar_path: sidecar,
        rows,
    })
}

/// Loads a config file and runs it; relative output paths resolve against
/// the config file's directory.
pub fn run_experiment(path: &Path) -> Result<ExperimentSummary, ExperimentError> {
    let cfg = ExperimentConfig::from_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    run_config(&cfg, base)
}
