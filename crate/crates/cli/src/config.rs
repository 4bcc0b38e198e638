//! Experiment configuration: TOML sections `[run]`, `[topology]`, `[curve]`,
//! `[schemes]`, `[capacitor]` and `[sweep]`.
//!
//! Parsing is split in two stages. Serde reads the raw document (unknown
//! keys are rejected with their location); validation then checks every
//! present field and collects all problems before anything runs.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use drama_core::network::DEFAULT_COINCIDENCE_THRESHOLD;
use drama_core::schemes::DEFAULT_MC_SAMPLES;
use drama_core::units::dbm_to_watts;
use drama_core::{
    load_curve, AveragingMode, BurstConfig, CapacitorSpec, ClosedForm, EfficiencyCurve, EnergyTransmitter,
    NetworkTopology, PathLossModel, Point, SchemeKind, SchemeSpec,
};

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub run: Option<RawRun>,
    pub topology: Option<RawTopology>,
    pub curve: Option<RawCurve>,
    pub schemes: Option<RawSchemes>,
    pub capacitor: Option<RawCapacitor>,
    pub sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub seed: Option<u64>,
    pub mc_samples: Option<usize>,
    pub output: Option<PathBuf>,
    pub m_values: Option<Vec<usize>>,
    pub pdf_bins: Option<usize>,
    pub averaging: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTopology {
    pub ets: Vec<RawEt>,
    pub sensors: Vec<RawPoint>,
    pub sensor_index: Option<usize>,
    pub coincidence_threshold: Option<f64>,
    pub pathloss: Option<RawPathLoss>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEt {
    pub x: f64,
    pub y: f64,
    pub tx_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPoint {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPathLoss {
    pub kind: String,
    pub carrier_hz: Option<f64>,
    pub exponent: Option<f64>,
    pub reference_gain: Option<f64>,
    pub min_distance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCurve {
    pub file: PathBuf,
    pub below_range: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSchemes {
    pub list: Vec<RawScheme>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScheme {
    pub kind: String,
    pub name: Option<String>,
    pub period_s: Option<f64>,
    pub duty: Option<f64>,
    pub random_phase: Option<bool>,
    pub sync_jitter_s: Option<f64>,
    pub carrier_hz: Option<f64>,
    pub distribution: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCapacitor {
    pub capacitance_f: f64,
    pub v_start: Option<f64>,
    pub v_target: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub dbm: Option<Vec<f64>>,
    pub min_dbm: Option<f64>,
    pub max_dbm: Option<f64>,
    pub step_db: Option<f64>,
    pub trace_dbm: Option<Vec<f64>>,
    pub dt_s: Option<f64>,
    pub timeout_s: Option<f64>,
    pub trace_stride: Option<usize>,
}

/// One invalid field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Syntax(PathBuf, String),
    Invalid(PathBuf, Vec<FieldError>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            ConfigError::Syntax(p, e) => write!(f, "{}: {e}", p.display()),
            ConfigError::Invalid(p, errs) => {
                write!(f, "{}: {} invalid field(s)", p.display(), errs.len())?;
                for e in errs {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    One(AveragingMode),
    Both,
}

impl Averaging {
    pub fn modes(self) -> Vec<AveragingMode> {
        match self {
            Averaging::One(m) => vec![m],
            Averaging::Both => vec![AveragingMode::PowerWeighted, AveragingMode::Unweighted],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Run {
    pub seed: Option<u64>,
    pub mc_samples: usize,
    pub output: Option<PathBuf>,
    pub m_values: Vec<usize>,
    pub pdf_bins: usize,
    pub averaging: Averaging,
}

#[derive(Debug, Clone)]
pub struct Topology {
    pub network: NetworkTopology,
    pub sensor_index: usize,
    pub coincidence_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub grid_dbm: Option<Vec<f64>>,
    pub trace_dbm: Option<Vec<f64>>,
    pub dt_s: Option<f64>,
    pub timeout_s: f64,
    pub trace_stride: usize,
}

/// Validated configuration. Sections absent from the file are `None`.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub path: PathBuf,
    /// SHA-256 of the file bytes.
    pub hash: String,
    pub run: Run,
    pub topology: Option<Topology>,
    pub curve: Option<EfficiencyCurve>,
    pub curve_file: Option<PathBuf>,
    pub schemes: Option<Vec<SchemeSpec>>,
    pub capacitor: Option<CapacitorSpec>,
    pub sweep: Option<Sweep>,
    present: Vec<&'static str>,
}

pub const SECTIONS: [&str; 6] = ["run", "topology", "curve", "schemes", "capacitor", "sweep"];

pub const DEFAULT_PDF_BINS: usize = 200;
pub const DEFAULT_M_VALUES: [usize; 6] = [1, 2, 3, 5, 10, 20];
pub const DEFAULT_TIMEOUT_S: f64 = 1e5;

struct Collector {
    errors: Vec<FieldError>,
}

impl Collector {
    fn push(&mut self, field: impl Into<String>, message: impl fmt::Display) {
        self.errors.push(FieldError {
            field: field.into(),
            message: message.to_string(),
        });
    }

    fn check(&mut self, ok: bool, field: impl Into<String>, message: impl fmt::Display) -> bool {
        if !ok {
            self.push(field, message);
        }
        ok
    }

    fn take<T>(&mut self, field: impl Into<String>, r: drama_core::Result<T>) -> Option<T> {
        r.map_err(|e| self.push(field, e)).ok()
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let bytes = std::fs::read(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|e| ConfigError::Syntax(path.to_path_buf(), format!("not UTF-8: {e}")))?;
        let raw: RawConfig =
            toml::from_str(&text).map_err(|e| ConfigError::Syntax(path.to_path_buf(), e.to_string()))?;
        let hash = {
            use sha2::{Digest, Sha256};
            hex::encode(Sha256::digest(&bytes))
        };
        let base = path.parent().unwrap_or(Path::new("."));
        Self::validate(raw, path.to_path_buf(), hash, base)
    }

    pub fn validate(raw: RawConfig, path: PathBuf, hash: String, base: &Path) -> Result<Self, ConfigError> {
        let mut c = Collector { errors: Vec::new() };
        let mut present = Vec::new();
        for (name, is) in SECTIONS.iter().zip([
            raw.run.is_some(),
            raw.topology.is_some(),
            raw.curve.is_some(),
            raw.schemes.is_some(),
            raw.capacitor.is_some(),
            raw.sweep.is_some(),
        ]) {
            if is {
                present.push(*name);
            }
        }

        let run = validate_run(raw.run, &mut c);
        let topology = raw.topology.and_then(|t| validate_topology(t, &mut c));
        let curve_file = raw.curve.as_ref().map(|cv| base.join(&cv.file));
        let curve = raw.curve.and_then(|cv| validate_curve(cv, base, &mut c));
        let schemes = raw.schemes.and_then(|s| validate_schemes(s, &mut c));
        let capacitor = raw.capacitor.and_then(|cap| {
            c.take(
                "capacitor",
                CapacitorSpec::new(cap.capacitance_f, cap.v_start.unwrap_or(0.0), cap.v_target),
            )
        });
        let sweep = raw.sweep.map(|s| validate_sweep(s, &mut c));

        if !c.errors.is_empty() {
            return Err(ConfigError::Invalid(path, c.errors));
        }
        Ok(Self {
            path,
            hash,
            run,
            topology,
            curve,
            curve_file,
            schemes,
            capacitor,
            sweep,
            present,
        })
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.present.contains(&name)
    }

    /// Errors for every section `needed` that the file does not provide.
    pub fn require(&self, needed: &[&'static str]) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        for s in needed {
            let ok = match *s {
                "topology" => self.topology.is_some(),
                "curve" => self.curve.is_some(),
                "schemes" => self.schemes.is_some(),
                "capacitor" => self.capacitor.is_some(),
                "sweep" => self.sweep.is_some(),
                "sweep.grid" => self.sweep.as_ref().is_some_and(|s| s.grid_dbm.is_some()),
                "sweep.trace" => self
                    .sweep
                    .as_ref()
                    .is_some_and(|s| s.trace_dbm.is_some() && s.dt_s.is_some()),
                "run.seed" => self.run.seed.is_some(),
                _ => true,
            };
            if !ok {
                let message = match *s {
                    "sweep.grid" => "a power grid (`dbm` or `min_dbm`/`max_dbm`/`step_db`) is required",
                    "sweep.trace" => "`trace_dbm` and `dt_s` are required",
                    "run.seed" => "a seed is required (set run.seed or pass --seed)",
                    _ => "section is required by this command",
                };
                errs.push(FieldError {
                    field: s.to_string(),
                    message: message.to_string(),
                });
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(self.path.clone(), errs))
        }
    }

    /// Sections present in the file that `used` does not cover.
    pub fn unused_sections(&self, used: &[&str]) -> Vec<&'static str> {
        self.present
            .iter()
            .copied()
            .filter(|s| !used.iter().any(|u| u == s || u.starts_with(&format!("{s}."))))
            .collect()
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.expect("seed checked by require")
    }

    /// Duty cycle of the first drama scheme, if any.
    pub fn drama_duty(&self) -> Option<f64> {
        self.schemes
            .as_ref()?
            .iter()
            .find(|s| s.kind() == SchemeKind::Drama)
            .and_then(|s| s.burst())
            .map(|b| b.duty())
    }
}

fn validate_run(raw: Option<RawRun>, c: &mut Collector) -> Run {
    let mut run = Run {
        seed: None,
        mc_samples: DEFAULT_MC_SAMPLES,
        output: None,
        m_values: DEFAULT_M_VALUES.to_vec(),
        pdf_bins: DEFAULT_PDF_BINS,
        averaging: Averaging::One(AveragingMode::PowerWeighted),
    };
    let Some(raw) = raw else { return run };
    run.seed = raw.seed;
    run.output = raw.output;
    if let Some(n) = raw.mc_samples {
        if c.check(n >= 1, "run.mc_samples", "must be >= 1") {
            run.mc_samples = n;
        }
    }
    if let Some(ms) = raw.m_values {
        let ok = c.check(!ms.is_empty(), "run.m_values", "must not be empty");
        for (i, m) in ms.iter().enumerate() {
            c.check(
                (1..=256).contains(m),
                format!("run.m_values[{i}]"),
                format!("{m} must lie in 1..=256"),
            );
        }
        if ok {
            run.m_values = ms;
        }
    }
    if let Some(b) = raw.pdf_bins {
        if c.check(b >= 2, "run.pdf_bins", format!("{b} must be >= 2")) {
            run.pdf_bins = b;
        }
    }
    if let Some(a) = raw.averaging {
        match a.as_str() {
            "both" => run.averaging = Averaging::Both,
            other => match other.parse::<AveragingMode>() {
                Ok(m) => run.averaging = Averaging::One(m),
                Err(_) => c.push(
                    "run.averaging",
                    format!("`{other}` is not one of power_weighted, unweighted, both"),
                ),
            },
        }
    }
    run
}

fn validate_topology(raw: RawTopology, c: &mut Collector) -> Option<Topology> {
    let pathloss = match raw.pathloss {
        None => c.take(
            "topology.pathloss",
            PathLossModel::free_space(BurstConfig::DEFAULT_CARRIER_HZ),
        ),
        Some(pl) => {
            let model = match pl.kind.as_str() {
                "free_space" => c.take(
                    "topology.pathloss.carrier_hz",
                    PathLossModel::free_space(pl.carrier_hz.unwrap_or(BurstConfig::DEFAULT_CARRIER_HZ)),
                ),
                "power_law" => c.take(
                    "topology.pathloss.exponent",
                    PathLossModel::power_law(pl.exponent.unwrap_or(2.0)),
                ),
                other => {
                    c.push(
                        "topology.pathloss.kind",
                        format!("`{other}` is not one of free_space, power_law"),
                    );
                    None
                }
            };
            model.and_then(|mut m| {
                if let Some(g) = pl.reference_gain {
                    m = c.take("topology.pathloss.reference_gain", m.with_reference_gain(g))?;
                }
                if let Some(d) = pl.min_distance {
                    m = c.take("topology.pathloss.min_distance", m.with_min_distance(d))?;
                }
                Some(m)
            })
        }
    };
    let mut ok = true;
    for (i, et) in raw.ets.iter().enumerate() {
        ok &= c.check(
            et.x.is_finite() && et.y.is_finite() && et.tx_dbm.is_finite(),
            format!("topology.ets[{i}]"),
            "coordinates and tx_dbm must be finite",
        );
    }
    for (i, s) in raw.sensors.iter().enumerate() {
        ok &= c.check(
            s.x.is_finite() && s.y.is_finite(),
            format!("topology.sensors[{i}]"),
            "coordinates must be finite",
        );
    }
    let sensor_index = raw.sensor_index.unwrap_or(0);
    ok &= c.check(
        sensor_index < raw.sensors.len(),
        "topology.sensor_index",
        format!("{sensor_index} is out of range ({} sensors)", raw.sensors.len()),
    );
    let threshold = raw.coincidence_threshold.unwrap_or(DEFAULT_COINCIDENCE_THRESHOLD);
    ok &= c.check(
        threshold > 0.0 && threshold <= 1.0,
        "topology.coincidence_threshold",
        format!("{threshold} must lie in (0, 1]"),
    );
    let pathloss = pathloss?;
    let network = c.take(
        "topology",
        NetworkTopology::new(
            raw.ets
                .iter()
                .map(|e| EnergyTransmitter {
                    position: Point::new(e.x, e.y),
                    tx_power: dbm_to_watts(e.tx_dbm),
                })
                .collect(),
            raw.sensors.iter().map(|s| Point::new(s.x, s.y)).collect(),
            pathloss,
        ),
    )?;
    ok.then_some(Topology {
        network,
        sensor_index,
        coincidence_threshold: threshold,
    })
}

fn validate_curve(raw: RawCurve, base: &Path, c: &mut Collector) -> Option<EfficiencyCurve> {
    let path = base.join(&raw.file);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            c.push("curve.file", format!("{}: {e}", path.display()));
            return None;
        }
    };
    let curve = match load_curve(&text) {
        Ok(cv) => cv,
        Err(e) => {
            c.push("curve.file", format!("{}: {e}", path.display()));
            return None;
        }
    };
    match raw.below_range {
        Some(v) => c.take("curve.below_range", curve.with_below_range(v)),
        None => Some(curve),
    }
}

fn validate_schemes(raw: RawSchemes, c: &mut Collector) -> Option<Vec<SchemeSpec>> {
    if !c.check(!raw.list.is_empty(), "schemes.list", "at least one scheme is required") {
        return None;
    }
    let mut out = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for (i, s) in raw.list.into_iter().enumerate() {
        let field = |k: &str| format!("schemes.list[{i}].{k}");
        let Some(kind) = c.take(field("kind"), s.kind.parse::<SchemeKind>()) else {
            continue;
        };
        let spec = match kind {
            SchemeKind::Orthogonal | SchemeKind::Continuous => {
                for (key, set) in [
                    ("period_s", s.period_s.is_some()),
                    ("duty", s.duty.is_some()),
                    ("random_phase", s.random_phase.is_some()),
                    ("sync_jitter_s", s.sync_jitter_s.is_some()),
                    ("distribution", s.distribution.is_some()),
                ] {
                    c.check(!set, field(key), format!("only applies to drama, not {kind}"));
                }
                Some(if kind == SchemeKind::Orthogonal {
                    SchemeSpec::orthogonal()
                } else {
                    SchemeSpec::continuous()
                })
            }
            SchemeKind::Drama => {
                let period = s.period_s;
                let duty = s.duty;
                c.check(period.is_some(), field("period_s"), "required for drama");
                c.check(duty.is_some(), field("duty"), "required for drama");
                let burst = match (period, duty) {
                    (Some(t), Some(d)) => c.take(field("period_s/duty"), BurstConfig::new(t, d)),
                    _ => None,
                };
                let burst = burst.and_then(|mut b| {
                    b = b.with_random_phase(s.random_phase.unwrap_or(true));
                    if let Some(f) = s.carrier_hz {
                        b = c.take(field("carrier_hz"), b.with_carrier(f))?;
                    }
                    if let Some(j) = s.sync_jitter_s {
                        b = c.take(field("sync_jitter_s"), b.with_sync_jitter(j))?;
                    }
                    Some(b)
                });
                let dist = match s.distribution.as_deref() {
                    None | Some("monte_carlo") => Some(None),
                    Some(other) => c.take(field("distribution"), other.parse::<ClosedForm>()).map(Some),
                };
                match (burst, dist) {
                    (Some(b), Some(None)) => Some(SchemeSpec::drama(b)),
                    (Some(b), Some(Some(d))) => Some(SchemeSpec::drama_analytic(b, d)),
                    _ => None,
                }
            }
        };
        if let Some(mut spec) = spec {
            if let Some(name) = s.name {
                let ok = !name.is_empty() && !name.contains([',', '"', '\n']);
                c.check(
                    ok,
                    field("name"),
                    "must be non-empty and contain no commas, quotes or newlines",
                );
                spec = spec.with_name(name);
            }
            let label = spec.label().to_string();
            c.check(
                !labels.contains(&label),
                field("name"),
                format!("duplicate scheme label `{label}`; set distinct names"),
            );
            labels.push(label);
            out.push(spec);
        }
    }
    Some(out)
}

fn validate_sweep(raw: RawSweep, c: &mut Collector) -> Sweep {
    let range = (raw.min_dbm, raw.max_dbm, raw.step_db);
    let grid_dbm = match (raw.dbm, range) {
        (Some(_), (Some(_), _, _) | (_, Some(_), _) | (_, _, Some(_))) => {
            c.push(
                "sweep.dbm",
                "give either `dbm` or `min_dbm`/`max_dbm`/`step_db`, not both",
            );
            None
        }
        (Some(list), _) => {
            let ok = c.check(!list.is_empty(), "sweep.dbm", "must not be empty")
                && c.check(
                    list.iter().all(|d| d.is_finite()) && list.windows(2).all(|w| w[1] > w[0]),
                    "sweep.dbm",
                    "values must be finite and strictly increasing",
                );
            ok.then_some(list)
        }
        (None, (Some(lo), Some(hi), Some(step))) => {
            let ok = c.check(
                lo.is_finite() && hi.is_finite() && hi >= lo,
                "sweep.max_dbm",
                "must be >= min_dbm",
            ) & c.check(step.is_finite() && step > 0.0, "sweep.step_db", "must be > 0");
            ok.then(|| {
                let n = ((hi - lo) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| lo + k as f64 * step).collect()
            })
        }
        (None, (None, None, None)) => None,
        (None, _) => {
            c.push(
                "sweep.min_dbm",
                "`min_dbm`, `max_dbm` and `step_db` must be given together",
            );
            None
        }
    };
    if let Some(t) = &raw.trace_dbm {
        c.check(
            !t.is_empty() && t.iter().all(|d| d.is_finite()),
            "sweep.trace_dbm",
            "must be a non-empty list of finite powers",
        );
    }
    if let Some(dt) = raw.dt_s {
        c.check(dt.is_finite() && dt > 0.0, "sweep.dt_s", format!("{dt} must be > 0"));
    }
    let timeout_s = raw.timeout_s.unwrap_or(DEFAULT_TIMEOUT_S);
    c.check(
        timeout_s.is_finite() && timeout_s > 0.0,
        "sweep.timeout_s",
        format!("{timeout_s} must be > 0"),
    );
    let trace_stride = raw.trace_stride.unwrap_or(1);
    c.check(trace_stride >= 1, "sweep.trace_stride", "must be >= 1");
    Sweep {
        grid_dbm,
        trace_dbm: raw.trace_dbm,
        dt_s: raw.dt_s,
        timeout_s,
        trace_stride,
    }
}
