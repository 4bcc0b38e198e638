//! Subcommand implementations. Each returns the full CSV document.

use std::fmt;

use drama_core::rng::derive_seed;
use drama_core::units::{dbm_to_watts, watts_to_dbm};
use drama_core::{
    analytic_mean_burst, analytic_std_burst, average_efficiency, charge_trace, coinciding_ets, empirical_distribution,
    harvested_power_duty, l1_distance, run_comparison, sample_burst_powers, BurstConfig, ClosedForm, PowerDistribution,
    SchemeKind, TransmitterSet,
};

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{num, opt, Csv};

/// Per-transmitter power used by `stats` and `pdf`; the ratio statistics do
/// not depend on it.
const UNIT_POWER_W: f64 = 1e-3;

/// Right end of the `pdf` grid unless the samples reach further.
const PDF_GRID_MIN_UPPER: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stats,
    Pdf,
    Curve,
    Compare,
    Trace,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stats => "stats",
            Command::Pdf => "pdf",
            Command::Curve => "curve",
            Command::Compare => "compare",
            Command::Trace => "trace",
        }
    }

    /// Sections the command reads; the rest trigger a warning.
    pub fn uses(self) -> &'static [&'static str] {
        match self {
            Command::Stats | Command::Pdf => &["run", "schemes"],
            Command::Curve => &["run", "curve", "schemes", "sweep"],
            Command::Compare | Command::Trace => &["run", "topology", "curve", "schemes", "capacitor", "sweep"],
        }
    }

    fn requires(self) -> &'static [&'static str] {
        match self {
            Command::Stats | Command::Pdf => &["run.seed"],
            Command::Curve => &["run.seed", "curve", "schemes", "sweep.grid"],
            Command::Compare => &["run.seed", "topology", "curve", "schemes", "capacitor", "sweep.grid"],
            Command::Trace => &["run.seed", "topology", "curve", "schemes", "capacitor", "sweep.trace"],
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

trait Context<T> {
    fn context(self, what: impl fmt::Display) -> Result<T, CliError>;
}

impl<T> Context<T> for drama_core::Result<T> {
    fn context(self, what: impl fmt::Display) -> Result<T, CliError> {
        self.map_err(|e| CliError::Runtime(format!("{what}: {e}")))
    }
}

/// Runs `cmd`. The CSV goes to the return value; human-readable summary lines
/// go to `summary`.
pub fn run(cmd: Command, cfg: &ExperimentConfig, summary: &mut Vec<String>) -> Result<String, CliError> {
    cfg.require(cmd.requires())?;
    match cmd {
        Command::Stats => stats(cfg, summary),
        Command::Pdf => pdf(cfg, summary),
        Command::Curve => curve(cfg, summary),
        Command::Compare => compare(cfg, summary),
        Command::Trace => trace(cfg, summary),
    }
}

/// Burst settings for the ratio statistics: the first drama scheme's, or a
/// continuous (D = 1) burst when none is configured.
fn ratio_burst(cfg: &ExperimentConfig) -> BurstConfig {
    cfg.schemes
        .as_ref()
        .and_then(|s| s.iter().find(|s| s.kind() == SchemeKind::Drama))
        .and_then(|s| s.burst().copied())
        .unwrap_or_else(|| BurstConfig::new(1.0, 1.0).expect("unit burst is valid"))
}

fn header(cmd: Command, cfg: &ExperimentConfig) -> Csv {
    Csv::new(cmd.name(), cfg.seed(), &cfg.hash)
}

fn stats(cfg: &ExperimentConfig, summary: &mut Vec<String>) -> Result<String, CliError> {
    let burst = ratio_burst(cfg);
    let n = cfg.run.mc_samples;
    let mut csv = header(Command::Stats, cfg);
    csv.note(&format!(
        "{} mW per transmitter; Monte Carlo seed per m derived from the master seed",
        UNIT_POWER_W * 1e3
    ));
    csv.row([
        "m",
        "duty",
        "analytic_mean_mw",
        "analytic_std_mw",
        "analytic_cv",
        "mc_mean_mw",
        "mc_std_mw",
        "mc_cv",
        "samples",
    ]);
    for &m in &cfg.run.m_values {
        let ts = TransmitterSet::equal(m, UNIT_POWER_W).context("transmitters")?;
        let mean = analytic_mean_burst(&ts, burst.duty()).context("analytic mean")?;
        let std = analytic_std_burst(&ts, burst.duty()).context("analytic std")?;
        let samples = sample_burst_powers(&ts, &burst, n, derive_seed(cfg.seed(), m as u64)).context("sampling")?;
        let (mc_mean, mc_std) = (samples.mean(), samples.std_dev());
        csv.row([
            m.to_string(),
            num(burst.duty()),
            num(mean * 1e3),
            num(std * 1e3),
            num(std / mean),
            num(mc_mean * 1e3),
            num(mc_std * 1e3),
            num(mc_std / mc_mean),
            n.to_string(),
        ]);
        summary.push(format!(
            "m={m}: cv analytic {:.5}, Monte Carlo {:.5}",
            std / mean,
            mc_std / mc_mean
        ));
    }
    Ok(csv.into_string())
}

fn pdf(cfg: &ExperimentConfig, summary: &mut Vec<String>) -> Result<String, CliError> {
    let burst = ratio_burst(cfg);
    let n = cfg.run.mc_samples;
    let mut columns: Vec<(String, PowerDistribution)> = Vec::new();
    for &m in &cfg.run.m_values {
        let ts = TransmitterSet::equal(m, UNIT_POWER_W).context("transmitters")?;
        let samples = sample_burst_powers(&ts, &burst, n, derive_seed(cfg.seed(), m as u64)).context("sampling")?;
        let dist = empirical_distribution(&samples, cfg.run.pdf_bins).context(format!("histogram for m={m}"))?;
        columns.push((format!("m{m}"), dist));
    }
    let empirical = columns.len();
    for kind in [ClosedForm::Arcsine2, ClosedForm::Exponential] {
        columns.push((kind.name().to_string(), kind.into()));
    }

    let (mut upper, mut width) = (PDF_GRID_MIN_UPPER, f64::INFINITY);
    for (_, d) in &columns[..empirical] {
        if let PowerDistribution::Empirical(h) = d {
            upper = upper.max(h.upper());
            width = width.min(h.width());
        }
    }
    let cells = (upper / width).ceil() as usize;
    let width = upper / cells as f64;

    let mut csv = header(Command::Pdf, cfg);
    csv.note(&format!(
        "ratio = burst power / sample mean; {} samples and {} bins per m, duty {}",
        n,
        cfg.run.pdf_bins,
        num(burst.duty())
    ));
    csv.note("each cell holds probability mass / width, rebinned from the histogram or closed-form cdf");
    let mut head = vec!["x_lo".to_string(), "x_hi".to_string()];
    head.extend(columns.iter().map(|c| c.0.clone()));
    csv.row(&head);
    let mut integrals = vec![0.0; columns.len()];
    for k in 0..cells {
        let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
        let mut row = vec![num(lo), num(hi)];
        for (j, (_, d)) in columns.iter().enumerate() {
            let mass = d.mass(lo, hi);
            integrals[j] += mass;
            row.push(num(mass / width));
        }
        csv.row(&row);
    }

    for (name, d) in &columns[..empirical] {
        for kind in [ClosedForm::Arcsine2, ClosedForm::Exponential] {
            let l1 = l1_distance(d, &kind.into()).context("L1 distance")?;
            csv.comment(&format!("l1,{name},{},{}", kind.name(), num(l1)));
            summary.push(format!("{name}: L1 to {} = {l1:.4}", kind.name()));
        }
    }
    for ((name, _), total) in columns.iter().zip(&integrals) {
        csv.comment(&format!("integral,{name},{}", num(*total)));
    }
    Ok(csv.into_string())
}

fn curve(cfg: &ExperimentConfig, summary: &mut Vec<String>) -> Result<String, CliError> {
    let curve = cfg.curve.as_ref().expect("required");
    let grid = cfg.sweep.as_ref().and_then(|s| s.grid_dbm.as_ref()).expect("required");
    let duty = cfg.drama_duty().ok_or_else(|| {
        CliError::Config(ConfigError::Invalid(
            cfg.path.clone(),
            vec![crate::config::FieldError {
                field: "schemes.list".into(),
                message: "curve needs a drama scheme for its duty cycle".into(),
            }],
        ))
    })?;
    let modes = cfg.run.averaging.modes();

    let mut csv = header(Command::Curve, cfg);
    csv.note("p_dbm is the time-averaged harvester input power");
    csv.note(&format!(
        "duty_shifted is the efficiency of bursts at p / D with D = {}",
        num(duty)
    ));
    let mut head = vec!["p_dbm".to_string(), "baseline".to_string(), "duty_shifted".to_string()];
    for m in &modes {
        for kind in [ClosedForm::Arcsine2, ClosedForm::Exponential] {
            head.push(format!("{}_{}", kind.name(), m.name()));
        }
    }
    csv.row(&head);

    let mut lowest_exp: Option<f64> = None;
    for &dbm in grid {
        let p = dbm_to_watts(dbm);
        let base = curve.efficiency_at(p).context("baseline")?;
        let shifted = harvested_power_duty(curve, p, duty).context("duty shift")?;
        let mut row = vec![num(dbm), num(base), num(shifted.average_efficiency)];
        for &mode in &modes {
            for kind in [ClosedForm::Arcsine2, ClosedForm::Exponential] {
                let r = average_efficiency(curve, &kind.into(), p, mode)
                    .context(format!("{} average at {dbm} dBm", kind.name()))?;
                if kind == ClosedForm::Exponential && r.average_efficiency > 0.0 && lowest_exp.is_none() {
                    lowest_exp = Some(dbm);
                }
                row.push(num(r.average_efficiency));
            }
        }
        csv.row(&row);
    }
    if let Some(d) = lowest_exp {
        summary.push(format!("exponential-equalized efficiency is nonzero from {d} dBm"));
    }
    Ok(csv.into_string())
}

fn compare(cfg: &ExperimentConfig, summary: &mut Vec<String>) -> Result<String, CliError> {
    let topo = cfg.topology.as_ref().expect("required");
    let curve = cfg.curve.as_ref().expect("required");
    let specs = cfg.schemes.as_ref().expect("required");
    let cap = cfg.capacitor.as_ref().expect("required");
    let grid_dbm = cfg.sweep.as_ref().and_then(|s| s.grid_dbm.as_ref()).expect("required");
    let grid: Vec<f64> = grid_dbm.iter().map(|d| dbm_to_watts(*d)).collect();

    let shape = topo
        .network
        .received_powers(topo.sensor_index)
        .context("received powers")?;
    let coinciding = coinciding_ets(&shape, topo.coincidence_threshold).context("coinciding transmitters")?;
    let result = run_comparison(
        &topo.network,
        topo.sensor_index,
        curve,
        specs,
        cap,
        &grid,
        cfg.run.mc_samples,
        cfg.seed(),
    )
    .context("comparison")?;

    let mut csv = header(Command::Compare, cfg);
    csv.note("input_dbm is the total time-averaged power reaching the sensor");
    csv.note(&format!(
        "sensor {} receives from {} transmitters, {} coinciding at ratio {}",
        topo.sensor_index,
        shape.len(),
        coinciding,
        num(topo.coincidence_threshold)
    ));
    csv.note(&format!(
        "capacitor {} F from {} V to {} V; drama uses {} Monte Carlo bursts",
        num(cap.capacitance()),
        num(cap.v_start()),
        num(cap.v_target()),
        cfg.run.mc_samples
    ));
    csv.row(["scheme", "input_dbm", "efficiency", "harvested_mw", "charging_time_s"]);
    // report the configured dBm values rather than a lossy round trip
    let dbm_of = |w: f64| {
        grid.iter()
            .position(|g| *g == w)
            .map_or_else(|| watts_to_dbm(w), |i| grid_dbm[i])
    };
    for r in &result.records {
        csv.row([
            r.scheme.clone(),
            num(dbm_of(r.grid_power)),
            num(r.average_efficiency),
            num(r.harvested_power * 1e3),
            opt(r.charging_time, "inf"),
        ]);
    }

    match specs.iter().find(|s| s.kind() == SchemeKind::Orthogonal) {
        None => csv.comment("no orthogonal scheme configured; reductions not reported"),
        Some(base) => {
            for s in specs.iter().filter(|s| s.kind() == SchemeKind::Drama) {
                let reduction = result.charging_time_reduction(s.label(), base.label());
                let offsets = result.equal_time_offsets(s.label(), base.label());
                for ((p, pct), (_, off)) in reduction.iter().zip(&offsets) {
                    csv.comment(&format!(
                        "reduction,{},{},{},{},{}",
                        s.label(),
                        base.label(),
                        num(dbm_of(*p)),
                        opt(*pct, "nan"),
                        opt(*off, "nan"),
                    ));
                }
                let best = offsets.iter().filter_map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
                if best.is_finite() {
                    summary.push(format!(
                        "{} needs up to {best:.2} dB less input power than {} for equal charging time",
                        s.label(),
                        base.label()
                    ));
                }
            }
            csv.comment("reduction columns: scheme,baseline,input_dbm,time_reduction_pct,equal_time_offset_db");
        }
    }
    Ok(csv.into_string())
}

fn trace(cfg: &ExperimentConfig, summary: &mut Vec<String>) -> Result<String, CliError> {
    let topo = cfg.topology.as_ref().expect("required");
    let curve = cfg.curve.as_ref().expect("required");
    let specs = cfg.schemes.as_ref().expect("required");
    let cap = cfg.capacitor.as_ref().expect("required");
    let sweep = cfg.sweep.as_ref().expect("required");
    let dt = sweep.dt_s.expect("required");
    let levels = sweep.trace_dbm.as_ref().expect("required");
    let shape = topo
        .network
        .received_powers(topo.sensor_index)
        .context("received powers")?;

    let mut csv = header(Command::Trace, cfg);
    csv.note(&format!(
        "left Riemann sum with dt = {} s, timeout {} s, every {} step(s) kept",
        num(dt),
        num(sweep.timeout_s),
        sweep.trace_stride
    ));
    csv.row(["scheme", "input_dbm", "time_s", "voltage_v"]);
    let mut status = Vec::new();
    for (li, &dbm) in levels.iter().enumerate() {
        let ts = shape.scaled_to_total(dbm_to_watts(dbm)).context("scaling")?;
        for (si, spec) in specs.iter().enumerate() {
            let seed = derive_seed(derive_seed(cfg.seed(), li as u64), si as u64);
            let tr = charge_trace(spec, &ts, curve, cap, dt, sweep.timeout_s, seed)
                .context(format!("{} trace at {dbm} dBm", spec.label()))?;
            let last = tr.points.len() - 1;
            for (k, (t, v)) in tr.points.iter().enumerate() {
                if k % sweep.trace_stride == 0 || k == last {
                    csv.row([spec.label().to_string(), num(dbm), num(*t), num(*v)]);
                }
            }
            let state = if tr.complete { "complete" } else { "timeout" };
            status.push(format!(
                "status,{},{},{},{}",
                spec.label(),
                num(dbm),
                state,
                num(tr.end_time())
            ));
            summary.push(format!(
                "{} at {dbm} dBm: {state} after {:.3} s",
                spec.label(),
                tr.end_time()
            ));
        }
    }
    for s in &status {
        csv.comment(s);
    }
    csv.comment("status columns: scheme,input_dbm,state,end_time_s");
    Ok(csv.into_string())
}
