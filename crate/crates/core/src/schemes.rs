//! Multiple-access schemes compared end to end: harvested power and the time
//! needed to charge a storage capacitor.
//!
//! * `Drama`: synchronized duty-cycled bursts with random phases. The
//!   harvester sees the random burst power; its time average is the burst
//!   expectation times the duty cycle.
//! * `Orthogonal`: perfectly orthogonal channels (FDMA-like). Contributions
//!   add in power, without cross terms, as a constant input.
//! * `Continuous`: a single continuous tone from the strongest transmitter.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::distribution::{ClosedForm, PowerDistribution};
use crate::error::{invalid, Error, Result};
use crate::harvester::{average_efficiency, AveragingMode, EfficiencyCurve, HarvestResult};
use crate::interference::{sample_burst_powers, BurstConfig, TransmitterSet};
use crate::network::NetworkTopology;
use crate::rng::derive_seed;
use crate::stats::Moments;
use crate::units::watts_to_dbm;
use crate::waveform::{Waveform, MIN_SAMPLES_PER_PERIOD};

/// Smallest Monte Carlo sample count accepted for a harvest estimate.
pub const MIN_MC_SAMPLES: usize = 10_000;

pub const DEFAULT_MC_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Drama,
    Orthogonal,
    Continuous,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Drama => "drama",
            SchemeKind::Orthogonal => "orthogonal",
            SchemeKind::Continuous => "continuous",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "drama" => Ok(SchemeKind::Drama),
            "orthogonal" | "fdma" => Ok(SchemeKind::Orthogonal),
            "continuous" => Ok(SchemeKind::Continuous),
            other => Err(invalid("kind", format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    kind: SchemeKind,
    burst: Option<BurstConfig>,
    distribution_override: Option<ClosedForm>,
    name: Option<String>,
}

impl SchemeSpec {
    /// Burst powers are sampled by Monte Carlo.
    pub fn drama(burst: BurstConfig) -> Self {
        Self {
            kind: SchemeKind::Drama,
            burst: Some(burst),
            distribution_override: None,
            name: None,
        }
    }

    /// Burst powers follow a closed-form ratio distribution.
    pub fn drama_analytic(burst: BurstConfig, dist: ClosedForm) -> Self {
        Self {
            distribution_override: Some(dist),
            ..Self::drama(burst)
        }
    }

    pub fn orthogonal() -> Self {
        Self {
            kind: SchemeKind::Orthogonal,
            burst: None,
            distribution_override: None,
            name: None,
        }
    }

    pub fn continuous() -> Self {
        Self {
            kind: SchemeKind::Continuous,
            ..Self::orthogonal()
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn burst(&self) -> Option<&BurstConfig> {
        self.burst.as_ref()
    }

    pub fn distribution_override(&self) -> Option<ClosedForm> {
        self.distribution_override
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(self.kind.name())
    }
}

/// Harvest estimate with its Monte Carlo standard error (0 for exact paths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestEstimate {
    pub result: HarvestResult,
    pub std_error: f64,
}

pub fn scheme_harvest(
    spec: &SchemeSpec,
    ts: &TransmitterSet,
    curve: &EfficiencyCurve,
    mc_samples: usize,
    seed: u64,
) -> Result<HarvestResult> {
    scheme_harvest_estimate(spec, ts, curve, mc_samples, seed).map(|e| e.result)
}

pub fn scheme_harvest_estimate(
    spec: &SchemeSpec,
    ts: &TransmitterSet,
    curve: &EfficiencyCurve,
    mc_samples: usize,
    seed: u64,
) -> Result<HarvestEstimate> {
    let exact = |result| HarvestEstimate { result, std_error: 0.0 };
    match spec.kind {
        SchemeKind::Orthogonal => {
            let total = ts.total();
            Ok(exact(HarvestResult::new(curve.eval(total), total)))
        }
        SchemeKind::Continuous => {
            let strongest = ts.max();
            Ok(exact(HarvestResult::new(curve.eval(strongest), strongest)))
        }
        SchemeKind::Drama => {
            let burst = spec
                .burst
                .as_ref()
                .ok_or_else(|| invalid("burst", "drama requires a burst configuration"))?;
            let duty = burst.duty();
            let total = ts.total();
            match spec.distribution_override {
                Some(kind) => {
                    // efficiency at the burst level equals the time-averaged
                    // one: P_H = D · η̄ · (ΣP / D) = η̄ · ΣP
                    let r = average_efficiency(
                        curve,
                        &PowerDistribution::from(kind),
                        total / duty,
                        AveragingMode::PowerWeighted,
                    )?;
                    Ok(exact(HarvestResult::new(r.average_efficiency, total)))
                }
                None => {
                    if mc_samples < MIN_MC_SAMPLES {
                        return Err(invalid(
                            "mc_samples",
                            format!("{mc_samples} is below the minimum of {MIN_MC_SAMPLES}"),
                        ));
                    }
                    let samples = sample_burst_powers(ts, burst, mc_samples, seed)?;
                    // η(p) · p · D / ΣP per burst; its mean is the time-averaged efficiency
                    let m: Moments = samples
                        .samples
                        .iter()
                        .map(|&p| curve.eval(p) * (duty * p / total))
                        .collect();
                    Ok(HarvestEstimate {
                        result: HarvestResult::new(m.mean(), total),
                        std_error: m.std_error(),
                    })
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitorSpec {
    capacitance: f64,
    v_start: f64,
    v_target: f64,
}

impl CapacitorSpec {
    pub fn new(capacitance: f64, v_start: f64, v_target: f64) -> Result<Self> {
        if !(capacitance.is_finite() && capacitance > 0.0) {
            return Err(invalid("capacitance", format!("{capacitance} must be > 0")));
        }
        if !(v_start >= 0.0 && v_start.is_finite()) {
            return Err(invalid("v_start", format!("{v_start} must be >= 0")));
        }
        if !(v_target >= v_start && v_target.is_finite()) {
            return Err(invalid(
                "v_target",
                format!("{v_target} must be >= v_start ({v_start})"),
            ));
        }
        Ok(Self {
            capacitance,
            v_start,
            v_target,
        })
    }

    pub fn capacitance(&self) -> f64 {
        self.capacitance
    }

    pub fn v_start(&self) -> f64 {
        self.v_start
    }

    pub fn v_target(&self) -> f64 {
        self.v_target
    }

    /// Energy needed to go from `v_start` to `v_target`.
    pub fn energy(&self) -> f64 {
        0.5 * self.capacitance * (self.v_target.powi(2) - self.v_start.powi(2))
    }

    fn voltage(&self, stored: f64) -> f64 {
        (2.0 * stored / self.capacitance + self.v_start.powi(2)).sqrt()
    }
}

/// Constant-power charging time, `½ C (V_t² − V_s²) / P_H`.
pub fn charging_time(p_harvested: f64, cap: &CapacitorSpec) -> Result<f64> {
    if !(p_harvested > 0.0) {
        return Err(Error::NeverCharges(p_harvested));
    }
    Ok(cap.energy() / p_harvested)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeTrace {
    /// `(time s, voltage V)`, starting at `(0, v_start)`.
    pub points: Vec<(f64, f64)>,
    /// False when the timeout hit before `v_target`.
    pub complete: bool,
}

impl ChargeTrace {
    pub fn end_time(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.0)
    }
}

/// Integrates `dE = η(p(t)) p(t) dt` with a left Riemann sum. The drama
/// input follows the burst waveform; the other schemes are constant.
pub fn charge_trace(
    spec: &SchemeSpec,
    ts: &TransmitterSet,
    curve: &EfficiencyCurve,
    cap: &CapacitorSpec,
    dt: f64,
    timeout: f64,
    seed: u64,
) -> Result<ChargeTrace> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("{dt} must be > 0")));
    }
    if !(timeout.is_finite() && timeout > 0.0) {
        return Err(invalid("timeout", format!("{timeout} must be > 0")));
    }
    let mut input: Box<dyn FnMut(f64) -> f64> = match spec.kind {
        SchemeKind::Orthogonal => {
            let p = ts.total();
            Box::new(move |_| p)
        }
        SchemeKind::Continuous => {
            let p = ts.max();
            Box::new(move |_| p)
        }
        SchemeKind::Drama => {
            let burst = spec
                .burst
                .ok_or_else(|| invalid("burst", "drama requires a burst configuration"))?;
            let max_dt = burst.period() / MIN_SAMPLES_PER_PERIOD;
            if dt > max_dt * (1.0 + 1e-12) {
                return Err(invalid("dt", format!("{dt} s exceeds period/10 = {max_dt} s")));
            }
            let mut wave = Waveform::new(ts, &burst, seed);
            Box::new(move |t| wave.power_at(t))
        }
    };

    let mut points = vec![(0.0, cap.v_start)];
    if cap.v_target <= cap.v_start {
        return Ok(ChargeTrace { points, complete: true });
    }
    let mut stored = 0.0;
    let mut step: u64 = 0;
    loop {
        let p = input(step as f64 * dt);
        stored += curve.eval(p) * p * dt;
        step += 1;
        let t = step as f64 * dt;
        let v = cap.voltage(stored);
        points.push((t, v));
        if v >= cap.v_target {
            return Ok(ChargeTrace { points, complete: true });
        }
        if t >= timeout {
            return Ok(ChargeTrace {
                points,
                complete: false,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub scheme: String,
    pub kind: SchemeKind,
    /// Total time-averaged power reaching the sensor at this grid point.
    pub grid_power: f64,
    /// Power the scheme actually feeds the harvester on average.
    pub input_time_avg: f64,
    pub average_efficiency: f64,
    pub harvested_power: f64,
    /// `None` when nothing is harvested.
    pub charging_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonResult {
    pub records: Vec<ComparisonRecord>,
}

impl ComparisonResult {
    fn series(&self, scheme: &str) -> Vec<&ComparisonRecord> {
        self.records.iter().filter(|r| r.scheme == scheme).collect()
    }

    /// Percent reduction of `scheme`'s charging time relative to `baseline`
    /// at every grid power. 100 when only `scheme` charges, `None` when
    /// `scheme` never charges.
    pub fn charging_time_reduction(&self, scheme: &str, baseline: &str) -> Vec<(f64, Option<f64>)> {
        let base = self.series(baseline);
        self.series(scheme)
            .into_iter()
            .map(|r| {
                let b = base.iter().find(|b| b.grid_power == r.grid_power);
                let pct = match (r.charging_time, b.and_then(|b| b.charging_time)) {
                    (Some(t), Some(tb)) => Some(100.0 * (tb - t) / tb),
                    (Some(_), None) if b.is_some() => Some(100.0),
                    _ => None,
                };
                (r.grid_power, pct)
            })
            .collect()
    }

    /// For each grid power of `scheme`, how many dB more grid power
    /// `baseline` needs to charge in the same time. Interpolates
    /// `ln t` linearly in dBm between baseline grid points; `None` when the
    /// time falls outside the baseline's range.
    pub fn equal_time_offsets(&self, scheme: &str, baseline: &str) -> Vec<(f64, Option<f64>)> {
        let base: Vec<(f64, f64)> = self
            .series(baseline)
            .into_iter()
            .filter_map(|r| r.charging_time.map(|t| (watts_to_dbm(r.grid_power), t.ln())))
            .collect();
        self.series(scheme)
            .into_iter()
            .map(|r| {
                let offset = r.charging_time.and_then(|t| {
                    let target = t.ln();
                    base.windows(2).find_map(|w| {
                        let ((d0, l0), (d1, l1)) = (w[0], w[1]);
                        let (lo, hi) = if l0 <= l1 { (l0, l1) } else { (l1, l0) };
                        if target < lo || target > hi {
                            return None;
                        }
                        let dbm = if l1 == l0 {
                            d0
                        } else {
                            d0 + (target - l0) / (l1 - l0) * (d1 - d0)
                        };
                        Some(dbm - watts_to_dbm(r.grid_power))
                    })
                });
                (r.grid_power, offset)
            })
            .collect()
    }
}

/// Evaluates every scheme at every total received power of `grid`. The
/// topology fixes how the total splits among transmitters at the sensor.
/// Grid points run in parallel with seeds derived from `(seed, grid index,
/// scheme index)`, so the result does not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn run_comparison(
    topo: &NetworkTopology,
    sensor_index: usize,
    curve: &EfficiencyCurve,
    specs: &[SchemeSpec],
    cap: &CapacitorSpec,
    grid: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<ComparisonResult> {
    if grid.is_empty() {
        return Err(invalid("input_power_grid", "grid is empty"));
    }
    if specs.is_empty() {
        return Err(invalid("specs", "no schemes to compare"));
    }
    if let Some(p) = grid.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(invalid("input_power_grid", format!("{p} W is not a positive power")));
    }
    let shape = topo.received_powers(sensor_index)?;
    let per_point: Vec<Vec<ComparisonRecord>> = grid
        .par_iter()
        .enumerate()
        .map(|(gi, &power)| {
            let ts = shape.scaled_to_total(power)?;
            let point_seed = derive_seed(seed, gi as u64);
            specs
                .iter()
                .enumerate()
                .map(|(si, spec)| {
                    let r = scheme_harvest(spec, &ts, curve, mc_samples, derive_seed(point_seed, si as u64))?;
                    Ok(ComparisonRecord {
                        scheme: spec.label().to_string(),
                        kind: spec.kind,
                        grid_power: power,
                        input_time_avg: r.input_time_avg,
                        average_efficiency: r.average_efficiency,
                        harvested_power: r.harvested_power,
                        charging_time: charging_time(r.harvested_power, cap).ok(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonResult {
        records: per_point.into_iter().flatten().collect(),
    })
}
