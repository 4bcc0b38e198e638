//! Phasor combination of concurrent energy-transmitter bursts.
//!
//! During one burst every transmitter holds a constant phase, so the sensor
//! sees a single tone whose power depends on the relative phases. Across
//! bursts the phases are redrawn, which turns the received power into a
//! random process with closed-form mean and variance.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, uniform_phase, ONCE_STREAM, SAMPLE_BLOCK};
use std::f64::consts::TAU;

/// Average received power from each transmitter at one sensor, in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterSet {
    powers: Vec<f64>,
}

impl TransmitterSet {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(invalid("powers", "at least one transmitter is required"));
        }
        if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(invalid("powers", format!("{p} is not a positive power")));
        }
        Ok(Self { powers })
    }

    /// `m` transmitters that each deliver `power` watts.
    pub fn equal(m: usize, power: f64) -> Result<Self> {
        Self::new(vec![power; m])
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.powers.iter().copied().fold(f64::MIN, f64::max)
    }

    /// Same proportions, rescaled so the powers sum to `total`.
    pub fn scaled_to_total(&self, total: f64) -> Result<Self> {
        let sum = self.total();
        Self::new(self.powers.iter().map(|p| p / sum * total).collect())
    }
}

/// Timing of the synchronized duty-cycled bursts shared by all transmitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstConfig {
    period: f64,
    duty: f64,
    random_phase: bool,
    carrier_hz: f64,
    sync_jitter: f64,
}

impl BurstConfig {
    pub const DEFAULT_CARRIER_HZ: f64 = 915e6;

    /// Random-phase bursts of `period_s` seconds with duty cycle `duty`,
    /// perfect synchronization and a 915 MHz carrier tag.
    pub fn new(period_s: f64, duty: f64) -> Result<Self> {
        if !(period_s.is_finite() && period_s > 0.0) {
            return Err(invalid("period", format!("{period_s} must be > 0")));
        }
        check_duty(duty)?;
        Ok(Self {
            period: period_s,
            duty,
            random_phase: true,
            carrier_hz: Self::DEFAULT_CARRIER_HZ,
            sync_jitter: 0.0,
        })
    }

    pub fn with_random_phase(mut self, random_phase: bool) -> Self {
        self.random_phase = random_phase;
        self
    }

    pub fn with_carrier(mut self, carrier_hz: f64) -> Result<Self> {
        if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
            return Err(invalid("carrier_f0", format!("{carrier_hz} must be > 0")));
        }
        self.carrier_hz = carrier_hz;
        Ok(self)
    }

    /// Bursts must still overlap, so the jitter has to stay below the on-time.
    pub fn with_sync_jitter(mut self, jitter_s: f64) -> Result<Self> {
        let on_time = self.duty * self.period;
        if !(jitter_s.is_finite() && jitter_s >= 0.0 && jitter_s < on_time) {
            return Err(invalid(
                "sync_jitter",
                format!("{jitter_s} must lie in [0, {on_time}) s"),
            ));
        }
        self.sync_jitter = jitter_s;
        Ok(self)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn duty(&self) -> f64 {
        self.duty
    }

    pub fn random_phase(&self) -> bool {
        self.random_phase
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn sync_jitter(&self) -> f64 {
        self.sync_jitter
    }

    pub fn on_time(&self) -> f64 {
        self.duty * self.period
    }
}

pub(crate) fn check_duty(duty: f64) -> Result<()> {
    if duty.is_finite() && duty > 0.0 && duty <= 1.0 {
        Ok(())
    } else {
        Err(invalid("duty", format!("{duty} must lie in (0, 1]")))
    }
}

/// One phase per transmitter, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(p) = phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
            return Err(invalid("phases", format!("{p} is outside [0, 2π)")));
        }
        Ok(Self { phases })
    }

    /// Wraps arbitrary angles into `[0, 2π)`.
    pub fn wrapped(phases: impl IntoIterator<Item = f64>) -> Result<Self> {
        Self::new(
            phases
                .into_iter()
                .map(|p| {
                    let w = p.rem_euclid(TAU);
                    if w >= TAU {
                        0.0
                    } else {
                        w
                    }
                })
                .collect(),
        )
    }

    pub fn random<R: rand::Rng>(m: usize, rng: &mut R) -> Self {
        Self {
            phases: (0..m).map(|_| uniform_phase(rng)).collect(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Instantaneous power during a burst when transmitter `i` arrives with
/// phase `phases[i]`:
///
/// `p = D⁻¹ Σ Pᵢ + D⁻¹ Σ_{i≠j} √(Pᵢ Pⱼ) cos(φᵢ − φⱼ)`
pub fn combine_burst_power(ts: &TransmitterSet, phases: &PhaseVector, duty: f64) -> Result<f64> {
    if phases.len() != ts.len() {
        return Err(Error::DimensionMismatch {
            expected: ts.len(),
            actual: phases.len(),
        });
    }
    check_duty(duty)?;
    let amps: Vec<f64> = ts.powers.iter().map(|p| p.sqrt()).collect();
    let (cos, sin): (Vec<f64>, Vec<f64>) = phases.phases.iter().map(|p| (p.cos(), p.sin())).unzip();
    Ok(burst_power(&ts.powers, &amps, &cos, &sin, duty))
}

/// Expanded sum with precomputed amplitudes and phase cosines/sines.
/// `cos(φᵢ − φⱼ)` is evaluated as `cos φᵢ cos φⱼ + sin φᵢ sin φⱼ` so the
/// cost is O(m) trigonometric calls instead of O(m²).
#[inline]
pub(crate) fn burst_power(powers: &[f64], amps: &[f64], cos: &[f64], sin: &[f64], duty: f64) -> f64 {
    let own: f64 = powers.iter().sum();
    let mut cross = 0.0;
    for i in 0..amps.len() {
        let mut row = 0.0;
        for j in (i + 1)..amps.len() {
            row += amps[j] * (cos[i] * cos[j] + sin[i] * sin[j]);
        }
        cross += amps[i] * row;
    }
    ((own + 2.0 * cross) / duty).max(0.0)
}

/// Monte Carlo draws of the per-burst received power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSampleSet {
    pub samples: Vec<f64>,
    pub seed: u64,
    pub transmitters: TransmitterSet,
    pub burst: BurstConfig,
}

impl PowerSampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        crate::stats::mean(&self.samples)
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        crate::stats::std_dev(&self.samples)
    }
}

/// Draws `n_samples` burst powers. With random phases every burst gets a
/// fresh uniform phase per transmitter; otherwise one phase vector is drawn
/// from the seed and reused for every burst.
///
/// Samples are produced in fixed-size blocks, each from its own stream of the
/// master seed, so the output does not depend on the number of worker threads.
pub fn sample_burst_powers(
    ts: &TransmitterSet,
    cfg: &BurstConfig,
    n_samples: usize,
    seed: u64,
) -> Result<PowerSampleSet> {
    if n_samples == 0 {
        return Err(invalid("n_samples", "at least one sample is required"));
    }
    let m = ts.len();
    let amps: Vec<f64> = ts.powers.iter().map(|p| p.sqrt()).collect();
    let duty = cfg.duty();
    let mut samples = vec![0.0; n_samples];

    if cfg.random_phase() {
        samples
            .par_chunks_mut(SAMPLE_BLOCK)
            .enumerate()
            .for_each(|(block, chunk)| {
                let mut rng = stream_rng(seed, block as u64);
                let mut cos = vec![0.0; m];
                let mut sin = vec![0.0; m];
                for out in chunk.iter_mut() {
                    for i in 0..m {
                        let (s, c) = uniform_phase(&mut rng).sin_cos();
                        cos[i] = c;
                        sin[i] = s;
                    }
                    *out = burst_power(&ts.powers, &amps, &cos, &sin, duty);
                }
            });
    } else {
        let phases = PhaseVector::random(m, &mut stream_rng(seed, ONCE_STREAM));
        let p = combine_burst_power(ts, &phases, duty)?;
        samples.fill(p);
    }

    Ok(PowerSampleSet {
        samples,
        seed,
        transmitters: ts.clone(),
        burst: *cfg,
    })
}

/// Expected power during a burst, `Σ Pᵢ / D`.
pub fn analytic_mean_burst(ts: &TransmitterSet, duty: f64) -> Result<f64> {
    check_duty(duty)?;
    Ok(ts.total() / duty)
}

/// Time-averaged received power. The duty cycle cancels: `Σ Pᵢ`.
pub fn analytic_time_avg(ts: &TransmitterSet) -> f64 {
    ts.total()
}

/// Standard deviation of the burst power, `D⁻¹ √(Σ_{i≠j} Pᵢ Pⱼ)`.
pub fn analytic_std_burst(ts: &TransmitterSet, duty: f64) -> Result<f64> {
    check_duty(duty)?;
    let p = &ts.powers;
    let mut pairs = 0.0;
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            pairs += p[i] * p[j];
        }
    }
    Ok((2.0 * pairs).sqrt() / duty)
}

/// Coefficient of variation of the burst power for `m` equal transmitters,
/// `√((m − 1)/m)`.
pub fn equal_power_cv(m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    ((m as f64 - 1.0) / m as f64).sqrt()
}
