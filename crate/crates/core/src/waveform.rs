//! Baseband power trace of the duty-cycled bursts.
//!
//! The carrier itself is not sampled: within a burst every transmitter is a
//! constant phasor, so the trace only needs to resolve the burst timing.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::interference::{BurstConfig, PhaseVector, TransmitterSet};
use crate::rng::{stream_rng, ONCE_STREAM};

/// Minimum number of samples per burst period.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 10.0;

#[derive(Debug, Clone)]
struct BurstDraw {
    index: u64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    /// Start offset of each transmitter's burst.
    jitter: Vec<f64>,
}

/// Lazily evaluated instantaneous received power `p(t)`.
///
/// Burst `k` of transmitter `i` is on during
/// `[kT + jᵢₖ, kT + DT + jᵢₖ)` with `jᵢₖ` uniform in `[−J, J]`. Phases and
/// offsets of burst `k` come from stream `k` of the seed, so the trace is
/// reproducible and can be evaluated in any order. Nothing is transmitted
/// before the first burst.
#[derive(Debug, Clone)]
pub struct Waveform {
    powers: Vec<f64>,
    amps: Vec<f64>,
    cfg: BurstConfig,
    seed: u64,
    fixed_phases: Option<(Vec<f64>, Vec<f64>)>,
    cache: Vec<BurstDraw>,
}

impl Waveform {
    pub fn new(ts: &TransmitterSet, cfg: &BurstConfig, seed: u64) -> Self {
        let fixed_phases = (!cfg.random_phase()).then(|| {
            let phases = PhaseVector::random(ts.len(), &mut stream_rng(seed, ONCE_STREAM));
            phases.as_slice().iter().map(|p| (p.cos(), p.sin())).unzip()
        });
        Self {
            powers: ts.powers().to_vec(),
            amps: ts.powers().iter().map(|p| p.sqrt()).collect(),
            cfg: *cfg,
            seed,
            fixed_phases,
            cache: Vec::with_capacity(4),
        }
    }

    fn draw(&self, index: u64) -> BurstDraw {
        let m = self.powers.len();
        let mut rng = stream_rng(self.seed, index);
        let (cos, sin) = match &self.fixed_phases {
            Some((c, s)) => (c.clone(), s.clone()),
            None => PhaseVector::random(m, &mut rng)
                .as_slice()
                .iter()
                .map(|p| (p.cos(), p.sin()))
                .unzip(),
        };
        let j = self.cfg.sync_jitter();
        let jitter = (0..m)
            .map(|_| if j > 0.0 { rng.gen_range(-j..=j) } else { 0.0 })
            .collect();
        BurstDraw {
            index,
            cos,
            sin,
            jitter,
        }
    }

    fn burst(&mut self, index: u64) -> &BurstDraw {
        if let Some(pos) = self.cache.iter().position(|b| b.index == index) {
            return &self.cache[pos];
        }
        if self.cache.len() >= 4 {
            // evict the oldest burst
            let oldest = (0..self.cache.len()).min_by_key(|&k| self.cache[k].index).unwrap();
            self.cache.swap_remove(oldest);
        }
        let draw = self.draw(index);
        self.cache.push(draw);
        self.cache.last().unwrap()
    }

    /// Received power at time `t ≥ 0`.
    pub fn power_at(&mut self, t: f64) -> f64 {
        let m = self.powers.len();
        let period = self.cfg.period();
        let on = self.cfg.on_time();
        let center = (t / period).floor().max(0.0) as u64;

        // (amplitude, cos, sin) of every transmitter that is on at t
        let mut active: Vec<(f64, f64, f64)> = Vec::with_capacity(m);
        for i in 0..m {
            // the latest burst that has started wins
            for k in [center + 1, center, center.wrapping_sub(1)] {
                if k == u64::MAX {
                    continue;
                }
                let amp = self.amps[i];
                let b = self.burst(k);
                let start = k as f64 * period + b.jitter[i];
                if t >= start && t < start + on {
                    active.push((amp, b.cos[i], b.sin[i]));
                    break;
                }
            }
        }

        let own: f64 = active.iter().map(|a| a.0 * a.0).sum();
        let mut cross = 0.0;
        for (x, a) in active.iter().enumerate() {
            for b in &active[x + 1..] {
                cross += a.0 * b.0 * (a.1 * b.1 + a.2 * b.2);
            }
        }
        ((own + 2.0 * cross) / self.cfg.duty()).max(0.0)
    }
}

/// Uniformly sampled power trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    pub sample_rate: f64,
    pub powers: Vec<f64>,
}

impl PowerTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.powers.len()).map(move |n| n as f64 / self.sample_rate)
    }

    pub fn time_average(&self) -> f64 {
        crate::stats::mean(&self.powers)
    }
}

/// Samples the burst trace on `[0, duration)` at `sample_rate` Hz.
pub fn generate_waveform(
    ts: &TransmitterSet,
    cfg: &BurstConfig,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<PowerTrace> {
    let min = MIN_SAMPLES_PER_PERIOD / cfg.period();
    if !(sample_rate >= min) || !sample_rate.is_finite() {
        return Err(Error::UnderResolved {
            rate: sample_rate,
            period: cfg.period(),
            min,
        });
    }
    if !(duration >= cfg.period()) || !duration.is_finite() {
        return Err(invalid("duration", format!("{duration} s is shorter than one period")));
    }
    let n = (duration * sample_rate).floor() as usize;
    let mut wave = Waveform::new(ts, cfg, seed);
    let powers = (0..n).map(|k| wave.power_at(k as f64 / sample_rate)).collect();
    Ok(PowerTrace { sample_rate, powers })
}
