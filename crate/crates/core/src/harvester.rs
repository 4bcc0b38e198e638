//! RF-to-DC efficiency curves and the effective efficiency seen by a
//! harvester fed with duty-cycled, randomly interfering bursts.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::distribution::{ClosedForm, PowerDistribution};
use crate::error::{invalid, Error, Result};
use crate::interference::check_duty;
use crate::units::dbm_to_watts;

/// Upper limit of the exponential ratio integral; the omitted mass is e^{-40}.
pub const EXPONENTIAL_TRUNCATION: f64 = 40.0;

/// Absolute tolerance of the averaged efficiency.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

/// Largest tolerated deviation of a ratio distribution's mean from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-3;

/// Efficiency versus input power, piecewise linear in `(ln p, η)`.
///
/// Below the first point the curve returns a fixed extrapolation value
/// (0 unless configured); above the last point it holds the last efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCurve {
    powers: Vec<f64>,
    log_powers: Vec<f64>,
    efficiencies: Vec<f64>,
    below_range: f64,
}

impl EfficiencyCurve {
    /// Points are `(input power in watts, efficiency)`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("points", "an efficiency curve needs at least two points"));
        }
        for (k, &(p, eta)) in points.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(invalid("points", format!("point {k}: power {p} must be > 0")));
            }
            check_efficiency(eta).map_err(|r| invalid("points", format!("point {k}: {r}")))?;
            if k > 0 && p <= points[k - 1].0 {
                return Err(invalid("points", format!("point {k}: powers must strictly increase")));
            }
        }
        let (powers, efficiencies): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        Ok(Self {
            log_powers: powers.iter().map(|p| p.ln()).collect(),
            powers,
            efficiencies,
            below_range: 0.0,
        })
    }

    /// Points are `(input power in dBm, efficiency)`.
    pub fn from_dbm(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(d, e)| (dbm_to_watts(d), e)).collect())
    }

    pub fn with_below_range(mut self, efficiency: f64) -> Result<Self> {
        check_efficiency(efficiency).map_err(|r| invalid("below_range", r))?;
        self.below_range = efficiency;
        Ok(self)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.powers.iter().copied().zip(self.efficiencies.iter().copied())
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn below_range(&self) -> f64 {
        self.below_range
    }

    pub fn max_efficiency(&self) -> f64 {
        self.efficiencies.iter().copied().fold(self.below_range, f64::max)
    }

    /// Interpolated efficiency at `p_in` watts.
    pub fn efficiency_at(&self, p_in: f64) -> Result<f64> {
        if !(p_in >= 0.0) {
            return Err(invalid("p_in", format!("{p_in} must be >= 0")));
        }
        Ok(self.eval(p_in))
    }

    pub(crate) fn eval(&self, p: f64) -> f64 {
        let n = self.powers.len();
        if p < self.powers[0] {
            return self.below_range;
        }
        if p >= self.powers[n - 1] {
            return self.efficiencies[n - 1];
        }
        // first index with power > p; 1 <= hi <= n - 1
        let hi = self.powers.partition_point(|&q| q <= p);
        let lo = hi - 1;
        let t = (p.ln() - self.log_powers[lo]) / (self.log_powers[hi] - self.log_powers[lo]);
        self.efficiencies[lo] + t * (self.efficiencies[hi] - self.efficiencies[lo])
    }
}

fn check_efficiency(eta: f64) -> std::result::Result<(), String> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(format!("efficiency {eta} is outside [0, 1]"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestResult {
    pub average_efficiency: f64,
    pub harvested_power: f64,
    pub input_time_avg: f64,
}

impl HarvestResult {
    pub(crate) fn new(average_efficiency: f64, input_time_avg: f64) -> Self {
        Self {
            average_efficiency,
            harvested_power: average_efficiency * input_time_avg,
            input_time_avg,
        }
    }
}

/// How instantaneous efficiency is averaged over the burst-power distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AveragingMode {
    /// `η̄ = E[η(P x) · x]`: harvested power divided by average input power.
    #[default]
    PowerWeighted,
    /// `η̄ = E[η(P x)]`: plain expectation of the efficiency.
    Unweighted,
}

impl AveragingMode {
    pub fn name(self) -> &'static str {
        match self {
            AveragingMode::PowerWeighted => "power_weighted",
            AveragingMode::Unweighted => "unweighted",
        }
    }
}

impl FromStr for AveragingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "power_weighted" => Ok(AveragingMode::PowerWeighted),
            "unweighted" => Ok(AveragingMode::Unweighted),
            other => Err(invalid("mode", format!("unknown averaging mode `{other}`"))),
        }
    }
}

/// Deterministic duty-cycled input: the harvester sees `P_R / D` during the
/// on-time, so `P_H = η(P_R / D) · P_R`.
pub fn harvested_power_duty(curve: &EfficiencyCurve, p_avg: f64, duty: f64) -> Result<HarvestResult> {
    if !(p_avg >= 0.0) {
        return Err(invalid("p_avg", format!("{p_avg} must be >= 0")));
    }
    check_duty(duty)?;
    Ok(HarvestResult::new(curve.eval(p_avg / duty), p_avg))
}

/// Effective efficiency when the input power is `p_avg · x` with `x` drawn
/// from the unit-mean ratio distribution `dist`.
pub fn average_efficiency(
    curve: &EfficiencyCurve,
    dist: &PowerDistribution,
    p_avg: f64,
    mode: AveragingMode,
) -> Result<HarvestResult> {
    if !(p_avg.is_finite() && p_avg > 0.0) {
        return Err(invalid("p_avg", format!("{p_avg} must be > 0")));
    }
    let mean = dist.mean();
    if !((mean - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
        return Err(Error::NotNormalized {
            mean,
            tolerance: NORMALIZATION_TOLERANCE,
        });
    }
    let g = |x: f64| {
        let eta = curve.eval(p_avg * x);
        match mode {
            AveragingMode::PowerWeighted => eta * x,
            AveragingMode::Unweighted => eta,
        }
    };
    // ratio values at which the integrand has a kink or a jump
    let breaks: Vec<f64> = curve.powers.iter().map(|p| p / p_avg).collect();

    let eta_bar = match dist {
        PowerDistribution::Closed(ClosedForm::Delta) => g(1.0),
        PowerDistribution::Closed(ClosedForm::Exponential) => {
            integrate_pieces(|x| g(x) * (-x).exp(), 0.0, EXPONENTIAL_TRUNCATION, &breaks)?
        }
        PowerDistribution::Closed(ClosedForm::Arcsine2) => {
            // x = 1 − cos θ maps (0, 2) to (0, π) and f(x) dx to dθ / π
            let theta_breaks: Vec<f64> = breaks
                .iter()
                .filter(|b| **b > 0.0 && **b < 2.0)
                .map(|b| (1.0 - b).acos())
                .collect();
            integrate_pieces(|t| g(1.0 - t.cos()) / PI, 0.0, PI, &theta_breaks)?
        }
        PowerDistribution::Empirical(h) => {
            let w = h.width();
            let mut total = 0.0;
            for (k, &d) in h.densities().iter().enumerate() {
                if d > 0.0 {
                    let lo = k as f64 * w;
                    total += d * integrate_pieces(g, lo, lo + w, &breaks)?;
                }
            }
            total
        }
    };
    Ok(HarvestResult::new(eta_bar, p_avg))
}

/// Integrates `f` over `[a, b]`, splitting at every break point inside the
/// interval so each piece is smooth.
fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64> {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|x| *x > a && *x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    let piece_tol = QUADRATURE_TOLERANCE * 1e-3 / cuts.len() as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            let out = quadrature::integrate(&f, w[0], w[1], piece_tol);
            total += out.integral;
            err += out.error_estimate;
        }
    }
    if err > QUADRATURE_TOLERANCE {
        return Err(Error::Quadrature(err));
    }
    Ok(total)
}

/// Averaged efficiency evaluated at each power of `grid`, as a new curve.
pub fn equalized_curve(
    curve: &EfficiencyCurve,
    dist: &PowerDistribution,
    mode: AveragingMode,
    grid: &[f64],
) -> Result<EfficiencyCurve> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("power_grid", "grid powers must strictly increase"));
    }
    let points = grid
        .iter()
        .map(|&p| average_efficiency(curve, dist, p, mode).map(|r| (p, r.average_efficiency.clamp(0.0, 1.0))))
        .collect::<Result<Vec<_>>>()?;
    EfficiencyCurve::new(points)?.with_below_range(curve.below_range)
}

/// Parses a curve table: one `power_dBm, efficiency` row per line, `#`
/// comments, efficiency as a fraction or with a `%` suffix. Rows must be in
/// strictly increasing power order.
pub fn load_curve(source: &str) -> Result<EfficiencyCurve> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut last_dbm = f64::NEG_INFINITY;
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let bad = |reason: String| Error::CurveParse { line, reason };
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        let [dbm, eff] = fields[..] else {
            return Err(bad(format!("expected 2 comma-separated fields, got {}", fields.len())));
        };
        let dbm: f64 = dbm.parse().map_err(|_| bad(format!("`{dbm}` is not a power in dBm")))?;
        if !dbm.is_finite() {
            return Err(bad(format!("`{dbm}` is not a finite power")));
        }
        let eta = match eff.strip_suffix('%') {
            Some(pct) => pct.trim().parse::<f64>().map(|v| v / 100.0),
            None => eff.parse::<f64>(),
        }
        .map_err(|_| bad(format!("`{eff}` is not an efficiency")))?;
        check_efficiency(eta).map_err(bad)?;
        if dbm <= last_dbm {
            return Err(bad(format!(
                "power {dbm} dBm does not exceed previous row ({last_dbm} dBm)"
            )));
        }
        last_dbm = dbm;
        points.push((dbm, eta));
    }
    if points.len() < 2 {
        return Err(Error::CurveParse {
            line: source.lines().count(),
            reason: format!("need at least two data rows, found {}", points.len()),
        });
    }
    EfficiencyCurve::from_dbm(&points)
}
