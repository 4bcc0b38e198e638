//! Distributions of the normalized burst-power ratio `x = p / E[p]`.
//!
//! Every distribution here has mean 1. Two equal random-phase sources give
//! the U-shaped arcsine law on `(0, 2)`, many sources approach the unit
//! exponential, and a single source is a point mass at 1.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::interference::PowerSampleSet;
use crate::stats::Moments;

/// Comparisons against distributions with unbounded support stop here and
/// account for the remaining mass as a single tail cell.
pub const L1_CLIP: f64 = 12.0;

/// Cells used when neither operand carries its own bin grid.
const CLOSED_FORM_CELLS: usize = 48_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    /// Two equal sources: density `1/(π √(x(2 − x)))` on `(0, 2)`.
    Arcsine2,
    /// Many-source limit: density `e^{−x}` on `[0, ∞)`.
    Exponential,
    /// Single source: all mass at `x = 1`.
    Delta,
}

impl ClosedForm {
    pub fn name(self) -> &'static str {
        match self {
            ClosedForm::Arcsine2 => "arcsine2",
            ClosedForm::Exponential => "exponential",
            ClosedForm::Delta => "delta",
        }
    }
}

impl FromStr for ClosedForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arcsine2" | "arcsine" => Ok(ClosedForm::Arcsine2),
            "exponential" | "exp" => Ok(ClosedForm::Exponential),
            "delta" => Ok(ClosedForm::Delta),
            other => Err(Error::UnknownDistribution(other.to_string())),
        }
    }
}

/// Piecewise-constant density on uniform bins covering `[0, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    upper: f64,
    density: Vec<f64>,
}

impl Histogram {
    /// Bins non-negative ratios on `[0, max ratio]`.
    pub fn from_ratios(ratios: &[f64], n_bins: usize) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::EmptySamples);
        }
        if n_bins < 2 {
            return Err(invalid("n_bins", format!("{n_bins} must be >= 2")));
        }
        let upper = ratios.iter().copied().fold(0.0, f64::max);
        if !(upper.is_finite() && upper > 0.0) {
            return Err(Error::Degenerate(format!("ratio range [0, {upper}]")));
        }
        let mut counts = vec![0u64; n_bins];
        for &r in ratios {
            let k = ((r / upper) * n_bins as f64) as usize;
            counts[k.min(n_bins - 1)] += 1;
        }
        let norm = ratios.len() as f64 * upper / n_bins as f64;
        Ok(Self {
            upper,
            density: counts.into_iter().map(|c| c as f64 / norm).collect(),
        })
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn n_bins(&self) -> usize {
        self.density.len()
    }

    pub fn width(&self) -> f64 {
        self.upper / self.density.len() as f64
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.density.len();
        (0..=n).map(|k| self.upper * k as f64 / n as f64).collect()
    }

    fn density_at(&self, x: f64) -> f64 {
        if !(0.0..=self.upper).contains(&x) {
            return 0.0;
        }
        let k = ((x / self.upper) * self.n_bins() as f64) as usize;
        self.density[k.min(self.n_bins() - 1)]
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.upper {
            return self.density.iter().sum::<f64>() * self.width();
        }
        let w = self.width();
        // x / w can round up to n just below the upper edge
        let full = ((x / w) as usize).min(self.n_bins() - 1);
        let below: f64 = self.density[..full].iter().sum::<f64>() * w;
        below + self.density[full] * (x - full as f64 * w)
    }

    fn mean(&self) -> f64 {
        let w = self.width();
        self.density
            .iter()
            .enumerate()
            .map(|(k, d)| d * w * (k as f64 + 0.5) * w)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PowerDistribution {
    Closed(ClosedForm),
    Empirical(Histogram),
}

impl From<ClosedForm> for PowerDistribution {
    fn from(kind: ClosedForm) -> Self {
        PowerDistribution::Closed(kind)
    }
}

impl PowerDistribution {
    pub fn name(&self) -> &'static str {
        match self {
            PowerDistribution::Closed(k) => k.name(),
            PowerDistribution::Empirical(_) => "empirical",
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, PowerDistribution::Closed(ClosedForm::Delta))
    }

    /// Density at `x`. A point mass has no density; it reports `+∞` at 1.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            PowerDistribution::Closed(ClosedForm::Arcsine2) => {
                if x > 0.0 && x < 2.0 {
                    1.0 / (PI * (x * (2.0 - x)).sqrt())
                } else {
                    0.0
                }
            }
            PowerDistribution::Closed(ClosedForm::Exponential) => {
                if x >= 0.0 {
                    (-x).exp()
                } else {
                    0.0
                }
            }
            PowerDistribution::Closed(ClosedForm::Delta) => {
                if x == 1.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PowerDistribution::Empirical(h) => h.density_at(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            PowerDistribution::Closed(ClosedForm::Arcsine2) => {
                if x <= 0.0 {
                    0.0
                } else if x >= 2.0 {
                    1.0
                } else {
                    (1.0 - x).acos() / PI
                }
            }
            PowerDistribution::Closed(ClosedForm::Exponential) => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            PowerDistribution::Closed(ClosedForm::Delta) => {
                if x >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PowerDistribution::Empirical(h) => h.cdf(x),
        }
    }

    /// Probability of `(lo, hi]`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if let PowerDistribution::Closed(ClosedForm::Exponential) = self {
            // difference of survival functions keeps precision in the tail
            let (lo, hi) = (lo.max(0.0), hi.max(0.0));
            return (-lo).exp() - (-hi).exp();
        }
        self.cdf(hi) - self.cdf(lo)
    }

    pub fn mean(&self) -> f64 {
        match self {
            PowerDistribution::Closed(_) => 1.0,
            PowerDistribution::Empirical(h) => h.mean(),
        }
    }

    /// Right end of the support (`∞` for the exponential).
    pub fn support_upper(&self) -> f64 {
        match self {
            PowerDistribution::Closed(ClosedForm::Arcsine2) => 2.0,
            PowerDistribution::Closed(ClosedForm::Exponential) => f64::INFINITY,
            PowerDistribution::Closed(ClosedForm::Delta) => 1.0,
            PowerDistribution::Empirical(h) => h.upper,
        }
    }

    fn grid_edges(&self) -> Option<Vec<f64>> {
        match self {
            PowerDistribution::Empirical(h) => Some(h.edges()),
            PowerDistribution::Closed(_) => None,
        }
    }
}

/// Closed-form ratio distribution by name: `arcsine2`, `exponential` or `delta`.
pub fn ratio_pdf_closed_form(kind: &str) -> Result<PowerDistribution> {
    kind.parse::<ClosedForm>().map(PowerDistribution::Closed)
}

/// Histogram of `p / mean(p)` over uniform bins on `[0, max ratio]`.
pub fn empirical_distribution(samples: &PowerSampleSet, n_bins: usize) -> Result<PowerDistribution> {
    if samples.samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mean = samples.samples.iter().copied().collect::<Moments>().mean();
    if !(mean > 0.0) {
        return Err(Error::Degenerate(format!("sample mean {mean}")));
    }
    let ratios: Vec<f64> = samples.samples.iter().map(|p| p / mean).collect();
    Histogram::from_ratios(&ratios, n_bins).map(PowerDistribution::Empirical)
}

/// `∫ |f_a − f_b| dx` on a shared grid.
///
/// The grid is the union of both operands' bin edges (or a fine uniform grid
/// when both are closed forms), cut at [`L1_CLIP`]. Each cell compares the
/// probability mass of the two distributions, which is exact for histograms
/// and handles integrable singularities of the closed forms. Mass beyond the
/// last edge is compared as one tail cell.
pub fn l1_distance(a: &PowerDistribution, b: &PowerDistribution) -> Result<f64> {
    match (a.is_point_mass(), b.is_point_mass()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => {
            return Err(Error::UnsupportedComparison(a.name(), b.name()));
        }
        _ => {}
    }

    let mut edges: Vec<f64> = match (a.grid_edges(), b.grid_edges()) {
        (Some(mut ea), Some(eb)) => {
            ea.extend(eb);
            ea
        }
        (Some(e), None) | (None, Some(e)) => e,
        (None, None) => {
            let upper = a.support_upper().max(b.support_upper()).min(L1_CLIP);
            (0..=CLOSED_FORM_CELLS)
                .map(|k| upper * k as f64 / CLOSED_FORM_CELLS as f64)
                .collect()
        }
    };
    edges.retain(|e| *e <= L1_CLIP);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut total = 0.0;
    for w in edges.windows(2) {
        total += (a.mass(w[0], w[1]) - b.mass(w[0], w[1])).abs();
    }
    if let Some(&last) = edges.last() {
        total += ((1.0 - a.cdf(last)) - (1.0 - b.cdf(last))).abs();
    }
    Ok(total.min(2.0))
}
