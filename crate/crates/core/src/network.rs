//! Planar placement of energy transmitters and sensors, and the average
//! power each transmitter delivers to a sensor.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::interference::TransmitterSet;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default ratio to the strongest contribution above which a transmitter
/// counts as coinciding (−10 dB).
pub const DEFAULT_COINCIDENCE_THRESHOLD: f64 = 0.1;

pub const DEFAULT_MIN_DISTANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLossKind {
    /// Friis: `(c / (4π f₀ r))²`.
    FreeSpace { carrier_hz: f64 },
    /// `r^(−exponent)`.
    PowerLaw { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    kind: PathLossKind,
    /// Antenna gains and any other constant factor.
    reference_gain: f64,
    min_distance: f64,
}

impl PathLossModel {
    pub fn free_space(carrier_hz: f64) -> Result<Self> {
        if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
            return Err(invalid("carrier_f0", format!("{carrier_hz} must be > 0")));
        }
        Ok(Self {
            kind: PathLossKind::FreeSpace { carrier_hz },
            reference_gain: 1.0,
            min_distance: DEFAULT_MIN_DISTANCE,
        })
    }

    pub fn power_law(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent >= 2.0) {
            return Err(invalid("exponent", format!("{exponent} must be >= 2")));
        }
        Ok(Self {
            kind: PathLossKind::PowerLaw { exponent },
            reference_gain: 1.0,
            min_distance: DEFAULT_MIN_DISTANCE,
        })
    }

    pub fn with_reference_gain(mut self, gain: f64) -> Result<Self> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(invalid("reference_gain", format!("{gain} must be > 0")));
        }
        self.reference_gain = gain;
        Ok(self)
    }

    pub fn with_min_distance(mut self, meters: f64) -> Result<Self> {
        if !(meters.is_finite() && meters > 0.0) {
            return Err(invalid("min_distance", format!("{meters} must be > 0")));
        }
        self.min_distance = meters;
        Ok(self)
    }

    pub fn kind(&self) -> PathLossKind {
        self.kind
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// Power gain at distance `r` meters.
    pub fn path_gain(&self, r: f64) -> Result<f64> {
        if !(r >= self.min_distance) {
            return Err(Error::BelowMinimumDistance {
                distance: r,
                minimum: self.min_distance,
            });
        }
        let g = match self.kind {
            PathLossKind::FreeSpace { carrier_hz } => (SPEED_OF_LIGHT / (4.0 * PI * carrier_hz * r)).powi(2),
            PathLossKind::PowerLaw { exponent } => r.powf(-exponent),
        };
        Ok(self.reference_gain * g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTransmitter {
    pub position: Point,
    /// Average transmitted power in watts.
    pub tx_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    ets: Vec<EnergyTransmitter>,
    sensors: Vec<Point>,
    pathloss: PathLossModel,
}

impl NetworkTopology {
    pub fn new(ets: Vec<EnergyTransmitter>, sensors: Vec<Point>, pathloss: PathLossModel) -> Result<Self> {
        if ets.is_empty() {
            return Err(invalid("ets", "at least one energy transmitter is required"));
        }
        if sensors.is_empty() {
            return Err(invalid("sensors", "at least one sensor is required"));
        }
        for (i, et) in ets.iter().enumerate() {
            if !(et.tx_power.is_finite() && et.tx_power > 0.0) {
                return Err(invalid(
                    "ets",
                    format!("transmitter {i}: tx power {} must be > 0", et.tx_power),
                ));
            }
            for (s, pos) in sensors.iter().enumerate() {
                let d = et.position.distance(pos);
                if !(d >= pathloss.min_distance) {
                    return Err(invalid(
                        "sensors",
                        format!(
                            "sensor {s} is {d} m from transmitter {i}, below the {} m minimum",
                            pathloss.min_distance
                        ),
                    ));
                }
            }
        }
        Ok(Self { ets, sensors, pathloss })
    }

    pub fn ets(&self) -> &[EnergyTransmitter] {
        &self.ets
    }

    pub fn sensors(&self) -> &[Point] {
        &self.sensors
    }

    pub fn pathloss(&self) -> &PathLossModel {
        &self.pathloss
    }

    /// `Pᵢ = P_Tᵢ · g(rᵢ)` for every transmitter, strongest first.
    pub fn received_powers(&self, sensor_index: usize) -> Result<TransmitterSet> {
        let sensor = self.sensors.get(sensor_index).ok_or(Error::IndexOutOfRange {
            index: sensor_index,
            len: self.sensors.len(),
        })?;
        let mut powers = self
            .ets
            .iter()
            .map(|et| Ok(et.tx_power * self.pathloss.path_gain(et.position.distance(sensor))?))
            .collect::<Result<Vec<f64>>>()?;
        powers.sort_by(|a, b| b.total_cmp(a));
        TransmitterSet::new(powers)
    }
}

/// Number of transmitters delivering at least `threshold_ratio` times the
/// strongest contribution.
pub fn coinciding_ets(ts: &TransmitterSet, threshold_ratio: f64) -> Result<usize> {
    if !(threshold_ratio > 0.0 && threshold_ratio <= 1.0) {
        return Err(invalid(
            "threshold_ratio",
            format!("{threshold_ratio} must lie in (0, 1]"),
        ));
    }
    let cut = threshold_ratio * ts.max();
    Ok(ts.powers().iter().filter(|p| **p >= cut).count())
}
