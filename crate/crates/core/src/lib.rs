//! Many-to-many RF power transfer with duty-cycled, random-phase bursts.
//!
//! Several energy transmitters send synchronized bursts on one carrier and
//! draw a fresh random phase for every burst. At a sensor reached by more
//! than one transmitter the bursts interfere, sometimes constructively and
//! sometimes destructively, so the instantaneous power fluctuates around an
//! unchanged time average. A harvester whose efficiency rises with input
//! power converts the peaks better than it loses on the troughs.
//!
//! Modules:
//! * [`interference`]: phasor combination, Monte Carlo burst powers, moments
//! * [`distribution`]: closed-form and empirical ratio distributions, L1 distance
//! * [`waveform`]: time-domain burst power traces
//! * [`harvester`]: efficiency curves and distribution-averaged efficiency
//! * [`network`]: transmitter/sensor geometry and path loss
//! * [`schemes`]: scheme comparison and capacitor charging

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distribution;
pub mod error;
pub mod harvester;
pub mod interference;
pub mod network;
pub mod rng;
pub mod schemes;
pub mod stats;
pub mod units;
pub mod waveform;

pub use distribution::{
    empirical_distribution, l1_distance, ratio_pdf_closed_form, ClosedForm, Histogram, PowerDistribution,
};
pub use error::{Error, Result};
pub use harvester::{
    average_efficiency, equalized_curve, harvested_power_duty, load_curve, AveragingMode, EfficiencyCurve,
    HarvestResult,
};
pub use interference::{
    analytic_mean_burst, analytic_std_burst, analytic_time_avg, combine_burst_power, equal_power_cv,
    sample_burst_powers, BurstConfig, PhaseVector, PowerSampleSet, TransmitterSet,
};
pub use network::{coinciding_ets, EnergyTransmitter, NetworkTopology, PathLossKind, PathLossModel, Point};
pub use schemes::{
    charge_trace, charging_time, run_comparison, scheme_harvest, scheme_harvest_estimate, CapacitorSpec, ChargeTrace,
    ComparisonRecord, ComparisonResult, HarvestEstimate, SchemeKind, SchemeSpec,
};
pub use waveform::{generate_waveform, PowerTrace, Waveform};
