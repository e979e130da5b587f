//! Fixtures shared by the benchmarks.

use quasidark_core::dynamics::{RampShape, Schedule};
use quasidark_core::{SpaceSpec, SystemParams};

pub fn experimental() -> SystemParams {
    SystemParams::experimental()
}

pub fn small_space() -> SpaceSpec {
    SpaceSpec::new(2, 2, 2).expect("valid cutoffs")
}

/// Storage ramp 30 -> 0 MHz over `duration` microseconds.
pub fn storage_ramp(duration: f64) -> Schedule {
    Schedule::new(&experimental(), RampShape::Cosine, 30.0, 0.0, duration, 65).expect("valid schedule")
}
