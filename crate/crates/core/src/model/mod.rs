//! The MDPU data model: instances, discovery schedules, the `K0` threshold,
//! growth bounds and the learnability classifier.

mod bound;
mod classify;
mod instance;
mod k0;
mod schedule;

pub use bound::{finv_lower_bound, k0_bound, BoundError, BoundFn, BoundSide, DeclaredBound, FinvBounds};
pub use classify::{
    classify_numerically, classify_schedule, classify_schedule_with, ClassifyOptions, Evidence, Learnability,
    LearnabilityVerdict, LinearFit, NumericGrowth,
};
pub use instance::{validate_mdpu, InstanceViolation, Knowledge, MdpuInstance};
pub use k0::{k0, k0_target, k0_with, K0Options, NoK0Reason, K0, STALL_TOLERANCE};
pub use schedule::{
    CompensatedSum, CustomSchedule, DiscoverySchedule, GrowthTag, JLift, ScheduleError, ScheduleKind, POWER_LAW_SUM,
};
