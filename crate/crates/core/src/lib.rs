//! Effect measures for a binary treatment whose binary confounder is seen
//! only through a binary proxy (or driver), with the monotonicity checks
//! that decide when adjusting for the proxy lands between the crude and the
//! true effect.
//!
//! * [`model`]: parameterizations, validation, sampling, joint tables.
//! * [`effects`]: closed-form risk differences and related means.
//! * [`monotonicity`]: direction classification, ordering preconditions,
//!   bound verdicts.
//! * [`mc`]: the random-parameterization study.
//! * [`estimate`]: plug-in estimation from `(A, D, Y)` data and transport.
//! * [`suites`]: batch property checks behind `confounder-lab verify`.

pub mod effects;
pub mod error;
pub mod estimate;
pub mod mc;
pub mod model;
pub mod monotonicity;
pub mod suites;

pub use effects::{summarize, ArmPair, DerivedConditionals, EffectSummary};
pub use error::{Error, Result};
pub use estimate::{PopulationEstimates, Row, SampleDataset, TransportReport, Verdict};
pub use mc::{ExperimentSummary, RunRecord};
pub use model::{
    BinaryConditional, CausalParams, DriverParams, JointTable, OutcomeMeans, Params, ProxyParams,
    SamplingScheme,
};
pub use monotonicity::{
    Alignment, Bound, BoundsVerdict, Direction, MonotonicityReport, OrderingCase,
};
pub use suites::{Suite, SuiteReport};
