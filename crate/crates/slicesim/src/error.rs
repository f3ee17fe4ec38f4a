use thiserror::Error;

/// Invalid model or protocol configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("erasure probability {0} outside [0, 1)")]
    InvalidErasureProbability(f64),
    #[error("network must have at least one link")]
    EmptyNetwork,
    #[error("rtt must be a positive even slot count, got {0}")]
    InvalidRtt(u64),
    #[error("slot duration must be positive, got {0}")]
    InvalidSlotDuration(f64),
    #[error("slice has no links")]
    EmptySlice,
    #[error("link index {index} out of range for a {links}-link network")]
    LinkIndexOutOfRange { index: usize, links: usize },
    #[error("link index {0} appears more than once")]
    DuplicateLink(usize),
    #[error("link index {0} assigned to more than one slice")]
    OverlappingSlices(usize),
    #[error("RLNC generation size must be >= 1")]
    InvalidGenerationSize,
    #[error("{name} rate must be >= 1, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("operation requires an RLNC protocol config")]
    ExpectedRlnc,
    #[error("operation requires an SR-ARQ protocol config")]
    ExpectedSrArq,
    #[error("requirement must have at least one constraint")]
    EmptyRequirement,
    #[error("requirement threshold {name} must be > 0, got {value}")]
    InvalidThreshold { name: &'static str, value: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Simulation-time failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("slice index {index} out of range ({slices} slices)")]
    SliceIndexOutOfRange { index: usize, slices: usize },
    #[error("trial exceeded the slot cap of {cap} slots ({delivered}/{expected} packets released)")]
    SlotCapExceeded {
        cap: u64,
        delivered: u64,
        expected: u64,
    },
    #[error("cannot aggregate an empty trial list")]
    NoTrials,
}
