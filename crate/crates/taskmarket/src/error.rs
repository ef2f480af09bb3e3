//! Error types, one enum per subsystem.

use thiserror::Error;

use crate::model::OccupationKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("task index {0} outside [0, 1]")]
    TaskIndexOutOfRange(f64),
    #[error("occupation {0}: capability components must be finite and nonnegative")]
    NegativeCapability(OccupationKind),
    #[error("occupation {0}: capability vector must not be all zero")]
    ZeroCapability(OccupationKind),
    #[error("occupation {kind}: wage {wage} must be positive")]
    NonPositiveWage { kind: OccupationKind, wage: f64 },
    #[error("digital base productivity {0} must be positive")]
    NonPositiveBaseProductivity(f64),
    #[error("digital capability {0} must be nonnegative")]
    NegativeDigitalCapability(f64),
    #[error("complexity exponent {0} must be greater than 1")]
    ExponentNotAboveOne(f64),
    #[error("digital rental price {0} must be positive")]
    NonPositiveRental(f64),
    #[error("economy must contain at least one occupation")]
    NoOccupations,
    #[error("duplicate occupation kind {0} in economy")]
    DuplicateOccupation(OccupationKind),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("scan_points must be at least 2, got {0}")]
    TooFewScanPoints(usize),
    #[error("refinement tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error("no executor has finite cost at z = {0}")]
    InfeasibleTask(f64),
    #[error("all tasks are assigned to digital capital; hiring shares are undefined")]
    AllDigital,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CutoffError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cost curves never cross: one executor dominates for every task")]
    NoCrossing,
    #[error("cost gap changes sign {count} times; the single-cutoff construct does not apply")]
    MultipleCrossings { count: usize },
    #[error("effective productivity is not increasing over the task range")]
    RegularityViolated,
    #[error("digital capital is cheaper below the crossing; the cutoff construct does not apply")]
    InvertedCrossing,
    #[error("comparative-statics denominator smaller than 1e-14 at the root")]
    DegenerateDenominator,
    #[error("theta grid must be non-empty and strictly increasing")]
    BadThetaGrid,
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("negative weight {weight} for group {group}")]
    NegativeWeight { group: OccupationKind, weight: f64 },
    #[error("no weight defined for group {0} present in the counts")]
    MissingWeight(OccupationKind),
    #[error("shares do not form a distribution: {0}")]
    NotDistribution(String),
    #[error("input must be non-empty")]
    EmptyInput,
    #[error("percentile bounds must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})")]
    BadPercentileBounds { lo: f64, hi: f64 },
    #[error("duplicate key in series: {0}")]
    DuplicateKey(String),
    #[error("lag must be at least 1")]
    ZeroLag,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("labeled set has {labeled} entries but results have {results}")]
    LengthMismatch { labeled: usize, results: usize },
    #[error("labeled title {index} is {labeled:?} but result title is {result:?}")]
    TitleMismatch {
        index: usize,
        labeled: String,
        result: String,
    },
    #[error("lexicon has no phrases for category {0}")]
    EmptyLexiconCategory(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconError {
    #[error("column {0:?} not found in panel")]
    UnknownColumn(String),
    #[error("duplicate (firm, year) pair ({firm}, {year})")]
    DuplicateFirmYear { firm: i64, year: i64 },
    #[error("column {name:?} has {len} values but the panel has {expected} rows")]
    ColumnLengthMismatch {
        name: String,
        len: usize,
        expected: usize,
    },
    #[error("design matrix is rank deficient at column {0}")]
    RankDeficient(usize),
    #[error("need at least as many rows ({rows}) as columns ({cols})")]
    TooFewRows { rows: usize, cols: usize },
    #[error("cluster-robust errors need at least 2 clusters, got {0}")]
    SingleCluster(usize),
    #[error("within transform did not converge after {0} iterations")]
    DemeaningDidNotConverge(usize),
    #[error("fixed-effect factor {0:?} has no levels")]
    EmptyFactor(String),
    #[error("outcome {0:?} may not appear among the regressors")]
    OutcomeAmongRegressors(String),
    #[error("instrument list must be non-empty")]
    NoInstruments,
    #[error("no rows remain after dropping incomplete observations")]
    EmptySample,
    #[error("csv error: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error("all tasks go to digital capital at theta = {0}; no labor shares to generate")]
    AllDigitalAtTheta(f64),
    #[error("{0}")]
    BadConfig(String),
}
