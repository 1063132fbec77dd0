//! Health Index aggregation for substation asset hierarchies.
//!
//! Asset HI scores (0–10, 0 = no data) roll up to bay and substation level
//! under four strategies: weighted average with a worst-case cap, FMECA
//! severity weighting, log-cost weighted power mean, and failure
//! interpretation. Around them sit fleet/catalog ingest with a data-quality
//! audit, method comparison reports, SVG charts and a seeded fleet generator.
//!
//! The aggregation math is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common instantiations.

pub mod aggregation;
pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod ingest;
pub mod model;
pub mod scalar;
pub mod synthgen;

pub use aggregation::{
    agg_failure_interpretation, agg_fmeca, agg_replacement_cost, agg_weighted_average,
    aggregate_bay, aggregate_substation, score_substation, AggregationError, BayScore,
    SubstationScore,
};
pub use catalog::{severity_of, Catalogs, SeverityCatalog, SeverityRule, WeightCatalog, WeightEntry};
pub use model::{
    band_of, Asset, AssetType, Bay, ColorBand, HealthScore, Method, Normalization,
    PopulationClass, StrategyConfig, Substation,
};
pub use scalar::Scalar;

pub type BayScoreF64 = BayScore<f64>;
pub type BayScoreF32 = BayScore<f32>;
pub type SubstationScoreF64 = SubstationScore<f64>;
pub type SubstationScoreF32 = SubstationScore<f32>;
pub type StrategyConfigF64 = StrategyConfig<f64>;
pub type StrategyConfigF32 = StrategyConfig<f32>;
