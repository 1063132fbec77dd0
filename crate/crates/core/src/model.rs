//! Domain types for the asset → bay → substation hierarchy.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{round_half_up, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("health score {0} outside 0..=10")]
    ScoreOutOfRange(i64),
    #[error("unknown population class `{0}`")]
    UnknownClass(String),
    #[error("unknown aggregation method `{0}`")]
    UnknownMethod(String),
    #[error("unknown normalization `{0}`")]
    UnknownNormalization(String),
    #[error("duplicate asset id `{asset_id}` in bay `{bay_id}`")]
    DuplicateAssetId { bay_id: String, asset_id: String },
    #[error("duplicate bay id `{bay_id}` in substation `{substation_id}`")]
    DuplicateBayId { substation_id: String, bay_id: String },
    #[error("invalid strategy config: {0}")]
    InvalidConfig(String),
}

/// Integer asset health score. 0 is "no data" (White); 1..=10 are real conditions with 10 best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct HealthScore(u8);

impl HealthScore {
    pub const INVALID: HealthScore = HealthScore(0);
    pub const MAX: u8 = 10;

    pub fn new(value: u8) -> Result<Self, ModelError> {
        if value > Self::MAX {
            return Err(ModelError::ScoreOutOfRange(value as i64));
        }
        Ok(HealthScore(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_invalid(self) -> bool {
        self.0 == 0
    }

    pub fn band(self) -> ColorBand {
        band_of(self)
    }
}

impl TryFrom<u8> for HealthScore {
    type Error = ModelError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        HealthScore::new(v)
    }
}

impl From<HealthScore> for u8 {
    fn from(h: HealthScore) -> u8 {
        h.0
    }
}

impl fmt::Display for HealthScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorBand {
    Green,
    Orange,
    Red,
    Violet,
    White,
}

impl ColorBand {
    pub const ALL: [ColorBand; 5] = [
        ColorBand::Green,
        ColorBand::Orange,
        ColorBand::Red,
        ColorBand::Violet,
        ColorBand::White,
    ];

    /// Inclusive score range covered by the band.
    pub fn score_range(self) -> (u8, u8) {
        match self {
            ColorBand::Green => (9, 10),
            ColorBand::Orange => (7, 8),
            ColorBand::Red => (4, 6),
            ColorBand::Violet => (1, 3),
            ColorBand::White => (0, 0),
        }
    }

    /// Interpretation attached to a bay band under failure-interpretation scoring.
    pub fn bay_meaning(self) -> &'static str {
        match self {
            ColorBand::Green => "fit for service",
            ColorBand::Orange => "monitor; minor degradation of a bay-critical asset",
            ColorBand::Red => "plan intervention; bay reliability reduced",
            ColorBand::Violet => "imminent bay outage risk",
            ColorBand::White => "indeterminate; insufficient valid data",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColorBand::Green => "green",
            ColorBand::Orange => "orange",
            ColorBand::Red => "red",
            ColorBand::Violet => "violet",
            ColorBand::White => "white",
        }
    }

    /// Band of a real-valued aggregate: round half up, clamp into 0..=10, then `band_of`.
    pub fn of_real<T: Scalar>(score: T) -> ColorBand {
        let r = round_half_up(score)
            .max(T::zero())
            .min(T::of_u32(HealthScore::MAX as u32));
        let v = r.to_u8().unwrap_or(0);
        band_of(HealthScore(v))
    }
}

impl fmt::Display for ColorBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Color band containing `score`.
pub fn band_of(score: HealthScore) -> ColorBand {
    match score.0 {
        0 => ColorBand::White,
        1..=3 => ColorBand::Violet,
        4..=6 => ColorBand::Red,
        7..=8 => ColorBand::Orange,
        _ => ColorBand::Green,
    }
}

/// Canonical asset type key, e.g. `circuit_breaker`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssetType(String);

impl AssetType {
    pub const EARTHING: &'static str = "earthing";
    pub const COMPENSATION_COIL: &'static str = "compensation_coil";
    pub const PROTECTION_DEVICE: &'static str = "protection_device";
    pub const POWER_TRANSFORMER: &'static str = "power_transformer";
    pub const SURGE_ARRESTOR: &'static str = "surge_arrestor";
    pub const DISCONNECTOR: &'static str = "disconnector";
    pub const INSTRUMENT_TRANSFORMER: &'static str = "instrument_transformer";
    pub const CONTROL_DEVICE: &'static str = "control_device";
    pub const CIRCUIT_BREAKER: &'static str = "circuit_breaker";

    /// The nine asset types of the default FMECA catalog, in catalog order.
    pub const CANONICAL: [&'static str; 9] = [
        Self::EARTHING,
        Self::COMPENSATION_COIL,
        Self::PROTECTION_DEVICE,
        Self::POWER_TRANSFORMER,
        Self::SURGE_ARRESTOR,
        Self::DISCONNECTOR,
        Self::INSTRUMENT_TRANSFORMER,
        Self::CONTROL_DEVICE,
        Self::CIRCUIT_BREAKER,
    ];

    pub fn new(name: impl Into<String>) -> Self {
        AssetType(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for AssetType {
    fn from(s: &str) -> Self {
        AssetType(s.to_owned())
    }
}

impl fmt::Display for AssetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PopulationClass {
    Primary,
    Secondary,
    Tertiary,
}

impl PopulationClass {
    /// Inclusive weight range the expert weights of this class must fall in.
    pub fn weight_range(self) -> (f64, f64) {
        match self {
            PopulationClass::Primary => (7.0, 10.0),
            PopulationClass::Secondary => (4.0, 6.0),
            PopulationClass::Tertiary => (1.0, 3.0),
        }
    }

    /// Range midpoint rounded down: 8, 5, 2.
    pub fn default_weight(self) -> f64 {
        let (lo, hi) = self.weight_range();
        ((lo + hi) / 2.0).floor()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PopulationClass::Primary => "primary",
            PopulationClass::Secondary => "secondary",
            PopulationClass::Tertiary => "tertiary",
        }
    }
}

impl FromStr for PopulationClass {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "primary" => Ok(PopulationClass::Primary),
            "secondary" => Ok(PopulationClass::Secondary),
            "tertiary" => Ok(PopulationClass::Tertiary),
            other => Err(ModelError::UnknownClass(other.to_owned())),
        }
    }
}

impl fmt::Display for PopulationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Asset {
    pub asset_id: String,
    pub asset_type: AssetType,
    pub population_class: PopulationClass,
    pub hi: HealthScore,
    pub build_year: Option<i32>,
    /// Replacement cost in EUR.
    pub replacement_cost: Option<f64>,
    /// Failure of this asset fails its bay.
    pub bay_critical: bool,
}

impl Asset {
    pub fn new(
        asset_id: impl Into<String>,
        asset_type: impl Into<AssetType>,
        population_class: PopulationClass,
        hi: HealthScore,
    ) -> Self {
        Asset {
            asset_id: asset_id.into(),
            asset_type: asset_type.into(),
            population_class,
            hi,
            build_year: None,
            replacement_cost: None,
            bay_critical: false,
        }
    }

    pub fn with_build_year(mut self, year: i32) -> Self {
        self.build_year = Some(year);
        self
    }

    pub fn with_cost(mut self, eur: f64) -> Self {
        self.replacement_cost = Some(eur);
        self
    }

    pub fn critical(mut self, flag: bool) -> Self {
        self.bay_critical = flag;
        self
    }

    pub fn is_valid(&self) -> bool {
        !self.hi.is_invalid()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bay {
    pub bay_id: String,
    pub assets: Vec<Asset>,
}

impl Bay {
    pub fn new(bay_id: impl Into<String>, assets: Vec<Asset>) -> Result<Self, ModelError> {
        let bay_id = bay_id.into();
        let mut seen = BTreeSet::new();
        for a in &assets {
            if !seen.insert(a.asset_id.as_str()) {
                return Err(ModelError::DuplicateAssetId {
                    bay_id,
                    asset_id: a.asset_id.clone(),
                });
            }
        }
        Ok(Bay { bay_id, assets })
    }

    pub fn valid_assets(&self) -> impl Iterator<Item = &Asset> {
        self.assets.iter().filter(|a| a.is_valid())
    }

    pub fn n_invalid(&self) -> usize {
        self.assets.iter().filter(|a| !a.is_valid()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substation {
    pub substation_id: String,
    pub bays: Vec<Bay>,
}

impl Substation {
    pub fn new(substation_id: impl Into<String>, bays: Vec<Bay>) -> Result<Self, ModelError> {
        let substation_id = substation_id.into();
        let mut seen = BTreeSet::new();
        for b in &bays {
            if !seen.insert(b.bay_id.as_str()) {
                return Err(ModelError::DuplicateBayId {
                    substation_id,
                    bay_id: b.bay_id.clone(),
                });
            }
        }
        Ok(Substation {
            substation_id,
            bays,
        })
    }

    pub fn assets(&self) -> impl Iterator<Item = &Asset> {
        self.bays.iter().flat_map(|b| b.assets.iter())
    }

    pub fn n_assets(&self) -> usize {
        self.bays.iter().map(|b| b.assets.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "weighted_avg")]
    WeightedAverage,
    #[serde(rename = "fmeca")]
    Fmeca,
    #[serde(rename = "replacement_cost")]
    ReplacementCost,
    #[serde(rename = "failure_interp")]
    FailureInterpretation,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::WeightedAverage,
        Method::Fmeca,
        Method::ReplacementCost,
        Method::FailureInterpretation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::WeightedAverage => "weighted_avg",
            Method::Fmeca => "fmeca",
            Method::ReplacementCost => "replacement_cost",
            Method::FailureInterpretation => "failure_interp",
        }
    }
}

impl FromStr for Method {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weighted_avg" | "weighted_average" => Ok(Method::WeightedAverage),
            "fmeca" => Ok(Method::Fmeca),
            "replacement_cost" => Ok(Method::ReplacementCost),
            "failure_interp" | "failure_interpretation" => Ok(Method::FailureInterpretation),
            other => Err(ModelError::UnknownMethod(other.to_owned())),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Plain weighted sum; grows with the number of assets in the bay.
    Raw,
    #[default]
    Normalized,
}

impl FromStr for Normalization {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "normalized" => Ok(Normalization::Normalized),
            other => Err(ModelError::UnknownNormalization(other.to_owned())),
        }
    }
}

/// Aggregation method plus its tunables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig<T> {
    pub method: Method,
    pub normalization: Normalization,
    /// Weighted-average cap: bay score never exceeds worst valid HI plus this offset.
    pub worst_case_cap_offset: u32,
    /// Power-mean exponent of the replacement-cost strategy; must be nonzero.
    pub power_mean_exponent: T,
    /// Bays whose invalid fraction exceeds this are indeterminate.
    pub invalid_fraction_threshold: T,
}

impl<T: Scalar> Default for StrategyConfig<T> {
    fn default() -> Self {
        StrategyConfig {
            method: Method::WeightedAverage,
            normalization: Normalization::Normalized,
            worst_case_cap_offset: 3,
            power_mean_exponent: T::lit(-2.0),
            invalid_fraction_threshold: T::lit(0.25),
        }
    }
}

impl<T: Scalar> StrategyConfig<T> {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let p = self.power_mean_exponent;
        if p == T::zero() || !p.is_finite() {
            return Err(ModelError::InvalidConfig(format!(
                "power mean exponent must be finite and nonzero, got {p}"
            )));
        }
        let t = self.invalid_fraction_threshold;
        if !(t >= T::zero() && t <= T::one()) {
            return Err(ModelError::InvalidConfig(format!(
                "invalid fraction threshold must lie in [0, 1], got {t}"
            )));
        }
        Ok(())
    }
}
