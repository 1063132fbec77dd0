//! Expert lookup tables: FMECA severities per asset type and population-class weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AssetType, PopulationClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("asset type `{0}` not in catalog")]
    UnknownAssetType(AssetType),
    #[error("asset type `{0}` needs a build year to resolve its severity")]
    MissingBuildYear(AssetType),
    #[error("severity for `{asset_type}` must be positive, got {value}")]
    NonPositiveSeverity { asset_type: AssetType, value: i64 },
    #[error("weight {weight} for `{asset_type}` outside {class} range {lo}..={hi}")]
    WeightOutOfClassRange {
        asset_type: AssetType,
        class: PopulationClass,
        weight: f64,
        lo: f64,
        hi: f64,
    },
}

/// How the severity of one asset type is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeverityRule {
    Constant(u32),
    /// `before` applies when build_year < cutoff_year, `from` otherwise.
    YearSplit { before: u32, cutoff_year: i32, from: u32 },
}

impl SeverityRule {
    pub fn resolve(&self, build_year: Option<i32>) -> Option<u32> {
        match *self {
            SeverityRule::Constant(s) => Some(s),
            SeverityRule::YearSplit {
                before,
                cutoff_year,
                from,
            } => build_year.map(|y| if y < cutoff_year { before } else { from }),
        }
    }

    fn values(&self) -> [u32; 2] {
        match *self {
            SeverityRule::Constant(s) => [s, s],
            SeverityRule::YearSplit { before, from, .. } => [before, from],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityCatalog {
    entries: BTreeMap<AssetType, SeverityRule>,
}

impl SeverityCatalog {
    pub fn new(entries: BTreeMap<AssetType, SeverityRule>) -> Result<Self, CatalogError> {
        for (t, rule) in &entries {
            if let Some(&v) = rule.values().iter().find(|&&v| v == 0) {
                return Err(CatalogError::NonPositiveSeverity {
                    asset_type: t.clone(),
                    value: v as i64,
                });
            }
        }
        Ok(SeverityCatalog { entries })
    }

    pub fn get(&self, asset_type: &AssetType) -> Option<&SeverityRule> {
        self.entries.get(asset_type)
    }

    pub fn contains(&self, asset_type: &AssetType) -> bool {
        self.entries.contains_key(asset_type)
    }

    pub fn entries(&self) -> &BTreeMap<AssetType, SeverityRule> {
        &self.entries
    }

    pub(crate) fn insert(&mut self, asset_type: AssetType, rule: SeverityRule) {
        self.entries.insert(asset_type, rule);
    }

    pub fn severity_of(
        &self,
        asset_type: &AssetType,
        build_year: Option<i32>,
    ) -> Result<u32, CatalogError> {
        severity_of(asset_type, build_year, self)
    }
}

impl Default for SeverityCatalog {
    /// Default FMECA severities per asset type.
    fn default() -> Self {
        let rules = [
            (AssetType::EARTHING, SeverityRule::Constant(343)),
            (AssetType::COMPENSATION_COIL, SeverityRule::Constant(304)),
            (
                AssetType::PROTECTION_DEVICE,
                SeverityRule::YearSplit {
                    before: 152,
                    cutoff_year: 1992,
                    from: 237,
                },
            ),
            (AssetType::POWER_TRANSFORMER, SeverityRule::Constant(458)),
            (AssetType::SURGE_ARRESTOR, SeverityRule::Constant(128)),
            (AssetType::DISCONNECTOR, SeverityRule::Constant(313)),
            (AssetType::INSTRUMENT_TRANSFORMER, SeverityRule::Constant(377)),
            (AssetType::CONTROL_DEVICE, SeverityRule::Constant(148)),
            (AssetType::CIRCUIT_BREAKER, SeverityRule::Constant(464)),
        ];
        SeverityCatalog {
            entries: rules
                .into_iter()
                .map(|(t, r)| (AssetType::from(t), r))
                .collect(),
        }
    }
}

/// Severity of an asset type, resolving year-conditional rules against `build_year`.
pub fn severity_of(
    asset_type: &AssetType,
    build_year: Option<i32>,
    catalog: &SeverityCatalog,
) -> Result<u32, CatalogError> {
    let rule = catalog
        .get(asset_type)
        .ok_or_else(|| CatalogError::UnknownAssetType(asset_type.clone()))?;
    rule.resolve(build_year)
        .ok_or_else(|| CatalogError::MissingBuildYear(asset_type.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub class: PopulationClass,
    pub weight: f64,
}

impl WeightEntry {
    pub fn new(
        asset_type: &AssetType,
        class: PopulationClass,
        weight: f64,
    ) -> Result<Self, CatalogError> {
        let (lo, hi) = class.weight_range();
        if !(weight >= lo && weight <= hi) {
            return Err(CatalogError::WeightOutOfClassRange {
                asset_type: asset_type.clone(),
                class,
                weight,
                lo,
                hi,
            });
        }
        Ok(WeightEntry { class, weight })
    }

    pub fn class_default(class: PopulationClass) -> Self {
        WeightEntry {
            class,
            weight: class.default_weight(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCatalog {
    entries: BTreeMap<AssetType, WeightEntry>,
}

impl WeightCatalog {
    pub fn new(entries: BTreeMap<AssetType, WeightEntry>) -> Result<Self, CatalogError> {
        for (t, e) in &entries {
            WeightEntry::new(t, e.class, e.weight)?;
        }
        Ok(WeightCatalog { entries })
    }

    pub fn get(&self, asset_type: &AssetType) -> Option<&WeightEntry> {
        self.entries.get(asset_type)
    }

    pub fn contains(&self, asset_type: &AssetType) -> bool {
        self.entries.contains_key(asset_type)
    }

    pub fn entries(&self) -> &BTreeMap<AssetType, WeightEntry> {
        &self.entries
    }

    pub(crate) fn insert(&mut self, asset_type: AssetType, entry: WeightEntry) {
        self.entries.insert(asset_type, entry);
    }

    pub fn weight_of(&self, asset_type: &AssetType) -> Result<f64, CatalogError> {
        self.get(asset_type)
            .map(|e| e.weight)
            .ok_or_else(|| CatalogError::UnknownAssetType(asset_type.clone()))
    }

    pub fn class_of(&self, asset_type: &AssetType) -> Option<PopulationClass> {
        self.get(asset_type).map(|e| e.class)
    }
}

impl Default for WeightCatalog {
    /// Class midpoint weights for the nine canonical types.
    fn default() -> Self {
        use PopulationClass::*;
        let classes = [
            (AssetType::POWER_TRANSFORMER, Primary),
            (AssetType::CIRCUIT_BREAKER, Primary),
            (AssetType::DISCONNECTOR, Primary),
            (AssetType::INSTRUMENT_TRANSFORMER, Primary),
            (AssetType::PROTECTION_DEVICE, Secondary),
            (AssetType::CONTROL_DEVICE, Secondary),
            (AssetType::COMPENSATION_COIL, Secondary),
            (AssetType::SURGE_ARRESTOR, Secondary),
            (AssetType::EARTHING, Tertiary),
        ];
        WeightCatalog {
            entries: classes
                .into_iter()
                .map(|(t, c)| (AssetType::from(t), WeightEntry::class_default(c)))
                .collect(),
        }
    }
}

/// Both expert catalogs, passed together to the aggregation strategies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalogs {
    pub severities: SeverityCatalog,
    pub weights: WeightCatalog,
}

impl Catalogs {
    /// Whether both catalogs know the type.
    pub fn knows(&self, asset_type: &AssetType) -> bool {
        self.severities.contains(asset_type) && self.weights.contains(asset_type)
    }
}
