//! Catalog document (TOML). Both sections are optional and merge over the
//! built-in defaults entry by entry.
//!
//! ```toml
//! [severities]
//! circuit_breaker = 464
//! protection_device = { before = 152, cutoff_year = 1992, from = 237 }
//!
//! [weights]
//! power_transformer = { class = "primary", weight = 9 }
//! earthing = { class = "tertiary" }   # weight defaults to the class midpoint
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::catalog::{Catalogs, SeverityRule, WeightEntry};
use crate::ingest::IngestError;
use crate::model::{AssetType, PopulationClass};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    #[serde(default)]
    severities: BTreeMap<String, Spanned<RawSeverity>>,
    #[serde(default)]
    weights: BTreeMap<String, Spanned<RawWeight>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSeverity {
    Constant(i64),
    YearSplit {
        before: i64,
        cutoff_year: i32,
        from: i64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    class: String,
    weight: Option<f64>,
}

/// Load catalogs from `path`, or the built-in defaults when `path` is `None`.
pub fn parse_catalogs(path: Option<&Path>) -> Result<Catalogs, IngestError> {
    match path {
        None => Ok(Catalogs::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| IngestError::io(p, e))?;
            parse_catalogs_str(&text, &p.display().to_string())
        }
    }
}

fn line_of(text: &str, offset: usize) -> u64 {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() as u64 + 1
}

pub fn parse_catalogs_str(text: &str, source: &str) -> Result<Catalogs, IngestError> {
    let raw: RawCatalog = toml::from_str(text).map_err(|e| IngestError::CatalogSyntax {
        file: source.to_owned(),
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_owned(),
    })?;
    let mut cats = Catalogs::default();

    for (name, spanned) in raw.severities {
        let line = line_of(text, spanned.span().start);
        let asset_type = AssetType::new(name);
        let positive = |v: i64| -> Result<u32, IngestError> {
            u32::try_from(v).ok().filter(|&v| v > 0).ok_or_else(|| {
                IngestError::NegativeSeverity {
                    file: source.to_owned(),
                    line,
                    asset_type: asset_type.to_string(),
                    value: v,
                }
            })
        };
        let rule = match *spanned.get_ref() {
            RawSeverity::Constant(s) => SeverityRule::Constant(positive(s)?),
            RawSeverity::YearSplit {
                before,
                cutoff_year,
                from,
            } => SeverityRule::YearSplit {
                before: positive(before)?,
                cutoff_year,
                from: positive(from)?,
            },
        };
        cats.severities.insert(asset_type, rule);
    }

    for (name, spanned) in raw.weights {
        let line = line_of(text, spanned.span().start);
        let asset_type = AssetType::new(name);
        let entry = spanned.get_ref();
        let class: PopulationClass =
            entry.class.parse().map_err(|_| IngestError::UnknownClass {
                file: source.to_owned(),
                line,
                asset_type: asset_type.to_string(),
                class: entry.class.clone(),
            })?;
        let weight = entry.weight.unwrap_or_else(|| class.default_weight());
        let checked = WeightEntry::new(&asset_type, class, weight).map_err(|_| {
            IngestError::WeightOutOfClassRange {
                file: source.to_owned(),
                line,
                asset_type: asset_type.to_string(),
                class,
                weight,
            }
        })?;
        cats.weights.insert(asset_type, checked);
    }
    Ok(cats)
}
