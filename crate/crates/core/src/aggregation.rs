//! Bay-level aggregation strategies and the substation roll-up.
//!
//! Every strategy excludes invalid (HI = 0) assets from both numerator and
//! denominator and counts them separately. A bay with no valid assets is
//! indeterminate: the result carries no score and the White band.
//!
//! The four strategies:
//!
//! * weighted average: `Σ HI·W / Σ W` over population-class weights, then the
//!   worst-case cap `min(score, worst_valid_HI + offset)`. In raw mode the sum
//!   `Σ HI·W` is reported as is, which grows with bay size.
//! * FMECA: `Σ HI·S / Σ S` with `S` the catalog severity of each asset type.
//! * replacement cost: weighted power mean `(Σ w·HI^p / Σ w)^(1/p)` with
//!   `w = log10(1 + cost)`; negative `p` lets poor assets dominate.
//! * failure interpretation: minimum HI over bay-critical assets, or over all
//!   valid assets when none is flagged critical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, Catalogs, SeverityCatalog, WeightCatalog};
use crate::model::{Asset, Bay, ColorBand, Method, ModelError, Normalization, StrategyConfig, Substation};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregationError {
    #[error("asset `{asset_id}`: type `{asset_type}` not in catalog")]
    UnknownAssetType { asset_id: String, asset_type: String },
    #[error("asset `{asset_id}`: type `{asset_type}` needs a build year")]
    MissingBuildYear { asset_id: String, asset_type: String },
    #[error("asset `{asset_id}`: replacement cost missing")]
    MissingCost { asset_id: String },
    #[error("asset `{asset_id}`: replacement cost {cost} is not positive")]
    NonPositiveCost { asset_id: String, cost: f64 },
    #[error(transparent)]
    Config(#[from] ModelError),
}

impl AggregationError {
    fn from_catalog(asset: &Asset, err: CatalogError) -> Self {
        match err {
            CatalogError::MissingBuildYear(t) => AggregationError::MissingBuildYear {
                asset_id: asset.asset_id.clone(),
                asset_type: t.to_string(),
            },
            _ => AggregationError::UnknownAssetType {
                asset_id: asset.asset_id.clone(),
                asset_type: asset.asset_type.to_string(),
            },
        }
    }
}

/// Aggregated score of one bay under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayScore<T> {
    pub bay_id: String,
    pub method: Method,
    /// Absent when indeterminate.
    pub score: Option<T>,
    pub band: ColorBand,
    pub n_valid: usize,
    pub n_invalid: usize,
    /// The worst-case cap lowered the score.
    pub capped: bool,
    pub indeterminate: bool,
    /// Unnormalized weighted sum; may exceed 10.
    pub raw: bool,
}

impl<T: Scalar> BayScore<T> {
    fn determinate(bay: &Bay, method: Method, score: T) -> Self {
        BayScore {
            bay_id: bay.bay_id.clone(),
            method,
            score: Some(score),
            band: ColorBand::of_real(score),
            n_valid: bay.assets.len() - bay.n_invalid(),
            n_invalid: bay.n_invalid(),
            capped: false,
            indeterminate: false,
            raw: false,
        }
    }

    fn indeterminate(bay: &Bay, method: Method) -> Self {
        BayScore {
            bay_id: bay.bay_id.clone(),
            method,
            score: None,
            band: ColorBand::White,
            n_valid: bay.assets.len() - bay.n_invalid(),
            n_invalid: bay.n_invalid(),
            capped: false,
            indeterminate: true,
            raw: false,
        }
    }

    pub fn n_assets(&self) -> usize {
        self.n_valid + self.n_invalid
    }
}

/// Per-bay scores plus the roll-up one level higher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstationScore<T> {
    pub substation_id: String,
    pub method: Method,
    /// Sorted by bay id.
    pub bays: Vec<BayScore<T>>,
    pub score: Option<T>,
    pub band: ColorBand,
    pub capped: bool,
}

/// A bay score with the mass it carries into the substation roll-up.
#[derive(Debug, Clone)]
struct Rated<T> {
    score: BayScore<T>,
    mass: T,
    critical: bool,
}

fn hi<T: Scalar>(a: &Asset) -> T {
    T::of_u32(a.hi.value() as u32)
}

fn min_max<T: Scalar>(values: impl Iterator<Item = T>) -> Option<(T, T)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// `Σ v·w / Σ w`, kept inside `[min v, max v]`; exact when all values agree.
fn weighted_mean<T: Scalar>(items: &[(T, T)]) -> T {
    let (lo, hi) = min_max(items.iter().map(|&(v, _)| v)).expect("nonempty");
    if lo == hi {
        return lo;
    }
    let num: T = items.iter().map(|&(v, w)| v * w).sum();
    let den: T = items.iter().map(|&(_, w)| w).sum();
    (num / den).max(lo).min(hi)
}

/// Weighted power mean `(Σ w·v^p / Σ w)^(1/p)`, kept inside `[min v, max v]`.
fn power_mean<T: Scalar>(items: &[(T, T)], p: T) -> T {
    let (lo, hi) = min_max(items.iter().map(|&(v, _)| v)).expect("nonempty");
    if lo == hi {
        return lo;
    }
    let num: T = items.iter().map(|&(v, w)| w * v.powf(p)).sum();
    let den: T = items.iter().map(|&(_, w)| w).sum();
    (num / den).powf(p.recip()).max(lo).min(hi)
}

/// Apply `score ← min(score, worst + offset)` and clamp to [1, 10].
fn apply_cap<T: Scalar>(score: T, worst: T, offset: u32) -> (T, bool) {
    let ceiling = worst + T::of_u32(offset);
    let capped = score > ceiling;
    let s = score.min(ceiling).max(T::one()).min(T::lit(10.0));
    (s, capped)
}

fn rate_weighted_average<T: Scalar>(
    bay: &Bay,
    weights: &WeightCatalog,
    cfg: &StrategyConfig<T>,
) -> Result<Rated<T>, AggregationError> {
    let method = Method::WeightedAverage;
    let items = bay
        .valid_assets()
        .map(|a| {
            weights
                .weight_of(&a.asset_type)
                .map(|w| (hi::<T>(a), T::lit(w)))
                .map_err(|e| AggregationError::from_catalog(a, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mass = items.iter().map(|&(_, w)| w).sum();
    if items.is_empty() {
        return Ok(Rated {
            score: BayScore::indeterminate(bay, method),
            mass,
            critical: false,
        });
    }
    let score = match cfg.normalization {
        Normalization::Raw => {
            let sum: T = items.iter().map(|&(v, w)| v * w).sum();
            let mut s = BayScore::determinate(bay, method, sum);
            s.raw = true;
            s
        }
        Normalization::Normalized => {
            let mean = weighted_mean(&items);
            let worst = items.iter().map(|&(v, _)| v).fold(T::infinity(), T::min);
            let (capped_score, capped) = apply_cap(mean, worst, cfg.worst_case_cap_offset);
            let mut s = BayScore::determinate(bay, method, capped_score);
            s.capped = capped;
            s
        }
    };
    Ok(Rated {
        score,
        mass,
        critical: false,
    })
}

fn rate_fmeca<T: Scalar>(
    bay: &Bay,
    severities: &SeverityCatalog,
) -> Result<Rated<T>, AggregationError> {
    let method = Method::Fmeca;
    let items = bay
        .valid_assets()
        .map(|a| {
            severities
                .severity_of(&a.asset_type, a.build_year)
                .map(|s| (hi::<T>(a), T::of_u32(s)))
                .map_err(|e| AggregationError::from_catalog(a, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mass = items.iter().map(|&(_, s)| s).sum();
    let score = if items.is_empty() {
        BayScore::indeterminate(bay, method)
    } else {
        BayScore::determinate(bay, method, weighted_mean(&items))
    };
    Ok(Rated {
        score,
        mass,
        critical: false,
    })
}

/// Log-scale cost weight `log10(1 + cost)`.
pub fn cost_weight<T: Scalar>(cost_eur: f64) -> T {
    T::lit(cost_eur).ln_1p() / T::lit(10.0).ln()
}

fn rate_replacement_cost<T: Scalar>(
    bay: &Bay,
    cfg: &StrategyConfig<T>,
) -> Result<Rated<T>, AggregationError> {
    let method = Method::ReplacementCost;
    let items = bay
        .valid_assets()
        .map(|a| match a.replacement_cost {
            None => Err(AggregationError::MissingCost {
                asset_id: a.asset_id.clone(),
            }),
            Some(c) if c.is_nan() || c <= 0.0 => Err(AggregationError::NonPositiveCost {
                asset_id: a.asset_id.clone(),
                cost: c,
            }),
            Some(c) => Ok((hi::<T>(a), cost_weight::<T>(c))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mass = items.iter().map(|&(_, w)| w).sum();
    let score = if items.is_empty() {
        BayScore::indeterminate(bay, method)
    } else {
        BayScore::determinate(bay, method, power_mean(&items, cfg.power_mean_exponent))
    };
    Ok(Rated {
        score,
        mass,
        critical: false,
    })
}

fn rate_failure_interpretation<T: Scalar>(bay: &Bay) -> Rated<T> {
    let method = Method::FailureInterpretation;
    let critical_min = bay
        .valid_assets()
        .filter(|a| a.bay_critical)
        .map(|a| a.hi)
        .min();
    let any_min = bay.valid_assets().map(|a| a.hi).min();
    let score = match critical_min.or(any_min) {
        Some(h) => BayScore::determinate(bay, method, T::of_u32(h.value() as u32)),
        None => BayScore::indeterminate(bay, method),
    };
    Rated {
        score,
        mass: T::one(),
        critical: critical_min.is_some(),
    }
}

/// Weighted-average strategy with class weights and the worst-case cap.
pub fn agg_weighted_average<T: Scalar>(
    bay: &Bay,
    weights: &WeightCatalog,
    cfg: &StrategyConfig<T>,
) -> Result<BayScore<T>, AggregationError> {
    rate_weighted_average(bay, weights, cfg).map(|r| r.score)
}

/// Severity-weighted mean: the per-asset FMECA terms summed over the bay.
pub fn agg_fmeca<T: Scalar>(
    bay: &Bay,
    severities: &SeverityCatalog,
) -> Result<BayScore<T>, AggregationError> {
    rate_fmeca(bay, severities).map(|r| r.score)
}

pub fn agg_replacement_cost<T: Scalar>(
    bay: &Bay,
    cfg: &StrategyConfig<T>,
) -> Result<BayScore<T>, AggregationError> {
    rate_replacement_cost(bay, cfg).map(|r| r.score)
}

/// Worst bay-critical asset decides the bay; never fails.
pub fn agg_failure_interpretation<T: Scalar>(bay: &Bay) -> BayScore<T> {
    rate_failure_interpretation(bay).score
}

fn exceeds_invalid_threshold<T: Scalar>(bay: &Bay, cfg: &StrategyConfig<T>) -> bool {
    let n = bay.assets.len();
    n > 0 && T::of_u32(bay.n_invalid() as u32) / T::of_u32(n as u32) > cfg.invalid_fraction_threshold
}

fn rate_bay<T: Scalar>(
    bay: &Bay,
    catalogs: &Catalogs,
    cfg: &StrategyConfig<T>,
) -> Result<Rated<T>, AggregationError> {
    if exceeds_invalid_threshold(bay, cfg) {
        return Ok(Rated {
            score: BayScore::indeterminate(bay, cfg.method),
            mass: T::zero(),
            critical: false,
        });
    }
    match cfg.method {
        Method::WeightedAverage => rate_weighted_average(bay, &catalogs.weights, cfg),
        Method::Fmeca => rate_fmeca(bay, &catalogs.severities),
        Method::ReplacementCost => rate_replacement_cost(bay, cfg),
        Method::FailureInterpretation => Ok(rate_failure_interpretation(bay)),
    }
}

/// Dispatch on `cfg.method`. Bays whose invalid fraction exceeds the configured
/// threshold come back indeterminate without consulting the strategy.
pub fn aggregate_bay<T: Scalar>(
    bay: &Bay,
    catalogs: &Catalogs,
    cfg: &StrategyConfig<T>,
) -> Result<BayScore<T>, AggregationError> {
    cfg.validate()?;
    rate_bay(bay, catalogs, cfg).map(|r| r.score)
}

/// Aggregate every bay, then apply the same strategy one level up with each
/// determinate bay as a pseudo-asset weighted by its bay mass.
///
/// Bays are scored in parallel; the first error in bay order is returned.
pub fn aggregate_substation<T: Scalar>(
    sub: &Substation,
    catalogs: &Catalogs,
    cfg: &StrategyConfig<T>,
) -> Result<SubstationScore<T>, AggregationError> {
    cfg.validate()?;
    let results: Vec<Result<Rated<T>, AggregationError>> = sub
        .bays
        .par_iter()
        .map(|b| rate_bay(b, catalogs, cfg))
        .collect();
    let mut rated = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    rated.sort_by(|a, b| a.score.bay_id.cmp(&b.score.bay_id));
    Ok(roll_up(&sub.substation_id, rated, cfg))
}

/// Outcome of scoring a substation when individual bays may fail.
#[derive(Debug, Clone)]
pub struct SubstationOutcome<T> {
    /// Per-bay results sorted by bay id.
    pub bays: Vec<(String, Result<BayScore<T>, AggregationError>)>,
    /// Roll-up over the bays that succeeded; its `bays` holds only those.
    pub rollup: SubstationScore<T>,
}

/// Like [`aggregate_substation`], but a failing bay is reported in place
/// and left out of the roll-up instead of aborting the whole substation.
pub fn score_substation<T: Scalar>(
    sub: &Substation,
    catalogs: &Catalogs,
    cfg: &StrategyConfig<T>,
) -> Result<SubstationOutcome<T>, AggregationError> {
    cfg.validate()?;
    let mut results: Vec<(String, Result<Rated<T>, AggregationError>)> = sub
        .bays
        .par_iter()
        .map(|b| (b.bay_id.clone(), rate_bay(b, catalogs, cfg)))
        .collect();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let ok: Vec<Rated<T>> = results
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().cloned())
        .collect();
    let rollup = roll_up(&sub.substation_id, ok, cfg);
    let bays = results
        .into_iter()
        .map(|(id, r)| (id, r.map(|x| x.score)))
        .collect();
    Ok(SubstationOutcome { bays, rollup })
}

fn roll_up<T: Scalar>(
    substation_id: &str,
    rated: Vec<Rated<T>>,
    cfg: &StrategyConfig<T>,
) -> SubstationScore<T> {
    let live: Vec<(T, T, bool)> = rated
        .iter()
        .filter_map(|r| r.score.score.map(|s| (s, r.mass, r.critical)))
        .collect();
    let items: Vec<(T, T)> = live.iter().map(|&(s, m, _)| (s, m)).collect();
    let mut capped = false;
    let score = if live.is_empty() {
        None
    } else {
        Some(match cfg.method {
            Method::WeightedAverage => match cfg.normalization {
                // sum of sums: the raw variant stays a total over every asset
                Normalization::Raw => items.iter().map(|&(s, _)| s).sum(),
                Normalization::Normalized => {
                    let worst = items.iter().map(|&(s, _)| s).fold(T::infinity(), T::min);
                    let (s, c) =
                        apply_cap(weighted_mean(&items), worst, cfg.worst_case_cap_offset);
                    capped = c;
                    s
                }
            },
            Method::Fmeca => weighted_mean(&items),
            Method::ReplacementCost => power_mean(&items, cfg.power_mean_exponent),
            Method::FailureInterpretation => {
                let crit = live
                    .iter()
                    .filter(|l| l.2)
                    .map(|l| l.0)
                    .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.min(v))));
                crit.unwrap_or_else(|| items.iter().map(|&(s, _)| s).fold(T::infinity(), T::min))
            }
        })
    };
    SubstationScore {
        substation_id: substation_id.to_owned(),
        method: cfg.method,
        band: score.map_or(ColorBand::White, ColorBand::of_real),
        score,
        capped,
        bays: rated.into_iter().map(|r| r.score).collect(),
    }
}
