//! Method comparison, small-bay bias diagnostics and report emission.

mod chart;
mod emit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{score_substation, AggregationError};
use crate::catalog::Catalogs;
use crate::ingest::{audit_fleet, QualityAudit};
use crate::model::{ColorBand, Method, Normalization, StrategyConfig, Substation};

pub use chart::{emit_chart, BAR_SCALE, CHART_Y_MAX};
pub use emit::{emit_json_value, emit_report, format_fixed4, write_output, ReportFormat, CSV_HEADER};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("at least one method must be requested")]
    NoMethods,
    #[error("cannot write {path}: {source}")]
    UnwritableOutput {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    #[serde(with = "emit::opt_fixed4")]
    pub score: Option<f64>,
    pub band: ColorBand,
    pub n_valid: usize,
    pub n_invalid: usize,
    pub capped: bool,
    pub indeterminate: bool,
    pub raw: bool,
    /// Aggregation error for this bay, if the method could not score it.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDelta {
    pub method_a: Method,
    pub method_b: Method,
    /// `score_b - score_a`; absent unless both are determinate.
    #[serde(with = "emit::opt_fixed4")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayComparison {
    pub bay_id: String,
    pub n_assets: usize,
    /// One entry per requested method, in request order.
    pub results: Vec<MethodResult>,
    pub deltas: Vec<ScoreDelta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCorrelation {
    pub method_a: Method,
    pub method_b: Method,
    /// Bays determinate under both methods.
    pub n_bays: usize,
    /// Spearman's rho with mid-ranked ties; absent when undefined.
    #[serde(with = "emit::opt_fixed4")]
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRollup {
    pub method: Method,
    #[serde(with = "emit::opt_fixed4")]
    pub score: Option<f64>,
    pub band: ColorBand,
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstationComparison {
    pub substation_id: String,
    pub n_assets: usize,
    /// Asset counts per HI band, White included.
    pub band_counts: BTreeMap<ColorBand, usize>,
    /// Fractions of assets per HI band; sums to 1 unless the substation is empty.
    pub band_distribution: BTreeMap<ColorBand, f64>,
    pub rollups: Vec<MethodRollup>,
    /// Sorted by bay id.
    pub bays: Vec<BayComparison>,
    pub correlations: Vec<RankCorrelation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub methods: Vec<Method>,
    pub normalization: Normalization,
    /// Sorted by substation id.
    pub substations: Vec<SubstationComparison>,
    pub audit: QualityAudit,
}

fn method_pairs(methods: &[Method]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..methods.len()).flat_map(move |i| (i + 1..methods.len()).map(move |j| (i, j)))
}

/// Mid-ranks (1-based) of `values`; ties share the mean of their positions.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation. 1.0 when both series induce the same ranking,
/// `None` for fewer than two points or when exactly one series is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    if a.len() < 2 {
        return None;
    }
    let (ra, rb) = (mid_ranks(a), mid_ranks(b));
    if ra == rb {
        return Some(1.0);
    }
    let n = ra.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        va += (x - mean).powi(2);
        vb += (y - mean).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

fn band_stats(sub: &Substation) -> (BTreeMap<ColorBand, usize>, BTreeMap<ColorBand, f64>) {
    let mut counts: BTreeMap<ColorBand, usize> = ColorBand::ALL.iter().map(|&b| (b, 0)).collect();
    for a in sub.assets() {
        *counts.get_mut(&a.hi.band()).expect("all bands present") += 1;
    }
    let n = sub.n_assets();
    let dist = counts
        .iter()
        .map(|(&b, &c)| (b, if n == 0 { 0.0 } else { c as f64 / n as f64 }))
        .collect();
    (counts, dist)
}

/// Score every bay of `sub` under every method. Bays a method cannot score
/// carry the error text and count as indeterminate for that method.
pub fn compare_methods(
    sub: &Substation,
    methods: &[Method],
    catalogs: &Catalogs,
    cfg: &StrategyConfig<f64>,
) -> Result<SubstationComparison, AnalysisError> {
    if methods.is_empty() {
        return Err(AnalysisError::NoMethods);
    }
    let sizes: BTreeMap<&str, usize> = sub
        .bays
        .iter()
        .map(|b| (b.bay_id.as_str(), b.assets.len()))
        .collect();

    let mut per_bay: BTreeMap<String, Vec<MethodResult>> = BTreeMap::new();
    let mut rollups = Vec::with_capacity(methods.len());
    for &method in methods {
        let outcome = score_substation(sub, catalogs, &cfg.with_method(method))?;
        rollups.push(MethodRollup {
            method,
            score: outcome.rollup.score,
            band: outcome.rollup.band,
            capped: outcome.rollup.capped,
        });
        for (bay_id, res) in outcome.bays {
            let n = sizes[bay_id.as_str()];
            let entry = match res {
                Ok(s) => MethodResult {
                    method,
                    score: s.score,
                    band: s.band,
                    n_valid: s.n_valid,
                    n_invalid: s.n_invalid,
                    capped: s.capped,
                    indeterminate: s.indeterminate,
                    raw: s.raw,
                    error: None,
                },
                Err(e) => {
                    let bay = sub.bays.iter().find(|b| b.bay_id == bay_id).expect("bay");
                    MethodResult {
                        method,
                        score: None,
                        band: ColorBand::White,
                        n_valid: n - bay.n_invalid(),
                        n_invalid: bay.n_invalid(),
                        capped: false,
                        indeterminate: true,
                        raw: false,
                        error: Some(e.to_string()),
                    }
                }
            };
            per_bay.entry(bay_id).or_default().push(entry);
        }
    }

    let bays: Vec<BayComparison> = per_bay
        .into_iter()
        .map(|(bay_id, results)| {
            let deltas = method_pairs(methods)
                .map(|(i, j)| ScoreDelta {
                    method_a: methods[i],
                    method_b: methods[j],
                    delta: results[j].score.zip(results[i].score).map(|(b, a)| b - a),
                })
                .collect();
            BayComparison {
                n_assets: sizes[bay_id.as_str()],
                bay_id,
                results,
                deltas,
            }
        })
        .collect();

    let correlations = method_pairs(methods)
        .map(|(i, j)| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = bays
                .iter()
                .filter_map(|b| b.results[i].score.zip(b.results[j].score))
                .unzip();
            RankCorrelation {
                method_a: methods[i],
                method_b: methods[j],
                n_bays: xs.len(),
                spearman: spearman(&xs, &ys),
            }
        })
        .collect();

    let (band_counts, band_distribution) = band_stats(sub);
    Ok(SubstationComparison {
        substation_id: sub.substation_id.clone(),
        n_assets: sub.n_assets(),
        band_counts,
        band_distribution,
        rollups,
        bays,
        correlations,
    })
}

/// Compare methods across a fleet and embed its quality audit.
pub fn build_report(
    subs: &[Substation],
    methods: &[Method],
    catalogs: &Catalogs,
    cfg: &StrategyConfig<f64>,
) -> Result<ComparisonReport, AnalysisError> {
    let mut substations = subs
        .iter()
        .map(|s| compare_methods(s, methods, catalogs, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    substations.sort_by(|a, b| a.substation_id.cmp(&b.substation_id));
    Ok(ComparisonReport {
        methods: methods.to_vec(),
        normalization: cfg.normalization,
        substations,
        audit: audit_fleet(subs, catalogs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasFinding {
    pub bay_id: String,
    pub n_assets: usize,
    /// Percentile of the raw weighted-sum score among included bays, in [0, 1].
    pub raw_percentile: f64,
    pub fmeca_percentile: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedBay {
    pub bay_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub substation_id: String,
    pub median_bay_size: f64,
    pub percentile_gap: f64,
    pub findings: Vec<BiasFinding>,
    /// Bays indeterminate or failing under either method.
    pub excluded: Vec<ExcludedBay>,
}

pub const DEFAULT_PERCENTILE_GAP: f64 = 0.25;

/// Percentile of each value among `values`: `(mid_rank - 1) / (n - 1)`, 0.5 for a single value.
pub fn percentiles(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 1 {
        return vec![0.5];
    }
    mid_ranks(values)
        .into_iter()
        .map(|r| (r - 1.0) / (n - 1) as f64)
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Flag the small-bay signature: bays smaller than the substation's median bay
/// size whose raw weighted-sum percentile and FMECA percentile differ by more
/// than `percentile_gap`.
pub fn bias_diagnostics(
    sub: &Substation,
    catalogs: &Catalogs,
    cfg: &StrategyConfig<f64>,
    percentile_gap: f64,
) -> BiasReport {
    let median_bay_size = median(sub.bays.iter().map(|b| b.assets.len() as f64).collect());
    let raw_cfg = cfg
        .with_method(Method::WeightedAverage)
        .with_normalization(Normalization::Raw);
    let fmeca_cfg = cfg.with_method(Method::Fmeca);

    let outcome = |c: &StrategyConfig<f64>| match score_substation(sub, catalogs, c) {
        Ok(o) => o.bays,
        Err(e) => sub
            .bays
            .iter()
            .map(|b| (b.bay_id.clone(), Err(e.clone())))
            .collect(),
    };
    let raw = outcome(&raw_cfg);
    let fmeca = outcome(&fmeca_cfg);

    let mut included = Vec::new();
    let mut excluded = Vec::new();
    for ((bay_id, r), (_, f)) in raw.into_iter().zip(fmeca) {
        let reason = match (&r, &f) {
            (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
            (Ok(r), Ok(f)) if r.indeterminate || f.indeterminate => Some("indeterminate".into()),
            _ => None,
        };
        match reason {
            Some(reason) => excluded.push(ExcludedBay { bay_id, reason }),
            None => {
                let (r, f) = (r.expect("ok"), f.expect("ok"));
                included.push((bay_id, r.n_assets(), r.score.expect("det"), f.score.expect("det")));
            }
        }
    }

    let raw_pct = percentiles(&included.iter().map(|x| x.2).collect::<Vec<_>>());
    let fmeca_pct = percentiles(&included.iter().map(|x| x.3).collect::<Vec<_>>());
    let findings = included
        .into_iter()
        .zip(raw_pct.into_iter().zip(fmeca_pct))
        .filter_map(|((bay_id, n_assets, _, _), (rp, fp))| {
            let gap = (rp - fp).abs();
            ((n_assets as f64) < median_bay_size && gap > percentile_gap).then_some(BiasFinding {
                bay_id,
                n_assets,
                raw_percentile: rp,
                fmeca_percentile: fp,
                gap,
            })
        })
        .collect();

    BiasReport {
        substation_id: sub.substation_id.clone(),
        median_bay_size,
        percentile_gap,
        findings,
        excluded,
    }
}
