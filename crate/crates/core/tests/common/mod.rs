//! Shared test support: independent oracles, random bay generators and the
//! strategy properties. The oracles deliberately avoid the library's catalog
//! and aggregation code.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hiagg::{
    agg_failure_interpretation, agg_fmeca, agg_replacement_cost, agg_weighted_average, Asset,
    AssetType, Bay, HealthScore, Normalization, PopulationClass, SeverityCatalog, SeverityRule,
    StrategyConfig, WeightCatalog,
};

pub const TOL: f64 = 1e-9;

/// Asset types with the default class and severity table, typed in by hand.
pub const TYPES: [&str; 9] = [
    "earthing",
    "compensation_coil",
    "protection_device",
    "power_transformer",
    "surge_arrestor",
    "disconnector",
    "instrument_transformer",
    "control_device",
    "circuit_breaker",
];

pub fn oracle_severity(ty: &str, year: Option<i32>) -> u32 {
    match ty {
        "earthing" => 343,
        "compensation_coil" => 304,
        "protection_device" => {
            if year.expect("protection devices carry a year") < 1992 {
                152
            } else {
                237
            }
        }
        "power_transformer" => 458,
        "surge_arrestor" => 128,
        "disconnector" => 313,
        "instrument_transformer" => 377,
        "control_device" => 148,
        "circuit_breaker" => 464,
        other => panic!("no severity for {other}"),
    }
}

pub fn oracle_class(ty: &str) -> PopulationClass {
    match ty {
        "power_transformer" | "circuit_breaker" | "disconnector" | "instrument_transformer" => {
            PopulationClass::Primary
        }
        "earthing" => PopulationClass::Tertiary,
        _ => PopulationClass::Secondary,
    }
}

pub fn oracle_weight(ty: &str) -> u32 {
    match oracle_class(ty) {
        PopulationClass::Primary => 8,
        PopulationClass::Secondary => 5,
        PopulationClass::Tertiary => 2,
    }
}

fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact Σ h·w / Σ w; `None` when there are no terms.
pub fn exact_weighted_mean(terms: &[(u32, u64)]) -> Option<BigRational> {
    let den: BigRational = terms.iter().map(|&(_, w)| big(w)).sum();
    if den.is_zero() {
        return None;
    }
    let num: BigRational = terms.iter().map(|&(h, w)| big(h as u64) * big(w)).sum();
    Some(num / den)
}

pub fn exact_sum(terms: &[(u32, u64)]) -> BigRational {
    terms.iter().map(|&(h, w)| big(h as u64) * big(w)).sum()
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite")
}

/// Plain power mean with `log10(1 + cost)` weights.
pub fn brute_power_mean(terms: &[(u32, f64)], p: f64) -> Option<f64> {
    if terms.is_empty() {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &(h, cost) in terms {
        let w = (1.0 + cost).log10();
        num += w * (h as f64).powf(p);
        den += w;
    }
    Some((num / den).powf(1.0 / p))
}

/// Generator-side description of one asset.
#[derive(Debug, Clone)]
pub struct ArbAsset {
    pub ty: usize,
    pub hi: u8,
    pub year: i32,
    pub cost: f64,
    pub critical: bool,
}

impl ArbAsset {
    pub fn type_name(&self) -> &'static str {
        TYPES[self.ty]
    }

    pub fn severity(&self) -> u32 {
        oracle_severity(self.type_name(), Some(self.year))
    }

    pub fn weight(&self) -> u32 {
        oracle_weight(self.type_name())
    }

    pub fn to_asset(&self, id: String) -> Asset {
        Asset::new(
            id,
            self.type_name(),
            oracle_class(self.type_name()),
            HealthScore::new(self.hi).unwrap(),
        )
        .with_build_year(self.year)
        .with_cost(self.cost)
        .critical(self.critical)
    }
}

pub fn build_bay(assets: &[ArbAsset]) -> Bay {
    Bay::new(
        "B",
        assets
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_asset(format!("A{i:03}")))
            .collect(),
    )
    .unwrap()
}

pub fn valid(assets: &[ArbAsset]) -> impl Iterator<Item = &ArbAsset> {
    assets.iter().filter(|a| a.hi > 0)
}

fn arb_asset(hi: std::ops::RangeInclusive<u8>) -> impl Strategy<Value = ArbAsset> {
    (0..TYPES.len(), hi, 1960i32..2025, 1.0f64..1e7, any::<bool>()).prop_map(
        |(ty, hi, year, cost, critical)| ArbAsset {
            ty,
            hi,
            year,
            cost,
            critical,
        },
    )
}

/// 1..=12 assets, some possibly invalid (HI 0).
pub fn arb_bay() -> impl Strategy<Value = Vec<ArbAsset>> {
    prop::collection::vec(arb_asset(0..=10), 1..=12)
}

/// Like [`arb_bay`] but with at least one valid asset.
pub fn arb_live_bay() -> impl Strategy<Value = Vec<ArbAsset>> {
    (arb_asset(1..=10), prop::collection::vec(arb_asset(0..=10), 0..=11), any::<Index>()).prop_map(
        |(first, mut rest, at)| {
            let i = at.index(rest.len() + 1);
            rest.insert(i, first);
            rest
        },
    )
}

/// Seeded bay of 1..=12 assets drawn straight from ChaCha8 output.
pub fn seeded_bay(rng: &mut ChaCha8Rng) -> Vec<ArbAsset> {
    let mut draw = |n: u64| rng.next_u64() % n;
    let len = 1 + draw(12) as usize;
    (0..len)
        .map(|_| ArbAsset {
            ty: draw(TYPES.len() as u64) as usize,
            hi: draw(11) as u8,
            year: 1960 + draw(65) as i32,
            cost: 1.0 + draw(10_000_000) as f64,
            critical: draw(2) == 1,
        })
        .collect()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn normalized() -> StrategyConfig<f64> {
    StrategyConfig::default()
}

fn raw() -> StrategyConfig<f64> {
    StrategyConfig::default().with_normalization(Normalization::Raw)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(TestCaseError::fail(format!($($fmt)+)));
        }
    };
}

/// Scores of every strategy on the bay; `None` where indeterminate.
pub struct AllScores {
    pub wa: Option<f64>,
    pub raw: Option<f64>,
    pub fmeca: Option<f64>,
    pub cost: Option<f64>,
    pub fail: Option<f64>,
}

pub fn all_scores(bay: &Bay, sev: &SeverityCatalog) -> AllScores {
    let w = WeightCatalog::default();
    AllScores {
        wa: agg_weighted_average(bay, &w, &normalized()).unwrap().score,
        raw: agg_weighted_average(bay, &w, &raw()).unwrap().score,
        fmeca: agg_fmeca(bay, sev).unwrap().score,
        cost: agg_replacement_cost(bay, &normalized()).unwrap().score,
        fail: agg_failure_interpretation::<f64>(bay).score,
    }
}

/// Every strategy against its brute-force reimplementation.
pub fn prop_oracle(assets: &[ArbAsset]) -> Result<(), TestCaseError> {
    let s = all_scores(&build_bay(assets), &SeverityCatalog::default());
    let live: Vec<&ArbAsset> = valid(assets).collect();
    if live.is_empty() {
        ensure!(
            s.wa.is_none() && s.raw.is_none() && s.fmeca.is_none() && s.cost.is_none() && s.fail.is_none(),
            "all-invalid bay must be indeterminate everywhere"
        );
        return Ok(());
    }
    let hw: Vec<(u32, u64)> = live.iter().map(|a| (a.hi as u32, a.weight() as u64)).collect();
    let hs: Vec<(u32, u64)> = live.iter().map(|a| (a.hi as u32, a.severity() as u64)).collect();
    let worst = live.iter().map(|a| a.hi).min().unwrap() as f64;

    let mean = to_f64(&exact_weighted_mean(&hw).unwrap());
    let want_wa = mean.min(worst + 3.0).clamp(1.0, 10.0);
    ensure!(close(s.wa.unwrap(), want_wa), "weighted avg {:?} vs {want_wa}", s.wa);

    let want_raw = to_f64(&exact_sum(&hw));
    ensure!(close(s.raw.unwrap(), want_raw), "raw {:?} vs {want_raw}", s.raw);

    let want_fmeca = to_f64(&exact_weighted_mean(&hs).unwrap());
    ensure!(close(s.fmeca.unwrap(), want_fmeca), "fmeca {:?} vs {want_fmeca}", s.fmeca);

    let hc: Vec<(u32, f64)> = live.iter().map(|a| (a.hi as u32, a.cost)).collect();
    let want_cost = brute_power_mean(&hc, -2.0).unwrap();
    ensure!(close(s.cost.unwrap(), want_cost), "cost {:?} vs {want_cost}", s.cost);

    let crit_min = live.iter().filter(|a| a.critical).map(|a| a.hi).min();
    let want_fail = crit_min.unwrap_or(worst as u8) as f64;
    ensure!(s.fail == Some(want_fail), "failure interp {:?} vs {want_fail}", s.fail);
    Ok(())
}

/// min(valid HI) ≤ score ≤ max(valid HI) for every normalized strategy.
pub fn prop_bounded(assets: &[ArbAsset]) -> Result<(), TestCaseError> {
    let s = all_scores(&build_bay(assets), &SeverityCatalog::default());
    let lo = valid(assets).map(|a| a.hi).min().unwrap() as f64;
    let hi = valid(assets).map(|a| a.hi).max().unwrap() as f64;
    for (name, v) in [("wa", s.wa), ("fmeca", s.fmeca), ("cost", s.cost), ("fail", s.fail)] {
        let v = v.unwrap();
        ensure!(v >= lo - TOL && v <= hi + TOL, "{name} = {v} outside [{lo}, {hi}]");
    }
    Ok(())
}

/// A lone valid asset (any number of invalid ones beside it) gives back its HI exactly.
pub fn prop_singleton(asset: &ArbAsset, n_invalid: usize) -> Result<(), TestCaseError> {
    let mut assets = vec![asset.clone()];
    for _ in 0..n_invalid {
        assets.push(ArbAsset {
            hi: 0,
            ..asset.clone()
        });
    }
    let s = all_scores(&build_bay(&assets), &SeverityCatalog::default());
    let h = asset.hi as f64;
    for (name, v) in [("wa", s.wa), ("fmeca", s.fmeca), ("cost", s.cost), ("fail", s.fail)] {
        ensure!(v == Some(h), "{name} = {v:?}, expected {h}");
    }
    Ok(())
}

/// Raising one valid asset's HI never lowers any strategy's score.
pub fn prop_monotone(assets: &[ArbAsset], at: Index, bump: u8) -> Result<(), TestCaseError> {
    let live: Vec<usize> = (0..assets.len()).filter(|&i| assets[i].hi > 0).collect();
    let i = live[at.index(live.len())];
    let mut raised = assets.to_vec();
    raised[i].hi = (raised[i].hi + bump).min(10);
    let sev = SeverityCatalog::default();
    let before = all_scores(&build_bay(assets), &sev);
    let after = all_scores(&build_bay(&raised), &sev);
    let pairs = [
        ("wa", before.wa, after.wa),
        ("raw", before.raw, after.raw),
        ("fmeca", before.fmeca, after.fmeca),
        ("cost", before.cost, after.cost),
        ("fail", before.fail, after.fail),
    ];
    for (name, b, a) in pairs {
        let (b, a) = (b.unwrap(), a.unwrap());
        ensure!(a >= b - TOL, "{name} fell from {b} to {a}");
    }
    Ok(())
}

pub fn scaled_catalog(c: u32) -> SeverityCatalog {
    let mut entries = BTreeMap::new();
    for ty in TYPES {
        let rule = if ty == "protection_device" {
            SeverityRule::YearSplit {
                before: 152 * c,
                cutoff_year: 1992,
                from: 237 * c,
            }
        } else {
            SeverityRule::Constant(oracle_severity(ty, None) * c)
        };
        entries.insert(AssetType::new(ty), rule);
    }
    SeverityCatalog::new(entries).unwrap()
}

/// Multiplying every severity by c > 0 leaves the FMECA score unchanged.
pub fn prop_scale(assets: &[ArbAsset], c: u32) -> Result<(), TestCaseError> {
    let bay = build_bay(assets);
    let base = agg_fmeca::<f64>(&bay, &SeverityCatalog::default()).unwrap().score.unwrap();
    let scaled = agg_fmeca::<f64>(&bay, &scaled_catalog(c)).unwrap().score.unwrap();
    ensure!(close(base, scaled), "scale {c}: {base} vs {scaled}");
    Ok(())
}

/// Duplicating every asset keeps FMECA and normalized weighted average, and
/// strictly raises the raw weighted sum.
pub fn prop_duplication(assets: &[ArbAsset]) -> Result<(), TestCaseError> {
    let sev = SeverityCatalog::default();
    let once = all_scores(&build_bay(assets), &sev);
    let mut doubled = assets.to_vec();
    doubled.extend_from_slice(assets);
    let twice = all_scores(&build_bay(&doubled), &sev);
    ensure!(close(once.fmeca.unwrap(), twice.fmeca.unwrap()), "fmeca moved");
    ensure!(close(once.wa.unwrap(), twice.wa.unwrap()), "weighted avg moved");
    ensure!(
        twice.raw.unwrap() > once.raw.unwrap(),
        "raw did not increase: {:?} -> {:?}",
        once.raw,
        twice.raw
    );
    Ok(())
}

/// Whenever some valid HI ≤ mean − offset the capped score is worst + offset,
/// otherwise the plain mean.
pub fn prop_cap(assets: &[ArbAsset], offset: u32) -> Result<(), TestCaseError> {
    let cfg = StrategyConfig {
        worst_case_cap_offset: offset,
        ..StrategyConfig::<f64>::default()
    };
    let got = agg_weighted_average(&build_bay(assets), &WeightCatalog::default(), &cfg).unwrap();
    let hw: Vec<(u32, u64)> = valid(assets).map(|a| (a.hi as u32, a.weight() as u64)).collect();
    let mean = exact_weighted_mean(&hw).unwrap();
    let worst = hw.iter().map(|&(h, _)| h).min().unwrap();
    let off = BigRational::from_integer(BigInt::from(offset));
    let triggered = hw
        .iter()
        .any(|&(h, _)| BigRational::from_integer(BigInt::from(h)) <= &mean - &off);
    let score = got.score.unwrap();
    if triggered {
        let want = (worst + offset) as f64;
        ensure!(score == want, "cap: {score} vs {want}");
        ensure!(got.capped || to_f64(&mean) == want, "capped flag missing");
    } else {
        ensure!(close(score, to_f64(&mean)), "uncapped: {score} vs mean");
    }
    Ok(())
}

/// One named property run through a deterministic runner.
pub struct PropOutcome {
    pub name: &'static str,
    pub cases: u32,
    pub error: Option<String>,
}

pub const PROPERTIES: [&str; 7] = [
    "oracle",
    "boundedness",
    "singleton",
    "monotonicity",
    "severity scale",
    "duplication",
    "cap",
];

fn outcome<V: std::fmt::Debug>(
    name: &'static str,
    cases: u32,
    r: Result<(), proptest::test_runner::TestError<V>>,
) -> PropOutcome {
    PropOutcome {
        name,
        cases,
        error: r.err().map(|e| e.to_string()),
    }
}

/// Run one named property for `cases` cases.
pub fn run_property(name: &'static str, cases: u32) -> PropOutcome {
    let mut r = runner(cases);
    match name {
        "oracle" => outcome(name, cases, r.run(&arb_bay(), |b| prop_oracle(&b))),
        "boundedness" => outcome(name, cases, r.run(&arb_live_bay(), |b| prop_bounded(&b))),
        "singleton" => outcome(
            name,
            cases,
            r.run(&(arb_asset(1..=10), 0usize..3), |(a, k)| prop_singleton(&a, k)),
        ),
        "monotonicity" => outcome(
            name,
            cases,
            r.run(&(arb_live_bay(), any::<Index>(), 1u8..=9), |(b, i, k)| {
                prop_monotone(&b, i, k)
            }),
        ),
        "severity scale" => outcome(
            name,
            cases,
            r.run(&(arb_live_bay(), 1u32..=9000), |(b, c)| prop_scale(&b, c)),
        ),
        "duplication" => outcome(name, cases, r.run(&arb_live_bay(), |b| prop_duplication(&b))),
        "cap" => outcome(name, cases, r.run(&(arb_live_bay(), 0u32..=6), |(b, o)| prop_cap(&b, o))),
        other => panic!("unknown property {other}"),
    }
}
