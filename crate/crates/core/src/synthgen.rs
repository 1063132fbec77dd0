//! Seeded synthetic fleets.
//!
//! The random source is ChaCha8 seeded with `seed_from_u64(seed)`. Every draw
//! is a uniform `u = (next_u64 >> 11) · 2^-53` in `[0, 1)`; integers in
//! `lo..=hi` are `lo + floor(u · (hi - lo + 1))`, and categorical draws use
//! inverse-transform sampling over cumulative weights in key order. Draw order:
//!
//! 1. per substation: bay count;
//! 2. per bay: size `min + floor((max - min + 1) · u^skew)`;
//! 3. per asset: type, HI band, HI within band, build year, cost factor;
//! 4. invalid assets: partial Fisher–Yates over all asset indices, picking
//!    `round_half_up(invalid_fraction · n)` of them and setting HI = 0.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::WeightCatalog;
use crate::model::{Asset, AssetType, Bay, ColorBand, HealthScore, Substation};
use crate::scalar::round_half_up;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("infeasible fleet spec: {0}")]
    InfeasibleSpec(String),
}

pub const BUILD_YEAR_RANGE: (i32, i32) = (1965, 2020);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaySizeDistribution {
    pub min: usize,
    pub max: usize,
    /// 1 is uniform; larger values favor small bays.
    pub skew: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandWeights {
    pub green: f64,
    pub orange: f64,
    pub red: f64,
    pub violet: f64,
}

impl BandWeights {
    fn as_array(&self) -> [(ColorBand, f64); 4] {
        [
            (ColorBand::Green, self.green),
            (ColorBand::Orange, self.orange),
            (ColorBand::Red, self.red),
            (ColorBand::Violet, self.violet),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetSpec {
    pub seed: u64,
    pub n_substations: usize,
    /// Inclusive bay count per substation.
    pub bay_count_range: (usize, usize),
    pub bay_size: BaySizeDistribution,
    pub hi_distribution: BandWeights,
    pub invalid_fraction: f64,
    /// Relative frequency per asset type; every key must be a known type.
    pub type_mix: BTreeMap<String, f64>,
}

impl Default for FleetSpec {
    fn default() -> Self {
        FleetSpec {
            seed: 0,
            n_substations: 5,
            bay_count_range: (4, 12),
            bay_size: BaySizeDistribution {
                min: 1,
                max: 12,
                skew: 1.5,
            },
            hi_distribution: BandWeights {
                green: 0.4,
                orange: 0.3,
                red: 0.2,
                violet: 0.1,
            },
            invalid_fraction: 0.0,
            type_mix: AssetType::CANONICAL
                .iter()
                .map(|t| (t.to_string(), 1.0))
                .collect(),
        }
    }
}

impl FleetSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InfeasibleSpec(m));
        if self.n_substations == 0 {
            return bad("n_substations must be at least 1".into());
        }
        let (lo, hi) = self.bay_count_range;
        if lo == 0 || lo > hi {
            return bad(format!("bay_count_range [{lo}, {hi}] is empty or allows empty substations"));
        }
        let s = &self.bay_size;
        if s.min == 0 || s.min > s.max {
            return bad(format!("bay size range [{}, {}] is empty or allows empty bays", s.min, s.max));
        }
        if !(s.skew.is_finite() && s.skew > 0.0) {
            return bad(format!("bay size skew must be positive, got {}", s.skew));
        }
        check_weights(self.hi_distribution.as_array().iter().map(|&(_, w)| w), "hi_distribution")?;
        check_weights(self.type_mix.values().copied(), "type_mix")?;
        let classes = WeightCatalog::default();
        if let Some(t) = self.type_mix.keys().find(|t| !classes.contains(&AssetType::new(t.as_str()))) {
            return bad(format!("type_mix names unknown asset type `{t}`"));
        }
        if !(0.0..=1.0).contains(&self.invalid_fraction) {
            return bad(format!("invalid_fraction {} outside [0, 1]", self.invalid_fraction));
        }
        Ok(())
    }
}

fn check_weights(weights: impl Iterator<Item = f64>, what: &str) -> Result<(), SynthError> {
    let mut total = 0.0;
    for w in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(SynthError::InfeasibleSpec(format!("{what} has weight {w}")));
        }
        total += w;
    }
    if total > 0.0 {
        Ok(())
    } else {
        Err(SynthError::InfeasibleSpec(format!("{what} weights sum to zero")))
    }
}

struct Draws(ChaCha8Rng);

impl Draws {
    fn new(seed: u64) -> Self {
        Draws(ChaCha8Rng::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as f64;
        (lo + (self.unit() * span).floor() as i64).min(hi)
    }

    fn pick<'a, K>(&mut self, items: &'a [(K, f64)]) -> &'a K {
        let total: f64 = items.iter().map(|(_, w)| w).sum();
        let target = self.unit() * total;
        let mut acc = 0.0;
        for (k, w) in items {
            acc += w;
            if target < acc {
                return k;
            }
        }
        // rounding can leave target == total; fall back to the last positive weight
        &items.iter().rev().find(|(_, w)| *w > 0.0).expect("positive weight").0
    }

    /// Indices of `k` distinct items out of `n`, by partial Fisher–Yates.
    fn choose(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k.min(n) {
            let j = self.int(i as i64, n as i64 - 1) as usize;
            idx.swap(i, j);
        }
        idx.truncate(k.min(n));
        idx
    }
}

fn base_cost(asset_type: &str) -> f64 {
    match asset_type {
        AssetType::POWER_TRANSFORMER => 2_500_000.0,
        AssetType::COMPENSATION_COIL => 400_000.0,
        AssetType::CIRCUIT_BREAKER => 300_000.0,
        AssetType::DISCONNECTOR => 60_000.0,
        AssetType::INSTRUMENT_TRANSFORMER => 40_000.0,
        AssetType::PROTECTION_DEVICE => 25_000.0,
        AssetType::CONTROL_DEVICE => 15_000.0,
        AssetType::SURGE_ARRESTOR => 8_000.0,
        _ => 5_000.0,
    }
}

fn is_bay_critical(asset_type: &str) -> bool {
    matches!(
        asset_type,
        AssetType::CIRCUIT_BREAKER | AssetType::POWER_TRANSFORMER | AssetType::PROTECTION_DEVICE
    )
}

fn width(n: usize) -> usize {
    n.to_string().len().max(2)
}

/// Generate a fleet; a pure function of `spec`.
pub fn generate_fleet(spec: &FleetSpec) -> Result<Vec<Substation>, SynthError> {
    spec.validate()?;
    let mut rng = Draws::new(spec.seed);
    let classes = WeightCatalog::default();
    let types: Vec<(String, f64)> = spec.type_mix.iter().map(|(k, &w)| (k.clone(), w)).collect();
    let bands = spec.hi_distribution.as_array();
    let sw = width(spec.n_substations);

    let mut subs = Vec::with_capacity(spec.n_substations);
    for s in 1..=spec.n_substations {
        let sub_id = format!("S{s:0sw$}");
        let (blo, bhi) = spec.bay_count_range;
        let n_bays = rng.int(blo as i64, bhi as i64) as usize;
        let bw = width(n_bays);
        let mut bays = Vec::with_capacity(n_bays);
        for b in 1..=n_bays {
            let bay_id = format!("{sub_id}-B{b:0bw$}");
            let sz = &spec.bay_size;
            let span = (sz.max - sz.min + 1) as f64;
            let size = (sz.min + (span * rng.unit().powf(sz.skew)).floor() as usize).min(sz.max);
            let aw = width(size).max(3);
            let mut assets = Vec::with_capacity(size);
            for k in 1..=size {
                let ty = rng.pick(&types).clone();
                let band = *rng.pick(&bands);
                let (lo, hi) = band.score_range();
                let h = rng.int(lo as i64, hi as i64) as u8;
                let year = rng.int(BUILD_YEAR_RANGE.0 as i64, BUILD_YEAR_RANGE.1 as i64) as i32;
                let cost = (base_cost(&ty) * (0.5 + rng.unit())).round().max(1.0);
                let asset_type = AssetType::new(ty.as_str());
                let class = classes.class_of(&asset_type).expect("validated type");
                assets.push(
                    Asset::new(
                        format!("{bay_id}-A{k:0aw$}"),
                        asset_type,
                        class,
                        HealthScore::new(h).expect("band range within 1..=10"),
                    )
                    .with_build_year(year)
                    .with_cost(cost)
                    .critical(is_bay_critical(&ty)),
                );
            }
            bays.push(Bay { bay_id, assets });
        }
        subs.push(Substation {
            substation_id: sub_id,
            bays,
        });
    }

    let n: usize = subs.iter().map(Substation::n_assets).sum();
    let k = round_half_up(spec.invalid_fraction * n as f64) as usize;
    invalidate(&mut subs, &rng.choose(n, k));
    Ok(subs)
}

fn invalidate(subs: &mut [Substation], chosen: &[usize]) {
    let mut flags = vec![false; subs.iter().map(Substation::n_assets).sum()];
    for &i in chosen {
        flags[i] = true;
    }
    let all = subs
        .iter_mut()
        .flat_map(|s| s.bays.iter_mut())
        .flat_map(|b| b.assets.iter_mut());
    for (a, hit) in all.zip(flags) {
        if hit {
            a.hi = HealthScore::INVALID;
        }
    }
}

/// Set HI = 0 on `round_half_up(fraction · n)` uniformly chosen assets.
pub fn corrupt_fleet(
    fleet: &[Substation],
    fraction: f64,
    seed: u64,
) -> Result<Vec<Substation>, SynthError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(SynthError::InfeasibleSpec(format!(
            "corruption fraction {fraction} outside [0, 1]"
        )));
    }
    let mut out = fleet.to_vec();
    let n: usize = out.iter().map(Substation::n_assets).sum();
    let k = round_half_up(fraction * n as f64) as usize;
    let chosen = Draws::new(seed).choose(n, k);
    invalidate(&mut out, &chosen);
    Ok(out)
}
