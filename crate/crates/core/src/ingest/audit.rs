use serde::{Deserialize, Serialize};

use crate::catalog::Catalogs;
use crate::model::{Asset, Bay, Substation};

/// Soft data-quality counts at one level of the hierarchy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditCounts {
    pub n_assets: usize,
    /// Assets with HI = 0.
    pub n_invalid: usize,
    /// `n_invalid / n_assets`, 0 when there are no assets.
    pub invalid_fraction: f64,
    /// Assets whose type is missing from the severity or weight catalog.
    pub unknown_type: usize,
    /// Empty `build_year` plus empty `replacement_cost_eur` values.
    pub missing_fields: usize,
}

impl AuditCounts {
    fn add_asset(&mut self, a: &Asset, catalogs: &Catalogs) {
        self.n_assets += 1;
        self.n_invalid += usize::from(!a.is_valid());
        self.unknown_type += usize::from(!catalogs.knows(&a.asset_type));
        self.missing_fields +=
            usize::from(a.build_year.is_none()) + usize::from(a.replacement_cost.is_none());
    }

    fn merge(&mut self, other: &AuditCounts) {
        self.n_assets += other.n_assets;
        self.n_invalid += other.n_invalid;
        self.unknown_type += other.unknown_type;
        self.missing_fields += other.missing_fields;
    }

    fn finish(mut self) -> Self {
        self.invalid_fraction = if self.n_assets == 0 {
            0.0
        } else {
            self.n_invalid as f64 / self.n_assets as f64
        };
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayAudit {
    pub bay_id: String,
    pub counts: AuditCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstationAudit {
    pub substation_id: String,
    /// Pooled over all assets of the substation.
    pub counts: AuditCounts,
    /// Unweighted mean of the per-bay invalid fractions (empty bays count as 0).
    pub mean_bay_invalid_fraction: f64,
    pub bays: Vec<BayAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityAudit {
    pub fleet: AuditCounts,
    pub substations: Vec<SubstationAudit>,
}

impl QualityAudit {
    /// Highest pooled invalid fraction over the fleet and every substation.
    pub fn worst_invalid_fraction(&self) -> f64 {
        self.substations
            .iter()
            .map(|s| s.counts.invalid_fraction)
            .fold(self.fleet.invalid_fraction, f64::max)
    }
}

fn audit_bay(bay: &Bay, catalogs: &Catalogs) -> BayAudit {
    let mut counts = AuditCounts::default();
    for a in &bay.assets {
        counts.add_asset(a, catalogs);
    }
    BayAudit {
        bay_id: bay.bay_id.clone(),
        counts: counts.finish(),
    }
}

/// Count invalid scores, unknown types and missing fields at bay, substation and fleet level.
pub fn audit_fleet(subs: &[Substation], catalogs: &Catalogs) -> QualityAudit {
    let mut fleet = AuditCounts::default();
    let substations = subs
        .iter()
        .map(|sub| {
            let bays: Vec<BayAudit> = sub.bays.iter().map(|b| audit_bay(b, catalogs)).collect();
            let mut counts = AuditCounts::default();
            for b in &bays {
                counts.merge(&b.counts);
            }
            fleet.merge(&counts);
            let mean_bay_invalid_fraction = if bays.is_empty() {
                0.0
            } else {
                bays.iter().map(|b| b.counts.invalid_fraction).sum::<f64>() / bays.len() as f64
            };
            SubstationAudit {
                substation_id: sub.substation_id.clone(),
                counts: counts.finish(),
                mean_bay_invalid_fraction,
                bays,
            }
        })
        .collect();
    QualityAudit {
        fleet: fleet.finish(),
        substations,
    }
}
