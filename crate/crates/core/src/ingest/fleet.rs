//! Fleet file: comma-separated asset records keyed by substation and bay.
//!
//! ```text
//! asset_id,substation_id,bay_id,asset_type,population_class,build_year,hi_score,replacement_cost_eur,bay_critical
//! T1,VL,VL01,power_transformer,primary,1998,7,2500000,true
//! ```
//!
//! `build_year` and `replacement_cost_eur` may be empty. Substations, bays and
//! assets keep the order of first appearance.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::ingest::IngestError;
use crate::model::{Asset, AssetType, Bay, HealthScore, PopulationClass, Substation};

pub const FLEET_HEADER: [&str; 9] = [
    "asset_id",
    "substation_id",
    "bay_id",
    "asset_type",
    "population_class",
    "build_year",
    "hi_score",
    "replacement_cost_eur",
    "bay_critical",
];

pub const MIN_BUILD_YEAR: i32 = 1900;
pub const MAX_BUILD_YEAR: i32 = 2100;

pub fn parse_fleet(path: impl AsRef<Path>) -> Result<Vec<Substation>, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_fleet(file, &path.display().to_string())
}

/// Parse fleet records from any reader; `source` names the input in errors.
pub fn read_fleet<R: Read>(reader: R, source: &str) -> Result<Vec<Substation>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        None => {
            return Err(IngestError::MissingHeader {
                file: source.to_owned(),
                found: String::new(),
            })
        }
        Some(r) => r.map_err(|e| csv_error(source, e))?,
    };
    if header.iter().ne(FLEET_HEADER.iter().copied()) {
        return Err(IngestError::MissingHeader {
            file: source.to_owned(),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut builder = FleetBuilder::default();
    let mut first_seen: HashMap<String, u64> = HashMap::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(source, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let (sub_id, bay_id, asset) = parse_row(&rec, source, line)?;
        if let Some(&first) = first_seen.get(&asset.asset_id) {
            return Err(IngestError::DuplicateAssetId {
                file: source.to_owned(),
                line,
                asset_id: asset.asset_id,
                first_line: first,
            });
        }
        first_seen.insert(asset.asset_id.clone(), line);
        builder.push(sub_id, bay_id, asset);
    }
    Ok(builder.finish())
}

fn csv_error(source: &str, e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::MalformedRow {
        file: source.to_owned(),
        line,
        reason: e.to_string(),
    }
}

fn parse_row(
    rec: &csv::StringRecord,
    source: &str,
    line: u64,
) -> Result<(String, String, Asset), IngestError> {
    let malformed = |reason: String| IngestError::MalformedRow {
        file: source.to_owned(),
        line,
        reason,
    };
    if rec.len() != FLEET_HEADER.len() {
        return Err(malformed(format!(
            "expected {} fields, found {}",
            FLEET_HEADER.len(),
            rec.len()
        )));
    }
    let field = |i: usize| rec[i].trim();
    let nonempty = |i: usize| {
        let v = field(i);
        if v.is_empty() {
            Err(malformed(format!("{} is empty", FLEET_HEADER[i])))
        } else {
            Ok(v.to_owned())
        }
    };

    let asset_id = nonempty(0)?;
    let substation_id = nonempty(1)?;
    let bay_id = nonempty(2)?;
    let asset_type = AssetType::new(nonempty(3)?);
    let population_class: PopulationClass = field(4)
        .parse()
        .map_err(|_| malformed(format!("unknown population_class `{}`", field(4))))?;

    let build_year = match field(5) {
        "" => None,
        s => {
            let y: i32 = s
                .parse()
                .map_err(|_| malformed(format!("build_year `{s}` is not an integer")))?;
            if !(MIN_BUILD_YEAR..=MAX_BUILD_YEAR).contains(&y) {
                return Err(malformed(format!(
                    "build_year {y} outside {MIN_BUILD_YEAR}..={MAX_BUILD_YEAR}"
                )));
            }
            Some(y)
        }
    };

    let hi_raw = field(6);
    let hi_value: i64 = hi_raw
        .parse()
        .map_err(|_| malformed(format!("hi_score `{hi_raw}` is not an integer")))?;
    let hi = u8::try_from(hi_value)
        .ok()
        .and_then(|v| HealthScore::new(v).ok())
        .ok_or_else(|| IngestError::HiOutOfRange {
            file: source.to_owned(),
            line,
            value: hi_value,
        })?;

    let replacement_cost = match field(7) {
        "" => None,
        s => {
            let c: f64 = s
                .parse()
                .map_err(|_| malformed(format!("replacement_cost_eur `{s}` is not a number")))?;
            if !c.is_finite() || c < 0.0 {
                return Err(malformed(format!(
                    "replacement_cost_eur {s} must be a nonnegative amount"
                )));
            }
            Some(c)
        }
    };

    let bay_critical = match field(8) {
        "true" => true,
        "false" => false,
        s => return Err(malformed(format!("bay_critical `{s}` is not true/false"))),
    };

    Ok((
        substation_id,
        bay_id,
        Asset {
            asset_id,
            asset_type,
            population_class,
            hi,
            build_year,
            replacement_cost,
            bay_critical,
        },
    ))
}

/// Bay ids in first-seen order plus the assets of each bay.
type BayGroups = (Vec<String>, BTreeMap<String, Vec<Asset>>);

#[derive(Default)]
struct FleetBuilder {
    order: Vec<String>,
    subs: BTreeMap<String, BayGroups>,
}

impl FleetBuilder {
    fn push(&mut self, sub_id: String, bay_id: String, asset: Asset) {
        if !self.subs.contains_key(&sub_id) {
            self.order.push(sub_id.clone());
        }
        let (bay_order, bays) = self.subs.entry(sub_id).or_default();
        if !bays.contains_key(&bay_id) {
            bay_order.push(bay_id.clone());
        }
        bays.entry(bay_id).or_default().push(asset);
    }

    fn finish(mut self) -> Vec<Substation> {
        self.order
            .iter()
            .map(|sid| {
                let (bay_order, mut bays) = self.subs.remove(sid).expect("recorded");
                let bays = bay_order
                    .iter()
                    .map(|bid| Bay {
                        bay_id: bid.clone(),
                        assets: bays.remove(bid).expect("recorded"),
                    })
                    .collect();
                Substation {
                    substation_id: sid.clone(),
                    bays,
                }
            })
            .collect()
    }
}

/// Serialize a fleet in the format `read_fleet` accepts. Empty bays have no
/// rows and therefore do not survive a round trip.
pub fn write_fleet<W: Write>(subs: &[Substation], writer: W) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let werr = |e: csv::Error| IngestError::Write(e.to_string());
    w.write_record(FLEET_HEADER).map_err(werr)?;
    for sub in subs {
        for bay in &sub.bays {
            for a in &bay.assets {
                let year = a.build_year.map(|y| y.to_string()).unwrap_or_default();
                let cost = a.replacement_cost.map(|c| c.to_string()).unwrap_or_default();
                w.write_record([
                    a.asset_id.as_str(),
                    sub.substation_id.as_str(),
                    bay.bay_id.as_str(),
                    a.asset_type.as_str(),
                    a.population_class.as_str(),
                    year.as_str(),
                    &a.hi.value().to_string(),
                    cost.as_str(),
                    if a.bay_critical { "true" } else { "false" },
                ])
                .map_err(werr)?;
            }
        }
    }
    w.flush().map_err(|e| IngestError::Write(e.to_string()))
}

pub fn fleet_to_string(subs: &[Substation]) -> String {
    let mut buf = Vec::new();
    write_fleet(subs, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "asset_id,substation_id,bay_id,asset_type,population_class,build_year,hi_score,replacement_cost_eur,bay_critical";

    fn parse(body: &str) -> Result<Vec<Substation>, IngestError> {
        read_fleet(format!("{HEADER}\n{body}").as_bytes(), "fleet.csv")
    }

    #[test]
    fn maps_fields_directly() {
        let subs = parse("T1,VL,VL01,power_transformer,primary,1998,7,2500000,true\n").unwrap();
        let a = &subs[0].bays[0].assets[0];
        assert_eq!(subs[0].substation_id, "VL");
        assert_eq!(subs[0].bays[0].bay_id, "VL01");
        assert_eq!(a.asset_id, "T1");
        assert_eq!(a.asset_type.as_str(), "power_transformer");
        assert_eq!(a.population_class, PopulationClass::Primary);
        assert_eq!(a.build_year, Some(1998));
        assert_eq!(a.hi.value(), 7);
        assert_eq!(a.replacement_cost, Some(2_500_000.0));
        assert!(a.bay_critical);
    }

    #[test]
    fn empty_optional_fields() {
        let subs = parse("E1,VL,VL01,earthing,tertiary,,0,,false\n").unwrap();
        let a = &subs[0].bays[0].assets[0];
        assert_eq!(a.build_year, None);
        assert_eq!(a.replacement_cost, None);
        assert!(a.hi.is_invalid());
    }

    #[test]
    fn hi_out_of_range_names_line() {
        let err = parse("T1,VL,VL01,power_transformer,primary,1998,7,1,true\nT2,VL,VL01,power_transformer,primary,1998,11,1,true\n")
            .unwrap_err();
        assert!(matches!(err, IngestError::HiOutOfRange { line: 3, value: 11, .. }), "{err}");
        assert!(err.to_string().contains("fleet.csv:3"));
        let neg = parse("T1,VL,VL01,power_transformer,primary,1998,-1,1,true\n").unwrap_err();
        assert!(matches!(neg, IngestError::HiOutOfRange { value: -1, .. }));
    }

    #[test]
    fn duplicate_asset_id() {
        let err = parse("T1,VL,VL01,earthing,tertiary,,5,,false\nT1,ZY,ZY01,earthing,tertiary,,5,,false\n").unwrap_err();
        assert!(matches!(err, IngestError::DuplicateAssetId { line: 3, first_line: 2, .. }), "{err}");
    }

    #[test]
    fn header_checks() {
        assert!(matches!(
            read_fleet("".as_bytes(), "f"),
            Err(IngestError::MissingHeader { .. })
        ));
        assert!(matches!(
            read_fleet("T1,VL,VL01,earthing,tertiary,,5,,false\n".as_bytes(), "f"),
            Err(IngestError::MissingHeader { .. })
        ));
    }

    #[test]
    fn malformed_rows() {
        for (body, needle) in [
            ("T1,VL,VL01,earthing,tertiary,,5,,false,extra\n", "fields"),
            ("T1,VL,VL01,earthing,quaternary,,5,,false\n", "population_class"),
            ("T1,VL,VL01,earthing,tertiary,1850,5,,false\n", "build_year"),
            ("T1,VL,VL01,earthing,tertiary,,5.5,,false\n", "hi_score"),
            ("T1,VL,VL01,earthing,tertiary,,5,-3,false\n", "replacement_cost"),
            ("T1,VL,VL01,earthing,tertiary,,5,,yes\n", "bay_critical"),
            (",VL,VL01,earthing,tertiary,,5,,false\n", "asset_id"),
        ] {
            match parse(body) {
                Err(IngestError::MalformedRow { line: 2, reason, .. }) => {
                    assert!(reason.contains(needle), "{reason}")
                }
                other => panic!("{body}: {other:?}"),
            }
        }
    }

    #[test]
    fn preserves_first_appearance_order() {
        let subs = parse(
            "a,S2,B9,earthing,tertiary,,5,,false\nb,S1,B1,earthing,tertiary,,5,,false\nc,S2,B3,earthing,tertiary,,5,,false\nd,S2,B9,earthing,tertiary,,5,,false\n",
        )
        .unwrap();
        assert_eq!(subs[0].substation_id, "S2");
        assert_eq!(subs[0].bays[0].bay_id, "B9");
        assert_eq!(subs[0].bays[0].assets.len(), 2);
        assert_eq!(subs[0].bays[1].bay_id, "B3");
        assert_eq!(subs[1].substation_id, "S1");
    }

    #[test]
    fn write_then_read() {
        let text = format!("{HEADER}\nT1,VL,VL01,power_transformer,primary,1998,7,2500000,true\nE1,VL,VL02,earthing,tertiary,,0,1234.5,false\n");
        let subs = read_fleet(text.as_bytes(), "f").unwrap();
        assert_eq!(fleet_to_string(&subs), text);
    }
}
