use hiagg::ingest::{audit_fleet, fleet_to_string, parse_catalogs, parse_fleet, IngestError, FLEET_HEADER};
use hiagg::synthgen::{corrupt_fleet, generate_fleet, FleetSpec};
use hiagg::{AssetType, Catalogs, HealthScore, PopulationClass};
use tempfile::TempDir;

#[test]
fn example_row_maps_field_by_field() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("fleet.csv");
    std::fs::write(
        &path,
        format!(
            "{}\nT1,VL,VL01,power_transformer,primary,1998,7,2500000,true\n",
            FLEET_HEADER.join(",")
        ),
    )
    .unwrap();
    let subs = parse_fleet(&path).unwrap();
    let a = &subs[0].bays[0].assets[0];
    assert_eq!(subs[0].substation_id, "VL");
    assert_eq!(subs[0].bays[0].bay_id, "VL01");
    assert_eq!(a.asset_id, "T1");
    assert_eq!(a.asset_type, AssetType::new("power_transformer"));
    assert_eq!(a.population_class, PopulationClass::Primary);
    assert_eq!(a.build_year, Some(1998));
    assert_eq!(a.hi, HealthScore::new(7).unwrap());
    assert_eq!(a.replacement_cost, Some(2_500_000.0));
    assert!(a.bay_critical);
}

#[test]
fn file_errors_name_the_path() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.csv");
    std::fs::write(&path, "not,a,header\n").unwrap();
    let err = parse_fleet(&path).unwrap_err();
    assert!(matches!(err, IngestError::MissingHeader { .. }));
    assert!(err.to_string().contains("broken.csv:1:"), "{err}");

    let missing = dir.path().join("absent.toml");
    let err = parse_catalogs(Some(&missing)).unwrap_err();
    assert!(matches!(err, IngestError::Io { .. }));
    assert!(err.to_string().contains("absent.toml"));
}

#[test]
fn audit_matches_recount_over_raw_rows() {
    let spec = FleetSpec {
        seed: 77,
        ..FleetSpec::default()
    };
    let fleet = corrupt_fleet(&generate_fleet(&spec).unwrap(), 0.2, 5).unwrap();
    let text = fleet_to_string(&fleet);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let invalid = rows.iter().filter(|r| r[6] == "0").count();

    let audit = audit_fleet(&fleet, &Catalogs::default());
    assert_eq!(audit.fleet.n_assets, rows.len());
    assert_eq!(audit.fleet.n_invalid, invalid);
    assert_eq!(audit.fleet.unknown_type, 0);
    for sub in &audit.substations {
        let in_sub: Vec<&Vec<&str>> = rows.iter().filter(|r| r[1] == sub.substation_id).collect();
        assert_eq!(sub.counts.n_assets, in_sub.len());
        assert_eq!(sub.counts.n_invalid, in_sub.iter().filter(|r| r[6] == "0").count());
        let bay_total: usize = sub.bays.iter().map(|b| b.counts.n_assets).sum();
        assert_eq!(bay_total, sub.counts.n_assets);
    }
}

#[test]
fn unknown_type_is_soft_at_ingest() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("fleet.csv");
    std::fs::write(
        &path,
        format!(
            "{}\nX1,S,B,flux_capacitor,secondary,,5,,false\nX2,S,B,circuit_breaker,primary,,8,,false\n",
            FLEET_HEADER.join(",")
        ),
    )
    .unwrap();
    let subs = parse_fleet(&path).unwrap();
    let audit = audit_fleet(&subs, &Catalogs::default());
    assert_eq!(audit.fleet.unknown_type, 1);
    assert_eq!(audit.fleet.missing_fields, 4);
}
