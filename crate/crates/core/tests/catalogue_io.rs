//! Catalogue file round-trips, corruption detection, and schema errors.

use mcd_core::catalogue::{parse_catalogue, CatalogueFile};
use mcd_core::dp::ImplId;
use mcd_core::error::CatalogueError;
use mcd_core::poset::{Poset, Value};
use mcd_core::MonotoneTable;
use sha2::Digest;

fn sample_table() -> MonotoneTable {
    let fun = Poset::numeric("m/s^2");
    let res = Poset::product(vec![
        Poset::numeric("CHF"),
        Poset::opposite(Poset::curve(vec![0.0, 50.0, 100.0], "1", true)),
    ]);
    let mut t = MonotoneTable::new(fun, res);
    t.rows.push((
        Value::Num(3.0),
        Value::Tuple(vec![
            Value::Num(16000.0),
            Value::Curve(vec![0.9, 0.5, 0.1]),
        ]),
        ImplId::atom("small"),
    ));
    t.rows.push((
        Value::Num(4.5),
        Value::Tuple(vec![
            Value::Num(26000.0),
            Value::Curve(vec![0.95, 0.7, 0.3]),
        ]),
        ImplId::atom("large"),
    ));
    t
}

#[test]
fn save_load_round_trip_preserves_h() {
    let t = sample_table();
    let file = CatalogueFile::from_table("vehicle", &t, &["accel"], &["cost", "quality"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vehicles.cat");
    file.save(&path).unwrap();

    let loaded = CatalogueFile::load(&path).unwrap();
    assert_eq!(loaded.block_kind, "vehicle");
    assert_eq!(loaded.rows.len(), 2);
    let d1 = t.to_dpi();
    let d2 = loaded.to_dpi();
    for q in [0.0, 3.0, 4.0, 4.5, 5.0] {
        let a = d1.eval_h(&Value::Num(q)).unwrap();
        let b = d2.eval_h(&Value::Num(q)).unwrap();
        assert!(a.same_upper_set(&b).unwrap(), "h({q}) differs after round-trip");
    }
}

#[test]
fn product_typed_ports_round_trip() {
    // a port whose poset is itself a product (label x num), with a
    // tuple-of-curves port on the resource side
    let fun = Poset::product(vec![
        Poset::numeric("km/h"),
        Poset::product(vec![
            Poset::finite(&["day", "night"], &[("day", "night")]).unwrap(),
            Poset::numeric("1/km"),
        ]),
    ]);
    let res = Poset::product(vec![
        Poset::product(vec![
            Poset::opposite(Poset::curve(vec![0.0, 75.0, 150.0], "1", true)),
            Poset::opposite(Poset::curve(vec![0.0, 75.0, 150.0], "m", true)),
        ]),
        Poset::numeric("kgm/s"),
    ]);
    let mut t = MonotoneTable::new(fun, res);
    t.rows.push((
        Value::Tuple(vec![
            Value::Num(30.0),
            Value::Tuple(vec![Value::Label("day".into()), Value::Num(5.0)]),
        ]),
        Value::Tuple(vec![
            Value::Tuple(vec![
                Value::Curve(vec![1e-3, 2e-3, 4e-3]),
                Value::Curve(vec![0.2, 1.0, 2.0]),
            ]),
            Value::Num(120.0),
        ]),
        ImplId::atom("row0"),
    ));
    let file = CatalogueFile::from_table("brake", &t, &["cruise", "environment"], &["sensing", "danger"]);
    let text = file.render();
    let loaded = parse_catalogue(&text, "mem").unwrap();
    assert_eq!(loaded.fun_poset().signature(), t.fun_poset.signature());
    assert_eq!(loaded.res_poset().signature(), t.res_poset.signature());
    let q = Value::Tuple(vec![
        Value::Num(25.0),
        Value::Tuple(vec![Value::Label("day".into()), Value::Num(2.0)]),
    ]);
    let a = t.to_dpi().eval_h(&q).unwrap();
    let b = loaded.to_dpi().eval_h(&q).unwrap();
    assert!(a.same_upper_set(&b).unwrap());
}

#[test]
fn corruption_is_detected() {
    let t = sample_table();
    let file = CatalogueFile::from_table("vehicle", &t, &["accel"], &["cost", "quality"]);
    let text = file.render();
    // flip one digit inside the body
    let pos = text.find("16000").unwrap();
    let mut corrupted = text.clone();
    corrupted.replace_range(pos..pos + 1, "2");
    match parse_catalogue(&corrupted, "mem") {
        Err(CatalogueError::Checksum { .. }) => {}
        other => panic!("expected checksum error, got {other:?}"),
    }
}

#[test]
fn missing_column_names_the_row() {
    let text = "\
mcd-table 1
kind: computer
fun:
  computation: num[op/s]
res:
  cost: num[CHF]
  power: num[W]
rows:
impl,computation,cost,power
nano,1e9,99,5
agx,3e9,800
";
    let digest = format!("{:x}", sha2::Sha256::digest(text.as_bytes()));
    let full = format!("{text}sha256: {digest}\n");
    match parse_catalogue(&full, "mem") {
        Err(CatalogueError::MissingColumn { row, port, .. }) => {
            assert_eq!(row, 2);
            assert_eq!(port, "power");
        }
        other => panic!("expected missing-column error, got {other:?}"),
    }
}

#[test]
fn unit_mismatch_in_header_is_rejected() {
    let text = "\
mcd-table 1
kind: computer
fun:
  computation: num[op/s]
res:
  cost: num[CHF]
rows:
impl,computation,cost[EUR]
nano,1e9,99
";
    let digest = format!("{:x}", sha2::Sha256::digest(text.as_bytes()));
    let full = format!("{text}sha256: {digest}\n");
    match parse_catalogue(&full, "mem") {
        Err(CatalogueError::UnitMismatch {
            declared, found, ..
        }) => {
            assert_eq!(declared, "CHF");
            assert_eq!(found, "EUR");
        }
        other => panic!("expected unit-mismatch error, got {other:?}"),
    }
}

#[test]
fn empty_rows_section_is_valid_with_warning() {
    let text = "\
mcd-table 1
kind: sensor
fun:
  f: num[x]
res:
  r: num[y]
rows:
";
    let digest = format!("{:x}", sha2::Sha256::digest(text.as_bytes()));
    let full = format!("{text}sha256: {digest}\n");
    let f = parse_catalogue(&full, "mem").unwrap();
    assert!(f.rows.is_empty());
    assert!(!f.warnings.is_empty());
    // empty catalogue: every query infeasible
    assert!(f.to_dpi().eval_h(&Value::Num(0.0)).unwrap().is_empty());
}

#[test]
fn malformed_number_reports_line() {
    let text = "\
mcd-table 1
kind: computer
fun:
  computation: num[op/s]
res:
  cost: num[CHF]
rows:
impl,computation,cost
nano,banana,99
";
    let digest = format!("{:x}", sha2::Sha256::digest(text.as_bytes()));
    let full = format!("{text}sha256: {digest}\n");
    match parse_catalogue(&full, "mem") {
        Err(CatalogueError::Format { line, msg, .. }) => {
            assert_eq!(line, 9);
            assert!(msg.contains("computation"), "{msg}");
        }
        other => panic!("expected format error, got {other:?}"),
    }
}

#[test]
fn finite_poset_ports_round_trip() {
    let fun = Poset::product(vec![
        Poset::finite(&["day", "night"], &[("day", "night")]).unwrap(),
        Poset::numeric("1/km"),
    ]);
    let res = Poset::numeric("CHF");
    let mut t = MonotoneTable::new(fun, res);
    t.rows.push((
        Value::Tuple(vec![Value::Label("night".into()), Value::Num(5.0)]),
        Value::Num(100.0),
        ImplId::atom("x"),
    ));
    let file = CatalogueFile::from_table("env", &t, &["time", "density"], &["cost"]);
    let loaded = parse_catalogue(&file.render(), "mem").unwrap();
    let d = loaded.to_dpi();
    let day_q = Value::Tuple(vec![Value::Label("day".into()), Value::Num(3.0)]);
    let night_q = Value::Tuple(vec![Value::Label("night".into()), Value::Num(5.0)]);
    assert!(!d.eval_h(&night_q).unwrap().is_empty());
    assert!(!d.eval_h(&day_q).unwrap().is_empty()); // night row covers day
}
