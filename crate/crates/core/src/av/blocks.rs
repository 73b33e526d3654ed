//! Catalogue-backed component blocks: ranging sensors (loaded from CSV
//! curve files plus a metadata sidecar), and built-in fixture catalogues
//! for vehicles, computers, lane cameras, feature detectors and control
//! algorithm implementations.

use std::path::Path;

use serde::Deserialize;

use crate::av::longitudinal::{canonical_grid, SensorRecord};
use crate::catalogue::CatalogueFile;
use crate::dp::{weighted_sum_node, Dpi, ImplId, MergeOp, MonotoneTable};
use crate::error::{CatalogueError, DpError, ModelError};
use crate::poset::{Poset, SampledCurve, Value};

/// Functionality ports of the ranging-sensor block: sensing performance
/// (fp/fn/accuracy curve triple, opposite-ordered — lower curves serve
/// any demand for higher ones) and acquisition frequency.
pub fn sensor_fun_poset() -> Poset {
    let grid = canonical_grid();
    Poset::Product(vec![
        Poset::Product(vec![
            Poset::opposite(Poset::curve(grid.clone(), "1", true)),
            Poset::opposite(Poset::curve(grid.clone(), "1", true)),
            Poset::opposite(Poset::curve(grid, "m", true)),
        ]),
        Poset::numeric("Hz"),
    ])
}

/// Resource ports: cost, mass, power, and the sensing latency the consumer
/// must tolerate.
pub fn sensor_res_poset() -> Poset {
    Poset::Product(vec![
        Poset::numeric("CHF"),
        Poset::numeric("g"),
        Poset::numeric("W"),
        Poset::numeric("s"),
    ])
}

fn curve_value(c: &SampledCurve) -> Value {
    Value::Curve(c.resample(&canonical_grid()).values)
}

/// Table-backed sensor block over a set of sensor records.
pub fn sensor_dpi(records: &[SensorRecord]) -> Result<Dpi, ModelError> {
    if records.is_empty() {
        return Err(ModelError::BadParam("empty sensor catalogue".to_string()));
    }
    let mut table = MonotoneTable::new(sensor_fun_poset(), sensor_res_poset());
    for r in records {
        table.rows.push((
            Value::Tuple(vec![
                Value::Tuple(vec![
                    curve_value(&r.fp_curve),
                    curve_value(&r.fn_curve),
                    curve_value(&r.acc_curve),
                ]),
                Value::Num(r.acquisition_frequency),
            ]),
            Value::Tuple(vec![
                Value::Num(r.cost),
                Value::Num(r.mass),
                Value::Num(r.power),
                Value::Num(r.latency),
            ]),
            ImplId::atom(&r.name),
        ));
    }
    let closed = table
        .monotone_closure()
        .map_err(|e| ModelError::BadParam(format!("closure failed: {e}")))?;
    Ok(closed.to_dpi())
}

#[derive(Deserialize)]
struct SensorSidecar {
    name: String,
    frequency_hz: f64,
    latency_s: f64,
    cost_chf: f64,
    mass_g: f64,
    power_w: f64,
}

/// Load one sensor from `<stem>.csv` (header `distance_m, fp, fn, acc_m`)
/// and its `<stem>.json` metadata sidecar; curves are resampled onto the
/// canonical distance grid.
pub fn load_sensor_record(csv_path: &Path) -> Result<SensorRecord, CatalogueError> {
    let path_s = csv_path.display().to_string();
    let io = |e: std::io::Error| CatalogueError::Io {
        path: path_s.clone(),
        source: e,
    };
    let fmt = |line: usize, msg: String| CatalogueError::Format {
        path: path_s.clone(),
        line,
        msg,
    };
    let text = std::fs::read_to_string(csv_path).map_err(io)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| fmt(1, "empty sensor file".to_string()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["distance_m", "fp", "fn", "acc_m"] {
        return Err(fmt(1, format!("bad header {header:?}")));
    }
    let mut dist = Vec::new();
    let mut fp = Vec::new();
    let mut fnr = Vec::new();
    let mut acc = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 4 {
            return Err(fmt(i + 1, format!("expected 4 cells, got {}", cells.len())));
        }
        let mut nums = [0.0f64; 4];
        for (k, c) in cells.iter().enumerate() {
            nums[k] = c
                .parse()
                .map_err(|_| fmt(i + 1, format!("malformed number {c:?}")))?;
        }
        dist.push(nums[0]);
        fp.push(nums[1]);
        fnr.push(nums[2]);
        acc.push(nums[3]);
    }
    if dist.len() < 2 {
        return Err(fmt(1, "need at least two distance samples".to_string()));
    }
    let mk = |values: Vec<f64>| {
        SampledCurve::new(dist.clone(), values)
            .map_err(|_| fmt(2, "distance column must be strictly increasing".to_string()))
    };
    let grid = canonical_grid();
    let fp_curve = mk(fp)?.resample(&grid);
    let fn_curve = mk(fnr)?.resample(&grid);
    let acc_curve = mk(acc)?.resample(&grid);

    let sidecar_path = csv_path.with_extension("json");
    let meta_text = std::fs::read_to_string(&sidecar_path).map_err(|e| CatalogueError::Io {
        path: sidecar_path.display().to_string(),
        source: e,
    })?;
    let meta: SensorSidecar = serde_json::from_str(&meta_text).map_err(|e| CatalogueError::Format {
        path: sidecar_path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    Ok(SensorRecord {
        name: meta.name,
        fp_curve,
        fn_curve,
        acc_curve,
        acquisition_frequency: meta.frequency_hz,
        latency: meta.latency_s,
        cost: meta.cost_chf,
        mass: meta.mass_g,
        power: meta.power_w,
    })
}

/// Load every `*.csv` sensor in a directory, sorted by file name.
pub fn load_sensor_dir(dir: &Path) -> Result<Vec<SensorRecord>, CatalogueError> {
    let io = |e: std::io::Error| CatalogueError::Io {
        path: dir.display().to_string(),
        source: e,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_sensor_record(p)).collect()
}

/// Weighted join of the two discomfort contributions (longitudinal braking
/// discomfort and lateral control effort) into a single budget.
pub fn discomfort_join_dpi(weights: [f64; 2]) -> Result<Dpi, DpError> {
    weighted_sum_node(2, Poset::numeric("dis"), MergeOp::Plus, Some(weights.to_vec()))
}

fn nums(xs: &[f64]) -> Vec<Value> {
    xs.iter().map(|&x| Value::Num(x)).collect()
}

fn simple_catalogue(
    kind: &str,
    fun_ports: &[(&str, Poset)],
    res_ports: &[(&str, Poset)],
    rows: &[(&str, &[f64], &[f64])],
) -> CatalogueFile {
    let wrap = |ports: &[(&str, Poset)]| -> Poset {
        if ports.len() == 1 {
            ports[0].1.clone()
        } else {
            Poset::Product(ports.iter().map(|(_, p)| p.clone()).collect())
        }
    };
    let tuple = |vs: Vec<Value>| -> Value {
        if vs.len() == 1 {
            vs.into_iter().next().unwrap()
        } else {
            Value::Tuple(vs)
        }
    };
    let mut table = MonotoneTable::new(wrap(fun_ports), wrap(res_ports));
    for (name, f, r) in rows {
        table
            .rows
            .push((tuple(nums(f)), tuple(nums(r)), ImplId::atom(name)));
    }
    let fun_names: Vec<&str> = fun_ports.iter().map(|(n, _)| *n).collect();
    let res_names: Vec<&str> = res_ports.iter().map(|(n, _)| *n).collect();
    CatalogueFile::from_table(kind, &table, &fun_names, &res_names)
}

/// Vehicle platforms. Provides braking performance, range, passenger
/// capacity, electrical power, equipment mass budget and steering actuation;
/// requires purchase cost, per-km externalities, and that its system noise
/// level be handled by the lateral controller.
pub fn vehicle_catalogue() -> CatalogueFile {
    simple_catalogue(
        "vehicle",
        &[
            ("dynamic_performance", Poset::numeric("m/s^2")),
            ("range", Poset::numeric("km")),
            ("capacity", Poset::numeric("persons")),
            ("power", Poset::numeric("W")),
            ("carried_mass", Poset::numeric("g")),
            ("actuation", Poset::numeric("Nm")),
        ],
        &[
            ("cost", Poset::numeric("CHF")),
            ("externalities", Poset::numeric("g/km")),
            ("system_noise", Poset::numeric("noise")),
        ],
        &[
            ("sedan_s", &[6.0, 600.0, 4.0, 1500.0, 40_000.0, 60.0], &[28_000.0, 120.0, 1.0]),
            ("sedan_l", &[6.5, 700.0, 5.0, 2500.0, 60_000.0, 80.0], &[45_000.0, 160.0, 1.2]),
            ("bev", &[7.0, 400.0, 5.0, 4000.0, 50_000.0, 90.0], &[52_000.0, 10.0, 0.8]),
            ("suv", &[5.5, 650.0, 6.0, 3000.0, 80_000.0, 110.0], &[58_000.0, 220.0, 1.5]),
            ("minivan", &[5.0, 550.0, 7.0, 3500.0, 90_000.0, 100.0], &[48_000.0, 200.0, 1.6]),
        ],
    )
}

/// Embedded computers: computation supply against cost, mass and power.
pub fn computer_catalogue() -> CatalogueFile {
    simple_catalogue(
        "computer",
        &[("computation", Poset::numeric("op/s"))],
        &[
            ("cost", Poset::numeric("CHF")),
            ("mass", Poset::numeric("g")),
            ("power", Poset::numeric("W")),
        ],
        &[
            ("nano", &[5e11], &[250.0, 250.0, 10.0]),
            ("xavier_nx", &[1e12], &[500.0, 280.0, 15.0]),
            ("xavier", &[1.5e12], &[900.0, 630.0, 30.0]),
            ("agx", &[2e12], &[1400.0, 700.0, 40.0]),
        ],
    )
}

/// Lane cameras: angular resolution against cost, mass and power.
pub fn lanecam_catalogue() -> CatalogueFile {
    simple_catalogue(
        "lanecam",
        &[("resolution", Poset::numeric("px/sterad"))],
        &[
            ("cost", Poset::numeric("CHF")),
            ("mass", Poset::numeric("g")),
            ("power", Poset::numeric("W")),
        ],
        &[
            ("cam_vga", &[2.0e6], &[350.0, 90.0, 3.0]),
            ("cam_hd", &[5.0e6], &[700.0, 120.0, 4.5]),
            ("cam_5mp", &[8.0e6], &[1100.0, 150.0, 6.0]),
            ("cam_10mp", &[1.6e7], &[2200.0, 300.0, 12.0]),
        ],
    )
}

/// Lane feature detectors: observation precision scale (opposite-ordered;
/// smaller is finer) and observation rate, against the camera resolution
/// and computation they need.
pub fn featdet_catalogue() -> CatalogueFile {
    simple_catalogue(
        "featdet",
        &[
            ("obs_precision", Poset::opposite(Poset::numeric("prec"))),
            ("obs_frequency", Poset::numeric("Hz")),
        ],
        &[
            ("resolution", Poset::numeric("px/sterad")),
            ("computation", Poset::numeric("op/s")),
        ],
        &[
            ("fd_fast", &[2.0, 40.0], &[2.0e6, 3e11]),
            ("fd_base", &[1.0, 20.0], &[5.0e6, 6e11]),
            ("fd_accurate", &[0.5, 15.0], &[8.0e6, 1.2e12]),
            ("fd_hires", &[0.25, 10.0], &[1.6e7, 1.9e12]),
        ],
    )
}

/// Control-algorithm implementations: achievable control rate against the
/// computation the benchmark showed it needs.
pub fn ctrlalgo_catalogue() -> CatalogueFile {
    simple_catalogue(
        "ctrlalgo",
        &[("ctrl_frequency", Poset::numeric("Hz"))],
        &[("computation", Poset::numeric("op/s"))],
        &[
            ("ctrl_10hz", &[10.0], &[1.0e10]),
            ("ctrl_25hz", &[25.0], &[2.5e10]),
            ("ctrl_50hz", &[50.0], &[5.0e10]),
        ],
    )
}
