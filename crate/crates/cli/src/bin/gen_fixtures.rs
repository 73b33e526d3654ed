//! Regenerate the shipped fixture set: component catalogues, the lateral
//! controller grid config, the synthetic sensor curve files and the
//! simulation campaign. Everything except `brake.dpt` (produced by
//! `mcd simulate`) comes from here.
//!
//! Usage: gen-fixtures [DIR]   (default: fixtures)

use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use mcd_core::av::blocks::{
    computer_catalogue, ctrlalgo_catalogue, featdet_catalogue, lanecam_catalogue,
    vehicle_catalogue,
};

/// One synthetic ranging sensor: metadata plus curve endpoints. The curves
/// are linear in distance between the 0 m and 150 m values, which keeps
/// them monotone-shaped (performance degrades with range) without claiming
/// any fidelity to the real devices the names nod to.
struct SensorSpec {
    name: &'static str,
    frequency_hz: f64,
    latency_s: f64,
    cost_chf: f64,
    mass_g: f64,
    power_w: f64,
    fp: [f64; 2],
    fnr: [f64; 2],
    acc: [f64; 2],
}

/// 16 sensors on a cost ladder: cheap cameras trade false positives
/// (phantom braking, discomfort) for money; lidars are clean but dear.
const SENSORS: &[SensorSpec] = &[
    // lidars
    SensorSpec { name: "vls128",           frequency_hz: 10.0, latency_s: 0.10, cost_chf: 4200.0, mass_g: 1000.0, power_w: 22.0, fp: [5e-6, 1.5e-5],   fnr: [0.02, 0.10], acc: [0.05, 0.15] },
    SensorSpec { name: "hdl64e",           frequency_hz: 10.0, latency_s: 0.10, cost_chf: 4000.0, mass_g: 1300.0, power_w: 24.0, fp: [6e-6, 2.0e-5],   fnr: [0.03, 0.12], acc: [0.06, 0.18] },
    SensorSpec { name: "os2_128",          frequency_hz: 10.0, latency_s: 0.10, cost_chf: 3800.0, mass_g: 900.0,  power_w: 20.0, fp: [8e-6, 2.5e-5],   fnr: [0.03, 0.15], acc: [0.05, 0.20] },
    SensorSpec { name: "vlp32c",           frequency_hz: 10.0, latency_s: 0.08, cost_chf: 3400.0, mass_g: 925.0,  power_w: 12.0, fp: [1.0e-5, 3.5e-5], fnr: [0.04, 0.18], acc: [0.07, 0.25] },
    SensorSpec { name: "hdl32e",           frequency_hz: 10.0, latency_s: 0.08, cost_chf: 3200.0, mass_g: 1000.0, power_w: 12.0, fp: [1.2e-5, 4.0e-5], fnr: [0.05, 0.20], acc: [0.08, 0.30] },
    SensorSpec { name: "os1_64",           frequency_hz: 20.0, latency_s: 0.06, cost_chf: 2800.0, mass_g: 455.0,  power_w: 15.0, fp: [1.5e-5, 5.0e-5], fnr: [0.05, 0.25], acc: [0.08, 0.35] },
    SensorSpec { name: "vlp16",            frequency_hz: 20.0, latency_s: 0.06, cost_chf: 2400.0, mass_g: 830.0,  power_w: 8.0,  fp: [2.0e-5, 7.0e-5], fnr: [0.07, 0.30], acc: [0.10, 0.40] },
    SensorSpec { name: "os0_32",           frequency_hz: 20.0, latency_s: 0.05, cost_chf: 2000.0, mass_g: 445.0,  power_w: 14.0, fp: [2.5e-5, 8.0e-5], fnr: [0.08, 0.35], acc: [0.10, 0.45] },
    // cameras
    SensorSpec { name: "flir_oryx",        frequency_hz: 30.0, latency_s: 0.03, cost_chf: 1800.0, mass_g: 300.0, power_w: 8.0,  fp: [3.0e-5, 1.5e-4], fnr: [0.10, 0.45], acc: [0.15, 0.80] },
    SensorSpec { name: "basler_boost",     frequency_hz: 30.0, latency_s: 0.03, cost_chf: 1400.0, mass_g: 250.0, power_w: 7.0,  fp: [4.0e-5, 2.0e-4], fnr: [0.10, 0.50], acc: [0.15, 0.90] },
    SensorSpec { name: "flir_grasshopper", frequency_hz: 30.0, latency_s: 0.04, cost_chf: 1000.0, mass_g: 180.0, power_w: 6.0,  fp: [5.0e-5, 2.5e-4], fnr: [0.12, 0.55], acc: [0.20, 1.00] },
    SensorSpec { name: "flir_bfs_50",      frequency_hz: 30.0, latency_s: 0.03, cost_chf: 800.0,  mass_g: 120.0, power_w: 5.0,  fp: [6.0e-5, 3.0e-4], fnr: [0.12, 0.60], acc: [0.20, 1.10] },
    SensorSpec { name: "basler_aca2440",   frequency_hz: 30.0, latency_s: 0.03, cost_chf: 600.0,  mass_g: 100.0, power_w: 4.5,  fp: [8.0e-5, 3.5e-4], fnr: [0.15, 0.65], acc: [0.25, 1.20] },
    SensorSpec { name: "flir_bfs_31",      frequency_hz: 30.0, latency_s: 0.03, cost_chf: 450.0,  mass_g: 90.0,  power_w: 4.0,  fp: [1.0e-4, 4.0e-4], fnr: [0.15, 0.70], acc: [0.25, 1.30] },
    SensorSpec { name: "basler_aca1920",   frequency_hz: 40.0, latency_s: 0.02, cost_chf: 300.0,  mass_g: 90.0,  power_w: 3.5,  fp: [1.2e-4, 5.0e-4], fnr: [0.18, 0.75], acc: [0.30, 1.40] },
    SensorSpec { name: "basler_dart",      frequency_hz: 40.0, latency_s: 0.02, cost_chf: 150.0,  mass_g: 15.0,  power_w: 2.0,  fp: [1.5e-4, 6.0e-4], fnr: [0.20, 0.80], acc: [0.30, 1.50] },
];

fn write_sensor(dir: &Path, s: &SensorSpec) -> Result<()> {
    let lerp = |ends: [f64; 2], d: f64| ends[0] + (ends[1] - ends[0]) * d / 150.0;
    let mut csv = String::from("distance_m, fp, fn, acc_m\n");
    for k in 0..=6 {
        let d = 25.0 * k as f64;
        csv.push_str(&format!(
            "{d}, {:e}, {:.4}, {:.4}\n",
            lerp(s.fp, d),
            lerp(s.fnr, d),
            lerp(s.acc, d)
        ));
    }
    std::fs::write(dir.join(format!("{}.csv", s.name)), csv)?;
    let meta = json!({
        "name": s.name,
        "frequency_hz": s.frequency_hz,
        "latency_s": s.latency_s,
        "cost_chf": s.cost_chf,
        "mass_g": s.mass_g,
        "power_w": s.power_w,
    });
    std::fs::write(
        dir.join(format!("{}.json", s.name)),
        format!("{}\n", serde_json::to_string_pretty(&meta)?),
    )?;
    Ok(())
}

/// LQG grid for the lateral block as explicit (alpha, precision scale,
/// observation frequency, control frequency) points: precision/rate pairs
/// mirror what the feature detectors can supply, plus an alpha spread on
/// the middle design; noise levels cover the vehicles the braking
/// requirement leaves eligible.
fn lateral_config() -> serde_json::Value {
    json!({
        "v": 15.0,
        "c": 1.0,
        "noise": [1e-4, 1e-3],
        "q0": [[1.0, 0.0], [0.0, 1.0]],
        "r0": 1.0,
        "base_obs_precision": [0.01, 0.05],
        "base_obs_frequency": 20.0,
        "grid": [
            [1.0, 0.5, 15.0, 25.0],
            [1.0, 0.5, 15.0, 50.0],
            [1.0, 1.0, 20.0, 25.0],
            [1.0, 1.0, 20.0, 50.0],
            [1.0, 2.0, 40.0, 25.0],
            [1.0, 2.0, 40.0, 50.0],
            [0.5, 1.0, 20.0, 50.0],
            [2.0, 1.0, 20.0, 50.0],
        ],
        "noise_levels": [0.8, 1.0, 1.2],
    })
}

const CAMPAIGN: &str = "\
# Brake-control simulation campaign behind fixtures/brake.dpt.
# Regenerate with: mcd simulate --campaign fixtures/campaign.toml --out fixtures/brake.dpt

episodes = 80
rng_seed = 20240817
horizon = 120.0
obstacle_dwell = 3.0
vehicle_mass = 1500.0
sensors = \"sensors\"
cruise_speeds_kmh = [30.0, 40.0, 55.0]

[[environments]]
night = false
density = 5.0

[dynamics]
v_max = 20.0
a_max = 3.0
a_min = 6.0

[ctrl]
theta = 0.5
control_frequency = 25.0
";

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".to_string());
    let dir = Path::new(&dir);
    let sensors = dir.join("sensors");
    std::fs::create_dir_all(&sensors).with_context(|| format!("{}", sensors.display()))?;

    for (name, cat) in [
        ("vehicles.cat", vehicle_catalogue()),
        ("computers.cat", computer_catalogue()),
        ("lanecam.cat", lanecam_catalogue()),
        ("featdet.cat", featdet_catalogue()),
        ("ctrlalgo.cat", ctrlalgo_catalogue()),
    ] {
        let path = dir.join(name);
        cat.save(&path).map_err(|e| anyhow::anyhow!("{e}"))?;
        eprintln!("wrote {}", path.display());
    }

    for s in SENSORS {
        write_sensor(&sensors, s)?;
    }
    eprintln!("wrote {} sensor(s) under {}", SENSORS.len(), sensors.display());

    std::fs::write(
        dir.join("lateral.json"),
        format!("{}\n", serde_json::to_string_pretty(&lateral_config())?),
    )?;
    eprintln!("wrote {}", dir.join("lateral.json").display());

    std::fs::write(dir.join("campaign.toml"), CAMPAIGN)?;
    eprintln!("wrote {}", dir.join("campaign.toml").display());
    Ok(())
}
