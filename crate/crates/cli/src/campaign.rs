//! `simulate`: run a campaign of longitudinal brake-control scenarios and
//! write the resulting monotone table as a `.dpt` catalogue.

use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use mcd_core::av::blocks::load_sensor_dir;
use mcd_core::av::longitudinal::{
    longitudinal_table, CtrlSpec, DynSpec, EnvSpec, LongitudinalScenario,
};
use mcd_core::catalogue::CatalogueFile;
use mcd_core::MonotoneTable;

#[derive(Deserialize)]
struct EnvEntry {
    night: bool,
    density: f64,
}

#[derive(Deserialize)]
struct Campaign {
    episodes: usize,
    rng_seed: u64,
    horizon: f64,
    obstacle_dwell: f64,
    vehicle_mass: f64,
    /// Sensor directory, relative to the campaign file.
    sensors: String,
    cruise_speeds_kmh: Vec<f64>,
    environments: Vec<EnvEntry>,
    dynamics: DynSpec,
    ctrl: CtrlSpec,
}

pub fn cmd_simulate(
    campaign_path: &Path,
    out: &Path,
    jobs: Option<usize>,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let text = std::fs::read_to_string(campaign_path)
        .with_context(|| format!("cannot read campaign {}", campaign_path.display()))?;
    let campaign: Campaign =
        toml::from_str(&text).with_context(|| format!("{}", campaign_path.display()))?;
    if campaign.episodes == 0 {
        bail!("campaign: episodes must be positive");
    }
    let base = campaign_path.parent().unwrap_or(Path::new("."));
    let sensors = load_sensor_dir(&base.join(&campaign.sensors))?;
    if sensors.is_empty() {
        bail!("campaign: no sensors in {:?}", campaign.sensors);
    }

    let mut scenarios = Vec::new();
    for sensor in &sensors {
        for env in &campaign.environments {
            for &speed in &campaign.cruise_speeds_kmh {
                scenarios.push(LongitudinalScenario {
                    env: EnvSpec {
                        night: env.night,
                        density: env.density,
                    },
                    cruise_speed: speed,
                    dynamics: campaign.dynamics.clone(),
                    ctrl: campaign.ctrl.clone(),
                    sensor: sensor.clone(),
                    vehicle_mass: campaign.vehicle_mass,
                    horizon: campaign.horizon,
                    episodes: campaign.episodes,
                    rng_seed: seed.unwrap_or(campaign.rng_seed),
                    obstacle_dwell: campaign.obstacle_dwell,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0)) // 0 = rayon default
        .build()
        .context("cannot build worker pool")?;

    eprintln!(
        "simulating {} scenario(s) x {} episode(s)",
        scenarios.len(),
        campaign.episodes
    );
    let mut merged: Option<MonotoneTable> = None;
    let mut warnings = Vec::new();
    for (i, s) in scenarios.iter().enumerate() {
        eprintln!(
            "[{}/{}] {} at {:.0} km/h, {} {:.1}/km",
            i + 1,
            scenarios.len(),
            s.sensor.name,
            s.cruise_speed,
            if s.env.night { "night" } else { "day" },
            s.env.density
        );
        let (table, mut warns) = pool
            .install(|| longitudinal_table(std::slice::from_ref(s)))
            .map_err(|e| anyhow!("{e}"))?;
        warnings.append(&mut warns);
        match &mut merged {
            None => merged = Some(table),
            Some(m) => m.rows.extend(table.rows),
        }
    }
    let table = merged.expect("at least one scenario");
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let closed = table.monotone_closure().map_err(|e| anyhow!("{e}"))?;
    let mut file = CatalogueFile::from_table(
        "brake",
        &closed,
        &["cruise_speed", "environment", "latency_tolerance"],
        &[
            "sensing",
            "acq_frequency",
            "computation",
            "dynamic_performance",
            "danger",
            "discomfort",
        ],
    );
    file.warnings = warnings;
    file.save(out).map_err(|e| anyhow!("{e}"))?;
    eprintln!("wrote {} ({} rows)", out.display(), file.rows.len());
    Ok(ExitCode::SUCCESS)
}
