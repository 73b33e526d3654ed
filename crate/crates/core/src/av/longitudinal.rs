//! Longitudinal brake control evaluated by seeded Monte-Carlo simulation.
//!
//! Episodes drive a straight road with point obstacles placed by a spatial
//! Poisson process. Obstacles are transient (each is present during a
//! random time window), so a stopped vehicle can wait for the road to
//! clear and then resume. A Bayesian occupancy belief over a 150 m
//! forward window is maintained from noisy sensor readings (per-cell
//! false-positive/false-negative rates and Gaussian range error), and the
//! three-way cruise controller decides brake / accelerate / coast from the
//! belief mass within braking distance.
//!
//! The road ends at a known stop line, so every episode exercises one
//! acceleration ramp and one full stop ("reach and stop"): with no
//! obstacles, discomfort is exactly 2·v_cruise. The reported mean speed is
//! measured en route, up to the point where braking for the stop line
//! becomes due, so the terminal stop does not count against cruise-speed
//! feasibility.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{ImplId, MonotoneTable};
use crate::error::SimError;
use crate::poset::{Poset, SampledCurve, Value};
use crate::Dpi;

/// Canonical distance grid for sensor curves, metres.
pub fn canonical_grid() -> Vec<f64> {
    (0..=15).map(|k| (k * 10) as f64).collect()
}

/// Extent of the occupancy belief ahead of the vehicle, metres (1 m cells).
pub const BELIEF_RANGE: usize = 150;
/// Likelihood floor that keeps Bayes updates finite for perfect sensors.
pub const FP_FLOOR: f64 = 1e-6;
/// Standoff kept in front of a believed obstacle, metres.
pub const STANDOFF: f64 = 3.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SensorRecord {
    pub name: String,
    /// Per-cell false-positive probability per scan, by distance.
    pub fp_curve: SampledCurve,
    /// Miss probability for a present obstacle, by distance.
    pub fn_curve: SampledCurve,
    /// Range-error std-dev in metres, by distance.
    pub acc_curve: SampledCurve,
    pub acquisition_frequency: f64,
    pub latency: f64,
    pub cost: f64,
    pub mass: f64,
    pub power: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvSpec {
    pub night: bool,
    /// Obstacles per km.
    pub density: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DynSpec {
    pub v_max: f64,
    pub a_max: f64,
    /// Braking deceleration magnitude (positive).
    pub a_min: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CtrlSpec {
    /// Brake threshold on the belief integral, in (0,1).
    pub theta: f64,
    pub control_frequency: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LongitudinalScenario {
    pub env: EnvSpec,
    /// Requested cruise speed, km/h.
    pub cruise_speed: f64,
    pub dynamics: DynSpec,
    pub ctrl: CtrlSpec,
    pub sensor: SensorRecord,
    pub vehicle_mass: f64,
    /// Nominal episode horizon, seconds; the road is v_cruise·T·1.2 long.
    pub horizon: f64,
    pub episodes: usize,
    pub rng_seed: u64,
    /// How long each obstacle stays on the road, seconds.
    pub obstacle_dwell: f64,
}

impl LongitudinalScenario {
    pub fn v_cruise_ms(&self) -> f64 {
        self.cruise_speed / 3.6
    }

    pub fn check(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::BadScenario(m.to_string()));
        if !(self.cruise_speed > 0.0) || self.v_cruise_ms() > self.dynamics.v_max {
            return bad("need 0 < v_cruise <= v_max");
        }
        if !(self.ctrl.theta > 0.0 && self.ctrl.theta < 1.0) {
            return bad("theta must be in (0,1)");
        }
        if !(1.0..=50.0).contains(&self.ctrl.control_frequency) {
            return bad("control_frequency must be within 1.0-50.0 Hz");
        }
        if self.episodes == 0 {
            return bad("episode count must be positive");
        }
        if self.sensor.latency < 0.0 {
            return bad("latency must be nonnegative");
        }
        if !(self.dynamics.a_max > 0.0 && self.dynamics.a_min > 0.0) {
            return bad("accelerations must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub collided: bool,
    pub collision_momentum: f64,
    pub discomfort: f64,
    pub mean_speed: f64,
    pub distance_covered: f64,
}

/// Braking distance of Algorithm 1.
pub fn d_crit(v: f64, a_min: f64) -> f64 {
    v * v / (2.0 * a_min)
}

/// Belief mass within `window` metres ahead: whole 1 m cells plus the
/// fractional edge cell.
fn belief_mass(belief: &[f64], start: f64, window: f64) -> f64 {
    if window <= 0.0 {
        return 0.0;
    }
    let from = start;
    let to = start + window;
    let lo = from.floor() as usize;
    let hi = (to.ceil() as usize).min(belief.len());
    let mut acc = 0.0;
    for (i, b) in belief.iter().enumerate().take(hi).skip(lo) {
        let cell_lo = i as f64;
        let cell_hi = cell_lo + 1.0;
        let ov = (to.min(cell_hi) - from.max(cell_lo)).max(0.0);
        acc += b * ov;
    }
    acc
}

/// The three-way rule of the longitudinal controller, verbatim: brake if
/// the belief integral within d_crit reaches the threshold, else
/// accelerate below cruise speed, else coast. `belief[i]` is the occupancy
/// probability of the 1 m cell `[i, i+1)` ahead of the vehicle.
pub fn control_step(v: f64, belief: &[f64], s: &LongitudinalScenario) -> f64 {
    let dc = d_crit(v, s.dynamics.a_min);
    if belief_mass(belief, 0.0, dc) >= s.ctrl.theta {
        -s.dynamics.a_min
    } else if v < s.v_cruise_ms() {
        s.dynamics.a_max
    } else {
        0.0
    }
}

/// In-simulation variant: same rule, but the braking window is extended by
/// one control step of travel and a fixed standoff so that discrete
/// stepping cannot overshoot into a believed obstacle, and the brake
/// latches (release at a much lower threshold) so a stop is a single
/// clean ramp instead of boundary-following chatter.
fn control_step_sim(
    v: f64,
    belief: &[f64],
    x: f64,
    s: &LongitudinalScenario,
    dt: f64,
    braking: bool,
) -> f64 {
    let v_next = v + s.dynamics.a_max * dt;
    let (window, threshold) = if braking {
        // latched: keep braking until the belief over the full stopping
        // horizon collapses, regardless of the shrinking kinematic window
        let v_cs = s.v_cruise_ms();
        (
            d_crit(v_cs, s.dynamics.a_min) + v_cs * dt + STANDOFF,
            s.ctrl.theta * 0.05,
        )
    } else {
        (
            d_crit(v_next, s.dynamics.a_min) + v_next * dt + STANDOFF,
            s.ctrl.theta,
        )
    };
    if belief_mass(belief, x, window) >= threshold {
        -s.dynamics.a_min
    } else if v < s.v_cruise_ms() {
        s.dynamics.a_max
    } else {
        0.0
    }
}

fn night_factor(night: bool) -> (f64, f64, f64) {
    if night {
        (2.0, 2.0, 1.5)
    } else {
        (1.0, 1.0, 1.0)
    }
}

struct SensedCurves {
    fp: Vec<f64>,   // per metre, effective
    fnr: Vec<f64>,  // miss rate per metre
    acc: Vec<f64>,  // std-dev per metre
}

impl SensedCurves {
    fn new(sensor: &SensorRecord, env: &EnvSpec) -> SensedCurves {
        let (kfp, kfn, kacc) = night_factor(env.night);
        let mut fp = Vec::with_capacity(BELIEF_RANGE);
        let mut fnr = Vec::with_capacity(BELIEF_RANGE);
        let mut acc = Vec::with_capacity(BELIEF_RANGE);
        for i in 0..BELIEF_RANGE {
            let d = i as f64 + 0.5;
            fp.push((sensor.fp_curve.at(d) * kfp).clamp(0.0, 0.5));
            fnr.push((sensor.fn_curve.at(d) * kfn).clamp(0.0, 0.99));
            acc.push((sensor.acc_curve.at(d) * kacc).max(1e-3));
        }
        SensedCurves { fp, fnr, acc }
    }
}

/// One cell's posterior from prior odds and the likelihood ratio induced
/// by detected mass `e` in that cell.
pub fn bayes_cell(belief: f64, e: f64, fp: f64, fnr: f64) -> f64 {
    let fp = fp.max(FP_FLOOR).min(1.0 - FP_FLOOR);
    let e = e.clamp(0.0, 1.0);
    let lr_det = (1.0 - fnr) / fp;
    let lr_miss = fnr / (1.0 - fp);
    let lr = e * lr_det + (1.0 - e) * lr_miss;
    let b = belief.clamp(1e-9, 1.0 - 1e-9);
    let odds = b / (1.0 - b) * lr;
    odds / (1.0 + odds)
}

/// Gaussian CDF via Abramowitz–Stegun 7.1.26 (|err| < 1.5e-7).
fn phi(z: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.2316419 * z.abs());
    let poly = t
        * (0.319381530 + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
    let pdf = (-z * z / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let upper = pdf * poly;
    if z >= 0.0 {
        1.0 - upper
    } else {
        upper
    }
}

/// Detected mass per cell: each reported distance is smeared with a
/// Gaussian kernel of std ACC(d) and integrated over the 1 m cells.
fn detection_mass(detections: &[f64], curves: &SensedCurves, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for &d in detections {
        let i0 = d.max(0.0).min((BELIEF_RANGE - 1) as f64) as usize;
        let sd = curves.acc[i0];
        let lo = ((d - 4.0 * sd).floor().max(0.0)) as usize;
        let hi = (((d + 4.0 * sd).ceil()) as usize).min(BELIEF_RANGE);
        for (i, slot) in out.iter_mut().enumerate().take(hi).skip(lo) {
            let a = (i as f64 - d) / sd;
            let b = (i as f64 + 1.0 - d) / sd;
            *slot += phi(b) - phi(a);
        }
    }
    for x in out.iter_mut() {
        *x = x.min(1.0);
    }
}

struct Obstacle {
    pos: f64,
    t_on: f64,
    t_off: f64,
}

/// Simulate one episode; bit-deterministic given (scenario, seed).
pub fn simulate_episode(s: &LongitudinalScenario, seed: u64) -> EpisodeOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(s.rng_seed);
    rng.set_stream(seed);

    let v_cs = s.v_cruise_ms();
    let road_len = v_cs * s.horizon * 1.2;
    let t_max = 2.5 * s.horizon;
    let dt = 1.0 / s.ctrl.control_frequency;
    let curves = SensedCurves::new(&s.sensor, &s.env);

    // spatial Poisson placement with transient presence windows
    let mut obstacles: Vec<Obstacle> = Vec::new();
    let rate_m = s.env.density / 1000.0;
    if rate_m > 0.0 {
        let mut pos = 0.0;
        loop {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            pos += -u.ln() / rate_m;
            if pos >= road_len {
                break;
            }
            let t_on = rng.gen_range(0.0..t_max);
            obstacles.push(Obstacle {
                pos,
                t_on,
                t_off: t_on + s.obstacle_dwell,
            });
        }
    }

    let n_cells = road_len.ceil() as usize + BELIEF_RANGE + 2;
    let prior = 1.0 - (-rate_m).exp();
    let mut belief = vec![prior.max(1e-9); n_cells];
    // the stop line at the end of the road is known with certainty
    for (i, b) in belief.iter_mut().enumerate() {
        if (i as f64) >= road_len {
            *b = 1.0;
        }
    }

    // sensor readings in flight: (time due, position sensed from, distances)
    let mut pending: std::collections::VecDeque<(f64, f64, Vec<f64>)> =
        std::collections::VecDeque::new();
    let mut next_scan = 0.0;
    let mut det_mass = vec![0.0f64; BELIEF_RANGE];

    let mut x = 0.0f64;
    let mut v = 0.0f64;
    let mut t = 0.0f64;
    let mut discomfort = 0.0f64;
    let mut collided = false;
    let mut collision_momentum = 0.0f64;
    let mut braking = false;
    // en-route measurement: stops once braking for the stop line is due
    let mut enroute_t: Option<(f64, f64)> = None;

    while t < t_max {
        // episode ends once the vehicle has pulled up at the stop line
        if road_len - x <= STANDOFF + 1.5 && v <= 0.1 {
            break;
        }

        // scans fire at the acquisition frequency and arrive after latency
        while next_scan <= t {
            let mut dets: Vec<f64> = Vec::new();
            for ob in &obstacles {
                let d = ob.pos - x;
                if d < 0.0 || d >= BELIEF_RANGE as f64 {
                    continue;
                }
                if next_scan < ob.t_on || next_scan > ob.t_off {
                    continue;
                }
                let i = d as usize;
                if rng.gen_range(0.0..1.0) >= curves.fnr[i] {
                    let (z, _) = {
                        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                        let u2: f64 = rng.gen_range(0.0..1.0);
                        let r = (-2.0 * u1.ln()).sqrt();
                        let th = 2.0 * std::f64::consts::PI * u2;
                        (r * th.cos(), r * th.sin())
                    };
                    dets.push((d + z * curves.acc[i]).max(0.0));
                }
            }
            for (i, &fp) in curves.fp.iter().enumerate() {
                if rng.gen_range(0.0..1.0) < fp {
                    dets.push(i as f64 + 0.5);
                }
            }
            pending.push_back((next_scan + s.sensor.latency, x, dets));
            next_scan += 1.0 / s.sensor.acquisition_frequency;
        }

        // apply readings whose latency has elapsed
        while pending.front().is_some_and(|(due, _, _)| *due <= t) {
            let (_, x_sense, dets) = pending.pop_front().unwrap();
            detection_mass(&dets, &curves, &mut det_mass);
            let base = x_sense.floor() as usize;
            for k in 0..BELIEF_RANGE {
                let cell = base + k;
                if cell >= n_cells || (cell as f64) >= road_len {
                    continue; // stop line stays certain
                }
                if (cell as f64) < x.floor() {
                    continue; // already behind the vehicle
                }
                belief[cell] = bayes_cell(belief[cell], det_mass[k], curves.fp[k], curves.fnr[k]);
            }
        }

        let a_cmd = control_step_sim(v, &belief, x, s, dt, braking);
        braking = a_cmd < 0.0;

        // clip so speed never overshoots cruise or undershoots zero; the
        // discomfort integral then telescopes exactly over each ramp
        let v_new = if a_cmd > 0.0 {
            (v + a_cmd * dt).min(v_cs)
        } else if a_cmd < 0.0 {
            (v + a_cmd * dt).max(0.0)
        } else {
            v
        };
        let a_eff = (v_new - v) / dt;
        discomfort += a_eff.abs() * dt;
        let x_new = x + v * dt + 0.5 * a_eff * dt * dt;

        // end of the en-route segment: braking for the stop line is due
        if enroute_t.is_none() {
            let v_next = v + s.dynamics.a_max * dt;
            let window = d_crit(v_next, s.dynamics.a_min) + v_next * dt + STANDOFF;
            if x_new + window >= road_len {
                enroute_t = Some((t + dt, x_new));
            }
        }

        // collision check on the swept interval
        if v_new > 0.1 || v > 0.1 {
            for ob in &obstacles {
                if ob.pos > x && ob.pos <= x_new && t >= ob.t_on && t <= ob.t_off {
                    let impact_v = v.max(v_new);
                    if impact_v > 0.1 {
                        collided = true;
                        collision_momentum = s.vehicle_mass * impact_v;
                    }
                }
            }
        }
        x = x_new;
        v = v_new;
        t += dt;
        if collided {
            break;
        }
    }

    let (mt, mx) = enroute_t.unwrap_or((t.max(dt), x));
    EpisodeOutcome {
        collided,
        collision_momentum,
        discomfort,
        mean_speed: mx / mt.max(dt),
        distance_covered: x,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub danger: f64,
    pub discomfort: f64,
    pub achieved_speed: f64,
    pub collision_fraction: f64,
}

pub fn aggregate_outcomes(
    outcomes: &[EpisodeOutcome],
    _vehicle_mass: f64,
) -> Result<Aggregate, SimError> {
    if outcomes.is_empty() {
        return Err(SimError::EmptyOutcomes);
    }
    let n = outcomes.len() as f64;
    let collisions: Vec<&EpisodeOutcome> = outcomes.iter().filter(|o| o.collided).collect();
    let frac = collisions.len() as f64 / n;
    let mean_momentum = if collisions.is_empty() {
        0.0
    } else {
        collisions.iter().map(|o| o.collision_momentum).sum::<f64>() / collisions.len() as f64
    };
    Ok(Aggregate {
        danger: frac * mean_momentum,
        discomfort: outcomes.iter().map(|o| o.discomfort).sum::<f64>() / n,
        achieved_speed: outcomes.iter().map(|o| o.mean_speed).sum::<f64>() / n,
        collision_fraction: frac,
    })
}

/// Run all episodes of a scenario (parallel fan-out, deterministic order).
pub fn run_scenario(s: &LongitudinalScenario) -> Result<Aggregate, SimError> {
    s.check()?;
    if let Some(hit) = cache_lookup(s) {
        return Ok(hit);
    }
    let outcomes: Vec<EpisodeOutcome> = (0..s.episodes as u64)
        .into_par_iter()
        .map(|k| simulate_episode(s, k))
        .collect();
    let agg = aggregate_outcomes(&outcomes, s.vehicle_mass)?;
    cache_store(s, &agg);
    Ok(agg)
}

fn cache_key(s: &LongitudinalScenario) -> Option<std::path::PathBuf> {
    let dir = std::env::var_os("MCD_CACHE_DIR")?;
    let blob = serde_json::to_vec(s).ok()?;
    use sha2::Digest;
    let hash = format!("{:x}", sha2::Sha256::digest(&blob));
    Some(std::path::Path::new(&dir).join(format!("{hash}.json")))
}

fn cache_lookup(s: &LongitudinalScenario) -> Option<Aggregate> {
    let path = cache_key(s)?;
    let text = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}

fn cache_store(s: &LongitudinalScenario, agg: &Aggregate) {
    if let Some(path) = cache_key(s) {
        if let Some(parent) = path.parent() {
            let _ = std::fs::create_dir_all(parent);
        }
        let _ = std::fs::write(path, serde_json::to_string_pretty(agg).unwrap());
    }
}

/// Resource-side computation demand of the brake pipeline, op/s.
pub fn computation_demand(ctrl_frequency: f64, acq_frequency: f64) -> f64 {
    2e9 + 1e7 * ctrl_frequency + 6e7 * acq_frequency
}

/// Build the longitudinal design problem from simulated scenarios.
///
/// Functionality: (cruise speed [km/h], time of day, obstacle density
/// [1/km], tolerated sensor latency [s]). Resources: (sensing performance
/// as three opposite-ordered curves, acquisition frequency, computation,
/// dynamic performance, danger, discomfort). A scenario is feasible iff
/// the achieved en-route mean speed reaches 95% of the request.
pub fn longitudinal_dpi(
    scenarios: &[LongitudinalScenario],
) -> Result<(Dpi, Vec<String>), SimError> {
    let table = longitudinal_table(scenarios)?;
    let warnings = Vec::new();
    let closed = table
        .0
        .monotone_closure()
        .map_err(|e| SimError::BadScenario(format!("closure failed: {e}")))?;
    let mut w = table.1;
    w.extend(warnings);
    Ok((closed.to_dpi(), w))
}

/// Functionality ports: cruise speed, environment (time of day x obstacle
/// density as a single product-typed port), tolerated sensing latency.
pub fn longitudinal_fun_poset() -> Poset {
    Poset::Product(vec![
        Poset::numeric("km/h"),
        Poset::Product(vec![
            Poset::finite(&["day", "night"], &[("day", "night")]).unwrap(),
            Poset::numeric("1/km"),
        ]),
        Poset::numeric("s"),
    ])
}

/// Resource ports: sensing performance (fp/fn/accuracy curve triple as a
/// single product-typed port), acquisition frequency, computation,
/// braking performance, danger, discomfort.
pub fn longitudinal_res_poset() -> Poset {
    let grid = canonical_grid();
    Poset::Product(vec![
        Poset::Product(vec![
            Poset::opposite(Poset::curve(grid.clone(), "1", true)),
            Poset::opposite(Poset::curve(grid.clone(), "1", true)),
            Poset::opposite(Poset::curve(grid, "m", true)),
        ]),
        Poset::numeric("Hz"),
        Poset::numeric("op/s"),
        Poset::numeric("m/s^2"),
        Poset::numeric("kgm/s"),
        Poset::numeric("dis"),
    ])
}

pub fn longitudinal_table(
    scenarios: &[LongitudinalScenario],
) -> Result<(MonotoneTable, Vec<String>), SimError> {
    if scenarios.is_empty() {
        return Err(SimError::BadScenario("empty scenario grid".to_string()));
    }
    let mut table = MonotoneTable::new(longitudinal_fun_poset(), longitudinal_res_poset());
    let mut warnings = Vec::new();
    let grid = canonical_grid();
    for s in scenarios {
        let agg = run_scenario(s)?;
        if agg.achieved_speed < 0.95 * s.v_cruise_ms() {
            warnings.push(format!(
                "scenario {} at {:.0} km/h: achieved {:.2} m/s < 95% of cruise, dropped",
                s.sensor.name,
                s.cruise_speed,
                agg.achieved_speed
            ));
            continue;
        }
        let sample = |c: &SampledCurve| Value::Curve(grid.iter().map(|&d| c.at(d)).collect());
        table.rows.push((
            Value::Tuple(vec![
                Value::Num(s.cruise_speed),
                Value::Tuple(vec![
                    Value::Label(if s.env.night { "night" } else { "day" }.to_string()),
                    Value::Num(s.env.density),
                ]),
                Value::Num(s.sensor.latency),
            ]),
            Value::Tuple(vec![
                Value::Tuple(vec![
                    sample(&s.sensor.fp_curve),
                    sample(&s.sensor.fn_curve),
                    sample(&s.sensor.acc_curve),
                ]),
                Value::Num(s.sensor.acquisition_frequency),
                Value::Num(computation_demand(
                    s.ctrl.control_frequency,
                    s.sensor.acquisition_frequency,
                )),
                Value::Num(s.dynamics.a_min),
                Value::Num(agg.danger),
                Value::Num(agg.discomfort),
            ]),
            ImplId::Named(vec![
                ("sensor".to_string(), ImplId::atom(&s.sensor.name)),
                (
                    "ctrl".to_string(),
                    ImplId::atom(&format!(
                        "f={}Hz,theta={}",
                        s.ctrl.control_frequency, s.ctrl.theta
                    )),
                ),
            ]),
        ));
    }
    Ok((table, warnings))
}
