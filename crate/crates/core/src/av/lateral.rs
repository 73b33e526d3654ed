//! Lateral (lane-keeping) control as a discrete-time LQG problem.
//!
//! Model: heading θ and lateral offset y around the lane center,
//!   θ̇ = c·τ + w_θ,   ẏ = v·θ + w_y,
//! observed in full through noise at the observation frequency. The
//! controller runs at `ctrl_frequency`; the continuous dynamics are
//! discretized exactly (the drift matrix is nilpotent). Solving the control
//! and estimation Riccati equations yields the stationary tracking cost
//! J_track = tr(Q0·Σ_x) and effort J_eff = r0·E{τ²}; the weight α trades
//! one against the other.

use nalgebra::{Matrix2, Matrix4, Vector2};

use crate::dp::{ImplId, MonotoneTable};
use crate::error::ModelError;
use crate::poset::{Poset, Value};
use crate::Dpi;

#[derive(Clone, Debug)]
pub struct LateralParams {
    /// Forward speed, m/s.
    pub v: f64,
    /// Steering gain, rad/(s·unit torque).
    pub c: f64,
    /// Process-noise intensity (variance rate) for θ and y.
    pub noise: [f64; 2],
    /// State weight, positive semidefinite.
    pub q0: Matrix2<f64>,
    /// Control weight, positive.
    pub r0: f64,
    /// Trade-off weight: the running cost is xᵀ(αQ0)x + (r0/α)τ².
    pub alpha: f64,
    /// Observation noise std-devs for (θ, y): rad and m.
    pub obs_precision: [f64; 2],
    /// Observation frequency, Hz.
    pub obs_frequency: f64,
    /// Control frequency, Hz.
    pub ctrl_frequency: f64,
}

impl LateralParams {
    fn check(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::BadParam(m.to_string()));
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        if !(self.r0 > 0.0) {
            return bad("r0 must be positive");
        }
        if !(self.ctrl_frequency > 0.0) || !(self.obs_frequency > 0.0) {
            return bad("frequencies must be positive");
        }
        if self.noise[0] < 0.0 || self.noise[1] < 0.0 {
            return bad("noise intensities must be nonnegative");
        }
        if self.q0[(0, 1)] != self.q0[(1, 0)] {
            return bad("Q0 must be symmetric");
        }
        if self.obs_precision.iter().any(|&s| s < 0.0) {
            return bad("obs_precision must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LateralOutcome {
    pub j_track: f64,
    pub j_eff: f64,
}

/// The synthesized discrete-time closed loop; exposed so simulations can
/// replay exactly the same system the analysis solved.
#[derive(Clone, Debug)]
pub struct LateralDesign {
    pub dt: f64,
    pub ad: Matrix2<f64>,
    pub bd: Vector2<f64>,
    /// Discrete process-noise covariance per control step.
    pub wd: Matrix2<f64>,
    /// Effective observation-noise covariance at the control rate.
    pub rn: Matrix2<f64>,
    /// State-feedback gain: τ = -K x̂.
    pub k_gain: Vector2<f64>,
    /// Stationary Kalman gain.
    pub l_gain: Matrix2<f64>,
}

const FP_TOL: f64 = 1e-10;
const FP_MAX_ITER: usize = 100_000;

fn residual(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

/// Control DARE by fixed-point iteration on the cost-to-go recursion.
fn solve_dare_control(
    ad: &Matrix2<f64>,
    bd: &Vector2<f64>,
    q: &Matrix2<f64>,
    r: f64,
) -> Result<Matrix2<f64>, ModelError> {
    let mut p = *q;
    for _ in 0..FP_MAX_ITER {
        let btpb = (bd.transpose() * p * bd)[(0, 0)];
        let btpa = bd.transpose() * p * ad;
        let next = q + ad.transpose() * p * ad - (ad.transpose() * p * bd) * (btpa / (r + btpb));
        let res = residual(&next, &p);
        p = next;
        if res < FP_TOL {
            return Ok(p);
        }
        if !p.iter().all(|x| x.is_finite()) {
            break;
        }
    }
    Err(ModelError::RiccatiDiverged {
        residual: residual(&p, &p).max(f64::NAN),
    })
}

/// Filter DARE (prediction covariance) by fixed-point iteration; C = I.
fn solve_dare_filter(
    ad: &Matrix2<f64>,
    wd: &Matrix2<f64>,
    rn: &Matrix2<f64>,
) -> Result<Matrix2<f64>, ModelError> {
    let mut s = *wd;
    for _ in 0..FP_MAX_ITER {
        let gain = s * (s + rn)
            .try_inverse()
            .ok_or(ModelError::RiccatiDiverged { residual: f64::NAN })?;
        let post = s - gain * s;
        let next = ad * post * ad.transpose() + wd;
        let res = residual(&next, &s);
        s = next;
        if res < FP_TOL {
            return Ok(s);
        }
        if !s.iter().all(|x| x.is_finite()) {
            break;
        }
    }
    Err(ModelError::RiccatiDiverged { residual: f64::NAN })
}

/// Synthesize gains for the given parameters.
pub fn design(p: &LateralParams) -> Result<LateralDesign, ModelError> {
    p.check()?;
    if p.obs_precision.iter().any(|&s| s.is_infinite()) {
        return Err(ModelError::Undetectable);
    }
    let dt = 1.0 / p.ctrl_frequency;
    // A = [[0,0],[v,0]] is nilpotent: exact discretization terminates at
    // first order in A.
    let ad = Matrix2::new(1.0, 0.0, p.v * dt, 1.0);
    let bd = Vector2::new(p.c * dt, p.v * p.c * dt * dt / 2.0);
    let (w_th, w_y) = (p.noise[0], p.noise[1]);
    let wd = Matrix2::new(
        w_th * dt,
        w_th * p.v * dt * dt / 2.0,
        w_th * p.v * dt * dt / 2.0,
        w_y * dt + w_th * p.v * p.v * dt * dt * dt / 3.0,
    );
    // sample-and-hold between observations inflates the per-step
    // observation noise by the rate ratio
    let infl = p.ctrl_frequency / p.obs_frequency;
    let rn = Matrix2::new(
        p.obs_precision[0] * p.obs_precision[0] * infl,
        0.0,
        0.0,
        p.obs_precision[1] * p.obs_precision[1] * infl,
    );

    let q = p.q0 * (p.alpha * dt);
    let r = p.r0 / p.alpha * dt;
    let pp = solve_dare_control(&ad, &bd, &q, r)?;
    let btpb = (bd.transpose() * pp * bd)[(0, 0)];
    let k_row = (bd.transpose() * pp * ad) / (r + btpb);
    let k_gain = Vector2::new(k_row[(0, 0)], k_row[(0, 1)]);

    let spred = solve_dare_filter(&ad, &wd, &rn)?;
    let l_gain = spred
        * (spred + rn)
            .try_inverse()
            .ok_or(ModelError::RiccatiDiverged { residual: f64::NAN })?;

    Ok(LateralDesign {
        dt,
        ad,
        bd,
        wd,
        rn,
        k_gain,
        l_gain,
    })
}

/// Stationary joint covariance of (x, e) for the closed loop, by Lyapunov
/// fixed-point iteration.
fn stationary_covariance(d: &LateralDesign) -> Result<Matrix4<f64>, ModelError> {
    let i2 = Matrix2::identity();
    let a_cl = d.ad - d.bd * d.k_gain.transpose();
    let bk = d.bd * d.k_gain.transpose();
    let il = i2 - d.l_gain;
    let f_est = il * d.ad;

    let mut f = Matrix4::zeros();
    f.fixed_view_mut::<2, 2>(0, 0).copy_from(&a_cl);
    f.fixed_view_mut::<2, 2>(0, 2).copy_from(&bk);
    f.fixed_view_mut::<2, 2>(2, 2).copy_from(&f_est);

    // z_{k+1} = F z_k + [I; I-L] w - [0; L] v
    let q_xx = d.wd;
    let q_xe = d.wd * il.transpose();
    let q_ee = il * d.wd * il.transpose() + d.l_gain * d.rn * d.l_gain.transpose();
    let mut qz = Matrix4::zeros();
    qz.fixed_view_mut::<2, 2>(0, 0).copy_from(&q_xx);
    qz.fixed_view_mut::<2, 2>(0, 2).copy_from(&q_xe);
    qz.fixed_view_mut::<2, 2>(2, 0).copy_from(&q_xe.transpose());
    qz.fixed_view_mut::<2, 2>(2, 2).copy_from(&q_ee);

    let mut s = qz;
    for _ in 0..FP_MAX_ITER {
        let next = f * s * f.transpose() + qz;
        let res = (next - s).norm() / (1.0 + s.norm());
        s = next;
        if res < FP_TOL {
            return Ok(s);
        }
        if !s.iter().all(|x| x.is_finite()) || s.norm() > 1e14 {
            break;
        }
    }
    Err(ModelError::LyapunovDiverged {
        residual: s.norm(),
    })
}

pub fn solve_lqg_lateral(p: &LateralParams) -> Result<LateralOutcome, ModelError> {
    let d = design(p)?;
    let sz = stationary_covariance(&d)?;
    let sx = sz.fixed_view::<2, 2>(0, 0).into_owned();
    let sxe = sz.fixed_view::<2, 2>(0, 2).into_owned();
    let se = sz.fixed_view::<2, 2>(2, 2).into_owned();
    // x̂ = x - e
    let sxhat = sx - sxe - sxe.transpose() + se;
    let j_track = (p.q0 * sx).trace();
    let j_eff = p.r0 * (d.k_gain.transpose() * sxhat * d.k_gain)[(0, 0)];
    if !j_track.is_finite() || !j_eff.is_finite() {
        return Err(ModelError::LyapunovDiverged { residual: f64::NAN });
    }
    Ok(LateralOutcome { j_track, j_eff })
}

/// Rows that failed to solve, kept for reporting.
#[derive(Debug, Default)]
pub struct LateralReport {
    pub dropped: Vec<(String, ModelError)>,
}

#[derive(Clone, Copy, Debug)]
pub struct LateralGridPoint {
    pub alpha: f64,
    /// Joint scale on the base observation-noise std-devs; smaller is a
    /// finer (more demanding) observation requirement.
    pub precision_scale: f64,
    pub obs_frequency: f64,
    pub ctrl_frequency: f64,
}

/// Resource-side poset of the lateral block: observation precision scale
/// (opposite-ordered), observation frequency, control frequency, actuation
/// authority, tracking cost, control effort (as discomfort).
pub fn lateral_res_poset() -> Poset {
    Poset::Product(vec![
        Poset::opposite(Poset::numeric("prec")),
        Poset::numeric("Hz"),
        Poset::numeric("Hz"),
        Poset::numeric("Nm"),
        Poset::numeric("track"),
        Poset::numeric("dis"),
    ])
}

pub fn lateral_fun_poset() -> Poset {
    Poset::numeric("noise")
}

/// Table-backed lateral-control block.
///
/// Functionality: tolerated system-noise level (scalar intensity scale;
/// handling more noise is providing more). Resources: observation precision
/// (opposite-ordered std-dev — finer is more demanding), observation and
/// control frequency, actuation authority, tracking cost and control
/// effort.
pub fn lateral_control_dpi(
    grid: &[LateralGridPoint],
    noise_levels: &[f64],
    base: &LateralParams,
) -> Result<(Dpi, LateralReport), ModelError> {
    if grid.is_empty() || noise_levels.is_empty() {
        return Err(ModelError::BadParam("empty lateral grid".to_string()));
    }
    let mut table = MonotoneTable::new(lateral_fun_poset(), lateral_res_poset());
    let mut report = LateralReport::default();
    for g in grid {
        for &w in noise_levels {
            let p = LateralParams {
                noise: [base.noise[0] * w, base.noise[1] * w],
                alpha: g.alpha,
                obs_precision: [
                    base.obs_precision[0] * g.precision_scale,
                    base.obs_precision[1] * g.precision_scale,
                ],
                obs_frequency: g.obs_frequency,
                ctrl_frequency: g.ctrl_frequency,
                ..base.clone()
            };
            let tag = format!(
                "lat(a={},p={},of={},cf={},w={})",
                g.alpha, g.precision_scale, g.obs_frequency, g.ctrl_frequency, w
            );
            match solve_lqg_lateral(&p) {
                Ok(out) => {
                    let d = design(&p)?;
                    // actuation requirement: 3-sigma stationary torque
                    let sz = stationary_covariance(&d)?;
                    let sx = sz.fixed_view::<2, 2>(0, 0).into_owned();
                    let sxe = sz.fixed_view::<2, 2>(0, 2).into_owned();
                    let se = sz.fixed_view::<2, 2>(2, 2).into_owned();
                    let sxhat = sx - sxe - sxe.transpose() + se;
                    let tau_var = (d.k_gain.transpose() * sxhat * d.k_gain)[(0, 0)];
                    let actuation = 3.0 * tau_var.max(0.0).sqrt();
                    table.rows.push((
                        Value::Num(w),
                        Value::Tuple(vec![
                            Value::Num(g.precision_scale),
                            Value::Num(g.obs_frequency),
                            Value::Num(g.ctrl_frequency),
                            Value::Num(actuation),
                            Value::Num(out.j_track),
                            Value::Num(out.j_eff),
                        ]),
                        ImplId::atom(&tag),
                    ));
                }
                Err(e) => report.dropped.push((tag, e)),
            }
        }
    }
    if table.rows.is_empty() {
        return Err(ModelError::BadParam(
            "no lateral grid point was solvable".to_string(),
        ));
    }
    let closed = table
        .monotone_closure()
        .map_err(|e| ModelError::BadParam(format!("closure failed: {e}")))?;
    Ok((closed.to_dpi(), report))
}
