use nalgebra::DVector;

use super::{spatial_derivs, spatial_derivs_lifted, RodGrid, RodParams, RodState};
use crate::error::{Error, Result};
use crate::mech::step_count;

/// Every nodal derivative the field equations and momentum maps need.
///
/// Spatial derivatives come from the centered periodic stencils; `x_t, y_t`
/// are reconstructed from the rolling constraints and `x_st, y_st` are their
/// spatial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct RodKinematics {
    pub x_s: DVector<f64>,
    pub y_s: DVector<f64>,
    pub x_ss: DVector<f64>,
    pub y_ss: DVector<f64>,
    pub x_sss: DVector<f64>,
    pub y_sss: DVector<f64>,
    pub x_ssss: DVector<f64>,
    pub y_ssss: DVector<f64>,
    pub theta_s: DVector<f64>,
    pub theta_ss: DVector<f64>,
    pub theta_t: DVector<f64>,
    pub x_t: DVector<f64>,
    pub y_t: DVector<f64>,
    pub x_st: DVector<f64>,
    pub y_st: DVector<f64>,
}

impl RodKinematics {
    pub fn new(params: &RodParams, s: &RodState, grid: &RodGrid) -> Result<Self> {
        s.check(grid)?;
        let off = s.offsets;
        let d = |u: &DVector<f64>, jump: f64, order: usize| spatial_derivs_lifted(u, jump, order, grid);
        let x_s = d(&s.x, off.x, 1)?;
        let y_s = d(&s.y, off.y, 1)?;
        let r = params.r;
        let x_t = -(s.theta_dot.component_mul(&y_s)) * r;
        let y_t = s.theta_dot.component_mul(&x_s) * r;
        let x_st = spatial_derivs(&x_t, 1, grid)?;
        let y_st = spatial_derivs(&y_t, 1, grid)?;
        Ok(Self {
            x_ss: d(&s.x, off.x, 2)?,
            y_ss: d(&s.y, off.y, 2)?,
            x_sss: d(&s.x, off.x, 3)?,
            y_sss: d(&s.y, off.y, 3)?,
            x_ssss: d(&s.x, off.x, 4)?,
            y_ssss: d(&s.y, off.y, 4)?,
            theta_s: d(&s.theta, off.theta, 1)?,
            theta_ss: d(&s.theta, off.theta, 2)?,
            theta_t: s.theta_dot.clone(),
            x_s,
            y_s,
            x_t,
            y_t,
            x_st,
            y_st,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.x_s.len()
    }
}

/// Nodal second time derivatives and the recovered multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct RodAcceleration {
    pub theta_ddot: DVector<f64>,
    pub lambda: DVector<f64>,
    pub mu: DVector<f64>,
    pub x_ddot: DVector<f64>,
    pub y_ddot: DVector<f64>,
}

pub(crate) fn accel_from_kinematics(p: &RodParams, kin: &RodKinematics) -> RodAcceleration {
    let n = kin.n_nodes();
    let rr = p.rho * p.r * p.r;
    let mut out = RodAcceleration {
        theta_ddot: DVector::zeros(n),
        lambda: DVector::zeros(n),
        mu: DVector::zeros(n),
        x_ddot: DVector::zeros(n),
        y_ddot: DVector::zeros(n),
    };
    for j in 0..n {
        let (xs, ys) = (kin.x_s[j], kin.y_s[j]);
        let (xst, yst) = (kin.x_st[j], kin.y_st[j]);
        let w = kin.theta_t[j];
        let bracket = p.alpha + rr * (xs * xs + ys * ys);
        let rhs = p.beta * kin.theta_ss[j] - rr * w * (xst * xs + yst * ys)
            + p.r * p.k * (kin.x_ssss[j] * ys - kin.y_ssss[j] * xs);
        let th = rhs / bracket;
        let xdd = -p.r * (th * ys + w * yst);
        let ydd = p.r * (th * xs + w * xst);
        out.theta_ddot[j] = th;
        out.x_ddot[j] = xdd;
        out.y_ddot[j] = ydd;
        out.lambda[j] = p.rho * xdd + p.k * kin.x_ssss[j];
        out.mu[j] = p.rho * ydd + p.k * kin.y_ssss[j];
    }
    out
}

/// Nodewise elimination of the multipliers from the field equations and the
/// time-differentiated rolling constraints.
pub fn rod_accel(params: &RodParams, s: &RodState, grid: &RodGrid) -> Result<RodAcceleration> {
    let kin = RodKinematics::new(params, s, grid)?;
    Ok(accel_from_kinematics(params, &kin))
}

/// Largest step inside the RK4 stability region for the linearised rod.
///
/// Uses the spectral radius of the bending operator seen by `θ`,
/// `4R/Δs²·sqrt(K g/(α + ρR²g))` with `g = max |(x′, y′)|²`, combined with the
/// torsional wave speed, against the RK4 imaginary-axis limit `2√2`.
pub fn stable_step(params: &RodParams, s: &RodState, grid: &RodGrid) -> Result<f64> {
    let kin = RodKinematics::new(params, s, grid)?;
    let g = kin
        .x_s
        .iter()
        .zip(kin.y_s.iter())
        .map(|(a, b)| a * a + b * b)
        .fold(0.0, f64::max);
    let ds = grid.spacing();
    let rr = params.rho * params.r * params.r;
    let bend = 16.0 * params.r * params.r * params.k * g / (ds.powi(4) * (params.alpha + rr * g));
    let twist = 4.0 * params.beta / (ds * ds * params.alpha);
    Ok(2.0 * std::f64::consts::SQRT_2 / (bend + twist).sqrt())
}

type Rates = (DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>);

fn rates(params: &RodParams, s: &RodState, grid: &RodGrid) -> Result<Rates> {
    let kin = RodKinematics::new(params, s, grid)?;
    let acc = accel_from_kinematics(params, &kin);
    Ok((kin.x_t, kin.y_t, kin.theta_t, acc.theta_ddot))
}

/// One RK4 step of the reduced state `(x, y, θ, θ̇)`.
pub fn rod_step(params: &RodParams, s: &RodState, grid: &RodGrid, h: f64) -> Result<RodState> {
    if h < 0.0 || !h.is_finite() {
        return Err(Error::Parameter {
            name: "h",
            reason: format!("step must be a non-negative finite number, got {h}"),
        });
    }
    s.check(grid)?;
    if h == 0.0 {
        return Ok(s.clone());
    }
    warn_if_unstable(params, s, grid, h)?;
    advance(params, s, grid, h)
}

fn warn_if_unstable(params: &RodParams, s: &RodState, grid: &RodGrid, h: f64) -> Result<()> {
    let bound = stable_step(params, s, grid)?;
    if h > bound {
        log::warn!("rod step h = {h:e} exceeds the RK4 stability estimate {bound:e}");
    }
    Ok(())
}

fn advance(params: &RodParams, s: &RodState, grid: &RodGrid, h: f64) -> Result<RodState> {
    let stage = |k: &Rates, c: f64| RodState {
        t: s.t + c * h,
        x: &s.x + &k.0 * (c * h),
        y: &s.y + &k.1 * (c * h),
        theta: &s.theta + &k.2 * (c * h),
        theta_dot: &s.theta_dot + &k.3 * (c * h),
        offsets: s.offsets,
    };
    let k1 = rates(params, s, grid)?;
    let k2 = rates(params, &stage(&k1, 0.5), grid)?;
    let k3 = rates(params, &stage(&k2, 0.5), grid)?;
    let k4 = rates(params, &stage(&k3, 1.0), grid)?;
    let combine = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, d: &DVector<f64>| {
        (a + b * 2.0 + c * 2.0 + d) * (h / 6.0)
    };
    let next = RodState {
        t: s.t + h,
        x: &s.x + combine(&k1.0, &k2.0, &k3.0, &k4.0),
        y: &s.y + combine(&k1.1, &k2.1, &k3.1, &k4.1),
        theta: &s.theta + combine(&k1.2, &k2.2, &k3.2, &k4.2),
        theta_dot: &s.theta_dot + combine(&k1.3, &k2.3, &k3.3, &k4.3),
        offsets: s.offsets,
    };
    if !next.is_finite() {
        return Err(Error::BlowUp { step: 0, t: next.t });
    }
    Ok(next)
}

/// Nodal energy density `ρ/2(ẋ²+ẏ²) + α/2 θ̇² + K/2(x″²+y″²) + β/2 θ′²`.
pub fn rod_energy_density(
    params: &RodParams,
    s: &RodState,
    grid: &RodGrid,
) -> Result<DVector<f64>> {
    let kin = RodKinematics::new(params, s, grid)?;
    Ok(energy_density_from(params, &kin))
}

pub(crate) fn energy_density_from(p: &RodParams, kin: &RodKinematics) -> DVector<f64> {
    DVector::from_fn(kin.n_nodes(), |j, _| {
        0.5 * p.rho * (kin.x_t[j].powi(2) + kin.y_t[j].powi(2))
            + 0.5 * p.alpha * kin.theta_t[j].powi(2)
            + 0.5 * p.k * (kin.x_ss[j].powi(2) + kin.y_ss[j].powi(2))
            + 0.5 * p.beta * kin.theta_s[j].powi(2)
    })
}

/// Total energy `Σ_j ℰ_j Δs`, summed in node order.
pub fn rod_energy(params: &RodParams, s: &RodState, grid: &RodGrid) -> Result<f64> {
    let density = rod_energy_density(params, s, grid)?;
    Ok(density.iter().sum::<f64>() * grid.spacing())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RodSnapshot {
    pub state: RodState,
    pub accel: RodAcceleration,
    pub energy: f64,
}

impl RodSnapshot {
    pub fn capture(params: &RodParams, state: RodState, grid: &RodGrid) -> Result<Self> {
        let kin = RodKinematics::new(params, &state, grid)?;
        let accel = accel_from_kinematics(params, &kin);
        let energy = energy_density_from(params, &kin).iter().sum::<f64>() * grid.spacing();
        Ok(Self {
            state,
            accel,
            energy,
        })
    }
}

/// Snapshots at a fixed interval, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldHistory {
    pub grid: RodGrid,
    pub params: RodParams,
    pub step: f64,
    /// Time between consecutive snapshots.
    pub interval: f64,
    pub snapshots: Vec<RodSnapshot>,
}

impl FieldHistory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.state.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.energy).collect()
    }

    /// `max_t |E(t) − E(0)| / max(E(0), floor)`.
    pub fn relative_energy_drift(&self, floor: f64) -> f64 {
        let Some(first) = self.snapshots.first() else {
            return 0.0;
        };
        let e0 = first.energy;
        let scale = e0.abs().max(floor);
        self.snapshots
            .iter()
            .map(|s| (s.energy - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Integrates `⌈T/h⌉` steps, recording every `record_every`-th state
/// (and always the initial one).
pub fn rod_simulate(
    params: &RodParams,
    s0: &RodState,
    grid: &RodGrid,
    total: f64,
    h: f64,
    record_every: usize,
) -> Result<FieldHistory> {
    params.validate()?;
    if !(h > 0.0 && h.is_finite()) || !(total >= 0.0 && total.is_finite()) {
        return Err(Error::Parameter {
            name: "h",
            reason: format!("need h > 0 and T >= 0, got h = {h}, T = {total}"),
        });
    }
    let stride = record_every.max(1);
    let n = step_count(total, h);
    let mut history = FieldHistory {
        grid: *grid,
        params: *params,
        step: h,
        interval: h * stride as f64,
        snapshots: Vec::with_capacity(n / stride + 1),
    };
    history
        .snapshots
        .push(RodSnapshot::capture(params, s0.clone(), grid)?);
    warn_if_unstable(params, s0, grid, h)?;
    let mut state = s0.clone();
    for i in 1..=n {
        state = advance(params, &state, grid, h).map_err(|e| match e {
            Error::BlowUp { t, .. } => Error::BlowUp { step: i, t },
            other => other,
        })?;
        state.t = s0.t + i as f64 * h;
        if i % stride == 0 {
            history
                .snapshots
                .push(RodSnapshot::capture(params, state.clone(), grid)?);
        }
    }
    Ok(history)
}

/// Default step: `safety` times the stability estimate, shrunk so that an
/// integer number of steps covers `total` exactly.
pub fn default_step(
    params: &RodParams,
    s: &RodState,
    grid: &RodGrid,
    total: f64,
    safety: f64,
) -> Result<f64> {
    let h = safety * stable_step(params, s, grid)?;
    if total <= 0.0 {
        return Ok(h);
    }
    let n = (total / h).ceil().max(1.0);
    Ok(total / n)
}
