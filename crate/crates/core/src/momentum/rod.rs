use nalgebra::DVector;

use super::{time_derivative, MomentumSample, ResidualEntry, ResidualSeries};
use crate::error::{Error, Result};
use crate::rod::{
    accel_from_kinematics, energy_density_from, spatial_derivs, FieldHistory, RodGrid,
    RodKinematics, RodParams, RodState,
};

/// Nodal components of a pulled-back momentum form `J = P ds + Q dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RodMomentum {
    pub t: f64,
    pub p: DVector<f64>,
    pub q: DVector<f64>,
}

impl RodMomentum {
    pub fn samples(&self) -> Vec<MomentumSample> {
        self.p
            .iter()
            .zip(self.q.iter())
            .enumerate()
            .map(|(node, (&p, &q))| MomentumSample {
                t: self.t,
                node,
                p,
                q,
            })
            .collect()
    }
}

/// Which balance law to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RodLaw {
    /// Time translation; local energy conservation.
    Energy,
    /// The generalized section `(−Ry′, Rx′, 1)`.
    Translation,
}

impl std::fmt::Display for RodLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RodLaw::Energy => "energy",
            RodLaw::Translation => "translation",
        })
    }
}

fn energy_current(params: &RodParams, kin: &RodKinematics, t: f64) -> RodMomentum {
    let k = params.k;
    let q = DVector::from_fn(kin.n_nodes(), |j, _| {
        -k * kin.x_sss[j] * kin.x_t[j] - k * kin.y_sss[j] * kin.y_t[j]
            + params.beta * kin.theta_s[j] * kin.theta_t[j]
            + k * (kin.x_ss[j] * kin.x_st[j] + kin.y_ss[j] * kin.y_st[j])
    });
    RodMomentum {
        t,
        p: energy_density_from(params, kin),
        q,
    }
}

fn translation_momentum(params: &RodParams, kin: &RodKinematics, t: f64) -> RodMomentum {
    let RodParams {
        rho,
        alpha,
        beta,
        k,
        r,
        ..
    } = *params;
    let n = kin.n_nodes();
    let p = DVector::from_fn(n, |j, _| {
        -(rho * (r * kin.x_s[j] * kin.y_t[j] - r * kin.y_s[j] * kin.x_t[j]) + alpha * kin.theta_t[j])
    });
    let q = DVector::from_fn(n, |j, _| {
        -(k * r * (kin.y_s[j] * kin.x_sss[j] - kin.x_s[j] * kin.y_sss[j]) + beta * kin.theta_s[j])
    });
    RodMomentum { t, p, q }
}

fn translation_rhs(params: &RodParams, kin: &RodKinematics) -> DVector<f64> {
    let RodParams { rho, k, r, .. } = *params;
    DVector::from_fn(kin.n_nodes(), |j, _| {
        -r * rho * kin.y_st[j] * kin.x_t[j] + r * rho * kin.x_st[j] * kin.y_t[j]
            - k * r * kin.x_sss[j] * kin.y_ss[j]
            + k * r * kin.y_sss[j] * kin.x_ss[j]
    })
}

/// Energy current: `P = ℰ`, `Q = −Kx‴ẋ − Ky‴ẏ + βθ′θ̇ + K(x″ẋ′ + y″ẏ′)`.
pub fn rod_energy_current(params: &RodParams, s: &RodState, grid: &RodGrid) -> Result<RodMomentum> {
    let kin = RodKinematics::new(params, s, grid)?;
    Ok(energy_current(params, &kin, s.t))
}

/// `P = −[ρ(Rx′ẏ − Ry′ẋ) + αθ̇]`, `Q = −[KR(y′x‴ − x′y‴) + βθ′]`.
pub fn rod_translation_momentum(
    params: &RodParams,
    s: &RodState,
    grid: &RodGrid,
) -> Result<RodMomentum> {
    let kin = RodKinematics::new(params, s, grid)?;
    Ok(translation_momentum(params, &kin, s.t))
}

/// `R(λy′ − μx′) − (αθ̈ − βθ″)` per node with the solver's multipliers,
/// i.e. `Ry′(ρẍ + Kx⁗) − Rx′(ρÿ + Ky⁗) − αθ̈ + βθ″`.
pub fn rod_translation_identity(
    params: &RodParams,
    s: &RodState,
    grid: &RodGrid,
) -> Result<DVector<f64>> {
    let kin = RodKinematics::new(params, s, grid)?;
    let acc = accel_from_kinematics(params, &kin);
    Ok(DVector::from_fn(kin.n_nodes(), |j, _| {
        params.r * (acc.lambda[j] * kin.y_s[j] - acc.mu[j] * kin.x_s[j])
            - (params.alpha * acc.theta_ddot[j] - params.beta * kin.theta_ss[j])
    }))
}

/// Nodal residual `∂_s Q − ∂_t P − RHS` of `d(J) = L_ξ(L) η` with
/// `η = ds∧dt`, reduced to max and L² norms per snapshot.
///
/// `∂_s` uses the centred periodic stencil and `∂_t` fourth-order
/// differences across snapshots, so the residual measures discretisation
/// error only.
pub fn momentum_equation_residual_rod(
    params: &RodParams,
    hist: &FieldHistory,
    grid: &RodGrid,
    which: RodLaw,
) -> Result<ResidualSeries> {
    let m = hist.snapshots.len();
    if m < super::MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: super::MIN_SAMPLES,
            got: m,
        });
    }
    let n = grid.n_nodes();
    let mut ps = Vec::with_capacity(m);
    let mut spatial = Vec::with_capacity(m);
    for snap in &hist.snapshots {
        let kin = RodKinematics::new(params, &snap.state, grid)?;
        let (mom, rhs) = match which {
            RodLaw::Energy => (energy_current(params, &kin, snap.state.t), DVector::zeros(n)),
            RodLaw::Translation => (
                translation_momentum(params, &kin, snap.state.t),
                translation_rhs(params, &kin),
            ),
        };
        spatial.push(spatial_derivs(&mom.q, 1, grid)? - rhs);
        ps.push(mom.p);
    }
    let mut residual = spatial;
    let mut column = vec![0.0; m];
    for j in 0..n {
        for (c, p) in column.iter_mut().zip(&ps) {
            *c = p[j];
        }
        for (r, dp) in residual.iter_mut().zip(time_derivative(&column, hist.interval)?) {
            r[j] -= dp;
        }
    }
    let ds = grid.spacing();
    let entries = hist
        .snapshots
        .iter()
        .zip(&residual)
        .map(|(snap, r)| ResidualEntry {
            t: snap.state.t,
            max_abs: r.amax(),
            l2: (r.norm_squared() * ds).sqrt(),
        })
        .collect();
    Ok(ResidualSeries {
        entries,
        admissibility_defect: 0.0,
        admissible: true,
    })
}
