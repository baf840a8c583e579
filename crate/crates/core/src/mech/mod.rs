//! Nonholonomic mechanical systems over the time line.
//!
//! Multipliers are eliminated by differentiating the constraints once in
//! time; the resulting ODE is advanced with classical RK4 and each step ends
//! with a velocity projection back onto the constraint manifold.

mod benenti;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::jet::{build_basis, eval_constraints, ChetaevFlavor, JetPoint, SystemSpec};
use crate::linalg::solve_full_rank;

pub use benenti::{benenti_ansatz, benenti_section, benenti_system};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_DRIFT_TOL: f64 = 1e-9;

/// Newton iterations allowed in the velocity projection; one normally suffices.
const MAX_PROJECTION_ITERS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct MechState {
    pub t: f64,
    pub q: DVector<f64>,
    pub v: DVector<f64>,
}

impl MechState {
    pub fn new(t: f64, q: &[f64], v: &[f64]) -> Self {
        Self {
            t,
            q: DVector::from_column_slice(q),
            v: DVector::from_column_slice(v),
        }
    }

    pub fn jet_point(&self) -> JetPoint {
        JetPoint::mechanical(self.t, self.q.as_slice(), self.v.as_slice())
            .expect("q and v have equal length")
    }
}

type MassFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type ForceFn = Arc<dyn Fn(f64, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// `M(q) q̈ = F(t, q, q̇) + Bᵀλ` subject to `φ(t, q, q̇) = 0`, with `B` the
/// Chetaev reaction coefficients.
#[derive(Clone)]
pub struct MechSystem {
    pub spec: SystemSpec,
    mass: MassFn,
    force: ForceFn,
    pub params: BTreeMap<String, f64>,
    pub drift_tolerance: f64,
}

impl fmt::Debug for MechSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MechSystem")
            .field("spec", &self.spec)
            .field("params", &self.params)
            .field("drift_tolerance", &self.drift_tolerance)
            .finish_non_exhaustive()
    }
}

impl MechSystem {
    pub fn new(
        spec: SystemSpec,
        mass: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        force: impl Fn(f64, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if spec.n_base() != 1 {
            return Err(Error::dim("mechanical base dimension", 1, spec.n_base()));
        }
        Ok(Self {
            spec,
            mass: Arc::new(mass),
            force: Arc::new(force),
            params,
            drift_tolerance: DEFAULT_DRIFT_TOL,
        })
    }

    pub fn with_drift_tolerance(mut self, tol: f64) -> Self {
        self.drift_tolerance = tol;
        self
    }

    pub fn n_dof(&self) -> usize {
        self.spec.n_fields
    }

    pub fn n_constraints(&self) -> usize {
        self.spec.constraints.count()
    }

    pub fn flavor(&self) -> ChetaevFlavor {
        self.spec.flavor
    }

    pub fn mass(&self, q: &DVector<f64>) -> DMatrix<f64> {
        (self.mass)(q)
    }

    pub fn force(&self, t: f64, q: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        (self.force)(t, q, v)
    }

    /// Constraint values at a state.
    pub fn constraint_residual(&self, s: &MechState) -> Result<DVector<f64>> {
        eval_constraints(&self.spec.constraints, &s.jet_point())
    }

    fn check_state(&self, s: &MechState) -> Result<()> {
        let n = self.n_dof();
        if s.q.len() != n {
            return Err(Error::dim("configuration", n, s.q.len()));
        }
        if s.v.len() != n {
            return Err(Error::dim("velocity", n, s.v.len()));
        }
        Ok(())
    }
}

/// Pieces of the linearised constraint system at one state.
struct ConstraintLinearization {
    /// `∂φ/∂q̇`, `k × n`.
    velocity_gradient: DMatrix<f64>,
    /// `M⁻¹Bᵀ`, `n × k`.
    minv_bt: DMatrix<f64>,
    /// `C M⁻¹ Bᵀ`, `k × k`.
    schur: DMatrix<f64>,
    cholesky: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

fn linearize(sys: &MechSystem, s: &MechState, p: &JetPoint) -> Result<ConstraintLinearization> {
    let sig = &sys.spec.signature;
    let basis = match sys.spec.flavor {
        ChetaevFlavor::Covariant => build_basis(&sys.spec.constraints, p, None)?,
        ChetaevFlavor::Noncovariant => build_basis(&sys.spec.constraints, p, Some(sig))?,
    };
    let blocks = sys.spec.constraints.d_jet1(p)?;
    let k = blocks.len();
    let n = sys.n_dof();
    let b = if k == 0 {
        DMatrix::zeros(0, n)
    } else {
        basis.force_matrix(sig.time_index())?
    };
    let c = DMatrix::from_fn(k, n, |alpha, a| blocks[alpha][(a, 0)]);
    let cholesky = sys.mass(&s.q).cholesky().ok_or_else(|| Error::Parameter {
        name: "mass",
        reason: format!("mass matrix is not positive definite at q = {:?}", s.q.as_slice()),
    })?;
    let minv_bt = cholesky.solve(&b.transpose());
    let schur = &c * &minv_bt;
    Ok(ConstraintLinearization {
        velocity_gradient: c,
        minv_bt,
        schur,
        cholesky,
    })
}

fn singular(s: &MechState, rank: usize, expected: usize) -> Error {
    Error::SingularConstraint {
        t: s.t,
        rank,
        expected,
        q: s.q.as_slice().to_vec(),
        v: s.v.as_slice().to_vec(),
    }
}

/// Multipliers and accelerations at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSolution {
    pub lambda: DVector<f64>,
    pub accel: DVector<f64>,
}

/// Eliminates the multipliers by requiring `dφ/dt = 0`.
///
/// Solves `(C M⁻¹ Bᵀ) λ = −(∂φ/∂q · q̇ + ∂φ/∂t + C M⁻¹ F)` and returns
/// `q̈ = M⁻¹(F + Bᵀλ)`.
pub fn solve_multipliers(sys: &MechSystem, s: &MechState) -> Result<MultiplierSolution> {
    sys.check_state(s)?;
    let p = s.jet_point();
    let lin = linearize(sys, s, &p)?;
    let f = sys.force(s.t, &s.q, &s.v);
    if f.len() != sys.n_dof() {
        return Err(Error::dim("generalized force", sys.n_dof(), f.len()));
    }
    let minv_f = lin.cholesky.solve(&f);
    let k = sys.n_constraints();
    let phi_q = sys.spec.constraints.d_fields(&p);
    let phi_t = sys.spec.constraints.d_base(&p);
    let rhs = -(&phi_q * &s.v + phi_t.column(0) + &lin.velocity_gradient * &minv_f);
    let lambda = solve_full_rank(&lin.schur, &rhs).map_err(|rank| singular(s, rank, k))?;
    let accel = minv_f + &lin.minv_bt * &lambda;
    Ok(MultiplierSolution { lambda, accel })
}

/// Minimal M-norm velocity correction `q̇ ← q̇ + M⁻¹Bᵀδ` driving `φ` to zero.
pub fn project_velocity(sys: &MechSystem, s: &MechState) -> Result<MechState> {
    let mut out = s.clone();
    for _ in 0..MAX_PROJECTION_ITERS {
        let phi = sys.constraint_residual(&out)?;
        let worst = phi.amax();
        if worst == 0.0 || (worst <= sys.drift_tolerance * 1e-3) {
            return Ok(out);
        }
        let p = out.jet_point();
        let lin = linearize(sys, &out, &p)?;
        let delta = solve_full_rank(&lin.schur, &(-phi))
            .map_err(|rank| singular(&out, rank, sys.n_constraints()))?;
        out.v += &lin.minv_bt * delta;
        if worst <= sys.drift_tolerance {
            // one Newton step from inside the tolerance is always enough
            return Ok(out);
        }
    }
    let worst = sys.constraint_residual(&out)?.amax();
    if worst > sys.drift_tolerance {
        log::warn!(
            "velocity projection left |φ| = {worst:e} > {:e} at t = {}",
            sys.drift_tolerance,
            out.t
        );
    }
    Ok(out)
}

/// One RK4 step of `(q̇, v̇) = (v, q̈)` followed by velocity projection.
pub fn step(sys: &MechSystem, s: &MechState, h: f64) -> Result<MechState> {
    if h < 0.0 || !h.is_finite() {
        return Err(Error::Parameter {
            name: "h",
            reason: format!("step must be a non-negative finite number, got {h}"),
        });
    }
    if h == 0.0 {
        return Ok(s.clone());
    }
    let eval = |st: &MechState| -> Result<(DVector<f64>, DVector<f64>)> {
        Ok((st.v.clone(), solve_multipliers(sys, st)?.accel))
    };
    let stage = |dq: &DVector<f64>, dv: &DVector<f64>, c: f64| MechState {
        t: s.t + c * h,
        q: &s.q + dq * (c * h),
        v: &s.v + dv * (c * h),
    };
    let (k1q, k1v) = eval(s)?;
    let (k2q, k2v) = eval(&stage(&k1q, &k1v, 0.5))?;
    let (k3q, k3v) = eval(&stage(&k2q, &k2v, 0.5))?;
    let (k4q, k4v) = eval(&stage(&k3q, &k3v, 1.0))?;
    let next = MechState {
        t: s.t + h,
        q: &s.q + (k1q + &k2q * 2.0 + &k3q * 2.0 + k4q) * (h / 6.0),
        v: &s.v + (k1v + &k2v * 2.0 + &k3v * 2.0 + k4v) * (h / 6.0),
    };
    project_velocity(sys, &next)
}

/// A recorded state with its multipliers and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub state: MechState,
    pub lambda: DVector<f64>,
    pub accel: DVector<f64>,
    /// Constraint values `φ^α` at the state.
    pub phi: DVector<f64>,
}

/// Fixed-step trajectory; `samples[i].state.t = t0 + i·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn max_constraint_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.phi.amax()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Error)]
#[error("simulation aborted with {} recorded samples: {error}", partial.samples.len())]
pub struct SimulationAborted {
    pub partial: Trajectory,
    pub error: Error,
}

/// Number of fixed steps covering `[0, T]`, tolerant to `T/h` rounding.
pub fn step_count(total: f64, h: f64) -> usize {
    let ratio = total / h;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

fn record(sys: &MechSystem, state: MechState) -> Result<TrajectorySample> {
    let sol = solve_multipliers(sys, &state)?;
    let phi = sys.constraint_residual(&state)?;
    Ok(TrajectorySample {
        state,
        lambda: sol.lambda,
        accel: sol.accel,
        phi,
    })
}

/// Integrates `⌈T/h⌉` steps from `s0`.
pub fn simulate(
    sys: &MechSystem,
    s0: &MechState,
    total: f64,
    h: f64,
) -> Result<Trajectory, SimulationAborted> {
    let mut traj = Trajectory {
        h,
        samples: Vec::new(),
    };
    if !(h > 0.0 && h.is_finite()) || !(total >= 0.0 && total.is_finite()) {
        return Err(SimulationAborted {
            partial: traj,
            error: Error::Parameter {
                name: "h",
                reason: format!("need h > 0 and T >= 0, got h = {h}, T = {total}"),
            },
        });
    }
    let n = step_count(total, h);
    traj.samples.reserve(n + 1);
    let first = match record(sys, s0.clone()) {
        Ok(sample) => sample,
        Err(error) => return Err(SimulationAborted { partial: traj, error }),
    };
    traj.samples.push(first);
    for i in 1..=n {
        let prev = &traj.samples[i - 1].state;
        let next = step(sys, prev, h).and_then(|mut st| {
            st.t = s0.t + i as f64 * h;
            record(sys, st)
        });
        match next {
            Ok(sample) => traj.samples.push(sample),
            Err(error) => return Err(SimulationAborted { partial: traj, error }),
        }
    }
    Ok(traj)
}
