use nalgebra::DVector;

use super::{time_derivative, ResidualEntry, ResidualSeries};
use crate::error::Result;
use crate::jet::{build_basis, contract_reaction, prolong, ChetaevFlavor, JetPoint, SymmetrySection};
use crate::mech::{MechState, MechSystem, Trajectory, TrajectorySample};

/// `J = ξ^a ∂L/∂v^a + ξ⁰(L − v^a ∂L/∂v^a)`.
pub fn momentum_mech(section: &SymmetrySection, sys: &MechSystem, s: &MechState) -> Result<f64> {
    let p = s.jet_point();
    let (base, field) = section.vector_at(&p)?;
    let lag = &sys.spec.lagrangian;
    let dl_dv: DVector<f64> = lag.d_jet1(&p).column(0).into_owned();
    let xi0 = base[0];
    Ok(field.dot(&dl_dv) + xi0 * (lag.value(&p) - s.v.dot(&dl_dv)))
}

fn sample_point(sample: &TrajectorySample) -> Result<JetPoint> {
    sample
        .state
        .jet_point()
        .with_accelerations(sample.accel.as_slice())
}

/// The Lie derivative of `L dt` along the prolonged section:
/// `ξ⁰∂L/∂t + ξ^a ∂L/∂q^a + (j¹ξ)^a ∂L/∂v^a`.
pub fn momentum_rhs_mech(
    section: &SymmetrySection,
    sys: &MechSystem,
    sample: &TrajectorySample,
) -> Result<f64> {
    let p = sample_point(sample)?;
    let pv = prolong(section, &p)?;
    let lag = &sys.spec.lagrangian;
    Ok(pv.base_comp.dot(&lag.d_base(&p))
        + pv.field_comp.dot(&lag.d_fields(&p))
        + pv.jet1_comp.column(0).dot(&lag.d_jet1(&p).column(0)))
}

fn contraction_defect(
    section: &SymmetrySection,
    sys: &MechSystem,
    sample: &TrajectorySample,
) -> Result<f64> {
    let p = sample_point(sample)?;
    let basis = match sys.flavor() {
        ChetaevFlavor::Covariant => build_basis(&sys.spec.constraints, &p, None)?,
        ChetaevFlavor::Noncovariant => build_basis(&sys.spec.constraints, &p, Some(&sys.spec.signature))?,
    };
    let pv = prolong(section, &p)?;
    Ok(contract_reaction(&pv, &basis, &p)?.amax())
}

/// `dJ/dt − L_{j¹ξ}(L)` at every sample, with `dJ/dt` from fourth-order
/// differences of [`momentum_mech`].
///
/// A section that fails to annihilate the reaction forces along the
/// trajectory is reported through a warning and `admissible = false`.
pub fn momentum_equation_residual_mech(
    section: &SymmetrySection,
    sys: &MechSystem,
    traj: &Trajectory,
) -> Result<ResidualSeries> {
    let values = traj
        .samples
        .iter()
        .map(|s| momentum_mech(section, sys, &s.state))
        .collect::<Result<Vec<_>>>()?;
    let dj = time_derivative(&values, traj.h)?;
    let mut defect: f64 = 0.0;
    let mut entries = Vec::with_capacity(traj.len());
    for (sample, djdt) in traj.samples.iter().zip(dj) {
        defect = defect.max(contraction_defect(section, sys, sample)?);
        let r = (djdt - momentum_rhs_mech(section, sys, sample)?).abs();
        entries.push(ResidualEntry {
            t: sample.state.t,
            max_abs: r,
            l2: r,
        });
    }
    let tol = sys.spec.constraints.tolerance();
    let admissible = defect <= tol;
    if !admissible {
        log::warn!(
            "section is not admissible along the trajectory (max contraction {defect:e}, tol {tol:e})"
        );
    }
    Ok(ResidualSeries {
        entries,
        admissibility_defect: defect,
        admissible,
    })
}
