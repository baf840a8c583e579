use nalgebra::{DMatrix, DVector};

use super::{BaseSignature, ChetaevFlavor, ConstraintSpec, JetPoint, ProlongedVector, SymmetrySection};
use crate::error::{Error, Result};

/// Coefficient arrays of the reaction-force generators at one jet point.
///
/// Generator `α` is `A^{αμ}_a θ^a ∧ dⁿx_μ` (covariant) or
/// `A^α_a θ^a ∧ dⁿx_t` (noncovariant), with `θ^a = dy^a − y^a_ν dx^ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionBasis {
    /// `k` blocks `n_fields × n_base`, entry `(a, μ)` of block `α` is `A^{αμ}_a`.
    pub covariant: Option<Vec<DMatrix<f64>>>,
    /// `k × n_fields`, entry `(α, a)` is `A^α_a`.
    pub noncovariant: Option<DMatrix<f64>>,
    pub flavor: ChetaevFlavor,
}

impl ReactionBasis {
    pub fn count(&self) -> usize {
        match self.flavor {
            ChetaevFlavor::Covariant => self.covariant.as_ref().map_or(0, Vec::len),
            ChetaevFlavor::Noncovariant => self.noncovariant.as_ref().map_or(0, |m| m.nrows()),
        }
    }

    /// Reaction coefficients acting on the field equations, `k × n_fields`.
    ///
    /// In mechanics both flavors coincide with the velocity gradient of the
    /// constraints; for the covariant flavor the time column is used.
    pub fn force_matrix(&self, time_index: usize) -> Result<DMatrix<f64>> {
        match self.flavor {
            ChetaevFlavor::Noncovariant => self
                .noncovariant
                .clone()
                .ok_or_else(|| Error::Structural("noncovariant basis slot is empty".into())),
            ChetaevFlavor::Covariant => {
                let blocks = self
                    .covariant
                    .as_ref()
                    .ok_or_else(|| Error::Structural("covariant basis slot is empty".into()))?;
                let n_fields = blocks.first().map_or(0, |b| b.nrows());
                Ok(time_slice(blocks, time_index, n_fields))
            }
        }
    }
}

fn time_slice(blocks: &[DMatrix<f64>], time_index: usize, n_fields: usize) -> DMatrix<f64> {
    DMatrix::from_fn(blocks.len(), n_fields, |alpha, a| blocks[alpha][(a, time_index)])
}

/// Evaluates `φ^α(p)`.
pub fn eval_constraints(spec: &ConstraintSpec, p: &JetPoint) -> Result<DVector<f64>> {
    p.check_shape(spec.n_fields(), spec.n_base())?;
    let phi = spec.raw_value(p);
    if phi.len() != spec.count() {
        return Err(Error::dim("constraint values", spec.count(), phi.len()));
    }
    Ok(phi)
}

fn warn_if_off_manifold(spec: &ConstraintSpec, p: &JetPoint) -> Result<()> {
    let phi = eval_constraints(spec, p)?;
    let worst = phi.amax();
    if worst > spec.tolerance() {
        log::warn!(
            "reaction basis requested off the constraint manifold (max |φ| = {worst:e}, tol = {:e})",
            spec.tolerance()
        );
    }
    Ok(())
}

/// Covariant Chetaev rule: `A^{αμ}_a = ∂φ^α/∂y^a_μ`.
pub fn chetaev_covariant(spec: &ConstraintSpec, p: &JetPoint) -> Result<ReactionBasis> {
    let basis = build_basis(spec, p, None)?;
    warn_if_off_manifold(spec, p)?;
    Ok(basis)
}

/// Noncovariant Chetaev rule: `A^α_a = ∂φ^α/∂y^a_t` with `t` the time index.
pub fn chetaev_noncovariant(
    spec: &ConstraintSpec,
    p: &JetPoint,
    sig: &BaseSignature,
) -> Result<ReactionBasis> {
    let basis = build_basis(spec, p, Some(sig))?;
    warn_if_off_manifold(spec, p)?;
    Ok(basis)
}

/// Basis construction without the on-manifold diagnostic, for solver inner
/// loops that visit intermediate stage states.
pub(crate) fn build_basis(
    spec: &ConstraintSpec,
    p: &JetPoint,
    noncovariant: Option<&BaseSignature>,
) -> Result<ReactionBasis> {
    let blocks = spec.d_jet1(p)?;
    match noncovariant {
        None => Ok(ReactionBasis {
            covariant: Some(blocks),
            noncovariant: None,
            flavor: ChetaevFlavor::Covariant,
        }),
        Some(sig) => {
            if sig.n_base() != spec.n_base() {
                return Err(Error::dim("signature base dimension", spec.n_base(), sig.n_base()));
            }
            Ok(ReactionBasis {
                covariant: None,
                noncovariant: Some(time_slice(&blocks, sig.time_index(), spec.n_fields())),
                flavor: ChetaevFlavor::Noncovariant,
            })
        }
    }
}

/// Dispatches on `flavor`.
pub fn reaction_basis(
    spec: &ConstraintSpec,
    p: &JetPoint,
    sig: &BaseSignature,
    flavor: ChetaevFlavor,
) -> Result<ReactionBasis> {
    match flavor {
        ChetaevFlavor::Covariant => chetaev_covariant(spec, p),
        ChetaevFlavor::Noncovariant => chetaev_noncovariant(spec, p, sig),
    }
}

/// Contact factor `ξ^a − y^a_μ ξ^μ`, the only slot a semi-basic reaction form sees.
pub fn contact_factor(
    base_comp: &DVector<f64>,
    field_comp: &DVector<f64>,
    p: &JetPoint,
) -> Result<DVector<f64>> {
    if base_comp.len() != p.n_base() {
        return Err(Error::dim("horizontal component", p.n_base(), base_comp.len()));
    }
    if field_comp.len() != p.n_fields() {
        return Err(Error::dim("vertical component", p.n_fields(), field_comp.len()));
    }
    Ok(field_comp - &p.jet1 * base_comp)
}

fn contract_factor(w: &DVector<f64>, basis: &ReactionBasis) -> Result<DMatrix<f64>> {
    match basis.flavor {
        ChetaevFlavor::Noncovariant => {
            let a = basis
                .noncovariant
                .as_ref()
                .ok_or_else(|| Error::Structural("noncovariant basis slot is empty".into()))?;
            if a.ncols() != w.len() {
                return Err(Error::dim("reaction basis fields", w.len(), a.ncols()));
            }
            let r = a * w;
            Ok(DMatrix::from_column_slice(r.len(), 1, r.as_slice()))
        }
        ChetaevFlavor::Covariant => {
            let blocks = basis
                .covariant
                .as_ref()
                .ok_or_else(|| Error::Structural("covariant basis slot is empty".into()))?;
            let n_base = blocks.first().map_or(1, |b| b.ncols());
            let mut out = DMatrix::zeros(blocks.len(), n_base);
            for (alpha, block) in blocks.iter().enumerate() {
                if block.nrows() != w.len() {
                    return Err(Error::dim("reaction basis fields", w.len(), block.nrows()));
                }
                out.row_mut(alpha).copy_from(&(w.transpose() * block));
            }
            Ok(out)
        }
    }
}

/// Contracts a prolonged vector with every reaction generator.
///
/// Row `α` holds the components of the resulting n-form: one column
/// (`dⁿx_t`) for the noncovariant flavor, one column per `dⁿx_μ` for the
/// covariant flavor. The result vanishes iff the vector annihilates F at `p`.
pub fn contract_reaction(
    v: &ProlongedVector,
    basis: &ReactionBasis,
    p: &JetPoint,
) -> Result<DMatrix<f64>> {
    let at = &v.evaluated_at;
    if at.base != p.base || at.fields != p.fields || at.jet1 != p.jet1 {
        return Err(Error::Structural(
            "prolonged vector and reaction basis evaluated at different points".into(),
        ));
    }
    let w = contact_factor(&v.base_comp, &v.field_comp, p)?;
    contract_factor(&w, basis)
}

/// Same contraction, straight from a section; needs no second jet.
pub fn contract_section(
    section: &SymmetrySection,
    basis: &ReactionBasis,
    p: &JetPoint,
) -> Result<DMatrix<f64>> {
    let (base_comp, field_comp) = section.vector_at(p)?;
    let w = contact_factor(&base_comp, &field_comp, p)?;
    contract_factor(&w, basis)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    /// φ = y¹_t (a coordinate), two fields, mechanics.
    fn coordinate_constraint() -> ConstraintSpec {
        ConstraintSpec::new(1, 2, 1, Arc::new(|p: &JetPoint| DVector::from_element(1, p.jet1[(0, 0)])))
            .with_d_jet1(Arc::new(|_| vec![DMatrix::from_column_slice(2, 1, &[1.0, 0.0])]))
    }

    #[test]
    fn linear_constraint_basis_is_unit_vector() {
        let spec = coordinate_constraint();
        let p = JetPoint::mechanical(0.0, &[1.0, 2.0], &[0.0, 3.0]).unwrap();
        let basis = chetaev_covariant(&spec, &p).unwrap();
        let blocks = basis.covariant.unwrap();
        assert_eq!(blocks[0].as_slice(), &[1.0, 0.0]);
        assert!(basis.noncovariant.is_none());
    }

    #[test]
    fn missing_gradient_is_structural() {
        let spec = ConstraintSpec::new(1, 2, 1, Arc::new(|_: &JetPoint| DVector::zeros(1)));
        let p = JetPoint::mechanical(0.0, &[1.0, 2.0], &[0.0, 3.0]).unwrap();
        assert_eq!(
            chetaev_covariant(&spec, &p),
            Err(Error::Missing("constraint jet gradient evaluator"))
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let spec = coordinate_constraint();
        let p = JetPoint::mechanical(0.0, &[1.0], &[0.0]).unwrap();
        assert!(matches!(eval_constraints(&spec, &p), Err(Error::Dimension { .. })));
    }

    #[test]
    fn empty_slot_is_a_flavor_mismatch() {
        let spec = coordinate_constraint();
        let p = JetPoint::mechanical(0.0, &[1.0, 2.0], &[0.0, 3.0]).unwrap();
        let mut basis = chetaev_covariant(&spec, &p).unwrap();
        basis.flavor = ChetaevFlavor::Noncovariant;
        let section = SymmetrySection::constant(vec![DVector::from_vec(vec![1.0, 0.0])], 2, 1);
        assert!(matches!(
            contract_section(&section, &basis, &p),
            Err(Error::Structural(_))
        ));
    }
}
