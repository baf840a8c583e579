//! Jet coordinates, problem data and the Chetaev machinery.
//!
//! A point of J¹π (or J²π) over a trivial bundle is stored as base
//! coordinates `x^μ`, field values `y^a`, first derivatives `y^a_μ` and,
//! optionally, symmetric second derivatives `y^a_{μν}`. Every evaluator in
//! this module is a pure function of such a point.

mod chetaev;
pub(crate) use chetaev::build_basis;
pub mod fdcheck;
mod prolong;
mod spec;
pub(crate) use spec::flatten_rows;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use chetaev::{
    chetaev_covariant, chetaev_noncovariant, contact_factor, contract_reaction,
    contract_section, eval_constraints, reaction_basis, ReactionBasis,
};
pub use prolong::{
    prolong, CoefficientJet, Generator, GeneratorJet, ProlongedVector, SymmetrySection,
};
pub use spec::{ChetaevFlavor, ConstraintSpec, LagrangianSpec, SystemSpec};

/// Shared pure evaluator on jet points.
pub type Evaluator<T> = Arc<dyn Fn(&JetPoint) -> T + Send + Sync>;

/// Default tolerance for "the point lies on the constraint manifold".
pub const DEFAULT_ADMISSIBILITY_TOL: f64 = 1e-9;

/// Dimension and ordering of the base space.
///
/// The volume element is the wedge of the base differentials taken in
/// `orientation` order; for the rod this is `ds ∧ dt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSignature {
    n_base: usize,
    time_index: usize,
    orientation: Vec<usize>,
}

impl BaseSignature {
    pub fn new(n_base: usize, time_index: usize, orientation: Vec<usize>) -> Result<Self> {
        if !(1..=2).contains(&n_base) {
            return Err(Error::Parameter {
                name: "n_base",
                reason: format!("must be 1 or 2, got {n_base}"),
            });
        }
        if time_index >= n_base {
            return Err(Error::Parameter {
                name: "time_index",
                reason: format!("{time_index} out of range for {n_base} base coordinates"),
            });
        }
        let mut sorted = orientation.clone();
        sorted.sort_unstable();
        if sorted != (0..n_base).collect::<Vec<_>>() {
            return Err(Error::Parameter {
                name: "orientation",
                reason: format!("{orientation:?} is not a permutation of 0..{n_base}"),
            });
        }
        Ok(Self {
            n_base,
            time_index,
            orientation,
        })
    }

    /// Mechanics: the base is the time line.
    pub fn mechanics() -> Self {
        Self {
            n_base: 1,
            time_index: 0,
            orientation: vec![0],
        }
    }

    /// Base coordinates `(s, t)` with volume element `ds ∧ dt`.
    pub fn space_time() -> Self {
        Self {
            n_base: 2,
            time_index: 1,
            orientation: vec![0, 1],
        }
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn orientation(&self) -> &[usize] {
        &self.orientation
    }

    /// Sign of the orientation permutation relative to coordinate order.
    pub fn orientation_sign(&self) -> f64 {
        let mut sign = 1.0;
        let o = &self.orientation;
        for i in 0..o.len() {
            for j in i + 1..o.len() {
                if o[i] > o[j] {
                    sign = -sign;
                }
            }
        }
        sign
    }
}

/// Coordinates of a point of J¹π, optionally extended to J²π.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub base: DVector<f64>,
    pub fields: DVector<f64>,
    /// `jet1[(a, μ)] = y^a_μ`.
    pub jet1: DMatrix<f64>,
    /// `jet2[a][(μ, ν)] = y^a_{μν}`, symmetric in `(μ, ν)`.
    jet2: Option<Vec<DMatrix<f64>>>,
}

impl JetPoint {
    pub fn new(base: DVector<f64>, fields: DVector<f64>, jet1: DMatrix<f64>) -> Result<Self> {
        if jet1.nrows() != fields.len() {
            return Err(Error::dim("jet1 rows", fields.len(), jet1.nrows()));
        }
        if jet1.ncols() != base.len() {
            return Err(Error::dim("jet1 columns", base.len(), jet1.ncols()));
        }
        Ok(Self {
            base,
            fields,
            jet1,
            jet2: None,
        })
    }

    /// Mechanical state `(t, q, q̇)` as a point of J¹π over the time line.
    pub fn mechanical(t: f64, q: &[f64], v: &[f64]) -> Result<Self> {
        if q.len() != v.len() {
            return Err(Error::dim("velocity", q.len(), v.len()));
        }
        Self::new(
            DVector::from_element(1, t),
            DVector::from_column_slice(q),
            DMatrix::from_column_slice(v.len(), 1, v),
        )
    }

    /// Attaches second derivatives; rejects non-symmetric input.
    pub fn with_jet2(mut self, jet2: Vec<DMatrix<f64>>) -> Result<Self> {
        let (n_fields, n_base) = (self.n_fields(), self.n_base());
        if jet2.len() != n_fields {
            return Err(Error::dim("jet2 fields", n_fields, jet2.len()));
        }
        for m in &jet2 {
            if m.shape() != (n_base, n_base) {
                return Err(Error::dim("jet2 block", n_base, m.nrows()));
            }
            for mu in 0..n_base {
                for nu in mu + 1..n_base {
                    let (a, b) = (m[(mu, nu)], m[(nu, mu)]);
                    if (a - b).abs() > 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                        return Err(Error::Structural(format!(
                            "jet2 not symmetric: {a} != {b} at ({mu}, {nu})"
                        )));
                    }
                }
            }
        }
        self.jet2 = Some(jet2);
        Ok(self)
    }

    /// Mechanics shorthand: second derivatives are the accelerations.
    pub fn with_accelerations(self, accel: &[f64]) -> Result<Self> {
        let blocks = accel
            .iter()
            .map(|&a| DMatrix::from_element(1, 1, a))
            .collect();
        self.with_jet2(blocks)
    }

    pub fn n_base(&self) -> usize {
        self.base.len()
    }

    pub fn n_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn jet2(&self) -> Option<&[DMatrix<f64>]> {
        self.jet2.as_deref()
    }

    /// Column of first derivatives along base direction `mu`.
    pub fn jet1_column(&self, mu: usize) -> DVector<f64> {
        self.jet1.column(mu).into_owned()
    }

    pub(crate) fn check_shape(&self, n_fields: usize, n_base: usize) -> Result<()> {
        if self.n_fields() != n_fields {
            return Err(Error::dim("field count", n_fields, self.n_fields()));
        }
        if self.n_base() != n_base {
            return Err(Error::dim("base dimension", n_base, self.n_base()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_invariants() {
        assert!(BaseSignature::new(3, 0, vec![0, 1, 2]).is_err());
        assert!(BaseSignature::new(2, 2, vec![0, 1]).is_err());
        assert!(BaseSignature::new(2, 1, vec![0, 0]).is_err());
        let sig = BaseSignature::new(2, 0, vec![1, 0]).unwrap();
        assert_eq!(sig.orientation_sign(), -1.0);
        assert_eq!(BaseSignature::space_time().orientation_sign(), 1.0);
        assert_eq!(BaseSignature::mechanics().time_index(), 0);
    }

    #[test]
    fn jet2_must_be_symmetric() {
        let p = JetPoint::new(
            DVector::zeros(2),
            DVector::zeros(1),
            DMatrix::zeros(1, 2),
        )
        .unwrap();
        let bad = vec![DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 3.0])];
        assert!(matches!(p.clone().with_jet2(bad), Err(Error::Structural(_))));
        let good = vec![DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0])];
        assert!(p.with_jet2(good).is_ok());
    }

    #[test]
    fn shape_checks() {
        assert!(JetPoint::mechanical(0.0, &[1.0, 2.0], &[1.0]).is_err());
        let p = JetPoint::mechanical(0.5, &[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(p.jet1_column(0).as_slice(), &[3.0, 4.0]);
        assert!(p.clone().with_accelerations(&[1.0]).is_err());
        assert!(p.check_shape(2, 1).is_ok());
        assert!(p.check_shape(3, 1).is_err());
    }
}
