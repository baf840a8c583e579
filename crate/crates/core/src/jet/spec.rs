use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{BaseSignature, Evaluator, JetPoint, DEFAULT_ADMISSIBILITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{pivoted_rank, RANK_REL_TOL};

/// Which Chetaev rule turns constraint functions into reaction forces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChetaevFlavor {
    /// `A^{αμ}_a = ∂φ^α/∂y^a_μ`, all base directions.
    Covariant,
    /// `A^α_a = ∂φ^α/∂y^a_t`, time direction only.
    Noncovariant,
}

impl fmt::Display for ChetaevFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChetaevFlavor::Covariant => f.write_str("covariant"),
            ChetaevFlavor::Noncovariant => f.write_str("noncovariant"),
        }
    }
}

/// Lagrangian density with closed-form partial derivatives.
///
/// Second-order densities additionally supply `∂L/∂y^a_{μν}`; the entry
/// `(μ, ν)` of block `a` is the derivative with respect to the single
/// symmetric coordinate `y^a_{μν} = y^a_{νμ}`.
#[derive(Clone)]
pub struct LagrangianSpec {
    order: u8,
    value: Evaluator<f64>,
    d_fields: Evaluator<DVector<f64>>,
    d_jet1: Evaluator<DMatrix<f64>>,
    d_base: Option<Evaluator<DVector<f64>>>,
    d_jet2: Option<Evaluator<Vec<DMatrix<f64>>>>,
}

impl LagrangianSpec {
    pub fn first_order(
        value: Evaluator<f64>,
        d_fields: Evaluator<DVector<f64>>,
        d_jet1: Evaluator<DMatrix<f64>>,
    ) -> Self {
        Self {
            order: 1,
            value,
            d_fields,
            d_jet1,
            d_base: None,
            d_jet2: None,
        }
    }

    pub fn second_order(
        value: Evaluator<f64>,
        d_fields: Evaluator<DVector<f64>>,
        d_jet1: Evaluator<DMatrix<f64>>,
        d_jet2: Evaluator<Vec<DMatrix<f64>>>,
    ) -> Self {
        Self {
            order: 2,
            value,
            d_fields,
            d_jet1,
            d_base: None,
            d_jet2: Some(d_jet2),
        }
    }

    /// Explicit dependence on base coordinates (non-autonomous densities).
    pub fn with_d_base(mut self, d_base: Evaluator<DVector<f64>>) -> Self {
        self.d_base = Some(d_base);
        self
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self, p: &JetPoint) -> f64 {
        (self.value)(p)
    }

    pub fn d_fields(&self, p: &JetPoint) -> DVector<f64> {
        (self.d_fields)(p)
    }

    pub fn d_jet1(&self, p: &JetPoint) -> DMatrix<f64> {
        (self.d_jet1)(p)
    }

    /// Zero when the density does not depend on the base explicitly.
    pub fn d_base(&self, p: &JetPoint) -> DVector<f64> {
        match &self.d_base {
            Some(f) => f(p),
            None => DVector::zeros(p.n_base()),
        }
    }

    pub fn d_jet2(&self, p: &JetPoint) -> Option<Vec<DMatrix<f64>>> {
        self.d_jet2.as_ref().map(|f| f(p))
    }
}

impl fmt::Debug for LagrangianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LagrangianSpec")
            .field("order", &self.order)
            .field("explicit_base", &self.d_base.is_some())
            .finish_non_exhaustive()
    }
}

/// `k` constraint functions `φ^α` on J¹π with their partials.
///
/// Absent `d_fields`/`d_base` evaluators mean the constraints do not depend
/// on the field values or the base coordinates.
#[derive(Clone)]
pub struct ConstraintSpec {
    count: usize,
    n_fields: usize,
    n_base: usize,
    tolerance: f64,
    value: Evaluator<DVector<f64>>,
    d_jet1: Option<Evaluator<Vec<DMatrix<f64>>>>,
    d_fields: Option<Evaluator<DMatrix<f64>>>,
    d_base: Option<Evaluator<DMatrix<f64>>>,
}

impl ConstraintSpec {
    pub fn new(
        count: usize,
        n_fields: usize,
        n_base: usize,
        value: Evaluator<DVector<f64>>,
    ) -> Self {
        Self {
            count,
            n_fields,
            n_base,
            tolerance: DEFAULT_ADMISSIBILITY_TOL,
            value,
            d_jet1: None,
            d_fields: None,
            d_base: None,
        }
    }

    /// The unconstrained case, `k = 0`.
    pub fn none(n_fields: usize, n_base: usize) -> Self {
        let mut spec = Self::new(0, n_fields, n_base, Arc::new(|_| DVector::zeros(0)));
        spec.d_jet1 = Some(Arc::new(|_| Vec::new()));
        spec
    }

    pub fn with_d_jet1(mut self, f: Evaluator<Vec<DMatrix<f64>>>) -> Self {
        self.d_jet1 = Some(f);
        self
    }

    pub fn with_d_fields(mut self, f: Evaluator<DMatrix<f64>>) -> Self {
        self.d_fields = Some(f);
        self
    }

    pub fn with_d_base(mut self, f: Evaluator<DMatrix<f64>>) -> Self {
        self.d_base = Some(f);
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    /// Admissibility tolerance for membership in the constraint manifold.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub(crate) fn raw_value(&self, p: &JetPoint) -> DVector<f64> {
        (self.value)(p)
    }

    /// `∂φ^α/∂y^a_μ` as `k` blocks of shape `n_fields × n_base`.
    pub fn d_jet1(&self, p: &JetPoint) -> Result<Vec<DMatrix<f64>>> {
        let f = self
            .d_jet1
            .as_ref()
            .ok_or(Error::Missing("constraint jet gradient evaluator"))?;
        p.check_shape(self.n_fields, self.n_base)?;
        let blocks = f(p);
        if blocks.len() != self.count {
            return Err(Error::dim("constraint jet gradient", self.count, blocks.len()));
        }
        for b in &blocks {
            if b.shape() != (self.n_fields, self.n_base) {
                return Err(Error::dim("constraint jet gradient block", self.n_fields, b.nrows()));
            }
        }
        Ok(blocks)
    }

    /// `∂φ^α/∂y^a`, `k × n_fields`.
    pub fn d_fields(&self, p: &JetPoint) -> DMatrix<f64> {
        match &self.d_fields {
            Some(f) => f(p),
            None => DMatrix::zeros(self.count, self.n_fields),
        }
    }

    /// `∂φ^α/∂x^μ`, `k × n_base`.
    pub fn d_base(&self, p: &JetPoint) -> DMatrix<f64> {
        match &self.d_base {
            Some(f) => f(p),
            None => DMatrix::zeros(self.count, self.n_base),
        }
    }

    /// Rank of the jet gradient, one flattened row per constraint.
    pub fn jet_gradient_rank(&self, p: &JetPoint) -> Result<usize> {
        let blocks = self.d_jet1(p)?;
        Ok(pivoted_rank(&flatten_rows(&blocks), RANK_REL_TOL))
    }

    /// Full-rank condition required at admissible points.
    pub fn is_regular_at(&self, p: &JetPoint) -> Result<bool> {
        Ok(self.jet_gradient_rank(p)? == self.count)
    }
}

impl fmt::Debug for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSpec")
            .field("count", &self.count)
            .field("n_fields", &self.n_fields)
            .field("n_base", &self.n_base)
            .field("tolerance", &self.tolerance)
            .finish_non_exhaustive()
    }
}

/// Flattens `k` blocks into a `k × (n_fields·n_base)` matrix, row-major per block.
pub(crate) fn flatten_rows(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let width = blocks.first().map_or(0, |b| b.len());
    DMatrix::from_fn(blocks.len(), width, |i, j| {
        let b = &blocks[i];
        b[(j / b.ncols(), j % b.ncols())]
    })
}

/// A complete nonholonomic problem: density, constraints and reaction rule.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub signature: BaseSignature,
    pub n_fields: usize,
    pub lagrangian: LagrangianSpec,
    pub constraints: ConstraintSpec,
    pub flavor: ChetaevFlavor,
}

impl SystemSpec {
    pub fn new(
        signature: BaseSignature,
        n_fields: usize,
        lagrangian: LagrangianSpec,
        constraints: ConstraintSpec,
        flavor: ChetaevFlavor,
    ) -> Result<Self> {
        if constraints.n_fields() != n_fields {
            return Err(Error::dim("constraint field count", n_fields, constraints.n_fields()));
        }
        if constraints.n_base() != signature.n_base() {
            return Err(Error::dim(
                "constraint base dimension",
                signature.n_base(),
                constraints.n_base(),
            ));
        }
        Ok(Self {
            signature,
            n_fields,
            lagrangian,
            constraints,
            flavor,
        })
    }

    pub fn n_base(&self) -> usize {
        self.signature.n_base()
    }
}
