//! Vector-field models on box domains, finite-difference Jacobians, and
//! serial (cascade) composition.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};

pub type FieldFn = Arc<dyn Fn(f64, &Vector) -> Vector + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(f64, &Vector) -> Matrix + Send + Sync>;
pub type InputFieldFn = Arc<dyn Fn(f64, &Vector, &Vector) -> Vector + Send + Sync>;
pub type InputJacobianFn = Arc<dyn Fn(f64, &Vector, &Vector) -> Matrix + Send + Sync>;
pub type MapFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type MapJacobianFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// Relative agreement required between an analytic and a finite-difference
/// Jacobian.
pub const JACOBIAN_CHECK_TOL: f64 = 1e-5;

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidDomain(format!(
                "bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidDomain(format!("axis {} is unbounded", i + 1)));
            }
            if l > u {
                return Err(Error::InvalidDomain(format!(
                    "axis {}: lower {l} exceeds upper {u}",
                    i + 1
                )));
            }
        }
        Ok(BoxDomain { lower, upper })
    }

    /// `[−r, r]ⁿ`.
    pub fn cube(n: usize, r: f64) -> Self {
        BoxDomain::new(vec![-r; n], vec![r; n]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vector {
        Vector::from_iterator(
            self.dim(),
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| 0.5 * (l + u)),
        )
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_inflated(x, 0.0)
    }

    pub fn contains_inflated(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= l - margin && *v <= u + margin)
    }

    /// Smallest box containing `{P x : x in self}`.
    pub fn linear_image(&self, p: &Matrix) -> Result<BoxDomain> {
        if p.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "map has {} columns, domain has dimension {}",
                p.ncols(),
                self.dim()
            )));
        }
        let center = p * self.center();
        let radius = Vector::from_iterator(
            self.dim(),
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| 0.5 * (u - l)),
        );
        let spread = p.abs() * radius;
        BoxDomain::new(
            (0..p.nrows()).map(|i| center[i] - spread[i]).collect(),
            (0..p.nrows()).map(|i| center[i] + spread[i]).collect(),
        )
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &BoxDomain) -> BoxDomain {
        BoxDomain {
            lower: self.lower.iter().chain(&other.lower).copied().collect(),
            upper: self.upper.iter().chain(&other.upper).copied().collect(),
        }
    }
}

/// A closed system `ẋ = f(t, x)` on a box domain.
#[derive(Clone)]
pub struct VectorFieldModel {
    id: String,
    dim: usize,
    time_varying: bool,
    period: Option<f64>,
    domain: BoxDomain,
    rhs: FieldFn,
    jacobian: Option<JacobianFn>,
}

impl fmt::Debug for VectorFieldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldModel")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("time_varying", &self.time_varying)
            .field("period", &self.period)
            .field("domain", &self.domain)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl VectorFieldModel {
    pub fn new(
        id: impl Into<String>,
        domain: BoxDomain,
        rhs: impl Fn(f64, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        VectorFieldModel {
            id: id.into(),
            dim: domain.dim(),
            time_varying: false,
            period: None,
            domain,
            rhs: Arc::new(rhs),
            jacobian: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(f64, &Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// Marks the field as time-varying, optionally with a forcing period.
    pub fn time_varying(mut self, period: Option<f64>) -> Self {
        self.time_varying = true;
        self.period = period;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "domain dimension {} differs from state dimension {}",
                domain.dim(),
                self.dim
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_time_varying(&self) -> bool {
        self.time_varying
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Closed systems take no input.
    pub fn input_arity(&self) -> usize {
        0
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub(crate) fn rhs_fn(&self) -> &FieldFn {
        &self.rhs
    }

    pub fn eval(&self, t: f64, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        let f = (self.rhs)(t, x);
        if f.len() != self.dim {
            return Err(Error::Dimension(format!(
                "field of `{}` returned {} components, expected {}",
                self.id,
                f.len(),
                self.dim
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field of `{}` at t={t}", self.id)));
        }
        Ok(f)
    }

    /// Analytic Jacobian when available, otherwise a central difference with
    /// the default step.
    pub fn jacobian(&self, t: f64, x: &Vector) -> Result<Matrix> {
        self.check_dim(x)?;
        match &self.jacobian {
            Some(jac) => {
                let j = jac(t, x);
                if j.shape() != (self.dim, self.dim) {
                    return Err(Error::Dimension(format!(
                        "Jacobian of `{}` is {}x{}, expected {n}x{n}",
                        self.id,
                        j.nrows(),
                        j.ncols(),
                        n = self.dim
                    )));
                }
                if j.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!("Jacobian of `{}`", self.id)));
                }
                Ok(j)
            }
            None => fd_jacobian_scaled(self, t, x),
        }
    }

    /// Largest relative discrepancy between the analytic and the
    /// finite-difference Jacobian over the given points.
    pub fn jacobian_discrepancy(&self, points: &[(f64, Vector)]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (t, x) in points {
            let analytic = self.jacobian(*t, x)?;
            let numeric = fd_jacobian_scaled(self, *t, x)?;
            let scale = analytic.amax().max(1.0);
            worst = worst.max((analytic - numeric).amax() / scale);
        }
        Ok(worst)
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "state has {} components, model `{}` has dimension {}",
                x.len(),
                self.id,
                self.dim
            )))
        }
    }
}

fn fd_columns(model: &VectorFieldModel, t: f64, x: &Vector, steps: &[f64]) -> Result<Matrix> {
    let n = model.dim();
    let max_step = steps.iter().copied().fold(0.0, f64::max);
    if !model.domain().contains_inflated(x.as_slice(), max_step) {
        return Err(Error::OutsideDomain(format!("{:?}", x.as_slice())));
    }
    let mut jac = Matrix::zeros(n, n);
    let mut probe = x.clone();
    for (j, &h) in steps.iter().enumerate() {
        probe[j] = x[j] + h;
        let plus = model.eval(t, &probe)?;
        probe[j] = x[j] - h;
        let minus = model.eval(t, &probe)?;
        probe[j] = x[j];
        jac.set_column(j, &((plus - minus) / (2.0 * h)));
    }
    Ok(jac)
}

/// Central-difference Jacobian with a uniform step `h`.
pub fn fd_jacobian(model: &VectorFieldModel, t: f64, x: &Vector, h: f64) -> Result<Matrix> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step h must be positive, got {h}"
        )));
    }
    model.check_dim(x)?;
    fd_columns(model, t, x, &vec![h; model.dim()])
}

/// Central-difference Jacobian with per-coordinate steps `1e-5·(1 + |x_j|)`.
pub fn fd_jacobian_scaled(model: &VectorFieldModel, t: f64, x: &Vector) -> Result<Matrix> {
    model.check_dim(x)?;
    let steps: Vec<f64> = x.iter().map(|v| 1e-5 * (1.0 + v.abs())).collect();
    fd_columns(model, t, x, &steps)
}

/// A system driven by an input, `ẋ = f(t, x, u)`.
#[derive(Clone)]
pub struct ControlledModel {
    id: String,
    dim: usize,
    input_arity: usize,
    domain: BoxDomain,
    input_box: Option<BoxDomain>,
    rhs: InputFieldFn,
    jac_x: InputJacobianFn,
    jac_u: InputJacobianFn,
}

impl fmt::Debug for ControlledModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlledModel")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("input_arity", &self.input_arity)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ControlledModel {
    pub fn new(
        id: impl Into<String>,
        domain: BoxDomain,
        input_arity: usize,
        rhs: impl Fn(f64, &Vector, &Vector) -> Vector + Send + Sync + 'static,
        jac_x: impl Fn(f64, &Vector, &Vector) -> Matrix + Send + Sync + 'static,
        jac_u: impl Fn(f64, &Vector, &Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        ControlledModel {
            id: id.into(),
            dim: domain.dim(),
            input_arity,
            domain,
            input_box: None,
            rhs: Arc::new(rhs),
            jac_x: Arc::new(jac_x),
            jac_u: Arc::new(jac_u),
        }
    }

    /// Declares the box of admissible constant inputs.
    pub fn with_input_box(mut self, input_box: BoxDomain) -> Result<Self> {
        if input_box.dim() != self.input_arity {
            return Err(Error::Dimension(format!(
                "input box has dimension {}, input arity is {}",
                input_box.dim(),
                self.input_arity
            )));
        }
        self.input_box = Some(input_box);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_arity(&self) -> usize {
        self.input_arity
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn input_box(&self) -> Option<&BoxDomain> {
        self.input_box.as_ref()
    }

    pub fn eval(&self, t: f64, x: &Vector, u: &Vector) -> Vector {
        (self.rhs)(t, x, u)
    }

    pub fn jacobian_x(&self, t: f64, x: &Vector, u: &Vector) -> Matrix {
        (self.jac_x)(t, x, u)
    }

    pub fn jacobian_u(&self, t: f64, x: &Vector, u: &Vector) -> Matrix {
        (self.jac_u)(t, x, u)
    }

    /// The closed system obtained by freezing the input at `u`.
    pub fn with_constant_input(&self, u: Vector) -> Result<VectorFieldModel> {
        if u.len() != self.input_arity {
            return Err(Error::Dimension(format!(
                "input has {} components, expected {}",
                u.len(),
                self.input_arity
            )));
        }
        let rhs = self.rhs.clone();
        let jac = self.jac_x.clone();
        let u2 = u.clone();
        Ok(VectorFieldModel::new(
            format!("{}[u const]", self.id),
            self.domain.clone(),
            move |t, x| rhs(t, x, &u),
        )
        .with_jacobian(move |t, x| jac(t, x, &u2)))
    }
}

/// Output map `y = h(x¹)` of an upstream system.
#[derive(Clone)]
pub struct OutputMap {
    output_dim: usize,
    map: MapFn,
    jacobian: Option<MapJacobianFn>,
}

impl OutputMap {
    pub fn new(output_dim: usize, map: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        OutputMap {
            output_dim,
            map: Arc::new(map),
            jacobian: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// `y = P x` for a fixed matrix `P`.
    pub fn linear(p: Matrix) -> Self {
        let p2 = p.clone();
        OutputMap::new(p.nrows(), move |x| &p * x).with_jacobian(move |_| p2.clone())
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        (self.map)(x)
    }

    pub fn jacobian(&self, x: &Vector) -> Matrix {
        match &self.jacobian {
            Some(j) => j(x),
            None => {
                let n = x.len();
                let mut jac = Matrix::zeros(self.output_dim, n);
                let mut probe = x.clone();
                for j in 0..n {
                    let h = 1e-5 * (1.0 + x[j].abs());
                    probe[j] = x[j] + h;
                    let plus = self.apply(&probe);
                    probe[j] = x[j] - h;
                    let minus = self.apply(&probe);
                    probe[j] = x[j];
                    jac.set_column(j, &((plus - minus) / (2.0 * h)));
                }
                jac
            }
        }
    }
}

/// `ẋ¹ = f¹(t, x¹)`, `ẋ² = f²(t, x², h(x¹))`.
#[derive(Clone)]
pub struct SerialPair {
    pub upstream: VectorFieldModel,
    pub downstream: ControlledModel,
    pub output: OutputMap,
}

impl fmt::Debug for SerialPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SerialPair")
            .field("upstream", &self.upstream)
            .field("downstream", &self.downstream)
            .field("output_dim", &self.output.output_dim())
            .finish()
    }
}

impl SerialPair {
    pub fn new(
        upstream: VectorFieldModel,
        downstream: ControlledModel,
        output: OutputMap,
    ) -> Result<Self> {
        if output.output_dim() != downstream.input_arity() {
            return Err(Error::Dimension(format!(
                "output dimension {} differs from downstream input arity {}",
                output.output_dim(),
                downstream.input_arity()
            )));
        }
        let probe = output.apply(&upstream.domain().center());
        if probe.len() != output.output_dim() {
            return Err(Error::Dimension(format!(
                "output map returned {} components, declared {}",
                probe.len(),
                output.output_dim()
            )));
        }
        Ok(SerialPair {
            upstream,
            downstream,
            output,
        })
    }
}

/// Closes the cascade into one model on `(x¹, x²)`. The Jacobian is
/// assembled block-wise with a structurally zero upper-right block.
pub fn compose_serial(pair: &SerialPair) -> Result<VectorFieldModel> {
    let n1 = pair.upstream.dim();
    let n2 = pair.downstream.dim();
    if pair.output.output_dim() != pair.downstream.input_arity() {
        return Err(Error::Dimension("output/input arity mismatch".into()));
    }
    let domain = pair.upstream.domain().product(pair.downstream.domain());
    let (up, down, out) = (
        pair.upstream.clone(),
        pair.downstream.clone(),
        pair.output.clone(),
    );
    let rhs = move |t: f64, x: &Vector| {
        let x1 = x.rows(0, n1).into_owned();
        let x2 = x.rows(n1, n2).into_owned();
        let mut f = Vector::zeros(n1 + n2);
        f.rows_mut(0, n1).copy_from(&(up.rhs_fn())(t, &x1));
        f.rows_mut(n1, n2)
            .copy_from(&down.eval(t, &x2, &out.apply(&x1)));
        f
    };
    let (up, down, out) = (
        pair.upstream.clone(),
        pair.downstream.clone(),
        pair.output.clone(),
    );
    let jac = move |t: f64, x: &Vector| {
        let x1 = x.rows(0, n1).into_owned();
        let x2 = x.rows(n1, n2).into_owned();
        let u = out.apply(&x1);
        let mut j = Matrix::zeros(n1 + n2, n1 + n2);
        let j1 = up
            .jacobian(t, &x1)
            .unwrap_or_else(|_| Matrix::from_element(n1, n1, f64::NAN));
        j.view_mut((0, 0), (n1, n1)).copy_from(&j1);
        j.view_mut((n1, 0), (n2, n1))
            .copy_from(&(down.jacobian_u(t, &x2, &u) * out.jacobian(&x1)));
        j.view_mut((n1, n1), (n2, n2))
            .copy_from(&down.jacobian_x(t, &x2, &u));
        j
    };
    let mut model = VectorFieldModel::new(
        format!("{}>>{}", pair.upstream.id(), pair.downstream.id()),
        domain,
        rhs,
    )
    .with_jacobian(jac);
    if pair.upstream.is_time_varying() {
        model = model.time_varying(pair.upstream.period());
    }
    Ok(model)
}
