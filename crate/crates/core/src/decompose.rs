//! Orthogonal decompositions `ℝⁿ = span(U) ⊕ span(V)` under which a vector
//! field splits into a serial connection, and the constructors for the
//! common special cases.
//!
//! With `y¹ = Vᵀx` and `y² = Uᵀx` a reducible field becomes
//!
//! ```text
//! ẏ¹ = Vᵀ f(t, V y¹)
//! ẏ² = Uᵀ f(t, U y² + V y¹)
//! ```
//!
//! so the `y¹` block drives the `y²` block through the output `V y¹`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::{Certificate, CertificateKind, Sup};
use crate::error::{Error, Result};
use crate::matrix::{eigenvalues, max_abs, Matrix, MatrixJson, Vector};
use crate::model::{BoxDomain, ControlledModel, OutputMap, SerialPair, VectorFieldModel};
use crate::sampling::{sample_model, SampleSpec};

/// Frobenius tolerance for the four pair identities.
pub const PAIR_TOL: f64 = 1e-10;
/// Max-entry tolerance separating structural zeros in `Vᵀ J U`.
pub const REDUCIBILITY_TOL: f64 = 1e-8;
/// Tolerance on `‖M U‖_max` for the feedback-form reduction.
pub const FEEDBACK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePair {
    u: Matrix,
    v: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspacePairJson {
    pub u: MatrixJson,
    pub v: MatrixJson,
}

impl SubspacePair {
    pub fn new(u: Matrix, v: Matrix) -> Result<Self> {
        let n = u.nrows();
        if v.nrows() != n {
            return Err(Error::Dimension(format!(
                "U has {n} rows but V has {}",
                v.nrows()
            )));
        }
        if u.ncols() == 0 || v.ncols() == 0 || u.ncols() + v.ncols() != n {
            return Err(Error::Dimension(format!(
                "p + q = {} + {} must equal n = {n} with p, q ≥ 1",
                u.ncols(),
                v.ncols()
            )));
        }
        Ok(SubspacePair { u, v })
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn p_dim(&self) -> usize {
        self.u.ncols()
    }

    pub fn q_dim(&self) -> usize {
        self.v.ncols()
    }

    /// `T = [Vᵀ; Uᵀ]`, mapping `x` to `(y¹, y²)`.
    pub fn transform(&self) -> Matrix {
        let (n, q) = (self.n(), self.q_dim());
        let mut t = Matrix::zeros(n, n);
        t.view_mut((0, 0), (q, n)).copy_from(&self.v.transpose());
        t.view_mut((q, 0), (n - q, n))
            .copy_from(&self.u.transpose());
        t
    }

    pub fn to_json(&self) -> SubspacePairJson {
        SubspacePairJson {
            u: MatrixJson::from(&self.u),
            v: MatrixJson::from(&self.v),
        }
    }

    pub fn from_json(j: SubspacePairJson) -> Result<Self> {
        SubspacePair::new(Matrix::try_from(j.u)?, Matrix::try_from(j.v)?)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        SubspacePair::from_json(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairResiduals {
    pub utu: f64,
    pub vtv: f64,
    pub utv: f64,
    pub completeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairValidation {
    pub residuals: PairResiduals,
    pub passed: bool,
}

/// Frobenius residuals of `UᵀU = I`, `VᵀV = I`, `UᵀV = 0`, `UUᵀ + VVᵀ = I`.
pub fn validate_pair(pair: &SubspacePair) -> PairValidation {
    let (u, v) = (&pair.u, &pair.v);
    let n = pair.n();
    let residuals = PairResiduals {
        utu: (u.transpose() * u - Matrix::identity(u.ncols(), u.ncols())).norm(),
        vtv: (v.transpose() * v - Matrix::identity(v.ncols(), v.ncols())).norm(),
        utv: (u.transpose() * v).norm(),
        completeness: (u * u.transpose() + v * v.transpose() - Matrix::identity(n, n)).norm(),
    };
    let passed = [
        residuals.utu,
        residuals.vtv,
        residuals.utv,
        residuals.completeness,
    ]
    .iter()
    .all(|r| *r <= PAIR_TOL);
    PairValidation { residuals, passed }
}

/// Sampled check of `Vᵀ J(t, x) U = 0`. The bound is the largest entry of
/// `|Vᵀ J U|`; the equivalent condition `Vᵀ f(t, x) = Vᵀ f(t, VVᵀx)` is
/// evaluated on the same samples and reported as a residual.
pub fn check_reducibility(
    model: &VectorFieldModel,
    pair: &SubspacePair,
    spec: &SampleSpec,
) -> Result<Certificate> {
    if pair.n() != model.dim() {
        return Err(Error::Dimension(format!(
            "pair lives in dimension {}, model has dimension {}",
            pair.n(),
            model.dim()
        )));
    }
    let validation = validate_pair(pair);
    if !validation.passed {
        return Err(Error::NotOrthonormal(format!(
            "subspace pair failed validation: {:?}",
            validation.residuals
        )));
    }
    let vt = pair.v.transpose();
    let vvt = &pair.v * &vt;
    let set = sample_model(model, spec)?;

    let mut sup = Sup {
        value: f64::NEG_INFINITY,
        index: 0,
        pair: None,
    };
    let mut field_residual = 0.0_f64;
    for (i, p) in set.points.iter().enumerate() {
        let j = model.jacobian(p.t, &p.x)?;
        let r = max_abs(&(&vt * j * &pair.u));
        if r > sup.value {
            sup = Sup {
                value: r,
                index: i,
                pair: None,
            };
        }
        let projected = &vvt * &p.x;
        let lhs = &vt * model.eval(p.t, &p.x)?;
        let rhs = &vt * model.eval(p.t, &projected)?;
        field_residual = field_residual.max((lhs - rhs).amax());
    }
    let mut cert = Certificate::from_sup(
        CertificateKind::Reducibility,
        model,
        &set,
        sup,
        REDUCIBILITY_TOL,
    );
    cert.residuals.insert("jacobian_vtju".into(), sup.value);
    cert.residuals
        .insert("field_projection".into(), field_residual);
    Ok(cert)
}

// Reduced closures cannot return errors; a failed evaluation surfaces as a
// non-finite value, which the reduced model's own checks reject.
fn nan_on_err(r: Result<Vector>, n: usize) -> Vector {
    r.unwrap_or_else(|_| Vector::from_element(n, f64::NAN))
}

fn nan_mat_on_err(r: Result<Matrix>, n: usize) -> Matrix {
    r.unwrap_or_else(|_| Matrix::from_element(n, n, f64::NAN))
}

/// The cascade in `(y¹, y²)` coordinates. Requires a passed reducibility
/// certificate for this model.
pub fn serial_reduce(
    model: &VectorFieldModel,
    pair: &SubspacePair,
    reducibility: &Certificate,
) -> Result<SerialPair> {
    if reducibility.kind != CertificateKind::Reducibility
        || reducibility.model != model.id()
        || !reducibility.passed
    {
        return Err(Error::ReducibilityGate(
            "serial reduction needs a passed reducibility certificate for this model".into(),
        ));
    }
    if pair.n() != model.dim() {
        return Err(Error::Dimension("pair and model dimensions differ".into()));
    }
    let (u, v) = (pair.u.clone(), pair.v.clone());
    let (ut, vt) = (u.transpose(), v.transpose());

    let up_domain = model.domain().linear_image(&vt)?;
    let down_domain = model.domain().linear_image(&ut)?;

    let (m1, v1, vt1) = (model.clone(), v.clone(), vt.clone());
    let (m2, v2, vt2) = (model.clone(), v.clone(), vt.clone());
    let mut upstream = VectorFieldModel::new(
        format!("{}/upstream", model.id()),
        up_domain,
        move |t, y1| &vt1 * nan_on_err(m1.eval(t, &(&v1 * y1)), m1.dim()),
    )
    .with_jacobian(move |t, y1| &vt2 * nan_mat_on_err(m2.jacobian(t, &(&v2 * y1)), m2.dim()) * &v2);
    if model.is_time_varying() {
        upstream = upstream.time_varying(model.period());
    }

    let (m3, u3, ut3) = (model.clone(), u.clone(), ut.clone());
    let (m4, u4, ut4) = (model.clone(), u.clone(), ut.clone());
    let (m5, u5, ut5) = (model.clone(), u.clone(), ut.clone());
    let downstream = ControlledModel::new(
        format!("{}/downstream", model.id()),
        down_domain,
        model.dim(),
        move |t, y2, w| &ut3 * nan_on_err(m3.eval(t, &(&u3 * y2 + w)), m3.dim()),
        move |t, y2, w| &ut4 * nan_mat_on_err(m4.jacobian(t, &(&u4 * y2 + w)), m4.dim()) * &u4,
        move |t, y2, w| &ut5 * nan_mat_on_err(m5.jacobian(t, &(&u5 * y2 + w)), m5.dim()),
    );
    SerialPair::new(upstream, downstream, OutputMap::linear(v))
}

/// Rotates `x` into cascade coordinates `(Vᵀx, Uᵀx)`.
pub fn to_cascade_coordinates(pair: &SubspacePair, x: &Vector) -> Vector {
    pair.transform() * x
}

/// `n×(n−q)` orthonormal basis of the orthogonal complement of the
/// columns of `v`, from a Householder QR of `[V | I]`.
pub fn orthonormal_completion(v: &Matrix) -> Matrix {
    let (n, q) = v.shape();
    let mut aug = Matrix::zeros(n, q + n);
    aug.view_mut((0, 0), (n, q)).copy_from(v);
    aug.view_mut((0, q), (n, n))
        .copy_from(&Matrix::identity(n, n));
    let qr = aug.qr();
    let qfull = qr.q();
    qfull.columns(q, n - q).into_owned()
}

/// `V = c/|c|` for a linear first integral `cᵀx`; `U` completes it.
pub fn pair_from_first_integral(c: &Vector) -> Result<SubspacePair> {
    let norm = c.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidParameter(
            "first-integral direction must be a nonzero finite vector".into(),
        ));
    }
    if c.len() < 2 {
        return Err(Error::Dimension("first-integral pair needs n ≥ 2".into()));
    }
    let v = Matrix::from_column_slice(c.len(), 1, (c / norm).as_slice());
    let u = orthonormal_completion(&v);
    SubspacePair::new(u, v)
}

/// Relative size below which an imaginary part is treated as zero.
const REAL_EIG_TOL: f64 = 1e-10;
/// Relative singular-value threshold for a numerically singular shift.
const NULL_SPACE_TOL: f64 = 1e-8;

/// Right singular vectors for the `dim` smallest singular values of `m`,
/// or an error when they are not numerically null.
fn null_space(m: &Matrix, dim: usize, scale: f64) -> Result<Matrix> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let worst = svd.singular_values[order[dim - 1]];
    if worst > NULL_SPACE_TOL * scale {
        return Err(Error::Eigen(format!(
            "eigenvector extraction is ill-conditioned (singular value {worst:.3e})"
        )));
    }
    let mut basis = Matrix::zeros(n, dim);
    for (c, &i) in order.iter().take(dim).enumerate() {
        basis.set_column(c, &vt.row(i).transpose());
    }
    Ok(basis)
}

/// Invariant subspace `U` of `A` (one real eigenvector, or the real plane of
/// a complex pair) with `V` its orthogonal complement.
///
/// The eigenvalue with the largest real part is used; a real eigenvalue wins
/// a tie against a complex pair.
pub fn lti_invariant_pair(a: &Matrix) -> Result<SubspacePair> {
    crate::matrix::ensure_square(a)?;
    crate::matrix::ensure_finite(a, "LTI matrix")?;
    let n = a.nrows();
    if n < 3 {
        return Err(Error::Dimension(format!("need n ≥ 3, got {n}")));
    }
    let scale = a.norm().max(1.0);
    let ev = eigenvalues(a);
    let is_real = |l: &nalgebra::Complex<f64>| l.im.abs() <= REAL_EIG_TOL * scale;
    let real = ev
        .iter()
        .filter(|l| is_real(l))
        .map(|l| l.re)
        .max_by(|x, y| x.total_cmp(y));
    let complex = ev
        .iter()
        .filter(|l| !is_real(l) && l.im > 0.0)
        .max_by(|x, y| x.re.total_cmp(&y.re));

    let use_real = match (real, complex) {
        (Some(r), Some(c)) => r >= c.re,
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (None, None) => return Err(Error::Eigen("no eigenvalues found".into())),
    };
    let u = if use_real {
        let lambda = real.expect("real eigenvalue");
        let shifted = a - Matrix::identity(n, n) * lambda;
        null_space(&shifted, 1, scale)?
    } else {
        let pair = complex.expect("complex pair");
        let (alpha, beta) = (pair.re, pair.im);
        // span(u¹, u²) is the null space of (A − αI)² + β²I
        let shifted = a - Matrix::identity(n, n) * alpha;
        let quad = &shifted * &shifted + Matrix::identity(n, n) * (beta * beta);
        null_space(&quad, 2, scale * scale)?
    };
    // orthonormalize the basis of U
    let u = u.qr().q();
    let leak = max_abs(&((Matrix::identity(n, n) - &u * u.transpose()) * a * &u));
    if leak > 1e-8 * scale {
        return Err(Error::Eigen(format!(
            "computed subspace is not invariant (leak {leak:.3e})"
        )));
    }
    let v = orthonormal_completion(&u);
    SubspacePair::new(u, v)
}

pub type FeedbackG = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type FeedbackGJac = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;
pub type FeedbackH = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type FeedbackHJac = Arc<dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync>;

/// `ẋ = g(z)`, `ż = h(Mx, z)` with `x ∈ ℝⁿ`, `z ∈ ℝᵐ`, `M ∈ ℝ^{k×n}`.
#[derive(Clone)]
pub struct FeedbackSystem {
    pub id: String,
    pub m_mat: Matrix,
    pub z_dim: usize,
    pub g: FeedbackG,
    pub g_jac: FeedbackGJac,
    pub h: FeedbackH,
    /// `∂h/∂w` where `w = Mx`.
    pub h_jac_w: FeedbackHJac,
    pub h_jac_z: FeedbackHJac,
    pub domain: BoxDomain,
}

impl fmt::Debug for FeedbackSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeedbackSystem")
            .field("id", &self.id)
            .field("m_mat", &self.m_mat)
            .field("z_dim", &self.z_dim)
            .finish()
    }
}

impl FeedbackSystem {
    pub fn x_dim(&self) -> usize {
        self.m_mat.ncols()
    }

    /// The full `(x, z)` system.
    pub fn full_model(&self) -> VectorFieldModel {
        let (n, m) = (self.x_dim(), self.z_dim);
        let s = self.clone();
        let s2 = self.clone();
        VectorFieldModel::new(self.id.clone(), self.domain.clone(), move |_, xz| {
            let x = xz.rows(0, n).into_owned();
            let z = xz.rows(n, m).into_owned();
            let mut f = Vector::zeros(n + m);
            f.rows_mut(0, n).copy_from(&(s.g)(&z));
            f.rows_mut(n, m).copy_from(&(s.h)(&(&s.m_mat * x), &z));
            f
        })
        .with_jacobian(move |_, xz| {
            let s = &s2;
            let x = xz.rows(0, n).into_owned();
            let z = xz.rows(n, m).into_owned();
            let w = &s.m_mat * x;
            let mut j = Matrix::zeros(n + m, n + m);
            j.view_mut((0, n), (n, m)).copy_from(&(s.g_jac)(&z));
            j.view_mut((n, 0), (m, n))
                .copy_from(&((s.h_jac_w)(&w, &z) * &s.m_mat));
            j.view_mut((n, n), (m, m)).copy_from(&(s.h_jac_z)(&w, &z));
            j
        })
    }

    /// The pair lifted to `(x, z)` space: `Ũ = [U; 0]`, `Ṽ = diag(V, I)`.
    pub fn lifted_pair(&self, pair: &SubspacePair) -> Result<SubspacePair> {
        let (n, m) = (self.x_dim(), self.z_dim);
        if pair.n() != n {
            return Err(Error::Dimension(format!(
                "pair dimension {} differs from x dimension {n}",
                pair.n()
            )));
        }
        let (p, q) = (pair.p_dim(), pair.q_dim());
        let mut u = Matrix::zeros(n + m, p);
        u.view_mut((0, 0), (n, p)).copy_from(pair.u());
        let mut v = Matrix::zeros(n + m, q + m);
        v.view_mut((0, 0), (n, q)).copy_from(pair.v());
        v.view_mut((n, q), (m, m))
            .copy_from(&Matrix::identity(m, m));
        SubspacePair::new(u, v)
    }
}

/// Splits a feedback-form system with `MU = 0` into the `(y¹, y²)` block
///
/// ```text
/// ẏ¹ = Vᵀ g(y²)
/// ẏ² = h(M V y¹, y²)
/// ```
///
/// feeding `g(y²)` into `ẏ³ = Uᵀ g(y²)`.
pub fn feedback_form_reduce(sys: &FeedbackSystem, pair: &SubspacePair) -> Result<SerialPair> {
    let (n, m) = (sys.x_dim(), sys.z_dim);
    if pair.n() != n {
        return Err(Error::Dimension(format!(
            "pair dimension {} differs from x dimension {n}",
            pair.n()
        )));
    }
    let mu = max_abs(&(&sys.m_mat * pair.u()));
    if mu > FEEDBACK_TOL {
        return Err(Error::Precondition(format!("MU ≠ 0 (max entry {mu:.3e})")));
    }
    let (p, q) = (pair.p_dim(), pair.q_dim());
    let v = pair.v().clone();
    let vt = v.transpose();
    let ut = pair.u().transpose();
    let mv = &sys.m_mat * &v;

    let lifted = sys.lifted_pair(pair)?;
    let up_domain = sys.domain.linear_image(&lifted.v().transpose())?;
    let down_domain = sys.domain.linear_image(&lifted.u().transpose())?;

    let (s1, vt1, mv1) = (sys.clone(), vt.clone(), mv.clone());
    let (s2, vt2, mv2) = (sys.clone(), vt.clone(), mv.clone());
    let upstream = VectorFieldModel::new(format!("{}/upstream", sys.id), up_domain, move |_, y| {
        let y1 = y.rows(0, q).into_owned();
        let y2 = y.rows(q, m).into_owned();
        let mut f = Vector::zeros(q + m);
        f.rows_mut(0, q).copy_from(&(&vt1 * (s1.g)(&y2)));
        f.rows_mut(q, m).copy_from(&(s1.h)(&(&mv1 * y1), &y2));
        f
    })
    .with_jacobian(move |_, y| {
        let y1 = y.rows(0, q).into_owned();
        let y2 = y.rows(q, m).into_owned();
        let w = &mv2 * y1;
        let mut j = Matrix::zeros(q + m, q + m);
        j.view_mut((0, q), (q, m))
            .copy_from(&(&vt2 * (s2.g_jac)(&y2)));
        j.view_mut((q, 0), (m, q))
            .copy_from(&((s2.h_jac_w)(&w, &y2) * &mv2));
        j.view_mut((q, q), (m, m)).copy_from(&(s2.h_jac_z)(&w, &y2));
        j
    });

    let (ut1, ut2) = (ut.clone(), ut.clone());
    let downstream = ControlledModel::new(
        format!("{}/downstream", sys.id),
        down_domain,
        n,
        move |_, _, g| &ut1 * g,
        move |_, _, _| Matrix::zeros(p, p),
        move |_, _, _| ut2.clone(),
    );

    let (s3, s4) = (sys.clone(), sys.clone());
    let output =
        OutputMap::new(n, move |y| (s3.g)(&y.rows(q, m).into_owned())).with_jacobian(move |y| {
            let mut j = Matrix::zeros(n, q + m);
            j.view_mut((0, q), (n, m))
                .copy_from(&(s4.g_jac)(&y.rows(q, m).into_owned()));
            j
        });
    SerialPair::new(upstream, downstream, output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, cols: &[usize]) -> Matrix {
        let i = Matrix::identity(n, n);
        Matrix::from_columns(
            &cols
                .iter()
                .map(|&c| i.column(c).into_owned())
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn coordinate_pair_validates() {
        let pair = SubspacePair::new(e(4, &[2, 3]), e(4, &[0, 1])).unwrap();
        let v = validate_pair(&pair);
        assert!(v.passed);
        assert_eq!(v.residuals.utu, 0.0);
        assert_eq!(v.residuals.completeness, 0.0);
    }

    #[test]
    fn overlapping_pair_fails() {
        let u = e(2, &[0]);
        let pair = SubspacePair::new(u.clone(), u).unwrap();
        let v = validate_pair(&pair);
        assert!(!v.passed);
        assert!(v.residuals.utv > 0.5);
    }

    #[test]
    fn dimension_bookkeeping_is_enforced() {
        assert!(SubspacePair::new(e(3, &[0]), e(3, &[1])).is_err());
        assert!(SubspacePair::new(e(3, &[0]), Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn first_integral_of_ones() {
        let pair = pair_from_first_integral(&Vector::from_element(4, 1.0)).unwrap();
        assert!(pair.v().iter().all(|x| (x - 0.5).abs() < 1e-15));
        assert!(validate_pair(&pair).passed);
        assert!(pair_from_first_integral(&Vector::zeros(3)).is_err());
    }

    #[test]
    fn first_integral_of_basis_vector() {
        let pair = pair_from_first_integral(&Vector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(pair.v().column(0).as_slice(), &[1.0, 0.0, 0.0]);
        assert!(pair.u().row(0).iter().all(|x| x.abs() < 1e-15));
        assert!(validate_pair(&pair).passed);
    }

    #[test]
    fn completion_is_deterministic() {
        let c = Vector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let a = pair_from_first_integral(&c).unwrap();
        let b = pair_from_first_integral(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lti_pair_prefers_largest_real_eigenvalue() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, -3.0, -1.0, -1.0]));
        let pair = lti_invariant_pair(&a).unwrap();
        assert_eq!(pair.p_dim(), 1);
        assert!((pair.u()[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(max_abs(&(pair.v().transpose() * &a * pair.u())) < 1e-12);
    }

    #[test]
    fn lti_pair_for_rotation_block_spans_the_plane() {
        let a = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        let pair = lti_invariant_pair(&a).unwrap();
        assert_eq!(pair.p_dim(), 2);
        assert!(pair.u().row(2).amax() < 1e-10);
        assert!(pair.v()[(2, 0)].abs() > 1.0 - 1e-10);
        let leak = (Matrix::identity(3, 3) - pair.u() * pair.u().transpose()) * &a * pair.u();
        assert!(leak.amax() <= 1e-8);
    }

    #[test]
    fn lti_pair_real_eigenvalue_wins_ties() {
        let a = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let pair = lti_invariant_pair(&a).unwrap();
        assert_eq!(pair.p_dim(), 1);
        assert!(pair.u()[(2, 0)].abs() > 1.0 - 1e-10);
    }

    #[test]
    fn lti_pair_rejects_small_dimension() {
        assert!(lti_invariant_pair(&Matrix::identity(2, 2)).is_err());
    }
}
