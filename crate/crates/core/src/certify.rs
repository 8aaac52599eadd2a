//! Sampled certification of 1- and 2-contraction, on the full state space
//! or restricted to the subspaces of an orthogonal decomposition.
//!
//! Every certificate is a supremum over a finite sample set. It is labelled
//! "sampled, not formal": it records the worst sample but proves nothing
//! between samples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::compound::{add_compound, mult_compound};
use crate::decompose::{validate_pair, PairValidation, SubspacePair};
use crate::error::{Error, Result};
use crate::matrix::{ensure_orthonormal_columns, Matrix};
use crate::measures::{measure, second_compound_measure_detail, Norm};
use crate::model::{BoxDomain, VectorFieldModel};
use crate::sampling::{sample_model, SampleSet, SampleSpec};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const VERIFICATION_LABEL: &str = "sampled, not formal";
pub const DEFAULT_ETA_MIN: f64 = 1e-6;
/// Orthonormality tolerance (Frobenius) for subspace bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    KContraction,
    Subspace2contraction,
    Subspace1contraction,
    Reducibility,
    Nob,
    Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstPoint {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub model: String,
    pub toolkit_version: String,
    pub verification: String,
    pub k: Option<usize>,
    pub norm: Option<Norm>,
    /// Supremum of the checked quantity over the samples.
    pub bound: f64,
    /// `−bound` when the bound is negative, else 0.
    pub margin_eta: f64,
    /// `passed ⇔ bound ≤ threshold`.
    pub threshold: f64,
    pub eta_min: Option<f64>,
    pub passed: bool,
    pub worst_point: WorstPoint,
    /// 1-based index pair attaining the second-compound measure, when the
    /// closed form identifies one.
    pub worst_pair: Option<[usize; 2]>,
    pub samples: usize,
    pub time_window: Option<[f64; 2]>,
    pub domain: BoxDomain,
    #[serde(default)]
    pub residuals: BTreeMap<String, f64>,
}

impl Certificate {
    pub(crate) fn from_sup(
        kind: CertificateKind,
        model: &VectorFieldModel,
        set: &SampleSet,
        sup: Sup,
        threshold: f64,
    ) -> Certificate {
        let p = &set.points[sup.index];
        Certificate {
            kind,
            model: model.id().to_string(),
            toolkit_version: TOOLKIT_VERSION.to_string(),
            verification: VERIFICATION_LABEL.to_string(),
            k: None,
            norm: None,
            bound: sup.value,
            margin_eta: if sup.value < 0.0 { -sup.value } else { 0.0 },
            threshold,
            eta_min: None,
            passed: sup.value <= threshold,
            worst_point: WorstPoint {
                t: p.t,
                x: p.x.iter().copied().collect(),
            },
            worst_pair: sup.pair.map(|(i, j)| [i + 1, j + 1]),
            samples: set.points.len(),
            time_window: set.time_window.map(|(a, b)| [a, b]),
            domain: model.domain().clone(),
            residuals: BTreeMap::new(),
        }
    }

    fn contraction(
        kind: CertificateKind,
        model: &VectorFieldModel,
        set: &SampleSet,
        sup: Sup,
        k: usize,
        norm: Norm,
        eta_min: f64,
    ) -> Certificate {
        let mut c = Certificate::from_sup(kind, model, set, sup, -eta_min);
        c.k = Some(k);
        c.norm = Some(norm);
        c.eta_min = Some(eta_min);
        c
    }

    /// Re-checks the internal consistency of a (possibly deserialized)
    /// certificate.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parse(format!("certificate invalid: {msg}")));
        if !self.bound.is_finite() || !self.threshold.is_finite() {
            return bad("non-finite bound or threshold".into());
        }
        if self.passed != (self.bound <= self.threshold) {
            return bad(format!(
                "passed={} inconsistent with bound {} and threshold {}",
                self.passed, self.bound, self.threshold
            ));
        }
        let expected_margin = if self.bound < 0.0 { -self.bound } else { 0.0 };
        if self.margin_eta != expected_margin {
            return bad("margin_eta does not match bound".into());
        }
        if let Some(eta) = self.eta_min {
            if !(eta > 0.0) || self.threshold != -eta {
                return bad(format!("eta_min {eta} inconsistent with threshold"));
            }
        }
        if self.samples == 0 {
            return bad("no samples".into());
        }
        if !self.domain.contains_inflated(&self.worst_point.x, 1e-9) {
            return bad("worst point outside the declared domain".into());
        }
        if let Some([t0, t1]) = self.time_window {
            if self.worst_point.t < t0 || self.worst_point.t > t1 {
                return bad("worst time outside the declared window".into());
            }
        }
        if self.verification != VERIFICATION_LABEL {
            return bad("missing verification label".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Sup {
    pub value: f64,
    pub index: usize,
    pub pair: Option<(usize, usize)>,
}

/// Maximum of `quantity(J(t, x))` over the samples. Ties keep the earliest
/// sample in enumeration order.
pub(crate) fn sup_over_jacobians<F>(
    model: &VectorFieldModel,
    set: &SampleSet,
    mut quantity: F,
) -> Result<Sup>
where
    F: FnMut(&Matrix) -> Result<(f64, Option<(usize, usize)>)>,
{
    let mut best = Sup {
        value: f64::NEG_INFINITY,
        index: 0,
        pair: None,
    };
    for (i, p) in set.points.iter().enumerate() {
        let j = model.jacobian(p.t, &p.x)?;
        let (v, pair) = quantity(&j)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("checked quantity at sample {i}")));
        }
        if v > best.value {
            best = Sup {
                value: v,
                index: i,
                pair,
            };
        }
    }
    Ok(best)
}

fn check_eta(eta_min: f64) -> Result<()> {
    if eta_min > 0.0 && eta_min.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "eta_min must be positive, got {eta_min}"
        )))
    }
}

fn check_basis(model: &VectorFieldModel, b: &Matrix, min_cols: usize, what: &str) -> Result<()> {
    if b.nrows() != model.dim() {
        return Err(Error::Dimension(format!(
            "{what} has {} rows, model dimension is {}",
            b.nrows(),
            model.dim()
        )));
    }
    if b.ncols() < min_cols {
        return Err(Error::Dimension(format!(
            "{what} has {} columns, at least {min_cols} required",
            b.ncols()
        )));
    }
    ensure_orthonormal_columns(b, ORTHONORMAL_TOL, what)
}

/// `sup μ_p(J^[k])` over the samples, `k ∈ {1, 2}`.
pub fn certify_k_contraction(
    model: &VectorFieldModel,
    k: usize,
    p: Norm,
    spec: &SampleSpec,
    eta_min: f64,
) -> Result<Certificate> {
    check_eta(eta_min)?;
    if !(k == 1 || k == 2) || model.dim() < k {
        return Err(Error::InvalidOrder { n: model.dim(), k });
    }
    let set = sample_model(model, spec)?;
    let sup = sup_over_jacobians(model, &set, |j| {
        if k == 1 {
            Ok((measure(j, p)?, None))
        } else {
            let d = second_compound_measure_detail(j, p)?;
            Ok((d.value, d.worst_pair))
        }
    })?;
    Ok(Certificate::contraction(
        CertificateKind::KContraction,
        model,
        &set,
        sup,
        k,
        p,
        eta_min,
    ))
}

/// `sup μ_p((Vᵀ)^(2) J^[2] V^(2))` over the samples.
pub fn certify_subspace_2contraction(
    model: &VectorFieldModel,
    v: &Matrix,
    p: Norm,
    spec: &SampleSpec,
    eta_min: f64,
) -> Result<Certificate> {
    check_eta(eta_min)?;
    check_basis(model, v, 2, "V")?;
    let vt2 = mult_compound(&v.transpose(), 2)?;
    let v2 = mult_compound(v, 2)?;
    let set = sample_model(model, spec)?;
    let sup = sup_over_jacobians(model, &set, |j| {
        let restricted = &vt2 * add_compound(j, 2)? * &v2;
        Ok((measure(&restricted, p)?, None))
    })?;
    Ok(Certificate::contraction(
        CertificateKind::Subspace2contraction,
        model,
        &set,
        sup,
        2,
        p,
        eta_min,
    ))
}

/// `sup μ_p(Uᵀ J U)` over the samples.
pub fn certify_subspace_1contraction(
    model: &VectorFieldModel,
    u: &Matrix,
    p: Norm,
    spec: &SampleSpec,
    eta_min: f64,
) -> Result<Certificate> {
    check_eta(eta_min)?;
    check_basis(model, u, 1, "U")?;
    let ut = u.transpose();
    let set = sample_model(model, spec)?;
    let sup = sup_over_jacobians(model, &set, |j| Ok((measure(&(&ut * j * u), p)?, None)))?;
    Ok(Certificate::contraction(
        CertificateKind::Subspace1contraction,
        model,
        &set,
        sup,
        1,
        p,
        eta_min,
    ))
}

fn check_gate(reducibility: &Certificate, model: &VectorFieldModel) -> Result<()> {
    // the NOB and convergence conclusions are for autonomous fields only
    if model.is_time_varying() {
        return Err(Error::Precondition(format!(
            "model {} is time-varying; this check needs x' = f(x)",
            model.id()
        )));
    }
    if reducibility.kind != CertificateKind::Reducibility {
        return Err(Error::ReducibilityGate(format!(
            "expected a reducibility certificate, got {:?}",
            reducibility.kind
        )));
    }
    if reducibility.model != model.id() {
        return Err(Error::ReducibilityGate(format!(
            "certificate is for `{}`, not `{}`",
            reducibility.model,
            model.id()
        )));
    }
    if !reducibility.passed {
        return Err(Error::ReducibilityGate(format!(
            "reducibility residual {:.3e} exceeds {:.0e}",
            reducibility.bound, reducibility.threshold
        )));
    }
    Ok(())
}

/// No non-trivial periodic solutions: a one-dimensional invariant `U`
/// together with 2-contraction on the complement `V`.
pub fn certify_nob(
    model: &VectorFieldModel,
    pair: &SubspacePair,
    reducibility: &Certificate,
    p: Norm,
    spec: &SampleSpec,
    eta_min: f64,
) -> Result<Certificate> {
    check_gate(reducibility, model)?;
    if pair.p_dim() != 1 {
        return Err(Error::Precondition(format!(
            "U must be one-dimensional, has dimension {}",
            pair.p_dim()
        )));
    }
    let sub = certify_subspace_2contraction(model, pair.v(), p, spec, eta_min)?;
    let mut cert = Certificate {
        kind: CertificateKind::Nob,
        ..sub
    };
    cert.residuals
        .insert("reducibility_bound".into(), reducibility.bound);
    Ok(cert)
}

/// Every bounded trajectory converges to an equilibrium: 2-contraction on
/// `V` and 1-contraction on `U`, both in the same norm.
pub fn certify_convergence(
    model: &VectorFieldModel,
    pair: &SubspacePair,
    reducibility: &Certificate,
    norm_v: Norm,
    norm_u: Norm,
    spec: &SampleSpec,
    eta_min: f64,
) -> Result<Certificate> {
    if norm_v != norm_u {
        return Err(Error::NormMismatch(format!(
            "both conditions must use one measure, got {norm_v} and {norm_u}"
        )));
    }
    check_gate(reducibility, model)?;
    let on_v = if pair.q_dim() >= 2 {
        Some(certify_subspace_2contraction(
            model,
            pair.v(),
            norm_v,
            spec,
            eta_min,
        )?)
    } else {
        // a one-dimensional V carries no 2-volumes; the restricted
        // condition holds vacuously
        None
    };
    let on_u = certify_subspace_1contraction(model, pair.u(), norm_u, spec, eta_min)?;
    let worst = match &on_v {
        Some(v) if v.bound > on_u.bound => v.clone(),
        _ => on_u.clone(),
    };
    let mut cert = Certificate {
        kind: CertificateKind::Convergence,
        k: None,
        ..worst
    };
    cert.passed = on_v.as_ref().is_none_or(|c| c.passed) && on_u.passed;
    if let Some(v) = &on_v {
        cert.residuals.insert("subspace2_bound".into(), v.bound);
    }
    cert.residuals.insert("subspace1_bound".into(), on_u.bound);
    cert.residuals
        .insert("reducibility_bound".into(), reducibility.bound);
    Ok(cert)
}

/// Outcome of a staged pipeline: pair validation, reducibility, then the
/// contraction conditions. Stages after a failed gate are not run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub pipeline: String,
    pub model: String,
    pub toolkit_version: String,
    pub pair_validation: PairValidation,
    pub reducibility: Option<Certificate>,
    pub stages: Vec<Certificate>,
    pub result: Option<Certificate>,
    pub passed: bool,
    pub message: String,
}

impl PipelineReport {
    fn new(pipeline: &str, model: &VectorFieldModel, validation: PairValidation) -> Self {
        PipelineReport {
            pipeline: pipeline.to_string(),
            model: model.id().to_string(),
            toolkit_version: TOOLKIT_VERSION.to_string(),
            pair_validation: validation,
            reducibility: None,
            stages: Vec::new(),
            result: None,
            passed: false,
            message: String::new(),
        }
    }

    /// Re-validates every embedded certificate and the overall verdict.
    pub fn validate(&self) -> Result<()> {
        for c in self
            .reducibility
            .iter()
            .chain(&self.stages)
            .chain(&self.result)
        {
            c.validate()?;
        }
        let expected = self.pair_validation.passed
            && self.reducibility.as_ref().is_some_and(|c| c.passed)
            && self.result.as_ref().is_some_and(|c| c.passed);
        if expected != self.passed {
            return Err(Error::Parse(
                "pipeline verdict inconsistent with its stages".into(),
            ));
        }
        Ok(())
    }
}

fn gate_stages(
    name: &str,
    model: &VectorFieldModel,
    pair: &SubspacePair,
    spec: &SampleSpec,
) -> Result<(PipelineReport, Option<Certificate>)> {
    let validation = validate_pair(pair);
    let mut report = PipelineReport::new(name, model, validation.clone());
    if !validation.passed {
        report.message = "subspace pair failed validation".into();
        return Ok((report, None));
    }
    let red = crate::decompose::check_reducibility(model, pair, spec)?;
    report.reducibility = Some(red.clone());
    if !red.passed {
        report.message = format!("reducibility residual {:.3e} exceeds tolerance", red.bound);
        return Ok((report, None));
    }
    Ok((report, Some(red)))
}

/// Pair validation → reducibility → restricted 2-contraction.
pub fn nob_pipeline(
    model: &VectorFieldModel,
    pair: &SubspacePair,
    p: Norm,
    spec: &SampleSpec,
    eta_min: f64,
) -> Result<PipelineReport> {
    let (mut report, red) = gate_stages("nob", model, pair, spec)?;
    let Some(red) = red else {
        return Ok(report);
    };
    let nob = certify_nob(model, pair, &red, p, spec, eta_min)?;
    report.stages.push(Certificate {
        kind: CertificateKind::Subspace2contraction,
        ..nob.clone()
    });
    report.passed = nob.passed;
    report.message = if nob.passed {
        "no non-trivial periodic solutions (sampled certificate)".into()
    } else {
        format!(
            "restricted 2-contraction bound {:.6} not below -eta_min",
            nob.bound
        )
    };
    report.result = Some(nob);
    Ok(report)
}

/// Pair validation → reducibility → restricted 2- and 1-contraction.
pub fn convergence_pipeline(
    model: &VectorFieldModel,
    pair: &SubspacePair,
    p: Norm,
    spec: &SampleSpec,
    eta_min: f64,
) -> Result<PipelineReport> {
    let (mut report, red) = gate_stages("convergence", model, pair, spec)?;
    let Some(red) = red else {
        return Ok(report);
    };
    if pair.q_dim() >= 2 {
        report.stages.push(certify_subspace_2contraction(
            model,
            pair.v(),
            p,
            spec,
            eta_min,
        )?);
    }
    report.stages.push(certify_subspace_1contraction(
        model,
        pair.u(),
        p,
        spec,
        eta_min,
    )?);
    let conv = certify_convergence(model, pair, &red, p, p, spec, eta_min)?;
    report.passed = conv.passed;
    report.message = if conv.passed {
        "bounded trajectories converge to equilibria (sampled certificate)".into()
    } else {
        "restricted contraction conditions not met".into()
    };
    report.result = Some(conv);
    Ok(report)
}
