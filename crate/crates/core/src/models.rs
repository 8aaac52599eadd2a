//! Built-in example systems with analytic Jacobians.
//!
//! Every model lives on the box `[-10, 10]ⁿ` unless noted otherwise.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::decompose::{orthonormal_completion, FeedbackSystem, SubspacePair};
use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, ensure_square, Matrix, Vector};
use crate::model::{BoxDomain, VectorFieldModel};

pub const DOMAIN_RADIUS: f64 = 10.0;

/// Componentwise nonlinearity used by the consensus protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// `y ↦ −y`
    #[default]
    Linear,
    /// `y ↦ −tanh(y)`
    Tanh,
}

impl Activation {
    pub fn apply(self, y: f64) -> f64 {
        match self {
            Activation::Linear => -y,
            Activation::Tanh => -y.tanh(),
        }
    }

    pub fn derivative(self, y: f64) -> f64 {
        match self {
            Activation::Linear => -1.0,
            Activation::Tanh => {
                let th = y.tanh();
                th * th - 1.0
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::InvalidParameter(format!(
                "unknown activation {other:?} (expected linear or tanh)"
            ))),
        }
    }
}

/// Weighted digraph; an edge `from → to` with weight `w` sets `a[to][from] = w`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedDigraph {
    /// Edges are 0-based `(from, to, weight)`.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(
                "a graph needs at least two nodes".into(),
            ));
        }
        for &(from, to, w) in &edges {
            if from >= n || to >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge {} -> {} outside nodes 1..={n}",
                    from + 1,
                    to + 1
                )));
            }
            if from == to {
                return Err(Error::InvalidParameter(format!(
                    "self-loop at node {}",
                    from + 1
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "edge weight {w} must be finite and non-negative"
                )));
            }
        }
        Ok(WeightedDigraph { n, edges })
    }

    /// `1 → 2 → … → n → 1` with unit weights.
    pub fn directed_cycle(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect())
    }

    /// Headerless or `from,to,weight`-headed CSV with 1-based node labels.
    /// The node count is the largest label seen.
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(s.as_bytes());
        let mut edges = Vec::new();
        let mut n = 0;
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            if line == 0 && rec.get(0).is_some_and(|c| c.eq_ignore_ascii_case("from")) {
                continue;
            }
            if rec.len() != 3 {
                return Err(Error::Parse(format!(
                    "edge line {} has {} fields, expected from,to,weight",
                    line + 1,
                    rec.len()
                )));
            }
            let label = |i: usize| -> Result<usize> {
                let v: usize = rec[i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad node label {:?}", &rec[i])))?;
                if v == 0 {
                    return Err(Error::Parse("node labels are 1-based".into()));
                }
                Ok(v)
            };
            let (from, to) = (label(0)?, label(1)?);
            let w: f64 = rec[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad edge weight {:?}", &rec[2])))?;
            n = n.max(from).max(to);
            edges.push((from - 1, to - 1, w));
        }
        Self::new(n, edges)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    /// `L = D − A` with `D` the weighted in-degree; `L·1 = 0`.
    pub fn laplacian(&self) -> Matrix {
        let mut l = Matrix::zeros(self.n, self.n);
        for &(from, to, w) in &self.edges {
            l[(to, from)] -= w;
            l[(to, to)] += w;
        }
        l
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub constraint: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub equations: &'static str,
    pub params: &'static [ParamSpec],
    /// Non-numeric options (graph, activation, matrix).
    pub options: &'static str,
}

const fn param(name: &'static str, default: f64, constraint: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default,
        constraint,
    }
}

static CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "sin-clock",
        summary: "2-contracting time-varying system with a non-trivial periodic solution",
        equations: "x1' = sin(t), x2' = -x2",
        params: &[],
        options: "",
    },
    CatalogEntry {
        name: "duffing",
        summary: "forced Duffing oscillator; trace of the Jacobian is -delta",
        equations: "x1' = x2, x2' = -beta x1^3 + alpha x1 - delta x2 + gamma cos(omega t)",
        params: &[
            param("alpha", 0.0, ">= 0"),
            param("beta", 0.1, ">= 0"),
            param("gamma", 5.0, ">= 0"),
            param("delta", 0.1, "> 0"),
            param("omega", 1.0, ">= 0"),
        ],
        options: "",
    },
    CatalogEntry {
        name: "laplacian-consensus",
        summary: "consensus protocol over a weighted digraph; span(1) is invariant",
        equations: "x' = f(L x), f = -y or -tanh(y) componentwise",
        params: &[param(
            "n",
            4.0,
            "integer >= 2; size of the default directed cycle",
        )],
        options: "graph: edge-list CSV from,to,weight (1-based); activation: linear | tanh",
    },
    CatalogEntry {
        name: "second-order-consensus",
        summary:
            "double-integrator agents in feedback form; positions and velocities reach consensus",
        equations: "x' = v, v' = f(beta L x + alpha L v)",
        params: &[
            param("alpha", 1.0, "> 0"),
            param("beta", 1.0, "> 0"),
            param("n", 4.0, "integer >= 2; size of the default directed cycle"),
        ],
        options: "graph: edge-list CSV from,to,weight (1-based); activation: linear | tanh",
    },
    CatalogEntry {
        name: "two-agent-3d",
        summary: "two agents coupled through the integral of their difference",
        equations: "x1' = -x1 + s sin(x2), x2' = x3 - x1, x3' = -x3 - s sin(x2)",
        params: &[param("s", 1.0, "finite")],
        options: "",
    },
    CatalogEntry {
        name: "three-agents",
        summary: "three synchronizing agents with pairwise coupling phi(p) = -a p - b tanh(p)",
        equations: "xi' = phi(xi - xj) + phi(xi - xk)",
        params: &[param("a", 1.0, "> 0"), param("b", 0.0, ">= 0")],
        options: "",
    },
    CatalogEntry {
        name: "lti",
        summary: "linear time-invariant system x' = A x",
        equations: "x' = A x",
        params: &[],
        options: "matrix: square A (JSON or CSV), required",
    },
    CatalogEntry {
        name: "lti-example6",
        summary: "x' = A x with A = diag(2,-3,-1,-1) and U = [0; I2], V = [I2; 0]",
        equations: "x' = diag(2,-3,-1,-1) x",
        params: &[],
        options: "",
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    CATALOG
}

pub fn entry(name: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownModel(name.to_string()))
}

/// Non-default inputs to `build`.
#[derive(Debug, Clone, Default)]
pub struct ModelOptions {
    pub params: BTreeMap<String, f64>,
    pub graph: Option<WeightedDigraph>,
    pub activation: Activation,
    pub matrix: Option<Matrix>,
}

impl ModelOptions {
    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_graph(mut self, graph: WeightedDigraph) -> Self {
        self.graph = Some(graph);
        self
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_matrix(mut self, a: Matrix) -> Self {
        self.matrix = Some(a);
        self
    }
}

/// Parses `name=value` assignments separated by commas.
pub fn parse_params(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected name=value, got {part:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("parameter {k} has non-numeric value {v:?}")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

/// A catalog model with whatever structure the catalog knows about it.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: VectorFieldModel,
    /// Resolved parameter values (defaults merged with overrides).
    pub params: BTreeMap<String, f64>,
    pub known_pair: Option<SubspacePair>,
    pub feedback: Option<FeedbackSystem>,
    pub lti_matrix: Option<Matrix>,
}

impl BuiltModel {
    fn plain(model: VectorFieldModel, params: BTreeMap<String, f64>) -> Self {
        BuiltModel {
            model,
            params,
            known_pair: None,
            feedback: None,
            lti_matrix: None,
        }
    }
}

fn resolve(entry: &CatalogEntry, given: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, f64> = entry
        .params
        .iter()
        .map(|p| (p.name.to_string(), p.default))
        .collect();
    for (k, &v) in given {
        if !out.contains_key(k) {
            return Err(Error::InvalidParameter(format!(
                "model {} has no parameter {k:?}",
                entry.name
            )));
        }
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "parameter {k} = {v} is not finite"
            )));
        }
        out.insert(k.clone(), v);
    }
    Ok(out)
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

fn consensus_pair(n: usize) -> Result<SubspacePair> {
    let u = Matrix::from_element(n, 1, 1.0 / (n as f64).sqrt());
    let v = orthonormal_completion(&u);
    SubspacePair::new(u, v)
}

fn graph_laplacian(opts: &ModelOptions, params: &BTreeMap<String, f64>) -> Result<Matrix> {
    match &opts.graph {
        Some(g) => Ok(g.laplacian()),
        None => {
            let n = params["n"];
            require(
                n.fract() == 0.0 && n >= 2.0,
                format!("n = {n} must be an integer >= 2"),
            )?;
            Ok(WeightedDigraph::directed_cycle(n as usize)?.laplacian())
        }
    }
}

pub fn build(name: &str, opts: &ModelOptions) -> Result<BuiltModel> {
    let e = entry(name)?;
    let params = resolve(e, &opts.params)?;
    match name {
        "sin-clock" => Ok(sin_clock(params)),
        "duffing" => duffing(params),
        "laplacian-consensus" => {
            let l = graph_laplacian(opts, &params)?;
            laplacian_consensus(l, opts.activation, params)
        }
        "second-order-consensus" => {
            let l = graph_laplacian(opts, &params)?;
            second_order_consensus(l, opts.activation, params)
        }
        "two-agent-3d" => two_agent_3d(params),
        "three-agents" => three_agents(params),
        "lti" => {
            let a = opts
                .matrix
                .clone()
                .ok_or_else(|| Error::InvalidParameter("model lti needs a matrix".into()))?;
            lti(a, params)
        }
        "lti-example6" => lti_example6(params),
        _ => Err(Error::UnknownModel(name.to_string())),
    }
}

pub fn build_default(name: &str) -> Result<BuiltModel> {
    build(name, &ModelOptions::default())
}

fn sin_clock(params: BTreeMap<String, f64>) -> BuiltModel {
    let model = VectorFieldModel::new("sin-clock", BoxDomain::cube(2, DOMAIN_RADIUS), |t, x| {
        Vector::from_vec(vec![t.sin(), -x[1]])
    })
    .with_jacobian(|_, _| Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0]))
    .time_varying(Some(TAU));
    let u = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let v = Matrix::from_row_slice(2, 1, &[1.0, 0.0]);
    BuiltModel {
        known_pair: Some(SubspacePair::new(u, v).expect("coordinate axes")),
        ..BuiltModel::plain(model, params)
    }
}

fn duffing(params: BTreeMap<String, f64>) -> Result<BuiltModel> {
    let (alpha, beta, gamma, delta, omega) = (
        params["alpha"],
        params["beta"],
        params["gamma"],
        params["delta"],
        params["omega"],
    );
    require(delta > 0.0, format!("delta = {delta} must be positive"))?;
    for (k, v) in [
        ("alpha", alpha),
        ("beta", beta),
        ("gamma", gamma),
        ("omega", omega),
    ] {
        require(v >= 0.0, format!("{k} = {v} must be non-negative"))?;
    }
    let mut model =
        VectorFieldModel::new("duffing", BoxDomain::cube(2, DOMAIN_RADIUS), move |t, x| {
            Vector::from_vec(vec![
                x[1],
                -beta * x[0].powi(3) + alpha * x[0] - delta * x[1] + gamma * (omega * t).cos(),
            ])
        })
        .with_jacobian(move |_, x| {
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, alpha - 3.0 * beta * x[0] * x[0], -delta])
        });
    // constant forcing (gamma = 0 or omega = 0) leaves the field autonomous
    if gamma != 0.0 && omega > 0.0 {
        model = model.time_varying(Some(TAU / omega));
    }
    Ok(BuiltModel::plain(model, params))
}

fn laplacian_consensus(
    l: Matrix,
    act: Activation,
    params: BTreeMap<String, f64>,
) -> Result<BuiltModel> {
    let n = l.nrows();
    let (l1, l2) = (l.clone(), l);
    let model = VectorFieldModel::new(
        "laplacian-consensus",
        BoxDomain::cube(n, DOMAIN_RADIUS),
        move |_, x| (&l1 * x).map(|y| act.apply(y)),
    )
    .with_jacobian(move |_, x| {
        let d = (&l2 * x).map(|y| act.derivative(y));
        Matrix::from_diagonal(&d) * &l2
    });
    Ok(BuiltModel {
        known_pair: Some(consensus_pair(n)?),
        ..BuiltModel::plain(model, params)
    })
}

fn second_order_consensus(
    l: Matrix,
    act: Activation,
    params: BTreeMap<String, f64>,
) -> Result<BuiltModel> {
    let (alpha, beta) = (params["alpha"], params["beta"]);
    require(alpha > 0.0, format!("alpha = {alpha} must be positive"))?;
    require(beta > 0.0, format!("beta = {beta} must be positive"))?;
    let n = l.nrows();
    let al = &l * alpha;
    let (al1, al2, al3) = (al.clone(), al.clone(), al);
    let sys = FeedbackSystem {
        id: "second-order-consensus".into(),
        m_mat: &l * beta,
        z_dim: n,
        g: Arc::new(|z| z.clone()),
        g_jac: Arc::new(move |_| Matrix::identity(n, n)),
        h: Arc::new(move |w, z| (w + &al1 * z).map(|y| act.apply(y))),
        h_jac_w: Arc::new(move |w, z| {
            Matrix::from_diagonal(&(w + &al2 * z).map(|y| act.derivative(y)))
        }),
        h_jac_z: Arc::new(move |w, z| {
            Matrix::from_diagonal(&(w + &al3 * z).map(|y| act.derivative(y))) * &al3
        }),
        domain: BoxDomain::cube(2 * n, DOMAIN_RADIUS),
    };
    let pair = consensus_pair(n)?;
    Ok(BuiltModel {
        model: sys.full_model(),
        params,
        known_pair: Some(sys.lifted_pair(&pair)?),
        feedback: Some(sys),
        lti_matrix: None,
    })
}

/// Pair for the two-agent system: `U ∝ (1,0,1)`.
pub fn two_agent_pair() -> SubspacePair {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let u = Matrix::from_row_slice(3, 1, &[r, 0.0, r]);
    let v = Matrix::from_row_slice(3, 2, &[0.0, r, 1.0, 0.0, 0.0, -r]);
    SubspacePair::new(u, v).expect("orthonormal by construction")
}

fn two_agent_3d(params: BTreeMap<String, f64>) -> Result<BuiltModel> {
    let s = params["s"];
    let model = VectorFieldModel::new(
        "two-agent-3d",
        BoxDomain::cube(3, DOMAIN_RADIUS),
        move |_, x| {
            Vector::from_vec(vec![
                -x[0] + s * x[1].sin(),
                x[2] - x[0],
                -x[2] - s * x[1].sin(),
            ])
        },
    )
    .with_jacobian(move |_, x| {
        let c = s * x[1].cos();
        Matrix::from_row_slice(3, 3, &[-1.0, c, 0.0, -1.0, 0.0, 1.0, 0.0, -c, -1.0])
    });
    Ok(BuiltModel {
        known_pair: Some(two_agent_pair()),
        ..BuiltModel::plain(model, params)
    })
}

/// Pair for the three-agent system: `U ∝ 1₃`.
pub fn three_agent_pair() -> SubspacePair {
    let u = Matrix::from_element(3, 1, 1.0 / 3f64.sqrt());
    let (a, b) = (1.0 / 6f64.sqrt(), 1.0 / 2f64.sqrt());
    let v = Matrix::from_row_slice(3, 2, &[2.0 * a, 0.0, -a, -b, -a, b]);
    SubspacePair::new(u, v).expect("orthonormal by construction")
}

fn three_agents(params: BTreeMap<String, f64>) -> Result<BuiltModel> {
    let (a, b) = (params["a"], params["b"]);
    require(a > 0.0, format!("a = {a} must be positive"))?;
    require(b >= 0.0, format!("b = {b} must be non-negative"))?;
    let phi = move |p: f64| -a * p - b * p.tanh();
    let dphi = move |p: f64| {
        let th = p.tanh();
        -a - b * (1.0 - th * th)
    };
    let model = VectorFieldModel::new(
        "three-agents",
        BoxDomain::cube(3, DOMAIN_RADIUS),
        move |_, x| {
            Vector::from_vec(vec![
                phi(x[0] - x[1]) + phi(x[0] - x[2]),
                phi(x[1] - x[0]) + phi(x[1] - x[2]),
                phi(x[2] - x[1]) + phi(x[2] - x[0]),
            ])
        },
    )
    .with_jacobian(move |_, x| {
        let (d12, d13) = (dphi(x[0] - x[1]), dphi(x[0] - x[2]));
        let (d21, d23) = (dphi(x[1] - x[0]), dphi(x[1] - x[2]));
        let (d32, d31) = (dphi(x[2] - x[1]), dphi(x[2] - x[0]));
        Matrix::from_row_slice(
            3,
            3,
            &[
                d12 + d13,
                -d12,
                -d13,
                -d21,
                d21 + d23,
                -d23,
                -d31,
                -d32,
                d32 + d31,
            ],
        )
    });
    Ok(BuiltModel {
        known_pair: Some(three_agent_pair()),
        ..BuiltModel::plain(model, params)
    })
}

/// `ẋ = A x` on `[-10, 10]ⁿ`.
pub fn lti_model(id: &str, a: Matrix) -> Result<VectorFieldModel> {
    ensure_square(&a)?;
    ensure_finite(&a, "A")?;
    let a2 = a.clone();
    Ok(VectorFieldModel::new(
        id,
        BoxDomain::cube(a.nrows(), DOMAIN_RADIUS),
        move |_, x| &a * x,
    )
    .with_jacobian(move |_, _| a2.clone()))
}

fn lti(a: Matrix, params: BTreeMap<String, f64>) -> Result<BuiltModel> {
    Ok(BuiltModel {
        lti_matrix: Some(a.clone()),
        ..BuiltModel::plain(lti_model("lti", a)?, params)
    })
}

pub fn example6_matrix() -> Matrix {
    Matrix::from_diagonal(&Vector::from_vec(vec![2.0, -3.0, -1.0, -1.0]))
}

/// `U = [0; I₂]`, `V = [I₂; 0]`.
pub fn example6_pair() -> SubspacePair {
    let mut u = Matrix::zeros(4, 2);
    u[(2, 0)] = 1.0;
    u[(3, 1)] = 1.0;
    let mut v = Matrix::zeros(4, 2);
    v[(0, 0)] = 1.0;
    v[(1, 1)] = 1.0;
    SubspacePair::new(u, v).expect("coordinate blocks")
}

fn lti_example6(params: BTreeMap<String, f64>) -> Result<BuiltModel> {
    let a = example6_matrix();
    Ok(BuiltModel {
        known_pair: Some(example6_pair()),
        lti_matrix: Some(a.clone()),
        ..BuiltModel::plain(lti_model("lti-example6", a)?, params)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::validate_pair;
    use approx::assert_abs_diff_eq;

    #[test]
    fn catalog_names_build() {
        for e in catalog() {
            if e.name == "lti" {
                assert!(build_default(e.name).is_err());
                continue;
            }
            let b = build_default(e.name).unwrap();
            assert!(b.model.has_analytic_jacobian(), "{}", e.name);
            if let Some(p) = &b.known_pair {
                assert!(validate_pair(p).passed, "{}", e.name);
                assert_eq!(p.n(), b.model.dim());
            }
        }
        assert!(matches!(
            build_default("lorenz"),
            Err(Error::UnknownModel(_))
        ));
    }

    #[test]
    fn duffing_jacobian_at_unit_point() {
        let m = build_default("duffing").unwrap().model;
        let j = m.jacobian(0.0, &Vector::from_vec(vec![1.0, 0.0])).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -0.3, -0.1]);
        assert_abs_diff_eq!(j, expected, epsilon = 1e-15);
        assert!(m.is_time_varying());
        assert_abs_diff_eq!(m.period().unwrap(), TAU);
    }

    #[test]
    fn duffing_rejects_non_positive_damping() {
        for d in [0.0, -0.1] {
            let r = build("duffing", &ModelOptions::default().with_param("delta", d));
            assert!(matches!(r, Err(Error::InvalidParameter(_))));
        }
        let r = build("duffing", &ModelOptions::default().with_param("beta", -1.0));
        assert!(r.is_err());
        let r = build("duffing", &ModelOptions::default().with_param("zeta", 1.0));
        assert!(r.is_err());
    }

    #[test]
    fn unforced_duffing_is_autonomous() {
        let m = build("duffing", &ModelOptions::default().with_param("gamma", 0.0))
            .unwrap()
            .model;
        assert!(!m.is_time_varying());
    }

    #[test]
    fn three_agent_rows_sum_to_zero() {
        let m = build_default("three-agents").unwrap().model;
        let j = m
            .jacobian(0.0, &Vector::from_vec(vec![0.3, -2.0, 5.0]))
            .unwrap();
        assert!((j * Vector::from_element(3, 1.0)).amax() < 1e-15);
    }

    #[test]
    fn example6_trace() {
        let b = build_default("lti-example6").unwrap();
        assert_eq!(b.lti_matrix.unwrap().trace(), -3.0);
    }

    #[test]
    fn laplacian_of_directed_cycle() {
        let l = WeightedDigraph::directed_cycle(4).unwrap().laplacian();
        assert!((&l * Vector::from_element(4, 1.0)).amax() == 0.0);
        assert_eq!(l[(1, 0)], -1.0);
        assert_eq!(l[(1, 1)], 1.0);
        assert_eq!(l[(0, 3)], -1.0);
    }

    #[test]
    fn edge_list_csv() {
        let g = WeightedDigraph::from_csv_str("from,to,weight\n1,2,0.5\n2,3,2\n3,1,1\n").unwrap();
        assert_eq!(g.nodes(), 3);
        let l = g.laplacian();
        assert_eq!(l[(1, 0)], -0.5);
        assert_eq!(l[(2, 2)], 2.0);
        assert!(WeightedDigraph::from_csv_str("0,1,1\n").is_err());
        assert!(WeightedDigraph::from_csv_str("1,2\n").is_err());
        assert!(WeightedDigraph::from_csv_str("1,2,-1\n").is_err());
    }

    #[test]
    fn custom_graph_sets_dimension() {
        let g = WeightedDigraph::from_csv_str("1,2,1\n2,3,1\n3,4,1\n4,5,1\n5,1,1\n").unwrap();
        let b = build(
            "laplacian-consensus",
            &ModelOptions::default()
                .with_graph(g)
                .with_activation(Activation::Tanh),
        )
        .unwrap();
        assert_eq!(b.model.dim(), 5);
    }

    #[test]
    fn parameter_strings() {
        let p = parse_params("a=2, b=0.5").unwrap();
        assert_eq!(p["a"], 2.0);
        assert_eq!(p["b"], 0.5);
        assert!(parse_params("a").is_err());
        assert!(parse_params("a=x").is_err());
        assert!(parse_params("").unwrap().is_empty());
    }

    #[test]
    fn activation_parsing() {
        assert_eq!("tanh".parse::<Activation>().unwrap(), Activation::Tanh);
        assert_eq!("Linear".parse::<Activation>().unwrap(), Activation::Linear);
        assert!("relu".parse::<Activation>().is_err());
    }

    #[test]
    fn second_order_consensus_structure() {
        let b = build_default("second-order-consensus").unwrap();
        assert_eq!(b.model.dim(), 8);
        let sys = b.feedback.as_ref().unwrap();
        let u = Matrix::from_element(4, 1, 0.5);
        assert!((&sys.m_mat * u).amax() < 1e-15);
        let pair = b.known_pair.unwrap();
        assert_eq!((pair.p_dim(), pair.q_dim()), (1, 7));
    }
}
