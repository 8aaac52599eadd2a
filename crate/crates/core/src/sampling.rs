//! Deterministic sample sets over a box domain (and a time window for
//! time-varying fields): a tensor grid followed by seeded uniform draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Vector;
use crate::model::{BoxDomain, VectorFieldModel};

/// Time horizon used for time-varying fields that declare no period.
pub const DEFAULT_TIME_HORIZON: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    /// Grid points per axis (state axes, plus time for time-varying fields).
    pub per_axis: usize,
    /// Uniform random samples appended after the grid.
    pub random: usize,
    pub seed: u64,
    /// Time window `[t0, t1]`; defaults to one forcing period or
    /// `[0, DEFAULT_TIME_HORIZON]`.
    pub time_window: Option<(f64, f64)>,
    /// Cap on tensor-grid size; the per-axis count is lowered to respect it.
    pub max_grid_points: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            per_axis: 9,
            random: 1000,
            seed: 0,
            time_window: None,
            max_grid_points: 50_000,
        }
    }
}

impl SampleSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_counts(mut self, per_axis: usize, random: usize) -> Self {
        self.per_axis = per_axis;
        self.random = random;
        self
    }

    pub fn with_time_window(mut self, t0: f64, t1: f64) -> Self {
        self.time_window = Some((t0, t1));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub t: f64,
    pub x: Vector,
}

/// The realized sample set with the window it covers.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Vec<SamplePoint>,
    pub time_window: Option<(f64, f64)>,
    pub grid_per_axis: usize,
}

/// Time window actually sampled for `model` under `spec`.
pub fn effective_time_window(model: &VectorFieldModel, spec: &SampleSpec) -> Option<(f64, f64)> {
    if !model.is_time_varying() {
        return None;
    }
    Some(
        spec.time_window
            .unwrap_or_else(|| (0.0, model.period().unwrap_or(DEFAULT_TIME_HORIZON))),
    )
}

fn axis_values(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..m)
            .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
            .collect(),
    }
}

/// Per-axis count actually used so that `m^axes` stays under the cap.
fn capped_per_axis(per_axis: usize, axes: usize, cap: usize) -> usize {
    let mut m = per_axis;
    while m > 1 && (m as f64).powi(axes as i32) > cap as f64 {
        m -= 1;
    }
    m
}

pub fn sample_domain(
    domain: &BoxDomain,
    time_window: Option<(f64, f64)>,
    spec: &SampleSpec,
) -> Result<SampleSet> {
    let n = domain.dim();
    let axes = n + usize::from(time_window.is_some());
    let m = capped_per_axis(spec.per_axis, axes, spec.max_grid_points);
    let state_axes: Vec<Vec<f64>> = (0..n)
        .map(|i| axis_values(domain.lower()[i], domain.upper()[i], m))
        .collect();
    let times = match time_window {
        Some((t0, t1)) => axis_values(t0, t1, m),
        None => vec![0.0],
    };

    let mut points = Vec::new();
    if m > 0 {
        let total = m.pow(n as u32);
        for &t in &times {
            // odometer over the state axes, last axis fastest
            let mut idx = vec![0usize; n];
            for _ in 0..total {
                let x = Vector::from_iterator(n, (0..n).map(|i| state_axes[i][idx[i]]));
                points.push(SamplePoint { t, x });
                for i in (0..n).rev() {
                    idx[i] += 1;
                    if idx[i] < m {
                        break;
                    }
                    idx[i] = 0;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.random {
        let t = match time_window {
            Some((t0, t1)) => t0 + (t1 - t0) * rng.random::<f64>(),
            None => 0.0,
        };
        let x = Vector::from_iterator(
            n,
            (0..n).map(|i| {
                let (l, u) = (domain.lower()[i], domain.upper()[i]);
                l + (u - l) * rng.random::<f64>()
            }),
        );
        points.push(SamplePoint { t, x });
    }

    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(SampleSet {
        points,
        time_window,
        grid_per_axis: m,
    })
}

pub fn sample_model(model: &VectorFieldModel, spec: &SampleSpec) -> Result<SampleSet> {
    sample_domain(model.domain(), effective_time_window(model, spec), spec)
}

/// Seeded uniform points in a box, used for initial-condition sweeps.
pub fn uniform_points(domain: &BoxDomain, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Vector::from_iterator(
                domain.dim(),
                (0..domain.dim()).map(|i| {
                    let (l, u) = (domain.lower()[i], domain.upper()[i]);
                    l + (u - l) * rng.random::<f64>()
                }),
            )
        })
        .collect()
}
