//! Deterministic ODE integration (Dormand–Prince 5(4) with dense output)
//! and the asymptotic classifiers used to check convergence and the absence
//! of non-trivial periodic orbits empirically.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Vector;
use crate::model::{compose_serial, SerialPair, VectorFieldModel};

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub atol: f64,
    pub rtol: f64,
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    /// Steps below `min_step·max(1, |t|)` abort the integration.
    pub min_step: f64,
    pub max_steps: usize,
    /// Integrate with a constant step and no error control.
    pub fixed_step: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            atol: 1e-9,
            rtol: 1e-7,
            initial_step: None,
            max_step: None,
            min_step: 1e-14,
            max_steps: 5_000_000,
            fixed_step: None,
        }
    }
}

impl SolverSettings {
    pub fn with_tolerances(mut self, atol: f64, rtol: f64) -> Self {
        self.atol = atol;
        self.rtol = rtol;
        self
    }

    /// Tolerances (atol 1e-12, rtol 1e-10) that keep the global error well
    /// below the default detection tolerance of 1e-6.
    pub fn precise() -> Self {
        SolverSettings::default().with_tolerances(1e-12, 1e-10)
    }

    pub fn fixed(mut self, h: f64) -> Self {
        self.fixed_step = Some(h);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub tag: String,
}

/// Polynomial pieces for dense output on one accepted step.
#[derive(Debug, Clone)]
struct DenseSegment {
    t0: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

impl DenseSegment {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.r[0][i]
                + theta
                    * (self.r[1][i]
                        + theta1 * (self.r[2][i] + theta * (self.r[3][i] + theta1 * self.r[4][i])));
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub model_id: String,
    pub x0: Vec<f64>,
    pub settings: SolverSettings,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub events: Vec<TrajectoryEvent>,
    #[serde(skip)]
    dense: Vec<DenseSegment>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn final_state(&self) -> Vector {
        Vector::from_column_slice(self.states.last().expect("non-empty trajectory"))
    }

    /// State at time `t` from the continuous extension (clamped to the
    /// integration interval).
    pub fn interpolate(&self, t: f64) -> Vector {
        let t = t.clamp(self.t_start(), self.t_end());
        let mut out = vec![0.0; self.dim()];
        if self.dense.is_empty() {
            // deserialized trajectories: piecewise-linear fallback
            let i = self
                .times
                .partition_point(|&s| s <= t)
                .clamp(1, self.len().max(2) - 1);
            if self.len() == 1 {
                return Vector::from_column_slice(&self.states[0]);
            }
            let (ta, tb) = (self.times[i - 1], self.times[i]);
            let w = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
            for (k, o) in out.iter_mut().enumerate() {
                *o = (1.0 - w) * self.states[i - 1][k] + w * self.states[i][k];
            }
        } else {
            let i = self
                .dense
                .partition_point(|s| s.t0 + s.h < t)
                .min(self.dense.len() - 1);
            self.dense[i].eval(t, &mut out);
        }
        Vector::from_vec(out)
    }

    /// `count` uniformly spaced samples over `[t_start, t_end]`.
    pub fn resample(&self, count: usize) -> (Vec<f64>, Vec<Vector>) {
        let (a, b) = (self.t_start(), self.t_end());
        let times: Vec<f64> = (0..count)
            .map(|i| a + (b - a) * i as f64 / (count.max(2) - 1) as f64)
            .collect();
        let states = times.iter().map(|&t| self.interpolate(t)).collect();
        (times, states)
    }

    /// CSV with header `t,x1,…,xn`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim()).map(|i| format!("x{i}")));
        writer.write_record(&header)?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:.17e}")];
            row.extend(x.iter().map(|v| format!("{v:.17e}")));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], atol: f64, rtol: f64) -> f64 {
    // max-norm: every component must meet its own tolerance
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| (e / (atol + rtol * a.abs().max(b.abs()))).abs())
        .fold(0.0, f64::max)
}

fn initial_step(
    model: &VectorFieldModel,
    t0: f64,
    y0: &Vector,
    f0: &Vector,
    span: f64,
    s: &SolverSettings,
) -> Result<f64> {
    let sc = |v: &Vector, y: &Vector| -> f64 {
        let n = v.len() as f64;
        (v.iter()
            .zip(y.iter())
            .map(|(a, b)| (a / (s.atol + s.rtol * b.abs())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = sc(y0, y0);
    let d1 = sc(f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = y0 + f0 * h0;
    let f1 = model.eval(t0 + h0, &y1)?;
    let d2 = sc(&(f1 - f0), y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates `ẋ = f(t, x)` from `(t0, x0)` to `t_end`.
///
/// Leaving the model's domain is recorded as an event; the state is not
/// clamped and integration continues.
pub fn integrate(
    model: &VectorFieldModel,
    x0: &Vector,
    t0: f64,
    t_end: f64,
    settings: &SolverSettings,
) -> Result<Trajectory> {
    if !(t_end > t0) {
        return Err(Error::InvalidParameter(format!(
            "t_end ({t_end}) must exceed t0 ({t0})"
        )));
    }
    if x0.len() != model.dim() {
        return Err(Error::Dimension(format!(
            "initial state has {} components, model has dimension {}",
            x0.len(),
            model.dim()
        )));
    }
    if !model.domain().contains(x0.as_slice()) {
        return Err(Error::OutsideDomain(format!(
            "initial state {:?}",
            x0.as_slice()
        )));
    }
    let n = model.dim();
    let s = settings;
    let span = t_end - t0;
    let h_max = s.max_step.unwrap_or(span).min(span);

    let mut traj = Trajectory {
        model_id: model.id().to_string(),
        x0: x0.iter().copied().collect(),
        settings: s.clone(),
        times: vec![t0],
        states: vec![x0.iter().copied().collect()],
        events: Vec::new(),
        dense: Vec::new(),
    };

    let mut t = t0;
    let mut y = x0.clone();
    let mut k1 = model.eval(t, &y)?;
    let mut h = match (s.fixed_step, s.initial_step) {
        (Some(hf), _) => {
            if !(hf > 0.0) {
                return Err(Error::InvalidParameter(
                    "fixed step must be positive".into(),
                ));
            }
            hf
        }
        (None, Some(h0)) => h0,
        (None, None) => initial_step(model, t, &y, &k1, span, s)?,
    }
    .min(h_max);
    let mut inside = true;
    let mut steps = 0usize;
    let mut rejected_last = false;

    while t < t_end {
        if steps >= s.max_steps {
            return Err(Error::Integration(format!(
                "step budget of {} exhausted at t = {t}",
                s.max_steps
            )));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if s.fixed_step.is_none() && h < s.min_step * t.abs().max(1.0) {
            return Err(Error::Integration(format!(
                "step size underflow at t = {t}"
            )));
        }

        let k2 = model.eval(t + C2 * h, &(&y + &k1 * (A21 * h)))?;
        let k3 = model.eval(t + C3 * h, &(&y + (&k1 * A31 + &k2 * A32) * h))?;
        let k4 = model.eval(t + C4 * h, &(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
        let k5 = model.eval(
            t + C5 * h,
            &(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h),
        )?;
        let k6 = model.eval(
            t + h,
            &(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h),
        )?;
        let y_new = &y + (&k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
        let k7 = model.eval(t + h, &y_new)?;

        steps += 1;
        // next step size; `None` rejects the current step
        let next_h = match s.fixed_step {
            Some(_) => Some(h),
            None => {
                let err = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
                let en = error_norm(
                    err.as_slice(),
                    y.as_slice(),
                    y_new.as_slice(),
                    s.atol,
                    s.rtol,
                );
                let factor = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
                };
                if en <= 1.0 {
                    let grow = if rejected_last {
                        factor.min(1.0)
                    } else {
                        factor
                    };
                    rejected_last = false;
                    Some((h * grow).min(h_max))
                } else {
                    rejected_last = true;
                    h *= factor.min(1.0);
                    None
                }
            }
        };
        if let Some(next) = next_h {
            record_step(&mut traj, t, h, &y, &y_new, &k1, &k3, &k4, &k5, &k6, &k7, n);
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            h = next;
            track_domain(model, &mut traj, t, &y, &mut inside);
        }
    }
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn record_step(
    traj: &mut Trajectory,
    t: f64,
    h: f64,
    y: &Vector,
    y_new: &Vector,
    k1: &Vector,
    k3: &Vector,
    k4: &Vector,
    k5: &Vector,
    k6: &Vector,
    k7: &Vector,
    n: usize,
) {
    let mut r: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    for i in 0..n {
        let dy = y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * k7[i] - bspl;
        r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    traj.dense.push(DenseSegment { t0: t, h, r });
    traj.times.push(t + h);
    traj.states.push(y_new.iter().copied().collect());
}

fn track_domain(
    model: &VectorFieldModel,
    traj: &mut Trajectory,
    t: f64,
    y: &Vector,
    inside: &mut bool,
) {
    let now = model.domain().contains(y.as_slice());
    if now != *inside {
        traj.events.push(TrajectoryEvent {
            time: t,
            tag: if now { "domain_entry" } else { "domain_exit" }.to_string(),
        });
        *inside = now;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConvergedToEquilibrium,
    Periodic,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub verdict: Verdict,
    pub equilibrium: Option<Vec<f64>>,
    pub period: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSettings {
    /// Tolerance on `|f|∞`, the state diameter, and the periodic mismatch.
    pub tol: f64,
    /// Trailing fraction of the horizon inspected for convergence.
    pub window_fraction: f64,
    /// Uniform resampling size for the period search.
    pub samples: usize,
    /// Leading fraction of the horizon discarded as transient before the
    /// periodic mismatch is measured.
    pub transient_fraction: f64,
    pub period_min: f64,
    /// A candidate period is accepted only if the state spread over the
    /// comparison window exceeds its mismatch by this factor, so a decaying
    /// tail below `tol` is not mistaken for an orbit.
    pub min_spread_ratio: f64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        DetectionSettings {
            tol: 1e-6,
            window_fraction: 0.1,
            samples: 2048,
            transient_fraction: 0.5,
            period_min: 1e-3,
            min_spread_ratio: 1e3,
        }
    }
}

const WINDOW_SAMPLES: usize = 256;

/// Sup-norm diameter of a set of states (largest coordinate spread).
fn diameter(states: &[Vector]) -> f64 {
    let n = states.first().map_or(0, |s| s.len());
    (0..n)
        .map(|i| {
            let (lo, hi) = states
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s[i]), hi.max(s[i]))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn window_states(traj: &Trajectory, fraction: f64) -> Result<Vec<(f64, Vector)>> {
    if traj.len() < 2 {
        return Err(Error::TrajectoryTooShort("fewer than two states".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::TrajectoryTooShort(format!(
            "window fraction {fraction} exceeds the trajectory"
        )));
    }
    let (a, b) = (traj.t_start(), traj.t_end());
    let start = b - fraction * (b - a);
    Ok((0..WINDOW_SAMPLES)
        .map(|i| {
            let t = start + (b - start) * i as f64 / (WINDOW_SAMPLES - 1) as f64;
            (t, traj.interpolate(t))
        })
        .collect())
}

/// Converged iff `sup |f(t, x(t))|∞` and the state diameter over the
/// trailing window are both at most `tol`.
pub fn detect_equilibrium(
    traj: &Trajectory,
    model: &VectorFieldModel,
    tol: f64,
) -> Result<AsymptoticsReport> {
    detect_equilibrium_with(
        traj,
        model,
        &DetectionSettings {
            tol,
            ..DetectionSettings::default()
        },
    )
}

pub fn detect_equilibrium_with(
    traj: &Trajectory,
    model: &VectorFieldModel,
    settings: &DetectionSettings,
) -> Result<AsymptoticsReport> {
    let window = window_states(traj, settings.window_fraction)?;
    let mut sup_f = 0.0_f64;
    for (t, x) in &window {
        sup_f = sup_f.max(model.eval(*t, x)?.amax());
    }
    let states: Vec<Vector> = window.into_iter().map(|(_, x)| x).collect();
    let diam = diameter(&states);
    let x_end = traj.final_state();
    let f_end = model.eval(traj.t_end(), &x_end)?.amax();
    let converged = sup_f <= settings.tol && diam <= settings.tol;
    let mut residuals = BTreeMap::new();
    residuals.insert("sup_field_norm".into(), sup_f);
    residuals.insert("window_diameter".into(), diam);
    residuals.insert("final_field_norm".into(), f_end);
    Ok(AsymptoticsReport {
        verdict: if converged {
            Verdict::ConvergedToEquilibrium
        } else {
            Verdict::Undetermined
        },
        equilibrium: converged.then(|| x_end.iter().copied().collect()),
        period: None,
        residuals,
    })
}

/// Sup-norm mismatch `max_i |x(t_i + T) − x(t_i)|∞` over the given times.
fn mismatch(traj: &Trajectory, times: &[f64], period: f64) -> f64 {
    times
        .iter()
        .map(|&t| (traj.interpolate(t + period) - traj.interpolate(t)).amax())
        .fold(0.0, f64::max)
}

fn golden_refine(traj: &Trajectory, times: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = mismatch(traj, times, c);
    let mut fd = mismatch(traj, times, d);
    for _ in 0..60 {
        if (b - a).abs() < 1e-10 * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = mismatch(traj, times, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = mismatch(traj, times, d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Searches `T ∈ (0, horizon/3]` minimizing `sup_t |x(t+T) − x(t)|∞` over
/// the post-transient part of the trajectory.
///
/// A trajectory whose trailing window is already stationary (the
/// equilibrium test's diameter criterion) is never reported periodic.
pub fn detect_period(traj: &Trajectory, settings: &DetectionSettings) -> Result<AsymptoticsReport> {
    let n_samples = settings.samples;
    if traj.len() < 4 || n_samples < 16 {
        return Err(Error::TrajectoryTooShort(
            "period search needs at least four states and sixteen samples".into(),
        ));
    }
    let mut residuals = BTreeMap::new();
    let window: Vec<Vector> = window_states(traj, settings.window_fraction)?
        .into_iter()
        .map(|(_, x)| x)
        .collect();
    let diam = diameter(&window);
    residuals.insert("window_diameter".into(), diam);
    if diam <= settings.tol {
        return Ok(AsymptoticsReport {
            verdict: Verdict::Undetermined,
            equilibrium: None,
            period: None,
            residuals,
        });
    }

    let (times, states) = traj.resample(n_samples);
    let dt = times[1] - times[0];
    let last = n_samples - 1;
    let i0 = ((settings.transient_fraction * last as f64).floor() as usize).min(last);
    let max_lag = last / 3;
    if max_lag < 2 || i0 + max_lag >= last {
        return Err(Error::TrajectoryTooShort(
            "no room for a post-transient comparison window".into(),
        ));
    }
    let coarse: Vec<f64> = (0..=max_lag)
        .map(|lag| {
            (i0..=last - lag)
                .map(|i| (&states[i + lag] - &states[i]).amax())
                .fold(0.0, f64::max)
        })
        .collect();

    // skip the initial rise of the mismatch away from lag 0
    let mut start = 1;
    while start < max_lag && coarse[start + 1] >= coarse[start] {
        start += 1;
    }
    let mut minima: Vec<usize> = (start.max(1)..max_lag)
        .filter(|&l| coarse[l] <= coarse[l - 1] && coarse[l] <= coarse[l + 1])
        .collect();
    // a minimum pinned at the end of the lag range is only reported, never accepted
    let interior = !minima.is_empty();
    if !interior {
        minima.push(
            (start.max(1)..=max_lag)
                .min_by(|&a, &b| coarse[a].total_cmp(&coarse[b]))
                .unwrap_or(max_lag),
        );
    }
    let spread = diameter(&states[i0..]);
    residuals.insert("analysis_spread".into(), spread);

    // compare over the same post-transient times for every candidate
    let t_cut = traj.t_end() - (max_lag as f64 + 1.0) * dt;
    let ref_times: Vec<f64> = times[i0..]
        .iter()
        .copied()
        .filter(|&t| t <= t_cut)
        .collect();

    let mut best: Option<(f64, f64)> = None;
    let mut found = None;
    for &lag in &minima {
        let lo = (lag as f64 - 1.0) * dt;
        let hi = (lag as f64 + 1.0) * dt;
        let (period, value) = golden_refine(traj, &ref_times, lo.max(0.5 * dt), hi);
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((period, value));
        }
        if interior
            && value <= settings.tol
            && period >= settings.period_min
            && value * settings.min_spread_ratio <= spread
        {
            found = Some((period, value));
            break;
        }
    }
    let (period, value) = found.or(best).expect("at least one candidate");
    residuals.insert("best_mismatch".into(), value);
    residuals.insert("best_period".into(), period);
    let periodic = found.is_some();
    Ok(AsymptoticsReport {
        verdict: if periodic {
            Verdict::Periodic
        } else {
            Verdict::Undetermined
        },
        equilibrium: None,
        period: periodic.then_some(period),
        residuals,
    })
}

/// Equilibrium test first; the period search only runs when it fails.
pub fn classify(
    traj: &Trajectory,
    model: &VectorFieldModel,
    settings: &DetectionSettings,
) -> Result<AsymptoticsReport> {
    let eq = detect_equilibrium_with(traj, model, settings)?;
    if eq.verdict == Verdict::ConvergedToEquilibrium {
        return Ok(eq);
    }
    let mut per = detect_period(traj, settings)?;
    for (k, v) in eq.residuals {
        per.residuals.entry(k).or_insert(v);
    }
    Ok(per)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CicsSummary {
    pub reports: Vec<AsymptoticsReport>,
    pub converged: usize,
    pub total: usize,
}

/// Simulates the closed cascade from each initial condition and tests for
/// equilibrium convergence of the full state.
pub fn cics_probe(
    pair: &SerialPair,
    x0_list: &[Vector],
    horizon: f64,
    solver: &SolverSettings,
    detection: &DetectionSettings,
) -> Result<CicsSummary> {
    if pair.upstream.is_time_varying() {
        return Err(Error::Precondition(
            "converging-input probe needs a time-invariant upstream system".into(),
        ));
    }
    let model = compose_serial(pair)?;
    let mut reports = Vec::with_capacity(x0_list.len());
    for x0 in x0_list {
        let traj = integrate(&model, x0, 0.0, horizon, solver)?;
        reports.push(detect_equilibrium_with(&traj, &model, detection)?);
    }
    let converged = reports
        .iter()
        .filter(|r| r.verdict == Verdict::ConvergedToEquilibrium)
        .count();
    Ok(CicsSummary {
        total: reports.len(),
        converged,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::model::BoxDomain;

    fn decay() -> VectorFieldModel {
        VectorFieldModel::new("decay", BoxDomain::cube(1, 10.0), |_, x| -x.clone())
            .with_jacobian(|_, _| Matrix::from_element(1, 1, -1.0))
    }

    fn harmonic() -> VectorFieldModel {
        VectorFieldModel::new("harmonic", BoxDomain::cube(2, 10.0), |_, x| {
            Vector::from_vec(vec![x[1], -x[0]])
        })
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let traj = integrate(
            &decay(),
            &Vector::from_element(1, 1.0),
            0.0,
            10.0,
            &SolverSettings::default(),
        )
        .unwrap();
        assert!((traj.final_state()[0] - (-10f64).exp()).abs() < 1e-8);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.t_end(), 10.0);
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        let traj = integrate(
            &harmonic(),
            &Vector::from_vec(vec![1.0, 0.0]),
            0.0,
            20.0,
            &SolverSettings::default(),
        )
        .unwrap();
        for i in 0..400 {
            let t = 0.05 * i as f64 + 0.0123;
            let x = traj.interpolate(t);
            assert!((x[0] - t.cos()).abs() < 1e-6, "t={t}");
            assert!((x[1] + t.sin()).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn harmonic_energy_is_conserved() {
        let traj = integrate(
            &harmonic(),
            &Vector::from_vec(vec![1.0, 0.0]),
            0.0,
            100.0,
            &SolverSettings::default(),
        )
        .unwrap();
        let x = traj.final_state();
        let drift = (0.5 * (x[0] * x[0] + x[1] * x[1]) - 0.5).abs();
        assert!(drift <= 1e-6, "drift {drift}");
    }

    #[test]
    fn domain_exit_is_recorded_not_clamped() {
        let grow = VectorFieldModel::new("grow", BoxDomain::cube(1, 2.0), |_, x| x.clone());
        let traj = integrate(
            &grow,
            &Vector::from_element(1, 1.0),
            0.0,
            2.0,
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(traj.events.len(), 1);
        assert_eq!(traj.events[0].tag, "domain_exit");
        assert!((traj.events[0].time - 2f64.ln()).abs() < 0.5);
        assert!((traj.final_state()[0] - 2f64.exp()).abs() < 1e-5);
    }

    #[test]
    fn integrate_rejects_bad_inputs() {
        let m = decay();
        let s = SolverSettings::default();
        assert!(integrate(&m, &Vector::from_element(1, 1.0), 1.0, 1.0, &s).is_err());
        assert!(integrate(&m, &Vector::from_element(1, 20.0), 0.0, 1.0, &s).is_err());
        assert!(integrate(&m, &Vector::zeros(2), 0.0, 1.0, &s).is_err());
    }

    #[test]
    fn blow_up_is_an_error() {
        let m = VectorFieldModel::new("blowup", BoxDomain::cube(1, 10.0), |_, x| {
            Vector::from_element(1, x[0] * x[0])
        });
        let r = integrate(
            &m,
            &Vector::from_element(1, 1.0),
            0.0,
            2.0,
            &SolverSettings::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn decay_converges_and_is_not_periodic() {
        let m = decay();
        let traj = integrate(
            &m,
            &Vector::from_element(1, 5.0),
            0.0,
            40.0,
            &SolverSettings::default(),
        )
        .unwrap();
        let eq = detect_equilibrium(&traj, &m, 1e-6).unwrap();
        assert_eq!(eq.verdict, Verdict::ConvergedToEquilibrium);
        assert!(eq.equilibrium.unwrap()[0].abs() < 1e-6);
        let per = detect_period(&traj, &DetectionSettings::default()).unwrap();
        assert_eq!(per.verdict, Verdict::Undetermined);
        assert!(per.period.is_none());
    }

    #[test]
    fn harmonic_oscillator_period() {
        let m = harmonic();
        let traj = integrate(
            &m,
            &Vector::from_vec(vec![1.0, 0.0]),
            0.0,
            60.0,
            &SolverSettings::default(),
        )
        .unwrap();
        let rep = classify(&traj, &m, &DetectionSettings::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Periodic);
        assert!((rep.period.unwrap() - std::f64::consts::TAU).abs() < 1e-3);
    }

    #[test]
    fn faint_damped_oscillation_is_not_periodic() {
        // mismatch stays under tol, yet the orbit is barely larger than it
        let m = VectorFieldModel::new("weak", BoxDomain::cube(2, 10.0), |_, x| {
            Vector::from_vec(vec![x[1], -x[0] - 0.02 * x[1]])
        });
        let traj = integrate(
            &m,
            &Vector::from_vec(vec![2e-5, 0.0]),
            0.0,
            60.0,
            &SolverSettings::precise(),
        )
        .unwrap();
        let s = DetectionSettings::default();
        let rep = classify(&traj, &m, &s).unwrap();
        assert_eq!(rep.verdict, Verdict::Undetermined);
        assert!(rep.residuals["best_mismatch"] <= s.tol);
        assert!(rep.residuals["window_diameter"] > s.tol);
        let lax = DetectionSettings {
            min_spread_ratio: 0.0,
            ..s
        };
        assert_eq!(
            classify(&traj, &m, &lax).unwrap().verdict,
            Verdict::Periodic
        );
    }

    #[test]
    fn window_longer_than_trajectory_is_an_error() {
        let m = decay();
        let traj = integrate(
            &m,
            &Vector::from_element(1, 1.0),
            0.0,
            1.0,
            &SolverSettings::default(),
        )
        .unwrap();
        let s = DetectionSettings {
            window_fraction: 1.5,
            ..DetectionSettings::default()
        };
        assert!(matches!(
            detect_equilibrium_with(&traj, &m, &s),
            Err(Error::TrajectoryTooShort(_))
        ));
    }

    #[test]
    fn fixed_step_mode_hits_the_end_time() {
        let traj = integrate(
            &decay(),
            &Vector::from_element(1, 1.0),
            0.0,
            1.0,
            &SolverSettings::default().fixed(0.3),
        )
        .unwrap();
        assert_eq!(traj.len(), 5);
        assert_eq!(traj.t_end(), 1.0);
    }

    #[test]
    fn trajectory_csv_has_header() {
        let traj = integrate(
            &harmonic(),
            &Vector::from_vec(vec![1.0, 0.0]),
            0.0,
            1.0,
            &SolverSettings::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x1,x2\n"));
        assert_eq!(text.lines().count(), traj.len() + 1);
    }
}
