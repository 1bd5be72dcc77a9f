//! Time integration over flat real state vectors: fixed-step RK4 and the
//! adaptive Dormand-Prince 5(4) embedded pair, with invariant monitoring.
//!
//! Vector fields report domain failures (collisions, log-domain violations)
//! through `VortexError`; integration then halts and the partial record is
//! returned together with the halt reason.

use crate::error::{Result, VortexError};

/// Right-hand side of an ODE on a flat real chart.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()>;
}

/// Adapter turning a closure into a [`VectorField`].
pub struct FnField<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64]) -> Result<()>> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        (self.f)(t, y, dydt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classic fixed-step fourth-order Runge-Kutta.
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4) with per-component error control.
    Dp54 { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    /// Record a sample every this many accepted steps (the initial and final
    /// states are always recorded).
    pub sample_stride: usize,
}

impl IntegratorConfig {
    /// Default adaptive configuration: dp54 with rtol = atol = 1e-10.
    pub fn adaptive(t_end: f64) -> Self {
        Self {
            method: Method::Dp54 {
                rtol: 1e-10,
                atol: 1e-10,
            },
            t_end,
            sample_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return Err(VortexError::BadIntegratorConfig("t_end must be positive"));
        }
        if self.sample_stride == 0 {
            return Err(VortexError::BadIntegratorConfig(
                "sample_stride must be positive",
            ));
        }
        match self.method {
            Method::Rk4 { dt } if !dt.is_finite() || dt <= 0.0 => {
                Err(VortexError::BadIntegratorConfig("dt must be positive"))
            }
            Method::Dp54 { rtol, atol } if !(rtol.is_finite() && atol.is_finite() && rtol > 0.0 && atol > 0.0) => Err(
                VortexError::BadIntegratorConfig("rtol and atol must be positive"),
            ),
            _ => Ok(()),
        }
    }
}

/// Observable evaluated on a flat state vector.
pub type MonitorFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Named observable sampled along the trajectory.
pub struct Monitor {
    pub name: String,
    pub eval: MonitorFn,
}

impl Monitor {
    pub fn new(name: impl Into<String>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Box::new(eval),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSeries {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Halt {
    pub t: f64,
    pub error: VortexError,
}

/// Sampled trajectory plus invariant series and step statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub monitors: Vec<MonitorSeries>,
    pub halt: Option<Halt>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Number of post-step manifold renormalizations applied.
    pub renormalizations: usize,
}

impl TrajectoryRecord {
    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.values.as_slice())
    }

    /// Largest |v(t) - v(0)| over a monitor series.
    pub fn max_drift(&self, name: &str) -> Option<f64> {
        let v = self.monitor(name)?;
        let v0 = *v.first()?;
        Some(v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max))
    }
}

/// Optional post-step hook keeping the state on its manifold. Returns the
/// number of adjustments made so drift corrections can be reported.
pub type Projection<'a> = &'a (dyn Fn(&mut [f64]) -> usize + Sync);

enum Sampling<'a> {
    Stride(usize),
    Times(&'a [f64]),
}

/// Integrate `field` from `y0` to `cfg.t_end`, recording every
/// `cfg.sample_stride` accepted steps.
pub fn integrate(
    field: &dyn VectorField,
    y0: &[f64],
    cfg: &IntegratorConfig,
    monitors: &[Monitor],
    projection: Option<Projection>,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    run(
        field,
        y0,
        cfg.t_end,
        cfg.method,
        Sampling::Stride(cfg.sample_stride),
        monitors,
        projection,
    )
}

/// Integrate and record exactly at the given times (strictly increasing,
/// starting at 0). Used for cross-level trajectory comparisons.
pub fn integrate_at_times(
    field: &dyn VectorField,
    y0: &[f64],
    times: &[f64],
    method: Method,
    monitors: &[Monitor],
    projection: Option<Projection>,
) -> Result<TrajectoryRecord> {
    if times.is_empty() || times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VortexError::BadIntegratorConfig(
            "sample times must start at 0 and increase strictly",
        ));
    }
    let t_end = *times.last().unwrap();
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(VortexError::BadIntegratorConfig("t_end must be positive"));
    }
    run(
        field,
        y0,
        t_end,
        method,
        Sampling::Times(times),
        monitors,
        projection,
    )
}

const MAX_STEPS: usize = 50_000_000;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    0.025,
];

struct Recorder<'a> {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    monitor_values: Vec<Vec<f64>>,
    monitors: &'a [Monitor],
}

impl<'a> Recorder<'a> {
    fn new(monitors: &'a [Monitor]) -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            monitor_values: vec![Vec::new(); monitors.len()],
            monitors,
        }
    }

    fn push(&mut self, t: f64, y: &[f64]) {
        self.times.push(t);
        self.states.push(y.to_vec());
        for (series, m) in self.monitor_values.iter_mut().zip(self.monitors) {
            series.push((m.eval)(y));
        }
    }

    fn finish(
        self,
        halt: Option<Halt>,
        steps_accepted: usize,
        steps_rejected: usize,
        renormalizations: usize,
    ) -> TrajectoryRecord {
        TrajectoryRecord {
            times: self.times,
            states: self.states,
            monitors: self
                .monitor_values
                .into_iter()
                .zip(self.monitors)
                .map(|(values, m)| MonitorSeries {
                    name: m.name.clone(),
                    values,
                })
                .collect(),
            halt,
            steps_accepted,
            steps_rejected,
            renormalizations,
        }
    }
}

fn run(
    field: &dyn VectorField,
    y0: &[f64],
    t_end: f64,
    method: Method,
    sampling: Sampling,
    monitors: &[Monitor],
    projection: Option<Projection>,
) -> Result<TrajectoryRecord> {
    let dim = field.dim();
    if y0.len() != dim {
        return Err(VortexError::DimensionMismatch {
            context: "initial state",
            expected: dim,
            got: y0.len(),
        });
    }
    match method {
        Method::Rk4 { dt } => run_rk4(field, y0, t_end, dt, sampling, monitors, projection),
        Method::Dp54 { rtol, atol } => {
            run_dp54(field, y0, t_end, rtol, atol, sampling, monitors, projection)
        }
    }
}

fn run_rk4(
    field: &dyn VectorField,
    y0: &[f64],
    t_end: f64,
    dt: f64,
    sampling: Sampling,
    monitors: &[Monitor],
    projection: Option<Projection>,
) -> Result<TrajectoryRecord> {
    let dim = field.dim();
    let mut rec = Recorder::new(monitors);
    let mut y = y0.to_vec();
    let mut t = 0.0;
    rec.push(t, &y);
    let mut sample_idx = 1usize; // next entry of Sampling::Times to hit
    let mut accepted = 0usize;
    let mut renorms = 0usize;

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];

    loop {
        if t >= t_end {
            break;
        }
        // step to t+dt, clipped to the next sample time / final time
        let target = match sampling {
            Sampling::Times(ts) if sample_idx < ts.len() => ts[sample_idx],
            _ => t_end,
        };
        let h = dt.min(target - t);
        let reaches_target = t + h >= target - 1e-14 * t_end;

        let res = (|| -> Result<()> {
            field.eval(t, &y, &mut k1)?;
            for i in 0..dim {
                scratch[i] = y[i] + 0.5 * h * k1[i];
            }
            field.eval(t + 0.5 * h, &scratch, &mut k2)?;
            for i in 0..dim {
                scratch[i] = y[i] + 0.5 * h * k2[i];
            }
            field.eval(t + 0.5 * h, &scratch, &mut k3)?;
            for i in 0..dim {
                scratch[i] = y[i] + h * k3[i];
            }
            field.eval(t + h, &scratch, &mut k4)?;
            Ok(())
        })();
        if let Err(e) = res {
            return Ok(rec.finish(Some(Halt { t, error: e }), accepted, 0, renorms));
        }
        for i in 0..dim {
            y_new[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        y.copy_from_slice(&y_new);
        t = if reaches_target { target } else { t + h };
        accepted += 1;
        if let Some(proj) = projection {
            renorms += proj(&mut y);
        }
        let record_here = match sampling {
            Sampling::Stride(stride) => accepted.is_multiple_of(stride) || t >= t_end,
            Sampling::Times(_) => reaches_target,
        };
        if record_here {
            rec.push(t, &y);
            if let Sampling::Times(_) = sampling {
                sample_idx += 1;
            }
        }
        if accepted > MAX_STEPS {
            return Ok(rec.finish(
                Some(Halt {
                    t,
                    error: VortexError::BadIntegratorConfig("step limit exceeded"),
                }),
                accepted,
                0,
                renorms,
            ));
        }
    }
    // make sure the final state is recorded in stride mode
    if let Sampling::Stride(_) = sampling {
        if *rec.times.last().unwrap() < t_end {
            rec.push(t, &y);
        }
    }
    Ok(rec.finish(None, accepted, 0, renorms))
}

/// Initial step-size heuristic for the adaptive method.
fn initial_step(
    field: &dyn VectorField,
    y0: &[f64],
    f0: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<f64> {
    let dim = y0.len();
    let scaled_norm = |v: &[f64], y: &[f64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(vi, yi)| {
                let sc = atol + rtol * yi.abs();
                (vi / sc) * (vi / sc)
            })
            .sum();
        (s / dim as f64).sqrt()
    };
    let d0 = scaled_norm(y0, y0);
    let d1 = scaled_norm(f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let mut y1 = vec![0.0; dim];
    for i in 0..dim {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let mut f1 = vec![0.0; dim];
    field.eval(h0, &y1, &mut f1)?;
    let mut diff = vec![0.0; dim];
    for i in 0..dim {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = scaled_norm(&diff, y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(t_end))
}

#[allow(clippy::too_many_arguments)]
fn run_dp54(
    field: &dyn VectorField,
    y0: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
    sampling: Sampling,
    monitors: &[Monitor],
    projection: Option<Projection>,
) -> Result<TrajectoryRecord> {
    let dim = field.dim();
    let mut rec = Recorder::new(monitors);
    let mut y = y0.to_vec();
    let mut t = 0.0;
    rec.push(t, &y);
    let mut sample_idx = 1usize;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut renorms = 0usize;

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];

    macro_rules! halt {
        ($err:expr) => {
            return Ok(rec.finish(
                Some(Halt {
                    t,
                    error: $err,
                }),
                accepted,
                rejected,
                renorms,
            ))
        };
    }

    match field.eval(t, &y, &mut k[0]) {
        Ok(()) => {}
        Err(e) => halt!(e),
    }
    let mut h = match initial_step(field, &y, &k[0], t_end, rtol, atol) {
        Ok(h) => h,
        Err(e) => halt!(e),
    };

    loop {
        if t >= t_end {
            break;
        }
        let target = match sampling {
            Sampling::Times(ts) if sample_idx < ts.len() => ts[sample_idx],
            _ => t_end,
        };
        let h_step = h.min(target - t);
        if h_step < 1e-14 * t_end.max(1.0) {
            halt!(VortexError::BadIntegratorConfig("step size underflow"));
        }
        let reaches_target = (t + h_step) >= target - 1e-14 * t_end.max(1.0);

        // stages 2..=7 (k[0] is FSAL from the previous step)
        let mut stage_err = None;
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + h_step * acc;
            }
            if let Err(e) = field.eval(t + C[s] * h_step, &stage, &mut k[s]) {
                stage_err = Some(e);
                break;
            }
            if s == 6 {
                y_new.copy_from_slice(&stage); // stage 7 input is the 5th-order solution
            }
        }
        if let Some(e) = stage_err {
            halt!(e);
        }

        // scaled error norm of the embedded 4th-order difference
        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += (B5[s] - B4[s]) * ks[i];
            }
            e *= h_step;
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            t = if reaches_target { target } else { t + h_step };
            std::mem::swap(&mut y, &mut y_new);
            accepted += 1;
            k.swap(0, 6); // FSAL
            if let Some(proj) = projection {
                let n = proj(&mut y);
                renorms += n;
                if n > 0 {
                    // state moved: the FSAL derivative is stale
                    if let Err(e) = field.eval(t, &y, &mut k[0]) {
                        halt!(e);
                    }
                }
            }
            let record_here = match sampling {
                Sampling::Stride(stride) => accepted.is_multiple_of(stride) || t >= t_end,
                Sampling::Times(_) => reaches_target,
            };
            if record_here {
                rec.push(t, &y);
                if let Sampling::Times(_) = sampling {
                    sample_idx += 1;
                }
            }
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            h = h_step * fac;
        } else {
            rejected += 1;
            let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h = h_step * fac;
        }
        if accepted + rejected > MAX_STEPS {
            halt!(VortexError::BadIntegratorConfig("step limit exceeded"));
        }
    }
    if let Sampling::Stride(_) = sampling {
        if *rec.times.last().unwrap() < t_end {
            rec.push(t, &y);
        }
    }
    Ok(rec.finish(None, accepted, rejected, renorms))
}
