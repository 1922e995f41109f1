//! Embedded Runge–Kutta 4(5) (Dormand–Prince) with max-norm step-size
//! control and cubic Hermite dense output.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step before giving up.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_min: 1e-14, h_max: f64::INFINITY, max_steps: 1_000_000 }
    }
}

/// Accepted steps of an integration: node times, states and derivatives.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    pub rejected_steps: usize,
}

impl OdeSolution {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("solution has at least the initial node")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("solution has at least the initial node")
    }

    /// Cubic Hermite interpolation between accepted nodes. Times outside
    /// the integrated interval are clamped to its ends.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1].clone();
        }
        let i = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return self.states[i].clone(),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let (y0, y1) = (&self.states[i], &self.states[i + 1]);
        let (f0, f1) = (&self.derivatives[i], &self.derivatives[i + 1]);
        (0..y0.len())
            .map(|k| h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k])
            .collect()
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = rhs(t, y)` from `t0` to `t1`.
///
/// `project` is applied to every accepted state (use a no-op closure when no
/// projection is wanted); the derivative stored for dense output is
/// evaluated after projection.
pub fn integrate<F, P>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &OdeOptions,
    mut project: P,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    if !(t1 > t0) {
        return Err(crate::error::invalid(format!("integrate: need t1 > t0, got [{t0}, {t1}]")));
    }
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f = vec![0.0; n];
    rhs(t, &y, &mut f);

    let mut sol = OdeSolution {
        times: vec![t],
        states: vec![y.clone()],
        derivatives: vec![f.clone()],
        rejected_steps: 0,
    };

    let mut h = initial_step(&y, &f, t1 - t0, opts);
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok(sol);
        }
        let last = t + h >= t1 || (t1 - (t + h)) < 1e-12 * (t1 - t0);
        let h_step = if last { t1 - t } else { h };

        k[0].copy_from_slice(&f);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += h_step * a * kj[i];
                    }
                }
                stage[i] = acc;
            }
            rhs(t + C[s] * h_step, &stage, &mut k[s]);
        }
        // stage 7 evaluated at the 5th-order solution, which is `stage` now
        y_new.copy_from_slice(&stage);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let e = h_step * e;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                step: h_step,
                reason: "non-finite error estimate".into(),
            });
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + h_step };
            y.copy_from_slice(&y_new);
            project(&mut y);
            rhs(t, &y, &mut f);
            sol.times.push(t);
            sol.states.push(y.clone());
            sol.derivatives.push(f.clone());
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h_step * factor).min(opts.h_max);
        } else {
            sol.rejected_steps += 1;
            h = h_step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h < opts.h_min {
            return Err(Error::IntegrationFailure {
                t,
                step: h,
                reason: format!("step size underflow below {:.1e} (err norm {err:.3e})", opts.h_min),
            });
        }
    }
    Err(Error::IntegrationFailure { t, step: h, reason: format!("exceeded {} steps", opts.max_steps) })
}

fn initial_step(y: &[f64], f: &[f64], span: f64, opts: &OdeOptions) -> f64 {
    let scale = |v: f64, yi: f64| v / (opts.atol + opts.rtol * yi.abs());
    let n = y.len().max(1) as f64;
    let d0 = (y.iter().map(|&v| scale(v, v).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f.iter().zip(y).map(|(&v, &yi)| scale(v, yi).powi(2)).sum::<f64>() / n).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h.min(0.1 * span).min(opts.h_max).max(opts.h_min * 10.0)
}
