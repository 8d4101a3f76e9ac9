//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! Fixed-size state vectors `[f64; N]`; every accepted step keeps its interpolation
//! coefficients so the solution can be evaluated anywhere on the integration interval.

use crate::error::IntegrationError;

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

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output (Hairer & Wanner, contd5).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub max_steps: usize,
    /// States whose max-norm exceeds this bound are reported as a blowup.
    pub escape_bound: f64,
}

impl OdeOptions {
    /// Same relative and absolute tolerance.
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            max_steps: 2_000_000,
            escape_bound: 1e8,
        }
    }
}

/// One accepted step and its interpolant.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])))
        })
    }

    /// Time derivative of the interpolant.
    pub fn eval_derivative(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let c = &self.cont;
        std::array::from_fn(|i| {
            let q = c[3][i] + th1 * c[4][i];
            let dq = -c[4][i];
            let r = c[2][i] + th * q;
            let dr = q + th * dq;
            let s = c[1][i] + th1 * r;
            let ds = -r + th1 * dr;
            (s + th * ds) / self.h
        })
    }
}

/// Continuous solution over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    pub t_start: f64,
    pub y_start: [f64; N],
    pub steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(self.t_start, DenseStep::t1)
    }

    pub fn y_end(&self) -> [f64; N] {
        match self.steps.last() {
            Some(s) => s.eval(s.t1()),
            None => self.y_start,
        }
    }

    fn locate(&self, t: f64) -> Option<&DenseStep<N>> {
        if self.steps.is_empty() {
            return None;
        }
        let idx = self.steps.partition_point(|s| s.t1() < t);
        Some(&self.steps[idx.min(self.steps.len() - 1)])
    }

    /// Interpolated state; `t` is clamped to the integrated interval.
    pub fn eval(&self, t: f64) -> [f64; N] {
        match self.locate(t) {
            Some(s) => s.eval(t.clamp(self.t_start, self.t_end())),
            None => self.y_start,
        }
    }

    pub fn eval_derivative(&self, t: f64) -> Option<[f64; N]> {
        self.locate(t)
            .map(|s| s.eval_derivative(t.clamp(self.t_start, self.t_end())))
    }

    /// Step end points `(t, y)`, starting with the initial point.
    pub fn nodes(&self) -> Vec<(f64, [f64; N])> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push((self.t_start, self.y_start));
        out.extend(self.steps.iter().map(|s| (s.t1(), s.eval(s.t1()))));
        out
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

fn max_norm<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// What to do after an accepted step.
#[derive(Debug, Clone, PartialEq)]
pub enum StepControl {
    Continue,
    /// End the integration successfully at the current step.
    Stop,
    Abort(String),
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end`.
///
/// `guard` runs after each accepted step and may abort the integration with a reason.
/// On error the partial solution is discarded; the error carries the failure time.
pub fn integrate<const N: usize, F, G>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut guard: G,
) -> Result<DenseSolution<N>, IntegrationError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]) -> Option<String>,
{
    integrate_with(rhs, t0, y0, t_end, opts, |t, y| match guard(t, y) {
        Some(reason) => StepControl::Abort(reason),
        None => StepControl::Continue,
    })
}

/// Like [`integrate`], but the callback may also stop early; the returned solution then
/// ends at the step where [`StepControl::Stop`] was requested.
pub fn integrate_with<const N: usize, F, G>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut control: G,
) -> Result<DenseSolution<N>, IntegrationError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]) -> StepControl,
{
    let mut sol = DenseSolution {
        t_start: t0,
        y_start: y0,
        steps: Vec::new(),
    };
    if !all_finite(&y0) {
        return Err(IntegrationError::NonFinite { t: t0 });
    }
    if t_end <= t0 {
        return Ok(sol);
    }

    let span = t_end - t0;
    let scale = |y: &[f64; N], i: usize, yn: &[f64; N]| {
        opts.atol + opts.rtol * y[i].abs().max(yn[i].abs())
    };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    if !all_finite(&k1) {
        return Err(IntegrationError::NonFinite { t });
    }

    let mut h = match opts.h_init {
        Some(h) => h.min(span),
        None => initial_step(&mut rhs, t, &y, &k1, opts).min(span),
    };
    let h_floor = 16.0 * f64::EPSILON * t0.abs().max(t_end.abs()).max(1e-300);
    let mut rejected_last = false;
    let mut n_steps = 0usize;

    while t < t_end {
        if n_steps >= opts.max_steps {
            return Err(IntegrationError::MaxSteps { t, steps: n_steps });
        }
        n_steps += 1;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
        }
        if h < h_floor {
            return Err(IntegrationError::StepUnderflow { t, h });
        }

        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = rhs(t + h, &y_new);

        if !all_finite(&y_new) || !all_finite(&k7) {
            // Treat as a failed step; a real singularity ends in step underflow.
            h *= 0.25;
            rejected_last = true;
            continue;
        }

        let mut err2 = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = scale(&y, i, &y_new);
            err2 += (e / sc) * (e / sc);
        }
        let err = (err2 / N as f64).sqrt();

        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let cont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i])
                }),
            ];
            sol.steps.push(DenseStep { t0: t, h, cont });
            t = if h == t_end - t { t_end } else { t + h };
            y = y_new;
            k1 = k7;

            let norm = max_norm(&y);
            if norm > opts.escape_bound {
                return Err(IntegrationError::Blowup { t, norm });
            }
            match control(t, &y) {
                StepControl::Continue => {}
                StepControl::Stop => break,
                StepControl::Abort(reason) => return Err(IntegrationError::Guard { t, reason }),
            }

            let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, if rejected_last { 1.0 } else { 10.0 });
            h *= fac;
            rejected_last = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            rejected_last = true;
        }
    }
    Ok(sol)
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    opts: &OdeOptions,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let sc: [f64; N] = std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs());
    let rms = |v: &[f64; N]| {
        (v.iter()
            .zip(sc.iter())
            .map(|(a, s)| (a / s) * (a / s))
            .sum::<f64>()
            / N as f64)
            .sqrt()
    };
    let d0 = rms(y);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = rhs(t + h0, &y1);
    let df: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms(&df) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Classical fixed-step Dormand–Prince (5th-order weights), used for order checks.
pub fn integrate_fixed<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    n_steps: usize,
) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let h = (t_end - t0) / n_steps as f64;
    let mut y = y0;
    for i in 0..n_steps {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        y = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
    }
    y
}
