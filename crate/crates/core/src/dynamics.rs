//! Classical trajectories, period measurement and the closed-form periodic solution.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::format::{csv_records, csv_string, fmt_f64};
use crate::model::{IsochronousParams, LienardSystem, StateClassical};
use crate::ode::{self, DenseSolution, OdeOptions};

/// Time-ordered samples of `(t, x, ẋ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<StateClassical>,
    pub integrator_tolerance: f64,
}

impl Trajectory {
    /// CSV with header `t,x,v`.
    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<f64>> = self.samples.iter().map(|s| vec![s.t, s.x, s.v]).collect();
        csv_string(&["t", "x", "v"], &rows)
    }

    pub fn max_abs_x(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.x.abs()))
    }

    pub fn last(&self) -> Option<&StateClassical> {
        self.samples.last()
    }
}

fn check_integration_args(initial: &StateClassical, t_end: f64, tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return invalid(format!("tolerance must be > 0, got {tol}"));
    }
    if !(t_end.is_finite() && t_end > initial.t) {
        return invalid(format!(
            "t_end ({t_end}) must exceed the initial time ({})",
            initial.t
        ));
    }
    if !(initial.x.is_finite() && initial.v.is_finite()) {
        return invalid("initial state must be finite");
    }
    Ok(())
}

/// Continuous solution of the first-order form `ẋ = v, v̇ = −g − f v`; components `[x, v]`.
pub fn integrate_dense(
    system: &LienardSystem,
    initial: StateClassical,
    t_end: f64,
    tol: f64,
) -> Result<DenseSolution<2>> {
    check_integration_args(&initial, t_end, tol)?;
    let sol = ode::integrate(
        |_t, y: &[f64; 2]| system.rhs(y[0], y[1]),
        initial.t,
        [initial.x, initial.v],
        t_end,
        &OdeOptions::with_tol(tol),
        |_, _| None,
    )?;
    Ok(sol)
}

/// Adaptive integration; one sample per accepted step.
pub fn integrate(
    system: &LienardSystem,
    initial: StateClassical,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    let sol = integrate_dense(system, initial, t_end, tol)?;
    let samples = sol
        .nodes()
        .into_iter()
        .map(|(t, y)| StateClassical { x: y[0], v: y[1], t })
        .collect();
    Ok(Trajectory {
        samples,
        integrator_tolerance: tol,
    })
}

/// Adaptive integration sampled through the dense output at the requested times.
pub fn integrate_sampled(
    system: &LienardSystem,
    initial: StateClassical,
    times: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("sample times must be strictly increasing");
    }
    let (first, last) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return invalid("no sample times requested"),
    };
    if first < initial.t {
        return invalid("sample times must not precede the initial time");
    }
    let sol = integrate_dense(system, initial, last, tol)?;
    let samples = times
        .iter()
        .map(|&t| {
            let y = sol.eval(t);
            StateClassical { x: y[0], v: y[1], t }
        })
        .collect();
    Ok(Trajectory {
        samples,
        integrator_tolerance: tol,
    })
}

/// Mean spacing of upward zero crossings and its sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    pub period: f64,
    pub std_dev: f64,
    pub crossings: Vec<f64>,
}

/// Root of the cubic Hermite interpolant of `x` on `[a, b]`, given `x(a) < 0 ≤ x(b)`.
fn hermite_crossing(a: &StateClassical, b: &StateClassical) -> f64 {
    let h = b.t - a.t;
    let p = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * a.x
            + (s3 - 2.0 * s2 + s) * h * a.v
            + (-2.0 * s3 + 3.0 * s2) * b.x
            + (s3 - s2) * h * b.v
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut plo, mut phi) = (p(lo), p(hi));
    if phi == 0.0 {
        return b.t;
    }
    // Illinois-modified regula falsi with a bisection fallback.
    let mut side = 0i8;
    for _ in 0..200 {
        let mut s = (lo * phi - hi * plo) / (phi - plo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let ps = p(s);
        if ps == 0.0 || hi - lo < 1e-15 {
            return a.t + s * h;
        }
        if (ps < 0.0) == (plo < 0.0) {
            lo = s;
            plo = ps;
            if side == -1 {
                phi *= 0.5;
            }
            side = -1;
        } else {
            hi = s;
            phi = ps;
            if side == 1 {
                plo *= 0.5;
            }
            side = 1;
        }
    }
    a.t + 0.5 * (lo + hi) * h
}

/// Upward zero crossings of `x`, each located on the cubic Hermite interpolant of `(x, ẋ)`.
pub fn upward_crossings(traj: &Trajectory) -> Vec<f64> {
    traj.samples
        .windows(2)
        .filter(|w| w[0].x < 0.0 && w[1].x >= 0.0)
        .map(|w| hermite_crossing(&w[0], &w[1]))
        .collect()
}

pub fn measure_period(traj: &Trajectory) -> Result<PeriodEstimate> {
    let crossings = upward_crossings(traj);
    if crossings.len() < 3 {
        return Err(Error::NotOscillatory {
            crossings: crossings.len(),
        });
    }
    let gaps: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let n = gaps.len() as f64;
    let period = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - period).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(PeriodEstimate {
        period,
        std_dev: var.sqrt(),
        crossings,
    })
}

/// `x(t) = A0 sin(ωt+θ) / (1 − (k A0 / D) cos(ωt+θ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSolution {
    pub a0: f64,
    pub theta: f64,
    pub k: f64,
    pub omega: f64,
    pub denom_scale: f64,
}

impl ClosedFormSolution {
    pub fn new(a0: f64, theta: f64, k: f64, omega: f64, denom_scale: f64) -> Result<Self> {
        let sol = ClosedFormSolution {
            a0,
            theta,
            k,
            omega,
            denom_scale,
        };
        if ![a0, theta, k, omega].iter().all(|v| v.is_finite()) || !(omega > 0.0) {
            return invalid("closed-form parameters must be finite with omega > 0");
        }
        let q = sol.eccentricity();
        if !(q.abs() < 1.0) {
            return invalid(format!(
                "|k*A0/D| = {} must be < 1 for a nonvanishing denominator",
                q.abs()
            ));
        }
        Ok(sol)
    }

    /// The closed form passing through the turning point `(x0, 0)` at `t = 0`, with `D = 3ω`.
    ///
    /// Every finite turning point lies on an admissible orbit: `q² = x0²k² / (9ω² + x0²k²) < 1`.
    pub fn through_turning_point(params: IsochronousParams, x0: f64) -> Result<Self> {
        params.validate()?;
        if !(x0.is_finite() && x0 != 0.0) {
            return invalid("turning-point amplitude must be finite and nonzero");
        }
        let d = 3.0 * params.omega;
        if params.k == 0.0 {
            return ClosedFormSolution::new(x0, PI / 2.0, 0.0, params.omega, d);
        }
        let kx = params.k * x0;
        let q = kx.signum() * (kx * kx / (d * d + kx * kx)).sqrt();
        let a0 = q * d / params.k;
        ClosedFormSolution::new(a0, q.acos(), params.k, params.omega, d)
    }

    /// `q = k A0 / D`.
    pub fn eccentricity(&self) -> f64 {
        self.k * self.a0 / self.denom_scale
    }

    pub fn eval(&self, t: f64) -> f64 {
        let phi = self.omega * t + self.theta;
        self.a0 * phi.sin() / (1.0 - self.eccentricity() * phi.cos())
    }

    /// `ẋ = ω A0 (cos φ − q) / (1 − q cos φ)²`.
    pub fn velocity(&self, t: f64) -> f64 {
        let phi = self.omega * t + self.theta;
        let q = self.eccentricity();
        let den = 1.0 - q * phi.cos();
        self.omega * self.a0 * (phi.cos() - q) / (den * den)
    }

    /// `ẍ = −ω² A0 sin φ (1 + q cos φ − 2q²) / (1 − q cos φ)³`.
    pub fn acceleration(&self, t: f64) -> f64 {
        let phi = self.omega * t + self.theta;
        let q = self.eccentricity();
        let den = 1.0 - q * phi.cos();
        -self.omega * self.omega * self.a0 * phi.sin() * (1.0 + q * phi.cos() - 2.0 * q * q)
            / (den * den * den)
    }

    pub fn state(&self, t: f64) -> StateClassical {
        StateClassical {
            x: self.eval(t),
            v: self.velocity(t),
            t,
        }
    }

    /// `|ẍ + kxẋ + ω²x + (k²/9)x³|` with the analytic derivatives.
    pub fn ode_residual(&self, t: f64) -> f64 {
        let x = self.eval(t);
        let v = self.velocity(t);
        let a = self.acceleration(t);
        let k = self.k;
        (a + k * x * v + self.omega * self.omega * x + k * k / 9.0 * x * x * x).abs()
    }

    /// Maximum residual over one period sampled at `n` points.
    pub fn max_residual(&self, n: usize) -> f64 {
        let period = 2.0 * PI / self.omega;
        (0..n)
            .map(|i| self.ode_residual(period * i as f64 / n as f64))
            .fold(0.0, f64::max)
    }
}

pub fn eval_closed_form(sol: &ClosedFormSolution, t: f64) -> f64 {
    sol.eval(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DenominatorCandidate {
    /// `D = 3ω`
    ThreeOmega,
    /// `D = 3θ`
    ThreeTheta,
}

/// Outcome of testing both candidate denominator constants against the ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenominatorResolution {
    pub chosen: DenominatorCandidate,
    pub denom_scale: f64,
    pub residual_three_omega: f64,
    pub residual_three_theta: f64,
}

/// Samples per period for the residual sweep.
pub const RESIDUAL_SAMPLES: usize = 4096;

fn candidate_residual(k: f64, omega: f64, a0: f64, theta: f64, d: f64) -> f64 {
    match ClosedFormSolution::new(a0, theta, k, omega, d) {
        Ok(sol) => sol.max_residual(RESIDUAL_SAMPLES),
        Err(_) => f64::INFINITY,
    }
}

/// Picks `D ∈ {3ω, 3θ}` minimising the maximal ODE residual over one period.
/// Ties (including `θ = ω`) resolve to `3ω`.
pub fn resolve_denominator(
    k: f64,
    omega: f64,
    a0: f64,
    theta: f64,
) -> Result<DenominatorResolution> {
    if k == 0.0 || a0 == 0.0 {
        return invalid("resolve_denominator needs k != 0 and A0 != 0");
    }
    if !(omega > 0.0) || !theta.is_finite() || !k.is_finite() || !a0.is_finite() {
        return invalid("resolve_denominator needs finite parameters with omega > 0");
    }
    let r_omega = candidate_residual(k, omega, a0, theta, 3.0 * omega);
    let r_theta = if theta == omega {
        r_omega
    } else {
        candidate_residual(k, omega, a0, theta, 3.0 * theta)
    };
    let (chosen, denom_scale) = if r_theta < r_omega {
        (DenominatorCandidate::ThreeTheta, 3.0 * theta)
    } else {
        (DenominatorCandidate::ThreeOmega, 3.0 * omega)
    };
    Ok(DenominatorResolution {
        chosen,
        denom_scale,
        residual_three_omega: r_omega,
        residual_three_theta: r_theta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Inadmissible(String),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub amplitude: f64,
    pub period: Option<f64>,
    pub deviation: Option<f64>,
    /// Set when `deviation > 10·tol`.
    pub flagged: bool,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub reference_period: f64,
    pub tolerance: f64,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn max_deviation(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.deviation)
            .reduce(f64::max)
    }

    /// CSV with header `amplitude,period,deviation,flagged`; unmeasured rows carry NaN.
    /// CSV `amplitude,period,deviation,flagged,status`; missing values are `NaN`.
    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let status = match &r.status {
                    RowStatus::Ok => "ok",
                    RowStatus::Inadmissible(_) => "inadmissible",
                    RowStatus::Failed(_) => "failed",
                };
                vec![
                    fmt_f64(r.amplitude),
                    fmt_f64(r.period.unwrap_or(f64::NAN)),
                    fmt_f64(r.deviation.unwrap_or(f64::NAN)),
                    r.flagged.to_string(),
                    status.to_string(),
                ]
            })
            .collect();
        csv_records(&["amplitude", "period", "deviation", "flagged", "status"], &rows)
    }
}

/// Number of reference periods integrated per amplitude.
pub const SCAN_PERIODS: f64 = 6.0;

fn scan_row(system: &LienardSystem, amplitude: f64, reference: f64, tol: f64) -> ScanRow {
    let measured = integrate(
        system,
        StateClassical {
            x: amplitude,
            v: 0.0,
            t: 0.0,
        },
        SCAN_PERIODS * reference,
        tol,
    )
    .and_then(|traj| measure_period(&traj));
    match measured {
        Ok(est) => {
            let deviation = (est.period - reference).abs();
            ScanRow {
                amplitude,
                period: Some(est.period),
                deviation: Some(deviation),
                flagged: deviation > 10.0 * tol,
                status: RowStatus::Ok,
            }
        }
        Err(e) => ScanRow {
            amplitude,
            period: None,
            deviation: None,
            flagged: true,
            status: RowStatus::Failed(e.to_string()),
        },
    }
}

/// Period versus turning-point amplitude `x(0) = A, ẋ(0) = 0`, compared with the
/// small-oscillation period `2π/√g'(0)`.
pub fn isochronicity_scan(
    system: &LienardSystem,
    amplitudes: &[f64],
    tol: f64,
) -> Result<ScanTable> {
    if amplitudes.is_empty() {
        return invalid("amplitude list is empty");
    }
    if !(tol.is_finite() && tol > 0.0) {
        return invalid(format!("tolerance must be > 0, got {tol}"));
    }
    let omega = system
        .linear_frequency()
        .ok_or_else(|| Error::InvalidParameter("g'(0) must be positive for oscillations".into()))?;
    let reference = 2.0 * PI / omega;
    let rows = amplitudes
        .par_iter()
        .map(|&a| {
            if !(a.is_finite() && a != 0.0) {
                ScanRow {
                    amplitude: a,
                    period: None,
                    deviation: None,
                    flagged: true,
                    status: RowStatus::Inadmissible("amplitude must be finite and nonzero".into()),
                }
            } else {
                scan_row(system, a, reference, tol)
            }
        })
        .collect();
    Ok(ScanTable {
        reference_period: reference,
        tolerance: tol,
        rows,
    })
}

/// [`isochronicity_scan`] for the isochronous family, with each amplitude first mapped to its
/// closed-form orbit (`D = 3ω`) to check `|k A0 / 3ω| < 1`.
pub fn isochronicity_scan_params(
    params: IsochronousParams,
    amplitudes: &[f64],
    tol: f64,
) -> Result<ScanTable> {
    let system = crate::model::expand_isochronous(params)?;
    let mut table = isochronicity_scan(&system, amplitudes, tol)?;
    for row in &mut table.rows {
        if let RowStatus::Ok = row.status {
            if let Err(e) = ClosedFormSolution::through_turning_point(params, row.amplitude) {
                row.status = RowStatus::Inadmissible(e.to_string());
                row.flagged = true;
            }
        }
    }
    Ok(table)
}
