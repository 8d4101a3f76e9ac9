//! Second-order finite differences on `[s_min, L]` with Dirichlet ends, Sturm-sequence
//! bisection and Richardson extrapolation over two nested grids.

use serde::{Deserialize, Serialize};

use super::spectrum::{SpectrumMethod, SpectrumResult};
use super::EffectivePotential;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_coarse: usize,
    pub n_fine: usize,
    /// Box length; chosen from the spectrum when `None`.
    pub length: Option<f64>,
    /// Left end as a fraction of `L` when the inverse-square term is present.
    pub s_min_fraction: f64,
    /// Relative tolerance on the Richardson error estimate.
    pub rel_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_coarse: 4000,
            n_fine: 8000,
            length: None,
            s_min_fraction: 1e-4,
            rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericMeta {
    pub n_coarse: usize,
    pub n_fine: usize,
    pub s_min: f64,
    pub length: f64,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub error_estimates: Vec<f64>,
}

/// Symmetric tridiagonal operator `−d²/ds² + V` on the interior nodes.
struct Discretization {
    s: Vec<f64>,
    diag: Vec<f64>,
    off: f64,
}

impl Discretization {
    fn new(pot: &EffectivePotential, s_min: f64, length: f64, n: usize) -> Self {
        let h = (length - s_min) / n as f64;
        let s: Vec<f64> = (1..n).map(|i| s_min + i as f64 * h).collect();
        let diag = s.iter().map(|&x| 2.0 / (h * h) + pot.eval(x)).collect();
        Discretization { s, diag, off: -1.0 / (h * h) }
    }

    /// Number of eigenvalues below `x`.
    fn sturm_count(&self, x: f64) -> usize {
        let e2 = self.off * self.off;
        let mut q = 1.0;
        let mut count = 0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 { d - x } else { d - x - e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (d.abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th eigenvalue (0-based), by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let lo0 = self.diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * self.off.abs();
        let mut lo = lo0;
        let mut step = 1.0f64;
        let mut hi = lo0 + step;
        while self.sturm_count(hi) <= k {
            lo = hi;
            step *= 2.0;
            hi = lo0 + step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T − σ) y = rhs` by the Thomas algorithm.
    fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let e = self.off;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let tiny = f64::EPSILON * self.off.abs();
        let mut denom = self.diag[0] - sigma;
        if denom.abs() < tiny {
            denom = tiny;
        }
        c[0] = e / denom;
        d[0] = rhs[0] / denom;
        for i in 1..n {
            let mut m = self.diag[i] - sigma - e * c[i - 1];
            if m.abs() < tiny {
                m = tiny;
            }
            c[i] = e / m;
            d[i] = (rhs[i] - e * d[i - 1]) / m;
        }
        let mut y = vec![0.0; n];
        y[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        y
    }
}

fn s_min_for(pot: &EffectivePotential, length: f64, spec: &GridSpec) -> f64 {
    if pot.invsq != 0.0 {
        spec.s_min_fraction * length
    } else {
        0.0
    }
}

/// Largest `s` with `V(s) ≤ e`, scanning outward.
fn outer_turning_point(pot: &EffectivePotential, e: f64, s_hi: f64) -> f64 {
    let n = 20_000;
    let mut last = 0.0;
    for i in 1..=n {
        let s = s_hi * i as f64 / n as f64;
        if pot.eval(s) <= e {
            last = s;
        }
    }
    last
}

/// Box length: `max(3·s_tp, 10/√quad)`, then grown until `V(L) ≥ 𝓔_max + 10√quad`.
fn choose_length(pot: &EffectivePotential, n_levels: usize, spec: &GridSpec) -> f64 {
    if let Some(l) = spec.length {
        return l;
    }
    let width = 10.0 / pot.quad.sqrt();
    let (centre, _) = pot.completed_square();
    let l0 = width + 2.0 * centre.max(0.0);
    let coarse = Discretization::new(pot, s_min_for(pot, l0, spec), l0, 1000);
    let e_max = coarse.eigenvalue(n_levels - 1);
    let tp = outer_turning_point(pot, e_max, 4.0 * l0);
    let mut length = (3.0 * tp).max(width);
    let margin = e_max + 10.0 * pot.quad.sqrt();
    while pot.eval(length) < margin {
        length *= 1.5;
    }
    length
}

fn check_spec(pot: &EffectivePotential, n_levels: usize, spec: &GridSpec) -> Result<()> {
    pot.validate()?;
    if n_levels == 0 {
        return invalid("at least one level must be requested");
    }
    if spec.n_coarse < 16 || spec.n_fine != 2 * spec.n_coarse {
        return invalid("the fine grid must have exactly twice the coarse intervals");
    }
    if let Some(l) = spec.length {
        if !(l > 0.0 && l.is_finite()) {
            return invalid("box length must be positive");
        }
    }
    if !(spec.rel_tol > 0.0) {
        return invalid("rel_tol must be positive");
    }
    Ok(())
}

/// The lowest `n_levels` eigenvalues of `−φ'' + Vφ = 𝓔φ` on the half-line with Dirichlet
/// conditions, Richardson-extrapolated from grids of `n_coarse` and `n_fine` intervals.
pub fn numeric_eigensolve(
    pot: &EffectivePotential,
    n_levels: usize,
    spec: &GridSpec,
) -> Result<SpectrumResult> {
    check_spec(pot, n_levels, spec)?;
    let length = choose_length(pot, n_levels, spec);
    let s_min = s_min_for(pot, length, spec);
    let (coarse, fine) = rayon::join(
        || {
            let d = Discretization::new(pot, s_min, length, spec.n_coarse);
            (0..n_levels).map(|k| d.eigenvalue(k)).collect::<Vec<_>>()
        },
        || {
            let d = Discretization::new(pot, s_min, length, spec.n_fine);
            (0..n_levels).map(|k| d.eigenvalue(k)).collect::<Vec<_>>()
        },
    );
    let mut reduced = Vec::with_capacity(n_levels);
    let mut estimates = Vec::with_capacity(n_levels);
    let floor = pot.quad.sqrt();
    for (level, (&e1, &e2)) in coarse.iter().zip(&fine).enumerate() {
        let est = (e2 - e1).abs() / 3.0;
        let e = e2 + (e2 - e1) / 3.0;
        if est > spec.rel_tol * e.abs().max(floor) {
            return Err(Error::Unconverged {
                level,
                coarse: e1,
                fine: e2,
                estimate: est,
            });
        }
        reduced.push(e);
        estimates.push(est);
    }
    let factor = pot.energy_factor();
    Ok(SpectrumResult {
        energies: reduced.iter().map(|e| factor * e).collect(),
        reduced,
        method: SpectrumMethod::Numeric,
        meta: Some(NumericMeta {
            n_coarse: spec.n_coarse,
            n_fine: spec.n_fine,
            s_min,
            length,
            coarse,
            fine,
            error_estimates: estimates,
        }),
    })
}

/// Eigenvector of level `level` on the fine grid by inverse iteration, normalized to unit
/// L² norm (trapezoidal rule, Dirichlet end values included) with a positive first lobe.
/// Returns `(s, φ, 𝓔_fine)`, including both boundary nodes.
pub fn numeric_eigenvector(
    pot: &EffectivePotential,
    level: usize,
    spec: &GridSpec,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    check_spec(pot, level + 1, spec)?;
    let length = choose_length(pot, level + 1, spec);
    let s_min = s_min_for(pot, length, spec);
    let d = Discretization::new(pot, s_min, length, spec.n_fine);
    let e = d.eigenvalue(level);
    let sigma = e + 1e-9 * e.abs().max(1.0);
    let mut y = vec![1.0; d.diag.len()];
    for _ in 0..4 {
        y = d.solve_shifted(sigma, &y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
    }
    let h = (length - s_min) / spec.n_fine as f64;
    let mut s = Vec::with_capacity(d.s.len() + 2);
    s.push(s_min);
    s.extend_from_slice(&d.s);
    s.push(length);
    let mut phi = Vec::with_capacity(s.len());
    phi.push(0.0);
    phi.extend_from_slice(&y);
    phi.push(0.0);
    let norm = (phi.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
    let first = phi
        .iter()
        .find(|v| v.abs() > 1e-3 * phi.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .copied()
        .unwrap_or(1.0);
    let sign = first.signum() / norm;
    phi.iter_mut().for_each(|v| *v *= sign);
    Ok((s, phi, e))
}
