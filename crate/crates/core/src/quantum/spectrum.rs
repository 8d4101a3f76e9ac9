//! Closed-form class-II spectrum, the isotonic oscillator and the class-II eigenfunctions.

use serde::{Deserialize, Serialize};

use super::eigen::NumericMeta;
use super::special::kummer_terminating;
use crate::error::{invalid, Error, Result};
use crate::format::{csv_records, csv_string, fmt_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpectrumMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Physical energies, ascending.
    pub energies: Vec<f64>,
    /// Eigenvalues `𝓔` of the reduced constant-mass problem.
    pub reduced: Vec<f64>,
    pub method: SpectrumMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<NumericMeta>,
}

impl SpectrumResult {
    /// CSV `n,E_closed,E_numeric,abs_err` pairing two results level by level; a missing
    /// side leaves its fields empty.
    pub fn comparison_csv(closed: Option<&SpectrumResult>, numeric: Option<&SpectrumResult>) -> String {
        let len = closed
            .map_or(0, |c| c.energies.len())
            .max(numeric.map_or(0, |n| n.energies.len()));
        let rows: Vec<Vec<String>> = (0..len)
            .map(|i| {
                // Missing methods leave empty fields.
                let c = closed.and_then(|c| c.energies.get(i)).copied();
                let n = numeric.and_then(|n| n.energies.get(i)).copied();
                let err = c.zip(n).map(|(c, n)| (c - n).abs());
                vec![i.to_string(), opt(c), opt(n), opt(err)]
            })
            .collect();
        csv_records(&["n", "E_closed", "E_numeric", "abs_err"], &rows)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn check_radicand(k: f64, omega: f64, epsilon: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return invalid(format!("quantization requires k > 0, got {k}"));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return invalid(format!("omega must be > 0, got {omega}"));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return invalid(format!("epsilon must be >= 0, got {epsilon}"));
    }
    let rad = epsilon + 96.0 / k;
    if rad < 0.0 {
        return invalid(format!("negative radicand epsilon + 96/k = {rad}"));
    }
    Ok(rad)
}

/// `Eₙ = ω(n + ½ + ½√(ε + 96/k))`, with reduced eigenvalues `𝓔ₙ = 4Eₙ`.
pub fn closed_form_spectrum_ii(k: f64, omega: f64, epsilon: f64, n_max: usize) -> Result<SpectrumResult> {
    let rad = check_radicand(k, omega, epsilon)?;
    let energies: Vec<f64> = (0..=n_max)
        .map(|n| omega * (n as f64 + 0.5 + 0.5 * rad.sqrt()))
        .collect();
    Ok(SpectrumResult {
        reduced: energies.iter().map(|e| 4.0 * e).collect(),
        energies,
        method: SpectrumMethod::ClosedForm,
        meta: None,
    })
}

/// Levels of `−Θ'' + V₀(z/z₀ − z₀/z)² Θ = 𝓔Θ` on `z > 0`.
pub fn isotonic_spectrum(v0: f64, z0: f64, n_max: usize) -> Result<SpectrumResult> {
    if !(v0 > 0.0 && z0 > 0.0 && v0.is_finite() && z0.is_finite()) {
        return invalid(format!("V0 and z0 must be positive, got V0 = {v0}, z0 = {z0}"));
    }
    let sv = v0.sqrt();
    let offset = 0.25 * ((1.0 + 4.0 * v0 * z0 * z0).sqrt() - 2.0 * z0 * sv);
    let levels: Vec<f64> = (0..=n_max)
        .map(|n| 4.0 * sv / z0 * (n as f64 + 0.5 + offset))
        .collect();
    Ok(SpectrumResult {
        energies: levels.clone(),
        reduced: levels,
        method: SpectrumMethod::ClosedForm,
        meta: None,
    })
}

/// `(V₀, z₀)` with `V₀(s/z₀ − z₀/s)² + 2V₀ = ω²s² + g/s²`, i.e. `V₀ = ω√g`, `z₀² = √g/ω`.
pub fn isotonic_parameters(omega: f64, g: f64) -> Result<(f64, f64)> {
    if !(omega > 0.0 && g > 0.0) {
        return invalid(format!("isotonic mapping needs omega > 0 and g > 0, got {omega}, {g}"));
    }
    Ok((omega * g.sqrt(), (g.sqrt() / omega).sqrt()))
}

/// Uniform grid `s_j = j·s_max/(points−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveGrid {
    pub s_max: f64,
    pub points: usize,
}

impl WaveGrid {
    /// A grid reaching three times the classical turning point of level `n`.
    pub fn for_level(k: f64, omega: f64, epsilon: f64, n: usize) -> Result<Self> {
        let e = closed_form_spectrum_ii(k, omega, epsilon, n)?.reduced[n];
        let s_tp = (e / (omega * omega)).sqrt();
        Ok(WaveGrid {
            s_max: 3.0 * s_tp,
            points: 20_001,
        })
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.s_max / (self.points - 1) as f64;
        (0..self.points).map(|j| j as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
    /// `ψ = φ/√s`; zero at `s = 0`.
    pub psi: Vec<f64>,
    pub n: usize,
    pub nu: f64,
    /// Normalization constant applied to the unnormalized closed form.
    pub norm: f64,
    pub omega: f64,
}

impl WaveFunction {
    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<f64>> = (0..self.s.len())
            .map(|j| vec![self.s[j], self.phi[j], self.psi[j]])
            .collect();
        csv_string(&["s", "phi", "psi"], &rows)
    }

    /// Unnormalized `ζ^ν e^{−ωζ²/2} ₁F₁(−n; ν+½; ωζ²)`.
    pub fn raw(n: usize, nu: f64, omega: f64, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let x = omega * s * s;
        (nu * s.ln() - 0.5 * x).exp() * kummer_terminating(n, nu + 0.5, x)
    }

    /// Normalized closed form at any `s`.
    pub fn eval(&self, s: f64) -> f64 {
        WaveFunction::raw(self.n, self.nu, self.omega, s) / self.norm
    }

    /// Sign changes on the sample grid, ignoring samples below `1e-10·max|φ|`.
    pub fn node_count(&self) -> usize {
        let peak = self.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let signs: Vec<bool> = self
            .phi
            .iter()
            .filter(|v| v.abs() > 1e-10 * peak)
            .map(|&v| v > 0.0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

fn trapezoid(h: f64, v: &[f64]) -> f64 {
    let n = v.len();
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

/// Class-II eigenfunction `φₙ ∝ ζ^ν e^{−ωζ²/2} ₁F₁(−n; ν+½; ωζ²)`, `ν = ½ + √(ε + 96/k)`,
/// normalized by the trapezoidal rule.
pub fn eigenfunction_ii(k: f64, omega: f64, epsilon: f64, n: usize, grid: &WaveGrid) -> Result<WaveFunction> {
    let rad = check_radicand(k, omega, epsilon)?;
    if grid.points < 5 || !(grid.s_max > 0.0) {
        return invalid("wavefunction grid needs at least 5 points and s_max > 0");
    }
    let nu = 0.5 + rad.sqrt();
    let s = grid.nodes();
    let raw: Vec<f64> = s.iter().map(|&x| WaveFunction::raw(n, nu, omega, x)).collect();
    let h = s[1] - s[0];
    let sq: Vec<f64> = raw.iter().map(|v| v * v).collect();
    let fine = trapezoid(h, &sq);
    // The same rule on every other node must agree, and the tail must have decayed.
    let half: Vec<f64> = sq.iter().step_by(2).copied().collect();
    let coarse = trapezoid(2.0 * h, &half);
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if (fine - coarse).abs() > 1e-6 * fine || raw[raw.len() - 1].abs() > 1e-6 * peak {
        return Err(Error::GridTooCoarse(format!(
            "norm not converged for n = {n}: {fine:e} vs {coarse:e} on the half grid, tail {:e}",
            raw[raw.len() - 1] / peak
        )));
    }
    let norm = fine.sqrt();
    let phi: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let psi = s
        .iter()
        .zip(&phi)
        .map(|(&x, &p)| if x > 0.0 { p / x.sqrt() } else { 0.0 })
        .collect();
    Ok(WaveFunction {
        s,
        phi,
        psi,
        n,
        nu,
        norm,
        omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn class_ii_closed_form() {
        let r = closed_form_spectrum_ii(96.0, 1.0, 1.0, 4).unwrap();
        assert!((r.energies[0] - (0.5 + 0.5 * 2f64.sqrt())).abs() < 1e-15);
        for w in r.energies.windows(2) {
            assert!((w[1] - w[0] - 1.0).abs() < 1e-14);
        }
        assert_eq!(r.reduced[2], 4.0 * r.energies[2]);
        let big = closed_form_spectrum_ii(1e12, 1.0, 0.0, 0).unwrap();
        assert!((big.energies[0] - 0.5).abs() < 1e-5);
        assert!(closed_form_spectrum_ii(-1.0, 1.0, 1.0, 3).is_err());
        assert!(closed_form_spectrum_ii(1.0, 1.0, -0.5, 3).is_err());
    }

    #[test]
    fn epsilon_shifts_ground_state_only() {
        let mut last = f64::NEG_INFINITY;
        for eps in [0.0, 0.25, 1.0, 2.0] {
            let r = closed_form_spectrum_ii(2.0, 1.5, eps, 3).unwrap();
            assert!(r.energies[0] > last);
            last = r.energies[0];
            assert!((r.energies[3] - r.energies[2] - 1.5).abs() < 1e-14);
        }
    }

    #[test]
    fn isotonic_matches_class_ii() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let k = rng.gen_range(0.5..200.0);
            let w = rng.gen_range(0.2..3.0);
            let eps = rng.gen_range(0.0..2.0);
            let g = eps - 0.25 + 96.0 / k;
            let (v0, z0) = isotonic_parameters(w, g).unwrap();
            assert!((v0 / (z0 * z0) - w * w).abs() < 1e-12 * w * w);
            assert!((v0 * z0 * z0 - g).abs() < 1e-12 * g);
            let iso = isotonic_spectrum(v0, z0, 5).unwrap();
            let cls = closed_form_spectrum_ii(k, w, eps, 5).unwrap();
            for (a, b) in iso.reduced.iter().zip(&cls.reduced) {
                assert!((a + 2.0 * v0 - b).abs() < 1e-12 * b, "{a} + 2V0 vs {b}");
            }
            let sp = 4.0 * v0.sqrt() / z0;
            assert!(iso.reduced.windows(2).all(|p| (p[1] - p[0] - sp).abs() < 1e-12 * sp));
        }
        assert!(isotonic_spectrum(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn isotonic_harmonic_limit() {
        let (v0, z0) = isotonic_parameters(1.0, 1e-14).unwrap();
        let iso = isotonic_spectrum(v0, z0, 2).unwrap();
        for (e, want) in iso.reduced.iter().zip([3.0, 7.0, 11.0]) {
            assert!((e + 2.0 * v0 - want).abs() < 1e-6);
        }
    }

    fn five_point_residual(wf: &WaveFunction, g: f64, e: f64) -> f64 {
        let h = 1e-3;
        let w2 = wf.omega * wf.omega;
        let peak = wf.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s_max = wf.s[wf.s.len() - 1];
        (1..2000)
            .map(|i| {
                let s = 0.05 + (s_max - 0.1) * i as f64 / 2000.0;
                let f = |x: f64| wf.eval(x);
                let d2 = (-f(s + 2.0 * h) + 16.0 * f(s + h) - 30.0 * f(s) + 16.0 * f(s - h) - f(s - 2.0 * h))
                    / (12.0 * h * h);
                (-d2 + (w2 * s * s + g / (s * s) - e) * f(s)).abs() / peak
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn eigenfunctions_solve_the_reduced_equation() {
        let (k, w, eps) = (1.0, 1.0, 1.0);
        let spec = closed_form_spectrum_ii(k, w, eps, 3).unwrap();
        for n in 0..=3 {
            let grid = WaveGrid::for_level(k, w, eps, n).unwrap();
            let wf = eigenfunction_ii(k, w, eps, n, &grid).unwrap();
            assert_eq!(wf.node_count(), n);
            assert_eq!(wf.phi[0], 0.0);
            assert!(wf.phi[1].abs() < 1e-12);
            let r = five_point_residual(&wf, eps - 0.25 + 96.0 / k, spec.reduced[n]);
            assert!(r < 1e-6, "n={n} residual {r}");
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = WaveGrid { s_max: 3.0, points: 50 };
        assert!(matches!(eigenfunction_ii(1.0, 1.0, 1.0, 0, &grid), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn comparison_csv_shape() {
        let c = closed_form_spectrum_ii(1.0, 1.0, 1.0, 1).unwrap();
        let s = SpectrumResult::comparison_csv(Some(&c), Some(&c));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "n,E_closed,E_numeric,abs_err");
        assert!(lines[1].starts_with("0,"));
        assert!(lines[2].starts_with("1,"));
        let numeric_only = SpectrumResult::comparison_csv(None, Some(&c));
        assert!(numeric_only.lines().nth(1).unwrap().ends_with(","));
        assert!(!numeric_only.contains("NaN"));
    }
}
