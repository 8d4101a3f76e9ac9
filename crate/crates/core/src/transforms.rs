//! Levinson–Smith equations `z̈ + J(z) ż² + F(z) ż + G(z) = 0`, their reduction to
//! Liénard form and the nonlocal map `dX/X = A(z) dz + B(z) dt` to a harmonic oscillator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, IntegrationError, Result};
use crate::model::{LienardSystem, Poly, StateClassical};
use crate::ode::{self, DenseSolution, OdeOptions, StepControl};

/// Sparse Laurent polynomial in `z`, stored with ascending unique powers and no zero terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(i32, f64)>", into = "Vec<(i32, f64)>")]
pub struct Laurent {
    terms: Vec<(i32, f64)>,
}

impl Laurent {
    pub fn new(terms: Vec<(i32, f64)>) -> Result<Self> {
        if terms.iter().any(|&(_, c)| !c.is_finite()) {
            return invalid("Laurent coefficients must be finite");
        }
        let mut sorted = terms;
        sorted.sort_by_key(|&(p, _)| p);
        if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return invalid("Laurent powers must be unique");
        }
        sorted.retain(|&(_, c)| c != 0.0);
        Ok(Laurent { terms: sorted })
    }

    /// Sums coefficients of repeated powers instead of rejecting them.
    fn collect(terms: impl IntoIterator<Item = (i32, f64)>) -> Self {
        let mut merged: Vec<(i32, f64)> = Vec::new();
        let mut all: Vec<(i32, f64)> = terms.into_iter().collect();
        all.sort_by_key(|&(p, _)| p);
        for (p, c) in all {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += c,
                _ => merged.push((p, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        Laurent { terms: merged }
    }

    pub fn monomial(power: i32, coeff: f64) -> Self {
        Laurent::collect([(power, coeff)])
    }

    pub fn terms(&self) -> &[(i32, f64)] {
        &self.terms
    }

    pub fn coeff(&self, power: i32) -> f64 {
        self.terms
            .iter()
            .find(|&&(p, _)| p == power)
            .map_or(0.0, |&(_, c)| c)
    }

    pub fn has_negative_powers(&self) -> bool {
        self.terms.first().is_some_and(|&(p, _)| p < 0)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.terms.iter().map(|&(p, c)| c * z.powi(p)).sum()
    }

    pub fn derivative(&self) -> Laurent {
        Laurent::collect(
            self.terms
                .iter()
                .filter(|&&(p, _)| p != 0)
                .map(|&(p, c)| (p - 1, c * p as f64)),
        )
    }

    /// `L(1/w)` as a Laurent polynomial in `w`, multiplied by `w^shift`.
    fn inverted(&self, shift: i32) -> Laurent {
        Laurent::collect(self.terms.iter().map(|&(p, c)| (shift - p, c)))
    }

    fn scaled(&self, s: f64) -> Laurent {
        Laurent::collect(self.terms.iter().map(|&(p, c)| (p, s * c)))
    }

    fn plus(&self, other: &Laurent) -> Laurent {
        Laurent::collect(self.terms.iter().chain(other.terms.iter()).copied())
    }

    /// Largest absolute coefficient difference.
    pub fn max_coeff_diff(&self, other: &Laurent) -> f64 {
        self.plus(&other.scaled(-1.0))
            .terms
            .iter()
            .fold(0.0, |m, &(_, c)| m.max(c.abs()))
    }
}

impl TryFrom<Vec<(i32, f64)>> for Laurent {
    type Error = Error;

    fn try_from(v: Vec<(i32, f64)>) -> Result<Self> {
        Laurent::new(v)
    }
}

impl From<Laurent> for Vec<(i32, f64)> {
    fn from(l: Laurent) -> Self {
        l.terms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevinsonSmithSystem {
    #[serde(rename = "J")]
    pub j: Laurent,
    #[serde(rename = "F")]
    pub f: Laurent,
    #[serde(rename = "G")]
    pub g: Laurent,
}

impl LevinsonSmithSystem {
    /// `z̈ = −J ż² − F ż − G`.
    pub fn rhs(&self, z: f64, v: f64) -> [f64; 2] {
        [v, -self.j.eval(z) * v * v - self.f.eval(z) * v - self.g.eval(z)]
    }

    pub fn excludes_origin(&self) -> bool {
        self.j.has_negative_powers() || self.f.has_negative_powers() || self.g.has_negative_powers()
    }

    /// The same equation in the chart `w = 1/z`, which covers `z = ±∞`.
    ///
    /// With `z = 1/w`: `ẅ + Jw ẇ² + Fw ẇ + Gw = 0`, where
    /// `Jw = −2/w − J(1/w)/w²`, `Fw = F(1/w)`, `Gw = −w² G(1/w)`.
    pub fn inverted_chart(&self) -> LevinsonSmithSystem {
        LevinsonSmithSystem {
            j: Laurent::monomial(-1, -2.0).plus(&self.j.inverted(-2).scaled(-1.0)),
            f: self.f.inverted(0),
            g: self.g.inverted(2).scaled(-1.0),
        }
    }
}

/// `J = −2/z`, `F = −α1/z`, `G = −c₋₁/z − c₁z`, with `Φ(z) = α2/z²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialCaseLS {
    pub alpha1: f64,
    pub alpha2: f64,
    pub c1: f64,
    pub c_minus1: f64,
}

impl SpecialCaseLS {
    pub fn validate(&self) -> Result<()> {
        if ![self.alpha1, self.alpha2, self.c1, self.c_minus1]
            .iter()
            .all(|v| v.is_finite())
        {
            return invalid("Levinson-Smith parameters must be finite");
        }
        if self.alpha2 == 0.0 {
            return invalid("alpha2 must be nonzero");
        }
        Ok(())
    }

    /// Parameters that reduce to `ẍ + kxẋ + ω²x + (k²/9)x³ = 0` for the given `α2`.
    pub fn for_isochronous(k: f64, omega: f64, alpha2: f64) -> Self {
        SpecialCaseLS {
            alpha1: k * alpha2,
            alpha2,
            c1: omega * omega,
            c_minus1: k * k / 9.0 * alpha2 * alpha2,
        }
    }

    pub fn to_levinson_smith(&self) -> LevinsonSmithSystem {
        LevinsonSmithSystem {
            j: Laurent::monomial(-1, -2.0),
            f: Laurent::monomial(-1, -self.alpha1),
            g: Laurent::collect([(-1, -self.c_minus1), (1, -self.c1)]),
        }
    }

    pub fn phi(&self, z: f64) -> f64 {
        self.alpha2 / (z * z)
    }
}

/// The reduced Liénard system and the coordinate map `x = −α2/z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub system: LienardSystem,
    pub alpha2: f64,
}

impl Reduction {
    pub fn x_of_z(&self, z: f64) -> f64 {
        -self.alpha2 / z
    }

    pub fn z_of_x(&self, x: f64) -> f64 {
        -self.alpha2 / x
    }

    /// `ẋ = Φ(z) ż`.
    pub fn xdot(&self, z: f64, zdot: f64) -> f64 {
        self.alpha2 * zdot / (z * z)
    }
}

/// `f = (α1/α2) x`, `g = (c₋₁/α2²) x³ + c₁ x`.
pub fn reduce_to_lienard(ls: &SpecialCaseLS) -> Result<Reduction> {
    ls.validate()?;
    let a2 = ls.alpha2;
    let system = LienardSystem::new(
        Poly::new(vec![(1, ls.alpha1 / a2)])?,
        Poly::new(vec![(1, ls.c1), (3, ls.c_minus1 / (a2 * a2))])?,
    );
    Ok(Reduction { system, alpha2: a2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    Z,
    InverseZ,
}

/// A Levinson–Smith trajectory integrated across `z = ±∞` by switching between the `z` and
/// `w = 1/z` charts.
pub struct ChartedTrajectory {
    segments: Vec<(Chart, DenseSolution<2>)>,
    pub chart_switches: usize,
}

impl ChartedTrajectory {
    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(0.0, |(_, s)| s.t_end())
    }

    fn segment(&self, t: f64) -> &(Chart, DenseSolution<2>) {
        let idx = self.segments.partition_point(|(_, s)| s.t_end() < t);
        &self.segments[idx.min(self.segments.len() - 1)]
    }

    /// `1/z(t)` and its time derivative, finite through the poles of `z`.
    pub fn inverse_z(&self, t: f64) -> (f64, f64) {
        let (chart, sol) = self.segment(t);
        let y = sol.eval(t);
        match chart {
            Chart::Z => (1.0 / y[0], -y[1] / (y[0] * y[0])),
            Chart::InverseZ => (y[0], y[1]),
        }
    }
}

/// Switch to the inverted chart when `|z|` exceeds this multiple of the reference scale,
/// and back at half of it.
const CHART_SWITCH_FACTOR: f64 = 10.0;
/// `|z|` below this fraction of the switch radius is treated as having reached `z = 0`.
const SINGULAR_FRACTION: f64 = 1e-9;

/// Integrates a Levinson–Smith equation from `(z0, ż0)`; reaching `z = 0` is reported as
/// [`Error::MapSingularity`].
pub fn integrate_levinson_smith(
    ls: &LevinsonSmithSystem,
    z0: f64,
    v0: f64,
    t_end: f64,
    tol: f64,
) -> Result<ChartedTrajectory> {
    if !(z0.is_finite() && v0.is_finite()) || z0 == 0.0 {
        return invalid("initial z must be finite and nonzero");
    }
    if !(t_end > 0.0 && tol > 0.0) {
        return invalid("t_end and tol must be positive");
    }
    let inv = ls.inverted_chart();
    let r_hi = CHART_SWITCH_FACTOR * z0.abs().max(1e-300);
    let r_lo = 0.5 * r_hi;
    let opts = OdeOptions::with_tol(tol);

    let mut segments = Vec::new();
    let mut t = 0.0;
    let (mut chart, mut y) = if z0.abs() <= r_hi {
        (Chart::Z, [z0, v0])
    } else {
        (Chart::InverseZ, [1.0 / z0, -v0 / (z0 * z0)])
    };

    while t < t_end {
        let sol = match chart {
            Chart::Z => ode::integrate_with(
                |_t, s: &[f64; 2]| ls.rhs(s[0], s[1]),
                t,
                y,
                t_end,
                &opts,
                |_t, s| {
                    // z cannot cross 0 along a solution; a sign change means a step jumped
                    // over the singularity.
                    if s[0] * y[0] <= 0.0 || s[0].abs() < SINGULAR_FRACTION * r_hi {
                        StepControl::Abort("z reached the singular point z = 0".into())
                    } else if s[0].abs() > r_hi {
                        StepControl::Stop
                    } else {
                        StepControl::Continue
                    }
                },
            )
            .map_err(|e| Error::MapSingularity { t: e.time() })?,
            Chart::InverseZ => ode::integrate_with(
                |_t, s: &[f64; 2]| inv.rhs(s[0], s[1]),
                t,
                y,
                t_end,
                &opts,
                |_t, s| {
                    if s[0].abs() > 1.0 / r_lo {
                        StepControl::Stop
                    } else {
                        StepControl::Continue
                    }
                },
            )
            .map_err(|e| match e {
                IntegrationError::Blowup { t, .. } => Error::MapSingularity { t },
                other => Error::Integration(other),
            })?,
        };
        t = sol.t_end();
        let end = sol.y_end();
        segments.push((chart, sol));
        if t >= t_end {
            break;
        }
        // Both charts share the same ODE form; swap coordinates.
        y = [1.0 / end[0], -end[1] / (end[0] * end[0])];
        chart = match chart {
            Chart::Z => Chart::InverseZ,
            Chart::InverseZ => Chart::Z,
        };
    }
    let chart_switches = segments.len() - 1;
    Ok(ChartedTrajectory {
        segments,
        chart_switches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    /// `sup |x_Liénard(t) + α2 / z(t)|` over the sample grid.
    pub discrepancy: f64,
    pub chart_switches: usize,
}

/// Samples per unit time used by the reduction check.
const CHECK_SAMPLES_PER_UNIT: f64 = 200.0;

/// Integrates the Levinson–Smith equation in `z` and the reduced Liénard equation from the
/// mapped initial data, and returns the sup-norm discrepancy of `x = −α2/z`.
pub fn numeric_reduction_check(
    ls: &SpecialCaseLS,
    z0: f64,
    v0: f64,
    t_end: f64,
    tol: f64,
) -> Result<ReductionCheck> {
    let red = reduce_to_lienard(ls)?;
    let lsys = ls.to_levinson_smith();
    let zt = integrate_levinson_smith(&lsys, z0, v0, t_end, tol)?;
    let x0 = red.x_of_z(z0);
    let xt = crate::dynamics::integrate_dense(
        &red.system,
        StateClassical {
            x: x0,
            v: red.xdot(z0, v0),
            t: 0.0,
        },
        t_end,
        tol,
    )?;
    let n = (t_end * CHECK_SAMPLES_PER_UNIT).ceil().max(2.0) as usize;
    let discrepancy = (0..=n)
        .map(|i| {
            let t = t_end * i as f64 / n as f64;
            let (w, _) = zt.inverse_z(t);
            (xt.eval(t)[0] + ls.alpha2 * w).abs()
        })
        .fold(0.0, f64::max);
    Ok(ReductionCheck {
        discrepancy,
        chart_switches: zt.chart_switches,
    })
}

/// Log-spaced residual grid on `[0.1, 10]`.
pub const CERT_GRID_POINTS: usize = 512;

pub fn certificate_grid() -> Vec<f64> {
    let (lo, hi) = (0.1f64.ln(), 10.0f64.ln());
    (0..CERT_GRID_POINTS)
        .map(|i| (lo + (hi - lo) * i as f64 / (CERT_GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// `A(z) = A_coeff/z`, `B(z) = B_coeff/z` mapping the equation to `Ẍ + Ω²X = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalCertificate {
    #[serde(rename = "A_coeff")]
    pub a_coeff: f64,
    #[serde(rename = "B_coeff")]
    pub b_coeff: f64,
    #[serde(rename = "Omega2")]
    pub omega2: f64,
    pub valid: bool,
    /// Sup-norms on the grid of `A' + A² − AJ`, `B' + 2AB − AF` and `B² − AG + Ω²`.
    pub residuals: [f64; 3],
    /// `G` required by the third condition.
    #[serde(rename = "required_G")]
    pub required_g: Laurent,
    /// Largest coefficient difference between the system's `G` and `required_G`.
    pub mismatch: f64,
}

impl NonlocalCertificate {
    pub fn a(&self) -> Laurent {
        Laurent::monomial(-1, self.a_coeff)
    }

    pub fn b(&self) -> Laurent {
        Laurent::monomial(-1, self.b_coeff)
    }
}

/// Relative coefficient tolerance for certificate validity.
pub const CERT_COEFF_TOL: f64 = 1e-12;

pub fn build_certificate(ls: &SpecialCaseLS, omega2: f64) -> Result<NonlocalCertificate> {
    ls.validate()?;
    if !(omega2.is_finite() && omega2 > 0.0) {
        return invalid(format!("Omega^2 must be > 0, got {omega2}"));
    }
    let sys = ls.to_levinson_smith();
    // Condition 1 with J = −2/z: A = −1/z. Condition 2 with F = −α1/z: B = −α1/(3z),
    // integration constant zero (a constant would make B² − AG depend on z).
    let a_coeff = -1.0;
    let b_coeff = -ls.alpha1 / 3.0;
    let a = Laurent::monomial(-1, a_coeff);
    let b = Laurent::monomial(-1, b_coeff);
    let required_g = Laurent::collect([
        (-1, -ls.alpha1 * ls.alpha1 / 9.0),
        (1, -omega2),
    ]);

    let (da, db) = (a.derivative(), b.derivative());
    let mut residuals = [0.0f64; 3];
    for z in certificate_grid() {
        let (av, bv) = (a.eval(z), b.eval(z));
        let r1 = da.eval(z) + av * av - av * sys.j.eval(z);
        let r2 = db.eval(z) + 2.0 * av * bv - av * sys.f.eval(z);
        let r3 = bv * bv - av * sys.g.eval(z) + omega2;
        residuals[0] = residuals[0].max(r1.abs());
        residuals[1] = residuals[1].max(r2.abs());
        residuals[2] = residuals[2].max(r3.abs());
    }

    let mismatch = sys.g.max_coeff_diff(&required_g);
    let scale = required_g
        .terms()
        .iter()
        .chain(sys.g.terms())
        .fold(1.0f64, |m, &(_, c)| m.max(c.abs()));
    Ok(NonlocalCertificate {
        a_coeff,
        b_coeff,
        omega2,
        valid: mismatch <= CERT_COEFF_TOL * scale,
        residuals,
        required_g,
        mismatch,
    })
}

/// Reconstructs `X(t) = (1/z) exp(∫ B(z) dt)` along a simulated trajectory, with the time
/// integral by the trapezoidal rule on a uniform grid of spacing `dt`.
pub fn reconstruct_harmonic(
    ls: &SpecialCaseLS,
    cert: &NonlocalCertificate,
    z0: f64,
    v0: f64,
    t_end: f64,
    dt: f64,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(dt > 0.0 && dt < t_end) {
        return invalid("dt must lie in (0, t_end)");
    }
    let zt = integrate_levinson_smith(&ls.to_levinson_smith(), z0, v0, t_end, tol)?;
    let n = (t_end / dt).round() as usize;
    let h = t_end / n as f64;
    // B(z) = b/z = b·w is finite through the poles of z.
    let b_of = |t: f64| cert.b_coeff * zt.inverse_z(t).0;
    let mut out = Vec::with_capacity(n + 1);
    let mut integral = 0.0;
    let mut prev = b_of(0.0);
    out.push((0.0, zt.inverse_z(0.0).0));
    for i in 1..=n {
        let t = i as f64 * h;
        let cur = b_of(t);
        integral += 0.5 * h * (prev + cur);
        prev = cur;
        out.push((t, zt.inverse_z(t).0 * integral.exp()));
    }
    Ok(out)
}

/// `max |Ẍ + Ω²X| / max |X|` with a central second difference on uniform samples.
pub fn harmonic_residual(samples: &[(f64, f64)], omega2: f64) -> f64 {
    if samples.len() < 3 {
        return f64::NAN;
    }
    let h = samples[1].0 - samples[0].0;
    let scale = samples.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
    samples
        .windows(3)
        .map(|w| ((w[0].1 - 2.0 * w[1].1 + w[2].1) / (h * h) + omega2 * w[1].1).abs())
        .fold(0.0, f64::max)
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reduction_of_isochronous_parameters() {
        for alpha2 in [1.0, -0.5, 2.0] {
            let ls = SpecialCaseLS::for_isochronous(3.0, 1.0, alpha2);
            let red = reduce_to_lienard(&ls).unwrap();
            assert!((red.system.f_coeffs.coeff(1) - 3.0).abs() < 1e-15);
            assert!((red.system.g_coeffs.coeff(1) - 1.0).abs() < 1e-15);
            assert!((red.system.g_coeffs.coeff(3) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reduction_harmonic_and_k2() {
        let ls = SpecialCaseLS { alpha1: 0.0, alpha2: 1.3, c1: 4.0, c_minus1: 0.0 };
        let red = reduce_to_lienard(&ls).unwrap();
        assert!(red.system.is_undamped());
        assert_eq!(red.system.g_coeffs.terms(), &[(1, 4.0)]);

        let ls = SpecialCaseLS { alpha1: 2.0, alpha2: 1.0, c1: 1.0, c_minus1: 4.0 / 9.0 };
        let red = reduce_to_lienard(&ls).unwrap();
        assert_eq!(red.system.f_coeffs.terms(), &[(1, 2.0)]);
        assert_eq!(red.system.g_coeffs.terms(), &[(1, 1.0), (3, 4.0 / 9.0)]);
        let table = crate::dynamics::isochronicity_scan(&red.system, &[0.1, 0.4, 0.8], 1e-10).unwrap();
        assert!(table.max_deviation().unwrap() < 1e-6);

        let bad = SpecialCaseLS { alpha2: 0.0, ..ls };
        assert!(reduce_to_lienard(&bad).is_err());
    }

    #[test]
    fn map_composes_with_phi() {
        let ls = SpecialCaseLS::for_isochronous(3.0, 1.0, 0.7);
        let red = reduce_to_lienard(&ls).unwrap();
        // dx/dz = Φ(z)
        let z = -1.3;
        let h = 1e-6;
        let dxdz = (red.x_of_z(z + h) - red.x_of_z(z - h)) / (2.0 * h);
        assert!((dxdz - ls.phi(z)).abs() < 1e-8);
        assert!((red.z_of_x(red.x_of_z(z)) - z).abs() < 1e-15);
    }

    #[test]
    fn inverted_chart_of_special_case() {
        let ls = SpecialCaseLS { alpha1: 3.0, alpha2: 1.0, c1: 2.0, c_minus1: 0.5 };
        let inv = ls.to_levinson_smith().inverted_chart();
        assert!(inv.j.terms().is_empty());
        assert_eq!(inv.f.terms(), &[(1, -3.0)]);
        assert_eq!(inv.g.terms(), &[(1, 2.0), (3, 0.5)]);
        // Inverting twice restores the system.
        let back = inv.inverted_chart();
        assert_eq!(back, ls.to_levinson_smith());
    }

    #[test]
    fn reduction_check_isochronous() {
        let ls = SpecialCaseLS::for_isochronous(3.0, 1.0, 1.0);
        let chk = numeric_reduction_check(&ls, -1.0, 0.0, 6.0 * PI, 1e-12).unwrap();
        assert!(chk.discrepancy < 1e-6, "{chk:?}");
        assert!(chk.chart_switches >= 6);
    }

    #[test]
    fn reduction_check_harmonic() {
        let ls = SpecialCaseLS { alpha1: 0.0, alpha2: 1.0, c1: 1.0, c_minus1: 0.0 };
        let chk = numeric_reduction_check(&ls, -1.0, 0.0, 6.0 * PI, 1e-13).unwrap();
        assert!(chk.discrepancy < 1e-8, "{chk:?}");
    }

    #[test]
    fn reduction_check_singularity() {
        // x = −1/z = 0 with ẋ = −1 lies outside the bounded orbits for k = 3, ω = 1; x escapes
        // to −∞, i.e. z reaches 0.
        let ls = SpecialCaseLS::for_isochronous(3.0, 1.0, 1.0);
        let err = numeric_reduction_check(&ls, 0.5, -4.0, 20.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::MapSingularity { .. }), "{err:?}");
    }

    #[test]
    fn certificate_examples() {
        let alpha2 = 0.8;
        let ls = SpecialCaseLS { alpha1: 3.0 * alpha2, alpha2, c1: 1.0, c_minus1: alpha2 * alpha2 };
        let cert = build_certificate(&ls, 1.0).unwrap();
        assert!(cert.valid);
        assert_eq!(cert.a_coeff, -1.0);
        assert!((cert.b_coeff + alpha2).abs() < 1e-15);
        assert!(cert.residuals.iter().all(|&r| r < 1e-10), "{:?}", cert.residuals);

        let harmonic = SpecialCaseLS { alpha1: 0.0, alpha2: 1.0, c1: 2.0, c_minus1: 0.0 };
        let cert = build_certificate(&harmonic, 2.0).unwrap();
        assert!(cert.valid);
        assert_eq!(cert.b_coeff, 0.0);

        let perturbed = SpecialCaseLS { c_minus1: 1.1 * alpha2 * alpha2, ..ls };
        let cert = build_certificate(&perturbed, 1.0).unwrap();
        assert!(!cert.valid);
        assert!((cert.mismatch - 0.1 * alpha2 * alpha2).abs() < 1e-12);
        assert!(cert.residuals[2] > 1e-3);

        assert!(build_certificate(&ls, 0.0).is_err());
    }

    #[test]
    fn certificate_json_shape() {
        let ls = SpecialCaseLS::for_isochronous(3.0, 1.0, 1.0);
        let cert = build_certificate(&ls, 1.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&cert).unwrap();
        for key in ["A_coeff", "B_coeff", "Omega2", "valid", "residuals"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["residuals"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn laurent_basics() {
        let l = Laurent::new(vec![(-2, 1.0), (1, 3.0)]).unwrap();
        assert_eq!(l.eval(2.0), 0.25 + 6.0);
        assert_eq!(l.derivative().terms(), &[(-3, -2.0), (0, 3.0)]);
        assert!(l.has_negative_powers());
        assert!(Laurent::new(vec![(1, 1.0), (1, 1.0)]).is_err());
    }

    #[test]
    fn reconstructed_variable_is_harmonic() {
        let ls = SpecialCaseLS::for_isochronous(3.0, 1.0, 1.0);
        let cert = build_certificate(&ls, 1.0).unwrap();
        let xs = reconstruct_harmonic(&ls, &cert, -2.0, 0.3, 4.0 * PI, 1e-3, 1e-12).unwrap();
        let res = harmonic_residual(&xs, 1.0);
        assert!(res < 1e-5, "{res}");

        // Without the B(z) factor the plain 1/z is not harmonic.
        let bare = NonlocalCertificate { b_coeff: 0.0, ..cert };
        let xs = reconstruct_harmonic(&ls, &bare, -2.0, 0.3, 4.0 * PI, 1e-3, 1e-12).unwrap();
        assert!(harmonic_residual(&xs, 1.0) > 1e-2);
    }

    #[test]
    fn certificate_validity_matches_isochronicity() {
        // (α1, α2, c1, c₋₁, Ω²): valid certificates reduce to isochronous Liénard systems,
        // an invalid one to a system whose period depends on amplitude.
        let cases = [
            (SpecialCaseLS::for_isochronous(3.0, 1.0, 0.5), 1.0, true),
            (SpecialCaseLS::for_isochronous(2.0, 1.5, -1.0), 2.25, true),
            (SpecialCaseLS { alpha1: 3.0, alpha2: 1.0, c1: 1.0, c_minus1: 0.5 }, 1.0, false),
        ];
        for (ls, omega2, expect_valid) in cases {
            let cert = build_certificate(&ls, omega2).unwrap();
            assert_eq!(cert.valid, expect_valid, "{ls:?}");
            let red = reduce_to_lienard(&ls).unwrap();
            let table = crate::dynamics::isochronicity_scan(&red.system, &[0.1, 0.3, 0.5], 1e-10).unwrap();
            let dev = table.max_deviation().unwrap();
            if expect_valid {
                assert!(dev < 1e-6, "{dev}");
            } else {
                assert!(dev > 1e-4, "{dev}");
            }
        }
    }
}
