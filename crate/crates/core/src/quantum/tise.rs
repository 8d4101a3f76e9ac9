//! Consistency of the momentum-space von Roos equation with its reduced constant-mass form.
//!
//! With `m = μ/p̃`, `p̃ = ηs²` and `φ(s) = √s ψ(ηs²)`,
//! `(Ĥψ − Eψ)(ηs²) = (c²/κ) s^{−1/2} (−φ'' + V_eff φ − 𝓔φ)(s)`, where `c = (ℓ+1)/ℓ`,
//! `κ = 8μη` and `𝓔 = κE/c²`.

use serde::{Deserialize, Serialize};

use super::{effective_potential, EffectivePotential, OrderingScheme};
use crate::error::{invalid, Result};
use crate::hamiltonian::{mass_potential, ClassTag, HamiltonianModel, MassPotentialProfile};

/// `m(p̃) = coeff·p̃^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassLaw {
    pub coeff: f64,
    pub power: f64,
}

impl MassLaw {
    /// `(m, m', m'')`.
    fn derivatives(&self, p: f64) -> (f64, f64, f64) {
        let (c, a) = (self.coeff, self.power);
        (
            c * p.powf(a),
            c * a * p.powf(a - 1.0),
            c * a * (a - 1.0) * p.powf(a - 2.0),
        )
    }
}

/// `max |2(m'/m)² − m''/m|` on `p̃ ∈ [0.1, 10]`.
pub fn mass_identity_residual(mass: &MassLaw) -> f64 {
    (0..200)
        .map(|i| {
            let p = 0.1 + 9.9 * i as f64 / 199.0;
            let (m, m1, m2) = mass.derivatives(p);
            (2.0 * (m1 / m).powi(2) - m2 / m).abs()
        })
        .fold(0.0, f64::max)
}

/// `ψ(p̃) = exp(−(p̃ − centre)²/(2 width²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTest {
    pub centre: f64,
    pub width: f64,
}

impl GaussianTest {
    /// `(ψ, ψ', ψ'')`.
    fn eval(&self, p: f64) -> (f64, f64, f64) {
        let u = (p - self.centre) / self.width;
        let g = (-0.5 * u * u).exp();
        let w = self.width;
        (g, -u / w * g, (u * u - 1.0) / (w * w) * g)
    }
}

/// Left side of the momentum-space equation minus `Eψ`, for a general mass law.
fn von_roos_residual(
    mass: &MassLaw,
    pot: &MassPotentialProfile,
    scheme: &OrderingScheme,
    c: f64,
    energy: f64,
    test: &GaussianTest,
    p: f64,
) -> f64 {
    let (m, m1, m2) = mass.derivatives(p);
    let (psi, d1, d2) = test.eval(p);
    let (a, b) = (scheme.alpha, scheme.beta);
    let r = m1 / m;
    let bracket = d2 - r * d1
        + 0.5 * (b + 1.0) * (2.0 * r * r - m2 / m) * psi
        + a * (a + b + 1.0) * r * r * psi;
    -c * c / (2.0 * m) * bracket + pot.potential(p) * psi - energy * psi
}

/// Reduced operator `−φ'' + V_eff φ − 𝓔φ` at `s`, with `φ'' ` from the chain rule.
fn reduced_residual(eff: &EffectivePotential, eta: f64, reduced_energy: f64, test: &GaussianTest, s: f64) -> f64 {
    let p = eta * s * s;
    let (psi, d1, d2) = test.eval(p);
    let phi = s.sqrt() * psi;
    let phi2 = -0.25 * s.powf(-1.5) * psi + 4.0 * eta * s.sqrt() * d1 + 4.0 * eta * eta * s.powf(2.5) * d2;
    -phi2 + (eff.eval(s) - reduced_energy) * phi
}

/// Sup discrepancy, relative to the sup of the momentum-space residual, between the two
/// sides of the identity above for a Gaussian test function.
pub fn tise_reduction_check(model: &HamiltonianModel, scheme: &OrderingScheme, test: &GaussianTest) -> Result<f64> {
    let profile = mass_potential(model)?;
    let mass = MassLaw {
        coeff: profile.mass_coeff,
        power: -1.0,
    };
    let eff = effective_potential(model, scheme)?;
    reduction_discrepancy(model, &mass, &profile, &eff, scheme, test)
}

/// As [`tise_reduction_check`] with an explicit mass law; only `m ∝ 1/p̃` reduces.
pub fn reduction_discrepancy(
    model: &HamiltonianModel,
    mass: &MassLaw,
    profile: &MassPotentialProfile,
    eff: &EffectivePotential,
    scheme: &OrderingScheme,
    test: &GaussianTest,
) -> Result<f64> {
    if mass.power != -1.0 || !(mass.coeff > 0.0) {
        return invalid(format!(
            "the reduction needs m(p~) = mu/p~ with mu > 0, got {}·p~^{}",
            mass.coeff, mass.power
        ));
    }
    if !(test.centre > 0.0 && test.width > 0.0) {
        return invalid("Gaussian test function needs positive centre and width");
    }
    let mu = mass.coeff;
    let k = match model.params {
        crate::hamiltonian::ModelParams::Isochronous(p) => p.k,
        _ => return invalid("the reduction is defined for classes I+, I- and II"),
    };
    let eta = match model.class_tag {
        ClassTag::IPlus | ClassTag::IMinus => k / 24.0,
        _ => k / 12.0,
    };
    let c = model.bracket_const;
    let kappa = 8.0 * mu * eta;
    let energy = 1.3;
    let reduced_energy = kappa * energy / (c * c);

    // Interior grid covering the bulk of the test function.
    let lo = ((test.centre - 6.0 * test.width).max(0.05 * test.centre) / eta).sqrt();
    let hi = ((test.centre + 6.0 * test.width) / eta).sqrt();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..=400 {
        let s = lo + (hi - lo) * i as f64 / 400.0;
        let lhs = von_roos_residual(mass, profile, scheme, c, energy, test, eta * s * s);
        let rhs = c * c / kappa * s.powf(-0.5) * reduced_residual(eff, eta, reduced_energy, test, s);
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs());
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}
