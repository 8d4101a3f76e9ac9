//! Momentum-space quantization with von Roos ordering, reduced to constant-mass
//! Schrödinger problems on the half-line `s > 0`.

mod boundstate;
mod eigen;
mod special;
mod spectrum;
mod tise;

pub use boundstate::{
    adjudicate_hermite_argument, boundstate_scan_i, hermite_condition, shifted_harmonic_level,
    Adjudication,
    BoundStateRow, BoundStateScan, HermiteArgument, HermiteCondition,
};
pub use eigen::{numeric_eigensolve, numeric_eigenvector, GridSpec, NumericMeta};
pub use special::{hermite, hermite_coefficients, kummer_series, kummer_terminating};
pub use spectrum::{
    closed_form_spectrum_ii, eigenfunction_ii, isotonic_parameters, isotonic_spectrum,
    SpectrumMethod, SpectrumResult, WaveFunction, WaveGrid,
};
pub use tise::{
    mass_identity_residual, reduction_discrepancy, tise_reduction_check, GaussianTest, MassLaw,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hamiltonian::{ClassTag, HamiltonianModel, ModelParams};

/// `(α, β, γ)` with `α + β + γ = −1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingScheme {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

pub const PRESET_NAMES: [&str; 5] = [
    "ben-daniel-duke",
    "gora-williams",
    "zhu-kroemer",
    "li-kuhn",
    "mustafa",
];

impl OrderingScheme {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let s = OrderingScheme {
            alpha,
            beta,
            gamma,
            name: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let sum = self.alpha + self.beta + self.gamma;
        if !sum.is_finite() || (sum + 1.0).abs() > 1e-15 {
            return invalid(format!(
                "ordering parameters must satisfy alpha + beta + gamma = -1, got sum {sum}"
            ));
        }
        Ok(())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (a, b, g, canonical) = match name.to_ascii_lowercase().as_str() {
            "ben-daniel-duke" | "bdd" => (0.0, -1.0, 0.0, "ben-daniel-duke"),
            "gora-williams" => (-1.0, 0.0, 0.0, "gora-williams"),
            "zhu-kroemer" => (-0.5, 0.0, -0.5, "zhu-kroemer"),
            "li-kuhn" => (0.0, -0.5, -0.5, "li-kuhn"),
            "mustafa" | "mustafa-mazharimousavi" => (-0.25, -0.5, -0.25, "mustafa"),
            _ => {
                return invalid(format!(
                    "unknown ordering preset '{name}'; valid presets: {}",
                    PRESET_NAMES.join(", ")
                ))
            }
        };
        Ok(OrderingScheme {
            alpha: a,
            beta: b,
            gamma: g,
            name: Some(canonical.to_string()),
        })
    }

    /// `ε = 4αγ = −4α(α+β+1)`.
    pub fn epsilon(&self) -> f64 {
        4.0 * self.alpha * self.gamma
    }
}

pub fn epsilon_of(scheme: &OrderingScheme) -> Result<f64> {
    scheme.validate()?;
    Ok(scheme.epsilon())
}

/// `V(s) = quad·s² + lin·s + invsq/s² + shift` on `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectivePotential {
    pub quad: f64,
    pub lin: f64,
    pub invsq: f64,
    pub shift: f64,
    /// `None` for potentials not derived from a Hamiltonian class.
    pub class_tag: Option<ClassTag>,
}

impl EffectivePotential {
    pub fn custom(quad: f64, lin: f64, invsq: f64, shift: f64) -> Result<Self> {
        let p = EffectivePotential {
            quad,
            lin,
            invsq,
            shift,
            class_tag: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.quad, self.lin, self.invsq, self.shift]
            .iter()
            .all(|v| v.is_finite())
        {
            return invalid("effective potential coefficients must be finite");
        }
        if !(self.quad > 0.0) {
            return invalid(format!("quadratic coefficient must be > 0, got {}", self.quad));
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.quad * s * s + self.lin * s + self.invsq / (s * s) + self.shift
    }

    /// Centre `s₀` and constant `c` of the completed square `quad·(s − s₀)² + c` (without
    /// the inverse-square term).
    pub fn completed_square(&self) -> (f64, f64) {
        let s0 = -self.lin / (2.0 * self.quad);
        (s0, self.shift - self.quad * s0 * s0)
    }

    /// Factor taking reduced eigenvalues to physical energies, `E = factor·𝓔`.
    pub fn energy_factor(&self) -> f64 {
        match self.class_tag {
            Some(ClassTag::IPlus | ClassTag::IMinus) => 4.0,
            Some(ClassTag::II) => 0.25,
            _ => 1.0,
        }
    }
}

/// Class I±: `(ω²/64)ξ² ∓ √(k/6) ξ/8 + (ε − ¼)/ξ²` (η = k/24).
/// Class II: `ω²ζ² + (ε − ¼ + 96/k)/ζ²` (ρ = k/12).
pub fn effective_potential(model: &HamiltonianModel, scheme: &OrderingScheme) -> Result<EffectivePotential> {
    scheme.validate()?;
    let eps = scheme.epsilon();
    if eps < 0.0 {
        return invalid(format!(
            "epsilon = {eps} < 0 (attractive inverse-square collapse) is not supported"
        ));
    }
    let ModelParams::Isochronous(p) = model.params else {
        return invalid("effective potentials are defined for classes I+, I- and II");
    };
    if !(p.k > 0.0) {
        return invalid(format!("quantization requires k > 0, got {}", p.k));
    }
    let (k, w) = (p.k, p.omega);
    let (quad, lin, invsq) = match model.class_tag {
        ClassTag::IPlus => (w * w / 64.0, -(k / 6.0).sqrt() / 8.0, eps - 0.25),
        ClassTag::IMinus => (w * w / 64.0, (k / 6.0).sqrt() / 8.0, eps - 0.25),
        ClassTag::II => (w * w, 0.0, eps - 0.25 + 96.0 / k),
        _ => return invalid("effective potentials are defined for classes I+, I- and II"),
    };
    Ok(EffectivePotential {
        quad,
        lin,
        invsq,
        shift: 0.0,
        class_tag: Some(model.class_tag),
    })
}
