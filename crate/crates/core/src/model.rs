//! Parameter families and the polynomial Liénard system they expand to.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sparse polynomial with non-negative integer powers, stored ascending.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u32, f64)>", into = "Vec<(u32, f64)>")]
pub struct Poly {
    terms: Vec<(u32, f64)>,
}

impl Poly {
    /// Builds a polynomial, rejecting duplicate powers and non-finite coefficients.
    /// Zero coefficients are dropped.
    pub fn new(mut terms: Vec<(u32, f64)>) -> Result<Self> {
        if terms.iter().any(|&(_, c)| !c.is_finite()) {
            return invalid("polynomial coefficients must be finite");
        }
        terms.sort_by_key(|&(p, _)| p);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return invalid("polynomial powers must be unique");
        }
        terms.retain(|&(_, c)| c != 0.0);
        Ok(Poly { terms })
    }

    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.last().map(|&(p, _)| p)
    }

    /// Coefficient of `x^power` (zero when absent).
    pub fn coeff(&self, power: u32) -> f64 {
        self.terms
            .iter()
            .find(|&&(p, _)| p == power)
            .map_or(0.0, |&(_, c)| c)
    }

    /// Horner evaluation over the sparse terms, highest power first.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = match self.terms.last() {
            Some(&(p, _)) => p,
            None => return 0.0,
        };
        for &(p, c) in self.terms.iter().rev() {
            acc *= x.powi((prev - p) as i32);
            acc += c;
            prev = p;
        }
        acc * x.powi(prev as i32)
    }

    pub fn derivative(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|&&(p, _)| p > 0)
                .map(|&(p, c)| (p - 1, c * p as f64))
                .collect(),
        }
    }
}

impl TryFrom<Vec<(u32, f64)>> for Poly {
    type Error = crate::Error;

    fn try_from(terms: Vec<(u32, f64)>) -> Result<Self> {
        Poly::new(terms)
    }
}

impl From<Poly> for Vec<(u32, f64)> {
    fn from(p: Poly) -> Self {
        p.terms
    }
}

/// `ẍ + f(x) ẋ + g(x) = 0` with polynomial `f` and `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LienardSystem {
    pub f_coeffs: Poly,
    pub g_coeffs: Poly,
}

impl LienardSystem {
    pub fn new(f_coeffs: Poly, g_coeffs: Poly) -> Self {
        LienardSystem { f_coeffs, g_coeffs }
    }

    pub fn f(&self, x: f64) -> f64 {
        self.f_coeffs.eval(x)
    }

    pub fn g(&self, x: f64) -> f64 {
        self.g_coeffs.eval(x)
    }

    /// `f ≡ 0`: the system is a conservative oscillator and `g/f` is undefined.
    pub fn is_undamped(&self) -> bool {
        self.f_coeffs.is_zero()
    }

    /// Right-hand side of the first-order form `ẋ = v, v̇ = −g(x) − f(x) v`.
    pub fn rhs(&self, x: f64, v: f64) -> [f64; 2] {
        [v, -self.g(x) - self.f(x) * v]
    }

    /// Residual `ẍ + f(x) ẋ + g(x)` for given kinematics.
    pub fn residual(&self, x: f64, v: f64, a: f64) -> f64 {
        a + self.f(x) * v + self.g(x)
    }

    /// Small-amplitude angular frequency `√g'(0)`, if the linear restoring term is positive.
    pub fn linear_frequency(&self) -> Option<f64> {
        let c = self.g_coeffs.coeff(1);
        (c > 0.0).then(|| c.sqrt())
    }
}

/// `k` and `ω` of `ẍ + kxẋ + ω²x + (k²/9)x³ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsochronousParams {
    pub k: f64,
    pub omega: f64,
}

impl IsochronousParams {
    pub fn new(k: f64, omega: f64) -> Result<Self> {
        let p = IsochronousParams { k, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() {
            return invalid(format!("k must be finite, got {}", self.k));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return invalid(format!("omega must be > 0, got {}", self.omega));
        }
        Ok(())
    }

    /// Hamiltonian-side objects divide by `k`.
    pub fn require_nonzero_k(&self) -> Result<()> {
        if self.k == 0.0 {
            return invalid("k must be nonzero: g/f and the momentum-dependent mass are undefined at k = 0");
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }
}

/// The cubic family with `f = a1 x` and `g = ((r−1)/r²)(a1²/2) x³ + a2 x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedParams {
    pub a1: f64,
    pub a2: f64,
    pub r: f64,
    #[serde(default = "one")]
    pub s: f64,
}

fn one() -> f64 {
    1.0
}

impl GeneralizedParams {
    pub fn new(a1: f64, a2: f64, r: f64) -> Result<Self> {
        let p = GeneralizedParams { a1, a2, r, s: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a1.is_finite() && self.a2.is_finite() && self.r.is_finite()) {
            return invalid("generalized parameters must be finite");
        }
        if self.a1 == 0.0 {
            return invalid("a1 must be nonzero");
        }
        if [0.0, 1.0, 2.0].contains(&self.r) {
            return invalid(format!("r = {} is excluded (r must avoid 0, 1, 2)", self.r));
        }
        if self.s != 1.0 {
            return invalid(format!("only s = 1 is supported, got {}", self.s));
        }
        Ok(())
    }

    /// Coefficient of `x³` in `g`, written so that `r = 3` reproduces `k²/9` bit for bit.
    pub fn cubic_coeff(&self) -> f64 {
        (self.r - 1.0) * self.a1 * self.a1 / (2.0 * self.r * self.r)
    }
}

/// A point of the classical phase space together with its time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateClassical {
    pub x: f64,
    pub v: f64,
    pub t: f64,
}

impl StateClassical {
    pub fn new(x: f64, v: f64, t: f64) -> Result<Self> {
        if !(x.is_finite() && v.is_finite() && t.is_finite()) {
            return invalid("state components must be finite");
        }
        Ok(StateClassical { x, v, t })
    }
}

/// `f = kx`, `g = ω²x + (k²/9)x³`. `k = 0` yields the undamped harmonic oscillator, flagged by
/// [`LienardSystem::is_undamped`].
pub fn expand_isochronous(params: IsochronousParams) -> Result<LienardSystem> {
    params.validate()?;
    let k = params.k;
    let w2 = params.omega * params.omega;
    Ok(LienardSystem::new(
        Poly::new(vec![(1, k)])?,
        Poly::new(vec![(1, w2), (3, k * k / 9.0)])?,
    ))
}

pub fn expand_generalized(params: GeneralizedParams) -> Result<LienardSystem> {
    params.validate()?;
    Ok(LienardSystem::new(
        Poly::new(vec![(1, params.a1)])?,
        Poly::new(vec![(1, params.a2), (3, params.cubic_coeff())])?,
    ))
}
