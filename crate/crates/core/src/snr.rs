//! Low-efficiency theory: the accumulated signal-to-noise ratio γ(t) between
//! the Lindblad trajectories of ↑ and ↓, and the binary-input AWGN channel
//! that turns γ into bits.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

#[allow(unused_imports)] // std inherent methods win when std is linked
use num_traits::Float;

use crate::error::{invalid, Result};

/// Slack within which α counts as critically damped.
pub const CRITICAL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Underdamped,
    Overdamped,
    Critical,
}

pub fn regime(alpha: f64) -> Regime {
    if (alpha - 0.5).abs() <= CRITICAL_SLACK {
        Regime::Critical
    } else if alpha > 0.5 {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrModel {
    I,
    /// α = ωτ/2.
    II { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrParams {
    pub model: SnrModel,
    pub tau: f64,
    pub eta: f64,
}

impl SnrParams {
    pub fn new(model: SnrModel, tau: f64, eta: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid("tau", "must be positive"));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid("eta", "must lie in [0, 1]"));
        }
        if let SnrModel::II { alpha } = model {
            if !(alpha >= 0.0) || !alpha.is_finite() {
                return Err(invalid("alpha", "must be finite and nonnegative"));
            }
        }
        Ok(Self { model, tau, eta })
    }

    /// Damping regime; `None` for Model I.
    pub fn regime(&self) -> Option<Regime> {
        match self.model {
            SnrModel::I => None,
            SnrModel::II { alpha } => Some(regime(alpha)),
        }
    }

    pub fn gamma(&self, t: f64) -> f64 {
        match self.model {
            SnrModel::I => gamma_model1(t, self.tau, self.eta),
            SnrModel::II { alpha } => gamma_model2(t, self.tau, alpha, self.eta),
        }
    }

    /// lim γ(t); `None` when γ grows without bound (Model II, α = 0, η > 0).
    pub fn gamma_inf(&self) -> Option<f64> {
        match self.model {
            SnrModel::I => Some(0.5 * self.eta),
            SnrModel::II { alpha: 0.0 } if self.eta == 0.0 => Some(0.0),
            SnrModel::II { alpha: 0.0 } => None,
            SnrModel::II { alpha } => Some(self.eta * (1.0 + alpha * alpha) / (alpha * alpha)),
        }
    }
}

/// γ(t) = (η/2)(1 − e^{−8t/τ}) for t ≥ 0.
pub fn gamma_model1(t: f64, tau: f64, eta: f64) -> f64 {
    -0.5 * eta * (-8.0 * t / tau).exp_m1()
}

/// Model II γ(t) for t ≥ 0, α ≥ 0. At α = 0 the measured and rotated axes
/// commute and γ = 4ηt/τ grows without bound.
pub fn gamma_model2(t: f64, tau: f64, alpha: f64, eta: f64) -> f64 {
    if alpha == 0.0 {
        return 4.0 * eta * t / tau;
    }
    let s = t / tau;
    let u = 2.0 * s;
    let a2 = alpha * alpha;
    let decay = (-u).exp();
    match regime(alpha) {
        Regime::Critical => eta * (5.0 - decay * (2.0 * s * s + 6.0 * s + 5.0)),
        _ => eta * ((1.0 + a2) / a2 + decay / a2 * bracket_over_m(alpha, u)),
    }
}

/// [−4α⁴ + (1 − 3α²)·cos(μu) + (α² − 1)·μ·sin(μu)] / μ² with m = μ² = 4α² − 1.
/// The overdamped form is the same analytic function of m < 0. Near m = 0
/// the bracket vanishes to second order, so a power series in m is used.
fn bracket_over_m(alpha: f64, u: f64) -> f64 {
    let m = 4.0 * alpha * alpha - 1.0;
    if m.abs() * u * u > 1.0 {
        let a2 = alpha * alpha;
        let (c, s1) = cos_sinc(m, u);
        return (-4.0 * a2 * a2 + (1.0 - 3.0 * a2) * c + (a2 - 1.0) * m * s1) / m;
    }
    // With α² = (1 + m)/4: 4·bracket = −(1 + m)² + (1 − 3m)·C + (m² − 3m)·S,
    // C = Σ c_j m^j, S = Σ s_j m^j.
    const TERMS: usize = 24;
    let mut c = [0.0; TERMS];
    let mut sn = [0.0; TERMS];
    let mut term = 1.0;
    for j in 0..TERMS {
        if j > 0 {
            term *= -u * u / ((2 * j - 1) as f64 * (2 * j) as f64);
        }
        c[j] = term;
        sn[j] = term * u / (2 * j + 1) as f64;
    }
    let at = |v: &[f64; TERMS], j: isize| if j < 0 { 0.0 } else { v[j as usize] };
    let mut acc = 0.0;
    let mut mp = 1.0;
    for j in 1..TERMS as isize {
        let poly = match j {
            1 => -2.0,
            2 => -1.0,
            _ => 0.0,
        };
        let a = poly + at(&c, j) - 3.0 * at(&c, j - 1) + at(&sn, j - 2) - 3.0 * at(&sn, j - 1);
        acc += a * mp;
        mp *= m;
    }
    0.25 * acc
}

/// (cos(√m·u), sin(√m·u)/√m), continued analytically to m < 0.
pub(crate) fn cos_sinc(m: f64, u: f64) -> (f64, f64) {
    let z = m * u * u;
    if z.abs() <= 1e-2 {
        let (mut c, mut s) = (0.0, 0.0);
        let mut term = 1.0;
        for k in 0..12 {
            if k > 0 {
                term *= -z / ((2 * k - 1) as f64 * (2 * k) as f64);
            }
            c += term;
            s += term / (2 * k + 1) as f64;
        }
        (c, s * u)
    } else if m > 0.0 {
        let mu = m.sqrt();
        ((mu * u).cos(), (mu * u).sin() / mu)
    } else {
        let mu = (-m).sqrt();
        ((mu * u).cosh(), (mu * u).sinh() / mu)
    }
}

/// Gauss–Hermite rule for ∫ e^{−x²} f(x) dx.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes by Newton iteration on the orthonormal Hermite recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let pim4 = PI.powf(-0.25);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let nf = n as f64;
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => x[0] - 1.14 * nf.powf(0.426) / x[0],
                2 => 1.86 * x[1] - 0.86 * x[0],
                3 => 1.91 * x[2] - 0.91 * x[1],
                _ => 2.0 * x[i - 1] - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (pim4, 0.0);
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= 3e-14 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        Self { nodes: x, weights: w }
    }
}

/// Node count used by [`bi_awgn_mi`].
pub const BI_AWGN_NODES: usize = 128;
/// Above this SNR the leading asymptotic replaces quadrature.
pub const BI_AWGN_ASYMPTOTIC: f64 = 50.0;

/// Reusable bi-AWGN evaluator holding its quadrature rule.
#[derive(Debug, Clone)]
pub struct BiAwgn {
    rule: GaussHermite,
}

impl Default for BiAwgn {
    fn default() -> Self {
        Self { rule: GaussHermite::new(BI_AWGN_NODES) }
    }
}

impl BiAwgn {
    pub fn new() -> Self {
        Self::default()
    }

    /// I(X; √γ·X + Z) in bits for equiprobable X ∈ {±1}, Z ~ N(0, 1).
    pub fn mi(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(invalid("gamma", "must be nonnegative"));
        }
        if gamma == 0.0 {
            return Ok(0.0);
        }
        if gamma > BI_AWGN_ASYMPTOTIC {
            // E[ln(1 + e^{−2γ−2√γZ})] ~ e^{−γ/2}·√(π/(2γ)).
            let deficit = (-0.5 * gamma).exp() * (PI / (2.0 * gamma)).sqrt() / LN_2;
            return Ok(1.0 - deficit);
        }
        let sg = gamma.sqrt();
        let mut acc = 0.0;
        for (&x, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let z = core::f64::consts::SQRT_2 * x;
            acc += w * softplus(-2.0 * gamma - 2.0 * sg * z);
        }
        let nats = LN_2 - acc / PI.sqrt();
        Ok((nats / LN_2).clamp(0.0, 1.0))
    }
}

/// [`BiAwgn::mi`] with a freshly built rule.
pub fn bi_awgn_mi(gamma: f64) -> Result<f64> {
    BiAwgn::new().mi(gamma)
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    /// +∞ when γ diverges.
    pub gamma_inf: f64,
    pub bits: f64,
    pub diverges: bool,
}

/// bi-AWGN information at the saturated SNR. A divergent γ yields 1 bit.
pub fn mi_plateau(params: &SnrParams) -> Plateau {
    match params.gamma_inf() {
        None => Plateau { gamma_inf: f64::INFINITY, bits: 1.0, diverges: true },
        Some(g) => Plateau {
            gamma_inf: g,
            bits: bi_awgn_mi(g).expect("γ∞ is nonnegative"),
            diverges: false,
        },
    }
}
