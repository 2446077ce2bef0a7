//! Kraus sets for the universal weak measurement, Model I and Model II, and
//! the detector error kernel.

use alloc::vec::Vec;

#[allow(unused_imports)] // std inherent methods win when std is linked
use num_traits::Float;

use crate::algebra::{ComplexMatrix2, Pauli, Sign, C64};
use crate::error::{invalid, Result};

/// Model I: one of six weak Pauli measurements per step, each with weight 1/3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelIParams {
    pub x: f64,
}

impl ModelIParams {
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(invalid("x", "must be finite"));
        }
        Ok(Self { x })
    }

    /// Δt/τ = x²/12.
    pub fn dt_over_tau(&self) -> f64 {
        self.x * self.x / 12.0
    }
}

/// Model II: weak Z measurement preceded by a rotation by φ about X.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelIIParams {
    pub x: f64,
    pub phi: f64,
}

impl ModelIIParams {
    pub fn new(x: f64, phi: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(invalid("x", "must be finite"));
        }
        if !phi.is_finite() {
            return Err(invalid("phi", "must be finite"));
        }
        Ok(Self { x, phi })
    }

    /// φ = a·x² for a fixed scaled field a.
    pub fn from_scaled_field(x: f64, a: f64) -> Result<Self> {
        Self::new(x, a * x * x)
    }

    /// a = φ/x², undefined at x = 0.
    pub fn scaled_field(&self) -> Option<f64> {
        (self.x != 0.0).then(|| self.phi / (self.x * self.x))
    }

    /// Δt/τ = x²/4.
    pub fn dt_over_tau(&self) -> f64 {
        self.x * self.x / 4.0
    }

    /// Continuum quality factor α = ωτ/2 = 2a.
    pub fn alpha(&self) -> Option<f64> {
        self.scaled_field().map(|a| 2.0 * a)
    }
}

/// Either measurement model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    I(ModelIParams),
    II(ModelIIParams),
}

impl Model {
    pub fn kraus_set(&self) -> KrausSet {
        match self {
            Model::I(p) => kraus_set_model1(p),
            Model::II(p) => kraus_set_model2(p),
        }
    }

    pub fn outcome_count(&self) -> usize {
        match self {
            Model::I(_) => 6,
            Model::II(_) => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::I(_) => "I",
            Model::II(_) => "II",
        }
    }

    pub fn x(&self) -> f64 {
        match self {
            Model::I(p) => p.x,
            Model::II(p) => p.x,
        }
    }

    /// Precession angle; zero for Model I.
    pub fn phi(&self) -> f64 {
        match self {
            Model::I(_) => 0.0,
            Model::II(p) => p.phi,
        }
    }

    pub fn dt_over_tau(&self) -> f64 {
        match self {
            Model::I(p) => p.dt_over_tau(),
            Model::II(p) => p.dt_over_tau(),
        }
    }
}

/// Outcome label: the measured axis and the sign read off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub axis: Pauli,
    pub sign: Sign,
}

/// Ordered Kraus operators; the position of an operator is its outcome index.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    labels: Vec<Outcome>,
    ops: Vec<ComplexMatrix2>,
}

impl KrausSet {
    pub fn new(entries: Vec<(Outcome, ComplexMatrix2)>) -> Self {
        let (labels, ops) = entries.into_iter().unzip();
        Self { labels, ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[ComplexMatrix2] {
        &self.ops
    }

    pub fn labels(&self) -> &[Outcome] {
        &self.labels
    }

    pub fn op(&self, index: usize) -> &ComplexMatrix2 {
        &self.ops[index]
    }

    pub fn index_of(&self, label: Outcome) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    /// Largest entry of |Σ K†K − I|.
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .ops
            .iter()
            .fold(ComplexMatrix2::zero(), |acc, k| acc + k.adjoint() * *k);
        (sum - ComplexMatrix2::identity()).max_abs()
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// √(e^{yx}/(e^x+e^{−x}))·P₊ + √(e^{−yx}/(e^x+e^{−x}))·P₋ along `axis`.
pub fn kraus_universal(axis: Pauli, y: Sign, x: f64) -> ComplexMatrix2 {
    // e^{±yx}/(e^x + e^{−x}) = 1/(1 + e^{∓2yx}).
    let yx = y.value() * x;
    let a = logistic(2.0 * yx).sqrt();
    let b = logistic(-2.0 * yx).sqrt();
    axis.projector(Sign::Plus).scale(a) + axis.projector(Sign::Minus).scale(b)
}

/// √(½(I + y·tanh(x)·σ)) through the eigen-projectors of σ.
pub fn sqrt_form_kraus(axis: Pauli, y: Sign, x: f64) -> ComplexMatrix2 {
    let t = y.value() * x.tanh();
    let a = (0.5 * (1.0 + t)).sqrt();
    let b = (0.5 * (1.0 - t)).sqrt();
    axis.projector(Sign::Plus).scale(a) + axis.projector(Sign::Minus).scale(b)
}

/// Model I outcomes in index order (X,+),(X,−),(Y,+),(Y,−),(Z,+),(Z,−).
pub fn model1_outcomes() -> [Outcome; 6] {
    let mut out = [Outcome { axis: Pauli::X, sign: Sign::Plus }; 6];
    for (i, axis) in Pauli::ALL.iter().enumerate() {
        out[2 * i] = Outcome { axis: *axis, sign: Sign::Plus };
        out[2 * i + 1] = Outcome { axis: *axis, sign: Sign::Minus };
    }
    out
}

pub fn kraus_set_model1(params: &ModelIParams) -> KrausSet {
    let w = 1.0 / 3.0.sqrt();
    KrausSet::new(
        model1_outcomes()
            .iter()
            .map(|o| (*o, kraus_universal(o.axis, o.sign, params.x).scale(w)))
            .collect(),
    )
}

/// exp(−iθX/2) = cos(θ/2)·I − i·sin(θ/2)·X.
pub fn x_rotation(theta: f64) -> ComplexMatrix2 {
    let (s, c) = (0.5 * theta).sin_cos();
    ComplexMatrix2::identity().scale(c) + Pauli::X.matrix().scale_c(C64::new(0.0, -s))
}

/// Model II outcomes: +1 → 0, −1 → 1.
pub fn kraus_set_model2(params: &ModelIIParams) -> KrausSet {
    let u = x_rotation(params.phi);
    KrausSet::new(
        [Sign::Plus, Sign::Minus]
            .iter()
            .map(|s| {
                let k = kraus_universal(Pauli::Z, *s, params.x) * u;
                (Outcome { axis: Pauli::Z, sign: *s }, k)
            })
            .collect(),
    )
}

/// Column-stochastic confusion matrix β from true outcome b to shown outcome y.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorKernel {
    n: usize,
    eta: f64,
    beta: Vec<f64>,
}

impl ErrorKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Probability that the true outcome is reported unchanged before mixing.
    pub fn keep_probability(&self) -> f64 {
        self.eta.sqrt()
    }

    /// β_{yb}: shown `y` given true `b`.
    pub fn get(&self, y: usize, b: usize) -> f64 {
        self.beta[y * self.n + b]
    }

    pub fn is_identity(&self) -> bool {
        self.eta == 1.0
    }
}

/// β_{yb} = (1 − √η)/n + √η·δ_{yb}.
pub fn error_kernel(n: usize, eta: f64) -> Result<ErrorKernel> {
    if n == 0 {
        return Err(invalid("n", "outcome count must be positive"));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", "efficiency must lie in [0, 1]"));
    }
    let s = eta.sqrt();
    let off = (1.0 - s) / n as f64;
    let mut beta = alloc::vec![off; n * n];
    for y in 0..n {
        beta[y * n + y] = off + s;
    }
    Ok(ErrorKernel { n, eta, beta })
}
