//! Record sampling, likelihoods and posteriors for sequential measurements.

use alloc::vec::Vec;

#[allow(unused_imports)] // std inherent methods win when std is linked
use num_traits::Float;
use rand::Rng;

use crate::algebra::{pauli_compose, DensityMatrix, Pauli, PauliVector, Sign};
use crate::error::{invalid, Error, Result};
use crate::models::{error_kernel, ErrorKernel, KrausSet, Model};
use crate::superop::{outcome_superops, SuperopMatrix};
use crate::tol;

/// A Kraus set seen through a detector of efficiency η.
///
/// Holds the per-outcome superoperators E_b of the true dynamics and the
/// shown-outcome superoperators F_y = Σ_b β_{yb}·E_b that enter likelihoods.
#[derive(Debug, Clone)]
pub struct Instrument {
    kraus: KrausSet,
    kernel: ErrorKernel,
    outcome: Vec<SuperopMatrix>,
    shown: Vec<SuperopMatrix>,
    mean: SuperopMatrix,
}

impl Instrument {
    pub fn new(kraus: KrausSet, eta: f64) -> Result<Self> {
        let n = kraus.len();
        let kernel = error_kernel(n, eta)?;
        let outcome = outcome_superops(&kraus);
        let shown = (0..n)
            .map(|y| {
                if kernel.is_identity() {
                    outcome[y]
                } else {
                    (0..n).fold(SuperopMatrix::zero(), |acc, b| acc + outcome[b].scale(kernel.get(y, b)))
                }
            })
            .collect();
        let mean = outcome.iter().fold(SuperopMatrix::zero(), |acc, e| acc + *e);
        Ok(Self { kraus, kernel, outcome, shown, mean })
    }

    pub fn ideal(kraus: KrausSet) -> Self {
        Self::new(kraus, 1.0).expect("η = 1 is valid")
    }

    pub fn from_model(model: &Model, eta: f64) -> Result<Self> {
        Self::new(model.kraus_set(), eta)
    }

    pub fn kraus(&self) -> &KrausSet {
        &self.kraus
    }

    pub fn kernel(&self) -> &ErrorKernel {
        &self.kernel
    }

    pub fn eta(&self) -> f64 {
        self.kernel.eta()
    }

    pub fn outcome_count(&self) -> usize {
        self.kraus.len()
    }

    /// E_b for true outcome b.
    pub fn outcome_superop(&self, b: usize) -> &SuperopMatrix {
        &self.outcome[b]
    }

    /// F_y for shown outcome y.
    pub fn shown_superop(&self, y: usize) -> &SuperopMatrix {
        &self.shown[y]
    }

    pub fn shown_superops(&self) -> &[SuperopMatrix] {
        &self.shown
    }

    /// Mean channel Σ_b E_b.
    pub fn mean_channel(&self) -> &SuperopMatrix {
        &self.mean
    }
}

/// Outcome indices a₁, …, a_T.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MeasurementRecord(Vec<u8>);

impl MeasurementRecord {
    pub fn new(outcomes: Vec<u8>) -> Self {
        Self(outcomes)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, outcome: u8) {
        self.0.push(outcome);
    }

    pub fn validate(&self, alphabet: usize) -> Result<()> {
        match self.0.iter().find(|&&a| a as usize >= alphabet) {
            Some(&a) => Err(Error::InvalidOutcome { index: a as usize, alphabet }),
            None => Ok(()),
        }
    }

    /// Number of occurrences of `outcome`.
    pub fn count(&self, outcome: u8) -> usize {
        self.0.iter().filter(|&&a| a == outcome).count()
    }
}

impl From<Vec<u8>> for MeasurementRecord {
    fn from(v: Vec<u8>) -> Self {
        Self(v)
    }
}

/// Discrete prior over candidate initial states.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    states: Vec<PauliVector>,
    probs: Vec<f64>,
}

impl Prior {
    pub fn new(entries: Vec<(DensityMatrix, f64)>) -> Result<Self> {
        Self::build(entries.into_iter().map(|(rho, p)| (rho.pauli(), p)).collect())
    }

    /// Entries given in Pauli coordinates; each must be a valid density matrix.
    pub fn from_pauli(entries: Vec<(PauliVector, f64)>) -> Result<Self> {
        for (p, _) in &entries {
            DensityMatrix::from_pauli(p)?;
        }
        Self::build(entries)
    }

    fn build(entries: Vec<(PauliVector, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("prior", "needs at least one state"));
        }
        if entries.iter().any(|(_, p)| !(*p >= 0.0)) {
            return Err(invalid("prior", "probabilities must be nonnegative"));
        }
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > tol::STRUCTURAL {
            return Err(invalid("prior", "probabilities must sum to one"));
        }
        let (states, probs) = entries.into_iter().unzip();
        Ok(Self { states, probs })
    }

    /// {|↑⟩: ½, |↓⟩: ½}.
    pub fn up_down() -> Self {
        Self::axis_pair(Pauli::Z)
    }

    /// The two eigenstates of `axis`, + first, each with weight ½.
    pub fn axis_pair(axis: Pauli) -> Self {
        Self {
            states: alloc::vec![PauliVector::eigenstate(axis, Sign::Plus), PauliVector::eigenstate(axis, Sign::Minus)],
            probs: alloc::vec![0.5, 0.5],
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &PauliVector {
        &self.states[i]
    }

    pub fn states(&self) -> &[PauliVector] {
        &self.states
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(&self.probs)
    }

    /// Index whose cumulative interval contains `u ∈ [0, 1)`.
    pub fn index_for(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }
}

impl Default for Prior {
    fn default() -> Self {
        Self::up_down()
    }
}

/// −Σ p·log₂ p with 0·log 0 = 0.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub record: MeasurementRecord,
    pub final_state: PauliVector,
    /// Prior index of the initial state, when it was drawn from a prior.
    pub initial_index: Option<usize>,
}

fn draw_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Runs `steps` measurements from `rho0`, calling `on_step(t, shown)` after each.
///
/// The state follows the true outcome b; the shown outcome y is b with
/// probability √η and uniform otherwise.
pub(crate) fn walk<R, F>(inst: &Instrument, rho0: &PauliVector, steps: usize, rng: &mut R, mut on_step: F) -> PauliVector
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize),
{
    let n = inst.outcome_count();
    let keep = inst.kernel.keep_probability();
    let noisy = !inst.kernel.is_identity();
    let mut p = rho0.to_array();
    let mut probs = [0.0; 8];
    let mut buf = Vec::new();
    let probs: &mut [f64] = if n <= probs.len() {
        &mut probs[..n]
    } else {
        buf.resize(n, 0.0);
        &mut buf
    };
    for t in 1..=steps {
        for (b, slot) in probs.iter_mut().enumerate() {
            *slot = inst.outcome[b].trace_of(&p);
        }
        let b = draw_index(probs, rng);
        let next = inst.outcome[b].apply_array(&p);
        let inv = 1.0 / next[0];
        p = [1.0, next[1] * inv, next[2] * inv, next[3] * inv];
        let y = if noisy {
            let u: f64 = rng.random();
            if u < keep {
                b
            } else {
                rng.random_range(0..n)
            }
        } else {
            b
        };
        on_step(t, y);
    }
    PauliVector::from_array(p)
}

/// Samples a record of length `steps` starting from `rho0`.
pub fn sample_record<R: Rng + ?Sized>(inst: &Instrument, rho0: &PauliVector, steps: usize, rng: &mut R) -> TrajectorySample {
    let mut record = MeasurementRecord(Vec::with_capacity(steps));
    let final_state = walk(inst, rho0, steps, rng, |_, y| record.push(y as u8));
    TrajectorySample { record, final_state, initial_index: None }
}

/// Draws ρ₀ from the prior, then samples a record.
pub fn sample_from_prior<R: Rng + ?Sized>(inst: &Instrument, prior: &Prior, steps: usize, rng: &mut R) -> TrajectorySample {
    let i = draw_index(&prior.probs, rng);
    let mut s = sample_record(inst, &prior.states[i], steps, rng);
    s.initial_index = Some(i);
    s
}

/// ln Pr[record | ρ₀]; −∞ for impossible records.
///
/// At η = 1 this multiplies 2×2 Kraus operators onto ρ₀; otherwise it runs
/// the shown-outcome superoperator chain. Both rescale every step.
pub fn record_log_likelihood(inst: &Instrument, rho0: &PauliVector, record: &MeasurementRecord) -> Result<f64> {
    record.validate(inst.outcome_count())?;
    let mut log = 0.0;
    if inst.kernel.is_identity() {
        let mut rho = pauli_compose(rho0);
        for &a in record.as_slice() {
            let out = inst.kraus.op(a as usize).sandwich(&rho);
            let p = out.trace().re;
            if !(p > 0.0) {
                return Ok(f64::NEG_INFINITY);
            }
            rho = out.scale(1.0 / p);
            log += p.ln();
        }
    } else {
        let mut v = rho0.to_array();
        for &a in record.as_slice() {
            let out = inst.shown[a as usize].apply_array(&v);
            let p = out[0];
            if !(p > 0.0) {
                return Ok(f64::NEG_INFINITY);
            }
            v = [1.0, out[1] / p, out[2] / p, out[3] / p];
            log += p.ln();
        }
    }
    Ok(log)
}

/// Pr[record | ρ₀].
pub fn record_likelihood(inst: &Instrument, rho0: &PauliVector, record: &MeasurementRecord) -> Result<f64> {
    record_log_likelihood(inst, rho0, record).map(f64::exp)
}

/// Running, rescaled likelihoods of a growing record under every prior state.
#[derive(Debug, Clone)]
pub struct PosteriorTracker<'a> {
    inst: &'a Instrument,
    vecs: Vec<[f64; 4]>,
    log_weights: Vec<f64>,
}

impl<'a> PosteriorTracker<'a> {
    pub fn new(inst: &'a Instrument, prior: &Prior) -> Self {
        Self {
            inst,
            vecs: prior.states.iter().map(|s| s.to_array()).collect(),
            log_weights: prior.probs.iter().map(|p| if *p > 0.0 { p.ln() } else { f64::NEG_INFINITY }).collect(),
        }
    }

    #[inline]
    pub fn push(&mut self, y: usize) {
        let f = &self.inst.shown[y];
        for (v, w) in self.vecs.iter_mut().zip(self.log_weights.iter_mut()) {
            if *w == f64::NEG_INFINITY {
                continue;
            }
            let out = f.apply_array(v);
            let p = out[0];
            if p > 0.0 {
                let inv = 1.0 / p;
                *v = [1.0, out[1] * inv, out[2] * inv, out[3] * inv];
                *w += p.ln();
            } else {
                *w = f64::NEG_INFINITY;
            }
        }
    }

    /// ln(π_d·Pr[record | ρ_d]) for each prior state.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn posterior(&self) -> Result<Vec<f64>> {
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::DegenerateRecord);
        }
        let mut post: Vec<f64> = self.log_weights.iter().map(|w| (w - top).exp()).collect();
        let total: f64 = post.iter().sum();
        post.iter_mut().for_each(|p| *p /= total);
        Ok(post)
    }

    pub fn entropy_bits(&self) -> Result<f64> {
        Ok(entropy_bits(&self.posterior()?))
    }

    /// Posterior argmax; log-weights within 1e-12 of the top count as ties and
    /// resolve to the lowest prior index.
    pub fn argmax(&self) -> Result<usize> {
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::DegenerateRecord);
        }
        let slack = 1e-12 * top.abs().max(1.0);
        Ok(self.log_weights.iter().position(|w| *w >= top - slack).unwrap_or(0))
    }
}

/// Pr[ρ_d | record] over the prior support.
pub fn posterior(inst: &Instrument, prior: &Prior, record: &MeasurementRecord) -> Result<Vec<f64>> {
    record.validate(inst.outcome_count())?;
    let mut tracker = PosteriorTracker::new(inst, prior);
    for &a in record.as_slice() {
        tracker.push(a as usize);
    }
    tracker.posterior()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{kraus_set_model1, kraus_set_model2, ModelIIParams, ModelIParams};
    use crate::rng::StreamKey;

    fn model2(x: f64, phi: f64, eta: f64) -> Instrument {
        Instrument::new(kraus_set_model2(&ModelIIParams::new(x, phi).unwrap()), eta).unwrap()
    }

    fn all_records(n: usize, t: usize) -> Vec<MeasurementRecord> {
        let mut out = alloc::vec![MeasurementRecord::default()];
        for _ in 0..t {
            out = out
                .into_iter()
                .flat_map(|r| {
                    (0..n).map(move |a| {
                        let mut r = r.clone();
                        r.push(a as u8);
                        r
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn empty_record() {
        let inst = model2(1.0, 0.3, 0.5);
        let mut rng = StreamKey::new(1, "test").rng(0);
        let s = sample_record(&inst, &PauliVector::up(), 0, &mut rng);
        assert!(s.record.is_empty());
        assert_eq!(s.final_state, PauliVector::up());
        assert_eq!(record_likelihood(&inst, &PauliVector::up(), &s.record).unwrap(), 1.0);
    }

    #[test]
    fn single_step_likelihood() {
        let inst = model2(1.0, 0.0, 1.0);
        let l = record_likelihood(&inst, &PauliVector::up(), &MeasurementRecord::new(alloc::vec![0])).unwrap();
        assert!((l - 0.880_797_077_977_882_4).abs() < 1e-12);
        let post = posterior(&inst, &Prior::up_down(), &MeasurementRecord::new(alloc::vec![0])).unwrap();
        assert!((post[0] - 0.880_797_077_977_882_4).abs() < 1e-12);
        assert!((post[1] - 0.119_202_922_022_117_6).abs() < 1e-12);
    }

    #[test]
    fn likelihoods_sum_to_one() {
        for &(x, phi, eta) in &[(0.7, 0.4, 1.0), (1.3, 1.1, 0.3), (0.2, 2.0, 0.0)] {
            let inst = model2(x, phi, eta);
            let rho = PauliVector::new(1.0, 0.2, -0.3, 0.5);
            let total: f64 = all_records(2, 3).iter().map(|r| record_likelihood(&inst, &rho, r).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        let inst = Instrument::new(kraus_set_model1(&ModelIParams::new(0.9).unwrap()), 0.6).unwrap();
        let total: f64 = all_records(6, 4).iter().map(|r| record_likelihood(&inst, &PauliVector::up(), r).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kraus_and_superop_routes_agree() {
        let kraus = kraus_set_model1(&ModelIParams::new(0.8).unwrap());
        let ideal = Instrument::ideal(kraus.clone());
        let mut rng = StreamKey::new(3, "test").rng(0);
        let rho = PauliVector::new(1.0, 0.1, 0.4, -0.2);
        for _ in 0..20 {
            let s = sample_record(&ideal, &rho, 30, &mut rng);
            let a = record_log_likelihood(&ideal, &rho, &s.record).unwrap();
            let mut v = rho.to_array();
            let mut b = 0.0;
            for &y in s.record.as_slice() {
                let out = ideal.outcome_superop(y as usize).apply_array(&v);
                b += out[0].ln();
                v = out.map(|c| c / out[0]);
            }
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_posterior() {
        let inst = model2(50.0, 0.0, 1.0);
        let r = MeasurementRecord::new(alloc::vec![0, 1]);
        assert_eq!(posterior(&inst, &Prior::up_down(), &r), Err(Error::DegenerateRecord));
    }

    #[test]
    fn uninformative_posterior_is_prior() {
        let inst = Instrument::ideal(kraus_set_model1(&ModelIParams::new(0.0).unwrap()));
        let prior = Prior::from_pauli(alloc::vec![(PauliVector::up(), 0.3), (PauliVector::new(1.0, 0.5, 0.0, 0.0), 0.7)]).unwrap();
        let r = MeasurementRecord::new(alloc::vec![0, 5, 3, 2, 2]);
        let post = posterior(&inst, &prior, &r).unwrap();
        assert!((post[0] - 0.3).abs() < 1e-15 && (post[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn invalid_outcome_is_rejected() {
        let inst = model2(1.0, 0.0, 1.0);
        let r = MeasurementRecord::new(alloc::vec![0, 2]);
        assert!(matches!(record_likelihood(&inst, &PauliVector::up(), &r), Err(Error::InvalidOutcome { .. })));
    }

    #[test]
    fn prior_validation() {
        assert!(Prior::from_pauli(alloc::vec![(PauliVector::up(), 0.6), (PauliVector::down(), 0.6)]).is_err());
        assert!(Prior::from_pauli(alloc::vec![(PauliVector::new(1.0, 0.0, 0.0, 2.0), 1.0)]).is_err());
        assert_eq!(Prior::default().entropy_bits(), 1.0);
    }
}
