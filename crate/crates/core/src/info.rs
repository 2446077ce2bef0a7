//! Mutual information between the initial state and the measurement record.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // std inherent methods win when std is linked
use num_traits::Float;

use crate::enumerate::{for_each_record, CompensatedSum};
use crate::error::{invalid, Result};
use crate::rng::StreamKey;
use crate::runner::{chunk_ranges, Runner};
use crate::trajectory::{entropy_bits, walk, Instrument, MeasurementRecord, PosteriorTracker, Prior};

/// ceil(ln(2/δ)/(2ε²)).
pub fn hoeffding_samples(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon", "must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "must lie in (0, 1)"));
    }
    Ok(((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

/// Half-width guaranteed by `samples` draws of a [0, 1]-bounded variable.
pub fn hoeffding_epsilon(samples: u64, delta: f64) -> Result<f64> {
    if samples == 0 {
        return Err(invalid("samples", "must be at least one"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "must lie in (0, 1)"));
    }
    Ok(((2.0 / delta).ln() / (2.0 * samples as f64)).sqrt())
}

/// Sample count and confidence for a Monte-Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBudget {
    pub samples: u64,
    pub delta: f64,
}

impl SampleBudget {
    pub fn new(samples: u64, delta: f64) -> Result<Self> {
        hoeffding_epsilon(samples, delta)?;
        Ok(Self { samples, delta })
    }

    /// Smallest budget meeting (ε, δ).
    pub fn for_accuracy(epsilon: f64, delta: f64) -> Result<Self> {
        Ok(Self { samples: hoeffding_samples(epsilon, delta)?, delta })
    }

    /// ε for a [0, 1]-bounded summand.
    pub fn epsilon(&self) -> f64 {
        ((2.0 / self.delta).ln() / (2.0 * self.samples as f64)).sqrt()
    }
}

/// Monte-Carlo value with its Hoeffding guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithBound {
    pub value: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub samples: u64,
    pub seed: u64,
}

/// One point of an MI-versus-T curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiPoint {
    pub steps: usize,
    /// Scaling abscissa x²T.
    pub x2t: f64,
    pub estimate: EstimateWithBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiCurve {
    pub x: f64,
    pub phi: f64,
    pub eta: f64,
    pub points: Vec<MiPoint>,
}

/// H₂(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Entropy of the posterior after `record`.
pub fn record_conditional_entropy(inst: &Instrument, prior: &Prior, record: &MeasurementRecord) -> Result<f64> {
    Ok(entropy_bits(&crate::trajectory::posterior(inst, prior, record)?))
}

/// Posterior entropy (bits) of `budget.samples` trajectories, summed at each
/// checkpoint in `steps` (strictly increasing). Chunk sums are merged in
/// index order.
fn entropy_sums<R: Runner>(inst: &Instrument, prior: &Prior, steps: &[usize], samples: u64, key: StreamKey, runner: &R) -> Vec<f64> {
    let t_max = steps.last().copied().unwrap_or(0);
    let ranges = chunk_ranges(samples);
    let partial = runner.map_chunks(ranges.len(), |c| {
        let (start, end) = ranges[c];
        let mut sums = vec![0.0; steps.len()];
        for i in start..end {
            let mut rng = key.rng(i);
            let d = prior.index_for(rand::Rng::random(&mut rng));
            let mut tracker = PosteriorTracker::new(inst, prior);
            let mut next = 0;
            while next < steps.len() && steps[next] == 0 {
                sums[next] += tracker.entropy_bits().expect("sampled record is possible");
                next += 1;
            }
            walk(inst, prior.state(d), t_max, &mut rng, |t, y| {
                tracker.push(y);
                while next < steps.len() && steps[next] == t {
                    sums[next] += tracker.entropy_bits().expect("sampled record is possible");
                    next += 1;
                }
            });
        }
        sums
    });
    let mut total = vec![0.0; steps.len()];
    for sums in partial {
        for (t, s) in total.iter_mut().zip(sums) {
            *t += s;
        }
    }
    total
}

fn check_steps(steps: &[usize]) -> Result<()> {
    if steps.is_empty() {
        return Err(invalid("T", "needs at least one record length"));
    }
    if steps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("T", "record lengths must be strictly increasing"));
    }
    Ok(())
}

/// Ĩ = H(P₀) − (1/M)·Σᵢ H(P₀ | record_i), clamped to [0, H(P₀)].
///
/// ε is the Hoeffding half-width for summands in [0, log₂|D|].
pub fn estimate_mi<R: Runner>(
    inst: &Instrument,
    prior: &Prior,
    steps: usize,
    budget: SampleBudget,
    key: StreamKey,
    runner: &R,
) -> Result<EstimateWithBound> {
    let curve = estimate_mi_curve(inst, prior, &[steps], budget, key, runner)?;
    Ok(curve[0])
}

/// Estimates at several record lengths from the same trajectories: each
/// trajectory is sampled once to the longest length and its prefixes scored.
pub fn estimate_mi_curve<R: Runner>(
    inst: &Instrument,
    prior: &Prior,
    steps: &[usize],
    budget: SampleBudget,
    key: StreamKey,
    runner: &R,
) -> Result<Vec<EstimateWithBound>> {
    check_steps(steps)?;
    SampleBudget::new(budget.samples, budget.delta)?;
    let h0 = prior.entropy_bits();
    let range = (prior.len() as f64).log2().max(f64::MIN_POSITIVE);
    let eps = budget.epsilon() * range;
    let sums = entropy_sums(inst, prior, steps, budget.samples, key, runner);
    Ok(sums
        .into_iter()
        .map(|s| EstimateWithBound {
            value: (h0 - s / budget.samples as f64).clamp(0.0, h0),
            epsilon: eps,
            delta: budget.delta,
            samples: budget.samples,
            seed: key.seed(),
        })
        .collect())
}

/// Builds an [`MiCurve`] with the x²T abscissa.
#[allow(clippy::too_many_arguments)]
pub fn mi_curve<R: Runner>(
    inst: &Instrument,
    prior: &Prior,
    x: f64,
    phi: f64,
    steps: &[usize],
    budget: SampleBudget,
    key: StreamKey,
    runner: &R,
) -> Result<MiCurve> {
    let ests = estimate_mi_curve(inst, prior, steps, budget, key, runner)?;
    Ok(MiCurve {
        x,
        phi,
        eta: inst.eta(),
        points: steps
            .iter()
            .zip(ests)
            .map(|(&t, estimate)| MiPoint { steps: t, x2t: x * x * t as f64, estimate })
            .collect(),
    })
}

/// I(P₀; A₁:T) for every T in 0..=t_max by exhaustive enumeration.
pub fn exact_mi_profile(inst: &Instrument, prior: &Prior, t_max: usize) -> Result<Vec<f64>> {
    let mut acc = vec![CompensatedSum::default(); t_max + 1];
    for_each_record(inst, prior, t_max, |depth, w, joint| {
        let p: f64 = joint.iter().sum();
        if p <= 0.0 {
            return;
        }
        // P·H(posterior) = P·log₂P − Σ_d j_d·log₂ j_d.
        let mut term = p * p.log2();
        for &j in joint {
            if j > 0.0 {
                term -= j * j.log2();
            }
        }
        acc[depth].add(w * term);
    })?;
    let h0 = prior.entropy_bits();
    Ok(acc.iter().map(|s| h0 - s.value()).collect())
}

/// Exact I(P₀; A₁:T); |O|^T must pass the enumeration guard.
pub fn exact_mi(inst: &Instrument, prior: &Prior, steps: usize) -> Result<f64> {
    Ok(exact_mi_profile(inst, prior, steps)?[steps])
}

/// I(S; N₊) for the commuting Z measurement with the uniform ↑/↓ prior,
/// where N₊ | ↑ ~ B(T, p) and N₊ | ↓ ~ B(T, 1 − p), p = (1 + tanh x)/2.
pub fn binomial_mi(x: f64, steps: usize) -> f64 {
    let t = steps as f64;
    // ln p and ln(1 − p) without cancellation.
    let ln_p = -softplus(-2.0 * x);
    let ln_q = -softplus(2.0 * x);
    let ln_t_fact = libm::lgamma(t + 1.0);
    let mut acc = CompensatedSum::default();
    for n in 0..=steps {
        let k = n as f64;
        let ln_c = ln_t_fact - libm::lgamma(k + 1.0) - libm::lgamma(t - k + 1.0);
        let ln_up = ln_c + k * ln_p + (t - k) * ln_q;
        let ln_down = ln_c + k * ln_q + (t - k) * ln_p;
        // P(n) = ½(P↑ + P↓); posterior log-odds ℓ = ln P↑ − ln P↓.
        let hi = ln_up.max(ln_down);
        let ell = (ln_up - ln_down).abs();
        let p_n = 0.5 * hi.exp() * (1.0 + (-ell).exp());
        acc.add(p_n * binary_entropy_from_log_odds(ell));
    }
    (1.0 - acc.value()).clamp(0.0, 1.0)
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// H₂(σ(ℓ)) in bits for ℓ ≥ 0.
fn binary_entropy_from_log_odds(ell: f64) -> f64 {
    let e = (-ell).exp();
    // −σ ln σ − (1−σ) ln(1−σ) with σ = 1/(1+e), 1−σ = e/(1+e).
    (e.ln_1p() + ell * e / (1.0 + e)) / core::f64::consts::LN_2
}

/// I(P₀; A_T) for the single outcome at step T, marginalising the first
/// T − 1 outcomes through the mean channel.
pub fn last_measurement_mi(inst: &Instrument, prior: &Prior, steps: usize) -> Result<f64> {
    if steps == 0 {
        return Err(invalid("T", "must be at least one"));
    }
    let e = inst.mean_channel();
    let n = inst.outcome_count();
    let mut vs: Vec<[f64; 4]> = prior.states().iter().map(|s| s.to_array()).collect();
    for _ in 1..steps {
        for v in vs.iter_mut() {
            *v = e.apply_array(v);
        }
    }
    let mut joint = vec![0.0; prior.len() * n];
    let mut marginal = vec![0.0; n];
    for (d, v) in vs.iter().enumerate() {
        for a in 0..n {
            let j = prior.prob(d) * inst.shown_superop(a).trace_of(v);
            joint[d * n + a] = j;
            marginal[a] += j;
        }
    }
    let mut acc = CompensatedSum::default();
    for d in 0..prior.len() {
        for a in 0..n {
            let j = joint[d * n + a];
            if j > 0.0 {
                acc.add(j * (j / (prior.prob(d) * marginal[a])).log2());
            }
        }
    }
    Ok(acc.value().max(0.0))
}

/// Largest accuracy A ∈ [1/|D|, 1] with H₂(1−A) + (1−A)·log₂(|D|−1) ≥ H(P₀) − I.
pub fn fano_accuracy_upper_bound(mi: f64, prior_entropy: f64, cardinality: usize) -> Result<f64> {
    if cardinality < 2 {
        return Err(invalid("cardinality", "needs at least two states"));
    }
    if !(mi >= 0.0) {
        return Err(invalid("mi", "must be nonnegative"));
    }
    if mi > prior_entropy + 1e-12 {
        return Err(invalid("mi", "exceeds the prior entropy"));
    }
    let target = (prior_entropy - mi).max(0.0);
    if target == 0.0 {
        return Ok(1.0);
    }
    let extra = ((cardinality - 1) as f64).log2();
    let g = |a: f64| binary_entropy(1.0 - a) + (1.0 - a) * extra;
    // g decreases on [1/|D|, 1] from log₂|D| to 0.
    let (mut lo, mut hi) = (1.0 / cardinality as f64, 1.0);
    if g(lo) < target {
        return Ok(lo);
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{kraus_set_model1, kraus_set_model2, ModelIIParams, ModelIParams};
    use crate::runner::Serial;
    use crate::trajectory::posterior;

    fn model2(x: f64, phi: f64, eta: f64) -> Instrument {
        Instrument::new(kraus_set_model2(&ModelIIParams::new(x, phi).unwrap()), eta).unwrap()
    }

    #[test]
    fn hoeffding_counts() {
        assert_eq!(hoeffding_samples(0.02, 0.01).unwrap(), 6623);
        assert_eq!(hoeffding_samples(0.01, 0.01).unwrap(), 26492);
        assert_eq!(hoeffding_samples(1.0, 1.0 - 1e-9).unwrap(), 1);
        assert!(hoeffding_samples(0.0, 0.1).is_err());
        assert!(hoeffding_samples(0.1, 1.0).is_err());
        assert!(hoeffding_samples(0.1, 0.0).is_err());
        let b = SampleBudget::for_accuracy(0.02, 0.01).unwrap();
        assert!(b.epsilon() <= 0.02);
    }

    #[test]
    fn conditional_entropy_examples() {
        assert_eq!(entropy_bits(&[1.0, 0.0]), 0.0);
        assert_eq!(entropy_bits(&[0.5, 0.5]), 1.0);
        assert!((binary_entropy(0.880_797_077_977_882_4) - 0.527_065_341_003_161_6).abs() < 1e-12);
        let inst = model2(1.0, 0.0, 1.0);
        let h = record_conditional_entropy(&inst, &Prior::up_down(), &MeasurementRecord::new(vec![0])).unwrap();
        assert!((h - 0.527_065_341_003_161_6).abs() < 1e-12);
    }

    #[test]
    fn exact_single_step() {
        let inst = model2(1.0, 0.0, 1.0);
        let mi = exact_mi(&inst, &Prior::up_down(), 1).unwrap();
        assert!((mi - 0.472_934_658_996_838_4).abs() < 1e-12);
        assert_eq!(exact_mi(&inst, &Prior::up_down(), 0).unwrap(), 0.0);
    }

    #[test]
    fn exact_matches_direct_sum() {
        // Σ over all records of Pr·H(posterior), built from the public API.
        let inst = model2(0.6, 0.5, 0.7);
        let prior = Prior::up_down();
        let t = 6;
        let mut direct = 0.0;
        for code in 0..(1u32 << t) {
            let r = MeasurementRecord::new((0..t).map(|i| ((code >> i) & 1) as u8).collect());
            let pr: f64 = (0..2)
                .map(|d| prior.prob(d) * crate::trajectory::record_likelihood(&inst, prior.state(d), &r).unwrap())
                .sum();
            direct += pr * entropy_bits(&posterior(&inst, &prior, &r).unwrap());
        }
        let mi = exact_mi(&inst, &prior, t).unwrap();
        assert!((mi - (1.0 - direct)).abs() < 1e-12);
    }

    #[test]
    fn binomial_examples() {
        for &x in &[0.2, 0.5, 1.0, -0.7] {
            let p = 0.5 * (1.0 + f64::tanh(x));
            assert!((binomial_mi(x, 1) - (1.0 - binary_entropy(p))).abs() < 1e-12);
        }
        let exact = exact_mi(&model2(0.5, 0.0, 1.0), &Prior::up_down(), 5).unwrap();
        assert!((binomial_mi(0.5, 5) - exact).abs() < 1e-10);
        assert!(binomial_mi(1.0, 200) >= 1.0 - 1e-6);
        assert_eq!(binomial_mi(0.3, 0), 0.0);
    }

    #[test]
    fn last_measurement_examples() {
        let inst = model2(1.0, 0.0, 1.0);
        let prior = Prior::up_down();
        let one = last_measurement_mi(&inst, &prior, 1).unwrap();
        assert!((one - exact_mi(&inst, &prior, 1).unwrap()).abs() < 1e-12);
        for t in [5, 50] {
            assert!((last_measurement_mi(&inst, &prior, t).unwrap() - one).abs() < 1e-12);
        }
        let inst1 = Instrument::ideal(kraus_set_model1(&ModelIParams::new(1.0).unwrap()));
        let a = last_measurement_mi(&inst1, &prior, 5).unwrap();
        let b = last_measurement_mi(&inst1, &prior, 10).unwrap();
        assert!(b < a);
    }

    #[test]
    fn fano_examples() {
        assert_eq!(fano_accuracy_upper_bound(1.0, 1.0, 2).unwrap(), 1.0);
        // H₂ is flat at ½, so the root is only resolved to ~√ulp.
        assert!((fano_accuracy_upper_bound(0.0, 1.0, 2).unwrap() - 0.5).abs() < 1e-7);
        assert!(fano_accuracy_upper_bound(1.1, 1.0, 2).is_err());
        // Binary case: bound is 1 − H₂⁻¹(1 − I).
        let a = fano_accuracy_upper_bound(1.0 - binary_entropy(0.1), 1.0, 2).unwrap();
        assert!((a - 0.9).abs() < 1e-10);
    }

    #[test]
    fn estimate_is_exactly_zero_without_information() {
        let inst = model2(0.0, 0.3, 1.0);
        let est = estimate_mi(&inst, &Prior::up_down(), 5, SampleBudget::new(1000, 0.01).unwrap(), StreamKey::new(1, "mi"), &Serial).unwrap();
        assert!(est.value.abs() < 1e-12);
        assert_eq!(est.samples, 1000);
    }

    #[test]
    fn curve_prefixes_match_single_estimates() {
        let inst = model2(0.5, 0.2, 0.8);
        let prior = Prior::up_down();
        let key = StreamKey::new(11, "mi");
        let budget = SampleBudget::new(700, 0.01).unwrap();
        let curve = estimate_mi_curve(&inst, &prior, &[0, 3, 7], budget, key, &Serial).unwrap();
        assert_eq!(curve[0].value, 0.0);
        let single = estimate_mi(&inst, &prior, 7, budget, key, &Serial).unwrap();
        assert_eq!(curve[2].value, single.value);
        assert!(estimate_mi_curve(&inst, &prior, &[3, 3], budget, key, &Serial).is_err());
    }
}
