//! Predicting the initial state from a record: the Bayes-optimal rule, its
//! accuracy, and a one-hot linear classifier trained by logistic regression.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // std inherent methods win when std is linked
use num_traits::Float;
use rand::Rng;

use crate::enumerate::{for_each_record, CompensatedSum};
use crate::error::{invalid, Result};
use crate::info::{EstimateWithBound, SampleBudget};
use crate::rng::StreamKey;
use crate::runner::{chunk_ranges, Runner};
use crate::trajectory::{walk, Instrument, MeasurementRecord, PosteriorTracker, Prior};

/// Posterior argmax; ties go to the earliest prior state.
pub fn bayes_predict(inst: &Instrument, prior: &Prior, record: &MeasurementRecord) -> Result<usize> {
    record.validate(inst.outcome_count())?;
    let mut tracker = PosteriorTracker::new(inst, prior);
    for &y in record.as_slice() {
        tracker.push(y as usize);
    }
    tracker.argmax()
}

/// Fraction of `budget.samples` sampled (state, record) pairs where the Bayes
/// rule recovers the state; ε is the Hoeffding half-width.
pub fn estimate_accuracy<R: Runner>(
    inst: &Instrument,
    prior: &Prior,
    steps: usize,
    budget: SampleBudget,
    key: StreamKey,
    runner: &R,
) -> Result<EstimateWithBound> {
    SampleBudget::new(budget.samples, budget.delta)?;
    let ranges = chunk_ranges(budget.samples);
    let hits = runner.map_chunks(ranges.len(), |c| {
        let (start, end) = ranges[c];
        let mut hits = 0u64;
        for i in start..end {
            let mut rng = key.rng(i);
            let d = prior.index_for(rng.random());
            let mut tracker = PosteriorTracker::new(inst, prior);
            walk(inst, prior.state(d), steps, &mut rng, |_, y| tracker.push(y));
            if tracker.argmax().expect("sampled record is possible") == d {
                hits += 1;
            }
        }
        hits
    });
    let total: u64 = hits.iter().sum();
    Ok(EstimateWithBound {
        value: total as f64 / budget.samples as f64,
        epsilon: budget.epsilon(),
        delta: budget.delta,
        samples: budget.samples,
        seed: key.seed(),
    })
}

/// Bayes accuracy Σ_records max_d π_d·Pr[record | ρ_d] for every T in 0..=t_max.
pub fn exact_accuracy_profile(inst: &Instrument, prior: &Prior, t_max: usize) -> Result<Vec<f64>> {
    let mut acc = vec![CompensatedSum::default(); t_max + 1];
    for_each_record(inst, prior, t_max, |depth, w, joint| {
        acc[depth].add(w * joint.iter().copied().fold(0.0, f64::max));
    })?;
    Ok(acc.iter().map(|s| s.value()).collect())
}

pub fn exact_accuracy(inst: &Instrument, prior: &Prior, steps: usize) -> Result<f64> {
    Ok(exact_accuracy_profile(inst, prior, steps)?[steps])
}

/// |O|×T indicator matrix stored row-major: entry (a, t) at `a·T + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHot {
    pub alphabet: usize,
    pub steps: usize,
    pub data: Vec<f64>,
}

impl OneHot {
    pub fn get(&self, a: usize, t: usize) -> f64 {
        self.data[a * self.steps + t]
    }

    pub fn column(&self, t: usize) -> Vec<f64> {
        (0..self.alphabet).map(|a| self.get(a, t)).collect()
    }
}

pub fn one_hot_encode(record: &MeasurementRecord, alphabet: usize) -> Result<OneHot> {
    record.validate(alphabet)?;
    let steps = record.len();
    let mut data = vec![0.0; alphabet * steps];
    for (t, &a) in record.as_slice().iter().enumerate() {
        data[a as usize * steps + t] = 1.0;
    }
    Ok(OneHot { alphabet, steps, data })
}

/// Records with ±1 labels: +1 for the first prior state, −1 for the second.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub records: Vec<MeasurementRecord>,
    pub labels: Vec<i8>,
    pub alphabet: usize,
    pub steps: usize,
    pub seed: u64,
    /// Stream index of the first record; record i used index `first_index + i`.
    pub first_index: u64,
}

impl LabeledDataset {
    pub fn new(records: Vec<MeasurementRecord>, labels: Vec<i8>, alphabet: usize) -> Result<Self> {
        if records.is_empty() {
            return Err(invalid("dataset", "must not be empty"));
        }
        if records.len() != labels.len() {
            return Err(invalid("labels", "need one label per record"));
        }
        let steps = records[0].len();
        for r in &records {
            if r.len() != steps {
                return Err(invalid("dataset", "records must share one length"));
            }
            r.validate(alphabet)?;
        }
        if labels.iter().any(|l| *l != 1 && *l != -1) {
            return Err(invalid("labels", "must be +1 or -1"));
        }
        Ok(Self { records, labels, alphabet, steps, seed: 0, first_index: 0 })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Samples `n` labeled records from a two-state prior using stream indices
/// `first_index..first_index + n`. Disjoint index ranges give independent sets.
pub fn generate_dataset<R: Runner>(
    inst: &Instrument,
    prior: &Prior,
    steps: usize,
    n: usize,
    first_index: u64,
    key: StreamKey,
    runner: &R,
) -> Result<LabeledDataset> {
    if prior.len() != 2 {
        return Err(invalid("prior", "labels need exactly two states"));
    }
    if n == 0 {
        return Err(invalid("n", "must be at least one"));
    }
    let ranges = chunk_ranges(n as u64);
    let parts = runner.map_chunks(ranges.len(), |c| {
        let (start, end) = ranges[c];
        (start..end)
            .map(|i| {
                let s = crate::trajectory::sample_from_prior(inst, prior, steps, &mut key.rng(first_index + i));
                let label = if s.initial_index == Some(0) { 1 } else { -1 };
                (s.record, label)
            })
            .collect::<Vec<_>>()
    });
    let (records, labels) = parts.into_iter().flatten().unzip();
    Ok(LabeledDataset {
        records,
        labels,
        alphabet: inst.outcome_count(),
        steps,
        seed: key.seed(),
        first_index,
    })
}

/// Y = sgn(Σ_{a,t} W_{a,t}·(x_t)_a − θ), with sgn(0) = +1.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub alphabet: usize,
    pub steps: usize,
    /// Layout as in [`OneHot`].
    pub weights: Vec<f64>,
    pub theta: f64,
}

impl LinearClassifier {
    pub fn zeros(alphabet: usize, steps: usize) -> Self {
        Self { alphabet, steps, weights: vec![0.0; alphabet * steps], theta: 0.0 }
    }

    /// Σ_t W_{a_t, t} − θ.
    pub fn score(&self, record: &MeasurementRecord) -> f64 {
        debug_assert_eq!(record.len(), self.steps);
        let mut s = -self.theta;
        for (t, &a) in record.as_slice().iter().enumerate() {
            s += self.weights[a as usize * self.steps + t];
        }
        s
    }

    pub fn predict(&self, record: &MeasurementRecord) -> i8 {
        if self.score(record) >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn accuracy(&self, data: &LabeledDataset) -> f64 {
        let hits = data.records.iter().zip(&data.labels).filter(|(r, l)| self.predict(r) == **l).count();
        hits as f64 / data.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticHyper {
    pub iterations: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        Self { iterations: 500, learning_rate: 0.1, l2: 0.0 }
    }
}

/// Fitted classifier plus the training loss after each iteration (index 0 is
/// the initial loss).
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub classifier: LinearClassifier,
    pub losses: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logistic_loss(model: &LinearClassifier, data: &LabeledDataset, l2: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for (r, &l) in data.records.iter().zip(&data.labels) {
        acc.add(softplus(-(l as f64) * model.score(r)));
    }
    let reg: f64 = model.weights.iter().map(|w| w * w).sum();
    acc.value() / data.len() as f64 + 0.5 * l2 * reg
}

/// Full-batch gradient descent on (1/n)·Σ ln(1 + e^{−y·s}) + (l2/2)·|W|²
/// from W = 0, θ = 0. A step that would raise the loss is halved until it
/// does not, so the loss never increases.
pub fn logistic_fit(train: &LabeledDataset, hyper: LogisticHyper) -> Result<LogisticFit> {
    if train.is_empty() {
        return Err(invalid("train", "must not be empty"));
    }
    if !(hyper.l2 >= 0.0) || !hyper.l2.is_finite() {
        return Err(invalid("l2", "must be finite and nonnegative"));
    }
    if !(hyper.learning_rate > 0.0) || !hyper.learning_rate.is_finite() {
        return Err(invalid("learning_rate", "must be positive"));
    }
    let n = train.len() as f64;
    let steps = train.steps;
    let mut model = LinearClassifier::zeros(train.alphabet, steps);
    let mut loss = logistic_loss(&model, train, hyper.l2);
    let mut losses = Vec::with_capacity(hyper.iterations + 1);
    losses.push(loss);
    let mut grad_w = vec![0.0; model.weights.len()];
    let mut trial = model.clone();
    for _ in 0..hyper.iterations {
        grad_w.iter_mut().zip(&model.weights).for_each(|(g, w)| *g = hyper.l2 * w);
        let mut grad_theta = 0.0;
        for (r, &l) in train.records.iter().zip(&train.labels) {
            let y = l as f64;
            // d/ds ln(1 + e^{−ys}) = −y·σ(−ys).
            let g = -y * sigmoid(-y * model.score(r)) / n;
            for (t, &a) in r.as_slice().iter().enumerate() {
                grad_w[a as usize * steps + t] += g;
            }
            grad_theta -= g;
        }
        let mut step = hyper.learning_rate;
        let mut accepted = false;
        for _ in 0..60 {
            for ((tw, w), g) in trial.weights.iter_mut().zip(&model.weights).zip(&grad_w) {
                *tw = w - step * g;
            }
            trial.theta = model.theta - step * grad_theta;
            let next = logistic_loss(&trial, train, hyper.l2);
            if next <= loss {
                core::mem::swap(&mut model, &mut trial);
                loss = next;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        losses.push(loss);
        if !accepted {
            break;
        }
    }
    Ok(LogisticFit { classifier: model, losses })
}

/// One row of the overfitting table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverfitRow {
    pub steps: usize,
    pub train_acc: f64,
    pub test_acc: f64,
    /// Bayes rule on the same test records.
    pub bayes_acc: f64,
    /// Hoeffding half-width for `n_test` draws.
    pub bayes_eps: f64,
}

/// For each T: train on stream indices [0, n_train), test on
/// [n_train, n_train + n_test) of the same stream.
#[allow(clippy::too_many_arguments)]
pub fn overfit_experiment<R: Runner>(
    inst: &Instrument,
    prior: &Prior,
    steps: &[usize],
    n_train: usize,
    n_test: usize,
    hyper: LogisticHyper,
    delta: f64,
    key: StreamKey,
    runner: &R,
) -> Result<Vec<OverfitRow>> {
    if n_train == 0 || n_test == 0 {
        return Err(invalid("n", "train and test sets need at least one record"));
    }
    let bayes_eps = SampleBudget::new(n_test as u64, delta)?.epsilon();
    let mut rows = Vec::with_capacity(steps.len());
    for &t in steps {
        let sub = key.child(t as u64);
        let train = generate_dataset(inst, prior, t, n_train, 0, sub, runner)?;
        let test = generate_dataset(inst, prior, t, n_test, n_train as u64, sub, runner)?;
        let fit = logistic_fit(&train, hyper)?;
        let mut hits = 0usize;
        for (r, &l) in test.records.iter().zip(&test.labels) {
            let d = bayes_predict(inst, prior, r)?;
            let guess = if d == 0 { 1 } else { -1 };
            if guess == l {
                hits += 1;
            }
        }
        rows.push(OverfitRow {
            steps: t,
            train_acc: fit.classifier.accuracy(&train),
            test_acc: fit.classifier.accuracy(&test),
            bayes_acc: hits as f64 / n_test as f64,
            bayes_eps,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{kraus_set_model2, ModelIIParams};
    use crate::runner::Serial;

    fn model2(x: f64, phi: f64) -> Instrument {
        Instrument::ideal(kraus_set_model2(&ModelIIParams::new(x, phi).unwrap()))
    }

    #[test]
    fn majority_rule_for_commuting_measurement() {
        let inst = model2(0.8, 0.0);
        let prior = Prior::up_down();
        assert_eq!(bayes_predict(&inst, &prior, &MeasurementRecord::new(vec![0, 0, 1])).unwrap(), 0);
        assert_eq!(bayes_predict(&inst, &prior, &MeasurementRecord::new(vec![1, 0, 1])).unwrap(), 1);
        // Tie goes to ↑.
        assert_eq!(bayes_predict(&inst, &prior, &MeasurementRecord::new(vec![1, 0])).unwrap(), 0);
        assert_eq!(bayes_predict(&model2(0.0, 0.4), &prior, &MeasurementRecord::new(vec![1, 1, 1])).unwrap(), 0);
        assert!(bayes_predict(&inst, &prior, &MeasurementRecord::new(vec![2])).is_err());
    }

    #[test]
    fn exact_accuracy_single_step() {
        let a = exact_accuracy(&model2(1.0, 0.0), &Prior::up_down(), 1).unwrap();
        assert!((a - 0.5 * (1.0 + f64::tanh(1.0))).abs() < 1e-15);
        assert!((exact_accuracy(&model2(1.0, 0.0), &Prior::up_down(), 0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn estimated_accuracy_brackets_exact() {
        let inst = model2(0.7, 0.4);
        let prior = Prior::up_down();
        let budget = SampleBudget::new(4000, 0.01).unwrap();
        let est = estimate_accuracy(&inst, &prior, 4, budget, StreamKey::new(3, "acc"), &Serial).unwrap();
        let exact = exact_accuracy(&inst, &prior, 4).unwrap();
        assert!((est.value - exact).abs() <= est.epsilon);
    }

    #[test]
    fn one_hot_examples() {
        let e = one_hot_encode(&MeasurementRecord::new(vec![0]), 2).unwrap();
        assert_eq!(e.column(0), vec![1.0, 0.0]);
        let e = one_hot_encode(&MeasurementRecord::new(vec![1, 0]), 2).unwrap();
        assert_eq!(e.column(0), vec![0.0, 1.0]);
        assert_eq!(e.column(1), vec![1.0, 0.0]);
        assert!(one_hot_encode(&MeasurementRecord::new(vec![3]), 2).is_err());
    }

    fn toy() -> LabeledDataset {
        let mut records = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..100 {
            records.push(MeasurementRecord::new(vec![0, 0]));
            labels.push(1);
            records.push(MeasurementRecord::new(vec![1, 1]));
            labels.push(-1);
        }
        LabeledDataset::new(records, labels, 2).unwrap()
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let data = toy();
        let fit = logistic_fit(&data, LogisticHyper::default()).unwrap();
        assert_eq!(fit.classifier.accuracy(&data), 1.0);
        assert!(fit.losses.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn strong_regularization_collapses_weights() {
        // Unbalanced so that θ dominates the vanishing weights.
        let mut records = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let up = i % 4 != 0;
            records.push(MeasurementRecord::new(if up { vec![0, 0] } else { vec![1, 1] }));
            labels.push(if up { 1 } else { -1 });
        }
        let data = LabeledDataset::new(records, labels, 2).unwrap();
        let fit = logistic_fit(&data, LogisticHyper { l2: 1e6, ..LogisticHyper::default() }).unwrap();
        assert!(fit.classifier.weights.iter().all(|w| w.abs() < 1e-5));
        let c = &fit.classifier;
        for r in &data.records {
            assert_eq!(c.predict(r), if -c.theta >= 0.0 { 1 } else { -1 });
        }
    }

    #[test]
    fn prediction_matches_definition() {
        let c = LinearClassifier { alphabet: 2, steps: 3, weights: vec![0.5, -1.0, 0.25, -0.5, 2.0, 0.0], theta: 0.3 };
        let r = MeasurementRecord::new(vec![1, 0, 1]);
        let x = one_hot_encode(&r, 2).unwrap();
        let s: f64 = c.weights.iter().zip(&x.data).map(|(w, v)| w * v).sum::<f64>() - c.theta;
        assert!((c.score(&r) - s).abs() < 1e-15);
        assert_eq!(c.predict(&r), if s >= 0.0 { 1 } else { -1 });
    }

    #[test]
    fn datasets_use_disjoint_indices() {
        let inst = model2(0.4, 0.2);
        let prior = Prior::up_down();
        let key = StreamKey::new(1, "ml");
        let train = generate_dataset(&inst, &prior, 5, 50, 0, key, &Serial).unwrap();
        let test = generate_dataset(&inst, &prior, 5, 50, 50, key, &Serial).unwrap();
        let both = generate_dataset(&inst, &prior, 5, 100, 0, key, &Serial).unwrap();
        assert_eq!(&both.records[..50], &train.records[..]);
        assert_eq!(&both.records[50..], &test.records[..]);
        assert!(train.first_index + train.len() as u64 <= test.first_index);
    }
}
