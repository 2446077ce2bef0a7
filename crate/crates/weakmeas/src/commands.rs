//! Subcommands. Each turns a [`RunConfig`] into a [`Table`].
//!
//! Randomness comes from the run seed through the named streams `mi`, `acc`,
//! `sme` and `ml`; sweep points take child streams keyed by their parameter
//! values, so adding or reordering points leaves the others unchanged.

use weakmeas_core::enumerate::check_capacity;
use weakmeas_core::info::{estimate_mi, estimate_mi_curve};
use weakmeas_core::readout::{estimate_accuracy, exact_accuracy, generate_dataset, overfit_experiment, LogisticHyper};
use weakmeas_core::sme::{integrate_path, sme_ensemble, Projection, SmeConfig, SmeModel};
use weakmeas_core::snr::{bi_awgn_mi, mi_plateau, SnrModel, SnrParams};
use weakmeas_core::superop::correlation_length;
use weakmeas_core::{Instrument, Model, ModelIIParams, ModelIParams, Pauli, PauliVector, Prior, SampleBudget, Sign, StreamKey};

use crate::config::RunConfig;
use crate::csv::{Cell, Table};
use crate::error::{config_err, CliError};
use crate::pool::Pool;
use crate::records;

type Result<T> = std::result::Result<T, CliError>;

/// Largest |O|^T for which `accuracy` also reports the enumerated value.
const EXACT_ACCURACY_LIMIT: usize = 1 << 20;

pub fn run(cfg: &RunConfig) -> Result<Table> {
    let pool = Pool::new(cfg.usize("workers")?);
    match cfg.command.as_str() {
        "mi-sweep" => mi_sweep(cfg, &pool),
        "plateau-compare" => plateau_compare(cfg, &pool),
        "nonmonotone-scan" => nonmonotone_scan(cfg, &pool),
        "xi" => xi(cfg),
        "sme-ensemble" => sme(cfg, &pool),
        "overfit" => overfit(cfg, &pool),
        "accuracy" => accuracy(cfg, &pool),
        "snr" => snr(cfg),
        "records" => dump_records(cfg, &pool),
        "replay" => replay(cfg),
        other => Err(config_err(format!("unknown command `{other}`"))),
    }
}

/// Rebuilds the configuration recorded in a CSV header, with `workers` and
/// `out` taken from the replaying invocation.
pub fn replay_config(cfg: &RunConfig, text: &str) -> Result<RunConfig> {
    let mut pairs = crate::csv::parse_header(text);
    let pos = pairs
        .iter()
        .position(|(k, _)| k == "command")
        .ok_or_else(|| config_err("file has no `command` header"))?;
    let (_, command) = pairs.remove(pos);
    if command == "replay" {
        return Err(config_err("cannot replay a replay"));
    }
    for key in ["workers", "out"] {
        if let Some(v) = cfg.get(key) {
            pairs.push((key.to_string(), v.to_string()));
        }
    }
    RunConfig::from_pairs(&command, pairs)
}

fn replay(cfg: &RunConfig) -> Result<Table> {
    let path = cfg.str("file")?;
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("reading {path}: {e}")))?;
    run(&replay_config(cfg, &text)?)
}

fn seed(cfg: &RunConfig) -> Result<u64> {
    cfg.u64("seed")
}

/// Model I takes no field; Model II takes `phi`, or `a` with φ = a·x².
fn build_model(cfg: &RunConfig, x: f64) -> Result<Model> {
    let (phi, a) = (cfg.has("phi"), cfg.has("a"));
    match cfg.str("model")? {
        "I" => {
            if phi || a {
                return Err(config_err("model I takes neither `phi` nor `a`"));
            }
            Ok(Model::I(ModelIParams::new(x)?))
        }
        "II" => {
            let params = match (phi, a) {
                (true, true) => return Err(config_err("give `phi` or `a`, not both")),
                (true, false) => ModelIIParams::new(x, cfg.f64("phi")?)?,
                (false, true) => ModelIIParams::from_scaled_field(x, cfg.f64("a")?)?,
                (false, false) => ModelIIParams::new(x, 0.0)?,
            };
            Ok(Model::II(params))
        }
        m => Err(config_err(format!("unknown model `{m}` (expected I or II)"))),
    }
}

fn build_prior(cfg: &RunConfig) -> Result<Prior> {
    match cfg.str("prior")? {
        "z" => Ok(Prior::axis_pair(Pauli::Z)),
        "x" => Ok(Prior::axis_pair(Pauli::X)),
        "y" => Ok(Prior::axis_pair(Pauli::Y)),
        p => Err(config_err(format!("unknown prior `{p}` (expected z, x or y)"))),
    }
}

/// `M` if given, else the Hoeffding count for (`eps`, `delta`).
fn budget(cfg: &RunConfig) -> Result<SampleBudget> {
    let delta = cfg.f64("delta")?;
    Ok(if cfg.has("M") {
        SampleBudget::new(cfg.u64("M")?, delta)?
    } else {
        SampleBudget::for_accuracy(cfg.f64("eps")?, delta)?
    })
}

fn sorted_steps(mut t: Vec<usize>) -> Vec<usize> {
    t.sort_unstable();
    t.dedup();
    t
}

/// Step grid for one x. With `Tmax`, the smallest x gets `points` evenly
/// spaced lengths up to `Tmax` and every other x the lengths with the same
/// x²T, so curves share abscissae.
fn sweep_steps(cfg: &RunConfig, x: f64, x_min: f64) -> Result<Vec<usize>> {
    match (cfg.has("T"), cfg.has("Tmax")) {
        (true, true) => Err(config_err("give `T` or `Tmax`, not both")),
        (true, false) => Ok(sorted_steps(cfg.usize_list("T")?)),
        (false, true) => {
            if x_min == 0.0 {
                return Err(config_err("`Tmax` needs nonzero x values"));
            }
            let t_max = cfg.f64("Tmax")?;
            let points = cfg.usize("points")?;
            if points == 0 {
                return Err(config_err("`points` must be positive"));
            }
            let scale = t_max * (x_min / x).powi(2);
            let grid = (1..=points).map(|k| ((scale * k as f64 / points as f64).round() as usize).max(1)).collect();
            Ok(sorted_steps(grid))
        }
        (false, false) => Err(config_err("missing `T` or `Tmax`")),
    }
}

fn mi_sweep(cfg: &RunConfig, pool: &Pool) -> Result<Table> {
    let xs = cfg.f64_list("x")?;
    let eta = cfg.f64("eta")?;
    let prior = build_prior(cfg)?;
    let budget = budget(cfg)?;
    let root = StreamKey::new(seed(cfg)?, "mi");
    let x_min = xs.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let mut table = Table::new(cfg.header(), &["x", "T", "x2T", "mi", "epsilon", "delta", "M"]);
    for &x in &xs {
        let inst = Instrument::from_model(&build_model(cfg, x)?, eta)?;
        let steps = sweep_steps(cfg, x, x_min)?;
        let ests = estimate_mi_curve(&inst, &prior, &steps, budget, root.child(x.to_bits()), pool)?;
        for (t, e) in steps.iter().zip(ests) {
            table.push(vec![x.into(), (*t).into(), (x * x * *t as f64).into(), e.value.into(), e.epsilon.into(), e.delta.into(), e.samples.into()]);
        }
    }
    Ok(table)
}

fn plateau_compare(cfg: &RunConfig, pool: &Pool) -> Result<Table> {
    let models = cfg.strs("model")?;
    let etas = cfg.f64_list("eta")?;
    let alpha = cfg.f64("alpha")?;
    let x = cfg.f64("x")?;
    let x2t = cfg.f64("x2T")?;
    if x.is_nan() || x <= 0.0 {
        return Err(config_err("`x` must be positive"));
    }
    let steps = (x2t / (x * x)).round() as usize;
    let prior = build_prior(cfg)?;
    let budget = budget(cfg)?;
    let root = StreamKey::new(seed(cfg)?, "mi");
    let mut table = Table::new(
        cfg.header(),
        &["model", "eta", "alpha", "x", "x2T", "mi_numeric", "mi_theory", "ratio", "diverges", "T", "epsilon", "M"],
    );
    for name in &models {
        // Per-step precession φ = ωΔt with Δt/τ = x²/4 and α = ωτ/2.
        let (model, snr_model, row_alpha, tag) = match name.as_str() {
            "I" => (Model::I(ModelIParams::new(x)?), SnrModel::I, f64::NAN, 1),
            "II" => (Model::II(ModelIIParams::new(x, 0.5 * alpha * x * x)?), SnrModel::II { alpha }, alpha, 2),
            m => return Err(config_err(format!("unknown model `{m}` (expected I or II)"))),
        };
        for &eta in &etas {
            let inst = Instrument::from_model(&model, eta)?;
            let key = root.child(tag).child(eta.to_bits());
            let est = estimate_mi(&inst, &prior, steps, budget, key, pool)?;
            let plateau = mi_plateau(&SnrParams::new(snr_model, 1.0, eta)?);
            let ratio = if plateau.bits > 0.0 { est.value / plateau.bits } else { f64::NAN };
            table.push(vec![
                name.as_str().into(),
                eta.into(),
                row_alpha.into(),
                x.into(),
                x2t.into(),
                est.value.into(),
                plateau.bits.into(),
                ratio.into(),
                plateau.diverges.into(),
                steps.into(),
                est.epsilon.into(),
                est.samples.into(),
            ]);
        }
    }
    Ok(table)
}

fn nonmonotone_scan(cfg: &RunConfig, pool: &Pool) -> Result<Table> {
    let phis = cfg.f64_list("phi")?;
    let xs = cfg.f64_list("x")?;
    let steps = cfg.usize("T")?;
    let eta = cfg.f64("eta")?;
    let prior = build_prior(cfg)?;
    let budget = budget(cfg)?;
    let root = StreamKey::new(seed(cfg)?, "mi");
    let mut table = Table::new(cfg.header(), &["phi", "x", "T", "x_sqrtT", "mi", "epsilon", "delta", "M"]);
    for &phi in &phis {
        for &x in &xs {
            let inst = Instrument::from_model(&Model::II(ModelIIParams::new(x, phi)?), eta)?;
            let key = root.child(phi.to_bits()).child(x.to_bits());
            let e = estimate_mi(&inst, &prior, steps, budget, key, pool)?;
            table.push(vec![
                phi.into(),
                x.into(),
                steps.into(),
                (x * (steps as f64).sqrt()).into(),
                e.value.into(),
                e.epsilon.into(),
                e.delta.into(),
                e.samples.into(),
            ]);
        }
    }
    Ok(table)
}

fn xi(cfg: &RunConfig) -> Result<Table> {
    let mut table = Table::new(cfg.header(), &["x", "phi", "xi", "lambda2_re", "lambda2_im"]);
    for x in cfg.f64_list("x")? {
        let model = build_model(cfg, x)?;
        let inst = Instrument::from_model(&model, 1.0)?;
        let report = correlation_length(inst.mean_channel());
        table.push(vec![x.into(), model.phi().into(), report.xi.into(), report.lambda2.re.into(), report.lambda2.im.into()]);
    }
    Ok(table)
}

fn initial_state(name: &str) -> Result<PauliVector> {
    Ok(match name {
        "up" => PauliVector::up(),
        "down" => PauliVector::down(),
        "plus" => PauliVector::eigenstate(Pauli::X, Sign::Plus),
        "minus" => PauliVector::eigenstate(Pauli::X, Sign::Minus),
        "plus_y" => PauliVector::eigenstate(Pauli::Y, Sign::Plus),
        "minus_y" => PauliVector::eigenstate(Pauli::Y, Sign::Minus),
        "mixed" => PauliVector::maximally_mixed(),
        s => return Err(config_err(format!("unknown state `{s}`"))),
    })
}

fn sme(cfg: &RunConfig, pool: &Pool) -> Result<Table> {
    let model = match cfg.str("model")? {
        "I" => SmeModel::I,
        "II" => SmeModel::II { omega: cfg.f64("omega")? },
        m => return Err(config_err(format!("unknown model `{m}` (expected I or II)"))),
    };
    let tau = cfg.f64("tau")?;
    let dt = if cfg.has("dt") { cfg.f64("dt")? } else { tau / 1000.0 };
    let projection = match cfg.str("projection")? {
        "physical" => Projection::Physical,
        "none" => Projection::None,
        p => return Err(config_err(format!("unknown projection `{p}` (expected physical or none)"))),
    };
    let seed = seed(cfg)?;
    let config = SmeConfig::new(model, tau, cfg.f64("eta")?, dt, cfg.f64("t")?, seed)?.with_projection(projection);
    let rho0 = initial_state(cfg.str("state")?)?;
    let paths = cfg.u64("paths")?;
    if paths == 0 {
        return Err(config_err("`paths` must be positive"));
    }
    if paths == 1 {
        let path = integrate_path(&config, &rho0, &mut StreamKey::new(seed, "sme").rng(0))?;
        let ch = model.channels();
        let mut columns = vec!["t", "p0", "px", "py", "pz"];
        let dy_names = ["dy1", "dy2", "dy3"];
        columns.extend(&dy_names[..ch]);
        let mut table = Table::new(cfg.header(), &columns);
        for (k, (t, p)) in path.times.iter().zip(&path.states).enumerate() {
            let mut row: Vec<Cell> = vec![(*t).into(), p.p0.into(), p.px.into(), p.py.into(), p.pz.into()];
            // The initial row covers no interval.
            match k.checked_sub(1) {
                Some(j) => row.extend(path.dy[j].as_slice().iter().map(|v| Cell::from(*v))),
                None => row.extend(std::iter::repeat_n(Cell::from(0.0), ch)),
            }
            table.push(row);
        }
        return Ok(table);
    }
    let samples = cfg.usize("samples")?;
    if samples == 0 {
        return Err(config_err("`samples` must be positive"));
    }
    let t_final = config.t_final;
    let times: Vec<f64> = (0..=samples).map(|k| t_final * k as f64 / samples as f64).collect();
    let summary = sme_ensemble(&config, &rho0, paths, &times, cfg.bool("control")?, pool)?;
    let mut table = Table::new(
        cfg.header(),
        &["t", "mean_px", "mean_py", "mean_pz", "stderr_px", "stderr_py", "stderr_pz"],
    );
    for ((t, m), s) in summary.times.iter().zip(&summary.mean).zip(&summary.stderr) {
        table.push(vec![(*t).into(), m[0].into(), m[1].into(), m[2].into(), s[0].into(), s[1].into(), s[2].into()]);
    }
    Ok(table)
}

fn overfit(cfg: &RunConfig, pool: &Pool) -> Result<Table> {
    let x = cfg.f64("x")?;
    let inst = Instrument::from_model(&build_model(cfg, x)?, cfg.f64("eta")?)?;
    let n = cfg.usize("n")?;
    let n_train = if cfg.has("n_train") { cfg.usize("n_train")? } else { n };
    let n_test = if cfg.has("n_test") { cfg.usize("n_test")? } else { n };
    let hyper = LogisticHyper { iterations: cfg.usize("iterations")?, learning_rate: cfg.f64("lr")?, l2: cfg.f64("l2")? };
    let steps = sorted_steps(cfg.usize_list("T")?);
    let key = StreamKey::new(seed(cfg)?, "ml");
    let rows = overfit_experiment(&inst, &Prior::up_down(), &steps, n_train, n_test, hyper, cfg.f64("delta")?, key, pool)?;
    let mut table = Table::new(cfg.header(), &["T", "train_acc", "test_acc", "bayes_acc", "bayes_eps"]);
    for r in rows {
        table.push(vec![r.steps.into(), r.train_acc.into(), r.test_acc.into(), r.bayes_acc.into(), r.bayes_eps.into()]);
    }
    Ok(table)
}

fn accuracy(cfg: &RunConfig, pool: &Pool) -> Result<Table> {
    let x = cfg.f64("x")?;
    let inst = Instrument::from_model(&build_model(cfg, x)?, cfg.f64("eta")?)?;
    let prior = build_prior(cfg)?;
    let budget = budget(cfg)?;
    let root = StreamKey::new(seed(cfg)?, "acc");
    let mut table = Table::new(cfg.header(), &["T", "accuracy", "epsilon", "delta", "M", "exact"]);
    for t in sorted_steps(cfg.usize_list("T")?) {
        let e = estimate_accuracy(&inst, &prior, t, budget, root.child(t as u64), pool)?;
        let small = (inst.outcome_count() as u128).checked_pow(t as u32).is_some_and(|n| n <= EXACT_ACCURACY_LIMIT as u128);
        let exact = if small && check_capacity(inst.outcome_count(), t).is_ok() { exact_accuracy(&inst, &prior, t)? } else { f64::NAN };
        table.push(vec![t.into(), e.value.into(), e.epsilon.into(), e.delta.into(), e.samples.into(), exact.into()]);
    }
    Ok(table)
}

fn snr(cfg: &RunConfig) -> Result<Table> {
    let model = match cfg.str("model")? {
        "I" if cfg.has("alpha") => return Err(config_err("model I takes no `alpha`")),
        "I" => SnrModel::I,
        "II" => SnrModel::II { alpha: cfg.f64("alpha")? },
        m => return Err(config_err(format!("unknown model `{m}` (expected I or II)"))),
    };
    let params = SnrParams::new(model, cfg.f64("tau")?, cfg.f64("eta")?)?;
    let mut table = Table::new(cfg.header(), &["t", "gamma", "mi_bits"]);
    for t in cfg.f64_list("t")? {
        if t < 0.0 {
            return Err(config_err("`t` must be nonnegative"));
        }
        let g = params.gamma(t);
        table.push(vec![t.into(), g.into(), bi_awgn_mi(g)?.into()]);
    }
    Ok(table)
}

/// The records are the training set that `overfit` draws for the same
/// model, seed and T (the `ml` stream, child T, indices from 0).
fn dump_records(cfg: &RunConfig, pool: &Pool) -> Result<Table> {
    let x = cfg.f64("x")?;
    let inst = Instrument::from_model(&build_model(cfg, x)?, cfg.f64("eta")?)?;
    let steps = cfg.usize("T")?;
    let key = StreamKey::new(seed(cfg)?, "ml").child(steps as u64);
    let data = generate_dataset(&inst, &build_prior(cfg)?, steps, cfg.usize("n")?, 0, key, pool)?;
    let mut table = Table::new(cfg.header(), &["index", "label", "record"]);
    for (i, (r, l)) in data.records.iter().zip(&data.labels).enumerate() {
        table.push(vec![i.into(), Cell::Int(*l as i64), Cell::Text(records::encode(r))]);
    }
    Ok(table)
}
