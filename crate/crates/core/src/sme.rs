//! Diffusive stochastic master equations in the Pauli basis.
//!
//! With ρ = ½(I + p·σ) and measurement operators L = σ_i/√τ, one
//! Euler–Maruyama step is
//!
//!   p ← p + A·p·dt + Σ_k √(η/τ)·2(e_i − p_i·p)·dW_k
//!   dy_k = 2(√η/τ)·p_i·dt + dW_k/√τ
//!
//! where k runs over the monitored axes i (x, y, z for Model I; z for
//! Model II) and A is the Lindblad generator: −(4/τ)·I for Model I, and for
//! Model II dephasing at 2/τ on x and y plus precession at ω about x.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // std inherent methods win when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{DensityMatrix, PauliVector};
use crate::error::{invalid, Error, Result};
use crate::rng::StreamKey;
use crate::runner::{chunk_ranges, Runner};
use crate::snr::cos_sinc;

/// Pre-projection Bloch norm treated as divergence.
pub const BLOWUP_NORM: f64 = 1.5;
/// Pure-state tolerance for sphere renormalization at η = 1.
pub const PURE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmeModel {
    /// X, Y and Z monitored on three independent channels.
    I,
    /// Z monitored while precessing about X at angular frequency ω.
    II { omega: f64 },
}

impl SmeModel {
    pub fn channels(&self) -> usize {
        match self {
            SmeModel::I => 3,
            SmeModel::II { .. } => 1,
        }
    }

    fn axes(&self) -> &'static [usize] {
        match self {
            SmeModel::I => &[0, 1, 2],
            SmeModel::II { .. } => &[2],
        }
    }

    /// Drift generator acting on (px, py, pz).
    pub fn generator(&self, tau: f64) -> [[f64; 3]; 3] {
        match *self {
            SmeModel::I => {
                let g = -4.0 / tau;
                [[g, 0.0, 0.0], [0.0, g, 0.0], [0.0, 0.0, g]]
            }
            SmeModel::II { omega } => {
                let g = -2.0 / tau;
                [[g, 0.0, 0.0], [0.0, g, -omega], [0.0, omega, 0.0]]
            }
        }
    }
}

/// What happens to the Bloch vector after each raw step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    /// Pure states at η = 1 are renormalized onto the sphere; otherwise the
    /// vector is clipped back into the unit ball. Norms beyond
    /// [`BLOWUP_NORM`] fail.
    #[default]
    Physical,
    /// Raw Euler–Maruyama. Only non-finite states fail.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmeConfig {
    pub model: SmeModel,
    pub tau: f64,
    pub eta: f64,
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
    pub projection: Projection,
}

impl SmeConfig {
    pub fn new(model: SmeModel, tau: f64, eta: f64, dt: f64, t_final: f64, seed: u64) -> Result<Self> {
        let c = Self { model, tau, eta, dt, t_final, seed, projection: Projection::Physical };
        c.validate()?;
        Ok(c)
    }

    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = projection;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(invalid("tau", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(invalid("eta", "must lie in [0, 1]"));
        }
        if !(self.dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        if self.dt > self.tau / 50.0 {
            return Err(invalid("dt", "must not exceed tau/50"));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(invalid("t_final", "must be finite and nonnegative"));
        }
        if let SmeModel::II { omega } = self.model {
            if !omega.is_finite() {
                return Err(invalid("omega", "must be finite"));
            }
        }
        Ok(())
    }

    /// Number of steps, t_final/dt rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// α = ωτ/2 for Model II.
    pub fn alpha(&self) -> Option<f64> {
        match self.model {
            SmeModel::I => None,
            SmeModel::II { omega } => Some(0.5 * omega * self.tau),
        }
    }
}

/// Per-channel values; only the first `len` entries are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelValues {
    len: usize,
    v: [f64; 3],
}

impl ChannelValues {
    pub fn from_slice(v: &[f64]) -> Self {
        assert!(v.len() <= 3, "at most three channels");
        let mut out = Self { len: v.len(), v: [0.0; 3] };
        out.v[..v.len()].copy_from_slice(v);
        out
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v[..self.len]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmePath {
    pub times: Vec<f64>,
    /// One state per time, the initial state first.
    pub states: Vec<PauliVector>,
    /// Output increments; `dy[k]` belongs to the step ending at `times[k + 1]`.
    pub dy: Vec<ChannelValues>,
}

struct Stepped {
    raw: [f64; 3],
    diffusion: [f64; 3],
    dy: ChannelValues,
}

fn raw_step(c: &SmeConfig, p: &[f64; 3], dw: &[f64]) -> Stepped {
    let a = c.model.generator(c.tau);
    let mut next = *p;
    for (i, row) in a.iter().enumerate() {
        next[i] += c.dt * (row[0] * p[0] + row[1] * p[1] + row[2] * p[2]);
    }
    let gain = (c.eta / c.tau).sqrt();
    let out_gain = 2.0 * c.eta.sqrt() / c.tau;
    let inv_sqrt_tau = 1.0 / c.tau.sqrt();
    let mut diffusion = [0.0; 3];
    let mut dy = [0.0; 3];
    for (k, &i) in c.model.axes().iter().enumerate() {
        for j in 0..3 {
            let g = if i == j { 2.0 - 2.0 * p[i] * p[j] } else { -2.0 * p[i] * p[j] };
            diffusion[j] += gain * g * dw[k];
        }
        dy[k] = out_gain * p[i] * c.dt + dw[k] * inv_sqrt_tau;
    }
    for j in 0..3 {
        next[j] += diffusion[j];
    }
    Stepped { raw: next, diffusion, dy: ChannelValues::from_slice(&dy[..c.model.channels()]) }
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn project(c: &SmeConfig, before: &[f64; 3], raw: [f64; 3], step: usize) -> Result<[f64; 3]> {
    let n = norm(&raw);
    if !n.is_finite() {
        return Err(Error::IntegratorBlowup { step, norm: n });
    }
    if c.projection == Projection::None {
        return Ok(raw);
    }
    if n > BLOWUP_NORM {
        return Err(Error::IntegratorBlowup { step, norm: n });
    }
    let pure = c.eta == 1.0 && norm(before) >= 1.0 - PURE_SLACK;
    if (pure || n > 1.0) && n > 0.0 {
        Ok([raw[0] / n, raw[1] / n, raw[2] / n])
    } else {
        Ok(raw)
    }
}

/// One Euler–Maruyama step driven by the given Wiener increments (one per
/// channel), followed by the configured projection. p0 is reset to 1.
pub fn sme_step(config: &SmeConfig, state: &PauliVector, dw: &[f64]) -> Result<(PauliVector, ChannelValues)> {
    if dw.len() != config.model.channels() {
        return Err(invalid("dW", "needs one increment per channel"));
    }
    let p = [state.px, state.py, state.pz];
    let s = raw_step(config, &p, dw);
    let q = project(config, &p, s.raw, 0)?;
    Ok((PauliVector::new(1.0, q[0], q[1], q[2]), s.dy))
}

fn draw_increments<R: Rng + ?Sized>(rng: &mut R, dt: f64, n: usize) -> [f64; 3] {
    let sd = dt.sqrt();
    let mut dw = [0.0; 3];
    for v in dw.iter_mut().take(n) {
        let z: f64 = rng.sample(StandardNormal);
        *v = sd * z;
    }
    dw
}

/// Integrates one path with increments drawn from `rng`.
pub fn integrate_path<R: Rng + ?Sized>(config: &SmeConfig, rho0: &PauliVector, rng: &mut R) -> Result<SmePath> {
    config.validate()?;
    let steps = config.steps();
    let ch = config.model.channels();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut dy = Vec::with_capacity(steps);
    let mut p = [rho0.px, rho0.py, rho0.pz];
    times.push(0.0);
    states.push(PauliVector::new(1.0, p[0], p[1], p[2]));
    for k in 0..steps {
        let dw = draw_increments(rng, config.dt, ch);
        let s = raw_step(config, &p, &dw[..ch]);
        p = project(config, &p, s.raw, k + 1)?;
        times.push((k + 1) as f64 * config.dt);
        states.push(PauliVector::new(1.0, p[0], p[1], p[2]));
        dy.push(s.dy);
    }
    Ok(SmePath { times, states, dy })
}

/// Integrates path 0 of the configured seed's `sme` stream.
pub fn integrate_sme(config: &SmeConfig, rho0: &DensityMatrix) -> Result<SmePath> {
    let mut rng = StreamKey::new(config.seed, "sme").rng(0);
    integrate_path(config, &rho0.pauli(), &mut rng)
}

/// Ensemble mean and standard error of (px, py, pz) at sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub mean: Vec<[f64; 3]>,
    pub stderr: Vec<[f64; 3]>,
    pub paths: u64,
}

/// Per-sample-time sums and sums of squares.
type Moments = (Vec<[f64; 3]>, Vec<[f64; 3]>);

/// Averages `paths` trajectories; path i uses stream index i, so the result
/// does not depend on the runner.
///
/// With `control_variate`, each path subtracts its propagated Itô sum
/// C_{k+1} = (I + A·dt)·C_k + diffusion_k, which has mean zero. That needs
/// [`Projection::None`].
pub fn sme_ensemble<R: Runner>(
    config: &SmeConfig,
    rho0: &PauliVector,
    paths: u64,
    sample_times: &[f64],
    control_variate: bool,
    runner: &R,
) -> Result<EnsembleSummary> {
    config.validate()?;
    if paths < 2 {
        return Err(invalid("paths", "needs at least two paths"));
    }
    if control_variate && config.projection != Projection::None {
        return Err(invalid("projection", "the control variate needs the raw scheme"));
    }
    let steps = config.steps();
    let mut marks = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        if !(t >= 0.0) || t > config.t_final + 0.5 * config.dt {
            return Err(invalid("t", "sample times must lie in [0, t_final]"));
        }
        marks.push(((t / config.dt).round() as usize).min(steps));
    }
    let key = StreamKey::new(config.seed, "sme");
    let ch = config.model.channels();
    let a = config.model.generator(config.tau);
    let ranges = chunk_ranges(paths);
    let partial = runner.map_chunks(ranges.len(), |c| -> Result<Moments> {
        let (start, end) = ranges[c];
        let mut sum = vec![[0.0; 3]; marks.len()];
        let mut sq = vec![[0.0; 3]; marks.len()];
        for i in start..end {
            let mut rng = key.rng(i);
            let mut p = [rho0.px, rho0.py, rho0.pz];
            let mut cv = [0.0; 3];
            let mut record = |k: usize, p: &[f64; 3], cv: &[f64; 3]| {
                for (m, &mk) in marks.iter().enumerate() {
                    if mk == k {
                        for j in 0..3 {
                            let v = p[j] - cv[j];
                            sum[m][j] += v;
                            sq[m][j] += v * v;
                        }
                    }
                }
            };
            record(0, &p, &cv);
            for k in 0..steps {
                let dw = draw_increments(&mut rng, config.dt, ch);
                let s = raw_step(config, &p, &dw[..ch]);
                if control_variate {
                    let mut next = [0.0; 3];
                    for (j, row) in a.iter().enumerate() {
                        next[j] = cv[j] + config.dt * (row[0] * cv[0] + row[1] * cv[1] + row[2] * cv[2]) + s.diffusion[j];
                    }
                    cv = next;
                }
                p = project(config, &p, s.raw, k + 1)?;
                record(k + 1, &p, &cv);
            }
        }
        Ok((sum, sq))
    });
    let mut sum = vec![[0.0; 3]; marks.len()];
    let mut sq = vec![[0.0; 3]; marks.len()];
    for part in partial {
        let (s, q) = part?;
        for m in 0..marks.len() {
            for j in 0..3 {
                sum[m][j] += s[m][j];
                sq[m][j] += q[m][j];
            }
        }
    }
    let n = paths as f64;
    let mut mean = Vec::with_capacity(marks.len());
    let mut stderr = Vec::with_capacity(marks.len());
    for m in 0..marks.len() {
        let mut mu = [0.0; 3];
        let mut se = [0.0; 3];
        for j in 0..3 {
            mu[j] = sum[m][j] / n;
            let var = ((sq[m][j] - n * mu[j] * mu[j]) / (n - 1.0)).max(0.0);
            se[j] = (var / n).sqrt();
        }
        mean.push(mu);
        stderr.push(se);
    }
    Ok(EnsembleSummary {
        times: marks.iter().map(|&k| k as f64 * config.dt).collect(),
        mean,
        stderr,
        paths,
    })
}

/// Model I noise average: p_i(t) = p_i(0)·e^{−4t/τ}.
pub fn lindblad_solution_model1(p0: &PauliVector, t: f64, tau: f64) -> PauliVector {
    let d = (-4.0 * t / tau).exp();
    PauliVector::new(p0.p0, p0.px * d, p0.py * d, p0.pz * d)
}

/// Model II noise average with α = ωτ/2: px decays at 2/τ and (py, pz)
/// follow exp(sA) = e^{−s}(C·I + S·B), s = t/τ, B = [[−1, −2α], [2α, 1]],
/// where B² = −(4α² − 1)·I and (C, S) are cos and sinc of √(4α² − 1)·s
/// (hyperbolic below α = ½, polynomial at α = ½).
pub fn lindblad_solution_model2(p0: &PauliVector, t: f64, tau: f64, alpha: f64) -> PauliVector {
    let s = t / tau;
    let (c, s1) = cos_sinc(4.0 * alpha * alpha - 1.0, s);
    let e = (-s).exp();
    let py = e * (c * p0.py + s1 * (-p0.py - 2.0 * alpha * p0.pz));
    let pz = e * (c * p0.pz + s1 * (2.0 * alpha * p0.py + p0.pz));
    PauliVector::new(p0.p0, p0.px * (-2.0 * s).exp(), py, pz)
}

/// Noise average for either model.
pub fn lindblad_solution(model: &SmeModel, p0: &PauliVector, t: f64, tau: f64) -> PauliVector {
    match *model {
        SmeModel::I => lindblad_solution_model1(p0, t, tau),
        SmeModel::II { omega } => lindblad_solution_model2(p0, t, tau, 0.5 * omega * tau),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::Serial;

    fn cfg(model: SmeModel, eta: f64, dt: f64, t: f64) -> SmeConfig {
        SmeConfig::new(model, 1.0, eta, dt, t, 7).unwrap()
    }

    #[test]
    fn fixed_point_of_mixed_state() {
        let c = cfg(SmeModel::I, 0.6, 1e-3, 1.0);
        let (p, dy) = sme_step(&c, &PauliVector::maximally_mixed(), &[0.0; 3]).unwrap();
        assert_eq!(p, PauliVector::maximally_mixed());
        assert_eq!(dy.as_slice(), &[0.0; 3]);
    }

    #[test]
    fn model2_dephasing_step() {
        let dt = 1e-3;
        let c = cfg(SmeModel::II { omega: 0.0 }, 0.0, dt, 1.0);
        let (p, _) = sme_step(&c, &PauliVector::new(1.0, 1.0, 0.0, 0.0), &[0.0]).unwrap();
        assert!((p.px - (-2.0 * dt).exp()).abs() < 4.0 * dt * dt);
    }

    #[test]
    fn deterministic_branch_tracks_lindblad() {
        let dt = 1e-3;
        for model in [SmeModel::I, SmeModel::II { omega: 1.3 }] {
            let c = cfg(model, 0.0, dt, 1.0);
            let path = integrate_sme(&c, &DensityMatrix::up()).unwrap();
            for (t, p) in path.times.iter().zip(&path.states) {
                let exact = lindblad_solution(&model, &PauliVector::up(), *t, 1.0);
                assert!(p.max_abs_diff(&exact) < 5.0 * dt);
            }
        }
    }

    #[test]
    fn pure_states_stay_pure() {
        let dt = 1e-3;
        let c = cfg(SmeModel::II { omega: 2.0 }, 1.0, dt, 1.0);
        let path = integrate_sme(&c, &DensityMatrix::up()).unwrap();
        for p in &path.states {
            let n = p.bloch_norm();
            assert!(n >= 1.0 - 5.0 * dt && n <= 1.0 + 1e-8);
            assert_eq!(p.p0, 1.0);
        }
    }

    #[test]
    fn replay_is_bit_identical() {
        let c = cfg(SmeModel::I, 0.5, 1e-2, 1.0);
        let a = integrate_sme(&c, &DensityMatrix::up()).unwrap();
        let b = integrate_sme(&c, &DensityMatrix::up()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_guards() {
        assert!(SmeConfig::new(SmeModel::I, 1.0, 0.5, 0.03, 1.0, 0).is_err());
        assert!(SmeConfig::new(SmeModel::I, 1.0, 1.5, 0.01, 1.0, 0).is_err());
        assert!(SmeConfig::new(SmeModel::I, 0.0, 0.5, 0.01, 1.0, 0).is_err());
        let c = SmeConfig::new(SmeModel::II { omega: 3.0 }, 2.0, 0.5, 0.01, 1.0, 0).unwrap();
        assert_eq!(c.alpha(), Some(3.0));
        assert!(sme_step(&c, &PauliVector::up(), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn lindblad_examples() {
        let up = PauliVector::up();
        assert_eq!(lindblad_solution_model1(&up, 0.0, 1.0), up);
        let far = lindblad_solution_model1(&up, 100.0, 1.0);
        assert!(far.max_abs_diff(&PauliVector::maximally_mixed()) < 1e-15);
        let d = lindblad_solution_model1(&up, 0.3, 1.0).pz - lindblad_solution_model1(&PauliVector::down(), 0.3, 1.0).pz;
        assert!((d - 2.0 * (-1.2f64).exp()).abs() < 1e-15);
        for t in [0.0, 0.5, 1.0, 3.0] {
            let p = lindblad_solution_model2(&up, t, 1.0, 0.5);
            assert!((p.pz - (-t).exp() * (t + 1.0)).abs() < 1e-14);
            let q = lindblad_solution_model2(&PauliVector::new(1.0, 0.0, 0.6, 0.8), t, 1.0, 0.0);
            assert!((q.pz - 0.8).abs() < 1e-15);
            assert!((q.py - 0.6 * (-2.0 * t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn model2_solution_solves_ode() {
        // Central difference of the closed form against the generator.
        let p0 = PauliVector::new(1.0, 0.3, -0.5, 0.7);
        for &alpha in &[0.1, 0.5, 0.5 + 1e-6, 2.0] {
            let model = SmeModel::II { omega: 2.0 * alpha };
            let a = model.generator(1.0);
            for &t in &[0.2, 1.0, 2.5] {
                let h = 1e-5;
                let f = |s: f64| lindblad_solution(&model, &p0, s, 1.0);
                let (pp, pm, p) = (f(t + h), f(t - h), f(t));
                let v = [p.px, p.py, p.pz];
                let d = [(pp.px - pm.px) / (2.0 * h), (pp.py - pm.py) / (2.0 * h), (pp.pz - pm.pz) / (2.0 * h)];
                for j in 0..3 {
                    let rhs = a[j][0] * v[0] + a[j][1] * v[1] + a[j][2] * v[2];
                    assert!((d[j] - rhs).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn regimes_are_continuous() {
        let up = PauliVector::up();
        for k in 0..=50 {
            let t = 0.1 * k as f64;
            let c = lindblad_solution_model2(&up, t, 1.0, 0.5);
            let hi = lindblad_solution_model2(&up, t, 1.0, 0.5 + 1e-6);
            let lo = lindblad_solution_model2(&up, t, 1.0, 0.5 - 1e-6);
            // The slope in α is below 2, so one-sided gaps stay under 2e-6;
            // the symmetric average cancels it.
            assert!(hi.max_abs_diff(&c) < 2e-6 && lo.max_abs_diff(&c) < 2e-6);
            let avg = PauliVector::new(1.0, 0.5 * (hi.px + lo.px), 0.5 * (hi.py + lo.py), 0.5 * (hi.pz + lo.pz));
            assert!(avg.max_abs_diff(&c) < 1e-9);
        }
    }

    #[test]
    fn control_variate_removes_noise_for_linear_mean() {
        let dt = 0.02;
        let c = cfg(SmeModel::I, 1.0, dt, 1.0).with_projection(Projection::None);
        let s = sme_ensemble(&c, &PauliVector::up(), 64, &[1.0], true, &Serial).unwrap();
        let det = (1.0 - 4.0 * dt).powi(50);
        assert!((s.mean[0][2] - det).abs() < 1e-12);
        assert!(sme_ensemble(&cfg(SmeModel::I, 1.0, dt, 1.0), &PauliVector::up(), 64, &[1.0], true, &Serial).is_err());
    }

    #[test]
    fn ensemble_is_runner_independent_in_path_order() {
        let c = cfg(SmeModel::II { omega: 1.0 }, 0.8, 0.01, 0.5);
        let a = sme_ensemble(&c, &PauliVector::up(), 1100, &[0.0, 0.25, 0.5], false, &Serial).unwrap();
        assert_eq!(a.times.len(), 3);
        assert_eq!(a.mean[0], [0.0, 0.0, 1.0]);
        assert_eq!(a.stderr[0], [0.0; 3]);
        let path0 = integrate_sme(&c, &DensityMatrix::up()).unwrap();
        let one = sme_ensemble(&c, &PauliVector::up(), 2, &[0.5], false, &Serial).unwrap();
        let path1 = integrate_path(&c, &PauliVector::up(), &mut StreamKey::new(7, "sme").rng(1)).unwrap();
        let avg = 0.5 * (path0.states.last().unwrap().pz + path1.states.last().unwrap().pz);
        assert!((one.mean[0][2] - avg).abs() < 1e-15);
    }
}
