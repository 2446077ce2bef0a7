use weakmeas_core::sme::{integrate_path, sme_step, Projection, SmeConfig, SmeModel};
use weakmeas_core::{PauliVector, StreamKey};

fn models() -> [SmeModel; 3] {
    [SmeModel::I, SmeModel::II { omega: 0.5 }, SmeModel::II { omega: 4.0 }]
}

#[test]
fn trace_is_one_and_pure_states_stay_pure() {
    let p0 = PauliVector::new(1.0, 0.6, 0.0, 0.8);
    for (i, model) in models().into_iter().enumerate() {
        let cfg = SmeConfig::new(model, 1.0, 1.0, 1e-3, 2.0, i as u64).unwrap();
        for path in 0..20 {
            let p = integrate_path(&cfg, &p0, &mut StreamKey::new(9, "sme").rng(path)).unwrap();
            for s in &p.states {
                assert_eq!(s.p0, 1.0);
                assert!(s.bloch_norm() >= 1.0 - 5.0 * cfg.dt);
                assert!(s.bloch_norm() <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn mixed_states_stay_in_the_ball() {
    let cfg = SmeConfig::new(SmeModel::I, 1.0, 0.4, 1e-3, 1.0, 0).unwrap();
    let p = integrate_path(&cfg, &PauliVector::maximally_mixed(), &mut StreamKey::new(1, "sme").rng(0)).unwrap();
    assert!(p.states.iter().all(|s| s.p0 == 1.0 && s.bloch_norm() <= 1.0 + 1e-12));
}

#[test]
fn output_increment_variance() {
    let tau = 2.0;
    let dt = 1e-3;
    let cfg = SmeConfig::new(SmeModel::II { omega: 1.0 }, tau, 1.0, dt, 100.0, 3).unwrap();
    let p = integrate_path(&cfg, &PauliVector::up(), &mut StreamKey::new(3, "sme").rng(0)).unwrap();
    let dy: Vec<f64> = p.dy.iter().map(|v| v.as_slice()[0]).collect();
    assert_eq!(dy.len(), 100_000);
    let mean = dy.iter().sum::<f64>() / dy.len() as f64;
    let var = dy.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (dy.len() - 1) as f64;
    assert!((var / (dt / tau) - 1.0).abs() <= 0.05, "variance ratio {}", var / (dt / tau));
}

#[test]
fn zero_noise_step_is_the_linear_drift() {
    let cfg = SmeConfig::new(SmeModel::II { omega: 3.0 }, 1.0, 1.0, 1e-3, 1.0, 0).unwrap().with_projection(Projection::None);
    let p = PauliVector::new(1.0, 0.2, 0.3, 0.4);
    let (next, dy) = sme_step(&cfg, &p, &[0.0]).unwrap();
    assert!((next.px - 0.2 * (1.0 - 2e-3)).abs() < 1e-15);
    assert!((next.py - (0.3 - 2e-3 * 0.3 - 3e-3 * 0.4)).abs() < 1e-15);
    assert!((next.pz - (0.4 + 3e-3 * 0.3)).abs() < 1e-15);
    assert!((dy.as_slice()[0] - 2.0 * 0.4 * 1e-3).abs() < 1e-15);
    assert!(sme_step(&cfg, &p, &[0.0, 0.0]).is_err());
}

#[test]
fn coarse_steps_are_rejected() {
    assert!(SmeConfig::new(SmeModel::I, 1.0, 1.0, 0.03, 1.0, 0).is_err());
    assert!(SmeConfig::new(SmeModel::I, 1.0, 1.2, 1e-3, 1.0, 0).is_err());
}
