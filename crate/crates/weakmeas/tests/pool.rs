use weakmeas::Pool;
use weakmeas_core::info::estimate_mi;
use weakmeas_core::readout::estimate_accuracy;
use weakmeas_core::sme::{sme_ensemble, SmeConfig, SmeModel};
use weakmeas_core::{Instrument, Model, ModelIIParams, PauliVector, Prior, Runner, SampleBudget, Serial, StreamKey};

#[test]
fn map_chunks_keeps_index_order() {
    let pool = Pool::new(3);
    assert_eq!(pool.workers(), 3);
    let out = pool.map_chunks(1000, |i| i * i);
    assert_eq!(out, (0..1000).map(|i| i * i).collect::<Vec<_>>());
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let inst = Instrument::from_model(&Model::II(ModelIIParams::new(0.5, 0.2).unwrap()), 0.8).unwrap();
    let prior = Prior::up_down();
    let budget = SampleBudget::new(3000, 0.01).unwrap();
    let key = StreamKey::new(11, "mi");
    let serial = estimate_mi(&inst, &prior, 12, budget, key, &Serial).unwrap();
    let accuracy = estimate_accuracy(&inst, &prior, 12, budget, key, &Serial).unwrap();
    for workers in [1, 2, 4] {
        let pool = Pool::new(workers);
        assert_eq!(estimate_mi(&inst, &prior, 12, budget, key, &pool).unwrap(), serial);
        assert_eq!(estimate_accuracy(&inst, &prior, 12, budget, key, &pool).unwrap(), accuracy);
    }
    let cfg = SmeConfig::new(SmeModel::II { omega: 1.0 }, 1.0, 1.0, 1e-3, 0.5, 4).unwrap();
    let p0 = PauliVector::up();
    let a = sme_ensemble(&cfg, &p0, 1100, &[0.25, 0.5], false, &Serial).unwrap();
    let b = sme_ensemble(&cfg, &p0, 1100, &[0.25, 0.5], false, &Pool::new(3)).unwrap();
    assert_eq!(a, b);
}
