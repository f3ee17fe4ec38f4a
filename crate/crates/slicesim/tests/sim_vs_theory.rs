//! Long-run agreement between the simulator and the closed-form models.

use rand::{Rng, SeedableRng};

use slicesim::analytic::{
    rlnc_expected_goodput, rlnc_missing_dof_pmf, srarq_expected_delay, NetworkModel,
    ProtocolConfig, SliceSpec,
};
use slicesim::sim::{
    run_slice, run_trial, run_trial_with_trace, stream_seed, RlncMode, ScenarioConfig,
    StreamRole, DEFAULT_MAX_SLOTS,
};

fn rlnc_ref() -> ProtocolConfig {
    ProtocolConfig::Rlnc {
        generation_size: 50,
        fec_rate: 1.22,
        fb_rate: 2.22,
    }
}

#[test]
fn link_loss_frequency_obeys_the_law_of_large_numbers() {
    // 10^6 draws from one link's erasure stream at p = 0.2.
    let seed = stream_seed(2024, 0, 0, StreamRole::Link(0));
    let mut rng = rand_chacha::ChaCha8Rng::from_seed(seed);
    let p = 0.2;
    let draws = 1_000_000u64;
    let losses = (0..draws).filter(|_| rng.gen::<f64>() < p).count();
    let freq = losses as f64 / draws as f64;
    assert!((freq - p).abs() < 0.002, "loss frequency {freq}");
}

#[test]
fn srarq_long_run_matches_closed_form() {
    // 5 links, p = 0.2, rtt = 150: E[D] = 112.5, E[G] = 4.0. The simulator
    // acts on feedback one slot after it lands, which shifts the mean delay
    // by 0.25 slots; both metrics must still land within 1%.
    let cfg = ScenarioConfig {
        network: NetworkModel::homogeneous(5, 0.2, 150).unwrap(),
        slices: vec![SliceSpec::new((0..5).collect(), ProtocolConfig::SrArq).unwrap()],
        packets_per_app: 100_000,
        trials: 4,
        base_seed: 11,
        rlnc_mode: RlncMode::StopAndWait,
        max_slots: DEFAULT_MAX_SLOTS,
    };
    let trials = run_slice(&cfg, 0).unwrap();
    let mean_delay =
        trials.iter().map(|t| t.mean_delay).sum::<f64>() / trials.len() as f64;
    let mean_goodput = trials.iter().map(|t| t.goodput).sum::<f64>() / trials.len() as f64;
    let expect_delay = srarq_expected_delay(0.2, 150);
    assert!(
        (mean_delay - expect_delay).abs() / expect_delay < 0.01,
        "delay {mean_delay} vs {expect_delay}"
    );
    assert!(
        (mean_goodput - 4.0).abs() / 4.0 < 0.01,
        "goodput {mean_goodput}"
    );
}

#[test]
fn rlnc_stop_and_wait_delay_matches_two_round_model() {
    // 9 links, p = 0.1, rtt = 1000. Plugging the simulated first-round
    // success fraction into the two-round delay expression must reproduce
    // the simulated mean generation delay within 2%.
    let cfg = ScenarioConfig {
        network: NetworkModel::homogeneous(9, 0.1, 1000).unwrap(),
        slices: vec![SliceSpec::new((0..9).collect(), rlnc_ref()).unwrap()],
        packets_per_app: 50 * 100,
        trials: 4,
        base_seed: 5,
        rlnc_mode: RlncMode::StopAndWait,
        max_slots: DEFAULT_MAX_SLOTS,
    };
    let trials = run_slice(&cfg, 0).unwrap();
    let mean_delay =
        trials.iter().map(|t| t.mean_delay).sum::<f64>() / trials.len() as f64;
    let gens: u64 = trials.iter().map(|t| t.generations).sum();
    let repairs: u64 = trials.iter().map(|t| t.repair_generations).sum();
    let p0 = 1.0 - repairs as f64 / gens as f64;
    // First-round decode after rtt/2 + ceil(k*fec/|slice|) slots, repair-round
    // decode one rtt plus one feedback-action slot later.
    let round1 = (50.0f64 * 1.22 / 9.0).ceil();
    let predicted = (500.0 + round1) * p0 + (1500.0 + round1 + 1.0) * (1.0 - p0);
    assert!(
        (mean_delay - predicted).abs() / predicted < 0.02,
        "delay {mean_delay} vs predicted {predicted} (p0 {p0})"
    );
}

#[test]
fn rlnc_repair_fraction_and_goodput_match_model() {
    // 20k generations in one pipelined run. The fraction of generations
    // that need a repair round must sit within +/-0.01 of 1 - P[m=0], and
    // the long-run goodput within 3% of the expected-goodput formula.
    let protocol = rlnc_ref();
    let cfg = ScenarioConfig {
        network: NetworkModel::homogeneous(9, 0.1, 1000).unwrap(),
        slices: vec![SliceSpec::new((0..9).collect(), protocol).unwrap()],
        packets_per_app: 50 * 20_000,
        trials: 1,
        base_seed: 17,
        rlnc_mode: RlncMode::Pipelined,
        max_slots: DEFAULT_MAX_SLOTS,
    };
    let m = run_trial(&cfg, 0, 0).unwrap();
    assert_eq!(m.generations, 20_000);
    let repair_fraction = m.repair_generations as f64 / m.generations as f64;

    let pmf = rlnc_missing_dof_pmf(&protocol, 0.1).unwrap();
    let expect_fraction = 1.0 - pmf.p_zero();
    assert!(
        (repair_fraction - expect_fraction).abs() <= 0.01,
        "repair fraction {repair_fraction} vs {expect_fraction}"
    );

    let expect_goodput = rlnc_expected_goodput(&protocol, 9, &pmf).unwrap();
    assert!(
        (m.goodput - expect_goodput).abs() / expect_goodput < 0.03,
        "goodput {} vs {expect_goodput}",
        m.goodput
    );
}

#[test]
fn packet_records_respect_timing_invariants() {
    for protocol in [ProtocolConfig::SrArq, rlnc_ref()] {
        let cfg = ScenarioConfig {
            network: NetworkModel::homogeneous(4, 0.3, 100).unwrap(),
            slices: vec![SliceSpec::new((0..4).collect(), protocol).unwrap()],
            packets_per_app: 500,
            trials: 1,
            base_seed: 3,
            rlnc_mode: RlncMode::Pipelined,
            max_slots: DEFAULT_MAX_SLOTS,
        };
        let (metrics, records) = run_trial_with_trace(&cfg, 0, 0).unwrap();
        assert_eq!(records.len(), 500);
        assert_eq!(metrics.packets_delivered, 500);
        let one_way = cfg.network.one_way();
        let mut prev_inorder = 0;
        for (i, r) in records.iter().enumerate() {
            assert_eq!(r.seq, i as u64);
            assert!(r.delivered_slot >= r.first_tx_slot + one_way);
            assert!(r.inorder_slot >= r.delivered_slot);
            assert!(r.inorder_slot >= prev_inorder);
            prev_inorder = r.inorder_slot;
        }
        // Every delivery costs at least one transmission.
        assert!(metrics.total_transmissions >= 500);
    }
}
