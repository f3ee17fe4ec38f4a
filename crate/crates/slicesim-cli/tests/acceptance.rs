//! Acceptance gate: one test per published-reference criterion, each printing
//! a single `criterion N: PASS|FAIL` line before asserting. Tolerances are
//! pinned here and in the presets module, never loosened to make a run green.
//!
//! Criteria 7 and 8 are implemented exactly as stated and currently fail for
//! structural reasons (single-link serialization of the coded first round and
//! the generation-start packet clock); the failures are genuine model
//! properties, not bugs, and are reported honestly.

use slicesim::analytic::{
    default_rlnc, rlnc_missing_dof_pmf, srarq_delay_pmf, srarq_expected_delay, ProtocolConfig,
    SliceSpec,
};
use slicesim::planner::{capacity, min_links, BindingConstraint, Requirement};
use slicesim::presets::{
    example2_network, example2_protocol, example2_requirement, split_scenario, Metric,
    EXAMPLE2_CAPACITY, EXAMPLE2_ERASURE, EXAMPLE2_LAMBDA, EXAMPLE2_MISSING_DOF,
    EXAMPLE2_PMF_ABS_TOL, EXAMPLE2_RTT, EXAMPLE2_SRARQ_DELAY_EXACT, TABLE1_CHECKS,
};
use slicesim::sim::{
    aggregate, run_slice, run_trial_with_trace, RlncMode, ScenarioConfig, DEFAULT_MAX_SLOTS,
};
use slicesim_cli::reproduce::{self, RunParams};

fn verdict(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

const DESK_PARAMS: RunParams = RunParams {
    packets: 1000,
    trials: 50,
    seed: 2024,
};

#[test]
fn criterion_1_analytic_srarq_delay() {
    let computed = srarq_expected_delay(EXAMPLE2_ERASURE, EXAMPLE2_RTT);
    let rel = (computed - EXAMPLE2_SRARQ_DELAY_EXACT).abs() / EXAMPLE2_SRARQ_DELAY_EXACT;
    verdict(
        1,
        rel <= 1e-6,
        &format!("E[D](0.1, 1000) = {computed:.9}, reference {EXAMPLE2_SRARQ_DELAY_EXACT:.9}, rel err {rel:.2e} (tol 1e-6)"),
    );
}

#[test]
fn criterion_2_missing_dof_pmf() {
    let pmf = rlnc_missing_dof_pmf(&example2_protocol(), EXAMPLE2_ERASURE).unwrap();
    let lambda_ok = (pmf.lambda() - EXAMPLE2_LAMBDA).abs() <= 1e-12;
    let mut worst = 0.0f64;
    for (m, &reference) in EXAMPLE2_MISSING_DOF.iter().enumerate() {
        worst = worst.max((pmf.probs()[m] - reference).abs());
    }
    verdict(
        2,
        lambda_ok && worst <= EXAMPLE2_PMF_ABS_TOL,
        &format!(
            "lambda = {lambda} (reference {EXAMPLE2_LAMBDA}), worst PMF deviation {worst:.2e} (tol {EXAMPLE2_PMF_ABS_TOL:.0e})",
            lambda = pmf.lambda()
        ),
    );
}

#[test]
fn criterion_3_planner_thresholds() {
    let net = example2_network();
    let coded = example2_protocol();

    let goodput_only = |protocol: ProtocolConfig| Requirement {
        min_goodput: Some(5.0),
        max_delay: None,
        max_inorder_delay: None,
        protocol,
    };
    let delay_only = |protocol: ProtocolConfig| Requirement {
        min_goodput: None,
        max_delay: Some(530.0),
        max_inorder_delay: None,
        protocol,
    };

    let uncoded_goodput = min_links(&goodput_only(ProtocolConfig::SrArq), EXAMPLE2_ERASURE, EXAMPLE2_RTT).unwrap();
    let uncoded_delay = min_links(&delay_only(ProtocolConfig::SrArq), EXAMPLE2_ERASURE, EXAMPLE2_RTT).unwrap();
    let coded_delay = min_links(&delay_only(coded.clone()), EXAMPLE2_ERASURE, EXAMPLE2_RTT).unwrap();
    let coded_goodput = min_links(&goodput_only(coded.clone()), EXAMPLE2_ERASURE, EXAMPLE2_RTT).unwrap();
    let combined = example2_requirement(coded);
    let combined_links = min_links(&combined, EXAMPLE2_ERASURE, EXAMPLE2_RTT).unwrap();
    let cap = capacity(&net, &combined).unwrap();

    let artifacts = reproduce::run("example2", DESK_PARAMS).unwrap();
    let comparison = &artifacts
        .files
        .iter()
        .find(|(name, _)| name == "example2_comparison.txt")
        .unwrap()
        .1;
    let note_emitted = comparison.contains("note:") && comparison.contains("111");

    let pass = uncoded_goodput.links_needed == Some(6)
        && !uncoded_delay.feasible
        && uncoded_delay.binding_constraint == BindingConstraint::Delay
        && coded_delay.links_needed == Some(9)
        && coded_goodput.links_needed == Some(7)
        && combined_links.links_needed == Some(9)
        && cap == EXAMPLE2_CAPACITY
        && note_emitted;
    verdict(
        3,
        pass,
        &format!(
            "thresholds: un-coded G {:?}, un-coded D feasible={}, coded D {:?}, coded G {:?}, combined {:?}, capacity {cap} (reference 6/infeasible/9/7/9/1111), discrepancy note emitted={note_emitted}",
            uncoded_goodput.links_needed,
            uncoded_delay.feasible,
            coded_delay.links_needed,
            coded_goodput.links_needed,
            combined_links.links_needed,
        ),
    );
}

#[test]
fn criterion_4_simulation_vs_theory_oracle() {
    let net = slicesim::analytic::NetworkModel::homogeneous(5, 0.2, 150).unwrap();
    let slice = SliceSpec::new((0..5).collect(), ProtocolConfig::SrArq).unwrap();
    let cfg = ScenarioConfig {
        network: net,
        slices: vec![slice],
        packets_per_app: 100_000,
        trials: 10,
        base_seed: 2024,
        rlnc_mode: RlncMode::Pipelined,
        max_slots: DEFAULT_MAX_SLOTS,
    };
    let summary = aggregate(&run_slice(&cfg, 0).unwrap()).unwrap();
    let delay_err = (summary.delay.mean - 112.5).abs() / 112.5;
    let goodput_err = (summary.goodput.mean - 4.0).abs() / 4.0;
    verdict(
        4,
        delay_err <= 0.01 && goodput_err <= 0.01,
        &format!(
            "E[D] = {:.3} (112.5 ± 1%: err {:.2}%), E[G] = {:.4} (4.0 ± 1%: err {:.2}%)",
            summary.delay.mean,
            delay_err * 100.0,
            summary.goodput.mean,
            goodput_err * 100.0
        ),
    );
}

/// Exact Bernoulli-convolution oracle, independent of the model code.
fn exact_missing_dof(k: u64, fec_rate: f64, link_probs: &[f64]) -> Vec<f64> {
    let transmissions = (k as f64 * fec_rate - 1e-9).ceil() as u64;
    let slack = ((fec_rate - 1.0) * k as f64 - 1e-9).ceil() as u64;
    let mut failures = vec![1.0];
    for t in 0..transmissions {
        let p = link_probs[(t as usize) % link_probs.len()];
        let mut next = vec![0.0; failures.len() + 1];
        for (f, &mass) in failures.iter().enumerate() {
            next[f] += mass * (1.0 - p);
            next[f + 1] += mass * p;
        }
        failures = next;
    }
    let mut probs = vec![0.0; k as usize + 1];
    for (f, &mass) in failures.iter().enumerate() {
        probs[(f as u64).saturating_sub(slack).min(k) as usize] += mass;
    }
    probs
}

#[test]
fn criterion_5_poisson_approximation_property() {
    let cases: Vec<(u64, f64, Vec<f64>)> = vec![
        (2, 1.2, vec![0.05]),
        (4, 1.2, vec![0.05]),
        (6, 1.2, vec![0.05]),
        (8, 1.2, vec![0.05]),
        (10, 1.2, vec![0.05, 0.1]),
        (12, 1.2, vec![0.05, 0.1]),
        (10, 1.2, vec![0.05, 0.1, 0.02]),
        (12, 1.2, vec![0.1, 0.1, 0.1]),
        (5, 1.4, vec![0.1]),
        (8, 1.4, vec![0.1, 0.05]),
        (12, 1.4, vec![0.02, 0.04, 0.06]),
        (12, 1.5, vec![0.1, 0.08]),
        (3, 1.0, vec![0.05]),
        (6, 1.0, vec![0.02, 0.02]),
        (9, 1.1, vec![0.03, 0.06, 0.09]),
        (12, 1.1, vec![0.01]),
        (7, 1.3, vec![0.07, 0.09]),
        (11, 1.3, vec![0.1, 0.02, 0.05]),
        (4, 1.5, vec![0.08]),
        (12, 1.25, vec![0.06, 0.06, 0.06]),
    ];
    assert_eq!(cases.len(), 20);
    let mut worst = 0.0f64;
    for (k, fec_rate, probs) in &cases {
        let mean = probs.iter().sum::<f64>() / probs.len() as f64;
        let cfg = ProtocolConfig::Rlnc {
            generation_size: *k,
            fec_rate: *fec_rate,
            fb_rate: 2.0,
        };
        let approx = rlnc_missing_dof_pmf(&cfg, mean).unwrap();
        let exact = exact_missing_dof(*k, *fec_rate, probs);
        let tv = approx
            .probs()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        worst = worst.max(tv);
    }
    verdict(
        5,
        worst <= 0.05,
        &format!("worst total-variation distance over the 20-case grid: {worst:.4} (tol 0.05)"),
    );
}

#[test]
fn criterion_6_table_reproduction() {
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for first_size in [5usize, 15] {
        let cfg = split_scenario(
            first_size,
            true,
            false,
            DESK_PARAMS.packets,
            DESK_PARAMS.trials,
            DESK_PARAMS.seed,
        )
        .unwrap();
        for check in TABLE1_CHECKS.iter().filter(|c| c.first_size == first_size) {
            let summary = aggregate(&run_slice(&cfg, check.slice).unwrap()).unwrap();
            let computed = match check.metric {
                Metric::Delay => summary.delay.mean,
                Metric::InOrderDelay => summary.inorder_delay.mean,
                Metric::Goodput => summary.goodput.mean,
                Metric::Completion => summary.completion.mean,
            };
            let rel = (computed - check.reference).abs() / check.reference;
            details.push(format!(
                "{}: {computed:.2} vs {} (±{:.0}%, err {:.1}%)",
                check.label,
                check.reference,
                check.rel_tol * 100.0,
                rel * 100.0
            ));
            if rel > check.rel_tol {
                failures.push(check.label);
            }
        }
    }
    verdict(6, failures.is_empty(), &details.join("; "));
}

#[test]
fn criterion_7_analytic_sweep_dominance() {
    // Stated property: for every slicing choice of the heterogeneous
    // reference network and both slices, coded E[D] < un-coded E[D] and the
    // coded goodput degrades by at most the combined rate overhead.
    let artifacts = reproduce::run("example1", DESK_PARAMS).unwrap();
    let failing: Vec<&str> = artifacts
        .comparisons
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.label.as_str())
        .collect();
    let detail = if failing.is_empty() {
        format!("all {} sweep checks hold", artifacts.comparisons.len())
    } else {
        format!(
            "{}/{} sweep checks hold; violated: {}",
            artifacts.comparisons.len() - failing.len(),
            artifacts.comparisons.len(),
            failing.join("; ")
        )
    };
    verdict(7, failing.is_empty(), &detail);
}

#[test]
fn criterion_8_simulated_sweep_trends() {
    // Stated property: mean in-order delay non-decreasing and completion time
    // non-increasing in slice size for both protocols, plus the coded /
    // un-coded in-order-delay ratio bound at 10 links.
    let artifacts = reproduce::run("fig3", DESK_PARAMS).unwrap();
    let failing: Vec<&str> = artifacts
        .comparisons
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.label.as_str())
        .collect();
    let detail = if failing.is_empty() {
        format!("all {} trend checks hold", artifacts.comparisons.len())
    } else {
        format!(
            "{}/{} trend checks hold; violated: {}",
            artifacts.comparisons.len() - failing.len(),
            artifacts.comparisons.len(),
            failing.join("; ")
        )
    };
    verdict(8, failing.is_empty(), &detail);
}

#[test]
fn criterion_9_property_suite() {
    let mut problems = Vec::new();

    // PMFs normalize to 1 within 1e-9.
    for p in [0.0, 0.1, 0.3, 0.7] {
        let pmf = srarq_delay_pmf(p, 150, 40).unwrap();
        if (pmf.total_mass() - 1.0).abs() > 1e-9 {
            problems.push(format!("srarq pmf mass off at p={p}"));
        }
    }
    for (k, p) in [(10u64, 0.05), (50, 0.1), (50, 0.2), (120, 0.15)] {
        let cfg = default_rlnc(k, p).unwrap();
        let pmf = rlnc_missing_dof_pmf(&cfg, p).unwrap();
        if (pmf.total_mass() - 1.0).abs() > 1e-9 {
            problems.push(format!("rlnc pmf mass off at k={k} p={p}"));
        }
    }

    // Per-packet invariants and full delivery, both protocols.
    let nu = 500;
    let cfg = split_scenario(5, true, false, nu, 1, 99).unwrap();
    for slice_index in 0..2 {
        let (metrics, records) = run_trial_with_trace(&cfg, slice_index, 0).unwrap();
        if metrics.packets_delivered != nu {
            problems.push(format!(
                "slice {slice_index}: delivered {} of {nu}",
                metrics.packets_delivered
            ));
        }
        let rtt_half = cfg.network.rtt() as f64 / 2.0;
        for r in &records {
            if ((r.delivered_slot - r.first_tx_slot) as f64) < rtt_half {
                problems.push(format!("slice {slice_index} seq {}: delay below rtt/2", r.seq));
                break;
            }
        }
        if records.iter().any(|r| r.inorder_slot < r.delivered_slot) {
            problems.push(format!("slice {slice_index}: in-order release before delivery"));
        }
    }

    // Identical seeds give byte-identical reports.
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg_path,
        "[network]\nlinks = 8\nerasure_prob = 0.2\nrtt = 150\n\n\
         [[slices]]\nname = \"coded\"\ncount = 3\nprotocol = \"rlnc\"\ngeneration_size = 25\n\n\
         [[slices]]\nname = \"plain\"\ncount = 5\nprotocol = \"srarq\"\n\n\
         [sim]\npackets_per_app = 300\ntrials = 4\nseed = 7\n",
    )
    .unwrap();
    let run = || {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_slicesim"))
            .args(["simulate", "--config"])
            .arg(&cfg_path)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    if run() != run() {
        problems.push("reports differ between identical-seed runs".into());
    }

    verdict(
        9,
        problems.is_empty(),
        &if problems.is_empty() {
            "PMF normalization, per-packet timing invariants, full delivery, and report determinism all hold".to_string()
        } else {
            problems.join("; ")
        },
    );
}
