//! Deterministic, seeded, time-slotted simulation of sliced erasure networks.
//!
//! One trial simulates a single slice (slices use disjoint links, so they
//! never interact) until all of the application's information packets have
//! been released in order at the receiver. Within a slot the order is fixed:
//! arrivals, then actionable feedback, then transmissions. A packet sent in
//! slot `t` arrives in slot `t + rtt/2` (unless erased) and its feedback is
//! acted upon in slot `t + rtt + 1`, i.e. retransmissions and repair packets
//! occupy the slot after the feedback's arrival.

mod rlnc;
mod rng;
mod srarq;

use serde::{Deserialize, Serialize};

use crate::analytic::{NetworkModel, ProtocolConfig, SlicePlan, SliceSpec};
use crate::{ConfigError, SimError};

pub use rng::{stream_rng, stream_seed, StreamRole};

/// How an RLNC sender behaves while a generation's feedback is pending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RlncMode {
    /// Idle between a generation's rounds; one generation in flight.
    StopAndWait,
    /// Fill idle link-slots with the next generations' first rounds.
    Pipelined,
}

/// Full description of a seeded simulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub network: NetworkModel,
    pub slices: Vec<SliceSpec>,
    /// Information packets each application must deliver (`nu`).
    pub packets_per_app: u64,
    pub trials: u64,
    pub base_seed: u64,
    pub rlnc_mode: RlncMode,
    /// Abort guard: a trial that exceeds this many slots is a failure.
    pub max_slots: u64,
}

pub const DEFAULT_MAX_SLOTS: u64 = 50_000_000;

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        SlicePlan::new(self.slices.clone(), &self.network)?;
        if self.slices.is_empty() {
            return Err(ConfigError::Invalid("no slices configured".into()));
        }
        if self.packets_per_app == 0 {
            return Err(ConfigError::Invalid("packets_per_app must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be >= 1".into()));
        }
        if self.max_slots == 0 {
            return Err(ConfigError::Invalid("max_slots must be >= 1".into()));
        }
        Ok(())
    }
}

/// Lifecycle of one information packet, in slot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    /// In-slice sequence number.
    pub seq: u64,
    /// First transmission slot. For RLNC this is the first slot of the
    /// packet's generation's first round.
    pub first_tx_slot: u64,
    /// Slot of successful reception (RLNC: the generation's decode slot).
    pub delivered_slot: u64,
    /// Slot the receiver released the packet in sequence order.
    pub inorder_slot: u64,
}

/// Measurements of a single completed trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    /// Mean per-packet delivery delay, slots.
    pub mean_delay: f64,
    /// Mean per-packet in-order delivery delay, slots.
    pub mean_inorder_delay: f64,
    /// Information packets delivered per busy link-slot, scaled by the slice
    /// size: `packets_delivered * |slice| / total_transmissions`.
    pub goodput: f64,
    /// Slots until the last packet was released in order.
    pub completion_slots: u64,
    pub packets_delivered: u64,
    /// Link-slots spent transmitting (every fresh, repeated, or coded packet).
    pub total_transmissions: u64,
    /// RLNC only: generations simulated and how many needed a repair round.
    pub generations: u64,
    pub repair_generations: u64,
}

/// Mean / sample std-dev / 95% normal-approximation confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub ci_halfwidth: f64,
}

impl StatSummary {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std_dev = if samples.len() < 2 {
            0.0
        } else {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        StatSummary {
            mean,
            std_dev,
            ci_halfwidth: 1.96 * std_dev / n.sqrt(),
        }
    }
}

/// Per-slice statistics over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub trials: u64,
    pub delay: StatSummary,
    pub inorder_delay: StatSummary,
    pub goodput: StatSummary,
    pub completion: StatSummary,
}

/// Aggregate per-trial metrics, ordered by trial index.
pub fn aggregate(trials: &[TrialMetrics]) -> Result<MetricsSummary, SimError> {
    if trials.is_empty() {
        return Err(SimError::NoTrials);
    }
    let pick = |f: fn(&TrialMetrics) -> f64| -> Vec<f64> { trials.iter().map(f).collect() };
    Ok(MetricsSummary {
        trials: trials.len() as u64,
        delay: StatSummary::from_samples(&pick(|t| t.mean_delay)),
        inorder_delay: StatSummary::from_samples(&pick(|t| t.mean_inorder_delay)),
        goodput: StatSummary::from_samples(&pick(|t| t.goodput)),
        completion: StatSummary::from_samples(&pick(|t| t.completion_slots as f64)),
    })
}

/// Run one trial of one slice and keep the per-packet trace.
pub fn run_trial_with_trace(
    cfg: &ScenarioConfig,
    slice_index: usize,
    trial: u64,
) -> Result<(TrialMetrics, Vec<PacketRecord>), SimError> {
    cfg.validate()?;
    let slice = cfg
        .slices
        .get(slice_index)
        .ok_or(SimError::SliceIndexOutOfRange {
            index: slice_index,
            slices: cfg.slices.len(),
        })?;
    let ctx = TrialContext {
        net: &cfg.network,
        slice,
        nu: cfg.packets_per_app,
        base_seed: cfg.base_seed,
        trial,
        slice_index: slice_index as u64,
        max_slots: cfg.max_slots,
    };
    match slice.protocol() {
        ProtocolConfig::SrArq => srarq::simulate(&ctx),
        ProtocolConfig::Rlnc { .. } => rlnc::simulate(&ctx, cfg.rlnc_mode),
    }
}

/// Run one trial of one slice. Identical inputs give identical output.
pub fn run_trial(
    cfg: &ScenarioConfig,
    slice_index: usize,
    trial: u64,
) -> Result<TrialMetrics, SimError> {
    run_trial_with_trace(cfg, slice_index, trial).map(|(m, _)| m)
}

/// All trials of one slice, in trial order.
pub fn run_slice(cfg: &ScenarioConfig, slice_index: usize) -> Result<Vec<TrialMetrics>, SimError> {
    (0..cfg.trials)
        .map(|t| run_trial(cfg, slice_index, t))
        .collect()
}

/// Inputs shared by both protocol simulators.
pub(crate) struct TrialContext<'a> {
    pub net: &'a NetworkModel,
    pub slice: &'a SliceSpec,
    pub nu: u64,
    pub base_seed: u64,
    pub trial: u64,
    pub slice_index: u64,
    pub max_slots: u64,
}

impl TrialContext<'_> {
    pub fn link_probs(&self) -> Vec<f64> {
        self.slice
            .links()
            .iter()
            .map(|&i| self.net.erasure_probs()[i])
            .collect()
    }

    pub fn link_rngs(&self) -> Vec<rand_chacha::ChaCha8Rng> {
        (0..self.slice.size())
            .map(|i| {
                stream_rng(
                    self.base_seed,
                    self.trial,
                    self.slice_index,
                    StreamRole::Link(i),
                )
            })
            .collect()
    }

    pub fn sched_rng(&self) -> rand_chacha::ChaCha8Rng {
        stream_rng(
            self.base_seed,
            self.trial,
            self.slice_index,
            StreamRole::Scheduling,
        )
    }
}

/// Summarize a finished trial from its packet records.
pub(crate) fn metrics_from_records(
    records: &[PacketRecord],
    slice_size: usize,
    total_transmissions: u64,
    generations: u64,
    repair_generations: u64,
) -> TrialMetrics {
    let nu = records.len() as f64;
    let mean_delay = records
        .iter()
        .map(|r| (r.delivered_slot - r.first_tx_slot) as f64)
        .sum::<f64>()
        / nu;
    let mean_inorder_delay = records
        .iter()
        .map(|r| (r.inorder_slot - r.first_tx_slot) as f64)
        .sum::<f64>()
        / nu;
    let completion_slots = records.iter().map(|r| r.inorder_slot).max().unwrap_or(0) + 1;
    TrialMetrics {
        mean_delay,
        mean_inorder_delay,
        goodput: records.len() as f64 * slice_size as f64 / total_transmissions as f64,
        completion_slots,
        packets_delivered: records.len() as u64,
        total_transmissions,
        generations,
        repair_generations,
    }
}

/// Fisher-Yates permutation of `0..n` from the scheduling stream.
pub(crate) fn link_permutation(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<usize> {
    use rand::Rng;
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lossless_cfg() -> ScenarioConfig {
        ScenarioConfig {
            network: NetworkModel::homogeneous(1, 0.0, 150).unwrap(),
            slices: vec![SliceSpec::new(vec![0], ProtocolConfig::SrArq).unwrap()],
            packets_per_app: 10,
            trials: 1,
            base_seed: 7,
            rlnc_mode: RlncMode::StopAndWait,
            max_slots: DEFAULT_MAX_SLOTS,
        }
    }

    #[test]
    fn lossless_single_link_srarq() {
        let m = run_trial(&lossless_cfg(), 0, 0).unwrap();
        assert_eq!(m.mean_delay, 75.0);
        assert_eq!(m.mean_inorder_delay, 75.0);
        assert_eq!(m.packets_delivered, 10);
        assert_eq!(m.total_transmissions, 10);
        // Last packet sent in slot 9, released at 9 + 75.
        assert_eq!(m.completion_slots, 85);
    }

    #[test]
    fn determinism_across_runs() {
        let mut cfg = lossless_cfg();
        cfg.network = NetworkModel::homogeneous(4, 0.3, 100).unwrap();
        cfg.slices = vec![SliceSpec::new(vec![0, 1, 2, 3], ProtocolConfig::SrArq).unwrap()];
        cfg.packets_per_app = 200;
        let a = run_trial_with_trace(&cfg, 0, 3).unwrap();
        let b = run_trial_with_trace(&cfg, 0, 3).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&cfg, 0, 4).unwrap();
        assert_ne!(a.0, c);
    }

    #[test]
    fn slot_cap_aborts() {
        let mut cfg = lossless_cfg();
        cfg.max_slots = 20;
        cfg.packets_per_app = 100;
        match run_trial(&cfg, 0, 0) {
            Err(SimError::SlotCapExceeded { cap: 20, .. }) => {}
            other => panic!("expected slot cap abort, got {other:?}"),
        }
    }

    #[test]
    fn aggregate_edge_cases() {
        assert!(matches!(aggregate(&[]), Err(SimError::NoTrials)));
        let m = run_trial(&lossless_cfg(), 0, 0).unwrap();
        let one = aggregate(&[m]).unwrap();
        assert_eq!(one.delay.mean, m.mean_delay);
        assert_eq!(one.delay.ci_halfwidth, 0.0);
        let two = aggregate(&[m, m]).unwrap();
        assert_eq!(two.delay.std_dev, 0.0);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let mut cfg = lossless_cfg();
        cfg.packets_per_app = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = lossless_cfg();
        cfg.slices.push(SliceSpec::new(vec![0], ProtocolConfig::SrArq).unwrap());
        assert!(cfg.validate().is_err()); // overlapping slices

        let cfg = lossless_cfg();
        assert!(matches!(
            run_trial(&cfg, 5, 0),
            Err(SimError::SliceIndexOutOfRange { .. })
        ));
    }
}
