//! Communication-aware slicing: minimum-resource computation per application
//! and feasible partition search over a shared link pool.
//!
//! In-order delivery delay has no closed form here, so `max_inorder_delay`
//! constraints are pre-screened with the delivery-delay model (a necessary
//! condition, since a packet is never released before it is delivered) and
//! flagged as requiring simulation confirmation.

use serde::{Deserialize, Serialize};

use crate::analytic::{
    self, ceil_count, mean_erasure, NetworkModel, ProtocolConfig, SliceSpec,
};
use crate::ConfigError;

/// Per-application constraints. At least one must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    /// Minimum expected goodput, packets per slot.
    pub min_goodput: Option<f64>,
    /// Maximum expected delivery delay, slots.
    pub max_delay: Option<f64>,
    /// Maximum expected in-order delivery delay, slots.
    pub max_inorder_delay: Option<f64>,
    pub protocol: ProtocolConfig,
}

impl Requirement {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.protocol.validate()?;
        if self.min_goodput.is_none() && self.max_delay.is_none() && self.max_inorder_delay.is_none()
        {
            return Err(ConfigError::EmptyRequirement);
        }
        for (name, value) in [
            ("min_goodput", self.min_goodput),
            ("max_delay", self.max_delay),
            ("max_inorder_delay", self.max_inorder_delay),
        ] {
            if let Some(v) = value {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(ConfigError::InvalidThreshold { name, value: v });
                }
            }
        }
        Ok(())
    }

    /// Tightest delivery-delay bound usable analytically: `max_delay`, with
    /// `max_inorder_delay` as a necessary-condition proxy.
    fn delay_bound(&self) -> Option<f64> {
        match (self.max_delay, self.max_inorder_delay) {
            (Some(d), Some(i)) => Some(d.min(i)),
            (Some(d), None) => Some(d),
            (None, Some(i)) => Some(i),
            (None, None) => None,
        }
    }
}

/// Which constraint fixed (or blocked) the link count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BindingConstraint {
    Goodput,
    Delay,
    Both,
    None,
}

/// Outcome of a minimum-resource computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub feasible: bool,
    pub links_needed: Option<usize>,
    pub binding_constraint: BindingConstraint,
    /// Expected delivery delay at `links_needed`, slots.
    pub predicted_delay: Option<f64>,
    /// Expected goodput at `links_needed`, packets per slot.
    pub predicted_goodput: Option<f64>,
    /// True when an in-order-delay constraint was pre-screened only by proxy
    /// and needs simulation confirmation.
    pub requires_simulation: bool,
}

impl AllocationResult {
    fn infeasible(binding: BindingConstraint, requires_simulation: bool) -> Self {
        AllocationResult {
            feasible: false,
            links_needed: None,
            binding_constraint: binding,
            predicted_delay: None,
            predicted_goodput: None,
            requires_simulation,
        }
    }
}

/// Expected delay and goodput of the requirement's protocol on a slice of
/// `size` links with the given mean erasure probability.
fn predict(
    protocol: &ProtocolConfig,
    size: usize,
    mean_erasure: f64,
    rtt: u64,
) -> Result<(f64, f64), ConfigError> {
    match protocol {
        ProtocolConfig::SrArq => Ok((
            analytic::srarq_expected_delay(mean_erasure, rtt),
            size as f64 * (1.0 - mean_erasure),
        )),
        cfg @ ProtocolConfig::Rlnc { .. } => {
            let pmf = analytic::rlnc_missing_dof_pmf(cfg, mean_erasure)?;
            Ok((
                analytic::rlnc_expected_delay(cfg, size, rtt, &pmf)?,
                analytic::rlnc_expected_goodput(cfg, size, &pmf)?,
            ))
        }
    }
}

/// Smallest slice (assumed homogeneous at `mean_erasure`) meeting the
/// requirement, per the closed-form models.
pub fn min_links(
    req: &Requirement,
    mean_erasure: f64,
    rtt: u64,
) -> Result<AllocationResult, ConfigError> {
    req.validate()?;
    if !(0.0..1.0).contains(&mean_erasure) {
        return Err(ConfigError::InvalidErasureProbability(mean_erasure));
    }
    let requires_simulation = req.max_inorder_delay.is_some();
    let delay_bound = req.delay_bound();

    let (links_delay, links_goodput) = match &req.protocol {
        ProtocolConfig::SrArq => {
            // Delay is size-independent: either every size works or none does.
            if let Some(bound) = delay_bound {
                if analytic::srarq_expected_delay(mean_erasure, rtt) > bound {
                    return Ok(AllocationResult::infeasible(
                        BindingConstraint::Delay,
                        requires_simulation,
                    ));
                }
            }
            let links_goodput = req
                .min_goodput
                .map(|g| ceil_count(g / (1.0 - mean_erasure)).max(1) as usize);
            (None, links_goodput)
        }
        cfg @ ProtocolConfig::Rlnc {
            generation_size,
            fec_rate,
            ..
        } => {
            let pmf = analytic::rlnc_missing_dof_pmf(cfg, mean_erasure)?;
            // Per-link goodput coefficient is size-independent.
            let links_goodput = match req.min_goodput {
                Some(g) => {
                    let per_link = analytic::rlnc_expected_goodput(cfg, 1, &pmf)?;
                    Some(ceil_count(g / per_link).max(1) as usize)
                }
                None => None,
            };
            // Delay decreases in size until the first round fits in one slot.
            let links_delay = match delay_bound {
                Some(bound) => {
                    let plateau = ceil_count(*generation_size as f64 * fec_rate).max(1) as usize;
                    let found = (1..=plateau).find(|&n| {
                        analytic::rlnc_expected_delay(cfg, n, rtt, &pmf)
                            .map(|d| d <= bound)
                            .unwrap_or(false)
                    });
                    match found {
                        Some(n) => Some(n),
                        None => {
                            return Ok(AllocationResult::infeasible(
                                BindingConstraint::Delay,
                                requires_simulation,
                            ))
                        }
                    }
                }
                None => None,
            };
            (links_delay, links_goodput)
        }
    };

    let links_needed = links_delay.unwrap_or(0).max(links_goodput.unwrap_or(0)).max(1);
    let binding_constraint = match (links_delay, links_goodput) {
        (Some(d), Some(g)) if d == g => BindingConstraint::Both,
        (Some(d), Some(g)) => {
            if d > g {
                BindingConstraint::Delay
            } else {
                BindingConstraint::Goodput
            }
        }
        (Some(_), None) => BindingConstraint::Delay,
        (None, Some(_)) => BindingConstraint::Goodput,
        (None, None) => BindingConstraint::None,
    };
    let (predicted_delay, predicted_goodput) =
        predict(&req.protocol, links_needed, mean_erasure, rtt)?;
    Ok(AllocationResult {
        feasible: true,
        links_needed: Some(links_needed),
        binding_constraint,
        predicted_delay: Some(predicted_delay),
        predicted_goodput: Some(predicted_goodput),
        requires_simulation,
    })
}

/// How many identical applications a homogeneous network can serve.
pub fn capacity(net: &NetworkModel, req: &Requirement) -> Result<usize, ConfigError> {
    if !net.is_homogeneous() {
        return Err(ConfigError::Invalid(
            "capacity requires a homogeneous network; use plan_partition instead".into(),
        ));
    }
    let result = min_links(req, net.erasure_probs()[0], net.rtt())?;
    Ok(match result.links_needed {
        Some(n) if result.feasible => net.link_count() / n,
        _ => 0,
    })
}

/// Partition search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionStrategy {
    /// Enumerate prefix/suffix splits over the network's link ordering
    /// (at most two applications).
    ContiguousSplit,
    /// Allocate `min_links` per application from a homogeneous pool.
    CountBased,
}

/// One slice of a candidate partition with its feasibility assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSlice {
    pub spec: SliceSpec,
    pub allocation: AllocationResult,
}

/// A feasible candidate partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    /// Slicing-choice label: size of the first slice.
    pub slicing_choice: usize,
    pub slices: Vec<PlannedSlice>,
}

impl PartitionPlan {
    pub fn links_consumed(&self) -> usize {
        self.slices.iter().map(|s| s.spec.size()).sum()
    }
}

/// Assess a concrete slice against a requirement using the closed forms.
fn assess_slice(
    spec: &SliceSpec,
    req: &Requirement,
    net: &NetworkModel,
) -> Result<AllocationResult, ConfigError> {
    let p_bar = mean_erasure(spec, net)?;
    let (delay, goodput) = predict(&req.protocol, spec.size(), p_bar, net.rtt())?;
    let goodput_ok = req.min_goodput.map_or(true, |g| goodput >= g);
    let delay_ok = req.delay_bound().map_or(true, |b| delay <= b);
    let binding = match (goodput_ok, delay_ok) {
        (true, true) => BindingConstraint::None,
        (false, true) => BindingConstraint::Goodput,
        (true, false) => BindingConstraint::Delay,
        (false, false) => BindingConstraint::Both,
    };
    Ok(AllocationResult {
        feasible: goodput_ok && delay_ok,
        links_needed: Some(spec.size()),
        binding_constraint: binding,
        predicted_delay: Some(delay),
        predicted_goodput: Some(goodput),
        requires_simulation: req.max_inorder_delay.is_some(),
    })
}

/// Every feasible slicing of the network over the given applications,
/// ordered by links consumed (ties broken toward the plan with the lowest
/// total mean erasure across delay-constrained slices, then by slicing
/// choice).
pub fn plan_partition(
    net: &NetworkModel,
    reqs: &[Requirement],
    strategy: PartitionStrategy,
) -> Result<Vec<PartitionPlan>, ConfigError> {
    for req in reqs {
        req.validate()?;
    }
    if reqs.is_empty() {
        return Err(ConfigError::Invalid("no requirements given".into()));
    }
    let mut plans = match strategy {
        PartitionStrategy::ContiguousSplit => contiguous_plans(net, reqs)?,
        PartitionStrategy::CountBased => count_based_plans(net, reqs)?,
    };
    plans.sort_by_key(|p| {
        let erasure_sum: f64 = p
            .slices
            .iter()
            .zip(reqs)
            .filter(|(_, r)| r.delay_bound().is_some())
            .map(|(s, _)| mean_erasure(&s.spec, net).unwrap_or(1.0))
            .sum();
        // Quantized so that accumulation noise cannot decide a tie.
        let erasure_key = (erasure_sum * 1e9).round() as u64;
        (p.links_consumed(), erasure_key, p.slicing_choice)
    });
    Ok(plans)
}

fn contiguous_plans(
    net: &NetworkModel,
    reqs: &[Requirement],
) -> Result<Vec<PartitionPlan>, ConfigError> {
    if reqs.len() > 2 {
        return Err(ConfigError::Invalid(
            "contiguous split supports at most two applications".into(),
        ));
    }
    let n = net.link_count();
    let mut plans = Vec::new();
    if reqs.len() == 1 {
        for i in 1..=n {
            let spec = SliceSpec::new((0..i).collect(), reqs[0].protocol)?;
            let allocation = assess_slice(&spec, &reqs[0], net)?;
            if allocation.feasible {
                plans.push(PartitionPlan {
                    slicing_choice: i,
                    slices: vec![PlannedSlice { spec, allocation }],
                });
            }
        }
    } else {
        for i in 1..n {
            let first = SliceSpec::new((0..i).collect(), reqs[0].protocol)?;
            let second = SliceSpec::new((i..n).collect(), reqs[1].protocol)?;
            let a0 = assess_slice(&first, &reqs[0], net)?;
            let a1 = assess_slice(&second, &reqs[1], net)?;
            if a0.feasible && a1.feasible {
                plans.push(PartitionPlan {
                    slicing_choice: i,
                    slices: vec![
                        PlannedSlice {
                            spec: first,
                            allocation: a0,
                        },
                        PlannedSlice {
                            spec: second,
                            allocation: a1,
                        },
                    ],
                });
            }
        }
    }
    Ok(plans)
}

fn count_based_plans(
    net: &NetworkModel,
    reqs: &[Requirement],
) -> Result<Vec<PartitionPlan>, ConfigError> {
    if !net.is_homogeneous() {
        return Err(ConfigError::Invalid(
            "count-based planning requires a homogeneous network".into(),
        ));
    }
    let p = net.erasure_probs()[0];
    let mut sizes = Vec::with_capacity(reqs.len());
    for req in reqs {
        let alloc = min_links(req, p, net.rtt())?;
        match alloc.links_needed {
            Some(n) if alloc.feasible => sizes.push(n),
            _ => return Ok(Vec::new()),
        }
    }
    let total: usize = sizes.iter().sum();
    if total > net.link_count() {
        return Ok(Vec::new());
    }
    let mut next = 0;
    let mut slices = Vec::with_capacity(reqs.len());
    for (req, &size) in reqs.iter().zip(&sizes) {
        let spec = SliceSpec::new((next..next + size).collect(), req.protocol)?;
        let allocation = assess_slice(&spec, req, net)?;
        slices.push(PlannedSlice { spec, allocation });
        next += size;
    }
    Ok(vec![PartitionPlan {
        slicing_choice: sizes[0],
        slices,
    }])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn srarq_req(goodput: Option<f64>, delay: Option<f64>) -> Requirement {
        Requirement {
            min_goodput: goodput,
            max_delay: delay,
            max_inorder_delay: None,
            protocol: ProtocolConfig::SrArq,
        }
    }

    fn rlnc_example2() -> ProtocolConfig {
        ProtocolConfig::Rlnc {
            generation_size: 50,
            fec_rate: 1.22,
            fb_rate: 2.22,
        }
    }

    #[test]
    fn srarq_goodput_threshold() {
        let r = min_links(&srarq_req(Some(5.0), None), 0.1, 1000).unwrap();
        assert!(r.feasible);
        assert_eq!(r.links_needed, Some(6));
        assert_eq!(r.binding_constraint, BindingConstraint::Goodput);
        assert!(r.predicted_goodput.unwrap() >= 5.0);
    }

    #[test]
    fn srarq_delay_infeasible_regardless_of_size() {
        let r = min_links(&srarq_req(None, Some(530.0)), 0.1, 1000).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.binding_constraint, BindingConstraint::Delay);
        assert_eq!(r.links_needed, None);
    }

    #[test]
    fn rlnc_example2_thresholds() {
        // Delay alone.
        let req = Requirement {
            min_goodput: None,
            max_delay: Some(530.0),
            max_inorder_delay: None,
            protocol: rlnc_example2(),
        };
        let r = min_links(&req, 0.1, 1000).unwrap();
        assert_eq!(r.links_needed, Some(9));
        assert_eq!(r.binding_constraint, BindingConstraint::Delay);

        // Goodput alone.
        let req = Requirement {
            min_goodput: Some(5.0),
            ..req
        };
        let req_goodput_only = Requirement {
            max_delay: None,
            ..req.clone()
        };
        let r = min_links(&req_goodput_only, 0.1, 1000).unwrap();
        assert_eq!(r.links_needed, Some(7));
        assert_eq!(r.binding_constraint, BindingConstraint::Goodput);

        // Combined: delay binds.
        let r = min_links(&req, 0.1, 1000).unwrap();
        assert_eq!(r.links_needed, Some(9));
        assert_eq!(r.binding_constraint, BindingConstraint::Delay);
        assert!(r.predicted_delay.unwrap() <= 530.0);
        assert!(r.predicted_goodput.unwrap() >= 5.0);
    }

    #[test]
    fn rlnc_delay_impossible() {
        let req = Requirement {
            min_goodput: None,
            max_delay: Some(100.0), // below rtt/2
            max_inorder_delay: None,
            protocol: rlnc_example2(),
        };
        let r = min_links(&req, 0.1, 1000).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.binding_constraint, BindingConstraint::Delay);
    }

    #[test]
    fn capacity_example2() {
        let net = NetworkModel::homogeneous(10_000, 0.1, 1000).unwrap();
        let req = Requirement {
            min_goodput: Some(5.0),
            max_delay: Some(530.0),
            max_inorder_delay: None,
            protocol: rlnc_example2(),
        };
        assert_eq!(capacity(&net, &req).unwrap(), 1111);

        let uncoded = srarq_req(Some(5.0), Some(530.0));
        assert_eq!(capacity(&net, &uncoded).unwrap(), 0);

        let nine = NetworkModel::homogeneous(9, 0.1, 1000).unwrap();
        assert_eq!(capacity(&nine, &req).unwrap(), 1);

        let hetero = NetworkModel::new(vec![0.1, 0.2], 1000).unwrap();
        assert!(capacity(&hetero, &req).is_err());
    }

    #[test]
    fn capacity_times_links_bounded_by_n() {
        let net = NetworkModel::homogeneous(10_000, 0.1, 1000).unwrap();
        let req = Requirement {
            min_goodput: Some(5.0),
            max_delay: Some(530.0),
            max_inorder_delay: None,
            protocol: rlnc_example2(),
        };
        let links = min_links(&req, 0.1, 1000).unwrap().links_needed.unwrap();
        assert!(capacity(&net, &req).unwrap() * links <= net.link_count());
    }

    #[test]
    fn min_links_monotone_in_constraints() {
        let base = Requirement {
            min_goodput: Some(4.0),
            max_delay: Some(600.0),
            max_inorder_delay: None,
            protocol: rlnc_example2(),
        };
        let loose = min_links(&base, 0.1, 1000).unwrap().links_needed.unwrap();
        for (g, d) in [(5.0, 600.0), (4.0, 540.0), (6.0, 531.0)] {
            let tight = Requirement {
                min_goodput: Some(g),
                max_delay: Some(d),
                ..base.clone()
            };
            let r = min_links(&tight, 0.1, 1000).unwrap();
            assert!(r.links_needed.unwrap() >= loose);
        }
    }

    #[test]
    fn empty_requirement_rejected() {
        let req = Requirement {
            min_goodput: None,
            max_delay: None,
            max_inorder_delay: None,
            protocol: ProtocolConfig::SrArq,
        };
        assert_eq!(
            min_links(&req, 0.1, 1000).unwrap_err(),
            ConfigError::EmptyRequirement
        );
    }

    #[test]
    fn single_app_full_network() {
        let net = NetworkModel::homogeneous(10, 0.1, 1000).unwrap();
        // Goodput demand equal to the whole network's expected goodput.
        let req = srarq_req(Some(9.0), None);
        let plans = plan_partition(&net, &[req], PartitionStrategy::ContiguousSplit).unwrap();
        assert_eq!(plans.len(), 1);
        assert_eq!(plans[0].slices[0].spec.size(), 10);
    }

    #[test]
    fn two_uncoded_apps_with_tight_iod_never_feasible() {
        let net = NetworkModel::homogeneous(20, 0.2, 150).unwrap();
        let app1 = Requirement {
            min_goodput: None,
            max_delay: None,
            max_inorder_delay: Some(100.0),
            protocol: ProtocolConfig::SrArq,
        };
        let app2 = srarq_req(Some(9.0), None);
        let plans =
            plan_partition(&net, &[app1, app2], PartitionStrategy::ContiguousSplit).unwrap();
        assert!(plans.is_empty());
    }

    #[test]
    fn overdemand_yields_empty_not_error() {
        let net = NetworkModel::homogeneous(4, 0.2, 150).unwrap();
        let reqs = vec![srarq_req(Some(3.0), None), srarq_req(Some(3.0), None)];
        let plans = plan_partition(&net, &reqs, PartitionStrategy::CountBased).unwrap();
        assert!(plans.is_empty());
    }

    #[test]
    fn count_based_allocates_disjoint_blocks() {
        let net = NetworkModel::homogeneous(20, 0.2, 150).unwrap();
        let reqs = vec![srarq_req(Some(4.0), None), srarq_req(Some(8.0), None)];
        let plans = plan_partition(&net, &reqs, PartitionStrategy::CountBased).unwrap();
        assert_eq!(plans.len(), 1);
        let plan = &plans[0];
        assert_eq!(plan.slices[0].spec.size(), 5);
        assert_eq!(plan.slices[1].spec.size(), 10);
        assert!(plan.slices.iter().all(|s| s.allocation.feasible));
    }

    #[test]
    fn contiguous_more_than_two_apps_rejected() {
        let net = NetworkModel::homogeneous(6, 0.1, 100).unwrap();
        let reqs = vec![
            srarq_req(Some(1.0), None),
            srarq_req(Some(1.0), None),
            srarq_req(Some(1.0), None),
        ];
        assert!(plan_partition(&net, &reqs, PartitionStrategy::ContiguousSplit).is_err());
    }
}
