//! Closed-form performance models for SR-ARQ and RLNC slices.
//!
//! Every formula here depends on the member links only through the slice's
//! average erasure probability. Delays are in time slots, goodput in
//! information packets per slot.

use serde::{Deserialize, Serialize};

use crate::ConfigError;

/// Pool of parallel erasure links shared by all slices.
///
/// Feedback for a packet sent in slot `t` reaches the sender in slot
/// `t + rtt`; one-way latency is `rtt / 2`, so `rtt` must be even.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    link_erasure_probs: Vec<f64>,
    rtt: u64,
    slot_duration_secs: Option<f64>,
}

impl NetworkModel {
    pub fn new(link_erasure_probs: Vec<f64>, rtt: u64) -> Result<Self, ConfigError> {
        if link_erasure_probs.is_empty() {
            return Err(ConfigError::EmptyNetwork);
        }
        for &p in &link_erasure_probs {
            if !(0.0..1.0).contains(&p) || !p.is_finite() {
                return Err(ConfigError::InvalidErasureProbability(p));
            }
        }
        if rtt == 0 || rtt % 2 != 0 {
            return Err(ConfigError::InvalidRtt(rtt));
        }
        Ok(Self {
            link_erasure_probs,
            rtt,
            slot_duration_secs: None,
        })
    }

    /// Homogeneous network: `n` identical links with erasure probability `p`.
    pub fn homogeneous(n: usize, p: f64, rtt: u64) -> Result<Self, ConfigError> {
        Self::new(vec![p; n], rtt)
    }

    /// Attach a wall-clock duration per slot, for unit conversion only.
    pub fn with_slot_duration(mut self, secs: f64) -> Result<Self, ConfigError> {
        if !(secs > 0.0) || !secs.is_finite() {
            return Err(ConfigError::InvalidSlotDuration(secs));
        }
        self.slot_duration_secs = Some(secs);
        Ok(self)
    }

    pub fn link_count(&self) -> usize {
        self.link_erasure_probs.len()
    }

    pub fn erasure_probs(&self) -> &[f64] {
        &self.link_erasure_probs
    }

    pub fn erasure_prob(&self, link: usize) -> Result<f64, ConfigError> {
        self.link_erasure_probs
            .get(link)
            .copied()
            .ok_or(ConfigError::LinkIndexOutOfRange {
                index: link,
                links: self.link_count(),
            })
    }

    pub fn rtt(&self) -> u64 {
        self.rtt
    }

    /// One-way latency in slots (`rtt / 2`).
    pub fn one_way(&self) -> u64 {
        self.rtt / 2
    }

    pub fn slot_duration_secs(&self) -> Option<f64> {
        self.slot_duration_secs
    }

    /// True when every link has the same erasure probability.
    pub fn is_homogeneous(&self) -> bool {
        let first = self.link_erasure_probs[0];
        self.link_erasure_probs
            .iter()
            .all(|&p| (p - first).abs() < 1e-12)
    }
}

/// Protocol an application runs over its slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ProtocolConfig {
    /// Selective-repeat ARQ: retransmit exactly the NACKed packets.
    SrArq,
    /// Random linear network coding over generations of `generation_size`
    /// information packets. The first round sends `ceil(k * fec_rate)` coded
    /// packets; each feedback round sends `ceil(fb_rate * m)` repairs for `m`
    /// missing degrees of freedom.
    Rlnc {
        generation_size: u64,
        fec_rate: f64,
        fb_rate: f64,
    },
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let ProtocolConfig::Rlnc {
            generation_size,
            fec_rate,
            fb_rate,
        } = *self
        {
            if generation_size == 0 {
                return Err(ConfigError::InvalidGenerationSize);
            }
            if !(fec_rate >= 1.0) || !fec_rate.is_finite() {
                return Err(ConfigError::InvalidRate {
                    name: "fec",
                    value: fec_rate,
                });
            }
            if !(fb_rate >= 1.0) || !fb_rate.is_finite() {
                return Err(ConfigError::InvalidRate {
                    name: "fb",
                    value: fb_rate,
                });
            }
        }
        Ok(())
    }

    pub fn is_rlnc(&self) -> bool {
        matches!(self, ProtocolConfig::Rlnc { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolConfig::SrArq => "srarq",
            ProtocolConfig::Rlnc { .. } => "rlnc",
        }
    }
}

/// A subset of the network's links dedicated to one application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    link_indices: Vec<usize>,
    protocol: ProtocolConfig,
}

impl SliceSpec {
    pub fn new(link_indices: Vec<usize>, protocol: ProtocolConfig) -> Result<Self, ConfigError> {
        if link_indices.is_empty() {
            return Err(ConfigError::EmptySlice);
        }
        let mut seen = link_indices.clone();
        seen.sort_unstable();
        for pair in seen.windows(2) {
            if pair[0] == pair[1] {
                return Err(ConfigError::DuplicateLink(pair[0]));
            }
        }
        protocol.validate()?;
        Ok(Self {
            link_indices,
            protocol,
        })
    }

    pub fn links(&self) -> &[usize] {
        &self.link_indices
    }

    pub fn size(&self) -> usize {
        self.link_indices.len()
    }

    pub fn protocol(&self) -> &ProtocolConfig {
        &self.protocol
    }

    /// Check that every member index is a valid link of `net`.
    pub fn validate_against(&self, net: &NetworkModel) -> Result<(), ConfigError> {
        for &i in &self.link_indices {
            net.erasure_prob(i)?;
        }
        Ok(())
    }
}

/// A disjoint partition of (a subset of) the network's links into slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePlan {
    slices: Vec<SliceSpec>,
}

impl SlicePlan {
    pub fn new(slices: Vec<SliceSpec>, net: &NetworkModel) -> Result<Self, ConfigError> {
        let mut used = vec![false; net.link_count()];
        for slice in &slices {
            slice.validate_against(net)?;
            for &i in slice.links() {
                if used[i] {
                    return Err(ConfigError::OverlappingSlices(i));
                }
                used[i] = true;
            }
        }
        Ok(Self { slices })
    }

    pub fn slices(&self) -> &[SliceSpec] {
        &self.slices
    }
}

/// Average erasure probability of the slice's member links.
pub fn mean_erasure(slice: &SliceSpec, net: &NetworkModel) -> Result<f64, ConfigError> {
    let mut sum = 0.0;
    for &i in slice.links() {
        sum += net.erasure_prob(i)?;
    }
    Ok(sum / slice.size() as f64)
}

/// Truncated delivery-delay distribution with an explicit tail mass.
///
/// Support points are `rtt/2 + k*rtt` for `k = 0..=max_k`; the mass of all
/// larger delays is kept as a single tail entry so the distribution always
/// sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayPmf {
    points: Vec<(f64, f64)>,
    tail_delay: f64,
    tail_mass: f64,
}

impl DelayPmf {
    /// `(delay_slots, probability)` pairs in strictly increasing delay order.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Probability mass beyond the last support point.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Total mass including the tail entry.
    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|&(_, p)| p).sum::<f64>() + self.tail_mass
    }

    /// Mean delay, with the tail mass attributed to the first delay beyond
    /// the truncation point.
    pub fn mean(&self) -> f64 {
        self.points.iter().map(|&(d, p)| d * p).sum::<f64>() + self.tail_delay * self.tail_mass
    }
}

/// Delivery-delay distribution of multi-path SR-ARQ:
/// `P[D = rtt/2 + k*rtt] = mean_erasure^k * (1 - mean_erasure)`.
pub fn srarq_delay_pmf(
    mean_erasure: f64,
    rtt: u64,
    max_k: u64,
) -> Result<DelayPmf, ConfigError> {
    check_probability(mean_erasure)?;
    let q = 1.0 - mean_erasure;
    let mut points = Vec::with_capacity(max_k as usize + 1);
    let mut mass = q;
    for k in 0..=max_k {
        points.push((rtt as f64 / 2.0 + k as f64 * rtt as f64, mass));
        mass *= mean_erasure;
    }
    // after the loop, mass/q * q = mean_erasure^(max_k+1)
    let tail_mass = if mean_erasure == 0.0 { 0.0 } else { mass / q * 1.0 };
    Ok(DelayPmf {
        points,
        tail_delay: rtt as f64 / 2.0 + (max_k + 1) as f64 * rtt as f64,
        tail_mass,
    })
}

/// Expected SR-ARQ delivery delay: `0.5 * (1 + p) / (1 - p) * rtt`.
pub fn srarq_expected_delay(mean_erasure: f64, rtt: u64) -> f64 {
    0.5 * (1.0 + mean_erasure) / (1.0 - mean_erasure) * rtt as f64
}

/// Expected SR-ARQ goodput: `sum(1 - p_i)` over the slice's links.
pub fn srarq_expected_goodput(slice: &SliceSpec, net: &NetworkModel) -> Result<f64, ConfigError> {
    if slice.protocol().is_rlnc() {
        return Err(ConfigError::ExpectedSrArq);
    }
    let mut sum = 0.0;
    for &i in slice.links() {
        sum += 1.0 - net.erasure_prob(i)?;
    }
    Ok(sum)
}

/// Distribution of the degrees of freedom still missing after an RLNC
/// generation's first transmission round.
#[derive(Debug, Clone, PartialEq)]
pub struct MissingDofPmf {
    probs: Vec<f64>,
    lambda: f64,
    threshold: u64,
}

impl MissingDofPmf {
    /// `probs()[m]` is `P[m missing degrees of freedom]`, `m = 0..=k`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Poisson parameter `k * fec_rate * mean_erasure`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// First-round slack `ceil((fec_rate - 1) * k)`: losses up to this count
    /// still decode without a repair round.
    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// Probability the generation decodes from the first round alone.
    pub fn p_zero(&self) -> f64 {
        self.probs[0]
    }

    pub fn expected_missing(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(m, &p)| m as f64 * p)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Poisson approximation of the missing-degrees-of-freedom count after an
/// RLNC generation's first round.
///
/// With `lambda = k * fec_rate * mean_erasure` and slack
/// `c = ceil((fec_rate - 1) * k)`: `P[m = 0]` is the Poisson CDF at `c`, and
/// `P[m]` the Poisson mass at `c + m` for `1 <= m <= k`. The residual Poisson
/// tail beyond `c + k` is folded into `m = k` so the result is a proper
/// distribution.
pub fn rlnc_missing_dof_pmf(
    cfg: &ProtocolConfig,
    mean_erasure: f64,
) -> Result<MissingDofPmf, ConfigError> {
    check_probability(mean_erasure)?;
    cfg.validate()?;
    let ProtocolConfig::Rlnc {
        generation_size: k,
        fec_rate,
        ..
    } = *cfg
    else {
        return Err(ConfigError::ExpectedRlnc);
    };

    let lambda = k as f64 * fec_rate * mean_erasure;
    let threshold = ceil_tol((fec_rate - 1.0) * k as f64) as u64;

    let mut probs = vec![0.0; k as usize + 1];
    // Iterative Poisson recurrence: mass(f + 1) = mass(f) * lambda / (f + 1).
    let mut mass = (-lambda).exp();
    let mut cdf = mass;
    for f in 0..threshold {
        mass *= lambda / (f + 1) as f64;
        cdf += mass;
    }
    // Accumulated rounding can push the CDF an ulp past one.
    probs[0] = cdf.min(1.0);
    for m in 1..=k {
        let f = threshold + m;
        mass *= lambda / f as f64;
        probs[m as usize] = mass;
        cdf += mass;
    }
    // Fold the residual tail into m = k.
    probs[k as usize] += (1.0 - cdf).max(0.0);

    Ok(MissingDofPmf {
        probs,
        lambda,
        threshold,
    })
}

/// Expected RLNC delivery delay of a generation over a slice of
/// `slice_size` links.
pub fn rlnc_expected_delay(
    cfg: &ProtocolConfig,
    slice_size: usize,
    rtt: u64,
    pmf: &MissingDofPmf,
) -> Result<f64, ConfigError> {
    let ProtocolConfig::Rlnc {
        generation_size: k,
        fec_rate,
        ..
    } = *cfg
    else {
        return Err(ConfigError::ExpectedRlnc);
    };
    if slice_size == 0 {
        return Err(ConfigError::EmptySlice);
    }
    let half = rtt as f64 / 2.0;
    let round1_slots = ceil_tol(k as f64 * fec_rate / slice_size as f64);
    let p0 = pmf.p_zero();
    Ok((half + round1_slots) * p0 + (3.0 * half + round1_slots + 1.0) * (1.0 - p0))
}

/// Expected RLNC goodput: `sum_m k / (k*fec + m*fb) * P[m] * slice_size`.
pub fn rlnc_expected_goodput(
    cfg: &ProtocolConfig,
    slice_size: usize,
    pmf: &MissingDofPmf,
) -> Result<f64, ConfigError> {
    let ProtocolConfig::Rlnc {
        generation_size: k,
        fec_rate,
        fb_rate,
    } = *cfg
    else {
        return Err(ConfigError::ExpectedRlnc);
    };
    if slice_size == 0 {
        return Err(ConfigError::EmptySlice);
    }
    let kf = k as f64;
    let per_link: f64 = pmf
        .probs()
        .iter()
        .enumerate()
        .map(|(m, &p)| kf / (kf * fec_rate + m as f64 * fb_rate) * p)
        .sum();
    Ok(per_link * slice_size as f64)
}

/// Default rate parameterization: `fec = fec_multiplier / (1 - mean_erasure)`
/// and `fb = fb_multiplier / (1 - mean_erasure)`.
pub fn default_rates(
    mean_erasure: f64,
    fec_multiplier: f64,
    fb_multiplier: f64,
) -> Result<(f64, f64), ConfigError> {
    check_probability(mean_erasure)?;
    let fec = fec_multiplier / (1.0 - mean_erasure);
    let fb = fb_multiplier / (1.0 - mean_erasure);
    if !(fec >= 1.0) || !fec.is_finite() {
        return Err(ConfigError::InvalidRate {
            name: "fec",
            value: fec,
        });
    }
    if !(fb >= 1.0) || !fb.is_finite() {
        return Err(ConfigError::InvalidRate {
            name: "fb",
            value: fb,
        });
    }
    Ok((fec, fb))
}

/// Default multiplier for the first-round FEC rate.
pub const DEFAULT_FEC_MULTIPLIER: f64 = 1.1;
/// Default multiplier for the feedback-round repair rate.
pub const DEFAULT_FB_MULTIPLIER: f64 = 2.0;

/// RLNC protocol config with both rates derived from the slice's mean
/// erasure probability using the default multipliers.
pub fn default_rlnc(generation_size: u64, mean_erasure: f64) -> Result<ProtocolConfig, ConfigError> {
    let (fec_rate, fb_rate) = default_rates(
        mean_erasure,
        DEFAULT_FEC_MULTIPLIER,
        DEFAULT_FB_MULTIPLIER,
    )?;
    Ok(ProtocolConfig::Rlnc {
        generation_size,
        fec_rate,
        fb_rate,
    })
}

/// Ceiling with a tolerance for products like `0.22 * 50` that land a hair
/// above an integer in binary floating point.
pub(crate) fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x.ceil()
    }
}

/// `ceil_tol` as an integer count.
pub(crate) fn ceil_count(x: f64) -> u64 {
    ceil_tol(x) as u64
}

fn check_probability(p: f64) -> Result<(), ConfigError> {
    if !(0.0..1.0).contains(&p) || !p.is_finite() {
        return Err(ConfigError::InvalidErasureProbability(p));
    }
    Ok(())
}
