//! Config file schema and its resolution into core types.
//!
//! The file is TOML with four sections: `[network]`, `[[slices]]`, optional
//! `[sim]`, optional `[sweep]` and `[plan]`. Durations and rates may be given
//! in slots/packets-per-slot natively, or in milliseconds / Mbps when the
//! network section carries `slot_duration_us` / `link_bandwidth_mbps`; unit
//! fields are converted at parse time so everything downstream is unit-free.

use serde::{Deserialize, Serialize};

use slicesim::analytic::{
    default_rates, mean_erasure, NetworkModel, ProtocolConfig, SliceSpec,
    DEFAULT_FB_MULTIPLIER, DEFAULT_FEC_MULTIPLIER,
};
use slicesim::planner::{PartitionStrategy, Requirement};
use slicesim::sim::{RlncMode, ScenarioConfig, DEFAULT_MAX_SLOTS};

use crate::CliError;

pub const DEFAULT_GENERATION_SIZE: u64 = 50;

/// Raw file schema. Optional fields stay optional so that parsing and
/// re-serializing a config is idempotent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub network: NetworkSection,
    pub slices: Vec<SliceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    /// Per-link erasure probabilities; mutually exclusive with
    /// `links` + `erasure_prob`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erasure_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erasure_prob: Option<f64>,
    pub rtt: u64,
    /// Enables millisecond-unit requirement fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_duration_us: Option<f64>,
    /// Per-link bandwidth; enables Mbps-unit requirement fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_bandwidth_mbps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Explicit link indices; mutually exclusive with `count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<Vec<usize>>,
    /// Take this many of the lowest unassigned link indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// `"srarq"` or `"rlnc"`.
    pub protocol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation_size: Option<u64>,
    /// RLNC first-round rate; derived from the slice's mean erasure
    /// probability when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fec_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fb_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement: Option<RequirementSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_goodput: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_goodput_mbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_delay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_delay_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_inorder_delay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_inorder_delay_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packets_per_app: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `"stop_and_wait"` or `"pipelined"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rlnc_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_slots: Option<u64>,
}

/// Slicing-choice sweep: the first slice takes links `0..i` for
/// `i = from..=to`, the second (when present) the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    /// `"contiguous_split"` or `"count_based"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
}

pub fn parse(text: &str) -> Result<FileConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
}

pub fn to_toml(cfg: &FileConfig) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Config(format!("config serialize error: {e}")))
}

/// RLNC rates may be left implicit in the file; they are fixed only once the
/// slice's member links (and so its mean erasure probability) are known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolTemplate {
    SrArq,
    Rlnc {
        generation_size: u64,
        fec_rate: Option<f64>,
        fb_rate: Option<f64>,
    },
}

impl ProtocolTemplate {
    pub fn instantiate(&self, mean_erasure: f64) -> Result<ProtocolConfig, CliError> {
        match *self {
            ProtocolTemplate::SrArq => Ok(ProtocolConfig::SrArq),
            ProtocolTemplate::Rlnc {
                generation_size,
                fec_rate,
                fb_rate,
            } => {
                let (default_fec, default_fb) = default_rates(
                    mean_erasure,
                    DEFAULT_FEC_MULTIPLIER,
                    DEFAULT_FB_MULTIPLIER,
                )?;
                let cfg = ProtocolConfig::Rlnc {
                    generation_size,
                    fec_rate: fec_rate.unwrap_or(default_fec),
                    fb_rate: fb_rate.unwrap_or(default_fb),
                };
                cfg.validate()?;
                Ok(cfg)
            }
        }
    }
}

/// Requirement thresholds in core units (slots, packets per slot), protocol
/// still unattached.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RequirementSpec {
    pub min_goodput: Option<f64>,
    pub max_delay: Option<f64>,
    pub max_inorder_delay: Option<f64>,
}

impl RequirementSpec {
    pub fn attach(&self, protocol: ProtocolConfig) -> Requirement {
        Requirement {
            min_goodput: self.min_goodput,
            max_delay: self.max_delay,
            max_inorder_delay: self.max_inorder_delay,
            protocol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSlice {
    pub name: String,
    pub links: Vec<usize>,
    pub template: ProtocolTemplate,
    pub requirement: Option<RequirementSpec>,
}

impl ResolvedSlice {
    pub fn spec(&self, net: &NetworkModel) -> Result<SliceSpec, CliError> {
        let probe = SliceSpec::new(self.links.clone(), ProtocolConfig::SrArq)?;
        probe.validate_against(net)?;
        let p_bar = mean_erasure(&probe, net)?;
        Ok(SliceSpec::new(
            self.links.clone(),
            self.template.instantiate(p_bar)?,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub packets_per_app: u64,
    pub trials: u64,
    pub seed: u64,
    pub mode: RlncMode,
    pub max_slots: u64,
}

/// A validated experiment: concrete network, slice templates, run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub network: NetworkModel,
    pub slices: Vec<ResolvedSlice>,
    pub sim: SimParams,
    pub sweep: Option<(usize, usize)>,
    pub strategy: PartitionStrategy,
}

impl Experiment {
    /// Slices for one slicing choice of the sweep: the first slice becomes
    /// links `0..i`, the second the remainder.
    pub fn slices_for_choice(&self, i: usize) -> Result<Vec<ResolvedSlice>, CliError> {
        let n = self.network.link_count();
        if i == 0 || i >= n {
            return Err(CliError::Config(format!(
                "sweep choice {i} out of range 1..{n}"
            )));
        }
        let mut out = Vec::with_capacity(self.slices.len());
        match self.slices.len() {
            1 => out.push(ResolvedSlice {
                links: (0..i).collect(),
                ..self.slices[0].clone()
            }),
            2 => {
                out.push(ResolvedSlice {
                    links: (0..i).collect(),
                    ..self.slices[0].clone()
                });
                out.push(ResolvedSlice {
                    links: (i..n).collect(),
                    ..self.slices[1].clone()
                });
            }
            k => {
                return Err(CliError::Config(format!(
                    "sweep requires one or two slices, config has {k}"
                )))
            }
        }
        Ok(out)
    }

    /// Scenario for the configured (non-sweep) slices, or for one sweep
    /// choice when `choice` is given.
    pub fn scenario(&self, choice: Option<usize>) -> Result<ScenarioConfig, CliError> {
        let resolved = match choice {
            Some(i) => self.slices_for_choice(i)?,
            None => self.slices.clone(),
        };
        let slices = resolved
            .iter()
            .map(|s| s.spec(&self.network))
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = ScenarioConfig {
            network: self.network.clone(),
            slices,
            packets_per_app: self.sim.packets_per_app,
            trials: self.sim.trials,
            base_seed: self.sim.seed,
            rlnc_mode: self.sim.mode,
            max_slots: self.sim.max_slots,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn resolve(file: &FileConfig) -> Result<Experiment, CliError> {
    let network = resolve_network(&file.network)?;
    if file.slices.is_empty() {
        return Err(CliError::Config("config defines no slices".into()));
    }

    let mut used = vec![false; network.link_count()];
    let mut slices = Vec::with_capacity(file.slices.len());
    for (idx, s) in file.slices.iter().enumerate() {
        slices.push(resolve_slice(s, idx, &file.network, &mut used)?);
    }

    let sim = resolve_sim(file.sim.as_ref())?;
    let sweep = match file.sweep {
        Some(SweepSection { from, to }) => {
            let n = network.link_count();
            if from == 0 || to >= n || from > to {
                return Err(CliError::Config(format!(
                    "sweep bounds {from}..={to} outside 1..={}",
                    n - 1
                )));
            }
            Some((from, to))
        }
        None => None,
    };
    let strategy = match file.plan.as_ref().and_then(|p| p.strategy.as_deref()) {
        None | Some("contiguous_split") => PartitionStrategy::ContiguousSplit,
        Some("count_based") => PartitionStrategy::CountBased,
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown plan strategy '{other}' (expected contiguous_split or count_based)"
            )))
        }
    };

    Ok(Experiment {
        network,
        slices,
        sim,
        sweep,
        strategy,
    })
}

fn resolve_network(section: &NetworkSection) -> Result<NetworkModel, CliError> {
    let probs = match (&section.erasure_probs, section.links, section.erasure_prob) {
        (Some(probs), None, None) => probs.clone(),
        (None, Some(n), Some(p)) => vec![p; n],
        (None, None, None) | (None, Some(_), None) | (None, None, Some(_)) => {
            return Err(CliError::Config(
                "network needs either erasure_probs or links + erasure_prob".into(),
            ))
        }
        _ => {
            return Err(CliError::Config(
                "network: erasure_probs conflicts with links/erasure_prob".into(),
            ))
        }
    };
    let mut net = NetworkModel::new(probs, section.rtt)?;
    if let Some(us) = section.slot_duration_us {
        net = net.with_slot_duration(us * 1e-6)?;
    }
    Ok(net)
}

fn resolve_slice(
    s: &SliceSection,
    idx: usize,
    net: &NetworkSection,
    used: &mut [bool],
) -> Result<ResolvedSlice, CliError> {
    let name = s.name.clone().unwrap_or_else(|| format!("slice{idx}"));
    let links = match (&s.links, s.count) {
        (Some(links), None) => links.clone(),
        (None, Some(count)) => {
            let free: Vec<usize> = (0..used.len()).filter(|&i| !used[i]).take(count).collect();
            if free.len() < count {
                return Err(CliError::Config(format!(
                    "slice '{name}' asks for {count} links but only {} remain",
                    free.len()
                )));
            }
            free
        }
        _ => {
            return Err(CliError::Config(format!(
                "slice '{name}' needs exactly one of links or count"
            )))
        }
    };
    for &i in &links {
        if i >= used.len() {
            return Err(CliError::Config(format!(
                "slice '{name}' references link {i}, network has {}",
                used.len()
            )));
        }
        if used[i] {
            return Err(CliError::Config(format!(
                "slice '{name}' reuses link {i}"
            )));
        }
        used[i] = true;
    }

    let template = match s.protocol.as_str() {
        "srarq" => {
            if s.generation_size.is_some() || s.fec_rate.is_some() || s.fb_rate.is_some() {
                return Err(CliError::Config(format!(
                    "slice '{name}': srarq takes no coding parameters"
                )));
            }
            ProtocolTemplate::SrArq
        }
        "rlnc" => ProtocolTemplate::Rlnc {
            generation_size: s.generation_size.unwrap_or(DEFAULT_GENERATION_SIZE),
            fec_rate: s.fec_rate,
            fb_rate: s.fb_rate,
        },
        other => {
            return Err(CliError::Config(format!(
                "slice '{name}': unknown protocol '{other}' (expected srarq or rlnc)"
            )))
        }
    };

    let requirement = match &s.requirement {
        Some(r) => Some(resolve_requirement(r, &name, net)?),
        None => None,
    };

    Ok(ResolvedSlice {
        name,
        links,
        template,
        requirement,
    })
}

fn resolve_requirement(
    r: &RequirementSection,
    name: &str,
    net: &NetworkSection,
) -> Result<RequirementSpec, CliError> {
    let ms_to_slots = |ms: f64, field: &str| -> Result<f64, CliError> {
        match net.slot_duration_us {
            Some(us) => Ok(ms * 1000.0 / us),
            None => Err(CliError::Config(format!(
                "slice '{name}': {field} needs network.slot_duration_us"
            ))),
        }
    };
    let pick = |plain: Option<f64>,
                unit: Option<f64>,
                field: &str,
                convert: &dyn Fn(f64) -> Result<f64, CliError>|
     -> Result<Option<f64>, CliError> {
        match (plain, unit) {
            (Some(_), Some(_)) => Err(CliError::Config(format!(
                "slice '{name}': {field} given in both slots and unit form"
            ))),
            (Some(v), None) => Ok(Some(v)),
            (None, Some(u)) => Ok(Some(convert(u)?)),
            (None, None) => Ok(None),
        }
    };
    let spec = RequirementSpec {
        min_goodput: pick(r.min_goodput, r.min_goodput_mbps, "min_goodput", &|mbps| {
            // One packet per link-slot: a link's packet rate is its bandwidth.
            match net.link_bandwidth_mbps {
                Some(bw) => Ok(mbps / bw),
                None => Err(CliError::Config(format!(
                    "slice '{name}': min_goodput_mbps needs network.link_bandwidth_mbps"
                ))),
            }
        })?,
        max_delay: pick(r.max_delay, r.max_delay_ms, "max_delay", &|ms| {
            ms_to_slots(ms, "max_delay_ms")
        })?,
        max_inorder_delay: pick(
            r.max_inorder_delay,
            r.max_inorder_delay_ms,
            "max_inorder_delay",
            &|ms| ms_to_slots(ms, "max_inorder_delay_ms"),
        )?,
    };
    if spec.min_goodput.is_none() && spec.max_delay.is_none() && spec.max_inorder_delay.is_none() {
        return Err(CliError::Config(format!(
            "slice '{name}': requirement section is empty"
        )));
    }
    Ok(spec)
}

fn resolve_sim(section: Option<&SimSection>) -> Result<SimParams, CliError> {
    let s = section.cloned().unwrap_or(SimSection {
        packets_per_app: None,
        trials: None,
        seed: None,
        rlnc_mode: None,
        max_slots: None,
    });
    let mode = match s.rlnc_mode.as_deref() {
        None | Some("pipelined") => RlncMode::Pipelined,
        Some("stop_and_wait") | Some("stopwait") => RlncMode::StopAndWait,
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown rlnc_mode '{other}' (expected pipelined or stop_and_wait)"
            )))
        }
    };
    Ok(SimParams {
        packets_per_app: s.packets_per_app.unwrap_or(1000),
        trials: s.trials.unwrap_or(50),
        seed: s.seed.unwrap_or(2024),
        mode,
        max_slots: s.max_slots.unwrap_or(DEFAULT_MAX_SLOTS),
    })
}
