//! The analyze / simulate / plan subcommands, each producing report rows.

use std::fmt::Write as _;

use slicesim::analytic::{
    mean_erasure, rlnc_expected_delay, rlnc_expected_goodput, rlnc_missing_dof_pmf,
    srarq_expected_delay, srarq_expected_goodput, NetworkModel, ProtocolConfig, SliceSpec,
};
use slicesim::planner::{capacity, min_links, plan_partition, BindingConstraint};
use slicesim::sim::{aggregate, run_slice, run_trial_with_trace, MetricsSummary};

use crate::config::{Experiment, RequirementSpec, ResolvedSlice};
use crate::report::ReportRow;
use crate::CliError;

/// Closed-form delay/goodput for one slice, plus RLNC distribution extras
/// for the flags column.
pub fn analytic_overlay(
    spec: &SliceSpec,
    net: &NetworkModel,
) -> Result<(f64, f64, String), CliError> {
    let p_bar = mean_erasure(spec, net)?;
    match spec.protocol() {
        ProtocolConfig::SrArq => Ok((
            srarq_expected_delay(p_bar, net.rtt()),
            srarq_expected_goodput(spec, net)?,
            String::new(),
        )),
        cfg @ ProtocolConfig::Rlnc { .. } => {
            let pmf = rlnc_missing_dof_pmf(cfg, p_bar)?;
            Ok((
                rlnc_expected_delay(cfg, spec.size(), net.rtt(), &pmf)?,
                rlnc_expected_goodput(cfg, spec.size(), &pmf)?,
                format!("lambda={:.4};p0={:.4}", pmf.lambda(), pmf.p_zero()),
            ))
        }
    }
}

fn requirement_flags(
    req: &RequirementSpec,
    goodput: Option<f64>,
    delay: Option<f64>,
    inorder: Option<f64>,
) -> String {
    let mut flags = Vec::new();
    if let Some(bound) = req.min_goodput {
        flags.push(match goodput {
            Some(g) if g >= bound => "G:ok",
            Some(_) => "G:viol",
            None => "G:unchecked",
        });
    }
    if let Some(bound) = req.max_delay {
        flags.push(match delay {
            Some(d) if d <= bound => "D:ok",
            Some(_) => "D:viol",
            None => "D:unchecked",
        });
    }
    if let Some(bound) = req.max_inorder_delay {
        flags.push(match inorder {
            Some(i) if i <= bound => "I:ok",
            Some(_) => "I:viol",
            // No closed form for in-order delay: needs simulation.
            None => "I:sim",
        });
    }
    flags.join(";")
}

fn join_flags(a: String, b: String) -> String {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b,
        (_, true) => a,
        _ => format!("{a};{b}"),
    }
}

fn choices(exp: &Experiment) -> Vec<Option<usize>> {
    match exp.sweep {
        Some((from, to)) => (from..=to).map(Some).collect(),
        None => vec![None],
    }
}

/// Analytic report: one row per (slicing choice, slice), no simulation.
pub fn cmd_analyze(exp: &Experiment) -> Result<Vec<ReportRow>, CliError> {
    let mut rows = Vec::new();
    for choice in choices(exp) {
        let resolved = match choice {
            Some(i) => exp.slices_for_choice(i)?,
            None => exp.slices.clone(),
        };
        for slice in &resolved {
            let spec = slice.spec(&exp.network)?;
            let (e_d, e_g, extras) = analytic_overlay(&spec, &exp.network)?;
            let req_flags = slice
                .requirement
                .as_ref()
                .map(|r| requirement_flags(r, Some(e_g), Some(e_d), None))
                .unwrap_or_default();
            rows.push(ReportRow {
                slicing_choice: choice,
                analytic_e_d: Some(e_d),
                analytic_e_g: Some(e_g),
                flags: join_flags(extras, req_flags),
                ..ReportRow::empty(slice.name.clone(), spec.protocol().name())
            });
        }
    }
    Ok(rows)
}

fn summary_row(
    choice: Option<usize>,
    slice: &ResolvedSlice,
    spec: &SliceSpec,
    net: &NetworkModel,
    summary: &MetricsSummary,
) -> Result<ReportRow, CliError> {
    let (a_d, a_g, _) = analytic_overlay(spec, net)?;
    let req_flags = slice
        .requirement
        .as_ref()
        .map(|r| {
            requirement_flags(
                r,
                Some(summary.goodput.mean),
                Some(summary.delay.mean),
                Some(summary.inorder_delay.mean),
            )
        })
        .unwrap_or_default();
    Ok(ReportRow {
        slicing_choice: choice,
        e_d: Some(summary.delay.mean),
        e_i: Some(summary.inorder_delay.mean),
        e_g: Some(summary.goodput.mean),
        t_nu: Some(summary.completion.mean),
        ci_d: Some(summary.delay.ci_halfwidth),
        ci_i: Some(summary.inorder_delay.ci_halfwidth),
        ci_g: Some(summary.goodput.ci_halfwidth),
        analytic_e_d: Some(a_d),
        analytic_e_g: Some(a_g),
        flags: req_flags,
        ..ReportRow::empty(slice.name.clone(), spec.protocol().name())
    })
}

/// Simulation report. When `traces` is given, the per-packet trace of trial 0
/// of each slice is appended to it as `(file_name, csv_text)`.
pub fn cmd_simulate(
    exp: &Experiment,
    traces: Option<&mut Vec<(String, String)>>,
) -> Result<Vec<ReportRow>, CliError> {
    let mut rows = Vec::new();
    let mut traces = traces;
    for choice in choices(exp) {
        let scenario = exp.scenario(choice)?;
        let resolved = match choice {
            Some(i) => exp.slices_for_choice(i)?,
            None => exp.slices.clone(),
        };
        for (idx, slice) in resolved.iter().enumerate() {
            let trials = run_slice(&scenario, idx)?;
            let summary = aggregate(&trials)?;
            rows.push(summary_row(
                choice,
                slice,
                &scenario.slices[idx],
                &exp.network,
                &summary,
            )?);
            if let Some(traces) = traces.as_deref_mut() {
                let (_, records) = run_trial_with_trace(&scenario, idx, 0)?;
                let mut csv = String::from("seq,first_tx_slot,delivered_slot,inorder_slot\n");
                for r in &records {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{}",
                        r.seq, r.first_tx_slot, r.delivered_slot, r.inorder_slot
                    );
                }
                let tag = match choice {
                    Some(i) => format!("choice{i}_"),
                    None => String::new(),
                };
                traces.push((format!("trace_{tag}{}.csv", slice.name), csv));
            }
        }
    }
    Ok(rows)
}

/// Planning report: per-application minimum-resource rows, then one row per
/// slice of each feasible partition.
pub fn cmd_plan(exp: &Experiment) -> Result<Vec<ReportRow>, CliError> {
    let net = &exp.network;
    let network_p_bar =
        net.erasure_probs().iter().sum::<f64>() / net.link_count() as f64;
    let mut reqs = Vec::with_capacity(exp.slices.len());
    for slice in &exp.slices {
        let spec = slice.requirement.as_ref().ok_or_else(|| {
            CliError::Config(format!(
                "plan needs a requirement section for slice '{}'",
                slice.name
            ))
        })?;
        reqs.push(spec.attach(slice.template.instantiate(network_p_bar)?));
    }

    let mut rows = Vec::new();
    for (slice, req) in exp.slices.iter().zip(&reqs) {
        let alloc = min_links(req, network_p_bar, net.rtt())?;
        let mut flags = String::new();
        match alloc.links_needed {
            Some(n) if alloc.feasible => {
                let _ = write!(flags, "min_links={n}");
                if net.is_homogeneous() {
                    let _ = write!(flags, ";capacity={}", capacity(net, req)?);
                }
            }
            _ => flags.push_str("infeasible"),
        }
        let _ = write!(flags, ";binding={}", binding_name(alloc.binding_constraint));
        if alloc.requires_simulation {
            flags.push_str(";I:sim");
        }
        rows.push(ReportRow {
            analytic_e_d: alloc.predicted_delay,
            analytic_e_g: alloc.predicted_goodput,
            flags,
            ..ReportRow::empty(format!("{}:min", slice.name), req.protocol.name())
        });
    }

    let plans = plan_partition(net, &reqs, exp.strategy)?;
    if plans.is_empty() {
        rows.push(ReportRow {
            flags: "infeasible".into(),
            ..ReportRow::empty("partition", "-")
        });
        return Ok(rows);
    }
    for plan in &plans {
        for (slice, planned) in exp.slices.iter().zip(&plan.slices) {
            let alloc = &planned.allocation;
            let mut flags = String::from(if alloc.feasible { "feasible" } else { "infeasible" });
            if alloc.requires_simulation {
                flags.push_str(";I:sim");
            }
            rows.push(ReportRow {
                slicing_choice: Some(plan.slicing_choice),
                analytic_e_d: alloc.predicted_delay,
                analytic_e_g: alloc.predicted_goodput,
                flags,
                ..ReportRow::empty(slice.name.clone(), planned.spec.protocol().name())
            });
        }
    }
    Ok(rows)
}

fn binding_name(b: BindingConstraint) -> &'static str {
    match b {
        BindingConstraint::Goodput => "goodput",
        BindingConstraint::Delay => "delay",
        BindingConstraint::Both => "both",
        BindingConstraint::None => "none",
    }
}
