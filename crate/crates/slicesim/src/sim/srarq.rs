//! Selective-repeat ARQ over a multi-link slice.
//!
//! The sender has an unbounded buffer of fresh packets and a FIFO of NACKed
//! sequence numbers. Each slot it fills the slice's links with at most one
//! packet each: retransmissions first (oldest NACK first), then fresh packets
//! in sequence order, assigned to links through a seeded random permutation.
//! The receiver buffers out-of-order packets and releases the maximal
//! in-sequence prefix; duplicate arrivals are ignored.

use std::collections::VecDeque;

use rand::Rng;

use super::{link_permutation, metrics_from_records, PacketRecord, TrialContext, TrialMetrics};
use crate::SimError;

const UNSET: u64 = u64::MAX;

pub(super) fn simulate(ctx: &TrialContext) -> Result<(TrialMetrics, Vec<PacketRecord>), SimError> {
    let probs = ctx.link_probs();
    let mut link_rngs = ctx.link_rngs();
    let mut sched_rng = ctx.sched_rng();
    let links = probs.len();
    let half = ctx.net.one_way();
    let rtt = ctx.net.rtt();
    let nu = ctx.nu;

    let mut records: Vec<PacketRecord> = (0..nu)
        .map(|seq| PacketRecord {
            seq,
            first_tx_slot: UNSET,
            delivered_slot: UNSET,
            inorder_slot: UNSET,
        })
        .collect();

    // (slot, seq); pushed in send order, so slots are monotone.
    let mut arrivals: VecDeque<(u64, u64)> = VecDeque::new();
    // (slot, seq) of NACKs, actionable one slot after the feedback lands.
    let mut nacks: VecDeque<(u64, u64)> = VecDeque::new();

    let mut retx: VecDeque<u64> = VecDeque::new();
    let mut next_fresh: u64 = 0;
    let mut next_release: u64 = 0;
    let mut total_tx: u64 = 0;

    let mut slot: u64 = 0;
    while next_release < nu {
        if slot > ctx.max_slots {
            return Err(SimError::SlotCapExceeded {
                cap: ctx.max_slots,
                delivered: next_release,
                expected: nu,
            });
        }

        while arrivals.front().is_some_and(|&(s, _)| s == slot) {
            let (_, seq) = arrivals.pop_front().unwrap();
            let rec = &mut records[seq as usize];
            if rec.delivered_slot == UNSET {
                rec.delivered_slot = slot;
            }
            while next_release < nu && records[next_release as usize].delivered_slot != UNSET {
                records[next_release as usize].inorder_slot = slot;
                next_release += 1;
            }
        }

        while nacks.front().is_some_and(|&(s, _)| s == slot) {
            let (_, seq) = nacks.pop_front().unwrap();
            retx.push_back(seq);
        }

        // Fill the links: retransmissions first, then fresh packets.
        let mut outgoing: Vec<u64> = Vec::with_capacity(links);
        while outgoing.len() < links {
            if let Some(seq) = retx.pop_front() {
                outgoing.push(seq);
            } else if next_fresh < nu {
                outgoing.push(next_fresh);
                next_fresh += 1;
            } else {
                break;
            }
        }
        if !outgoing.is_empty() {
            let perm = link_permutation(&mut sched_rng, links);
            for (i, &seq) in outgoing.iter().enumerate() {
                let link = perm[i];
                total_tx += 1;
                if records[seq as usize].first_tx_slot == UNSET {
                    records[seq as usize].first_tx_slot = slot;
                }
                let erased = link_rngs[link].gen::<f64>() < probs[link];
                if erased {
                    nacks.push_back((slot + rtt + 1, seq));
                } else {
                    arrivals.push_back((slot + half, seq));
                }
            }
        }

        slot += 1;
    }

    Ok((
        metrics_from_records(&records, links, total_tx, 0, 0),
        records,
    ))
}
