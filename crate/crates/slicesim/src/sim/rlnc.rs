//! RLNC sender/receiver over a multi-link slice.
//!
//! Information packets are grouped into generations of `generation_size`
//! packets (the final generation may be shorter). Round 1 of a generation
//! sends `ceil(size * fec_rate)` coded packets; the feedback of a round's
//! last packet reports how many degrees of freedom the receiver still misses,
//! and each repair round sends `ceil(fb_rate * m)` more coded packets until
//! the generation decodes. Coded packets are treated as always innovative
//! (large-field assumption): each arrival adds one degree of freedom until
//! the generation holds `size` of them.

use std::collections::VecDeque;

use rand::Rng;

use super::{link_permutation, metrics_from_records, PacketRecord, RlncMode, TrialContext,
            TrialMetrics};
use crate::analytic::{ceil_count, ProtocolConfig};
use crate::SimError;

struct Generation {
    size: u64,
    first_seq: u64,
    first_tx_slot: Option<u64>,
    /// Coded packets still to send in the current round (0 = round done).
    round_remaining: u64,
    /// 1 for the FEC round, 2+ for repair rounds.
    round_index: u32,
    /// Round fully sent, feedback of its last packet not yet acted on.
    awaiting_feedback: bool,
    /// Sender learned the receiver decoded (feedback reported m = 0).
    complete: bool,
    /// Receiver-side degrees of freedom held.
    dof: u64,
    decode_slot: Option<u64>,
}

impl Generation {
    fn decoded(&self) -> bool {
        self.decode_slot.is_some()
    }
}

pub(super) fn simulate(
    ctx: &TrialContext,
    mode: RlncMode,
) -> Result<(TrialMetrics, Vec<PacketRecord>), SimError> {
    let ProtocolConfig::Rlnc {
        generation_size,
        fec_rate,
        fb_rate,
    } = *ctx.slice.protocol()
    else {
        unreachable!("rlnc simulator dispatched for a non-RLNC slice");
    };

    let probs = ctx.link_probs();
    let mut link_rngs = ctx.link_rngs();
    let mut sched_rng = ctx.sched_rng();
    let links = probs.len();
    let half = ctx.net.one_way();
    let rtt = ctx.net.rtt();
    let nu = ctx.nu;

    let mut gens: Vec<Generation> = Vec::new();
    {
        let mut first_seq = 0;
        while first_seq < nu {
            let size = generation_size.min(nu - first_seq);
            gens.push(Generation {
                size,
                first_seq,
                first_tx_slot: None,
                round_remaining: ceil_count(size as f64 * fec_rate),
                round_index: 1,
                awaiting_feedback: false,
                complete: false,
                dof: 0,
                decode_slot: None,
            });
            first_seq += size;
        }
    }
    let gen_count = gens.len();

    let mut records: Vec<PacketRecord> = (0..nu)
        .map(|seq| PacketRecord {
            seq,
            first_tx_slot: 0,
            delivered_slot: 0,
            inorder_slot: 0,
        })
        .collect();

    // (slot, generation) of surviving coded packets.
    let mut arrivals: VecDeque<(u64, usize)> = VecDeque::new();
    // (slot, generation) for the feedback of each round's last packet,
    // actionable one slot after the feedback lands.
    let mut round_feedback: VecDeque<(u64, usize)> = VecDeque::new();

    let mut next_release_gen: usize = 0;
    let mut total_tx: u64 = 0;
    let mut repair_gens: u64 = 0;

    // Generations currently owed a repair round, kept in generation order.
    let mut repair_queue: Vec<usize> = Vec::new();
    // First generation whose FEC round is not fully sent. Round-1 packets go
    // out strictly in generation order, so this only moves forward.
    let mut next_round1: usize = 0;
    // Stop-and-wait gate: generations complete in order in that mode.
    let mut first_incomplete: usize = 0;

    let mut slot: u64 = 0;
    while next_release_gen < gen_count {
        if slot > ctx.max_slots {
            let delivered = gens[..next_release_gen].iter().map(|g| g.size).sum();
            return Err(SimError::SlotCapExceeded {
                cap: ctx.max_slots,
                delivered,
                expected: nu,
            });
        }

        while arrivals.front().is_some_and(|&(s, _)| s == slot) {
            let (_, gi) = arrivals.pop_front().unwrap();
            let gen = &mut gens[gi];
            if gen.dof < gen.size {
                gen.dof += 1;
                if gen.dof == gen.size {
                    gen.decode_slot = Some(slot);
                    for seq in gen.first_seq..gen.first_seq + gen.size {
                        records[seq as usize].delivered_slot = slot;
                    }
                }
            }
            while next_release_gen < gen_count && gens[next_release_gen].decoded() {
                let gen = &gens[next_release_gen];
                for seq in gen.first_seq..gen.first_seq + gen.size {
                    records[seq as usize].inorder_slot = slot;
                }
                next_release_gen += 1;
            }
        }

        while round_feedback.front().is_some_and(|&(s, _)| s == slot) {
            let (_, gi) = round_feedback.pop_front().unwrap();
            let gen = &mut gens[gi];
            gen.awaiting_feedback = false;
            let missing = gen.size - gen.dof;
            if missing == 0 {
                gen.complete = true;
                repair_queue.retain(|&g| g != gi);
            } else {
                if gen.round_index == 1 {
                    repair_gens += 1;
                }
                gen.round_index += 1;
                gen.round_remaining = ceil_count(fb_rate * missing as f64);
                if !repair_queue.contains(&gi) {
                    let pos = repair_queue.partition_point(|&g| g < gi);
                    repair_queue.insert(pos, gi);
                }
            }
        }

        // Fill the links: repair rounds first (lowest generation first), then
        // first rounds in generation order.
        let mut outgoing: Vec<usize> = Vec::with_capacity(links);
        for &gi in &repair_queue {
            if outgoing.len() == links {
                break;
            }
            let gen = &mut gens[gi];
            if gen.round_remaining > 0 {
                push_from_generation(&mut outgoing, gi, gen, links, slot);
            }
        }
        match mode {
            RlncMode::StopAndWait => {
                // Only the lowest sender-incomplete generation may transmit,
                // and only when it is not waiting for feedback.
                while first_incomplete < gen_count && gens[first_incomplete].complete {
                    first_incomplete += 1;
                }
                if first_incomplete < gen_count {
                    let gen = &mut gens[first_incomplete];
                    if gen.round_index == 1 && gen.round_remaining > 0 && outgoing.is_empty() {
                        push_from_generation(&mut outgoing, first_incomplete, gen, links, slot);
                    }
                }
            }
            RlncMode::Pipelined => {
                while next_round1 < gen_count {
                    let gen = &gens[next_round1];
                    if gen.round_index == 1 && gen.round_remaining > 0 {
                        break;
                    }
                    next_round1 += 1;
                }
                for gi in next_round1..gen_count {
                    if outgoing.len() == links {
                        break;
                    }
                    let gen = &mut gens[gi];
                    if gen.round_index == 1 && gen.round_remaining > 0 {
                        push_from_generation(&mut outgoing, gi, gen, links, slot);
                    }
                }
            }
        }

        if !outgoing.is_empty() {
            let perm = link_permutation(&mut sched_rng, links);
            for (i, &gi) in outgoing.iter().enumerate() {
                let link = perm[i];
                total_tx += 1;
                let erased = link_rngs[link].gen::<f64>() < probs[link];
                if !erased {
                    arrivals.push_back((slot + half, gi));
                }
                let gen = &mut gens[gi];
                if gen.round_remaining == 0 && !gen.awaiting_feedback {
                    // Last packet of the round: its feedback reports the
                    // missing degrees of freedom.
                    gen.awaiting_feedback = true;
                    round_feedback.push_back((slot + rtt + 1, gi));
                }
            }
            // Feedback entries were pushed in generation order within the
            // slot; restore slot-monotone order across slots is preserved
            // because all share the same actionable slot.
        }

        slot += 1;
    }

    // Attribute each packet's clock start to its generation's first
    // transmission slot.
    for gen in &gens {
        let first = gen.first_tx_slot.expect("generation never transmitted");
        for seq in gen.first_seq..gen.first_seq + gen.size {
            records[seq as usize].first_tx_slot = first;
        }
    }

    Ok((
        metrics_from_records(&records, links, total_tx, gen_count as u64, repair_gens),
        records,
    ))
}

fn push_from_generation(
    outgoing: &mut Vec<usize>,
    gi: usize,
    gen: &mut Generation,
    links: usize,
    slot: u64,
) {
    while gen.round_remaining > 0 && outgoing.len() < links {
        if gen.first_tx_slot.is_none() {
            gen.first_tx_slot = Some(slot);
        }
        gen.round_remaining -= 1;
        outgoing.push(gi);
    }
}
