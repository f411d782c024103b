//! Packet arrivals, per-UE FIFO queues, HARQ and drop bookkeeping.
//!
//! Time is counted in whole TTIs. A packet's delay splits into queueing
//! (arrival to first transmitted bit), first-attempt transmission, and
//! everything after a failed first attempt (HARQ round trips and
//! retransmission). The three parts add up to
//! `completion - arrival + 1` TTIs exactly.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::agents::SliceKind;

/// 32-byte packets.
pub const PACKET_BITS: f64 = 256.0;

/// Bits below this are treated as fully sent.
const BIT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub id: u64,
    pub ue: usize,
    pub slice: SliceKind,
    pub size_bits: f64,
    pub arrival_tti: u64,
    pub service_start_tti: Option<u64>,
    pub first_attempt_end_tti: Option<u64>,
    pub completion_tti: Option<u64>,
    pub retx_count: u32,
    pub dropped: bool,
    pub residual_bits: f64,
    /// First TTI the packet may be (re)transmitted in.
    pub ready_tti: u64,
}

/// Delay components in TTIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayBreakdown {
    pub queueing: u64,
    pub transmission: u64,
    pub retransmission: u64,
}

impl DelayBreakdown {
    pub fn total(&self) -> u64 {
        self.queueing + self.transmission + self.retransmission
    }
}

impl Packet {
    pub fn new(id: u64, ue: usize, slice: SliceKind, arrival_tti: u64) -> Self {
        Self {
            id,
            ue,
            slice,
            size_bits: PACKET_BITS,
            arrival_tti,
            service_start_tti: None,
            first_attempt_end_tti: None,
            completion_tti: None,
            retx_count: 0,
            dropped: false,
            residual_bits: PACKET_BITS,
            ready_tti: arrival_tti,
        }
    }

    /// Delay components of a delivered packet.
    pub fn delay(&self) -> Option<DelayBreakdown> {
        let done = self.completion_tti?;
        let start = self.service_start_tti?;
        let first = self.first_attempt_end_tti?;
        Some(DelayBreakdown {
            queueing: start - self.arrival_tti,
            transmission: first - start + 1,
            retransmission: done - first,
        })
    }

    /// Time spent waiting rather than being sent, up to the end of `tti`.
    /// Delivered packets report their delay minus the final TTI.
    pub fn waiting_ttis(&self, tti: u64) -> u64 {
        match self.completion_tti {
            Some(done) => done - self.arrival_tti,
            None => tti + 1 - self.arrival_tti,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SourceKind {
    Poisson,
    Cbr,
}

/// One arrival process feeding a slice of a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSource {
    pub kind: SourceKind,
    pub rate_bps: f64,
    accumulator: f64,
    poisson: Option<Poisson<f64>>,
    round_robin: usize,
}

impl TrafficSource {
    pub fn new(kind: SourceKind, rate_bps: f64, tti_s: f64) -> Self {
        let lambda = rate_bps.max(0.0) * tti_s / PACKET_BITS;
        let poisson = match kind {
            SourceKind::Poisson if lambda > 0.0 => Some(Poisson::new(lambda).expect("positive rate")),
            _ => None,
        };
        Self {
            kind,
            rate_bps: rate_bps.max(0.0),
            accumulator: 0.0,
            poisson,
            round_robin: 0,
        }
    }

    /// Mean packets per TTI.
    pub fn mean_per_tti(&self, tti_s: f64) -> f64 {
        self.rate_bps * tti_s / PACKET_BITS
    }

    fn count<R: Rng + ?Sized>(&mut self, tti_s: f64, rng: &mut R) -> usize {
        match self.kind {
            SourceKind::Poisson => self.poisson.map_or(0, |p| p.sample(rng) as usize),
            SourceKind::Cbr => {
                self.accumulator += self.rate_bps * tti_s;
                let n = (self.accumulator / PACKET_BITS).floor();
                self.accumulator -= n * PACKET_BITS;
                n as usize
            }
        }
    }

    /// Packets arriving in `tti`. Poisson packets go to a uniformly random UE,
    /// CBR packets cycle through `ues`.
    pub fn generate<R: Rng + ?Sized>(
        &mut self,
        tti: u64,
        tti_s: f64,
        slice: SliceKind,
        ues: &[usize],
        next_id: &mut u64,
        rng: &mut R,
    ) -> Vec<Packet> {
        let n = self.count(tti_s, rng);
        if ues.is_empty() {
            return Vec::new();
        }
        (0..n)
            .map(|_| {
                let ue = match self.kind {
                    SourceKind::Poisson => ues[rng.random_range(0..ues.len())],
                    SourceKind::Cbr => {
                        let ue = ues[self.round_robin % ues.len()];
                        self.round_robin += 1;
                        ue
                    }
                };
                let p = Packet::new(*next_id, ue, slice, tti);
                *next_id += 1;
                p
            })
            .collect()
    }
}

/// Arrival sources of one slice: URLLC is 80% Poisson and 20% CBR by rate,
/// eMBB is pure Poisson.
pub fn slice_sources(slice: SliceKind, load_mbps: f64, tti_s: f64) -> Vec<TrafficSource> {
    let bps = load_mbps * 1e6;
    match slice {
        SliceKind::Urllc => vec![
            TrafficSource::new(SourceKind::Poisson, 0.8 * bps, tti_s),
            TrafficSource::new(SourceKind::Cbr, 0.2 * bps, tti_s),
        ],
        SliceKind::Embb => vec![TrafficSource::new(SourceKind::Poisson, bps, tti_s)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarqConfig {
    /// Slope of the BLER curve.
    pub bler_slope: f64,
    /// Linear SINR at which every attempt fails.
    pub sinr_min: f64,
    pub rtt_ttis: u64,
    pub max_retx: u32,
}

impl Default for HarqConfig {
    fn default() -> Self {
        Self {
            bler_slope: 0.5,
            sinr_min: 1.0,
            rtt_ttis: 4,
            max_retx: 3,
        }
    }
}

impl HarqConfig {
    /// Error-free link: every attempt succeeds.
    pub fn ideal() -> Self {
        Self {
            bler_slope: f64::INFINITY,
            sinr_min: f64::NEG_INFINITY,
            ..Self::default()
        }
    }

    /// `min(1, exp(-k (sinr - sinr_min)))`.
    pub fn bler(&self, sinr: f64) -> f64 {
        if self.bler_slope.is_infinite() {
            return 0.0;
        }
        (-self.bler_slope * (sinr - self.sinr_min)).exp().min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarqOutcome {
    Success,
    Retransmit,
    Dropped,
}

/// Decode attempt for a packet whose last bits went out in `tti`.
pub fn harq_step<R: Rng + ?Sized>(
    packet: &mut Packet,
    sinr: f64,
    tti: u64,
    config: &HarqConfig,
    rng: &mut R,
) -> HarqOutcome {
    packet.first_attempt_end_tti.get_or_insert(tti);
    let failed = rng.random::<f64>() < config.bler(sinr);
    if !failed {
        packet.completion_tti = Some(tti);
        packet.residual_bits = 0.0;
        return HarqOutcome::Success;
    }
    if packet.retx_count >= config.max_retx {
        packet.dropped = true;
        return HarqOutcome::Dropped;
    }
    packet.retx_count += 1;
    packet.residual_bits = packet.size_bits;
    packet.ready_tti = tti + config.rtt_ttis;
    HarqOutcome::Retransmit
}

/// Per-UE transmission budget for one TTI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeGrant {
    pub ue: usize,
    pub bits: f64,
    /// Effective SINR seen by the HARQ decoder.
    pub sinr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ServeOutcome {
    pub delivered: Vec<Packet>,
    pub dropped: Vec<Packet>,
    /// Bits put on air per grant, in grant order.
    pub bits_sent: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueCounters {
    pub arrivals: u64,
    pub delivered: u64,
    pub dropped_deadline: u64,
    pub dropped_harq: u64,
}

impl QueueCounters {
    pub fn dropped(&self) -> u64 {
        self.dropped_deadline + self.dropped_harq
    }
}

/// FIFO queues of one slice in one cell, one per UE.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceQueue {
    pub slice: SliceKind,
    ue_ids: Vec<usize>,
    queues: Vec<VecDeque<Packet>>,
    pub counters: QueueCounters,
}

impl SliceQueue {
    pub fn new(slice: SliceKind, ue_ids: Vec<usize>) -> Self {
        let queues = vec![VecDeque::new(); ue_ids.len()];
        Self {
            slice,
            ue_ids,
            queues,
            counters: QueueCounters::default(),
        }
    }

    pub fn ue_ids(&self) -> &[usize] {
        &self.ue_ids
    }

    fn local(&self, ue: usize) -> usize {
        self.ue_ids
            .iter()
            .position(|&u| u == ue)
            .unwrap_or_else(|| panic!("UE {ue} does not belong to this queue"))
    }

    pub fn push(&mut self, packet: Packet) {
        let i = self.local(packet.ue);
        self.counters.arrivals += 1;
        self.queues[i].push_back(packet);
    }

    pub fn len(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.queues.iter().all(VecDeque::is_empty)
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.queues.iter().flatten()
    }

    /// Bits that could go on air for `ue` in `tti`.
    pub fn ready_bits(&self, ue: usize, tti: u64) -> f64 {
        self.queues[self.local(ue)]
            .iter()
            .filter(|p| p.ready_tti <= tti)
            .map(|p| p.residual_bits)
            .sum()
    }

    pub fn total_ready_bits(&self, tti: u64) -> f64 {
        self.packets()
            .filter(|p| p.ready_tti <= tti)
            .map(|p| p.residual_bits)
            .sum()
    }

    pub fn has_ready(&self, ue: usize, tti: u64) -> bool {
        self.queues[self.local(ue)].iter().any(|p| p.ready_tti <= tti)
    }

    /// Removes packets older than `budget_ms` at the start of `tti`.
    pub fn drop_expired(&mut self, tti: u64, budget_ms: f64, tti_ms: f64) -> Vec<Packet> {
        let mut out = Vec::new();
        for q in &mut self.queues {
            q.retain(|p| {
                let age_ms = (tti - p.arrival_tti) as f64 * tti_ms;
                if age_ms > budget_ms + 1e-9 {
                    let mut p = p.clone();
                    p.dropped = true;
                    out.push(p);
                    false
                } else {
                    true
                }
            });
        }
        self.counters.dropped_deadline += out.len() as u64;
        out
    }

    /// FIFO service of every grant. Partially sent packets keep their
    /// residual bits; a packet whose last bits go out is decoded by HARQ.
    pub fn serve<R: Rng + ?Sized>(
        &mut self,
        tti: u64,
        grants: &[UeGrant],
        harq: &HarqConfig,
        rng: &mut R,
    ) -> ServeOutcome {
        let mut outcome = ServeOutcome::default();
        for grant in grants {
            let i = self.local(grant.ue);
            let queue = &mut self.queues[i];
            let mut budget = grant.bits.max(0.0);
            let mut sent = 0.0;
            let mut k = 0;
            while k < queue.len() && budget > BIT_EPS {
                let p = &mut queue[k];
                if p.ready_tti > tti {
                    k += 1;
                    continue;
                }
                let chunk = budget.min(p.residual_bits);
                p.service_start_tti.get_or_insert(tti);
                p.residual_bits -= chunk;
                budget -= chunk;
                sent += chunk;
                if p.residual_bits > BIT_EPS {
                    k += 1;
                    continue;
                }
                match harq_step(p, grant.sinr, tti, harq, rng) {
                    HarqOutcome::Success => {
                        let p = queue.remove(k).expect("index in range");
                        self.counters.delivered += 1;
                        outcome.delivered.push(p);
                    }
                    HarqOutcome::Dropped => {
                        let p = queue.remove(k).expect("index in range");
                        self.counters.dropped_harq += 1;
                        outcome.dropped.push(p);
                    }
                    HarqOutcome::Retransmit => k += 1,
                }
            }
            outcome.bits_sent.push(sent);
        }
        outcome
    }

    /// `arrivals == delivered + dropped + queued`.
    pub fn is_conserved(&self) -> bool {
        self.counters.arrivals == self.counters.delivered + self.counters.dropped() + self.len() as u64
    }
}
