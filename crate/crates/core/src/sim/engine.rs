//! Per-TTI simulation loop.
//!
//! Every cell hosts its own URLLC/eMBB agent pair (or LRTQ table, or PPF
//! scheduler). Cells interact only through interference on shared groups.
//! URLLC holds the lowest groups of a cell, eMBB the highest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::config::{Algorithm, SimConfig};
use super::kpi::{convergence_tti, DropRate, RunReport, WindowCounts};
use crate::agents::{
    build_joint_game, embb_reward, encode_split, is_feasible_split, observe_state, urllc_reward,
    JointActionSpace, SliceAgent, SliceKind, NUM_ACTIONS,
};
use crate::equilibria::{
    find_pure_nash, sample_joint, sequential_best_response, solve_correlated_equilibrium, LpError,
};
use crate::learning::{ExplorationPolicy, QTable};
use crate::radio::{
    group_capacity, group_sinr, ChannelState, NetworkTopology, RbAllocation, RbGrid, NUM_GROUPS,
};
use crate::schedulers::{lrtq_state, lrtq_step, pf_intra_slice, ppf_allocate, PfState, LRTQ_ACTIONS};
use crate::traffic::{slice_sources, Packet, SliceQueue, TrafficSource, UeGrant};

pub const CONVERGENCE_WINDOW: usize = 100;
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("equilibrium solver failed at TTI {tti}, cell {cell}: {source}")]
    Solver {
        tti: u64,
        cell: usize,
        #[source]
        source: LpError,
    },
    #[error("invariant violated at TTI {tti}: {what}")]
    Invariant { tti: u64, what: String },
    #[error("run with seed {seed} failed: {source}")]
    Run {
        seed: u64,
        #[source]
        source: Box<SimError>,
    },
}

/// Named random streams fanned out from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Topology = 1,
    Shadowing = 2,
    Traffic = 3,
    Exploration = 4,
    Selection = 5,
    Harq = 6,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, Copy)]
enum Pending {
    None,
    Pair {
        urllc: (usize, usize, f64),
        embb: (usize, usize, f64),
    },
    Single(usize, usize, f64),
}

#[derive(Debug, Clone)]
struct Cell {
    queues: [SliceQueue; 2],
    sources: [Vec<TrafficSource>; 2],
    urllc: SliceAgent,
    embb: SliceAgent,
    lrtq: QTable,
    pending: Pending,
}

/// Outcome of one TTI across all cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TtiSummary {
    pub tti: u64,
    /// `(urllc, embb)` queue buckets observed per cell.
    pub states: Vec<(usize, usize)>,
    /// `(embb, urllc)` groups per cell.
    pub splits: Vec<(usize, usize)>,
    pub urllc_reward: Vec<f64>,
    pub embb_reward: Vec<f64>,
    pub explored: Vec<bool>,
}

/// Finished packet for the optional trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub cell: usize,
    pub packet: Packet,
}

#[derive(Debug, Default, Clone)]
struct Collector {
    urllc_latency_ms: Vec<f64>,
    counts: [WindowCounts; 2],
    urllc_reward: Vec<f64>,
    embb_reward: Vec<f64>,
    split_counts: Vec<u64>,
    exploration_steps: u64,
    last_exploration_tti: Option<u64>,
    urllc_queue_sum: u64,
    capacity_bits: [f64; 2],
    sent_bits: [f64; 2],
}

pub struct Simulation {
    config: SimConfig,
    seed: u64,
    tti: u64,
    tti_s: f64,
    grid: RbGrid,
    topology: NetworkTopology,
    channels: ChannelState,
    cells: Vec<Cell>,
    pf: PfState,
    policy: ExplorationPolicy,
    space: JointActionSpace,
    traffic_rng: ChaCha8Rng,
    exploration_rng: ChaCha8Rng,
    selection_rng: ChaCha8Rng,
    harq_rng: ChaCha8Rng,
    next_packet_id: u64,
    collector: Collector,
    trace: Option<Vec<TraceRecord>>,
}

impl Simulation {
    /// `config` must already be validated.
    pub fn new(config: &SimConfig, seed: u64) -> Self {
        let config = config.clone();
        let tti_s = config.tti_ms * 1e-3;
        let grid = RbGrid::from_params(&config.radio);
        let topology = NetworkTopology::generate(&config.radio, &mut stream_rng(seed, Stream::Topology));
        let channels = ChannelState::generate(&topology, &config.radio, &mut stream_rng(seed, Stream::Shadowing));
        let buckets = config.slicing.bucket_edges.num_states();
        let l = &config.learning;
        let agent_table =
            || QTable::new(buckets, NUM_ACTIONS, l.alpha, l.gamma).expect("validated learning parameters");
        let cells = (0..topology.num_cells())
            .map(|c| {
                let urllc_ues = topology.ues_of(c, SliceKind::Urllc).to_vec();
                let embb_ues = topology.ues_of(c, SliceKind::Embb).to_vec();
                Cell {
                    queues: [
                        SliceQueue::new(SliceKind::Urllc, urllc_ues),
                        SliceQueue::new(SliceKind::Embb, embb_ues),
                    ],
                    sources: [
                        slice_sources(SliceKind::Urllc, config.urllc_load_mbps, tti_s),
                        slice_sources(SliceKind::Embb, config.embb_load_mbps, tti_s),
                    ],
                    urllc: SliceAgent::new(SliceKind::Urllc, agent_table()),
                    embb: SliceAgent::new(SliceKind::Embb, agent_table()),
                    lrtq: QTable::new(buckets * buckets, LRTQ_ACTIONS, l.alpha, l.gamma)
                        .expect("validated learning parameters"),
                    pending: Pending::None,
                }
            })
            .collect();
        let policy = ExplorationPolicy::new(l.epsilon, Some(config.exploration_horizon))
            .expect("validated epsilon");
        let pf = PfState::new(topology.ues.len(), config.pf_beta);
        Self {
            tti: 0,
            tti_s,
            grid,
            cells,
            pf,
            policy,
            space: JointActionSpace::default(),
            traffic_rng: stream_rng(seed, Stream::Traffic),
            exploration_rng: stream_rng(seed, Stream::Exploration),
            selection_rng: stream_rng(seed, Stream::Selection),
            harq_rng: stream_rng(seed, Stream::Harq),
            next_packet_id: 0,
            collector: Collector {
                split_counts: vec![0; NUM_ACTIONS * NUM_ACTIONS],
                ..Collector::default()
            },
            trace: None,
            topology,
            channels,
            config,
            seed,
        }
    }

    /// Keep every finished packet for a per-packet trace.
    pub fn record_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    pub fn tti(&self) -> u64 {
        self.tti
    }

    pub fn is_done(&self) -> bool {
        self.tti >= self.config.horizon
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn channels(&self) -> &ChannelState {
        &self.channels
    }

    pub fn grid(&self) -> &RbGrid {
        &self.grid
    }

    /// `(urllc, embb)` agent tables of `cell`.
    pub fn agent_tables(&self, cell: usize) -> (&QTable, &QTable) {
        (&self.cells[cell].urllc.qtable, &self.cells[cell].embb.qtable)
    }

    pub fn lrtq_table(&self, cell: usize) -> &QTable {
        &self.cells[cell].lrtq
    }

    /// `[urllc, embb]` queues of `cell`.
    pub fn queues(&self, cell: usize) -> &[SliceQueue; 2] {
        &self.cells[cell].queues
    }

    fn in_window(&self) -> bool {
        self.tti >= self.config.horizon - self.config.kpi_window
    }

    fn invariant(&self, what: impl Into<String>) -> SimError {
        SimError::Invariant {
            tti: self.tti,
            what: what.into(),
        }
    }

    /// Advance one TTI.
    pub fn step(&mut self) -> Result<TtiSummary, SimError> {
        let t = self.tti;
        let tti_ms = self.config.tti_ms;
        let window = self.in_window();
        let num_cells = self.cells.len();
        let edges = self.config.slicing.bucket_edges.clone();
        let budgets = [self.config.slicing.urllc_budget_ms, self.config.slicing.embb_budget_ms];

        // Arrivals, state observation, deferred Q-updates.
        let mut states = vec![(0usize, 0usize); num_cells];
        for c in 0..num_cells {
            let cell = &mut self.cells[c];
            for s in 0..2 {
                let slice = SliceKind::ALL[s];
                for src in &mut cell.sources[s] {
                    let ues = cell.queues[s].ue_ids().to_vec();
                    for p in src.generate(t, self.tti_s, slice, &ues, &mut self.next_packet_id, &mut self.traffic_rng) {
                        if window {
                            self.collector.counts[s].arrivals += 1;
                        }
                        cell.queues[s].push(p);
                    }
                }
            }
            let s_u = observe_state(cell.queues[0].len(), &edges);
            let s_e = observe_state(cell.queues[1].len(), &edges);
            states[c] = (s_u, s_e);
            match std::mem::replace(&mut cell.pending, Pending::None) {
                Pending::None => {}
                Pending::Pair { urllc, embb } => {
                    cell.urllc.qtable.update(urllc.0, urllc.1, urllc.2, s_u);
                    cell.embb.qtable.update(embb.0, embb.1, embb.2, s_e);
                }
                Pending::Single(s, a, r) => {
                    cell.lrtq.update(s, a, r, lrtq_state(s_u, s_e, edges.num_states()));
                }
            }
            cell.urllc.state = s_u;
            cell.embb.state = s_e;
            if window {
                self.collector.urllc_queue_sum += cell.queues[0].len() as u64;
            }
        }

        // Inter-slice split per cell.
        let mut splits = Vec::with_capacity(num_cells);
        let mut explored = Vec::with_capacity(num_cells);
        let mut lrtq_actions = vec![0usize; num_cells];
        for c in 0..num_cells {
            let (split, did_explore) = self.decide(c, states[c], &mut lrtq_actions[c])?;
            if !is_feasible_split(split.0, split.1) {
                return Err(self.invariant(format!("cell {c} split {split:?} exceeds {NUM_GROUPS} groups")));
            }
            if did_explore {
                self.collector.exploration_steps += 1;
                self.collector.last_exploration_tti = Some(t);
            }
            self.collector.split_counts[encode_split(split.0, split.1)] += 1;
            splits.push(split);
            explored.push(did_explore);
        }

        // Groups actually transmitting: a slice's groups are active when it
        // has something ready to send.
        let slice_groups = |split: (usize, usize), s: usize| -> std::ops::Range<usize> {
            if s == 0 {
                0..split.1
            } else {
                NUM_GROUPS - split.0..NUM_GROUPS
            }
        };
        let backlogged: Vec<[Vec<usize>; 2]> = self
            .cells
            .iter()
            .map(|cell| {
                std::array::from_fn(|s| {
                    let q = &cell.queues[s];
                    q.ue_ids().iter().copied().filter(|&u| q.has_ready(u, t)).collect()
                })
            })
            .collect();
        let mut active = vec![[false; NUM_GROUPS]; num_cells];
        for c in 0..num_cells {
            for s in 0..2 {
                if !backlogged[c][s].is_empty() {
                    for g in slice_groups(splits[c], s) {
                        active[c][g] = true;
                    }
                }
            }
        }

        // PF awards every slice group; each UE then fills its groups in index
        // order until its ready backlog is covered. Groups left without data
        // stay silent and cause no interference.
        let mut allocation = RbAllocation::new(num_cells);
        for c in 0..num_cells {
            for s in 0..2 {
                let groups: Vec<usize> = slice_groups(splits[c], s).collect();
                let (grid, channels) = (&self.grid, &self.channels);
                let rate = |ue: usize, g: usize| group_capacity(grid, g, group_sinr(ue, c, g, &active, grid, channels));
                let awarded = pf_intra_slice(&groups, &backlogged[c][s], rate, &self.pf);
                for &ue in &backlogged[c][s] {
                    let mut need = self.cells[c].queues[s].ready_bits(ue, t);
                    for &(g, owner) in &awarded {
                        if owner == ue && need > 1e-6 {
                            allocation.assign(c, g, ue);
                            need -= rate(ue, g) * self.tti_s;
                        }
                    }
                }
            }
        }
        let transmitting = allocation.activity();

        // Service and rewards.
        let mut urllc_rewards = Vec::with_capacity(num_cells);
        let mut embb_rewards = Vec::with_capacity(num_cells);
        let mut served_bps = vec![0.0; self.topology.ues.len()];
        for c in 0..num_cells {
            let mut harq_drops = [0usize; 2];
            let mut deadline_drops = [0usize; 2];
            let mut delivered_bits = [0.0f64; 2];
            let mut urllc_waits_ms = Vec::new();
            for s in 0..2 {
                let mut grants = Vec::new();
                for &ue in &backlogged[c][s] {
                    let mut capacity_bps = 0.0;
                    let mut bandwidth = 0.0;
                    for g in allocation.groups_of(c, ue) {
                        let sinr = group_sinr(ue, c, g, &transmitting, &self.grid, &self.channels);
                        capacity_bps += group_capacity(&self.grid, g, sinr);
                        bandwidth += self.grid.group_bandwidth_hz(g);
                    }
                    if bandwidth > 0.0 {
                        grants.push(UeGrant {
                            ue,
                            bits: capacity_bps * self.tti_s,
                            sinr: (capacity_bps / bandwidth).exp2() - 1.0,
                        });
                    }
                }
                let cell = &mut self.cells[c];
                let outcome = cell.queues[s].serve(t, &grants, &self.config.harq, &mut self.harq_rng);
                for (grant, &sent) in grants.iter().zip(&outcome.bits_sent) {
                    if sent > grant.bits + 1e-6 {
                        return Err(self.invariant(format!("UE {} sent {sent} bits over a {} bit grant", grant.ue, grant.bits)));
                    }
                    served_bps[grant.ue] = sent / self.tti_s;
                    if window {
                        self.collector.capacity_bits[s] += grant.bits;
                        self.collector.sent_bits[s] += sent;
                    }
                }
                for p in &outcome.delivered {
                    let (Some(d), Some(done)) = (p.delay(), p.completion_tti) else {
                        return Err(self.invariant(format!("packet {} delivered without timestamps", p.id)));
                    };
                    if d.total() != done - p.arrival_tti + 1 {
                        return Err(self.invariant(format!("packet {} delay components {d:?} do not add up", p.id)));
                    }
                    delivered_bits[s] += p.size_bits;
                    if s == 0 {
                        urllc_waits_ms.push(p.waiting_ttis(t) as f64 * tti_ms);
                    }
                    if window {
                        let counts = &mut self.collector.counts[s];
                        counts.delivered += 1;
                        counts.delivered_bits += p.size_bits as u64;
                        if s == 0 {
                            self.collector.urllc_latency_ms.push(d.total() as f64 * tti_ms);
                        }
                    }
                }
                harq_drops[s] = outcome.dropped.len();
                if window {
                    self.collector.counts[s].dropped += outcome.dropped.len() as u64;
                }
                if let Some(trace) = &mut self.trace {
                    trace.extend(
                        outcome
                            .delivered
                            .into_iter()
                            .chain(outcome.dropped)
                            .map(|packet| TraceRecord { cell: c, packet }),
                    );
                }
                // Packets that would be past their deadline at the start of the
                // next TTI are dropped now, so the drop counts against this
                // TTI's split.
                let expired = cell.queues[s].drop_expired(t + 1, budgets[s], tti_ms);
                deadline_drops[s] = expired.len();
                if window {
                    self.collector.counts[s].dropped += expired.len() as u64;
                }
                if let Some(trace) = &mut self.trace {
                    trace.extend(expired.into_iter().map(|packet| TraceRecord { cell: c, packet }));
                }
                if !cell.queues[s].is_conserved() {
                    return Err(self.invariant(format!("cell {c} {} queue lost packets", SliceKind::ALL[s].name())));
                }
            }
            let cell = &mut self.cells[c];
            urllc_waits_ms.extend(cell.queues[0].packets().map(|p| p.waiting_ttis(t) as f64 * tti_ms));
            let r_u = urllc_reward(
                &urllc_waits_ms,
                self.config.slicing.urllc_budget_ms,
                deadline_drops[0] + harq_drops[0],
                self.config.slicing.drop_penalty,
            );
            let r_e = embb_reward(delivered_bits[1] / self.tti_s / 1e6);
            let (s_u, s_e) = states[c];
            cell.pending = match self.config.algorithm {
                Algorithm::Coqra | Algorithm::Nql => Pending::Pair {
                    urllc: (s_u, splits[c].1, r_u),
                    embb: (s_e, splits[c].0, r_e),
                },
                Algorithm::Lrtq => Pending::Single(
                    lrtq_state(s_u, s_e, edges.num_states()),
                    lrtq_actions[c],
                    self.config.lrtq.combine(r_e, r_u),
                ),
                Algorithm::Ppf => Pending::None,
            };
            cell.urllc.last_action = splits[c].1;
            cell.embb.last_action = splits[c].0;
            urllc_rewards.push(r_u);
            embb_rewards.push(r_e);
        }

        for c in 0..num_cells {
            let used = allocation.cell_owners(c).iter().filter(|o| o.is_some()).count();
            if used > splits[c].0 + splits[c].1 {
                return Err(self.invariant(format!("cell {c} uses {used} groups for split {:?}", splits[c])));
            }
        }
        for (ue, &bps) in served_bps.iter().enumerate() {
            self.pf.update(ue, bps);
        }

        let n = num_cells as f64;
        self.collector.urllc_reward.push(urllc_rewards.iter().sum::<f64>() / n);
        self.collector.embb_reward.push(embb_rewards.iter().sum::<f64>() / n);
        self.tti += 1;
        Ok(TtiSummary {
            tti: t,
            states,
            splits,
            urllc_reward: urllc_rewards,
            embb_reward: embb_rewards,
            explored,
        })
    }

    /// `(embb, urllc)` split for `cell` and whether it was an exploration move.
    fn decide(&mut self, c: usize, states: (usize, usize), lrtq_action: &mut usize) -> Result<((usize, usize), bool), SimError> {
        let t = self.tti;
        match self.config.algorithm {
            Algorithm::Coqra | Algorithm::Nql => {
                if self.policy.explore(t, &mut self.exploration_rng) {
                    let pairs = self.space.pairs();
                    let k = self.exploration_rng.random_range(0..pairs.len());
                    return Ok((pairs[k], true));
                }
                let cell = &self.cells[c];
                let game = build_joint_game(&cell.urllc, &cell.embb);
                let joint = if self.config.algorithm == Algorithm::Coqra {
                    let dist = solve_correlated_equilibrium(&game).map_err(|source| SimError::Solver { tti: t, cell: c, source })?;
                    sample_joint(&dist, &mut self.selection_rng)
                } else {
                    let nash = find_pure_nash(&game);
                    if nash.is_empty() {
                        sequential_best_response(&game)
                    } else if nash.len() == 1 {
                        nash[0]
                    } else {
                        nash[self.selection_rng.random_range(0..nash.len())]
                    }
                };
                Ok((crate::agents::decode_split(joint), false))
            }
            Algorithm::Lrtq => {
                let state = lrtq_state(states.0, states.1, self.config.slicing.bucket_edges.num_states());
                let explore = self.policy.explore(t, &mut self.exploration_rng);
                let step_policy = if explore { uniform_policy() } else { ExplorationPolicy::greedy() };
                let (a, split) = lrtq_step(&self.cells[c].lrtq, state, &step_policy, t, &mut self.exploration_rng);
                *lrtq_action = a;
                Ok((split, explore))
            }
            Algorithm::Ppf => {
                let cell = &self.cells[c];
                let q = &cell.queues[0];
                let ready: Vec<usize> = q.ue_ids().iter().copied().filter(|&u| q.has_ready(u, t)).collect();
                let backlog = q.total_ready_bits(t);
                if ready.is_empty() {
                    return Ok((ppf_allocate(0.0, 1.0), false));
                }
                // Worst case: every neighbour transmits on the group.
                let all_active = vec![[true; NUM_GROUPS]; self.cells.len()];
                let mut total = 0.0;
                for &ue in &ready {
                    for g in 0..NUM_GROUPS {
                        let sinr = group_sinr(ue, c, g, &all_active, &self.grid, &self.channels);
                        total += group_capacity(&self.grid, g, sinr) * self.tti_s;
                    }
                }
                let mean_group_bits = total / (ready.len() * NUM_GROUPS) as f64;
                Ok((ppf_allocate(backlog, mean_group_bits), false))
            }
        }
    }

    /// Apply the last pending update and build the run report.
    pub fn finish(mut self) -> RunReport {
        self.complete()
    }

    /// Like [`Simulation::finish`] but keeps the simulation for inspection.
    pub fn complete(&mut self) -> RunReport {
        let edges = self.config.slicing.bucket_edges.clone();
        for cell in &mut self.cells {
            let s_u = observe_state(cell.queues[0].len(), &edges);
            let s_e = observe_state(cell.queues[1].len(), &edges);
            match std::mem::replace(&mut cell.pending, Pending::None) {
                Pending::None => {}
                Pending::Pair { urllc, embb } => {
                    cell.urllc.qtable.update(urllc.0, urllc.1, urllc.2, s_u);
                    cell.embb.qtable.update(embb.0, embb.1, embb.2, s_e);
                }
                Pending::Single(s, a, r) => cell.lrtq.update(s, a, r, lrtq_state(s_u, s_e, edges.num_states())),
            }
        }
        self.report()
    }

    /// Report of the TTIs simulated so far.
    pub fn report(&self) -> RunReport {
        let col = &self.collector;
        let cfg = &self.config;
        let cells = self.cells.len() as f64;
        let window_s = cfg.kpi_window as f64 * self.tti_s;
        let mbps = |bits: u64| bits as f64 / window_s / cells / 1e6;
        let [urllc_counts, embb_counts] = col.counts;
        let reward_trace: Vec<f64> = col
            .urllc_reward
            .iter()
            .zip(&col.embb_reward)
            .map(|(u, e)| u + e)
            .collect();
        let latency = &col.urllc_latency_ms;
        RunReport {
            algorithm: cfg.algorithm.to_string(),
            urllc_load_mbps: cfg.urllc_load_mbps,
            embb_load_mbps: cfg.embb_load_mbps,
            seed: self.seed,
            horizon: cfg.horizon,
            kpi_window: cfg.kpi_window,
            urllc_mean_latency_ms: if latency.is_empty() {
                0.0
            } else {
                latency.iter().sum::<f64>() / latency.len() as f64
            },
            urllc_latency_ms: latency.clone(),
            embb_throughput_mbps: mbps(embb_counts.delivered_bits),
            urllc_throughput_mbps: mbps(urllc_counts.delivered_bits),
            urllc_pdr: DropRate::from_counts(urllc_counts.dropped, urllc_counts.arrivals),
            embb_pdr: DropRate::from_counts(embb_counts.dropped, embb_counts.arrivals),
            pdr: DropRate::from_counts(
                urllc_counts.dropped + embb_counts.dropped,
                urllc_counts.arrivals + embb_counts.arrivals,
            ),
            urllc_counts,
            embb_counts,
            convergence_tti: convergence_tti(&reward_trace, CONVERGENCE_WINDOW, CONVERGENCE_TOLERANCE, cfg.kpi_window as usize),
            urllc_reward_trace: col.urllc_reward.clone(),
            embb_reward_trace: col.embb_reward.clone(),
            reward_trace,
            split_counts: col.split_counts.clone(),
            exploration_steps: col.exploration_steps,
            last_exploration_tti: col.last_exploration_tti,
            mean_urllc_queue: col.urllc_queue_sum as f64 / cfg.kpi_window as f64 / cells,
            embb_capacity_mbps: col.capacity_bits[1] / window_s / cells / 1e6,
            embb_sent_mbps: col.sent_bits[1] / window_s / cells / 1e6,
        }
    }
}

fn uniform_policy() -> ExplorationPolicy {
    ExplorationPolicy::new(1.0, None).expect("epsilon 1 is valid")
}

/// Run one full episode.
pub fn run_episode(config: &SimConfig, seed: u64) -> Result<RunReport, SimError> {
    let mut sim = Simulation::new(config, seed);
    while !sim.is_done() {
        sim.step()?;
    }
    Ok(sim.finish())
}
