//! Geometry, propagation and per-TTI link capacity for a multi-cell downlink
//! with frequency reuse one.
//!
//! All RBs of a group share one link gain (block shadowing, no fast fading),
//! so SINR is evaluated per RB group. Interference on a group comes from every
//! other cell that transmits on the same group in the same TTI.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::agents::SliceKind;

pub const NUM_RBS: usize = 100;
pub const NUM_GROUPS: usize = 13;
pub const SUBCARRIERS_PER_RB: usize = 12;
pub const SUBCARRIER_SPACING_HZ: f64 = 15e3;
pub const RB_BANDWIDTH_HZ: f64 = SUBCARRIERS_PER_RB as f64 * SUBCARRIER_SPACING_HZ;

/// Path loss never uses distances below this, in km.
pub const MIN_DISTANCE_KM: f64 = 0.010;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Macro-cell path loss `128.1 + 37.6 log10(d_km)` in dB.
pub fn path_loss_db(distance_km: f64) -> f64 {
    128.1 + 37.6 * distance_km.max(MIN_DISTANCE_KM).log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub num_cells: usize,
    pub inter_site_m: f64,
    pub cell_radius_m: f64,
    pub embb_ues: usize,
    pub urllc_ues: usize,
    pub tx_power_dbm: f64,
    pub antenna_gain_db: f64,
    pub shadowing_std_db: f64,
    pub noise_density_dbm_hz: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            num_cells: 5,
            inter_site_m: 500.0,
            cell_radius_m: 250.0,
            embb_ues: 5,
            urllc_ues: 10,
            tx_power_dbm: 40.0,
            antenna_gain_db: 15.0,
            shadowing_std_db: 8.0,
            noise_density_dbm_hz: -174.0,
        }
    }
}

/// 100 RBs in 13 groups (twelve of 8 RBs, one of 4) with the cell power
/// spread evenly over RBs.
#[derive(Debug, Clone, PartialEq)]
pub struct RbGrid {
    group_sizes: [usize; NUM_GROUPS],
    rb_power_w: f64,
    noise_per_rb_w: f64,
}

impl RbGrid {
    pub fn new(tx_power_dbm: f64, noise_density_dbm_hz: f64) -> Self {
        let mut group_sizes = [8; NUM_GROUPS];
        group_sizes[NUM_GROUPS - 1] = NUM_RBS - 8 * (NUM_GROUPS - 1);
        Self {
            group_sizes,
            rb_power_w: dbm_to_watts(tx_power_dbm) / NUM_RBS as f64,
            noise_per_rb_w: dbm_to_watts(noise_density_dbm_hz) * RB_BANDWIDTH_HZ,
        }
    }

    pub fn from_params(p: &RadioParams) -> Self {
        Self::new(p.tx_power_dbm, p.noise_density_dbm_hz)
    }

    pub fn group_size(&self, group: usize) -> usize {
        self.group_sizes[group]
    }

    pub fn group_sizes(&self) -> &[usize; NUM_GROUPS] {
        &self.group_sizes
    }

    pub fn group_of_rb(&self, rb: usize) -> usize {
        (rb / 8).min(NUM_GROUPS - 1)
    }

    pub fn rbs_of_group(&self, group: usize) -> std::ops::Range<usize> {
        let start = group * 8;
        start..start + self.group_sizes[group]
    }

    pub fn group_bandwidth_hz(&self, group: usize) -> f64 {
        self.group_sizes[group] as f64 * RB_BANDWIDTH_HZ
    }

    pub fn rb_power_w(&self) -> f64 {
        self.rb_power_w
    }

    pub fn noise_per_rb_w(&self) -> f64 {
        self.noise_per_rb_w
    }

    pub fn total_power_w(&self) -> f64 {
        self.rb_power_w * NUM_RBS as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ue {
    pub id: usize,
    pub cell: usize,
    pub slice: SliceKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    pub gnbs: Vec<(f64, f64)>,
    pub ues: Vec<Ue>,
    /// `slice_ues[cell][slice.index()]` lists global UE ids.
    pub slice_ues: Vec<[Vec<usize>; 2]>,
}

impl NetworkTopology {
    /// gNBs on a line at the inter-site distance; UEs uniform over a disc of
    /// `cell_radius_m` around their site and associated to the nearest gNB.
    pub fn generate<R: Rng + ?Sized>(params: &RadioParams, rng: &mut R) -> Self {
        let gnbs: Vec<(f64, f64)> = (0..params.num_cells)
            .map(|j| (j as f64 * params.inter_site_m, 0.0))
            .collect();
        let r_min = MIN_DISTANCE_KM * 1000.0;
        let r_max = params.cell_radius_m.max(r_min);
        let mut ues = Vec::new();
        for (home, &(gx, gy)) in gnbs.iter().enumerate() {
            for slice in SliceKind::ALL {
                let count = match slice {
                    SliceKind::Urllc => params.urllc_ues,
                    SliceKind::Embb => params.embb_ues,
                };
                for _ in 0..count {
                    let u: f64 = rng.random();
                    let r = (u * (r_max * r_max - r_min * r_min) + r_min * r_min).sqrt();
                    let theta = rng.random::<f64>() * std::f64::consts::TAU;
                    ues.push(Ue {
                        id: ues.len(),
                        cell: home,
                        slice,
                        x: gx + r * theta.cos(),
                        y: gy + r * theta.sin(),
                    });
                }
            }
        }
        for ue in &mut ues {
            ue.cell = nearest(&gnbs, ue.x, ue.y);
        }
        let mut slice_ues = vec![[Vec::new(), Vec::new()]; gnbs.len()];
        for ue in &ues {
            slice_ues[ue.cell][ue.slice.index()].push(ue.id);
        }
        Self {
            gnbs,
            ues,
            slice_ues,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.gnbs.len()
    }

    pub fn distance_km(&self, gnb: usize, ue: usize) -> f64 {
        let (gx, gy) = self.gnbs[gnb];
        let u = &self.ues[ue];
        ((u.x - gx).powi(2) + (u.y - gy).powi(2)).sqrt() / 1000.0
    }

    pub fn ues_of(&self, cell: usize, slice: SliceKind) -> &[usize] {
        &self.slice_ues[cell][slice.index()]
    }
}

fn nearest(gnbs: &[(f64, f64)], x: f64, y: f64) -> usize {
    let d2 = |&(gx, gy): &(f64, f64)| (x - gx).powi(2) + (y - gy).powi(2);
    let mut best = 0;
    for j in 1..gnbs.len() {
        if d2(&gnbs[j]) < d2(&gnbs[best]) {
            best = j;
        }
    }
    best
}

/// Linear link gains from every gNB to every UE, fixed for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    num_cells: usize,
    gain: Vec<f64>,
}

impl ChannelState {
    /// Path loss, one log-normal shadowing draw per link and the combined
    /// antenna gain.
    pub fn generate<R: Rng + ?Sized>(topology: &NetworkTopology, params: &RadioParams, rng: &mut R) -> Self {
        let shadow = Normal::new(0.0, params.shadowing_std_db.max(0.0)).expect("finite std");
        let num_cells = topology.num_cells();
        let mut gain = Vec::with_capacity(topology.ues.len() * num_cells);
        for ue in 0..topology.ues.len() {
            for gnb in 0..num_cells {
                let loss = path_loss_db(topology.distance_km(gnb, ue)) + shadow.sample(rng);
                gain.push(db_to_linear(params.antenna_gain_db - loss));
            }
        }
        Self { num_cells, gain }
    }

    /// Channel with explicit gains, `gains[ue][gnb]`.
    pub fn from_gains(gains: Vec<Vec<f64>>) -> Self {
        let num_cells = gains.first().map_or(0, Vec::len);
        assert!(gains.iter().all(|g| g.len() == num_cells && g.iter().all(|v| v.is_finite() && *v > 0.0)));
        Self {
            num_cells,
            gain: gains.into_iter().flatten().collect(),
        }
    }

    pub fn gain(&self, gnb: usize, ue: usize) -> f64 {
        self.gain[ue * self.num_cells + gnb]
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }
}

/// Which groups each cell transmits on in one TTI.
pub type ActivityMask = Vec<[bool; NUM_GROUPS]>;

/// SINR of `ue` (served by `cell`) on `group` given which groups each cell
/// transmits on.
pub fn group_sinr(
    ue: usize,
    cell: usize,
    group: usize,
    active: &[[bool; NUM_GROUPS]],
    grid: &RbGrid,
    channels: &ChannelState,
) -> f64 {
    let p = grid.rb_power_w();
    let signal = p * channels.gain(cell, ue);
    let interference: f64 = (0..channels.num_cells())
        .filter(|&other| other != cell && active[other][group])
        .map(|other| p * channels.gain(other, ue))
        .sum();
    signal / (grid.noise_per_rb_w() + interference)
}

/// Per-TTI RB ownership: `owners[cell][group]` is the UE served there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RbAllocation {
    owners: Vec<[Option<usize>; NUM_GROUPS]>,
}

impl RbAllocation {
    pub fn new(num_cells: usize) -> Self {
        Self {
            owners: vec![[None; NUM_GROUPS]; num_cells],
        }
    }

    pub fn assign(&mut self, cell: usize, group: usize, ue: usize) {
        self.owners[cell][group] = Some(ue);
    }

    pub fn owner(&self, cell: usize, group: usize) -> Option<usize> {
        self.owners[cell][group]
    }

    pub fn owner_of_rb(&self, cell: usize, rb: usize, grid: &RbGrid) -> Option<usize> {
        self.owners[cell][grid.group_of_rb(rb)]
    }

    pub fn cell_owners(&self, cell: usize) -> &[Option<usize>; NUM_GROUPS] {
        &self.owners[cell]
    }

    pub fn groups_of(&self, cell: usize, ue: usize) -> impl Iterator<Item = usize> + '_ {
        self.owners[cell]
            .iter()
            .enumerate()
            .filter(move |(_, o)| **o == Some(ue))
            .map(|(g, _)| g)
    }

    pub fn activity(&self) -> ActivityMask {
        self.owners
            .iter()
            .map(|row| std::array::from_fn(|g| row[g].is_some()))
            .collect()
    }

    pub fn num_cells(&self) -> usize {
        self.owners.len()
    }
}

/// SINR of `ue` on `rb` under `allocation`, counting only cells that have the
/// same RB allocated.
pub fn sinr(
    ue: usize,
    cell: usize,
    rb: usize,
    allocation: &RbAllocation,
    grid: &RbGrid,
    channels: &ChannelState,
) -> f64 {
    group_sinr(ue, cell, grid.group_of_rb(rb), &allocation.activity(), grid, channels)
}

/// Shannon capacity in bit/s over `rbs`: `sum c_r log2(1 + SINR_r)`.
pub fn link_capacity(
    ue: usize,
    cell: usize,
    rbs: &[usize],
    allocation: &RbAllocation,
    grid: &RbGrid,
    channels: &ChannelState,
) -> f64 {
    let active = allocation.activity();
    rbs.iter()
        .map(|&rb| {
            rb_capacity(group_sinr(ue, cell, grid.group_of_rb(rb), &active, grid, channels))
        })
        .sum()
}

/// Shannon capacity of a single RB at `sinr`, in bit/s.
pub fn rb_capacity(sinr: f64) -> f64 {
    RB_BANDWIDTH_HZ * (1.0 + sinr).log2()
}

/// Capacity of one whole group at a given SINR, in bit/s.
pub fn group_capacity(grid: &RbGrid, group: usize, sinr: f64) -> f64 {
    grid.group_bandwidth_hz(group) * (1.0 + sinr).log2()
}

/// `L / C` in seconds; `None` when nothing can be sent.
pub fn transmission_delay(packet_bits: f64, capacity_bps: f64) -> Option<f64> {
    (capacity_bps > 0.0).then(|| packet_bits / capacity_bps)
}

/// Text dump of sites, UEs and all link gains for reproducibility audits.
pub fn topology_dump(topology: &NetworkTopology, channels: &ChannelState) -> String {
    let mut out = String::new();
    for (j, (x, y)) in topology.gnbs.iter().enumerate() {
        let _ = writeln!(out, "gnb {j} {x:.3} {y:.3}");
    }
    for ue in &topology.ues {
        let _ = write!(out, "ue {} cell {} {} {:.3} {:.3} gain_db", ue.id, ue.cell, ue.slice.name(), ue.x, ue.y);
        for j in 0..topology.num_cells() {
            let _ = write!(out, " {:.4}", linear_to_db(channels.gain(j, ue.id)));
        }
        out.push('\n');
    }
    out
}
