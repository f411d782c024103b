mod common;

use common::{bimatrix, brute_force_nash, ce_violation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ranslice::agents::{
    build_joint_game, decode_split, embb_reward, is_feasible_split, urllc_reward, JointActionSpace, SliceAgent,
    SliceKind, NUM_ACTIONS,
};
use ranslice::equilibria::{find_pure_nash, min_incentive_slack, solve_correlated_equilibrium, JointGame, LpError};
use ranslice::learning::{epsilon_greedy, ExplorationPolicy, QTable};
use ranslice::radio::{
    dbm_to_watts, group_sinr, link_capacity, ChannelState, RbAllocation, RbGrid, NUM_GROUPS, NUM_RBS,
};
use ranslice::schedulers::{pf_intra_slice, ppf_allocate, PfState};
use ranslice::sim::{Algorithm, SimConfig};
use ranslice::traffic::{HarqConfig, Packet, SliceQueue, UeGrant};

fn payoffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

/// Unmasked two-agent game with 2..=4 actions each.
fn bimatrix_game() -> impl Strategy<Value = JointGame> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(n0, n1)| {
        (payoffs(n0 * n1), payoffs(n0 * n1))
            .prop_map(move |(a, b)| JointGame::unmasked(vec![n0, n1], vec![a, b]).expect("finite payoffs"))
    })
}

/// Two-agent game with some joint actions masked out (at least one kept).
fn masked_game() -> impl Strategy<Value = JointGame> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(n0, n1)| {
        let n = n0 * n1;
        (payoffs(n), payoffs(n), prop::collection::vec(prop::bool::weighted(0.8), n), 0..n).prop_map(
            move |(a, b, mut mask, keep)| {
                mask[keep] = true;
                JointGame::new(vec![n0, n1], vec![a, b], mask).expect("valid game")
            },
        )
    })
}

fn agent(kind: SliceKind, row: &[f64]) -> SliceAgent {
    let mut table = QTable::new(1, NUM_ACTIONS, 0.9, 0.5).unwrap();
    for (a, &v) in row.iter().enumerate() {
        table.set(0, a, v);
    }
    SliceAgent::new(kind, table)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ce_satisfies_obedience_and_dominates_nash(game in masked_game()) {
        let dist = match solve_correlated_equilibrium(&game) {
            Ok(d) => d,
            Err(LpError::Infeasible) => {
                // Every pure Nash profile is a correlated equilibrium.
                prop_assert!(find_pure_nash(&game).is_empty());
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(dist.is_valid_for(&game, 1e-9));
        prop_assert!(min_incentive_slack(&game, &dist) >= -1e-9);
        let welfare = dist.expected_welfare(&game);
        for j in find_pure_nash(&game) {
            prop_assert!(welfare >= game.payoff_sum(j) - 1e-9);
        }
    }

    #[test]
    fn ce_on_unmasked_games_passes_independent_check(game in bimatrix_game()) {
        let dist = solve_correlated_equilibrium(&game).unwrap();
        let (a, b) = bimatrix(&game);
        prop_assert!(ce_violation(&a, &b, dist.probabilities()) <= 1e-9);
    }

    #[test]
    fn payoff_translation_shifts_ce_objective(game in masked_game(), agent in 0usize..2, shift in -5.0f64..5.0) {
        let moved = game.translated(agent, shift);
        let (base, shifted) = match (solve_correlated_equilibrium(&game), solve_correlated_equilibrium(&moved)) {
            (Ok(b), Ok(s)) => (b, s),
            (Err(LpError::Infeasible), Err(LpError::Infeasible)) => return Ok(()),
            (b, s) => return Err(TestCaseError::fail(format!("{b:?} vs {s:?}"))),
        };
        // Same constraint set: each optimum is feasible for the other game.
        prop_assert!(min_incentive_slack(&game, &shifted) >= -1e-9);
        prop_assert!(min_incentive_slack(&moved, &base) >= -1e-9);
        let (w0, w1) = (base.expected_welfare(&game), shifted.expected_welfare(&moved));
        prop_assert!((w1 - (w0 + shift)).abs() <= 1e-8, "{w1} vs {w0} + {shift}");
        // The original optimum stays optimal after the shift.
        prop_assert!((base.expected_welfare(&moved) - w1).abs() <= 1e-8);
    }

    #[test]
    fn ce_solution_is_deterministic(game in masked_game()) {
        let first = solve_correlated_equilibrium(&game);
        let second = solve_correlated_equilibrium(&game.clone());
        prop_assert_eq!(first, second);
    }

    #[test]
    fn nash_matches_double_loop(game in bimatrix_game()) {
        let (a, b) = bimatrix(&game);
        prop_assert_eq!(find_pure_nash(&game), brute_force_nash(&a, &b));
    }

    #[test]
    fn slice_game_ce_support_maximises_separable_welfare(
        q_u in prop::collection::vec(-2.0f64..1.0, NUM_ACTIONS),
        q_e in prop::collection::vec(0.0f64..1.0, NUM_ACTIONS),
    ) {
        let game = build_joint_game(&agent(SliceKind::Urllc, &q_u), &agent(SliceKind::Embb, &q_e));
        let best = (0..game.num_joint())
            .filter(|&j| game.is_feasible(j))
            .map(|j| game.payoff_sum(j))
            .fold(f64::NEG_INFINITY, f64::max);
        let dist = solve_correlated_equilibrium(&game).unwrap();
        let argmax = |row: &[f64]| {
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..row.len()).filter(|&a| row[a] == m).collect::<Vec<_>>()
        };
        let (best_e, best_u) = (argmax(&q_e), argmax(&q_u));
        let product_feasible = best_e.iter().any(|&e| best_u.iter().any(|&u| is_feasible_split(e, u)));
        for j in dist.support(1e-9) {
            let (e, u) = decode_split(j);
            prop_assert!(is_feasible_split(e, u));
            prop_assert!((game.payoff_sum(j) - best).abs() <= 1e-9);
            if product_feasible {
                prop_assert!(best_e.contains(&e) && best_u.contains(&u), "({e},{u}) outside argmax product");
            }
        }
    }

    #[test]
    fn q_update_is_monotone_in_reward(
        init in prop::collection::vec(-3.0f64..3.0, 6),
        alpha in 0.01f64..=1.0,
        gamma in 0.0f64..0.99,
        s in 0usize..3, a in 0usize..2, s2 in 0usize..3,
        r in -5.0f64..5.0, dr in 1e-3f64..5.0,
    ) {
        let mut low = QTable::new(3, 2, alpha, gamma).unwrap();
        for (k, v) in init.iter().enumerate() {
            low.set(k / 2, k % 2, *v);
        }
        let mut high = low.clone();
        let old = low.get(s, a);
        low.update(s, a, r, s2);
        let target = r + gamma * init[2 * s2].max(init[2 * s2 + 1]);
        prop_assert!((low.get(s, a) - ((1.0 - alpha) * old + alpha * target)).abs() <= 1e-12);
        high.update(s, a, r + dr, s2);
        prop_assert!(high.get(s, a) > low.get(s, a));
    }

    #[test]
    fn greedy_selection_depends_only_on_state(
        values in prop::collection::vec(-1.0f64..1.0, 4 * 5),
        seeds in (any::<u64>(), any::<u64>()),
        step in 0u64..10_000,
    ) {
        let mut table = QTable::new(4, 5, 0.5, 0.5).unwrap();
        for (k, v) in values.iter().enumerate() {
            table.set(k / 5, k % 5, *v);
        }
        let policy = ExplorationPolicy::new(0.0, None).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(seeds.0);
        let mut r2 = ChaCha8Rng::seed_from_u64(seeds.1);
        for s in 0..4 {
            let a = epsilon_greedy(&table, s, &policy, step, &mut r1);
            prop_assert_eq!(a, epsilon_greedy(&table, s, &policy, step, &mut r2));
            prop_assert_eq!(a, table.greedy_action(s));
        }
    }

    #[test]
    fn embb_reward_is_increasing_and_bounded(x in 0.0f64..1e3, dx in 1e-3f64..10.0) {
        let (r, r2) = (embb_reward(x), embb_reward(x + dx));
        prop_assert!((0.0..1.0).contains(&r));
        prop_assert!(r2 > r);
    }

    #[test]
    fn urllc_reward_bounds_and_ordering(
        waits in prop::collection::vec(0.0f64..3.0, 1..20),
        extra in 0.0f64..2.0,
        drops in 0usize..5,
        penalty in 0.1f64..3.0,
    ) {
        let r = urllc_reward(&waits, 1.0, drops, penalty);
        prop_assert!(r <= 1.0 && r >= -penalty * drops as f64);
        let mut longer = waits.clone();
        longer[0] += extra;
        prop_assert!(urllc_reward(&longer, 1.0, drops, penalty) <= r);
        prop_assert!(urllc_reward(&waits, 1.0, drops + 1, penalty) < r);
    }

    #[test]
    fn bler_is_a_probability_and_falls_with_sinr(sinr in -1.0f64..1e3, d in 0.0f64..10.0) {
        let h = HarqConfig::default();
        let b = h.bler(sinr);
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!(h.bler(sinr + d) <= b);
    }

    #[test]
    fn ppf_is_monotone_in_backlog(backlog in 0.0f64..1e5, more in 0.0f64..1e5, group_bits in 1.0f64..1e4) {
        let (e1, u1) = ppf_allocate(backlog, group_bits);
        let (e2, u2) = ppf_allocate(backlog + more, group_bits);
        prop_assert_eq!(e1 + u1, NUM_GROUPS);
        prop_assert_eq!(e2 + u2, NUM_GROUPS);
        prop_assert!(u2 >= u1);
    }

    #[test]
    fn pf_only_serves_backlogged_ues(
        groups in prop::collection::btree_set(0usize..NUM_GROUPS, 0..=NUM_GROUPS),
        backlog in prop::collection::vec(any::<bool>(), 6),
        rates in prop::collection::vec(1.0f64..1e6, 6 * NUM_GROUPS),
        averages in prop::collection::vec(1.0f64..1e6, 6),
    ) {
        let groups: Vec<usize> = groups.into_iter().collect();
        let backlogged: Vec<usize> = (0..6).filter(|&u| backlog[u]).collect();
        let mut pf = PfState::new(6, 0.01);
        for (u, &avg) in averages.iter().enumerate() {
            pf.set_average(u, avg);
        }
        let out = pf_intra_slice(&groups, &backlogged, |u, g| rates[u * NUM_GROUPS + g], &pf);
        if backlogged.is_empty() {
            prop_assert!(out.is_empty());
        } else {
            prop_assert_eq!(out.iter().map(|&(g, _)| g).collect::<Vec<_>>(), groups);
            prop_assert!(out.iter().all(|(_, u)| backlogged.contains(u)));
        }
    }

    #[test]
    fn every_split_respects_the_budget(k in 0usize..105) {
        let space = JointActionSpace::default();
        prop_assert_eq!(space.len(), 105);
        let (e, u) = space.pairs()[k];
        prop_assert!(e + u <= NUM_GROUPS);
    }
}

/// Gains for `cells` cells and two UEs per cell, UE `2c`/`2c+1` served by `c`.
fn channels(cells: usize) -> impl Strategy<Value = ChannelState> {
    prop::collection::vec(prop::collection::vec(-140.0f64..-60.0, cells), 2 * cells).prop_map(|db| {
        ChannelState::from_gains(
            db.into_iter()
                .map(|row| row.into_iter().map(|v| 10f64.powf(v / 10.0)).collect())
                .collect(),
        )
    })
}

fn allocation(cells: usize, flags: &[u8]) -> RbAllocation {
    let mut alloc = RbAllocation::new(cells);
    for c in 0..cells {
        for g in 0..NUM_GROUPS {
            match flags[c * NUM_GROUPS + g] % 3 {
                0 => {}
                k => alloc.assign(c, g, 2 * c + k as usize - 1),
            }
        }
    }
    alloc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn capacity_is_additive_over_disjoint_rb_sets(
        ch in channels(3),
        flags in prop::collection::vec(any::<u8>(), 3 * NUM_GROUPS),
        rbs in prop::collection::btree_set(0usize..NUM_RBS, 1..40),
        split in any::<prop::sample::Index>(),
        ue_pick in 0usize..6,
    ) {
        let grid = RbGrid::new(40.0, -174.0);
        let alloc = allocation(3, &flags);
        let rbs: Vec<usize> = rbs.into_iter().collect();
        let cut = split.index(rbs.len() + 1);
        let cell = ue_pick / 2;
        let whole = link_capacity(ue_pick, cell, &rbs, &alloc, &grid, &ch);
        let parts = link_capacity(ue_pick, cell, &rbs[..cut], &alloc, &grid, &ch)
            + link_capacity(ue_pick, cell, &rbs[cut..], &alloc, &grid, &ch);
        prop_assert!((whole - parts).abs() <= 1e-9 * whole.max(1.0));
    }

    #[test]
    fn silencing_an_interferer_never_lowers_sinr(
        ch in channels(4),
        flags in prop::collection::vec(any::<u8>(), 4 * NUM_GROUPS),
        silenced in 0usize..4,
    ) {
        let grid = RbGrid::new(40.0, -174.0);
        let before = allocation(4, &flags).activity();
        let mut after = before.clone();
        after[silenced] = [false; NUM_GROUPS];
        for ue in 0..8 {
            let cell = ue / 2;
            if cell == silenced {
                continue;
            }
            for g in 0..NUM_GROUPS {
                let s0 = group_sinr(ue, cell, g, &before, &grid, &ch);
                let s1 = group_sinr(ue, cell, g, &after, &grid, &ch);
                prop_assert!(s1 >= s0);
            }
        }
    }

    #[test]
    fn radiated_power_never_exceeds_cell_budget(
        flags in prop::collection::vec(any::<u8>(), 2 * NUM_GROUPS),
        tx in 20.0f64..46.0,
    ) {
        let grid = RbGrid::new(tx, -174.0);
        let alloc = allocation(2, &flags);
        for cell in 0..2 {
            let used: usize = (0..NUM_GROUPS)
                .filter(|&g| alloc.owner(cell, g).is_some())
                .map(|g| grid.group_size(g))
                .sum();
            prop_assert!(used as f64 * grid.rb_power_w() <= dbm_to_watts(tx) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn queue_conserves_packets_and_splits_delay_exactly(
        ops in prop::collection::vec((0u8..3, 0usize..3, 0.0f64..800.0, -2.0f64..20.0), 1..200),
        seed in any::<u64>(),
    ) {
        let mut q = SliceQueue::new(SliceKind::Urllc, vec![10, 11, 12]);
        let harq = HarqConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next_id = 0;
        let mut delivered = 0;
        for (tti, (op, ue, bits, sinr)) in ops.into_iter().enumerate() {
            let tti = tti as u64;
            match op {
                0 => {
                    q.push(Packet::new(next_id, 10 + ue, SliceKind::Urllc, tti));
                    next_id += 1;
                }
                1 => {
                    q.drop_expired(tti, 1.0, 0.143);
                }
                _ => {
                    let grant = UeGrant { ue: 10 + ue, bits, sinr };
                    let out = q.serve(tti, &[grant], &harq, &mut rng);
                    prop_assert!(out.bits_sent[0] <= bits + 1e-9);
                    for p in &out.delivered {
                        let d = p.delay().expect("delivered packets have a delay");
                        prop_assert_eq!(d.total(), p.completion_tti.unwrap() - p.arrival_tti + 1);
                        delivered += 1;
                    }
                }
            }
            prop_assert!(q.is_conserved());
        }
        prop_assert_eq!(q.counters.delivered, delivered);
    }

    #[test]
    fn config_text_round_trips(
        alg in 0usize..4,
        seed in any::<u64>(),
        horizon in 10u64..10_000,
        frac in (0.0f64..=1.0, 0.01f64..=1.0),
        loads in (0.0f64..10.0, 0.0f64..10.0),
        learning in (0.001f64..=1.0, 0.0f64..0.999, 0.001f64..=1.0),
        tti_ms in 0.01f64..1.0,
        pf_beta in 0.001f64..=1.0,
    ) {
        let mut cfg = SimConfig {
            algorithm: Algorithm::ALL[alg],
            seed,
            horizon,
            exploration_horizon: (horizon as f64 * frac.0) as u64,
            kpi_window: ((horizon as f64 * frac.1) as u64).max(1),
            tti_ms,
            urllc_load_mbps: loads.0,
            embb_load_mbps: loads.1,
            pf_beta,
            ..SimConfig::default()
        };
        cfg.learning.alpha = learning.0;
        cfg.learning.gamma = learning.1;
        cfg.learning.epsilon = learning.2;
        cfg.validate().unwrap();
        prop_assert_eq!(SimConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }
}
