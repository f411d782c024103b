mod common;

use common::{bimatrix, brute_force_nash, ce_violation, fixture_games, vertex_enumeration_max};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ranslice::equilibria::{find_pure_nash, solve_correlated_equilibrium, LinearProgram, LpError, Relation};

#[test]
fn fixture_has_1000_games_of_the_right_sizes() {
    let games = fixture_games();
    assert_eq!(games.len(), 1000);
    for g in &games {
        assert_eq!(g.game.num_agents(), 2);
        assert!(g.game.actions_per_agent().iter().all(|&n| (2..=4).contains(&n)));
    }
}

#[test]
fn ce_matches_vertex_enumeration_on_random_games() {
    for (k, fx) in fixture_games().iter().enumerate() {
        let (a, b) = bimatrix(&fx.game);
        let dist = solve_correlated_equilibrium(&fx.game).unwrap_or_else(|e| panic!("game {k}: {e}"));
        let p = dist.probabilities();
        let violation = ce_violation(&a, &b, p);
        assert!(violation <= 1e-9, "game {k}: constraint violated by {violation}");
        let welfare = dist.expected_welfare(&fx.game);
        assert!(
            (welfare - fx.ce_objective).abs() <= 1e-8,
            "game {k}: {welfare} vs {}",
            fx.ce_objective
        );
        if let Some(best_nash) = fx
            .nash
            .iter()
            .map(|&j| fx.game.payoff_sum(j))
            .max_by(f64::total_cmp)
        {
            assert!(welfare >= best_nash - 1e-9, "game {k}: {welfare} < {best_nash}");
        }
    }
}

#[test]
fn nash_enumeration_matches_brute_force() {
    for (k, fx) in fixture_games().iter().enumerate() {
        let (a, b) = bimatrix(&fx.game);
        let found = find_pure_nash(&fx.game);
        assert_eq!(found, brute_force_nash(&a, &b), "game {k}");
        assert_eq!(found, fx.nash, "game {k}");
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> (LinearProgram, Vec<Vec<f64>>, Vec<f64>) {
    let n = rng.random_range(2..=6);
    let m = rng.random_range(1..=5);
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut lp = LinearProgram::new(c);
    let mut a_le = Vec::new();
    let mut b_le = Vec::new();
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rhs = rng.random_range(-0.5..2.0);
        if rng.random_bool(0.3) {
            lp.add_constraint(row.clone(), Relation::Ge, rhs);
            a_le.push(row.iter().map(|v| -v).collect());
            b_le.push(-rhs);
        } else {
            lp.add_constraint(row.clone(), Relation::Le, rhs);
            a_le.push(row);
            b_le.push(rhs);
        }
    }
    // Bounding box keeps the region compact for the oracle.
    lp.add_constraint(vec![1.0; n], Relation::Le, 5.0);
    a_le.push(vec![1.0; n]);
    b_le.push(5.0);
    (lp, a_le, b_le)
}

#[test]
fn simplex_matches_vertex_enumeration_on_random_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut solved, mut infeasible) = (0, 0);
    for k in 0..400 {
        let (lp, a, b) = random_lp(&mut rng);
        let oracle = vertex_enumeration_max(&lp.objective, &a, &b);
        match (lp.solve(), oracle) {
            (Ok(sol), Some(best)) => {
                assert!((sol.objective - best).abs() <= 1e-8, "lp {k}: {} vs {best}", sol.objective);
                assert!(lp.max_violation(&sol.x) <= 1e-9, "lp {k}");
                solved += 1;
            }
            (Err(LpError::Infeasible), None) => infeasible += 1,
            (got, want) => panic!("lp {k}: solver {got:?}, oracle {want:?}"),
        }
    }
    assert!(solved > 200 && infeasible > 0, "{solved} solved, {infeasible} infeasible");
}
