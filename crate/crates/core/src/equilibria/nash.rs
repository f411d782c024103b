use super::game::JointGame;

/// Feasible joint actions where no agent has a feasible unilateral
/// deviation that strictly improves its own payoff. May be empty.
pub fn find_pure_nash(game: &JointGame) -> Vec<usize> {
    (0..game.num_joint())
        .filter(|&j| game.is_feasible(j))
        .filter(|&j| {
            (0..game.num_agents()).all(|agent| {
                let own = game.payoff(agent, j);
                (0..game.actions_per_agent()[agent]).all(|alt| {
                    let k = game.deviate(j, agent, alt);
                    !game.is_feasible(k) || game.payoff(agent, k) <= own
                })
            })
        })
        .collect()
}

/// Joint action reached when every agent best-responds once, in agent order,
/// starting from the all-zero profile. Best responses only consider feasible
/// joint actions and break ties towards the lowest action index. Used when a
/// game has no pure equilibrium.
pub fn sequential_best_response(game: &JointGame) -> usize {
    let start = game.encode(&vec![0; game.num_agents()]);
    let mut joint = if game.is_feasible(start) {
        start
    } else {
        (0..game.num_joint())
            .find(|&j| game.is_feasible(j))
            .expect("game invariant: some joint action is feasible")
    };
    for agent in 0..game.num_agents() {
        let mut best = joint;
        for alt in 0..game.actions_per_agent()[agent] {
            let k = game.deviate(joint, agent, alt);
            if game.is_feasible(k) && game.payoff(agent, k) > game.payoff(agent, best) {
                best = k;
            }
        }
        joint = best;
    }
    joint
}
