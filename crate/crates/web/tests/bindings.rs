use ranslice::sim::{run_episode, SimConfig};
use ranslice_web::{default_config, link, simulate, solve_game};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

const SHORT: &str = "horizon = 400\nexploration_horizon = 200\nkpi_window = 100\nradio.num_cells = 2\nalgorithm = nql\nseed = 4\n";

#[test]
fn simulate_reports_the_same_episode_as_the_library() {
    let out = parse(&simulate(SHORT));
    let cfg = SimConfig::from_text(SHORT).unwrap();
    let r = run_episode(&cfg, 4).unwrap();
    assert_eq!(out["algorithm"], "nql");
    assert_eq!(out["urllc_latency_ms"].as_f64().unwrap(), r.urllc_mean_latency_ms);
    assert_eq!(out["embb_throughput_mbps"].as_f64().unwrap(), r.embb_throughput_mbps);
    let trace = out["reward_trace"].as_array().unwrap();
    assert!(!trace.is_empty() && trace.len() <= 250);
    let splits = out["splits"].as_array().unwrap();
    assert_eq!(splits.len(), 14);
    let total: u64 = splits.iter().flat_map(|row| row.as_array().unwrap()).map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 400 * 2);
}

#[test]
fn default_config_round_trips() {
    assert_eq!(SimConfig::from_text(&default_config()).unwrap(), SimConfig::default());
}

#[test]
fn coordination_game_solution() {
    let out = parse(&solve_game(r#"{"first": [[2,0],[0,1]], "second": [[2,0],[0,1]]}"#));
    assert_eq!(out["welfare"].as_f64().unwrap(), 4.0);
    assert_eq!(out["distribution"][0][0].as_f64().unwrap(), 1.0);
    assert_eq!(out["nash"], serde_json::json!([[0, 0], [1, 1]]));
}

#[test]
fn link_budget_at_reference_point() {
    let out = parse(&link(1.0, 10.0 * 3f64.log10()));
    assert_eq!(out["path_loss_db"].as_f64().unwrap(), 128.1);
    assert!((out["rb_capacity_kbps"].as_f64().unwrap() - 360.0).abs() < 1e-9);
}

#[test]
fn failures_come_back_as_error_objects() {
    for s in [
        simulate("learning.epsilon = 2\n"),
        simulate("nonsense = 1\n"),
        solve_game("{\"first\": [[1]]}"),
        solve_game(r#"{"first": [[1,2]], "second": [[1]]}"#),
        link(-1.0, 0.0),
        link(1.0, f64::NAN),
    ] {
        assert!(parse(&s)["error"].is_string(), "{s}");
    }
}
