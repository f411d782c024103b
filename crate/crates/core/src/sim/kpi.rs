use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Packet drop rate with an explicit flag for "no arrivals".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropRate {
    pub value: f64,
    pub defined: bool,
}

impl DropRate {
    pub fn from_counts(drops: u64, arrivals: u64) -> Self {
        if arrivals == 0 {
            Self {
                value: 0.0,
                defined: false,
            }
        } else {
            Self {
                value: drops as f64 / arrivals as f64,
                defined: true,
            }
        }
    }
}

/// Per-slice packet counts inside the measurement window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    pub arrivals: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub delivered_bits: u64,
}

/// KPIs of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub urllc_load_mbps: f64,
    pub embb_load_mbps: f64,
    pub seed: u64,
    pub horizon: u64,
    pub kpi_window: u64,
    /// Delay of every URLLC packet delivered inside the window, in ms.
    pub urllc_latency_ms: Vec<f64>,
    pub urllc_mean_latency_ms: f64,
    /// Delivered bits per second per cell.
    pub embb_throughput_mbps: f64,
    pub urllc_throughput_mbps: f64,
    pub urllc_pdr: DropRate,
    pub embb_pdr: DropRate,
    pub pdr: DropRate,
    pub urllc_counts: WindowCounts,
    pub embb_counts: WindowCounts,
    /// Per-TTI rewards averaged over cells.
    pub urllc_reward_trace: Vec<f64>,
    pub embb_reward_trace: Vec<f64>,
    /// Per-TTI system reward (URLLC plus eMBB, averaged over cells).
    pub reward_trace: Vec<f64>,
    pub convergence_tti: u64,
    /// How often each `(embb, urllc)` split was played, indexed by
    /// `embb * 14 + urllc`, over all TTIs and cells.
    pub split_counts: Vec<u64>,
    /// TTI-cell decisions taken by exploration, and the last TTI with one.
    pub exploration_steps: u64,
    pub last_exploration_tti: Option<u64>,
    /// URLLC packets present per cell per TTI, averaged over the window.
    pub mean_urllc_queue: f64,
    /// Granted and used eMBB air capacity per cell in the window.
    pub embb_capacity_mbps: f64,
    pub embb_sent_mbps: f64,
}

impl RunReport {
    /// Scalar metric by name.
    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "urllc_latency_ms" => self.urllc_mean_latency_ms,
            "embb_throughput_mbps" => self.embb_throughput_mbps,
            "urllc_throughput_mbps" => self.urllc_throughput_mbps,
            "pdr" => self.pdr.value,
            "urllc_pdr" => self.urllc_pdr.value,
            "embb_pdr" => self.embb_pdr.value,
            "convergence_tti" => self.convergence_tti as f64,
            _ => return None,
        })
    }
}

pub const SCALAR_METRICS: [&str; 7] = [
    "urllc_latency_ms",
    "embb_throughput_mbps",
    "urllc_throughput_mbps",
    "pdr",
    "urllc_pdr",
    "embb_pdr",
    "convergence_tti",
];

/// Sample mean with a two-sided 95% Student-t half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` when fewer than two samples exist.
    pub ci_half_width: Option<f64>,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        let mean = if n == 0 { 0.0 } else { values.iter().sum::<f64>() / n as f64 };
        let ci_half_width = (n >= 2).then(|| {
            // Deviations about the first sample, so equal samples give exactly zero.
            let shifted: Vec<f64> = values.iter().map(|v| v - values[0]).collect();
            let shift_mean = shifted.iter().sum::<f64>() / n as f64;
            let var = shifted.iter().map(|d| (d - shift_mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            t_quantile_975(n - 1) * (var / n as f64).sqrt()
        });
        Self {
            mean,
            ci_half_width,
            samples: n,
        }
    }

    pub fn ci_low(&self) -> Option<f64> {
        self.ci_half_width.map(|h| self.mean - h)
    }

    pub fn ci_high(&self) -> Option<f64> {
        self.ci_half_width.map(|h| self.mean + h)
    }
}

/// 97.5% quantile of Student's t with `dof` degrees of freedom.
pub fn t_quantile_975(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// First TTI (1-based end of a `window`-long moving average) from which the
/// moving average stays within `tolerance` (relative) of the mean of the last
/// `final_window` values. Returns the trace length if it never settles.
pub fn convergence_tti(trace: &[f64], window: usize, tolerance: f64, final_window: usize) -> u64 {
    let n = trace.len();
    if window == 0 || n < window {
        return n as u64;
    }
    let tail = final_window.clamp(1, n);
    let target = trace[n - tail..].iter().sum::<f64>() / tail as f64;
    let band = tolerance * target.abs();

    let mut sum: f64 = trace[..window].iter().sum();
    let mut averages = Vec::with_capacity(n - window + 1);
    averages.push(sum / window as f64);
    for t in window..n {
        sum += trace[t] - trace[t - window];
        averages.push(sum / window as f64);
    }
    // averages[k] ends at index k + window - 1.
    match averages.iter().rposition(|m| (m - target).abs() > band + 1e-12) {
        None => window as u64,
        Some(k) if k + 1 >= averages.len() => n as u64,
        Some(k) => (k + 1 + window) as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_trace_converges_at_first_window() {
        assert_eq!(convergence_tti(&[0.7; 5000], 100, 0.05, 2000), 100);
    }

    #[test]
    fn step_detected_after_jump() {
        let trace: Vec<f64> = (0..5000).map(|t| if t < 2000 { 0.0 } else { 1.0 }).collect();
        let c = convergence_tti(&trace, 100, 0.05, 2000);
        assert!(c >= 2000);
        // Five percent band: at least 95 of the last 100 values must be 1.
        assert_eq!(c, 2095);
    }

    #[test]
    fn noisy_plateau_change_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let change = 1500;
        let trace: Vec<f64> = (0..5000)
            .map(|t| {
                let level = if t < change { 0.3 } else { 1.0 };
                level + rng.random_range(-0.1..0.1)
            })
            .collect();
        let c = convergence_tti(&trace, 100, 0.05, 2000) as i64;
        assert!((c - change as i64).abs() <= 100, "{c}");
    }

    #[test]
    fn never_settles() {
        // Last 20 average 489.5; the final 100-TTI average is 449.5, outside the band.
        let trace: Vec<f64> = (0..500).map(|t| t as f64).collect();
        assert_eq!(convergence_tti(&trace, 100, 0.05, 20), 500);
    }

    #[test]
    fn estimate_single_sample_has_no_interval() {
        let e = Estimate::from_samples(&[3.0]);
        assert_eq!(e.mean, 3.0);
        assert!(e.ci_half_width.is_none());
    }

    #[test]
    fn estimate_student_t() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        // s = sqrt(5/3), t(3) = 3.182446
        let expected = 3.182_446_305 * (5.0f64 / 3.0 / 4.0).sqrt();
        assert!((e.ci_half_width.unwrap() - expected).abs() < 1e-6);
        let flat = Estimate::from_samples(&[2.0; 10]);
        assert_eq!(flat.ci_half_width, Some(0.0));
    }

    #[test]
    fn drop_rate_flags_no_arrivals() {
        let d = DropRate::from_counts(0, 0);
        assert!(!d.defined);
        assert_eq!(d.value, 0.0);
        assert_eq!(DropRate::from_counts(1, 4).value, 0.25);
    }
}
