//! Wall-clock measurement of repeated solver runs, reduced to median, mean,
//! and sample standard deviation, alongside the bytes the solver keeps
//! resident. Medians are reported first because single-shot outliers from a
//! cold cache or a scheduler hiccup are common at these run lengths.

use std::time::Instant;

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub scheme: String,
    /// Number of repeats measured.
    pub n: usize,
    pub median_s: f64,
    pub mean_s: f64,
    pub std_s: f64,
    /// Bytes held in problem-owned arrays while solving.
    pub bytes: usize,
}

/// Median, mean, and sample standard deviation of a set of timings.
pub fn summarize(times: &[f64]) -> (f64, f64, f64) {
    assert!(!times.is_empty());
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        let var = sorted.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1) as f64;
        var.sqrt()
    };
    (median, mean, std)
}

/// Times `work` for `repeats` full runs. The closure is responsible for
/// resetting whatever state it mutates.
pub fn run_benchmark<F: FnMut()>(scheme: &str, repeats: usize, bytes: usize, mut work: F) -> BenchReport {
    assert!(repeats >= 1);
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        work();
        times.push(start.elapsed().as_secs_f64());
    }
    let (median_s, mean_s, std_s) = summarize(&times);
    BenchReport { scheme: scheme.to_string(), n: repeats, median_s, mean_s, std_s, bytes }
}
