pub mod barometer;
pub mod classify;
pub mod ensemble;
pub mod reproduce;
pub mod simulate;
pub mod solve;

/// `n` evenly spaced points from 0 to `t_max`, both included.
pub(crate) fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
    }
}
