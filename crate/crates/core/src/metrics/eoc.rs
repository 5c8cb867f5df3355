//! Experimental order of convergence from consecutive step norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::IterationTrace;

/// One EOC window over step norms `(s_k, s_{k+1}, s_{k+2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EocWindow {
    pub k: usize,
    /// `max(log s_{k+1}/log s_k, log s_{k+2}/log s_{k+1})`, or `None` when
    /// some norm lies outside (0, 1).
    pub value: Option<f64>,
}

fn admissible(s: f64) -> bool {
    s > 0.0 && s < 1.0
}

/// Every window of three consecutive step norms.
pub fn eoc_windows_from_steps(steps: &[f64]) -> Vec<EocWindow> {
    steps
        .windows(3)
        .enumerate()
        .map(|(k, w)| {
            let value = w.iter().all(|&s| admissible(s)).then(|| {
                let (a, b, c) = (w[0].ln(), w[1].ln(), w[2].ln());
                (b / a).max(c / b)
            });
            EocWindow { k, value }
        })
        .collect()
}

/// EOC at the last admissible window.
pub fn eoc_from_steps(steps: &[f64]) -> Result<f64> {
    eoc_windows_from_steps(steps)
        .iter()
        .rev()
        .find_map(|w| w.value)
        .ok_or(Error::EocUndefined)
}

pub fn eoc(trace: &IterationTrace) -> Result<f64> {
    eoc_from_steps(&trace.step_norms())
}

pub fn eoc_windows(trace: &IterationTrace) -> Vec<EocWindow> {
    eoc_windows_from_steps(&trace.step_norms())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_steps() {
        let e = eoc_from_steps(&[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
        assert!((e - 1.5).abs() < 1e-12);
    }

    #[test]
    fn geometric_steps() {
        let c: f64 = 0.3;
        let steps: Vec<f64> = (1..=6).map(|k| c.powi(k)).collect();
        // the last window starts at exponent k = 4
        let e = eoc_from_steps(&steps).unwrap();
        assert!((e - 5.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_steps() {
        assert_eq!(eoc_from_steps(&[1.0, 1.0, 1.0]), Err(Error::EocUndefined));
        assert_eq!(eoc_from_steps(&[0.1, 0.01]), Err(Error::EocUndefined));
    }

    #[test]
    fn skips_backward_past_zero_steps() {
        let e = eoc_from_steps(&[1e-1, 1e-2, 1e-3, 0.0, 0.0]).unwrap();
        assert!((e - 2.0).abs() < 1e-12);
    }
}
