//! Helpers shared by the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use vortexsphere::timeint::TrajectoryRecord;

/// Uniform sample times 0..t_end inclusive.
pub fn uniform_times(t_end: f64, samples: usize) -> Vec<f64> {
    (0..=samples)
        .map(|k| t_end * k as f64 / samples as f64)
        .collect()
}

/// Largest |v(t) - v(0)| over a named monitor series.
pub fn monitor_drift(rec: &TrajectoryRecord, name: &str) -> f64 {
    rec.max_drift(name)
        .unwrap_or_else(|| panic!("monitor {name} missing"))
}

/// Assert drift below `rel` relative to the initial value, with an absolute
/// floor `abs` for invariants whose exact value is zero.
pub fn assert_drift(rec: &TrajectoryRecord, name: &str, rel: f64, abs: f64) {
    let v0 = rec.monitor(name).and_then(|v| v.first().copied()).unwrap();
    let drift = monitor_drift(rec, name);
    let bound = (rel * v0.abs()).max(abs);
    assert!(
        drift <= bound,
        "{name}: drift {drift:.3e} exceeds {bound:.3e} (initial {v0:.6e})"
    );
}

/// Sup-norm distance between two equally sampled state sequences.
pub fn supnorm_states(a: &TrajectoryRecord, b: &TrajectoryRecord) -> f64 {
    assert_eq!(a.times.len(), b.times.len(), "sample counts differ");
    let mut sup = 0.0f64;
    for (ya, yb) in a.states.iter().zip(&b.states) {
        for (x, y) in ya.iter().zip(yb) {
            sup = sup.max((x - y).abs());
        }
    }
    sup
}
