//! Reproducible initial-data generators: seeded random configurations and
//! the ring preset.
//!
//! Randomness uses ChaCha12 keyed by a user seed, so identical seeds produce
//! identical configurations on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::geometry::Vec3;
use crate::pairs::pairs;
use crate::sphere::{Circulations, SphereState};

/// Uniform point on the sphere of radius `r`.
pub fn random_point_on_sphere(rng: &mut ChaCha12Rng, r: f64) -> Vec3 {
    let z = rng.gen_range(-1.0..1.0);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0f64 - z * z).sqrt();
    Vec3::new(r * s * phi.cos(), r * s * phi.sin(), r * z)
}

/// Random non-degenerate configuration: uniform on the sphere, rejecting
/// draws with a chord below 0.3 R (near-collision) or above 1.9 R
/// (near-antipodal, where shape coordinates degenerate).
pub fn random_sphere_state(c: &Circulations, seed: u64) -> SphereState {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = c.n();
    let r = c.radius;
    loop {
        let positions: Vec<Vec3> = (0..n).map(|_| random_point_on_sphere(&mut rng, r)).collect();
        let ok = pairs(n).all(|(i, j)| {
            let chord = (positions[i] - positions[j]).norm();
            chord > 0.3 * r && chord < 1.9 * r
        });
        if ok {
            return SphereState::new(positions);
        }
    }
}

/// Ring of `n` vortices at the given colatitude (angle from the north pole).
pub fn ring_state(n: usize, colatitude: f64, r: f64) -> SphereState {
    let positions = (0..n)
        .map(|k| {
            let az = std::f64::consts::TAU * k as f64 / n as f64;
            Vec3::new(
                r * colatitude.sin() * az.cos(),
                r * colatitude.sin() * az.sin(),
                r * colatitude.cos(),
            )
        })
        .collect();
    SphereState::new(positions)
}

/// Random circulations with magnitudes in `(lo, hi)`; `signs` picks all
/// positive, all negative, or independent random signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPattern {
    AllPositive,
    AllNegative,
    Mixed,
}

pub fn random_circulations(
    n: usize,
    r: f64,
    lo: f64,
    hi: f64,
    signs: SignPattern,
    seed: u64,
) -> Circulations {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let gamma = (0..n)
        .map(|_| {
            let mag = rng.gen_range(lo..hi);
            match signs {
                SignPattern::AllPositive => mag,
                SignPattern::AllNegative => -mag,
                SignPattern::Mixed => {
                    if rng.gen_bool(0.5) {
                        mag
                    } else {
                        -mag
                    }
                }
            }
        })
        .collect();
    Circulations::new(gamma, r).expect("generated circulations are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_states_are_reproducible_and_valid() {
        let c = Circulations::new(vec![1.0, -2.0, 0.5, 3.0], 2.0).unwrap();
        let a = random_sphere_state(&c, 7);
        let b = random_sphere_state(&c, 7);
        assert_eq!(a, b);
        a.validate(&c).unwrap();
        for (i, j) in pairs(4) {
            let chord = (a.positions[i] - a.positions[j]).norm();
            assert!(chord > 0.3 * 2.0 && chord < 1.9 * 2.0);
        }
    }

    #[test]
    fn ring_lies_on_sphere() {
        let s = ring_state(5, 1.0, 3.0);
        for x in &s.positions {
            assert!((x.norm() - 3.0).abs() < 1e-12);
        }
    }
}
