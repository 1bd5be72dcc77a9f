//! Invariant-drift tests over t in [0, 10] with the default adaptive
//! integrator: each flow must hold its conserved quantities to 1e-8
//! relative (1e-10 absolute where the exact value is zero).

mod common;

use common::assert_drift;
use vortexsphere::lifted::{momentum_l, LiftedField, LiftedState};
use vortexsphere::liepoisson::{AlgebraPoint, LiePoissonField};
use vortexsphere::sample::random_sphere_state;
use vortexsphere::shape::{shape_from_sphere, ShapeField, ShapePoint};
use vortexsphere::sphere::{radius_projection, Circulations, SphereField};
use vortexsphere::timeint::{integrate, IntegratorConfig, Monitor};

fn circulations(gs: &[f64], r: f64) -> Circulations {
    Circulations::new(gs.to_vec(), r).unwrap()
}

fn gamma_for(n: usize) -> Vec<f64> {
    match n {
        3 => vec![1.0, -2.0, 0.7],
        4 => vec![1.0, 2.0, -0.5, 0.7],
        _ => unreachable!(),
    }
}

#[test]
fn sphere_flow_conserves_h_and_moment() {
    for n in [3usize, 4] {
        let c = circulations(&gamma_for(n), 1.0);
        let state = random_sphere_state(&c, 100 + n as u64);
        let field = SphereField::new(c.clone());
        let cfg = IntegratorConfig {
            sample_stride: 10,
            ..IntegratorConfig::adaptive(10.0)
        };
        let rec = integrate(
            &field,
            &state.to_flat(),
            &cfg,
            &vortexsphere::sphere::monitors(&c),
            None,
        )
        .unwrap();
        assert!(rec.halt.is_none(), "halted: {:?}", rec.halt);
        assert_drift(&rec, "H", 1e-8, 1e-10);
        for a in 1..=3 {
            assert_drift(&rec, &format!("I_{a}"), 1e-8, 1e-10);
        }
    }
}

#[test]
fn sphere_flow_preserves_radius_without_projection() {
    let c = circulations(&gamma_for(3), 1.0);
    let state = random_sphere_state(&c, 7);
    let field = SphereField::new(c.clone());
    let cfg = IntegratorConfig {
        sample_stride: 5,
        ..IntegratorConfig::adaptive(10.0)
    };
    let monitors: Vec<Monitor> = (0..3)
        .map(|i| {
            Monitor::new(format!("r_{i}"), move |y: &[f64]| {
                (y[3 * i] * y[3 * i] + y[3 * i + 1] * y[3 * i + 1] + y[3 * i + 2] * y[3 * i + 2])
                    .sqrt()
            })
        })
        .collect();
    let rec = integrate(&field, &state.to_flat(), &cfg, &monitors, None).unwrap();
    for i in 0..3 {
        assert_drift(&rec, &format!("r_{i}"), 1e-8, 1e-10);
    }

    // with the projection hook the count is reported and the radius pinned
    let rec = integrate(
        &field,
        &state.to_flat(),
        &cfg,
        &monitors,
        Some(&radius_projection(&c)),
    )
    .unwrap();
    for i in 0..3 {
        assert_drift(&rec, &format!("r_{i}"), 1e-10, 1e-10);
    }
}

#[test]
fn lifted_flow_conserves_norms_and_momenta() {
    let c = circulations(&gamma_for(3), 1.0);
    let state = LiftedState::from_sphere(&random_sphere_state(&c, 11), &c).unwrap();
    let field = LiftedField::new(c.clone());
    let cfg = IntegratorConfig {
        sample_stride: 10,
        ..IntegratorConfig::adaptive(10.0)
    };
    let mut monitors = vortexsphere::lifted::monitors(&c);
    // per-column norms (J already covers them up to scale; keep both)
    for i in 0..3 {
        monitors.push(Monitor::new(format!("n_{i}"), move |y: &[f64]| {
            y[4 * i..4 * i + 4].iter().map(|v| v * v).sum::<f64>()
        }));
    }
    let rec = integrate(&field, &state.to_flat(), &cfg, &monitors, None).unwrap();
    assert!(rec.halt.is_none());
    assert_drift(&rec, "H", 1e-8, 1e-10);
    for i in 1..=3 {
        assert_drift(&rec, &format!("J_{i}"), 1e-8, 1e-10);
    }
    for k in 1..=4 {
        assert_drift(&rec, &format!("K_{k}"), 1e-8, 1e-10);
    }
    for i in 0..3 {
        assert_drift(&rec, &format!("n_{i}"), 1e-8, 1e-10);
    }
}

#[test]
fn momentum_l_diagonal_conserved_offdiagonal_not() {
    let c = circulations(&gamma_for(3), 1.0);
    let state = LiftedState::from_sphere(&random_sphere_state(&c, 13), &c).unwrap();
    let field = LiftedField::new(c.clone());
    let cfg = IntegratorConfig {
        sample_stride: 10,
        ..IntegratorConfig::adaptive(10.0)
    };
    let cc = c.clone();
    let monitors = vec![
        Monitor::new("L_diag_0", move |y: &[f64]| {
            momentum_l(&LiftedState::from_flat(y), &cc).diag[0]
        }),
        {
            let cc = c.clone();
            Monitor::new("L_off_01_re", move |y: &[f64]| {
                momentum_l(&LiftedState::from_flat(y), &cc).off[0].re
            })
        },
    ];
    let rec = integrate(&field, &state.to_flat(), &cfg, &monitors, None).unwrap();
    assert_drift(&rec, "L_diag_0", 1e-8, 1e-10);
    let off_drift = common::monitor_drift(&rec, "L_off_01_re");
    assert!(
        off_drift > 1e-3,
        "off-diagonal entries should evolve, drift {off_drift:.3e}"
    );
}

#[test]
fn lie_poisson_flow_conserves_casimirs() {
    for n in [3usize, 4] {
        let c = circulations(&gamma_for(n), 1.0);
        let state = random_sphere_state(&c, 300 + n as u64);
        let lam = momentum_l(&LiftedState::from_sphere(&state, &c).unwrap(), &c);
        let field = LiePoissonField::new(c.clone());
        let cfg = IntegratorConfig {
            sample_stride: 10,
            ..IntegratorConfig::adaptive(10.0)
        };
        let rec = integrate(
            &field,
            &lam.to_flat(),
            &cfg,
            &vortexsphere::liepoisson::monitors(&c),
            None,
        )
        .unwrap();
        assert!(rec.halt.is_none());
        assert_drift(&rec, "h", 1e-8, 1e-10);
        for j in 1..=n {
            assert_drift(&rec, &format!("C{j}"), 1e-8, 1e-10);
        }
        // diagonal coordinates stay at sqrt2
        let last = AlgebraPoint::from_flat(n, rec.states.last().unwrap());
        for d in &last.diag {
            assert!((d - 2.0f64.sqrt()).abs() <= 1e-10);
        }
    }
}

#[test]
fn shape_flow_conserves_h_c2_and_constraints() {
    for n in [3usize, 4] {
        let c = circulations(&gamma_for(n), 1.0);
        let zeta = shape_from_sphere(&random_sphere_state(&c, 400 + n as u64), &c).unwrap();
        let field = ShapeField::new(c.clone());
        let cfg = IntegratorConfig {
            sample_stride: 10,
            ..IntegratorConfig::adaptive(10.0)
        };
        let rec = integrate(
            &field,
            &zeta.to_flat(),
            &cfg,
            &vortexsphere::shape::monitors(&c),
            None,
        )
        .unwrap();
        assert!(rec.halt.is_none(), "halted: {:?}", rec.halt);
        assert_drift(&rec, "H", 1e-8, 1e-10);
        assert_drift(&rec, "C2", 1e-8, 1e-10);
        for m in &rec.monitors {
            if m.name.starts_with("f_") {
                let max = m.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(max <= 1e-8, "{}: |f| reached {max:.3e}", m.name);
            }
        }
        // final point still admissible
        ShapePoint::from_flat(n, rec.states.last().unwrap())
            .validate()
            .unwrap();
    }
}
