//! JSON run configuration: parsing, validation and construction of initial
//! states for each dynamics level.

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use std::path::PathBuf;

use vortexsphere::sample::{random_sphere_state, ring_state};
use vortexsphere::shape::{shape_from_sphere, ShapePoint};
use vortexsphere::sphere::{Circulations, SphereState};
use vortexsphere::stability::tetrahedron_sphere_state;
use vortexsphere::timeint::{IntegratorConfig, Method};
use vortexsphere::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Sphere,
    Lifted,
    Liepoisson,
    Shape,
}

impl Level {
    pub fn name(&self) -> &'static str {
        match self {
            Level::Sphere => "sphere",
            Level::Lifted => "lifted",
            Level::Liepoisson => "liepoisson",
            Level::Shape => "shape",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum Preset {
    Tetrahedron,
    Ring { count: usize, colatitude: f64 },
    Random { seed: u64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeInit {
    pub s: Vec<f64>,
    /// mu values as [re, im] pairs in lexicographic (i, j) order.
    pub mu: Vec<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub positions: Option<Vec<[f64; 3]>>,
    pub shape: Option<ShapeInit>,
    pub preset: Option<Preset>,
}

fn default_t_end() -> f64 {
    10.0
}
fn default_stride() -> usize {
    10
}
fn default_method() -> String {
    "dp54".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_method")]
    pub method: String,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            method: default_method(),
            rtol: None,
            atol: None,
            dt: None,
            t_end: default_t_end(),
            sample_stride: default_stride(),
        }
    }
}

impl IntegratorSpec {
    pub fn to_config(&self) -> Result<IntegratorConfig> {
        let method = match self.method.as_str() {
            "dp54" => {
                if self.dt.is_some() {
                    bail!("field 'integrator.dt' applies to rk4 only");
                }
                Method::Dp54 {
                    rtol: self.rtol.unwrap_or(1e-10),
                    atol: self.atol.unwrap_or(1e-10),
                }
            }
            "rk4" => {
                if self.rtol.is_some() || self.atol.is_some() {
                    bail!("fields 'integrator.rtol'/'integrator.atol' apply to dp54 only");
                }
                Method::Rk4 {
                    dt: self
                        .dt
                        .context("field 'integrator.dt' is required for rk4")?,
                }
            }
            other => bail!("field 'integrator.method' must be 'dp54' or 'rk4', got '{other}'"),
        };
        let cfg = IntegratorConfig {
            method,
            t_end: self.t_end,
            sample_stride: self.sample_stride,
        };
        cfg.validate()
            .map_err(|e| anyhow::anyhow!("field 'integrator': {e}"))?;
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub level: Level,
    pub radius: f64,
    pub circulations: Vec<f64>,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    /// Fiber phases for the lifted level (defaults to zero).
    pub phases: Option<Vec<f64>>,
    /// Input trajectory for the `invariants` verb.
    pub trajectory: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("cannot parse config")?;
        cfg.circulations_checked()?;
        Ok(cfg)
    }

    pub fn circulations_checked(&self) -> Result<Circulations> {
        Circulations::new(self.circulations.clone(), self.radius)
            .map_err(|e| anyhow::anyhow!("fields 'circulations'/'radius': {e}"))
    }

    /// Build the sphere-level initial state from positions or a preset,
    /// projecting near-sphere positions exactly onto the sphere.
    pub fn sphere_initial(&self, c: &Circulations, seed_override: Option<u64>) -> Result<SphereState> {
        if self.initial.shape.is_some() {
            bail!("field 'initial.shape' is only valid for level 'shape'");
        }
        let n = c.n();
        let state = match (&self.initial.positions, &self.initial.preset) {
            (Some(_), Some(_)) => {
                bail!("field 'initial' must give exactly one of positions/shape/preset")
            }
            (Some(pos), None) => {
                if pos.len() != n {
                    bail!(
                        "field 'initial.positions' has {} entries, expected {n}",
                        pos.len()
                    );
                }
                let mut xs = Vec::with_capacity(n);
                for (i, p) in pos.iter().enumerate() {
                    let x = Vec3::new(p[0], p[1], p[2]);
                    let r = x.norm();
                    if (r - c.radius).abs() > 1e-6 * c.radius {
                        bail!(
                            "field 'initial.positions[{i}]' is off the sphere: |x| = {r}, R = {}",
                            c.radius
                        );
                    }
                    xs.push(x * (c.radius / r));
                }
                SphereState::new(xs)
            }
            (None, Some(preset)) => match preset {
                Preset::Tetrahedron => {
                    if n != 4 {
                        bail!("field 'initial.preset': tetrahedron needs 4 circulations, got {n}");
                    }
                    tetrahedron_sphere_state(c.radius)
                }
                Preset::Ring { count, colatitude } => {
                    if *count != n {
                        bail!(
                            "field 'initial.preset.ring.count' is {count}, expected {n} to match circulations"
                        );
                    }
                    ring_state(*count, *colatitude, c.radius)
                }
                Preset::Random { seed } => {
                    random_sphere_state(c, seed_override.unwrap_or(*seed))
                }
            },
            (None, None) => bail!("field 'initial' must give positions, shape or a preset"),
        };
        state
            .validate(c)
            .map_err(|e| anyhow::anyhow!("field 'initial': {e}"))?;
        Ok(state)
    }

    /// Build the shape-level initial point (explicit coordinates or derived
    /// from a sphere configuration).
    pub fn shape_initial(&self, c: &Circulations, seed_override: Option<u64>) -> Result<ShapePoint> {
        if let Some(init) = &self.initial.shape {
            if self.initial.positions.is_some() || self.initial.preset.is_some() {
                bail!("field 'initial' must give exactly one of positions/shape/preset");
            }
            let m = c.n() - 1;
            if init.s.len() != m {
                bail!("field 'initial.shape.s' has {} entries, expected {m}", init.s.len());
            }
            let expected_mu = m * m.saturating_sub(1) / 2;
            if init.mu.len() != expected_mu {
                bail!(
                    "field 'initial.shape.mu' has {} entries, expected {expected_mu}",
                    init.mu.len()
                );
            }
            let zeta = ShapePoint::new(
                init.s.clone(),
                init.mu
                    .iter()
                    .map(|m| vortexsphere::Complex64::new(m[0], m[1]))
                    .collect(),
            );
            zeta.validate()
                .map_err(|e| anyhow::anyhow!("field 'initial.shape': {e}"))?;
            Ok(zeta)
        } else {
            let state = self.sphere_initial(c, seed_override)?;
            shape_from_sphere(&state, c).map_err(|e| anyhow::anyhow!("field 'initial': {e}"))
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub circulations: Vec<f64>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Optional override of the diagonal of D^2 Psi(0).
    pub psi_hessian_diag: Option<[f64; 3]>,
}

fn default_radius() -> f64 {
    1.0
}

impl StabilityConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: StabilityConfig = serde_json::from_str(text).context("cannot parse config")?;
        if cfg.circulations.len() != 4 {
            bail!(
                "field 'circulations' must list exactly 4 values, got {}",
                cfg.circulations.len()
            );
        }
        Ok(cfg)
    }
}
