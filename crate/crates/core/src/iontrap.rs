//! Trapped-ion toy dynamics: identical ions repelling through a Coulomb
//! field, pulled to the origin by independent Hooke springs, damped by
//! linear friction against the surrounding medium.
//!
//! The Coulomb field can be truncated by a switching function: `g2` cuts it
//! off with a jump at half the reference edge length, `g4` blends it to zero
//! smoothly. The jump makes the right-hand side discontinuous along
//! trajectories that cross the shell, which is precisely the smoothness
//! failure the convergence diagnostics are meant to expose; the C∞ blend
//! leaves the error expansion intact.

use thiserror::Error;

use crate::exec;
use crate::extrapolation::{ExtrapolationError, SampleSweep};
use crate::integrators::{integrate_endpoint, IntegratorError, Method};
use crate::solvers::{bisect, Bracket, SolverError, DEFAULT_BISECT_MAX_ITER};

/// Largest refinement level accepted by [`kinetic_energy_sweep`]
/// (2²⁴ steps at the deepest level).
pub const KE_SWEEP_K_LIMIT: u32 = 24;

#[derive(Debug, Error)]
pub enum IonTrapError {
    #[error("invalid ion system: {msg}")]
    InvalidSystem { msg: String },
    #[error("ions {i} and {j} are coincident")]
    SingularConfiguration { i: usize, j: usize },
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error("equilibrium solve failed: {0}")]
    Equilibrium(SolverError),
    #[error(transparent)]
    Sweep(#[from] ExtrapolationError),
}

/// A collection of identical ions with trap springs and friction.
#[derive(Debug, Clone)]
pub struct IonSystem {
    pub charge: f64,
    pub coulomb_constant: f64,
    pub spring_k: f64,
    pub friction: f64,
    pub mass: f64,
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    pub t_end: f64,
}

/// Tetrahedron vertex directions (unnormalized).
const TETRA_DIRS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Fixed symmetry-breaking nudges for the default scenario — deterministic
/// stand-ins for "slightly perturbed" starting positions.
const SEED_OFFSETS: [[f64; 3]; 4] = [
    [0.013, -0.021, 0.017],
    [-0.011, 0.019, 0.023],
    [0.021, 0.013, -0.019],
    [-0.017, -0.011, 0.013],
];

impl IonSystem {
    pub fn new(
        charge: f64,
        coulomb_constant: f64,
        spring_k: f64,
        friction: f64,
        mass: f64,
        positions: Vec<[f64; 3]>,
        velocities: Vec<[f64; 3]>,
        t_end: f64,
    ) -> Result<Self, IonTrapError> {
        let invalid = |msg: String| Err(IonTrapError::InvalidSystem { msg });
        if positions.is_empty() {
            return invalid("need at least one ion".into());
        }
        if positions.len() != velocities.len() {
            return invalid(format!(
                "{} positions but {} velocities",
                positions.len(),
                velocities.len()
            ));
        }
        for (name, v) in [
            ("coulomb_constant", coulomb_constant),
            ("spring_k", spring_k),
            ("mass", mass),
            ("t_end", t_end),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(friction.is_finite() && friction >= 0.0) {
            return invalid(format!("friction must be non-negative, got {friction}"));
        }
        if !charge.is_finite() {
            return invalid(format!("charge must be finite, got {charge}"));
        }
        let flat_ok = positions
            .iter()
            .chain(velocities.iter())
            .all(|v3| v3.iter().all(|x| x.is_finite()));
        if !flat_ok {
            return invalid("non-finite position or velocity".into());
        }
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if distance(positions[i], positions[j]) == 0.0 {
                    return Err(IonTrapError::SingularConfiguration { i, j });
                }
            }
        }
        Ok(Self { charge, coulomb_constant, spring_k, friction, mass, positions, velocities, t_end })
    }

    /// The default four-ion scenario: unit charge, Coulomb constant, spring
    /// constant and mass, friction 0.5, simulated to t = 8. The ions start
    /// at rest on a compressed, slightly perturbed tetrahedron (edge 0.45ρ),
    /// so the expansion toward equilibrium crosses the switching shells.
    pub fn default_trap() -> Self {
        let rho = 4.0f64.cbrt(); // equilibrium edge for unit parameters
        let circumradius = 0.45 * rho * (3.0f64 / 8.0).sqrt();
        let norm = 3.0f64.sqrt();
        let positions: Vec<[f64; 3]> = TETRA_DIRS
            .iter()
            .zip(SEED_OFFSETS.iter())
            .map(|(d, o)| {
                [
                    d[0] / norm * circumradius + o[0],
                    d[1] / norm * circumradius + o[1],
                    d[2] / norm * circumradius + o[2],
                ]
            })
            .collect();
        Self {
            charge: 1.0,
            coulomb_constant: 1.0,
            spring_k: 1.0,
            friction: 0.5,
            mass: 1.0,
            positions,
            velocities: vec![[0.0; 3]; 4],
            t_end: 8.0,
        }
    }

    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    /// ½·m·Σ‖v‖² over all ions.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass
            * self
                .velocities
                .iter()
                .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
                .sum::<f64>()
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Switching-function shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwitchingKind {
    /// Untruncated Coulomb field.
    None,
    /// Jump truncation: 1 below 0.5ρ, 0 from 0.5ρ on.
    G2Step,
    /// C∞ mollifier blend: 1 up to 0.5ρ, 0 from 0.95ρ on.
    G4Smooth,
}

impl SwitchingKind {
    pub const ALL: [SwitchingKind; 3] =
        [SwitchingKind::None, SwitchingKind::G2Step, SwitchingKind::G4Smooth];

    pub fn name(self) -> &'static str {
        match self {
            SwitchingKind::None => "none",
            SwitchingKind::G2Step => "g2",
            SwitchingKind::G4Smooth => "g4",
        }
    }
}

impl std::str::FromStr for SwitchingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(SwitchingKind::None),
            "g2" => Ok(SwitchingKind::G2Step),
            "g4" => Ok(SwitchingKind::G4Smooth),
            other => Err(format!("unknown switching function `{other}` (expected none, g2 or g4)")),
        }
    }
}

/// Radial truncation of the pair field, parameterized by the reference edge
/// length ρ.
#[derive(Debug, Clone, Copy)]
pub struct SwitchingFunction {
    pub kind: SwitchingKind,
    pub rho: f64,
}

impl SwitchingFunction {
    pub fn none() -> Self {
        Self { kind: SwitchingKind::None, rho: 1.0 }
    }

    pub fn new(kind: SwitchingKind, rho: f64) -> Self {
        Self { kind, rho }
    }

    /// Multiplier applied to the pair force at separation `r`.
    pub fn value(&self, r: f64) -> f64 {
        match self.kind {
            SwitchingKind::None => 1.0,
            SwitchingKind::G2Step => {
                if r < 0.5 * self.rho {
                    1.0
                } else {
                    0.0
                }
            }
            SwitchingKind::G4Smooth => {
                let s = (r - 0.5 * self.rho) / (0.45 * self.rho);
                if s <= 0.0 {
                    1.0
                } else if s >= 1.0 {
                    0.0
                } else {
                    // Mollifier blend B(s) = φ(1−s)/(φ(s)+φ(1−s)) with
                    // φ(t) = exp(−1/t): flat to all orders at both ends.
                    let phi = |t: f64| (-1.0 / t).exp();
                    phi(1.0 - s) / (phi(s) + phi(1.0 - s))
                }
            }
        }
    }
}

/// Force field of a single ion of charge `q` sitting at the origin,
/// evaluated at displacement `r`: c·q·r/‖r‖³. The force another ion of
/// charge q' feels at that displacement is q'·pair_field(q, c, r).
/// A zero displacement yields non-finite components, which integration
/// surfaces as a stage error.
pub fn pair_field(charge: f64, coulomb_constant: f64, r: [f64; 3]) -> [f64; 3] {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let scale = coulomb_constant * charge / (norm * norm * norm);
    [scale * r[0], scale * r[1], scale * r[2]]
}

/// Accumulate per-ion forces: truncated pairwise Coulomb repulsion plus
/// spring and friction. Positions and velocities are flat `[x0 y0 z0 x1 …]`
/// slices; `out` receives forces in the same layout.
fn accumulate_forces(
    positions: &[f64],
    velocities: &[f64],
    charge: f64,
    coulomb_constant: f64,
    spring_k: f64,
    friction: f64,
    sf: &SwitchingFunction,
    out: &mut [f64],
) {
    let n = positions.len() / 3;
    for j in 0..3 * n {
        out[j] = -spring_k * positions[j] - friction * velocities[j];
    }
    let cq2 = coulomb_constant * charge * charge;
    for i in 0..n {
        for j in i + 1..n {
            let d = [
                positions[3 * i] - positions[3 * j],
                positions[3 * i + 1] - positions[3 * j + 1],
                positions[3 * i + 2] - positions[3 * j + 2],
            ];
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let scale = cq2 / (r * r * r) * sf.value(r);
            for axis in 0..3 {
                let f = scale * d[axis];
                out[3 * i + axis] += f;
                out[3 * j + axis] -= f;
            }
        }
    }
}

/// Per-ion total force at the system's current state.
///
/// Errors on coincident ions; during integration the same singularity is
/// instead caught by the stage finiteness check.
pub fn total_force(system: &IonSystem, sf: &SwitchingFunction) -> Result<Vec<[f64; 3]>, IonTrapError> {
    let n = system.n_ions();
    for i in 0..n {
        for j in i + 1..n {
            if distance(system.positions[i], system.positions[j]) == 0.0 {
                return Err(IonTrapError::SingularConfiguration { i, j });
            }
        }
    }
    let mut pos = Vec::with_capacity(3 * n);
    let mut vel = Vec::with_capacity(3 * n);
    for i in 0..n {
        pos.extend_from_slice(&system.positions[i]);
        vel.extend_from_slice(&system.velocities[i]);
    }
    let mut flat = vec![0.0; 3 * n];
    accumulate_forces(
        &pos,
        &vel,
        system.charge,
        system.coulomb_constant,
        system.spring_k,
        system.friction,
        sf,
        &mut flat,
    );
    Ok((0..n).map(|i| [flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]]).collect())
}

/// Edge length ρ of the regular tetrahedron on which four ions rest when
/// spring pull and Coulomb push cancel. Solved by bisection on the radial
/// force balance of the actual tetrahedral geometry; friction plays no role
/// in the static balance.
pub fn equilibrium_edge(system: &IonSystem) -> Result<f64, IonTrapError> {
    if system.n_ions() != 4 {
        return Err(IonTrapError::InvalidSystem {
            msg: format!("equilibrium edge is defined for 4 ions, got {}", system.n_ions()),
        });
    }
    let cq2 = system.coulomb_constant * system.charge * system.charge;
    if cq2 <= 0.0 {
        return Err(IonTrapError::InvalidSystem {
            msg: "equilibrium needs a repulsive Coulomb term (q ≠ 0)".into(),
        });
    }
    let spring_k = system.spring_k;
    let norm = 3.0f64.sqrt();
    // Net outward radial force on one vertex of a regular tetrahedron with
    // edge d, springs included. Positive while Coulomb wins.
    let imbalance = |d: f64| {
        let circumradius = d * (3.0f64 / 8.0).sqrt();
        let verts: Vec<[f64; 3]> = TETRA_DIRS
            .iter()
            .map(|v| [v[0] / norm * circumradius, v[1] / norm * circumradius, v[2] / norm * circumradius])
            .collect();
        let mut force = [0.0; 3];
        for j in 1..4 {
            let rel = [
                verts[0][0] - verts[j][0],
                verts[0][1] - verts[j][1],
                verts[0][2] - verts[j][2],
            ];
            let f = pair_field(system.charge, system.coulomb_constant, rel);
            force[0] += system.charge * f[0];
            force[1] += system.charge * f[1];
            force[2] += system.charge * f[2];
        }
        for axis in 0..3 {
            force[axis] -= spring_k * verts[0][axis];
        }
        // Radial projection onto the outward vertex direction.
        (force[0] * TETRA_DIRS[0][0] + force[1] * TETRA_DIRS[0][1] + force[2] * TETRA_DIRS[0][2]) / norm
    };
    let bracket = Bracket::new(1e-6, 1e6).map_err(IonTrapError::Equilibrium)?;
    bisect(imbalance, bracket, 1e-13, DEFAULT_BISECT_MAX_ITER).map_err(IonTrapError::Equilibrium)
}

fn pack_state(system: &IonSystem) -> Vec<f64> {
    let n = system.n_ions();
    let mut y = Vec::with_capacity(6 * n);
    for p in &system.positions {
        y.extend_from_slice(p);
    }
    for v in &system.velocities {
        y.extend_from_slice(v);
    }
    y
}

fn rhs<'a>(system: &'a IonSystem, sf: &'a SwitchingFunction) -> impl Fn(f64, &[f64], &mut [f64]) + 'a {
    let n = system.n_ions();
    let inv_mass = 1.0 / system.mass;
    move |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (pos, vel) = y.split_at(3 * n);
        let (dpos, dvel) = dy.split_at_mut(3 * n);
        dpos.copy_from_slice(vel);
        accumulate_forces(
            pos,
            vel,
            system.charge,
            system.coulomb_constant,
            system.spring_k,
            system.friction,
            sf,
            dvel,
        );
        for a in dvel.iter_mut() {
            *a *= inv_mass;
        }
    }
}

/// Integrate the system over `[0, t_end]` in `n_steps` uniform steps and
/// return it with updated positions and velocities.
pub fn evolve(
    system: &IonSystem,
    sf: &SwitchingFunction,
    method: Method,
    n_steps: u64,
) -> Result<IonSystem, IonTrapError> {
    let h = system.t_end / n_steps as f64;
    let y0 = pack_state(system);
    let mut f = rhs(system, sf);
    let y = integrate_endpoint(method, &mut f, 0.0, &y0, h, n_steps)?;
    let n = system.n_ions();
    let mut out = system.clone();
    for i in 0..n {
        out.positions[i] = [y[3 * i], y[3 * i + 1], y[3 * i + 2]];
        out.velocities[i] = [y[3 * n + 3 * i], y[3 * n + 3 * i + 1], y[3 * n + 3 * i + 2]];
    }
    Ok(out)
}

/// End-time kinetic energy at step sizes h_k = t_end/2ᵏ for k in
/// `k_lo..=k_hi`, as a sweep ready for convergence diagnosis.
pub fn kinetic_energy_sweep(
    system: &IonSystem,
    sf: &SwitchingFunction,
    method: Method,
    k_lo: u32,
    k_hi: u32,
    label: &str,
) -> Result<SampleSweep, IonTrapError> {
    if !(k_lo <= k_hi && k_hi <= KE_SWEEP_K_LIMIT) {
        return Err(IonTrapError::InvalidSystem {
            msg: format!("sweep levels must satisfy k_lo ≤ k_hi ≤ {KE_SWEEP_K_LIMIT}, got {k_lo}..={k_hi}"),
        });
    }
    let ks: Vec<u32> = (k_lo..=k_hi).collect();
    let entries = exec::try_ordered_map(ks, |k| {
        let evolved = evolve(system, sf, method, 1u64 << k)?;
        Ok::<(u32, f64), IonTrapError>((k, evolved.kinetic_energy()))
    })?;
    Ok(SampleSweep::new(system.t_end, label, entries)?)
}
