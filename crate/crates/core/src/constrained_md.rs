//! SHAKE: leapfrog integration of bead systems with rigid bond constraints,
//! solved each step by cyclic Gauss–Seidel to a configurable relative
//! tolerance τ.
//!
//! The interesting failure mode lives in τ: the constraint solve injects a
//! computational error of roughly h·τ into every step, and once that error
//! rivals the h² discretization error the method's asymptotic expansion is
//! buried — step refinement stops buying accuracy and convergence
//! diagnostics rightly refuse to certify an asymptotic range. A tight τ
//! keeps the expansion visible; a loose one produces the characteristic
//! oscillating end-time energies.
//!
//! Constraints are squared bond lengths, g_i(q) = ‖q_a − q_b‖² − d_i², the
//! classic SHAKE convention that keeps each scalar solve quadratic.

use std::fmt;

use thiserror::Error;

use crate::exec;
use crate::extrapolation::{ExtrapolationError, SampleSweep};

/// Default cap on Gauss–Seidel sweeps per step.
pub const DEFAULT_MAX_SOLVER_ITER: usize = 500;

/// Constraint tolerance used where the caller does not choose one.
pub const DEFAULT_TAU: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ShakeError {
    #[error("invalid constrained system: {msg}")]
    InvalidSystem { msg: String },
    #[error("invalid SHAKE settings: {msg}")]
    InvalidSettings { msg: String },
    #[error(
        "constraint solver stalled at step {step}: relative residual {residual:.3e} after {sweeps} sweeps"
    )]
    ConstraintFailure { step: u64, residual: f64, sweeps: usize },
    #[error(transparent)]
    Sweep(#[from] ExtrapolationError),
}

/// A rigid bond of fixed length between beads `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

type ForceFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type PotentialFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Beads, bonds, a smooth external force field, and a consistent initial
/// state. Positions and velocities are flat `[x0 y0 z0 x1 …]` vectors.
pub struct ConstrainedSystem {
    masses: Vec<f64>,
    bonds: Vec<Bond>,
    q0: Vec<f64>,
    v0: Vec<f64>,
    t_end: f64,
    force: ForceFn,
    potential: PotentialFn,
}

impl fmt::Debug for ConstrainedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstrainedSystem")
            .field("masses", &self.masses)
            .field("bonds", &self.bonds)
            .field("q0", &self.q0)
            .field("v0", &self.v0)
            .field("t_end", &self.t_end)
            .finish_non_exhaustive()
    }
}

/// How nearly the initial state must satisfy the constraints and their
/// velocity-level counterpart.
const CONSISTENCY_TOL: f64 = 1e-9;

impl ConstrainedSystem {
    pub fn new(
        masses: Vec<f64>,
        bonds: Vec<Bond>,
        q0: Vec<f64>,
        v0: Vec<f64>,
        t_end: f64,
        force: ForceFn,
        potential: PotentialFn,
    ) -> Result<Self, ShakeError> {
        let invalid = |msg: String| Err(ShakeError::InvalidSystem { msg });
        let n = masses.len();
        if n == 0 {
            return invalid("need at least one bead".into());
        }
        if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return invalid("masses must be positive and finite".into());
        }
        if q0.len() != 3 * n || v0.len() != 3 * n {
            return invalid(format!(
                "state length mismatch: {n} beads need {} coordinates, got q0: {}, v0: {}",
                3 * n,
                q0.len(),
                v0.len()
            ));
        }
        if q0.iter().chain(v0.iter()).any(|x| !x.is_finite()) {
            return invalid("non-finite initial state".into());
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return invalid(format!("t_end must be positive, got {t_end}"));
        }
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a >= n || bond.b >= n || bond.a == bond.b {
                return invalid(format!("bond {i} connects invalid beads {}–{}", bond.a, bond.b));
            }
            if !(bond.length.is_finite() && bond.length > 0.0) {
                return invalid(format!("bond {i} has non-positive length {}", bond.length));
            }
        }
        let sys = Self { masses, bonds, q0, v0, t_end, force, potential };
        for (i, bond) in sys.bonds.iter().enumerate() {
            let sigma = sys.bond_residual(&sys.q0, bond);
            let scale = bond.length * bond.length;
            if sigma.abs() > CONSISTENCY_TOL * scale.max(1.0) {
                return Err(ShakeError::InvalidSystem {
                    msg: format!("initial state violates constraint {i}: residual {sigma:e}"),
                });
            }
            let r = bond_vector(&sys.q0, bond);
            let dv = [
                sys.v0[3 * bond.a] - sys.v0[3 * bond.b],
                sys.v0[3 * bond.a + 1] - sys.v0[3 * bond.b + 1],
                sys.v0[3 * bond.a + 2] - sys.v0[3 * bond.b + 2],
            ];
            let gdot = 2.0 * (r[0] * dv[0] + r[1] * dv[1] + r[2] * dv[2]);
            if gdot.abs() > CONSISTENCY_TOL * scale.max(1.0) {
                return Err(ShakeError::InvalidSystem {
                    msg: format!("initial velocities violate constraint {i}: d/dt g = {gdot:e}"),
                });
            }
        }
        Ok(sys)
    }

    /// The default toy: four unit-mass beads joined by three unit bonds in a
    /// bent chain, each bead in a quartic well `U = ½‖q‖² + ¼‖q‖⁴`, started
    /// in rigid rotation (ω = (0, 0.15, 0.4)) so it carries angular momentum
    /// while satisfying both constraint levels exactly, simulated to t = 4.
    pub fn quartic_chain() -> Self {
        let beads: [[f64; 3]; 4] = [
            [0.0, 0.0, 0.0],
            [0.6, 0.8, 0.0],
            [1.6, 0.8, 0.0],
            [2.2, 0.0, 0.0],
        ];
        let omega = [0.0, 0.15, 0.4];
        let mut q0 = Vec::with_capacity(12);
        let mut v0 = Vec::with_capacity(12);
        for p in beads {
            q0.extend_from_slice(&p);
            v0.extend_from_slice(&[
                omega[1] * p[2] - omega[2] * p[1],
                omega[2] * p[0] - omega[0] * p[2],
                omega[0] * p[1] - omega[1] * p[0],
            ]);
        }
        let bonds = vec![
            Bond { a: 0, b: 1, length: 1.0 },
            Bond { a: 1, b: 2, length: 1.0 },
            Bond { a: 2, b: 3, length: 1.0 },
        ];
        let force: ForceFn = Box::new(|q, out| {
            for j in 0..q.len() / 3 {
                let u = &q[3 * j..3 * j + 3];
                let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
                let s = -(1.0 + r2);
                out[3 * j] = s * u[0];
                out[3 * j + 1] = s * u[1];
                out[3 * j + 2] = s * u[2];
            }
        });
        let potential: PotentialFn = Box::new(|q| {
            let mut u_total = 0.0;
            for j in 0..q.len() / 3 {
                let u = &q[3 * j..3 * j + 3];
                let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
                u_total += 0.5 * r2 + 0.25 * r2 * r2;
            }
            u_total
        });
        Self::new(vec![1.0; 4], bonds, q0, v0, 4.0, force, potential)
            .expect("built-in toy system must be consistent")
    }

    pub fn n_beads(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn initial_positions(&self) -> &[f64] {
        &self.q0
    }

    pub fn initial_velocities(&self) -> &[f64] {
        &self.v0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn force_into(&self, q: &[f64], out: &mut [f64]) {
        (self.force)(q, out);
    }

    pub fn potential_at(&self, q: &[f64]) -> f64 {
        (self.potential)(q)
    }

    fn bond_residual(&self, q: &[f64], bond: &Bond) -> f64 {
        let r = bond_vector(q, bond);
        r[0] * r[0] + r[1] * r[1] + r[2] * r[2] - bond.length * bond.length
    }

    /// σ_i = ‖q_a − q_b‖² − d_i² for every bond.
    pub fn constraint_residuals(&self, q: &[f64]) -> Vec<f64> {
        self.bonds.iter().map(|b| self.bond_residual(q, b)).collect()
    }

    /// max_i |σ_i| / max(1, d_i²) — the quantity compared against τ.
    pub fn max_relative_residual(&self, q: &[f64]) -> f64 {
        self.bonds
            .iter()
            .map(|b| self.bond_residual(q, b).abs() / (b.length * b.length).max(1.0))
            .fold(0.0, f64::max)
    }

    /// ½·Σ m_j‖v_j‖² for a flat velocity vector.
    pub fn kinetic_energy(&self, v: &[f64]) -> f64 {
        let mut ke = 0.0;
        for (j, m) in self.masses.iter().enumerate() {
            let vj = &v[3 * j..3 * j + 3];
            ke += 0.5 * m * (vj[0] * vj[0] + vj[1] * vj[1] + vj[2] * vj[2]);
        }
        ke
    }
}

fn bond_vector(q: &[f64], bond: &Bond) -> [f64; 3] {
    [
        q[3 * bond.a] - q[3 * bond.b],
        q[3 * bond.a + 1] - q[3 * bond.b + 1],
        q[3 * bond.a + 2] - q[3 * bond.b + 2],
    ]
}

/// Numerical parameters of the SHAKE update.
#[derive(Debug, Clone, Copy)]
pub struct ShakeSettings {
    pub h: f64,
    pub tau: f64,
    pub max_solver_iter: usize,
}

impl ShakeSettings {
    pub fn new(h: f64, tau: f64, max_solver_iter: usize) -> Result<Self, ShakeError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(ShakeError::InvalidSettings { msg: format!("step must be positive, got {h}") });
        }
        if !(tau.is_finite() && tau > 0.0 && tau < 1.0) {
            return Err(ShakeError::InvalidSettings {
                msg: format!("tau must lie in (0, 1), got {tau}"),
            });
        }
        if max_solver_iter == 0 {
            return Err(ShakeError::InvalidSettings { msg: "max_solver_iter must be ≥ 1".into() });
        }
        Ok(Self { h, tau, max_solver_iter })
    }
}

/// Cyclic Gauss–Seidel over the bonds: each pass linearizes every constraint
/// around the reference geometry and corrects along the reference bond
/// direction (which is what makes the accumulated multipliers Lagrange
/// multipliers of G(q_ref)). `q` holds the trial positions on entry and the
/// constrained positions on success. On failure the pair is the residual
/// reached and the sweeps spent.
fn gauss_seidel(
    system: &ConstrainedSystem,
    q: &mut [f64],
    q_ref: &[f64],
    tau: f64,
    max_iter: usize,
    gammas: &mut [f64],
) -> Result<(f64, usize), (f64, usize)> {
    gammas.fill(0.0);
    let mut residual = system.max_relative_residual(q);
    let mut sweeps = 0;
    while residual > tau {
        if sweeps >= max_iter || !residual.is_finite() {
            return Err((residual, sweeps));
        }
        for (i, bond) in system.bonds.iter().enumerate() {
            let r_cur = bond_vector(q, bond);
            let sigma = r_cur[0] * r_cur[0] + r_cur[1] * r_cur[1] + r_cur[2] * r_cur[2]
                - bond.length * bond.length;
            let r_ref = bond_vector(q_ref, bond);
            let inv_mab = 1.0 / system.masses[bond.a] + 1.0 / system.masses[bond.b];
            let den =
                4.0 * inv_mab * (r_cur[0] * r_ref[0] + r_cur[1] * r_ref[1] + r_cur[2] * r_ref[2]);
            let g = sigma / den;
            if !g.is_finite() {
                return Err((residual, sweeps));
            }
            let ca = 2.0 * g / system.masses[bond.a];
            let cb = 2.0 * g / system.masses[bond.b];
            for axis in 0..3 {
                q[3 * bond.a + axis] -= ca * r_ref[axis];
                q[3 * bond.b + axis] += cb * r_ref[axis];
            }
            gammas[i] += g;
        }
        sweeps += 1;
        residual = system.max_relative_residual(q);
    }
    Ok((residual, sweeps))
}

/// Result of one constraint solve.
#[derive(Debug, Clone)]
pub struct ConstraintSolution {
    /// Constrained positions.
    pub q: Vec<f64>,
    /// Lagrange multipliers λ of G(q_ref), one per bond.
    pub lambdas: Vec<f64>,
    /// Relative residual actually reached (≤ τ).
    pub residual: f64,
    /// Gauss–Seidel sweeps spent; 0 when the trial already satisfied g.
    pub sweeps: usize,
}

/// Solve the constraints for an unconstrained trial update. Standalone calls
/// report failures as step 0.
pub fn solve_constraints(
    q_trial: &[f64],
    q_ref: &[f64],
    system: &ConstrainedSystem,
    settings: &ShakeSettings,
) -> Result<ConstraintSolution, ShakeError> {
    let mut q = q_trial.to_vec();
    let mut gammas = vec![0.0; system.bonds.len()];
    match gauss_seidel(system, &mut q, q_ref, settings.tau, settings.max_solver_iter, &mut gammas) {
        Ok((residual, sweeps)) => {
            let h2 = settings.h * settings.h;
            Ok(ConstraintSolution {
                q,
                lambdas: gammas.iter().map(|g| g / h2).collect(),
                residual,
                sweeps,
            })
        }
        Err((residual, sweeps)) => Err(ShakeError::ConstraintFailure { step: 0, residual, sweeps }),
    }
}

/// One leapfrog/SHAKE step from `(q_n, v_{n−1/2})`.
#[derive(Debug, Clone)]
pub struct ShakeStepResult {
    pub q: Vec<f64>,
    pub v_half: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub residual: f64,
}

/// Advance one step: kick with f(q_n), drift, constrain. The returned
/// half-step velocity is the constraint-corrected
/// `v_{n+1/2} = v_{n−1/2} + h·M⁻¹(f(q_n) − G(q_n)ᵀλ)`, recovered as
/// `(q_{n+1} − q_n)/h`.
pub fn shake_step(
    system: &ConstrainedSystem,
    q: &[f64],
    v_prev_half: &[f64],
    settings: &ShakeSettings,
) -> Result<ShakeStepResult, ShakeError> {
    let h = settings.h;
    let dof = q.len();
    let mut f = vec![0.0; dof];
    system.force_into(q, &mut f);
    let mut trial = vec![0.0; dof];
    for j in 0..dof {
        let vj = v_prev_half[j] + h * f[j] / system.masses[j / 3];
        trial[j] = q[j] + h * vj;
    }
    let solution = solve_constraints(&trial, q, system, settings)?;
    let v_half = solution.q.iter().zip(q).map(|(qn, qo)| (qn - qo) / h).collect();
    Ok(ShakeStepResult { q: solution.q, v_half, lambdas: solution.lambdas, residual: solution.residual })
}

/// Remove the constraint-violating component of a velocity: solve
/// (G M⁻¹ Gᵀ)μ = G v at the configuration `q` and subtract M⁻¹Gᵀμ. Used to
/// start the staggered grid from `v0` and to read a whole-step velocity back
/// off it at the end.
pub fn project_velocity(
    system: &ConstrainedSystem,
    q: &[f64],
    v: &[f64],
) -> Result<Vec<f64>, ShakeError> {
    let m = system.bonds.len();
    if m == 0 {
        return Ok(v.to_vec());
    }
    let rs: Vec<[f64; 3]> = system.bonds.iter().map(|b| bond_vector(q, b)).collect();
    // A = G M⁻¹ Gᵀ, assembled bond pair by bond pair over shared beads.
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let (bi, bj) = (&system.bonds[i], &system.bonds[j]);
            let dot = 4.0 * (rs[i][0] * rs[j][0] + rs[i][1] * rs[j][1] + rs[i][2] * rs[j][2]);
            let mut aij = 0.0;
            if bi.a == bj.a {
                aij += dot / system.masses[bi.a];
            }
            if bi.a == bj.b {
                aij -= dot / system.masses[bi.a];
            }
            if bi.b == bj.a {
                aij -= dot / system.masses[bi.b];
            }
            if bi.b == bj.b {
                aij += dot / system.masses[bi.b];
            }
            a[i][j] = aij;
        }
    }
    let rhs: Vec<f64> = system
        .bonds
        .iter()
        .zip(&rs)
        .map(|(b, r)| {
            2.0 * (r[0] * (v[3 * b.a] - v[3 * b.b])
                + r[1] * (v[3 * b.a + 1] - v[3 * b.b + 1])
                + r[2] * (v[3 * b.a + 2] - v[3 * b.b + 2]))
        })
        .collect();
    let mu = solve_dense(a, rhs).ok_or_else(|| ShakeError::InvalidSystem {
        msg: "velocity projection is singular (redundant constraints?)".into(),
    })?;
    let mut out = v.to_vec();
    for (b, (r, mu_i)) in system.bonds.iter().zip(rs.iter().zip(&mu)) {
        let ca = 2.0 * mu_i / system.masses[b.a];
        let cb = 2.0 * mu_i / system.masses[b.b];
        for axis in 0..3 {
            out[3 * b.a + axis] -= ca * r[axis];
            out[3 * b.b + axis] += cb * r[axis];
        }
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting for the small projection
/// systems (one row per bond).
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// End state of a SHAKE run.
#[derive(Debug, Clone)]
pub struct ShakeRun {
    /// Final positions.
    pub q: Vec<f64>,
    /// Final whole-step velocities (projected back onto the constraint
    /// manifold's tangent space).
    pub v: Vec<f64>,
    pub kinetic: f64,
    pub potential: f64,
    /// Largest post-solve relative residual seen at any step (≤ τ).
    pub max_residual: f64,
}

/// Integrate the system over `[0, t_end]` with `n_steps` uniform SHAKE
/// steps at constraint tolerance τ.
///
/// The staggered grid is bootstrapped with a half-step kick followed by a
/// velocity projection, so the first drift carries no extra kick; the final
/// whole-step velocity is recovered with the mirrored half-step kick and
/// projection.
pub fn simulate(system: &ConstrainedSystem, tau: f64, n_steps: u64) -> Result<ShakeRun, ShakeError> {
    if n_steps == 0 {
        return Err(ShakeError::InvalidSettings { msg: "need at least one step".into() });
    }
    let h = system.t_end / n_steps as f64;
    let settings = ShakeSettings::new(h, tau, DEFAULT_MAX_SOLVER_ITER)?;
    let dof = 3 * system.n_beads();
    let mut q = system.q0.clone();
    let mut f = vec![0.0; dof];
    system.force_into(&q, &mut f);
    let mut v_kicked = vec![0.0; dof];
    for j in 0..dof {
        v_kicked[j] = system.v0[j] + 0.5 * h * f[j] / system.masses[j / 3];
    }
    let mut v_half = project_velocity(system, &q, &v_kicked)?;
    let mut v_corrected = v_half.clone();
    let mut trial = vec![0.0; dof];
    let mut gammas = vec![0.0; system.bonds.len()];
    let mut max_residual: f64 = 0.0;
    for step in 0..n_steps {
        if step > 0 {
            // Kick with the force at the current position; step 0's kick is
            // already inside the bootstrapped half velocity.
            system.force_into(&q, &mut f);
            for j in 0..dof {
                v_half[j] = v_corrected[j] + h * f[j] / system.masses[j / 3];
            }
        }
        for j in 0..dof {
            trial[j] = q[j] + h * v_half[j];
        }
        let (residual, _) =
            gauss_seidel(system, &mut trial, &q, settings.tau, settings.max_solver_iter, &mut gammas)
                .map_err(|(residual, sweeps)| ShakeError::ConstraintFailure { step, residual, sweeps })?;
        max_residual = max_residual.max(residual);
        for j in 0..dof {
            v_corrected[j] = (trial[j] - q[j]) / h;
        }
        q.copy_from_slice(&trial);
    }
    system.force_into(&q, &mut f);
    for j in 0..dof {
        v_kicked[j] = v_corrected[j] + 0.5 * h * f[j] / system.masses[j / 3];
    }
    let v = project_velocity(system, &q, &v_kicked)?;
    let kinetic = system.kinetic_energy(&v);
    let potential = system.potential_at(&q);
    Ok(ShakeRun { q, v, kinetic, potential, max_residual })
}

/// One row of an energy sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub n: u64,
    pub h: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub max_residual: f64,
}

/// Energy sweep over a list of step counts, plus the kinetic- and
/// potential-energy series repackaged for convergence diagnosis.
#[derive(Debug, Clone)]
pub struct EnergySweep {
    pub rows: Vec<EnergyRow>,
    pub kinetic: SampleSweep,
    pub potential: SampleSweep,
}

/// Run the system at every step count in `n_list` (strictly increasing
/// powers of two) and collect end-time energies. Sweep levels are
/// k = log2(n/n_list[0]), so h_k = t_end/n_list[0]·2⁻ᵏ.
pub fn energy_sweep(
    system: &ConstrainedSystem,
    tau: f64,
    n_list: &[u64],
    label: &str,
) -> Result<EnergySweep, ShakeError> {
    if n_list.is_empty() {
        return Err(ShakeError::InvalidSettings { msg: "empty step-count list".into() });
    }
    if n_list.iter().any(|n| !n.is_power_of_two()) {
        return Err(ShakeError::InvalidSettings {
            msg: "step counts must be powers of two for step-halving diagnosis".into(),
        });
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ShakeError::InvalidSettings {
            msg: "step counts must be strictly increasing".into(),
        });
    }
    let n0 = n_list[0];
    let rows = exec::try_ordered_map(n_list.to_vec(), |n| {
        let run = simulate(system, tau, n)?;
        Ok::<EnergyRow, ShakeError>(EnergyRow {
            n,
            h: system.t_end / n as f64,
            kinetic: run.kinetic,
            potential: run.potential,
            total: run.kinetic + run.potential,
            max_residual: run.max_residual,
        })
    })?;
    let h0 = system.t_end / n0 as f64;
    let k_of = |n: u64| n.trailing_zeros() - n0.trailing_zeros();
    let kinetic = SampleSweep::new(
        h0,
        &format!("{label} kinetic"),
        rows.iter().map(|r| (k_of(r.n), r.kinetic)).collect(),
    )?;
    let potential = SampleSweep::new(
        h0,
        &format!("{label} potential"),
        rows.iter().map(|r| (k_of(r.n), r.potential)).collect(),
    )?;
    Ok(EnergySweep { rows, kinetic, potential })
}

/// RMS of the last `tail` second differences of a series — an oscillation
/// amplitude with linear trends removed. Series shorter than three samples
/// (no second differences at all) give 0.
pub fn tail_oscillation(values: &[f64], tail: usize) -> f64 {
    if values.len() < 3 || tail == 0 {
        return 0.0;
    }
    let d2: Vec<f64> = values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .collect();
    let take = tail.min(d2.len());
    let slice = &d2[d2.len() - take..];
    (slice.iter().map(|d| d * d).sum::<f64>() / take as f64).sqrt()
}
