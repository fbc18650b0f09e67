//! 1D transient slightly-compressible nonlinear-diffusion solver.
//!
//! Two-point-flux finite volumes with harmonic-mean interface permeability,
//! backward Euler in time, Newton with a direct tridiagonal solve. Density
//! follows the linear equation of state `rho(u) = rho0 (1 + c_f (u - p_ref))`,
//! so the cell residual is a mass balance in kg/s:
//!
//! ```text
//! F_i = V phi (rho(u_i) - rho(u_i_old)) / dt  -  net mass inflow_i(u)
//! ```
//!
//! Dirichlet pressures act through ghost half-cell transmissibilities at the
//! domain walls. Newton convergence is measured on the diagonally scaled
//! residual `max_i |F_i / J_ii|`, which has pressure units.

use crate::error::{AdjointNetError, Result};
use crate::mesh::{Field, Grid1D};
use crate::tridiag::Tridiagonal;
use ndarray::Array2;

/// Cross-sectional area of the 1D reduction (the y,z extents are unity).
const AREA: f64 = 1.0;

/// Full description of one forward solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DarcyConfig {
    pub grid: Grid1D,
    /// Per-cell permeability, m^2.
    pub permeability: Vec<f64>,
    /// Porosity, dimensionless.
    pub porosity: f64,
    /// Fluid viscosity, Pa s.
    pub viscosity: f64,
    /// Reference density, kg/m^3.
    pub rho0: f64,
    /// Fluid compressibility, 1/Pa. Zero gives the steady (incompressible)
    /// problem in a single step.
    pub compressibility: f64,
    /// Reference pressure of the equation of state, Pa.
    pub p_ref: f64,
    /// Dirichlet pressures at the left/right walls, Pa.
    pub p_left: f64,
    pub p_right: f64,
    /// Uniform initial pressure, Pa.
    pub p_init: f64,
    /// Time step, s.
    pub dt: f64,
    /// Final time, s; the number of steps is `round(t_end / dt)`.
    pub t_end: f64,
    /// Newton tolerance on the scaled residual, Pa.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
}

impl DarcyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.permeability.len() != self.grid.n_cells {
            return Err(AdjointNetError::invalid(format!(
                "permeability has {} entries for {} cells",
                self.permeability.len(),
                self.grid.n_cells
            )));
        }
        if self.permeability.iter().any(|&k| !(k > 0.0)) {
            return Err(AdjointNetError::invalid("permeability must be positive"));
        }
        for (name, v) in [
            ("porosity", self.porosity),
            ("viscosity", self.viscosity),
            ("rho0", self.rho0),
            ("p_ref", self.p_ref),
            ("p_left", self.p_left),
            ("p_right", self.p_right),
            ("p_init", self.p_init),
            ("dt", self.dt),
            ("newton_tol", self.newton_tol),
        ] {
            if !(v > 0.0) {
                return Err(AdjointNetError::invalid(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.compressibility >= 0.0) {
            return Err(AdjointNetError::invalid("compressibility must be >= 0"));
        }
        if self.t_end < self.dt {
            return Err(AdjointNetError::invalid("t_end must be at least dt"));
        }
        if self.newton_max_iters == 0 {
            return Err(AdjointNetError::invalid("newton_max_iters must be >= 1"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }

    pub fn density(&self, u: f64) -> f64 {
        self.rho0 * (1.0 + self.compressibility * (u - self.p_ref))
    }

    /// Pressure diffusivity `k / (phi mu c_f)` of the linearized equation.
    pub fn diffusivity(&self, k: f64) -> f64 {
        k / (self.porosity * self.viscosity * self.compressibility)
    }

    fn cell_volume(&self) -> f64 {
        self.grid.dx * AREA
    }

    /// Conductance of the interior face between `j` and `j+1`:
    /// `A k_h / (mu dx)` with harmonic-mean permeability.
    fn face_conductance(&self, j: usize) -> f64 {
        let (ka, kb) = (self.permeability[j], self.permeability[j + 1]);
        let kh = 2.0 * ka * kb / (ka + kb);
        AREA * kh / (self.viscosity * self.grid.dx)
    }

    /// Ghost half-cell conductance at a wall backed by cell `cell`.
    fn wall_conductance(&self, cell: usize) -> f64 {
        2.0 * AREA * self.permeability[cell] / (self.viscosity * self.grid.dx)
    }
}

/// How per-cell permeability is generated from the parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub enum PermLayout {
    /// One scalar permeability for every cell.
    Uniform,
    /// Piecewise-constant zones; entries are the first cell of each zone,
    /// starting at 0 and strictly increasing.
    Zones(Vec<usize>),
}

impl PermLayout {
    pub fn n_params(&self) -> usize {
        match self {
            PermLayout::Uniform => 1,
            PermLayout::Zones(starts) => starts.len(),
        }
    }

    pub fn validate(&self, n_cells: usize) -> Result<()> {
        match self {
            PermLayout::Uniform => Ok(()),
            PermLayout::Zones(starts) => {
                if starts.first() != Some(&0) {
                    return Err(AdjointNetError::invalid("first zone must start at cell 0"));
                }
                if !starts.windows(2).all(|w| w[0] < w[1]) {
                    return Err(AdjointNetError::invalid("zone starts must increase"));
                }
                if *starts.last().unwrap() >= n_cells {
                    return Err(AdjointNetError::invalid("zone start beyond grid"));
                }
                Ok(())
            }
        }
    }

    pub fn zone_of(&self, cell: usize) -> usize {
        match self {
            PermLayout::Uniform => 0,
            PermLayout::Zones(starts) => {
                starts.iter().rposition(|&s| s <= cell).unwrap_or(0)
            }
        }
    }

    /// Expands parameters to the per-cell permeability array.
    pub fn expand(&self, params: &[f64], n_cells: usize) -> Result<Vec<f64>> {
        if params.len() != self.n_params() {
            return Err(AdjointNetError::invalid(format!(
                "{} parameters for a layout with {}",
                params.len(),
                self.n_params()
            )));
        }
        self.validate(n_cells)?;
        Ok((0..n_cells).map(|c| params[self.zone_of(c)]).collect())
    }
}

/// All time levels of one forward solve, kept for the adjoint sweep.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// One field per time level, including t = 0.
    pub snapshots: Vec<Field>,
    pub checkpointed: bool,
    /// Final scaled Newton residual of each step, Pa.
    pub step_residuals: Vec<f64>,
    /// Newton iterations used per step.
    pub step_iterations: Vec<usize>,
}

impl Trajectory {
    /// Largest converged residual over all steps.
    pub fn max_residual(&self) -> f64 {
        self.step_residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Snapshot index whose time is closest to `t`.
    pub fn snapshot_index_at(&self, t: f64, dt: f64) -> usize {
        ((t / dt).round().max(0.0) as usize).min(self.snapshots.len() - 1)
    }
}

/// Mass bookkeeping over a complete trajectory, in kg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassBalance {
    /// Total change of stored mass between the first and last snapshot.
    pub accumulated: f64,
    /// Net mass that entered through both Dirichlet walls, summed over steps
    /// at the implicit time level.
    pub net_boundary_influx: f64,
}

impl MassBalance {
    pub fn imbalance(&self) -> f64 {
        (self.accumulated - self.net_boundary_influx).abs()
    }

    pub fn relative_imbalance(&self) -> f64 {
        let scale = self.accumulated.abs().max(self.net_boundary_influx.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.imbalance() / scale
        }
    }
}

/// Mass flow rates across every face for the state `u`, kg/s.
///
/// Entry 0 is the left-wall inflow into cell 0, entry `j` (1..n-1) is the
/// rate across the interior face from cell `j-1` into cell `j`, and entry `n`
/// is the right-wall inflow into cell `n-1` (note the reversed orientation of
/// the last entry: positive means mass entering the domain).
pub fn face_mass_rates(config: &DarcyConfig, u: &[f64]) -> Vec<f64> {
    let n = config.grid.n_cells;
    assert_eq!(u.len(), n);
    let mut rates = Vec::with_capacity(n + 1);
    let rho_left_face = 0.5 * (config.density(config.p_left) + config.density(u[0]));
    rates.push(config.wall_conductance(0) * rho_left_face * (config.p_left - u[0]));
    for j in 0..n - 1 {
        let rho_face = 0.5 * (config.density(u[j]) + config.density(u[j + 1]));
        rates.push(config.face_conductance(j) * rho_face * (u[j] - u[j + 1]));
    }
    let rho_right_face = 0.5 * (config.density(config.p_right) + config.density(u[n - 1]));
    rates.push(config.wall_conductance(n - 1) * rho_right_face * (config.p_right - u[n - 1]));
    rates
}

/// Discrete residual and its exact tridiagonal Jacobian w.r.t. `u_new`.
pub fn residual_and_jacobian(
    config: &DarcyConfig,
    u_new: &[f64],
    u_old: &[f64],
) -> (Vec<f64>, Tridiagonal) {
    let n = config.grid.n_cells;
    assert_eq!(u_new.len(), n);
    assert_eq!(u_old.len(), n);

    let v = config.cell_volume();
    let phi = config.porosity;
    let drho = config.rho0 * config.compressibility; // d rho / d u
    let accum_coeff = v * phi * drho / config.dt;

    let mut f = vec![0.0; n];
    let mut jac = Tridiagonal::zeros(n);

    // accumulation; written through the EOS slope so the density difference
    // does not cancel catastrophically at small compressibility
    for i in 0..n {
        f[i] = accum_coeff * (u_new[i] - u_old[i]);
        jac.diag[i] += accum_coeff;
    }

    // interior faces: rate m flows from cell a = j to cell b = j + 1;
    // the same m enters both adjacent residuals with opposite signs
    for j in 0..n - 1 {
        let (a, b) = (j, j + 1);
        let t = config.face_conductance(j);
        let rho_face = 0.5 * (config.density(u_new[a]) + config.density(u_new[b]));
        let dp = u_new[a] - u_new[b];
        let m = t * rho_face * dp;
        let dm_da = t * (0.5 * drho * dp + rho_face);
        let dm_db = t * (0.5 * drho * dp - rho_face);

        f[a] += m;
        jac.diag[a] += dm_da;
        jac.sup[a] += dm_db;

        f[b] -= m;
        jac.sub[a] -= dm_da; // row b, column a
        jac.diag[b] -= dm_db;
    }

    // Dirichlet walls through ghost half-cells
    let t_l = config.wall_conductance(0);
    let rho_l = 0.5 * (config.density(config.p_left) + config.density(u_new[0]));
    let dp_l = config.p_left - u_new[0];
    f[0] -= t_l * rho_l * dp_l;
    jac.diag[0] -= t_l * (0.5 * drho * dp_l - rho_l);

    let t_r = config.wall_conductance(n - 1);
    let rho_r = 0.5 * (config.density(config.p_right) + config.density(u_new[n - 1]));
    let dp_r = config.p_right - u_new[n - 1];
    f[n - 1] -= t_r * rho_r * dp_r;
    jac.diag[n - 1] -= t_r * (0.5 * drho * dp_r - rho_r);

    (f, jac)
}

/// Analytic derivative of the residual w.r.t. the permeability parameters of
/// `layout`, an `n_cells x n_params` matrix. Includes the harmonic-mean
/// derivative at zone interfaces.
pub fn param_jacobian(
    config: &DarcyConfig,
    layout: &PermLayout,
    u_new: &[f64],
    u_old: &[f64],
) -> Array2<f64> {
    let _ = u_old; // accumulation carries no permeability dependence
    let n = config.grid.n_cells;
    assert_eq!(u_new.len(), n);
    let np = layout.n_params();
    let mut dfdp = Array2::zeros((n, np));
    let mu_dx = config.viscosity * config.grid.dx;

    for j in 0..n - 1 {
        let (a, b) = (j, j + 1);
        let (ka, kb) = (config.permeability[a], config.permeability[b]);
        let rho_face = 0.5 * (config.density(u_new[a]) + config.density(u_new[b]));
        let base = AREA * rho_face * (u_new[a] - u_new[b]) / mu_dx; // m = k_h * base
        let denom = (ka + kb) * (ka + kb);
        let dkh_dka = 2.0 * kb * kb / denom;
        let dkh_dkb = 2.0 * ka * ka / denom;
        let (za, zb) = (layout.zone_of(a), layout.zone_of(b));
        // F_a += m, F_b -= m
        dfdp[(a, za)] += base * dkh_dka;
        dfdp[(a, zb)] += base * dkh_dkb;
        dfdp[(b, za)] -= base * dkh_dka;
        dfdp[(b, zb)] -= base * dkh_dkb;
    }

    // walls: conductance is linear in the adjacent cell's permeability
    let rho_l = 0.5 * (config.density(config.p_left) + config.density(u_new[0]));
    let m_l_per_k = 2.0 * AREA * rho_l * (config.p_left - u_new[0]) / mu_dx;
    dfdp[(0, layout.zone_of(0))] -= m_l_per_k;

    let rho_r = 0.5 * (config.density(config.p_right) + config.density(u_new[n - 1]));
    let m_r_per_k = 2.0 * AREA * rho_r * (config.p_right - u_new[n - 1]) / mu_dx;
    dfdp[(n - 1, layout.zone_of(n - 1))] -= m_r_per_k;

    dfdp
}

/// Result of one backward-Euler step.
#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub u: Vec<f64>,
    /// Scaled residual after each evaluation, including the converged one.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
}

fn scaled_norm(f: &[f64], jac: &Tridiagonal) -> f64 {
    f.iter()
        .zip(&jac.diag)
        .map(|(fi, d)| (fi / d).abs())
        .fold(0.0, f64::max)
}

/// Newton iteration for a single step from `u_old`.
pub fn solve_step(config: &DarcyConfig, u_old: &[f64], step: usize) -> Result<NewtonReport> {
    let mut u = u_old.to_vec();
    let mut history = Vec::new();
    for it in 0..=config.newton_max_iters {
        let (f, jac) = residual_and_jacobian(config, &u, u_old);
        let norm = scaled_norm(&f, &jac);
        history.push(norm);
        if !norm.is_finite() {
            return Err(AdjointNetError::Instability {
                context: "darcy newton".into(),
                step,
            });
        }
        if norm < config.newton_tol {
            return Ok(NewtonReport {
                u,
                residual_history: history,
                iterations: it,
            });
        }
        if it == config.newton_max_iters {
            break;
        }
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = jac.solve(&neg_f)?;
        for (ui, di) in u.iter_mut().zip(&delta) {
            *ui += di;
        }
    }
    Err(AdjointNetError::SolverDiverged {
        step,
        residuals: history,
    })
}

/// Runs the full transient solve, checkpointing every time level.
pub fn solve_forward(config: &DarcyConfig) -> Result<Trajectory> {
    config.validate()?;
    let n_steps = config.n_steps();
    let mut snapshots = Vec::with_capacity(n_steps + 1);
    snapshots.push(Field::uniform_1d(&config.grid, config.p_init, 0.0));
    let mut step_residuals = Vec::with_capacity(n_steps);
    let mut step_iterations = Vec::with_capacity(n_steps);

    for s in 1..=n_steps {
        let report = solve_step(config, &snapshots[s - 1].values, s)?;
        let field = Field {
            values: report.u,
            time: s as f64 * config.dt,
        };
        field.check_finite("darcy", s)?;
        snapshots.push(field);
        step_residuals.push(*report.residual_history.last().unwrap());
        step_iterations.push(report.iterations);
    }

    Ok(Trajectory {
        snapshots,
        checkpointed: true,
        step_residuals,
        step_iterations,
    })
}

/// Stored-mass change vs. boundary influx over a finished trajectory.
pub fn mass_balance_report(trajectory: &Trajectory, config: &DarcyConfig) -> MassBalance {
    let v = config.cell_volume();
    let phi = config.porosity;
    let first = &trajectory.snapshots.first().expect("non-empty trajectory").values;
    let last = &trajectory.snapshots.last().unwrap().values;
    let drho = config.rho0 * config.compressibility;
    let accumulated: f64 = first
        .iter()
        .zip(last.iter())
        .map(|(u0, u1)| v * phi * drho * (u1 - u0))
        .sum();

    let mut influx = 0.0;
    for snap in trajectory.snapshots.iter().skip(1) {
        let rates = face_mass_rates(config, &snap.values);
        influx += config.dt * (rates[0] + rates[rates.len() - 1]);
    }
    MassBalance {
        accumulated,
        net_boundary_influx: influx,
    }
}
