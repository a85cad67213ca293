//! Radially symmetric initial-value solver for
//! `∂t u − Δu + t^α |u|^{q−1} u = 0` on a truncated ball, with Dirichlet or
//! blow-up (capped) lateral data.
//!
//! Time stepping is Strang splitting with the *exact* absorption flow: the
//! pointwise ODE `φ' + t^α φ^q = 0` is separable with a closed form
//! ([`crate::model::absorption_flow`]), so the degenerate weight `t^α` is
//! integrated exactly and contributes no stiffness; only diffusion is
//! discretized (conservative second-order radial Laplacian,
//! Crank–Nicolson in time with a Rannacher start for rough data). The
//! implicit matrix is a tridiagonal M-matrix solved by elimination.
//!
//! Graded meshes `t_n = t0 + (T−t0)(n/M)^γ` with `γ = max(2, 2/(1+α))`
//! resolve the absorption increment `t^{1+α}` uniformly across steps.

mod drivers;

pub use drivers::{
    blowup_boundary_solve, dirac_saturate, similarity_defect, verify_upper_bounds, BoundReport,
    CapSchedule, DiracSchedule, SaturationResult, SaturationStage,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{heat_kernel, AbsorptionParams};
use crate::numerics::{thomas_solve, unit_sphere_area};

/// Uniform radial grid on `[0, r_max]` including both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
}

impl RadialGrid {
    pub fn uniform(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::InvalidParams(format!("r_max must be > 0, got {r_max}")));
        }
        if n < 16 {
            return Err(Error::InvalidParams(format!("grid needs n >= 16 nodes, got {n}")));
        }
        Ok(Self { r_max, n })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Mass of the cell around node `i` under the measure `r^{N−1} dr`
    /// (without the sphere-area factor).
    pub fn cell_mass(&self, i: usize, dim: u32) -> f64 {
        let n = dim as f64;
        let h = self.spacing();
        let r = self.node(i);
        let lo = (r - 0.5 * h).max(0.0);
        let hi = (r + 0.5 * h).min(self.r_max);
        (hi.powf(n) - lo.powf(n)) / n
    }
}

/// Graded time mesh `t_n = t0 + (T − t0)(n/M)^γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    t0: f64,
    t_end: f64,
    gamma: f64,
    nodes: Vec<f64>,
}

impl TimeMesh {
    pub fn graded(t0: f64, t_end: f64, m_steps: usize, gamma: f64) -> Result<Self> {
        if !(t_end > t0) || t0 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "need T > t0 >= 0, got t0 = {t0}, T = {t_end}"
            )));
        }
        if m_steps < 4 {
            return Err(Error::InvalidParams("need at least 4 time steps".into()));
        }
        if gamma < 1.0 {
            return Err(Error::InvalidParams(format!("grading gamma must be >= 1, got {gamma}")));
        }
        let m = m_steps as f64;
        let nodes = (0..=m_steps)
            .map(|n| t0 + (t_end - t0) * (n as f64 / m).powf(gamma))
            .collect();
        Ok(Self { t0, t_end, gamma, nodes })
    }

    /// Default grading for the given weight exponent:
    /// `γ = max(2, 2/(1+α))`.
    pub fn default_gamma(alpha: f64) -> f64 {
        (2.0f64).max(2.0 / (1.0 + alpha))
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn first_step(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    pub fn max_step(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max)
    }
}

/// Initial datum `u(·, t0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialDatum {
    Zero,
    /// Realized as `u(·, t0) = k · E(·, t0)` at the release time `t0 > 0`
    /// (exact under pure diffusion, so shrinking `t0` isolates the effect
    /// of absorption on the concentrating data).
    DiracApprox { mass: f64, release: f64 },
    /// `height · χ_{r ≤ radius}`; "infinite" plateaus are realized by cap
    /// schedules over `height`.
    BallIndicator { radius: f64, height: f64 },
    /// Samples on the solve grid.
    Density { samples: Vec<f64> },
}

impl InitialDatum {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialDatum::Zero => Ok(()),
            InitialDatum::DiracApprox { mass, release } => {
                if *mass < 0.0 || !(*release > 0.0) {
                    Err(Error::InvalidParams(format!(
                        "DiracApprox needs mass >= 0 and release > 0, got mass {mass}, release {release}"
                    )))
                } else {
                    Ok(())
                }
            }
            InitialDatum::BallIndicator { radius, height } => {
                if *radius < 0.0 || *height < 0.0 {
                    Err(Error::InvalidParams(
                        "BallIndicator needs radius >= 0 and height >= 0".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            InitialDatum::Density { samples } => {
                if samples.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    Err(Error::InvalidParams("Density samples must be finite and >= 0".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn realize(&self, grid: &RadialGrid, t0: f64, dim: u32) -> Result<Vec<f64>> {
        self.validate()?;
        match self {
            InitialDatum::Zero => Ok(vec![0.0; grid.len()]),
            InitialDatum::DiracApprox { mass, release } => {
                if (release - t0).abs() > 1e-12 * release.max(1e-300) {
                    return Err(Error::Config(format!(
                        "DiracApprox release time {release} must equal the mesh start {t0}"
                    )));
                }
                (0..grid.len())
                    .map(|i| Ok(mass * heat_kernel(grid.node(i), *release, dim)?))
                    .collect()
            }
            InitialDatum::BallIndicator { radius, height } => Ok((0..grid.len())
                .map(|i| if grid.node(i) <= *radius { *height } else { 0.0 })
                .collect()),
            InitialDatum::Density { samples } => {
                if samples.len() != grid.len() {
                    return Err(Error::Config(format!(
                        "Density has {} samples but the grid has {} nodes",
                        samples.len(),
                        grid.len()
                    )));
                }
                Ok(samples.clone())
            }
        }
    }
}

/// Lateral boundary condition at `r = r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    DirichletZero,
    /// Finite approximation of blow-up lateral data: `u = k` on the lateral
    /// boundary, with `k` doubled by the saturation drivers.
    BlowupCap(f64),
}

impl Boundary {
    fn value(&self) -> f64 {
        match self {
            Boundary::DirichletZero => 0.0,
            Boundary::BlowupCap(k) => *k,
        }
    }
}

/// Solver knobs; the defaults match the scheme described in the module docs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Multiplies the absorption term; 0 disables it (pure heat test hook).
    pub absorption_scale: f64,
    /// Record snapshots only at these times (snapped to mesh nodes);
    /// `None` records every mesh node.
    pub snapshot_times: Option<Vec<f64>>,
    /// Number of initial steps integrated with backward-Euler halves
    /// instead of Crank–Nicolson (Rannacher start for rough data).
    pub rannacher_steps: usize,
    /// Negative values above `-tol · max(1, sup u)` are clipped to 0;
    /// anything below is a scheme error.
    pub positivity_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            absorption_scale: 1.0,
            snapshot_times: None,
            rannacher_steps: 2,
            positivity_tol: 1e-14,
        }
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepDiag {
    pub t: f64,
    /// `ω_{N−1} ∫ u r^{N−1} dr` with the cell masses of the conservative
    /// scheme (telescopes exactly, so its monotonicity is meaningful).
    pub mass: f64,
    pub max: f64,
    pub clipped: usize,
}

/// A finished run: snapshots, their times, and per-step diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialSolution {
    pub params: AbsorptionParams,
    pub grid: RadialGrid,
    pub mesh: TimeMesh,
    pub datum: InitialDatum,
    pub boundary: Boundary,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub diagnostics: Vec<StepDiag>,
}

impl RadialSolution {
    /// Linear-in-time interpolation of the full field at `t`.
    pub fn field_at(&self, t: f64) -> Result<Vec<f64>> {
        let first = *self.times.first().unwrap();
        let last = *self.times.last().unwrap();
        if t < first - 1e-12 || t > last + 1e-12 {
            return Err(Error::Sampling(format!(
                "time {t} outside stored snapshot range [{first}, {last}]"
            )));
        }
        let t = t.clamp(first, last);
        let idx = match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return Ok(self.snapshots[i].clone()),
            Err(i) => i,
        };
        let (i0, i1) = (idx - 1, idx);
        let w = (t - self.times[i0]) / (self.times[i1] - self.times[i0]);
        Ok(self.snapshots[i0]
            .iter()
            .zip(&self.snapshots[i1])
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    /// Bilinear sample at `(r, t)`.
    pub fn value_at(&self, r: f64, t: f64) -> Result<f64> {
        if r < 0.0 || r > self.grid.r_max() + 1e-12 {
            return Err(Error::Sampling(format!("radius {r} outside the grid")));
        }
        let field = self.field_at(t)?;
        let h = self.grid.spacing();
        let x = (r / h).min((self.grid.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.grid.len() - 2);
        let frac = x - i as f64;
        Ok(field[i] * (1.0 - frac) + field[i + 1] * frac)
    }

    pub fn snapshot_index_at(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|x| (x - t).abs() <= 1e-9 * t.abs().max(1e-12))
    }
}

/// Exact flow of `φ' + c · t^α φ^q = 0` (the absorption substep with the
/// test-hook scale `c`).
fn scaled_absorption_flow(params: &AbsorptionParams, scale: f64, u0: f64, t0: f64, t1: f64) -> f64 {
    if scale == 0.0 || t1 == t0 {
        return u0;
    }
    if u0 < 1e-300 {
        return 0.0;
    }
    let q = params.q();
    let a1 = params.alpha() + 1.0;
    let increment = scale * (q - 1.0) * (t1.powf(a1) - t0.powf(a1)) / a1;
    let base = ((1.0 - q) * u0.ln()).exp();
    if !base.is_finite() {
        return 0.0;
    }
    (-(base + increment).ln() / (q - 1.0)).exp()
}

/// The tridiagonal diffusion operator in conservative form.
struct DiffusionOp {
    /// off-diagonal couplings: `a[i]` multiplies `u_{i−1}`, `c[i]` `u_{i+1}`
    a: Vec<f64>,
    c: Vec<f64>,
    n: usize,
}

impl DiffusionOp {
    fn new(grid: &RadialGrid, dim: u32) -> Self {
        let n = grid.len();
        let h = grid.spacing();
        let nf = dim as f64;
        let mut a = vec![0.0; n];
        let mut c = vec![0.0; n];
        for i in 0..n - 1 {
            // flux coefficient through the face between i and i+1
            let face = (grid.node(i) + 0.5 * h).powf(nf - 1.0) / h;
            let w_i = grid.cell_mass(i, dim);
            let w_ip = grid.cell_mass(i + 1, dim);
            c[i] = face / w_i;
            a[i + 1] = face / w_ip;
        }
        Self { a, c, n }
    }

    /// One implicit diffusion step `(I − θ Δτ L) u⁺ = (I + (1−θ)Δτ L) u`
    /// with the Dirichlet value `bc` at the last node.
    fn implicit_step(&self, u: &[f64], dt: f64, theta: f64, bc: f64) -> Vec<f64> {
        let n = self.n;
        let m = n - 1; // unknowns 0..n−2
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        let explicit = 1.0 - theta;
        for i in 0..m {
            let b = -(self.a[i] + self.c[i]);
            diag[i] = 1.0 - theta * dt * b;
            if i > 0 {
                lower[i] = -theta * dt * self.a[i];
            }
            if i < m - 1 {
                upper[i] = -theta * dt * self.c[i];
            }
            // explicit side
            let mut r = u[i] * (1.0 + explicit * dt * b);
            if i > 0 {
                r += explicit * dt * self.a[i] * u[i - 1];
            }
            r += explicit * dt * self.c[i] * u[i + 1];
            rhs[i] = r;
        }
        // fold the Dirichlet boundary: node n−1 has value bc on both levels
        rhs[m - 1] += theta * dt * self.c[m - 1] * bc + explicit * dt * self.c[m - 1] * bc;
        let mut out = thomas_solve(&lower, &diag, &upper, &rhs);
        out.push(bc);
        out
    }
}

/// How the diffusion substep is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    CrankNicolson,
    /// Two backward-Euler half steps (Rannacher start).
    BackwardEulerPair,
}

/// One Strang step `t_n → t_{n+1}`: exact absorption over the first half
/// interval, one implicit diffusion step over the whole interval, exact
/// absorption over the second half. Returns the new field.
pub fn step(
    state: &[f64],
    t_n: f64,
    t_np1: f64,
    params: &AbsorptionParams,
    grid: &RadialGrid,
    boundary: Boundary,
    opts: &SolveOptions,
    mode: StepMode,
) -> Result<Vec<f64>> {
    if state.len() != grid.len() {
        return Err(Error::Scheme(format!(
            "state has {} entries, grid has {} nodes",
            state.len(),
            grid.len()
        )));
    }
    let op = DiffusionOp::new(grid, params.dim());
    step_with_op(state, t_n, t_np1, params, &op, boundary, opts, mode)
}

#[allow(clippy::too_many_arguments)]
fn step_with_op(
    state: &[f64],
    t_n: f64,
    t_np1: f64,
    params: &AbsorptionParams,
    op: &DiffusionOp,
    boundary: Boundary,
    opts: &SolveOptions,
    mode: StepMode,
) -> Result<Vec<f64>> {
    let dt = t_np1 - t_n;
    debug_assert!(dt > 0.0);
    let t_mid = 0.5 * (t_n + t_np1);
    let bc = boundary.value();

    let mut u: Vec<f64> = state
        .iter()
        .map(|&v| scaled_absorption_flow(params, opts.absorption_scale, v, t_n, t_mid))
        .collect();
    *u.last_mut().unwrap() = bc;

    u = match mode {
        StepMode::CrankNicolson => op.implicit_step(&u, dt, 0.5, bc),
        StepMode::BackwardEulerPair => {
            let half = op.implicit_step(&u, 0.5 * dt, 1.0, bc);
            op.implicit_step(&half, 0.5 * dt, 1.0, bc)
        }
    };

    for v in u.iter_mut() {
        *v = scaled_absorption_flow(params, opts.absorption_scale, *v, t_mid, t_np1);
    }
    *u.last_mut().unwrap() = bc;
    Ok(u)
}

/// March the datum over the whole mesh.
pub fn solve(
    params: &AbsorptionParams,
    grid: &RadialGrid,
    mesh: &TimeMesh,
    datum: &InitialDatum,
    boundary: Boundary,
    opts: &SolveOptions,
) -> Result<RadialSolution> {
    let mut u = datum.realize(grid, mesh.t0(), params.dim())?;
    if let Boundary::BlowupCap(k) = boundary {
        if !(k >= 0.0) {
            return Err(Error::InvalidParams("blow-up cap must be >= 0".into()));
        }
        *u.last_mut().unwrap() = k;
    }
    let op = DiffusionOp::new(grid, params.dim());
    let omega = unit_sphere_area(params.dim());
    let cell: Vec<f64> = (0..grid.len()).map(|i| grid.cell_mass(i, params.dim())).collect();
    let mass_of = |f: &[f64]| -> f64 { omega * f.iter().zip(&cell).map(|(v, w)| v * w).sum::<f64>() };

    // map requested snapshot times to mesh node indices
    let record_at: Vec<bool> = match &opts.snapshot_times {
        None => vec![true; mesh.nodes().len()],
        Some(times) => {
            let mut flags = vec![false; mesh.nodes().len()];
            flags[0] = true;
            *flags.last_mut().unwrap() = true;
            for &t in times {
                let idx = nearest_index(mesh.nodes(), t);
                flags[idx] = true;
            }
            flags
        }
    };

    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut diagnostics = Vec::with_capacity(mesh.steps() + 1);
    diagnostics.push(StepDiag { t: mesh.t0(), mass: mass_of(&u), max: sup(&u), clipped: 0 });
    if record_at[0] {
        times.push(mesh.t0());
        snapshots.push(u.clone());
    }

    for n in 0..mesh.steps() {
        let t_n = mesh.nodes()[n];
        let t_np1 = mesh.nodes()[n + 1];
        let mode = if n < opts.rannacher_steps {
            StepMode::BackwardEulerPair
        } else {
            StepMode::CrankNicolson
        };
        u = step_with_op(&u, t_n, t_np1, params, &op, boundary, opts, mode)?;

        // positivity audit
        let scale = sup(&u).max(1.0);
        let mut clipped = 0usize;
        for v in u.iter_mut() {
            if *v < 0.0 {
                if *v < -opts.positivity_tol * scale {
                    return Err(Error::Scheme(format!(
                        "negativity {v:.3e} at t = {t_np1:.6e} exceeds the positivity tolerance"
                    )));
                }
                *v = 0.0;
                clipped += 1;
            }
        }
        diagnostics.push(StepDiag { t: t_np1, mass: mass_of(&u), max: sup(&u), clipped });
        if record_at[n + 1] {
            times.push(t_np1);
            snapshots.push(u.clone());
        }
    }

    Ok(RadialSolution {
        params: *params,
        grid: grid.clone(),
        mesh: mesh.clone(),
        datum: datum.clone(),
        boundary,
        times,
        snapshots,
        diagnostics,
    })
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x))
}

fn nearest_index(nodes: &[f64], t: f64) -> usize {
    let mut best = 0usize;
    let mut dist = f64::INFINITY;
    for (i, &x) in nodes.iter().enumerate() {
        let d = (x - t).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{absorption_flow, flat_exact_solution};

    fn params() -> AbsorptionParams {
        AbsorptionParams::new(0.0, 2.0, 1).unwrap()
    }

    #[test]
    fn graded_mesh_shapes() {
        let mesh = TimeMesh::graded(0.0, 1.0, 8, 1.0).unwrap();
        // γ = 1 is uniform
        for (i, w) in mesh.nodes().windows(2).enumerate() {
            assert!((w[1] - w[0] - 0.125).abs() < 1e-14, "step {i}");
        }
        let g = TimeMesh::graded(0.5, 1.5, 10, 2.5).unwrap();
        assert_eq!(g.nodes().len(), 11);
        assert_eq!(g.nodes()[0], 0.5);
        assert!((g.nodes()[10] - 1.5).abs() < 1e-14);
        for w in g.nodes().windows(2) {
            assert!(w[1] > w[0]);
        }
        // first step = (T − t0) M^{−γ}
        assert!((g.first_step() - 1.0 * 10f64.powf(-2.5)).abs() < 1e-15);
        assert!(TimeMesh::graded(1.0, 1.0, 8, 2.0).is_err());
        assert!(TimeMesh::graded(0.0, 1.0, 2, 2.0).is_err());
        assert!(TimeMesh::graded(0.0, 1.0, 8, 0.5).is_err());
    }

    #[test]
    fn zero_datum_stays_zero() {
        let p = params();
        let grid = RadialGrid::uniform(4.0, 65).unwrap();
        let mesh = TimeMesh::graded(0.0, 0.5, 32, 2.0).unwrap();
        let sol = solve(&p, &grid, &mesh, &InitialDatum::Zero, Boundary::DirichletZero,
            &SolveOptions::default()).unwrap();
        for snap in &sol.snapshots {
            assert!(snap.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn flat_state_follows_exact_absorption_over_one_step() {
        let p = params();
        let grid = RadialGrid::uniform(4.0, 65).unwrap();
        let u0 = vec![3.0; grid.len()];
        let out = step(&u0, 0.2, 0.3, &p, &grid, Boundary::BlowupCap(0.0), &SolveOptions::default(),
            StepMode::CrankNicolson).unwrap();
        // interior nodes away from the boundary: diffusion leaves flat
        // fields untouched, absorption is exact
        let exact = absorption_flow(&p, 3.0, 0.2, 0.3);
        for i in 0..grid.len() - 8 {
            assert!(
                (out[i] - exact).abs() <= 1e-12 * exact,
                "node {i}: {} vs {exact}",
                out[i]
            );
        }
    }

    #[test]
    fn pure_heat_step_preserves_gaussian() {
        // absorption disabled: one step of the discrete heat flow tracks the
        // exact kernel to O(h² + Δτ²)
        let p = params();
        let grid = RadialGrid::uniform(8.0, 513).unwrap();
        let t0 = 0.25;
        let dt = 0.01;
        let u0: Vec<f64> =
            (0..grid.len()).map(|i| heat_kernel(grid.node(i), t0, 1).unwrap()).collect();
        let opts = SolveOptions { absorption_scale: 0.0, ..Default::default() };
        let out = step(&u0, t0, t0 + dt, &p, &grid, Boundary::DirichletZero, &opts,
            StepMode::CrankNicolson).unwrap();
        let mut worst = 0.0f64;
        for i in 0..grid.len() {
            let exact = heat_kernel(grid.node(i), t0 + dt, 1).unwrap();
            worst = worst.max((out[i] - exact).abs());
        }
        let h = grid.spacing();
        assert!(worst < 2.0 * (h * h + dt * dt), "one-step defect {worst:.3e}");
    }

    #[test]
    fn step_monotone_in_data() {
        let p = params();
        let grid = RadialGrid::uniform(4.0, 129).unwrap();
        let h = grid.spacing();
        let dt = 0.5 * h * h; // within the monotonicity range of CN
        let mut rng = 1234567u64;
        let mut rand01 = move || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) as f64) / (2f64.powi(31))
        };
        for _ in 0..20 {
            let f: Vec<f64> = (0..grid.len()).map(|_| rand01()).collect();
            let g: Vec<f64> = f.iter().map(|v| v + 0.3 * rand01()).collect();
            let uf = step(&f, 0.3, 0.3 + dt, &p, &grid, Boundary::DirichletZero,
                &SolveOptions::default(), StepMode::CrankNicolson).unwrap();
            let ug = step(&g, 0.3, 0.3 + dt, &p, &grid, Boundary::DirichletZero,
                &SolveOptions::default(), StepMode::CrankNicolson).unwrap();
            for (a, b) in uf.iter().zip(&ug) {
                assert!(a <= &(b + 1e-12));
            }
        }
    }

    #[test]
    fn plateau_run_bounded_by_maximal_flat_solution() {
        let p = params();
        let grid = RadialGrid::uniform(4.0, 129).unwrap();
        let mesh = TimeMesh::graded(0.0, 0.25, 128, 2.0).unwrap();
        let datum = InitialDatum::BallIndicator { radius: 2.0, height: 1e8 };
        let sol = solve(&p, &grid, &mesh, &datum, Boundary::DirichletZero,
            &SolveOptions::default()).unwrap();
        for (t, snap) in sol.times.iter().zip(&sol.snapshots).skip(1) {
            let bound = flat_exact_solution(&p, 0.0, *t).unwrap();
            for v in snap {
                assert!(*v <= bound * (1.0 + 1e-6), "u = {v} vs bound {bound} at t = {t}");
            }
        }
    }

    #[test]
    fn mass_decays_under_dirichlet_zero() {
        let p = AbsorptionParams::new(0.5, 2.0, 3).unwrap();
        let grid = RadialGrid::uniform(5.0, 161).unwrap();
        let mesh = TimeMesh::graded(0.0, 0.5, 96, 2.0).unwrap();
        let datum = InitialDatum::BallIndicator { radius: 1.5, height: 2.0 };
        let sol = solve(&p, &grid, &mesh, &datum, Boundary::DirichletZero,
            &SolveOptions::default()).unwrap();
        for w in sol.diagnostics.windows(2) {
            assert!(
                w[1].mass <= w[0].mass * (1.0 + 1e-12),
                "mass rose: {} -> {}",
                w[0].mass,
                w[1].mass
            );
        }
    }

    #[test]
    fn dirac_datum_requires_matching_release() {
        let p = params();
        let grid = RadialGrid::uniform(4.0, 65).unwrap();
        let mesh = TimeMesh::graded(0.01, 0.5, 32, 2.0).unwrap();
        let datum = InitialDatum::DiracApprox { mass: 1.0, release: 0.02 };
        assert!(matches!(
            solve(&p, &grid, &mesh, &datum, Boundary::DirichletZero, &SolveOptions::default()),
            Err(Error::Config(_))
        ));
    }
}
