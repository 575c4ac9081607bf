//! Per-ε finite-difference solution of the Cauchy problem
//! □_{g_ε} u_ε = f_ε, u_ε(0) = u0_ε, ∇_ξ̂ u_ε(0) = u1_ε on [0,T] × Tᵈ.
//!
//! The wave operator is taken in conservative Laplace–Beltrami form
//! □u = |g|^{−1/2} ∂_a(|g|^{1/2} g^{ab} ∂_b u) with |g| = β·det h, which in
//! split coordinates becomes ∂_t(a ∂_t u) = ∂_i(B^{ij} ∂_j u) − s·f with
//! a = √(det h/β), B^{ij} = √(β det h)·(h⁻¹)^{ij}, s = √(β det h). Time
//! stepping is leapfrog with second-order centered fluxes on the periodic
//! mesh; the time step obeys dt = ν·Δx / max √(β·λmax(h⁻¹)) per ε, with
//! ν = 0.5, and additionally dt ≤ ε/4 when mollified inputs are present.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EpsGrid, Mesh};
use crate::nets::{
    self, association_check, AssociationReport, DistTarget, ScalarNet, Shadow,
};
use crate::spacetime::{sym_det, sym_inv, sym_min_eig, MetricSplit, SubBox};
use crate::testfn::TestFunction;

/// Initial data (u0, u1) on the slice {0} × S plus an optional
/// inhomogeneity f on the full mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyData {
    pub u0: ScalarNet,
    pub u1: ScalarNet,
    pub f: Option<ScalarNet>,
    /// Declared spatial support box, when the data are compactly supported.
    pub support_box: Option<SubBox>,
    /// Provenance: true when the data came from a mollifier embedding, which
    /// tightens the per-ε time-step rule.
    pub mollified: bool,
}

impl CauchyData {
    pub fn new(u0: ScalarNet, u1: ScalarNet) -> Result<Self> {
        if u0.mesh().time.is_some() || u1.mesh().time.is_some() {
            return Err(Error::arg("Cauchy data live on the spatial mesh"));
        }
        if u0.mesh() != u1.mesh() || u0.grid() != u1.grid() {
            return Err(Error::arg("u0 and u1 must share mesh and eps grid"));
        }
        Ok(CauchyData {
            u0,
            u1,
            f: None,
            support_box: None,
            mollified: false,
        })
    }

    pub fn with_inhomogeneity(mut self, f: ScalarNet) -> Result<Self> {
        if f.mesh().time.is_none() {
            return Err(Error::arg("the inhomogeneity lives on the full mesh"));
        }
        if f.mesh().space != self.u0.mesh().space || f.grid() != self.u0.grid() {
            return Err(Error::arg("f must share the spatial mesh and eps grid"));
        }
        self.f = Some(f);
        Ok(self)
    }

    pub fn with_support_box(mut self, b: SubBox) -> Self {
        self.support_box = Some(b);
        self
    }

    pub fn with_mollified_flag(mut self) -> Self {
        self.mollified = true;
        self
    }

    /// Check that u0 and u1 really vanish outside the declared box.
    pub fn verify_support(&self) -> Result<bool> {
        let b = self
            .support_box
            .as_ref()
            .ok_or_else(|| Error::arg("no support box declared"))?;
        let mesh = self.u0.mesh();
        let ranges = b.index_ranges(mesh)?;
        let scale = self
            .u0
            .sup_abs()
            .into_iter()
            .chain(self.u1.sup_abs())
            .fold(0.0f64, f64::max);
        let tol = 1e-14 * scale.max(1e-300);
        for k in 0..self.u0.grid().len() {
            for (net, _) in [(&self.u0, 0), (&self.u1, 1)] {
                for flat in 0..mesh.len() {
                    if inside_ranges(mesh, flat, &ranges) {
                        continue;
                    }
                    if net.sample(k)[flat].abs() > tol {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

fn inside_ranges(mesh: &Mesh, flat: usize, ranges: &[std::ops::Range<usize>]) -> bool {
    let shape = mesh.shape();
    let mut rem = flat;
    let mut divs = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        divs[i] = divs[i + 1] * shape[i + 1];
    }
    for (i, d) in divs.iter().enumerate() {
        let idx = rem / d;
        rem %= d;
        if !ranges[i].contains(&idx) {
            return false;
        }
    }
    true
}

/// Three consecutive raw time levels around an output time, giving the value
/// and centered first/second time derivatives there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub tau: f64,
    pub dt: f64,
    pub prev: Vec<f64>,
    pub mid: Vec<f64>,
    pub next: Vec<f64>,
}

impl Snapshot {
    pub fn value(&self) -> &[f64] {
        &self.mid
    }

    pub fn dudt(&self) -> Vec<f64> {
        self.prev
            .iter()
            .zip(&self.next)
            .map(|(p, n)| (n - p) / (2.0 * self.dt))
            .collect()
    }

    pub fn d2udt2(&self) -> Vec<f64> {
        self.prev
            .iter()
            .zip(&self.mid)
            .zip(&self.next)
            .map(|((p, m), n)| (p - 2.0 * m + n) / (self.dt * self.dt))
            .collect()
    }
}

/// Per-ε diagnostics of a solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsSolveDiag {
    pub eps: f64,
    pub dt: f64,
    pub steps: usize,
    pub max_wave_speed: f64,
    /// Set when this ε member failed (CFL blow-up, degenerate h); snapshots
    /// up to the failure are kept.
    pub failure: Option<String>,
}

/// One ε member of a solution net.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsSolution {
    pub diag: EpsSolveDiag,
    pub snapshots: Vec<Snapshot>,
    /// All raw time levels, kept only when requested in the options.
    pub full: Option<Vec<Vec<f64>>>,
}

impl EpsSolution {
    /// Snapshot closest to the requested time.
    pub fn at(&self, tau: f64) -> &Snapshot {
        self.snapshots
            .iter()
            .min_by(|a, b| {
                (a.tau - tau)
                    .abs()
                    .partial_cmp(&(b.tau - tau).abs())
                    .unwrap()
            })
            .expect("solutions carry at least the initial snapshot")
    }
}

/// Solution of the Cauchy problem as an ε-indexed family of time snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionNet {
    pub grid: EpsGrid,
    pub spatial_mesh: Mesh,
    pub t_final: f64,
    pub members: Vec<EpsSolution>,
}

impl SolutionNet {
    /// Whether any ε member failed.
    pub fn all_complete(&self) -> bool {
        self.members.iter().all(|m| m.diag.failure.is_none())
    }

    /// The spatial slice nearest `tau` as a net.
    pub fn slice_net(&self, tau: f64) -> Result<ScalarNet> {
        let samples = self
            .members
            .iter()
            .map(|m| m.at(tau).mid.clone())
            .collect();
        ScalarNet::new(self.grid.clone(), self.spatial_mesh.clone(), samples)
    }

    /// Per-ε sup of |u| over all snapshots.
    pub fn sup_abs(&self) -> Vec<f64> {
        self.members
            .iter()
            .map(|m| {
                m.snapshots
                    .iter()
                    .flat_map(|s| s.mid.iter())
                    .fold(0.0f64, |acc, v| acc.max(v.abs()))
            })
            .collect()
    }

    /// Materialize the full (t,x) net; requires `store_full`.
    pub fn to_net(&self) -> Result<ScalarNet> {
        let full0 = self.members[0]
            .full
            .as_ref()
            .ok_or_else(|| Error::arg("solve was run without store_full"))?;
        let nt = full0.len();
        if self
            .members
            .iter()
            .any(|m| m.full.as_ref().map_or(true, |f| f.len() != nt))
        {
            return Err(Error::arg(
                "per-eps level counts differ; resample before building a net",
            ));
        }
        let mesh = Mesh::space_time(
            crate::grid::TimeAxis {
                t0: 0.0,
                t1: self.t_final,
                n: nt,
            },
            self.spatial_mesh.space.clone(),
        )?;
        let samples = self
            .members
            .iter()
            .map(|m| m.full.as_ref().unwrap().concat())
            .collect();
        ScalarNet::new(self.grid.clone(), mesh, samples)
    }
}

/// Solver controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveOptions {
    /// CFL factor ν.
    pub cfl: f64,
    /// Number of snapshot times (uniform over [0,T], endpoints included).
    pub n_snapshots: usize,
    /// Keep every raw time level.
    pub store_full: bool,
    /// Force one shared dt across ε (wanted when members are compared
    /// level-by-level); chosen from the most restrictive member.
    pub shared_dt: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            cfl: 0.5,
            n_snapshots: 33,
            store_full: false,
            shared_dt: false,
        }
    }
}

/// Solve the Cauchy problem for every ε independently.
pub fn solve(g: &MetricSplit, data: &CauchyData, t_final: f64, opts: &SolveOptions) -> Result<SolutionNet> {
    let mesh = g.mesh();
    let ta = mesh.time.as_ref().unwrap();
    if !(t_final > 0.0) {
        return Err(Error::arg("final time must be positive"));
    }
    if ta.t0 > 0.0 || ta.t1 < t_final {
        return Err(Error::arg(format!(
            "metric time range [{}, {}] does not cover [0, {t_final}]",
            ta.t0, ta.t1
        )));
    }
    if data.u0.mesh().space != mesh.space {
        return Err(Error::Mesh(
            "data and metric must share the spatial mesh".into(),
        ));
    }
    if data.u0.grid() != g.grid() {
        return Err(Error::arg("data and metric must share the eps grid"));
    }
    let dx_min = mesh
        .space
        .iter()
        .map(|a| a.spacing())
        .fold(f64::INFINITY, f64::min);

    // per-ε time step from the CFL bound and the mollification rule
    let mollified = g.mollified || data.mollified;
    let dt_of = |k: usize| -> Result<(f64, f64)> {
        let speed = g.max_wave_speed(k);
        if !speed.is_finite() || speed <= 0.0 {
            return Err(Error::Numerical("degenerate wave speeds".into()));
        }
        let mut dt = opts.cfl * dx_min / speed;
        if mollified {
            dt = dt.min(g.grid().values()[k] / 4.0);
        }
        Ok((dt, speed))
    };
    let shared = if opts.shared_dt {
        let mut m = f64::INFINITY;
        for k in 0..g.grid().len() {
            m = m.min(dt_of(k)?.0);
        }
        Some(m)
    } else {
        None
    };

    let members: Vec<EpsSolution> = (0..g.grid().len())
        .into_par_iter()
        .map(|k| solve_single(g, data, t_final, opts, k, shared, &dt_of))
        .collect();
    Ok(SolutionNet {
        grid: g.grid().clone(),
        spatial_mesh: mesh.spatial_part(),
        t_final,
        members,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_single(
    g: &MetricSplit,
    data: &CauchyData,
    t_final: f64,
    opts: &SolveOptions,
    k: usize,
    shared_dt: Option<f64>,
    dt_of: &(dyn Fn(usize) -> Result<(f64, f64)> + Sync),
) -> EpsSolution {
    let eps = g.grid().values()[k];
    let mesh = g.mesh();
    let ns = mesh.space_len();
    let fail = |msg: String, dt: f64, speed: f64| EpsSolution {
        diag: EpsSolveDiag {
            eps,
            dt,
            steps: 0,
            max_wave_speed: speed,
            failure: Some(msg),
        },
        snapshots: Vec::new(),
        full: None,
    };

    // degenerate h at this ε: skip with diagnostic
    for flat in 0..mesh.len() {
        if sym_min_eig(&g.h_at(k, flat)) <= 0.0 {
            return fail("spatial metric not positive definite".into(), 0.0, f64::NAN);
        }
    }
    let (mut dt, speed) = match dt_of(k) {
        Ok(v) => v,
        Err(e) => return fail(e.to_string(), 0.0, f64::NAN),
    };
    if let Some(s) = shared_dt {
        dt = s;
    }
    let steps = (t_final / dt).ceil() as usize;
    let dt = t_final / steps as f64;

    // snapshot step indices (unique, sorted)
    let mut snap_steps: Vec<usize> = (0..opts.n_snapshots)
        .map(|j| {
            ((j as f64 / (opts.n_snapshots - 1).max(1) as f64) * steps as f64).round() as usize
        })
        .collect();
    snap_steps.dedup();

    // metric coefficient buffers
    let d = g.spatial_dim();
    let n_b = crate::spacetime::sym_len(d);
    let mut a_minus = vec![0.0; ns]; // a at t − dt/2
    let mut a_plus = vec![0.0; ns]; // a at t + dt/2
    let mut b_now = vec![vec![0.0; ns]; n_b]; // B^{ij} at t
    let mut s_now = vec![0.0; ns]; // √(β det h) at t

    let fill_a = |t: f64, out: &mut [f64]| {
        for i in 0..ns {
            let (beta, h) = g.at_time(k, t, i);
            out[i] = (sym_det(&h) / beta).sqrt();
        }
    };
    let fill_bs = |t: f64, b: &mut [Vec<f64>], s: &mut [f64]| {
        for i in 0..ns {
            let (beta, h) = g.at_time(k, t, i);
            let det = sym_det(&h);
            let vol = (beta * det).sqrt();
            let hinv = sym_inv(&h);
            for (c, bc) in b.iter_mut().enumerate() {
                bc[i] = vol * hinv[c];
            }
            s[i] = vol;
        }
    };

    // initial levels: u^0 = u0, ∂_t u(0) = √β·u1, u_tt from the equation
    let u0 = data.u0.sample(k).to_vec();
    let mut ut0 = vec![0.0; ns];
    for i in 0..ns {
        let (beta, _) = g.at_time(k, 0.0, i);
        ut0[i] = beta.sqrt() * data.u1.sample(k)[i];
    }
    fill_bs(0.0, &mut b_now, &mut s_now);
    let mut flux = vec![0.0; ns];
    apply_flux(mesh, &b_now, &u0, &mut flux);
    let f_slice = |t: f64, out: &mut [f64]| {
        if let Some(fnet) = &data.f {
            let fmesh = fnet.mesh();
            let fta = fmesh.time.as_ref().unwrap();
            let s = ((t - fta.t0) / fta.spacing()).clamp(0.0, (fta.n - 1) as f64);
            let i0 = (s.floor() as usize).min(fta.n - 2);
            let w = s - i0 as f64;
            let smp = fnet.sample(k);
            for i in 0..ns {
                out[i] = (1.0 - w) * smp[i0 * ns + i] + w * smp[(i0 + 1) * ns + i];
            }
        } else {
            out.fill(0.0);
        }
    };
    let mut f_now = vec![0.0; ns];
    f_slice(0.0, &mut f_now);
    // ∂_t a at 0 (one-sided; only first-order accuracy is needed here)
    fill_a(0.0, &mut a_minus);
    fill_a(dt.min(g.mesh().time.as_ref().unwrap().t1), &mut a_plus);
    let mut utt0 = vec![0.0; ns];
    for i in 0..ns {
        let da_dt = (a_plus[i] - a_minus[i]) / dt;
        let a0 = a_minus[i];
        utt0[i] = (flux[i] - s_now[i] * f_now[i] - da_dt * ut0[i]) / a0;
    }
    let mut u_prev: Vec<f64> = (0..ns)
        .map(|i| u0[i] - dt * ut0[i] + 0.5 * dt * dt * utt0[i])
        .collect(); // ghost level at −dt
    let mut u_mid = u0;
    let mut u_next = vec![0.0; ns];

    let mut snapshots: Vec<Snapshot> = Vec::with_capacity(snap_steps.len());
    let mut full: Option<Vec<Vec<f64>>> = if opts.store_full {
        Some(vec![u_mid.clone()])
    } else {
        None
    };
    let mut failure: Option<String> = None;

    // march: levels n = 0 .. steps, with one extra step so the final
    // snapshot has a trailing level
    let total_steps = steps + 1;
    for n in 0..total_steps {
        let t = n as f64 * dt;
        fill_a(t - 0.5 * dt, &mut a_minus);
        fill_a(t + 0.5 * dt, &mut a_plus);
        fill_bs(t, &mut b_now, &mut s_now);
        f_slice(t, &mut f_now);
        apply_flux(mesh, &b_now, &u_mid, &mut flux);
        for i in 0..ns {
            let rhs = flux[i] - s_now[i] * f_now[i];
            u_next[i] =
                u_mid[i] + (a_minus[i] * (u_mid[i] - u_prev[i]) + dt * dt * rhs) / a_plus[i];
        }
        // blow-up guard
        if n % 64 == 0 || n + 1 == total_steps {
            if let Some(bad) = u_next.iter().find(|v| !v.is_finite()) {
                failure = Some(format!("non-finite value {bad} at step {n}"));
                break;
            }
        }
        if snap_steps.contains(&n) {
            snapshots.push(Snapshot {
                tau: t,
                dt,
                prev: u_prev.clone(),
                mid: u_mid.clone(),
                next: u_next.clone(),
            });
        }
        if let Some(f) = &mut full {
            if n < steps {
                f.push(u_next.clone());
            }
        }
        std::mem::swap(&mut u_prev, &mut u_mid);
        std::mem::swap(&mut u_mid, &mut u_next);
    }

    EpsSolution {
        diag: EpsSolveDiag {
            eps,
            dt,
            steps,
            max_wave_speed: speed,
            failure,
        },
        snapshots,
        full,
    }
}

/// Conservative flux divergence ∂_i(B^{ij} ∂_j u) with second-order centered
/// stencils on the periodic spatial mesh.
fn apply_flux(mesh: &Mesh, b: &[Vec<f64>], u: &[f64], out: &mut [f64]) {
    match mesh.spatial_dim() {
        1 => {
            let n = mesh.space[0].n;
            let dx2 = mesh.space[0].spacing().powi(2);
            let bx = &b[0];
            for i in 0..n {
                let ip = (i + 1) % n;
                let im = (i + n - 1) % n;
                let b_p = 0.5 * (bx[i] + bx[ip]);
                let b_m = 0.5 * (bx[im] + bx[i]);
                out[i] = (b_p * (u[ip] - u[i]) - b_m * (u[i] - u[im])) / dx2;
            }
        }
        2 => {
            let (nx, ny) = (mesh.space[0].n, mesh.space[1].n);
            let (dx, dy) = (mesh.space[0].spacing(), mesh.space[1].spacing());
            let (bxx, bxy, byy) = (&b[0], &b[1], &b[2]);
            let id = |i: usize, j: usize| i * ny + j;
            for i in 0..nx {
                let ip = (i + 1) % nx;
                let im = (i + nx - 1) % nx;
                for j in 0..ny {
                    let jp = (j + 1) % ny;
                    let jm = (j + ny - 1) % ny;
                    let c = id(i, j);
                    // diagonal fluxes
                    let bxp = 0.5 * (bxx[c] + bxx[id(ip, j)]);
                    let bxm = 0.5 * (bxx[id(im, j)] + bxx[c]);
                    let byp = 0.5 * (byy[c] + byy[id(i, jp)]);
                    let bym = 0.5 * (byy[id(i, jm)] + byy[c]);
                    let mut acc = (bxp * (u[id(ip, j)] - u[c]) - bxm * (u[c] - u[id(im, j)]))
                        / (dx * dx)
                        + (byp * (u[id(i, jp)] - u[c]) - bym * (u[c] - u[id(i, jm)])) / (dy * dy);
                    // cross terms ∂_x(B^{xy} u_y) + ∂_y(B^{xy} u_x)
                    let uy = |ii: usize, jj: usize| {
                        (u[id(ii, (jj + 1) % ny)] - u[id(ii, (jj + ny - 1) % ny)]) / (2.0 * dy)
                    };
                    let ux = |ii: usize, jj: usize| {
                        (u[id((ii + 1) % nx, jj)] - u[id((ii + nx - 1) % nx, jj)]) / (2.0 * dx)
                    };
                    acc += (bxy[id(ip, j)] * uy(ip, j) - bxy[id(im, j)] * uy(im, j)) / (2.0 * dx);
                    acc += (bxy[id(i, jp)] * ux(i, jp) - bxy[id(i, jm)] * ux(i, jm)) / (2.0 * dy);
                    out[c] = acc;
                }
            }
        }
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Closed-form oracle
// ---------------------------------------------------------------------------

/// d'Alembert solution ½[u0(x+ct) + u0(x−ct)] + (1/2c)∫_{x−ct}^{x+ct} u1 for
/// the 1+1 constant-coefficient equation, with periodic wrap. Samples are
/// interpolated with a periodic cubic (Catmull–Rom), the integral by
/// composite quadrature of the interpolant.
pub fn dalembert_oracle(
    u0: &[f64],
    u1: &[f64],
    mesh: &Mesh,
    t: f64,
    x: f64,
    c: f64,
) -> Result<f64> {
    if mesh.spatial_dim() != 1 || mesh.time.is_some() {
        return Err(Error::arg("the d'Alembert oracle is for 1-d spatial meshes"));
    }
    if u0.len() != mesh.space_len() || u1.len() != mesh.space_len() {
        return Err(Error::arg("sample lengths do not match mesh"));
    }
    let interp0 = |y: f64| catmull_rom_periodic(u0, mesh, y);
    let interp1 = |y: f64| catmull_rom_periodic(u1, mesh, y);
    let travel = 0.5 * (interp0(x + c * t) + interp0(x - c * t));
    let (a, b) = (x - c * t, x + c * t);
    let len = b - a;
    let panels = ((len / mesh.space[0].spacing() / 4.0).ceil() as usize).max(2);
    let integral = crate::testfn::quad::integrate_1d(interp1, a, b, panels);
    Ok(travel + integral / (2.0 * c))
}

fn catmull_rom_periodic(samples: &[f64], mesh: &Mesh, x: f64) -> f64 {
    let n = samples.len();
    let h = mesh.space[0].spacing();
    let s = (x / h).rem_euclid(n as f64);
    let i1 = s.floor() as usize % n;
    let th = s - s.floor();
    let i0 = (i1 + n - 1) % n;
    let i2 = (i1 + 1) % n;
    let i3 = (i1 + 2) % n;
    let (p0, p1, p2, p3) = (samples[i0], samples[i1], samples[i2], samples[i3]);
    let t2 = th * th;
    let t3 = t2 * th;
    0.5 * ((2.0 * p1)
        + (-p0 + p2) * th
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3)
}

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

/// Reference for a convergence study.
pub enum ConvergenceReference<'a> {
    /// A closed-form solution u(t, x), shared across ε.
    Exact(&'a (dyn Fn(f64, &[f64]) -> f64 + Sync)),
    /// Self-convergence against the next-finer mesh on common nodes.
    Richardson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub resolutions: Vec<usize>,
    /// L∞ errors per ε per resolution (against the reference).
    pub errors: Vec<Vec<f64>>,
    /// Fitted order per ε.
    pub orders: Vec<f64>,
}

/// Fit the empirical L∞ convergence order at t = T over meshes refined by
/// factors of two, per ε.
pub fn convergence_order(
    make_metric: &(dyn Fn(&Mesh) -> Result<MetricSplit> + Sync),
    make_data: &(dyn Fn(&Mesh) -> Result<CauchyData> + Sync),
    base_mesh: &Mesh,
    t_final: f64,
    reference: ConvergenceReference<'_>,
    opts: &SolveOptions,
) -> Result<ConvergenceReport> {
    let mut meshes = Vec::new();
    for level in 0..3 {
        let factor = 1usize << level;
        let mut m = base_mesh.clone();
        for ax in &mut m.space {
            ax.n *= factor;
        }
        if let Some(t) = &mut m.time {
            t.n = (t.n - 1) * factor + 1;
        }
        meshes.push(m);
    }
    let mut slices = Vec::new();
    let mut resolutions = Vec::new();
    for m in &meshes {
        let g = make_metric(m)?;
        let data = make_data(m)?;
        let sol = solve(&g, &data, t_final, opts)?;
        if !sol.all_complete() {
            return Err(Error::Numerical("a member failed during convergence study".into()));
        }
        resolutions.push(m.space[0].n);
        slices.push((m.spatial_part(), sol.slice_net(t_final)?));
    }
    let n_eps = slices[0].1.grid().len();
    let mut errors = vec![Vec::new(); n_eps];
    match reference {
        ConvergenceReference::Exact(u_exact) => {
            for (mesh, net) in &slices {
                for k in 0..n_eps {
                    let mut e = 0.0f64;
                    for i in 0..mesh.space_len() {
                        let x = mesh.space_coords(i);
                        e = e.max((net.sample(k)[i] - u_exact(t_final, &x)).abs());
                    }
                    errors[k].push(e);
                }
            }
        }
        ConvergenceReference::Richardson => {
            for w in slices.windows(2) {
                let (coarse_mesh, coarse) = &w[0];
                let (_, fine) = &w[1];
                for k in 0..n_eps {
                    let mut e = 0.0f64;
                    for i in 0..coarse_mesh.space_len() {
                        // common nodes: fine index = 2·i (1-d), or (2ix, 2iy)
                        let fi = match coarse_mesh.spatial_dim() {
                            1 => 2 * i,
                            2 => {
                                let ny = coarse_mesh.space[1].n;
                                let (ix, iy) = (i / ny, i % ny);
                                (2 * ix) * (2 * ny) + 2 * iy
                            }
                            _ => unreachable!(),
                        };
                        e = e.max((coarse.sample(k)[i] - fine.sample(k)[fi]).abs());
                    }
                    errors[k].push(e);
                }
            }
        }
    }
    let orders = errors
        .iter()
        .map(|e| {
            let mut acc = 0.0;
            let mut cnt = 0.0f64;
            for w in e.windows(2) {
                if w[0] > 0.0 && w[1] > 0.0 {
                    acc += (w[0] / w[1]).log2();
                    cnt += 1.0;
                }
            }
            acc / cnt.max(1.0)
        })
        .collect();
    Ok(ConvergenceReport {
        resolutions,
        errors,
        orders,
    })
}

// ---------------------------------------------------------------------------
// Domain of dependence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainOfDependenceReport {
    /// Per ε: worst |u|/‖u‖∞ outside the expanded causal future.
    pub max_outside_rel: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check that the solution vanishes (relative to its sup) outside the
/// numerically expanded causal future of the data support: the support box
/// inflated by c_max·τ plus a 2Δx collar at every snapshot time.
pub fn domain_of_dependence_check(
    g: &MetricSplit,
    data: &CauchyData,
    solution: &SolutionNet,
    tolerance: f64,
    speed_override: Option<f64>,
) -> Result<DomainOfDependenceReport> {
    let b = data
        .support_box
        .as_ref()
        .ok_or_else(|| Error::arg("domain-of-dependence check needs a declared support box"))?;
    let mesh = &solution.spatial_mesh;
    let sups = solution.sup_abs();
    let mut max_outside_rel = Vec::with_capacity(solution.members.len());
    for (k, member) in solution.members.iter().enumerate() {
        let speed = speed_override.unwrap_or_else(|| g.max_wave_speed(k));
        let mut worst: f64 = 0.0;
        for snap in &member.snapshots {
            let mut ranges = Vec::with_capacity(mesh.spatial_dim());
            for (axis, ax) in mesh.space.iter().enumerate() {
                let [lo, hi] = b.ranges[axis];
                let grow = speed * snap.tau + 2.0 * ax.spacing();
                let (lo, hi) = (lo - grow, hi + grow);
                if hi - lo >= ax.extent {
                    return Err(Error::arg(
                        "causal future wraps around the torus; shrink T or the support",
                    ));
                }
                ranges.push([lo, hi]);
            }
            for i in 0..mesh.space_len() {
                let x = mesh.space_coords(i);
                let inside = ranges.iter().zip(&x).all(|([lo, hi], xi)| {
                    // periodic membership
                    let l = mesh.space[0].extent;
                    let mut xi = *xi;
                    while xi > *hi {
                        xi -= l;
                    }
                    while xi < *lo {
                        xi += l;
                    }
                    xi <= *hi
                });
                if !inside {
                    worst = worst.max(snap.mid[i].abs());
                }
            }
        }
        max_outside_rel.push(if sups[k] > 0.0 { worst / sups[k] } else { 0.0 });
    }
    let pass = max_outside_rel.iter().all(|&v| v <= tolerance);
    Ok(DomainOfDependenceReport {
        max_outside_rel,
        tolerance,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Distributional data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionalReport {
    pub association: AssociationReport,
    pub shadow: Shadow,
    pub wave_speed: f64,
}

/// Solve with mollifier-embedded distributional data on a 1-d constant
/// (ε-independent) metric and check association of the final slice against
/// the d'Alembert shadow of the limit data.
pub fn solve_distributional(
    g: &MetricSplit,
    u0_target: Option<&DistTarget>,
    u1_target: Option<&DistTarget>,
    t_final: f64,
    battery: &[TestFunction],
    tolerance: f64,
    opts: &SolveOptions,
) -> Result<DistributionalReport> {
    if g.spatial_dim() != 1 {
        return Err(Error::arg("distributional solves are one-dimensional"));
    }
    // the closed-form shadow needs a uniform, ε-independent metric
    let (beta0, h0) = g.at_time(0, 0.0, 0);
    for k in 0..g.grid().len() {
        for flat in 0..g.mesh().len() {
            if (g.beta_at(k, flat) - beta0).abs() > 1e-12
                || (g.h_at(k, flat)[0] - h0[0]).abs() > 1e-12
            {
                return Err(Error::arg(
                    "distributional solves need a constant ε-independent metric",
                ));
            }
        }
    }
    let c = (beta0 / h0[0]).sqrt();
    let smesh = g.mesh().spatial_part();
    let zero_net = ScalarNet::from_fn(g.grid().clone(), smesh.clone(), |_, _| 0.0)?;
    let embed = |t: Option<&DistTarget>| -> Result<(ScalarNet, bool)> {
        match t {
            Some(target) => Ok((nets::mollifier_embed(target, g.grid(), &smesh)?, true)),
            None => Ok((zero_net.clone(), false)),
        }
    };
    let (u0, m0) = embed(u0_target)?;
    let (u1, m1) = embed(u1_target)?;
    let mut data = CauchyData::new(u0, u1)?;
    if m0 || m1 {
        data = data.with_mollified_flag();
    }

    // d'Alembert shadow of the limit data at t = T
    let mut parts = Vec::new();
    if let Some(t) = u0_target {
        parts.push(match t {
            DistTarget::Delta { x0 } => Shadow::TwoDeltas {
                a: x0[0] - c * t_final,
                b: x0[0] + c * t_final,
                scale: 0.5,
            },
            _ => return Err(Error::arg("only point masses are supported as u0 targets")),
        });
    }
    if let Some(t) = u1_target {
        parts.push(match t {
            DistTarget::Delta { x0 } => Shadow::Indicator {
                lo: x0[0] - c * t_final,
                hi: x0[0] + c * t_final,
                scale: 1.0 / (2.0 * c),
            },
            _ => return Err(Error::arg("only point masses are supported as u1 targets")),
        });
    }
    let shadow = match parts.len() {
        0 => Shadow::Zero,
        1 => parts.pop().unwrap(),
        _ => Shadow::Sum(parts),
    };

    let solution = solve(g, &data, t_final, opts)?;
    if !solution.all_complete() {
        return Err(Error::Numerical("a member failed during the solve".into()));
    }
    let slice = solution.slice_net(t_final)?;
    let association = association_check(&slice, Some(&shadow), battery, tolerance)?;
    Ok(DistributionalReport {
        association,
        shadow,
        wave_speed: c,
    })
}
