//! The ε-net algebra: containers for ε-indexed sampled fields, asymptotic
//! exponent estimation, test-function pairing, association checking, and
//! mollifier embedding of distributions.
//!
//! A net (u_ε)_ε is moderate when every derivative grows at most like some
//! ε^{−N} on compacta, negligible when every derivative decays faster than
//! every power ε^m. Neither class is decidable from finitely many ε samples,
//! so verdicts here are regression verdicts: a fitted exponent together with
//! a residual that flags departures from power-law behaviour.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fd_multi, fd_valid_range, EpsGrid, Mesh};
use crate::testfn::{quad, TestFunction};

/// Values whose magnitude never exceeds this are treated as exact zeros when
/// fitting exponents.
pub const ZERO_FLOOR: f64 = 1e-300;

/// An ε-indexed family of sampled fields sharing one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarNet {
    grid: EpsGrid,
    mesh: Mesh,
    samples: Vec<Vec<f64>>,
}

impl ScalarNet {
    pub fn new(grid: EpsGrid, mesh: Mesh, samples: Vec<Vec<f64>>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::arg(format!(
                "expected {} sample arrays (one per eps), got {}",
                grid.len(),
                samples.len()
            )));
        }
        let n = mesh.len();
        for (k, s) in samples.iter().enumerate() {
            if s.len() != n {
                return Err(Error::arg(format!(
                    "sample array {k} has length {} but the mesh has {n} points",
                    s.len()
                )));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg(format!(
                    "sample array {k} contains non-finite values"
                )));
            }
        }
        Ok(ScalarNet {
            grid,
            mesh,
            samples,
        })
    }

    /// Build a net by evaluating `f(ε, coords)` at every mesh point.
    /// Coordinates are passed time-first when the mesh has a time axis.
    pub fn from_fn(grid: EpsGrid, mesh: Mesh, f: impl Fn(f64, &[f64]) -> f64 + Sync) -> Result<Self> {
        let shape = mesh.shape();
        let coords_of = |flat: usize| -> Vec<f64> {
            let mut c = Vec::with_capacity(shape.len());
            let mut rem = flat;
            let mut divs = vec![1usize; shape.len()];
            for i in (0..shape.len().saturating_sub(1)).rev() {
                divs[i] = divs[i + 1] * shape[i + 1];
            }
            for (i, d) in divs.iter().enumerate() {
                let idx = rem / d;
                rem %= d;
                let x = if mesh.time.is_some() && i == 0 {
                    mesh.time.as_ref().unwrap().coord(idx)
                } else {
                    let sp = i - usize::from(mesh.time.is_some());
                    mesh.space[sp].coord(idx)
                };
                c.push(x);
            }
            c
        };
        let samples: Vec<Vec<f64>> = grid
            .values()
            .par_iter()
            .map(|&eps| (0..mesh.len()).map(|i| f(eps, &coords_of(i))).collect())
            .collect();
        ScalarNet::new(grid, mesh, samples)
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.samples[k]
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    /// Per-ε supremum of |u_ε| over the whole mesh.
    pub fn sup_abs(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| s.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Pointwise linear combination a·self + b·other.
    pub fn lincomb(&self, a: f64, other: &ScalarNet, b: f64) -> Result<ScalarNet> {
        if self.mesh != other.mesh || self.grid != other.grid {
            return Err(Error::arg("nets must share grid and mesh"));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(u, v)| u.iter().zip(v).map(|(x, y)| a * x + b * y).collect())
            .collect();
        ScalarNet::new(self.grid.clone(), self.mesh.clone(), samples)
    }

    /// Extract the spatial slice at a given time index.
    pub fn time_slice(&self, it: usize) -> Result<ScalarNet> {
        let t = self
            .mesh
            .time
            .as_ref()
            .ok_or_else(|| Error::arg("net has no time axis"))?;
        if it >= t.n {
            return Err(Error::arg("time index out of range"));
        }
        let ns = self.mesh.space_len();
        let samples = self
            .samples
            .iter()
            .map(|s| s[it * ns..(it + 1) * ns].to_vec())
            .collect();
        ScalarNet::new(self.grid.clone(), self.mesh.spatial_part(), samples)
    }
}

/// A fitted ε-power law: sup ≈ C · ε^{−exponent}.
///
/// `exponent` is the least-squares slope of log(sup) against log(1/ε);
/// `residual` is the RMS misfit in log units. A net that is identically zero
/// (all suprema below [`ZERO_FLOOR`]) carries `exponent = -∞`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticEstimate {
    pub exponent: f64,
    pub residual: f64,
    pub sup_values: Vec<f64>,
}

impl AsymptoticEstimate {
    pub fn is_zero_net(&self) -> bool {
        self.exponent == f64::NEG_INFINITY
    }

    /// Decay exponent (positive when the net decays): sup ≈ C·ε^{decay}.
    pub fn decay_exponent(&self) -> f64 {
        -self.exponent
    }

    /// Whether the fit is consistent with a power law at the given residual
    /// threshold (log units).
    pub fn power_law(&self, residual_threshold: f64) -> bool {
        self.is_zero_net() || self.residual <= residual_threshold
    }
}

/// Least-squares fit of log(sup) against log(1/ε).
pub fn estimate_order(sup_values: &[f64], grid: &EpsGrid) -> Result<AsymptoticEstimate> {
    if sup_values.len() != grid.len() {
        return Err(Error::arg(format!(
            "got {} sup values for an eps grid of length {}",
            sup_values.len(),
            grid.len()
        )));
    }
    if sup_values.iter().all(|&v| v.abs() < ZERO_FLOOR) {
        return Ok(AsymptoticEstimate {
            exponent: f64::NEG_INFINITY,
            residual: 0.0,
            sup_values: sup_values.to_vec(),
        });
    }
    if sup_values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::arg(
            "sup values must be positive and finite (or all below the zero floor)",
        ));
    }
    let xs: Vec<f64> = grid.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = sup_values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = ybar + slope * (x - xbar);
            (y - fit) * (y - fit)
        })
        .sum();
    Ok(AsymptoticEstimate {
        exponent: slope,
        residual: (ss / n).sqrt(),
        sup_values: sup_values.to_vec(),
    })
}

/// Options shared by the moderateness / negligibility classifiers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Residual threshold in log units above which a fit is flagged as
    /// "not power-law".
    pub residual_threshold: f64,
    /// Margin allowed when comparing fitted decay exponents against integer
    /// targets.
    pub exponent_margin: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            residual_threshold: 0.2,
            exponent_margin: 0.05,
        }
    }
}

/// Per-derivative-order asymptotics together with a moderateness verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModerateVerdict {
    pub moderate: bool,
    /// Derivative multi-indices (axis orders, time first) with their fits.
    pub per_order: Vec<(Vec<usize>, AsymptoticEstimate)>,
}

/// Classify a net as moderate by fitting the growth of sup-norms of the
/// requested finite-difference derivatives.
pub fn classify_moderate(
    net: &ScalarNet,
    derivative_orders: &[Vec<usize>],
    opts: &ClassifyOptions,
) -> Result<ModerateVerdict> {
    let mut per_order = Vec::with_capacity(derivative_orders.len());
    for orders in derivative_orders {
        let sup = derivative_sup(net, orders)?;
        per_order.push((orders.clone(), estimate_order(&sup, &net.grid)?));
    }
    let moderate = per_order
        .iter()
        .all(|(_, est)| est.power_law(opts.residual_threshold));
    Ok(ModerateVerdict { moderate, per_order })
}

/// Per-ε sup of the requested mixed finite-difference derivative, restricted
/// to the index region where non-periodic stencils are valid.
fn derivative_sup(net: &ScalarNet, orders: &[usize]) -> Result<Vec<f64>> {
    let mesh = &net.mesh;
    if orders.len() != mesh.num_axes() {
        return Err(Error::arg(
            "derivative multi-index length does not match mesh axes",
        ));
    }
    let ranges: Vec<_> = orders
        .iter()
        .enumerate()
        .map(|(axis, &ord)| fd_valid_range(mesh, axis, ord))
        .collect();
    net.samples
        .par_iter()
        .map(|s| {
            let d = fd_multi(mesh, s, orders)?;
            Ok(crate::grid::sup_abs_box(mesh, &d, &ranges))
        })
        .collect()
}

/// Negligibility verdict: decay orders the net was tested against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NegligibleVerdict {
    /// (m, negligible up to order m) pairs.
    pub per_m: Vec<(i32, bool)>,
    pub estimate: AsymptoticEstimate,
}

/// Classify a net as negligible up to the requested orders m, using the
/// fitted decay exponent of the sup-norm (derivative order 0).
pub fn classify_negligible(
    net: &ScalarNet,
    test_orders: &[i32],
    opts: &ClassifyOptions,
) -> Result<NegligibleVerdict> {
    let zeros = vec![0usize; net.mesh.num_axes()];
    let sup = derivative_sup(net, &zeros)?;
    let estimate = estimate_order(&sup, &net.grid)?;
    let per_m = test_orders
        .iter()
        .map(|&m| {
            let ok = estimate.is_zero_net()
                || (estimate.power_law(opts.residual_threshold)
                    && estimate.decay_exponent() >= m as f64 - opts.exponent_margin);
            (m, ok)
        })
        .collect();
    Ok(NegligibleVerdict { per_m, estimate })
}

/// Quadrature pairing ⟨u_ε, φ⟩ per ε on a spatial net (composite trapezoid on
/// the uniform periodic mesh, which is the plain Riemann sum there).
pub fn pair(net: &ScalarNet, phi: &TestFunction) -> Result<Vec<f64>> {
    let mesh = &net.mesh;
    if mesh.time.is_some() {
        return Err(Error::arg("pair expects a spatial net; take a time slice first"));
    }
    if phi.dim() != mesh.spatial_dim() {
        return Err(Error::arg("test function dimension does not match mesh"));
    }
    for (axis, [lo, hi]) in phi.support_box().iter().enumerate() {
        if *lo < 0.0 || *hi > mesh.space[axis].extent {
            return Err(Error::arg(
                "test-function support box exceeds the mesh domain",
            ));
        }
    }
    let cell = mesh.space_cell();
    let phi_vals: Vec<f64> = (0..mesh.space_len())
        .map(|i| phi.eval(&mesh.space_coords(i)))
        .collect();
    Ok(net
        .samples
        .iter()
        .map(|s| s.iter().zip(&phi_vals).map(|(u, p)| u * p).sum::<f64>() * cell)
        .collect())
}

/// Exactly pairable candidate distributional shadows (all one-dimensional
/// except the point mass).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Shadow {
    Zero,
    /// scale · δ_point
    Delta { point: Vec<f64>, scale: f64 },
    /// scale · (δ_a + δ_b)
    TwoDeltas { a: f64, b: f64, scale: f64 },
    /// Heaviside jump at x0: ⟨H, φ⟩ = ∫_{x > x0} φ
    Heaviside { x0: f64 },
    /// scale · 1_(lo,hi)
    Indicator { lo: f64, hi: f64, scale: f64 },
    /// Sum of shadows.
    Sum(Vec<Shadow>),
}

impl Shadow {
    /// Exact pairing ⟨shadow, φ⟩ by closed form or fine quadrature of φ.
    pub fn pair(&self, phi: &TestFunction) -> Result<f64> {
        let quad_phi = |lo: f64, hi: f64| {
            let sb = phi.support_box()[0];
            let a = lo.max(sb[0]);
            let b = hi.min(sb[1]);
            if a >= b {
                0.0
            } else {
                quad::integrate_1d(|x| phi.eval(&[x]), a, b, 64)
            }
        };
        match self {
            Shadow::Zero => Ok(0.0),
            Shadow::Delta { point, scale } => {
                if point.len() != phi.dim() {
                    return Err(Error::arg("shadow/test-function dimension mismatch"));
                }
                Ok(scale * phi.eval(point))
            }
            Shadow::TwoDeltas { a, b, scale } => {
                if phi.dim() != 1 {
                    return Err(Error::arg("TwoDeltas shadow is one-dimensional"));
                }
                Ok(scale * (phi.eval(&[*a]) + phi.eval(&[*b])))
            }
            Shadow::Heaviside { x0 } => {
                if phi.dim() != 1 {
                    return Err(Error::arg("Heaviside shadow is one-dimensional"));
                }
                Ok(quad_phi(*x0, f64::INFINITY))
            }
            Shadow::Indicator { lo, hi, scale } => {
                if phi.dim() != 1 {
                    return Err(Error::arg("Indicator shadow is one-dimensional"));
                }
                Ok(scale * quad_phi(*lo, *hi))
            }
            Shadow::Sum(parts) => {
                let mut acc = 0.0;
                for p in parts {
                    acc += p.pair(phi)?;
                }
                Ok(acc)
            }
        }
    }
}

/// Association diagnostics for a single test function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingTrace {
    pub pairings: Vec<f64>,
    /// Richardson-extrapolated limit of the pairings along the ε-tail.
    pub limit: f64,
    /// |limit − ⟨shadow, φ⟩| when a candidate shadow was supplied.
    pub deviation: Option<f64>,
    /// Whether the pairing differences shrink along the ε-tail.
    pub cauchy: bool,
}

/// Report of an association (distributional-shadow) check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssociationReport {
    pub per_phi: Vec<PairingTrace>,
    pub associated: bool,
    pub tolerance: f64,
}

/// Richardson extrapolation of a sequence sampled on a geometric ε-grid,
/// assuming p(ε) ≈ L + C·ε^r on the tail.
pub fn richardson_limit(p: &[f64]) -> f64 {
    let n = p.len();
    if n < 3 {
        return p[n - 1];
    }
    let d1 = p[n - 2] - p[n - 3];
    let d2 = p[n - 1] - p[n - 2];
    if d1.abs() < 1e-300 || d2.abs() < 1e-300 {
        return p[n - 1];
    }
    let rho = d2 / d1;
    if rho > 0.0 && rho < 0.95 {
        p[n - 1] + d2 * rho / (1.0 - rho)
    } else {
        p[n - 1]
    }
}

/// Check whether a net is associated with a candidate shadow by pairing it
/// against a battery of test functions and extrapolating along the ε-tail.
pub fn association_check(
    net: &ScalarNet,
    candidate_shadow: Option<&Shadow>,
    battery: &[TestFunction],
    tolerance: f64,
) -> Result<AssociationReport> {
    if battery.is_empty() {
        return Err(Error::arg("association check needs a nonempty battery"));
    }
    let mut per_phi = Vec::with_capacity(battery.len());
    for phi in battery {
        let pairings = pair(net, phi)?;
        let limit = richardson_limit(&pairings);
        let deviation = match candidate_shadow {
            Some(s) => Some((limit - s.pair(phi)?).abs()),
            None => None,
        };
        let tail = net.grid.tail_indices();
        let diffs: Vec<f64> = pairings[tail]
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .collect();
        let cauchy = diffs.windows(2).all(|w| w[1] <= w[0].max(tolerance))
            && diffs.last().map_or(true, |d| *d <= tolerance);
        per_phi.push(PairingTrace {
            pairings,
            limit,
            deviation,
            cauchy,
        });
    }
    let associated = per_phi.iter().all(|t| {
        t.cauchy && t.deviation.map_or(true, |d| d <= tolerance)
    });
    Ok(AssociationReport {
        per_phi,
        associated,
        tolerance,
    })
}

// ---------------------------------------------------------------------------
// Mollifier embedding
// ---------------------------------------------------------------------------

/// The fixed even mollifier profile exp(−1/(1−s²)) on the unit ball,
/// normalized to unit integral in `dim` dimensions.
#[derive(Debug, Clone)]
pub struct Mollifier {
    dim: usize,
    norm: f64,
}

impl Mollifier {
    pub fn standard(dim: usize) -> Result<Self> {
        let norm = match dim {
            1 => quad::integrate_1d(|s| bump_profile(s * s), -1.0, 1.0, 64),
            2 => {
                2.0 * std::f64::consts::PI
                    * quad::integrate_1d(|r| r * bump_profile(r * r), 0.0, 1.0, 64)
            }
            _ => return Err(Error::arg("mollifier supports dimensions 1 and 2")),
        };
        Ok(Mollifier { dim, norm })
    }

    /// ρ(x), unit integral, support in the unit ball.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        bump_profile(r2) / self.norm
    }

    /// ρ_ε(x) = ε^{−d} ρ(x/ε).
    pub fn eval_scaled(&self, eps: f64, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| v / eps).collect();
        self.eval(&y) / eps.powi(self.dim as i32)
    }
}

fn bump_profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Distributions (and sampled continuous functions) that can be embedded as
/// nets by convolution with ρ_ε.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum DistTarget {
    /// Point mass at x0 (any supported dimension).
    Delta { x0: Vec<f64> },
    /// Heaviside step H(x − x0) along the first axis (1-d meshes).
    Heaviside { x0: f64 },
    /// Kink (x − x0)_+ along the first axis (1-d meshes).
    Kink { x0: f64 },
    /// Samples of a continuous function on the target mesh.
    Sampled { values: Vec<f64> },
}

/// Embed a distribution as the net of its mollifications x ↦ (ρ_ε ∗ u)(x).
///
/// The mesh must resolve the smallest ε (spacing ≤ ε_min/4). Point masses and
/// sampled functions are convolved discretely with quadrature-renormalized
/// weights; step and kink targets are convolved analytically so no periodic
/// wrap-around is introduced.
pub fn mollifier_embed(target: &DistTarget, grid: &EpsGrid, mesh: &Mesh) -> Result<ScalarNet> {
    if mesh.time.is_some() {
        return Err(Error::arg("mollifier_embed expects a spatial mesh"));
    }
    let d = mesh.spatial_dim();
    let max_spacing = mesh
        .spacings()
        .into_iter()
        .fold(0.0f64, f64::max);
    if max_spacing > grid.min() / 4.0 {
        return Err(Error::Mesh(format!(
            "mesh spacing {max_spacing:.3e} too coarse for eps_min {:.3e} (need spacing <= eps_min/4)",
            grid.min()
        )));
    }
    let rho = Mollifier::standard(d)?;
    match target {
        DistTarget::Delta { x0 } => {
            if x0.len() != d {
                return Err(Error::arg("delta location dimension mismatch"));
            }
            for (axis, &c) in x0.iter().enumerate() {
                if c < 0.0 || c >= mesh.space[axis].extent {
                    return Err(Error::arg("delta location outside mesh"));
                }
            }
            let samples: Vec<Vec<f64>> = grid
                .values()
                .par_iter()
                .map(|&eps| {
                    let mut s: Vec<f64> = (0..mesh.space_len())
                        .map(|i| {
                            let x = mesh.space_coords(i);
                            let dx: Vec<f64> = x
                                .iter()
                                .zip(x0)
                                .enumerate()
                                .map(|(a, (xi, ci))| torus_dist(xi - ci, mesh.space[a].extent))
                                .collect();
                            rho.eval_scaled(eps, &dx)
                        })
                        .collect();
                    // renormalize so the discrete integral is exactly one
                    let mass: f64 = s.iter().sum::<f64>() * mesh.space_cell();
                    if mass > 0.0 {
                        for v in &mut s {
                            *v /= mass;
                        }
                    }
                    s
                })
                .collect();
            ScalarNet::new(grid.clone(), mesh.clone(), samples)
        }
        DistTarget::Heaviside { x0 } | DistTarget::Kink { x0 } => {
            if d != 1 {
                return Err(Error::arg("step and kink targets need a 1-d mesh"));
            }
            if *x0 < 0.0 || *x0 >= mesh.space[0].extent {
                return Err(Error::arg("jump location outside mesh"));
            }
            let kink = matches!(target, DistTarget::Kink { .. });
            let samples: Vec<Vec<f64>> = grid
                .values()
                .par_iter()
                .map(|&eps| {
                    (0..mesh.space_len())
                        .map(|i| {
                            let u = mesh.space[0].coord(i) - x0;
                            if kink {
                                mollified_kink(&rho, eps, u)
                            } else {
                                mollified_step(&rho, eps, u)
                            }
                        })
                        .collect()
                })
                .collect();
            ScalarNet::new(grid.clone(), mesh.clone(), samples)
        }
        DistTarget::Sampled { values } => {
            if values.len() != mesh.space_len() {
                return Err(Error::arg("sampled target length does not match mesh"));
            }
            let samples: Vec<Vec<f64>> = grid
                .values()
                .par_iter()
                .map(|&eps| convolve_periodic(values, mesh, &rho, eps))
                .collect();
            ScalarNet::new(grid.clone(), mesh.clone(), samples)
        }
    }
}

/// Signed distance on a circle of circumference `extent`.
fn torus_dist(mut d: f64, extent: f64) -> f64 {
    d %= extent;
    if d > 0.5 * extent {
        d -= extent;
    } else if d < -0.5 * extent {
        d += extent;
    }
    d
}

/// (ρ_ε ∗ H)(u) for the unit step at 0, by quadrature over the kernel.
pub fn mollified_step(rho: &Mollifier, eps: f64, u: f64) -> f64 {
    let hi = (u / eps).min(1.0);
    if hi <= -1.0 {
        return 0.0;
    }
    quad::integrate_1d(|s| rho.eval(&[s]), -1.0, hi, 24)
}

/// (ρ_ε ∗ u_+)(u) for the kink max(·,0) at 0.
pub fn mollified_kink(rho: &Mollifier, eps: f64, u: f64) -> f64 {
    let hi = (u / eps).min(1.0);
    if hi <= -1.0 {
        return 0.0;
    }
    quad::integrate_1d(|s| rho.eval(&[s]) * (u - eps * s), -1.0, hi, 24)
}

/// Discrete periodic convolution with ρ_ε, weights renormalized to unit mass
/// so constants are reproduced exactly.
pub fn convolve_periodic(values: &[f64], mesh: &Mesh, rho: &Mollifier, eps: f64) -> Vec<f64> {
    match mesh.spatial_dim() {
        1 => {
            let n = mesh.space[0].n;
            let h = mesh.space[0].spacing();
            let reach = (eps / h).ceil() as isize;
            let mut w = Vec::with_capacity(2 * reach as usize + 1);
            for j in -reach..=reach {
                w.push(rho.eval_scaled(eps, &[j as f64 * h]) * h);
            }
            let mass: f64 = w.iter().sum();
            for v in &mut w {
                *v /= mass;
            }
            (0..n)
                .map(|i| {
                    let mut acc = 0.0;
                    for (jj, wv) in w.iter().enumerate() {
                        let j = jj as isize - reach;
                        let k = (i as isize - j).rem_euclid(n as isize) as usize;
                        acc += wv * values[k];
                    }
                    acc
                })
                .collect()
        }
        2 => {
            let (nx, ny) = (mesh.space[0].n, mesh.space[1].n);
            let (hx, hy) = (mesh.space[0].spacing(), mesh.space[1].spacing());
            let (rx, ry) = ((eps / hx).ceil() as isize, (eps / hy).ceil() as isize);
            let mut w = Vec::new();
            for jx in -rx..=rx {
                for jy in -ry..=ry {
                    let v = rho.eval_scaled(eps, &[jx as f64 * hx, jy as f64 * hy]) * hx * hy;
                    if v != 0.0 {
                        w.push((jx, jy, v));
                    }
                }
            }
            let mass: f64 = w.iter().map(|(_, _, v)| v).sum();
            let w: Vec<(isize, isize, f64)> =
                w.into_iter().map(|(a, b, v)| (a, b, v / mass)).collect();
            let mut out = vec![0.0; nx * ny];
            for ix in 0..nx {
                for iy in 0..ny {
                    let mut acc = 0.0;
                    for &(jx, jy, wv) in &w {
                        let kx = (ix as isize - jx).rem_euclid(nx as isize) as usize;
                        let ky = (iy as isize - jy).rem_euclid(ny as isize) as usize;
                        acc += wv * values[kx * ny + ky];
                    }
                    out[ix * ny + iy] = acc;
                }
            }
            out
        }
        _ => unreachable!(),
    }
}
