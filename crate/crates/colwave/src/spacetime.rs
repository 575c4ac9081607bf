//! Generalized Lorentz metrics in globally hyperbolic split form
//! g_ε = −β_ε dt² + (h_ε)_t on [t0,t1] × Tᵈ, concrete example spacetimes,
//! mollification of continuous metrics, and numerical verifiers for the
//! weak-singularity condition (A), the uniform-timelike condition (B), and
//! the metric-splitting bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fd_multi, fd_valid_range, sup_abs_box, EpsGrid, Mesh};
use crate::nets::{
    self, estimate_order, AsymptoticEstimate, Mollifier, ScalarNet,
};
use crate::riesz::hadamard::PointMetric;

/// Number of independent components of a d×d symmetric matrix.
pub fn sym_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Symmetric 2×2 minimum eigenvalue; for 1×1 the entry itself.
pub fn sym_min_eig(comps: &[f64]) -> f64 {
    match comps.len() {
        1 => comps[0],
        3 => {
            let (a, b, c) = (comps[0], comps[1], comps[2]);
            0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt()
        }
        _ => panic!("sym_min_eig expects 1 or 3 components"),
    }
}

/// Symmetric determinant.
pub fn sym_det(comps: &[f64]) -> f64 {
    match comps.len() {
        1 => comps[0],
        3 => comps[0] * comps[2] - comps[1] * comps[1],
        _ => panic!("sym_det expects 1 or 3 components"),
    }
}

/// Symmetric inverse, same component layout.
pub fn sym_inv(comps: &[f64]) -> Vec<f64> {
    match comps.len() {
        1 => vec![1.0 / comps[0]],
        3 => {
            let det = sym_det(comps);
            vec![comps[2] / det, -comps[1] / det, comps[0] / det]
        }
        _ => panic!("sym_inv expects 1 or 3 components"),
    }
}

/// A generalized Lorentz metric −β dt² + hₜ stored as nets of β and the
/// independent spatial components of h (xx | xx, xy, yy).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSplit {
    grid: EpsGrid,
    mesh: Mesh,
    beta: ScalarNet,
    h: Vec<ScalarNet>,
    /// Whether the construction involved per-ε mollified profiles; drives
    /// the mesh-vs-ε resolution rules downstream.
    pub mollified: bool,
}

impl MetricSplit {
    /// Construct from per-ε field closures. β must be positive and finite at
    /// every sample; h must be finite. Degeneracy of h is *not* rejected
    /// here — the condition checks report it — but the solver refuses
    /// metrics that fail validation.
    pub fn from_fields(
        grid: EpsGrid,
        mesh: Mesh,
        beta: impl Fn(f64, &[f64]) -> f64 + Sync,
        h: impl Fn(f64, &[f64]) -> Vec<f64> + Sync,
    ) -> Result<Self> {
        if mesh.time.is_none() {
            return Err(Error::arg("metric mesh needs a time axis"));
        }
        let d = mesh.spatial_dim();
        let beta_net = ScalarNet::from_fn(grid.clone(), mesh.clone(), |e, p| beta(e, p))?;
        if beta_net.samples().iter().any(|s| s.iter().any(|&b| b <= 0.0)) {
            return Err(Error::arg("beta must be positive at every sample"));
        }
        let mut h_nets = Vec::with_capacity(sym_len(d));
        for c in 0..sym_len(d) {
            h_nets.push(ScalarNet::from_fn(grid.clone(), mesh.clone(), |e, p| {
                let comps = h(e, p);
                assert_eq!(comps.len(), sym_len(d), "h closure returned wrong length");
                comps[c]
            })?);
        }
        Ok(MetricSplit {
            grid,
            mesh,
            beta: beta_net,
            h: h_nets,
            mollified: false,
        })
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn spatial_dim(&self) -> usize {
        self.mesh.spatial_dim()
    }

    pub fn beta(&self) -> &ScalarNet {
        &self.beta
    }

    pub fn h_component(&self, c: usize) -> &ScalarNet {
        &self.h[c]
    }

    pub fn num_h_components(&self) -> usize {
        self.h.len()
    }

    /// h components at one sample of one ε member.
    pub fn h_at(&self, k_eps: usize, flat: usize) -> Vec<f64> {
        self.h.iter().map(|c| c.sample(k_eps)[flat]).collect()
    }

    pub fn beta_at(&self, k_eps: usize, flat: usize) -> f64 {
        self.beta.sample(k_eps)[flat]
    }

    /// Flat index of (time index, flat spatial index).
    pub fn idx(&self, it: usize, ispace: usize) -> usize {
        it * self.mesh.space_len() + ispace
    }

    /// Maximal coordinate wave speed sup √(β · λmax(h⁻¹)) for one ε.
    pub fn max_wave_speed(&self, k_eps: usize) -> f64 {
        let mut c2 = 0.0f64;
        for flat in 0..self.mesh.len() {
            let beta = self.beta_at(k_eps, flat);
            let h = self.h_at(k_eps, flat);
            let lam_min = sym_min_eig(&h);
            if lam_min <= 0.0 {
                return f64::INFINITY;
            }
            c2 = c2.max(beta / lam_min);
        }
        c2.sqrt()
    }

    /// Solver-grade validation: h positive definite at every sample of
    /// every ε.
    pub fn validate_for_solve(&self) -> Result<()> {
        for k in 0..self.grid.len() {
            for flat in 0..self.mesh.len() {
                let h = self.h_at(k, flat);
                if sym_min_eig(&h) <= 0.0 {
                    return Err(Error::Numerical(format!(
                        "h degenerates at eps index {k}, sample {flat}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The normalization net V_ε = √β_ε of the unit normal ξ̂ = (1/√β)∂_t.
    pub fn sigma_field(&self) -> SigmaField {
        let samples = self
            .beta
            .samples()
            .iter()
            .map(|s| s.iter().map(|b| b.sqrt()).collect())
            .collect();
        SigmaField {
            v: ScalarNet::new(self.grid.clone(), self.mesh.clone(), samples)
                .expect("beta is positive and finite"),
        }
    }

    /// Interpolate β and h linearly in time at (t, spatial index) for one ε.
    /// Time is clamped to the mesh interval.
    pub fn at_time(&self, k_eps: usize, t: f64, ispace: usize) -> (f64, Vec<f64>) {
        let ta = self.mesh.time.as_ref().unwrap();
        let s = ((t - ta.t0) / ta.spacing()).clamp(0.0, (ta.n - 1) as f64);
        let i0 = (s.floor() as usize).min(ta.n - 2);
        let w = s - i0 as f64;
        let f0 = self.idx(i0, ispace);
        let f1 = self.idx(i0 + 1, ispace);
        let beta = (1.0 - w) * self.beta_at(k_eps, f0) + w * self.beta_at(k_eps, f1);
        let h = self
            .h
            .iter()
            .map(|c| (1.0 - w) * c.sample(k_eps)[f0] + w * c.sample(k_eps)[f1])
            .collect();
        (beta, h)
    }

    /// View one ε member as a pointwise-evaluable metric (multilinear
    /// interpolation), e.g. for geodesic integration.
    pub fn point_metric(&self, k_eps: usize) -> SampledPointMetric<'_> {
        SampledPointMetric {
            metric: self,
            k_eps,
        }
    }

    /// Christoffel symbols Γ^c_{ab} of one ε member at every mesh sample,
    /// by centered differences of the split components. Layout:
    /// `out[flat][(c·n + a)·n + b]` with n = 1 + d and axis 0 = time.
    pub fn christoffels(&self, k_eps: usize) -> Result<Vec<Vec<f64>>> {
        let d = self.spatial_dim();
        let n = d + 1;
        let mesh = &self.mesh;
        // partial derivatives of beta and h components along every axis
        let mut unit = vec![0usize; n];
        let mut dbeta = Vec::with_capacity(n);
        let mut dh = Vec::with_capacity(n);
        for axis in 0..n {
            unit.fill(0);
            unit[axis] = 1;
            dbeta.push(fd_multi(mesh, self.beta.sample(k_eps), &unit)?);
            let mut per_comp = Vec::with_capacity(self.h.len());
            for c in &self.h {
                per_comp.push(fd_multi(mesh, c.sample(k_eps), &unit)?);
            }
            dh.push(per_comp);
        }
        let d_spatial = d;
        let sym_idx = move |i: usize, j: usize| -> usize {
            if d_spatial == 1 {
                0
            } else {
                match (i.min(j), i.max(j)) {
                    (0, 0) => 0,
                    (0, 1) => 1,
                    (1, 1) => 2,
                    _ => unreachable!(),
                }
            }
        };
        let out: Vec<Vec<f64>> = (0..mesh.len())
            .into_par_iter()
            .map(|flat| {
                let beta = self.beta_at(k_eps, flat);
                let h = self.h_at(k_eps, flat);
                let hinv = sym_inv(&h);
                let ginv_at = |a: usize, b: usize| -> f64 {
                    if a == 0 && b == 0 {
                        -1.0 / beta
                    } else if a == 0 || b == 0 {
                        0.0
                    } else {
                        hinv[sym_idx(a - 1, b - 1)]
                    }
                };
                let dg = |e: usize, a: usize, b: usize| -> f64 {
                    if a == 0 && b == 0 {
                        -dbeta[e][flat]
                    } else if a == 0 || b == 0 {
                        0.0
                    } else {
                        dh[e][sym_idx(a - 1, b - 1)][flat]
                    }
                };
                let mut chr = vec![0.0; n * n * n];
                for c in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            let mut acc = 0.0;
                            for e in 0..n {
                                acc += ginv_at(c, e) * (dg(a, e, b) + dg(b, e, a) - dg(e, a, b));
                            }
                            chr[(c * n + a) * n + b] = 0.5 * acc;
                        }
                    }
                }
                chr
            })
            .collect();
        Ok(out)
    }
}

/// The time one-form σ = dt with its normalization net V_ε = √β_ε
/// (so that ξ̂ = ξ/V = (1/√β)∂_t is the unit normal of the slices).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaField {
    v: ScalarNet,
}

impl SigmaField {
    pub fn v(&self) -> &ScalarNet {
        &self.v
    }
}

/// A fixed background Riemannian metric used for all ‖·‖_m norms. The
/// default is the flat product metric dt² + δ_ij dxⁱdxʲ, in which the norm
/// of a tensor is its Frobenius norm; `rho_scale` scales the flat spatial
/// metric used as the candidate lower bound ρ in the splitting check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BackgroundMetric {
    pub rho_scale: f64,
}

impl Default for BackgroundMetric {
    fn default() -> Self {
        BackgroundMetric { rho_scale: 1.0 }
    }
}

/// Pointwise-evaluable view of one ε member of a [`MetricSplit`]
/// (linear interpolation per axis; periodic in space, clamped in time).
pub struct SampledPointMetric<'a> {
    metric: &'a MetricSplit,
    k_eps: usize,
}

impl PointMetric for SampledPointMetric<'_> {
    fn dim(&self) -> usize {
        self.metric.spatial_dim() + 1
    }

    fn metric(&self, p: &[f64], out: &mut [f64]) {
        let m = self.metric;
        let mesh = m.mesh();
        let d = m.spatial_dim();
        let n = d + 1;
        // interpolation stencil per spatial axis
        let mut nodes: Vec<(usize, usize, f64)> = Vec::with_capacity(d);
        for (a, ax) in mesh.space.iter().enumerate() {
            let s = (p[a + 1] / ax.spacing()).rem_euclid(ax.n as f64);
            let i0 = (s.floor() as usize) % ax.n;
            nodes.push((i0, (i0 + 1) % ax.n, s - s.floor()));
        }
        let mut beta = 0.0;
        let mut h = vec![0.0; sym_len(d)];
        let corners = 1usize << d;
        for corner in 0..corners {
            let mut ispace = 0usize;
            let mut w = 1.0;
            for (a, &(i0, i1, frac)) in nodes.iter().enumerate() {
                let (i, wa) = if corner >> a & 1 == 0 {
                    (i0, 1.0 - frac)
                } else {
                    (i1, frac)
                };
                let stride = if a == 0 && d == 2 { mesh.space[1].n } else { 1 };
                ispace += i * stride;
                w *= wa;
            }
            let (b, hc) = m.at_time(self.k_eps, p[0], ispace);
            beta += w * b;
            for (c, v) in hc.iter().enumerate() {
                h[c] += w * v;
            }
        }
        out.fill(0.0);
        out[0] = -beta;
        match d {
            1 => out[n + 1] = h[0],
            2 => {
                out[n + 1] = h[0];
                out[n + 2] = h[1];
                out[2 * n + 1] = h[1];
                out[2 * n + 2] = h[2];
            }
            _ => unreachable!(),
        }
    }

    fn domain(&self) -> Option<Vec<[f64; 2]>> {
        let mesh = self.metric.mesh();
        let t = mesh.time.as_ref().unwrap();
        let mut dom = vec![[t.t0, t.t1]];
        for _ in &mesh.space {
            dom.push([f64::NEG_INFINITY, f64::INFINITY]);
        }
        Some(dom)
    }
}

// ---------------------------------------------------------------------------
// Example spacetimes
// ---------------------------------------------------------------------------

/// Flat Minkowski metric: β ≡ 1, h ≡ identity, ε-independent.
pub fn make_minkowski(mesh: &Mesh, grid: &EpsGrid) -> Result<MetricSplit> {
    let d = mesh.spatial_dim();
    MetricSplit::from_fields(grid.clone(), mesh.clone(), |_, _| 1.0, move |_, _| {
        identity_h(d)
    })
}

fn identity_h(d: usize) -> Vec<f64> {
    match d {
        1 => vec![1.0],
        2 => vec![1.0, 0.0, 1.0],
        _ => unreachable!(),
    }
}

/// Generalized Robertson–Walker metric −dt² + f_ε(t)²·h0 with a warp net f
/// and an ε-indexed spatial metric h0 (constant in time).
///
/// The warp must be positive on the mesh; violations are argument errors.
pub fn make_robertson_walker(
    mesh: &Mesh,
    grid: &EpsGrid,
    warp: impl Fn(f64, f64) -> f64 + Sync,
    h0: impl Fn(f64, &[f64]) -> Vec<f64> + Sync,
) -> Result<MetricSplit> {
    let ta = mesh
        .time
        .as_ref()
        .ok_or_else(|| Error::arg("mesh needs a time axis"))?;
    for eps in grid.iter() {
        for it in 0..ta.n {
            if !(warp(eps, ta.coord(it)) > 0.0) {
                return Err(Error::arg(format!(
                    "warp function nonpositive at eps = {eps}, t = {}",
                    ta.coord(it)
                )));
            }
        }
    }
    MetricSplit::from_fields(
        grid.clone(),
        mesh.clone(),
        |_, _| 1.0,
        |eps, p| {
            let f = warp(eps, p[0]);
            let f2 = f * f;
            h0(eps, &p[1..]).iter().map(|c| f2 * c).collect()
        },
    )
}

/// Impulsive pp-wave in Rosen form, restricted to its plane-symmetric slab:
/// β ≡ 1 and hₜ = diag((1 + k(t))², (1 − k(t))²) with k the kink profile
/// t₊ — sampled exactly (ε-independent) or mollified per ε.
///
/// The Rosen chart degenerates where 1 − t₊ → 0, so the time extent must
/// stay below 1.
pub fn make_pp_wave_rosen(mesh: &Mesh, grid: &EpsGrid, kink_mollified: bool) -> Result<MetricSplit> {
    if mesh.spatial_dim() != 2 {
        return Err(Error::arg("the Rosen-form pp-wave needs two spatial dimensions"));
    }
    let ta = mesh.time.as_ref().ok_or_else(|| Error::arg("mesh needs a time axis"))?;
    if ta.t1 >= 1.0 {
        return Err(Error::arg(
            "pp-wave slab requires T < 1 (the metric degenerates at u = 1)",
        ));
    }
    if kink_mollified && ta.spacing() > grid.min() / 4.0 {
        return Err(Error::Mesh(format!(
            "time spacing {:.3e} too coarse for eps_min {:.3e} (need spacing <= eps_min/4)",
            ta.spacing(),
            grid.min()
        )));
    }
    let rho = Mollifier::standard(1)?;
    let profile = move |eps: f64, t: f64| -> f64 {
        if kink_mollified {
            nets::mollified_kink(&rho, eps, t)
        } else {
            t.max(0.0)
        }
    };
    let mut metric = MetricSplit::from_fields(
        grid.clone(),
        mesh.clone(),
        |_, _| 1.0,
        move |eps, p| {
            let k = profile(eps, p[0]);
            vec![(1.0 + k) * (1.0 + k), 0.0, (1.0 - k) * (1.0 - k)]
        },
    )?;
    metric.mollified = kink_mollified;
    Ok(metric)
}

/// Embed a continuous sampled metric into the generalized metrics by
/// componentwise mollification (per-axis convolution with the standard 1-d
/// profile; spatial axes wrap, the time axis clamps).
///
/// Returns the mollified metric together with the ε indices, if any, where
/// positivity of h or β was destroyed at coarse ε.
pub fn mollify_metric(
    beta_samples: &[f64],
    h_samples: &[Vec<f64>],
    mesh: &Mesh,
    grid: &EpsGrid,
) -> Result<(MetricSplit, Vec<usize>)> {
    if mesh.time.is_none() {
        return Err(Error::arg("metric mesh needs a time axis"));
    }
    let d = mesh.spatial_dim();
    if h_samples.len() != sym_len(d) {
        return Err(Error::arg("wrong number of h components"));
    }
    if beta_samples.len() != mesh.len() || h_samples.iter().any(|c| c.len() != mesh.len()) {
        return Err(Error::arg("component sample length does not match mesh"));
    }
    if beta_samples.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::arg("beta must be positive pointwise"));
    }
    for flat in 0..mesh.len() {
        let h: Vec<f64> = h_samples.iter().map(|c| c[flat]).collect();
        if sym_min_eig(&h) <= 0.0 {
            return Err(Error::arg("spatial part must be positive definite pointwise"));
        }
    }
    let max_spacing = mesh.spacings().into_iter().fold(0.0f64, f64::max);
    if max_spacing > grid.min() / 4.0 {
        return Err(Error::Mesh(format!(
            "mesh spacing {max_spacing:.3e} too coarse for eps_min {:.3e}",
            grid.min()
        )));
    }

    let smooth = |field: &[f64]| -> Vec<Vec<f64>> {
        grid.values()
            .par_iter()
            .map(|&eps| {
                let mut cur = field.to_vec();
                for axis in 0..mesh.num_axes() {
                    cur = convolve_axis_1d(&cur, mesh, axis, eps);
                }
                cur
            })
            .collect()
    };
    let beta_net = ScalarNet::new(grid.clone(), mesh.clone(), smooth(beta_samples))?;
    let h_nets: Vec<ScalarNet> = h_samples
        .iter()
        .map(|c| ScalarNet::new(grid.clone(), mesh.clone(), smooth(c)))
        .collect::<Result<_>>()?;

    // flag eps members where mollification destroyed positivity
    let mut flagged = Vec::new();
    for k in 0..grid.len() {
        let mut bad = beta_net.sample(k).iter().any(|&b| b <= 0.0);
        if !bad {
            for flat in 0..mesh.len() {
                let h: Vec<f64> = h_nets.iter().map(|c| c.sample(k)[flat]).collect();
                if sym_min_eig(&h) <= 0.0 {
                    bad = true;
                    break;
                }
            }
        }
        if bad {
            flagged.push(k);
        }
    }
    Ok((
        MetricSplit {
            grid: grid.clone(),
            mesh: mesh.clone(),
            beta: beta_net,
            h: h_nets,
            mollified: true,
        },
        flagged,
    ))
}

/// One-dimensional convolution with the standard profile along one mesh
/// axis: periodic wrap on spatial axes, clamp-to-edge on the time axis.
/// Discrete weights are renormalized to unit mass so constants are exact.
fn convolve_axis_1d(field: &[f64], mesh: &Mesh, axis: usize, eps: f64) -> Vec<f64> {
    let shape = mesh.shape();
    let n_axis = shape[axis];
    let h = mesh.spacings()[axis];
    let periodic = mesh.axis_periodic(axis);
    let rho = Mollifier::standard(1).expect("1-d mollifier");
    let reach = (eps / h).ceil() as isize;
    let mut w = Vec::with_capacity(2 * reach as usize + 1);
    for j in -reach..=reach {
        w.push(rho.eval_scaled(eps, &[j as f64 * h]) * h);
    }
    let mass: f64 = w.iter().sum();
    for v in &mut w {
        *v /= mass;
    }

    let mut strides = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    let stride = strides[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; field.len()];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n_axis * stride + i;
            for jpos in 0..n_axis {
                let mut acc = 0.0;
                for (jj, wv) in w.iter().enumerate() {
                    let off = jj as isize - reach;
                    let k = if periodic {
                        (jpos as isize - off).rem_euclid(n_axis as isize) as usize
                    } else {
                        (jpos as isize - off).clamp(0, n_axis as isize - 1) as usize
                    };
                    acc += wv * field[base + k * stride];
                }
                out[base + jpos * stride] = acc;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Compact sub-boxes
// ---------------------------------------------------------------------------

/// A compact coordinate sub-box of the mesh (time range first when present).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubBox {
    pub ranges: Vec<[f64; 2]>,
}

impl SubBox {
    /// The whole mesh.
    pub fn full(mesh: &Mesh) -> Self {
        let mut ranges = Vec::new();
        if let Some(t) = &mesh.time {
            ranges.push([t.t0, t.t1]);
        }
        for ax in &mesh.space {
            ranges.push([0.0, ax.extent]);
        }
        SubBox { ranges }
    }

    /// Per-axis index ranges, intersected with the mesh.
    pub fn index_ranges(&self, mesh: &Mesh) -> Result<Vec<std::ops::Range<usize>>> {
        if self.ranges.len() != mesh.num_axes() {
            return Err(Error::arg("sub-box dimension does not match mesh"));
        }
        let mut out = Vec::with_capacity(self.ranges.len());
        for (axis, [lo, hi]) in self.ranges.iter().enumerate() {
            if !(hi > lo) {
                return Err(Error::arg("sub-box ranges must be nonempty"));
            }
            let (a0, h, n) = if mesh.time.is_some() && axis == 0 {
                let t = mesh.time.as_ref().unwrap();
                if *hi < t.t0 || *lo > t.t1 {
                    return Err(Error::arg("sub-box lies outside the mesh (time)"));
                }
                (t.t0, t.spacing(), t.n)
            } else {
                let sp = axis - usize::from(mesh.time.is_some());
                let ax = &mesh.space[sp];
                if *lo < 0.0 || *hi > ax.extent {
                    return Err(Error::arg("sub-box lies outside the mesh (space)"));
                }
                (0.0, ax.spacing(), ax.n)
            };
            let i0 = (((lo - a0) / h).ceil().max(0.0)) as usize;
            let i1 = ((((hi - a0) / h).floor()) as usize + 1).min(n);
            if i0 >= i1 {
                return Err(Error::arg("sub-box contains no mesh samples"));
            }
            out.push(i0..i1);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Condition (A)
// ---------------------------------------------------------------------------

/// Fit for one derivative order k of condition (A).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionAEntry {
    pub k: usize,
    /// Worst fitted exponent over all order-k coordinate multi-indices, for
    /// g and g⁻¹ respectively.
    pub g_estimate: AsymptoticEstimate,
    pub ginv_estimate: AsymptoticEstimate,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionAReport {
    pub entries: Vec<ConditionAEntry>,
    pub slack: f64,
    pub pass: bool,
}

/// All multi-indices over `axes` axes with total order k.
fn multi_indices(axes: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; axes];
    fn rec(axis: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if axis == cur.len() - 1 {
            cur[axis] = remaining;
            out.push(cur.clone());
            return;
        }
        for take in 0..=remaining {
            cur[axis] = take;
            rec(axis + 1, remaining - take, cur, out);
        }
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// Per-ε sup over K of the background-metric norm of the ∂^μ-derivative of
/// a set of component fields (β plus h, or their inverse counterparts).
/// Off-diagonal symmetric components are double-counted in the norm.
fn derivative_norm_sup(
    mesh: &Mesh,
    grid: &EpsGrid,
    components: &[(&ScalarNet, f64)],
    orders: &[usize],
    ranges: &[std::ops::Range<usize>],
) -> Result<Vec<f64>> {
    // clip ranges against FD validity on non-periodic axes
    let mut clipped = ranges.to_vec();
    for (axis, &ord) in orders.iter().enumerate() {
        let valid = fd_valid_range(mesh, axis, ord);
        let r = &mut clipped[axis];
        r.start = r.start.max(valid.start);
        r.end = r.end.min(valid.end);
        if r.start >= r.end {
            return Err(Error::arg(
                "sub-box too small for the requested derivative stencil",
            ));
        }
    }
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let mut sq = vec![0.0; mesh.len()];
            for (net, weight) in components {
                let d = fd_multi(mesh, net.sample(k), orders)?;
                for (acc, v) in sq.iter_mut().zip(&d) {
                    *acc += weight * v * v;
                }
            }
            let norms: Vec<f64> = sq.iter().map(|v| v.sqrt()).collect();
            Ok(sup_abs_box(mesh, &norms, &clipped))
        })
        .collect()
}

/// Verify condition (A): sup_K ‖∂^k g_ε‖_m = O(ε^{−k}) and the same for
/// g_ε⁻¹, for all coordinate derivative tuples up to order k_max.
pub fn check_condition_a(
    g: &MetricSplit,
    k_region: &SubBox,
    k_max: usize,
    slack: f64,
) -> Result<ConditionAReport> {
    if k_max > crate::grid::MAX_FD_ORDER {
        return Err(Error::arg(format!(
            "k_max {} exceeds the finite-difference depth limit {}",
            k_max,
            crate::grid::MAX_FD_ORDER
        )));
    }
    let mesh = g.mesh();
    let ranges = k_region.index_ranges(mesh)?;
    let d = g.spatial_dim();

    let inv_beta = ScalarNet::new(
        g.grid.clone(),
        mesh.clone(),
        g.beta
            .samples()
            .iter()
            .map(|s| s.iter().map(|b| 1.0 / b).collect())
            .collect(),
    )?;
    let mut hinv_nets = Vec::with_capacity(sym_len(d));
    for c in 0..sym_len(d) {
        let samples = (0..g.grid.len())
            .map(|k| {
                (0..mesh.len())
                    .map(|flat| sym_inv(&g.h_at(k, flat))[c])
                    .collect()
            })
            .collect();
        hinv_nets.push(ScalarNet::new(g.grid.clone(), mesh.clone(), samples)?);
    }

    let weight_of = |c: usize| -> f64 {
        if d == 2 && c == 1 {
            2.0
        } else {
            1.0
        }
    };
    let fwd: Vec<(&ScalarNet, f64)> = std::iter::once((&g.beta, 1.0))
        .chain(g.h.iter().enumerate().map(|(c, n)| (n, weight_of(c))))
        .collect();
    let inv: Vec<(&ScalarNet, f64)> = std::iter::once((&inv_beta, 1.0))
        .chain(hinv_nets.iter().enumerate().map(|(c, n)| (n, weight_of(c))))
        .collect();

    let mut entries = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut worst_g: Option<AsymptoticEstimate> = None;
        let mut worst_inv: Option<AsymptoticEstimate> = None;
        for mu in multi_indices(mesh.num_axes(), k) {
            if mu.iter().any(|&o| o > crate::grid::MAX_FD_ORDER) {
                continue;
            }
            let sup_g = derivative_norm_sup(mesh, &g.grid, &fwd, &mu, &ranges)?;
            let est_g = estimate_order(&sup_g, &g.grid)?;
            if worst_g.as_ref().map_or(true, |w| est_g.exponent > w.exponent) {
                worst_g = Some(est_g);
            }
            let sup_i = derivative_norm_sup(mesh, &g.grid, &inv, &mu, &ranges)?;
            let est_i = estimate_order(&sup_i, &g.grid)?;
            if worst_inv.as_ref().map_or(true, |w| est_i.exponent > w.exponent) {
                worst_inv = Some(est_i);
            }
        }
        let g_estimate = worst_g.unwrap();
        let ginv_estimate = worst_inv.unwrap();
        let bound = k as f64 + slack;
        let pass = g_estimate.exponent <= bound && ginv_estimate.exponent <= bound;
        entries.push(ConditionAEntry {
            k,
            g_estimate,
            ginv_estimate,
            pass,
        });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(ConditionAReport {
        entries,
        slack,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Condition (B)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionBReport {
    /// inf over K and the ε-tail of −g_ε⁻¹(dt,dt) = 1/β_ε.
    pub c_timelike: f64,
    /// Growth trend of the per-ε infima (decay means collapsing cones).
    pub c_timelike_trend: f64,
    /// Fitted growth exponent of sup_K ‖∇^ε σ‖_m (should be O(1)).
    pub nabla_sigma_estimate: AsymptoticEstimate,
    /// Fitted growth exponent of the second-fundamental-form block.
    pub ii_estimate: AsymptoticEstimate,
    pub slack: f64,
    pub pass: bool,
}

/// Verify condition (B): the time differential is uniformly timelike and
/// ∇^ε σ (hence the second fundamental form of the slices) stays O(1).
///
/// In split form ∇_a σ_b = −Γ⁰_{ab}, assembled from ∂β and ∂_t h.
pub fn check_condition_b(g: &MetricSplit, k_region: &SubBox, slack: f64) -> Result<ConditionBReport> {
    let mesh = g.mesh();
    let ranges = k_region.index_ranges(mesh)?;
    let d = g.spatial_dim();
    let n_axes = mesh.num_axes();

    // per-ε infimum of 1/β over K
    let inf_invbeta: Vec<f64> = (0..g.grid.len())
        .map(|k| {
            let mut inf = f64::INFINITY;
            visit_box(mesh, &ranges, |flat| {
                inf = inf.min(1.0 / g.beta_at(k, flat));
            });
            inf
        })
        .collect();
    let c_timelike = g
        .grid
        .tail_indices()
        .fold(f64::INFINITY, |m, k| m.min(inf_invbeta[k]));
    let c_trend = estimate_order(&inf_invbeta, &g.grid)?;

    // ∇σ and II sup-norms per ε
    let mut unit = vec![0usize; n_axes];
    let mut sup_ns = Vec::with_capacity(g.grid.len());
    let mut sup_ii = Vec::with_capacity(g.grid.len());
    for k in 0..g.grid.len() {
        let mut dbeta = Vec::with_capacity(n_axes);
        for axis in 0..n_axes {
            unit.fill(0);
            unit[axis] = 1;
            dbeta.push(fd_multi(mesh, g.beta.sample(k), &unit)?);
        }
        unit.fill(0);
        unit[0] = 1;
        let mut dth = Vec::with_capacity(g.h.len());
        for c in &g.h {
            dth.push(fd_multi(mesh, c.sample(k), &unit)?);
        }
        // clip to FD-valid region (first-order stencils)
        let mut clipped = ranges.clone();
        let valid = fd_valid_range(mesh, 0, 1);
        clipped[0].start = clipped[0].start.max(valid.start);
        clipped[0].end = clipped[0].end.min(valid.end);

        let mut s_ns = 0.0f64;
        let mut s_ii = 0.0f64;
        visit_box(mesh, &clipped, |flat| {
            let beta = g.beta_at(k, flat);
            let g00 = dbeta[0][flat] / (2.0 * beta); // Γ⁰_00
            let mut nsq = g00 * g00;
            for (a, dba) in dbeta.iter().enumerate().skip(1) {
                let g0a = dba[flat] / (2.0 * beta); // Γ⁰_0i
                nsq += 2.0 * g0a * g0a;
                let _ = a;
            }
            let mut iisq = 0.0;
            for (c, dthc) in dth.iter().enumerate() {
                let gij = dthc[flat] / (2.0 * beta); // Γ⁰_ij
                let w = if d == 2 && c == 1 { 2.0 } else { 1.0 };
                nsq += w * gij * gij;
                iisq += w * gij * gij;
            }
            s_ns = s_ns.max(nsq.sqrt());
            s_ii = s_ii.max((iisq / beta).sqrt()); // II = tangential ∇σ / √β
        });
        sup_ns.push(s_ns);
        sup_ii.push(s_ii);
    }
    // a sup that is identically zero (static metric) is a perfect O(1)
    // bound; the floor sits below the zero-net threshold so such nets keep
    // their −∞ marker
    let floor = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| x.max(1e-305)).collect() };
    let nabla_sigma_estimate = estimate_order(&floor(sup_ns), &g.grid)?;
    let ii_estimate = estimate_order(&floor(sup_ii), &g.grid)?;

    let pass = c_timelike > 0.0
        && c_trend.exponent.max(0.0) <= slack.max(0.1)
        && nabla_sigma_estimate.exponent <= slack
        && ii_estimate.exponent <= slack;
    Ok(ConditionBReport {
        c_timelike,
        c_timelike_trend: c_trend.exponent,
        nabla_sigma_estimate,
        ii_estimate,
        slack,
        pass,
    })
}

fn visit_box(mesh: &Mesh, ranges: &[std::ops::Range<usize>], mut f: impl FnMut(usize)) {
    let shape = mesh.shape();
    let mut strides = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    fn rec(
        dim: usize,
        ranges: &[std::ops::Range<usize>],
        strides: &[usize],
        base: usize,
        f: &mut impl FnMut(usize),
    ) {
        if dim == ranges.len() {
            f(base);
            return;
        }
        for i in ranges[dim].clone() {
            rec(dim + 1, ranges, strides, base + i * strides[dim], f);
        }
    }
    rec(0, ranges, &strides, 0, &mut f);
}

// ---------------------------------------------------------------------------
// Metric splitting checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LuniReport {
    /// Infimum over K and the ε-tail.
    pub c: f64,
    /// Fitted decay exponent of the per-ε infima (positive ⇒ degenerating).
    pub trend_decay: f64,
    pub pass: bool,
}

/// Local uniform positivity: inf over K of the net stays bounded away from
/// zero along the ε-tail.
pub fn check_luni_positive(net: &ScalarNet, k_region: &SubBox) -> Result<LuniReport> {
    let ranges = k_region.index_ranges(net.mesh())?;
    let infs: Vec<f64> = (0..net.grid().len())
        .map(|k| {
            let mut inf = f64::INFINITY;
            visit_box(net.mesh(), &ranges, |flat| {
                inf = inf.min(net.sample(k)[flat]);
            });
            inf
        })
        .collect();
    let c = net
        .grid()
        .tail_indices()
        .fold(f64::INFINITY, |m, k| m.min(infs[k]));
    if infs.iter().any(|&v| v <= 0.0) {
        return Ok(LuniReport {
            c: c.min(0.0),
            trend_decay: f64::INFINITY,
            pass: false,
        });
    }
    let est = estimate_order(&infs, net.grid())?;
    let trend_decay = est.decay_exponent();
    Ok(LuniReport {
        c,
        trend_decay,
        pass: c > 0.0 && trend_decay <= 0.1,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplittingReport {
    /// Fitted growth exponent of sup β_ε (bounded ⇔ ≈ 0).
    pub beta_bounded_exponent: f64,
    pub beta_bounded: bool,
    pub beta_luni: LuniReport,
    /// Largest admissible c with hₜ ≥ c·ρ_flat, over the ε-tail.
    pub h_lower_c: f64,
    /// Decay trend of the per-ε lower bounds.
    pub h_lower_trend_decay: f64,
    pub h_lower_pass: bool,
    /// Fitted m with |det hₜ| > ε^m (Def-4.2-type non-degeneracy).
    pub det_lower_m: f64,
    pub pass: bool,
}

/// Verify the globally hyperbolic splitting bounds: β globally bounded and
/// locally uniformly positive, and hₜ uniformly bounded below by c·ρ for the
/// (scaled) flat background ρ.
pub fn check_splitting(g: &MetricSplit, background: &BackgroundMetric) -> Result<SplittingReport> {
    let full = SubBox::full(g.mesh());
    let sup_beta: Vec<f64> = g
        .beta
        .samples()
        .iter()
        .map(|s| s.iter().fold(0.0f64, |m, v| m.max(*v)))
        .collect();
    let beta_sup_est = estimate_order(&sup_beta, &g.grid)?;
    let beta_bounded = beta_sup_est.exponent <= 0.1;
    let beta_luni = check_luni_positive(&g.beta, &full)?;

    // per-ε min eigenvalue of h: the largest c with h ≥ c·flat, scaled by ρ
    let min_eigs: Vec<f64> = (0..g.grid.len())
        .map(|k| {
            let mut m = f64::INFINITY;
            for flat in 0..g.mesh.len() {
                m = m.min(sym_min_eig(&g.h_at(k, flat)));
            }
            m / background.rho_scale
        })
        .collect();
    let h_lower_c = g
        .grid
        .tail_indices()
        .fold(f64::INFINITY, |m, k| m.min(min_eigs[k]));
    let (h_lower_trend_decay, h_lower_pass) = if min_eigs.iter().any(|&v| v <= 0.0) {
        (f64::INFINITY, false)
    } else {
        let est = estimate_order(&min_eigs, &g.grid)?;
        let trend = est.decay_exponent();
        (trend, h_lower_c > 0.0 && trend <= 0.1)
    };

    // Def. 4.2 (ii): |det h| > ε^m for some finite fitted m
    let min_dets: Vec<f64> = (0..g.grid.len())
        .map(|k| {
            let mut m = f64::INFINITY;
            for flat in 0..g.mesh.len() {
                m = m.min(sym_det(&g.h_at(k, flat)).abs());
            }
            m
        })
        .collect();
    let det_lower_m = if min_dets.iter().all(|&v| v > 0.0) {
        estimate_order(&min_dets, &g.grid)?.decay_exponent().max(0.0)
    } else {
        f64::INFINITY
    };

    let pass = beta_bounded && beta_luni.pass && h_lower_pass && det_lower_m.is_finite();
    Ok(SplittingReport {
        beta_bounded_exponent: beta_sup_est.exponent,
        beta_bounded,
        beta_luni,
        h_lower_c,
        h_lower_trend_decay,
        h_lower_pass,
        det_lower_m,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SpaceAxis, TimeAxis};
    use approx::assert_relative_eq;

    fn st_mesh_1d(nt: usize, nx: usize) -> Mesh {
        Mesh::space_time(
            TimeAxis {
                t0: 0.0,
                t1: 1.0,
                n: nt,
            },
            vec![SpaceAxis {
                extent: 2.0 * std::f64::consts::PI,
                n: nx,
            }],
        )
        .unwrap()
    }

    fn grid() -> EpsGrid {
        EpsGrid::geometric(0.2, 6).unwrap()
    }

    #[test]
    fn minkowski_passes_everything() {
        let mesh = st_mesh_1d(32, 64);
        let g = make_minkowski(&mesh, &grid()).unwrap();
        let full = SubBox::full(&mesh);
        let a = check_condition_a(&g, &full, 3, 0.3).unwrap();
        assert!(a.pass);
        for e in &a.entries {
            assert!(e.g_estimate.exponent.abs() < 0.05 || e.g_estimate.is_zero_net());
        }
        let b = check_condition_b(&g, &full, 0.3).unwrap();
        assert!(b.pass);
        assert_relative_eq!(b.c_timelike, 1.0, epsilon = 1e-12);
        assert!(b.nabla_sigma_estimate.is_zero_net());
        let s = check_splitting(&g, &BackgroundMetric::default()).unwrap();
        assert!(s.pass);
        assert_relative_eq!(s.h_lower_c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn metric_inverse_identity_per_sample() {
        let g = make_pp_wave_rosen(
            &Mesh::space_time(
                TimeAxis {
                    t0: -0.25,
                    t1: 0.5,
                    n: 16,
                },
                vec![
                    SpaceAxis {
                        extent: 2.0 * std::f64::consts::PI,
                        n: 8,
                    },
                    SpaceAxis {
                        extent: 2.0 * std::f64::consts::PI,
                        n: 8,
                    },
                ],
            )
            .unwrap(),
            &grid(),
            false,
        )
        .unwrap();
        for k in [0, 3] {
            for flat in 0..g.mesh().len() {
                let h = g.h_at(k, flat);
                let hinv = sym_inv(&h);
                // ‖h·h⁻¹ − id‖ < 1e−12 per sample (2×2 block)
                let prod = [
                    h[0] * hinv[0] + h[1] * hinv[1],
                    h[0] * hinv[1] + h[1] * hinv[2],
                    h[1] * hinv[0] + h[2] * hinv[1],
                    h[1] * hinv[1] + h[2] * hinv[2],
                ];
                assert!((prod[0] - 1.0).abs() < 1e-12);
                assert!(prod[1].abs() < 1e-12);
                assert!(prod[2].abs() < 1e-12);
                assert!((prod[3] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn robertson_walker_constant_reduces_to_flat() {
        let mesh = st_mesh_1d(16, 32);
        let g = make_robertson_walker(&mesh, &grid(), |_, _| 1.0, |_, _| vec![1.0]).unwrap();
        for k in 0..g.grid().len() {
            for flat in 0..mesh.len() {
                assert_eq!(g.beta_at(k, flat), 1.0);
                assert_eq!(g.h_at(k, flat)[0], 1.0);
            }
        }
        assert!(make_robertson_walker(&mesh, &grid(), |_, t| -t, |_, _| vec![1.0]).is_err());
    }

    #[test]
    fn rw_oscillating_warp_satisfies_condition_a_with_order_k() {
        // f_ε(t) = 2 + sin(t/ε): order-k exponent within 0.2 of k
        let mesh = Mesh::space_time(
            TimeAxis {
                t0: 0.0,
                t1: 1.0,
                n: 1025,
            },
            vec![SpaceAxis {
                extent: 2.0 * std::f64::consts::PI,
                n: 8,
            }],
        )
        .unwrap();
        let grid = EpsGrid::new(vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0]).unwrap();
        let g =
            make_robertson_walker(&mesh, &grid, |e, t| 2.0 + (t / e).sin(), |_, _| vec![1.0])
                .unwrap();
        let rep = check_condition_a(&g, &SubBox::full(&mesh), 2, 0.3).unwrap();
        assert!(rep.pass, "{rep:?}");
        for e in &rep.entries {
            assert!(
                (e.g_estimate.exponent - e.k as f64).abs() < 0.2,
                "k = {}: exponent {}",
                e.k,
                e.g_estimate.exponent
            );
        }
    }

    #[test]
    fn pp_wave_slab_properties() {
        let mesh = Mesh::space_time(
            TimeAxis {
                t0: -0.25,
                t1: 0.5,
                n: 25,
            },
            vec![
                SpaceAxis { extent: 4.0, n: 8 },
                SpaceAxis { extent: 4.0, n: 8 },
            ],
        )
        .unwrap();
        let g = make_pp_wave_rosen(&mesh, &grid(), false).unwrap();
        let ta = mesh.time.unwrap();
        for it in 0..ta.n {
            let t = ta.coord(it);
            let h = g.h_at(0, g.idx(it, 0));
            if t <= 0.0 {
                // flat region
                assert_eq!(h, vec![1.0, 0.0, 1.0]);
            }
            // det h = ((1+u)(1-u))² exactly
            let u = t.max(0.0);
            assert_relative_eq!(
                sym_det(&h),
                ((1.0 + u) * (1.0 - u)).powi(2),
                epsilon = 1e-12
            );
        }
        // det h at t = 1/2 equals 9/16
        let it_half = ((0.5 - ta.t0) / ta.spacing()).round() as usize;
        assert_relative_eq!(ta.coord(it_half), 0.5, epsilon = 1e-12);
        let h_half = g.h_at(0, g.idx(it_half, 0));
        assert_relative_eq!(sym_det(&h_half), 9.0 / 16.0, epsilon = 1e-12);
        // splitting: largest admissible c is (1−T)² = 1/4
        let s = check_splitting(&g, &BackgroundMetric::default()).unwrap();
        assert!(s.pass);
        assert_relative_eq!(s.h_lower_c, 0.25, epsilon = 1e-12);

        // T >= 1 must be rejected
        let bad = Mesh::space_time(
            TimeAxis {
                t0: 0.0,
                t1: 1.0,
                n: 9,
            },
            vec![
                SpaceAxis { extent: 4.0, n: 8 },
                SpaceAxis { extent: 4.0, n: 8 },
            ],
        )
        .unwrap();
        assert!(make_pp_wave_rosen(&bad, &grid(), false).is_err());
    }

    fn mollified_ppwave() -> (MetricSplit, Mesh) {
        let grid = EpsGrid::geometric(0.2, 6).unwrap();
        let nt = 513; // spacing ≈ 1.46e-3 ≤ eps_min/4 ≈ 1.56e-3
        let mesh = Mesh::space_time(
            TimeAxis {
                t0: -0.25,
                t1: 0.5,
                n: nt,
            },
            vec![
                SpaceAxis { extent: 4.0, n: 8 },
                SpaceAxis { extent: 4.0, n: 8 },
            ],
        )
        .unwrap();
        let g = make_pp_wave_rosen(&mesh, &grid, true).unwrap();
        (g, mesh)
    }

    #[test]
    fn mollified_pp_wave_condition_a() {
        // Lipschitz profile mollified: order-k exponent ≤ k−1+0.2 for k ≥ 1
        let (g, mesh) = mollified_ppwave();
        let rep = check_condition_a(&g, &SubBox::full(&mesh), 2, 0.3).unwrap();
        assert!(rep.pass, "{rep:?}");
        for e in &rep.entries {
            if e.k >= 1 {
                assert!(
                    e.g_estimate.exponent <= e.k as f64 - 1.0 + 0.2,
                    "k = {}: exponent {}",
                    e.k,
                    e.g_estimate.exponent
                );
            }
        }
        let b = check_condition_b(&g, &SubBox::full(&mesh), 0.3).unwrap();
        assert!(b.pass, "{b:?}");
    }

    #[test]
    fn adversarial_net_fails_condition_a() {
        let mesh = st_mesh_1d(16, 64);
        let grid = EpsGrid::geometric(0.2, 6).unwrap();
        let g = MetricSplit::from_fields(
            grid,
            mesh.clone(),
            |_, _| 1.0,
            |e, p| vec![1.0 + p[1].sin() / (e * e)],
        )
        .unwrap();
        let rep = check_condition_a(&g, &SubBox::full(&mesh), 1, 0.3).unwrap();
        assert!(!rep.pass);
        assert!(rep.entries[0].g_estimate.exponent > 1.5);
    }

    #[test]
    fn condition_b_static_beta_minimum() {
        // β = 2 + sin(x) static: C_timelike = 1/3
        let mesh = st_mesh_1d(16, 256);
        let g = MetricSplit::from_fields(
            EpsGrid::geometric(0.2, 6).unwrap(),
            mesh.clone(),
            |_, p| 2.0 + p[1].sin(),
            |_, _| vec![1.0],
        )
        .unwrap();
        let b = check_condition_b(&g, &SubBox::full(&mesh), 0.3).unwrap();
        assert!(b.pass);
        assert_relative_eq!(b.c_timelike, 1.0 / 3.0, epsilon = 1e-3);
    }

    #[test]
    fn beta_eps_fails_boundedness_not_timelikeness() {
        // β_ε = ε: 1/β grows (timelike bound fine) but β fails the
        // splitting's boundedness/luni checks
        let mesh = st_mesh_1d(8, 16);
        let g = MetricSplit::from_fields(
            EpsGrid::geometric(0.2, 6).unwrap(),
            mesh.clone(),
            |e, _| e,
            |_, _| vec![1.0],
        )
        .unwrap();
        let b = check_condition_b(&g, &SubBox::full(&mesh), 0.3).unwrap();
        assert!(b.c_timelike >= 1.0);
        let s = check_splitting(&g, &BackgroundMetric::default()).unwrap();
        assert!(!s.beta_luni.pass);
        assert!(!s.pass);
    }

    #[test]
    fn shrinking_h_fails_lower_bound() {
        let mesh = st_mesh_1d(8, 16);
        let g = MetricSplit::from_fields(
            EpsGrid::geometric(0.2, 6).unwrap(),
            mesh.clone(),
            |_, _| 1.0,
            |e, _| vec![e],
        )
        .unwrap();
        let s = check_splitting(&g, &BackgroundMetric::default()).unwrap();
        assert!(!s.h_lower_pass);
        assert!(!s.pass);
    }

    #[test]
    fn luni_positive_examples() {
        let mesh = st_mesh_1d(8, 128);
        let grid = EpsGrid::geometric(0.2, 6).unwrap();
        let ones = ScalarNet::from_fn(grid.clone(), mesh.clone(), |_, _| 1.0).unwrap();
        let r = check_luni_positive(&ones, &SubBox::full(&mesh)).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.c, 1.0);

        let wavy = ScalarNet::from_fn(grid.clone(), mesh.clone(), |_, p| 2.0 + p[1].sin()).unwrap();
        let r = check_luni_positive(&wavy, &SubBox::full(&mesh)).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.c, 1.0, epsilon = 1e-3);

        let dying = ScalarNet::from_fn(grid, mesh.clone(), |e, _| e).unwrap();
        let r = check_luni_positive(&dying, &SubBox::full(&mesh)).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn mollify_constant_metric_unchanged_and_scaling_commutes() {
        let mesh = Mesh::space_time(
            TimeAxis {
                t0: 0.0,
                t1: 0.5,
                n: 129,
            },
            vec![SpaceAxis {
                extent: 4.0,
                n: 1024,
            }],
        )
        .unwrap();
        let grid = EpsGrid::geometric(0.2, 4).unwrap();
        let beta = vec![1.0; mesh.len()];
        let h = vec![vec![2.0; mesh.len()]];
        let (g, flagged) = mollify_metric(&beta, &h, &mesh, &grid).unwrap();
        assert!(flagged.is_empty());
        for k in 0..grid.len() {
            for flat in 0..mesh.len() {
                assert_relative_eq!(g.h_at(k, flat)[0], 2.0, epsilon = 1e-12);
                assert_relative_eq!(g.beta_at(k, flat), 1.0, epsilon = 1e-12);
            }
        }
        // scaling by a dyadic constant commutes exactly with mollification
        let h_scaled = vec![h[0].iter().map(|v| 2.0 * v).collect::<Vec<_>>()];
        let (g2, _) = mollify_metric(&beta, &h_scaled, &mesh, &grid).unwrap();
        for k in 0..grid.len() {
            for flat in 0..mesh.len() {
                assert_eq!(g2.h_at(k, flat)[0], 2.0 * g.h_at(k, flat)[0]);
            }
        }
    }

    #[test]
    fn mollify_smooth_metric_second_order() {
        let mesh = Mesh::space_time(
            TimeAxis {
                t0: 0.0,
                t1: 0.1,
                n: 65,
            },
            vec![SpaceAxis {
                extent: 2.0 * std::f64::consts::PI,
                n: 4096,
            }],
        )
        .unwrap();
        let grid = EpsGrid::geometric(0.1, 5).unwrap();
        let beta = vec![1.0; mesh.len()];
        let nx = mesh.space[0].n;
        let h: Vec<f64> = (0..mesh.len())
            .map(|flat| 2.0 + (mesh.space[0].coord(flat % nx)).sin() * 0.5)
            .collect();
        let (g, _) = mollify_metric(&beta, &[h.clone()], &mesh, &grid).unwrap();
        let sup_err: Vec<f64> = (0..grid.len())
            .map(|k| {
                (0..mesh.len())
                    .map(|flat| (g.h_at(k, flat)[0] - h[flat]).abs())
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let est = estimate_order(&sup_err, &grid).unwrap();
        assert!(
            (est.decay_exponent() - 2.0).abs() < 0.15,
            "decay {}",
            est.decay_exponent()
        );
    }

    #[test]
    fn lipschitz_profile_mollified_passes_condition_a() {
        // conical-style bounded Lipschitz profile through the sampled path
        let mesh = Mesh::space_time(
            TimeAxis {
                t0: 0.0,
                t1: 0.1,
                n: 65,
            },
            vec![SpaceAxis {
                extent: 4.0,
                n: 4096,
            }],
        )
        .unwrap();
        let grid = EpsGrid::geometric(0.1, 5).unwrap();
        let beta = vec![1.0; mesh.len()];
        let nx = mesh.space[0].n;
        let h: Vec<f64> = (0..mesh.len())
            .map(|flat| {
                let x = mesh.space[0].coord(flat % nx);
                1.0 + 0.5 * (1.0 - (x - 2.0).abs()).max(0.0)
            })
            .collect();
        let (g, flagged) = mollify_metric(&beta, &[h], &mesh, &grid).unwrap();
        assert!(flagged.is_empty());
        let rep = check_condition_a(&g, &SubBox::full(&mesh), 2, 0.3).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn subbox_outside_mesh_rejected() {
        let mesh = st_mesh_1d(8, 16);
        let g = make_minkowski(&mesh, &grid()).unwrap();
        let bad = SubBox {
            ranges: vec![[2.0, 3.0], [0.0, 1.0]],
        };
        assert!(check_condition_a(&g, &bad, 1, 0.3).is_err());
    }
}
