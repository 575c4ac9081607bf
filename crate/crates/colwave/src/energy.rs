//! Energy machinery: the auxiliary Riemannian metric e = g + 2σ̂⊗σ̂,
//! pointwise and ε-dependent Sobolev norms, energy–momentum tensors
//! T^{ab,k}, slice energy integrals E^k_{τ,ε}, dominant-energy positivity,
//! norm–energy equivalence, and empirical Gronwall constants.
//!
//! In split coordinates e = β dt² + h exactly, the slice volume form is
//! μ_τ = √(det h)·dx, the spacetime one μ = √(β det h)·dt dx, and the energy
//! integrals contract T^{ab,j} with ξ_a = (dt)_a and the normalization
//! V = √β:  E^k_{τ,ε} = Σ_{j≤k} ∫_{S_τ} T^{00,j} V⁻¹ μ_τ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Mesh;
use crate::nets::{estimate_order, AsymptoticEstimate};
use crate::solver::{Snapshot, SolutionNet};
use crate::spacetime::{sym_det, sym_inv, sym_len, sym_min_eig, MetricSplit};

/// The auxiliary Riemannian metric e_ε = g_ε + 2σ̂⊗σ̂ (= β dt² + h in split
/// form), with measured sup-estimates of ‖e‖_m and ‖∇^ε e‖_m.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxMetricE {
    pub norm_estimate: AsymptoticEstimate,
    pub grad_norm_estimate: AsymptoticEstimate,
}

/// Build the auxiliary metric and measure its boundedness (the theory
/// asserts ‖e‖ and ‖∇e‖ are O(1) under conditions (A) and (B); here they
/// are measured, not assumed). Positive definiteness is verified at every
/// sample.
pub fn aux_metric(g: &MetricSplit) -> Result<AuxMetricE> {
    let mesh = g.mesh();
    let n_eps = g.grid().len();
    let mut sup_e = Vec::with_capacity(n_eps);
    let mut sup_de = Vec::with_capacity(n_eps);
    for k in 0..n_eps {
        // positive definiteness: β > 0 is構造; h must be positive definite
        let mut s_e = 0.0f64;
        for flat in 0..mesh.len() {
            let beta = g.beta_at(k, flat);
            let h = g.h_at(k, flat);
            if sym_min_eig(&h) <= 0.0 {
                return Err(Error::Numerical(
                    "auxiliary metric not positive definite (h degenerates)".into(),
                ));
            }
            let mut frob = beta * beta;
            for (c, v) in h.iter().enumerate() {
                let w = if h.len() == 3 && c == 1 { 2.0 } else { 1.0 };
                frob += w * v * v;
            }
            s_e = s_e.max(frob.sqrt());
        }
        sup_e.push(s_e);

        // ‖∇e‖ via covariant derivatives of the components on the slice grid
        let chr = g.christoffels(k)?;
        let mut unit = vec![0usize; mesh.num_axes()];
        let n = mesh.num_axes();
        let mut de = Vec::with_capacity(n);
        let mut dh = Vec::with_capacity(n);
        for axis in 0..n {
            unit.fill(0);
            unit[axis] = 1;
            de.push(crate::grid::fd_multi(mesh, g.beta().sample(k), &unit)?);
            let mut per = Vec::new();
            for c in 0..g.num_h_components() {
                per.push(crate::grid::fd_multi(
                    mesh,
                    g.h_component(c).sample(k),
                    &unit,
                )?);
            }
            dh.push(per);
        }
        let d = g.spatial_dim();
        let e_at = |flat: usize, a: usize, b: usize| -> f64 {
            if a == 0 && b == 0 {
                g.beta_at(k, flat)
            } else if a == 0 || b == 0 {
                0.0
            } else {
                g.h_at(k, flat)[sym_index(d, a - 1, b - 1)]
            }
        };
        let de_at = |flat: usize, e_ax: usize, a: usize, b: usize| -> f64 {
            if a == 0 && b == 0 {
                de[e_ax][flat]
            } else if a == 0 || b == 0 {
                0.0
            } else {
                dh[e_ax][sym_index(d, a - 1, b - 1)][flat]
            }
        };
        let mut s_de = 0.0f64;
        // restrict to interior time samples where the FD is valid
        let tvalid = crate::grid::fd_valid_range(mesh, 0, 1);
        let ns = mesh.space_len();
        for it in tvalid {
            for isp in 0..ns {
                let flat = it * ns + isp;
                let mut frob = 0.0;
                for ax in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            let mut v = de_at(flat, ax, a, b);
                            for c in 0..n {
                                v -= chr[flat][(c * n + ax) * n + a] * e_at(flat, c, b);
                                v -= chr[flat][(c * n + ax) * n + b] * e_at(flat, a, c);
                            }
                            frob += v * v;
                        }
                    }
                }
                s_de = s_de.max(frob.sqrt());
            }
        }
        sup_de.push(s_de.max(1e-305));
    }
    Ok(AuxMetricE {
        norm_estimate: estimate_order(&sup_e, g.grid())?,
        grad_norm_estimate: estimate_order(&sup_de, g.grid())?,
    })
}

fn sym_index(d: usize, i: usize, j: usize) -> usize {
    if d == 1 {
        0
    } else {
        match (i.min(j), i.max(j)) {
            (0, 0) => 0,
            (0, 1) => 1,
            (1, 1) => 2,
            _ => unreachable!(),
        }
    }
}

/// Index signature of a tensor handed to the pointwise norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TensorSig {
    Scalar,
    /// One lower index (a covector, e.g. du).
    Covector,
    /// Two lower indices (e.g. ∇∇u).
    TwoCovector,
    /// Two upper indices (e.g. an energy tensor).
    TwoVector,
}

/// Pointwise e-norm squared ‖T‖²_e = e_{KL} e^{IJ} T^K_I T^L_J of a tensor
/// given by its components at one sample (row-major for two-index tensors),
/// with the split-form auxiliary metric determined by (β, h).
pub fn pointwise_norm_sq(sig: TensorSig, comps: &[f64], beta: f64, h: &[f64]) -> Result<f64> {
    let d = match h.len() {
        1 => 1,
        3 => 2,
        _ => return Err(Error::arg("h must have 1 or 3 components")),
    };
    let n = d + 1;
    let hinv = sym_inv(h);
    let e = |a: usize, b: usize| -> f64 {
        if a == 0 && b == 0 {
            beta
        } else if a == 0 || b == 0 {
            0.0
        } else {
            h[sym_index(d, a - 1, b - 1)]
        }
    };
    let einv = |a: usize, b: usize| -> f64 {
        if a == 0 && b == 0 {
            1.0 / beta
        } else if a == 0 || b == 0 {
            0.0
        } else {
            hinv[sym_index(d, a - 1, b - 1)]
        }
    };
    let expect = match sig {
        TensorSig::Scalar => 1,
        TensorSig::Covector => n,
        TensorSig::TwoCovector | TensorSig::TwoVector => n * n,
    };
    if comps.len() != expect {
        return Err(Error::arg(format!(
            "tensor has {} components, expected {expect} for its signature",
            comps.len()
        )));
    }
    let v = match sig {
        TensorSig::Scalar => comps[0] * comps[0],
        TensorSig::Covector => {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    acc += einv(a, b) * comps[a] * comps[b];
                }
            }
            acc
        }
        TensorSig::TwoCovector => {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for dd in 0..n {
                            acc += einv(a, c) * einv(b, dd) * comps[a * n + b] * comps[c * n + dd];
                        }
                    }
                }
            }
            acc
        }
        TensorSig::TwoVector => {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for dd in 0..n {
                            acc += e(a, c) * e(b, dd) * comps[a * n + b] * comps[c * n + dd];
                        }
                    }
                }
            }
            acc
        }
    };
    Ok(v)
}

// ---------------------------------------------------------------------------
// Slice geometry and derivatives
// ---------------------------------------------------------------------------

/// Metric data on one time slice of one ε member: β, h, h⁻¹, det h and the
/// Christoffel symbols, each per spatial sample.
pub struct SliceGeometry {
    pub tau: f64,
    pub beta: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub hinv: Vec<Vec<f64>>,
    pub det_h: Vec<f64>,
    /// Γ^c_{ab} per sample, layout (c·n + a)·n + b.
    pub christoffel: Vec<Vec<f64>>,
    pub dim: usize,
}

/// Assemble the slice geometry at time τ for one ε member. Time derivatives
/// of the metric are centered differences of the time-interpolated fields.
pub fn slice_geometry(g: &MetricSplit, k_eps: usize, tau: f64) -> Result<SliceGeometry> {
    let mesh = g.mesh();
    let smesh = mesh.spatial_part();
    let ns = mesh.space_len();
    let d = g.spatial_dim();
    let n = d + 1;
    let nh = sym_len(d);
    let ta = mesh.time.as_ref().unwrap();
    let dt_m = ta.spacing();

    let gather = |t: f64| -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut beta = vec![0.0; ns];
        let mut h = vec![vec![0.0; ns]; nh];
        for i in 0..ns {
            let (b, hc) = g.at_time(k_eps, t, i);
            beta[i] = b;
            for (c, v) in hc.iter().enumerate() {
                h[c][i] = *v;
            }
        }
        (beta, h)
    };
    let (beta, h_comps) = gather(tau);
    // centered time derivative of the interpolated fields
    let (beta_p, h_p) = gather(tau + dt_m);
    let (beta_m, h_m) = gather(tau - dt_m);
    let dt_beta: Vec<f64> = beta_p
        .iter()
        .zip(&beta_m)
        .map(|(p, m)| (p - m) / (2.0 * dt_m))
        .collect();
    let dt_h: Vec<Vec<f64>> = h_p
        .iter()
        .zip(&h_m)
        .map(|(p, m)| {
            p.iter()
                .zip(m)
                .map(|(a, b)| (a - b) / (2.0 * dt_m))
                .collect()
        })
        .collect();
    // spatial derivatives on the slice
    let mut dx_beta = Vec::with_capacity(d);
    let mut dx_h = Vec::with_capacity(d);
    for axis in 0..d {
        let mut unit = vec![0usize; d];
        unit[axis] = 1;
        dx_beta.push(crate::grid::fd_multi(&smesh, &beta, &unit)?);
        let mut per = Vec::with_capacity(nh);
        for c in 0..nh {
            per.push(crate::grid::fd_multi(&smesh, &h_comps[c], &unit)?);
        }
        dx_h.push(per);
    }

    let mut hinv = Vec::with_capacity(ns);
    let mut det_h = Vec::with_capacity(ns);
    let mut christoffel = Vec::with_capacity(ns);
    for i in 0..ns {
        let hc: Vec<f64> = h_comps.iter().map(|c| c[i]).collect();
        let det = sym_det(&hc);
        if det <= 0.0 {
            return Err(Error::Numerical("degenerate h on the slice".into()));
        }
        let hi = sym_inv(&hc);
        // metric derivatives: axis 0 = time, axis 1.. spatial
        let dg = |e_ax: usize, a: usize, b: usize| -> f64 {
            let val = if a == 0 && b == 0 {
                // g00 = −β
                if e_ax == 0 {
                    -dt_beta[i]
                } else {
                    -dx_beta[e_ax - 1][i]
                }
            } else if a == 0 || b == 0 {
                0.0
            } else {
                let c = sym_index(d, a - 1, b - 1);
                if e_ax == 0 {
                    dt_h[c][i]
                } else {
                    dx_h[e_ax - 1][c][i]
                }
            };
            val
        };
        let ginv = |a: usize, b: usize| -> f64 {
            if a == 0 && b == 0 {
                -1.0 / beta[i]
            } else if a == 0 || b == 0 {
                0.0
            } else {
                hi[sym_index(d, a - 1, b - 1)]
            }
        };
        let mut chr = vec![0.0; n * n * n];
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut acc = 0.0;
                    for e in 0..n {
                        acc += ginv(c, e) * (dg(a, e, b) + dg(b, e, a) - dg(e, a, b));
                    }
                    chr[(c * n + a) * n + b] = 0.5 * acc;
                }
            }
        }
        hinv.push(hi);
        det_h.push(det);
        christoffel.push(chr);
    }
    Ok(SliceGeometry {
        tau,
        beta,
        h: h_comps,
        hinv,
        det_h,
        christoffel,
        dim: d,
    })
}

/// Partial and covariant derivatives of u on a slice, from the snapshot's
/// stored time levels and spatial stencils.
pub struct SliceDerivs {
    pub u: Vec<f64>,
    /// ∂_a u, components time-first, per sample: du[a][i].
    pub du: Vec<Vec<f64>>,
    /// Covariant Hessian ∇_a∇_b u, row-major (a·n + b), per sample.
    pub cov2: Vec<Vec<f64>>,
}

pub fn slice_derivatives(
    snap: &Snapshot,
    smesh: &Mesh,
    geo: &SliceGeometry,
) -> Result<SliceDerivs> {
    let d = smesh.spatial_dim();
    let n = d + 1;
    let ns = smesh.space_len();
    let u = snap.mid.clone();
    let ut = snap.dudt();
    let utt = snap.d2udt2();
    let mut du = vec![ut.clone(); 1];
    for axis in 0..d {
        let mut unit = vec![0usize; d];
        unit[axis] = 1;
        du.push(crate::grid::fd_multi(smesh, &u, &unit)?);
    }
    du.insert(0, Vec::new());
    du.remove(0); // keep layout [t, x, (y)]
    du[0] = ut;

    // second partials
    let mut partial2 = vec![vec![0.0; ns]; n * n];
    partial2[0] = utt;
    for axis in 0..d {
        // ∂_t∂_x: spatial derivative of the centered time derivative
        let mut unit = vec![0usize; d];
        unit[axis] = 1;
        let txa = crate::grid::fd_multi(smesh, &du[0], &unit)?;
        partial2[axis + 1] = txa.clone();
        partial2[(axis + 1) * n] = txa;
        for axis2 in axis..d {
            let mut orders = vec![0usize; d];
            orders[axis] += 1;
            orders[axis2] += 1;
            let dd = crate::grid::fd_multi(smesh, &u, &orders)?;
            partial2[(axis + 1) * n + (axis2 + 1)] = dd.clone();
            partial2[(axis2 + 1) * n + (axis + 1)] = dd;
        }
    }

    let mut cov2 = Vec::with_capacity(ns);
    for i in 0..ns {
        let mut m = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                let mut v = partial2[a * n + b][i];
                for c in 0..n {
                    v -= geo.christoffel[i][(c * n + a) * n + b] * du[c][i];
                }
                m[a * n + b] = v;
            }
        }
        cov2.push(m);
    }
    Ok(SliceDerivs { u, du, cov2 })
}

// ---------------------------------------------------------------------------
// Energy tensors and integrals
// ---------------------------------------------------------------------------

/// T^{ab,k} at one sample (row-major n×n), per the displayed formulas:
/// T^{ab,0} = −½ g^{ab} u², and for k ≥ 1
/// T^{ab,k} = (g^{ac}g^{bd} − ½g^{ab}g^{cd}) e^{PQ} (∇_c∇_P u)(∇_d∇_Q u)
/// with k−1 contracted e⁻¹ factors.
pub fn energy_tensor_at(
    k: usize,
    i: usize,
    geo: &SliceGeometry,
    derivs: &SliceDerivs,
) -> Result<Vec<f64>> {
    let d = geo.dim;
    let n = d + 1;
    let ginv = |a: usize, b: usize| -> f64 {
        if a == 0 && b == 0 {
            -1.0 / geo.beta[i]
        } else if a == 0 || b == 0 {
            0.0
        } else {
            geo.hinv[i][sym_index(d, a - 1, b - 1)]
        }
    };
    let einv = |a: usize, b: usize| -> f64 {
        if a == 0 && b == 0 {
            1.0 / geo.beta[i]
        } else if a == 0 || b == 0 {
            0.0
        } else {
            geo.hinv[i][sym_index(d, a - 1, b - 1)]
        }
    };
    let mut out = vec![0.0; n * n];
    match k {
        0 => {
            let u2 = derivs.u[i] * derivs.u[i];
            for a in 0..n {
                for b in 0..n {
                    out[a * n + b] = -0.5 * ginv(a, b) * u2;
                }
            }
        }
        1 => {
            let grad: Vec<f64> = (0..n).map(|c| derivs.du[c][i]).collect();
            for a in 0..n {
                for b in 0..n {
                    let mut acc = 0.0;
                    for c in 0..n {
                        for dd in 0..n {
                            acc += (ginv(a, c) * ginv(b, dd)
                                - 0.5 * ginv(a, b) * ginv(c, dd))
                                * grad[c]
                                * grad[dd];
                        }
                    }
                    out[a * n + b] = acc;
                }
            }
        }
        2 => {
            let hess = &derivs.cov2[i];
            for a in 0..n {
                for b in 0..n {
                    let mut acc = 0.0;
                    for c in 0..n {
                        for dd in 0..n {
                            let factor =
                                ginv(a, c) * ginv(b, dd) - 0.5 * ginv(a, b) * ginv(c, dd);
                            if factor == 0.0 {
                                continue;
                            }
                            let mut inner = 0.0;
                            for p in 0..n {
                                for q in 0..n {
                                    inner += einv(p, q) * hess[c * n + p] * hess[dd * n + q];
                                }
                            }
                            acc += factor * inner;
                        }
                    }
                    out[a * n + b] = acc;
                }
            }
        }
        _ => return Err(Error::arg("energy tensors are implemented for k <= 2")),
    }
    Ok(out)
}

/// The order-j summand of the energy integral at one slice:
/// ∫_{S_τ} T^{00,j} V⁻¹ μ_τ with V = √β and μ_τ = √(det h)·dx.
pub fn energy_summand(
    j: usize,
    geo: &SliceGeometry,
    derivs: &SliceDerivs,
    smesh: &Mesh,
) -> Result<f64> {
    let cell = smesh.space_cell();
    let ns = smesh.space_len();
    let mut acc = 0.0;
    for i in 0..ns {
        let t = energy_tensor_at(j, i, geo, derivs)?;
        let density = t[0] / geo.beta[i].sqrt() * geo.det_h[i].sqrt();
        acc += density;
    }
    Ok(acc * cell)
}

/// E^k_{τ,ε} = Σ_{j ≤ k} of the order-j summands.
pub fn energy_integral(
    k: usize,
    geo: &SliceGeometry,
    derivs: &SliceDerivs,
    smesh: &Mesh,
) -> Result<f64> {
    let mut acc = 0.0;
    for j in 0..=k {
        acc += energy_summand(j, geo, derivs, smesh)?;
    }
    Ok(acc)
}

/// Sobolev norms of u at order k: the squared slice norm on S_τ and the
/// squared region norm on Ω_τ (the latter accumulated by the caller across
/// slices).
pub fn sobolev_slice_norm_sq(
    k: usize,
    geo: &SliceGeometry,
    derivs: &SliceDerivs,
    smesh: &Mesh,
) -> Result<f64> {
    if k > 2 {
        return Err(Error::arg("Sobolev norms are implemented for k <= 2"));
    }
    let cell = smesh.space_cell();
    let ns = smesh.space_len();
    let d = geo.dim;
    let n = d + 1;
    let mut acc = 0.0;
    for i in 0..ns {
        let mut point = derivs.u[i] * derivs.u[i];
        if k >= 1 {
            let comps: Vec<f64> = (0..n).map(|a| derivs.du[a][i]).collect();
            point += pointwise_norm_sq(
                TensorSig::Covector,
                &comps,
                geo.beta[i],
                &geo.h[0..sym_len(d)]
                    .iter()
                    .map(|c| c[i])
                    .collect::<Vec<_>>(),
            )?;
        }
        if k >= 2 {
            let hc: Vec<f64> = geo.h.iter().map(|c| c[i]).collect();
            point += pointwise_norm_sq(TensorSig::TwoCovector, &derivs.cov2[i], geo.beta[i], &hc)?;
        }
        acc += point * geo.det_h[i].sqrt();
    }
    Ok(acc * cell)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Energies, norms and fitted constants over a (τ, ε) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Snapshot times per ε member (the per-member leapfrog grids differ).
    pub tau_grid: Vec<Vec<f64>>,
    /// e_values[k_eps][k_order][i_tau] = E^k_{τ,ε}.
    pub e_values: Vec<Vec<Vec<f64>>>,
    /// Squared slice Sobolev norms, same layout.
    pub slice_norms_sq: Vec<Vec<Vec<f64>>>,
    /// Squared region norms accumulated over [0, τ], same layout.
    pub region_norms_sq: Vec<Vec<Vec<f64>>>,
    /// Minimum of the order-1 energy density over all samples and slices.
    pub positivity_min: Vec<f64>,
    pub gronwall: Option<GronwallReport>,
}

impl EnergyReport {
    /// Check the structural invariants: energies nonnegative (up to the
    /// stated tolerance times scale) and nondecreasing in the order k.
    pub fn validate(&self) -> Result<()> {
        for per_eps in &self.e_values {
            let scale = per_eps
                .iter()
                .flat_map(|v| v.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-12 * scale.max(1e-300);
            for (k, per_k) in per_eps.iter().enumerate() {
                for (it, v) in per_k.iter().enumerate() {
                    if *v < -tol {
                        return Err(Error::Numerical(format!(
                            "negative energy E^{k} = {v} at slice {it}"
                        )));
                    }
                    if k > 0 && *v + tol < per_eps[k - 1][it] {
                        return Err(Error::Numerical(format!(
                            "E^{k} not nondecreasing in k at slice {it}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Fitted Gronwall constants per ε for E¹_τ ≤ (E¹_0 + C′‖f‖²)·e^{C‴τ}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GronwallReport {
    /// Smallest admissible C‴ per ε.
    pub c3: Vec<f64>,
    /// The inhomogeneity constant C′ used (0 without f, 1 with).
    pub c_prime: f64,
    /// max/min of the clamped C‴ over the ε-tail.
    pub uniformity_factor: f64,
    pub allowed_factor: f64,
    pub pass: bool,
}

/// Compute energies, Sobolev norms, positivity minima and (for k_max ≥ 1)
/// the Gronwall constants of a solution.
pub fn energy_report(
    g: &MetricSplit,
    solution: &SolutionNet,
    k_max: usize,
    gronwall_factor: f64,
) -> Result<EnergyReport> {
    if k_max > 2 {
        return Err(Error::arg("energies are implemented for k <= 2"));
    }
    let smesh = &solution.spatial_mesh;
    let n_eps = solution.grid.len();
    let mut tau_grid = Vec::with_capacity(n_eps);
    let mut e_values = Vec::with_capacity(n_eps);
    let mut slice_norms_sq = Vec::with_capacity(n_eps);
    let mut region_norms_sq = Vec::with_capacity(n_eps);
    let mut positivity_min = Vec::with_capacity(n_eps);
    // region norm of f at order 0, per ε (for the Gronwall inhomogeneity)
    let mut c3 = Vec::with_capacity(n_eps);

    for (k_eps, member) in solution.members.iter().enumerate() {
        let taus: Vec<f64> = member.snapshots.iter().map(|s| s.tau).collect();
        let mut per_k_e = vec![Vec::with_capacity(taus.len()); k_max + 1];
        let mut per_k_s = vec![Vec::with_capacity(taus.len()); k_max + 1];
        let mut per_k_r = vec![Vec::with_capacity(taus.len()); k_max + 1];
        let mut pos_min = f64::INFINITY;
        let mut region_acc = vec![0.0; k_max + 1];
        let mut prev_slice: Option<(f64, Vec<f64>)> = None;

        for snap in &member.snapshots {
            let geo = slice_geometry(g, k_eps, snap.tau)?;
            let derivs = slice_derivatives(snap, smesh, &geo)?;
            let mut summands = Vec::with_capacity(k_max + 1);
            for j in 0..=k_max {
                summands.push(energy_summand(j, &geo, &derivs, smesh)?);
            }
            let mut slice_sq = Vec::with_capacity(k_max + 1);
            for j in 0..=k_max {
                slice_sq.push(sobolev_slice_norm_sq(j, &geo, &derivs, smesh)?);
            }
            // dominant-energy density minimum (order 1)
            if k_max >= 1 {
                for i in 0..smesh.space_len() {
                    let t = energy_tensor_at(1, i, &geo, &derivs)?;
                    pos_min = pos_min.min(t[0]);
                }
            }
            // region integrals: trapezoid in time of the slice integrands
            // with the spacetime volume factor √β
            let mut spacetime_sq = Vec::with_capacity(k_max + 1);
            for j in 0..=k_max {
                // reuse the slice integrand but weight with √(β det h)
                let mut acc = 0.0;
                let cell = smesh.space_cell();
                for i in 0..smesh.space_len() {
                    let mut point = derivs.u[i] * derivs.u[i];
                    if j >= 1 {
                        let n = geo.dim + 1;
                        let comps: Vec<f64> = (0..n).map(|a| derivs.du[a][i]).collect();
                        let hc: Vec<f64> = geo.h.iter().map(|c| c[i]).collect();
                        point += pointwise_norm_sq(TensorSig::Covector, &comps, geo.beta[i], &hc)?;
                    }
                    if j >= 2 {
                        let hc: Vec<f64> = geo.h.iter().map(|c| c[i]).collect();
                        point += pointwise_norm_sq(
                            TensorSig::TwoCovector,
                            &derivs.cov2[i],
                            geo.beta[i],
                            &hc,
                        )?;
                    }
                    acc += point * (geo.beta[i] * geo.det_h[i]).sqrt();
                }
                spacetime_sq.push(acc * cell);
            }
            if let Some((prev_tau, prev_vals)) = &prev_slice {
                let dt = snap.tau - prev_tau;
                for j in 0..=k_max {
                    region_acc[j] += 0.5 * dt * (prev_vals[j] + spacetime_sq[j]);
                }
            }
            prev_slice = Some((snap.tau, spacetime_sq));

            for j in 0..=k_max {
                // E^k is the prefix sum of the summands
                let e: f64 = summands[..=j].iter().sum();
                per_k_e[j].push(e);
                per_k_s[j].push(slice_sq[j]);
                per_k_r[j].push(region_acc[j]);
            }
        }
        // Gronwall fit at order 1 (C₁'' = 0): smallest C''' with
        // E(τ) ≤ (E0 + C′·F)·e^{C'''τ}
        if k_max >= 1 {
            let e1 = &per_k_e[1];
            let e0 = e1[0];
            let c_prime_f = 0.0; // homogeneous path; f enters via verify_gronwall
            let base = e0 + c_prime_f;
            let mut c = 0.0f64;
            for (s, &e) in member.snapshots.iter().zip(e1.iter()).skip(1) {
                let (tau, _) = (s.tau, e);
                if base > 0.0 && e > 0.0 && tau > 0.0 {
                    c = c.max((e / base).ln() / tau);
                }
            }
            c3.push(c.max(0.0));
        }
        tau_grid.push(taus);
        e_values.push(per_k_e);
        slice_norms_sq.push(per_k_s);
        region_norms_sq.push(per_k_r);
        positivity_min.push(if pos_min.is_finite() { pos_min } else { 0.0 });
    }

    let gronwall = if k_max >= 1 {
        Some(gronwall_from_constants(c3, 0.0, gronwall_factor, &solution.grid))
    } else {
        None
    };
    let report = EnergyReport {
        tau_grid,
        e_values,
        slice_norms_sq,
        region_norms_sq,
        positivity_min,
        gronwall,
    };
    Ok(report)
}

fn gronwall_from_constants(
    c3: Vec<f64>,
    c_prime: f64,
    allowed_factor: f64,
    grid: &crate::grid::EpsGrid,
) -> GronwallReport {
    const FLOOR: f64 = 1e-6;
    let tail = grid.tail_indices();
    let clamped: Vec<f64> = c3[tail].iter().map(|c| c.max(FLOOR)).collect();
    let max = clamped.iter().cloned().fold(0.0f64, f64::max);
    let min = clamped.iter().cloned().fold(f64::INFINITY, f64::min);
    // all constants at the floor means the bound is degenerate-trivial
    let uniformity_factor = if max <= FLOOR { 1.0 } else { max / min };
    GronwallReport {
        pass: uniformity_factor <= allowed_factor,
        c3,
        c_prime,
        uniformity_factor,
        allowed_factor,
    }
}

/// Dominant-energy check: minimum of the order-1 energy density
/// T^{ab,1} ξ_a ξ_b over all samples and slices, per ε.
pub fn verify_dominant_energy(g: &MetricSplit, solution: &SolutionNet) -> Result<Vec<f64>> {
    let smesh = &solution.spatial_mesh;
    let mut mins = Vec::with_capacity(solution.members.len());
    for (k_eps, member) in solution.members.iter().enumerate() {
        let mut m = f64::INFINITY;
        for snap in &member.snapshots {
            let geo = slice_geometry(g, k_eps, snap.tau)?;
            let derivs = slice_derivatives(snap, smesh, &geo)?;
            for i in 0..smesh.space_len() {
                let t = energy_tensor_at(1, i, &geo, &derivs)?;
                m = m.min(t[0]);
            }
        }
        mins.push(m);
    }
    Ok(mins)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormEnergyReport {
    /// Observed band of E¹/(slice norm)² over all (τ, ε).
    pub c_low: f64,
    pub c_high: f64,
    /// max/min of the per-ε band midpoints over the tail.
    pub band_spread: f64,
    pub pass: bool,
}

/// Empirical norm–energy equivalence: ratios E^k/(slice norm)² over (τ, ε)
/// must lie in a positive band.
pub fn verify_norm_energy_equivalence(
    report: &EnergyReport,
    grid: &crate::grid::EpsGrid,
    k: usize,
    band: [f64; 2],
) -> Result<NormEnergyReport> {
    let mut c_low = f64::INFINITY;
    let mut c_high = 0.0f64;
    let mut mid_per_eps = Vec::new();
    for (k_eps, per_k) in report.e_values.iter().enumerate() {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (e, s) in per_k[k].iter().zip(&report.slice_norms_sq[k_eps][k]) {
            if *s <= 0.0 {
                continue; // zero-norm slices are skipped
            }
            let r = e / s;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if lo.is_finite() {
            c_low = c_low.min(lo);
            c_high = c_high.max(hi);
            mid_per_eps.push(0.5 * (lo + hi));
        }
    }
    if !c_low.is_finite() {
        return Err(Error::Numerical("all slices had zero norm".into()));
    }
    let tail = grid.tail_indices();
    let tail_mids: Vec<f64> = mid_per_eps
        .get(tail.clone())
        .unwrap_or(&mid_per_eps)
        .to_vec();
    let band_spread = tail_mids.iter().cloned().fold(0.0f64, f64::max)
        / tail_mids.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = c_low >= band[0] && c_high <= band[1];
    Ok(NormEnergyReport {
        c_low,
        c_high,
        band_spread,
        pass,
    })
}

/// Fit Gronwall constants with an explicit inhomogeneity: per ε the smallest
/// C‴ ≥ 0 with E¹_τ ≤ (E¹_0 + C′·‖f‖²_{Ω_T})·e^{C‴τ}; C′ = 1 when f is
/// present, 0 otherwise.
pub fn verify_gronwall(
    g: &MetricSplit,
    solution: &SolutionNet,
    f: Option<&crate::nets::ScalarNet>,
    allowed_factor: f64,
) -> Result<GronwallReport> {
    let smesh = &solution.spatial_mesh;
    let mut c3 = Vec::with_capacity(solution.members.len());
    let c_prime = if f.is_some() { 1.0 } else { 0.0 };
    for (k_eps, member) in solution.members.iter().enumerate() {
        // region norm² of f over [0, T] (order 0)
        let f_norm_sq = match f {
            Some(fnet) => {
                let fmesh = fnet.mesh();
                let ta = fmesh.time.as_ref().unwrap();
                let ns = fmesh.space_len();
                let mut acc = 0.0;
                for it in 0..ta.n {
                    let tau = ta.coord(it);
                    if tau < 0.0 || tau > solution.t_final {
                        continue;
                    }
                    let geo = slice_geometry(g, k_eps, tau)?;
                    let mut s = 0.0;
                    for i in 0..ns {
                        let v = fnet.sample(k_eps)[it * ns + i];
                        s += v * v * (geo.beta[i] * geo.det_h[i]).sqrt();
                    }
                    let w = if it == 0 || it == ta.n - 1 { 0.5 } else { 1.0 };
                    acc += w * s * fmesh.space_cell() * ta.spacing();
                }
                acc
            }
            None => 0.0,
        };
        let mut e0 = 0.0;
        let mut c = 0.0f64;
        for (idx, snap) in member.snapshots.iter().enumerate() {
            let geo = slice_geometry(g, k_eps, snap.tau)?;
            let derivs = slice_derivatives(snap, smesh, &geo)?;
            let e = energy_integral(1, &geo, &derivs, smesh)?;
            if idx == 0 {
                e0 = e;
                continue;
            }
            let base = e0 + c_prime * f_norm_sq;
            if base > 0.0 && e > 0.0 && snap.tau > 0.0 {
                c = c.max((e / base).ln() / snap.tau);
            } else if base <= 0.0 && e > 1e-300 {
                return Err(Error::Numerical(
                    "zero initial energy with nonzero solution (noise floor)".into(),
                ));
            }
        }
        c3.push(c.max(0.0));
    }
    Ok(gronwall_from_constants(
        c3,
        c_prime,
        allowed_factor,
        &solution.grid,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{EpsGrid, SpaceAxis, TimeAxis};
    use crate::nets::ScalarNet;
    use crate::solver::{solve, CauchyData, SolveOptions};
    use crate::spacetime::{make_minkowski, make_pp_wave_rosen, MetricSplit};
    use approx::assert_relative_eq;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn st_mesh(nt: usize, nx: usize, t1: f64) -> Mesh {
        Mesh::space_time(
            TimeAxis { t0: 0.0, t1, n: nt },
            vec![SpaceAxis {
                extent: TWO_PI,
                n: nx,
            }],
        )
        .unwrap()
    }

    fn grid() -> EpsGrid {
        EpsGrid::geometric(0.2, 4).unwrap()
    }

    fn standing_solution(nx: usize, t1: f64) -> (MetricSplit, SolutionNet) {
        let mesh = st_mesh(17, nx, t1);
        let g = make_minkowski(&mesh, &grid()).unwrap();
        let s = mesh.spatial_part();
        let u0 = ScalarNet::from_fn(grid().clone(), s.clone(), |_, x| x[0].sin()).unwrap();
        let u1 = ScalarNet::from_fn(grid().clone(), s, |_, _| 0.0).unwrap();
        let data = CauchyData::new(u0, u1).unwrap();
        let sol = solve(&g, &data, t1, &SolveOptions::default()).unwrap();
        (g, sol)
    }

    #[test]
    fn aux_metric_examples() {
        // Minkowski: e = dt² + dx², so ‖e‖ = √2 and ∇e ≡ 0
        let mesh = st_mesh(17, 64, 0.5);
        let g = make_minkowski(&mesh, &grid()).unwrap();
        let e = aux_metric(&g).unwrap();
        assert!(e.grad_norm_estimate.is_zero_net());
        for s in &e.norm_estimate.sup_values {
            assert_relative_eq!(*s, 2.0f64.sqrt(), epsilon = 1e-12);
        }
        // β = 4, h = id: e = 4dt² + dx²
        let g4 = MetricSplit::from_fields(
            grid().clone(),
            mesh.clone(),
            |_, _| 4.0,
            |_, _| vec![1.0],
        )
        .unwrap();
        let e4 = aux_metric(&g4).unwrap();
        for s in &e4.norm_estimate.sup_values {
            assert_relative_eq!(*s, 17.0f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn aux_metric_bounded_for_mollified_ppwave() {
        let grid = EpsGrid::geometric(0.2, 6).unwrap();
        let mesh = Mesh::space_time(
            TimeAxis {
                t0: -0.25,
                t1: 0.5,
                n: 513,
            },
            vec![
                SpaceAxis { extent: 4.0, n: 8 },
                SpaceAxis { extent: 4.0, n: 8 },
            ],
        )
        .unwrap();
        let g = make_pp_wave_rosen(&mesh, &grid, true).unwrap();
        let e = aux_metric(&g).unwrap();
        assert!(
            e.grad_norm_estimate.exponent <= 0.2,
            "∇e exponent {}",
            e.grad_norm_estimate.exponent
        );
    }

    #[test]
    fn pointwise_norm_examples() {
        // scalar
        assert_relative_eq!(
            pointwise_norm_sq(TensorSig::Scalar, &[3.0], 1.0, &[1.0]).unwrap(),
            9.0
        );
        // one-form du in Minkowski: u_t² + u_x²
        let v = pointwise_norm_sq(TensorSig::Covector, &[0.3, -0.4], 1.0, &[1.0]).unwrap();
        assert_relative_eq!(v, 0.25, epsilon = 1e-14);
        // covector dt in e = β dt² + h: ‖dt‖² = 1/β
        let v = pointwise_norm_sq(TensorSig::Covector, &[1.0, 0.0], 4.0, &[1.0]).unwrap();
        assert_relative_eq!(v, 0.25, epsilon = 1e-14);
    }

    #[test]
    fn sobolev_norm_examples() {
        // u ≡ 1 on the circle of circumference 2π: slice norm² (k = 0) = 2π
        let (g, _) = standing_solution(256, 0.5);
        let smesh = g.mesh().spatial_part();
        let geo = slice_geometry(&g, 0, 0.0).unwrap();
        let ns = smesh.space_len();
        let snap = Snapshot {
            tau: 0.0,
            dt: 1e-2,
            prev: vec![1.0; ns],
            mid: vec![1.0; ns],
            next: vec![1.0; ns],
        };
        let derivs = slice_derivatives(&snap, &smesh, &geo).unwrap();
        let n0 = sobolev_slice_norm_sq(0, &geo, &derivs, &smesh).unwrap();
        assert_relative_eq!(n0, TWO_PI, epsilon = 1e-10);

        // standing wave at τ = 0, k = 1: ∫ u² + u_t² + u_x² = π + 0 + π = 2π
        let u: Vec<f64> = (0..ns).map(|i| smesh.space[0].coord(i).sin()).collect();
        let snap = Snapshot {
            tau: 0.0,
            dt: 1e-2,
            prev: u.clone(),
            mid: u.clone(),
            next: u.clone(),
        };
        let derivs = slice_derivatives(&snap, &smesh, &geo).unwrap();
        let n1 = sobolev_slice_norm_sq(1, &geo, &derivs, &smesh).unwrap();
        assert_relative_eq!(n1, 2.0 * TWO_PI / 2.0, max_relative = 1e-3);
    }

    #[test]
    fn region_volume_scales_with_sqrt_beta() {
        // scaling β → 4β doubles the spacetime volume factor √β
        let mesh = st_mesh(9, 64, 0.5);
        let g1 = make_minkowski(&mesh, &grid()).unwrap();
        let g4 = MetricSplit::from_fields(
            grid().clone(),
            mesh.clone(),
            |_, _| 4.0,
            |_, _| vec![1.0],
        )
        .unwrap();
        let geo1 = slice_geometry(&g1, 0, 0.25).unwrap();
        let geo4 = slice_geometry(&g4, 0, 0.25).unwrap();
        let vol1: f64 = geo1
            .beta
            .iter()
            .zip(&geo1.det_h)
            .map(|(b, d)| (b * d).sqrt())
            .sum();
        let vol4: f64 = geo4
            .beta
            .iter()
            .zip(&geo4.det_h)
            .map(|(b, d)| (b * d).sqrt())
            .sum();
        assert_relative_eq!(vol4, 2.0 * vol1, epsilon = 1e-12);
    }

    #[test]
    fn energy_tensor_examples() {
        let (g, sol) = standing_solution(256, 1.0);
        let smesh = &sol.spatial_mesh;
        let geo = slice_geometry(&g, 0, 0.0).unwrap();
        let snap = &sol.members[0].snapshots[0];
        let derivs = slice_derivatives(snap, smesh, &geo).unwrap();
        // T^{00,0} = ½u², T^{00,1} = ½(u_t² + u_x²) in Minkowski
        for i in (0..smesh.space_len()).step_by(17) {
            let t0 = energy_tensor_at(0, i, &geo, &derivs).unwrap();
            assert_relative_eq!(t0[0], 0.5 * derivs.u[i] * derivs.u[i], epsilon = 1e-13);
            let t1 = energy_tensor_at(1, i, &geo, &derivs).unwrap();
            let expect = 0.5 * (derivs.du[0][i].powi(2) + derivs.du[1][i].powi(2));
            assert_relative_eq!(t1[0], expect, epsilon = 1e-13);
        }
        // zero field → zero tensors
        let ns = smesh.space_len();
        let zsnap = Snapshot {
            tau: 0.0,
            dt: 1e-2,
            prev: vec![0.0; ns],
            mid: vec![0.0; ns],
            next: vec![0.0; ns],
        };
        let zderivs = slice_derivatives(&zsnap, smesh, &geo).unwrap();
        for k in 0..=2 {
            let t = energy_tensor_at(k, 3, &geo, &zderivs).unwrap();
            assert!(t.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn standing_wave_energy_closed_form() {
        // order-1 summand = π/2 at every τ; E¹ = π/2 + (π/2)cos²τ
        let (g, sol) = standing_solution(512, 1.0);
        let smesh = &sol.spatial_mesh;
        let member = &sol.members[0];
        for snap in &member.snapshots {
            let geo = slice_geometry(&g, 0, snap.tau).unwrap();
            let derivs = slice_derivatives(snap, smesh, &geo).unwrap();
            let s1 = energy_summand(1, &geo, &derivs, smesh).unwrap();
            assert_relative_eq!(s1, std::f64::consts::PI / 2.0, max_relative = 1e-4);
            let e1 = energy_integral(1, &geo, &derivs, smesh).unwrap();
            let expect =
                std::f64::consts::PI / 2.0 * (1.0 + snap.tau.cos() * snap.tau.cos());
            assert_relative_eq!(e1, expect, max_relative = 1e-3);
        }
    }

    #[test]
    fn energy_additivity_is_exact() {
        let (g, sol) = standing_solution(128, 0.5);
        let smesh = &sol.spatial_mesh;
        let snap = sol.members[1].at(0.3);
        let geo = slice_geometry(&g, 1, snap.tau).unwrap();
        let derivs = slice_derivatives(snap, smesh, &geo).unwrap();
        let e0 = energy_integral(0, &geo, &derivs, smesh).unwrap();
        let s1 = energy_summand(1, &geo, &derivs, smesh).unwrap();
        let e1 = energy_integral(1, &geo, &derivs, smesh).unwrap();
        assert_eq!(e1, e0 + s1);
    }

    #[test]
    fn dominant_energy_nonnegative() {
        let (g, sol) = standing_solution(128, 0.5);
        let mins = verify_dominant_energy(&g, &sol).unwrap();
        for m in mins {
            assert!(m >= 0.0, "energy density minimum {m}");
        }
    }

    #[test]
    fn norm_energy_ratio_band_and_scaling_invariance() {
        let (g, sol) = standing_solution(256, 1.0);
        let report = energy_report(&g, &sol, 1, 2.0).unwrap();
        report.validate().unwrap();
        let ne = verify_norm_energy_equivalence(&report, &sol.grid, 1, [0.2, 1.2]).unwrap();
        assert!(ne.pass, "band [{}, {}]", ne.c_low, ne.c_high);
        // the standing-wave ratio is exactly ½
        assert_relative_eq!(ne.c_low, 0.5, max_relative = 1e-2);
        assert_relative_eq!(ne.c_high, 0.5, max_relative = 1e-2);

        // u → 2u multiplies both sides by 4 exactly (dyadic scale)
        let smesh = &sol.spatial_mesh;
        let snap = sol.members[0].at(0.5);
        let geo = slice_geometry(&g, 0, snap.tau).unwrap();
        let derivs = slice_derivatives(snap, smesh, &geo).unwrap();
        let scaled = Snapshot {
            tau: snap.tau,
            dt: snap.dt,
            prev: snap.prev.iter().map(|v| 2.0 * v).collect(),
            mid: snap.mid.iter().map(|v| 2.0 * v).collect(),
            next: snap.next.iter().map(|v| 2.0 * v).collect(),
        };
        let derivs2 = slice_derivatives(&scaled, smesh, &geo).unwrap();
        let e1 = energy_integral(1, &geo, &derivs, smesh).unwrap();
        let e2 = energy_integral(1, &geo, &derivs2, smesh).unwrap();
        let n1 = sobolev_slice_norm_sq(1, &geo, &derivs, smesh).unwrap();
        let n2 = sobolev_slice_norm_sq(1, &geo, &derivs2, smesh).unwrap();
        assert_eq!(e2 / e1, 4.0);
        assert_eq!(n2 / n1, 4.0);
    }

    #[test]
    fn constant_field_energy_is_half_norm() {
        // E⁰ = ½·(norm)² exactly in Minkowski for u ≡ const
        let (g, sol) = standing_solution(64, 0.5);
        let smesh = &sol.spatial_mesh;
        let ns = smesh.space_len();
        let geo = slice_geometry(&g, 0, 0.0).unwrap();
        let snap = Snapshot {
            tau: 0.0,
            dt: 1e-2,
            prev: vec![1.7; ns],
            mid: vec![1.7; ns],
            next: vec![1.7; ns],
        };
        let derivs = slice_derivatives(&snap, smesh, &geo).unwrap();
        let e0 = energy_integral(0, &geo, &derivs, smesh).unwrap();
        let n0 = sobolev_slice_norm_sq(0, &geo, &derivs, smesh).unwrap();
        assert_relative_eq!(e0, 0.5 * n0, epsilon = 1e-12);
    }

    #[test]
    fn static_energy_conservation() {
        // order-1 summand drifts < 1e−4 relative over τ ∈ [0,1]
        let (g, sol) = standing_solution(1024, 1.0);
        let smesh = &sol.spatial_mesh;
        let member = &sol.members[0];
        let mut vals = Vec::new();
        for snap in &member.snapshots {
            let geo = slice_geometry(&g, 0, snap.tau).unwrap();
            let derivs = slice_derivatives(snap, smesh, &geo).unwrap();
            vals.push(energy_summand(1, &geo, &derivs, smesh).unwrap());
        }
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!(
            (hi - lo) / hi < 1e-4,
            "order-1 summand drift {} over [{lo}, {hi}]",
            (hi - lo) / hi
        );
    }

    #[test]
    fn gronwall_standing_wave_is_trivial() {
        // E¹_τ/E¹_0 ≤ 1, so C''' = 0 suffices
        let (g, sol) = standing_solution(256, 1.0);
        let rep = verify_gronwall(&g, &sol, None, 2.0).unwrap();
        assert!(rep.pass);
        for c in &rep.c3 {
            assert!(*c < 1e-3, "C''' = {c}");
        }
        assert_eq!(rep.uniformity_factor, 1.0);
    }

    #[test]
    fn gronwall_zero_data_trivial() {
        let mesh = st_mesh(9, 64, 0.5);
        let g = make_minkowski(&mesh, &grid()).unwrap();
        let s = mesh.spatial_part();
        let zero = ScalarNet::from_fn(grid().clone(), s.clone(), |_, _| 0.0).unwrap();
        let data = CauchyData::new(zero.clone(), zero).unwrap();
        let sol = solve(&g, &data, 0.5, &SolveOptions::default()).unwrap();
        let rep = verify_gronwall(&g, &sol, None, 2.0).unwrap();
        assert!(rep.pass);
        assert!(rep.c3.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn gronwall_negligible_data_energies_decay() {
        // data at scale ε^m give energies decaying at ≥ 2m − 0.5
        let mesh = st_mesh(17, 128, 0.5);
        let egrid = EpsGrid::geometric(0.4, 5).unwrap();
        let g = make_minkowski(&mesh, &egrid).unwrap();
        let s = mesh.spatial_part();
        for m in [1i32, 2] {
            let u0 = ScalarNet::from_fn(egrid.clone(), s.clone(), move |e, x| {
                e.powi(m) * x[0].sin()
            })
            .unwrap();
            let u1 = ScalarNet::from_fn(egrid.clone(), s.clone(), |_, _| 0.0).unwrap();
            let data = CauchyData::new(u0, u1).unwrap();
            let sol = solve(&g, &data, 0.5, &SolveOptions::default()).unwrap();
            let rep = energy_report(&g, &sol, 1, 2.0).unwrap();
            let sup_e: Vec<f64> = rep.e_values.iter().map(|per_k| {
                per_k[1].iter().cloned().fold(0.0f64, f64::max)
            }).collect();
            let est = estimate_order(&sup_e, &egrid).unwrap();
            assert!(
                est.decay_exponent() >= 2.0 * m as f64 - 0.5,
                "m = {m}: energy decay {}",
                est.decay_exponent()
            );
        }
    }
}
