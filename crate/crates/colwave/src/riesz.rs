//! Riesz distributions R_±(α) on an n-dimensional Lorentz vector space.
//!
//! For Re α > n these are the locally integrable functions
//! C(α,n)·γ(X)^{(α−n)/2} on the causal cone J_±(0), γ(X) = t² − |x|²; the
//! family extends holomorphically via □R_±(α+2) = R_±(α) and satisfies
//! R_±(0) = δ₀ and supp R_±(α) ⊆ J_±(0). Pairings are computed in null-radial
//! coordinates p = t − r, q = t + r, where the cone becomes the coordinate
//! quadrant {p ≥ 0, q ≥ 0} and the integrand is smooth, so no cells ever
//! straddle the cone boundary.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::testfn::{quad, TestFunction};

pub mod hadamard;

/// Advanced (future cone) or retarded (past cone) family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeSign {
    Advanced,
    Retarded,
}

/// Parameters of a Riesz distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszParams {
    pub alpha: f64,
    pub n: usize,
    pub sign: ConeSign,
}

impl RieszParams {
    pub fn new(alpha: f64, n: usize, sign: ConeSign) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::arg("alpha must be >= 0"));
        }
        if n < 2 {
            return Err(Error::arg("dimension n must be >= 2"));
        }
        Ok(RieszParams { alpha, n, sign })
    }
}

/// 1/Γ(x), evaluated so that the poles of Γ yield exact zeros and small
/// integer arguments give exact factorials (the closed-form constants in
/// low dimensions must come out bit-exact).
fn recip_gamma(x: f64) -> f64 {
    if x == x.round() {
        if x <= 0.0 {
            return 0.0;
        }
        if x <= 21.0 {
            let mut fact = 1.0f64;
            for k in 2..(x as u64) {
                fact *= k as f64;
            }
            return 1.0 / fact;
        }
    }
    1.0 / gamma(x)
}

/// The normalization constant
/// C(α,n) = 2^{1−α} π^{(2−n)/2} / (Γ(α/2) Γ((α−n)/2 + 1)),
/// with reciprocal gammas so that pole arguments give C = 0.
pub fn riesz_constant(alpha: f64, n: usize) -> f64 {
    let pi = std::f64::consts::PI;
    2.0f64.powf(1.0 - alpha)
        * pi.powf((2.0 - n as f64) / 2.0)
        * recip_gamma(alpha / 2.0)
        * recip_gamma((alpha - n as f64) / 2.0 + 1.0)
}

/// Quadrature controls for cone pairings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairOptions {
    /// Target panel width as a multiple of the test-function width.
    pub panel_width_factor: f64,
    /// Cap on the number of panels per null axis.
    pub max_panels: usize,
    /// Gauss–Legendre nodes in cos θ for the S² rule (n = 4).
    pub n_polar: usize,
    /// Uniform azimuth count for the S¹/S² rules (must be even).
    pub n_azimuth: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            panel_width_factor: 1.0,
            max_panels: 64,
            n_polar: 12,
            n_azimuth: 24,
        }
    }
}

impl PairOptions {
    /// A finer rule for oracle-grade comparisons.
    pub fn refined(&self) -> Self {
        PairOptions {
            panel_width_factor: self.panel_width_factor * 0.5,
            max_panels: self.max_panels * 2,
            n_polar: self.n_polar + 6,
            n_azimuth: self.n_azimuth + 12,
        }
    }
}

/// ⟨R_±(α), φ⟩.
///
/// For α > n this is the direct cone quadrature of C(α,n)·γ^{(α−n)/2}·φ;
/// otherwise the smallest m with α + 2m > n is chosen and the pairing
/// continues analytically as ⟨R_±(α+2m), □^m φ⟩ with □^m φ computed
/// symbolically.
pub fn riesz_pair(params: &RieszParams, phi: &TestFunction, opts: &PairOptions) -> Result<f64> {
    check_phi(params, phi)?;
    let phi_adv = match params.sign {
        ConeSign::Advanced => phi.clone(),
        ConeSign::Retarded => phi.reflect(),
    };
    if params.alpha > params.n as f64 {
        return cone_quadrature(params.alpha, params.n, &phi_adv, opts);
    }
    let mut m = 0usize;
    while params.alpha + 2.0 * m as f64 <= params.n as f64 {
        m += 1;
    }
    let boxed = phi_adv.box_power(m)?;
    cone_quadrature(params.alpha + 2.0 * m as f64, params.n, &boxed, opts)
}

/// Direct cone quadrature at level α ≥ n (continuous integrand). Exposed as
/// the independent route for recursion checks.
pub fn riesz_pair_direct(
    params: &RieszParams,
    phi: &TestFunction,
    opts: &PairOptions,
) -> Result<f64> {
    check_phi(params, phi)?;
    if params.alpha < params.n as f64 {
        return Err(Error::arg(
            "direct quadrature requires alpha >= n (integrable function part)",
        ));
    }
    let phi_adv = match params.sign {
        ConeSign::Advanced => phi.clone(),
        ConeSign::Retarded => phi.reflect(),
    };
    cone_quadrature(params.alpha, params.n, &phi_adv, opts)
}

fn check_phi(params: &RieszParams, phi: &TestFunction) -> Result<()> {
    if phi.dim() != params.n {
        return Err(Error::arg(format!(
            "test function dimension {} does not match n = {}",
            phi.dim(),
            params.n
        )));
    }
    if params.n > 4 || params.n < 2 {
        return Err(Error::arg("pairings support n in 2..=4"));
    }
    Ok(())
}

/// Antipodally symmetric direction rule on S^{n-2} with total weight equal to
/// the sphere measure.
fn direction_rule(n: usize, opts: &PairOptions) -> Vec<(Vec<f64>, f64)> {
    match n {
        2 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        3 => {
            let m = opts.n_azimuth.max(4) & !1;
            (0..m)
                .map(|j| {
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                    (vec![th.cos(), th.sin()], 2.0 * std::f64::consts::PI / m as f64)
                })
                .collect()
        }
        4 => {
            let ma = opts.n_azimuth.max(4) & !1;
            let mut dirs = Vec::with_capacity(opts.n_polar * ma);
            let mu_nodes = quad::nodes_1d(-1.0, 1.0, opts.n_polar.div_ceil(12));
            for (mu, wmu) in mu_nodes {
                let s = (1.0 - mu * mu).sqrt();
                for j in 0..ma {
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / ma as f64;
                    dirs.push((
                        vec![s * th.cos(), s * th.sin(), mu],
                        wmu * 2.0 * std::f64::consts::PI / ma as f64,
                    ));
                }
            }
            dirs
        }
        _ => unreachable!(),
    }
}

/// ∫_{J₊(0)} C(α,n) γ(X)^{(α−n)/2} φ(X) dX in null-radial coordinates.
///
/// With p = t − r, q = t + r, x = rω the future cone is {p ≥ 0, q ≥ 0},
/// γ = pq, and dX = ½ r^{n-2} dp dq dω. The (p,q,ω) chart double-covers
/// space (signed r), which the antipodally symmetric ω rule absorbs into an
/// overall factor ½.
fn cone_quadrature(alpha: f64, n: usize, phi: &TestFunction, opts: &PairOptions) -> Result<f64> {
    let c = riesz_constant(alpha, n);
    if c == 0.0 {
        return Ok(0.0);
    }
    let k = (alpha - n as f64) / 2.0;
    let sb = phi.support_box();
    let ct = phi.center[0];
    let cx_norm: f64 = phi.center[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    let q_max = ct + cx_norm + 2.0 * phi.radius;
    if q_max <= 0.0 || sb[0][1] <= 0.0 {
        // support does not meet the closed future cone
        return Ok(0.0);
    }
    let width = match &phi.family {
        crate::testfn::Family::GaussBump { width, .. } => *width,
        crate::testfn::Family::Bump { .. } => phi.radius / 3.0,
    };
    let panels = ((q_max / (width * opts.panel_width_factor)).ceil() as usize)
        .clamp(4, opts.max_panels);
    let nodes = quad::nodes_1d(0.0, q_max, panels);
    let dirs = direction_rule(n, opts);

    let mut point = vec![0.0; n];
    let mut total = 0.0;
    for (omega, w_dir) in &dirs {
        let mut acc_dir = 0.0;
        for &(p, wp) in &nodes {
            for &(q, wq) in &nodes {
                let t = 0.5 * (p + q);
                let r = 0.5 * (q - p);
                point[0] = t;
                for (a, oa) in omega.iter().enumerate() {
                    point[a + 1] = r * oa;
                }
                let f = phi.eval(&point);
                if f == 0.0 {
                    continue;
                }
                let gamma_pow = if k == 0.0 { 1.0 } else { (p * q).powf(k) };
                let radial = match n {
                    2 => 1.0,
                    3 => r.abs(),
                    4 => r * r,
                    _ => unreachable!(),
                };
                acc_dir += wp * wq * gamma_pow * radial * f;
            }
        }
        total += w_dir * acc_dir;
    }
    // ½ for dt dr = ½ dp dq and ½ for the double cover
    Ok(c * 0.25 * total)
}

/// Deviation details of a recursion check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecursionReport {
    pub alpha: f64,
    pub n: usize,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

/// Verify □R_±(α+2) = R_±(α) against a battery of test functions.
///
/// The left side is always ⟨R(α+2), □φ⟩ through `riesz_pair`. The right side
/// takes an independent route: the exact point value φ(0) when α = 0 (the
/// delta property), the direct cone quadrature when α ≥ n, and the analytic
/// continuation otherwise — so the two sides never share a continuation
/// depth.
pub fn verify_recursion(
    alpha: f64,
    n: usize,
    sign: ConeSign,
    battery: &[TestFunction],
    opts: &PairOptions,
) -> Result<RecursionReport> {
    if battery.is_empty() {
        return Err(Error::arg("recursion check needs a nonempty battery"));
    }
    let up = RieszParams::new(alpha + 2.0, n, sign)?;
    let base = RieszParams::new(alpha, n, sign)?;
    let mut deviations = Vec::with_capacity(battery.len());
    for phi in battery {
        let boxed = match sign {
            ConeSign::Advanced => phi.box_power(1)?,
            // reflect inside riesz_pair handles the sign; box commutes with
            // the reflection so boxing first is equivalent
            ConeSign::Retarded => phi.box_power(1)?,
        };
        let lhs = riesz_pair(&up, &boxed, opts)?;
        let rhs = if alpha == 0.0 {
            let origin = vec![0.0; n];
            phi.eval(&origin)
        } else if alpha >= n as f64 {
            riesz_pair_direct(&base, phi, &opts.refined())?
        } else {
            riesz_pair(&base, phi, &opts.refined())?
        };
        deviations.push((lhs - rhs).abs());
    }
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(RecursionReport {
        alpha,
        n,
        deviations,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants_match_closed_forms() {
        // direct evaluations of C(α,n)
        assert_relative_eq!(riesz_constant(2.0, 2), 0.5, epsilon = 1e-15);
        assert_eq!(riesz_constant(2.0, 4), 0.0);
        assert_relative_eq!(riesz_constant(4.0, 2), 0.125, epsilon = 1e-15);
        // Γ(0) pole in the first factor
        assert_eq!(riesz_constant(0.0, 2), 0.0);
        // n = 4: C(4,4) = 1/(8π), C(6,4) = 1/(64π)
        let pi = std::f64::consts::PI;
        assert_relative_eq!(riesz_constant(4.0, 4), 1.0 / (8.0 * pi), epsilon = 1e-15);
        assert_relative_eq!(riesz_constant(6.0, 4), 1.0 / (64.0 * pi), epsilon = 1e-15);
    }

    fn battery_n2() -> Vec<TestFunction> {
        vec![
            TestFunction::gaussian(vec![0.4, 0.1], 0.35, 1.0).unwrap(),
            TestFunction::gaussian(vec![-0.2, 0.3], 0.3, -0.8).unwrap(),
            TestFunction::gaussian(vec![0.0, 0.0], 0.5, 1.3).unwrap(),
        ]
    }

    #[test]
    fn delta_property_n2() {
        let opts = PairOptions::default();
        for phi in battery_n2() {
            let params = RieszParams::new(0.0, 2, ConeSign::Advanced).unwrap();
            let got = riesz_pair(&params, &phi, &opts).unwrap();
            let want = phi.eval(&[0.0, 0.0]);
            assert_relative_eq!(got, want, max_relative = 1e-7);
        }
    }

    #[test]
    fn strictly_past_support_pairs_to_exact_zero() {
        let phi = TestFunction::gaussian(vec![-4.0, 0.0], 0.3, 1.0).unwrap();
        let params = RieszParams::new(2.0, 2, ConeSign::Advanced).unwrap();
        let got = riesz_pair(&params, &phi, &PairOptions::default()).unwrap();
        assert_eq!(got, 0.0);
        // the same function meets the past cone
        let ret = RieszParams::new(2.0, 2, ConeSign::Retarded).unwrap();
        assert!(riesz_pair(&ret, &phi, &PairOptions::default()).unwrap() != 0.0);
    }

    #[test]
    fn pairing_at_alpha2_matches_cone_volume_oracle() {
        // ⟨R₊(2), φ⟩ = ½ ∫∫_{t>|x|} φ, via the independent direct route
        let opts = PairOptions::default();
        for phi in battery_n2() {
            let params = RieszParams::new(2.0, 2, ConeSign::Advanced).unwrap();
            let via_continuation = riesz_pair(&params, &phi, &opts).unwrap();
            let direct = riesz_pair_direct(&params, &phi, &opts.refined()).unwrap();
            assert_relative_eq!(via_continuation, direct, epsilon = 1e-8, max_relative = 1e-6);
        }
    }

    #[test]
    fn recursion_n2() {
        let rep = verify_recursion(
            2.0,
            2,
            ConeSign::Advanced,
            &battery_n2(),
            &PairOptions::default(),
        )
        .unwrap();
        assert!(rep.max_deviation < 1e-6, "deviation {}", rep.max_deviation);

        let rep0 = verify_recursion(
            0.0,
            2,
            ConeSign::Advanced,
            &battery_n2(),
            &PairOptions::default(),
        )
        .unwrap();
        assert!(rep0.max_deviation < 1e-6, "deviation {}", rep0.max_deviation);
    }

    #[test]
    fn advanced_retarded_symmetry() {
        let phi = TestFunction::gaussian(vec![0.5, -0.2], 0.3, 1.0).unwrap();
        let adv = RieszParams::new(4.0, 2, ConeSign::Advanced).unwrap();
        let ret = RieszParams::new(4.0, 2, ConeSign::Retarded).unwrap();
        let opts = PairOptions::default();
        let a = riesz_pair(&adv, &phi, &opts).unwrap();
        let b = riesz_pair(&ret, &phi.reflect(), &opts).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn pairing_linear_in_phi() {
        let p1 = TestFunction::gaussian(vec![0.3, 0.0], 0.4, 1.0).unwrap();
        let p2 = p1.box_power(1).unwrap(); // same envelope, different polynomial
        let combo = p1.linear_combine(2.5, &p2, -1.5).unwrap();
        let params = RieszParams::new(4.0, 2, ConeSign::Advanced).unwrap();
        let opts = PairOptions::default();
        let lhs = riesz_pair(&params, &combo, &opts).unwrap();
        let rhs = 2.5 * riesz_pair(&params, &p1, &opts).unwrap()
            - 1.5 * riesz_pair(&params, &p2, &opts).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }
}
