//! Composite Gauss–Legendre quadrature helpers.

/// 12-point Gauss–Legendre nodes on [-1, 1].
pub const GL12_NODES: [f64; 12] = [
    -0.981560634246719,
    -0.904117256370475,
    -0.769902674194305,
    -0.587317954286617,
    -0.367831498998180,
    -0.125233408511469,
    0.125233408511469,
    0.367831498998180,
    0.587317954286617,
    0.769902674194305,
    0.904117256370475,
    0.981560634246719,
];

/// Weights matching [`GL12_NODES`].
pub const GL12_WEIGHTS: [f64; 12] = [
    0.047175336386512,
    0.106939325995318,
    0.160078328543346,
    0.203167426723066,
    0.233492536538355,
    0.249147045813403,
    0.249147045813403,
    0.233492536538355,
    0.203167426723066,
    0.160078328543346,
    0.106939325995318,
    0.047175336386512,
];

/// Composite 12-point Gauss–Legendre over [a, b] with `panels` subintervals.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in GL12_NODES.iter().zip(&GL12_WEIGHTS) {
            acc += w * f(mid + 0.5 * h * x);
        }
    }
    acc * 0.5 * h
}

/// Nodes and weights of the composite rule over [a, b].
pub fn nodes_1d(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * 12);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL12_NODES.iter().zip(&GL12_WEIGHTS) {
            out.push((mid + 0.5 * h * x, w * 0.5 * h));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = integrate_1d(|x| x * x * x * x, -1.0, 2.0, 1);
        assert_relative_eq!(v, (2.0f64.powi(5) + 1.0) / 5.0, max_relative = 1e-14);
    }

    #[test]
    fn integrates_gaussian_accurately() {
        let v = integrate_1d(|x| (-x * x / 2.0).exp(), -8.0, 8.0, 16);
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-12);
    }
}
