//! Regularization grids and sampling meshes.
//!
//! An [`EpsGrid`] is the finite stand-in for the continuum of regularization
//! parameters ε ∈ (0,1]: a strictly decreasing sequence, geometric by default,
//! long enough for stable log–log regression. A [`Mesh`] is a flat spatial
//! torus (one or two axes) with an optional bounded time axis; fields are
//! stored flat in row-major order, time axis first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite, strictly decreasing sequence of regularization parameters in (0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    values: Vec<f64>,
}

impl EpsGrid {
    /// Minimum number of entries required for a stable log–log fit.
    pub const MIN_LEN: usize = 4;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < Self::MIN_LEN {
            return Err(Error::arg(format!(
                "eps grid needs at least {} entries, got {}",
                Self::MIN_LEN,
                values.len()
            )));
        }
        for w in values.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::arg("eps grid must be strictly decreasing"));
            }
        }
        if values.iter().any(|&e| !(e > 0.0 && e <= 1.0) || !e.is_finite()) {
            return Err(Error::arg("eps grid values must lie in (0, 1]"));
        }
        Ok(EpsGrid { values })
    }

    /// Geometric grid ε_k = e0 · 2^(−k), k = 0..count.
    pub fn geometric(e0: f64, count: usize) -> Result<Self> {
        Self::with_ratio(e0, 0.5, count)
    }

    /// Geometric grid with an arbitrary ratio in (0,1).
    pub fn with_ratio(e0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::arg("eps grid ratio must lie in (0,1)"));
        }
        let values = (0..count).map(|k| e0 * ratio.powi(k as i32)).collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Indices of the finer half of the grid (the "ε-tail"), at least 3 long.
    pub fn tail_indices(&self) -> std::ops::Range<usize> {
        let start = (self.len() / 2).min(self.len().saturating_sub(3));
        start..self.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }
}

/// One periodic spatial axis of a flat torus: points x_i = i·extent/n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceAxis {
    pub extent: f64,
    pub n: usize,
}

impl SpaceAxis {
    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }
}

/// A bounded, non-periodic time axis with n inclusive sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
}

impl TimeAxis {
    pub fn spacing(&self) -> f64 {
        (self.t1 - self.t0) / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.spacing()
    }
}

/// Sampling mesh: an optional time axis (axis 0 when present) followed by
/// one or two periodic spatial axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub time: Option<TimeAxis>,
    pub space: Vec<SpaceAxis>,
}

impl Mesh {
    pub fn spatial(space: Vec<SpaceAxis>) -> Result<Self> {
        let m = Mesh { time: None, space };
        m.validate()?;
        Ok(m)
    }

    pub fn space_time(time: TimeAxis, space: Vec<SpaceAxis>) -> Result<Self> {
        if time.n < 2 || !(time.t1 > time.t0) {
            return Err(Error::arg("time axis needs t1 > t0 and at least 2 samples"));
        }
        let m = Mesh {
            time: Some(time),
            space,
        };
        m.validate()?;
        Ok(m)
    }

    /// Uniform 1-d torus of circumference `extent` with `n` points.
    pub fn torus_1d(extent: f64, n: usize) -> Self {
        Mesh::spatial(vec![SpaceAxis { extent, n }]).expect("valid 1d torus")
    }

    fn validate(&self) -> Result<()> {
        if self.space.is_empty() || self.space.len() > 2 {
            return Err(Error::arg("spatial dimension must be 1 or 2"));
        }
        for ax in &self.space {
            if ax.n < 4 || !(ax.extent > 0.0) {
                return Err(Error::arg("each spatial axis needs extent > 0 and n >= 4"));
            }
        }
        Ok(())
    }

    pub fn spatial_dim(&self) -> usize {
        self.space.len()
    }

    /// Number of axes including time.
    pub fn num_axes(&self) -> usize {
        self.space.len() + usize::from(self.time.is_some())
    }

    /// Samples along each axis, time first.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(3);
        if let Some(t) = &self.time {
            s.push(t.n);
        }
        s.extend(self.space.iter().map(|a| a.n));
        s
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spacing along each axis, time first.
    pub fn spacings(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(3);
        if let Some(t) = &self.time {
            s.push(t.spacing());
        }
        s.extend(self.space.iter().map(|a| a.spacing()));
        s
    }

    /// Whether a flat axis index is periodic (time is not, space is).
    pub fn axis_periodic(&self, axis: usize) -> bool {
        match &self.time {
            Some(_) => axis != 0,
            None => true,
        }
    }

    pub fn space_len(&self) -> usize {
        self.space.iter().map(|a| a.n).product()
    }

    /// Cell volume of the spatial torus.
    pub fn space_cell(&self) -> f64 {
        self.space.iter().map(|a| a.spacing()).product()
    }

    /// Drop the time axis, keeping the spatial torus.
    pub fn spatial_part(&self) -> Mesh {
        Mesh {
            time: None,
            space: self.space.clone(),
        }
    }

    /// Coordinates of the flat spatial index (no time axis involved).
    pub fn space_coords(&self, flat: usize) -> Vec<f64> {
        match self.space.len() {
            1 => vec![self.space[0].coord(flat)],
            2 => {
                let ny = self.space[1].n;
                vec![
                    self.space[0].coord(flat / ny),
                    self.space[1].coord(flat % ny),
                ]
            }
            _ => unreachable!(),
        }
    }
}

/// Centered finite-difference stencils for derivative orders 0..=3.
/// Returns (offsets, weights) before division by h^order.
fn stencil(order: usize) -> (&'static [isize], &'static [f64]) {
    match order {
        0 => (&[0], &[1.0]),
        1 => (&[-1, 1], &[-0.5, 0.5]),
        2 => (&[-1, 0, 1], &[1.0, -2.0, 1.0]),
        3 => (&[-2, -1, 1, 2], &[-0.5, 1.0, -1.0, 0.5]),
        _ => panic!("stencil order > 3 unsupported"),
    }
}

/// Maximum finite-difference order supported along one axis.
pub const MAX_FD_ORDER: usize = 3;

/// Apply a centered finite difference of the given order along `axis` to a
/// flat field sampled on `mesh`.
///
/// Periodic axes wrap. On the (non-periodic) time axis the result is valid
/// only where the stencil fits; boundary samples are filled with the nearest
/// interior value so sup-norms stay finite, and `valid_range` reports the
/// trustworthy index range.
pub fn fd_axis(mesh: &Mesh, field: &[f64], axis: usize, order: usize) -> Result<Vec<f64>> {
    if order > MAX_FD_ORDER {
        return Err(Error::arg(format!(
            "finite-difference order {order} exceeds supported maximum {MAX_FD_ORDER}"
        )));
    }
    let shape = mesh.shape();
    if axis >= shape.len() {
        return Err(Error::arg("axis out of range"));
    }
    if field.len() != mesh.len() {
        return Err(Error::arg("field length does not match mesh"));
    }
    if order == 0 {
        return Ok(field.to_vec());
    }
    let n_axis = shape[axis];
    let (offs, wts) = stencil(order);
    let reach = offs.iter().map(|o| o.unsigned_abs()).max().unwrap();
    if n_axis < 2 * reach + 1 {
        return Err(Error::arg(format!(
            "axis with {n_axis} samples cannot support an order-{order} stencil"
        )));
    }
    let h = mesh.spacings()[axis];
    let hp = h.powi(order as i32);
    let periodic = mesh.axis_periodic(axis);

    // Strides for row-major layout.
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
            for j in 0..n_axis {
                let jj = if periodic {
                    j
                } else {
                    // clamp so the stencil fits; boundary values are copies
                    j.clamp(reach, n_axis - 1 - reach)
                };
                let mut acc = 0.0;
                for (off, w) in offs.iter().zip(wts) {
                    let k = if periodic {
                        ((jj as isize + off).rem_euclid(n_axis as isize)) as usize
                    } else {
                        (jj as isize + off) as usize
                    };
                    acc += w * field[base + k * stride];
                }
                out[base + j * stride] = acc / hp;
            }
        }
    }
    Ok(out)
}

/// Index range along a non-periodic axis where an FD result of the given
/// order is trustworthy.
pub fn fd_valid_range(mesh: &Mesh, axis: usize, order: usize) -> std::ops::Range<usize> {
    let n = mesh.shape()[axis];
    if mesh.axis_periodic(axis) || order == 0 {
        return 0..n;
    }
    let (offs, _) = stencil(order);
    let reach = offs.iter().map(|o| o.unsigned_abs()).max().unwrap();
    reach..n - reach
}

/// Apply a mixed derivative given per-axis orders (time first when present).
pub fn fd_multi(mesh: &Mesh, field: &[f64], orders: &[usize]) -> Result<Vec<f64>> {
    if orders.len() != mesh.num_axes() {
        return Err(Error::arg("multi-index length does not match mesh axes"));
    }
    let mut cur = field.to_vec();
    for (axis, &ord) in orders.iter().enumerate() {
        if ord > 0 {
            cur = fd_axis(mesh, &cur, axis, ord)?;
        }
    }
    Ok(cur)
}

/// Supremum of |field| over the samples of a sub-box given as per-axis index
/// ranges (time first when present).
pub fn sup_abs_box(mesh: &Mesh, field: &[f64], ranges: &[std::ops::Range<usize>]) -> f64 {
    let shape = mesh.shape();
    assert_eq!(ranges.len(), shape.len());
    let mut strides = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    let mut sup = 0.0f64;
    let mut idx = vec![0usize; shape.len()];
    fn rec(
        dim: usize,
        ranges: &[std::ops::Range<usize>],
        strides: &[usize],
        idx: &mut Vec<usize>,
        field: &[f64],
        sup: &mut f64,
    ) {
        if dim == ranges.len() {
            let flat: usize = idx.iter().zip(strides).map(|(i, s)| i * s).sum();
            let v = field[flat].abs();
            if v > *sup {
                *sup = v;
            }
            return;
        }
        for i in ranges[dim].clone() {
            idx[dim] = i;
            rec(dim + 1, ranges, strides, idx, field, sup);
        }
    }
    rec(0, ranges, &strides, &mut idx, field, &mut sup);
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eps_grid_rejects_short_and_unsorted() {
        assert!(EpsGrid::new(vec![0.1, 0.05, 0.025]).is_err());
        assert!(EpsGrid::new(vec![0.1, 0.2, 0.05, 0.025]).is_err());
        assert!(EpsGrid::new(vec![1.5, 0.5, 0.25, 0.125]).is_err());
        assert!(EpsGrid::geometric(0.1, 6).is_ok());
    }

    #[test]
    fn fd_periodic_derivative_of_sine() {
        let mesh = Mesh::torus_1d(2.0 * std::f64::consts::PI, 256);
        let f: Vec<f64> = (0..256).map(|i| mesh.space[0].coord(i).sin()).collect();
        let df = fd_axis(&mesh, &f, 0, 1).unwrap();
        for i in 0..256 {
            let x = mesh.space[0].coord(i);
            assert_relative_eq!(df[i], x.cos(), epsilon = 1e-3);
        }
        let d2f = fd_axis(&mesh, &f, 0, 2).unwrap();
        for i in 0..256 {
            let x = mesh.space[0].coord(i);
            assert_relative_eq!(d2f[i], -x.sin(), epsilon = 1e-3);
        }
    }

    #[test]
    fn fd_time_axis_clamps_boundary() {
        let mesh = Mesh::space_time(
            TimeAxis {
                t0: 0.0,
                t1: 1.0,
                n: 11,
            },
            vec![SpaceAxis {
                extent: 1.0,
                n: 4,
            }],
        )
        .unwrap();
        // f(t,x) = t^2, df/dt = 2t
        let f: Vec<f64> = (0..mesh.len())
            .map(|flat| {
                let it = flat / 4;
                let t = mesh.time.unwrap().coord(it);
                t * t
            })
            .collect();
        let df = fd_axis(&mesh, &f, 0, 1).unwrap();
        let r = fd_valid_range(&mesh, 0, 1);
        for it in r {
            let t = mesh.time.unwrap().coord(it);
            assert_relative_eq!(df[it * 4], 2.0 * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn fd_rejects_deep_orders() {
        let mesh = Mesh::torus_1d(1.0, 16);
        let f = vec![0.0; 16];
        assert!(fd_axis(&mesh, &f, 0, 4).is_err());
    }
}
