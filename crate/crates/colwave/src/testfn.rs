//! Smooth compactly supported test functions with exact symbolic derivatives.
//!
//! Two families are provided. The Gaussian-bump family is a polynomial times
//! a Gaussian, truncated at a radius where the Gaussian tail is below f64
//! resolution (so the idealized smooth cutoff is numerically invisible); this
//! family is closed under differentiation, which gives exact wave-operator
//! powers □^m φ without finite differences. The classical bump
//! exp(−1/(1−s²)) is provided for batteries that only need point evaluation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod quad;

/// Maximum number of variables a test function can depend on.
pub const MAX_VARS: usize = 4;

/// Sparse multivariate polynomial in up to [`MAX_VARS`] variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<[u8; MAX_VARS], f64>,
}

impl Poly {
    pub fn constant(dim: usize, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert([0u8; MAX_VARS], c);
        }
        Poly { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn add_term(&mut self, exps: [u8; MAX_VARS], c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(exps).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (&e, &c) in &other.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    /// Partial derivative with respect to variable `a`.
    pub fn diff(&self, a: usize) -> Poly {
        let mut out = Poly::constant(self.dim, 0.0);
        for (&e, &c) in &self.terms {
            if e[a] > 0 {
                let mut e2 = e;
                e2[a] -= 1;
                out.add_term(e2, c * e[a] as f64);
            }
        }
        out
    }

    /// Multiply by the coordinate monomial y_a.
    pub fn mul_var(&self, a: usize) -> Poly {
        let mut out = Poly::constant(self.dim, 0.0);
        for (&e, &c) in &self.terms {
            let mut e2 = e;
            e2[a] += 1;
            out.add_term(e2, c);
        }
        out
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&e, &c) in &self.terms {
            let mut term = c;
            for (a, &ea) in e.iter().enumerate().take(self.dim) {
                if ea > 0 {
                    term *= y[a].powi(ea as i32);
                }
            }
            acc += term;
        }
        acc
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
}

/// Descriptor of a smooth compactly supported test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// P(X−c) · exp(−|X−c|²/(2w²)) for |X−c| ≤ radius, zero outside.
    GaussBump { poly: Poly, width: f64 },
    /// amplitude · exp(−1/(1−s²)) with s = |X−c|/radius, zero for s ≥ 1.
    Bump { amplitude: f64 },
}

/// A smooth test function φ with compact support box `center ± radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub radius: f64,
    pub family: Family,
}

impl TestFunction {
    /// Gaussian bump A·exp(−|X−c|²/(2w²)) truncated where the tail is below
    /// double precision (|X−c| > 9w).
    pub fn gaussian(center: Vec<f64>, width: f64, amplitude: f64) -> Result<Self> {
        Self::check_dim(&center)?;
        if !(width > 0.0) {
            return Err(Error::arg("gaussian width must be positive"));
        }
        let dim = center.len();
        Ok(TestFunction {
            center,
            radius: 9.0 * width,
            family: Family::GaussBump {
                poly: Poly::constant(dim, amplitude),
                width,
            },
        })
    }

    /// Classical bump A·exp(−1/(1−(|X−c|/R)²)).
    pub fn bump(center: Vec<f64>, radius: f64, amplitude: f64) -> Result<Self> {
        Self::check_dim(&center)?;
        if !(radius > 0.0) {
            return Err(Error::arg("bump radius must be positive"));
        }
        Ok(TestFunction {
            center,
            radius,
            family: Family::Bump { amplitude },
        })
    }

    fn check_dim(center: &[f64]) -> Result<()> {
        if center.is_empty() || center.len() > MAX_VARS {
            return Err(Error::arg(format!(
                "test function dimension must be 1..={MAX_VARS}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Support box as per-axis [lo, hi] intervals.
    pub fn support_box(&self) -> Vec<[f64; 2]> {
        self.center
            .iter()
            .map(|&c| [c - self.radius, c + self.radius])
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut r2 = 0.0;
        let mut y = [0.0f64; MAX_VARS];
        for a in 0..self.dim() {
            y[a] = x[a] - self.center[a];
            r2 += y[a] * y[a];
        }
        if r2 >= self.radius * self.radius {
            return 0.0;
        }
        match &self.family {
            Family::GaussBump { poly, width } => {
                poly.eval(&y[..self.dim()]) * (-r2 / (2.0 * width * width)).exp()
            }
            Family::Bump { amplitude } => {
                let s2 = r2 / (self.radius * self.radius);
                amplitude * (-1.0 / (1.0 - s2)).exp()
            }
        }
    }

    /// Apply the wave operator □ = ∂²_0 − Σ_{a≥1} ∂²_a symbolically, m times.
    /// Variable 0 is the timelike coordinate. Only the Gaussian-bump family
    /// is closed under differentiation.
    pub fn box_power(&self, m: usize) -> Result<TestFunction> {
        let (poly, width) = match &self.family {
            Family::GaussBump { poly, width } => (poly.clone(), *width),
            Family::Bump { .. } => {
                return Err(Error::arg(
                    "symbolic wave-operator powers require the Gaussian-bump family",
                ))
            }
        };
        let w2 = width * width;
        // Derivative conjugated by the Gaussian: D_a(P) = ∂_a P − P·y_a/w².
        let conj = |p: &Poly, a: usize| -> Poly { p.diff(a).add(&p.mul_var(a).scale(-1.0 / w2)) };
        let mut p = poly;
        for _ in 0..m {
            let mut out = conj(&conj(&p, 0), 0);
            for a in 1..self.dim() {
                out = out.add(&conj(&conj(&p, a), a).scale(-1.0));
            }
            p = out;
        }
        Ok(TestFunction {
            center: self.center.clone(),
            radius: self.radius,
            family: Family::GaussBump { poly: p, width },
        })
    }

    /// The reflected function φ∘(−id).
    pub fn reflect(&self) -> TestFunction {
        let center: Vec<f64> = self.center.iter().map(|c| -c).collect();
        let family = match &self.family {
            Family::GaussBump { poly, width } => {
                let mut terms = BTreeMap::new();
                for (&e, &c) in &poly.terms {
                    let parity: u32 = e.iter().map(|&x| x as u32).sum();
                    terms.insert(e, if parity % 2 == 0 { c } else { -c });
                }
                Family::GaussBump {
                    poly: Poly {
                        dim: poly.dim,
                        terms,
                    },
                    width: *width,
                }
            }
            Family::Bump { amplitude } => Family::Bump {
                amplitude: *amplitude,
            },
        };
        TestFunction {
            center,
            radius: self.radius,
            family,
        }
    }

    /// Pointwise sum with another test function sharing center, radius and
    /// Gaussian width; used to exercise linearity properties.
    pub fn linear_combine(&self, a: f64, other: &TestFunction, b: f64) -> Result<TestFunction> {
        match (&self.family, &other.family) {
            (
                Family::GaussBump { poly: p1, width: w1 },
                Family::GaussBump { poly: p2, width: w2 },
            ) if self.center == other.center && w1 == w2 && self.radius == other.radius => {
                Ok(TestFunction {
                    center: self.center.clone(),
                    radius: self.radius,
                    family: Family::GaussBump {
                        poly: p1.scale(a).add(&p2.scale(b)),
                        width: *w1,
                    },
                })
            }
            _ => Err(Error::arg(
                "linear_combine requires matching Gaussian-bump envelopes",
            )),
        }
    }
}
