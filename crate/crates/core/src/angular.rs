//! Angular discretization of the first velocity quadrant.
//!
//! Velocities live on the unit circle. A node `λ ∈ [0, 1]` is mapped to the
//! direction `(ξ, η) = (cos(λπ/2), sin(λπ/2))`, so a quadrature rule on `[0, 1]`
//! covers one quadrant; the parity variables account for the other three.

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Error, Result};
use crate::grid::RField;

/// Gauss–Legendre nodes on `[0, 1]` with their unit directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    directions: Vec<(f64, f64)>,
}

impl DirectionSet {
    /// Builds the `n`-point Gauss–Legendre rule transplanted to `[0, 1]`.
    pub fn gauss(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("quadrature needs at least one node"));
        }
        let (x, w) = gauss_legendre(n);
        // Transplant from [-1, 1]; the weights then sum to one.
        let nodes: Vec<f64> = x.iter().map(|&xi| 0.5 * (xi + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|&wi| 0.5 * wi).collect();
        let directions = nodes
            .iter()
            .map(|&l| map_to_direction(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nodes,
            weights,
            directions,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(ξ_i, η_i)` for every node, in node order.
    pub fn directions(&self) -> &[(f64, f64)] {
        &self.directions
    }

    /// Applies the rule to `g(λ)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&l, &w)| w * g(l))
            .sum()
    }
}

/// `λ ↦ (cos(λπ/2), sin(λπ/2))` for `λ ∈ [0, 1]`.
pub fn map_to_direction(lambda: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid(format!("λ = {lambda} outside [0, 1]")));
    }
    // Pin the endpoints so that (1, 0) and (0, 1) come out exactly.
    if lambda == 0.0 {
        return Ok((1.0, 0.0));
    }
    if lambda == 1.0 {
        return Ok((0.0, 1.0));
    }
    let a = lambda * FRAC_PI_2;
    Ok((a.cos(), a.sin()))
}

/// Density `ρ = ½ Σ_i w_i (r¹_i + r²_i)` at every R-grid point.
///
/// Directions are summed in ascending index order so the result does not
/// depend on how the caller parallelizes anything else.
pub fn density(r1: &[RField], r2: &[RField], q: &DirectionSet) -> Result<RField> {
    if r1.len() != q.len() || r2.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} / {} parity fields for {} directions",
            r1.len(),
            r2.len(),
            q.len()
        )));
    }
    let first = r1
        .first()
        .ok_or_else(|| invalid("empty direction set"))?;
    let mut rho = RField::zeros(first.nx(), first.ny());
    for (i, (a, b)) in r1.iter().zip(r2).enumerate() {
        rho.check_same_shape(a)?;
        rho.check_same_shape(b)?;
        let half_w = 0.5 * q.weights()[i];
        rho.axpy_pair(half_w, a, b);
    }
    Ok(rho)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending in `x`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th largest root.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` via the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
