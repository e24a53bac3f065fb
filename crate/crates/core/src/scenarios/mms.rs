//! Manufactured solution `f = e^{−t} S(x, y) (1 + η²)` with
//! `S = sin²(2πx) sin²(2πy)`, `σ_s = 1`, `σ_a = 0`.
//!
//! The source is the exact residual of the transport equation,
//! `Q = ∂t f + ε⁻¹ v·∇f + ε⁻² (σ_t f − σ_s ρ_f)`, so `f` solves it exactly.
//! Its parities for a first-quadrant direction are
//!
//! ```text
//! even¹ = even² = e^{−t} S [−(1 + η²) + (η² − ½)/ε²]
//! odd¹/ε        = e^{−t} (1 + η²)(ξ S_x − η S_y) / ε²
//! odd²/ε        = e^{−t} (1 + η²)(ξ S_x + η S_y) / ε²
//! ```

use std::f64::consts::PI;

use crate::grid::{sample_on_j, sample_on_r, GridGeometry, JField, RField};
use crate::solver::{ParitySource, SourceTerm};

const K: f64 = 2.0 * PI;

pub fn shape(x: f64, y: f64) -> f64 {
    let (sx, sy) = ((K * x).sin(), (K * y).sin());
    sx * sx * sy * sy
}

/// `(∂x S, ∂y S)`.
pub fn shape_gradient(x: f64, y: f64) -> (f64, f64) {
    let (sx, cx) = (K * x).sin_cos();
    let (sy, cy) = (K * y).sin_cos();
    (2.0 * K * sx * cx * sy * sy, 2.0 * K * sy * cy * sx * sx)
}

/// `f(t, x, y, ξ, η)`.
pub fn distribution(t: f64, x: f64, y: f64, _xi: f64, eta: f64) -> f64 {
    (-t).exp() * shape(x, y) * (1.0 + eta * eta)
}

/// `ρ(t, x, y) = (3/2) e^{−t} S(x, y)`.
pub fn exact_density(t: f64, x: f64, y: f64) -> f64 {
    1.5 * (-t).exp() * shape(x, y)
}

/// Residual source with `S`, `S_x`, `S_y` tabulated on one geometry.
pub struct MmsSource {
    epsilon: f64,
    geom: GridGeometry,
    s_r: RField,
    sx_j: JField,
    sy_j: JField,
}

impl MmsSource {
    pub fn new(epsilon: f64, geom: GridGeometry) -> Self {
        Self {
            epsilon,
            geom,
            s_r: sample_on_r(shape, &geom),
            sx_j: sample_on_j(|x, y| shape_gradient(x, y).0, &geom),
            sy_j: sample_on_j(|x, y| shape_gradient(x, y).1, &geom),
        }
    }
}

impl SourceTerm for MmsSource {
    fn value(&self, t: f64, x: f64, y: f64, xi: f64, eta: f64) -> f64 {
        let e = self.epsilon;
        let f = distribution(t, x, y, xi, eta);
        let (gx, gy) = shape_gradient(x, y);
        let stream = (-t).exp() * (1.0 + eta * eta) * (xi * gx + eta * gy);
        let collide = f - exact_density(t, x, y);
        -f + stream / e + collide / (e * e)
    }

    fn parity_fields(
        &self,
        t: f64,
        xi: f64,
        eta: f64,
        epsilon: f64,
        g: &GridGeometry,
        out: &mut ParitySource,
    ) {
        let decay = (-t).exp();
        let e2 = epsilon * epsilon;
        let w = 1.0 + eta * eta;
        let c_even = decay * (-w + (eta * eta - 0.5) / e2);
        let c_odd = decay * w / e2;
        if *g == self.geom && epsilon == self.epsilon {
            for (dst, s) in [
                (&mut out.even1.vertex, &self.s_r.vertex),
                (&mut out.even1.center, &self.s_r.center),
            ] {
                for (d, v) in dst.iter_mut().zip(s) {
                    *d = c_even * v;
                }
            }
            out.even2.vertex.copy_from_slice(&out.even1.vertex);
            out.even2.center.copy_from_slice(&out.even1.center);
            let (ax, ay) = (c_odd * xi, c_odd * eta);
            for (o1, o2, sx, sy) in [
                (&mut out.odd1.hface, &mut out.odd2.hface, &self.sx_j.hface, &self.sy_j.hface),
                (&mut out.odd1.vface, &mut out.odd2.vface, &self.sx_j.vface, &self.sy_j.vface),
            ] {
                for i in 0..o1.len() {
                    let (px, py) = (ax * sx[i], ay * sy[i]);
                    o1[i] = px - py;
                    o2[i] = px + py;
                }
            }
        } else {
            let even = sample_on_r(|x, y| c_even * shape(x, y), g);
            out.even1 = even.clone();
            out.even2 = even;
            out.odd1 = sample_on_j(
                |x, y| {
                    let (gx, gy) = shape_gradient(x, y);
                    c_odd * (xi * gx - eta * gy)
                },
                g,
            );
            out.odd2 = sample_on_j(
                |x, y| {
                    let (gx, gy) = shape_gradient(x, y);
                    c_odd * (xi * gx + eta * gy)
                },
                g,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::DirectionSet;

    /// Brute-force parity split of `value`, independent of the closed form.
    fn brute(src: &MmsSource, t: f64, xi: f64, eta: f64, g: &GridGeometry) -> ParitySource {
        let e = src.epsilon;
        let q = |x, y, a, b| src.value(t, x, y, a, b);
        ParitySource {
            even1: sample_on_r(|x, y| 0.5 * (q(x, y, xi, -eta) + q(x, y, -xi, eta)), g),
            even2: sample_on_r(|x, y| 0.5 * (q(x, y, xi, eta) + q(x, y, -xi, -eta)), g),
            odd1: sample_on_j(|x, y| (q(x, y, xi, -eta) - q(x, y, -xi, eta)) / (2.0 * e), g),
            odd2: sample_on_j(|x, y| (q(x, y, xi, eta) - q(x, y, -xi, -eta)) / (2.0 * e), g),
        }
    }

    #[test]
    fn fast_path_matches_parity_split() {
        for eps in [1.0, 0.1, 1e-3] {
            let g = GridGeometry::square(8, 0.0, 0.0, 1.0).unwrap();
            let src = MmsSource::new(eps, g);
            let other = GridGeometry::square(6, 0.0, 0.0, 1.0).unwrap();
            for (xi, eta) in [(0.8, 0.6), (0.28, 0.96)] {
                for geom in [g, other] {
                    let want = brute(&src, 0.07, xi, eta, &geom);
                    let mut got = ParitySource::zeros(&geom);
                    src.parity_fields(0.07, xi, eta, eps, &geom, &mut got);
                    let scale = 1.0 / (eps * eps);
                    let pairs = [
                        (got.even1.iter().collect::<Vec<_>>(), want.even1.iter().collect::<Vec<_>>()),
                        (got.even2.iter().collect(), want.even2.iter().collect()),
                        (got.odd1.iter().collect(), want.odd1.iter().collect()),
                        (got.odd2.iter().collect(), want.odd2.iter().collect()),
                    ];
                    for (a, b) in pairs {
                        for (u, v) in a.iter().zip(&b) {
                            assert!((u - v).abs() <= 1e-12 * scale * 50.0, "{u} vs {v}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn exact_values() {
        assert!((exact_density(0.0, 0.25, 0.25) - 1.5).abs() < 1e-15);
        // ∇S vanishes at the extremum, so the odd part does too.
        let g = GridGeometry::square(4, 0.0, 0.0, 1.0).unwrap();
        let src = MmsSource::new(0.1, g);
        let (gx, gy) = shape_gradient(0.25, 0.25);
        assert!(gx.abs() < 1e-14 && gy.abs() < 1e-14);
        let odd = src.value(0.0, 0.25, 0.25, 0.6, 0.8) - src.value(0.0, 0.25, 0.25, -0.6, -0.8);
        assert!(odd.abs() < 1e-12);
    }

    #[test]
    fn density_of_distribution() {
        let dirs = DirectionSet::gauss(16).unwrap();
        // Average of 1 + η² over the circle is 3/2.
        let avg = dirs.integrate(|l| {
            let eta = (l * PI / 2.0).sin();
            1.0 + eta * eta
        });
        assert!((avg - 1.5).abs() < 1e-13);
    }
}
