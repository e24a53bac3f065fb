//! Source terms and their parity decomposition.
//!
//! For a first-quadrant direction `(ξ, η)` the even parts feed the `r`
//! equations at R-points and the odd parts, divided by `ε`, feed the `j`
//! equations at J-points:
//!
//! ```text
//! even¹ = ½ [Q(ξ,−η) + Q(−ξ,η)]        odd¹/ε = [Q(ξ,−η) − Q(−ξ,η)] / (2ε)
//! even² = ½ [Q(ξ,η)  + Q(−ξ,−η)]       odd²/ε = [Q(ξ,η)  − Q(−ξ,−η)] / (2ε)
//! ```
//!
//! An isotropic `Q` has no odd part and equal even parts.

use crate::grid::{GridGeometry, JField, PlaneKind, RField};

/// Parity components of a source for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParitySource {
    pub even1: RField,
    pub even2: RField,
    /// Odd part already divided by `ε`.
    pub odd1: JField,
    pub odd2: JField,
}

impl ParitySource {
    pub fn zeros(g: &GridGeometry) -> Self {
        Self {
            even1: RField::zeros(g.nx, g.ny),
            even2: RField::zeros(g.nx, g.ny),
            odd1: JField::zeros(g.nx, g.ny),
            odd2: JField::zeros(g.nx, g.ny),
        }
    }
}

/// A volumetric source `Q(t, x, y, ξ, η)` on the unit circle of velocities.
pub trait SourceTerm: Send + Sync {
    fn value(&self, t: f64, x: f64, y: f64, xi: f64, eta: f64) -> f64;

    /// Identically zero; lets the stepper skip the source entirely.
    fn is_zero(&self) -> bool {
        false
    }

    /// Independent of velocity.
    fn is_isotropic(&self) -> bool {
        false
    }

    fn is_time_dependent(&self) -> bool {
        true
    }

    /// Writes the parity decomposition for direction `(ξ, η)` at time `t`.
    ///
    /// The default evaluates [`SourceTerm::value`] at the four velocity sign
    /// combinations; sources with a cheaper closed form override it.
    fn parity_fields(
        &self,
        t: f64,
        xi: f64,
        eta: f64,
        epsilon: f64,
        g: &GridGeometry,
        out: &mut ParitySource,
    ) {
        let inv2e = 0.5 / epsilon;
        for (kind, (e1, e2)) in [
            (PlaneKind::Vertex, (&mut out.even1.vertex, &mut out.even2.vertex)),
            (PlaneKind::Center, (&mut out.even1.center, &mut out.even2.center)),
        ] {
            fill_plane(g, kind, e1, |x, y| {
                0.5 * (self.value(t, x, y, xi, -eta) + self.value(t, x, y, -xi, eta))
            });
            fill_plane(g, kind, e2, |x, y| {
                0.5 * (self.value(t, x, y, xi, eta) + self.value(t, x, y, -xi, -eta))
            });
        }
        for (kind, (o1, o2)) in [
            (PlaneKind::HFace, (&mut out.odd1.hface, &mut out.odd2.hface)),
            (PlaneKind::VFace, (&mut out.odd1.vface, &mut out.odd2.vface)),
        ] {
            fill_plane(g, kind, o1, |x, y| {
                inv2e * (self.value(t, x, y, xi, -eta) - self.value(t, x, y, -xi, eta))
            });
            fill_plane(g, kind, o2, |x, y| {
                inv2e * (self.value(t, x, y, xi, eta) - self.value(t, x, y, -xi, -eta))
            });
        }
    }
}

pub(crate) fn fill_plane(
    g: &GridGeometry,
    kind: PlaneKind,
    out: &mut [f64],
    f: impl Fn(f64, f64) -> f64,
) {
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (x, y) = g.coords(kind, i, j);
            out[j * g.nx + i] = f(x, y);
        }
    }
}

/// `Q ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSource;

impl SourceTerm for NoSource {
    fn value(&self, _: f64, _: f64, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }

    fn is_zero(&self) -> bool {
        true
    }

    fn is_isotropic(&self) -> bool {
        true
    }

    fn is_time_dependent(&self) -> bool {
        false
    }
}

/// Time-independent isotropic source `Q(x, y)`.
pub struct IsotropicSource<F> {
    q: F,
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> IsotropicSource<F> {
    pub fn new(q: F) -> Self {
        Self { q }
    }
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> SourceTerm for IsotropicSource<F> {
    fn value(&self, _t: f64, x: f64, y: f64, _xi: f64, _eta: f64) -> f64 {
        (self.q)(x, y)
    }

    fn is_isotropic(&self) -> bool {
        true
    }

    fn is_time_dependent(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_on_r;

    struct Anisotropic;

    impl SourceTerm for Anisotropic {
        // Q = x + 3ξ - 2η + ξη
        fn value(&self, _t: f64, x: f64, _y: f64, xi: f64, eta: f64) -> f64 {
            x + 3.0 * xi - 2.0 * eta + xi * eta
        }
    }

    #[test]
    fn default_decomposition() {
        let g = GridGeometry::square(3, 0.0, 0.0, 1.0).unwrap();
        let (xi, eta, eps) = (0.6, 0.8, 0.5);
        let mut out = ParitySource::zeros(&g);
        Anisotropic.parity_fields(0.0, xi, eta, eps, &g, &mut out);
        // even¹: velocity pair (ξ,−η), (−ξ,η) → x − ξη
        let want1 = sample_on_r(|x, _| x - xi * eta, &g);
        let want2 = sample_on_r(|x, _| x + xi * eta, &g);
        for (a, b) in out.even1.iter().zip(want1.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in out.even2.iter().zip(want2.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
        // odd¹/ε: (3ξ + 2η)/ε ; odd²/ε: (3ξ − 2η)/ε
        for v in out.odd1.iter() {
            assert!((v - (3.0 * xi + 2.0 * eta) / eps).abs() < 1e-14);
        }
        for v in out.odd2.iter() {
            assert!((v - (3.0 * xi - 2.0 * eta) / eps).abs() < 1e-14);
        }
    }

    #[test]
    fn isotropic_has_no_odd_part() {
        let g = GridGeometry::square(4, 0.0, 0.0, 1.0).unwrap();
        let src = IsotropicSource::new(|x: f64, y: f64| x * y + 1.0);
        let mut out = ParitySource::zeros(&g);
        src.parity_fields(0.3, 0.2, 0.9797958971132712, 0.1, &g, &mut out);
        assert!(out.odd1.iter().chain(out.odd2.iter()).all(|v| v == 0.0));
        assert_eq!(out.even1, out.even2);
        assert!(src.is_isotropic());
    }
}
