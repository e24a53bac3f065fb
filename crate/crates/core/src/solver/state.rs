use crate::angular::DirectionSet;
use crate::error::{invalid, Error, Result};
use crate::grid::{sample_on_j, sample_on_r, GridGeometry, JField, RField};

/// Even and odd parities of one first-quadrant direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Parities {
    pub r1: RField,
    pub r2: RField,
    pub j1: JField,
    pub j2: JField,
}

impl Parities {
    pub fn zeros(g: &GridGeometry) -> Self {
        Self {
            r1: RField::zeros(g.nx, g.ny),
            r2: RField::zeros(g.nx, g.ny),
            j1: JField::zeros(g.nx, g.ny),
            j2: JField::zeros(g.nx, g.ny),
        }
    }

    fn is_finite(&self) -> bool {
        [&self.r1, &self.r2]
            .iter()
            .all(|f| f.iter().sum::<f64>().is_finite())
            && [&self.j1, &self.j2]
                .iter()
                .all(|f| f.iter().sum::<f64>().is_finite())
    }
}

/// Full solver state: parities for every direction plus the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityState {
    geom: GridGeometry,
    dirs: DirectionSet,
    pub slots: Vec<Parities>,
    pub t: f64,
}

impl ParityState {
    pub fn zeros(geom: GridGeometry, dirs: DirectionSet) -> Self {
        let slots = (0..dirs.len()).map(|_| Parities::zeros(&geom)).collect();
        Self {
            geom,
            dirs,
            slots,
            t: 0.0,
        }
    }

    /// Isotropic data `f = ρ₀(x, y)`: `r¹ = r² = ρ₀`, `j¹ = j² = 0`.
    pub fn isotropic(geom: GridGeometry, dirs: DirectionSet, rho0: &RField) -> Result<Self> {
        rho0.check_geometry(&geom)?;
        let mut s = Self::zeros(geom, dirs);
        for p in &mut s.slots {
            p.r1 = rho0.clone();
            p.r2 = rho0.clone();
        }
        Ok(s)
    }

    /// Parities of a distribution `f(x, y, ξ, η)` given on the whole circle.
    pub fn from_distribution(
        geom: GridGeometry,
        dirs: DirectionSet,
        epsilon: f64,
        f: impl Fn(f64, f64, f64, f64) -> f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(invalid("epsilon must be positive"));
        }
        let inv2e = 0.5 / epsilon;
        let slots = dirs
            .directions()
            .iter()
            .map(|&(xi, eta)| Parities {
                r1: sample_on_r(|x, y| 0.5 * (f(x, y, xi, -eta) + f(x, y, -xi, eta)), &geom),
                r2: sample_on_r(|x, y| 0.5 * (f(x, y, xi, eta) + f(x, y, -xi, -eta)), &geom),
                j1: sample_on_j(|x, y| inv2e * (f(x, y, xi, -eta) - f(x, y, -xi, eta)), &geom),
                j2: sample_on_j(|x, y| inv2e * (f(x, y, xi, eta) - f(x, y, -xi, -eta)), &geom),
            })
            .collect();
        Ok(Self {
            geom,
            dirs,
            slots,
            t: 0.0,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn r1(&self) -> impl Iterator<Item = &RField> + '_ {
        self.slots.iter().map(|p| &p.r1)
    }

    pub fn r2(&self) -> impl Iterator<Item = &RField> + '_ {
        self.slots.iter().map(|p| &p.r2)
    }

    /// Angular density `ρ = ½ Σ w_i (r¹_i + r²_i)`.
    pub fn density(&self) -> RField {
        density_of(&self.slots, &self.dirs, &self.geom)
    }

    pub fn is_finite(&self) -> bool {
        self.slots.iter().all(Parities::is_finite)
    }

    /// Checks that every slot matches the geometry and direction count.
    pub fn validate(&self) -> Result<()> {
        if self.slots.len() != self.dirs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parity slots for {} directions",
                self.slots.len(),
                self.dirs.len()
            )));
        }
        for p in &self.slots {
            p.r1.check_geometry(&self.geom)?;
            p.r2.check_geometry(&self.geom)?;
            p.j1.check_geometry(&self.geom)?;
            p.j2.check_geometry(&self.geom)?;
        }
        Ok(())
    }
}

pub(crate) fn density_of(slots: &[Parities], dirs: &DirectionSet, g: &GridGeometry) -> RField {
    let mut rho = RField::zeros(g.nx, g.ny);
    for (p, &w) in slots.iter().zip(dirs.weights()) {
        rho.axpy_pair(0.5 * w, &p.r1, &p.r2);
    }
    rho
}

/// Velocity quadrant selected by the signs of `(ξ, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    /// `ξ > 0, η > 0`
    PlusPlus,
    /// `ξ < 0, η > 0`
    MinusPlus,
    /// `ξ < 0, η < 0`
    MinusMinus,
    /// `ξ > 0, η < 0`
    PlusMinus,
}

/// Recovers `f` at R-grid points for every direction mapped into `quadrant`.
///
/// `f = r¹ + ε sign(ξ) j¹` when `ξη < 0` and `f = r² + ε sign(ξ) j²` otherwise.
/// The face values of `j` are averaged onto R-points from the four surrounding
/// faces (two per face family).
pub fn reconstruct_f(s: &ParityState, quadrant: Quadrant, epsilon: f64) -> Result<Vec<RField>> {
    s.validate()?;
    let g = s.geometry();
    let (sign_xi, use_first) = match quadrant {
        Quadrant::PlusPlus => (1.0, false),
        Quadrant::MinusMinus => (-1.0, false),
        Quadrant::MinusPlus => (-1.0, true),
        Quadrant::PlusMinus => (1.0, true),
    };
    let scale = sign_xi * epsilon;
    Ok(s
        .slots
        .iter()
        .map(|p| {
            let (r, j) = if use_first { (&p.r1, &p.j1) } else { (&p.r2, &p.j2) };
            if scale == 0.0 {
                return r.clone();
            }
            let jr = faces_to_r(j, g);
            r.zip_map(&jr, |a, b| a + scale * b).expect("same geometry")
        })
        .collect())
}

/// Arithmetic mean of the four faces around each R-point.
pub fn faces_to_r(j: &JField, g: &GridGeometry) -> RField {
    let (nx, ny) = (g.nx, g.ny);
    let mut out = RField::zeros(nx, ny);
    for row in 0..ny {
        let below = (row + ny - 1) % ny;
        let above = (row + 1) % ny;
        for i in 0..nx {
            let left = (i + nx - 1) % nx;
            let right = (i + 1) % nx;
            // Vertex (i, j): hfaces (i∓½, j), vfaces (i, j∓½).
            out.vertex[row * nx + i] = 0.25
                * (j.hface[row * nx + left]
                    + j.hface[row * nx + i]
                    + j.vface[below * nx + i]
                    + j.vface[row * nx + i]);
            // Center (i+½, j+½): hfaces (i+½, j), (i+½, j+1); vfaces (i, j+½), (i+1, j+½).
            out.center[row * nx + i] = 0.25
                * (j.hface[row * nx + i]
                    + j.hface[above * nx + i]
                    + j.vface[row * nx + i]
                    + j.vface[row * nx + right]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PlaneKind;

    fn setup() -> (GridGeometry, DirectionSet) {
        (
            GridGeometry::square(6, 0.0, 0.0, 1.0).unwrap(),
            DirectionSet::gauss(4).unwrap(),
        )
    }

    #[test]
    fn zero_flux_reconstructs_even_parity() {
        let (g, q) = setup();
        let rho = sample_on_r(|x, y| 1.0 + x * y, &g);
        let s = ParityState::isotropic(g, q, &rho).unwrap();
        for quad in [
            Quadrant::PlusPlus,
            Quadrant::MinusPlus,
            Quadrant::MinusMinus,
            Quadrant::PlusMinus,
        ] {
            for f in reconstruct_f(&s, quad, 0.3).unwrap() {
                assert_eq!(f, rho);
            }
        }
    }

    #[test]
    fn zero_epsilon_ignores_flux() {
        let (g, q) = setup();
        let mut s = ParityState::zeros(g, q);
        for p in &mut s.slots {
            p.r1.fill(2.0);
            p.j1.fill(5.0);
        }
        for f in reconstruct_f(&s, Quadrant::PlusMinus, 0.0).unwrap() {
            assert!(f.iter().all(|v| v == 2.0));
        }
    }

    #[test]
    fn constant_flux_in_mixed_quadrant() {
        let (g, q) = setup();
        let mut s = ParityState::zeros(g, q);
        for p in &mut s.slots {
            p.r1.fill(1.0);
            p.j1.fill(4.0);
            p.r2.fill(-1.0);
            p.j2.fill(2.0);
        }
        let eps = 0.25;
        for f in reconstruct_f(&s, Quadrant::PlusMinus, eps).unwrap() {
            assert!(f.iter().all(|v| (v - 2.0).abs() < 1e-15));
        }
        for f in reconstruct_f(&s, Quadrant::MinusPlus, eps).unwrap() {
            assert!(f.iter().all(|v| v.abs() < 1e-15));
        }
        for f in reconstruct_f(&s, Quadrant::MinusMinus, eps).unwrap() {
            assert!(f.iter().all(|v| (v + 1.5).abs() < 1e-15));
        }
    }

    #[test]
    fn parities_invert_to_distribution() {
        // f = 1 + x + 2ξ + 3η + ξη, linear in space so face averaging is exact.
        let g = GridGeometry::square(8, 0.0, 0.0, 1.0).unwrap();
        let q = DirectionSet::gauss(3).unwrap();
        let eps = 0.5;
        let f = |x: f64, _y: f64, xi: f64, eta: f64| 1.0 + 0.1 * x + 2.0 * xi + 3.0 * eta + xi * eta;
        let s = ParityState::from_distribution(g, q.clone(), eps, f).unwrap();
        let quads = [
            (Quadrant::PlusPlus, 1.0, 1.0),
            (Quadrant::MinusPlus, -1.0, 1.0),
            (Quadrant::MinusMinus, -1.0, -1.0),
            (Quadrant::PlusMinus, 1.0, -1.0),
        ];
        for (quad, sx, sy) in quads {
            let rec = reconstruct_f(&s, quad, eps).unwrap();
            for (k, &(xi, eta)) in q.directions().iter().enumerate() {
                // Interior vertices only; the x-ramp wraps at the seam.
                for row in 0..8 {
                    for i in 1..7 {
                        let (x, y) = g.coords(PlaneKind::Vertex, i, row);
                        let want = f(x, y, sx * xi, sy * eta);
                        let got = rec[k].vertex[row * 8 + i];
                        assert!((got - want).abs() < 1e-13, "{quad:?} {got} {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn face_average_is_exact_on_linear_interior() {
        let g = GridGeometry::square(8, 0.0, 0.0, 1.0).unwrap();
        let j = sample_on_j(|x, y| 2.0 * x - y, &g);
        let r = faces_to_r(&j, &g);
        let want = sample_on_r(|x, y| 2.0 * x - y, &g);
        for row in 1..7 {
            for i in 1..7 {
                assert!((r.vertex[row * 8 + i] - want.vertex[row * 8 + i]).abs() < 1e-14);
                assert!((r.center[row * 8 + i] - want.center[row * 8 + i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn validate_catches_mismatch() {
        let (g, q) = setup();
        let mut s = ParityState::zeros(g, q);
        s.slots.pop();
        assert!(s.validate().is_err());
        assert!(ParityState::from_distribution(g, DirectionSet::gauss(2).unwrap(), 0.0, |_, _, _, _| 1.0).is_err());
    }
}
