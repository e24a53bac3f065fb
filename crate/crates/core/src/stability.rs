//! Von Neumann analysis of the 1D two-velocity version of the scheme.
//!
//! With `r` on half points `(m+½)h` and `j` on full points `mh`, one step is
//!
//! ```text
//! r ← r − Δt (D j + σ_a r)
//! j ← j − Δt (φ D r + σ_a j)
//! j ← ε²/(ε²+σ_sΔt) j − Δt/(ε²+σ_sΔt) (1 − ε²φ) D r
//! ```
//!
//! A Fourier mode `e^{iℓx}` picks up the symbol `d = (2i/h) sin(θ/2)`,
//! `θ = ℓh`, from each half-grid difference, so a step acts on the mode
//! coefficients through `G = G₂ G₁`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Parameters of a single Fourier mode of the 1D scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub epsilon: f64,
    pub sigma_s: f64,
    pub sigma_a: f64,
    pub dt: f64,
    pub h: f64,
    pub phi: f64,
    /// Mode angle `ℓh` in radians.
    pub theta: f64,
}

impl GrowthParams {
    pub fn sigma_t(&self) -> f64 {
        self.sigma_s + self.epsilon * self.epsilon * self.sigma_a
    }

    /// Real `d²= −(4/h²) sin²(θ/2)`.
    pub fn d_squared(&self) -> f64 {
        let s = (0.5 * self.theta).sin();
        -4.0 * s * s / (self.h * self.h)
    }

    /// `d = (2i/h) sin(θ/2)`.
    pub fn symbol(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * (0.5 * self.theta).sin() / self.h)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("epsilon", self.epsilon), ("dt", self.dt), ("h", self.h)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive (got {v})")));
            }
        }
        let nonneg = [("sigma_s", self.sigma_s), ("sigma_a", self.sigma_a), ("phi", self.phi)];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be nonnegative (got {v})")));
            }
        }
        if !self.theta.is_finite() {
            return Err(invalid("theta must be finite"));
        }
        // σ_t = 0 is allowed: ε² + σ_sΔt stays positive and the free
        // streaming case is a useful reference.
        Ok(())
    }
}

/// Amplification matrix of one split step together with its half trace and
/// determinant, both evaluated in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthMatrix {
    pub entries: [[Complex64; 2]; 2],
    pub g: f64,
    pub det: f64,
    /// `g² − det G`, expanded so that the `(1 − σ_aΔt)²` terms cancel
    /// symbolically. Exact zero at a repeated eigenvalue with `σ_s = 0`.
    pub disc: f64,
}

impl GrowthMatrix {
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.entries;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn determinant(&self) -> Complex64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

fn matmul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][k] + a[i][1] * b[1][k];
        }
    }
    out
}

/// Builds `G₁`, `G₂` and their product `G = G₂ G₁`.
pub fn growth_matrix(p: &GrowthParams) -> Result<GrowthMatrix> {
    p.validate()?;
    let GrowthParams {
        epsilon,
        sigma_s,
        sigma_a,
        dt,
        phi,
        ..
    } = *p;
    let e2 = epsilon * epsilon;
    let denom = e2 + sigma_s * dt;
    let d = p.symbol();
    let a = Complex64::new(1.0 - sigma_a * dt, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let g1 = [[a, -d * dt], [-d * (dt * phi), a]];
    let g2 = [
        [one, zero],
        [-d * (dt * (1.0 - e2 * phi) / denom), Complex64::new(e2 / denom, 0.0)],
    ];
    let d2 = p.d_squared();
    let am = 1.0 - sigma_a * dt;
    let g = 0.5 * (dt * dt * d2 * (1.0 - e2 * phi) + am * (2.0 * e2 + sigma_s * dt)) / denom;
    let det = e2 / denom * (am * am - phi * d2 * dt * dt);
    let x = dt * dt * d2 * (1.0 - e2 * phi);
    let y = phi * d2 * dt * dt;
    let s = sigma_s * dt;
    let disc = (x * x + 2.0 * am * x * (2.0 * e2 + s) + am * am * s * s + 4.0 * denom * e2 * y)
        / (4.0 * denom * denom);
    Ok(GrowthMatrix {
        entries: matmul(&g2, &g1),
        g,
        det,
        disc,
    })
}

/// Eigenvalues `g ± sqrt(g² − det G)`, largest modulus first.
///
/// A negative discriminant gives the complex pair `g ± i sqrt(det G − g²)`.
pub fn eigenvalues(p: &GrowthParams) -> Result<[Complex64; 2]> {
    let m = growth_matrix(p)?;
    let disc = m.disc;
    Ok(if disc >= 0.0 {
        let s = disc.sqrt();
        let (a, b) = (m.g + s, m.g - s);
        if a.abs() >= b.abs() {
            [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
        } else {
            [Complex64::new(b, 0.0), Complex64::new(a, 0.0)]
        }
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(m.g, s), Complex64::new(m.g, -s)]
    })
}

/// Largest eigenvalue modulus of `G`.
pub fn spectral_radius(p: &GrowthParams) -> Result<f64> {
    let m = growth_matrix(p)?;
    let disc = m.disc;
    Ok(if disc >= 0.0 {
        m.g.abs() + disc.sqrt()
    } else {
        // |g ± i s|² = g² + det − g² = det
        m.det.sqrt()
    })
}

/// A mode-independent parameter set for scanning `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams1d {
    pub epsilon: f64,
    pub sigma_s: f64,
    pub sigma_a: f64,
    pub dt: f64,
    pub h: f64,
    pub phi: f64,
}

impl SchemeParams1d {
    pub fn at(&self, theta: f64) -> GrowthParams {
        GrowthParams {
            epsilon: self.epsilon,
            sigma_s: self.sigma_s,
            sigma_a: self.sigma_a,
            dt: self.dt,
            h: self.h,
            phi: self.phi,
            theta,
        }
    }

    pub fn sigma_t(&self) -> f64 {
        self.sigma_s + self.epsilon * self.epsilon * self.sigma_a
    }

    /// `min{1/σ_a, max{½εh, ¼h²σ_t}}`.
    pub fn dt_bound(&self) -> f64 {
        let transport = (0.5 * self.epsilon * self.h).max(0.25 * self.h * self.h * self.sigma_t());
        if self.sigma_a > 0.0 {
            transport.min(1.0 / self.sigma_a)
        } else {
            transport
        }
    }

    /// `hσ_t/(2ε³)` if `hσ_t ≤ 2ε`, else `1/ε²`.
    pub fn phi_bound(&self) -> f64 {
        crate::solver::relaxation_parameter_for(self.epsilon, self.h, self.sigma_t())
    }

    /// Parameters with `Δt = safety · dt_bound` and `φ = phi_bound`.
    pub fn with_stable_choice(
        epsilon: f64,
        sigma_s: f64,
        sigma_a: f64,
        h: f64,
        safety: f64,
    ) -> Result<Self> {
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(invalid(format!("safety must lie in (0, 1] (got {safety})")));
        }
        let mut p = Self {
            epsilon,
            sigma_s,
            sigma_a,
            dt: 1.0,
            h,
            phi: 0.0,
        };
        p.at(0.0).validate()?;
        p.dt = safety * p.dt_bound();
        p.phi = p.phi_bound();
        Ok(p)
    }
}

/// A broken precondition of the stability result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    TimeStep { dt: f64, bound: f64 },
    Relaxation { phi: f64, bound: f64 },
}

/// Outcome of [`certify_proposition`].
#[derive(Debug, Clone, PartialEq)]
pub struct Certification {
    pub violations: Vec<Violation>,
    pub worst_theta: f64,
    pub worst_radius: f64,
    /// No violations and every scanned radius within `1 + 1e-12`.
    pub passed: bool,
}

pub const RADIUS_TOLERANCE: f64 = 1e-12;

/// Default number of `θ` samples in a scan.
pub const DEFAULT_THETA_POINTS: usize = 4096;

/// `θ_k = 2πk/n`, `k = 0..n`.
pub fn theta_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| 2.0 * std::f64::consts::PI * k as f64 / n as f64)
}

/// Spectral radius at every point of a uniform `θ` grid.
pub fn radius_scan(p: &SchemeParams1d, n_theta: usize) -> Result<Vec<(f64, f64)>> {
    theta_grid(n_theta)
        .map(|th| spectral_radius(&p.at(th)).map(|r| (th, r)))
        .collect()
}

/// Checks the time step and relaxation preconditions, then scans `n_theta`
/// modes in `[0, 2π)` for the largest spectral radius.
///
/// Violated preconditions are reported rather than raised; the scan runs
/// either way so the report shows what actually happens.
pub fn certify_proposition(p: &SchemeParams1d, n_theta: usize) -> Result<Certification> {
    if n_theta < 8 {
        return Err(invalid(format!("n_theta must be at least 8 (got {n_theta})")));
    }
    p.at(0.0).validate()?;
    let slack = 1.0 + 1e-12;
    let mut violations = Vec::new();
    let dt_bound = p.dt_bound();
    if p.dt > dt_bound * slack {
        violations.push(Violation::TimeStep { dt: p.dt, bound: dt_bound });
    }
    let phi_bound = p.phi_bound();
    if p.phi > phi_bound * slack {
        violations.push(Violation::Relaxation { phi: p.phi, bound: phi_bound });
    }
    let (mut worst_theta, mut worst_radius) = (0.0, f64::NEG_INFINITY);
    for (th, r) in radius_scan(p, n_theta)? {
        if r > worst_radius || r.is_nan() {
            worst_theta = th;
            worst_radius = r;
        }
    }
    let passed = violations.is_empty() && worst_radius <= 1.0 + RADIUS_TOLERANCE;
    Ok(Certification {
        violations,
        worst_theta,
        worst_radius,
        passed,
    })
}

/// Periodic 1D staggered state: `r[m]` at `(m+½)h`, `j[m]` at `mh`.
#[derive(Debug, Clone, PartialEq)]
pub struct Staggered1d {
    pub r: Vec<f64>,
    pub j: Vec<f64>,
}

impl Staggered1d {
    pub fn new(r: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if r.len() != j.len() || r.len() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "1D state needs equal r and j lengths >= 2 (got {} and {})",
                r.len(),
                j.len()
            )));
        }
        Ok(Self { r, j })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `‖(r, εj)‖₂` with weight `h`.
    pub fn energy(&self, epsilon: f64, h: f64) -> f64 {
        let s: f64 = self
            .r
            .iter()
            .zip(&self.j)
            .map(|(r, j)| r * r + epsilon * epsilon * j * j)
            .sum();
        (s * h).sqrt()
    }
}

/// One step of the 1D scheme exactly as written in the module docs.
pub fn scheme_1d_step(s: &Staggered1d, p: &SchemeParams1d) -> Result<Staggered1d> {
    p.at(0.0).validate()?;
    let n = s.len();
    if n < 2 || s.j.len() != n {
        return Err(Error::ShapeMismatch("malformed 1D state".into()));
    }
    let SchemeParams1d {
        epsilon,
        sigma_s,
        sigma_a,
        dt,
        h,
        phi,
    } = *p;
    let e2 = epsilon * epsilon;
    // D j at (m+½)h and D r at mh.
    let dj = |m: usize| (s.j[(m + 1) % n] - s.j[m]) / h;
    let dr = |r: &[f64], m: usize| (r[m] - r[(m + n - 1) % n]) / h;

    let r_half: Vec<f64> = (0..n)
        .map(|m| s.r[m] - dt * (dj(m) + sigma_a * s.r[m]))
        .collect();
    let j_half: Vec<f64> = (0..n)
        .map(|m| s.j[m] - dt * (phi * dr(&s.r, m) + sigma_a * s.j[m]))
        .collect();
    let denom = e2 + sigma_s * dt;
    let j_new: Vec<f64> = (0..n)
        .map(|m| e2 / denom * j_half[m] - dt / denom * (1.0 - e2 * phi) * dr(&r_half, m))
        .collect();
    let out = Staggered1d { r: r_half, j: j_new };
    if out.r.iter().chain(&out.j).any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow { step: 0, t: dt });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn base() -> GrowthParams {
        GrowthParams {
            epsilon: 0.3,
            sigma_s: 1.7,
            sigma_a: 0.4,
            dt: 2e-3,
            h: 0.05,
            phi: 5.0,
            theta: 1.1,
        }
    }

    #[test]
    fn zero_mode_is_diagonal() {
        let p = GrowthParams { theta: 0.0, ..base() };
        let m = growth_matrix(&p).unwrap();
        let a = 1.0 - p.sigma_a * p.dt;
        let k = p.epsilon.powi(2) / (p.epsilon.powi(2) + p.sigma_s * p.dt);
        assert!((m.entries[0][0].re - a).abs() < 1e-15);
        assert!((m.entries[1][1].re - a * k).abs() < 1e-15);
        assert_eq!(m.entries[0][1].norm(), 0.0);
        assert_eq!(m.entries[1][0].norm(), 0.0);
    }

    #[test]
    fn free_streaming_closed_forms() {
        for theta in [0.3, 1.0, 2.5, 4.0] {
            let p = GrowthParams {
                sigma_s: 0.0,
                sigma_a: 0.0,
                phi: 0.0,
                epsilon: 1.0,
                theta,
                ..base()
            };
            let m = growth_matrix(&p).unwrap();
            assert!((m.det - 1.0).abs() < 1e-15);
            let want = 1.0 + p.dt * p.dt * p.d_squared() / (p.epsilon * p.epsilon) / 2.0;
            assert!((m.g - want).abs() < 1e-15);
            assert!((spectral_radius(&p).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_match_product() {
        let p = base();
        let m = growth_matrix(&p).unwrap();
        let tr = m.trace();
        let det = m.determinant();
        assert!(tr.im.abs() < 1e-15 && det.im.abs() < 1e-15);
        assert!((0.5 * tr.re - m.g).abs() <= 1e-12 * m.g.abs());
        assert!((det.re - m.det).abs() <= 1e-12 * m.det.abs());
    }

    #[test]
    fn eigen_relations() {
        for theta in [0.0, 0.4, PI, 5.9] {
            let p = GrowthParams { theta, ..base() };
            let m = growth_matrix(&p).unwrap();
            let [l1, l2] = eigenvalues(&p).unwrap();
            assert!(((l1 + l2).re - 2.0 * m.g).abs() < 1e-12);
            assert!(((l1 * l2).re - m.det).abs() < 1e-12);
            assert!((l1.norm() - spectral_radius(&p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn expanded_discriminant() {
        for theta in [0.2, 1.3, PI] {
            let p = GrowthParams { theta, ..base() };
            let m = growth_matrix(&p).unwrap();
            let naive = m.g * m.g - m.det;
            assert!((m.disc - naive).abs() <= 1e-12 * m.det.abs());
        }
        // Repeated eigenvalue 1 − σ_aΔt: the naive difference leaves roundoff
        // whose square root is far above 1e-12.
        let p = GrowthParams {
            epsilon: 1.4579356249457757e-6,
            sigma_s: 0.0,
            sigma_a: 6.391084425525762,
            dt: 9.098710417829237e-10,
            h: 0.0012481635350899173,
            phi: 2735.758147729958,
            theta: 0.0,
        };
        let m = growth_matrix(&p).unwrap();
        assert_eq!(m.disc, 0.0);
        assert!(spectral_radius(&p).unwrap() < 1.0);
    }

    #[test]
    fn unit_radius_at_zero_mode() {
        let p = GrowthParams { theta: 0.0, sigma_a: 0.0, ..base() };
        let [l1, l2] = eigenvalues(&p).unwrap();
        assert!((l1.re - 1.0).abs() < 1e-15);
        let k = p.epsilon.powi(2) / (p.epsilon.powi(2) + p.sigma_s * p.dt);
        assert!((l2.re - k).abs() < 1e-15);
    }

    #[test]
    fn certification_examples() {
        let p = SchemeParams1d::with_stable_choice(1.0, 1.0, 0.0, 0.01, 1.0).unwrap();
        let c = certify_proposition(&p, 4096).unwrap();
        assert!(c.passed, "{c:?}");

        let loose = SchemeParams1d { phi: 1.0, ..p };
        let c = certify_proposition(&loose, 4096).unwrap();
        assert!(matches!(c.violations[..], [Violation::Relaxation { .. }]));
        assert!(!c.passed);

        let absorbing = SchemeParams1d { sigma_a: 2.0 / p.dt, ..p };
        let c = certify_proposition(&absorbing, 64).unwrap();
        assert!(c
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TimeStep { .. })));

        assert!(certify_proposition(&p, 4).is_err());
    }

    #[test]
    fn uniform_state_is_fixed() {
        let p = SchemeParams1d::with_stable_choice(0.1, 1.0, 0.0, 0.1, 0.9).unwrap();
        let s = Staggered1d::new(vec![2.5; 10], vec![0.0; 10]).unwrap();
        assert_eq!(scheme_1d_step(&s, &p).unwrap(), s);
    }

    #[test]
    fn invalid_parameters() {
        assert!(growth_matrix(&GrowthParams { sigma_s: -1.0, ..base() }).is_err());
        assert!(growth_matrix(&GrowthParams { dt: 0.0, ..base() }).is_err());
        assert!(Staggered1d::new(vec![1.0; 3], vec![0.0; 4]).is_err());
    }
}
