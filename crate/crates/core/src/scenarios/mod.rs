//! Ready-made test problems on periodic square domains.

pub mod lattice;
pub mod mms;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::angular::DirectionSet;
use crate::error::{invalid, Error, Result};
use crate::grid::{sample_on_r, GridGeometry, RField};
use crate::solver::{
    IsotropicSource, MaterialField, NoSource, ParityState, Solver, SourceTerm,
};
use lattice::Absorber;
use mms::MmsSource;

type Field2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Field3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type Distribution = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Mms,
    Gauss,
    VariableScattering,
    TwoMaterial,
    PhiStability,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Mms,
        ScenarioKind::Gauss,
        ScenarioKind::VariableScattering,
        ScenarioKind::TwoMaterial,
        ScenarioKind::PhiStability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Mms => "mms",
            ScenarioKind::Gauss => "gauss",
            ScenarioKind::VariableScattering => "variable_scattering",
            ScenarioKind::TwoMaterial => "two_material",
            ScenarioKind::PhiStability => "phi_stability",
        }
    }

    pub fn build(self) -> Scenario {
        match self {
            ScenarioKind::Mms => mms(),
            ScenarioKind::Gauss => gauss(),
            ScenarioKind::VariableScattering => variable_scattering(),
            ScenarioKind::TwoMaterial => two_material(),
            ScenarioKind::PhiStability => phi_stability(),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown scenario {s:?} (expected one of mms, gauss, variable_scattering, two_material, phi_stability)"
                ))
            })
    }
}

#[derive(Clone)]
enum SourceSpec {
    None,
    Isotropic(Field2),
    Mms,
}

/// A complete problem description. Grid size and direction count are chosen
/// when the problem is instantiated.
#[derive(Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Lower-left corner of the square domain.
    pub origin: (f64, f64),
    pub side: f64,
    pub epsilon: f64,
    pub t_final: f64,
    /// Grid size used when the caller does not pick one.
    pub default_n: usize,
    sigma_s: Field2,
    sigma_a: Field2,
    initial: Distribution,
    source: SourceSpec,
    exact: Option<Field3>,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("kind", &self.kind)
            .field("origin", &self.origin)
            .field("side", &self.side)
            .field("epsilon", &self.epsilon)
            .field("t_final", &self.t_final)
            .finish_non_exhaustive()
    }
}

/// A scenario discretized on a grid: everything needed to call
/// [`Solver::run`].
pub struct Instance {
    pub geometry: GridGeometry,
    pub material: MaterialField,
    pub source: Arc<dyn SourceTerm>,
    pub state: ParityState,
}

impl Instance {
    pub fn solver(&self, epsilon: f64) -> Result<Solver> {
        Solver::new(
            self.geometry,
            self.state.directions().clone(),
            self.material.clone(),
            self.source.clone(),
            epsilon,
        )
    }
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_t_final(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn geometry(&self, n: usize) -> Result<GridGeometry> {
        GridGeometry::square(n, self.origin.0, self.origin.1, self.side)
    }

    pub fn sigma_s(&self, x: f64, y: f64) -> f64 {
        (self.sigma_s)(x, y)
    }

    pub fn sigma_a(&self, x: f64, y: f64) -> f64 {
        (self.sigma_a)(x, y)
    }

    /// Initial distribution `f(0, x, y, ξ, η)`.
    pub fn initial(&self, x: f64, y: f64, xi: f64, eta: f64) -> f64 {
        (self.initial)(x, y, xi, eta)
    }

    pub fn exact_density(&self, t: f64, x: f64, y: f64) -> Option<f64> {
        self.exact.as_ref().map(|f| f(t, x, y))
    }

    pub fn has_exact_density(&self) -> bool {
        self.exact.is_some()
    }

    pub fn material(&self, g: &GridGeometry) -> Result<MaterialField> {
        MaterialField::from_fns(&*self.sigma_s, &*self.sigma_a, g)
    }

    pub fn source_term(&self, g: &GridGeometry) -> Arc<dyn SourceTerm> {
        match &self.source {
            SourceSpec::None => Arc::new(NoSource),
            SourceSpec::Isotropic(q) => {
                let q = q.clone();
                Arc::new(IsotropicSource::new(move |x, y| q(x, y)))
            }
            SourceSpec::Mms => Arc::new(MmsSource::new(self.epsilon, *g)),
        }
    }

    /// `Q` sampled on the R-grid when the source is isotropic; `None` when
    /// there is no source. Anisotropic sources are rejected.
    pub fn isotropic_source(&self, g: &GridGeometry) -> Result<Option<RField>> {
        match &self.source {
            SourceSpec::None => Ok(None),
            SourceSpec::Isotropic(q) => Ok(Some(sample_on_r(|x, y| q(x, y), g))),
            SourceSpec::Mms => Err(invalid(format!(
                "scenario {} has an anisotropic source",
                self.name()
            ))),
        }
    }

    pub fn initial_state(&self, g: GridGeometry, dirs: DirectionSet) -> Result<ParityState> {
        let f = self.initial.clone();
        ParityState::from_distribution(g, dirs, self.epsilon, move |x, y, xi, eta| {
            f(x, y, xi, eta)
        })
    }

    /// Samples the scenario on an `n × n` grid with `n_dirs` directions.
    pub fn instantiate(&self, n: usize, n_dirs: usize) -> Result<Instance> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(invalid(format!("epsilon must be positive (got {})", self.epsilon)));
        }
        let geometry = self.geometry(n)?;
        let dirs = DirectionSet::gauss(n_dirs)?;
        let material = self.material(&geometry)?;
        Ok(Instance {
            geometry,
            source: self.source_term(&geometry),
            state: self.initial_state(geometry, dirs)?,
            material,
        })
    }
}

/// Default number of quadrature points on `[0, 1]`.
pub const DEFAULT_DIRECTIONS: usize = 16;

fn gaussian(width: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync + Copy {
    move |x: f64, y: f64| (-(x * x + y * y) / (4.0 * width)).exp() / (4.0 * std::f64::consts::PI * width)
}

/// Manufactured solution on `[0, 1]²` up to `t = 0.1`, `ε = 1` by default.
pub fn mms() -> Scenario {
    Scenario {
        kind: ScenarioKind::Mms,
        origin: (0.0, 0.0),
        side: 1.0,
        epsilon: 1.0,
        t_final: 0.1,
        default_n: 32,
        sigma_s: Arc::new(|_, _| 1.0),
        sigma_a: Arc::new(|_, _| 0.0),
        initial: Arc::new(|x, y, xi, eta| mms::distribution(0.0, x, y, xi, eta)),
        source: SourceSpec::Mms,
        exact: Some(Arc::new(mms::exact_density)),
    }
}

/// Isotropic Gaussian of variance parameter `10⁻²` on `[−1, 1]²`, pure
/// scattering, up to `t = 0.1`. `ε = 10⁻²` by default.
pub fn gauss() -> Scenario {
    let bump = gaussian(1e-2);
    Scenario {
        kind: ScenarioKind::Gauss,
        origin: (-1.0, -1.0),
        side: 2.0,
        epsilon: 1e-2,
        t_final: 0.1,
        default_n: 64,
        sigma_s: Arc::new(|_, _| 1.0),
        sigma_a: Arc::new(|_, _| 0.0),
        initial: Arc::new(move |x, y, _, _| bump(x, y)),
        source: SourceSpec::None,
        exact: None,
    }
}

/// `σ_s(c) = c⁴ (c + √2)² (c − √2)²` for `c = |x| < 1`, else 1.
pub fn variable_sigma(x: f64, y: f64) -> f64 {
    let c = (x * x + y * y).sqrt();
    if c < 1.0 {
        let s2 = std::f64::consts::SQRT_2;
        let p = c * c * (c + s2) * (c - s2);
        p * p
    } else {
        1.0
    }
}

/// Gaussian initial data in a medium whose scattering vanishes at the origin.
/// `ε = 10⁻²`, run to `t = ε`.
pub fn variable_scattering() -> Scenario {
    Scenario {
        kind: ScenarioKind::VariableScattering,
        sigma_s: Arc::new(variable_sigma),
        t_final: 1e-2,
        default_n: 32,
        ..gauss()
    }
}

/// Two-material problem with the shipped absorber layout.
pub fn two_material() -> Scenario {
    let boxes = lattice::parse_layout(lattice::DEFAULT_LAYOUT).expect("shipped layout parses");
    two_material_with_layout(boxes)
}

/// Scattering medium on `[0, 5]²` with unit source on `[2, 3]²` and purely
/// absorbing squares (`σ_a = 100`, `σ_s = 0`); `ε = 1`, `t = 1.7`.
pub fn two_material_with_layout(boxes: Vec<Absorber>) -> Scenario {
    let boxes: Arc<[Absorber]> = boxes.into();
    let inside = move |x: f64, y: f64| boxes.iter().any(|b| b.contains(x, y));
    let inside_s = inside.clone();
    Scenario {
        kind: ScenarioKind::TwoMaterial,
        origin: (0.0, 0.0),
        side: 5.0,
        epsilon: 1.0,
        t_final: 1.7,
        default_n: 64,
        sigma_s: Arc::new(move |x, y| if inside_s(x, y) { 0.0 } else { 1.0 }),
        sigma_a: Arc::new(move |x, y| if inside(x, y) { 100.0 } else { 0.0 }),
        initial: Arc::new(|_, _, _, _| 0.0),
        source: SourceSpec::Isotropic(Arc::new(|x, y| {
            if (2.0..=3.0).contains(&x) && (2.0..=3.0).contains(&y) {
                1.0
            } else {
                0.0
            }
        })),
        exact: None,
    }
}

/// Narrow Gaussian (parameter `5·10⁻³`) at `ε = 1` on a `300²` grid up to
/// `t = 0.36`; used to compare relaxation parameters.
pub fn phi_stability() -> Scenario {
    let bump = gaussian(5e-3);
    Scenario {
        kind: ScenarioKind::PhiStability,
        epsilon: 1.0,
        t_final: 0.36,
        default_n: 300,
        initial: Arc::new(move |x, y, _, _| bump(x, y)),
        ..gauss()
    }
}

/// The two relaxation parameters compared on [`phi_stability`]: the stable
/// choice `hσ_t/(2ε³)` (or `1/ε²` in the parabolic regime) and `1/ε²`.
pub fn phi_pair(s: &Scenario, n: usize) -> Result<(f64, f64)> {
    let g = s.geometry(n)?;
    let m = s.material(&g)?;
    let phi1 = crate::solver::relaxation_parameter(s.epsilon, &g, &m)?;
    Ok((phi1, 1.0 / (s.epsilon * s.epsilon)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.name().parse::<ScenarioKind>().unwrap(), k);
            assert_eq!(k.build().kind, k);
        }
        assert_eq!("two-material".parse::<ScenarioKind>().unwrap(), ScenarioKind::TwoMaterial);
        assert!("lattice".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn gauss_values() {
        let s = gauss();
        let peak = 1.0 / (4.0 * std::f64::consts::PI * 1e-2);
        assert!((s.initial(0.0, 0.0, 0.3, 0.9) - peak).abs() < 1e-12);
        let at_r = s.initial(0.2, 0.0, 1.0, 0.0);
        assert!((at_r - peak * (-1.0f64).exp()).abs() < 1e-12);
        let p = phi_stability();
        assert!((p.initial(0.0, 0.0, 1.0, 0.0) - 15.915494309189533).abs() < 1e-12);
    }

    #[test]
    fn variable_sigma_values() {
        assert_eq!(variable_sigma(0.0, 0.0), 0.0);
        let near = variable_sigma(1.0 - 1e-12, 0.0);
        assert!((near - 1.0).abs() < 1e-10);
        assert_eq!(variable_sigma(1.0, 0.0), 1.0);
        // Range of σ/ε is [0, 100] for ε = 1/100.
        let s = variable_scattering();
        let g = s.geometry(64).unwrap();
        let m = s.material(&g).unwrap();
        let max = m.sigma_s_r.iter().fold(0.0, f64::max);
        assert!(max / s.epsilon <= 100.0 + 1e-9);
        assert_eq!(s.t_final, s.epsilon);
        // σ_t vanishes at the origin vertex: hyperbolic time step and φ = 0.
        let (phi, _) = phi_pair(&s, 64).unwrap();
        assert_eq!(phi, 0.0);
        let dt = crate::solver::cfl_timestep(s.epsilon, &g, &m, 0.9).unwrap();
        assert!((dt - 0.9 * 0.5 * 0.5 * s.epsilon * g.h()).abs() < 1e-18);
    }

    #[test]
    fn two_material_values() {
        let s = two_material();
        let g = s.geometry(50).unwrap();
        let q = s.source_term(&g);
        assert_eq!(q.value(0.0, 2.5, 2.5, 1.0, 0.0), 1.0);
        assert_eq!(q.value(0.0, 1.0, 2.5, 1.0, 0.0), 0.0);
        assert_eq!((s.sigma_s(0.5, 0.5), s.sigma_a(0.5, 0.5)), (0.0, 100.0));
        assert_eq!((s.sigma_s(1.0, 0.5), s.sigma_a(1.0, 0.5)), (1.0, 0.0));
        // Edge points take the scattering value.
        assert_eq!(s.sigma_a(0.25, 0.5), 0.0);
        // Source power: fine midpoint quadrature of Q over the domain.
        let n = 1000;
        let h = 5.0 / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += q.value(0.0, (i as f64 + 0.5) * h, (j as f64 + 0.5) * h, 1.0, 0.0) * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn initial_states_have_no_current() {
        for k in ScenarioKind::ALL {
            let s = k.build();
            let inst = s.instantiate(8, 4).unwrap();
            for slot in &inst.state.slots {
                assert!(slot.j1.iter().chain(slot.j2.iter()).all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn initial_density_matches_average() {
        let s = mms();
        let inst = s.instantiate(8, 16).unwrap();
        let want = sample_on_r(|x, y| mms::exact_density(0.0, x, y), &inst.geometry);
        for (a, b) in inst.state.density().iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let s = gauss();
        let inst = s.instantiate(8, 3).unwrap();
        let want = sample_on_r(|x, y| s.initial(x, y, 1.0, 0.0), &inst.geometry);
        for (a, b) in inst.state.density().iter().zip(want.iter()) {
            assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
    }

    #[test]
    fn phi_pair_values() {
        let s = phi_stability();
        let (phi1, phi2) = phi_pair(&s, 300).unwrap();
        // h = dx = 2/300 on [−1, 1]².
        assert!((phi1 - 1.0 / 300.0).abs() < 1e-15);
        assert_eq!(phi2, 1.0);
    }
}
