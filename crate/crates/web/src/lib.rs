//! Browser bindings: time-march a scenario, scan the 1D growth factor, and
//! compare a small-ε run against the diffusion limit.
//!
//! The numerical work lives in plain Rust types (`Demo`, [`radius_curve`],
//! [`ap_cut`]) so it can be tested natively; the `wasm_bindgen` exports wrap
//! them and convert errors to `JsError`.

use ap_staggered::harness::ap_limit_check;
use ap_staggered::scenarios::{Instance, ScenarioKind};
use ap_staggered::stability::{radius_scan, SchemeParams1d};
use ap_staggered::{RField, Solver};
use wasm_bindgen::prelude::*;

/// Quadrature points per quadrant; fewer than the CLI default to keep frames fast.
pub const DEMO_DIRECTIONS: usize = 8;

pub struct Demo {
    inst: Instance,
    solver: Solver,
    dt: f64,
    phi: f64,
    density: RField,
    steps: usize,
}

impl Demo {
    pub fn new(scenario: &str, n: usize, epsilon: f64, phi: Option<f64>) -> ap_staggered::Result<Self> {
        let kind: ScenarioKind = scenario.parse()?;
        let sc = kind.build().with_epsilon(epsilon);
        let inst = sc.instantiate(n, DEMO_DIRECTIONS)?;
        let solver = inst.solver(epsilon)?;
        let dt = solver.cfl_timestep(0.9)?;
        let phi = match phi {
            Some(p) => p,
            None => solver.relaxation_parameter()?,
        };
        let density = inst.state.density();
        Ok(Self {
            inst,
            solver,
            dt,
            phi,
            density,
            steps: 0,
        })
    }

    pub fn advance(&mut self, steps: usize) -> ap_staggered::Result<()> {
        for _ in 0..steps {
            self.density = self.solver.step_in_place(&mut self.inst.state, self.dt, self.phi)?;
            self.steps += 1;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.inst.geometry.nx
    }

    pub fn time(&self) -> f64 {
        self.inst.state.t
    }

    pub fn mass(&self) -> f64 {
        self.density.sum() * self.inst.geometry.point_volume()
    }

    /// Vertex-plane density, row-major.
    pub fn density(&self) -> &[f64] {
        &self.density.vertex
    }
}

/// Spectral radius of the 1D scheme at `points` modes in `[0, 2π)` with the
/// stable time step; `phi_max` replaces the stable `φ` with `1/ε²`.
pub fn radius_curve(
    epsilon: f64,
    h: f64,
    sigma_s: f64,
    sigma_a: f64,
    phi_max: bool,
    points: usize,
) -> ap_staggered::Result<Vec<f64>> {
    let mut p = SchemeParams1d::with_stable_choice(epsilon, sigma_s, sigma_a, h, 0.9)?;
    if phi_max {
        p.phi = 1.0 / (epsilon * epsilon);
    }
    Ok(radius_scan(&p, points)?.into_iter().map(|(_, r)| r).collect())
}

/// Density along the row `y = 0` for the Gauss scenario: transport at
/// `epsilon` followed by the diffusion limit, concatenated, plus the relative
/// L² distance as the last entry.
pub fn ap_cut(n: usize, epsilon: f64, t_final: f64) -> ap_staggered::Result<Vec<f64>> {
    let sc = ScenarioKind::Gauss.build();
    let rep = ap_limit_check(&sc, n, epsilon, t_final, DEMO_DIRECTIONS)?;
    let g = sc.geometry(n)?;
    let row = ((0.0 - g.y0) / g.dy()).round() as usize % g.ny;
    let cut = |f: &RField| f.vertex[row * g.nx..(row + 1) * g.nx].to_vec();
    let mut out = cut(&rep.transport_density);
    out.extend(cut(&rep.diffusion_density));
    out.push(rep.relative_l2);
    Ok(out)
}

fn js(e: ap_staggered::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Simulation(Demo);

#[wasm_bindgen]
impl Simulation {
    /// `phi` may be `undefined` for the stable choice.
    #[wasm_bindgen(constructor)]
    pub fn new(scenario: &str, n: usize, epsilon: f64, phi: Option<f64>) -> Result<Simulation, JsError> {
        Demo::new(scenario, n, epsilon, phi).map(Simulation).map_err(js)
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        self.0.advance(steps).map_err(js)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn time(&self) -> f64 {
        self.0.time()
    }

    pub fn mass(&self) -> f64 {
        self.0.mass()
    }

    pub fn dt(&self) -> f64 {
        self.0.dt
    }

    pub fn phi(&self) -> f64 {
        self.0.phi
    }

    pub fn density(&self) -> Vec<f64> {
        self.0.density().to_vec()
    }
}

#[wasm_bindgen(js_name = radiusCurve)]
pub fn radius_curve_js(
    epsilon: f64,
    h: f64,
    sigma_s: f64,
    sigma_a: f64,
    phi_max: bool,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    radius_curve(epsilon, h, sigma_s, sigma_a, phi_max, points).map_err(js)
}

#[wasm_bindgen(js_name = apCut)]
pub fn ap_cut_js(n: usize, epsilon: f64, t_final: f64) -> Result<Vec<f64>, JsError> {
    ap_cut(n, epsilon, t_final).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_advances_and_conserves_mass() {
        let mut d = Demo::new("gauss", 16, 1.0, None).unwrap();
        let m0 = d.mass();
        d.advance(5).unwrap();
        assert!(d.time() > 0.0);
        assert_eq!(d.density().len(), 16 * 16);
        assert!((d.mass() - m0).abs() < 1e-12 * m0);
        assert!(Demo::new("nope", 16, 1.0, None).is_err());
        assert!(Demo::new("gauss", 1, 1.0, None).is_err());
    }

    #[test]
    fn radius_curve_separates_phi_choices() {
        let stable = radius_curve(1.0, 0.01, 1.0, 0.0, false, 64).unwrap();
        let wild = radius_curve(1.0, 0.01, 1.0, 0.0, true, 64).unwrap();
        assert_eq!(stable.len(), 64);
        assert!(stable.iter().all(|&r| r <= 1.0 + 1e-12));
        assert!(wild.iter().any(|&r| r > 1.0));
    }

    #[test]
    fn ap_cut_layout() {
        let v = ap_cut(8, 1e-4, 1e-3).unwrap();
        assert_eq!(v.len(), 2 * 8 + 1);
        assert!(v[16] >= 0.0);
    }
}
