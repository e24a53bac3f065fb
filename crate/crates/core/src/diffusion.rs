//! Reference solver for the limiting diffusion equation
//! `∂t ρ = ½ ∇·(σ_t⁻¹ ∇ρ) − σ_a ρ + Q` on the R-grid.
//!
//! Vertices and centers are two independent five-point grids. Every flux
//! midpoint is a J-grid location:
//!
//! | plane  | x-flux at          | y-flux at          |
//! |--------|--------------------|--------------------|
//! | vertex | hface `(i+½, j)`   | vface `(i, j+½)`   |
//! | center | vface `(i+1, j+½)` | hface `(i+½, j+1)` |
//!
//! so `1/σ_t` is read from the material's J samples.

use crate::error::{invalid, Error, Result};
use crate::grid::{idx, GridGeometry, JField, RField};
use crate::solver::MaterialField;

/// Density and time of a diffusion run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionState {
    pub rho: RField,
    pub t: f64,
}

/// Result of [`diffusion_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionRun {
    pub state: DiffusionState,
    pub steps: usize,
    pub dt: f64,
    /// `Σ ρ · ½ dx dy` before the first step and after each step.
    pub masses: Vec<f64>,
}

fn inverse_total(mat: &MaterialField, epsilon: f64) -> Result<JField> {
    mat.require_positive_total(epsilon)?;
    let e2 = epsilon * epsilon;
    mat.sigma_s_j.zip_map(&mat.sigma_a_j, |s, a| 1.0 / (s + e2 * a))
}

/// `½ ∇·(σ_t⁻¹ ∇ρ) − σ_a ρ + Q` on both planes, with `σ_t = σ_s + ε² σ_a`.
pub fn diffusion_rhs(
    rho: &RField,
    mat: &MaterialField,
    src: Option<&RField>,
    epsilon: f64,
    g: &GridGeometry,
) -> Result<RField> {
    rho.check_geometry(g)?;
    mat.check_geometry(g)?;
    if let Some(q) = src {
        q.check_geometry(g)?;
    }
    let kappa = inverse_total(mat, epsilon)?;
    let mut out = RField::zeros(g.nx, g.ny);
    rhs_into(rho, mat, src, &kappa, g, &mut out);
    Ok(out)
}

fn rhs_into(
    rho: &RField,
    mat: &MaterialField,
    src: Option<&RField>,
    kappa: &JField,
    g: &GridGeometry,
    out: &mut RField,
) {
    let (nx, ny) = (g.nx, g.ny);
    let cx = 0.5 / (g.dx() * g.dx());
    let cy = 0.5 / (g.dy() * g.dy());
    for j in 0..ny {
        let jm = (j + ny - 1) % ny;
        let jp = (j + 1) % ny;
        for i in 0..nx {
            let im = (i + nx - 1) % nx;
            let ip = (i + 1) % nx;
            let k = idx(nx, i, j);

            let v = &rho.vertex;
            let fx = kappa.hface[k] * (v[idx(nx, ip, j)] - v[k])
                - kappa.hface[idx(nx, im, j)] * (v[k] - v[idx(nx, im, j)]);
            let fy = kappa.vface[k] * (v[idx(nx, i, jp)] - v[k])
                - kappa.vface[idx(nx, i, jm)] * (v[k] - v[idx(nx, i, jm)]);
            out.vertex[k] = cx * fx + cy * fy - mat.sigma_a_r.vertex[k] * v[k];

            let c = &rho.center;
            let fx = kappa.vface[idx(nx, ip, j)] * (c[idx(nx, ip, j)] - c[k])
                - kappa.vface[k] * (c[k] - c[idx(nx, im, j)]);
            let fy = kappa.hface[idx(nx, i, jp)] * (c[idx(nx, i, jp)] - c[k])
                - kappa.hface[k] * (c[k] - c[idx(nx, i, jm)]);
            out.center[k] = cx * fx + cy * fy - mat.sigma_a_r.center[k] * c[k];
        }
    }
    if let Some(q) = src {
        for (o, v) in out.iter_mut().zip(q.iter()) {
            *o += v;
        }
    }
}

/// Explicit Euler time step `0.4 h² σ_t,min`, further capped by `1/σ_a,max`.
pub fn diffusion_timestep(mat: &MaterialField, epsilon: f64, g: &GridGeometry) -> Result<f64> {
    let st = mat.require_positive_total(epsilon)?;
    let h = g.h();
    let dt = 0.4 * h * h * st;
    let sa = mat.sigma_a_max();
    Ok(if sa > 0.0 { dt.min(0.5 / sa) } else { dt })
}

/// Explicit Euler from `rho0` to `t_final`, truncating the last step.
pub fn diffusion_run(
    rho0: &RField,
    mat: &MaterialField,
    src: Option<&RField>,
    epsilon: f64,
    g: &GridGeometry,
    t_final: f64,
) -> Result<DiffusionRun> {
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(invalid(format!("t_final must be nonnegative (got {t_final})")));
    }
    rho0.check_geometry(g)?;
    mat.check_geometry(g)?;
    if let Some(q) = src {
        q.check_geometry(g)?;
    }
    let kappa = inverse_total(mat, epsilon)?;
    let dt_nominal = diffusion_timestep(mat, epsilon, g)?;
    let vol = g.point_volume();
    let mut rho = rho0.clone();
    let mut rhs = RField::zeros(g.nx, g.ny);
    let mut masses = vec![rho.sum() * vol];
    let mut t = 0.0;
    let mut steps = 0;
    while t < t_final {
        let remaining = t_final - t;
        let landing = remaining <= dt_nominal * (1.0 + 1e-9);
        let dt = if landing { remaining } else { dt_nominal };
        rhs_into(&rho, mat, src, &kappa, g, &mut rhs);
        for (r, d) in rho.iter_mut().zip(rhs.iter()) {
            *r += dt * d;
        }
        t = if landing { t_final } else { t + dt };
        steps += 1;
        let mass = rho.sum() * vol;
        if !mass.is_finite() {
            return Err(Error::NumericOverflow { step: steps, t });
        }
        masses.push(mass);
    }
    Ok(DiffusionRun {
        state: DiffusionState { rho, t },
        steps,
        dt: dt_nominal,
        masses,
    })
}
