//! Asymptotic-preserving time stepper for the parity system.
//!
//! One step of size `Δt` is an explicit transport step followed by an
//! implicit relaxation step:
//!
//! ```text
//! transport   r¹ ← r¹ − Δt (ξ ∂x j¹ − η ∂y j¹ + σ_a r¹ − Q_even¹)
//!             j¹ ← j¹ − Δt (φξ ∂x r¹ − φη ∂y r¹ + σ_a j¹ − Q_odd¹/ε)
//! relaxation  ρ* = ½ Σ w (r¹ + r²)
//!             r  ← (ε² r + σ_s Δt ρ*) / (ε² + σ_s Δt)
//!             j¹ ← (ε² j¹ − Δt (1 − ε²φ)(ξ ∂x r¹ − η ∂y r¹)) / (ε² + σ_s Δt)
//! ```
//!
//! with the `²` parities using `+η`. The relaxation step leaves `ρ` unchanged,
//! which is what makes the implicit update explicit in practice. The `j`
//! update uses the already relaxed `r`.

mod kernels;
mod material;
mod source;
mod state;

pub use material::MaterialField;
pub use source::{IsotropicSource, NoSource, ParitySource, SourceTerm};
pub use state::{faces_to_r, reconstruct_f, Parities, ParityState, Quadrant};

use std::fmt;
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::angular::DirectionSet;
use crate::error::{invalid, Error, Result};
use crate::grid::{GridGeometry, RField};
use kernels::RelaxCoefficients;

/// Scalar parameters of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub epsilon: f64,
    pub phi: f64,
    pub dt: f64,
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(invalid(format!("epsilon must be positive (got {})", self.epsilon)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid(format!("dt must be positive (got {})", self.dt)));
        }
        let bound = 1.0 / (self.epsilon * self.epsilon);
        if !(self.phi >= 0.0) || self.phi > bound * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "phi = {} outside [0, 1/ε²] = [0, {bound}]",
                self.phi
            )));
        }
        Ok(())
    }
}

/// Which arm of `max{½εh, ¼h²σ_t}` sets the time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflBranch {
    /// `Δt ∝ εh`, active when `hσ_t ≤ 2ε`.
    Hyperbolic,
    /// `Δt ∝ h²σ_t`.
    Parabolic,
}

impl CflBranch {
    pub fn of(epsilon: f64, h: f64, sigma_t_min: f64) -> Self {
        if h * sigma_t_min <= 2.0 * epsilon {
            CflBranch::Hyperbolic
        } else {
            CflBranch::Parabolic
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CflBranch::Hyperbolic => "hyperbolic",
            CflBranch::Parabolic => "parabolic",
        }
    }
}

impl fmt::Display for CflBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Largest stable time step for the 2D scheme, scaled by `safety`:
///
/// `safety · ½ · min{1/σ_a,max, max{½εh, ¼h²σ_t,min}}`, `h = min(dx, dy)`.
///
/// Space-dependent coefficients enter through their worst case. Without
/// absorption the `1/σ_a` arm drops out. `σ_t` may vanish somewhere, which
/// selects the `½εh` arm.
pub fn cfl_timestep(
    epsilon: f64,
    g: &GridGeometry,
    mat: &MaterialField,
    safety: f64,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(invalid(format!("safety must lie in (0, 1] (got {safety})")));
    }
    let st = mat.sigma_t_min(epsilon);
    let h = g.h();
    let sa = mat.sigma_a_max();
    let transport = (0.5 * epsilon * h).max(0.25 * h * h * st);
    let limit = if sa > 0.0 { transport.min(1.0 / sa) } else { transport };
    Ok(safety * 0.5 * limit)
}

/// Relaxation parameter: `hσ_t,min / (2ε³)` if `hσ_t,min ≤ 2ε`, else `1/ε²`.
pub fn relaxation_parameter(epsilon: f64, g: &GridGeometry, mat: &MaterialField) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let st = mat.sigma_t_min(epsilon);
    Ok(relaxation_parameter_for(epsilon, g.h(), st))
}

pub(crate) fn relaxation_parameter_for(epsilon: f64, h: f64, sigma_t: f64) -> f64 {
    if h * sigma_t <= 2.0 * epsilon {
        h * sigma_t / (2.0 * epsilon * epsilon * epsilon)
    } else {
        1.0 / (epsilon * epsilon)
    }
}

fn check_inputs(s: &ParityState, mat: &MaterialField, p: &SchemeParams) -> Result<()> {
    p.validate()?;
    s.validate()?;
    mat.check_geometry(s.geometry())
}

/// Explicit transport sub-step. Time is not advanced.
pub fn transport_step(
    s: &ParityState,
    mat: &MaterialField,
    src: &dyn SourceTerm,
    p: &SchemeParams,
) -> Result<ParityState> {
    check_inputs(s, mat, p)?;
    let g = *s.geometry();
    let sa_r = mat.has_absorption().then_some(&mat.sigma_a_r);
    let sa_j = mat.has_absorption().then_some(&mat.sigma_a_j);
    let mut out = s.clone();
    let mut q = ParitySource::zeros(&g);
    for ((old, new), &(xi, eta)) in s
        .slots
        .iter()
        .zip(out.slots.iter_mut())
        .zip(s.directions().directions())
    {
        if !src.is_zero() {
            src.parity_fields(s.t, xi, eta, p.epsilon, &g, &mut q);
        }
        let qs = (!src.is_zero()).then_some(&q);
        kernels::transport_r(&old.r1, &old.j1, xi, -eta, sa_r, qs.map(|q| &q.even1), p.dt, &g, &mut new.r1);
        kernels::transport_r(&old.r2, &old.j2, xi, eta, sa_r, qs.map(|q| &q.even2), p.dt, &g, &mut new.r2);
        kernels::transport_j(&mut new.j1, &old.r1, xi, -eta, p.phi, sa_j, qs.map(|q| &q.odd1), p.dt, &g);
        kernels::transport_j(&mut new.j2, &old.r2, xi, eta, p.phi, sa_j, qs.map(|q| &q.odd2), p.dt, &g);
    }
    if !out.is_finite() {
        return Err(Error::NumericOverflow { step: 0, t: s.t });
    }
    Ok(out)
}

/// Implicit relaxation sub-step, evaluated in closed form. Time is not advanced.
pub fn relaxation_step(s: &ParityState, mat: &MaterialField, p: &SchemeParams) -> Result<ParityState> {
    check_inputs(s, mat, p)?;
    let g = *s.geometry();
    let coef = RelaxCoefficients::new(mat, p.epsilon, p.phi, p.dt);
    let rho = s.density();
    let mut out = s.clone();
    for ((old, new), &(xi, eta)) in s
        .slots
        .iter()
        .zip(out.slots.iter_mut())
        .zip(s.directions().directions())
    {
        kernels::relax_r(&old.r1, &rho, &coef, &mut new.r1);
        kernels::relax_r(&old.r2, &rho, &coef, &mut new.r2);
        kernels::relax_j(&mut new.j1, &new.r1, xi, -eta, &coef, &g);
        kernels::relax_j(&mut new.j2, &new.r2, xi, eta, &coef, &g);
    }
    if !out.is_finite() {
        return Err(Error::NumericOverflow { step: 0, t: s.t });
    }
    Ok(out)
}

/// Transport then relaxation; advances `t` by `Δt`.
pub fn step(
    s: &ParityState,
    mat: &MaterialField,
    src: &dyn SourceTerm,
    p: &SchemeParams,
) -> Result<ParityState> {
    let half = transport_step(s, mat, src, p)?;
    let mut out = relaxation_step(&half, mat, p)?;
    out.t = s.t + p.dt;
    Ok(out)
}

/// Per-step record emitted by [`Solver::run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// `Σ ρ · ½ dx dy` over the R-grid.
    pub mass: f64,
    pub max_rho: f64,
}

impl StepDiagnostics {
    pub const CSV_HEADER: &'static str = "step,t,dt,mass,max_rho";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{:?}",
            self.step, self.t, self.dt, self.mass, self.max_rho
        )
    }
}

/// Options for [`Solver::run`]. Unset fields fall back to the stability rules.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub safety: f64,
    pub phi: Option<f64>,
    pub dt: Option<f64>,
    /// Abort once `max|ρ|` exceeds this multiple of its initial value.
    pub growth_limit: Option<f64>,
    /// Times at which the run lands exactly and reports the state.
    pub stops: Vec<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            safety: 0.9,
            phi: None,
            dt: None,
            growth_limit: None,
            stops: Vec::new(),
        }
    }
}

/// Callback payload for [`Solver::run`].
pub enum RunEvent<'a> {
    Step(&'a StepDiagnostics),
    Stop {
        t: f64,
        state: &'a ParityState,
        density: &'a RField,
    },
}

/// Summary of a completed run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub steps: usize,
    pub dt: f64,
    pub phi: f64,
    pub branch: CflBranch,
    pub diagnostics: Vec<StepDiagnostics>,
    pub density: RField,
}

enum SourceCache {
    Zero,
    Isotropic(RField),
    Static(Vec<ParitySource>),
    Dynamic,
}

struct DirWork {
    rstar1: RField,
    rstar2: RField,
    src: Option<ParitySource>,
}

/// In-place stepper holding everything that stays fixed during a run.
pub struct Solver {
    geom: GridGeometry,
    dirs: DirectionSet,
    mat: MaterialField,
    source: Arc<dyn SourceTerm>,
    epsilon: f64,
    cache: SourceCache,
    work: Vec<DirWork>,
    coef: Option<RelaxCoefficients>,
}

impl Solver {
    pub fn new(
        geom: GridGeometry,
        dirs: DirectionSet,
        mat: MaterialField,
        source: Arc<dyn SourceTerm>,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(invalid("epsilon must be positive"));
        }
        mat.check_geometry(&geom)?;
        let cache = if source.is_zero() {
            SourceCache::Zero
        } else if source.is_isotropic() && !source.is_time_dependent() {
            let mut q = ParitySource::zeros(&geom);
            source.parity_fields(0.0, 1.0, 0.0, epsilon, &geom, &mut q);
            SourceCache::Isotropic(q.even1)
        } else if !source.is_time_dependent() {
            SourceCache::Static(
                dirs.directions()
                    .iter()
                    .map(|&(xi, eta)| {
                        let mut q = ParitySource::zeros(&geom);
                        source.parity_fields(0.0, xi, eta, epsilon, &geom, &mut q);
                        q
                    })
                    .collect(),
            )
        } else {
            SourceCache::Dynamic
        };
        let dynamic = matches!(cache, SourceCache::Dynamic);
        let work = (0..dirs.len())
            .map(|_| DirWork {
                rstar1: RField::zeros(geom.nx, geom.ny),
                rstar2: RField::zeros(geom.nx, geom.ny),
                src: dynamic.then(|| ParitySource::zeros(&geom)),
            })
            .collect();
        Ok(Self {
            geom,
            dirs,
            mat,
            source,
            epsilon,
            cache,
            work,
            coef: None,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn material(&self) -> &MaterialField {
        &self.mat
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cfl_timestep(&self, safety: f64) -> Result<f64> {
        cfl_timestep(self.epsilon, &self.geom, &self.mat, safety)
    }

    pub fn relaxation_parameter(&self) -> Result<f64> {
        relaxation_parameter(self.epsilon, &self.geom, &self.mat)
    }

    pub fn branch(&self) -> CflBranch {
        CflBranch::of(self.epsilon, self.geom.h(), self.mat.sigma_t_min(self.epsilon))
    }

    fn check_state(&self, s: &ParityState) -> Result<()> {
        s.validate()?;
        if *s.geometry() != self.geom || s.directions() != &self.dirs {
            return Err(Error::ShapeMismatch(
                "state geometry or directions differ from the solver's".into(),
            ));
        }
        Ok(())
    }

    /// Advances `s` by one step in place and returns the new density.
    pub fn step_in_place(&mut self, s: &mut ParityState, dt: f64, phi: f64) -> Result<RField> {
        SchemeParams {
            epsilon: self.epsilon,
            phi,
            dt,
        }
        .validate()?;
        self.check_state(s)?;
        let rebuild = match &self.coef {
            Some(c) => c.dt != dt || c.phi != phi,
            None => true,
        };
        if rebuild {
            self.coef = Some(RelaxCoefficients::new(&self.mat, self.epsilon, phi, dt));
        }
        let coef = self.coef.as_ref().expect("coefficients built above");
        let g = self.geom;
        let eps = self.epsilon;
        let t = s.t;
        let has_abs = self.mat.has_absorption();
        let sa_r = has_abs.then_some(&self.mat.sigma_a_r);
        let sa_j = has_abs.then_some(&self.mat.sigma_a_j);
        let source = &*self.source;
        let cache = &self.cache;
        let dirs = self.dirs.directions();

        let mut items: Vec<_> = s
            .slots
            .iter_mut()
            .zip(self.work.iter_mut())
            .enumerate()
            .collect();

        let transport = |(k, (slot, w)): &mut (usize, (&mut Parities, &mut DirWork))| {
            let (xi, eta) = dirs[*k];
            if let Some(buf) = w.src.as_mut() {
                source.parity_fields(t, xi, eta, eps, &g, buf);
            }
            let (qe1, qe2, qo1, qo2) = match cache {
                SourceCache::Zero => (None, None, None, None),
                SourceCache::Isotropic(q) => (Some(q), Some(q), None, None),
                SourceCache::Static(v) => {
                    let q = &v[*k];
                    (Some(&q.even1), Some(&q.even2), Some(&q.odd1), Some(&q.odd2))
                }
                SourceCache::Dynamic => {
                    let q = w.src.as_ref().expect("dynamic source buffer");
                    (Some(&q.even1), Some(&q.even2), Some(&q.odd1), Some(&q.odd2))
                }
            };
            kernels::transport_r(&slot.r1, &slot.j1, xi, -eta, sa_r, qe1, dt, &g, &mut w.rstar1);
            kernels::transport_r(&slot.r2, &slot.j2, xi, eta, sa_r, qe2, dt, &g, &mut w.rstar2);
            kernels::transport_j(&mut slot.j1, &slot.r1, xi, -eta, phi, sa_j, qo1, dt, &g);
            kernels::transport_j(&mut slot.j2, &slot.r2, xi, eta, phi, sa_j, qo2, dt, &g);
        };
        #[cfg(feature = "parallel")]
        items.par_iter_mut().for_each(transport);
        #[cfg(not(feature = "parallel"))]
        items.iter_mut().for_each(transport);

        // Fixed summation order over directions.
        let mut rho = RField::zeros(g.nx, g.ny);
        for (k, (_, w)) in items.iter() {
            rho.axpy_pair(0.5 * self.dirs.weights()[*k], &w.rstar1, &w.rstar2);
        }

        let rho_ref = &rho;
        let relax = |(k, (slot, w)): &mut (usize, (&mut Parities, &mut DirWork))| -> bool {
            let (xi, eta) = dirs[*k];
            kernels::relax_r(&w.rstar1, rho_ref, coef, &mut slot.r1);
            kernels::relax_r(&w.rstar2, rho_ref, coef, &mut slot.r2);
            kernels::relax_j(&mut slot.j1, &slot.r1, xi, -eta, coef, &g);
            kernels::relax_j(&mut slot.j2, &slot.r2, xi, eta, coef, &g);
            slot.j1.iter().sum::<f64>().is_finite() && slot.j2.iter().sum::<f64>().is_finite()
        };
        #[cfg(feature = "parallel")]
        let finite = items.par_iter_mut().map(relax).all(|ok| ok);
        #[cfg(not(feature = "parallel"))]
        let finite = items.iter_mut().map(relax).all(|ok| ok);

        s.t += dt;
        if !finite || !rho.sum().is_finite() {
            return Err(Error::NumericOverflow { step: 0, t: s.t });
        }
        Ok(rho)
    }

    /// Steps `s` to `t_final`, landing exactly on `t_final` and on every
    /// requested stop time.
    pub fn run(
        &mut self,
        s: &mut ParityState,
        t_final: f64,
        opts: &RunOptions,
        mut observer: impl FnMut(RunEvent<'_>),
    ) -> Result<RunReport> {
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(invalid(format!("t_final must be nonnegative (got {t_final})")));
        }
        self.check_state(s)?;
        let dt_nominal = match opts.dt {
            Some(dt) => dt,
            None => self.cfl_timestep(opts.safety)?,
        };
        let phi = match opts.phi {
            Some(phi) => phi,
            None => self.relaxation_parameter()?,
        };
        SchemeParams {
            epsilon: self.epsilon,
            phi,
            dt: dt_nominal,
        }
        .validate()?;

        let vol = self.geom.point_volume();
        let mut rho = s.density();
        let max0 = rho.max_abs();
        let limit = opts
            .growth_limit
            .filter(|_| max0 > 0.0)
            .map(|factor| factor * max0);
        let mut diagnostics = vec![StepDiagnostics {
            step: 0,
            t: s.t,
            dt: 0.0,
            mass: rho.sum() * vol,
            max_rho: max0,
        }];
        observer(RunEvent::Step(&diagnostics[0]));

        let mut stops: Vec<f64> = opts
            .stops
            .iter()
            .copied()
            .filter(|&ts| ts > s.t && ts < t_final)
            .collect();
        stops.sort_by(f64::total_cmp);
        stops.dedup();
        stops.push(t_final);
        for &ts in opts.stops.iter().filter(|&&ts| ts == s.t) {
            observer(RunEvent::Stop {
                t: ts,
                state: s,
                density: &rho,
            });
        }

        let mut steps = 0usize;
        for &stop in &stops {
            while s.t < stop {
                let remaining = stop - s.t;
                let landing = remaining <= dt_nominal * (1.0 + 1e-9);
                let dt = if landing { remaining } else { dt_nominal };
                rho = match self.step_in_place(s, dt, phi) {
                    Ok(r) => r,
                    Err(Error::NumericOverflow { t, .. }) => {
                        return Err(Error::NumericOverflow { step: steps + 1, t })
                    }
                    Err(e) => return Err(e),
                };
                if landing {
                    s.t = stop;
                }
                steps += 1;
                let d = StepDiagnostics {
                    step: steps,
                    t: s.t,
                    dt,
                    mass: rho.sum() * vol,
                    max_rho: rho.max_abs(),
                };
                observer(RunEvent::Step(&d));
                diagnostics.push(d);
                if let Some(lim) = limit {
                    if d.max_rho > lim {
                        return Err(Error::NumericOverflow { step: steps, t: s.t });
                    }
                }
            }
            if stop < t_final || opts.stops.contains(&stop) {
                observer(RunEvent::Stop {
                    t: stop,
                    state: s,
                    density: &rho,
                });
            }
        }

        Ok(RunReport {
            steps,
            dt: dt_nominal,
            phi,
            branch: self.branch(),
            diagnostics,
            density: rho,
        })
    }
}
