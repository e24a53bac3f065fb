//! Per-direction update kernels shared by the value-returning step functions
//! and the in-place [`Solver`](super::Solver).
//!
//! Each kernel sweeps its output row by row, forming the difference terms in
//! a row buffer and combining them in the same pass.

use crate::grid::{div_j_row, grad_r_row, GridGeometry, JField, PlaneKind, RField};

use super::material::MaterialField;

/// Pointwise coefficients of the implicit relaxation update for a fixed `Δt`.
#[derive(Debug, Clone)]
pub(crate) struct RelaxCoefficients {
    /// `σ_s Δt / (ε² + σ_s Δt)` at R-points.
    pub pull_r: RField,
    /// `ε² / (ε² + σ_s Δt)` at J-points.
    pub keep_j: JField,
    /// `Δt (1 − ε² φ) / (ε² + σ_s Δt)` at J-points.
    pub grad_j: JField,
    pub dt: f64,
    pub phi: f64,
}

impl RelaxCoefficients {
    pub fn new(mat: &MaterialField, epsilon: f64, phi: f64, dt: f64) -> Self {
        let e2 = epsilon * epsilon;
        let lag = dt * (1.0 - e2 * phi);
        Self {
            pull_r: mat.sigma_s_r.map(|s| s * dt / (e2 + s * dt)),
            keep_j: mat.sigma_s_j.map(|s| e2 / (e2 + s * dt)),
            grad_j: mat.sigma_s_j.map(|s| lag / (e2 + s * dt)),
            dt,
            phi,
        }
    }
}

fn r_plane(f: &RField, kind: PlaneKind) -> &[f64] {
    match kind {
        PlaneKind::Vertex => &f.vertex,
        _ => &f.center,
    }
}

fn r_plane_mut(f: &mut RField, kind: PlaneKind) -> &mut [f64] {
    match kind {
        PlaneKind::Vertex => &mut f.vertex,
        _ => &mut f.center,
    }
}

fn j_plane(f: &JField, kind: PlaneKind) -> &[f64] {
    match kind {
        PlaneKind::HFace => &f.hface,
        _ => &f.vface,
    }
}

fn j_plane_mut(f: &mut JField, kind: PlaneKind) -> &mut [f64] {
    match kind {
        PlaneKind::HFace => &mut f.hface,
        _ => &mut f.vface,
    }
}

/// `out = r − Δt (sx ∂x j + sy ∂y j + σ_a r − q)` at R-points.
///
/// `sy` carries the parity sign: `−η` for `r¹`, `+η` for `r²`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn transport_r(
    r: &RField,
    j: &JField,
    sx: f64,
    sy: f64,
    sigma_a: Option<&RField>,
    q: Option<&RField>,
    dt: f64,
    g: &GridGeometry,
    out: &mut RField,
) {
    let nx = g.nx;
    let mut buf = vec![0.0; nx];
    for kind in [PlaneKind::Vertex, PlaneKind::Center] {
        let rp = r_plane(r, kind);
        let sa = sigma_a.map(|f| r_plane(f, kind));
        let qp = q.map(|f| r_plane(f, kind));
        let op = r_plane_mut(out, kind);
        for row in 0..g.ny {
            div_j_row(j, g, sx, sy, kind, row, &mut buf);
            let base = row * nx;
            let o = &mut op[base..base + nx];
            let rv = &rp[base..base + nx];
            for i in 0..nx {
                o[i] = rv[i] - dt * buf[i];
            }
            if let Some(sa) = sa {
                let sa = &sa[base..base + nx];
                for i in 0..nx {
                    o[i] += -dt * sa[i] * rv[i];
                }
            }
            if let Some(qp) = qp {
                let qp = &qp[base..base + nx];
                for i in 0..nx {
                    o[i] += dt * qp[i];
                }
            }
        }
    }
}

/// `j ← j − Δt (φ sx ∂x r + φ sy ∂y r + σ_a j − q)` in place at J-points.
#[allow(clippy::too_many_arguments)]
pub(crate) fn transport_j(
    j: &mut JField,
    r: &RField,
    sx: f64,
    sy: f64,
    phi: f64,
    sigma_a: Option<&JField>,
    q: Option<&JField>,
    dt: f64,
    g: &GridGeometry,
) {
    let nx = g.nx;
    let mut buf = vec![0.0; nx];
    for kind in [PlaneKind::HFace, PlaneKind::VFace] {
        let sa = sigma_a.map(|f| j_plane(f, kind));
        let qp = q.map(|f| j_plane(f, kind));
        let jp = j_plane_mut(j, kind);
        for row in 0..g.ny {
            let base = row * nx;
            let jr = &mut jp[base..base + nx];
            if let Some(sa) = sa {
                let sa = &sa[base..base + nx];
                for i in 0..nx {
                    jr[i] -= dt * sa[i] * jr[i];
                }
            }
            if phi != 0.0 {
                grad_r_row(r, g, phi * sx, phi * sy, kind, row, &mut buf);
                for i in 0..nx {
                    jr[i] += -dt * buf[i];
                }
            }
            if let Some(qp) = qp {
                let qp = &qp[base..base + nx];
                for i in 0..nx {
                    jr[i] += dt * qp[i];
                }
            }
        }
    }
}

/// `out = r* + pull · (ρ* − r*)`, i.e. `(ε² r* + σ_s Δt ρ*) / (ε² + σ_s Δt)`.
///
/// The increment form returns `r*` unchanged wherever `r* = ρ*`.
pub(crate) fn relax_r(rstar: &RField, rho: &RField, c: &RelaxCoefficients, out: &mut RField) {
    let planes = [
        (&mut out.vertex, &rstar.vertex, &rho.vertex, &c.pull_r.vertex),
        (&mut out.center, &rstar.center, &rho.center, &c.pull_r.center),
    ];
    for (o, rs, rh, p) in planes {
        for i in 0..o.len() {
            o[i] = rs[i] + p[i] * (rh[i] - rs[i]);
        }
    }
}

/// `j ← keep · j* − grad · (sx ∂x r + sy ∂y r)` in place at J-points.
pub(crate) fn relax_j(
    j: &mut JField,
    r_new: &RField,
    sx: f64,
    sy: f64,
    c: &RelaxCoefficients,
    g: &GridGeometry,
) {
    let nx = g.nx;
    let mut buf = vec![0.0; nx];
    for kind in [PlaneKind::HFace, PlaneKind::VFace] {
        let keep = j_plane(&c.keep_j, kind);
        let grad = j_plane(&c.grad_j, kind);
        let jp = j_plane_mut(j, kind);
        for row in 0..g.ny {
            grad_r_row(r_new, g, sx, sy, kind, row, &mut buf);
            let base = row * nx;
            let jr = &mut jp[base..base + nx];
            let (k, gr) = (&keep[base..base + nx], &grad[base..base + nx]);
            for i in 0..nx {
                jr[i] = k[i] * jr[i] - gr[i] * buf[i];
            }
        }
    }
}
