//! Error norms, convergence orders, refinement sweeps and the diffusion-limit
//! comparison.

use std::fmt::Write as _;

use crate::diffusion::diffusion_run;
use crate::error::{invalid, Result};
use crate::grid::{idx, sample_on_r, GridGeometry, RField};
use crate::scenarios::Scenario;
use crate::solver::{CflBranch, RunOptions};

/// Discrete ℓ² norm with weight `½ dx dy` per R-point.
pub fn l2_norm(field: &RField, g: &GridGeometry) -> Result<f64> {
    field.check_geometry(g)?;
    let sq: f64 = field.iter().map(|v| v * v).sum();
    Ok((sq * g.point_volume()).sqrt())
}

/// `‖field − reference‖` for two fields on the same grid.
pub fn l2_error(field: &RField, reference: &RField, g: &GridGeometry) -> Result<f64> {
    field.check_geometry(g)?;
    reference.check_geometry(g)?;
    let diff = field.zip_map(reference, |a, b| a - b)?;
    l2_norm(&diff, g)
}

/// Error against a function evaluated at the R-points of `g`.
pub fn l2_error_exact(field: &RField, g: &GridGeometry, exact: impl Fn(f64, f64) -> f64) -> Result<f64> {
    l2_error(field, &sample_on_r(exact, g), g)
}

/// Error against a field on a finer grid that contains every R-point of `g`.
pub fn l2_error_restricted(
    field: &RField,
    g: &GridGeometry,
    fine: &RField,
    g_fine: &GridGeometry,
) -> Result<f64> {
    let r = restrict(fine, g_fine, g)?;
    l2_error(field, &r, g)
}

fn same_domain(a: &GridGeometry, b: &GridGeometry) -> bool {
    let close = |u: f64, v: f64| (u - v).abs() <= 1e-12 * (1.0 + u.abs().max(v.abs()));
    close(a.x0, b.x0) && close(a.y0, b.y0) && close(a.lx, b.lx) && close(a.ly, b.ly)
}

/// Samples `fine` at the R-points of `coarse`.
///
/// Positions are compared in half-cell units of the fine grid: an even/even
/// pair is a fine vertex, an odd/odd pair a fine center. Fails unless each
/// fine size is a multiple of the coarse one over the same domain.
pub fn restrict(fine: &RField, g_fine: &GridGeometry, coarse: &GridGeometry) -> Result<RField> {
    fine.check_geometry(g_fine)?;
    if !same_domain(g_fine, coarse) {
        return Err(invalid("restriction needs grids on the same domain"));
    }
    if g_fine.nx % coarse.nx != 0 || g_fine.ny % coarse.ny != 0 {
        return Err(invalid(format!(
            "grid {}x{} has no coinciding points with {}x{}",
            g_fine.nx, g_fine.ny, coarse.nx, coarse.ny
        )));
    }
    let (kx, ky) = (g_fine.nx / coarse.nx, g_fine.ny / coarse.ny);
    let (nx, ny) = (coarse.nx, coarse.ny);
    let mut out = RField::zeros(nx, ny);
    for j in 0..ny {
        for i in 0..nx {
            let c = idx(nx, i, j);
            out.vertex[c] = fine.vertex[idx(g_fine.nx, kx * i, ky * j)];
            // Coarse center sits at half-index (kx(2i+1), ky(2j+1)).
            let (hx, hy) = (kx * (2 * i + 1), ky * (2 * j + 1));
            let k = idx(g_fine.nx, hx / 2, hy / 2);
            out.center[c] = match (hx % 2, hy % 2) {
                (0, 0) => fine.vertex[k],
                (1, 1) => fine.center[k],
                _ => {
                    return Err(invalid(format!(
                        "refinement factors {kx}x{ky} map centers onto faces"
                    )))
                }
            };
        }
    }
    Ok(out)
}

/// `−(log E1 − log E2)/(log N1 − log N2)`.
pub fn convergence_order(e1: f64, n1: usize, e2: f64, n2: usize) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0) || !e1.is_finite() || !e2.is_finite() {
        return Err(invalid(format!("errors must be positive (got {e1}, {e2})")));
    }
    if n1 == n2 || n1 == 0 || n2 == 0 {
        return Err(invalid(format!("grid sizes must differ and be positive (got {n1}, {n2})")));
    }
    Ok(-(e1.ln() - e2.ln()) / ((n1 as f64).ln() - (n2 as f64).ln()))
}

/// Order between two consecutive grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n1: usize,
    pub n2: usize,
    pub e1: f64,
    pub e2: f64,
    pub order: f64,
}

impl ConvergenceRow {
    pub fn new(n1: usize, e1: f64, n2: usize, e2: f64) -> Result<Self> {
        Ok(Self {
            n1,
            n2,
            e1,
            e2,
            order: convergence_order(e1, n1, e2, n2)?,
        })
    }
}

/// One `(ε, N)` entry of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCell {
    pub scenario: String,
    pub epsilon: f64,
    pub n: usize,
    pub branch: CflBranch,
    pub error: f64,
    /// Order against the next coarser grid at the same `ε`.
    pub order_vs_prev: Option<f64>,
    pub steps: usize,
}

pub const CONVERGENCE_CSV_HEADER: &str = "scenario,epsilon,N,branch,error,order_vs_prev";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub cells: Vec<ConvergenceCell>,
}

impl ConvergenceTable {
    pub fn cell(&self, epsilon: f64, n: usize) -> Option<&ConvergenceCell> {
        self.cells.iter().find(|c| c.epsilon == epsilon && c.n == n)
    }

    /// Orders at one `ε`, coarse to fine.
    pub fn rows(&self, epsilon: f64) -> Vec<ConvergenceRow> {
        let cells: Vec<_> = self.cells.iter().filter(|c| c.epsilon == epsilon).collect();
        cells
            .windows(2)
            .filter_map(|w| ConvergenceRow::new(w[0].n, w[0].error, w[1].n, w[1].error).ok())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CONVERGENCE_CSV_HEADER);
        s.push('\n');
        for c in &self.cells {
            let order = c.order_vs_prev.map(|o| o.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{},{}", c.scenario, c.epsilon, c.n, c.branch, c.error, order);
        }
        s
    }
}

/// Settings shared by every cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub n_dirs: usize,
    pub safety: f64,
    /// Grid of the reference run when the scenario has no exact density.
    /// Defaults to the finest grid in the list, which then gets no row.
    pub reference_n: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_dirs: crate::scenarios::DEFAULT_DIRECTIONS,
            safety: 0.9,
            reference_n: None,
        }
    }
}

/// Final density of one run of `scenario` on an `n × n` grid.
pub fn final_density(
    scenario: &Scenario,
    n: usize,
    opts: &SweepOptions,
) -> Result<(RField, GridGeometry, CflBranch, usize)> {
    let mut inst = scenario.instantiate(n, opts.n_dirs)?;
    let mut solver = inst.solver(scenario.epsilon)?;
    let run_opts = RunOptions {
        safety: opts.safety,
        ..RunOptions::default()
    };
    let report = solver.run(&mut inst.state, scenario.t_final, &run_opts, |_| {})?;
    Ok((report.density, inst.geometry, report.branch, report.steps))
}

/// Errors and orders for every `ε` in `epsilons` and `N` in `ns`.
///
/// The reference is the exact density when the scenario has one, otherwise a
/// run on the reference grid.
pub fn run_convergence_table(
    scenario: &Scenario,
    ns: &[usize],
    epsilons: &[f64],
    opts: &SweepOptions,
) -> Result<ConvergenceTable> {
    if ns.is_empty() || epsilons.is_empty() {
        return Err(invalid("convergence sweep needs at least one N and one epsilon"));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("N-list must be strictly increasing"));
    }
    let reference_n = if scenario.has_exact_density() {
        None
    } else {
        let r = opts.reference_n.unwrap_or(*ns.last().unwrap());
        if let Some(&n) = ns.iter().find(|&&n| n < r && r % n != 0) {
            return Err(invalid(format!("reference grid {r} is not a multiple of {n}")));
        }
        Some(r)
    };
    let ns: Vec<usize> = ns.iter().copied().filter(|&n| Some(n) != reference_n).collect();
    if let Some(r) = reference_n {
        if ns.iter().any(|&n| n > r) {
            return Err(invalid(format!("grids finer than the reference {r}")));
        }
    }

    let mut table = ConvergenceTable::default();
    for &eps in epsilons {
        let sc = scenario.clone().with_epsilon(eps);
        let reference = match reference_n {
            Some(r) => {
                let (rho, g, _, _) = final_density(&sc, r, opts)?;
                Some((rho, g))
            }
            None => None,
        };
        let mut prev: Option<(usize, f64)> = None;
        for &n in &ns {
            let (rho, g, branch, steps) = final_density(&sc, n, opts)?;
            let error = match &reference {
                Some((fine, gf)) => l2_error_restricted(&rho, &g, fine, gf)?,
                None => l2_error_exact(&rho, &g, |x, y| {
                    sc.exact_density(sc.t_final, x, y).unwrap_or(0.0)
                })?,
            };
            let order_vs_prev = match prev {
                Some((n0, e0)) => convergence_order(e0, n0, error, n).ok(),
                None => None,
            };
            table.cells.push(ConvergenceCell {
                scenario: sc.name().to_string(),
                epsilon: eps,
                n,
                branch,
                error,
                order_vs_prev,
                steps,
            });
            prev = Some((n, error));
        }
    }
    Ok(table)
}

/// Comparison of the transport solver with the diffusion reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ApReport {
    pub epsilon: f64,
    pub n: usize,
    pub t_final: f64,
    /// `‖ρ_AP − ρ_diff‖ / ‖ρ_diff‖`.
    pub relative_l2: f64,
    pub transport_density: RField,
    pub diffusion_density: RField,
    pub transport_masses: Vec<f64>,
    pub diffusion_masses: Vec<f64>,
    pub transport_steps: usize,
    pub diffusion_steps: usize,
}

/// Runs the transport solver at `epsilon` and the diffusion reference from the
/// same initial density up to `t_final`.
pub fn ap_limit_check(
    scenario: &Scenario,
    n: usize,
    epsilon: f64,
    t_final: f64,
    n_dirs: usize,
) -> Result<ApReport> {
    let sc = scenario.clone().with_epsilon(epsilon);
    let mut inst = sc.instantiate(n, n_dirs)?;
    let g = inst.geometry;
    let rho0 = inst.state.density();
    let scale = rho0.max_abs().max(f64::MIN_POSITIVE);
    for slot in &inst.state.slots {
        let off = slot
            .r1
            .iter()
            .chain(slot.r2.iter())
            .zip(rho0.iter().chain(rho0.iter()))
            .map(|(r, p)| (r - p).abs())
            .chain(slot.j1.iter().chain(slot.j2.iter()).map(f64::abs))
            .fold(0.0, f64::max);
        if off > 1e-12 * scale {
            return Err(invalid(format!("scenario {} has anisotropic initial data", sc.name())));
        }
    }
    let q = sc.isotropic_source(&g)?;

    let diff = diffusion_run(&rho0, &inst.material, q.as_ref(), epsilon, &g, t_final)?;

    let mut solver = inst.solver(epsilon)?;
    let vol = g.point_volume();
    let mut transport_masses = Vec::new();
    let report = solver.run(&mut inst.state, t_final, &RunOptions::default(), |_| {})?;
    transport_masses.extend(report.diagnostics.iter().map(|d| d.mass));
    if transport_masses.is_empty() {
        transport_masses.push(rho0.sum() * vol);
    }

    let relative_l2 = l2_error(&report.density, &diff.state.rho, &g)? / l2_norm(&diff.state.rho, &g)?;
    Ok(ApReport {
        epsilon,
        n,
        t_final,
        relative_l2,
        transport_density: report.density,
        diffusion_density: diff.state.rho,
        transport_masses,
        diffusion_masses: diff.masses,
        transport_steps: report.steps,
        diffusion_steps: diff.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PlaneKind;
    use crate::scenarios;

    #[test]
    fn norm_examples() {
        let g = GridGeometry::square(8, 0.0, 0.0, 1.0).unwrap();
        let a = sample_on_r(|x, y| x * y, &g);
        assert_eq!(l2_error(&a, &a, &g).unwrap(), 0.0);
        let b = a.map(|v| v + 0.3);
        assert!((l2_error(&a, &b, &g).unwrap() - 0.3).abs() < 1e-15);
        let c = a.map(|v| v + 0.15);
        let (e1, e2) = (l2_error(&a, &b, &g).unwrap(), l2_error(&a, &c, &g).unwrap());
        assert!((e1 - 2.0 * e2).abs() < 1e-15);
        let g2 = GridGeometry::square(8, -1.0, -1.0, 2.0).unwrap();
        let z = RField::zeros(8, 8);
        let one = z.map(|_| 1.0);
        assert!((l2_error(&one, &z, &g2).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn order_examples() {
        assert!((convergence_order(0.04, 16, 0.01, 32).unwrap() - 2.0).abs() < 1e-14);
        assert!((convergence_order(0.04, 16, 0.02, 32).unwrap() - 1.0).abs() < 1e-14);
        assert!(convergence_order(0.0, 16, 0.02, 32).is_err());
        assert!(convergence_order(-1.0, 16, 0.02, 32).is_err());
        assert!(convergence_order(0.1, 16, 0.02, 16).is_err());
        for p in [0.5, 1.0, 1.6, 2.0, 3.7] {
            let e = |n: usize| 3.0 * (n as f64).powf(-p);
            let o = convergence_order(e(24), 24, e(96), 96).unwrap();
            assert!((o - p).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_hits_coinciding_points() {
        let f = |x: f64, y: f64| (3.0 * x).sin() + x * y * y;
        for k in [1, 2, 3, 4] {
            let gc = GridGeometry::new(6, 4, -1.0, 0.5, 2.0, 3.0).unwrap();
            let gf = GridGeometry::new(6 * k, 4 * k, -1.0, 0.5, 2.0, 3.0).unwrap();
            let fine = sample_on_r(f, &gf);
            let r = restrict(&fine, &gf, &gc).unwrap();
            let want = sample_on_r(f, &gc);
            for ((a, b), kind) in r
                .iter()
                .zip(want.iter())
                .zip(std::iter::repeat(PlaneKind::Vertex))
            {
                assert!((a - b).abs() < 1e-13, "{kind:?} k={k}");
            }
        }
    }

    #[test]
    fn restriction_errors() {
        let gc = GridGeometry::square(6, 0.0, 0.0, 1.0).unwrap();
        let gf = GridGeometry::square(9, 0.0, 0.0, 1.0).unwrap();
        assert!(restrict(&RField::zeros(9, 9), &gf, &gc).is_err());
        let shifted = GridGeometry::square(12, 0.1, 0.0, 1.0).unwrap();
        assert!(restrict(&RField::zeros(12, 12), &shifted, &gc).is_err());
        // Mixed parity refinement puts coarse centers on faces.
        let gm = GridGeometry::new(12, 18, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(restrict(&RField::zeros(12, 18), &gm, &gc).is_err());
    }

    #[test]
    fn table_shape_and_csv() {
        let sc = scenarios::mms().with_t_final(0.01);
        let opts = SweepOptions {
            n_dirs: 4,
            ..SweepOptions::default()
        };
        let t = run_convergence_table(&sc, &[8, 16], &[1.0, 0.1], &opts).unwrap();
        assert_eq!(t.cells.len(), 4);
        assert!(t.cells[0].order_vs_prev.is_none());
        assert!(t.cells[1].order_vs_prev.is_some());
        assert_eq!(t.rows(1.0).len(), 1);
        let csv = t.to_csv();
        assert!(csv.starts_with(CONVERGENCE_CSV_HEADER));
        assert_eq!(csv.lines().count(), 5);
        let again = run_convergence_table(&sc, &[8, 16], &[1.0, 0.1], &opts).unwrap();
        assert_eq!(again.to_csv(), csv);

        assert!(run_convergence_table(&sc, &[], &[1.0], &opts).is_err());
        assert!(run_convergence_table(&sc, &[16, 8], &[1.0], &opts).is_err());
    }

    #[test]
    fn reference_run_sweep() {
        let sc = scenarios::gauss().with_t_final(0.002);
        let opts = SweepOptions {
            n_dirs: 4,
            ..SweepOptions::default()
        };
        let t = run_convergence_table(&sc, &[8, 16, 32], &[0.1], &opts).unwrap();
        assert_eq!(t.cells.iter().map(|c| c.n).collect::<Vec<_>>(), vec![8, 16]);
        let bad = SweepOptions {
            reference_n: Some(24),
            ..opts
        };
        assert!(run_convergence_table(&sc, &[16], &[0.1], &bad).is_err());
    }

    #[test]
    fn ap_check_rejects_anisotropic() {
        let sc = scenarios::mms();
        assert!(ap_limit_check(&sc, 8, 1e-3, 0.001, 4).is_err());
    }
}
