use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;

use ap_staggered::harness::{ap_limit_check, run_convergence_table, SweepOptions};
use ap_staggered::scenarios::lattice::read_layout;
use ap_staggered::scenarios::{two_material_with_layout, Scenario};
use ap_staggered::solver::{RunEvent, RunOptions, StepDiagnostics};
use ap_staggered::stability::{certify_proposition, radius_scan, SchemeParams1d};
use ap_staggered::RField;

use crate::config::{PhiRule, RunConfig};
use crate::error::CliError;
use crate::output::{write_atomic, write_density};

fn scenario(cfg: &RunConfig) -> Result<Scenario, CliError> {
    let base = match &cfg.layout {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            two_material_with_layout(read_layout(BufReader::new(file))?)
        }
        None => cfg.scenario.build(),
    };
    Ok(base.with_epsilon(cfg.epsilon).with_t_final(cfg.t_final))
}

/// Time-marches one scenario, writing diagnostics, snapshots and the final
/// density. Diagnostics gathered before a blow-up are still written.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let sc = scenario(cfg)?;
    let mut inst = sc.instantiate(cfg.n, cfg.n_points)?;
    let mut solver = inst.solver(cfg.epsilon)?;
    let opts = RunOptions {
        safety: cfg.safety,
        phi: cfg.phi,
        dt: None,
        growth_limit: cfg.growth_limit,
        stops: cfg.snapshot_times.clone(),
    };
    let mut diagnostics: Vec<StepDiagnostics> = Vec::new();
    let mut snapshots: Vec<(f64, RField)> = Vec::new();
    let result = solver.run(&mut inst.state, cfg.t_final, &opts, |ev| match ev {
        RunEvent::Step(d) => diagnostics.push(d.clone()),
        RunEvent::Stop { t, density, .. } => snapshots.push((t, density.clone())),
    });

    let name = sc.name();
    let mut csv = String::from(StepDiagnostics::CSV_HEADER);
    csv.push('\n');
    for d in &diagnostics {
        csv.push_str(&d.csv_row());
        csv.push('\n');
    }
    write_atomic(&cfg.out_dir.join(format!("{name}_diagnostics.csv")), csv.as_bytes())?;
    for (t, rho) in &snapshots {
        write_density(&cfg.out_dir, &format!("{name}_t{t:?}"), rho, &inst.geometry)?;
    }

    let report = result?;
    write_density(&cfg.out_dir, &format!("{name}_final"), &report.density, &inst.geometry)?;
    println!(
        "scenario={name} n={} epsilon={:?} steps={} dt={:?} phi={:?} branch={} t={:?}",
        cfg.n, cfg.epsilon, report.steps, report.dt, report.phi, report.branch, inst.state.t
    );
    Ok(())
}

/// Convergence sweep over `converge.n_list` × `converge.epsilon_list`.
pub fn converge(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.n_list.is_empty() || cfg.epsilon_list.is_empty() {
        return Err(CliError::Config("converge needs a non-empty n_list and epsilon_list".into()));
    }
    let sc = scenario(cfg)?;
    let opts = SweepOptions {
        n_dirs: cfg.n_points,
        safety: cfg.safety,
        reference_n: cfg.reference_n,
    };
    let table = run_convergence_table(&sc, &cfg.n_list, &cfg.epsilon_list, &opts)?;
    let csv = table.to_csv();
    write_atomic(&cfg.out_dir.join(format!("{}_convergence.csv", sc.name())), csv.as_bytes())?;
    print!("{csv}");
    Ok(())
}

pub const STABILITY_HEADER: &str = "epsilon,h,dt,phi,theta,radius,sigma_s,sigma_a";
pub const VERDICT_HEADER: &str = "epsilon,h,sigma_s,sigma_a,dt,phi,worst_theta,worst_radius,violations,passed";

/// Spectral radius scan of the 1D growth matrix for every parameter tuple.
pub fn stability(cfg: &RunConfig) -> Result<(), CliError> {
    let s = &cfg.stability;
    let mut tuples = Vec::new();
    for &eps in &s.epsilon_list {
        for &h in &s.h_list {
            for &ss in &s.sigma_s_list {
                for &sa in &s.sigma_a_list {
                    let mut p = SchemeParams1d::with_stable_choice(eps, ss, sa, h, cfg.safety)?;
                    if s.phi_rule == PhiRule::Max {
                        p.phi = 1.0 / (eps * eps);
                    }
                    tuples.push(p);
                }
            }
        }
    }
    if tuples.is_empty() {
        println!("stability: no parameter tuples");
        return Ok(());
    }
    let mut scan = format!("{STABILITY_HEADER}\n");
    let mut verdicts = format!("{VERDICT_HEADER}\n");
    let mut passed = 0;
    for p in &tuples {
        for (theta, radius) in radius_scan(p, s.theta_points)? {
            let _ = writeln!(
                scan,
                "{:?},{:?},{:?},{:?},{theta:?},{radius:?},{:?},{:?}",
                p.epsilon, p.h, p.dt, p.phi, p.sigma_s, p.sigma_a
            );
        }
        let c = certify_proposition(p, s.theta_points)?;
        passed += usize::from(c.passed);
        let _ = writeln!(
            verdicts,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{}",
            p.epsilon,
            p.h,
            p.sigma_s,
            p.sigma_a,
            p.dt,
            p.phi,
            c.worst_theta,
            c.worst_radius,
            c.violations.len(),
            c.passed
        );
    }
    write_atomic(&cfg.out_dir.join("stability.csv"), scan.as_bytes())?;
    write_atomic(&cfg.out_dir.join("stability_verdicts.csv"), verdicts.as_bytes())?;
    print!("{verdicts}");
    println!("stability: {passed} of {} tuples certified", tuples.len());
    Ok(())
}

/// Transport at small ε against the diffusion limit from the same data.
pub fn ap_check(cfg: &RunConfig) -> Result<(), CliError> {
    let sc = scenario(cfg)?;
    let rep = ap_limit_check(&sc, cfg.n, cfg.epsilon, cfg.t_final, cfg.n_points)?;
    let g = sc.geometry(cfg.n)?;
    let name = sc.name();
    let summary = format!(
        "epsilon,n,t_final,relative_l2,transport_steps,diffusion_steps\n{:?},{},{:?},{:?},{},{}\n",
        rep.epsilon, rep.n, rep.t_final, rep.relative_l2, rep.transport_steps, rep.diffusion_steps
    );
    let mut masses = String::from("solver,step,mass\n");
    for (label, list) in [("transport", &rep.transport_masses), ("diffusion", &rep.diffusion_masses)] {
        for (k, m) in list.iter().enumerate() {
            let _ = writeln!(masses, "{label},{},{m:?}", k + 1);
        }
    }
    write_atomic(&cfg.out_dir.join(format!("{name}_ap_summary.csv")), summary.as_bytes())?;
    write_atomic(&cfg.out_dir.join(format!("{name}_ap_masses.csv")), masses.as_bytes())?;
    write_density(&cfg.out_dir, &format!("{name}_ap_transport"), &rep.transport_density, &g)?;
    write_density(&cfg.out_dir, &format!("{name}_ap_diffusion"), &rep.diffusion_density, &g)?;
    print!("{summary}");
    Ok(())
}
