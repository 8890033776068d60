use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::adapt::{adaptive_loop_with, AdaptiveConfig, AdaptiveRun};
use crate::assembly::{edge_gauss_rule, FeFunction};
use crate::estimator::compute_indicators;
use crate::mesh::{write_vtk, BoundaryLabel, Mesh};
use crate::problem::ProblemSpec;
use crate::solver::{interpolate, newton_solve, DEFAULT_MAX_ITER};
use crate::Result;

use super::plot::{loglog_svg, Series};
use super::rates::{fit_rate, RateFit};
use super::reference::ReferenceSolution;

/// Initial mesh size of all experiments.
pub const INITIAL_H: f64 = 0.2;
/// Meshes in the uniform-refinement baseline (150 to 153600 elements).
pub const UNIFORM_LEVELS: usize = 6;
/// First iteration of the contraction check.
pub const CONTRACTION_START: usize = 2;
/// First iteration of the effectivity band.
pub const EFFECTIVITY_START: usize = 5;

/// Degrees of freedom at which the relative error is reported.
pub fn snapshot_dofs(example: u32) -> Option<usize> {
    match example {
        1 => Some(3248),
        2 => Some(3070),
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub example: u32,
    pub adaptive: AdaptiveConfig,
    pub initial_h: f64,
    pub uniform_levels: usize,
    pub window_decades: f64,
    pub write_vtk: bool,
}

impl ExperimentConfig {
    pub fn new(example: u32, adaptive: AdaptiveConfig) -> Self {
        ExperimentConfig {
            example,
            adaptive,
            initial_h: INITIAL_H,
            uniform_levels: UNIFORM_LEVELS,
            window_decades: 1.0,
            write_vtk: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformRecord {
    pub n_elem: usize,
    pub dofs: usize,
    pub eta_sq_sum: f64,
    pub h1_err_sq: f64,
}

/// Best `beta` of the log-grid search and the worst ratio
/// `(E_{k+1} + beta eta_{k+1}^2) / (E_k + beta eta_k^2)` it gives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contraction {
    pub beta: f64,
    pub mu: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub run: AdaptiveRun,
    pub uniform: Vec<UniformRecord>,
    pub reference_divisions: usize,
    pub reference_h1: f64,
    pub reference_energy: f64,
    pub estimator_fit: Result<RateFit, String>,
    pub error_fit: Result<RateFit, String>,
    pub uniform_fit: Result<RateFit, String>,
    pub contraction: Option<Contraction>,
    pub effectivity_spread: Option<f64>,
    pub closure_max: f64,
    /// `(dofs, relative H1 error)` of the iterate nearest the snapshot dofs.
    pub snapshot: Option<(usize, f64)>,
    /// `max_k ||u_k||_{H^1} / ||g||_{L^2(Gamma_A)}`.
    pub stability_max: f64,
    pub newton_energy_increase: f64,
}

/// Adaptive loop recording `||u_ref - u_k||^2_{H^1}` at every iterate.
pub fn adaptive_with_reference(
    spec: &ProblemSpec,
    reference: &ReferenceSolution,
    initial: Mesh,
    config: AdaptiveConfig,
) -> Result<AdaptiveRun> {
    adaptive_loop_with(spec, initial, config, &mut |s| Ok(Some(reference.h1_error_sq(s.mesh, s.solution)?)))
}

/// Newton solves on `levels` uniformly refined meshes, each warm-started
/// from the previous one.
pub fn uniform_baseline(
    spec: &ProblemSpec,
    reference: &ReferenceSolution,
    initial: Mesh,
    levels: usize,
    eps: f64,
) -> Result<Vec<UniformRecord>> {
    let mut out = Vec::with_capacity(levels);
    let mut mesh = initial;
    let mut guess = FeFunction::zeros(&mesh);
    for level in 0..levels {
        let (u, _) = newton_solve(&mesh, spec, &guess, eps, DEFAULT_MAX_ITER)?;
        out.push(UniformRecord {
            n_elem: mesh.n_triangles(),
            dofs: mesh.n_vertices(),
            eta_sq_sum: compute_indicators(&mesh, spec, &u)?.eta_sq_sum(),
            h1_err_sq: reference.h1_error_sq(&mesh, &u)?,
        });
        if level + 1 < levels {
            let fine = mesh.refine_uniform()?;
            guess = interpolate(&u, &fine)?;
            mesh = fine;
        }
    }
    Ok(out)
}

/// Searches `beta` on 10 points per decade over `[1e-6, 1e2]` for the
/// smallest worst-case ratio of `E_k + beta eta_k^2` from `start` on, with
/// `E_k = J(u_k) - reference_energy`. `None` if fewer than two iterates.
pub fn contraction_search(run: &AdaptiveRun, reference_energy: f64, start: usize) -> Option<Contraction> {
    let tail: Vec<(f64, f64)> = run
        .records
        .iter()
        .filter(|r| r.k >= start)
        .map(|r| (r.energy - reference_energy, r.eta_sq_sum))
        .collect();
    if tail.len() < 2 {
        return None;
    }
    let mut best: Option<Contraction> = None;
    for i in 0..=80 {
        let beta = 10f64.powf(-6.0 + i as f64 / 10.0);
        let mut mu = f64::NEG_INFINITY;
        for w in tail.windows(2) {
            let before = w[0].0 + beta * w[0].1;
            let after = w[1].0 + beta * w[1].1;
            mu = mu.max(if before > 0.0 { after / before } else { f64::INFINITY });
        }
        if best.is_none_or(|b| mu < b.mu) {
            best = Some(Contraction { beta, mu });
        }
    }
    best
}

/// `max / min` of `||u_ref - u_k||^2 / eta_k^2` over iterates `k >= start`.
pub fn effectivity_spread(run: &AdaptiveRun, start: usize) -> Option<f64> {
    let ratios: Vec<f64> = run
        .records
        .iter()
        .filter(|r| r.k >= start && r.eta_sq_sum > 0.0)
        .filter_map(|r| r.h1_err_sq.map(|e| e / r.eta_sq_sum))
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    Some(max / min)
}

/// Relative error of the iterate whose dofs are nearest `target`.
pub fn snapshot_error(run: &AdaptiveRun, reference_h1: f64, target: usize) -> Option<(usize, f64)> {
    run.records
        .iter()
        .filter(|r| r.h1_err_sq.is_some())
        .min_by_key(|r| r.dofs.abs_diff(target))
        .map(|r| (r.dofs, r.h1_err_sq.unwrap().sqrt() / reference_h1))
}

/// `||g||_{L^2(Gamma_A)}` with 7-point Gauss per edge of `mesh`.
pub fn flux_norm(mesh: &Mesh, spec: &ProblemSpec) -> Result<f64> {
    let rule = edge_gauss_rule(7)?;
    let mut acc = 0.0;
    for e in mesh.boundary_edges(BoundaryLabel::GammaA) {
        let [a, b] = mesh.edge_points(e);
        let len = a.dist(b);
        acc += len * rule.iter().map(|(t, w)| w * spec.flux.value(a.lerp(b, t)).powi(2)).sum::<f64>();
    }
    Ok(acc.sqrt())
}

fn fit(points: &[(f64, f64)], decades: f64) -> Result<RateFit, String> {
    fit_rate(points, decades).map_err(|e| e.to_string())
}

/// Adaptive run, uniform baseline and all derived statistics.
pub fn run_experiment(spec: &ProblemSpec, reference: &ReferenceSolution, config: ExperimentConfig) -> Result<ExperimentReport> {
    let initial = spec.initial_mesh(config.initial_h)?;
    let g_norm = flux_norm(&initial, spec)?;
    let run = adaptive_with_reference(spec, reference, initial.clone(), config.adaptive)?;
    let uniform = uniform_baseline(spec, reference, initial, config.uniform_levels, config.adaptive.eps_newton)?;

    let est: Vec<(f64, f64)> = run.records.iter().map(|r| (r.dofs as f64, r.eta_sq_sum.sqrt())).collect();
    let err: Vec<(f64, f64)> =
        run.records.iter().filter_map(|r| r.h1_err_sq.map(|e| (r.dofs as f64, e.sqrt()))).collect();
    let uni: Vec<(f64, f64)> = uniform.iter().map(|r| (r.dofs as f64, r.h1_err_sq.sqrt())).collect();

    let stability_max = if g_norm > 0.0 {
        run.records.iter().map(|r| r.solution_h1 / g_norm).fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(ExperimentReport {
        estimator_fit: fit(&est, config.window_decades),
        error_fit: fit(&err, config.window_decades),
        uniform_fit: fit(&uni, config.window_decades),
        contraction: contraction_search(&run, reference.energy, CONTRACTION_START),
        effectivity_spread: effectivity_spread(&run, EFFECTIVITY_START),
        closure_max: run.max_closure_ratio(),
        snapshot: snapshot_dofs(config.example).and_then(|d| snapshot_error(&run, reference.h1_norm, d)),
        stability_max,
        newton_energy_increase: run.records.iter().map(|r| r.newton_energy_increase).fold(0.0, f64::max),
        reference_divisions: reference.divisions,
        reference_h1: reference.h1_norm,
        reference_energy: reference.energy,
        config,
        run,
        uniform,
    })
}

fn fit_line(name: &str, f: &Result<RateFit, String>) -> String {
    match f {
        Ok(f) => format!(
            "{name}_slope = {:.4}\n{name}_window = {}..{} ({} points, rms {:.3e})\n",
            f.slope, f.n_min, f.n_max, f.points, f.residual
        ),
        Err(e) => format!("{name}_slope = n/a ({e})\n"),
    }
}

impl ExperimentReport {
    /// Plain `key = value` summary.
    pub fn summary(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "example = {}", c.example);
        let _ = writeln!(s, "theta = {}", c.adaptive.theta);
        let _ = writeln!(s, "tau = {:e}", c.adaptive.tau);
        let _ = writeln!(s, "eps_newton = {:e}", c.adaptive.eps_newton);
        let _ = writeln!(s, "mode = {}", c.adaptive.mode);
        let _ = writeln!(s, "reference_h = 1/{}", self.reference_divisions);
        let _ = writeln!(s, "iterations = {}", self.run.final_k());
        let _ = writeln!(s, "reached_tolerance = {}", self.run.reached_tolerance());
        if let Some(r) = self.run.records.last() {
            let _ = writeln!(s, "final_dofs = {}", r.dofs);
            let _ = writeln!(s, "final_eta_sq = {:e}", r.eta_sq_sum);
        }
        s.push_str(&fit_line("estimator", &self.estimator_fit));
        s.push_str(&fit_line("h1_error", &self.error_fit));
        s.push_str(&fit_line("uniform_h1_error", &self.uniform_fit));
        if let (Ok(a), Ok(b)) = (&self.estimator_fit, &self.error_fit) {
            let _ = writeln!(s, "slope_gap = {:.4}", (a.slope - b.slope).abs());
        }
        if let (Ok(a), Ok(u)) = (&self.error_fit, &self.uniform_fit) {
            let _ = writeln!(s, "uniform_over_adaptive = {:.4}", u.slope.abs() / a.slope.abs());
        }
        match self.contraction {
            Some(c) => {
                let _ = writeln!(s, "contraction_beta = {:e}\ncontraction_mu = {:.6}", c.beta, c.mu);
            }
            None => s.push_str("contraction_beta = n/a\n"),
        }
        if let Some(e) = self.effectivity_spread {
            let _ = writeln!(s, "effectivity_spread = {e:.4}");
        }
        let _ = writeln!(s, "closure_max = {:.4}", self.closure_max);
        if let Some((d, e)) = self.snapshot {
            let _ = writeln!(s, "snapshot_dofs = {d}\nsnapshot_relative_h1_error = {:.4}", e);
        }
        let _ = writeln!(s, "stability_max = {:.6}", self.stability_max);
        let _ = writeln!(s, "newton_energy_increase = {:e}", self.newton_energy_increase);
        s
    }

    pub fn write_uniform_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n_elem,dofs,eta_sq_sum,h1_err_sq")?;
        for r in &self.uniform {
            writeln!(out, "{},{},{:e},{:e}", r.n_elem, r.dofs, r.eta_sq_sum, r.h1_err_sq)?;
        }
        Ok(())
    }

    pub fn convergence_svg(&self) -> String {
        let est: Vec<(f64, f64)> = self.run.records.iter().map(|r| (r.dofs as f64, r.eta_sq_sum.sqrt())).collect();
        let err: Vec<(f64, f64)> =
            self.run.records.iter().filter_map(|r| r.h1_err_sq.map(|e| (r.dofs as f64, e.sqrt()))).collect();
        let uni: Vec<(f64, f64)> = self.uniform.iter().map(|r| (r.dofs as f64, r.h1_err_sq.sqrt())).collect();
        let title = format!("Example {}, theta = {}", self.config.example, self.config.adaptive.theta);
        loglog_svg(
            &title,
            "degrees of freedom",
            &[
                Series { label: "estimator".into(), points: &est, color: "#1f77b4", fit: self.estimator_fit.clone().ok() },
                Series { label: "H1 error".into(), points: &err, color: "#d62728", fit: self.error_fit.clone().ok() },
                Series { label: "uniform H1 error".into(), points: &uni, color: "#2ca02c", fit: self.uniform_fit.clone().ok() },
            ],
        )
    }

    /// Writes `run.csv`, `uniform.csv`, `rates.txt`, `convergence.svg` and,
    /// if enabled, `final_mesh.vtk` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.run.write_csv(BufWriter::new(File::create(dir.join("run.csv"))?))?;
        self.write_uniform_csv(BufWriter::new(File::create(dir.join("uniform.csv"))?))?;
        std::fs::write(dir.join("rates.txt"), self.summary())?;
        std::fs::write(dir.join("convergence.svg"), self.convergence_svg())?;
        if self.config.write_vtk {
            if let (Some(mesh), Some(u)) = (&self.run.final_mesh, &self.run.final_solution) {
                write_vtk(mesh, &[("u", &u.coeffs)], &[], BufWriter::new(File::create(dir.join("final_mesh.vtk"))?))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::IterationRecord;

    fn record(k: usize, dofs: usize, energy: f64, eta: f64, err: f64) -> IterationRecord {
        IterationRecord {
            k,
            n_elem: 2 * dofs,
            dofs,
            eta_sq_sum: eta,
            osc_sq_sum: 0.0,
            n_marked: 1,
            newton_iters: 1,
            h1_err_sq: Some(err),
            energy,
            solution_h1: 1.0,
            newton_energy_increase: 0.0,
        }
    }

    fn run(records: Vec<IterationRecord>) -> AdaptiveRun {
        AdaptiveRun { config: AdaptiveConfig::default(), records, final_mesh: None, final_solution: None }
    }

    #[test]
    fn contraction_of_geometric_sequence() {
        let r = run((0..10).map(|k| record(k, 100 * (k + 1), 0.5f64.powi(k as i32), 0.5f64.powi(k as i32), 1.0)).collect());
        let c = contraction_search(&r, 0.0, 2).unwrap();
        assert!((c.mu - 0.5).abs() < 1e-12);
    }

    #[test]
    fn growing_sequence_does_not_contract() {
        let r = run((0..5).map(|k| record(k, 10 * (k + 1), k as f64, k as f64, 1.0)).collect());
        assert!(contraction_search(&r, 0.0, 2).unwrap().mu > 1.0);
    }

    #[test]
    fn effectivity_and_snapshot() {
        let r = run((0..8).map(|k| record(k, 1000 * (k + 1), 0.0, 1.0, if k == 6 { 4.0 } else { 2.0 })).collect());
        assert_eq!(effectivity_spread(&r, 5), Some(2.0));
        let (d, e) = snapshot_error(&r, 4.0, 3100).unwrap();
        assert_eq!(d, 3000);
        assert!((e - 2f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn flux_norm_of_constant() {
        let spec = ProblemSpec { flux: crate::problem::FluxData::Constant(2.0), ..ProblemSpec::example(1).unwrap() };
        let mesh = spec.initial_mesh(0.5).unwrap();
        // anode length 6
        assert!((flux_norm(&mesh, &spec).unwrap() - (24.0f64).sqrt()).abs() < 1e-12);
    }
}
