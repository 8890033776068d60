//! Bulk marking and the SOLVE, ESTIMATE, MARK, REFINE loop.

use std::io::{BufRead, Write};

use crate::assembly::{h1_norm_sq, FeFunction};
use crate::estimator::{compute_indicators, IndicatorField};
use crate::mesh::{Mesh, RefineMode};
use crate::problem::ProblemSpec;
use crate::solver::{interpolate, newton_solve, ADAPTIVE_EPS, DEFAULT_MAX_ITER};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "k,n_elem,dofs,eta_sq_sum,osc_sq_sum,n_marked,newton_iters,h1_err_sq,energy";

/// Smallest set `M` with `sum_M values >= theta sum values`, as ascending
/// ids. Candidates are taken in descending order of value, ties by
/// ascending id.
pub fn doerfler_mark(values: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("marking parameter must lie in (0, 1], got {theta}")));
    }
    if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("indicator {i} is negative or not finite")));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let total: f64 = order.iter().map(|&i| values[i]).sum();
    if total == 0.0 {
        return Ok(Vec::new());
    }
    let threshold = theta * total;
    let mut acc = 0.0;
    let mut count = order.len();
    for (n, &i) in order.iter().enumerate() {
        acc += values[i];
        if acc >= threshold {
            count = n + 1;
            break;
        }
    }
    let mut marked = order[..count].to_vec();
    marked.sort_unstable();
    Ok(marked)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveConfig {
    pub theta: f64,
    pub tau: f64,
    pub eps_newton: f64,
    pub mode: RefineMode,
    pub max_k: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig { theta: 0.1, tau: 1e-3, eps_newton: ADAPTIVE_EPS, mode: RefineMode::AllEdges, max_k: 200 }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidParameter(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if !(self.tau > 0.0) || !(self.eps_newton > 0.0) {
            return Err(Error::InvalidParameter("tau and the Newton tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub n_elem: usize,
    pub dofs: usize,
    pub eta_sq_sum: f64,
    pub osc_sq_sum: f64,
    pub n_marked: usize,
    pub newton_iters: usize,
    pub h1_err_sq: Option<f64>,
    pub energy: f64,
    /// `||u_k||_{H^1}`.
    pub solution_h1: f64,
    /// Largest energy increase over Newton steps after the first.
    pub newton_energy_increase: f64,
}

#[derive(Clone, Debug)]
pub struct AdaptiveRun {
    pub config: AdaptiveConfig,
    pub records: Vec<IterationRecord>,
    pub final_mesh: Option<Mesh>,
    pub final_solution: Option<FeFunction>,
}

/// State handed to the observer after each ESTIMATE step.
pub struct Snapshot<'a> {
    pub k: usize,
    pub mesh: &'a Mesh,
    pub solution: &'a FeFunction,
    pub indicators: &'a IndicatorField,
}

impl AdaptiveRun {
    /// Whether the last record meets the stopping tolerance.
    pub fn reached_tolerance(&self) -> bool {
        self.records.last().is_some_and(|r| r.eta_sq_sum <= self.config.tau)
    }

    pub fn final_k(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    /// `(#T_k - #T_0) / sum_{j<k} #M_j`, maximised over `k`.
    pub fn max_closure_ratio(&self) -> f64 {
        let Some(first) = self.records.first() else { return 0.0 };
        let mut marked = 0usize;
        let mut worst: f64 = 0.0;
        for r in &self.records {
            if marked > 0 {
                worst = worst.max((r.n_elem - first.n_elem) as f64 / marked as f64);
            }
            marked += r.n_marked;
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            let err = r.h1_err_sq.map(|e| format!("{e:e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{:e},{:e},{},{},{},{:e}",
                r.k, r.n_elem, r.dofs, r.eta_sq_sum, r.osc_sq_sum, r.n_marked, r.newton_iters, err, r.energy
            )?;
        }
        Ok(())
    }
}

/// Parses the CSV columns written by [`AdaptiveRun::write_csv`] (extra
/// columns are ignored; missing errors become `None`).
pub fn read_run_csv<R: BufRead>(input: R) -> Result<Vec<IterationRecord>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.ok_or_else(|| Error::Parse("empty run CSV".into()))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let col = |name: &str| {
        cols.iter().position(|c| *c == name).ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    };
    let idx: Vec<usize> = CSV_HEADER.split(',').map(col).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", n + 1));
        let get = |i: usize, what: &str| fields.get(idx[i]).copied().ok_or_else(|| bad(what));
        let int = |i: usize, what: &str| get(i, what)?.parse::<usize>().map_err(|_| bad(what));
        let float = |i: usize, what: &str| get(i, what)?.parse::<f64>().map_err(|_| bad(what));
        let err = get(7, "h1_err_sq")?;
        out.push(IterationRecord {
            k: int(0, "k")?,
            n_elem: int(1, "n_elem")?,
            dofs: int(2, "dofs")?,
            eta_sq_sum: float(3, "eta_sq_sum")?,
            osc_sq_sum: float(4, "osc_sq_sum")?,
            n_marked: int(5, "n_marked")?,
            newton_iters: int(6, "newton_iters")?,
            h1_err_sq: if err.is_empty() { None } else { Some(err.parse().map_err(|_| bad("h1_err_sq"))?) },
            energy: float(8, "energy")?,
            solution_h1: f64::NAN,
            newton_energy_increase: f64::NAN,
        });
    }
    Ok(out)
}

pub fn adaptive_loop(spec: &ProblemSpec, initial: Mesh, config: AdaptiveConfig) -> Result<AdaptiveRun> {
    adaptive_loop_with(spec, initial, config, &mut |_| Ok(None))
}

/// Runs the adaptive loop; `observer` may return `||u_ref - u_k||^2_{H^1}`
/// for each iterate. A Newton failure aborts with the partial run.
pub fn adaptive_loop_with(
    spec: &ProblemSpec,
    initial: Mesh,
    config: AdaptiveConfig,
    observer: &mut dyn FnMut(&Snapshot) -> Result<Option<f64>>,
) -> Result<AdaptiveRun> {
    config.validate()?;
    let mut run = AdaptiveRun { config, records: Vec::new(), final_mesh: None, final_solution: None };
    let mut mesh = initial;
    let mut guess = FeFunction::zeros(&mesh);
    for k in 0..=config.max_k {
        let (u, report) = match newton_solve(&mesh, spec, &guess, config.eps_newton, DEFAULT_MAX_ITER) {
            Ok(v) => v,
            Err(e) => return Err(Error::AdaptiveAborted { source: Box::new(e), partial: Box::new(run) }),
        };
        let field = compute_indicators(&mesh, spec, &u)?;
        let eta_sq_sum = field.eta_sq_sum();
        let h1_err_sq = observer(&Snapshot { k, mesh: &mesh, solution: &u, indicators: &field })?;
        let done = eta_sq_sum <= config.tau || k == config.max_k;
        let marked = if done { Vec::new() } else { doerfler_mark(&field.eta_sq, config.theta)? };
        run.records.push(IterationRecord {
            k,
            n_elem: mesh.n_triangles(),
            dofs: mesh.n_vertices(),
            eta_sq_sum,
            osc_sq_sum: field.osc_sq_sum(),
            n_marked: marked.len(),
            newton_iters: report.iterations,
            h1_err_sq,
            energy: *report.energies.last().expect("at least the initial energy"),
            solution_h1: h1_norm_sq(&mesh, &u.coeffs).sqrt(),
            newton_energy_increase: report.worst_energy_increase(),
        });
        if done {
            run.final_mesh = Some(mesh);
            run.final_solution = Some(u);
            break;
        }
        let next = mesh.refine(&marked, config.mode)?;
        guess = interpolate(&u, &next)?;
        mesh = next;
    }
    Ok(run)
}
