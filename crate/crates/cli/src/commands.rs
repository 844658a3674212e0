use rayon::prelude::*;

use oqwalk::equilibrium::EnsemblePoint;
use oqwalk::linear::steady_state;
use oqwalk::thermalization::{
    dqc_step_estimates, error_metrics, simulate_trajectory, TrajectoryOptions,
};
use oqwalk::{
    ApproxEntropyModel, ApproxEntropyParams, Distribution, LinearWalkSpec, ThermalizationWindow,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{Cell, Table};

/// What a command produces before it is written out.
pub struct Report {
    pub main: Table,
    /// Per-step distributions, written next to the main output.
    pub distributions: Option<Table>,
    /// Remarks for stderr.
    pub notes: Vec<String>,
}

struct CellOutput {
    main: Table,
    distributions: Option<Table>,
    note: Option<String>,
}

impl From<Table> for CellOutput {
    fn from(main: Table) -> Self {
        Self {
            main,
            distributions: None,
            note: None,
        }
    }
}

/// Evaluate `cell` for every omega on a pool of `cfg.jobs` threads and merge
/// the results in omega order. With `label`, sweeps gain a leading `omega`
/// column.
fn sweep<F>(cfg: &RunConfig, columns: Vec<&'static str>, label: bool, cell: F) -> Result<Report>
where
    F: Fn(f64) -> Result<CellOutput> + Sync,
{
    let run = || cfg.omegas.par_iter().map(|&w| cell(w)).collect::<Vec<_>>();
    let results = match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Validation(format!("cannot start {jobs} workers: {e}")))?
            .install(run),
        None => run(),
    };
    let outputs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let tag = label && cfg.sweep();
    let mut main_parts = Vec::new();
    let mut dist_parts = Vec::new();
    let mut notes = Vec::new();
    for (out, &w) in outputs.into_iter().zip(&cfg.omegas) {
        let wrap = |t: Table| {
            if tag {
                t.with_leading("omega", Cell::from(w))
            } else {
                t
            }
        };
        main_parts.push(wrap(out.main));
        if let Some(d) = out.distributions {
            dist_parts.push(wrap(d));
        }
        notes.extend(out.note);
    }
    let main_cols = if tag {
        std::iter::once("omega").chain(columns).collect()
    } else {
        columns
    };
    let distributions = if dist_parts.is_empty() {
        None
    } else {
        let cols = dist_parts[0].columns().to_vec();
        Some(Table::concat(cols, dist_parts))
    };
    Ok(Report {
        main: Table::concat(main_cols, main_parts),
        distributions,
        notes,
    })
}

fn spec(cfg: &RunConfig, omega: f64) -> Result<LinearWalkSpec> {
    Ok(LinearWalkSpec::new(cfg.n_nodes, omega, cfg.epsilon)?)
}

pub fn steady_state_cmd(cfg: &RunConfig) -> Result<Report> {
    let cols = vec!["m", "pi"];
    sweep(cfg, cols.clone(), true, |w| {
        let pi = steady_state(&spec(cfg, w)?)?;
        let mut t = Table::new(cols.clone());
        for (m, &p) in pi.probs().iter().enumerate() {
            t.push(vec![m.into(), p.into()]);
        }
        Ok(t.into())
    })
}

pub fn equilibrium_cmd(cfg: &RunConfig) -> Result<Report> {
    let cols = vec!["omega", "beta", "T", "Z", "E", "varE", "S", "F", "Cv"];
    sweep(cfg, cols.clone(), false, |w| {
        let p = EnsemblePoint::from_omega(cfg.n_nodes, w, cfg.epsilon)?;
        let th = p.thermo();
        let mut t = Table::new(cols.clone());
        t.push(vec![
            w.into(),
            p.beta().into(),
            p.temperature().into(),
            th.z.into(),
            th.mean_energy.into(),
            th.energy_variance.into(),
            th.entropy.into(),
            th.free_energy.into(),
            th.heat_capacity.into(),
        ]);
        Ok(t.into())
    })
}

pub fn trajectory_cmd(cfg: &RunConfig) -> Result<Report> {
    let cols = vec!["n", "S", "E", "T_est", "S_gen"];
    sweep(cfg, cols.clone(), true, |w| {
        let spec = spec(cfg, w)?;
        let p0 = Distribution::localized(cfg.n_nodes, 0)?;
        let opts = TrajectoryOptions {
            keep_distributions: cfg.dump_distributions,
            ..Default::default()
        };
        let r = simulate_trajectory(&spec, &p0, cfg.steps, opts)?;
        let mut t = Table::new(cols.clone());
        for n in 0..=r.steps() {
            t.push(vec![
                n.into(),
                r.entropy()[n].into(),
                r.energy()[n].into(),
                r.temperature_estimate()[n].into(),
                r.entropy_production()[n].into(),
            ]);
        }
        let distributions = r.distributions().map(|ds| {
            let mut d = Table::new(vec!["n", "m", "p"]);
            for (n, dist) in ds.iter().enumerate() {
                for (m, &p) in dist.probs().iter().enumerate() {
                    d.push(vec![n.into(), m.into(), p.into()]);
                }
            }
            d
        });
        let note = r
            .equilibrium_temperature()
            .is_divergent()
            .then(|| format!("omega = {w}: T_eq diverges, so S_gen = S (no heat term)"));
        Ok(CellOutput {
            main: t,
            distributions,
            note,
        })
    })
}

pub fn window_cmd(cfg: &RunConfig) -> Result<Report> {
    let cols = vec!["N", "omega", "t_start", "t_end", "t_therm"];
    sweep(cfg, cols.clone(), false, |w| {
        let win = ThermalizationWindow::new(cfg.n_nodes, w)?;
        let mut t = Table::new(cols.clone());
        t.push(vec![
            cfg.n_nodes.into(),
            w.into(),
            win.t_start.into(),
            win.t_end.into(),
            win.t_therm.into(),
        ]);
        Ok(t.into())
    })
}

fn model(cfg: &RunConfig, spec: &LinearWalkSpec) -> Result<ApproxEntropyModel> {
    let params = ApproxEntropyParams::with_cutoff(spec, cfg.cutoff_sigmas)?;
    Ok(ApproxEntropyModel::with_params(spec, params)?)
}

pub fn approx_entropy_cmd(cfg: &RunConfig) -> Result<Report> {
    let cols = vec!["t", "S_a", "S_G", "S_B", "w", "S_exact"];
    sweep(cfg, cols.clone(), true, |w| {
        let spec = spec(cfg, w)?;
        let model = model(cfg, &spec)?;
        let p0 = Distribution::localized(cfg.n_nodes, 0)?;
        let r = simulate_trajectory(&spec, &p0, cfg.steps, TrajectoryOptions::default())?;
        let mut t = Table::new(cols.clone());
        for step in 1..=cfg.steps {
            let time = step as f64;
            let s_g = model.gaussian_entropy(time)?;
            let s_b = model.boltzmann_entropy(time)?;
            t.push(vec![
                step.into(),
                (s_g + s_b).into(),
                s_g.into(),
                s_b.into(),
                model.tail_weight(time).into(),
                r.entropy()[step].into(),
            ]);
        }
        Ok(t.into())
    })
}

/// Error metrics of the approximate entropy over the thermalization window.
/// The trajectory runs exactly to the end of the window; `--steps` is not
/// used.
pub fn table_cmd(cfg: &RunConfig) -> Result<Report> {
    let cols = vec!["metric", "value"];
    sweep(cfg, cols.clone(), true, |w| {
        let spec = spec(cfg, w)?;
        let model = model(cfg, &spec)?;
        let win = ThermalizationWindow::new(cfg.n_nodes, w)?;
        let steps = win.t_end.floor() as usize;
        let p0 = Distribution::localized(cfg.n_nodes, 0)?;
        let r = simulate_trajectory(&spec, &p0, steps, TrajectoryOptions::default())?;
        let m = error_metrics(&r, &model)?;
        let mut t = Table::new(cols.clone());
        let rows: [(&str, Cell); 10] = [
            ("delta_max", m.delta_max.into()),
            ("delta_rel_max", m.delta_rel_max.into()),
            ("mean_rel", m.mean_rel.into()),
            ("delta_logN_max", m.delta_log_n_max.into()),
            ("mean_logN", m.mean_log_n.into()),
            ("t_start", win.t_start.into()),
            ("t_end", win.t_end.into()),
            ("N", cfg.n_nodes.into()),
            ("omega", w.into()),
            ("cutoff_sigmas", cfg.cutoff_sigmas.into()),
        ];
        for (name, value) in rows {
            t.push(vec![Cell::Text(name), value]);
        }
        Ok(t.into())
    })
}

pub fn dqc_cmd(cfg: &RunConfig) -> Result<Report> {
    let cols = vec![
        "N",
        "omega",
        "n_start",
        "n_steps",
        "n_end",
        "E_eq",
        "dE_domega",
    ];
    sweep(cfg, cols.clone(), false, |w| {
        let d = dqc_step_estimates(cfg.n_nodes, w)?;
        let p = EnsemblePoint::from_omega(cfg.n_nodes, w, cfg.epsilon)?;
        let mut t = Table::new(cols.clone());
        t.push(vec![
            cfg.n_nodes.into(),
            w.into(),
            d.n_start.into(),
            d.n_steps.into(),
            d.n_end.into(),
            p.mean_energy().into(),
            p.energy_cost_domega().into(),
        ]);
        Ok(t.into())
    })
}
