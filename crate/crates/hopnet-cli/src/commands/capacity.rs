//! Critical storage capacity across reinforcement times.
//!
//! Emits `capacity.csv` with one `(t, alpha_c)` row per solved grid point and
//! `capacity-fit.json` holding the saturating-growth fit parameter plus a
//! per-point status list. Solver failures are recorded there and the run
//! continues with the remaining points.

use anyhow::Result;
use clap::Args;
use hopnet::meanfield::{capacity_sigmoid_fit, critical_capacity, SolverConfig};
use rayon::prelude::*;
use serde_json::json;

use super::{cell, execute, insert, write_csv, Ctx};
use crate::config::{parse_grid, resolve};

const DEFAULT_T_GRID: &str = "0,0.1,0.5,1,3,5,10,29,100,1000";

#[derive(Args)]
pub struct CapacityArgs {
    /// Reinforcement times; comma list or start:stop:count.
    #[arg(long)]
    t_grid: Option<String>,
}

pub fn run(ctx: &Ctx, args: &CapacityArgs) -> Result<()> {
    let grid_raw = resolve(
        args.t_grid.clone(),
        &ctx.file,
        "t-grid",
        DEFAULT_T_GRID.to_string(),
    )?;
    let grid = parse_grid(&grid_raw)?;
    let mut params = ctx.base_params();
    insert(&mut params, "t-grid", &grid_raw);

    execute(ctx, "capacity", params, |w| {
        let cfg = SolverConfig::default();
        let results: Vec<(f64, hopnet::Result<f64>)> = grid
            .par_iter()
            .map(|&t| (t, critical_capacity(t, &cfg)))
            .collect();

        let mut rows = Vec::new();
        let mut points = Vec::new();
        let mut fit_input = Vec::new();
        for (t, outcome) in &results {
            match outcome {
                Ok(alpha_c) => {
                    rows.push(vec![cell(*t), cell(*alpha_c)]);
                    fit_input.push((*t, *alpha_c));
                    points.push(json!({"t": t, "alpha_c": alpha_c, "status": "ok"}));
                }
                Err(e) => {
                    points.push(json!({"t": t, "status": "error", "error": e.to_string()}));
                }
            }
        }
        write_csv(&w.path("capacity.csv"), &["t", "alpha_c"], &rows)?;

        let fit = match capacity_sigmoid_fit(&fit_input) {
            Ok(a) => json!({"fit_a": a, "points": points}),
            Err(e) => json!({"fit_a": null, "fit_error": e.to_string(), "points": points}),
        };
        std::fs::write(
            w.path("capacity-fit.json"),
            serde_json::to_string_pretty(&fit)? + "\n",
        )?;
        Ok(vec!["capacity.csv".into(), "capacity-fit.json".into()])
    })
}
