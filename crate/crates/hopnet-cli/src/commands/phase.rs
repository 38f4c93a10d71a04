//! Retrieval phase boundaries over the load-temperature plane.
//!
//! Emits `phase.csv` with one row per (t, alpha) point: the temperature where
//! retrieval states appear, optionally the lower temperature where they become
//! the global free-energy minimum, and a branch diagnostic. Points beyond
//! capacity get an empty boundary cell rather than aborting the sweep.

use anyhow::Result;
use clap::Args;
use hopnet::meanfield::{tc_line, tr_line, SolverConfig};

use super::{cell, execute, insert, opt_cell, resolve_flag, write_csv, Ctx};
use crate::config::{parse_grid, resolve};

#[derive(Args)]
pub struct PhaseArgs {
    /// Reinforcement times, one boundary curve each.
    #[arg(long)]
    t_list: Option<String>,
    /// Load grid; comma list or start:stop:count.
    #[arg(long)]
    alpha_grid: Option<String>,
    /// Also trace where the memories stop being the global minimum.
    #[arg(long)]
    global_boundary: bool,
}

pub fn run(ctx: &Ctx, args: &PhaseArgs) -> Result<()> {
    let t_raw = resolve(
        args.t_list.clone(),
        &ctx.file,
        "t-list",
        "0,0.1,1,1000".to_string(),
    )?;
    let alpha_raw = resolve(
        args.alpha_grid.clone(),
        &ctx.file,
        "alpha-grid",
        "0.01:0.12:12".to_string(),
    )?;
    let global_boundary = resolve_flag(args.global_boundary, &ctx.file, "global-boundary")?;
    let ts = parse_grid(&t_raw)?;
    let alphas = parse_grid(&alpha_raw)?;

    let mut params = ctx.base_params();
    insert(&mut params, "t-list", &t_raw);
    insert(&mut params, "alpha-grid", &alpha_raw);
    insert(&mut params, "global-boundary", global_boundary);

    execute(ctx, "phase-diagram", params, |w| {
        let cfg = SolverConfig::default();
        let mut rows = Vec::new();
        for &t in &ts {
            let tcs = tc_line(t, &alphas, &cfg)?;
            let trs = if global_boundary {
                tr_line(t, &alphas, &cfg)?
            } else {
                alphas.iter().map(|&a| (a, None)).collect()
            };
            for ((alpha, tc), (_, tr)) in tcs.into_iter().zip(trs) {
                let diagnostic = if tc.is_some() { "retrieval" } else { "none" };
                rows.push(vec![
                    cell(t),
                    cell(alpha),
                    opt_cell(tc),
                    opt_cell(tr),
                    diagnostic.to_string(),
                ]);
            }
        }
        write_csv(
            &w.path("phase.csv"),
            &["t", "alpha", "T_c", "T_R", "diagnostic"],
            &rows,
        )?;
        Ok(vec!["phase.csv".into()])
    })
}
