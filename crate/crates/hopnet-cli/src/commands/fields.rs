//! Stationary local-field histograms at zero temperature.
//!
//! Emits `fields.csv` with rows (bin_center, density, t), one histogram per
//! reinforcement time, and `fields-summary.json` with the width statistics
//! behind each histogram. Runs relax random starts and keep only those that
//! settle onto a memory, so the kept-run counts matter and are reported.

use anyhow::{bail, Result};
use clap::Args;
use hopnet::glauber::{field_statistics, McConfig, UpdateMode};
use serde_json::json;

use super::{cell, execute, insert, write_csv, Ctx};
use crate::config::{parse_grid, resolve};

#[derive(Args)]
pub struct FieldsArgs {
    /// Reinforcement times, one histogram each.
    #[arg(long)]
    t_list: Option<String>,
    /// Network size.
    #[arg(long)]
    n: Option<usize>,
    /// Stored pattern count.
    #[arg(long)]
    p: Option<usize>,
    /// Random starts per reinforcement time.
    #[arg(long)]
    realizations: Option<usize>,
    /// Relaxation dynamics: parallel or sequential. Sequential starts almost
    /// never reach a memory from random initial states at low reinforcement.
    #[arg(long)]
    mode: Option<String>,
}

pub fn run(ctx: &Ctx, args: &FieldsArgs) -> Result<()> {
    let t_raw = resolve(args.t_list.clone(), &ctx.file, "t-list", "0,1,2".to_string())?;
    let n = resolve(args.n, &ctx.file, "n", 1000)?;
    let p = resolve(args.p, &ctx.file, "p", 50)?;
    let realizations = resolve(args.realizations, &ctx.file, "realizations", 60)?;
    let mode_raw = resolve(args.mode.clone(), &ctx.file, "mode", "parallel".to_string())?;
    let update_mode = match mode_raw.as_str() {
        "parallel" => UpdateMode::Parallel,
        "sequential" => UpdateMode::Sequential,
        other => bail!("mode must be parallel or sequential, got {other:?}"),
    };
    let ts = parse_grid(&t_raw)?;

    let mut params = ctx.base_params();
    insert(&mut params, "t-list", &t_raw);
    insert(&mut params, "n", n);
    insert(&mut params, "p", p);
    insert(&mut params, "realizations", realizations);
    insert(&mut params, "mode", &mode_raw);

    execute(ctx, "fields", params, |w| {
        let cfg = McConfig {
            zero_t: true,
            realizations,
            seed: ctx.seed,
            update_mode,
            ..McConfig::default()
        };
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for &t in &ts {
            let stats = field_statistics(n, p, t, &cfg)?;
            for (center, density) in stats.bin_centers.iter().zip(&stats.densities) {
                rows.push(vec![cell(*center), cell(*density), cell(t)]);
            }
            summary.push(json!({
                "t": t,
                "mean": stats.mean,
                "std": stats.std,
                "samples": stats.samples,
                "discarded_runs": stats.discarded_runs,
                "total_runs": stats.total_runs,
            }));
        }
        write_csv(&w.path("fields.csv"), &["bin_center", "density", "t"], &rows)?;
        std::fs::write(
            w.path("fields-summary.json"),
            serde_json::to_string_pretty(&json!(summary))? + "\n",
        )?;
        Ok(vec!["fields.csv".into(), "fields-summary.json".into()])
    })
}
