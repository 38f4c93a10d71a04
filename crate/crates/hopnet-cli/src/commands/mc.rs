//! Finite-temperature retrieval curves from heat-bath simulation.
//!
//! Emits one `mc_n{N}.csv` per network size with rows (T, t, alpha, m1,
//! stderr), plus `mc-diagnostics.json` recording per-combination status.
//! A failed (N, alpha, t) combination is recorded and the sweep continues.

use anyhow::Result;
use clap::Args;
use hopnet::glauber::{retrieval_curve, McConfig};
use hopnet::rng::{derive_seed, Purpose};
use serde_json::json;

use super::{cell, execute, insert, write_csv, Ctx};
use crate::config::{parse_grid, parse_usize_list, resolve};

#[derive(Args)]
pub struct McArgs {
    /// Network sizes; a list sweeps finite-size effects at fixed load.
    #[arg(long)]
    n_list: Option<String>,
    /// Loads alpha = P/N; pattern counts are rounded to integers.
    #[arg(long)]
    alpha_list: Option<String>,
    /// Reinforcement times.
    #[arg(long)]
    t_list: Option<String>,
    /// Temperature grid; comma list or start:stop:count.
    #[arg(long)]
    temp_grid: Option<String>,
    /// Independent pattern realizations per point.
    #[arg(long)]
    realizations: Option<usize>,
    /// Sweeps discarded before measuring.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Sweeps averaged per measurement.
    #[arg(long)]
    measure: Option<usize>,
}

pub fn run(ctx: &Ctx, args: &McArgs) -> Result<()> {
    let n_raw = resolve(args.n_list.clone(), &ctx.file, "n-list", "1000".to_string())?;
    let alpha_raw = resolve(
        args.alpha_list.clone(),
        &ctx.file,
        "alpha-list",
        "0.08".to_string(),
    )?;
    let t_raw = resolve(args.t_list.clone(), &ctx.file, "t-list", "0".to_string())?;
    let temp_raw = resolve(
        args.temp_grid.clone(),
        &ctx.file,
        "temp-grid",
        "0.2:1.0:9".to_string(),
    )?;
    let realizations = resolve(args.realizations, &ctx.file, "realizations", 20)?;
    let burn_in = resolve(args.burn_in, &ctx.file, "burn-in", 1000)?;
    let measure = resolve(args.measure, &ctx.file, "measure", 1000)?;

    let ns = parse_usize_list(&n_raw)?;
    let alphas = parse_grid(&alpha_raw)?;
    let ts = parse_grid(&t_raw)?;
    let temps = parse_grid(&temp_raw)?;

    let mut params = ctx.base_params();
    insert(&mut params, "n-list", &n_raw);
    insert(&mut params, "alpha-list", &alpha_raw);
    insert(&mut params, "t-list", &t_raw);
    insert(&mut params, "temp-grid", &temp_raw);
    insert(&mut params, "realizations", realizations);
    insert(&mut params, "burn-in", burn_in);
    insert(&mut params, "measure", measure);

    execute(ctx, "mc", params, |w| {
        let mut files = Vec::new();
        let mut status = Vec::new();
        let mut combo = 0u64;
        let mut undefined_stderr = false;
        for &n in &ns {
            let mut rows = Vec::new();
            for &alpha in &alphas {
                let p = ((alpha * n as f64).round() as usize).max(1);
                for &t in &ts {
                    let cfg = McConfig {
                        burn_in_sweeps: burn_in,
                        measure_sweeps: measure,
                        realizations,
                        seed: derive_seed(ctx.seed, Purpose::Aux, combo),
                        ..McConfig::default()
                    };
                    combo += 1;
                    match retrieval_curve(n, p, t, &temps, &cfg) {
                        Ok(records) => {
                            for r in &records {
                                undefined_stderr |= !r.std_error.is_finite();
                                rows.push(vec![
                                    cell(r.temperature),
                                    cell(r.t),
                                    cell(r.alpha),
                                    cell(r.value),
                                    cell(r.std_error),
                                ]);
                            }
                            status.push(json!({
                                "n": n, "alpha": alpha, "t": t, "status": "ok"
                            }));
                        }
                        Err(e) => status.push(json!({
                            "n": n, "alpha": alpha, "t": t,
                            "status": "error", "error": e.to_string()
                        })),
                    }
                }
            }
            let name = format!("mc_n{n}.csv");
            write_csv(
                &w.path(&name),
                &["T", "t", "alpha", "m1", "stderr"],
                &rows,
            )?;
            files.push(name);
        }
        if undefined_stderr {
            eprintln!(
                "warning: standard errors are undefined from a single realization; \
                 increase --realizations for error bars"
            );
        }
        std::fs::write(
            w.path("mc-diagnostics.json"),
            serde_json::to_string_pretty(&json!(status))? + "\n",
        )?;
        files.push("mc-diagnostics.json".into());
        Ok(files)
    })
}
