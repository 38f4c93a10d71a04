//! Attraction-basin width under initial corruption.
//!
//! Emits `basins.csv` with rows (p_flip, t, freq, stderr): the frequency with
//! which a state corrupted by flipping each spin with probability p_flip
//! relaxes back onto the seeded memory. The same master seed drives every
//! reinforcement time, so curves are paired over identical pattern draws.

use anyhow::Result;
use clap::Args;
use hopnet::glauber::{basin_experiment, McConfig};

use super::{cell, execute, insert, write_csv, Ctx};
use crate::config::{parse_grid, resolve};

#[derive(Args)]
pub struct BasinsArgs {
    /// Reinforcement times, one basin curve each.
    #[arg(long)]
    t_list: Option<String>,
    /// Network size.
    #[arg(long)]
    n: Option<usize>,
    /// Stored pattern count.
    #[arg(long)]
    p: Option<usize>,
    /// Spin-flip corruption probabilities; comma list or start:stop:count.
    #[arg(long)]
    flip_grid: Option<String>,
    /// Independent pattern realizations.
    #[arg(long)]
    realizations: Option<usize>,
    /// Corruption draws per realization and flip probability.
    #[arg(long)]
    evolutions: Option<usize>,
}

pub fn run(ctx: &Ctx, args: &BasinsArgs) -> Result<()> {
    let t_raw = resolve(
        args.t_list.clone(),
        &ctx.file,
        "t-list",
        "0,1,1000".to_string(),
    )?;
    let flip_raw = resolve(
        args.flip_grid.clone(),
        &ctx.file,
        "flip-grid",
        "0:0.5:11".to_string(),
    )?;
    let n = resolve(args.n, &ctx.file, "n", 1000)?;
    let p = resolve(args.p, &ctx.file, "p", 50)?;
    let realizations = resolve(args.realizations, &ctx.file, "realizations", 20)?;
    let evolutions = resolve(args.evolutions, &ctx.file, "evolutions", 20)?;
    let ts = parse_grid(&t_raw)?;
    let flips = parse_grid(&flip_raw)?;

    let mut params = ctx.base_params();
    insert(&mut params, "t-list", &t_raw);
    insert(&mut params, "flip-grid", &flip_raw);
    insert(&mut params, "n", n);
    insert(&mut params, "p", p);
    insert(&mut params, "realizations", realizations);
    insert(&mut params, "evolutions", evolutions);

    execute(ctx, "basins", params, |w| {
        let cfg = McConfig {
            zero_t: true,
            realizations,
            seed: ctx.seed,
            ..McConfig::default()
        };
        let mut rows = Vec::new();
        for &t in &ts {
            let records = basin_experiment(n, p, t, &flips, evolutions, &cfg)?;
            for (p_flip, record) in flips.iter().zip(&records) {
                rows.push(vec![
                    cell(*p_flip),
                    cell(t),
                    cell(record.value),
                    cell(record.std_error),
                ]);
            }
        }
        write_csv(
            &w.path("basins.csv"),
            &["p_flip", "t", "freq", "stderr"],
            &rows,
        )?;
        Ok(vec!["basins.csv".into()])
    })
}
