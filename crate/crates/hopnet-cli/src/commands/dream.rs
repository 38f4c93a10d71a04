//! Reinforcement iteration traces and critical-strength estimates.
//!
//! Emits one `dream-trace-s{i}.csv` per requested seed with the cycle-by-cycle
//! trajectory (k, rate, distance, min_eig, commutator_norm), and
//! `dream-strengths.json` with both critical-strength estimators averaged over
//! fresh pattern realizations. A diverging run aborts with the strength that
//! caused it; strengths above the critical value are expected to diverge.

use anyhow::{Context, Result};
use clap::Args;
use hopnet::dreaming::{
    critical_epsilon, run_dreaming, semenov_epsilon, CriticalEpsilon, DreamSchedule,
};
use hopnet::kernel::hebbian;
use hopnet::patterns::{correlation_matrix, generate_patterns};
use hopnet::rng::{derive_seed, Purpose};
use serde_json::json;

use super::{cell, execute, insert, write_csv, Ctx};
use crate::config::resolve;

#[derive(Args)]
pub struct DreamArgs {
    /// Network size.
    #[arg(long)]
    n: Option<usize>,
    /// Stored pattern count.
    #[arg(long)]
    p: Option<usize>,
    /// Reinforcement strength per cycle.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Cycle budget per trace.
    #[arg(long)]
    max_cycles: Option<usize>,
    /// Convergence tolerance on the operator distance.
    #[arg(long)]
    tol: Option<f64>,
    /// Number of independent traces.
    #[arg(long)]
    seeds: Option<usize>,
    /// Pattern realizations behind the critical-strength averages.
    #[arg(long)]
    realizations: Option<usize>,
}

pub fn run(ctx: &Ctx, args: &DreamArgs) -> Result<()> {
    let n = resolve(args.n, &ctx.file, "n", 64)?;
    let p = resolve(args.p, &ctx.file, "p", 8)?;
    let epsilon = resolve(args.epsilon, &ctx.file, "epsilon", 0.5)?;
    let max_cycles = resolve(args.max_cycles, &ctx.file, "max-cycles", 200)?;
    let tol = resolve(args.tol, &ctx.file, "tol", 1e-3)?;
    let seeds = resolve(args.seeds, &ctx.file, "seeds", 1)?;
    let realizations = resolve(args.realizations, &ctx.file, "realizations", 20)?;

    let mut params = ctx.base_params();
    insert(&mut params, "n", n);
    insert(&mut params, "p", p);
    insert(&mut params, "epsilon", epsilon);
    insert(&mut params, "max-cycles", max_cycles);
    insert(&mut params, "tol", tol);
    insert(&mut params, "seeds", seeds);
    insert(&mut params, "realizations", realizations);

    execute(ctx, "dream", params, |w| {
        let sched = DreamSchedule::new(epsilon, max_cycles, tol)?;
        let mut files = Vec::new();
        let mut traces = Vec::new();
        for s in 0..seeds {
            let ps = generate_patterns(n, p, derive_seed(ctx.seed, Purpose::Patterns, s as u64))?;
            let trace = run_dreaming(&ps, &sched)
                .with_context(|| format!("trace {s} at epsilon {epsilon}"))?;
            let rows: Vec<Vec<String>> = trace
                .cycles
                .iter()
                .map(|c| {
                    vec![
                        c.k.to_string(),
                        cell(c.rate),
                        cell(c.distance),
                        cell(c.min_eig),
                        cell(c.commutator_norm),
                    ]
                })
                .collect();
            let name = format!("dream-trace-s{s}.csv");
            write_csv(
                &w.path(&name),
                &["k", "rate", "distance", "min_eig", "commutator_norm"],
                &rows,
            )?;
            files.push(name);
            traces.push(json!({
                "seed_index": s,
                "converged": trace.converged,
                "cycles": trace.cycles.len(),
                "final_distance": trace.last().distance,
            }));
        }

        let mut bounded = Vec::new();
        let mut unbounded = 0usize;
        let mut semenov = Vec::new();
        for r in 0..realizations {
            let stream = 1_000_000 + r as u64;
            let ps = generate_patterns(n, p, derive_seed(ctx.seed, Purpose::Patterns, stream))?;
            match critical_epsilon(&correlation_matrix(&ps)) {
                CriticalEpsilon::Bounded(e) => bounded.push(e),
                CriticalEpsilon::Unbounded => unbounded += 1,
            }
            semenov.push(semenov_epsilon(&hebbian(&ps)));
        }
        let strengths = json!({
            "n": n,
            "p": p,
            "epsilon": epsilon,
            "realizations": realizations,
            "traces": traces,
            "critical_epsilon": stats_json(&bounded, unbounded),
            "semenov_epsilon": stats_json(&semenov, 0),
        });
        std::fs::write(
            w.path("dream-strengths.json"),
            serde_json::to_string_pretty(&strengths)? + "\n",
        )?;
        files.push("dream-strengths.json".into());
        Ok(files)
    })
}

fn stats_json(values: &[f64], unbounded: usize) -> serde_json::Value {
    if values.is_empty() {
        return json!({"mean": null, "std": null, "unbounded_count": unbounded});
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    };
    json!({"mean": mean, "std": std, "unbounded_count": unbounded})
}
