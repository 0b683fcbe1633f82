use crate::error::{CliError, CliResult};
use crate::io::{create, csv_writer, load_graph, read_mtx};
use crate::manifest::Run;
use crate::Context;
use clap::Args;
use dyapack_core::mtx::write_permutation;
use dyapack_core::packing::{pack, recursive_dyadic_pack, report_stats, PackOptions, Permutation, RecursiveOptions};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

#[derive(Args, Debug, Serialize)]
pub struct PackArgs {
    /// Symmetric pattern in Matrix Market format; nonzero entries are edges.
    pub input: PathBuf,
    /// Neighbourhood order `s` used to build the row sets.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, env = "DYAPACK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// First skeleton row, 1-based; drawn at random when absent.
    #[arg(long)]
    pub start: Option<usize>,
    /// Split recursively at minimum vertex separators.
    #[arg(long)]
    pub recursive: bool,
    #[arg(long, default_value_t = 8, requires = "recursive")]
    pub max_depth: usize,
    /// Permutation file, line `i` holding the 1-based position of row `i`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: PackArgs) -> CliResult<()> {
    let mut run = Run::new("pack", ctx.argv.clone(), &args, Some(args.seed), ctx.threads);
    run.input(&args.input)?;
    let graph = load_graph(&read_mtx(&args.input)?)?;
    let d = graph.dim();
    let start = match args.start {
        Some(0) => return Err(CliError::usage("--start is 1-based")),
        Some(s) if s > d => return Err(CliError::usage(format!("--start {s} exceeds dimension {d}"))),
        s => s.map(|s| s - 1),
    };
    let (pi, skeleton, depth) = if args.recursive {
        let opts = RecursiveOptions { max_depth: args.max_depth, order: args.order, seed: args.seed };
        let (pi, tree) = recursive_dyadic_pack(&graph, opts)?;
        (pi, None, Some(tree.depth()))
    } else {
        let res = pack(&graph, PackOptions { order: args.order, seed: args.seed, start })?;
        (res.permutation, Some(res.skeleton.len()), None)
    };
    let before = report_stats(&graph, &Permutation::identity(d), None, args.order);
    let after = report_stats(&graph, &pi, None, args.order);
    println!(
        "d={d} half_bandwidth {} -> {}, mean half-width {:.3} -> {:.3}",
        before.half_bandwidth,
        after.half_bandwidth,
        before.half_width_l1 as f64 / d as f64,
        after.half_width_l1 as f64 / d as f64
    );

    let mut w = create(&args.out)?;
    w.write_all(run.hash_header().as_bytes()).map_err(|e| CliError::io(&args.out, e))?;
    write_permutation(&mut w, &pi)?;
    w.flush().map_err(|e| CliError::io(&args.out, e))?;
    run.output(&args.out);

    if let Some(rep) = &args.report {
        let mut w = csv_writer(rep, &run)?;
        w.write_record([
            "d",
            "nnz",
            "order",
            "seed",
            "half_width_l1",
            "half_bandwidth",
            "eta_bar",
            "fill",
            "input_half_width_l1",
            "input_half_bandwidth",
            "input_eta_bar",
            "input_fill",
            "skeleton_size",
            "separator_depth",
        ])?;
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            d.to_string(),
            graph.nnz().to_string(),
            args.order.to_string(),
            args.seed.to_string(),
            after.half_width_l1.to_string(),
            after.half_bandwidth.to_string(),
            after.mean_density.to_string(),
            after.fill.to_string(),
            before.half_width_l1.to_string(),
            before.half_bandwidth.to_string(),
            before.mean_density.to_string(),
            before.fill.to_string(),
            opt(skeleton),
            opt(depth),
        ])?;
        w.flush()?;
        run.output(rep);
    }
    run.finish()
}
