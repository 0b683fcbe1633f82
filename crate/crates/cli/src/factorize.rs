use crate::error::{CliError, CliResult};
use crate::io::{create, csv_writer, dyadic_header, load_dyadic, read_mtx, read_vector};
use crate::manifest::Run;
use crate::Context;
use clap::{Args, ValueEnum};
use dyapack_core::dyadic_index::DyadicKind;
use dyapack_core::dyadic_matrix::{DyadicMatrix, FlopCounter};
use dyapack_core::factorization::{factor_r, sequential_orthogonalize, FactorOptions, FactorResult, FastPath, DENSE_LIMIT};
use dyapack_core::mtx::{write_general, write_symmetric};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FastPathArg {
    #[default]
    Auto,
    On,
    Off,
}

impl From<FastPathArg> for FastPath {
    fn from(f: FastPathArg) -> Self {
        match f {
            FastPathArg::Auto => FastPath::Auto,
            FastPathArg::On => FastPath::On,
            FastPathArg::Off => FastPath::Off,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct InputArgs {
    /// Matrix Market file holding Σ.
    pub input: PathBuf,
    /// Dyadic parameters `N,k`; overrides a `%%dyadic` header.
    #[arg(long, value_name = "N,k")]
    pub dyadic: Option<String>,
    /// Try `d = k (2^N - 1)` splits, largest `k` first, and keep the first that fits.
    #[arg(long, conflicts_with = "dyadic")]
    pub auto_detect: bool,
    #[arg(long, value_enum, default_value_t)]
    pub fast_path: FastPathArg,
}

#[derive(Args, Debug, Serialize)]
pub struct FactorizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Matrix Market file for P.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Matrix Market file for R = PᵀΣ.
    #[arg(long)]
    pub r_out: Option<PathBuf>,
    /// CSV with residual and flop counts.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct InvertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Matrix Market file for Σ⁻¹.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Right-hand side, one value per line.
    #[arg(long)]
    pub rhs: PathBuf,
    /// Solution, one value per line.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

struct Loaded {
    sigma: DyadicMatrix,
    fact: FactorResult,
}

fn load_and_factor(args: &InputArgs, run: &mut Run) -> CliResult<Loaded> {
    run.input(&args.input)?;
    let mtx = read_mtx(&args.input)?;
    let sigma = load_dyadic(&mtx, args.dyadic.as_deref(), args.auto_detect)?;
    let fact = sequential_orthogonalize(&sigma, FactorOptions { fast_path: args.fast_path.into(), trace: false })?;
    Ok(Loaded { sigma, fact })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn write_report(path: &Path, run: &Run, l: &Loaded, extra: &[(&str, String)]) -> CliResult<()> {
    let mut w = csv_writer(path, run)?;
    let k = l.sigma.breadth();
    let ph = &l.fact.phases;
    let mut header = vec![
        "d",
        "N",
        "k",
        "fast_path",
        "residual",
        "block_multiplies",
        "block_adds",
        "scalar_ops",
        "scalar_flops",
        "orthonormalize_flops",
        "projection_flops",
        "back_product_flops",
        "schur_flops",
        "update_flops",
    ];
    header.extend(extra.iter().map(|(h, _)| *h));
    w.write_record(&header)?;
    let residual = (l.sigma.dim() <= DENSE_LIMIT).then(|| l.fact.residual(&l.sigma)).transpose()?;
    let f = l.fact.flops;
    let mut row = vec![
        l.sigma.dim().to_string(),
        l.sigma.height().to_string(),
        k.to_string(),
        l.fact.fast_path.to_string(),
        fmt_opt(residual),
        f.block_multiplies.to_string(),
        f.block_adds.to_string(),
        f.scalar_ops.to_string(),
        f.scalar_flops(k).to_string(),
        ph.local_orthonormalize.scalar_flops(k).to_string(),
        ph.projection.scalar_flops(k).to_string(),
        ph.back_product.scalar_flops(k).to_string(),
        ph.schur.scalar_flops(k).to_string(),
        ph.update.scalar_flops(k).to_string(),
    ];
    row.extend(extra.iter().map(|(_, v)| v.clone()));
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

fn summary(l: &Loaded) {
    let k = l.sigma.breadth();
    println!(
        "d={} N={} k={} fast_path={} scalar_flops={}",
        l.sigma.dim(),
        l.sigma.height(),
        k,
        l.fact.fast_path,
        l.fact.flops.scalar_flops(k)
    );
    if l.sigma.dim() <= DENSE_LIMIT {
        if let Ok(r) = l.fact.residual(&l.sigma) {
            println!("residual max|PᵀΣP - I| = {r:e}");
        }
    }
}

pub fn factorize(ctx: &Context, args: FactorizeArgs) -> CliResult<()> {
    let mut run = Run::new("factorize", ctx.argv.clone(), &args, None, ctx.threads);
    let l = load_and_factor(&args.input, &mut run)?;
    summary(&l);
    if let Some(out) = &args.out {
        let mut w = create(out)?;
        write_general(&mut w, &l.fact.p.to_dense(), Some(dyadic_header(&l.fact.p, DyadicKind::Vertical)), &run.header())?;
        w.flush().map_err(|e| CliError::io(out, e))?;
        run.output(out);
    }
    if let Some(out) = &args.r_out {
        let r = factor_r(&l.sigma, &l.fact.p)?;
        let mut w = create(out)?;
        write_general(&mut w, &r.to_dense(), Some(dyadic_header(&r, DyadicKind::Vertical)), &run.header())?;
        w.flush().map_err(|e| CliError::io(out, e))?;
        run.output(out);
    }
    if let Some(rep) = &args.report {
        write_report(rep, &run, &l, &[])?;
        run.output(rep);
    }
    run.finish()
}

pub fn invert(ctx: &Context, args: InvertArgs) -> CliResult<()> {
    let mut run = Run::new("invert", ctx.argv.clone(), &args, None, ctx.threads);
    let l = load_and_factor(&args.input, &mut run)?;
    summary(&l);
    let mut extra = FlopCounter::new();
    let inv = l.fact.inverse(&mut extra)?;
    let d = l.sigma.dim();
    let inv_residual =
        (d <= DENSE_LIMIT).then(|| (l.sigma.to_dense() * &inv - DMatrix::identity(d, d)).amax());
    if let Some(r) = inv_residual {
        println!("inverse residual max|ΣX - I| = {r:e}");
    }
    let mut w = create(&args.out)?;
    write_symmetric(&mut w, &inv, None, &run.header())?;
    w.flush().map_err(|e| CliError::io(&args.out, e))?;
    run.output(&args.out);
    if let Some(rep) = &args.report {
        let k = l.sigma.breadth();
        let cols = [
            ("inverse_residual", fmt_opt(inv_residual)),
            ("inverse_scalar_flops", extra.scalar_flops(k).to_string()),
        ];
        write_report(rep, &run, &l, &cols)?;
        run.output(rep);
    }
    run.finish()
}

pub fn solve(ctx: &Context, args: SolveArgs) -> CliResult<()> {
    let mut run = Run::new("solve", ctx.argv.clone(), &args, None, ctx.threads);
    let y = read_vector(&args.rhs)?;
    let l = load_and_factor(&args.input, &mut run)?;
    run.input(&args.rhs)?;
    summary(&l);
    let x = l.fact.solve(&y)?;
    let d = l.sigma.dim();
    let res = (d <= DENSE_LIMIT)
        .then(|| (l.sigma.to_dense() * DVector::from_column_slice(&x) - DVector::from_column_slice(&y)).amax());
    if let Some(r) = res {
        println!("solve residual max|Σx - y| = {r:e}");
    }
    let mut w = create(&args.out)?;
    let mut text = run.hash_header();
    for v in &x {
        text.push_str(&format!("{v:e}\n"));
    }
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(&args.out, e))?;
    run.output(&args.out);
    if let Some(rep) = &args.report {
        write_report(rep, &run, &l, &[("solve_residual", fmt_opt(res))])?;
        run.output(rep);
    }
    run.finish()
}
