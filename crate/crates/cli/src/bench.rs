use crate::error::{CliError, CliResult};
use crate::factorize::FastPathArg;
use crate::fit;
use crate::io::csv_writer;
use crate::manifest::Run;
use crate::Context;
use clap::{Args, ValueEnum};
use dyapack_core::factorization::{sequential_orthogonalize, FactorOptions};
use dyapack_core::generators::{spd_block_tridiagonal, spd_dyadic};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BenchFamily {
    #[value(name = "spd_dyadic")]
    SpdDyadic,
    /// SPD block-tridiagonal matrices.
    Band,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "spd_dyadic")]
    pub family: BenchFamily,
    /// Block size or inclusive range `a..b`.
    #[arg(long = "k", default_value = "2")]
    pub k: String,
    /// Pyramid height or inclusive range `a..b`.
    #[arg(long = "N", default_value = "4..10")]
    pub n: String,
    #[arg(long, value_enum, default_value_t)]
    pub fast_path: FastPathArg,
    #[arg(long, env = "DYAPACK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Leave out the wall-clock column so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `a`, `a..b` or `a..=b`, both ends inclusive.
pub fn parse_range(s: &str, what: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::usage(format!("{what} expects a or a..b, got `{s}`"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(CliError::usage(format!("{what} range `{s}` is empty")));
    }
    Ok((a..=b).collect())
}

impl BenchFamily {
    fn name(self) -> &'static str {
        match self {
            BenchFamily::SpdDyadic => "spd_dyadic",
            BenchFamily::Band => "band",
        }
    }
}

struct Row {
    n: u32,
    k: usize,
    d: usize,
    fast: bool,
    flops: u64,
    orthonormalize: u64,
}

pub fn run(ctx: &Context, args: BenchArgs) -> CliResult<()> {
    let ns = parse_range(&args.n, "--N")?;
    let ks = parse_range(&args.k, "--k")?;
    if ns.contains(&0) || ks.contains(&0) {
        return Err(CliError::usage("--N and --k must be positive"));
    }
    let mut run = Run::new("bench", ctx.argv.clone(), &args, Some(args.seed), ctx.threads);
    let mut w = csv_writer(&args.out, &run)?;
    let mut header = vec![
        "family",
        "N",
        "k",
        "d",
        "fast_path",
        "block_multiplies",
        "block_adds",
        "scalar_ops",
        "scalar_flops",
        "orthonormalize_flops",
        "orthonormalize_share",
    ];
    if !args.no_timing {
        header.push("wall_seconds");
    }
    w.write_record(&header)?;

    let mut rows = Vec::new();
    for &k in &ks {
        for &n in &ns {
            let (n, k) = (n as u32, k as usize);
            let seed = args.seed.wrapping_add(n as u64);
            let sigma = match args.family {
                BenchFamily::SpdDyadic => spd_dyadic(n, k, seed, None)?.sigma,
                BenchFamily::Band => spd_block_tridiagonal(n, k, seed)?,
            };
            let t0 = Instant::now();
            let f = sequential_orthogonalize(&sigma, FactorOptions { fast_path: args.fast_path.into(), trace: false })?;
            let secs = t0.elapsed().as_secs_f64();
            let total = f.flops.scalar_flops(k);
            let lo = f.phases.local_orthonormalize.scalar_flops(k);
            let mut rec = vec![
                args.family.name().to_string(),
                n.to_string(),
                k.to_string(),
                sigma.dim().to_string(),
                f.fast_path.to_string(),
                f.flops.block_multiplies.to_string(),
                f.flops.block_adds.to_string(),
                f.flops.scalar_ops.to_string(),
                total.to_string(),
                lo.to_string(),
                format!("{:.6}", lo as f64 / total as f64),
            ];
            if !args.no_timing {
                rec.push(format!("{secs:.6}"));
            }
            w.write_record(&rec)?;
            rows.push(Row { n, k, d: sigma.dim(), fast: f.fast_path, flops: total, orthonormalize: lo });
        }
    }
    w.flush()?;
    let mut inner = w.into_inner().map_err(|e| CliError::io(&args.out, e.error()))?;
    let fits = fit_lines(&rows);
    for line in &fits {
        println!("{line}");
        writeln!(inner, "# {line}").map_err(|e| CliError::io(&args.out, e))?;
    }
    inner.flush().map_err(|e| CliError::io(&args.out, e))?;
    drop(inner);
    run.output(&args.out);
    run.finish()
}

/// Scaling fits per fixed `k` over `N` and per fixed `N` over `k`.
fn fit_lines(rows: &[Row]) -> Vec<String> {
    let mut out = Vec::new();
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.dedup();
    for k in ks {
        let sel: Vec<&Row> = rows.iter().filter(|r| r.k == k).collect();
        if sel.len() < 3 {
            continue;
        }
        let d: Vec<f64> = sel.iter().map(|r| r.d as f64).collect();
        let f: Vec<f64> = sel.iter().map(|r| r.flops as f64).collect();
        let (e, r2) = fit::power_law(&d, &f);
        let lg = |r: &&Row| (r.d as f64 / r.k as f64).log2();
        let fast = sel.iter().all(|r| r.fast);
        let (name, model): (&str, Vec<f64>) = if fast {
            ("d log(d/k)", sel.iter().map(|r| r.d as f64 * lg(r)).collect())
        } else {
            ("d log^2(d/k)", sel.iter().map(|r| r.d as f64 * lg(r).powi(2)).collect())
        };
        out.push(format!(
            "fit k={k}: flops ~ d^{e:.4} (r2={r2:.4}); flops ~ c*{name} (r2={:.4})",
            fit::proportional_r2(&model, &f)
        ));
    }
    let mut ns: Vec<u32> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let sel: Vec<&Row> = rows.iter().filter(|r| r.n == n).collect();
        if sel.len() < 3 {
            continue;
        }
        let k: Vec<f64> = sel.iter().map(|r| r.k as f64).collect();
        let lo: Vec<f64> = sel.iter().map(|r| r.orthonormalize as f64).collect();
        let (e, r2) = fit::power_law(&k, &lo);
        out.push(format!("fit N={n}: orthonormalize flops ~ k^{e:.4} (r2={r2:.4})"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("4..6", "n").unwrap(), vec![4, 5, 6]);
        assert_eq!(parse_range("4..=5", "n").unwrap(), vec![4, 5]);
        assert_eq!(parse_range("3", "n").unwrap(), vec![3]);
        assert_eq!(parse_range("6..4", "n").unwrap_err().class, crate::error::Class::Usage);
        assert!(parse_range("x", "n").is_err());
    }
}
