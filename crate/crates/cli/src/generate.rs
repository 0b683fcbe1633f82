use crate::error::{CliError, CliResult};
use crate::io::{create, dyadic_header};
use crate::manifest::Run;
use crate::Context;
use clap::Args;
use dyapack_core::dyadic_index::DyadicKind;
use dyapack_core::generators::{
    apply_permutation, apply_permutation_dense, random_permutation, Family, GenSpec, Generated,
};
use dyapack_core::mtx::{write_general, write_pattern, write_permutation, write_symmetric};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    /// One of full_band, random_band, full_block_tridiagonal,
    /// random_block_tridiagonal, dyadic_random, banded_dyadic, spd_dyadic.
    #[arg(long, required_unless_present = "spec")]
    pub family: Option<String>,
    /// Whole parameter block as `key=value` pairs; other parameter flags are ignored.
    #[arg(long, conflicts_with = "family")]
    pub spec: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "N", value_name = "N")]
    pub height: Option<u32>,
    #[arg(long = "k", value_name = "K")]
    pub breadth: Option<usize>,
    #[arg(long)]
    pub lambda: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, env = "DYAPACK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Condition number cap for spd_dyadic.
    #[arg(long)]
    pub cond_target: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Hide the structure under a seeded random permutation and write it here.
    #[arg(long)]
    pub scramble: Option<PathBuf>,
    /// Factor R with Σ = RᵀR, spd_dyadic only and not with --scramble.
    #[arg(long, conflicts_with = "scramble")]
    pub r_out: Option<PathBuf>,
}

impl GenerateArgs {
    fn spec(&self) -> CliResult<GenSpec> {
        if let Some(text) = &self.spec {
            return Ok(GenSpec::parse(text)?);
        }
        let family: Family = self.family.as_deref().unwrap_or_default().parse()?;
        Ok(GenSpec {
            family,
            d: self.d,
            height: self.height,
            breadth: self.breadth,
            lambda: self.lambda,
            p: self.p,
            seed: self.seed,
            cond_target: self.cond_target,
        })
    }
}

pub fn run(ctx: &Context, args: GenerateArgs) -> CliResult<()> {
    let spec = args.spec()?;
    let mut run = Run::new("generate", ctx.argv.clone(), &args, Some(spec.seed), ctx.threads);
    let mut comments: Vec<String> = spec.to_text().lines().map(String::from).collect();
    comments.extend(run.header());
    let generated = spec.generate()?;
    let pi = args.scramble.as_ref().map(|_| {
        let d = match &generated {
            Generated::Pattern(g) => g.dim(),
            Generated::Spd(s) => s.sigma.dim(),
        };
        random_permutation(d, spec.seed)
    });

    let mut w = create(&args.out)?;
    match &generated {
        Generated::Pattern(g) => {
            let g = match &pi {
                Some(pi) => apply_permutation(g, pi)?,
                None => g.clone(),
            };
            println!("{}: d={} nnz={}", spec.family, g.dim(), g.nnz());
            write_pattern(&mut w, &g, &comments)?;
        }
        Generated::Spd(s) => {
            println!("{}: d={} N={} k={}", spec.family, s.sigma.dim(), s.sigma.height(), s.sigma.breadth());
            match &pi {
                Some(pi) => write_symmetric(&mut w, &apply_permutation_dense(&s.sigma.to_dense(), pi)?, None, &comments)?,
                None => write_symmetric(
                    &mut w,
                    &s.sigma.to_dense(),
                    Some(dyadic_header(&s.sigma, DyadicKind::Symmetric)),
                    &comments,
                )?,
            }
        }
    }
    w.flush().map_err(|e| CliError::io(&args.out, e))?;
    run.output(&args.out);

    if let (Some(path), Some(pi)) = (&args.scramble, &pi) {
        let mut w = create(path)?;
        w.write_all(run.hash_header().as_bytes()).map_err(|e| CliError::io(path, e))?;
        write_permutation(&mut w, pi)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
        run.output(path);
    }
    if let Some(path) = &args.r_out {
        let Generated::Spd(s) = &generated else {
            return Err(CliError::usage("--r-out needs the spd_dyadic family"));
        };
        let mut w = create(path)?;
        write_general(&mut w, &s.r.to_dense(), Some(dyadic_header(&s.r, DyadicKind::Vertical)), &comments)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
        run.output(path);
    }
    run.finish()
}
