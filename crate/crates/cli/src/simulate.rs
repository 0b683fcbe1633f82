use crate::error::{CliError, CliResult};
use crate::io::csv_writer;
use crate::manifest::Run;
use crate::Context;
use clap::{Args, ValueEnum};
use dyapack_core::dyadic_index::DyadicPattern;
use dyapack_core::generators::{apply_permutation, banded_dyadic, block_tridiagonal, dyadic_random, random_band, random_permutation};
use dyapack_core::packing::{
    block_tridiagonal_fraction, pack, recursive_dyadic_pack, report_stats, NeighborGraph, PackOptions, Permutation,
    RecursiveOptions,
};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Band,
    #[value(name = "block_tridiagonal")]
    BlockTridiagonal,
    Dyadic,
    #[value(name = "banded_dyadic")]
    BandedDyadic,
}

impl Study {
    fn name(self) -> &'static str {
        match self {
            Study::Band => "band",
            Study::BlockTridiagonal => "block_tridiagonal",
            Study::Dyadic => "dyadic",
            Study::BandedDyadic => "banded_dyadic",
        }
    }

    fn default_grid(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Study::Band => &[("d", "255"), ("lambda", "10"), ("p", "0.25,0.5,0.75,1"), ("s", "1,2")],
            Study::BlockTridiagonal => &[("N", "4"), ("k", "10"), ("p", "0.5,0.75,1"), ("s", "2")],
            Study::Dyadic => &[("N", "3,4"), ("k", "5"), ("p", "1"), ("s", "1"), ("depth", "8")],
            Study::BandedDyadic => {
                &[("N", "5"), ("k", "10"), ("lambda", "60"), ("p", "0.5"), ("s", "2"), ("depth", "1")]
            }
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub study: Study,
    /// `key=v1,v2;key=...`; keys left out keep their defaults.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub reps: u64,
    #[arg(long, env = "DYAPACK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output directory; the study writes `<study>.csv` there.
    #[arg(long)]
    pub out: PathBuf,
}

type Cell = BTreeMap<String, String>;

/// Expands the grid in the study's key order.
fn cells(study: Study, grid: Option<&str>) -> CliResult<(Vec<&'static str>, Vec<Cell>)> {
    let defaults = study.default_grid();
    let keys: Vec<&'static str> = defaults.iter().map(|(k, _)| *k).collect();
    let mut values: BTreeMap<&str, Vec<String>> =
        defaults.iter().map(|(k, v)| (*k, v.split(',').map(String::from).collect())).collect();
    for part in grid.unwrap_or("").split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, list) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("grid entry `{part}` is not key=values")))?;
        let key = key.trim();
        let slot = values.get_mut(key).ok_or_else(|| {
            CliError::usage(format!("study {} has no parameter `{key}`; expected one of {}", study.name(), keys.join(", ")))
        })?;
        *slot = list.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if slot.is_empty() {
            return Err(CliError::usage(format!("grid parameter `{key}` has no values")));
        }
    }
    let mut out = vec![Cell::new()];
    for key in &keys {
        out = out
            .into_iter()
            .flat_map(|c| {
                values[key].iter().map(move |v| {
                    let mut c = c.clone();
                    c.insert(key.to_string(), v.clone());
                    c
                })
            })
            .collect();
    }
    Ok((keys, out))
}

fn get<T: std::str::FromStr>(cell: &Cell, key: &str) -> Result<T, String> {
    cell[key].parse().map_err(|_| format!("bad value `{}` for {key}", cell[key]))
}

#[derive(Debug, Clone, Copy, Default)]
struct Metrics {
    l1_per_d: f64,
    linf: f64,
    fill: f64,
    in_structure: f64,
}

const METRICS: [&str; 4] = ["l1_per_d", "linf", "fill", "in_structure"];

impl Metrics {
    fn values(&self) -> [f64; 4] {
        [self.l1_per_d, self.linf, self.fill, self.in_structure]
    }
}

fn edge_fraction(graph: &NeighborGraph, inside: impl Fn(usize, usize) -> bool) -> f64 {
    let (mut total, mut hit) = (0usize, 0usize);
    for (i, j) in graph.edges() {
        total += 1;
        hit += inside(i, j) as usize;
    }
    if total == 0 { 1.0 } else { hit as f64 / total as f64 }
}

fn measure(study: Study, cell: &Cell, graph: &NeighborGraph, pi: &Permutation, s: usize) -> Result<Metrics, String> {
    let r = report_stats(graph, pi, None, s);
    let in_structure = match study {
        Study::Band => {
            let lambda: usize = get(cell, "lambda")?;
            edge_fraction(graph, |i, j| pi.apply(i).abs_diff(pi.apply(j)) <= lambda)
        }
        Study::BlockTridiagonal => block_tridiagonal_fraction(graph, pi, get(cell, "k")?),
        Study::Dyadic | Study::BandedDyadic => {
            let k: usize = get(cell, "k")?;
            let pattern = DyadicPattern::symmetric(get(cell, "N")?, k).map_err(|e| e.to_string())?;
            edge_fraction(graph, |i, j| pattern.contains(pi.apply(i) / k + 1, pi.apply(j) / k + 1))
        }
    };
    Ok(Metrics {
        l1_per_d: r.half_width_l1 as f64 / graph.dim() as f64,
        linf: r.half_bandwidth as f64,
        fill: r.fill,
        in_structure,
    })
}

fn sample(study: Study, cell: &Cell, seed: u64) -> Result<(Metrics, Metrics), String> {
    let p: f64 = get(cell, "p")?;
    let s: usize = get(cell, "s")?;
    let e = |e: dyapack_core::Error| e.to_string();
    let g0 = match study {
        Study::Band => random_band(get(cell, "d")?, get(cell, "lambda")?, p, seed),
        Study::BlockTridiagonal => block_tridiagonal(get(cell, "N")?, get(cell, "k")?, p, seed),
        Study::Dyadic => dyadic_random(get(cell, "N")?, get(cell, "k")?, p, seed),
        Study::BandedDyadic => banded_dyadic(get(cell, "N")?, get(cell, "k")?, p, get(cell, "lambda")?, seed),
    }
    .map_err(e)?;
    let d = g0.dim();
    let original = measure(study, cell, &g0, &Permutation::identity(d), s)?;
    let hidden = random_permutation(d, seed);
    let g = apply_permutation(&g0, &hidden).map_err(e)?;
    let pi = match study {
        Study::Band | Study::BlockTridiagonal => pack(&g, PackOptions { order: s, seed, start: None }).map_err(e)?.permutation,
        Study::Dyadic | Study::BandedDyadic => {
            let opts = RecursiveOptions { max_depth: get(cell, "depth")?, order: s, seed };
            recursive_dyadic_pack(&g, opts).map_err(e)?.0
        }
    };
    Ok((original, measure(study, cell, &g, &pi, s)?))
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = if v.len() < 2 { 0.0 } else { (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() };
    (m, sd)
}

pub fn run(ctx: &Context, args: SimulateArgs) -> CliResult<()> {
    if args.reps == 0 {
        return Err(CliError::usage("--reps must be positive"));
    }
    let (keys, grid) = cells(args.study, args.grid.as_deref())?;
    let mut run = Run::new("simulate", ctx.argv.clone(), &args, Some(args.seed), ctx.threads);
    let path = args.out.join(format!("{}.csv", args.study.name()));
    let mut w = csv_writer(&path, &run)?;

    let mut header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    header.extend(["reps".into(), "failures".into()]);
    for m in METRICS {
        for side in ["original", "packed"] {
            header.push(format!("{side}_{m}_mean"));
            header.push(format!("{side}_{m}_sd"));
        }
    }
    header.push("first_error".into());
    w.write_record(&header)?;

    for cell in &grid {
        let results: Vec<Result<(Metrics, Metrics), String>> = (0..args.reps)
            .into_par_iter()
            .map(|rep| sample(args.study, cell, args.seed.wrapping_add(rep)))
            .collect();
        let ok: Vec<&(Metrics, Metrics)> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        let failures = results.len() - ok.len();
        let first_error = results.iter().find_map(|r| r.as_ref().err()).cloned().unwrap_or_default();

        let mut row: Vec<String> = keys.iter().map(|k| cell[*k].clone()).collect();
        row.extend([args.reps.to_string(), failures.to_string()]);
        for m in 0..METRICS.len() {
            for side in 0..2 {
                let v: Vec<f64> = ok.iter().map(|(a, b)| if side == 0 { a } else { b }.values()[m]).collect();
                let (mean, sd) = mean_sd(&v);
                row.push(format!("{mean:.6}"));
                row.push(format!("{sd:.6}"));
            }
        }
        row.push(first_error.clone());
        w.write_record(&row)?;
        let params: Vec<String> = keys.iter().map(|k| format!("{k}={}", cell[*k])).collect();
        let packed = mean_sd(&ok.iter().map(|(_, b)| b.l1_per_d).collect::<Vec<_>>()).0;
        let original = mean_sd(&ok.iter().map(|(a, _)| a.l1_per_d).collect::<Vec<_>>()).0;
        println!(
            "{}: mean half-width {original:.3} original, {packed:.3} packed{}",
            params.join(" "),
            if failures > 0 { format!(" ({failures} failed: {first_error})") } else { String::new() }
        );
    }
    w.flush()?;
    drop(w);
    run.output(&path);
    run.finish()
}
