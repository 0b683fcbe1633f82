//! Seeded test matrices: permuted bands, block tridiagonal and dyadic 0-1
//! patterns, and SPD dyadic matrices with a known factor.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Row `i` of a 0-1
//! pattern draws from stream `(attempt << 32) | i`, so every row can be
//! regenerated on its own. Blocks of an SPD factor use stream `(i << 32) | j`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic_index::{DyadicPattern, MAX_HEIGHT};
use crate::dyadic_matrix::{DenseBlock, DyadicMatrix};
use crate::error::{Error, Result};
use crate::packing::{NeighborGraph, Permutation};

/// Redraws allowed before a random pattern that stays disconnected is reported.
pub const MAX_ATTEMPTS: u64 = 100;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::range("fill probability", format!("{p} not in (0, 1]")))
    }
}

fn check_band(d: usize, lambda: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::range("dimension", "d must be positive"));
    }
    if lambda >= d {
        return Err(Error::range("half-bandwidth", format!("{lambda} exceeds d - 1 = {}", d - 1)));
    }
    Ok(())
}

/// Keeps each strictly upper entry of `support` with probability `p`; the
/// diagonal is always kept. Redraws while the result is disconnected and the
/// full support is connected.
fn bernoulli_pattern(
    d: usize,
    support: impl Fn(usize, usize) -> bool,
    p: f64,
    seed: u64,
) -> Result<NeighborGraph> {
    let support = &support;
    let upper = move |i: usize| (i + 1..d).filter(move |&j| support(i, j));
    let full = NeighborGraph::from_edges(d, (0..d).flat_map(|i| upper(i).map(move |j| (i, j))))?;
    if p >= 1.0 {
        return Ok(full);
    }
    let need_connected = full.is_connected();
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for i in 0..d {
            let mut rng = rng_for(seed, (attempt << 32) | i as u64);
            edges.extend(upper(i).filter(|_| rng.random_bool(p)).map(|j| (i, j)));
        }
        let g = NeighborGraph::from_edges(d, edges)?;
        if !need_connected || g.is_connected() {
            return Ok(g);
        }
        last = Some(g);
    }
    Err(Error::Disconnected {
        components: last.expect("at least one attempt").components(),
    })
}

/// Ones exactly on `|i - j| <= λ`.
pub fn full_band(d: usize, lambda: usize) -> Result<NeighborGraph> {
    check_band(d, lambda)?;
    bernoulli_pattern(d, |i, j| j - i <= lambda, 1.0, 0)
}

pub fn random_band(d: usize, lambda: usize, p: f64, seed: u64) -> Result<NeighborGraph> {
    check_band(d, lambda)?;
    check_p(p)?;
    bernoulli_pattern(d, |i, j| j - i <= lambda, p, seed)
}

fn dyadic_dim(n: u32, k: usize) -> Result<usize> {
    if n == 0 || n > MAX_HEIGHT {
        return Err(Error::range("height", format!("{n} not in 1..={MAX_HEIGHT}")));
    }
    if k == 0 {
        return Err(Error::range("breadth", "k must be positive"));
    }
    Ok(k * ((1usize << n) - 1))
}

/// Blocks of size `k` on and next to the diagonal, `d = k (2^N - 1)`.
pub fn block_tridiagonal(n: u32, k: usize, p: f64, seed: u64) -> Result<NeighborGraph> {
    let d = dyadic_dim(n, k)?;
    check_p(p)?;
    bernoulli_pattern(d, |i, j| j / k - i / k <= 1, p, seed)
}

/// Random fill of the symmetric dyadic pattern `SD(N, k)`.
pub fn dyadic_random(n: u32, k: usize, p: f64, seed: u64) -> Result<NeighborGraph> {
    banded_dyadic(n, k, p, usize::MAX, seed)
}

/// Random fill of `SD(N, k)` restricted to `|i - j| <= λ`.
pub fn banded_dyadic(n: u32, k: usize, p: f64, lambda: usize, seed: u64) -> Result<NeighborGraph> {
    let d = dyadic_dim(n, k)?;
    check_p(p)?;
    let pattern = DyadicPattern::symmetric(n, k)?;
    bernoulli_pattern(
        d,
        |i, j| j - i <= lambda && pattern.contains(i / k + 1, j / k + 1),
        p,
        seed,
    )
}

/// An SPD symmetric dyadic matrix together with its factor `R`, `Σ = RᵀR`.
#[derive(Debug, Clone)]
pub struct SpdInstance {
    pub sigma: DyadicMatrix,
    pub r: DyadicMatrix,
}

/// `R ∈ VD(N, k)` has entries uniform on `(-1, 1)` and `shift` added to the
/// diagonal, starting from `sqrt(k)`. With a condition target the shift is
/// doubled until `cond(Σ)` falls below it.
pub fn spd_dyadic(n: u32, k: usize, seed: u64, cond_target: Option<f64>) -> Result<SpdInstance> {
    dyadic_dim(n, k)?;
    if let Some(c) = cond_target {
        if !(c > 1.0) {
            return Err(Error::range("condition target", format!("{c} must exceed 1")));
        }
    }
    let vd = DyadicPattern::vertical(n, k)?;
    let raw = DyadicMatrix::from_block_fn(vd, |i, j| {
        let mut rng = rng_for(seed, ((i as u64) << 32) | j as u64);
        DenseBlock::from_fn(k, |_, _| rng.random_range(-1.0..1.0))
    });
    let mut shift = (k as f64).sqrt();
    for _ in 0..64 {
        let mut r = raw.clone();
        for b in 1..=r.blocks_per_side() {
            let blk = r.block_mut(b, b).expect("diagonal block");
            for a in 0..k {
                blk.set(a, a, blk.get(a, a) + shift);
            }
        }
        let rd = r.to_dense();
        let sd = rd.transpose() * &rd;
        let sd = (&sd + sd.transpose()) * 0.5;
        let ok = match cond_target {
            None => true,
            Some(c) => {
                let ev = sd.clone().symmetric_eigenvalues();
                let (lo, hi) = (ev.min(), ev.max());
                lo > 0.0 && hi / lo <= c
            }
        };
        if ok {
            let sigma = DyadicMatrix::from_dense(&sd, DyadicPattern::symmetric(n, k)?)?;
            return Ok(SpdInstance { sigma, r });
        }
        shift *= 2.0;
    }
    Err(Error::InvalidParameter("condition target not reachable by diagonal shifts".into()))
}

/// Block tridiagonal SPD matrix `Σ = BᵀB` on the `SD(N, k)` pattern, where
/// `B` is block upper bidiagonal with entries uniform on `(-1, 1)` and
/// `sqrt(k) + 1` added to its diagonal.
pub fn spd_block_tridiagonal(n: u32, k: usize, seed: u64) -> Result<DyadicMatrix> {
    let d = dyadic_dim(n, k)?;
    let nb = d / k;
    let shift = (k as f64).sqrt() + 1.0;
    let mut b = DMatrix::zeros(d, d);
    for i in 0..nb {
        for j in [i, i + 1] {
            if j >= nb {
                continue;
            }
            let mut rng = rng_for(seed, ((i as u64) << 32) | j as u64);
            for a in 0..k {
                for c in 0..k {
                    let mut v = rng.random_range(-1.0..1.0);
                    if i == j && a == c {
                        v += shift;
                    }
                    b[(i * k + a, j * k + c)] = v;
                }
            }
        }
    }
    let s = b.transpose() * &b;
    DyadicMatrix::from_dense(&((&s + s.transpose()) * 0.5), DyadicPattern::symmetric(n, k)?)
}

/// Uniformly random permutation of `0..d`.
pub fn random_permutation(d: usize, seed: u64) -> Permutation {
    let mut images: Vec<usize> = (0..d).collect();
    images.shuffle(&mut rng_for(seed, u64::MAX));
    Permutation::new(images).expect("shuffle is a bijection")
}

/// Relabels the pattern: row `i` moves to `pi.apply(i)`.
pub fn apply_permutation(graph: &NeighborGraph, pi: &Permutation) -> Result<NeighborGraph> {
    if graph.dim() != pi.len() {
        return Err(Error::DimensionMismatch(format!(
            "graph of size {} with permutation of size {}",
            graph.dim(),
            pi.len()
        )));
    }
    Ok(graph.permuted(pi))
}

/// `out[π(i), π(j)] = m[i, j]`.
pub fn apply_permutation_dense(m: &DMatrix<f64>, pi: &Permutation) -> Result<DMatrix<f64>> {
    if m.nrows() != pi.len() || m.ncols() != pi.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with permutation of size {}",
            m.nrows(),
            m.ncols(),
            pi.len()
        )));
    }
    let inv = pi.inverse();
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |a, b| m[(inv.apply(a), inv.apply(b))]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    FullBand,
    RandomBand,
    FullBlockTridiagonal,
    RandomBlockTridiagonal,
    DyadicRandom,
    BandedDyadic,
    SpdDyadic,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::FullBand,
        Family::RandomBand,
        Family::FullBlockTridiagonal,
        Family::RandomBlockTridiagonal,
        Family::DyadicRandom,
        Family::BandedDyadic,
        Family::SpdDyadic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::FullBand => "full_band",
            Family::RandomBand => "random_band",
            Family::FullBlockTridiagonal => "full_block_tridiagonal",
            Family::RandomBlockTridiagonal => "random_block_tridiagonal",
            Family::DyadicRandom => "dyadic_random",
            Family::BandedDyadic => "banded_dyadic",
            Family::SpdDyadic => "spd_dyadic",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family `{s}`")))
    }
}

/// Parameters of one generated matrix. Fields a family does not use are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    pub d: Option<usize>,
    pub height: Option<u32>,
    pub breadth: Option<usize>,
    pub lambda: Option<usize>,
    pub p: f64,
    pub seed: u64,
    pub cond_target: Option<f64>,
}

impl GenSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            d: None,
            height: None,
            breadth: None,
            lambda: None,
            p: 1.0,
            seed: 0,
            cond_target: None,
        }
    }

    /// Flat `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("family={}\n", self.family);
        let mut put = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push_str(&format!("{key}={v}\n"));
            }
        };
        put("d", self.d.map(|v| v.to_string()));
        put("N", self.height.map(|v| v.to_string()));
        put("k", self.breadth.map(|v| v.to_string()));
        put("lambda", self.lambda.map(|v| v.to_string()));
        put("p", Some(self.p.to_string()));
        put("seed", Some(self.seed.to_string()));
        put("cond_target", self.cond_target.map(|v| v.to_string()));
        out
    }

    /// Parses `key=value` pairs separated by newlines, spaces or commas.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec: Option<GenSpec> = None;
        let mut rest = Vec::new();
        for (line, tok) in text
            .lines()
            .enumerate()
            .flat_map(|(n, l)| l.split([' ', ',', '\t']).map(move |t| (n + 1, t)))
            .filter(|(_, t)| !t.is_empty())
        {
            let (key, value) = tok.split_once('=').ok_or_else(|| Error::Parse {
                line,
                detail: format!("expected key=value, got `{tok}`"),
            })?;
            if key == "family" {
                spec = Some(GenSpec::new(value.parse()?));
            } else {
                rest.push((line, key.to_string(), value.to_string()));
            }
        }
        let mut spec = spec.ok_or_else(|| Error::Parse {
            line: 0,
            detail: "missing family".into(),
        })?;
        for (line, key, value) in rest {
            let bad = |e: &dyn fmt::Display| Error::Parse {
                line,
                detail: format!("{key}: {e}"),
            };
            match key.as_str() {
                "d" => spec.d = Some(value.parse().map_err(|e| bad(&e))?),
                "N" | "n" | "height" => spec.height = Some(value.parse().map_err(|e| bad(&e))?),
                "k" | "breadth" => spec.breadth = Some(value.parse().map_err(|e| bad(&e))?),
                "lambda" => spec.lambda = Some(value.parse().map_err(|e| bad(&e))?),
                "p" => spec.p = value.parse().map_err(|e| bad(&e))?,
                "seed" => spec.seed = value.parse().map_err(|e| bad(&e))?,
                "cond_target" => spec.cond_target = Some(value.parse().map_err(|e| bad(&e))?),
                _ => return Err(bad(&"unknown key")),
            }
        }
        Ok(spec)
    }

    fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| Error::InvalidParameter(format!("parameter `{name}` is required")))
    }

    pub fn generate(&self) -> Result<Generated> {
        let d = || Self::need(self.d, "d");
        let n = || Self::need(self.height, "N");
        let k = || Self::need(self.breadth, "k");
        let lambda = || Self::need(self.lambda, "lambda");
        Ok(match self.family {
            Family::FullBand => Generated::Pattern(full_band(d()?, lambda()?)?),
            Family::RandomBand => Generated::Pattern(random_band(d()?, lambda()?, self.p, self.seed)?),
            Family::FullBlockTridiagonal => Generated::Pattern(block_tridiagonal(n()?, k()?, 1.0, self.seed)?),
            Family::RandomBlockTridiagonal => {
                Generated::Pattern(block_tridiagonal(n()?, k()?, self.p, self.seed)?)
            }
            Family::DyadicRandom => Generated::Pattern(dyadic_random(n()?, k()?, self.p, self.seed)?),
            Family::BandedDyadic => {
                Generated::Pattern(banded_dyadic(n()?, k()?, self.p, lambda()?, self.seed)?)
            }
            Family::SpdDyadic => Generated::Spd(spd_dyadic(n()?, k()?, self.seed, self.cond_target)?),
        })
    }
}

#[derive(Debug, Clone)]
pub enum Generated {
    Pattern(NeighborGraph),
    Spd(SpdInstance),
}
