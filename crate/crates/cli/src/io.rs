use crate::error::{Class, CliError, CliResult};
use crate::manifest::Run;
use dyapack_core::dyadic_index::{DyadicKind, DyadicPattern};
use dyapack_core::dyadic_matrix::DyadicMatrix;
use dyapack_core::mtx::{read_matrix_market, DyadicHeader, MtxFile};
use dyapack_core::packing::NeighborGraph;
use dyapack_core::Error;
use nalgebra::DMatrix;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn read_mtx(path: &Path) -> CliResult<MtxFile> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_matrix_market(BufReader::new(f)).map_err(|e| match e {
        Error::Parse { line, detail } => CliError::io(path, format!("line {line}: {detail}")),
        other => other.into(),
    })
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Opens a CSV writer whose first lines carry the run header.
pub fn csv_writer(path: &Path, run: &Run) -> CliResult<csv::Writer<BufWriter<File>>> {
    let mut w = create(path)?;
    w.write_all(run.hash_header().as_bytes()).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(w))
}

pub fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        out.push(t.parse().map_err(|e| CliError::io(path, format!("line {}: `{t}`: {e}", n + 1)))?);
    }
    Ok(out)
}

/// Parses `N,k`.
pub fn parse_dyadic(s: &str) -> CliResult<(u32, usize)> {
    let bad = || CliError::usage(format!("--dyadic expects N,k, got `{s}`"));
    let (n, k) = s.split_once(',').ok_or_else(bad)?;
    Ok((n.trim().parse().map_err(|_| bad())?, k.trim().parse().map_err(|_| bad())?))
}

fn check_symmetric(m: &DMatrix<f64>) -> CliResult<()> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-14 * scale {
                return Err(CliError::new(
                    Class::Pattern,
                    format!("matrix is not symmetric at ({}, {})", i + 1, j + 1),
                ));
            }
        }
    }
    Ok(())
}

/// Candidate `(N, k)` with `d = k (2^N - 1)` and `N >= 2`, largest `k` first.
pub fn dyadic_candidates(d: usize) -> Vec<(u32, usize)> {
    (2..usize::BITS)
        .map(|n| (n, (1usize << n) - 1))
        .take_while(|&(_, b)| b <= d)
        .filter(|&(_, b)| d.is_multiple_of(b))
        .map(|(n, b)| (n, d / b))
        .collect()
}

/// Resolves the dyadic parameters from the flag, the file header or auto-detection.
pub fn load_dyadic(mtx: &MtxFile, declared: Option<&str>, auto_detect: bool) -> CliResult<DyadicMatrix> {
    let m = &mtx.matrix;
    if m.nrows() != m.ncols() {
        return Err(CliError::new(Class::Pattern, format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    check_symmetric(m)?;
    let declared = match declared {
        Some(s) => Some(parse_dyadic(s)?),
        None => mtx.dyadic.filter(|h| h.kind == DyadicKind::Symmetric).map(|h| (h.height, h.breadth)),
    };
    if let Some((n, k)) = declared {
        return Ok(DyadicMatrix::from_dense(m, DyadicPattern::symmetric(n, k)?)?);
    }
    if !auto_detect {
        return Err(CliError::usage("no dyadic parameters: pass --dyadic N,k or --auto-detect"));
    }
    let d = m.nrows();
    for (n, k) in dyadic_candidates(d) {
        if let Ok(s) = DyadicMatrix::from_dense(m, DyadicPattern::symmetric(n, k)?) {
            return Ok(s);
        }
    }
    if d > 0 {
        return Ok(DyadicMatrix::from_dense(m, DyadicPattern::symmetric(1, d)?)?);
    }
    Err(CliError::new(Class::Pattern, "empty matrix"))
}

pub fn load_graph(mtx: &MtxFile) -> CliResult<NeighborGraph> {
    mtx.graph().map_err(|e| match e {
        Error::InvalidParameter(msg) => CliError::new(Class::Pattern, msg),
        other => other.into(),
    })
}

pub fn dyadic_header(s: &DyadicMatrix, kind: DyadicKind) -> DyadicHeader {
    DyadicHeader { height: s.height(), breadth: s.breadth(), kind }
}
