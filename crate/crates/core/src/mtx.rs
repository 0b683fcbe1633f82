//! Matrix Market reading and writing, plus one-based permutation files.
//!
//! A comment line `%%dyadic N=<n> k=<k> kind=<h|v|s>` records dyadic
//! parameters alongside the matrix.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::dyadic_index::DyadicKind;
use crate::error::{Error, Result};
use crate::packing::{NeighborGraph, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicHeader {
    pub height: u32,
    pub breadth: usize,
    pub kind: DyadicKind,
}

impl DyadicHeader {
    pub fn line(&self) -> String {
        format!("%%dyadic N={} k={} kind={}", self.height, self.breadth, self.kind.code())
    }

    fn parse(line: &str, lineno: usize) -> Result<Self> {
        let bad = |detail: String| Error::Parse { line: lineno, detail };
        let (mut height, mut breadth, mut kind) = (None, None, None);
        for tok in line.trim_start_matches("%%dyadic").split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed dyadic field `{tok}`")))?;
            match key {
                "N" => height = Some(value.parse().map_err(|e| bad(format!("N: {e}")))?),
                "k" => breadth = Some(value.parse().map_err(|e| bad(format!("k: {e}")))?),
                "kind" => {
                    kind = Some(DyadicKind::from_code(value).ok_or_else(|| bad(format!("unknown kind `{value}`")))?)
                }
                _ => return Err(bad(format!("unknown dyadic field `{key}`"))),
            }
        }
        Ok(Self {
            height: height.ok_or_else(|| bad("dyadic header lacks N".into()))?,
            breadth: breadth.ok_or_else(|| bad("dyadic header lacks k".into()))?,
            kind: kind.unwrap_or(DyadicKind::Symmetric),
        })
    }
}

#[derive(Debug, Clone)]
pub struct MtxFile {
    pub matrix: DMatrix<f64>,
    pub pattern_only: bool,
    pub dyadic: Option<DyadicHeader>,
    /// Comment lines without the leading `%`, excluding the dyadic header.
    pub comments: Vec<String>,
}

impl MtxFile {
    pub fn graph(&self) -> Result<NeighborGraph> {
        NeighborGraph::from_dense(&self.matrix)
    }
}

pub fn read_matrix_market(reader: impl BufRead) -> Result<MtxFile> {
    let mut lines = reader.lines().enumerate().map(|(n, l)| (n + 1, l));
    let (_, banner) = lines.next().ok_or(Error::Parse { line: 1, detail: "empty file".into() })?;
    let banner = banner?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(Error::Parse { line: 1, detail: format!("bad banner `{banner}`") });
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(Error::Parse { line: 1, detail: format!("unsupported format `{f}`") }),
    };
    let pattern_only = match words[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" if coordinate => true,
        f => return Err(Error::Parse { line: 1, detail: format!("unsupported field `{f}`") }),
    };
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        s => return Err(Error::Parse { line: 1, detail: format!("unsupported symmetry `{s}`") }),
    };

    let mut dyadic = None;
    let mut comments = Vec::new();
    let mut size: Option<(usize, Vec<usize>)> = None;
    let mut values: Vec<(usize, Vec<String>)> = Vec::new();
    for (n, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.starts_with("%%dyadic") {
            dyadic = Some(DyadicHeader::parse(t, n)?);
            continue;
        }
        if let Some(c) = t.strip_prefix('%') {
            comments.push(c.trim().to_string());
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let fields: Vec<String> = t.split_whitespace().map(String::from).collect();
        if size.is_none() {
            let dims = fields
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: n, detail: format!("size line: {e}") })?;
            size = Some((n, dims));
        } else {
            values.push((n, fields));
        }
    }
    let (size_line, dims) = size.ok_or(Error::Parse { line: 0, detail: "missing size line".into() })?;
    let want = if coordinate { 3 } else { 2 };
    if dims.len() != want || dims[0] != dims[1] {
        return Err(Error::Parse { line: size_line, detail: "expected a square matrix".into() });
    }
    let d = dims[0];
    let mut m = DMatrix::zeros(d, d);
    let num = |s: &str, n: usize| -> Result<f64> {
        s.parse().map_err(|e| Error::Parse { line: n, detail: format!("`{s}`: {e}") })
    };
    if coordinate {
        if values.len() != dims[2] {
            return Err(Error::Parse {
                line: size_line,
                detail: format!("declared {} entries, found {}", dims[2], values.len()),
            });
        }
        for (n, f) in &values {
            let need = if pattern_only { 2 } else { 3 };
            if f.len() != need {
                return Err(Error::Parse { line: *n, detail: format!("expected {need} fields") });
            }
            let i = num(&f[0], *n)? as usize;
            let j = num(&f[1], *n)? as usize;
            if i == 0 || j == 0 || i > d || j > d {
                return Err(Error::Parse { line: *n, detail: format!("index ({i}, {j}) out of range") });
            }
            let v = if pattern_only { 1.0 } else { num(&f[2], *n)? };
            m[(i - 1, j - 1)] = v;
            if symmetric {
                m[(j - 1, i - 1)] = v;
            }
        }
    } else {
        let mut it = values.iter();
        for j in 0..d {
            let rows = if symmetric { j..d } else { 0..d };
            for i in rows {
                let (n, f) = it.next().ok_or(Error::Parse { line: size_line, detail: "too few values".into() })?;
                let v = num(&f[0], *n)?;
                m[(i, j)] = v;
                if symmetric {
                    m[(j, i)] = v;
                }
            }
        }
    }
    Ok(MtxFile {
        matrix: m,
        pattern_only,
        dyadic,
        comments,
    })
}

/// Writes a symmetric real matrix in coordinate format, lower triangle only.
/// Exact zeros are skipped.
pub fn write_symmetric(
    mut w: impl Write,
    m: &DMatrix<f64>,
    dyadic: Option<DyadicHeader>,
    comments: &[String],
) -> Result<()> {
    let d = m.nrows();
    let entries: Vec<(usize, usize, f64)> = (0..d)
        .flat_map(|j| (j..d).map(move |i| (i, j)))
        .filter(|&(i, j)| m[(i, j)] != 0.0)
        .map(|(i, j)| (i, j, m[(i, j)]))
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    write_preamble(&mut w, dyadic, comments)?;
    writeln!(w, "{d} {d} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Writes a general real matrix in coordinate format. Exact zeros are skipped.
pub fn write_general(
    mut w: impl Write,
    m: &DMatrix<f64>,
    dyadic: Option<DyadicHeader>,
    comments: &[String],
) -> Result<()> {
    let d = m.nrows();
    let entries: Vec<(usize, usize, f64)> = (0..m.ncols())
        .flat_map(|j| (0..d).map(move |i| (i, j)))
        .filter(|&(i, j)| m[(i, j)] != 0.0)
        .map(|(i, j)| (i, j, m[(i, j)]))
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    write_preamble(&mut w, dyadic, comments)?;
    writeln!(w, "{} {} {}", d, m.ncols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Writes a 0-1 pattern, lower triangle only.
pub fn write_pattern(mut w: impl Write, g: &NeighborGraph, comments: &[String]) -> Result<()> {
    let d = g.dim();
    writeln!(w, "%%MatrixMarket matrix coordinate pattern symmetric")?;
    write_preamble(&mut w, None, comments)?;
    let entries: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| g.neighbors(j).iter().filter(move |&&i| i >= j).map(move |&i| (i, j)))
        .collect();
    writeln!(w, "{d} {d} {}", entries.len())?;
    for (i, j) in entries {
        writeln!(w, "{} {}", i + 1, j + 1)?;
    }
    Ok(())
}

fn write_preamble(w: &mut impl Write, dyadic: Option<DyadicHeader>, comments: &[String]) -> Result<()> {
    if let Some(h) = dyadic {
        writeln!(w, "{}", h.line())?;
    }
    for c in comments {
        for line in c.lines() {
            writeln!(w, "% {line}")?;
        }
    }
    Ok(())
}

/// One 1-based image per line: line `i` holds `π(i) + 1`.
pub fn write_permutation(mut w: impl Write, pi: &Permutation) -> Result<()> {
    for &p in pi.images() {
        writeln!(w, "{}", p + 1)?;
    }
    Ok(())
}

pub fn read_permutation(reader: impl BufRead) -> Result<Permutation> {
    let mut images = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let v: usize = t.parse().map_err(|e| Error::Parse { line: n + 1, detail: format!("`{t}`: {e}") })?;
        if v == 0 {
            return Err(Error::Parse { line: n + 1, detail: "permutation entries are 1-based".into() });
        }
        images.push(v - 1);
    }
    Permutation::new(images)
}
