//! Reading and writing polyhedra in the OFF text format.
//!
//! ```text
//! OFF
//! <#vertices> <#faces> <#edges>
//! x y z            (one line per vertex)
//! n i0 i1 … in-1   (one line per face, counter-clockwise from outside)
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::geometry::{GeometryError, Polyhedron, Vec3};

#[derive(Debug, Error)]
pub enum OffError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("missing OFF header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unexpected end of input: expected {0}")]
    Truncated(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub fn parse_off(text: &str, planarity_tol: f64) -> Result<Polyhedron, OffError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (_, header) = lines.next().ok_or(OffError::MissingHeader)?;
    // Some writers put the counts on the header line.
    let mut counts_inline = None;
    if let Some(rest) = header.strip_prefix("OFF") {
        if !rest.trim().is_empty() {
            counts_inline = Some(rest.trim().to_string());
        }
    } else {
        return Err(OffError::MissingHeader);
    }
    let (count_line, counts) = match counts_inline {
        Some(c) => (1, c),
        None => {
            let (n, l) = lines.next().ok_or(OffError::Truncated("counts line"))?;
            (n, l.to_string())
        }
    };
    let nums = parse_numbers::<usize>(&counts, count_line)?;
    if nums.len() < 2 {
        return Err(OffError::Parse {
            line: count_line,
            message: "expected vertex and face counts".into(),
        });
    }
    let (nv, nf) = (nums[0], nums[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines.next().ok_or(OffError::Truncated("vertex line"))?;
        let c = parse_numbers::<f64>(l, n)?;
        if c.len() < 3 {
            return Err(OffError::Parse {
                line: n,
                message: "vertex needs three coordinates".into(),
            });
        }
        vertices.push(Vec3::new(c[0], c[1], c[2]));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = lines.next().ok_or(OffError::Truncated("face line"))?;
        let idx = parse_numbers::<usize>(l, n)?;
        let Some((&len, rest)) = idx.split_first() else {
            return Err(OffError::Parse {
                line: n,
                message: "empty face line".into(),
            });
        };
        if rest.len() < len {
            return Err(OffError::Parse {
                line: n,
                message: format!("face declares {len} vertices but lists {}", rest.len()),
            });
        }
        faces.push(rest[..len].to_vec());
    }
    Ok(Polyhedron::new(vertices, faces, planarity_tol)?)
}

pub fn read_off(path: impl AsRef<Path>, planarity_tol: f64) -> Result<Polyhedron, OffError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| OffError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_off(&text, planarity_tol)
}

pub fn to_off(poly: &Polyhedron) -> String {
    let mut out = String::new();
    let edges: usize = poly.faces().iter().map(|f| f.len()).sum::<usize>() / 2;
    let _ = writeln!(
        out,
        "OFF\n{} {} {}",
        poly.vertices().len(),
        poly.faces().len(),
        edges
    );
    for v in poly.vertices() {
        let _ = writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for f in poly.faces() {
        let _ = write!(out, "{}", f.len());
        for i in f.indices() {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

fn parse_numbers<T: std::str::FromStr>(line: &str, n: usize) -> Result<Vec<T>, OffError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| OffError::Parse {
                line: n,
                message: format!("cannot parse '{tok}'"),
            })
        })
        .collect()
}
