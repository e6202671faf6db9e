//! Text mesh formats.
//!
//! * `obj`: the `v x y z` / `f a b c` subset of Wavefront OBJ (triangles only).
//!   Texture/normal references in face tokens (`a/t/n`) are accepted and
//!   dropped; other record types are ignored.
//! * `poly2d`: oriented 2D polylines, `v x y` and `s i j` records with
//!   1-based indices and `#` comments.
//!
//! Both writers use 17 significant digits so coordinates round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Dimension, SurfaceMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Poly2d,
}

impl MeshFormat {
    /// Guesses the format from a file extension; anything but `.obj` is poly2d.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("obj") => MeshFormat::Obj,
            _ => MeshFormat::Poly2d,
        }
    }

    pub fn for_dimension(d: Dimension) -> Self {
        match d {
            Dimension::Two => MeshFormat::Poly2d,
            Dimension::Three => MeshFormat::Obj,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "poly2d" => Ok(MeshFormat::Poly2d),
            other => Err(Error::Config(format!("unknown mesh format '{other}'"))),
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_mesh(&text, format)
}

/// Writes `mesh` in the format matching its dimension.
pub fn save_mesh(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_mesh(mesh)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_mesh(text: &str, format: MeshFormat) -> Result<SurfaceMesh> {
    match format {
        MeshFormat::Obj => parse_obj(text),
        MeshFormat::Poly2d => parse_poly2d(text),
    }
}

pub fn format_mesh(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    match mesh.dimension() {
        Dimension::Two => {
            for v in mesh.vertices() {
                writeln!(out, "v {:.16e} {:.16e}", v.x, v.y).unwrap();
            }
            for f in mesh.facets() {
                writeln!(out, "s {} {}", f[0] + 1, f[1] + 1).unwrap();
            }
        }
        Dimension::Three => {
            for v in mesh.vertices() {
                writeln!(out, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z).unwrap();
            }
            for f in mesh.facets() {
                writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
            }
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_coords(tokens: &[&str], want: usize, line: usize) -> Result<Vec<f64>> {
    if tokens.len() < want {
        return Err(parse_err(
            line,
            format!("expected {want} coordinates, got {}", tokens.len()),
        ));
    }
    tokens[..want]
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad coordinate '{t}'")))
        })
        .collect()
}

/// Resolves a 1-based (or negative, relative) index into a 0-based one.
fn parse_index(token: &str, num_vertices: usize, line: usize) -> Result<usize> {
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head
        .parse()
        .map_err(|_| parse_err(line, format!("bad index '{token}'")))?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        num_vertices as i64 + raw
    } else {
        return Err(parse_err(line, "index 0 is not valid (indices are 1-based)"));
    };
    if idx < 0 {
        return Err(Error::IndexOutOfRange {
            index: 0,
            len: num_vertices,
        });
    }
    Ok(idx as usize)
}

fn parse_obj(text: &str) -> Result<SurfaceMesh> {
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let rest: Vec<&str> = tokens.collect();
        match tag {
            "v" => {
                let c = parse_coords(&rest, 3, line)?;
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            "f" => {
                if rest.len() != 3 {
                    return Err(parse_err(
                        line,
                        format!("only triangles are supported, got {} indices", rest.len()),
                    ));
                }
                let f = rest
                    .iter()
                    .map(|t| parse_index(t, vertices.len(), line))
                    .collect::<Result<Vec<_>>>()?;
                facets.push(f);
            }
            "vn" | "vt" | "vp" | "o" | "g" | "s" | "l" | "usemtl" | "mtllib" => {}
            other => return Err(parse_err(line, format!("unknown record '{other}'"))),
        }
    }
    SurfaceMesh::new(Dimension::Three, vertices, facets)
}

fn parse_poly2d(text: &str) -> Result<SurfaceMesh> {
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let rest: Vec<&str> = tokens.collect();
        match tag {
            "v" => {
                if rest.len() != 2 {
                    return Err(parse_err(line, "poly2d vertices take exactly 2 coordinates"));
                }
                let c = parse_coords(&rest, 2, line)?;
                vertices.push(Vec3::new(c[0], c[1], 0.0));
            }
            "s" => {
                if rest.len() != 2 {
                    return Err(parse_err(line, "segments take exactly 2 indices"));
                }
                let f = rest
                    .iter()
                    .map(|t| parse_index(t, vertices.len(), line))
                    .collect::<Result<Vec<_>>>()?;
                facets.push(f);
            }
            other => return Err(parse_err(line, format!("unknown record '{other}'"))),
        }
    }
    SurfaceMesh::new(Dimension::Two, vertices, facets)
}
