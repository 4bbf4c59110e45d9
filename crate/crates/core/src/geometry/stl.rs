//! Binary and ASCII STL reading, plus a binary writer.
//!
//! The binary layout is an 80-byte header, a little-endian `u32` facet count
//! and 50 bytes per facet (normal, three vertices as `f32` triples, and a
//! 2-byte attribute word). A file is treated as binary when its length is
//! exactly `84 + 50 * count`; otherwise it must start with `solid` to be
//! parsed as ASCII.

use std::collections::HashMap;

use log::warn;

use super::point::{Aabb, Point3};
use crate::error::{Error, Result};

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
    /// Unit normals recomputed from the vertex winding.
    pub normals: Vec<Point3>,
    /// Facets dropped at parse time because their area was negligible.
    pub dropped_degenerate: usize,
}

impl SurfaceMesh {
    /// Builds a mesh from a triangle soup, merging bitwise-identical vertices
    /// and dropping facets with area below `1e-12 * diag^2`.
    pub fn from_triangles(soup: &[[Point3; 3]]) -> Result<SurfaceMesh> {
        let bbox = Aabb::from_points(soup.iter().flatten()).ok_or(Error::StlEmpty)?;
        let area_tol = 1e-12 * bbox.diagonal().powi(2);

        let mut lookup: HashMap<[u64; 3], usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::with_capacity(soup.len());
        let mut normals = Vec::with_capacity(soup.len());
        let mut dropped = 0;

        for tri in soup {
            if tri.iter().any(|p| !p.is_finite()) {
                dropped += 1;
                continue;
            }
            let n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
            let area = 0.5 * n.norm();
            if area <= area_tol {
                dropped += 1;
                continue;
            }
            let mut ids = [0usize; 3];
            for (slot, p) in ids.iter_mut().zip(tri) {
                let key = [bits(p.x), bits(p.y), bits(p.z)];
                *slot = *lookup.entry(key).or_insert_with(|| {
                    vertices.push(*p);
                    vertices.len() - 1
                });
            }
            triangles.push(ids);
            normals.push(n / n.norm());
        }
        if dropped > 0 {
            warn!("STL: dropped {dropped} degenerate facet(s)");
        }
        if triangles.is_empty() {
            return Err(Error::StlEmpty);
        }
        Ok(SurfaceMesh {
            vertices,
            triangles,
            normals,
            dropped_degenerate: dropped,
        })
    }

    pub fn triangle(&self, t: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices).expect("mesh has vertices")
    }
}

// +0.0 and -0.0 are the same vertex.
fn bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

pub fn parse_stl(bytes: &[u8]) -> Result<SurfaceMesh> {
    if bytes.len() >= HEADER_LEN + 4 {
        let declared = u32::from_le_bytes(bytes[80..84].try_into().unwrap());
        let expected = HEADER_LEN + 4 + RECORD_LEN * declared as usize;
        if expected == bytes.len() {
            return parse_binary(bytes, declared);
        }
        if !starts_with_solid(bytes) {
            return Err(Error::StlTruncated {
                declared,
                expected,
                actual: bytes.len(),
            });
        }
    } else if !starts_with_solid(bytes) {
        return Err(Error::StlTruncated {
            declared: 0,
            expected: HEADER_LEN + 4,
            actual: bytes.len(),
        });
    }
    parse_ascii(bytes)
}

fn starts_with_solid(bytes: &[u8]) -> bool {
    let start = bytes
        .iter()
        .position(|b| !b.is_ascii_whitespace())
        .unwrap_or(bytes.len());
    bytes[start..].starts_with(b"solid")
}

fn parse_binary(bytes: &[u8], count: u32) -> Result<SurfaceMesh> {
    if count == 0 {
        return Err(Error::StlEmpty);
    }
    let f = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as f64;
    let soup: Vec<[Point3; 3]> = (0..count as usize)
        .map(|t| {
            // skip the stored normal (12 bytes)
            let base = HEADER_LEN + 4 + t * RECORD_LEN + 12;
            let v = |k: usize| {
                let o = base + 12 * k;
                Point3::new(f(o), f(o + 4), f(o + 8))
            };
            [v(0), v(1), v(2)]
        })
        .collect();
    SurfaceMesh::from_triangles(&soup)
}

fn parse_ascii(bytes: &[u8]) -> Result<SurfaceMesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::StlSyntax {
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        message: "invalid UTF-8".into(),
    })?;

    #[derive(PartialEq, Clone, Copy, Debug)]
    enum State {
        Start,
        InSolid,
        InFacet,
        InLoop(usize),
        LoopDone,
        Done,
    }

    let mut state = State::Start;
    let mut soup = Vec::new();
    let mut current = [Point3::ORIGIN; 3];

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let mut tok = line.split_whitespace();
        let Some(head) = tok.next() else { continue };
        let err = |message: String| Error::StlSyntax { line: lineno, message };
        state = match (state, head) {
            (State::Start, "solid") => State::InSolid,
            (State::InSolid, "facet") => {
                if tok.next() != Some("normal") {
                    return Err(err("expected `facet normal`".into()));
                }
                State::InFacet
            }
            (State::InSolid, "endsolid") => State::Done,
            (State::InFacet, "outer") => {
                if tok.next() != Some("loop") {
                    return Err(err("expected `outer loop`".into()));
                }
                State::InLoop(0)
            }
            (State::InLoop(k), "vertex") if k < 3 => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let t = tok.next().ok_or_else(|| err("vertex needs 3 coordinates".into()))?;
                    *slot = t.parse::<f64>().map_err(|_| err(format!("bad coordinate `{t}`")))?;
                }
                current[k] = Point3::from_array(c);
                State::InLoop(k + 1)
            }
            (State::InLoop(3), "endloop") => State::LoopDone,
            (State::LoopDone, "endfacet") => {
                soup.push(current);
                State::InSolid
            }
            (State::Done, _) => break,
            (s, other) => return Err(err(format!("unexpected `{other}` ({s:?})"))),
        };
    }
    if state != State::Done && state != State::InSolid {
        return Err(Error::StlSyntax {
            line: text.lines().count(),
            message: "unexpected end of file".into(),
        });
    }
    if soup.is_empty() {
        return Err(Error::StlEmpty);
    }
    SurfaceMesh::from_triangles(&soup)
}

/// Serializes a mesh as binary STL with recomputed facet normals.
pub fn write_binary_stl(mesh: &SurfaceMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + RECORD_LEN * mesh.triangles.len());
    let mut header = [0u8; HEADER_LEN];
    let tag = b"mfd3d binary stl";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for (t, n) in mesh.normals.iter().enumerate() {
        let mut push = |p: Point3| {
            for c in p.to_array() {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        };
        push(*n);
        for p in mesh.triangle(t) {
            push(p);
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}
