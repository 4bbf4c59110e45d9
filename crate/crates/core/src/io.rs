//! Plain-text node, tetrahedral mesh and stencil files.
//!
//! Node file: a header `N_int N_bnd`, then `N_int` interior and `N_bnd`
//! boundary lines `x y z`. Tet mesh file: a header `NV NT`, then `NV` vertex
//! lines `x y z [b]` with an optional boundary flag `b` in {0, 1}, then `NT`
//! lines of four 0-based vertex indices. Coordinates are written with the
//! shortest representation that reads back to the same double.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{NodeSet, Point3, TetMesh};
use crate::weights::WeightedStencil;

struct Lines<R> {
    inner: std::io::Lines<BufReader<R>>,
    path: PathBuf,
    line: usize,
}

impl<R: Read> Lines<R> {
    fn new(reader: R, path: &Path) -> Self {
        Lines {
            inner: BufReader::new(reader).lines(),
            path: path.to_path_buf(),
            line: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    /// Next line that is not blank, split into fields.
    fn next_fields(&mut self, what: &str) -> Result<Vec<String>> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => return Err(self.error(format!("unexpected end of file, expected {what}"))),
                Some(Err(e)) => return Err(Error::io(&self.path, e)),
                Some(Ok(text)) => {
                    let fields: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
                    if !fields.is_empty() {
                        return Ok(fields);
                    }
                }
            }
        }
    }

    fn parse<T: std::str::FromStr>(&self, field: &str, what: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.error(format!("invalid {what} '{field}'")))
    }

    fn point(&self, fields: &[String]) -> Result<Point3> {
        let p = Point3::new(
            self.parse(&fields[0], "coordinate")?,
            self.parse(&fields[1], "coordinate")?,
            self.parse(&fields[2], "coordinate")?,
        );
        if !p.is_finite() {
            return Err(self.error("non-finite coordinate"));
        }
        Ok(p)
    }

    fn expect_end(&mut self) -> Result<()> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => return Ok(()),
                Some(Err(e)) => return Err(Error::io(&self.path, e)),
                Some(Ok(text)) if text.trim().is_empty() => {}
                Some(Ok(_)) => return Err(self.error("more lines than the header declares")),
            }
        }
    }
}

pub fn read_nodes_from(reader: impl Read, path: &Path) -> Result<NodeSet> {
    let mut lines = Lines::new(reader, path);
    let header = lines.next_fields("header 'N_int N_bnd'")?;
    if header.len() != 2 {
        return Err(lines.error("header must be 'N_int N_bnd'"));
    }
    let n_int: usize = lines.parse(&header[0], "count")?;
    let n_bnd: usize = lines.parse(&header[1], "count")?;
    let mut points = Vec::with_capacity(n_int + n_bnd);
    for _ in 0..n_int + n_bnd {
        let f = lines.next_fields("a point line 'x y z'")?;
        if f.len() != 3 {
            return Err(lines.error(format!("expected 3 coordinates, found {}", f.len())));
        }
        points.push(lines.point(&f)?);
    }
    lines.expect_end()?;
    let boundary = points.split_off(n_int);
    Ok(NodeSet::new(points, boundary))
}

pub fn read_nodes(path: impl AsRef<Path>) -> Result<NodeSet> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_nodes_from(file, path)
}

pub fn write_nodes_to(mut out: impl Write, nodes: &NodeSet) -> std::io::Result<()> {
    writeln!(out, "{} {}", nodes.n_interior(), nodes.n_boundary())?;
    for p in nodes.points() {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    out.flush()
}

pub fn write_nodes(path: impl AsRef<Path>, nodes: &NodeSet) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_nodes_to(BufWriter::new(file), nodes).map_err(|e| Error::io(path, e))
}

pub fn read_tetmesh_from(reader: impl Read, path: &Path) -> Result<TetMesh> {
    let mut lines = Lines::new(reader, path);
    let header = lines.next_fields("header 'NV NT'")?;
    if header.len() != 2 {
        return Err(lines.error("header must be 'NV NT'"));
    }
    let nv: usize = lines.parse(&header[0], "count")?;
    let nt: usize = lines.parse(&header[1], "count")?;
    let mut vertices = Vec::with_capacity(nv);
    let mut boundary = Vec::with_capacity(nv);
    for _ in 0..nv {
        let f = lines.next_fields("a vertex line 'x y z [b]'")?;
        if f.len() != 3 && f.len() != 4 {
            return Err(lines.error(format!("expected 3 or 4 fields, found {}", f.len())));
        }
        vertices.push(lines.point(&f)?);
        boundary.push(match f.get(3).map(String::as_str) {
            None | Some("0") => false,
            Some("1") => true,
            Some(other) => return Err(lines.error(format!("boundary flag must be 0 or 1, got '{other}'"))),
        });
    }
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let f = lines.next_fields("a tetrahedron line 'a b c d'")?;
        if f.len() != 4 {
            return Err(lines.error(format!("expected 4 vertex indices, found {}", f.len())));
        }
        let mut tet = [0usize; 4];
        for (slot, field) in tet.iter_mut().zip(&f) {
            *slot = lines.parse(field, "vertex index")?;
            if *slot >= nv {
                return Err(lines.error(format!("vertex index {slot} out of range")));
            }
        }
        tets.push(tet);
    }
    lines.expect_end()?;
    TetMesh::new(vertices, tets, boundary)
}

pub fn read_tetmesh(path: impl AsRef<Path>) -> Result<TetMesh> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tetmesh_from(file, path)
}

pub fn write_tetmesh_to(mut out: impl Write, mesh: &TetMesh) -> std::io::Result<()> {
    writeln!(out, "{} {}", mesh.vertices.len(), mesh.tets.len())?;
    for (p, &b) in mesh.vertices.iter().zip(&mesh.boundary) {
        writeln!(out, "{} {} {} {}", p.x, p.y, p.z, u8::from(b))?;
    }
    for t in &mesh.tets {
        writeln!(out, "{} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    out.flush()
}

/// Nodes of a tet mesh: unflagged vertices are interior, flagged ones
/// boundary. Returns the node set and the node index of every vertex.
pub fn nodes_from_tetmesh(mesh: &TetMesh) -> (NodeSet, Vec<usize>) {
    let n_int = mesh.boundary.iter().filter(|&&b| !b).count();
    let (mut next_int, mut next_bnd) = (0, n_int);
    let mut map = Vec::with_capacity(mesh.vertices.len());
    let mut interior = Vec::with_capacity(n_int);
    let mut boundary = Vec::new();
    for (&p, &b) in mesh.vertices.iter().zip(&mesh.boundary) {
        if b {
            map.push(next_bnd);
            next_bnd += 1;
            boundary.push(p);
        } else {
            map.push(next_int);
            next_int += 1;
            interior.push(p);
        }
    }
    (NodeSet::new(interior, boundary), map)
}

/// One line per stencil: `center k members... weights...`.
pub fn write_stencils_to(mut out: impl Write, stencils: &[WeightedStencil]) -> std::io::Result<()> {
    for st in stencils {
        write!(out, "{} {}", st.center(), st.len())?;
        for m in &st.set.members {
            write!(out, " {m}")?;
        }
        for w in &st.weights {
            write!(out, " {w}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_round_trip_bitwise() {
        let nodes = NodeSet::new(
            vec![Point3::new(0.1, 1.0 / 3.0, -2e-300), Point3::new(1e17, -0.0, 5.0)],
            vec![Point3::new(std::f64::consts::PI, 0.0, 1.0)],
        );
        let mut buf = Vec::new();
        write_nodes_to(&mut buf, &nodes).unwrap();
        let back = read_nodes_from(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back.n_interior(), 2);
        for (a, b) in nodes.points().zip(back.points()) {
            assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
        }
    }

    #[test]
    fn count_mismatch_names_the_line() {
        let text = "2 1\n0 0 0\n1 1 1\n";
        match read_nodes_from(text.as_bytes(), Path::new("n.txt")) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "1 0\n0 0 0\n1 1 1\n";
        assert!(matches!(
            read_nodes_from(text.as_bytes(), Path::new("n.txt")),
            Err(Error::Format { line: 3, .. })
        ));
        let text = "1 0\n0 zero 0\n";
        assert!(matches!(
            read_nodes_from(text.as_bytes(), Path::new("n.txt")),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn tetmesh_round_trip() {
        let text = "5 2\n0 0 0 1\n1 0 0 1\n0 1 0 1\n0 0 1 1\n0.2 0.2 0.2\n0 1 2 3\n0 1 2 4\n";
        let mesh = read_tetmesh_from(text.as_bytes(), Path::new("m")).unwrap();
        assert_eq!(mesh.tets.len(), 2);
        assert_eq!(mesh.boundary, vec![true, true, true, true, false]);
        let mut buf = Vec::new();
        write_tetmesh_to(&mut buf, &mesh).unwrap();
        let again = read_tetmesh_from(&buf[..], Path::new("m")).unwrap();
        assert_eq!(again, mesh);
        let (nodes, map) = nodes_from_tetmesh(&mesh);
        assert_eq!((nodes.n_interior(), nodes.n_boundary()), (1, 4));
        assert_eq!(map, vec![1, 2, 3, 4, 0]);
    }

    #[test]
    fn tetmesh_bad_index() {
        let text = "4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 9\n";
        assert!(matches!(
            read_tetmesh_from(text.as_bytes(), Path::new("m")),
            Err(Error::Format { line: 6, .. })
        ));
    }
}
