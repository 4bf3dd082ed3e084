//! Triangle-mesh representation, file I/O, and derived geometric quantities.
//!
//! [`TriMesh`] is immutable after construction: normals, per-face areas and
//! the interior-edge list are computed once in [`TriMesh::new`] and shared
//! freely across threads afterwards. Geodesic distances are graph distances
//! (Dijkstra over mesh edges), which overestimate the true surface metric by
//! a small mesh-dependent factor; evaluation thresholds account for this.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: non-triangular face with {count} vertices")]
    NonTriangularFace {
        path: String,
        line: usize,
        count: usize,
    },
    #[error("{path}: empty mesh")]
    Empty { path: String },
    #[error("face {face} repeats vertex index {vertex}")]
    DegenerateFace { face: usize, vertex: usize },
    #[error("face {face} references vertex {vertex}, but the mesh has {n} vertices")]
    IndexOutOfRange { face: usize, vertex: usize, n: usize },
    #[error("face {face} has zero area")]
    ZeroAreaFace { face: usize },
    #[error("edge ({a}, {b}) has zero length")]
    ZeroLengthEdge { a: usize, b: usize },
    #[error("unsupported mesh format {0:?}")]
    UnknownFormat(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Mesh file formats understood by [`load_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    PlyAscii,
}

impl MeshFormat {
    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self, MeshError> {
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        match ext.as_str() {
            "off" => Ok(MeshFormat::Off),
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::PlyAscii),
            other => Err(MeshError::UnknownFormat(other.to_string())),
        }
    }
}

/// An interior edge shared by exactly two faces.
#[derive(Debug, Clone, Copy)]
pub struct InteriorEdge {
    /// Endpoint vertex indices, lower index first.
    pub verts: [usize; 2],
    /// The two incident faces.
    pub faces: [usize; 2],
    /// Squared Euclidean length of the edge.
    pub len_sq: f64,
}

/// Immutable triangle mesh with derived geometry.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
    face_normals: Vec<[f64; 3]>,
    vertex_normals: Vec<[f64; 3]>,
    face_areas: Vec<f64>,
    interior_edges: Vec<InteriorEdge>,
    boundary_edge_count: usize,
    vertex_faces: Vec<Vec<usize>>,
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

impl TriMesh {
    /// Build a mesh and all derived quantities from raw vertex and face data.
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        if n == 0 || faces.is_empty() {
            return Err(MeshError::Empty {
                path: "<memory>".into(),
            });
        }
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(MeshError::IndexOutOfRange { face: fi, vertex: v, n });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                let repeated = if f[0] == f[1] || f[0] == f[2] { f[0] } else { f[1] };
                return Err(MeshError::DegenerateFace { face: fi, vertex: repeated });
            }
        }

        let mut face_normals = Vec::with_capacity(faces.len());
        let mut face_areas = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let e1 = sub3(vertices[f[1]], vertices[f[0]]);
            let e2 = sub3(vertices[f[2]], vertices[f[0]]);
            let c = cross3(e1, e2);
            let twice_area = norm3(c);
            if twice_area == 0.0 {
                return Err(MeshError::ZeroAreaFace { face: fi });
            }
            face_areas.push(0.5 * twice_area);
            face_normals.push([c[0] / twice_area, c[1] / twice_area, c[2] / twice_area]);
        }

        let mut vertex_faces = vec![Vec::new(); n];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }

        // Area-weighted vertex normals. Vertices without incident faces keep
        // a zero normal.
        let mut vertex_normals = vec![[0.0; 3]; n];
        for (fi, f) in faces.iter().enumerate() {
            let w = face_areas[fi];
            for &v in f {
                for c in 0..3 {
                    vertex_normals[v][c] += w * face_normals[fi][c];
                }
            }
        }
        for vn in vertex_normals.iter_mut() {
            let len = norm3(*vn);
            if len > 0.0 {
                for c in vn.iter_mut() {
                    *c /= len;
                }
            }
        }

        // Edge classification. BTreeMap keeps construction deterministic.
        let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                let key = (a.min(b), a.max(b));
                edge_faces.entry(key).or_default().push(fi);
            }
        }
        let mut interior_edges = Vec::new();
        let mut boundary_edge_count = 0;
        for (&(a, b), incident) in &edge_faces {
            match incident.len() {
                1 => boundary_edge_count += 1,
                2 => {
                    let d = sub3(vertices[b], vertices[a]);
                    interior_edges.push(InteriorEdge {
                        verts: [a, b],
                        faces: [incident[0], incident[1]],
                        len_sq: dot3(d, d),
                    });
                }
                k => {
                    log::warn!("edge ({a}, {b}) is non-manifold ({k} incident faces); excluded from the interior-edge list");
                }
            }
        }

        Ok(TriMesh {
            vertices,
            faces,
            face_normals,
            vertex_normals,
            face_areas,
            interior_edges,
            boundary_edge_count,
            vertex_faces,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_normals(&self) -> &[[f64; 3]] {
        &self.face_normals
    }

    pub fn vertex_normals(&self) -> &[[f64; 3]] {
        &self.vertex_normals
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn interior_edges(&self) -> &[InteriorEdge] {
        &self.interior_edges
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.boundary_edge_count
    }

    /// Faces incident to each vertex.
    pub fn vertex_faces(&self) -> &[Vec<usize>] {
        &self.vertex_faces
    }

    pub fn face_centroid(&self, fi: usize) -> [f64; 3] {
        let f = self.faces[fi];
        let mut c = [0.0; 3];
        for &v in &f {
            for k in 0..3 {
                c[k] += self.vertices[v][k];
            }
        }
        [c[0] / 3.0, c[1] / 3.0, c[2] / 3.0]
    }

    /// Returns a copy with vertices transformed by `f`; connectivity is shared.
    pub fn map_vertices(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<TriMesh, MeshError> {
        TriMesh::new(self.vertices.iter().map(|&v| f(v)).collect(), self.faces.clone())
    }
}

/// Sum of per-face areas.
pub fn total_surface_area(mesh: &TriMesh) -> f64 {
    mesh.face_areas().iter().sum()
}

/// Undirected vertex adjacency with Euclidean edge lengths.
#[derive(Debug, Clone)]
pub struct EdgeGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl EdgeGraph {
    pub fn from_mesh(mesh: &TriMesh) -> Result<Self, MeshError> {
        let n = mesh.n_vertices();
        let mut seen: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for f in mesh.faces() {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                let key = (a.min(b), a.max(b));
                let len = norm3(sub3(mesh.vertices()[b], mesh.vertices()[a]));
                if len == 0.0 {
                    return Err(MeshError::ZeroLengthEdge { a: key.0, b: key.1 });
                }
                seen.entry(key).or_insert(len);
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (&(a, b), &len) in &seen {
            adjacency[a].push((b, len));
            adjacency[b].push((a, len));
        }
        Ok(EdgeGraph { adjacency })
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    /// Dijkstra shortest-path distances from `source` to every vertex.
    /// Unreachable vertices get `f64::INFINITY`.
    pub fn distances(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                // Min-heap on distance, ties broken by vertex index.
                other
                    .0
                    .partial_cmp(&self.0)
                    .unwrap_or(Ordering::Equal)
                    .then(other.1.cmp(&self.1))
            }
        }

        let n = self.adjacency.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry(0.0, source));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Entry(nd, v));
                }
            }
        }
        dist
    }
}

/// Graph-geodesic distances from one source vertex.
pub fn geodesic_distances(mesh: &TriMesh, source: usize) -> Result<Vec<f64>, MeshError> {
    Ok(EdgeGraph::from_mesh(mesh)?.distances(source))
}

/// Load a mesh, guessing the format from the file extension.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)?;
    load_mesh_format(path, format)
}

/// Load a mesh in an explicit format.
pub fn load_mesh_format(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path.display().to_string();
    match format {
        MeshFormat::Off => parse_off(&name, &text),
        MeshFormat::Obj => parse_obj(&name, &text),
        MeshFormat::PlyAscii => parse_ply_ascii(&name, &text),
    }
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Lines of the input paired with their 1-based line numbers, comments and
/// blanks removed. `comment` is the comment prefix ('#' for OFF/OBJ/PLY).
fn content_lines<'a>(text: &'a str, comment: char) -> impl Iterator<Item = (usize, &'a str)> {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = match raw.find(comment) {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_off(path: &str, text: &str) -> Result<TriMesh, MeshError> {
    let mut lines = content_lines(text, '#');
    let (hline, header) = lines
        .next()
        .ok_or_else(|| MeshError::Empty { path: path.into() })?;
    // The counts may share the header line ("OFF 8 12 18") or follow it.
    let mut counts_fields: Vec<&str>;
    if let Some(rest) = header.strip_prefix("OFF") {
        counts_fields = rest.split_whitespace().collect();
    } else {
        return Err(parse_err(path, hline, "expected OFF header"));
    }
    let counts_line;
    if counts_fields.is_empty() {
        let (cline, counts) = lines
            .next()
            .ok_or_else(|| parse_err(path, hline, "missing vertex/face counts"))?;
        counts_fields = counts.split_whitespace().collect();
        counts_line = cline;
    } else {
        counts_line = hline;
    }
    if counts_fields.len() < 2 {
        return Err(parse_err(path, counts_line, "expected counts: n_vertices n_faces [n_edges]"));
    }
    let nv: usize = counts_fields[0]
        .parse()
        .map_err(|_| parse_err(path, counts_line, "bad vertex count"))?;
    let nf: usize = counts_fields[1]
        .parse()
        .map_err(|_| parse_err(path, counts_line, "bad face count"))?;
    if nv == 0 || nf == 0 {
        return Err(MeshError::Empty { path: path.into() });
    }

    let mut vertices = Vec::with_capacity(nv);
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nv {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, counts_line, "unexpected end of file in vertex list"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(parse_err(path, lno, "expected 3 vertex coordinates"));
        }
        let mut v = [0.0; 3];
        for (k, out) in v.iter_mut().enumerate() {
            *out = fields[k]
                .parse()
                .map_err(|_| parse_err(path, lno, format!("bad coordinate {:?}", fields[k])))?;
        }
        vertices.push(v);
    }
    for _ in 0..nf {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, counts_line, "unexpected end of file in face list"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let count: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lno, "bad face vertex count"))?;
        if count != 3 {
            return Err(MeshError::NonTriangularFace {
                path: path.into(),
                line: lno,
                count,
            });
        }
        if fields.len() < 4 {
            return Err(parse_err(path, lno, "truncated face record"));
        }
        let mut f = [0usize; 3];
        for (k, out) in f.iter_mut().enumerate() {
            *out = fields[k + 1]
                .parse()
                .map_err(|_| parse_err(path, lno, format!("bad vertex index {:?}", fields[k + 1])))?;
        }
        faces.push(f);
    }
    TriMesh::new(vertices, faces)
}

fn parse_obj(path: &str, text: &str) -> Result<TriMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lno, line) in content_lines(text, '#') {
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                if coords.len() < 3 {
                    return Err(parse_err(path, lno, "expected 3 vertex coordinates"));
                }
                let mut v = [0.0; 3];
                for (k, out) in v.iter_mut().enumerate() {
                    *out = coords[k]
                        .parse()
                        .map_err(|_| parse_err(path, lno, format!("bad coordinate {:?}", coords[k])))?;
                }
                vertices.push(v);
            }
            Some("f") => {
                let refs: Vec<&str> = fields.collect();
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangularFace {
                        path: path.into(),
                        line: lno,
                        count: refs.len(),
                    });
                }
                let mut f = [0usize; 3];
                for (k, r) in refs.iter().enumerate() {
                    let idx_str = r.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str
                        .parse()
                        .map_err(|_| parse_err(path, lno, format!("bad vertex reference {r:?}")))?;
                    if idx < 1 {
                        return Err(parse_err(path, lno, "vertex references must be positive 1-based indices"));
                    }
                    f[k] = (idx - 1) as usize;
                }
                faces.push(f);
            }
            _ => {} // ignore vn/vt/usemtl/...
        }
    }
    if vertices.is_empty() || faces.is_empty() {
        return Err(MeshError::Empty { path: path.into() });
    }
    TriMesh::new(vertices, faces)
}

fn parse_ply_ascii(path: &str, text: &str) -> Result<TriMesh, MeshError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (l1, magic) = lines
        .next()
        .ok_or_else(|| MeshError::Empty { path: path.into() })?;
    if magic != "ply" {
        return Err(parse_err(path, l1, "expected 'ply' magic"));
    }

    let mut nv = 0usize;
    let mut nf = 0usize;
    // Column positions of x/y/z among the vertex properties.
    let mut xyz_cols = [usize::MAX; 3];
    let mut vertex_prop_count = 0usize;
    let mut current_element = String::new();
    let mut header_end = 0usize;
    for (lno, line) in lines.by_ref() {
        if line.is_empty() || line.starts_with("comment") {
            continue;
        }
        if line == "end_header" {
            header_end = lno;
            break;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "format" => {
                if fields.get(1) != Some(&"ascii") {
                    return Err(parse_err(path, lno, "only ascii PLY is supported"));
                }
            }
            "element" => {
                current_element = fields.get(1).unwrap_or(&"").to_string();
                let count: usize = fields
                    .get(2)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(path, lno, "bad element count"))?;
                match current_element.as_str() {
                    "vertex" => nv = count,
                    "face" => nf = count,
                    _ => {}
                }
            }
            "property" => {
                if current_element == "vertex" && fields.get(1) != Some(&"list") {
                    let name = *fields.last().unwrap_or(&"");
                    match name {
                        "x" => xyz_cols[0] = vertex_prop_count,
                        "y" => xyz_cols[1] = vertex_prop_count,
                        "z" => xyz_cols[2] = vertex_prop_count,
                        _ => {}
                    }
                    vertex_prop_count += 1;
                }
            }
            _ => {}
        }
    }
    if header_end == 0 {
        return Err(parse_err(path, l1, "missing end_header"));
    }
    if nv == 0 || nf == 0 {
        return Err(MeshError::Empty { path: path.into() });
    }
    if xyz_cols.contains(&usize::MAX) {
        return Err(parse_err(path, header_end, "vertex element lacks x/y/z properties"));
    }

    let mut data = lines.filter(|(_, l)| !l.is_empty());
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (lno, line) = data
            .next()
            .ok_or_else(|| parse_err(path, header_end, "unexpected end of file in vertex list"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < vertex_prop_count {
            return Err(parse_err(path, lno, "too few vertex properties"));
        }
        let mut v = [0.0; 3];
        for k in 0..3 {
            v[k] = fields[xyz_cols[k]]
                .parse()
                .map_err(|_| parse_err(path, lno, format!("bad coordinate {:?}", fields[xyz_cols[k]])))?;
        }
        vertices.push(v);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (lno, line) = data
            .next()
            .ok_or_else(|| parse_err(path, header_end, "unexpected end of file in face list"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let count: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lno, "bad face vertex count"))?;
        if count != 3 {
            return Err(MeshError::NonTriangularFace {
                path: path.into(),
                line: lno,
                count,
            });
        }
        if fields.len() < 4 {
            return Err(parse_err(path, lno, "truncated face record"));
        }
        let mut f = [0usize; 3];
        for (k, out) in f.iter_mut().enumerate() {
            *out = fields[k + 1]
                .parse()
                .map_err(|_| parse_err(path, lno, format!("bad vertex index {:?}", fields[k + 1])))?;
        }
        faces.push(f);
    }
    TriMesh::new(vertices, faces)
}

/// Write vertices and faces as ASCII OFF. Coordinates use Rust's shortest
/// round-trip float formatting, so a reload reproduces them bit-identically.
pub fn save_off(path: impl AsRef<Path>, vertices: &[[f64; 3]], faces: &[[usize; 3]]) -> Result<(), MeshError> {
    write_off_impl(path.as_ref(), vertices, faces, None)
}

/// Write a colored ASCII OFF (COFF) with one RGB triple per vertex.
pub fn save_off_colored(
    path: impl AsRef<Path>,
    vertices: &[[f64; 3]],
    faces: &[[usize; 3]],
    colors: &[[u8; 3]],
) -> Result<(), MeshError> {
    write_off_impl(path.as_ref(), vertices, faces, Some(colors))
}

fn write_off_impl(
    path: &Path,
    vertices: &[[f64; 3]],
    faces: &[[usize; 3]],
    colors: Option<&[[u8; 3]]>,
) -> Result<(), MeshError> {
    let io_err = |source| MeshError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = String::new();
    out.push_str(if colors.is_some() { "COFF\n" } else { "OFF\n" });
    out.push_str(&format!("{} {} 0\n", vertices.len(), faces.len()));
    for (i, v) in vertices.iter().enumerate() {
        out.push_str(&format!("{} {} {}", v[0], v[1], v[2]));
        if let Some(cols) = colors {
            let c = cols[i];
            out.push_str(&format!(" {} {} {} 255", c[0], c[1], c[2]));
        }
        out.push('\n');
    }
    for f in faces {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)?;
    Ok(())
}
