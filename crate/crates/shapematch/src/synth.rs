//! Procedural mesh generation for demos and tests.
//!
//! Everything here is deterministic: the same call always produces the same
//! mesh, bit for bit.

use std::collections::BTreeMap;

use crate::mesh::TriMesh;

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / len, v[1] / len, v[2] / len]
}

/// Icosphere: a subdivided icosahedron projected onto the sphere of the given
/// radius. Subdivision level 3 yields 642 vertices and 1280 faces.
pub fn icosphere(subdivisions: usize, radius: f64) -> TriMesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize3)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mids = [0usize; 3];
            for (k, (a, b)) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])].into_iter().enumerate() {
                let key = (a.min(b), a.max(b));
                mids[k] = *midpoint.entry(key).or_insert_with(|| {
                    let va = vertices[a];
                    let vb = vertices[b];
                    vertices.push(normalize3([
                        0.5 * (va[0] + vb[0]),
                        0.5 * (va[1] + vb[1]),
                        0.5 * (va[2] + vb[2]),
                    ]));
                    vertices.len() - 1
                });
            }
            new_faces.push([f[0], mids[0], mids[2]]);
            new_faces.push([f[1], mids[1], mids[0]]);
            new_faces.push([f[2], mids[2], mids[1]]);
            new_faces.push([mids[0], mids[1], mids[2]]);
        }
        faces = new_faces;
    }

    let vertices = vertices
        .into_iter()
        .map(|v| [v[0] * radius, v[1] * radius, v[2] * radius])
        .collect();
    TriMesh::new(vertices, faces).expect("icosphere construction is valid")
}

/// Latitude/longitude sphere triangulation with `rows * cols + 2` vertices
/// (two poles). Useful when a specific vertex count is wanted.
pub fn uv_sphere(rows: usize, cols: usize, radius: f64) -> TriMesh {
    assert!(rows >= 2 && cols >= 3);
    let mut vertices = Vec::with_capacity(rows * cols + 2);
    vertices.push([0.0, 0.0, radius]); // north pole
    for i in 1..=rows {
        let theta = std::f64::consts::PI * i as f64 / (rows + 1) as f64;
        for j in 0..cols {
            let lon = 2.0 * std::f64::consts::PI * j as f64 / cols as f64;
            vertices.push([
                radius * theta.sin() * lon.cos(),
                radius * theta.sin() * lon.sin(),
                radius * theta.cos(),
            ]);
        }
    }
    vertices.push([0.0, 0.0, -radius]); // south pole
    let south = vertices.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * cols + (j % cols);

    let mut faces = Vec::new();
    for j in 0..cols {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..rows {
        for j in 0..cols {
            let a = ring(i, j);
            let b = ring(i, j + 1);
            let c = ring(i + 1, j);
            let d = ring(i + 1, j + 1);
            faces.push([a, c, b]);
            faces.push([b, c, d]);
        }
    }
    for j in 0..cols {
        faces.push([south, ring(rows, j + 1), ring(rows, j)]);
    }
    TriMesh::new(vertices, faces).expect("uv sphere construction is valid")
}

/// Smooth asymmetric radial field over the unit sphere: three Gaussian
/// bumps placed so that no reflection or rotation maps the shape to itself.
fn blob_radius(dir: [f64; 3]) -> f64 {
    let bumps = [
        ([0.8, 0.5, 0.33], 0.45, 0.30),
        ([-0.3, 0.9, -0.32], 0.30, 0.18),
        ([0.1, -0.55, 0.83], -0.25, 0.22),
        ([-0.75, -0.4, -0.53], 0.18, 0.35),
    ];
    let mut r = 1.0;
    for (center, amp, width) in bumps {
        let c = normalize3(center);
        let d2 = (dir[0] - c[0]).powi(2) + (dir[1] - c[1]).powi(2) + (dir[2] - c[2]).powi(2);
        r += amp * (-d2 / width).exp();
    }
    r
}

/// Asymmetric smooth blob built on an icosphere: no intrinsic symmetries,
/// so correspondence on it has a unique answer.
pub fn bumpy_blob(subdivisions: usize) -> TriMesh {
    let base = icosphere(subdivisions, 1.0);
    base.map_vertices(|v| {
        let d = normalize3(v);
        let r = blob_radius(d);
        [d[0] * r, d[1] * r, d[2] * r]
    })
    .expect("blob construction is valid")
}

/// Asymmetric blob on a uv-sphere grid; `rows=30, cols=34` gives 1022 vertices.
pub fn bumpy_blob_uv(rows: usize, cols: usize) -> TriMesh {
    let base = uv_sphere(rows, cols, 1.0);
    base.map_vertices(|v| {
        let d = normalize3(v);
        let r = blob_radius(d);
        [d[0] * r, d[1] * r, d[2] * r]
    })
    .expect("blob construction is valid")
}

/// Smooth twist: rotate every vertex about the y-axis by an angle proportional
/// to its y coordinate. Vertex order is preserved, so for a bent copy of a
/// mesh the ground-truth correspondence is the identity.
pub fn twist_y(mesh: &TriMesh, angle_per_unit: f64) -> TriMesh {
    mesh.map_vertices(|v| {
        let a = angle_per_unit * v[1];
        let (s, c) = a.sin_cos();
        [c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2]]
    })
    .expect("twist preserves mesh validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::total_surface_area;

    #[test]
    fn icosphere_vertex_counts() {
        assert_eq!(icosphere(0, 1.0).n_vertices(), 12);
        assert_eq!(icosphere(1, 1.0).n_vertices(), 42);
        assert_eq!(icosphere(2, 1.0).n_vertices(), 162);
        assert_eq!(icosphere(3, 1.0).n_vertices(), 642);
        assert_eq!(icosphere(3, 1.0).n_faces(), 1280);
    }

    #[test]
    fn uv_sphere_counts_and_area() {
        let m = uv_sphere(30, 34, 1.0);
        assert_eq!(m.n_vertices(), 30 * 34 + 2);
        let area = total_surface_area(&m);
        let exact = 4.0 * std::f64::consts::PI;
        assert!((area - exact).abs() / exact < 0.03);
    }

    #[test]
    fn twist_preserves_vertex_count_and_is_deterministic() {
        let m = bumpy_blob(2);
        let b1 = twist_y(&m, 0.4);
        let b2 = twist_y(&m, 0.4);
        assert_eq!(b1.n_vertices(), m.n_vertices());
        assert_eq!(b1.vertices(), b2.vertices());
    }

    #[test]
    fn twist_is_near_isometric_for_small_angles() {
        let m = bumpy_blob(2);
        let b = twist_y(&m, 0.3);
        let rel = (total_surface_area(&b) - total_surface_area(&m)).abs() / total_surface_area(&m);
        assert!(rel < 0.05, "area drift {rel}");
    }
}
