//! Cotangent Laplace-Beltrami assembly, lumped mass, and the truncated
//! generalized eigendecomposition that every other module works in.
//!
//! Sign convention: the Laplacian is assembled positive semidefinite
//! (negated cotangent weights off-diagonal), so eigenvalues are nonnegative
//! and the constant function spans the null space.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::autodiff::Tensor;
use crate::mesh::{total_surface_area, TriMesh};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("vertex {0} is isolated (zero lumped mass)")]
    IsolatedVertex(usize),
    #[error("requested {k} eigenpairs but the mesh has only {n} vertices")]
    BasisTooLarge { k: usize, n: usize },
    #[error("eigensolver did not converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },
    #[error("cache read failed for {path}: {msg}")]
    Cache { path: String, msg: String },
    #[error("io error for {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Compressed sparse row matrix with f64 entries.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from (row, col, value) triplets; duplicate entries are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n_rows + 1];
        let mut indices: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] = indices.len();
                last = Some((r, c));
            }
        }
        for r in 1..=n_rows {
            if indptr[r] < indptr[r - 1] {
                indptr[r] = indptr[r - 1];
            }
        }
        SparseMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    /// y = S x for a dense column-stacked x (row-major, shape n_cols × c).
    pub fn mul_dense(&self, x: &[f64], c: usize, out: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols * c);
        assert_eq!(out.len(), self.n_rows * c);
        out.fill(0.0);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let orow = &mut out[r * c..(r + 1) * c];
            for (&j, &v) in cols.iter().zip(vals) {
                let xrow = &x[j * c..(j + 1) * c];
                for (o, &xv) in orow.iter_mut().zip(xrow) {
                    *o += v * xv;
                }
            }
        }
    }

    /// y = Sᵀ x for a dense column-stacked x (row-major, shape n_rows × c).
    pub fn mul_transpose_dense(&self, x: &[f64], c: usize, out: &mut [f64]) {
        assert_eq!(x.len(), self.n_rows * c);
        assert_eq!(out.len(), self.n_cols * c);
        out.fill(0.0);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let xrow = &x[r * c..(r + 1) * c];
            for (&j, &v) in cols.iter().zip(vals) {
                let orow = &mut out[j * c..(j + 1) * c];
                for (o, &xv) in orow.iter_mut().zip(xrow) {
                    *o += v * xv;
                }
            }
        }
    }
}

/// Truncated Laplace-Beltrami eigenbasis of one shape.
///
/// `phi` is n×k with M-orthonormal columns, `evals` ascending and
/// nonnegative, `mass` the positive lumped vertex areas.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub phi: Tensor,
    pub evals: Vec<f64>,
    pub mass: Vec<f64>,
    pub k: usize,
}

impl SpectralBasis {
    pub fn n_vertices(&self) -> usize {
        self.mass.len()
    }

    /// View of the first `k` columns as a fresh tensor (k ≤ self.k).
    pub fn phi_truncated(&self, k: usize) -> Tensor {
        assert!(k <= self.k);
        let n = self.n_vertices();
        let mut data = Vec::with_capacity(n * k);
        for v in 0..n {
            data.extend_from_slice(&self.phi.data()[v * self.k..v * self.k + k]);
        }
        Tensor::from_vec(vec![n, k], data)
    }

    /// Φ† f = Φᵀ M f: spectral coefficients of vertex functions, k×d.
    pub fn project(&self, f: &Tensor) -> Tensor {
        let n = self.n_vertices();
        assert_eq!(f.shape()[0], n, "project: row count mismatch");
        let d = f.shape()[1];
        let mut weighted = f.data().to_vec();
        for v in 0..n {
            for j in 0..d {
                weighted[v * d + j] *= self.mass[v];
            }
        }
        let mut out = vec![0.0; self.k * d];
        // Φᵀ (M f): (k×n)(n×d)
        crate::autodiff::gemm_tn(self.phi.data(), &weighted, n, self.k, d, &mut out);
        Tensor::from_vec(vec![self.k, d], out)
    }

    /// Φ a: synthesize vertex functions from spectral coefficients, n×d.
    pub fn synthesize(&self, coeffs: &Tensor) -> Tensor {
        assert_eq!(coeffs.shape()[0], self.k);
        let d = coeffs.shape()[1];
        let n = self.n_vertices();
        let mut out = vec![0.0; n * d];
        crate::autodiff::gemm_nn(self.phi.data(), coeffs.data(), n, self.k, d, &mut out);
        Tensor::from_vec(vec![n, d], out)
    }

    /// Mass matrix as a diagonal sparse operator.
    pub fn mass_sparse(&self) -> SparseMatrix {
        let n = self.n_vertices();
        let triplets: Vec<(usize, usize, f64)> =
            self.mass.iter().enumerate().map(|(i, &m)| (i, i, m)).collect();
        SparseMatrix::from_triplets(n, n, &triplets)
    }
}

/// Clamp bound for cotangent weights on sliver triangles.
const COT_CLAMP: f64 = 1e6;
const COT_EPS: f64 = 1e-6;

fn clamp_cot(c: f64) -> f64 {
    if !c.is_finite() {
        log::warn!("degenerate triangle produced a non-finite cotangent; clamped");
        return COT_CLAMP;
    }
    let mag = c.abs();
    if mag > COT_CLAMP {
        log::warn!("near-degenerate triangle cotangent {c:.3e} clamped");
        return c.signum() * COT_CLAMP;
    }
    if mag < COT_EPS {
        // keep the sign convention stable for right angles
        return c.signum() * COT_EPS;
    }
    c
}

/// Positive-semidefinite cotangent Laplacian: off-diagonal
/// `-(cot α + cot β)/2`, diagonal the negated row sum.
pub fn cotan_laplacian(mesh: &TriMesh) -> SparseMatrix {
    let n = mesh.n_vertices();
    let verts = mesh.vertices();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.n_faces() * 12);
    for f in mesh.faces() {
        // Angle at f[c] is opposite the edge (f[a], f[b]).
        for (c, a, b) in [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)] {
            let (vc, va, vb) = (verts[f[c]], verts[f[a]], verts[f[b]]);
            let u = [va[0] - vc[0], va[1] - vc[1], va[2] - vc[2]];
            let w = [vb[0] - vc[0], vb[1] - vc[1], vb[2] - vc[2]];
            let dot = u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
            let cr = [
                u[1] * w[2] - u[2] * w[1],
                u[2] * w[0] - u[0] * w[2],
                u[0] * w[1] - u[1] * w[0],
            ];
            let cross_norm = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
            let cot = clamp_cot(dot / cross_norm);
            let half = 0.5 * cot;
            let (i, j) = (f[a], f[b]);
            triplets.push((i, j, -half));
            triplets.push((j, i, -half));
            triplets.push((i, i, half));
            triplets.push((j, j, half));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Lumped vertex areas: one third of the incident face areas.
pub fn lumped_mass(mesh: &TriMesh) -> Result<Vec<f64>, SpectralError> {
    let n = mesh.n_vertices();
    let mut mass = vec![0.0; n];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let third = mesh.face_areas()[fi] / 3.0;
        for &v in f {
            mass[v] += third;
        }
    }
    for (v, &m) in mass.iter().enumerate() {
        if m <= 0.0 {
            return Err(SpectralError::IsolatedVertex(v));
        }
    }
    Ok(mass)
}

/// Smallest-k generalized eigenpairs of `L φ = λ M φ` with diagonal mass.
///
/// The generalized problem is reduced to the ordinary symmetric problem on
/// `M^{-1/2} L M^{-1/2}` (exact for diagonal M), solved densely, and mapped
/// back. Eigenvalues come out ascending; each eigenvector's sign is fixed by
/// making its largest-magnitude entry positive.
pub fn eigendecompose(laplacian: &SparseMatrix, mass: &[f64], k: usize) -> Result<SpectralBasis, SpectralError> {
    let n = mass.len();
    if k > n {
        return Err(SpectralError::BasisTooLarge { k, n });
    }
    let inv_sqrt_m: Vec<f64> = mass.iter().map(|&m| 1.0 / m.sqrt()).collect();

    let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        let (cols, vals) = laplacian.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            dense[(r, c)] = v * inv_sqrt_m[r] * inv_sqrt_m[c];
        }
    }
    // Exact symmetrization guards the eigensolver against rounding asymmetry.
    for r in 0..n {
        for c in (r + 1)..n {
            let s = 0.5 * (dense[(r, c)] + dense[(c, r)]);
            dense[(r, c)] = s;
            dense[(c, r)] = s;
        }
    }

    let eig = nalgebra::SymmetricEigen::try_new(dense, f64::EPSILON, 0)
        .ok_or(SpectralError::NonConvergence { residual: f64::NAN })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut evals = Vec::with_capacity(k);
    let mut phi = vec![0.0; n * k];
    for (j, &idx) in order.iter().take(k).enumerate() {
        // Tiny negative values are eigensolver noise on the PSD matrix.
        evals.push(eig.eigenvalues[idx].max(0.0));
        let col = eig.eigenvectors.column(idx);
        // φ = M^{-1/2} u, then sign-fix on the largest-magnitude entry.
        let mut best = 0usize;
        let mut best_mag = -1.0;
        for v in 0..n {
            let mag = (col[v] * inv_sqrt_m[v]).abs();
            if mag > best_mag {
                best_mag = mag;
                best = v;
            }
        }
        let sign = if col[best] * inv_sqrt_m[best] < 0.0 { -1.0 } else { 1.0 };
        for v in 0..n {
            phi[v * k + j] = sign * col[v] * inv_sqrt_m[v];
        }
    }

    let basis = SpectralBasis {
        phi: Tensor::from_vec(vec![n, k], phi),
        evals,
        mass: mass.to_vec(),
        k,
    };

    // Convergence check: generalized eigen-residual per pair.
    let mut worst = 0.0f64;
    let phi_d = basis.phi.data();
    let mut lphi = vec![0.0; n];
    for j in 0..k {
        let col: Vec<f64> = (0..n).map(|v| phi_d[v * k + j]).collect();
        laplacian.mul_dense(&col, 1, &mut lphi);
        let mut num = 0.0;
        let mut den = 0.0;
        for v in 0..n {
            let r = lphi[v] - basis.evals[j] * mass[v] * col[v];
            num += r * r;
            den += col[v] * col[v];
        }
        worst = worst.max((num / den).sqrt());
    }
    // Residual scale grows with the spectral radius; normalize by it.
    let scale = basis.evals.last().copied().unwrap_or(1.0).max(1.0);
    if worst / scale > 1e-7 {
        return Err(SpectralError::NonConvergence { residual: worst });
    }

    Ok(basis)
}

/// Convenience: cotan Laplacian + lumped mass + eigendecomposition.
pub fn compute_basis(mesh: &TriMesh, k: usize) -> Result<SpectralBasis, SpectralError> {
    let laplacian = cotan_laplacian(mesh);
    let mass = lumped_mass(mesh)?;
    eigendecompose(&laplacian, &mass, k)
}

// --- binary basis cache -----------------------------------------------------

const CACHE_MAGIC: &[u8; 4] = b"SBC1";

/// Content hash of a mesh file, used as the cache key.
pub fn mesh_content_hash(path: impl AsRef<Path>) -> Result<String, SpectralError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| SpectralError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(12).map(|b| format!("{b:02x}")).collect())
}

/// Cache file path for a given key.
pub fn cache_path(dir: &Path, content_hash: &str, k: usize, normalized: bool) -> PathBuf {
    dir.join(format!(
        "basis_{content_hash}_k{k}_{}.sbc",
        if normalized { "norm" } else { "raw" }
    ))
}

/// Serialize a basis to the cache.
pub fn save_basis(path: &Path, basis: &SpectralBasis) -> Result<(), SpectralError> {
    let io_err = |source| SpectralError::Io {
        path: path.display().to_string(),
        source,
    };
    let n = basis.n_vertices();
    let mut bytes = Vec::with_capacity(16 + 8 * (basis.k + n + n * basis.k));
    bytes.extend_from_slice(CACHE_MAGIC);
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    bytes.extend_from_slice(&(basis.k as u64).to_le_bytes());
    for &e in &basis.evals {
        bytes.extend_from_slice(&e.to_le_bytes());
    }
    for &m in &basis.mass {
        bytes.extend_from_slice(&m.to_le_bytes());
    }
    for &p in basis.phi.data() {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    fs::write(path, bytes).map_err(io_err)
}

/// Load a basis from the cache; `Ok(None)` when the file does not exist.
pub fn load_basis(path: &Path) -> Result<Option<SpectralBasis>, SpectralError> {
    if !path.exists() {
        return Ok(None);
    }
    let bytes = fs::read(path).map_err(|source| SpectralError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let cache_err = |msg: &str| SpectralError::Cache {
        path: path.display().to_string(),
        msg: msg.to_string(),
    };
    if bytes.len() < 20 || &bytes[..4] != CACHE_MAGIC {
        return Err(cache_err("bad magic"));
    }
    let read_u64 = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap()) as usize;
    let n = read_u64(4);
    let k = read_u64(12);
    let expected = 20 + 8 * (k + n + n * k);
    if bytes.len() != expected {
        return Err(cache_err("truncated cache file"));
    }
    let mut off = 20;
    let mut read_f64s = |count: usize| {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
            off += 8;
        }
        out
    };
    let evals = read_f64s(k);
    let mass = read_f64s(n);
    let phi = read_f64s(n * k);
    Ok(Some(SpectralBasis {
        phi: Tensor::from_vec(vec![n, k], phi),
        evals,
        mass,
        k,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use approx::assert_relative_eq;

    fn blob_basis() -> SpectralBasis {
        let mesh = synth::bumpy_blob(1);
        compute_basis(&mesh, 20).unwrap()
    }

    #[test]
    fn laplacian_row_sums_are_zero() {
        let mesh = synth::bumpy_blob(1);
        let lap = cotan_laplacian(&mesh);
        for r in 0..lap.n_rows {
            let (_, vals) = lap.row(r);
            let sum: f64 = vals.iter().sum();
            assert!(sum.abs() < 1e-9, "row {r} sums to {sum}");
        }
    }

    #[test]
    fn laplacian_is_symmetric() {
        let mesh = synth::bumpy_blob(1);
        let lap = cotan_laplacian(&mesh);
        for r in 0..lap.n_rows {
            let (cols, vals) = lap.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let (cc, vv) = lap.row(c);
                let back = cc.iter().position(|&x| x == r).map(|p| vv[p]).unwrap_or(0.0);
                assert_relative_eq!(v, back, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_triangle_edge_weight_is_half_cot() {
        // Equilateral triangle: every edge weight is cot(60°)/2 = 1/(2√3).
        let mesh = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 3.0f64.sqrt() / 2.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let lap = cotan_laplacian(&mesh);
        let expected = -1.0 / (2.0 * 3.0f64.sqrt());
        let (cols, vals) = lap.row(0);
        for (&c, &v) in cols.iter().zip(vals) {
            if c != 0 {
                assert_relative_eq!(v, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_quadratic_form_is_nonnegative() {
        let mesh = synth::bumpy_blob(0); // 12 vertices: dense check is cheap
        let lap = cotan_laplacian(&mesh);
        let n = lap.n_rows;
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state as f64 / u64::MAX as f64) - 0.5
        };
        for _ in 0..50 {
            let x: Vec<f64> = (0..n).map(|_| next()).collect();
            let mut lx = vec![0.0; n];
            lap.mul_dense(&x, 1, &mut lx);
            let q: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
            assert!(q > -1e-10, "negative quadratic form {q}");
        }
    }

    #[test]
    fn tetrahedron_lumped_mass() {
        let mesh = crate::mesh::tests::unit_tetrahedron();
        let mass = lumped_mass(&mesh).unwrap();
        // Each vertex touches 3 unit-edge equilateral faces.
        let expected = 3.0f64.sqrt() / 4.0;
        for &m in &mass {
            assert_relative_eq!(m, expected, epsilon = 1e-12);
        }
        let total: f64 = mass.iter().sum();
        assert_relative_eq!(total, total_mesh_area(&mesh), epsilon = 1e-12);
    }

    fn total_mesh_area(mesh: &TriMesh) -> f64 {
        crate::mesh::total_surface_area(mesh)
    }

    #[test]
    fn mass_sums_to_total_area() {
        let mesh = synth::bumpy_blob(2);
        let mass = lumped_mass(&mesh).unwrap();
        let total: f64 = mass.iter().sum();
        assert_relative_eq!(total, total_mesh_area(&mesh), max_relative = 1e-9);
    }

    #[test]
    fn icosphere_masses_are_near_uniform() {
        let mesh = synth::icosphere(3, 1.0);
        let mass = lumped_mass(&mesh).unwrap();
        let mean: f64 = mass.iter().sum::<f64>() / mass.len() as f64;
        for &m in &mass {
            assert!((m - mean).abs() / mean < 0.2, "mass {m} vs mean {mean}");
        }
    }

    #[test]
    fn isolated_vertex_is_rejected() {
        let vertices = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [5.0, 5.0, 5.0], // unused
        ];
        let mesh = TriMesh::new(vertices, vec![[0, 1, 2]]).unwrap();
        assert!(matches!(lumped_mass(&mesh), Err(SpectralError::IsolatedVertex(3))));
    }

    #[test]
    fn first_mode_is_constant() {
        let basis = blob_basis();
        let mesh_area: f64 = basis.mass.iter().sum();
        let expected = 1.0 / mesh_area.sqrt();
        let n = basis.n_vertices();
        for v in 0..n {
            let val = basis.phi.data()[v * basis.k];
            assert!((val.abs() - expected).abs() < 1e-5, "phi0[{v}] = {val}, want ±{expected}");
        }
        assert!(basis.evals[0] < 1e-8);
    }

    #[test]
    fn basis_is_mass_orthonormal() {
        let basis = blob_basis();
        let n = basis.n_vertices();
        let k = basis.k;
        let phi = basis.phi.data();
        for a in 0..k {
            for b in a..k {
                let mut dot = 0.0;
                for v in 0..n {
                    dot += basis.mass[v] * phi[v * k + a] * phi[v * k + b];
                }
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-6, "gram[{a},{b}] = {dot}");
            }
        }
    }

    #[test]
    fn eigen_residuals_are_small() {
        let mesh = synth::bumpy_blob(1);
        let lap = cotan_laplacian(&mesh);
        let mass = lumped_mass(&mesh).unwrap();
        let basis = eigendecompose(&lap, &mass, 15).unwrap();
        let n = basis.n_vertices();
        let mut lphi = vec![0.0; n];
        for j in 0..basis.k {
            let col: Vec<f64> = (0..n).map(|v| basis.phi.data()[v * basis.k + j]).collect();
            lap.mul_dense(&col, 1, &mut lphi);
            let mut num = 0.0;
            let mut den = 0.0;
            for v in 0..n {
                let r = lphi[v] - basis.evals[j] * mass[v] * col[v];
                num += r * r;
                den += col[v] * col[v];
            }
            let rel = (num / den).sqrt() / basis.evals.last().unwrap().max(1.0);
            assert!(rel < 1e-7, "eigenpair {j} residual {rel}");
        }
    }

    #[test]
    fn icosphere_spectrum_matches_analytic_bands() {
        let mesh = synth::icosphere(3, 1.0);
        let basis = compute_basis(&mesh, 25).unwrap();
        // Unit sphere: eigenvalue l(l+1) with multiplicity 2l+1.
        let mut idx = 0;
        assert!(basis.evals[idx] < 1e-8);
        idx += 1;
        for l in 1..=4u32 {
            let analytic = (l * (l + 1)) as f64;
            for _ in 0..(2 * l + 1) {
                let rel = (basis.evals[idx] - analytic).abs() / analytic;
                assert!(rel < 0.05, "eval[{idx}] = {} vs l(l+1) = {analytic}", basis.evals[idx]);
                idx += 1;
            }
        }
    }

    #[test]
    fn project_recovers_basis_coordinates() {
        let basis = blob_basis();
        // project(Φ e_j) = e_j
        let proj = basis.project(&basis.phi);
        for a in 0..basis.k {
            for b in 0..basis.k {
                let expected = if a == b { 1.0 } else { 0.0 };
                let got = proj.data()[a * basis.k + b];
                assert!((got - expected).abs() < 1e-6, "proj[{a},{b}] = {got}");
            }
        }
    }

    #[test]
    fn project_constant_hits_only_first_mode() {
        let basis = blob_basis();
        let n = basis.n_vertices();
        let ones = Tensor::from_vec(vec![n, 1], vec![1.0; n]);
        let proj = basis.project(&ones);
        for j in 1..basis.k {
            assert!(proj.data()[j].abs() < 1e-6, "coeff[{j}] = {}", proj.data()[j]);
        }
        assert!(proj.data()[0].abs() > 0.1);
    }

    #[test]
    fn projection_is_idempotent() {
        let basis = blob_basis();
        let n = basis.n_vertices();
        let f: Vec<f64> = (0..n * 2)
            .map(|i| ((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5)
            .collect();
        let f = Tensor::from_vec(vec![n, 2], f);
        let p1 = basis.project(&f);
        let p2 = basis.project(&basis.synthesize(&p1));
        for (a, b) in p1.data().iter().zip(p2.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rigid_motion_leaves_eigenvalues_unchanged() {
        let mesh = synth::bumpy_blob(1);
        let (c, s) = (1.1f64.cos(), 1.1f64.sin());
        let moved = mesh
            .map_vertices(|v| [v[0] * c - v[2] * s + 4.0, v[1] - 2.0, v[0] * s + v[2] * c])
            .unwrap();
        let b1 = compute_basis(&mesh, 12).unwrap();
        let b2 = compute_basis(&moved, 12).unwrap();
        for j in 1..12 {
            let rel = (b1.evals[j] - b2.evals[j]).abs() / b1.evals[j];
            assert!(rel < 1e-8, "eigenvalue {j} drift {rel}");
        }
    }

    #[test]
    fn scaling_divides_eigenvalues_by_s_squared() {
        let mesh = synth::bumpy_blob(1);
        let s = 3.0;
        let scaled = mesh.map_vertices(|v| [v[0] * s, v[1] * s, v[2] * s]).unwrap();
        let b1 = compute_basis(&mesh, 10).unwrap();
        let b2 = compute_basis(&scaled, 10).unwrap();
        for j in 1..10 {
            let rel = (b2.evals[j] - b1.evals[j] / (s * s)).abs() / (b1.evals[j] / (s * s));
            assert!(rel < 1e-6, "eigenvalue {j} scale drift {rel}");
        }
    }

    #[test]
    fn basis_too_large_is_rejected() {
        let mesh = crate::mesh::tests::unit_tetrahedron();
        let lap = cotan_laplacian(&mesh);
        let mass = lumped_mass(&mesh).unwrap();
        assert!(matches!(
            eigendecompose(&lap, &mass, 10),
            Err(SpectralError::BasisTooLarge { .. })
        ));
    }

    #[test]
    fn cache_round_trip() {
        let basis = blob_basis();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("basis.sbc");
        save_basis(&path, &basis).unwrap();
        let loaded = load_basis(&path).unwrap().unwrap();
        assert_eq!(loaded.k, basis.k);
        assert_eq!(loaded.evals, basis.evals);
        assert_eq!(loaded.mass, basis.mass);
        assert_eq!(loaded.phi.data(), basis.phi.data());
        assert!(load_basis(&dir.path().join("missing.sbc")).unwrap().is_none());
    }
}
