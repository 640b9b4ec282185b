//! Monte Carlo realization of the shadow measure: (Mu,u) for random unit
//! vectors u, under the three distributions in play (uniform complex,
//! uniform real, and the simplex shortcut for normal matrices).
//!
//! Reproducibility contract: sampling is chunked, each chunk drawing from a
//! ChaCha8 stream derived from (seed, chunk index). Results are bit-identical
//! for a fixed seed regardless of thread count.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::matrix::ComplexMatrix;

const CHUNK: usize = 8192;

/// Distribution of the random unit vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorKind {
    /// Uniform on the complex unit sphere (2N real Gaussians, normalized).
    ComplexUniform,
    /// Uniform on the real unit sphere (N real Gaussians, normalized).
    RealUniform,
    /// Simplex weights on given eigenvalues (normal matrices only).
    Simplex,
}

impl VectorKind {
    pub fn name(self) -> &'static str {
        match self {
            VectorKind::ComplexUniform => "complex_uniform",
            VectorKind::RealUniform => "real_uniform",
            VectorKind::Simplex => "simplex",
        }
    }
}

/// A batch of shadow samples with its provenance.
#[derive(Clone, Debug)]
pub struct ShadowSamples {
    pub points: Vec<Complex64>,
    pub vector_kind: VectorKind,
    pub seed: u64,
    pub matrix_hash: [u8; 32],
}

/// SHA-256 digest of (dim, entries) in canonical little-endian bytes.
pub fn matrix_digest(m: &ComplexMatrix) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update((m.dim() as u64).to_le_bytes());
    for z in m.entries() {
        hasher.update(z.re.to_le_bytes());
        hasher.update(z.im.to_le_bytes());
    }
    hasher.finalize().into()
}

fn digest_of_eigenvalues(values: &[Complex64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update((values.len() as u64).to_le_bytes());
    for z in values {
        hasher.update(z.re.to_le_bytes());
        hasher.update(z.im.to_le_bytes());
    }
    hasher.finalize().into()
}

fn stream_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

#[inline]
fn uniform_01(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random bits in (0,1]; never returns 0 so ln() is safe
    ((rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
}

/// Box-Muller pair of independent standard normals.
#[inline]
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = uniform_01(rng);
    let u2 = uniform_01(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    (r * phi.cos(), r * phi.sin())
}

fn complex_gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = normal_pair(rng);
        v.push(Complex64::new(x, y));
    }
    v
}

fn real_gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(n);
    let mut pending: Option<f64> = None;
    for _ in 0..n {
        let x = match pending.take() {
            Some(x) => x,
            None => {
                let (a, b) = normal_pair(rng);
                pending = Some(b);
                a
            }
        };
        v.push(Complex64::new(x, 0.0));
    }
    v
}

fn normalize(v: &mut [Complex64]) -> bool {
    let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if norm_sq < 1e-280 {
        return false;
    }
    let inv = 1.0 / norm_sq.sqrt();
    for z in v.iter_mut() {
        *z *= inv;
    }
    true
}

/// One random unit vector; `kind` must not be Simplex (which does not draw
/// vectors). Exposed for tests and callers composing their own statistics.
pub fn random_unit_vector(
    n: usize,
    kind: VectorKind,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(invalid("random_unit_vector: dimension 0"));
    }
    if kind == VectorKind::Simplex {
        return Err(invalid(
            "random_unit_vector: simplex kind draws weights, not vectors",
        ));
    }
    loop {
        let mut v = match kind {
            VectorKind::ComplexUniform => complex_gaussian_vector(n, rng),
            VectorKind::RealUniform => real_gaussian_vector(n, rng),
            VectorKind::Simplex => unreachable!(),
        };
        // a zero Gaussian vector is astronomically unlikely; redraw if hit
        if normalize(&mut v) {
            return Ok(v);
        }
    }
}

fn sample_chunked<F>(count: usize, seed: u64, per_point: F) -> Vec<Complex64>
where
    F: Fn(&mut ChaCha8Rng) -> Complex64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let mut points = vec![Complex64::new(0.0, 0.0); count];
    points
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(ci, slot)| {
            let mut rng = stream_rng(seed, ci as u64);
            for p in slot.iter_mut() {
                *p = per_point(&mut rng);
            }
        });
    debug_assert!(chunks * CHUNK >= count);
    points
}

/// Monte Carlo shadow samples (Mu,u) of M under the chosen vector
/// distribution. `Simplex` requires a normal matrix; use
/// `sample_normal_shadow` with the eigenvalues instead.
pub fn sample_shadow(
    m: &ComplexMatrix,
    count: usize,
    kind: VectorKind,
    seed: u64,
) -> Result<ShadowSamples> {
    if count == 0 {
        return Err(invalid("sample_shadow: count must be >= 1"));
    }
    if kind == VectorKind::Simplex {
        return Err(invalid(
            "sample_shadow: simplex sampling needs eigenvalues; call sample_normal_shadow",
        ));
    }
    if !m.is_finite() {
        return Err(invalid("sample_shadow: non-finite entries"));
    }
    let n = m.dim();
    let points = sample_chunked(count, seed, |rng| {
        let mut v = match kind {
            VectorKind::ComplexUniform => complex_gaussian_vector(n, rng),
            VectorKind::RealUniform => real_gaussian_vector(n, rng),
            VectorKind::Simplex => unreachable!(),
        };
        while !normalize(&mut v) {
            v = match kind {
                VectorKind::ComplexUniform => complex_gaussian_vector(n, rng),
                VectorKind::RealUniform => real_gaussian_vector(n, rng),
                VectorKind::Simplex => unreachable!(),
            };
        }
        m.quadratic_form(&v)
    });
    Ok(ShadowSamples {
        points,
        vector_kind: kind,
        seed,
        matrix_hash: matrix_digest(m),
    })
}

/// Shadow of a normal matrix from its eigenvalues: r uniform on the standard
/// simplex (exponential spacings), point = sum r_k lambda_k. Matches
/// sample_shadow of diag(lambda) in distribution.
pub fn sample_normal_shadow(
    eigenvalues: &[Complex64],
    count: usize,
    seed: u64,
) -> Result<ShadowSamples> {
    if eigenvalues.is_empty() {
        return Err(invalid("sample_normal_shadow: empty eigenvalue list"));
    }
    if count == 0 {
        return Err(invalid("sample_normal_shadow: count must be >= 1"));
    }
    let lambda = eigenvalues.to_vec();
    let points = sample_chunked(count, seed, |rng| {
        let mut total = 0.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for &l in &lambda {
            let e = -uniform_01(rng).ln();
            total += e;
            acc += l * e;
        }
        acc / total
    });
    Ok(ShadowSamples {
        points,
        vector_kind: VectorKind::Simplex,
        seed,
        matrix_hash: digest_of_eigenvalues(&lambda),
    })
}

/// Rectangular raster over a bounding box.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    pub origin: Complex64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Counts,
    Density,
}

impl Grid2D {
    pub fn zeros(origin: Complex64, dx: f64, dy: f64, nx: usize, ny: usize) -> Result<Self> {
        if dx <= 0.0 || dy <= 0.0 || nx == 0 || ny == 0 {
            return Err(invalid("Grid2D: cells must have positive area"));
        }
        Ok(Self {
            origin,
            dx,
            dy,
            nx,
            ny,
            values: vec![0.0; nx * ny],
            normalization: Normalization::Counts,
        })
    }

    #[inline]
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    #[inline]
    pub fn value_mut(&mut self, ix: usize, iy: usize) -> &mut f64 {
        &mut self.values[iy * self.nx + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(
            self.origin.re + (ix as f64 + 0.5) * self.dx,
            self.origin.im + (iy as f64 + 0.5) * self.dy,
        )
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Mass under the density interpretation: sum * dx * dy.
    pub fn mass(&self) -> f64 {
        self.total() * self.cell_area()
    }

    /// Convert counts to a density normalized to unit mass.
    pub fn into_density(mut self) -> Self {
        let total = self.total();
        if total > 0.0 {
            let inv = 1.0 / (total * self.cell_area());
            for v in &mut self.values {
                *v *= inv;
            }
        }
        self.normalization = Normalization::Density;
        self
    }

    /// Cellwise sum; grids must share geometry.
    pub fn add_assign(&mut self, other: &Grid2D) -> Result<()> {
        if !self.same_geometry(other) {
            return Err(invalid("Grid2D: geometry mismatch"));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    pub fn same_geometry(&self, other: &Grid2D) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.origin - other.origin).norm() < 1e-12
            && (self.dx - other.dx).abs() < 1e-12
            && (self.dy - other.dy).abs() < 1e-12
    }

    /// Bilinear interpolation of the raster at a point, treating values as
    /// samples at cell centers and zero outside.
    pub fn sample_bilinear(&self, z: Complex64) -> f64 {
        let fx = (z.re - self.origin.re) / self.dx - 0.5;
        let fy = (z.im - self.origin.im) / self.dy - 0.5;
        let ix = fx.floor();
        let iy = fy.floor();
        let tx = fx - ix;
        let ty = fy - iy;
        let mut acc = 0.0;
        for (dx, wx) in [(0i64, 1.0 - tx), (1, tx)] {
            for (dy, wy) in [(0i64, 1.0 - ty), (1, ty)] {
                let cx = ix as i64 + dx;
                let cy = iy as i64 + dy;
                if cx >= 0 && cy >= 0 && (cx as usize) < self.nx && (cy as usize) < self.ny {
                    acc += wx * wy * self.value(cx as usize, cy as usize);
                }
            }
        }
        acc
    }
}

/// Axis-aligned bounding box in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(invalid("bounding box must have positive area"));
        }
        Ok(Self { x0, x1, y0, y1 })
    }
}

/// Histogram of samples over the box. Out-of-box points are not an error;
/// they are counted and reported as the second return value.
pub fn histogram(
    samples: &ShadowSamples,
    bbox: BoundingBox,
    nx: usize,
    ny: usize,
) -> Result<(Grid2D, u64)> {
    let dx = (bbox.x1 - bbox.x0) / nx as f64;
    let dy = (bbox.y1 - bbox.y0) / ny as f64;
    let mut grid = Grid2D::zeros(Complex64::new(bbox.x0, bbox.y0), dx, dy, nx, ny)?;
    let mut overflow = 0u64;
    for p in &samples.points {
        let ix = ((p.re - bbox.x0) / dx).floor();
        let iy = ((p.im - bbox.y0) / dy).floor();
        if ix >= 0.0 && iy >= 0.0 && (ix as usize) < nx && (iy as usize) < ny {
            *grid.value_mut(ix as usize, iy as usize) += 1.0;
        } else {
            overflow += 1;
        }
    }
    Ok((grid, overflow))
}

/// Default bounding box for a matrix: its numerical-range box padded 2%.
pub fn default_bounding_box(m: &ComplexMatrix) -> Result<BoundingBox> {
    let region = crate::range::numerical_range_boundary(m, 256)?;
    let vs = region.vertices();
    if vs.is_empty() {
        // W(M) is a single point (scalar matrix)
        let z = m.mean_point();
        return BoundingBox::new(z.re - 0.5, z.re + 0.5, z.im - 0.5, z.im + 0.5);
    }
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for v in vs {
        x0 = x0.min(v.re);
        x1 = x1.max(v.re);
        y0 = y0.min(v.im);
        y1 = y1.max(v.im);
    }
    let pad_x = 0.02 * (x1 - x0).max(1e-6);
    let pad_y = 0.02 * (y1 - y0).max(1e-6);
    BoundingBox::new(x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y)
}
