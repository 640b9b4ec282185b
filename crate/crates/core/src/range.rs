//! Numerical-range geometry: W(A) and the rank-k ranges Lambda_k as
//! intersections of half-planes Re(e^{-i theta} z) <= (k-th largest
//! eigenvalue of Re(e^{-i theta} A)), realized by incremental polygon
//! clipping.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::eigen::hermitian_eigenvalues;
use crate::error::{invalid, Result};
use crate::matrix::ComplexMatrix;

/// Support offsets of A over a uniform angle grid: offsets[k-1][m] is the
/// k-th largest eigenvalue of Re(e^{-i theta_m} A).
#[derive(Clone, Debug)]
pub struct HalfPlaneFan {
    pub angles: Vec<f64>,
    /// offsets[k - 1][m], k = 1..=N
    pub offsets: Vec<Vec<f64>>,
}

impl HalfPlaneFan {
    pub fn compute(a: &ComplexMatrix, t: usize) -> Result<Self> {
        if t < 16 {
            return Err(invalid("half-plane fan needs at least 16 angles"));
        }
        let n = a.dim();
        let angles: Vec<f64> = (0..t)
            .map(|m| 2.0 * std::f64::consts::PI * m as f64 / t as f64)
            .collect();
        let spectra: Result<Vec<Vec<f64>>> = angles
            .par_iter()
            .map(|&theta| {
                hermitian_eigenvalues(&a.re_rotated(theta)).map(|s| s.values().to_vec())
            })
            .collect();
        let spectra = spectra?;
        let mut offsets = vec![vec![0.0; t]; n];
        for (m, spec) in spectra.iter().enumerate() {
            for k in 1..=n {
                // k-th largest = element n-k of the ascending list
                offsets[k - 1][m] = spec[n - k];
            }
        }
        Ok(Self { angles, offsets })
    }
}

/// A convex region: a closed polygon, a degenerate segment or point, or
/// empty. Vertices are in counterclockwise order, not repeated.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexRegion {
    vertices: Vec<Complex64>,
    degenerate: bool,
}

impl ConvexRegion {
    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            degenerate: false,
        }
    }

    /// Wrap an existing counterclockwise vertex list (e.g. a convex hull).
    pub fn from_vertices(vertices: Vec<Complex64>, degenerate: bool) -> Self {
        Self {
            vertices,
            degenerate,
        }
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// True when the region collapsed to a segment or point.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    /// Signed support: max over vertices of Re(e^{-i theta} v).
    pub fn support(&self, theta: f64) -> f64 {
        let dir = Complex64::from_polar(1.0, -theta);
        self.vertices
            .iter()
            .map(|v| (dir * v).re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Point-in-region test with tolerance (works for degenerate regions).
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        if self.vertices.len() == 1 {
            return (z - self.vertices[0]).norm() <= tol;
        }
        if self.vertices.len() == 2 || self.degenerate {
            return self
                .vertices
                .windows(2)
                .chain(std::iter::once(
                    &[*self.vertices.last().unwrap(), self.vertices[0]][..],
                ))
                .any(|seg| dist_point_segment(z, seg[0], seg[1]) <= tol);
        }
        // inside all edges (counterclockwise polygon)
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let cross = (b.re - a.re) * (z.im - a.im) - (b.im - a.im) * (z.re - a.re);
            let edge_len = (b - a).norm().max(1e-300);
            if cross / edge_len < -tol {
                return false;
            }
        }
        true
    }

    /// Hausdorff distance between the boundaries/points of two regions,
    /// estimated from vertices against edges.
    pub fn hausdorff(&self, other: &ConvexRegion) -> f64 {
        let d1 = directed_hausdorff(&self.vertices, &other.vertices);
        let d2 = directed_hausdorff(&other.vertices, &self.vertices);
        d1.max(d2)
    }
}

fn polygon_area(vs: &[Complex64]) -> f64 {
    if vs.len() < 3 {
        return 0.0;
    }
    let n = vs.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        acc += a.re * b.im - b.re * a.im;
    }
    0.5 * acc.abs()
}

fn dist_point_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a).re * ab.re) + ((p - a).im * ab.im)) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn directed_hausdorff(from: &[Complex64], to: &[Complex64]) -> f64 {
    if from.is_empty() || to.is_empty() {
        return if from.is_empty() && to.is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let mut worst = 0.0f64;
    let n = to.len();
    for &p in from {
        let mut best = f64::INFINITY;
        if n == 1 {
            best = (p - to[0]).norm();
        } else {
            for i in 0..n {
                let d = dist_point_segment(p, to[i], to[(i + 1) % n]);
                if d < best {
                    best = d;
                }
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Clip a polygon against the half-plane Re(e^{-i theta} z) <= offset
/// (Sutherland-Hodgman step).
fn clip_halfplane(poly: &[Complex64], theta: f64, offset: f64) -> Vec<Complex64> {
    let dir = Complex64::from_polar(1.0, -theta);
    let signed = |z: Complex64| (dir * z).re - offset;
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let cur = poly[i];
        let nxt = poly[(i + 1) % n];
        let sc = signed(cur);
        let sn = signed(nxt);
        if sc <= 0.0 {
            out.push(cur);
        }
        if (sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0) {
            let t = sc / (sc - sn);
            out.push(cur + (nxt - cur) * t);
        }
    }
    out
}

fn clip_fan(fan: &HalfPlaneFan, k: usize, slack: f64, bound: f64) -> Vec<Complex64> {
    let mut poly = vec![
        Complex64::new(-bound, -bound),
        Complex64::new(bound, -bound),
        Complex64::new(bound, bound),
        Complex64::new(-bound, bound),
    ];
    for (m, &theta) in fan.angles.iter().enumerate() {
        if poly.is_empty() {
            break;
        }
        poly = clip_halfplane(&poly, theta, fan.offsets[k - 1][m] + slack);
    }
    poly
}

const DEGENERACY_SLACK: f64 = 1e-9;

/// Exact minimum width of a convex polygon: the smallest over edges of the
/// farthest vertex distance to the edge line.
fn min_width(vs: &[Complex64]) -> f64 {
    if vs.len() < 3 {
        return 0.0;
    }
    let n = vs.len();
    let mut width = f64::INFINITY;
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        let e = b - a;
        let len = e.norm();
        if len < 1e-300 {
            continue;
        }
        let mut far = 0.0f64;
        for v in vs {
            let cross = (e.re * (v.im - a.im) - e.im * (v.re - a.re)).abs() / len;
            far = far.max(cross);
        }
        width = width.min(far);
    }
    width
}

fn region_from_fan(fan: &HalfPlaneFan, k: usize, scale: f64) -> ConvexRegion {
    let bound = 4.0 * scale.max(1.0);
    let strict = clip_fan(fan, k, 0.0, bound);
    if strict.len() >= 3 && min_width(&strict) > DEGENERACY_SLACK * scale.max(1.0) {
        return ConvexRegion {
            vertices: dedupe(strict, 1e-12 * scale.max(1.0)),
            degenerate: false,
        };
    }
    // Collapsed or empty under strict clipping. Re-clip with a relaxed
    // offset: a segment/point fattens to a thin sliver, a genuinely empty
    // set stays empty.
    let slack = DEGENERACY_SLACK * scale.max(1.0);
    let relaxed = clip_fan(fan, k, slack, bound);
    if relaxed.is_empty() {
        return ConvexRegion::empty();
    }
    // candidate points satisfying all strict constraints to the slack
    let centroid: Complex64 =
        relaxed.iter().sum::<Complex64>() / relaxed.len() as f64;
    let violation = fan
        .angles
        .iter()
        .enumerate()
        .map(|(m, &theta)| {
            let dir = Complex64::from_polar(1.0, -theta);
            (dir * centroid).re - fan.offsets[k - 1][m]
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if violation > slack {
        return ConvexRegion::empty();
    }
    // principal axis of the sliver -> report extremes as a 2-point segment
    // (or a single point when it has no extent)
    let dirs: Vec<Complex64> = relaxed.iter().map(|v| v - centroid).collect();
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for d in &dirs {
        sxx += d.re * d.re;
        sxy += d.re * d.im;
        syy += d.im * d.im;
    }
    let half_tr = 0.5 * (sxx + syy);
    let det = sxx * syy - sxy * sxy;
    let disc = (half_tr * half_tr - det).max(0.0).sqrt();
    let l1 = half_tr + disc;
    let axis = if sxy.abs() > 1e-300 {
        Complex64::new(l1 - syy, sxy)
    } else if sxx >= syy {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    let axis = axis / axis.norm().max(1e-300);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in &relaxed {
        let t = (v - centroid).re * axis.re + (v - centroid).im * axis.im;
        lo = lo.min(t);
        hi = hi.max(t);
    }
    if hi - lo <= 3.0 * slack {
        return ConvexRegion {
            vertices: vec![centroid],
            degenerate: true,
        };
    }
    ConvexRegion {
        vertices: vec![centroid + axis * lo, centroid + axis * hi],
        degenerate: true,
    }
}

fn dedupe(vs: Vec<Complex64>, tol: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(vs.len());
    for v in vs {
        if out.iter().all(|w| (v - w).norm() > tol) {
            out.push(v);
        }
    }
    out
}

/// Default angle count: half-degree resolution.
pub const DEFAULT_ANGLES: usize = 720;

/// Outer polygonal approximation of W(A) from T support half-planes.
pub fn numerical_range_boundary(a: &ComplexMatrix, t: usize) -> Result<ConvexRegion> {
    rank_k_range(a, 1, t)
}

/// Rank-k numerical range as an intersection of half-planes at the k-th
/// largest eigenvalue offsets. Possibly empty (reported, not an error).
pub fn rank_k_range(a: &ComplexMatrix, k: usize, t: usize) -> Result<ConvexRegion> {
    if k == 0 || k > a.dim() {
        return Err(invalid(format!(
            "rank_k_range: k = {k} out of range for dimension {}",
            a.dim()
        )));
    }
    let fan = HalfPlaneFan::compute(a, t)?;
    Ok(region_from_fan(&fan, k, a.max_row_sum()))
}

/// Numerical radius: max |z| over the W(A) polygon.
pub fn numerical_radius(a: &ComplexMatrix, t: usize) -> Result<f64> {
    let region = numerical_range_boundary(a, t)?;
    Ok(region
        .vertices()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::c;

    #[test]
    fn jordan_disc() {
        let j2 = ComplexMatrix::jordan(2);
        let region = numerical_range_boundary(&j2, 256).unwrap();
        assert!(!region.is_degenerate());
        for v in region.vertices() {
            assert!((v.norm() - 0.5).abs() < 1e-3, "|v|={}", v.norm());
        }
        let w = numerical_radius(&j2, 2048).unwrap();
        assert!((w - 0.5).abs() < 1e-4);
    }

    #[test]
    fn jordan_radius_family() {
        for n in 2..=8usize {
            let w = numerical_radius(&ComplexMatrix::jordan(n), 2048).unwrap();
            let expect = (std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((w - expect).abs() < 1e-4, "n={n}: {w} vs {expect}");
        }
        let w1 = numerical_radius(&ComplexMatrix::identity(3), 256).unwrap();
        assert!((w1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hermitian_diag_is_segment() {
        let d = ComplexMatrix::diagonal(&[c(-1.0, 0.0), c(0.5, 0.0), c(2.0, 0.0)]);
        let region = numerical_range_boundary(&d, 360).unwrap();
        assert!(region.is_degenerate());
        let vs = region.vertices();
        assert_eq!(vs.len(), 2);
        let mut ends = [vs[0].re, vs[1].re];
        ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ends[0] + 1.0).abs() < 1e-6);
        assert!((ends[1] - 2.0).abs() < 1e-6);
        assert!(vs.iter().all(|v| v.im.abs() < 1e-6));
    }

    #[test]
    fn rank2_of_diag_0135_is_segment_13() {
        let d = ComplexMatrix::diagonal(&[
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(3.0, 0.0),
            c(5.0, 0.0),
        ]);
        let region = rank_k_range(&d, 2, 720).unwrap();
        assert!(region.is_degenerate());
        let vs = region.vertices();
        assert_eq!(vs.len(), 2);
        let mut ends = [vs[0].re, vs[1].re];
        ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ends[0] - 1.0).abs() < 1e-6, "{ends:?}");
        assert!((ends[1] - 3.0).abs() < 1e-6, "{ends:?}");
    }

    #[test]
    fn nesting_chain() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.3, -0.1), c(1.2, 0.4), c(0.0, 0.9), c(0.1, 0.0)],
            vec![c(-0.5, 0.2), c(0.8, 0.0), c(0.1, -0.7), c(0.0, 0.3)],
            vec![c(0.6, 0.6), c(-0.2, 0.1), c(-0.9, 0.3), c(0.5, 0.0)],
            vec![c(0.0, 0.2), c(0.7, -0.4), c(0.0, 0.0), c(0.2, -0.2)],
        ]);
        let r1 = rank_k_range(&a, 1, 256).unwrap();
        let r2 = rank_k_range(&a, 2, 256).unwrap();
        for v in r2.vertices() {
            assert!(r1.contains(*v, 1e-7), "nesting violated at {v}");
        }
        assert!(rank_k_range(&a, 0, 256).is_err());
        assert!(rank_k_range(&a, 5, 256).is_err());
    }

    #[test]
    fn direct_sum_is_hull_of_parts() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.5, 0.5)],
        ]);
        let b = ComplexMatrix::diagonal(&[c(-1.0, -1.0)]);
        let sum = a.direct_sum(&b);
        let rs = numerical_range_boundary(&sum, 512).unwrap();
        let ra = numerical_range_boundary(&a, 512).unwrap();
        // every vertex of W(A) inside W(A + B), and the point -1-i too
        // (both are outer polygon approximations; 1e-4 absorbs the T=512
        // circumscription excess)
        for v in ra.vertices() {
            assert!(rs.contains(*v, 1e-4));
        }
        assert!(rs.contains(c(-1.0, -1.0), 1e-6));
        // support function of the sum equals the max of the parts
        for m in 0..16 {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / 16.0;
            let sa = ra.support(theta);
            let sb = (Complex64::from_polar(1.0, -theta) * c(-1.0, -1.0)).re;
            let ss = rs.support(theta);
            assert!((ss - sa.max(sb)).abs() < 1e-4);
        }
    }

    #[test]
    fn empty_rank_k() {
        // Lambda_2 of a generic 2x2 matrix is empty
        let a = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.4, 0.2)],
            vec![c(0.0, 0.0), c(-1.0, 0.5)],
        ]);
        let region = rank_k_range(&a, 2, 128).unwrap();
        assert!(region.is_empty());
    }

    #[test]
    fn rank_n_of_scalar_is_point() {
        let a = ComplexMatrix::identity(3).scale(c(0.3, 0.7));
        let region = rank_k_range(&a, 3, 64).unwrap();
        assert!(region.is_degenerate());
        assert_eq!(region.vertices().len(), 1);
        assert!((region.vertices()[0] - c(0.3, 0.7)).norm() < 1e-6);
    }
}
