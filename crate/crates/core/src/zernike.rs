//! Moment-driven density approximation: truncated expansions in the complex
//! Zernike polynomials, orthogonal over the unit disk. Coefficients come
//! straight from the series coefficients of 1/xi, so no sampling is needed.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::matrix::ComplexMatrix;
use crate::moments::series_inverse;
use crate::sampler::{BoundingBox, Grid2D, Normalization};
use crate::util::ln_gamma;
use crate::xi::{xi_poly, xi_shifted};

/// Z_mn(z, conj z): for m >= n,
/// z^(m-n) sum_{j=0}^{n} (m+n-j)!/((m-j)!(n-j)!j!) (-1)^j (z conj z)^(n-j);
/// for m < n the conjugate of Z_nm.
pub fn zernike_poly(m: usize, n: usize, z: Complex64) -> Complex64 {
    if m < n {
        return zernike_poly(n, m, z).conj();
    }
    let r2 = z.norm_sqr();
    let mut acc = 0.0f64;
    for j in 0..=n {
        // (m+n-j)! / ((m-j)! (n-j)! j!) in log space
        let lf = ln_gamma((m + n - j + 1) as f64)
            - ln_gamma((m - j + 1) as f64)
            - ln_gamma((n - j + 1) as f64)
            - ln_gamma((j + 1) as f64);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * lf.exp() * r2.powi((n - j) as i32);
    }
    z.powu((m - n) as u32) * acc
}

/// Truncated Zernike expansion of a shadow density, after the affine
/// rescale w = scale * (z - center) that puts the numerical range inside
/// the disk of radius 0.95.
#[derive(Clone, Debug)]
pub struct ZernikeExpansion {
    pub max_order: usize,
    /// coeffs[(m,n)] for m + n <= max_order
    pub coeffs: BTreeMap<(usize, usize), Complex64>,
    /// rescale w = scale * (z - center)
    pub center: Complex64,
    pub scale: f64,
}

impl ZernikeExpansion {
    pub fn coeff(&self, m: usize, n: usize) -> Complex64 {
        self.coeffs
            .get(&(m, n))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Partial sum of the rescaled density at w inside the unit disk:
    /// (1/pi) sum (m+n+1) f_mn Z_mn(w).
    pub fn eval_unit(&self, w: Complex64) -> f64 {
        if w.norm_sqr() > 1.0 {
            return 0.0;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(m, n), &f) in &self.coeffs {
            acc += (m + n + 1) as f64 * f * zernike_poly(m, n, w);
        }
        acc.re / std::f64::consts::PI
    }

    /// Density approximation at a point of the original plane: the rescale
    /// contributes the Jacobian factor scale^2.
    pub fn eval(&self, z: Complex64) -> f64 {
        let w = (z - self.center) * self.scale;
        self.scale * self.scale * self.eval_unit(w)
    }

    /// Raster of the density approximation on the given box (cells outside
    /// the rescaled unit disk hold zero).
    pub fn eval_grid(&self, bbox: BoundingBox, nx: usize, ny: usize) -> Result<Grid2D> {
        let dx = (bbox.x1 - bbox.x0) / nx as f64;
        let dy = (bbox.y1 - bbox.y0) / ny as f64;
        let mut grid = Grid2D::zeros(Complex64::new(bbox.x0, bbox.y0), dx, dy, nx, ny)?;
        let rows: Vec<Vec<f64>> = (0..ny)
            .into_par_iter()
            .map(|iy| {
                (0..nx)
                    .map(|ix| {
                        let z = Complex64::new(
                            bbox.x0 + (ix as f64 + 0.5) * dx,
                            bbox.y0 + (iy as f64 + 0.5) * dy,
                        );
                        self.eval(z)
                    })
                    .collect()
            })
            .collect();
        for (iy, row) in rows.into_iter().enumerate() {
            for (ix, v) in row.into_iter().enumerate() {
                *grid.value_mut(ix, iy) = v;
            }
        }
        grid.normalization = Normalization::Density;
        Ok(grid)
    }
}

/// Zernike coefficients of the shadow density of A to total order M:
/// f_mn = sum_{j=0}^{n} (m+n-j)!/(j! (N)_{m+n-2j}) (-1)^j c[n-j][m-j]
/// where c is the series of 1/xi_B and B the rescaled matrix.
pub fn zernike_coeffs(a: &ComplexMatrix, max_order: usize) -> Result<ZernikeExpansion> {
    if max_order > crate::moments::MAX_MOMENT_ORDER {
        return Err(invalid(format!(
            "zernike order {max_order} exceeds the moment ceiling"
        )));
    }
    let n_dim = a.dim();
    let center = a.mean_point();
    let radius = crate::range::numerical_radius(&a.shift(center), 1024)?;
    let scale = if radius > 1e-12 { 0.95 / radius } else { 1.0 };
    // xi of B = scale * (A - center I): shift then scale the arguments
    let xi_a = xi_poly(a)?;
    let shifted = xi_shifted(&xi_a, center);
    let mut coeffs_b = shifted.coeffs().clone();
    for (j, row) in coeffs_b.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v *= Complex64::new(scale.powi((j + k) as i32), 0.0);
        }
    }
    let xi_b = crate::xi::BivariatePoly::from_coeffs(coeffs_b);
    let series = series_inverse(&xi_b, max_order)?;
    let mut coeffs = BTreeMap::new();
    for m in 0..=max_order {
        for n in 0..=(max_order - m) {
            if m < n {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..=n {
                let order = m + n - 2 * j;
                // (m+n-j)! / (j! (N)_order) in log space
                let lf = ln_gamma((m + n - j + 1) as f64)
                    - ln_gamma((j + 1) as f64)
                    - (ln_gamma((n_dim + order) as f64) - ln_gamma(n_dim as f64));
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * lf.exp() * series[n - j][m - j];
            }
            coeffs.insert((m, n), acc);
            if m != n {
                coeffs.insert((n, m), acc.conj());
            }
        }
    }
    Ok(ZernikeExpansion {
        max_order,
        coeffs,
        center,
        scale,
    })
}
