//! Everything derived from the Hermitian sections Re(e^{-i theta} A): exact
//! 1-D shadow densities (truncated-power splines), Radon-transform marginals
//! and their moments, and the critical curves traced by the eigenvalue
//! branches.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::eigen::hermitian_eigenvalues;
use crate::error::{invalid, numerical, Result};
use crate::matrix::{coincidence_tol, ComplexMatrix, HermitianMatrix, Spectrum};
use crate::util::{binomial, chebyshev_nodes, factorial_ratio, lstsq, pochhammer, series_reciprocal};
use crate::xi::xi_poly;

/// Eigenvalue gap below which branches are treated as crossing/degenerate.
pub const CROSSING_TOL: f64 = 1e-7;

/// Per-angle spectra of Re(e^{-i theta} A), ascending within each angle.
pub fn eig_sweep(a: &ComplexMatrix, thetas: &[f64]) -> Result<Vec<Spectrum>> {
    if thetas.is_empty() {
        return Err(invalid("eig_sweep: empty angle grid"));
    }
    thetas
        .par_iter()
        .map(|&theta| hermitian_eigenvalues(&a.re_rotated(theta)))
        .collect()
}

/// Exact density of the shadow of a non-scalar Hermitian matrix: a spline of
/// degree N-2 in the truncated power basis, with knots at the eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianShadowDensity {
    pub dim: usize,
    /// distinct nonzero eigenvalues
    pub distinct_eigs: Vec<f64>,
    pub mults: Vec<usize>,
    /// pf_coeffs[i][j-1] = beta_ij, 1 <= j <= mults[i]
    pub pf_coeffs: Vec<Vec<f64>>,
    pub support: (f64, f64),
}

/// x_+^e with the convention x_+^0 = 1 for x >= 0 and 0 for x < 0.
#[inline]
fn truncated_power(x: f64, e: i32) -> f64 {
    if x < 0.0 {
        0.0
    } else if e == 0 {
        1.0
    } else {
        x.powi(e)
    }
}

impl HermitianShadowDensity {
    /// Density value at x.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.dim as i32;
        let mut acc = 0.0;
        for (i, &mu) in self.distinct_eigs.iter().enumerate() {
            for (jm1, &beta) in self.pf_coeffs[i].iter().enumerate() {
                let j = (jm1 + 1) as i32;
                let coef = beta * j as f64 * binomial(self.dim - 1, j as usize)
                    * mu.abs().powi(1 - n);
                acc += if mu > 0.0 {
                    coef * truncated_power(x, j - 1) * truncated_power(mu - x, n - j - 1)
                } else {
                    coef * truncated_power(-x, j - 1) * truncated_power(x - mu, n - j - 1)
                };
            }
        }
        acc
    }

    /// Exact n-th moment: sum beta_ij (j)_n / (N)_n mu_i^n.
    pub fn moment(&self, n: usize) -> f64 {
        let mut acc = 0.0;
        for (i, &mu) in self.distinct_eigs.iter().enumerate() {
            for (jm1, &beta) in self.pf_coeffs[i].iter().enumerate() {
                let j = jm1 + 1;
                acc += beta * pochhammer(j as f64, n) / pochhammer(self.dim as f64, n)
                    * mu.powi(n as i32);
            }
        }
        acc
    }

    /// Mass by quadrature over the support (piecewise polynomial, so the
    /// adaptive rule converges fast).
    pub fn mass_quadrature(&self) -> f64 {
        crate::util::integrate(&|x| self.eval(x), self.support.0, self.support.1, 1e-11)
    }
}

/// A Hermitian shadow: an atom for scalar matrices, otherwise an absolutely
/// continuous spline density.
#[derive(Clone, Debug)]
pub enum HermitianShadow {
    Atom(f64),
    Density(HermitianShadowDensity),
}

/// Exact shadow density of a Hermitian matrix via partial fractions of
/// 1/xi_H. Scalar matrices give the atomic flag.
pub fn hermitian_density(h: &HermitianMatrix) -> Result<HermitianShadow> {
    let spectrum = hermitian_eigenvalues(h)?;
    let tol = coincidence_tol(spectrum.spectral_radius());
    let groups = spectrum.grouped();
    if groups.len() == 1 {
        return Ok(HermitianShadow::Atom(groups[0].0));
    }
    let nonzero: Vec<(f64, usize)> = groups
        .iter()
        .copied()
        .filter(|(mu, _)| mu.abs() > tol)
        .collect();
    let mu: Vec<f64> = nonzero.iter().map(|(m, _)| *m).collect();
    let mults: Vec<usize> = nonzero.iter().map(|(_, k)| *k).collect();
    let unknowns: usize = mults.iter().sum();
    // beta_ij from an overdetermined linear system at Chebyshev nodes
    // inside the convergence disc of 1/xi_H
    let max_abs = mu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rho = 0.45 / max_abs;
    let rows = 2 * unknowns + 8;
    let nodes: Vec<f64> = chebyshev_nodes(rows).iter().map(|&x| x * rho).collect();
    let mut a = vec![0.0f64; rows * unknowns];
    let mut b = vec![0.0f64; rows];
    for (row, &r) in nodes.iter().enumerate() {
        let mut col = 0usize;
        for (i, &m) in mu.iter().enumerate() {
            for j in 1..=mults[i] {
                a[row * unknowns + col] = (1.0 - r * m).powi(-(j as i32));
                col += 1;
            }
        }
        b[row] = mu
            .iter()
            .zip(&mults)
            .map(|(&m, &k)| (1.0 - r * m).powi(-(k as i32)))
            .product();
    }
    let (x, resid) = lstsq(&a, rows, unknowns, &b);
    if resid > 1e-10 {
        return Err(numerical(format!(
            "hermitian_density: partial-fraction residual {resid:.3e} exceeds 1e-10"
        )));
    }
    let mut pf_coeffs = Vec::with_capacity(mu.len());
    let mut idx = 0usize;
    for &k in &mults {
        pf_coeffs.push(x[idx..idx + k].to_vec());
        idx += k;
    }
    Ok(HermitianShadow::Density(HermitianShadowDensity {
        dim: h.dim(),
        distinct_eigs: mu,
        mults,
        pf_coeffs,
        support: (spectrum.min(), spectrum.max()),
    }))
}

/// Marginal (Radon transform) of the shadow of A along direction theta: the
/// shadow density of Re(e^{-i theta} A).
pub fn marginal_density(a: &ComplexMatrix, theta: f64) -> Result<HermitianShadow> {
    hermitian_density(&a.re_rotated(theta))
}

/// n-th moment of the marginal: n!/(N)_n [r^n] xi_A(r e^{-i theta}/2, r e^{i theta}/2)^{-1}.
pub fn marginal_moment(a: &ComplexMatrix, theta: f64, n: usize) -> Result<f64> {
    let xi = xi_poly(a)?;
    let half = Complex64::new(0.5, 0.0);
    let ray = xi.restrict_ray(
        half * Complex64::from_polar(1.0, -theta),
        half * Complex64::from_polar(1.0, theta),
    );
    let inv = series_reciprocal(&ray, n);
    let val = inv[n] * factorial_ratio(n, 0, a.dim());
    if val.im.abs() > 1e-8 * val.re.abs().max(1.0) {
        return Err(numerical(format!(
            "marginal_moment: nonreal moment {val}"
        )));
    }
    Ok(val.re)
}

/// Variance of the marginal along theta.
pub fn marginal_variance(a: &ComplexMatrix, theta: f64) -> Result<f64> {
    let m1 = marginal_moment(a, theta, 1)?;
    let m2 = marginal_moment(a, theta, 2)?;
    Ok(m2 - m1 * m1)
}

/// Characteristic-polynomial data of H(theta) = Re(e^{-i theta} A) needed
/// for implicit differentiation: elementary symmetric functions e_j of the
/// spectrum and their theta-derivatives, from power-sum traces.
struct CharPolyDerivative {
    /// e[j], j = 0..=N
    e: Vec<f64>,
    /// de[j]/dtheta
    de: Vec<f64>,
}

fn charpoly_with_derivative(a: &ComplexMatrix, theta: f64) -> CharPolyDerivative {
    let n = a.dim();
    let h = a.re_rotated(theta);
    // dH/dtheta = Re(-i e^{-i theta} A)
    let minus_i = Complex64::new(0.0, -1.0);
    let hdot = HermitianMatrix::symmetrize(
        &a.scale(minus_i * Complex64::from_polar(1.0, -theta)),
    );
    // power sums p_i = tr(H^i) and dp_i = i tr(H^(i-1) Hdot)
    let mut p = vec![0.0f64; n + 1];
    let mut dp = vec![0.0f64; n + 1];
    let mut power = ComplexMatrix::identity(n); // H^(i-1)
    for i in 1..=n {
        let mixed = power.mul(hdot.as_matrix()).trace().re;
        power = power.mul(h.as_matrix());
        p[i] = power.trace().re;
        dp[i] = i as f64 * mixed;
    }
    // Newton: j e_j = sum_{i=1..j} (-1)^(i-1) p_i e_{j-i}, differentiated
    let mut e = vec![0.0f64; n + 1];
    let mut de = vec![0.0f64; n + 1];
    e[0] = 1.0;
    for j in 1..=n {
        let mut acc = 0.0;
        let mut dacc = 0.0;
        for i in 1..=j {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * p[i] * e[j - i];
            dacc += sign * (dp[i] * e[j - i] + p[i] * de[j - i]);
        }
        e[j] = acc / j as f64;
        de[j] = dacc / j as f64;
    }
    CharPolyDerivative { e, de }
}

impl CharPolyDerivative {
    /// p(theta, lambda) = det(lambda I - H) = sum (-1)^j e_j lambda^(N-j)
    fn d_lambda(&self, lambda: f64) -> f64 {
        let n = self.e.len() - 1;
        let mut acc = 0.0;
        for j in 0..n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * self.e[j] * (n - j) as f64 * lambda.powi((n - j - 1) as i32);
        }
        acc
    }

    fn d_theta(&self, lambda: f64) -> f64 {
        let n = self.e.len() - 1;
        let mut acc = 0.0;
        for j in 1..=n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * self.de[j] * lambda.powi((n - j) as i32);
        }
        acc
    }
}

/// Derivative of one eigenvalue branch of Re(e^{-i theta} A), by implicit
/// differentiation of det(lambda I - H(theta)) = 0. Near-degenerate branches
/// fall back to a one-sided finite difference and are flagged.
pub fn lambda_prime(a: &ComplexMatrix, theta: f64, branch: usize) -> Result<(f64, bool)> {
    let spectrum = hermitian_eigenvalues(&a.re_rotated(theta))?;
    if branch >= spectrum.len() {
        return Err(invalid(format!(
            "lambda_prime: branch {branch} out of range for N = {}",
            spectrum.len()
        )));
    }
    let lambda = spectrum.values()[branch];
    let gap = spectrum
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != branch)
        .map(|(_, &v)| (v - lambda).abs())
        .fold(f64::INFINITY, f64::min);
    let scale = spectrum.spectral_radius().max(1.0);
    if gap < CROSSING_TOL * scale {
        // flagged: one-sided finite difference on the sorted branch
        let h = 1e-6;
        let forward = hermitian_eigenvalues(&a.re_rotated(theta + h))?;
        return Ok(((forward.values()[branch] - lambda) / h, true));
    }
    let cp = charpoly_with_derivative(a, theta);
    Ok((-cp.d_theta(lambda) / cp.d_lambda(lambda), false))
}

/// One sample of a critical curve.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub theta: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub z: Complex64,
}

/// A critical curve: the theta-trace of one equivalence class of eigenvalue
/// branches, z = e^{i theta}(lambda_j(theta) + i lambda_j'(theta)).
#[derive(Clone, Debug)]
pub struct CriticalCurve {
    pub branch_index: usize,
    pub samples: Vec<CurvePoint>,
    /// theta values of detected cusps (where lambda + lambda'' crosses zero)
    pub cusps: Vec<f64>,
    /// planar positions matching `cusps`
    pub cusp_positions: Vec<Complex64>,
    /// theta values where branches came within the crossing tolerance
    pub crossings: Vec<f64>,
    /// true for the class containing the top branch (boundary of W(A))
    pub outer: bool,
}

struct BranchTracks {
    thetas: Vec<f64>,
    /// values[b][i] = lambda of analytic branch b at theta_i
    values: Vec<Vec<f64>>,
    /// derivative along the branch
    derivs: Vec<Vec<f64>>,
    /// flagged[b][i]: the sample sat inside the crossing tolerance, so the
    /// stored derivative is interpolated rather than computed
    flagged: Vec<Vec<bool>>,
    crossings: Vec<f64>,
}

/// Follow analytic eigenvalue branches around the circle. Branches start in
/// ascending order at grid[0]; at each step the sorted eigenvalues are
/// assigned to branches by derivative continuation: each branch predicts its
/// next value and takes the sorted slot matching its prediction rank. This
/// resolves arbitrary permutations at (multiple) crossings.
fn track_branches(a: &ComplexMatrix, n_theta: usize) -> Result<BranchTracks> {
    let n = a.dim();
    let total = 2.0 * std::f64::consts::PI;
    // extended grid: one extra half-turn for class construction
    let steps = n_theta + n_theta / 2 + 1;
    let thetas: Vec<f64> = (0..steps)
        .map(|i| total * i as f64 / n_theta as f64)
        .collect();
    let spectra = eig_sweep(a, &thetas)?;
    let scale = spectra[0].spectral_radius().max(1.0);
    let mut values = vec![vec![0.0f64; steps]; n];
    let mut derivs = vec![vec![0.0f64; steps]; n];
    let mut flagged = vec![vec![false; steps]; n];
    let mut crossings = Vec::new();
    // positions[b] = slot of branch b in the sorted order at the current step
    let mut positions: Vec<usize> = (0..n).collect();
    // last derivative computed away from a crossing, per branch
    let mut last_good = vec![0.0f64; n];
    for i in 0..steps {
        let sorted = spectra[i].values();
        let cp = charpoly_with_derivative(a, thetas[i]);
        if i > 0 {
            let dt = thetas[i] - thetas[i - 1];
            // each branch predicts its new value; prediction ranks define the
            // new slot assignment
            let mut order: Vec<usize> = (0..n).collect();
            let predictions: Vec<f64> = (0..n)
                .map(|b| values[b][i - 1] + last_good[b] * dt)
                .collect();
            order.sort_by(|&x, &y| predictions[x].partial_cmp(&predictions[y]).unwrap());
            for (slot, &b) in order.iter().enumerate() {
                positions[b] = slot;
            }
            for s in 1..n {
                if (sorted[s] - sorted[s - 1]).abs() < CROSSING_TOL * scale {
                    crossings.push(thetas[i]);
                }
            }
        }
        for b in 0..n {
            let lambda = sorted[positions[b]];
            values[b][i] = lambda;
            let gap = sorted
                .iter()
                .enumerate()
                .filter(|(s, _)| *s != positions[b])
                .map(|(_, &v)| (v - lambda).abs())
                .fold(f64::INFINITY, f64::min);
            if gap < CROSSING_TOL * scale {
                // production derivative undefined at a crossing; carry the
                // branch derivative forward and mark the sample
                derivs[b][i] = last_good[b];
                flagged[b][i] = true;
            } else {
                let lp = -cp.d_theta(lambda) / cp.d_lambda(lambda);
                derivs[b][i] = lp;
                last_good[b] = lp;
            }
        }
    }
    // smooth flagged derivative samples by branch-local interpolation
    for b in 0..n {
        for i in 0..steps {
            if flagged[b][i] {
                let prev = if i > 0 && !flagged[b][i - 1] {
                    Some(derivs[b][i - 1])
                } else {
                    None
                };
                let next = if i + 1 < steps && !flagged[b][i + 1] {
                    Some(derivs[b][i + 1])
                } else {
                    None
                };
                derivs[b][i] = match (prev, next) {
                    (Some(x), Some(y)) => 0.5 * (x + y),
                    (Some(x), None) => x,
                    (None, Some(y)) => y,
                    (None, None) => derivs[b][i],
                };
            }
        }
    }
    Ok(BranchTracks {
        thetas,
        values,
        derivs,
        flagged,
        crossings,
    })
}

/// Critical curves of A over a theta grid of n_theta points (n_theta >= 16).
/// Branches are grouped into equivalence classes (lambda_i(theta0) =
/// -lambda_j(theta0 + pi), extended by transitivity, with theta0 a
/// maximal-gap angle); each class yields one curve with its member branches
/// concatenated.
pub fn critical_curves(
    a: &ComplexMatrix,
    n_theta: usize,
    branch_tracking: bool,
) -> Result<Vec<CriticalCurve>> {
    if n_theta < 16 {
        return Err(invalid("critical_curves: n_theta must be >= 16"));
    }
    let n = a.dim();
    let tracks = if branch_tracking {
        track_branches(a, n_theta)?
    } else {
        // no tracking: branches are the sorted positions
        let total = 2.0 * std::f64::consts::PI;
        let steps = n_theta + n_theta / 2 + 1;
        let thetas: Vec<f64> = (0..steps)
            .map(|i| total * i as f64 / n_theta as f64)
            .collect();
        let spectra = eig_sweep(a, &thetas)?;
        let mut values = vec![vec![0.0f64; steps]; n];
        let mut derivs = vec![vec![0.0f64; steps]; n];
        for (i, spec) in spectra.iter().enumerate() {
            for b in 0..n {
                values[b][i] = spec.values()[b];
                let (lp, _) = lambda_prime(a, thetas[i], b)?;
                derivs[b][i] = lp;
            }
        }
        let steps = thetas.len();
        BranchTracks {
            thetas,
            values,
            derivs,
            flagged: vec![vec![false; steps]; n],
            crossings: Vec::new(),
        }
    };
    let steps_per_pi = n_theta / 2;
    // theta0 index: maximal minimum-gap angle within the first turn
    let mut best_idx = 0usize;
    let mut best_gap = f64::NEG_INFINITY;
    for i in 0..n_theta {
        let mut sorted: Vec<f64> = (0..n).map(|b| tracks.values[b][i]).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let gap = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if gap > best_gap {
            best_gap = gap;
            best_idx = i;
        }
    }
    let i0 = best_idx.min(tracks.thetas.len() - steps_per_pi - 1);
    let scale = (0..n)
        .map(|b| tracks.values[b][0].abs())
        .fold(1.0f64, f64::max);
    // class partition: b ~ b' when lambda_b(theta0) == -lambda_b'(theta0+pi)
    let mut class = (0..n).collect::<Vec<usize>>();
    fn find(class: &mut Vec<usize>, x: usize) -> usize {
        if class[x] != x {
            let root = find(class, class[x]);
            class[x] = root;
        }
        class[x]
    }
    let match_tol = (1e-6 * scale).max(10.0 * CROSSING_TOL);
    for b in 0..n {
        let target = -tracks.values[b][i0];
        for b2 in 0..n {
            if (tracks.values[b2][i0 + steps_per_pi] - target).abs() < match_tol {
                let (ra, rb) = (find(&mut class, b), find(&mut class, b2));
                if ra != rb {
                    class[ra] = rb;
                }
            }
        }
    }
    let mut class_ids: Vec<usize> = Vec::new();
    let mut curves: Vec<CriticalCurve> = Vec::new();
    let mut cusp_candidates: Vec<Vec<(f64, Complex64)>> = Vec::new();
    let top_branch = (0..n)
        .max_by(|&x, &y| {
            tracks.values[x][i0]
                .partial_cmp(&tracks.values[y][i0])
                .unwrap()
        })
        .unwrap();
    let top_root = find(&mut class, top_branch);
    for b in 0..n {
        let root = find(&mut class, b);
        let curve_idx = match class_ids.iter().position(|&c| c == root) {
            Some(idx) => idx,
            None => {
                class_ids.push(root);
                curves.push(CriticalCurve {
                    branch_index: class_ids.len() - 1,
                    samples: Vec::new(),
                    cusps: Vec::new(),
                    cusp_positions: Vec::new(),
                    crossings: tracks.crossings.clone(),
                    outer: root == top_root,
                });
                cusp_candidates.push(Vec::new());
                class_ids.len() - 1
            }
        };
        // one full turn per member branch
        for i in 0..n_theta {
            let theta = tracks.thetas[i];
            let lambda = tracks.values[b][i];
            let lp = tracks.derivs[b][i];
            let z = Complex64::from_polar(1.0, theta) * Complex64::new(lambda, lp);
            curves[curve_idx].samples.push(CurvePoint {
                theta,
                lambda,
                lambda_prime: lp,
                z,
            });
        }
        // cusp scan on this branch: zeros of g = lambda + lambda''. The
        // extended grid avoids wrapping the stencil across the 2 pi seam
        // (branch sheets permute there); samples whose stencil touches a
        // crossing are skipped because interpolated derivatives produce
        // spurious sign changes.
        let dt = tracks.thetas[1] - tracks.thetas[0];
        let steps = tracks.thetas.len();
        let clean = |i: usize| -> bool {
            (i.saturating_sub(2)..=(i + 2).min(steps - 1)).all(|s| !tracks.flagged[b][s])
        };
        let g_at = |i: usize| -> f64 {
            let second = (tracks.derivs[b][i + 1] - tracks.derivs[b][i - 1]) / (2.0 * dt);
            tracks.values[b][i] + second
        };
        for i in 1..=n_theta.min(steps - 3) {
            let j = i + 1;
            if !clean(i) || !clean(j) {
                continue;
            }
            let (gi, gj) = (g_at(i), g_at(j));
            if gi == 0.0 || (gi < 0.0) != (gj < 0.0) {
                // linear interpolation of the zero, reported within [0, 2 pi)
                let t = gi / (gi - gj);
                if t.is_finite() && (0.0..=1.0).contains(&t) {
                    let theta_star = (tracks.thetas[i] + t * dt)
                        .rem_euclid(2.0 * std::f64::consts::PI);
                    let z_at = |idx: usize| {
                        Complex64::from_polar(1.0, tracks.thetas[idx])
                            * Complex64::new(tracks.values[b][idx], tracks.derivs[b][idx])
                    };
                    let z = z_at(i) + (z_at(j) - z_at(i)) * t;
                    cusp_candidates[curve_idx].push((theta_star, z));
                }
            }
        }
    }
    // deduplicate cusps per curve by position in the plane (the same cusp is
    // typically detected on two member branches)
    for (curve, candidates) in curves.iter_mut().zip(&cusp_candidates) {
        let mut kept: Vec<f64> = Vec::new();
        let mut kept_pos: Vec<Complex64> = Vec::new();
        for &(theta, z) in candidates {
            if kept_pos.iter().all(|w| (z - w).norm() > 1e-3 * scale.max(1.0)) {
                kept.push(theta);
                kept_pos.push(z);
            }
        }
        curve.cusps = kept;
        curve.cusp_positions = kept_pos;
    }
    Ok(curves)
}

/// Convex hull (monotone chain) of a point cloud, as a ConvexRegion.
pub fn convex_hull(points: &[Complex64]) -> crate::range::ConvexRegion {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    pts.dedup_by(|a, b| (*a - *b).norm() < 1e-14);
    if pts.len() < 3 {
        return crate::range::ConvexRegion::from_vertices(pts, true);
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| {
        (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
    };
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    crate::range::ConvexRegion::from_vertices(lower, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::c;

    fn a1() -> ComplexMatrix {
        ComplexMatrix::jordan(4)
    }

    fn a2() -> ComplexMatrix {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        ComplexMatrix::from_rows(vec![
            vec![z, o, o, o],
            vec![z, z, o, o],
            vec![z, z, z, o],
            vec![z, z, z, z],
        ])
    }

    fn a3() -> ComplexMatrix {
        ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        ])
    }

    #[test]
    fn sweep_a1_constant_spectrum() {
        let thetas: Vec<f64> = (0..32).map(|i| i as f64 * 0.196).collect();
        let spectra = eig_sweep(&a1(), &thetas).unwrap();
        let s5 = 5.0f64.sqrt();
        let expect = [-(1.0 + s5) / 4.0, (1.0 - s5) / 4.0, (s5 - 1.0) / 4.0, (1.0 + s5) / 4.0];
        for spec in &spectra {
            for (got, want) in spec.values().iter().zip(&expect) {
                assert!((got - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sweep_a2_closed_forms() {
        let thetas: Vec<f64> = (-8..=8).map(|i| i as f64 * std::f64::consts::PI / 16.0).collect();
        let spectra = eig_sweep(&a2(), &thetas).unwrap();
        for (i, &theta) in thetas.iter().enumerate() {
            let l4 = 0.5 + (theta / 2.0).cos();
            let l1 = -0.5 - (theta / 2.0).sin().abs();
            assert!((spectra[i].max() - l4).abs() < 1e-10, "theta={theta}");
            assert!((spectra[i].min() - l1).abs() < 1e-10, "theta={theta}");
        }
    }

    #[test]
    fn sweep_antisymmetry() {
        let a = a3();
        let thetas = [0.3, 0.3 + std::f64::consts::PI];
        let spectra = eig_sweep(&a, &thetas).unwrap();
        let n = 3;
        for j in 0..n {
            let lhs = spectra[1].values()[j];
            let rhs = -spectra[0].values()[n - 1 - j];
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn a3_spectrum_at_zero() {
        let spec = eig_sweep(&a3(), &[0.0]).unwrap().remove(0);
        let s17 = 17.0f64.sqrt();
        let expect = [-(1.0 + s17) / 4.0, -0.5, (s17 - 1.0) / 4.0];
        for (got, want) in spec.values().iter().zip(&expect) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_density_diag01() {
        let h = HermitianMatrix::from_real_diagonal(&[0.0, 1.0]);
        let HermitianShadow::Density(d) = hermitian_density(&h).unwrap() else {
            panic!("non-scalar")
        };
        for i in 1..10 {
            let x = i as f64 / 10.0;
            assert!((d.eval(x) - 1.0).abs() < 1e-10, "x={x}");
        }
        assert_eq!(d.eval(-0.1), 0.0);
        assert_eq!(d.eval(1.1), 0.0);
        assert!((d.moment(1) - 0.5).abs() < 1e-12);
        assert!((d.mass_quadrature() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn scalar_gives_atom() {
        let h = HermitianMatrix::from_real_diagonal(&[0.7, 0.7, 0.7]);
        assert!(matches!(
            hermitian_density(&h).unwrap(),
            HermitianShadow::Atom(v) if (v - 0.7).abs() < 1e-12
        ));
    }

    #[test]
    fn re_a2_spline_with_peak() {
        // eigenvalues (3/2, -1/2, -1/2, -1/2): density has a jump peak at -1/2
        // and equals (3/8)x^2 - (9/8)x + 27/32 on [-1/2, 0],
        // (3/8)(3/2 - x)^2 on [0, 3/2]
        let HermitianShadow::Density(d) = marginal_density(&a2(), 0.0).unwrap() else {
            panic!()
        };
        for i in 0..50 {
            let x = -0.5 + 0.5 * (i as f64 + 0.5) / 50.0;
            let expect = 0.375 * x * x - 1.125 * x + 27.0 / 32.0;
            assert!((d.eval(x) - expect).abs() < 1e-9, "x={x}");
        }
        for i in 0..50 {
            let x = 1.5 * (i as f64 + 0.5) / 50.0;
            let expect = 0.375 * (1.5 - x) * (1.5 - x);
            assert!((d.eval(x) - expect).abs() < 1e-9, "x={x}");
        }
        // peak value 3/2 just right of -1/2
        assert!((d.eval(-0.5 + 1e-9) - 1.5).abs() < 1e-6);
        assert_eq!(d.eval(-0.5 - 1e-9), 0.0);
        assert!((d.mass_quadrature() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn re_a3_piecewise_linear_triangle() {
        // N=3 simple spectrum: density is the triangle law with peak at the
        // middle eigenvalue; compare against the geometric closed form
        let HermitianShadow::Density(d) = marginal_density(&a3(), 0.0).unwrap() else {
            panic!()
        };
        let s17 = 17.0f64.sqrt();
        let (m1, m2, m3) = (-(1.0 + s17) / 4.0, -0.5, (s17 - 1.0) / 4.0);
        let left = |x: f64| 2.0 * (x - m1) / ((m2 - m1) * (m3 - m1));
        let right = |x: f64| 2.0 * (m3 - x) / ((m3 - m2) * (m3 - m1));
        for i in 1..20 {
            let x = m1 + (m2 - m1) * i as f64 / 20.0;
            assert!((d.eval(x) - left(x)).abs() < 1e-9, "x={x}");
        }
        for i in 1..20 {
            let x = m2 + (m3 - m2) * i as f64 / 20.0;
            assert!((d.eval(x) - right(x)).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn diag_0135_spline_degree_two() {
        let h = HermitianMatrix::from_real_diagonal(&[0.0, 1.0, 3.0, 5.0]);
        let HermitianShadow::Density(d) = hermitian_density(&h).unwrap() else {
            panic!()
        };
        // knots at eigenvalues: the second derivative jumps there; the
        // density is continuous and mass-1
        assert!((d.mass_quadrature() - 1.0).abs() < 1e-8);
        for knot in [1.0f64, 3.0] {
            let eps = 1e-7;
            assert!((d.eval(knot + eps) - d.eval(knot - eps)).abs() < 1e-5);
        }
        // moments agree with the shadow-moment engine on the same matrix
        let m = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0), c(5.0, 0.0)]);
        for n in 0..=6usize {
            let nu = crate::moments::moment(&m, n, 0).unwrap();
            assert!((d.moment(n) - nu.re).abs() < 1e-8 * nu.re.abs().max(1.0), "n={n}");
        }
        // piecewise degree-2: third differences vanish inside pieces
        let h4 = 0.05;
        for x0 in [0.3f64, 1.7, 3.8] {
            let f = |x: f64| d.eval(x);
            let d3 = f(x0 + 1.5 * h4) - 3.0 * f(x0 + 0.5 * h4) + 3.0 * f(x0 - 0.5 * h4)
                - f(x0 - 1.5 * h4);
            assert!(d3.abs() < 1e-9, "x0={x0}");
        }
    }

    #[test]
    fn hermitian_a_marginal_at_zero_is_own_shadow() {
        let h = HermitianMatrix::from_real_diagonal(&[-1.0, 0.2, 2.0]);
        let m = h.as_matrix().clone();
        let HermitianShadow::Density(dm) = marginal_density(&m, 0.0).unwrap() else {
            panic!()
        };
        let HermitianShadow::Density(dh) = hermitian_density(&h).unwrap() else {
            panic!()
        };
        for i in 0..30 {
            let x = -1.0 + 3.0 * i as f64 / 30.0;
            assert!((dm.eval(x) - dh.eval(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn marginal_moments_a3() {
        let a = a3();
        // mean = Re(e^{-i theta} m_A); variance = (13 + 2 sin 2 theta)/72
        for i in 0..32 {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
            let mean = marginal_moment(&a, theta, 1).unwrap();
            let expect_mean = (Complex64::from_polar(1.0, -theta) * a.mean_point()).re;
            assert!((mean - expect_mean).abs() < 1e-12);
            let var = marginal_variance(&a, theta).unwrap();
            let expect_var = (13.0 + 2.0 * (2.0 * theta).sin()) / 72.0;
            assert!((var - expect_var).abs() < 1e-10, "theta={theta}");
        }
        assert!((marginal_moment(&a, 0.4, 0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moment_binomial_expansion_consistency() {
        // marginal_moment(A, theta, n) = 2^-n sum_j C(n,j) e^{i theta(n-2j)} nu_{j,n-j}
        let a = a3();
        let table = crate::moments::moment_table(&a, 4).unwrap();
        for &theta in &[0.0, 0.7, 2.1] {
            for n in 0..=4usize {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..=n {
                    let nu = table.get(j, n - j).unwrap();
                    let phase = Complex64::from_polar(1.0, theta * (n as f64 - 2.0 * j as f64));
                    acc += binomial(n, j) * phase * nu;
                }
                acc /= 2f64.powi(n as i32);
                let direct = marginal_moment(&a, theta, n).unwrap();
                assert!((acc.re - direct).abs() < 1e-9, "n={n} theta={theta}");
                assert!(acc.im.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn variance_extremal_angle() {
        // variance maximized at theta = phi/2 where tr((A - m I)^2) = a e^{i phi}
        let a = a3();
        let m = a.mean_point();
        let centered = a.shift(m);
        let tr2 = centered.mul(&centered).trace();
        let phi = tr2.arg();
        let mut best_theta = 0.0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..2048 {
            let theta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / 2048.0;
            let v = marginal_variance(&a, theta).unwrap();
            if v > best {
                best = v;
                best_theta = theta;
            }
        }
        let expect = phi / 2.0;
        // compare angles modulo pi (variance has period pi in theta)
        let mut diff = (best_theta - expect).rem_euclid(std::f64::consts::PI);
        if diff > std::f64::consts::FRAC_PI_2 {
            diff = std::f64::consts::PI - diff;
        }
        assert!(diff < 0.01, "best={best_theta} expect={expect}");
    }

    #[test]
    fn lambda_prime_a2_top_branch() {
        let a = a2();
        // top branch: lambda_4 = 1/2 + cos(theta/2), so lambda' = -sin(theta/2)/2
        for &theta in &[0.4, 1.0, 2.0, -1.3] {
            let (lp, flagged) = lambda_prime(&a, theta, 3).unwrap();
            let expect = -0.5 * (theta / 2.0).sin();
            assert!(!flagged);
            assert!((lp - expect).abs() < 1e-8, "theta={theta}: {lp} vs {expect}");
        }
    }

    #[test]
    fn lambda_prime_constant_spectrum_is_zero() {
        let a = a1();
        for branch in 0..4 {
            let (lp, flagged) = lambda_prime(&a, 0.9, branch).unwrap();
            assert!(!flagged);
            assert!(lp.abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_prime_matches_finite_difference_oracle() {
        let a = a3();
        let h = 1e-5;
        for branch in 0..3 {
            for &theta in &[0.2, 1.1, 2.7] {
                let (lp, flagged) = lambda_prime(&a, theta, branch).unwrap();
                assert!(!flagged);
                let plus = eig_sweep(&a, &[theta + h]).unwrap()[0].values()[branch];
                let minus = eig_sweep(&a, &[theta - h]).unwrap()[0].values()[branch];
                let fd = (plus - minus) / (2.0 * h);
                assert!(
                    (lp - fd).abs() < 1e-5 * lp.abs().max(1.0),
                    "branch={branch} theta={theta}: {lp} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn critical_curves_a1_two_circles() {
        let curves = critical_curves(&a1(), 256, true).unwrap();
        assert_eq!(curves.len(), 2);
        let s5 = 5.0f64.sqrt();
        let router = (1.0 + s5) / 4.0;
        let rinner = (s5 - 1.0) / 4.0;
        for curve in &curves {
            // every sample radius is one of the two circle radii
            for p in &curve.samples {
                let r = p.z.norm();
                let near_outer = (r - router).abs() < 1e-6;
                let near_inner = (r - rinner).abs() < 1e-6;
                assert!(near_outer || near_inner, "r={r}");
            }
            assert!(curve.cusps.is_empty());
        }
        let outer_curve = curves.iter().find(|c| c.outer).unwrap();
        assert!(outer_curve.samples.iter().all(|p| (p.z.norm() - router).abs() < 1e-6));
    }

    #[test]
    fn critical_curves_a2_single_with_two_cusps() {
        let curves = critical_curves(&a2(), 512, true).unwrap();
        assert_eq!(curves.len(), 1, "non-generic A2 has one critical curve");
        let curve = &curves[0];
        assert!(curve.outer);
        // cusps at (-19 +/- 5 sqrt(5) i)/54
        assert_eq!(curve.cusps.len(), 2, "cusps: {:?}", curve.cusps);
        let expect_re = -19.0 / 54.0;
        let expect_im = 5.0 * 5.0f64.sqrt() / 54.0;
        let mut found_pos = false;
        let mut found_neg = false;
        for &z in &curve.cusp_positions {
            assert!((z.re - expect_re).abs() < 1e-3, "cusp at {z}");
            if (z.im - expect_im).abs() < 1e-3 {
                found_pos = true;
            }
            if (z.im + expect_im).abs() < 1e-3 {
                found_neg = true;
            }
        }
        assert!(found_pos && found_neg);
    }

    #[test]
    fn critical_curves_a3_outer_and_triangle() {
        let curves = critical_curves(&a3(), 512, true).unwrap();
        assert_eq!(curves.len(), 2, "generic N=3 has two curves");
        let outer = curves.iter().find(|c| c.outer).unwrap();
        let inner = curves.iter().find(|c| !c.outer).unwrap();
        assert_eq!(inner.cusps.len(), 3, "inner triangle has three cusps");
        // outer curve convex hull ~ W(A)
        let hull = convex_hull(&outer.samples.iter().map(|p| p.z).collect::<Vec<_>>());
        let region = crate::range::numerical_range_boundary(&a3(), 1024).unwrap();
        assert!(hull.hausdorff(&region) < 1e-3);
    }

    #[test]
    fn curve_points_inside_range() {
        let a = a3();
        let curves = critical_curves(&a, 128, true).unwrap();
        for phi_idx in 0..64 {
            let phi = 2.0 * std::f64::consts::PI * phi_idx as f64 / 64.0;
            let bound = hermitian_eigenvalues(&a.re_rotated(phi)).unwrap().max();
            let dir = Complex64::from_polar(1.0, -phi);
            for curve in &curves {
                for p in &curve.samples {
                    assert!((dir * p.z).re <= bound + 1e-7);
                }
            }
        }
    }
}
