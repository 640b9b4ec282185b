//! Closed-form radial densities. The building blocks are the F_N family
//! (probability densities on [0,1] with hypergeometric moments) and their
//! higher-multiplicity companions R_{N,k}; rotation-invariant shadows are
//! finite combinations of these at scales set by the positive eigenvalues of
//! Re A.

use num_complex::Complex64;

use crate::eigen::hermitian_eigenvalues;
use crate::error::{invalid, Result};
use crate::matrix::{coincidence_tol, ComplexMatrix};
use crate::moments::rotation_invariant;
use crate::util::{hyp2f1, integrate, pochhammer};

/// F_2 and F_3 in closed form; higher N by the three-term recurrence
/// F_{N+2}(x) = (N+1)/(N-1)^2 [(2N-3) F_{N+1}(x) - (1-x) N F_N(x)].
/// Zero for x >= 1. At x <= 0: 1/2 for N = 2, +infinity for N >= 3
/// (logarithmic divergence).
pub fn f_n(n: usize, x: f64) -> Result<f64> {
    f_n_c(n, 1.0 - x)
}

/// F_N evaluated from the complementary argument xc = 1 - x. Quadratures
/// near the support edge pass xc directly, where forming 1 - x in f64 would
/// round away the distance to the singularity.
pub fn f_n_c(n: usize, xc: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("F_N requires N >= 2"));
    }
    if xc <= 0.0 {
        return Ok(0.0);
    }
    if xc >= 1.0 {
        return Ok(if n == 2 { 0.5 } else { f64::INFINITY });
    }
    let root = xc.sqrt();
    let f2 = 0.5 / root;
    if n == 2 {
        return Ok(f2);
    }
    let f3 = ((1.0 + root) / (1.0 - xc).sqrt()).ln();
    if n == 3 {
        return Ok(f3);
    }
    let mut lo = f2; // F_m
    let mut hi = f3; // F_{m+1}
    let mut m = 2usize;
    loop {
        let mf = m as f64;
        let next =
            (mf + 1.0) / ((mf - 1.0) * (mf - 1.0)) * ((2.0 * mf - 3.0) * hi - xc * mf * lo);
        if m + 2 == n {
            return Ok(next);
        }
        lo = hi;
        hi = next;
        m += 1;
    }
}

/// R_{N,k}: for k = 1 this is F_N; for N = 2k the closed form
/// (k - 1/2)(1-x)^(k - 3/2); for N = 2k+1 the hypergeometric series
/// k (1-x)^(k-1/2) 2F1(1, 1/2; k+1/2; 1-x); larger N by the recurrence
/// R_{N+1,k} = N/((N-2)(N-2k)) [(2N-2k-3) R_{N,k} - (N-1)(1-x) R_{N-1,k}].
pub fn r_nk(n: usize, k: usize, x: f64) -> Result<f64> {
    r_nk_c(n, k, 1.0 - x)
}

/// R_{N,k} from the complementary argument xc = 1 - x (see `f_n_c`).
pub fn r_nk_c(n: usize, k: usize, xc: f64) -> Result<f64> {
    if k == 0 {
        return Err(invalid("R_{N,k} requires k >= 1"));
    }
    if k == 1 {
        return f_n_c(n, xc);
    }
    if n < 2 * k {
        return Err(invalid(format!("R_{{N,k}} requires N >= 2k (N={n}, k={k})")));
    }
    if xc <= 0.0 {
        return Ok(0.0);
    }
    let xc = xc.min(1.0);
    let base_even = |xc: f64| (k as f64 - 0.5) * xc.powf(k as f64 - 1.5);
    if n == 2 * k {
        return Ok(base_even(xc));
    }
    let base_odd =
        |xc: f64| k as f64 * xc.powf(k as f64 - 0.5) * hyp2f1(1.0, 0.5, k as f64 + 0.5, xc);
    if n == 2 * k + 1 {
        return Ok(base_odd(xc));
    }
    let mut lo = base_even(xc); // R_{m-1,k}
    let mut hi = base_odd(xc); // R_{m,k}
    let mut m = 2 * k + 1;
    loop {
        let mf = m as f64;
        let next = mf / ((mf - 2.0) * (mf - 2.0 * k as f64))
            * ((2.0 * mf - 2.0 * k as f64 - 3.0) * hi - (mf - 1.0) * xc * lo);
        if m + 1 == n {
            return Ok(next);
        }
        lo = hi;
        hi = next;
        m += 1;
    }
}

/// Exact m-th moment of R_{N,k} on [0,1]: m! (k)_m / ((N/2)_m ((N+1)/2)_m).
pub fn r_nk_moment(n: usize, k: usize, m: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..m {
        acc *= (i as f64 + 1.0) * (k as f64 + i as f64);
    }
    acc / (pochhammer(n as f64 / 2.0, m) * pochhammer((n as f64 + 1.0) / 2.0, m))
}

/// The filled-ellipse shadow of a 2x2 matrix: center, axis direction, and
/// semi-axes. `b == 0` marks the degenerate (normal) case where the shadow
/// is one-dimensional.
#[derive(Clone, Debug)]
pub struct EllipseShadow {
    pub center: Complex64,
    pub axis_angle: f64,
    pub a: f64,
    pub b: f64,
}

impl EllipseShadow {
    pub fn is_degenerate(&self) -> bool {
        self.b <= 0.0
    }

    /// Numerical check that the density integrates to one over the ellipse
    /// (elliptic-polar coordinates, rho = sin(phi) substitution).
    pub fn mass_quadrature(&self) -> Result<f64> {
        if self.is_degenerate() {
            return Err(invalid("mass_quadrature: degenerate ellipse"));
        }
        let axis = Complex64::from_polar(1.0, self.axis_angle);
        let val = integrate(
            &|phi: f64| {
                let rho = phi.sin();
                let z = self.center + axis * (self.a * rho);
                2.0 * std::f64::consts::PI
                    * self.a
                    * self.b
                    * rho
                    * phi.cos()
                    * density_2x2(self, z).unwrap_or(0.0)
            },
            0.0,
            std::f64::consts::FRAC_PI_2 - 3e-7,
            1e-10,
        );
        Ok(val)
    }
}

/// Ellipse parameters of W(M) for 2x2 M: the eigenvalues are the foci and
/// the minor semi-axis is half the off-diagonal of the upper-triangular
/// form, recovered here from unitary invariants.
pub fn ellipse_of_2x2(m: &ComplexMatrix) -> Result<EllipseShadow> {
    if m.dim() != 2 {
        return Err(invalid("ellipse_of_2x2: matrix must be 2x2"));
    }
    let center = m.mean_point();
    let m0 = m.shift(center);
    // eigenvalues of the traceless part: +/- sqrt(-det)
    let det = m0.entry(0, 0) * m0.entry(1, 1) - m0.entry(0, 1) * m0.entry(1, 0);
    let lambda = (-det).sqrt();
    let c_half = lambda.norm(); // half focal separation
    let frob: f64 = m0
        .entries()
        .iter()
        .map(num_complex::Complex64::norm_sqr)
        .sum();
    // |s|^2 = tr(M0 M0*) - 2 |lambda|^2 where s is the minor-axis length
    let s_sq = (frob - 2.0 * c_half * c_half).max(0.0);
    let b = 0.5 * s_sq.sqrt();
    let a = (b * b + c_half * c_half).sqrt();
    let axis_angle = if c_half > 1e-15 * m.max_row_sum().max(1.0) {
        lambda.arg()
    } else {
        0.0
    };
    Ok(EllipseShadow {
        center,
        axis_angle,
        a,
        b,
    })
}

/// Shadow density of a non-degenerate 2x2 ellipse at z:
/// 1/(2 pi a b sqrt(1 - rho^2)) with rho the elliptic radius of z.
/// Zero outside the closed ellipse, +infinity on the boundary curve.
pub fn density_2x2(e: &EllipseShadow, z: Complex64) -> Result<f64> {
    if e.b <= 0.0 {
        return Err(invalid("density_2x2: degenerate ellipse has no planar density"));
    }
    let w = (z - e.center) * Complex64::from_polar(1.0, -e.axis_angle);
    let rho_sq = (w.re / e.a).powi(2) + (w.im / e.b).powi(2);
    if rho_sq > 1.0 {
        return Ok(0.0);
    }
    if rho_sq >= 1.0 - 1e-14 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (2.0 * std::f64::consts::PI * e.a * e.b * (1.0 - rho_sq).sqrt()))
}

/// Radial density of the Jordan nilpotent J_N: alternating combination of
/// F_N at scales cos(k pi/(N+1)), supported on r < cos(pi/(N+1)).
pub fn jordan_radial_density(n: usize, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("jordan_radial_density requires N >= 2"));
    }
    if r < 0.0 {
        return Err(invalid("jordan_radial_density: negative radius"));
    }
    let nf = n as f64;
    let mut acc = 0.0;
    for k in 1..=n / 2 {
        let angle = k as f64 * std::f64::consts::PI / (nf + 1.0);
        let cosv = angle.cos();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let weight = sign * 2f64.powi(n as i32 + 1) / (nf + 1.0)
            * angle.sin().powi(2)
            * cosv.powi(n as i32 - 3);
        acc += weight * f_n(n, r * r / (cosv * cosv))?;
    }
    Ok(acc / std::f64::consts::PI)
}

/// Numerical radius of J_N (also the support radius of its shadow).
pub fn jordan_support_radius(n: usize) -> f64 {
    (std::f64::consts::PI / (n as f64 + 1.0)).cos()
}

/// Partial-fraction constants alpha_{ij} of
/// prod_i (1 - 4 t^2 mu_i^2)^(-k_i) = sum_i sum_{j<k_i} alpha_{ij} / (1 - 4 t^2 mu_i^2)^(k_i - j).
/// Exact Taylor expansion of the co-factor at each pole (log-derivative
/// power sums + exponential recursion).
pub fn partial_fraction_alpha(mu: &[f64], k: &[usize]) -> Result<Vec<Vec<f64>>> {
    if mu.len() != k.len() || mu.is_empty() {
        return Err(invalid("partial_fraction_alpha: mu and k must align"));
    }
    if mu.iter().any(|&m| m <= 0.0) {
        return Err(invalid("partial_fraction_alpha: mu must be positive"));
    }
    let radius = mu.iter().cloned().fold(0.0, f64::max);
    let tol = coincidence_tol(radius);
    for i in 0..mu.len() {
        for l in 0..i {
            if (mu[i] - mu[l]).abs() <= tol {
                return Err(invalid(
                    "partial_fraction_alpha: coincident mu; group multiplicities first",
                ));
            }
        }
    }
    let sq: Vec<f64> = mu.iter().map(|&m| m * m).collect();
    let mut alpha = Vec::with_capacity(mu.len());
    for i in 0..mu.len() {
        let ki = k[i];
        let w0 = 1.0 / sq[i];
        // g_i(w) = prod_{l != i} (1 - w sq_l)^(-k_l), Taylor at w0
        let mut g0 = 1.0f64;
        for (l, &sl) in sq.iter().enumerate() {
            if l != i {
                g0 *= (1.0 - w0 * sl).powi(-(k[l] as i32));
            }
        }
        // log-series coefficients s_m = sum_l k_l (sq_l/(1 - w0 sq_l))^m / m
        let mut s = vec![0.0f64; ki];
        for m in 1..ki {
            let mut acc = 0.0;
            for (l, &sl) in sq.iter().enumerate() {
                if l != i {
                    acc += k[l] as f64 * (sl / (1.0 - w0 * sl)).powi(m as i32);
                }
            }
            s[m] = acc / m as f64;
        }
        // exp of the power series: e_0 = 1, e_m = (1/m) sum r s_r e_{m-r}
        let mut e = vec![0.0f64; ki];
        e[0] = 1.0;
        for m in 1..ki {
            let mut acc = 0.0;
            for r in 1..=m {
                acc += r as f64 * s[r] * e[m - r];
            }
            e[m] = acc / m as f64;
        }
        let mut row = Vec::with_capacity(ki);
        for (j, ej) in e.iter().enumerate() {
            row.push(g0 * ej / (-sq[i]).powi(j as i32));
        }
        alpha.push(row);
    }
    Ok(alpha)
}

/// Term kinds of a radial density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialTermKind {
    FN,
    RNk,
}

/// One scaled building block: weight * K_N(r^2 / scale^2) with K either
/// F_N or R_{N,k}.
#[derive(Clone, Debug)]
pub struct RadialTerm {
    pub weight: f64,
    pub scale: f64,
    pub kind: RadialTermKind,
    pub n_param: usize,
    pub k_param: usize,
}

/// Piecewise-analytic rotation-invariant planar density f(|z|).
#[derive(Clone, Debug)]
pub struct RadialDensity {
    pub terms: Vec<RadialTerm>,
    pub support_radius: f64,
}

impl RadialDensity {
    pub fn eval(&self, r: f64) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            if t.weight == 0.0 {
                continue;
            }
            let x = r * r / (t.scale * t.scale);
            let v = match t.kind {
                RadialTermKind::FN => f_n(t.n_param, x)?,
                RadialTermKind::RNk => r_nk(t.n_param, t.k_param, x)?,
            };
            acc += t.weight * v;
        }
        Ok(acc)
    }

    /// Exact even moment 2 pi Int r^(2m+1) f(r) dr from the block moments.
    pub fn radial_moment(&self, m: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let k = match t.kind {
                    RadialTermKind::FN => 1,
                    RadialTermKind::RNk => t.k_param,
                };
                t.weight
                    * std::f64::consts::PI
                    * t.scale.powi(2 * m as i32 + 2)
                    * r_nk_moment(t.n_param, k, m)
            })
            .sum()
    }

    /// Total mass 2 pi Int r f(r) dr; equals 1 for a valid density.
    pub fn mass(&self) -> f64 {
        self.radial_moment(0)
    }

    /// Mass by adaptive quadrature (independent of the exact block moments):
    /// per term, substitute x = r^2/scale^2 then x = 1 - u^2 to remove the
    /// endpoint singularity.
    pub fn mass_quadrature(&self) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            if t.weight == 0.0 {
                continue;
            }
            let kind = t.kind;
            let npar = t.n_param;
            let kpar = t.k_param;
            // substitution x = 1 - u^2: the complementary argument u^2 keeps
            // the edge exact; clip the x -> 0 log divergence at u = 1
            let val = integrate(
                &|u: f64| {
                    let v = match kind {
                        RadialTermKind::FN => f_n_c(npar, u * u).unwrap_or(0.0),
                        RadialTermKind::RNk => r_nk_c(npar, kpar, u * u).unwrap_or(0.0),
                    };
                    2.0 * u * v
                },
                1e-300,
                1.0 - 1e-12,
                1e-10,
            );
            acc += t.weight * std::f64::consts::PI * t.scale * t.scale * val;
        }
        Ok(acc)
    }
}

/// A rotation-invariant shadow: either an atom at the origin (A = 0) or an
/// absolutely continuous radial density.
#[derive(Clone, Debug)]
pub enum RadialShadow {
    AtomAtZero,
    Density(RadialDensity),
}

/// Closed-form density of any rotation-invariant shadow. The positive
/// eigenvalues of Re A (grouped by the coincidence tolerance, multiplicities
/// k_i) drive a partial-fraction combination of R_{N,k} blocks.
pub fn rotation_invariant_density(a: &ComplexMatrix) -> Result<RadialShadow> {
    if !rotation_invariant(a)? {
        return Err(invalid(
            "rotation_invariant_density: shadow is not rotation invariant",
        ));
    }
    let n = a.dim();
    let spectrum = hermitian_eigenvalues(&a.re_part())?;
    let tol = coincidence_tol(spectrum.spectral_radius());
    let groups = spectrum.grouped();
    let positives: Vec<(f64, usize)> = groups
        .into_iter()
        .filter(|(value, _)| *value > tol)
        .collect();
    if positives.is_empty() {
        return Ok(RadialShadow::AtomAtZero);
    }
    let mu: Vec<f64> = positives.iter().map(|(v, _)| *v).collect();
    let mult: Vec<usize> = positives.iter().map(|(_, m)| *m).collect();
    let alpha = partial_fraction_alpha(&mu, &mult)?;
    let mut terms = Vec::new();
    for (i, row) in alpha.iter().enumerate() {
        for (j, &aij) in row.iter().enumerate() {
            if aij == 0.0 {
                continue;
            }
            let k = mult[i] - j;
            let kind = if k == 1 {
                RadialTermKind::FN
            } else {
                RadialTermKind::RNk
            };
            terms.push(RadialTerm {
                weight: aij / (std::f64::consts::PI * mu[i] * mu[i]),
                scale: mu[i],
                kind,
                n_param: n,
                k_param: k,
            });
        }
    }
    let support_radius = mu.iter().cloned().fold(0.0, f64::max);
    Ok(RadialShadow::Density(RadialDensity {
        terms,
        support_radius,
    }))
}
