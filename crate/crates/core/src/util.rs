//! Small numeric building blocks shared across modules: complex LU
//! determinants, Newton-form polynomial interpolation, truncated power
//! series, quadrature, and factorial ratios.

use num_complex::Complex64;

use crate::dd::Dd;

pub type C64 = Complex64;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Determinant of a dense complex matrix by LU with partial pivoting.
/// Consumes the buffer (row-major, n*n entries).
pub fn det_in_place(a: &mut [C64], n: usize) -> C64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = a[row * n + col].norm_sqr();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let diag = a[col * n + col];
        det *= diag;
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let sub = factor * a[col * n + k];
                a[row * n + k] -= sub;
            }
        }
    }
    det
}

/// Chebyshev points of the second kind on [-1, 1]; the n nodes are distinct
/// and include the endpoints for n >= 2.
pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|k| (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Interpolate values at distinct real nodes by a polynomial in the monomial
/// basis: Newton divided differences, then expansion. Returns coefficients
/// c[0..n] with p(x) = sum c[k] x^k.
pub fn interpolate_monomial(nodes: &[f64], values: &[C64]) -> Vec<C64> {
    let n = nodes.len();
    debug_assert_eq!(values.len(), n);
    // divided-difference table (in place)
    let mut dd: Vec<C64> = values.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            let denom = nodes[i] - nodes[i - level];
            dd[i] = (dd[i] - dd[i - 1]) / denom;
        }
    }
    // expand Newton form: p(x) = dd[0] + dd[1](x-x0) + dd[2](x-x0)(x-x1) + ...
    let zero = C64::new(0.0, 0.0);
    let mut coeffs = vec![zero; n];
    // basis holds the coefficients of prod_{j<i}(x - x_j)
    let mut basis = vec![zero; n];
    basis[0] = C64::new(1.0, 0.0);
    let mut basis_len = 1;
    for i in 0..n {
        for k in 0..basis_len {
            coeffs[k] += dd[i] * basis[k];
        }
        if i + 1 < n {
            // basis *= (x - nodes[i])
            for k in (0..basis_len).rev() {
                let b = basis[k];
                basis[k + 1] += b;
                basis[k] = -b * nodes[i];
            }
            basis_len += 1;
        }
    }
    coeffs
}

/// Coefficients of the reciprocal power series 1/f to the given truncation
/// order (inclusive), where f[0] must be 1.
pub fn series_reciprocal(f: &[C64], order: usize) -> Vec<C64> {
    debug_assert!((f[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    let mut g = vec![C64::new(0.0, 0.0); order + 1];
    g[0] = C64::new(1.0, 0.0);
    for m in 1..=order {
        let mut acc = C64::new(0.0, 0.0);
        for a in 1..=m.min(f.len() - 1) {
            acc += f[a] * g[m - a];
        }
        g[m] = -acc;
    }
    g
}

/// j! k! / (N)_{j+k} computed in double-double so that orders up to ~60 keep
/// full f64 accuracy (interleaving keeps magnitudes bounded as well).
pub fn factorial_ratio(j: usize, k: usize, n: usize) -> f64 {
    let mut num: Vec<f64> = (1..=j).map(|v| v as f64).collect();
    num.extend((1..=k).map(|v| v as f64));
    let den: Vec<f64> = (0..j + k).map(|v| (n + v) as f64).collect();
    let mut acc = Dd::ONE;
    let m = num.len().max(den.len());
    for i in 0..m {
        if i < num.len() {
            acc = acc.mul(Dd::from(num[i]));
        }
        if i < den.len() {
            acc = acc.div(Dd::from(den[i]));
        }
    }
    acc.to_f64()
}

/// Pochhammer symbol (x)_m in f64.
pub fn pochhammer(x: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// Gauss hypergeometric series 2F1(a,b;c;t) by direct summation.
/// Stops when |term| < 1e-16 |partial sum|, hard cap 1e5 terms.
pub fn hyp2f1(a: f64, b: f64, c: f64, t: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..100_000usize {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * t;
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
    }
    sum
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, left, lm, flm, tol * 0.5, depth - 1)
                + rec(f, m, fm, b, fb, right, rm, frm, tol * 0.5, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Nodes and weights of an n-point Gauss-Jacobi rule for the weight
/// t^(alpha) (1-t)^(beta) on [0,1], normalized so the weights sum to
/// B(alpha+1, beta+1) (the integral of the weight). Golub-Welsch on the
/// Jacobi-polynomial recurrence.
pub fn gauss_jacobi_unit(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    // Standard Jacobi weight on [-1,1] is (1-x)^A (1+x)^B. Map t = (1+x)/2:
    // t^alpha (1-t)^beta dt corresponds to A = beta, B = alpha.
    let aa = beta;
    let bb = alpha;
    // recurrence coefficients for monic Jacobi polynomials
    let mut diag = vec![0.0f64; n];
    let mut sub = vec![0.0f64; n]; // sub[k] couples k-1,k (k>=1)
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + aa + bb) * (2.0 * kf + aa + bb + 2.0);
        diag[k] = if denom != 0.0 {
            (bb * bb - aa * aa) / denom
        } else {
            (bb - aa) / (aa + bb + 2.0)
        };
        if k >= 1 {
            let num = 4.0 * kf * (kf + aa) * (kf + bb) * (kf + aa + bb);
            let den = (2.0 * kf + aa + bb).powi(2) * (2.0 * kf + aa + bb + 1.0)
                * (2.0 * kf + aa + bb - 1.0);
            sub[k] = (num / den).sqrt();
        }
    }
    // mu0 = integral of (1-x)^A (1+x)^B over [-1,1] = 2^(A+B+1) B(A+1, B+1)
    let ln_mu0 = (aa + bb + 1.0) * std::f64::consts::LN_2 + ln_beta(aa + 1.0, bb + 1.0);
    // symmetric tridiagonal eigen via the dense Jacobi rotation solver
    let mut dense = vec![0.0f64; n * n];
    for k in 0..n {
        dense[k * n + k] = diag[k];
        if k >= 1 {
            dense[k * n + (k - 1)] = sub[k];
            dense[(k - 1) * n + k] = sub[k];
        }
    }
    let (vals, vecs) = crate::eigen::jacobi_symmetric(&dense, n, true);
    let vecs = vecs.expect("vectors requested");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let x = vals[i];
        let first = vecs[i]; // row 0 of eigenvector i (column-major i-th vector)
        let w = ln_mu0.exp() * first * first;
        // map x in [-1,1] to t in [0,1]; dt = dx/2 and the weight transforms
        // with factor 2^-(alpha+beta); both absorbed by mu0 normalization:
        // w already integrates the [-1,1] weight, total mass matches after
        // dividing by 2^(alpha+beta+1).
        nodes.push(0.5 * (x + 1.0));
        weights.push(w / 2f64.powf(aa + bb + 1.0));
    }
    (nodes, weights)
}

/// Least squares min ||Ax - b|| by Householder QR. `a` is row-major
/// rows x cols with rows >= cols and full column rank; returns x and the
/// maximum absolute residual.
pub fn lstsq(a: &[f64], rows: usize, cols: usize, b: &[f64]) -> (Vec<f64>, f64) {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert_eq!(b.len(), rows);
    let mut r = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..cols {
        // Householder vector for column col, rows col..
        let mut norm = 0.0f64;
        for i in col..rows {
            norm += r[i * cols + col] * r[i * cols + col];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[col * cols + col] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0f64; rows];
        v[col] = r[col * cols + col] - alpha;
        for i in col + 1..rows {
            v[i] = r[i * cols + col];
        }
        let vtv: f64 = v[col..].iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        for j in col..cols {
            let mut dot = 0.0;
            for i in col..rows {
                dot += v[i] * r[i * cols + j];
            }
            let f = 2.0 * dot / vtv;
            for i in col..rows {
                r[i * cols + j] -= f * v[i];
            }
        }
        let mut dot = 0.0;
        for i in col..rows {
            dot += v[i] * rhs[i];
        }
        let f = 2.0 * dot / vtv;
        for i in col..rows {
            rhs[i] -= f * v[i];
        }
    }
    // back substitution on the upper-triangular cols x cols block
    let mut x = vec![0.0f64; cols];
    for col in (0..cols).rev() {
        let mut acc = rhs[col];
        for j in col + 1..cols {
            acc -= r[col * cols + j] * x[j];
        }
        let diag = r[col * cols + col];
        x[col] = if diag.abs() > 1e-300 { acc / diag } else { 0.0 };
    }
    let mut max_resid = 0.0f64;
    for i in 0..rows {
        let mut acc = -b[i];
        for j in 0..cols {
            acc += a[i * cols + j] * x[j];
        }
        max_resid = max_resid.max(acc.abs());
    }
    (x, max_resid)
}

pub fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + 7.5;
        for (i, &cf) in COEF.iter().enumerate().skip(1) {
            a += cf / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_known_matrix() {
        // [[1, 2], [3i, 4]] -> det = 4 - 6i
        let mut m = vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 3.0), c(4.0, 0.0)];
        let d = det_in_place(&mut m, 2);
        assert!((d - c(4.0, -6.0)).norm() < 1e-14);
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        // p(x) = (2 - i) x^3 + 4 x - 1
        let p = |x: f64| c(2.0, -1.0) * x.powi(3) + c(4.0, 0.0) * x - c(1.0, 0.0);
        let nodes = chebyshev_nodes(6);
        let values: Vec<C64> = nodes.iter().map(|&x| p(x)).collect();
        let coeffs = interpolate_monomial(&nodes, &values);
        let expect = [c(-1.0, 0.0), c(4.0, 0.0), c(0.0, 0.0), c(2.0, -1.0)];
        for (k, e) in expect.iter().enumerate() {
            assert!((coeffs[k] - e).norm() < 1e-12, "k={k}");
        }
        for k in 4..coeffs.len() {
            assert!(coeffs[k].norm() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_series_geometric() {
        // 1/(1-x) = 1 + x + x^2 + ...
        let f = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        let g = series_reciprocal(&f, 6);
        for gi in &g {
            assert!((gi - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn factorial_ratio_small_cases() {
        // 1!1!/(2)_2 = 1/6
        assert!((factorial_ratio(1, 1, 2) - 1.0 / 6.0).abs() < 1e-16);
        // 2!3!/(3)_5 = 12 / (3*4*5*6*7) = 12/2520
        assert!((factorial_ratio(2, 3, 3) - 12.0 / 2520.0).abs() < 1e-18);
    }

    #[test]
    fn factorial_ratio_high_order() {
        // j=k=30, N=4: compare against log-gamma route
        let lg = ln_gamma(31.0) * 2.0 - (ln_gamma(64.0) - ln_gamma(4.0));
        let reference = lg.exp();
        let got = factorial_ratio(30, 30, 4);
        assert!((got - reference).abs() < 1e-12 * reference.abs());
    }

    #[test]
    fn hyp2f1_log_identity() {
        // 2F1(1,1;2;t) = -ln(1-t)/t
        for &t in &[0.1, 0.5, 0.9] {
            let got = hyp2f1(1.0, 1.0, 2.0, t);
            let expect = -(1.0 - t).ln() / t;
            assert!((got - expect).abs() < 1e-12 * expect.abs());
        }
    }

    #[test]
    fn simpson_integrates_smooth() {
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_jacobi_beta_moments() {
        // weight t^(n-1)(1-t)^(m-1) with n=2, m=3: integral of t^k against the
        // normalized Beta(2,3) density is (2)_k/(5)_k
        let (nodes, weights) = gauss_jacobi_unit(16, 1.0, 2.0);
        let mass: f64 = weights.iter().sum();
        let b = (ln_beta(2.0, 3.0)).exp();
        assert!((mass - b).abs() < 1e-12);
        for k in 0..6 {
            let mk: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&t, &w)| t.powi(k) * w)
                .sum::<f64>()
                / b;
            let expect = pochhammer(2.0, k as usize) / pochhammer(5.0, k as usize);
            assert!((mk - expect).abs() < 1e-12, "k={k} got {mk} want {expect}");
        }
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        for n in 1..15u32 {
            let f: f64 = (1..n).map(|v| v as f64).product();
            assert!((ln_gamma(n as f64).exp() - f).abs() < 1e-9 * f.max(1.0));
        }
        // half-integer: Gamma(1/2) = sqrt(pi)
        assert!((ln_gamma(0.5).exp() - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
