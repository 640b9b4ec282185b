//! The characteristic bivariate polynomial xi_A(s,t) = det(I - sA - tA*),
//! the seed of the moment calculus. Computed by evaluating the determinant on
//! a tensor grid of Chebyshev nodes and interpolating, which avoids symbolic
//! expansion.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::matrix::ComplexMatrix;
use crate::util::{chebyshev_nodes, det_in_place, interpolate_monomial};

/// Coefficients of xi_A: coeffs[j][k] multiplies s^j t^k. Total degree <= N,
/// coeffs[0][0] = 1, and coeffs[j][k] = conj(coeffs[k][j]).
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePoly {
    degree: usize,
    coeffs: Vec<Vec<Complex64>>,
}

impl BivariatePoly {
    pub fn constant_one(degree: usize) -> Self {
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); degree + 1]; degree + 1];
        coeffs[0][0] = Complex64::new(1.0, 0.0);
        Self { degree, coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<Vec<Complex64>>) -> Self {
        let degree = coeffs.len() - 1;
        for row in &coeffs {
            assert_eq!(row.len(), degree + 1);
        }
        Self { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, j: usize, k: usize) -> Complex64 {
        if j <= self.degree && k <= self.degree {
            self.coeffs[j][k]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn coeffs(&self) -> &Vec<Vec<Complex64>> {
        &self.coeffs
    }

    pub fn eval(&self, s: Complex64, t: Complex64) -> Complex64 {
        // Horner in s of polynomials in t
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (0..=self.degree).rev() {
            let mut row = Complex64::new(0.0, 0.0);
            for k in (0..=self.degree).rev() {
                row = row * t + self.coeffs[j][k];
            }
            acc = acc * s + row;
        }
        acc
    }

    /// Largest |coeffs difference| against another polynomial, together with
    /// the graded-lexicographically first (j,k) exceeding `tol`.
    pub fn max_coeff_diff(&self, other: &Self, tol: f64) -> (f64, Option<(usize, usize)>) {
        let deg = self.degree.max(other.degree);
        let mut max = 0.0f64;
        let mut witness = None;
        for total in 0..=2 * deg {
            for j in (0..=total.min(deg)).rev() {
                let k = total - j;
                if k > deg {
                    continue;
                }
                let d = (self.coeff(j, k) - other.coeff(j, k)).norm();
                if d > max {
                    max = d;
                }
                if witness.is_none() && d > tol {
                    witness = Some((j, k));
                }
            }
        }
        (max, witness)
    }

    /// Restriction to a ray (s,t) = (r*a, r*b): coefficients of the
    /// univariate polynomial in r.
    pub fn restrict_ray(&self, a: Complex64, b: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * self.degree + 1];
        let mut apow = vec![Complex64::new(1.0, 0.0)];
        let mut bpow = vec![Complex64::new(1.0, 0.0)];
        for j in 1..=self.degree {
            apow.push(apow[j - 1] * a);
            bpow.push(bpow[j - 1] * b);
        }
        for j in 0..=self.degree {
            for k in 0..=self.degree {
                let c = self.coeffs[j][k];
                if c.norm_sqr() != 0.0 {
                    out[j + k] += c * apow[j] * bpow[k];
                }
            }
        }
        out
    }

    /// True when every coefficient with j != k is below `tol` in magnitude,
    /// i.e. the polynomial is a function of the product st.
    pub fn is_function_of_st(&self, tol: f64) -> bool {
        for j in 0..=self.degree {
            for k in 0..=self.degree {
                if j != k && self.coeffs[j][k].norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// xi_A(s,t) = det(I - sA - tA*) by tensor-grid interpolation on
/// (N+1) x (N+1) Chebyshev nodes.
pub fn xi_poly(a: &ComplexMatrix) -> Result<BivariatePoly> {
    if !a.is_finite() {
        return Err(invalid("xi_poly: non-finite entries"));
    }
    let n = a.dim();
    let astar = a.adjoint();
    let nodes = chebyshev_nodes(n + 1);
    // values[i][l] = xi(s_i, t_l)
    let mut values = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n + 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, &s) in nodes.iter().enumerate() {
        for (l, &t) in nodes.iter().enumerate() {
            for r in 0..n {
                for cidx in 0..n {
                    let mut e = -s * a.entry(r, cidx) - t * astar.entry(r, cidx);
                    if r == cidx {
                        e += Complex64::new(1.0, 0.0);
                    }
                    buf[r * n + cidx] = e;
                }
            }
            values[i][l] = det_in_place(&mut buf, n);
        }
    }
    // interpolate along t for each fixed s node, then along s per t-degree
    let rows_t: Vec<Vec<Complex64>> = values
        .iter()
        .map(|row| interpolate_monomial(&nodes, row))
        .collect();
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n + 1];
    for k in 0..=n {
        let column: Vec<Complex64> = rows_t.iter().map(|r| r[k]).collect();
        let cs = interpolate_monomial(&nodes, &column);
        for (j, &v) in cs.iter().enumerate() {
            coeffs[j][k] = v;
        }
    }
    // clean roundoff: xi(0,0)=1 exactly, Hermitian coefficient symmetry, and
    // total degree <= N
    coeffs[0][0] = Complex64::new(1.0, 0.0);
    for j in 0..=n {
        for k in 0..j {
            let avg = 0.5 * (coeffs[j][k] + coeffs[k][j].conj());
            coeffs[j][k] = avg;
            coeffs[k][j] = avg.conj();
        }
    }
    for j in 0..=n {
        for k in 0..=n {
            if j + k > n {
                coeffs[j][k] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(BivariatePoly::from_coeffs(coeffs))
}

/// xi of the shifted matrix A - cI, computed from xi_A alone:
/// xi_{A-cI}(s,t) = (1 + sc + t conj(c))^N xi_A(s/(1+sc+t conj c), ...).
/// Expanded exactly via the multinomial theorem; the degree is unchanged.
pub fn xi_shifted(xi: &BivariatePoly, c: Complex64) -> BivariatePoly {
    let n = xi.degree();
    let cbar = c.conj();
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n + 1];
    // xi_{A-cI} = sum_{j,k} a_{jk} s^j t^k (1 + sc + t cbar)^(N-j-k)
    for j in 0..=n {
        for k in 0..=n {
            let a = xi.coeff(j, k);
            if a.norm_sqr() == 0.0 || j + k > n {
                continue;
            }
            let m = n - j - k;
            // multinomial expansion of (1 + sc + t cbar)^m
            let mut cp = Complex64::new(1.0, 0.0);
            for p in 0..=m {
                let mut cq = Complex64::new(1.0, 0.0);
                for q in 0..=(m - p) {
                    let w = multinomial(m, p, q);
                    coeffs[j + p][k + q] += a * w * cp * cq;
                    cq *= cbar;
                }
                cp *= c;
            }
        }
    }
    BivariatePoly::from_coeffs(coeffs)
}

fn multinomial(m: usize, p: usize, q: usize) -> f64 {
    // m! / (p! q! (m-p-q)!)
    crate::util::binomial(m, p) * crate::util::binomial(m - p, q)
}
