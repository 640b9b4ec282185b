//! Exact shadow moments from xi_A, plus the equality and rotation-invariance
//! predicates that live on top of the coefficient calculus.
//!
//! Every moment flows through the series expansion of 1/xi_A about (0,0):
//! nu_jk(A) = j! k! / (N)_{j+k} [s^j t^k] xi_A(s,t)^{-1}.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::matrix::ComplexMatrix;
use crate::util::{factorial_ratio, interpolate_monomial};
use crate::xi::{xi_poly, xi_shifted, BivariatePoly};

/// Highest moment order the calculus accepts; (N)_{j+k} stays representable
/// with ample headroom below this.
pub const MAX_MOMENT_ORDER: usize = 60;

/// Absolute tolerance on xi coefficients of matrices pre-scaled to a
/// spectral-radius-<=-1 bound (max row sum), used by the equality and
/// rotation-invariance predicates.
pub const XI_EQUALITY_TOL: f64 = 1e-9;

/// Triangular table of shadow moments nu_jk for j + k <= max_order.
#[derive(Clone, Debug)]
pub struct MomentTable {
    max_order: usize,
    values: BTreeMap<(usize, usize), Complex64>,
}

impl MomentTable {
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn get(&self, j: usize, k: usize) -> Option<Complex64> {
        self.values.get(&(j, k)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Complex64)> {
        self.values.iter()
    }
}

/// Power-series coefficients c[j][k] of 1/xi(s,t) for j + k <= max_order.
/// Verified recursion: sum over (a,b) <= (j,k) of xi[a][b] c[j-a][k-b] = [j=k=0].
pub fn series_inverse(xi: &BivariatePoly, max_order: usize) -> Result<Vec<Vec<Complex64>>> {
    let one = Complex64::new(1.0, 0.0);
    if (xi.coeff(0, 0) - one).norm() > 1e-9 {
        return Err(invalid("series_inverse: xi(0,0) must be 1"));
    }
    let m = max_order;
    let mut c = vec![vec![Complex64::new(0.0, 0.0); m + 1]; m + 1];
    c[0][0] = one;
    for total in 1..=m {
        for j in 0..=total {
            let k = total - j;
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..=j.min(xi.degree()) {
                for b in 0..=k.min(xi.degree()) {
                    if a + b == 0 {
                        continue;
                    }
                    let f = xi.coeff(a, b);
                    if f.norm_sqr() != 0.0 {
                        acc += f * c[j - a][k - b];
                    }
                }
            }
            c[j][k] = -acc;
        }
    }
    Ok(c)
}

fn moment_from_series(c: &[Vec<Complex64>], n: usize, j: usize, k: usize) -> Complex64 {
    c[j][k] * factorial_ratio(j, k, n)
}

/// nu_jk(A), the (j,k) moment of the shadow measure.
pub fn moment(a: &ComplexMatrix, j: usize, k: usize) -> Result<Complex64> {
    if j + k > MAX_MOMENT_ORDER {
        return Err(invalid(format!(
            "moment order j+k = {} exceeds the supported maximum {MAX_MOMENT_ORDER}",
            j + k
        )));
    }
    let xi = xi_poly(a)?;
    let c = series_inverse(&xi, j + k)?;
    Ok(moment_from_series(&c, a.dim(), j, k))
}

/// All moments with j + k <= max_order.
pub fn moment_table(a: &ComplexMatrix, max_order: usize) -> Result<MomentTable> {
    if max_order > MAX_MOMENT_ORDER {
        return Err(invalid(format!(
            "moment order {max_order} exceeds the supported maximum {MAX_MOMENT_ORDER}"
        )));
    }
    let xi = xi_poly(a)?;
    let c = series_inverse(&xi, max_order)?;
    let mut values = BTreeMap::new();
    for j in 0..=max_order {
        for k in 0..=(max_order - j) {
            values.insert((j, k), moment_from_series(&c, a.dim(), j, k));
        }
    }
    Ok(MomentTable { max_order, values })
}

/// Central moment nu0_jk(A) about the mean tr(A)/N, via the shifted xi.
pub fn central_moment(a: &ComplexMatrix, j: usize, k: usize) -> Result<Complex64> {
    if j + k > MAX_MOMENT_ORDER {
        return Err(invalid(format!(
            "moment order j+k = {} exceeds the supported maximum {MAX_MOMENT_ORDER}",
            j + k
        )));
    }
    let xi = xi_poly(a)?;
    let shifted = xi_shifted(&xi, a.mean_point());
    let c = series_inverse(&shifted, j + k)?;
    Ok(moment_from_series(&c, a.dim(), j, k))
}

/// Outcome of a shadow-equality comparison. When unequal, `witness` holds the
/// graded-first coefficient index (j,k) where xi_A and xi_B disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct EqualityReport {
    pub equal: bool,
    pub max_coeff_diff: f64,
    pub witness: Option<(usize, usize)>,
}

fn common_scale(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.max_row_sum().max(b.max_row_sum()).max(1e-300)
}

/// Shadow equality: P_A == P_B iff xi_A == xi_B as polynomials. Matrices are
/// pre-scaled by the larger max row sum, then coefficients compared at the
/// declared absolute tolerance.
pub fn shadows_equal(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<EqualityReport> {
    if a.dim() != b.dim() {
        return Err(invalid(format!(
            "shadows_equal: dimension mismatch {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let scale = common_scale(a, b);
    let inv = Complex64::new(1.0 / scale, 0.0);
    let xa = xi_poly(&a.scale(inv))?;
    let xb = xi_poly(&b.scale(inv))?;
    let (max_diff, witness) = xa.max_coeff_diff(&xb, XI_EQUALITY_TOL);
    Ok(EqualityReport {
        equal: max_diff <= XI_EQUALITY_TOL,
        max_coeff_diff: max_diff,
        witness,
    })
}

/// True when the shadow of A is invariant under rotations about the origin:
/// xi_A is a function of the product st.
pub fn rotation_invariant(a: &ComplexMatrix) -> Result<bool> {
    let scale = a.max_row_sum().max(1e-300);
    let xi = xi_poly(&a.scale(Complex64::new(1.0 / scale, 0.0)))?;
    Ok(xi.is_function_of_st(XI_EQUALITY_TOL))
}

/// Trace criterion for shadow equality: tr(sA + tA*)^k agree as polynomials
/// in (s,t) for every k <= N. Each trace is a homogeneous degree-k
/// polynomial, recovered by evaluating the pencil power at sample points on
/// the line s = 1 and interpolating.
pub fn trace_criterion_equal(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(invalid(format!(
            "trace_criterion_equal: dimension mismatch {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let scale = common_scale(a, b);
    let inv = Complex64::new(1.0 / scale, 0.0);
    let (a, b) = (a.scale(inv), b.scale(inv));
    let n = a.dim();
    for k in 1..=n {
        let ca = pencil_trace_coeffs(&a, k);
        let cb = pencil_trace_coeffs(&b, k);
        for (x, y) in ca.iter().zip(cb.iter()) {
            if (x - y).norm() > XI_EQUALITY_TOL * 10.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Coefficients c_j of tr(sA + tA*)^k = sum_j c_j s^j t^(k-j), via
/// interpolation at s=1, t = Chebyshev nodes.
fn pencil_trace_coeffs(a: &ComplexMatrix, k: usize) -> Vec<Complex64> {
    let astar = a.adjoint();
    let nodes = crate::util::chebyshev_nodes(k + 1);
    // offset nodes away from symmetric pairs to keep them distinct from 1*t
    let values: Vec<Complex64> = nodes
        .iter()
        .map(|&t| {
            let pencil = a.add(&astar.scale(Complex64::new(t, 0.0)));
            let mut power = pencil.clone();
            for _ in 1..k {
                power = power.mul(&pencil);
            }
            power.trace()
        })
        .collect();
    // tr(pencil^k) at s=1 is a degree-k polynomial in t; coefficient of t^m
    // multiplies s^(k-m) in the homogeneous form
    let uni = interpolate_monomial(&nodes, &values);
    (0..=k).map(|j| uni[k - j]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::c;
    use num_complex::Complex64 as C;

    fn section6_pair(x: f64, y: f64, z: f64) -> (ComplexMatrix, ComplexMatrix) {
        let zero = c(0.0, 0.0);
        let a = ComplexMatrix::from_rows(vec![
            vec![zero, c(x, 0.0), zero],
            vec![c(y, 0.0), zero, zero],
            vec![c(z, 0.0), zero, zero],
        ]);
        let b = ComplexMatrix::from_rows(vec![
            vec![zero, c(y, 0.0), zero],
            vec![c(x, 0.0), zero, zero],
            vec![c(z, 0.0), zero, zero],
        ]);
        (a, b)
    }

    #[test]
    fn series_inverse_jordan4() {
        // xi = 1 - 3st + s^2 t^2: c[1][1] = 3, c[2][2] = 8, off-diagonal zero
        let xi = xi_poly(&ComplexMatrix::jordan(4)).unwrap();
        let cs = series_inverse(&xi, 6).unwrap();
        assert!((cs[1][1] - c(3.0, 0.0)).norm() < 1e-10);
        assert!((cs[2][2] - c(8.0, 0.0)).norm() < 1e-10);
        for j in 0..=6usize {
            for k in 0..=(6 - j) {
                if j != k {
                    assert!(cs[j][k].norm() < 1e-10, "({j},{k})");
                }
            }
        }
    }

    #[test]
    fn series_inverse_constant() {
        let xi = BivariatePoly::constant_one(2);
        let cs = series_inverse(&xi, 4).unwrap();
        for j in 0..=4usize {
            for k in 0..=(4 - j) {
                let want = if j == 0 && k == 0 { 1.0 } else { 0.0 };
                assert!((cs[j][k] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn first_moments_formulas() {
        // nu_10 = tr(A)/N for diag(0,1,3,5)
        let d = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0), c(5.0, 0.0)]);
        let m10 = moment(&d, 1, 0).unwrap();
        assert!((m10 - c(9.0 / 4.0, 0.0)).norm() < 1e-12);
        // nu_11(J2) = 1/6
        let j2 = ComplexMatrix::jordan(2);
        let m11 = moment(&j2, 1, 1).unwrap();
        assert!((m11 - c(1.0 / 6.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn nu_11_trace_formula_random() {
        // nu_11 = (tr(AA*) + tr A tr A*) / (N(N+1))
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.3, -0.1), c(1.2, 0.4), c(0.0, 0.9)],
            vec![c(-0.5, 0.2), c(0.8, 0.0), c(0.1, -0.7)],
            vec![c(0.6, 0.6), c(-0.2, 0.1), c(-0.9, 0.3)],
        ]);
        let n = 3.0;
        let aas = a.mul(&a.adjoint()).trace();
        let expect = (aas + a.trace() * a.adjoint().trace()) / (n * (n + 1.0));
        let got = moment(&a, 1, 1).unwrap();
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn conjugate_symmetry() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.3, -0.1), c(1.2, 0.4)],
            vec![c(-0.5, 0.2), c(0.8, 0.0)],
        ]);
        let table = moment_table(&a, 5).unwrap();
        for ((j, k), v) in table.iter() {
            let sym = table.get(*k, *j).unwrap();
            assert!((v.conj() - sym).norm() < 1e-12);
        }
        assert!((table.get(0, 0).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn central_moment_basics() {
        let a3 = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        ]);
        // first central moment vanishes
        let c10 = central_moment(&a3, 1, 0).unwrap();
        assert!(c10.norm() < 1e-12);
        // nu0_11(A3) = 13/36
        let c11 = central_moment(&a3, 1, 1).unwrap();
        assert!((c11 - c(13.0 / 36.0, 0.0)).norm() < 1e-11);
        // Hermitian: central moments real
        let h = ComplexMatrix::diagonal(&[c(-1.0, 0.0), c(0.5, 0.0), c(2.0, 0.0)]);
        for (j, k) in [(2usize, 0usize), (2, 1), (3, 1)] {
            let v = central_moment(&h, j, k).unwrap();
            assert!(v.im.abs() < 1e-12, "({j},{k})");
        }
    }

    #[test]
    fn order_guard() {
        let a = ComplexMatrix::jordan(2);
        assert!(moment(&a, 40, 21).is_err());
        assert!(moment(&a, 30, 30).is_ok());
    }

    #[test]
    fn equality_pair_symmetric_in_xy() {
        let (a, b) = section6_pair(0.7, -0.3, 1.1);
        let rep = shadows_equal(&a, &b).unwrap();
        assert!(rep.equal, "diff={}", rep.max_coeff_diff);
        assert!(trace_criterion_equal(&a, &b).unwrap());
    }

    #[test]
    fn equality_rank_differs() {
        let (a, b) = section6_pair(0.0, 1.0, 1.0);
        let rep = shadows_equal(&a, &b).unwrap();
        assert!(rep.equal);
        assert!(trace_criterion_equal(&a, &b).unwrap());
    }

    #[test]
    fn inequality_witness_shifted_mean() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.3, -0.1), c(1.2, 0.4)],
            vec![c(-0.5, 0.2), c(0.8, 0.0)],
        ]);
        let b = a.shift(c(-1.0, 0.0)); // A + I
        let rep = shadows_equal(&a, &b).unwrap();
        assert!(!rep.equal);
        assert_eq!(rep.witness, Some((1, 0)));
        assert!(!trace_criterion_equal(&a, &b).unwrap());
    }

    #[test]
    fn transpose_has_equal_shadow() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.3, -0.1), c(1.2, 0.4), c(0.0, 0.9)],
            vec![c(-0.5, 0.2), c(0.8, 0.0), c(0.1, -0.7)],
            vec![c(0.6, 0.6), c(-0.2, 0.1), c(-0.9, 0.3)],
        ]);
        let rep = shadows_equal(&a, &a.transpose()).unwrap();
        assert!(rep.equal);
    }

    #[test]
    fn rotation_invariance_cases() {
        assert!(rotation_invariant(&ComplexMatrix::jordan(3)).unwrap());
        assert!(rotation_invariant(&ComplexMatrix::jordan(5)).unwrap());
        // diag(1,-1) is not rotation invariant
        let d = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(!rotation_invariant(&d).unwrap());
        // 4x4 strictly upper with c=0, a=b=x=1, y=-1/2, z=2: rotation
        // invariant but not unitarily similar to its rotations
        let zero = c(0.0, 0.0);
        let m = ComplexMatrix::from_rows(vec![
            vec![zero, c(1.0, 0.0), c(1.0, 0.0), zero],
            vec![zero, zero, c(1.0, 0.0), c(-0.5, 0.0)],
            vec![zero, zero, zero, c(2.0, 0.0)],
            vec![zero, zero, zero, zero],
        ]);
        assert!(rotation_invariant(&m).unwrap());
    }

    #[test]
    fn rotation_invariant_moments_vanish_off_diagonal() {
        let j4 = ComplexMatrix::jordan(4);
        let table = moment_table(&j4, 5).unwrap();
        for ((j, k), v) in table.iter() {
            if j != k {
                assert!(v.norm() < 1e-12, "({j},{k})");
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = ComplexMatrix::jordan(2);
        let b = ComplexMatrix::jordan(3);
        assert!(shadows_equal(&a, &b).is_err());
    }

    #[test]
    fn geometric_diagonal_series() {
        // xi = 1 - lambda^2 st gives c[m][m] = lambda^(2m)
        let lambda = 0.8f64;
        let mut coeffs = vec![vec![C::new(0.0, 0.0); 2]; 2];
        coeffs[0][0] = c(1.0, 0.0);
        coeffs[1][1] = c(-lambda * lambda, 0.0);
        let xi = BivariatePoly::from_coeffs(coeffs);
        let cs = series_inverse(&xi, 8).unwrap();
        for m in 0..=4usize {
            let want = lambda.powi(2 * m as i32);
            assert!((cs[m][m] - c(want, 0.0)).norm() < 1e-13);
        }
    }
}
