//! Hermitian eigenvalues without an external eigensolver: the N x N complex
//! Hermitian H = P + iQ embeds into the 2N x 2N real symmetric
//! [[P, -Q], [Q, P]], whose spectrum is that of H doubled. Cyclic Jacobi
//! rotations handle the real symmetric problem.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::matrix::{HermitianMatrix, Spectrum};

/// Cyclic Jacobi on a dense real symmetric matrix (row-major). Returns
/// eigenvalues ascending; eigenvectors (column i of the returned flat matrix,
/// i.e. vecs[r * n + i]) when `want_vectors`.
pub fn jacobi_symmetric(a: &[f64], n: usize, want_vectors: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = if want_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };
    if n == 1 {
        return (vec![m[0]], v);
    }
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += m[p * n + q] * m[p * n + q];
            }
        }
        s
    };
    let norm: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let tol = (1e-30 * norm * norm).max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    1.0 / (2.0 * theta)
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rows/cols p and q
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                if let Some(vm) = v.as_mut() {
                    for k in 0..n {
                        let vkp = vm[k * n + p];
                        let vkq = vm[k * n + q];
                        vm[k * n + p] = c * vkp - s * vkq;
                        vm[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let vecs = v.map(|vm| {
        let mut out = vec![0.0; n * n];
        for (new_i, &old_i) in order.iter().enumerate() {
            for r in 0..n {
                out[r * n + new_i] = vm[r * n + old_i];
            }
        }
        out
    });
    (vals, vecs)
}

fn embed(h: &HermitianMatrix) -> (Vec<f64>, usize) {
    let n = h.dim();
    let m = 2 * n;
    let mut s = vec![0.0f64; m * m];
    for r in 0..n {
        for cidx in 0..n {
            let e = h.entry(r, cidx);
            s[r * m + cidx] = e.re; // P
            s[(r + n) * m + (cidx + n)] = e.re; // P
            s[r * m + (cidx + n)] = -e.im; // -Q
            s[(r + n) * m + cidx] = e.im; // Q
        }
    }
    (s, m)
}

/// All eigenvalues of a Hermitian matrix, ascending. Each eigenvalue of the
/// doubled real spectrum appears twice; every second entry is kept.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> Result<Spectrum> {
    if !h.is_finite() {
        return Err(invalid("hermitian_eigenvalues: non-finite entries"));
    }
    let (s, m) = embed(h);
    let (vals, _) = jacobi_symmetric(&s, m, false);
    let picked: Vec<f64> = vals.iter().step_by(2).copied().collect();
    Ok(Spectrum::new(picked))
}

/// Eigenvalues and eigenvectors of a Hermitian matrix. A real eigenvector
/// [x; y] of the symmetric embedding corresponds to the complex vector
/// x + i y of H.
pub fn hermitian_eigen(h: &HermitianMatrix) -> Result<(Spectrum, Vec<Vec<Complex64>>)> {
    if !h.is_finite() {
        return Err(invalid("hermitian_eigen: non-finite entries"));
    }
    let n = h.dim();
    let (s, m) = embed(h);
    let (vals, vecs) = jacobi_symmetric(&s, m, true);
    let vecs = vecs.expect("vectors requested");
    let mut spectrum = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for idx in (0..m).step_by(2) {
        spectrum.push(vals[idx]);
        let mut v = Vec::with_capacity(n);
        for r in 0..n {
            v.push(Complex64::new(vecs[r * m + idx], vecs[(r + n) * m + idx]));
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= norm;
        }
        out.push(v);
    }
    Ok((Spectrum::new(spectrum), out))
}
