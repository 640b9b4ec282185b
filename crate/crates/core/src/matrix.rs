//! Dense complex matrices and the Hermitian/spectrum types built on them.

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Letters of a word in a matrix and its adjoint, for trace-word evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordLetter {
    X,
    Xstar,
}

/// Dense N x N complex matrix, row-major. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let dim = rows.len();
        let entries: Vec<Complex64> = rows.into_iter().flatten().collect();
        assert_eq!(entries.len(), dim * dim, "ragged rows");
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Jordan nilpotent: ones on the superdiagonal.
    pub fn jordan(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim.saturating_sub(1) {
            m.entries[i * dim + i + 1] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * dim + i] = v;
        }
        m
    }

    /// Matrix with the given superdiagonal entries (dimension = len + 1).
    pub fn superdiagonal(values: &[Complex64]) -> Self {
        let dim = values.len() + 1;
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * dim + i + 1] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        Self { dim: n, entries }
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c];
            }
        }
        Self { dim: n, entries }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// A - cI.
    pub fn shift(&self, c: Complex64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.entries[i * self.dim + i] -= c;
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        Self { dim: n, entries }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    /// tr(A)/N, the mean of the shadow measure.
    pub fn mean_point(&self) -> Complex64 {
        self.trace() / self.dim as f64
    }

    /// Max row sum of absolute values; an upper bound on the spectral radius.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.entries[r * self.dim + c].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Re A = (A + A*)/2 as a Hermitian matrix (symmetrized exactly).
    pub fn re_part(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrize(self)
    }

    /// Re(e^{-i theta} A).
    pub fn re_rotated(&self, theta: f64) -> HermitianMatrix {
        let phase = Complex64::from_polar(1.0, -theta);
        HermitianMatrix::symmetrize(&self.scale(phase))
    }

    /// Block diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.dim + other.dim;
        let mut m = Self::zeros(n);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.entries[r * n + c] = self.entry(r, c);
            }
        }
        for r in 0..other.dim {
            for c in 0..other.dim {
                m.entries[(r + self.dim) * n + (c + self.dim)] = other.entry(r, c);
            }
        }
        m
    }

    /// u* (A u) for a unit vector u.
    pub fn quadratic_form(&self, u: &[Complex64]) -> Complex64 {
        debug_assert_eq!(u.len(), self.dim);
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for c in 0..n {
                row += self.entries[r * n + c] * u[c];
            }
            acc += u[r].conj() * row;
        }
        acc
    }
}

/// Trace of the product spelled by `word` in A and A*. Cyclic-invariant.
pub fn trace_word(a: &ComplexMatrix, word: &[WordLetter]) -> Result<Complex64> {
    if word.is_empty() {
        return Err(invalid("trace_word: empty word"));
    }
    let astar = a.adjoint();
    let pick = |l: &WordLetter| match l {
        WordLetter::X => a,
        WordLetter::Xstar => &astar,
    };
    let mut prod = pick(&word[0]).clone();
    for l in &word[1..] {
        prod = prod.mul(pick(l));
    }
    Ok(prod.trace())
}

/// Hermitian matrix; entries are stored exactly symmetrized so that
/// entry(j,k) == conj(entry(k,j)) holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

/// Construction tolerance for Hermitian deviation, relative to scale.
const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianMatrix {
    /// Accepts a matrix that is Hermitian to within 1e-12 (relative to its
    /// magnitude) and stores the exactly symmetrized form.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let scale = m.max_row_sum().max(1.0);
        let n = m.dim();
        for r in 0..n {
            for c in 0..=r {
                let dev = (m.entry(r, c) - m.entry(c, r).conj()).norm();
                if dev > HERMITIAN_TOL * scale {
                    return Err(invalid(format!(
                        "matrix is not Hermitian: deviation {dev:.3e} at ({r},{c})"
                    )));
                }
            }
        }
        Ok(Self::symmetrize(&m))
    }

    /// (M + M*)/2, always Hermitian.
    pub fn symmetrize(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            entries[r * n + r] = Complex64::new(m.entry(r, r).re, 0.0);
            for c in 0..r {
                let avg = 0.5 * (m.entry(r, c) + m.entry(c, r).conj());
                entries[r * n + c] = avg;
                entries[c * n + r] = avg.conj();
            }
        }
        Self {
            inner: ComplexMatrix { dim: n, entries },
        }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let vals: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self {
            inner: ComplexMatrix::diagonal(&vals),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.inner.entry(row, col)
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    pub fn trace_real(&self) -> f64 {
        self.inner.trace().re
    }
}

/// Real eigenvalues in ascending order; multiplicities by repetition.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).expect("non-finite eigenvalue"));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Group values that coincide within the declared tolerance
    /// 1e-8 * max(1, spectral radius); returns (value, multiplicity) pairs
    /// with the value taken as the group mean.
    pub fn grouped(&self) -> Vec<(f64, usize)> {
        let tol = 1e-8 * self.spectral_radius().max(1.0);
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in &self.values {
            match out.last_mut() {
                Some((rep, count)) if (v - *rep).abs() <= tol => {
                    *rep = (*rep * *count as f64 + v) / (*count as f64 + 1.0);
                    *count += 1;
                }
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

/// Eigenvalue coincidence tolerance used for multiplicity grouping.
pub fn coincidence_tol(spectral_radius: f64) -> f64 {
    1e-8 * spectral_radius.max(1.0)
}
