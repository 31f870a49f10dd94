//! Dense complex matrices up to 8x8: arithmetic, Kronecker products,
//! partial traces, a cyclic Jacobi Hermitian eigensolver and PSD square roots.
//!
//! Qubit 0 is the most significant bit of a computational-basis index, so
//! `tensor(a, b)` puts `a` on qubit 0.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest row or column count any matrix may have.
pub const MAX_DIM: usize = 8;

const MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = &self.data[i * self.cols + j];
                write!(f, "{:+.6?}{:+.6?}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{} entries do not form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(Error::Size { rows, cols, max: MAX_DIM });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[T]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn diag_real(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Frobenius norm of `m - m^dagger`.
    pub fn hermiticity_defect(&self) -> T {
        (self - &self.adjoint()).frobenius_norm()
    }

    /// `(m + m^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(T::lit(0.5))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] = out.data[i * other.cols + j] + a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `self * rho * self^dagger`.
    pub fn sandwich(&self, rho: &Self) -> Result<Self> {
        self.checked_mul(rho)?.checked_mul(&self.adjoint())
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + self[(i, j)] * v[j])
            })
            .collect()
    }

    fn check_same_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.check_same_shape(rhs);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.check_same_shape(rhs);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Panics on inner-dimension mismatch; use [`Matrix::checked_mul`] for untrusted shapes.
impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::Size { rows, cols, max: MAX_DIM });
    }
    let mut out = Matrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = x * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Embeds a single-qubit operator on `target` of an `n_qubits` register.
pub fn embed<T: Real>(op: &Matrix<T>, target: usize, n_qubits: usize) -> Result<Matrix<T>> {
    if op.rows != 2 || op.cols != 2 {
        return Err(Error::Argument("embedded operator must be 2x2".into()));
    }
    if target >= n_qubits {
        return Err(Error::Argument(format!("qubit {target} out of range for {n_qubits} qubits")));
    }
    let mut out = Matrix::identity(1);
    for q in 0..n_qubits {
        let factor = if q == target { op.clone() } else { Matrix::identity(2) };
        out = tensor(&out, &factor)?;
    }
    Ok(out)
}

/// Reduces `m` to the qubits in `keep`, ordered as they appear in the register.
pub fn partial_trace<T: Real>(m: &Matrix<T>, keep: &[usize], n_qubits: usize) -> Result<Matrix<T>> {
    let dim = 1usize << n_qubits;
    if !m.is_square() || m.rows != dim {
        return Err(Error::Argument(format!("{}x{} is not a {n_qubits}-qubit operator", m.rows, m.cols)));
    }
    if keep.is_empty() {
        return Err(Error::Argument("keep set must be nonempty".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&q| q >= n_qubits) {
        return Err(Error::Argument(format!("invalid keep set {keep:?} for {n_qubits} qubits")));
    }
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !kept.contains(q)).collect();
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let compose = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut full = 0;
        for (pos, &q) in kept.iter().enumerate() {
            if kept_idx >> (kept.len() - 1 - pos) & 1 == 1 {
                full |= bit(q);
            }
        }
        for (pos, &q) in traced.iter().enumerate() {
            if traced_idx >> (traced.len() - 1 - pos) & 1 == 1 {
                full |= bit(q);
            }
        }
        full
    };
    let out_dim = 1usize << kept.len();
    let mut out = Matrix::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut acc = Complex::new(T::zero(), T::zero());
            for t in 0..(1usize << traced.len()) {
                acc = acc + m[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: Matrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.eigenvectors.column(k)
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.eigenvalues.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == T::zero() {
                continue;
            }
            let v = self.vector(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        self.reconstruct_with(|x| x)
    }
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>) -> T {
    let mut s = T::zero();
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// The input is symmetrized first. Eigenvalues come back ascending; each
/// eigenvector is phased so its largest-magnitude component is real positive.
pub fn hermitian_eig<T: Real>(m: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    if !m.is_square() {
        return Err(Error::Argument(format!("{}x{} matrix is not square", m.rows, m.cols)));
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = Matrix::<T>::identity(n);
    let threshold = T::tol(1e-14) * a.frobenius_norm();
    let zero = Complex::new(T::zero(), T::zero());

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NotConverged { sweeps, residual: off.as_f64() });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == T::zero() {
                    continue;
                }
                // phase e^{-i alpha} on column q makes a_pq real, then a real Givens rotation
                let phase = apq.conj() / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (r + r);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let u_pp = Complex::new(c, T::zero());
                let u_pq = Complex::new(s, T::zero());
                let u_qp = phase * (-s);
                let u_qq = phase * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = zero;
                a[(q, p)] = zero;
                a[(p, p)].im = T::zero();
                a[(q, q)].im = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        eigenvalues.push(a[(k, k)].re);
        let vec = v.column(k);
        let mut lead = 0;
        for i in 1..n {
            if vec[i].norm() > vec[lead].norm() {
                lead = i;
            }
        }
        let phase = if vec[lead].norm() > T::zero() { vec[lead].conj() / vec[lead].norm() } else { Complex::new(T::one(), T::zero()) };
        for i in 0..n {
            eigenvectors[(i, col)] = vec[i] * phase;
        }
        eigenvectors[(lead, col)].im = T::zero();
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues down to
/// `-1e-10` are treated as zero.
pub fn sqrt_psd<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = hermitian_eig(m)?;
    let floor = -T::tol(1e-10);
    if let Some(&min) = eig.eigenvalues.first() {
        if min < floor {
            return Err(Error::NotPsd { min_eigenvalue: min.as_f64() });
        }
    }
    Ok(eig.reconstruct_with(|x| x.max(T::zero()).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = Matrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sigma_x() -> M {
        M::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> M {
        let mut m = M::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(rng.gen_range(-1.0..1.0), 0.0);
            for j in (i + 1)..n {
                let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn random_density(rng: &mut ChaCha8Rng, n: usize) -> M {
        let mut g = M::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let rho = &g * &g.adjoint();
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr)
    }

    #[test]
    fn tensor_of_diagonals() {
        let d = M::diag_real(&[1.0, 0.75f64.sqrt()]);
        let t = tensor(&M::identity(2), &d).unwrap();
        let expected = M::diag_real(&[1.0, 0.75f64.sqrt(), 1.0, 0.75f64.sqrt()]);
        assert_eq!(t, expected);
        assert_eq!(tensor(&M::identity(2), &M::identity(2)).unwrap(), M::identity(4));
    }

    #[test]
    fn tensor_flips_both_bits() {
        let xx = tensor(&sigma_x(), &sigma_x()).unwrap();
        let ket00 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let out = xx.apply(&ket00);
        assert_eq!(out[3], c(1.0, 0.0));
        assert_eq!(out[0], c(0.0, 0.0));
    }

    #[test]
    fn tensor_rejects_oversize() {
        let m4 = M::identity(4);
        assert!(matches!(tensor(&m4, &m4), Err(Error::Size { rows: 16, .. })));
    }

    #[test]
    fn tensor_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 2);
        let d = random_hermitian(&mut rng, 2);
        let left = tensor(&tensor(&a, &b).unwrap(), &d).unwrap();
        let right = tensor(&a, &tensor(&b, &d).unwrap()).unwrap();
        assert!((&left - &right).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let bell = M::outer(&phi, &phi);
        let reduced = partial_trace(&bell, &[0], 2).unwrap();
        assert_abs_diff_eq!((&reduced - &M::identity(2).scale_real(0.5)).frobenius_norm(), 0.0, epsilon = 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ra = random_density(&mut rng, 2);
        let rb = random_density(&mut rng, 2);
        let prod = tensor(&ra, &rb).unwrap();
        let got_b = partial_trace(&prod, &[1], 2).unwrap();
        let got_a = partial_trace(&prod, &[0], 2).unwrap();
        assert_abs_diff_eq!((&got_b - &rb).frobenius_norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((&got_a - &ra).frobenius_norm(), 0.0, epsilon = 1e-15);
        assert_eq!(partial_trace(&prod, &[0, 1], 2).unwrap(), prod);
    }

    #[test]
    fn partial_trace_three_qubits_keeps_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r0 = random_density(&mut rng, 2);
        let r1 = random_density(&mut rng, 2);
        let r2 = random_density(&mut rng, 2);
        let full = tensor(&tensor(&r0, &r1).unwrap(), &r2).unwrap();
        let kept = partial_trace(&full, &[0, 2], 3).unwrap();
        let expected = tensor(&r0, &r2).unwrap();
        assert_abs_diff_eq!((&kept - &expected).frobenius_norm(), 0.0, epsilon = 1e-15);
        let tr = partial_trace(&full, &[1], 3).unwrap().trace().re;
        assert_abs_diff_eq!(tr, full.trace().re, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let m = M::identity(4);
        assert!(matches!(partial_trace(&m, &[2], 2), Err(Error::Argument(_))));
        assert!(matches!(partial_trace(&m, &[], 2), Err(Error::Argument(_))));
        assert!(matches!(partial_trace(&m, &[0], 3), Err(Error::Argument(_))));
    }

    #[test]
    fn eig_small_cases() {
        let e = hermitian_eig(&sigma_x()).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-15);

        let e = hermitian_eig(&M::diag_real(&[0.8, 0.2])).unwrap();
        assert_eq!(e.eigenvalues, vec![0.2, 0.8]);
        assert_eq!(e.vector(0), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(e.vector(1), vec![c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn eig_reconstructs_random_8x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 8);
            let e = hermitian_eig(&h).unwrap();
            let resid = (&e.reconstruct() - &h).frobenius_norm() / h.frobenius_norm();
            assert!(resid < 1e-12, "reconstruction residual {resid}");
            let v = &e.eigenvectors;
            let gram = &v.adjoint() * v;
            assert!((&gram - &M::identity(8)).frobenius_norm() < 1e-12);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = e.eigenvalues.iter().sum();
            assert_abs_diff_eq!(sum, h.trace().re, epsilon = 1e-12);
        }
    }

    #[test]
    fn eig_spectrum_invariant_under_unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 4);
            let u = hermitian_eig(&random_hermitian(&mut rng, 4)).unwrap().eigenvectors;
            let conj = &(&u * &h) * &u.adjoint();
            let a = hermitian_eig(&h).unwrap().eigenvalues;
            let b = hermitian_eig(&conj).unwrap().eigenvalues;
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn eig_is_deterministic_and_phase_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let h = random_hermitian(&mut rng, 6);
        let a = hermitian_eig(&h).unwrap();
        let b = hermitian_eig(&h).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
        for k in 0..6 {
            let v = a.vector(k);
            let lead = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let z = v.iter().find(|z| z.norm() == lead).unwrap();
            assert!(z.re > 0.0 && z.im == 0.0);
        }
    }

    #[test]
    fn sqrt_psd_examples() {
        let s = sqrt_psd(&M::diag_real(&[4.0, 9.0])).unwrap();
        assert_abs_diff_eq!((&s - &M::diag_real(&[2.0, 3.0])).frobenius_norm(), 0.0, epsilon = 1e-14);
        assert_eq!(sqrt_psd(&M::identity(4)).unwrap(), M::identity(4));
        assert!(matches!(sqrt_psd(&M::diag_real(&[1.0, -0.5])), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn sqrt_psd_residual_on_random_densities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let rho = random_density(&mut rng, 4);
            let s = sqrt_psd(&rho).unwrap();
            worst = worst.max((&(&s * &s) - &rho).max_abs());
            assert!(s.commutator(&rho).frobenius_norm() < 1e-10);
            assert!(s.hermiticity_defect() < 1e-12);
        }
        assert!(worst < 1e-10, "worst sqrt residual {worst}");
    }

    #[test]
    fn f32_eig_converges() {
        let m = Matrix::<f32>::from_real(2, 2, &[0.3, 0.1, 0.1, 0.7]).unwrap();
        let e = hermitian_eig(&m).unwrap();
        let resid = (&e.reconstruct() - &m).frobenius_norm();
        assert!(resid < 1e-6);
    }
}
