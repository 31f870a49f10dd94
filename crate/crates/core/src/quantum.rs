//! States, channels and measurements on one to three qubits.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complexalg::{embed, hermitian_eig, sqrt_psd, tensor, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    n_qubits: usize,
    mat: Matrix<T>,
    normalized: bool,
}

impl<T: Real> DensityMatrix<T> {
    /// Wraps a Hermitian `2^n x 2^n` matrix, `n` in 1..=3. The `normalized`
    /// flag is set when the trace is within `1e-10` of one.
    pub fn new(mat: Matrix<T>) -> Result<Self> {
        let n_qubits = match (mat.rows(), mat.cols()) {
            (2, 2) => 1,
            (4, 4) => 2,
            (8, 8) => 3,
            (r, c) => return Err(Error::Argument(format!("{r}x{c} is not a 1-3 qubit density matrix"))),
        };
        let scale = mat.frobenius_norm().max(T::one());
        if mat.hermiticity_defect() > T::tol(1e-10) * scale {
            return Err(Error::Argument("density matrix must be Hermitian".into()));
        }
        let normalized = (mat.trace().re - T::one()).abs() <= T::tol(1e-10);
        Ok(Self { n_qubits, mat, normalized })
    }

    /// Wraps a ket `|psi><psi|`.
    pub fn pure(ket: &[Complex<T>]) -> Result<Self> {
        Self::new(Matrix::outer(ket, ket))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.mat
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> T {
        self.mat.trace().re
    }

    pub fn purity(&self) -> T {
        (&self.mat * &self.mat).trace().re
    }

    /// Rescales to unit trace.
    pub fn normalize(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= T::tol(1e-14) {
            return Err(Error::DegenerateState(format!("trace {} cannot be normalized", tr.as_f64())));
        }
        Ok(Self { n_qubits: self.n_qubits, mat: self.mat.scale_real(T::one() / tr), normalized: true })
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(hermitian_eig(&self.mat)?.eigenvalues[0])
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mat = tensor(&self.mat, &other.mat)?;
        let normalized = self.normalized && other.normalized;
        let n_qubits = self.n_qubits + other.n_qubits;
        if n_qubits > 3 {
            return Err(Error::Size { rows: mat.rows(), cols: mat.cols(), max: 8 });
        }
        Ok(Self { n_qubits, mat, normalized })
    }

    /// Applies an arbitrary operator `K rho K^dagger` without renormalizing.
    pub(crate) fn conjugate_by(&self, op: &Matrix<T>) -> Result<Self> {
        let mat = op.sandwich(&self.mat)?;
        let normalized = (mat.trace().re - T::one()).abs() <= T::tol(1e-10) && self.normalized;
        Ok(Self { n_qubits: self.n_qubits, mat, normalized })
    }

    pub(crate) fn from_parts(n_qubits: usize, mat: Matrix<T>, normalized: bool) -> Self {
        Self { n_qubits, mat, normalized }
    }

    /// Maximum absolute deviation between entries.
    pub fn distance(&self, other: &Self) -> T {
        (&self.mat - &other.mat).max_abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector<T> {
    pub rx: T,
    pub ry: T,
    pub rz: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(rx: T, ry: T, rz: T) -> Self {
        Self { rx, ry, rz }
    }

    pub fn norm_sqr(&self) -> T {
        self.rx * self.rx + self.ry * self.ry + self.rz * self.rz
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.rx * other.rx + self.ry * other.ry + self.rz * other.rz
    }

    pub fn components(&self) -> [T; 3] {
        [self.rx, self.ry, self.rz]
    }

    /// `(I + r.sigma) / 2`.
    pub fn to_density(&self) -> Result<DensityMatrix<T>> {
        let half = T::lit(0.5);
        let mut m = Matrix::zeros(2, 2);
        m[(0, 0)] = Complex::new(half * (T::one() + self.rz), T::zero());
        m[(1, 1)] = Complex::new(half * (T::one() - self.rz), T::zero());
        m[(0, 1)] = Complex::new(half * self.rx, -half * self.ry);
        m[(1, 0)] = Complex::new(half * self.rx, half * self.ry);
        DensityMatrix::new(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix<T: Real>(self) -> Matrix<T> {
        let o = T::zero();
        let l = T::one();
        let c = |re: T, im: T| Complex::new(re, im);
        let data = match self {
            Pauli::I => vec![c(l, o), c(o, o), c(o, o), c(l, o)],
            Pauli::X => vec![c(o, o), c(l, o), c(l, o), c(o, o)],
            Pauli::Y => vec![c(o, o), c(o, -l), c(o, l), c(o, o)],
            Pauli::Z => vec![c(l, o), c(o, o), c(o, o), c(-l, o)],
        };
        Matrix::from_vec(2, 2, data).expect("2x2 Pauli")
    }
}

/// The four Bell states under the conventional labels; `PhiPlus` is
/// `(|00> + |11>)/sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];

    pub fn ket<T: Real>(self) -> Vec<Complex<T>> {
        let s = T::FRAC_1_SQRT_2();
        let z = T::zero();
        let c = |x: T| Complex::new(x, T::zero());
        match self {
            BellState::PhiPlus => vec![c(s), c(z), c(z), c(s)],
            BellState::PhiMinus => vec![c(s), c(z), c(z), c(-s)],
            BellState::PsiPlus => vec![c(z), c(s), c(s), c(z)],
            BellState::PsiMinus => vec![c(z), c(s), c(-s), c(z)],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }
}

pub fn bell_state<T: Real>(kind: BellState) -> DensityMatrix<T> {
    DensityMatrix::pure(&kind.ket()).expect("Bell state is a valid 2-qubit state")
}

/// `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
pub fn input_state<T: Real>(theta: T, phi: T) -> DensityMatrix<T> {
    let half = theta * T::lit(0.5);
    let ket = [Complex::new(half.cos(), T::zero()), Complex::from_polar(half.sin(), phi)];
    DensityMatrix::pure(&ket).expect("pure qubit state")
}

fn check_unit_interval<T: Real>(name: &str, x: T) -> Result<()> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::Argument(format!("{name} = {} must lie in [0, 1]", x.as_f64())));
    }
    Ok(())
}

fn check_target(target: usize, n_qubits: usize) -> Result<()> {
    if !(1..=3).contains(&n_qubits) || target >= n_qubits {
        return Err(Error::Argument(format!("qubit {target} invalid for a {n_qubits}-qubit register")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel<T> {
    operators: Vec<Matrix<T>>,
    target: usize,
    n_qubits: usize,
}

impl<T: Real> KrausChannel<T> {
    /// Embeds single-qubit Kraus operators on `target`.
    pub fn from_single_qubit(ops: &[Matrix<T>], target: usize, n_qubits: usize) -> Result<Self> {
        check_target(target, n_qubits)?;
        let operators = ops.iter().map(|op| embed(op, target, n_qubits)).collect::<Result<Vec<_>>>()?;
        Ok(Self { operators, target, n_qubits })
    }

    pub fn operators(&self) -> &[Matrix<T>] {
        &self.operators
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Frobenius distance of `sum E^dagger E` from the identity.
    pub fn completeness_defect(&self) -> T {
        let dim = 1 << self.n_qubits;
        let sum = self
            .operators
            .iter()
            .fold(Matrix::zeros(dim, dim), |acc, e| &acc + &(&e.adjoint() * e));
        (&sum - &Matrix::identity(dim)).frobenius_norm()
    }
}

/// Amplitude damping with Kraus pair `diag(1, sqrt(1-gamma))` and `sqrt(gamma)|0><1|`.
pub fn ad_channel<T: Real>(gamma: T, target: usize, n_qubits: usize) -> Result<KrausChannel<T>> {
    check_unit_interval("gamma", gamma)?;
    let o = T::zero();
    let e1 = Matrix::from_real(2, 2, &[T::one(), o, o, (T::one() - gamma).sqrt()])?;
    let e2 = Matrix::from_real(2, 2, &[o, gamma.sqrt(), o, o])?;
    KrausChannel::from_single_qubit(&[e1, e2], target, n_qubits)
}

pub fn apply_channel<T: Real>(rho: &DensityMatrix<T>, ch: &KrausChannel<T>) -> Result<DensityMatrix<T>> {
    if rho.n_qubits() != ch.n_qubits {
        return Err(Error::Argument(format!(
            "{}-qubit channel applied to a {}-qubit state",
            ch.n_qubits,
            rho.n_qubits()
        )));
    }
    let dim = rho.dim();
    let mat = ch
        .operators
        .iter()
        .try_fold(Matrix::zeros(dim, dim), |acc, e| e.sandwich(rho.matrix()).map(|t| &acc + &t))?;
    Ok(DensityMatrix::from_parts(rho.n_qubits(), mat, rho.is_normalized()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator<T> {
    op: Matrix<T>,
    target: usize,
    n_qubits: usize,
    strength: T,
    embedded: Matrix<T>,
}

impl<T: Real> MeasurementOperator<T> {
    pub fn new(op: Matrix<T>, target: usize, n_qubits: usize, strength: T) -> Result<Self> {
        check_target(target, n_qubits)?;
        check_unit_interval("strength", strength)?;
        let embedded = embed(&op, target, n_qubits)?;
        Ok(Self { op, target, n_qubits, strength, embedded })
    }

    /// The bare 2x2 operator.
    pub fn single_qubit(&self) -> &Matrix<T> {
        &self.op
    }

    pub fn embedded(&self) -> &Matrix<T> {
        &self.embedded
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn strength(&self) -> T {
        self.strength
    }

    /// Same operator on another register layout.
    pub fn retarget(&self, target: usize, n_qubits: usize) -> Result<Self> {
        Self::new(self.op.clone(), target, n_qubits, self.strength)
    }
}

/// The partial measurement pair: `M0 = diag(1, sqrt(1-p))`, `M1 = sqrt(p)|1><1|`.
pub fn partial_measurement<T: Real>(
    p: T,
    target: usize,
    n_qubits: usize,
) -> Result<(MeasurementOperator<T>, MeasurementOperator<T>)> {
    check_unit_interval("p", p)?;
    let o = T::zero();
    let m0 = Matrix::from_real(2, 2, &[T::one(), o, o, (T::one() - p).sqrt()])?;
    let m1 = Matrix::from_real(2, 2, &[o, o, o, p.sqrt()])?;
    Ok((MeasurementOperator::new(m0, target, n_qubits, p)?, MeasurementOperator::new(m1, target, n_qubits, p)?))
}

/// Physical reversal `X M0(p_r) X = diag(sqrt(1-p_r), 1)`.
pub fn reversal_operator<T: Real>(p_r: T, target: usize, n_qubits: usize) -> Result<MeasurementOperator<T>> {
    check_unit_interval("p_r", p_r)?;
    let o = T::zero();
    let op = Matrix::from_real(2, 2, &[(T::one() - p_r).sqrt(), o, o, T::one()])?;
    MeasurementOperator::new(op, target, n_qubits, p_r)
}

/// Returns `M rho M^dagger` (unnormalized) and its acceptance probability.
pub fn apply_measurement<T: Real>(
    rho: &DensityMatrix<T>,
    m: &MeasurementOperator<T>,
) -> Result<(DensityMatrix<T>, T)> {
    if rho.n_qubits() != m.n_qubits {
        return Err(Error::Argument(format!(
            "{}-qubit measurement applied to a {}-qubit state",
            m.n_qubits,
            rho.n_qubits()
        )));
    }
    let tr_in = rho.trace();
    let mat = m.embedded.sandwich(rho.matrix())?;
    let prob = if tr_in > T::zero() { mat.trace().re / tr_in } else { T::zero() };
    Ok((DensityMatrix::from_parts(rho.n_qubits(), mat, false), prob))
}

/// Bloch components `tr(rho sigma_k)`, divided by `tr(rho)` when `renormalize`.
pub fn bloch_of<T: Real>(rho: &DensityMatrix<T>, renormalize: bool) -> Result<BlochVector<T>> {
    if rho.n_qubits() != 1 {
        return Err(Error::Argument(format!("Bloch vector needs one qubit, got {}", rho.n_qubits())));
    }
    let m = rho.matrix();
    let tr = rho.trace();
    let scale = if renormalize {
        if tr.abs() <= T::tol(1e-14) {
            return Err(Error::DegenerateState("zero-trace state has no Bloch vector".into()));
        }
        T::one() / tr
    } else {
        T::one()
    };
    let rx = (m[(0, 1)].re + m[(1, 0)].re) * scale;
    let ry = (m[(1, 0)].im - m[(0, 1)].im) * scale;
    let rz = (m[(0, 0)].re - m[(1, 1)].re) * scale;
    Ok(BlochVector { rx, ry, rz })
}

/// Wootters concurrence of a normalized two-qubit state.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.n_qubits() != 2 {
        return Err(Error::Argument("concurrence needs a two-qubit state".into()));
    }
    let m = rho.matrix();
    let yy = tensor(&Pauli::Y.matrix(), &Pauli::Y.matrix())?;
    let flipped = &(&yy * &m.conj()) * &yy;
    let root = sqrt_psd(m)?;
    let r = &(&root * &flipped) * &root;
    let eig = hermitian_eig(&r)?;
    if eig.eigenvalues[0] < -T::tol(1e-9) {
        return Err(Error::NotPsd { min_eigenvalue: eig.eigenvalues[0].as_f64() });
    }
    // values at the eigen-solver noise floor would otherwise leak in as sqrt(noise)
    let floor = T::epsilon() * T::lit(4.0) * r.frobenius_norm();
    let mut s: Vec<T> =
        eig.eigenvalues.iter().map(|&l| if l <= floor { T::zero() } else { l.sqrt() }).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok((s[0] - s[1] - s[2] - s[3]).max(T::zero()))
}

/// Closed-form concurrence of an X-state:
/// `2 max(0, |r03| - sqrt(r11 r22), |r12| - sqrt(r00 r33))`.
pub fn concurrence_x_state<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.n_qubits() != 2 {
        return Err(Error::Argument("concurrence needs a two-qubit state".into()));
    }
    let m = rho.matrix();
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 && m[(i, j)].norm() > T::tol(1e-10) {
                return Err(Error::Shape { row: i, col: j, magnitude: m[(i, j)].norm().as_f64() });
            }
        }
    }
    let p = |i: usize| m[(i, i)].re.max(T::zero());
    let a = m[(0, 3)].norm() - (p(1) * p(2)).sqrt();
    let b = m[(1, 2)].norm() - (p(0) * p(3)).sqrt();
    Ok(T::lit(2.0) * a.max(b).max(T::zero()))
}
