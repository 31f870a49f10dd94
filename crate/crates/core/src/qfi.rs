//! Quantum Fisher information of one-parameter state families.
//!
//! Three estimators are provided and are meant to be checked against each
//! other: the symmetric-logarithmic-derivative sum in the eigenbasis of
//! `rho`, the spectral decomposition into eigenvalue, pure-state and mixing
//! terms, and the closed form in Bloch coordinates for a single qubit.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complexalg::{hermitian_eig, EigenDecomposition, Matrix};
use crate::error::{Error, Result};
use crate::quantum::{bloch_of, BlochVector, DensityMatrix};
use crate::scalar::Real;

/// Eigenvalues below this are outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-10;

/// Minimum overlap for an eigenvector at `phi +- h` to count as the continuation
/// of one at `phi`. Genuine continuations differ by `O(h)`.
const TRACKING_OVERLAP: f64 = 0.9;

/// A map `phi -> rho(phi)` of fixed dimension. Implementations must be reentrant.
pub trait StateFamily<T: Real> {
    fn evaluate(&self, phi: T) -> Result<DensityMatrix<T>>;
}

impl<T: Real, F> StateFamily<T> for F
where
    F: Fn(T) -> Result<DensityMatrix<T>>,
{
    fn evaluate(&self, phi: T) -> Result<DensityMatrix<T>> {
        self(phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sld,
    Spectral,
    Bloch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiEstimate<T> {
    pub value: T,
    pub method: Method,
    /// Finite-difference step; zero when derivatives were supplied directly.
    pub step: T,
}

impl<T: Real> QfiEstimate<T> {
    fn clamped(value: T, method: Method, step: T) -> Self {
        Self { value: value.max(T::zero()), method, step }
    }
}

fn check_step<T: Real>(h: T) -> Result<()> {
    if h > T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("finite-difference step must be positive, got {}", h.as_f64())))
    }
}

/// Central difference `(rho(phi+h) - rho(phi-h)) / 2h`.
pub fn d_rho<T: Real>(family: &impl StateFamily<T>, phi: T, h: T) -> Result<Matrix<T>> {
    check_step(h)?;
    let plus = family.evaluate(phi + h)?;
    let minus = family.evaluate(phi - h)?;
    if plus.dim() != minus.dim() {
        return Err(Error::Argument("family changed dimension".into()));
    }
    Ok((plus.matrix() - minus.matrix()).scale_real(T::one() / (h + h)))
}

fn braket<T: Real>(a: &[Complex<T>], m: &Matrix<T>, b: &[Complex<T>]) -> Complex<T> {
    let mb = m.apply(b);
    a.iter().zip(&mb).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

fn clamped_eigenvalues<T: Real>(eig: &EigenDecomposition<T>) -> Vec<T> {
    eig.eigenvalues.iter().map(|&l| l.max(T::zero())).collect()
}

/// SLD in the eigenbasis of `rho`:
/// `L = sum_{m,n: lm+ln > eps} 2 <m|drho|n> / (lm + ln) |m><n|`.
pub fn sld_operator<T: Real>(rho: &DensityMatrix<T>, drho: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = hermitian_eig(rho.matrix())?;
    let lam = clamped_eigenvalues(&eig);
    let n = lam.len();
    let cut = T::lit(SUPPORT_CUTOFF);
    let vecs: Vec<_> = (0..n).map(|k| eig.vector(k)).collect();
    let mut l = Matrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let s = lam[a] + lam[b];
            if s <= cut {
                continue;
            }
            let coeff = braket(&vecs[a], drho, &vecs[b]) * (T::lit(2.0) / s);
            l = &l + &Matrix::outer(&vecs[a], &vecs[b]).scale(coeff);
        }
    }
    Ok(l)
}

/// `F = sum_{m,n: lm+ln > eps} 2 |<m|drho|n>|^2 / (lm + ln)` with `drho` by central difference.
pub fn qfi_sld<T: Real>(family: &impl StateFamily<T>, phi: T, h: T) -> Result<QfiEstimate<T>> {
    let rho = family.evaluate(phi)?;
    let drho = d_rho(family, phi, h)?;
    let value = qfi_sld_from(&rho, &drho)?;
    Ok(QfiEstimate::clamped(value, Method::Sld, h))
}

/// The SLD sum for an explicitly supplied derivative.
pub fn qfi_sld_from<T: Real>(rho: &DensityMatrix<T>, drho: &Matrix<T>) -> Result<T> {
    let eig = hermitian_eig(rho.matrix())?;
    let lam = clamped_eigenvalues(&eig);
    let cut = T::lit(SUPPORT_CUTOFF);
    let vecs: Vec<_> = (0..lam.len()).map(|k| eig.vector(k)).collect();
    let mut f = T::zero();
    for a in 0..lam.len() {
        for b in 0..lam.len() {
            let s = lam[a] + lam[b];
            if s > cut {
                f = f + T::lit(2.0) * braket(&vecs[a], drho, &vecs[b]).norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

/// Eigenpairs of `rho(phi + h)` re-indexed and re-phased to follow those of `rho(phi)`.
fn track(
    reference: &[Vec<Complex<f64>>],
    support: &[usize],
    shifted: &EigenDecomposition<f64>,
    phi: f64,
) -> Result<(Vec<f64>, Vec<Vec<Complex<f64>>>)> {
    let n = shifted.eigenvalues.len();
    let candidates: Vec<_> = (0..n).map(|k| shifted.vector(k)).collect();
    let mut used = vec![false; n];
    let mut lams = Vec::with_capacity(support.len());
    let mut vecs = Vec::with_capacity(support.len());
    for &k in support {
        let (best, overlap) = candidates
            .iter()
            .enumerate()
            .map(|(j, v)| (j, inner(&reference[k], v)))
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty spectrum");
        if used[best] || overlap.norm() < TRACKING_OVERLAP {
            return Err(Error::Crossing { phi });
        }
        used[best] = true;
        let phase = overlap.conj() / overlap.norm();
        lams.push(shifted.eigenvalues[best].max(0.0));
        vecs.push(candidates[best].iter().map(|z| z * phase).collect());
    }
    Ok((lams, vecs))
}

/// Spectral form: `sum (dl)^2 / l + sum l F_n - sum_{n != m} 8 l_n l_m / (l_n + l_m) |<psi_n|d psi_m>|^2`,
/// where `F_n = 4 (<d psi_n|d psi_n> - |<psi_n|d psi_n>|^2)`.
///
/// Eigenvalue and eigenvector derivatives come from central differences after
/// matching eigenvectors at `phi +- h` to those at `phi` by maximal overlap.
/// Only the support (eigenvalues above the cutoff) takes part. Computed in
/// double precision regardless of `T`.
pub fn qfi_spectral<T: Real>(family: &impl StateFamily<T>, phi: T, h: T) -> Result<QfiEstimate<T>> {
    check_step(h)?;
    let to64 = |m: &Matrix<T>| -> Result<Matrix<f64>> {
        Matrix::from_vec(
            m.rows(),
            m.cols(),
            m.as_slice().iter().map(|z| Complex::new(z.re.as_f64(), z.im.as_f64())).collect(),
        )
    };
    let center = hermitian_eig(&to64(family.evaluate(phi)?.matrix())?)?;
    let plus = hermitian_eig(&to64(family.evaluate(phi + h)?.matrix())?)?;
    let minus = hermitian_eig(&to64(family.evaluate(phi - h)?.matrix())?)?;
    let n = center.eigenvalues.len();
    let lam: Vec<f64> = clamped_eigenvalues(&center);
    let support: Vec<usize> = (0..n).filter(|&k| lam[k] > SUPPORT_CUTOFF).collect();
    let reference: Vec<_> = (0..n).map(|k| center.vector(k)).collect();

    let phi64 = phi.as_f64();
    let h64 = h.as_f64();
    let (lp, vp) = track(&reference, &support, &plus, phi64)?;
    let (lm, vm) = track(&reference, &support, &minus, phi64)?;

    let mut eigen_term = 0.0;
    let mut pure_term = 0.0;
    let mut dpsi = Vec::with_capacity(support.len());
    for (i, &k) in support.iter().enumerate() {
        let dl = (lp[i] - lm[i]) / (2.0 * h64);
        eigen_term += dl * dl / lam[k];
        let d: Vec<Complex<f64>> = vp[i].iter().zip(&vm[i]).map(|(a, b)| (a - b) / (2.0 * h64)).collect();
        let f_n = 4.0 * (inner(&d, &d).re - inner(&reference[k], &d).norm_sqr());
        pure_term += lam[k] * f_n;
        dpsi.push(d);
    }
    let mut mixing = 0.0;
    for (i, &a) in support.iter().enumerate() {
        for (j, &b) in support.iter().enumerate() {
            if i != j {
                mixing += 8.0 * lam[a] * lam[b] / (lam[a] + lam[b]) * inner(&reference[a], &dpsi[j]).norm_sqr();
            }
        }
    }
    let value = T::lit(eigen_term + pure_term - mixing);
    Ok(QfiEstimate::clamped(value, Method::Spectral, h))
}

/// Bloch-vector form for one qubit: `|dr|^2 + (r.dr)^2 / (1 - |r|^2)` inside
/// the ball and `|dr|^2` on the surface.
pub fn qfi_bloch<T: Real>(r: &BlochVector<T>, dr: &BlochVector<T>) -> Result<QfiEstimate<T>> {
    let norm = r.norm();
    if norm > T::one() + T::tol(1e-9) {
        return Err(Error::InvalidBloch { norm: norm.as_f64() });
    }
    let mut value = dr.norm_sqr();
    if norm < T::one() - T::tol(1e-9) {
        let proj = r.dot(dr);
        value = value + proj * proj / (T::one() - r.norm_sqr());
    }
    Ok(QfiEstimate::clamped(value, Method::Bloch, T::zero()))
}

/// Bloch vector of a single-qubit family and its central-difference derivative.
pub fn bloch_derivative<T: Real>(
    family: &impl StateFamily<T>,
    phi: T,
    h: T,
) -> Result<(BlochVector<T>, BlochVector<T>)> {
    check_step(h)?;
    let r = bloch_of(&family.evaluate(phi)?, true)?;
    let rp = bloch_of(&family.evaluate(phi + h)?, true)?;
    let rm = bloch_of(&family.evaluate(phi - h)?, true)?;
    let k = T::one() / (h + h);
    let dr = BlochVector::new((rp.rx - rm.rx) * k, (rp.ry - rm.ry) * k, (rp.rz - rm.rz) * k);
    Ok((r, dr))
}

/// [`qfi_bloch`] with the derivative taken by central difference.
pub fn qfi_bloch_family<T: Real>(family: &impl StateFamily<T>, phi: T, h: T) -> Result<QfiEstimate<T>> {
    let (r, dr) = bloch_derivative(family, phi, h)?;
    let mut est = qfi_bloch(&r, &dr)?;
    est.step = h;
    Ok(est)
}
