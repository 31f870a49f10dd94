//! Closed-form Bloch vectors, QFI values, optimal strengths and success
//! probabilities for the protocols, written exactly as they are published.
//!
//! Nothing here is corrected to agree with the simulator; `audit` measures
//! the gap. Bars denote complements, e.g. `gb = 1 - gamma`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complexalg::Matrix;
use crate::error::{Error, Result};
use crate::quantum::{BlochVector, DensityMatrix};
use crate::scalar::Real;

/// A published Bloch vector together with the normalization factor it divides by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperBloch<T> {
    pub rx: T,
    pub ry: T,
    pub rz: T,
    pub normalization: T,
}

impl<T: Real> PaperBloch<T> {
    pub fn vector(&self) -> BlochVector<T> {
        BlochVector::new(self.rx, self.ry, self.rz)
    }
}

/// Success probabilities of the QFI protocol and of the fidelity protocol it is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probabilities<T> {
    pub p_qfi: T,
    pub p_fid: T,
    pub p_imp: T,
}

/// Concurrences of the damped resource and of the post-measured resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concurrences<T> {
    pub c_ad: T,
    pub c_a: T,
    pub c_a_opt: T,
    pub ratio: T,
}

fn bar<T: Real>(x: T) -> T {
    T::one() - x
}

fn sin2<T: Real>(theta: T) -> T {
    let s = theta.sin();
    s * s
}

fn positive_normalization<T: Real>(name: &str, n: T) -> Result<T> {
    if n > T::zero() {
        Ok(n)
    } else {
        Err(Error::Domain(format!("normalization {name} = {} is not positive", n.as_f64())))
    }
}

fn unit<T: Real>(name: &str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {} outside [0, 1]", x.as_f64())))
    }
}

/// QFI teleported through a damped resource: `sin^2(theta) (1 - gamma)`.
pub fn f_ad<T: Real>(theta: T, gamma: T) -> T {
    sin2(theta) * bar(gamma)
}

/// Post-measurement scheme: Bloch vector with `N = 2 - p_r - gamma p_r` and
/// QFI `4 sin^2(theta) (1-p_r)(1-gamma) / N^2`.
pub fn scheme_a<T: Real>(theta: T, phi: T, gamma: T, pr: T) -> Result<(PaperBloch<T>, T)> {
    unit("gamma", gamma)?;
    unit("p_r", pr)?;
    let two = T::lit(2.0);
    let n = positive_normalization("N^A", two - pr - gamma * pr)?;
    let amp = (bar(pr) * bar(gamma)).sqrt();
    let bloch = PaperBloch {
        rx: two * theta.sin() * phi.cos() / n * amp,
        ry: two * theta.sin() * phi.sin() / n * amp,
        rz: theta.cos() / n * (T::one() + bar(pr)) * bar(gamma),
        normalization: n,
    };
    let qfi = T::lit(4.0) * sin2(theta) * bar(pr) * bar(gamma) / (n * n);
    Ok((bloch, qfi))
}

/// `(2 gamma / (1 + gamma), 1 / (1 + gamma))`; the QFI is the coefficient of `sin^2(theta)`.
pub fn scheme_a_optimal<T: Real>(gamma: T) -> (T, T) {
    let two = T::lit(2.0);
    (two * gamma / (T::one() + gamma), T::one() / (T::one() + gamma))
}

pub fn scheme_a_probabilities<T: Real>(gamma: T) -> Probabilities<T> {
    let two = T::lit(2.0);
    let p_qfi = bar(gamma);
    let p_fid = T::one() - gamma * (T::lit(3.0) + gamma) / (two * (T::one() + gamma));
    let p_imp = gamma * bar(gamma) / (two * (T::one() + gamma));
    Probabilities { p_qfi, p_fid, p_imp }
}

/// Gain of the optimally post-measured scheme over plain damping.
pub fn f_imp_a<T: Real>(theta: T, gamma: T) -> T {
    sin2(theta) * scheme_a_optimal(gamma).1 - f_ad(theta, gamma)
}

/// Prior measurement plus reversal: `N = pb_r + pb gb + pb gamma pb_r`.
pub fn scheme_b<T: Real>(theta: T, phi: T, gamma: T, p: T, pr: T) -> Result<(PaperBloch<T>, T)> {
    unit("gamma", gamma)?;
    unit("p", p)?;
    unit("p_r", pr)?;
    let two = T::lit(2.0);
    let (gb, pb, prb) = (bar(gamma), bar(p), bar(pr));
    let n = positive_normalization("N^B", prb + pb * gb + pb * gamma * prb)?;
    let amp = (pb * prb * gb).sqrt();
    let bloch = PaperBloch {
        rx: two * theta.sin() * phi.cos() / n * amp,
        ry: two * theta.sin() * phi.sin() / n * amp,
        rz: theta.cos() / n * (prb * gb + pb * gb + p * gamma * prb),
        normalization: n,
    };
    let qfi = T::lit(4.0) * sin2(theta) * pb * prb * gb / (n * n);
    Ok((bloch, qfi))
}

/// `(1 - pb gb / (1 + pb gamma), 1 / (1 + pb gamma))`.
pub fn scheme_b_optimal<T: Real>(gamma: T, p: T) -> (T, T) {
    let (gb, pb) = (bar(gamma), bar(p));
    let denom = T::one() + pb * gamma;
    (T::one() - pb * gb / denom, T::one() / denom)
}

pub fn scheme_b_probabilities<T: Real>(gamma: T, p: T) -> Probabilities<T> {
    let two = T::lit(2.0);
    let (gb, pb) = (bar(gamma), bar(p));
    let p_qfi = pb * gb;
    let p_fid = gb * pb * (two + gamma * pb) / (two * (T::one() + gamma * pb));
    Probabilities { p_qfi, p_fid, p_imp: p_qfi - p_fid }
}

/// Strengths and damping on both halves of the resource; index 1 is the
/// qubit Alice keeps, index 2 the one sent to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedParams<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub p1: T,
    pub p2: T,
    pub pr1: T,
    pub pr2: T,
}

pub fn two_sided<T: Real>(theta: T, phi: T, q: &TwoSidedParams<T>) -> Result<(PaperBloch<T>, T)> {
    for (name, v) in [("gamma1", q.gamma1), ("gamma2", q.gamma2), ("p1", q.p1), ("p2", q.p2), ("p_r1", q.pr1), ("p_r2", q.pr2)] {
        unit(name, v)?;
    }
    let two = T::lit(2.0);
    let (g1, g2) = (q.gamma1, q.gamma2);
    let (gb1, gb2) = (bar(g1), bar(g2));
    let pp = bar(q.p1) * bar(q.p2);
    let (prb1, prb2) = (bar(q.pr1), bar(q.pr2));

    let common = prb1 * prb2 + pp * prb1 * prb2 * g1 * g2 + pp * gb1 * gb2;
    let cross = pp * (g1 * gb2 * prb1 + gb1 * g2 * prb2);
    let n = positive_normalization("N", common + cross)?;
    let amp_sq = pp * gb1 * gb2 * prb1 * prb2;
    let amp = amp_sq.sqrt();
    let bloch = PaperBloch {
        rx: two * theta.sin() * phi.cos() / n * amp,
        ry: two * theta.sin() * phi.sin() / n * amp,
        rz: theta.cos() / n * (common - cross),
        normalization: n,
    };
    let qfi = T::lit(4.0) * sin2(theta) * amp_sq / (n * n);
    Ok((bloch, qfi))
}

/// Symmetric two-sided optimum: `p_r = 1 - pb gb / sqrt(1 + pb^2 gamma^2)` and
/// QFI coefficient `1 / (sqrt(1 + pb^2 gamma^2) + pb gamma)^2`.
pub fn two_sided_symmetric_optimal<T: Real>(gamma: T, p: T) -> (T, T) {
    let (gb, pb) = (bar(gamma), bar(p));
    let root = (T::one() + pb * pb * gamma * gamma).sqrt();
    let d = root + pb * gamma;
    (T::one() - pb * gb / root, T::one() / (d * d))
}

/// `C^AD = sqrt(gb)`, `C^A = 2 sqrt(pb_r gb) / (1 + pb_r)`, the optimum
/// `gb sqrt(1 + gamma)` and their ratio `sqrt(1 - gamma^2)`.
pub fn concurrence_formulas<T: Real>(gamma: T, pr: T) -> Concurrences<T> {
    let two = T::lit(2.0);
    let gb = bar(gamma);
    let prb = bar(pr);
    Concurrences {
        c_ad: gb.sqrt(),
        c_a: two * (prb * gb).sqrt() / (T::one() + prb),
        c_a_opt: gb * (T::one() + gamma).sqrt(),
        ratio: (T::one() - gamma * gamma).sqrt(),
    }
}

fn x_state<T: Real>(diag: [T; 4], coherence: T) -> Result<DensityMatrix<T>> {
    let mut m = Matrix::diag_real(&diag);
    m[(0, 3)] = Complex::new(coherence, T::zero());
    m[(3, 0)] = Complex::new(coherence, T::zero());
    DensityMatrix::new(m)
}

/// The damped resource as printed:
/// `(|00><00| + gamma|10><10| + gb|11><11| + sqrt(gb)(|00><11| + h.c.)) / 2`.
pub fn paper_rho_ad<T: Real>(gamma: T) -> Result<DensityMatrix<T>> {
    unit("gamma", gamma)?;
    let h = T::lit(0.5);
    let gb = bar(gamma);
    x_state([h, T::zero(), h * gamma, h * gb], h * gb.sqrt())
}

/// The post-measured resource as printed, prefactor `2 / (1 + pb_r)` included
/// (its trace is therefore 2, not 1).
pub fn paper_rho_a<T: Real>(gamma: T, pr: T) -> Result<DensityMatrix<T>> {
    unit("gamma", gamma)?;
    unit("p_r", pr)?;
    let gb = bar(gamma);
    let prb = bar(pr);
    let k = T::lit(2.0) / (T::one() + prb);
    x_state([k, T::zero(), k * prb * gamma, k * prb * gb], k * (prb * gb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    const HALF_PI: f64 = FRAC_PI_2;

    fn grid(n: usize) -> impl Iterator<Item = f64> + Clone {
        (0..n).map(move |i| i as f64 / (n - 1) as f64)
    }

    #[test]
    fn f_ad_values() {
        assert_abs_diff_eq!(f_ad(HALF_PI, 0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f_ad(HALF_PI, 0.0), 1.0, epsilon = 1e-15);
        assert_eq!(f_ad(0.0, 0.3), 0.0);
    }

    #[test]
    fn scheme_a_values() {
        let (b, q) = scheme_a(HALF_PI, 0.0, 0.5, 2.0 / 3.0).unwrap();
        assert_abs_diff_eq!(b.rx, (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.ry, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.rz, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q, 2.0 / 3.0, epsilon = 1e-12);
        for theta in [0.3, 1.0, 2.5] {
            for gamma in grid(7) {
                assert_abs_diff_eq!(scheme_a(theta, 0.2, gamma, 0.0).unwrap().1, f_ad(theta, gamma), epsilon = 1e-15);
            }
            assert_abs_diff_eq!(scheme_a(theta, 0.2, 0.0, 0.0).unwrap().1, theta.sin().powi(2), epsilon = 1e-15);
        }
        assert!(matches!(scheme_a(1.0, 0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(scheme_a(1.0, 0.0, 1.2, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn scheme_a_optimum_and_probabilities() {
        let (pr, q) = scheme_a_optimal(0.5);
        assert_abs_diff_eq!(pr, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(scheme_a_optimal(0.0), (0.0, 1.0));
        assert_eq!(scheme_a_optimal(1.0), (1.0, 0.5));

        assert_abs_diff_eq!(scheme_a_probabilities(0.25).p_qfi, 0.75, epsilon = 1e-15);
        let p = scheme_a_probabilities(0.5);
        assert_abs_diff_eq!(p.p_fid, 5.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p_imp, 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p_qfi - p.p_fid, p.p_imp, epsilon = 1e-15);
        let p = scheme_a_probabilities(0.0);
        assert_eq!((p.p_qfi, p.p_fid, p.p_imp), (1.0, 1.0, 0.0));
    }

    #[test]
    fn f_imp_a_values() {
        assert_abs_diff_eq!(f_imp_a(HALF_PI, 0.5), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f_imp_a(HALF_PI, 1.0), 0.5, epsilon = 1e-15);
        for theta in [0.0, 0.4, 2.0] {
            assert_abs_diff_eq!(f_imp_a(theta, 0.0), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn scheme_b_values() {
        let (b, q) = scheme_b(HALF_PI, 0.0, 0.5, 0.5, 0.8).unwrap();
        assert_abs_diff_eq!(b.normalization, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q, 0.8, epsilon = 1e-12);
        for theta in [0.5, 1.5] {
            for gamma in grid(5) {
                assert_abs_diff_eq!(scheme_b(theta, 1.0, gamma, 0.0, 0.0).unwrap().1, f_ad(theta, gamma), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn scheme_b_with_no_prior_measurement_is_scheme_a() {
        for gamma in grid(20) {
            for pr in grid(20) {
                let a = scheme_a(1.1, 0.3, gamma, pr);
                let b = scheme_b(1.1, 0.3, gamma, 0.0, pr);
                match (a, b) {
                    (Ok((ba, qa)), Ok((bb, qb))) => {
                        assert_abs_diff_eq!(qa, qb, epsilon = 1e-12);
                        assert_abs_diff_eq!(ba.normalization, bb.normalization, epsilon = 1e-12);
                        assert_abs_diff_eq!(ba.rz, bb.rz, epsilon = 1e-12);
                        assert_abs_diff_eq!(ba.rx, bb.rx, epsilon = 1e-12);
                    }
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!("domains disagree at gamma={gamma}, pr={pr}: {a:?} vs {b:?}"),
                }
            }
        }
    }

    #[test]
    fn scheme_b_optimum_and_probabilities() {
        let (pr, q) = scheme_b_optimal(0.5, 0.5);
        assert_abs_diff_eq!(pr, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(q, 0.8, epsilon = 1e-15);
        for gamma in grid(11) {
            let (pa, qa) = scheme_a_optimal(gamma);
            let (pb, qb) = scheme_b_optimal(gamma, 0.0);
            assert_abs_diff_eq!(pa, pb, epsilon = 1e-15);
            assert_abs_diff_eq!(qa, qb, epsilon = 1e-15);
            assert_abs_diff_eq!(scheme_b_optimal(gamma, 1.0 - 1e-12).1, 1.0, epsilon = 1e-11);
        }

        let p = scheme_b_probabilities(0.5, 0.5);
        assert_abs_diff_eq!(p.p_qfi, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p_fid, 0.225, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p_imp, 0.025, epsilon = 1e-15);
        let p = scheme_b_probabilities(0.0, 0.0);
        assert_eq!((p.p_qfi, p.p_fid, p.p_imp), (1.0, 1.0, 0.0));
        assert_abs_diff_eq!(scheme_b_probabilities(0.3, 1.0 - 1e-12).p_qfi, 0.0, epsilon = 1e-11);
    }

    #[test]
    fn two_sided_values() {
        let sym = |g: f64| TwoSidedParams { gamma1: g, gamma2: g, p1: 0.0, p2: 0.0, pr1: 0.0, pr2: 0.0 };
        let (_, q) = two_sided(HALF_PI, 0.0, &sym(0.5)).unwrap();
        assert_abs_diff_eq!(q, 0.25, epsilon = 1e-15);
        assert_eq!(two_sided(0.0, 0.4, &sym(0.3)).unwrap().1, 0.0);

        for gamma in grid(5) {
            for p in grid(5) {
                for pr in grid(5) {
                    let params = TwoSidedParams { gamma1: 0.0, gamma2: gamma, p1: 0.0, p2: p, pr1: 0.0, pr2: pr };
                    match (two_sided(0.9, 0.6, &params), scheme_b(0.9, 0.6, gamma, p, pr)) {
                        (Ok((a, qa)), Ok((b, qb))) => {
                            assert_abs_diff_eq!(qa, qb, epsilon = 1e-14);
                            assert_abs_diff_eq!(a.rx, b.rx, epsilon = 1e-14);
                            assert_abs_diff_eq!(a.rz, b.rz, epsilon = 1e-14);
                        }
                        (Err(_), Err(_)) => {}
                        (a, b) => panic!("{a:?} vs {b:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn two_sided_symmetric_optimum() {
        let (pr, q) = two_sided_symmetric_optimal(0.5, 0.0);
        assert_abs_diff_eq!(pr, 1.0 - 0.5 / 1.25f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(pr, 0.55279, epsilon = 1e-5);
        assert_abs_diff_eq!(q, 0.38197, epsilon = 1e-5);
        // without damping the reversal just has to match the prior measurement
        let (pr0, q0) = two_sided_symmetric_optimal(0.0, 0.3);
        assert_abs_diff_eq!(pr0, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(q0, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(two_sided_symmetric_optimal(0.7, 1.0 - 1e-12).1, 1.0, epsilon = 1e-11);
        // the closed form really is the maximum of the printed two-sided QFI
        for gamma in [0.2, 0.5, 0.8] {
            for p in [0.0, 0.3, 0.6] {
                let (pr_opt, coeff) = two_sided_symmetric_optimal(gamma, p);
                let at = |pr: f64| {
                    let q = TwoSidedParams { gamma1: gamma, gamma2: gamma, p1: p, p2: p, pr1: pr, pr2: pr };
                    two_sided(HALF_PI, 0.0, &q).unwrap().1
                };
                assert_abs_diff_eq!(at(pr_opt), coeff, epsilon = 1e-12);
                assert!(at(pr_opt) >= at((pr_opt - 0.01).max(0.0)));
                assert!(at(pr_opt) >= at(pr_opt + 0.01));
            }
        }
    }

    #[test]
    fn concurrence_formula_values() {
        assert_abs_diff_eq!(concurrence_formulas(0.19, 0.0).c_ad, 0.9, epsilon = 1e-15);
        let c = concurrence_formulas(0.5, 2.0 / 3.0);
        assert_abs_diff_eq!(c.c_a, c.c_a_opt, epsilon = 1e-15);
        assert_abs_diff_eq!(c.c_a_opt, 0.61237, epsilon = 1e-5);
        assert_abs_diff_eq!(c.ratio, 0.86603, epsilon = 1e-5);
        let c = concurrence_formulas(0.0, 0.0);
        assert_eq!((c.c_ad, c.c_a, c.c_a_opt, c.ratio), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn printed_states() {
        let rho = paper_rho_ad(0.3).unwrap();
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-15);
        let rho = paper_rho_a(0.3, 0.4).unwrap();
        assert_abs_diff_eq!(rho.trace(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn non_negativity_of_improvements() {
        for t in grid(21) {
            let theta = t * PI;
            for gamma in grid(21) {
                assert!(f_imp_a(theta, gamma) >= 0.0);
                assert!(scheme_a_probabilities(gamma).p_imp >= 0.0);
            }
        }
        for p in grid(21).map(|x| x * 0.999) {
            for gamma in grid(21).map(|x| x * 0.999) {
                assert!(scheme_b_probabilities(gamma, p).p_imp >= -1e-12);
            }
        }
    }

    #[test]
    fn scheme_a_optimum_is_a_local_maximum() {
        for gamma in grid(19).skip(1).take(17) {
            let (pr, _) = scheme_a_optimal(gamma);
            let q = |x: f64| scheme_a(HALF_PI, 0.0, gamma, x).unwrap().1;
            assert!(q(pr) >= q(pr - 0.01));
            assert!(q(pr) >= q((pr + 0.01).min(1.0)));
        }
    }

    #[test]
    fn surfaces_are_ordered() {
        for p in grid(21) {
            for gamma in grid(21) {
                let b = scheme_b_optimal(gamma, p).1;
                let a = scheme_a_optimal(gamma).1;
                let ad = f_ad(HALF_PI, gamma);
                assert!(b + 1e-12 >= a && a + 1e-12 >= ad, "p={p} gamma={gamma}");
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let (_, q) = scheme_b(std::f32::consts::FRAC_PI_2, 0.0f32, 0.5, 0.5, 0.8).unwrap();
        assert!((q - 0.8).abs() < 1e-6);
    }
}
