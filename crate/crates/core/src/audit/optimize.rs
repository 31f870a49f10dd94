//! Golden-section maximization and the numeric search for the best reversal
//! strength.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas;
use crate::qfi::qfi_sld;
use crate::scalar::Real;
use crate::teleport::{output_family, PrPolicy, Scheme, SchemeConfig};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 200;
/// Points in the multimodality scan.
pub const SANITY_POINTS: usize = 11;
/// Upper end of the strength search; `p_r = 1` is a zero-success corner.
pub const PR_MAX: f64 = 1.0 - 1e-9;
/// Spacing of the coarse scan that precedes refinement of simulated objectives.
pub const SCAN_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult<T> {
    pub x_star: T,
    pub f_star: T,
    /// Objective evaluations spent bracketing (scan points included).
    pub iterations: usize,
    pub bracket_width: T,
    /// Set when the sanity scan found a point above `f_star`.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// The closed-form QFI.
    PaperFormula,
    /// The SLD estimate on the simulated output family.
    Simulation,
}

/// [`try_golden_section_max`] for an infallible objective.
pub fn golden_section_max<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> Result<OptResult<T>> {
    try_golden_section_max(|x| Ok(f(x)), lo, hi, tol)
}

/// Maximizes `f` on `[lo, hi]` assuming unimodality. Stops once the bracket
/// is no wider than `tol` or after [`MAX_ITERATIONS`] reductions. An
/// 11-point scan of `[lo, hi]` afterwards attaches a warning if it finds a
/// larger value; the result is returned either way.
pub fn try_golden_section_max<T: Real>(
    f: impl Fn(T) -> Result<T>,
    lo: T,
    hi: T,
    tol: T,
) -> Result<OptResult<T>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Argument(format!("empty bracket [{}, {}]", lo.as_f64(), hi.as_f64())));
    }
    if !(tol > T::zero()) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let eval = |x: T| -> Result<T> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("objective is not finite at x={}", x.as_f64())))
        }
    };
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    let mut iterations = 0;
    while b - a > tol && iterations < MAX_ITERATIONS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
        iterations += 1;
    }
    let x_star = ((a + b) / T::lit(2.0)).max(lo).min(hi);
    let f_star = eval(x_star)?;

    let slack = T::tol(1e-12) * (T::one() + f_star.abs());
    let steps = T::lit((SANITY_POINTS - 1) as f64);
    let mut warning = None;
    for i in 0..SANITY_POINTS {
        let x = lo + (hi - lo) * T::lit(i as f64) / steps;
        let v = eval(x)?;
        if v > f_star + slack {
            warning = Some(format!(
                "objective may be multimodal: f({}) = {} exceeds f_star = {}",
                x.as_f64(),
                v.as_f64(),
                f_star.as_f64()
            ));
            break;
        }
    }
    Ok(OptResult { x_star, f_star, iterations, bracket_width: b - a, warning })
}

/// Configuration with the shared strength `pr` installed: Bob's side for the
/// one-sided schemes, both sides for the two-sided one.
fn with_pr<T: Real>(cfg: &SchemeConfig<T>, pr: T) -> SchemeConfig<T> {
    let mut c = cfg.policy(PrPolicy::Fixed);
    match cfg.scheme {
        Scheme::TwoSided => c = c.pr(pr),
        _ => c.pr2 = pr,
    }
    c
}

fn paper_qfi<T: Real>(cfg: &SchemeConfig<T>) -> Result<T> {
    Ok(match cfg.scheme {
        Scheme::Ad => formulas::f_ad(cfg.theta, cfg.gamma2),
        Scheme::A => formulas::scheme_a(cfg.theta, cfg.phi, cfg.gamma2, cfg.pr2)?.1,
        Scheme::B => formulas::scheme_b(cfg.theta, cfg.phi, cfg.gamma2, cfg.p2, cfg.pr2)?.1,
        Scheme::TwoSided => formulas::two_sided(cfg.theta, cfg.phi, &cfg.two_sided_params())?.1,
    })
}

fn simulated_qfi<T: Real>(cfg: &SchemeConfig<T>) -> Result<T> {
    qfi_sld(&output_family(*cfg), cfg.phi, T::fd_step())
        .map(|e| e.value)
        .map_err(|e| match e {
            Error::DegenerateRun(msg) => Error::DegenerateRun(format!("{msg} at p_r = {}", cfg.pr2.as_f64())),
            other => other,
        })
}

/// Maximizes the teleported QFI over `p_r` in `[0, 1 - 1e-9]`. The two-sided
/// scheme sweeps one strength shared by both sides.
///
/// The paper objective goes straight to golden-section search. The simulated
/// one is scanned at [`SCAN_RESOLUTION`] first and the best cell refined, so a
/// boundary optimum is found as reliably as an interior one.
pub fn optimize_pr_numeric<T: Real>(cfg: &SchemeConfig<T>, objective: Objective) -> Result<OptResult<T>> {
    if cfg.scheme == Scheme::Ad {
        return Err(Error::Config("scheme ad has no measurement strength to optimize".into()));
    }
    with_pr(cfg, T::zero()).validate()?;
    let lo = T::zero();
    let hi = T::lit(PR_MAX);
    let tol = T::tol(DEFAULT_TOL);
    match objective {
        Objective::PaperFormula => try_golden_section_max(|pr| paper_qfi(&with_pr(cfg, pr)), lo, hi, tol),
        Objective::Simulation => {
            let n = (PR_MAX / SCAN_RESOLUTION).ceil() as usize;
            let xs: Vec<T> = (0..=n).map(|i| (T::lit(i as f64 * SCAN_RESOLUTION)).min(hi)).collect();
            let values: Vec<Result<T>> = xs.par_iter().map(|&x| simulated_qfi(&with_pr(cfg, x))).collect();
            let mut best = 0;
            let mut best_value = T::neg_infinity();
            for (i, v) in values.into_iter().enumerate() {
                let v = v?;
                if v > best_value {
                    best = i;
                    best_value = v;
                }
            }
            let step = T::lit(SCAN_RESOLUTION);
            let a = (xs[best] - step).max(lo);
            let b = (xs[best] + step).min(hi);
            let mut refined = try_golden_section_max(|pr| simulated_qfi(&with_pr(cfg, pr)), a, b, tol)?;
            refined.iterations += xs.len();
            if refined.f_star < best_value {
                refined.x_star = xs[best];
                refined.f_star = best_value;
            }
            Ok(refined)
        }
    }
}

/// Brute-force scan of the closed-form two-sided QFI over independent
/// `(p_r1, p_r2)` on a `steps x steps` grid of `[0, 1 - 1e-9]^2`. Returns the
/// best grid point and its value; not a certified optimizer.
pub fn scan_two_sided_pr<T: Real>(cfg: &SchemeConfig<T>, steps: usize) -> Result<(T, T, T)> {
    if cfg.scheme != Scheme::TwoSided || steps < 2 {
        return Err(Error::Argument("two-sided scan needs the two-sided scheme and at least 2 steps".into()));
    }
    let hi = T::lit(PR_MAX);
    let at = |i: usize| hi * T::lit(i as f64) / T::lit((steps - 1) as f64);
    let mut best = (T::zero(), T::zero(), T::neg_infinity());
    for i in 0..steps {
        for j in 0..steps {
            let mut c = cfg.policy(PrPolicy::Fixed);
            c.pr1 = at(i);
            c.pr2 = at(j);
            let v = paper_qfi(&c)?;
            if v > best.2 {
                best = (c.pr1, c.pr2, v);
            }
        }
    }
    Ok(best)
}
