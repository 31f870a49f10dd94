//! Structured comparison of the simulator against the closed forms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Axis, GridSpec, Param};
use super::optimize::{optimize_pr_numeric, Objective};
use crate::error::{Error, Result};
use crate::formulas;
use crate::qfi::qfi_sld;
use crate::quantum::{bloch_of, BlochVector};
use crate::teleport::{output_family, paper_prediction, resolve_policy, simulate, Placement, PrPolicy, Scheme, SchemeConfig};

/// Quantities a report tracks. Each deviation is a non-negative number per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Largest componentwise Bloch-vector difference.
    Bloch,
    Qfi,
    /// Success probability at the published optimal strength.
    Success,
    /// Success probability at the grid strength against half the published normalization.
    Norm,
    /// Sine of the angle between the (x, z) projections; blind to the normalization.
    RatioXz,
    /// Same for the (y, z) projections.
    RatioYz,
    /// Distance between the unit Bloch directions.
    Direction,
    /// Numerically optimal strength against the published one (opt-in).
    PrOpt,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::Bloch,
        Quantity::Qfi,
        Quantity::Success,
        Quantity::Norm,
        Quantity::RatioXz,
        Quantity::RatioYz,
        Quantity::Direction,
        Quantity::PrOpt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Bloch => "bloch",
            Quantity::Qfi => "qfi",
            Quantity::Success => "success",
            Quantity::Norm => "norm",
            Quantity::RatioXz => "ratio_xz",
            Quantity::RatioYz => "ratio_yz",
            Quantity::Direction => "direction",
            Quantity::PrOpt => "pr_opt",
        }
    }

    fn description(self) -> &'static str {
        match self {
            Quantity::Bloch => "max |r_sim - r_paper| over components",
            Quantity::Qfi => "|F_sim - F_paper|, SLD estimator on the simulated family",
            Quantity::Success => "|P_sim - P_paper| at the published optimal p_r",
            Quantity::Norm => "|P_sim - N/2| at the grid p_r",
            Quantity::RatioXz => "|sin| of the angle between (rx, rz) projections",
            Quantity::RatioYz => "|sin| of the angle between (ry, rz) projections",
            Quantity::Direction => "|r_sim/|r_sim| - r_paper/|r_paper||",
            Quantity::PrOpt => "|p_r numeric (simulation) - p_r published|",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s.trim())
            .ok_or_else(|| Error::Argument(format!("unknown quantity '{s}'")))
    }
}

/// Asserted tolerances; quantities not listed are reported only.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Tolerances(pub BTreeMap<Quantity, f64>);

impl Tolerances {
    pub fn get(&self, q: Quantity) -> Option<f64> {
        self.0.get(&q).copied()
    }

    pub fn with(mut self, q: Quantity, tol: f64) -> Self {
        self.0.insert(q, tol);
        self
    }
}

impl FromStr for Tolerances {
    type Err = Error;

    /// `bloch=1e-8,qfi=1e-8`.
    fn from_str(s: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (q, t) = part
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("assertion '{part}' is not QUANTITY=TOL")))?;
            let tol: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::Argument(format!("tolerance '{t}' is not a number")))?;
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::Argument(format!("tolerance for {q} must be finite and non-negative")));
            }
            map.insert(q.parse()?, tol);
        }
        Ok(Tolerances(map))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Also run the numeric optimizer at every point (slow).
    pub optimize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxPoint {
    pub index: usize,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityRecord {
    pub quantity: Quantity,
    pub description: String,
    /// Grid points where the quantity is defined.
    pub count: usize,
    pub max_abs_dev: f64,
    pub mean_abs_dev: f64,
    /// First point (row-major) attaining the maximum.
    pub argmax: Option<ArgmaxPoint>,
    pub tolerance: Option<f64>,
    /// `None` when not asserted.
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub values: BTreeMap<String, f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<Param, f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub scheme: Scheme,
    pub placement: Placement,
    pub pr_policy: PrPolicy,
    pub grid: GridSummary,
    pub quantities: Vec<QuantityRecord>,
    pub failures: Vec<PointFailure>,
    /// All asserted quantities within tolerance and no failed points.
    pub passed: bool,
    pub notes: Vec<String>,
}

impl DiscrepancyReport {
    pub fn record(&self, q: Quantity) -> Option<&QuantityRecord> {
        self.quantities.iter().find(|r| r.quantity == q)
    }
}

type Sample = BTreeMap<Quantity, f64>;

/// Sine of the angle between two plane vectors, zero if either vanishes.
fn planar_sine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let na = a.0.hypot(a.1);
    let nb = b.0.hypot(b.1);
    if na < 1e-300 || nb < 1e-300 {
        0.0
    } else {
        (a.0 * b.1 - a.1 * b.0).abs() / (na * nb)
    }
}

fn direction_gap(a: &BlochVector<f64>, b: &BlochVector<f64>) -> Option<f64> {
    let (na, nb) = (a.norm(), b.norm());
    if na < 1e-12 || nb < 1e-12 {
        return None;
    }
    let d: f64 = a.components().iter().zip(b.components()).map(|(x, y)| (x / na - y / nb).powi(2)).sum();
    Some(d.sqrt())
}

fn published_success(cfg: &SchemeConfig<f64>) -> Option<f64> {
    match cfg.scheme {
        Scheme::Ad => Some(1.0),
        Scheme::A => Some(formulas::scheme_a_probabilities(cfg.gamma2).p_qfi),
        Scheme::B => Some(formulas::scheme_b_probabilities(cfg.gamma2, cfg.p2).p_qfi),
        Scheme::TwoSided => None,
    }
}

fn published_pr_opt(cfg: &SchemeConfig<f64>) -> Option<f64> {
    match cfg.scheme {
        Scheme::Ad => None,
        Scheme::A => Some(formulas::scheme_a_optimal(cfg.gamma2).0),
        Scheme::B => Some(formulas::scheme_b_optimal(cfg.gamma2, cfg.p2).0),
        Scheme::TwoSided if cfg.gamma1 == cfg.gamma2 && cfg.p1 == cfg.p2 => {
            Some(formulas::two_sided_symmetric_optimal(cfg.gamma2, cfg.p2).0)
        }
        Scheme::TwoSided => None,
    }
}

fn sample(cfg: &SchemeConfig<f64>, options: ReportOptions) -> Result<Sample> {
    let cfg = resolve_policy(cfg)?;
    let mut out = Sample::new();
    let sim = simulate(&cfg)?;
    let r_sim = bloch_of(&sim.averaged.state, true)?;
    let qfi_sim = qfi_sld(&output_family(cfg), cfg.phi, 1e-5)?.value;
    let paper = paper_prediction(&cfg)?;
    out.insert(Quantity::Qfi, (qfi_sim - paper.qfi).abs());

    if let Some(pb) = paper.bloch {
        let r_p = pb.vector();
        let comp = r_sim.components().iter().zip(r_p.components()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.insert(Quantity::Bloch, comp);
        out.insert(Quantity::Norm, (sim.averaged.success_probability - pb.normalization / 2.0).abs());
        out.insert(Quantity::RatioXz, planar_sine((r_sim.rx, r_sim.rz), (r_p.rx, r_p.rz)));
        out.insert(Quantity::RatioYz, planar_sine((r_sim.ry, r_sim.rz), (r_p.ry, r_p.rz)));
        if let Some(d) = direction_gap(&r_sim, &r_p) {
            out.insert(Quantity::Direction, d);
        }
    }

    if let Some(p_paper) = published_success(&cfg) {
        let at_opt = if cfg.scheme == Scheme::Ad { cfg } else { resolve_policy(&cfg.policy(PrPolicy::PaperOptimal))? };
        let p_sim = simulate(&at_opt)?.averaged.success_probability;
        out.insert(Quantity::Success, (p_sim - p_paper).abs());
    }

    if options.optimize {
        if let Some(pr) = published_pr_opt(&cfg) {
            let num = optimize_pr_numeric(&cfg, Objective::Simulation)?;
            out.insert(Quantity::PrOpt, (num.x_star - pr).abs());
        }
    }

    for (q, v) in &out {
        if !v.is_finite() {
            return Err(Error::DegenerateRun(format!("{q} deviation is not finite")));
        }
    }
    Ok(out)
}

fn scheme_notes(base: &SchemeConfig<f64>) -> Vec<String> {
    let mut notes = Vec::new();
    match base.scheme {
        Scheme::Ad => notes.push("no published Bloch vector for plain damping; bloch, norm and ratio quantities are absent".into()),
        Scheme::A => {
            notes.push(
                "published normalization is N = 2 - p_r - gamma p_r; the weak measurement diag(1, sqrt(1 - p_r)) \
                 gives 2 - p_r (1 - gamma). Quantities blind to N (ratio_xz, ratio_yz, direction) isolate the numerator."
                    .into(),
            );
            if base.placement == Placement::PostBellPostCorrection {
                notes.push("after the correction the weak measurement no longer commutes through the Pauli frame".into());
            }
        }
        Scheme::B => {}
        Scheme::TwoSided => notes.push("no published success probability for the two-sided scheme".into()),
    }
    notes
}

/// Runs simulation and closed forms at every grid point of `base` and
/// aggregates the deviations. Point-level errors are recorded, not raised.
pub fn compare_paper_vs_sim(
    base: &SchemeConfig<f64>,
    grid: &GridSpec,
    tolerances: &Tolerances,
    options: ReportOptions,
) -> Result<DiscrepancyReport> {
    grid.validate()?;
    if base.pr_policy != PrPolicy::Fixed && (grid.sweeps(Param::Pr) || grid.sweeps(Param::Pr2)) {
        return Err(Error::Config("a swept p_r axis needs the fixed policy".into()));
    }
    let points: Vec<_> = grid.points().collect();
    let samples: Vec<Result<Sample>> =
        points.par_iter().map(|pt| sample(&grid.config_at(base, pt), options)).collect();

    let mut failures = Vec::new();
    let mut acc: BTreeMap<Quantity, (usize, f64, f64, Option<usize>)> = BTreeMap::new();
    for (pt, s) in points.iter().zip(samples) {
        match s {
            Ok(s) => {
                for (q, v) in s {
                    let e = acc.entry(q).or_insert((0, 0.0, 0.0, None));
                    e.0 += 1;
                    e.1 += v;
                    if e.3.is_none() || v > e.2 {
                        e.2 = v;
                        e.3 = Some(pt.index);
                    }
                }
            }
            Err(e) => failures.push(PointFailure { index: pt.index, values: grid.labelled(pt), message: e.to_string() }),
        }
    }

    let mut quantities = Vec::new();
    let mut passed = true;
    for q in Quantity::ALL {
        let tolerance = tolerances.get(q);
        let (count, sum, max, arg) = acc.get(&q).copied().unwrap_or((0, 0.0, 0.0, None));
        if count == 0 && tolerance.is_none() {
            continue;
        }
        let ok = tolerance.map(|t| count > 0 && max <= t && failures.is_empty());
        passed &= ok.unwrap_or(true);
        quantities.push(QuantityRecord {
            quantity: q,
            description: q.description().into(),
            count,
            max_abs_dev: max,
            mean_abs_dev: if count > 0 { sum / count as f64 } else { 0.0 },
            argmax: arg.map(|i| ArgmaxPoint { index: i, values: grid.labelled(&grid.point(i)) }),
            tolerance,
            passed: ok,
        });
    }

    let mut notes = scheme_notes(base);
    for (q, _) in &tolerances.0 {
        if !acc.contains_key(q) {
            notes.push(format!("asserted quantity {q} is not defined for this scheme"));
        }
    }
    Ok(DiscrepancyReport {
        scheme: base.scheme,
        placement: base.placement,
        pr_policy: base.pr_policy,
        grid: GridSummary { axes: grid.axes.clone(), fixed: grid.fixed.clone(), points: grid.len() },
        quantities,
        failures,
        passed,
        notes,
    })
}
