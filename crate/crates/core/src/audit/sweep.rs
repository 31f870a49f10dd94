//! Figure-grid tables: closed-form surfaces and simulated values per grid point.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::formulas;
use crate::qfi::{qfi_bloch_family, qfi_sld, qfi_spectral};
use crate::quantum::{bloch_of, concurrence};
use crate::scalar::Real;
use crate::teleport::{output_family, paper_prediction, resolve_policy, simulate, SchemeConfig};

macro_rules! columns {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// A table column. Closed-form columns name their scheme; `*_sim` and
        /// `*_paper` columns follow the configured scheme.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Column { $($variant),* }

        impl Column {
            pub const ALL: &'static [Column] = &[$(Column::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Column::$variant => $name),* }
            }
        }
    };
}

columns! {
    FAd => "f_ad",
    FA => "f_a",
    FAOpt => "f_a_opt",
    PrAOpt => "pr_a_opt",
    FImpA => "f_imp_a",
    PQfiA => "p_qfi_a",
    PFidA => "p_fid_a",
    PImpA => "p_imp_a",
    FB => "f_b",
    FBOpt => "f_b_opt",
    PrBOpt => "pr_b_opt",
    PQfiB => "p_qfi_b",
    PFidB => "p_fid_b",
    PImpB => "p_imp_b",
    FTwoSided => "f_two_sided",
    FTwoSidedOpt => "f_two_sided_opt",
    PrTwoSidedOpt => "pr_two_sided_opt",
    CAd => "c_ad",
    CA => "c_a",
    CAOpt => "c_a_opt",
    PrUsed => "pr_used",
    QfiSim => "qfi_sim",
    QfiSpectral => "qfi_spectral",
    QfiBloch => "qfi_bloch",
    SuccessSim => "success_sim",
    RxSim => "rx_sim",
    RySim => "ry_sim",
    RzSim => "rz_sim",
    ConcurrenceSim => "concurrence_sim",
    QfiPaper => "qfi_paper",
    RxPaper => "rx_paper",
    RyPaper => "ry_paper",
    RzPaper => "rz_paper",
    NormPaper => "norm_paper",
}

impl Column {
    /// Needs the circuit simulation rather than closed forms alone.
    pub fn is_simulated(self) -> bool {
        self >= Column::PrUsed
    }

    fn uses_circuit(self) -> bool {
        (Column::PrUsed..=Column::ConcurrenceSim).contains(&self) && !matches!(self, Column::QfiSpectral | Column::QfiBloch)
    }

    /// Parses `f_ad,f_a_opt,...`.
    pub fn parse_list(s: &str) -> Result<Vec<Column>> {
        let cols = s
            .split(',')
            .filter(|c| !c.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Column>>>()?;
        if cols.is_empty() {
            return Err(Error::Argument("no columns requested".into()));
        }
        Ok(cols)
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Column::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Argument(format!("unknown column '{}'", s.trim())))
    }
}

/// Row-major table: swept axis values first, then the requested columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// CSV with LF line endings and every number as `{:.16e}`.
    pub fn write_csv(&self, w: impl Write) -> std::io::Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| crate::cli::format_number(*v)))?;
        }
        out.flush()
    }
}

fn sin2(theta: f64) -> f64 {
    theta.sin().powi(2)
}

/// Lazily simulated values shared by the simulated columns of one row.
struct Simulated {
    pr_used: f64,
    qfi: f64,
    success: f64,
    bloch: [f64; 3],
    concurrence: f64,
}

fn simulate_row(cfg: SchemeConfig<f64>) -> Result<Simulated> {
    let sim = simulate(&cfg)?;
    let qfi = qfi_sld(&output_family(cfg), cfg.phi, f64::fd_step())?.value;
    Ok(Simulated {
        pr_used: cfg.pr2,
        qfi,
        success: sim.averaged.success_probability,
        bloch: bloch_of(&sim.averaged.state, true)?.components(),
        concurrence: concurrence(&sim.resource.normalize()?)?,
    })
}

fn row(cfg: &SchemeConfig<f64>, columns: &[Column]) -> Result<Vec<f64>> {
    let cfg = &resolve_policy(cfg)?;
    let (theta, phi, gamma, p, pr) = (cfg.theta, cfg.phi, cfg.gamma2, cfg.p2, cfg.pr2);
    let mut sim: Option<Simulated> = None;
    let mut out = Vec::with_capacity(columns.len());
    for &c in columns {
        if c.uses_circuit() && sim.is_none() {
            sim = Some(simulate_row(*cfg)?);
        }
        let paper = || -> Result<formulas::PaperBloch<f64>> {
            paper_prediction(cfg)?
                .bloch
                .ok_or_else(|| Error::Argument(format!("column {c} is undefined for scheme {}", cfg.scheme.label())))
        };
        let v = match c {
            Column::FAd => formulas::f_ad(theta, gamma),
            Column::FA => formulas::scheme_a(theta, phi, gamma, pr)?.1,
            Column::FAOpt => sin2(theta) * formulas::scheme_a_optimal(gamma).1,
            Column::PrAOpt => formulas::scheme_a_optimal(gamma).0,
            Column::FImpA => formulas::f_imp_a(theta, gamma),
            Column::PQfiA => formulas::scheme_a_probabilities(gamma).p_qfi,
            Column::PFidA => formulas::scheme_a_probabilities(gamma).p_fid,
            Column::PImpA => formulas::scheme_a_probabilities(gamma).p_imp,
            Column::FB => formulas::scheme_b(theta, phi, gamma, p, pr)?.1,
            Column::FBOpt => sin2(theta) * formulas::scheme_b_optimal(gamma, p).1,
            Column::PrBOpt => formulas::scheme_b_optimal(gamma, p).0,
            Column::PQfiB => formulas::scheme_b_probabilities(gamma, p).p_qfi,
            Column::PFidB => formulas::scheme_b_probabilities(gamma, p).p_fid,
            Column::PImpB => formulas::scheme_b_probabilities(gamma, p).p_imp,
            Column::FTwoSided => formulas::two_sided(theta, phi, &cfg.two_sided_params())?.1,
            Column::FTwoSidedOpt => sin2(theta) * formulas::two_sided_symmetric_optimal(gamma, p).1,
            Column::PrTwoSidedOpt => formulas::two_sided_symmetric_optimal(gamma, p).0,
            Column::CAd => formulas::concurrence_formulas(gamma, pr).c_ad,
            Column::CA => formulas::concurrence_formulas(gamma, pr).c_a,
            Column::CAOpt => formulas::concurrence_formulas(gamma, pr).c_a_opt,
            Column::PrUsed => sim.as_ref().map(|s| s.pr_used).unwrap_or(pr),
            Column::QfiSim => sim.as_ref().map(|s| s.qfi).unwrap_or(f64::NAN),
            Column::QfiSpectral => {
                qfi_spectral(&output_family(*cfg), phi, f64::fd_step())?.value
            }
            Column::QfiBloch => qfi_bloch_family(&output_family(*cfg), phi, f64::fd_step())?.value,
            Column::SuccessSim => sim.as_ref().map(|s| s.success).unwrap_or(f64::NAN),
            Column::RxSim => sim.as_ref().map(|s| s.bloch[0]).unwrap_or(f64::NAN),
            Column::RySim => sim.as_ref().map(|s| s.bloch[1]).unwrap_or(f64::NAN),
            Column::RzSim => sim.as_ref().map(|s| s.bloch[2]).unwrap_or(f64::NAN),
            Column::ConcurrenceSim => sim.as_ref().map(|s| s.concurrence).unwrap_or(f64::NAN),
            Column::QfiPaper => paper_prediction(cfg)?.qfi,
            Column::RxPaper => paper()?.rx,
            Column::RyPaper => paper()?.ry,
            Column::RzPaper => paper()?.rz,
            Column::NormPaper => paper()?.normalization,
        };
        if !v.is_finite() {
            return Err(Error::Domain(format!("column {c} is not finite")));
        }
        out.push(v);
    }
    Ok(out)
}

/// Evaluates `columns` at every grid point of `base`. Rows are computed in
/// parallel and kept in row-major order; the first failing row (lowest index)
/// is reported.
pub fn sweep(base: &SchemeConfig<f64>, grid: &GridSpec, columns: &[Column]) -> Result<Table> {
    grid.validate()?;
    if columns.is_empty() {
        return Err(Error::Argument("no columns requested".into()));
    }
    let points: Vec<_> = grid.points().collect();
    let rows: Vec<Result<Vec<f64>>> = points
        .par_iter()
        .map(|pt| {
            let cfg = grid.config_at(base, pt);
            cfg.validate()?;
            let mut r = pt.values.clone();
            r.extend(row(&cfg, columns)?);
            Ok(r)
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    for (pt, r) in points.iter().zip(rows) {
        out.push(r.map_err(|e| annotate(e, pt.index, &grid.labelled(pt)))?);
    }
    let mut header: Vec<String> = grid.axes.iter().map(|a| a.param.name().to_string()).collect();
    header.extend(columns.iter().map(|c| c.name().to_string()));
    Ok(Table { header, rows: out })
}

fn annotate(e: Error, index: usize, values: &std::collections::BTreeMap<String, f64>) -> Error {
    let at = values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ");
    let suffix = format!(" (row {index}: {at})");
    match e {
        Error::Argument(m) => Error::Argument(m + &suffix),
        Error::Config(m) => Error::Config(m + &suffix),
        Error::Domain(m) => Error::Domain(m + &suffix),
        Error::DegenerateRun(m) => Error::DegenerateRun(m + &suffix),
        other => other,
    }
}
