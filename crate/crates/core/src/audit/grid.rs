//! Rectangular parameter grids over configuration fields.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::teleport::SchemeConfig;

/// Hard cap on grid size, to fail fast on typos like `steps=100000`.
pub const MAX_POINTS: usize = 4_000_000;

/// A configuration field that can be swept or fixed.
///
/// `gamma`, `p` and `pr` set both resource qubits; the `2` variants then
/// override the qubit sent to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Theta,
    Phi,
    Gamma,
    Gamma2,
    P,
    P2,
    Pr,
    Pr2,
}

impl Param {
    pub const ALL: [Param; 8] =
        [Param::Theta, Param::Phi, Param::Gamma, Param::Gamma2, Param::P, Param::P2, Param::Pr, Param::Pr2];

    pub fn name(self) -> &'static str {
        match self {
            Param::Theta => "theta",
            Param::Phi => "phi",
            Param::Gamma => "gamma",
            Param::Gamma2 => "gamma2",
            Param::P => "p",
            Param::P2 => "p2",
            Param::Pr => "pr",
            Param::Pr2 => "pr2",
        }
    }

    pub fn is_angle(self) -> bool {
        matches!(self, Param::Theta | Param::Phi)
    }

    pub fn is_strength(self) -> bool {
        matches!(self, Param::Pr | Param::Pr2)
    }

    /// Shared settings go first so the Bob-side overrides win.
    fn priority(self) -> u8 {
        match self {
            Param::Gamma2 | Param::P2 | Param::Pr2 => 1,
            _ => 0,
        }
    }

    pub fn apply(self, cfg: &mut SchemeConfig<f64>, v: f64) {
        match self {
            Param::Theta => cfg.theta = v,
            Param::Phi => cfg.phi = v,
            Param::Gamma => {
                cfg.gamma1 = v;
                cfg.gamma2 = v;
            }
            Param::Gamma2 => cfg.gamma2 = v,
            Param::P => {
                cfg.p1 = v;
                cfg.p2 = v;
            }
            Param::P2 => cfg.p2 = v,
            Param::Pr => {
                cfg.pr1 = v;
                cfg.pr2 = v;
            }
            Param::Pr2 => cfg.pr2 = v,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Param::ALL.iter().map(|p| p.name()).collect();
                Error::Argument(format!("unknown parameter '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

/// Parses a real number, also accepting `pi`, `2pi`, `pi/2`, `3*pi/4`.
pub fn parse_value(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Argument(format!("cannot parse '{s}' as a number"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim().parse::<f64>().map_err(|_| bad())?)),
        None => (s, None),
    };
    let lower = num.to_ascii_lowercase();
    let value = match lower.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            let k = match coef {
                "" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            k * std::f64::consts::PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match den {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return Err(bad()),
        None => value,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: Param, lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let axis = Axis { param, lo, hi, steps };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        let name = self.param.name();
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Argument(format!("axis {name}: bounds must be finite")));
        }
        if self.lo > self.hi {
            return Err(Error::Argument(format!("axis {name}: lo {} exceeds hi {}", self.lo, self.hi)));
        }
        match self.steps {
            0 => Err(Error::Argument(format!("axis {name}: steps must be positive"))),
            1 if self.lo != self.hi => {
                Err(Error::Argument(format!("axis {name}: a swept axis needs at least 2 steps")))
            }
            _ => Ok(()),
        }
    }

    /// The `i`-th of `steps` evenly spaced values; the last is exactly `hi`.
    pub fn value(&self, i: usize) -> f64 {
        if self.steps == 1 || i == 0 {
            self.lo
        } else if i + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }

    fn scaled(&self, k: f64) -> Self {
        Axis { lo: self.lo * k, hi: self.hi * k, ..*self }
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `name=lo:hi:steps`, or `name=value` for a single point.
    fn from_str(s: &str) -> Result<Self> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("axis '{s}' is not of the form name=lo:hi:steps")))?;
        let param: Param = name.parse()?;
        let parts: Vec<&str> = range.split(':').collect();
        match parts.as_slice() {
            [v] => {
                let v = parse_value(v)?;
                Axis::new(param, v, v, 1)
            }
            [lo, hi, steps] => {
                let steps = steps
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Argument(format!("axis {name}: steps '{steps}' is not a count")))?;
                Axis::new(param, parse_value(lo)?, parse_value(hi)?, steps)
            }
            _ => Err(Error::Argument(format!("axis '{s}' is not of the form name=lo:hi:steps"))),
        }
    }
}

/// Swept axes in row-major order (first axis slowest) plus fixed values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<Param, f64>,
}

/// One grid point: its row-major index and the swept values in axis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub values: Vec<f64>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        let grid = GridSpec { axes, fixed: BTreeMap::new() };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_fixed(mut self, param: Param, value: f64) -> Self {
        self.fixed.insert(param, value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        let mut total: usize = 1;
        for a in &self.axes {
            a.validate()?;
            if seen.contains(&a.param) {
                return Err(Error::Argument(format!("axis {} listed twice", a.param)));
            }
            seen.push(a.param);
            total = total
                .checked_mul(a.steps)
                .filter(|&t| t <= MAX_POINTS)
                .ok_or_else(|| Error::Argument(format!("grid exceeds {MAX_POINTS} points")))?;
        }
        for (p, v) in &self.fixed {
            if !v.is_finite() {
                return Err(Error::Argument(format!("fixed {p} must be finite")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sweeps(&self, param: Param) -> bool {
        self.axes.iter().any(|a| a.param == param)
    }

    pub fn point(&self, index: usize) -> GridPoint {
        let mut rem = index;
        let mut values = vec![0.0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            values[k] = a.value(rem % a.steps);
            rem /= a.steps;
        }
        GridPoint { index, values }
    }

    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// `base` with the fixed values and then the point's swept values applied.
    pub fn config_at(&self, base: &SchemeConfig<f64>, point: &GridPoint) -> SchemeConfig<f64> {
        let mut settings: Vec<(Param, f64)> = self.fixed.iter().map(|(&p, &v)| (p, v)).collect();
        settings.extend(self.axes.iter().map(|a| a.param).zip(point.values.iter().copied()));
        // stable sort keeps swept values after fixed ones of equal priority
        settings.sort_by_key(|(p, _)| p.priority());
        let mut cfg = *base;
        for (p, v) in settings {
            p.apply(&mut cfg, v);
        }
        cfg
    }

    /// Named values of a point, for reports.
    pub fn labelled(&self, point: &GridPoint) -> BTreeMap<String, f64> {
        self.axes.iter().map(|a| a.param.name().to_string()).zip(point.values.iter().copied()).collect()
    }

    /// Rescales angle axes and fixed angles by `k` (degrees to radians).
    pub fn scale_angles(&self, k: f64) -> Self {
        GridSpec {
            axes: self.axes.iter().map(|a| if a.param.is_angle() { a.scaled(k) } else { *a }).collect(),
            fixed: self.fixed.iter().map(|(&p, &v)| (p, if p.is_angle() { v * k } else { v })).collect(),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// Comma-separated axes, e.g. `theta=0:pi:51,gamma=0:1:51`.
    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .split(',')
            .filter(|part| !part.trim().is_empty())
            .map(|part| part.trim().parse())
            .collect::<Result<Vec<Axis>>>()?;
        if axes.is_empty() {
            return Err(Error::Argument("grid has no axes".into()));
        }
        GridSpec::new(axes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teleport::Scheme;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn parses_values_with_pi() {
        assert_eq!(parse_value("0.25").unwrap(), 0.25);
        assert_eq!(parse_value("pi").unwrap(), PI);
        assert_eq!(parse_value("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_value("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_value("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_value("-pi").unwrap(), -PI);
        assert!(parse_value("pi/0").is_err());
        assert!(parse_value("tau").is_err());
        assert!(parse_value("inf").is_err());
    }

    #[test]
    fn parses_figure_grid() {
        let g: GridSpec = "theta=0:3.14159265:51,gamma=0:1:51".parse().unwrap();
        assert_eq!(g.len(), 2601);
        assert_eq!(g.axes[0].param, Param::Theta);
        assert_eq!(g.point(0).values, vec![0.0, 0.0]);
        assert_eq!(g.point(1).values, vec![0.0, 0.02]);
        assert_eq!(g.point(51).values[0], 3.14159265 / 50.0);
        assert_eq!(g.point(2600).values, vec![3.14159265, 1.0]);
    }

    #[test]
    fn single_point_axes() {
        let g: GridSpec = "gamma=0.5".parse().unwrap();
        assert_eq!(g.len(), 1);
        let g: GridSpec = "gamma=0.5:0.5:1".parse().unwrap();
        assert_eq!(g.len(), 1);
        assert!("gamma=0:1:1".parse::<GridSpec>().is_err());
    }

    #[test]
    fn rejects_malformed_grids() {
        for bad in ["", "gamma", "gamma=1:0:3", "gamma=0:1:0", "gamma=0:1", "omega=0:1:2", "gamma=0:1:2,gamma=0:1:3"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
        assert!("theta=0:1:3000,gamma=0:1:3000".parse::<GridSpec>().is_err());
    }

    #[test]
    fn bob_overrides_win_regardless_of_order() {
        let g: GridSpec = "gamma2=0.1,gamma=0.7".parse().unwrap();
        let cfg = g.config_at(&SchemeConfig::new(Scheme::TwoSided, 0.0, 0.0), &g.point(0));
        assert_eq!((cfg.gamma1, cfg.gamma2), (0.7, 0.1));
        let g = "theta=1".parse::<GridSpec>().unwrap().with_fixed(Param::Gamma, 0.3).with_fixed(Param::Theta, 2.0);
        let cfg = g.config_at(&SchemeConfig::new(Scheme::B, 0.0, 0.0), &g.point(0));
        assert_eq!((cfg.theta, cfg.gamma1, cfg.gamma2), (1.0, 0.3, 0.3));
    }

    #[test]
    fn degree_scaling_touches_only_angles() {
        let g: GridSpec = "theta=0:180:3,gamma=0:1:3".parse().unwrap();
        let r = g.scale_angles(PI / 180.0);
        assert_eq!(r.axes[0].hi, PI);
        assert_eq!(r.axes[1].hi, 1.0);
    }

    proptest! {
        #[test]
        fn points_are_row_major_and_on_grid(s1 in 1usize..6, s2 in 2usize..6, s3 in 2usize..5) {
            let lo1 = if s1 == 1 { 0.5 } else { 0.0 };
            let g = GridSpec::new(vec![
                Axis::new(Param::Theta, lo1, 0.5, s1).unwrap(),
                Axis::new(Param::Gamma, 0.0, 1.0, s2).unwrap(),
                Axis::new(Param::Pr, 0.2, 0.4, s3).unwrap(),
            ]).unwrap();
            prop_assert_eq!(g.len(), s1 * s2 * s3);
            let pts: Vec<_> = g.points().collect();
            for (i, p) in pts.iter().enumerate() {
                prop_assert_eq!(p.index, i);
                let idx = [i / (s2 * s3), (i / s3) % s2, i % s3];
                for (k, a) in g.axes.iter().enumerate() {
                    prop_assert_eq!(p.values[k], a.value(idx[k]));
                    prop_assert!(p.values[k] >= a.lo && p.values[k] <= a.hi);
                }
            }
        }
    }
}
