//! Observation subdomain `ω ⊂ Ω` as a union of open intervals.

use crate::error::{Error, Result};
use crate::mesh::Grid1D;
use std::fmt;

const COINCIDE_TOL: f64 = 1e-9;

/// A union of disjoint open subintervals of the domain `(x_min, x_max)`.
///
/// Intervals are kept sorted by their left endpoint, so two windows built from
/// differently ordered lists compare equal and produce identical indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWindow {
    domain: (f64, f64),
    intervals: Vec<(f64, f64)>,
}

impl ObservationWindow {
    pub fn new(domain: (f64, f64), mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidWindow(format!(
                "domain ({lo}, {hi}) is not a proper interval"
            )));
        }
        if intervals.is_empty() {
            return Err(Error::InvalidWindow("no intervals given".into()));
        }
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite()) || b <= a {
                return Err(Error::InvalidWindow(format!(
                    "interval ({a}, {b}) is empty or malformed"
                )));
            }
            if a < lo - COINCIDE_TOL || b > hi + COINCIDE_TOL {
                return Err(Error::InvalidWindow(format!(
                    "interval ({a}, {b}) leaves the domain ({lo}, {hi})"
                )));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        for pair in intervals.windows(2) {
            if pair[1].0 < pair[0].1 - COINCIDE_TOL {
                return Err(Error::InvalidWindow(format!(
                    "intervals ({}, {}) and ({}, {}) overlap; intervals must be pairwise disjoint",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        Ok(Self { domain, intervals })
    }

    /// The whole domain as a single interval.
    pub fn whole(x_min: f64, x_max: f64) -> Result<Self> {
        Self::new((x_min, x_max), vec![(x_min, x_max)])
    }

    /// `Ω \ [a, b]`, i.e. `(x_min, a) ∪ (b, x_max)`.
    pub fn complement_of(x_min: f64, x_max: f64, a: f64, b: f64) -> Result<Self> {
        if !(x_min < a && a < b && b < x_max) {
            return Err(Error::InvalidWindow(format!(
                "excluded block [{a}, {b}] must lie strictly inside ({x_min}, {x_max})"
            )));
        }
        Self::new((x_min, x_max), vec![(x_min, a), (b, x_max)])
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Lebesgue measure `|ω|`.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < x && x < b)
    }

    /// Whether `x` is an endpoint of one of the intervals.
    pub fn has_endpoint(&self, x: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(a, b)| (a - x).abs() <= COINCIDE_TOL || (b - x).abs() <= COINCIDE_TOL)
    }

    /// `∂ω ⊇ ∂Ω`: both domain endpoints are endpoints of some interval.
    pub fn covers_boundary(&self) -> bool {
        self.has_endpoint(self.domain.0) && self.has_endpoint(self.domain.1)
    }

    pub fn is_compatible(&self, grid: &Grid1D) -> bool {
        (self.domain.0 - grid.x_min()).abs() <= COINCIDE_TOL
            && (self.domain.1 - grid.x_max()).abs() <= COINCIDE_TOL
    }

    /// Nodal indicator `χ_ω`.
    ///
    /// Nodes strictly inside an interval weigh 1, nodes outside 0. A node on an
    /// interval endpoint weighs ½ for that interval, except at a domain
    /// endpoint where the trapezoid half-weight already accounts for the cut
    /// and the node weighs 1.
    pub fn indicator(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        if !self.is_compatible(grid) {
            return Err(Error::DimensionMismatch(format!(
                "window domain ({}, {}) differs from grid [{}, {}]",
                self.domain.0,
                self.domain.1,
                grid.x_min(),
                grid.x_max()
            )));
        }
        let tol = COINCIDE_TOL * grid.length().max(1.0);
        let at_domain_end = |x: f64| {
            (x - self.domain.0).abs() <= tol || (x - self.domain.1).abs() <= tol
        };
        Ok(grid
            .nodes()
            .map(|x| {
                let w: f64 = self
                    .intervals
                    .iter()
                    .map(|&(a, b)| {
                        if (x - a).abs() <= tol || (x - b).abs() <= tol {
                            if at_domain_end(x) {
                                1.0
                            } else {
                                0.5
                            }
                        } else if a < x && x < b {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .sum();
                w.min(1.0)
            })
            .collect())
    }
}

impl fmt::Display for ObservationWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        write!(f, "{}", parts.join("U"))
    }
}
