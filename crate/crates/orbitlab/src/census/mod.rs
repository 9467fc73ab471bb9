//! Periodic-point censuses: exact one-dimensional counting, planar Newton
//! searches, multiplier classification, degenerate-orbit splitting, and
//! the dynamical zeta partial sums.

pub mod classify;
pub mod line;
pub mod planar;
pub mod zeta;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::PlanarPoint;
use crate::model::PlanarMap;
use crate::poly::Poly;

pub use classify::{classify_line_jet, classify_planar, Classification, PlanarJet};
pub use line::{fixed_points_1d, split_degenerate, FixedPointRun, LineOpts, SplitOutcome};
pub use planar::{periodic_points_2d, SearchSpec};
pub use zeta::{zeta_partial, ZetaSeries};

/// Multiplier data attached to an orbit record.
#[derive(Debug, Clone, Serialize)]
pub enum MultiplierData {
    /// Eigenvalue pair of the planar Jacobian along the cycle, as
    /// (re, im) pairs.
    Pair([(f64, f64); 2]),
    /// Single multiplier of a one-dimensional restriction.
    Single(f64),
}

impl MultiplierData {
    pub fn moduli(&self) -> Vec<f64> {
        match self {
            MultiplierData::Pair(p) => p.iter().map(|(re, im)| re.hypot(*im)).collect(),
            MultiplierData::Single(m) => vec![m.abs()],
        }
    }

    /// Distance of the closest multiplier to the unit circle.
    pub fn unit_circle_margin(&self) -> f64 {
        self.moduli()
            .iter()
            .map(|m| (m - 1.0).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// One periodic point (not orbit): representative, least period,
/// multipliers of the full cycle, classification, and the fixed-point
/// residual at the reported period.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitRecord {
    pub point: PlanarPoint,
    /// Least period within the examined window.
    pub period: u32,
    pub multipliers: MultiplierData,
    pub classification: Classification,
    pub residual: f64,
}

/// Table of periodic-point counts `P_n` over a window `1..=n_max`,
/// together with the per-period record lists.
#[derive(Debug, Clone, Serialize)]
pub struct Census {
    pub n_max: u32,
    /// `P_n`: number of isolated fixed points of the n-th iterate.
    pub counts: BTreeMap<u32, u64>,
    /// Records keyed by the iterate n they were found at.
    pub orbits: BTreeMap<u32, Vec<OrbitRecord>>,
}

impl Census {
    pub fn count(&self, n: u32) -> Option<u64> {
        self.counts.get(&n).copied()
    }
}

/// Exponential growth-rate surrogate over a finite window: the maximum of
/// `log P_n / n`, with the window reported alongside.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthRate {
    pub value: f64,
    pub window: (u32, u32),
    pub argmax_n: u32,
}

pub fn growth_rate(census: &Census) -> Result<GrowthRate> {
    let mut best: Option<(f64, u32)> = None;
    for (&n, &p) in &census.counts {
        if p == 0 {
            continue;
        }
        let v = (p as f64).ln() / n as f64;
        if best.map_or(true, |(bv, _)| v > bv) {
            best = Some((v, n));
        }
    }
    let (value, argmax_n) =
        best.ok_or_else(|| Error::invalid("growth rate undefined: every count is zero"))?;
    Ok(GrowthRate {
        value,
        window: (1, census.n_max),
        argmax_n,
    })
}

/// Count `P_n` for a polynomial interval map over `n = 1..=n_max` with
/// exact certificates.
pub fn count_pn_1d(q: &Poly, n_max: u32, opts: &LineOpts) -> Result<Census> {
    let mut counts = BTreeMap::new();
    let mut orbits: BTreeMap<u32, Vec<OrbitRecord>> = BTreeMap::new();
    for n in 1..=n_max {
        let run = fixed_points_1d(q, n, opts)?;
        counts.insert(n, run.count as u64);
        let records = run.records(opts);
        // Keep only points whose least period is n; earlier periods were
        // recorded at their own n.
        let fresh: Vec<OrbitRecord> = records.into_iter().filter(|r| r.period == n).collect();
        orbits.insert(n, fresh);
    }
    Ok(Census {
        n_max,
        counts,
        orbits,
    })
}

/// Count `P_n` for a planar map by seeded Newton searches.
pub fn count_pn_2d(map: &dyn PlanarMap, n_max: u32, spec: &SearchSpec) -> Result<Census> {
    let mut counts = BTreeMap::new();
    let mut orbits: BTreeMap<u32, Vec<OrbitRecord>> = BTreeMap::new();
    for n in 1..=n_max {
        let records = periodic_points_2d(map, n, spec)?;
        counts.insert(n, records.len() as u64);
        let fresh: Vec<OrbitRecord> = records.into_iter().filter(|r| r.period == n).collect();
        orbits.insert(n, fresh);
    }
    Ok(Census {
        n_max,
        counts,
        orbits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SaddleMap, SaddleParams};

    #[test]
    fn growth_rate_doubling() {
        let mut counts = BTreeMap::new();
        for n in 1..=10u32 {
            counts.insert(n, 1u64 << n);
        }
        let census = Census {
            n_max: 10,
            counts,
            orbits: BTreeMap::new(),
        };
        let g = growth_rate(&census).unwrap();
        assert!((g.value - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn growth_rate_constant_and_superexponential() {
        let mut counts = BTreeMap::new();
        for n in 1..=8u32 {
            counts.insert(n, 1u64);
        }
        let census = Census {
            n_max: 8,
            counts: counts.clone(),
            orbits: BTreeMap::new(),
        };
        assert_eq!(growth_rate(&census).unwrap().value, 0.0);

        // P_n = n^n on the window: max of log(n^n)/n = log n at n = 8.
        let mut counts = BTreeMap::new();
        for n in 1..=8u64 {
            counts.insert(n as u32, n.pow(n as u32));
        }
        let census = Census {
            n_max: 8,
            counts,
            orbits: BTreeMap::new(),
        };
        let g = growth_rate(&census).unwrap();
        assert!((g.value - 8.0f64.ln()).abs() < 1e-12);
        assert_eq!(g.argmax_n, 8);
    }

    #[test]
    fn growth_rate_rejects_all_zero() {
        let mut counts = BTreeMap::new();
        counts.insert(1u32, 0u64);
        let census = Census {
            n_max: 1,
            counts,
            orbits: BTreeMap::new(),
        };
        assert!(growth_rate(&census).is_err());
    }

    #[test]
    fn linear_saddle_census_is_origin_only() {
        let saddle = SaddleParams::new(0.5, 1.8);
        let map = SaddleMap(&saddle);
        let spec = SearchSpec::in_box(1.0, 9);
        let census = count_pn_2d(&map, 4, &spec).unwrap();
        for n in 1..=4 {
            assert_eq!(census.count(n), Some(1), "P_{n}");
        }
        let rec = &census.orbits[&1][0];
        assert!(rec.point.dist(&PlanarPoint::new(0.0, 0.0)) < 1e-9);
        let mut moduli = rec.multipliers.moduli();
        moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((moduli[0] - 0.5).abs() < 1e-9);
        assert!((moduli[1] - 1.8).abs() < 1e-9);
    }
}
