//! The periodic-orbit cascade stage: classify a degenerate restriction,
//! split it into a prescribed number of hyperbolic points, verify the
//! counting inequality, and probe persistence.
//!
//! The stage works on a planar skew representative of the period-n return
//! map near the degenerate orbit: `(x, y) -> (x + l x^(k+1), eta y)` with
//! `|eta| != 1`. Splitting happens in the restriction's own chart; the
//! persistence probe is a seeded random polynomial applied at half the
//! minimum multiplier margin in that chart's natural scaling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::census::line::split_degenerate;
use crate::census::{classify_planar, fixed_points_1d, Classification, LineOpts, PlanarJet};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Target-sequence specification.
#[derive(Debug, Clone, Serialize)]
pub enum TargetSequence {
    /// a_n = n^n.
    SuperExponential,
    /// a_n = 2^n.
    Doubling,
    /// Explicit values for n = 1, 2, ...
    List(Vec<u64>),
}

impl TargetSequence {
    pub fn value(&self, n: u32) -> Result<u64> {
        match self {
            TargetSequence::SuperExponential => {
                let n = n as u64;
                n.checked_pow(n as u32)
                    .ok_or_else(|| Error::Budget(format!("{n}^{n} overflows the target sequence")))
            }
            TargetSequence::Doubling => 1u64
                .checked_shl(n)
                .ok_or_else(|| Error::Budget(format!("2^{n} overflows the target sequence"))),
            TargetSequence::List(v) => v
                .get((n - 1) as usize)
                .copied()
                .ok_or_else(|| Error::invalid(format!("target list has no entry for n = {n}"))),
        }
    }
}

/// One cascade stage request.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeStageSpec {
    /// Period of the degenerate orbit the stage works at.
    pub n1: u32,
    /// Degeneracy order of the restriction.
    pub k: usize,
    /// Splitting amplitude.
    pub epsilon: f64,
    /// Contracting multiplier of the skew representative.
    pub eta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CascadeSpec {
    pub target: TargetSequence,
    pub stages: Vec<CascadeStageSpec>,
    pub seed: u64,
}

/// Per-stage outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeStageReport {
    pub n1: u32,
    pub a_n1: u64,
    pub requested: u64,
    pub k: usize,
    /// Degeneracy order detected by the census classification.
    pub classified_order: usize,
    pub achieved: u64,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// `achieved / a_n1` against the requirement `>= n1`; vacuous when
    /// `a_n1 = 0`.
    pub break_ratio: Option<f64>,
    pub break_ok: bool,
    pub probe: Option<ProbeReport>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub delta: f64,
    pub count_before: u64,
    pub count_after: u64,
    pub preserved: bool,
    pub min_margin_after: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CascadeReport {
    pub stages: Vec<CascadeStageReport>,
    pub passed: bool,
}

/// Prescribed splitting pattern: symmetric, widely spaced roots so the
/// probe's root displacements stay far below the spacing.
fn splitting_pattern(m: usize) -> Vec<f64> {
    let gap = 4.0;
    (0..m)
        .map(|i| (i as f64 - (m as f64 - 1.0) / 2.0) * gap)
        .collect()
}

pub fn run_cascade(spec: &CascadeSpec) -> Result<CascadeReport> {
    if spec.stages.is_empty() {
        return Err(Error::invalid("cascade needs at least one stage"));
    }
    if spec.stages.len() > 2 {
        return Err(Error::Budget(
            "desk-scale cascade runs at most two stages".into(),
        ));
    }
    let mut stages = Vec::new();
    for (idx, stage) in spec.stages.iter().enumerate() {
        stages.push(run_stage(stage, &spec.target, spec.seed.wrapping_add(idx as u64))?);
    }
    let passed = stages.iter().all(|s| s.passed);
    Ok(CascadeReport { stages, passed })
}

fn run_stage(
    stage: &CascadeStageSpec,
    target: &TargetSequence,
    seed: u64,
) -> Result<CascadeStageReport> {
    if stage.eta.abs() >= 1.0 || stage.eta == 0.0 {
        return Err(Error::invalid(
            "skew representative needs a contracting multiplier 0 < |eta| < 1",
        ));
    }
    let a_n1 = target.value(stage.n1)?;
    let requested = a_n1
        .checked_mul(stage.n1 as u64)
        .ok_or_else(|| Error::Budget("requested orbit count overflows".into()))?;
    if requested > 1_000 {
        return Err(Error::Budget(format!(
            "requested count {requested} beyond the desk-scale cap 1000"
        )));
    }

    // Classify the degenerate restriction of the skew representative.
    let mut restriction = Poly::zero();
    restriction.coeffs = vec![0.0; stage.k + 2];
    restriction.coeffs[1] = 1.0;
    restriction.coeffs[stage.k + 1] = 1.0;
    let restriction = Poly::new(restriction.coeffs);
    let jet = PlanarJet::of_skew_map(&restriction, stage.eta, 0.0, stage.k + 1);
    let classification = classify_planar(
        [(1.0, 0.0), (stage.eta, 0.0)],
        Some(&jet),
        1e-8,
        stage.k,
    );
    let classified_order = match classification {
        Classification::KDegenerate { k, .. } => k,
        other => {
            return Err(Error::CertificateFailure(format!(
                "expected a degenerate restriction, census classified it as {other:?}"
            )))
        }
    };
    if classified_order != stage.k {
        return Err(Error::CertificateFailure(format!(
            "classified order {classified_order} does not match the requested k = {}",
            stage.k
        )));
    }

    // Vacuous stage: nothing requested.
    if requested == 0 {
        return Ok(CascadeStageReport {
            n1: stage.n1,
            a_n1,
            requested,
            k: stage.k,
            classified_order,
            achieved: 0,
            margins: Vec::new(),
            min_margin: f64::INFINITY,
            break_ratio: None,
            break_ok: true,
            probe: None,
            passed: true,
        });
    }

    let m = requested as usize;
    if m > stage.k + 1 {
        return Err(Error::invalid(format!(
            "requested {m} fixed points needs degeneracy order at least {} (have k = {})",
            m - 1,
            stage.k
        )));
    }
    let pattern = splitting_pattern(m);
    let split = split_degenerate(stage.k, 1.0, stage.epsilon, &pattern)?;

    // Certified count of the perturbed restriction's fixed points.
    let opts = LineOpts::default();
    let run = fixed_points_1d(&split.map, 1, &opts)?;
    let achieved = run.count as u64;
    let records = run.records(&opts);
    let all_hyperbolic = records
        .iter()
        .all(|r| r.classification == Classification::Hyperbolic);
    if !all_hyperbolic {
        return Err(Error::CertificateFailure(
            "a split fixed point failed the hyperbolicity classification".into(),
        ));
    }

    let break_ratio = Some(achieved as f64 / a_n1 as f64);
    let break_ok = achieved >= requested;

    // Persistence probe at half the minimum margin, in the splitting's
    // natural chart: the probe polynomial is C^1-normalized on the
    // pattern hull after rescaling by the root scale.
    let probe = probe_persistence(&split.map, &split.fixed_points, split.min_margin, split.scale, seed)?;

    let passed = break_ok && probe.preserved;
    Ok(CascadeStageReport {
        n1: stage.n1,
        a_n1,
        requested,
        k: stage.k,
        classified_order,
        achieved,
        margins: split.margins.clone(),
        min_margin: split.min_margin,
        break_ratio,
        break_ok,
        probe: Some(probe),
        passed,
    })
}

fn probe_persistence(
    map: &Poly,
    roots: &[f64],
    min_margin: f64,
    scale: f64,
    seed: u64,
) -> Result<ProbeReport> {
    let delta = min_margin / 2.0;
    // Seeded probe shape on the unit-scale chart w = x / scale.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xCA5CADE);
    let raw: Vec<f64> = (0..5).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let shape_w = Poly::new(raw);
    // C^1 norm over the pattern hull in w units.
    let hull = roots
        .iter()
        .map(|r| (r / scale).abs())
        .fold(1.0f64, f64::max)
        + 1.0;
    let mut c1 = 0.0f64;
    let dshape = shape_w.derivative();
    for i in 0..=256 {
        let w = -hull + 2.0 * hull * i as f64 / 256.0;
        c1 = c1.max(shape_w.eval(w).abs()).max(dshape.eval(w).abs());
    }
    // Probe in x units: delta * scale * shape(x / scale); its C^1 size is
    // delta * max(scale |shape|, |shape'|) <= delta (scale < 1).
    let mut probe_poly = Poly::zero();
    for (j, &c) in shape_w.coeffs.iter().enumerate() {
        let coef = delta * scale * (c / c1) / scale.powi(j as i32);
        probe_poly = probe_poly.add(&Poly::new(
            std::iter::repeat(0.0)
                .take(j)
                .chain(std::iter::once(coef))
                .collect(),
        ));
    }
    let perturbed = map.add(&probe_poly);

    // Count after: exact Sturm count of fixed points in the pattern
    // neighborhood, plus Newton relocation from the old roots.
    let fixed_poly = perturbed.sub(&Poly::x());
    let count_before = roots.len() as u64;
    let mut relocated = Vec::with_capacity(roots.len());
    let dfixed = fixed_poly.derivative();
    for &r in roots {
        let mut x = r;
        let mut ok = false;
        for _ in 0..60 {
            let f = fixed_poly.eval(x);
            let d = dfixed.eval(x);
            if d.abs() < 1e-300 {
                break;
            }
            let step = f / d;
            x -= step;
            if step.abs() < 1e-14 * (1.0 + x.abs()) {
                ok = true;
                break;
            }
        }
        if !ok || !x.is_finite() {
            return Ok(ProbeReport {
                delta,
                count_before,
                count_after: 0,
                preserved: false,
                min_margin_after: 0.0,
            });
        }
        relocated.push(x);
    }
    relocated.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Distinctness: displacements must stay below half the spacing.
    let mut distinct = true;
    for w in relocated.windows(2) {
        if w[1] - w[0] < 1e-12 {
            distinct = false;
        }
    }
    let min_margin_after = relocated
        .iter()
        .map(|&x| ((1.0 + dfixed.eval(x)).abs() - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    let count_after = if distinct { relocated.len() as u64 } else { 0 };
    Ok(ProbeReport {
        delta,
        count_before,
        count_after,
        preserved: distinct && count_after == count_before && min_margin_after > 0.0,
        min_margin_after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_stage() -> CascadeSpec {
        CascadeSpec {
            target: TargetSequence::List(vec![0, 0, 2]),
            stages: vec![CascadeStageSpec {
                n1: 3,
                k: 5,
                epsilon: 2.5e-8,
                eta: 0.5,
            }],
            seed: 42,
        }
    }

    #[test]
    fn desk_cascade_stage() {
        let report = run_cascade(&desk_stage()).unwrap();
        assert!(report.passed);
        let s = &report.stages[0];
        assert_eq!(s.requested, 6);
        assert_eq!(s.achieved, 6);
        assert!(s.min_margin > 1e-4, "margin {}", s.min_margin);
        assert!(s.break_ratio.unwrap() >= 3.0);
        let probe = s.probe.as_ref().unwrap();
        assert!(probe.preserved);
        assert!((probe.delta - s.min_margin / 2.0).abs() < 1e-18);
    }

    #[test]
    fn vacuous_target_passes() {
        let spec = CascadeSpec {
            target: TargetSequence::List(vec![0, 0, 0]),
            stages: vec![CascadeStageSpec {
                n1: 2,
                k: 3,
                epsilon: 1e-6,
                eta: 0.5,
            }],
            seed: 1,
        };
        let report = run_cascade(&spec).unwrap();
        assert!(report.passed);
        assert_eq!(report.stages[0].achieved, 0);
        assert!(report.stages[0].break_ok);
    }

    #[test]
    fn overfull_request_names_required_order() {
        let spec = CascadeSpec {
            target: TargetSequence::List(vec![0, 0, 4]),
            stages: vec![CascadeStageSpec {
                n1: 3,
                k: 5,
                epsilon: 1e-6,
                eta: 0.5,
            }],
            seed: 1,
        };
        // 12 requested points need k >= 11.
        let err = run_cascade(&spec).unwrap_err();
        assert!(err.to_string().contains("11"), "{err}");
    }

    #[test]
    fn superexponential_preset_values() {
        assert_eq!(TargetSequence::SuperExponential.value(3).unwrap(), 27);
        assert_eq!(TargetSequence::Doubling.value(4).unwrap(), 16);
    }

    #[test]
    fn cascade_is_deterministic() {
        let a = serde_json::to_string(&run_cascade(&desk_stage()).unwrap()).unwrap();
        let b = serde_json::to_string(&run_cascade(&desk_stage()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
