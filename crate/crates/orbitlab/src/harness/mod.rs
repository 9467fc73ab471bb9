//! Experiment orchestration: config schemas, dispatch, output files, and
//! the reproducibility manifest.
//!
//! Every experiment is a pure function of (config, seed); result files
//! carry no timestamps, so identical inputs give identical bytes. The
//! manifest records the config echo, the seed, every numeric tolerance in
//! play, and wall-clock data (the manifest is operational metadata, not
//! part of the reproducible output set).

pub mod cascade;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::census::{self, zeta_partial, LineOpts, SearchSpec};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::model::{GlobalMapParams, ModelDiffeo, RemainderPoly, SaddleParams};
use crate::poly::{BiPoly, Poly};
use crate::polymap::{monte_carlo_hyperbolicity, McConfig};
use crate::renorm::{convergence_sweep, GridSpec, LimitMap};
use crate::tower::{
    gap_ratio, select_tower_indices, tangency_order_solver, TangencyOpts,
};

pub use cascade::{run_cascade, CascadeReport, CascadeSpec, CascadeStageSpec, TargetSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// What an experiment produced.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub experiment: String,
    pub passed: bool,
    /// Files written, relative to the output directory.
    pub outputs: Vec<PathBuf>,
    /// Primary artifact for stdout echoing, keyed by format.
    pub primary_csv: Option<PathBuf>,
    pub primary_json: Option<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    config: &'a [(String, String)],
    seed: u64,
    tolerances: &'a BTreeMap<String, f64>,
    started: String,
    elapsed_seconds: f64,
}

/// Build the model from flat config keys, with the conventional defaults
/// for everything the tangency normal form does not pin down.
pub fn model_from_config(cfg: &Config) -> Result<ModelDiffeo> {
    let lambda = cfg.require_f64("lambda")?;
    let mu = cfg.require_f64("mu")?;
    let k = cfg.usize_or("k", 2)?;
    let mut saddle = SaddleParams::new(lambda, mu);
    saddle.resonance_order = cfg.usize_or("resonance_order", 10)? as u32;
    saddle.resonance_tol = cfg.f64_or("resonance_tol", 1e-9)?;

    let mut mu_vec = Vec::with_capacity(k);
    for i in 0..k {
        mu_vec.push(cfg.f64_or(&format!("mu{i}"), 0.0)?);
    }
    let mut h1 = BiPoly::zero();
    let mut h2 = BiPoly::zero();
    let mut g = Poly::zero();
    for (key, value) in &cfg.entries {
        let parse = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))
        };
        if let Some(rest) = key.strip_prefix("h1_") {
            let (i, j) = parse_index_pair(key, rest)?;
            h1.set(i, j, parse()?);
        } else if let Some(rest) = key.strip_prefix("h2_") {
            let (i, j) = parse_index_pair(key, rest)?;
            h2.set(i, j, parse()?);
        } else if let Some(idx) = key.strip_prefix('g') {
            if let Ok(i) = idx.parse::<usize>() {
                while g.coeffs.len() <= i {
                    g.coeffs.push(0.0);
                }
                g.coeffs[i] = parse()?;
            }
        }
    }
    let mut global = GlobalMapParams::new(
        cfg.f64_or("alpha", 1.0)?,
        cfg.f64_or("beta", 0.0)?,
        cfg.f64_or("gamma", 1.0)?,
        cfg.f64_or("sigma", 1.0)?,
        k,
        mu_vec,
    )?
    .with_remainders(
        RemainderPoly::first_kind(h1)?,
        RemainderPoly::second_kind(h2, k)?,
    )?;
    global.n_global = cfg.u64_or("n_global", 1)? as u32;
    global.chart_halfwidth = cfg.f64_or("chart_halfwidth", 1.0)?;
    ModelDiffeo::new(saddle, global, cfg.f64_or("c", 1.0)?, Poly::new(g.coeffs))
}

fn parse_index_pair(key: &str, rest: &str) -> Result<(usize, usize)> {
    let mut parts = rest.split('_');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(i), Some(j), None) => Ok((
            i.parse()
                .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))?,
            j.parse()
                .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))?,
        )),
        _ => Err(Error::Schema(format!("malformed remainder key `{key}`"))),
    }
}

const MODEL_KEYS: &[&str] = &[
    "lambda",
    "mu",
    "k",
    "alpha",
    "beta",
    "gamma",
    "sigma",
    "c",
    "n_global",
    "chart_halfwidth",
    "resonance_order",
    "resonance_tol",
];
const MODEL_PREFIXES: &[&str] = &["mu", "h1_", "h2_", "g"];
const COMMON_KEYS: &[&str] = &["experiment", "seed"];

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(PathBuf::from(name))
}

fn json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serialization: {e}")))
        .map(|mut s| {
            s.push('\n');
            s
        })
}

/// Run one experiment and write its artifacts plus a manifest.
pub fn run_experiment(
    name: &str,
    cfg: &Config,
    seed: u64,
    out_dir: &Path,
) -> Result<ExperimentOutcome> {
    let started = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let mut tolerances = BTreeMap::new();
    let result = match name {
        "renorm" => run_renorm(cfg, out_dir, &mut tolerances),
        "census" => run_census(cfg, out_dir, &mut tolerances),
        "tower" => run_tower(cfg, out_dir, &mut tolerances),
        "tangency" => run_tangency(cfg, out_dir, &mut tolerances),
        "polymap" => run_polymap(cfg, seed, out_dir, &mut tolerances),
        "cascade" => run_cascade_experiment(cfg, seed, out_dir, &mut tolerances),
        other => Err(Error::Schema(format!("unknown experiment `{other}`"))),
    };
    let mut outcome = result.map_err(|e| e.in_experiment(name))?;
    let manifest = Manifest {
        experiment: name,
        config: &cfg.entries,
        seed,
        tolerances: &tolerances,
        started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    };
    let manifest_file = write_file(out_dir, "manifest.json", &json_string(&manifest)?)?;
    outcome.outputs.push(manifest_file);
    Ok(outcome)
}

fn run_renorm(
    cfg: &Config,
    out: &Path,
    tol: &mut BTreeMap<String, f64>,
) -> Result<ExperimentOutcome> {
    cfg.validate_keys(
        &[
            COMMON_KEYS,
            MODEL_KEYS,
            &["m", "n_min", "n_max", "grid_step", "r"],
        ]
        .concat(),
        MODEL_PREFIXES,
    )?;
    let model = model_from_config(cfg)?;
    let m = cfg
        .get_f64_list("m")?
        .ok_or_else(|| Error::Schema("missing required key `m`".into()))?;
    let limit = LimitMap::new(model.global.k, m)?;
    let n_min = cfg.u64_or("n_min", 1)? as u32;
    let n_max = cfg.u64_or("n_max", 12)? as u32;
    let step = cfg.f64_or("grid_step", 0.1)?;
    let order = cfg.u64_or("r", 2)? as u8;
    let grid = GridSpec::standard(step)?;
    tol.insert("grid_step".into(), step);
    let report = convergence_sweep(&model, &limit, n_min..=n_max, grid, order)?;
    let mut csv = String::from("n,d0,d1,d2\n");
    for row in &report.rows {
        let d1 = row.d1.map(|v| format!("{v:e}")).unwrap_or_default();
        let d2 = row.d2.map(|v| format!("{v:e}")).unwrap_or_default();
        csv.push_str(&format!("{},{:e},{},{}\n", row.n, row.d0, d1, d2));
    }
    let csv_file = write_file(out, "renorm.csv", &csv)?;
    let json_file = write_file(out, "renorm.json", &json_string(&report)?)?;
    Ok(ExperimentOutcome {
        experiment: "renorm".into(),
        passed: true,
        outputs: vec![csv_file.clone(), json_file.clone()],
        primary_csv: Some(csv_file),
        primary_json: Some(json_file),
    })
}

#[derive(Serialize)]
struct CensusArtifact {
    orbits: Vec<census::OrbitRecord>,
    #[serde(rename = "P")]
    p: BTreeMap<u32, u64>,
    zeta: Vec<f64>,
    growth_rate: Option<f64>,
    growth_window: (u32, u32),
}

fn run_census(
    cfg: &Config,
    out: &Path,
    tol: &mut BTreeMap<String, f64>,
) -> Result<ExperimentOutcome> {
    cfg.validate_keys(
        &[
            COMMON_KEYS,
            MODEL_KEYS,
            &["map", "n_max", "box", "seed_grid", "coeffs", "m", "n_return"],
        ]
        .concat(),
        MODEL_PREFIXES,
    )?;
    let n_max = cfg.u64_or("n_max", 6)? as u32;
    let map_kind = cfg.require("map")?;
    let census_result = match map_kind {
        "poly1d" => {
            let coeffs = cfg
                .get_f64_list("coeffs")?
                .ok_or_else(|| Error::Schema("missing required key `coeffs`".into()))?;
            let opts = LineOpts::default();
            tol.insert("root_tol".into(), opts.root_tol);
            tol.insert("unit_margin_tol".into(), opts.unit_margin_tol);
            census::count_pn_1d(&Poly::new(coeffs), n_max, &opts)?
        }
        "limit" => {
            let k = cfg.usize_or("k", 2)?;
            let m = cfg
                .get_f64_list("m")?
                .ok_or_else(|| Error::Schema("missing required key `m`".into()))?;
            let limit = LimitMap::new(k, m)?;
            let spec = search_spec(cfg, tol)?;
            census::count_pn_2d(&limit, n_max, &spec)?
        }
        "model" => {
            let model = model_from_config(cfg)?;
            let n_return = cfg.u64_or("n_return", 8)? as u32;
            let ret = model.return_map(n_return);
            // The return map lives on a strip of height ~ mu^-n over the
            // stable manifold; match the seed rectangle to it, otherwise
            // almost every seed escapes the chart on the first step.
            let halfwidth = cfg.f64_or("box", 0.5)?;
            let seed_grid = cfg.usize_or("seed_grid", 24)?;
            let strip_top = 2.2 * model.saddle.mu.powi(-(n_return as i32));
            let spec = SearchSpec::rect(
                crate::geom::Interval::centered(0.0, halfwidth),
                crate::geom::Interval::new(0.0, strip_top),
                seed_grid,
            );
            tol.insert("newton_tol".into(), spec.newton_tol);
            tol.insert("dedup_radius".into(), spec.dedup_radius);
            tol.insert("unit_margin_tol".into(), spec.unit_margin_tol);
            census::count_pn_2d(&ret, n_max, &spec)?
        }
        other => {
            return Err(Error::Schema(format!(
                "map must be poly1d | limit | model, got `{other}`"
            )))
        }
    };
    let zeta = zeta_partial(&census_result, n_max as usize)?;
    let growth = census::growth_rate(&census_result).ok();
    let artifact = CensusArtifact {
        orbits: census_result
            .orbits
            .values()
            .flat_map(|v| v.iter().cloned())
            .collect(),
        p: census_result.counts.clone(),
        zeta: zeta.coeffs,
        growth_rate: growth.as_ref().map(|g| g.value),
        growth_window: growth.map(|g| g.window).unwrap_or((1, n_max)),
    };
    let json_file = write_file(out, "census.json", &json_string(&artifact)?)?;
    Ok(ExperimentOutcome {
        experiment: "census".into(),
        passed: true,
        outputs: vec![json_file.clone()],
        primary_csv: None,
        primary_json: Some(json_file),
    })
}

fn search_spec(cfg: &Config, tol: &mut BTreeMap<String, f64>) -> Result<SearchSpec> {
    let halfwidth = cfg.f64_or("box", 3.0)?;
    let seed_grid = cfg.usize_or("seed_grid", 24)?;
    let spec = SearchSpec::in_box(halfwidth, seed_grid);
    tol.insert("newton_tol".into(), spec.newton_tol);
    tol.insert("dedup_radius".into(), spec.dedup_radius);
    tol.insert("unit_margin_tol".into(), spec.unit_margin_tol);
    Ok(spec)
}

#[derive(Serialize)]
struct TowerArtifact {
    indices: Vec<u32>,
    t: Vec<f64>,
    s: Vec<f64>,
    gap_excess: Vec<f64>,
    ratios: Vec<f64>,
    bound: Vec<f64>,
    direct_bounds: Vec<f64>,
    exponent_valid: bool,
    floors: Vec<crate::tower::FloorSaddle>,
}

fn run_tower(
    cfg: &Config,
    out: &Path,
    tol: &mut BTreeMap<String, f64>,
) -> Result<ExperimentOutcome> {
    cfg.validate_keys(
        &[COMMON_KEYS, MODEL_KEYS, &["floors", "n1", "r"]].concat(),
        MODEL_PREFIXES,
    )?;
    let model = model_from_config(cfg)?;
    let floors = cfg.usize_or("floors", 2)?;
    let n1 = cfg.u64_or("n1", 10)? as u32;
    let r = cfg.f64_or("r", 2.0)?;
    tol.insert("crossing_rel_tol".into(), 1e-9);
    let spec = select_tower_indices(&model, floors, n1, r)?;
    let gaps = gap_ratio(&model, &spec, r)?;
    let artifact = TowerArtifact {
        indices: spec.indices.clone(),
        t: spec.t_gaps.clone(),
        s: spec.s_gaps.clone(),
        gap_excess: spec.gap_excess.clone(),
        ratios: gaps.ratios.clone(),
        bound: gaps.envelopes.clone(),
        direct_bounds: gaps.direct_bounds.clone(),
        exponent_valid: gaps.exponent_valid,
        floors: spec.floors.clone(),
    };
    let json_file = write_file(out, "tower.json", &json_string(&artifact)?)?;
    Ok(ExperimentOutcome {
        experiment: "tower".into(),
        passed: true,
        outputs: vec![json_file.clone()],
        primary_csv: None,
        primary_json: Some(json_file),
    })
}

fn run_tangency(
    cfg: &Config,
    out: &Path,
    tol: &mut BTreeMap<String, f64>,
) -> Result<ExperimentOutcome> {
    cfg.validate_keys(
        &[COMMON_KEYS, MODEL_KEYS, &["n", "max_newton"]].concat(),
        MODEL_PREFIXES,
    )?;
    let model = model_from_config(cfg)?;
    let k = model.global.k;
    let n = cfg.u64_or("n", 6)? as u32;
    let mut opts = TangencyOpts::default();
    opts.max_newton = cfg.usize_or("max_newton", opts.max_newton)?;
    tol.insert("residual_tol".into(), opts.residual_tol);
    tol.insert("derivative_cert_tol".into(), opts.derivative_cert_tol);
    let state = tangency_order_solver(&model, k, n, &opts)?;
    let mut csv = String::from("iteration,residual\n");
    for (i, r) in state.residual_trace.iter().enumerate() {
        csv.push_str(&format!("{i},{r:e}\n"));
    }
    let csv_file = write_file(out, "tangency_trace.csv", &csv)?;
    let json_file = write_file(out, "tangency.json", &json_string(&state)?)?;
    Ok(ExperimentOutcome {
        experiment: "tangency".into(),
        passed: true,
        outputs: vec![csv_file.clone(), json_file.clone()],
        primary_csv: Some(csv_file),
        primary_json: Some(json_file),
    })
}

fn run_polymap(
    cfg: &Config,
    seed: u64,
    out: &Path,
    tol: &mut BTreeMap<String, f64>,
) -> Result<ExperimentOutcome> {
    cfg.validate_keys(
        &[
            COMMON_KEYS,
            &["n_dim", "degree", "k_max", "samples", "margin_tol", "plant"],
        ]
        .concat(),
        &[],
    )?;
    let n_dim = cfg.usize_or("n_dim", 1)?;
    if n_dim != 1 {
        return Err(Error::Schema(
            "the sampling census runs in dimension 1".into(),
        ));
    }
    let margin_tol = cfg.f64_or("margin_tol", 1e-6)?;
    tol.insert("margin_tol".into(), margin_tol);
    let plants = match cfg.get_f64_list("plant")? {
        Some(coeffs) => vec![coeffs],
        None => Vec::new(),
    };
    let mc = McConfig {
        degree: cfg.usize_or("degree", 3)?,
        k_max: cfg.usize_or("k_max", 3)?,
        samples: cfg.usize_or("samples", 1000)?,
        seed: cfg.u64_or("seed", seed)?,
        margin_tol,
        plants,
    };
    let stats = monte_carlo_hyperbolicity(&mc)?;
    let mut csv = String::from("sample,margin\n");
    for (i, m) in stats.margins.iter().enumerate() {
        csv.push_str(&format!("{i},{m:e}\n"));
    }
    let csv_file = write_file(out, "polymap_margins.csv", &csv)?;
    let json_file = write_file(out, "polymap.json", &json_string(&stats)?)?;
    // Random samples must all clear the tolerance; deliberate plants are
    // expected to flag.
    let random_flags = stats
        .flagged
        .iter()
        .filter(|&&i| i < stats.samples)
        .count();
    Ok(ExperimentOutcome {
        experiment: "polymap".into(),
        passed: random_flags == 0,
        outputs: vec![csv_file.clone(), json_file.clone()],
        primary_csv: Some(csv_file),
        primary_json: Some(json_file),
    })
}

fn run_cascade_experiment(
    cfg: &Config,
    seed: u64,
    out: &Path,
    tol: &mut BTreeMap<String, f64>,
) -> Result<ExperimentOutcome> {
    cfg.validate_keys(
        &[
            COMMON_KEYS,
            &["n1", "k", "epsilon", "eta", "a_preset", "a_list", "stages"],
        ]
        .concat(),
        &[],
    )?;
    let preset = cfg.get("a_preset").unwrap_or("list");
    let target = match preset {
        "nn" => TargetSequence::SuperExponential,
        "2n" => TargetSequence::Doubling,
        "list" => {
            let list = cfg
                .get_f64_list("a_list")?
                .ok_or_else(|| Error::Schema("missing required key `a_list`".into()))?;
            TargetSequence::List(list.into_iter().map(|v| v as u64).collect())
        }
        other => {
            return Err(Error::Schema(format!(
                "a_preset must be nn | 2n | list, got `{other}`"
            )))
        }
    };
    let stages = cfg.usize_or("stages", 1)?;
    let stage = CascadeStageSpec {
        n1: cfg.u64_or("n1", 3)? as u32,
        k: cfg.usize_or("k", 5)?,
        epsilon: cfg.f64_or("epsilon", 2.5e-8)?,
        eta: cfg.f64_or("eta", 0.5)?,
    };
    tol.insert("epsilon".into(), stage.epsilon);
    tol.insert("probe_margin_fraction".into(), 0.5);
    let spec = CascadeSpec {
        target,
        stages: vec![stage; stages],
        seed: cfg.u64_or("seed", seed)?,
    };
    let report = run_cascade(&spec)?;
    let passed = report.passed;
    let json_file = write_file(out, "cascade.json", &json_string(&report)?)?;
    Ok(ExperimentOutcome {
        experiment: "cascade".into(),
        passed,
        outputs: vec![json_file.clone()],
        primary_csv: None,
        primary_json: Some(json_file),
    })
}
