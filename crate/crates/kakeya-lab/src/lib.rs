//! Experiment runner: loads a config, runs one pipeline, writes CSV, JSON
//! and SVG artifacts into an output directory and returns a [`RunReport`].

pub mod config;
pub mod plot;

pub use config::ExperimentConfig;
pub use plot::emit_plot;

use config::{DimensionTarget, SettingConfig};
use kakeya::arith::{minkowski_pipeline, proposition_exhaustive, separated_segments};
use kakeya::axiomlab::{
    axiom1_report, axiom5_experiment, check_axiom2_with, check_axiom3, check_axiom4, estimate_volume_exponent_with, Axiom5Grid, Axiom5Mode,
    AxiomReport, PairMode,
};
use kakeya::geometry::{dist_h, Bounds};
use kakeya::kakeyalab::{
    box_dimension, box_dimension_points, common_point_family, extract_bush, perron_construction, weak_type_check, BushOptions,
    DimensionFit, GridField,
};
use kakeya::rng::derive;
use kakeya::settings::{CantorSet, Setting};
use kakeya::KakeyaError;
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Kakeya(#[from] KakeyaError),
}

impl HarnessError {
    /// Process exit status; 1 is reserved for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Axioms,
    Maximal,
    Dimension,
    Bush,
    Arith,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Axioms => "axioms",
            Subcommand::Maximal => "maximal",
            Subcommand::Dimension => "dimension",
            Subcommand::Bush => "bush",
            Subcommand::Arith => "arith",
        }
    }
}

impl FromStr for Subcommand {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Ok(match s {
            "axioms" => Subcommand::Axioms,
            "maximal" => Subcommand::Maximal,
            "dimension" => Subcommand::Dimension,
            "bush" => Subcommand::Bush,
            "arith" => Subcommand::Arith,
            _ => return Err(HarnessError::Usage(format!("unknown subcommand `{s}`"))),
        })
    }
}

/// One pass/fail verdict and the invariant behind it. `pass` is `None` when
/// the check has no target for the setting at hand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub setting: Option<String>,
    pub invariant: String,
    pub pass: Option<bool>,
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub subcommand: Subcommand,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckResult>,
    /// Artifact paths relative to the output directory.
    pub outputs: Vec<String>,
    pub pass: bool,
    pub wall_time_ms: Option<u64>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunReport {
    pub fn report_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}_report.json", self.subcommand.name()))
    }
}

/// Pretty JSON with keys sorted at every level.
pub fn sorted_json<T: Serialize>(value: &T) -> Result<String, HarnessError> {
    let v: Value = serde_json::to_value(value).map_err(|e| HarnessError::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| HarnessError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, HarnessError> {
        let path = self.dir.join(name);
        let io = |e: csv::Error| HarnessError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| HarnessError::Io(e.to_string()))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        std::fs::write(&path, sorted_json(value)?).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn plot(&mut self, csv: &Path, x: &str, y: &str, log_log: bool) -> Result<(), HarnessError> {
        let svg = emit_plot(csv, x, y, log_log)?;
        self.files.push(svg.file_name().expect("file name").to_string_lossy().into_owned());
        Ok(())
    }
}

fn cell<T: Display>(v: T) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

/// Runs `sub` over the config and writes artifacts into `out_dir`.
pub fn run(config: &ExperimentConfig, sub: Subcommand, out_dir: &Path) -> Result<RunReport, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let mut art = Artifacts::new(out_dir)?;
    let settings = config.all_settings();
    if matches!(sub, Subcommand::Axioms | Subcommand::Maximal | Subcommand::Bush) && settings.is_empty() {
        return Err(HarnessError::Usage("settings: at least one setting is required".into()));
    }
    let checks = match sub {
        Subcommand::Axioms => run_axioms(config, &settings, &mut art)?,
        Subcommand::Maximal => run_maximal(config, &settings, &mut art)?,
        Subcommand::Dimension => run_dimension(config, &mut art)?,
        Subcommand::Bush => run_bush(config, &settings, &mut art)?,
        Subcommand::Arith => run_arith(config, &mut art)?,
    };
    let pass = checks.iter().all(|c| c.pass != Some(false));
    let mut report = RunReport {
        subcommand: sub,
        config: config.clone(),
        checks,
        outputs: Vec::new(),
        pass,
        wall_time_ms: None,
        out_dir: out_dir.to_path_buf(),
    };
    let report_name = format!("{}_report.json", sub.name());
    art.files.push(report_name.clone());
    report.outputs = art.files.clone();
    if config.record_timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    let path = out_dir.join(&report_name);
    std::fs::write(&path, sorted_json(&report)?).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    Ok(report)
}

fn axiom_check(r: &AxiomReport, invariant: String) -> CheckResult {
    let mut values: BTreeMap<String, f64> = r.estimates.clone();
    for (k, v) in &r.nominal {
        values.insert(format!("nominal_{k}"), *v);
    }
    CheckResult {
        name: format!("axiom{}", r.axiom),
        setting: Some(r.setting.clone()),
        invariant,
        pass: r.pass,
        values,
        notes: r.diagnostics.clone(),
    }
}

fn skipped(name: String, setting: &Setting, why: String) -> CheckResult {
    CheckResult {
        name,
        setting: Some(setting.name().to_string()),
        invariant: "not applicable".into(),
        pass: None,
        values: BTreeMap::new(),
        notes: vec![why],
    }
}

fn axiom_rows(r: &AxiomReport) -> Vec<Vec<String>> {
    r.rows.iter().map(|w| vec![cell(w.delta), opt(w.beta), opt(w.gamma), cell(w.trial), cell(w.value)]).collect()
}

const ROW_HEADER: [&str; 5] = ["delta", "beta", "gamma", "trial", "value"];

fn run_axioms(cfg: &ExperimentConfig, settings: &[SettingConfig], art: &mut Artifacts) -> Result<Vec<CheckResult>, HarnessError> {
    let mut checks = Vec::new();
    let tol = cfg.tolerance.exponent;
    let d_first = cfg.delta_list[0];
    let d_last = *cfg.delta_list.last().expect("nonempty");
    for (i, sc) in settings.iter().enumerate() {
        let setting = sc.build()?;
        let stem = format!("axioms_{i}_{}", slug(setting.name()));
        for &ax in &cfg.axioms.run {
            let seed = derive(cfg.seed, ((i as u64) << 8) | ax as u64);
            let res = match ax {
                1 => estimate_volume_exponent_with(&setting, &cfg.delta_list, cfg.trials.max(10), cfg.axioms.volume_samples, seed)
                    .and_then(|fit| {
                        let rows: Vec<Vec<String>> = fit.per_delta.iter().map(|(d, m, se)| vec![cell(d), cell(m), cell(se)]).collect();
                        let path = art.csv(&format!("{stem}_volume.csv"), &["delta", "volume", "stderr"], &rows).map_err(io_to_kakeya)?;
                        art.plot(&path, "delta", "volume", true).map_err(io_to_kakeya)?;
                        let r = axiom1_report(&setting, fit, tol);
                        Ok((r, format!("|T̂ − T| ≤ {tol}, r² ≥ 0.98, sub-cap spread ≤ 8")))
                    }),
                2 => check_axiom2_with(&setting, d_first, cfg.trials, cfg.axioms.axiom2_samples, seed).map(|mut r| {
                    let theta = r.estimate("theta").unwrap_or(f64::NAN);
                    let nominal = r.nominal.get("theta").copied().unwrap_or(f64::NAN);
                    let positive =
                        r.estimate("min_ratio_delta").unwrap_or(0.0) > 0.0 && r.estimate("min_ratio_delta_over_4").unwrap_or(0.0) > 0.0;
                    r.pass = Some((theta - nominal).abs() <= tol && positive);
                    (r, format!("|θ̂ − θ| ≤ {tol} from δ and δ/4, positive density ratios"))
                }),
                3 => check_axiom3(&setting, d_first, cfg.axioms.axiom3_pairs.max(50), seed)
                    .map(|r| (r, "fitted diameter constant b ≤ 16".to_string())),
                4 => check_axiom4(&setting, d_last, cfg.trials.max(20), seed, &PairMode::Random, &cfg.axioms.axiom4)
                    .map(|r| (r, format!("cover count N̂ ≤ {}", cfg.axioms.axiom4.n_bar))),
                _ => {
                    let example = matches!(&setting, Setting::HomogeneousKakeya { layers } if layers.m().last().copied().unwrap_or(0) >= 2);
                    let (grid, mode) = if example {
                        (Axiom5Grid::homogeneous_example_default(), Axiom5Mode::HomogeneousExample)
                    } else {
                        (Axiom5Grid::euclidean_default(), Axiom5Mode::Generic)
                    };
                    let inv =
                        if example { "adversarial family: λ̂ ≥ 0.8·s" } else { "|λ̂ − λ| ≤ 0.3 and |α̂ − α| ≤ 0.3" };
                    axiom5_experiment(&setting, &grid, &mode, seed).map(|r| (r, inv.to_string()))
                }
            };
            match res {
                Ok((r, inv)) => {
                    art.csv(&format!("{stem}_axiom{ax}.csv"), &ROW_HEADER, &axiom_rows(&r))?;
                    checks.push(axiom_check(&r, inv));
                }
                Err(KakeyaError::Input(msg)) => checks.push(skipped(format!("axiom{ax}"), &setting, msg)),
                Err(KakeyaError::Sampling(msg)) if ax == 5 => checks.push(skipped(format!("axiom{ax}"), &setting, msg)),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(checks)
}

fn io_to_kakeya(e: HarnessError) -> KakeyaError {
    KakeyaError::Resource(e.to_string())
}

fn run_maximal(cfg: &ExperimentConfig, settings: &[SettingConfig], art: &mut Artifacts) -> Result<Vec<CheckResult>, HarnessError> {
    let mut checks = Vec::new();
    let m = &cfg.maximal;
    for (i, sc) in settings.iter().enumerate() {
        let setting = sc.build()?;
        let n = setting.n();
        let r = m.e_radius;
        let e = GridField::indicator(Bounds::cube(n, -r, r), vec![m.resolution; n], |p| p.iter().map(|x| x * x).sum::<f64>() <= r * r)?;
        let rep = weak_type_check(&setting, &e, &cfg.delta_list, &m.lambda_grid, m.param_samples, derive(cfg.seed, i as u64))?;
        let stem = format!("maximal_{i}_{}", slug(setting.name()));
        let rows: Vec<Vec<String>> =
            rep.rows.iter().map(|w| vec![cell(w.delta), cell(w.lambda), cell(w.lhs), cell(w.rhs), cell(w.ratio)]).collect();
        art.csv(&format!("{stem}.csv"), &["delta", "lambda", "lhs", "rhs", "ratio"], &rows)?;
        let rows: Vec<Vec<String>> = rep.net_sizes.iter().map(|(d, k)| vec![cell(d), cell(1.0 / d), cell(k)]).collect();
        let path = art.csv(&format!("{stem}_net.csv"), &["delta", "inv_delta", "net_size"], &rows)?;
        art.plot(&path, "inv_delta", "net_size", true)?;
        let worst = rep.constants.iter().map(|c| c.1).fold(0.0, f64::max);
        let finite = rep.constants.iter().all(|c| c.1.is_finite());
        let (pass, invariant) = match cfg.tolerance.weak_type_constant {
            Some(cmax) => (finite && worst <= cmax, format!("fitted weak-type constant finite and ≤ {cmax}")),
            None => (finite, "fitted weak-type constant finite (no threshold configured)".to_string()),
        };
        let mut values = BTreeMap::new();
        values.insert("mu_e".into(), rep.mu_e);
        values.insert("max_constant".into(), worst);
        for (d, c) in &rep.constants {
            values.insert(format!("constant_at_{d}"), *c);
        }
        checks.push(CheckResult {
            name: "weak_type".into(),
            setting: Some(setting.name().into()),
            invariant,
            pass: Some(pass),
            values,
            notes: vec![],
        });
    }
    Ok(checks)
}

fn cantor_points(c: &CantorSet) -> Vec<Vec<f64>> {
    let piece = c.piece();
    c.intervals().iter().flat_map(|&a| (0..4).map(move |k| vec![a + k as f64 / 3.0 * piece])).collect()
}

fn run_dimension(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Vec<CheckResult>, HarnessError> {
    let mut checks = Vec::new();
    let tol = cfg.tolerance.dimension;
    for (j, target) in cfg.dimension.targets.iter().enumerate() {
        let stem = format!("dimension_{j}_{}", target.name());
        let pick = |d: &Option<Vec<f64>>| d.clone().unwrap_or_else(|| cfg.delta_list.clone());
        let fitted: Option<(DimensionFit, f64)> = match target {
            DimensionTarget::UnitCube { n, delta_list } => {
                let f = box_dimension(
                    |p: &[f64]| p.iter().all(|x| (0.0..=1.0).contains(x)),
                    &Bounds::cube(*n, 0.0, 1.0),
                    None,
                    &pick(delta_list),
                )?;
                Some((f, *n as f64))
            }
            DimensionTarget::Segment { layers, delta_list } => {
                let n = layers.n();
                let pts: Vec<Vec<f64>> = (0..=(1usize << 16))
                    .map(|k| {
                        let mut p = vec![0.0; n];
                        p[n - 1] = k as f64 / 65536.0;
                        p
                    })
                    .collect();
                let f = box_dimension_points(&pts, Some(layers), &pick(delta_list))?;
                Some((f, layers.degree_of(n - 1) as f64))
            }
            DimensionTarget::Cantor { ratio, depth, delta_list } => {
                let c = CantorSet::new(*ratio, *depth)?;
                let f = box_dimension_points(&cantor_points(&c), None, &pick(delta_list))?;
                Some((f, c.dimension()))
            }
            DimensionTarget::Ball { layers, delta_list } => {
                let n = layers.n();
                let z = vec![0.0; n];
                let f =
                    box_dimension(|p: &[f64]| dist_h(p, &z, layers) <= 1.0, &Bounds::cube(n, -1.0, 1.0), Some(layers), &pick(delta_list))?;
                Some((f, layers.q() as f64))
            }
            DimensionTarget::Perron { depth } => {
                let mut rows = Vec::new();
                let mut areas = Vec::new();
                for d in 1..=*depth {
                    let t = perron_construction(d)?;
                    let a = t.area();
                    rows.push(vec![cell(d), cell(a), cell(t.alpha)]);
                    areas.push(a);
                }
                let path = art.csv(&format!("{stem}.csv"), &["depth", "area", "alpha"], &rows)?;
                art.plot(&path, "depth", "area", false)?;
                let decreasing = areas.windows(2).skip(1).all(|w| w[1] < w[0]);
                let mut values = BTreeMap::new();
                for (d, a) in areas.iter().enumerate() {
                    values.insert(format!("area_depth_{}", d + 1), *a);
                }
                checks.push(CheckResult {
                    name: "perron_area".into(),
                    setting: None,
                    invariant: "union area strictly decreasing from depth 2 on".into(),
                    pass: Some(decreasing),
                    values,
                    notes: vec![],
                });
                None
            }
        };
        if let Some((f, expected)) = fitted {
            let rows: Vec<Vec<String>> = f.counts.iter().map(|(d, k)| vec![cell(d), cell(1.0 / d), cell(k)]).collect();
            let path = art.csv(&format!("{stem}.csv"), &["delta", "inv_delta", "count"], &rows)?;
            art.plot(&path, "inv_delta", "count", true)?;
            let dim = f.dimension();
            let mut values = BTreeMap::new();
            values.insert("dimension".into(), dim);
            values.insert("expected".into(), expected);
            values.insert("r_squared".into(), f.regression.r_squared);
            checks.push(CheckResult {
                name: format!("box_dimension_{}", target.name()),
                setting: None,
                invariant: format!("|dimension − expected| ≤ {tol}"),
                pass: Some((dim - expected).abs() <= tol),
                values,
                notes: vec![],
            });
        }
    }
    Ok(checks)
}

fn run_bush(cfg: &ExperimentConfig, settings: &[SettingConfig], art: &mut Artifacts) -> Result<Vec<CheckResult>, HarnessError> {
    let mut checks = Vec::new();
    let b = &cfg.bush;
    let opts = BushOptions { points_per_tube: b.points_per_tube, volume_samples: b.volume_samples, e_samples: b.e_samples };
    let cmax = cfg.tolerance.bush_constant;
    for (i, sc) in settings.iter().enumerate() {
        let setting = sc.build()?;
        let n = setting.n();
        let stem = format!("bush_{i}_{}", slug(setting.name()));
        let mut rows = Vec::new();
        let mut certs = Vec::new();
        for (k, &delta) in cfg.delta_list.iter().enumerate() {
            let seed = derive(cfg.seed, ((i as u64) << 16) | k as u64);
            let tubes = common_point_family(&setting, delta, &vec![0.0; n], seed)?;
            let (tt, ss) = (tubes.clone(), setting.clone());
            let e = move |p: &[f64]| tt.iter().any(|t| ss.tube_contains(t, p));
            let c = extract_bush(&setting, &tubes, e, &Bounds::cube(n, -1.5, 1.5), b.lambda, derive(seed, 7), &opts)?;
            rows.push(vec![
                cell(delta),
                cell(1.0 / delta),
                cell(tubes.len()),
                cell(c.m),
                cell(c.selected.len()),
                cell(c.shared_hits),
                cell(c.lne1_constant),
                cell(c.lne2_constant),
            ]);
            let mut values = BTreeMap::new();
            values.insert("delta".into(), delta);
            values.insert("tubes".into(), tubes.len() as f64);
            values.insert("multiplicity".into(), c.m as f64);
            values.insert("selected".into(), c.selected.len() as f64);
            values.insert("shared_hits".into(), c.shared_hits as f64);
            values.insert("lne1_constant".into(), c.lne1_constant);
            values.insert("lne2_constant".into(), c.lne2_constant);
            checks.push(CheckResult {
                name: "bush".into(),
                setting: Some(setting.name().into()),
                invariant: format!("disjoint selected portions and chain constants ≤ {cmax}"),
                pass: Some(c.holds(cmax)),
                values,
                notes: c.warnings.clone(),
            });
            certs.push(c);
        }
        let path = art.csv(
            &format!("{stem}.csv"),
            &["delta", "inv_delta", "tubes", "multiplicity", "selected", "shared_hits", "lne1_constant", "lne2_constant"],
            &rows,
        )?;
        art.plot(&path, "inv_delta", "selected", true)?;
        art.json(&format!("{stem}_certificates.json"), &certs)?;
    }
    Ok(checks)
}

fn run_arith(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Vec<CheckResult>, HarnessError> {
    let a = &cfg.arith;
    let mut checks = Vec::new();
    let prop = proposition_exhaustive(a.n_max, a.universe_size, cfg.seed)?;
    art.json("arith_proposition.json", &prop)?;
    let mut values = BTreeMap::new();
    values.insert("checked_count".into(), prop.checked_count as f64);
    values.insert("counterexamples".into(), prop.counterexamples.len() as f64);
    checks.push(CheckResult {
        name: "proposition".into(),
        setting: None,
        invariant: "#diffs ≤ N^(11/6) with N = max(|A|, |B|, #sums) on every checked triple".into(),
        pass: Some(prop.counterexamples.is_empty()),
        values,
        notes: if prop.exhaustive { vec![] } else { vec![format!("random sample of {} triples, seed {}", prop.checked_count, cfg.seed)] },
    });
    let layers = &a.layers;
    let gap = layers.q() as f64 - layers.s() as f64;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (k, &delta) in cfg.delta_list.iter().enumerate() {
        let segs = separated_segments(layers, delta, derive(cfg.seed, k as u64))?;
        let r = minkowski_pipeline(&segs, delta, layers, a.c, a.levels)?;
        let full_span = r.levels == [0.0, 0.5, 1.0];
        let floor = 0.5 * delta.powf(-gap);
        let diffs_ok = !full_span || r.diffs as f64 >= floor;
        rows.push(vec![
            cell(delta),
            cell(1.0 / delta),
            cell(r.directions),
            cell(r.sums),
            cell(r.diffs),
            cell(r.k_half),
            cell(r.hypothesis_met),
            cell(r.proposition_holds),
        ]);
        let mut values = BTreeMap::new();
        values.insert("delta".into(), delta);
        values.insert("diffs".into(), r.diffs as f64);
        values.insert("diffs_floor".into(), floor);
        values.insert("sums".into(), r.sums as f64);
        values.insert("n_value".into(), r.n_value as f64);
        checks.push(CheckResult {
            name: "minkowski".into(),
            setting: None,
            invariant: "proposition holds on the slices, no contradiction, and #diffs ≥ 0.5·δ^(s−Q) on the full span".into(),
            pass: Some(r.proposition_holds && !r.contradiction && diffs_ok),
            values,
            notes: vec![r.note.clone()],
        });
        reports.push(r);
    }
    let path = art.csv(
        "arith_minkowski.csv",
        &["delta", "inv_delta", "directions", "sums", "diffs", "k_half", "hypothesis_met", "proposition_holds"],
        &rows,
    )?;
    art.plot(&path, "inv_delta", "diffs", true)?;
    art.json("arith_minkowski.json", &reports)?;
    Ok(checks)
}
