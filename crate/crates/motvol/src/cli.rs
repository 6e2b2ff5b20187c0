//! Config-driven entry point: define sets and group elements in a single
//! JSON document, run measure / invariance / identity / chart-independence /
//! oracle / restriction tasks, and emit a deterministic structured report.
//!
//! Exit codes: 0 all checks pass; 1 a check or oracle comparison failed;
//! 2 schema violation; 3 unsupported constraint; 4 divergence.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::biggroup::{
    canonical_restriction_check, chart_independence_check, decompose_translator, factor_product,
    haar_measure, invariance_check, invariance_identity_check, parse_mat2_with,
    sample_sl2_elements, BigCellChart, ChartKind, EntryCond, EntrySet, GroupKind, GroupSpec,
    OmegaSet, TranslationFactor,
};
use crate::cylinder::{parse_condition, CylinderSet};
use crate::laurent::{parse_laurent, FieldTag};
use crate::oracle;
use crate::ring::MotClass;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub group: GroupCfg,
    #[serde(default)]
    pub sets: BTreeMap<String, SetCfg>,
    #[serde(default)]
    pub elements: BTreeMap<String, ElementCfg>,
    pub tasks: Vec<TaskCfg>,
    #[serde(default)]
    pub output: OutputCfg,
}

#[derive(Deserialize, Debug, Clone, Copy)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupCfg {
    Sl2,
    Additive { d: usize },
    Torus { m: usize },
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum SetCfg {
    Cylinder {
        dim: usize,
        #[serde(default)]
        polebound: i64,
        cond: String,
    },
    Entry {
        entry: EntryCfg,
    },
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum EntryCfg {
    Named(String),
    Combo {
        #[serde(default)]
        unit: Option<ComboCfg>,
        #[serde(default)]
        ord_at_least: Option<ComboOrdCfg>,
    },
}

#[derive(Deserialize, Debug)]
pub struct ComboCfg {
    pub ca: String,
    pub cc: String,
}

#[derive(Deserialize, Debug)]
pub struct ComboOrdCfg {
    pub ca: String,
    pub cc: String,
    pub min: i64,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum ElementCfg {
    Matrix(String),
    Factors { factors: Vec<FactorCfg> },
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum FactorCfg {
    Named(String),
    Diag { diag: String },
    Lower { lower: String },
    Upper { upper: String },
}

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskCfg {
    /// Volume of a set (weighted by the chart density for matrix groups).
    Measure { set: String },
    /// Two-sided translation-invariance check.
    Invariance { set: String, element: String },
    /// The invariant-form identity p(h) det J = p for one element or a
    /// seeded random suite.
    Identity {
        #[serde(default)]
        element: Option<String>,
        #[serde(default)]
        random: Option<usize>,
    },
    /// Measure a chart-neutral set through all three charts.
    ChartIndependence { set: String },
    /// Brute-force class comparison over finite fields.
    Oracle {
        set: String,
        #[serde(default)]
        levels: Option<Vec<i64>>,
        #[serde(default)]
        q: Option<Vec<u64>>,
    },
    /// Canonical-restriction verification for SL2.
    Restriction {
        #[serde(default = "default_m_max")]
        m_max: usize,
        #[serde(default = "default_q")]
        q: Vec<u64>,
    },
}

fn default_m_max() -> usize {
    2
}
fn default_q() -> Vec<u64> {
    vec![2, 3]
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    #[serde(default = "default_cutoff")]
    pub cutoff: i64,
    #[serde(default = "default_qlist")]
    pub q_list: Vec<i64>,
}

fn default_cutoff() -> i64 {
    -8
}
fn default_qlist() -> Vec<i64> {
    vec![2, 3, 5]
}

impl Default for OutputCfg {
    fn default() -> Self {
        OutputCfg {
            cutoff: default_cutoff(),
            q_list: default_qlist(),
        }
    }
}

// ---------------------------------------------------------------------------
// Report schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Debug)]
pub struct Report {
    pub tasks: Vec<TaskReport>,
    pub summary: Summary,
}

#[derive(Serialize, Debug)]
pub struct TaskReport {
    pub kind: String,
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub specializations: BTreeMap<String, String>,
    pub pass: bool,
    pub details: Vec<String>,
}

#[derive(Serialize, Debug)]
pub struct Summary {
    pub tasks: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Options from the command line, applied on top of the config.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub parallel: bool,
    pub cutoff: Option<i64>,
    pub seed: u64,
    pub precision: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            parallel: false,
            cutoff: None,
            seed: 7,
            precision: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct Env {
    group: GroupSpec,
    chart: BigCellChart,
    sets: BTreeMap<String, SetValue>,
    elements: BTreeMap<String, ElementValue>,
    cutoff: i64,
    q_list: Vec<i64>,
    seed: u64,
    precision: usize,
}

enum SetValue {
    Cylinder(CylinderSet),
    Entry(EntrySet),
}

enum ElementValue {
    Matrix(crate::biggroup::Mat2),
    Factors(Vec<TranslationFactor>),
}

fn group_spec(cfg: GroupCfg) -> Result<GroupSpec> {
    match cfg {
        GroupCfg::Sl2 => Ok(GroupSpec::sl2()),
        GroupCfg::Additive { d } => GroupSpec::additive(d),
        GroupCfg::Torus { m } => GroupSpec::torus(m),
    }
}

fn chart_vars(group: &GroupSpec) -> Vec<(String, usize)> {
    match group.kind {
        GroupKind::Sl2 => vec![
            ("x".to_string(), 0usize),
            ("y".to_string(), 1),
            ("s".to_string(), 2),
        ],
        GroupKind::Additive { d } => (0..d).map(|i| (format!("x{i}"), i)).collect(),
        GroupKind::Torus { m } => (0..m).map(|i| (format!("s{i}"), i)).collect(),
    }
}

fn build_env(cfg: &Config, opts: &RunOptions) -> Result<Env> {
    let group = group_spec(cfg.group)?;
    let chart = BigCellChart::standard(group);
    let field = FieldTag::Rationals;
    let vars = chart_vars(&group);
    let var_refs: Vec<(&str, usize)> = vars.iter().map(|(n, i)| (n.as_str(), *i)).collect();
    let mut sets = BTreeMap::new();
    for (name, sc) in &cfg.sets {
        let v = match sc {
            SetCfg::Cylinder {
                dim,
                polebound,
                cond,
            } => {
                if *dim != group.d {
                    return Err(Error::Parse(format!(
                        "set {name:?}: dim {dim} does not match the group dimension {}",
                        group.d
                    )));
                }
                let c = parse_condition(cond, &var_refs)?;
                SetValue::Cylinder(CylinderSet::new(*dim, *polebound, c)?)
            }
            SetCfg::Entry { entry } => {
                if group.kind != GroupKind::Sl2 {
                    return Err(Error::Parse(format!(
                        "set {name:?}: entry sets exist for SL2 only"
                    )));
                }
                SetValue::Entry(build_entry(entry, field)?)
            }
        };
        sets.insert(name.clone(), v);
    }
    let precision = opts
        .precision
        .unwrap_or(crate::laurent::DEFAULT_WORKING_PRECISION);
    let mut elements = BTreeMap::new();
    for (name, ec) in &cfg.elements {
        let v = match ec {
            ElementCfg::Matrix(lit) => ElementValue::Matrix(parse_mat2_with(lit, field, precision)?),
            ElementCfg::Factors { factors } => {
                let fs: Result<Vec<TranslationFactor>> =
                    factors.iter().map(|f| build_factor(f, field)).collect();
                ElementValue::Factors(fs?)
            }
        };
        elements.insert(name.clone(), v);
    }
    Ok(Env {
        group,
        chart,
        sets,
        elements,
        cutoff: opts.cutoff.unwrap_or(cfg.output.cutoff),
        q_list: cfg.output.q_list.clone(),
        seed: opts.seed,
        precision,
    })
}

fn build_entry(cfg: &EntryCfg, field: FieldTag) -> Result<EntrySet> {
    match cfg {
        EntryCfg::Named(n) => match n.as_str() {
            "full" => Ok(EntrySet::full_integral()),
            "cell_arcs" => Ok(EntrySet::cell_arcs()),
            other => {
                if let Some(rest) = other.strip_prefix("w21_ord_at_least:") {
                    let m: i64 = rest
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad entry set {other:?}")))?;
                    Ok(EntrySet::lower_left_ord_at_least(m))
                } else {
                    Err(Error::Parse(format!("unknown entry set {other:?}")))
                }
            }
        },
        EntryCfg::Combo { unit, ord_at_least } => {
            let mut conds = Vec::new();
            if let Some(u) = unit {
                conds.push(EntryCond::ComboUnit {
                    ca: parse_laurent(&u.ca, field)?,
                    cc: parse_laurent(&u.cc, field)?,
                });
            }
            if let Some(o) = ord_at_least {
                conds.push(EntryCond::ComboOrdAtLeast {
                    ca: parse_laurent(&o.ca, field)?,
                    cc: parse_laurent(&o.cc, field)?,
                    min: o.min,
                });
            }
            if conds.is_empty() {
                return Err(Error::Parse("empty entry-set description".into()));
            }
            Ok(EntrySet { conds })
        }
    }
}

fn build_factor(cfg: &FactorCfg, field: FieldTag) -> Result<TranslationFactor> {
    Ok(match cfg {
        FactorCfg::Named(n) if n == "weyl" => TranslationFactor::Weyl,
        FactorCfg::Named(n) => return Err(Error::Parse(format!("unknown factor {n:?}"))),
        FactorCfg::Diag { diag } => TranslationFactor::Diag(parse_laurent(diag, field)?),
        FactorCfg::Lower { lower } => TranslationFactor::Lower(parse_laurent(lower, field)?),
        FactorCfg::Upper { upper } => TranslationFactor::Upper(parse_laurent(upper, field)?),
    })
}

fn omega_of(env: &Env, name: &str) -> Result<OmegaSet> {
    match env.sets.get(name) {
        None => Err(Error::Parse(format!("unknown set {name:?}"))),
        Some(SetValue::Cylinder(c)) => OmegaSet::chart(env.group, c.clone()),
        Some(SetValue::Entry(e)) => Ok(OmegaSet::entry(e.clone())),
    }
}

fn render_value(env: &Env, v: &MotClass) -> (String, String, BTreeMap<String, String>) {
    let text = v.to_string();
    let expansion = v.expand(env.cutoff).to_string();
    let mut specs = BTreeMap::new();
    for q in &env.q_list {
        if let Ok(val) = v.specialize(*q) {
            specs.insert(q.to_string(), val.to_string());
        }
    }
    (text, expansion, specs)
}

fn run_task(env: &Env, task: &TaskCfg) -> Result<TaskReport> {
    match task {
        TaskCfg::Measure { set } => {
            let omega = omega_of(env, set)?;
            let r = haar_measure(&omega, &env.chart)?;
            let (value, expansion, specializations) = render_value(env, &r.value);
            let mut details: Vec<String> = r
                .decomposition
                .iter()
                .map(|(l, v)| format!("{l}: {v}"))
                .collect();
            if let Some((l, v)) = &r.tail {
                details.push(format!("{l}: {v}"));
            }
            Ok(TaskReport {
                kind: "measure".into(),
                inputs: BTreeMap::from([("set".to_string(), set.clone())]),
                value: Some(value),
                expansion: Some(expansion),
                specializations,
                pass: true,
                details,
            })
        }
        TaskCfg::Invariance { set, element } => {
            let omega = omega_of(env, set)?;
            let factors = match env.elements.get(element) {
                Some(ElementValue::Factors(f)) => f.clone(),
                Some(ElementValue::Matrix(m)) => decompose_translator(m)?,
                None => return Err(Error::Parse(format!("unknown element {element:?}"))),
            };
            let r = invariance_check(&omega, &factors, &env.chart)?;
            let (value, expansion, specializations) = render_value(env, &r.lhs);
            let mut details = vec![
                format!("route: {}", r.route),
                format!("lhs: {}", r.lhs),
                format!("rhs: {}", r.rhs),
            ];
            for (l, v) in &r.rhs_decomposition {
                details.push(format!("translate {l}: {v}"));
            }
            Ok(TaskReport {
                kind: "invariance".into(),
                inputs: BTreeMap::from([
                    ("set".to_string(), set.clone()),
                    ("element".to_string(), element.clone()),
                ]),
                value: Some(value),
                expansion: Some(expansion),
                specializations,
                pass: r.equal,
                details,
            })
        }
        TaskCfg::Identity { element, random } => {
            let field = FieldTag::Rationals;
            let mut mats: Vec<(String, crate::biggroup::Mat2)> = Vec::new();
            if let Some(name) = element {
                let m = match env.elements.get(name) {
                    Some(ElementValue::Matrix(m)) => m.clone(),
                    Some(ElementValue::Factors(fs)) => factor_product(fs, field)?,
                    None => return Err(Error::Parse(format!("unknown element {name:?}"))),
                };
                mats.push((name.clone(), m));
            }
            if let Some(count) = random {
                for (i, m) in sample_sl2_elements(env.seed, *count).into_iter().enumerate() {
                    mats.push((format!("random[{i}]"), m));
                }
            }
            if mats.is_empty() {
                return Err(Error::Parse(
                    "identity task needs an element or a random count".into(),
                ));
            }
            let mut pass = true;
            let mut details = Vec::new();
            if env.precision != crate::laurent::DEFAULT_WORKING_PRECISION {
                details.push(format!("working precision {}", env.precision));
            }
            for (label, m) in &mats {
                let r = invariance_identity_check(m, &env.chart)?;
                if !r.holds {
                    pass = false;
                    details.push(format!(
                        "{label}: FAILED, residue {}",
                        r.witness.clone().unwrap_or_default()
                    ));
                } else if r.exact {
                    details.push(format!("{label}: exact"));
                } else {
                    details.push(format!(
                        "{label}: holds up to t-precision {}",
                        r.qualified_precision.unwrap_or(i64::MAX)
                    ));
                }
            }
            Ok(TaskReport {
                kind: "identity".into(),
                inputs: BTreeMap::from([(
                    "elements".to_string(),
                    mats.iter()
                        .map(|(l, _)| l.clone())
                        .collect::<Vec<_>>()
                        .join(","),
                )]),
                value: None,
                expansion: None,
                specializations: BTreeMap::new(),
                pass,
                details,
            })
        }
        TaskCfg::ChartIndependence { set } => {
            let omega = omega_of(env, set)?;
            let charts = [
                BigCellChart::sl2(ChartKind::Standard),
                BigCellChart::sl2(ChartKind::WeylSwapped),
                BigCellChart::sl2(ChartKind::Conjugated),
            ];
            let r = chart_independence_check(&omega, &charts)?;
            let (value, expansion, specializations) = render_value(env, &r.values[0].1);
            let details = r
                .values
                .iter()
                .map(|(k, v)| format!("{k:?}: {v}"))
                .collect();
            Ok(TaskReport {
                kind: "chart_independence".into(),
                inputs: BTreeMap::from([("set".to_string(), set.clone())]),
                value: Some(value),
                expansion: Some(expansion),
                specializations,
                pass: r.equal,
                details,
            })
        }
        TaskCfg::Oracle { set, levels, q } => {
            let cyl = match env.sets.get(set) {
                Some(SetValue::Cylinder(c)) => c.clone(),
                Some(SetValue::Entry(_)) => {
                    return Err(Error::Parse(
                        "oracle tasks check cylinder sets; use the restriction task for SL2"
                            .into(),
                    ))
                }
                None => return Err(Error::Parse(format!("unknown set {set:?}"))),
            };
            let shifted = cyl.shift(cyl.pole_bound())?;
            let base = shifted.stable_level();
            let levels = levels
                .clone()
                .unwrap_or_else(|| (base..=base + 2).collect());
            let qs = q.clone().unwrap_or_else(|| vec![2, 3, 5]);
            let mut pass = true;
            let mut details = Vec::new();
            for m in &levels {
                for qq in &qs {
                    let m = (*m).max(base);
                    match oracle::check_class(&shifted, m, *qq) {
                        Ok(true) => details.push(format!("m={m} q={qq}: ok")),
                        Ok(false) => {
                            pass = false;
                            details.push(format!("m={m} q={qq}: MISMATCH"));
                        }
                        Err(Error::BudgetExceeded(_)) => {
                            details.push(format!("m={m} q={qq}: skipped (budget)"));
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(TaskReport {
                kind: "oracle".into(),
                inputs: BTreeMap::from([("set".to_string(), set.clone())]),
                value: None,
                expansion: None,
                specializations: BTreeMap::new(),
                pass,
                details,
            })
        }
        TaskCfg::Restriction { m_max, q } => {
            let report = canonical_restriction_check(*m_max, q, &env.chart)?;
            let pass = report.passed();
            let details = report
                .lines
                .iter()
                .map(|l| {
                    format!(
                        "{}: {} ({})",
                        l.label,
                        if l.passed { "ok" } else { "FAILED" },
                        l.detail
                    )
                })
                .collect();
            Ok(TaskReport {
                kind: "restriction".into(),
                inputs: BTreeMap::from([
                    ("m_max".to_string(), m_max.to_string()),
                    ("q".to_string(), format!("{q:?}")),
                ]),
                value: None,
                expansion: None,
                specializations: BTreeMap::new(),
                pass,
                details,
            })
        }
    }
}

/// Execute a parsed config; the report is deterministic for identical
/// configs and options.
pub fn run_config(cfg: &Config, opts: &RunOptions) -> Result<(Report, i32)> {
    let env = build_env(cfg, opts)?;
    let results: Vec<Result<TaskReport>> = if opts.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cfg
                .tasks
                .iter()
                .map(|t| scope.spawn(|| run_task(&env, t)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("task thread panicked"))
                .collect()
        })
    } else {
        cfg.tasks.iter().map(|t| run_task(&env, t)).collect()
    };
    let mut tasks = Vec::new();
    let mut exit = 0i32;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => {
                if !t.pass && exit == 0 {
                    exit = 1;
                }
                tasks.push(t);
            }
            Err(e) => {
                let code = match &e {
                    Error::UnsupportedConstraint(_) => 3,
                    Error::Divergence(_) | Error::PatternMismatch(_) => 4,
                    Error::OracleMismatch(_) => 1,
                    _ => 2,
                };
                exit = exit.max(code);
                tasks.push(TaskReport {
                    kind: format!("task[{i}]"),
                    inputs: BTreeMap::new(),
                    value: None,
                    expansion: None,
                    specializations: BTreeMap::new(),
                    pass: false,
                    details: vec![format!("error: {e}")],
                });
            }
        }
    }
    let passed = tasks.iter().filter(|t| t.pass).count();
    let summary = Summary {
        tasks: tasks.len(),
        passed,
        failed: tasks.len() - passed,
    };
    Ok((Report { tasks, summary }, exit))
}

/// Parse and execute a config document given as a JSON string.
pub fn run_str(config: &str, opts: &RunOptions) -> (String, i32) {
    let cfg: Config = match serde_json::from_str(config) {
        Ok(c) => c,
        Err(e) => {
            return (
                serde_json::to_string_pretty(&serde_json::json!({
                    "error": format!("schema violation: {e}"),
                }))
                .expect("serializable"),
                2,
            )
        }
    };
    match run_config(&cfg, opts) {
        Ok((report, code)) => (
            serde_json::to_string_pretty(&report).expect("serializable"),
            code,
        ),
        Err(e) => {
            let code = match &e {
                Error::UnsupportedConstraint(_) => 3,
                Error::Divergence(_) | Error::PatternMismatch(_) => 4,
                _ => 2,
            };
            (
                serde_json::to_string_pretty(&serde_json::json!({
                    "error": e.to_string(),
                }))
                .expect("serializable"),
                code,
            )
        }
    }
}

// ---------------------------------------------------------------------------
// Binary entry point
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "motvol",
    about = "Exact motivic volumes on loop spaces: measures, invariance checks, finite-field oracles"
)]
struct Args {
    /// Path to the JSON config document.
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run independent tasks concurrently (deterministic report assembly).
    #[arg(long)]
    parallel: bool,
    /// Laurent working-precision override.
    #[arg(long)]
    precision: Option<usize>,
    /// Expansion cutoff override for reported values.
    #[arg(long)]
    cutoff: Option<i64>,
    /// Seed for randomized suites.
    #[arg(long)]
    seed: Option<u64>,
}

/// CLI entry point; returns the process exit code.
pub fn main() -> i32 {
    let args = Args::parse();
    let config = match std::fs::read_to_string(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return 2;
        }
    };
    let opts = RunOptions {
        parallel: args.parallel,
        cutoff: args.cutoff,
        seed: args.seed.unwrap_or(7),
        precision: args.precision,
    };
    let (report, code) = run_str(&config, &opts);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, report + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(lock, "{report}");
        }
    }
    code
}
