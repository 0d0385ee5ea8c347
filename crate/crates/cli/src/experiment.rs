//! Batch runs over instance specs and seeds, written as CSV.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use hc_core::instances::{InstanceSpec, OvmeCase};
use hc_core::solver::{self, DEFAULT_BETA};
use hc_core::sparsify::SparsifyConfig;
use hc_core::stream::{stream_hc, EdgeStream, StreamConfig, StreamOrder};
use hc_core::{CutFinder, FinderKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Offline,
    Streaming,
}

fn default_epsilon() -> f64 {
    0.2
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_finder() -> FinderKind {
    FinderKind::SpectralRefine
}

fn default_restarts() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub instances: Vec<InstanceSpec>,
    pub pipeline: Pipeline,
    /// Every instance runs once per seed. The seed replaces the instance's
    /// own seed and drives the cut finder and the sparsifier.
    pub seeds: Vec<u64>,
    pub output: String,
    /// Wall-clock times break byte-identical reruns, so they are opt-in.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_finder")]
    pub finder: FinderKind,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Row {
    pub instance_id: usize,
    pub family: String,
    pub case: String,
    pub seed: u64,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub cost: Option<f64>,
    pub lower_bound: Option<f64>,
    /// Cost over the cost of the companion case with the same parameters
    /// and seed (NOC case 1 over case 2, OvME yes over no).
    pub ratio: Option<f64>,
    pub words_peak: Option<usize>,
    pub passes: Option<usize>,
    pub wall_time_ms: Option<f64>,
    pub status: String,
}

pub const HEADER: [&str; 14] = [
    "instance_id",
    "family",
    "case",
    "seed",
    "n",
    "k",
    "t",
    "cost",
    "lower_bound",
    "ratio",
    "words_peak",
    "passes",
    "wall_time_ms",
    "status",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl Row {
    fn record(&self) -> Vec<String> {
        vec![
            self.instance_id.to_string(),
            self.family.clone(),
            self.case.clone(),
            self.seed.to_string(),
            opt(&self.n),
            opt(&self.k),
            opt(&self.t),
            opt(&self.cost),
            opt(&self.lower_bound),
            opt(&self.ratio),
            opt(&self.words_peak),
            opt(&self.passes),
            opt(&self.wall_time_ms),
            self.status.clone(),
        ]
    }
}

fn family(spec: &InstanceSpec) -> String {
    serde_json::to_value(spec)
        .ok()
        .and_then(|v| v.get("family").and_then(|f| f.as_str()).map(String::from))
        .unwrap_or_default()
}

/// `(case label, k, t, companion key, is the numerator case)`.
fn labels(spec: &InstanceSpec) -> (String, Option<usize>, Option<usize>, Option<String>, bool) {
    match spec {
        InstanceSpec::Noc { n, k, case } => (
            case.to_string(),
            Some(*k),
            None,
            Some(format!("noc/{n}/{k}")),
            *case == 1,
        ),
        InstanceSpec::Ovme { n, k, t, case, .. } => {
            let label = match case {
                OvmeCase::Yes => "yes",
                OvmeCase::No => "no",
            };
            (
                label.into(),
                Some(*k),
                Some(*t),
                Some(format!("ovme/{n}/{k}/{t}")),
                *case == OvmeCase::Yes,
            )
        }
        _ => (String::new(), None, None, None, false),
    }
}

fn finder(cfg: &ExperimentConfig, seed: u64) -> CutFinder {
    match cfg.finder {
        FinderKind::Exact => CutFinder::exact(),
        FinderKind::SpectralRefine => CutFinder::spectral(seed),
        FinderKind::RandomRestart => CutFinder::random_restart(seed, cfg.restarts),
    }
}

fn run_one(cfg: &ExperimentConfig, spec: &InstanceSpec, seed: u64, row: &mut Row) -> hc_core::Result<()> {
    let start = Instant::now();
    let g = spec.with_seed(seed).generate()?.graph;
    row.n = Some(g.n());
    let f = finder(cfg, seed);
    match cfg.pipeline {
        Pipeline::Offline => {
            let rep = solver::solve(&g, cfg.beta, &f)?;
            row.cost = Some(rep.cost);
            row.lower_bound = Some(rep.lower_bound);
            row.words_peak = Some(rep.metrics.words_peak);
            row.passes = Some(rep.metrics.passes);
        }
        Pipeline::Streaming => {
            let scfg = StreamConfig {
                epsilon: cfg.epsilon,
                beta: cfg.beta,
                finder: f,
                sparsify: SparsifyConfig::default(),
                seed,
            };
            let mut stream = EdgeStream::from_graph(&g, &StreamOrder::Shuffled(seed))?;
            let out = stream_hc(&mut stream, &scfg, Some(&g))?;
            row.cost = out.cost_full;
            row.lower_bound = Some(out.report.lower_bound);
            row.words_peak = Some(out.report.metrics.words_peak);
            row.passes = Some(out.report.metrics.passes);
        }
    }
    if cfg.record_timing {
        row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(())
}

/// All rows in seed-major, instance order. Failures become rows with an
/// error status.
pub fn run(cfg: &ExperimentConfig) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut companions: Vec<(usize, String, bool)> = Vec::new();
    for &seed in &cfg.seeds {
        for (id, spec) in cfg.instances.iter().enumerate() {
            let (case, k, t, key, numerator) = labels(spec);
            let mut row = Row {
                instance_id: id,
                family: family(spec),
                case,
                seed,
                k,
                t,
                ..Row::default()
            };
            row.status = match run_one(cfg, spec, seed, &mut row) {
                Ok(()) => "ok".into(),
                Err(e) => format!("error: {e}"),
            };
            if let Some(key) = key {
                companions.push((rows.len(), format!("{key}/{seed}"), numerator));
            }
            rows.push(row);
        }
    }
    let mut denominators: HashMap<&str, f64> = HashMap::new();
    for (idx, key, numerator) in &companions {
        if let (false, Some(c)) = (*numerator, rows[*idx].cost) {
            denominators.entry(key.as_str()).or_insert(c);
        }
    }
    for (idx, key, numerator) in &companions {
        if *numerator {
            if let (Some(c), Some(d)) = (rows[*idx].cost, denominators.get(key.as_str())) {
                rows[*idx].ratio = Some(c / d);
            }
        }
    }
    rows
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(instances: Vec<InstanceSpec>) -> ExperimentConfig {
        ExperimentConfig {
            name: "t".into(),
            instances,
            pipeline: Pipeline::Offline,
            seeds: vec![1, 2],
            output: "-".into(),
            record_timing: false,
            epsilon: 0.2,
            beta: DEFAULT_BETA,
            finder: FinderKind::SpectralRefine,
            restarts: 4,
        }
    }

    #[test]
    fn empty_list_gives_header_only() {
        let cfg = config(vec![]);
        let mut buf = Vec::new();
        write_csv(&run(&cfg), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn ratio_pairs_companion_cases() {
        let cfg = config(vec![
            InstanceSpec::Ovme {
                n: 64,
                k: 8,
                t: 2,
                case: OvmeCase::Yes,
                seed: 0,
            },
            InstanceSpec::Ovme {
                n: 64,
                k: 8,
                t: 2,
                case: OvmeCase::No,
                seed: 0,
            },
            InstanceSpec::Cycle { n: 2 },
        ]);
        let rows = run(&cfg);
        assert_eq!(rows.len(), 6);
        for r in rows.iter().filter(|r| r.case == "yes") {
            let no = rows.iter().find(|o| o.case == "no" && o.seed == r.seed).unwrap();
            assert_eq!(r.ratio, Some(r.cost.unwrap() / no.cost.unwrap()));
        }
        assert!(rows.iter().filter(|r| r.case != "yes").all(|r| r.ratio.is_none()));
        assert!(rows[2].status.starts_with("error"));
        assert!(rows.iter().all(|r| r.wall_time_ms.is_none()));
    }
}
