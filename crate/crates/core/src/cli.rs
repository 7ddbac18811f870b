//! Implementation of the `validate`, `dof` and `simulate` commands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::coordination::{cosimulate, CosimError, Mode, SyncTrace};
use crate::report::{
    dominant_state, write_outcomes, write_trace, write_trajectory, OUTCOMES_FILE, SUMMARY_FILE, TRACE_FILE,
    TRAJECTORY_FILE,
};
use crate::scenario::{read_document, validate, Scenario, ScenarioError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("simulation failed (seed {seed}): {source}")]
    Simulation { seed: u64, source: CosimError },
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("--runs must be at least 1")]
    NoRuns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Replay,
    Sample,
}

impl RunMode {
    pub fn with_seed(self, seed: u64) -> Mode {
        match self {
            RunMode::Replay => Mode::Replay,
            RunMode::Sample => Mode::Sample { seed },
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Replay => "replay",
            RunMode::Sample => "sample",
        }
    }
}

/// One row per degree of freedom, then the count.
pub fn cmd_dof(s: &Scenario) -> String {
    let mut out = String::from("psi\tprocess\tresource\tclass\n");
    for (psi, d) in s.model.dofs().iter().enumerate() {
        let p = &s.model.processes()[d.process];
        let r = &s.model.resources()[d.resource];
        writeln!(out, "{psi}\t{}\t{}\t{}", p.name, r.name, p.class).unwrap();
    }
    writeln!(out, "DOF count: {}", s.model.dof_count()).unwrap();
    out
}

/// Pass/fail line per check; the flag is true when every check passed.
pub fn cmd_validate(path: &Path) -> (String, bool) {
    match read_document(path) {
        Err(e) => (format!("FAIL parse\n     {e}\n"), false),
        Ok(doc) => {
            let report = validate(&doc);
            let ok = report.passed();
            let mut text = report.to_string();
            let failing = report.failures().len();
            if ok {
                text.push_str("scenario is valid\n");
            } else {
                writeln!(text, "scenario is invalid ({failing} problems)").unwrap();
            }
            (text, ok)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub seeds: Vec<u64>,
    pub traces: Vec<SyncTrace>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn run(s: &Scenario, mode: Mode) -> Result<SyncTrace, CosimError> {
    cosimulate(&s.net, &s.selector, &s.individuals, &s.schedule, mode)
}

/// Runs the scenario `runs` times (seeds `seed`, `seed+1`, ...) in
/// parallel, writes the CSVs of the first run and a summary merging all
/// runs. Nothing is left behind on failure.
pub fn cmd_simulate(
    s: &Scenario,
    mode: RunMode,
    seed: u64,
    out_dir: &Path,
    runs: usize,
) -> Result<RunReport, CliError> {
    if runs == 0 {
        return Err(CliError::NoRuns);
    }
    let seeds: Vec<u64> = (0..runs as u64).map(|i| seed.wrapping_add(i)).collect();
    let traces = seeds
        .par_iter()
        .map(|&sd| run(s, mode.with_seed(sd)).map_err(|source| CliError::Simulation { seed: sd, source }))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(s, mode, &seeds, &traces);

    let created_dir = !out_dir.exists();
    let mut files = Vec::new();
    let result = write_outputs(s, &traces[0], &summary, out_dir, &mut files);
    if let Err(e) = result {
        for f in &files {
            let _ = std::fs::remove_file(f);
        }
        if created_dir {
            let _ = std::fs::remove_dir(out_dir);
        }
        return Err(e);
    }
    Ok(RunReport {
        seeds,
        traces,
        files,
        summary,
    })
}

fn write_outputs(
    s: &Scenario,
    trace: &SyncTrace,
    summary: &str,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut open = |name: &str| -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = out_dir.join(name);
        let f = File::create(&path).map_err(io(&path))?;
        files.push(path.clone());
        Ok((path, BufWriter::new(f)))
    };
    let csv_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Csv { path, source }
    };
    let (path, w) = open(TRAJECTORY_FILE)?;
    write_trajectory(w, &s.net, trace).map_err(csv_err(&path))?;
    let (path, w) = open(TRACE_FILE)?;
    write_trace(w, &s.individuals, trace).map_err(csv_err(&path))?;
    let (path, w) = open(OUTCOMES_FILE)?;
    write_outcomes(w, &s.individuals, trace).map_err(csv_err(&path))?;
    let (path, mut w) = open(SUMMARY_FILE)?;
    std::io::Write::write_all(&mut w, summary.as_bytes())
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(io(&path))?;
    Ok(())
}

fn summarize(s: &Scenario, mode: RunMode, seeds: &[u64], traces: &[SyncTrace]) -> String {
    let mut out = String::new();
    let first = &traces[0];
    let costs = s.net.costs();
    writeln!(out, "scenario: {}", s.document.name).unwrap();
    if let Some(unit) = &s.document.time_unit {
        writeln!(out, "time unit: {unit}").unwrap();
    }
    writeln!(out, "mode: {}", mode.as_str()).unwrap();
    writeln!(out, "seed: {}", seeds[0]).unwrap();
    writeln!(out, "runs: {}", seeds.len()).unwrap();
    writeln!(out, "degrees of freedom: {}", s.model.dof_count()).unwrap();
    writeln!(out, "places: {}", s.net.places().join(", ")).unwrap();
    writeln!(out, "events: {}", first.steps.len()).unwrap();
    if let Some(last) = first.steps.last() {
        writeln!(out, "end time: {}", last.time).unwrap();
    }
    writeln!(out, "final cost: {}", first.cost_series(costs).final_cost()).unwrap();
    let places: Vec<String> = s
        .net
        .places()
        .iter()
        .zip(&first.final_marking().places)
        .map(|(p, n)| format!("{p}={n}"))
        .collect();
    writeln!(out, "final places: {}", places.join(", ")).unwrap();
    let in_flight: u64 = first.final_marking().transitions.iter().sum();
    writeln!(out, "tokens in transitions: {in_flight}").unwrap();
    for (l, ind) in s.individuals.iter().enumerate() {
        let q = &first.final_health()[l];
        let h = ind.net.outcome(q).expect("validated sizes");
        writeln!(
            out,
            "individual {}: outcome {h} state {}",
            ind.id,
            dominant_state(ind, &q.states)
        )
        .unwrap();
    }
    let checked = first.steps.iter().filter(|st| st.residual.is_some()).count();
    let nonzero = first
        .steps
        .iter()
        .filter_map(|st| st.residual.as_ref())
        .filter(|r| r.iter().any(|&x| x != 0))
        .count();
    writeln!(out, "coupling residual: {nonzero} nonzero of {checked} delivery steps").unwrap();

    if traces.len() > 1 {
        let n = traces.len() as f64;
        writeln!(
            out,
            "monte carlo: {} runs, seeds {}..={}",
            traces.len(),
            seeds[0],
            seeds[seeds.len() - 1]
        )
        .unwrap();
        let finals: Vec<f64> = traces
            .iter()
            .map(|t| t.cost_series(costs).final_cost().to_f64())
            .collect();
        let mean = finals.iter().sum::<f64>() / n;
        let min = finals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        writeln!(out, "  final cost: mean {mean} min {min} max {max}").unwrap();
        for (l, ind) in s.individuals.iter().enumerate() {
            let mut states: BTreeMap<String, usize> = BTreeMap::new();
            let mut total = 0.0;
            for t in traces {
                let q = &t.final_health()[l];
                total += ind.net.outcome(q).expect("validated sizes");
                *states.entry(dominant_state(ind, &q.states)).or_default() += 1;
            }
            writeln!(out, "  individual {}: mean outcome {}", ind.id, total / n).unwrap();
            for (state, count) in states {
                writeln!(out, "    final state {state}: {count}").unwrap();
            }
        }
    }
    out
}
