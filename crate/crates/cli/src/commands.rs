use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context as _, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use torusflow::flows::{
    decompose_flow, loop_flow, solve_all, solve_with_basis, verify, SolutionReport, SolveOptions, SolverContext,
    FEASIBILITY_SLACK,
};
use torusflow::gen::{random_problem, GenOptions};
use torusflow::graph::{BasisKind, Cycle, CycleBasis};
use torusflow::io::{solutions_csv, sweep_csv, to_json, BasisRecord, ProblemSpec, SolutionRecord, SolveReport};
use torusflow::powerflow::builtin_case;
use torusflow::torus::{feasible_winding_vectors, winding_bounds};
use torusflow::{Error, Problem};

use crate::input::{self, Loaded};
use crate::{Common, Format, EXIT_NO_SOLUTION, EXIT_OK, EXIT_VERIFICATION};

/// Winding vectors are listed only up to this many candidates.
const LIST_LIMIT: u128 = 10_000;
const ACYCLIC: &str = "acyclic: unique-solution regime";

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn solve(common: &Common, input: Option<&Path>) -> Result<u8> {
    let loaded = input::load(common, input)?;
    let options = SolveOptions {
        rho: common.rho,
        basis: common.basis_kind().unwrap_or(BasisKind::Fundamental),
        jobs: common.jobs,
    };
    let out = match loaded.basis(common.basis_kind())? {
        Some(basis) => solve_with_basis(&loaded.problem, basis, options)?,
        None => solve_all(&loaded.problem, options)?,
    };
    let records: Vec<SolutionRecord> = out.solutions.iter().map(SolutionRecord::new).collect();
    eprintln!("{} solution(s) among {} candidate winding vector(s)", records.len(), out.candidates);
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&SolveReport {
            problem: loaded.spec.clone(),
            basis: out.basis.as_ref().map(BasisRecord::new),
            rho: common.rho,
            candidates: out.candidates,
            solutions: records.clone(),
        })?,
        Format::Csv => solutions_csv(&loaded.problem, &records)?,
    };
    emit(common, &text)?;
    Ok(if records.is_empty() { EXIT_NO_SOLUTION } else { EXIT_OK })
}

#[derive(Debug, Serialize)]
struct WindingsReport {
    regime: String,
    gamma: f64,
    basis: Option<BasisRecord>,
    cycle_lengths: Vec<usize>,
    /// Per-cycle bound `floor(gamma n_sigma / 2pi)`.
    bounds: Vec<i64>,
    candidates: u128,
    /// Omitted above the listing limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    vectors: Option<Vec<Vec<i64>>>,
}

pub fn windings(common: &Common, input: Option<&Path>) -> Result<u8> {
    let loaded = input::load(common, input)?;
    let gamma = loaded.problem.gamma();
    let report = match loaded.basis(common.basis_kind())? {
        None => {
            eprintln!("{ACYCLIC}");
            WindingsReport {
                regime: ACYCLIC.into(),
                gamma,
                basis: None,
                cycle_lengths: Vec::new(),
                bounds: Vec::new(),
                candidates: 1,
                vectors: Some(vec![Vec::new()]),
            }
        }
        Some(basis) => {
            let bounds = winding_bounds(&basis, gamma);
            let candidates = feasible_winding_vectors(&basis, gamma).count_total();
            eprintln!("{} cycle(s), bounds {:?}, {} candidate(s)", basis.len(), bounds, candidates);
            WindingsReport {
                regime: "cyclic".into(),
                gamma,
                cycle_lengths: basis.cycles().iter().map(Cycle::len).collect(),
                vectors: (candidates <= LIST_LIMIT).then(|| feasible_winding_vectors(&basis, gamma).collect()),
                basis: Some(BasisRecord::new(&basis)),
                bounds,
                candidates,
            }
        }
    };
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let header: Vec<String> = (0..report.bounds.len()).map(|i| format!("u_{i}")).collect();
            let rows: Vec<Vec<String>> = report
                .vectors
                .iter()
                .flatten()
                .filter(|v| !v.is_empty())
                .map(|v| v.iter().map(i64::to_string).collect())
                .collect();
            if header.is_empty() {
                csv_text(&["regime".into()], &[vec![report.regime.clone()]])?
            } else {
                csv_text(&header, &rows)?
            }
        }
    };
    emit(common, &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct BasisReport {
    kind: String,
    fingerprint: Option<String>,
    cycles: Vec<Vec<usize>>,
    lengths: Vec<usize>,
    total_length: usize,
    tree_edges: Option<Vec<usize>>,
}

pub fn basis(common: &Common, input: Option<&Path>) -> Result<u8> {
    let loaded = input::load(common, input)?;
    let report = match loaded.basis(common.basis_kind())? {
        None => BasisReport {
            kind: "acyclic".into(),
            fingerprint: None,
            cycles: Vec::new(),
            lengths: Vec::new(),
            total_length: 0,
            tree_edges: Some((0..loaded.problem.graph().m()).collect()),
        },
        Some(b) => BasisReport {
            kind: b.kind().to_string(),
            fingerprint: Some(b.fingerprint()),
            cycles: b.cycles().iter().map(|c| c.nodes().to_vec()).collect(),
            lengths: b.cycles().iter().map(Cycle::len).collect(),
            total_length: b.total_length(),
            tree_edges: b.tree_edges().map(<[usize]>::to_vec),
        },
    };
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .cycles
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let nodes: Vec<String> = c.iter().map(usize::to_string).collect();
                    vec![k.to_string(), c.len().to_string(), nodes.join(" ")]
                })
                .collect();
            csv_text(&["cycle".into(), "length".into(), "nodes".into()], &rows)?
        }
    };
    emit(common, &text)?;
    Ok(EXIT_OK)
}

pub fn sweep(common: &Common, input: Option<&Path>, tol: f64) -> Result<u8> {
    let loaded = input::load(common, input)?;
    let basis = loaded.basis(common.basis_kind())?.ok_or(Error::AcyclicGraph)?;
    let ctx = SolverContext::new(loaded.problem.clone(), basis)?;
    let results = torusflow::powerflow::sweep(&ctx, tol, common.rho, common.jobs)?;
    for r in &results {
        match r.ptc {
            Some(p) => eprintln!("u = {:?}: PTC {:.6}", r.u, p),
            None => eprintln!("u = {:?}: no solution", r.u),
        }
    }
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&results)?,
        Format::Csv => sweep_csv(&results)?,
    };
    emit(common, &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct Decomposition {
    /// Winding vector of the solved flow; absent for a supplied flow.
    u: Option<Vec<i64>>,
    f: Vec<f64>,
    cutset: Vec<f64>,
    cycle: Vec<f64>,
    loop_flows: Vec<f64>,
}

fn decomposition(problem: &Problem, basis: Option<&CycleBasis>, u: Option<Vec<i64>>, f: Vec<f64>) -> Result<Decomposition> {
    let (cutset, cycle) = decompose_flow(problem.graph(), &f)?;
    let loop_flows = basis.map_or_else(Vec::new, |b| b.cycles().iter().map(|c| loop_flow(c, &f)).collect());
    Ok(Decomposition { u, f, cutset, cycle, loop_flows })
}

pub fn decompose(common: &Common, input: Option<&Path>, flow: Option<&Path>) -> Result<u8> {
    let loaded = input::load(common, input)?;
    let basis = loaded.basis(common.basis_kind())?;
    let parts = match flow {
        Some(path) => {
            let f: Vec<f64> = serde_json::from_value(input::read_json(path)?)
                .map_err(|e| Error::Input(format!("{}: expected an array of flows: {e}", path.display())))?;
            let m = loaded.problem.graph().m();
            if f.len() != m {
                return Err(Error::Dimension { expected: m, found: f.len() }.into());
            }
            vec![decomposition(&loaded.problem, basis.as_ref(), None, f)?]
        }
        None => {
            let options = SolveOptions { rho: common.rho, basis: BasisKind::Fundamental, jobs: common.jobs };
            let out = match &basis {
                Some(b) => solve_with_basis(&loaded.problem, b.clone(), options)?,
                None => solve_all(&loaded.problem, options)?,
            };
            out.solutions
                .into_iter()
                .map(|s| decomposition(&loaded.problem, basis.as_ref(), Some(s.u.u), s.f))
                .collect::<Result<_>>()?
        }
    };
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&parts)?,
        Format::Csv => {
            let header = ["item", "edge", "f", "cutset", "cycle"].map(String::from);
            let rows: Vec<Vec<String>> = parts
                .iter()
                .enumerate()
                .flat_map(|(k, d)| {
                    (0..d.f.len())
                        .map(move |e| vec![k.to_string(), e.to_string(), fmt(d.f[e]), fmt(d.cutset[e]), fmt(d.cycle[e])])
                })
                .collect();
            csv_text(&header, &rows)?
        }
    };
    emit(common, &text)?;
    Ok(EXIT_OK)
}

/// What a solution file may hold.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SolutionFile {
    Report(SolveReport),
    Many(Vec<SolutionRecord>),
    One(SolutionRecord),
}

/// Rebuilds the basis named in a report and checks its fingerprint.
fn basis_from_record(problem: &Problem, record: &BasisRecord) -> Result<std::result::Result<CycleBasis, String>> {
    let graph = problem.graph();
    let basis = match record.kind.as_str() {
        "fundamental" => CycleBasis::of_kind(graph, BasisKind::Fundamental)?,
        "minimum" => CycleBasis::of_kind(graph, BasisKind::Minimum)?,
        _ => {
            let cycles = record
                .cycles
                .iter()
                .map(|c| Cycle::from_nodes(graph, c))
                .collect::<torusflow::Result<Vec<_>>>()?;
            CycleBasis::from_cycles(graph, cycles)?
        }
    };
    if basis.fingerprint() != record.fingerprint {
        return Ok(Err(format!(
            "basis fingerprint {} does not match the recomputed {}",
            record.fingerprint,
            basis.fingerprint()
        )));
    }
    Ok(Ok(basis))
}

#[derive(Debug, Serialize)]
struct CheckEntry {
    u: Vec<i64>,
    certified: bool,
    failures: Vec<String>,
    report: Option<SolutionReport>,
}

#[derive(Debug, Serialize)]
struct CheckReport {
    certified: bool,
    basis_failure: Option<String>,
    solutions: Vec<CheckEntry>,
}

pub fn check(common: &Common, solutions: &Path, problem: Option<&Path>) -> Result<u8> {
    let value: Value = input::read_json(solutions)?;
    let file: SolutionFile = serde_json::from_value(value)
        .map_err(|e| Error::Input(format!("{}: not a solution file: {e}", solutions.display())))?;
    let (embedded, basis_record, records): (Option<ProblemSpec>, Option<BasisRecord>, Vec<SolutionRecord>) = match file {
        SolutionFile::Report(r) => (Some(r.problem), r.basis, r.solutions),
        SolutionFile::Many(v) => (None, None, v),
        SolutionFile::One(s) => (None, None, vec![s]),
    };
    let loaded: Loaded = if problem.is_some() || common.case.is_some() {
        input::load(common, problem)?
    } else {
        let mut spec = embedded.ok_or_else(|| Error::Input("give the problem with --problem or --case".into()))?;
        if let Some(g) = common.gamma {
            spec.gamma = g;
        }
        input::from_spec(spec)?
    };
    let (basis, basis_failure) = match (&basis_record, common.basis_kind()) {
        (Some(r), None) => match basis_from_record(&loaded.problem, r)? {
            Ok(b) => (Some(b), None),
            Err(msg) => (None, Some(msg)),
        },
        (_, kind) => (loaded.basis(kind)?, None),
    };
    let acyclic = loaded.problem.graph().is_acyclic();
    let mut entries = Vec::with_capacity(records.len());
    for s in &records {
        let (report, mut failures) = if basis_failure.is_some() {
            (None, vec!["basis mismatch".to_string()])
        } else if basis.is_none() && !acyclic {
            (None, vec!["no cycle basis".to_string()])
        } else {
            match verify(&loaded.problem, basis.as_ref(), &s.u, &s.f, &s.theta, FEASIBILITY_SLACK) {
                Ok(r) => {
                    let failures = r.failures();
                    (Some(r), failures)
                }
                Err(e @ (Error::PuncturedTorus { .. } | Error::NonIntegerWinding { .. })) => (None, vec![e.to_string()]),
                Err(e) => return Err(e.into()),
            }
        };
        if failures.is_empty() && s.f.len() != loaded.problem.graph().m() {
            failures.push("flow has the wrong length".into());
        }
        entries.push(CheckEntry { u: s.u.clone(), certified: failures.is_empty(), failures, report });
    }
    let certified = basis_failure.is_none() && entries.iter().all(|e| e.certified);
    if let Some(msg) = &basis_failure {
        eprintln!("verification failed: {msg}");
    }
    for (k, e) in entries.iter().enumerate().filter(|(_, e)| !e.certified) {
        eprintln!("solution {k} (u = {:?}) failed: {}", e.u, e.failures.join("; "));
    }
    emit(common, &to_json(&CheckReport { certified, basis_failure, solutions: entries })?)?;
    Ok(if certified { EXIT_OK } else { EXIT_VERIFICATION })
}

pub fn gen(common: &Common, seed: u64, options: &GenOptions) -> Result<u8> {
    let text = match &common.case {
        Some(name) => to_json(&builtin_case(name)?)?,
        None => to_json(&random_problem(seed, options)?)?,
    };
    emit(common, &text)?;
    Ok(EXIT_OK)
}
