//! JSON schemas, fixed-precision JSON output, and CSV export.

use std::io::{self, Write};

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::elastic::{ElasticProblem, EnergyFamily};
use crate::error::{Error, Result};
use crate::flows::{FlowFamily, FlowNetworkProblem, Solution, SolutionReport};
use crate::graph::{CycleBasis, WeightedGraph};
use crate::powerflow::SweepResult;
use crate::scalar::Scalar;

/// `{ "n": int, "edges": [[i, j, weight], ...] }`, 0-based.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphSpec {
    pub fn build<T: Scalar>(&self) -> Result<WeightedGraph<T>> {
        WeightedGraph::new(self.n, self.edges.iter().map(|&(i, j, w)| (i, j, T::lit(w))))
    }

    pub fn from_graph<T: Scalar>(g: &WeightedGraph<T>) -> Self {
        Self {
            n: g.n(),
            edges: g.edges().iter().zip(g.weights()).map(|(&(i, j), w)| (i, j, w.as_f64())).collect(),
        }
    }
}

/// `{ "graph": ..., "flow": {"family": ...}, "p": [...], "gamma": real }`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct ProblemSpec {
    pub graph: GraphSpec,
    pub flow: FlowFamily,
    pub p: Vec<f64>,
    pub gamma: f64,
}

impl ProblemSpec {
    pub fn build<T: Scalar>(&self) -> Result<FlowNetworkProblem<T>> {
        FlowNetworkProblem::uniform(
            self.graph.build()?,
            self.flow.build()?,
            self.p.iter().map(|&x| T::lit(x)).collect(),
            T::lit(self.gamma),
        )
    }
}

/// Elastic counterpart of [`ProblemSpec`]; `tau` may also be written `p`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct ElasticSpec {
    pub graph: GraphSpec,
    pub energy: EnergyFamily,
    #[serde(alias = "p")]
    pub tau: Vec<f64>,
    pub gamma: f64,
}

impl ElasticSpec {
    pub fn build<T: Scalar>(&self) -> Result<ElasticProblem<T>> {
        ElasticProblem::uniform(
            self.graph.build()?,
            self.energy.build()?,
            self.tau.iter().map(|&x| T::lit(x)).collect(),
            T::lit(self.gamma),
        )
    }
}

/// Serialized basis: kind, fingerprint, and node sequences.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct BasisRecord {
    pub kind: String,
    pub fingerprint: String,
    pub cycles: Vec<Vec<usize>>,
}

impl BasisRecord {
    pub fn new(basis: &CycleBasis) -> Self {
        Self {
            kind: basis.kind().to_string(),
            fingerprint: basis.fingerprint(),
            cycles: basis.cycles().iter().map(|c| c.nodes().to_vec()).collect(),
        }
    }
}

/// `{ "u": [...], "f": [...], "theta": [...], "report": {...} }`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct SolutionRecord {
    pub u: Vec<i64>,
    pub f: Vec<f64>,
    pub theta: Vec<f64>,
    pub report: SolutionReport,
}

impl SolutionRecord {
    pub fn new<T: Scalar>(s: &Solution<T>) -> Self {
        Self {
            u: s.u.u.clone(),
            f: s.f.iter().map(|x| x.as_f64()).collect(),
            theta: s.theta.as_slice().iter().map(|x| x.as_f64()).collect(),
            report: s.report.clone(),
        }
    }
}

/// Output of a complete solve.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: ProblemSpec,
    /// `None` for acyclic graphs.
    pub basis: Option<BasisRecord>,
    pub rho: f64,
    pub candidates: usize,
    pub solutions: Vec<SolutionRecord>,
}

/// JSON formatter that prints every float with 17 significant digits in
/// exponent form, so output is byte-stable across platforms and thread
/// counts. Non-finite floats become `null`.
pub struct FixedFloatFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for FixedFloatFormatter<'_> {
    fn default() -> Self {
        Self { inner: PrettyFormatter::with_indent(b"  ") }
    }
}

impl Formatter for FixedFloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Pretty JSON with fixed-precision floats and a trailing newline.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloatFormatter::default());
    value.serialize(&mut ser).map_err(|e| Error::Input(format!("serialization: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Input(e.to_string()))
}

pub fn from_json<'de, D: Deserialize<'de>>(text: &'de str, what: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("{what} JSON: {e}")))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Input(format!("CSV: {e}"))
}

/// One row per solution: `u_*, f_*, theta_*, loop_*, margin_*`, where margins
/// are the per-edge capacity slacks `a_e |h_e(gamma)| - |f_e|`.
pub fn solutions_csv<T: Scalar>(problem: &FlowNetworkProblem<T>, solutions: &[SolutionRecord]) -> Result<String> {
    let (k, m, n) = (
        solutions.first().map_or(0, |s| s.u.len()),
        problem.graph().m(),
        problem.graph().n(),
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (0..k)
        .map(|i| format!("u_{i}"))
        .chain((0..m).map(|e| format!("f_{e}")))
        .chain((0..n).map(|i| format!("theta_{i}")))
        .chain((0..k).map(|i| format!("loop_{i}")))
        .chain((0..m).map(|e| format!("margin_{e}")))
        .collect();
    w.write_record(&header).map_err(csv_error)?;
    let caps: Vec<f64> = problem.capacities().iter().map(|c| c.as_f64()).collect();
    for s in solutions {
        let row: Vec<String> = s
            .u
            .iter()
            .map(|u| u.to_string())
            .chain(s.f.iter().map(|&x| fmt(x)))
            .chain(s.theta.iter().map(|&x| fmt(x)))
            .chain(s.report.loop_flows.iter().map(|&x| fmt(x)))
            .chain(s.f.iter().zip(&caps).map(|(&x, &c)| fmt(c - x.abs())))
            .collect();
        w.write_record(&row).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

/// Sweep rows `u_*, P, exists, congestion, loop_*`, one per curve sample,
/// followed by a `ptc` row per winding vector (`exists` holds the bracket
/// width there).
pub fn sweep_csv(results: &[SweepResult]) -> Result<String> {
    let k = results.first().map_or(0, |r| r.u.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (0..k)
        .map(|i| format!("u_{i}"))
        .chain(["kind", "P", "exists", "congestion"].map(String::from))
        .chain((0..k).map(|i| format!("loop_{i}")))
        .collect();
    w.write_record(&header).map_err(csv_error)?;
    for r in results {
        let us: Vec<String> = r.u.iter().map(|u| u.to_string()).collect();
        for c in &r.curve {
            let row: Vec<String> = us
                .iter()
                .cloned()
                .chain(["curve".into(), fmt(c.scale), c.exists.to_string(), fmt(c.congestion)])
                .chain(c.loop_flows.iter().map(|&x| fmt(x)))
                .collect();
            w.write_record(&row).map_err(csv_error)?;
        }
        let ptc = r.ptc.map_or_else(|| "none".to_string(), fmt);
        let row: Vec<String> = us
            .iter()
            .cloned()
            .chain(["ptc".into(), ptc, fmt(r.bracket.1 - r.bracket.0), String::new()])
            .chain((0..k).map(|_| String::new()))
            .collect();
        w.write_record(&row).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}
