//! Turns problem files, elastic files, power cases and built-in names into
//! one flow problem.

use std::fs;
use std::path::Path;

use anyhow::{Context as _, Result};
use serde_json::Value;
use torusflow::graph::{BasisKind, CycleBasis};
use torusflow::io::{from_json, ElasticSpec, GraphSpec, ProblemSpec};
use torusflow::powerflow::{builtin_case, builtin_gamma, case_to_problem, rts24_basis, rts24_mod, PowerCase};
use torusflow::{Error, Problem};

use crate::Common;

/// A problem ready to solve, with the `ProblemSpec` that reproduces it.
pub struct Loaded {
    pub spec: ProblemSpec,
    pub problem: Problem,
    /// Basis that comes with the case, used unless `--basis` is given.
    pub default_basis: Option<CycleBasis>,
}

impl Loaded {
    /// Basis per `--basis`, falling back to the case's own, then fundamental.
    /// `None` on trees.
    pub fn basis(&self, kind: Option<BasisKind>) -> Result<Option<CycleBasis>> {
        let graph = self.problem.graph();
        if graph.is_acyclic() {
            return Ok(None);
        }
        Ok(Some(match (kind, &self.default_basis) {
            (Some(k), _) => CycleBasis::of_kind(graph, k)?,
            (None, Some(b)) => b.clone(),
            (None, None) => CycleBasis::fundamental(graph)?,
        }))
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Reads a JSON file, reporting syntax errors as input errors.
pub fn read_json(path: &Path) -> Result<Value> {
    let text = read(path)?;
    Ok(from_json(&text, &path.display().to_string())?)
}

fn from_value<D: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<D> {
    Ok(serde_json::from_value(v).map_err(|e| Error::Input(format!("{what}: {e}")))?)
}

fn check_gamma(gamma: f64) -> Result<f64> {
    if !(0.0..std::f64::consts::PI).contains(&gamma) {
        return Err(Error::Gamma(format!("gamma = {gamma} must lie in [0, pi)")).into());
    }
    Ok(gamma)
}

fn from_case(case: &PowerCase, gamma: f64) -> Result<Loaded> {
    let (problem, rebalance) = case_to_problem::<f64>(case, gamma)?;
    if rebalance.imbalance != 0.0 {
        eprintln!(
            "note: rebalanced injections by {:e} p.u. per bus (imbalance {:e} p.u.)",
            rebalance.per_bus, rebalance.imbalance
        );
    }
    let spec = ProblemSpec {
        graph: GraphSpec::from_graph(problem.graph()),
        flow: torusflow::flows::FlowFamily::Sin,
        p: problem.external_p(),
        gamma,
    };
    Ok(Loaded { spec, problem, default_basis: None })
}

pub fn from_spec(spec: ProblemSpec) -> Result<Loaded> {
    let problem = spec.build::<f64>()?;
    Ok(Loaded { spec, problem, default_basis: None })
}

fn elastic_spec(spec: ElasticSpec) -> Result<ProblemSpec> {
    spec.build::<f64>()?;
    let flow = match spec.energy {
        torusflow::elastic::EnergyFamily::Spacing => torusflow::flows::FlowFamily::Sin,
        torusflow::elastic::EnergyFamily::Custom { coeffs } => torusflow::flows::FlowFamily::Custom { coeffs },
    };
    Ok(ProblemSpec { graph: spec.graph, flow, p: spec.tau, gamma: spec.gamma })
}

/// Loads from `--case` (built-in name or case file) or the positional input.
pub fn load(common: &Common, input: Option<&Path>) -> Result<Loaded> {
    if let Some(gamma) = common.gamma {
        check_gamma(gamma)?;
    }
    if let Some(name) = &common.case {
        if name == "rts24-mod" {
            let case = rts24_mod(input)?;
            let mut loaded = from_case(&case, common.gamma.unwrap_or(builtin_gamma(name)))?;
            loaded.default_basis = Some(rts24_basis(loaded.problem.graph())?);
            return Ok(loaded);
        }
        return match builtin_case(name) {
            Ok(case) => from_case(&case, common.gamma.unwrap_or(builtin_gamma(name))),
            Err(Error::UnknownCase(_)) if Path::new(name).is_file() => {
                let case = PowerCase::load(Path::new(name))?;
                from_case(&case, common.gamma.unwrap_or(torusflow::powerflow::DEFAULT_GAMMA))
            }
            Err(e) => Err(e.into()),
        };
    }
    let path = input.ok_or_else(|| Error::Input("give an input file or --case".into()))?;
    let value = read_json(path)?;
    let what = path.display().to_string();
    let keys = |k: &str| value.get(k).is_some();
    if keys("buses") {
        let case: PowerCase = from_value(value, &what)?;
        return from_case(&case, common.gamma.unwrap_or(torusflow::powerflow::DEFAULT_GAMMA));
    }
    let mut spec = if keys("energy") {
        elastic_spec(from_value(value, &what)?)?
    } else {
        from_value::<ProblemSpec>(value, &what)?
    };
    if let Some(g) = common.gamma {
        spec.gamma = g;
    }
    from_spec(spec)
}
