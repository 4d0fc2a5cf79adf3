use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{FlowNetworkProblem, Sine};
use crate::graph::{Cycle, CycleBasis, WeightedGraph};
use crate::scalar::Scalar;

/// Largest angle bound accepted for sine flows.
pub const MAX_SINE_GAMMA: f64 = std::f64::consts::FRAC_PI_2 - 1e-9;
/// Angle bound used when a case does not say otherwise.
pub const DEFAULT_GAMMA: f64 = std::f64::consts::FRAC_PI_2 - 0.01;
/// Rebalancing above this fraction of total generation is refused.
pub const REBALANCE_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// Voltage magnitude in p.u.
    pub v: f64,
    /// Injected active power, MW when the case has `base_mva`, p.u. otherwise.
    pub p: f64,
}

/// Lossless active power flow case. Branches are `[i, j, b]` with 0-based
/// buses and susceptance `b = Im(Y_ij) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_mva: Option<f64>,
    pub buses: Vec<Bus>,
    pub branches: Vec<(usize, usize, f64)>,
}

/// Mean correction applied to make `sum p = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rebalance {
    /// Imbalance `sum p` in p.u. before correction.
    pub imbalance: f64,
    /// Amount subtracted from every bus, p.u.
    pub per_bus: f64,
}

impl PowerCase {
    pub fn validate(&self) -> Result<()> {
        if self.buses.is_empty() {
            return Err(Error::Input("case has no buses".into()));
        }
        if let Some(b) = self.base_mva {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::Input(format!("base_mva = {b} must be positive")));
            }
        }
        if let Some(k) = self.buses.iter().position(|b| !(b.v > 0.0) || !b.v.is_finite() || !b.p.is_finite()) {
            return Err(Error::Input(format!("bus {k} needs a positive voltage and finite power")));
        }
        if let Some(e) = self.branches.iter().position(|&(_, _, b)| !(b > 0.0) || !b.is_finite()) {
            return Err(Error::Weight { edge: e });
        }
        Ok(())
    }

    /// Injections in p.u., rebalanced to sum to zero.
    pub fn injections(&self) -> Result<(Vec<f64>, Rebalance)> {
        self.validate()?;
        let scale = self.base_mva.unwrap_or(1.0);
        let p: Vec<f64> = self.buses.iter().map(|b| b.p / scale).collect();
        let imbalance: f64 = p.iter().sum();
        let generation: f64 = p.iter().filter(|&&x| x > 0.0).sum();
        if imbalance.abs() > REBALANCE_LIMIT * generation && imbalance.abs() > 1e-12 {
            return Err(Error::Input(format!(
                "case is out of balance by {imbalance:e} p.u., more than {}% of generation {generation:e}",
                REBALANCE_LIMIT * 100.0
            )));
        }
        let per_bus = imbalance / p.len() as f64;
        Ok((p.iter().map(|x| x - per_bus).collect(), Rebalance { imbalance, per_bus }))
    }

    /// Weighted graph with `a_ij = V_i V_j b_ij`.
    pub fn graph<T: Scalar>(&self) -> Result<WeightedGraph<T>> {
        self.validate()?;
        let n = self.buses.len();
        if let Some(&(i, j, _)) = self.branches.iter().find(|&&(i, j, _)| i >= n || j >= n) {
            return Err(Error::InvalidGraph(format!("branch ({i}, {j}) references a bus outside 0..{n}")));
        }
        WeightedGraph::new(
            n,
            self.branches.iter().map(|&(i, j, b)| (i, j, T::lit(self.buses[i].v * self.buses[j].v * b))),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("case JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::MissingData(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Sine flow problem of a case.
pub fn case_to_problem<T: Scalar>(case: &PowerCase, gamma: f64) -> Result<(FlowNetworkProblem<T>, Rebalance)> {
    if !(0.0..MAX_SINE_GAMMA).contains(&gamma) {
        return Err(Error::Gamma(format!(
            "gamma = {gamma} must lie in [0, pi/2 - 1e-9) for sine flows; sin' = cos vanishes at pi/2"
        )));
    }
    let graph = case.graph::<T>()?;
    let (p, rebalance) = case.injections()?;
    let problem =
        FlowNetworkProblem::uniform(graph, Arc::new(Sine), p.into_iter().map(T::lit).collect(), T::lit(gamma))?;
    Ok((problem, rebalance))
}

fn unit_case(edges: &[(usize, usize)], p: Vec<f64>) -> PowerCase {
    PowerCase {
        base_mva: None,
        buses: p.into_iter().map(|p| Bus { v: 1.0, p }).collect(),
        branches: edges.iter().map(|&(i, j)| (i, j, 1.0)).collect(),
    }
}

/// Twelve-bus ring with edges `(k+1, k)` and closing edge `(0, 11)`.
fn ring12(sink: usize) -> PowerCase {
    let mut edges: Vec<(usize, usize)> = (0..11).map(|k| (k + 1, k)).collect();
    edges.push((0, 11));
    let mut p = vec![0.0; 12];
    p[11] = 1.0;
    p[sink] = -1.0;
    unit_case(&edges, p)
}

/// `s` pentagons chained through shared nodes: pentagon `k` uses nodes
/// `4k ..= 4k + 4`.
fn expo(s: usize) -> PowerCase {
    let mut edges = Vec::with_capacity(5 * s);
    for k in 0..s {
        let b = 4 * k;
        edges.extend([(b, b + 1), (b + 1, b + 2), (b + 2, b + 3), (b + 3, b + 4), (b + 4, b)]);
    }
    unit_case(&edges, vec![0.0; 4 * s + 1])
}

/// Names accepted by [`builtin_case`] besides `expo(s)`.
pub const BUILTIN_NAMES: [&str; 4] = ["ring12-sym", "ring12-asym", "pentagon", "rts24-mod"];

/// Built-in cases. `rts24-mod` needs the branch data file through
/// [`rts24_mod`]. Supply/demand of the ring cases is the unit template
/// (`P = 1`).
pub fn builtin_case(name: &str) -> Result<PowerCase> {
    match name {
        "ring12-sym" => Ok(ring12(5)),
        "ring12-asym" => Ok(ring12(2)),
        "pentagon" => Ok(expo(1)),
        "rts24-mod" => Err(Error::MissingData(
            "rts24-mod needs a case file with branch susceptances and voltage magnitudes".into(),
        )),
        _ => {
            let s = name
                .strip_prefix("expo(")
                .and_then(|r| r.strip_suffix(')'))
                .or_else(|| name.strip_prefix("expo-"))
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&s| (1..=12).contains(&s));
            s.map(expo).ok_or_else(|| Error::UnknownCase(name.to_string()))
        }
    }
}

/// Default angle bound of a built-in case.
pub fn builtin_gamma(name: &str) -> f64 {
    match name {
        "rts24-mod" => 1.5,
        n if n.starts_with("ring12") => DEFAULT_GAMMA,
        _ => 1.4,
    }
}

/// Modified RTS-24 supply/demand in MW, buses 1..=24.
pub const RTS24_MOD_MW: [f64; 24] = [
    8.40, 9.27, -268.48, -99.14, -79.96, -68.63, 63.65, -142.41, -245.21, 95.83, 100.00, 0.00, -193.50,
    -143.39, -153.00, 0.00, 0.00, 0.00, 26.57, 100.00, 0.00, 0.00, 990.00, 0.00,
];

/// Cycle basis used for RTS-24, 1-based bus sequences.
pub const RTS24_CYCLES: [&[usize]; 11] = [
    &[2, 1, 3, 9, 4, 2],
    &[5, 1, 3, 9, 8, 10, 5],
    &[10, 6, 2, 4, 9, 8, 10],
    &[11, 10, 8, 9, 11],
    &[12, 10, 8, 9, 12],
    &[13, 11, 9, 12, 23, 13],
    &[13, 12, 23, 13],
    &[16, 15, 24, 3, 9, 11, 14, 16],
    &[21, 15, 24, 3, 9, 11, 14, 16, 17, 22, 21],
    &[21, 18, 17, 22, 21],
    &[23, 20, 19, 16, 14, 11, 9, 12, 23],
];

/// RTS-24 with the modified injections; branch susceptances and voltage
/// magnitudes come from the user's case file, whose own `p` values are
/// replaced.
pub fn rts24_mod(path: Option<&Path>) -> Result<PowerCase> {
    let path = path.ok_or_else(|| {
        Error::MissingData("rts24-mod needs a case file with branch susceptances and voltage magnitudes".into())
    })?;
    let mut case = PowerCase::load(path)?;
    if case.buses.len() != 24 {
        return Err(Error::Dimension { expected: 24, found: case.buses.len() });
    }
    case.base_mva = Some(case.base_mva.unwrap_or(100.0));
    for (bus, &p) in case.buses.iter_mut().zip(&RTS24_MOD_MW) {
        bus.p = p;
    }
    Ok(case)
}

/// The RTS-24 cycle basis on a graph built from an RTS-24 case.
pub fn rts24_basis<T: Scalar>(graph: &WeightedGraph<T>) -> Result<CycleBasis> {
    let cycles = RTS24_CYCLES
        .iter()
        .map(|c| Cycle::from_nodes(graph, &c.iter().map(|v| v - 1).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    CycleBasis::from_cycles(graph, cycles)
}

/// Converts MATPOWER-style records to a lossless case.
///
/// * `bus`: `(bus_i, Pd, Pg, Vm)`; bus numbers may be arbitrary and are
///   renumbered in order of appearance. Injection is `Pg - Pd` in MW.
/// * `branch`: `(fbus, tbus, x)`; resistance, charging and taps are dropped
///   and the susceptance is `1 / x`. Parallel branches are merged by summing
///   susceptances.
///
/// Reading `.m` files is left to the caller.
pub fn from_matpower_records(
    base_mva: f64,
    bus: &[(usize, f64, f64, f64)],
    branch: &[(usize, usize, f64)],
) -> Result<PowerCase> {
    let index: BTreeMap<usize, usize> = bus.iter().enumerate().map(|(k, b)| (b.0, k)).collect();
    if index.len() != bus.len() {
        return Err(Error::Input("duplicate bus numbers".into()));
    }
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut order = Vec::new();
    for &(f, t, x) in branch {
        let (Some(&i), Some(&j)) = (index.get(&f), index.get(&t)) else {
            return Err(Error::Input(format!("branch ({f}, {t}) references an unknown bus")));
        };
        if !(x > 0.0) {
            return Err(Error::Input(format!("branch ({f}, {t}) needs positive reactance")));
        }
        let key = (i.min(j), i.max(j));
        if !merged.contains_key(&key) {
            order.push((i, j));
        }
        *merged.entry(key).or_insert(0.0) += 1.0 / x;
    }
    Ok(PowerCase {
        base_mva: Some(base_mva),
        buses: bus.iter().map(|&(_, pd, pg, vm)| Bus { v: vm, p: pg - pd }).collect(),
        branches: order.into_iter().map(|(i, j)| (i, j, merged[&(i.min(j), i.max(j))])).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shapes() {
        let c = builtin_case("ring12-sym").unwrap();
        assert_eq!((c.buses.len(), c.branches.len()), (12, 12));
        assert_eq!((c.buses[11].p, c.buses[5].p), (1.0, -1.0));
        let e = builtin_case("expo(2)").unwrap();
        assert_eq!((e.buses.len(), e.branches.len()), (9, 10));
        let g = e.graph::<f64>().unwrap();
        assert_eq!(g.cycle_rank(), 2);
        assert_eq!(builtin_case("pentagon").unwrap().branches.len(), 5);
        assert!(matches!(builtin_case("nope"), Err(Error::UnknownCase(_))));
        assert!(matches!(builtin_case("rts24-mod"), Err(Error::MissingData(_))));
        assert!(matches!(rts24_mod(None), Err(Error::MissingData(_))));
    }

    #[test]
    fn unit_case_is_unit_weight_sine() {
        let (pr, reb) = case_to_problem::<f64>(&builtin_case("ring12-asym").unwrap(), 1.0).unwrap();
        assert!(pr.graph().weights().iter().all(|&w| w == 1.0));
        assert_eq!(reb.imbalance, 0.0);
        assert!(matches!(
            case_to_problem::<f64>(&builtin_case("pentagon").unwrap(), std::f64::consts::FRAC_PI_2),
            Err(Error::Gamma(_))
        ));
    }

    #[test]
    fn rebalancing_limits() {
        let mut c = builtin_case("ring12-sym").unwrap();
        c.buses[0].p = 0.005;
        let (p, reb) = c.injections().unwrap();
        assert!(p.iter().sum::<f64>().abs() < 1e-15);
        assert!((reb.imbalance - 0.005).abs() < 1e-15);
        c.buses[0].p = 0.05;
        assert!(c.injections().is_err());
    }

    #[test]
    fn rts24_table_is_balanced() {
        assert!(RTS24_MOD_MW.iter().sum::<f64>().abs() < 1e-9);
        assert_eq!(RTS24_MOD_MW[2], -268.48);
    }

    #[test]
    fn matpower_records_merge_parallel_lines() {
        let bus = [(1, 0.0, 100.0, 1.0), (2, 50.0, 0.0, 1.0), (3, 50.0, 0.0, 1.0)];
        let branch = [(1, 2, 0.1), (2, 3, 0.2), (1, 2, 0.1), (3, 1, 0.5)];
        let c = from_matpower_records(100.0, &bus, &branch).unwrap();
        assert_eq!(c.branches, vec![(0, 1, 20.0), (1, 2, 5.0), (2, 0, 2.0)]);
        assert_eq!(c.buses[0].p, 100.0);
    }

    #[test]
    fn case_json_round_trip() {
        let c = builtin_case("pentagon").unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(PowerCase::from_json(&text).unwrap(), c);
    }
}
