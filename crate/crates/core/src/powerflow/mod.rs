//! Lossless active power flow: case data, translation to sine flow problems,
//! transmission capacity sweeps, and congestion.

mod case;
mod sweep;

pub use case::{
    builtin_case, builtin_gamma, case_to_problem, from_matpower_records, rts24_basis, rts24_mod, Bus, PowerCase,
    Rebalance, BUILTIN_NAMES, DEFAULT_GAMMA, MAX_SINE_GAMMA, REBALANCE_LIMIT, RTS24_CYCLES, RTS24_MOD_MW,
};
pub use sweep::{congestion, ptc, scale_limit, sweep, CurvePoint, SweepResult, CURVE_POINTS, DEFAULT_PTC_TOL};
