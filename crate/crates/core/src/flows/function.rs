use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Samples used for derivative bounds and the oddness check.
const GRID: usize = 1001;

/// An odd, 2pi-periodic, continuously differentiable edge map `h_e`.
pub trait FlowFunction<T: Scalar>: Debug + Send + Sync {
    fn eval(&self, y: T) -> T;

    fn derivative(&self, y: T) -> T;

    /// Closed-form inverse on `[-h(gamma), h(gamma)]`, when one exists.
    fn inverse_interior(&self, _v: T, _gamma: T) -> Option<T> {
        None
    }

    /// `(min, max)` of `h'` over `[-gamma, gamma]`.
    fn derivative_bounds(&self, gamma: T) -> (T, T) {
        grid(gamma).fold((T::max_value().unwrap(), T::min_value().unwrap()), |(lo, hi), y| {
            let d = self.derivative(y);
            (lo.min(d), hi.max(d))
        })
    }

    fn label(&self) -> String;
}

/// `GRID` equispaced points on `[-gamma, gamma]`.
pub(crate) fn grid<T: Scalar>(gamma: T) -> impl Iterator<Item = T> {
    let half = (GRID / 2) as f64;
    (0..GRID).map(move |k| gamma * T::lit((k as f64 - half) / half))
}

/// Built-in flow families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FlowFamily {
    /// `h(y) = sin y`.
    Sin,
    /// `h(y) = slope * y`, extended oddly and periodically outside `(-pi, pi)`.
    Linear { slope: f64 },
    /// Odd sine series `sum_k c_k sin(k y)`, `k = 1, 2, ...`.
    Custom { coeffs: Vec<f64> },
}

impl FlowFamily {
    pub fn build<T: Scalar>(&self) -> Result<Arc<dyn FlowFunction<T>>> {
        Ok(match self {
            FlowFamily::Sin => Arc::new(Sine),
            FlowFamily::Linear { slope } => {
                if !(*slope > 0.0) || !slope.is_finite() {
                    return Err(Error::FlowFunction(format!("linear slope {slope} must be positive")));
                }
                Arc::new(Linear { slope: T::lit(*slope) })
            }
            FlowFamily::Custom { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::FlowFunction("sine series needs finite coefficients".into()));
                }
                Arc::new(SineSeries { coeffs: coeffs.iter().map(|&c| T::lit(c)).collect() })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sine;

impl<T: Scalar> FlowFunction<T> for Sine {
    fn eval(&self, y: T) -> T {
        y.sin()
    }

    fn derivative(&self, y: T) -> T {
        y.cos()
    }

    fn inverse_interior(&self, v: T, gamma: T) -> Option<T> {
        (gamma <= T::frac_pi_2()).then(|| v.max(-T::one()).min(T::one()).asin())
    }

    fn derivative_bounds(&self, gamma: T) -> (T, T) {
        (gamma.min(T::pi()).cos(), T::one())
    }

    fn label(&self) -> String {
        "sin".into()
    }
}

/// Linear flow on `(-pi, pi)`; the periodic extension never matters because
/// every admissible angle bound is below `pi`.
#[derive(Debug, Clone, Copy)]
pub struct Linear<T> {
    pub slope: T,
}

impl<T: Scalar> FlowFunction<T> for Linear<T> {
    fn eval(&self, y: T) -> T {
        self.slope * crate::torus::wrap(y)
    }

    fn derivative(&self, _y: T) -> T {
        self.slope
    }

    fn inverse_interior(&self, v: T, _gamma: T) -> Option<T> {
        Some(v / self.slope)
    }

    fn derivative_bounds(&self, _gamma: T) -> (T, T) {
        (self.slope, self.slope)
    }

    fn label(&self) -> String {
        format!("linear({:e})", self.slope)
    }
}

#[derive(Debug, Clone)]
pub struct SineSeries<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> FlowFunction<T> for SineSeries<T> {
    fn eval(&self, y: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, &c)| acc + c * (T::lit(k as f64 + 1.0) * y).sin())
    }

    fn derivative(&self, y: T) -> T {
        self.coeffs.iter().enumerate().fold(T::zero(), |acc, (k, &c)| {
            let kk = T::lit(k as f64 + 1.0);
            acc + c * kk * (kk * y).cos()
        })
    }

    fn label(&self) -> String {
        let c: Vec<String> = self.coeffs.iter().map(|c| format!("{c:e}")).collect();
        format!("sine-series[{}]", c.join(","))
    }
}

/// `-h`, used to turn decreasing flow functions into increasing ones.
#[derive(Debug, Clone)]
pub struct Negated<T: Scalar>(pub Arc<dyn FlowFunction<T>>);

impl<T: Scalar> FlowFunction<T> for Negated<T> {
    fn eval(&self, y: T) -> T {
        -self.0.eval(y)
    }

    fn derivative(&self, y: T) -> T {
        -self.0.derivative(y)
    }

    fn derivative_bounds(&self, gamma: T) -> (T, T) {
        let (lo, hi) = self.0.derivative_bounds(gamma);
        (-hi, -lo)
    }

    fn label(&self) -> String {
        format!("-{}", self.0.label())
    }
}

/// Checks `h(-y) = -h(y)` on the grid.
pub fn check_odd<T: Scalar>(h: &dyn FlowFunction<T>, gamma: T) -> Result<()> {
    let tol = T::lit(1e-12).max(T::eps() * T::lit(64.0));
    let probe = gamma.max(T::one());
    for y in grid(probe) {
        let (a, b) = (h.eval(y), h.eval(-y));
        if (a + b).abs() > tol * (T::one() + a.abs()) {
            return Err(Error::FlowFunction(format!(
                "{} is not odd at y = {:e}",
                h.label(),
                y.as_f64()
            )));
        }
    }
    Ok(())
}

/// `h` on `[-gamma, gamma]`, continued linearly with slope `h'(gamma)`
/// outside. Strictly increasing, hence invertible on the whole line.
#[derive(Debug, Clone)]
pub struct ExtendedFlowFunction<T: Scalar> {
    base: Arc<dyn FlowFunction<T>>,
    gamma: T,
    h_gamma: T,
    slope: T,
}

impl<T: Scalar> ExtendedFlowFunction<T> {
    pub fn new(base: Arc<dyn FlowFunction<T>>, gamma: T) -> Self {
        let h_gamma = base.eval(gamma);
        let slope = base.derivative(gamma);
        Self { base, gamma, h_gamma, slope }
    }

    pub fn base(&self) -> &Arc<dyn FlowFunction<T>> {
        &self.base
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `h(gamma)`, the capacity of a unit-weight edge.
    pub fn capacity(&self) -> T {
        self.h_gamma
    }

    pub fn eval(&self, y: T) -> T {
        if y > self.gamma {
            self.h_gamma + self.slope * (y - self.gamma)
        } else if y < -self.gamma {
            -self.h_gamma + self.slope * (y + self.gamma)
        } else {
            self.base.eval(y)
        }
    }

    pub fn derivative(&self, y: T) -> T {
        if y.abs() > self.gamma {
            self.slope
        } else {
            self.base.derivative(y)
        }
    }

    /// `h_gamma^{-1}(v)`.
    pub fn inverse(&self, v: T) -> T {
        if v > self.h_gamma {
            return self.gamma + (v - self.h_gamma) / self.slope;
        }
        if v < -self.h_gamma {
            return -self.gamma + (v + self.h_gamma) / self.slope;
        }
        if let Some(y) = self.base.inverse_interior(v, self.gamma) {
            return y;
        }
        self.bisect(v)
    }

    fn bisect(&self, v: T) -> T {
        let (mut lo, mut hi) = (-self.gamma, self.gamma);
        let width = T::lit(1e-13).max(T::eps() * T::lit(4.0));
        for _ in 0..200 {
            if hi - lo <= width {
                break;
            }
            let mid = (lo + hi) / T::lit(2.0);
            if self.base.eval(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut y = (lo + hi) / T::lit(2.0);
        for _ in 0..2 {
            let d = self.base.derivative(y);
            if d > T::zero() {
                y = (y - (self.base.eval(y) - v) / d).max(lo).min(hi);
            }
        }
        y
    }
}
