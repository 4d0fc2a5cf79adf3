use nalgebra::DMatrix;

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Oblique projection `P_D = I - D A B^T (B D A B^T)^+ B` onto the cycle
/// space, along `Img(D A B^T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleProjection<T: Scalar> {
    pub matrix: DMatrix<T>,
    pub weight: Vec<T>,
}

impl<T: Scalar> CycleProjection<T> {
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (&self.matrix * nalgebra::DVector::from_column_slice(x)).data.into()
    }
}

/// `D`-weighted cycle projection for the positive diagonal `d`.
pub fn cycle_projection<T: Scalar>(graph: &WeightedGraph<T>, d: &[T]) -> Result<CycleProjection<T>> {
    if d.len() != graph.m() {
        return Err(Error::Dimension { expected: graph.m(), found: d.len() });
    }
    if let Some(edge) = d.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(Error::Weight { edge });
    }
    let da: Vec<T> = d.iter().zip(graph.weights()).map(|(&x, &a)| x * a).collect();
    let lpinv = super::deflated_pinv(&graph.scaled_laplacian(&da))?;
    let b = graph.incidence_matrix();
    let mut dab_t = b.transpose();
    for (e, &w) in da.iter().enumerate() {
        dab_t.row_mut(e).scale_mut(w);
    }
    let matrix = DMatrix::identity(graph.m(), graph.m()) - dab_t * lpinv * b;
    Ok(CycleProjection { matrix, weight: d.to_vec() })
}
