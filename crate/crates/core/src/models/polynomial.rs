//! Univariate least-squares polynomials.
//!
//! Inputs are mapped affinely onto `[-1, 1]` before building the monomial
//! design matrix; the coefficients come from an SVD solve, which returns
//! the minimum-norm minimizer when the design is rank deficient (fewer
//! distinct points than coefficients).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, IndexSet};
use crate::error::{DtbError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialModel {
    degree: usize,
    /// Ascending powers of the rescaled input.
    coefficients: Vec<f64>,
    input_shift: f64,
    input_scale: f64,
}

impl PolynomialModel {
    pub fn fit(data: &Dataset, subset: &IndexSet, degree: usize) -> Result<Self> {
        if data.n_features() != 1 {
            return Err(DtbError::config(format!(
                "polynomial models need univariate input, dataset has {} features",
                data.n_features()
            )));
        }
        if subset.is_empty() {
            return Err(DtbError::data("cannot fit a polynomial to an empty subset"));
        }
        let xs: Vec<f64> = subset.indices().iter().map(|&r| data.x(r)[0]).collect();
        let ys: Vec<f64> = subset.indices().iter().map(|&r| data.y(r)).collect();
        Self::fit_points(&xs, &ys, degree)
    }

    pub fn fit_points(xs: &[f64], ys: &[f64], degree: usize) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(DtbError::data("polynomial fit needs equal, nonempty x and y"));
        }
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let input_shift = (lo + hi) / 2.0;
        let half_width = (hi - lo) / 2.0;
        let input_scale = if half_width > 0.0 { half_width } else { 1.0 };

        let design = DMatrix::from_fn(xs.len(), degree + 1, |i, k| {
            ((xs[i] - input_shift) / input_scale).powi(k as i32)
        });
        let rhs = DVector::from_column_slice(ys);
        let svd = design.svd(true, true);
        let sigma_max = svd.singular_values.max();
        let eps = sigma_max * f64::EPSILON * xs.len().max(degree + 1) as f64;
        let solution = svd
            .solve(&rhs, eps)
            .map_err(|e| DtbError::Numeric(format!("least-squares solve failed: {e}")))?;
        let coefficients: Vec<f64> = solution.iter().copied().collect();
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(DtbError::Numeric("non-finite polynomial coefficients".into()));
        }
        Ok(Self {
            degree,
            coefficients,
            input_shift,
            input_scale,
        })
    }

    /// Maps a raw input onto the fitting variable.
    pub fn rescale(&self, x: f64) -> f64 {
        (x - self.input_shift) / self.input_scale
    }

    pub fn predict_scalar(&self, x: f64) -> f64 {
        let t = self.rescale(x);
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_scalar(x[0])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn input_shift(&self) -> f64 {
        self.input_shift
    }

    pub fn input_scale(&self) -> f64 {
        self.input_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data(xs: &[f64], f: impl Fn(f64) -> f64) -> Dataset {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Dataset::from_rows(&rows, xs.iter().map(|&x| f(x)).collect()).unwrap()
    }

    #[test]
    fn recovers_a_line() {
        let xs = [0.0, 1.0, 2.5, 3.0, 7.0];
        let data = line_data(&xs, |x| 2.0 * x + 1.0);
        let model = PolynomialModel::fit(&data, &IndexSet::full(5), 1).unwrap();
        for &x in &xs {
            assert!((model.predict(&[x]) - (2.0 * x + 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn square_system_interpolates() {
        let xs = [0.0, 1.5, 4.0, 6.0, 9.5];
        let data = line_data(&xs, |x| x * x.sin());
        let model = PolynomialModel::fit(&data, &IndexSet::full(5), 4).unwrap();
        for &x in &xs {
            assert!((model.predict(&[x]) - x * x.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        // Two points, degree 3: infinitely many interpolants.
        let model = PolynomialModel::fit_points(&[0.0, 1.0], &[1.0, 3.0], 3).unwrap();
        assert!((model.predict_scalar(0.0) - 1.0).abs() < 1e-10);
        assert!((model.predict_scalar(1.0) - 3.0).abs() < 1e-10);
        // t = +-1 at the data; the minimum-norm solution splits weight evenly
        // between the even and odd powers: c0 = c2 = 1, c1 = c3 = 0.5.
        let c = model.coefficients();
        assert!((c[0] - 1.0).abs() < 1e-10 && (c[2] - 1.0).abs() < 1e-10);
        assert!((c[1] - 0.5).abs() < 1e-10 && (c[3] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn single_point_constant() {
        let model = PolynomialModel::fit_points(&[3.0], &[7.0], 4).unwrap();
        assert!((model.predict_scalar(3.0) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_multivariate_input() {
        let data = Dataset::from_rows(&[vec![1.0, 2.0]], vec![1.0]).unwrap();
        assert!(matches!(
            PolynomialModel::fit(&data, &IndexSet::full(1), 2),
            Err(DtbError::Config(_))
        ));
    }

    #[test]
    fn residual_orthogonal_to_basis() {
        let xs: Vec<f64> = (0..35).map(|i| 10.0 * (i as f64 / 34.0).powf(1.3)).collect();
        let model = PolynomialModel::fit_points(&xs, &xs.iter().map(|&x| x * x.sin()).collect::<Vec<_>>(), 4)
            .unwrap();
        for k in 0..=4 {
            let dot: f64 = xs
                .iter()
                .map(|&x| {
                    let r = x * x.sin() - model.predict_scalar(x);
                    r * model.rescale(x).powi(k)
                })
                .sum();
            assert!(dot.abs() < 1e-8, "column {k}: {dot}");
        }
    }
}
