//! Generated datasets for demos and offline experiments.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use super::Dataset;
use crate::error::Result;
use crate::rng;

/// `y = x sin x`.
pub fn x_sin_x(x: f64) -> f64 {
    x * x.sin()
}

/// `n` noiseless samples of `x sin x` at uniformly random (hence unevenly
/// spaced) points of `[0, 10]`, sorted by `x`.
pub fn x_sin_x_samples(n: usize, seed: u64) -> Result<Dataset> {
    let mut stream = rng::stream(rng::derive_seed(seed, &[rng::tag::SYNTH, 1]));
    let mut xs: Vec<f64> = (0..n).map(|_| stream.gen_range(0.0..10.0)).collect();
    xs.sort_by(f64::total_cmp);
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let ys = xs.iter().map(|&x| x_sin_x(x)).collect();
    let mut data = Dataset::from_rows(&rows, ys)?;
    data.feature_names = vec!["x".into()];
    Ok(data)
}

/// Evenly spaced `n` points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Regression data shaped like a census housing table: eight features
/// (income, age, rooms, occupancy, latitude, longitude, population and a
/// pure-noise column), a right-skewed target capped at 5.0 in units of
/// 100k, and noise whose scale grows with the signal.
pub fn housing_surrogate(n: usize, seed: u64) -> Result<Dataset> {
    let mut stream = rng::stream(rng::derive_seed(seed, &[rng::tag::SYNTH, 2]));
    let income = LogNormal::<f64>::new(1.25, 0.45).expect("valid lognormal");
    let population = LogNormal::<f64>::new(7.0, 0.7).expect("valid lognormal");
    let unit = Normal::<f64>::new(0.0, 1.0).expect("valid normal");

    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let inc: f64 = income.sample(&mut stream).clamp(0.5, 15.0);
        let age = stream.gen_range(1.0..52.0f64);
        let rooms = (3.5 + 0.35 * inc + 0.6 * unit.sample(&mut stream)).max(1.0);
        let occupancy = (2.2 + 0.8 * unit.sample(&mut stream).abs()).max(1.0);
        let lat = stream.gen_range(32.5..42.0f64);
        // Coastal longitudes track latitude, inland points spread east.
        let coast = -117.0 - 0.8 * (lat - 32.5);
        let lon = coast + stream.gen_range(0.0..6.0f64);
        let pop: f64 = population.sample(&mut stream);
        let noise_col = unit.sample(&mut stream);

        let coastal = (-(lon - coast) / 1.2).exp();
        let metro = (-((lat - 34.0).powi(2)) / 1.5).exp() + (-((lat - 37.7).powi(2)) / 0.8).exp();
        let signal = 0.35
            + 0.42 * inc
            + 0.008 * age
            + 1.1 * coastal * (0.5 + metro)
            - 0.15 * (occupancy - 2.2)
            + 0.05 * (rooms - 5.0)
            + 0.06 * inc * coastal;
        let sigma = 0.12 + 0.14 * signal;
        let y = (signal + sigma * unit.sample(&mut stream)).clamp(0.15, 5.0);

        rows.push(vec![inc, age, rooms, occupancy, lat, lon, pop, noise_col]);
        targets.push(y);
    }
    let mut data = Dataset::from_rows(&rows, targets)?;
    data.feature_names = [
        "median_income",
        "house_age",
        "avg_rooms",
        "avg_occupancy",
        "latitude",
        "longitude",
        "population",
        "noise",
    ]
    .map(String::from)
    .to_vec();
    data.target_name = "median_house_value".into();
    Ok(data)
}

/// `y = f(x) + noise(x)` on one feature with noise growing in `x`; used to
/// exercise the randomized game.
pub fn heteroskedastic_line(n: usize, seed: u64) -> Result<Dataset> {
    let mut stream = rng::stream(rng::derive_seed(seed, &[rng::tag::SYNTH, 3]));
    let unit = Normal::<f64>::new(0.0, 1.0).expect("valid normal");
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x = stream.gen_range(0.0..10.0f64);
        let y = 0.5 * x + (x / 2.0).sin() + (0.1 + 0.3 * x) * unit.sample(&mut stream);
        rows.push(vec![x]);
        targets.push(y);
    }
    Dataset::from_rows(&rows, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_sin_x_samples_are_sorted_and_exact() {
        let data = x_sin_x_samples(35, 1).unwrap();
        assert_eq!(data.len(), 35);
        for i in 0..35 {
            assert_eq!(data.y(i), x_sin_x(data.x(i)[0]));
            assert!((0.0..10.0).contains(&data.x(i)[0]));
        }
        assert!((1..35).all(|i| data.x(i - 1)[0] <= data.x(i)[0]));
    }

    #[test]
    fn surrogate_shape_and_range() {
        let data = housing_surrogate(2000, 3).unwrap();
        assert_eq!(data.len(), 2000);
        assert_eq!(data.n_features(), 8);
        assert!(data.targets.iter().all(|&y| (0.15..=5.0).contains(&y)));
        let mean = data.targets.iter().sum::<f64>() / 2000.0;
        assert!(mean > 1.0 && mean < 3.5, "mean {mean}");
        assert_eq!(data, housing_surrogate(2000, 3).unwrap());
    }

    #[test]
    fn linspace_endpoints() {
        let xs = linspace(0.0, 10.0, 50);
        assert_eq!(xs.len(), 50);
        assert_eq!(xs[0], 0.0);
        assert_eq!(xs[49], 10.0);
    }
}
