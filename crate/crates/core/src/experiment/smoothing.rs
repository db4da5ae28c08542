/// Tricube-weighted local linear regression evaluated at each `xs[i]`.
///
/// Points farther than `bandwidth` from the evaluation point get zero
/// weight. Where the local design is degenerate (one distinct abscissa in
/// the window) the weighted mean is used instead.
pub fn local_linear(xs: &[f64], ys: &[f64], bandwidth: f64) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    xs.iter()
        .map(|&x0| {
            let mut sw = 0.0;
            let mut sx = 0.0;
            let mut sy = 0.0;
            for (&x, &y) in xs.iter().zip(ys) {
                let w = tricube((x - x0).abs() / bandwidth);
                sw += w;
                sx += w * x;
                sy += w * y;
            }
            let (mx, my) = (sx / sw, sy / sw);
            let mut sxx = 0.0;
            let mut sxy = 0.0;
            for (&x, &y) in xs.iter().zip(ys) {
                let w = tricube((x - x0).abs() / bandwidth);
                sxx += w * (x - mx).powi(2);
                sxy += w * (x - mx) * (y - my);
            }
            if sxx > 1e-12 * sw {
                my + sxy / sxx * (x0 - mx)
            } else {
                my
            }
        })
        .collect()
}

fn tricube(u: f64) -> f64 {
    if u < 1.0 {
        (1.0 - u.powi(3)).powi(3)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_lines_exactly() {
        let xs: Vec<f64> = (0..19).map(|i| 0.05 * (i + 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x).collect();
        for (s, y) in local_linear(&xs, &ys, 0.3).iter().zip(&ys) {
            assert!((s - y).abs() < 1e-12);
        }
    }

    #[test]
    fn single_point_is_itself() {
        assert_eq!(local_linear(&[0.4], &[7.0], 0.3), vec![7.0]);
    }

    #[test]
    fn damps_alternating_noise() {
        let xs: Vec<f64> = (0..19).map(|i| 0.05 * (i + 1) as f64).collect();
        let ys: Vec<f64> = (0..19).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = local_linear(&xs, &ys, 0.3);
        assert!(s[5..14].iter().all(|v| v.abs() < 0.3));
    }
}
