//! Independent reference implementations used by the integration tests.
//! None of these call into the solver, fitting or metric code under test.

#![allow(dead_code)]

use dtb::rng;
use rand::Rng;

pub type Matrix = Vec<Vec<f64>>;

pub fn random_matrix(seed: u64, m: usize, n: usize, lo: f64, hi: f64) -> Matrix {
    let mut s = rng::stream(seed);
    (0..m).map(|_| (0..n).map(|_| s.gen_range(lo..=hi)).collect()).collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let n = a.first().map_or(0, Vec::len);
    (0..n).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

/// `max_j sum_i p_i a_ij`: the maximizer's best response to `p`.
pub fn best_response_value(a: &Matrix, p: &[f64]) -> f64 {
    let n = a[0].len();
    (0..n)
        .map(|j| a.iter().zip(p).map(|(row, w)| w * row[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Calls `visit` on every point of the `d`-simplex whose coordinates are
/// multiples of `1 / steps`.
fn for_each_grid_point(d: usize, steps: usize, visit: &mut dyn FnMut(&[f64])) {
    fn rec(prefix: &mut Vec<usize>, d: usize, left: usize, steps: usize, visit: &mut dyn FnMut(&[f64])) {
        if prefix.len() + 1 == d {
            prefix.push(left);
            let p: Vec<f64> = prefix.iter().map(|&c| c as f64 / steps as f64).collect();
            visit(&p);
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(prefix, d, left - c, steps, visit);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(d), d, steps, steps, visit);
}

/// Minimizes the convex map `p -> max_j (p^T a)_j` over a grid on the row
/// simplex with step `1e-3`, then zooms in around the best grid point with
/// successively finer local grids. Only practical for up to three rows.
pub fn grid_minimax(a: &Matrix) -> f64 {
    let m = a.len();
    assert!(m <= 3, "grid oracle limited to three rows");
    let steps = 1000;
    let mut best = f64::INFINITY;
    let mut best_p = vec![0.0; m];
    for_each_grid_point(m, steps, &mut |p| {
        let v = best_response_value(a, p);
        if v < best {
            best = v;
            best_p = p.to_vec();
        }
    });
    let mut h = 1.0 / steps as f64;
    for _ in 0..4 {
        let fine = h / 10.0;
        let radius = 20i64;
        let centre = best_p.clone();
        let mut visit = |p: &[f64]| {
            if p.iter().all(|&v| v >= -1e-15) {
                let v = best_response_value(a, p);
                if v < best {
                    best = v;
                    best_p = p.to_vec();
                }
            }
        };
        match m {
            1 => {}
            2 => {
                for k in -radius..=radius {
                    let t = centre[0] + k as f64 * fine;
                    visit(&[t, 1.0 - t]);
                }
            }
            _ => {
                for k in -radius..=radius {
                    for l in -radius..=radius {
                        let t = centre[0] + k as f64 * fine;
                        let u = centre[1] + l as f64 * fine;
                        visit(&[t, u, 1.0 - t - u]);
                    }
                }
            }
        }
        h = fine;
    }
    best
}

/// Minimax value through whichever player has at most three strategies.
pub fn grid_value(a: &Matrix) -> Option<f64> {
    if a.len() <= 3 {
        Some(grid_minimax(a))
    } else if a[0].len() <= 3 {
        // max_q min_i (a q)_i = -min_q max_i (-a q)_i.
        let neg_t: Matrix = transpose(a).iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        Some(-grid_minimax(&neg_t))
    } else {
        None
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_linear(mut a: Matrix, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Equalizing strategy on a square sub-game: solves `w^T M = v 1`,
/// `sum w = 1` for `(w, v)`.
fn equalizer(m: &Matrix) -> Option<(Vec<f64>, f64)> {
    let k = m.len();
    let mut sys = vec![vec![0.0; k + 1]; k + 1];
    for j in 0..k {
        for i in 0..k {
            sys[j][i] = m[i][j];
        }
        sys[j][k] = -1.0;
    }
    for i in 0..k {
        sys[k][i] = 1.0;
    }
    let mut rhs = vec![0.0; k + 1];
    rhs[k] = 1.0;
    let sol = solve_linear(sys, rhs)?;
    Some((sol[..k].to_vec(), sol[k]))
}

/// Exact game value and an optimal pair by support enumeration over square
/// supports of equal size.
pub fn support_enumeration(a: &Matrix) -> (f64, Vec<f64>, Vec<f64>) {
    let (m, n) = (a.len(), a[0].len());
    let tol = 1e-9;
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                let sub: Matrix = rows.iter().map(|&i| cols.iter().map(|&j| a[i][j]).collect()).collect();
                let Some((p_sub, v)) = equalizer(&sub) else { continue };
                let Some((q_sub, v2)) = equalizer(&transpose(&sub)) else { continue };
                if (v - v2).abs() > 1e-7 || p_sub.iter().chain(&q_sub).any(|&w| w < -tol) {
                    continue;
                }
                let mut p = vec![0.0; m];
                for (&i, &w) in rows.iter().zip(&p_sub) {
                    p[i] = w.max(0.0);
                }
                let mut q = vec![0.0; n];
                for (&j, &w) in cols.iter().zip(&q_sub) {
                    q[j] = w.max(0.0);
                }
                let col_max = best_response_value(a, &p);
                let row_min = a
                    .iter()
                    .map(|row| row.iter().zip(&q).map(|(x, w)| x * w).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                if col_max <= v + 1e-7 && row_min >= v - 1e-7 {
                    return (v, p, q);
                }
            }
        }
    }
    panic!("support enumeration found no equilibrium");
}

/// Least squares by modified Gram-Schmidt QR on the raw monomial basis.
pub fn least_squares_poly(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let n = xs.len();
    let d = degree + 1;
    let mut q: Vec<Vec<f64>> = (0..d).map(|k| xs.iter().map(|x| x.powi(k as i32)).collect()).collect();
    let mut r = vec![vec![0.0; d]; d];
    for k in 0..d {
        for j in 0..k {
            let dot: f64 = (0..n).map(|t| q[j][t] * q[k][t]).sum();
            r[j][k] = dot;
            for t in 0..n {
                q[k][t] -= dot * q[j][t];
            }
        }
        let norm = q[k].iter().map(|v| v * v).sum::<f64>().sqrt();
        r[k][k] = norm;
        for v in &mut q[k] {
            *v /= norm;
        }
    }
    let qty: Vec<f64> = (0..d).map(|k| (0..n).map(|t| q[k][t] * ys[t]).sum()).collect();
    let mut c = vec![0.0; d];
    for k in (0..d).rev() {
        let s: f64 = (k + 1..d).map(|j| r[k][j] * c[j]).sum();
        c[k] = (qty[k] - s) / r[k][k];
    }
    c
}

pub fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().map(|(k, ck)| ck * x.powi(k as i32)).sum()
}

/// Per-fold mean squared error, binning by rank in the target order.
pub fn binned_fold_losses(pred: &[f64], truth: &[f64], folds: usize) -> Vec<f64> {
    let n = truth.len();
    let mut pairs: Vec<(f64, usize)> = truth.iter().copied().zip(0..n).collect();
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let size = n / folds;
    let mut sums = vec![0.0; folds];
    let mut counts = vec![0usize; folds];
    for (rank, &(_, i)) in pairs.iter().enumerate() {
        let f = (rank / size).min(folds - 1);
        sums[f] += (pred[i] - truth[i]).powi(2);
        counts[f] += 1;
    }
    sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect()
}
