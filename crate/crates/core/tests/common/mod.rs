//! Independent dense oracles shared by the integration tests.
#![allow(dead_code)]

/// Solves `m w = rhs` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(m: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = m.iter().zip(rhs).map(|(row, &r)| {
        let mut row = row.clone();
        row.push(r);
        row
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..=n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut w = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * w[c]).sum();
        w[r] = (a[r][n] - s) / a[r][r];
    }
    w
}

/// `λ I + (1/n) Σ x x†` as a dense matrix, with `λ = 1/√n`.
pub fn ridge_matrix(xs: &[&[f64]], dim: usize) -> Vec<Vec<f64>> {
    let n = xs.len() as f64;
    let mut m = vec![vec![0.0; dim]; dim];
    for x in xs {
        for i in 0..dim {
            for j in 0..dim {
                m[i][j] += x[i] * x[j] / n;
            }
        }
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += 1.0 / n.sqrt();
    }
    m
}

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Best subset by recursive enumeration: `(value, subset)` minimizing
/// `(ln t / m) · |M_S⁻¹ x|²`, ties broken towards the smaller bitmask.
pub fn enumerate_min_width(t: u64, history: &[Vec<f64>], x: &[f64]) -> (f64, Vec<usize>) {
    fn walk(i: usize, chosen: &mut Vec<usize>, t: u64, h: &[Vec<f64>], x: &[f64], best: &mut Option<(f64, u64, Vec<usize>)>) {
        if i == h.len() {
            if chosen.is_empty() {
                return;
            }
            let xs: Vec<&[f64]> = chosen.iter().map(|&k| h[k].as_slice()).collect();
            let w = gauss_solve(&ridge_matrix(&xs, x.len()), x);
            let m = chosen.len() as f64;
            let value = (t as f64).ln() / m * w.iter().map(|v| v * v).sum::<f64>();
            let mask: u64 = chosen.iter().map(|&k| 1u64 << k).sum();
            let better = match best {
                None => true,
                Some((bv, bm, _)) => value < *bv || (value == *bv && mask < *bm),
            };
            if better {
                *best = Some((value, mask, chosen.clone()));
            }
            return;
        }
        chosen.push(i);
        walk(i + 1, chosen, t, h, x, best);
        chosen.pop();
        walk(i + 1, chosen, t, h, x, best);
    }
    let mut best = None;
    walk(0, &mut Vec::new(), t, history, x, &mut best);
    let (v, _, s) = best.expect("nonempty history");
    (v, s)
}
