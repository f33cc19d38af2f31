//! Independent oracles for small transport problems: exhaustive permutation
//! search and a dense two-phase tableau simplex with Bland's rule.

#![allow(dead_code)]

/// Minimum of `sum_i c[i][perm[i]]` over all permutations (Heap's algorithm).
pub fn brute_force_assignment(c: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = c.len();
    let mut p: Vec<usize> = (0..n).collect();
    let score = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>();
    let mut best = (score(&p), p.clone());
    let mut stack = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(stack[i], i);
            }
            let s = score(&p);
            if s < best.0 {
                best = (s, p.clone());
            }
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    best
}

/// `min c.x` subject to `A x = b`, `x >= 0`, with `b >= 0`. Returns the
/// optimal value and solution, or `None` if infeasible.
pub fn simplex(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    let eps = 1e-11;
    // Columns: n structural, m artificial, then the right-hand side.
    let w = n + m + 1;
    let mut t = vec![vec![0.0; w]; m];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][w - 1] = b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| {
        loop {
            // Reduced costs r_j = c_j - c_B B^-1 A_j.
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j];
                for i in 0..m {
                    r -= cost[basis[i]] * t[i][j];
                }
                if r < -eps {
                    enter = Some(j);
                    break;
                }
            }
            let Some(e) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if t[i][e] > eps {
                    let ratio = t[i][w - 1] / t[i][e];
                    let better = match leave {
                        None => true,
                        Some((l, lr)) => ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((l, _)) = leave else { return false };
            let piv = t[l][e];
            for v in t[l].iter_mut() {
                *v /= piv;
            }
            for i in 0..m {
                if i != l && t[i][e] != 0.0 {
                    let f = t[i][e];
                    for j in 0..w {
                        t[i][j] -= f * t[l][j];
                    }
                }
            }
            basis[l] = e;
        }
    };

    let mut phase1 = vec![0.0; n + m];
    for v in phase1[n..].iter_mut() {
        *v = 1.0;
    }
    run(&mut t, &mut basis, &phase1, n + m);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][w - 1]).sum();
    if infeas > 1e-9 {
        return None;
    }
    // Drive remaining zero-level artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(e) = (0..n).find(|&j| !basis.contains(&j) && t[i][j].abs() > eps) {
                let piv = t[i][e];
                for v in t[i].iter_mut() {
                    *v /= piv;
                }
                for k in 0..m {
                    if k != i && t[k][e] != 0.0 {
                        let f = t[k][e];
                        for j in 0..w {
                            t[k][j] -= f * t[i][j];
                        }
                    }
                }
                basis[i] = e;
            }
        }
    }
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat(1e6).take(m));
    if !run(&mut t, &mut basis, &phase2, n) {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][w - 1];
        }
    }
    let obj = x.iter().zip(c).map(|(a, b)| a * b).sum();
    Some((obj, x))
}

/// Transportation LP `min sum c_ij p_ij` with row sums `a` and column sums `b`.
pub fn transport_lp(c: &[Vec<f64>], a: &[f64], b: &[f64]) -> Option<(f64, Vec<Vec<f64>>)> {
    let (r, k) = (a.len(), b.len());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..r {
        let mut row = vec![0.0; r * k];
        for j in 0..k {
            row[i * k + j] = 1.0;
        }
        rows.push(row);
        rhs.push(a[i]);
    }
    for j in 0..k {
        let mut row = vec![0.0; r * k];
        for i in 0..r {
            row[i * k + j] = 1.0;
        }
        rows.push(row);
        rhs.push(b[j]);
    }
    let cost: Vec<f64> = (0..r * k).map(|e| c[e / k][e % k]).collect();
    let (obj, x) = simplex(&rows, &rhs, &cost)?;
    Some((obj, (0..r).map(|i| x[i * k..(i + 1) * k].to_vec()).collect()))
}
