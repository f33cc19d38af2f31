//! Dense linear assignment by Jonker and Volgenant's shortest augmenting
//! path method: column reduction with reduction transfer, then
//! Dijkstra-style augmentation for the rows still free.

use super::CostMatrix;
use crate::Real;

const NONE: usize = usize::MAX;

pub(crate) struct Lap<T> {
    pub row_to_col: Vec<usize>,
    pub col_to_row: Vec<usize>,
    pub v: Vec<T>,
}

pub(crate) fn lapjv<T: Real>(c: &CostMatrix<T>) -> Lap<T> {
    let n = c.rows();
    let mut x = vec![NONE; n];
    let mut y = vec![NONE; n];
    let mut v = vec![T::zero(); n];
    if n == 0 {
        return Lap { row_to_col: x, col_to_row: y, v };
    }
    let free = column_reduction(c, &mut x, &mut y, &mut v);
    augment(c, &free, &mut x, &mut y, &mut v);
    Lap { row_to_col: x, col_to_row: y, v }
}

fn column_reduction<T: Real>(c: &CostMatrix<T>, x: &mut [usize], y: &mut [usize], v: &mut [T]) -> Vec<usize> {
    let n = c.rows();
    for vj in v.iter_mut() {
        *vj = T::infinity();
    }
    for i in 0..n {
        let row = c.row(i);
        for j in 0..n {
            if row[j] < v[j] {
                v[j] = row[j];
                y[j] = i;
            }
        }
    }
    let mut unique = vec![true; n];
    for j in (0..n).rev() {
        let i = y[j];
        if x[i] == NONE {
            x[i] = j;
        } else {
            unique[i] = false;
            y[j] = NONE;
        }
    }
    let mut free = Vec::new();
    for i in 0..n {
        if x[i] == NONE {
            free.push(i);
        } else if unique[i] {
            let j = x[i];
            let row = c.row(i);
            let mut min = T::infinity();
            for j2 in 0..n {
                if j2 != j {
                    let r = row[j2] - v[j2];
                    if r < min {
                        min = r;
                    }
                }
            }
            if min.is_finite() {
                v[j] -= min;
            }
        }
    }
    free
}

fn augment<T: Real>(c: &CostMatrix<T>, free: &[usize], x: &mut [usize], y: &mut [usize], v: &mut [T]) {
    let n = c.rows();
    let mut pred = vec![0usize; n];
    let mut cols: Vec<usize> = (0..n).collect();
    let mut d = vec![T::zero(); n];
    for &free_i in free {
        let sink = find_path(c, free_i, y, v, &mut pred, &mut cols, &mut d);
        let mut j = sink;
        loop {
            let i = pred[j];
            y[j] = i;
            let prev = x[i];
            x[i] = j;
            j = prev;
            if i == free_i {
                break;
            }
        }
    }
}

fn find_path<T: Real>(
    c: &CostMatrix<T>,
    start: usize,
    y: &[usize],
    v: &mut [T],
    pred: &mut [usize],
    cols: &mut [usize],
    d: &mut [T],
) -> usize {
    let n = c.rows();
    let row = c.row(start);
    for j in 0..n {
        cols[j] = j;
        pred[j] = start;
        d[j] = row[j] - v[j];
    }
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut n_ready = 0usize;
    let mut final_j = NONE;
    let mut mind = T::zero();
    while final_j == NONE {
        if lo == hi {
            n_ready = lo;
            hi = find_min_cols(lo, d, cols);
            mind = d[cols[lo]];
            for &j in &cols[lo..hi] {
                if y[j] == NONE {
                    final_j = j;
                    break;
                }
            }
        }
        if final_j == NONE {
            final_j = scan(c, &mut lo, &mut hi, d, cols, pred, y, v);
        }
    }
    // `lo` may already point past the minimum set when `scan` stopped early,
    // so the level of the last minimum set is tracked separately.
    for &j in &cols[..n_ready] {
        v[j] += d[j] - mind;
    }
    final_j
}

fn find_min_cols<T: Real>(lo: usize, d: &[T], cols: &mut [usize]) -> usize {
    let n = cols.len();
    let mut hi = lo + 1;
    let mut mind = d[cols[lo]];
    for k in hi..n {
        let j = cols[k];
        if d[j] <= mind {
            if d[j] < mind {
                hi = lo;
                mind = d[j];
            }
            cols[k] = cols[hi];
            cols[hi] = j;
            hi += 1;
        }
    }
    hi
}

#[allow(clippy::too_many_arguments)]
fn scan<T: Real>(
    c: &CostMatrix<T>,
    lo: &mut usize,
    hi: &mut usize,
    d: &mut [T],
    cols: &mut [usize],
    pred: &mut [usize],
    y: &[usize],
    v: &[T],
) -> usize {
    let n = cols.len();
    while *lo != *hi {
        let j = cols[*lo];
        *lo += 1;
        let i = y[j];
        let mind = d[j];
        let row = c.row(i);
        let h = row[j] - v[j] - mind;
        let mut k = *hi;
        while k < n {
            let j = cols[k];
            let red = row[j] - v[j] - h;
            if red < d[j] {
                d[j] = red;
                pred[j] = i;
                if red == mind {
                    if y[j] == NONE {
                        return j;
                    }
                    cols[k] = cols[*hi];
                    cols[*hi] = j;
                    *hi += 1;
                }
            }
            k += 1;
        }
    }
    NONE
}
