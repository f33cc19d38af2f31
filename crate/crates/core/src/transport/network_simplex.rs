//! Primal network simplex for balanced transportation problems on the
//! complete bipartite graph (supply rows, demand columns, uncapacitated arcs).
//!
//! The spanning tree is stored with parent/thread/subtree-size arrays and
//! updated in place after each pivot. Arcs are implicit: arc `e = i * m + j`
//! runs from row `i` to column `j` with cost `c[i][j]`. Since arcs are
//! uncapacitated, every non-tree arc carries zero flow, so flows are kept
//! per tree node (the flow of its parent arc). The initial basis comes from
//! the north-west corner rule; the root hangs below row 0 through a single
//! zero-cost artificial arc that never leaves the tree.

use super::CostMatrix;
use crate::Real;

const UP: i8 = 1;
const DOWN: i8 = -1;
const NONE: usize = usize::MAX;

pub(crate) struct Solution<T> {
    /// `(row, col, flow)` for every tree arc with positive flow.
    pub flows: Vec<(usize, usize, i64)>,
    /// Node potentials: reduced cost of arc `(i, j)` is `c_ij + pi[i] - pi[rows + j]`.
    pub pi: Vec<T>,
    pub pivots: usize,
}

struct Tree<'a, T> {
    c: &'a CostMatrix<T>,
    rows: usize,
    cols: usize,
    root: usize,
    art: usize,
    pi: Vec<T>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    pred_flow: Vec<i64>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    dirty_revs: Vec<usize>,
}

impl<'a, T: Real> Tree<'a, T> {
    #[inline]
    fn source(&self, e: usize) -> usize {
        if e == self.art {
            0
        } else {
            e / self.cols
        }
    }

    #[inline]
    fn target(&self, e: usize) -> usize {
        if e == self.art {
            self.root
        } else {
            self.rows + e % self.cols
        }
    }

    #[inline]
    fn cost(&self, e: usize) -> T {
        if e == self.art {
            T::zero()
        } else {
            self.c.data()[e]
        }
    }

    fn new(c: &'a CostMatrix<T>, supply: &[i64], demand: &[i64]) -> Self {
        let rows = supply.len();
        let cols = demand.len();
        let nodes = rows + cols + 1;
        let root = rows + cols;
        let mut t = Tree {
            c,
            rows,
            cols,
            root,
            art: rows * cols,
            pi: vec![T::zero(); nodes],
            parent: vec![NONE; nodes],
            pred: vec![NONE; nodes],
            pred_dir: vec![UP; nodes],
            pred_flow: vec![0; nodes],
            thread: vec![0; nodes],
            rev_thread: vec![0; nodes],
            succ_num: vec![1; nodes],
            last_succ: vec![0; nodes],
            dirty_revs: Vec::new(),
        };

        let mut adj: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); nodes];
        let (mut a, mut b) = (supply.to_vec(), demand.to_vec());
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let f = a[i].min(b[j]);
            a[i] -= f;
            b[j] -= f;
            let e = i * cols + j;
            adj[i].push((rows + j, e, f));
            adj[rows + j].push((i, e, f));
            if i + 1 == rows && j + 1 == cols {
                break;
            }
            if a[i] == 0 && i + 1 < rows {
                i += 1;
            } else {
                j += 1;
            }
        }
        adj[root].push((0, t.art, 0));
        adj[0].push((root, t.art, 0));

        let mut order = Vec::with_capacity(nodes);
        let mut stack = vec![root];
        let mut seen = vec![false; nodes];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for &(w, e, f) in adj[u].iter().rev() {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                t.parent[w] = u;
                t.pred[w] = e;
                t.pred_flow[w] = f;
                t.pred_dir[w] = if t.source(e) == w { UP } else { DOWN };
                t.pi[w] = if t.pred_dir[w] == UP {
                    t.pi[u] - t.cost(e)
                } else {
                    t.pi[u] + t.cost(e)
                };
                stack.push(w);
            }
        }
        debug_assert_eq!(order.len(), nodes);
        for k in 0..nodes {
            let u = order[k];
            let next = order[(k + 1) % nodes];
            t.thread[u] = next;
            t.rev_thread[next] = u;
        }
        for &u in order.iter().rev() {
            let p = t.parent[u];
            if p != NONE {
                t.succ_num[p] += t.succ_num[u];
            }
        }
        // A subtree occupies a contiguous preorder block starting at its root.
        let mut pos = vec![0usize; nodes];
        for (k, &u) in order.iter().enumerate() {
            pos[u] = k;
        }
        for &u in &order {
            t.last_succ[u] = order[pos[u] + t.succ_num[u] - 1];
        }
        t
    }

    #[inline]
    fn reduced(&self, e: usize) -> T {
        let i = e / self.cols;
        let j = e % self.cols;
        self.c.data()[e] + self.pi[i] - self.pi[self.rows + j]
    }

    fn is_tree_arc(&self, e: usize) -> bool {
        let i = e / self.cols;
        let j = self.rows + e % self.cols;
        self.pred[i] == e || self.pred[j] == e
    }

    fn find_join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    fn pivot(&mut self, in_arc: usize) -> bool {
        let first = self.source(in_arc);
        let second = self.target(in_arc);
        let join = self.find_join(first, second);

        let mut delta = i64::MAX;
        let mut u_out = NONE;
        let mut result = 0;
        let mut u = first;
        while u != join {
            if self.pred_dir[u] == UP && self.pred_flow[u] < delta {
                delta = self.pred_flow[u];
                u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            if self.pred_dir[u] == DOWN && self.pred_flow[u] <= delta {
                delta = self.pred_flow[u];
                u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }
        if result == 0 {
            return false;
        }
        let (u_in, v_in) = if result == 1 { (first, second) } else { (second, first) };

        if delta > 0 {
            let mut u = first;
            while u != join {
                self.pred_flow[u] -= self.pred_dir[u] as i64 * delta;
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                self.pred_flow[u] += self.pred_dir[u] as i64 * delta;
                u = self.parent[u];
            }
        }

        self.update_tree(in_arc, delta, join, u_in, v_in, u_out);
        self.update_potential(in_arc, u_in, v_in);
        true
    }

    fn update_tree(&mut self, in_arc: usize, in_flow: i64, join: usize, u_in: usize, v_in: usize, u_out: usize) {
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_flow[u_in] = in_flow;
            self.pred_dir[u_in] = if u_in == self.source(in_arc) { UP } else { DOWN };

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            let mut p = self.parent[u];
            while u != u_in {
                self.pred[u] = self.pred[p];
                self.pred_flow[u] = self.pred_flow[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
                p = self.parent[u];
            }
            self.pred[u_in] = in_arc;
            self.pred_flow[u_in] = in_flow;
            self.pred_dir[u_in] = if u_in == self.source(in_arc) { UP } else { DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self, in_arc: usize, u_in: usize, v_in: usize) {
        let dir = if self.pred_dir[u_in] == UP { T::one() } else { -T::one() };
        let sigma = self.pi[v_in] - self.pi[u_in] - dir * self.cost(in_arc);
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    #[cfg(debug_assertions)]
    fn check_invariants(&self) {
        let nodes = self.root + 1;
        let mut count = 0;
        let mut u = self.root;
        loop {
            count += 1;
            assert_eq!(self.rev_thread[self.thread[u]], u);
            u = self.thread[u];
            if u == self.root {
                break;
            }
            assert!(count <= nodes);
        }
        assert_eq!(count, nodes);
        for u in 0..nodes {
            if u == self.root {
                continue;
            }
            let e = self.pred[u];
            let p = self.parent[u];
            let (s, t) = (self.source(e), self.target(e));
            if self.pred_dir[u] == UP {
                assert!(s == u && t == p);
            } else {
                assert!(s == p && t == u);
            }
            assert!(self.pred_flow[u] >= 0);
        }
    }
}

/// Solve the balanced transportation problem with integer masses.
pub(crate) fn solve<T: Real>(c: &CostMatrix<T>, supply: &[i64], demand: &[i64]) -> Option<Solution<T>> {
    let rows = supply.len();
    let cols = demand.len();
    debug_assert_eq!(c.rows(), rows);
    debug_assert_eq!(c.cols(), cols);
    let mut tree = Tree::new(c, supply, demand);

    let arcs = rows * cols;
    let max_cost = c.data().iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let eps = -(T::epsilon() * T::lit(256.0) * (max_cost + T::one()));
    let block = ((arcs as f64).sqrt() as usize).max(10).min(arcs.max(1));
    let mut next_arc = 0usize;
    let mut pivots = 0usize;
    #[cfg(debug_assertions)]
    let check_every = if rows + cols <= 64 { 1 } else { 0 };

    loop {
        let mut min = eps;
        let mut in_arc = NONE;
        let mut cnt = block;
        let mut e = next_arc;
        let mut scanned = 0usize;
        while scanned < arcs {
            let r = tree.reduced(e);
            if r < min && !tree.is_tree_arc(e) {
                min = r;
                in_arc = e;
            }
            scanned += 1;
            e += 1;
            if e == arcs {
                e = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if in_arc != NONE {
                    break;
                }
                cnt = block;
            }
        }
        if in_arc == NONE {
            break;
        }
        next_arc = e;
        if !tree.pivot(in_arc) {
            return None;
        }
        pivots += 1;
        #[cfg(debug_assertions)]
        if check_every == 1 {
            tree.check_invariants();
        }
    }

    let mut flows = Vec::new();
    for u in 0..tree.root {
        let e = tree.pred[u];
        if e != tree.art && tree.pred_flow[u] > 0 {
            flows.push((e / cols, e % cols, tree.pred_flow[u]));
        }
    }
    flows.sort_unstable();
    Some(Solution { flows, pi: tree.pi, pivots })
}
