use std::f64::consts::PI;

use anyhow::Result;
use mtquant::presets::preset;
use mtquant::transport::MonotonicityReport;
use mtquant::{
    check_cyclical_monotonicity, cost_matrix, fit_quantiles, latitude_profile, rng, solve_assignment,
    solve_assignment_sap, solve_kantorovich, Costs, FitOptions, ManifoldSpec, Point,
};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CheckArgs, Global};
use crate::output::OutDir;

#[derive(Serialize)]
struct Entry {
    name: String,
    passed: bool,
    measured: f64,
    tolerance: f64,
}

impl Entry {
    fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Entry { name: name.into(), passed: measured <= tolerance, measured, tolerance }
    }
}

/// Minimum total cost over all permutations (Heap's algorithm).
fn brute_force(c: &Costs) -> f64 {
    let n = c.rows();
    let mut p: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| c.get(i, j)).sum::<f64>();
    let mut best = total(&p);
    let mut st = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if st[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(st[i], i);
            }
            best = best.min(total(&p));
            st[i] += 1;
            i = 1;
        } else {
            st[i] = 0;
            i += 1;
        }
    }
    best
}

fn random_costs(n: usize, m: usize, r: &mut impl Rng) -> Costs {
    let data: Vec<f64> = (0..n * m).map(|_| r.random::<f64>()).collect();
    Costs::from_vec(n, m, data).expect("finite costs")
}

fn monotonicity(spec: &ManifoldSpec, pairs: &[(Point, Point)], seed: u64) -> MonotonicityReport {
    check_cyclical_monotonicity(spec, pairs, 4, 1000, seed)
}

pub fn check(g: &Global, a: &CheckArgs, out: &mut OutDir) -> Result<Value> {
    let mut r = rng::seeded(g.seed);
    let mut entries = Vec::new();

    let mut worst: f64 = 0.0;
    for n in 2..=7 {
        for _ in 0..a.trials {
            let c = random_costs(n, n, &mut r);
            let plan = solve_assignment(&c)?;
            worst = worst.max((plan.objective - brute_force(&c)).abs());
        }
    }
    entries.push(Entry::at_most("assignment_vs_brute_force", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for _ in 0..a.trials {
        let c = random_costs(40, 40, &mut r);
        let (x, y) = (solve_assignment(&c)?.objective, solve_assignment_sap(&c)?.objective);
        worst = worst.max((x - y).abs() / x.abs().max(1.0));
    }
    entries.push(Entry::at_most("assignment_solvers_agree", worst, 1e-9));

    let mut worst: f64 = 0.0;
    for _ in 0..a.trials {
        let c = random_costs(40, 25, &mut r);
        let mut w: Vec<f64> = (0..25).map(|_| r.random::<f64>() + 0.01).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let plan = solve_kantorovich(&c, &w)?;
        let rows = plan.row_sums().iter().map(|v| (v - 1.0 / 40.0).abs()).fold(0.0, f64::max);
        let cols = plan.col_sums().iter().zip(&w).map(|(v, t)| (v - t).abs()).fold(0.0, f64::max);
        worst = worst.max(rows).max(cols);
    }
    entries.push(Entry::at_most("kantorovich_marginals", worst, 1e-9));

    let s2 = ManifoldSpec::sphere(2);
    let ys: Vec<Point> = s2.uniform_sample(50, rng::derive(g.seed, 11));
    let zs: Vec<Point> = s2.uniform_sample(50, rng::derive(g.seed, 12));
    let perm = solve_assignment(&cost_matrix(&s2, &ys, &zs)?)?.perm;
    let pairs: Vec<(Point, Point)> = perm.iter().enumerate().map(|(i, &j)| (ys[i].clone(), zs[j].clone())).collect();
    let rep = monotonicity(&s2, &pairs, g.seed);
    entries.push(Entry::at_most("cyclical_monotonicity", rep.max_violation, 1e-9));

    let mut worst: f64 = 0.0;
    for k in 0..=100 {
        let tau = k as f64 / 100.0;
        worst = worst.max((latitude_profile(1, tau)? - tau).abs());
        worst = worst.max((latitude_profile(2, tau)? - (1.0 - 2.0 * tau).acos() / PI).abs());
        let th = PI * latitude_profile(3, tau)?;
        worst = worst.max(((th - th.sin() * th.cos()) / PI - tau).abs());
    }
    entries.push(Entry::at_most("latitude_closed_forms", worst, 1e-9));

    let mut off = 0usize;
    for (name, spec) in [("S3", s2.clone()), ("T3", ManifoldSpec::torus(2))] {
        let pts: Vec<Point> = preset(name, &spec)?.sample(505, g.seed);
        let fit = fit_quantiles(&spec, &pts, &FitOptions::new(5, 10, 50).seed(g.seed))?;
        let want: Vec<usize> = std::iter::once(5).chain(std::iter::repeat_n(50, 10)).collect();
        off += fit.rank_counts().iter().zip(&want).filter(|(a, b)| a != b).count();
    }
    entries.push(Entry::at_most("rank_counts", off as f64, 0.0));

    if a.inject_suboptimal {
        let s1 = ManifoldSpec::sphere(1);
        let p = |t: f64| s1.point_from_angles::<f64>(&[t]).expect("angle");
        let crossed = vec![(p(0.0), p(1.1)), (p(1.0), p(0.1))];
        let rep = monotonicity(&s1, &crossed, g.seed);
        entries.push(Entry::at_most("injected_suboptimal_plan", rep.max_violation, 1e-9));
    }

    let passed = entries.iter().filter(|e| e.passed).count();
    let report = json!({ "passed": passed, "failed": entries.len() - passed, "entries": entries });
    out.write_json("check.json", &report)?;
    for e in &entries {
        println!("{:<28} {} measured={:.3e} tolerance={:.1e}", e.name, if e.passed { "ok  " } else { "FAIL" }, e.measured, e.tolerance);
    }
    Ok(report)
}
