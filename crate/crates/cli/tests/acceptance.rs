//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints a PASS or FAIL line; exits nonzero if any fails.

#[path = "../../core/tests/common/lp.rs"]
mod lp;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use mtquant::io::{read_contour_json, read_fit_json, read_points_csv};
use mtquant::presets::{preset, regression_model, UNCONDITIONAL};
use mtquant::*;
use mtquant_cli::{run, Cli};
use rand::Rng;
use serde_json::Value;

type Outcome = (bool, String);

fn mtq(out: &Path, args: &[&str]) -> Value {
    let mut argv = vec!["mtquant".to_string(), "--out".into(), out.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run(&Cli::try_parse_from(argv).expect("arguments")).expect("command")
}

fn s2() -> ManifoldSpec {
    ManifoldSpec::sphere(2)
}

fn dense(c: &Costs) -> Vec<Vec<f64>> {
    (0..c.rows()).map(|i| c.row(i).to_vec()).collect()
}

fn sphere_costs(rows: usize, cols: usize, seed: u64) -> Costs {
    let a: Vec<Point> = s2().uniform_sample(rows, seed);
    let b: Vec<Point> = s2().uniform_sample(cols, rng::derive(seed, 99));
    cost_matrix(&s2(), &a, &b).unwrap()
}

fn simplex_weights(n: usize, r: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| r.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn assignment_exactness() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=8 {
        for k in 0..200 {
            let c = sphere_costs(n, n, 10_000 * n as u64 + k);
            let (best, _) = lp::brute_force_assignment(&dense(&c));
            worst = worst.max((solve_assignment(&c).unwrap().objective - best).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    (worst <= 1e-12 && secs < 30.0, format!("max |gap| = {worst:.2e} (tol 1e-12), {secs:.1} s (limit 30 s)"))
}

fn kantorovich_correctness() -> Outcome {
    let mut r = rng::seeded(2);
    let (mut gap, mut resid) = (0.0f64, 0.0f64);
    for k in 0..100 {
        let rows = r.random_range(1..=6);
        let cols = r.random_range(1..=5);
        let c = sphere_costs(rows, cols, 500 + k);
        let w = simplex_weights(cols, &mut r);
        let plan = solve_kantorovich(&c, &w).unwrap();
        let a = vec![1.0 / rows as f64; rows];
        let (oracle, _) = lp::transport_lp(&dense(&c), &a, &w).expect("feasible");
        gap = gap.max((plan.objective - oracle).abs());
        for (s, m) in plan.row_sums().iter().zip(&a).chain(plan.col_sums().iter().zip(&w)) {
            resid = resid.max((s - m).abs());
        }
    }
    (gap < 1e-9 && resid < 1e-9, format!("objective gap {gap:.2e}, marginal residual {resid:.2e} (tol 1e-9)"))
}

fn cyclical_monotonicity() -> Outcome {
    let spec = s2();
    let mut worst = 0.0f64;
    let mut r = rng::seeded(3);
    for seed in 0..10 {
        let a: Vec<Point> = spec.uniform_sample(50, seed);
        let b: Vec<Point> = spec.uniform_sample(50, seed + 1000);
        let perm = solve_assignment(&cost_matrix(&spec, &a, &b).unwrap()).unwrap().perm;
        let pairs: Vec<(Point, Point)> = perm.iter().enumerate().map(|(i, &j)| (a[i].clone(), b[j].clone())).collect();
        worst = worst.max(check_cyclical_monotonicity(&spec, &pairs, 4, 1000, seed).max_violation);

        let z: Vec<Point> = spec.uniform_sample(20, seed + 2000);
        let w = simplex_weights(20, &mut r);
        let plan = solve_kantorovich(&cost_matrix(&spec, &a, &z).unwrap(), &w).unwrap();
        let pairs: Vec<(Point, Point)> = plan.entries.iter().map(|&(i, j, _)| (a[i].clone(), z[j].clone())).collect();
        worst = worst.max(check_cyclical_monotonicity(&spec, &pairs, 4, 1000, seed).max_violation);
    }
    (worst <= 1e-9, format!("max cycle violation {worst:.2e} over 20 plans x 1000 cycles (tol 1e-9)"))
}

fn latitude() -> Outcome {
    let (mut e2, mut e1, mut eh) = (0.0f64, 0.0f64, 0.0f64);
    for k in 1..=99 {
        let tau = k as f64 / 100.0;
        e2 = e2.max((latitude_profile(2, tau).unwrap() - (1.0 - 2.0 * tau).acos() / PI).abs());
        e1 = e1.max((latitude_profile(1, tau).unwrap() - tau).abs());
    }
    for p in 1..=5 {
        eh = eh.max((latitude_profile(p, 0.5).unwrap() - 0.5).abs());
    }
    (
        e2 < 1e-9 && e1 < 1e-12 && eh < 1e-10,
        format!("p=2 {e2:.2e} (tol 1e-9), p=1 {e1:.2e} (tol 1e-12), s(1/2) {eh:.2e} (tol 1e-10)"),
    )
}

fn rank_counts() -> Outcome {
    let t = Instant::now();
    let want: Vec<usize> = std::iter::once(5).chain(std::iter::repeat_n(50, 10)).collect();
    let mut bad = Vec::new();
    for name in UNCONDITIONAL {
        let spec = if name.starts_with('T') { ManifoldSpec::torus(2) } else { s2() };
        let pts: Vec<Point> = preset(name, &spec).unwrap().sample(505, 11);
        for rule in [CenterRule::FrechetCap, CenterRule::FrechetStrip(0)] {
            let fit = fit_quantiles(&spec, &pts, &FitOptions::new(5, 10, 50).center(rule.clone()).seed(11)).unwrap();
            let mut sorted = fit.ranks.clone();
            sorted.sort_unstable();
            let expect: Vec<usize> = want.iter().enumerate().flat_map(|(r, &c)| std::iter::repeat_n(r, c)).collect();
            if fit.rank_counts() != want || sorted != expect {
                bad.push(format!("{name}/{rule:?}"));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    (
        bad.is_empty() && secs < 120.0,
        format!("{} presets x 2 centers, mismatches {bad:?}, {secs:.1} s (limit 120 s)", UNCONDITIONAL.len()),
    )
}

fn distribution_freeness() -> Outcome {
    let spec = s2();
    let laws = [Law::uniform(&spec), Law::vmf(vec![0.0, 0.0, 1.0], 5.0).unwrap()];
    let mut freq = [[0.0f64; 4]; 2];
    let seeds = 2000;
    for (g, law) in laws.iter().enumerate() {
        for seed in 0..seeds {
            let pts: Vec<Point> = law.sample(13, rng::derive(seed, 0xd1 + g as u64));
            let fit = fit_quantiles(&spec, &pts, &FitOptions::new(1, 3, 4).seed(seed)).unwrap();
            freq[g][fit.ranks[0]] += 1.0 / seeds as f64;
        }
    }
    let tv = 0.5 * (0..4).map(|j| (freq[0][j] - freq[1][j]).abs()).sum::<f64>();
    let dev = (0..2).flat_map(|g| (1..4).map(move |j| (g, j))).map(|(g, j)| (freq[g][j] - 4.0 / 13.0).abs()).fold(0.0, f64::max);
    (
        tv <= 0.03 && dev <= 0.03,
        format!("TV {tv:.4} (tol 0.03), max |P(R=j) - 4/13| {dev:.4} (tol 0.03); uniform {:.3?}, vmf {:.3?}", freq[0], freq[1]),
    )
}

fn glivenko_cantelli() -> Outcome {
    let t = Instant::now();
    let spec = s2();
    let mut meds = Vec::new();
    for (n0, nr, ns) in [(1, 3, 40), (1, 16, 63), (1, 40, 100)] {
        let n = n0 + nr * ns;
        let errs: Vec<f64> = (0..20)
            .map(|seed| {
                let pts: Vec<Point> = spec.uniform_sample(n, rng::derive(seed, 0x6c));
                let fit = fit_quantiles(&spec, &pts, &FitOptions::new(n0, nr, ns).seed(seed)).unwrap();
                (0..n).map(|i| spec.dist(fit.image(i), &pts[i])).fold(0.0, f64::max)
            })
            .collect();
        meds.push(median(errs));
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = meds[0] > meds[1] && meds[1] > meds[2] && meds[2] < 0.35 && secs < 600.0;
    (ok, format!("medians at n = 121/1009/4001: {:.4}/{:.4}/{:.4} (last < 0.35), {secs:.0} s (limit 600 s)", meds[0], meds[1], meds[2]))
}

fn region_content() -> Outcome {
    let spec = s2();
    let law = preset("S1", &spec).unwrap();
    let pts: Vec<Point> = law.sample(4001, 81);
    let fit = fit_quantiles(&spec, &pts, &FitOptions::new(1, 40, 100).seed(81)).unwrap();
    let eval: Vec<Point> = law.sample(100_000, 82);
    let nearest_rank: Vec<usize> = eval
        .iter()
        .map(|e| {
            let (mut best, mut bi) = (f64::NEG_INFINITY, 0);
            for (i, p) in pts.iter().enumerate() {
                let d: f64 = e.coords().iter().zip(p.coords()).map(|(a, b)| a * b).sum();
                if d > best {
                    best = d;
                    bi = i;
                }
            }
            fit.ranks[bi]
        })
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [10, 20, 30] {
        let frac = nearest_rank.iter().filter(|&&k| k <= r).count() as f64 / eval.len() as f64;
        let want = r as f64 / 41.0;
        ok &= (frac - want).abs() <= 0.05;
        parts.push(format!("r={r}: {frac:.4} vs {want:.4}"));
    }
    (ok, format!("{} (tol 0.05)", parts.join(", ")))
}

fn ss1_proxy(tau: f64) -> Vec<Point> {
    let law = regression_model("SS1").unwrap().conditional(&[0.6, 0.8]);
    let mut colat: Vec<f64> = law.sample::<f64>(100_000, 77).iter().map(|p| p.coords()[2].clamp(-1.0, 1.0).acos()).collect();
    colat.sort_by(f64::total_cmp);
    let c = colat[(tau * colat.len() as f64) as usize];
    (0..720)
        .map(|k| {
            let a = k as f64 * PI / 360.0;
            s2().point(vec![c.sin() * a.cos(), c.sin() * a.sin(), c.cos()]).unwrap()
        })
        .collect()
}

/// `region(r)` as the sorted indices with rank at most `r`, checked to be
/// contained in `region(r + 1)` for every `r`.
fn nested(ranks: &[usize], n_r: usize) -> bool {
    let region = |r: usize| -> Vec<usize> { (0..ranks.len()).filter(|&i| ranks[i] <= r).collect() };
    (0..n_r).all(|r| {
        let (a, b) = (region(r), region(r + 1));
        a.len() < b.len() && a.iter().all(|i| b.binary_search(i).is_ok())
    })
}

fn full_scale_recipes(dir: &Path) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, args) in [
        ("S1 caps", vec!["fit", "--preset", "S1", "-n", "4001", "--n0", "1", "--nr", "40", "--ns", "100", "--contours", "0,5,10,20,28"]),
        ("Ta strips", vec!["fit", "--preset", "Ta", "-n", "4001", "--n0", "41", "--nr", "20", "--ns", "198", "--center", "strip", "--contours", "0,5,9,12,16"]),
    ] {
        let out = dir.join(label.replace(' ', "_"));
        let t = Instant::now();
        let m = mtq(&out, &args);
        let secs = t.elapsed().as_secs_f64();
        let rec = read_fit_json(fs::File::open(out.join("fit.json")).unwrap()).unwrap();
        let regions_nest = nested(&rec.ranks, rec.n_r);
        let contours_ok = m["summary"]["contours"].as_array().unwrap().iter().all(|f| {
            let path = out.join(f.as_str().unwrap());
            let c = mtquant::io::read_contour_csv(fs::File::open(path).unwrap(), &rec.spec().unwrap()).unwrap();
            c.iter().all(|(i, ring, _)| rec.ranks[*i] == *ring)
        });
        ok &= secs < 600.0 && regions_nest && contours_ok;
        parts.push(format!("{label} {secs:.1} s"));
    }

    let proxy = ss1_proxy(12.0 / 21.0);
    let mut errs = Vec::new();
    let mut worst_secs = 0.0f64;
    for seed in 0..10u64 {
        let out = dir.join(format!("ss1_{seed}"));
        let t = Instant::now();
        let s = seed.to_string();
        mtq(&out, &["--seed", &s, "--format", "json", "regress", "--model", "SS1", "-n", "10000", "--query", "0.6,0.8", "--n0", "1", "--nr", "20", "--ns", "100", "--k", "2001", "--threads", "1"]);
        worst_secs = worst_secs.max(t.elapsed().as_secs_f64());
        let contour = |r: usize| {
            let rec = read_contour_json(fs::File::open(out.join(format!("q0/contour_r{r}.json"))).unwrap()).unwrap();
            (rec.indices.clone(), rec.decode().unwrap().1)
        };
        let (_, c12) = contour(12);
        errs.push(hausdorff_distance(&s2(), &c12, &proxy).unwrap());
        let data = fs::read(out.join("data.csv")).unwrap();
        let ys = read_points_csv(&data[..], &s2()).unwrap();
        let m = regression_model("SS1").unwrap();
        let (xs, _): (Vec<Vec<f64>>, Vec<Point>) = m.sample(10_000, seed);
        let fit = fit_conditional(
            &s2(),
            &m.covariate_space(),
            &xs,
            &ys,
            &[0.6, 0.8],
            &WeightFunction::Knn { k: 2001 },
            &ConditionalOptions::new(1, 20, 100).seed(seed),
        )
        .unwrap();
        let regions: Vec<Vec<usize>> = (0..=20).map(|r| fit.region(r).unwrap()).collect();
        ok &= regions.windows(2).all(|w| w[0].iter().all(|i| w[1].binary_search(i).is_ok()));
        ok &= contour(12).0.iter().all(|i| regions[12].binary_search(i).is_ok());
    }
    let med = median(errs);
    ok &= med < 0.25 && worst_secs < 600.0;
    parts.push(format!("SS1 regress worst {worst_secs:.1} s, median d_H at r=12 {med:.4} rad (tol 0.25)"));
    (ok, parts.join("; "))
}

fn uniform_weight_reduction(dir: &Path) -> Outcome {
    let mut worst = 0.0f64;
    for (model, manifold) in [("SS1", "s2"), ("TS1", "t2")] {
        let reg = dir.join(format!("reg_{model}"));
        let fit = dir.join(format!("fit_{model}"));
        let grid = ["--n0", "1", "--nr", "4", "--ns", "10"];
        let mut a = vec!["--seed", "5", "--format", "json", "regress", "--model", model, "-n", "41", "--k", "41", "--query"];
        a.push(if model == "SS1" { "0.6,0.8" } else { "0,0,1" });
        a.extend(grid);
        mtq(&reg, &a);
        let data = reg.join("data.csv");
        let mut b = vec!["--seed", "5", "--format", "json", "--manifold", manifold, "fit", "--input", data.to_str().unwrap()];
        b.extend(grid);
        mtq(&fit, &b);
        let spec: ManifoldSpec = manifold.parse().unwrap();
        for r in 0..=4 {
            let load = |p: PathBuf| read_contour_json(fs::File::open(p).unwrap()).unwrap().decode().unwrap().1;
            let x = load(reg.join(format!("q0/contour_r{r}.json")));
            let y = load(fit.join(format!("contour_r{r}.json")));
            worst = worst.max(hausdorff_distance(&spec, &x, &y).unwrap());
        }
    }
    (worst < 1e-9, format!("max d_H between regress (k = n) and fit contours {worst:.2e} (tol 1e-9)"))
}

fn comets(dir: &Path) -> Outcome {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/comets_fixture.csv");
    let out = dir.join("comets");
    let m = mtq(&out, &["comets", "--input", fixture.to_str().unwrap()]);
    let s = &m["summary"];
    let mut ok = s["fits"]["cap"]["n"] == 3901 && s["fits"]["strip"]["n"] == 3901;
    for sub in ["cap", "strip"] {
        for r in [0, 10, 18, 26, 34] {
            ok &= out.join(format!("{sub}/contour_r{r}.csv")).exists();
        }
    }
    let core: Vec<f64> = s["cap_r0_omega"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    ok &= !core.is_empty() && core.iter().all(|w| (1.0..=2.0).contains(w));
    (
        ok,
        format!(
            "cap/strip consumed {}/{} rows, {} dropped for missing angles, r=0 cap omega {core:.3?}",
            s["fits"]["cap"]["n"], s["fits"]["strip"]["n"], s["dropped_missing"]
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("assignment exactness vs brute force", Box::new(assignment_exactness)),
        ("Kantorovich plans vs dense LP", Box::new(kantorovich_correctness)),
        ("cyclical monotonicity of optimal plans", Box::new(cyclical_monotonicity)),
        ("latitude profile closed forms", Box::new(latitude)),
        ("rank counts across the preset matrix", Box::new(rank_counts)),
        ("distribution-free ranks at n = 13", Box::new(distribution_freeness)),
        ("Glivenko-Cantelli trend on the uniform sphere", Box::new(glivenko_cantelli)),
        ("region probability content", Box::new(region_content)),
        ("full-scale recipes, nesting, SS1 accuracy", Box::new(|| full_scale_recipes(dir))),
        ("uniform-weight reduction", Box::new(|| uniform_weight_reduction(dir))),
        ("comets pipeline", Box::new(|| comets(dir))),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, k + 1, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
