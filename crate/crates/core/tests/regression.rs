use std::f64::consts::PI;

use mtquant::presets::regression_model;
use mtquant::regression::{conditional_frechet_mean, extract_conditional_contour, extract_conditional_region};
use mtquant::*;

fn s2() -> ManifoldSpec {
    ManifoldSpec::sphere(2)
}

fn line(xs: &[f64]) -> Vec<Vec<f64>> {
    xs.iter().map(|&x| vec![x]).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[test]
fn knn_examples() {
    let e1 = CovariateSpace::Euclidean(1);
    let cov = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
    assert_eq!(knn_weights(&e1, &[7.0], &cov, 5).unwrap(), vec![0.2; 5]);
    assert_eq!(knn_weights(&e1, &[3.0], &cov, 1).unwrap(), vec![0.0, 0.0, 0.0, 1.0, 0.0]);
    assert_eq!(knn_weights(&e1, &[1.5], &cov, 2).unwrap(), vec![0.0, 0.5, 0.5, 0.0, 0.0]);
    // 1 and 3 tie at distance 1 from 2; the smaller index wins.
    assert_eq!(knn_weights(&e1, &[2.0], &cov, 2).unwrap(), vec![0.0, 0.5, 0.5, 0.0, 0.0]);
    assert_eq!(knn_weights(&e1, &[2.0], &cov, 3).unwrap(), vec![0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
    assert!(matches!(knn_weights(&e1, &[2.0], &cov, 6), Err(RegressionError::BadK { k: 6, n: 5 })));
    assert!(matches!(knn_weights(&e1, &[2.0], &cov, 0), Err(RegressionError::BadK { .. })));
    assert!(matches!(knn_weights(&e1, &[2.0, 1.0], &cov, 1), Err(RegressionError::CovariateDim { expected: 1, got: 2 })));
}

#[test]
fn knn_is_isometry_invariant() {
    let m = regression_model("SS1").unwrap();
    let (xs, _): (Vec<Vec<f64>>, Vec<Point>) = m.sample(300, 1);
    let space = m.covariate_space();
    let rot = |v: &[f64]| {
        let (s, c) = 0.7f64.sin_cos();
        vec![c * v[0] - s * v[1], s * v[0] + c * v[1]]
    };
    let q = vec![0.6, 0.8];
    let a = knn_weights(&space, &q, &xs, 37).unwrap();
    let rx: Vec<Vec<f64>> = xs.iter().map(|x| rot(x)).collect();
    let b = knn_weights(&space, &rot(&q), &rx, 37).unwrap();
    assert_eq!(a, b);
    let sum: f64 = a.iter().sum();
    assert!((sum - 1.0).abs() < 1e-12);

    let e2 = CovariateSpace::Euclidean(2);
    let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()]).collect();
    let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![-p[1] + 3.0, p[0] - 1.0]).collect();
    assert_eq!(
        knn_weights(&e2, &[0.1, 0.2], &pts, 9).unwrap(),
        knn_weights(&e2, &[-0.2 + 3.0, 0.1 - 1.0], &moved, 9).unwrap()
    );
}

#[test]
fn kernel_examples() {
    let e1 = CovariateSpace::Euclidean(1);
    let w = kernel_weights(&e1, &[1.0], &line(&[1.0, 1.0, 1.0]), 0.3, Kernel::TrimmedGaussian).unwrap();
    assert_eq!(w, vec![1.0 / 3.0; 3]);

    let w = kernel_weights(&e1, &[0.0], &line(&[0.0, 0.25, 2.0]), 0.5, Kernel::TrimmedGaussian).unwrap();
    let z = 1.0 + (-0.25f64).exp();
    assert!((w[0] - 1.0 / z).abs() < 1e-15 && (w[1] - (-0.25f64).exp() / z).abs() < 1e-15 && w[2] == 0.0);

    let w = kernel_weights(&e1, &[0.0], &line(&[0.0, 0.5]), 0.5, Kernel::TrimmedGaussian).unwrap();
    let z = 1.0 + (-1f64).exp();
    assert!((w[1] - (-1f64).exp() / z).abs() < 1e-15);

    let w = kernel_weights(&e1, &[0.0], &line(&[0.0, 0.5, 0.6]), 0.5, Kernel::Box).unwrap();
    assert_eq!(w, vec![0.5, 0.5, 0.0]);

    assert!(matches!(
        kernel_weights(&e1, &[0.0], &line(&[1.0, 2.0]), 0.5, Kernel::TrimmedGaussian),
        Err(RegressionError::EmptyWindow(_))
    ));
    assert!(matches!(kernel_weights(&e1, &[0.0], &line(&[0.0]), 0.0, Kernel::Box), Err(RegressionError::BadBandwidth(_))));
    assert!(matches!(kernel_weights(&e1, &[0.0], &line(&[0.0]), f64::NAN, Kernel::Box), Err(RegressionError::BadBandwidth(_))));
    assert_eq!(Kernel::TrimmedGaussian.eval(1.0), (-1f64).exp());
    assert_eq!(Kernel::TrimmedGaussian.eval(1.0 + 1e-12), 0.0);
}

#[test]
fn kernel_on_sphere_covariates() {
    let space = CovariateSpace::Manifold(s2());
    let cov = vec![vec![0.0, 0.0, 1.0], vec![0.0, (0.2f64).sin(), (0.2f64).cos()], vec![1.0, 0.0, 0.0]];
    let w = kernel_weights(&space, &[0.0, 0.0, 1.0], &cov, PI / 10.0, Kernel::TrimmedGaussian).unwrap();
    let u = 0.2 / (PI / 10.0);
    let z = 1.0 + (-u * u).exp();
    assert!((w[1] - (-u * u).exp() / z).abs() < 1e-12);
    assert_eq!(w[2], 0.0);
    let wf = WeightFunction::Kernel { h: PI / 10.0, kernel: Kernel::TrimmedGaussian };
    assert_eq!(wf.weights(&space, &[0.0, 0.0, 1.0], &cov).unwrap(), w);
}

#[test]
fn weight_functions_serialize() {
    let wf = WeightFunction::Kernel { h: 0.25, kernel: Kernel::TrimmedGaussian };
    let text = serde_json::to_string(&wf).unwrap();
    assert!(text.contains("\"kind\""));
    assert_eq!(serde_json::from_str::<WeightFunction>(&text).unwrap(), wf);
    let wf = WeightFunction::Knn { k: 12 };
    assert_eq!(serde_json::from_str::<WeightFunction>(&serde_json::to_string(&wf).unwrap()).unwrap(), wf);
}

#[test]
fn conditional_frechet_examples() {
    let pts: Vec<Point> = s2().uniform_sample(20, 3);
    let mut w = vec![0.0; 20];
    w[7] = 1.0;
    let m = conditional_frechet_mean(&s2(), &pts, &w).unwrap();
    assert!(s2().dist(&m, &pts[7]) < 1e-12);

    // Two points at angle a with weights (w, 1 - w): the minimizer sits at
    // angle (1 - w) a from the first along the connecting geodesic.
    let a = 1.2f64;
    let y = s2().point(vec![1.0, 0.0, 0.0]).unwrap();
    let z = s2().point(vec![a.cos(), a.sin(), 0.0]).unwrap();
    for wy in [0.5, 0.3, 0.9] {
        let m = conditional_frechet_mean(&s2(), &[y.clone(), z.clone()], &[wy, 1.0 - wy]).unwrap();
        let s = (1.0 - wy) * a;
        let expected = s2().point(vec![s.cos(), s.sin(), 0.0]).unwrap();
        assert!(s2().dist(&m, &expected) < 1e-8, "{wy}");
    }
}

#[test]
fn ss1_conditional_mean_near_pole() {
    let m = regression_model("SS1").unwrap();
    let (xs, ys): (Vec<Vec<f64>>, Vec<Point>) = m.sample(10_000, 4);
    let w = knn_weights(&m.covariate_space(), &[0.0, 1.0], &xs, 1000).unwrap();
    let mean = conditional_frechet_mean(&s2(), &ys, &w).unwrap();
    let pole = s2().point(vec![0.0, 0.0, 1.0]).unwrap();
    assert!(s2().dist(&mean, &pole) < 0.1);
}

fn contour_points(ys: &[Point], idx: &[usize]) -> Vec<Point> {
    idx.iter().map(|&i| ys[i].clone()).collect()
}

#[test]
fn uniform_weights_reproduce_unconditional_fit() {
    for (name, spec, n0, nr, ns) in [("S1", s2(), 1, 6, 20), ("T3", ManifoldSpec::torus(2), 1, 5, 24)] {
        let ys: Vec<Point> = presets::preset(name, &spec).unwrap().sample(n0 + nr * ns, 21);
        let xs: Vec<Vec<f64>> = (0..ys.len()).map(|i| vec![i as f64]).collect();
        let n = ys.len();
        let fit = fit_quantiles(&spec, &ys, &FitOptions::new(n0, nr, ns).seed(5)).unwrap();
        let cfit = fit_conditional(
            &spec,
            &CovariateSpace::Euclidean(1),
            &xs,
            &ys,
            &[0.0],
            &WeightFunction::Knn { k: n },
            &ConditionalOptions::new(n0, nr, ns).seed(5),
        )
        .unwrap();
        assert_eq!(cfit.pole_image, fit.pole_image);
        assert_eq!(cfit.grid, fit.grid);
        for r in 0..=nr {
            let a = contour_points(&ys, &extract_contour(&fit, r).unwrap());
            let b = contour_points(&ys, &extract_conditional_contour(&cfit, r).unwrap());
            assert!(hausdorff_distance(&spec, &a, &b).unwrap() < 1e-9, "{name} r={r}");
        }
    }
}

#[test]
fn single_support_point_collapses() {
    let ys: Vec<Point> = s2().uniform_sample(30, 8);
    let xs = line(&(0..30).map(|i| i as f64).collect::<Vec<_>>());
    let fit = fit_conditional(
        &s2(),
        &CovariateSpace::Euclidean(1),
        &xs,
        &ys,
        &[12.2],
        &WeightFunction::Knn { k: 1 },
        &ConditionalOptions::new(1, 4, 10).seed(2),
    )
    .unwrap();
    assert_eq!(fit.support, vec![12]);
    assert!(fit.image.iter().all(|&j| j == 12));
    assert_eq!(fit.distinct_images(), 1);
    for r in 0..=4 {
        assert_eq!(fit.contour(r).unwrap(), vec![12]);
    }
}

#[test]
fn conditional_fit_structure() {
    let m = regression_model("SS2").unwrap();
    let (xs, ys): (Vec<Vec<f64>>, Vec<Point>) = m.sample(800, 9);
    let opts = ConditionalOptions::new(1, 10, 30).seed(3);
    let wf = WeightFunction::Kernel { h: PI / 10.0, kernel: Kernel::TrimmedGaussian };
    let fit = fit_conditional(&s2(), &m.covariate_space(), &xs, &ys, &[0.6, 0.8], &wf, &opts).unwrap();

    let sum: f64 = fit.weights.iter().sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert!(fit.weights.iter().all(|&w| w >= 0.0));
    let rows = fit.coupling.row_sums();
    assert!(rows.iter().all(|r| (r - 1.0 / 301.0).abs() < 1e-9));
    let mut cols = vec![0.0; ys.len()];
    for &(_, j, p) in &fit.coupling.entries {
        cols[j] += p;
    }
    for j in 0..ys.len() {
        assert!((cols[j] - fit.weights[j]).abs() < 1e-9);
    }
    assert_eq!(fit.image.len(), 301);
    assert!(fit.image.iter().all(|j| fit.support.contains(j)));

    let mut prev: Vec<usize> = Vec::new();
    for r in 0..=10 {
        let region = extract_conditional_region(&fit, r).unwrap();
        assert!(prev.iter().all(|i| region.contains(i)));
        prev = region;
    }
    assert!(prev.iter().all(|j| fit.support.contains(j)));
    assert_eq!(fit.contour(0).unwrap().len(), 1);
    assert!(fit.contour(11).is_err());

    let again = fit_conditional(&s2(), &m.covariate_space(), &xs, &ys, &[0.6, 0.8], &wf, &opts).unwrap();
    assert_eq!(again.image, fit.image);
}

#[test]
fn conditional_errors() {
    let ys: Vec<Point> = s2().uniform_sample(10, 1);
    let xs = line(&[0.0; 9]);
    let e1 = CovariateSpace::Euclidean(1);
    let knn = WeightFunction::Knn { k: 3 };
    let opts = ConditionalOptions::new(1, 2, 5);
    assert!(matches!(fit_conditional(&s2(), &e1, &xs, &ys, &[0.0], &knn, &opts), Err(RegressionError::Lengths(9, 10))));
    let xs = line(&[0.0; 10]);
    let far = WeightFunction::Kernel { h: 0.1, kernel: Kernel::Box };
    assert!(matches!(fit_conditional(&s2(), &e1, &xs, &ys, &[5.0], &far, &opts), Err(RegressionError::EmptyWindow(_))));
    assert!(fit_conditional(&s2(), &e1, &xs, &ys, &[0.0], &knn, &ConditionalOptions::new(0, 0, 0)).is_err());
    let fit = fit_conditional(&s2(), &e1, &xs, &ys, &[0.0], &knn, &ConditionalOptions::new(0, 2, 5).center(CenterRule::FrechetStrip(0))).unwrap();
    assert!(fit.contour(0).is_err());
    assert!(fit.region(0).unwrap().is_empty());
}

#[test]
fn torus_regression_symmetry() {
    // At x = 3 the dependence parameter vanishes; at x = 4.5 it is strongly positive.
    let m = regression_model("TR1").unwrap();
    let t2 = ManifoldSpec::torus(2);
    let (xs, ys): (Vec<Vec<f64>>, Vec<Point>) = m.sample(4000, 10);
    let stat = |x: f64| {
        let fit = fit_conditional(
            &t2,
            &m.covariate_space(),
            &xs,
            &ys,
            &[x],
            &WeightFunction::Kernel { h: 0.25, kernel: Kernel::TrimmedGaussian },
            &ConditionalOptions::new(1, 20, 50).seed(1),
        )
        .unwrap();
        let ring: Vec<usize> = (0..fit.grid.len()).filter(|&i| fit.grid.ring[i] == 12).collect();
        ring.iter()
            .map(|&i| {
                let a = t2.angles(&ys[fit.image[i]]).unwrap();
                a[0].sin() * a[1].sin()
            })
            .sum::<f64>()
            / ring.len() as f64
    };
    let mid = stat(3.0);
    let high = stat(4.5);
    assert!(mid.abs() < 0.1, "{mid}");
    assert!(high > 0.2, "{high}");
}

/// Circle about the north pole at the empirical `tau`-quantile of
/// colatitude among `draws` conditional draws.
fn ss1_proxy(x: &[f64], tau: f64, draws: usize, seed: u64) -> Vec<Point> {
    let law = regression_model("SS1").unwrap().conditional(x);
    let mut colat: Vec<f64> = law.sample::<f64>(draws, seed).iter().map(|p| p.coords()[2].clamp(-1.0, 1.0).acos()).collect();
    colat.sort_by(f64::total_cmp);
    let c = colat[((tau * draws as f64) as usize).min(draws - 1)];
    (0..720)
        .map(|k| {
            let a = k as f64 * PI / 360.0;
            s2().point(vec![c.sin() * a.cos(), c.sin() * a.sin(), c.cos()]).unwrap()
        })
        .collect()
}

fn ss1_fit(n: usize, k: usize, seed: u64) -> (Vec<Point>, CondFit) {
    let m = regression_model("SS1").unwrap();
    let (xs, ys): (Vec<Vec<f64>>, Vec<Point>) = m.sample(n, seed);
    let fit = fit_conditional(
        &s2(),
        &m.covariate_space(),
        &xs,
        &ys,
        &[0.6, 0.8],
        &WeightFunction::Knn { k },
        &ConditionalOptions::new(1, 20, 100).seed(seed),
    )
    .unwrap();
    (ys, fit)
}

#[test]
fn ss1_contours_nest_and_converge() {
    let proxy = ss1_proxy(&[0.6, 0.8], 12.0 / 21.0, 100_000, 77);
    let mut nest = Vec::new();
    let mut err_small = Vec::new();
    let mut err_large = Vec::new();
    for seed in 0..10 {
        let (ys, fit) = ss1_fit(10_000, 2001, seed);
        let c = |r| contour_points(&ys, &fit.contour(r).unwrap());
        let (c5, c12, c16) = (c(5), c(12), c(16));
        let d5 = hausdorff_distance(&s2(), &c5, &c16).unwrap();
        let d12 = hausdorff_distance(&s2(), &c12, &c16).unwrap();
        nest.push(d5 - d12);
        err_large.push(hausdorff_distance(&s2(), &c12, &proxy).unwrap());
        let (ys, fit) = ss1_fit(2000, 400, 100 + seed);
        err_small.push(hausdorff_distance(&s2(), &contour_points(&ys, &fit.contour(12).unwrap()), &proxy).unwrap());
    }
    assert!(median(nest) > 0.0);
    let (small, large) = (median(err_small), median(err_large));
    assert!(large < small, "{large} vs {small}");
}
