use mtquant::io::*;
use mtquant::presets::{preset, regression_model, CovariateLaw, PresetError, REGRESSION, UNCONDITIONAL};
use mtquant::*;

fn s2() -> ManifoldSpec {
    ManifoldSpec::sphere(2)
}

#[test]
fn all_presets_resolve() {
    for name in UNCONDITIONAL {
        let spec = if name.starts_with('T') { ManifoldSpec::torus(2) } else { s2() };
        assert_eq!(preset(name, &spec).unwrap().spec(), spec);
    }
    assert_eq!(preset("uniform", &ManifoldSpec::torus(3)).unwrap().spec(), ManifoldSpec::torus(3));
    assert!(matches!(preset("S9", &s2()), Err(PresetError::Unknown(_))));
    assert!(preset("T1", &s2()).is_err());
    for name in REGRESSION {
        let m = regression_model(name).unwrap();
        let (xs, ys): (Vec<Vec<f64>>, Vec<Point>) = m.sample(50, 1);
        assert_eq!(xs.len(), 50);
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(x.len(), m.covariate_space().dim());
            m.response.check(y).unwrap();
            if let CovariateLaw::Interval { lo, hi } = m.covariate {
                assert!(x[0] >= lo && x[0] <= hi);
            }
        }
    }
    assert!(regression_model("SS3").is_err());
}

#[test]
fn regression_presets_match_their_formulas() {
    let y = [0.3, -0.2, 0.9];
    let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] as f64).sqrt();
    let y: Vec<f64> = y.iter().map(|v| v / n).collect();
    let x = [0.6, 0.8];
    let ss1 = regression_model("SS1").unwrap().conditional(&x);
    let direct = Law::vmf(vec![0.0, 0.0, 1.0], 5.0 * 0.6f64.exp()).unwrap();
    assert!((ss1.log_density(&y).unwrap() - direct.log_density(&y).unwrap()).abs() < 1e-12);

    let a = [0.4f64, -1.1];
    let ty = vec![a[0].cos(), a[0].sin(), a[1].cos(), a[1].sin()];
    let tr1 = regression_model("TR1").unwrap().conditional(&[2.0]);
    let direct = Law::bsvm([0.0, 0.0], [2.0, 2.0], -5.0).unwrap();
    assert!((tr1.log_density(&ty).unwrap() - direct.log_density(&ty).unwrap()).abs() < 1e-12);

    let xs = [0.3, -0.4, (0.75f64).sqrt()];
    let ts1 = regression_model("TS1").unwrap().conditional(&xs);
    let k1 = (0.3 + 0.4 + 0.75f64.sqrt()).exp();
    let direct = Law::bsvm([0.0, 0.0], [k1, 2.0], 1.0).unwrap();
    assert!((ts1.log_density(&ty).unwrap() - direct.log_density(&ty).unwrap()).abs() < 1e-12);
}

#[test]
fn factor_splitting() {
    let spec: ManifoldSpec = "s1xs2".parse().unwrap();
    let v = vec![1.0, 0.0, 0.0, 0.6, 0.8];
    let split = split_factors(&spec, &v);
    assert_eq!(split, vec![vec![1.0, 0.0], vec![0.0, 0.6, 0.8]]);
    assert_eq!(join_factors(&spec, &split).unwrap(), v);
    assert!(join_factors(&spec, &[vec![1.0, 0.0, 0.0], vec![0.6, 0.8]]).is_err());
}

#[test]
fn points_round_trip() {
    for spec in [s2(), ManifoldSpec::torus(2), "s1xs2".parse().unwrap()] {
        let pts: Vec<Point> = spec.uniform_sample(40, 3);
        let mut buf = Vec::new();
        write_csv_metadata(&mut buf, &[("preset", "uniform".into()), ("seed", "3".into())]).unwrap();
        write_points_csv(&mut buf, &spec, &pts).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(read_csv_metadata(&text)[1], ("seed".to_string(), "3".to_string()));
        assert_eq!(read_points_csv(&buf[..], &spec).unwrap(), pts);

        let mut buf = Vec::new();
        write_points_json(&mut buf, &spec, &pts).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(value["points"][0].as_array().unwrap().len(), spec.num_factors());
        let (back_spec, back) = read_points_json(&buf[..]).unwrap();
        assert_eq!(back_spec, spec);
        assert_eq!(back, pts);
    }
}

#[test]
fn torus_angle_columns() {
    let spec = ManifoldSpec::torus(2);
    let text = "phi0,phi1\n0.5,-1.0\n3.0,4.0\n";
    let pts = read_points_csv(text.as_bytes(), &spec).unwrap();
    let a = spec.angles(&pts[1]).unwrap();
    assert!((a[1] - (4.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-12);
    assert!(read_points_csv("a,b\n1,2\n".as_bytes(), &spec).is_err());
    assert!(read_points_csv("phi0,phi1\n1,x\n".as_bytes(), &spec).is_err());
    assert!(read_points_csv("y0_0,y0_1,y0_2\n1,1,0\n".as_bytes(), &s2()).is_err());
}

#[test]
fn plans_round_trip() {
    let a: Vec<Point> = s2().uniform_sample(6, 1);
    let b: Vec<Point> = s2().uniform_sample(4, 2);
    let cost = cost_matrix(&s2(), &a, &b).unwrap();
    let plan = solve_kantorovich(&cost, &[0.1, 0.2, 0.3, 0.4]).unwrap();
    let mut buf = Vec::new();
    write_coupling_csv(&mut buf, &plan).unwrap();
    assert_eq!(read_coupling_csv(&buf[..]).unwrap(), plan.entries);
    let mut buf = Vec::new();
    write_coupling_json(&mut buf, &plan).unwrap();
    let rec = read_coupling_json(&buf[..]).unwrap();
    assert_eq!(rec.entries, plan.entries);
    assert_eq!((rec.rows, rec.cols), (6, 4));

    let sq = cost_matrix(&s2(), &a, &a).unwrap();
    let perm = solve_assignment(&sq).unwrap().perm;
    let mut buf = Vec::new();
    write_assignment_csv(&mut buf, &perm).unwrap();
    assert_eq!(read_assignment_csv(&buf[..]).unwrap(), perm);
    let mut buf = Vec::new();
    write_assignment_json(&mut buf, &perm).unwrap();
    assert_eq!(read_assignment_json(&buf[..]).unwrap(), perm);
    assert!(read_assignment_csv("row,col\n0,1\n0,2\n".as_bytes()).is_err());
}

#[test]
fn fits_round_trip() {
    let spec = ManifoldSpec::torus(2);
    let pts: Vec<Point> = preset("T3", &spec).unwrap().sample(41, 5);
    for rule in [CenterRule::FrechetCap, CenterRule::FrechetStrip(0)] {
        let fit = fit_quantiles(&spec, &pts, &FitOptions::new(1, 4, 10).center(rule)).unwrap();
        let mut buf = Vec::new();
        write_fit_json(&mut buf, &fit).unwrap();
        let rec = read_fit_json(&buf[..]).unwrap();
        assert_eq!(rec, FitRecord::from_fit(&fit));
        assert_eq!(rec.sample_points().unwrap(), pts);
        assert_eq!(rec.center.to_center(&spec).unwrap(), fit.center);
        assert_eq!(rec.rank_counts, vec![1, 10, 10, 10, 10]);

        let mut buf = Vec::new();
        write_fit_csv(&mut buf, &fit).unwrap();
        let rows = read_fit_csv(&buf[..], &spec).unwrap();
        for (i, (p, r, g)) in rows.iter().enumerate() {
            assert_eq!(p, &pts[i]);
            assert_eq!((*r, *g), (fit.ranks[i], fit.perm[i]));
        }

        let idx = fit.ordered_contour(2).unwrap();
        let mut buf = Vec::new();
        write_contour_csv(&mut buf, &spec, 2, &idx, &pts).unwrap();
        let back = read_contour_csv(&buf[..], &spec).unwrap();
        assert_eq!(back.iter().map(|t| t.0).collect::<Vec<_>>(), idx);
        assert!(back.iter().all(|t| t.1 == 2 && t.2 == pts[t.0]));
    }
}

#[test]
fn center_records() {
    let spec: ManifoldSpec = "s2xs2".parse().unwrap();
    let p = spec.point(vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
    for c in [
        Center::Cap { pole: p.clone() },
        Center::Strip { factor: 1, center: p.clone() },
        Center::PolyCap { factor: 0, pole: p.clone() },
        Center::TorusEquator { component: 1, angle: -0.5 },
    ] {
        let rec = CenterRecord::from_center(&spec, &c);
        let text = serde_json::to_string(&rec).unwrap();
        let back: CenterRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_center(&spec).unwrap(), c);
    }
}
