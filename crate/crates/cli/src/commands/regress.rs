use std::fs::File;
use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use mtquant::io::{read_queries_csv, read_regression_csv, split_factors, write_regression_csv, CenterRecord};
use mtquant::presets::regression_model;
use mtquant::{fit_conditional, rng, ConditionalOptions, CovariateSpace, Kernel, ManifoldSpec, Point, WeightFunction};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{Global, KernelArg, RegressArgs, WeightKind};
use crate::output::OutDir;
use crate::{orders, parse_center, parse_manifold, parse_query};

fn covariate_space(s: Option<&str>, d: usize) -> Result<CovariateSpace> {
    match s {
        None => Ok(CovariateSpace::Euclidean(d)),
        Some(t) if t.starts_with('e') || t.starts_with('E') => {
            let k: usize = t[1..].parse().with_context(|| format!("bad covariate space {t:?}"))?;
            Ok(CovariateSpace::Euclidean(k))
        }
        Some(t) => Ok(CovariateSpace::Manifold(parse_manifold(t)?)),
    }
}

fn space_name(s: &CovariateSpace) -> String {
    match s {
        CovariateSpace::Euclidean(d) => format!("e{d}"),
        CovariateSpace::Manifold(m) => m.to_string(),
    }
}

fn check_query(space: &CovariateSpace, x: &[f64]) -> Result<()> {
    if x.len() != space.dim() {
        bail!("query {x:?} has {} coordinates, expected {}", x.len(), space.dim());
    }
    if let CovariateSpace::Manifold(m) = space {
        m.point::<f64>(x.to_vec()).with_context(|| format!("query {x:?} is not on {m}"))?;
    }
    Ok(())
}

pub fn regress(g: &Global, a: &RegressArgs, out: &mut OutDir) -> Result<Value> {
    let n_grid = a.grid.n0 + a.grid.nr * a.grid.ns;
    let (spec, space, xs, ys, source): (ManifoldSpec, CovariateSpace, Vec<Vec<f64>>, Vec<Point>, Value) =
        match (&a.model, &a.data) {
            (Some(name), _) => {
                let m = regression_model(name)?;
                let n = a.n.ok_or_else(|| anyhow!("--model needs -n"))?;
                let (xs, ys) = m.sample::<f64>(n, g.seed);
                let mut w = out.create("data.csv")?;
                write_regression_csv(&mut w, &m.response, &xs, &ys)?;
                w.flush()?;
                (m.response.clone(), m.covariate_space(), xs, ys, json!({ "model": name, "seed": g.seed }))
            }
            (None, Some(path)) => {
                let m = g.manifold.as_deref().ok_or_else(|| anyhow!("--data needs --manifold for the response"))?;
                let spec = parse_manifold(m)?;
                let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let (xs, ys) = read_regression_csv(f, &spec)?;
                let d = xs.first().map_or(0, |x| x.len());
                let space = covariate_space(a.covariates.as_deref(), d)?;
                if space.dim() != d {
                    bail!("{} has {d} covariate columns but {} needs {}", path.display(), space_name(&space), space.dim());
                }
                (spec, space, xs, ys, json!({ "data": path }))
            }
            (None, None) => bail!("regress needs --model or --data"),
        };

    let mut queries: Vec<Vec<f64>> = a.queries.iter().map(|q| parse_query(q)).collect::<Result<_>>()?;
    if let Some(path) = &a.query_file {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        queries.extend(read_queries_csv(f)?);
    }
    if queries.is_empty() {
        bail!("no queries; pass --query or --query-file");
    }
    for x in &queries {
        check_query(&space, x)?;
    }

    let weight_fn = match a.weights {
        WeightKind::Knn => WeightFunction::Knn { k: a.k.unwrap_or(n_grid) },
        WeightKind::Kernel => {
            let h = a.h.ok_or_else(|| anyhow!("kernel weights need --h"))?;
            let kernel = match a.kernel {
                KernelArg::TrimmedGaussian => Kernel::TrimmedGaussian,
                KernelArg::Box => Kernel::Box,
            };
            WeightFunction::Kernel { h, kernel }
        }
    };
    let rule = parse_center(&spec, &a.grid.center)?;
    let rs = orders(&a.grid.contours, a.grid.n0, a.grid.nr)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.threads).build()?;
    let fits: Vec<_> = pool.install(|| {
        queries
            .par_iter()
            .enumerate()
            .map(|(q, x)| {
                let mut opts = ConditionalOptions::new(a.grid.n0, a.grid.nr, a.grid.ns)
                    .center(rule.clone())
                    .seed(rng::query_seed(g.seed, q));
                if let Some(m) = a.grid.mode {
                    opts = opts.mode(m.into());
                }
                let res = fit_conditional(&spec, &space, &xs, &ys, x, &weight_fn, &opts);
                (opts.seed, res)
            })
            .collect()
    });

    let weights_meta = match weight_fn {
        WeightFunction::Knn { k } => vec![("weights", "knn".to_string()), ("k", k.to_string())],
        WeightFunction::Kernel { h, kernel } => vec![
            ("weights", "kernel".to_string()),
            ("h", h.to_string()),
            ("kernel", serde_json::to_value(kernel)?.as_str().unwrap_or_default().to_string()),
        ],
    };
    let f = |p: &Point| split_factors(&spec, p.coords());
    let mut per_query = Vec::new();
    let mut failed = 0;
    for (q, (x, (seed, res))) in queries.iter().zip(fits).enumerate() {
        let fit = match res {
            Ok(fit) => fit,
            Err(e) => {
                log::warn!("query {q} {x:?}: {e}");
                failed += 1;
                per_query.push(json!({ "index": q, "x": x, "seed": seed, "error": e.to_string() }));
                continue;
            }
        };
        let mut meta = weights_meta.clone();
        meta.extend([
            ("manifold", spec.to_string()),
            ("query", x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")),
            ("seed", seed.to_string()),
            ("n0", a.grid.n0.to_string()),
            ("nR", a.grid.nr.to_string()),
            ("nS", a.grid.ns.to_string()),
        ]);
        let prefix = format!("q{q}/");
        let mut files = Vec::new();
        for &r in &rs {
            let idx = fit.ordered_contour(r)?;
            files.push(out.contour(&prefix, g.format, &spec, r, fit.grid.tau(r), &idx, &ys, &meta)?);
        }
        per_query.push(json!({
            "index": q,
            "x": x,
            "seed": seed,
            "theta": f(&fit.theta),
            "pole_image": fit.pole_image.as_ref().map(f),
            "center": CenterRecord::from_center(&spec, &fit.center),
            "support": fit.support.len(),
            "distinct_images": fit.distinct_images(),
            "contours": files,
        }));
    }
    let mut sizes = out.create("queries.json")?;
    serde_json::to_writer_pretty(&mut sizes, &per_query)?;
    sizes.flush()?;
    Ok(json!({
        "manifold": spec.to_string(),
        "covariates": space_name(&space),
        "n": ys.len(),
        "N": n_grid,
        "n0": a.grid.n0,
        "nR": a.grid.nr,
        "nS": a.grid.ns,
        "weights": weight_fn,
        "source": source,
        "failed": failed,
        "queries": per_query,
    }))
}
