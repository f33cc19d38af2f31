use std::io::Write;

use anyhow::{bail, Result};
use mtquant::latitude_profile;
use serde_json::{json, Value};

use crate::args::{Format, Global, STauArgs};
use crate::output::OutDir;

pub fn s_tau(g: &Global, a: &STauArgs, out: &mut OutDir) -> Result<Value> {
    let taus: Vec<f64> = if a.tau.is_empty() {
        if a.steps == 0 {
            bail!("--steps must be positive");
        }
        (0..=a.steps).map(|k| k as f64 / a.steps as f64).collect()
    } else {
        a.tau.clone()
    };
    let s: Vec<f64> = taus.iter().map(|&t| latitude_profile(a.p, t)).collect::<Result<_, _>>()?;
    let rel = format!("s_tau.{}", g.format.ext());
    let mut w = out.create(&rel)?;
    match g.format {
        Format::Csv => {
            writeln!(w, "tau,s")?;
            for (t, v) in taus.iter().zip(&s) {
                writeln!(w, "{t:?},{v:?}")?;
            }
        }
        Format::Json => serde_json::to_writer(&mut w, &json!({ "p": a.p, "tau": taus, "s": s }))?,
    }
    w.flush()?;
    for (t, v) in taus.iter().zip(&s) {
        println!("{t:.6}\t{v:.12}");
    }
    Ok(json!({ "p": a.p, "tau": taus, "s": s }))
}
