use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mtquant::io::{write_contour_csv, write_contour_json, write_csv_metadata, ContourRecord};
use mtquant::{ManifoldSpec, Point};

use crate::args::Format;

/// Output directory plus the list of files written into it, relative to the root.
pub struct OutDir {
    root: PathBuf,
    pub files: Vec<String>,
}

impl OutDir {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn create(&mut self, rel: &str) -> Result<BufWriter<File>> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.files.push(rel.to_string());
        Ok(BufWriter::new(f))
    }

    pub fn write_json(&mut self, rel: &str, v: &serde_json::Value) -> Result<()> {
        let mut w = self.create(rel)?;
        serde_json::to_writer_pretty(&mut w, v)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// One contour as `{prefix}contour_r{r}.{ext}`; CSV files carry `meta` as comments.
    #[allow(clippy::too_many_arguments)]
    pub fn contour(
        &mut self,
        prefix: &str,
        format: Format,
        spec: &ManifoldSpec,
        r: usize,
        tau: f64,
        indices: &[usize],
        sample: &[Point],
        meta: &[(&str, String)],
    ) -> Result<String> {
        let rel = format!("{prefix}contour_r{r}.{}", format.ext());
        let mut w = self.create(&rel)?;
        match format {
            Format::Csv => {
                let mut m: Vec<(&str, String)> = meta.to_vec();
                m.push(("ring", r.to_string()));
                m.push(("tau", tau.to_string()));
                write_csv_metadata(&mut w, &m)?;
                write_contour_csv(&mut w, spec, r, indices, sample)?;
            }
            Format::Json => write_contour_json(&mut w, &ContourRecord::new(spec, r, tau, indices, sample))?,
        }
        w.flush()?;
        Ok(rel)
    }
}
