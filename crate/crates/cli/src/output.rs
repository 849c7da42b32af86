//! Output helpers: tensors with sidecars, numeric CSV, JSON.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Result;
use ipfe_core::array_io::{write_array, write_kernel, write_sidecar, Sidecar, Tensor};
use ipfe_core::moments::MomentKernel;
use ipfe_core::{Complex64, FrequencyGrid};

/// `(cycles/m)^p` with integer-looking exponents printed plainly.
pub fn freq_units(p: f64) -> String {
    format!("(cycles/m)^{p}")
}

/// Writes `<dir>/<name>.ipfe` and its sidecar; returns the file name.
pub fn write_tensor(
    dir: &Path,
    name: &str,
    shape: &[usize],
    data: &[Complex64],
    grid: FrequencyGrid,
    quantity: &str,
    units: &str,
) -> Result<String> {
    let file = format!("{name}.ipfe");
    let path = dir.join(&file);
    write_array(&path, &Tensor::new(shape.to_vec(), data.to_vec())?)?;
    write_sidecar(&path, &Sidecar::new(grid, quantity, units))?;
    Ok(file)
}

/// Writes an order-(m, n) kernel at distance `z`, readable by `evolve-kernel --input`.
pub fn write_moment(
    dir: &Path,
    name: &str,
    (m, n): (usize, usize),
    data: &[Complex64],
    grid: FrequencyGrid,
    z: f64,
    quantity: &str,
) -> Result<String> {
    let file = format!("{name}.ipfe");
    let mut h = MomentKernel::from_values(m, n, grid, data.to_vec())?;
    h.z = z;
    write_kernel(&dir.join(&file), &h, quantity)?;
    Ok(file)
}

pub fn write_real(
    dir: &Path,
    name: &str,
    shape: &[usize],
    data: &[f64],
    grid: FrequencyGrid,
    quantity: &str,
    units: &str,
) -> Result<String> {
    let c: Vec<_> = data.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    write_tensor(dir, name, shape, &c, grid, quantity, units)
}

pub fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, v)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Numeric CSV with a unit-bearing header.
pub struct CsvOut {
    w: csv::Writer<File>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        Ok(CsvOut { w })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        self.w.write_record(values.iter().map(|v| format!("{v:e}")))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}
