//! Dataset export/import as CSV for reproducibility audits.
//!
//! One row per sample, label in the last column. Classification labels are
//! integers; regression targets are reals written with full precision.

use std::fs;
use std::path::Path;

use proxgen_core::problems::{Dataset, LassoInstance, Problem};

use crate::csvio::fmt_f64;
use crate::CliError;

pub fn export_classification(path: &Path, data: &Dataset) -> Result<(), CliError> {
    let mut out = String::new();
    for i in 0..data.len() {
        let (x, y) = data.sample(i);
        for v in x {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&y.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn import_classification(path: &Path) -> Result<Dataset, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut input_dim = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            return Err(CliError::config(format!(
                "{}: line {} has fewer than two columns",
                path.display(),
                lineno + 1
            )));
        }
        let dim = fields.len() - 1;
        if input_dim == 0 {
            input_dim = dim;
        } else if dim != input_dim {
            return Err(CliError::config(format!(
                "{}: inconsistent column count at line {}",
                path.display(),
                lineno + 1
            )));
        }
        for f in &fields[..dim] {
            features.push(f.parse::<f64>().map_err(|_| {
                CliError::config(format!("{}: bad value '{f}'", path.display()))
            })?);
        }
        labels.push(fields[dim].parse::<usize>().map_err(|_| {
            CliError::config(format!("{}: bad label '{}'", path.display(), fields[dim]))
        })?);
    }
    if labels.is_empty() {
        return Err(CliError::config(format!("{}: empty dataset", path.display())));
    }
    Ok(Dataset {
        features,
        labels,
        input_dim,
    })
}

/// Design rows with the response as the trailing real-valued column.
pub fn export_regression(path: &Path, instance: &LassoInstance) -> Result<(), CliError> {
    let mut out = String::new();
    for i in 0..instance.sample_count() {
        for v in instance.design_row(i) {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&fmt_f64(instance.response()[i]));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Returns (row-major design, response, column count).
pub fn import_regression(path: &Path) -> Result<(Vec<f64>, Vec<f64>, usize), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut design = Vec::new();
    let mut response = Vec::new();
    let mut input_dim = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut row: Vec<f64> = Vec::new();
        for f in line.split(',') {
            row.push(f.parse::<f64>().map_err(|_| {
                CliError::config(format!(
                    "{}: bad value '{f}' at line {}",
                    path.display(),
                    lineno + 1
                ))
            })?);
        }
        if row.len() < 2 {
            return Err(CliError::config(format!(
                "{}: line {} has fewer than two columns",
                path.display(),
                lineno + 1
            )));
        }
        let dim = row.len() - 1;
        if input_dim == 0 {
            input_dim = dim;
        } else if dim != input_dim {
            return Err(CliError::config(format!(
                "{}: inconsistent column count at line {}",
                path.display(),
                lineno + 1
            )));
        }
        response.push(row.pop().unwrap());
        design.extend(row);
    }
    Ok((design, response, input_dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proxgen_core::problems::{generate_blobs, generate_lasso};
    use proxgen_core::rng::RngStream;

    #[test]
    fn classification_round_trip_is_exact() {
        let data = generate_blobs(20, 4, 3, 6.0, &mut RngStream::new(0, 0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("blobs.csv");
        export_classification(&path, &data).unwrap();
        let back = import_classification(&path).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn regression_round_trip_is_exact() {
        let inst = generate_lasso(7, 5, 2, 0.1, &mut RngStream::new(1, 0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lasso.csv");
        export_regression(&path, &inst).unwrap();
        let (design, response, dim) = import_regression(&path).unwrap();
        assert_eq!(dim, 7);
        assert_eq!(response.len(), 5);
        for i in 0..5 {
            assert_eq!(&design[i * 7..(i + 1) * 7], inst.design_row(i));
            assert_eq!(response[i], inst.response()[i]);
        }
    }
}
