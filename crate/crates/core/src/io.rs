//! File formats: curve CSV, binary PGM/PBM rasters, and the JSON model
//! container.

use crate::basis::CoefMatrix;
use crate::error::{Error, Result};
use crate::model::{JointGaussianModel, PcaModel};
use crate::smoothing::DiscreteCurve;
use crate::trace::BinaryImage;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Read, Write};
use std::path::Path;

// ---------------------------------------------------------------------------
// Curve CSV
// ---------------------------------------------------------------------------

const CURVE_HEADER: &str = "t,x,y";

/// Read a `t,x,y` CSV. The header row is required; numbers use `.` as the
/// decimal separator regardless of locale.
pub fn read_curve_csv<R: BufRead>(reader: R) -> Result<DiscreteCurve> {
    let mut params = Vec::new();
    let mut points = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim() == CURVE_HEADER => {}
        Some((_, Ok(header))) => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header '{CURVE_HEADER}', got '{}'", header.trim()),
            })
        }
        Some((_, Err(e))) => return Err(Error::Io(e)),
        None => return Err(Error::Parse { line: 1, msg: "empty file".into() }),
    }
    for (idx, line) in lines {
        let line = line.map_err(Error::Io)?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 3];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid number '{}'", f.trim()),
            })?;
        }
        params.push(vals[0]);
        points.push([vals[1], vals[2]]);
    }
    DiscreteCurve::new(params, points)
}

pub fn write_curve_csv<W: Write>(writer: &mut W, curve: &DiscreteCurve) -> Result<()> {
    writeln!(writer, "{CURVE_HEADER}")?;
    for (t, p) in curve.params().iter().zip(curve.points()) {
        // 17 significant digits round-trip an f64 exactly.
        writeln!(writer, "{:.17e},{:.17e},{:.17e}", t, p[0], p[1])?;
    }
    Ok(())
}

pub fn read_curve_csv_path(path: &Path) -> Result<DiscreteCurve> {
    let file = std::fs::File::open(path)?;
    read_curve_csv(std::io::BufReader::new(file))
}

pub fn write_curve_csv_path(path: &Path, curve: &DiscreteCurve) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_curve_csv(&mut file, curve)
}

// ---------------------------------------------------------------------------
// PGM (P5) / PBM (P4) rasters
// ---------------------------------------------------------------------------

/// Parse a binary netpbm image into a foreground mask. P5 (greyscale) pixels
/// are foreground when >= 128 out of the stated maxval scale; P4 (bitmap)
/// bits are foreground when set (black ink).
pub fn read_netpbm<R: Read>(mut reader: R) -> Result<BinaryImage> {
    let mut data = Vec::new();
    reader.read_to_end(&mut data)?;
    parse_netpbm(&data)
}

pub fn read_netpbm_path(path: &Path) -> Result<BinaryImage> {
    parse_netpbm(&std::fs::read(path)?)
}

fn parse_netpbm(data: &[u8]) -> Result<BinaryImage> {
    let mut pos = 0usize;
    let magic = take_token(data, &mut pos)
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing netpbm magic".into() })?;
    match magic.as_str() {
        "P5" => {
            let width = take_number(data, &mut pos, "width")?;
            let height = take_number(data, &mut pos, "height")?;
            let maxval = take_number(data, &mut pos, "maxval")?;
            if maxval == 0 || maxval > 65535 {
                return Err(Error::Parse { line: 1, msg: format!("bad maxval {maxval}") });
            }
            let bytes_per = if maxval > 255 { 2 } else { 1 };
            let need = width * height * bytes_per;
            let raster = data
                .get(pos..pos + need)
                .ok_or_else(|| Error::Parse { line: 1, msg: "truncated raster".into() })?;
            let threshold = (maxval as f64 * 128.0 / 255.0).round() as usize;
            let pixels = (0..width * height)
                .map(|i| {
                    let v = if bytes_per == 2 {
                        (raster[2 * i] as usize) << 8 | raster[2 * i + 1] as usize
                    } else {
                        raster[i] as usize
                    };
                    v >= threshold
                })
                .collect();
            BinaryImage::new(width, height, pixels)
        }
        "P4" => {
            let width = take_number(data, &mut pos, "width")?;
            let height = take_number(data, &mut pos, "height")?;
            let row_bytes = (width + 7) / 8;
            let need = row_bytes * height;
            let raster = data
                .get(pos..pos + need)
                .ok_or_else(|| Error::Parse { line: 1, msg: "truncated raster".into() })?;
            let mut pixels = Vec::with_capacity(width * height);
            for y in 0..height {
                for x in 0..width {
                    let byte = raster[y * row_bytes + x / 8];
                    pixels.push(byte & (0x80 >> (x % 8)) != 0);
                }
            }
            BinaryImage::new(width, height, pixels)
        }
        other => Err(Error::Parse {
            line: 1,
            msg: format!("unsupported netpbm magic '{other}' (expected P4 or P5)"),
        }),
    }
}

/// Next whitespace-delimited token, skipping `#` comments. Advances past the
/// single whitespace byte that terminates the token.
fn take_token(data: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= data.len() {
        return None;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let tok = String::from_utf8_lossy(&data[start..*pos]).into_owned();
    if *pos < data.len() {
        *pos += 1; // consume the terminating whitespace byte
    }
    Some(tok)
}

fn take_number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = take_token(data, pos)
        .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing {what}") })?;
    tok.parse()
        .map_err(|_| Error::Parse { line: 1, msg: format!("invalid {what} '{tok}'") })
}

// ---------------------------------------------------------------------------
// Model JSON ("shapemodel/1")
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PcaJson {
    mean: Vec<f64>,
    /// Row-major d x retained loading matrix.
    components: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    retained: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    format: String,
    basis_size: usize,
    var_threshold: f64,
    shape_block: PcaJson,
    deformation_block: PcaJson,
    /// Row-major k x k score covariance.
    score_covariance: Vec<Vec<f64>>,
}

const MODEL_FORMAT: &str = "shapemodel/1";

fn pca_to_json(pca: &PcaModel) -> PcaJson {
    let c = pca.components();
    PcaJson {
        mean: pca.mean().iter().copied().collect(),
        components: (0..c.nrows())
            .map(|i| (0..c.ncols()).map(|j| c[(i, j)]).collect())
            .collect(),
        eigenvalues: pca.eigenvalues().to_vec(),
        retained: pca.retained(),
    }
}

fn pca_from_json(json: &PcaJson) -> Result<PcaModel> {
    let d = json.mean.len();
    let r = json.retained;
    if json.components.len() != d || json.components.iter().any(|row| row.len() != r) {
        return Err(Error::Model("component matrix shape mismatch".into()));
    }
    let components = DMatrix::from_fn(d, r, |i, j| json.components[i][j]);
    PcaModel::from_parts(
        DVector::from_vec(json.mean.clone()),
        components,
        json.eigenvalues.clone(),
        r,
    )
}

pub fn model_to_json(model: &JointGaussianModel) -> Result<String> {
    let sigma = model.sigma();
    let json = ModelJson {
        format: MODEL_FORMAT.to_string(),
        basis_size: model.basis_size(),
        var_threshold: model.var_threshold(),
        shape_block: pca_to_json(model.pca1()),
        deformation_block: pca_to_json(model.pca2()),
        score_covariance: (0..sigma.nrows())
            .map(|i| (0..sigma.ncols()).map(|j| sigma[(i, j)]).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&json).map_err(|e| Error::Model(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<JointGaussianModel> {
    let json: ModelJson =
        serde_json::from_str(text).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    if json.format != MODEL_FORMAT {
        return Err(Error::Model(format!(
            "unsupported model format '{}' (expected '{MODEL_FORMAT}')",
            json.format
        )));
    }
    let pca1 = pca_from_json(&json.shape_block)?;
    let pca2 = pca_from_json(&json.deformation_block)?;
    let k = pca1.retained() + pca2.retained();
    if json.score_covariance.len() != k
        || json.score_covariance.iter().any(|row| row.len() != k)
    {
        return Err(Error::Model("score covariance shape mismatch".into()));
    }
    let sigma = DMatrix::from_fn(k, k, |i, j| json.score_covariance[i][j]);
    JointGaussianModel::from_parts(pca1, pca2, sigma, json.basis_size, json.var_threshold)
}

pub fn write_model_path(path: &Path, model: &JointGaussianModel) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn read_model_path(path: &Path) -> Result<JointGaussianModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Coefficient CSV (one curve per row: c0x, c0y, then the flattened matrix)
// ---------------------------------------------------------------------------

pub fn write_coef_csv<W: Write>(
    writer: &mut W,
    curves: &[crate::smoothing::SmoothCurve],
) -> Result<()> {
    for curve in curves {
        let coefs: &CoefMatrix = curve.coefs();
        let mut fields = vec![
            format!("{:.17e}", curve.c0()[0]),
            format!("{:.17e}", curve.c0()[1]),
        ];
        for row in 0..2 {
            for col in 0..coefs.size() {
                fields.push(format!("{:.17e}", coefs.get(row, col)));
            }
        }
        writeln!(writer, "{}", fields.join(","))?;
    }
    Ok(())
}
