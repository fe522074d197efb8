//! Reading and writing spaces, matrices and reports.
//!
//! Spaces and matrices are stored as JSON (bit-exact) or CSV. Floats are
//! written in shortest round-trip form, so CSV round trips are exact as well.
//!
//! Point cloud CSV: optional `# key=value` comment lines (`unbounded`,
//! `domain`), then a header with an optional `label` column, coordinate
//! columns, a `role` column (`interior` or `boundary`) and an optional
//! `bdist` column.
//!
//! Matrix CSV: a header `label,<l1>,...,<ln>` followed by one row per label.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricMatrix};
use crate::space::{Geometry, SampledSpace, Site};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            _ => Err(Error::Parameter(format!(
                "cannot infer format of {}; use .csv or .json",
                path.display()
            ))),
        }
    }
}

/// Shortest decimal form that parses back to the same float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn parse_f64(s: &str, line: usize, field: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        field: field.to_string(),
        message: format!("{s:?} is not a number"),
    })
}

fn split_comments(text: &str) -> (Vec<(String, String)>, usize, &str) {
    let mut meta = Vec::new();
    let mut offset = 0;
    let mut skipped = 0;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            offset += line.len();
            skipped += 1;
        } else {
            break;
        }
    }
    (meta, skipped, &text[offset..])
}

pub fn load_space(path: impl AsRef<Path>) -> Result<SampledSpace> {
    let path = path.as_ref();
    match Format::from_path(path)? {
        Format::Json => Ok(serde_json::from_str(&fs::read_to_string(path)?)?),
        Format::Csv => parse_space_csv(&fs::read_to_string(path)?),
    }
}

pub fn save_space(space: &SampledSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match Format::from_path(path)? {
        Format::Json => fs::write(path, serde_json::to_string_pretty(space)?)?,
        Format::Csv => fs::write(path, space_to_csv(space)?)?,
    }
    Ok(())
}

/// Parses a point cloud CSV.
pub fn parse_space_csv(text: &str) -> Result<SampledSpace> {
    let (meta, skipped, body) = split_comments(text);
    let mut unbounded = true;
    let mut domain: Option<Domain> = None;
    for (k, v) in meta {
        match k.as_str() {
            "unbounded" => {
                unbounded = v.parse().map_err(|_| Error::Parse {
                    line: 1,
                    field: "unbounded".into(),
                    message: format!("{v:?} is not a boolean"),
                })?
            }
            "domain" => domain = Some(serde_json::from_value(serde_json::Value::String(v.clone())).map_err(
                |_| Error::Parse {
                    line: 1,
                    field: "domain".into(),
                    message: format!("unknown domain {v:?}"),
                },
            )?),
            _ => {}
        }
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let role_col = col("role").ok_or_else(|| Error::Parse {
        line: skipped + 1,
        field: "role".into(),
        message: "missing role column".into(),
    })?;
    let label_col = col("label");
    let bdist_col = col("bdist");
    let coord_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| Some(i) != label_col && i != role_col && Some(i) != bdist_col)
        .collect();
    if coord_cols.is_empty() {
        return Err(Error::Parse {
            line: skipped + 1,
            field: "header".into(),
            message: "no coordinate columns".into(),
        });
    }
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    let mut bdist: Vec<f64> = Vec::new();
    let mut any_bdist = false;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = skipped + rec.position().map_or(r + 2, |p| p.line() as usize);
        let coords = coord_cols
            .iter()
            .map(|&c| parse_f64(rec.get(c).unwrap_or(""), line, &headers[c]))
            .collect::<Result<Vec<_>>>()?;
        let role = rec.get(role_col).unwrap_or("");
        let is_interior = match role {
            "interior" => true,
            "boundary" => false,
            other => {
                return Err(Error::Parse {
                    line,
                    field: "role".into(),
                    message: format!("{other:?} is neither interior nor boundary"),
                })
            }
        };
        let label = match label_col {
            Some(c) => rec.get(c).unwrap_or("").to_string(),
            None if is_interior => format!("x{}", interior.len()),
            None => format!("b{}", boundary.len()),
        };
        if is_interior {
            if let Some(c) = bdist_col {
                let v = rec.get(c).unwrap_or("");
                if !v.is_empty() {
                    any_bdist = true;
                    bdist.push(parse_f64(v, line, "bdist")?);
                } else {
                    bdist.push(f64::NAN);
                }
            }
            interior.push(Site::new(label, coords));
        } else {
            boundary.push(Site::new(label, coords));
        }
    }
    let space = SampledSpace::euclidean(interior, boundary, domain, unbounded)?;
    if any_bdist && domain.is_none() {
        if bdist.iter().any(|v| v.is_nan()) {
            return Err(Error::Malformed("bdist column must be filled for every interior row".into()));
        }
        return space.with_bdist(bdist);
    }
    Ok(space)
}

/// Point cloud CSV of a Euclidean space.
pub fn space_to_csv(space: &SampledSpace) -> Result<String> {
    if !matches!(space.geometry(), Geometry::Euclidean) {
        return Err(Error::Parameter("only Euclidean spaces can be written as point clouds; use JSON".into()));
    }
    let dim = space.coords(0).map_or(0, <[f64]>::len);
    let mut out = String::new();
    out.push_str(&format!("# unbounded={}\n", space.is_unbounded()));
    if let Some(d) = space.domain() {
        out.push_str(&format!("# domain={}\n", d.name()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.push("role".into());
    header.push("bdist".into());
    w.write_record(&header)?;
    let n = space.n_interior();
    for g in 0..n + space.n_boundary() {
        let mut row = vec![space.label(g).to_string()];
        row.extend(space.coords(g).unwrap().iter().map(|&v| fmt_f64(v)));
        if g < n {
            row.push("interior".into());
            row.push(fmt_f64(space.bdist()[g]));
        } else {
            row.push("boundary".into());
            row.push(String::new());
        }
        w.write_record(&row)?;
    }
    out.push_str(&String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8"));
    Ok(out)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<MetricMatrix> {
    let path = path.as_ref();
    let m: MetricMatrix = match Format::from_path(path)? {
        Format::Json => serde_json::from_str(&fs::read_to_string(path)?)?,
        Format::Csv => parse_matrix_csv(&fs::read_to_string(path)?)?,
    };
    m.ensure_symmetric()?;
    Ok(m)
}

pub fn save_matrix(m: &MetricMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match Format::from_path(path)? {
        Format::Json => fs::write(path, serde_json::to_string(m)?)?,
        Format::Csv => fs::write(path, matrix_to_csv(m)?)?,
    }
    Ok(())
}

pub fn parse_matrix_csv(text: &str) -> Result<MetricMatrix> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("label") {
        return Err(Error::Parse {
            line: 1,
            field: "label".into(),
            message: "first header cell must be \"label\"".into(),
        });
    }
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(r + 2, |p| p.line() as usize);
        if rec.get(0) != labels.get(r).map(String::as_str) {
            return Err(Error::Parse {
                line,
                field: "label".into(),
                message: "row labels must follow the header order".into(),
            });
        }
        for (c, l) in labels.iter().enumerate() {
            values.push(parse_f64(rec.get(c + 1).unwrap_or(""), line, l)?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Malformed(format!("expected {n} rows, found {rows}")));
    }
    MetricMatrix::new(labels, values, MetricKind::Custom)
}

pub fn matrix_to_csv(m: &MetricMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string()];
    header.extend(m.labels().iter().cloned());
    w.write_record(&header)?;
    for i in 0..m.n() {
        let mut row = vec![m.labels()[i].clone()];
        row.extend(m.row(i).iter().map(|&v| fmt_f64(v)));
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8"))
}

/// Writes any report as pretty JSON.
pub fn save_report<T: Serialize + ?Sized>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

/// Writes scatter samples with columns `t,ratio,branch`.
pub fn save_scatter(samples: &[(f64, f64)], branch: impl Fn(f64) -> &'static str, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "ratio", "branch"])?;
    for &(t, r) in samples {
        w.write_record([fmt_f64(t), fmt_f64(r), branch(t).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_numeric_cell_names_line_and_column() {
        let text = "label,x1,x2,role\na,0,1,interior\nb,zero,0,boundary\n";
        match parse_space_csv(text) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(field, "x1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let text = "label,a,b\na,0,1\nb,2,0\n";
        let m = parse_matrix_csv(text).unwrap();
        assert!(matches!(m.ensure_symmetric(), Err(Error::Asymmetric(..))));
    }

    #[test]
    fn fmt_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789e10, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
