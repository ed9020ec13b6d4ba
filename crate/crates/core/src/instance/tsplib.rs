//! TSPLIB reader for the symmetric subset this crate supports:
//! `EUC_2D`, `CEIL_2D` and `EXPLICIT` with `FULL_MATRIX` weights.

use thiserror::Error;

use super::{Instance, InstanceError, Metric};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header entry `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("missing required field {0}")]
    MissingField(&'static str),
    #[error("line {line}: invalid value for {field}: `{value}`")]
    InvalidField {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("unsupported TYPE `{0}` (only TSP is supported)")]
    UnsupportedType(String),
    #[error("unsupported EDGE_WEIGHT_TYPE `{0}`")]
    UnsupportedEdgeWeightType(String),
    #[error("unsupported EDGE_WEIGHT_FORMAT `{0}` (only FULL_MATRIX is supported)")]
    UnsupportedEdgeWeightFormat(String),
    #[error("line {line}: expected a number, found `{text}`")]
    InvalidNumber { line: usize, text: String },
    #[error("line {line}: malformed node coordinate entry `{text}`")]
    MalformedCoord { line: usize, text: String },
    #[error("{section}: DIMENSION is {expected} but {found} entries were read")]
    DimensionMismatch {
        section: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: node id {id} out of range or repeated")]
    BadNodeId { line: usize, id: usize },
    #[error("EDGE_WEIGHT_SECTION: matrix is not symmetric at ({i}, {j})")]
    NonSymmetric { i: usize, j: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Default)]
struct Header {
    name: Option<String>,
    dimension: Option<usize>,
    edge_weight_type: Option<String>,
    edge_weight_format: Option<String>,
}

/// Parses TSPLIB text into an [`Instance`].
///
/// `EUC_2D` distances are rounded to the nearest integer and `CEIL_2D`
/// distances rounded up, per TSPLIB; both are stored as `f64`.
pub fn parse_tsplib(text: &str) -> Result<Instance, ParseError> {
    let mut header = Header::default();
    let mut coords: Option<Vec<Option<(f64, f64)>>> = None;
    let mut weights: Option<Vec<f64>> = None;

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    while let Some((lineno, line)) = lines.next() {
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, ""),
        };
        match key {
            "EOF" => break,
            "NAME" => header.name = Some(value.to_string()),
            "COMMENT" => {}
            "TYPE" => {
                if value != "TSP" {
                    return Err(ParseError::UnsupportedType(value.to_string()));
                }
            }
            "DIMENSION" => {
                let d = value.parse().map_err(|_| ParseError::InvalidField {
                    line: lineno,
                    field: "DIMENSION",
                    value: value.to_string(),
                })?;
                header.dimension = Some(d);
            }
            "EDGE_WEIGHT_TYPE" => match value {
                "EUC_2D" | "CEIL_2D" | "EXPLICIT" => {
                    header.edge_weight_type = Some(value.to_string())
                }
                other => return Err(ParseError::UnsupportedEdgeWeightType(other.to_string())),
            },
            "EDGE_WEIGHT_FORMAT" => {
                if value != "FULL_MATRIX" {
                    return Err(ParseError::UnsupportedEdgeWeightFormat(value.to_string()));
                }
                header.edge_weight_format = Some(value.to_string());
            }
            "NODE_COORD_TYPE" | "DISPLAY_DATA_TYPE" | "CAPACITY" => {}
            "NODE_COORD_SECTION" => {
                let n = header.dimension.ok_or(ParseError::MissingField("DIMENSION"))?;
                coords = Some(read_coords(&mut lines, n)?);
            }
            "EDGE_WEIGHT_SECTION" => {
                let n = header.dimension.ok_or(ParseError::MissingField("DIMENSION"))?;
                weights = Some(read_weights(&mut lines, n)?);
            }
            "DISPLAY_DATA_SECTION" => {
                let n = header.dimension.ok_or(ParseError::MissingField("DIMENSION"))?;
                for _ in 0..n {
                    lines.next();
                }
            }
            _ => {
                return Err(ParseError::MalformedHeader {
                    line: lineno,
                    text: line.to_string(),
                })
            }
        }
    }

    let n = header.dimension.ok_or(ParseError::MissingField("DIMENSION"))?;
    let ewt = header
        .edge_weight_type
        .ok_or(ParseError::MissingField("EDGE_WEIGHT_TYPE"))?;
    let inst = match ewt.as_str() {
        "EUC_2D" | "CEIL_2D" => {
            let coords = coords.ok_or(ParseError::MissingField("NODE_COORD_SECTION"))?;
            let metric = if ewt == "EUC_2D" {
                Metric::Euc2d
            } else {
                Metric::Ceil2d
            };
            let coords = coords.into_iter().map(|c| c.expect("filled")).collect();
            Instance::from_coords(coords, metric)?
        }
        _ => {
            if header.edge_weight_format.is_none() {
                return Err(ParseError::MissingField("EDGE_WEIGHT_FORMAT"));
            }
            let w = weights.ok_or(ParseError::MissingField("EDGE_WEIGHT_SECTION"))?;
            for i in 0..n {
                for j in (i + 1)..n {
                    if w[i * n + j] != w[j * n + i] {
                        return Err(ParseError::NonSymmetric { i, j });
                    }
                }
            }
            Instance::from_matrix(w.chunks(n).map(<[f64]>::to_vec).collect())?
        }
    };
    Ok(match header.name {
        Some(name) => inst.with_name(name),
        None => inst,
    })
}

fn read_coords<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    n: usize,
) -> Result<Vec<Option<(f64, f64)>>, ParseError> {
    let mut coords = vec![None; n];
    let mut found = 0;
    while found < n {
        let Some((lineno, line)) = lines.next() else {
            break;
        };
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [id, x, y] = fields.as_slice() else {
            if fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
                // a header keyword: the section ended early
                break;
            }
            return Err(ParseError::MalformedCoord {
                line: lineno,
                text: line.to_string(),
            });
        };
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| ParseError::InvalidNumber {
                line: lineno,
                text: s.to_string(),
            })
        };
        let id: usize = id.parse().map_err(|_| ParseError::InvalidNumber {
            line: lineno,
            text: id.to_string(),
        })?;
        if id == 0 || id > n || coords[id - 1].is_some() {
            return Err(ParseError::BadNodeId { line: lineno, id });
        }
        coords[id - 1] = Some((num(x)?, num(y)?));
        found += 1;
    }
    if found != n {
        return Err(ParseError::DimensionMismatch {
            section: "NODE_COORD_SECTION",
            expected: n,
            found,
        });
    }
    Ok(coords)
}

fn read_weights<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    n: usize,
) -> Result<Vec<f64>, ParseError> {
    let mut w = Vec::with_capacity(n * n);
    while w.len() < n * n {
        let Some((lineno, line)) = lines.next() else {
            break;
        };
        if line == "EOF" {
            break;
        }
        for tok in line.split_whitespace() {
            let v = tok.parse::<f64>().map_err(|_| ParseError::InvalidNumber {
                line: lineno,
                text: tok.to_string(),
            })?;
            w.push(v);
        }
    }
    if w.len() != n * n {
        return Err(ParseError::DimensionMismatch {
            section: "EDGE_WEIGHT_SECTION",
            expected: n * n,
            found: w.len(),
        });
    }
    Ok(w)
}
