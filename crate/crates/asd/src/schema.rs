//! JSON input format for connection descriptions.
//!
//! A connection file declares its coordinate variables, the divisor
//! coordinate (always the last variable), and either an elementary model
//! (summands with exponential factor and residue matrix) or a matrix
//! connection (one coefficient matrix per direction). Every scalar is an
//! exact rational string; floats are rejected by the parser.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::matrix::Matrix;
use crate::algebra::ratfun::RatFun;
use crate::algebra::scalar::Scalar;
use crate::connection::{ElementaryModel, MatrixConnection, RegularPart, Summand};
use crate::error::{Error, Result};
use crate::parse::{parse_fraction, parse_ratfun};

pub const SCHEMA_VERSION: &str = "asd-connection/1";

/// One exponential summand: the twist exponent as an expression string and
/// the residue matrix of the regular factor as rational strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummandSpec {
    pub phi: String,
    pub residue: Vec<Vec<String>>,
}

/// The model payload: an elementary direct sum or a matrix connection with
/// one rational-function matrix per coordinate direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Elementary { summands: Vec<SummandSpec> },
    Matrix { matrices: Vec<Vec<Vec<String>>> },
}

/// A parsed and validated connection description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionFile {
    pub schema: String,
    pub variables: Vec<String>,
    pub divisor: String,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<String>>,
}

impl ConnectionFile {
    /// Parses and validates a JSON document; parse failures carry the line
    /// and column reported by the JSON reader.
    pub fn parse(src: &str) -> Result<Self> {
        let file: ConnectionFile = serde_json::from_str(src).map_err(|e| {
            Error::parse(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Io {
            detail: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&src)
    }

    /// Deterministic serialization: struct fields in declaration order,
    /// two-space indentation, trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("serializable");
        out.push('\n');
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::parse(format!(
                "unsupported schema {:?}; expected {SCHEMA_VERSION:?}",
                self.schema
            )));
        }
        if self.variables.is_empty() {
            return Err(Error::parse("no variables declared"));
        }
        for (i, v) in self.variables.iter().enumerate() {
            if v.is_empty() {
                return Err(Error::parse("empty variable name"));
            }
            if self.variables[..i].contains(v) {
                return Err(Error::parse(format!("duplicate variable {v:?}")));
            }
        }
        let last = self.variables.last().expect("nonempty");
        if &self.divisor != last {
            return Err(Error::parse(format!(
                "divisor {:?} must be the last variable {last:?}",
                self.divisor
            )));
        }
        let n = self.variables.len();
        match &self.model {
            ModelSpec::Elementary { summands } => {
                if summands.is_empty() {
                    return Err(Error::parse("elementary model needs at least one summand"));
                }
                for (k, s) in summands.iter().enumerate() {
                    let r = s.residue.len();
                    if r == 0 {
                        return Err(Error::parse(format!("summand {k}: empty residue")));
                    }
                    for row in &s.residue {
                        if row.len() != r {
                            return Err(Error::parse(format!(
                                "summand {k}: residue must be square"
                            )));
                        }
                        for entry in row {
                            entry.parse::<Scalar>().map_err(|e| {
                                Error::parse(format!("summand {k}: residue entry: {e}"))
                            })?;
                        }
                    }
                }
            }
            ModelSpec::Matrix { matrices } => {
                if matrices.len() != n {
                    return Err(Error::parse(format!(
                        "expected {n} coefficient matrices, found {}",
                        matrices.len()
                    )));
                }
                let size = matrices
                    .first()
                    .map(|m| m.len())
                    .filter(|s| *s > 0)
                    .ok_or_else(|| Error::parse("empty coefficient matrix"))?;
                for (i, mat) in matrices.iter().enumerate() {
                    if mat.len() != size || mat.iter().any(|row| row.len() != size) {
                        return Err(Error::parse(format!(
                            "matrix {i} must be {size}x{size}"
                        )));
                    }
                }
            }
        }
        for (k, point) in self.points.iter().enumerate() {
            if point.len() + 1 != n {
                return Err(Error::parse(format!(
                    "point {k} must bind the {} transverse variables",
                    n - 1
                )));
            }
            for entry in point {
                entry
                    .parse::<Scalar>()
                    .map_err(|e| Error::parse(format!("point {k}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn is_elementary(&self) -> bool {
        matches!(self.model, ModelSpec::Elementary { .. })
    }

    /// Builds the elementary model, parsing each twist exponent over the
    /// declared variables.
    pub fn elementary(&self) -> Result<ElementaryModel> {
        let ModelSpec::Elementary { summands } = &self.model else {
            return Err(Error::unsupported(
                "operation needs an elementary model; this file declares a matrix connection",
            ));
        };
        let vars: Vec<&str> = self.variables.iter().map(|s| s.as_str()).collect();
        let mut built = Vec::with_capacity(summands.len());
        for s in summands {
            let phi = parse_fraction(&s.phi, &vars, &self.divisor)?;
            let r = s.residue.len();
            let mut data = Vec::with_capacity(r * r);
            for row in &s.residue {
                for entry in row {
                    data.push(entry.parse::<Scalar>()?);
                }
            }
            let reg = RegularPart::new(Matrix::new(r, r, data)?)?;
            built.push(Summand { phi, reg });
        }
        ElementaryModel::new(self.variables.clone(), built)
    }

    /// Builds the matrix connection, parsing each entry as a rational
    /// function over the declared variables.
    pub fn matrix(&self) -> Result<MatrixConnection> {
        let ModelSpec::Matrix { matrices } = &self.model else {
            return Err(Error::unsupported(
                "operation needs a matrix connection; this file declares an elementary model",
            ));
        };
        let vars: Vec<&str> = self.variables.iter().map(|s| s.as_str()).collect();
        let mut mats = Vec::with_capacity(matrices.len());
        for mat in matrices {
            let size = mat.len();
            let mut data: Vec<RatFun> = Vec::with_capacity(size * size);
            for row in mat {
                for entry in row {
                    data.push(parse_ratfun(entry, &vars)?);
                }
            }
            mats.push(Matrix::new(size, size, data)?);
        }
        MatrixConnection::new(self.variables.clone(), mats)
    }

    /// The declared divisor points as exact scalars.
    pub fn point_values(&self) -> Result<Vec<Vec<Scalar>>> {
        self.points
            .iter()
            .map(|p| p.iter().map(|s| Ok(s.parse::<Scalar>()?)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_file() -> String {
        r#"{
            "schema": "asd-connection/1",
            "variables": ["x1", "x2"],
            "divisor": "x2",
            "model": {
                "kind": "elementary",
                "summands": [
                    {"phi": "x1/x2^2", "residue": [["-3/2"]]}
                ]
            },
            "points": [["1"], ["2"]]
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_builds_elementary_model() {
        let file = ConnectionFile::parse(&exp_file()).unwrap();
        let model = file.elementary().unwrap();
        assert_eq!(model.vars(), &["x1".to_string(), "x2".to_string()]);
        assert_eq!(model.total_rank(), 1);
        assert_eq!(
            model.summands()[0].reg.residue().get(0, 0),
            &"-3/2".parse::<Scalar>().unwrap()
        );
        let points = file.point_values().unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0], vec![Scalar::one()]);
    }

    #[test]
    fn round_trips_through_json() {
        let file = ConnectionFile::parse(&exp_file()).unwrap();
        let json = file.to_json();
        let reparsed = ConnectionFile::parse(&json).unwrap();
        assert_eq!(file, reparsed);
        assert_eq!(json, reparsed.to_json());
    }

    #[test]
    fn reports_parse_position_on_malformed_json() {
        let err = ConnectionFile::parse("{\n  \"schema\": }").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line 2"), "missing position in {text:?}");
    }

    #[test]
    fn rejects_wrong_schema_tag() {
        let src = exp_file().replace("asd-connection/1", "asd-connection/9");
        assert!(ConnectionFile::parse(&src).is_err());
    }

    #[test]
    fn rejects_misplaced_divisor() {
        let src = exp_file().replace("\"divisor\": \"x2\"", "\"divisor\": \"x1\"");
        assert!(ConnectionFile::parse(&src).is_err());
    }

    #[test]
    fn rejects_float_scalars() {
        let src = exp_file().replace("-3/2", "-1.5");
        assert!(ConnectionFile::parse(&src).is_err());
    }

    #[test]
    fn rejects_short_points() {
        let src = exp_file().replace("[\"1\"], [\"2\"]", "[]");
        assert!(ConnectionFile::parse(&src).is_err());
    }

    #[test]
    fn rejects_unknown_fields() {
        let src = exp_file().replace("\"points\"", "\"extra\": 1, \"points\"");
        assert!(ConnectionFile::parse(&src).is_err());
    }

    #[test]
    fn builds_matrix_connection() {
        let src = r#"{
            "schema": "asd-connection/1",
            "variables": ["x1", "x2"],
            "divisor": "x2",
            "model": {
                "kind": "matrix",
                "matrices": [
                    [["1/x2^2"]],
                    [["-2*x1/x2^3"]]
                ]
            }
        }"#;
        let file = ConnectionFile::parse(src).unwrap();
        let conn = file.matrix().unwrap();
        assert_eq!(conn.rank(), 1);
        assert!(file.elementary().is_err());
        let rho = conn.katz_generic_rank().unwrap().as_integer().unwrap();
        assert_eq!(rho, 2);
    }

    #[test]
    fn matrix_model_requires_one_matrix_per_direction() {
        let src = r#"{
            "schema": "asd-connection/1",
            "variables": ["x1", "x2"],
            "divisor": "x2",
            "model": {
                "kind": "matrix",
                "matrices": [[["1/x2"]]]
            }
        }"#;
        assert!(ConnectionFile::parse(src).is_err());
    }
}
