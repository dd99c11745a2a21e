//! JSON problem files.
//!
//! ```json
//! {"n": 2,
//!  "parameters": [{"name": "p", "interval": [0.5, 3.5]}],
//!  "A": [["p", "2*p"], ["2", "1"]],
//!  "b": ["1", "1"]}
//! ```
//!
//! Complex systems give `A_re`, `A_im`, `b_re`, `b_im` instead of `A`, `b`
//! and are realified on load.
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::error::{Error, Result};
use crate::interval::{exact_decimal, Interval, IntervalVector, Rounding};
use crate::model::expr::{parse_expr, ParamExpr};
use crate::model::system::{complex_to_real, ParametricSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub interval: [Number; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ProblemFile {
    pub n: usize,
    pub parameters: Vec<ParamSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub A: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub A_re: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub A_im: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_re: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_im: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { position: e.column(), message: e.to_string() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Builds the system; literals and parameter endpoints are rounded
    /// outward in rigorous mode.
    pub fn to_system(&self, mode: Rounding) -> Result<ParametricSystem> {
        let names: Vec<String> = self.parameters.iter().map(|p| p.name.clone()).collect();
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) || names[..i].contains(name) {
                return Err(Error::InvalidInput(format!("bad or duplicate parameter name `{name}`")));
            }
        }
        let p = IntervalVector::new(
            self.parameters
                .iter()
                .map(|s| Interval::parse_decimal(&s.interval[0].to_string(), &s.interval[1].to_string(), mode))
                .collect::<Result<_>>()?,
        );
        let n = self.n;
        let grid = |rows: &Vec<Vec<String>>, what: &str| -> Result<Vec<Vec<ParamExpr>>> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::dims(format!("`{what}` must be {n}x{n}")));
            }
            rows.iter().map(|r| r.iter().map(|e| parse_expr(e, &names, mode)).collect()).collect()
        };
        let column = |v: &Vec<String>, what: &str| -> Result<Vec<ParamExpr>> {
            if v.len() != n {
                return Err(Error::dims(format!("`{what}` must have {n} entries")));
            }
            v.iter().map(|e| parse_expr(e, &names, mode)).collect()
        };
        match (&self.A, &self.b, &self.A_re, &self.A_im, &self.b_re, &self.b_im) {
            (Some(a), Some(b), None, None, None, None) => {
                ParametricSystem::new(grid(a, "A")?, column(b, "b")?, p, names.clone())
            }
            (None, None, Some(ar), Some(ai), Some(br), Some(bi)) => complex_to_real(
                &grid(ar, "A_re")?,
                &grid(ai, "A_im")?,
                &column(br, "b_re")?,
                &column(bi, "b_im")?,
                p,
                names.clone(),
            ),
            _ => Err(Error::InvalidInput("give either `A` and `b` or all of `A_re`, `A_im`, `b_re`, `b_im`".into())),
        }
    }

    /// Real problem file describing `sys` exactly.
    pub fn from_system(sys: &ParametricSystem) -> Self {
        let names = sys.param_names();
        let num = |x: f64| exact_decimal(x).parse::<Number>().expect("finite decimal");
        ProblemFile {
            n: sys.n(),
            parameters: names
                .iter()
                .zip(sys.params().iter())
                .map(|(name, p)| ParamSpec { name: name.clone(), interval: [num(p.lo()), num(p.hi())] })
                .collect(),
            A: Some(sys.a().iter().map(|r| r.iter().map(|e| e.render(names)).collect()).collect()),
            b: Some(sys.b().iter().map(|e| e.render(names)).collect()),
            A_re: None,
            A_im: None,
            b_re: None,
            b_im: None,
            metadata: None,
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_problem(text: &str, mode: Rounding) -> Result<ParametricSystem> {
    ProblemFile::from_json(text)?.to_system(mode)
}

pub fn export_problem(sys: &ParametricSystem) -> String {
    ProblemFile::from_system(sys).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"{"n": 2,
        "parameters": [{"name": "p", "interval": [0.5, 3.5]}],
        "A": [["p", "2*p"], ["2", "1"]],
        "b": ["1", "1"]}"#;

    #[test]
    fn parses_real_problem() {
        let sys = parse_problem(EX1, Rounding::Rigorous).unwrap();
        assert_eq!((sys.n(), sys.k()), (2, 1));
        assert_eq!(sys.params()[0], Interval::new(0.5, 3.5).unwrap());
        let x = sys.solve_at(&[2.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn inexact_endpoints_widen() {
        let text = EX1.replace("[0.5, 3.5]", "[0.1, 0.3]");
        let sys = parse_problem(&text, Rounding::Rigorous).unwrap();
        assert!(sys.params()[0].lo() < 0.1 && sys.params()[0].hi() > 0.3);
        let fast = parse_problem(&text, Rounding::Fast).unwrap();
        assert_eq!(fast.params()[0], Interval::new(0.1, 0.3).unwrap());
    }

    #[test]
    fn round_trip_is_identical() {
        let text = EX1.replace("[0.5, 3.5]", "[0.1, 0.3]").replace("2*p", "p^2/3 - 0.7*p");
        let sys = parse_problem(&text, Rounding::Rigorous).unwrap();
        let again = parse_problem(&export_problem(&sys), Rounding::Rigorous).unwrap();
        assert_eq!(sys, again);
        let twice = parse_problem(&export_problem(&again), Rounding::Rigorous).unwrap();
        assert_eq!(again, twice);
    }

    #[test]
    fn complex_problem_is_realified() {
        let text = r#"{"n": 1, "parameters": [],
            "A_re": [["1"]], "A_im": [["1"]], "b_re": ["2"], "b_im": ["0"]}"#;
        let sys = parse_problem(text, Rounding::Rigorous).unwrap();
        assert_eq!(sys.n(), 2);
        let x = sys.solve_at(&[]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(matches!(parse_problem("{", Rounding::Fast), Err(Error::Parse { .. })));
        let wrong_n = EX1.replace("\"n\": 2", "\"n\": 3");
        assert!(matches!(parse_problem(&wrong_n, Rounding::Fast), Err(Error::DimensionMismatch(_))));
        let unknown = EX1.replace("2*p", "2*q");
        assert!(matches!(parse_problem(&unknown, Rounding::Fast), Err(Error::UnknownParameter(_))));
        let reversed = EX1.replace("[0.5, 3.5]", "[3.5, 0.5]");
        assert!(matches!(parse_problem(&reversed, Rounding::Fast), Err(Error::InvalidInput(_) | Error::InvalidInterval { .. })));
        let mixed = EX1.replace("\"b\":", "\"b_re\":");
        assert!(matches!(parse_problem(&mixed, Rounding::Fast), Err(Error::InvalidInput(_))));
    }
}
