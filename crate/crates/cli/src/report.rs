//! Result rows, named checks, and the three output artifacts.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value as Json};
use strichartz_core::ScalingFit;

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    F(f64),
    U(u64),
    I(i64),
    S(String),
    B(bool),
    Empty,
}

impl Value {
    pub fn opt_f(v: Option<f64>) -> Value {
        v.map_or(Value::Empty, Value::F)
    }

    /// 17 significant digits, so the text round-trips to the same `f64`.
    pub fn render(&self) -> String {
        match self {
            Value::F(x) if x.is_nan() => "NaN".into(),
            Value::F(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Value::F(x) => format!("{x:.16e}"),
            Value::U(x) => x.to_string(),
            Value::I(x) => x.to_string(),
            Value::S(s) => s.clone(),
            Value::B(b) => b.to_string(),
            Value::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cell_index: usize,
    pub values: Vec<Value>,
    pub pass: bool,
    pub error: Option<String>,
    pub wall_time_ms: f64,
}

/// A pass/fail statement about a whole run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `<= 2`.
    pub condition: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            condition: format!("<= {bound}"),
            pass: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            condition: format!(">= {bound}"),
            pass: value >= bound,
        }
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            condition: format!("> {bound}"),
            pass: value > bound,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            value,
            condition: format!("in [{lo}, {hi}]"),
            pass: (lo..=hi).contains(&value),
        }
    }
}

/// Everything one experiment produced, before it is written out.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    /// Named log-log fits with their predictions, for the summary.
    pub fits: Map<String, Json>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn new(columns: &[&'static str]) -> Self {
        Outcome {
            columns: columns.to_vec(),
            ..Outcome::default()
        }
    }

    pub fn cells_passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.checks.iter().all(|c| c.pass)
    }

    pub fn add_fit(&mut self, name: &str, fit: &ScalingFit, extra: Json) {
        let mut obj = json!({
            "slope": fit.slope,
            "intercept": fit.intercept,
            "max_residual": fit.max_residual,
            "points": fit.points,
        });
        if let (Some(o), Json::Object(e)) = (obj.as_object_mut(), extra) {
            o.extend(e);
        }
        self.fits.insert(name.into(), obj);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `experiment_id,cell_index,<columns>,pass,error,wall_time_ms`, LF endings.
pub fn render_csv(experiment_id: &str, out: &Outcome) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["experiment_id", "cell_index"];
    header.extend(&out.columns);
    header.extend(["pass", "error", "wall_time_ms"]);
    w.write_record(&header)?;
    let mut rows: Vec<&Row> = out.rows.iter().collect();
    rows.sort_by_key(|r| r.cell_index);
    for r in rows {
        debug_assert_eq!(r.values.len(), out.columns.len());
        let mut rec = vec![experiment_id.to_string(), r.cell_index.to_string()];
        rec.extend(r.values.iter().map(Value::render));
        rec.push(r.pass.to_string());
        rec.push(r.error.clone().unwrap_or_default());
        rec.push(format!("{:.3}", r.wall_time_ms));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV is built from UTF-8 strings"))
}

/// Writes to a sibling temp file and renames, so readers never see a
/// half-written artifact.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt() * 1e-300, 123456.789e10] {
            let s = Value::F(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(Value::F(f64::INFINITY).render(), "inf");
        assert_eq!(Value::Empty.render(), "");
    }

    #[test]
    fn csv_rows_are_sorted_and_quoted() {
        let mut out = Outcome::new(&["label", "x"]);
        for (i, label) in [(1, "b,c"), (0, "a")] {
            out.rows.push(Row {
                cell_index: i,
                values: vec![Value::S(label.into()), Value::F(0.5)],
                pass: true,
                error: None,
                wall_time_ms: 1.0,
            });
        }
        let text = render_csv("demo", &out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "experiment_id,cell_index,label,x,pass,error,wall_time_ms");
        assert!(lines[1].starts_with("demo,0,a,5.0000000000000000e-1,true,,"));
        assert!(lines[2].starts_with("demo,1,\"b,c\","));
        assert!(!text.contains('\r'));
    }
}
