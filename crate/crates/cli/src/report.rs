//! Report assembly: a JSON value for machines, text for people, CSV for sweeps.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub struct Report {
    pub json: Value,
    pub text: String,
    /// Set only by catalog runs whose verdicts differ from the expected ones.
    pub verdict_failed: bool,
}

impl Report {
    pub fn new(json: Value, text: String) -> Report {
        Report {
            json,
            text,
            verdict_failed: false,
        }
    }

    /// Write to stdout; a closed pipe is not an error.
    pub fn print(&self, json: bool) -> io::Result<()> {
        let mut out = io::stdout().lock();
        let result = if json {
            let body = serde_json::to_string_pretty(&self.json).expect("report values are finite JSON");
            writeln!(out, "{body}")
        } else if self.text.ends_with('\n') {
            out.write_all(self.text.as_bytes())
        } else {
            writeln!(out, "{}", self.text)
        };
        match result {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        }
    }
}

pub fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

#[derive(Serialize)]
pub struct Row {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub value: f64,
}

pub fn write_csv(path: &Path, rows: &[Row]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON has no infinities or NaN; map them to null.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}
