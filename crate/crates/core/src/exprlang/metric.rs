//! Metric-definition files: a chart dimension, the Riemannian part a_ij,
//! the 1-form b_i and the phi family.

use toml::{Table, Value};

use super::ast::Expr;
use super::parser::{parse_expr, parse_phi_expr};
use crate::error::{Error, Result};
use crate::phi::PhiSpec;

/// A parsed and validated metric definition.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDef {
    pub dim: usize,
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Expr>,
    pub phi: PhiSpec,
}

impl MetricDef {
    /// Build from already-constructed fields, enforcing the same invariants as the parser.
    pub fn new(a: [[Expr; 2]; 2], b: [Expr; 2], phi: PhiSpec) -> Result<MetricDef> {
        if a[0][1] != a[1][0] {
            return Err(Error::AsymmetricAlpha { i: 1, j: 2 });
        }
        phi.validate()?;
        let def = MetricDef {
            dim: 2,
            a: a.into_iter().map(Vec::from).collect(),
            b: Vec::from(b),
            phi,
        };
        for e in def.a.iter().flatten().chain(&def.b) {
            if e.max_var() > 2 {
                return Err(Error::VariableOutOfRange {
                    index: e.max_var(),
                    dim: 2,
                    offset: 0,
                });
            }
        }
        Ok(def)
    }

    pub fn with_phi(&self, phi: PhiSpec) -> Result<MetricDef> {
        phi.validate()?;
        Ok(MetricDef { phi, ..self.clone() })
    }

    /// Serialize to the metric-file format; `parse_metric_def` reads it back.
    pub fn to_toml(&self) -> String {
        let q = |e: &Expr| format!("\"{e}\"");
        let mut out = String::new();
        out.push_str(&format!("[chart]\ndim = {}\n\n[alpha]\n", self.dim));
        for i in 0..self.dim {
            for j in i..self.dim {
                out.push_str(&format!("a{}{} = {}\n", i + 1, j + 1, q(&self.a[i][j])));
            }
        }
        out.push_str("\n[beta]\n");
        for (i, e) in self.b.iter().enumerate() {
            out.push_str(&format!("b{} = {}\n", i + 1, q(e)));
        }
        out.push_str(&format!("\n[phi]\nfamily = \"{}\"\n", self.phi.tag()));
        let num = |k: &str, v: f64| format!("{k} = {v:?}\n");
        match &self.phi {
            PhiSpec::MKropina { c, m } => out.push_str(&(num("c", *c) + &num("m", *m))),
            PhiSpec::KropinaLinear { c } => out.push_str(&num("c", *c)),
            PhiSpec::Thm41Ii { k1, k2 } => out.push_str(&(num("k1", *k1) + &num("k2", *k2))),
            PhiSpec::Thm41Iii { k1, k2, m } => {
                out.push_str(&(num("k1", *k1) + &num("k2", *k2) + &num("m", *m)))
            }
            PhiSpec::Thm41Iv { m, k } => out.push_str(&(num("m", *m) + &num("k", *k))),
            PhiSpec::Thm41IvConstB { m, b } => out.push_str(&(num("m", *m) + &num("b", *b))),
            PhiSpec::Thm41V { m, k, b } => {
                out.push_str(&(num("m", *m) + &num("k", *k) + &num("b", *b)))
            }
            PhiSpec::Custom(e) => {
                out.push_str(&format!("expr = \"{}\"\n", e.to_source_with(&|_| "s".into())))
            }
        }
        out
    }
}

fn file_err(msg: impl Into<String>) -> Error {
    Error::MetricFile(msg.into())
}

fn section<'a>(doc: &'a Table, name: &str) -> Result<&'a Table> {
    match doc.get(name) {
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(file_err(format!("`{name}` must be a section"))),
        None => Err(Error::MissingSection(name.to_string())),
    }
}

fn reject_unknown(t: &Table, sec: &str, allowed: &[&str]) -> Result<()> {
    match t.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(file_err(format!("unknown key `{k}` in [{sec}]"))),
        None => Ok(()),
    }
}

fn field(t: &Table, sec: &str, key: &str, dim: usize) -> Result<Option<Expr>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => parse_expr(s, dim).map(Some).map_err(|e| match e {
            Error::Syntax { offset, message } => Error::Syntax {
                offset,
                message: format!("[{sec}] {key}: {message}"),
            },
            other => other,
        }),
        Some(_) => Err(file_err(format!("[{sec}] {key} must be a quoted expression"))),
    }
}

fn number(t: &Table, key: &str) -> Result<Option<f64>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Float(v)) => Ok(Some(*v)),
        Some(Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(_) => Err(Error::InvalidPhi(format!("`{key}` must be a number"))),
    }
}

fn parse_phi(t: &Table) -> Result<PhiSpec> {
    let family = match t.get("family") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(Error::InvalidPhi("`family` must be a string".into())),
        None => return Err(Error::InvalidPhi("missing `family`".into())),
    };
    let allowed: &[&str] = match family {
        "m_kropina" => &["family", "c", "m"],
        "kropina_linear" => &["family", "c"],
        "thm41_ii" => &["family", "k1", "k2"],
        "thm41_iii" => &["family", "k1", "k2", "m"],
        "thm41_iv" => &["family", "m", "k"],
        "thm41_iv_constb" => &["family", "m", "b"],
        "thm41_v" => &["family", "m", "k", "b"],
        "custom" => &["family", "expr"],
        other => return Err(Error::InvalidPhi(format!("unknown family `{other}`"))),
    };
    if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidPhi(format!("`{k}` is not a parameter of {family}")));
    }
    let req = |key: &str| {
        number(t, key)?.ok_or_else(|| Error::InvalidPhi(format!("{family} needs `{key}`")))
    };
    let opt = |key: &str| number(t, key).map(|v| v.unwrap_or(0.0));
    let spec = match family {
        "m_kropina" => PhiSpec::MKropina {
            c: opt("c")?,
            m: req("m")?,
        },
        "kropina_linear" => PhiSpec::KropinaLinear { c: opt("c")? },
        "thm41_ii" => PhiSpec::Thm41Ii {
            k1: req("k1")?,
            k2: req("k2")?,
        },
        "thm41_iii" => PhiSpec::Thm41Iii {
            k1: req("k1")?,
            k2: req("k2")?,
            m: req("m")?,
        },
        "thm41_iv" => PhiSpec::Thm41Iv {
            m: req("m")?,
            k: req("k")?,
        },
        "thm41_iv_constb" => PhiSpec::Thm41IvConstB {
            m: req("m")?,
            b: req("b")?,
        },
        "thm41_v" => PhiSpec::Thm41V {
            m: req("m")?,
            k: req("k")?,
            b: req("b")?,
        },
        _ => match t.get("expr") {
            Some(Value::String(s)) => PhiSpec::Custom(parse_phi_expr(s)?),
            _ => return Err(Error::InvalidPhi("custom needs a quoted `expr` in s".into())),
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// Parse and validate a metric-definition document.
pub fn parse_metric_def(document: &str) -> Result<MetricDef> {
    let doc: Table = document
        .parse()
        .map_err(|e: toml::de::Error| file_err(e.message().to_string()))?;
    if let Some(k) = doc.keys().find(|k| !["chart", "alpha", "beta", "phi"].contains(&k.as_str())) {
        return Err(file_err(format!("unknown section `{k}`")));
    }
    let chart = section(&doc, "chart")?;
    reject_unknown(chart, "chart", &["dim"])?;
    let dim = match chart.get("dim") {
        Some(Value::Integer(d)) if *d > 0 => *d as usize,
        Some(_) => return Err(file_err("[chart] dim must be a positive integer")),
        None => return Err(file_err("[chart] dim is required")),
    };
    if dim != 2 {
        return Err(Error::UnsupportedDimension(dim));
    }

    let alpha = section(&doc, "alpha")?;
    let mut allowed = Vec::new();
    for i in 1..=dim {
        for j in 1..=dim {
            allowed.push(format!("a{i}{j}"));
        }
    }
    let allowed_ref: Vec<&str> = allowed.iter().map(String::as_str).collect();
    reject_unknown(alpha, "alpha", &allowed_ref)?;
    let mut a = vec![vec![Expr::Const(0.0); dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let upper = field(alpha, "alpha", &format!("a{}{}", i + 1, j + 1), dim)?;
            let lower = if i == j {
                None
            } else {
                field(alpha, "alpha", &format!("a{}{}", j + 1, i + 1), dim)?
            };
            let e = match (upper, lower) {
                (Some(u), Some(l)) if u != l => {
                    return Err(Error::AsymmetricAlpha { i: i + 1, j: j + 1 })
                }
                (Some(u), _) | (None, Some(u)) => u,
                (None, None) => {
                    return Err(file_err(format!("[alpha] a{}{} is required", i + 1, j + 1)))
                }
            };
            a[i][j] = e.clone();
            a[j][i] = e;
        }
    }

    let beta = section(&doc, "beta")?;
    let keys: Vec<String> = (1..=dim).map(|i| format!("b{i}")).collect();
    let keys_ref: Vec<&str> = keys.iter().map(String::as_str).collect();
    reject_unknown(beta, "beta", &keys_ref)?;
    let b = keys
        .iter()
        .map(|k| field(beta, "beta", k, dim)?.ok_or_else(|| file_err(format!("[beta] {k} is required"))))
        .collect::<Result<Vec<_>>>()?;

    let phi = parse_phi(section(&doc, "phi")?)?;
    Ok(MetricDef { dim, a, b, phi })
}
