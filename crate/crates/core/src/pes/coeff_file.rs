//! Plain-text coefficient files for Legendre-series surfaces.
//!
//! ```text
//! legendre-series Λ=<int> r_unit=bohr e_unit=<hartree|cm-1>
//! lambda 0
//! analytic <form> <params...>      # one or more lines, summed
//! lambda 1
//! table <N>
//! <R> <value>                      # N lines, R strictly increasing
//! ...
//! ```
//!
//! Blocks must appear in order λ = 0..=Λ. Blank lines and `#` comments
//! are ignored. Tabulated blocks are interpolated with a natural cubic
//! spline. Values are kept in the declared energy unit and converted to
//! hartree on evaluation, so writing a loaded series reproduces it.

use super::legendre::{AnalyticForm, LegendreSeries, RadialTerm};
use super::spline::CubicSpline;
use crate::units::EnergyUnit;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| perr(line, format!("not a finite number: `{tok}`")))
}

pub fn load_coefficients(path: impl AsRef<Path>) -> Result<LegendreSeries> {
    let text = std::fs::read_to_string(path)?;
    parse_coefficients(&text)
}

enum Block {
    Empty,
    Table { n: usize, r: Vec<f64>, v: Vec<f64>, header_line: usize },
    Analytic(Vec<AnalyticForm>),
}

pub fn parse_coefficients(text: &str) -> Result<LegendreSeries> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("legendre-series") {
        return Err(perr(hline, "header must start with `legendre-series`"));
    }
    let mut lmax = None;
    let mut unit = None;
    let mut r_unit_ok = false;
    for t in toks {
        let (k, v) = t.split_once('=').ok_or_else(|| perr(hline, format!("bad header field `{t}`")))?;
        match k {
            "Λ" | "L" | "lambda_max" => {
                lmax = Some(v.parse::<usize>().map_err(|_| perr(hline, format!("bad Λ `{v}`")))?)
            }
            "r_unit" => {
                if v != "bohr" {
                    return Err(perr(hline, format!("unsupported r_unit `{v}` (only bohr)")));
                }
                r_unit_ok = true;
            }
            "e_unit" => {
                unit = Some(match v {
                    "hartree" => EnergyUnit::Hartree,
                    "cm-1" => EnergyUnit::Cm1,
                    _ => return Err(perr(hline, format!("unsupported e_unit `{v}`"))),
                })
            }
            _ => return Err(perr(hline, format!("unknown header field `{k}`"))),
        }
    }
    let lmax = lmax.ok_or_else(|| perr(hline, "header lacks Λ=<int>"))?;
    let unit = unit.ok_or_else(|| perr(hline, "header lacks e_unit"))?;
    if !r_unit_ok {
        return Err(perr(hline, "header lacks r_unit=bohr"));
    }

    let mut terms: Vec<RadialTerm> = Vec::with_capacity(lmax + 1);
    let mut current: Option<(usize, Block)> = None;
    let mut last_line = hline;

    let finish = |blk: (usize, Block), terms: &mut Vec<RadialTerm>| -> Result<()> {
        let (at, b) = blk;
        let term = match b {
            Block::Empty => return Err(perr(at, format!("λ={} block is empty", terms.len()))),
            Block::Table { n, r, v, header_line } => {
                if r.len() != n {
                    return Err(perr(header_line, format!("table declares {n} rows, found {}", r.len())));
                }
                RadialTerm::Table(CubicSpline::natural(r, v).map_err(|e| perr(header_line, e.to_string()))?)
            }
            Block::Analytic(f) => RadialTerm::Analytic(f),
        };
        terms.push(term);
        Ok(())
    };

    for (ln, l) in lines {
        last_line = ln;
        let mut toks = l.split_whitespace();
        let head = toks.next().unwrap_or_default();
        match head {
            "lambda" => {
                if let Some(b) = current.take() {
                    finish(b, &mut terms)?;
                }
                let want = terms.len();
                let got: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(ln, "`lambda` needs an integer"))?;
                if got != want {
                    return Err(perr(ln, format!("λ gap or disorder: expected λ={want}, found λ={got}")));
                }
                if got > lmax {
                    return Err(perr(ln, format!("λ={got} exceeds declared Λ={lmax}")));
                }
                current = Some((ln, Block::Empty));
            }
            "table" => {
                let (_, blk) = current.as_mut().ok_or_else(|| perr(ln, "`table` outside a λ block"))?;
                if !matches!(blk, Block::Empty) {
                    return Err(perr(ln, "a λ block holds either one table or analytic lines"));
                }
                let n: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(ln, "`table` needs a row count"))?;
                if n < 2 {
                    return Err(perr(ln, "a table needs at least two rows"));
                }
                *blk = Block::Table { n, r: Vec::with_capacity(n), v: Vec::with_capacity(n), header_line: ln };
            }
            "analytic" => {
                let (_, blk) = current.as_mut().ok_or_else(|| perr(ln, "`analytic` outside a λ block"))?;
                let name = toks.next().ok_or_else(|| perr(ln, "`analytic` needs a form name"))?;
                let params = toks.map(|t| parse_f64(t, ln)).collect::<Result<Vec<_>>>()?;
                let form = AnalyticForm::from_name(name, &params).map_err(|m| perr(ln, m))?;
                match blk {
                    Block::Empty => *blk = Block::Analytic(vec![form]),
                    Block::Analytic(v) => v.push(form),
                    Block::Table { .. } => {
                        return Err(perr(ln, "a λ block holds either one table or analytic lines"))
                    }
                }
            }
            _ => {
                let (_, blk) = current.as_mut().ok_or_else(|| perr(ln, format!("unexpected `{head}`")))?;
                match blk {
                    Block::Table { n, r, v, .. } if r.len() < *n => {
                        let rv = parse_f64(head, ln)?;
                        let vv = parse_f64(toks.next().ok_or_else(|| perr(ln, "table row needs `R value`"))?, ln)?;
                        if toks.next().is_some() {
                            return Err(perr(ln, "table row has extra fields"));
                        }
                        if let Some(&prev) = r.last() {
                            if !(rv > prev) {
                                return Err(perr(ln, format!("R grid not increasing ({rv} after {prev})")));
                            }
                        }
                        r.push(rv);
                        v.push(vv);
                    }
                    _ => return Err(perr(ln, format!("unexpected line `{l}`"))),
                }
            }
        }
    }
    if let Some(b) = current.take() {
        finish(b, &mut terms)?;
    }
    if terms.len() != lmax + 1 {
        return Err(perr(
            last_line + 1,
            format!("missing λ={} block (Λ={lmax} declares {} blocks)", terms.len(), lmax + 1),
        ));
    }
    LegendreSeries::new(terms, unit)
}

/// Canonical text form. `{:?}` float formatting round-trips exactly.
pub fn write_coefficients(series: &LegendreSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "legendre-series Λ={} r_unit=bohr e_unit={}",
        series.lambda_max(),
        series.unit().as_str()
    );
    for (l, term) in series.terms().iter().enumerate() {
        let _ = writeln!(out, "lambda {l}");
        match term {
            RadialTerm::Table(s) => {
                let _ = writeln!(out, "table {}", s.knots().len());
                for (r, v) in s.knots().iter().zip(s.values()) {
                    let _ = writeln!(out, "{r:?} {v:?}");
                }
            }
            RadialTerm::Analytic(forms) => {
                for f in forms {
                    let _ = write!(out, "analytic {}", f.name());
                    for p in f.params() {
                        let _ = write!(out, " {p:?}");
                    }
                    out.push('\n');
                }
            }
        }
    }
    out
}
