//! Text parameter files.
//!
//! ```text
//! tulik-params 1
//! h = 0.5
//! n = 32
//! memory = 8
//! nodes = 1
//! kernel = time-varying
//! mu = 0.2
//! order = i l from : to...
//! -7 1 0 : 0.0123
//! ...
//! ```
//!
//! Every kernel slice is written, warm-up and absent cells included, rows ordered by
//! `i`, then lag, then source node. Time-invariant kernels drop the `i` column.
//! Values use the shortest representation that parses back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{CellKind, KernelParams, KernelTensor, LagKernel, ModelParams, TimeGrid};

const HEADER: &str = "tulik-params 1";
const ORDER_TV: &str = "i l from : to...";
const ORDER_TI: &str = "l from : to...";

fn fmt_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("params line {line}: {msg}"))
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn params_to_string(params: &ModelParams) -> String {
    let g = params.grid();
    let v = params.nodes();
    let kernel = params.kernel();
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "h = {}", g.h());
    let _ = writeln!(s, "n = {}", g.n());
    let _ = writeln!(s, "memory = {}", g.memory());
    let _ = writeln!(s, "nodes = {v}");
    match kernel {
        KernelParams::TimeVarying(k) => {
            let _ = writeln!(s, "kernel = time-varying");
            let _ = writeln!(s, "mu = {}", join(params.mu()));
            let _ = writeln!(s, "order = {ORDER_TV}");
            for i in k.first_row()..=k.last_row() {
                for l in 1..=g.memory() {
                    for from in 0..v {
                        let off = k.offset(i, l, from);
                        let _ = writeln!(s, "{i} {l} {from} : {}", join(&k.data()[off..off + v]));
                    }
                }
            }
        }
        KernelParams::TimeInvariant(k) => {
            let _ = writeln!(s, "kernel = time-invariant");
            let _ = writeln!(s, "mu = {}", join(params.mu()));
            let _ = writeln!(s, "order = {ORDER_TI}");
            for l in 1..=g.memory() {
                for from in 0..v {
                    let off = k.offset(l, from);
                    let _ = writeln!(s, "{l} {from} : {}", join(&k.values()[off..off + v]));
                }
            }
        }
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.inner.by_ref().map(|(k, l)| (k + 1, l.trim())).find(|(_, l)| !l.is_empty())
    }

    fn expect(&mut self) -> Result<(usize, &'a str)> {
        self.next().ok_or_else(|| Error::Format("params file ends early".into()))
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.expect()?;
        match line.split_once('=') {
            Some((k, v)) if k.trim() == key => Ok((n, v.trim())),
            _ => Err(fmt_err(n, format!("expected `{key} = ...`"))),
        }
    }
}

fn parse<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| fmt_err(line, format!("bad {what} {s:?}")))
}

fn floats(line: usize, s: &str, expect: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split_whitespace().map(|x| parse(line, x, "value")).collect::<Result<_>>()?;
    if v.len() != expect {
        return Err(fmt_err(line, format!("expected {expect} values, found {}", v.len())));
    }
    Ok(v)
}

/// Checks the `index : values` prefix of a kernel line and returns its values.
fn slice_line(lines: &mut Lines<'_>, index: &[i64], v: usize) -> Result<Vec<f64>> {
    let (n, line) = lines.expect()?;
    let (head, tail) = line.split_once(':').ok_or_else(|| fmt_err(n, "missing `:`"))?;
    let got: Vec<i64> = head.split_whitespace().map(|x| parse(n, x, "index")).collect::<Result<_>>()?;
    if got != index {
        return Err(fmt_err(n, format!("expected slice {index:?}, found {got:?}")));
    }
    floats(n, tail, v)
}

pub fn params_from_str(text: &str) -> Result<ModelParams> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (n, first) = lines.expect()?;
    if first != HEADER {
        return Err(fmt_err(n, format!("expected header {HEADER:?}")));
    }
    let (n, h) = lines.field("h")?;
    let h: f64 = parse(n, h, "step")?;
    let (n, big_n) = lines.field("n")?;
    let big_n: usize = parse(n, big_n, "step count")?;
    let (n, memory) = lines.field("memory")?;
    let memory: usize = parse(n, memory, "memory")?;
    let (n, v) = lines.field("nodes")?;
    let v: usize = parse(n, v, "node count")?;
    if v == 0 {
        return Err(fmt_err(n, "node count must be positive"));
    }
    let grid = TimeGrid::new(h, big_n, memory).map_err(|e| Error::Format(e.to_string()))?;
    let (n, form) = lines.field("kernel")?;
    let invariant = match form {
        "time-varying" => false,
        "time-invariant" => true,
        _ => return Err(fmt_err(n, format!("unknown kernel form {form:?}"))),
    };
    let (n, mu) = lines.field("mu")?;
    let mu = floats(n, mu, v)?;
    let (n, order) = lines.field("order")?;
    let want = if invariant { ORDER_TI } else { ORDER_TV };
    if order != want {
        return Err(fmt_err(n, format!("expected order {want:?}")));
    }
    let kernel = if invariant {
        let mut k = LagKernel::zeros(grid, v);
        for l in 1..=memory {
            for from in 0..v {
                let vals = slice_line(&mut lines, &[l as i64, from as i64], v)?;
                let off = k.offset(l, from);
                k.values_mut()[off..off + v].copy_from_slice(&vals);
            }
        }
        KernelParams::TimeInvariant(k)
    } else {
        let mut k = KernelTensor::zeros(grid, v);
        for i in k.first_row()..=k.last_row() {
            for l in 1..=memory {
                for from in 0..v {
                    let vals = slice_line(&mut lines, &[i, l as i64, from as i64], v)?;
                    if k.cell_kind(i, l) == CellKind::Absent && vals.iter().any(|x| *x != 0.0) {
                        return Err(Error::Format(format!("cell (i={i}, l={l}) lies past the horizon but is nonzero")));
                    }
                    let off = k.offset(i, l, from);
                    k.data_mut()[off..off + v].copy_from_slice(&vals);
                }
            }
        }
        KernelParams::TimeVarying(k)
    };
    if let Some((n, _)) = lines.next() {
        return Err(fmt_err(n, "unexpected trailing content"));
    }
    ModelParams::new(mu, kernel).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_params(path: &Path, params: &ModelParams) -> Result<()> {
    std::fs::write(path, params_to_string(params))?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<ModelParams> {
    params_from_str(&std::fs::read_to_string(path)?)
}
