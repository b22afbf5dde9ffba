use std::fmt::Write as _;

use super::grid::Grid;
use super::matfn::MatFn;
use crate::error::{Error, Result};
use crate::ncalg::{Mat, C64};

/// Text form: header `n K d p hermitian`, then one line per leaf with
/// `d²` entries `re,im` in row-major order. Floats use shortest round-trip
/// formatting, so parsing restores the exact bits.
pub fn to_text(f: &MatFn) -> String {
    let g = f.grid();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} {} {} {} {}",
        g.n,
        g.depth,
        f.dim(),
        g.pad,
        f.is_hermitian_flagged()
    );
    for m in f.values() {
        write_entries(&mut s, m);
        s.push('\n');
    }
    s
}

/// Appends the `re,im` tokens of `m`, space separated.
pub(crate) fn write_entries(s: &mut String, m: &Mat) {
    let mut first = true;
    for z in m.entries() {
        if !first {
            s.push(' ');
        }
        first = false;
        let _ = write!(s, "{},{}", z.re, z.im);
    }
}

/// Parses exactly `d²` `re,im` tokens.
pub(crate) fn parse_entries<'a>(
    toks: impl Iterator<Item = &'a str>,
    d: usize,
    line: usize,
) -> Result<Mat> {
    let mut entries = Vec::with_capacity(d * d);
    for tok in toks {
        let (re, im) = tok
            .split_once(',')
            .ok_or_else(|| perr(line, format!("entry `{tok}` is not re,im")))?;
        let re: f64 = re.parse().map_err(|e| perr(line, format!("{e}")))?;
        let im: f64 = im.parse().map_err(|e| perr(line, format!("{e}")))?;
        entries.push(C64::new(re, im));
    }
    if entries.len() != d * d {
        return Err(perr(
            line,
            format!("expected {} entries, found {}", d * d, entries.len()),
        ));
    }
    Ok(Mat::from_vec(d, entries))
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn from_text(text: &str) -> Result<MatFn> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(perr(hl + 1, "header must be `n K d p hermitian`"));
    }
    let num = |i: usize, name: &str| -> Result<u32> {
        fields[i]
            .parse::<u32>()
            .map_err(|e| perr(hl + 1, format!("{name}: {e}")))
    };
    let (n, depth, d, pad) = (num(0, "n")?, num(1, "K")?, num(2, "d")?, num(3, "p")?);
    let herm = match fields[4] {
        "true" | "1" => true,
        "false" | "0" => false,
        other => return Err(perr(hl + 1, format!("hermitian flag `{other}`"))),
    };
    let grid = Grid::new(n, depth, pad)?;
    let d = d as usize;
    let mut values = Vec::with_capacity(grid.leaves());
    for (ln, line) in lines {
        values.push(parse_entries(line.split_whitespace(), d, ln + 1)?);
    }
    if values.len() != grid.leaves() {
        return Err(perr(
            0,
            format!("expected {} leaves, found {}", grid.leaves(), values.len()),
        ));
    }
    let f = MatFn::new(grid, d, values)?;
    if herm {
        // keep the stored bits; only validate
        for (l, m) in f.values().iter().enumerate() {
            let tol = crate::ncalg::TOL_HERM * m.frobenius().max(1.0);
            if m.herm_deviation() > tol {
                return Err(perr(l + 2, "leaf is not Hermitian"));
            }
        }
    }
    Ok(f.with_flag(herm))
}
