use std::fmt::Write as _;

use super::perfect::{PerfectDyadicSpec, PerfectKind};
use super::shift::{HaarShiftSpec, ShiftCoeff};
use super::smooth::{KernelShape, SmoothKernelSpec};
use super::transform::{Side, TransformKind, TransformSpec};
use crate::dyadic::{from_text, parse_entries, to_text, write_entries, CubeIndex, Grid, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::Mat;

/// Any operator the laboratory can apply.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    Shift(HaarShiftSpec),
    Perfect(PerfectDyadicSpec),
    Transform(TransformSpec),
    Smooth(SmoothKernelSpec),
}

impl OperatorSpec {
    pub fn apply(&self, f: &MatFn) -> Result<MatFn> {
        match self {
            OperatorSpec::Shift(s) => s.apply(f),
            OperatorSpec::Perfect(s) => s.apply(f),
            OperatorSpec::Transform(s) => s.apply(f),
            OperatorSpec::Smooth(s) => s.apply(f),
        }
    }

    pub fn side(&self) -> Side {
        match self {
            OperatorSpec::Shift(s) => s.side,
            OperatorSpec::Perfect(s) => s.side,
            OperatorSpec::Transform(s) => s.side,
            OperatorSpec::Smooth(s) => s.side,
        }
    }

    pub fn with_side(&self, side: Side) -> Self {
        let mut out = self.clone();
        match &mut out {
            OperatorSpec::Shift(s) => s.side = side,
            OperatorSpec::Perfect(s) => s.side = side,
            OperatorSpec::Transform(s) => s.side = side,
            OperatorSpec::Smooth(s) => s.side = side,
        }
        out
    }

    /// `T'` with `(T f)* = T'(f*)`.
    pub fn conjugate_side(&self) -> Self {
        match self {
            OperatorSpec::Shift(s) => OperatorSpec::Shift(s.conjugate_side()),
            OperatorSpec::Perfect(s) => OperatorSpec::Perfect(s.conjugate_side()),
            OperatorSpec::Transform(s) => OperatorSpec::Transform(s.conjugate_side()),
            OperatorSpec::Smooth(s) => OperatorSpec::Smooth(s.conjugate_side()),
        }
    }

    pub fn grid(&self) -> Grid {
        match self {
            OperatorSpec::Shift(s) => s.grid,
            OperatorSpec::Perfect(s) => s.grid,
            OperatorSpec::Transform(s) => s.grid,
            OperatorSpec::Smooth(s) => s.grid,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::Shift(s) => s.d,
            OperatorSpec::Perfect(s) => s.d,
            OperatorSpec::Transform(s) => s.d,
            OperatorSpec::Smooth(s) => s.dim(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            OperatorSpec::Shift(_) => "shift",
            OperatorSpec::Perfect(p) => match p.kind {
                PerfectKind::HaarMultiplier { .. } => "perfect_multiplier",
                PerfectKind::Paraproduct { .. } => "perfect_paraproduct",
                PerfectKind::ParaproductAdjoint { .. } => "perfect_paraproduct_adjoint",
            },
            OperatorSpec::Transform(t) => match t.kind {
                TransformKind::Transform { .. } => "transform",
                TransformKind::Paraproduct { .. } => "paraproduct",
                TransformKind::ParaproductAdjoint { .. } => "paraproduct_adjoint",
            },
            OperatorSpec::Smooth(_) => "smooth",
        }
    }

    /// Text form; floats use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let g = self.grid();
        let mut s = String::from("operator v1\n");
        let _ = writeln!(s, "kind {}", self.kind_name());
        let _ = writeln!(s, "side {}", self.side().name());
        let _ = writeln!(s, "grid {} {} {}", g.n, g.depth, g.pad);
        let _ = writeln!(s, "d {}", self.dim());
        match self {
            OperatorSpec::Shift(sh) => {
                let _ = writeln!(s, "complexity {} {}", sh.r, sh.s);
                for c in &sh.coeffs {
                    let _ = write!(s, "coeff");
                    for cube in [c.q, c.r, c.s] {
                        let _ = write!(s, " {} {} {}", cube.gen, cube.coords[0], cube.coords[1]);
                    }
                    let _ = write!(s, " {} {} ", c.eps_r, c.eps_s);
                    write_entries(&mut s, &c.alpha);
                    s.push('\n');
                }
            }
            OperatorSpec::Perfect(p) => match &p.kind {
                PerfectKind::HaarMultiplier { xi } => write_levels(&mut s, xi),
                PerfectKind::Paraproduct { rho } | PerfectKind::ParaproductAdjoint { rho } => {
                    write_symbol(&mut s, rho)
                }
            },
            OperatorSpec::Transform(t) => match &t.kind {
                TransformKind::Transform { xi } => write_levels(&mut s, xi),
                TransformKind::Paraproduct { rho } | TransformKind::ParaproductAdjoint { rho } => {
                    write_symbol(&mut s, rho)
                }
            },
            OperatorSpec::Smooth(k) => {
                match k.shape {
                    KernelShape::Zero => s.push_str("shape zero\n"),
                    KernelShape::Sign => s.push_str("shape sign\n"),
                    KernelShape::Riesz { axis } => {
                        let _ = writeln!(s, "shape riesz {axis}");
                    }
                }
                let _ = writeln!(s, "adjoint {}", k.adjoint);
                s.push_str("coeff ");
                write_entries(&mut s, &k.coeff);
                s.push('\n');
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse(text)
    }
}

fn write_levels(s: &mut String, xi: &[Vec<Mat>]) {
    for (k, level) in xi.iter().enumerate() {
        for (c, m) in level.iter().enumerate() {
            let _ = write!(s, "xi {k} {c} ");
            write_entries(s, m);
            s.push('\n');
        }
    }
}

fn write_symbol(s: &mut String, rho: &MatFn) {
    s.push_str("symbol\n");
    s.push_str(&to_text(rho));
    s.push_str("end\n");
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let t = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    t.parse::<T>()
        .map_err(|e| perr(line, format!("{what} `{t}`: {e}")))
}

#[derive(Default)]
struct Header {
    kind: Option<String>,
    side: Option<Side>,
    grid: Option<Grid>,
    d: Option<usize>,
    complexity: Option<(u32, u32)>,
    shape: Option<KernelShape>,
    adjoint: bool,
}

fn parse(text: &str) -> Result<OperatorSpec> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut it = lines.into_iter().peekable();
    match it.next() {
        Some((_, "operator v1")) => {}
        Some((ln, other)) => {
            return Err(perr(ln, format!("expected `operator v1`, found `{other}`")))
        }
        None => return Err(perr(1, "empty operator spec")),
    }
    let mut h = Header::default();
    let mut coeffs: Vec<(usize, &str)> = Vec::new();
    let mut xi_lines: Vec<(usize, &str)> = Vec::new();
    let mut symbol: Option<MatFn> = None;
    let mut smooth_coeff: Option<(usize, &str)> = None;
    while let Some((ln, line)) = it.next() {
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default();
        match key {
            "kind" => h.kind = Some(num::<String>(toks.next(), ln, "kind")?),
            "side" => {
                let v = toks.next().unwrap_or_default();
                h.side = Some(Side::parse(v).ok_or_else(|| perr(ln, format!("side `{v}`")))?);
            }
            "grid" => {
                let n = num(toks.next(), ln, "n")?;
                let k = num(toks.next(), ln, "K")?;
                let p = num(toks.next(), ln, "p")?;
                h.grid = Some(Grid::new(n, k, p).map_err(|e| perr(ln, e.to_string()))?);
            }
            "d" => h.d = Some(num(toks.next(), ln, "d")?),
            "complexity" => {
                h.complexity = Some((num(toks.next(), ln, "r")?, num(toks.next(), ln, "s")?))
            }
            "coeff" => {
                if h.kind.as_deref() == Some("smooth") {
                    smooth_coeff = Some((ln, line));
                } else {
                    coeffs.push((ln, line));
                }
            }
            "xi" => xi_lines.push((ln, line)),
            "shape" => {
                h.shape = Some(match toks.next() {
                    Some("zero") => KernelShape::Zero,
                    Some("sign") => KernelShape::Sign,
                    Some("riesz") => KernelShape::Riesz {
                        axis: num(toks.next(), ln, "axis")?,
                    },
                    other => return Err(perr(ln, format!("shape {other:?}"))),
                })
            }
            "adjoint" => h.adjoint = num(toks.next(), ln, "adjoint")?,
            "symbol" => {
                let mut body = String::new();
                let mut closed = false;
                for (_, l) in it.by_ref() {
                    if l == "end" {
                        closed = true;
                        break;
                    }
                    body.push_str(l);
                    body.push('\n');
                }
                if !closed {
                    return Err(perr(ln, "symbol block without `end`"));
                }
                symbol = Some(from_text(&body).map_err(|e| match e {
                    Error::Parse { line, msg } => perr(ln + line, msg),
                    other => perr(ln, other.to_string()),
                })?);
            }
            other => return Err(perr(ln, format!("unknown key `{other}`"))),
        }
    }
    let kind = h.kind.ok_or_else(|| perr(0, "missing kind"))?;
    let side = h.side.ok_or_else(|| perr(0, "missing side"))?;
    let grid = h.grid.ok_or_else(|| perr(0, "missing grid"))?;
    let d = h.d.ok_or_else(|| perr(0, "missing d"))?;
    let need_symbol = || -> Result<MatFn> {
        let rho = symbol
            .clone()
            .ok_or_else(|| perr(0, "missing symbol block"))?;
        if rho.grid() != grid || rho.dim() != d {
            return Err(perr(0, "symbol grid or size disagrees with header"));
        }
        Ok(rho)
    };
    let levels = || -> Result<Vec<Vec<Mat>>> {
        let mut xi: Vec<Vec<Option<Mat>>> = (0..grid.depth)
            .map(|k| vec![None; grid.cubes_at(k)])
            .collect();
        for &(ln, line) in &xi_lines {
            let mut toks = line.split_whitespace().skip(1);
            let k: usize = num(toks.next(), ln, "generation")?;
            let c: usize = num(toks.next(), ln, "cube")?;
            let slot = xi
                .get_mut(k)
                .and_then(|l| l.get_mut(c))
                .ok_or_else(|| perr(ln, format!("ξ index ({k}, {c}) out of range")))?;
            *slot = Some(parse_entries(toks, d, ln)?);
        }
        xi.into_iter()
            .enumerate()
            .map(|(k, l)| {
                l.into_iter()
                    .enumerate()
                    .map(|(c, m)| m.ok_or_else(|| perr(0, format!("missing ξ entry ({k}, {c})"))))
                    .collect()
            })
            .collect()
    };
    let wrap = |e: Error| match e {
        Error::Parse { .. } => e,
        other => perr(0, other.to_string()),
    };
    Ok(match kind.as_str() {
        "shift" => {
            let (r, s) = h.complexity.ok_or_else(|| perr(0, "missing complexity"))?;
            let mut cs = Vec::with_capacity(coeffs.len());
            for &(ln, line) in &coeffs {
                let mut toks = line.split_whitespace().skip(1);
                let mut cube = || -> Result<CubeIndex> {
                    Ok(CubeIndex {
                        gen: num(toks.next(), ln, "generation")?,
                        coords: [num(toks.next(), ln, "x0")?, num(toks.next(), ln, "x1")?],
                    })
                };
                let (q, rc, sc) = (cube()?, cube()?, cube()?);
                let eps_r = num(toks.next(), ln, "ε_R")?;
                let eps_s = num(toks.next(), ln, "ε_S")?;
                let alpha = parse_entries(toks, d, ln)?;
                cs.push(ShiftCoeff {
                    q,
                    r: rc,
                    s: sc,
                    eps_r,
                    eps_s,
                    alpha,
                });
            }
            OperatorSpec::Shift(HaarShiftSpec::new(grid, d, r, s, side, cs).map_err(wrap)?)
        }
        "perfect_multiplier" => OperatorSpec::Perfect(
            PerfectDyadicSpec::haar_multiplier(grid, d, levels()?, side).map_err(wrap)?,
        ),
        "perfect_paraproduct" => {
            OperatorSpec::Perfect(PerfectDyadicSpec::paraproduct(need_symbol()?, side))
        }
        "perfect_paraproduct_adjoint" => {
            OperatorSpec::Perfect(PerfectDyadicSpec::paraproduct_adjoint(need_symbol()?, side))
        }
        "transform" => OperatorSpec::Transform(
            TransformSpec::from_levels(grid, d, levels()?, side).map_err(wrap)?,
        ),
        "paraproduct" => OperatorSpec::Transform(TransformSpec::paraproduct(need_symbol()?, side)),
        "paraproduct_adjoint" => {
            OperatorSpec::Transform(TransformSpec::paraproduct_adjoint(need_symbol()?, side))
        }
        "smooth" => {
            let shape = h.shape.ok_or_else(|| perr(0, "missing shape"))?;
            let (ln, line) = smooth_coeff.ok_or_else(|| perr(0, "missing coeff"))?;
            let coeff = parse_entries(line.split_whitespace().skip(1), d, ln)?;
            let mut k = SmoothKernelSpec::new(grid, shape, coeff, side).map_err(wrap)?;
            k.adjoint = h.adjoint;
            OperatorSpec::Smooth(k)
        }
        other => return Err(perr(0, format!("unknown operator kind `{other}`"))),
    })
}
