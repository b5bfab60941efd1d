//! Text formats and rendering.
//!
//! All persisted numbers are exact rationals written as `a/b` or bare
//! integers; floating-point literals are rejected. Lines starting with `#`
//! and blank lines are ignored by every parser.
//!
//! - Matrix: one printed row per line, top row first.
//! - Copula: `xbreaks: ...`, `ybreaks: ...`, then one line per `v`-cell from
//!   the top (`v` near 1) down, each listing the masses of that row's cells
//!   from left to right.
//! - Step map: `targets: ...`, `sources: ...`, then one line with the
//!   zero-based target cell of every source cell.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::copula::PatchedCopula;
use crate::error::{Error, Result};
use crate::markov::StepMap;
use crate::mesh;
use crate::{round_half_up, Rational, TransformationMatrix};

/// Parses `a/b` or `a` with integer `a` and positive integer `b`.
pub fn parse_rational(token: &str) -> Option<Rational> {
    fn integer(s: &str) -> Option<BigInt> {
        let digits = s.strip_prefix('-').unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    }
    match token.split_once('/') {
        Some((n, d)) => {
            let d = integer(d)?;
            if d <= BigInt::zero() {
                return None;
            }
            Some(Rational::new(integer(n)?, d))
        }
        None => integer(token).map(Rational::from_integer),
    }
}

/// Significant lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(n, line)| {
        let t = line.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some((n + 1, line))
    })
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated rationals on one line, reporting 1-based columns.
fn parse_tokens(line_no: usize, line: &str, offset: usize) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    let mut rest = line;
    let mut col = offset;
    loop {
        let trimmed = rest.trim_start();
        col += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            break;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let token = &trimmed[..end];
        let value = parse_rational(token)
            .ok_or_else(|| parse_error(line_no, col + 1, format!("`{token}` is not an exact rational (use a/b or an integer)")))?;
        out.push(value);
        col += end;
        rest = &trimmed[end..];
    }
    Ok(out)
}

/// Rows of rationals, ignoring comments; rows must have equal length.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<Rational>>> {
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (n, line) in content_lines(text) {
        let row = parse_tokens(n, line, 0)?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(n, 1, format!("row has {} entries, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(1, 1, "no matrix rows"));
    }
    Ok(rows)
}

pub fn parse_matrix(text: &str) -> Result<TransformationMatrix> {
    TransformationMatrix::from_printed_rows(&parse_rows(text)?)
}

fn join(values: impl IntoIterator<Item = impl std::fmt::Display>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Canonical text: reduced fractions, single spaces, top row first.
pub fn write_matrix(a: &TransformationMatrix) -> String {
    let mut out = String::new();
    for row in a.printed_rows() {
        out.push_str(&join(row));
        out.push('\n');
    }
    out
}

fn labelled<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    label: &str,
    last_line: usize,
) -> Result<(usize, Vec<Rational>)> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| parse_error(last_line, 1, format!("missing `{label}:` line")))?;
    let body = line
        .trim_start()
        .strip_prefix(label)
        .and_then(|r| r.strip_prefix(':'))
        .ok_or_else(|| parse_error(n, 1, format!("expected `{label}:`")))?;
    let offset = line.len() - body.len();
    let values = parse_tokens(n, body, offset)?;
    mesh::check_partition(&values).map_err(|e| parse_error(n, 1, e.to_string()))?;
    Ok((n, values))
}

pub fn parse_copula(text: &str) -> Result<PatchedCopula> {
    let mut lines = content_lines(text);
    let (n1, xb) = labelled(&mut lines, "xbreaks", 1)?;
    let (n2, yb) = labelled(&mut lines, "ybreaks", n1)?;
    let (m, n) = (xb.len() - 1, yb.len() - 1);
    let mut mass = Array2::from_elem((m, n), Rational::zero());
    let mut count = 0;
    let mut last = n2;
    for (ln, line) in lines {
        last = ln;
        if count == n {
            return Err(parse_error(ln, 1, format!("more than {n} mass rows")));
        }
        let row = parse_tokens(ln, line, 0)?;
        if row.len() != m {
            return Err(parse_error(ln, 1, format!("mass row has {} entries, expected {m}", row.len())));
        }
        let j = n - 1 - count;
        for (i, v) in row.into_iter().enumerate() {
            mass[[i, j]] = v;
        }
        count += 1;
    }
    if count != n {
        return Err(parse_error(last, 1, format!("found {count} mass rows, expected {n}")));
    }
    PatchedCopula::from_parts(xb, yb, mass)
}

pub fn write_copula(c: &PatchedCopula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "xbreaks: {}", join(c.x_breaks()));
    let _ = writeln!(out, "ybreaks: {}", join(c.y_breaks()));
    for j in (0..c.y_cells()).rev() {
        out.push_str(&join(c.mass().column(j)));
        out.push('\n');
    }
    out
}

pub fn parse_step_map(text: &str) -> Result<StepMap> {
    let mut lines = content_lines(text);
    let (n1, target) = labelled(&mut lines, "targets", 1)?;
    let (n2, source) = labelled(&mut lines, "sources", n1)?;
    let (ln, line) = lines
        .next()
        .ok_or_else(|| parse_error(n2, 1, "missing assignment line"))?;
    let mut assignment = Vec::new();
    for (col, token) in line.split_whitespace().map(|t| (line.find(t).unwrap_or(0) + 1, t)) {
        let idx: usize = token
            .parse()
            .map_err(|_| parse_error(ln, col, format!("`{token}` is not a cell index")))?;
        assignment.push(idx);
    }
    if let Some((extra, _)) = lines.next() {
        return Err(parse_error(extra, 1, "unexpected content after assignment line"));
    }
    StepMap::new(source, target, assignment)
}

pub fn write_step_map(f: &StepMap) -> String {
    format!(
        "targets: {}\nsources: {}\n{}\n",
        join(f.target()),
        join(f.source()),
        join(f.assignment())
    )
}

/// How cell densities become gray levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shading {
    /// `255 - round(255 d / d_max)`: dark where dense, white where empty.
    /// A cell with positive density is never rendered pure white.
    Density,
    /// Black where `d > t * d_max`, white elsewhere.
    Threshold(Rational),
}

/// Binary PGM (`P5`) image; rows top to bottom, each pixel shaded by the
/// density of the cell containing its center.
pub fn render_pgm(c: &PatchedCopula, width: usize, height: usize, shading: &Shading) -> Vec<u8> {
    assert!(width >= 1 && height >= 1, "image must be at least 1x1");
    let dmax = (0..c.x_cells())
        .flat_map(|i| (0..c.y_cells()).map(move |j| (i, j)))
        .map(|(i, j)| c.density(i, j))
        .max()
        .expect("at least one cell");

    let two = BigInt::from(2);
    let col_cell: Vec<usize> = (0..width)
        .map(|px| mesh::locate(c.x_breaks(), &Rational::new(BigInt::from(2 * px + 1), &two * width)))
        .collect();
    let row_cell: Vec<usize> = (0..height)
        .map(|py| mesh::locate(c.y_breaks(), &Rational::new(BigInt::from(2 * (height - py) - 1), &two * height)))
        .collect();

    let mut cache: Array2<Option<u8>> = Array2::from_elem((c.x_cells(), c.y_cells()), None);
    let mut shade = |i: usize, j: usize| -> u8 {
        if let Some(v) = cache[[i, j]] {
            return v;
        }
        let d = c.density(i, j);
        let v = match shading {
            Shading::Density => {
                if d.is_zero() {
                    255
                } else {
                    let dark = round_half_up(&(Rational::from_integer(255.into()) * &d / &dmax))
                        .to_u8()
                        .unwrap_or(255);
                    (255 - dark).min(254)
                }
            }
            Shading::Threshold(t) => {
                if d > t * &dmax {
                    0
                } else {
                    255
                }
            }
        };
        cache[[i, j]] = Some(v);
        v
    };

    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for &j in &row_cell {
        for &i in &col_cell {
            out.push(shade(i, j));
        }
    }
    out
}

pub fn write_pgm(c: &PatchedCopula, width: usize, height: usize, shading: &Shading, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_pgm(c, width, height, shading))?;
    Ok(())
}

/// One line `i,j,x0,x1,y0,y1,mass` per cell with positive mass, zero-based
/// indices, `i` major.
pub fn render_csv(c: &PatchedCopula) -> String {
    let mut out = String::new();
    for (i, j) in c.support_cells() {
        let _ = writeln!(
            out,
            "{i},{j},{},{},{},{},{}",
            c.x_breaks()[i],
            c.x_breaks()[i + 1],
            c.y_breaks()[j],
            c.y_breaks()[j + 1],
            c.mass()[[i, j]]
        );
    }
    out
}

pub fn write_csv(c: &PatchedCopula, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_csv(c))?;
    Ok(())
}

/// Parses a binary PGM produced by [`render_pgm`] into `(width, height, pixels)`.
pub fn read_pgm(bytes: &[u8]) -> Option<(usize, usize, &[u8])> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return None;
    }
    let (w, h): (usize, usize) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
    let pixels = bytes.get(pos + 1..)?;
    (pixels.len() == w * h).then_some((w, h, pixels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fixtures, patch, rat, sample};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/6"), Some(rat(1, 2)));
        assert_eq!(parse_rational("-2"), Some(rat(-2, 1)));
        assert_eq!(parse_rational("0.5"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("1/-2"), None);
        assert_eq!(parse_rational("+1"), None);
        assert_eq!(parse_rational("1e3"), None);
    }

    #[test]
    fn matrix_roundtrip_is_canonical() {
        let a2 = parse_matrix(fixtures::A2).unwrap();
        assert_eq!(a2, fixtures::a2());
        let text = write_matrix(&a2);
        assert_eq!(text, "1/6 0 1/6\n0 1/3 0\n1/6 0 1/6\n");
        assert_eq!(write_matrix(&parse_matrix(&text).unwrap()), text);
    }

    #[test]
    fn matrix_file_orientation() {
        // the top printed row is the highest row index
        let l3 = fixtures::l3();
        assert_eq!(l3.entry(1, 1), &rat(3, 10));
        assert_eq!(l3.entry(0, 0), &rat(1, 4));
    }

    #[test]
    fn float_is_rejected_with_position() {
        match parse_matrix("# c\n1/2 0.5\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_matrix("1 0\n0"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix("1/2 1/4"), Err(Error::MassNotOne { .. })));
    }

    #[test]
    fn copula_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let c = sample::random_copula(&mut rng, 3, 4);
            let text = write_copula(&c);
            assert_eq!(parse_copula(&text).unwrap(), c);
        }
        let c = parse_copula("# diag\nxbreaks: 0 1/2 1\nybreaks: 0 1/2 1\n0 1/2\n1/2 0\n").unwrap();
        assert_eq!(c, PatchedCopula::diagonal(2));
    }

    #[test]
    fn copula_parse_errors() {
        assert!(matches!(parse_copula("ybreaks: 0 1\n1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_copula("xbreaks: 0 1\nybreaks: 0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_copula("xbreaks: 0 1/2 1\nybreaks: 0 1\n1/2 1/4\n"),
            Err(Error::BadMarginal { .. })
        ));
    }

    #[test]
    fn step_map_roundtrip() {
        let (f, _) = crate::markov::build_implicit_pair(&fixtures::a3().invariant_pairs(), 2);
        let text = write_step_map(&f);
        assert_eq!(parse_step_map(&text).unwrap(), f);
        assert!(parse_step_map("targets: 0 1\nsources: 0 1/2 1\n0 0\n").is_ok());
        assert!(parse_step_map("targets: 0 1\nsources: 0 1/2 1\n0 1\n").is_err());
        assert!(matches!(
            parse_step_map("targets: 0 1\nsources: 0 1/2 1\n0 x\n"),
            Err(Error::Parse { line: 3, column: 3, .. })
        ));
    }

    #[test]
    fn pgm_of_independence_is_flat() {
        let img = render_pgm(&PatchedCopula::independence(), 7, 5, &Shading::Density);
        let (w, h, px) = read_pgm(&img).unwrap();
        assert_eq!((w, h), (7, 5));
        assert!(px.iter().all(|&v| v == 0));
    }

    #[test]
    fn pgm_orientation() {
        // all mass in the bottom-left and top-right quadrants
        let img = render_pgm(&PatchedCopula::diagonal(2), 2, 2, &Shading::Density);
        let (_, _, px) = read_pgm(&img).unwrap();
        assert_eq!(px, &[255, 0, 0, 255]);
    }

    #[test]
    fn faint_cells_stay_visible() {
        let c = patch::iterate(&fixtures::a1(), &PatchedCopula::independence(), 3);
        let img = render_pgm(&c, 27, 27, &Shading::Density);
        let (_, _, px) = read_pgm(&img).unwrap();
        assert_eq!(px.iter().filter(|&&v| v < 255).count(), c.support_cells().len());
        let mask = render_pgm(&c, 27, 27, &Shading::Threshold(rat(0, 1)));
        let (_, _, mpx) = read_pgm(&mask).unwrap();
        assert!(mpx.iter().all(|&v| v == 0 || v == 255));
        assert_eq!(mpx.iter().filter(|&&v| v == 0).count(), c.support_cells().len());
    }

    #[test]
    fn csv_lines() {
        assert_eq!(render_csv(&PatchedCopula::independence()), "0,0,0,1,0,1,1\n");
        assert_eq!(render_csv(&PatchedCopula::diagonal(2)).lines().count(), 2);
        for d in 1..=3u32 {
            let c = patch::iterate(&fixtures::a2(), &PatchedCopula::independence(), d as usize);
            assert_eq!(render_csv(&c).lines().count(), 5usize.pow(d));
        }
    }
}
