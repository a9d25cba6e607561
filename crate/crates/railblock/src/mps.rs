//! Fixed-format MPS export and import.
//!
//! Columns and rows get generated eight-character names (`C0000001`,
//! `R0000001`). Comment lines map them back to variable tags and
//! constraint labels, so an exported model reads back with the same
//! symbolic names. A number that does not fit its twelve-character field
//! is written in full and the line loses its column alignment; the reader
//! splits on whitespace and accepts both.

use std::collections::BTreeMap;

use thiserror::Error;

use railblock_core::milp::{ConstraintLabel, MilpModel, ModelError, Sense, Symbol, Tag, VarKind};

const OBJ: &str = "COST";

#[derive(Debug, Error, PartialEq)]
pub enum MpsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("model: {0}")]
    Model(#[from] ModelError),
}

fn col_name(j: usize) -> String {
    format!("C{:07}", j + 1)
}

fn row_name(i: usize) -> String {
    format!("R{:07}", i + 1)
}

/// Shortest text that reads back to exactly `x`.
fn num(x: f64) -> String {
    let plain = format!("{x}");
    let exp = format!("{x:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

/// One data line in fixed columns 2-3, 5-12, 15-22, 25-36.
fn line(out: &mut String, kind: &str, a: &str, b: &str, value: &str) {
    let l = format!(" {kind:<2} {a:<8}  {b:<8}  {value:>12}");
    out.push_str(l.trim_end());
    out.push('\n');
}

pub fn write_mps(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("* {}\n", model.name));
    for v in model.variables() {
        out.push_str(&format!("* column {} {}\n", col_name(v.id), v.tag));
    }
    for (i, c) in model.constraints().iter().enumerate() {
        out.push_str(&format!("* row {} {}\n", row_name(i), c.label));
    }
    let name = if model.name.is_empty() { "MODEL" } else { model.name.as_str() };
    out.push_str(&format!("NAME          {name}\n"));

    out.push_str("ROWS\n");
    line(&mut out, "N", OBJ, "", "");
    for (i, c) in model.constraints().iter().enumerate() {
        let kind = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        line(&mut out, kind, &row_name(i), "", "");
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(j, a) in &c.terms {
            columns[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for v in model.variables() {
        let int = v.kind.is_integer();
        if int != in_int {
            let marker = if int { "'INTORG'" } else { "'INTEND'" };
            out.push_str(&format!("    MARKER    'MARKER'                 {marker}\n"));
            in_int = int;
        }
        let name = col_name(v.id);
        let cost = model.objective()[v.id];
        if cost != 0.0 || columns[v.id].is_empty() {
            line(&mut out, "", &name, OBJ, &num(cost));
        }
        for &(i, a) in &columns[v.id] {
            line(&mut out, "", &name, &row_name(i), &num(a));
        }
    }
    if in_int {
        out.push_str("    MARKER    'MARKER'                 'INTEND'\n");
    }

    out.push_str("RHS\n");
    if model.objective_constant != 0.0 {
        line(&mut out, "", "RHS", OBJ, &num(-model.objective_constant));
    }
    for (i, c) in model.constraints().iter().enumerate() {
        if c.rhs != 0.0 {
            line(&mut out, "", "RHS", &row_name(i), &num(c.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for v in model.variables() {
        let name = col_name(v.id);
        if v.kind == VarKind::Binary {
            line(&mut out, "BV", "BND", &name, "");
            continue;
        }
        match (v.lower, v.upper) {
            (l, u) if l == u => line(&mut out, "FX", "BND", &name, &num(l)),
            (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => line(&mut out, "FR", "BND", &name, ""),
            (l, u) => {
                if l == f64::NEG_INFINITY {
                    line(&mut out, "MI", "BND", &name, "");
                } else if l != 0.0 || v.kind.is_integer() {
                    line(&mut out, "LO", "BND", &name, &num(l));
                }
                if u == f64::INFINITY {
                    if v.kind.is_integer() {
                        line(&mut out, "PL", "BND", &name, "");
                    }
                } else {
                    line(&mut out, "UP", "BND", &name, &num(u));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn parse_tag(text: &str) -> Tag {
    let (head, index) = match text.split_once('[') {
        Some((h, rest)) => {
            let inner = rest.trim_end_matches(']');
            match inner.split(',').map(str::parse::<u32>).collect::<Result<Vec<_>, _>>() {
                Ok(ix) => (h, ix),
                Err(_) => return Tag::named(text),
            }
        }
        None => (text, Vec::new()),
    };
    let symbol = match head {
        "x" => Symbol::X,
        "y" => Symbol::Y,
        "z" => Symbol::Z,
        "u" => Symbol::U,
        "v" => Symbol::V,
        "w" => Symbol::W,
        "s" => Symbol::S,
        other => Symbol::Named(other.into()),
    };
    Tag::new(symbol, &index)
}

fn parse_label(text: &str) -> ConstraintLabel {
    if let Some((family, rest)) = text.split_once('[') {
        let inner = rest.trim_end_matches(']');
        if let Ok(ix) = inner.split(',').map(str::parse::<u32>).collect::<Result<Vec<_>, _>>() {
            return ConstraintLabel::new(family, &ix);
        }
    }
    ConstraintLabel::new(text, &[])
}

#[derive(Default)]
struct Column {
    integer: bool,
    cost: f64,
    entries: Vec<(String, f64)>,
    lower: Option<f64>,
    upper: Option<f64>,
    binary: bool,
}

/// Reads a model written by [`write_mps`] or any MPS file using the
/// supported sections (no RANGES, minimization only).
pub fn read_mps(text: &str) -> Result<MilpModel, MpsError> {
    let err = |line: usize, message: String| MpsError::Parse { line, message };
    let mut name = String::new();
    let mut tags: BTreeMap<String, String> = BTreeMap::new();
    let mut labels: BTreeMap<String, String> = BTreeMap::new();
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut objective: Option<String> = None;
    let mut columns: Vec<(String, Column)> = Vec::new();
    let mut col_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut rhs: BTreeMap<String, f64> = BTreeMap::new();
    let mut section = String::new();
    let mut integer = false;

    let number = |ln: usize, s: &str| s.parse::<f64>().map_err(|_| err(ln, format!("bad number {s:?}")));

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        if let Some(comment) = raw.strip_prefix('*') {
            let mut parts = comment.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some("column"), Some(c), Some(t)) => {
                    tags.insert(c.into(), t.into());
                }
                (Some("row"), Some(r), Some(l)) => {
                    labels.insert(r.into(), l.into());
                }
                _ => {}
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = fields[0].to_ascii_uppercase();
            match section.as_str() {
                "NAME" => name = fields.get(1).copied().unwrap_or("").into(),
                "ROWS" | "COLUMNS" | "RHS" | "BOUNDS" | "ENDATA" => {}
                "RANGES" => return Err(err(ln, "RANGES are not supported".into())),
                "OBJSENSE" => return Err(err(ln, "only minimization is supported".into())),
                other => return Err(err(ln, format!("unknown section {other}"))),
            }
            if section == "ENDATA" {
                break;
            }
            continue;
        }
        match section.as_str() {
            "ROWS" => {
                let [kind, row] = fields[..] else {
                    return Err(err(ln, "expected row type and name".into()));
                };
                let sense = match kind {
                    "N" => {
                        if objective.is_none() {
                            objective = Some(row.into());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(err(ln, format!("unknown row type {other}"))),
                };
                if row_index.insert(row.into(), rows.len()).is_some() {
                    return Err(err(ln, format!("duplicate row {row}")));
                }
                rows.push((row.into(), sense));
            }
            "COLUMNS" => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    match fields[2] {
                        "'INTORG'" => integer = true,
                        "'INTEND'" => integer = false,
                        other => return Err(err(ln, format!("unknown marker {other}"))),
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(ln, "expected column, row, value pairs".into()));
                }
                let col = fields[0];
                let k = *col_index.entry(col.into()).or_insert_with(|| {
                    columns.push((
                        col.into(),
                        Column {
                            integer,
                            ..Default::default()
                        },
                    ));
                    columns.len() - 1
                });
                for pair in fields[1..].chunks(2) {
                    let value = number(ln, pair[1])?;
                    if Some(pair[0]) == objective.as_deref() {
                        columns[k].1.cost += value;
                    } else if row_index.contains_key(pair[0]) {
                        columns[k].1.entries.push((pair[0].into(), value));
                    } else {
                        return Err(err(ln, format!("unknown row {}", pair[0])));
                    }
                }
            }
            "RHS" => {
                let pairs = if fields.len() % 2 == 1 { &fields[1..] } else { &fields[..] };
                for pair in pairs.chunks(2) {
                    if pair.len() != 2 {
                        return Err(err(ln, "expected row, value pairs".into()));
                    }
                    rhs.insert(pair[0].into(), number(ln, pair[1])?);
                }
            }
            "BOUNDS" => {
                if fields.len() < 3 {
                    return Err(err(ln, "expected bound type, set and column".into()));
                }
                let kind = fields[0];
                let &k = col_index
                    .get(fields[2])
                    .ok_or_else(|| err(ln, format!("unknown column {}", fields[2])))?;
                let col = &mut columns[k].1;
                let value = || -> Result<f64, MpsError> {
                    let s = fields.get(3).ok_or_else(|| err(ln, "missing bound value".into()))?;
                    number(ln, s)
                };
                match kind {
                    "UP" => col.upper = Some(value()?),
                    "LO" => col.lower = Some(value()?),
                    "FX" => {
                        let v = value()?;
                        col.lower = Some(v);
                        col.upper = Some(v);
                    }
                    "FR" => {
                        col.lower = Some(f64::NEG_INFINITY);
                        col.upper = Some(f64::INFINITY);
                    }
                    "MI" => col.lower = Some(f64::NEG_INFINITY),
                    "PL" => col.upper = Some(f64::INFINITY),
                    "BV" => col.binary = true,
                    other => return Err(err(ln, format!("unsupported bound type {other}"))),
                }
            }
            _ => return Err(err(ln, "data line outside a section".into())),
        }
    }

    let mut model = MilpModel::new(&name);
    let mut terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    for (cname, col) in &columns {
        let tag = tags.get(cname).map_or_else(|| Tag::named(cname), |t| parse_tag(t));
        let kind = if col.binary {
            VarKind::Binary
        } else if col.integer {
            VarKind::Integer
        } else {
            VarKind::Continuous
        };
        let lower = col.lower.unwrap_or(0.0);
        let upper = col.upper.unwrap_or(f64::INFINITY);
        let id = model.add_var(tag, kind, lower, upper, col.cost)?;
        for (r, a) in &col.entries {
            terms[row_index[r]].push((id, *a));
        }
    }
    for (i, (rname, sense)) in rows.iter().enumerate() {
        let label = labels.get(rname).map_or_else(|| ConstraintLabel::new(rname, &[]), |l| parse_label(l));
        let b = rhs.get(rname).copied().unwrap_or(0.0);
        model.add_constraint(std::mem::take(&mut terms[i]), *sense, b, label)?;
    }
    if let Some(obj) = &objective {
        model.objective_constant = -rhs.get(obj).copied().unwrap_or(0.0);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MilpModel {
        let mut m = MilpModel::new("small");
        let a = m.add_var(Tag::new(Symbol::X, &[1, 2]), VarKind::Binary, 0.0, 1.0, 3.0).unwrap();
        let b = m.add_var(Tag::new(Symbol::W, &[1, 2]), VarKind::Integer, 0.0, 4.0, -1.0).unwrap();
        let c = m.add_var(Tag::named("slack"), VarKind::Continuous, -2.0, f64::INFINITY, 0.1).unwrap();
        m.add_constraint(vec![(a, 1.0), (b, 2.5)], Sense::Le, 7.0, ConstraintLabel::new("Eq8-tracks", &[1]))
            .unwrap();
        m.add_constraint(vec![(b, 1.0), (c, -1.0 / 3.0)], Sense::Ge, 0.0, ConstraintLabel::new("free", &[]))
            .unwrap();
        m.objective_constant = 12.5;
        m
    }

    #[test]
    fn round_trip_keeps_everything() {
        let m = small();
        let back = read_mps(&write_mps(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn fixed_columns() {
        let text = write_mps(&small());
        let line = text.lines().find(|l| l.starts_with("    C0000001  R0000001")).unwrap();
        assert_eq!(&line[4..12], "C0000001");
        assert_eq!(&line[14..22], "R0000001");
        assert_eq!(line[24..36].trim(), "1");
    }

    #[test]
    fn rejects_ranges() {
        let text = "NAME x\nROWS\n N  COST\nRANGES\n";
        assert!(matches!(read_mps(text), Err(MpsError::Parse { line: 4, .. })));
    }
}
