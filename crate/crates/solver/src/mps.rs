//! Fixed-format MPS writer and a whitespace-tolerant reader.
//!
//! Rows are written as `R0000001`, `R0000002`, ... and columns as
//! `C0000001`, ... in program order, so files are stable across runs and
//! every name fits the 8-character MPS field. The objective row is `COST`.
//! The descriptive names live in a sidecar map with one `alias<TAB>name`
//! line per row and column.
//!
//! Conventions used by the writer:
//! - integer columns sit between `INTORG` / `INTEND` markers and always get
//!   explicit bounds (`UP 1` for binaries, `FX` when fixed);
//! - a constant objective term `c` is written as RHS `-c` on `COST`;
//! - numbers use at most 12 characters, choosing the representation with the
//!   smallest rounding error.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::problem::{LinearProgram, RowSense};
use crate::SolverError;

pub const OBJECTIVE_ROW: &str = "COST";

pub fn row_alias(i: usize) -> String {
    format!("R{:07}", i + 1)
}

pub fn col_alias(j: usize) -> String {
    format!("C{:07}", j + 1)
}

/// Formats `v` in at most 12 characters.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    let mut best: Option<(f64, String)> = None;
    let mut consider = |s: String| {
        if s.len() > 12 {
            return;
        }
        let err = (s.parse::<f64>().unwrap_or(f64::INFINITY) - v).abs();
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            best = Some((err, s));
        }
    };
    for prec in (0..=11).rev() {
        let s = format!("{v:.prec$}");
        if s.len() <= 12 {
            consider(s);
            break;
        }
    }
    for prec in (0..=11).rev() {
        let s = format!("{v:.prec$e}");
        if s.len() <= 12 {
            consider(s);
            break;
        }
    }
    best.map(|b| b.1).unwrap_or(plain)
}

fn field_line(fields: [&str; 6]) -> String {
    // Field start columns (1-based): 2, 5, 15, 25, 40, 50.
    const STARTS: [usize; 6] = [1, 4, 14, 24, 39, 49];
    let mut line = String::new();
    for (k, f) in fields.iter().enumerate() {
        if f.is_empty() {
            continue;
        }
        while line.len() < STARTS[k] {
            line.push(' ');
        }
        line.push_str(f);
    }
    line.push('\n');
    line
}

fn check_names(names: &[String], kind: &str) -> Result<(), SolverError> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (k, n) in names.iter().enumerate() {
        if n.contains(['\t', '\n', '\r']) {
            return Err(SolverError::Mps(format!("{kind} name {n:?} contains a tab or newline")));
        }
        if n.is_empty() {
            continue;
        }
        if let Some(prev) = seen.insert(n.as_str(), k) {
            return Err(SolverError::Mps(format!("{kind} name collision: {n:?} used by {kind}s {prev} and {k}")));
        }
    }
    Ok(())
}

/// Writes `lp` as fixed-format MPS.
pub fn write_mps(lp: &LinearProgram, name: &str) -> Result<String, SolverError> {
    lp.check()?;
    check_names(&lp.col_names, "column")?;
    check_names(&lp.row_names, "row")?;
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    if lp.num_rows() == 0 && lp.num_cols() == 0 {
        out.push_str("ENDATA\n");
        return Ok(out);
    }
    out.push_str("ROWS\n");
    out.push_str(&field_line(["N", OBJECTIVE_ROW, "", "", "", ""]));
    for (i, row) in lp.rows.iter().enumerate() {
        let s = match row.sense {
            RowSense::Le => "L",
            RowSense::Ge => "G",
            RowSense::Eq => "E",
        };
        out.push_str(&field_line([s, &row_alias(i), "", "", "", ""]));
    }

    let n = lp.num_cols();
    let mut col_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            col_entries[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for j in 0..n {
        if lp.integer[j] != in_int {
            let kind = if lp.integer[j] { "'INTORG'" } else { "'INTEND'" };
            out.push_str(&field_line(["", &format!("MARKER{marker:02}"), "'MARKER'", "", kind, ""]));
            marker += 1;
            in_int = lp.integer[j];
        }
        let alias = col_alias(j);
        let mut pairs: Vec<(String, f64)> = Vec::new();
        if lp.objective[j] != 0.0 {
            pairs.push((OBJECTIVE_ROW.into(), lp.objective[j]));
        }
        pairs.extend(col_entries[j].iter().map(|&(i, a)| (row_alias(i), a)));
        if pairs.is_empty() {
            // Keep the column visible to readers.
            pairs.push((OBJECTIVE_ROW.into(), 0.0));
        }
        for chunk in pairs.chunks(2) {
            let v1 = format_number(chunk[0].1);
            let (r2, v2) = match chunk.get(1) {
                Some((r, v)) => (r.as_str(), format_number(*v)),
                None => ("", String::new()),
            };
            out.push_str(&field_line(["", &alias, &chunk[0].0, &v1, r2, &v2]));
        }
    }
    if in_int {
        out.push_str(&field_line(["", &format!("MARKER{marker:02}"), "'MARKER'", "", "'INTEND'", ""]));
    }

    out.push_str("RHS\n");
    let mut rhs: Vec<(String, f64)> = Vec::new();
    if lp.objective_offset != 0.0 {
        rhs.push((OBJECTIVE_ROW.into(), -lp.objective_offset));
    }
    rhs.extend(lp.rows.iter().enumerate().filter(|(_, r)| r.rhs != 0.0).map(|(i, r)| (row_alias(i), r.rhs)));
    for chunk in rhs.chunks(2) {
        let v1 = format_number(chunk[0].1);
        let (r2, v2) = match chunk.get(1) {
            Some((r, v)) => (r.as_str(), format_number(*v)),
            None => ("", String::new()),
        };
        out.push_str(&field_line(["", "RHS", &chunk[0].0, &v1, r2, &v2]));
    }

    out.push_str("BOUNDS\n");
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let alias = col_alias(j);
        let mut bound = |kind: &str, v: Option<f64>| {
            let s = v.map(format_number).unwrap_or_default();
            out.push_str(&field_line([kind, "BND", &alias, &s, "", ""]));
        };
        if l == u {
            bound("FX", Some(l));
            continue;
        }
        match (l.is_finite(), u.is_finite()) {
            (false, false) => bound("FR", None),
            (false, true) => {
                bound("MI", None);
                bound("UP", Some(u));
            }
            (true, _) => {
                if l != 0.0 || lp.integer[j] {
                    bound("LO", Some(l));
                }
                if u.is_finite() {
                    bound("UP", Some(u));
                } else if lp.integer[j] {
                    bound("PL", None);
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

/// Sidecar map from aliases to descriptive names.
pub fn write_name_map(lp: &LinearProgram) -> Result<String, SolverError> {
    check_names(&lp.col_names, "column")?;
    check_names(&lp.row_names, "row")?;
    let mut out = String::new();
    let _ = writeln!(out, "{OBJECTIVE_ROW}\tobjective");
    for (i, name) in lp.row_names.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}", row_alias(i), name);
    }
    for (j, name) in lp.col_names.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}", col_alias(j), name);
    }
    Ok(out)
}

/// Parses a sidecar map into `alias -> name`.
pub fn read_name_map(text: &str) -> Result<HashMap<String, String>, SolverError> {
    let mut map = HashMap::new();
    for (ln, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (a, n) = line
            .split_once('\t')
            .ok_or_else(|| SolverError::Mps(format!("name map line {}: expected alias<TAB>name", ln + 1)))?;
        if map.insert(a.to_string(), n.to_string()).is_some() {
            return Err(SolverError::Mps(format!("name map line {}: duplicate alias {a}", ln + 1)));
        }
    }
    Ok(map)
}

#[derive(PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    ObjSense,
    End,
}

/// Reads MPS (fixed or free, names without spaces). Ranges are not supported.
pub fn read_mps(text: &str) -> Result<LinearProgram, SolverError> {
    let err = |ln: usize, msg: String| SolverError::Mps(format!("line {}: {msg}", ln + 1));
    let mut lp = LinearProgram::new();
    let mut section = Section::None;
    let mut objective: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut row_entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut free_rows: Vec<String> = Vec::new();
    let mut integer_block = false;
    let mut maximise = false;

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match tokens[0] {
                "NAME" => Section::None,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "OBJSENSE" => {
                    if let Some(s) = tokens.get(1) {
                        maximise = s.starts_with("MAX");
                    }
                    Section::ObjSense
                }
                "RANGES" => return Err(err(ln, "RANGES are not supported".into())),
                "ENDATA" => Section::End,
                other => return Err(err(ln, format!("unknown section {other}"))),
            };
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(ln, format!("bad number {s:?}")));
        match section {
            Section::ObjSense => maximise = tokens[0].starts_with("MAX"),
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err(ln, "expected `type name`".into()));
                }
                let sense = match tokens[0] {
                    "N" => {
                        if objective.is_none() {
                            objective = Some(tokens[1].to_string());
                        } else {
                            free_rows.push(tokens[1].to_string());
                        }
                        continue;
                    }
                    "L" => RowSense::Le,
                    "G" => RowSense::Ge,
                    "E" => RowSense::Eq,
                    t => return Err(err(ln, format!("unknown row type {t}"))),
                };
                if row_index.insert(tokens[1].to_string(), lp.rows.len()).is_some() {
                    return Err(err(ln, format!("duplicate row {}", tokens[1])));
                }
                lp.add_row(tokens[1], [], sense, 0.0);
                row_entries.push(Vec::new());
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    match tokens[2] {
                        "'INTORG'" => integer_block = true,
                        "'INTEND'" => integer_block = false,
                        t => return Err(err(ln, format!("unknown marker {t}"))),
                    }
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err(ln, "expected `column row value [row value]`".into()));
                }
                let j = match col_index.get(tokens[0]) {
                    Some(&j) => j,
                    None => {
                        let j = lp.add_column(tokens[0], 0.0, 0.0, f64::INFINITY);
                        lp.integer[j] = integer_block;
                        col_index.insert(tokens[0].to_string(), j);
                        j
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let v = num(pair[1])?;
                    if Some(pair[0]) == objective.as_deref() {
                        lp.objective[j] += v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        row_entries[i].push((j, v));
                    } else if !free_rows.iter().any(|r| r == pair[0]) {
                        return Err(err(ln, format!("unknown row {}", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                let body = if tokens.len() % 2 == 1 { &tokens[1..] } else { &tokens[..] };
                for pair in body.chunks(2) {
                    let v = num(pair[1])?;
                    if Some(pair[0]) == objective.as_deref() {
                        lp.objective_offset = -v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        lp.rows[i].rhs = v;
                    } else if !free_rows.iter().any(|r| r == pair[0]) {
                        return Err(err(ln, format!("unknown row {}", pair[0])));
                    }
                }
            }
            Section::Bounds => {
                let kind = tokens[0];
                let needs_value = matches!(kind, "UP" | "LO" | "FX" | "LI" | "UI");
                let (col, value) = match (needs_value, tokens.len()) {
                    (true, 4) => (tokens[2], Some(num(tokens[3])?)),
                    (true, 3) => (tokens[1], Some(num(tokens[2])?)),
                    (false, 3) => (tokens[2], None),
                    (false, 2) => (tokens[1], None),
                    _ => return Err(err(ln, "malformed bound".into())),
                };
                let &j = col_index.get(col).ok_or_else(|| err(ln, format!("unknown column {col}")))?;
                let v = value.unwrap_or(0.0);
                match kind {
                    "UP" | "UI" => lp.upper[j] = v,
                    "LO" | "LI" => lp.lower[j] = v,
                    "FX" => {
                        lp.lower[j] = v;
                        lp.upper[j] = v;
                    }
                    "FR" => {
                        lp.lower[j] = f64::NEG_INFINITY;
                        lp.upper[j] = f64::INFINITY;
                    }
                    "MI" => lp.lower[j] = f64::NEG_INFINITY,
                    "PL" => lp.upper[j] = f64::INFINITY,
                    "BV" => {
                        lp.lower[j] = 0.0;
                        lp.upper[j] = 1.0;
                        lp.integer[j] = true;
                    }
                    t => return Err(err(ln, format!("unknown bound type {t}"))),
                }
                if matches!(kind, "LI" | "UI") {
                    lp.integer[j] = true;
                }
            }
            Section::None | Section::End => {}
        }
    }
    if section != Section::End {
        return Err(SolverError::Mps("missing ENDATA".into()));
    }
    for (i, entries) in row_entries.into_iter().enumerate() {
        lp.rows[i].coeffs = crate::problem::dedup_coeffs(entries);
    }
    if maximise {
        lp.objective.iter_mut().for_each(|c| *c = -*c);
        lp.objective_offset = -lp.objective_offset;
    }
    Ok(lp)
}

/// Renames rows and columns of a program read back from MPS using a sidecar
/// map. Names missing from the map keep their alias.
pub fn apply_name_map(lp: &mut LinearProgram, map: &HashMap<String, String>) {
    for n in lp.row_names.iter_mut().chain(lp.col_names.iter_mut()) {
        if let Some(full) = map.get(n.as_str()) {
            *n = full.clone();
        }
    }
}
