//! MPS reader (fixed or free format, whitespace tokenized) and a debug writer.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::io::IoError;
use crate::matrix::Matrix;
use crate::model::{LinearProgram, VarBound};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

impl RowSense {
    fn code(self) -> &'static str {
        match self {
            RowSense::Le => "L",
            RowSense::Ge => "G",
            RowSense::Eq => "E",
        }
    }
}

/// The file's content before any normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsModel {
    pub name: String,
    pub maximize: bool,
    pub objective_name: String,
    pub rows: Vec<(String, RowSense)>,
    pub columns: Vec<String>,
    /// `(row, column, value)`; `row = None` is the objective.
    pub entries: Vec<(Option<usize>, usize, f64)>,
    pub rhs: Vec<f64>,
    pub objective_rhs: f64,
    /// `(lower, upper)` per column.
    pub bounds: Vec<(f64, f64)>,
}

/// Where a normalized `≤` row comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum RowOrigin {
    /// `sign · (original row) ≤ sign · rhs`
    Constraint { name: String, sign: f64 },
    /// A finite variable bound written as a row.
    Bound { column: String },
}

impl RowOrigin {
    pub fn constraint_name(&self) -> Option<&str> {
        match self {
            RowOrigin::Constraint { name, .. } => Some(name),
            RowOrigin::Bound { .. } => None,
        }
    }
}

/// A normalized LP (`≤` rows only) that remembers its names.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedLp {
    pub name: String,
    pub lp: LinearProgram,
    pub rows: Vec<RowOrigin>,
    pub columns: Vec<String>,
}

impl NamedLp {
    pub fn has_row(&self, name: &str) -> bool {
        self.rows.iter().any(|r| r.constraint_name() == Some(name))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Parses and normalizes: `≥` rows are negated, `=` rows become two opposite
/// `≤` rows, finite bounds other than `x ≥ 0` become extra rows.
pub fn parse_mps(text: &str) -> Result<NamedLp, IoError> {
    Ok(normalize(&parse_mps_model(text)?))
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Start,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

pub fn parse_mps_model(text: &str) -> Result<MpsModel, IoError> {
    let mut m = MpsModel {
        name: String::new(),
        maximize: false,
        objective_name: String::new(),
        rows: Vec::new(),
        columns: Vec::new(),
        entries: Vec::new(),
        rhs: Vec::new(),
        objective_rhs: 0.0,
        bounds: Vec::new(),
    };
    let mut row_index: HashMap<String, Option<usize>> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut section = Section::Start;
    let mut saw_rows = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| IoError::Parse { line: line_no, msg };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            section = match tokens[0] {
                "NAME" => {
                    m.name = tokens.get(1).unwrap_or(&"").to_string();
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(s) = tokens.get(1) {
                        m.maximize = parse_sense(s).map_err(err)?;
                    }
                    Section::ObjSense
                }
                "ROWS" => {
                    saw_rows = true;
                    Section::Rows
                }
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "RANGES" => return Err(err("RANGES section is not supported".into())),
                other => return Err(err(format!("unknown section '{other}'"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        match section {
            Section::Start | Section::Name | Section::End => {
                return Err(err("data line outside of a section".into()))
            }
            Section::ObjSense => m.maximize = parse_sense(tokens[0]).map_err(err)?,
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err("ROWS lines need a type and a name".into()));
                }
                let name = tokens[1].to_string();
                if row_index.contains_key(&name) {
                    return Err(err(format!("duplicate row '{name}'")));
                }
                let sense = match tokens[0] {
                    "N" => {
                        if m.objective_name.is_empty() {
                            m.objective_name = name.clone();
                            row_index.insert(name, None);
                        } else {
                            log::warn!("line {line_no}: extra free row '{name}' ignored");
                            row_index.insert(name, Some(usize::MAX));
                        }
                        continue;
                    }
                    "L" => RowSense::Le,
                    "G" => RowSense::Ge,
                    "E" => RowSense::Eq,
                    other => return Err(err(format!("unknown row type '{other}'"))),
                };
                row_index.insert(name.clone(), Some(m.rows.len()));
                m.rows.push((name, sense));
                m.rhs.push(0.0);
            }
            Section::Columns => {
                if tokens.contains(&"'MARKER'") {
                    return Err(err("integrality markers are not supported".into()));
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err("COLUMNS lines need a column and one or two (row, value) pairs".into()));
                }
                let col = tokens[0];
                let j = match col_index.get(col) {
                    Some(&j) => j,
                    None => {
                        let j = m.columns.len();
                        col_index.insert(col.to_string(), j);
                        m.columns.push(col.to_string());
                        m.bounds.push((0.0, f64::INFINITY));
                        j
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let row = *row_index
                        .get(pair[0])
                        .ok_or_else(|| err(format!("unknown row '{}'", pair[0])))?;
                    let v = parse_num(pair[1]).map_err(err)?;
                    if row != Some(usize::MAX) {
                        m.entries.push((row, j, v));
                    }
                }
            }
            Section::Rhs => {
                let pairs = if tokens.len() % 2 == 1 { &tokens[1..] } else { &tokens[..] };
                if pairs.is_empty() {
                    return Err(err("RHS line without values".into()));
                }
                for pair in pairs.chunks(2) {
                    let [row, val] = pair else {
                        return Err(err("dangling RHS token".into()));
                    };
                    let v = parse_num(val).map_err(err)?;
                    match row_index.get(*row) {
                        Some(None) => m.objective_rhs = v,
                        Some(Some(usize::MAX)) => {}
                        Some(Some(i)) => m.rhs[*i] = v,
                        None => return Err(err(format!("unknown row '{row}'"))),
                    }
                }
            }
            Section::Bounds => {
                let kind = tokens[0];
                let needs_value = matches!(kind, "UP" | "LO" | "FX");
                let known = needs_value || matches!(kind, "FR" | "MI" | "PL");
                if !known {
                    return Err(err(format!("unsupported bound type '{kind}'")));
                }
                let expected_with_set = if needs_value { 4 } else { 3 };
                let col_pos = match tokens.len() {
                    n if n == expected_with_set => 2,
                    n if n == expected_with_set - 1 => 1,
                    _ => return Err(err(format!("malformed {kind} bound"))),
                };
                let col = tokens[col_pos];
                let j = *col_index
                    .get(col)
                    .ok_or_else(|| err(format!("unknown column '{col}'")))?;
                let v = if needs_value {
                    parse_num(tokens[col_pos + 1]).map_err(err)?
                } else {
                    0.0
                };
                let b = &mut m.bounds[j];
                match kind {
                    "UP" => {
                        if v < 0.0 && b.0 == 0.0 {
                            log::warn!("line {line_no}: negative upper bound on '{col}' frees its lower bound");
                            b.0 = f64::NEG_INFINITY;
                        }
                        b.1 = v;
                    }
                    "LO" => b.0 = v,
                    "FX" => *b = (v, v),
                    "FR" => *b = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = f64::INFINITY,
                    _ => unreachable!(),
                }
            }
        }
    }
    if !saw_rows {
        return Err(IoError::Parse {
            line: text.lines().count(),
            msg: "missing ROWS section".into(),
        });
    }
    if m.objective_name.is_empty() {
        return Err(IoError::Parse {
            line: text.lines().count(),
            msg: "no objective (N) row".into(),
        });
    }
    Ok(m)
}

fn parse_num(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("'{s}' is not a finite number"))
}

fn parse_sense(s: &str) -> Result<bool, String> {
    match s {
        "MAX" | "MAXIMIZE" => Ok(true),
        "MIN" | "MINIMIZE" => Ok(false),
        other => Err(format!("unknown objective sense '{other}'")),
    }
}

pub fn normalize(m: &MpsModel) -> NamedLp {
    let n = m.columns.len();
    let mut dense = Matrix::zeros(m.rows.len(), n);
    let mut c = vec![0.0; n];
    for &(row, j, v) in &m.entries {
        match row {
            Some(i) => dense[(i, j)] += v,
            None => c[j] += v,
        }
    }
    let mut offset = -m.objective_rhs;
    if m.maximize {
        c.iter_mut().for_each(|v| *v = -*v);
        offset = -offset;
    }

    let mut a = Matrix::zeros(0, n);
    let mut b = Vec::new();
    let mut rows = Vec::new();
    for (i, (name, sense)) in m.rows.iter().enumerate() {
        let signs: &[f64] = match sense {
            RowSense::Le => &[1.0],
            RowSense::Ge => &[-1.0],
            RowSense::Eq => &[1.0, -1.0],
        };
        for &s in signs {
            let r: Vec<f64> = dense.row(i).iter().map(|v| s * v).collect();
            a.push_row(&r);
            b.push(s * m.rhs[i]);
            rows.push(RowOrigin::Constraint {
                name: name.clone(),
                sign: s,
            });
        }
    }
    let mut bounds = Vec::with_capacity(n);
    for (j, &(lo, hi)) in m.bounds.iter().enumerate() {
        bounds.push(if lo == 0.0 {
            VarBound::NonNegative
        } else {
            VarBound::Free
        });
        let mut unit = vec![0.0; n];
        if lo != 0.0 && lo.is_finite() {
            unit[j] = -1.0;
            a.push_row(&unit);
            b.push(-lo);
            rows.push(RowOrigin::Bound {
                column: m.columns[j].clone(),
            });
        }
        if hi.is_finite() {
            unit[j] = 1.0;
            a.push_row(&unit);
            b.push(hi);
            rows.push(RowOrigin::Bound {
                column: m.columns[j].clone(),
            });
        }
    }
    NamedLp {
        name: m.name.clone(),
        lp: LinearProgram {
            c,
            a,
            b,
            bounds,
            offset,
        },
        rows,
        columns: m.columns.clone(),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes `m` back as free-format MPS.
pub fn emit_mps(m: &MpsModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", m.name);
    if m.maximize {
        let _ = writeln!(out, "OBJSENSE\n    MAX");
    }
    let _ = writeln!(out, "ROWS\n N  {}", m.objective_name);
    for (name, sense) in &m.rows {
        let _ = writeln!(out, " {}  {}", sense.code(), name);
    }
    let _ = writeln!(out, "COLUMNS");
    for (j, col) in m.columns.iter().enumerate() {
        for &(row, _, v) in m.entries.iter().filter(|e| e.1 == j) {
            let rname = match row {
                Some(i) => &m.rows[i].0,
                None => &m.objective_name,
            };
            let _ = writeln!(out, "    {col}  {rname}  {}", num(v));
        }
    }
    let _ = writeln!(out, "RHS");
    if m.objective_rhs != 0.0 {
        let _ = writeln!(out, "    RHS  {}  {}", m.objective_name, num(m.objective_rhs));
    }
    for ((name, _), v) in m.rows.iter().zip(&m.rhs) {
        if *v != 0.0 {
            let _ = writeln!(out, "    RHS  {name}  {}", num(*v));
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for (col, &(lo, hi)) in m.columns.iter().zip(&m.bounds) {
        match (lo, hi) {
            (l, h) if l == 0.0 && h == f64::INFINITY => {}
            (l, h) if l == f64::NEG_INFINITY && h == f64::INFINITY => {
                let _ = writeln!(out, " FR BND  {col}");
            }
            (l, h) if l == h => {
                let _ = writeln!(out, " FX BND  {col}  {}", num(l));
            }
            (l, h) => {
                if l == f64::NEG_INFINITY {
                    let _ = writeln!(out, " MI BND  {col}");
                } else if l != 0.0 {
                    let _ = writeln!(out, " LO BND  {col}  {}", num(l));
                }
                if h.is_finite() {
                    let _ = writeln!(out, " UP BND  {col}  {}", num(h));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}
