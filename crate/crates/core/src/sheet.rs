//! Typed workbook and sketch model.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A single spreadsheet cell.
#[derive(Debug, Clone)]
pub enum CellValue {
    Number(f64),
    Text(String),
    Bool(bool),
    /// Structurally blank.
    Empty,
    /// Exists but unknown, written `?`.
    Missing,
}

impl CellValue {
    /// Builds a number, rejecting NaN and infinities.
    pub fn number(x: f64) -> Option<CellValue> {
        x.is_finite().then_some(CellValue::Number(if x == 0.0 { 0.0 } else { x }))
    }

    pub fn text(s: impl Into<String>) -> CellValue {
        CellValue::Text(s.into())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CellValue::Empty)
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, CellValue::Missing)
    }

    /// Neither Empty nor Missing.
    pub fn is_observed(&self) -> bool {
        !matches!(self, CellValue::Empty | CellValue::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            CellValue::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn type_tag(&self) -> Option<TypeTag> {
        match self {
            CellValue::Number(_) => Some(TypeTag::Numeric),
            CellValue::Text(_) => Some(TypeTag::Textual),
            CellValue::Bool(_) => Some(TypeTag::Boolean),
            CellValue::Empty | CellValue::Missing => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            CellValue::Empty => 0,
            CellValue::Missing => 1,
            CellValue::Bool(_) => 2,
            CellValue::Number(_) => 3,
            CellValue::Text(_) => 4,
        }
    }
}

impl PartialEq for CellValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CellValue {}

impl PartialOrd for CellValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CellValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (CellValue::Number(a), CellValue::Number(b)) => a.total_cmp(b),
            (CellValue::Text(a), CellValue::Text(b)) => a.cmp(b),
            (CellValue::Bool(a), CellValue::Bool(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for CellValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            CellValue::Number(x) => x.to_bits().hash(state),
            CellValue::Text(s) => s.hash(state),
            CellValue::Bool(b) => b.hash(state),
            _ => {}
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Number(x) => write!(f, "{}", format_number(*x)),
            CellValue::Text(s) => f.write_str(s),
            CellValue::Bool(b) => write!(f, "{b}"),
            CellValue::Empty => Ok(()),
            CellValue::Missing => f.write_str("?"),
        }
    }
}

/// Integral values print without a fractional part.
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl Serialize for CellValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CellValue::Number(x) if x.fract() == 0.0 && x.abs() < 9.0e15 => s.serialize_i64(*x as i64),
            CellValue::Number(x) => s.serialize_f64(*x),
            CellValue::Text(t) => s.serialize_str(t),
            CellValue::Bool(b) => s.serialize_bool(*b),
            CellValue::Empty => s.serialize_none(),
            CellValue::Missing => s.serialize_str("?"),
        }
    }
}

impl<'de> Deserialize<'de> for CellValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = CellValue;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, string, boolean or null")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> std::result::Result<CellValue, E> {
                CellValue::number(x).ok_or_else(|| E::custom("non-finite number"))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> std::result::Result<CellValue, E> {
                Ok(CellValue::Number(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> std::result::Result<CellValue, E> {
                Ok(CellValue::Number(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<CellValue, E> {
                Ok(if s == "?" { CellValue::Missing } else { CellValue::Text(s.to_string()) })
            }
            fn visit_bool<E: de::Error>(self, b: bool) -> std::result::Result<CellValue, E> {
                Ok(CellValue::Bool(b))
            }
            fn visit_unit<E: de::Error>(self) -> std::result::Result<CellValue, E> {
                Ok(CellValue::Empty)
            }
            fn visit_none<E: de::Error>(self) -> std::result::Result<CellValue, E> {
                Ok(CellValue::Empty)
            }
        }
        d.deserialize_any(V)
    }
}

/// Classifies a raw string: `?` is Missing, blank is Empty, then number, boolean, text.
pub fn infer_cell_value(raw: &str) -> CellValue {
    let s = raw.trim();
    if s == "?" {
        return CellValue::Missing;
    }
    if s.is_empty() {
        return CellValue::Empty;
    }
    if is_decimal(s) {
        if let Some(v) = s.parse::<f64>().ok().and_then(CellValue::number) {
            return v;
        }
    }
    if s.eq_ignore_ascii_case("true") {
        return CellValue::Bool(true);
    }
    if s.eq_ignore_ascii_case("false") {
        return CellValue::Bool(false);
    }
    CellValue::Text(s.to_string())
}

fn is_decimal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

/// Inferred type of a column or vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeTag {
    Numeric,
    Textual,
    Boolean,
    Mixed,
}

impl TypeTag {
    /// Type of a cell sequence, ignoring Empty and Missing; vacuous sequences are textual.
    pub fn infer<'a>(cells: impl IntoIterator<Item = &'a CellValue>) -> TypeTag {
        let mut seen: Option<TypeTag> = None;
        for c in cells {
            if let Some(t) = c.type_tag() {
                match seen {
                    None => seen = Some(t),
                    Some(s) if s != t => return TypeTag::Mixed,
                    _ => {}
                }
            }
        }
        seen.unwrap_or(TypeTag::Textual)
    }
}

/// A named rectangular grid with a header.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<CellValue>>,
    col_types: Vec<TypeTag>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<String>, rows: Vec<Vec<CellValue>>) -> Result<Table> {
        let name = name.into();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != header.len() {
                return Err(Error::Structural(format!(
                    "table '{name}' row {} has {} cells, header has {}",
                    i + 1,
                    r.len(),
                    header.len()
                )));
            }
        }
        let col_types = (0..header.len())
            .map(|c| TypeTag::infer(rows.iter().map(|r| &r[c])))
            .collect();
        Ok(Table { name, header, rows, col_types })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<CellValue>] {
        &self.rows
    }

    pub fn col_types(&self) -> &[TypeTag] {
        &self.col_types
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.header.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&CellValue> {
        self.rows.get(row).and_then(|r| r.get(col))
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &CellValue> + '_ {
        self.rows.iter().map(move |r| &r[col])
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Table {
        Table { name: name.into(), ..self.clone() }
    }

    /// Copy with one cell replaced.
    pub fn with_cell(&self, row: usize, col: usize, v: CellValue) -> Result<Table> {
        if row >= self.n_rows() || col >= self.n_cols() {
            return Err(Error::Index(format!("cell ({}, {}) outside table '{}'", row + 1, col + 1, self.name)));
        }
        let mut t = self.clone();
        t.rows[row][col] = v;
        t.col_types[col] = TypeTag::infer(t.rows.iter().map(|r| &r[col]));
        Ok(t)
    }

    /// Copy with a column appended.
    pub fn with_column(&self, name: impl Into<String>, values: Vec<CellValue>) -> Result<Table> {
        if values.len() != self.n_rows() {
            return Err(Error::Structural(format!(
                "column has {} values, table '{}' has {} rows",
                values.len(),
                self.name,
                self.n_rows()
            )));
        }
        let mut header = self.header.clone();
        header.push(name.into());
        let rows = self
            .rows
            .iter()
            .zip(values)
            .map(|(r, v)| {
                let mut r = r.clone();
                r.push(v);
                r
            })
            .collect();
        Table::new(self.name.clone(), header, rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForeignKey {
    pub from_table: String,
    pub from_cols: Vec<String>,
    pub to_table: String,
    pub to_cols: Vec<String>,
}

/// Ordered tables plus foreign keys.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Workbook {
    tables: Vec<Table>,
    schema: Vec<ForeignKey>,
}

impl Workbook {
    pub fn new(tables: Vec<Table>, schema: Vec<ForeignKey>) -> Result<Workbook> {
        let mut names = BTreeSet::new();
        for t in &tables {
            if !names.insert(t.name()) {
                return Err(Error::Conflict(format!("duplicate table name '{}'", t.name())));
            }
        }
        let wb = Workbook { tables, schema };
        for fk in &wb.schema {
            if fk.from_cols.is_empty() || fk.from_cols.len() != fk.to_cols.len() {
                return Err(Error::Schema(format!(
                    "foreign key {} -> {} needs nonempty column lists of equal length",
                    fk.from_table, fk.to_table
                )));
            }
            for (tn, cols) in [(&fk.from_table, &fk.from_cols), (&fk.to_table, &fk.to_cols)] {
                let t = wb
                    .table(tn)
                    .ok_or_else(|| Error::Schema(format!("foreign key references unknown table '{tn}'")))?;
                for c in cols {
                    if t.col_index(c).is_none() {
                        return Err(Error::Schema(format!("foreign key references unknown column '{tn}.{c}'")));
                    }
                }
            }
        }
        Ok(wb)
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn schema(&self) -> &[ForeignKey] {
        &self.schema
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name() == name)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name() == name)
    }

    pub fn require_table(&self, name: &str) -> Result<&Table> {
        self.table(name).ok_or_else(|| Error::NotFound(format!("table '{name}'")))
    }

    pub fn cell(&self, r: &CellRef) -> Option<&CellValue> {
        self.table(&r.table).and_then(|t| t.cell(r.row, r.col))
    }

    /// Copy with the table of the same name replaced, or appended when absent.
    pub fn with_table(&self, table: Table) -> Workbook {
        let mut wb = self.clone();
        match wb.table_index(table.name()) {
            Some(i) => wb.tables[i] = table,
            None => wb.tables.push(table),
        }
        wb
    }
}

/// 0-based cell address.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellRef {
    pub table: String,
    pub row: usize,
    pub col: usize,
}

impl CellRef {
    pub fn new(table: impl Into<String>, row: usize, col: usize) -> CellRef {
        CellRef { table: table.into(), row, col }
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}, {}]", self.table, self.row + 1, self.col + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Group,
    Positive,
    Negative,
    Input,
    Target,
    Exclude,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Group => "group",
            Role::Positive => "positive",
            Role::Negative => "negative",
            Role::Input => "input",
            Role::Target => "target",
            Role::Exclude => "exclude",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    pub color: String,
    pub role: Role,
    pub cells: BTreeSet<CellRef>,
}

impl Coloring {
    pub fn new(color: impl Into<String>, role: Role, cells: impl IntoIterator<Item = CellRef>) -> Coloring {
        Coloring { color: color.into(), role, cells: cells.into_iter().collect() }
    }

    /// Distinct rows touched in `table`.
    pub fn rows_in(&self, table: &str) -> BTreeSet<usize> {
        self.cells.iter().filter(|c| c.table == table).map(|c| c.row).collect()
    }
}

/// Colorings over a workbook.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Sketch {
    pub colorings: Vec<Coloring>,
    pub machine_generated: BTreeSet<CellRef>,
}

impl Sketch {
    pub fn new(colorings: Vec<Coloring>) -> Sketch {
        Sketch { colorings, machine_generated: BTreeSet::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.colorings.iter().all(|c| c.cells.is_empty())
    }

    pub fn roles(&self) -> BTreeSet<Role> {
        self.colorings.iter().filter(|c| !c.cells.is_empty()).map(|c| c.role).collect()
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &Coloring> + '_ {
        self.colorings.iter().filter(move |c| c.role == role)
    }

    pub fn coloring_of(&self, cell: &CellRef) -> Option<&Coloring> {
        self.colorings.iter().find(|c| c.cells.contains(cell))
    }

    /// Checks that cells resolve, colors are exclusive and machine marks are colored.
    pub fn validate(&self, wb: &Workbook) -> Result<()> {
        let mut owner: BTreeMap<&CellRef, &str> = BTreeMap::new();
        let mut colors = BTreeSet::new();
        for c in &self.colorings {
            if !colors.insert(c.color.as_str()) {
                return Err(Error::InvalidSketch(format!("color '{}' declared twice", c.color)));
            }
            for cell in &c.cells {
                if wb.cell(cell).is_none() {
                    return Err(Error::InvalidSketch(format!("cell {cell} does not resolve")));
                }
                if let Some(prev) = owner.insert(cell, &c.color) {
                    return Err(Error::InvalidSketch(format!(
                        "cell {cell} carries two colors ('{prev}' and '{}')",
                        c.color
                    )));
                }
            }
        }
        if let Some(c) = self.machine_generated.iter().find(|c| !owner.contains_key(c)) {
            return Err(Error::InvalidSketch(format!("machine-generated cell {c} has no color")));
        }
        Ok(())
    }

    /// Rejects roles outside `allowed`.
    pub fn require_roles(&self, allowed: &[Role], what: &str) -> Result<()> {
        let bad: Vec<String> = self.roles().into_iter().filter(|r| !allowed.contains(r)).map(|r| r.to_string()).collect();
        if bad.is_empty() {
            Ok(())
        } else {
            let exp: Vec<String> = allowed.iter().map(|r| r.to_string()).collect();
            Err(Error::TaskRole(format!(
                "{what} accepts roles [{}], sketch uses [{}]",
                exp.join(", "),
                bad.join(", ")
            )))
        }
    }
}
