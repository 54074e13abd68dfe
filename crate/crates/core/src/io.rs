//! Canonical JSON workbook files and CSV directory import.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sheet::{infer_cell_value, CellRef, CellValue, Coloring, ForeignKey, Role, Sketch, Table, Workbook};

/// A workbook together with its sketch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub workbook: Workbook,
    pub sketch: Sketch,
}

#[derive(Serialize, Deserialize)]
struct FileTable {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<CellValue>>,
}

#[derive(Serialize, Deserialize, Default)]
struct FileSchema {
    #[serde(default)]
    foreign_keys: Vec<ForeignKey>,
}

/// 1-based cell address as written in files and API payloads.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FileCellRef {
    pub table: String,
    pub row: usize,
    pub col: usize,
}

impl FileCellRef {
    pub fn to_internal(&self) -> Result<CellRef> {
        if self.row == 0 || self.col == 0 {
            return Err(Error::InvalidSketch(format!(
                "cell {}[{}, {}]: rows and columns are 1-based",
                self.table, self.row, self.col
            )));
        }
        Ok(CellRef::new(self.table.clone(), self.row - 1, self.col - 1))
    }
}

impl From<&CellRef> for FileCellRef {
    fn from(c: &CellRef) -> Self {
        FileCellRef { table: c.table.clone(), row: c.row + 1, col: c.col + 1 }
    }
}

#[derive(Serialize, Deserialize)]
struct FileColoring {
    color: String,
    role: Role,
    cells: Vec<FileCellRef>,
}

/// Serialized sketch.
#[derive(Serialize, Deserialize, Default)]
pub struct FileSketch {
    #[serde(default)]
    colorings: Vec<FileColoring>,
    #[serde(default)]
    machine_generated: Vec<FileCellRef>,
}

#[derive(Serialize, Deserialize)]
struct FileDocument {
    tables: Vec<FileTable>,
    #[serde(default)]
    schema: FileSchema,
    #[serde(default)]
    sketch: FileSketch,
}

impl FileSketch {
    pub fn from_sketch(s: &Sketch) -> FileSketch {
        FileSketch {
            colorings: s
                .colorings
                .iter()
                .map(|c| FileColoring {
                    color: c.color.clone(),
                    role: c.role,
                    cells: c.cells.iter().map(FileCellRef::from).collect(),
                })
                .collect(),
            machine_generated: s.machine_generated.iter().map(FileCellRef::from).collect(),
        }
    }

    pub fn to_sketch(&self) -> Result<Sketch> {
        let colorings = self
            .colorings
            .iter()
            .map(|c| {
                let cells = c.cells.iter().map(FileCellRef::to_internal).collect::<Result<BTreeSet<_>>>()?;
                Ok(Coloring { color: c.color.clone(), role: c.role, cells })
            })
            .collect::<Result<Vec<_>>>()?;
        let machine_generated = self.machine_generated.iter().map(FileCellRef::to_internal).collect::<Result<_>>()?;
        Ok(Sketch { colorings, machine_generated })
    }
}

fn to_file(doc: &Document) -> FileDocument {
    FileDocument {
        tables: doc
            .workbook
            .tables()
            .iter()
            .map(|t| FileTable { name: t.name().to_string(), header: t.header().to_vec(), rows: t.rows().to_vec() })
            .collect(),
        schema: FileSchema { foreign_keys: doc.workbook.schema().to_vec() },
        sketch: FileSketch::from_sketch(&doc.sketch),
    }
}

fn from_file(f: FileDocument) -> Result<Document> {
    let tables = f
        .tables
        .into_iter()
        .map(|t| Table::new(t.name, t.header, t.rows))
        .collect::<Result<Vec<_>>>()?;
    let workbook = Workbook::new(tables, f.schema.foreign_keys)?;
    let sketch = f.sketch.to_sketch()?;
    sketch.validate(&workbook)?;
    Ok(Document { workbook, sketch })
}

/// Canonical serialization: pretty JSON, sorted cell sets, trailing newline.
pub fn to_json_string(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(doc)).expect("workbook serializes");
    s.push('\n');
    s
}

pub fn to_json_value(doc: &Document) -> serde_json::Value {
    serde_json::to_value(to_file(doc)).expect("workbook serializes")
}

pub fn from_json_str(s: &str) -> Result<Document> {
    from_file(serde_json::from_str(s)?)
}

pub fn from_json_value(v: serde_json::Value) -> Result<Document> {
    from_file(serde_json::from_value(v)?)
}

pub fn sketch_from_json_str(s: &str) -> Result<Sketch> {
    serde_json::from_str::<FileSketch>(s)?.to_sketch()
}

pub fn sketch_from_json_value(v: serde_json::Value) -> Result<Sketch> {
    serde_json::from_value::<FileSketch>(v)?.to_sketch()
}

pub fn sketch_to_json_value(s: &Sketch) -> serde_json::Value {
    serde_json::to_value(FileSketch::from_sketch(s)).expect("sketch serializes")
}

/// Loads a `.vsw.json` file or a directory of CSV files.
pub fn load(path: &Path) -> Result<Document> {
    if path.is_dir() {
        let workbook = import_csv_dir(path)?;
        Ok(Document { workbook, sketch: Sketch::default() })
    } else {
        from_json_str(&fs::read_to_string(path)?)
    }
}

pub fn import_workbook(path: &Path) -> Result<Workbook> {
    Ok(load(path)?.workbook)
}

pub fn export_workbook(wb: &Workbook, sketch: &Sketch, path: &Path) -> Result<()> {
    sketch.validate(wb)?;
    let doc = Document { workbook: wb.clone(), sketch: sketch.clone() };
    fs::write(path, to_json_string(&doc))?;
    Ok(())
}

fn import_csv_dir(dir: &Path) -> Result<Workbook> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    let mut tables = Vec::new();
    for p in &files {
        let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if tables.iter().any(|t: &Table| t.name() == name) {
            return Err(Error::Conflict(format!("duplicate table name '{name}' in {}", dir.display())));
        }
        tables.push(read_csv(p, name)?);
    }
    let schema_path = dir.join("schema.json");
    let schema = if schema_path.is_file() {
        serde_json::from_str::<FileSchema>(&fs::read_to_string(&schema_path)?)?.foreign_keys
    } else {
        Vec::new()
    };
    Workbook::new(tables, schema)
}

fn read_csv(path: &Path, name: String) -> Result<Table> {
    let file = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_path(path)?;
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        match &header {
            None => header = Some(rec.iter().map(|s| s.trim().to_string()).collect()),
            Some(h) => {
                if rec.len() != h.len() {
                    return Err(Error::Structural(format!(
                        "{file} row {}: {} fields, header has {}",
                        i + 1,
                        rec.len(),
                        h.len()
                    )));
                }
                rows.push(rec.iter().map(infer_cell_value).collect());
            }
        }
    }
    Table::new(name, header.unwrap_or_default(), rows)
}
