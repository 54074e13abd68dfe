//! Sketch-driven data science over spreadsheet workbooks.
//!
//! A workbook plus a colored sketch is mapped to a task (wrangling, selection,
//! clustering, constraint discovery, prediction, auto-completion); each task
//! returns a new workbook and sketch.

pub mod autocomplete;
pub mod cluster;
pub mod constraints;
pub mod engine;
pub mod error;
pub mod io;
pub mod par;
pub mod predict;
pub mod select;
pub mod sheet;
pub mod wrangle;

pub use error::{Error, Result};
pub use sheet::{CellRef, CellValue, Coloring, ForeignKey, Role, Sketch, Table, TypeTag, Workbook};
