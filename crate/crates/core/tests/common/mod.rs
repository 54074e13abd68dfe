#![allow(dead_code)]

use std::path::PathBuf;

use chromasheet::io::{self, Document};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> Document {
    io::load(&fixture_path(name)).expect("fixture loads")
}

pub mod clustering;
pub mod discovery;
pub mod oracle;
pub mod relational;
pub mod wrangling;
