//! Table wrangling: a small transform language with provenance, and
//! sketch-driven program synthesis.

mod grid;
mod search;
mod sketch;

pub use grid::{apply_program, apply_transform, Origin, PCell, ProvenancedGrid, Transform};
pub use search::{all_transforms, pivot_cues, propose, synthesize_from_grid, synthesize_program, Synthesis, WrangleConfig};
pub use sketch::{check_sketch, score_candidate, SketchCheck, WranglingSketch};
