//! The reduction from Steiner tree with costs in {1, 2}: gadget
//! construction, structured patterns and Steiner tree extraction.

pub mod gadget;
pub mod structure;

pub use gadget::{build_gadget, hardness_ratio, steiner_optimum, Gadget, St12Instance, STEINER_LIMIT};
pub use structure::{extract_best_steiner, is_structured, structure_pattern, SteinerExtraction, SubsequenceRatio};
