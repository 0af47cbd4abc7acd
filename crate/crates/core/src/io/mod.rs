//! Text formats: QDIMACS with a parity-constraint extension, and relation
//! files for constraint languages.

mod qdimacs;
mod relations;

pub use qdimacs::{parse_qdimacs, parse_qdimacs_with, write_qdimacs, ParseOptions, Parsed, BACKDOOR_MARKER};
pub use relations::{parse_relations, write_relations, NamedRelation, RelationFile};
