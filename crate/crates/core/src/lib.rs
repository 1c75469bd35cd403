//! Reference extraction, parsing and linking for GOST-style Russian
//! scientific papers.
//!
//! The pieces, in data-flow order: [`docingest`] turns a page/item dump into
//! one text and finds the reference list, [`ref_parser`] labels each entry
//! with a trained [`labeler::Model`] and pulls out author, title and year,
//! [`intext`] finds bracketed citations, [`linker`] matches references to a
//! metadata collection, and [`serialize`] writes the per-document files.
//! [`pipeline`] strings them together.

pub mod config;
pub mod docingest;
pub mod features;
pub mod intext;
pub mod labeler;
pub mod lexicons;
pub mod linker;
pub mod normalize;
pub mod pipeline;
pub mod ref_parser;
pub mod serialize;
pub mod training_data;
mod xml;

pub use config::Config;
pub use docingest::{DocIngestError, DocumentText, PageItem, RawEntry, ReferenceSection};
pub use features::{FeatureContext, FeatureVector, YearRange};
pub use intext::{FrequencyBin, InTextRef};
pub use labeler::{FieldReport, Model, TrainConfig};
pub use lexicons::Lexicons;
pub use linker::{Collection, Link, LinkKind, LinkRecord, MetadataRecord, Registry};
pub use normalize::{HomoglyphTable, ScriptClass, Token};
pub use pipeline::{Pipeline, Stage, StageError};
pub use ref_parser::ParsedReference;
pub use serialize::{CitationDocument, DocumentId};
pub use training_data::{Field, Label, LabeledSequence};
