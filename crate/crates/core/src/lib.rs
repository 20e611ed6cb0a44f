//! Mining, prompting and evaluation toolkit for domain-specific code generation.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] scans local repository checkouts and produces the function dataset,
//! * [`syntax`] parses Go and C++ sources and identifies library API calls,
//! * [`knowledge`] builds the API name to docstring knowledge base,
//! * [`prompts`] renders knowledge-enhanced prompts,
//! * [`cot`] decomposes functions into knowledge-annotated steps,
//! * [`generation`] drives completion backends with the plain, kg and CoT-PT strategies,
//! * [`metrics`] scores generated code with BLEU, CodeBLEU and Hit Ratio,
//! * [`pipeline`] wires the stages together behind a single JSON config.

pub mod corpus;
pub mod cot;
mod error;
pub mod generation;
pub mod knowledge;
mod language;
pub mod library;
pub mod metrics;
pub mod pipeline;
pub mod prompts;
mod span;
pub mod syntax;

pub use error::{Error, Result};
pub use language::SubjectLanguage;
pub use library::LibrarySpec;
pub use span::ByteSpan;
