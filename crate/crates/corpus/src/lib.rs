//! Seeded term and database generation, counterexample shrinking and the
//! exhaustive graph-lemma suite.

pub mod fixture;
pub mod gen;
pub mod lemmas;
pub mod shrink;

pub use gen::{corpus_signature, generate_corpus, generate_store, CorpusSpec, Shape};
pub use lemmas::{check_lemmas, LemmaReport};
pub use shrink::shrink;
