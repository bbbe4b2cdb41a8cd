//! Multi-agent household question answering at desk scale.
//!
//! K independent agents explore a household graph, each building a partial
//! observation dictionary, then answer the same bank of binary "is there an
//! X in the Y?" queries. Three aggregation strategies turn the K answers
//! into one: majority vote, a turn-based debate, and a trained central
//! answer model (CAM) over the `[object, room, s_1..s_K]` feature vector.
//! Metrics, permutation feature importance, and a malicious-agent ablation
//! round out the toolkit.
//!
//! The pipeline, end to end:
//!
//! ```text
//! env (house graph) -> explore (per-agent observations)
//!                   -> queries (balanced yes/no bank + split)
//!                   -> answer (K independent answer vectors)
//!                   -> aggregate (majority vote | debate | CAM)
//!                   -> analysis (accuracy, agreement, PFI, tree export)
//!                   -> harness  (multi-seed experiments, CSV/JSON reports)
//! ```
//!
//! Every step is seeded and replayable; no network access is needed unless
//! a live chat backend is plugged in via [`llm::HttpChatClient`].
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `houseqa` binary for the file-based command-line pipeline.

pub mod aggregate;
pub mod analysis;
pub mod answer;
pub mod env;
pub mod error;
pub mod explore;
pub mod harness;
pub mod learners;
pub mod llm;
pub mod percept;
pub mod prompts;
pub mod queries;
pub mod rng;

pub use error::{Error, Result};
