//! Zero-shot trajectory generation harness.
//!
//! A chat model receives one task-agnostic prompt plus a task instruction and
//! answers with either Python code that drives a small robot API or an explicit
//! list of end-effector poses. This crate holds everything around that model:
//!
//! - [`geometry`]: poses, camera deprojection, oriented box fitting, densification
//! - [`sim`]: a deterministic kinematic tabletop world with a detection oracle
//! - [`chat`]: live, replay and scripted chat backends plus transcripts
//! - [`parser`]: code-fence and tagged-trajectory parsing, the correction loop
//! - [`sandbox`]: the child-process gateway that serves robot API calls
//! - [`prompt`]: main prompt assembly with ablation flags, verdict and replan prompts
//! - [`orchestrator`]: the episode loop with success detection and re-planning
//! - [`bench`]: task catalog, success checkers, benchmark and ablation runners

pub mod bench;
pub mod chat;
pub mod geometry;
pub mod orchestrator;
pub mod parser;
pub mod prompt;
pub mod sandbox;
pub mod sim;
