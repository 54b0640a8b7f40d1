//! Text-to-traffic-scenario toolchain.
//!
//! A natural-language scenario description flows through the stages below,
//! each in its own module:
//!
//! 1. [`filter`] rejects off-topic or adversarial text and rewrites words the
//!    simulator vocabulary ([`lexicon`]) does not support.
//! 2. [`prompt`] pairs the filtered description with in-context exemplars.
//! 3. [`llm`] sends the prompt to a generation backend (remote HTTP or an
//!    offline template synthesizer).
//! 4. [`validator`] extracts the configuration from the response, repairs
//!    unsupported terms and guarantees it parses as a [`schema::ScenarioConfig`].
//! 5. [`sim`] runs the configuration in a deterministic kinematic simulator.
//! 6. [`dataset`] collects 8-attribute trajectory records; [`metrics`]
//!    scores predictions with per-class ADE/FDE.
//!
//! [`pipeline`] wires the stages together for batch runs.

pub mod dataset;
pub mod filter;
pub mod lexicon;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod prompt;
pub mod rng;
pub mod schema;
pub mod sim;
pub mod validator;

pub use dataset::{TrajectoryDataset, TrajectoryRecord};
pub use filter::{FilteredDescription, ScenarioDescription};
pub use lexicon::Lexicon;
pub use schema::{ActorClass, ScenarioConfig};
pub use sim::SimulationTrace;
