//! Discrete-tick simulation of the whole system: node mobility, ultrasonic
//! tracking, cell mapping, reporting-cell location management, and secured
//! link establishment through the ceiling backend.
//!
//! The simulation is single-threaded and fully deterministic: one logical
//! owner drives [`world::WorldState`] tick by tick, every module call is
//! synchronous, and all randomness flows from one seeded generator. Identical
//! (config, seed, script) inputs therefore produce byte-identical traces.

pub mod config;
pub mod event;
pub mod world;

pub use config::{load_config, load_script, LoadedScenario};
pub use event::{round_sig6, trace_to_jsonl, EventKind, TraceRecord};
pub use world::{
    run, MobileNode, RoomConfig, RunOutcome, ScriptedRequest, SimError, WorldState,
};
