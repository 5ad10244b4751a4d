//! Cooperative multi-UAV aerial base-station simulator and trainer.
//!
//! The crate is organised bottom-up:
//!
//! - [`radio`]: 60 GHz link budget, antenna pattern, interference, Shannon
//!   capacity, MCS lookup, QoS and coverage radius.
//! - [`energy`]: rotorcraft hover/cruise power and the energy queue.
//! - [`world`]: the multi-agent environment (kinematics, association,
//!   observations, malfunctions, rewards).
//! - [`nn`]: dense networks with exact backprop, Adam, Xavier init,
//!   checkpoints and FLOP accounting.
//! - [`marl`]: DNN and CommNet policies, centralized critic, replay buffer
//!   and the actor-critic training loop.
//! - [`harness`]: scenario configs, training/evaluation runs, method
//!   comparison, metrics streams and figure-data export.

pub mod energy;
pub mod error;
pub mod geom;
pub mod harness;
pub mod marl;
pub mod nn;
pub mod radio;
pub mod rng;
pub mod world;

pub use error::{Error, Result};
pub use geom::Vec3;
