//! Command-line front end and tuning service for the inkshade renderer.

pub mod commands;
pub mod scene;
pub mod server;
