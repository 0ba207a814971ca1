//! An interpreter for the ntcc calculus of timed concurrent constraint
//! processes, with a finite-domain store, a textual model language and a
//! Factor Oracle bridge for style-learning improvisation models.

pub mod dsl;
pub mod engine;
pub mod events;
pub mod models;
pub mod oracle;
pub mod store;
