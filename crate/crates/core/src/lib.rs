pub mod chambers;
pub mod diagram;
pub mod enumerate;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod invariants;
pub mod oracle;
pub mod pieces;
pub mod poly;
pub mod verify;

pub use error::{BudgetKind, Error, Result};
