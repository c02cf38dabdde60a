//! Process-level experiments built on the samplers.

pub mod lowtail;
pub mod limits;
pub mod lishao;
pub mod slepian;
