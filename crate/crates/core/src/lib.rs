//! Decision procedures for SROIQ(C), the description logic SROIQ extended with
//! qualitative constraint networks, plus grounded circumscription on top.

pub mod kb_model;
pub mod kb_text;
pub mod constraint;
pub mod preprocess;
pub mod tableau;
pub mod circumscription;
pub mod query;
pub mod batch;
pub mod emit;
