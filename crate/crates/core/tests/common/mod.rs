//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

pub mod allen;
pub mod enumerate;
pub mod gen;
pub mod rewriting;
