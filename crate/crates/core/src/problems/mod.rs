//! Ready-made composite problems.

pub mod additive;
pub mod killersudoku;
pub mod ttp;
