//! Custom-precision floating-point arithmetic as bitslice-parallel programs.
//!
//! The flow: [`circuit`] builds gate netlists for FP multipliers and adders,
//! [`netlist`] optimizes and verifies them, [`cells`] maps them onto cell
//! libraries that model a CPU's bitwise instructions, [`codegen`] lowers the
//! mapped netlists to straight-line programs, and [`bitslice`] runs those
//! programs over wide words. [`conv`] puts the pieces together in a
//! convolution layer. [`fmt`] holds the exact scalar reference for all of it.

pub mod fmt;
pub mod logic;
pub mod netlist;
pub mod cells;
pub mod circuit;
pub mod codegen;
pub mod bitslice;
pub mod conv;
