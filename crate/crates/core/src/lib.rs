#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod geometry;
pub mod perception;
pub mod pose;
pub mod scene;
pub mod route;
pub mod exec;
pub mod pipeline;
pub mod replay;
