//! Nonconforming P1 macro-element discretisation of elliptic interface problems on
//! interface-fitted meshes generated from a level set.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod element;
pub mod geometry;
pub mod mesh;
pub mod problems;
pub mod solver;
