pub mod cli;
pub mod domain;
pub mod eplocate;
pub mod lattice;
pub mod polyalg;
pub mod secular;
pub mod spectra;
