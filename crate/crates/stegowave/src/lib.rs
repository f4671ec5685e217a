//! File formats, parameter sweeps and the command-line front end for
//! [`stegowave_core`].

pub mod cli;
pub mod pgm;
pub mod sweep;
