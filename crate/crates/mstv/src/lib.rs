//! File formats, instance generators, benchmark sweeps and the command line
//! front end for the `mstv-core` simulator.

pub mod bench;
pub mod cli;
pub mod generate;
pub mod io;
pub mod report;
