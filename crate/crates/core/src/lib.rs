pub mod model;
pub mod checker;
pub mod gallery;
pub mod synth;
pub mod procdsl;
pub mod refute;
pub mod sim;
pub mod lggscan;
