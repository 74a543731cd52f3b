pub mod config;
pub mod constants;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod hydro1d;
pub mod hydro2d;
pub mod init;
pub mod kernel;
pub mod pairwise;
pub mod particles;
pub mod potential;
pub mod presets;
pub mod profiles;
pub mod rk4;
pub mod run;
pub mod sweep;
