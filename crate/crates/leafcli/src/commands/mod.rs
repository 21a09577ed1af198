pub mod embed;
pub mod eval;
pub mod predict;
pub mod synth;
pub mod train;
