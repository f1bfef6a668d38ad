pub mod bench;
pub mod detect;
pub mod eval;
pub mod pair;
pub mod synth;
