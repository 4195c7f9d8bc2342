pub mod bench;
pub mod campaign;
pub mod run;
pub mod shape;
