pub mod camera;
pub mod crop;
pub mod idw;
