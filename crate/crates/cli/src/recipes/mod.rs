pub mod lyapunov;
pub mod memory;
pub mod netgen;
pub mod profile;
pub mod sections;
pub mod sweep;
