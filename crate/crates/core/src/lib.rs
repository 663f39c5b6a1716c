pub mod numkit;
pub mod solver;
pub mod stability;
pub mod system;
