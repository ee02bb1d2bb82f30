pub mod bench;
pub mod data;
pub mod diagnostics;
pub mod linalg;
pub mod oracle;
pub mod solvers;
