pub mod formats;
pub mod harness;
pub mod manifest;
