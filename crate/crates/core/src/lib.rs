pub mod polyring;
pub mod levi;
pub mod exceptional;
pub mod structure;
pub mod bump;
pub mod certify;
pub mod fixtures;
pub mod report;
pub mod cli;
