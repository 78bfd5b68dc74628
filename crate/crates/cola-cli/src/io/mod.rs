pub mod cache;
pub mod checkpoint;
pub mod rounds;
pub mod tables;
pub mod text;
