pub mod bounds;
pub mod gen;
pub mod oracle;
pub mod simulate;
pub mod sweep;
