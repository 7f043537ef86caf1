pub mod modes_cmd;
pub mod report;
pub mod simulate;
pub mod sweep;
