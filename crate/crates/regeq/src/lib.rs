pub mod automata;
pub mod coercions;
pub mod derivatives;
pub mod equations;
pub mod parse_trees;
pub mod reg_ops;
pub mod regex_core;
pub mod tooling;
