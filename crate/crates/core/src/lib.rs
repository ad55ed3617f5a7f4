pub mod backend;
pub mod codebleu;
pub mod codenorm;
pub mod corpus;
pub mod evaluator;
pub mod io;
pub mod java;
pub mod prompt;
pub mod synth;
