pub mod expr;
pub mod parser;
pub mod tensor;
pub mod fixtures;
pub mod report;
pub mod riemann;
pub mod projective;
pub mod fieldeq;
