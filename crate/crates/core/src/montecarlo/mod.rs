pub mod experiments;
pub mod haar;
pub mod norm;
pub mod projector;
pub mod tensor;
pub mod weyl;
