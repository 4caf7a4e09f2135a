/// Coarse classification of failures, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input text.
    Parse,
    /// A precondition of an operation does not hold.
    Precondition,
    /// An exhaustive enumeration would exceed its configured cap.
    Cap,
}

pub trait Classify {
    fn class(&self) -> ErrorClass;
}
