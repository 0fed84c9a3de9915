use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero input where a unit is required")]
    ZeroInput,
    #[error("ramified at {0}")]
    RamifiedAt(String),
    #[error("not regular at {0}")]
    NotRegular(String),
    #[error("not a uniformizer at {0}")]
    NotUniformizer(String),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("degree {0} outside the supported range -2..=2")]
    DegreeOutOfRange(i32),
    #[error("bound {bound} is smaller than the degree {needed} of a removed place")]
    BoundTooSmall { bound: u32, needed: u32 },
    #[error("place {0} lies in the removed set")]
    PlaceInD(String),
    #[error("bound mismatch: {0} vs {1}")]
    BoundMismatch(u32, u32),
    #[error("incompatible Milnor-Witt pair: {0}")]
    Incompatible(String),
    #[error("invalid field order {0}: need an odd prime power")]
    InvalidField(u64),
    #[error("field of order {0} exceeds the table limit")]
    FieldTooLarge(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by the zero polynomial")]
    DivisionByZero,
}
