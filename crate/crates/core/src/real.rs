use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive};

/// Scalar type used by every solver in this crate.
///
/// All the math here is scalar-agnostic; `f64` is the type the default
/// tolerances are calibrated for, `f32` works at correspondingly looser
/// settings. Concrete aliases for the main types live at the crate root.
pub trait Real: Float + FromPrimitive + Debug + Display + LowerExp + Send + Sync + 'static {
    /// Shorthand for embedding `f64` literals (tolerances, tableau
    /// coefficients) into the working scalar type.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_convert() {
        assert_eq!(<f64 as Real>::c(0.25), 0.25);
        assert_eq!(<f32 as Real>::c(0.25), 0.25_f32);
        assert_eq!(1.5_f32.to_f64_lossy(), 1.5);
    }
}
