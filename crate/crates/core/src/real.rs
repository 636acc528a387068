use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::Float;
use rustfft::FftNum;
use serde::{Deserialize, Serialize};

/// Floating-point precision of a compute path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            other => Err(format!("unknown precision `{other}` (expected f32 or f64)")),
        }
    }
}

impl Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scalar type of the iteration engines. Implemented for `f32` and `f64`.
pub trait Real: FftNum + Float + Sum + Default + Display + Debug + Send + Sync + 'static {
    const PRECISION: Precision;

    /// Multiplier applied to the f64 tolerance contracts on this path.
    const TOLERANCE_SCALE: f64;

    fn of(x: f64) -> Self;
    fn f64(self) -> f64;

    /// Scales a tolerance stated for f64 to this precision.
    fn tol(base: f64) -> f64 {
        base * Self::TOLERANCE_SCALE
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::F64;
    const TOLERANCE_SCALE: f64 = 1.0;

    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const PRECISION: Precision = Precision::F32;
    const TOLERANCE_SCALE: f64 = 1e4;

    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn f64(self) -> f64 {
        self as f64
    }
}
