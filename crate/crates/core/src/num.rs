//! Scalar abstraction shared by every solver in the crate.

use std::fmt::{self, Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the game solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Slack allowed when checking that a probability vector sums to one.
    const SIMPLEX_TOL: f64;
    /// Pivot threshold of the simplex tableau (entries are shifted to `[1, ..]`).
    const PIVOT_EPS: f64;

    /// Converts an `f64` literal. Every literal used by the crate is
    /// representable (possibly rounded) in both supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts to every supported scalar")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }
}

impl Scalar for f32 {
    const SIMPLEX_TOL: f64 = 1e-5;
    const PIVOT_EPS: f64 = 1e-6;
}

impl Scalar for f64 {
    const SIMPLEX_TOL: f64 = 1e-12;
    const PIVOT_EPS: f64 = 1e-12;
}

/// Neumaier-compensated running sum.
///
/// Trajectories accumulate a few hundred thousand stage terms; plain
/// summation drifts by `n * eps`, which is visible at the 1e-12 level.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// A nonnegative real extended with `+∞`.
///
/// Multiplication follows the measure-theoretic convention `∞·0 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> Extended<T> {
    pub fn finite(x: T) -> Self {
        Extended::Finite(x)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinity)
    }

    pub fn as_finite(&self) -> Option<T> {
        match *self {
            Extended::Finite(x) => Some(x),
            Extended::Infinity => None,
        }
    }

    /// `self · x` for `x ≥ 0`, with `∞·0 = 0`.
    pub fn scale(&self, x: T) -> Extended<T> {
        match *self {
            Extended::Finite(a) => Extended::Finite(a * x),
            Extended::Infinity if x == T::zero() => Extended::Finite(T::zero()),
            Extended::Infinity => Extended::Infinity,
        }
    }

    pub fn add(&self, other: Extended<T>) -> Extended<T> {
        match (*self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinity,
        }
    }

    /// Lossy conversion where `∞` maps to the scalar infinity.
    pub fn to_scalar(&self) -> T {
        match *self {
            Extended::Finite(a) => a,
            Extended::Infinity => T::infinity(),
        }
    }
}

impl<T: Display> Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => Display::fmt(x, f),
            Extended::Infinity => f.write_str("inf"),
        }
    }
}

/// Median of three numbers (infinities allowed, NaN not).
pub fn median3<T: Scalar>(a: T, b: T, c: T) -> T {
    a.max(b).min(a.min(b).max(c))
}
