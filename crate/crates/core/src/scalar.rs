//! Floating point abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};
use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumCast
    + SampleUniform
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Largest admissible gap between the running pseudo-regret and the
    /// pull-count decomposition before a run is rejected.
    fn decomposition_tolerance() -> Self;

    /// One draw from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the half-open unit interval `[0, 1)`.
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn from_f64_lossy(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    fn from_count(n: u64) -> Self;
}

macro_rules! impl_scalar {
    ($f:ty, $tol:expr) => {
        impl Scalar for $f {
            #[inline]
            fn decomposition_tolerance() -> Self {
                $tol
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(StandardNormal)
            }

            #[inline]
            fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$f>()
            }

            #[inline]
            fn from_f64_lossy(x: f64) -> Self {
                x as $f
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            #[inline]
            fn from_count(n: u64) -> Self {
                n as $f
            }
        }
    };
}

impl_scalar!(f32, 1e-2);
impl_scalar!(f64, 1e-9);

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum<F> {
    sum: F,
    compensation: F,
}

impl<F: Scalar> CompensatedSum<F> {
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            compensation: F::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> F {
        self.sum + self.compensation
    }
}
