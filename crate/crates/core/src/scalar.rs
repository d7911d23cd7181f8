use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field scalar used throughout: `f64` for the elliptic problems and
/// `Complex64` for the Helmholtz discretization.
pub trait Scalar:
    faer::traits::ComplexField<Real = f64>
    + Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    const ZERO: Self;
    const ONE: Self;
    const IS_COMPLEX: bool;

    fn from_re(x: f64) -> Self;
    fn conjugate(self) -> Self;
    fn real(self) -> f64;
    fn imag(self) -> f64;
    fn abs_sq(self) -> f64;
    fn to_c64(self) -> Complex64;
    /// `None` when the value has an imaginary part the type cannot hold.
    fn from_c64(z: Complex64) -> Option<Self>;

    #[inline]
    fn modulus(self) -> f64 {
        self.abs_sq().sqrt()
    }

    #[inline]
    fn scale(self, r: f64) -> Self {
        self * Self::from_re(r)
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const IS_COMPLEX: bool = false;

    #[inline]
    fn from_re(x: f64) -> Self {
        x
    }
    #[inline]
    fn conjugate(self) -> Self {
        self
    }
    #[inline]
    fn real(self) -> f64 {
        self
    }
    #[inline]
    fn imag(self) -> f64 {
        0.0
    }
    #[inline]
    fn abs_sq(self) -> f64 {
        self * self
    }
    #[inline]
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_c64(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }
    #[inline]
    fn scale(self, r: f64) -> Self {
        self * r
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    const IS_COMPLEX: bool = true;

    #[inline]
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn conjugate(self) -> Self {
        self.conj()
    }
    #[inline]
    fn real(self) -> f64 {
        self.re
    }
    #[inline]
    fn imag(self) -> f64 {
        self.im
    }
    #[inline]
    fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn to_c64(self) -> Complex64 {
        self
    }
    fn from_c64(z: Complex64) -> Option<Self> {
        Some(z)
    }
    #[inline]
    fn scale(self, r: f64) -> Self {
        Complex64::new(self.re * r, self.im * r)
    }
}

/// Hermitian inner product `x^H y`.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = T::ZERO;
    for (a, b) in x.iter().zip(y) {
        acc += a.conjugate() * *b;
    }
    acc
}

pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs_sq()).sum::<f64>().sqrt()
}

/// `y += alpha * x`
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}
