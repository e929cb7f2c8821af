use super::algebra::{add_vec, scale_vec, GradedAlgebra};
use super::matrix::Matrix;
use super::scalar::{binomial, Scalar};
use crate::error::{Error, Result};

/// Minimal unital ring interface needed for truncated binomial series.
pub trait UnitalRing: Clone {
    type Scalar: Scalar;
    fn identity_like(&self) -> Self;
    /// `self ∘ other`.
    fn compose(&self, other: &Self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn scaled(&self, s: &Self::Scalar) -> Self;
    fn is_zero_element(&self) -> bool;
}

/// `(1 + x)^a = Σ_{k<r} binom(a, k) x^k` for `x` with `x^r = 0` (checked).
pub fn nilpotent_binomial<R: UnitalRing>(x: &R, a: &R::Scalar, r: usize) -> Result<R> {
    let mut pow = x.identity_like();
    let mut acc: Option<R> = None;
    for k in 0..r {
        let term = pow.scaled(&binomial(a, k));
        acc = Some(match acc {
            None => term,
            Some(s) => s.plus(&term),
        });
        pow = pow.compose(x);
    }
    if !pow.is_zero_element() {
        return Err(Error::NotNilpotent(r));
    }
    Ok(acc.unwrap_or_else(|| x.identity_like()))
}

impl<S: Scalar> UnitalRing for Matrix<S> {
    type Scalar = S;

    fn identity_like(&self) -> Self {
        Matrix::identity(self.rows())
    }

    fn compose(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }

    fn scaled(&self, s: &S) -> Self {
        self.scale(s)
    }

    fn is_zero_element(&self) -> bool {
        self.is_zero()
    }
}

/// Element of a graded algebra carrying a reference to it.
#[derive(Clone, Debug)]
pub struct InAlgebra<'a, S> {
    pub alg: &'a GradedAlgebra<S>,
    pub v: Vec<S>,
}

impl<'a, S: Scalar> UnitalRing for InAlgebra<'a, S> {
    type Scalar = S;

    fn identity_like(&self) -> Self {
        InAlgebra { alg: self.alg, v: self.alg.unit().to_vec() }
    }

    fn compose(&self, other: &Self) -> Self {
        InAlgebra { alg: self.alg, v: self.alg.mul_vec(&self.v, &other.v) }
    }

    fn plus(&self, other: &Self) -> Self {
        InAlgebra { alg: self.alg, v: add_vec(&self.v, &other.v) }
    }

    fn scaled(&self, s: &S) -> Self {
        InAlgebra { alg: self.alg, v: scale_vec(&self.v, s) }
    }

    fn is_zero_element(&self) -> bool {
        self.v.iter().all(|x| x.is_zero())
    }
}
