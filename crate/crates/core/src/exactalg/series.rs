//! Truncated characteristic-class calculus.
//!
//! Total classes are plain coefficient vectors of a [`GradedAlgebra`]; every
//! series is cut off at the top codimension of that algebra.

use super::algebra::{axpy, scale_vec, sub_vec, GradedAlgebra, GradedClass};
use super::scalar::{factorial, Scalar};
use crate::error::{Error, Result};

/// Coefficients of a univariate power series `Σ a_k x^k`, truncated.
pub fn univariate_log<S: Scalar>(q: &[S]) -> Vec<S> {
    // log q for q(0) = 1, via q·(log q)' = q'.
    let n = q.len();
    let mut l = vec![S::zero(); n];
    for k in 1..n {
        // k l_k = k q_k − Σ_{i=1}^{k−1} i l_i q_{k−i}
        let mut acc = S::from_int(k as i64).times(&q[k]);
        for i in 1..k {
            let t = S::from_int(i as i64).times(&l[i]).times(&q[k - i]);
            acc -= &t;
        }
        l[k] = acc / S::from_int(k as i64);
    }
    l
}

/// `x / (1 − e^{−x})` truncated to `n` terms.
pub fn todd_series<S: Scalar>(n: usize) -> Vec<S> {
    // (1 − e^{−x}) / x = Σ (−1)^k x^k / (k+1)!
    let f: Vec<S> = (0..n)
        .map(|k| {
            let s = if k % 2 == 0 { S::one() } else { -S::one() };
            s / factorial::<S>(k + 1)
        })
        .collect();
    invert_univariate(&f)
}

pub fn invert_univariate<S: Scalar>(f: &[S]) -> Vec<S> {
    let n = f.len();
    let mut g = vec![S::zero(); n];
    if n == 0 {
        return g;
    }
    let inv0 = f[0].recip().expect("invertible constant term");
    g[0] = inv0.clone();
    for k in 1..n {
        let mut acc = S::zero();
        for i in 1..=k {
            acc.add_product(&f[i], &g[k - i]);
        }
        g[k] = -(acc.times(&inv0));
    }
    g
}

impl<S: Scalar> GradedAlgebra<S> {
    fn positive_part(&self, a: &[S]) -> Vec<S> {
        let c = self.constant_term(a);
        sub_vec(a, &scale_vec(self.unit(), &c))
    }

    /// Evaluate `Σ_k coeffs[k] x^k` for nilpotent `x`.
    pub fn eval_series(&self, coeffs: &[S], x: &[S]) -> Vec<S> {
        let mut out = self.zero_vec();
        let mut pow = self.unit().to_vec();
        for (k, c) in coeffs.iter().enumerate() {
            if k > self.top() {
                break;
            }
            axpy(&mut out, c, &pow);
            pow = self.mul_vec(&pow, x);
        }
        out
    }

    /// Inverse of a total class with invertible constant term.
    pub fn series_invert_vec(&self, s: &[S]) -> Result<Vec<S>> {
        let c = self.constant_term(s);
        if c.is_zero() {
            return Err(Error::NonUnitSeries);
        }
        let inv = c.recip().unwrap();
        let x = scale_vec(&self.positive_part(s), &inv);
        // 1/(c(1+x)) = c^{-1} Σ (−x)^k
        let coeffs: Vec<S> = (0..=self.top()).map(|k| if k % 2 == 0 { inv.clone() } else { -inv.clone() }).collect();
        Ok(self.eval_series(&coeffs, &x))
    }

    pub fn series_invert(&self, s: &GradedClass<S>) -> Result<GradedClass<S>> {
        if s.algebra_id() != self.id() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self.wrap(self.series_invert_vec(s.coeffs())?))
    }

    /// exp of a class without constant term.
    pub fn exp_vec(&self, x: &[S]) -> Vec<S> {
        let coeffs: Vec<S> = (0..=self.top()).map(|k| S::one() / factorial::<S>(k)).collect();
        self.eval_series(&coeffs, &self.positive_part(x))
    }

    /// log of a class with constant term 1.
    pub fn log_vec(&self, u: &[S]) -> Result<Vec<S>> {
        if self.constant_term(u) != S::one() {
            return Err(Error::NonUnitSeries);
        }
        let x = self.positive_part(u);
        let mut coeffs = vec![S::zero(); self.top() + 1];
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            let s = if k % 2 == 1 { S::one() } else { -S::one() };
            *c = s / S::from_int(k as i64);
        }
        Ok(self.eval_series(&coeffs, &x))
    }

    /// Power sums `p_k` (k ≥ 1) of the Chern roots, as the vector `Σ_k p_k`.
    fn power_sums(&self, c: &[S]) -> Result<Vec<S>> {
        let l = self.log_vec(c)?;
        let mut out = self.zero_vec();
        for k in 1..=self.top() {
            let comp = self.component(&l, k);
            let sign = if k % 2 == 1 { 1 } else { -1 };
            axpy(&mut out, &S::from_int(sign * k as i64), &comp);
        }
        Ok(out)
    }

    /// Chern character of a bundle of the given rank with total Chern class `c`.
    pub fn chern_character_vec(&self, rank: i64, c: &[S]) -> Result<Vec<S>> {
        let p = self.power_sums(c)?;
        let mut out = scale_vec(self.unit(), &S::from_int(rank));
        for k in 1..=self.top() {
            axpy(&mut out, &(S::one() / factorial::<S>(k)), &self.component(&p, k));
        }
        Ok(out)
    }

    /// Total Chern class of a K-theory class with Chern character `ch`.
    pub fn chern_from_character_vec(&self, ch: &[S]) -> Vec<S> {
        // log c = Σ_k (−1)^{k−1} (k−1)! ch_k
        let mut l = self.zero_vec();
        for k in 1..=self.top() {
            let sign = if k % 2 == 1 { S::one() } else { -S::one() };
            axpy(&mut l, &(sign * factorial::<S>(k - 1)), &self.component(ch, k));
        }
        self.exp_vec(&l)
    }

    /// Rank (constant term) of a Chern character.
    pub fn character_rank(&self, ch: &[S]) -> S {
        self.constant_term(ch)
    }

    /// Todd class of a bundle with total Chern class `c`.
    pub fn todd_vec(&self, c: &[S]) -> Result<Vec<S>> {
        let p = self.power_sums(c)?;
        let t = univariate_log(&todd_series::<S>(self.top() + 1));
        let mut l = self.zero_vec();
        for k in 1..=self.top() {
            axpy(&mut l, &t[k], &self.component(&p, k));
        }
        Ok(self.exp_vec(&l))
    }

    /// Todd class of a K-theory class given by its Chern character.
    pub fn todd_of_character_vec(&self, ch: &[S]) -> Vec<S> {
        let t = univariate_log(&todd_series::<S>(self.top() + 1));
        let mut l = self.zero_vec();
        for k in 1..=self.top() {
            // p_k = k! ch_k
            axpy(&mut l, &t[k].times(&factorial::<S>(k)), &self.component(ch, k));
        }
        self.exp_vec(&l)
    }

    /// Chern class of the dual bundle.
    pub fn dual_chern_vec(&self, c: &[S]) -> Vec<S> {
        let mut out = self.zero_vec();
        for k in 0..=self.top() {
            let sign = if k % 2 == 0 { S::one() } else { -S::one() };
            axpy(&mut out, &sign, &self.component(c, k));
        }
        out
    }

    /// Dual of a Chern character.
    pub fn dual_character_vec(&self, ch: &[S]) -> Vec<S> {
        self.dual_chern_vec(ch)
    }

    /// `c(V ⊗ L)` for `V` of the given rank and `c₁(L) = l`.
    pub fn twist_chern_vec(&self, rank: i64, c: &[S], l: &[S]) -> Result<Vec<S>> {
        let ch = self.chern_character_vec(rank, c)?;
        let twisted = self.mul_vec(&ch, &self.exp_vec(l));
        Ok(self.truncate(&self.chern_from_character_vec(&twisted), rank.max(0) as usize))
    }

    /// Chern character of a line bundle with first Chern class `l`.
    pub fn line_character_vec(&self, l: &[S]) -> Vec<S> {
        self.exp_vec(l)
    }

    pub fn chern_character(&self, rank: i64, c: &GradedClass<S>) -> Result<GradedClass<S>> {
        if c.algebra_id() != self.id() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self.wrap(self.chern_character_vec(rank, c.coeffs())?))
    }

    pub fn todd(&self, c: &GradedClass<S>) -> Result<GradedClass<S>> {
        if c.algebra_id() != self.id() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self.wrap(self.todd_vec(c.coeffs())?))
    }
}
