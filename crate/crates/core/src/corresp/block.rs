use std::sync::Arc;

use super::{dim_of, Correspondence};
use crate::error::{Error, Result};
use crate::exactalg::{Scalar, UnitalRing};
use crate::variety::VarRef;

/// Formal sum `⊕ 𝔥(Y_k)(a_k)`.
#[derive(Clone, Debug)]
pub struct MotiveSum<S> {
    pub summands: Vec<(VarRef<S>, i64)>,
}

impl<S: Scalar> MotiveSum<S> {
    pub fn new(summands: Vec<(VarRef<S>, i64)>) -> Self {
        MotiveSum { summands }
    }

    pub fn single(x: VarRef<S>) -> Self {
        MotiveSum { summands: vec![(x, 0)] }
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// `(Y, a) ↦ (Y, K − d_Y − a)`.
    pub fn dual(&self, k: i64) -> Self {
        MotiveSum { summands: self.summands.iter().map(|(y, a)| (y.clone(), k - dim_of(y) - a)).collect() }
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self.summands.iter().zip(&other.summands).all(|((x, a), (y, b))| Arc::ptr_eq(x, y) && a == b)
    }
}

/// Matrix of correspondences; `entries[t][s]` maps source summand `s` to
/// target summand `t` and has codimension `d_s + a_s − b_t`.
#[derive(Clone, Debug)]
pub struct BlockCorrespondence<S> {
    pub source: MotiveSum<S>,
    pub target: MotiveSum<S>,
    pub entries: Vec<Vec<Correspondence<S>>>,
}

impl<S: Scalar> PartialEq for BlockCorrespondence<S> {
    fn eq(&self, other: &Self) -> bool {
        self.source.same_as(&other.source) && self.target.same_as(&other.target) && self.entries == other.entries
    }
}

impl<S: Scalar> BlockCorrespondence<S> {
    pub fn new(source: MotiveSum<S>, target: MotiveSum<S>, entries: Vec<Vec<Correspondence<S>>>) -> Result<Self> {
        let b = BlockCorrespondence { source, target, entries };
        b.check()?;
        Ok(b)
    }

    fn check(&self) -> Result<()> {
        if self.entries.len() != self.target.len() || self.entries.iter().any(|r| r.len() != self.source.len()) {
            return Err(Error::Mismatch("block shape".into()));
        }
        for (t, row) in self.entries.iter().enumerate() {
            let (z, b) = &self.target.summands[t];
            for (s, e) in row.iter().enumerate() {
                let (y, a) = &self.source.summands[s];
                if !Arc::ptr_eq(&e.source, y) || !Arc::ptr_eq(&e.target, z) {
                    return Err(Error::Mismatch(format!("entry ({t},{s}) has the wrong varieties")));
                }
                let want = dim_of(y) + a - b;
                if let Some(c) = e.codim() {
                    if c as i64 != want {
                        return Err(Error::Malformed(format!("entry ({t},{s}) has codimension {c}, expected {want}")));
                    }
                } else if !e.is_zero() {
                    return Err(Error::Malformed(format!("entry ({t},{s}) is not of pure codimension")));
                }
            }
        }
        Ok(())
    }

    pub fn zero(source: MotiveSum<S>, target: MotiveSum<S>) -> Self {
        let entries = target
            .summands
            .iter()
            .map(|(z, _)| source.summands.iter().map(|(y, _)| Correspondence::zero(y.clone(), z.clone())).collect())
            .collect();
        BlockCorrespondence { source, target, entries }
    }

    pub fn identity(sum: &MotiveSum<S>) -> Self {
        Self::diagonal(sum, sum.summands.iter().map(|(y, _)| Correspondence::diagonal(y)).collect())
    }

    pub fn diagonal(sum: &MotiveSum<S>, diag: Vec<Correspondence<S>>) -> Self {
        let mut b = Self::zero(sum.clone(), sum.clone());
        for (k, d) in diag.into_iter().enumerate() {
            b.entries[k][k] = d;
        }
        b
    }

    /// Row block `⊕ source → Z` from its entries.
    pub fn row(source: MotiveSum<S>, target: (VarRef<S>, i64), entries: Vec<Correspondence<S>>) -> Result<Self> {
        Self::new(source, MotiveSum::new(vec![target]), vec![entries])
    }

    /// The block matrix with `Δ` wherever a source summand equals a target
    /// summand (same variety and twist). Each target summand must match one
    /// source summand.
    pub fn matching(source: &MotiveSum<S>, target: &MotiveSum<S>) -> Result<Self> {
        let mut b = Self::zero(source.clone(), target.clone());
        for (t, (z, bt)) in target.summands.iter().enumerate() {
            let hits: Vec<usize> =
                source.summands.iter().enumerate().filter(|(_, (y, a))| Arc::ptr_eq(y, z) && a == bt).map(|(s, _)| s).collect();
            match hits.as_slice() {
                [s] => b.entries[t][*s] = Correspondence::diagonal(z),
                _ => return Err(Error::Mismatch(format!("target summand {t} matches {} source summands", hits.len()))),
            }
        }
        Ok(b)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if !self.target.same_as(&next.source) {
            return Err(Error::Mismatch("block composition: middle sums differ".into()));
        }
        let mut out = Self::zero(self.source.clone(), next.target.clone());
        for t in 0..next.target.len() {
            for s in 0..self.source.len() {
                let mut acc = out.entries[t][s].clone();
                for m in 0..self.target.len() {
                    let (a, b) = (&self.entries[m][s], &next.entries[t][m]);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.then(b)?)?;
                }
                out.entries[t][s] = acc;
            }
        }
        Ok(out)
    }

    pub fn compose(&self, prev: &Self) -> Result<Self> {
        prev.then(self)
    }

    /// Transpose with duality constant `K`: source and target sums are
    /// replaced by their duals `(Y, a) ↦ (Y, K − d_Y − a)` and swapped.
    pub fn transpose(&self, k: i64) -> Self {
        let entries = (0..self.source.len()).map(|s| (0..self.target.len()).map(|t| self.entries[t][s].transpose()).collect()).collect();
        BlockCorrespondence { source: self.target.dual(k), target: self.source.dual(k), entries }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.source.same_as(&other.source) || !self.target.same_as(&other.target) {
            return Err(Error::Mismatch("block sums differ".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(r, q)| r.iter().zip(q).map(|(a, b)| a.add(b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockCorrespondence { source: self.source.clone(), target: self.target.clone(), entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let entries = self.entries.iter().map(|r| r.iter().map(|a| a.scale(s)).collect()).collect();
        BlockCorrespondence { source: self.source.clone(), target: self.target.clone(), entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.source.same_as(&self.target)
    }

    pub fn entry(&self, t: usize, s: usize) -> &Correspondence<S> {
        &self.entries[t][s]
    }

    /// `(1 + η)^{-1}` for `self = 1 + η` with `η` nilpotent of order at most
    /// the number of summands.
    pub fn invert_unitriangular(&self) -> Result<Self> {
        self.unipotent_power(&-S::one())
    }

    /// `(1 + η)^a` for `self = 1 + η`, `η` nilpotent.
    pub fn unipotent_power(&self, a: &S) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Mismatch("not a square block matrix".into()));
        }
        let eta = self.sub(&Self::identity(&self.source))?;
        crate::exactalg::nilpotent_binomial(&eta, a, self.source.len().max(1))
    }

    /// Sum of the entries of a `1 × 1` block.
    pub fn single_entry(&self) -> Result<&Correspondence<S>> {
        if self.source.len() == 1 && self.target.len() == 1 {
            Ok(&self.entries[0][0])
        } else {
            Err(Error::Mismatch("not a 1 × 1 block".into()))
        }
    }
}

impl<S: Scalar> UnitalRing for BlockCorrespondence<S> {
    type Scalar = S;

    fn identity_like(&self) -> Self {
        Self::identity(&self.source)
    }

    fn compose(&self, other: &Self) -> Self {
        other.then(self).expect("square blocks on the same sum")
    }

    fn plus(&self, other: &Self) -> Self {
        self.add(other).expect("square blocks on the same sum")
    }

    fn scaled(&self, s: &S) -> Self {
        self.scale(s)
    }

    fn is_zero_element(&self) -> bool {
        self.is_zero()
    }
}
