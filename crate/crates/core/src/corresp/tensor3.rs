use std::collections::HashMap;
use std::sync::Arc;

use super::Correspondence;
use crate::error::{Error, Result};
use crate::exactalg::{Matrix, Scalar};
use crate::variety::VarRef;

/// Sparse class `Σ T_{ijk} a_i ⊗ b_j ⊗ c_k` on a triple product.
#[derive(Clone, Debug)]
pub struct Tensor3<S> {
    pub factors: [VarRef<S>; 3],
    pub entries: HashMap<[u32; 3], S>,
}

impl<S: Scalar> PartialEq for Tensor3<S> {
    fn eq(&self, other: &Self) -> bool {
        (0..3).all(|k| Arc::ptr_eq(&self.factors[k], &other.factors[k])) && self.sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }
}

impl<S: Scalar> Tensor3<S> {
    pub fn zero(factors: [VarRef<S>; 3]) -> Self {
        Tensor3 { factors, entries: HashMap::new() }
    }

    /// Small diagonal `Δ₁₂₃ ⊂ X³`, the adjoint of the triple product.
    pub fn small_diagonal(x: &VarRef<S>) -> Self {
        let a = &x.chow;
        let n = a.dim();
        let gi = a.gram_inv();
        let cols: Vec<Vec<(usize, S)>> =
            (0..n).map(|j| (0..n).filter(|&i| !gi.get(i, j).is_zero() ).map(|i| (i, gi.get(i, j).clone())).collect()).collect();
        let mut t = Tensor3::zero([x.clone(), x.clone(), x.clone()]);
        for p in 0..n {
            for q in 0..n {
                for (k, mu) in a.mul_basis(p, q) {
                    for (i, g1) in &cols[p] {
                        let g1mu = g1.times(mu);
                        for (j, g2) in &cols[q] {
                            t.add_at([*i as u32, *j as u32, *k as u32], &g1mu.times(g2));
                        }
                    }
                }
            }
        }
        t.prune();
        t
    }

    /// `p₁₂^*A · p₂₃^*B` for `A ∈ CH(X×Y)`, `B ∈ CH(Y×Z)`.
    pub fn join(a: &Correspondence<S>, b: &Correspondence<S>) -> Result<Self> {
        if !Arc::ptr_eq(&a.target, &b.source) {
            return Err(Error::Mismatch("middle factors differ".into()));
        }
        let y = &a.target.chow;
        let mut t = Tensor3::zero([a.source.clone(), a.target.clone(), b.target.clone()]);
        for i in 0..a.coeffs.rows() {
            for (j, x) in a.coeffs.row(i).iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for k in 0..b.coeffs.rows() {
                    if y.codim(j) + y.codim(k) > y.top() {
                        continue;
                    }
                    let prod = y.mul_basis(j, k);
                    if prod.is_empty() {
                        continue;
                    }
                    for (l, z) in b.coeffs.row(k).iter().enumerate() {
                        if z.is_zero() {
                            continue;
                        }
                        let xz = x.times(z);
                        for (m, mu) in prod {
                            t.add_at([i as u32, *m as u32, l as u32], &xz.times(mu));
                        }
                    }
                }
            }
        }
        t.prune();
        Ok(t)
    }

    /// `(j₁ × j₂ × j₃)_*` of a product class `u ⊗ v ⊗ w` given per factor.
    pub fn pure(factors: [VarRef<S>; 3], u: &[S], v: &[S], w: &[S]) -> Self {
        let mut t = Tensor3::zero(factors);
        for (i, a) in u.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in v.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                let ab = a.times(b);
                for (k, c) in w.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                    t.add_at([i as u32, j as u32, k as u32], &ab.times(c));
                }
            }
        }
        t
    }

    fn add_at(&mut self, key: [u32; 3], v: &S) {
        if v.is_zero() {
            return;
        }
        match self.entries.get_mut(&key) {
            Some(e) => *e += v,
            None => {
                self.entries.insert(key, v.clone());
            }
        }
    }

    fn prune(&mut self) {
        self.entries.retain(|_, v| !v.is_zero());
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| v.is_zero())
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> S {
        self.entries.get(&[i as u32, j as u32, k as u32]).cloned().unwrap_or_else(S::zero)
    }

    /// Smallest index with a nonzero coefficient.
    pub fn first_nonzero(&self) -> Option<([u32; 3], S)> {
        self.entries.iter().filter(|(_, v)| !v.is_zero()).min_by_key(|(k, _)| **k).map(|(k, v)| (*k, v.clone()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !(0..3).all(|k| Arc::ptr_eq(&self.factors[k], &other.factors[k])) {
            return Err(Error::Mismatch("tensor factors differ".into()));
        }
        let mut t = self.clone();
        for (k, v) in &other.entries {
            t.add_at(*k, v);
        }
        t.prune();
        Ok(t)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let entries = if s.is_zero() { HashMap::new() } else { self.entries.iter().map(|(k, v)| (*k, v.times(s))).collect() };
        Tensor3 { factors: self.factors.clone(), entries }
    }

    /// Apply `op` (`n′ × n`) on one axis; the new factor is `factor`.
    pub fn apply(&self, axis: usize, op: &Matrix<S>, factor: VarRef<S>) -> Result<Self> {
        if op.cols() != self.factors[axis].n() || op.rows() != factor.n() {
            return Err(Error::Mismatch("operator shape on tensor axis".into()));
        }
        let cols: Vec<Vec<(u32, &S)>> = (0..op.cols())
            .map(|c| (0..op.rows()).filter(|&r| !op.get(r, c).is_zero() ).map(|r| (r as u32, op.get(r, c))).collect())
            .collect();
        let mut factors = self.factors.clone();
        factors[axis] = factor;
        let mut t = Tensor3::zero(factors);
        for (key, v) in &self.entries {
            for (r, a) in &cols[key[axis] as usize] {
                let mut k = *key;
                k[axis] = *r;
                t.add_at(k, &a.times(v));
            }
        }
        t.prune();
        Ok(t)
    }

    /// Apply the same self-map operator on every axis.
    pub fn apply_all(&self, ops: [&Matrix<S>; 3]) -> Result<Self> {
        let mut t = self.clone();
        for (axis, op) in ops.iter().enumerate() {
            let f = t.factors[axis].clone();
            t = t.apply(axis, op, f)?;
        }
        Ok(t)
    }

    /// `(f × g × h)^*` for pullback matrices on each factor.
    pub fn pullback(&self, maps: [&crate::variety::Morphism<S>; 3]) -> Result<Self> {
        let mut t = self.clone();
        for (axis, f) in maps.iter().enumerate() {
            if !Arc::ptr_eq(&f.target, &t.factors[axis]) {
                return Err(Error::Mismatch("pullback target".into()));
            }
            t = t.apply(axis, &f.pullback, f.source.clone())?;
        }
        Ok(t)
    }

    /// `(f × g × h)_*`.
    pub fn pushforward(&self, maps: [&crate::variety::Morphism<S>; 3]) -> Result<Self> {
        let mut t = self.clone();
        for (axis, f) in maps.iter().enumerate() {
            if !Arc::ptr_eq(&f.source, &t.factors[axis]) {
                return Err(Error::Mismatch("pushforward source".into()));
            }
            t = t.apply(axis, &f.push_matrix()?, f.target.clone())?;
        }
        Ok(t)
    }

    /// Action as a correspondence from the first two factors to the third:
    /// `(α, β) ↦ p₃_*(T · p₁^*α · p₂^*β)`.
    pub fn act2(&self, alpha: &[S], beta: &[S]) -> Vec<S> {
        let ga = self.factors[0].chow.gram().mul_vec(alpha);
        let gb = self.factors[1].chow.gram().mul_vec(beta);
        let mut out = vec![S::zero(); self.factors[2].n()];
        for (k, v) in &self.entries {
            let (a, b) = (&ga[k[0] as usize], &gb[k[1] as usize]);
            if a.is_zero() || b.is_zero() {
                continue;
            }
            out[k[2] as usize].add_product(&a.times(b), v);
        }
        out
    }

    /// Flatten into a vector over the product basis `(i·n₂ + j)·n₃ + k`.
    pub fn flatten(&self) -> Vec<S> {
        let (n2, n3) = (self.factors[1].n(), self.factors[2].n());
        let mut v = vec![S::zero(); self.factors[0].n() * n2 * n3];
        for (k, x) in &self.entries {
            v[(k[0] as usize * n2 + k[1] as usize) * n3 + k[2] as usize] = x.clone();
        }
        v
    }
}

/// The `l`-fold small diagonal of `X` as sparse coordinates over the
/// product basis of `X^l` (index tuples with coefficients).
pub fn small_diagonal<S: Scalar>(x: &VarRef<S>, l: usize) -> Result<Vec<(Vec<usize>, S)>> {
    if l == 0 {
        return Err(Error::Precondition("small diagonal needs at least one factor".into()));
    }
    let a = &x.chow;
    let n = a.dim();
    if l == 1 {
        return Ok((0..n).filter(|&i| !a.unit()[i].is_zero()).map(|i| (vec![i], a.unit()[i].clone())).collect());
    }
    let gi = a.gram_inv();
    // Partial products a_{j_1}⋯a_{j_{l−1}} carried with their index tuples.
    let mut partial: HashMap<(Vec<usize>, usize), S> = HashMap::new();
    for j in 0..n {
        partial.insert((vec![j], j), S::one());
    }
    for _ in 1..l - 1 {
        let mut next: HashMap<(Vec<usize>, usize), S> = HashMap::new();
        for ((idx, m), c) in &partial {
            for j in 0..n {
                for (k, mu) in a.mul_basis(*m, j) {
                    let mut id = idx.clone();
                    id.push(j);
                    let e = next.entry((id, *k)).or_insert_with(S::zero);
                    e.add_product(c, mu);
                }
            }
        }
        partial = next;
    }
    let mut out: HashMap<Vec<usize>, S> = HashMap::new();
    for ((idx, k), c) in partial {
        if c.is_zero() {
            continue;
        }
        // Contract every index but the last with G⁻¹.
        let mut terms: Vec<(Vec<usize>, S)> = vec![(Vec::new(), c)];
        for &j in &idx {
            let mut nt = Vec::new();
            for (pre, v) in &terms {
                for i in 0..n {
                    let g = gi.get(i, j);
                    if !g.is_zero() {
                        let mut p = pre.clone();
                        p.push(i);
                        nt.push((p, v.times(g)));
                    }
                }
            }
            terms = nt;
        }
        for (mut p, v) in terms {
            p.push(k);
            let e = out.entry(p).or_insert_with(S::zero);
            *e += &v;
        }
    }
    let mut v: Vec<(Vec<usize>, S)> = out.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(v)
}
