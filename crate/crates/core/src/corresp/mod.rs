//! Correspondences as Künneth coefficient matrices, block matrices between
//! sums of twisted motives, and small diagonals.
//!
//! A class `Σ C_ij a_i ⊗ b_j ∈ CH(X × Y)` is stored as the matrix `C`. It acts
//! covariantly, `Γ_*α = p₂_*(p₁^*α · Γ)`, through the operator `Cᵀ G_X`.

mod block;
mod tensor3;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::{GradedClass, Matrix, Scalar};
use crate::variety::{Morphism, Product, VarRef, Variety};

pub use block::{BlockCorrespondence, MotiveSum};
pub use tensor3::{small_diagonal, Tensor3};

#[derive(Clone, Debug)]
pub struct Correspondence<S> {
    pub source: VarRef<S>,
    pub target: VarRef<S>,
    /// `n_source × n_target`.
    pub coeffs: Matrix<S>,
}

impl<S: Scalar> PartialEq for Correspondence<S> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.source, &other.source) && Arc::ptr_eq(&self.target, &other.target) && self.coeffs == other.coeffs
    }
}

fn same<S>(a: &VarRef<S>, b: &VarRef<S>, what: &str) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(Error::Mismatch(what.to_string()))
    }
}

impl<S: Scalar> Correspondence<S> {
    pub fn new(source: VarRef<S>, target: VarRef<S>, coeffs: Matrix<S>) -> Result<Self> {
        if coeffs.rows() != source.n() || coeffs.cols() != target.n() {
            return Err(Error::Mismatch("coefficient matrix shape".into()));
        }
        Ok(Correspondence { source, target, coeffs })
    }

    pub fn zero(source: VarRef<S>, target: VarRef<S>) -> Self {
        let coeffs = Matrix::zeros(source.n(), target.n());
        Correspondence { source, target, coeffs }
    }

    /// `Δ_X = Σ b_i^∨ ⊗ b_i`.
    pub fn diagonal(x: &VarRef<S>) -> Self {
        Correspondence { source: x.clone(), target: x.clone(), coeffs: x.chow.gram_inv().clone() }
    }

    /// Correspondence with the given action `n_target × n_source`.
    pub fn from_operator(source: &VarRef<S>, target: &VarRef<S>, op: &Matrix<S>) -> Result<Self> {
        if op.rows() != target.n() || op.cols() != source.n() {
            return Err(Error::Mismatch("operator shape".into()));
        }
        let c = op.mul(source.chow.gram_inv()).transpose();
        Ok(Correspondence { source: source.clone(), target: target.clone(), coeffs: c })
    }

    /// `Γ_f`, acting as `f_*`.
    pub fn graph(f: &Morphism<S>) -> Self {
        let c = f.pullback.mul(f.target.chow.gram_inv());
        Correspondence { source: f.source.clone(), target: f.target.clone(), coeffs: c }
    }

    /// `ι_*α` for the diagonal `ι: X → X × X`; acts as multiplication by `α`.
    pub fn multiplication(x: &VarRef<S>, alpha: &[S]) -> Self {
        let a = &x.chow;
        let n = a.dim();
        let m = Matrix::from_fn(n, n, |i, j| a.degree_vec(&a.mul_vec(alpha, &a.mul_vec(&a.basis_vec(i), &a.basis_vec(j)))));
        let gi = a.gram_inv();
        Correspondence { source: x.clone(), target: x.clone(), coeffs: gi.mul(&m).mul(gi) }
    }

    /// Action on `CH(source)`, an `n_target × n_source` matrix.
    pub fn operator(&self) -> Matrix<S> {
        self.coeffs.transpose().mul(self.source.chow.gram())
    }

    pub fn act(&self, a: &[S]) -> Vec<S> {
        let g = self.source.chow.gram().mul_vec(a);
        self.coeffs.vec_mul(&g)
    }

    pub fn act_class(&self, a: &GradedClass<S>) -> Result<GradedClass<S>> {
        if a.algebra_id() != self.source.chow.id() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self.target.chow.wrap(self.act(a.coeffs())))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        same(&self.target, &next.source, "middle varieties differ")?;
        let c = self.coeffs.mul(&self.target.chow.gram().mul(&next.coeffs));
        Ok(Correspondence { source: self.source.clone(), target: next.target.clone(), coeffs: c })
    }

    /// `self ∘ prev`.
    pub fn compose(&self, prev: &Self) -> Result<Self> {
        prev.then(self)
    }

    pub fn transpose(&self) -> Self {
        Correspondence { source: self.target.clone(), target: self.source.clone(), coeffs: self.coeffs.transpose() }
    }

    /// `self ⊗ other: X₁ × Y₁ → X₂ × Y₂`.
    pub fn tensor(&self, other: &Self, src: &Product<S>, tgt: &Product<S>) -> Result<Self> {
        same(&src.left, &self.source, "left source")?;
        same(&src.right, &other.source, "right source")?;
        same(&tgt.left, &self.target, "left target")?;
        same(&tgt.right, &other.target, "right target")?;
        let (n1, m1) = (self.source.n(), self.target.n());
        let (n2, m2) = (other.source.n(), other.target.n());
        let mut c = Matrix::zeros(n1 * n2, m1 * m2);
        for i in 0..n1 {
            for j in 0..m1 {
                let a = self.coeffs.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..n2 {
                    for l in 0..m2 {
                        let b = other.coeffs.get(k, l);
                        if !b.is_zero() {
                            c.set(i * n2 + k, j * m2 + l, a.times(b));
                        }
                    }
                }
            }
        }
        Ok(Correspondence { source: src.variety.clone(), target: tgt.variety.clone(), coeffs: c })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same(&self.source, &other.source, "sources differ")?;
        same(&self.target, &other.target, "targets differ")?;
        Ok(Correspondence { source: self.source.clone(), target: self.target.clone(), coeffs: self.coeffs.add(&other.coeffs) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same(&self.source, &other.source, "sources differ")?;
        same(&self.target, &other.target, "targets differ")?;
        Ok(Correspondence { source: self.source.clone(), target: self.target.clone(), coeffs: self.coeffs.sub(&other.coeffs) })
    }

    pub fn scale(&self, s: &S) -> Self {
        Correspondence { source: self.source.clone(), target: self.target.clone(), coeffs: self.coeffs.scale(s) }
    }

    pub fn neg(&self) -> Self {
        Correspondence { source: self.source.clone(), target: self.target.clone(), coeffs: self.coeffs.neg() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    /// Codimensions of `X × Y` carrying nonzero coefficients.
    pub fn codims(&self) -> Vec<usize> {
        let (a, b) = (&self.source.chow, &self.target.chow);
        let mut out: Vec<usize> = Vec::new();
        for i in 0..a.dim() {
            for j in 0..b.dim() {
                if !self.coeffs.get(i, j).is_zero() {
                    let c = a.codim(i) + b.codim(j);
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The codimension if the class is pure; `None` for zero or mixed classes.
    pub fn codim(&self) -> Option<usize> {
        match self.codims().as_slice() {
            [c] => Some(*c),
            _ => None,
        }
    }

    pub fn codim_component(&self, p: usize) -> Self {
        let (a, b) = (&self.source.chow, &self.target.chow);
        let c = Matrix::from_fn(a.dim(), b.dim(), |i, j| {
            if a.codim(i) + b.codim(j) == p {
                self.coeffs.get(i, j).clone()
            } else {
                S::zero()
            }
        });
        Correspondence { source: self.source.clone(), target: self.target.clone(), coeffs: c }
    }

    /// `(f × g)^*Γ` for `f: X′ → X`, `g: Y′ → Y`.
    pub fn pullback_along(&self, f: &Morphism<S>, g: &Morphism<S>) -> Result<Self> {
        same(&f.target, &self.source, "left pullback")?;
        same(&g.target, &self.target, "right pullback")?;
        let c = f.pullback.mul(&self.coeffs).mul(&g.pullback.transpose());
        Ok(Correspondence { source: f.source.clone(), target: g.source.clone(), coeffs: c })
    }

    /// `(f × g)_*Γ` for `f: X → X′`, `g: Y → Y′`.
    pub fn pushforward_along(&self, f: &Morphism<S>, g: &Morphism<S>) -> Result<Self> {
        same(&f.source, &self.source, "left pushforward")?;
        same(&g.source, &self.target, "right pushforward")?;
        let c = f.push_matrix()?.mul(&self.coeffs).mul(&g.push_matrix()?.transpose());
        Ok(Correspondence { source: f.target.clone(), target: g.target.clone(), coeffs: c })
    }

    /// Intersection product in `CH(X × Y)`.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        same(&self.source, &other.source, "sources differ")?;
        same(&self.target, &other.target, "targets differ")?;
        let (a, b) = (&self.source.chow, &self.target.chow);
        let (n, m) = (a.dim(), b.dim());
        let mut c: Matrix<S> = Matrix::zeros(n, m);
        let left: Vec<(usize, usize, &S)> = nonzeros(&self.coeffs);
        let right: Vec<(usize, usize, &S)> = nonzeros(&other.coeffs);
        for &(i, j, x) in &left {
            for &(k, l, y) in &right {
                if a.codim(i) + a.codim(k) > a.top() || b.codim(j) + b.codim(l) > b.top() {
                    continue;
                }
                let xy = x.times(y);
                for (p, u) in a.mul_basis(i, k) {
                    let xu = xy.times(u);
                    for (q, v) in b.mul_basis(j, l) {
                        c.entry_mut(*p, *q).add_product(&xu, v);
                    }
                }
            }
        }
        Ok(Correspondence { source: self.source.clone(), target: self.target.clone(), coeffs: c })
    }

    /// `deg(Γ · ᵗΓ′)`, i.e. the pairing of two classes on `X × Y`.
    pub fn pairing(&self, other: &Self) -> Result<S> {
        same(&self.source, &other.source, "sources differ")?;
        same(&self.target, &other.target, "targets differ")?;
        let l = self.source.chow.gram().mul(&other.coeffs).mul(self.target.chow.gram());
        let mut s = S::zero();
        for i in 0..l.rows() {
            for j in 0..l.cols() {
                s.add_product(self.coeffs.get(i, j), l.get(i, j));
            }
        }
        Ok(s)
    }

    /// Trace of the action, `deg(Γ · Δ)` for a self-correspondence.
    pub fn trace(&self) -> S {
        self.operator().trace()
    }

    /// The class as a vector in `CH(X × Y)` (product basis order).
    pub fn as_class(&self, prod: &Product<S>) -> Result<Vec<S>> {
        same(&prod.left, &self.source, "left factor")?;
        same(&prod.right, &self.target, "right factor")?;
        Ok((0..self.source.n()).flat_map(|i| self.coeffs.row(i).to_vec()).collect())
    }

    pub fn from_class(prod: &Product<S>, v: &[S]) -> Result<Self> {
        let m = prod.right.n();
        if v.len() != prod.variety.n() {
            return Err(Error::Mismatch("class length".into()));
        }
        let c = Matrix::from_fn(prod.left.n(), m, |i, j| v[i * m + j].clone());
        Ok(Correspondence { source: prod.left.clone(), target: prod.right.clone(), coeffs: c })
    }

    /// Graded pieces `Γ = Σ_s Γ_s` under product projectors: the component of
    /// grade `s` in codimension `p` is `Σ_{i+j=2p−s} π_Y^j ∘ Γ_p ∘ ᵗπ_X^i`.
    pub fn grade_components(&self, pis_x: &[Correspondence<S>], pis_y: &[Correspondence<S>]) -> Result<Vec<(usize, i64, Self)>> {
        for p in pis_x {
            same(&p.source, &self.source, "source projectors")?;
        }
        for p in pis_y {
            same(&p.source, &self.target, "target projectors")?;
        }
        let ops_x: Vec<Matrix<S>> = pis_x.iter().map(|p| p.operator()).collect();
        let ops_y: Vec<Matrix<S>> = pis_y.iter().map(|p| p.operator()).collect();
        let mut out: Vec<(usize, i64, Self)> = Vec::new();
        for p in self.codims() {
            let gp = self.codim_component(p);
            for (i, ax) in ops_x.iter().enumerate() {
                if ax.is_zero() {
                    continue;
                }
                let left = ax.mul(&gp.coeffs);
                if left.is_zero() {
                    continue;
                }
                for (j, ay) in ops_y.iter().enumerate() {
                    if ay.is_zero() {
                        continue;
                    }
                    let c = left.mul(&ay.transpose());
                    if c.is_zero() {
                        continue;
                    }
                    let s = 2 * p as i64 - (i + j) as i64;
                    let piece = Correspondence { source: self.source.clone(), target: self.target.clone(), coeffs: c };
                    match out.iter_mut().find(|(q, t, _)| *q == p && *t == s) {
                        Some(e) => e.2 = e.2.add(&piece)?,
                        None => out.push((p, s, piece)),
                    }
                }
            }
        }
        out.sort_by_key(|(p, s, _)| (*p, *s));
        Ok(out)
    }

    /// Grades with a nonzero component.
    pub fn grades(&self, pis_x: &[Correspondence<S>], pis_y: &[Correspondence<S>]) -> Result<Vec<i64>> {
        let mut g: Vec<i64> = self.grade_components(pis_x, pis_y)?.into_iter().filter(|(_, _, c)| !c.is_zero()).map(|(_, s, _)| s).collect();
        g.sort_unstable();
        g.dedup();
        Ok(g)
    }

    pub fn is_pure_grade(&self, s: i64, pis_x: &[Correspondence<S>], pis_y: &[Correspondence<S>]) -> Result<bool> {
        let g = self.grades(pis_x, pis_y)?;
        Ok(g.is_empty() || g == [s])
    }

    /// `π_Y^i ∘ Γ = Γ ∘ π_X^{2(d_X − p) + s + i}` for all `i`; `Γ` must be
    /// pure of codimension `p`. Returns the first failing `i`.
    pub fn commutation_defect(&self, s: i64, pis_x: &[Correspondence<S>], pis_y: &[Correspondence<S>]) -> Result<Option<usize>> {
        let p = match self.codim() {
            Some(p) => p as i64,
            None if self.is_zero() => return Ok(None),
            None => return Err(Error::Precondition("correspondence is not of pure codimension".into())),
        };
        let dx = self.source.dim as i64;
        for (i, py) in pis_y.iter().enumerate() {
            let lhs = self.then(py)?;
            let k = 2 * (dx - p) + s + i as i64;
            let rhs = if k >= 0 && (k as usize) < pis_x.len() {
                pis_x[k as usize].then(self)?
            } else {
                Correspondence::zero(self.source.clone(), self.target.clone())
            };
            if lhs.coeffs != rhs.coeffs {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

fn nonzeros<S: Scalar>(m: &Matrix<S>) -> Vec<(usize, usize, &S)> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for (j, x) in m.row(i).iter().enumerate() {
            if !x.is_zero() {
                out.push((i, j, x));
            }
        }
    }
    out
}

/// `Γ_f` for `f` given by a pullback on a variety pair; convenience for
/// automorphisms given by their push-forward matrix `g_*`.
pub fn automorphism_graph<S: Scalar>(x: &VarRef<S>, push: &Matrix<S>) -> Result<Correspondence<S>> {
    Correspondence::from_operator(x, x, push)
}

/// Dimension helper for twist arithmetic.
pub(crate) fn dim_of<S>(v: &Variety<S>) -> i64 {
    v.dim as i64
}
