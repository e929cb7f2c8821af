//! Varieties with computable Chow rings, morphisms given by pullback
//! matrices, and the builders that produce them.

mod blowup;
mod builders;
mod replay;
mod strict;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::{dot, GradedAlgebra, GradedClass, Matrix, Scalar};
use crate::report::Report;

pub use blowup::{build_blow_up, BlowUp};
pub use builders::{
    build_descended, build_disjoint_union, build_point, build_product, build_projective_bundle,
    build_projective_space, build_quotient, tensor_vec, DisjointUnion, GroupAction, Product, ProjectiveBundle,
    Quotient,
};
pub use replay::replay_over_base;
pub use strict::{excess_pullback_of_pushforward, normal_bundle_of_strict_transform, strict_transform_pullback, ExcessConfig, StrictNormalInput};

pub type VarRef<S> = Arc<Variety<S>>;

/// How a variety was built.
#[derive(Clone, Debug)]
pub enum Recipe<S> {
    Point,
    ProjectiveSpace(usize),
    Product(VarRef<S>, VarRef<S>),
    ProjectiveBundle { base: VarRef<S>, rank: usize, chern: Vec<S> },
    BlowUp { base: VarRef<S>, center: VarRef<S> },
    Quotient { cover: VarRef<S>, order: usize },
    DisjointUnion(Vec<VarRef<S>>),
    Manual,
}

impl<S> Recipe<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            Recipe::Point => "point",
            Recipe::ProjectiveSpace(_) => "projective_space",
            Recipe::Product(..) => "product",
            Recipe::ProjectiveBundle { .. } => "projective_bundle",
            Recipe::BlowUp { .. } => "blow_up",
            Recipe::Quotient { .. } => "quotient",
            Recipe::DisjointUnion(_) => "disjoint_union",
            Recipe::Manual => "manual",
        }
    }
}

/// Smooth projective variety with finite-rank Chow groups.
#[derive(Clone, Debug)]
pub struct Variety<S> {
    pub name: String,
    pub dim: usize,
    pub chow: Arc<GradedAlgebra<S>>,
    /// Total Chern class of the tangent bundle.
    pub tangent: Vec<S>,
    pub point: Vec<S>,
    pub recipe: Recipe<S>,
}

impl<S: Scalar> Variety<S> {
    pub fn n(&self) -> usize {
        self.chow.dim()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.chow.ranks()
    }

    pub fn class(&self, v: Vec<S>) -> GradedClass<S> {
        self.chow.wrap(v)
    }

    pub fn tangent_class(&self) -> GradedClass<S> {
        self.chow.wrap(self.tangent.clone())
    }

    pub fn point_class(&self) -> GradedClass<S> {
        self.chow.wrap(self.point.clone())
    }

    /// Topological Euler characteristic `deg c_d(T)`.
    pub fn euler(&self) -> S {
        self.chow.degree_vec(&self.chow.component(&self.tangent, self.dim))
    }

    /// Axioms of the Chow ring plus the variety-level invariants: degree of
    /// the point class and `χ = Σ b_{2i}` (valid for cellular varieties).
    pub fn verify(&self) -> Report {
        let mut rep = self.chow.verify_default();
        rep.run("variety.point_degree", || {
            let d = self.chow.degree_vec(&self.point);
            (!(d == S::one() && self.chow.is_homogeneous(&self.point, self.dim)))
                .then(|| format!("point class has degree {d}"))
        });
        rep.run("variety.tangent_unit", || {
            (self.chow.constant_term(&self.tangent) != S::one()).then(|| "c_0(T) != 1".to_string())
        });
        rep.run("variety.euler", || {
            let e = self.euler();
            (e != S::from_int(self.n() as i64)).then(|| format!("deg c_{}(T) = {e}, rank CH = {}", self.dim, self.n()))
        });
        rep.prefixed(&self.name)
    }

    /// Codimension-`k` part of a class.
    pub fn component(&self, v: &[S], k: usize) -> Vec<S> {
        self.chow.component(v, k)
    }
}

/// A vector bundle known through its Chern classes.
#[derive(Clone, Debug)]
pub struct BundleData<S> {
    pub carrier: VarRef<S>,
    pub rank: usize,
    pub chern: Vec<S>,
}

impl<S: Scalar> BundleData<S> {
    pub fn new(carrier: VarRef<S>, rank: usize, chern: Vec<S>) -> Result<Self> {
        if chern.len() != carrier.n() {
            return Err(Error::Mismatch("Chern class length".into()));
        }
        if carrier.chow.constant_term(&chern) != S::one() {
            return Err(Error::NonUnitSeries);
        }
        for k in (rank + 1)..=carrier.dim {
            if !carrier.component(&chern, k).iter().all(|x| x.is_zero()) {
                return Err(Error::Precondition(format!("c_{k} nonzero for a rank-{rank} bundle")));
            }
        }
        Ok(BundleData { carrier, rank, chern })
    }

    pub fn trivial(carrier: VarRef<S>, rank: usize) -> Self {
        let chern = carrier.chow.unit().to_vec();
        BundleData { carrier, rank, chern }
    }

    /// Line bundle with the given first Chern class.
    pub fn line(carrier: VarRef<S>, c1: &[S]) -> Self {
        let mut chern = carrier.chow.unit().to_vec();
        for (a, b) in chern.iter_mut().zip(c1) {
            *a += b;
        }
        BundleData { carrier, rank: 1, chern }
    }

    pub fn tangent(carrier: VarRef<S>) -> Self {
        let chern = carrier.tangent.clone();
        let rank = carrier.dim;
        BundleData { carrier, rank, chern }
    }

    pub fn c(&self, k: usize) -> Vec<S> {
        self.carrier.component(&self.chern, k)
    }

    pub fn character(&self) -> Result<Vec<S>> {
        self.carrier.chow.chern_character_vec(self.rank as i64, &self.chern)
    }

    pub fn segre(&self) -> Result<Vec<S>> {
        self.carrier.chow.series_invert_vec(&self.chern)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        BundleData {
            carrier: self.carrier.clone(),
            rank: self.rank + other.rank,
            chern: self.carrier.chow.mul_vec(&self.chern, &other.chern),
        }
    }

    /// Quotient `self / sub` in K-theory.
    pub fn quotient(&self, sub: &Self) -> Result<Self> {
        let inv = self.carrier.chow.series_invert_vec(&sub.chern)?;
        let rank = self.rank.checked_sub(sub.rank).ok_or_else(|| Error::Precondition("negative rank".into()))?;
        let chern = self.carrier.chow.truncate(&self.carrier.chow.mul_vec(&self.chern, &inv), rank);
        Ok(BundleData { carrier: self.carrier.clone(), rank, chern })
    }

    pub fn twist(&self, l: &[S]) -> Result<Self> {
        let chern = self.carrier.chow.twist_chern_vec(self.rank as i64, &self.chern, l)?;
        Ok(BundleData { carrier: self.carrier.clone(), rank: self.rank, chern })
    }

    pub fn dual(&self) -> Self {
        BundleData { carrier: self.carrier.clone(), rank: self.rank, chern: self.carrier.chow.dual_chern_vec(&self.chern) }
    }

    pub fn pullback(&self, f: &Morphism<S>) -> Result<Self> {
        if !Arc::ptr_eq(&f.target, &self.carrier) {
            return Err(Error::Mismatch(format!("bundle lives on {}, morphism targets {}", self.carrier.name, f.target.name)));
        }
        Ok(BundleData { carrier: f.source.clone(), rank: self.rank, chern: f.pull(&self.chern) })
    }
}

/// Morphism of varieties represented by its pullback on Chow rings.
#[derive(Clone, Debug)]
pub struct Morphism<S> {
    pub name: String,
    pub source: VarRef<S>,
    pub target: VarRef<S>,
    /// `n_source × n_target`; column `j` is `f^*(b_j)`.
    pub pullback: Matrix<S>,
    pub proper: bool,
}

impl<S: Scalar> Morphism<S> {
    pub fn new(name: impl Into<String>, source: VarRef<S>, target: VarRef<S>, pullback: Matrix<S>) -> Result<Self> {
        if pullback.rows() != source.n() || pullback.cols() != target.n() {
            return Err(Error::Mismatch("pullback matrix shape".into()));
        }
        Ok(Morphism { name: name.into(), source, target, pullback, proper: true })
    }

    pub fn identity(x: VarRef<S>) -> Self {
        let n = x.n();
        Morphism { name: format!("id_{}", x.name), source: x.clone(), target: x, pullback: Matrix::identity(n), proper: true }
    }

    pub fn pull(&self, v: &[S]) -> Vec<S> {
        self.pullback.mul_vec(v)
    }

    /// Matrix of `f_*` (`n_target × n_source`), the pairing adjoint of `f^*`.
    pub fn push_matrix(&self) -> Result<Matrix<S>> {
        if !self.proper {
            return Err(Error::NotProper);
        }
        Ok(self.target.chow.gram_inv().mul(&self.pullback.transpose().mul(self.source.chow.gram())))
    }

    pub fn push(&self, v: &[S]) -> Result<Vec<S>> {
        if !self.proper {
            return Err(Error::NotProper);
        }
        let w = self.pullback.vec_mul(&self.source.chow.gram().mul_vec(v));
        Ok(self.target.chow.gram_inv().mul_vec(&w))
    }

    pub fn pushforward(&self, a: &GradedClass<S>) -> Result<GradedClass<S>> {
        if a.algebra_id() != self.source.chow.id() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self.target.chow.wrap(self.push(a.coeffs())?))
    }

    pub fn pullback_class(&self, a: &GradedClass<S>) -> Result<GradedClass<S>> {
        if a.algebra_id() != self.target.chow.id() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(self.source.chow.wrap(self.pull(a.coeffs())))
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &Morphism<S>) -> Result<Morphism<S>> {
        if !Arc::ptr_eq(&self.target, &g.source) {
            return Err(Error::Mismatch(format!("{} does not feed {}", self.name, g.name)));
        }
        Ok(Morphism {
            name: format!("{}∘{}", g.name, self.name),
            source: self.source.clone(),
            target: g.target.clone(),
            pullback: self.pullback.mul(&g.pullback),
            proper: self.proper && g.proper,
        })
    }

    /// Ring-homomorphism, grading and projection-formula checks.
    pub fn verify(&self) -> Report {
        let mut rep = Report::new();
        let (x, y) = (&self.source.chow, &self.target.chow);
        let ny = y.dim();
        let images: Vec<Vec<S>> = (0..ny).map(|j| self.pullback.column(j)).collect();
        rep.run("morphism.unit", || (self.pull(y.unit()) != x.unit()).then(|| "f^*1 != 1".to_string()));
        rep.run("morphism.grading", || {
            (0..ny).find(|&j| !x.is_homogeneous(&images[j], y.codim(j))).map(|j| format!("f^*{} not homogeneous", y.name(j)))
        });
        rep.run("morphism.ring_map", || {
            for i in 0..ny {
                for j in i..ny {
                    if y.codim(i) + y.codim(j) > x.top() {
                        continue;
                    }
                    let lhs = self.pull(&crate::exactalg::matrix::dense_from_sparse(y.mul_basis(i, j), ny));
                    let rhs = x.mul_vec(&images[i], &images[j]);
                    if lhs != rhs {
                        return Some(format!("f^*({} {}) != f^*{} f^*{}", y.name(i), y.name(j), y.name(i), y.name(j)));
                    }
                }
            }
            None
        });
        if self.proper {
            rep.run("morphism.projection_formula", || {
                let push = match self.push_matrix() {
                    Ok(p) => p,
                    Err(e) => return Some(e.to_string()),
                };
                let nx = x.dim();
                for i in 0..nx {
                    let fa = push.column(i);
                    for j in 0..ny {
                        let lhs = push.mul_vec(&x.mul_vec(&x.basis_vec(i), &images[j]));
                        let rhs = y.mul_vec(&fa, &y.basis_vec(j));
                        if lhs != rhs {
                            return Some(format!("f_*({} f^*{}) != f_*{} {}", x.name(i), y.name(j), x.name(i), y.name(j)));
                        }
                    }
                }
                None
            });
        }
        rep.prefixed(&self.name)
    }

    /// Whether `f^*` is a ring map (cheap subset of [`Morphism::verify`]).
    pub fn is_ring_map(&self) -> bool {
        let r = self.verify();
        r.find(&format!("{}.morphism.ring_map", self.name)).map(|c| c.passed()).unwrap_or(false)
            && r.find(&format!("{}.morphism.unit", self.name)).map(|c| c.passed()).unwrap_or(false)
    }
}

/// Normal bundle from the Whitney formula `c(N) = i^*c(T_X) / c(T_Y)`.
pub fn whitney_normal<S: Scalar>(i: &Morphism<S>) -> Result<BundleData<S>> {
    let y = &i.source;
    let x = &i.target;
    let rank = x.dim.checked_sub(y.dim).ok_or_else(|| Error::Precondition("source dimension exceeds target".into()))?;
    let inv = y.chow.series_invert_vec(&y.tangent)?;
    let chern = y.chow.mul_vec(&i.pull(&x.tangent), &inv);
    Ok(BundleData { carrier: y.clone(), rank, chern })
}

/// First coordinate where two vectors differ, formatted as a witness.
pub fn vec_witness<S: Scalar>(alg: &GradedAlgebra<S>, a: &[S], b: &[S]) -> Option<String> {
    a.iter().zip(b).position(|(x, y)| x != y).map(|k| format!("coefficient of {}: {} vs {}", alg.name(k), a[k], b[k]))
}

/// `deg(a)` helper usable on raw vectors.
pub fn degree_of<S: Scalar>(x: &Variety<S>, v: &[S]) -> S {
    dot(v, x.chow.degree_functional())
}
