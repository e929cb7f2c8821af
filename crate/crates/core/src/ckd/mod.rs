//! Chow–Künneth decompositions: constructors for products, projective
//! bundles, blow-ups and descents, and the verifier suite.

mod admissible;
mod blowup;
mod descent;
mod projbundle;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::corresp::{Correspondence, Tensor3};
use crate::error::{Error, Result};
use crate::exactalg::{Matrix, Scalar};
use crate::report::Report;
use crate::variety::{DisjointUnion, Morphism, Product, VarRef};

pub use admissible::{blow_up_admissible, validate_admissible, AdmissibleSet, BlownUpSet, Inclusion, Member};
pub use blowup::{ck_blow_up, BlowUpCk};
pub use descent::{ck_descend, DescentCk};
pub use projbundle::{ck_projective_bundle, gamma0, ProjBundleCk};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Standard,
    Product,
    ProjBundle,
    BlowUp,
    Descent,
    Union,
    Manual,
}

/// Projectors `π⁰, …, π^{2d}` of a variety of dimension `d`.
#[derive(Clone, Debug)]
pub struct CKDecomposition<S> {
    pub variety: VarRef<S>,
    pub projectors: Vec<Correspondence<S>>,
    pub provenance: Provenance,
}

impl<S: Scalar> CKDecomposition<S> {
    pub fn new(variety: VarRef<S>, projectors: Vec<Correspondence<S>>, provenance: Provenance) -> Result<Self> {
        if projectors.len() != 2 * variety.dim + 1 {
            return Err(Error::Malformed(format!("expected {} projectors, got {}", 2 * variety.dim + 1, projectors.len())));
        }
        for p in &projectors {
            if !Arc::ptr_eq(&p.source, &variety) || !Arc::ptr_eq(&p.target, &variety) {
                return Err(Error::Mismatch("projector is not a self-correspondence".into()));
            }
        }
        Ok(CKDecomposition { variety, projectors, provenance })
    }

    /// `π^{2p} = Σ_{b ∈ CH^p} b^∨ ⊗ b` for a variety whose Chow ring is its
    /// cohomology.
    pub fn standard(x: &VarRef<S>) -> Self {
        let a = &x.chow;
        let n = a.dim();
        let gi = a.gram_inv();
        let projectors = (0..=2 * x.dim)
            .map(|i| {
                if i % 2 == 1 {
                    return Correspondence::zero(x.clone(), x.clone());
                }
                let p = i / 2;
                let c = Matrix::from_fn(n, n, |r, col| if a.codim(col) == p { gi.get(r, col).clone() } else { S::zero() });
                Correspondence { source: x.clone(), target: x.clone(), coeffs: c }
            })
            .collect();
        CKDecomposition { variety: x.clone(), projectors, provenance: Provenance::Standard }
    }

    pub fn d(&self) -> usize {
        self.variety.dim
    }

    pub fn pi(&self, i: usize) -> &Correspondence<S> {
        &self.projectors[i]
    }

    /// `π^i` or zero when `i` is out of range.
    pub fn pi_or_zero(&self, i: i64) -> Correspondence<S> {
        if i >= 0 && (i as usize) < self.projectors.len() {
            self.projectors[i as usize].clone()
        } else {
            Correspondence::zero(self.variety.clone(), self.variety.clone())
        }
    }

    pub fn operators(&self) -> Vec<Matrix<S>> {
        self.projectors.par_iter().map(|p| p.operator()).collect()
    }

    /// `dim CH^p(X)_s` for every `(p, s)` with a nonzero piece.
    pub fn graded_ranks(&self) -> Vec<(usize, i64, usize)> {
        let a = &self.variety.chow;
        let ops = self.operators();
        let mut out = Vec::new();
        for p in 0..=self.d() {
            let basis = a.basis_in_codim(p);
            if basis.is_empty() {
                continue;
            }
            for (i, op) in ops.iter().enumerate() {
                let cols: Vec<Vec<S>> = basis.iter().map(|&b| op.column(b)).collect();
                let r = Matrix::from_columns(a.dim(), &cols).rank();
                if r > 0 {
                    out.push((p, 2 * p as i64 - i as i64, r));
                }
            }
        }
        out
    }

    /// Ranks per codimension of the grade-0 pieces.
    pub fn grade0_ranks(&self) -> Vec<usize> {
        let mut v = vec![0; self.d() + 1];
        for (p, s, r) in self.graded_ranks() {
            if s == 0 {
                v[p] = r;
            }
        }
        v
    }

    /// Perturb one coefficient of one projector (for negative controls).
    pub fn perturbed(&self, i: usize, row: usize, col: usize, eps: &S) -> Self {
        let mut c = self.clone();
        *c.projectors[i].coeffs.entry_mut(row, col) += eps;
        c
    }
}

/// `π^i_{X×Y} = Σ_{i₁+i₂=i} π_X^{i₁} ⊗ π_Y^{i₂}`.
pub fn ck_product<S: Scalar>(ckx: &CKDecomposition<S>, cky: &CKDecomposition<S>, prod: &Product<S>) -> Result<CKDecomposition<S>> {
    if !Arc::ptr_eq(&prod.left, &ckx.variety) || !Arc::ptr_eq(&prod.right, &cky.variety) {
        return Err(Error::Mismatch("product factors".into()));
    }
    for (name, ck) in [("left", ckx), ("right", cky)] {
        let rep = verify_ck(ck);
        if let Some(f) = rep.failures().first() {
            return Err(Error::Precondition(format!("{name} factor CK fails {}", f.check_id)));
        }
    }
    let (dx, dy) = (ckx.d(), cky.d());
    let x = &prod.variety;
    let projectors = (0..=2 * (dx + dy))
        .into_par_iter()
        .map(|i| {
            let mut acc = Correspondence::zero(x.clone(), x.clone());
            for i1 in 0..=2 * dx {
                if i < i1 || i - i1 > 2 * dy {
                    continue;
                }
                let (a, b) = (&ckx.projectors[i1], &cky.projectors[i - i1]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.tensor(b, prod, prod)?)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    CKDecomposition::new(x.clone(), projectors, Provenance::Product)
}

/// Block-diagonal decomposition of a disjoint union.
pub fn ck_disjoint_union<S: Scalar>(u: &DisjointUnion<S>, cks: &[CKDecomposition<S>]) -> Result<CKDecomposition<S>> {
    if cks.len() != u.components.len() {
        return Err(Error::Mismatch("one decomposition per component".into()));
    }
    let x = &u.variety;
    let n = x.n();
    let projectors = (0..=2 * x.dim)
        .map(|i| {
            let mut c = Matrix::zeros(n, n);
            for (k, ck) in cks.iter().enumerate() {
                if !Arc::ptr_eq(&ck.variety, &u.components[k]) {
                    return Err(Error::Mismatch("component decomposition".into()));
                }
                let o = u.offsets[k];
                let m = &ck.projectors[i].coeffs;
                for r in 0..m.rows() {
                    for s in 0..m.cols() {
                        c.set(o + r, o + s, m.get(r, s).clone());
                    }
                }
            }
            Ok(Correspondence { source: x.clone(), target: x.clone(), coeffs: c })
        })
        .collect::<Result<Vec<_>>>()?;
    CKDecomposition::new(x.clone(), projectors, Provenance::Union)
}

fn first_entry_witness<S: Scalar>(m: &Matrix<S>) -> String {
    match m.first_nonzero() {
        Some((i, j, v)) => format!("entry ({i},{j}) = {v}"),
        None => "zero".into(),
    }
}

/// Projector axioms, self-duality and the Künneth lift.
pub fn verify_ck<S: Scalar>(ck: &CKDecomposition<S>) -> Report {
    let mut rep = Report::new();
    let x = &ck.variety;
    let n = x.n();
    let d = ck.d();
    let pis = &ck.projectors;
    rep.run("ck.sum", || {
        let mut s = Matrix::zeros(n, n);
        for p in pis {
            s = s.add(&p.coeffs);
        }
        let diff = s.sub(x.chow.gram_inv());
        (!diff.is_zero()).then(|| format!("Σπ − Δ: {}", first_entry_witness(&diff)))
    });
    let products: Vec<(usize, usize, Option<String>)> = (0..pis.len())
        .flat_map(|i| (0..pis.len()).map(move |j| (i, j)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, j)| {
            let c = match pis[i].then(&pis[j]) {
                Ok(c) => c,
                Err(e) => return (i, j, Some(e.to_string())),
            };
            let expect = if i == j { pis[i].coeffs.clone() } else { Matrix::zeros(n, n) };
            let diff = c.coeffs.sub(&expect);
            (i, j, (!diff.is_zero()).then(|| first_entry_witness(&diff)))
        })
        .collect();
    rep.run("ck.idempotent", || {
        products.iter().find(|(i, j, w)| i == j && w.is_some()).map(|(i, _, w)| format!("π^{i}∘π^{i} != π^{i}: {}", w.as_ref().unwrap()))
    });
    rep.run("ck.orthogonal", || {
        products.iter().find(|(i, j, w)| i != j && w.is_some()).map(|(i, j, w)| format!("π^{j}∘π^{i} != 0: {}", w.as_ref().unwrap()))
    });
    rep.run("ck.self_dual", || {
        (0..=2 * d).find_map(|i| {
            let diff = pis[i].transpose().coeffs.sub(&pis[2 * d - i].coeffs);
            (!diff.is_zero()).then(|| format!("ᵗπ^{i} != π^{}: {}", 2 * d - i, first_entry_witness(&diff)))
        })
    });
    rep.run("ck.odd_vanish", || (0..=2 * d).filter(|i| i % 2 == 1).find(|&i| !pis[i].is_zero()).map(|i| format!("π^{i} != 0")));
    rep.run("ck.kunneth_lift", || {
        let a = &x.chow;
        for p in 0..=d {
            for &b in a.basis_in_codim(p) {
                let v = a.basis_vec(b);
                let img = pis[2 * p].act(&v);
                if img != v {
                    return Some(format!("π^{} does not fix {}", 2 * p, a.name(b)));
                }
            }
        }
        None
    });
    rep
}

/// `(π^k ⊗ π^i ⊗ π^j)_*Δ₁₂₃ = 0` whenever `i + j + k ≠ 4d`, together with the
/// ring-grading property of the induced bigrading.
pub fn verify_multiplicative<S: Scalar>(ck: &CKDecomposition<S>) -> Report {
    let mut rep = Report::new();
    let d = ck.d();
    let ops = ck.operators();
    let live: Vec<usize> = (0..ops.len()).filter(|&i| !ops[i].is_zero()).collect();
    let delta = Tensor3::small_diagonal(&ck.variety);
    rep.run("mult.small_diagonal", || {
        let witnesses: Vec<String> = live
            .par_iter()
            .filter_map(|&k| {
                let scan = || -> Result<Option<String>> {
                    let t1 = delta.apply(0, &ops[k], ck.variety.clone())?;
                    for &i in &live {
                        let t2 = t1.apply(1, &ops[i], ck.variety.clone())?;
                        if t2.is_zero() {
                            continue;
                        }
                        for &j in &live {
                            if i + j + k == 4 * d {
                                continue;
                            }
                            let t3 = t2.apply(2, &ops[j], ck.variety.clone())?;
                            if let Some((key, v)) = t3.first_nonzero() {
                                return Ok(Some(format!("(π^{k}⊗π^{i}⊗π^{j})_*Δ₁₂₃ has coefficient {v} at {key:?}")));
                            }
                        }
                    }
                    Ok(None)
                };
                scan().unwrap_or_else(|e| Some(e.to_string()))
            })
            .collect();
        witnesses.into_iter().next()
    });
    rep.run("mult.ring_grading", || {
        let a = &ck.variety.chow;
        // Basis of each graded piece CH^p_s as images of π^{2p−s}.
        let mut pieces: Vec<(usize, i64, Vec<Vec<S>>)> = Vec::new();
        for p in 0..=d {
            for (i, op) in ops.iter().enumerate() {
                let cols: Vec<Vec<S>> = a.basis_in_codim(p).iter().map(|&b| op.column(b)).collect();
                let m = Matrix::from_columns(a.dim(), &cols);
                let keep: Vec<Vec<S>> = m.column_basis().into_iter().map(|c| cols[c].clone()).collect();
                if !keep.is_empty() {
                    pieces.push((p, 2 * p as i64 - i as i64, keep));
                }
            }
        }
        for (p, s, u) in &pieces {
            for (q, t, v) in &pieces {
                if p + q > d {
                    continue;
                }
                let target = 2 * (p + q) as i64 - (s + t);
                for x in u {
                    for y in v {
                        let xy = a.mul_vec(x, y);
                        let proj = if target >= 0 && (target as usize) < ops.len() { ops[target as usize].mul_vec(&xy) } else { a.zero_vec() };
                        if proj != xy {
                            return Some(format!("CH^{p}_{s} · CH^{q}_{t} leaves CH^{}_{}", p + q, s + t));
                        }
                    }
                }
            }
        }
        None
    });
    rep
}

/// `c_p(X) ∈ CH^p(X)_0` for all `p`.
pub fn verify_chern_grade<S: Scalar>(ck: &CKDecomposition<S>) -> Report {
    let mut rep = Report::new();
    let x = &ck.variety;
    rep.run("chern.grade0", || chern_grade_defect(ck, &x.tangent));
    rep
}

/// First witness that a total class is not of grade 0.
pub fn chern_grade_defect<S: Scalar>(ck: &CKDecomposition<S>, c: &[S]) -> Option<String> {
    let a = &ck.variety.chow;
    for p in 0..=ck.d() {
        let cp = a.component(c, p);
        if cp.iter().all(|v| v.is_zero()) {
            continue;
        }
        for (i, pi) in ck.projectors.iter().enumerate() {
            let img = pi.act(&cp);
            let expect = if i == 2 * p { cp.clone() } else { a.zero_vec() };
            if img != expect {
                return Some(format!("π^{i} acts nontrivially on the codimension-{p} part"));
            }
        }
    }
    None
}

/// Grade-0 test for a morphism: its graph is pure of grade 0.
pub fn morphism_grade0<S: Scalar>(f: &Morphism<S>, ck_src: &CKDecomposition<S>, ck_tgt: &CKDecomposition<S>) -> Result<Option<String>> {
    let g = Correspondence::graph(f);
    let grades = g.grades(&ck_src.projectors, &ck_tgt.projectors)?;
    Ok((!(grades.is_empty() || grades == [0])).then(|| format!("graph of {} has grades {grades:?}", f.name)))
}

/// Full suite: projector axioms, multiplicativity and Chern grade.
pub fn verify_all<S: Scalar>(ck: &CKDecomposition<S>) -> Report {
    let mut rep = verify_ck(ck);
    rep.extend(verify_multiplicative(ck));
    rep.extend(verify_chern_grade(ck));
    rep.prefixed(&ck.variety.name)
}
