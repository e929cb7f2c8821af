use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::matrix::{dense_from_sparse, dot, Matrix, SparseVec};
use super::scalar::Scalar;
use crate::error::{Error, Result};
use crate::report::Report;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Associativity is scanned by default below this many basis elements.
pub const ASSOC_SCAN_LIMIT: usize = 200;

/// Finite graded commutative algebra with a degree functional on the top
/// codimension, e.g. the Chow ring of a smooth projective cellular variety.
#[derive(Clone, Debug)]
pub struct GradedAlgebra<S> {
    id: u64,
    names: Vec<String>,
    codims: Vec<usize>,
    top: usize,
    table: Vec<SparseVec<S>>,
    unit: Vec<S>,
    degree: Vec<S>,
    by_codim: Vec<Vec<usize>>,
    gram: Matrix<S>,
    gram_inv: Matrix<S>,
}

/// Element of a specific [`GradedAlgebra`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradedClass<S> {
    alg: u64,
    coeffs: Vec<S>,
}

impl<S: Scalar> GradedClass<S> {
    pub fn algebra_id(&self) -> u64 {
        self.alg
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.alg != other.alg {
            Err(Error::AlgebraMismatch)
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(GradedClass { alg: self.alg, coeffs: add_vec(&self.coeffs, &other.coeffs) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(GradedClass { alg: self.alg, coeffs: sub_vec(&self.coeffs, &other.coeffs) })
    }

    pub fn scale(&self, s: &S) -> Self {
        GradedClass { alg: self.alg, coeffs: scale_vec(&self.coeffs, s) }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }
}

pub fn add_vec<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn sub_vec<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn scale_vec<S: Scalar>(a: &[S], s: &S) -> Vec<S> {
    a.iter().map(|x| x.times(s)).collect()
}

pub fn axpy<S: Scalar>(acc: &mut [S], s: &S, x: &[S]) {
    if s.is_zero() {
        return;
    }
    for (a, v) in acc.iter_mut().zip(x) {
        a.add_product(s, v);
    }
}

impl<S: Scalar> GradedAlgebra<S> {
    /// Build an algebra from its full multiplication table (`table[i * n + j]`
    /// holds `b_i · b_j`). Fails if the pairing is not perfect.
    pub fn new(
        names: Vec<String>,
        codims: Vec<usize>,
        top: usize,
        table: Vec<SparseVec<S>>,
        unit: Vec<S>,
        degree: Vec<S>,
    ) -> Result<Self> {
        let n = names.len();
        if codims.len() != n || table.len() != n * n || unit.len() != n || degree.len() != n {
            return Err(Error::Malformed("inconsistent table sizes".into()));
        }
        if let Some(i) = codims.iter().position(|&c| c > top) {
            return Err(Error::Malformed(format!("basis element {} exceeds top codimension", names[i])));
        }
        let mut by_codim = vec![Vec::new(); top + 1];
        for (i, &c) in codims.iter().enumerate() {
            by_codim[c].push(i);
        }
        let mut alg = GradedAlgebra {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            names,
            codims,
            top,
            table,
            unit,
            degree,
            by_codim,
            gram: Matrix::zeros(0, 0),
            gram_inv: Matrix::zeros(0, 0),
        };
        let gram = Matrix::from_fn(n, n, |i, j| alg.degree_of_sparse(&alg.table[i * n + j]));
        let mut gram_inv = Matrix::zeros(n, n);
        for p in 0..=top {
            let rows = &alg.by_codim[p];
            let cols = &alg.by_codim[top - p];
            if rows.len() != cols.len() {
                return Err(Error::Malformed(format!(
                    "pairing between codimensions {p} and {} is not square ({} vs {})",
                    top - p,
                    rows.len(),
                    cols.len()
                )));
            }
            if rows.is_empty() {
                continue;
            }
            let block = gram.submatrix(rows, cols);
            let inv = block.inverse().map_err(|_| Error::Malformed(format!("pairing is singular in codimension {p}")))?;
            for (a, &c) in cols.iter().enumerate() {
                for (b, &r) in rows.iter().enumerate() {
                    gram_inv.set(c, r, inv.get(a, b).clone());
                }
            }
        }
        alg.gram = gram;
        alg.gram_inv = gram_inv;
        Ok(alg)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn codims(&self) -> &[usize] {
        &self.codims
    }

    pub fn codim(&self, i: usize) -> usize {
        self.codims[i]
    }

    pub fn basis_in_codim(&self, p: usize) -> &[usize] {
        if p > self.top {
            &[]
        } else {
            &self.by_codim[p]
        }
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.by_codim.iter().map(Vec::len).collect()
    }

    pub fn unit(&self) -> &[S] {
        &self.unit
    }

    pub fn degree_functional(&self) -> &[S] {
        &self.degree
    }

    pub fn gram(&self) -> &Matrix<S> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &Matrix<S> {
        &self.gram_inv
    }

    pub fn mul_basis(&self, i: usize, j: usize) -> &SparseVec<S> {
        &self.table[i * self.dim() + j]
    }

    pub fn table(&self) -> &[SparseVec<S>] {
        &self.table
    }

    fn degree_of_sparse(&self, v: &SparseVec<S>) -> S {
        let mut acc = S::zero();
        for (k, x) in v {
            acc.add_product(x, &self.degree[*k]);
        }
        acc
    }

    // ---- classes ----

    pub fn class(&self, coeffs: Vec<S>) -> Result<GradedClass<S>> {
        if coeffs.len() != self.dim() {
            return Err(Error::Mismatch(format!("class has {} coefficients, algebra has {}", coeffs.len(), self.dim())));
        }
        Ok(GradedClass { alg: self.id, coeffs })
    }

    pub fn wrap(&self, coeffs: Vec<S>) -> GradedClass<S> {
        assert_eq!(coeffs.len(), self.dim(), "class length");
        GradedClass { alg: self.id, coeffs }
    }

    pub fn basis_class(&self, i: usize) -> GradedClass<S> {
        self.wrap(self.basis_vec(i))
    }

    pub fn basis_vec(&self, i: usize) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim()];
        v[i] = S::one();
        v
    }

    pub fn zero_vec(&self) -> Vec<S> {
        vec![S::zero(); self.dim()]
    }

    pub fn one(&self) -> GradedClass<S> {
        self.wrap(self.unit.clone())
    }

    fn own(&self, a: &GradedClass<S>) -> Result<()> {
        if a.alg != self.id {
            Err(Error::AlgebraMismatch)
        } else {
            Ok(())
        }
    }

    pub fn mul(&self, a: &GradedClass<S>, b: &GradedClass<S>) -> Result<GradedClass<S>> {
        self.own(a)?;
        self.own(b)?;
        Ok(self.wrap(self.mul_vec(&a.coeffs, &b.coeffs)))
    }

    pub fn degree(&self, a: &GradedClass<S>) -> Result<S> {
        self.own(a)?;
        Ok(self.degree_vec(&a.coeffs))
    }

    pub fn pairing(&self, a: &GradedClass<S>, b: &GradedClass<S>) -> Result<S> {
        self.own(a)?;
        self.own(b)?;
        Ok(self.pair_vec(&a.coeffs, &b.coeffs))
    }

    /// Poincaré-dual basis of codimension `p`: `⟨b_i, b_i^∨⟩ = 1`, zero otherwise.
    pub fn pairing_dual_basis(&self, p: usize) -> Vec<(usize, GradedClass<S>)> {
        self.basis_in_codim(p)
            .iter()
            .map(|&i| (i, self.wrap(self.gram_inv.column(i))))
            .collect()
    }

    // ---- raw vectors ----

    pub fn mul_vec(&self, a: &[S], b: &[S]) -> Vec<S> {
        let n = self.dim();
        let mut out = vec![S::zero(); n];
        let bnz: Vec<usize> = (0..n).filter(|&j| !b[j].is_zero()).collect();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &j in &bnz {
                let xy = x.times(&b[j]);
                for (k, c) in &self.table[i * n + j] {
                    out[*k].add_product(&xy, c);
                }
            }
        }
        out
    }

    pub fn degree_vec(&self, a: &[S]) -> S {
        dot(a, &self.degree)
    }

    pub fn pair_vec(&self, a: &[S], b: &[S]) -> S {
        dot(a, &self.gram.mul_vec(b))
    }

    pub fn pow_vec(&self, a: &[S], k: usize) -> Vec<S> {
        let mut acc = self.unit.clone();
        for _ in 0..k {
            acc = self.mul_vec(&acc, a);
        }
        acc
    }

    /// Homogeneous component of codimension `p`.
    pub fn component(&self, a: &[S], p: usize) -> Vec<S> {
        let mut out = self.zero_vec();
        for &i in self.basis_in_codim(p) {
            out[i] = a[i].clone();
        }
        out
    }

    /// Drop components of codimension above `p`.
    pub fn truncate(&self, a: &[S], p: usize) -> Vec<S> {
        a.iter().enumerate().map(|(i, x)| if self.codims[i] <= p { x.clone() } else { S::zero() }).collect()
    }

    /// Coefficient of the unit in a codimension-0 component.
    pub fn constant_term(&self, a: &[S]) -> S {
        let c0 = self.component(a, 0);
        let unit_pos = self.unit.iter().position(|u| !u.is_zero());
        match unit_pos {
            Some(k) => c0[k].clone() / self.unit[k].clone(),
            None => S::zero(),
        }
    }

    pub fn is_homogeneous(&self, a: &[S], p: usize) -> bool {
        a.iter().enumerate().all(|(i, x)| x.is_zero() || self.codims[i] == p)
    }

    /// Matrix of multiplication by `a` (column `j` is `a · b_j`).
    pub fn mult_operator(&self, a: &[S]) -> Matrix<S> {
        let cols: Vec<Vec<S>> = (0..self.dim()).map(|j| self.mul_vec(a, &self.basis_vec(j))).collect();
        Matrix::from_columns(self.dim(), &cols)
    }

    /// `deg(b_i · b_j · b_k)`.
    pub fn triple_degree(&self, i: usize, j: usize, k: usize) -> S {
        let n = self.dim();
        let mut acc = S::zero();
        for (m, c) in &self.table[i * n + j] {
            acc.add_product(c, self.gram.get(*m, k));
        }
        acc
    }

    /// Express a vector in the basis of the subspace spanned by `basis`
    /// (columns); `None` if it is not in the span.
    pub fn solve_in_span(basis: &Matrix<S>, v: &[S]) -> Option<Vec<S>> {
        basis.solve(v)
    }

    // ---- verification ----

    /// Exhaustive axiom scan. Associativity is cubic and therefore optional.
    pub fn verify(&self, associativity: bool) -> Report {
        let n = self.dim();
        let mut rep = Report::new();
        rep.run("algebra.commutative", || {
            for i in 0..n {
                for j in (i + 1)..n {
                    if self.table[i * n + j] != self.table[j * n + i] {
                        return Some(format!("{} * {} != {} * {}", self.names[i], self.names[j], self.names[j], self.names[i]));
                    }
                }
            }
            None
        });
        rep.run("algebra.graded", || {
            for i in 0..n {
                for j in 0..n {
                    let p = self.codims[i] + self.codims[j];
                    if let Some((k, _)) = self.table[i * n + j].iter().find(|(k, _)| self.codims[*k] != p) {
                        return Some(format!("{} * {} has a term {} of wrong codimension", self.names[i], self.names[j], self.names[*k]));
                    }
                }
            }
            None
        });
        rep.run("algebra.unit", || {
            if !self.is_homogeneous(&self.unit, 0) {
                return Some("unit is not of codimension 0".into());
            }
            for j in 0..n {
                let e = self.basis_vec(j);
                if self.mul_vec(&self.unit, &e) != e {
                    return Some(format!("1 * {} != {}", self.names[j], self.names[j]));
                }
            }
            None
        });
        rep.run("algebra.degree_support", || {
            self.degree
                .iter()
                .enumerate()
                .find(|(i, d)| !d.is_zero() && self.codims[*i] != self.top)
                .map(|(i, _)| format!("degree is nonzero on {} below top codimension", self.names[i]))
        });
        rep.run("algebra.perfect_pairing", || {
            for p in 0..=self.top {
                let rows = &self.by_codim[p];
                let cols = &self.by_codim[self.top - p];
                if rows.len() != cols.len() || (!rows.is_empty() && self.gram.submatrix(rows, cols).rank() != rows.len()) {
                    return Some(format!("pairing degenerate in codimension {p}"));
                }
            }
            None
        });
        if associativity {
            rep.run("algebra.associative", || {
                (0..n).into_par_iter().find_map_first(|i| {
                    for j in 0..n {
                        let ij = dense_from_sparse(&self.table[i * n + j], n);
                        for k in 0..n {
                            if self.codims[i] + self.codims[j] + self.codims[k] > self.top {
                                continue;
                            }
                            let left = self.mul_vec(&ij, &self.basis_vec(k));
                            let jk = dense_from_sparse(&self.table[j * n + k], n);
                            let right = self.mul_vec(&self.basis_vec(i), &jk);
                            if left != right {
                                return Some(format!("({} {}) {} != {} ({} {})", self.names[i], self.names[j], self.names[k], self.names[i], self.names[j], self.names[k]));
                            }
                        }
                    }
                    None
                })
            });
        }
        rep
    }

    pub fn verify_default(&self) -> Report {
        self.verify(self.dim() < ASSOC_SCAN_LIMIT)
    }

    /// Human-readable rendering of a class.
    pub fn format(&self, a: &[S]) -> String {
        let terms: Vec<String> = a
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| format!("{x}*{}", self.names[i]))
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// Incremental construction of a multiplication table.
pub struct AlgebraBuilder<S> {
    pub names: Vec<String>,
    pub codims: Vec<usize>,
    pub top: usize,
    pub table: Vec<SparseVec<S>>,
}

impl<S: Scalar> AlgebraBuilder<S> {
    pub fn new(names: Vec<String>, codims: Vec<usize>, top: usize) -> Self {
        let n = names.len();
        AlgebraBuilder { names, codims, top, table: vec![Vec::new(); n * n] }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    /// Fill the table from a symmetric product function, computing each
    /// unordered pair once (in parallel).
    pub fn fill(&mut self, f: impl Fn(usize, usize) -> Vec<S> + Sync) {
        let n = self.n();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let codims = &self.codims;
        let top = self.top;
        let results: Vec<((usize, usize), SparseVec<S>)> = pairs
            .into_par_iter()
            .map(|(i, j)| {
                if codims[i] + codims[j] > top {
                    ((i, j), Vec::new())
                } else {
                    ((i, j), super::matrix::sparse_from_dense(&f(i, j)))
                }
            })
            .collect();
        for ((i, j), v) in results {
            self.table[j * n + i] = v.clone();
            self.table[i * n + j] = v;
        }
    }

    pub fn finish(self, unit: Vec<S>, degree: Vec<S>) -> Result<GradedAlgebra<S>> {
        GradedAlgebra::new(self.names, self.codims, self.top, self.table, unit, degree)
    }
}
