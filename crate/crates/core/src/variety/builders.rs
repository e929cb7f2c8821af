use std::sync::Arc;

use super::{BundleData, Morphism, Recipe, VarRef, Variety};
use crate::error::{Error, Result};
use crate::exactalg::{axpy, AlgebraBuilder, GradedAlgebra, Matrix, Scalar};
use crate::report::Report;

pub fn build_point<S: Scalar>() -> VarRef<S> {
    let alg = GradedAlgebra::new(vec!["1".into()], vec![0], 0, vec![vec![(0, S::one())]], vec![S::one()], vec![S::one()])
        .expect("point algebra");
    Arc::new(Variety {
        name: "pt".into(),
        dim: 0,
        chow: Arc::new(alg),
        tangent: vec![S::one()],
        point: vec![S::one()],
        recipe: Recipe::Point,
    })
}

/// `Pⁿ` with basis `1, h, …, hⁿ`.
pub fn build_projective_space<S: Scalar>(n: usize) -> VarRef<S> {
    let names: Vec<String> = (0..=n)
        .map(|k| match k {
            0 => "1".to_string(),
            1 => "h".to_string(),
            _ => format!("h^{k}"),
        })
        .collect();
    let mut b = AlgebraBuilder::new(names, (0..=n).collect(), n);
    b.fill(|i, j| {
        let mut v = vec![S::zero(); n + 1];
        if i + j <= n {
            v[i + j] = S::one();
        }
        v
    });
    let mut degree = vec![S::zero(); n + 1];
    degree[n] = S::one();
    let mut unit = vec![S::zero(); n + 1];
    unit[0] = S::one();
    let alg = b.finish(unit, degree.clone()).expect("projective space algebra");
    // c(T) = (1 + h)^{n+1}
    let tangent: Vec<S> = (0..=n).map(|k| crate::exactalg::binomial(&S::from_int(n as i64 + 1), k)).collect();
    Arc::new(Variety {
        name: format!("P{n}"),
        dim: n,
        chow: Arc::new(alg),
        tangent,
        point: degree,
        recipe: Recipe::ProjectiveSpace(n),
    })
}

/// `X × Y` with its projections.
#[derive(Clone, Debug)]
pub struct Product<S> {
    pub variety: VarRef<S>,
    pub left: VarRef<S>,
    pub right: VarRef<S>,
    pub p1: Morphism<S>,
    pub p2: Morphism<S>,
}

impl<S: Scalar> Product<S> {
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.right.n() + k
    }

    /// `a ⊗ b`.
    pub fn tensor(&self, a: &[S], b: &[S]) -> Vec<S> {
        tensor_vec(a, b)
    }
}

pub fn tensor_vec<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(if x.is_zero() || y.is_zero() { S::zero() } else { x.times(y) });
        }
    }
    out
}

pub fn build_product<S: Scalar>(x: &VarRef<S>, y: &VarRef<S>) -> Product<S> {
    let (nx, ny) = (x.n(), y.n());
    let (ax, ay) = (&x.chow, &y.chow);
    let mut names = Vec::with_capacity(nx * ny);
    let mut codims = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for k in 0..ny {
            names.push(format!("{}⊗{}", ax.name(i), ay.name(k)));
            codims.push(ax.codim(i) + ay.codim(k));
        }
    }
    let mut b = AlgebraBuilder::new(names, codims, x.dim + y.dim);
    b.fill(|p, q| {
        let (i, k) = (p / ny, p % ny);
        let (j, l) = (q / ny, q % ny);
        let mut v = vec![S::zero(); nx * ny];
        for (m, c) in ax.mul_basis(i, j) {
            for (n, d) in ay.mul_basis(k, l) {
                v[m * ny + n].add_product(c, d);
            }
        }
        v
    });
    let alg = b
        .finish(tensor_vec(ax.unit(), ay.unit()), tensor_vec(ax.degree_functional(), ay.degree_functional()))
        .expect("product algebra");
    let variety = Arc::new(Variety {
        name: format!("{}x{}", x.name, y.name),
        dim: x.dim + y.dim,
        chow: Arc::new(alg),
        tangent: tensor_vec(&x.tangent, &y.tangent),
        point: tensor_vec(&x.point, &y.point),
        recipe: Recipe::Product(x.clone(), y.clone()),
    });
    let p1 = Matrix::from_fn(nx * ny, nx, |p, i| if p / ny == i { ay.unit()[p % ny].clone() } else { S::zero() });
    let p2 = Matrix::from_fn(nx * ny, ny, |p, k| if p % ny == k { ax.unit()[p / ny].clone() } else { S::zero() });
    Product {
        p1: Morphism::new("p1", variety.clone(), x.clone(), p1).expect("p1"),
        p2: Morphism::new("p2", variety.clone(), y.clone(), p2).expect("p2"),
        variety,
        left: x.clone(),
        right: y.clone(),
    }
}

/// `P(E)`: lines in `E`, with `ξ = c₁(O(1))` and
/// `ξ^{r+1} + c₁ξ^r + … + c_{r+1} = 0`.
#[derive(Clone, Debug)]
pub struct ProjectiveBundle<S> {
    pub variety: VarRef<S>,
    pub base: VarRef<S>,
    pub bundle: BundleData<S>,
    /// Fibre dimension `r` (bundle rank `r + 1`).
    pub r: usize,
    pub pi: Morphism<S>,
    pub xi: Vec<S>,
}

impl<S: Scalar> ProjectiveBundle<S> {
    pub fn index(&self, a: usize, beta: usize) -> usize {
        a * self.base.n() + beta
    }

    /// Collapse `Σ_m ξ^m π^*γ_m` (any `m`) into the basis.
    pub fn reduce(&self, mut parts: Vec<Vec<S>>) -> Vec<S> {
        reduce_powers(&self.base.chow, &self.bundle.chern, self.r, &mut parts)
    }

    /// `ξ^a · π^*β` for an arbitrary base class `β`.
    pub fn xi_pow_times(&self, a: usize, beta: &[S]) -> Vec<S> {
        let mut parts = vec![vec![S::zero(); self.base.n()]; a + 1];
        parts[a] = beta.to_vec();
        self.reduce(parts)
    }

    /// Ring map out of `CH(P(E))` determined by a ring map on the base and the
    /// image of `ξ`. Returns the `n_target × n_P` matrix.
    pub fn ring_map(&self, target: &GradedAlgebra<S>, base_map: &Matrix<S>, xi_image: &[S]) -> Matrix<S> {
        let nb = self.base.n();
        let mut cols = Vec::with_capacity(self.variety.n());
        let mut pow = target.unit().to_vec();
        for _a in 0..=self.r {
            for beta in 0..nb {
                cols.push(target.mul_vec(&pow, &base_map.column(beta)));
            }
            pow = target.mul_vec(&pow, xi_image);
        }
        Matrix::from_columns(target.dim(), &cols)
    }

    /// `π_*` on a class of `P(E)`, via `π_*ξ^{r+k} = s_k`.
    pub fn push_to_base(&self, v: &[S]) -> Result<Vec<S>> {
        self.pi.push(v)
    }
}

pub(crate) fn reduce_powers<S: Scalar>(base: &GradedAlgebra<S>, chern: &[S], r: usize, parts: &mut [Vec<S>]) -> Vec<S> {
    let nb = base.dim();
    let cs: Vec<Vec<S>> = (0..=r + 1).map(|k| base.component(chern, k)).collect();
    let mut m = parts.len();
    while m > r + 1 {
        m -= 1;
        let g = std::mem::replace(&mut parts[m], vec![S::zero(); nb]);
        if g.iter().all(|x| x.is_zero()) {
            continue;
        }
        for k in 1..=r + 1 {
            let t = base.mul_vec(&cs[k], &g);
            let dst = &mut parts[m - k];
            for (d, x) in dst.iter_mut().zip(&t) {
                if !x.is_zero() {
                    *d -= x;
                }
            }
        }
    }
    let mut out = vec![S::zero(); nb * (r + 1)];
    for (a, p) in parts.iter().enumerate().take(r + 1) {
        for (b, x) in p.iter().enumerate() {
            out[a * nb + b] = x.clone();
        }
    }
    out
}

pub fn build_projective_bundle<S: Scalar>(e: &BundleData<S>) -> Result<ProjectiveBundle<S>> {
    if e.rank == 0 {
        return Err(Error::Precondition("projective bundle of a rank-0 bundle".into()));
    }
    let base = e.carrier.clone();
    let r = e.rank - 1;
    let nb = base.n();
    let ab = &base.chow;
    let mut names = Vec::new();
    let mut codims = Vec::new();
    for a in 0..=r {
        for beta in 0..nb {
            names.push(match a {
                0 => ab.name(beta).to_string(),
                1 => format!("xi*{}", ab.name(beta)),
                _ => format!("xi^{a}*{}", ab.name(beta)),
            });
            codims.push(a + ab.codim(beta));
        }
    }
    let top = base.dim + r;
    let mut b = AlgebraBuilder::new(names, codims, top);
    b.fill(|p, q| {
        let (a1, b1) = (p / nb, p % nb);
        let (a2, b2) = (q / nb, q % nb);
        let mut parts = vec![vec![S::zero(); nb]; a1 + a2 + 1];
        parts[a1 + a2] = crate::exactalg::matrix::dense_from_sparse(ab.mul_basis(b1, b2), nb);
        reduce_powers(ab, &e.chern, r, &mut parts)
    });
    let mut unit = vec![S::zero(); nb * (r + 1)];
    unit[..nb].clone_from_slice(ab.unit());
    let mut degree = vec![S::zero(); nb * (r + 1)];
    degree[r * nb..].clone_from_slice(ab.degree_functional());
    let alg = Arc::new(b.finish(unit, degree)?);
    let pi_mat = Matrix::from_fn(nb * (r + 1), nb, |p, beta| if p == beta { S::one() } else { S::zero() });
    let mut xi = vec![S::zero(); nb * (r + 1)];
    if r >= 1 {
        for (beta, u) in ab.unit().iter().enumerate() {
            xi[nb + beta] = u.clone();
        }
    } else {
        // P(L) = base and O(1) = L^∨.
        for (k, c) in ab.component(&e.chern, 1).iter().enumerate() {
            xi[k] = -c.clone();
        }
    }
    // c(T_P) = π^*c(T_X) · c(π^*E ⊗ O(1)).
    let pull = |v: &[S]| pi_mat.mul_vec(v);
    let ce = pull(&e.chern);
    let rel = alg.twist_chern_vec((r + 1) as i64, &ce, &xi)?;
    let tangent = alg.mul_vec(&pull(&base.tangent), &rel);
    let mut point = vec![S::zero(); nb * (r + 1)];
    point[r * nb..].clone_from_slice(&base.point);
    let variety = Arc::new(Variety {
        name: format!("P({})", base.name),
        dim: top,
        chow: alg,
        tangent,
        point,
        recipe: Recipe::ProjectiveBundle { base: base.clone(), rank: e.rank, chern: e.chern.clone() },
    });
    let pi = Morphism::new("pi", variety.clone(), base.clone(), pi_mat)?;
    Ok(ProjectiveBundle { variety, base, bundle: e.clone(), r, pi, xi })
}

/// Disjoint union of equidimensional varieties.
#[derive(Clone, Debug)]
pub struct DisjointUnion<S> {
    pub variety: VarRef<S>,
    pub components: Vec<VarRef<S>>,
    pub offsets: Vec<usize>,
    /// Inclusion of each component.
    pub inclusions: Vec<Morphism<S>>,
}

impl<S: Scalar> DisjointUnion<S> {
    /// Concatenate per-component classes.
    pub fn stack(&self, parts: &[Vec<S>]) -> Vec<S> {
        parts.iter().flatten().cloned().collect()
    }

    /// Stack per-component ring maps `CH(X) → CH(Y_k)` into `CH(X) → CH(⊔Y_k)`.
    pub fn stack_maps(&self, maps: &[Matrix<S>]) -> Matrix<S> {
        let cols = maps[0].cols();
        let n = self.variety.n();
        let mut m = Matrix::zeros(n, cols);
        for (k, mk) in maps.iter().enumerate() {
            for i in 0..mk.rows() {
                for j in 0..cols {
                    m.set(self.offsets[k] + i, j, mk.get(i, j).clone());
                }
            }
        }
        m
    }

    pub fn block<'a>(&self, v: &'a [S], k: usize) -> &'a [S] {
        &v[self.offsets[k]..self.offsets[k] + self.components[k].n()]
    }

    /// Block-diagonal map from per-component maps.
    pub fn block_diagonal(&self, maps: &[Matrix<S>]) -> Matrix<S> {
        let n = self.variety.n();
        let mut m = Matrix::zeros(n, n);
        for (k, mk) in maps.iter().enumerate() {
            for i in 0..mk.rows() {
                for j in 0..mk.cols() {
                    m.set(self.offsets[k] + i, self.offsets[k] + j, mk.get(i, j).clone());
                }
            }
        }
        m
    }
}

pub fn build_disjoint_union<S: Scalar>(name: &str, parts: &[VarRef<S>]) -> Result<DisjointUnion<S>> {
    if parts.is_empty() {
        return Err(Error::Precondition("empty disjoint union".into()));
    }
    let dim = parts[0].dim;
    if parts.iter().any(|p| p.dim != dim) {
        return Err(Error::Precondition("components of different dimension".into()));
    }
    let mut offsets = Vec::new();
    let mut names = Vec::new();
    let mut codims = Vec::new();
    let mut n = 0;
    for (k, p) in parts.iter().enumerate() {
        offsets.push(n);
        n += p.n();
        for i in 0..p.n() {
            names.push(format!("[{k}]{}", p.chow.name(i)));
            codims.push(p.chow.codim(i));
        }
    }
    let mut table = vec![Vec::new(); n * n];
    for (k, p) in parts.iter().enumerate() {
        let o = offsets[k];
        for i in 0..p.n() {
            for j in 0..p.n() {
                table[(o + i) * n + o + j] = p.chow.mul_basis(i, j).iter().map(|(m, c)| (m + o, c.clone())).collect();
            }
        }
    }
    let cat = |f: &dyn Fn(&Variety<S>) -> Vec<S>| -> Vec<S> { parts.iter().flat_map(|p| f(p)).collect() };
    let unit = cat(&|p| p.chow.unit().to_vec());
    let degree = cat(&|p| p.chow.degree_functional().to_vec());
    let tangent = cat(&|p| p.tangent.clone());
    let mut point = vec![S::zero(); n];
    point[..parts[0].n()].clone_from_slice(&parts[0].point);
    let alg = GradedAlgebra::new(names, codims, dim, table, unit, degree)?;
    let variety = Arc::new(Variety {
        name: name.to_string(),
        dim,
        chow: Arc::new(alg),
        tangent,
        point,
        recipe: Recipe::DisjointUnion(parts.to_vec()),
    });
    let inclusions = parts
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let o = offsets[k];
            let m = Matrix::from_fn(p.n(), n, |i, j| if j == o + i { S::one() } else { S::zero() });
            Morphism::new(format!("incl{k}"), p.clone(), variety.clone(), m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DisjointUnion { variety, components: parts.to_vec(), offsets, inclusions })
}

/// Finite group acting on `CH(X)` through push-forward along automorphisms.
#[derive(Clone, Debug)]
pub struct GroupAction<S> {
    pub variety: VarRef<S>,
    pub labels: Vec<String>,
    /// `g_*` on `CH(X)`.
    pub elements: Vec<Matrix<S>>,
    /// `compose[a][b] = c` when `g_a ∘ g_b = g_c`.
    pub compose: Vec<Vec<usize>>,
}

impl<S: Scalar> GroupAction<S> {
    pub fn trivial(x: VarRef<S>) -> Self {
        let n = x.n();
        GroupAction { variety: x, labels: vec!["e".into()], elements: vec![Matrix::identity(n)], compose: vec![vec![0]] }
    }

    /// Symmetric group on `k` letters with elements listed as permutations.
    pub fn symmetric(x: VarRef<S>, perms: &[Vec<usize>], act: impl Fn(&[usize]) -> Matrix<S>) -> Self {
        let labels = perms.iter().map(|p| format!("{p:?}")).collect();
        let elements = perms.iter().map(|p| act(p)).collect();
        let compose = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        let ab: Vec<usize> = b.iter().map(|&i| a[i]).collect();
                        perms.iter().position(|p| *p == ab).expect("closed under composition")
                    })
                    .collect()
            })
            .collect();
        GroupAction { variety: x, labels, elements, compose }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// `Σ_g g_*`.
    pub fn group_sum(&self) -> Matrix<S> {
        let n = self.variety.n();
        self.elements.iter().fold(Matrix::zeros(n, n), |acc, g| acc.add(g))
    }

    /// Reynolds projector `(1/|G|) Σ_g g_*`.
    pub fn reynolds(&self) -> Matrix<S> {
        self.group_sum().scale(&(S::one() / S::from_int(self.order() as i64)))
    }

    pub fn verify(&self) -> Report {
        let mut rep = Report::new();
        let x = &self.variety;
        let a = &x.chow;
        let n = a.dim();
        rep.run("action.group_law", || {
            for (i, gi) in self.elements.iter().enumerate() {
                for (j, gj) in self.elements.iter().enumerate() {
                    if gi.mul(gj) != self.elements[self.compose[i][j]] {
                        return Some(format!("{} ∘ {} mismatch", self.labels[i], self.labels[j]));
                    }
                }
            }
            None
        });
        rep.run("action.ring_automorphism", || {
            for (g, m) in self.elements.iter().enumerate() {
                if m.rank() != n {
                    return Some(format!("{} is not invertible", self.labels[g]));
                }
                if m.mul_vec(a.unit()) != a.unit() {
                    return Some(format!("{} moves the unit", self.labels[g]));
                }
                for i in 0..n {
                    let gi = m.column(i);
                    for j in i..n {
                        if a.codim(i) + a.codim(j) > a.top() {
                            continue;
                        }
                        let lhs = m.mul_vec(&crate::exactalg::matrix::dense_from_sparse(a.mul_basis(i, j), n));
                        let rhs = a.mul_vec(&gi, &m.column(j));
                        if lhs != rhs {
                            return Some(format!("{}({} {}) mismatch", self.labels[g], a.name(i), a.name(j)));
                        }
                    }
                }
            }
            None
        });
        rep.run("action.degree", || {
            for (g, m) in self.elements.iter().enumerate() {
                for i in 0..n {
                    if a.degree_vec(&m.column(i)) != a.degree_vec(&a.basis_vec(i)) {
                        return Some(format!("{} changes deg {}", self.labels[g], a.name(i)));
                    }
                }
            }
            None
        });
        rep.run("action.tangent", || {
            self.elements
                .iter()
                .position(|m| m.mul_vec(&x.tangent) != x.tangent)
                .map(|g| format!("{} moves c(T)", self.labels[g]))
        });
        rep
    }
}

/// Variety whose Chow ring is a subring of a cover's, with the pairing
/// rescaled by `1/degree` (quotients and generically finite images).
#[derive(Clone, Debug)]
pub struct Quotient<S> {
    pub variety: VarRef<S>,
    pub cover: VarRef<S>,
    pub degree: usize,
    /// `p: cover → variety`; `p^*` is the inclusion of the subring.
    pub p: Morphism<S>,
    /// Columns are the chosen basis of the subring inside `CH(cover)`.
    pub basis: Matrix<S>,
}

impl<S: Scalar> Quotient<S> {
    /// Coordinates of a subring element of `CH(cover)`.
    pub fn coordinates(&self, v: &[S]) -> Option<Vec<S>> {
        self.basis.solve(v)
    }
}

/// Subring of `CH(X)` spanned by homogeneous vectors, with
/// `⟨a,b⟩_Y = (1/N)⟨a,b⟩_X`. `pulled_tangent` is `p^*c(T_Y)` in `CH(X)`.
pub fn build_descended<S: Scalar>(
    name: &str,
    cover: &VarRef<S>,
    spanning: &[Vec<S>],
    degree: usize,
    pulled_tangent: &[S],
    recipe: Recipe<S>,
) -> Result<Quotient<S>> {
    let a = &cover.chow;
    let n = a.dim();
    // Homogeneous basis: per codimension, a column basis of the components.
    let mut basis_cols: Vec<Vec<S>> = Vec::new();
    let mut codims = Vec::new();
    for p in 0..=a.top() {
        let comps: Vec<Vec<S>> = spanning.iter().map(|v| a.component(v, p)).filter(|v| v.iter().any(|x| !x.is_zero())).collect();
        if comps.is_empty() {
            continue;
        }
        let m = Matrix::from_columns(n, &comps);
        for c in m.column_basis() {
            basis_cols.push(comps[c].clone());
            codims.push(p);
        }
    }
    let m = basis_cols.len();
    let basis = Matrix::from_columns(n, &basis_cols);
    let coords = |v: &[S]| -> Result<Vec<S>> {
        basis.solve(v).ok_or_else(|| Error::Malformed("subspace is not closed under multiplication".into()))
    };
    let mut table = vec![Vec::new(); m * m];
    for i in 0..m {
        for j in i..m {
            let prod = a.mul_vec(&basis_cols[i], &basis_cols[j]);
            let c = crate::exactalg::matrix::sparse_from_dense(&coords(&prod)?);
            table[j * m + i] = c.clone();
            table[i * m + j] = c;
        }
    }
    let unit = coords(a.unit()).map_err(|_| Error::Malformed("subspace does not contain the unit".into()))?;
    let inv_n = S::one() / S::from_int(degree as i64);
    let degree_fn: Vec<S> = basis_cols.iter().map(|v| a.degree_vec(v).times(&inv_n)).collect();
    let names: Vec<String> = (0..m).map(|k| format!("y{k}")).collect();
    let alg = GradedAlgebra::new(names, codims, a.top(), table, unit, degree_fn)?;
    let mut pt = cover.point.clone();
    for x in &mut pt {
        *x *= &S::from_int(degree as i64);
    }
    let point = coords(&pt)?;
    let tangent = coords(pulled_tangent).map_err(|_| Error::Precondition("pulled-back tangent class is not in the subring".into()))?;
    let variety = Arc::new(Variety { name: name.to_string(), dim: cover.dim, chow: Arc::new(alg), tangent, point, recipe });
    let p = Morphism::new("p", cover.clone(), variety.clone(), basis.clone())?;
    Ok(Quotient { variety, cover: cover.clone(), degree, p, basis })
}

/// `X/G` for an action by ring automorphisms. `branch` lists the divisors
/// along which the quotient map is simply ramified; they determine `c(T)`.
pub fn build_quotient<S: Scalar>(name: &str, action: &GroupAction<S>, branch: &[Vec<S>]) -> Result<Quotient<S>> {
    let rep = action.verify();
    if let Some(f) = rep.failures().first() {
        return Err(Error::NotAutomorphism(format!("{}: {}", f.check_id, f.witness.clone().unwrap_or_default())));
    }
    let x = &action.variety;
    let a = &x.chow;
    let r = action.reynolds();
    let spanning: Vec<Vec<S>> = (0..a.dim()).map(|j| r.column(j)).collect();
    // c(p^*Ω_Y) = c(Ω_X) / Π c(O_R(−R)), with c(O_R(−R)) = (1 − R)/(1 − 2R).
    let mut omega = a.dual_chern_vec(&x.tangent);
    for rdiv in branch {
        let mut one_minus = a.unit().to_vec();
        let mut one_minus_2 = a.unit().to_vec();
        axpy(&mut one_minus, &-S::one(), rdiv);
        axpy(&mut one_minus_2, &S::from_int(-2), rdiv);
        let c = a.mul_vec(&one_minus, &a.series_invert_vec(&one_minus_2)?);
        omega = a.mul_vec(&omega, &a.series_invert_vec(&c)?);
    }
    let pulled = a.dual_chern_vec(&omega);
    build_descended(name, x, &spanning, action.order(), &pulled, Recipe::Quotient { cover: x.clone(), order: action.order() })
}
