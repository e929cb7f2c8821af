use std::sync::Arc;

use super::builders::{build_projective_bundle, reduce_powers, ProjectiveBundle};
use super::{vec_witness, whitney_normal, BundleData, Morphism, Recipe, VarRef, Variety};
use crate::error::{Error, Result};
use crate::exactalg::matrix::dense_from_sparse;
use crate::exactalg::{axpy, factorial, AlgebraBuilder, Matrix, Scalar};
use crate::report::Report;

/// `X̃ = Bl_Y X` with exceptional divisor `E = P(N_{Y/X})`.
///
/// Basis of `CH(X̃)`: `ρ^*a` for the basis of `CH(X)`, then for `l = 1..r`
/// the classes `j_*(ξ^{l−1} π^*β)` for the basis of `CH(Y)`.
#[derive(Clone, Debug)]
pub struct BlowUp<S> {
    pub variety: VarRef<S>,
    pub base: VarRef<S>,
    pub center: Morphism<S>,
    pub normal: BundleData<S>,
    pub exceptional: ProjectiveBundle<S>,
    pub rho: Morphism<S>,
    pub j: Morphism<S>,
    /// Fibre dimension of `E → Y`; the codimension of `Y` is `r + 1`.
    pub r: usize,
}

impl<S: Scalar> BlowUp<S> {
    pub fn is_identity(&self) -> bool {
        self.r == 0
    }

    pub fn n_base(&self) -> usize {
        self.base.n()
    }

    pub fn n_center(&self) -> usize {
        self.center.source.n()
    }

    /// Index of `j_*(ξ^{l−1}π^*β_b)`.
    pub fn block_index(&self, l: usize, b: usize) -> usize {
        debug_assert!(l >= 1 && l <= self.r);
        self.n_base() + (l - 1) * self.n_center() + b
    }

    /// `ξ` on `E`.
    pub fn xi(&self) -> &[S] {
        &self.exceptional.xi
    }

    /// `[E] = j_*1`.
    pub fn exceptional_class(&self) -> Vec<S> {
        self.j_push(self.exceptional.variety.chow.unit())
    }

    /// `ρ^*a`.
    pub fn rho_pull(&self, a: &[S]) -> Vec<S> {
        self.rho.pull(a)
    }

    /// `j_*` of a class on `E`, by the blow-up formula and the key formula.
    pub fn j_push(&self, v: &[S]) -> Vec<S> {
        push_e(&self.center, &self.normal.chern, self.r, self.variety.n(), v)
    }

    /// `j_*(Σ_m ξ^m π^*γ_m)` for arbitrary powers `m`.
    pub fn push_parts(&self, mut parts: Vec<Vec<S>>) -> Vec<S> {
        let v = reduce_powers(&self.center.source.chow, &self.normal.chern, self.r, &mut parts);
        self.j_push(&v)
    }

    /// `c(π^*N / O(−1))` on `E`.
    pub fn excess_chern(&self) -> Result<Vec<S>> {
        let e = &self.exceptional.variety.chow;
        let mut one_minus_xi = e.unit().to_vec();
        axpy(&mut one_minus_xi, &-S::one(), self.xi());
        let inv = e.series_invert_vec(&one_minus_xi)?;
        Ok(e.mul_vec(&self.exceptional.pi.pull(&self.normal.chern), &inv))
    }

    pub fn verify(&self) -> Report {
        let mut rep = Report::new();
        let xt = &self.variety.chow;
        let y = &self.center.source;
        let ev = &self.exceptional.variety;
        rep.run("blowup.normal_whitney", || match whitney_normal(&self.center) {
            Ok(n) => vec_witness(&y.chow, &n.chern, &self.normal.chern).map(|w| format!("c(N) disagrees with i^*c(T_X)/c(T_Y): {w}")),
            Err(e) => Some(e.to_string()),
        });
        rep.run("blowup.j_pull_rho_pull", || {
            let lhs = self.j.pullback.mul(&self.rho.pullback);
            let rhs = self.exceptional.pi.pullback.mul(&self.center.pullback);
            (lhs != rhs).then(|| "j^*ρ^* != π^*i^*".to_string())
        });
        rep.run("blowup.key_formula", || {
            let jp = match self.j.push_matrix() {
                Ok(m) => m,
                Err(e) => return Some(e.to_string()),
            };
            let ce = match self.excess_chern() {
                Ok(c) => ev.chow.component(&c, self.r),
                Err(e) => return Some(e.to_string()),
            };
            for b in 0..y.n() {
                let beta = y.chow.basis_vec(b);
                let lhs = match self.center.push(&beta) {
                    Ok(v) => self.rho.pull(&v),
                    Err(e) => return Some(e.to_string()),
                };
                let rhs = jp.mul_vec(&ev.chow.mul_vec(&ce, &self.exceptional.pi.pull(&beta)));
                if lhs != rhs {
                    return Some(format!("ρ^*i_*{} mismatch", y.chow.name(b)));
                }
            }
            None
        });
        rep.run("blowup.j_push_adjoint", || {
            let jp = match self.j.push_matrix() {
                Ok(m) => m,
                Err(e) => return Some(e.to_string()),
            };
            (0..ev.n()).find_map(|k| {
                let v = ev.chow.basis_vec(k);
                (jp.mul_vec(&v) != self.j_push(&v)).then(|| format!("j_*{} differs from the adjoint of j^*", ev.chow.name(k)))
            })
        });
        rep.run("blowup.rho_push_pull", || {
            let p = match self.rho.push_matrix() {
                Ok(m) => m,
                Err(e) => return Some(e.to_string()),
            };
            (p.mul(&self.rho.pullback) != Matrix::identity(self.n_base())).then(|| "ρ_*ρ^* != id".to_string())
        });
        rep.run("blowup.rank", || {
            let expect = self.n_base() + self.r * y.n();
            (xt.dim() != expect).then(|| format!("rank {} expected {expect}", xt.dim()))
        });
        rep
    }
}

fn push_e<S: Scalar>(center: &Morphism<S>, chern: &[S], r: usize, n_total: usize, v: &[S]) -> Vec<S> {
    let y = &center.source.chow;
    let ny = y.dim();
    let nx = center.target.n();
    let mut out = vec![S::zero(); n_total];
    for a in 0..r {
        for b in 0..ny {
            let x = &v[a * ny + b];
            if !x.is_zero() {
                out[nx + a * ny + b] += x;
            }
        }
    }
    let gamma = &v[r * ny..(r + 1) * ny];
    if gamma.iter().all(|x| x.is_zero()) {
        return out;
    }
    // j_*(ξ^r π^*γ) = ρ^*i_*γ − Σ_{k=1}^{r} j_*(ξ^{r−k} π^*(c_k γ))
    let pushed = center.push(gamma).expect("center is proper");
    for (o, x) in out.iter_mut().zip(&pushed) {
        if !x.is_zero() {
            *o += x;
        }
    }
    for k in 1..=r {
        let t = y.mul_vec(&y.component(chern, k), gamma);
        let a = r - k;
        for (b, x) in t.iter().enumerate() {
            if !x.is_zero() {
                out[nx + a * ny + b] -= x;
            }
        }
    }
    out
}

/// Blow up `X` along `i: Y → X` with normal bundle `N`. A codimension-one
/// center gives back `X` with `ρ = id`, `E = Y` and `ξ = −c₁(N)`.
pub fn build_blow_up<S: Scalar>(x: &VarRef<S>, i: &Morphism<S>, n: &BundleData<S>) -> Result<BlowUp<S>> {
    let y = &i.source;
    if !Arc::ptr_eq(&i.target, x) {
        return Err(Error::Mismatch("center does not map to the base".into()));
    }
    if !Arc::ptr_eq(&n.carrier, y) {
        return Err(Error::Mismatch("normal bundle does not live on the center".into()));
    }
    let c = x.dim.saturating_sub(y.dim);
    if n.rank != c || c == 0 {
        return Err(Error::RankCodim { rank: n.rank, codim: c });
    }
    if i.pullback.mul_vec(x.chow.unit()) != y.chow.unit() {
        return Err(Error::Precondition("center map does not preserve the unit".into()));
    }
    let r = c - 1;
    let e = build_projective_bundle(n)?;
    let (nx, ny) = (x.n(), y.n());
    let ax = &x.chow;
    let ay = &y.chow;

    if r == 0 {
        let rho = Morphism::identity(x.clone());
        let j = Morphism::new("j", e.variety.clone(), x.clone(), e.pi.pullback.mul(&i.pullback))?;
        return Ok(BlowUp { variety: x.clone(), base: x.clone(), center: i.clone(), normal: n.clone(), exceptional: e, rho, j, r });
    }

    let total = nx + r * ny;
    let mut names: Vec<String> = ax.names().to_vec();
    let mut codims: Vec<usize> = ax.codims().to_vec();
    for l in 1..=r {
        for b in 0..ny {
            names.push(if l == 1 { format!("j[{}]", ay.name(b)) } else { format!("j[xi^{}*{}]", l - 1, ay.name(b)) });
            codims.push(l + ay.codim(b));
        }
    }
    let restrict: Vec<Vec<S>> = (0..nx).map(|k| i.pullback.column(k)).collect();
    let mut builder = AlgebraBuilder::new(names, codims, x.dim);
    builder.fill(|p, q| {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        let mut v = vec![S::zero(); total];
        if q < nx {
            for (m, cf) in ax.mul_basis(p, q) {
                v[*m] = cf.clone();
            }
        } else if p < nx {
            let (l, b) = ((q - nx) / ny + 1, (q - nx) % ny);
            let t = ay.mul_vec(&restrict[p], &ay.basis_vec(b));
            for (m, cf) in t.into_iter().enumerate() {
                v[nx + (l - 1) * ny + m] = cf;
            }
        } else {
            let (l1, b1) = ((p - nx) / ny + 1, (p - nx) % ny);
            let (l2, b2) = ((q - nx) / ny + 1, (q - nx) % ny);
            let m = l1 + l2 - 1;
            let mut parts = vec![vec![S::zero(); ny]; m + 1];
            parts[m] = dense_from_sparse(ay.mul_basis(b1, b2), ny).into_iter().map(|c| -c).collect();
            let ev = reduce_powers(ay, &n.chern, r, &mut parts);
            v = push_e(i, &n.chern, r, total, &ev);
        }
        v
    });
    let mut unit = ax.unit().to_vec();
    unit.resize(total, S::zero());
    let mut degree = ax.degree_functional().to_vec();
    degree.resize(total, S::zero());
    let alg = Arc::new(builder.finish(unit, degree)?);

    let rho_mat = Matrix::from_fn(total, nx, |p, k| if p == k { S::one() } else { S::zero() });
    let ae = &e.variety.chow;
    let j_mat = Matrix::from_fn(e.variety.n(), total, |row, col| {
        if col < nx {
            // π^*i^*a sits in the ξ^0 block
            if row < ny {
                restrict[col][row].clone()
            } else {
                S::zero()
            }
        } else {
            // j^*j_*(ξ^{l−1}π^*β) = −ξ^l π^*β
            let (l, b) = ((col - nx) / ny + 1, (col - nx) % ny);
            if row == l * ny + b {
                -S::one()
            } else {
                S::zero()
            }
        }
    });

    // c(T_X̃) = ρ^*c(T_X) / c(j_*F), F = π^*N / O(−1)
    let pad = |v: &[S]| {
        let mut w = v.to_vec();
        w.resize(total, S::zero());
        w
    };
    let ch_n = ae.chern_character_vec(n.rank as i64, &e.pi.pull(&n.chern))?;
    let neg_xi: Vec<S> = e.xi.iter().map(|c| -c.clone()).collect();
    let mut ch_f = ch_n;
    axpy(&mut ch_f, &-S::one(), &ae.exp_vec(&neg_xi));
    let coeffs: Vec<S> = (0..=ae.top()).map(|k| S::one() / factorial::<S>(k + 1)).collect();
    let td_inv = ae.eval_series(&coeffs, &e.xi);
    let ch_push = push_e(i, &n.chern, r, total, &ae.mul_vec(&ch_f, &td_inv));
    let c_push = alg.chern_from_character_vec(&ch_push);
    let tangent = alg.mul_vec(&pad(&x.tangent), &alg.series_invert_vec(&c_push)?);

    let variety = Arc::new(Variety {
        name: format!("Bl({})", x.name),
        dim: x.dim,
        chow: alg,
        tangent,
        point: pad(&x.point),
        recipe: Recipe::BlowUp { base: x.clone(), center: y.clone() },
    });
    let rho = Morphism::new("rho", variety.clone(), x.clone(), rho_mat)?;
    let j = Morphism::new("j", e.variety.clone(), variety.clone(), j_mat)?;
    Ok(BlowUp { variety, base: x.clone(), center: i.clone(), normal: n.clone(), exceptional: e, rho, j, r })
}
