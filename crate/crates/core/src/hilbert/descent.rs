use crate::ckd::{ck_descend, verify_all, CKDecomposition, DescentCk, Inclusion};
use crate::corresp::{automorphism_graph, Correspondence};
use crate::error::{Error, Result};
use crate::exactalg::{axpy, sub_vec, Matrix, Scalar};
use crate::report::Report;
use crate::variety::{build_descended, build_projective_bundle, Morphism, ProjectiveBundle, Quotient, Recipe, VarRef};

use super::action::{s3_action, S3Actions};
use super::square::build_nested_23;
use super::tangent::{discrepancy_c1, pulled_tangent_nested, NestedTangent};
use super::tower::{build_tower, member, Hilb3Tower};

/// The contracted divisors `D₁ = E″₁ → B₃ ≅ X` and `D₂ = E_W → B₂`.
#[derive(Clone, Debug)]
pub struct Contracted<S> {
    /// `E″₁ ⊂ X₃`.
    pub e1: Inclusion<S>,
    /// `f: E″₁ → E₁ → X`.
    pub f: Morphism<S>,
    /// `P(𝓔)` over `P(T_X)`.
    pub pe: ProjectiveBundle<S>,
    /// `pr: E_W = P¹ × P(𝓔) → P(𝓔)`.
    pub pr: Morphism<S>,
    /// `s: P(T_X) ≅ P(T_{P(T_X)/X}) → P(𝓔)`.
    pub section: Morphism<S>,
    /// `h` of the `P¹` factor on `E_W`.
    pub h: Vec<S>,
}

/// Data of `K = ᵗΓ_p ∘ Γ_p` for `p: X₃ → X^[3]`.
#[derive(Clone, Debug)]
pub struct DescentData<S> {
    pub contracted: Contracted<S>,
    /// `Σ_g Γ_g`.
    pub dominating: Correspondence<S>,
    /// `j_*c_top(j^*q₁^*𝒩_p / 𝒩₁)` along `E″₁ ×_{B₃} E″₁ = (f × f)^{-1}Δ_X`.
    pub t1: Correspondence<S>,
    /// `(j × j)_*(pr × pr)^*Δ_{P(𝓔)}`.
    pub c1: Correspondence<S>,
    /// `(j × j)_*(pr × pr)^*(s × s)_*(π × π)^*Δ_X`.
    pub c2: Correspondence<S>,
    /// `(μ, λ₁, λ₂)` in `K = μ Σ_g Γ_g + T₁ + λ₁C₁ + λ₂C₂`, when the
    /// idempotency system has a unique solution.
    pub coefficients: Option<[S; 3]>,
    /// Classes `j_*` of cycles killed by `p_*`.
    pub killed: Vec<Vec<S>>,
    /// Homogeneous basis of `p^*CH(X^[3]) ⊂ CH(X₃)`, one column per class.
    pub image: Matrix<S>,
    /// `q = K/6`, the orthogonal projection onto `p^*CH(X^[3])`.
    pub q: Correspondence<S>,
    /// `c(Ω_{X₃/X^[3]})` assembled from its restrictions to the divisors.
    pub omega_relative: Vec<S>,
    /// `p^*c(T_{X^[3]})` from `omega_relative`.
    pub assembled_tangent: Vec<S>,
    /// `p^*c(T_{X^[3]})` through `X^[2,3]`.
    pub nested: NestedTangent<S>,
    /// `p^*c(T_{X^[3]})`, equal to `nested.chern`.
    pub pulled_tangent: Vec<S>,
    pub report: Report,
}

impl<S: Scalar> DescentData<S> {
    /// `μ Σ_g Γ_g + T₁ + λ₁C₁ + λ₂C₂`.
    pub fn ansatz(&self, c: &[S; 3]) -> Result<Correspondence<S>> {
        self.dominating.scale(&c[0]).add(&self.t1)?.add(&self.c1.scale(&c[1]))?.add(&self.c2.scale(&c[2]))
    }

    /// `K∘K = 6K` and `K = 6q` for the ansatz with coefficients `c`.
    pub fn verify_ansatz(&self, c: &[S; 3]) -> Report {
        let mut rep = Report::new();
        let k = self.ansatz(c);
        let six = S::from_int(6);
        rep.run("ansatz.idempotent", || match &k {
            Ok(k) => {
                let op = k.operator();
                (op.mul(&op) != op.scale(&six)).then(|| format!("K∘K != 6K at (μ, λ₁, λ₂) = ({}, {}, {})", c[0], c[1], c[2]))
            }
            Err(e) => Some(e.to_string()),
        });
        rep.run("ansatz.matches", || match &k {
            Ok(k) => k.sub(&self.q.scale(&six)).ok().and_then(|d| d.coeffs.first_nonzero()).map(|(i, j, v)| {
                format!("K − 6q has entry {v} at ({i}, {j}) for (μ, λ₁, λ₂) = ({}, {}, {})", c[0], c[1], c[2])
            }),
            Err(e) => Some(e.to_string()),
        });
        rep
    }
}

/// `X^[3]` with its descended decomposition.
#[derive(Clone, Debug)]
pub struct Hilb3<S> {
    pub tower: Hilb3Tower<S>,
    pub actions: S3Actions<S>,
    pub descent: DescentData<S>,
    pub quotient: Quotient<S>,
    pub ck: DescentCk<S>,
    pub report: Report,
}

impl<S: Scalar> Hilb3<S> {
    pub fn variety(&self) -> &VarRef<S> {
        &self.quotient.variety
    }

    pub fn ck(&self) -> &CKDecomposition<S> {
        &self.ck.ck
    }
}

fn one_plus<S: Scalar>(unit: &[S], s: i64, x: &[S]) -> Vec<S> {
    let mut v = unit.to_vec();
    axpy(&mut v, &S::from_int(s), x);
    v
}

pub(crate) fn contracted<S: Scalar>(tower: &Hilb3Tower<S>) -> Result<Contracted<S>> {
    let e1 = tower.e1_second()?;
    let k = member(&tower.stage2.set, "E1'")?;
    let bl = tower.stage2.blow_ups[k].as_ref().ok_or_else(|| Error::Malformed("E1' is not a blow-up of E1".into()))?;
    let f = bl.rho.then(&tower.e1().pi)?;

    let pt = &tower.pt;
    let pa = &pt.variety.chow;
    let pe = build_projective_bundle(&tower.bundle_e)?;
    let ew = tower.e_w();
    let w = &tower.w;
    let h_w = w.tensor(&[S::zero(), S::one()], pa.unit());
    let h = ew.pi.pull(&h_w);
    // P(O(−h) ⊗ 𝓔) = P(𝓔) with ξ_N = ξ_𝓔 + h.
    let base = ew.pi.pullback.mul(&w.p2.pullback);
    let xi_e = sub_vec(&ew.xi, &h);
    let pr = Morphism::new("pr", ew.variety.clone(), pe.variety.clone(), pe.ring_map(&ew.variety.chow, &base, &xi_e))?;
    // O_{P(𝓔)}(−1) restricts to T_{P(T)/X} = π^*T ⊗ O(1) / O.
    let c1_rel = pa.component(&pa.twist_chern_vec(2, &pt.pi.pull(&tower.base.tangent), &pt.xi)?, 1);
    let minus: Vec<S> = c1_rel.iter().map(|c| -c.clone()).collect();
    let section = Morphism::new("s", pt.variety.clone(), pe.variety.clone(), pe.ring_map(pa, &Matrix::identity(pt.variety.n()), &minus))?;
    Ok(Contracted { e1, f, pe, pr, section, h })
}

/// `ch(j_*F) = j_*(ch F · td(N)^{-1})` for a divisor with normal line `N`.
fn push_character<S: Scalar>(j: &Morphism<S>, normal: &[S], ch: &[S]) -> Result<Vec<S>> {
    let a = &j.source.chow;
    let td_inv = a.series_invert_vec(&a.todd_vec(normal)?)?;
    j.push(&a.mul_vec(ch, &td_inv))
}

/// `[E_ij] ⊂ X₂` for the three components of the exceptional divisor over `⊔Δ̃_ij`.
pub(crate) fn e_ij_classes<S: Scalar>(tower: &Hilb3Tower<S>) -> Vec<Vec<S>> {
    let bu2 = tower.blow_up2();
    let d = &tower.d;
    (0..3)
        .map(|k| {
            let parts: Vec<Vec<S>> =
                d.components.iter().enumerate().map(|(i, c)| if i == k { c.chow.unit().to_vec() } else { c.chow.zero_vec() }).collect();
            bu2.j_push(&bu2.exceptional.pi.pull(&d.stack(&parts)))
        })
        .collect()
}

/// Chern character of `Ω_{X₃/X^[3]}` assembled from its restrictions:
/// `O_{Ẽ_ij}(−Ẽ_ij)` along the ramification divisors, then
/// `(j_*Ω_{E″₁/B₃} + j_*(Ω_{E_W/B₂}(−E″_W)))·O(−ΣẼ_ij)`, with
/// `Ω_{E_W/B₂}` the cotangent line of the `P¹` factor.
pub fn omega_relative_character<S: Scalar>(tower: &Hilb3Tower<S>) -> Result<Vec<S>> {
    let c = contracted(tower)?;
    let x3 = tower.x3();
    let a = &x3.chow;
    let bu3 = tower.blow_up3();
    let mut total = a.zero_vec();
    let mut sum_e = a.zero_vec();
    for e in e_ij_classes(tower) {
        let et = bu3.rho_pull(&e);
        let m1: Vec<S> = et.iter().map(|v| -v.clone()).collect();
        let m2: Vec<S> = et.iter().map(|v| S::from_int(-2) * v.clone()).collect();
        axpy(&mut total, &S::one(), &a.exp_vec(&m1));
        axpy(&mut total, &-S::one(), &a.exp_vec(&m2));
        axpy(&mut sum_e, &S::one(), &et);
    }

    let ev = &c.e1.map.source;
    let ea = &ev.chow;
    let x = &tower.base;
    let ch_omega_e = ea.chern_character_vec(ev.dim as i64, &ea.dual_chern_vec(&ev.tangent))?;
    let ch_omega_x = x.chow.chern_character_vec(x.dim as i64, &x.chow.dual_chern_vec(&x.tangent))?;
    let ch_rel_e = sub_vec(&ch_omega_e, &c.f.pull(&ch_omega_x));
    let part_e = push_character(&c.e1.map, &c.e1.normal.chern, &ch_rel_e)?;

    let ew = tower.e_w();
    let wa = &ew.variety.chow;
    let e1_class = c.e1.map.push(ea.unit())?;
    let e_w_second = bu3.j.pull(&e1_class);
    let mut l = c.h.iter().map(|v| S::from_int(-2) * v.clone()).collect::<Vec<S>>();
    axpy(&mut l, &-S::one(), &e_w_second);
    let n_ew = one_plus(wa.unit(), -1, &ew.xi);
    let part_w = push_character(&bu3.j, &n_ew, &wa.exp_vec(&l))?;

    let mut contracted_part = part_e;
    axpy(&mut contracted_part, &S::one(), &part_w);
    let minus_sum: Vec<S> = sum_e.iter().map(|v| -v.clone()).collect();
    axpy(&mut total, &S::one(), &a.mul_vec(&contracted_part, &a.exp_vec(&minus_sum)));
    Ok(total)
}

/// `c(Ω_{X₃/X^[3]})`.
pub fn omega_relative_chern<S: Scalar>(tower: &Hilb3Tower<S>) -> Result<Vec<S>> {
    let ch = omega_relative_character(tower)?;
    Ok(tower.x3().chow.chern_from_character_vec(&ch))
}

/// `p^*c(T_{X^[3]})` from `0 → p^*Ω → Ω_{X₃} → Ω_{X₃/X^[3]} → 0`.
fn pulled_tangent<S: Scalar>(x3: &VarRef<S>, omega_rel: &[S]) -> Result<Vec<S>> {
    let a = &x3.chow;
    let omega = a.mul_vec(&a.dual_chern_vec(&x3.tangent), &a.series_invert_vec(omega_rel)?);
    Ok(a.dual_chern_vec(&omega))
}

/// Cycles killed by `p_*`: `j_*` of `pr^*CH(P(𝓔))` on `E_W` and of `ker f_*` on `E″₁`.
fn killed_classes<S: Scalar>(tower: &Hilb3Tower<S>, c: &Contracted<S>) -> Result<Vec<Vec<S>>> {
    let bu3 = tower.blow_up3();
    let mut out = Vec::new();
    for b in 0..c.pe.variety.n() {
        out.push(bu3.j.push(&c.pr.pullback.column(b))?);
    }
    for k in c.f.push_matrix()?.kernel() {
        out.push(c.e1.map.push(&k)?);
    }
    Ok(out)
}

/// Invariant classes orthogonal to every killed class, as a homogeneous basis.
fn image_basis<S: Scalar>(x3: &VarRef<S>, reynolds: &Matrix<S>, killed: &[Vec<S>]) -> Matrix<S> {
    let a = &x3.chow;
    let n = a.dim();
    let g = a.gram();
    let top = a.top();
    let mut cols: Vec<Vec<S>> = Vec::new();
    for p in 0..=top {
        let idx = a.basis_in_codim(p);
        let inv: Vec<Vec<S>> = idx.iter().map(|&i| reynolds.column(i)).collect();
        let m = Matrix::from_columns(n, &inv);
        let basis: Vec<Vec<S>> = m.column_basis().into_iter().map(|c| inv[c].clone()).collect();
        if basis.is_empty() {
            continue;
        }
        let dual: Vec<Vec<S>> = killed.iter().map(|s| g.vec_mul(&a.component(s, top - p))).filter(|r| r.iter().any(|x| !x.is_zero())).collect();
        if dual.is_empty() {
            cols.extend(basis);
            continue;
        }
        let bm = Matrix::from_columns(n, &basis);
        let constraints = Matrix::from_rows(&dual, n).mul(&bm);
        for k in constraints.kernel() {
            cols.push(bm.mul_vec(&k));
        }
    }
    Matrix::from_columns(n, &cols)
}

/// Orthogonal projection onto the column span of `u` for the intersection pairing.
fn orthogonal_projection<S: Scalar>(x3: &VarRef<S>, u: &Matrix<S>) -> Result<Matrix<S>> {
    let g = x3.chow.gram();
    let ut_g = u.transpose().mul(g);
    let inner = ut_g.mul(u).inverse().map_err(|_| Error::Singular("pairing on the invariant complement".into()))?;
    Ok(u.mul(&inner).mul(&ut_g))
}

fn route_a_terms<S: Scalar>(
    tower: &Hilb3Tower<S>,
    c: &Contracted<S>,
    actions: &S3Actions<S>,
    pulled: &[S],
) -> Result<(Correspondence<S>, Correspondence<S>, Correspondence<S>, Correspondence<S>)> {
    let x3 = tower.x3();
    let x = &tower.base;
    let mut dominating = Correspondence::zero(x3.clone(), x3.clone());
    for g in &actions.top().elements {
        dominating = dominating.add(&automorphism_graph(x3, g)?)?;
    }

    // c(j^*q₁^*𝒩_p / 𝒩₁) = p₁^*(c(p^*T)/(f^*c(T_X) c(N))) · p₂^*(1/c(N)).
    let ev = &c.e1.map.source;
    let ea = &ev.chow;
    let inv_n = ea.series_invert_vec(&c.e1.normal.chern)?;
    let left = ea.mul_vec(&ea.mul_vec(&c.e1.map.pull(pulled), &ea.series_invert_vec(&c.f.pull(&x.tangent))?), &inv_n);
    let ne = ea.dim();
    let mut cls: Matrix<S> = Matrix::zeros(ne, ne);
    for k in 0..=2 {
        let (l, r) = (ea.component(&left, k), ea.component(&inv_n, 2 - k));
        for i in 0..ne {
            if l[i].is_zero() {
                continue;
            }
            for (j, rj) in r.iter().enumerate() {
                if !rj.is_zero() {
                    cls.entry_mut(i, j).add_product(&l[i], rj);
                }
            }
        }
    }
    let excess = Correspondence::new(ev.clone(), ev.clone(), cls)?;
    let fiber = Correspondence::diagonal(x).pullback_along(&c.f, &c.f)?;
    let t1 = fiber.intersect(&excess)?.pushforward_along(&c.e1.map, &c.e1.map)?;

    let j = &tower.blow_up3().j;
    let c1 = Correspondence::diagonal(&c.pe.variety).pullback_along(&c.pr, &c.pr)?.pushforward_along(j, j)?;
    let pi = &tower.pt.pi;
    let c2 = Correspondence::diagonal(x)
        .pullback_along(pi, pi)?
        .pushforward_along(&c.section, &c.section)?
        .pullback_along(&c.pr, &c.pr)?
        .pushforward_along(j, j)?;
    Ok((dominating, t1, c1, c2))
}

fn flat<S: Scalar>(m: &Matrix<S>) -> Vec<S> {
    (0..m.rows()).flat_map(|i| m.row(i).to_vec()).collect()
}

/// Solves `q∘q = q`, `ᵗq = q`, `q∘Γ_g = q`, `q(killed) = 0`, `q(1) = 1` for
/// `q = (μA + T₁ + λ₁C₁ + λ₂C₂)/6` after replacing the quadratic monomials by
/// independent unknowns.
fn solve_coefficients<S: Scalar>(
    dominating: &Correspondence<S>,
    t1: &Correspondence<S>,
    c1: &Correspondence<S>,
    c2: &Correspondence<S>,
    gammas: &[Matrix<S>],
    killed: &[Vec<S>],
    unit: &[S],
) -> Result<std::result::Result<[S; 3], String>> {
    let ops = [t1.operator(), dominating.operator(), c1.operator(), c2.operator()];
    let coeffs = [&t1.coeffs, &dominating.coeffs, &c1.coeffs, &c2.coeffs];
    let six = S::from_int(6);
    // unknowns: u1, u2, u3, u1u1, u1u2, u1u3, u2u2, u2u3, u3u3
    let pairs = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];
    let mut columns: Vec<Vec<S>> = vec![Vec::new(); 9];
    let mut rhs: Vec<S> = Vec::new();
    let push_block = |columns: &mut Vec<Vec<S>>, rhs: &mut Vec<S>, parts: &[Matrix<S>], constant: &Matrix<S>| {
        for (col, m) in columns.iter_mut().zip(parts) {
            col.extend(flat(m));
        }
        rhs.extend(flat(&constant.neg()));
    };
    // 36(q² − q) = Σ u_k(A0A_k + A_kA0 − 6A_k) + Σ u_ku_l(A_kA_l + A_lA_k)/(1 + δ_kl) + A0² − 6A0
    let mut parts: Vec<Matrix<S>> = (1..4).map(|k| ops[0].mul(&ops[k]).add(&ops[k].mul(&ops[0])).sub(&ops[k].scale(&six))).collect();
    for &(k, l) in &pairs {
        let m = if k == l { ops[k].mul(&ops[k]) } else { ops[k].mul(&ops[l]).add(&ops[l].mul(&ops[k])) };
        parts.push(m);
    }
    push_block(&mut columns, &mut rhs, &parts, &ops[0].mul(&ops[0]).sub(&ops[0].scale(&six)));
    let n = ops[0].rows();
    let zero = Matrix::<S>::zeros(n, n);
    // ᵗK = K
    let mut sym: Vec<Matrix<S>> = (1..4).map(|k| coeffs[k].sub(&coeffs[k].transpose())).collect();
    sym.extend(std::iter::repeat_n(zero.clone(), 6));
    push_block(&mut columns, &mut rhs, &sym, &coeffs[0].sub(&coeffs[0].transpose()));
    // K∘Γ_g = K
    for g in gammas {
        let mut inv: Vec<Matrix<S>> = (1..4).map(|k| ops[k].mul(g).sub(&ops[k])).collect();
        inv.extend(std::iter::repeat_n(zero.clone(), 6));
        push_block(&mut columns, &mut rhs, &inv, &ops[0].mul(g).sub(&ops[0]));
    }
    // p_* kills the contracted cycles and has degree 6
    let mut fixed: Vec<(Vec<S>, Vec<S>)> = killed.iter().map(|k| (k.clone(), vec![S::zero(); k.len()])).collect();
    fixed.push((unit.to_vec(), unit.iter().map(|x| six.clone() * x.clone()).collect()));
    for (v, target) in &fixed {
        for (col, op) in columns.iter_mut().zip(&ops[1..]) {
            col.extend(op.mul_vec(v));
        }
        for col in columns.iter_mut().skip(3) {
            col.extend(std::iter::repeat_n(S::zero(), v.len()));
        }
        rhs.extend(sub_vec(target, &ops[0].mul_vec(v)));
    }
    let rows = rhs.len();
    let keep: Vec<usize> = (0..rows).filter(|&r| !rhs[r].is_zero() || columns.iter().any(|c| !c[r].is_zero())).collect();
    let system = Matrix::from_fn(keep.len(), 9, |r, k| columns[k][keep[r]].clone());
    let b: Vec<S> = keep.iter().map(|&r| rhs[r].clone()).collect();
    let sol = match system.solve(&b) {
        Some(s) => s,
        None => return Ok(Err("the linearized idempotency system is inconsistent".into())),
    };
    if system.kernel().iter().any(|k| k[..3].iter().any(|x| !x.is_zero())) {
        return Ok(Err("the linearized idempotency system does not determine the coefficients".into()));
    }
    Ok(Ok([sol[0].clone(), sol[1].clone(), sol[2].clone()]))
}

pub fn build_hilb3<S: Scalar>(ckx: &CKDecomposition<S>) -> Result<Hilb3<S>> {
    let tower = build_tower(ckx)?;
    let actions = s3_action(&tower)?;
    build_descent(tower, actions)
}

pub fn build_descent<S: Scalar>(tower: Hilb3Tower<S>, actions: S3Actions<S>) -> Result<Hilb3<S>> {
    let x3 = tower.x3().clone();
    let a = &x3.chow;
    let ck3 = tower.ck(3).clone();
    let act = actions.top();
    let order = act.order();
    let c = contracted(&tower)?;
    let mut report = Report::new();
    report.extend(c.pr.verify().prefixed("descent"));
    report.extend(c.section.verify().prefixed("descent"));

    let killed = killed_classes(&tower, &c)?;
    let image = image_basis(&x3, &act.reynolds(), &killed);
    let q_op = orthogonal_projection(&x3, &image)?;
    let q = Correspondence::from_operator(&x3, &x3, &q_op)?;

    let omega_relative = omega_relative_chern(&tower)?;
    let assembled_tangent = pulled_tangent(&x3, &omega_relative)?;
    let nested = build_nested_23(&tower.ck_base)?;
    let tangent = pulled_tangent_nested(&tower, &nested)?;
    report.extend(tangent.pair.verify().prefixed("descent.tangent"));
    report.extend(tangent.point_and_pair.verify().prefixed("descent.tangent"));
    let pulled = tangent.chern.clone();
    let m = image.cols();
    report.run("descent.tangent.c1_discrepancy", || {
        let c1 = discrepancy_c1(&tower).ok()?;
        (a.component(&pulled, 1) != c1).then(|| format!("c₁ = {}", a.format(&a.component(&pulled, 1))))
    });
    report.run("descent.tangent.invariant_complement", || {
        (q_op.mul_vec(&pulled) != pulled).then(|| "p^*c(T) is not in the image of q".to_string())
    });
    report.run("descent.tangent.euler", || {
        let deg = a.degree_vec(&a.component(&pulled, a.top()));
        let expect = S::from_int((order * m) as i64);
        (deg != expect).then(|| format!("deg c_top = {deg}, expected {expect}"))
    });
    report.run("descent.tangent.base_on_e1", || {
        let r = c.e1.map.pull(&pulled);
        let fp = &c.f.pullback;
        fp.solve(&r).is_none().then(|| "p^*c(T) restricted to E″₁ is not pulled back from B₃".to_string())
    });

    let (dominating, t1, c1, c2) = route_a_terms(&tower, &c, &actions, &pulled)?;
    let six = S::from_int(order as i64);
    let kernel_b = q.scale(&six);
    report.run("descent.q.idempotent", || (q_op.mul(&q_op) != q_op).then(|| "q∘q != q".to_string()));
    report.run("descent.q.self_adjoint", || (q.transpose() != q).then(|| "ᵗq != q".to_string()));
    report.run("descent.q.group", || {
        act.elements
            .iter()
            .zip(&act.labels)
            .find(|(g, _)| q_op.mul(g) != q_op || g.mul(&q_op) != q_op)
            .map(|(_, l)| format!("q does not absorb Γ_{l}"))
    });
    report.run("descent.q.projectors", || {
        ck3.operators().iter().position(|p| p.mul(&q_op) != q_op.mul(p)).map(|i| format!("q does not commute with π^{i}"))
    });
    report.run("descent.q.grade0", || match kernel_b.grades(&ck3.projectors, &ck3.projectors) {
        Ok(g) if g.is_empty() || g == [0] => None,
        Ok(g) => Some(format!("K has grades {g:?}")),
        Err(e) => Some(e.to_string()),
    });
    report.run("descent.q.trace", || (q.trace() != S::from_int(m as i64)).then(|| format!("trace {} against rank {m}", q.trace())));
    report.run("descent.dominating.group_algebra", || match dominating.then(&dominating) {
        Ok(sq) => (sq != dominating.scale(&six)).then(|| "(ΣΓ_g)² != 6ΣΓ_g".to_string()),
        Err(e) => Some(e.to_string()),
    });
    for (name, corr) in [("t1", &t1), ("c1", &c1), ("c2", &c2)] {
        report.run(format!("descent.{name}.grade0"), || match corr.grades(&ck3.projectors, &ck3.projectors) {
            Ok(g) if g.is_empty() || g == [0] => None,
            Ok(g) => Some(format!("grades {g:?}")),
            Err(e) => Some(e.to_string()),
        });
    }
    let solved = solve_coefficients(&dominating, &t1, &c1, &c2, &act.elements, &killed, a.unit())?;
    let coefficients = solved.as_ref().ok().cloned();
    report.run("descent.ansatz.solve", || solved.as_ref().err().cloned());
    report.run("descent.ansatz.idempotent", || match &coefficients {
        Some(u) => {
            let k = dominating.operator().scale(&u[0]).add(&t1.operator()).add(&c1.operator().scale(&u[1])).add(&c2.operator().scale(&u[2]));
            (k.mul(&k) != k.scale(&six)).then(|| "K∘K != 6K".to_string())
        }
        None => Some("no coefficients".into()),
    });
    report.run("descent.ansatz.matches", || match &coefficients {
        Some(u) => match dominating.scale(&u[0]).add(&t1).and_then(|k| k.add(&c1.scale(&u[1]))).and_then(|k| k.add(&c2.scale(&u[2]))) {
            Ok(k) => (k != kernel_b).then(|| format!("μ = {}, λ₁ = {}, λ₂ = {}: ansatz differs from 6q", u[0], u[1], u[2])),
            Err(e) => Some(e.to_string()),
        },
        None => Some("no coefficients".into()),
    });

    let spanning: Vec<Vec<S>> = (0..m).map(|k| image.column(k)).collect();
    let quotient = build_descended("X^[3]", &x3, &spanning, order, &pulled, Recipe::Quotient { cover: x3.clone(), order })?;
    let ck = ck_descend(&ck3, &quotient.p, order)?;
    report.run("descent.kernel_is_6q", || (ck.kernel != kernel_b).then(|| "ᵗΓ_p∘Γ_p != 6q".to_string()));
    report.extend(ck.report.clone());
    report.extend(verify_all(&ck.ck).prefixed("hilb3"));
    report.run("hilb3.palindromic", || {
        let r = quotient.variety.ranks();
        let rev: Vec<usize> = r.iter().rev().cloned().collect();
        (r != rev).then(|| format!("ranks {r:?}"))
    });

    let descent = DescentData {
        contracted: c,
        dominating,
        t1,
        c1,
        c2,
        coefficients,
        killed,
        image,
        q,
        omega_relative,
        assembled_tangent,
        nested: tangent,
        pulled_tangent: pulled,
        report: report.clone(),
    };
    Ok(Hilb3 { tower, actions, descent, quotient, ck, report })
}

