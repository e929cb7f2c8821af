use crate::ckd::{AdmissibleSet, BlownUpSet};
use crate::corresp::{Correspondence, Tensor3};
use crate::error::{Error, Result};
use crate::exactalg::{Matrix, Scalar};
use crate::report::Report;
use crate::variety::{excess_pullback_of_pushforward, BlowUp, ExcessConfig, Morphism};

use super::tower::Hilb3Tower;

/// `(j ×_Y j)_*[c(N)/((1−ξ₁)(1−ξ₂))]_d` for `N` with Chern class `normal`.
pub fn diagonal_correction_l2<S: Scalar>(bu: &BlowUp<S>, normal: &[S]) -> Result<Correspondence<S>> {
    let e = &bu.exceptional;
    let ea = &e.variety.chow;
    let y = &bu.center.source;
    let codim = (bu.base.dim - y.dim).checked_sub(1 + 1).ok_or_else(|| Error::Precondition("center of codimension < 2".into()))?;
    let n = ea.dim();
    let mut cls: Matrix<S> = Matrix::zeros(n, n);
    let c = e.pi.pull(normal);
    for k in 0..=codim {
        let ck = ea.component(&c, k);
        for a in 0..=codim - k {
            let left = ea.mul_vec(&ck, &ea.pow_vec(&e.xi, a));
            let right = ea.pow_vec(&e.xi, codim - k - a);
            for (i, l) in left.iter().enumerate().filter(|(_, l)| !l.is_zero()) {
                for (jx, r) in right.iter().enumerate().filter(|(_, r)| !r.is_zero()) {
                    cls.entry_mut(i, jx).add_product(l, r);
                }
            }
        }
    }
    let fiber = Correspondence::diagonal(y).pullback_along(&e.pi, &e.pi)?;
    fiber.intersect(&Correspondence::new(e.variety.clone(), e.variety.clone(), cls)?)?.pushforward_along(&bu.j, &bu.j)
}

/// `(ρ × ρ)^*Δ_X − Δ_{X̃}` from the ring map.
pub fn diagonal_pullback_l2<S: Scalar>(bu: &BlowUp<S>) -> Result<Correspondence<S>> {
    Correspondence::diagonal(&bu.base).pullback_along(&bu.rho, &bu.rho)?.sub(&Correspondence::diagonal(&bu.variety))
}

/// `(ρ³)^*Δ⁽³⁾_X − Δ⁽³⁾_{X̃}` from the ring map.
pub fn diagonal_pullback_l3<S: Scalar>(bu: &BlowUp<S>) -> Result<Tensor3<S>> {
    let rho = &bu.rho;
    Tensor3::small_diagonal(&bu.base).pullback([rho, rho, rho])?.sub(&Tensor3::small_diagonal(&bu.variety))
}

/// Coefficients of `(ρ³)^*Δ⁽³⁾_X − Δ⁽³⁾_{X̃}` on the classes
/// `(j ×_Y j ×_Y j)_*(ξ₁^a ξ₂^b ξ₃^c π^*y)`, if it lies in their span.
#[derive(Clone, Debug)]
pub struct SmallDiagonalExcess<S> {
    /// `((a, b, c), basis index of y, coefficient)`.
    pub terms: Vec<((usize, usize, usize), usize, S)>,
}

pub fn solve_small_diagonal_excess<S: Scalar>(bu: &BlowUp<S>) -> Result<Option<SmallDiagonalExcess<S>>> {
    let target = diagonal_pullback_l3(bu)?;
    let e = &bu.exceptional;
    let ea = &e.variety.chow;
    let y = &bu.center.source;
    let ya = &y.chow;
    let dim_fiber = 3 * e.variety.dim - 2 * y.dim;
    let codim = dim_fiber - bu.base.dim;
    let base = Tensor3::small_diagonal(y).pullback([&e.pi, &e.pi, &e.pi])?;
    let ops: Vec<Matrix<S>> = (0..=e.r).map(|a| ea.mult_operator(&ea.pow_vec(&e.xi, a))).collect();
    let f = e.variety.clone();
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    for a in 0..=e.r {
        for b in 0..=e.r {
            for c in 0..=e.r {
                let Some(rest) = codim.checked_sub(a + b + c) else { continue };
                for &yi in ya.basis_in_codim(rest) {
                    let first = ea.mult_operator(&ea.mul_vec(&ea.pow_vec(&e.xi, a), &e.pi.pull(&ya.basis_vec(yi))));
                    let t = base.apply(0, &first, f.clone())?.apply(1, &ops[b], f.clone())?.apply(2, &ops[c], f.clone())?;
                    let pushed = t.pushforward([&bu.j, &bu.j, &bu.j])?;
                    labels.push(((a, b, c), yi));
                    columns.push(pushed);
                }
            }
        }
    }
    let mut rows: Vec<[u32; 3]> = target.entries.keys().copied().collect();
    for col in &columns {
        rows.extend(col.entries.keys().copied());
    }
    rows.sort_unstable();
    rows.dedup();
    let m = Matrix::from_fn(rows.len(), columns.len(), |r, k| columns[k].entries.get(&rows[r]).cloned().unwrap_or_else(S::zero));
    let rhs: Vec<S> = rows.iter().map(|k| target.entries.get(k).cloned().unwrap_or_else(S::zero)).collect();
    Ok(m.solve(&rhs).map(|sol| SmallDiagonalExcess {
        terms: labels.into_iter().zip(sol).filter(|(_, s)| !s.is_zero()).map(|((abc, yi), s)| (abc, yi, s)).collect(),
    }))
}

/// Both diagonal identities on `bu`, using `normal` for `c(N)` in the `l = 2` formula.
pub fn verify_diagonal_lemma<S: Scalar>(bu: &BlowUp<S>, normal: &[S]) -> Report {
    let mut rep = Report::new();
    rep.run("diagonal.l2", || {
        let lhs = match diagonal_pullback_l2(bu) {
            Ok(c) => c,
            Err(e) => return Some(e.to_string()),
        };
        match diagonal_correction_l2(bu, normal) {
            Ok(rhs) => lhs.sub(&rhs).ok().and_then(|d| d.coeffs.first_nonzero()).map(|(i, j, v)| {
                format!("coefficient of {} ⊗ {} off by {v}", bu.variety.chow.name(i), bu.variety.chow.name(j))
            }),
            Err(e) => Some(e.to_string()),
        }
    });
    rep.run("diagonal.l3", || match solve_small_diagonal_excess(bu) {
        Ok(Some(_)) => None,
        Ok(None) => Some("(ρ³)^*Δ⁽³⁾ − Δ⁽³⁾ is not supported on E ×_Y E ×_Y E as a polynomial in ξ_k".into()),
        Err(e) => Some(e.to_string()),
    });
    rep
}

/// Checks the excess formula for `ρ^*(j_Z)_*α`, `α` running over a basis of
/// `CH(Z)`, for every member `Z` that survives the blow-up of `old` along
/// `center`.
pub fn verify_excess_transition<S: Scalar>(old: &AdmissibleSet<S>, center: usize, new: &BlownUpSet<S>) -> Result<Report> {
    let bu = new.ambient_blow_up();
    let mut rep = Report::new();
    for (b, &o) in new.old_index.iter().enumerate() {
        if b == new.ambient {
            continue;
        }
        let iz = old.inclusion(o, old.ambient)?.map;
        let strict = new.set.inclusion(b, new.ambient)?.map;
        let f = match old.intersection(o, center)? {
            None => None,
            Some(k) if k == center => Some(Morphism::identity(old.members[center].variety.clone())),
            Some(k) => Some(old.inclusion(k, center)?.map),
        };
        let inner = match (&new.blow_ups[b], &f) {
            (Some(bz), Some(f)) => Some((bz, f)),
            (None, None) => None,
            _ => return Err(Error::Malformed(format!("{} has inconsistent blow-up data", new.set.members[b].name))),
        };
        let cfg = ExcessConfig { bu, iz: &iz, strict: &strict, inner };
        let label = format!("excess.{}.{}", old.members[center].name, old.members[o].name);
        rep.run(label, || {
            let z = &iz.source.chow;
            for i in 0..z.dim() {
                let alpha = z.basis_vec(i);
                let lhs = match iz.push(&alpha) {
                    Ok(v) => bu.rho_pull(&v),
                    Err(e) => return Some(e.to_string()),
                };
                match excess_pullback_of_pushforward(&cfg, &alpha) {
                    Ok(rhs) if rhs == lhs => {}
                    Ok(_) => return Some(format!("α = {}", z.name(i))),
                    Err(e) => return Some(e.to_string()),
                }
            }
            None
        });
    }
    Ok(rep)
}

/// The excess formula on every stage transition of the tower.
pub fn verify_excess_configurations<S: Scalar>(tower: &Hilb3Tower<S>) -> Result<Report> {
    let mut rep = verify_excess_transition(&tower.s0, super::tower::S0_SMALL, &tower.stage1)?;
    rep.extend(verify_excess_transition(&tower.s1, super::tower::S1_D, &tower.stage2)?);
    let wt = tower.stage2.set.index_of("W~").ok_or_else(|| Error::Malformed("W~ missing from the second stage".into()))?;
    rep.extend(verify_excess_transition(&tower.stage2.set, wt, &tower.stage3)?);
    Ok(rep)
}
