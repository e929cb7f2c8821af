use std::collections::VecDeque;

use super::{chern_grade_defect, ck_blow_up, morphism_grade0, verify_ck, verify_multiplicative, BlowUpCk, CKDecomposition};
use crate::error::{Error, Result};
use crate::exactalg::{Matrix, Scalar};
use crate::report::Report;
use crate::variety::{
    build_blow_up, normal_bundle_of_strict_transform, strict_transform_pullback, vec_witness, whitney_normal, BlowUp, BundleData,
    Morphism, StrictNormalInput, VarRef,
};

#[derive(Clone, Debug)]
pub struct Member<S> {
    pub name: String,
    pub variety: VarRef<S>,
    pub ck: CKDecomposition<S>,
}

/// A closed embedding `sub ⊂ sup` between members with its normal bundle.
#[derive(Clone, Debug)]
pub struct Inclusion<S> {
    pub sub: usize,
    pub sup: usize,
    pub map: Morphism<S>,
    pub normal: BundleData<S>,
}

/// A finite set of smooth closed subvarieties of the ambient member with
/// declared embeddings and pairwise intersections.
#[derive(Clone, Debug)]
pub struct AdmissibleSet<S> {
    pub ambient: usize,
    pub members: Vec<Member<S>>,
    pub inclusions: Vec<Inclusion<S>>,
    /// Intersections of non-nested pairs; `None` means empty.
    pub intersections: Vec<(usize, usize, Option<usize>)>,
}

impl<S: Scalar> AdmissibleSet<S> {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.members.iter().position(|m| m.name == name)
    }

    pub fn member(&self, name: &str) -> Option<&Member<S>> {
        self.members.iter().find(|m| m.name == name)
    }

    /// Chain of declared inclusions from `sub` up to `sup`.
    fn chain(&self, sub: usize, sup: usize) -> Option<Vec<usize>> {
        let mut prev: Vec<Option<usize>> = vec![None; self.inclusions.len()];
        let mut seen = vec![false; self.members.len()];
        let mut queue = VecDeque::new();
        seen[sub] = true;
        queue.push_back((sub, None::<usize>));
        while let Some((m, via)) = queue.pop_front() {
            if m == sup {
                let mut path = Vec::new();
                let mut cur = via;
                while let Some(e) = cur {
                    path.push(e);
                    cur = prev[e];
                }
                path.reverse();
                return Some(path);
            }
            for (e, inc) in self.inclusions.iter().enumerate() {
                if inc.sub == m && !seen[inc.sup] {
                    seen[inc.sup] = true;
                    prev[e] = via;
                    queue.push_back((inc.sup, Some(e)));
                }
            }
        }
        None
    }

    /// `sub ⊆ sup` through declared inclusions.
    pub fn contains(&self, sup: usize, sub: usize) -> bool {
        sub == sup || self.chain(sub, sup).is_some()
    }

    /// The embedding `sub ⊂ sup`, composing declared inclusions; normal
    /// bundles compose by `c(N_{a/c}) = c(N_{a/b}) · c(N_{b/c})|_a`.
    pub fn inclusion(&self, sub: usize, sup: usize) -> Result<Inclusion<S>> {
        let path = self.chain(sub, sup).filter(|p| !p.is_empty()).ok_or_else(|| {
            Error::Precondition(format!("{} is not declared inside {}", self.members[sub].name, self.members[sup].name))
        })?;
        let mut acc = self.inclusions[path[0]].clone();
        for &e in &path[1..] {
            let next = &self.inclusions[e];
            let map = acc.map.then(&next.map)?;
            let a = &acc.map.source.chow;
            let chern = a.mul_vec(&acc.normal.chern, &acc.map.pull(&next.normal.chern));
            let normal = BundleData::new(acc.map.source.clone(), acc.normal.rank + next.normal.rank, chern)?;
            acc = Inclusion { sub, sup: next.sup, map, normal };
        }
        Ok(acc)
    }

    /// `a ∩ b` as a member index, `None` when empty.
    pub fn intersection(&self, a: usize, b: usize) -> Result<Option<usize>> {
        if self.contains(b, a) {
            return Ok(Some(a));
        }
        if self.contains(a, b) {
            return Ok(Some(b));
        }
        self.intersections
            .iter()
            .find(|(p, q, _)| (*p, *q) == (a, b) || (*p, *q) == (b, a))
            .map(|(_, _, k)| *k)
            .ok_or_else(|| Error::Precondition(format!("intersection of {} and {} is not declared", self.members[a].name, self.members[b].name)))
    }
}

fn fail_on(r: Result<Option<String>>) -> Option<String> {
    r.unwrap_or_else(|e| Some(e.to_string()))
}

/// Completeness and admissibility of a declared set.
pub fn validate_admissible<S: Scalar>(set: &AdmissibleSet<S>) -> Report {
    let mut rep = Report::new();
    let n = set.members.len();
    rep.run("complete.ambient", || {
        if set.ambient >= n {
            return Some("ambient index out of range".into());
        }
        (0..n).find(|&m| !set.contains(set.ambient, m)).map(|m| format!("{} is not inside the ambient member", set.members[m].name))
    });
    rep.run("complete.intersections", || {
        for a in 0..n {
            for b in a + 1..n {
                match set.intersection(a, b) {
                    Err(e) => return Some(e.to_string()),
                    Ok(Some(k)) if !(set.contains(a, k) && set.contains(b, k)) => {
                        return Some(format!("{} is not inside both {} and {}", set.members[k].name, set.members[a].name, set.members[b].name))
                    }
                    Ok(_) => {}
                }
            }
        }
        None
    });
    for m in &set.members {
        let mut r = verify_ck(&m.ck);
        r.extend(verify_multiplicative(&m.ck));
        rep.extend(r.prefixed(&format!("admissible.{}", m.name)));
    }
    for inc in &set.inclusions {
        let (sub, sup) = (&set.members[inc.sub], &set.members[inc.sup]);
        let tag = format!("admissible.{}<{}", sub.name, sup.name);
        rep.run(format!("{tag}.normal_whitney"), || {
            fail_on(whitney_normal(&inc.map).map(|w| {
                if w.rank != inc.normal.rank {
                    return Some(format!("rank {} against codimension {}", inc.normal.rank, w.rank));
                }
                vec_witness(&sub.variety.chow, &inc.normal.chern, &w.chern)
            }))
        });
        rep.run(format!("{tag}.normal_grade0"), || chern_grade_defect(&sub.ck, &inc.normal.chern));
        rep.run(format!("{tag}.inclusion_grade0"), || fail_on(morphism_grade0(&inc.map, &sub.ck, &sup.ck)));
    }
    rep
}

/// `Bl_Y(S)` with the data produced along the way.
#[derive(Clone, Debug)]
pub struct BlownUpSet<S> {
    pub set: AdmissibleSet<S>,
    /// Old index of each new member.
    pub old_index: Vec<usize>,
    /// `Ỹ_j = Bl_{Y ∩ Y_j} Y_j` for members meeting the center.
    pub blow_ups: Vec<Option<BlowUp<S>>>,
    pub cks: Vec<Option<BlowUpCk<S>>>,
    /// Index of the new ambient member.
    pub ambient: usize,
}

impl<S: Scalar> BlownUpSet<S> {
    pub fn ambient_blow_up(&self) -> &BlowUp<S> {
        self.blow_ups[self.ambient].as_ref().expect("the ambient member contains the center")
    }
}

/// Strict transforms of the members not contained in `center`, with their
/// blow-up decompositions, embeddings and normal bundles.
pub fn blow_up_admissible<S: Scalar>(set: &AdmissibleSet<S>, center: usize) -> Result<BlownUpSet<S>> {
    let n = set.members.len();
    let survivors: Vec<usize> = (0..n).filter(|&j| !set.contains(center, j)).collect();
    let centers: Vec<Option<usize>> = survivors.iter().map(|&j| set.intersection(j, center)).collect::<Result<_>>()?;
    let mut blow_ups = Vec::with_capacity(survivors.len());
    let mut cks = Vec::with_capacity(survivors.len());
    let mut members = Vec::with_capacity(survivors.len());
    for (&j, c) in survivors.iter().zip(&centers) {
        let m = &set.members[j];
        match c {
            Some(k) => {
                let inc = set.inclusion(*k, j)?;
                let bu = build_blow_up(&m.variety, &inc.map, &inc.normal)?;
                let ck = ck_blow_up(&m.ck, &set.members[*k].ck, &bu)?;
                members.push(Member { name: format!("{}~", m.name), variety: bu.variety.clone(), ck: ck.ck.clone() });
                blow_ups.push(Some(bu));
                cks.push(Some(ck));
            }
            None => {
                members.push(m.clone());
                blow_ups.push(None);
                cks.push(None);
            }
        }
    }
    let new_of = |old: usize| survivors.iter().position(|&j| j == old);

    let mut inclusions = Vec::new();
    for inc in &set.inclusions {
        let (Some(a), Some(b)) = (new_of(inc.sub), new_of(inc.sup)) else { continue };
        let (map, normal) = match (&blow_ups[b], centers[b]) {
            (None, _) => (inc.map.clone(), inc.normal.clone()),
            (Some(bub), Some(kb)) => {
                let res_z = &inc.map.pullback;
                match (&blow_ups[a], centers[a]) {
                    (None, _) => {
                        let map = strict_transform_pullback(bub, &inc.map.source, res_z, None)?;
                        (map, inc.normal.clone())
                    }
                    (Some(bua), Some(ka)) => {
                        let res_y: Matrix<S> =
                            if ka == kb { Matrix::identity(set.members[ka].variety.n()) } else { set.inclusion(ka, kb)?.map.pullback };
                        let map = strict_transform_pullback(bub, &inc.map.source, res_z, Some((bua, &res_y)))?;
                        let n_ypx = set.inclusion(ka, inc.sup)?.normal;
                        let n_ypy = if ka == kb { BundleData::trivial(set.members[ka].variety.clone(), 0) } else { set.inclusion(ka, kb)?.normal };
                        let n_ypz = set.inclusion(ka, inc.sub)?.normal;
                        let input = StrictNormalInput { n_zx: &inc.normal, n_ypx: Some(&n_ypx), n_ypy: Some(&n_ypy), n_ypz: Some(&n_ypz) };
                        (map, normal_bundle_of_strict_transform(Some(bua), &input)?)
                    }
                    (Some(_), None) => unreachable!("blow-ups carry their center"),
                }
            }
            (Some(_), None) => unreachable!("blow-ups carry their center"),
        };
        inclusions.push(Inclusion { sub: a, sup: b, map, normal });
    }

    let mut intersections = Vec::new();
    for (p, q, k) in &set.intersections {
        let (Some(a), Some(b)) = (new_of(*p), new_of(*q)) else { continue };
        intersections.push((a, b, k.and_then(new_of)));
    }
    let ambient = new_of(set.ambient).ok_or_else(|| Error::Precondition("the center cannot contain the ambient member".into()))?;
    let out = AdmissibleSet { ambient, members, inclusions, intersections };
    Ok(BlownUpSet { set: out, old_index: survivors, blow_ups, cks, ambient })
}
