use std::sync::Arc;

use super::projbundle::neg_half;
use super::{chern_grade_defect, morphism_grade0, verify_ck, CKDecomposition, Provenance};
use crate::corresp::{BlockCorrespondence, Correspondence, MotiveSum};
use crate::error::{Error, Result};
use crate::exactalg::Scalar;
use crate::report::Report;
use crate::variety::BlowUp;

/// Decomposition of `Bl_Y X` with the intermediate block correspondences.
#[derive(Clone, Debug)]
pub struct BlowUpCk<S> {
    pub ck: CKDecomposition<S>,
    /// `Φ : 𝔥(X) ⊕ ⊕_{l=1}^r 𝔥(Y)(−l) → 𝔥(X̃)`.
    pub phi: BlockCorrespondence<S>,
    /// `D ∘ σ ∘ ᵗΦ ∘ Φ = 1 + η`.
    pub unipotent: BlockCorrespondence<S>,
    pub psi: BlockCorrespondence<S>,
    /// `D ∘ σ ∘ ᵗΨ`, the inverse of `Ψ`.
    pub psi_inv: BlockCorrespondence<S>,
    pub report: Report,
}

fn witness(r: Result<Option<String>>) -> Option<String> {
    r.unwrap_or_else(|e| Some(e.to_string()))
}

pub fn ck_blow_up<S: Scalar>(ckx: &CKDecomposition<S>, cky: &CKDecomposition<S>, bu: &BlowUp<S>) -> Result<BlowUpCk<S>> {
    let x = &bu.base;
    let y = &bu.center.source;
    if !Arc::ptr_eq(&ckx.variety, x) || !Arc::ptr_eq(&cky.variety, y) {
        return Err(Error::Mismatch("decompositions must live on the base and the center".into()));
    }
    for (name, ck) in [("base", ckx), ("center", cky)] {
        if let Some(f) = verify_ck(ck).failures().first() {
            return Err(Error::Precondition(format!("{name} CK fails {}", f.check_id)));
        }
    }
    if let Some(w) = chern_grade_defect(cky, &bu.normal.chern) {
        return Err(Error::Precondition(format!("normal bundle Chern classes are not of grade 0: {w}")));
    }
    if let Some(w) = morphism_grade0(&bu.center, cky, ckx)? {
        return Err(Error::Precondition(format!("center inclusion is not of grade 0: {w}")));
    }
    if bu.is_identity() {
        let ck = CKDecomposition { provenance: Provenance::BlowUp, ..ckx.clone() };
        let source = MotiveSum::single(x.clone());
        let id = BlockCorrespondence::identity(&source);
        return Ok(BlowUpCk { ck, phi: id.clone(), unipotent: id.clone(), psi: id.clone(), psi_inv: id, report: Report::new() });
    }
    let xt = &bu.variety;
    let e = &bu.exceptional;
    let r = bu.r;

    let gj = Correspondence::graph(&bu.j);
    let tgj = gj.transpose();
    let h = gj.then(&tgj)?.neg();
    let tpi = Correspondence::graph(&e.pi).transpose();
    let mut entries = vec![Correspondence::graph(&bu.rho).transpose()];
    let mut hl = Correspondence::diagonal(&e.variety);
    for _l in 1..=r {
        entries.push(tpi.then(&hl)?.then(&gj)?);
        hl = hl.then(&h)?;
    }

    let mut summands = vec![(x.clone(), 0)];
    summands.extend((1..=r).map(|l| (y.clone(), l as i64)));
    let source = MotiveSum::new(summands);
    let k = x.dim as i64;
    let phi = BlockCorrespondence::row(source.clone(), (xt.clone(), 0), entries)?;
    let tphi = phi.transpose(k);
    let sigma = BlockCorrespondence::matching(&tphi.target, &source)?;
    let mut signs = vec![Correspondence::diagonal(x)];
    signs.extend((1..=r).map(|_| Correspondence::diagonal(y).neg()));
    let dsign = BlockCorrespondence::diagonal(&source, signs);
    let ds = sigma.then(&dsign)?;
    let unipotent = phi.then(&tphi)?.then(&ds)?;
    let psi = unipotent.unipotent_power(&neg_half())?.then(&phi)?;
    let psi_inv = psi.transpose(k).then(&ds)?;

    let mut report = Report::new();
    report.run("blowup_ck.left_inverse", || {
        witness(psi.then(&psi_inv).map(|c| (c != BlockCorrespondence::identity(&source)).then(|| "Dσᵗψ∘Ψ != id".to_string())))
    });
    report.run("blowup_ck.right_inverse", || {
        witness(psi_inv.then(&psi).and_then(|c| {
            let e = c.single_entry()?;
            Ok((*e != Correspondence::diagonal(xt)).then(|| "Ψ∘Dσᵗψ != Δ".to_string()))
        }))
    });
    if !report.all_pass() {
        return Err(Error::Verification(format!("blow-up motive isomorphism on {}", xt.name)));
    }

    let projectors = (0..=2 * xt.dim)
        .map(|i| {
            let mut diag = vec![ckx.pi_or_zero(i as i64)];
            diag.extend((1..=r).map(|l| cky.pi_or_zero(i as i64 - 2 * l as i64)));
            let mid = BlockCorrespondence::diagonal(&source, diag);
            Ok(psi_inv.then(&mid)?.then(&psi)?.single_entry()?.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let ck = CKDecomposition::new(xt.clone(), projectors, Provenance::BlowUp)?;
    Ok(BlowUpCk { ck, phi, unipotent, psi, psi_inv, report })
}
