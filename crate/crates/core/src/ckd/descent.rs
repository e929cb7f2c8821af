use std::sync::Arc;

use rayon::prelude::*;

use super::{verify_ck, CKDecomposition, Provenance};
use crate::corresp::Correspondence;
use crate::error::{Error, Result};
use crate::exactalg::Scalar;
use crate::report::Report;
use crate::variety::Morphism;

/// Decomposition pushed down a generically finite map of degree `N`.
#[derive(Clone, Debug)]
pub struct DescentCk<S> {
    pub ck: CKDecomposition<S>,
    /// `K = ᵗΓ_p ∘ Γ_p` on the cover.
    pub kernel: Correspondence<S>,
    pub report: Report,
}

/// `π_Y^i = (1/N) Γ_p ∘ π_X^i ∘ ᵗΓ_p` for `p : X → Y` with `p_*p^* = N`.
pub fn ck_descend<S: Scalar>(ckx: &CKDecomposition<S>, p: &Morphism<S>, degree: usize) -> Result<DescentCk<S>> {
    let x = &p.source;
    let y = &p.target;
    if !Arc::ptr_eq(&ckx.variety, x) {
        return Err(Error::Mismatch("decomposition is not on the cover".into()));
    }
    if degree == 0 {
        return Err(Error::Precondition("degree must be positive".into()));
    }
    let n = S::from_int(degree as i64);
    let inv_n = n.recip().ok_or_else(|| Error::Singular("degree".into()))?;
    let gp = Correspondence::graph(p);
    let tgp = gp.transpose();
    let kernel = gp.then(&tgp)?;

    let mut report = Report::new();
    report.run("descent.degree", || match tgp.then(&gp) {
        Ok(c) => (c != Correspondence::diagonal(y).scale(&n)).then(|| format!("Γ_p∘ᵗΓ_p != {degree}·Δ")),
        Err(e) => Some(e.to_string()),
    });
    report.run("descent.kernel_grade0", || match kernel.grades(&ckx.projectors, &ckx.projectors) {
        Ok(g) if g.is_empty() || g == [0] => None,
        Ok(g) => Some(format!("p^*p_* has grades {g:?}")),
        Err(e) => Some(e.to_string()),
    });
    report.run("descent.kernel_commutes", || {
        for (i, pi) in ckx.projectors.iter().enumerate() {
            match (kernel.then(pi), pi.then(&kernel)) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(_), Ok(_)) => return Some(format!("p^*p_* does not commute with π^{i}")),
                (Err(e), _) | (_, Err(e)) => return Some(e.to_string()),
            }
        }
        None
    });
    if let Some(f) = report.failures().first() {
        return Err(Error::Precondition(format!("{}: {}", f.check_id, f.witness.clone().unwrap_or_default())));
    }

    let projectors = ckx
        .projectors
        .par_iter()
        .map(|pi| Ok(tgp.then(pi)?.then(&gp)?.scale(&inv_n)))
        .collect::<Result<Vec<_>>>()?;
    let ck = CKDecomposition::new(y.clone(), projectors, Provenance::Descent)?;

    // N²·π_Y^i∘π_Y^j = Γ_p∘K∘π_X^i∘π_X^j∘ᵗΓ_p.
    let n2 = n.times(&n);
    let len = ck.projectors.len();
    let bad: Option<String> = (0..len * len)
        .into_par_iter()
        .find_map_first(|ij| {
            let (i, j) = (ij / len, ij % len);
            let run = || -> Result<bool> {
                let lhs = ck.projectors[j].then(&ck.projectors[i])?.scale(&n2);
                let rhs = tgp.then(&ckx.projectors[j])?.then(&ckx.projectors[i])?.then(&kernel)?.then(&gp)?;
                Ok(lhs == rhs)
            };
            match run() {
                Ok(true) => None,
                Ok(false) => Some(format!("N²π^{i}∘π^{j} differs from the lifted product")),
                Err(e) => Some(e.to_string()),
            }
        });
    report.run("descent.lifted_products", || bad);
    report.extend(verify_ck(&ck).prefixed("descent"));
    Ok(DescentCk { ck, kernel, report })
}
