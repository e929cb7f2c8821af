use std::sync::Arc;

use super::{BlowUp, BundleData, Morphism, VarRef};
use crate::error::{Error, Result};
use crate::exactalg::{axpy, factorial, Matrix, Scalar};

/// Pullback along the strict transform `Z̃ ↪ X̃` of `Z ⊂ X` under
/// `X̃ = Bl_Y X`, with `Z̃ = Bl_{Y′} Z` and `Y′ = Y ∩ Z`.
///
/// `res_z` is `CH(X) → CH(Z)`. When `Y′` is nonempty, `strict` is the blow-up
/// of `Z` along `Y′` and `res_y` is `CH(Y) → CH(Y′)`; the normal bundle of
/// `Y′` in `Z` must be a sub-bundle of `N_{Y/X}|_{Y′}` so that `O_E(1)`
/// restricts to `O_{E_Z}(1)`.
pub fn strict_transform_pullback<S: Scalar>(
    bu: &BlowUp<S>,
    z: &VarRef<S>,
    res_z: &Matrix<S>,
    strict: Option<(&BlowUp<S>, &Matrix<S>)>,
) -> Result<Morphism<S>> {
    let nx = bu.n_base();
    let xt = &bu.variety;
    if res_z.rows() != z.n() || res_z.cols() != nx {
        return Err(Error::Mismatch("restriction to Z has the wrong shape".into()));
    }
    let (zt, cols): (VarRef<S>, Vec<Vec<S>>) = match strict {
        None => {
            let mut cols: Vec<Vec<S>> = (0..nx).map(|k| res_z.column(k)).collect();
            cols.resize(xt.n(), vec![S::zero(); z.n()]);
            (z.clone(), cols)
        }
        Some((bz, res_y)) => {
            if !Arc::ptr_eq(&bz.base, z) {
                return Err(Error::Mismatch("strict blow-up is not over Z".into()));
            }
            let ny = bu.n_center();
            let nyp = bz.n_center();
            if res_y.rows() != nyp || res_y.cols() != ny {
                return Err(Error::Mismatch("restriction to Y′ has the wrong shape".into()));
            }
            let mut cols: Vec<Vec<S>> = (0..nx).map(|k| bz.rho_pull(&res_z.column(k))).collect();
            for l in 1..=bu.r {
                for b in 0..ny {
                    let mut parts = vec![vec![S::zero(); nyp]; l];
                    parts[l - 1] = res_y.column(b);
                    cols.push(bz.push_parts(parts));
                }
            }
            (bz.variety.clone(), cols)
        }
    };
    let m = Matrix::from_columns(zt.n(), &cols);
    let mut f = Morphism::new(format!("strict({})", z.name), zt, xt.clone(), m)?;
    f.proper = true;
    Ok(f)
}

/// Normal-bundle data entering the strict-transform formula, all on `Y′`
/// except `n_zx` (on `Z`).
#[derive(Clone, Debug)]
pub struct StrictNormalInput<'a, S> {
    pub n_zx: &'a BundleData<S>,
    pub n_ypx: Option<&'a BundleData<S>>,
    pub n_ypy: Option<&'a BundleData<S>>,
    pub n_ypz: Option<&'a BundleData<S>>,
}

/// `c(N_{Z̃/X̃})` from `0 → N_{Z̃/X̃} → ρ′^*N_{Z/X} → j′_*π′^*N_{Y,Z/X} → 0`
/// where `N_{Y,Z/X} = N_{Y′/X} − N_{Y′/Y} − N_{Y′/Z}` in K-theory.
pub fn normal_bundle_of_strict_transform<S: Scalar>(strict: Option<&BlowUp<S>>, input: &StrictNormalInput<'_, S>) -> Result<BundleData<S>> {
    let rank = input.n_zx.rank;
    let bz = match strict {
        None => return Ok(input.n_zx.clone()),
        Some(b) => b,
    };
    let (nx, ny, nz) = match (input.n_ypx, input.n_ypy, input.n_ypz) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::Precondition("normal bundles of Y′ are required for a nonempty intersection".into())),
    };
    let yp = &bz.center.source;
    for b in [nx, ny, nz] {
        if !Arc::ptr_eq(&b.carrier, yp) {
            return Err(Error::Mismatch("normal bundle does not live on Y′".into()));
        }
    }
    let excess_rank = nx.rank as i64 - ny.rank as i64 - nz.rank as i64;
    if excess_rank < 0 {
        return Err(Error::RankCodim { rank: nx.rank, codim: ny.rank + nz.rank });
    }
    let a = &yp.chow;
    let mut ch = a.chern_character_vec(nx.rank as i64, &nx.chern)?;
    axpy(&mut ch, &-S::one(), &a.chern_character_vec(ny.rank as i64, &ny.chern)?);
    axpy(&mut ch, &-S::one(), &a.chern_character_vec(nz.rank as i64, &nz.chern)?);
    let zt = &bz.variety;
    let mut ch_n = zt.chow.chern_character_vec(rank as i64, &bz.rho_pull(&input.n_zx.chern))?;
    if excess_rank > 0 || ch.iter().any(|x| !x.is_zero()) {
        let ev = &bz.exceptional.variety.chow;
        let coeffs: Vec<S> = (0..=ev.top()).map(|k| S::one() / factorial::<S>(k + 1)).collect();
        let td_inv = ev.eval_series(&coeffs, bz.xi());
        let pushed = bz.j_push(&ev.mul_vec(&bz.exceptional.pi.pull(&ch), &td_inv));
        axpy(&mut ch_n, &-S::one(), &pushed);
    }
    let chern = zt.chow.truncate(&zt.chow.chern_from_character_vec(&ch_n), rank);
    BundleData::new(zt.clone(), rank, chern)
}

/// Data for the excess formula
/// `ρ^*(j_Z)_*α = (j_{Z̃})_*ρ′^*α + j_*(c(𝓔) · π^*f_*(s(Y′,Z) · i′^*α))_k`.
#[derive(Clone, Debug)]
pub struct ExcessConfig<'a, S> {
    pub bu: &'a BlowUp<S>,
    /// `j_Z: Z → X`.
    pub iz: &'a Morphism<S>,
    /// `j_{Z̃}: Z̃ → X̃`.
    pub strict: &'a Morphism<S>,
    /// `Z̃ = Bl_{Y′} Z` and `f: Y′ → Y`, absent when `Y ∩ Z = ∅`.
    pub inner: Option<(&'a BlowUp<S>, &'a Morphism<S>)>,
}

/// Right-hand side of the excess formula for `α ∈ CH(Z)`.
pub fn excess_pullback_of_pushforward<S: Scalar>(cfg: &ExcessConfig<'_, S>, alpha: &[S]) -> Result<Vec<S>> {
    let bu = cfg.bu;
    let z = &cfg.iz.source;
    let xt = &bu.variety.chow;
    let mut out = xt.zero_vec();
    let az = &z.chow;
    let codim_shift = bu.base.dim - z.dim;
    for p in 0..=az.top() {
        let a = az.component(alpha, p);
        if a.iter().all(|x| x.is_zero()) {
            continue;
        }
        let target_codim = p + codim_shift;
        let strict_part = match cfg.inner {
            None => cfg.strict.push(&a)?,
            Some((bz, _)) => cfg.strict.push(&bz.rho_pull(&a))?,
        };
        axpy(&mut out, &S::one(), &strict_part);
        if let Some((bz, f)) = cfg.inner {
            let yp = &bz.center.source.chow;
            let seg = yp.series_invert_vec(&bz.normal.chern)?;
            let inner = f.push(&yp.mul_vec(&seg, &bz.center.pull(&a)))?;
            let ev = &bu.exceptional.variety.chow;
            let on_e = ev.mul_vec(&bu.excess_chern()?, &bu.exceptional.pi.pull(&inner));
            let pushed = bu.j_push(&on_e);
            axpy(&mut out, &S::one(), &xt.component(&pushed, target_codim));
        }
    }
    Ok(out)
}
