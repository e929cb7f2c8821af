use crate::error::Result;
use crate::exactalg::{axpy, sub_vec, Matrix, Scalar};
use crate::variety::{Morphism, VarRef};

use super::descent::{contracted, e_ij_classes};
use super::square::Nested23;
use super::tower::Hilb3Tower;

/// `p^*c(T_{X^[3]})` through the nested scheme: `X₃ → X^[2,3]` sends an
/// ordered triple to `{x₁, x₂} ⊂ {x₁, x₂, x₃}`, and on `X^[n,n+1]`
///
/// `T_{n+1} − T_n = χ(I_n, ℒ ⊗ O_x) + χ(ℒ ⊗ O_x, I_n) − χ(O_x, O_x)`
///
/// with `ℒ = ker(O_{Z_{n+1}} → O_{Z_n})`.
#[derive(Clone, Debug)]
pub struct NestedTangent<S> {
    /// `X₃ → X^[1,2]`, `(x₁, x₂)`.
    pub pair: Morphism<S>,
    /// `X₃ → X × X^[2]`, `(x₃, {x₁, x₂})`.
    pub point_and_pair: Morphism<S>,
    /// `[Ẽ₁₂] + [E″₁] + [E_W]`, the pullback of the exceptional divisor of `X^[1,2]`.
    pub pair_divisor: Vec<S>,
    /// `D₃ = [Ẽ₁₃] + [Ẽ₂₃] + [E″₁] + 2[E_W]` with `ℒ = O(−D₃)`.
    pub residual_divisor: Vec<S>,
    /// `ch(O_𝒵)` on `X × X^[2]` for the universal family `𝒵 = X^[1,2]`.
    pub universal_character: Vec<S>,
    pub character: Vec<S>,
    pub chern: Vec<S>,
}

fn neg<S: Scalar>(v: &[S]) -> Vec<S> {
    v.iter().map(|x| -x.clone()).collect()
}

pub fn pulled_tangent_nested<S: Scalar>(tower: &Hilb3Tower<S>, nested: &Nested23<S>) -> Result<NestedTangent<S>> {
    let x = &tower.base;
    let xa = &x.chow;
    let n = x.n();
    let x3 = tower.x3();
    let a = &x3.chow;
    let bu3 = tower.blow_up3();

    let down = bu3.rho.then(&tower.blow_up2().rho)?.then(&tower.blow_up1().rho)?;
    let cube = &tower.cube;
    let square = &tower.square;
    let unit = xa.unit();
    let factor = |k: usize, v: &[S]| -> Vec<S> {
        let parts: [&[S]; 3] = match k {
            0 => [v, unit, unit],
            1 => [unit, v, unit],
            _ => [unit, unit, v],
        };
        down.pull(&cube.tensor(&square.tensor(parts[0], parts[1]), parts[2]))
    };

    let es = e_ij_classes(tower);
    let et: Vec<Vec<S>> = es.iter().map(|e| bu3.rho_pull(e)).collect();
    let c = contracted(tower)?;
    let e1 = c.e1.map.push(c.e1.map.source.chow.unit())?;
    let ew = bu3.exceptional_class();
    let mut pair_divisor = et[0].clone();
    axpy(&mut pair_divisor, &S::one(), &e1);
    axpy(&mut pair_divisor, &S::one(), &ew);
    let mut residual_divisor = et[1].clone();
    axpy(&mut residual_divisor, &S::one(), &et[2]);
    axpy(&mut residual_divisor, &S::one(), &e1);
    axpy(&mut residual_divisor, &S::from_int(2), &ew);

    // X₃ → Bl_Δ(X × X): ρ^*(a ⊗ b) ↦ x₁^*a x₂^*b, j_*π^*β = E·ρ^*(β ⊗ 1) ↦ D·x₁^*β.
    let nest = &nested.hilb.nested;
    let n12 = nest.variety();
    let bu = &nest.blow_up;
    let xs: Vec<[Vec<S>; 3]> = (0..n).map(|i| [factor(0, &xa.basis_vec(i)), factor(1, &xa.basis_vec(i)), factor(2, &xa.basis_vec(i))]).collect();
    let cols: Vec<Vec<S>> = (0..n12.n())
        .map(|col| {
            if col < n * n {
                a.mul_vec(&xs[col / n][0], &xs[col % n][1])
            } else {
                let b = col - n * n;
                a.mul_vec(&pair_divisor, &xs[b % bu.n_center()][0])
            }
        })
        .collect();
    let pair = Morphism::new("pair", x3.clone(), n12.clone(), Matrix::from_columns(a.dim(), &cols))?;

    let hilb = &nested.hilb;
    let h = hilb.variety();
    let g_pull = pair.pullback.mul(&hilb.quotient.p.pullback);
    let prod = &nested.product;
    let cols: Vec<Vec<S>> = (0..prod.variety.n()).map(|q| a.mul_vec(&xs[q / h.n()][2], &g_pull.column(q % h.n()))).collect();
    let point_and_pair = Morphism::new("point_and_pair", x3.clone(), prod.variety.clone(), Matrix::from_columns(a.dim(), &cols))?;

    // ch(i_*O) = i_*(td(N)^{-1}).
    let ya = &n12.chow;
    let td_inv = ya.series_invert_vec(&ya.todd_vec(&nested.normal.chern)?)?;
    let universal_character = nested.inclusion.push(&td_inv)?;
    let pa = &prod.variety.chow;
    let z = point_and_pair.pull(&universal_character);
    let z_dual = point_and_pair.pull(&pa.dual_character_vec(&universal_character));

    let ch_t2 = g_pull.mul_vec(&h.chow.chern_character_vec(h.dim as i64, &h.tangent)?);
    let tx = factor(2, &x.tangent);
    let ch_tx = a.chern_character_vec(2, &tx)?;
    let k_inv = a.component(&tx, 1);
    let mut l_inv_k_inv = residual_divisor.clone();
    axpy(&mut l_inv_k_inv, &S::one(), &k_inv);

    let one = a.unit();
    let mut ch = ch_t2;
    axpy(&mut ch, &S::one(), &a.mul_vec(&a.exp_vec(&neg(&residual_divisor)), &sub_vec(one, &z_dual)));
    axpy(&mut ch, &S::one(), &a.mul_vec(&a.exp_vec(&l_inv_k_inv), &sub_vec(one, &z)));
    axpy(&mut ch, &-S::one(), one);
    axpy(&mut ch, &S::one(), &ch_tx);
    axpy(&mut ch, &-S::one(), &a.exp_vec(&k_inv));
    let chern = a.truncate(&a.chern_from_character_vec(&ch), x3.dim);
    Ok(NestedTangent { pair, point_and_pair, pair_divisor, residual_divisor, universal_character, character: ch, chern })
}

/// `c₁(T_{X₃}) + ΣẼ_ij + 3[E″₁] + 4[E_W]`, the first Chern class predicted by
/// the discrepancies of `p` along its ramification and contracted divisors.
pub fn discrepancy_c1<S: Scalar>(tower: &Hilb3Tower<S>) -> Result<Vec<S>> {
    let x3: &VarRef<S> = tower.x3();
    let a = &x3.chow;
    let bu3 = tower.blow_up3();
    let mut c1 = a.component(&x3.tangent, 1);
    for e in e_ij_classes(tower) {
        axpy(&mut c1, &S::one(), &bu3.rho_pull(&e));
    }
    let c = contracted(tower)?;
    axpy(&mut c1, &S::from_int(3), &c.e1.map.push(c.e1.map.source.chow.unit())?);
    axpy(&mut c1, &S::from_int(4), &bu3.exceptional_class());
    Ok(c1)
}
