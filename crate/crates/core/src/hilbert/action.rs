use crate::ckd::morphism_grade0;
use crate::error::{Error, Result};
use crate::exactalg::{Matrix, Scalar};
use crate::report::Report;
use crate::variety::{GroupAction, Morphism};

use super::first_failure;
use super::tower::{member, Hilb3Tower, PAIRS};

/// `𝔖₃` acting on every stage of the tower by push-forward.
#[derive(Clone, Debug)]
pub struct S3Actions<S> {
    /// Actions on `CH(X₀) … CH(X₃)`.
    pub stages: Vec<GroupAction<S>>,
    /// `d_perm[g][k] = (k′, swapped)`: `g` maps `Δ̃_k` onto `Δ̃_{k′}`,
    /// composed with the factor swap of `X × X` when `swapped`.
    pub d_perm: Vec<Vec<(usize, bool)>>,
    pub report: Report,
}

impl<S: Scalar> S3Actions<S> {
    pub fn top(&self) -> &GroupAction<S> {
        &self.stages[3]
    }
}

/// Elements of `𝔖₃` as permutations of `{0, 1, 2}`, identity first.
pub fn s3_perms() -> Vec<Vec<usize>> {
    vec![vec![0, 1, 2], vec![1, 0, 2], vec![0, 2, 1], vec![2, 1, 0], vec![1, 2, 0], vec![2, 0, 1]]
}

fn permutation<S: Scalar>(n: usize, img: impl Fn(usize) -> usize) -> Matrix<S> {
    let mut m = Matrix::zeros(n, n);
    for c in 0..n {
        m.set(img(c), c, S::one());
    }
    m
}

/// `g_*` on `CH(X³)`: the class in factor `k` moves to factor `g(k)`.
fn cube_action<S: Scalar>(n: usize, g: &[usize]) -> Matrix<S> {
    permutation(n * n * n, |q| {
        let p = [q / (n * n), (q / n) % n, q % n];
        let mut out = [0; 3];
        for k in 0..3 {
            out[g[k]] = p[k];
        }
        (out[0] * n + out[1]) * n + out[2]
    })
}

/// Extends `g_*` from `CH(X)` to `CH(Bl_Y X)` given its action on the
/// blocks `j_*(ξ^{l−1}π^*β)`.
fn extend<S: Scalar>(base: &Matrix<S>, total: usize, block: impl Fn(usize) -> usize) -> Matrix<S> {
    let nb = base.rows();
    let mut m = Matrix::zeros(total, total);
    for i in 0..nb {
        for j in 0..nb {
            if !base.get(i, j).is_zero() {
                m.set(i, j, base.get(i, j).clone());
            }
        }
    }
    for c in nb..total {
        m.set(nb + block(c - nb), c, S::one());
    }
    m
}

pub fn s3_action<S: Scalar>(tower: &Hilb3Tower<S>) -> Result<S3Actions<S>> {
    let n = tower.base.n();
    let perms = s3_perms();
    let m0: Vec<Matrix<S>> = perms.iter().map(|g| cube_action(n, g)).collect();

    // Δ̃ block permutation from φ_{k′}^* ∘ g_* = σ^* ∘ φ_k^*.
    let phis: Vec<Matrix<S>> = (0..3)
        .map(|k| {
            let m = member(&tower.s0, &format!("D{}{}", PAIRS[k].0 + 1, PAIRS[k].1 + 1))?;
            Ok(tower.s0.inclusion(m, 0)?.map.pullback)
        })
        .collect::<Result<_>>()?;
    let nsq = n * n;
    let swap_sq: Matrix<S> = permutation(nsq, |p| (p % n) * n + p / n);
    let mut d_perm = Vec::new();
    for (g, mg) in perms.iter().zip(&m0) {
        let mut row = Vec::new();
        for phi_k in &phis {
            let found = (0..3).find_map(|k2| {
                let lhs = phis[k2].mul(mg);
                if lhs == *phi_k {
                    Some((k2, false))
                } else if lhs == swap_sq.mul(phi_k) {
                    Some((k2, true))
                } else {
                    None
                }
            });
            row.push(found.ok_or_else(|| Error::Verification(format!("{g:?} does not permute the diagonals Δ_ij")))?);
        }
        d_perm.push(row);
    }

    let bu1 = tower.blow_up1();
    let bu2 = tower.blow_up2();
    let bu3 = tower.blow_up3();
    let m1: Vec<Matrix<S>> = m0.iter().map(|m| extend(m, bu1.variety.n(), |b| b)).collect();
    let nd = tower.d.variety.n();
    let m2: Vec<Matrix<S>> = m1
        .iter()
        .zip(&d_perm)
        .map(|(m, dp)| {
            extend(m, bu2.variety.n(), |b| {
                let k = tower.d.offsets.iter().rposition(|&o| o <= b).unwrap_or(0);
                let local = b - tower.d.offsets[k];
                let (k2, swapped) = dp[k];
                let img = if swapped && local < nsq { (local % n) * n + local / n } else { local };
                debug_assert!(tower.d.offsets[k2] + img < nd);
                tower.d.offsets[k2] + img
            })
        })
        .collect();
    let m3: Vec<Matrix<S>> = m2.iter().map(|m| extend(m, bu3.variety.n(), |b| b)).collect();

    let vars = [tower.x0(), tower.x1(), tower.x2(), tower.x3()];
    let stages: Vec<GroupAction<S>> = [m0, m1, m2, m3]
        .into_iter()
        .zip(vars)
        .map(|(ms, x)| {
            GroupAction::symmetric(x.clone(), &perms, |g| ms[perms.iter().position(|p| p == g).expect("listed element")].clone())
        })
        .collect();

    let mut report = Report::new();
    for (k, act) in stages.iter().enumerate() {
        report.extend(act.verify().prefixed(&format!("s3.X{k}")));
    }
    let rhos = [&bu1.rho, &bu2.rho, &bu3.rho];
    for (k, rho) in rhos.iter().enumerate() {
        report.run(format!("s3.rho{}_equivariant", k + 1), || {
            let (lo, hi) = (&stages[k], &stages[k + 1]);
            (0..perms.len())
                .find(|&g| rho.pullback.mul(&lo.elements[g]) != hi.elements[g].mul(&rho.pullback))
                .map(|g| format!("ρ^*∘{} != {}∘ρ^*", lo.labels[g], hi.labels[g]))
        });
    }
    for (k, act) in stages.iter().enumerate() {
        let ck = tower.ck(k);
        report.run(format!("s3.X{k}.gamma_grade0"), || {
            for (g, m) in act.elements.iter().enumerate() {
                let f = match Morphism::new(act.labels[g].clone(), act.variety.clone(), act.variety.clone(), m.clone()) {
                    Ok(f) => f,
                    Err(e) => return Some(e.to_string()),
                };
                match morphism_grade0(&f, ck, ck) {
                    Ok(Some(w)) => return Some(format!("Γ_{}: {w}", act.labels[g])),
                    Err(e) => return Some(e.to_string()),
                    Ok(None) => {}
                }
            }
            None
        });
    }
    first_failure(&report, "s3 action")?;
    Ok(S3Actions { stages, d_perm, report })
}
