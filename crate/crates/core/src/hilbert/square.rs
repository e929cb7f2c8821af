use crate::ckd::{
    ck_blow_up, ck_descend, ck_product, validate_admissible, verify_all, AdmissibleSet, BlowUpCk, CKDecomposition, DescentCk, Inclusion,
    Member,
};
use crate::error::{Error, Result};
use crate::exactalg::{axpy, Matrix, Scalar};
use crate::report::Report;
use crate::variety::{build_blow_up, build_product, build_quotient, BlowUp, BundleData, GroupAction, Morphism, Product, Quotient, VarRef};

use super::check_base;

/// `X^[1,2] = Bl_Δ(X × X)` with the swap.
#[derive(Clone, Debug)]
pub struct Nested12<S> {
    pub square: Product<S>,
    pub ck_square: CKDecomposition<S>,
    /// `δ: X → X × X`.
    pub diagonal: Morphism<S>,
    pub blow_up: BlowUp<S>,
    pub ck: BlowUpCk<S>,
    /// `𝔖₂` on `CH(X^[1,2])`: swaps `ρ^*(a ⊗ b)`, fixes the exceptional classes.
    pub swap: GroupAction<S>,
}

impl<S: Scalar> Nested12<S> {
    pub fn variety(&self) -> &VarRef<S> {
        &self.blow_up.variety
    }
}

/// `X^[2] = X^[1,2] / 𝔖₂`.
#[derive(Clone, Debug)]
pub struct HilbSquare<S> {
    pub nested: Nested12<S>,
    pub quotient: Quotient<S>,
    pub descent: DescentCk<S>,
    pub report: Report,
}

impl<S: Scalar> HilbSquare<S> {
    pub fn variety(&self) -> &VarRef<S> {
        &self.quotient.variety
    }

    pub fn ck(&self) -> &CKDecomposition<S> {
        &self.descent.ck
    }
}

/// `X^[2,3] = Bl_{X^[1,2]}(X × X^[2])`.
#[derive(Clone, Debug)]
pub struct Nested23<S> {
    pub hilb: HilbSquare<S>,
    pub product: Product<S>,
    pub ck_product: CKDecomposition<S>,
    /// `i = (pr₁ ∘ ρ, π_h): X^[1,2] → X × X^[2]`.
    pub inclusion: Morphism<S>,
    pub normal: BundleData<S>,
    pub set: AdmissibleSet<S>,
    pub blow_up: BlowUp<S>,
    pub ck: BlowUpCk<S>,
    pub report: Report,
}

impl<S: Scalar> Nested23<S> {
    pub fn variety(&self) -> &VarRef<S> {
        &self.blow_up.variety
    }
}

/// Pullback along `δ: X → X × X`, i.e. the product `a ⊗ b ↦ ab`.
pub(crate) fn diagonal_morphism<S: Scalar>(x: &VarRef<S>, square: &Product<S>) -> Result<Morphism<S>> {
    let a = &x.chow;
    let n = a.dim();
    let cols: Vec<Vec<S>> = (0..n * n).map(|p| a.mul_vec(&a.basis_vec(p / n), &a.basis_vec(p % n))).collect();
    Morphism::new("delta", x.clone(), square.variety.clone(), Matrix::from_columns(n, &cols))
}

pub fn build_nested_12<S: Scalar>(ckx: &CKDecomposition<S>) -> Result<Nested12<S>> {
    check_base(ckx)?;
    let x = &ckx.variety;
    let square = build_product(x, x);
    let ck_square = ck_product(ckx, ckx, &square)?;
    let diagonal = diagonal_morphism(x, &square)?;
    let normal = BundleData::tangent(x.clone());
    let blow_up = build_blow_up(&square.variety, &diagonal, &normal)?;
    let ck = ck_blow_up(&ck_square, ckx, &blow_up)?;
    let n = x.n();
    let total = blow_up.variety.n();
    let swap_of = |p: usize| if p < n * n { (p % n) * n + p / n } else { p };
    let swap = GroupAction::symmetric(blow_up.variety.clone(), &[vec![0, 1], vec![1, 0]], |perm| {
        Matrix::from_fn(total, total, |r, c| {
            let img = if perm[0] == 0 { c } else { swap_of(c) };
            if r == img {
                S::one()
            } else {
                S::zero()
            }
        })
    });
    Ok(Nested12 { square, ck_square, diagonal, blow_up, ck, swap })
}

pub fn build_hilb_square<S: Scalar>(ckx: &CKDecomposition<S>) -> Result<HilbSquare<S>> {
    let nested = build_nested_12(ckx)?;
    let branch = nested.blow_up.exceptional_class();
    let quotient = build_quotient("X^[2]", &nested.swap, &[branch])?;
    let descent = ck_descend(&nested.ck.ck, &quotient.p, 2)?;
    let mut report = nested.swap.verify().prefixed("square.swap");
    report.extend(descent.report.clone().prefixed("square"));
    report.extend(verify_all(&descent.ck));
    Ok(HilbSquare { nested, quotient, descent, report })
}

pub fn build_nested_23<S: Scalar>(ckx: &CKDecomposition<S>) -> Result<Nested23<S>> {
    let hilb = build_hilb_square(ckx)?;
    if let Some(f) = hilb.report.failures().first() {
        return Err(Error::Precondition(format!("X^[2] fails {}", f.check_id)));
    }
    let x = &ckx.variety;
    let nested = &hilb.nested;
    let y = nested.variety().clone();
    let h = hilb.variety().clone();
    let product = build_product(x, &h);
    let ck_product = ck_product(ckx, hilb.ck(), &product)?;

    let a = &y.chow;
    let p_pull = &hilb.quotient.p.pullback;
    let bu = &nested.blow_up;
    let first: Vec<Vec<S>> = (0..x.n()).map(|i| bu.rho_pull(&nested.square.p1.pullback.column(i))).collect();
    let cols: Vec<Vec<S>> = (0..product.variety.n())
        .map(|q| {
            let (i, k) = (q / h.n(), q % h.n());
            a.mul_vec(&first[i], &p_pull.column(k))
        })
        .collect();
    let inclusion = Morphism::new("i", y.clone(), product.variety.clone(), Matrix::from_columns(y.n(), &cols))?;

    // 0 → T_X|_Y → N → O_E(2E) → 0
    let e = bu.exceptional_class();
    let mut one_e = a.unit().to_vec();
    axpy(&mut one_e, &S::one(), &e);
    let mut one_2e = a.unit().to_vec();
    axpy(&mut one_2e, &S::from_int(2), &e);
    let tx = bu.rho_pull(&nested.square.p1.pull(&x.tangent));
    let q = a.mul_vec(&one_2e, &a.series_invert_vec(&one_e)?);
    let codim = product.variety.dim - y.dim;
    let normal = BundleData::new(y.clone(), codim, a.mul_vec(&tx, &q))?;

    let set = AdmissibleSet {
        ambient: 0,
        members: vec![
            Member { name: "XxX^[2]".into(), variety: product.variety.clone(), ck: ck_product.clone() },
            Member { name: "X^[1,2]".into(), variety: y.clone(), ck: nested.ck.ck.clone() },
        ],
        inclusions: vec![Inclusion { sub: 1, sup: 0, map: inclusion.clone(), normal: normal.clone() }],
        intersections: vec![],
    };
    let mut report = validate_admissible(&set);
    report.run("nested23.i_pull_pr2", || {
        (inclusion.pullback.mul(&product.p2.pullback) != *p_pull).then(|| "i^*∘pr₂^* != π_h^*".to_string())
    });
    if let Some(f) = report.failures().first() {
        let clause = if f.check_id.ends_with("normal_grade0") || f.check_id.ends_with("normal_whitney") { "(i)" } else { "(ii)" };
        return Err(Error::Precondition(format!("admissibility {clause} fails {}: {}", f.check_id, f.witness.clone().unwrap_or_default())));
    }
    let blow_up = build_blow_up(&product.variety, &inclusion, &normal)?;
    let ck = ck_blow_up(&ck_product, &nested.ck.ck, &blow_up)?;
    report.extend(verify_all(&ck.ck));
    Ok(Nested23 { hilb, product, ck_product, inclusion, normal, set, blow_up, ck, report })
}
