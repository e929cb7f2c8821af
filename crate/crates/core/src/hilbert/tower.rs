use crate::ckd::{
    blow_up_admissible, ck_disjoint_union, ck_product, ck_projective_bundle, validate_admissible, AdmissibleSet, BlownUpSet, CKDecomposition,
    Inclusion, Member,
};
use crate::error::{Error, Result};
use crate::exactalg::{axpy, Matrix, Scalar};
use crate::report::Report;
use crate::variety::{
    build_disjoint_union, build_product, build_projective_bundle, build_projective_space, vec_witness, BlowUp, BundleData, DisjointUnion, Morphism,
    Product, ProjectiveBundle, VarRef,
};

use super::{check_base, first_failure};
use super::square::diagonal_morphism;

/// Pairs `{i, j}` of tensor positions in the order `12, 23, 13`. The
/// diagonal `Δ_ij` is parametrized by `X × X` with `x` in positions `i, j`
/// and `y` in the remaining one.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

fn pair_name(k: usize) -> String {
    let (i, j) = PAIRS[k];
    format!("{}{}", i + 1, j + 1)
}

/// The tower `X₀ = X³ ← X₁ ← X₂ ← X₃` over a surface, with the admissible
/// sets it is built from.
#[derive(Clone, Debug)]
pub struct Hilb3Tower<S> {
    pub base: VarRef<S>,
    pub ck_base: CKDecomposition<S>,
    pub square: Product<S>,
    /// `X³ = (X × X) × X`, basis index `(p·n + q)·n + r`.
    pub cube: Product<S>,
    /// `{X³, Δ₁₂₃, Δ₁₂, Δ₂₃, Δ₁₃}`.
    pub s0: AdmissibleSet<S>,
    /// `Bl_{Δ₁₂₃}` of `s0`: `{X₁, Δ̃₁₂, Δ̃₂₃, Δ̃₁₃}`.
    pub stage1: BlownUpSet<S>,
    /// `P(T_X)`.
    pub pt: ProjectiveBundle<S>,
    pub p1: VarRef<S>,
    /// `W = P¹ × P(T_X) ⊂ E₁`.
    pub w: Product<S>,
    /// `⊔ Δ̃_ij`.
    pub d: DisjointUnion<S>,
    /// `⊔ W_ij`, `W_ij = {t_ij} × P(T_X)`.
    pub wu: DisjointUnion<S>,
    /// `{X₁, E₁, ⊔Δ̃_ij, W, ⊔W_ij}`.
    pub s1: AdmissibleSet<S>,
    /// `Bl_{⊔Δ̃_ij}` of `s1`: `{X₂, E′₁, W̃}`.
    pub stage2: BlownUpSet<S>,
    /// `Bl_{W̃}` of `stage2`: `{X₃, E″₁}`.
    pub stage3: BlownUpSet<S>,
    /// `𝓔` on `P(T_X)`, with `N_{W̃/X₂} = O(−1) ⊠ 𝓔`.
    pub bundle_e: BundleData<S>,
    pub report: Report,
}

pub(crate) const S0_CUBE: usize = 0;
pub(crate) const S0_SMALL: usize = 1;
pub(crate) const S1_X: usize = 0;
pub(crate) const S1_E: usize = 1;
pub(crate) const S1_D: usize = 2;
pub(crate) const S1_W: usize = 3;
pub(crate) const S1_WU: usize = 4;

impl<S: Scalar> Hilb3Tower<S> {
    pub fn x0(&self) -> &VarRef<S> {
        &self.cube.variety
    }

    pub fn x1(&self) -> &VarRef<S> {
        &self.blow_up1().variety
    }

    pub fn x2(&self) -> &VarRef<S> {
        &self.blow_up2().variety
    }

    pub fn x3(&self) -> &VarRef<S> {
        &self.blow_up3().variety
    }

    /// `X₁ = Bl_{Δ₁₂₃} X₀`.
    pub fn blow_up1(&self) -> &BlowUp<S> {
        self.stage1.ambient_blow_up()
    }

    /// `X₂ = Bl_{⊔Δ̃_ij} X₁`.
    pub fn blow_up2(&self) -> &BlowUp<S> {
        self.stage2.ambient_blow_up()
    }

    /// `X₃ = Bl_{W̃} X₂`, exceptional divisor `E_W`.
    pub fn blow_up3(&self) -> &BlowUp<S> {
        self.stage3.ambient_blow_up()
    }

    pub fn ck(&self, stage: usize) -> &CKDecomposition<S> {
        match stage {
            0 => &self.s0.members[S0_CUBE].ck,
            1 => &self.s1.members[S1_X].ck,
            2 => &self.stage2.set.members[self.stage2.ambient].ck,
            _ => &self.stage3.set.members[self.stage3.ambient].ck,
        }
    }

    pub fn variety(&self, stage: usize) -> &VarRef<S> {
        match stage {
            0 => self.x0(),
            1 => self.x1(),
            2 => self.x2(),
            _ => self.x3(),
        }
    }

    /// `E₁ = P(N_{Δ₁₂₃/X₀})`.
    pub fn e1(&self) -> &ProjectiveBundle<S> {
        &self.blow_up1().exceptional
    }

    /// `E′₁ = Bl_{⊔W_ij} E₁` with its embedding in `X₂`.
    pub fn e1_prime(&self) -> Result<Inclusion<S>> {
        let s = &self.stage2.set;
        s.inclusion(member(s, "E1'")?, self.stage2.ambient)
    }

    /// `E″₁ ≅ E′₁` with its embedding in `X₃`.
    pub fn e1_second(&self) -> Result<Inclusion<S>> {
        let s = &self.stage3.set;
        s.inclusion(member(s, "E1''")?, self.stage3.ambient)
    }

    /// `W̃ ≅ W` with its embedding in `X₂`.
    pub fn w_tilde(&self) -> Result<Inclusion<S>> {
        let s = &self.stage2.set;
        s.inclusion(member(s, "W~")?, self.stage2.ambient)
    }

    /// `E_W = P(N_{W̃/X₂})`.
    pub fn e_w(&self) -> &ProjectiveBundle<S> {
        &self.blow_up3().exceptional
    }

    pub fn ranks(&self) -> [usize; 4] {
        [self.x0().n(), self.x1().n(), self.x2().n(), self.x3().n()]
    }
}

pub(crate) fn member<S: Scalar>(s: &AdmissibleSet<S>, name: &str) -> Result<usize> {
    s.index_of(name).ok_or_else(|| Error::Malformed(format!("member {name} missing")))
}

/// Pullback `CH(X³) → CH(X × X)` along `(x, y) ↦` the point with `x` in
/// positions `i, j` and `y` in the third.
fn phi_pullback<S: Scalar>(x: &VarRef<S>, pair: (usize, usize)) -> Matrix<S> {
    let a = &x.chow;
    let n = a.dim();
    let other = 3 - pair.0 - pair.1;
    let cols: Vec<Vec<S>> = (0..n * n * n)
        .map(|q| {
            let idx = [q / (n * n), (q / n) % n, q % n];
            let xx = a.mul_vec(&a.basis_vec(idx[pair.0]), &a.basis_vec(idx[pair.1]));
            let y = a.basis_vec(idx[other]);
            crate::variety::tensor_vec(&xx, &y)
        })
        .collect();
    Matrix::from_columns(n * n, &cols)
}

fn block_matrix<S: Scalar>(rows: usize, cols: usize, row_off: &[usize], col_off: &[usize], blocks: &[Matrix<S>]) -> Matrix<S> {
    let mut m = Matrix::zeros(rows, cols);
    for (k, b) in blocks.iter().enumerate() {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                if !b.get(i, j).is_zero() {
                    m.set(row_off[k] + i, col_off[k] + j, b.get(i, j).clone());
                }
            }
        }
    }
    m
}

/// `{X³, Δ₁₂₃, Δ_ij}` with `N_{Δ₁₂₃/X³} = T ⊕ T`, `N_{Δ_ij/X³} = p₁^*T`
/// and `N_{Δ₁₂₃/Δ_ij} = T`.
fn stage0<S: Scalar>(ckx: &CKDecomposition<S>) -> Result<(Product<S>, Product<S>, AdmissibleSet<S>)> {
    let x = &ckx.variety;
    let square = build_product(x, x);
    let cube = build_product(&square.variety, x);
    let ck_square = ck_product(ckx, ckx, &square)?;
    let ck_cube = ck_product(&ck_square, ckx, &cube)?;
    let a = &x.chow;
    let n = a.dim();
    let small = Matrix::from_columns(
        n,
        &(0..n * n * n).map(|q| a.mul_vec(&a.mul_vec(&a.basis_vec(q / (n * n)), &a.basis_vec((q / n) % n)), &a.basis_vec(q % n))).collect::<Vec<_>>(),
    );
    let delta = diagonal_morphism(x, &square)?;
    let tt = BundleData::tangent(x.clone());
    let mut members = vec![
        Member { name: "X0".into(), variety: cube.variety.clone(), ck: ck_cube },
        Member { name: "D123".into(), variety: x.clone(), ck: ckx.clone() },
    ];
    let mut inclusions = vec![Inclusion {
        sub: S0_SMALL,
        sup: S0_CUBE,
        map: Morphism::new("delta123", x.clone(), cube.variety.clone(), small)?,
        normal: tt.direct_sum(&tt),
    }];
    let p1_t = BundleData::new(square.variety.clone(), 2, square.p1.pull(&x.tangent))?;
    for (k, &pair) in PAIRS.iter().enumerate() {
        members.push(Member { name: format!("D{}", pair_name(k)), variety: square.variety.clone(), ck: ck_square.clone() });
        let m = 2 + k;
        inclusions.push(Inclusion {
            sub: m,
            sup: S0_CUBE,
            map: Morphism::new(format!("phi{}", pair_name(k)), square.variety.clone(), cube.variety.clone(), phi_pullback(x, pair))?,
            normal: p1_t.clone(),
        });
        inclusions.push(Inclusion { sub: S0_SMALL, sup: m, map: delta.clone(), normal: tt.clone() });
    }
    let intersections = vec![(2, 3, Some(S0_SMALL)), (3, 4, Some(S0_SMALL)), (2, 4, Some(S0_SMALL))];
    Ok((square, cube, AdmissibleSet { ambient: S0_CUBE, members, inclusions, intersections }))
}

pub fn build_tower<S: Scalar>(ckx: &CKDecomposition<S>) -> Result<Hilb3Tower<S>> {
    check_base(ckx)?;
    let x = &ckx.variety;
    if x.dim != 2 {
        return Err(Error::Precondition(format!("the tower is built over a surface, got dimension {}", x.dim)));
    }
    let mut report = Report::new();

    let (square, cube, s0) = stage0(ckx)?;
    let r0 = validate_admissible(&s0).prefixed("tower.s0");
    first_failure(&r0, "stage 0")?;
    report.extend(r0);

    let mut stage1 = blow_up_admissible(&s0, S0_SMALL)?;
    let amb1 = stage1.ambient;
    stage1.set.members[amb1].name = "X1".into();
    let bu0 = stage1.ambient_blow_up().clone();
    let x1 = bu0.variety.clone();

    // E₁ = P(T ⊗ C²) over Δ₁₂₃ ≅ X.
    let e1 = &bu0.exceptional;
    let ck_e1 = ck_projective_bundle(ckx, e1)?.ck;
    let mut minus_xi: Vec<S> = e1.xi.iter().map(|c| -c.clone()).collect();
    minus_xi.truncate(e1.variety.n());

    // ⊔Δ̃_ij.
    let mut dts = Vec::new();
    let mut dt_cks = Vec::new();
    let mut dt_res = Vec::new();
    let mut dt_normal = Vec::new();
    let mut dt_bus = Vec::new();
    for k in 0..3 {
        let name = format!("D{}~", pair_name(k));
        let m = member(&stage1.set, &name)?;
        let inc = stage1.set.inclusions.iter().find(|i| i.sub == m && i.sup == amb1).ok_or_else(|| Error::Malformed(format!("{name} ⊂ X1 missing")))?;
        dts.push(stage1.set.members[m].variety.clone());
        dt_cks.push(stage1.set.members[m].ck.clone());
        dt_res.push(inc.map.pullback.clone());
        dt_normal.extend(inc.normal.chern.clone());
        dt_bus.push(stage1.blow_ups[m].clone().ok_or_else(|| Error::Malformed(format!("{name} is not a blow-up")))?);
    }
    let d = build_disjoint_union("D~", &dts)?;
    let ck_d = ck_disjoint_union(&d, &dt_cks)?;
    let d_map = Morphism::new("D~>X1", d.variety.clone(), x1.clone(), d.stack_maps(&dt_res))?;
    let d_normal = BundleData::new(d.variety.clone(), 2, dt_normal)?;

    // W = P¹ × P(T_X) ⊂ E₁ with ι^*ξ = h + ζ.
    let tx = BundleData::tangent(x.clone());
    let pt = build_projective_bundle(&tx)?;
    let ck_pt = ck_projective_bundle(ckx, &pt)?.ck;
    let p1 = build_projective_space::<S>(1);
    let ck_p1 = CKDecomposition::standard(&p1);
    let w = build_product(&p1, &pt.variety);
    let ck_w = ck_product(&ck_p1, &ck_pt, &w)?;
    let wa = &w.variety.chow;
    let h = w.tensor(&[S::zero(), S::one()], pt.variety.chow.unit());
    let zeta = w.tensor(p1.chow.unit(), &pt.xi);
    let mut h_zeta = h.clone();
    axpy(&mut h_zeta, &S::one(), &zeta);
    let base_w = w.p2.pullback.mul(&pt.pi.pullback);
    let iota = Morphism::new("W>E1", w.variety.clone(), e1.variety.clone(), e1.ring_map(wa, &base_w, &h_zeta))?;
    let t_w = base_w.mul_vec(&x.tangent);
    let twisted = |l: &[S]| wa.twist_chern_vec(2, &t_w, l);
    let num = wa.pow_vec(&twisted(&h_zeta)?, 2);
    let mut one_2h = wa.unit().to_vec();
    axpy(&mut one_2h, &S::from_int(2), &h);
    let den = wa.mul_vec(&one_2h, &twisted(&zeta)?);
    let w_normal = BundleData::new(w.variety.clone(), 1, wa.truncate(&wa.mul_vec(&num, &wa.series_invert_vec(&den)?), 1))?;

    // ⊔W_ij = ⊔ {t_ij} × P(T_X).
    let wu = build_disjoint_union("Wu", &[pt.variety.clone(), pt.variety.clone(), pt.variety.clone()])?;
    let ck_wu = ck_disjoint_union(&wu, &[ck_pt.clone(), ck_pt.clone(), ck_pt.clone()])?;
    let npt = pt.variety.n();
    let slice = Matrix::from_fn(npt, w.variety.n(), |k, q| if q == w.index(0, k) { S::one() } else { S::zero() });
    let wu_w = Morphism::new("Wu>W", wu.variety.clone(), w.variety.clone(), wu.stack_maps(&[slice.clone(), slice.clone(), slice]))?;
    let jblocks: Vec<Matrix<S>> = dt_bus.iter().map(|b| b.j.pullback.clone()).collect();
    for b in &dt_bus {
        if b.exceptional.variety.n() != npt || b.exceptional.bundle.chern != x.tangent {
            return Err(Error::Malformed("exceptional divisor of Δ̃_ij is not P(T_X)".into()));
        }
    }
    let wu_d = Morphism::new("Wu>D~", wu.variety.clone(), d.variety.clone(), block_matrix(wu.variety.n(), d.variety.n(), &wu.offsets, &d.offsets, &jblocks))?;
    let mut one_minus_zeta = pt.variety.chow.unit().to_vec();
    axpy(&mut one_minus_zeta, &-S::one(), &pt.xi);
    let wu_d_normal = BundleData::new(wu.variety.clone(), 1, [one_minus_zeta.clone(), one_minus_zeta.clone(), one_minus_zeta].concat())?;

    let s1 = AdmissibleSet {
        ambient: S1_X,
        members: vec![
            Member { name: "X1".into(), variety: x1.clone(), ck: stage1.set.members[amb1].ck.clone() },
            Member { name: "E1".into(), variety: e1.variety.clone(), ck: ck_e1 },
            Member { name: "D~".into(), variety: d.variety.clone(), ck: ck_d },
            Member { name: "W".into(), variety: w.variety.clone(), ck: ck_w },
            Member { name: "Wu".into(), variety: wu.variety.clone(), ck: ck_wu },
        ],
        inclusions: vec![
            Inclusion { sub: S1_E, sup: S1_X, map: bu0.j.clone(), normal: BundleData::line(e1.variety.clone(), &minus_xi) },
            Inclusion { sub: S1_D, sup: S1_X, map: d_map, normal: d_normal },
            Inclusion { sub: S1_W, sup: S1_E, map: iota, normal: w_normal },
            Inclusion { sub: S1_WU, sup: S1_W, map: wu_w, normal: BundleData::trivial(wu.variety.clone(), 1) },
            Inclusion { sub: S1_WU, sup: S1_D, map: wu_d, normal: wu_d_normal },
        ],
        intersections: vec![(S1_E, S1_D, Some(S1_WU)), (S1_W, S1_D, Some(S1_WU))],
    };
    let mut r1 = validate_admissible(&s1).prefixed("tower.s1");
    r1.run("tower.s1.wu_paths", || {
        let via_w = s1.inclusions[3].map.then(&s1.inclusions[2].map).and_then(|m| m.then(&s1.inclusions[0].map));
        let via_d = s1.inclusions[4].map.then(&s1.inclusions[1].map);
        match (via_w, via_d) {
            (Ok(a), Ok(b)) => (a.pullback != b.pullback).then(|| "Wu → W → E1 → X1 and Wu → D~ → X1 differ".to_string()),
            (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
        }
    });
    first_failure(&r1, "stage 1")?;
    report.extend(r1);

    let mut stage2 = blow_up_admissible(&s1, S1_D)?;
    for (m, name) in stage2.set.members.iter_mut().zip(["X2", "E1'", "W~"]) {
        m.name = name.into();
    }
    let r2 = validate_admissible(&stage2.set).prefixed("tower.s2");
    first_failure(&r2, "stage 2")?;
    report.extend(r2);

    let wt = member(&stage2.set, "W~")?;
    let mut stage3 = blow_up_admissible(&stage2.set, wt)?;
    for (m, name) in stage3.set.members.iter_mut().zip(["X3", "E1''"]) {
        m.name = name.into();
    }
    let r3 = validate_admissible(&stage3.set).prefixed("tower.s3");
    first_failure(&r3, "stage 3")?;
    report.extend(r3);

    // 𝓔 with 0 → T_{P(T)/X} → 𝓔 → O(−1) → 0.
    let pa = &pt.variety.chow;
    let t_rel = pa.twist_chern_vec(2, &pt.pi.pull(&x.tangent), &pt.xi)?;
    let mut one_minus = pa.unit().to_vec();
    axpy(&mut one_minus, &-S::one(), &pt.xi);
    let bundle_e = BundleData::new(pt.variety.clone(), 2, pa.mul_vec(&t_rel, &one_minus))?;

    let tower = Hilb3Tower { base: x.clone(), ck_base: ckx.clone(), square, cube, s0, stage1, pt: pt.clone(), p1, w: w.clone(), d, wu, s1, stage2, stage3, bundle_e, report };
    let mut extra = Report::new();
    extra.run("tower.ranks", || {
        let r = tower.ranks();
        let e1p = tower.e1_prime().map(|i| i.map.source.n()).unwrap_or(0);
        let expect = rank_recount(x.n(), pt.variety.n(), e1.variety.n());
        (r != expect.0 || e1p != expect.1).then(|| format!("ranks {r:?}, E1' {e1p}; recount {:?}, {}", expect.0, expect.1))
    });
    extra.run("tower.e1_divisorial_transform", || match tower.stage3.set.index_of("E1''") {
        Some(k) => match &tower.stage3.blow_ups[k] {
            Some(b) if b.is_identity() => None,
            _ => Some("Bl_{W̃}E1' is not E1'".into()),
        },
        None => Some("E1'' missing".into()),
    });
    extra.run("tower.ew_normal_split", || {
        let inc = match tower.w_tilde() {
            Ok(i) => i,
            Err(e) => return Some(e.to_string()),
        };
        let pulled = w.p2.pull(&tower.bundle_e.chern);
        let minus_h: Vec<S> = h.iter().map(|c| -c.clone()).collect();
        match wa.twist_chern_vec(2, &pulled, &minus_h) {
            Ok(c) => vec_witness(wa, &inc.normal.chern, &c).map(|w| format!("N_(W~/X2) != O(-1) ⊠ 𝓔: {w}")),
            Err(e) => Some(e.to_string()),
        }
    });
    let mut tower = tower;
    tower.report.extend(extra);
    first_failure(&tower.report, "tower")?;
    Ok(tower)
}

/// Ranks of `X₀ … X₃` and of `E′₁` from the blow-up formula alone: centers
/// `Δ₁₂₃ ≅ X` (codim 4), three copies of `Bl_Δ(X×X)` (codim 2), `W ≅ P¹ ×
/// P(T_X)` (codim 2); `E′₁ = Bl_{⊔W_ij} E₁` with `W_ij` of codim 2.
fn rank_recount(n: usize, n_pt: usize, n_e1: usize) -> ([usize; 4], usize) {
    let x0 = n * n * n;
    let x1 = x0 + 3 * n;
    let dt = n * n + n;
    let x2 = x1 + 3 * dt;
    let x3 = x2 + 2 * n_pt;
    ([x0, x1, x2, x3], n_e1 + 3 * n_pt)
}
