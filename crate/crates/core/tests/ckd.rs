use mck::ckd::*;
use mck::corresp::Correspondence;
use mck::exactalg::{int, Matrix};
use mck::report::Report;
use mck::variety::*;
use mck::Rat;
use proptest::prelude::*;

fn point_in(x: &VarRef<Rat>) -> Morphism<Rat> {
    let pt = build_point::<Rat>();
    let m = Matrix::from_fn(1, x.n(), |_, k| x.chow.unit()[k].clone());
    Morphism::new("pt", pt, x.clone(), m).unwrap()
}

fn assert_report(r: &Report) {
    for c in &r.checks {
        assert!(c.passed(), "{}: {:?}", c.check_id, c.witness);
    }
}

fn same_projectors(a: &CKDecomposition<Rat>, b: &CKDecomposition<Rat>) {
    for (i, (p, q)) in a.projectors.iter().zip(&b.projectors).enumerate() {
        assert_eq!(p.coeffs, q.coeffs, "π^{i}");
    }
}

#[test]
fn standard_decomposition_of_projective_spaces() {
    for n in 1..=3 {
        let p = build_projective_space::<Rat>(n);
        let ck = CKDecomposition::standard(&p);
        assert_report(&verify_all(&ck));
        let ranks = ck.graded_ranks();
        assert_eq!(ranks.len(), n + 1);
        assert!(ranks.iter().all(|&(_, s, r)| s == 0 && r == 1));
    }
}

#[test]
fn product_of_lines() {
    let p1 = build_projective_space::<Rat>(1);
    let ck = CKDecomposition::standard(&p1);
    let prod = build_product(&p1, &p1);
    let ckp = ck_product(&ck, &ck, &prod).unwrap();
    assert_report(&verify_all(&ckp));
    same_projectors(&ckp, &CKDecomposition::standard(&prod.variety));
    assert_eq!(ckp.grade0_ranks(), vec![1, 2, 1]);
}

#[test]
fn tangent_bundle_of_the_plane() {
    let p2 = build_projective_space::<Rat>(2);
    let ck = CKDecomposition::standard(&p2);
    let pb = build_projective_bundle(&BundleData::tangent(p2.clone())).unwrap();
    let out = ck_projective_bundle(&ck, &pb).unwrap();
    assert_report(&out.report);
    assert_report(&verify_all(&out.ck));
    same_projectors(&out.ck, &CKDecomposition::standard(&pb.variety));
    // σ∘ᵗΦ∘Φ = [[Δ, c₁·], [0, Δ]]
    let u = &out.unipotent;
    assert_eq!(u.entry(0, 0), &Correspondence::diagonal(&p2));
    assert_eq!(u.entry(1, 1), &Correspondence::diagonal(&p2));
    assert!(u.entry(1, 0).is_zero());
    let c1 = p2.chow.component(&p2.tangent, 1);
    assert_eq!(u.entry(0, 1), &Correspondence::multiplication(&p2, &c1));
}

#[test]
fn projective_bundle_over_the_line() {
    let p1 = build_projective_space::<Rat>(1);
    let ck = CKDecomposition::standard(&p1);
    // O ⊕ O(1) ⊕ O(2): c = 1 + 3h.
    let e = BundleData::new(p1.clone(), 3, vec![int(1), int(3)]).unwrap();
    let pb = build_projective_bundle(&e).unwrap();
    let out = ck_projective_bundle(&ck, &pb).unwrap();
    assert_report(&out.report);
    assert_report(&verify_all(&out.ck));
    same_projectors(&out.ck, &CKDecomposition::standard(&pb.variety));
}

#[test]
fn blow_up_of_plane_in_a_point() {
    let p2 = build_projective_space::<Rat>(2);
    let i = point_in(&p2);
    let n = BundleData::trivial(i.source.clone(), 2);
    let bu = build_blow_up(&p2, &i, &n).unwrap();
    let out = ck_blow_up(&CKDecomposition::standard(&p2), &CKDecomposition::standard(&i.source), &bu).unwrap();
    assert_report(&out.report);
    assert_report(&verify_all(&out.ck));
    same_projectors(&out.ck, &CKDecomposition::standard(&bu.variety));
    // D∘σ∘ᵗΦ∘Φ has identity diagonal
    let u = &out.unipotent;
    assert_eq!(u.entry(0, 0), &Correspondence::diagonal(&p2));
    assert_eq!(u.entry(1, 1), &Correspondence::diagonal(&i.source));
}

#[test]
fn blow_up_of_space_in_a_point_and_a_line() {
    let p3 = build_projective_space::<Rat>(3);
    let ck3 = CKDecomposition::standard(&p3);
    let i = point_in(&p3);
    let bu = build_blow_up(&p3, &i, &BundleData::trivial(i.source.clone(), 3)).unwrap();
    let out = ck_blow_up(&ck3, &CKDecomposition::standard(&i.source), &bu).unwrap();
    assert_report(&verify_all(&out.ck));
    same_projectors(&out.ck, &CKDecomposition::standard(&bu.variety));

    let p1 = build_projective_space::<Rat>(1);
    let line = Morphism::new("line", p1.clone(), p3.clone(), Matrix::from_fn(2, 4, |r, c| int((r == c) as i64))).unwrap();
    let normal = whitney_normal(&line).unwrap();
    let bu = build_blow_up(&p3, &line, &normal).unwrap();
    assert_eq!(bu.variety.ranks(), vec![1, 2, 2, 1]);
    let out = ck_blow_up(&ck3, &CKDecomposition::standard(&p1), &bu).unwrap();
    assert_report(&verify_all(&out.ck));
    same_projectors(&out.ck, &CKDecomposition::standard(&bu.variety));
}

#[test]
fn symmetric_square_descends() {
    let p1 = build_projective_space::<Rat>(1);
    let prod = build_product(&p1, &p1);
    let swap = Matrix::from_fn(4, 4, |p, q| int((p == (q % 2) * 2 + q / 2) as i64));
    let act = GroupAction::symmetric(prod.variety.clone(), &[vec![0, 1], vec![1, 0]], |p| if p == [0, 1] { Matrix::identity(4) } else { swap.clone() });
    let mut diag = prod.variety.chow.zero_vec();
    diag[prod.index(1, 0)] = int(1);
    diag[prod.index(0, 1)] = int(1);
    let q = build_quotient("Sym2P1", &act, &[diag]).unwrap();
    let ck = CKDecomposition::standard(&prod.variety);
    let out = ck_descend(&ck, &q.p, 2).unwrap();
    assert_report(&out.report);
    assert_report(&verify_all(&out.ck));
    same_projectors(&out.ck, &CKDecomposition::standard(&q.variety));
    assert_eq!(out.kernel.coeffs, Correspondence::from_operator(&prod.variety, &prod.variety, &act.group_sum()).unwrap().coeffs);
}

#[test]
fn descent_rejects_wrong_degree() {
    let p1 = build_projective_space::<Rat>(1);
    let ck = CKDecomposition::standard(&p1);
    assert!(ck_descend(&ck, &Morphism::identity(p1.clone()), 2).is_err());
}

/// Conjugating by a non-graded automorphism keeps the projector axioms but
/// breaks the Künneth lift and multiplicativity.
#[test]
fn conjugated_decomposition_is_rejected() {
    let p2 = build_projective_space::<Rat>(2);
    let ck = CKDecomposition::standard(&p2);
    let mut t = Matrix::identity(3);
    t.set(1, 0, int(1));
    let ti = t.inverse().unwrap();
    let projectors = ck
        .operators()
        .iter()
        .map(|m| Correspondence::from_operator(&p2, &p2, &t.mul(m).mul(&ti)).unwrap())
        .collect();
    let bad = CKDecomposition::new(p2.clone(), projectors, Provenance::Manual).unwrap();
    let rep = verify_ck(&bad);
    assert!(rep.find("ck.idempotent").unwrap().passed());
    assert!(rep.find("ck.orthogonal").unwrap().passed());
    assert!(!rep.find("ck.kunneth_lift").unwrap().passed());
    let m = verify_multiplicative(&bad);
    assert!(!m.all_pass());
}

#[test]
fn perturbed_projector_fails() {
    let p2 = build_projective_space::<Rat>(2);
    let ck = CKDecomposition::standard(&p2).perturbed(2, 1, 1, &int(1));
    let rep = verify_ck(&ck);
    assert!(!rep.find("ck.sum").unwrap().passed());
    assert!(!rep.find("ck.idempotent").unwrap().passed());
}

#[test]
fn chern_grade_of_blow_up() {
    let p2 = build_projective_space::<Rat>(2);
    let i = point_in(&p2);
    let bu = build_blow_up(&p2, &i, &BundleData::trivial(i.source.clone(), 2)).unwrap();
    let out = ck_blow_up(&CKDecomposition::standard(&p2), &CKDecomposition::standard(&i.source), &bu).unwrap();
    assert_report(&verify_chern_grade(&out.ck));
    assert!(chern_grade_defect(&out.ck, &bu.variety.point).is_none());
}

fn plane_with_point() -> AdmissibleSet<Rat> {
    let p2 = build_projective_space::<Rat>(2);
    let i = point_in(&p2);
    let pt = i.source.clone();
    AdmissibleSet {
        ambient: 0,
        members: vec![
            Member { name: "P2".into(), variety: p2.clone(), ck: CKDecomposition::standard(&p2) },
            Member { name: "pt".into(), variety: pt.clone(), ck: CKDecomposition::standard(&pt) },
        ],
        inclusions: vec![Inclusion { sub: 1, sup: 0, map: i, normal: BundleData::trivial(pt, 2) }],
        intersections: vec![],
    }
}

#[test]
fn admissible_plane_with_point() {
    let s = plane_with_point();
    assert_report(&validate_admissible(&s));
    let b = blow_up_admissible(&s, 1).unwrap();
    assert_eq!(b.set.members.len(), 1);
    assert_eq!(b.ambient_blow_up().variety.ranks(), vec![1, 2, 1]);
    assert_report(&validate_admissible(&b.set));
}

#[test]
fn admissible_rejects_wrong_normal_bundle() {
    let mut s = plane_with_point();
    let bad = BundleData::new(s.members[1].variety.clone(), 1, vec![int(1)]).unwrap();
    s.inclusions[0].normal = bad;
    let rep = validate_admissible(&s);
    assert!(!rep.find("admissible.pt<P2.normal_whitney").unwrap().passed());
}

#[test]
fn admissible_requires_declared_intersections() {
    let p2 = build_projective_space::<Rat>(2);
    let ck = CKDecomposition::standard(&p2);
    let p1 = build_projective_space::<Rat>(1);
    let ck1 = CKDecomposition::standard(&p1);
    let line = Morphism::new("line", p1.clone(), p2.clone(), Matrix::from_fn(2, 3, |r, c| int((r == c) as i64))).unwrap();
    let normal = whitney_normal(&line).unwrap();
    let s = AdmissibleSet {
        ambient: 0,
        members: vec![
            Member { name: "P2".into(), variety: p2.clone(), ck },
            Member { name: "L1".into(), variety: p1.clone(), ck: ck1.clone() },
            Member { name: "L2".into(), variety: p1.clone(), ck: ck1 },
        ],
        inclusions: vec![
            Inclusion { sub: 1, sup: 0, map: line.clone(), normal: normal.clone() },
            Inclusion { sub: 2, sup: 0, map: line, normal },
        ],
        intersections: vec![],
    };
    let rep = validate_admissible(&s);
    assert!(!rep.find("complete.intersections").unwrap().passed());
}

#[test]
fn admissible_line_through_point() {
    // P² ⊃ L ⊃ pt: blowing up the point leaves L unchanged (codimension 1).
    let p2 = build_projective_space::<Rat>(2);
    let p1 = build_projective_space::<Rat>(1);
    let line = Morphism::new("line", p1.clone(), p2.clone(), Matrix::from_fn(2, 3, |r, c| int((r == c) as i64))).unwrap();
    let ipt = point_in(&p1);
    let pt = ipt.source.clone();
    let s = AdmissibleSet {
        ambient: 0,
        members: vec![
            Member { name: "P2".into(), variety: p2.clone(), ck: CKDecomposition::standard(&p2) },
            Member { name: "L".into(), variety: p1.clone(), ck: CKDecomposition::standard(&p1) },
            Member { name: "pt".into(), variety: pt.clone(), ck: CKDecomposition::standard(&pt) },
        ],
        inclusions: vec![
            Inclusion { sub: 1, sup: 0, map: line.clone(), normal: whitney_normal(&line).unwrap() },
            Inclusion { sub: 2, sup: 1, map: ipt.clone(), normal: BundleData::trivial(pt.clone(), 1) },
        ],
        intersections: vec![],
    };
    assert_report(&validate_admissible(&s));
    let b = blow_up_admissible(&s, 2).unwrap();
    assert_eq!(b.set.members.len(), 2);
    let l = b.set.index_of("L~").unwrap();
    let inc = b.set.inclusions.iter().find(|i| i.sub == l).unwrap();
    // The strict transform of a line through the blown-up point has self-intersection 0.
    let xt = &b.ambient_blow_up().variety;
    let cls = inc.map.push(p1.chow.unit()).unwrap();
    assert_eq!(xt.chow.degree_vec(&xt.chow.mul_vec(&cls, &cls)), int(0));
    assert_report(&validate_admissible(&b.set));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn projective_bundles_over_the_plane(a in -3i64..=3, b in -3i64..=3) {
        let p2 = build_projective_space::<Rat>(2);
        let ck = CKDecomposition::standard(&p2);
        let e = BundleData::new(p2.clone(), 2, vec![int(1), int(a), int(b)]).unwrap();
        let pb = build_projective_bundle(&e).unwrap();
        let out = ck_projective_bundle(&ck, &pb).unwrap();
        prop_assert!(out.report.all_pass());
        prop_assert!(verify_ck(&out.ck).all_pass());
        let std = CKDecomposition::standard(&pb.variety);
        for (p, q) in out.ck.projectors.iter().zip(&std.projectors) {
            prop_assert_eq!(&p.coeffs, &q.coeffs);
        }
    }

    #[test]
    fn perturbations_break_the_sum(i in 0usize..5, r in 0usize..3, c in 0usize..3, e in 1i64..5) {
        let p2 = build_projective_space::<Rat>(2);
        let ck = CKDecomposition::standard(&p2).perturbed(i, r, c, &int(e));
        prop_assert!(!verify_ck(&ck).find("ck.sum").unwrap().passed());
    }
}
