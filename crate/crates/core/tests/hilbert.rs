mod common;

use std::sync::OnceLock;

use mck::ckd::*;
use mck::exactalg::*;
use mck::hilbert::*;
use mck::report::Report;
use mck::variety::*;
use mck::Rat;

use common::{hilbert_ranks, line_symmetric_ranks, nested_ranks};

const P2: [i64; 3] = [1, 1, 1];
const QUADRIC: [i64; 3] = [1, 2, 1];

fn p2() -> CKDecomposition<Rat> {
    CKDecomposition::standard(&build_projective_space::<Rat>(2))
}

fn quadric() -> CKDecomposition<Rat> {
    let p1 = build_projective_space::<Rat>(1);
    let ck = CKDecomposition::standard(&p1);
    let prod = build_product(&p1, &p1);
    ck_product(&ck, &ck, &prod).unwrap()
}

fn assert_report(r: &Report) {
    for c in &r.checks {
        assert!(c.passed(), "{}: {:?}", c.check_id, c.witness);
    }
}

fn hilb3_p2() -> &'static Hilb3<Rat> {
    static H: OnceLock<Hilb3<Rat>> = OnceLock::new();
    H.get_or_init(|| build_hilb3(&p2()).unwrap())
}

#[test]
fn oracles_reproduce_known_tables() {
    assert_eq!(hilbert_ranks(P2, 1), vec![1, 1, 1]);
    assert_eq!(hilbert_ranks(P2, 2), vec![1, 2, 3, 2, 1]);
    assert_eq!(hilbert_ranks(P2, 3), vec![1, 2, 5, 6, 5, 2, 1]);
    assert_eq!(hilbert_ranks(QUADRIC, 2).iter().sum::<usize>(), 14);
    assert_eq!(hilbert_ranks(QUADRIC, 3).iter().sum::<usize>(), 40);
    assert_eq!(nested_ranks(P2, 0), vec![1, 1, 1]);
    assert_eq!(nested_ranks(P2, 1), vec![1, 3, 4, 3, 1]);
}

#[test]
fn hilbert_squares() {
    for (ck, betti) in [(p2(), P2), (quadric(), QUADRIC)] {
        let h = build_hilb_square(&ck).unwrap();
        assert_report(&h.report);
        let expect = hilbert_ranks(betti, 2);
        assert_eq!(h.variety().ranks(), expect);
        assert_eq!(h.ck().grade0_ranks(), expect);
        assert!(h.ck().graded_ranks().iter().all(|&(_, s, _)| s == 0));
    }
}

#[test]
fn nested_pairs() {
    for (ck, betti) in [(p2(), P2), (quadric(), QUADRIC)] {
        let n = build_nested_12(&ck).unwrap();
        assert_report(&n.ck.report);
        assert_report(&verify_all(&n.ck.ck));
        assert_report(&n.swap.verify());
        assert_eq!(n.variety().ranks(), nested_ranks(betti, 1));
    }
}

#[test]
fn nested_triples() {
    for (ck, betti) in [(p2(), P2), (quadric(), QUADRIC)] {
        let n = build_nested_23(&ck).unwrap();
        assert_report(&n.report);
        assert_eq!(n.variety().ranks(), nested_ranks(betti, 2));
        assert_eq!(n.ck.ck.grade0_ranks(), nested_ranks(betti, 2));
    }
}

#[test]
fn curve_pipelines() {
    let p1 = CKDecomposition::standard(&build_projective_space::<Rat>(1));
    let h = build_hilb_square(&p1).unwrap();
    assert_report(&h.report);
    assert_eq!(h.variety().ranks(), line_symmetric_ranks(2));
    // The center of C^[2,3] is a divisor, so C^[2,3] = C × C^[2].
    let n = build_nested_23(&p1).unwrap();
    assert_report(&n.report);
    assert_eq!(n.variety().ranks(), vec![1, 2, 2, 1]);
    assert!(matches!(build_tower(&p1), Err(mck::Error::Precondition(_))));
}

#[test]
fn tower_ranks() {
    let h = hilb3_p2();
    assert_eq!(h.tower.ranks(), [27, 36, 72, 84]);
    assert_report(&h.tower.report);
    for k in 0..4 {
        assert_report(&verify_ck(h.tower.ck(k)));
    }
}

#[test]
fn transpositions_permute_the_diagonals() {
    let act = &hilb3_p2().actions;
    assert_report(&act.report);
    let perms = s3_perms();
    // (12) fixes Δ₁₂ pointwise and exchanges Δ₂₃ with Δ₁₃.
    let t12 = perms.iter().position(|p| *p == [1, 0, 2]).unwrap();
    assert_eq!(act.d_perm[t12], vec![(0, false), (2, false), (1, false)]);
    assert!(act.d_perm.iter().flatten().all(|&(_, swapped)| !swapped));
    for (g, row) in act.d_perm.iter().enumerate() {
        for (k, &(k2, _)) in row.iter().enumerate() {
            let (i, j) = PAIRS[k];
            let img = [perms[g][i], perms[g][j]];
            let (a, b) = PAIRS[k2];
            assert!(img == [a, b] || img == [b, a], "{:?} sends Δ{:?} to Δ{:?}", perms[g], PAIRS[k], PAIRS[k2]);
        }
    }
}

#[test]
fn hilbert_cube_of_the_plane() {
    let h = hilb3_p2();
    assert_report(&h.report);
    let expect = hilbert_ranks(P2, 3);
    assert_eq!(h.variety().ranks(), expect);
    assert_eq!(h.ck().grade0_ranks(), expect);
    let d = &h.descent;
    assert_eq!(d.q.trace(), int(22));
    assert_eq!(d.image.cols(), 22);
    assert_eq!(d.coefficients, Some([int(1), int(6), int(0)]));
    assert_eq!(d.killed.len(), 39);
    assert_report(&d.verify_ansatz(&[int(1), int(6), int(0)]));
    // χ(X^[3]) = deg c₆(T).
    let x = h.variety();
    assert_eq!(x.chow.degree_vec(&x.chow.component(&x.tangent, 6)), int(22));
}

#[test]
fn idempotency_alone_leaves_four_kernels() {
    let d = &hilb3_p2().descent;
    let six = int::<Rat>(6);
    let mut idempotent = Vec::new();
    for l1 in [-6, 0, 6, 12] {
        for l2 in [-4, -2, 0, 2, 4] {
            let k = d.ansatz(&[int(1), int(l1), int(l2)]).unwrap().operator();
            if k.mul(&k) == k.scale(&six) {
                idempotent.push((l1, l2));
            }
        }
    }
    assert_eq!(idempotent, vec![(0, -2), (0, 0), (6, 0), (6, 2)]);
}

#[test]
fn divisor_restrictions_undercount_the_relative_cotangent() {
    let h = hilb3_p2();
    let d = &h.descent;
    let a = &h.tower.x3().chow;
    let ew = h.tower.blow_up3().exceptional_class();
    let gap = sub_vec(&a.component(&d.assembled_tangent, 1), &a.component(&d.pulled_tangent, 1));
    assert_eq!(gap, scale_vec(&ew, &int(-3)));
    let top = |v: &[Rat]| a.degree_vec(&a.component(v, 6));
    assert_eq!(top(&d.pulled_tangent), int(132));
    assert_ne!(top(&d.assembled_tangent), int(132));
}

#[test]
fn lemmas_on_the_tower() {
    let tower = &hilb3_p2().tower;
    let bu = tower.blow_up1();
    let rep = verify_diagonal_lemma(bu, &bu.normal.chern);
    assert_report(&rep);
    let excess = solve_small_diagonal_excess(bu).unwrap().unwrap();
    assert!(!excess.terms.is_empty());
    let rep = verify_excess_configurations(tower).unwrap();
    assert_report(&rep);
    assert!(rep.checks.len() >= 3);
}

#[test]
fn hilbert_cube_of_the_quadric() {
    let h = build_hilb3(&quadric()).unwrap();
    assert_report(&h.report);
    let expect = hilbert_ranks(QUADRIC, 3);
    assert_eq!(h.variety().ranks(), expect);
    assert_eq!(h.ck().grade0_ranks(), expect);
    assert_eq!(h.descent.q.trace(), int(40));
}
