use mck::exactalg::{int, Matrix};
use mck::variety::*;
use mck::Rat;

fn v(xs: &[i64]) -> Vec<Rat> {
    xs.iter().map(|&x| int(x)).collect()
}

fn point_in(x: &VarRef<Rat>) -> Morphism<Rat> {
    let pt = build_point::<Rat>();
    let m = Matrix::from_fn(1, x.n(), |_, k| x.chow.unit()[k].clone());
    Morphism::new("pt", pt, x.clone(), m).unwrap()
}

fn assert_report(r: &mck::report::Report) {
    for c in &r.checks {
        assert!(c.passed(), "{}: {:?}", c.check_id, c.witness);
    }
}

#[test]
fn projective_plane_products() {
    let p2 = build_projective_space::<Rat>(2);
    let a = &p2.chow;
    assert_eq!(a.mul_vec(&v(&[0, 1, 0]), &v(&[0, 1, 0])), v(&[0, 0, 1]));
    assert_eq!(a.mul_vec(&v(&[0, 0, 1]), &v(&[0, 1, 0])), v(&[0, 0, 0]));
    assert_eq!(p2.tangent, v(&[1, 3, 3]));
    assert_report(&p2.verify());
}

#[test]
fn blow_up_of_a_point() {
    let p2 = build_projective_space::<Rat>(2);
    let i = point_in(&p2);
    let n = BundleData::trivial(i.source.clone(), 2);
    let bu = build_blow_up(&p2, &i, &n).unwrap();
    let x = &bu.variety;
    assert_eq!(x.ranks(), vec![1, 2, 1]);
    let e = bu.exceptional_class();
    let ee = x.chow.mul_vec(&e, &e);
    assert_eq!(x.chow.degree_vec(&ee), int(-1));
    assert_eq!(x.euler(), int(4));
    assert_report(&x.verify());
    assert_report(&bu.verify());
    assert_report(&bu.rho.verify());
    assert_report(&bu.j.verify());
}

#[test]
fn projective_bundle_of_tangent_plane() {
    let p2 = build_projective_space::<Rat>(2);
    let pb = build_projective_bundle(&BundleData::tangent(p2.clone())).unwrap();
    let x = &pb.variety;
    assert_eq!(x.ranks(), vec![1, 2, 2, 1]);
    // ξ² = −3hξ − 3h²
    let xi2 = x.chow.mul_vec(&pb.xi, &pb.xi);
    let mut expect = x.chow.zero_vec();
    expect[pb.index(1, 1)] = int(-3);
    expect[pb.index(0, 2)] = int(-3);
    assert_eq!(xi2, expect);
    assert_eq!(pb.pi.push(&pb.xi).unwrap(), v(&[1, 0, 0]));
    assert_eq!(pb.pi.push(&xi2).unwrap(), v(&[0, -3, 0]));
    assert_eq!(pb.pi.push(x.chow.unit()).unwrap(), v(&[0, 0, 0]));
    assert_report(&x.verify());
    assert_report(&pb.pi.verify());
}

#[test]
fn diagonal_blow_up_ranks() {
    let p2 = build_projective_space::<Rat>(2);
    let prod = build_product(&p2, &p2);
    let delta = Morphism::new("diag", p2.clone(), prod.variety.clone(), diag_pullback(&prod)).unwrap();
    let n = BundleData::tangent(p2.clone());
    let bu = build_blow_up(&prod.variety, &delta, &n).unwrap();
    assert_eq!(bu.variety.ranks(), vec![1, 3, 4, 3, 1]);
    assert_report(&bu.variety.verify());
    assert_report(&bu.verify());
}

fn diag_pullback(prod: &Product<Rat>) -> Matrix<Rat> {
    let a = &prod.left.chow;
    let n = a.dim();
    let cols: Vec<Vec<Rat>> = (0..n * n)
        .map(|p| a.mul_vec(&a.basis_vec(p / n), &a.basis_vec(p % n)))
        .collect();
    Matrix::from_columns(n, &cols)
}

#[test]
fn symmetric_square_of_the_line() {
    let p1 = build_projective_space::<Rat>(1);
    let prod = build_product(&p1, &p1);
    let swap = Matrix::from_fn(4, 4, |p, q| if p == (q % 2) * 2 + q / 2 { int(1) } else { int(0) });
    let act = GroupAction::symmetric(prod.variety.clone(), &[vec![0, 1], vec![1, 0]], |p| {
        if p == [0, 1] {
            Matrix::identity(4)
        } else {
            swap.clone()
        }
    });
    assert_report(&act.verify());
    let diag = diag_pullback_general(&prod);
    let q = build_quotient("Sym2P1", &act, &[diag]).unwrap();
    assert_eq!(q.variety.ranks(), vec![1, 1, 1]);
    assert_report(&q.variety.verify());
    assert_report(&q.p.verify());
    // p_*p^* = 2
    let pp = q.p.push_matrix().unwrap().mul(&q.p.pullback);
    assert_eq!(pp, Matrix::identity(3).scale(&int(2)));
}

fn diag_pullback_general(prod: &Product<Rat>) -> Vec<Rat> {
    // [Δ] = h⊗1 + 1⊗h on P¹×P¹
    let mut d = prod.variety.chow.zero_vec();
    d[prod.index(1, 0)] = int(1);
    d[prod.index(0, 1)] = int(1);
    d
}

#[test]
fn replay_tangent_bundle_over_product() {
    let p2 = build_projective_space::<Rat>(2);
    let pb = build_projective_bundle(&BundleData::tangent(p2.clone())).unwrap();
    let prod = build_product(&p2, &p2);
    let (w, proj) = replay_over_base(&pb.variety, &prod.p1).unwrap();
    assert_eq!(w.n(), 2 * prod.variety.n());
    assert_report(&proj.verify());
    let (same, _) = replay_over_base(&pb.variety, &Morphism::identity(p2.clone())).unwrap();
    assert_eq!(same.ranks(), pb.variety.ranks());
}
