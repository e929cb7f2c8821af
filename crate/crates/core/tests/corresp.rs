use mck::corresp::*;
use mck::exactalg::*;
use mck::variety::*;
use proptest::prelude::*;

struct Triple {
    x: VarRef<Rat>,
    y: VarRef<Rat>,
    z: VarRef<Rat>,
    xy: Product<Rat>,
    yz: Product<Rat>,
    xz: Product<Rat>,
    xyz: Product<Rat>,
    p12: Morphism<Rat>,
    p23: Morphism<Rat>,
    p13: Morphism<Rat>,
}

/// `X × Y × Z` with its three partial projections, built from basis tensors.
fn triple() -> Triple {
    let x = build_projective_space::<Rat>(2);
    let y = build_projective_space::<Rat>(1);
    let z = build_projective_space::<Rat>(2);
    let xy = build_product(&x, &y);
    let yz = build_product(&y, &z);
    let xz = build_product(&x, &z);
    let xyz = build_product(&xy.variety, &z);
    let n = xyz.variety.n();
    let cols = |left: &VarRef<Rat>, right: &VarRef<Rat>, f: &dyn Fn(&[Rat], &[Rat]) -> Vec<Rat>| -> Matrix<Rat> {
        let cs: Vec<Vec<Rat>> = (0..left.n())
            .flat_map(|i| (0..right.n()).map(move |k| (i, k)))
            .map(|(i, k)| f(&left.chow.basis_vec(i), &right.chow.basis_vec(k)))
            .collect();
        Matrix::from_columns(n, &cs)
    };
    let p23 = cols(&y, &z, &|b, c| tensor_vec(&tensor_vec(x.chow.unit(), b), c));
    let p13 = cols(&x, &z, &|a, c| tensor_vec(&tensor_vec(a, y.chow.unit()), c));
    Triple {
        p12: xyz.p1.clone(),
        p23: Morphism::new("p23", xyz.variety.clone(), yz.variety.clone(), p23).unwrap(),
        p13: Morphism::new("p13", xyz.variety.clone(), xz.variety.clone(), p13).unwrap(),
        x,
        y,
        z,
        xy,
        yz,
        xz,
        xyz,
    }
}

fn corr(src: &VarRef<Rat>, tgt: &VarRef<Rat>, e: &[i64]) -> Correspondence<Rat> {
    let m = tgt.n();
    Correspondence::new(src.clone(), tgt.clone(), Matrix::from_fn(src.n(), m, |i, j| int(e[i * m + j]))).unwrap()
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-3i64..=3, len)
}

#[test]
fn diagonal_is_the_identity() {
    let t = triple();
    let d = Correspondence::diagonal(&t.x);
    assert_eq!(d.operator(), Matrix::identity(t.x.n()));
    assert_eq!(d.trace(), int(3));
    let pt = build_point::<Rat>();
    let f = Morphism::new("pt", pt.clone(), t.x.clone(), Matrix::from_fn(1, 3, |_, k| int(i64::from(k == 0)))).unwrap();
    let g = Correspondence::graph(&f);
    assert_eq!(g.act(pt.chow.unit()), t.x.point.clone());
    assert_eq!(g.transpose().act(&t.x.chow.basis_vec(0)), vec![int(1)]);
}

#[test]
fn small_diagonal_multiplies() {
    let t = triple();
    let d3 = Tensor3::small_diagonal(&t.x);
    let a = &t.x.chow;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            assert_eq!(d3.act2(&a.basis_vec(i), &a.basis_vec(j)), a.mul_vec(&a.basis_vec(i), &a.basis_vec(j)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composition_through_the_triple_product(ea in coeffs(6), eb in coeffs(6)) {
        let t = triple();
        let a = corr(&t.x, &t.y, &ea);
        let b = corr(&t.y, &t.z, &eb);
        let alg = &t.xyz.variety.chow;
        let pa = t.p12.pull(&a.as_class(&t.xy).unwrap());
        let pb = t.p23.pull(&b.as_class(&t.yz).unwrap());
        let pushed = t.p13.push(&alg.mul_vec(&pa, &pb)).unwrap();
        let oracle = Correspondence::from_class(&t.xz, &pushed).unwrap();
        prop_assert_eq!(a.then(&b).unwrap(), oracle);
    }

    #[test]
    fn action_through_the_product(ea in coeffs(6), v in coeffs(3)) {
        let t = triple();
        let a = corr(&t.x, &t.y, &ea);
        let alpha: Vec<Rat> = v.iter().map(|&k| int(k)).collect();
        let cls = a.as_class(&t.xy).unwrap();
        let xy = &t.xy.variety.chow;
        let oracle = t.xy.p2.push(&xy.mul_vec(&t.xy.p1.pull(&alpha), &cls)).unwrap();
        prop_assert_eq!(a.act(&alpha), oracle.clone());
        prop_assert_eq!(a.operator().mul_vec(&alpha), oracle);
    }

    #[test]
    fn composition_laws(ea in coeffs(6), eb in coeffs(6), ec in coeffs(9)) {
        let t = triple();
        let a = corr(&t.x, &t.y, &ea);
        let b = corr(&t.y, &t.z, &eb);
        let c = corr(&t.z, &t.x, &ec);
        prop_assert_eq!(a.then(&b).unwrap().then(&c).unwrap(), a.then(&b.then(&c).unwrap()).unwrap());
        prop_assert_eq!(a.then(&b).unwrap().transpose(), b.transpose().then(&a.transpose()).unwrap());
        prop_assert_eq!(a.then(&b).unwrap().operator(), b.operator().mul(&a.operator()));
        prop_assert_eq!(Correspondence::diagonal(&t.x).then(&a).unwrap(), a.clone());
        prop_assert_eq!(a.then(&Correspondence::diagonal(&t.y)).unwrap(), a.clone());
        prop_assert!(a.then(&Correspondence::zero(t.y.clone(), t.z.clone())).unwrap().is_zero());
        prop_assert_eq!(b.compose(&a).unwrap(), a.then(&b).unwrap());
    }

    #[test]
    fn operator_round_trip(e in coeffs(9)) {
        let t = triple();
        let c = corr(&t.z, &t.x, &e);
        prop_assert_eq!(Correspondence::from_operator(&t.z, &t.x, &c.operator()).unwrap(), c.clone());
        prop_assert_eq!(c.transpose().transpose(), c);
    }

    #[test]
    fn trace_is_the_pairing_with_the_diagonal(e in coeffs(9)) {
        let t = triple();
        let c = corr(&t.x, &t.x, &e);
        let d = Correspondence::diagonal(&t.x);
        prop_assert_eq!(c.trace(), c.pairing(&d.transpose()).unwrap());
    }
}
