use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use mck::ckd::*;
use mck::exactalg::*;
use mck::variety::*;
use num_traits::{Num, One, Zero};
use proptest::prelude::*;

const P: i64 = 10_007;

/// Integers modulo a prime, standing in for a second exact scalar field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Fp(i64);

impl Fp {
    fn new(n: i64) -> Self {
        Fp(n.rem_euclid(P))
    }

    fn pow(self, mut e: i64) -> Self {
        let (mut b, mut acc) = (self, Fp(1));
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b;
            }
            b = b * b;
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        Fp::new(self.0 + o.0)
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        Fp::new(self.0 - o.0)
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        Fp::new(self.0 * o.0)
    }
}

impl Div for Fp {
    type Output = Fp;
    fn div(self, o: Fp) -> Fp {
        assert!(o.0 != 0, "division by zero in F_p");
        self * o.pow(P - 2)
    }
}

impl Rem for Fp {
    type Output = Fp;
    fn rem(self, _: Fp) -> Fp {
        Fp(0)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp::new(-self.0)
    }
}

impl AddAssign<&Fp> for Fp {
    fn add_assign(&mut self, o: &Fp) {
        *self = *self + *o;
    }
}

impl SubAssign<&Fp> for Fp {
    fn sub_assign(&mut self, o: &Fp) {
        *self = *self - *o;
    }
}

impl MulAssign<&Fp> for Fp {
    fn mul_assign(&mut self, o: &Fp) {
        *self = *self * *o;
    }
}

impl Zero for Fp {
    fn zero() -> Fp {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Fp {
    fn one() -> Fp {
        Fp(1)
    }
}

impl Num for Fp {
    type FromStrRadixErr = std::num::ParseIntError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Fp, Self::FromStrRadixErr> {
        i64::from_str_radix(s, radix).map(Fp::new)
    }
}

impl Scalar for Fp {
    fn from_int(n: i64) -> Fp {
        Fp::new(n)
    }

    fn times(&self, other: &Fp) -> Fp {
        *self * *other
    }

    fn is_integer(&self) -> bool {
        true
    }
}

fn m(rows: &[&[i64]]) -> Matrix<Rat> {
    let cols = rows[0].len();
    Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect::<Vec<_>>(), cols)
}

fn point_in<S: Scalar>(x: &VarRef<S>) -> Morphism<S> {
    let pt = build_point::<S>();
    let mm = Matrix::from_fn(1, x.n(), |_, k| x.chow.unit()[k].clone());
    Morphism::new("pt", pt, x.clone(), mm).unwrap()
}

#[test]
fn prime_field_decompositions() {
    let p1 = build_projective_space::<Fp>(1);
    let p2 = build_projective_space::<Fp>(2);
    let prod = build_product(&p2, &p1);
    let ck = ck_product(&CKDecomposition::standard(&p2), &CKDecomposition::standard(&p1), &prod).unwrap();
    assert!(verify_all(&ck).all_pass());
    assert_eq!(ck.grade0_ranks(), vec![1, 2, 2, 1]);

    let i = point_in(&p2);
    let bu = build_blow_up(&p2, &i, &BundleData::trivial(i.source.clone(), 2)).unwrap();
    let out = ck_blow_up(&CKDecomposition::standard(&p2), &CKDecomposition::standard(&i.source), &bu).unwrap();
    assert!(out.report.all_pass());
    assert!(verify_all(&out.ck).all_pass());
    let a = &bu.variety.chow;
    let e = bu.exceptional_class();
    assert_eq!(a.degree_vec(&a.mul_vec(&e, &e)), Fp::new(-1));
}

#[test]
fn rational_parsing() {
    assert_eq!(parse_rat("-3/6"), Some(rat(-1, 2)));
    assert_eq!(parse_rat(" 7 "), Some(int(7)));
    assert_eq!(parse_rat("1/0"), None);
    assert_eq!(parse_rat("x"), None);
}

#[test]
fn generalized_binomials() {
    assert_eq!(binomial(&int::<Rat>(5), 2), int(10));
    assert_eq!(binomial(&rat(1, 2), 2), rat(-1, 8));
    assert_eq!(binomial(&int::<Rat>(-1), 3), int(-1));
    assert_eq!(factorial::<Rat>(6), int(720));
}

#[test]
fn nilpotent_square_root() {
    let n = m(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
    let half = rat(1, 2);
    let r = nilpotent_binomial(&n, &half, 3).unwrap();
    assert_eq!(r.mul(&r), Matrix::identity(3).add(&n));
    assert!(nilpotent_binomial(&m(&[&[1, 0], &[0, 0]]), &half, 2).is_err());
}

#[test]
fn todd_integrates_to_one_on_projective_spaces() {
    for n in 1..=5 {
        let x = build_projective_space::<Rat>(n);
        let a = &x.chow;
        let td = a.todd_vec(&x.tangent).unwrap();
        assert_eq!(a.degree_vec(&td), int(1), "P{n}");
    }
}

#[test]
fn euler_sequence_character() {
    // ch T_{P^n} = (n+1)e^h − 1
    for n in 1..=4 {
        let x = build_projective_space::<Rat>(n);
        let a = &x.chow;
        let h = a.basis_vec(1);
        let mut expect = scale_vec(&a.exp_vec(&h), &int(n as i64 + 1));
        expect[0] -= &int::<Rat>(1);
        assert_eq!(a.chern_character_vec(n as i64, &x.tangent).unwrap(), expect);
    }
}

fn small_class() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-4i64..=4, 6)
}

fn p2xp1() -> VarRef<Rat> {
    build_product(&build_projective_space::<Rat>(2), &build_projective_space::<Rat>(1)).variety
}

fn to_rat(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| int(x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(a in small_class(), b in small_class(), c in small_class()) {
        let x = p2xp1();
        let alg = &x.chow;
        let (a, b, c) = (to_rat(&a), to_rat(&b), to_rat(&c));
        prop_assert_eq!(alg.mul_vec(&a, &b), alg.mul_vec(&b, &a));
        prop_assert_eq!(alg.mul_vec(&alg.mul_vec(&a, &b), &c), alg.mul_vec(&a, &alg.mul_vec(&b, &c)));
        prop_assert_eq!(alg.mul_vec(&a, &add_vec(&b, &c)), add_vec(&alg.mul_vec(&a, &b), &alg.mul_vec(&a, &c)));
        prop_assert_eq!(alg.mul_vec(alg.unit(), &a), a);
    }

    #[test]
    fn series_inverse(a in small_class()) {
        let x = p2xp1();
        let alg = &x.chow;
        let mut s = to_rat(&a);
        s[0] = int(1);
        let inv = alg.series_invert_vec(&s).unwrap();
        prop_assert_eq!(alg.mul_vec(&s, &inv), alg.unit().to_vec());
    }

    #[test]
    fn exp_log_round_trip(a in small_class()) {
        let x = p2xp1();
        let alg = &x.chow;
        let mut v = to_rat(&a);
        v[0] = int(0);
        let e = alg.exp_vec(&v);
        prop_assert_eq!(alg.log_vec(&e).unwrap(), v.clone());
        prop_assert_eq!(alg.mul_vec(&e, &alg.exp_vec(&scale_vec(&v, &int(-1)))), alg.unit().to_vec());
    }

    #[test]
    fn chern_character_round_trip(a in small_class(), b in small_class(), r in 0i64..4) {
        let x = p2xp1();
        let alg = &x.chow;
        let mut c = to_rat(&a);
        c[0] = int(1);
        let mut d = to_rat(&b);
        d[0] = int(1);
        let ch = alg.chern_character_vec(r, &c).unwrap();
        prop_assert_eq!(alg.chern_from_character_vec(&ch), c.clone());
        // Whitney sum: ch is additive, c and td are multiplicative.
        let chd = alg.chern_character_vec(2, &d).unwrap();
        prop_assert_eq!(alg.chern_from_character_vec(&add_vec(&ch, &chd)), alg.mul_vec(&c, &d));
        let td = alg.todd_vec(&alg.mul_vec(&c, &d)).unwrap();
        prop_assert_eq!(td, alg.mul_vec(&alg.todd_vec(&c).unwrap(), &alg.todd_vec(&d).unwrap()));
        prop_assert_eq!(alg.dual_chern_vec(&alg.dual_chern_vec(&c)), c);
    }

    #[test]
    fn matrix_inverse_and_solve(entries in proptest::collection::vec(-5i64..=5, 16), rhs in proptest::collection::vec(-5i64..=5, 4)) {
        let a = Matrix::from_fn(4, 4, |i, j| int::<Rat>(entries[4 * i + j]));
        let b = to_rat(&rhs);
        if a.rank() == 4 {
            let inv = a.inverse().unwrap();
            prop_assert_eq!(a.mul(&inv), Matrix::identity(4));
            let x = a.solve(&b).unwrap();
            prop_assert_eq!(a.mul_vec(&x), b);
        } else {
            prop_assert!(a.inverse().is_err());
            for v in a.kernel() {
                prop_assert!(a.mul_vec(&v).iter().all(|t| t.is_zero()));
            }
            prop_assert_eq!(a.kernel().len(), 4 - a.rank());
        }
        prop_assert_eq!(a.rank(), a.transpose().rank());
    }

    #[test]
    fn kronecker_mixed_product(e in proptest::collection::vec(-3i64..=3, 16)) {
        let a = Matrix::from_fn(2, 2, |i, j| int::<Rat>(e[2 * i + j]));
        let b = Matrix::from_fn(2, 2, |i, j| int::<Rat>(e[4 + 2 * i + j]));
        let c = Matrix::from_fn(2, 2, |i, j| int::<Rat>(e[8 + 2 * i + j]));
        let d = Matrix::from_fn(2, 2, |i, j| int::<Rat>(e[12 + 2 * i + j]));
        prop_assert_eq!(a.kron(&b).mul(&c.kron(&d)), a.mul(&c).kron(&b.mul(&d)));
        prop_assert_eq!(a.kron(&b).trace(), a.trace() * b.trace());
    }

    #[test]
    fn prime_field_inverse(n in 1i64..P) {
        let x = Fp::new(n);
        prop_assert_eq!(x * (Fp(1) / x), Fp(1));
    }
}
