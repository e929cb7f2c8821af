mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mck::ckd::*;
use mck::corresp::{BlockCorrespondence, Correspondence};
use mck::exactalg::*;
use mck::hilbert::*;
use mck::report::Report;
use mck::variety::*;
use mck::Rat;

use common::{hilbert_ranks, nested_ranks};

const P2: [i64; 3] = [1, 1, 1];
const QUADRIC: [i64; 3] = [1, 2, 1];

/// Failures collected while checking one criterion.
#[derive(Default)]
struct Findings(Vec<String>);

impl Findings {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.0.push(what());
        }
    }

    fn report(&mut self, label: &str, r: &Report) {
        for c in r.failures() {
            self.0.push(format!("{label}: {} ({})", c.check_id, c.witness.clone().unwrap_or_default()));
        }
    }

    fn result<T>(&mut self, label: &str, r: mck::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.push(format!("{label}: {e}"));
                None
            }
        }
    }
}

fn point_in(x: &VarRef<Rat>) -> Morphism<Rat> {
    let pt = build_point::<Rat>();
    let m = Matrix::from_fn(1, x.n(), |_, k| x.chow.unit()[k].clone());
    Morphism::new("pt", pt, x.clone(), m).unwrap()
}

fn p(n: usize) -> CKDecomposition<Rat> {
    CKDecomposition::standard(&build_projective_space::<Rat>(n))
}

fn quadric() -> CKDecomposition<Rat> {
    let p1 = build_projective_space::<Rat>(1);
    let ck = CKDecomposition::standard(&p1);
    ck_product(&ck, &ck, &build_product(&p1, &p1)).unwrap()
}

fn blown_up_plane() -> (BlowUp<Rat>, BlowUpCk<Rat>) {
    let p2 = build_projective_space::<Rat>(2);
    let i = point_in(&p2);
    let bu = build_blow_up(&p2, &i, &BundleData::trivial(i.source.clone(), 2)).unwrap();
    let out = ck_blow_up(&CKDecomposition::standard(&p2), &CKDecomposition::standard(&i.source), &bu).unwrap();
    (bu, out)
}

fn tangent_bundle_of_plane() -> (ProjectiveBundle<Rat>, ProjBundleCk<Rat>) {
    let p2 = build_projective_space::<Rat>(2);
    let pb = build_projective_bundle(&BundleData::tangent(p2.clone())).unwrap();
    let out = ck_projective_bundle(&CKDecomposition::standard(&p2), &pb).unwrap();
    (pb, out)
}

fn is_identity(b: &BlockCorrespondence<Rat>) -> bool {
    *b == BlockCorrespondence::identity(&b.source)
}

fn projector_suites(f: &mut Findings) {
    let (_, bl) = blown_up_plane();
    let (_, pb) = tangent_bundle_of_plane();
    let cases = [("P1", p(1)), ("P2", p(2)), ("P1xP1", quadric()), ("Bl_pt P2", bl.ck), ("P(T_P2)", pb.ck)];
    for (name, ck) in &cases {
        let r = verify_ck(ck);
        for id in ["ck.sum", "ck.idempotent", "ck.orthogonal", "ck.self_dual"] {
            f.require(r.find(id).is_some_and(|c| c.passed()), || format!("{name}: {id}"));
        }
        f.report(name, &r);
        // Direct recomputation on the operators.
        let ops = ck.operators();
        let n = ck.variety.n();
        let sum = ops.iter().fold(Matrix::zeros(n, n), |a, m| a.add(m));
        f.require(sum == Matrix::identity(n), || format!("{name}: Σπ != Δ"));
        for (i, a) in ops.iter().enumerate() {
            for (j, b) in ops.iter().enumerate() {
                let want = if i == j { a.clone() } else { Matrix::zeros(n, n) };
                f.require(a.mul(b) == want, || format!("{name}: π^{i}∘π^{j}"));
            }
        }
        let top = ck.projectors.len() - 1;
        for (i, pi) in ck.projectors.iter().enumerate() {
            f.require(pi.transpose() == ck.projectors[top - i], || format!("{name}: ᵗπ^{i} != π^{}", top - i));
        }
    }
}

fn matrix_identities(f: &mut Findings) {
    let (pb, out) = tangent_bundle_of_plane();
    f.report("P(T_P2)", &out.report);
    let x = &pb.base;
    let tphi = out.phi.transpose(pb.variety.dim as i64);
    let sigma = BlockCorrespondence::matching(&tphi.target, &out.phi.source).unwrap();
    let m = out.phi.then(&tphi).unwrap().then(&sigma).unwrap();
    f.require(m == out.unipotent, || "P(T_P2): σ∘ᵗΦ∘Φ differs from the stored block".into());
    let c1 = x.chow.component(&x.tangent, 1);
    f.require(m.entry(0, 0) == &Correspondence::diagonal(x), || "P(T_P2): entry (0,0) != Δ".into());
    f.require(m.entry(1, 1) == &Correspondence::diagonal(x), || "P(T_P2): entry (1,1) != Δ".into());
    f.require(m.entry(1, 0).is_zero(), || "P(T_P2): entry (1,0) != 0".into());
    f.require(m.entry(0, 1) == &Correspondence::multiplication(x, &c1), || "P(T_P2): entry (0,1) != ·c_1".into());
    let inv = out.psi.transpose(pb.variety.dim as i64).then(&sigma).unwrap();
    f.require(is_identity(&out.psi.then(&inv).unwrap()), || "P(T_P2): σ∘ᵗΨ∘Ψ != id".into());
    f.require(inv.then(&out.psi).unwrap().single_entry().unwrap() == &Correspondence::diagonal(&pb.variety), || {
        "P(T_P2): Ψ∘σ∘ᵗΨ != Δ".into()
    });

    let (bu, out) = blown_up_plane();
    f.report("Bl_pt P2", &out.report);
    let (x, y) = (&bu.base, &bu.center.source);
    let k = bu.variety.dim as i64;
    let tphi = out.phi.transpose(k);
    let sigma = BlockCorrespondence::matching(&tphi.target, &out.phi.source).unwrap();
    let m = out.phi.then(&tphi).unwrap().then(&sigma).unwrap();
    f.require(m.entry(0, 0) == &Correspondence::diagonal(x), || "Bl_pt P2: entry (0,0) != Δ_X".into());
    f.require(m.entry(1, 1) == &Correspondence::diagonal(y).neg(), || "Bl_pt P2: entry (1,1) != −Δ_Y".into());
    f.require(m.entry(0, 1).is_zero() && m.entry(1, 0).is_zero(), || "Bl_pt P2: off-diagonal entries".into());
    let d = BlockCorrespondence::diagonal(&out.phi.source, vec![Correspondence::diagonal(x), Correspondence::diagonal(y).neg()]);
    let ds = sigma.then(&d).unwrap();
    f.require(m.then(&d).unwrap() == out.unipotent, || "Bl_pt P2: D∘σ∘ᵗΦ∘Φ differs from the stored block".into());
    let inv = out.psi.transpose(k).then(&ds).unwrap();
    f.require(is_identity(&out.psi.then(&inv).unwrap()), || "Bl_pt P2: D∘σ∘ᵗΨ∘Ψ != id".into());
    f.require(inv.then(&out.psi).unwrap().single_entry().unwrap() == &Correspondence::diagonal(&bu.variety), || {
        "Bl_pt P2: Ψ∘D∘σ∘ᵗΨ != Δ".into()
    });
}

fn multiplicativity(f: &mut Findings, h: &Hilb3<Rat>) {
    let p2 = p(2);
    let sq = build_product(&p2.variety, &p2.variety);
    let ck_sq = ck_product(&p2, &p2, &sq).unwrap();
    let cube = build_product(&sq.variety, &p2.variety);
    let ck_cube = ck_product(&ck_sq, &p2, &cube).unwrap();
    f.report("(P2)^3", &verify_multiplicative(&ck_cube));
    f.report("X0", &verify_multiplicative(h.tower.ck(0)));
    f.report("X3", &verify_multiplicative(h.tower.ck(3)));
    f.require(h.tower.x3().n() == 84, || format!("X3 has rank {}", h.tower.x3().n()));
}

fn diagonal_lemmas(f: &mut Findings, h: &Hilb3<Rat>) {
    let bu = h.tower.blow_up1();
    let r = verify_diagonal_lemma(bu, &bu.normal.chern);
    f.require(r.checks.len() == 2, || "X1: diagonal lemma checks missing".into());
    f.report("X1", &r);
    if let Some(r) = f.result("excess", verify_excess_configurations(&h.tower)) {
        f.require(r.checks.len() >= 3, || format!("only {} excess configurations", r.checks.len()));
        f.report("excess", &r);
    }
}

fn hilbert_squares(f: &mut Findings) {
    for (name, ck, betti) in [("P2", p(2), P2), ("P1xP1", quadric(), QUADRIC)] {
        let Some(h) = f.result(name, build_hilb_square(&ck)) else { continue };
        f.report(name, &h.report);
        let expect = hilbert_ranks(betti, 2);
        f.require(h.variety().ranks() == expect, || format!("{name}^[2] ranks {:?} != {expect:?}", h.variety().ranks()));
        f.require(h.ck().grade0_ranks() == expect, || format!("{name}^[2] graded ranks {:?}", h.ck().graded_ranks()));
    }
}

fn nested(f: &mut Findings) {
    let ck = p(2);
    if let Some(n) = f.result("P2^[1,2]", build_nested_12(&ck)) {
        f.report("P2^[1,2]", &n.ck.report);
        f.report("P2^[1,2]", &verify_all(&n.ck.ck));
        let expect = nested_ranks(P2, 1);
        f.require(n.variety().ranks() == expect, || format!("P2^[1,2] ranks {:?}", n.variety().ranks()));
        f.require(n.ck.ck.grade0_ranks() == expect, || "P2^[1,2] graded ranks".into());
    }
    if let Some(n) = f.result("P2^[2,3]", build_nested_23(&ck)) {
        f.report("P2^[2,3]", &n.report);
        f.report("P2^[2,3]", &verify_all(&n.ck.ck));
        let expect = nested_ranks(P2, 2);
        f.require(n.variety().ranks() == expect, || format!("P2^[2,3] ranks {:?}", n.variety().ranks()));
        f.require(n.ck.ck.grade0_ranks() == expect, || "P2^[2,3] graded ranks".into());
    }
}

fn capstone(f: &mut Findings, h: &Hilb3<Rat>) {
    f.require(h.tower.ranks() == [27, 36, 72, 84], || format!("tower ranks {:?}", h.tower.ranks()));
    f.report("hilb3", &h.report);
    let q = h.descent.q.operator();
    let n = q.rows();
    f.require(q.mul(&q) == q, || "q∘q != q".into());
    f.require(h.descent.q.transpose() == h.descent.q, || "ᵗq != q".into());
    for (g, m) in h.actions.top().elements.iter().enumerate() {
        f.require(m.mul(&q) == q.mul(m), || format!("q does not commute with Γ_{g}"));
    }
    for (i, pi) in h.tower.ck(3).operators().iter().enumerate() {
        f.require(pi.mul(&q) == q.mul(pi), || format!("q does not commute with π^{i}"));
    }
    f.require(q.trace() == int(22), || format!("trace q = {}", q.trace()));
    let alg = &h.tower.x3().chow;
    let image: Vec<usize> = (0..=alg.codims().iter().copied().max().unwrap_or(0))
        .map(|c| {
            let idx: Vec<usize> = (0..n).filter(|&i| alg.codim(i) == c).collect();
            q.submatrix(&idx, &idx).rank()
        })
        .collect();
    f.require(image == hilbert_ranks(P2, 3), || format!("graded ranks of Im q {image:?}"));
    let r = verify_all(h.ck());
    for prefix in [".ck.self_dual", ".mult.", ".chern."] {
        f.require(r.checks.iter().any(|c| c.check_id.contains(prefix)), || format!("descended CK: no {prefix} check"));
    }
    f.report("X^[3]", &r);
}

fn negative_controls(f: &mut Findings, h: &Hilb3<Rat>) {
    let eps = [int::<Rat>(1), rat(-3, 7), rat(1, 1000)];
    let (_, bl) = blown_up_plane();
    let mut count = 0;
    for (name, ck) in [("P2", p(2)), ("Bl_pt P2", bl.ck)] {
        let n = ck.variety.n();
        for i in 0..ck.projectors.len() {
            for row in 0..n {
                for col in 0..n {
                    let e = &eps[count % eps.len()];
                    count += 1;
                    let r = verify_ck(&ck.perturbed(i, row, col, e));
                    f.require(r.failures().iter().any(|c| c.witness.is_some()), || format!("{name}: π^{i}[{row},{col}] + {e} passes"));
                }
            }
        }
    }

    let nested = build_nested_12(&p(2)).unwrap();
    for (name, bu) in [("X1", h.tower.blow_up1()), ("P2^[1,2]", &nested.blow_up)] {
        for k in 0..bu.normal.chern.len() {
            let e = &eps[k % eps.len()];
            let mut c = bu.normal.chern.clone();
            c[k] += e;
            let lemma = verify_diagonal_lemma(bu, &c);
            let caught_by_lemma = lemma.find("diagonal.l2").is_some_and(|c| !c.passed() && c.witness.is_some());
            let caught_by_rebuild = match BundleData::new(bu.center.source.clone(), bu.normal.rank, c)
                .and_then(|n| build_blow_up(&bu.base, &bu.center, &n))
            {
                Ok(b) => b.verify().find("blowup.normal_whitney").is_some_and(|c| !c.passed() && c.witness.is_some()),
                Err(_) => true,
            };
            f.require(caught_by_lemma || caught_by_rebuild, || format!("{name}: c(N)[{k}] + {e} passes"));
        }
    }

    let base = h.descent.coefficients.clone().unwrap_or([int(1), int(6), int(0)]);
    for slot in [1, 2] {
        for e in &eps {
            let mut c = base.clone();
            c[slot] += e;
            let r = h.descent.verify_ansatz(&c);
            f.require(!r.all_pass(), || format!("λ{slot} + {e} passes"));
        }
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut line = |n: usize, name: &str, budget: Duration, run: &mut dyn FnMut(&mut Findings)| {
        let t = Instant::now();
        let mut f = Findings::default();
        run(&mut f);
        let dt = t.elapsed();
        if dt > budget {
            f.0.push(format!("took {dt:.1?}, budget {budget:?}"));
        }
        if f.0.is_empty() {
            println!("criterion {n} PASS  {name} ({dt:.1?})");
        } else {
            failed += 1;
            println!("criterion {n} FAIL  {name} ({dt:.1?})");
            for w in &f.0 {
                println!("    {w}");
            }
        }
    };
    line(1, "projector suites", Duration::from_secs(10), &mut projector_suites);
    line(2, "block matrix identities", Duration::from_secs(10), &mut matrix_identities);

    let t = Instant::now();
    let h = build_hilb3(&p(2));
    let built = t.elapsed();
    let h = match h {
        Ok(h) => h,
        Err(e) => {
            println!("hilbert cube of P2 failed to build: {e}");
            for n in [3, 4, 7, 8] {
                println!("criterion {n} FAIL");
            }
            return ExitCode::FAILURE;
        }
    };
    println!("built the P2 tower and its quotient in {built:.1?}");
    line(3, "multiplicativity", Duration::from_secs(600), &mut |f| multiplicativity(f, &h));
    line(4, "diagonal and excess lemmas", Duration::from_secs(300), &mut |f| diagonal_lemmas(f, &h));
    line(5, "Hilbert squares", Duration::from_secs(60), &mut hilbert_squares);
    line(6, "nested schemes", Duration::from_secs(300), &mut nested);
    line(7, "Hilbert cube of P2", Duration::from_secs(1800) - built, &mut |f| capstone(f, &h));
    line(8, "negative controls", Duration::from_secs(600), &mut |f| negative_controls(f, &h));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
