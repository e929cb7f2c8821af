//! Rank oracles computed from generating functions, independent of the engine.
#![allow(dead_code)]

/// Power series in `q` whose coefficients are polynomials in `x`
/// (`x` marks codimension), truncated at `q^n`.
type Series = Vec<Vec<i64>>;

fn series_mul(a: &Series, b: &Series, n: usize) -> Series {
    let mut out = vec![Vec::new(); n + 1];
    for i in 0..=n {
        for j in 0..=n - i {
            for (di, ci) in a[i].iter().enumerate() {
                for (dj, cj) in b[j].iter().enumerate() {
                    let slot = &mut out[i + j];
                    if slot.len() <= di + dj {
                        slot.resize(di + dj + 1, 0);
                    }
                    slot[di + dj] += ci * cj;
                }
            }
        }
    }
    out
}

fn binom(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `(1 − x^d q^k)^{−b} = Σ_r binom(b + r − 1, r) x^{dr} q^{kr}`.
fn factor(d: usize, k: usize, b: i64, n: usize) -> Series {
    let mut s = vec![Vec::new(); n + 1];
    let mut r = 0;
    while r * k <= n {
        let mut poly = vec![0; d * r + 1];
        poly[d * r] = binom(b + r as i64 - 1, r as i64);
        s[r * k] = poly;
        r += 1;
    }
    s
}

fn trim(mut p: Vec<i64>) -> Vec<i64> {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
    p
}

/// Ranks of `CH^*(S^[n])` for a surface with even Betti numbers
/// `(b0, b2, b4)`: `Σ_n P(S^[n]) q^n = Π_{k≥1} Π_j (1 − x^{k−1+j} q^k)^{−b_{2j}}`.
pub fn hilbert_ranks(betti: [i64; 3], n: usize) -> Vec<usize> {
    let mut g: Series = vec![Vec::new(); n + 1];
    g[0] = vec![1];
    for k in 1..=n {
        for (j, &b) in betti.iter().enumerate() {
            g = series_mul(&g, &factor(k - 1 + j, k, b, n), n);
        }
    }
    trim(g[n].clone()).into_iter().map(|c| c as usize).collect()
}

/// Ranks of `CH^*(S^[n,n+1])`: `P(S) · Σ_{m≤n} P(S^[m]) x^{n−m}`.
pub fn nested_ranks(betti: [i64; 3], n: usize) -> Vec<usize> {
    let mut sum = vec![0i64; 2 * n + 1];
    for m in 0..=n {
        for (d, c) in hilbert_ranks(betti, m).iter().enumerate() {
            sum[n - m + d] += *c as i64;
        }
    }
    let mut out = vec![0i64; sum.len() + 2];
    for (i, s) in sum.iter().enumerate() {
        for (j, b) in betti.iter().enumerate() {
            out[i + j] += s * b;
        }
    }
    trim(out).into_iter().map(|c| c as usize).collect()
}

/// Ranks of `Sym^n P¹ = P^n`.
pub fn line_symmetric_ranks(n: usize) -> Vec<usize> {
    vec![1; n + 1]
}
