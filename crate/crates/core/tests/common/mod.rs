//! Independent reference computations used as test oracles. None of these
//! call into the algorithms they check.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use selorder::arith::{factor, kronecker};
use selorder::building::vertex_from_coords;
use selorder::classgroup::prime_of_k;
use selorder::genus::DeviationData;
use selorder::relext::{prime_valuation, FiniteField, Fq, OkElement, QuadField};
use selorder::{ApartmentFrame, LocalMatrix, PrimeKind, QuadForm};

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `v_p(x)` for nonzero `x`, by repeated division.
pub fn val(x: &BigRational, p: u64) -> i64 {
    assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut v = 0;
    let mut n = x.numer().abs();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = x.denom().abs();
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    v
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for perm in permutations(n - 1) {
        for pos in 0..n {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

fn sign(perm: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                s = -s;
            }
        }
    }
    s
}

/// Leibniz determinant.
pub fn det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    permutations(n)
        .iter()
        .map(|perm| {
            let prod = (0..n).fold(BigRational::one(), |acc, i| acc * &m[i][perm[i]]);
            prod * q(sign(perm))
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

/// Invariant factors over `Z_(p)` from minimal valuations of `k x k` minors;
/// `None` for a singular matrix.
pub fn invariants_by_minors(m: &[Vec<BigRational>], p: u64) -> Option<Vec<i64>> {
    let n = m.len();
    if det(m).is_zero() {
        return None;
    }
    let mut prefix = vec![0i64];
    for k in 1..=n {
        let mut best: Option<i64> = None;
        for rows in subsets(n, k) {
            for cols in subsets(n, k) {
                let minor: Vec<Vec<BigRational>> = rows
                    .iter()
                    .map(|&i| cols.iter().map(|&j| m[i][j].clone()).collect())
                    .collect();
                let d = det(&minor);
                if !d.is_zero() {
                    let v = val(&d, p);
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
        }
        prefix.push(best.expect("nonsingular matrix has a nonzero minor of each size"));
    }
    Some(prefix.windows(2).map(|w| w[1] - w[0]).collect())
}

pub fn random_int_matrix<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> Vec<Vec<BigRational>> {
    (0..n)
        .map(|_| (0..n).map(|_| q(rng.gen_range(lo..=hi))).collect())
        .collect()
}

/// A random nonsingular matrix with rational entries whose denominators are powers of `p`.
pub fn random_basis<R: Rng>(rng: &mut R, n: usize, p: u64) -> LocalMatrix {
    loop {
        let rows: Vec<Vec<BigRational>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let num = rng.gen_range(-12i64..=12);
                        let den = (p as i64).pow(rng.gen_range(0..=2));
                        BigRational::new(num.into(), den.into())
                    })
                    .collect()
            })
            .collect();
        let m = LocalMatrix::new(p, rows).unwrap();
        if !m.is_singular() {
            return m;
        }
    }
}

/// Kronecker symbol `(d / n)` for `n > 0`, by factoring `n`.
pub fn kronecker_symbol(d: i64, n: u64) -> i64 {
    let mut n = n;
    let mut result = 1i64;
    let mut f = 2u64;
    while n > 1 {
        if n.is_multiple_of(f) {
            n /= f;
            let s = if f == 2 {
                match d.rem_euclid(8) {
                    1 | 7 => 1,
                    3 | 5 => -1,
                    _ => 0,
                }
            } else {
                // Euler's criterion by repeated multiplication.
                let r = d.rem_euclid(f as i64) as u64;
                if r == 0 {
                    0
                } else {
                    let mut acc = 1u64;
                    for _ in 0..(f - 1) / 2 {
                        acc = acc * r % f;
                    }
                    if acc == 1 {
                        1
                    } else {
                        -1
                    }
                }
            };
            result *= s;
        } else {
            f += 1;
        }
    }
    result
}

/// `h(d)` from the analytic class number formula `h = -(w / 2|d|) Σ χ(a)·a`.
pub fn analytic_class_number(d: i64) -> i64 {
    let n = d.unsigned_abs();
    let w = match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    let s: i64 = (1..n).map(|a| kronecker_symbol(d, a) * a as i64).sum();
    -(w * s) / (2 * n as i64)
}

pub fn count_reduced_forms(d: i64) -> usize {
    reduced_forms(d).len()
}

/// Reduced primitive forms `(a, b, c)` of discriminant `d`, by a direct scan.
pub fn reduced_forms(d: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) == 1 {
                out.push((a, b, c));
            }
        }
        a += 1;
    }
    out
}

/// Product of the ideals attached to two forms, computed from the `Z`-basis
/// of the product ideal and converted back to a (reduced) form.
pub fn ideal_product_form(f: &QuadForm, g: &QuadForm, d: i64) -> QuadForm {
    let delta = d.rem_euclid(2);
    let n = (delta - d) / 4;
    // x + yω with ω^2 = δω - n.
    let mul = |a: (BigInt, BigInt), b: (BigInt, BigInt)| -> (BigInt, BigInt) {
        let yy = &a.1 * &b.1;
        (
            &a.0 * &b.0 - &yy * n,
            &a.0 * &b.1 + &a.1 * &b.0 + &yy * delta,
        )
    };
    let basis = |f: &QuadForm| -> [(BigInt, BigInt); 2] {
        let shift: BigInt = -(&f.b + delta) / 2;
        [(f.a.clone(), BigInt::zero()), (shift, BigInt::one())]
    };
    let bf = basis(f);
    let bg = basis(g);
    let mut gens = Vec::new();
    for x in &bf {
        for y in &bg {
            gens.push(mul(x.clone(), y.clone()));
        }
    }
    // Hermite form of the rank-2 lattice: (A, 0) and (B, C).
    let mut vecs = gens;
    loop {
        let live: Vec<usize> = (0..vecs.len()).filter(|&i| !vecs[i].1.is_zero()).collect();
        if live.len() <= 1 {
            break;
        }
        let piv = *live.iter().min_by_key(|&&i| vecs[i].1.abs()).unwrap();
        let (px, py) = vecs[piv].clone();
        for &i in &live {
            if i != piv {
                let k = vecs[i].1.div_floor(&py);
                vecs[i].0 -= &px * &k;
                vecs[i].1 -= &py * &k;
            }
        }
    }
    let top = vecs.iter().position(|v| !v.1.is_zero()).unwrap();
    let (mut acc_x, mut c) = vecs[top].clone();
    if c.is_negative() {
        c = -c;
        acc_x = -acc_x;
    }
    let a_val = vecs
        .iter()
        .filter(|v| v.1.is_zero())
        .fold(BigInt::zero(), |g, v| g.gcd(&v.0));
    let a_big = a_val.abs();
    let b_big = acc_x.mod_floor(&a_big);
    // I = C·(Z (A/C) + Z (B/C + ω)).
    let a_prim: BigInt = &a_big / &c;
    let b_prim: BigInt = &b_big / &c;
    let bform: BigInt = -(b_prim * BigInt::from(2)) - BigInt::from(delta);
    let cform = (&bform * &bform - BigInt::from(d)) / (&a_prim * 4);
    selorder::classgroup::reduce(&QuadForm {
        a: a_prim,
        b: bform,
        c: cform,
    })
    .unwrap()
}

/// Monic irreducible factor degrees (distinct factors counted once) and a
/// repeated-factor flag, by exhaustive trial division over a small field.
pub fn brute_factor_degrees(k: &FiniteField, f: &[Fq]) -> (Vec<u32>, bool) {
    let mut rest: Vec<Fq> = f.to_vec();
    let mut degrees = Vec::new();
    let mut repeated = false;
    let elements: Vec<Fq> = k.elements().collect();
    let mut deg = 1;
    while rest.len() > 1 {
        if 2 * deg > rest.len() - 1 {
            degrees.push((rest.len() - 1) as u32);
            break;
        }
        for cand in monic_polys(&elements, deg) {
            if !is_irreducible_brute(k, &elements, &cand) {
                continue;
            }
            let mut count = 0;
            while let Some(qt) = exact_div(k, &rest, &cand) {
                rest = qt;
                count += 1;
            }
            if count > 0 {
                degrees.push(deg as u32);
                repeated |= count > 1;
            }
        }
        deg += 1;
    }
    degrees.sort_unstable();
    (degrees, repeated)
}

fn monic_polys(elements: &[Fq], deg: usize) -> Vec<Vec<Fq>> {
    let q = elements.len();
    let total = q.pow(deg as u32);
    (0..total)
        .map(|mut idx| {
            let mut c = Vec::with_capacity(deg + 1);
            for _ in 0..deg {
                c.push(elements[idx % q]);
                idx /= q;
            }
            c.push(
                elements
                    .iter()
                    .copied()
                    .find(|e| e.c0 == 1 && e.c1 == 0)
                    .unwrap(),
            );
            c
        })
        .collect()
}

fn is_irreducible_brute(k: &FiniteField, elements: &[Fq], f: &[Fq]) -> bool {
    let n = f.len() - 1;
    (1..=n / 2).all(|d| {
        monic_polys(elements, d)
            .iter()
            .all(|g| exact_div(k, f, g).is_none())
    })
}

/// `f / g` when `g` divides `f`; `g` monic.
pub fn exact_div(k: &FiniteField, f: &[Fq], g: &[Fq]) -> Option<Vec<Fq>> {
    let n = f.len() - 1;
    let m = g.len() - 1;
    if m > n {
        return None;
    }
    let mut r = f.to_vec();
    let mut quo = vec![Fq::ZERO; n - m + 1];
    for i in (0..=n - m).rev() {
        let c = r[i + m];
        quo[i] = c;
        for j in 0..=m {
            r[i + j] = k.sub(r[i + j], k.mul(c, g[j]));
        }
    }
    r[..m].iter().all(|x| x.is_zero()).then_some(quo)
}

/// `(u1 + v1 ω)(u2 + v2 ω)` in `O_K`, with `ω^2 = δω - n`.
pub fn ok_mul(d: i64, a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    let delta = d.rem_euclid(2);
    let n = (delta - d) / 4;
    let yy = a.1 * b.1;
    (a.0 * b.0 - n * yy, a.0 * b.1 + a.1 * b.0 + delta * yy)
}

pub fn ok_add(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 + b.0, a.1 + b.1)
}

pub fn ok_scale(k: i64, a: (i64, i64)) -> (i64, i64) {
    (k * a.0, k * a.1)
}

/// `disc(x^3 + a x^2 + b x + c) = a²b² − 4b³ − 4a³c − 27c² + 18abc` over `O_K`.
pub fn cubic_discriminant(d: i64, a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> (i64, i64) {
    let m = |x, y| ok_mul(d, x, y);
    let a2 = m(a, a);
    let b2 = m(b, b);
    let terms = [
        m(a2, b2),
        ok_scale(-4, m(b2, b)),
        ok_scale(-4, m(m(a2, a), c)),
        ok_scale(-27, m(c, c)),
        ok_scale(18, m(m(a, b), c)),
    ];
    terms.into_iter().fold((0, 0), ok_add)
}

/// `v_ν(u + vω)` from membership in `ν^k = (ℓ^k, ω − r_k)`, where `r_k` is
/// the root of `x^2 − δx + n` mod `ℓ^k` lifting `r`.
pub fn split_valuation_by_ideals(d: i64, ell: u64, r: u64, u: i64, v: i64) -> u32 {
    let delta = d.rem_euclid(2) as i128;
    let n = ((delta as i64 - d) / 4) as i128;
    let (u, v) = (u as i128, v as i128);
    let ell = ell as i128;
    let mut k = 1u32;
    let mut modulus = ell;
    let mut root = r as i128;
    loop {
        if (u + v * root).rem_euclid(modulus) != 0 {
            return k - 1;
        }
        // Lift the root one step by search.
        let next = modulus * ell;
        root = (0..ell)
            .map(|j| root + j * modulus)
            .find(|&x| (x * x - delta * x + n).rem_euclid(next) == 0)
            .expect("simple root lifts");
        modulus = next;
        k += 1;
    }
}

/// A random nonzero element of `O_K` whose norm has only split prime factors.
pub fn split_supported<R: Rng>(rng: &mut R, k: &QuadField, d: i64) -> OkElement {
    loop {
        let x = OkElement::new(rng.gen_range(-30i64..=30), rng.gen_range(-30i64..=30));
        if x.is_zero() {
            continue;
        }
        let n = k.norm(&x);
        let fac = factor(&n).unwrap();
        if fac.iter().all(|&(l, _)| kronecker(d, l) == 1) {
            return x;
        }
    }
}

pub fn global_diagonal_dev(xs: &[OkElement], d: i64, p: usize) -> DeviationData {
    let k = QuadField::new(d).unwrap();
    let mut dev = DeviationData::empty(p);
    let mut ells: Vec<u64> = xs
        .iter()
        .flat_map(|x| factor(&k.norm(x)).unwrap().into_iter().map(|(l, _)| l))
        .collect();
    ells.sort_unstable();
    ells.dedup();
    for l in ells {
        for which in 0..2 {
            let nu = prime_of_k(l, d, which).unwrap();
            assert_eq!(nu.kind(), PrimeKind::Split);
            let a: Vec<i64> = xs
                .iter()
                .map(|x| prime_valuation(&nu, x).unwrap() as i64)
                .collect();
            let v = vertex_from_coords(&ApartmentFrame::standard(p, l), &a).unwrap();
            dev.insert(nu, v).unwrap();
        }
    }
    dev
}
