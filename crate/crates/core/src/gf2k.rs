//! GF(2^16) arithmetic for specialization certificates.
//!
//! Classifying a place needs an irreducibility proof. A cheap sound
//! certificate: specialize the ground variables into GF(2^16) and test the
//! resulting univariate polynomial. A monic factorization over the ground
//! field would specialize degree-for-degree, so an irreducible specialization
//! proves the original irreducible. This module supplies the finite-field
//! side: field ops on u16 and the standard irreducibility test over GF(q).

/// x^16 + x^5 + x^3 + x^2 + 1, irreducible over GF(2) (checked in tests).
const MODULUS: u32 = 0x1002D;

pub fn gf_mul(a: u16, b: u16) -> u16 {
    let mut acc: u32 = 0;
    let mut a = a as u32;
    let mut b = b as u32;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a <<= 1;
        if a & 0x10000 != 0 {
            a ^= MODULUS;
        }
        b >>= 1;
    }
    acc as u16
}

pub fn gf_pow(mut a: u16, mut e: u32) -> u16 {
    let mut acc: u16 = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = gf_mul(acc, a);
        }
        a = gf_mul(a, a);
        e >>= 1;
    }
    acc
}

pub fn gf_inv(a: u16) -> u16 {
    assert!(a != 0, "inverting zero in GF(2^16)");
    // a^(2^16 - 2)
    gf_pow(a, 0xFFFE)
}

/// Polynomials over GF(2^16) as coefficient vectors, low degree first.
type GPoly = Vec<u16>;

fn gtrim(p: &mut GPoly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn gdeg(p: &GPoly) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

fn gadd(a: &GPoly, b: &GPoly) -> GPoly {
    let mut out = vec![0u16; a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] ^= c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] ^= c;
    }
    gtrim(&mut out);
    out
}

fn gmul(a: &GPoly, b: &GPoly) -> GPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u16; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] ^= gf_mul(*x, *y);
        }
    }
    gtrim(&mut out);
    out
}

fn grem(a: &GPoly, m: &GPoly) -> GPoly {
    let dm = gdeg(m).expect("nonzero modulus");
    let lead_inv = gf_inv(m[dm]);
    let mut r = a.clone();
    gtrim(&mut r);
    while let Some(dr) = gdeg(&r) {
        if dr < dm {
            break;
        }
        let c = gf_mul(r[dr], lead_inv);
        for (j, y) in m.iter().enumerate() {
            r[dr - dm + j] ^= gf_mul(c, *y);
        }
        gtrim(&mut r);
    }
    r
}

fn ggcd(a: &GPoly, b: &GPoly) -> GPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    gtrim(&mut a);
    gtrim(&mut b);
    while !b.is_empty() {
        let r = grem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Whether two nonzero univariate polynomials over GF(2^16) have a constant
/// gcd. Zero inputs report false so callers fall back to an exact path.
pub(crate) fn gf_gcd_is_constant(a: &[u16], b: &[u16]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    gtrim(&mut a);
    gtrim(&mut b);
    if a.is_empty() || b.is_empty() {
        return false;
    }
    ggcd(&a, &b).len() == 1
}

/// h^(2^16) mod m via 16 modular squarings.
fn gfrob(h: &GPoly, m: &GPoly) -> GPoly {
    let mut h = h.clone();
    for _ in 0..16 {
        h = grem(&gmul(&h, &h), m);
    }
    h
}

/// Irreducibility of a monic univariate polynomial over GF(2^16): the classic
/// test x^(q^n) = x mod f plus gcd(x^(q^(n/l)) - x, f) = 1 for primes l | n.
pub fn gf2k_irreducible(coeffs: &[u16]) -> bool {
    let mut f: GPoly = coeffs.to_vec();
    gtrim(&mut f);
    let n = match gdeg(&f) {
        Some(0) | None => return false,
        Some(n) => n,
    };
    if n == 1 {
        return true;
    }
    let x: GPoly = vec![0, 1];
    // Frobenius powers of x: pow[k] = x^(q^k) mod f.
    let mut h = grem(&x, &f);
    let mut powers = vec![h.clone()];
    for _ in 0..n {
        h = gfrob(&h, &f);
        powers.push(h.clone());
    }
    if gadd(&powers[n], &x) != Vec::<u16>::new() {
        return false;
    }
    let mut primes = Vec::new();
    let mut m = n;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            primes.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for l in primes {
        let g = ggcd(&gadd(&powers[n / l], &x), &f);
        if gdeg(&g) != Some(0) {
            return false;
        }
    }
    true
}
