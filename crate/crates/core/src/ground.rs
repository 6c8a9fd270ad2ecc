//! Exact arithmetic in rational function towers F2(t1,...,tK).
//!
//! A tower field element is a reduced fraction of multivariate GF(2)
//! polynomials. Since the only coefficient is 1, a polynomial is just the set
//! of its monomials and addition is symmetric difference. The two operations
//! the rest of the crate leans on hardest are `frobenius_decompose` (write an
//! element as sum of square-free monomials times squares, the 2-basis
//! decomposition with respect to {t1,...,tK}) and `partial_derivative` (the
//! derivations dual to that 2-basis).

use crate::index::IndexSet;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

/// Exponent vector with trailing zeros trimmed, ordered graded-lex.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(Vec<u32>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        let mut v = vec![0; i + 1];
        v[i] = 1;
        Mono(v)
    }

    pub fn from_exps(exps: &[u32]) -> Self {
        let mut v = exps.to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        Mono(v)
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars_hint(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let n = self.0.len().max(other.0.len());
        let v: Vec<u32> = (0..n).map(|i| self.exp(i) + other.exp(i)).collect();
        Mono(v)
    }

    /// Componentwise quotient, if `other` divides `self`.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        if other.0.len() > self.0.len() {
            return None;
        }
        let mut v = self.0.clone();
        for (i, e) in other.0.iter().enumerate() {
            if v[i] < *e {
                return None;
            }
            v[i] -= e;
        }
        Some(Mono::from_exps(&v))
    }

    /// Square-free pattern (vars with odd exponent) and the halved remainder.
    pub fn parity_split(&self) -> (IndexSet, Mono) {
        let pattern: IndexSet = (0..self.0.len()).filter(|&i| self.0[i] % 2 == 1).collect();
        let half: Vec<u32> = self.0.iter().map(|e| e / 2).collect();
        (pattern, Mono::from_exps(&half))
    }

    pub fn is_square(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }

    pub fn sqrt(&self) -> Option<Mono> {
        if !self.is_square() {
            return None;
        }
        Some(Mono::from_exps(
            &self.0.iter().map(|e| e / 2).collect::<Vec<_>>(),
        ))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let n = self.0.len().max(other.0.len());
        for i in 0..n {
            match self.exp(i).cmp(&other.exp(i)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial over GF(2): the set of monomials with coefficient 1.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyF2 {
    terms: BTreeSet<Mono>,
}

impl PolyF2 {
    pub fn zero() -> Self {
        PolyF2 {
            terms: BTreeSet::new(),
        }
    }

    pub fn one() -> Self {
        PolyF2 {
            terms: [Mono::one()].into_iter().collect(),
        }
    }

    pub fn var(i: usize) -> Self {
        PolyF2 {
            terms: [Mono::var(i)].into_iter().collect(),
        }
    }

    pub fn from_mono(m: Mono) -> Self {
        PolyF2 {
            terms: [m].into_iter().collect(),
        }
    }

    pub fn from_monos<I: IntoIterator<Item = Mono>>(it: I) -> Self {
        let mut p = PolyF2::zero();
        for m in it {
            p.toggle(m);
        }
        p
    }

    fn toggle(&mut self, m: Mono) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.contains(&Mono::one())
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || self.is_one()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Mono> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn leading(&self) -> Option<&Mono> {
        self.terms.iter().next_back()
    }

    pub fn nvars_hint(&self) -> usize {
        self.terms.iter().map(|m| m.nvars_hint()).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    pub fn deg_var(&self, i: usize) -> u32 {
        self.terms.iter().map(|m| m.exp(i)).max().unwrap_or(0)
    }

    pub fn add(&self, other: &PolyF2) -> PolyF2 {
        let terms = self
            .terms
            .symmetric_difference(&other.terms)
            .cloned()
            .collect();
        PolyF2 { terms }
    }

    pub fn mul(&self, other: &PolyF2) -> PolyF2 {
        let mut out = PolyF2::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.toggle(a.mul(b));
            }
        }
        out
    }

    pub fn mul_mono(&self, m: &Mono) -> PolyF2 {
        PolyF2 {
            terms: self.terms.iter().map(|t| t.mul(m)).collect(),
        }
    }

    pub fn square(&self) -> PolyF2 {
        // Frobenius: squaring maps each monomial to its square, no cross terms.
        PolyF2 {
            terms: self.terms.iter().map(|m| m.mul(m)).collect(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.terms.iter().all(|m| m.is_square())
    }

    pub fn sqrt(&self) -> Option<PolyF2> {
        let mut terms = BTreeSet::new();
        for m in &self.terms {
            terms.insert(m.sqrt()?);
        }
        Some(PolyF2 { terms })
    }

    /// d/dt_i: monomials with odd exponent at `i` drop one power, the rest die.
    pub fn partial(&self, i: usize) -> PolyF2 {
        let mut out = PolyF2::zero();
        for m in &self.terms {
            if m.exp(i) % 2 == 1 {
                let mut v: Vec<u32> = (0..m.nvars_hint()).map(|k| m.exp(k)).collect();
                v[i] -= 1;
                out.toggle(Mono::from_exps(&v));
            }
        }
        out
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn exact_div(&self, other: &PolyF2) -> Option<PolyF2> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(PolyF2::zero());
        }
        let lead_d = other.leading().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = PolyF2::zero();
        while !rem.is_zero() {
            let lead_r = rem.leading().unwrap().clone();
            let q = lead_r.div(&lead_d)?;
            quot.toggle(q.clone());
            rem = rem.add(&other.mul_mono(&q));
        }
        Some(quot)
    }

    /// Evaluates in GF(2^16); `vals[i]` is the image of t_i.
    pub fn eval_gf2k(&self, vals: &[u16]) -> u16 {
        use crate::gf2k::{gf_mul, gf_pow};
        let mut acc: u16 = 0;
        for m in &self.terms {
            let mut prod: u16 = 1;
            for i in 0..m.nvars_hint() {
                let e = m.exp(i);
                if e > 0 {
                    prod = gf_mul(prod, gf_pow(vals[i], e));
                }
            }
            acc ^= prod;
        }
        acc
    }

    fn main_var(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|m| (0..m.nvars_hint()).filter(move |&i| m.exp(i) > 0))
            .max()
    }

    /// Coefficients of powers of `v`, as polynomials in the other variables.
    fn coeffs_wrt(&self, v: usize) -> Vec<PolyF2> {
        let d = self.deg_var(v) as usize;
        let mut out = vec![PolyF2::zero(); d + 1];
        for m in &self.terms {
            let e = m.exp(v) as usize;
            let mut rest: Vec<u32> = (0..m.nvars_hint()).map(|k| m.exp(k)).collect();
            if v < rest.len() {
                rest[v] = 0;
            }
            out[e].toggle(Mono::from_exps(&rest));
        }
        out
    }

    fn content_wrt(&self, v: usize) -> PolyF2 {
        let mut c = PolyF2::zero();
        for coeff in self.coeffs_wrt(v) {
            if !coeff.is_zero() {
                c = gcd(&c, &coeff);
            }
        }
        c
    }

    /// Collapses to a univariate polynomial in `v` by sending every other
    /// variable to its image in GF(2^16).
    fn eval_univariate_gf2k(&self, v: usize, vals: &[u16]) -> Vec<u16> {
        use crate::gf2k::{gf_mul, gf_pow};
        let mut out = vec![0u16; self.deg_var(v) as usize + 1];
        for m in &self.terms {
            let mut prod: u16 = 1;
            for i in 0..m.nvars_hint() {
                let e = m.exp(i);
                if i != v && e > 0 {
                    prod = gf_mul(prod, gf_pow(vals[i], e));
                }
            }
            out[m.exp(v) as usize] ^= prod;
        }
        out
    }

    /// Pseudo-remainder of `self` by `other` in the variable `v`.
    fn prem_wrt(&self, other: &PolyF2, v: usize) -> PolyF2 {
        let db = other.deg_var(v);
        let lead_b = other.coeffs_wrt(v)[db as usize].clone();
        let mut r = self.clone();
        while !r.is_zero() && r.deg_var(v) >= db {
            let dr = r.deg_var(v);
            let lead_r = r.coeffs_wrt(v)[dr as usize].clone();
            let mut shift = vec![0u32; v + 1];
            shift[v] = dr - db;
            // lc(b)*r + lc(r)*v^(dr-db)*b kills the leading term of r.
            r = lead_b
                .mul(&r)
                .add(&lead_r.mul(&other.mul_mono(&Mono::from_exps(&shift))));
        }
        r
    }
}

fn coprime_by_specialization(a: &PolyF2, b: &PolyF2, v: usize) -> bool {
    let nv = a.nvars_hint().max(b.nvars_hint()).max(v + 1);
    let da = a.deg_var(v) as usize;
    let db = b.deg_var(v) as usize;
    let mut state: u64 = 0x243F_6A88_85A3_08D3;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 16) as u16
    };
    for _ in 0..6 {
        let vals: Vec<u16> = (0..nv).map(|_| next()).collect();
        let ea = a.eval_univariate_gf2k(v, &vals);
        let eb = b.eval_univariate_gf2k(v, &vals);
        // A vanished leading coefficient could hide a common factor whose
        // image dropped degree; such points prove nothing either way.
        if ea[da] == 0 || eb[db] == 0 {
            continue;
        }
        if crate::gf2k::gf_gcd_is_constant(&ea, &eb) {
            return true;
        }
    }
    false
}

/// Polynomial gcd by primitive pseudo-remainder sequences, recursing on the
/// highest variable present, with a sound GF(2^16) specialization shortcut
/// certifying the coprime case. Over GF(2) there are no units to normalize.
pub fn gcd(f: &PolyF2, g: &PolyF2) -> PolyF2 {
    if f.is_zero() {
        return g.clone();
    }
    if g.is_zero() {
        return f.clone();
    }
    let v = match f.main_var().into_iter().chain(g.main_var()).max() {
        Some(v) => v,
        None => return PolyF2::one(),
    };
    let cf = f.content_wrt(v);
    let cg = g.content_wrt(v);
    let c = gcd(&cf, &cg);
    let mut a = f.exact_div(&cf).expect("content divides");
    let mut b = g.exact_div(&cg).expect("content divides");
    if a.deg_var(v) < b.deg_var(v) {
        std::mem::swap(&mut a, &mut b);
    }
    // Specialization shortcut: a constant univariate gcd at a point where
    // neither leading coefficient vanishes proves the primitive parts are
    // coprime, because a common factor of positive v-degree would keep
    // positive degree under any such evaluation. This skips the remainder
    // sequence, whose coefficients can swell badly, on the common case.
    if coprime_by_specialization(&a, &b, v) {
        return c;
    }
    loop {
        if b.deg_var(v) == 0 {
            // b is primitive of degree 0 in v, so the primitive-part gcd is 1.
            return c;
        }
        let r = a.prem_wrt(&b, v);
        if r.is_zero() {
            let pp = b
                .exact_div(&b.content_wrt(v))
                .expect("content divides");
            return c.mul(&pp);
        }
        a = b;
        b = r.exact_div(&r.content_wrt(v)).expect("content divides");
    }
}

impl fmt::Debug for PolyF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", poly_text(self, &VarCtx::ground(self.nvars_hint())))
    }
}

/// Element of F2(t1,...,tK): a fraction num/den with gcd(num, den) = 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroundElem {
    num: PolyF2,
    den: PolyF2,
}

impl GroundElem {
    pub fn from_frac(num: PolyF2, den: PolyF2) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return GroundElem {
                num,
                den: PolyF2::one(),
            };
        }
        let g = gcd(&num, &den);
        GroundElem {
            num: num.exact_div(&g).expect("gcd divides"),
            den: den.exact_div(&g).expect("gcd divides"),
        }
    }

    pub fn from_poly(p: PolyF2) -> Self {
        GroundElem {
            num: p,
            den: PolyF2::one(),
        }
    }

    pub fn zero() -> Self {
        GroundElem::from_poly(PolyF2::zero())
    }

    pub fn one() -> Self {
        GroundElem::from_poly(PolyF2::one())
    }

    pub fn var(i: usize) -> Self {
        GroundElem::from_poly(PolyF2::var(i))
    }

    pub fn num(&self) -> &PolyF2 {
        &self.num
    }

    pub fn den(&self) -> &PolyF2 {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn nvars_hint(&self) -> usize {
        self.num.nvars_hint().max(self.den.nvars_hint())
    }

    pub fn add(&self, other: &GroundElem) -> GroundElem {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        GroundElem::from_frac(num, den)
    }

    pub fn mul(&self, other: &GroundElem) -> GroundElem {
        GroundElem::from_frac(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn inv(&self) -> GroundElem {
        assert!(!self.is_zero(), "inverting zero");
        GroundElem {
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    pub fn div(&self, other: &GroundElem) -> GroundElem {
        self.mul(&other.inv())
    }

    pub fn square(&self) -> GroundElem {
        GroundElem {
            num: self.num.square(),
            den: self.den.square(),
        }
    }

    pub fn pow(&self, e: u32) -> GroundElem {
        let mut acc = GroundElem::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Square root when the element is a square. A reduced fraction is a
    /// square iff numerator and denominator are, since GF(2)[t] is a UFD.
    pub fn sqrt(&self) -> Option<GroundElem> {
        Some(GroundElem {
            num: self.num.sqrt()?,
            den: self.den.sqrt()?,
        })
    }

    /// Writes `self = sum_J t^J a_J^2` over square-free patterns J; returns
    /// the map J -> a_J. Implements a/b = a*b/b^2 and splits each monomial of
    /// a*b as t^(e mod 2) * (t^(e div 2))^2.
    pub fn frobenius_decompose(&self) -> std::collections::BTreeMap<IndexSet, GroundElem> {
        let mut parts: std::collections::BTreeMap<IndexSet, PolyF2> =
            std::collections::BTreeMap::new();
        let nd = self.num.mul(&self.den);
        for m in nd.terms() {
            let (pattern, half) = m.parity_split();
            parts.entry(pattern).or_insert_with(PolyF2::zero).toggle(half);
        }
        parts
            .into_iter()
            .filter(|(_, s)| !s.is_zero())
            .map(|(j, s)| (j, GroundElem::from_frac(s, self.den.clone())))
            .collect()
    }

    /// The derivation d/dt_i dual to the 2-basis {t1,...,tK}.
    pub fn partial_derivative(&self, i: usize) -> GroundElem {
        let num = self
            .num
            .partial(i)
            .mul(&self.den)
            .add(&self.num.mul(&self.den.partial(i)));
        GroundElem::from_frac(num, self.den.square())
    }

    /// dlog coefficient of t_i: t_i * (da/dt_i) / a.
    pub fn dlog_coeff(&self, i: usize) -> GroundElem {
        assert!(!self.is_zero(), "dlog of zero");
        self.partial_derivative(i)
            .mul(&GroundElem::var(i))
            .div(self)
    }
}

impl fmt::Debug for GroundElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

/// Names tower variables for text output: `t1..tK`, with the top variable of
/// the full function field written `x`.
#[derive(Clone, Copy, Debug)]
pub struct VarCtx {
    pub nvars: usize,
    pub top_is_x: bool,
}

impl VarCtx {
    pub fn ground(nvars: usize) -> Self {
        VarCtx {
            nvars,
            top_is_x: false,
        }
    }

    pub fn with_x(nvars: usize) -> Self {
        VarCtx {
            nvars,
            top_is_x: true,
        }
    }

    pub fn name(&self, i: usize) -> String {
        if self.top_is_x && i + 1 == self.nvars {
            "x".to_string()
        } else {
            format!("t{}", i + 1)
        }
    }
}

pub fn mono_text(m: &Mono, ctx: &VarCtx) -> String {
    let mut parts = Vec::new();
    for i in 0..m.nvars_hint() {
        let e = m.exp(i);
        if e == 1 {
            parts.push(ctx.name(i));
        } else if e > 1 {
            parts.push(format!("{}^{}", ctx.name(i), e));
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

pub fn poly_text(p: &PolyF2, ctx: &VarCtx) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<&Mono> = p.terms().collect();
    terms.reverse();
    terms
        .iter()
        .map(|m| mono_text(m, ctx))
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn elem_text(a: &GroundElem, ctx: &VarCtx) -> String {
    if a.den().is_one() {
        poly_text(a.num(), ctx)
    } else {
        let n = poly_text(a.num(), ctx);
        let d = poly_text(a.den(), ctx);
        let n = if a.num().term_count() > 1 {
            format!("({})", n)
        } else {
            n
        };
        format!("{}/({})", n, d)
    }
}
