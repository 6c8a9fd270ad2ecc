//! Univariate polynomials over the ground field, places, and their data.
//!
//! A place of F2(t1,...,tK)(x) is either a monic irreducible p in x or the
//! degree valuation 1/x. `FinitePlace` carries everything the local theory
//! asks of p: degree, separability, the distinguished index i' in the
//! inseparable case, the square decomposition p = sum t^J g_J(x)^2 behind it,
//! and the memoized gamma sequence driving the transfer formulas.

use crate::gf2k::gf2k_irreducible;
use crate::ground::{GroundElem, Mono, PolyF2, VarCtx};
use crate::index::IndexSet;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

/// Polynomial in x with coefficients in F2(t1,...,tK), sparse by exponent.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UPoly {
    coeffs: BTreeMap<usize, GroundElem>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly::default()
    }

    pub fn one() -> Self {
        UPoly::constant(GroundElem::one())
    }

    pub fn x() -> Self {
        UPoly::monomial(1, GroundElem::one())
    }

    pub fn constant(c: GroundElem) -> Self {
        UPoly::monomial(0, c)
    }

    pub fn monomial(e: usize, c: GroundElem) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(e, c);
        }
        UPoly { coeffs }
    }

    pub fn from_coeffs<I: IntoIterator<Item = (usize, GroundElem)>>(it: I) -> Self {
        let mut p = UPoly::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: usize, c: GroundElem) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.remove(&e) {
            None => {
                self.coeffs.insert(e, c);
            }
            Some(old) => {
                let s = old.add(&c);
                if !s.is_zero() {
                    self.coeffs.insert(e, s);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, e: usize) -> GroundElem {
        self.coeffs.get(&e).cloned().unwrap_or_else(GroundElem::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &GroundElem)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn leading_coeff(&self) -> GroundElem {
        self.degree().map(|d| self.coeff(d)).unwrap_or_else(GroundElem::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_one()
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &GroundElem) -> UPoly {
        if c.is_zero() {
            return UPoly::zero();
        }
        UPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, a)| (*e, a.mul(c)))
                .collect(),
        }
    }

    pub fn mul_xpow(&self, k: usize) -> UPoly {
        UPoly {
            coeffs: self.coeffs.iter().map(|(e, a)| (e + k, a.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        let mut out = UPoly::zero();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                out.add_term(e1 + e2, c1.mul(c2));
            }
        }
        out
    }

    pub fn square(&self) -> UPoly {
        UPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (2 * e, c.square()))
                .collect(),
        }
    }

    pub fn pow(&self, e: usize) -> UPoly {
        let mut acc = UPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn divmod(&self, div: &UPoly) -> (UPoly, UPoly) {
        let dd = div.degree().expect("division by zero polynomial");
        let lead_inv = div.leading_coeff().inv();
        let mut rem = self.clone();
        let mut quot = UPoly::zero();
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let c = rem.coeff(dr).mul(&lead_inv);
            quot.add_term(dr - dd, c.clone());
            rem = rem.add(&div.scale(&c).mul_xpow(dr - dd));
        }
        (quot, rem)
    }

    pub fn rem(&self, div: &UPoly) -> UPoly {
        self.divmod(div).1
    }

    /// Multiplicity of `p` in `self` (0 if coprime; panics on self = 0).
    pub fn valuation(&self, p: &UPoly) -> usize {
        assert!(!self.is_zero(), "valuation of zero");
        let mut v = 0;
        let mut h = self.clone();
        loop {
            let (q, r) = h.divmod(p);
            if r.is_zero() {
                v += 1;
                h = q;
            } else {
                return v;
            }
        }
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if !a.is_zero() && !a.leading_coeff().is_one() {
            let s = a.leading_coeff().inv();
            a = a.scale(&s);
        }
        a
    }

    /// Extended Euclid: returns (g, u, v) with u*self + v*other = g, g monic.
    pub fn egcd(&self, other: &UPoly) -> (UPoly, UPoly, UPoly) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut u0, mut u1) = (UPoly::one(), UPoly::zero());
        let (mut v0, mut v1) = (UPoly::zero(), UPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1);
            let nu = u0.add(&q.mul(&u1));
            let nv = v0.add(&q.mul(&v1));
            r0 = r1;
            r1 = r;
            u0 = u1;
            u1 = nu;
            v0 = v1;
            v1 = nv;
        }
        if !r0.is_zero() && !r0.leading_coeff().is_one() {
            let s = r0.leading_coeff().inv();
            r0 = r0.scale(&s);
            u0 = u0.scale(&s);
            v0 = v0.scale(&s);
        }
        (r0, u0, v0)
    }

    /// Inverse of `self` modulo `m`, which must be coprime.
    pub fn inv_mod(&self, m: &UPoly) -> UPoly {
        let (g, u, _) = self.egcd(m);
        assert_eq!(g.degree(), Some(0), "inv_mod of non-coprime element");
        u.scale(&g.coeff(0).inv()).rem(m)
    }

    /// d/dx.
    pub fn derivative_x(&self) -> UPoly {
        let mut out = UPoly::zero();
        for (e, c) in &self.coeffs {
            if e % 2 == 1 {
                out.add_term(e - 1, c.clone());
            }
        }
        out
    }

    /// Coefficient-wise d/dt_i.
    pub fn partial_t(&self, i: usize) -> UPoly {
        let mut out = UPoly::zero();
        for (e, c) in &self.coeffs {
            out.add_term(*e, c.partial_derivative(i));
        }
        out
    }

    /// Splits h = A(x^2) + x*B(x^2); returns (A, B) in the variable y = x^2,
    /// that is, h = A.compose_x2() + x * B.compose_x2().
    pub fn x_parity_split(&self) -> (UPoly, UPoly) {
        let mut even = UPoly::zero();
        let mut odd = UPoly::zero();
        for (e, c) in &self.coeffs {
            if e % 2 == 0 {
                even.add_term(e / 2, c.clone());
            } else {
                odd.add_term((e - 1) / 2, c.clone());
            }
        }
        (even, odd)
    }

    /// A(y) -> A(x^2).
    pub fn compose_x2(&self) -> UPoly {
        UPoly {
            coeffs: self.coeffs.iter().map(|(e, c)| (2 * e, c.clone())).collect(),
        }
    }

    pub fn eval(&self, at: &GroundElem) -> GroundElem {
        let mut acc = GroundElem::zero();
        // Horner from the top.
        let d = match self.degree() {
            None => return acc,
            Some(d) => d,
        };
        for e in (0..=d).rev() {
            acc = acc.mul(at).add(&self.coeff(e));
        }
        acc
    }

    pub fn text(&self, ground_vars: usize) -> String {
        upoly_text(self, ground_vars)
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", upoly_text(self, 0))
    }
}

pub fn upoly_text(p: &UPoly, ground_vars: usize) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let ctx = VarCtx::ground(ground_vars.max(
        p.coeffs().map(|(_, c)| c.nvars_hint()).max().unwrap_or(0),
    ));
    let mut parts = Vec::new();
    for (e, c) in p.coeffs.iter().rev() {
        let xs = match e {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{}", e),
        };
        let cs = crate::ground::elem_text(c, &ctx);
        let part = if xs.is_empty() {
            cs
        } else if c.is_one() {
            xs
        } else if c.is_polynomial() && c.num().term_count() == 1 {
            format!("{}*{}", cs, xs)
        } else {
            format!("({})*{}", cs, xs)
        };
        parts.push(part);
    }
    parts.join(" + ")
}

/// Conversion: an element of F2(t1,...,tK,x) viewed as num/den in x over the
/// ground field with K variables. `xvar` is the variable index playing x.
pub fn elem_to_ratx(e: &GroundElem, xvar: usize) -> (UPoly, UPoly) {
    (poly_to_upoly(e.num(), xvar), poly_to_upoly(e.den(), xvar))
}

pub fn poly_to_upoly(p: &PolyF2, xvar: usize) -> UPoly {
    let mut out = UPoly::zero();
    for m in p.terms() {
        let e = m.exp(xvar) as usize;
        let mut rest: Vec<u32> = (0..m.nvars_hint().max(xvar + 1)).map(|k| m.exp(k)).collect();
        rest[xvar] = 0;
        out.add_term(
            e,
            GroundElem::from_poly(PolyF2::from_mono(Mono::from_exps(&rest))),
        );
    }
    out
}

/// Reassembles a rational function of x into a tower element, x = var `xvar`.
pub fn ratx_to_elem(num: &UPoly, den: &UPoly, xvar: usize) -> GroundElem {
    upoly_to_elem(num, xvar).div(&upoly_to_elem(den, xvar))
}

pub fn upoly_to_elem(p: &UPoly, xvar: usize) -> GroundElem {
    let x = GroundElem::var(xvar);
    let mut acc = GroundElem::zero();
    for (e, c) in p.coeffs() {
        acc = acc.add(&c.mul(&x.pow(e as u32)));
    }
    acc
}

/// How an irreducibility verdict was reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IrredCert {
    Degree1,
    /// Some GF(2^16) specialization of the coefficients is irreducible.
    Specialization { tries: usize },
    /// The bounded factor enumeration completed with no factor found.
    ExhaustiveSearch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaceVerdict {
    Irreducible(IrredCert),
    /// A proper monic factor, as evidence.
    Reducible(UPoly),
    Inconclusive,
}

/// Everything the local theory needs to know about a finite place.
pub struct FinitePlace {
    pub poly: UPoly,
    pub degree: usize,
    pub ground_vars: usize,
    pub separable: bool,
    /// In the inseparable case, the 0-based ground variable i' whose dt is
    /// dependent on the others in the residue field.
    pub insep_index: Option<usize>,
    /// The square decomposition p = sum_J t^J g_J(x)^2 (inseparable case
    /// only; J runs over square-free ground patterns).
    pub square_parts: BTreeMap<IndexSet, UPoly>,
    gammas: Mutex<Vec<GroundElem>>,
}

impl PartialEq for FinitePlace {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly
    }
}
impl Eq for FinitePlace {}

impl fmt::Debug for FinitePlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "place({})", self.poly.text(self.ground_vars))
    }
}

impl FinitePlace {
    /// Builds the place data for a monic polynomial assumed irreducible.
    /// Use `classify_place` first when irreducibility is in question.
    pub fn new(poly: UPoly, ground_vars: usize) -> crate::Result<Arc<FinitePlace>> {
        if !poly.is_monic() {
            return Err(crate::Error::BadPlace(format!(
                "not monic: {}",
                poly.text(ground_vars)
            )));
        }
        let degree = poly.degree().unwrap();
        if degree == 0 {
            return Err(crate::Error::BadPlace("constant polynomial".into()));
        }
        let separable = !poly.derivative_x().is_zero();
        let mut square_parts = BTreeMap::new();
        let mut insep_index = None;
        if !separable {
            // p lies in F[x^2]; collect p = sum_J t^J g_J(x)^2.
            let mut parts: BTreeMap<IndexSet, UPoly> = BTreeMap::new();
            for (e, c) in poly.coeffs() {
                debug_assert!(e % 2 == 0);
                for (j, a) in c.frobenius_decompose() {
                    parts
                        .entry(j)
                        .or_insert_with(UPoly::zero)
                        .add_term(e / 2, a);
                }
            }
            parts.retain(|_, g| !g.is_zero());
            // i' = smallest i with D_i = sum_{J containing i} t^(J\i) g_J^2
            // nonzero mod p; equivalently dt_i is dependent in the residue
            // field. Existence is part of p being irreducible inseparable.
            'outer: for i in 0..ground_vars {
                let mut di = UPoly::zero();
                for (j, g) in &parts {
                    if j.contains(i) {
                        let tmono = ground_monomial(&j.remove(i));
                        di = di.add(&g.square().scale(&tmono));
                    }
                }
                if !di.rem(&poly).is_zero() {
                    insep_index = Some(i);
                    break 'outer;
                }
            }
            if insep_index.is_none() {
                return Err(crate::Error::BadPlace(format!(
                    "inseparable polynomial with no admissible index (reducible?): {}",
                    poly.text(ground_vars)
                )));
            }
            square_parts = parts;
        }
        Ok(Arc::new(FinitePlace {
            poly,
            degree,
            ground_vars,
            separable,
            insep_index,
            square_parts,
            gammas: Mutex::new(vec![GroundElem::one()]),
        }))
    }

    /// p_i = coefficient of x^(d-i), so p_0 = 1 and p_d is the constant term.
    pub fn p_coeff(&self, i: usize) -> GroundElem {
        if i > self.degree {
            GroundElem::zero()
        } else {
            self.poly.coeff(self.degree - i)
        }
    }

    pub fn const_term(&self) -> GroundElem {
        self.poly.coeff(0)
    }

    /// gamma_0 = 1, gamma_i = sum_{k=1..d} gamma_{i-k} p_k. Negative indices
    /// are zero. Memoized; callers may ask for any prefix length.
    pub fn gamma(&self, i: i64) -> GroundElem {
        if i < 0 {
            return GroundElem::zero();
        }
        let i = i as usize;
        let mut memo = self.gammas.lock().unwrap();
        while memo.len() <= i {
            let n = memo.len();
            let mut acc = GroundElem::zero();
            for k in 1..=self.degree.min(n) {
                acc = acc.add(&memo[n - k].mul(&self.p_coeff(k)));
            }
            memo.push(acc);
        }
        memo[i].clone()
    }

    /// The coefficient functional: t_p(class of h) = coefficient of x^(d-1)
    /// in h mod p.
    pub fn t_p(&self, h: &UPoly) -> GroundElem {
        h.rem(&self.poly).coeff(self.degree - 1)
    }

    /// Reduction of h modulo p.
    pub fn reduce(&self, h: &UPoly) -> UPoly {
        h.rem(&self.poly)
    }
}

/// Builds the ground monomial t^J as a degree-0 polynomial in x.
pub fn ground_monomial(j: &IndexSet) -> GroundElem {
    let mut m = GroundElem::one();
    for i in j.iter() {
        m = m.mul(&GroundElem::var(i));
    }
    m
}

/// Builds the residue-basis monomial t^J where the pattern may include the
/// x-slot (inseparable places): slot values < ground_vars are ground
/// variables, the value `xslot` stands for x itself.
pub fn basis_monomial_with_x(j: &IndexSet, xslot: usize) -> UPoly {
    let mut ground = GroundElem::one();
    let mut xpow = 0usize;
    for i in j.iter() {
        if i == xslot {
            xpow += 1;
        } else {
            ground = ground.mul(&GroundElem::var(i));
        }
    }
    UPoly::monomial(xpow, ground)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceClassification {
    pub degree: usize,
    pub separable: bool,
    pub insep_index: Option<usize>,
    pub verdict: PlaceVerdict,
}

/// Decides irreducibility of a monic polynomial over F2(t1,...,tK)[x] within
/// a budget and reports the structural data of the place.
///
/// Soundness: `Irreducible(Specialization)` relies on monic factorizations
/// specializing degree-for-degree into GF(2^16); `Reducible` always carries a
/// verified factor; when neither route lands within budget the verdict is
/// `Inconclusive`, never a guess.
pub fn classify_place(
    poly: &UPoly,
    ground_vars: usize,
    budget: usize,
) -> crate::Result<PlaceClassification> {
    if !poly.is_monic() {
        return Err(crate::Error::BadPlace(format!(
            "not monic: {}",
            poly.text(ground_vars)
        )));
    }
    let d = poly.degree().unwrap();
    if d == 0 {
        return Err(crate::Error::BadPlace("constant polynomial".into()));
    }
    let separable = !poly.derivative_x().is_zero();
    let insep_index = if separable {
        None
    } else {
        match FinitePlace::new(poly.clone(), ground_vars) {
            Ok(p) => p.insep_index,
            Err(_) => None,
        }
    };

    if d == 1 {
        return Ok(PlaceClassification {
            degree: 1,
            separable: true,
            insep_index: None,
            verdict: PlaceVerdict::Irreducible(IrredCert::Degree1),
        });
    }

    // Fast certificate: specialize t_i -> GF(2^16) and test the univariate
    // polynomial. Any denominator hitting zero just burns one try.
    let mut state: u64 = 0x9E3779B97F4A7C15;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let tries = 20;
    for t in 0..tries {
        let vals: Vec<u16> = (0..ground_vars).map(|_| (next() >> 16) as u16).collect();
        let mut coeffs = vec![0u16; d + 1];
        let mut ok = true;
        for (e, c) in poly.coeffs() {
            let den = c.den().eval_gf2k(&vals);
            if den == 0 {
                ok = false;
                break;
            }
            let num = c.num().eval_gf2k(&vals);
            coeffs[e] = crate::gf2k::gf_mul(num, crate::gf2k::gf_inv(den));
        }
        if ok && gf2k_irreducible(&coeffs) {
            return Ok(PlaceClassification {
                degree: d,
                separable,
                insep_index,
                verdict: PlaceVerdict::Irreducible(IrredCert::Specialization { tries: t + 1 }),
            });
        }
    }

    // Bounded exhaustive factor search. Monic with polynomial coefficients
    // means any monic factor again has polynomial coefficients (Gauss), with
    // each t_i-degree bounded by that of p. Rational coefficients fall back
    // to Inconclusive if we reach this point.
    if poly.coeffs().all(|(_, c)| c.is_polynomial()) {
        match factor_search(poly, ground_vars, budget) {
            SearchOutcome::Factor(g) => {
                return Ok(PlaceClassification {
                    degree: d,
                    separable,
                    insep_index,
                    verdict: PlaceVerdict::Reducible(g),
                })
            }
            SearchOutcome::NoFactor => {
                return Ok(PlaceClassification {
                    degree: d,
                    separable,
                    insep_index,
                    verdict: PlaceVerdict::Irreducible(IrredCert::ExhaustiveSearch),
                })
            }
            SearchOutcome::BudgetExhausted => {}
        }
    }

    Ok(PlaceClassification {
        degree: d,
        separable,
        insep_index,
        verdict: PlaceVerdict::Inconclusive,
    })
}

enum SearchOutcome {
    Factor(UPoly),
    NoFactor,
    BudgetExhausted,
}

/// Enumerates candidate monic factors g with deg_x g <= d/2 and per-variable
/// t-degrees bounded by those of p, trial-dividing each.
fn factor_search(poly: &UPoly, ground_vars: usize, budget: usize) -> SearchOutcome {
    let d = poly.degree().unwrap();
    // Collect the monomial pool allowed in factor coefficients.
    let bounds: Vec<u32> = (0..ground_vars)
        .map(|i| {
            poly.coeffs()
                .map(|(_, c)| c.num().deg_var(i))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut pool: Vec<Mono> = Vec::new();
    let mut stack = vec![Vec::<u32>::new()];
    while let Some(cur) = stack.pop() {
        if cur.len() == ground_vars {
            pool.push(Mono::from_exps(&cur));
            continue;
        }
        for e in 0..=bounds[cur.len()] {
            let mut nxt = cur.clone();
            nxt.push(e);
            stack.push(nxt);
        }
    }
    let npool = pool.len() as u128;
    let mut used = 0usize;
    for dg in 1..=d / 2 {
        // Each of the dg lower coefficients is a subset of the pool; cap the
        // enumeration rather than materialize it.
        let per_coeff: u128 = 1u128 << npool.min(40) as u32;
        let total = per_coeff.saturating_pow(dg as u32);
        let mut idx: u128 = 0;
        while idx < total {
            if used >= budget {
                return SearchOutcome::BudgetExhausted;
            }
            used += 1;
            let mut g = UPoly::monomial(dg, GroundElem::one());
            let mut rest = idx;
            for e in 0..dg {
                let mask = rest % per_coeff;
                rest /= per_coeff;
                let mut c = PolyF2::zero();
                for (bit, m) in pool.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        c = c.add(&PolyF2::from_mono(m.clone()));
                    }
                }
                g = g.add(&UPoly::monomial(e, GroundElem::from_poly(c)));
            }
            if g.degree() == Some(dg) {
                let (_, r) = poly.divmod(&g);
                if r.is_zero() {
                    return SearchOutcome::Factor(g);
                }
            }
            idx += 1;
        }
    }
    SearchOutcome::NoFactor
}

/// A place of the rational function field: finite (monic irreducible) or the
/// place at infinity 1/x.
#[derive(Clone)]
pub enum Place {
    Finite(Arc<FinitePlace>),
    Inf,
}

impl PartialEq for Place {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Place::Inf, Place::Inf) => true,
            (Place::Finite(a), Place::Finite(b)) => a.poly == b.poly,
            _ => false,
        }
    }
}
impl Eq for Place {}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Inf => write!(f, "place(inf)"),
            Place::Finite(p) => write!(f, "{:?}", p),
        }
    }
}

impl Place {
    pub fn text(&self) -> String {
        match self {
            Place::Inf => "inf".to_string(),
            Place::Finite(p) => p.poly.text(p.ground_vars),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: usize) -> GroundElem {
        GroundElem::var(i)
    }

    fn xp_t() -> UPoly {
        // x^2 + t1
        UPoly::from_coeffs([(2, GroundElem::one()), (0, t(0))])
    }

    #[test]
    fn divmod_roundtrip() {
        let f = UPoly::from_coeffs([(5, GroundElem::one()), (2, t(0)), (0, t(0).inv())]);
        let g = xp_t();
        let (q, r) = f.divmod(&g);
        assert!(r.degree().map(|d| d < 2).unwrap_or(true));
        assert_eq!(q.mul(&g).add(&r), f);
    }

    #[test]
    fn egcd_bezout() {
        let f = xp_t();
        let g = UPoly::from_coeffs([(1, GroundElem::one()), (0, t(0))]); // x + t
        let (d, u, v) = f.egcd(&g);
        assert_eq!(u.mul(&f).add(&v.mul(&g)), d);
        assert_eq!(d.degree(), Some(0)); // coprime
    }

    #[test]
    fn inv_mod_works() {
        let p = xp_t();
        let h = UPoly::from_coeffs([(1, GroundElem::one()), (0, t(0))]);
        let hi = h.inv_mod(&p);
        assert_eq!(h.mul(&hi).rem(&p), UPoly::one());
    }

    #[test]
    fn gamma_for_x2_plus_t() {
        let p = FinitePlace::new(xp_t(), 1).unwrap();
        let expect = [
            GroundElem::one(),
            GroundElem::zero(),
            t(0),
            GroundElem::zero(),
            t(0).square(),
        ];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(&p.gamma(i as i64), e, "gamma_{}", i);
        }
    }

    #[test]
    fn gamma_for_cubic() {
        // x^3 + t*x + t: gamma = 1, 0, t, t, ...
        let p = FinitePlace::new(
            UPoly::from_coeffs([(3, GroundElem::one()), (1, t(0)), (0, t(0))]),
            1,
        )
        .unwrap();
        assert_eq!(p.gamma(0), GroundElem::one());
        assert_eq!(p.gamma(1), GroundElem::zero());
        assert_eq!(p.gamma(2), t(0));
        assert_eq!(p.gamma(3), t(0));
    }

    #[test]
    fn gamma_is_tp_of_xpower() {
        // gamma_i = coefficient of x^(d-1) in x^(d+i-1) mod p.
        let p = FinitePlace::new(
            UPoly::from_coeffs([(3, GroundElem::one()), (2, t(0)), (0, GroundElem::one())]),
            1,
        )
        .unwrap();
        for i in 0..12i64 {
            let xp = UPoly::monomial(p.degree + i as usize - 1, GroundElem::one());
            assert_eq!(p.gamma(i), p.t_p(&xp), "i={}", i);
        }
    }

    #[test]
    fn tp_functional_on_basis() {
        let p = FinitePlace::new(xp_t(), 1).unwrap();
        assert!(p.t_p(&UPoly::one()).is_zero());
        assert!(p.t_p(&UPoly::x()).is_one());
    }

    #[test]
    fn classify_degree1() {
        let g = UPoly::from_coeffs([(1, GroundElem::one()), (0, t(0))]);
        let c = classify_place(&g, 1, 10_000).unwrap();
        assert_eq!(c.verdict, PlaceVerdict::Irreducible(IrredCert::Degree1));
        assert!(c.separable);
    }

    #[test]
    fn classify_x2_plus_t_inseparable() {
        let c = classify_place(&xp_t(), 1, 10_000).unwrap();
        assert!(!c.separable);
        assert_eq!(c.insep_index, Some(0));
        assert!(matches!(c.verdict, PlaceVerdict::Irreducible(_)));
    }

    #[test]
    fn classify_finds_factor_of_square() {
        // x^2 + t^2 = (x + t)^2.
        let sq = UPoly::from_coeffs([(2, GroundElem::one()), (0, t(0).square())]);
        let c = classify_place(&sq, 1, 200_000).unwrap();
        match c.verdict {
            PlaceVerdict::Reducible(g) => {
                assert!(sq.divmod(&g).1.is_zero());
                assert!(g.degree().unwrap() >= 1);
            }
            v => panic!("expected factor, got {:?}", v),
        }
    }

    #[test]
    fn classify_separable_irreducible() {
        // x^2 + x + t is irreducible (Artin-Schreier, t not of trace form).
        let p = UPoly::from_coeffs([(2, GroundElem::one()), (1, GroundElem::one()), (0, t(0))]);
        let c = classify_place(&p, 1, 200_000).unwrap();
        assert!(matches!(c.verdict, PlaceVerdict::Irreducible(_)));
        assert!(c.separable);
    }

    #[test]
    fn insep_index_two_options() {
        // x^2 + t1*t2: both t1 and t2 are admissible; smallest wins.
        let p = UPoly::from_coeffs([(2, GroundElem::one()), (0, t(0).mul(&t(1)))]);
        let place = FinitePlace::new(p, 2).unwrap();
        assert_eq!(place.insep_index, Some(0));
    }

    #[test]
    fn square_parts_recombine() {
        let place = FinitePlace::new(xp_t(), 1).unwrap();
        let mut acc = UPoly::zero();
        for (j, g) in &place.square_parts {
            acc = acc.add(&g.square().scale(&ground_monomial(j)));
        }
        assert_eq!(acc, place.poly);
    }
}
