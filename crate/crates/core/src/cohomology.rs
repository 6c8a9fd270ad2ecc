//! Three-valued vanishing decisions for classes over F2(t1,...,tK)(x).
//!
//! `decide_zero` answers whether a class in the mod-2 cohomology of the
//! rational function field vanishes. A `Zero` verdict always carries an
//! exact certificate (eta, psi) with
//!
//!   form = d(eta) + AS(psi)
//!
//! as an identity of forms, checkable by `verify_zero_witness`. A `NonZero`
//! verdict cites sound evidence: a nonzero u/v entry of some residue, a
//! residue-field class decided nonzero at a degree-1 place or at infinity,
//! or the ground constant 1 at the bottom of the variable tower. Everything
//! else is `Unknown`; the procedure never guesses.
//!
//! The decision runs by induction on the number of variables. Viewing the
//! field as F(x) over the ground field F = F2(t1,...,tK), the class is split
//! into partial fractions over its support (the places dividing coefficient
//! denominators), each finite place is swept into local normal position with
//! every rewriting step witnessed by an explicit d- or AS-image, the
//! leftover polynomial part is swept the same way at infinity, and the
//! x-free remainder is decided recursively over F.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::forms::{dlog_expand, presentation_defect, LogForm};
use crate::ground::{GroundElem, PolyF2};
use crate::index::IndexSet;
use crate::local::{materialize, residue, W1Class};
use crate::poly::{
    basis_monomial_with_x, classify_place, elem_to_ratx, ground_monomial, ratx_to_elem,
    upoly_to_elem, FinitePlace, Place, PlaceVerdict, UPoly,
};
use crate::residue::{residue_field_decompose, slot_place, slot_x, to_ground_deg1};
use crate::Error;

/// Outcome of a vanishing decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Zero,
    NonZero,
    Unknown,
}

/// Exact certificate for a Zero verdict: form = d(eta) + AS(psi). For
/// 0-forms there is no eta and the identity degenerates to form = AS(psi).
#[derive(Clone, Debug)]
pub struct ZeroWitness {
    pub eta: Option<LogForm>,
    pub psi: LogForm,
}

impl ZeroWitness {
    fn empty(nvars: usize, degree: usize) -> Self {
        ZeroWitness {
            eta: if degree >= 1 {
                Some(LogForm::zero(nvars, degree - 1))
            } else {
                None
            },
            psi: LogForm::zero(nvars, degree),
        }
    }
}

/// A decision together with its evidence. `reason` is human-readable and
/// explains Zero verdicts only loosely; the binding evidence for Zero is the
/// witness pair.
#[derive(Clone, Debug)]
pub struct Decision {
    pub verdict: Verdict,
    pub witness: Option<ZeroWitness>,
    pub reason: String,
}

impl Decision {
    fn zero(witness: ZeroWitness, reason: impl Into<String>) -> Self {
        Decision {
            verdict: Verdict::Zero,
            witness: Some(witness),
            reason: reason.into(),
        }
    }

    fn nonzero(reason: impl Into<String>) -> Self {
        Decision {
            verdict: Verdict::NonZero,
            witness: None,
            reason: reason.into(),
        }
    }

    fn unknown(reason: impl Into<String>) -> Self {
        Decision {
            verdict: Verdict::Unknown,
            witness: None,
            reason: reason.into(),
        }
    }
}

/// Tuning knobs for the decision procedure.
#[derive(Clone, Debug)]
pub struct DecideOpts {
    /// Work budget for irreducibility certificates and factor searches.
    pub budget: usize,
}

impl Default for DecideOpts {
    fn default() -> Self {
        DecideOpts { budget: 200_000 }
    }
}

/// Checks a Zero certificate: form == d(eta) + AS(psi), exactly.
pub fn verify_zero_witness(form: &LogForm, w: &ZeroWitness) -> bool {
    let mut rhs = w.psi.artin_schreier();
    if let Some(eta) = &w.eta {
        rhs = rhs.add(&eta.exterior_d());
    }
    rhs == *form
}

/// Decides vanishing of the class of `form`.
pub fn decide_zero(form: &LogForm, opts: &DecideOpts) -> crate::Result<Decision> {
    let d = decide_rec(form, opts)?;
    debug_assert!(
        d.verdict != Verdict::Zero || verify_zero_witness(form, d.witness.as_ref().unwrap()),
        "zero verdict with a broken certificate"
    );
    Ok(d)
}

/// Decides whether two representatives give the same class.
pub fn classes_equal(a: &LogForm, b: &LogForm, opts: &DecideOpts) -> crate::Result<Decision> {
    if a.nvars != b.nvars || a.degree != b.degree {
        return Err(Error::DegreeMismatch(format!(
            "comparing a {}-form in {} variables with a {}-form in {} variables",
            a.degree, a.nvars, b.degree, b.nvars
        )));
    }
    decide_zero(&a.add(b), opts)
}

/// The finite places dividing some coefficient denominator of `form`,
/// together with the place at infinity. Fails with `Inconclusive` when a
/// denominator cannot be fully factored within the budget.
pub fn support_places(form: &LogForm, opts: &DecideOpts) -> crate::Result<Vec<Place>> {
    if form.nvars == 0 {
        return Ok(Vec::new());
    }
    let k = form.nvars - 1;
    let mut out: Vec<Place> = finite_support(form, k, opts)?
        .into_iter()
        .map(Place::Finite)
        .collect();
    out.push(Place::Inf);
    Ok(out)
}

fn finite_support(
    form: &LogForm,
    k: usize,
    opts: &DecideOpts,
) -> crate::Result<Vec<Arc<FinitePlace>>> {
    let mut reg: BTreeMap<String, Arc<FinitePlace>> = BTreeMap::new();
    for (_, c) in form.terms() {
        let (_, den) = elem_to_ratx(c, k);
        if den.degree().unwrap_or(0) == 0 {
            continue;
        }
        let monic = den.scale(&den.leading_coeff().inv());
        factor_radical(&monic, k, opts.budget, &mut reg)?;
    }
    Ok(reg.into_values().collect())
}

/// Registers every distinct irreducible factor of the monic polynomial `b`.
fn factor_radical(
    b: &UPoly,
    k: usize,
    budget: usize,
    reg: &mut BTreeMap<String, Arc<FinitePlace>>,
) -> crate::Result<()> {
    let deg = b.degree().unwrap_or(0);
    if deg == 0 {
        return Ok(());
    }
    let db = b.derivative_x();
    if db.is_zero() {
        // b = E(x^2). Either all coefficients are squares and b is a
        // perfect square, or the inseparable pieces sit inside E.
        if let Some(r) = upoly_sqrt(b) {
            return factor_radical(&r, k, budget, reg);
        }
        let (even, odd) = b.x_parity_split();
        debug_assert!(odd.is_zero());
        let mut sub: BTreeMap<String, Arc<FinitePlace>> = BTreeMap::new();
        factor_radical(&even, k, budget, &mut sub)?;
        for q in sub.into_values() {
            let q2 = q.poly.compose_x2();
            if let Some(r) = upoly_sqrt(&q2) {
                factor_radical(&r, k, budget, reg)?;
            } else {
                // q irreducible with a non-square coefficient keeps q(x^2)
                // irreducible.
                let pl = FinitePlace::new(q2, k)?;
                reg.entry(pl.poly.text(k)).or_insert(pl);
            }
        }
        return Ok(());
    }
    let g = b.gcd(&db);
    if g.degree().unwrap_or(0) >= 1 {
        let (cof, rem) = b.divmod(&g);
        debug_assert!(rem.is_zero());
        factor_radical(&g, k, budget, reg)?;
        factor_radical(&cof, k, budget, reg)?;
        return Ok(());
    }
    match classify_place(b, k, budget)?.verdict {
        PlaceVerdict::Irreducible(_) => {
            let pl = FinitePlace::new(b.clone(), k)?;
            reg.entry(pl.poly.text(k)).or_insert(pl);
            Ok(())
        }
        PlaceVerdict::Reducible(f) => {
            let (cof, rem) = b.divmod(&f);
            debug_assert!(rem.is_zero());
            factor_radical(&f, k, budget, reg)?;
            factor_radical(&cof, k, budget, reg)
        }
        PlaceVerdict::Inconclusive => Err(Error::Inconclusive(format!(
            "cannot factor the denominator {} within budget",
            b.text(k)
        ))),
    }
}

/// Square root of a univariate polynomial, when every exponent is even and
/// every coefficient is a square.
fn upoly_sqrt(b: &UPoly) -> Option<UPoly> {
    let mut acc = UPoly::zero();
    for (e, c) in b.coeffs() {
        if e % 2 != 0 {
            return None;
        }
        acc = acc.add(&UPoly::monomial(e / 2, c.sqrt()?));
    }
    Some(acc)
}

// ---------------------------------------------------------------------------
// The witnessed descent.
// ---------------------------------------------------------------------------

/// Accumulators threaded through the sweeps. The running invariant is
///
///   original form = (terms still pooled) + junk + d(eta) + AS(psi)
///
/// where junk has polynomial coefficients in x.
struct DescentState {
    n: usize,
    m: usize,
    eta: LogForm,
    psi: LogForm,
    junk: LogForm,
}

impl DescentState {
    fn new(n: usize, m: usize) -> Self {
        DescentState {
            n,
            m,
            eta: LogForm::zero(n, m.saturating_sub(1)),
            psi: LogForm::zero(n, m),
            junk: LogForm::zero(n, m),
        }
    }

    fn add_eta(&mut self, f: &LogForm) {
        if f.is_structurally_zero() {
            return;
        }
        assert!(self.m >= 1, "d-witness produced for a 0-form");
        self.eta = self.eta.add(f);
    }

    fn add_psi(&mut self, f: &LogForm) {
        self.psi = self.psi.add(f);
    }

    fn into_witness(self) -> ZeroWitness {
        ZeroWitness {
            eta: if self.m >= 1 { Some(self.eta) } else { None },
            psi: self.psi,
        }
    }
}

enum SweepEnd {
    Done,
    NonZero(String),
    Unknown(String),
}

/// Routes a rewritten term to the right pool: levels >= 1 stay in the main
/// pool, level-0 terms carrying dlog p wait for the final flush, and
/// everything else is polynomial junk.
#[allow(clippy::too_many_arguments)]
fn push_term(
    pools: &mut BTreeMap<usize, BTreeMap<IndexSet, UPoly>>,
    level0: &mut BTreeMap<IndexSet, UPoly>,
    junk: &mut Vec<(IndexSet, UPoly)>,
    ps: usize,
    lvl: usize,
    s: IndexSet,
    c: UPoly,
) {
    if c.is_zero() {
        return;
    }
    if lvl >= 1 {
        let slot = pools.entry(lvl).or_default();
        let cur = slot.remove(&s).unwrap_or_default();
        let sum = cur.add(&c);
        if !sum.is_zero() {
            slot.insert(s, sum);
        }
    } else if s.contains(ps) {
        let cur = level0.remove(&s).unwrap_or_default();
        let sum = cur.add(&c);
        if !sum.is_zero() {
            level0.insert(s, sum);
        }
    } else {
        junk.push((s, c));
    }
}

/// d-exact correction for applying AS termwise through a dlog p factor:
/// the witness w with AS(c) dlog_expand(p) = AS(c dlog_expand(p)) + d(w),
/// summed over the monomial presentations of numerator and denominator.
fn defect_witness_for(c: &GroundElem, p_elem: &GroundElem, s: &IndexSet, n: usize) -> LogForm {
    let mut out = LogForm::zero(n, s.len());
    let monos = |p: &PolyF2| -> Vec<GroundElem> {
        p.terms()
            .map(|m| GroundElem::from_poly(PolyF2::from_mono(m.clone())))
            .collect()
    };
    let num = monos(p_elem.num());
    if num.len() > 1 {
        out = out.add(&presentation_defect(c, &num, s, n).1);
    }
    if !p_elem.den().is_one() {
        let den = monos(p_elem.den());
        if den.len() > 1 {
            out = out.add(&presentation_defect(c, &den, s, n).1);
        }
    }
    out
}

/// Sweeps the p-singular part of the class into local normal position,
/// witnessing every move. On success all of it has been removed: singular
/// numerators cancelled against each other, AS-descended, or pushed into
/// polynomial junk and d/AS images.
fn sweep_finite(
    st: &mut DescentState,
    place: &Arc<FinitePlace>,
    init: Vec<(usize, IndexSet, UPoly)>,
    opts: &DecideOpts,
) -> crate::Result<SweepEnd> {
    let k = place.ground_vars;
    let n = st.n;
    let d = place.degree;
    let xs = slot_x(k);
    let ps = slot_place(k);
    let p = &place.poly;
    let p_elem = upoly_to_elem(p, k);
    let e_form = dlog_expand(&p_elem, n);
    let is_x_place = d == 1 && p.coeff(0).is_zero();

    if let Some(ip) = place.insep_index {
        if init.iter().any(|(_, s, _)| s.contains(ip)) {
            return Ok(SweepEnd::Unknown(format!(
                "a term wedges dlog t{} at the inseparable place {}; no exact conversion stays supported there",
                ip + 1,
                p.text(k)
            )));
        }
    }

    let mut pools: BTreeMap<usize, BTreeMap<IndexSet, UPoly>> = BTreeMap::new();
    let mut level0: BTreeMap<IndexSet, UPoly> = BTreeMap::new();
    let mut junk: Vec<(IndexSet, UPoly)> = Vec::new();

    // Move dlog x terms into dlog p coordinates. At p = x the two agree; at
    // other separable places multiply through by x p' and split off the
    // polynomial error:
    //   h/p^l dlog I ^ dlog x
    //     = (H/p^l) dlog I ^ [dlog p + sum_i (p_i x^{d-i}/p) dlog p_i] + junk
    // with H = h p (x p')^{-1} mod p^{l+1}. Inseparable places keep dlog x
    // as a residue basis direction, so their terms stay as they are.
    for (lvl, s, c) in init {
        if !s.contains(xs) || (place.insep_index.is_some() && !is_x_place) {
            push_term(&mut pools, &mut level0, &mut junk, ps, lvl, s, c);
            continue;
        }
        if is_x_place {
            let s2 = s.remove(xs).insert(ps);
            push_term(&mut pools, &mut level0, &mut junk, ps, lvl, s2, c);
            continue;
        }
        let base = s.remove(xs);
        let modulus = p.pow(lvl + 1);
        let xpr = UPoly::x().mul(&p.derivative_x());
        let inv = xpr.rem(&modulus).inv_mod(&modulus);
        let h = c.mul(p).rem(&modulus).mul(&inv).rem(&modulus);
        let (jpoly, zero) = c.mul(p).add(&h.mul(&xpr)).divmod(&modulus);
        debug_assert!(zero.is_zero());
        if !jpoly.is_zero() {
            junk.push((base.insert(xs), jpoly));
        }
        push_term(
            &mut pools,
            &mut level0,
            &mut junk,
            ps,
            lvl,
            base.insert(ps),
            h.clone(),
        );
        for i in 1..=d {
            let pi = place.p_coeff(i);
            if pi.is_zero() {
                continue;
            }
            for j in 0..k {
                if base.contains(j) {
                    continue;
                }
                let lam = pi.dlog_coeff(j);
                if lam.is_zero() {
                    continue;
                }
                // p_i cancels: the coefficient is t_j (d p_i / d t_j).
                let cij = pi.mul(&lam);
                push_term(
                    &mut pools,
                    &mut level0,
                    &mut junk,
                    ps,
                    lvl + 1,
                    base.insert(j),
                    h.mul_xpow(d - i).scale(&cij),
                );
            }
        }
    }

    // Descending pole-order engine. Each level decomposes its digits over
    // the residue-field square basis, shifts slot sets into normal position
    // with d-witnesses, AS-descends even levels, and then requires the
    // normal-position entries to cancel exactly; a leftover entry is a
    // nonzero residue table entry.
    while let Some((&lvl, _)) = pools.iter().next_back() {
        let level = pools.remove(&lvl).unwrap();
        debug_assert!(lvl >= 1);
        let mut digits: Vec<(IndexSet, UPoly)> = Vec::new();
        for (s, c) in level {
            let (q, r) = c.divmod(p);
            if !r.is_zero() {
                digits.push((s.clone(), r));
            }
            push_term(&mut pools, &mut level0, &mut junk, ps, lvl - 1, s, q);
        }
        let mut em: BTreeMap<(bool, IndexSet, IndexSet), UPoly> = BTreeMap::new();
        let emit = |em: &mut BTreeMap<(bool, IndexSet, IndexSet), UPoly>,
                        key: (bool, IndexSet, IndexSet),
                        f: &UPoly| {
            let cur = em.remove(&key).unwrap_or_default();
            let sum = cur.add(f);
            if !sum.is_zero() {
                em.insert(key, sum);
            }
        };
        for (s, h) in digits {
            let sp = residue_field_decompose(place, &h)?;
            push_term(
                &mut pools,
                &mut level0,
                &mut junk,
                ps,
                lvl - 1,
                s.clone(),
                sp.witness,
            );
            for (jpat, f) in sp.parts {
                if f.is_zero() {
                    continue;
                }
                if lvl % 2 == 1 {
                    if !s.contains(ps) {
                        emit(&mut em, (true, s.clone(), jpat), &f);
                    } else {
                        let base = s.remove(ps);
                        let numer = basis_monomial_with_x(&jpat, xs).mul(&f.square());
                        let coef = ratx_to_elem(&numer, &p.pow(lvl), k);
                        st.add_eta(&LogForm::term(n, coef, base.clone()));
                        for j in jpat.iter() {
                            if base.contains(j) {
                                continue;
                            }
                            emit(&mut em, (true, base.insert(j), jpat.clone()), &f);
                        }
                    }
                } else {
                    let r = lvl / 2;
                    if jpat.is_empty() {
                        let c_el = ratx_to_elem(&f, &p.pow(r), k);
                        if s.contains(ps) {
                            let base = s.remove(ps);
                            let local = LogForm::term(n, c_el.clone(), base.clone());
                            st.add_psi(&local.wedge(&e_form));
                            st.add_eta(&defect_witness_for(&c_el, &p_elem, &base, n));
                        } else {
                            st.add_psi(&LogForm::term(n, c_el, s.clone()));
                        }
                        push_term(&mut pools, &mut level0, &mut junk, ps, r, s.clone(), f);
                    } else if jpat.shifts_up(&s) {
                        emit(&mut em, (false, s.clone(), jpat), &f);
                    } else {
                        let jstar = jpat.max_slot().unwrap();
                        let base = s.remove(jstar);
                        let numer = basis_monomial_with_x(&jpat, xs).mul(&f.square());
                        let coef = ratx_to_elem(&numer, &p.pow(lvl), k);
                        if base.contains(ps) {
                            let inner = LogForm::term(n, coef, base.remove(ps));
                            st.add_eta(&inner.wedge(&e_form));
                        } else {
                            st.add_eta(&LogForm::term(n, coef, base.clone()));
                        }
                        for j in jpat.iter() {
                            if j == jstar || base.contains(j) {
                                continue;
                            }
                            emit(&mut em, (false, base.insert(j), jpat.clone()), &f);
                        }
                    }
                }
            }
        }
        for ((is_u, slots, jpat), sum) in em {
            if !sum.is_zero() {
                return Ok(SweepEnd::NonZero(format!(
                    "residue at {} has a nonzero {} entry (level {}, slots {:?}, pattern {:?}): {}",
                    p.text(k),
                    if is_u { "u" } else { "v" },
                    lvl,
                    slots.as_slice(),
                    jpat.as_slice(),
                    sum.text(k)
                )));
            }
        }
    }

    // Level-0 terms still wedging dlog p: split off multiples of p with the
    // move q dp ^ w = d(p q w) + p dq ^ w, and collect the genuine residue
    // classes.
    let mut phibar: BTreeMap<IndexSet, UPoly> = BTreeMap::new();
    for (s, c) in level0 {
        let base = s.remove(ps);
        let (q, c0) = c.divmod(p);
        if !c0.is_zero() {
            let cur = phibar.remove(&base).unwrap_or_default();
            let sum = cur.add(&c0);
            if !sum.is_zero() {
                phibar.insert(base.clone(), sum);
            }
        }
        if q.is_zero() {
            continue;
        }
        let pq = p.mul(&q);
        st.add_eta(&LogForm::term(n, upoly_to_elem(&pq, k), base.clone()));
        for b in 0..=k {
            if base.contains(b) {
                continue;
            }
            let der = if b == xs {
                q.derivative_x().mul_xpow(1)
            } else {
                q.partial_t(b).scale(&GroundElem::var(b))
            };
            if der.is_zero() {
                continue;
            }
            junk.push((base.insert(b), p.mul(&der)));
        }
    }

    for (s, c) in junk {
        st.junk.add_term(upoly_to_elem(&c, k), s);
    }

    if !phibar.is_empty() {
        if d == 1 {
            let m = st.m;
            debug_assert!(m >= 1);
            let mut gf = LogForm::zero(k, m - 1);
            for (s, c) in &phibar {
                gf.add_term(to_ground_deg1(place, c), s.clone());
            }
            let sub = decide_rec(&gf, opts)?;
            match sub.verdict {
                Verdict::NonZero => {
                    return Ok(SweepEnd::NonZero(format!(
                        "residue at {}: the dlog p component is a nonzero residue-field class ({})",
                        p.text(k),
                        sub.reason
                    )));
                }
                Verdict::Unknown => {
                    return Ok(SweepEnd::Unknown(format!(
                        "residue-field class at {} undecided: {}",
                        p.text(k),
                        sub.reason
                    )));
                }
                Verdict::Zero => {
                    let w = sub.witness.unwrap();
                    if let Some(etag) = &w.eta {
                        st.add_eta(&etag.lift_vars(n).wedge(&e_form));
                    }
                    let psig = w.psi.lift_vars(n);
                    st.add_psi(&psig.wedge(&e_form));
                    let terms: Vec<(IndexSet, GroundElem)> = psig
                        .terms()
                        .map(|(s, c)| (s.clone(), c.clone()))
                        .collect();
                    for (s2, cpsi) in terms {
                        st.add_eta(&defect_witness_for(&cpsi, &p_elem, &s2, n));
                    }
                }
            }
        } else {
            return Ok(SweepEnd::Unknown(format!(
                "a nonzero dlog p component survives at {}, a place of degree {}; residue-field classes are only decided at degree-1 places and at infinity",
                p.text(k),
                d
            )));
        }
    }

    Ok(SweepEnd::Done)
}

/// Sweeps the polynomial remainder at infinity and extracts the x-free
/// ground component. Residue-field values at infinity are ground elements,
/// so normal-position entries must cancel identically.
fn sweep_inf(st: &mut DescentState, opts: &DecideOpts) -> crate::Result<(SweepEnd, LogForm)> {
    let n = st.n;
    let k = n - 1;
    let m = st.m;
    let xs = slot_x(k);
    let ps = slot_place(k);
    let junk = std::mem::replace(&mut st.junk, LogForm::zero(n, m));
    let xel = GroundElem::var(xs);

    let mut pools: BTreeMap<usize, BTreeMap<IndexSet, GroundElem>> = BTreeMap::new();
    let pour = |pools: &mut BTreeMap<usize, BTreeMap<IndexSet, GroundElem>>,
                    r: usize,
                    s: IndexSet,
                    a: GroundElem| {
        if a.is_zero() {
            return;
        }
        let slot = pools.entry(r).or_default();
        let cur = slot.remove(&s).unwrap_or_else(GroundElem::zero);
        let sum = cur.add(&a);
        if !sum.is_zero() {
            slot.insert(s, sum);
        }
    };
    for (s, c) in junk.terms() {
        let (num, den) = elem_to_ratx(c, k);
        if den.degree().unwrap_or(0) != 0 {
            return Ok((
                SweepEnd::Unknown(format!(
                    "a remainder coefficient is not polynomial in x (denominator {})",
                    den.text(k)
                )),
                LogForm::zero(n, m),
            ));
        }
        let up = num.scale(&den.coeff(0).inv());
        let s2 = if s.contains(xs) {
            s.remove(xs).insert(ps)
        } else {
            s.clone()
        };
        for (r, a) in up.coeffs() {
            pour(&mut pools, r, s2.clone(), a.clone());
        }
    }

    while let Some((&r, _)) = pools.iter().next_back() {
        if r == 0 {
            break;
        }
        let level = pools.remove(&r).unwrap();
        let mut em: BTreeMap<(bool, IndexSet, IndexSet), GroundElem> = BTreeMap::new();
        let emit = |em: &mut BTreeMap<(bool, IndexSet, IndexSet), GroundElem>,
                        key: (bool, IndexSet, IndexSet),
                        b: &GroundElem| {
            let cur = em.remove(&key).unwrap_or_else(GroundElem::zero);
            let sum = cur.add(b);
            if !sum.is_zero() {
                em.insert(key, sum);
            }
        };
        for (s, a) in level {
            for (jpat, b) in a.frobenius_decompose() {
                if b.is_zero() {
                    continue;
                }
                if r % 2 == 1 {
                    if !s.contains(ps) {
                        emit(&mut em, (true, s.clone(), jpat), &b);
                    } else {
                        let base = s.remove(ps);
                        let coef = ground_monomial(&jpat)
                            .mul(&b.square())
                            .mul(&xel.pow(r as u32));
                        st.add_eta(&LogForm::term(n, coef, base.clone()));
                        for j in jpat.iter() {
                            if base.contains(j) {
                                continue;
                            }
                            emit(&mut em, (true, base.insert(j), jpat.clone()), &b);
                        }
                    }
                } else if jpat.is_empty() {
                    let rho = r / 2;
                    let crep = b.mul(&xel.pow(rho as u32));
                    let global = if s.contains(ps) {
                        s.remove(ps).insert(xs)
                    } else {
                        s.clone()
                    };
                    st.add_psi(&LogForm::term(n, crep, global));
                    pour(&mut pools, rho, s.clone(), b.clone());
                } else if jpat.shifts_up(&s) {
                    emit(&mut em, (false, s.clone(), jpat), &b);
                } else {
                    let jstar = jpat.max_slot().unwrap();
                    let base = s.remove(jstar);
                    let coef = ground_monomial(&jpat)
                        .mul(&b.square())
                        .mul(&xel.pow(r as u32));
                    let global = if base.contains(ps) {
                        base.remove(ps).insert(xs)
                    } else {
                        base.clone()
                    };
                    st.add_eta(&LogForm::term(n, coef, global));
                    for j in jpat.iter() {
                        if j == jstar || base.contains(j) {
                            continue;
                        }
                        emit(&mut em, (false, base.insert(j), jpat.clone()), &b);
                    }
                }
            }
        }
        for ((is_u, slots, jpat), sum) in em {
            if !sum.is_zero() {
                return Ok((
                    SweepEnd::NonZero(format!(
                        "residue at infinity has a nonzero {} entry (level {}, slots {:?}, pattern {:?})",
                        if is_u { "u" } else { "v" },
                        r,
                        slots.as_slice(),
                        jpat.as_slice()
                    )),
                    LogForm::zero(n, m),
                ));
            }
        }
    }

    let mut ground = LogForm::zero(n, m);
    let mut phibar: BTreeMap<IndexSet, GroundElem> = BTreeMap::new();
    if let Some(level0) = pools.remove(&0) {
        for (s, a) in level0 {
            if s.contains(ps) {
                let base = s.remove(ps);
                let cur = phibar.remove(&base).unwrap_or_else(GroundElem::zero);
                let sum = cur.add(&a);
                if !sum.is_zero() {
                    phibar.insert(base, sum);
                }
            } else {
                debug_assert!(!s.contains(xs));
                ground.add_term(a, s);
            }
        }
    }
    debug_assert!(pools.is_empty());

    if !phibar.is_empty() {
        debug_assert!(m >= 1);
        let mut gf = LogForm::zero(n, m - 1);
        for (s, a) in &phibar {
            gf.add_term(a.clone(), s.clone());
        }
        let gf = gf.restrict_vars()?;
        let sub = decide_rec(&gf, opts)?;
        match sub.verdict {
            Verdict::NonZero => {
                return Ok((
                    SweepEnd::NonZero(format!(
                        "residue at infinity: the dlog x component is a nonzero residue-field class ({})",
                        sub.reason
                    )),
                    LogForm::zero(n, m),
                ));
            }
            Verdict::Unknown => {
                return Ok((
                    SweepEnd::Unknown(format!(
                        "residue-field class at infinity undecided: {}",
                        sub.reason
                    )),
                    LogForm::zero(n, m),
                ));
            }
            Verdict::Zero => {
                let w = sub.witness.unwrap();
                let dx = LogForm::term(n, GroundElem::one(), IndexSet::singleton(xs));
                if let Some(etag) = &w.eta {
                    st.add_eta(&etag.lift_vars(n).wedge(&dx));
                }
                st.add_psi(&w.psi.lift_vars(n).wedge(&dx));
            }
        }
    }

    Ok((SweepEnd::Done, ground))
}

/// Splits one coefficient into its digit expansion at `pl` plus a remainder
/// regular at `pl`.
fn place_digits(c: &GroundElem, pl: &FinitePlace) -> (Vec<(usize, UPoly)>, GroundElem) {
    if c.is_zero() {
        return (Vec::new(), GroundElem::zero());
    }
    let k = pl.ground_vars;
    let (num, den) = elem_to_ratx(c, k);
    let e = den.valuation(&pl.poly);
    if e == 0 {
        return (Vec::new(), c.clone());
    }
    let pe = pl.poly.pow(e);
    let (b0, r0) = den.divmod(&pe);
    debug_assert!(r0.is_zero());
    let h0 = num.rem(&pe).mul(&b0.inv_mod(&pe)).rem(&pe);
    let mut digits = Vec::new();
    let mut sub = GroundElem::zero();
    let mut cur = h0;
    for i in 0..e {
        let (q, dg) = cur.divmod(&pl.poly);
        let lvl = e - i;
        if !dg.is_zero() {
            sub = sub.add(&ratx_to_elem(&dg, &pl.poly.pow(lvl), k));
            digits.push((lvl, dg));
        }
        cur = q;
    }
    debug_assert!(cur.is_zero());
    (digits, c.add(&sub))
}

/// Partial-fraction split of the whole form: per-place singular pools plus
/// a junk tail that must be polynomial in x.
fn split_form(
    st: &mut DescentState,
    form: &LogForm,
    finites: &[Arc<FinitePlace>],
    k: usize,
) -> crate::Result<Vec<Vec<(usize, IndexSet, UPoly)>>> {
    let mut per: Vec<Vec<(usize, IndexSet, UPoly)>> = vec![Vec::new(); finites.len()];
    for (s, c) in form.terms() {
        let mut tail = c.clone();
        for (ix, pl) in finites.iter().enumerate() {
            let (digits, rem) = place_digits(&tail, pl);
            for (lvl, h) in digits {
                per[ix].push((lvl, s.clone(), h));
            }
            tail = rem;
        }
        if tail.is_zero() {
            continue;
        }
        let (_, den) = elem_to_ratx(&tail, k);
        if den.degree().unwrap_or(0) != 0 {
            return Err(Error::Inconclusive(
                "a coefficient stays singular outside the recognized support".into(),
            ));
        }
        st.junk.add_term(tail, s.clone());
    }
    Ok(per)
}

fn describe_uv(w: &W1Class) -> String {
    let head = |t: &BTreeMap<crate::local::W1Key, UPoly>, name: &str| {
        t.iter().next().map(|((r, s, j), _)| {
            format!(
                "nonzero {} entry (r={}, slots {:?}, pattern {:?})",
                name,
                r,
                s.as_slice(),
                j.as_slice()
            )
        })
    };
    head(&w.u, "u")
        .or_else(|| head(&w.v, "v"))
        .unwrap_or_else(|| "nonzero residue entry".into())
}

fn decide_rec(form: &LogForm, opts: &DecideOpts) -> crate::Result<Decision> {
    let n = form.nvars;
    let m = form.degree;
    if form.is_structurally_zero() {
        return Ok(Decision::zero(
            ZeroWitness::empty(n, m),
            "the representative is zero",
        ));
    }
    if n == 0 {
        // Coefficients are F2 scalars and AS is x^2 + x = 0 on F2, so the
        // only nonzero class is the constant 1.
        return Ok(Decision::nonzero("the class is the ground constant 1"));
    }
    let k = n - 1;

    let finites = match finite_support(form, k, opts) {
        Ok(v) => v,
        Err(Error::Inconclusive(msg)) => return Ok(Decision::unknown(msg)),
        Err(e) => return Err(e),
    };

    for pl in &finites {
        let w = residue(form, &Place::Finite(pl.clone()))?;
        if !w.uv_is_zero() {
            return Ok(Decision::nonzero(format!(
                "residue at {}: {}",
                pl.poly.text(k),
                describe_uv(&w)
            )));
        }
    }
    let winf = residue(form, &Place::Inf)?;
    if !winf.uv_is_zero() {
        return Ok(Decision::nonzero(format!(
            "residue at infinity: {}",
            describe_uv(&winf)
        )));
    }

    let mut st = DescentState::new(n, m);
    let per = match split_form(&mut st, form, &finites, k) {
        Ok(p) => p,
        Err(Error::Inconclusive(msg)) => return Ok(Decision::unknown(msg)),
        Err(e) => return Err(e),
    };
    for (pl, pool) in finites.iter().zip(per) {
        match sweep_finite(&mut st, pl, pool, opts)? {
            SweepEnd::Done => {}
            SweepEnd::NonZero(r) => return Ok(Decision::nonzero(r)),
            SweepEnd::Unknown(r) => return Ok(Decision::unknown(r)),
        }
    }
    let (end, groundn) = sweep_inf(&mut st, opts)?;
    match end {
        SweepEnd::Done => {}
        SweepEnd::NonZero(r) => return Ok(Decision::nonzero(r)),
        SweepEnd::Unknown(r) => return Ok(Decision::unknown(r)),
    }

    let g = groundn.restrict_vars()?;
    let sub = decide_rec(&g, opts)?;
    match sub.verdict {
        Verdict::NonZero => Ok(Decision::nonzero(format!(
            "the x-free component over the ground field is nonzero: {}",
            sub.reason
        ))),
        Verdict::Unknown => Ok(Decision::unknown(sub.reason)),
        Verdict::Zero => {
            let wg = sub.witness.unwrap();
            if let Some(etag) = &wg.eta {
                st.add_eta(&etag.lift_vars(n));
            }
            let psig = wg.psi.lift_vars(n);
            st.add_psi(&psig);
            Ok(Decision::zero(
                st.into_witness(),
                "all residues vanish and the class descends to zero",
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Class reduction.
// ---------------------------------------------------------------------------

/// A class rewritten as local normal forms plus an x-free component:
///
///   form + sum materialize(locals) + lift(ground) = d(eta) + AS(psi).
///
/// In characteristic 2 the same equation says form is congruent to
/// sum materialize(locals) + lift(ground) modulo exact and AS parts.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub locals: Vec<W1Class>,
    pub ground: LogForm,
    pub witness: ZeroWitness,
}

/// Rewrites a class as the sum of its materialized residues plus an x-free
/// ground component, with an exact certificate. Fails with `Inconclusive`
/// when the support cannot be factored or a residue-field class at a place
/// of degree at least 2 blocks the sweep.
pub fn class_reduce(form: &LogForm, opts: &DecideOpts) -> crate::Result<Reduction> {
    let n = form.nvars;
    let m = form.degree;
    if n == 0 {
        return Err(Error::Unsupported(
            "class_reduce needs at least one variable".into(),
        ));
    }
    let k = n - 1;
    let finites = finite_support(form, k, opts)?;
    let mut locals = Vec::new();
    let mut diff = form.clone();
    for pl in &finites {
        let w = residue(form, &Place::Finite(pl.clone()))?;
        if !w.is_structurally_zero() {
            diff = diff.add(&materialize(&w));
            locals.push(w);
        }
    }
    let winf = residue(form, &Place::Inf)?;
    if !winf.is_structurally_zero() {
        diff = diff.add(&materialize(&winf));
        locals.push(winf);
    }

    let mut st = DescentState::new(n, m);
    let per = split_form(&mut st, &diff, &finites, k)?;
    for (pl, pool) in finites.iter().zip(per) {
        match sweep_finite(&mut st, pl, pool, opts)? {
            SweepEnd::Done => {}
            SweepEnd::NonZero(r) => {
                return Err(Error::Unsupported(format!(
                    "internal: removing materialized residues left a residue behind: {r}"
                )));
            }
            SweepEnd::Unknown(r) => return Err(Error::Inconclusive(r)),
        }
    }
    let (end, groundn) = sweep_inf(&mut st, opts)?;
    match end {
        SweepEnd::Done => {}
        SweepEnd::NonZero(r) => {
            return Err(Error::Unsupported(format!(
                "internal: removing materialized residues left a residue behind: {r}"
            )));
        }
        SweepEnd::Unknown(r) => return Err(Error::Inconclusive(r)),
    }
    let ground = groundn.restrict_vars()?;
    Ok(Reduction {
        locals,
        ground,
        witness: st.into_witness(),
    })
}

/// Checks the certificate of a reduction against the original form.
pub fn verify_reduction(form: &LogForm, red: &Reduction) -> bool {
    let mut total = form.clone();
    for w in &red.locals {
        total = total.add(&materialize(w));
    }
    total = total.add(&red.ground.lift_vars(form.nvars));
    verify_zero_witness(&total, &red.witness)
}

/// Compares two local normal forms at the same place. u and v entries are
/// unique and compare exactly; the dlog p component is only well defined as
/// a residue-field class, so it is compared by a recursive decision when the
/// residue field is rational (degree-1 places and infinity). `Zero` means
/// the difference vanishes.
pub fn w1_difference_is_zero(
    a: &W1Class,
    b: &W1Class,
    opts: &DecideOpts,
) -> crate::Result<Verdict> {
    if a.place != b.place || a.degree != b.degree || a.ground_vars != b.ground_vars {
        return Err(Error::DegreeMismatch(
            "cannot compare normal forms at different places or degrees".into(),
        ));
    }
    if a.u != b.u || a.v != b.v {
        return Ok(Verdict::NonZero);
    }
    let dphi = a.phi_prime.add(&b.phi_prime);
    if dphi.is_structurally_zero() {
        return Ok(Verdict::Zero);
    }
    if a.degree == 0 {
        return Ok(Verdict::NonZero);
    }
    let k = a.ground_vars;
    let m = a.degree;
    let gf = match &a.place {
        Place::Inf => {
            let mut gf = LogForm::zero(k, m - 1);
            for (s, c) in &dphi.coeffs {
                debug_assert!(c.degree().unwrap_or(0) == 0);
                gf.add_term(c.coeff(0), s.clone());
            }
            gf
        }
        Place::Finite(pl) => {
            if pl.degree != 1 {
                return Ok(Verdict::Unknown);
            }
            let mut gf = LogForm::zero(k, m - 1);
            for (s, c) in &dphi.coeffs {
                gf.add_term(to_ground_deg1(pl, c), s.clone());
            }
            gf
        }
    };
    Ok(decide_rec(&gf, opts)?.verdict)
}

// ---------------------------------------------------------------------------
// Named families of classes.
// ---------------------------------------------------------------------------

/// Generator families for the standard filtration subgroups at a finite
/// place: classes with polynomial coefficients, bounded pole order, pure
/// p-power support with or without a dlog p wedge, the two graded unit
/// filtration layers, and unit or one-unit coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupKind {
    PolyClasses,
    PoleBounded { order: usize },
    PlaceSupported,
    PlaceSupportedWedge,
    UnitFiltration { r: usize },
    UnitFiltrationEven { r: usize },
    Units,
    OneUnits,
}

/// A concrete generator of the requested family, varied by `idx`. The form
/// has degree `m` over `ground_vars + 1` variables.
pub fn subgroup_generator(
    kind: &SubgroupKind,
    place: &Arc<FinitePlace>,
    m: usize,
    idx: usize,
) -> crate::Result<LogForm> {
    let k = place.ground_vars;
    let n = k + 1;
    let xs = slot_x(k);
    if m > k {
        return Err(Error::Unsupported(format!(
            "a degree-{m} generator needs at least {m} ground variables"
        )));
    }
    let s0 = IndexSet::from_slice(&(0..m).collect::<Vec<_>>());
    let p_elem = upoly_to_elem(&place.poly, k);
    let h = place.reduce(&UPoly::monomial(idx % place.degree, GroundElem::one()));
    let h_el = upoly_to_elem(&h, k);
    let form = match kind {
        SubgroupKind::PolyClasses => LogForm::term(
            n,
            GroundElem::var(xs).pow((idx % 3) as u32),
            s0,
        ),
        SubgroupKind::PoleBounded { order } => {
            let l = (idx % (*order).max(1)) + 1;
            LogForm::term(n, h_el.div(&p_elem.pow(l as u32)), s0)
        }
        SubgroupKind::PlaceSupported => LogForm::term(n, h_el.div(&p_elem), s0),
        SubgroupKind::PlaceSupportedWedge => {
            if m == 0 {
                return Err(Error::Unsupported(
                    "a dlog p wedge needs degree at least 1".into(),
                ));
            }
            let s1 = IndexSet::from_slice(&(0..m - 1).collect::<Vec<_>>());
            LogForm::term(n, h_el.div(&p_elem), s1).wedge(&dlog_expand(&p_elem, n))
        }
        SubgroupKind::UnitFiltration { r } => {
            let mut w = W1Class::zero(Place::Finite(place.clone()), k, m);
            w.add_u(*r, s0, IndexSet::empty(), h);
            materialize(&w)
        }
        SubgroupKind::UnitFiltrationEven { r } => {
            if *r == 0 {
                return Err(Error::Unsupported(
                    "the even filtration starts at r = 1".into(),
                ));
            }
            if m + 1 > k {
                return Err(Error::Unsupported(
                    "an even-layer generator needs a free ground slot for its pattern".into(),
                ));
            }
            let mut w = W1Class::zero(Place::Finite(place.clone()), k, m);
            w.add_v(*r, s0, IndexSet::singleton(m), h);
            materialize(&w)
        }
        SubgroupKind::Units => {
            if k == 0 {
                return Err(Error::Unsupported(
                    "a unit generator needs a ground variable".into(),
                ));
            }
            let unit =
                GroundElem::var(0).add(&p_elem.mul(&GroundElem::var(xs).pow((idx % 2) as u32)));
            LogForm::term(n, unit, s0)
        }
        SubgroupKind::OneUnits => {
            let one_unit = GroundElem::one().add(&p_elem.mul(&GroundElem::var(xs).pow((idx % 2) as u32)));
            LogForm::term(n, one_unit, s0)
        }
    };
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tvar(i: usize) -> GroundElem {
        GroundElem::var(i)
    }

    fn opts() -> DecideOpts {
        DecideOpts::default()
    }

    fn place_from(poly: UPoly, k: usize) -> Arc<FinitePlace> {
        FinitePlace::new(poly, k).unwrap()
    }

    // p = x^2 + x + t1 over F2(t1).
    fn sep_quad() -> Arc<FinitePlace> {
        let p = UPoly::from_coeffs([
            (2, GroundElem::one()),
            (1, GroundElem::one()),
            (0, tvar(0)),
        ]);
        place_from(p, 1)
    }

    #[test]
    fn support_finds_all_factors() {
        // denominator (x + t1)^2 (x^2 + x + t1)
        let k = 1;
        let lin = UPoly::from_coeffs([(1, GroundElem::one()), (0, tvar(0))]);
        let den = lin.square().mul(&sep_quad().poly);
        let c = ratx_to_elem(&UPoly::one(), &den, k);
        let form = LogForm::term(2, c, IndexSet::singleton(0));
        let places = support_places(&form, &opts()).unwrap();
        let names: Vec<String> = places.iter().map(|p| p.text()).collect();
        assert_eq!(places.len(), 3);
        assert!(names.iter().any(|s| s.contains("x + t1")));
        assert!(names.iter().any(|s| s.contains("x^2 + x + t1")));
        assert!(names.iter().any(|s| s == "inf"));
    }

    #[test]
    fn support_handles_inseparable_squares() {
        // den = (x^2 + t1)^2 has derivative zero; the radical is x^2 + t1.
        let k = 1;
        let insep = UPoly::from_coeffs([(2, GroundElem::one()), (0, tvar(0))]);
        let den = insep.square();
        let c = ratx_to_elem(&UPoly::one(), &den, k);
        let form = LogForm::term(2, c, IndexSet::singleton(0));
        let places = support_places(&form, &opts()).unwrap();
        assert_eq!(places.len(), 2);
        assert!(places.iter().any(|p| p.text().contains("x^2 + t1")));
    }

    #[test]
    fn simple_pole_is_nonzero() {
        let k = 1;
        let pl = sep_quad();
        let c = ratx_to_elem(&UPoly::one(), &pl.poly, k);
        let form = LogForm::term(2, c, IndexSet::singleton(0));
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::NonZero);
        assert!(d.reason.contains("nonzero u entry"), "{}", d.reason);
    }

    #[test]
    fn as_image_of_simple_pole_is_zero_with_witness() {
        // AS(a) with a = 1/p has all residues zero and an explicit psi.
        let k = 1;
        let pl = sep_quad();
        let a = ratx_to_elem(&UPoly::one(), &pl.poly, k);
        let c = a.square().add(&a);
        let form = LogForm::term(2, c, IndexSet::singleton(0));
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::Zero, "{}", d.reason);
        assert!(verify_zero_witness(&form, d.witness.as_ref().unwrap()));
    }

    #[test]
    fn scalar_as_image_over_one_variable() {
        // AS(1/t1) over F2(t1): a 0-form decided through the tower bottom.
        let a = tvar(0).inv();
        let c = a.square().add(&a);
        let form = LogForm::scalar(1, c);
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::Zero, "{}", d.reason);
        assert!(verify_zero_witness(&form, d.witness.as_ref().unwrap()));
    }

    #[test]
    fn constant_one_is_nonzero() {
        let form = LogForm::scalar(2, GroundElem::one());
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::NonZero);
    }

    #[test]
    fn exact_form_is_zero_with_witness() {
        // x dlog t1 ^ dlog x = d(x dlog t1).
        let n = 2;
        let x = GroundElem::var(1);
        let s = IndexSet::from_slice(&[0, 1]);
        let form = LogForm::term(n, x, s);
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::Zero, "{}", d.reason);
        assert!(verify_zero_witness(&form, d.witness.as_ref().unwrap()));
    }

    #[test]
    fn t_coefficient_wedge_is_zero() {
        // t1 dlog t1 ^ dlog x = d(t1 dlog x) is exact as well.
        let n = 2;
        let form = LogForm::term(n, tvar(0), IndexSet::from_slice(&[0, 1]));
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::Zero, "{}", d.reason);
        assert!(verify_zero_witness(&form, d.witness.as_ref().unwrap()));
    }

    #[test]
    fn dlog_t_is_nonzero() {
        let form = LogForm::term(1, GroundElem::one(), IndexSet::singleton(0));
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::NonZero, "{}", d.reason);
    }

    #[test]
    fn dlog_wedge_of_independent_vars_is_nonzero() {
        let form = LogForm::term(3, GroundElem::one(), IndexSet::from_slice(&[0, 1]));
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::NonZero, "{}", d.reason);
    }

    #[test]
    fn dlog_x_wedge_dlog_t_is_nonzero_via_inf() {
        let form = LogForm::term(2, GroundElem::one(), IndexSet::from_slice(&[0, 1]));
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::NonZero, "{}", d.reason);
        assert!(d.reason.contains("infinity"), "{}", d.reason);
    }

    #[test]
    fn dlog_of_place_wedge_dlog_t_stays_undecided() {
        // dlog p ^ dlog t1 leaves the residue-field class dlog t1bar at the
        // degree-2 place p; such classes are out of decision scope.
        let k = 1;
        let pl = sep_quad();
        let p_elem = upoly_to_elem(&pl.poly, k);
        let form = dlog_expand(&p_elem, 2).wedge(&LogForm::term(
            2,
            GroundElem::one(),
            IndexSet::singleton(0),
        ));
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::Unknown, "{}", d.reason);
        assert!(d.reason.contains("degree 2"), "{}", d.reason);
    }

    #[test]
    fn dexact_with_pole_is_zero() {
        // d(c dlog t1) with c = 1/p exercises the H-conversion route.
        let k = 1;
        let pl = sep_quad();
        let c = ratx_to_elem(&UPoly::one(), &pl.poly, k);
        let witness = LogForm::term(2, c, IndexSet::singleton(0));
        let form = witness.exterior_d();
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::Zero, "{}", d.reason);
        assert!(verify_zero_witness(&form, d.witness.as_ref().unwrap()));
    }

    #[test]
    fn mixed_as_and_d_image_is_zero() {
        let k = 1;
        let pl = sep_quad();
        let a = ratx_to_elem(&UPoly::x(), &pl.poly, k);
        let aspart = LogForm::term(2, a.square().add(&a), IndexSet::singleton(1));
        let dpart = LogForm::scalar(2, ratx_to_elem(&UPoly::one(), &pl.poly, k)).exterior_d();
        let form = aspart.add(&dpart);
        let d = decide_zero(&form, &opts()).unwrap();
        assert_eq!(d.verdict, Verdict::Zero, "{}", d.reason);
        assert!(verify_zero_witness(&form, d.witness.as_ref().unwrap()));
    }

    #[test]
    fn class_reduce_splits_locals_and_ground() {
        let k = 1;
        let pl = sep_quad();
        let c = ratx_to_elem(&UPoly::one(), &pl.poly, k);
        // 1/p dlog t1 + dlog t1: one local part at p plus a ground part.
        let form = LogForm::term(2, c.add(&GroundElem::one()), IndexSet::singleton(0));
        let red = class_reduce(&form, &opts()).unwrap();
        assert_eq!(red.locals.len(), 1);
        assert!(!red.locals[0].u.is_empty());
        assert_eq!(red.ground.term_count(), 1);
        assert!(verify_reduction(&form, &red));
    }

    #[test]
    fn class_reduce_of_as_image_has_no_locals_no_ground() {
        let k = 1;
        let pl = sep_quad();
        let a = ratx_to_elem(&UPoly::one(), &pl.poly, k);
        let form = LogForm::term(2, a.square().add(&a), IndexSet::singleton(0));
        let red = class_reduce(&form, &opts()).unwrap();
        assert!(red.locals.is_empty());
        assert!(red.ground.is_structurally_zero());
        assert!(verify_reduction(&form, &red));
    }

    #[test]
    fn w1_phi_classes_compare_modulo_as() {
        // Two normal forms at x + t1 differing in phi' by AS(1/t1).
        let k = 1;
        let lin = UPoly::from_coeffs([(1, GroundElem::one()), (0, tvar(0))]);
        let pl = place_from(lin, k);
        let mut a = W1Class::zero(Place::Finite(pl.clone()), k, 1);
        let mut b = W1Class::zero(Place::Finite(pl.clone()), k, 1);
        let shift = tvar(0).inv().square().add(&tvar(0).inv());
        a.add_phi(IndexSet::empty(), UPoly::constant(tvar(0)));
        b.add_phi(
            IndexSet::empty(),
            UPoly::constant(tvar(0).add(&shift)),
        );
        assert_eq!(
            w1_difference_is_zero(&a, &b, &opts()).unwrap(),
            Verdict::Zero
        );
        // t1^2 = t1 + AS(t1) is still the same class; 1/t1 is not.
        let mut c = W1Class::zero(Place::Finite(pl.clone()), k, 1);
        c.add_phi(IndexSet::empty(), UPoly::constant(tvar(0).square()));
        assert_eq!(
            w1_difference_is_zero(&a, &c, &opts()).unwrap(),
            Verdict::Zero
        );
        let mut e = W1Class::zero(Place::Finite(pl), k, 1);
        e.add_phi(IndexSet::empty(), UPoly::constant(tvar(0).inv()));
        assert_eq!(
            w1_difference_is_zero(&a, &e, &opts()).unwrap(),
            Verdict::NonZero
        );
    }

    #[test]
    fn one_unit_generators_have_zero_residue() {
        let pl = sep_quad();
        for idx in 0..2 {
            let g = subgroup_generator(&SubgroupKind::OneUnits, &pl, 1, idx).unwrap();
            let w = residue(&g, &Place::Finite(pl.clone())).unwrap();
            assert!(w.is_structurally_zero());
        }
    }

    #[test]
    fn unit_filtration_generator_round_trips() {
        let pl = sep_quad();
        let g = subgroup_generator(&SubgroupKind::UnitFiltration { r: 1 }, &pl, 1, 1).unwrap();
        let w = residue(&g, &Place::Finite(pl.clone())).unwrap();
        assert_eq!(w.u.len(), 1);
        let ((r, s, j), val) = w.u.iter().next().unwrap();
        assert_eq!(*r, 1);
        assert_eq!(s.as_slice(), &[0]);
        assert!(j.is_empty());
        assert_eq!(*val, pl.reduce(&UPoly::x()));
    }

    #[test]
    fn place_supported_generator_is_invisible_elsewhere() {
        let k = 1;
        let pl = sep_quad();
        let other = place_from(UPoly::from_coeffs([(1, GroundElem::one()), (0, tvar(0))]), k);
        let g = subgroup_generator(&SubgroupKind::PlaceSupported, &pl, 1, 0).unwrap();
        let w = residue(&g, &Place::Finite(other)).unwrap();
        assert!(w.is_structurally_zero());
    }

    #[test]
    fn dlog_p_expansion_identity() {
        // dlog p = sum_i (p_i x^{d-i}/p) dlog p_i + (x p'/p) dlog x for
        // p = x^2 + x + t1; the identity backs the dlog x conversion.
        let k = 1;
        let n = 2;
        let pl = sep_quad();
        let p_elem = upoly_to_elem(&pl.poly, k);
        let lhs = dlog_expand(&p_elem, n);
        let mut rhs = LogForm::zero(n, 1);
        let xpr = UPoly::x().mul(&pl.poly.derivative_x());
        rhs.add_term(
            ratx_to_elem(&xpr, &pl.poly, k),
            IndexSet::singleton(1),
        );
        for i in 1..=pl.degree {
            let pi = pl.p_coeff(i);
            if pi.is_zero() {
                continue;
            }
            let scale = ratx_to_elem(
                &UPoly::monomial(pl.degree - i, pi.clone()),
                &pl.poly,
                k,
            );
            rhs = rhs.add(&dlog_expand(&pi, n).scale(&scale));
        }
        assert_eq!(lhs, rhs);
    }
}
