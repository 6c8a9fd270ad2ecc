//! Local normal forms and the residue pipeline.
//!
//! Fix a place p of F = F2(t1,...,tK)(x). Working in the completion at p,
//! every m-form class admits a unique normal form made of three kinds of
//! data over the residue field:
//!
//! - u-entries keyed by (r, L, J): the class of t^J u^2 / p^(2r+1) dlog b_L,
//!   r >= 0, with L and J square-free patterns of residue 2-basis slots;
//! - v-entries keyed by (r, I, J): the class of t^J v^2 / p^(2r) dlog b_I,
//!   r >= 1, J nonempty with max(J) outside I, where I may also contain the
//!   dlog p direction itself;
//! - a phi' part: an (m-1)-form over the residue field wedged with dlog p.
//!
//! `residue` computes this normal form from any global form by expanding the
//! coefficients p-adically and applying three exact rewriting moves, each of
//! which adjusts the representative by an explicit differential or
//! Artin-Schreier witness: the square decomposition of a digit over the
//! residue 2-basis, the index shift that moves a slot out of a wedge
//! pattern, and the square-root descent c^2 = AS(c) + c. `materialize` maps
//! a normal form back to a global form; the two are mutually inverse, which
//! the tests use as the correctness oracle.

use crate::forms::{dlog_expand, LogForm};
use crate::ground::GroundElem;
use crate::index::IndexSet;
use crate::poly::{
    basis_monomial_with_x, elem_to_ratx, upoly_to_elem, FinitePlace, Place, UPoly,
};
use crate::residue::{residue_field_decompose, slot_place, slot_x};
use std::collections::BTreeMap;
use std::sync::Arc;

/// (r, slots, pattern) key for the u and v tables.
pub type W1Key = (usize, IndexSet, IndexSet);

/// An (m-1)-form over the residue field of a place, coefficients stored as
/// reduced polynomial representatives (constants at the infinite place).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ResForm {
    pub coeffs: BTreeMap<IndexSet, UPoly>,
}

impl ResForm {
    pub fn zero() -> Self {
        ResForm::default()
    }

    pub fn add_term(&mut self, s: IndexSet, c: UPoly) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.remove(&s) {
            None => {
                self.coeffs.insert(s, c);
            }
            Some(old) => {
                let sum = old.add(&c);
                if !sum.is_zero() {
                    self.coeffs.insert(s, sum);
                }
            }
        }
    }

    pub fn add(&self, other: &ResForm) -> ResForm {
        let mut out = self.clone();
        for (s, c) in &other.coeffs {
            out.add_term(s.clone(), c.clone());
        }
        out
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// The normal form of a class in the completion at one place.
#[derive(Clone, Debug)]
pub struct W1Class {
    pub place: Place,
    pub ground_vars: usize,
    pub degree: usize,
    pub u: BTreeMap<W1Key, UPoly>,
    pub v: BTreeMap<W1Key, UPoly>,
    pub phi_prime: ResForm,
}

impl W1Class {
    pub fn zero(place: Place, ground_vars: usize, degree: usize) -> Self {
        W1Class {
            place,
            ground_vars,
            degree,
            u: BTreeMap::new(),
            v: BTreeMap::new(),
            phi_prime: ResForm::zero(),
        }
    }

    fn table_add(table: &mut BTreeMap<W1Key, UPoly>, key: W1Key, val: UPoly) {
        if val.is_zero() {
            return;
        }
        match table.remove(&key) {
            None => {
                table.insert(key, val);
            }
            Some(old) => {
                let sum = old.add(&val);
                if !sum.is_zero() {
                    table.insert(key, sum);
                }
            }
        }
    }

    fn canonical_value(&self, val: UPoly) -> UPoly {
        match &self.place {
            Place::Finite(p) => p.reduce(&val),
            Place::Inf => {
                debug_assert!(val.degree().map(|d| d == 0).unwrap_or(true));
                val
            }
        }
    }

    pub fn add_u(&mut self, r: usize, slots: IndexSet, pattern: IndexSet, val: UPoly) {
        debug_assert_eq!(slots.len(), self.degree);
        debug_assert!(!slots.contains(slot_place(self.ground_vars)));
        let val = self.canonical_value(val);
        Self::table_add(&mut self.u, (r, slots, pattern), val);
    }

    pub fn add_v(&mut self, r: usize, slots: IndexSet, pattern: IndexSet, val: UPoly) {
        debug_assert_eq!(slots.len(), self.degree);
        debug_assert!(r >= 1 && !pattern.is_empty());
        debug_assert!(pattern.shifts_up(&slots));
        let val = self.canonical_value(val);
        Self::table_add(&mut self.v, (r, slots, pattern), val);
    }

    pub fn add_phi(&mut self, slots: IndexSet, val: UPoly) {
        debug_assert_eq!(slots.len() + 1, self.degree);
        let val = self.canonical_value(val);
        self.phi_prime.add_term(slots, val);
    }

    /// Structural sum; both classes must live at the same place.
    pub fn add(&self, other: &W1Class) -> W1Class {
        assert!(self.place == other.place);
        let mut out = self.clone();
        for ((r, s, j), val) in &other.u {
            Self::table_add(&mut out.u, (*r, s.clone(), j.clone()), val.clone());
        }
        for ((r, s, j), val) in &other.v {
            Self::table_add(&mut out.v, (*r, s.clone(), j.clone()), val.clone());
        }
        out.phi_prime = out.phi_prime.add(&other.phi_prime);
        out
    }

    /// True when every table is empty, including the phi' part. A class can
    /// still be zero with a nonzero phi' when that form is a boundary over
    /// the residue field; deciding that is the caller's job.
    pub fn is_structurally_zero(&self) -> bool {
        self.u.is_empty() && self.v.is_empty() && self.phi_prime.is_structurally_zero()
    }

    /// True when the uniquely-determined u and v tables vanish.
    pub fn uv_is_zero(&self) -> bool {
        self.u.is_empty() && self.v.is_empty()
    }
}

/// Computes the local normal form of a global m-form at the given place.
/// The form lives over K+1 variables with x last.
pub fn residue(form: &LogForm, place: &Place) -> crate::Result<W1Class> {
    let k = form.nvars.checked_sub(1).expect("form needs an x variable");
    match place {
        Place::Finite(p) => {
            if p.ground_vars != k {
                return Err(crate::Error::DegreeMismatch(format!(
                    "place over {} ground variables, form over {}",
                    p.ground_vars, k
                )));
            }
            residue_finite(form, p)
        }
        Place::Inf => Ok(residue_inf(form, k)),
    }
}

/// Rewrites the form over the local slot system of the place: residue basis
/// directions plus a formal slot for dlog p.
fn to_local_slots(form: &LogForm, place: &FinitePlace) -> LogForm {
    let k = place.ground_vars;
    let nv = k + 2;
    let (replaced_slot, replacement) = match place.insep_index {
        None => {
            // dlog x = p/(x p') dlog p + sum_i t_i (dp/dt_i) / (x p') dlog t_i.
            let p_elem = upoly_to_elem(&place.poly, k);
            let xpp = GroundElem::var(k).mul(&upoly_to_elem(&place.poly.derivative_x(), k));
            let mut r = LogForm::term(
                nv,
                p_elem.div(&xpp),
                IndexSet::singleton(slot_place(k)),
            );
            for i in 0..k {
                let c = GroundElem::var(i)
                    .mul(&upoly_to_elem(&place.poly.partial_t(i), k))
                    .div(&xpp);
                r = r.add(&LogForm::term(nv, c, IndexSet::singleton(i)));
            }
            (slot_x(k), r)
        }
        Some(ip) => {
            // t_{i'} = (p + N)/D with D = sum_{J with i'} t^(J\i') g_J^2 and
            // N the complementary sum; then
            // dlog t_{i'} = p/(t_{i'} D) dlog p
            //             + sum_{j != i'} t_j (dN/dt_j + t_{i'} dD/dt_j)/(t_{i'} D) dlog t_j.
            let mut dhat = UPoly::zero();
            let mut nhat = UPoly::zero();
            for (j, g) in &place.square_parts {
                if j.contains(ip) {
                    dhat = dhat.add(
                        &g.square()
                            .scale(&crate::poly::ground_monomial(&j.remove(ip))),
                    );
                } else {
                    nhat = nhat.add(&g.square().scale(&crate::poly::ground_monomial(j)));
                }
            }
            let denom = GroundElem::var(ip).mul(&upoly_to_elem(&dhat, k));
            let p_elem = upoly_to_elem(&place.poly, k);
            let mut r = LogForm::term(
                nv,
                p_elem.div(&denom),
                IndexSet::singleton(slot_place(k)),
            );
            for j in 0..k {
                if j == ip {
                    continue;
                }
                let num = upoly_to_elem(&nhat.partial_t(j), k)
                    .add(&GroundElem::var(ip).mul(&upoly_to_elem(&dhat.partial_t(j), k)));
                r = r.add(&LogForm::term(
                    nv,
                    GroundElem::var(j).mul(&num).div(&denom),
                    IndexSet::singleton(j),
                ));
            }
            (ip, r)
        }
    };
    let mut out = LogForm::zero(nv, form.degree);
    for (s, a) in form.terms() {
        if s.contains(replaced_slot) {
            let rest = LogForm::term(nv, a.clone(), s.remove(replaced_slot));
            out = out.add(&rest.wedge(&replacement));
        } else {
            out = out.add(&LogForm::term(nv, a.clone(), s.clone()));
        }
    }
    out
}

fn residue_finite(form: &LogForm, place: &Arc<FinitePlace>) -> crate::Result<W1Class> {
    let k = place.ground_vars;
    let pslot = slot_place(k);
    let local = to_local_slots(form, place);
    let p = &place.poly;

    // Singular digits by level, merged per slot set, plus p-regular parts.
    let mut sing: BTreeMap<usize, BTreeMap<IndexSet, UPoly>> = BTreeMap::new();
    let mut regular: Vec<(UPoly, UPoly, IndexSet)> = Vec::new();
    let push_digit = |lvl: usize,
                          s: &IndexSet,
                          h: UPoly,
                          sing: &mut BTreeMap<usize, BTreeMap<IndexSet, UPoly>>| {
        if h.is_zero() {
            return;
        }
        let slot = sing.entry(lvl).or_default();
        let merged = match slot.remove(s) {
            None => h,
            Some(old) => old.add(&h),
        };
        if !merged.is_zero() {
            slot.insert(s.clone(), merged);
        }
    };

    for (s, c) in local.terms() {
        let (a, b) = elem_to_ratx(c, k);
        let mut e = 0usize;
        let mut b0 = b.clone();
        loop {
            let (q, r) = b0.divmod(p);
            if r.is_zero() {
                e += 1;
                b0 = q;
            } else {
                break;
            }
        }
        if e == 0 {
            regular.push((a, b0, s.clone()));
            continue;
        }
        let pe = p.pow(e);
        let h0 = a.mul(&b0.inv_mod(&pe)).rem(&pe);
        let mut rem = h0.clone();
        for i in 0..e {
            let (q, digit) = {
                let (q, r) = rem.divmod(p);
                (q, r)
            };
            push_digit(e - i, s, digit, &mut sing);
            rem = q;
        }
        let mut num = a.add(&h0.mul(&b0));
        for _ in 0..e {
            let (q, r) = num.divmod(p);
            debug_assert!(r.is_zero());
            num = q;
        }
        if !num.is_zero() {
            regular.push((num, b0, s.clone()));
        }
    }

    let mut out = W1Class::zero(Place::Finite(place.clone()), k, form.degree);

    // Engine: process levels from the top down; every rewriting move only
    // feeds strictly lower levels.
    while let Some((&lvl, _)) = sing.iter().next_back() {
        let terms = sing.remove(&lvl).unwrap();
        for (s, h) in terms {
            let dec = residue_field_decompose(place, &h)?;
            if !dec.witness.is_zero() {
                if lvl >= 2 {
                    push_digit(lvl - 1, &s, dec.witness.clone(), &mut sing);
                } else {
                    regular.push((dec.witness.clone(), UPoly::one(), s.clone()));
                }
            }
            for (j, f) in dec.parts {
                if lvl % 2 == 1 {
                    let r = (lvl - 1) / 2;
                    if !s.contains(pslot) {
                        out.add_u(r, s.clone(), j.clone(), f.clone());
                    } else {
                        let base = s.remove(pslot);
                        for jj in j.iter() {
                            if !base.contains(jj) {
                                out.add_u(r, base.insert(jj), j.clone(), f.clone());
                            }
                        }
                    }
                } else {
                    let r = lvl / 2;
                    if j.is_empty() {
                        // Square-root descent: (f/p^r)^2 = AS(f/p^r) + f/p^r.
                        push_digit(r, &s, f, &mut sing);
                    } else if j.shifts_up(&s) {
                        out.add_v(r, s.clone(), j.clone(), f.clone());
                    } else {
                        let jstar = j.max_slot().unwrap();
                        let base = s.remove(jstar);
                        for jj in j.iter() {
                            if jj != jstar && !base.contains(jj) {
                                out.add_v(r, base.insert(jj), j.clone(), f.clone());
                            }
                        }
                    }
                }
            }
        }
    }

    // p-regular parts survive only against dlog p, reduced into phi'.
    for (a, b0, s) in regular {
        if !s.contains(pslot) {
            continue;
        }
        let rbar = place.reduce(&a.mul(&b0.inv_mod(p)));
        out.add_phi(s.remove(pslot), rbar);
    }
    Ok(out)
}

fn residue_inf(form: &LogForm, k: usize) -> W1Class {
    let pslot = slot_place(k);
    let mut out = W1Class::zero(Place::Inf, k, form.degree);

    // The uniformizer is 1/x and dlog(1/x) = dlog x in characteristic 2, so
    // the x slot becomes the dlog p slot directly. Coefficients split into a
    // polynomial part in x (the singular digits: x^r has level r) and a
    // proper fraction, which has positive valuation and dies.
    let mut pending: BTreeMap<IndexSet, UPoly> = BTreeMap::new();
    for (s, c) in form.terms() {
        let snew = if s.contains(slot_x(k)) {
            s.remove(slot_x(k)).insert(pslot)
        } else {
            s.clone()
        };
        let (a, b) = elem_to_ratx(c, k);
        let (q, _) = a.divmod(&b);
        if q.is_zero() {
            continue;
        }
        let merged = match pending.remove(&snew) {
            None => q,
            Some(old) => old.add(&q),
        };
        if !merged.is_zero() {
            pending.insert(snew, merged);
        }
    }

    while let Some((s, mut q)) = pending.pop_first() {
        while let Some(r) = q.degree() {
            let c = q.coeff(r);
            q = q.add(&UPoly::monomial(r, c.clone()));
            if r == 0 {
                if s.contains(pslot) {
                    out.add_phi(s.remove(pslot), UPoly::constant(c));
                }
                continue;
            }
            for (j, a) in c.frobenius_decompose() {
                let val = UPoly::constant(a.clone());
                if r % 2 == 1 {
                    let rho = (r - 1) / 2;
                    if !s.contains(pslot) {
                        out.add_u(rho, s.clone(), j.clone(), val.clone());
                    } else {
                        let base = s.remove(pslot);
                        for jj in j.iter() {
                            if !base.contains(jj) {
                                out.add_u(rho, base.insert(jj), j.clone(), val.clone());
                            }
                        }
                    }
                } else {
                    let rho = r / 2;
                    if j.is_empty() {
                        // Square-root descent at the infinite place.
                        q = q.add(&UPoly::monomial(rho, a));
                    } else if j.shifts_up(&s) {
                        out.add_v(rho, s.clone(), j.clone(), val.clone());
                    } else {
                        let jstar = j.max_slot().unwrap();
                        let base = s.remove(jstar);
                        for jj in j.iter() {
                            if jj != jstar && !base.contains(jj) {
                                out.add_v(rho, base.insert(jj), j.clone(), val.clone());
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Maps a normal form back to a global form over K+1 variables. Slots become
/// honest dlog directions again; the dlog p direction expands through
/// dlog of the place polynomial.
pub fn materialize(w: &W1Class) -> LogForm {
    let k = w.ground_vars;
    let nv = k + 1;
    let pslot = slot_place(k);
    let mut out = LogForm::zero(nv, w.degree);

    let slot_form = |slots: &IndexSet| -> (IndexSet, bool) {
        // Residue basis slots keep their indices (x is already var k);
        // reports whether the dlog p direction is present.
        let mut plain = IndexSet::empty();
        let mut has_p = false;
        for i in slots.iter() {
            if i == pslot {
                has_p = true;
            } else {
                plain = plain.insert(i);
            }
        }
        (plain, has_p)
    };

    let dlog_p = match &w.place {
        Place::Finite(p) => dlog_expand(&upoly_to_elem(&p.poly, k), nv),
        Place::Inf => LogForm::term(nv, GroundElem::one(), IndexSet::singleton(slot_x(k))),
    };

    let emit = |coef: GroundElem, slots: &IndexSet, out: &mut LogForm| {
        let (plain, has_p) = slot_form(slots);
        let base = LogForm::term(nv, coef, plain);
        if has_p {
            *out = out.add(&base.wedge(&dlog_p));
        } else {
            *out = out.add(&base);
        }
    };

    for (table, odd) in [(&w.u, true), (&w.v, false)] {
        for ((r, slots, j), val) in table.iter() {
            let power = if odd { 2 * r + 1 } else { 2 * r };
            let numer = basis_monomial_with_x(j, slot_x(k)).mul(&val.square());
            let coef = match &w.place {
                Place::Finite(p) => {
                    let den = p.poly.pow(power);
                    crate::poly::ratx_to_elem(&numer, &den, k)
                }
                Place::Inf => upoly_to_elem(&numer.mul_xpow(power), k),
            };
            emit(coef, slots, &mut out);
        }
    }
    for (s, val) in &w.phi_prime.coeffs {
        let coef = upoly_to_elem(val, k);
        let with_p = s.insert(pslot);
        emit(coef, &with_p, &mut out);
    }
    out
}
