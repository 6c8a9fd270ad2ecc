//! Transfer maps from local normal forms back to the ground tower, and the
//! global reciprocity sum built from them.
//!
//! For a place p of the rational function field, the residue of a class is
//! a local normal form; the transfer pushes its residue-field part down to
//! the ground tower through the coefficient functional of p (the trace-like
//! functional reading off the x^(d-1) coefficient). On Pfister generators
//! the composite has closed forms: finite sums of binary blocks whose
//! entries are coefficients of p and the recurrence sequence gamma attached
//! to p. The transfer of a full normal form is assembled termwise from
//! those closed forms, with extra contributions at inseparable places from
//! the singular table entries that involve the residue of x.
//!
//! The reciprocity sum adds the transferred residues over every place that
//! can carry one (denominator factors, the place of x, and infinity); the
//! total is always zero in cohomology, which the degree-0 decision
//! procedure certifies on the assembled form.

use crate::cohomology::{decide_zero, support_places, DecideOpts, Decision};
use crate::forms::{dlog_expand, LogForm};
use crate::ground::GroundElem;
use crate::index::IndexSet;
use crate::local::{residue, ResForm, W1Class};
use crate::poly::{basis_monomial_with_x, FinitePlace, Place, UPoly};
use crate::residue::{slot_place, slot_x};
use crate::witt::QuadForm;
use std::sync::Arc;

/// The regular part of a local normal form: its residue-field class, the
/// component paired against the dlog of the uniformizer.
pub fn theta(w: &W1Class) -> ResForm {
    w.phi_prime.clone()
}

/// Which closed-form transfer rule to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedFormKind {
    /// The transferred block [1, a x^i].
    Unit,
    /// The transferred Pfister form <<x; a x^i]], needs i >= 1.
    XPfister,
    /// The transferred Pfister form <<x; a]] at an inseparable place.
    InsepConst,
}

/// Evaluates the closed form of the Scharlau transfer on a generator over
/// the residue field, as an explicit sum of blocks over the ground tower.
/// The entries are built from the coefficients p_j of the place polynomial
/// (p_j multiplying x^(d-j)) and its recurrence sequence gamma.
pub fn transfer_closed_form(
    kind: ClosedFormKind,
    a: &GroundElem,
    i: usize,
    place: &Arc<FinitePlace>,
) -> crate::Result<QuadForm> {
    let d = place.degree;
    let k = place.ground_vars;
    match kind {
        ClosedFormKind::Unit => {
            let mut blocks = Vec::new();
            if d % 2 == 0 {
                for j in 0..d / 2 {
                    let g = place.gamma(i as i64 - (2 * j + 1) as i64);
                    blocks.push((place.p_coeff(2 * j + 1), a.mul(&g)));
                }
            } else {
                for j in 0..=d / 2 {
                    let g = place.gamma(i as i64 - (2 * j) as i64);
                    blocks.push((place.p_coeff(2 * j), a.mul(&g)));
                }
            }
            Ok(QuadForm::from_blocks(k, blocks))
        }
        ClosedFormKind::XPfister => {
            if i == 0 {
                return Err(crate::Error::Unsupported(
                    "the x-Pfister rule needs a positive power of x; constants at \
                     inseparable places go through the constant rule"
                        .into(),
                ));
            }
            let mut out = QuadForm::zero(k);
            for j in 1..=d {
                let pj = place.p_coeff(j);
                if pj.is_zero() {
                    continue;
                }
                let b = a.mul(&pj).mul(&place.gamma(i as i64 - j as i64));
                if b.is_zero() {
                    continue;
                }
                out = out.add(&QuadForm::pfister(k, &[pj], &b));
            }
            Ok(out)
        }
        ClosedFormKind::InsepConst => {
            if place.separable {
                return Err(crate::Error::Unsupported(
                    "the constant x-Pfister rule needs an inseparable place".into(),
                ));
            }
            if a.is_zero() {
                return Ok(QuadForm::zero(k));
            }
            Ok(QuadForm::pfister(k, &[place.const_term()], a))
        }
    }
}

/// Transfers a residue-field class down to the ground tower, landing in a
/// form of the same degree over the ground variables only. At the infinite
/// place the residue field is the ground tower itself and the transfer is
/// the identity. At a finite place each coefficient is read off power by
/// power of the residue of x: plain terms pick up the Arf invariant of the
/// transferred unit block, terms against the residue of x (inseparable
/// places only) expand into dlog factors of the place coefficients.
pub fn t_p_star(
    place: &Place,
    psi: &ResForm,
    ground_vars: usize,
    psi_degree: usize,
) -> crate::Result<LogForm> {
    let k = ground_vars;
    let xs = slot_x(k);
    let ps = slot_place(k);
    let mut out = LogForm::zero(k, psi_degree);
    for (s, c) in &psi.coeffs {
        if s.contains(ps) {
            return Err(crate::Error::Unsupported(
                "a residue-field class cannot involve the uniformizer direction".into(),
            ));
        }
        match place {
            Place::Inf => {
                if s.contains(xs) {
                    return Err(crate::Error::Unsupported(
                        "the residue field at infinity has no x direction".into(),
                    ));
                }
                out.add_term(c.coeff(0), s.clone());
            }
            Place::Finite(pl) => {
                if !s.contains(xs) {
                    let mut acc = GroundElem::zero();
                    for (i, ai) in c.coeffs() {
                        let q = transfer_closed_form(ClosedFormKind::Unit, ai, i, pl)?;
                        acc = acc.add(&q.arf());
                    }
                    out.add_term(acc, s.clone());
                    continue;
                }
                if pl.separable {
                    return Err(crate::Error::Unsupported(
                        "the residue field of a separable place has no x direction".into(),
                    ));
                }
                let t = s.remove(xs);
                for (i, ai) in c.coeffs() {
                    if i == 0 {
                        wedge_in(&mut out, ai.clone(), &t, &pl.const_term(), k);
                    } else {
                        for j in 1..=pl.degree {
                            let pj = pl.p_coeff(j);
                            if pj.is_zero() {
                                continue;
                            }
                            let coeff = ai.mul(&pj).mul(&pl.gamma(i as i64 - j as i64));
                            wedge_in(&mut out, coeff, &t, &pj, k);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Adds coeff * dlog(t_slots) ^ dlog(g) to the accumulator.
fn wedge_in(out: &mut LogForm, coeff: GroundElem, slots: &IndexSet, g: &GroundElem, k: usize) {
    if coeff.is_zero() {
        return;
    }
    let base = LogForm::term(k, coeff, slots.clone());
    *out = out.add(&base.wedge(&dlog_expand(g, k)));
}

/// The full transfer of a local normal form, a class of one degree lower
/// over the ground tower. Away from inseparable places this is the transfer
/// of the regular part. At an inseparable place the table entries whose
/// slot set involves the residue of x also contribute: each adds its
/// reduced value's constant coordinate, divided by the matching power of
/// the constant term of p, on the slot set with the x direction removed
/// (and a dlog factor of the constant term when the uniformizer direction
/// was present too).
pub fn s_p_star(w: &W1Class) -> crate::Result<LogForm> {
    if w.degree == 0 {
        return Err(crate::Error::DegreeMismatch(
            "transfers need a class of degree at least one".into(),
        ));
    }
    let k = w.ground_vars;
    let out_degree = w.degree - 1;
    let mut out = t_p_star(&w.place, &w.phi_prime, k, out_degree)?;
    let pl = match &w.place {
        Place::Finite(pl) if !pl.separable => pl.clone(),
        _ => return Ok(out),
    };
    let xs = slot_x(k);
    let ps = slot_place(k);
    let pc = pl.const_term();
    for ((r, slots, pattern), val) in &w.u {
        if !slots.contains(xs) {
            continue;
        }
        let monomial = basis_monomial_with_x(pattern, xs);
        let c0 = pl.reduce(&monomial.mul(&val.mul(val))).coeff(0);
        if c0.is_zero() {
            continue;
        }
        let coeff = c0.div(&pc.pow(2 * *r as u32 + 1));
        out.add_term(coeff, slots.remove(xs));
    }
    for ((r, slots, pattern), val) in &w.v {
        if !slots.contains(xs) {
            continue;
        }
        let monomial = basis_monomial_with_x(pattern, xs);
        let c0 = pl.reduce(&monomial.mul(&val.mul(val))).coeff(0);
        if c0.is_zero() {
            continue;
        }
        let coeff = c0.div(&pc.pow(2 * *r as u32));
        if slots.contains(ps) {
            wedge_in(&mut out, coeff, &slots.remove(xs).remove(ps), &pc, k);
        } else {
            out.add_term(coeff, slots.remove(xs));
        }
    }
    Ok(out)
}

/// Closed form of the transferred residue at infinity of
/// a x^kpow dlog(t_slots) ^ dlog(p), optionally with a dlog(x) factor
/// before dlog(p). Used to cross-check the residue and transfer pipeline
/// against an independent evaluation.
pub fn inf_transfer_closed_form(
    a: &GroundElem,
    kpow: usize,
    slots: &IndexSet,
    place: &Arc<FinitePlace>,
    with_x: bool,
) -> crate::Result<LogForm> {
    let k = place.ground_vars;
    if !with_x {
        let coeff = transfer_closed_form(ClosedFormKind::Unit, a, kpow, place)?.arf();
        let mut out = LogForm::zero(k, slots.len());
        out.add_term(coeff, slots.clone());
        return Ok(out);
    }
    if kpow == 0 {
        return Err(crate::Error::Unsupported(
            "the dlog(x) variant needs a positive power of x".into(),
        ));
    }
    let mut out = LogForm::zero(k, slots.len() + 1);
    for j in 1..=place.degree {
        let pj = place.p_coeff(j);
        if pj.is_zero() {
            continue;
        }
        let coeff = a.mul(&pj).mul(&place.gamma(kpow as i64 - j as i64));
        wedge_in(&mut out, coeff, slots, &pj, k);
    }
    Ok(out)
}

/// The transferred residues of a class at every relevant place, their sum
/// over the ground tower, and the verdict on that sum. The sum is a
/// cohomological identity, so a sound pipeline never yields a certified
/// nonzero total.
#[derive(Clone, Debug)]
pub struct ReciprocityReport {
    pub terms: Vec<(Place, LogForm)>,
    pub total: LogForm,
    pub decision: Decision,
}

/// Sums the transferred residues of `form` over its support: the finite
/// places dividing a coefficient denominator, the place of x (whose residue
/// can be nonzero even when x divides no denominator, since x is a
/// uniformizer there), and infinity.
pub fn reciprocity_sum(form: &LogForm, opts: &DecideOpts) -> crate::Result<ReciprocityReport> {
    if form.degree == 0 {
        return Err(crate::Error::DegreeMismatch(
            "the reciprocity sum needs a class of degree at least one".into(),
        ));
    }
    let k = form.nvars - 1;
    let mut places = support_places(form, opts)?;
    let x_place = Place::Finite(FinitePlace::new(UPoly::x(), k)?);
    if !places.contains(&x_place) {
        places.insert(0, x_place);
    }
    let mut terms = Vec::new();
    let mut total = LogForm::zero(k, form.degree - 1);
    for place in places {
        let w = residue(form, &place)?;
        if w.is_structurally_zero() {
            continue;
        }
        let term = s_p_star(&w)?;
        total = total.add(&term);
        terms.push((place, term));
    }
    let decision = decide_zero(&total, opts)?;
    Ok(ReciprocityReport {
        terms,
        total,
        decision,
    })
}
