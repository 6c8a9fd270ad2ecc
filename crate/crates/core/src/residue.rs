//! Residue field arithmetic at a finite place.
//!
//! Elements of the residue field of p are represented by their reduced
//! polynomial representatives (degree < deg p). This module provides the
//! 2-basis structure of the residue field: which dlog directions are
//! independent, partial derivatives along them, the decomposition of an
//! element into squares against that basis, and the Teichmuller-style
//! multiplicative lifts built from it.
//!
//! Slot conventions at a place over F2(t1,...,tK): slots 0..K-1 are the
//! ground variables, slot K is x (a basis direction only at inseparable
//! places), slot K+1 stands for the uniformizer p itself in index sets.

use crate::ground::GroundElem;
use crate::index::IndexSet;
use crate::poly::{basis_monomial_with_x, FinitePlace, UPoly};
use std::collections::BTreeMap;

pub fn slot_x(ground_vars: usize) -> usize {
    ground_vars
}

/// The index-set slot standing for the dlog p direction.
pub fn slot_place(ground_vars: usize) -> usize {
    ground_vars + 1
}

/// The 2-basis slots of the residue field: all ground variables at a
/// separable place; at an inseparable place the dependent variable i' is
/// traded for x.
pub fn basis_slots(place: &FinitePlace) -> Vec<usize> {
    let k = place.ground_vars;
    match place.insep_index {
        None => (0..k).collect(),
        Some(ip) => (0..k).filter(|&j| j != ip).chain([slot_x(k)]).collect(),
    }
}

/// Partial derivative of the residue class of h along a basis slot.
///
/// Separable p: the slots are t_1..t_K and xbar depends on them through
/// p(xbar) = 0, giving d(xbar)/dt_i = p^{dt_i}(xbar) / p'(xbar).
/// Inseparable p: the slots are x and the t_j with j != i'; t_{i'} depends
/// on them with d(t_{i'})/dx = 0 and d(t_{i'})/dt_j = p^{dt_j} / p^{dt_{i'}}
/// evaluated at xbar.
pub fn residue_partial(place: &FinitePlace, h: &UPoly, slot: usize) -> crate::Result<UPoly> {
    let k = place.ground_vars;
    let p = &place.poly;
    let h = place.reduce(h);
    match place.insep_index {
        None => {
            if slot >= k {
                return Err(crate::Error::Unsupported(
                    "x is not a basis direction at a separable place".into(),
                ));
            }
            let dx_dt = p.partial_t(slot).rem(p).mul(&p.derivative_x().inv_mod(p));
            Ok(place.reduce(&h.partial_t(slot).add(&h.derivative_x().mul(&dx_dt))))
        }
        Some(ip) => {
            if slot == slot_x(k) {
                return Ok(place.reduce(&h.derivative_x()));
            }
            if slot == ip || slot >= k {
                return Err(crate::Error::Unsupported(format!(
                    "slot {} is not a basis direction at this place",
                    slot
                )));
            }
            let ratio = p.partial_t(slot).rem(p).mul(&p.partial_t(ip).inv_mod(p));
            Ok(place.reduce(&h.partial_t(slot).add(&h.partial_t(ip).mul(&ratio))))
        }
    }
}

/// Coefficient of dlog(basis slot) in the expansion of dlog(h) over the
/// residue field: b * (dh/db) / h for the basis element b of the slot.
pub fn residue_dlog_coeff(place: &FinitePlace, h: &UPoly, slot: usize) -> crate::Result<UPoly> {
    let k = place.ground_vars;
    let hr = place.reduce(h);
    if hr.is_zero() {
        return Err(crate::Error::DivisionByZero);
    }
    let b = if slot == slot_x(k) {
        UPoly::x()
    } else {
        UPoly::constant(GroundElem::var(slot))
    };
    let dh = residue_partial(place, &hr, slot)?;
    Ok(place.reduce(&b.mul(&dh).mul(&hr.inv_mod(&place.poly))))
}

/// Result of writing an element as squares against the residue 2-basis:
/// u = sum_J B^J f_J^2 + witness * p, exactly as polynomials, with J over
/// square-free patterns of basis slots.
#[derive(Clone, Debug)]
pub struct SquareParts {
    pub parts: BTreeMap<IndexSet, UPoly>,
    pub witness: UPoly,
}

/// Writes the residue class of u over the 2-basis of the residue field.
pub fn residue_field_decompose(place: &FinitePlace, u: &UPoly) -> crate::Result<SquareParts> {
    let ur = place.reduce(u);
    if ur.is_zero() {
        return Ok(SquareParts {
            parts: BTreeMap::new(),
            witness: UPoly::zero(),
        });
    }
    let parts = if place.separable {
        decompose_separable(place, &ur)
    } else {
        decompose_semilinear(place, &ur, &basis_slots(place))?
    };
    let k = place.ground_vars;
    let mut acc = ur.clone();
    for (j, f) in &parts {
        acc = acc.add(&basis_monomial_with_x(j, slot_x(k)).mul(&f.square()));
    }
    let (witness, r) = acc.divmod(&place.poly);
    if !r.is_zero() {
        return Err(crate::Error::Unsupported(format!(
            "square decomposition failed at {:?}; the place may be reducible",
            place
        )));
    }
    Ok(SquareParts { parts, witness })
}

/// Separable route: with p = P(x^2) + x Q(x^2) we have x = P/Q at the root,
/// so h = h_e(x^2) + x h_o(x^2) = N(x^2) Q(x^2) / Q(x^2)^2 with
/// N = h_e Q + P h_o. Frobenius-splitting the coefficients of N*Q over the
/// ground field then yields the square parts after one inverse of Q(x^2).
fn decompose_separable(place: &FinitePlace, u: &UPoly) -> BTreeMap<IndexSet, UPoly> {
    let p = &place.poly;
    let (pe, po) = p.x_parity_split();
    let (he, ho) = u.x_parity_split();
    let ntilde = he.mul(&po).add(&pe.mul(&ho)).mul(&po);
    let mut raw: BTreeMap<IndexSet, UPoly> = BTreeMap::new();
    for (j, c) in ntilde.coeffs() {
        for (s, mu) in c.frobenius_decompose() {
            raw.entry(s)
                .or_insert_with(UPoly::zero)
                .add_in_place(j, mu);
        }
    }
    let qinv = po.compose_x2().inv_mod(p);
    raw.into_iter()
        .map(|(s, f)| (s, place.reduce(&f.mul(&qinv))))
        .filter(|(_, f)| !f.is_zero())
        .collect()
}

/// General route: solve u = sum_J B^J f_J^2 as a linear system over the
/// ground field. The squares make the system Frobenius-semilinear in the
/// unknown coefficients; splitting every scalar over the square-free
/// t-patterns of the ground field and taking square roots per pattern turns
/// it into an honest linear system.
pub(crate) fn decompose_semilinear(
    place: &FinitePlace,
    u: &UPoly,
    slots: &[usize],
) -> crate::Result<BTreeMap<IndexSet, UPoly>> {
    let d = place.degree;
    let k = place.ground_vars;
    let patterns = subsets(slots);
    let ground_patterns = subsets(&(0..k).collect::<Vec<_>>());
    let row_of = |l: usize, s: &IndexSet| -> usize {
        l * ground_patterns.len()
            + ground_patterns.iter().position(|t| t == s).expect("pattern")
    };
    let ncols = patterns.len() * d;
    let nrows = d * ground_patterns.len();
    let mut mat = vec![vec![GroundElem::zero(); ncols + 1]; nrows];
    for (jp, j) in patterns.iter().enumerate() {
        let bj = basis_monomial_with_x(j, slot_x(k));
        for i in 0..d {
            let col = jp * d + i;
            let m = place.reduce(&bj.mul_xpow(2 * i));
            for (l, c) in m.coeffs() {
                for (s, mu) in c.frobenius_decompose() {
                    let r = row_of(l, &s);
                    mat[r][col] = mat[r][col].add(&mu);
                }
            }
        }
    }
    for (l, c) in u.coeffs() {
        for (s, mu) in c.frobenius_decompose() {
            let r = row_of(l, &s);
            mat[r][ncols] = mat[r][ncols].add(&mu);
        }
    }
    let sol = solve_linear(&mut mat, ncols)?;
    let mut parts = BTreeMap::new();
    for (jp, j) in patterns.iter().enumerate() {
        let mut f = UPoly::zero();
        for (i, c) in sol[jp * d..(jp + 1) * d].iter().enumerate() {
            f = f.add(&UPoly::monomial(i, c.clone()));
        }
        if !f.is_zero() {
            parts.insert(j.clone(), f);
        }
    }
    Ok(parts)
}

fn subsets(slots: &[usize]) -> Vec<IndexSet> {
    let mut out = Vec::with_capacity(1 << slots.len());
    for mask in 0u64..(1u64 << slots.len()) {
        let picked: Vec<usize> = slots
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, s)| *s)
            .collect();
        out.push(IndexSet::from_slice(&picked));
    }
    out
}

/// Gaussian elimination over the ground field; `mat` is augmented with one
/// right-hand column. Returns the unique solution or an error if the system
/// is inconsistent or underdetermined in a way that leaves the RHS unmet.
fn solve_linear(mat: &mut [Vec<GroundElem>], ncols: usize) -> crate::Result<Vec<GroundElem>> {
    let nrows = mat.len();
    let mut pivot_of_col = vec![usize::MAX; ncols];
    let mut rank = 0;
    for col in 0..ncols {
        let pr = (rank..nrows).find(|&r| !mat[r][col].is_zero());
        let pr = match pr {
            None => continue,
            Some(pr) => pr,
        };
        mat.swap(rank, pr);
        let inv = mat[rank][col].inv();
        for c in col..=ncols {
            mat[rank][c] = mat[rank][c].mul(&inv);
        }
        for r in 0..nrows {
            if r != rank && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for c in col..=ncols {
                    let delta = factor.mul(&mat[rank][c]);
                    mat[r][c] = mat[r][c].add(&delta);
                }
            }
        }
        pivot_of_col[col] = rank;
        rank += 1;
    }
    for r in rank..nrows {
        if !mat[r][ncols].is_zero() {
            return Err(crate::Error::Unsupported(
                "inconsistent square decomposition system".into(),
            ));
        }
    }
    Ok((0..ncols)
        .map(|c| {
            if pivot_of_col[c] == usize::MAX {
                GroundElem::zero()
            } else {
                mat[pivot_of_col[c]][ncols].clone()
            }
        })
        .collect())
}

/// Multiplicative lift of a residue class to depth N: the depth-0 lift is
/// the reduced representative; at depth N each square part is lifted at
/// depth N-1 and reassembled, giving successive lifts that agree modulo
/// p^(2^N) and are multiplicative to the same precision.
pub fn teichmuller(place: &FinitePlace, u: &UPoly, depth: usize) -> crate::Result<UPoly> {
    let ur = place.reduce(u);
    if depth == 0 || ur.is_zero() {
        return Ok(ur);
    }
    let dec = residue_field_decompose(place, &ur)?;
    let k = place.ground_vars;
    let mut acc = UPoly::zero();
    for (j, f) in &dec.parts {
        let lift = teichmuller(place, f, depth - 1)?;
        acc = acc.add(&basis_monomial_with_x(j, slot_x(k)).mul(&lift.square()));
    }
    Ok(acc)
}

/// At a degree-1 place x + c the residue field is the ground field itself,
/// by evaluating at x = c.
pub fn to_ground_deg1(place: &FinitePlace, h: &UPoly) -> GroundElem {
    debug_assert_eq!(place.degree, 1);
    h.eval(&place.const_term())
}

impl UPoly {
    pub(crate) fn add_in_place(&mut self, e: usize, c: GroundElem) {
        let delta = UPoly::monomial(e, c);
        *self = self.add(&delta);
    }
}
