//! Differential forms over F2(v_0,...,v_{n-1}) in logarithmic coordinates.
//!
//! An m-form is stored as a sparse sum of terms a_S dlog v_S with S a
//! square-free index pattern of size m, using dv = v dlog v throughout. In
//! these coordinates the exterior derivative, wedge product, and the
//! Artin-Schreier operator a -> a^2 + a all act termwise by exact formulas,
//! which is what lets every reduction step in the local theory carry an
//! explicit witness.
//!
//! The last variable conventionally plays the role of x when a form lives
//! over a rational function field viewed as ground(x).

use crate::ground::{elem_text, GroundElem, VarCtx};
use crate::index::IndexSet;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct LogForm {
    pub nvars: usize,
    pub degree: usize,
    coeffs: BTreeMap<IndexSet, GroundElem>,
}

impl LogForm {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        LogForm {
            nvars,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn term(nvars: usize, a: GroundElem, s: IndexSet) -> Self {
        let mut f = LogForm::zero(nvars, s.len());
        f.add_term(a, s);
        f
    }

    /// A 0-form is just a field element.
    pub fn scalar(nvars: usize, a: GroundElem) -> Self {
        LogForm::term(nvars, a, IndexSet::empty())
    }

    pub fn add_term(&mut self, a: GroundElem, s: IndexSet) {
        debug_assert_eq!(s.len(), self.degree);
        debug_assert!(s.max_slot().map(|m| m < self.nvars).unwrap_or(true));
        if a.is_zero() {
            return;
        }
        match self.coeffs.remove(&s) {
            None => {
                self.coeffs.insert(s, a);
            }
            Some(old) => {
                let sum = old.add(&a);
                if !sum.is_zero() {
                    self.coeffs.insert(s, sum);
                }
            }
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, s: &IndexSet) -> GroundElem {
        self.coeffs.get(s).cloned().unwrap_or_else(GroundElem::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, &GroundElem)> {
        self.coeffs.iter()
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn add(&self, other: &LogForm) -> LogForm {
        debug_assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        out.nvars = self.nvars.max(other.nvars);
        for (s, a) in &other.coeffs {
            out.add_term(a.clone(), s.clone());
        }
        out
    }

    pub fn scale(&self, c: &GroundElem) -> LogForm {
        let mut out = LogForm::zero(self.nvars, self.degree);
        for (s, a) in &self.coeffs {
            out.add_term(a.mul(c), s.clone());
        }
        out
    }

    /// Wedge product; overlapping index patterns die, disjoint ones merge.
    /// No signs in characteristic 2.
    pub fn wedge(&self, other: &LogForm) -> LogForm {
        let mut out = LogForm::zero(self.nvars.max(other.nvars), self.degree + other.degree);
        for (s, a) in &self.coeffs {
            for (u, b) in &other.coeffs {
                if s.iter().all(|i| !u.contains(i)) {
                    let mut merged = s.clone();
                    for i in u.iter() {
                        merged = merged.insert(i);
                    }
                    out.add_term(a.mul(b), merged);
                }
            }
        }
        out
    }

    /// Exterior derivative: d(a dlog v_S) = sum_i v_i (da/dv_i) dlog v_{S+i}.
    pub fn exterior_d(&self) -> LogForm {
        let mut out = LogForm::zero(self.nvars, self.degree + 1);
        for (s, a) in &self.coeffs {
            for i in 0..self.nvars {
                if s.contains(i) {
                    continue;
                }
                let c = GroundElem::var(i).mul(&a.partial_derivative(i));
                out.add_term(c, s.insert(i));
            }
        }
        out
    }

    /// The Artin-Schreier operator, termwise a -> a^2 + a.
    pub fn artin_schreier(&self) -> LogForm {
        let mut out = LogForm::zero(self.nvars, self.degree);
        for (s, a) in &self.coeffs {
            out.add_term(a.square().add(a), s.clone());
        }
        out
    }

    /// Termwise Frobenius a -> a^2, the other half of the operator above.
    pub fn frobenius(&self) -> LogForm {
        let mut out = LogForm::zero(self.nvars, self.degree);
        for (s, a) in &self.coeffs {
            out.add_term(a.square(), s.clone());
        }
        out
    }

    /// Reinterprets the form over a larger variable list; contents unchanged.
    pub fn lift_vars(&self, nvars: usize) -> LogForm {
        assert!(nvars >= self.nvars);
        let mut out = self.clone();
        out.nvars = nvars;
        out
    }

    /// Drops the last variable. Fails if any coefficient or index uses it.
    pub fn restrict_vars(&self) -> crate::Result<LogForm> {
        assert!(self.nvars > 0);
        let last = self.nvars - 1;
        for (s, a) in &self.coeffs {
            if s.contains(last) || a.nvars_hint() > last {
                return Err(crate::Error::Unsupported(format!(
                    "form involves v_{} and does not restrict",
                    last
                )));
            }
        }
        let mut out = self.clone();
        out.nvars = last;
        Ok(out)
    }

    pub fn text(&self, ctx: &VarCtx) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (s, a) in &self.coeffs {
            let coef = format!("({})", elem_text(a, ctx));
            let logs: Vec<String> = s.iter().map(|i| format!("dlog {}", ctx.name(i))).collect();
            if logs.is_empty() {
                parts.push(coef);
            } else {
                parts.push(format!("{} {}", coef, logs.join(" ^ ")));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for LogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text(&VarCtx::ground(self.nvars)))
    }
}

/// dlog f as a 1-form: sum_i [v_i (df/dv_i) / f] dlog v_i. Exact for any
/// nonzero f, and additive in products of f's.
pub fn dlog_expand(f: &GroundElem, nvars: usize) -> LogForm {
    assert!(!f.is_zero(), "dlog of zero");
    let mut out = LogForm::zero(nvars, 1);
    for i in 0..nvars {
        out.add_term(f.dlog_coeff(i), IndexSet::singleton(i));
    }
    out
}

/// c^2 g dlog g ^ dlog v_S is exactly d(c^2 g dlog v_S); this returns that
/// witness so callers can discharge such terms without changing the class.
pub fn dexact_witness(c: &GroundElem, g: &GroundElem, s: &IndexSet, nvars: usize) -> LogForm {
    LogForm::term(nvars, c.square().mul(g), s.clone())
}

/// Measures how far the Artin-Schreier operator is from commuting with the
/// expansion of a dlog f ^ dlog v_S when f is presented as the sum of the
/// given monomial terms.
///
/// Writing E(a) = a dlog_expand(f) ^ dlog v_S, the defect is
/// AS(E(a)) + E(a^2 + a), and it is exact: the returned pair is
/// (defect, w) with defect = d(w). The recursion splits the presentation in
/// two, f = u + v, using
///   defect(a, f) = defect(au/f, u) + defect(av/f, v)
///                + (a/f)^2 uv dlog_expand(uv) ^ dlog v_S,
/// whose last term is d((a/f)^2 uv dlog v_S); single monomials have zero
/// defect because their dlog coefficients are 0 or 1.
pub fn presentation_defect(
    a: &GroundElem,
    terms: &[GroundElem],
    s: &IndexSet,
    nvars: usize,
) -> (LogForm, LogForm) {
    assert!(!terms.is_empty());
    if terms.len() == 1 {
        return (
            LogForm::zero(nvars, s.len() + 1),
            LogForm::zero(nvars, s.len()),
        );
    }
    let (left, right) = terms.split_at(terms.len() / 2);
    let u = left.iter().fold(GroundElem::zero(), |acc, t| acc.add(t));
    let v = right.iter().fold(GroundElem::zero(), |acc, t| acc.add(t));
    let f = u.add(&v);
    assert!(!f.is_zero() && !u.is_zero() && !v.is_zero());
    let (du, wu) = presentation_defect(&a.mul(&u).div(&f), left, s, nvars);
    let (dv, wv) = presentation_defect(&a.mul(&v).div(&f), right, s, nvars);
    let c = a.div(&f);
    let uv = u.mul(&v);
    let cross = dlog_expand(&uv, nvars)
        .scale(&c.square().mul(&uv))
        .wedge(&LogForm::term(nvars, GroundElem::one(), s.clone()));
    let witness = wu.add(&wv).add(&dexact_witness(&c, &uv, s, nvars));
    (du.add(&dv).add(&cross), witness)
}
