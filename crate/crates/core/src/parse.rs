//! Text syntax for field elements, cohomology classes, places, and
//! quadratic forms.
//!
//! Rational functions use `+ * / ^` with parentheses over the variables
//! `t1..tK` and `x`; constants are `0` and `1`. A class is a sum of terms
//! `(coefficient) dlog(arg) ^ dlog(arg) ^ ...`; the coefficient may be
//! omitted (unit) and a dlog argument may be a bare variable. Arguments
//! that are not basis variables are expanded over the dlog basis, so
//! parsing normalizes. Quadratic forms are sums of blocks `[a,b]` and
//! Pfister generators `<<s1,...,sm;b]]`. Places are monic polynomials in
//! x, or `inf` (also written `1/x`) for the degree valuation.

use crate::forms::{dlog_expand, LogForm};
use crate::ground::{elem_text, GroundElem, Mono, PolyF2, VarCtx};
use crate::poly::{classify_place, FinitePlace, Place, PlaceClassification, PlaceVerdict, UPoly};
use crate::witt::QuadForm;
use std::collections::BTreeMap;

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    ground_vars: usize,
    with_x: bool,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, ground_vars: usize, with_x: bool) -> Self {
        Parser {
            s: text.as_bytes(),
            pos: 0,
            ground_vars,
            with_x,
        }
    }

    fn err<T>(&self, at: usize, message: &str) -> crate::Result<T> {
        Err(crate::Error::Syntax {
            position: at,
            message: message.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> crate::Result<()> {
        match self.peek() {
            Some(c) if c == b => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(self.pos, &format!("expected '{}'", b as char)),
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn expect_end(&mut self) -> crate::Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err(self.pos, "unexpected trailing input")
        }
    }

    /// Reads an identifier [a-z][a-z0-9]* if one starts here.
    fn try_ident(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        if !matches!(self.s.get(self.pos), Some(c) if c.is_ascii_lowercase()) {
            return None;
        }
        let mut end = self.pos + 1;
        while matches!(self.s.get(end), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit()) {
            end += 1;
        }
        self.pos = end;
        Some((start, String::from_utf8_lossy(&self.s[start..end]).into_owned()))
    }

    fn parse_uint(&mut self) -> crate::Result<u32> {
        self.skip_ws();
        let start = self.pos;
        let mut val: u64 = 0;
        while let Some(c) = self.s.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            val = val * 10 + (c - b'0') as u64;
            if val > 1_000_000 {
                return self.err(start, "number too large");
            }
            self.pos += 1;
        }
        if self.pos == start {
            return self.err(start, "expected a number");
        }
        Ok(val as u32)
    }

    fn var_by_name(&mut self, at: usize, name: &str) -> crate::Result<GroundElem> {
        if name == "x" {
            if self.with_x {
                return Ok(GroundElem::var(self.ground_vars));
            }
            return self.err(at, "x is not available in this context");
        }
        if let Some(digits) = name.strip_prefix('t') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let idx: usize = digits.parse().map_err(|_| crate::Error::Syntax {
                    position: at,
                    message: "variable index too large".into(),
                })?;
                if idx >= 1 && idx <= self.ground_vars {
                    return Ok(GroundElem::var(idx - 1));
                }
                return self.err(
                    at,
                    &format!("variable {} is outside the tower t1..t{}", name, self.ground_vars),
                );
            }
        }
        if name == "dlog" {
            return self.err(at, "dlog is not a value here");
        }
        self.err(at, &format!("unknown name '{}'", name))
    }

    fn atom(&mut self) -> crate::Result<GroundElem> {
        match self.peek() {
            Some(b'(') => {
                self.eat(b'(')?;
                let e = self.expr()?;
                self.eat(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.parse_uint()?;
                if n % 2 == 0 {
                    Ok(GroundElem::zero())
                } else {
                    Ok(GroundElem::one())
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let (at, name) = self.try_ident().unwrap();
                self.var_by_name(at, &name)
            }
            _ => self.err(self.pos, "expected a value"),
        }
    }

    fn factor(&mut self) -> crate::Result<GroundElem> {
        let mut base = self.atom()?;
        while self.peek() == Some(b'^') {
            self.eat(b'^')?;
            let e = self.parse_uint()?;
            base = base.pow(e);
        }
        Ok(base)
    }

    fn term(&mut self) -> crate::Result<GroundElem> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.eat(b'*')?;
                    acc = acc.mul(&self.factor()?);
                }
                Some(b'/') => {
                    self.eat(b'/')?;
                    let at = self.pos;
                    let f = self.factor()?;
                    if f.is_zero() {
                        return self.err(at, "division by zero");
                    }
                    acc = acc.div(&f);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn expr(&mut self) -> crate::Result<GroundElem> {
        let mut acc = self.term()?;
        while self.peek() == Some(b'+') {
            self.eat(b'+')?;
            acc = acc.add(&self.term()?);
        }
        Ok(acc)
    }

    /// One class term: optional parenthesized coefficient, then zero or
    /// more dlog factors joined by '^'.
    fn class_term(&mut self) -> crate::Result<(usize, GroundElem, Vec<GroundElem>)> {
        self.skip_ws();
        let start = self.pos;
        let coeff = if self.peek() == Some(b'(') {
            self.eat(b'(')?;
            let e = self.expr()?;
            self.eat(b')')?;
            e
        } else {
            GroundElem::one()
        };
        let mut dlogs = Vec::new();
        loop {
            self.skip_ws();
            let save = self.pos;
            match self.try_ident() {
                Some((_, name)) if name == "dlog" => {
                    let arg = if self.peek() == Some(b'(') {
                        self.eat(b'(')?;
                        let at = self.pos;
                        let e = self.expr()?;
                        self.eat(b')')?;
                        (at, e)
                    } else {
                        let (at, name) = match self.try_ident() {
                            Some(v) => v,
                            None => return self.err(self.pos, "expected a dlog argument"),
                        };
                        let e = self.var_by_name(at, &name)?;
                        (at, e)
                    };
                    if arg.1.is_zero() {
                        return Err(crate::Error::DivisionByZero);
                    }
                    dlogs.push(arg.1);
                    if self.peek() == Some(b'^') {
                        self.eat(b'^')?;
                        continue;
                    }
                    break;
                }
                Some(_) => {
                    self.pos = save;
                    if dlogs.is_empty() {
                        return self.err(save, "expected dlog or end of term");
                    }
                    break;
                }
                None => break,
            }
        }
        if dlogs.is_empty() && start == self.pos {
            return self.err(start, "expected a class term");
        }
        Ok((start, coeff, dlogs))
    }
}

/// Parses a rational function over the tower, with `x` allowed only when
/// `with_x` is set (as variable index `ground_vars`).
pub fn parse_elem(text: &str, ground_vars: usize, with_x: bool) -> crate::Result<GroundElem> {
    let mut p = Parser::new(text, ground_vars, with_x);
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses a cohomology class over F2(t1..tK)(x): a sum of coefficient
/// times dlog wedge terms, all of one degree. Non-variable dlog arguments
/// are expanded over the basis, so the result is normalized.
pub fn parse_class(text: &str, ground_vars: usize) -> crate::Result<LogForm> {
    let mut p = Parser::new(text, ground_vars, true);
    let nvars = ground_vars + 1;
    let mut terms = Vec::new();
    loop {
        terms.push(p.class_term()?);
        if p.peek() == Some(b'+') {
            p.eat(b'+')?;
        } else {
            break;
        }
    }
    p.expect_end()?;
    let degree = terms[0].2.len();
    let mut out = LogForm::zero(nvars, degree);
    for (at, coeff, dlogs) in terms {
        if dlogs.len() != degree {
            return Err(crate::Error::Syntax {
                position: at,
                message: format!(
                    "term has {} dlog factors, expected {}",
                    dlogs.len(),
                    degree
                ),
            });
        }
        let mut f = LogForm::scalar(nvars, coeff);
        for arg in &dlogs {
            f = f.wedge(&dlog_expand(arg, nvars));
        }
        out = out.add(&f);
    }
    Ok(out)
}

/// Renders a class in the syntax `parse_class` accepts.
pub fn class_text(form: &LogForm, ground_vars: usize) -> String {
    form.text(&VarCtx::with_x(ground_vars + 1))
}

/// Renders a form over the ground tower only (no x variable).
pub fn ground_class_text(form: &LogForm, ground_vars: usize) -> String {
    form.text(&VarCtx::ground(ground_vars))
}

/// Converts a field element into a polynomial in x with coefficients in
/// the ground tower. Fails when the denominator involves x.
pub fn elem_to_upoly(a: &GroundElem, ground_vars: usize) -> crate::Result<UPoly> {
    let k = ground_vars;
    if a.den().deg_var(k) > 0 {
        return Err(crate::Error::BadPlace(
            "the denominator involves x; a place polynomial needs ground coefficients".into(),
        ));
    }
    let den = GroundElem::from_poly(a.den().clone());
    let mut by_power: BTreeMap<usize, Vec<Mono>> = BTreeMap::new();
    for m in a.num().terms() {
        let e = m.exp(k) as usize;
        let mut exps: Vec<u32> = (0..m.nvars_hint()).map(|i| m.exp(i)).collect();
        if exps.len() > k {
            exps[k] = 0;
        }
        by_power.entry(e).or_default().push(Mono::from_exps(&exps));
    }
    let mut out = UPoly::zero();
    for (e, monos) in by_power {
        let c = GroundElem::from_poly(PolyF2::from_monos(monos)).div(&den);
        out = out.add(&UPoly::monomial(e, c));
    }
    Ok(out)
}

/// The inverse of `elem_to_upoly`: reads a polynomial in x back as an
/// element of the full field, with x as variable index `ground_vars`.
pub fn upoly_to_elem(p: &UPoly, ground_vars: usize) -> GroundElem {
    let x = GroundElem::var(ground_vars);
    let mut acc = GroundElem::zero();
    for (e, c) in p.coeffs() {
        let mut term = c.clone();
        for _ in 0..e {
            term = term.mul(&x);
        }
        acc = acc.add(&term);
    }
    acc
}

/// Parses a place: `inf` (or `1/x`) for the degree valuation, otherwise a
/// monic polynomial in x that certifies irreducible within the budget.
pub fn parse_place(
    text: &str,
    ground_vars: usize,
    budget: usize,
) -> crate::Result<(Place, Option<PlaceClassification>)> {
    let trimmed = text.trim();
    if trimmed == "inf" || trimmed == "1/x" {
        return Ok((Place::Inf, None));
    }
    let elem = parse_elem(trimmed, ground_vars, true)?;
    let poly = elem_to_upoly(&elem, ground_vars)?;
    let class = classify_place(&poly, ground_vars, budget)?;
    match &class.verdict {
        PlaceVerdict::Irreducible(_) => {}
        PlaceVerdict::Reducible(f) => {
            return Err(crate::Error::BadPlace(format!(
                "reducible: {} divides it",
                f.text(ground_vars)
            )));
        }
        PlaceVerdict::Inconclusive => {
            return Err(crate::Error::BadPlace(
                "could not certify irreducibility within the budget".into(),
            ));
        }
    }
    let place = FinitePlace::new(poly, ground_vars)?;
    Ok((Place::Finite(place), Some(class)))
}

pub fn place_text(place: &Place, ground_vars: usize) -> String {
    match place {
        Place::Inf => "inf".to_string(),
        Place::Finite(p) => p.poly.text(ground_vars),
    }
}

/// Parses a quadratic form: blocks `[a,b]` and Pfister generators
/// `<<s1,...,sm;b]]` joined by '+'.
pub fn parse_quad_form(
    text: &str,
    ground_vars: usize,
    with_x: bool,
) -> crate::Result<QuadForm> {
    let mut p = Parser::new(text, ground_vars, with_x);
    let nvars = if with_x { ground_vars + 1 } else { ground_vars };
    let mut out = QuadForm::zero(nvars);
    loop {
        match p.peek() {
            Some(b'[') => {
                p.eat(b'[')?;
                let a = p.expr()?;
                p.eat(b',')?;
                let b = p.expr()?;
                p.eat(b']')?;
                out = out.add(&QuadForm::block(nvars, a, b));
            }
            Some(b'<') => {
                p.eat(b'<')?;
                p.eat(b'<')?;
                let mut slots = vec![p.expr()?];
                while p.peek() == Some(b',') {
                    p.eat(b',')?;
                    slots.push(p.expr()?);
                }
                p.eat(b';')?;
                let at = p.pos;
                let b = p.expr()?;
                p.eat(b']')?;
                p.eat(b']')?;
                if slots.iter().any(|s| s.is_zero()) || b.is_zero() {
                    return p.err(at, "Pfister entries must be nonzero");
                }
                out = out.add(&QuadForm::pfister(nvars, &slots, &b));
            }
            _ => return p.err(p.pos, "expected '[' or '<<'"),
        }
        if p.peek() == Some(b'+') {
            p.eat(b'+')?;
        } else {
            break;
        }
    }
    p.expect_end()?;
    Ok(out)
}

/// Renders a quadratic form as a sum of blocks (the Pfister presentation
/// when one is attached).
pub fn quad_text(q: &QuadForm, ground_vars: usize, with_x: bool) -> String {
    let ctx = if with_x {
        VarCtx::with_x(ground_vars + 1)
    } else {
        VarCtx::ground(ground_vars)
    };
    if let Some((slots, b)) = &q.pfister {
        let inner: Vec<String> = slots.iter().map(|s| elem_text(s, &ctx)).collect();
        return format!("<<{};{}]]", inner.join(","), elem_text(b, &ctx));
    }
    if q.blocks.is_empty() {
        return "0".to_string();
    }
    q.blocks
        .iter()
        .map(|(a, b)| format!("[{},{}]", elem_text(a, &ctx), elem_text(b, &ctx)))
        .collect::<Vec<_>>()
        .join(" + ")
}
