//! Batch command layer: one immutable session per invocation, structured
//! JSON reports, and deterministic seeded self-test suites.
//!
//! Every report echoes the tower size and the seed, and carries either the
//! command payload or an `error` object. Exit codes follow the verdict:
//! 0 for success and decisive answers, 2 for undecided verdicts, 1 for
//! errors and self-test failures.

use crate::cohomology::{
    decide_zero, w1_difference_is_zero, DecideOpts, Decision, Verdict,
};
use crate::forms::LogForm;
use crate::ground::{GroundElem, Mono, PolyF2};
use crate::index::IndexSet;
use crate::local::{materialize, residue, W1Class};
use crate::parse::{
    class_text, ground_class_text, parse_class, parse_place, place_text, upoly_to_elem,
};
use crate::poly::{
    classify_place, FinitePlace, IrredCert, Place, PlaceVerdict, UPoly,
};
use crate::transfer::{reciprocity_sum, s_p_star};
use crate::witt::{
    default_equal_bound, witt_equal_bounded, witt_simplify, QuadForm, WittVerdict,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use std::sync::Arc;

/// Immutable per-invocation configuration.
#[derive(Clone, Debug)]
pub struct Session {
    /// Number of ground tower variables t1..tK.
    pub ground_vars: usize,
    /// Work budget for the zero-decision procedure and place certification.
    pub budget: usize,
    /// Truncation depth for Teichmuller lift computations.
    pub teich_depth: usize,
    /// Seed for the self-test generators, echoed in every report.
    pub seed: u64,
}

impl Default for Session {
    fn default() -> Self {
        Session {
            ground_vars: 1,
            budget: DecideOpts::default().budget,
            teich_depth: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Command {
    Residue { class: String, place: String },
    NormalForm { class: String, place: String },
    Transfer { class: String, place: String },
    Reciprocity { class: String },
    IsZero { class: String },
    Gamma { place: String, count: usize },
    Classify { poly: String },
    SelfTest { suite: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Residue { .. } => "residue",
            Command::NormalForm { .. } => "normalform",
            Command::Transfer { .. } => "transfer",
            Command::Reciprocity { .. } => "reciprocity",
            Command::IsZero { .. } => "iszero",
            Command::Gamma { .. } => "gamma",
            Command::Classify { .. } => "classify",
            Command::SelfTest { .. } => "selftest",
        }
    }
}

fn error_json(e: &crate::Error) -> Value {
    let kind = match e {
        crate::Error::Syntax { .. } => "syntax",
        crate::Error::DivisionByZero => "division_by_zero",
        crate::Error::BadPlace(_) => "bad_place",
        crate::Error::Inconclusive(_) => "inconclusive",
        crate::Error::DegreeMismatch(_) => "degree_mismatch",
        crate::Error::Unsupported(_) => "unsupported",
    };
    let mut obj = json!({ "kind": kind, "message": e.to_string() });
    if let crate::Error::Syntax { position, .. } = e {
        obj["position"] = json!(position);
    }
    obj
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Zero => "ZERO",
        Verdict::NonZero => "NONZERO",
        Verdict::Unknown => "UNKNOWN",
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Zero | Verdict::NonZero => 0,
        Verdict::Unknown => 2,
    }
}

fn slot_label(i: usize, k: usize) -> String {
    if i < k {
        format!("t{}", i + 1)
    } else if i == k {
        "x".to_string()
    } else {
        "p".to_string()
    }
}

fn slots_json(s: &IndexSet, k: usize) -> Value {
    Value::Array(s.iter().map(|i| Value::String(slot_label(i, k))).collect())
}

fn decision_json(d: &Decision, k: usize) -> Value {
    let mut obj = json!({
        "verdict": verdict_str(d.verdict),
        "reason": d.reason,
    });
    if let Some(w) = &d.witness {
        obj["witness"] = json!({
            "exact_part": w.eta.as_ref().map(|eta| class_text(eta, k)),
            "artin_schreier_part": class_text(&w.psi, k),
        });
    }
    obj
}

fn w1_json(w: &W1Class, k: usize) -> Value {
    let table = |m: &std::collections::BTreeMap<(usize, IndexSet, IndexSet), UPoly>| {
        Value::Array(
            m.iter()
                .map(|((r, slots, pattern), val)| {
                    json!({
                        "r": r,
                        "slots": slots_json(slots, k),
                        "pattern": slots_json(pattern, k),
                        "value": val.text(k),
                    })
                })
                .collect(),
        )
    };
    let phi = Value::Array(
        w.phi_prime
            .coeffs
            .iter()
            .map(|(s, c)| json!({ "slots": slots_json(s, k), "value": c.text(k) }))
            .collect(),
    );
    json!({
        "place": place_text(&w.place, k),
        "degree": w.degree,
        "u": table(&w.u),
        "v": table(&w.v),
        "phi": phi,
        "zero": w.is_structurally_zero(),
    })
}

impl Session {
    pub fn opts(&self) -> DecideOpts {
        DecideOpts {
            budget: self.budget,
        }
    }

    /// Runs one command, returning the JSON report and the process exit
    /// code. Errors never panic; they land in the `error` field.
    pub fn run(&self, cmd: &Command) -> (Value, i32) {
        let (payload, code) = match self.dispatch(cmd) {
            Ok(pair) => pair,
            Err(e) => (json!({ "error": error_json(&e) }), 1),
        };
        let mut report = json!({
            "command": cmd.name(),
            "tower": self.ground_vars,
            "seed": self.seed,
        });
        for (key, val) in payload.as_object().into_iter().flatten() {
            report[key] = val.clone();
        }
        (report, code)
    }

    fn dispatch(&self, cmd: &Command) -> crate::Result<(Value, i32)> {
        let k = self.ground_vars;
        match cmd {
            Command::Residue { class, place } => {
                let f = parse_class(class, k)?;
                let (pl, _) = parse_place(place, k, self.budget)?;
                let w = residue(&f, &pl)?;
                Ok((
                    json!({
                        "class": class_text(&f, k),
                        "place": place_text(&pl, k),
                        "w1": w1_json(&w, k),
                    }),
                    0,
                ))
            }
            Command::NormalForm { class, place } => {
                let f = parse_class(class, k)?;
                let (pl, _) = parse_place(place, k, self.budget)?;
                let w = residue(&f, &pl)?;
                let g = materialize(&w);
                let back = residue(&g, &pl)?;
                let roundtrip = w1_difference_is_zero(&w, &back, &self.opts())?;
                Ok((
                    json!({
                        "class": class_text(&f, k),
                        "place": place_text(&pl, k),
                        "w1": w1_json(&w, k),
                        "materialized": class_text(&g, k),
                        "roundtrip": verdict_str(roundtrip),
                    }),
                    0,
                ))
            }
            Command::Transfer { class, place } => {
                let f = parse_class(class, k)?;
                let (pl, _) = parse_place(place, k, self.budget)?;
                let w = residue(&f, &pl)?;
                let out = s_p_star(&w)?;
                Ok((
                    json!({
                        "class": class_text(&f, k),
                        "place": place_text(&pl, k),
                        "w1": w1_json(&w, k),
                        "transfer": ground_class_text(&out, k),
                    }),
                    0,
                ))
            }
            Command::Reciprocity { class } => {
                let f = parse_class(class, k)?;
                let rep = reciprocity_sum(&f, &self.opts())?;
                let places: Vec<String> =
                    rep.terms.iter().map(|(p, _)| place_text(p, k)).collect();
                let terms: Vec<Value> = rep
                    .terms
                    .iter()
                    .map(|(p, t)| {
                        json!({
                            "place": place_text(p, k),
                            "transfer": ground_class_text(t, k),
                        })
                    })
                    .collect();
                let code = verdict_code(rep.decision.verdict);
                Ok((
                    json!({
                        "class": class_text(&f, k),
                        "verdict": verdict_str(rep.decision.verdict),
                        "places": places,
                        "terms": terms,
                        "total": ground_class_text(&rep.total, k),
                        "decision": decision_json(&rep.decision, k),
                    }),
                    code,
                ))
            }
            Command::IsZero { class } => {
                let f = parse_class(class, k)?;
                let d = decide_zero(&f, &self.opts())?;
                Ok((
                    json!({
                        "class": class_text(&f, k),
                        "verdict": verdict_str(d.verdict),
                        "decision": decision_json(&d, k),
                    }),
                    verdict_code(d.verdict),
                ))
            }
            Command::Gamma { place, count } => {
                let (pl, _) = parse_place(place, k, self.budget)?;
                let pl = match pl {
                    Place::Finite(p) => p,
                    Place::Inf => {
                        return Err(crate::Error::BadPlace(
                            "the gamma sequence needs a finite place".into(),
                        ))
                    }
                };
                let gammas: Vec<String> = (0..=*count as i64)
                    .map(|i| {
                        crate::ground::elem_text(
                            &pl.gamma(i),
                            &crate::ground::VarCtx::ground(k),
                        )
                    })
                    .collect();
                Ok((
                    json!({
                        "place": pl.poly.text(k),
                        "count": count,
                        "gammas": gammas,
                    }),
                    0,
                ))
            }
            Command::Classify { poly } => {
                let elem = crate::parse::parse_elem(poly, k, true)?;
                let p = crate::parse::elem_to_upoly(&elem, k)?;
                let c = classify_place(&p, k, self.budget)?;
                let (verdict, cert, code) = match &c.verdict {
                    PlaceVerdict::Irreducible(cert) => {
                        let cert = match cert {
                            IrredCert::Degree1 => json!("degree 1"),
                            IrredCert::Specialization { tries } => {
                                json!({ "specializations": tries })
                            }
                            IrredCert::ExhaustiveSearch => json!("exhaustive search"),
                        };
                        ("irreducible", cert, 0)
                    }
                    PlaceVerdict::Reducible(f) => {
                        ("reducible", json!({ "factor": f.text(k) }), 0)
                    }
                    PlaceVerdict::Inconclusive => ("inconclusive", Value::Null, 2),
                };
                Ok((
                    json!({
                        "poly": p.text(k),
                        "degree": c.degree,
                        "separable": c.separable,
                        "insep_index": c.insep_index.map(|i| slot_label(i, k)),
                        "verdict": verdict,
                        "certificate": cert,
                    }),
                    code,
                ))
            }
            Command::SelfTest { suite } => self.selftest(suite),
        }
    }

    fn selftest(&self, suite: &str) -> crate::Result<(Value, i32)> {
        let mut results = Vec::new();
        let suites: Vec<&str> = match suite {
            "all" => vec!["reciprocity", "roundtrip", "witt", "gamma"],
            s => vec![s],
        };
        let mut total_failed = 0usize;
        for name in suites {
            let mut rng = ChaCha20Rng::seed_from_u64(self.seed ^ hash_name(name));
            let (cases, failures) = match name {
                "reciprocity" => self.suite_reciprocity(&mut rng),
                "roundtrip" => self.suite_roundtrip(&mut rng),
                "witt" => self.suite_witt(&mut rng),
                "gamma" => self.suite_gamma(&mut rng),
                other => {
                    return Err(crate::Error::Unsupported(format!(
                        "unknown self-test suite '{}'",
                        other
                    )))
                }
            };
            total_failed += failures.len();
            results.push(json!({
                "suite": name,
                "cases": cases,
                "passed": cases - failures.len(),
                "failed": failures.len(),
                "failures": failures,
            }));
        }
        let code = if total_failed == 0 { 0 } else { 1 };
        Ok((json!({ "suites": results }), code))
    }

    fn suite_reciprocity(&self, rng: &mut ChaCha20Rng) -> (usize, Vec<String>) {
        let k = self.ground_vars;
        let cases = 12;
        let mut failures = Vec::new();
        for case in 0..cases {
            let f = rand_class(rng, k, 1 + (case % 2));
            if f.is_structurally_zero() {
                continue;
            }
            match reciprocity_sum(&f, &self.opts()) {
                Ok(rep) if rep.decision.verdict == Verdict::NonZero => {
                    failures.push(format!(
                        "case {}: reciprocity total certified nonzero for {}",
                        case,
                        class_text(&f, k)
                    ));
                }
                Ok(_) => {}
                Err(e) => failures.push(format!("case {}: {}", case, e)),
            }
        }
        (cases, failures)
    }

    fn suite_roundtrip(&self, rng: &mut ChaCha20Rng) -> (usize, Vec<String>) {
        let k = self.ground_vars;
        let cases = 12;
        let mut failures = Vec::new();
        for case in 0..cases {
            let f = rand_class(rng, k, 1 + (case % 2));
            let place = rand_place(rng, k);
            let check = || -> crate::Result<Option<String>> {
                let w = residue(&f, &place)?;
                let g = materialize(&w);
                let back = residue(&g, &place)?;
                let v = w1_difference_is_zero(&w, &back, &self.opts())?;
                if v == Verdict::NonZero {
                    return Ok(Some(format!(
                        "materialized form has a different residue at {}",
                        place_text(&place, k)
                    )));
                }
                Ok(None)
            };
            match check() {
                Ok(None) => {}
                Ok(Some(msg)) => failures.push(format!("case {}: {}", case, msg)),
                Err(e) => failures.push(format!("case {}: {}", case, e)),
            }
        }
        (cases, failures)
    }

    fn suite_witt(&self, rng: &mut ChaCha20Rng) -> (usize, Vec<String>) {
        let k = self.ground_vars;
        let cases = 10;
        let mut failures = Vec::new();
        for case in 0..cases {
            let nblocks = 1 + rng.gen_range(0..3);
            let blocks: Vec<(GroundElem, GroundElem)> = (0..nblocks)
                .map(|_| (rand_ground(rng, k), rand_ground(rng, k)))
                .collect();
            let q = QuadForm::from_blocks(k, blocks);
            let bound = default_equal_bound(&q, &q);
            // Every form equals itself, and the group is 2-torsion.
            let d = witt_equal_bounded(&q, &q, bound, &self.opts());
            if d.verdict == WittVerdict::NotEqual {
                failures.push(format!("case {}: q /= q reported", case));
            }
            let s = witt_simplify(&q, &self.opts());
            let arf_diff = q.arf().add(&s.arf());
            match decide_zero(&LogForm::scalar(k, arf_diff), &self.opts()) {
                Ok(dec) if dec.verdict == Verdict::NonZero => {
                    failures.push(format!("case {}: simplify changed the Arf class", case));
                }
                _ => {}
            }
        }
        (cases, failures)
    }

    fn suite_gamma(&self, rng: &mut ChaCha20Rng) -> (usize, Vec<String>) {
        let k = self.ground_vars;
        let cases = 10;
        let mut failures = Vec::new();
        for case in 0..cases {
            let place = match rand_place(rng, k) {
                Place::Finite(p) => p,
                Place::Inf => continue,
            };
            let d = place.degree;
            // Independent oracle: gamma_i is the coefficient functional of
            // x^(d-1+i), sharing recurrence and initial values.
            for i in 0..12i64 {
                let direct = place.t_p(&UPoly::monomial(d - 1 + i as usize, GroundElem::one()));
                if direct != place.gamma(i) {
                    failures.push(format!(
                        "case {}: gamma_{} mismatch at {}",
                        case,
                        i,
                        place.poly.text(k)
                    ));
                    break;
                }
            }
        }
        (cases, failures)
    }
}

fn hash_name(name: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn rand_poly(rng: &mut ChaCha20Rng, nvars: usize) -> PolyF2 {
    let terms = rng.gen_range(1..=3);
    let mut p = PolyF2::zero();
    for _ in 0..terms {
        let exps: Vec<u32> = (0..nvars).map(|_| rng.gen_range(0..=2)).collect();
        p = p.add(&PolyF2::from_mono(Mono::from_exps(&exps)));
    }
    if p.is_zero() {
        PolyF2::one()
    } else {
        p
    }
}

fn rand_ground(rng: &mut ChaCha20Rng, nvars: usize) -> GroundElem {
    GroundElem::from_frac(rand_poly(rng, nvars), rand_poly(rng, nvars))
}

/// A random certified-irreducible monic place, with the degree valuation
/// thrown in occasionally.
fn rand_place(rng: &mut ChaCha20Rng, k: usize) -> Place {
    if rng.gen_range(0..6) == 0 {
        return Place::Inf;
    }
    for _ in 0..12 {
        let d = rng.gen_range(1..=3);
        let mut p = UPoly::monomial(d, GroundElem::one());
        for e in 0..d {
            if rng.gen_bool(0.6) {
                p = p.add(&UPoly::monomial(e, rand_ground_poly(rng, k)));
            }
        }
        if p.coeff(0).is_zero() && p.degree() != Some(1) {
            continue;
        }
        if let Ok(c) = classify_place(&p, k, 10_000) {
            if matches!(c.verdict, PlaceVerdict::Irreducible(_)) {
                if let Ok(pl) = FinitePlace::new(p, k) {
                    return Place::Finite(pl);
                }
            }
        }
    }
    // Linear places are always irreducible.
    let p = UPoly::from_coeffs([
        (1, GroundElem::one()),
        (0, rand_ground_poly(rng, k)),
    ]);
    Place::Finite(FinitePlace::new(p, k).expect("linear places are valid"))
}

fn rand_ground_poly(rng: &mut ChaCha20Rng, k: usize) -> GroundElem {
    GroundElem::from_poly(rand_poly(rng, k))
}

/// A random class over the full field whose coefficient denominators come
/// from small place polynomials, so residues have something to see.
fn rand_class(rng: &mut ChaCha20Rng, k: usize, degree: usize) -> LogForm {
    let nvars = k + 1;
    let mut out = LogForm::zero(nvars, degree);
    let nterms = 1 + rng.gen_range(0..2);
    for _ in 0..nterms {
        // Denominators stay products of ground polynomials and certified
        // place polynomials so residue supports factor within budget.
        let mut num = GroundElem::from_poly(rand_poly(rng, nvars));
        num = num.div(&rand_ground_poly(rng, k));
        for _ in 0..2 {
            if rng.gen_bool(0.5) {
                if let Place::Finite(pl) = rand_place(rng, k) {
                    num = num.div(&upoly_to_elem(&pl.poly, k));
                }
            }
        }
        if num.is_zero() {
            continue;
        }
        let mut slots = IndexSet::empty();
        let mut avail: Vec<usize> = (0..nvars).collect();
        for _ in 0..degree.min(avail.len()) {
            let pick = rng.gen_range(0..avail.len());
            slots = slots.insert(avail.remove(pick));
        }
        if slots.len() == degree {
            out.add_term(num, slots);
        }
    }
    out
}

/// Runs a JSON-encoded command request: an object with a `command` field
/// naming the operation, its arguments, and optional `tower`, `seed`,
/// `bound`, and `teich_depth` settings. Returns the serialized report with
/// the exit code.
pub fn run_json(request: &str) -> (String, i32) {
    run_json_with(&Session::default(), request)
}

/// Like `run_json`, but starts from the given session settings; envelope
/// fields still override them for the one request.
pub fn run_json_with(base: &Session, request: &str) -> (String, i32) {
    let parsed: Result<Value, _> = serde_json::from_str(request);
    let req = match parsed {
        Ok(v) => v,
        Err(e) => {
            let out = json!({ "error": { "kind": "syntax", "message": format!("bad request: {}", e) } });
            return (out.to_string(), 1);
        }
    };
    let mut session = base.clone();
    apply_envelope(&mut session, &req);
    let cmd = match command_from_value(&req) {
        Some(c) => c,
        None => {
            let out = json!({ "error": { "kind": "syntax", "message": "unknown command or missing arguments" } });
            return (out.to_string(), 1);
        }
    };
    let (report, code) = session.run(&cmd);
    (report.to_string(), code)
}

/// Applies the optional `tower`, `seed`, `bound`, and `teich_depth` fields
/// of a request envelope to the session settings.
pub fn apply_envelope(session: &mut Session, req: &Value) {
    if let Some(k) = req.get("tower").and_then(Value::as_u64) {
        session.ground_vars = k as usize;
    }
    if let Some(s) = req.get("seed").and_then(Value::as_u64) {
        session.seed = s;
    }
    if let Some(b) = req.get("bound").and_then(Value::as_u64) {
        session.budget = b as usize;
    }
    if let Some(n) = req.get("teich_depth").and_then(Value::as_u64) {
        session.teich_depth = n as usize;
    }
}

/// Reads the `command` field and its arguments out of a request envelope.
/// Returns None when the command is unknown or required arguments are
/// missing.
pub fn command_from_value(req: &Value) -> Option<Command> {
    let text = |key: &str| -> Option<String> {
        req.get(key).and_then(Value::as_str).map(str::to_string)
    };
    match req.get("command").and_then(Value::as_str) {
        Some("residue") => match (text("class"), text("place")) {
            (Some(class), Some(place)) => Some(Command::Residue { class, place }),
            _ => None,
        },
        Some("normalform") => match (text("class"), text("place")) {
            (Some(class), Some(place)) => Some(Command::NormalForm { class, place }),
            _ => None,
        },
        Some("transfer") => match (text("class"), text("place")) {
            (Some(class), Some(place)) => Some(Command::Transfer { class, place }),
            _ => None,
        },
        Some("reciprocity") => text("class").map(|class| Command::Reciprocity { class }),
        Some("iszero") => text("class").map(|class| Command::IsZero { class }),
        Some("gamma") => text("place").map(|place| Command::Gamma {
            place,
            count: req.get("count").and_then(Value::as_u64).unwrap_or(8) as usize,
        }),
        Some("classify") => text("poly").map(|poly| Command::Classify { poly }),
        Some("selftest") => Some(Command::SelfTest {
            suite: text("suite").unwrap_or_else(|| "all".to_string()),
        }),
        _ => None,
    }
}

// Keep an explicit anchor on the Teichmuller depth setting so the session
// plumbs it somewhere real: expose the truncated lift of a unit at a place.
impl Session {
    /// Truncated Teichmuller lift of a residue-field unit at a finite
    /// place, to the session's configured depth.
    pub fn teichmuller_lift(
        &self,
        place: &Arc<FinitePlace>,
        u: &UPoly,
    ) -> crate::Result<UPoly> {
        crate::residue::teichmuller(place, u, self.teich_depth)
    }
}
