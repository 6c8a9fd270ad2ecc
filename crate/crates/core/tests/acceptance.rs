//! Acceptance gate. Each test exercises one headline guarantee at scale
//! with a fixed seed and prints a one-line summary; the per-test ok/FAILED
//! output of the harness is the pass/fail ledger.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use kmc_core::cohomology::{
    class_reduce, classes_equal, decide_zero, subgroup_generator, support_places,
    verify_reduction, verify_zero_witness, w1_difference_is_zero, DecideOpts, SubgroupKind,
    Verdict,
};
use kmc_core::forms::LogForm;
use kmc_core::ground::{GroundElem, Mono, PolyF2};
use kmc_core::index::IndexSet;
use kmc_core::local::{materialize, residue, W1Class};
use kmc_core::poly::{
    classify_place, upoly_to_elem, FinitePlace, Place, PlaceVerdict, UPoly,
};
use kmc_core::residue::{basis_slots, slot_place, slot_x, teichmuller};
use kmc_core::transfer::{reciprocity_sum, s_p_star, transfer_closed_form, ClosedFormKind};
use kmc_core::witt::{
    default_equal_bound, scharlau_transfer_gram, witt_equal_bounded, ResQuad, WittVerdict,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

// ---------------------------------------------------------------------------
// Shared generators.
// ---------------------------------------------------------------------------

fn rng_for(criterion: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(0xacce_0000 + criterion)
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

fn rand_ground_poly(rng: &mut ChaCha20Rng, k: usize) -> GroundElem {
    GroundElem::from_poly(rand_poly(rng, k))
}

fn rand_ground_frac(rng: &mut ChaCha20Rng, k: usize) -> GroundElem {
    GroundElem::from_frac(rand_poly(rng, k), rand_poly(rng, k))
}

/// A place from a fixed list, certified irreducible on first use so the
/// pools themselves are checked by the run.
fn certified(poly: UPoly, k: usize) -> Arc<FinitePlace> {
    let c = classify_place(&poly, k, DecideOpts::default().budget)
        .expect("pool polynomial must classify");
    assert!(
        matches!(c.verdict, PlaceVerdict::Irreducible(_)),
        "pool polynomial {} is not certified irreducible",
        poly.text(k)
    );
    FinitePlace::new(poly, k).expect("certified place must construct")
}

fn upoly_from(k: usize, terms: &[(usize, GroundElem)]) -> UPoly {
    let _ = k;
    UPoly::from_coeffs(terms.iter().cloned())
}

fn tvar(i: usize) -> GroundElem {
    GroundElem::var(i)
}

/// Places of degree 1..3 over F2(t1), with the inseparable x^2 + t1.
fn pool_k1() -> Vec<Arc<FinitePlace>> {
    let one = GroundElem::one();
    vec![
        certified(upoly_from(1, &[(1, one.clone()), (0, tvar(0))]), 1),
        certified(
            upoly_from(1, &[(2, one.clone()), (1, one.clone()), (0, tvar(0))]),
            1,
        ),
        certified(upoly_from(1, &[(2, one.clone()), (0, tvar(0))]), 1),
        certified(
            upoly_from(1, &[(3, one.clone()), (1, tvar(0)), (0, tvar(0))]),
            1,
        ),
    ]
}

/// Places of degree 1..3 over F2(t1, t2), separable and inseparable.
fn pool_k2() -> Vec<Arc<FinitePlace>> {
    let one = GroundElem::one();
    vec![
        certified(upoly_from(2, &[(1, one.clone()), (0, tvar(1))]), 2),
        certified(
            upoly_from(2, &[(2, one.clone()), (1, one.clone()), (0, tvar(0))]),
            2,
        ),
        certified(upoly_from(2, &[(2, one.clone()), (0, tvar(1))]), 2),
        certified(upoly_from(2, &[(2, one.clone()), (0, tvar(0))]), 2),
        certified(
            upoly_from(
                2,
                &[(2, one.clone()), (1, one.clone()), (0, tvar(0).mul(&tvar(1)))],
            ),
            2,
        ),
        certified(
            upoly_from(2, &[(3, one.clone()), (1, tvar(0)), (0, tvar(1))]),
            2,
        ),
    ]
}

fn pool_for(k: usize) -> Vec<Arc<FinitePlace>> {
    match k {
        1 => pool_k1(),
        2 => pool_k2(),
        _ => panic!("no pool for {k} ground variables"),
    }
}

/// A random unit at the place: a residue representative that reduces to a
/// nonzero value.
fn rand_unit(rng: &mut ChaCha20Rng, pl: &Arc<FinitePlace>) -> UPoly {
    let k = pl.ground_vars;
    loop {
        let deg = rng.gen_range(0..pl.degree.max(1));
        let mut u = UPoly::zero();
        for e in 0..=deg {
            if e == deg || rng.gen_bool(0.6) {
                u = u.add(&UPoly::monomial(e, rand_ground_poly(rng, k)));
            }
        }
        let r = pl.reduce(&u);
        if !r.is_zero() {
            return r;
        }
    }
}

fn choose_distinct(rng: &mut ChaCha20Rng, pool: &[usize], m: usize) -> Option<IndexSet> {
    if pool.len() < m {
        return None;
    }
    let mut avail = pool.to_vec();
    let mut out = IndexSet::empty();
    for _ in 0..m {
        let pick = rng.gen_range(0..avail.len());
        out = out.insert(avail.remove(pick));
    }
    Some(out)
}

fn random_subset(rng: &mut ChaCha20Rng, pool: &[usize]) -> IndexSet {
    let mut out = IndexSet::empty();
    for &s in pool {
        if rng.gen_bool(0.5) {
            out = out.insert(s);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 1: reciprocity on generated classes.
// ---------------------------------------------------------------------------

fn generator_kinds(k: usize, m: usize) -> Vec<SubgroupKind> {
    let mut kinds = vec![
        SubgroupKind::PolyClasses,
        SubgroupKind::PoleBounded { order: 1 },
        SubgroupKind::PoleBounded { order: 2 },
        SubgroupKind::PlaceSupported,
        SubgroupKind::PlaceSupportedWedge,
        SubgroupKind::UnitFiltration { r: 0 },
        SubgroupKind::UnitFiltration { r: 1 },
        SubgroupKind::Units,
        SubgroupKind::OneUnits,
    ];
    if m + 1 <= k {
        kinds.push(SubgroupKind::UnitFiltrationEven { r: 1 });
    }
    kinds
}

#[test]
fn criterion_1_reciprocity_vanishes_on_generated_classes() {
    let start = Instant::now();
    let mut rng = rng_for(1);
    let opts = DecideOpts::default();
    let mut checked = 0usize;
    let mut skipped_kinds = 0usize;

    for &(k, m, count) in &[(1usize, 1usize, 110usize), (2, 1, 55), (2, 2, 55)] {
        let pool = pool_for(k);
        let kinds = generator_kinds(k, m);
        for _ in 0..count {
            let mut class = LogForm::zero(k + 1, m);
            let mut parts = 0;
            let want = 1 + rng.gen_range(0..3);
            let mut guard = 0;
            while parts < want && guard < 24 {
                guard += 1;
                let kind = &kinds[rng.gen_range(0..kinds.len())];
                let pl = &pool[rng.gen_range(0..pool.len())];
                let idx = rng.gen_range(0..8);
                match subgroup_generator(kind, pl, m, idx) {
                    Ok(g) => {
                        class = class.add(&g);
                        parts += 1;
                    }
                    Err(_) => skipped_kinds += 1,
                }
            }
            assert!(parts > 0, "could not draw a single generator");

            let rep = reciprocity_sum(&class, &opts).expect("reciprocity must evaluate");
            assert_eq!(
                rep.decision.verdict,
                Verdict::Zero,
                "residue sum must vanish (k={k}, m={m}): {}",
                rep.decision.reason
            );
            let w = rep
                .decision
                .witness
                .as_ref()
                .expect("a zero verdict must carry a witness");
            assert!(
                verify_zero_witness(&rep.total, w),
                "the recombining witness must check out"
            );
            checked += 1;
        }
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(checked >= 200, "need at least 200 classes, got {checked}");
    assert!(dt < 300.0, "criterion 1 exceeded its time budget: {dt:.1}s");
    println!(
        "criterion 1: {checked} generated classes sum to zero with verified witnesses \
         ({skipped_kinds} unsupported draws skipped, {dt:.1}s)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: the gamma sequence against the remainder oracle.
// ---------------------------------------------------------------------------

fn rand_certified_place(
    rng: &mut ChaCha20Rng,
    k: usize,
    max_deg: usize,
) -> Arc<FinitePlace> {
    for _ in 0..24 {
        let d = rng.gen_range(1..=max_deg);
        let mut p = UPoly::monomial(d, GroundElem::one());
        for e in 0..d {
            if rng.gen_bool(0.6) {
                p = p.add(&UPoly::monomial(e, rand_ground_poly(rng, k)));
            }
        }
        if p.coeff(0).is_zero() && d > 1 {
            continue;
        }
        if let Ok(c) = classify_place(&p, k, 50_000) {
            if matches!(c.verdict, PlaceVerdict::Irreducible(_)) {
                if let Ok(pl) = FinitePlace::new(p, k) {
                    return pl;
                }
            }
        }
    }
    let p = upoly_from(k, &[(1, GroundElem::one()), (0, rand_ground_poly(rng, k))]);
    FinitePlace::new(p, k).expect("linear places are always valid")
}

#[test]
fn criterion_2_gamma_matches_the_remainder_oracle() {
    let start = Instant::now();
    let mut rng = rng_for(2);
    let places = 50usize;
    let horizon = 20i64;

    for _ in 0..places {
        let pl = rand_certified_place(&mut rng, 1, 5);
        let d = pl.degree;

        // Oracle: gamma_i is the transfer functional on x^(d-1+i), i.e. the
        // coefficient of x^(d-1) in that monomial reduced mod p.
        for i in 0..=horizon {
            let mono = UPoly::monomial(d - 1 + i as usize, GroundElem::one());
            let oracle = pl.t_p(&mono);
            assert_eq!(
                pl.gamma(i),
                oracle,
                "gamma({i}) disagrees with the remainder oracle at {}",
                pl.poly.text(1)
            );
        }

        // The generating functions multiply to 1: the power series of
        // 1 / (reversed p) times reversed p, truncated past the horizon.
        for n in 0..=horizon {
            let mut acc = GroundElem::zero();
            for j in 0..=(n.min(d as i64)) {
                acc = acc.add(&pl.p_coeff(j as usize).mul(&pl.gamma(n - j)));
            }
            let want = if n == 0 {
                GroundElem::one()
            } else {
                GroundElem::zero()
            };
            assert_eq!(
                acc, want,
                "generating function product fails at order {n} for {}",
                pl.poly.text(1)
            );
        }
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "criterion 2 exceeded its time budget: {dt:.1}s");
    println!(
        "criterion 2: gamma agreed with the remainder oracle and its generating \
         function through order {horizon} at {places} random places ({dt:.1}s)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: Gram-matrix transfers against the closed formulas.
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_transfer_grams_match_closed_forms() {
    let start = Instant::now();
    let mut rng = rng_for(3);
    let opts = DecideOpts::default();
    let one = GroundElem::one();

    let sep: Vec<Arc<FinitePlace>> = vec![
        certified(upoly_from(1, &[(1, one.clone()), (0, tvar(0))]), 1),
        certified(
            upoly_from(1, &[(2, one.clone()), (1, one.clone()), (0, tvar(0))]),
            1,
        ),
        certified(
            upoly_from(1, &[(3, one.clone()), (1, tvar(0)), (0, tvar(0))]),
            1,
        ),
    ];
    let insep: Vec<Arc<FinitePlace>> = vec![
        certified(upoly_from(1, &[(2, one.clone()), (0, tvar(0))]), 1),
        certified(upoly_from(1, &[(2, one.clone()), (0, tvar(0).pow(3))]), 1),
        certified(
            upoly_from(1, &[(2, one.clone()), (0, tvar(0).mul(&tvar(0).add(&one)))]),
            1,
        ),
    ];
    let mixed: Vec<Arc<FinitePlace>> =
        sep.iter().chain(insep.iter()).cloned().collect();

    let mut equal = 0usize;
    let mut inconclusive = 0usize;
    let mut total = 0usize;
    let per_kind = 30usize;

    for kind_tag in 0..3 {
        for _ in 0..per_kind {
            let (gram, closed, label) = match kind_tag {
                0 => {
                    let pl = &mixed[rng.gen_range(0..mixed.len())];
                    let a = rand_ground_poly(&mut rng, 1);
                    let i = rng.gen_range(0..2 * pl.degree);
                    let b = UPoly::monomial(i, a.clone());
                    let q = ResQuad::block(pl.clone(), &UPoly::one(), &b);
                    (
                        scharlau_transfer_gram(&q).expect("gram must build"),
                        transfer_closed_form(ClosedFormKind::Unit, &a, i, pl)
                            .expect("closed form must build"),
                        "unit block",
                    )
                }
                1 => {
                    let pl = &mixed[rng.gen_range(0..mixed.len())];
                    let a = rand_ground_poly(&mut rng, 1);
                    let i = rng.gen_range(1..=3);
                    let b = UPoly::monomial(i, a.clone());
                    let q = ResQuad::pfister(pl.clone(), &[UPoly::x()], &b)
                        .expect("x is a unit at every pool place");
                    (
                        scharlau_transfer_gram(&q).expect("gram must build"),
                        transfer_closed_form(ClosedFormKind::XPfister, &a, i, pl)
                            .expect("closed form must build"),
                        "x-Pfister",
                    )
                }
                _ => {
                    let pl = &insep[rng.gen_range(0..insep.len())];
                    let a = rand_ground_poly(&mut rng, 1);
                    let b = UPoly::constant(a.clone());
                    let q = ResQuad::pfister(pl.clone(), &[UPoly::x()], &b)
                        .expect("x is a unit at every pool place");
                    (
                        scharlau_transfer_gram(&q).expect("gram must build"),
                        transfer_closed_form(ClosedFormKind::InsepConst, &a, 0, pl)
                            .expect("closed form must build"),
                        "inseparable constant",
                    )
                }
            };

            let bound = default_equal_bound(&gram, &closed);
            let d = witt_equal_bounded(&gram, &closed, bound, &opts);
            match d.verdict {
                WittVerdict::Equal => equal += 1,
                WittVerdict::Inconclusive => inconclusive += 1,
                WittVerdict::NotEqual => {
                    panic!("{label} transfer mismatch: {}", d.detail)
                }
            }
            total += 1;
        }
    }

    let dt = start.elapsed().as_secs_f64();
    assert_eq!(total, 3 * per_kind);
    assert!(
        equal * 5 >= total * 4,
        "need at least 80% certified equal, got {equal}/{total}"
    );
    assert!(dt < 120.0, "criterion 3 exceeded its time budget: {dt:.1}s");
    println!(
        "criterion 3: {equal}/{total} transfer pairs certified Witt-equal, \
         {inconclusive} inconclusive, none separated ({dt:.1}s)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: normal forms round-trip and detect single-entry edits.
// ---------------------------------------------------------------------------

struct W1Setup {
    basis: Vec<usize>,
    pattern_pool: Vec<usize>,
    ground_vars: usize,
}

fn w1_setup(place: &Place, k: usize) -> W1Setup {
    match place {
        Place::Finite(pl) => {
            let basis = basis_slots(pl);
            let mut pattern_pool: Vec<usize> =
                (0..k).filter(|i| Some(*i) != pl.insep_index).collect();
            if !pl.separable {
                pattern_pool.push(slot_x(k));
            }
            W1Setup {
                basis,
                pattern_pool,
                ground_vars: k,
            }
        }
        Place::Inf => W1Setup {
            basis: (0..k).collect(),
            pattern_pool: (0..k).collect(),
            ground_vars: k,
        },
    }
}

fn rand_w1_value(rng: &mut ChaCha20Rng, place: &Place, k: usize) -> UPoly {
    match place {
        Place::Finite(pl) => {
            let mut guard = 0;
            loop {
                guard += 1;
                assert!(guard < 64, "could not draw a unit value");
                let v = rand_unit(rng, pl);
                if !v.is_zero() {
                    return v;
                }
            }
        }
        Place::Inf => {
            let mut guard = 0;
            loop {
                guard += 1;
                assert!(guard < 64, "could not draw a constant value");
                let c = rand_ground_poly(rng, k);
                if !c.is_zero() {
                    return UPoly::constant(c);
                }
            }
        }
    }
}

/// A random normal form whose entries all satisfy the canonical-shape rules
/// for the place, so the materialize/residue round trip is exact.
fn rand_w1(rng: &mut ChaCha20Rng, place: &Place, k: usize, m: usize) -> W1Class {
    let setup = w1_setup(place, k);
    let ps = slot_place(setup.ground_vars);
    let mut w = W1Class::zero(place.clone(), k, m);

    let n_u = 1 + rng.gen_range(0..2);
    for _ in 0..n_u {
        if let Some(slots) = choose_distinct(rng, &setup.basis, m) {
            let r = rng.gen_range(0..3);
            let pattern = random_subset(rng, &setup.pattern_pool);
            let val = rand_w1_value(rng, place, k);
            w.add_u(r, slots, pattern, val);
        }
    }

    if !setup.pattern_pool.is_empty() && rng.gen_bool(0.7) {
        let jstar = setup.pattern_pool[rng.gen_range(0..setup.pattern_pool.len())];
        let mut cands: Vec<usize> = setup
            .basis
            .iter()
            .copied()
            .chain(std::iter::once(ps))
            .filter(|s| *s != jstar)
            .collect();
        cands.dedup();
        if let Some(slots) = choose_distinct(rng, &cands, m) {
            let r = 1 + rng.gen_range(0..2);
            let mut pattern = IndexSet::singleton(jstar);
            for &j in setup.pattern_pool.iter().filter(|j| **j < jstar) {
                if rng.gen_bool(0.4) {
                    pattern = pattern.insert(j);
                }
            }
            let val = rand_w1_value(rng, place, k);
            w.add_v(r, slots, pattern, val);
        }
    }

    if rng.gen_bool(0.7) {
        if let Some(slots) = choose_distinct(rng, &setup.basis, m - 1) {
            let val = rand_w1_value(rng, place, k);
            w.add_phi(slots, val);
        }
    }

    w
}

fn w1_tables_equal(a: &W1Class, b: &W1Class) -> bool {
    a.u == b.u && a.v == b.v && a.phi_prime.coeffs == b.phi_prime.coeffs
}

#[test]
fn criterion_4_normal_forms_round_trip_and_detect_perturbations() {
    let start = Instant::now();
    let mut rng = rng_for(4);
    let opts = DecideOpts::default();

    let mut cases: Vec<(Place, usize, usize)> = Vec::new();
    {
        let pool1 = pool_k1();
        for _ in 0..40 {
            let pl = &pool1[rng.gen_range(0..pool1.len())];
            cases.push((Place::Finite(pl.clone()), 1, 1));
        }
        for _ in 0..10 {
            cases.push((Place::Inf, 1, 1));
        }
        let pool2 = pool_k2();
        for i in 0..50 {
            let m = 1 + (i % 2);
            if i % 5 == 4 {
                cases.push((Place::Inf, 2, m));
            } else {
                let pl = &pool2[rng.gen_range(0..pool2.len())];
                cases.push((Place::Finite(pl.clone()), 2, m));
            }
        }
    }

    let mut round_trips = 0usize;
    let mut perturbations = 0usize;
    let mut class_separations = 0usize;

    for (ci, (place, k, m)) in cases.iter().enumerate() {
        if std::env::var_os("ACCEPT_TRACE").is_some() {
            eprintln!("case {ci} k={k} m={m} place={place:?}");
        }
        let w = rand_w1(&mut rng, place, *k, *m);
        if w.is_structurally_zero() {
            continue;
        }
        if std::env::var_os("ACCEPT_TRACE").is_some() {
            eprintln!(
                "  entries u={:?} v={:?} phi={:?}",
                w.u.keys().collect::<Vec<_>>(),
                w.v.keys().collect::<Vec<_>>(),
                w.phi_prime.coeffs.keys().collect::<Vec<_>>()
            );
        }
        let mat = materialize(&w);
        if std::env::var_os("ACCEPT_TRACE").is_some() {
            eprintln!("  materialized, {} terms", mat.term_count());
        }
        let back = residue(&mat, place).expect("round trip must evaluate");
        if std::env::var_os("ACCEPT_TRACE").is_some() {
            eprintln!("  round trip done");
        }
        assert!(
            w1_tables_equal(&w, &back),
            "normal form failed to round trip at {place:?} (k={k}, m={m})"
        );
        round_trips += 1;

        // Perturb one entry and require detection. Value-table edits are
        // detected by exact comparison at every place; the dlog p component
        // is only compared as a class, so those edits stay on rational
        // residue fields.
        let rational = matches!(place, Place::Inf)
            || matches!(place, Place::Finite(pl) if pl.degree == 1);
        let mut w2 = w.clone();
        let mode = ci % 3;
        let delta = rand_w1_value(&mut rng, place, *k);
        if mode == 1 && !w.v.is_empty() {
            let keys: Vec<_> = w.v.keys().cloned().collect();
            let (r, slots, pattern) = keys[rng.gen_range(0..keys.len())].clone();
            w2.add_v(r, slots, pattern, delta);
        } else if mode == 2 && rational && !w.phi_prime.coeffs.is_empty() {
            let slots = w.phi_prime.coeffs.keys().next().unwrap().clone();
            w2.add_phi(slots, delta);
        } else if !w.u.is_empty() {
            let keys: Vec<_> = w.u.keys().cloned().collect();
            let (r, slots, pattern) = keys[rng.gen_range(0..keys.len())].clone();
            w2.add_u(r, slots, pattern, delta);
        } else {
            continue;
        }
        if w1_tables_equal(&w, &w2) {
            continue;
        }
        let verdict =
            w1_difference_is_zero(&w, &w2, &opts).expect("comparison must evaluate");
        assert_eq!(
            verdict,
            Verdict::NonZero,
            "a single-entry edit must be detected at {place:?}"
        );
        perturbations += 1;

        if ci % 5 == 0 {
            if std::env::var_os("ACCEPT_TRACE").is_some() {
                eprintln!("  separating case {ci}");
            }
            let d = classes_equal(&materialize(&w), &materialize(&w2), &opts)
                .expect("materialized comparison must evaluate");
            assert_eq!(
                d.verdict,
                Verdict::NonZero,
                "materialized forms of distinct normal forms must separate"
            );
            class_separations += 1;
        }
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(
        round_trips >= 95,
        "need at least 95 successful round trips, got {round_trips}"
    );
    assert!(
        perturbations >= 80,
        "need at least 80 perturbation detections, got {perturbations}"
    );
    assert!(dt < 60.0, "criterion 4 exceeded its time budget: {dt:.1}s");
    println!(
        "criterion 4: {round_trips} normal forms round-tripped entrywise, \
         {perturbations} single-entry edits detected ({class_separations} also \
         separated after materializing, {dt:.1}s)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: the residue sequence is exact over the ground field.
// ---------------------------------------------------------------------------

/// A random x-free class over the ground tower.
fn rand_ground_form(rng: &mut ChaCha20Rng, k: usize, m: usize) -> LogForm {
    let mut out = LogForm::zero(k, m);
    let slots_pool: Vec<usize> = (0..k).collect();
    for _ in 0..(1 + rng.gen_range(0..2)) {
        if let Some(s) = choose_distinct(rng, &slots_pool, m) {
            let c = rand_ground_frac(rng, k);
            if !c.is_zero() {
                out.add_term(c, s);
            }
        }
    }
    out
}

/// A random form over all of F2(t..)(x) with polynomial coefficients.
fn rand_poly_form(rng: &mut ChaCha20Rng, nvars: usize, m: usize) -> LogForm {
    let mut out = LogForm::zero(nvars, m);
    let slots_pool: Vec<usize> = (0..nvars).collect();
    for _ in 0..(1 + rng.gen_range(0..2)) {
        if let Some(s) = choose_distinct(rng, &slots_pool, m) {
            let c = GroundElem::from_poly(rand_poly(rng, nvars));
            if !c.is_zero() {
                out.add_term(c, s);
            }
        }
    }
    out
}

#[test]
fn criterion_5_residue_sequence_is_exact_over_the_ground_field() {
    let start = Instant::now();
    let mut rng = rng_for(5);
    let opts = DecideOpts::default();

    // (a) Lifted ground classes are unramified at every place in sight.
    let mut unramified = 0usize;
    for case in 0..100 {
        let k = 1 + case % 2;
        let m = 1 + if k == 2 { case % 2 } else { 0 };
        let psi = rand_ground_form(&mut rng, k, m);
        if psi.is_structurally_zero() {
            continue;
        }
        let lifted = psi.lift_vars(k + 1);
        let mut places: Vec<Place> =
            pool_for(k).into_iter().map(Place::Finite).collect();
        places.push(Place::Finite(
            FinitePlace::new(UPoly::x(), k).expect("x is a place"),
        ));
        places.push(Place::Inf);
        for q in support_places(&lifted, &opts).expect("support must factor") {
            if !places.contains(&q) {
                places.push(q);
            }
        }
        for q in &places {
            let w = residue(&lifted, q).expect("residue must evaluate");
            assert!(
                w.is_structurally_zero(),
                "a lifted ground class must be unramified at {q:?}"
            );
        }
        unramified += 1;
    }
    assert!(unramified >= 95, "need 95 unramified lifts, got {unramified}");

    // (b) Vanishing agrees between the ground field and the lift on
    // decisive cases.
    let mut decisive = 0usize;
    let mut attempts = 0usize;
    while decisive < 50 && attempts < 400 {
        attempts += 1;
        let k = 1 + attempts % 2;
        let m = 1 + if k == 2 { attempts % 2 } else { 0 };
        let psi = if attempts % 3 == 0 {
            // A guaranteed coboundary: d(eta) + AS(omega).
            let eta = rand_ground_form(&mut rng, k, m - 1);
            let omega = rand_ground_form(&mut rng, k, m);
            eta.exterior_d().add(&omega.artin_schreier())
        } else {
            rand_ground_form(&mut rng, k, m)
        };
        let d_ground = match decide_zero(&psi, &opts) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let d_full = match decide_zero(&psi.lift_vars(k + 1), &opts) {
            Ok(d) => d,
            Err(_) => continue,
        };
        if d_ground.verdict == Verdict::Unknown || d_full.verdict == Verdict::Unknown {
            continue;
        }
        assert_eq!(
            d_ground.verdict, d_full.verdict,
            "vanishing must agree between the ground field and its lift"
        );
        decisive += 1;
    }
    assert!(decisive >= 50, "need 50 decisive agreement cases, got {decisive}");

    // (c) The infinite residue retracts the wedge with dlog x.
    let mut retracts = 0usize;
    for case in 0..50 {
        let k = 1 + case % 2;
        let m = if k == 2 && case % 2 == 1 { 2 } else { 1 };
        let psi = if m == 1 {
            let c = rand_ground_frac(&mut rng, k);
            if c.is_zero() {
                continue;
            }
            LogForm::term(k, c, IndexSet::empty())
        } else {
            let f = rand_ground_form(&mut rng, k, 1);
            if f.is_structurally_zero() {
                continue;
            }
            f
        };
        let dlog_x = LogForm::term(k + 1, GroundElem::one(), IndexSet::singleton(slot_x(k)));
        let form = psi.lift_vars(k + 1).wedge(&dlog_x);
        let w = residue(&form, &Place::Inf).expect("residue must evaluate");
        let back = s_p_star(&w).expect("retraction must evaluate");
        assert!(
            back.add(&psi).is_structurally_zero(),
            "the infinite retraction must recover the ground class exactly"
        );
        retracts += 1;
    }
    assert!(retracts >= 45, "need 45 exact retractions, got {retracts}");

    // (d) All-residues-zero classes reduce constructively to the ground.
    let mut reduced = 0usize;
    let mut ground_matches = 0usize;
    for case in 0..50 {
        let k = 1 + case % 2;
        let m = 1 + if k == 2 { case % 2 } else { 0 };
        let psi = rand_ground_form(&mut rng, k, m);
        let eta = rand_poly_form(&mut rng, k + 1, m - 1);
        let omega = rand_poly_form(&mut rng, k + 1, m);
        let form = psi
            .lift_vars(k + 1)
            .add(&eta.exterior_d())
            .add(&omega.artin_schreier());
        if form.is_structurally_zero() {
            continue;
        }
        let red = class_reduce(&form, &opts).expect("reduction must evaluate");
        assert!(
            red.locals.is_empty(),
            "an unramified class must reduce with no local parts"
        );
        assert!(
            verify_reduction(&form, &red),
            "the reduction witness must check out"
        );
        reduced += 1;
        if case % 4 == 0 {
            let d = classes_equal(&red.ground, &psi, &opts)
                .expect("ground comparison must evaluate");
            assert_ne!(
                d.verdict,
                Verdict::NonZero,
                "the reduced ground class must agree with the original"
            );
            ground_matches += 1;
        }
    }
    assert!(reduced >= 45, "need 45 constructive reductions, got {reduced}");

    let dt = start.elapsed().as_secs_f64();
    println!(
        "criterion 5: {unramified} lifts unramified everywhere, {decisive} decisive \
         vanishing agreements, {retracts} exact retractions at infinity, {reduced} \
         constructive reductions ({ground_matches} ground parts compared, {dt:.1}s)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: residues ignore exact and Artin-Schreier boundaries.
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_boundaries_leave_residues_invariant() {
    let start = Instant::now();
    let mut rng = rng_for(6);
    let opts = DecideOpts::default();

    let mut perturbations = 0usize;
    let mut reciprocity_pairs = 0usize;
    let mut totals_compared = 0usize;

    for case in 0..50 {
        let k = 1 + case % 2;
        let m = 1 + (case / 2) % k;
        let n = k + 1;
        let pool = pool_for(k);

        // A base class with poles at certified pool places.
        let mut f = LogForm::zero(n, m);
        for _ in 0..(1 + rng.gen_range(0..2)) {
            let mut c = GroundElem::from_poly(rand_poly(&mut rng, n));
            let pl = &pool[rng.gen_range(0..pool.len())];
            c = c.div(&upoly_to_elem(&pl.poly, k));
            if rng.gen_bool(0.4) {
                c = c.div(&rand_ground_poly(&mut rng, k));
            }
            if c.is_zero() {
                continue;
            }
            let slots_pool: Vec<usize> = (0..n).collect();
            if let Some(s) = choose_distinct(&mut rng, &slots_pool, m) {
                f.add_term(c, s);
            }
        }
        if f.is_structurally_zero() {
            continue;
        }

        let mut places: Vec<Place> =
            support_places(&f, &opts).expect("support must factor");
        let xp = Place::Finite(FinitePlace::new(UPoly::x(), k).expect("x is a place"));
        if !places.contains(&xp) {
            places.push(xp);
        }

        for _ in 0..2 {
            let eta = rand_poly_form(&mut rng, n, m - 1);
            let omega = rand_poly_form(&mut rng, n, m);
            let g = f.add(&eta.exterior_d()).add(&omega.artin_schreier());

            for q in support_places(&g, &opts).expect("support must factor") {
                if !places.contains(&q) {
                    places.push(q);
                }
            }
            for q in &places {
                let wf = residue(&f, q).expect("residue must evaluate");
                let wg = residue(&g, q).expect("residue must evaluate");
                let verdict = w1_difference_is_zero(&wf, &wg, &opts)
                    .expect("comparison must evaluate");
                assert_eq!(
                    verdict,
                    Verdict::Zero,
                    "the residue at {q:?} must not see the boundary"
                );
            }
            perturbations += 1;

            let rf = reciprocity_sum(&f, &opts).expect("reciprocity must evaluate");
            let rg = reciprocity_sum(&g, &opts).expect("reciprocity must evaluate");
            assert_eq!(
                rf.decision.verdict, rg.decision.verdict,
                "the reciprocity verdict must not see the boundary"
            );
            reciprocity_pairs += 1;
            if case % 5 == 0 {
                let d = classes_equal(&rf.total, &rg.total, &opts)
                    .expect("total comparison must evaluate");
                assert_ne!(
                    d.verdict,
                    Verdict::NonZero,
                    "the residue totals must agree as ground classes"
                );
                totals_compared += 1;
            }
        }
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(
        perturbations >= 90,
        "need at least 90 boundary perturbations, got {perturbations}"
    );
    println!(
        "criterion 6: {perturbations} boundary perturbations left every residue \
         fixed, {reciprocity_pairs} reciprocity verdicts unchanged ({totals_compared} \
         totals compared as classes, {dt:.1}s)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: Teichmuller lifts stabilize and multiply.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_teichmuller_lifts_stabilize_and_multiply() {
    let start = Instant::now();
    let mut rng = rng_for(7);
    let one = GroundElem::one();

    let places: Vec<Arc<FinitePlace>> = vec![
        certified(upoly_from(1, &[(1, one.clone()), (0, tvar(0))]), 1),
        certified(
            upoly_from(1, &[(2, one.clone()), (1, one.clone()), (0, tvar(0))]),
            1,
        ),
        certified(upoly_from(1, &[(2, one.clone()), (0, tvar(0))]), 1),
        certified(upoly_from(1, &[(2, one.clone()), (0, tvar(0).pow(3))]), 1),
        certified(
            upoly_from(1, &[(3, one.clone()), (1, tvar(0)), (0, tvar(0))]),
            1,
        ),
    ];

    let mut checks = 0usize;
    for pl in &places {
        let mut units: Vec<UPoly> = vec![pl.reduce(&UPoly::x()), pl.reduce(&UPoly::one())];
        for _ in 0..2 {
            units.push(rand_unit(&mut rng, pl));
        }
        units.retain(|u| !u.is_zero());

        for u in &units {
            // Depth zero is the plain reduction.
            assert_eq!(
                teichmuller(pl, u, 0).expect("depth-0 lift"),
                pl.reduce(u),
                "depth zero must reduce"
            );

            let mut prev = pl.reduce(u);
            for depth in 1..=3usize {
                let t = teichmuller(pl, u, depth).expect("lift must evaluate");

                // Successive lifts agree modulo p^(2^(depth-1)).
                let modulus = pl.poly.pow(1 << (depth - 1));
                let (_, rem) = t.add(&prev).divmod(&modulus);
                assert!(
                    rem.is_zero(),
                    "lift at depth {depth} must refine the previous one at {}",
                    pl.poly.text(1)
                );

                // The lift does not depend on the chosen representative.
                let shifted = u.add(&pl.poly.mul(&UPoly::monomial(
                    rng.gen_range(0..2),
                    rand_ground_poly(&mut rng, 1),
                )));
                assert_eq!(
                    teichmuller(pl, &shifted, depth).expect("shifted lift"),
                    t,
                    "the lift must ignore the representative"
                );
                prev = t;
                checks += 1;
            }
        }

        // Multiplicativity modulo p^(2^depth).
        for depth in 1..=3usize {
            let modulus = pl.poly.pow(1 << depth);
            for pair in 0..3 {
                let u = &units[pair % units.len()];
                let v = &units[(pair + 1) % units.len()];
                let tu = teichmuller(pl, u, depth).expect("lift u");
                let tv = teichmuller(pl, v, depth).expect("lift v");
                let tuv = teichmuller(pl, &u.mul(v), depth).expect("lift uv");
                let (_, rem) = tu.mul(&tv).add(&tuv).divmod(&modulus);
                assert!(
                    rem.is_zero(),
                    "lifts must multiply modulo p^(2^{depth}) at {}",
                    pl.poly.text(1)
                );
                checks += 1;
            }
        }
    }

    let dt = start.elapsed().as_secs_f64();
    assert!(checks >= 5 * 3 * 3, "need full depth coverage, got {checks}");
    println!(
        "criterion 7: {checks} Teichmuller checks across {} places and depths 1..3 \
         ({dt:.1}s)",
        places.len()
    );
}

// ---------------------------------------------------------------------------
// Shared sanity for the gate itself.
// ---------------------------------------------------------------------------

#[test]
fn pools_are_distinct_and_certified() {
    let mut seen = BTreeSet::new();
    for pl in pool_k1() {
        assert!(seen.insert(pl.poly.text(1)), "duplicate pool entry");
    }
    let mut seen2 = BTreeSet::new();
    for pl in pool_k2() {
        assert!(seen2.insert(pl.poly.text(2)), "duplicate pool entry");
    }
}
