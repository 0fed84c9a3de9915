//! Milnor-Witt relation checks on random inputs, shared by the relation
//! suite and the acceptance run.

use mwcurve::fields::{Fe, FiniteField, Place, Poly, RationalFunction, ResidueField};
use mwcurve::mwk::{
    is_compatible, mw_add, mw_eta_mul, mw_hyperbolic, mw_integer, mw_is_zero, mw_residue,
    mw_symbol, mw_symbol2, mw_unit_form, mw_unit_scale, Mw, MwField,
};
use mwcurve::p1geom::canonical_uniformizer;
use mwcurve::quadform::RationalFunctionField;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const INSTANCES: usize = 1000;

/// The relations that make sense over any supported field; `one_minus`
/// returns `1 - a` or `None` when it vanishes.
pub fn check_relations<F: MwField>(
    field: &F,
    a: &F::Elem,
    b: &F::Elem,
    one_minus: Option<F::Elem>,
) -> Vec<&'static str> {
    let mut failures = Vec::new();
    let eq = |x: &Mw<F>, y: &Mw<F>| x == y;
    if let Some(c) = one_minus {
        if !mw_is_zero(field, &mw_symbol2(field, a, &c).unwrap()) {
            failures.push("steinberg");
        }
    }
    let ab = field.mul(a, b);
    let lhs = mw_symbol(field, &ab).unwrap();
    let sa = mw_symbol(field, a).unwrap();
    let sb = mw_symbol(field, b).unwrap();
    let cross = mw_eta_mul(field, &mw_symbol2(field, a, b).unwrap()).unwrap();
    let rhs = mw_add(field, &mw_add(field, &sa, &sb).unwrap(), &cross).unwrap();
    if !eq(&lhs, &rhs) {
        failures.push("[ab] = [a] + [b] + eta[a][b]");
    }
    let unit = mw_unit_form(field, a).unwrap();
    let expanded = mw_add(
        field,
        &mw_integer(field, 1),
        &mw_eta_mul(field, &sa).unwrap(),
    )
    .unwrap();
    if !eq(&unit, &expanded) {
        failures.push("<a> = 1 + eta[a]");
    }
    if !mw_is_zero(field, &mw_eta_mul(field, &mw_hyperbolic(field)).unwrap()) {
        failures.push("eta h = 0");
    }
    let abb = field.mul(a, &field.mul(b, b));
    if mw_unit_form(field, &abb).unwrap() != unit
        || mw_unit_form(field, &field.inv(a)).unwrap() != unit
    {
        failures.push("<a> = <ab^2> = <a^-1>");
    }
    for x in [&lhs, &rhs, &unit, &cross] {
        if !is_compatible(field, x) {
            failures.push("compatibility");
        }
    }
    failures
}

pub fn random_unit(f: &FiniteField, rng: &mut ChaCha8Rng) -> Fe {
    Fe(rng.random_range(1..f.order()))
}

pub fn random_poly(f: &FiniteField, rng: &mut ChaCha8Rng, max_degree: usize) -> Poly {
    loop {
        let d = rng.random_range(0..=max_degree);
        let p = Poly::new(
            (0..=d)
                .map(|_| Fe(rng.random_range(0..f.order())))
                .collect(),
        );
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn random_function(f: &FiniteField, rng: &mut ChaCha8Rng) -> RationalFunction {
    let num = random_poly(f, rng, 3);
    let den = random_poly(f, rng, 2);
    RationalFunction::from_fraction(&num, &den, f).unwrap()
}

pub fn one_minus_function(a: &RationalFunction, f: &FiniteField) -> Option<RationalFunction> {
    let (num, den) = a.to_fraction(f);
    let diff = den.sub(&num, f);
    if diff.is_zero() {
        return None;
    }
    Some(RationalFunction::from_fraction(&diff, &den, f).unwrap())
}

/// Draws one instance of the uniformizer covariance check: `<s>[g]` at a
/// random place `x`, residues for `pi` and `u pi`. Returns `None` when `u`
/// does not reduce to a unit at `x`, else whether `<u(x)> d^pi = d^(u pi)`.
pub fn covariance_holds(
    f: &Arc<FiniteField>,
    places: &[Place],
    rng: &mut ChaCha8Rng,
) -> Option<bool> {
    let k = RationalFunctionField::new(f.clone());
    let x = &places[rng.random_range(0..places.len())];
    let rf = ResidueField::of(f, x).unwrap();
    let u = random_function(f, rng);
    let ubar = u.reduce(&rf).ok()?;
    let g = random_function(f, rng);
    let s = random_function(f, rng);
    let elem = mw_unit_scale(&k, &s, &mw_symbol(&k, &g).unwrap()).unwrap();
    let pi = canonical_uniformizer(x);
    let upi = pi.mul(&u, f);
    let r1 = mw_residue(&k, &elem, x, &pi).unwrap();
    let r2 = mw_residue(&k, &elem, x, &upi).unwrap();
    let scaled = mw_unit_scale(&**rf.field(), &ubar, &r1.value).unwrap();
    Some(scaled == r2.value)
}
