//! Randomized Milnor-Witt relation suite over finite fields and `F_q(t)`.

mod common;

use common::relations::{
    check_relations, covariance_holds, one_minus_function, random_function, random_unit, INSTANCES,
};
use mwcurve::fields::{field_of_order, places_up_to, Fe, Poly, RationalFunction};
use mwcurve::mwk::{mw_residue, mw_symbol, mw_unit_scale};
use mwcurve::p1geom::{canonical_uniformizer, omega_twist_unit, s_chart_data};
use mwcurve::quadform::RationalFunctionField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn relations_over_finite_fields() {
    for q in [3u64, 5, 7, 9] {
        let f = field_of_order(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(q);
        let mut failures = 0;
        for _ in 0..INSTANCES {
            let a = random_unit(&f, &mut rng);
            let b = random_unit(&f, &mut rng);
            let c = f.sub(Fe(1), a);
            let one_minus = (c != Fe(0)).then_some(c);
            let bad = check_relations(&*f, &a, &b, one_minus);
            if !bad.is_empty() {
                eprintln!("q={q} a={a} b={b}: {bad:?}");
                failures += 1;
            }
        }
        assert_eq!(failures, 0, "q={q}");
    }
}

#[test]
fn relations_over_function_fields() {
    for q in [3u64, 5, 9] {
        let f = field_of_order(q).unwrap();
        let k = RationalFunctionField::new(f.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(100 + q);
        let mut failures = 0;
        for _ in 0..INSTANCES {
            let a = random_function(&f, &mut rng);
            let b = random_function(&f, &mut rng);
            let bad = check_relations(&k, &a, &b, one_minus_function(&a, &f));
            if !bad.is_empty() {
                eprintln!("q={q} a={a} b={b}: {bad:?}");
                failures += 1;
            }
        }
        assert_eq!(failures, 0, "q={q}");
    }
}

/// Changing the uniformizer from `pi` to `u pi` multiplies the residue of a
/// degree-one element by `<u(x)>`.
#[test]
fn residue_uniformizer_covariance() {
    for q in [3u64, 5] {
        let f = field_of_order(q).unwrap();
        let places = places_up_to(&f, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(200 + q);
        let mut failures = 0;
        let mut done = 0;
        while done < INSTANCES {
            match covariance_holds(&f, &places, &mut rng) {
                None => continue,
                Some(ok) => failures += (!ok) as usize,
            }
            done += 1;
        }
        assert_eq!(failures, 0, "q={q}");
    }
}

#[test]
fn residue_depends_only_on_the_function() {
    let f = field_of_order(3).unwrap();
    let k = RationalFunctionField::new(f.clone());
    // (t^2 + t) / (t^2 + 2t) written two ways
    let a = RationalFunction::from_fraction(
        &Poly::from_codes(&[0, 1, 1]),
        &Poly::from_codes(&[0, 2, 1]),
        &f,
    )
    .unwrap();
    let b =
        RationalFunction::from_fraction(&Poly::from_codes(&[1, 1]), &Poly::from_codes(&[2, 1]), &f)
            .unwrap();
    assert_eq!(a, b);
    for x in places_up_to(&f, 2) {
        let pi = canonical_uniformizer(&x);
        let ra = mw_residue(&k, &mw_symbol(&k, &a).unwrap(), &x, &pi).unwrap();
        let rb = mw_residue(&k, &mw_symbol(&k, &b).unwrap(), &x, &pi).unwrap();
        assert_eq!(ra.value, rb.value);
    }
}

/// A residue computed in the `s = 1/t` chart and rescaled by that chart's
/// twist unit agrees with the one computed in the `t` chart.
#[test]
fn twist_units_agree_across_charts() {
    for q in [3u64, 5] {
        let f = field_of_order(q).unwrap();
        let k = RationalFunctionField::new(f.clone());
        let places: Vec<_> = places_up_to(&f, 2)
            .into_iter()
            .filter(|x| !x.is_infinity() && *x != mwcurve::fields::Place::zero())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(300 + q);
        let mut mismatches_without_twist = 0;
        for n in 0..INSTANCES {
            let x = &places[n % places.len()];
            let g = random_function(&f, &mut rng);
            let s = random_function(&f, &mut rng);
            let elem = mw_unit_scale(&k, &s, &mw_symbol(&k, &g).unwrap()).unwrap();
            let (rf, u_t) = omega_twist_unit(&f, x).unwrap();
            let (pi_s, u_s) = s_chart_data(&f, x).unwrap();
            let big = rf.field();
            let r_t = mw_residue(&k, &elem, x, &canonical_uniformizer(x)).unwrap();
            let r_s = mw_residue(&k, &elem, x, &pi_s).unwrap();
            let a = mw_unit_scale(&**big, &u_t, &r_t.value).unwrap();
            let b = mw_unit_scale(&**big, &u_s, &r_s.value).unwrap();
            assert_eq!(a, b, "q={q} x={x} g={g} s={s}");
            if r_t.value != b {
                mismatches_without_twist += 1;
            }
        }
        // at a quadratic place p'(theta) has norm -disc(p): always a square
        // when -1 is not (q = 3), never a square when -1 is (q = 5)
        if q % 4 == 3 {
            assert_eq!(mismatches_without_twist, 0, "q={q}");
        } else {
            assert!(mismatches_without_twist > 0, "q={q}");
        }
    }
}
