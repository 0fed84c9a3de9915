//! Quadratic forms over finite fields against an enumeration oracle.

mod common;

use common::{small_combinations, SmallField};
use mwcurve::abgrp::{cokernel_invariants, AbGroupInvariants, AbGroupPresentation, IntMatrix};
use mwcurve::fields::{field_of_order, Fe, FiniteField};
use mwcurve::quadform::{gw_combine, gw_coordinates, GwElement, GwOp, QuadField};

const QS: [u32; 4] = [3, 5, 7, 9];

fn fe(v: &[u32]) -> Vec<Fe> {
    v.iter().map(|x| Fe(*x)).collect()
}

/// Form `x <1> + y <nu>`.
fn combo(x: usize, y: usize, nu: u32) -> Vec<u32> {
    let mut v = vec![1; x];
    v.extend(std::iter::repeat_n(nu, y));
    v
}

fn invariants_of_relations(rels: &[(i64, i64)]) -> AbGroupInvariants {
    let cols: Vec<Vec<i64>> = if rels.is_empty() {
        vec![vec![0, 0]]
    } else {
        rels.iter().map(|(a, b)| vec![*a, *b]).collect()
    };
    let rows = vec![
        cols.iter().map(|c| c[0]).collect::<Vec<_>>(),
        cols.iter().map(|c| c[1]).collect::<Vec<_>>(),
    ];
    cokernel_invariants(&AbGroupPresentation::new(2, IntMatrix::from_rows(&rows)))
}

#[test]
fn arithmetic_matches_oracle_codes() {
    for q in QS {
        let o = SmallField::new(q);
        let f = field_of_order(q as u64).unwrap();
        for a in 0..q {
            assert_eq!(f.neg(Fe(a)), Fe(o.neg(a)));
            for b in 0..q {
                assert_eq!(f.add(Fe(a), Fe(b)), Fe(o.add(a, b)), "q={q} {a}+{b}");
                assert_eq!(f.mul(Fe(a), Fe(b)), Fe(o.mul(a, b)), "q={q} {a}*{b}");
            }
            if a != 0 {
                assert_eq!(f.is_square_unit(Fe(a)), o.is_square(a));
            }
        }
        assert_eq!(f.least_nonsquare(), Fe(o.least_nonsquare()));
    }
}

/// Two diagonal forms of rank at most 3 are equal in GW exactly when the
/// oracle's representation numbers agree.
#[test]
fn gw_equality_matches_representation_numbers() {
    for q in QS {
        let o = SmallField::new(q);
        let f = field_of_order(q as u64).unwrap();
        for rank in 1..=3usize {
            let forms: Vec<Vec<u32>> = o
                .vectors(rank)
                .into_iter()
                .filter(|v| v.iter().all(|x| *x != 0))
                .collect();
            let sigs: Vec<Vec<usize>> = forms.iter().map(|g| o.representation_counts(g)).collect();
            let gws: Vec<GwElement<_>> = forms
                .iter()
                .map(|g| GwElement::from_form(&*f, &fe(g)).unwrap())
                .collect();
            let mut classes = std::collections::BTreeSet::new();
            for i in 0..forms.len() {
                classes.insert(sigs[i].clone());
                for j in i + 1..forms.len() {
                    assert_eq!(
                        gws[i] == gws[j],
                        sigs[i] == sigs[j],
                        "q={q} {:?} vs {:?}",
                        forms[i],
                        forms[j]
                    );
                }
            }
            // exactly two isometry classes in each rank
            assert_eq!(classes.len(), 2, "q={q} rank {rank}");
        }
    }
}

#[test]
fn gw_group_is_z_plus_z2() {
    for q in QS {
        let o = SmallField::new(q);
        let f = field_of_order(q as u64).unwrap();
        let nu = o.least_nonsquare();
        let mut oracle_rels = Vec::new();
        let mut lib_rels = Vec::new();
        let combos = small_combinations();
        for (x, y) in &combos {
            for (x2, y2) in &combos {
                if x + y != x2 + y2 || x + y > 3 || (x, y) >= (x2, y2) {
                    continue;
                }
                let a = combo(*x, *y, nu);
                let b = combo(*x2, *y2, nu);
                let rel = (*x as i64 - *x2 as i64, *y as i64 - *y2 as i64);
                if o.representation_counts(&a) == o.representation_counts(&b) {
                    oracle_rels.push(rel);
                }
                let ga = GwElement::from_form(&*f, &fe(&a)).unwrap();
                let gb = GwElement::from_form(&*f, &fe(&b)).unwrap();
                if ga == gb {
                    lib_rels.push(rel);
                }
            }
        }
        let expected = AbGroupInvariants::from_orders(1, &[2]);
        assert_eq!(
            invariants_of_relations(&oracle_rels),
            expected,
            "oracle q={q}"
        );
        assert_eq!(
            invariants_of_relations(&lib_rels),
            expected,
            "library q={q}"
        );
    }
}

fn witt_relations(q: u32, lib: bool) -> Vec<(i64, i64)> {
    let o = SmallField::new(q);
    let f = field_of_order(q as u64).unwrap();
    let nu = o.least_nonsquare();
    small_combinations()
        .into_iter()
        .filter(|(x, y)| x + y > 0)
        .filter(|(x, y)| {
            let form = combo(*x, *y, nu);
            if lib {
                f.witt_normalize(&fe(&form)).is_zero()
            } else {
                o.is_hyperbolic(&form)
            }
        })
        .map(|(x, y)| (x as i64, y as i64))
        .collect()
}

#[test]
fn witt_groups_of_f3_and_f5() {
    let z4 = AbGroupInvariants::from_orders(0, &[4]);
    let z2z2 = AbGroupInvariants::from_orders(0, &[2, 2]);
    for (q, expected) in [(3, &z4), (5, &z2z2), (7, &z4), (9, &z2z2)] {
        assert_eq!(
            &invariants_of_relations(&witt_relations(q, false)),
            expected,
            "oracle q={q}"
        );
        assert_eq!(
            &invariants_of_relations(&witt_relations(q, true)),
            expected,
            "library q={q}"
        );
    }
}

/// Anisotropic forms found by enumeration are exactly the nonzero canonical
/// representatives, and canonical representatives are anisotropic.
#[test]
fn canonical_representatives_are_anisotropic() {
    for q in QS {
        let o = SmallField::new(q);
        let f = field_of_order(q as u64).unwrap();
        // rank 4 enumeration is kept to the small fields
        let top = if q <= 5 { 4 } else { 3 };
        for rank in 1..=top {
            for form in o
                .vectors(rank)
                .into_iter()
                .filter(|v| v.iter().all(|x| *x != 0))
            {
                let w = f.witt_normalize(&fe(&form));
                let rep: Vec<u32> = w.representative(&f).iter().map(|a| a.0).collect();
                assert!(rep.len() <= 2);
                if !rep.is_empty() {
                    assert!(!o.is_isotropic(&rep), "q={q} {rep:?}");
                }
                // the input is equivalent to its representative plus hyperbolic planes
                let mut padded = rep.clone();
                while padded.len() < form.len() {
                    padded.push(1);
                    padded.push(o.neg(1));
                }
                if padded.len() == form.len() {
                    assert_eq!(
                        o.representation_counts(&padded),
                        o.representation_counts(&form)
                    );
                }
            }
        }
    }
}

#[test]
fn quadform_examples() {
    let f3 = field_of_order(3).unwrap();
    let f5 = field_of_order(5).unwrap();
    // <1,1,1,1> over F_3 is hyperbolic; the oracle splits it as well
    assert!(f3.witt_normalize(&fe(&[1, 1, 1, 1])).is_zero());
    assert!(SmallField::new(3).is_hyperbolic(&[1, 1, 1, 1]));
    assert!(f5.witt_normalize(&fe(&[1, 1])).is_zero());
    assert!(SmallField::new(5).is_hyperbolic(&[1, 1]));

    let u = |f: &FiniteField, a: u32| GwElement::unit(f, &Fe(a));
    let prod = gw_combine(&*f3, GwOp::Multiply, &u(&f3, 2), &u(&f3, 2));
    assert_eq!(prod, u(&f3, 1));
    let sum = gw_combine(&*f3, GwOp::Add, &u(&f3, 1), &u(&f3, 2));
    assert_eq!(sum, GwElement::hyperbolic(&*f3));
    assert_eq!(gw_coordinates(&f3, &sum), (2, true));
    let sum = gw_combine(&*f5, GwOp::Add, &u(&f5, 1), &u(&f5, 1));
    assert_eq!(sum, GwElement::hyperbolic(&*f5));
}

#[test]
fn witt_orders_by_addition_table() {
    // W(F_3): four classes, <1> of order 4; W(F_5): four classes of order <= 2
    for (q, order_of_one, max_order) in [(3u64, 4, 4), (5, 2, 2)] {
        let f = field_of_order(q).unwrap();
        let mut classes = std::collections::BTreeSet::new();
        for x in 0..4 {
            for y in 0..4 {
                let form = combo(x, y, f.least_nonsquare().0);
                classes.insert(f.witt_normalize(&fe(&form)));
            }
        }
        assert_eq!(classes.len(), 4);
        let one = f.witt_unit(&Fe(1));
        let order = |w: &_| {
            let mut acc = f.witt_zero();
            for k in 1..=4 {
                acc = f.witt_add(&acc, w);
                if f.witt_is_zero(&acc) {
                    return k;
                }
            }
            panic!("order exceeds 4")
        };
        assert_eq!(order(&one), order_of_one);
        for w in classes.iter().filter(|w| !f.witt_is_zero(w)) {
            assert!(order(w) <= max_order);
        }
    }
}
