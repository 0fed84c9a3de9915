//! The Suslin-Voevodsky side: the relative Picard group `Pic(P^1, D)` and
//! the map to it induced by rank from the Milnor-Witt `H^1`.
//!
//! `Pic(P^1, D)` is the cokernel of `div` on functions that are regular and
//! equal to `1` along `D`, computed with the same bounded support and
//! stabilization protocol as [`crate::rscurve`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::abgrp::{
    induced_kernel, AbGroupInvariants, ClassCoordinates, Cokernel, IntMatrix, LatticeBasis,
};
use crate::error::{Error, Result};
use crate::fields::Place;
use crate::p1geom::PlaceSet;
use crate::rscurve::{BoundData, BoundSpec, RsComputation, RsProblem};

/// `Pic(P^1, D)` at one bound.
pub struct PicardAtBound {
    pub bound: u32,
    /// Places of `S - D`, one `Z` coordinate each.
    pub places: Vec<Place>,
    /// `div` of the generators of the `D`-trivial S-units.
    pub relations: Vec<Vec<BigInt>>,
    pub cokernel: Cokernel,
}

impl PicardAtBound {
    pub fn compute(q: u64, removed: &PlaceSet, bound: u32) -> Result<Self> {
        let problem = RsProblem::new(q, removed.clone(), 0, BoundSpec::Cap(bound))?;
        let data = BoundData::new(&problem, bound)?;
        let places = data.layout.places.clone();
        let relations: Vec<Vec<BigInt>> = data
            .unit_lattice()
            .iter()
            .map(|e| {
                let f = data.basis.function(e);
                places
                    .iter()
                    .map(|p| BigInt::from(f.valuation(p)))
                    .collect()
            })
            .collect();
        let mut lattice = LatticeBasis::new(places.len());
        for r in &relations {
            if r.iter().any(|x| !x.is_zero()) {
                lattice.insert(r);
            }
        }
        Ok(PicardAtBound {
            bound,
            cokernel: Cokernel::from_lattice(&lattice),
            places,
            relations,
        })
    }

    /// Divisor vector of a single point.
    pub fn point_vector(&self, y: &Place) -> Option<Vec<BigInt>> {
        let i = self.places.iter().position(|p| p == y)?;
        let mut v = vec![BigInt::zero(); self.places.len()];
        v[i] = BigInt::from(1);
        Some(v)
    }

    /// Total degree of a divisor vector.
    pub fn degree(&self, v: &[BigInt]) -> BigInt {
        v.iter()
            .zip(&self.places)
            .map(|(x, p)| x * BigInt::from(p.degree()))
            .sum()
    }
}

/// `RelativePicardResult`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelativePicardResult {
    pub q: u64,
    #[serde(rename = "remove")]
    pub removed: Vec<Place>,
    pub invariants: AbGroupInvariants,
    /// Degree of each canonical generator (torsion first), when `D` is empty.
    pub degree_map_coordinates: Option<Vec<i64>>,
    #[serde(serialize_with = "serialize_stabilized")]
    pub stabilized_at: Option<u32>,
    pub bound: u32,
}

fn serialize_stabilized<S: serde::Serializer>(
    v: &Option<u32>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_u32(*b),
        None => s.serialize_str("not certified"),
    }
}

pub struct PicardComputation {
    pub result: RelativePicardResult,
    pub last: PicardAtBound,
    pub history: BTreeMap<u32, AbGroupInvariants>,
}

/// `relative_picard`, stabilized like `rs_cohomology`.
pub fn relative_picard(q: u64, removed: &PlaceSet, bound: BoundSpec) -> Result<PicardComputation> {
    // validates q and the bound
    let problem = RsProblem::new(q, removed.clone(), 0, bound)?;
    let start = problem.start_bound();
    let cap = problem.cap();
    let mut history = BTreeMap::new();
    let mut prev = PicardAtBound::compute(q, removed, start)?;
    history.insert(start, prev.cokernel.invariants().clone());
    let mut stabilized = None;
    for b in start + 1..=cap {
        let cur = PicardAtBound::compute(q, removed, b)?;
        history.insert(b, cur.cokernel.invariants().clone());
        let agree = cur.cokernel.invariants() == prev.cokernel.invariants();
        prev = cur;
        if agree {
            stabilized = Some(b - 1);
            break;
        }
    }
    let last = prev;
    let degree_map_coordinates = degree_map(removed, &last);
    Ok(PicardComputation {
        result: RelativePicardResult {
            q,
            removed: removed.iter().cloned().collect(),
            invariants: last.cokernel.invariants().clone(),
            degree_map_coordinates,
            stabilized_at: stabilized,
            bound: last.bound,
        },
        last,
        history,
    })
}

/// Recomputes a finished computation at a larger bound, keeping its
/// stabilization record.
pub fn rebound(comp: PicardComputation, bound: u32) -> Result<PicardComputation> {
    if bound <= comp.last.bound {
        return Ok(comp);
    }
    let removed = PlaceSet::new(comp.result.removed.iter().cloned());
    let last = PicardAtBound::compute(comp.result.q, &removed, bound)?;
    let mut history = comp.history;
    history.insert(bound, last.cokernel.invariants().clone());
    let mut result = comp.result;
    result.invariants = last.cokernel.invariants().clone();
    result.degree_map_coordinates = degree_map(&removed, &last);
    result.bound = bound;
    Ok(PicardComputation {
        result,
        last,
        history,
    })
}

fn degree_map(removed: &PlaceSet, last: &PicardAtBound) -> Option<Vec<i64>> {
    removed.is_empty().then(|| {
        last.cokernel
            .generator_lifts()
            .iter()
            .map(|v| last.degree(v).to_i64().expect("degree fits in i64"))
            .collect()
    })
}

/// Runs both sides with the same protocol and lines them up at a common
/// bound before comparing.
pub fn compare(
    q: u64,
    removed: &PlaceSet,
    bound: BoundSpec,
) -> Result<(RsComputation, PicardComputation, RankComparison)> {
    let rs = crate::rscurve::rs_cohomology(&RsProblem::new(q, removed.clone(), 0, bound)?)?;
    let pic = relative_picard(q, removed, bound)?;
    let b = rs.last.data.bound.max(pic.last.bound);
    let rs = crate::rscurve::rebound(rs, b)?;
    let pic = rebound(pic, b)?;
    let cmp = rank_comparison(&rs, &pic)?;
    Ok((rs, pic, cmp))
}

/// Description of the rank comparison `H^1 -> Pic(P^1, D)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankComparison {
    pub source: AbGroupInvariants,
    pub target: AbGroupInvariants,
    /// Column `j` holds the coordinates in `Pic` of the `j`-th canonical
    /// generator of `H^1` (torsion first, then free).
    pub matrix: Vec<Vec<i64>>,
    pub surjective: bool,
    pub kernel: AbGroupInvariants,
}

/// Sends a vector of `(+)_x GW(k(x))` coordinates to its ranks.
fn rank_vector(rs: &RsComputation, v: &[BigInt]) -> Vec<BigInt> {
    rs.last
        .data
        .layout
        .offsets
        .iter()
        .map(|&off| v[off].clone())
        .collect()
}

/// Image in `Pic` of a class of `H^1` given by a target vector.
pub fn compare_vector(
    rs: &RsComputation,
    pic: &PicardComputation,
    v: &[BigInt],
) -> ClassCoordinates {
    pic.last.cokernel.class_of(&rank_vector(rs, v))
}

/// `rank_comparison`.
pub fn rank_comparison(rs: &RsComputation, pic: &PicardComputation) -> Result<RankComparison> {
    let data = &rs.last.data;
    if data.bound != pic.last.bound {
        return Err(Error::BoundMismatch(data.bound, pic.last.bound));
    }
    if data.problem.l != 0 {
        return Err(Error::DegreeOutOfRange(data.problem.l));
    }
    if data.problem.q() != pic.result.q || data.problem.removed.iter().ne(pic.result.removed.iter())
    {
        return Err(Error::Incompatible("different (q, D)".into()));
    }
    let flat = |c: ClassCoordinates| -> Vec<BigInt> {
        c.torsion
            .into_iter()
            .chain(c.free)
            .map(BigInt::from)
            .collect()
    };
    let images: Vec<Vec<BigInt>> = rs
        .last
        .cokernel
        .generator_lifts()
        .iter()
        .map(|v| flat(compare_vector(rs, pic, v)))
        .collect();
    let src = rs.last.cokernel.generator_orders();
    let dst = pic.last.cokernel.generator_orders();
    let map = IntMatrix::from_columns(dst.len(), &images);
    // surjective iff the images together with the target relations span
    let mut lattice = LatticeBasis::new(dst.len());
    for (i, d) in dst.iter().enumerate() {
        if !d.is_zero() {
            let mut r = vec![BigInt::zero(); dst.len()];
            r[i] = d.clone();
            lattice.insert(&r);
        }
    }
    for c in &images {
        if c.iter().any(|x| !x.is_zero()) {
            lattice.insert(c);
        }
    }
    let surjective = Cokernel::from_lattice(&lattice).invariants().is_trivial();
    let kernel = induced_kernel(&map, &src, &dst);
    let matrix = (0..map.rows())
        .map(|i| {
            map.row(i)
                .iter()
                .map(|x| x.to_i64().expect("coordinates fit in i64"))
                .collect()
        })
        .collect();
    Ok(RankComparison {
        source: rs.result.h1.clone(),
        target: pic.result.invariants.clone(),
        matrix,
        surjective,
        kernel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Poly;
    use crate::rscurve::{point_vector, rs_cohomology, theta_class, Atom, RsGenerator};

    fn set(places: Vec<Place>) -> PlaceSet {
        PlaceSet::new(places)
    }

    #[test]
    fn picard_examples_q3() {
        let pic = relative_picard(3, &set(vec![]), BoundSpec::Auto).unwrap();
        assert_eq!(
            pic.result.invariants,
            AbGroupInvariants::from_orders(1, &[])
        );
        assert_eq!(
            pic.result.degree_map_coordinates.as_ref().unwrap()[0].abs(),
            1
        );

        let pic = relative_picard(3, &set(vec![Place::Infinity]), BoundSpec::Auto).unwrap();
        assert_eq!(
            pic.result.invariants,
            AbGroupInvariants::from_orders(1, &[])
        );
        assert!(pic.result.degree_map_coordinates.is_none());

        let pic = relative_picard(
            3,
            &set(vec![Place::zero(), Place::Infinity]),
            BoundSpec::Auto,
        )
        .unwrap();
        assert_eq!(
            pic.result.invariants,
            AbGroupInvariants::from_orders(1, &[2])
        );
        assert!(pic.result.stabilized_at.is_some());
    }

    #[test]
    fn relations_have_degree_zero_without_removed_points() {
        for q in [3, 5] {
            let at = PicardAtBound::compute(q, &set(vec![]), 2).unwrap();
            for r in &at.relations {
                assert!(at.degree(r).is_zero());
            }
        }
    }

    #[test]
    fn rank_of_boundary_is_div() {
        let d = set(vec![Place::Infinity]);
        let problem = RsProblem::new(3, d.clone(), 0, BoundSpec::Cap(2)).unwrap();
        let data = BoundData::new(&problem, 2).unwrap();
        for e in data.unit_lattice() {
            let f = data.basis.function(&e);
            let col = data.column(&RsGenerator {
                terms: vec![(1, Atom::Symbol(e))],
                label: String::new(),
            });
            for (k, p) in data.layout.places.iter().enumerate() {
                assert_eq!(col[data.layout.offsets[k]], BigInt::from(f.valuation(p)));
            }
        }
    }

    #[test]
    fn comparison_examples_q3() {
        for removed in [
            vec![],
            vec![Place::Infinity],
            vec![Place::zero(), Place::Infinity],
        ] {
            let d = set(removed);
            let rs =
                rs_cohomology(&RsProblem::new(3, d.clone(), 0, BoundSpec::Auto).unwrap()).unwrap();
            let pic = relative_picard(3, &d, BoundSpec::Auto).unwrap();
            assert_eq!(rs.last.data.bound, pic.last.bound);
            let cmp = rank_comparison(&rs, &pic).unwrap();
            assert!(cmp.surjective);
            assert_eq!(cmp.kernel, AbGroupInvariants::from_orders(0, &[2]));
        }
    }

    #[test]
    fn theta_at_origin_has_degree_one() {
        let d = set(vec![]);
        let rs = rs_cohomology(&RsProblem::new(3, d.clone(), 0, BoundSpec::Auto).unwrap()).unwrap();
        let pic = relative_picard(3, &d, BoundSpec::Auto).unwrap();
        let theta = theta_class(&rs, &Place::zero()).unwrap();
        // lift the class back to target coordinates and push it through rank
        let lifts = rs.last.cokernel.generator_lifts();
        let mut v = vec![BigInt::zero(); rs.last.data.layout.rows()];
        for (c, lift) in theta.torsion.iter().chain(&theta.free).zip(&lifts) {
            for (x, y) in v.iter_mut().zip(lift) {
                *x += y * c;
            }
        }
        let image = compare_vector(&rs, &pic, &v);
        let degrees = pic.result.degree_map_coordinates.clone().unwrap();
        let deg: i64 = image
            .torsion
            .iter()
            .chain(&image.free)
            .zip(&degrees)
            .map(|(a, b)| a * b)
            .sum();
        assert_eq!(deg, 1);
        let direct = point_vector(&rs.last.data.layout, &Place::zero()).unwrap();
        assert_eq!(compare_vector(&rs, &pic, &direct), image);
    }

    #[test]
    fn mismatched_bounds_are_rejected() {
        let d = set(vec![Place::Infinity]);
        let rs = rs_cohomology(&RsProblem::new(3, d.clone(), 0, BoundSpec::Auto).unwrap()).unwrap();
        let pic = relative_picard(3, &d, BoundSpec::Cap(1)).unwrap();
        assert!(matches!(
            rank_comparison(&rs, &pic),
            Err(Error::BoundMismatch(..))
        ));
        let quad = Place::Finite(Poly::from_codes(&[1, 0, 1]));
        assert!(relative_picard(3, &set(vec![quad]), BoundSpec::Cap(1)).is_err());
    }
}
