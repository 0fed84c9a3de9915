//! The projective line over `F_q`: charts, canonical uniformizers, the
//! canonical bundle and the admissibility condition along a finite set of
//! removed points.
//!
//! Chart `t` covers every finite place, chart `s = 1/t` covers infinity. The
//! canonical bundle is trivialized by `dt` and `ds`, with `dt = -s^-2 ds`.
//! Twists only enter through square classes of units.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::fields::{Fe, FiniteField, Place, Poly, RationalFunction, ResidueField};
use crate::mwk::{mw_is_zero, mw_specialize, Mw};
use crate::quadform::RationalFunctionField;

/// The curve `P^1` over its base field.
#[derive(Clone, Debug)]
pub struct CurveModel {
    pub base: Arc<FiniteField>,
}

impl CurveModel {
    pub fn new(base: Arc<FiniteField>) -> Self {
        CurveModel { base }
    }

    pub fn function_field(&self) -> RationalFunctionField {
        RationalFunctionField::new(self.base.clone())
    }
}

/// The removed set `D`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PlaceSet(pub BTreeSet<Place>);

impl PlaceSet {
    pub fn new(places: impl IntoIterator<Item = Place>) -> Self {
        PlaceSet(places.into_iter().collect())
    }

    pub fn contains(&self, p: &Place) -> bool {
        self.0.contains(p)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.0.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Place> {
        self.0.iter()
    }

    pub fn display(&self) -> String {
        if self.0.is_empty() {
            return "{}".to_string();
        }
        let names: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// `canonical_uniformizer`: `p` at a finite place, `1/t` at infinity.
pub fn canonical_uniformizer(x: &Place) -> RationalFunction {
    RationalFunction::place_power(x, 1)
}

/// `omega_twist_unit`: the unit by which a residue computed with the
/// canonical uniformizer is scaled to land in the twisted target.
///
/// At a finite place `p` the section `dt` equals `dp / p'(t)`, so the unit
/// is `p'(theta)`; it is `1` at rational points. At infinity `dt = -s^-2 ds`
/// gives `-1`.
pub fn omega_twist_unit(base: &Arc<FiniteField>, x: &Place) -> Result<(Arc<ResidueField>, Fe)> {
    let rf = ResidueField::of(base, x)?;
    let unit = match x {
        Place::Infinity => base.minus_one(),
        Place::Finite(p) => rf.eval_poly(&p.derivative(base)),
    };
    Ok((rf, unit))
}

/// Uniformizer and twist unit for a finite place `x` other than `(t)`,
/// computed in the chart `s = 1/t`.
///
/// The place is cut out by the monic reversal `p~(s) = s^d p(1/s) / p(0)`;
/// the returned uniformizer is `p~(1/t)` as a function of `t`, and the unit
/// is `-p~'(1/theta)`, which accounts for `dt = -s^-2 ds`.
pub fn s_chart_data(base: &Arc<FiniteField>, x: &Place) -> Option<(RationalFunction, Fe)> {
    let p = x.poly()?;
    let d = p.degree()? as i64;
    let c0 = p.coeff(0);
    if c0 == Fe(0) {
        return None;
    }
    let rf = ResidueField::of(base, x).ok()?;
    let inv_c0 = base.inv(c0);
    let reversed = Poly::new(
        p.coeffs()
            .iter()
            .rev()
            .map(|c| base.mul(*c, inv_c0))
            .collect(),
    );
    // p~(1/t) = t^-d p(t) / p(0)
    let pi = RationalFunction::from_parts(inv_c0, [(x.clone(), 1), (Place::zero(), -d)]).ok()?;
    let big = rf.field();
    let s_theta = big.inv(rf.theta()?);
    let deriv = reversed.derivative(base);
    let value = deriv
        .coeffs()
        .iter()
        .rev()
        .fold(Fe(0), |acc, c| big.add(big.mul(acc, s_theta), rf.embed(*c)));
    Some((pi, big.neg(value)))
}

/// `relative_admissible`: regular along `D` with zero specialization there.
pub fn relative_admissible(
    field: &RationalFunctionField,
    x: &Mw<RationalFunctionField>,
    d: &PlaceSet,
) -> bool {
    d.iter().all(|p| match mw_specialize(field, x, p) {
        Ok(s) => mw_is_zero(&**s.residue_field.field(), &s.value),
        Err(_) => false,
    })
}
