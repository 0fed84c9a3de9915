//! Nonzero elements of `F_q(t)` kept in factored form.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::Serialize;

use super::finite::{Fe, FiniteField};
use super::place::{Divisor, Place};
use super::poly::Poly;
use super::residue::ResidueField;
use crate::error::{Error, Result};

use std::sync::Arc;

/// `unit * prod p^e` over monic irreducible `p`. Exponents are nonzero and
/// keys are finite places; the valuation at infinity is derived.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalFunction {
    unit: Fe,
    factors: BTreeMap<Place, i64>,
}

impl RationalFunction {
    pub fn constant(c: Fe) -> Result<Self> {
        if c.0 == 0 {
            return Err(Error::ZeroInput);
        }
        Ok(RationalFunction {
            unit: c,
            factors: BTreeMap::new(),
        })
    }

    pub fn one() -> Self {
        RationalFunction {
            unit: Fe(1),
            factors: BTreeMap::new(),
        }
    }

    /// The coordinate function `t`.
    pub fn t() -> Self {
        Self::place_power(&Place::zero(), 1)
    }

    /// `p^e` for a finite place `p`; at infinity `(1/t)^e`.
    pub fn place_power(p: &Place, e: i64) -> Self {
        match p {
            Place::Infinity => Self::place_power(&Place::zero(), -e),
            Place::Finite(_) => {
                let mut factors = BTreeMap::new();
                if e != 0 {
                    factors.insert(p.clone(), e);
                }
                RationalFunction {
                    unit: Fe(1),
                    factors,
                }
            }
        }
    }

    /// Assembles a function from a unit and finite-place exponents.
    pub fn from_parts(unit: Fe, factors: impl IntoIterator<Item = (Place, i64)>) -> Result<Self> {
        let mut out = Self::constant(unit)?;
        for (p, e) in factors {
            if p.is_infinity() {
                return Err(Error::Parse("infinity cannot be a factor".into()));
            }
            out.add_exponent(&p, e);
        }
        Ok(out)
    }

    /// Factors a nonzero polynomial.
    pub fn from_poly(g: &Poly, f: &FiniteField) -> Result<Self> {
        if g.is_zero() {
            return Err(Error::ZeroInput);
        }
        let (lead, factors) = g.factor(f);
        Self::from_parts(
            lead,
            factors
                .into_iter()
                .map(|(p, e)| (Place::Finite(p), e as i64)),
        )
    }

    /// Factors `num / den`.
    pub fn from_fraction(num: &Poly, den: &Poly, f: &FiniteField) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = Self::from_poly(num, f)?;
        let d = Self::from_poly(den, f)?;
        Ok(n.div(&d, f))
    }

    pub fn unit(&self) -> Fe {
        self.unit
    }

    pub fn factors(&self) -> &BTreeMap<Place, i64> {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.unit == Fe(1) && self.factors.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    fn add_exponent(&mut self, p: &Place, e: i64) {
        if e == 0 {
            return;
        }
        let v = self.factors.entry(p.clone()).or_insert(0);
        *v += e;
        if *v == 0 {
            self.factors.remove(p);
        }
    }

    pub fn mul(&self, other: &Self, f: &FiniteField) -> Self {
        let mut out = self.clone();
        out.unit = f.mul(self.unit, other.unit);
        for (p, e) in &other.factors {
            out.add_exponent(p, *e);
        }
        out
    }

    pub fn inv(&self, f: &FiniteField) -> Self {
        RationalFunction {
            unit: f.inv(self.unit),
            factors: self.factors.iter().map(|(p, e)| (p.clone(), -e)).collect(),
        }
    }

    pub fn div(&self, other: &Self, f: &FiniteField) -> Self {
        self.mul(&other.inv(f), f)
    }

    pub fn pow(&self, e: i64, f: &FiniteField) -> Self {
        if e == 0 {
            return Self::one();
        }
        RationalFunction {
            unit: f.pow(self.unit, e),
            factors: self
                .factors
                .iter()
                .map(|(p, k)| (p.clone(), k * e))
                .collect(),
        }
    }

    pub fn scale(&self, c: Fe, f: &FiniteField) -> Self {
        let mut out = self.clone();
        out.unit = f.mul(self.unit, c);
        out
    }

    pub fn valuation(&self, x: &Place) -> i64 {
        match x {
            Place::Infinity => -self
                .factors
                .iter()
                .map(|(p, e)| e * p.degree() as i64)
                .sum::<i64>(),
            _ => self.factors.get(x).copied().unwrap_or(0),
        }
    }

    /// Principal divisor, including the point at infinity.
    pub fn divisor(&self) -> Divisor {
        let mut d: BTreeMap<Place, i64> = self.factors.clone();
        let vinf = self.valuation(&Place::Infinity);
        if vinf != 0 {
            d.insert(Place::Infinity, vinf);
        }
        Divisor(d)
    }

    /// Places where the function has a zero or a pole.
    pub fn support(&self) -> Vec<Place> {
        self.divisor().0.into_keys().collect()
    }

    /// `(v, u(x))` where `self = u * pi^v` for the canonical uniformizer
    /// `pi` (the place polynomial, or `1/t` at infinity).
    pub fn unit_part(&self, rf: &ResidueField) -> (i64, Fe) {
        let x = rf.place();
        let v = self.valuation(x);
        let big = rf.field();
        let mut u = rf.embed(self.unit);
        if !x.is_infinity() {
            for (p, e) in &self.factors {
                if p == x {
                    continue;
                }
                let val = rf.eval_poly(p.poly().expect("finite factor"));
                u = big.mul(u, big.pow(val, *e));
            }
        }
        (v, u)
    }

    /// Value at `x` of a function regular and nonvanishing there.
    pub fn reduce(&self, rf: &ResidueField) -> Result<Fe> {
        let (v, u) = self.unit_part(rf);
        if v != 0 {
            return Err(Error::RamifiedAt(rf.place().to_string()));
        }
        Ok(u)
    }

    /// Numerator and denominator as polynomials (the unit on the numerator).
    pub fn to_fraction(&self, f: &FiniteField) -> (Poly, Poly) {
        let mut num = Poly::constant(self.unit);
        let mut den = Poly::one();
        for (p, e) in &self.factors {
            let g = p.poly().expect("finite factor").pow(e.unsigned_abs(), f);
            if *e > 0 {
                num = num.mul(&g, f);
            } else {
                den = den.mul(&g, f);
            }
        }
        (num, den)
    }

    /// Representative of the square class: unit reduced to `1` or the least
    /// nonsquare, exponents reduced mod 2.
    pub fn square_class_rep(&self, f: &FiniteField) -> Self {
        RationalFunction {
            unit: f.square_class_rep(self.unit),
            factors: self
                .factors
                .iter()
                .filter(|(_, e)| *e % 2 != 0)
                .map(|(p, _)| (p.clone(), 1))
                .collect(),
        }
    }

    pub fn is_square(&self, f: &FiniteField) -> bool {
        f.is_square_unit(self.unit) && self.factors.values().all(|e| e % 2 == 0)
    }

    pub fn display(&self) -> String {
        let mut parts = Vec::new();
        if self.unit != Fe(1) || self.factors.is_empty() {
            parts.push(self.unit.to_string());
        }
        for (p, e) in &self.factors {
            if *e == 1 {
                parts.push(p.to_string());
            } else {
                parts.push(format!("{p}^{e}"));
            }
        }
        parts.join("*")
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

impl Serialize for RationalFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Factors<'a>(&'a BTreeMap<Place, i64>);
        impl Serialize for Factors<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for (p, e) in self.0 {
                    seq.serialize_element(&(p, e))?;
                }
                seq.end()
            }
        }
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("unit", &self.unit.0)?;
        m.serialize_entry("factors", &Factors(&self.factors))?;
        m.end()
    }
}

/// `factor_divisor`: complete factorization of `num / den`.
pub fn factor_divisor(num: &Poly, den: &Poly, f: &FiniteField) -> Result<RationalFunction> {
    RationalFunction::from_fraction(num, den, f)
}

/// `residue_field_reduce`: value of `g` at `x`, which must be a unit there.
pub fn residue_field_reduce(
    g: &RationalFunction,
    x: &Place,
    base: &Arc<FiniteField>,
) -> Result<Fe> {
    let rf = ResidueField::of(base, x)?;
    g.reduce(&rf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::finite::field_of_order;

    #[test]
    fn factor_examples() {
        let f = field_of_order(3).unwrap();
        let r = factor_divisor(&Poly::from_codes(&[1, 0, 1]), &Poly::x(), &f).unwrap();
        assert_eq!(r.unit(), Fe(1));
        assert_eq!(r.valuation(&Place::Finite(Poly::from_codes(&[1, 0, 1]))), 1);
        assert_eq!(r.valuation(&Place::zero()), -1);
        assert_eq!(r.valuation(&Place::Infinity), -1);
        assert_eq!(r.divisor().degree(), 0);

        let c = factor_divisor(&Poly::constant(Fe(2)), &Poly::one(), &f).unwrap();
        assert_eq!(c.unit(), Fe(2));
        assert!(c.factors().is_empty());

        let t2 = factor_divisor(&Poly::x().pow(2, &f), &Poly::one(), &f).unwrap();
        assert_eq!(t2.valuation(&Place::zero()), 2);
        assert_eq!(t2.valuation(&Place::Infinity), -2);

        assert_eq!(
            factor_divisor(&Poly::one(), &Poly::zero(), &f),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn reduce_examples() {
        let f = field_of_order(3).unwrap();
        let g = RationalFunction::from_poly(&Poly::from_codes(&[2, 1]), &f).unwrap();
        assert_eq!(residue_field_reduce(&g, &Place::zero(), &f).unwrap(), Fe(2));

        let h = factor_divisor(&Poly::from_codes(&[1, 1]), &Poly::from_codes(&[1, 2]), &f).unwrap();
        assert_eq!(
            residue_field_reduce(&h, &Place::Infinity, &f).unwrap(),
            Fe(2)
        );

        let t = RationalFunction::t();
        assert!(matches!(
            residue_field_reduce(&t, &Place::zero(), &f),
            Err(Error::RamifiedAt(_))
        ));
    }

    #[test]
    fn json_shape() {
        let f = field_of_order(3).unwrap();
        let r = factor_divisor(&Poly::from_codes(&[1, 0, 1]), &Poly::x(), &f).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"unit":1,"factors":[[{"poly":[0,1]},-1],[{"poly":[1,0,1]},1]]}"#
        );
    }

    #[test]
    fn fraction_roundtrip() {
        let f = field_of_order(5).unwrap();
        let num = Poly::from_codes(&[3, 0, 2, 1]);
        let den = Poly::from_codes(&[1, 4, 1]);
        let r = factor_divisor(&num, &den, &f).unwrap();
        let (n, d) = r.to_fraction(&f);
        // n * den == num * d
        assert_eq!(n.mul(&den, &f), num.mul(&d, &f));
    }
}
