//! Witt and Grothendieck-Witt arithmetic of diagonal forms over finite
//! fields and over `F_q(t)`.
//!
//! A Witt class is stored as a canonical key; the canonical diagonal
//! representative is recovered from the key. Over a finite field the key is
//! (rank parity, signed discriminant class). Over `F_q(t)` the key records
//! the nonzero second residues at finite places together with the constant
//! part left after those residues have been cleared.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Fe, FiniteField, Place, RationalFunction, ResidueField};

/// Witt class over a finite field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FiniteWitt {
    pub odd: bool,
    /// The signed discriminant is a nonsquare.
    pub disc_nonsquare: bool,
}

impl FiniteWitt {
    pub const ZERO: FiniteWitt = FiniteWitt {
        odd: false,
        disc_nonsquare: false,
    };

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// Class of `<a_1, ..., a_r>` for units `a_i`.
    pub fn of_units(f: &FiniteField, entries: impl IntoIterator<Item = Fe>) -> Self {
        let mut r = 0u64;
        let mut bit = false;
        for a in entries {
            r += 1;
            bit ^= !f.is_square_unit(a);
        }
        Self::from_count_and_bit(f, r, bit)
    }

    fn from_count_and_bit(f: &FiniteField, r: u64, product_nonsquare: bool) -> Self {
        let sign_flip = (r * (r.saturating_sub(1)) / 2) % 2 == 1 && !f.minus_one_is_square();
        FiniteWitt {
            odd: r % 2 == 1,
            disc_nonsquare: product_nonsquare ^ sign_flip,
        }
    }

    /// Canonical anisotropic representative, of length at most 2.
    pub fn representative(&self, f: &FiniteField) -> Vec<Fe> {
        let nu = f.least_nonsquare();
        match (self.odd, self.disc_nonsquare) {
            (false, false) => vec![],
            (true, false) => vec![Fe(1)],
            (true, true) => vec![nu],
            (false, true) => {
                if f.minus_one_is_square() {
                    vec![Fe(1), nu]
                } else {
                    vec![Fe(1), Fe(1)]
                }
            }
        }
    }

    pub fn add(&self, other: &Self, f: &FiniteField) -> Self {
        let mut e = self.representative(f);
        e.extend(other.representative(f));
        Self::of_units(f, e)
    }
}

/// Witt class over `F_q(t)`: constant part and nonzero residue data at
/// finite places.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FunctionWitt {
    pub constant: FiniteWitt,
    pub lifts: BTreeMap<Place, FiniteWitt>,
}

impl FunctionWitt {
    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.lifts.is_empty()
    }
}

/// A field whose quadratic forms this crate can normalize.
pub trait QuadField {
    type Elem: Clone + Debug + Eq + Ord + Hash;
    type Witt: Clone + Debug + Default + Eq + Ord + Hash;

    fn name(&self) -> String;
    fn one(&self) -> Self::Elem;
    fn is_zero_elem(&self, a: &Self::Elem) -> bool;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_square(&self, a: &Self::Elem) -> bool;
    fn square_class_rep(&self, a: &Self::Elem) -> Self::Elem;
    fn witt_normalize(&self, entries: &[Self::Elem]) -> Self::Witt;
    fn witt_representative(&self, w: &Self::Witt) -> Vec<Self::Elem>;
    fn display_elem(&self, a: &Self::Elem) -> String;

    fn minus_one(&self) -> Self::Elem {
        self.neg(&self.one())
    }

    fn witt_zero(&self) -> Self::Witt {
        Self::Witt::default()
    }

    fn witt_is_zero(&self, w: &Self::Witt) -> bool {
        *w == Self::Witt::default()
    }

    fn witt_unit(&self, a: &Self::Elem) -> Self::Witt {
        self.witt_normalize(std::slice::from_ref(a))
    }

    fn witt_add(&self, a: &Self::Witt, b: &Self::Witt) -> Self::Witt {
        let mut e = self.witt_representative(a);
        e.extend(self.witt_representative(b));
        self.witt_normalize(&e)
    }

    fn witt_scale(&self, u: &Self::Elem, w: &Self::Witt) -> Self::Witt {
        let e: Vec<_> = self
            .witt_representative(w)
            .iter()
            .map(|a| self.mul(a, u))
            .collect();
        self.witt_normalize(&e)
    }

    fn witt_neg(&self, w: &Self::Witt) -> Self::Witt {
        self.witt_scale(&self.minus_one(), w)
    }

    fn witt_sub(&self, a: &Self::Witt, b: &Self::Witt) -> Self::Witt {
        self.witt_add(a, &self.witt_neg(b))
    }

    fn witt_mul(&self, a: &Self::Witt, b: &Self::Witt) -> Self::Witt {
        let ra = self.witt_representative(a);
        let rb = self.witt_representative(b);
        let mut e = Vec::with_capacity(ra.len() * rb.len());
        for x in &ra {
            for y in &rb {
                e.push(self.mul(x, y));
            }
        }
        self.witt_normalize(&e)
    }

    /// `e(a) = <a> - <1>`.
    fn witt_pfister(&self, a: &Self::Elem) -> Self::Witt {
        self.witt_normalize(&[a.clone(), self.minus_one()])
    }

    fn witt_rank_odd(&self, w: &Self::Witt) -> bool {
        self.witt_representative(w).len() % 2 == 1
    }

    /// Square class of `(-1)^(r(r-1)/2) * prod entries`.
    fn signed_discriminant(&self, entries: &[Self::Elem]) -> Self::Elem {
        let r = entries.len() as u64;
        let mut d = self.one();
        for a in entries {
            d = self.mul(&d, a);
        }
        if (r * r.saturating_sub(1) / 2) % 2 == 1 {
            d = self.neg(&d);
        }
        self.square_class_rep(&d)
    }

    /// Membership in `I^2`: even rank and trivial signed discriminant.
    fn witt_in_i2(&self, w: &Self::Witt) -> bool {
        let rep = self.witt_representative(w);
        rep.len() % 2 == 0 && self.is_square(&self.signed_discriminant(&rep))
    }
}

impl QuadField for FiniteField {
    type Elem = Fe;
    type Witt = FiniteWitt;

    fn name(&self) -> String {
        FiniteField::name(self)
    }

    fn one(&self) -> Fe {
        Fe(1)
    }

    fn is_zero_elem(&self, a: &Fe) -> bool {
        a.0 == 0
    }

    fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        FiniteField::mul(self, *a, *b)
    }

    fn inv(&self, a: &Fe) -> Fe {
        FiniteField::inv(self, *a)
    }

    fn neg(&self, a: &Fe) -> Fe {
        FiniteField::neg(self, *a)
    }

    fn is_square(&self, a: &Fe) -> bool {
        self.is_square_unit(*a)
    }

    fn square_class_rep(&self, a: &Fe) -> Fe {
        FiniteField::square_class_rep(self, *a)
    }

    fn witt_normalize(&self, entries: &[Fe]) -> FiniteWitt {
        FiniteWitt::of_units(self, entries.iter().copied())
    }

    fn witt_representative(&self, w: &FiniteWitt) -> Vec<Fe> {
        w.representative(self)
    }

    fn display_elem(&self, a: &Fe) -> String {
        a.to_string()
    }
}

/// The rational function field `F_q(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunctionField {
    pub base: Arc<FiniteField>,
}

impl RationalFunctionField {
    pub fn new(base: Arc<FiniteField>) -> Self {
        RationalFunctionField { base }
    }

    pub fn residue_field(&self, x: &Place) -> Arc<ResidueField> {
        ResidueField::of(&self.base, x).expect("residue fields of admissible places fit the tables")
    }

    /// `<u * p>` for the canonical representative elements over `k(p)`:
    /// `1` lifts to `1`, the least nonsquare to the residue field's lift.
    fn lift_entry(&self, rf: &ResidueField, a: Fe) -> RationalFunction {
        let p = RationalFunction::place_power(rf.place(), 1);
        if a == Fe(1) {
            return p;
        }
        let lift = RationalFunction::from_poly(rf.nonsquare_lift(), &self.base)
            .expect("nonsquare lift is nonzero");
        p.mul(&lift, &self.base)
    }

    /// Second-residue class of square-free entries at a finite place,
    /// with the canonical uniformizer.
    fn residue_of_entries(&self, entries: &[RationalFunction], rf: &ResidueField) -> FiniteWitt {
        let units = entries.iter().filter_map(|e| {
            let (v, u) = e.unit_part(rf);
            (v % 2 != 0).then_some(u)
        });
        FiniteWitt::of_units(rf.field(), units)
    }
}

impl QuadField for RationalFunctionField {
    type Elem = RationalFunction;
    type Witt = FunctionWitt;

    fn name(&self) -> String {
        format!("{}(t)", self.base.name())
    }

    fn one(&self) -> RationalFunction {
        RationalFunction::one()
    }

    fn is_zero_elem(&self, _a: &RationalFunction) -> bool {
        false
    }

    fn mul(&self, a: &RationalFunction, b: &RationalFunction) -> RationalFunction {
        a.mul(b, &self.base)
    }

    fn inv(&self, a: &RationalFunction) -> RationalFunction {
        a.inv(&self.base)
    }

    fn neg(&self, a: &RationalFunction) -> RationalFunction {
        a.scale(self.base.minus_one(), &self.base)
    }

    fn is_square(&self, a: &RationalFunction) -> bool {
        a.is_square(&self.base)
    }

    fn square_class_rep(&self, a: &RationalFunction) -> RationalFunction {
        a.square_class_rep(&self.base)
    }

    fn witt_normalize(&self, entries: &[RationalFunction]) -> FunctionWitt {
        let mut work: Vec<RationalFunction> = entries
            .iter()
            .map(|e| e.square_class_rep(&self.base))
            .collect();
        let mut pending: BTreeSet<Place> = work
            .iter()
            .flat_map(|e| e.factors().keys().cloned())
            .collect();
        let mut lifts = BTreeMap::new();
        // largest places first: each lift only involves the place itself and
        // places of smaller degree
        while let Some(p) = pending.pop_last() {
            let rf = self.residue_field(&p);
            let r = self.residue_of_entries(&work, &rf);
            if r.is_zero() {
                continue;
            }
            for a in r.representative(rf.field()) {
                let lifted = self.lift_entry(&rf, a);
                for q in lifted.factors().keys() {
                    if *q != p {
                        pending.insert(q.clone());
                    }
                }
                work.push(self.neg(&lifted).square_class_rep(&self.base));
            }
            lifts.insert(p, r);
        }
        // residue-free remainder is constant; read it off as the first
        // residue at (t)
        let origin = self.residue_field(&Place::zero());
        let constant = FiniteWitt::of_units(
            &self.base,
            work.iter().filter_map(|e| {
                let (v, u) = e.unit_part(&origin);
                (v % 2 == 0).then_some(u)
            }),
        );
        FunctionWitt { constant, lifts }
    }

    fn witt_representative(&self, w: &FunctionWitt) -> Vec<RationalFunction> {
        let mut out: Vec<RationalFunction> = w
            .constant
            .representative(&self.base)
            .into_iter()
            .map(|c| RationalFunction::constant(c).expect("representative entries are units"))
            .collect();
        for (p, key) in &w.lifts {
            let rf = self.residue_field(p);
            for a in key.representative(rf.field()) {
                out.push(self.lift_entry(&rf, a));
            }
        }
        out
    }

    fn display_elem(&self, a: &RationalFunction) -> String {
        a.display()
    }
}

/// `witt_class_normalize`: canonical class of a diagonal form.
pub fn witt_class_normalize<F: QuadField>(field: &F, entries: &[F::Elem]) -> Result<F::Witt> {
    if entries.iter().any(|e| field.is_zero_elem(e)) {
        return Err(Error::ZeroInput);
    }
    Ok(field.witt_normalize(entries))
}

/// Element of `GW = Z x_{Z/2} W`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GwElement<W> {
    pub rank: i64,
    pub witt: W,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwOp {
    Add,
    Multiply,
}

impl<W: Clone> GwElement<W> {
    pub fn from_form<F: QuadField<Witt = W>>(field: &F, entries: &[F::Elem]) -> Result<Self> {
        Ok(GwElement {
            rank: entries.len() as i64,
            witt: witt_class_normalize(field, entries)?,
        })
    }

    /// `<a>`
    pub fn unit<F: QuadField<Witt = W>>(field: &F, a: &F::Elem) -> Self {
        GwElement {
            rank: 1,
            witt: field.witt_unit(a),
        }
    }

    /// The hyperbolic plane `<1, -1>`.
    pub fn hyperbolic<F: QuadField<Witt = W>>(field: &F) -> Self {
        GwElement {
            rank: 2,
            witt: field.witt_zero(),
        }
    }

    pub fn integer<F: QuadField<Witt = W>>(field: &F, n: i64) -> Self {
        let one = [field.one()];
        let w = if n.rem_euclid(2) == 1 {
            field.witt_normalize(&one)
        } else {
            field.witt_zero()
        };
        // n<1> = (n mod 2)<1> + floor(n/2) <1,1>
        let pair = field.witt_normalize(&[field.one(), field.one()]);
        let mut witt = w;
        let mut k = n.div_euclid(2);
        let step = if k >= 0 { pair } else { field.witt_neg(&pair) };
        while k != 0 {
            witt = field.witt_add(&witt, &step);
            k -= k.signum();
        }
        GwElement { rank: n, witt }
    }

    /// The fiber-product condition `rank = rank(witt) mod 2`.
    pub fn is_consistent<F: QuadField<Witt = W>>(&self, field: &F) -> bool {
        (self.rank.rem_euclid(2) == 1) == field.witt_rank_odd(&self.witt)
    }

    pub fn neg<F: QuadField<Witt = W>>(&self, field: &F) -> Self {
        GwElement {
            rank: -self.rank,
            witt: field.witt_neg(&self.witt),
        }
    }

    pub fn scale<F: QuadField<Witt = W>>(&self, field: &F, u: &F::Elem) -> Self {
        GwElement {
            rank: self.rank,
            witt: field.witt_scale(u, &self.witt),
        }
    }
}

/// `gw_combine`: sum or product in GW.
pub fn gw_combine<F: QuadField>(
    field: &F,
    op: GwOp,
    a: &GwElement<F::Witt>,
    b: &GwElement<F::Witt>,
) -> GwElement<F::Witt> {
    match op {
        GwOp::Add => GwElement {
            rank: a.rank + b.rank,
            witt: field.witt_add(&a.witt, &b.witt),
        },
        GwOp::Multiply => GwElement {
            rank: a.rank * b.rank,
            witt: field.witt_mul(&a.witt, &b.witt),
        },
    }
}

/// Checked variant of [`gw_combine`] for finite fields given by name.
pub fn gw_combine_checked(
    fa: &FiniteField,
    fb: &FiniteField,
    op: GwOp,
    a: &GwElement<FiniteWitt>,
    b: &GwElement<FiniteWitt>,
) -> Result<GwElement<FiniteWitt>> {
    if fa != fb {
        return Err(Error::FieldMismatch(fa.name(), fb.name()));
    }
    Ok(gw_combine(fa, op, a, b))
}

/// GW coordinates over a finite field: `(rank, determinant is a nonsquare)`.
/// This is an isomorphism `GW(F_q) -> Z + Z/2`.
pub fn gw_coordinates(f: &FiniteField, g: &GwElement<FiniteWitt>) -> (i64, bool) {
    let rep = g.witt.representative(f);
    let m = (g.rank - rep.len() as i64) / 2;
    let mut bit = rep.iter().fold(false, |acc, a| acc ^ !f.is_square_unit(*a));
    if m.rem_euclid(2) == 1 && !f.minus_one_is_square() {
        bit = !bit;
    }
    (g.rank, bit)
}

/// Inverse of [`gw_coordinates`].
pub fn gw_from_coordinates(
    f: &FiniteField,
    rank: i64,
    det_nonsquare: bool,
) -> GwElement<FiniteWitt> {
    // rank - 1 copies of <1> plus <d>, adjusted through the hyperbolic count
    let base = GwElement::integer(f, rank);
    if gw_coordinates(f, &base).1 == det_nonsquare {
        return base;
    }
    let shift =
        GwElement::from_form(f, &[f.least_nonsquare(), f.minus_one()]).expect("nonzero entries");
    let shift = GwElement {
        rank: 0,
        witt: shift.witt,
    };
    gw_combine(f, GwOp::Add, &base, &shift)
}

/// Human-readable GW element over a finite field, e.g.
/// `h (hyperbolic); rank 2, disc 1, witt 0`.
pub fn describe_gw(f: &FiniteField, g: &GwElement<FiniteWitt>) -> String {
    let (rank, bit) = gw_coordinates(f, g);
    let disc = if bit { f.least_nonsquare() } else { Fe(1) };
    let rep = g.witt.representative(f);
    let witt = if rep.is_empty() {
        "0".to_string()
    } else {
        format_form(&rep.iter().map(|a| a.to_string()).collect::<Vec<_>>())
    };
    let name = if rank == 2 && rep.is_empty() {
        "h (hyperbolic)".to_string()
    } else if rank == 0 && rep.is_empty() {
        "0".to_string()
    } else {
        let m = (rank - rep.len() as i64) / 2;
        let mut s = if rep.is_empty() {
            String::new()
        } else {
            witt.clone()
        };
        if m != 0 {
            let h = if m.abs() == 1 {
                "h".to_string()
            } else {
                format!("{}h", m.abs())
            };
            s = match (s.is_empty(), m > 0) {
                (true, true) => h,
                (true, false) => format!("-{h}"),
                (false, true) => format!("{s} + {h}"),
                (false, false) => format!("{s} - {h}"),
            };
        }
        s
    };
    format!("{name}; rank {rank}, disc {disc}, witt {witt}")
}

pub fn format_form(entries: &[String]) -> String {
    format!("<{}>", entries.join(", "))
}

/// `second_residue` of a diagonal form at `x` with uniformizer `pi`.
pub fn second_residue(
    field: &RationalFunctionField,
    entries: &[RationalFunction],
    x: &Place,
    pi: &RationalFunction,
) -> Result<(Arc<ResidueField>, FiniteWitt)> {
    residue_with(field, entries, x, pi, true)
}

/// First residue: entries of even valuation contribute their unit part.
pub fn first_residue(
    field: &RationalFunctionField,
    entries: &[RationalFunction],
    x: &Place,
    pi: &RationalFunction,
) -> Result<(Arc<ResidueField>, FiniteWitt)> {
    residue_with(field, entries, x, pi, false)
}

fn residue_with(
    field: &RationalFunctionField,
    entries: &[RationalFunction],
    x: &Place,
    pi: &RationalFunction,
    odd: bool,
) -> Result<(Arc<ResidueField>, FiniteWitt)> {
    let rf = ResidueField::of(&field.base, x)?;
    let (vp, w) = pi.unit_part(&rf);
    if vp != 1 {
        return Err(Error::NotUniformizer(x.to_string()));
    }
    let big = rf.field();
    let units: Vec<Fe> = entries
        .iter()
        .filter_map(|e| {
            let (v, u) = e.unit_part(&rf);
            (v.rem_euclid(2) == odd as i64).then(|| big.mul(u, big.pow(w, -v)))
        })
        .collect();
    let class = FiniteWitt::of_units(big, units);
    Ok((rf, class))
}

/// `signed_discriminant` over any supported field.
pub fn signed_discriminant<F: QuadField>(field: &F, entries: &[F::Elem]) -> F::Elem {
    field.signed_discriminant(entries)
}

/// `witt_specialize`: the class at `x` of a Witt class regular there.
pub fn witt_specialize(
    field: &RationalFunctionField,
    w: &FunctionWitt,
    x: &Place,
) -> Result<(Arc<ResidueField>, FiniteWitt)> {
    let rep = field.witt_representative(w);
    let pi = crate::p1geom::canonical_uniformizer(x);
    let (_, second) = second_residue(field, &rep, x, &pi)?;
    if !second.is_zero() {
        return Err(Error::NotRegular(x.to_string()));
    }
    first_residue(field, &rep, x, &pi)
}
