//! Milnor-Witt K-groups `K_n^MW` for `-2 <= n <= 2` as the fiber product
//! of Milnor K-theory and powers of the fundamental ideal over `I^n/I^(n+1)`.
//!
//! An element is a pair (Milnor part, Witt part). The Witt part of `[u]` is
//! `<u> - <1>`, so `<u> = 1 + eta[u]` holds componentwise. Degree-two Milnor
//! parts over `F_q(t)` are stored by their tame symbols at finite places;
//! over a finite field `K_2^M` vanishes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{Fe, FiniteField, Place, RationalFunction, ResidueField};
use crate::quadform::{first_residue, second_residue, QuadField, RationalFunctionField};

/// Fields with a Milnor `K_2` model.
pub trait MwField: QuadField {
    type K2: Clone + Debug + Default + Eq + Ord + Hash;

    fn k2_symbol(&self, a: &Self::Elem, b: &Self::Elem) -> Self::K2;
    fn k2_add(&self, a: &Self::K2, b: &Self::K2) -> Self::K2;
    fn k2_neg(&self, a: &Self::K2) -> Self::K2;
    /// The degree-two pullback condition: `w` lies in `I^2` and matches the
    /// Milnor part modulo `I^3`.
    fn k2_compatible(&self, k2: &Self::K2, w: &Self::Witt) -> bool;
    fn k2_json(&self, a: &Self::K2) -> Value;
    fn elem_json(&self, a: &Self::Elem) -> Value;

    fn k2_is_zero(&self, a: &Self::K2) -> bool {
        *a == Self::K2::default()
    }
}

impl MwField for FiniteField {
    type K2 = ();

    fn k2_symbol(&self, _a: &Fe, _b: &Fe) {}

    fn k2_add(&self, _a: &(), _b: &()) {}

    fn k2_neg(&self, _a: &()) {}

    fn k2_compatible(&self, _k2: &(), w: &Self::Witt) -> bool {
        // I^2 of a finite field is zero
        w.is_zero()
    }

    fn k2_json(&self, _a: &()) -> Value {
        json!(0)
    }

    fn elem_json(&self, a: &Fe) -> Value {
        json!(a.0)
    }
}

/// Tame-symbol coordinates of `K_2^M(F_q(t))` at finite places; values live
/// in the residue fields and trivial coordinates are omitted.
pub type TameCoordinates = BTreeMap<Place, Fe>;

impl RationalFunctionField {
    /// Tame symbol at `x` with the convention `{pi, u} -> u(x)`:
    /// `(-1)^(ab) w^a / u^b` for `f = u pi^a`, `g = w pi^b`.
    pub fn tame_symbol(&self, f: &RationalFunction, g: &RationalFunction, rf: &ResidueField) -> Fe {
        let big = rf.field();
        let (a, u) = f.unit_part(rf);
        let (b, w) = g.unit_part(rf);
        let mut t = big.div(big.pow(w, a), big.pow(u, b));
        if (a * b).rem_euclid(2) == 1 {
            t = big.neg(t);
        }
        t
    }

    /// Milnor residue at `x` of a degree-two element given by coordinates.
    /// At infinity it follows from Weil reciprocity.
    pub fn k2_residue(&self, k2: &TameCoordinates, x: &Place) -> Fe {
        match x {
            Place::Infinity => {
                let mut prod = Fe(1);
                for (p, v) in k2 {
                    let rf = self.residue_field(p);
                    prod = self.base.mul(prod, rf.norm(*v));
                }
                self.base.inv(prod)
            }
            _ => k2.get(x).copied().unwrap_or(Fe(1)),
        }
    }
}

impl MwField for RationalFunctionField {
    type K2 = TameCoordinates;

    fn k2_symbol(&self, f: &RationalFunction, g: &RationalFunction) -> TameCoordinates {
        let places: BTreeSet<Place> = f
            .factors()
            .keys()
            .chain(g.factors().keys())
            .cloned()
            .collect();
        let mut out = TameCoordinates::new();
        for p in places {
            let rf = self.residue_field(&p);
            let t = self.tame_symbol(f, g, &rf);
            if t != Fe(1) {
                out.insert(p, t);
            }
        }
        out
    }

    fn k2_add(&self, a: &TameCoordinates, b: &TameCoordinates) -> TameCoordinates {
        let mut out = a.clone();
        for (p, v) in b {
            let rf = self.residue_field(p);
            let cur = out.get(p).copied().unwrap_or(Fe(1));
            let prod = rf.field().mul(cur, *v);
            if prod == Fe(1) {
                out.remove(p);
            } else {
                out.insert(p.clone(), prod);
            }
        }
        out
    }

    fn k2_neg(&self, a: &TameCoordinates) -> TameCoordinates {
        a.iter()
            .map(|(p, v)| (p.clone(), self.residue_field(p).field().inv(*v)))
            .collect()
    }

    fn k2_compatible(&self, k2: &TameCoordinates, w: &Self::Witt) -> bool {
        if !self.witt_in_i2(w) {
            return false;
        }
        // K_2/2 embeds into the sum of k(p)^*/2 over finite places, matching
        // the signed discriminants of the second residues of w
        let rep = self.witt_representative(w);
        let mut places: BTreeSet<Place> = k2.keys().cloned().collect();
        for e in &rep {
            places.extend(e.factors().keys().cloned());
        }
        places.into_iter().all(|p| {
            let pi = RationalFunction::place_power(&p, 1);
            let (rf, r) = second_residue(self, &rep, &p, &pi).expect("canonical uniformizer");
            let big = rf.field();
            let reps = r.representative(big);
            let sdisc = big.signed_discriminant(&reps);
            let t = k2.get(&p).copied().unwrap_or(Fe(1));
            big.is_square_unit(sdisc) == big.is_square_unit(t)
        })
    }

    fn k2_json(&self, a: &TameCoordinates) -> Value {
        Value::Array(
            a.iter()
                .map(|(p, v)| json!([serde_json::to_value(p).expect("place json"), v.0]))
                .collect(),
        )
    }

    fn elem_json(&self, a: &RationalFunction) -> Value {
        serde_json::to_value(a).expect("rational function json")
    }
}

/// Milnor component of a Milnor-Witt element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Milnor<E, K> {
    /// Negative degrees carry no Milnor part.
    None,
    Int(i64),
    Unit(E),
    K2(K),
}

/// `K_n^MW` element: a compatible pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MwElement<E, K, W> {
    pub degree: i32,
    pub milnor: Milnor<E, K>,
    pub witt: W,
}

pub type Mw<F> = MwElement<<F as QuadField>::Elem, <F as MwField>::K2, <F as QuadField>::Witt>;

fn check_degree(n: i32) -> Result<()> {
    if (-2..=2).contains(&n) {
        Ok(())
    } else {
        Err(Error::DegreeOutOfRange(n))
    }
}

pub fn mw_zero<F: MwField>(field: &F, degree: i32) -> Result<Mw<F>> {
    check_degree(degree)?;
    let milnor = match degree {
        0 => Milnor::Int(0),
        1 => Milnor::Unit(field.one()),
        2 => Milnor::K2(F::K2::default()),
        _ => Milnor::None,
    };
    Ok(MwElement {
        degree,
        milnor,
        witt: field.witt_zero(),
    })
}

/// `n` in `K_0^MW = GW`, i.e. `n<1>`.
pub fn mw_integer<F: MwField>(field: &F, n: i64) -> Mw<F> {
    let g = crate::quadform::GwElement::integer(field, n);
    MwElement {
        degree: 0,
        milnor: Milnor::Int(n),
        witt: g.witt,
    }
}

/// `<a>` in degree 0.
pub fn mw_unit_form<F: MwField>(field: &F, a: &F::Elem) -> Result<Mw<F>> {
    if field.is_zero_elem(a) {
        return Err(Error::ZeroInput);
    }
    Ok(MwElement {
        degree: 0,
        milnor: Milnor::Int(1),
        witt: field.witt_unit(a),
    })
}

/// `h = 2 + eta[-1]`.
pub fn mw_hyperbolic<F: MwField>(field: &F) -> Mw<F> {
    MwElement {
        degree: 0,
        milnor: Milnor::Int(2),
        witt: field.witt_zero(),
    }
}

/// `mw_symbol`: `[a] = (a, <a> - <1>)`.
pub fn mw_symbol<F: MwField>(field: &F, a: &F::Elem) -> Result<Mw<F>> {
    if field.is_zero_elem(a) {
        return Err(Error::ZeroInput);
    }
    Ok(MwElement {
        degree: 1,
        milnor: Milnor::Unit(a.clone()),
        witt: field.witt_pfister(a),
    })
}

/// `[a][b] = ({a, b}, e(a) e(b))`.
pub fn mw_symbol2<F: MwField>(field: &F, a: &F::Elem, b: &F::Elem) -> Result<Mw<F>> {
    if field.is_zero_elem(a) || field.is_zero_elem(b) {
        return Err(Error::ZeroInput);
    }
    Ok(MwElement {
        degree: 2,
        milnor: Milnor::K2(field.k2_symbol(a, b)),
        witt: field.witt_mul(&field.witt_pfister(a), &field.witt_pfister(b)),
    })
}

pub fn mw_add<F: MwField>(field: &F, x: &Mw<F>, y: &Mw<F>) -> Result<Mw<F>> {
    if x.degree != y.degree {
        return Err(Error::Incompatible(format!(
            "degrees {} and {} differ",
            x.degree, y.degree
        )));
    }
    let milnor = match (&x.milnor, &y.milnor) {
        (Milnor::None, Milnor::None) => Milnor::None,
        (Milnor::Int(a), Milnor::Int(b)) => Milnor::Int(a + b),
        (Milnor::Unit(a), Milnor::Unit(b)) => Milnor::Unit(field.mul(a, b)),
        (Milnor::K2(a), Milnor::K2(b)) => Milnor::K2(field.k2_add(a, b)),
        _ => {
            return Err(Error::Incompatible(
                "Milnor parts of different shapes".into(),
            ))
        }
    };
    Ok(MwElement {
        degree: x.degree,
        milnor,
        witt: field.witt_add(&x.witt, &y.witt),
    })
}

pub fn mw_neg<F: MwField>(field: &F, x: &Mw<F>) -> Mw<F> {
    let milnor = match &x.milnor {
        Milnor::None => Milnor::None,
        Milnor::Int(a) => Milnor::Int(-a),
        Milnor::Unit(a) => Milnor::Unit(field.inv(a)),
        Milnor::K2(a) => Milnor::K2(field.k2_neg(a)),
    };
    MwElement {
        degree: x.degree,
        milnor,
        witt: field.witt_neg(&x.witt),
    }
}

pub fn mw_sub<F: MwField>(field: &F, x: &Mw<F>, y: &Mw<F>) -> Result<Mw<F>> {
    mw_add(field, x, &mw_neg(field, y))
}

/// `mw_eta_mul`: multiplication by `eta`, lowering the degree by one.
pub fn mw_eta_mul<F: MwField>(field: &F, x: &Mw<F>) -> Result<Mw<F>> {
    let n = x.degree - 1;
    check_degree(n)?;
    let mut out = mw_zero(field, n)?;
    out.witt = x.witt.clone();
    Ok(out)
}

/// `mw_unit_scale`: multiplication by `<u>`.
pub fn mw_unit_scale<F: MwField>(field: &F, u: &F::Elem, x: &Mw<F>) -> Result<Mw<F>> {
    if field.is_zero_elem(u) {
        return Err(Error::ZeroInput);
    }
    Ok(MwElement {
        degree: x.degree,
        milnor: x.milnor.clone(),
        witt: field.witt_scale(u, &x.witt),
    })
}

/// `mw_compatible`: the fiber-product condition.
pub fn mw_compatible<F: MwField>(field: &F, milnor: &Milnor<F::Elem, F::K2>, w: &F::Witt) -> bool {
    match milnor {
        Milnor::None => true,
        Milnor::Int(n) => (n.rem_euclid(2) == 1) == field.witt_rank_odd(w),
        Milnor::Unit(f) => {
            let diff = field.witt_sub(w, &field.witt_pfister(f));
            field.witt_in_i2(&diff)
        }
        Milnor::K2(k) => field.k2_compatible(k, w),
    }
}

pub fn is_compatible<F: MwField>(field: &F, x: &Mw<F>) -> bool {
    let shape_ok = matches!(
        (x.degree, &x.milnor),
        (0, Milnor::Int(_)) | (1, Milnor::Unit(_)) | (2, Milnor::K2(_)) | (-2..=-1, Milnor::None)
    );
    shape_ok && mw_compatible(field, &x.milnor, &x.witt)
}

/// One summand `coef * eta^eta_power * <unit> * [s_1]...[s_m]` of a formal sum.
#[derive(Clone, Debug)]
pub struct Term<E> {
    pub coef: i64,
    pub eta_power: u32,
    pub unit: Option<E>,
    pub symbols: Vec<E>,
}

impl<E> Term<E> {
    pub fn degree(&self) -> i32 {
        self.symbols.len() as i32 - self.eta_power as i32
    }
}

/// Evaluates one term.
pub fn mw_term<F: MwField>(field: &F, term: &Term<F::Elem>) -> Result<Mw<F>> {
    let mut x = match term.symbols.as_slice() {
        [] => mw_integer(field, 1),
        [a] => mw_symbol(field, a)?,
        [a, b] => mw_symbol2(field, a, b)?,
        _ => return Err(Error::DegreeOutOfRange(term.symbols.len() as i32)),
    };
    for _ in 0..term.eta_power {
        x = mw_eta_mul(field, &x)?;
    }
    if let Some(u) = &term.unit {
        x = mw_unit_scale(field, u, &x)?;
    }
    let mut acc = mw_zero(field, x.degree)?;
    let step = if term.coef >= 0 { x } else { mw_neg(field, &x) };
    for _ in 0..term.coef.unsigned_abs() {
        acc = mw_add(field, &acc, &step)?;
    }
    Ok(acc)
}

/// `mw_normalize`: canonical form of a homogeneous formal sum.
pub fn mw_normalize<F: MwField>(field: &F, terms: &[Term<F::Elem>]) -> Result<Mw<F>> {
    let degree = terms.first().map_or(0, |t| t.degree());
    if let Some(t) = terms.iter().find(|t| t.degree() != degree) {
        return Err(Error::Incompatible(format!(
            "inhomogeneous sum: degrees {degree} and {}",
            t.degree()
        )));
    }
    let mut acc = mw_zero(field, degree)?;
    for t in terms {
        acc = mw_add(field, &acc, &mw_term(field, t)?)?;
    }
    if !is_compatible(field, &acc) {
        return Err(Error::Incompatible(
            "normal form fails the pullback condition".into(),
        ));
    }
    Ok(acc)
}

pub fn mw_is_zero<F: MwField>(field: &F, x: &Mw<F>) -> bool {
    let milnor_zero = match &x.milnor {
        Milnor::None => true,
        Milnor::Int(n) => *n == 0,
        Milnor::Unit(u) => *u == field.one(),
        Milnor::K2(k) => field.k2_is_zero(k),
    };
    milnor_zero && field.witt_is_zero(&x.witt)
}

/// JSON form `{"degree": n, "milnor": ..., "witt": ...}`.
pub fn mw_json<F: MwField>(field: &F, x: &Mw<F>) -> Value {
    let milnor = match &x.milnor {
        Milnor::None => Value::Null,
        Milnor::Int(n) => json!(n),
        Milnor::Unit(u) => field.elem_json(u),
        Milnor::K2(k) => field.k2_json(k),
    };
    let entries: Vec<Value> = field
        .witt_representative(&x.witt)
        .iter()
        .map(|e| field.elem_json(e))
        .collect();
    json!({
        "degree": x.degree,
        "milnor": milnor,
        "witt": {"field": field.name(), "entries": entries},
    })
}

/// Element over a residue field, together with that field.
pub struct ResidueValue {
    pub residue_field: Arc<ResidueField>,
    pub value: Mw<FiniteField>,
}

/// `mw_residue`: the boundary `K_n^MW(F_q(t)) -> K_(n-1)^MW(k(x))` for the
/// uniformizer `pi`.
pub fn mw_residue(
    field: &RationalFunctionField,
    x: &Mw<RationalFunctionField>,
    place: &Place,
    pi: &RationalFunction,
) -> Result<ResidueValue> {
    if !(0..=2).contains(&x.degree) {
        return Err(Error::DegreeOutOfRange(x.degree));
    }
    let rep = field.witt_representative(&x.witt);
    let (rf, witt) = second_residue(field, &rep, place, pi)?;
    let milnor = match &x.milnor {
        Milnor::Int(_) => Milnor::None,
        Milnor::Unit(f) => Milnor::Int(f.valuation(place)),
        Milnor::K2(k) => Milnor::Unit(field.k2_residue(k, place)),
        Milnor::None => return Err(Error::Incompatible("missing Milnor part".into())),
    };
    let value = MwElement {
        degree: x.degree - 1,
        milnor,
        witt,
    };
    debug_assert!(is_compatible(&**rf.field(), &value));
    Ok(ResidueValue {
        residue_field: rf,
        value,
    })
}

/// `mw_specialize`: componentwise reduction at a place where `x` is regular.
pub fn mw_specialize(
    field: &RationalFunctionField,
    x: &Mw<RationalFunctionField>,
    place: &Place,
) -> Result<ResidueValue> {
    let ramified = || Error::RamifiedAt(place.to_string());
    let pi = crate::p1geom::canonical_uniformizer(place);
    let rep = field.witt_representative(&x.witt);
    let (rf, second) = second_residue(field, &rep, place, &pi)?;
    if !second.is_zero() {
        return Err(ramified());
    }
    let (_, witt) = first_residue(field, &rep, place, &pi)?;
    let milnor = match &x.milnor {
        Milnor::None => Milnor::None,
        Milnor::Int(n) => Milnor::Int(*n),
        Milnor::Unit(f) => Milnor::Unit(f.reduce(&rf).map_err(|_| ramified())?),
        Milnor::K2(k) => {
            if field.k2_residue(k, place) != Fe(1) {
                return Err(ramified());
            }
            Milnor::K2(())
        }
    };
    Ok(ResidueValue {
        residue_field: rf,
        value: MwElement {
            degree: x.degree,
            milnor,
            witt,
        },
    })
}
