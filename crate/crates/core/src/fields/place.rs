//! Closed points of the projective line over `F_q`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use super::finite::{Fe, FiniteField};
use super::poly::{poly_place_cmp, Poly};

/// A monic irreducible polynomial over the base field, or the point at
/// infinity.
///
/// Places are ordered by degree, with infinity placed after the finite
/// rational points, then by coefficients from the leading one down.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Finite(Poly),
    Infinity,
}

impl Place {
    /// The place `(t)`.
    pub fn zero() -> Self {
        Place::Finite(Poly::x())
    }

    /// The place `(t - a)`.
    pub fn rational(f: &FiniteField, a: Fe) -> Self {
        Place::Finite(Poly::linear(f, a))
    }

    /// Builds a finite place, checking that `p` is monic and irreducible.
    pub fn finite(p: Poly, f: &FiniteField) -> Option<Self> {
        (p.is_monic() && p.is_irreducible(f)).then_some(Place::Finite(p))
    }

    pub fn degree(&self) -> u32 {
        match self {
            Place::Finite(p) => p.degree().unwrap_or(0) as u32,
            Place::Infinity => 1,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    pub fn poly(&self) -> Option<&Poly> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Infinity => None,
        }
    }
}

impl Ord for Place {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| match (self, other) {
                (Place::Infinity, Place::Infinity) => Ordering::Equal,
                (Place::Infinity, _) => Ordering::Greater,
                (_, Place::Infinity) => Ordering::Less,
                (Place::Finite(a), Place::Finite(b)) => poly_place_cmp(a, b),
            })
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "({p})"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Place::Infinity => s.serialize_str("inf"),
            Place::Finite(p) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("poly", &p.codes())?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Poly { poly: Vec<u32> },
        }
        match Raw::deserialize(d)? {
            Raw::Name(n) if n == "inf" => Ok(Place::Infinity),
            Raw::Name(n) => Err(de::Error::custom(format!("unknown place {n:?}"))),
            Raw::Poly { poly } => Ok(Place::Finite(Poly::from_codes(&poly))),
        }
    }
}

type PlaceCache = Mutex<HashMap<(u32, u32), Arc<Vec<Place>>>>;

fn place_cache() -> &'static PlaceCache {
    static CACHE: OnceLock<PlaceCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Finite places of exact degree `d`, in place order.
pub fn finite_places_of_degree(f: &FiniteField, d: u32) -> Arc<Vec<Place>> {
    let key = (f.order(), d);
    if let Some(v) = place_cache().lock().expect("place cache").get(&key) {
        return v.clone();
    }
    let q = f.order() as u64;
    let mut out = Vec::new();
    for code in 0..q.pow(d) {
        let mut coeffs = Vec::with_capacity(d as usize + 1);
        let mut c = code;
        for _ in 0..d {
            coeffs.push(Fe((c % q) as u32));
            c /= q;
        }
        coeffs.push(Fe(1));
        let p = Poly::new(coeffs);
        if p.is_irreducible(f) {
            out.push(Place::Finite(p));
        }
    }
    out.sort();
    let out = Arc::new(out);
    place_cache()
        .lock()
        .expect("place cache")
        .insert(key, out.clone());
    out
}

/// All places of degree at most `bound`, infinity included, in place order.
pub fn places_up_to(f: &FiniteField, bound: u32) -> Vec<Place> {
    let mut out = Vec::new();
    for d in 1..=bound {
        out.extend(finite_places_of_degree(f, d).iter().cloned());
        if d == 1 {
            out.push(Place::Infinity);
        }
    }
    out
}

/// A formal integer combination of places.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Divisor(pub BTreeMap<Place, i64>);

impl Divisor {
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(p, e)| e * p.degree() as i64).sum()
    }

    pub fn coefficient(&self, p: &Place) -> i64 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        let mut out = self.0.clone();
        for (p, e) in &other.0 {
            let v = out.entry(p.clone()).or_insert(0);
            *v += e;
            if *v == 0 {
                out.remove(p);
            }
        }
        Divisor(out)
    }
}
