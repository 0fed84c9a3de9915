//! Residue fields `k(x)` of places of the projective line.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::finite::{field, Fe, FiniteField};
use super::place::Place;
use super::poly::Poly;
use crate::error::Result;

/// `k(x) = F_q[t]/(p)` realized as a table field `F_{q^d}`, together with
/// the embedding of `F_q` and the class `theta` of `t`.
///
/// The embedding sends the generator of `F_q` over `F_p` to the least-code
/// root of its modulus; `theta` is the least-code root of `p`. At infinity
/// the residue field is `F_q` itself and there is no `theta`.
pub struct ResidueField {
    place: Place,
    base: Arc<FiniteField>,
    field: Arc<FiniteField>,
    embedding: Vec<Fe>,
    restriction: HashMap<Fe, Fe>,
    theta: Option<Fe>,
    nonsquare_lift: Poly,
}

type ResidueCache = Mutex<HashMap<(u32, Place), Arc<ResidueField>>>;

fn cache() -> &'static ResidueCache {
    static CACHE: OnceLock<ResidueCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn least_root(poly: &[Fe], big: &FiniteField) -> Fe {
    big.elements()
        .find(|a| {
            poly.iter()
                .rev()
                .fold(Fe(0), |acc, c| big.add(big.mul(acc, *a), *c))
                == Fe(0)
        })
        .expect("the polynomial splits in the residue field")
}

impl ResidueField {
    /// The residue field of `place` over `base` (cached).
    pub fn of(base: &Arc<FiniteField>, place: &Place) -> Result<Arc<ResidueField>> {
        let key = (base.order(), place.clone());
        if let Some(r) = cache().lock().expect("residue cache").get(&key) {
            return Ok(r.clone());
        }
        let built = Arc::new(Self::build(base, place)?);
        let mut guard = cache().lock().expect("residue cache");
        Ok(guard.entry(key).or_insert(built).clone())
    }

    fn build(base: &Arc<FiniteField>, place: &Place) -> Result<Self> {
        let d = place.degree();
        let k = base.degree();
        let big = if d == 1 {
            base.clone()
        } else {
            field(base.characteristic(), k * d)?
        };
        let embedding: Vec<Fe> = if d == 1 || k == 1 {
            base.elements().collect()
        } else {
            let modulus: Vec<Fe> = base.modulus().iter().map(|c| Fe(*c)).collect();
            let r = least_root(&modulus, &big);
            base.elements()
                .map(|a| {
                    base.digits(a)
                        .iter()
                        .rev()
                        .fold(Fe(0), |acc, c| big.add(big.mul(acc, r), Fe(*c)))
                })
                .collect()
        };
        let restriction = embedding
            .iter()
            .enumerate()
            .map(|(i, e)| (*e, Fe(i as u32)))
            .collect();
        let theta = place.poly().map(|p| {
            let mapped: Vec<Fe> = p.coeffs().iter().map(|c| embedding[c.0 as usize]).collect();
            least_root(&mapped, &big)
        });
        let mut rf = ResidueField {
            place: place.clone(),
            base: base.clone(),
            field: big,
            embedding,
            restriction,
            theta,
            nonsquare_lift: Poly::constant(base.least_nonsquare()),
        };
        if d.is_multiple_of(2) {
            rf.nonsquare_lift = rf.find_nonsquare_lift();
        }
        Ok(rf)
    }

    /// First polynomial of degree `< d` (by code) whose value at theta is a
    /// nonsquare. Needed when `d` is even, since then all constants are
    /// squares in `k(x)`.
    fn find_nonsquare_lift(&self) -> Poly {
        let q = self.base.order() as u64;
        let d = self.place.degree();
        for code in 1..q.pow(d) {
            let mut c = code;
            let coeffs: Vec<Fe> = (0..d)
                .map(|_| {
                    let v = Fe((c % q) as u32);
                    c /= q;
                    v
                })
                .collect();
            let g = Poly::new(coeffs);
            if !self.field.is_square_unit(self.eval_poly(&g)) {
                return g;
            }
        }
        unreachable!("residue fields have nonsquares")
    }

    pub fn place(&self) -> &Place {
        &self.place
    }

    pub fn base(&self) -> &Arc<FiniteField> {
        &self.base
    }

    /// The table field realizing `k(x)`.
    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn theta(&self) -> Option<Fe> {
        self.theta
    }

    pub fn embed(&self, a: Fe) -> Fe {
        self.embedding[a.0 as usize]
    }

    /// Inverse of [`ResidueField::embed`] on its image.
    pub fn restrict(&self, a: Fe) -> Option<Fe> {
        self.restriction.get(&a).copied()
    }

    /// Value of a base polynomial at theta (at infinity: undefined, panics).
    pub fn eval_poly(&self, g: &Poly) -> Fe {
        let theta = self.theta.expect("evaluation at a finite place");
        let big = &self.field;
        g.coeffs()
            .iter()
            .rev()
            .fold(Fe(0), |acc, c| big.add(big.mul(acc, theta), self.embed(*c)))
    }

    /// Norm `k(x) -> F_q`.
    pub fn norm(&self, a: Fe) -> Fe {
        let big = self.field.order() as i64 - 1;
        let small = self.base.order() as i64 - 1;
        let n = self.field.pow(a, big / small);
        self.restrict(n).expect("norms lie in the base field")
    }

    /// A polynomial of degree `< deg x` whose residue is a nonsquare.
    pub fn nonsquare_lift(&self) -> &Poly {
        &self.nonsquare_lift
    }
}
