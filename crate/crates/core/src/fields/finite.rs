//! Table-driven finite fields `F_{p^n}` for odd `p`.
//!
//! An element is stored as its integer code `sum c_i p^i`, where `c_i` are
//! the coefficients of its representative polynomial in the generator `u`
//! of `F_p[u]/(modulus)`. The modulus is the least monic irreducible of the
//! requested degree when polynomials are ordered by code.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::error::{Error, Result};

/// Largest field order for which tables are built.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

/// A field element, identified by its code.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub struct FiniteField {
    p: u32,
    degree: u32,
    order: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    minus_one: Fe,
    least_nonsquare: Fe,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.order)
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.degree == other.degree
    }
}

impl Eq for FiniteField {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits `q` into `(p, n)` with `q = p^n`, `p` an odd prime.
pub fn split_prime_power(q: u64) -> Result<(u32, u32)> {
    if q < 3 {
        return Err(Error::InvalidField(q));
    }
    let p = prime_factors(q)[0];
    if p == 2 {
        return Err(Error::InvalidField(q));
    }
    let mut n = 0;
    let mut rest = q;
    while rest.is_multiple_of(p) {
        rest /= p;
        n += 1;
    }
    if rest != 1 {
        return Err(Error::InvalidField(q));
    }
    Ok((p as u32, n))
}

type FieldCache = Mutex<HashMap<(u32, u32), Arc<FiniteField>>>;

fn cache() -> &'static FieldCache {
    static CACHE: OnceLock<FieldCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The field with `q` elements.
pub fn field_of_order(q: u64) -> Result<Arc<FiniteField>> {
    let (p, n) = split_prime_power(q)?;
    field(p, n)
}

/// The field `F_{p^degree}`; construction is cached process-wide.
pub fn field(p: u32, degree: u32) -> Result<Arc<FiniteField>> {
    if p == 2 || !is_prime(p as u64) || degree == 0 {
        return Err(Error::InvalidField(
            (p as u64).saturating_pow(degree.max(1)),
        ));
    }
    let order = (p as u64)
        .checked_pow(degree)
        .filter(|o| *o <= MAX_FIELD_ORDER)
        .ok_or(Error::FieldTooLarge((p as u64).saturating_pow(degree)))?;
    if let Some(f) = cache().lock().expect("field cache").get(&(p, degree)) {
        return Ok(f.clone());
    }
    let modulus = if degree == 1 {
        vec![0, 1]
    } else {
        least_irreducible(p, degree)?
    };
    let f = Arc::new(FiniteField::build(p, degree, order as u32, modulus));
    let mut guard = cache().lock().expect("field cache");
    Ok(guard.entry((p, degree)).or_insert(f).clone())
}

fn least_irreducible(p: u32, degree: u32) -> Result<Vec<u32>> {
    let prime = field(p, 1)?;
    let count = (p as u64).pow(degree);
    for code in 0..count {
        let mut coeffs = Vec::with_capacity(degree as usize + 1);
        let mut c = code;
        for _ in 0..degree {
            coeffs.push(Fe((c % p as u64) as u32));
            c /= p as u64;
        }
        coeffs.push(Fe(1));
        let poly = Poly::new(coeffs);
        if poly.is_irreducible(&prime) {
            return Ok(poly.coeffs().iter().map(|c| c.0).collect());
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FiniteField {
    fn build(p: u32, degree: u32, order: u32, modulus: Vec<u32>) -> Self {
        let d = degree as usize;
        let to_digits = |mut c: u32| {
            let mut v = vec![0u32; d];
            for x in v.iter_mut() {
                *x = c % p;
                c /= p;
            }
            v
        };
        let from_digits = |v: &[u32]| v.iter().rev().fold(0u32, |acc, x| acc * p + x);
        let slow_mul = |a: &[u32], b: &[u32]| -> Vec<u32> {
            let mut prod = vec![0u64; 2 * d - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    prod[i + j] += (*x as u64) * (*y as u64);
                }
            }
            let mut prod: Vec<u32> = prod.into_iter().map(|v| (v % p as u64) as u32).collect();
            for k in (d..prod.len()).rev() {
                let c = prod[k];
                if c == 0 {
                    continue;
                }
                prod[k] = 0;
                for (i, m) in modulus.iter().take(d).enumerate() {
                    let t = k - d + i;
                    prod[t] = ((prod[t] as u64 + (p - c) as u64 * *m as u64) % p as u64) as u32;
                }
            }
            prod.truncate(d);
            prod
        };
        let slow_pow = |a: &[u32], mut e: u64| -> Vec<u32> {
            let mut base = a.to_vec();
            let mut acc = to_digits(1);
            while e > 0 {
                if e & 1 == 1 {
                    acc = slow_mul(&acc, &base);
                }
                base = slow_mul(&base, &base);
                e >>= 1;
            }
            acc
        };
        let n = order as u64 - 1;
        let factors = prime_factors(n);
        let one = to_digits(1);
        let generator = (2..order)
            .map(to_digits)
            .find(|g| factors.iter().all(|r| slow_pow(g, n / r) != one))
            .unwrap_or_else(|| to_digits(1));
        let mut exp = Vec::with_capacity(n as usize);
        let mut log = vec![u32::MAX; order as usize];
        let mut cur = one.clone();
        for k in 0..n {
            let code = from_digits(&cur);
            exp.push(code);
            log[code as usize] = k as u32;
            cur = slow_mul(&cur, &generator);
        }
        let minus_one = Fe(exp[(n / 2) as usize]);
        let least_nonsquare = Fe((1..order)
            .find(|c| log[*c as usize] % 2 == 1)
            .expect("odd order fields have nonsquares"));
        FiniteField {
            p,
            degree,
            order,
            modulus,
            exp,
            log,
            minus_one,
            least_nonsquare,
        }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficient codes of the defining modulus over `F_p`, ascending.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn name(&self) -> String {
        format!("F_{}", self.order)
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        Fe(1)
    }

    pub fn minus_one(&self) -> Fe {
        self.minus_one
    }

    /// The nonsquare with the least code.
    pub fn least_nonsquare(&self) -> Fe {
        self.least_nonsquare
    }

    /// The primitive element used for the log tables.
    pub fn generator(&self) -> Fe {
        Fe(self.exp.get(1).copied().unwrap_or(1))
    }

    /// Image of an integer under `Z -> F_p -> F`.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.0 < self.order
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.order).map(Fe)
    }

    pub fn units(&self) -> impl Iterator<Item = Fe> + '_ {
        (1..self.order).map(Fe)
    }

    pub fn digits(&self, a: Fe) -> Vec<u32> {
        let mut c = a.0;
        (0..self.degree)
            .map(|_| {
                let d = c % self.p;
                c /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> Fe {
        Fe(digits
            .iter()
            .rev()
            .fold(0u32, |acc, x| acc * self.p + (x % self.p)))
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.degree == 1 {
            return Fe((a.0 + b.0) % self.p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        while x > 0 || y > 0 {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        Fe(out)
    }

    pub fn neg(&self, a: Fe) -> Fe {
        if self.degree == 1 {
            return Fe((self.p - a.0) % self.p);
        }
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        while x > 0 {
            out += ((self.p - x % self.p) % self.p) * place;
            x /= self.p;
            place *= self.p;
        }
        Fe(out)
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe(0);
        }
        let n = self.order - 1;
        let k = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % n as u64;
        Fe(self.exp[k as usize])
    }

    /// Multiplicative inverse. Panics on zero; callers validate units first.
    pub fn inv(&self, a: Fe) -> Fe {
        assert!(a.0 != 0, "inverse of zero in {}", self.name());
        let n = self.order - 1;
        let l = self.log[a.0 as usize];
        Fe(self.exp[((n - l) % n) as usize])
    }

    pub fn try_inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            Err(Error::ZeroInput)
        } else {
            Ok(self.inv(a))
        }
    }

    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fe, e: i64) -> Fe {
        if a.0 == 0 {
            assert!(e >= 0, "negative power of zero");
            return if e == 0 { Fe(1) } else { Fe(0) };
        }
        let n = (self.order - 1) as i64;
        let k = (self.log[a.0 as usize] as i64 * e.rem_euclid(n)).rem_euclid(n);
        Fe(self.exp[k as usize])
    }

    /// Discrete logarithm to the base [`FiniteField::generator`].
    pub fn log(&self, a: Fe) -> u32 {
        assert!(a.0 != 0, "logarithm of zero");
        self.log[a.0 as usize]
    }

    pub fn exp(&self, k: i64) -> Fe {
        let n = (self.order - 1) as i64;
        Fe(self.exp[k.rem_euclid(n) as usize])
    }

    /// Euler's criterion: `a^((q-1)/2) = 1`.
    pub fn is_square(&self, a: Fe) -> Result<bool> {
        if a.0 == 0 {
            return Err(Error::ZeroInput);
        }
        Ok(self.pow(a, ((self.order - 1) / 2) as i64) == Fe(1))
    }

    /// Square test for a known unit, via the log parity.
    pub fn is_square_unit(&self, a: Fe) -> bool {
        self.log(a).is_multiple_of(2)
    }

    /// `1` for squares, the least nonsquare otherwise.
    pub fn square_class_rep(&self, a: Fe) -> Fe {
        if self.is_square_unit(a) {
            Fe(1)
        } else {
            self.least_nonsquare
        }
    }

    pub fn minus_one_is_square(&self) -> bool {
        self.order % 4 == 1
    }

    /// Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, self.p as i64)
    }

    /// Inverse Frobenius `a -> a^(1/p)`.
    pub fn pth_root(&self, a: Fe) -> Fe {
        self.pow(a, (self.p as i64).pow(self.degree - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares_examples() {
        let f3 = field_of_order(3).unwrap();
        assert!(!f3.is_square(Fe(2)).unwrap());
        let f5 = field_of_order(5).unwrap();
        assert!(f5.is_square(Fe(4)).unwrap());
        let f9 = field_of_order(9).unwrap();
        assert!(f9.is_square(f9.minus_one()).unwrap());
        assert_eq!(f9.is_square(Fe(0)), Err(Error::ZeroInput));
    }

    #[test]
    fn f9_modulus_is_least() {
        // x^2 + 1 is the least monic irreducible quadratic over F_3
        let f9 = field_of_order(9).unwrap();
        assert_eq!(f9.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn rejects_even_and_composite() {
        assert!(field_of_order(2).is_err());
        assert!(field_of_order(8).is_err());
        assert!(field_of_order(15).is_err());
        assert!(matches!(field(3, 30), Err(Error::FieldTooLarge(_))));
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for q in [3u64, 5, 7, 9, 25, 27] {
            let f = field_of_order(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), Fe(0));
                if a.0 != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), Fe(1));
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    for c in [Fe(1), Fe((q - 1) as u32)] {
                        let lhs = f.mul(a, f.add(b, c));
                        let rhs = f.add(f.mul(a, b), f.mul(a, c));
                        assert_eq!(lhs, rhs, "distributivity in F_{q}");
                    }
                }
            }
            assert_eq!(f.add(f.minus_one(), Fe(1)), Fe(0));
        }
    }

    #[test]
    fn frobenius_roundtrip() {
        let f = field_of_order(27).unwrap();
        for a in f.elements() {
            assert_eq!(f.frobenius(f.pth_root(a)), a);
        }
    }
}
