//! Dense univariate polynomials over a [`FiniteField`], with factorization
//! (square-free split, distinct-degree, then seeded equal-degree splitting).

use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::finite::{Fe, FiniteField};

const SPLIT_SEED: u64 = 0x6d77_6375_7276_6531;

/// Coefficients ascending, no trailing zeros. The zero polynomial is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    coeffs: Vec<Fe>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last() == Some(&Fe(0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_codes(codes: &[u32]) -> Self {
        Self::new(codes.iter().map(|c| Fe(*c)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly {
            coeffs: vec![Fe(1)],
        }
    }

    pub fn constant(c: Fe) -> Self {
        Self::new(vec![c])
    }

    /// The variable `t`.
    pub fn x() -> Self {
        Poly {
            coeffs: vec![Fe(0), Fe(1)],
        }
    }

    /// `t - a`
    pub fn linear(f: &FiniteField, a: Fe) -> Self {
        Poly {
            coeffs: vec![f.neg(a), Fe(1)],
        }
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn codes(&self) -> Vec<u32> {
        self.coeffs.iter().map(|c| c.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [Fe(1)]
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Fe {
        self.coeffs.last().copied().unwrap_or(Fe(0))
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe(0))
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == Fe(1)
    }

    pub fn add(&self, other: &Poly, f: &FiniteField) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| f.add(self.coeff(i), other.coeff(i)))
                .collect(),
        )
    }

    pub fn neg(&self, f: &FiniteField) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| f.neg(*c)).collect())
    }

    pub fn sub(&self, other: &Poly, f: &FiniteField) -> Poly {
        self.add(&other.neg(f), f)
    }

    pub fn scale(&self, c: Fe, f: &FiniteField) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| f.mul(*a, c)).collect())
    }

    pub fn mul(&self, other: &Poly, f: &FiniteField) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Fe(0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.0 == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(*a, *b));
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, mut e: u64, f: &FiniteField) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f);
            }
            base = base.mul(&base, f);
            e >>= 1;
        }
        acc
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn divrem(&self, divisor: &Poly, f: &FiniteField) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let inv_lead = f.inv(divisor.lead());
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Fe(0); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = rem[k];
            if c.0 == 0 {
                continue;
            }
            let factor = f.mul(c, inv_lead);
            quot[k - dd] = factor;
            for (i, d) in divisor.coeffs.iter().enumerate() {
                let idx = k - dd + i;
                rem[idx] = f.sub(rem[idx], f.mul(factor, *d));
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn rem(&self, divisor: &Poly, f: &FiniteField) -> Poly {
        self.divrem(divisor, f).1
    }

    /// `(lead, self / lead)`.
    pub fn monic_parts(&self, f: &FiniteField) -> (Fe, Poly) {
        let lead = self.lead();
        if lead.0 == 0 || lead.0 == 1 {
            return (lead, self.clone());
        }
        (lead, self.scale(f.inv(lead), f))
    }

    pub fn monic(&self, f: &FiniteField) -> Poly {
        self.monic_parts(f).1
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Poly, f: &FiniteField) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    pub fn derivative(&self, f: &FiniteField) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| f.mul(*c, f.from_int(i as i64)))
                .collect(),
        )
    }

    /// Horner evaluation in the coefficient field.
    pub fn eval(&self, a: Fe, f: &FiniteField) -> Fe {
        self.coeffs
            .iter()
            .rev()
            .fold(Fe(0), |acc, c| f.add(f.mul(acc, a), *c))
    }

    /// `self^e mod m`.
    pub fn powmod(&self, mut e: u64, m: &Poly, f: &FiniteField) -> Poly {
        let mut base = self.rem(m, f);
        let mut acc = Poly::one().rem(m, f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f).rem(m, f);
            }
            base = base.mul(&base, f).rem(m, f);
            e >>= 1;
        }
        acc
    }

    /// `self^(q^k) mod m` by repeated Frobenius.
    fn frobenius_power(&self, k: usize, m: &Poly, f: &FiniteField) -> Poly {
        let q = f.order() as u64;
        let mut h = self.rem(m, f);
        for _ in 0..k {
            h = h.powmod(q, m, f);
        }
        h
    }

    /// Rabin's test.
    pub fn is_irreducible(&self, f: &FiniteField) -> bool {
        let Some(n) = self.degree() else {
            return false;
        };
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let m = self.monic(f);
        let x = Poly::x();
        if x.frobenius_power(n, &m, f) != x.rem(&m, f) {
            return false;
        }
        let mut r = 2;
        let mut rest = n;
        while rest > 1 {
            if rest % r == 0 {
                let h = x.frobenius_power(n / r, &m, f).sub(&x, f);
                if !h.gcd(&m, f).is_one() {
                    return false;
                }
                while rest % r == 0 {
                    rest /= r;
                }
            }
            r += 1;
        }
        true
    }

    /// Replace every coefficient by its p-th root and `t^p` by `t`.
    fn pth_root(&self, f: &FiniteField) -> Poly {
        let p = f.characteristic() as usize;
        Poly::new(
            self.coeffs
                .iter()
                .step_by(p)
                .map(|c| f.pth_root(*c))
                .collect(),
        )
    }

    /// Square-free decomposition of a monic polynomial: pairs
    /// `(g, e)` with `self = prod g^e`, each `g` square-free and coprime.
    pub fn squarefree_decomposition(&self, f: &FiniteField) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        self.squarefree_into(f, 1, &mut out);
        out
    }

    fn squarefree_into(&self, f: &FiniteField, scale: u32, out: &mut Vec<(Poly, u32)>) {
        if self.degree().unwrap_or(0) == 0 {
            return;
        }
        let p = f.characteristic();
        let d = self.derivative(f);
        if d.is_zero() {
            self.pth_root(f).squarefree_into(f, scale * p, out);
            return;
        }
        let mut c = self.gcd(&d, f);
        let mut w = self.divrem(&c, f).0;
        let mut i = 1;
        while !w.is_one() {
            let y = w.gcd(&c, f);
            let factor = w.divrem(&y, f).0;
            if !factor.is_one() {
                out.push((factor, i * scale));
            }
            w = y;
            c = c.divrem(&w, f).0;
            i += 1;
        }
        if !c.is_one() {
            c.pth_root(f).squarefree_into(f, scale * p, out);
        }
    }

    /// Distinct-degree factorization of a monic square-free polynomial.
    pub fn distinct_degree(&self, f: &FiniteField) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let mut rest = self.clone();
        let x = Poly::x();
        let mut h = x.clone();
        let mut d = 1;
        while let Some(n) = rest.degree() {
            if n < 2 * d {
                if n > 0 {
                    out.push((rest.clone(), n));
                }
                break;
            }
            h = h.powmod(f.order() as u64, &rest, f);
            let g = h.sub(&x, f).gcd(&rest, f);
            if !g.is_one() {
                rest = rest.divrem(&g, f).0;
                h = h.rem(&rest, f);
                out.push((g, d));
            }
            d += 1;
        }
        out
    }

    /// Equal-degree splitting (Cantor-Zassenhaus) of a monic square-free
    /// product of irreducibles of degree `d`.
    pub fn equal_degree(&self, d: usize, f: &FiniteField, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let n = self.degree().unwrap_or(0);
        if n == d {
            return vec![self.clone()];
        }
        let half = (f.order() as u64 - 1) / 2;
        loop {
            let a = Poly::new((0..n).map(|_| Fe(rng.random_range(0..f.order()))).collect());
            if a.degree().unwrap_or(0) == 0 {
                continue;
            }
            // a^((q^d - 1)/2) = (a * a^q * ... * a^(q^(d-1)))^((q-1)/2)
            let mut b = a.rem(self, f);
            let mut norm = b.clone();
            for _ in 1..d {
                b = b.powmod(f.order() as u64, self, f);
                norm = norm.mul(&b, f).rem(self, f);
            }
            let h = norm.powmod(half, self, f).sub(&Poly::one(), f);
            let g = h.gcd(self, f);
            let gd = g.degree().unwrap_or(0);
            if gd > 0 && gd < n {
                let other = self.divrem(&g, f).0;
                let mut parts = g.equal_degree(d, f, rng);
                parts.extend(other.equal_degree(d, f, rng));
                return parts;
            }
        }
    }

    /// Complete factorization: `(leading coefficient, [(monic irreducible, multiplicity)])`,
    /// factors sorted by degree, then by coefficients from the top down.
    pub fn factor(&self, f: &FiniteField) -> (Fe, Vec<(Poly, u32)>) {
        let (lead, monic) = self.monic_parts(f);
        let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
        let mut out: Vec<(Poly, u32)> = Vec::new();
        for (sqf, e) in monic.squarefree_decomposition(f) {
            for (block, d) in sqf.distinct_degree(f) {
                for g in block.equal_degree(d, f, &mut rng) {
                    match out.iter_mut().find(|(h, _)| *h == g) {
                        Some(entry) => entry.1 += e,
                        None => out.push((g, e)),
                    }
                }
            }
        }
        out.sort_by(|a, b| poly_place_cmp(&a.0, &b.0));
        (lead, out)
    }

    /// Distinct roots in the coefficient field, ascending by code.
    pub fn roots(&self, f: &FiniteField) -> Vec<Fe> {
        if self.is_zero() {
            return f.elements().collect();
        }
        let (_, factors) = self.factor(f);
        let mut roots: Vec<Fe> = factors
            .iter()
            .filter(|(g, _)| g.degree() == Some(1))
            .map(|(g, _)| f.neg(g.coeff(0)))
            .collect();
        roots.sort();
        roots
    }

    /// Human-readable form in the variable `t`, coefficients as codes.
    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.0 == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            terms.push(match (c.0, i) {
                (_, 0) => c.0.to_string(),
                (1, _) => mono,
                _ => format!("{}{}", c.0, mono),
            });
        }
        terms.join(" + ")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// Total order used for places: degree first, then coefficients compared
/// from the leading one down.
pub fn poly_place_cmp(a: &Poly, b: &Poly) -> std::cmp::Ordering {
    a.coeffs
        .len()
        .cmp(&b.coeffs.len())
        .then_with(|| a.coeffs.iter().rev().cmp(b.coeffs.iter().rev()))
}
