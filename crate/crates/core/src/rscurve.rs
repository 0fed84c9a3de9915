//! The relative Rost-Schmid complex of `(P^1, D)` with coefficients twisted
//! by the canonical bundle, and its cohomology.
//!
//! For a bound `B`, `S` is the set of places of degree at most `B` and the
//! S-units are generated by a primitive constant `g` and the finite places
//! in `S`. Every generator is an integer combination of atoms built from
//! that basis, so valuations and residue classes are linear in exponent
//! vectors and each boundary column is assembled from a per-place table.
//!
//! `H^1` is the cokernel of the boundary on the admissible generators into
//! the targets at places of `S - D`. `H^0` is read off in closed form: the
//! unramified elements are constants, which only survive when `D` is empty.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::abgrp::{
    kernel_mod, AbGroupInvariants, ClassCoordinates, Cokernel, IntMatrix, LatticeBasis,
};
use crate::error::{Error, Result};
use crate::fields::{
    field_of_order, places_up_to, FiniteField, Place, RationalFunction, ResidueField,
};
use crate::p1geom::{omega_twist_unit, PlaceSet};

/// Default cap on the support bound when stabilization is automatic.
pub const AUTO_BOUND_CAP: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSpec {
    /// Largest bound that may be used.
    Cap(u32),
    Auto,
}

#[derive(Clone, Debug)]
pub struct RsProblem {
    pub base: Arc<FiniteField>,
    pub removed: PlaceSet,
    /// The complex uses `K_(l+1)^MW` generically and `K_l^MW` at points.
    pub l: i32,
    pub bound: BoundSpec,
}

impl RsProblem {
    pub fn new(q: u64, removed: PlaceSet, l: i32, bound: BoundSpec) -> Result<Self> {
        let base = field_of_order(q)?;
        if !(-1..=1).contains(&l) {
            return Err(Error::DegreeOutOfRange(l));
        }
        if let BoundSpec::Cap(b) = bound {
            let needed = removed.max_degree();
            if b < needed.max(1) {
                return Err(Error::BoundTooSmall {
                    bound: b,
                    needed: needed.max(1),
                });
            }
        }
        Ok(RsProblem {
            base,
            removed,
            l,
            bound,
        })
    }

    pub fn q(&self) -> u64 {
        self.base.order() as u64
    }

    pub fn start_bound(&self) -> u32 {
        self.removed.max_degree().max(1)
    }

    pub fn cap(&self) -> u32 {
        match self.bound {
            BoundSpec::Cap(b) => b,
            BoundSpec::Auto => AUTO_BOUND_CAP.max(self.start_bound() + 1),
        }
    }
}

/// Generators of the S-unit group: index 0 is the primitive constant,
/// index `i >= 1` the `i`-th finite place of `S`.
#[derive(Clone, Debug)]
pub struct SUnitBasis {
    pub base: Arc<FiniteField>,
    pub places: Vec<Place>,
}

impl SUnitBasis {
    pub fn new(base: &Arc<FiniteField>, bound: u32) -> Self {
        let places = places_up_to(base, bound)
            .into_iter()
            .filter(|p| !p.is_infinity())
            .collect();
        SUnitBasis {
            base: base.clone(),
            places,
        }
    }

    pub fn len(&self) -> usize {
        self.places.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn element(&self, i: usize) -> RationalFunction {
        if i == 0 {
            RationalFunction::constant(self.base.generator()).expect("generator is a unit")
        } else {
            RationalFunction::place_power(&self.places[i - 1], 1)
        }
    }

    /// `prod b_i^(e_i)`.
    pub fn function(&self, exps: &[i64]) -> RationalFunction {
        let unit = self
            .base
            .pow(self.base.generator(), exps.first().copied().unwrap_or(0));
        RationalFunction::from_parts(
            unit,
            exps.iter()
                .enumerate()
                .skip(1)
                .filter(|(_, e)| **e != 0)
                .map(|(i, e)| (self.places[i - 1].clone(), *e)),
        )
        .expect("S-units are nonzero")
    }

    pub fn describe(&self, i: usize) -> String {
        if i == 0 {
            self.base.generator().to_string()
        } else {
            self.places[i - 1].poly().expect("finite place").display()
        }
    }
}

/// A building block of generators.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    /// `[f]` for `f = prod b_i^(e_i)`.
    Symbol(Vec<i64>),
    /// `eta [b_i][b_j]`.
    EtaPair(usize, usize),
    /// `eta [b_i]`.
    Eta(usize),
    /// `eta^2 [b_i][b_j]`.
    EtaSquaredPair(usize, usize),
    /// `1` in `GW`.
    One,
    /// `[b_i][b_j]`.
    SymbolPair(usize, usize),
}

/// An admissible generator: an integer combination of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsGenerator {
    pub terms: Vec<(i64, Atom)>,
    /// Readable provenance, e.g. `[(t+1)/(t+2)]` or `eta[t][2]`.
    pub label: String,
}

/// Residue data of one basis element at one place: valuation and the
/// discrete log of the unit part (canonical uniformizer).
#[derive(Clone, Copy, Debug)]
struct Local {
    v: i64,
    log: u64,
}

/// Per-place table shared by all columns.
struct PlaceData {
    place: Place,
    /// `|k(x)^*|`
    units: u64,
    twist_log: u64,
    locals: Vec<Local>,
}

impl PlaceData {
    fn new(basis: &SUnitBasis, place: &Place) -> Result<Self> {
        let (rf, twist) = omega_twist_unit(&basis.base, place)?;
        let big = rf.field().clone();
        let locals = (0..basis.len())
            .map(|i| {
                let (v, u) = basis.element(i).unit_part(&rf);
                Local {
                    v,
                    log: big.log(u) as u64,
                }
            })
            .collect();
        Ok(PlaceData {
            place: place.clone(),
            units: big.order() as u64 - 1,
            twist_log: big.log(twist) as u64,
            locals,
        })
    }

    fn minus_one_square(&self) -> bool {
        self.units.is_multiple_of(4)
    }

    fn eval(&self, exps: &[(usize, i64)]) -> Local {
        let n = self.units as i128;
        let mut v = 0;
        let mut log: i128 = 0;
        for (i, e) in exps {
            let l = self.locals[*i];
            v += l.v * e;
            log = (log + l.log as i128 * *e as i128).rem_euclid(n);
        }
        Local { v, log: log as u64 }
    }
}

/// Witt part of an atom as a virtual sum `sum c <prod b_i^(e_i)>`.
fn witt_terms(atom: &Atom) -> Vec<(i64, Vec<(usize, i64)>)> {
    match atom {
        Atom::Symbol(e) => {
            let exps: Vec<(usize, i64)> = e
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0)
                .map(|(i, x)| (i, *x))
                .collect();
            vec![(1, exps), (-1, vec![])]
        }
        Atom::EtaPair(i, j) | Atom::EtaSquaredPair(i, j) => vec![
            (1, vec![(*i, 1), (*j, 1)]),
            (-1, vec![(*i, 1)]),
            (-1, vec![(*j, 1)]),
            (1, vec![]),
        ],
        Atom::Eta(i) => vec![(1, vec![(*i, 1)]), (-1, vec![])],
        Atom::One => vec![(1, vec![])],
        Atom::SymbolPair(..) => vec![],
    }
}

fn milnor_rank(atom: &Atom, pd: &PlaceData) -> i64 {
    match atom {
        Atom::Symbol(e) => e.iter().enumerate().map(|(i, x)| pd.locals[i].v * x).sum(),
        _ => 0,
    }
}

/// Residue square classes: `(coef, unit log)` of terms with odd (or even)
/// valuation, after scaling by `twist_log`.
fn residue_units(atom: &Atom, pd: &PlaceData, odd: bool, twist_log: u64) -> Vec<(i64, u64)> {
    witt_terms(atom)
        .into_iter()
        .filter_map(|(c, exps)| {
            let l = pd.eval(&exps);
            (l.v.rem_euclid(2) == odd as i64).then_some((c, (l.log + twist_log) % pd.units))
        })
        .collect()
}

/// `GW(k(x))` coordinates `(rank, det nonsquare)` of the twisted residue.
fn gw_block(atom: &Atom, pd: &PlaceData) -> [i64; 2] {
    let n = milnor_rank(atom, pd);
    let units = residue_units(atom, pd, true, pd.twist_log);
    let s: i64 = units.iter().map(|(c, _)| c).sum();
    let mut bit: i64 = units.iter().map(|(c, l)| c * (*l as i64 % 2)).sum();
    let m = (n - s) / 2;
    if !pd.minus_one_square() {
        bit += m;
    }
    [n, bit.rem_euclid(2)]
}

/// `W(k(x))` coordinates of a virtual sum of unit classes.
fn witt_block(units: &[(i64, u64)], pd: &PlaceData) -> Vec<i64> {
    if pd.minus_one_square() {
        let parity: i64 = units.iter().map(|(c, _)| *c).sum();
        let disc: i64 = units.iter().map(|(c, l)| c * (*l as i64 % 2)).sum();
        vec![parity.rem_euclid(2), disc.rem_euclid(2)]
    } else {
        let v: i64 = units
            .iter()
            .map(|(c, l)| c * if l % 2 == 0 { 1 } else { 3 })
            .sum();
        vec![v.rem_euclid(4)]
    }
}

fn witt_moduli(pd: &PlaceData) -> Vec<i64> {
    if pd.minus_one_square() {
        vec![2, 2]
    } else {
        vec![4]
    }
}

/// Discrete log of the tame symbol of `[b_i][b_j]` at the place.
fn tame_log(i: usize, j: usize, pd: &PlaceData) -> i64 {
    let a = pd.locals[i];
    let b = pd.locals[j];
    let n = pd.units as i128;
    let mut l = b.log as i128 * a.v as i128 - a.log as i128 * b.v as i128;
    if (a.v * b.v).rem_euclid(2) == 1 {
        l += n / 2;
    }
    l.rem_euclid(n) as i64
}

/// Target block of the boundary at a place outside `D`.
fn target_block(l: i32, atom: &Atom, pd: &PlaceData) -> Vec<i64> {
    match l {
        0 => gw_block(atom, pd).to_vec(),
        -1 => witt_block(&residue_units(atom, pd, true, pd.twist_log), pd),
        _ => match atom {
            Atom::SymbolPair(i, j) => vec![tame_log(*i, *j, pd)],
            _ => vec![0],
        },
    }
}

fn target_moduli(l: i32, pd: &PlaceData) -> Vec<i64> {
    match l {
        0 => vec![0, 2],
        -1 => witt_moduli(pd),
        _ => vec![pd.units as i64],
    }
}

fn target_labels(l: i32, pd: &PlaceData) -> Vec<String> {
    let labels: &[&str] = match l {
        0 => &["rank", "det"],
        -1 if pd.minus_one_square() => &["witt parity", "witt disc"],
        -1 => &["witt mod 4"],
        _ => &["dlog"],
    };
    labels.iter().map(|s| s.to_string()).collect()
}

/// Regularity and vanishing of the specialization at a removed place.
fn constraint_block(l: i32, atom: &Atom, pd: &PlaceData) -> Vec<i64> {
    match l {
        0 => vec![gw_block(atom, pd)[1]],
        -1 => {
            let mut v = witt_block(&residue_units(atom, pd, true, 0), pd);
            v.extend(witt_block(&residue_units(atom, pd, false, 0), pd));
            v
        }
        _ => match atom {
            Atom::SymbolPair(i, j) => vec![tame_log(*i, *j, pd)],
            _ => vec![0],
        },
    }
}

fn constraint_moduli(l: i32, pd: &PlaceData) -> Vec<i64> {
    match l {
        0 => vec![2],
        -1 => {
            let mut m = witt_moduli(pd);
            m.extend(witt_moduli(pd));
            m
        }
        _ => vec![pd.units as i64],
    }
}

/// Row layout of the target group `(+)_(x in S - D)`.
#[derive(Clone, Debug, Serialize)]
pub struct TargetLayout {
    pub places: Vec<Place>,
    pub offsets: Vec<usize>,
    pub labels: Vec<Vec<String>>,
    /// Per row: `0` for a free coordinate, otherwise its order.
    pub moduli: Vec<i64>,
}

impl TargetLayout {
    pub fn rows(&self) -> usize {
        self.moduli.len()
    }

    pub fn block_of(&self, p: &Place) -> Option<usize> {
        self.places
            .iter()
            .position(|x| x == p)
            .map(|i| self.offsets[i])
    }

    /// Relation columns `m e_i` for the torsion coordinates.
    pub fn relation_columns(&self) -> Vec<Vec<BigInt>> {
        self.moduli
            .iter()
            .enumerate()
            .filter(|(_, m)| **m != 0)
            .map(|(i, m)| {
                let mut v = vec![BigInt::zero(); self.rows()];
                v[i] = BigInt::from(*m);
                v
            })
            .collect()
    }
}

/// Everything needed to build columns at a fixed bound.
pub struct BoundData {
    pub problem: RsProblem,
    pub bound: u32,
    pub basis: SUnitBasis,
    all: Vec<PlaceData>,
    target_idx: Vec<usize>,
    removed_idx: Vec<usize>,
    pub layout: TargetLayout,
}

impl BoundData {
    pub fn new(problem: &RsProblem, bound: u32) -> Result<Self> {
        let needed = problem.removed.max_degree();
        if bound < needed.max(1) {
            return Err(Error::BoundTooSmall {
                bound,
                needed: needed.max(1),
            });
        }
        let basis = SUnitBasis::new(&problem.base, bound);
        let places = places_up_to(&problem.base, bound);
        let all = places
            .iter()
            .map(|p| PlaceData::new(&basis, p))
            .collect::<Result<Vec<_>>>()?;
        let mut target_idx = Vec::new();
        let mut removed_idx = Vec::new();
        for (i, p) in places.iter().enumerate() {
            if problem.removed.contains(p) {
                removed_idx.push(i);
            } else {
                target_idx.push(i);
            }
        }
        let mut layout = TargetLayout {
            places: Vec::new(),
            offsets: Vec::new(),
            labels: Vec::new(),
            moduli: Vec::new(),
        };
        for &i in &target_idx {
            let pd = &all[i];
            layout.places.push(pd.place.clone());
            layout.offsets.push(layout.moduli.len());
            layout.labels.push(target_labels(problem.l, pd));
            layout.moduli.extend(target_moduli(problem.l, pd));
        }
        Ok(BoundData {
            problem: problem.clone(),
            bound,
            basis,
            all,
            target_idx,
            removed_idx,
            layout,
        })
    }

    fn l(&self) -> i32 {
        self.problem.l
    }

    /// Boundary column of a generator, torsion coordinates reduced.
    pub fn column(&self, g: &RsGenerator) -> Vec<BigInt> {
        let mut col = vec![0i64; self.layout.rows()];
        for (c, atom) in &g.terms {
            for (k, &i) in self.target_idx.iter().enumerate() {
                let block = target_block(self.l(), atom, &self.all[i]);
                let off = self.layout.offsets[k];
                for (r, v) in block.into_iter().enumerate() {
                    col[off + r] += c * v;
                }
            }
        }
        col.iter()
            .zip(&self.layout.moduli)
            .map(|(v, m)| BigInt::from(if *m == 0 { *v } else { v.rem_euclid(*m) }))
            .collect()
    }

    /// Constraint values at the removed places (all zero for admissible
    /// generators).
    pub fn constraint(&self, g: &RsGenerator) -> Vec<i64> {
        let mut out: Vec<i64> = Vec::new();
        let mut moduli: Vec<i64> = Vec::new();
        for &i in &self.removed_idx {
            moduli.extend(constraint_moduli(self.l(), &self.all[i]));
        }
        out.resize(moduli.len(), 0);
        for (c, atom) in &g.terms {
            let mut row = 0;
            for &i in &self.removed_idx {
                if let Atom::Symbol(e) = atom {
                    // [f] with f = 1 on D: valuation and reduction at x
                    let pd = &self.all[i];
                    let exps: Vec<(usize, i64)> = e.iter().copied().enumerate().collect();
                    let loc = pd.eval(&exps);
                    let block = constraint_moduli(self.l(), pd).len();
                    out[row] += c * (loc.v != 0 || loc.log != 0) as i64;
                    row += block;
                    continue;
                }
                for v in constraint_block(self.l(), atom, &self.all[i]) {
                    out[row] += c * v;
                    row += 1;
                }
            }
        }
        out.iter()
            .zip(&moduli)
            .map(|(v, m)| v.rem_euclid(*m))
            .collect()
    }

    /// Exponent vectors (basis of a lattice in Hermite form) of the
    /// S-units that are regular and equal to `1` at every removed place.
    pub fn unit_lattice(&self) -> Vec<Vec<i64>> {
        let n = self.basis.len();
        let mut moduli = Vec::new();
        let mut columns = vec![Vec::new(); n];
        for &i in &self.removed_idx {
            let pd = &self.all[i];
            moduli.push(BigInt::zero());
            moduli.push(BigInt::from(pd.units));
            for (j, col) in columns.iter_mut().enumerate() {
                col.push(BigInt::from(pd.locals[j].v));
                col.push(BigInt::from(pd.locals[j].log));
            }
        }
        let mut lattice = LatticeBasis::new(n);
        for combo in kernel_mod(&columns, &moduli) {
            let mut v = vec![BigInt::zero(); n];
            for (j, c) in combo {
                v[j] = c;
            }
            lattice.insert(&v);
        }
        lattice
            .hermite_rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .map(|x| x.to_i64().expect("unit exponents fit in i64"))
                    .collect()
            })
            .collect()
    }

    fn label_function(&self, exps: &[i64]) -> String {
        let f = self.basis.function(exps);
        let (num, den) = f.to_fraction(&self.basis.base);
        if den.is_one() {
            format!("[{}]", num.display())
        } else {
            format!("[({})/({})]", num.display(), den.display())
        }
    }

    /// Kernel of the constraint map on a list of atoms, as generators,
    /// dropping combinations that are the zero element.
    fn constrained_span(
        &self,
        atoms: Vec<Atom>,
        label: impl Fn(&Atom) -> String,
    ) -> Vec<RsGenerator> {
        let singles: Vec<RsGenerator> = atoms
            .iter()
            .map(|a| RsGenerator {
                terms: vec![(1, a.clone())],
                label: label(a),
            })
            .collect();
        let mut moduli = Vec::new();
        for &i in &self.removed_idx {
            moduli.extend(
                constraint_moduli(self.l(), &self.all[i])
                    .into_iter()
                    .map(BigInt::from),
            );
        }
        let columns: Vec<Vec<BigInt>> = singles
            .iter()
            .map(|g| self.constraint(g).into_iter().map(BigInt::from).collect())
            .collect();
        let mut out = Vec::new();
        for combo in kernel_mod(&columns, &moduli) {
            let terms: Vec<(i64, Atom)> = combo
                .iter()
                .map(|(j, c)| (c.to_i64().expect("small coefficient"), atoms[*j].clone()))
                .collect();
            let g = RsGenerator {
                label: terms
                    .iter()
                    .map(|(c, a)| match c {
                        1 => label(a),
                        -1 => format!("-{}", label(a)),
                        _ => format!("{c}*{}", label(a)),
                    })
                    .collect::<Vec<_>>()
                    .join(" + "),
                terms,
            };
            if !self.is_zero_element(&g) {
                out.push(g);
            }
        }
        out
    }

    /// Zero test for generators without a Milnor symbol part.
    fn is_zero_element(&self, g: &RsGenerator) -> bool {
        let finite: Vec<&PlaceData> = self
            .all
            .iter()
            .filter(|pd| !pd.place.is_infinity())
            .collect();
        let sum_blocks =
            |f: &dyn Fn(&Atom, &PlaceData) -> Vec<i64>, pd: &PlaceData, moduli: Vec<i64>| {
                let mut acc = vec![0i64; moduli.len()];
                for (c, a) in &g.terms {
                    for (r, v) in f(a, pd).into_iter().enumerate() {
                        acc[r] += c * v;
                    }
                }
                acc.iter().zip(&moduli).all(|(v, m)| v.rem_euclid(*m) == 0)
            };
        match self.l() {
            0 => {
                // Milnor part first, then the residues of what is left in I^2
                let n = self.basis.len();
                let mut exps = vec![0i64; n];
                for (c, a) in &g.terms {
                    if let Atom::Symbol(e) = a {
                        for (x, y) in exps.iter_mut().zip(e) {
                            *x += c * y;
                        }
                    }
                }
                let units = self.problem.q() as i64 - 1;
                if exps[0].rem_euclid(units) != 0 || exps[1..].iter().any(|e| *e != 0) {
                    return false;
                }
                finite
                    .iter()
                    .all(|pd| sum_blocks(&|a, pd| vec![gw_block(a, pd)[1]], pd, vec![2]))
            }
            -1 => {
                if g.terms.iter().any(|(c, a)| *a == Atom::One && *c != 0) {
                    return false;
                }
                let residues_vanish = finite.iter().all(|pd| {
                    sum_blocks(
                        &|a, pd| witt_block(&residue_units(a, pd, true, 0), pd),
                        pd,
                        witt_moduli(pd),
                    )
                });
                let origin = finite
                    .iter()
                    .find(|pd| pd.place == Place::zero())
                    .expect("(t) lies in every S");
                residues_vanish
                    && sum_blocks(
                        &|a, pd| witt_block(&residue_units(a, pd, false, 0), pd),
                        origin,
                        witt_moduli(origin),
                    )
            }
            _ => finite.iter().all(|pd| {
                sum_blocks(
                    &|a, pd| match a {
                        Atom::SymbolPair(i, j) => vec![tame_log(*i, *j, pd)],
                        _ => vec![0],
                    },
                    pd,
                    vec![pd.units as i64],
                )
            }),
        }
    }

    /// `generator_family` at this bound.
    pub fn generators(&self) -> Vec<RsGenerator> {
        let n = self.basis.len();
        let b = |i: usize| self.basis.describe(i);
        let pairs = || (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)));
        match self.l() {
            0 => {
                let mut out: Vec<RsGenerator> = self
                    .unit_lattice()
                    .into_iter()
                    .map(|e| RsGenerator {
                        label: self.label_function(&e),
                        terms: vec![(1, Atom::Symbol(e))],
                    })
                    .filter(|g| !self.is_zero_element(g))
                    .collect();
                let atoms: Vec<Atom> = pairs().map(|(i, j)| Atom::EtaPair(i, j)).collect();
                out.extend(self.constrained_span(atoms, |a| match a {
                    Atom::EtaPair(i, j) => format!("eta[{}][{}]", b(*i), b(*j)),
                    _ => unreachable!(),
                }));
                out
            }
            -1 => {
                let mut atoms: Vec<Atom> = Vec::new();
                if self.removed_idx.is_empty() {
                    atoms.push(Atom::One);
                }
                atoms.extend((0..n).map(Atom::Eta));
                atoms.extend(pairs().map(|(i, j)| Atom::EtaSquaredPair(i, j)));
                self.constrained_span(atoms, |a| match a {
                    Atom::One => "1".to_string(),
                    Atom::Eta(i) => format!("eta[{}]", b(*i)),
                    Atom::EtaSquaredPair(i, j) => format!("eta^2[{}][{}]", b(*i), b(*j)),
                    _ => unreachable!(),
                })
            }
            _ => {
                let atoms: Vec<Atom> = pairs().map(|(i, j)| Atom::SymbolPair(i, j)).collect();
                self.constrained_span(atoms, |a| match a {
                    Atom::SymbolPair(i, j) => format!("[{}][{}]", b(*i), b(*j)),
                    _ => unreachable!(),
                })
            }
        }
    }

    /// The S-unit `f` of a `[f]` atom.
    pub fn symbol_function(&self, atom: &Atom) -> Option<RationalFunction> {
        match atom {
            Atom::Symbol(e) => Some(self.basis.function(e)),
            _ => None,
        }
    }

    /// `i`-th S-unit basis element.
    pub fn basis_element(&self, i: usize) -> RationalFunction {
        self.basis.element(i)
    }
}

/// Boundary matrix with its row layout; relation columns are separate.
pub struct BoundaryMatrix {
    pub matrix: IntMatrix,
    pub relations: Vec<Vec<BigInt>>,
    pub layout: TargetLayout,
}

/// `boundary_matrix`: one column per generator.
pub fn boundary_matrix(data: &BoundData, gens: &[RsGenerator]) -> BoundaryMatrix {
    let cols: Vec<Vec<BigInt>> = gens.iter().map(|g| data.column(g)).collect();
    BoundaryMatrix {
        matrix: IntMatrix::from_columns(data.layout.rows(), &cols),
        relations: data.layout.relation_columns(),
        layout: data.layout.clone(),
    }
}

/// Cokernel of generator columns plus torsion relations.
pub fn cokernel_of(
    layout: &TargetLayout,
    columns: impl IntoIterator<Item = Vec<BigInt>>,
) -> Cokernel {
    let mut lattice = LatticeBasis::new(layout.rows());
    for r in layout.relation_columns() {
        lattice.insert(&r);
    }
    for c in columns {
        if c.iter().any(|x| !x.is_zero()) {
            lattice.insert(&c);
        }
    }
    Cokernel::from_lattice(&lattice)
}

/// Cohomology computed at one bound.
pub struct BoundResult {
    pub data: BoundData,
    pub generators: Vec<RsGenerator>,
    pub cokernel: Cokernel,
}

pub fn compute_at_bound(problem: &RsProblem, bound: u32) -> Result<BoundResult> {
    let data = BoundData::new(problem, bound)?;
    let generators = data.generators();
    let cokernel = cokernel_of(&data.layout, generators.iter().map(|g| data.column(g)));
    Ok(BoundResult {
        data,
        generators,
        cokernel,
    })
}

/// Closed form of `H^0`.
pub fn h0_closed_form(q: u64, removed: &PlaceSet, l: i32) -> AbGroupInvariants {
    if !removed.is_empty() {
        return AbGroupInvariants::trivial();
    }
    match l {
        -1 => AbGroupInvariants::from_orders(1, &[2]),
        0 => AbGroupInvariants::from_orders(0, &[q - 1]),
        _ => AbGroupInvariants::trivial(),
    }
}

/// `RSResult`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsResult {
    pub q: u64,
    pub l: i32,
    pub removed: Vec<Place>,
    pub h0: AbGroupInvariants,
    pub h1: AbGroupInvariants,
    pub generators_used: usize,
    /// First bound whose `H^1` agrees with the next one.
    pub stabilized_at: Option<u32>,
    /// Bound of the reported data.
    pub bound: u32,
    pub target_coordinates: Vec<(Place, Vec<String>)>,
}

impl Serialize for RsResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(9))?;
        m.serialize_entry("q", &self.q)?;
        m.serialize_entry("l", &self.l)?;
        m.serialize_entry("remove", &self.removed)?;
        m.serialize_entry("h0", &self.h0)?;
        m.serialize_entry("h1", &self.h1)?;
        match self.stabilized_at {
            Some(b) => m.serialize_entry("stabilized_at", &b)?,
            None => m.serialize_entry("stabilized_at", "not certified")?,
        }
        m.serialize_entry("bound", &self.bound)?;
        m.serialize_entry("generators_used", &self.generators_used)?;
        m.serialize_entry("target_coordinates", &self.target_coordinates)?;
        m.end()
    }
}

/// Result together with the final bounded computation.
pub struct RsComputation {
    pub result: RsResult,
    pub last: BoundResult,
    /// `H^1` at every bound that was computed.
    pub history: BTreeMap<u32, AbGroupInvariants>,
}

/// `rs_cohomology` with the stabilization protocol: bounds increase from
/// the largest degree in `D` until two consecutive bounds agree, or the cap
/// is reached (then the result is flagged as not certified).
pub fn rs_cohomology(problem: &RsProblem) -> Result<RsComputation> {
    let start = problem.start_bound();
    let cap = problem.cap();
    let mut history = BTreeMap::new();
    let mut prev = compute_at_bound(problem, start)?;
    history.insert(start, prev.cokernel.invariants().clone());
    let mut stabilized = None;
    for b in start + 1..=cap {
        let cur = compute_at_bound(problem, b)?;
        history.insert(b, cur.cokernel.invariants().clone());
        let agree = cur.cokernel.invariants() == prev.cokernel.invariants();
        prev = cur;
        if agree {
            stabilized = Some(b - 1);
            break;
        }
    }
    let last = prev;
    let result = RsResult {
        q: problem.q(),
        l: problem.l,
        removed: problem.removed.iter().cloned().collect(),
        h0: h0_closed_form(problem.q(), &problem.removed, problem.l),
        h1: last.cokernel.invariants().clone(),
        generators_used: last.generators.len(),
        stabilized_at: stabilized,
        bound: last.data.bound,
        target_coordinates: last
            .data
            .layout
            .places
            .iter()
            .cloned()
            .zip(last.data.layout.labels.iter().cloned())
            .collect(),
    };
    Ok(RsComputation {
        result,
        last,
        history,
    })
}

/// Recomputes the data of a finished computation at a larger bound, keeping
/// its stabilization record. Used to line up with other computations.
pub fn rebound(comp: RsComputation, bound: u32) -> Result<RsComputation> {
    if bound <= comp.last.data.bound {
        return Ok(comp);
    }
    let last = compute_at_bound(&comp.last.data.problem, bound)?;
    let mut history = comp.history;
    history.insert(bound, last.cokernel.invariants().clone());
    let mut result = comp.result;
    result.h1 = last.cokernel.invariants().clone();
    result.generators_used = last.generators.len();
    result.bound = bound;
    result.target_coordinates = last
        .data
        .layout
        .places
        .iter()
        .cloned()
        .zip(last.data.layout.labels.iter().cloned())
        .collect();
    Ok(RsComputation {
        result,
        last,
        history,
    })
}

/// `theta_class`: image in `H^1` of `<1>` in the summand of `y` (l = 0).
pub fn theta_class(comp: &RsComputation, y: &Place) -> Result<ClassCoordinates> {
    let data = &comp.last.data;
    if data.problem.removed.contains(y) {
        return Err(Error::PlaceInD(y.to_string()));
    }
    if data.problem.l != 0 {
        return Err(Error::DegreeOutOfRange(data.problem.l));
    }
    let off = data.layout.block_of(y).ok_or(Error::BoundTooSmall {
        bound: data.bound,
        needed: y.degree(),
    })?;
    let mut v = vec![BigInt::zero(); data.layout.rows()];
    v[off] = BigInt::from(1);
    Ok(comp.last.cokernel.class_of(&v))
}

/// Unit vector of `<1>` at `y` in the target coordinates.
pub fn point_vector(layout: &TargetLayout, y: &Place) -> Option<Vec<BigInt>> {
    let off = layout.block_of(y)?;
    let mut v = vec![BigInt::zero(); layout.rows()];
    v[off] = BigInt::from(1);
    Some(v)
}

/// `Fe` log helper exposed for tests: discrete log of the unit part of `f`.
pub fn unit_log(f: &RationalFunction, rf: &ResidueField) -> (i64, u32) {
    let (v, u) = f.unit_part(rf);
    (v, rf.field().log(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Fe, Poly};
    use crate::mwk::{mw_eta_mul, mw_residue, mw_symbol, mw_symbol2, mw_unit_scale, Milnor};
    use crate::p1geom::canonical_uniformizer;
    use crate::quadform::{gw_coordinates, GwElement, RationalFunctionField};

    fn problem(q: u64, removed: Vec<Place>, l: i32) -> RsProblem {
        RsProblem::new(q, PlaceSet::new(removed), l, BoundSpec::Auto).unwrap()
    }

    #[test]
    fn family_examples() {
        let p = problem(3, vec![], 0);
        let data = BoundData::new(&p, 1).unwrap();
        let gens = data.generators();
        let labels: Vec<&str> = gens.iter().map(|g| g.label.as_str()).collect();
        for expected in ["[2]", "[t]", "[t + 1]", "[t + 2]"] {
            assert!(
                labels.contains(&expected),
                "{expected} missing from {labels:?}"
            );
        }
        assert!(labels.iter().any(|l| l.starts_with("eta[")));

        let p = problem(3, vec![Place::Infinity], 0);
        let data = BoundData::new(&p, 1).unwrap();
        let gens = data.generators();
        let funcs: Vec<RationalFunction> = gens
            .iter()
            .filter_map(|g| match &g.terms[..] {
                [(1, a)] => data.symbol_function(a),
                _ => None,
            })
            .collect();
        assert!(!funcs.contains(&RationalFunction::t()));
        // (t+1)/(t+2) lies in the span: it is 1 at infinity
        let f3 = &p.base;
        let target = RationalFunction::from_fraction(
            &Poly::from_codes(&[1, 1]),
            &Poly::from_codes(&[2, 1]),
            f3,
        )
        .unwrap();
        let constraint = data.constraint(&RsGenerator {
            terms: vec![(1, Atom::Symbol(vec![0, 0, 1, -1]))],
            label: String::new(),
        });
        assert!(constraint.iter().all(|v| *v == 0));
        assert_eq!(data.basis.function(&[0, 0, 1, -1]), target);
    }

    #[test]
    fn no_zero_generators() {
        for removed in [
            vec![],
            vec![Place::Infinity],
            vec![Place::zero(), Place::Infinity],
        ] {
            for l in -1..=1 {
                let p = problem(3, removed.clone(), l);
                let data = BoundData::new(&p, 2).unwrap();
                for g in data.generators() {
                    assert!(!g.terms.is_empty());
                    assert!(!data.is_zero_element(&g), "{}", g.label);
                    assert!(data.constraint(&g).iter().all(|v| *v == 0), "{}", g.label);
                }
            }
        }
    }

    #[test]
    fn boundary_examples() {
        let p = problem(3, vec![Place::Infinity], 0);
        let data = BoundData::new(&p, 1).unwrap();
        let g = RsGenerator {
            terms: vec![(1, Atom::Symbol(vec![0, 0, 1, -1]))],
            label: String::new(),
        };
        let col = data.column(&g);
        let f3 = &p.base;
        let at = |c: u32| {
            data.layout
                .block_of(&Place::Finite(Poly::from_codes(&[c, 1])))
                .unwrap()
        };
        let big = |v: i64| BigInt::from(v);
        // <1> at (t+1): rank 1, det square
        assert_eq!(col[at(1)..at(1) + 2], [big(1), big(0)]);
        // [u p^-1] = [u] - <u p^-1>[p] with u = 2 has residue -<-u> = -<1>,
        // which is (-1, <2>) since <2> = -<1> in W(F_3)
        assert_eq!(col[at(2)..at(2) + 2], [big(-1), big(0)]);
        assert_eq!(col[at(0)..at(0) + 2], [big(0), big(0)]);
        assert!(!f3.is_square_unit(Fe(2)));

        // [t] on (P^1, {}): <1> at (t) and <-1>(-1, <1>) at infinity
        let p = problem(3, vec![], 0);
        let data = BoundData::new(&p, 1).unwrap();
        let g = RsGenerator {
            terms: vec![(1, Atom::Symbol(vec![0, 1, 0, 0]))],
            label: String::new(),
        };
        let col = data.column(&g);
        let o = data.layout.block_of(&Place::zero()).unwrap();
        assert_eq!(col[o..o + 2], [big(1), big(0)]);
        let inf = data.layout.block_of(&Place::Infinity).unwrap();
        // rank -1 with Witt class <1>: -<-1> has det -1; twisted by <-1>
        // gives det (-1)^-1 * (-1) = 1
        let k = RationalFunctionField::new(f3.clone());
        let f = f3.clone();
        let res = GwElement {
            rank: -1,
            witt: crate::quadform::QuadField::witt_unit(&*f, &Fe(1)),
        };
        let twisted = res.scale(&*f, &f.minus_one());
        let (_, bit) = gw_coordinates(&f, &twisted);
        assert_eq!(col[inf..inf + 2], [big(-1), big(bit as i64)]);
        let _ = k;
    }

    /// The linear column formulas agree with the componentwise residues of
    /// `mwk` (canonical uniformizer, scaled by the twist unit).
    #[test]
    fn columns_match_componentwise_residues() {
        for q in [3u64, 5] {
            for l in -1..=1 {
                let p = problem(q, vec![], l);
                let data = BoundData::new(&p, 2).unwrap();
                let k = RationalFunctionField::new(p.base.clone());
                let n = data.basis.len();
                let mut atoms = vec![Atom::Symbol({
                    let mut e = vec![0; n];
                    e[0] = 1;
                    e[1] = 2;
                    e[n - 1] = -1;
                    e
                })];
                for i in 0..n.min(5) {
                    for j in i..n.min(5) {
                        atoms.push(Atom::EtaPair(i, j));
                        atoms.push(Atom::SymbolPair(i, j));
                    }
                    atoms.push(Atom::Eta(i));
                }
                for atom in atoms {
                    let b = |i: usize| data.basis_element(i);
                    let x = match (&atom, l) {
                        (Atom::Symbol(e), 0) => mw_symbol(&k, &data.basis.function(e)).unwrap(),
                        (Atom::EtaPair(i, j), 0) => {
                            mw_eta_mul(&k, &mw_symbol2(&k, &b(*i), &b(*j)).unwrap()).unwrap()
                        }
                        (Atom::Eta(i), -1) => {
                            mw_eta_mul(&k, &mw_symbol(&k, &b(*i)).unwrap()).unwrap()
                        }
                        (Atom::EtaPair(i, j), -1) => mw_eta_mul(
                            &k,
                            &mw_eta_mul(&k, &mw_symbol2(&k, &b(*i), &b(*j)).unwrap()).unwrap(),
                        )
                        .unwrap(),
                        (Atom::SymbolPair(i, j), 1) => mw_symbol2(&k, &b(*i), &b(*j)).unwrap(),
                        _ => continue,
                    };
                    let atom = match (&atom, l) {
                        (Atom::EtaPair(i, j), -1) => Atom::EtaSquaredPair(*i, *j),
                        _ => atom.clone(),
                    };
                    let g = RsGenerator {
                        terms: vec![(1, atom.clone())],
                        label: String::new(),
                    };
                    let col = data.column(&g);
                    for (pi_idx, place) in data.layout.places.iter().enumerate() {
                        let off = data.layout.offsets[pi_idx];
                        let (rf, twist) = omega_twist_unit(&p.base, place).unwrap();
                        let r = mw_residue(&k, &x, place, &canonical_uniformizer(place)).unwrap();
                        let big = rf.field().clone();
                        let scaled = mw_unit_scale(&*big, &twist, &r.value).unwrap();
                        let expected: Vec<i64> = match l {
                            0 => {
                                let Milnor::Int(n) = scaled.milnor else {
                                    panic!()
                                };
                                let (rank, bit) = gw_coordinates(
                                    &big,
                                    &GwElement {
                                        rank: n,
                                        witt: scaled.witt,
                                    },
                                );
                                vec![rank, bit as i64]
                            }
                            -1 => {
                                let rep = scaled.witt.representative(&big);
                                let units: Vec<(i64, u64)> =
                                    rep.iter().map(|a| (1, big.log(*a) as u64)).collect();
                                let pd = &data.all[data.target_idx[pi_idx]];
                                witt_block(&units, pd)
                            }
                            _ => {
                                let Milnor::Unit(u) = scaled.milnor else {
                                    panic!()
                                };
                                vec![big.log(u) as i64]
                            }
                        };
                        let got: Vec<i64> = col[off..off + expected.len()]
                            .iter()
                            .map(|v| v.to_i64().unwrap())
                            .collect();
                        assert_eq!(got, expected, "q={q} l={l} {atom:?} at {place}");
                    }
                }
            }
        }
    }

    #[test]
    fn headline_values_q3() {
        let p = problem(3, vec![], 0);
        let r = rs_cohomology(&p).unwrap().result;
        assert_eq!(r.h0, AbGroupInvariants::from_orders(0, &[2]));
        assert_eq!(r.h1, AbGroupInvariants::from_orders(1, &[2]));
        assert!(r.stabilized_at.is_some());

        let p = problem(3, vec![Place::Infinity], 0);
        let r = rs_cohomology(&p).unwrap().result;
        assert!(r.h0.is_trivial());
        assert_eq!(r.h1, AbGroupInvariants::from_orders(1, &[2]));

        let p = problem(3, vec![Place::zero(), Place::Infinity], 0);
        let r = rs_cohomology(&p).unwrap().result;
        assert_eq!(r.h1, AbGroupInvariants::from_orders(1, &[2, 2]));
    }

    #[test]
    fn cap_without_agreement_is_not_certified() {
        let p = RsProblem::new(
            3,
            PlaceSet::new([Place::zero(), Place::Infinity]),
            0,
            BoundSpec::Cap(1),
        )
        .unwrap();
        let r = rs_cohomology(&p).unwrap().result;
        assert_eq!(r.stabilized_at, None);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["stabilized_at"], "not certified");
    }

    #[test]
    fn bound_below_removed_degree_is_rejected() {
        let quad = Place::Finite(Poly::from_codes(&[1, 0, 1]));
        assert!(matches!(
            RsProblem::new(3, PlaceSet::new([quad]), 0, BoundSpec::Cap(1)),
            Err(Error::BoundTooSmall { .. })
        ));
    }

    #[test]
    fn theta_rejects_removed_point() {
        let p = problem(3, vec![Place::Infinity], 0);
        let comp = rs_cohomology(&p).unwrap();
        assert!(matches!(
            theta_class(&comp, &Place::Infinity),
            Err(Error::PlaceInD(_))
        ));
    }
}
