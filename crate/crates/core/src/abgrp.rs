//! Finitely generated abelian groups over exact integers.
//!
//! Groups are presented as cokernels `Z^n / im(R)` of integer relation
//! matrices whose columns are relations. Canonical invariants come from the
//! Smith normal form. Large relation families are first compressed into a
//! lattice basis (at most `n` vectors) before the Smith reduction runs.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from rows of machine integers. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*v));
            }
        }
        m
    }

    /// Builds a `rows x columns.len()` matrix from column vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in product");
        (0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += c * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = &self.data[source * self.cols + j];
            if !s.is_zero() {
                let delta = c * s;
                self.data[target * self.cols + j] += delta;
            }
        }
    }

    /// col[target] += c * col[source]
    fn add_col_multiple(&mut self, target: usize, source: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + source];
            if !s.is_zero() {
                let delta = c * s;
                self.data[i * self.cols + target] += delta;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let idx = i * self.cols + j;
            self.data[idx] = -std::mem::take(&mut self.data[idx]);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let idx = i * self.cols + j;
            self.data[idx] = -std::mem::take(&mut self.data[idx]);
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Result of a Smith reduction: `left * m * right` is diagonal with
/// `diagonal` on its main diagonal, each entry dividing the next.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub diagonal: Vec<BigInt>,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

/// Working state of the Smith reduction. Transforms are tracked only when
/// requested: `left` carries `(U, U^-1)`, `right` carries `V`.
struct SmithReduction {
    a: IntMatrix,
    left: Option<(IntMatrix, IntMatrix)>,
    right: Option<IntMatrix>,
}

impl SmithReduction {
    fn new(m: &IntMatrix, track_left: bool, track_right: bool) -> Self {
        SmithReduction {
            a: m.clone(),
            left: track_left.then(|| (IntMatrix::identity(m.rows), IntMatrix::identity(m.rows))),
            right: track_right.then(|| IntMatrix::identity(m.cols)),
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        if let Some((u, uinv)) = &mut self.left {
            u.swap_rows(i, j);
            uinv.swap_cols(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        if let Some(v) = &mut self.right {
            v.swap_cols(i, j);
        }
    }

    fn add_row_multiple(&mut self, target: usize, source: usize, c: &BigInt) {
        self.a.add_row_multiple(target, source, c);
        if let Some((u, uinv)) = &mut self.left {
            u.add_row_multiple(target, source, c);
            uinv.add_col_multiple(source, target, &-c);
        }
    }

    fn add_col_multiple(&mut self, target: usize, source: usize, c: &BigInt) {
        self.a.add_col_multiple(target, source, c);
        if let Some(v) = &mut self.right {
            v.add_col_multiple(target, source, c);
        }
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        if let Some((u, uinv)) = &mut self.left {
            u.negate_row(i);
            uinv.negate_col(i);
        }
    }

    fn smallest_in_block(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.a.rows {
            for j in t..self.a.cols {
                let v = self.a.get(i, j);
                if v.is_zero() {
                    continue;
                }
                let av = v.abs();
                if best.as_ref().is_none_or(|(_, _, b)| av < *b) {
                    let one = av.is_one();
                    best = Some((i, j, av));
                    if one {
                        let (bi, bj, _) = best.unwrap();
                        return Some((bi, bj));
                    }
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    fn smallest_in_cross(&self, t: usize) -> (usize, usize) {
        let mut best = (t, t);
        let mut best_abs = self.a.get(t, t).abs();
        for i in t + 1..self.a.rows {
            let v = self.a.get(i, t);
            if !v.is_zero() && (best_abs.is_zero() || v.abs() < best_abs) {
                best = (i, t);
                best_abs = v.abs();
            }
        }
        for j in t + 1..self.a.cols {
            let v = self.a.get(t, j);
            if !v.is_zero() && (best_abs.is_zero() || v.abs() < best_abs) {
                best = (t, j);
                best_abs = v.abs();
            }
        }
        best
    }

    fn run(
        mut self,
    ) -> (
        Vec<BigInt>,
        Option<(IntMatrix, IntMatrix)>,
        Option<IntMatrix>,
    ) {
        let n = self.a.rows.min(self.a.cols);
        let mut diagonal = Vec::with_capacity(n);
        for t in 0..n {
            let Some((pi, pj)) = self.smallest_in_block(t) else {
                break;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let pivot = self.a.get(t, t).clone();
                let mut clean = true;
                for i in t + 1..self.a.rows {
                    let v = self.a.get(i, t);
                    if v.is_zero() {
                        continue;
                    }
                    let q = v / &pivot;
                    self.add_row_multiple(i, t, &-q);
                    if !self.a.get(i, t).is_zero() {
                        clean = false;
                    }
                }
                for j in t + 1..self.a.cols {
                    let v = self.a.get(t, j);
                    if v.is_zero() {
                        continue;
                    }
                    let q = v / &pivot;
                    self.add_col_multiple(j, t, &-q);
                    if !self.a.get(t, j).is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    let (i, j) = self.smallest_in_cross(t);
                    self.swap_rows(t, i);
                    self.swap_cols(t, j);
                    continue;
                }
                // divisibility of the remaining block by the pivot
                let offending = (t + 1..self.a.rows).find(|&i| {
                    (t + 1..self.a.cols).any(|j| !self.a.get(i, j).is_multiple_of(&pivot))
                });
                match offending {
                    Some(i) => self.add_row_multiple(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if self.a.get(t, t).is_negative() {
                self.negate_row(t);
            }
            diagonal.push(self.a.get(t, t).clone());
        }
        (diagonal, self.left, self.right)
    }
}

/// Smith normal form with both transforms: `U * m * V = diag(d)`.
///
/// The returned diagonal has `min(rows, cols)` entries, nonzero ones first,
/// each dividing the next.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let n = m.rows().min(m.cols());
    let (mut diagonal, left, right) = SmithReduction::new(m, true, true).run();
    diagonal.resize(n, BigInt::zero());
    SmithForm {
        diagonal,
        left: left.expect("left transform tracked").0,
        right: right.expect("right transform tracked"),
    }
}

/// Canonical invariants of a finitely generated abelian group:
/// `Z^free_rank + Z/d_1 + ... + Z/d_k` with `d_1 | d_2 | ... | d_k`, `d_i >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbGroupInvariants {
    pub free_rank: usize,
    #[serde(serialize_with = "ser_bigints", deserialize_with = "de_bigints")]
    pub invariant_factors: Vec<BigInt>,
}

fn ser_bigints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        match x.to_u64() {
            Some(small) => seq.serialize_element(&small)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

fn de_bigints<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        Small(u64),
        Text(String),
    }
    let raw: Vec<Num> = Vec::deserialize(d)?;
    raw.into_iter()
        .map(|n| match n {
            Num::Small(v) => Ok(BigInt::from(v)),
            Num::Text(t) => t.parse::<BigInt>().map_err(serde::de::Error::custom),
        })
        .collect()
}

impl AbGroupInvariants {
    pub fn trivial() -> Self {
        AbGroupInvariants {
            free_rank: 0,
            invariant_factors: Vec::new(),
        }
    }

    /// `Z^free_rank` plus the given torsion orders, canonicalized.
    pub fn from_orders(free_rank: usize, orders: &[u64]) -> Self {
        let gens = orders.len();
        let mut rel = IntMatrix::zeros(free_rank + gens, gens);
        for (i, o) in orders.iter().enumerate() {
            rel.set(free_rank + i, i, BigInt::from(*o));
        }
        cokernel_invariants(&AbGroupPresentation::new(free_rank + gens, rel))
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn is_canonical(&self) -> bool {
        let two = BigInt::from(2);
        self.invariant_factors.iter().all(|d| *d >= two)
            && self
                .invariant_factors
                .windows(2)
                .all(|w| w[1].is_multiple_of(&w[0]))
    }
}

impl fmt::Display for AbGroupInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.invariant_factors {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `Z^generator_count / im(relations)`; relations are the matrix columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbGroupPresentation {
    pub generator_count: usize,
    pub relations: IntMatrix,
}

impl AbGroupPresentation {
    pub fn new(generator_count: usize, relations: IntMatrix) -> Self {
        assert_eq!(
            relations.rows(),
            generator_count,
            "relation matrix rows must equal the generator count"
        );
        AbGroupPresentation {
            generator_count,
            relations,
        }
    }
}

/// Incrementally maintained echelon basis of a sublattice of `Z^n`.
///
/// `pivots[i]` holds the basis vector whose first nonzero coordinate is `i`
/// (always positive). Inserting a vector keeps the span and the echelon shape.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    dim: usize,
    pivots: Vec<Option<Vec<BigInt>>>,
}

impl LatticeBasis {
    pub fn new(dim: usize) -> Self {
        LatticeBasis {
            dim,
            pivots: vec![None; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, v: &[BigInt]) {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        let mut v = v.to_vec();
        let mut start = 0;
        while let Some(i) = (start..self.dim).find(|&i| !v[i].is_zero()) {
            match &mut self.pivots[i] {
                None => {
                    if v[i].is_negative() {
                        v.iter_mut().for_each(|x| *x = -std::mem::take(x));
                    }
                    self.pivots[i] = Some(v);
                    self.reduce_tails();
                    return;
                }
                Some(b) => {
                    if v[i].is_multiple_of(&b[i]) {
                        let q = &v[i] / &b[i];
                        for k in i..self.dim {
                            if !b[k].is_zero() {
                                v[k] -= &q * &b[k];
                            }
                        }
                    } else {
                        let eg = b[i].extended_gcd(&v[i]);
                        let bi = b[i].clone() / &eg.gcd;
                        let vi = v[i].clone() / &eg.gcd;
                        let mut nb = vec![BigInt::zero(); self.dim];
                        let mut nv = vec![BigInt::zero(); self.dim];
                        for k in i..self.dim {
                            nb[k] = &eg.x * &b[k] + &eg.y * &v[k];
                            nv[k] = &vi * &b[k] - &bi * &v[k];
                        }
                        if nb[i].is_negative() {
                            nb.iter_mut().for_each(|x| *x = -std::mem::take(x));
                        }
                        *b = nb;
                        v = nv;
                    }
                    start = i + 1;
                }
            }
        }
        self.reduce_tails();
    }

    /// Reduces every entry in a pivot column into `[0, pivot)` using the
    /// row of that pivot; without this the entries blow up on long inputs.
    fn reduce_tails(&mut self) {
        let idx: Vec<usize> = (0..self.dim)
            .filter(|i| self.pivots[*i].is_some())
            .collect();
        for (a, &i) in idx.iter().enumerate() {
            for &k in &idx[a + 1..] {
                let (head, tail) = self.pivots.split_at_mut(k);
                let bk = tail[0].as_ref().expect("pivot row");
                let bi = head[i].as_mut().expect("pivot row");
                if bi[k].is_zero() || (!bi[k].is_negative() && bi[k] < bk[k]) {
                    continue;
                }
                let q = bi[k].div_floor(&bk[k]);
                for c in k..self.dim {
                    if !bk[c].is_zero() {
                        bi[c] -= &q * &bk[c];
                    }
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.iter().filter(|p| p.is_some()).count()
    }

    /// Basis vectors in pivot order, with entries above each pivot reduced
    /// into `[0, pivot)`. This is the Hermite normal form of the lattice.
    pub fn hermite_rows(&self) -> Vec<Vec<BigInt>> {
        let mut rows: Vec<(usize, Vec<BigInt>)> = self
            .pivots
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.clone().map(|v| (i, v)))
            .collect();
        for k in 0..rows.len() {
            let (pk, bk) = rows[k].clone();
            for row in rows.iter_mut().take(k) {
                let q = row.1[pk].div_floor(&bk[pk]);
                if !q.is_zero() {
                    for (c, b) in bk.iter().enumerate().skip(pk) {
                        if !b.is_zero() {
                            row.1[c] -= &q * b;
                        }
                    }
                }
            }
        }
        rows.into_iter().map(|(_, v)| v).collect()
    }

    pub fn vectors(&self) -> Vec<Vec<BigInt>> {
        self.pivots.iter().flatten().cloned().collect()
    }
}

/// Canonical invariants of a presented group.
pub fn cokernel_invariants(p: &AbGroupPresentation) -> AbGroupInvariants {
    Cokernel::compute(p).invariants().clone()
}

/// `a` and `b` describe isomorphic groups.
pub fn groups_isomorphic(a: &AbGroupInvariants, b: &AbGroupInvariants) -> bool {
    a.free_rank == b.free_rank && a.invariant_factors == b.invariant_factors
}

/// Coordinates of an element of a cokernel in its canonical decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ClassCoordinates {
    /// Residues modulo the invariant factors, in the same order.
    pub torsion: Vec<i64>,
    pub free: Vec<i64>,
}

impl ClassCoordinates {
    pub fn is_zero(&self) -> bool {
        self.torsion.iter().all(|x| *x == 0) && self.free.iter().all(|x| *x == 0)
    }
}

/// A cokernel together with the change of basis that exposes its canonical
/// decomposition, so that individual elements can be located in it.
#[derive(Clone, Debug)]
pub struct Cokernel {
    invariants: AbGroupInvariants,
    /// Diagonal padded with zeros to the generator count.
    diagonal: Vec<BigInt>,
    left: IntMatrix,
    left_inverse: IntMatrix,
}

impl Cokernel {
    pub fn compute(p: &AbGroupPresentation) -> Self {
        let n = p.generator_count;
        let mut lattice = LatticeBasis::new(n);
        for j in 0..p.relations.cols() {
            let col = p.relations.column(j);
            if col.iter().any(|x| !x.is_zero()) {
                lattice.insert(&col);
            }
        }
        Self::from_lattice(&lattice)
    }

    /// Cokernel of `Z^n / L` for an already assembled relation lattice.
    pub fn from_lattice(lattice: &LatticeBasis) -> Self {
        let n = lattice.dim();
        let basis = lattice.vectors();
        let m = IntMatrix::from_columns(n, &basis);
        let (mut diagonal, left, _) = SmithReduction::new(&m, true, false).run();
        diagonal.resize(n, BigInt::zero());
        let (left, left_inverse) = left.expect("left transform tracked");
        let invariant_factors: Vec<BigInt> = diagonal
            .iter()
            .filter(|d| **d > BigInt::one())
            .cloned()
            .collect();
        let free_rank = diagonal.iter().filter(|d| d.is_zero()).count();
        Cokernel {
            invariants: AbGroupInvariants {
                free_rank,
                invariant_factors,
            },
            diagonal,
            left,
            left_inverse,
        }
    }

    pub fn invariants(&self) -> &AbGroupInvariants {
        &self.invariants
    }

    pub fn generator_count(&self) -> usize {
        self.diagonal.len()
    }

    /// Canonical coordinates of the class of `v`.
    pub fn class_of(&self, v: &[BigInt]) -> ClassCoordinates {
        let w = self.left.mul_vec(v);
        let mut torsion = Vec::new();
        let mut free = Vec::new();
        for (x, d) in w.iter().zip(&self.diagonal) {
            if d.is_zero() {
                free.push(x.to_i64().expect("free coordinate fits in i64"));
            } else if !d.is_one() {
                torsion.push(x.mod_floor(d).to_i64().expect("torsion coordinate fits"));
            }
        }
        ClassCoordinates { torsion, free }
    }

    /// Representatives in `Z^n` of the canonical generators, one per
    /// invariant factor followed by one per free summand.
    pub fn generator_lifts(&self) -> Vec<Vec<BigInt>> {
        let mut tors = Vec::new();
        let mut free = Vec::new();
        for (i, d) in self.diagonal.iter().enumerate() {
            if d.is_one() {
                continue;
            }
            let col = self.left_inverse.column(i);
            if d.is_zero() {
                free.push(col);
            } else {
                tors.push(col);
            }
        }
        tors.extend(free);
        tors
    }

    /// Orders of the canonical generators (0 for free ones), aligned with
    /// [`Cokernel::generator_lifts`].
    pub fn generator_orders(&self) -> Vec<BigInt> {
        let mut orders: Vec<BigInt> = self.invariants.invariant_factors.clone();
        orders.extend(std::iter::repeat_n(
            BigInt::zero(),
            self.invariants.free_rank,
        ));
        orders
    }
}

/// Basis (as columns) of the integer kernel of `m`.
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let (diagonal, _, right) = SmithReduction::new(m, false, true).run();
    let v = right.expect("right transform tracked");
    let rank = diagonal.iter().filter(|d| !d.is_zero()).count();
    (rank..m.cols()).map(|j| v.column(j)).collect()
}

/// Sparse integer vector: coordinate -> nonzero value.
pub type SparseVec = BTreeMap<usize, BigInt>;

/// Generators of `{x in Z^g : sum x_j c_j = 0 in Z^m / diag(moduli)}` where
/// `c_j` are the given columns (length `m`) and `moduli[i] = 0` means the
/// coordinate is free.
///
/// Intended for many columns over few rows; the returned combinations are
/// sparse over the column indices.
pub fn kernel_mod(columns: &[Vec<BigInt>], moduli: &[BigInt]) -> Vec<SparseVec> {
    let m = moduli.len();
    struct Cand {
        value: Vec<BigInt>,
        combo: SparseVec,
    }
    let mut cands: Vec<Cand> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| {
            assert_eq!(c.len(), m, "column length mismatch");
            let mut combo = SparseVec::new();
            combo.insert(j, BigInt::one());
            Cand {
                value: c.clone(),
                combo,
            }
        })
        .collect();
    for (i, md) in moduli.iter().enumerate() {
        if !md.is_zero() {
            let mut value = vec![BigInt::zero(); m];
            value[i] = md.clone();
            cands.push(Cand {
                value,
                combo: SparseVec::new(),
            });
        }
    }
    for row in 0..m {
        loop {
            let live: Vec<usize> = (0..cands.len())
                .filter(|&k| !cands[k].value[row].is_zero())
                .collect();
            if live.len() <= 1 {
                if let Some(&k) = live.first() {
                    cands.swap_remove(k);
                }
                break;
            }
            let piv = *live
                .iter()
                .min_by_key(|&&k| cands[k].value[row].abs())
                .expect("nonempty");
            let pv = cands[piv].value.clone();
            let pc = cands[piv].combo.clone();
            for &k in &live {
                if k == piv {
                    continue;
                }
                let q = &cands[k].value[row] / &pv[row];
                if q.is_zero() {
                    continue;
                }
                let cand = &mut cands[k];
                for (x, p) in cand.value.iter_mut().zip(&pv) {
                    if !p.is_zero() {
                        *x -= &q * p;
                    }
                }
                for (idx, c) in &pc {
                    let e = cand.combo.entry(*idx).or_insert_with(BigInt::zero);
                    *e -= &q * c;
                    if e.is_zero() {
                        cand.combo.remove(idx);
                    }
                }
            }
        }
    }
    cands
        .into_iter()
        .map(|c| c.combo)
        .filter(|c| !c.is_empty())
        .collect()
}

/// Kernel of the homomorphism of finite presentations
/// `Z^a / diag(src) -> Z^b / diag(dst)` given by the integer matrix `map`
/// (`b x a`), as canonical invariants.
pub fn induced_kernel(map: &IntMatrix, src: &[BigInt], dst: &[BigInt]) -> AbGroupInvariants {
    let a = src.len();
    let b = dst.len();
    assert_eq!(map.rows(), b);
    assert_eq!(map.cols(), a);
    // preimage lattice L = {x : map x in diag(dst) Z^b}
    let mut block = IntMatrix::zeros(b, a + b);
    for (i, d) in dst.iter().enumerate() {
        for j in 0..a {
            block.set(i, j, map.get(i, j).clone());
        }
        block.set(i, a + i, -d.clone());
    }
    let mut lattice = LatticeBasis::new(a);
    for v in integer_kernel(&block) {
        let x: Vec<BigInt> = v[..a].to_vec();
        if x.iter().any(|e| !e.is_zero()) {
            lattice.insert(&x);
        }
    }
    let basis = lattice.hermite_rows();
    let r = basis.len();
    // express the source relations d_j e_j in the basis of L
    let mut rels = IntMatrix::zeros(r, a);
    for (j, d) in src.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let mut target = vec![BigInt::zero(); a];
        target[j] = d.clone();
        let coeffs = solve_in_echelon(&basis, &target)
            .expect("source relations lie in the preimage lattice");
        for (k, c) in coeffs.into_iter().enumerate() {
            rels.set(k, j, c);
        }
    }
    cokernel_invariants(&AbGroupPresentation::new(r, rels))
}

/// Integer coordinates of `target` in an echelon basis (rows), if any.
fn solve_in_echelon(basis: &[Vec<BigInt>], target: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = target.to_vec();
    let mut coeffs = vec![BigInt::zero(); basis.len()];
    for (k, b) in basis.iter().enumerate() {
        let piv = b.iter().position(|x| !x.is_zero())?;
        if rest[piv].is_zero() {
            continue;
        }
        if !rest[piv].is_multiple_of(&b[piv]) {
            return None;
        }
        let q = &rest[piv] / &b[piv];
        for (x, y) in rest.iter_mut().zip(b) {
            *x -= &q * y;
        }
        coeffs[k] = q;
    }
    rest.iter().all(|x| x.is_zero()).then_some(coeffs)
}
