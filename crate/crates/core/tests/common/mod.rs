//! Small independent models used as oracles by the integration tests.
#![allow(dead_code)]

pub mod relations;

/// `F_q` for `q` in {3, 5, 7, 9}, written from scratch. `F_9` is
/// `F_3[i]/(i^2 + 1)` with `a + b i` stored as code `a + 3b`.
#[derive(Clone, Copy, Debug)]
pub struct SmallField {
    pub q: u32,
}

impl SmallField {
    pub fn new(q: u32) -> Self {
        assert!(matches!(q, 3 | 5 | 7 | 9), "oracle covers q in 3, 5, 7, 9");
        SmallField { q }
    }

    fn parts(&self, a: u32) -> (u32, u32) {
        (a % 3, a / 3)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.q == 9 {
            let (a0, a1) = self.parts(a);
            let (b0, b1) = self.parts(b);
            (a0 + b0) % 3 + 3 * ((a1 + b1) % 3)
        } else {
            (a + b) % self.q
        }
    }

    pub fn neg(&self, a: u32) -> u32 {
        if self.q == 9 {
            let (a0, a1) = self.parts(a);
            (3 - a0) % 3 + 3 * ((3 - a1) % 3)
        } else {
            (self.q - a) % self.q
        }
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.q == 9 {
            let (a0, a1) = self.parts(a);
            let (b0, b1) = self.parts(b);
            // (a0 + a1 i)(b0 + b1 i) with i^2 = -1
            let re = (a0 * b0 + 2 * a1 * b1) % 3;
            let im = (a0 * b1 + a1 * b0) % 3;
            re + 3 * im
        } else {
            a * b % self.q
        }
    }

    pub fn inv(&self, a: u32) -> u32 {
        (1..self.q).find(|b| self.mul(a, *b) == 1).expect("nonzero")
    }

    pub fn units(&self) -> Vec<u32> {
        (1..self.q).collect()
    }

    pub fn is_square(&self, a: u32) -> bool {
        (0..self.q).any(|x| self.mul(x, x) == a)
    }

    pub fn least_nonsquare(&self) -> u32 {
        (1..self.q).find(|a| !self.is_square(*a)).expect("q odd")
    }

    /// Value of the diagonal form at `v`.
    pub fn eval_form(&self, form: &[u32], v: &[u32]) -> u32 {
        form.iter().zip(v).fold(0, |acc, (a, x)| {
            self.add(acc, self.mul(*a, self.mul(*x, *x)))
        })
    }

    /// Polar form `B(u, v) = sum a_i u_i v_i`.
    pub fn polar(&self, form: &[u32], u: &[u32], v: &[u32]) -> u32 {
        form.iter()
            .zip(u.iter().zip(v))
            .fold(0, |acc, (a, (x, y))| {
                self.add(acc, self.mul(*a, self.mul(*x, *y)))
            })
    }

    /// All vectors of length `n`.
    pub fn vectors(&self, n: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..self.q).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// Representation numbers `#{v : Q(v) = c}` for every `c`.
    pub fn representation_counts(&self, form: &[u32]) -> Vec<usize> {
        let mut counts = vec![0; self.q as usize];
        for v in self.vectors(form.len()) {
            counts[self.eval_form(form, &v) as usize] += 1;
        }
        counts
    }

    pub fn is_isotropic(&self, form: &[u32]) -> bool {
        self.vectors(form.len())
            .iter()
            .any(|v| v.iter().any(|x| *x != 0) && self.eval_form(form, v) == 0)
    }

    /// Hyperbolic test by search: a form of rank `2m <= 4` is hyperbolic iff
    /// it has a totally isotropic subspace of dimension `m`.
    pub fn is_hyperbolic(&self, form: &[u32]) -> bool {
        match form.len() {
            0 => true,
            n if n % 2 == 1 => false,
            2 => self.is_isotropic(form),
            4 => {
                let iso: Vec<Vec<u32>> = self
                    .vectors(4)
                    .into_iter()
                    .filter(|v| v.iter().any(|x| *x != 0) && self.eval_form(form, v) == 0)
                    .collect();
                iso.iter().any(|u| {
                    iso.iter()
                        .any(|v| self.polar(form, u, v) == 0 && !self.proportional(u, v))
                })
            }
            _ => panic!("oracle limited to rank 4"),
        }
    }

    fn proportional(&self, u: &[u32], v: &[u32]) -> bool {
        (1..self.q).any(|c| u.iter().zip(v).all(|(a, b)| self.mul(c, *a) == *b))
    }
}

/// Integer relations `x <1> + y <nu>` (with `x, y >= 0`, `x + y <= 4`)
/// satisfying `pred`, as integer vectors.
pub fn small_combinations() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for x in 0..=4usize {
        for y in 0..=4 - x {
            out.push((x, y));
        }
    }
    out
}
