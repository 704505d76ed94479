//! Diagonal operators: regularized local magnetisation in impurity sectors
//! and the duality of class I and class II diagonal densities.
//!
//! Everything here is exact integer arithmetic.

use crate::error::{Error, Result};
use crate::lattice::{ceil_div, jammed_magnetisation, PseudoConfig, SpeciesSequence};

/// Expectation value with the jammed reference subtracted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegularizedValue {
    /// `raw - reference`.
    pub value: i64,
    /// Expectation value in the jammed vacuum.
    pub reference: i64,
}

impl RegularizedValue {
    pub fn raw(&self) -> i64 {
        self.value + self.reference
    }
}

/// Regularized `sigma^z` at `site` with a single impurity at pseudoposition `n`.
///
/// With `v = n + delta(n)`, `d = theta(b_{n+1} < b_n)` and `site = y l' - j`:
///
/// ```text
/// <:s^z:> = s0(y(l'-1)-j) theta(v+1 < l') - s0(y l'-j) theta(v-d < l')
///         + delta_{l',v+1} (2 d R+ - 1) + delta_{l',v} d (2 R- - 1)
/// ```
///
/// where `s0` is the jammed magnetisation and `R+` (`R-`) counts particles
/// of species `j` right (left, inclusive) of `n` sharing the vacuum
/// macroposition `v`. For `y = 2` the runs have at most two members and
/// `R- = delta_{b_n,j} + theta(b_n < b_{n-1}) delta_{b_{n-1},j}`.
pub fn magnetisation_one_impurity(seq: &SpeciesSequence, n: i64, site: i64) -> RegularizedValue {
    let y = seq.y() as i64;
    let lp = ceil_div(site, y);
    let j = (-site).rem_euclid(y) as u32;
    let jam = |s: i64| jammed_magnetisation(seq, s) as i64;
    let is = |c: bool| c as i64;
    let v = seq.vacuum_macro(n);
    let d = is(seq.descent(n + 1));

    let mut value = jam(y * (lp - 1) - j as i64) * is(v + 1 < lp) - jam(y * lp - j as i64) * is(v - d < lp);
    if lp == v + 1 || lp == v {
        // Particles sharing the vacuum macroposition of particle n form a
        // run of consecutive descents.
        let mut r_plus = 0;
        let mut k = n + 1;
        while seq.descent(k) {
            r_plus += is(seq.species(k) == j);
            k += 1;
        }
        let mut r_minus = is(seq.species(n) == j);
        let mut k = n;
        while seq.descent(k) {
            r_minus += is(seq.species(k - 1) == j);
            k -= 1;
        }
        value += if lp == v + 1 { 2 * d * r_plus - 1 } else { d * (2 * r_minus - 1) };
    }
    RegularizedValue { value, reference: jam(site) }
}

/// Regularized `sigma^z` at `site` in a multi-impurity basis state, reduced
/// to single-impurity matrix elements.
pub fn magnetisation_multi(seq: &SpeciesSequence, c: &PseudoConfig, site: i64) -> RegularizedValue {
    let y = seq.y() as i64;
    let value = (0..c.nu())
        .map(|i| magnetisation_one_impurity(seq, c.gap_of(i), site - y * i as i64).value)
        .sum();
    RegularizedValue { value, reference: jammed_magnetisation(seq, site) as i64 }
}

/// Single-site factor of a diagonal density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    Identity,
    Sz,
    /// Projector onto spin up.
    Up,
    /// Projector onto spin down.
    Down,
}

impl Factor {
    /// Eigenvalue on a spin (`true` = up).
    pub fn eval(self, up: bool) -> i64 {
        match self {
            Factor::Identity => 1,
            Factor::Sz => {
                if up {
                    1
                } else {
                    -1
                }
            }
            Factor::Up => up as i64,
            Factor::Down => !up as i64,
        }
    }
}

/// Diagonal density as an ordered product of single-site factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiagonalOperatorSpec {
    pub pattern: Vec<Factor>,
}

impl DiagonalOperatorSpec {
    pub fn new(pattern: Vec<Factor>) -> Self {
        Self { pattern }
    }

    /// `sigma^z (P-)^k sigma^z`.
    pub fn sz_down_sz(k: usize) -> Self {
        let mut p = vec![Factor::Sz];
        p.extend(std::iter::repeat(Factor::Down).take(k));
        p.push(Factor::Sz);
        Self::new(p)
    }

    /// `sigma^z (P-)^a P+ (P-)^b sigma^z`.
    pub fn sz_class2(a: usize, b: usize) -> Self {
        let mut p = vec![Factor::Sz];
        p.extend(std::iter::repeat(Factor::Down).take(a));
        p.push(Factor::Up);
        p.extend(std::iter::repeat(Factor::Down).take(b));
        p.push(Factor::Sz);
        Self::new(p)
    }

    /// One plus the number of up projectors between the flanking `sigma^z`.
    pub fn class(&self) -> usize {
        1 + self.pattern.iter().filter(|f| **f == Factor::Up).count()
    }

    /// Value of the density starting at `start` on a spin configuration.
    pub fn eval_at(&self, spin: impl Fn(i64) -> bool, start: i64) -> i64 {
        let mut v = 1;
        for (i, f) in self.pattern.iter().enumerate() {
            v *= f.eval(spin(start + i as i64));
            if v == 0 {
                break;
            }
        }
        v
    }

    /// Shape `sigma^z (P-)^k sigma^z`, if it has it.
    fn down_run(&self) -> Option<usize> {
        let p = &self.pattern;
        (p.len() >= 2
            && p[0] == Factor::Sz
            && p[p.len() - 1] == Factor::Sz
            && p[1..p.len() - 1].iter().all(|f| *f == Factor::Down))
        .then(|| p.len() - 2)
    }

    /// Shape `sigma^z (P-)^a P+ (P-)^b sigma^z`, if it has it.
    fn class2_shape(&self) -> Option<(usize, usize)> {
        let p = &self.pattern;
        if p.len() < 3 || p[0] != Factor::Sz || p[p.len() - 1] != Factor::Sz {
            return None;
        }
        let inner = &p[1..p.len() - 1];
        let up = inner.iter().position(|f| *f == Factor::Up)?;
        let rest_down = inner
            .iter()
            .enumerate()
            .all(|(i, f)| i == up || *f == Factor::Down);
        rest_down.then(|| (up, inner.len() - up - 1))
    }
}

fn kd(a: i64, b: i64) -> i64 {
    (a == b) as i64
}

/// Contribution of a fragment `up, down^n, (up)` to the eigenvalue of a
/// class I density.
pub fn class1_eigenvalue(op: &DiagonalOperatorSpec, n: i64) -> Result<i64> {
    if n < 0 {
        return Err(Error::Invalid(format!("negative domain length {n}")));
    }
    match op.pattern.as_slice() {
        [Factor::Identity] => return Ok(n + 1),
        [Factor::Sz] => return Ok(1 - n),
        _ => {}
    }
    let k = op
        .down_run()
        .ok_or_else(|| Error::Invalid(format!("unsupported class I pattern {:?}", op.pattern)))?;
    Ok(match k {
        0 => n - 3 + 4 * kd(n, 0),
        1 => n - 4 + 4 * (kd(n, 0) + kd(n, 1)),
        2 => n - 5 + 4 * (kd(n, 1) + kd(n, 2)) + 5 * kd(n, 0),
        3 => n - 6 + 4 * (kd(n, 3) + kd(n, 2)) + 5 * kd(n, 1) + 6 * kd(n, 0),
        _ => {
            let k = k as i64;
            if n > k {
                n - k - 3
            } else {
                kd(n, k)
            }
        }
    })
}

/// Number of spins down in a gap whose image holds `m` pseudospins up
/// between particles of species `b_left` and `b_right`.
pub fn gap_spins_down(m: i64, b_left: u32, b_right: u32, y: u32) -> i64 {
    let y = y as i64;
    y * m + (b_left as i64 - b_right as i64 - 1).rem_euclid(y)
}

/// Class I eigenvalue read on the pseudospin side.
pub fn class1_eigenvalue_pseudo(
    op: &DiagonalOperatorSpec,
    m: i64,
    species: (u32, u32),
    y: u32,
) -> Result<i64> {
    class1_eigenvalue(op, gap_spins_down(m, species.0, species.1, y))
}

/// Contribution of `(up) down^{n_-} up_j down^{n_+} (up)` to the eigenvalue
/// of a class II density centred on the particle at `j`.
pub fn class2_eigenvalue(op: &DiagonalOperatorSpec, n_minus: i64, n_plus: i64) -> Result<i64> {
    if n_minus < 0 || n_plus < 0 {
        return Err(Error::Invalid("negative domain length".into()));
    }
    let (a, b) = op
        .class2_shape()
        .ok_or_else(|| Error::Invalid(format!("unsupported class II pattern {:?}", op.pattern)))?;
    let (nm, np) = (n_minus, n_plus);
    let side = |k: usize, n: i64| -> Option<i64> {
        match k {
            0 => Some(2 * kd(n, 0) - 1),
            1 => Some(2 * kd(n, 1) + kd(n, 0) - 1),
            2 => Some(2 * kd(n, 2) + kd(n, 1) + kd(n, 0) - 1),
            _ => None,
        }
    };
    let value = side(a, nm).zip(side(b, np)).map(|(l, r)| l * r);
    value.ok_or_else(|| Error::Invalid(format!("class II pattern {:?} beyond the table", op.pattern)))
}

/// Class II eigenvalue read on the pseudospin side from the pseudospins up
/// on both sides of the particle and the species triple around it.
pub fn class2_eigenvalue_pseudo(
    op: &DiagonalOperatorSpec,
    m_minus: i64,
    m_plus: i64,
    species: (u32, u32, u32),
    y: u32,
) -> Result<i64> {
    let nm = gap_spins_down(m_minus, species.0, species.1, y);
    let np = gap_spins_down(m_plus, species.1, species.2, y);
    class2_eigenvalue(op, nm, np)
}

/// Density of `Z^{(n)}_s` at pseudoposition `j`: pseudospin down at `j` and
/// `j + n`, pseudospins up in between, and the species of the particle at
/// `j` and its right neighbour satisfying `b_k - b_{k+1} = s (mod y)`.
pub fn dual_z_value(seq: &SpeciesSequence, c: &PseudoConfig, n: i64, s: i64, j: i64) -> u8 {
    if !local_projector(c, n, j) {
        return 0;
    }
    let y = seq.y() as i64;
    let ups_left = c.positions().iter().filter(|&&p| p < j).count() as i64;
    let k = j + 1 - ups_left;
    ((seq.species(k) as i64 - seq.species(k + 1) as i64 - s).rem_euclid(y) == 0) as u8
}

/// `(1 - tau_j)/2 prod (1 + tau_{j+m})/2 (1 - tau_{j+n})/2` on a basis state.
pub fn local_projector(c: &PseudoConfig, n: i64, j: i64) -> bool {
    n >= 1 && !c.is_up(j) && !c.is_up(j + n) && (1..n).all(|m| c.is_up(j + m))
}

/// Pseudospin image of the spin-side delta `delta_{n_down, k}` of the gap
/// following the particle at pseudoposition `j`.
pub fn dual_delta(seq: &SpeciesSequence, c: &PseudoConfig, k: i64, j: i64) -> u8 {
    let y = seq.y() as i64;
    dual_z_value(seq, c, 1 + k.div_euclid(y), 1 + k.rem_euclid(y), j)
}

/// `sum_l sum_{n = m y + 1}^{upper} P+_l (prod P-) P+_{l+n}` on a chain whose
/// spins outside `0..len` are frozen up; `l` runs over `-1..len`.
pub fn v_m_sum(spins: &[bool], m: usize, y: usize, upper: usize) -> i64 {
    let spin = |s: i64| s < 0 || s >= spins.len() as i64 || spins[s as usize];
    let mut total = 0;
    for l in -1..spins.len() as i64 {
        for n in m * y + 1..=upper {
            let n = n as i64;
            if spin(l) && spin(l + n) && (1..n).all(|i| !spin(l + i)) {
                total += 1;
            }
        }
    }
    total
}

/// Telescoped form `sum_l P+_l (prod_{1..my} P-) [1 - prod_{1..y} P-]`.
pub fn v_m_telescoped(spins: &[bool], m: usize, y: usize) -> i64 {
    let spin = |s: i64| s < 0 || s >= spins.len() as i64 || spins[s as usize];
    let (my, y) = ((m * y) as i64, y as i64);
    (-1..spins.len() as i64)
        .filter(|&l| {
            spin(l)
                && (1..=my).all(|i| !spin(l + i))
                && !(1..=y).all(|i| !spin(l + my + i))
        })
        .count() as i64
}
