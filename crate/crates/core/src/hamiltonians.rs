//! Spin-chain Hamiltonians built from constrained hopping blocks, and their
//! projections onto one- and two-impurity pseudospin sectors.
//!
//! Coefficients are kept as exact integer combinations of `J`, `J Delta`,
//! `J g` and `J V` until they are assembled into floating point.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SpeciesSequence;
use crate::linalg::SparseOp;
use crate::operators::{class1_eigenvalue, gap_spins_down, DiagonalOperatorSpec};

/// Couplings of the constrained XXZ model with pair hopping and the
/// symmetry-breaking nearest-neighbour interaction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    /// Pair-hopping amplitude in units of `J`.
    pub g: f64,
    /// Nearest-neighbour interaction in units of `J`.
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(default = "default_y")]
    pub y: u32,
}

fn default_y() -> u32 {
    2
}

impl ModelParams {
    pub fn new(j: f64, delta: f64, g: f64, v: f64) -> Self {
        Self { j, delta, g, v, y: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.y != 2 {
            return Err(Error::Invalid(format!("model Hamiltonians need y = 2, got {}", self.y)));
        }
        if !(self.j.is_finite() && self.delta.is_finite() && self.g.is_finite() && self.v.is_finite()) {
            return Err(Error::Invalid("non-finite coupling".into()));
        }
        if self.j == 0.0 {
            return Err(Error::Invalid("J must be nonzero".into()));
        }
        Ok(())
    }
}

/// Exact coefficient `j J + jd J Delta + jg J g + jv J V`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coeff {
    pub j: i64,
    pub jd: i64,
    pub jg: i64,
    pub jv: i64,
}

impl Coeff {
    pub const ZERO: Coeff = Coeff { j: 0, jd: 0, jg: 0, jv: 0 };

    pub const fn new(j: i64, jd: i64, jg: i64, jv: i64) -> Self {
        Self { j, jd, jg, jv }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    pub fn eval(&self, p: &ModelParams) -> f64 {
        p.j * (self.j as f64 + self.jd as f64 * p.delta + self.jg as f64 * p.g + self.jv as f64 * p.v)
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(self, o: Coeff) -> Coeff {
        Coeff::new(self.j + o.j, self.jd + o.jd, self.jg + o.jg, self.jv + o.jv)
    }
}

impl AddAssign for Coeff {
    fn add_assign(&mut self, o: Coeff) {
        *self = *self + o;
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, o: Coeff) -> Coeff {
        self + (-o)
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff::new(-self.j, -self.jd, -self.jg, -self.jv)
    }
}

impl Mul<i64> for Coeff {
    type Output = Coeff;
    fn mul(self, k: i64) -> Coeff {
        Coeff::new(k * self.j, k * self.jd, k * self.jg, k * self.jv)
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}J{:+}JDelta{:+}Jg{:+}JV", self.j, self.jd, self.jg, self.jv)
    }
}

/// Sparse operator with exact coefficients, stored by rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactOperator {
    pub rows: Vec<BTreeMap<usize, Coeff>>,
}

impl ExactOperator {
    pub fn zeros(n: usize) -> Self {
        Self { rows: vec![BTreeMap::new(); n] }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn add(&mut self, i: usize, j: usize, c: Coeff) {
        let e = self.rows[i].entry(j).or_default();
        *e += c;
        if e.is_zero() {
            self.rows[i].remove(&j);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Coeff {
        self.rows[i].get(&j).copied().unwrap_or_default()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|i| self.rows[i].iter().all(|(&j, c)| self.get(j, i) == *c))
    }

    pub fn to_sparse(&self, p: &ModelParams) -> SparseOp {
        SparseOp::from_rows(
            self.rows
                .iter()
                .map(|r| r.iter().map(|(&j, c)| (j, c.eval(p))).collect())
                .collect(),
        )
    }
}

/// Treatment of sites outside the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Terms are dropped when any factor leaves the chain.
    Open,
    /// Sites outside the chain are frozen spins up. Diagonal terms see them;
    /// hops that would flip them are dropped.
    Frozen,
}

/// Finite spin chain on sites `0..len`; basis states are bit masks with bit
/// `l` set when spin `l` is up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpinChain {
    pub len: usize,
    pub boundary: Boundary,
}

/// Local building block of the constrained dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// `T^{s,-s}_{l,l+y} = sigma^s_l (prod P-) sigma^{-s}_{l+y}`, with
    /// `raise_left` selecting `s = +`.
    T { raise_left: bool, l: i64, y: i64 },
    Sz(i64),
}

impl SpinChain {
    pub fn new(len: usize, boundary: Boundary) -> Result<Self> {
        if !(6..=62).contains(&len) {
            return Err(Error::Invalid(format!("chain length {len} outside 6..=62")));
        }
        Ok(Self { len, boundary })
    }

    pub fn contains(&self, site: i64) -> bool {
        (0..self.len as i64).contains(&site)
    }

    /// Spin at `site`; frame spins are up for the frozen boundary.
    pub fn spin(&self, state: u64, site: i64) -> Option<bool> {
        if self.contains(site) {
            Some(state >> site & 1 == 1)
        } else {
            match self.boundary {
                Boundary::Open => None,
                Boundary::Frozen => Some(true),
            }
        }
    }

    pub fn sz_total(&self, state: u64) -> i64 {
        2 * state.count_ones() as i64 - self.len as i64
    }

    /// Applies one building block. Flipped sites must lie in the chain; with
    /// open boundaries every site the block touches must.
    pub fn apply_block(&self, block: Block, state: u64) -> Result<Option<(i64, u64)>> {
        let outside = |s: i64| Error::Invalid(format!("block touches site {s} outside 0..{}", self.len));
        match block {
            Block::Sz(l) => {
                let up = self.spin(state, l).ok_or_else(|| outside(l))?;
                Ok(Some((if up { 1 } else { -1 }, state)))
            }
            Block::T { raise_left, l, y } => {
                for s in [l, l + y] {
                    if !self.contains(s) {
                        return Err(outside(s));
                    }
                }
                let mut mid = Vec::new();
                for s in l + 1..l + y {
                    mid.push(self.spin(state, s).ok_or_else(|| outside(s))?);
                }
                let left = state >> l & 1 == 1;
                let right = state >> (l + y) & 1 == 1;
                if mid.iter().any(|&u| u) || left == raise_left || right != raise_left {
                    return Ok(None);
                }
                Ok(Some((1, state ^ (1 << l) ^ (1 << (l + y)))))
            }
        }
    }

    /// Applies a product of blocks, rightmost first. Blocks that would flip a
    /// frame spin annihilate the state.
    fn apply_product(&self, blocks: &[Block], state: u64) -> Option<(i64, u64)> {
        let mut acc = (1, state);
        for &b in blocks.iter().rev() {
            let (w, s) = self.apply_block(b, acc.1).ok().flatten()?;
            acc = (acc.0 * w, s);
        }
        Some(acc)
    }

    /// `H |state>` for the literal Pauli sum
    ///
    /// ```text
    /// H = sum_l 2J (s+_{l-1} s-_{l+1} + h.c.) P-_l + J Delta sz_{l-1} P-_l sz_{l+1}
    ///         + 2Jg (s+_{l-1} s-_{l+3} + h.c.) P-_l P-_{l+1} P-_{l+2}
    ///   [+ J V sum_l sz_l sz_{l+1}]
    /// ```
    ///
    /// The diagonal entry comes first; the other entries are distinct.
    pub fn act(&self, state: u64, include_hi: bool) -> Vec<(u64, Coeff)> {
        let n = self.len as i64;
        let frozen = self.boundary == Boundary::Frozen;
        let get = |s: i64| self.spin(state, s).unwrap_or(true);
        let sz = |s: i64| if get(s) { 1 } else { -1 };
        let flip = |a: i64, b: i64| state ^ (1 << a) ^ (1 << b);
        let mut diag = Coeff::ZERO;
        let mut off: BTreeMap<u64, Coeff> = BTreeMap::new();

        let (lo, hi) = if frozen { (0, n - 1) } else { (1, n - 2) };
        for l in lo..=hi {
            if get(l) {
                continue;
            }
            diag += Coeff::new(0, sz(l - 1) * sz(l + 1), 0, 0);
            if self.contains(l - 1) && self.contains(l + 1) && get(l - 1) != get(l + 1) {
                *off.entry(flip(l - 1, l + 1)).or_default() += Coeff::new(2, 0, 0, 0);
            }
        }
        for l in 1..=n - 4 {
            if !get(l) && !get(l + 1) && !get(l + 2) && get(l - 1) != get(l + 3) {
                *off.entry(flip(l - 1, l + 3)).or_default() += Coeff::new(0, 0, 2, 0);
            }
        }
        if include_hi {
            let (lo, hi) = if frozen { (-1, n - 1) } else { (0, n - 2) };
            for l in lo..=hi {
                diag += Coeff::new(0, 0, 0, sz(l) * sz(l + 1));
            }
        }
        let mut out = vec![(state, diag)];
        out.extend(off.into_iter().filter(|(_, c)| !c.is_zero()));
        out
    }

    /// `H |state>` in the building-block form
    ///
    /// ```text
    /// sum_l 2J (T+-_{l-1,l+1} + T-+_{l-1,l+1}) - 2J Delta {T+-_{l-1,l+1}, T-+_{l-1,l+1}}
    ///     + 2J g (T-+_{l,l+2} T-+_{l-2,l} + T+-_{l-2,l} T+-_{l,l+2})
    /// ```
    ///
    /// which differs from [`SpinChain::act`] (without the interaction) by a
    /// constant plus a multiple of the total magnetisation when the
    /// boundary is frozen.
    pub fn act_building_blocks(&self, state: u64) -> Vec<(u64, Coeff)> {
        // Frozen frame: embed in a chain with two extra spins up on each side
        // and keep only products that leave those spins in place.
        let pad = if self.boundary == Boundary::Frozen { 2 } else { 0 };
        let ext = SpinChain { len: self.len + 2 * pad, boundary: Boundary::Open };
        let frame: u64 = ((1 << pad) - 1) | (((1 << pad) - 1) << (self.len + pad));
        let inner = state << pad | frame;
        let n = ext.len as i64;
        let t = |raise_left, l| Block::T { raise_left, l, y: 2 };
        let mut acc: BTreeMap<u64, Coeff> = BTreeMap::new();
        let mut push = |blocks: &[Block], c: Coeff| {
            if let Some((w, s)) = ext.apply_product(blocks, inner) {
                if s & frame == frame {
                    *acc.entry(s >> pad & ((1 << self.len) - 1)).or_default() += c * w;
                }
            }
        };
        for l in 0..=n {
            push(&[t(true, l - 1)], Coeff::new(2, 0, 0, 0));
            push(&[t(false, l - 1)], Coeff::new(2, 0, 0, 0));
            push(&[t(true, l - 1), t(false, l - 1)], Coeff::new(0, -2, 0, 0));
            push(&[t(false, l - 1), t(true, l - 1)], Coeff::new(0, -2, 0, 0));
            push(&[t(false, l), t(false, l - 2)], Coeff::new(0, 0, 2, 0));
            push(&[t(true, l - 2), t(true, l)], Coeff::new(0, 0, 2, 0));
        }
        let diag = acc.remove(&state).unwrap_or_default();
        let mut out = vec![(state, diag)];
        out.extend(acc.into_iter().filter(|(_, c)| !c.is_zero()));
        out
    }
}

/// Exact spin Hamiltonian restricted to the given basis states, which must
/// be closed under the dynamics.
pub fn build_spin_hamiltonian(chain: &SpinChain, states: &[u64], include_hi: bool) -> Result<ExactOperator> {
    let index: std::collections::HashMap<u64, usize> =
        states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut op = ExactOperator::zeros(states.len());
    for (i, &s) in states.iter().enumerate() {
        for (t, c) in chain.act(s, include_hi) {
            let j = *index
                .get(&t)
                .ok_or_else(|| Error::Invalid(format!("basis not closed: {s:b} -> {t:b}")))?;
            op.add(j, i, c);
        }
    }
    Ok(op)
}

/// Every state with `ups` spins up on a chain of `len` sites, ascending.
pub fn magnetisation_sector(len: usize, ups: u32) -> Vec<u64> {
    (0u64..1 << len).filter(|s| s.count_ones() == ups).collect()
}

/// Configurations of `nu` impurities with pseudopositions in `[lo, hi]`
/// (hard walls), ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    nu: usize,
    lo: i64,
    hi: i64,
    configs: Vec<Vec<i64>>,
}

impl SectorBasis {
    pub fn new(nu: usize, lo: i64, hi: i64) -> Result<Self> {
        if nu > 2 {
            return Err(Error::Invalid(format!("sectors with nu = {nu} > 2 are not supported")));
        }
        if hi - lo + 1 < nu as i64 {
            return Err(Error::Invalid(format!("interval [{lo}, {hi}] cannot hold {nu} impurities")));
        }
        let configs = match nu {
            0 => vec![vec![]],
            1 => (lo..=hi).map(|n| vec![n]).collect(),
            _ => (lo..=hi)
                .flat_map(|a| (a + 1..=hi).map(move |b| vec![a, b]))
                .collect(),
        };
        Ok(Self { nu, lo, hi, configs })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn interval(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn config(&self, i: usize) -> &[i64] {
        &self.configs[i]
    }

    pub fn configs(&self) -> &[Vec<i64>] {
        &self.configs
    }

    pub fn index(&self, c: &[i64]) -> Option<usize> {
        if c.len() != self.nu || c.iter().any(|&n| n < self.lo || n > self.hi) {
            return None;
        }
        match c {
            [] => Some(0),
            [n] => Some((n - self.lo) as usize),
            [a, b] if a < b => {
                let (d, w) = (a - self.lo, self.hi - self.lo);
                Some((d * w - d * (d - 1) / 2 + (b - a - 1)) as usize)
            }
            _ => None,
        }
    }
}

/// Hamiltonian restricted to a sector, in floating point.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    pub basis: SectorBasis,
    pub sequence: Option<SpeciesSequence>,
    pub matrix: SparseOp,
}

impl SectorOperator {
    /// Triplet dump preceded by the basis enumeration.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let (lo, hi) = self.basis.interval();
        s.push_str(&format!("# nu={} interval={lo}..{hi} dim={}\n", self.basis.nu(), self.basis.len()));
        if let Some(seq) = &self.sequence {
            s.push_str(&format!("# sequence {seq}\n"));
        }
        for (i, c) in self.basis.configs().iter().enumerate() {
            let c: Vec<String> = c.iter().map(|n| n.to_string()).collect();
            s.push_str(&format!("# {i}: {}\n", c.join(",")));
        }
        s.push_str("row,col,coeff\n");
        for (i, j, v) in self.matrix.triplets() {
            s.push_str(&format!("{i},{j},{v:e}\n"));
        }
        s
    }
}

/// Hopping and pair-hopping part, shared by every pseudospin builder:
/// amplitude `2J` for single hops (hard core) and `2Jg` for adjacent pairs.
fn kinetic(basis: &SectorBasis) -> ExactOperator {
    let mut op = ExactOperator::zeros(basis.len());
    for (i, c) in basis.configs().iter().enumerate() {
        for k in 0..c.len() {
            for step in [-1, 1] {
                let mut d = c.clone();
                d[k] += step;
                if d.windows(2).all(|w| w[0] < w[1]) {
                    if let Some(j) = basis.index(&d) {
                        op.add(j, i, Coeff::new(2, 0, 0, 0));
                    }
                }
            }
        }
        if let [a, b] = c[..] {
            if b == a + 1 {
                for step in [-1, 1] {
                    if let Some(j) = basis.index(&[a + step, b + step]) {
                        op.add(j, i, Coeff::new(0, 0, 2, 0));
                    }
                }
            }
        }
    }
    op
}

/// Exact diagonal of a basis state relative to the jammed vacuum: the
/// `Delta` and (optionally) `V` densities summed over the gaps that hold
/// impurities, read through the class I fragment values.
pub fn fragment_diagonal(seq: &SpeciesSequence, c: &[i64], include_hi: bool) -> Result<Coeff> {
    let y = seq.y();
    let dd = DiagonalOperatorSpec::sz_down_sz(1);
    let vv = DiagonalOperatorSpec::sz_down_sz(0);
    let mut gaps: BTreeMap<i64, i64> = BTreeMap::new();
    for (i, &n) in c.iter().enumerate() {
        *gaps.entry(n - i as i64).or_default() += 1;
    }
    let mut total = Coeff::ZERO;
    for (g, m) in gaps {
        let (bl, br) = (seq.species(g), seq.species(g + 1));
        let n = gap_spins_down(m, bl, br, y);
        let n0 = gap_spins_down(0, bl, br, y);
        total.jd += class1_eigenvalue(&dd, n)? - class1_eigenvalue(&dd, n0)?;
        if include_hi {
            total.jv += class1_eigenvalue(&vv, n)? - class1_eigenvalue(&vv, n0)?;
        }
    }
    Ok(total)
}

/// Exact sector Hamiltonian with the diagonal taken from the spin side.
pub fn pseudo_operator_exact(basis: &SectorBasis, seq: &SpeciesSequence, include_hi: bool) -> Result<ExactOperator> {
    let mut op = kinetic(basis);
    for (i, c) in basis.configs().iter().enumerate() {
        op.add(i, i, fragment_diagonal(seq, c, include_hi)?);
    }
    Ok(op)
}

/// Symmetric-model diagonal as displayed for the pseudospin Hamiltonian:
/// `-4 J Delta` for one impurity, `4 J Delta (delta_{n2,n1+1} - 2)` for two.
fn symmetric_diagonal(c: &[i64]) -> Coeff {
    match c {
        [_] => Coeff::new(0, -4, 0, 0),
        [a, b] => Coeff::new(0, 4 * ((*b == a + 1) as i64 - 2), 0, 0),
        _ => Coeff::ZERO,
    }
}

fn check_nu(basis: &SectorBasis) -> Result<()> {
    if !(1..=2).contains(&basis.nu()) {
        return Err(Error::Invalid(format!("builders need nu in {{1, 2}}, got {}", basis.nu())));
    }
    Ok(())
}

/// Symmetric-model sector operator.
pub fn build_pseudo_symmetric_exact(basis: &SectorBasis) -> Result<ExactOperator> {
    check_nu(basis)?;
    let mut op = kinetic(basis);
    for (i, c) in basis.configs().iter().enumerate() {
        op.add(i, i, symmetric_diagonal(c));
    }
    Ok(op)
}

pub fn build_pseudo_symmetric(p: &ModelParams, basis: &SectorBasis) -> Result<SectorOperator> {
    p.validate()?;
    let op = build_pseudo_symmetric_exact(basis)?;
    Ok(SectorOperator { basis: basis.clone(), sequence: None, matrix: op.to_sparse(p) })
}

/// One-impurity potential of the symmetry-breaking interaction,
/// `-2 J V (1 - (-1)^{b_n - b_{n+1}})`.
pub fn staggered_potential(seq: &SpeciesSequence, n: i64) -> Coeff {
    let odd = (seq.species(n) as i64 - seq.species(n + 1) as i64).rem_euclid(2) == 1;
    Coeff::new(0, 0, 0, -4 * odd as i64)
}

/// Sector operator of the model with the interaction. One impurity uses the
/// staggered potential; two impurities use the spin-side diagonal.
pub fn build_pseudo_nonsymmetric_exact(seq: &SpeciesSequence, basis: &SectorBasis) -> Result<ExactOperator> {
    let mut op = build_pseudo_symmetric_exact(basis)?;
    for (i, c) in basis.configs().iter().enumerate() {
        let v = if let [n] = c[..] {
            staggered_potential(seq, n)
        } else {
            let d = fragment_diagonal(seq, c, true)?;
            Coeff::new(0, 0, 0, d.jv)
        };
        op.add(i, i, v);
    }
    Ok(op)
}

pub fn build_pseudo_nonsymmetric(p: &ModelParams, seq: &SpeciesSequence, basis: &SectorBasis) -> Result<SectorOperator> {
    p.validate()?;
    if seq.y() != 2 {
        return Err(Error::Invalid("model Hamiltonians need y = 2".into()));
    }
    let op = build_pseudo_nonsymmetric_exact(seq, basis)?;
    Ok(SectorOperator { basis: basis.clone(), sequence: Some(seq.clone()), matrix: op.to_sparse(p) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{map_pseudo_to_spins, PseudoConfig};
    use crate::linalg::symmetric_eigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn eq19() -> SpeciesSequence {
        SpeciesSequence::from_pattern(2, &[1, 0, 0, 1], 3, 0).unwrap()
    }

    fn bits(s: &str) -> u64 {
        s.chars().enumerate().map(|(i, c)| ((c == '1') as u64) << i).sum()
    }

    #[test]
    fn test_block_examples() {
        let chain = SpinChain::new(6, Boundary::Open).unwrap();
        let t = |raise_left| Block::T { raise_left, l: 0, y: 2 };
        assert_eq!(chain.apply_block(t(false), bits("100000")).unwrap(), Some((1, bits("001000"))));
        assert_eq!(chain.apply_block(t(true), bits("001000")).unwrap(), Some((1, bits("100000"))));
        assert_eq!(chain.apply_block(t(false), bits("110000")).unwrap(), None);
        assert!(chain.apply_block(Block::T { raise_left: true, l: 5, y: 2 }, 0).is_err());
        assert_eq!(chain.apply_block(Block::Sz(2), bits("001000")).unwrap(), Some((1, bits("001000"))));
    }

    #[test]
    fn test_blocks_conserve_species() {
        let chain = SpinChain::new(12, Boundary::Open).unwrap();
        let species = |s: u64| {
            let mut c = [0u32; 2];
            for l in 0..12 {
                if s >> l & 1 == 1 {
                    c[(l % 2) as usize] += 1;
                }
            }
            c
        };
        for s in 0u64..1 << 12 {
            for l in 0..10 {
                for raise_left in [true, false] {
                    if let Some((_, t)) = chain.apply_block(Block::T { raise_left, l, y: 2 }, s).unwrap() {
                        assert_eq!(species(s), species(t));
                    }
                }
            }
        }
    }

    #[test]
    fn test_commutes_with_sz() {
        for boundary in [Boundary::Open, Boundary::Frozen] {
            let chain = SpinChain::new(10, boundary).unwrap();
            for s in 0u64..1 << 10 {
                for (t, _) in chain.act(s, true) {
                    assert_eq!(t.count_ones(), s.count_ones());
                }
            }
        }
    }

    #[test]
    fn test_hermitian() {
        let chain = SpinChain::new(10, Boundary::Open).unwrap();
        let states = magnetisation_sector(10, 5);
        let op = build_spin_hamiltonian(&chain, &states, true).unwrap();
        assert!(op.is_symmetric());
    }

    #[test]
    fn test_xx_limit_is_hard_rod_hopping() {
        // With Delta = g = 0 only particle hops by two sites over a down spin remain.
        let chain = SpinChain::new(10, Boundary::Open).unwrap();
        for s in 0u64..1 << 10 {
            for (t, c) in chain.act(s, false) {
                let c = Coeff { jd: 0, jg: 0, ..c };
                if t == s {
                    assert!(c.is_zero());
                    continue;
                }
                if c.is_zero() {
                    continue;
                }
                let moved = s ^ t;
                assert_eq!(moved.count_ones(), 2);
                let a = moved.trailing_zeros();
                assert_eq!(moved, (1 << a) | (1 << (a + 2)));
                assert_eq!(s >> (a + 1) & 1, 0);
                assert_eq!(c, Coeff::new(2, 0, 0, 0));
            }
        }
    }

    #[test]
    fn test_building_block_form() {
        let chain = SpinChain::new(10, Boundary::Frozen).unwrap();
        let diff = |s: u64| -> Coeff {
            let a: BTreeMap<u64, Coeff> = chain.act(s, false).into_iter().collect();
            let b: BTreeMap<u64, Coeff> = chain.act_building_blocks(s).into_iter().collect();
            for (t, c) in a.iter().chain(b.iter()) {
                if *t != s {
                    assert_eq!(a.get(t), b.get(t), "state {s:b} -> {t:b}");
                    let _ = c;
                }
            }
            b.get(&s).copied().unwrap_or_default() - a.get(&s).copied().unwrap_or_default()
        };
        // Offsets from two reference states: diff = alpha + beta * Sz.
        let (s1, s2) = (0u64, 1u64);
        let (d1, d2) = (diff(s1), diff(s2));
        let (z1, z2) = (chain.sz_total(s1), chain.sz_total(s2));
        let slope = d2 - d1;
        for s in 0u64..1 << 10 {
            let k = (chain.sz_total(s) - z1) / (z2 - z1);
            assert_eq!(diff(s), d1 + slope * k);
        }
    }

    #[test]
    fn test_one_impurity_dispersion() {
        let p = ModelParams::new(1.3, 0.4, -1.0, 0.0);
        let basis = SectorBasis::new(1, -50, 50).unwrap();
        let op = build_pseudo_symmetric(&p, &basis).unwrap();
        let spec = symmetric_eigen(op.matrix.to_dense());
        let n = basis.len();
        let mut expect: Vec<f64> = (1..=n)
            .map(|k| 4.0 * p.j * ((k as f64 * PI / (n + 1) as f64).cos() - p.delta))
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in spec.values.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn test_two_impurity_contact_and_pair_hop() {
        let basis = SectorBasis::new(2, -6, 6).unwrap();
        let op = build_pseudo_symmetric_exact(&basis).unwrap();
        let i = basis.index(&[0, 1]).unwrap();
        assert_eq!(op.get(i, i), Coeff::new(0, -4, 0, 0));
        let far = basis.index(&[0, 3]).unwrap();
        assert_eq!(op.get(far, far), Coeff::new(0, -8, 0, 0));
        for (a, b) in [(-1, 0), (1, 2)] {
            let j = basis.index(&[a, b]).unwrap();
            assert_eq!(op.get(j, i), Coeff::new(0, 0, 2, 0));
        }
        // Hard core: no hop onto an occupied site.
        assert!(op.get(basis.index(&[1, 1 + 1]).unwrap(), i) != Coeff::new(2, 0, 0, 0));
        assert!(op.is_symmetric());
    }

    #[test]
    fn test_sector_index_round_trip() {
        for nu in 0..=2 {
            let basis = SectorBasis::new(nu, -4, 7).unwrap();
            for (i, c) in basis.configs().iter().enumerate() {
                assert_eq!(basis.index(c), Some(i));
            }
        }
        assert!(SectorBasis::new(3, 0, 5).is_err());
    }

    #[test]
    fn test_constant_sequence_no_potential() {
        let seq = SpeciesSequence::constant(2, 1).unwrap();
        for n in -10..10 {
            assert!(staggered_potential(&seq, n).is_zero());
        }
    }

    #[test]
    fn test_eq19_potential_flips_phase() {
        let seq = eq19();
        let pot = |n: i64| staggered_potential(&seq, n).jv;
        for n in (-12..-1).chain(0..12) {
            assert_ne!(pot(n), pot(n + 1), "n={n}");
            assert!([0, -4].contains(&pot(n)));
        }
        // Phase slip between the two staggered regions.
        assert_eq!(pot(-1), pot(0));
    }

    /// Sum of `sz_l sz_{l+1}` over each gap of a spin state, directly from the spins.
    fn spin_side_bonds(seq: &SpeciesSequence, c: &PseudoConfig, lo: i64, hi: i64) -> Vec<i64> {
        let w = map_pseudo_to_spins(seq, c, lo, hi).unwrap();
        let ups: Vec<i64> = (lo..=hi).filter(|&s| w.spin(s)).collect();
        let sz = |s: i64| if w.spin(s) { 1 } else { -1 };
        ups.windows(2).map(|p| (p[0]..p[1]).map(|l| sz(l) * sz(l + 1)).sum()).collect()
    }

    #[test]
    fn test_staggered_potential_matches_spin_side() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..6 {
            let pattern: Vec<u32> = (0..8).map(|_| rng.random_range(0..2)).collect();
            let seq = SpeciesSequence::from_pattern(2, &pattern, 0, 0).unwrap();
            let vac = spin_side_bonds(&seq, &PseudoConfig::vacuum(), -40, 40);
            for n in -8..8 {
                let bonds = spin_side_bonds(&seq, &PseudoConfig::new(vec![n]).unwrap(), -40, 40);
                // Gaps align from the left edge; the last complete gaps may differ by the cut.
                let m = bonds.len().min(vac.len()) - 1;
                let d: i64 = (0..m).map(|i| bonds[i] - vac[i]).sum();
                assert_eq!(d, fragment_diagonal(&seq, &[n], true).unwrap().jv);
                assert_eq!(d - staggered_potential(&seq, n).jv, 2);
            }
        }
    }

    #[test]
    fn test_nonsymmetric_reduces_to_symmetric_at_zero_v() {
        let p = ModelParams::new(1.0, 0.5, -1.0, 0.0);
        let basis = SectorBasis::new(2, -5, 5).unwrap();
        let a = build_pseudo_symmetric(&p, &basis).unwrap();
        let b = build_pseudo_nonsymmetric(&p, &eq19(), &basis).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert!(b.matrix.asymmetry() == 0.0);
        assert!(b.dump().starts_with("# nu=2"));
    }

    #[test]
    fn test_params_validation() {
        assert!(ModelParams::new(1.0, 0.5, -1.0, 0.2).validate().is_ok());
        assert!(ModelParams::new(0.0, 0.5, -1.0, 0.2).validate().is_err());
        assert!(ModelParams { y: 3, ..ModelParams::new(1.0, 0.5, -1.0, 0.2) }.validate().is_err());
        assert!(SpinChain::new(4, Boundary::Open).is_err());
    }
}
