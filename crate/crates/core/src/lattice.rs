//! Species sequences, pseudospin configurations, spin windows and the
//! duality map between spin states and (sequence, pseudospin) pairs.
//!
//! A particle is a spin up at site `l`. Its species is `(-l) mod y` and its
//! macroposition is `ceil(l / y)`, so that `l = y l' - b`. Particles carry a
//! relative position `j` (an integer label that never changes under the
//! dynamics). Impurities are pseudospins up: impurity `k` (1-based) at
//! pseudoposition `n_k` sits in the gap right after particle `n_k + 1 - k`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `ceil(a / y)` for positive `y`.
pub fn ceil_div(a: i64, y: i64) -> i64 {
    -((-a).div_euclid(y))
}

/// Species of a particle sitting at `site`.
pub fn species_of_site(site: i64, y: i64) -> u32 {
    (-site).rem_euclid(y) as u32
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// Extension rule for a species sequence outside its stored window.
/// A periodic rule is indexed by the relative position modulo its period.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Background {
    Constant(u32),
    Periodic(Vec<u32>),
}

impl Background {
    pub fn species(&self, j: i64) -> u32 {
        match self {
            Background::Constant(b) => *b,
            Background::Periodic(p) => p[j.rem_euclid(p.len() as i64) as usize],
        }
    }

    pub fn period(&self) -> usize {
        match self {
            Background::Constant(_) => 1,
            Background::Periodic(p) => p.len(),
        }
    }

    /// Minimal-period form; a period-one pattern becomes a constant.
    pub fn canonical(self) -> Background {
        match self {
            Background::Periodic(p) => {
                let n = p.len();
                let d = (1..=n)
                    .find(|&d| n % d == 0 && (0..n).all(|i| p[i] == p[i % d]))
                    .unwrap_or(n);
                if d == 1 {
                    Background::Constant(p[0])
                } else {
                    Background::Periodic(p[..d].to_vec())
                }
            }
            c => c,
        }
    }

    fn validate(&self, y: u32) -> Result<()> {
        match self {
            Background::Constant(b) if *b >= y => {
                Err(Error::Invalid(format!("background species {b} outside [0, {y})")))
            }
            Background::Periodic(p) if p.is_empty() => {
                Err(Error::Invalid("empty periodic background".into()))
            }
            Background::Periodic(p) => match p.iter().find(|&&b| b >= y) {
                Some(b) => Err(Error::Invalid(format!(
                    "background species {b} outside [0, {y})"
                ))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Background::Constant(b) => write!(f, "const:{b}"),
            Background::Periodic(p) => write!(f, "periodic:{}", join(p)),
        }
    }
}

impl FromStr for Background {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(v) = s.strip_prefix("const:") {
            Ok(Background::Constant(parse_num(v)?))
        } else if let Some(v) = s.strip_prefix("periodic:") {
            Ok(Background::Periodic(parse_list(v)?))
        } else {
            Err(Error::Parse(format!("unknown background rule `{s}`")))
        }
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number `{}`", s.trim())))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_num).collect()
}

fn parse_fields(s: &str) -> Result<Vec<(String, String)>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{}`", t.trim())))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Conserved sequence of particle species indexed by relative position.
#[derive(Clone, Debug)]
pub struct SpeciesSequence {
    y: u32,
    lo: i64,
    species: Vec<u32>,
    left: Background,
    right: Background,
}

impl SpeciesSequence {
    /// Stored values on `lo..lo+species.len()`; `left` and `right` extend them.
    pub fn new(
        y: u32,
        lo: i64,
        species: Vec<u32>,
        left: Background,
        right: Background,
    ) -> Result<Self> {
        if y < 2 {
            return Err(Error::Invalid(format!("jump length y = {y} must be >= 2")));
        }
        if species.is_empty() {
            return Err(Error::Invalid("empty species window".into()));
        }
        let hi = lo + species.len() as i64 - 1;
        if lo > 0 || hi < 0 {
            return Err(Error::Invalid(format!(
                "window {lo}..{hi} must contain relative position 0"
            )));
        }
        if let Some(b) = species.iter().find(|&&b| b >= y) {
            return Err(Error::Invalid(format!("species {b} outside [0, {y})")));
        }
        left.validate(y)?;
        right.validate(y)?;
        if left.species(lo) != species[0] {
            return Err(Error::Invalid(format!(
                "left background disagrees with stored species at {lo}"
            )));
        }
        if right.species(hi) != species[species.len() - 1] {
            return Err(Error::Invalid(format!(
                "right background disagrees with stored species at {hi}"
            )));
        }
        Ok(Self {
            y,
            lo,
            species,
            left: left.canonical(),
            right: right.canonical(),
        })
    }

    /// Every particle has species `b`.
    pub fn constant(y: u32, b: u32) -> Result<Self> {
        Self::new(y, 0, vec![b], Background::Constant(b), Background::Constant(b))
    }

    /// Tiles `pattern` with independent phases on both sides of the origin:
    /// `b_j = pattern[(j + left_shift) mod p]` for `j <= 0` and
    /// `b_j = pattern[(j + right_shift) mod p]` for `j >= 1`.
    pub fn from_pattern(y: u32, pattern: &[u32], left_shift: i64, right_shift: i64) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Invalid("empty pattern".into()));
        }
        let p = pattern.len() as i64;
        let at = |j: i64, s: i64| pattern[(j + s).rem_euclid(p) as usize];
        let left = Background::Periodic((0..p).map(|j| at(j, left_shift)).collect());
        let right = Background::Periodic((0..p).map(|j| at(j, right_shift)).collect());
        let species = (-p..=p)
            .map(|j| if j <= 0 { at(j, left_shift) } else { at(j, right_shift) })
            .collect();
        Self::new(y, -p, species, left, right)
    }

    pub fn y(&self) -> u32 {
        self.y
    }

    /// Inclusive stored window.
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.species.len() as i64 - 1)
    }

    pub fn left(&self) -> &Background {
        &self.left
    }

    pub fn right(&self) -> &Background {
        &self.right
    }

    pub fn species(&self, j: i64) -> u32 {
        let (lo, hi) = self.window();
        if j < lo {
            self.left.species(j)
        } else if j > hi {
            self.right.species(j)
        } else {
            self.species[(j - lo) as usize]
        }
    }

    /// Same sequence with selected stored values replaced.
    pub fn with_overrides(&self, overrides: &[(i64, u32)]) -> Result<Self> {
        let (mut lo, mut hi) = self.window();
        for &(j, _) in overrides {
            lo = lo.min(j - 1);
            hi = hi.max(j + 1);
        }
        let mut species: Vec<u32> = (lo..=hi).map(|j| self.species(j)).collect();
        for &(j, b) in overrides {
            species[(j - lo) as usize] = b;
        }
        Self::new(self.y, lo, species, self.left.clone(), self.right.clone())
    }

    /// Same sequence stored over a larger window.
    pub fn extend_window(&self, lo: i64, hi: i64) -> Result<Self> {
        let (a, b) = self.window();
        let (lo, hi) = (lo.min(a), hi.max(b));
        let species = (lo..=hi).map(|j| self.species(j)).collect();
        Self::new(self.y, lo, species, self.left.clone(), self.right.clone())
    }

    /// `b_{j-1} <= b_0`: the labeling convention of [`map_spins_to_pseudo`]
    /// reproduces this sequence's relative positions.
    pub fn is_canonical(&self) -> bool {
        self.species(-1) <= self.species(0)
    }

    /// `theta(b_j < b_{j-1})`.
    pub fn descent(&self, j: i64) -> bool {
        self.species(j) < self.species(j - 1)
    }

    /// Deformation `delta(j)`; `j + delta(j)` is the vacuum macroposition.
    pub fn delta(&self, j: i64) -> i64 {
        if j >= 0 {
            -((1..=j).filter(|&m| self.descent(m)).count() as i64)
        } else {
            (j + 1..=0).filter(|&m| self.descent(m)).count() as i64
        }
    }

    /// `j + delta(j)`.
    pub fn vacuum_macro(&self, j: i64) -> i64 {
        j + self.delta(j)
    }

    /// Species read over `lo..=hi`.
    pub fn slice(&self, lo: i64, hi: i64) -> Vec<u32> {
        (lo..=hi).map(|j| self.species(j)).collect()
    }
}

impl PartialEq for SpeciesSequence {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.window();
        let (c, d) = other.window();
        self.y == other.y
            && self.left == other.left
            && self.right == other.right
            && (a.min(c)..=b.max(d)).all(|j| self.species(j) == other.species(j))
    }
}

impl Eq for SpeciesSequence {}

impl fmt::Display for SpeciesSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.window();
        write!(f, "y={}; window={lo}..{hi}; species={}; ", self.y, join(&self.species))?;
        if self.left == self.right {
            write!(f, "bg={}", self.left)
        } else {
            write!(f, "bg_left={}; bg_right={}", self.left, self.right)
        }
    }
}

impl FromStr for SpeciesSequence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (mut y, mut window, mut species) = (None, None, None);
        let (mut left, mut right) = (None, None);
        for (k, v) in parse_fields(s)? {
            match k.as_str() {
                "y" => y = Some(parse_num(&v)?),
                "window" => {
                    let (a, b) = v
                        .split_once("..")
                        .ok_or_else(|| Error::Parse(format!("bad window `{v}`")))?;
                    window = Some((parse_num::<i64>(a)?, parse_num::<i64>(b)?));
                }
                "species" => species = Some(parse_list(&v)?),
                "bg" => {
                    let b: Background = v.parse()?;
                    left = Some(b.clone());
                    right = Some(b);
                }
                "bg_left" => left = Some(v.parse()?),
                "bg_right" => right = Some(v.parse()?),
                _ => return Err(Error::Parse(format!("unknown key `{k}`"))),
            }
        }
        let missing = |name: &str| Error::Parse(format!("missing `{name}`"));
        let (lo, hi) = window.ok_or_else(|| missing("window"))?;
        let species: Vec<u32> = species.ok_or_else(|| missing("species"))?;
        if hi - lo + 1 != species.len() as i64 {
            return Err(Error::Parse("window length does not match species list".into()));
        }
        Self::new(
            y.ok_or_else(|| missing("y"))?,
            lo,
            species,
            left.ok_or_else(|| missing("bg"))?,
            right.ok_or_else(|| missing("bg"))?,
        )
    }
}

/// Vacuum macropositions `j + delta(j)` cached over a range of relative positions.
#[derive(Clone, Debug)]
pub struct MacropositionTable<'a> {
    seq: &'a SpeciesSequence,
    lo: i64,
    vac: Vec<i64>,
}

impl<'a> MacropositionTable<'a> {
    pub fn new(seq: &'a SpeciesSequence, lo: i64, hi: i64) -> Self {
        let mut vac = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        let mut v = seq.vacuum_macro(lo);
        for j in lo..=hi {
            if j > lo {
                v += 1 - seq.descent(j) as i64;
            }
            vac.push(v);
        }
        Self { seq, lo, vac }
    }

    pub fn sequence(&self) -> &'a SpeciesSequence {
        self.seq
    }

    pub fn vacuum_macro(&self, j: i64) -> i64 {
        let i = j - self.lo;
        if i >= 0 && (i as usize) < self.vac.len() {
            self.vac[i as usize]
        } else {
            self.seq.vacuum_macro(j)
        }
    }

    pub fn delta(&self, j: i64) -> i64 {
        self.vacuum_macro(j) - j
    }
}

/// Smallest relative position whose vacuum macroposition reaches `ceil(site / y)`.
pub fn effective_pseudoposition(seq: &SpeciesSequence, site: i64) -> i64 {
    let target = ceil_div(site, seq.y() as i64);
    let mut j = target;
    let mut v = seq.vacuum_macro(j);
    while v < target {
        j += 1;
        v += 1 - seq.descent(j) as i64;
    }
    loop {
        let prev = v - (1 - seq.descent(j) as i64);
        if prev < target {
            return j;
        }
        j -= 1;
        v = prev;
    }
}

/// Magnetisation of the jammed vacuum of `seq` at `site`.
pub fn jammed_magnetisation(seq: &SpeciesSequence, site: i64) -> i8 {
    let y = seq.y() as i64;
    let target = ceil_div(site, y);
    let b = species_of_site(site, y);
    let mut j = effective_pseudoposition(seq, site);
    let mut v = seq.vacuum_macro(j);
    while v == target {
        if seq.species(j) == b {
            return 1;
        }
        j += 1;
        v += 1 - seq.descent(j) as i64;
    }
    -1
}

/// Strictly increasing impurity pseudopositions of one sector basis state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PseudoConfig {
    positions: Vec<i64>,
}

impl PseudoConfig {
    pub fn new(positions: Vec<i64>) -> Result<Self> {
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!(
                "pseudopositions {positions:?} are not strictly increasing"
            )));
        }
        Ok(Self { positions })
    }

    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn nu(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// Relative position of the particle after which impurity `i` (0-based) sits.
    pub fn gap_of(&self, i: usize) -> i64 {
        self.positions[i] - i as i64
    }

    /// Number of impurities in gaps strictly left of particle `j`.
    pub fn impurities_before(&self, j: i64) -> i64 {
        (0..self.nu()).filter(|&i| self.gap_of(i) < j).count() as i64
    }

    /// Pseudoposition occupied by the pseudospin down of particle `j`.
    pub fn particle_pseudoposition(&self, j: i64) -> i64 {
        j - 1 + self.impurities_before(j)
    }

    /// Whether pseudoposition `n` holds a pseudospin up.
    pub fn is_up(&self, n: i64) -> bool {
        self.positions.binary_search(&n).is_ok()
    }
}

impl fmt::Display for PseudoConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nu={}; positions={}", self.nu(), join(&self.positions))
    }
}

impl FromStr for PseudoConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (mut nu, mut pos) = (None, None);
        for (k, v) in parse_fields(s)? {
            match k.as_str() {
                "nu" => nu = Some(parse_num::<usize>(&v)?),
                "positions" => pos = Some(parse_list::<i64>(&v)?),
                _ => return Err(Error::Parse(format!("unknown key `{k}`"))),
            }
        }
        let pos = pos.unwrap_or_default();
        if let Some(nu) = nu {
            if nu != pos.len() {
                return Err(Error::Parse(format!(
                    "nu={nu} but {} positions given",
                    pos.len()
                )));
            }
        }
        Self::new(pos)
    }
}

/// Macroposition `j + delta(j) + #{k : n_k + 1 - k < j}` of particle `j`.
pub fn macroposition(seq: &SpeciesSequence, c: &PseudoConfig, j: i64) -> i64 {
    seq.vacuum_macro(j) + c.impurities_before(j)
}

/// Site of particle `j`.
pub fn particle_site(seq: &SpeciesSequence, c: &PseudoConfig, j: i64) -> i64 {
    seq.y() as i64 * macroposition(seq, c, j) - seq.species(j) as i64
}

/// Relative position of the particle sitting at `site`, if there is one.
pub fn particle_label_at(seq: &SpeciesSequence, c: &PseudoConfig, site: i64) -> Option<i64> {
    let mut j = ceil_div(site, seq.y() as i64) - c.nu() as i64;
    while particle_site(seq, c, j) > site {
        j -= 1;
    }
    while particle_site(seq, c, j) < site {
        j += 1;
    }
    (particle_site(seq, c, j) == site).then_some(j)
}

/// Finite window of spins embedded in periodic jammed padding.
/// Pads are indexed by absolute site modulo their period.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinWindow {
    y: u32,
    anchor: i64,
    spins: Vec<bool>,
    left_pad: Vec<bool>,
    right_pad: Vec<bool>,
}

fn minimal_period(p: Vec<bool>) -> Vec<bool> {
    let n = p.len();
    let d = (1..=n)
        .find(|&d| n % d == 0 && (0..n).all(|i| p[i] == p[i % d]))
        .unwrap_or(n);
    p[..d].to_vec()
}

fn check_pad(pad: &[bool], y: u32, near: i64, left: bool) -> Result<()> {
    let p = pad.len() as i64;
    let ups: Vec<i64> = (0..p).filter(|&i| pad[i as usize]).collect();
    let side = if left { "left" } else { "right" };
    if ups.is_empty() {
        return Err(Error::MalformedWindow {
            site: near,
            reason: format!("{side} padding has no spin up"),
        });
    }
    for (i, &u) in ups.iter().enumerate() {
        let next = if i + 1 < ups.len() { ups[i + 1] } else { ups[0] + p };
        if next - u > y as i64 {
            let r = u.rem_euclid(p);
            let site = if left {
                near - 1 - (near - 1 - r).rem_euclid(p)
            } else {
                near + 1 + (r - near - 1).rem_euclid(p)
            };
            return Err(Error::MalformedWindow {
                site,
                reason: format!(
                    "{side} padding is not jammed: next spin up is {} sites away (> y = {y})",
                    next - u
                ),
            });
        }
    }
    Ok(())
}

impl SpinWindow {
    pub fn new(
        y: u32,
        anchor: i64,
        spins: Vec<bool>,
        left_pad: Vec<bool>,
        right_pad: Vec<bool>,
    ) -> Result<Self> {
        if y < 2 {
            return Err(Error::Invalid(format!("jump length y = {y} must be >= 2")));
        }
        if spins.is_empty() {
            return Err(Error::Invalid("empty spin window".into()));
        }
        if left_pad.is_empty() || right_pad.is_empty() {
            return Err(Error::Invalid("empty padding pattern".into()));
        }
        let hi = anchor + spins.len() as i64 - 1;
        check_pad(&left_pad, y, anchor, true)?;
        check_pad(&right_pad, y, hi, false)?;
        Ok(Self {
            y,
            anchor,
            spins,
            left_pad: minimal_period(left_pad),
            right_pad: minimal_period(right_pad),
        })
    }

    pub fn y(&self) -> u32 {
        self.y
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    /// Last stored site.
    pub fn hi(&self) -> i64 {
        self.anchor + self.spins.len() as i64 - 1
    }

    pub fn spins(&self) -> &[bool] {
        &self.spins
    }

    pub fn left_pad(&self) -> &[bool] {
        &self.left_pad
    }

    pub fn right_pad(&self) -> &[bool] {
        &self.right_pad
    }

    /// Spin at any site, padding included.
    pub fn spin(&self, site: i64) -> bool {
        if site < self.anchor {
            self.left_pad[site.rem_euclid(self.left_pad.len() as i64) as usize]
        } else if site > self.hi() {
            self.right_pad[site.rem_euclid(self.right_pad.len() as i64) as usize]
        } else {
            self.spins[(site - self.anchor) as usize]
        }
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '1' | 'u' => Ok(true),
            '0' | 'd' => Ok(false),
            _ => Err(Error::Parse(format!("bad spin character `{c}`"))),
        })
        .collect()
}

impl fmt::Display for SpinWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "y={}; anchor={}; spins={}; left={}; right={}",
            self.y,
            self.anchor,
            bits(&self.spins),
            bits(&self.left_pad),
            bits(&self.right_pad)
        )
    }
}

impl FromStr for SpinWindow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (mut y, mut anchor, mut spins, mut left, mut right) = (None, None, None, None, None);
        for (k, v) in parse_fields(s)? {
            match k.as_str() {
                "y" => y = Some(parse_num(&v)?),
                "anchor" => anchor = Some(parse_num(&v)?),
                "spins" => spins = Some(parse_bits(&v)?),
                "left" => left = Some(parse_bits(&v)?),
                "right" => right = Some(parse_bits(&v)?),
                _ => return Err(Error::Parse(format!("unknown key `{k}`"))),
            }
        }
        let missing = |name: &str| Error::Parse(format!("missing `{name}`"));
        Self::new(
            y.ok_or_else(|| missing("y"))?,
            anchor.ok_or_else(|| missing("anchor"))?,
            spins.ok_or_else(|| missing("spins"))?,
            left.ok_or_else(|| missing("left"))?,
            right.ok_or_else(|| missing("right"))?,
        )
    }
}

/// Species pattern (indexed by relative position modulo its length) of the
/// particles `js` with species `bs`, period `q`.
fn background_from(js: &[i64], bs: &[u32], q: i64) -> Result<Background> {
    let mut pat: Vec<Option<u32>> = vec![None; q as usize];
    for (&j, &b) in js.iter().zip(bs) {
        let slot = &mut pat[j.rem_euclid(q) as usize];
        match slot {
            Some(prev) if *prev != b => {
                return Err(Error::Invalid(format!(
                    "padding species are not periodic at relative position {j}"
                )))
            }
            _ => *slot = Some(b),
        }
    }
    let pat: Option<Vec<u32>> = pat.into_iter().collect();
    pat.map(|p| Background::Periodic(p).canonical())
        .ok_or_else(|| Error::Invalid("padding too short to fix its species pattern".into()))
}

/// Duality map from spins to a species sequence and impurity pseudopositions.
///
/// Relative position 0 is the leftmost particle whose macroposition equals
/// the number of impurities on its left.
pub fn map_spins_to_pseudo(w: &SpinWindow) -> Result<(SpeciesSequence, PseudoConfig)> {
    let y = w.y as i64;
    let ql = lcm(w.left_pad.len() as i64, y);
    let qr = lcm(w.right_pad.len() as i64, y);
    let (mut ml, mut mr) = (3 * ql + 2 * y, 3 * qr + 2 * y);
    loop {
        let lo = w.anchor - ml;
        let hi = w.hi() + mr;
        let sites: Vec<i64> = (lo..=hi).filter(|&s| w.spin(s)).collect();
        let mut gaps = Vec::with_capacity(sites.len());
        let mut before = Vec::with_capacity(sites.len());
        let mut v = Vec::with_capacity(sites.len());
        let mut c = 0i64;
        for (i, &s) in sites.iter().enumerate() {
            before.push(c);
            v.push(ceil_div(s, y) - c);
            let m = if i + 1 < sites.len() { (sites[i + 1] - s - 1) / y } else { 0 };
            gaps.push(m);
            c += m;
        }
        if v[0] >= 0 {
            ml *= 2;
            continue;
        }
        if *v.last().unwrap() <= 0 {
            mr *= 2;
            continue;
        }
        let i0 = v.iter().position(|&x| x == 0).expect("steps are 0 or 1") as i64;
        let rel = |i: usize| i as i64 - i0;
        let species: Vec<u32> = sites.iter().map(|&s| species_of_site(s, y)).collect();

        let left_idx: Vec<usize> = (0..sites.len()).filter(|&i| sites[i] < w.anchor).collect();
        let right_idx: Vec<usize> = (0..sites.len()).filter(|&i| sites[i] > w.hi()).collect();
        let ups = |pad: &[bool]| pad.iter().filter(|&&b| b).count() as i64;
        let q_left = ups(&w.left_pad) * (ql / w.left_pad.len() as i64);
        let q_right = ups(&w.right_pad) * (qr / w.right_pad.len() as i64);
        if (left_idx.len() as i64) < 2 * q_left {
            ml *= 2;
            continue;
        }
        if (right_idx.len() as i64) < 2 * q_right {
            mr *= 2;
            continue;
        }
        let pick = |idx: &[usize]| -> (Vec<i64>, Vec<u32>) {
            (idx.iter().map(|&i| rel(i)).collect(), idx.iter().map(|&i| species[i]).collect())
        };
        let (lj, lb) = pick(&left_idx);
        let (rj, rb) = pick(&right_idx);
        let left = background_from(&lj, &lb, q_left)?;
        let right = background_from(&rj, &rb, q_right)?;

        let jl = rel(*left_idx.last().unwrap()).min(0);
        let jr = rel(right_idx[0]).max(0);
        let stored = (jl..=jr).map(|j| species[(j + i0) as usize]).collect();
        let seq = SpeciesSequence::new(w.y, jl, stored, left, right)?;

        let mut positions = Vec::new();
        for i in 0..sites.len() {
            let p = rel(i) - 1 + before[i];
            positions.extend((1..=gaps[i]).map(|d| p + d));
        }
        return Ok((seq, PseudoConfig::new(positions)?));
    }
}

/// Inverse duality map: the spins of `(seq, c)` on `lo..=hi`, with padding
/// derived from the backgrounds of `seq`.
pub fn map_pseudo_to_spins(
    seq: &SpeciesSequence,
    c: &PseudoConfig,
    lo: i64,
    hi: i64,
) -> Result<SpinWindow> {
    if hi < lo {
        return Err(Error::Invalid(format!("empty site range {lo}..={hi}")));
    }
    let y = seq.y() as i64;
    let (wlo, whi) = seq.window();
    let gaps: Vec<i64> = (0..c.nu()).map(|i| c.gap_of(i)).collect();
    // Relative positions at and beyond which everything is pure background.
    let ja = wlo.min(gaps.iter().copied().min().unwrap_or(0)).min(0) - 1;
    let jb = whi.max(gaps.iter().map(|g| g + 1).max().unwrap_or(0)).max(0) + 1;
    let ql = seq.left().period() as i64;
    let qr = seq.right().period() as i64;

    let site = |j: i64, v: i64| y * (v + c.impurities_before(j)) - seq.species(j) as i64;
    // Walk left from 0.
    let mut left = Vec::new();
    let (mut j, mut v) = (0i64, 0i64);
    loop {
        left.push((j, site(j, v)));
        if j <= ja - ql && site(j, v) < lo {
            break;
        }
        v -= 1 - seq.descent(j) as i64;
        j -= 1;
    }
    let mut right = Vec::new();
    let (mut j, mut v) = (0i64, 0i64);
    loop {
        if j > 0 {
            right.push((j, site(j, v)));
        }
        if j >= jb + qr && site(j, v) > hi {
            break;
        }
        j += 1;
        v += 1 - seq.descent(j) as i64;
    }
    left.reverse();
    let particles: Vec<(i64, i64)> = left.into_iter().chain(right).collect();
    let site_of = |j: i64| particles[(j - particles[0].0) as usize].1;

    let pad = |from: i64, q: i64| -> Result<(Vec<bool>, i64)> {
        let a = (site_of(from + q) - site_of(from)) / y;
        if a < 1 {
            return Err(Error::Invalid("background does not advance".into()));
        }
        let p = y * a;
        let mut pat = vec![false; p as usize];
        for j in from..from + q {
            pat[site_of(j).rem_euclid(p) as usize] = true;
        }
        Ok((pat, p))
    };
    let (lpad, _) = pad(ja - ql + 1, ql)?;
    let (rpad, _) = pad(jb, qr)?;

    let occupied: std::collections::HashSet<i64> = particles.iter().map(|p| p.1).collect();
    let spins: Vec<bool> = (lo..=hi).map(|s| occupied.contains(&s)).collect();
    let w = SpinWindow::new(seq.y(), lo, spins, lpad, rpad)?;

    let check_from = site_of(ja - ql + 1).min(lo);
    let check_to = site_of(jb + qr).max(hi);
    for s in (check_from..lo).chain(hi + 1..=check_to) {
        if w.spin(s) != occupied.contains(&s) {
            return Err(Error::RangeTooSmall {
                lo,
                hi,
                reason: format!("site {s} deviates from the jammed padding"),
            });
        }
    }
    Ok(w)
}

/// Spin-down counts of every gap between consecutive particles whose left
/// particle lies in `jl..=jr`, as `(j, n_down)` pairs.
pub fn gap_lengths(seq: &SpeciesSequence, c: &PseudoConfig, jl: i64, jr: i64) -> Vec<(i64, i64)> {
    (jl..=jr)
        .map(|j| (j, particle_site(seq, c, j + 1) - particle_site(seq, c, j) - 1))
        .collect()
}
