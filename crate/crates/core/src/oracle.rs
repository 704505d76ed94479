//! Brute-force exact diagonalization on short spin chains embedded in a
//! frozen spin-up frame, and the exact check that the spin Hamiltonian
//! intertwines with its pseudospin projection.

use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::dynamics::{evolve, magnetisation_profile, EvolveOptions, SectorWaveFunction};
use crate::hamiltonians::{
    build_pseudo_nonsymmetric, build_pseudo_symmetric, pseudo_operator_exact, Boundary, Coeff, ModelParams,
    SectorBasis, SpinChain,
};
use crate::lattice::{
    jammed_magnetisation, map_spins_to_pseudo, particle_label_at, PseudoConfig, SpeciesSequence, SpinWindow,
};
use crate::linalg::{symmetric_eigen, SparseOp};

/// Largest Hilbert-space block the oracle diagonalizes.
pub const DIMENSION_CAP: usize = 1 << 16;

/// Sector of a spin state on a frozen-frame chain: impurity number, labels
/// of the frame particles at sites `-1` and `len`, and the species between.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorKey {
    pub nu: usize,
    pub left_wall: i64,
    pub right_wall: i64,
    pub species: Vec<u32>,
}

/// Image of a chain state under the duality map.
#[derive(Clone, Debug)]
pub struct MappedState {
    pub key: SectorKey,
    pub sequence: SpeciesSequence,
    pub config: PseudoConfig,
}

/// Bits of a chain state as spins (`true` = up).
pub fn state_spins(state: u64, len: usize) -> Vec<bool> {
    (0..len).map(|l| state >> l & 1 == 1).collect()
}

pub fn spins_state(spins: &[bool]) -> u64 {
    spins.iter().enumerate().map(|(l, &u)| (u as u64) << l).sum()
}

/// Maps a chain state inside a frozen spin-up frame to its sector.
pub fn map_chain_state(state: u64, len: usize) -> Result<MappedState> {
    let w = SpinWindow::new(2, 0, state_spins(state, len), vec![true], vec![true])?;
    let (sequence, config) = map_spins_to_pseudo(&w)?;
    let wall = |site| {
        particle_label_at(&sequence, &config, site)
            .ok_or_else(|| Error::Invalid(format!("no frame particle at site {site}")))
    };
    let (left_wall, right_wall) = (wall(-1)?, wall(len as i64)?);
    let key = SectorKey {
        nu: config.nu(),
        left_wall,
        right_wall,
        species: sequence.slice(left_wall - 1, right_wall + 1),
    };
    Ok(MappedState { key, sequence, config })
}

/// Pseudospin basis of a sector: impurities confined between the frame
/// particles, i.e. pseudopositions in `[left_wall, right_wall + nu - 2]`.
pub fn sector_basis(key: &SectorKey) -> Result<SectorBasis> {
    if key.nu == 0 {
        SectorBasis::new(0, key.left_wall, key.left_wall)
    } else {
        SectorBasis::new(key.nu, key.left_wall, key.right_wall + key.nu as i64 - 2)
    }
}

/// Outcome of [`intertwiner_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntertwinerReport {
    pub len: usize,
    pub sectors: usize,
    pub states: usize,
    /// Nonzero exact coefficients of `M H - H~ M` after removing one
    /// constant per sector.
    pub exact_mismatches: usize,
    /// Largest absolute residual entry over the supplied parameter draws.
    pub max_deviation: f64,
}

/// Checks `M H = H~ M + c_sector M` on every chain state with at most two
/// impurities, exactly in the coefficients of `J, J Delta, J g, J V`.
pub fn intertwiner_check(len: usize, draws: &[ModelParams], include_hi: bool) -> Result<IntertwinerReport> {
    if len > 14 {
        return Err(Error::Invalid(format!("intertwiner check limited to 14 sites, got {len}")));
    }
    let chain = SpinChain::new(len, Boundary::Frozen)?;
    let mut mapped = HashMap::new();
    let mut groups: BTreeMap<SectorKey, Vec<u64>> = BTreeMap::new();
    for s in 0u64..1 << len {
        let m = map_chain_state(s, len)?;
        if m.key.nu <= 2 {
            groups.entry(m.key.clone()).or_default().push(s);
        }
        mapped.insert(s, m);
    }
    let mut report = IntertwinerReport {
        len,
        sectors: groups.len(),
        states: 0,
        exact_mismatches: 0,
        max_deviation: 0.0,
    };
    let record = |c: Coeff, report: &mut IntertwinerReport| {
        if !c.is_zero() {
            report.exact_mismatches += 1;
            for p in draws {
                report.max_deviation = report.max_deviation.max(c.eval(p).abs());
            }
        }
    };
    for (key, states) in &groups {
        let first = &mapped[&states[0]];
        let basis = sector_basis(key)?;
        let pseudo = pseudo_operator_exact(&basis, &first.sequence, include_hi)?;
        let mut image = vec![false; basis.len()];
        if states.len() != basis.len() {
            report.exact_mismatches += 1;
        }
        let mut constant = None;
        for &s in states {
            report.states += 1;
            let Some(i) = basis.index(mapped[&s].config.positions()) else {
                report.exact_mismatches += 1;
                continue;
            };
            if std::mem::replace(&mut image[i], true) {
                report.exact_mismatches += 1;
            }
            let mut residual: BTreeMap<usize, Coeff> = BTreeMap::new();
            for (t, c) in chain.act(s, include_hi) {
                let m = &mapped[&t];
                match basis.index(m.config.positions()).filter(|_| m.key == *key) {
                    Some(k) => *residual.entry(k).or_default() += c,
                    None => record(c, &mut report),
                }
            }
            for (&k, &c) in &pseudo.rows[i] {
                *residual.entry(k).or_default() += -c;
            }
            let d = residual.remove(&i).unwrap_or_default();
            let offset = *constant.get_or_insert(d);
            record(d - offset, &mut report);
            for c in residual.into_values() {
                record(c, &mut report);
            }
        }
    }
    Ok(report)
}

/// Full-ED time evolution request on a frozen-frame chain.
#[derive(Clone, Debug)]
pub struct EdRun {
    pub len: usize,
    pub params: ModelParams,
    pub include_hi: bool,
    /// Initial product state, `true` = up.
    pub initial: Vec<bool>,
    pub times: Vec<f64>,
    /// Sites of `<sigma^z>`.
    pub sites: Vec<usize>,
    /// Site pairs of `<sigma^z sigma^z>`.
    pub pairs: Vec<(usize, usize)>,
}

/// Result of [`full_ed_evolution`]; `sz[t][k]` belongs to `times[t]` and
/// `sites[k]`.
#[derive(Clone, Debug)]
pub struct EdResult {
    pub dim: usize,
    pub times: Vec<f64>,
    pub sites: Vec<usize>,
    pub sz: Vec<Vec<f64>>,
    pub two_point: Vec<Vec<f64>>,
    /// Largest `|<H>(t) - <H>(0)|`.
    pub energy_drift: f64,
    /// Largest eigenpair residual `|H v - E v|`.
    pub residual: f64,
}

/// States reachable from `start` under the Hamiltonian, in breadth-first order.
pub fn connected_block(chain: &SpinChain, start: u64, include_hi: bool, cap: usize) -> Result<Vec<u64>> {
    let mut seen = HashMap::from([(start, 0usize)]);
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for (t, _) in chain.act(s, include_hi) {
            if !seen.contains_key(&t) {
                if order.len() >= cap {
                    return Err(Error::DimensionCap { dim: order.len() + 1, cap });
                }
                seen.insert(t, order.len());
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    Ok(order)
}

/// Exact evolution of a product state: the dynamically connected block is
/// diagonalized densely and the state propagated in its eigenbasis.
pub fn full_ed_evolution(run: &EdRun) -> Result<EdResult> {
    run.params.validate()?;
    if run.initial.len() != run.len {
        return Err(Error::Invalid("initial state length differs from chain length".into()));
    }
    if run.sites.iter().chain(run.pairs.iter().flat_map(|p| [&p.0, &p.1])).any(|&l| l >= run.len) {
        return Err(Error::Invalid("observable site outside the chain".into()));
    }
    let chain = SpinChain::new(run.len, Boundary::Frozen)?;
    let start = spins_state(&run.initial);
    let block = connected_block(&chain, start, run.include_hi, DIMENSION_CAP)?;
    let index: HashMap<u64, usize> = block.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let h = SparseOp::from_rows(
        block
            .iter()
            .map(|&s| {
                chain
                    .act(s, run.include_hi)
                    .into_iter()
                    .map(|(t, c)| (index[&t], c.eval(&run.params)))
                    .collect()
            })
            .collect(),
    );
    let dense = h.to_dense();
    let spec = symmetric_eigen(dense.clone());
    let mut residual: f64 = 0.0;
    for k in 0..spec.dim() {
        let v = spec.vectors.column(k);
        residual = residual.max((&dense * v - v * spec.values[k]).norm());
    }
    let sz = |s: u64, l: usize| if s >> l & 1 == 1 { 1.0 } else { -1.0 };
    // Initial state is basis vector 0, so its overlaps are the first row.
    let overlaps: Vec<f64> = (0..spec.dim()).map(|k| spec.vectors[(0, k)]).collect();
    let e0: f64 = overlaps.iter().zip(&spec.values).map(|(c, e)| c * c * e).sum();
    let mut out = EdResult {
        dim: block.len(),
        times: run.times.clone(),
        sites: run.sites.clone(),
        sz: Vec::new(),
        two_point: Vec::new(),
        energy_drift: 0.0,
        residual,
    };
    for &t in &run.times {
        let mut re = DVector::zeros(spec.dim());
        let mut im = DVector::zeros(spec.dim());
        for k in 0..spec.dim() {
            let (sn, cs) = (spec.values[k] * t).sin_cos();
            re += spec.vectors.column(k) * (overlaps[k] * cs);
            im -= spec.vectors.column(k) * (overlaps[k] * sn);
        }
        let mut prob: Vec<f64> = (0..block.len()).map(|i| re[i] * re[i] + im[i] * im[i]).collect();
        if t == 0.0 {
            // The product state itself, free of eigenbasis round-off.
            prob.iter_mut().enumerate().for_each(|(i, p)| *p = (i == 0) as u8 as f64);
        }
        let hr = h.apply_real(re.as_slice());
        let hi = h.apply_real(im.as_slice());
        let e: f64 = (0..block.len()).map(|i| re[i] * hr[i] + im[i] * hi[i]).sum();
        out.energy_drift = out.energy_drift.max((e - e0).abs());
        out.sz.push(
            run.sites
                .iter()
                .map(|&l| block.iter().zip(&prob).map(|(&s, p)| p * sz(s, l)).sum())
                .collect(),
        );
        out.two_point.push(
            run.pairs
                .iter()
                .map(|&(a, b)| block.iter().zip(&prob).map(|(&s, p)| p * sz(s, a) * sz(s, b)).sum())
                .collect(),
        );
    }
    Ok(out)
}

/// Comparison of full ED with the pseudospin pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleDiff {
    pub nu: usize,
    pub ed_dim: usize,
    pub sector_dim: usize,
    /// Largest `|<sz_l(t)>_ED - <sz_l(t)>_pseudo|` over times and compared sites.
    pub max_deviation: f64,
}

/// Evolves a product state both by full ED and in its pseudospin sector and
/// compares `<sigma^z>` at the sites `margin..len - margin`.
pub fn oracle_diff(run: &EdRun, margin: usize) -> Result<OracleDiff> {
    let ed = full_ed_evolution(run)?;
    let start = spins_state(&run.initial);
    let m = map_chain_state(start, run.len)?;
    if !(1..=2).contains(&m.key.nu) {
        return Err(Error::Invalid(format!("initial state has {} impurities, need 1 or 2", m.key.nu)));
    }
    let basis = sector_basis(&m.key)?;
    let h = if run.include_hi {
        build_pseudo_nonsymmetric(&run.params, &m.sequence, &basis)?
    } else {
        build_pseudo_symmetric(&run.params, &basis)?
    };
    let psi0 = SectorWaveFunction::basis_state(&basis, m.config.positions())?;
    let opts = EvolveOptions { leakage_margin: None, ..Default::default() };
    let psis = evolve(&h, &psi0, &run.times, &opts)?;
    let mut worst: f64 = 0.0;
    for (ti, psi) in psis.iter().enumerate() {
        for (k, &site) in run.sites.iter().enumerate() {
            if site < margin || site + margin >= run.len {
                continue;
            }
            let s = site as i64;
            let reg = magnetisation_profile(psi, &m.sequence, &[s])?[0];
            let raw = reg + jammed_magnetisation(&m.sequence, s) as f64;
            worst = worst.max((raw - ed.sz[ti][k]).abs());
        }
    }
    Ok(OracleDiff { nu: m.key.nu, ed_dim: ed.dim, sector_dim: basis.len(), max_deviation: worst })
}

/// True when no Hamiltonian term moves the state.
pub fn is_frozen(chain: &SpinChain, state: u64) -> bool {
    chain.act(state, true).len() == 1
}
