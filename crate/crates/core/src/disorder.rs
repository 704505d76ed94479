//! Patterned and partially disordered species sequences, and localization
//! diagnostics for one impurity in the non-symmetric model.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{cumulative, truncation_interval, CumulativeProfile};
use crate::error::{Error, Result};
use crate::hamiltonians::{build_pseudo_nonsymmetric, ModelParams, SectorBasis};
use crate::lattice::SpeciesSequence;
use crate::linalg::symmetric_eigen;

/// Inverse participation ratio above which an eigenvector counts as localized.
pub const IPR_THRESHOLD: f64 = 0.1;

/// Recipe for a species sequence: a tiled pattern with independent phases
/// left and right of relative position 0, optionally overwritten on an
/// inclusive window by independent uniform draws.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceSpec {
    pub pattern: Vec<u32>,
    pub left_shift: i64,
    pub right_shift: i64,
    pub disorder_window: Option<(i64, i64)>,
    pub seed: u64,
}

impl Default for SequenceSpec {
    /// `..., (1,0,0,1), (1,0,0,1_0), (0,0,1,1), (0,0,1,1), ...`
    fn default() -> Self {
        Self { pattern: vec![1, 0, 0, 1], left_shift: 3, right_shift: 0, disorder_window: None, seed: 0 }
    }
}

impl SequenceSpec {
    pub fn with_window(mut self, lo: i64, hi: i64, seed: u64) -> Self {
        self.disorder_window = Some((lo, hi));
        self.seed = seed;
        self
    }
}

/// Builds the sequence; a window with `hi < lo` is empty.
pub fn make_sequence(spec: &SequenceSpec, y: u32) -> Result<SpeciesSequence> {
    let base = SpeciesSequence::from_pattern(y, &spec.pattern, spec.left_shift, spec.right_shift)?;
    let Some((lo, hi)) = spec.disorder_window else {
        return Ok(base);
    };
    if hi < lo {
        return Ok(base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draws: Vec<(i64, u32)> = (lo..=hi).map(|j| (j, rng.random_range(0..y))).collect();
    base.with_overrides(&draws)
}

/// Dense eigensystem of the one-impurity non-symmetric Hamiltonian on
/// pseudopositions `lo..=hi`, with the spectral weights of `|n0>`.
#[derive(Clone, Debug)]
pub struct ImpuritySpectrum {
    pub lo: i64,
    pub n0: i64,
    pub energies: Vec<f64>,
    /// Column `a` is the eigenvector of `energies[a]`, indexed by `n - lo`.
    pub vectors: DMatrix<f64>,
    /// `|<a|n0>|^2`.
    pub overlaps: Vec<f64>,
    /// `sum_n |<n|a>|^4`.
    pub ipr: Vec<f64>,
}

impl ImpuritySpectrum {
    pub fn new(p: &ModelParams, seq: &SpeciesSequence, n0: i64, lo: i64, hi: i64) -> Result<Self> {
        if !(lo..=hi).contains(&n0) {
            return Err(Error::Invalid(format!("initial position {n0} outside {lo}..={hi}")));
        }
        let basis = SectorBasis::new(1, lo, hi)?;
        let h = build_pseudo_nonsymmetric(p, seq, &basis)?;
        let spec = symmetric_eigen(h.matrix.to_dense());
        let row = (n0 - lo) as usize;
        let overlaps = (0..spec.values.len()).map(|a| spec.vectors[(row, a)].powi(2)).collect();
        let ipr = spec.vectors.column_iter().map(|c| c.iter().map(|x| x.powi(4)).sum()).collect();
        Ok(Self { lo, n0, energies: spec.values, vectors: spec.vectors, overlaps, ipr })
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.energies.len() as i64 - 1
    }

    /// Summed overlap with eigenvectors whose IPR reaches [`IPR_THRESHOLD`].
    pub fn localized_weight(&self) -> f64 {
        self.overlaps.iter().zip(&self.ipr).filter(|(_, &r)| r >= IPR_THRESHOLD).map(|(c, _)| c).sum::<f64>() + 0.0
    }

    pub fn localized_count(&self) -> usize {
        self.ipr.iter().filter(|&&r| r >= IPR_THRESHOLD).count()
    }

    /// `p_{n,t}` on `lo..=hi` for the impurity started at `n0`.
    pub fn probabilities(&self, t: f64) -> Vec<f64> {
        let n = self.energies.len();
        let row = (self.n0 - self.lo) as usize;
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        for a in 0..n {
            let c = self.vectors[(row, a)];
            let (s, co) = (self.energies[a] * t).sin_cos();
            let col = self.vectors.column(a);
            for (m, &u) in col.iter().enumerate() {
                re[m] += c * co * u;
                im[m] -= c * s * u;
            }
        }
        re.iter().zip(&im).map(|(a, b)| a * a + b * b).collect()
    }

    /// Infinite-time average of `p_{n,t}` for a nondegenerate spectrum.
    pub fn time_averaged(&self) -> Vec<f64> {
        let n = self.energies.len();
        let mut out = vec![0.0; n];
        for a in 0..n {
            for (m, &u) in self.vectors.column(a).iter().enumerate() {
                out[m] += self.overlaps[a] * u * u;
            }
        }
        out
    }
}

/// Time traces of a one-impurity localization run.
#[derive(Clone, Debug)]
pub struct LocalizationReport {
    pub times: Vec<f64>,
    /// Weight strictly beyond the barrier.
    pub transmitted: Vec<f64>,
    /// Weight within `radius` of the initial position.
    pub pinned: Vec<f64>,
    pub cumulative: CumulativeProfile,
    pub localized_weight: f64,
    pub localized_count: usize,
    pub spectrum: ImpuritySpectrum,
}

/// Evolves `|n0>` on a lattice wide enough for `max(times)` and reports
/// transmitted and pinned weights. The barrier must lie inside the lattice
/// and to the right of `n0`.
pub fn localization_diagnostics(
    p: &ModelParams,
    seq: &SpeciesSequence,
    n0: i64,
    barrier: (i64, i64),
    radius: i64,
    times: &[f64],
) -> Result<LocalizationReport> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = truncation_interval(&[n0], p.j, t_max);
    if barrier.0 > barrier.1 || barrier.0 <= n0 || barrier.1 >= hi || barrier.0 < lo {
        return Err(Error::Invalid(format!(
            "barrier {}..={} must lie inside {}..{} to the right of {n0}",
            barrier.0, barrier.1, lo, hi
        )));
    }
    let spectrum = ImpuritySpectrum::new(p, seq, n0, lo, hi)?;
    let marginals: Vec<Vec<f64>> = times.iter().map(|&t| spectrum.probabilities(t)).collect();
    let sum_where = |pr: &[f64], keep: &dyn Fn(i64) -> bool| -> f64 {
        pr.iter().enumerate().filter(|(i, _)| keep(lo + *i as i64)).map(|(_, v)| v).sum()
    };
    let transmitted = marginals.iter().map(|pr| sum_where(pr, &|n| n > barrier.1)).collect();
    let pinned = marginals.iter().map(|pr| sum_where(pr, &|n| (n - n0).abs() <= radius)).collect();
    Ok(LocalizationReport {
        times: times.to_vec(),
        transmitted,
        pinned,
        cumulative: cumulative(1, times, lo, &marginals),
        localized_weight: spectrum.localized_weight(),
        localized_count: spectrum.localized_count(),
        spectrum,
    })
}

/// Least-squares line through `(x, y)`; returns `(intercept, slope)`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Step of the time-averaged cumulative distribution at `n0`, on a lattice
/// of half-width `half_width`: straight lines are fitted to `F` on
/// `[n0 + fit_gap, hi - fit_gap]` and `[lo + fit_gap, n0 - fit_gap]`, and
/// the difference of their values at `n0` is returned.
pub fn time_averaged_step(
    p: &ModelParams,
    seq: &SpeciesSequence,
    n0: i64,
    half_width: i64,
    fit_gap: i64,
) -> Result<f64> {
    if 4 * fit_gap >= half_width {
        return Err(Error::Invalid(format!("fit gap {fit_gap} too wide for half-width {half_width}")));
    }
    let (lo, hi) = (n0 - half_width, n0 + half_width);
    let spec = ImpuritySpectrum::new(p, seq, n0, lo, hi)?;
    let mut acc = 0.0;
    let f: Vec<f64> = spec
        .time_averaged()
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    let side = |a: i64, b: i64| {
        let xs: Vec<f64> = (a..=b).map(|x| (x - n0) as f64).collect();
        let ys: Vec<f64> = (a..=b).map(|x| f[(x - lo) as usize]).collect();
        fit_line(&xs, &ys).0
    };
    Ok(side(n0 + fit_gap, hi - fit_gap) - side(lo + fit_gap, n0 - fit_gap))
}

/// Discontinuity of the long-time cumulative distribution at `n0`:
/// [`time_averaged_step`] at half-widths `w` and `2w`, combined by
/// Richardson extrapolation of its `1/w^2` finite-size error.
#[derive(Clone, Debug, PartialEq)]
pub struct Discontinuity {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    /// Localized-eigenstate overlap weight on the fine lattice.
    pub localized_weight: f64,
}

pub fn discontinuity(p: &ModelParams, seq: &SpeciesSequence, n0: i64, half_width: i64, fit_gap: i64) -> Result<Discontinuity> {
    let coarse = time_averaged_step(p, seq, n0, half_width, fit_gap)?;
    let fine = time_averaged_step(p, seq, n0, 2 * half_width, fit_gap)?;
    let spec = ImpuritySpectrum::new(p, seq, n0, n0 - 2 * half_width, n0 + 2 * half_width)?;
    Ok(Discontinuity {
        coarse,
        fine,
        extrapolated: (4.0 * fine - coarse) / 3.0,
        localized_weight: spec.localized_weight(),
    })
}
