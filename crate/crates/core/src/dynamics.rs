//! Time evolution in one- and two-impurity sectors, impurity marginals,
//! cumulative distributions, lightcone magnetisation profiles and the
//! variance of staggered magnetisations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonians::{SectorBasis, SectorOperator};
use crate::lattice::{effective_pseudoposition, jammed_magnetisation, SpeciesSequence};
use crate::linalg::{bessel_j_all, pairwise_sum, symmetric_eigen, Spectrum};
use crate::operators::magnetisation_one_impurity;

/// Sector dimension up to which the propagator diagonalizes densely.
pub const DENSE_LIMIT: usize = 1500;

/// State in a pseudospin sector at a given time (units of `1/J`).
#[derive(Clone, Debug, PartialEq)]
pub struct SectorWaveFunction {
    pub basis: SectorBasis,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl SectorWaveFunction {
    /// Basis state with impurities at `config`.
    pub fn basis_state(basis: &SectorBasis, config: &[i64]) -> Result<Self> {
        let i = basis
            .index(config)
            .ok_or_else(|| Error::Invalid(format!("configuration {config:?} outside the sector")))?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { basis: basis.clone(), amplitudes, time: 0.0 })
    }

    pub fn norm(&self) -> f64 {
        pairwise_sum(&self.probabilities()).sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability that an impurity lies within `margin` sites of a wall.
    pub fn leakage(&self, margin: usize) -> f64 {
        let (lo, hi) = self.basis.interval();
        let m = margin as i64;
        let near = |c: &[i64]| c.first().is_some_and(|&n| n < lo + m) || c.last().is_some_and(|&n| n > hi - m);
        let p: Vec<f64> = self
            .basis
            .configs()
            .iter()
            .zip(&self.amplitudes)
            .filter(|(c, _)| near(c))
            .map(|(_, a)| a.norm_sqr())
            .collect();
        pairwise_sum(&p)
    }
}

/// Propagation scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagator {
    /// Dense spectral decomposition.
    Dense,
    /// Chebyshev expansion with Bessel coefficients.
    Chebyshev,
    /// Dense up to [`DENSE_LIMIT`], Chebyshev above.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub propagator: Propagator,
    /// Wall margin for the leakage check; `None` disables it (physical walls).
    pub leakage_margin: Option<usize>,
    pub leakage_limit: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { propagator: Propagator::Auto, leakage_margin: Some(5), leakage_limit: 1e-6 }
    }
}

/// Interval `support ± (4 |J| t_max 1.5 + 20)` used to truncate the
/// pseudolattice.
pub fn truncation_interval(support: &[i64], j: f64, t_max: f64) -> (i64, i64) {
    let r = (4.0 * j.abs() * t_max * 1.5).ceil() as i64 + 20;
    let lo = support.iter().copied().min().unwrap_or(0);
    let hi = support.iter().copied().max().unwrap_or(0);
    (lo - r, hi + r)
}

/// `exp(-i H dt) psi` by a Chebyshev expansion on the Gershgorin interval.
fn chebyshev_step(h: &SectorOperator, psi: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
    let (emin, emax) = h.matrix.gershgorin();
    let a = (emax - emin) / 2.0 * 1.01 + 1e-12;
    let b = (emax + emin) / 2.0;
    let x = a * dt;
    let kmax = (x.abs() * 1.2) as usize + 60;
    let coef = bessel_j_all(kmax, x);
    let terms = (0..=kmax)
        .rev()
        .find(|&k| coef[k].abs() > 1e-17)
        .map_or(1, |k| k + 2)
        .min(kmax + 1);
    if terms > kmax {
        return Err(Error::Convergence(format!("Chebyshev series did not converge for a dt = {x}")));
    }
    let n = psi.len();
    let scaled = |v: &[Complex64], out: &mut [Complex64]| {
        h.matrix.apply(v, out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = (*o - vi * b) / a;
        }
    };
    let mut t0 = psi.to_vec();
    let mut t1 = vec![Complex64::new(0.0, 0.0); n];
    scaled(&t0, &mut t1);
    let mut out: Vec<Complex64> = t0.iter().map(|v| v * coef[0]).collect();
    let mut phase = Complex64::new(0.0, -1.0);
    for (o, v) in out.iter_mut().zip(&t1) {
        *o += v * (phase * 2.0 * coef[1]);
    }
    let mut t2 = vec![Complex64::new(0.0, 0.0); n];
    for &c in coef.iter().take(terms).skip(2) {
        scaled(&t1, &mut t2);
        for i in 0..n {
            t2[i] = t2[i] * 2.0 - t0[i];
        }
        phase *= Complex64::new(0.0, -1.0);
        let w = phase * 2.0 * c;
        for (o, v) in out.iter_mut().zip(&t2) {
            *o += v * w;
        }
        std::mem::swap(&mut t0, &mut t1);
        std::mem::swap(&mut t1, &mut t2);
    }
    let global = Complex64::from_polar(1.0, -b * dt);
    Ok(out.into_iter().map(|v| v * global).collect())
}

fn dense_apply(spec: &Spectrum, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let n = psi.len();
    let v = &spec.vectors;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let col = v.column(k);
        let mut c = Complex64::new(0.0, 0.0);
        for i in 0..n {
            c += psi[i] * col[i];
        }
        c *= Complex64::from_polar(1.0, -spec.values[k] * t);
        for i in 0..n {
            out[i] += c * col[i];
        }
    }
    out
}

/// `exp(-i H t) psi0` at each of the (non-negative, increasing) `times`.
pub fn evolve(
    h: &SectorOperator,
    psi0: &SectorWaveFunction,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<SectorWaveFunction>> {
    if psi0.basis != h.basis {
        return Err(Error::Invalid("initial state lives in a different sector".into()));
    }
    if times.iter().any(|&t| t < 0.0 || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid("times must be non-negative and increasing".into()));
    }
    let dense = match opts.propagator {
        Propagator::Dense => true,
        Propagator::Chebyshev => false,
        Propagator::Auto => h.basis.len() <= DENSE_LIMIT,
    };
    let spec = dense.then(|| symmetric_eigen(h.matrix.to_dense()));
    let mut out = Vec::with_capacity(times.len());
    let mut current = psi0.amplitudes.clone();
    let mut now = psi0.time;
    for &t in times {
        let amplitudes = if t == psi0.time {
            psi0.amplitudes.clone()
        } else if let Some(spec) = &spec {
            dense_apply(spec, &psi0.amplitudes, t - psi0.time)
        } else {
            current = chebyshev_step(h, &current, t - now)?;
            now = t;
            current.clone()
        };
        let psi = SectorWaveFunction { basis: h.basis.clone(), amplitudes, time: t };
        if let Some(margin) = opts.leakage_margin {
            let prob = psi.leakage(margin);
            if prob >= opts.leakage_limit {
                return Err(Error::Leakage { time: t, prob, margin });
            }
        }
        out.push(psi);
    }
    Ok(out)
}

/// Marginal of impurity `k` (1-based) over the sector interval, indexed
/// from the lower wall.
pub fn impurity_marginals(psi: &SectorWaveFunction, k: usize) -> Result<Vec<f64>> {
    let nu = psi.basis.nu();
    if k == 0 || k > nu {
        return Err(Error::Invalid(format!("impurity index {k} outside 1..={nu}")));
    }
    let (lo, hi) = psi.basis.interval();
    let mut p = vec![0.0; (hi - lo + 1) as usize];
    for (c, a) in psi.basis.configs().iter().zip(&psi.amplitudes) {
        p[(c[k - 1] - lo) as usize] += a.norm_sqr();
    }
    Ok(p)
}

/// Cumulative distributions `F_t^{(k)}(x) = sum_{n <= x} p^{(k)}_{n,t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeProfile {
    pub k: usize,
    pub times: Vec<f64>,
    /// Pseudoposition of the first grid point.
    pub x_lo: i64,
    /// `values[t][x - x_lo]`.
    pub values: Vec<Vec<f64>>,
}

impl CumulativeProfile {
    /// `F` at time index `ti`, extended by 0 on the left and by the total on
    /// the right.
    pub fn at(&self, ti: usize, x: i64) -> f64 {
        let row = &self.values[ti];
        if x < self.x_lo {
            0.0
        } else {
            let i = ((x - self.x_lo) as usize).min(row.len() - 1);
            row[i]
        }
    }

    pub fn x_hi(&self) -> i64 {
        self.x_lo + self.values.first().map_or(0, |r| r.len() as i64) - 1
    }
}

/// Running sums of marginals given on the grid starting at `x_lo`.
pub fn cumulative(k: usize, times: &[f64], x_lo: i64, marginals: &[Vec<f64>]) -> CumulativeProfile {
    let values = marginals
        .iter()
        .map(|p| {
            let mut acc = 0.0;
            p.iter()
                .map(|v| {
                    acc += v;
                    acc
                })
                .collect()
        })
        .collect();
    CumulativeProfile { k, times: times.to_vec(), x_lo, values }
}

/// Cumulative profile of impurity `k` along an evolution.
pub fn cumulative_from_states(psis: &[SectorWaveFunction], k: usize) -> Result<CumulativeProfile> {
    let marginals = psis.iter().map(|p| impurity_marginals(p, k)).collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = psis.iter().map(|p| p.time).collect();
    let x_lo = psis.first().map_or(0, |p| p.basis.interval().0);
    Ok(cumulative(k, &times, x_lo, &marginals))
}

/// Regularized magnetisation at `sites` from the impurity marginals,
/// `sum_k sum_n p^{(k)}_{n+k-1} <n| :s^z_{l - y(k-1)}: |n>`.
pub fn magnetisation_profile(psi: &SectorWaveFunction, seq: &SpeciesSequence, sites: &[i64]) -> Result<Vec<f64>> {
    let y = seq.y() as i64;
    let (lo, _) = psi.basis.interval();
    let marg = (1..=psi.basis.nu())
        .map(|k| impurity_marginals(psi, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(sites
        .iter()
        .map(|&site| {
            let mut terms = Vec::new();
            for (k0, p) in marg.iter().enumerate() {
                let k0 = k0 as i64;
                for (i, &w) in p.iter().enumerate() {
                    if w != 0.0 {
                        let m = lo + i as i64;
                        let v = magnetisation_one_impurity(seq, m - k0, site - y * k0).value;
                        terms.push(w * v as f64);
                    }
                }
            }
            pairwise_sum(&terms)
        })
        .collect())
}

/// Coefficient `<sz_{l - y(k+1)} - sz_{l - y k}>` of `F^{(1+k)}` in the
/// asymptotic magnetisation; always one of -2, 0, 2.
pub fn asymptotic_coefficient(seq: &SpeciesSequence, site: i64, k: usize) -> i64 {
    let y = seq.y() as i64;
    let k = k as i64;
    jammed_magnetisation(seq, site - y * (k + 1)) as i64 - jammed_magnetisation(seq, site - y * k) as i64
}

/// Asymptotic magnetisation `sum_k c_k(l) F^{(1+k)}_t(x_l)` at time index
/// `ti`; `profiles[k]` holds `F^{(1+k)}`.
pub fn magnetisation_asymptotic(
    profiles: &[CumulativeProfile],
    seq: &SpeciesSequence,
    sites: &[i64],
    ti: usize,
) -> Vec<f64> {
    sites
        .iter()
        .map(|&site| {
            let x = effective_pseudoposition(seq, site);
            profiles
                .iter()
                .enumerate()
                .map(|(k, f)| asymptotic_coefficient(seq, site, k) as f64 * f.at(ti, x))
                .sum()
        })
        .collect()
}

/// Variance of `S^z_s = (1/2) sum_l s_l sz_l` from a single-impurity
/// cumulative distribution `f` (on pseudopositions), using
///
/// ```text
/// (1/4) sum_{l1 != l2} [F(min(x1, x2)) - F(x1) F(x2)] s1 s2 c(l1) c(l2),
/// c(l) = <sz_{l-y} - sz_l>_jammed,
/// ```
///
/// over sites `|l| <= window`, scaled by `1 - p`, plus
/// `p / (1 - p) (<S^z_s>_t - <S^z_s>_0)^2` with the shift taken from the
/// asymptotic magnetisation. `weights` defaults to the jammed magnetisation.
pub fn variance_szs(
    f: impl Fn(i64) -> f64,
    seq: &SpeciesSequence,
    weights: Option<&dyn Fn(i64) -> i64>,
    p: f64,
    window: i64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Invalid(format!("superposition probability {p} outside [0, 1)")));
    }
    let y = seq.y() as i64;
    let xs = |l: i64| effective_pseudoposition(seq, l);
    let (flo, fhi) = (f(xs(-window)), f(xs(window)));
    if flo > 1e-10 || fhi < 1.0 - 1e-6 {
        return Err(Error::RangeTooSmall {
            lo: -window,
            hi: window,
            reason: format!("window does not cover the lightcone (F = {flo:e} .. {fhi})"),
        });
    }
    let s = |l: i64| weights.map_or(jammed_magnetisation(seq, l) as i64, |w| w(l));
    // Sites with a nonzero coefficient, with their F value and weight.
    let mut pts: Vec<(i64, f64, f64)> = Vec::new();
    for l in -window..=window {
        let c = jammed_magnetisation(seq, l - y) as i64 - jammed_magnetisation(seq, l) as i64;
        if c != 0 {
            let x = xs(l);
            pts.push((x, f(x), (s(l) * c) as f64));
        }
    }
    let mut rows = Vec::with_capacity(pts.len());
    for (i, &(x1, f1, w1)) in pts.iter().enumerate() {
        let mut row = Vec::with_capacity(pts.len());
        for (j, &(x2, f2, w2)) in pts.iter().enumerate() {
            if i != j {
                let fm = if x1 <= x2 { f1 } else { f2 };
                row.push((fm - f1 * f2) * w1 * w2);
            }
        }
        rows.push(pairwise_sum(&row));
    }
    let fluct = 0.25 * pairwise_sum(&rows);
    let shift: Vec<f64> = pts.iter().map(|&(_, fx, w)| 0.5 * w * fx).collect();
    let shift = pairwise_sum(&shift);
    Ok(p / (1.0 - p) * shift * shift + (1.0 - p) * fluct)
}

/// Exact variance of `S^z_s` from one- and two-point functions:
/// `sz[i]` and `two_point[i][j]` at sites with weights `s[i]`.
pub fn variance_from_correlations(s: &[f64], sz: &[f64], two_point: &[Vec<f64>]) -> f64 {
    let n = s.len();
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let c = if i == j { 1.0 - sz[i] * sz[i] } else { two_point[i][j] - sz[i] * sz[j] };
            terms.push(s[i] * s[j] * c);
        }
    }
    0.25 * pairwise_sum(&terms)
}
