//! Two-impurity integrable data of the symmetric model: scattering phase,
//! dispersion, bound states, and the asymptotic cumulative distributions of
//! the impurity positions as functions of `x / t`.
//!
//! Energies and velocities are in units of `J`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{gauss_legendre, pairwise_sum, symmetric_eigen, tridiagonal};

/// Two-impurity scattering phase with `Delta' = Delta + g cos(p1 + p2)`:
/// `S = -(1 - 2 Delta' e^{i p2} + e^{i(p1+p2)}) / (1 - 2 Delta' e^{i p1} + e^{i(p1+p2)})`.
pub fn scattering_phase(p1: f64, p2: f64, delta: f64, g: f64) -> Result<Complex64> {
    let d = delta + g * (p1 + p2).cos();
    let e12 = Complex64::from_polar(1.0, p1 + p2);
    let num = 1.0 - 2.0 * d * Complex64::from_polar(1.0, p2) + e12;
    let den = 1.0 - 2.0 * d * Complex64::from_polar(1.0, p1) + e12;
    if den.norm() < 1e-300 || (den.norm() < 1e-14 && num.norm() < 1e-14) {
        return Err(Error::Convergence(format!("scattering phase singular at ({p1}, {p2})")));
    }
    Ok(-num / den)
}

/// One-impurity dispersion `E(p) = 4 (cos p - Delta)`.
pub fn dispersion(p: f64, delta: f64) -> f64 {
    4.0 * (p.cos() - delta)
}

/// Group velocity `E'(p) = -4 sin p`.
pub fn group_velocity(p: f64) -> f64 {
    -4.0 * p.sin()
}

/// Bound state of total momentum `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Ratio `cos(p/2) / (Delta + g cos p)` of consecutive relative amplitudes.
    pub ratio: f64,
    pub velocity: f64,
}

/// `1 + cos p < 2 (Delta + g cos p)^2`.
pub fn bound_state_exists(p: f64, delta: f64, g: f64) -> bool {
    let d = delta + g * p.cos();
    1.0 + p.cos() < 2.0 * d * d
}

pub fn bound_state_energy(p: f64, delta: f64, g: f64) -> f64 {
    let c = p.cos();
    let h = (p / 2.0).cos();
    4.0 * (h * h + g * g * c * c - delta * delta) / (delta + g * c)
}

/// `dE_2/dp`, analytically.
pub fn bound_state_velocity(p: f64, delta: f64, g: f64) -> f64 {
    let (s, c) = p.sin_cos();
    let h = (p / 2.0).cos();
    let num = h * h + g * g * c * c - delta * delta;
    let dnum = -0.5 * s - 2.0 * g * g * c * s;
    let den = delta + g * c;
    let dden = -g * s;
    4.0 * (dnum * den - num * dden) / (den * den)
}

pub fn bound_state(p: f64, delta: f64, g: f64) -> Option<BoundState> {
    bound_state_exists(p, delta, g).then(|| BoundState {
        energy: bound_state_energy(p, delta, g),
        ratio: (p / 2.0).cos() / (delta + g * p.cos()),
        velocity: bound_state_velocity(p, delta, g),
    })
}

/// Parameters of the asymptotic cumulative distributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticInput {
    pub delta: f64,
    pub g: f64,
    /// Initial pseudodistance `n2 - n1`.
    pub d0: i64,
    /// Momentum grid size per direction.
    pub n_p: usize,
    /// Replace the scattering phase by -1.
    pub trivial_phase: bool,
}

impl AsymptoticInput {
    pub fn new(delta: f64, g: f64, d0: i64, n_p: usize) -> Result<Self> {
        let s = Self { delta, g, d0, n_p, trivial_phase: false };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d0 < 1 {
            return Err(Error::Invalid(format!("initial pseudodistance {} < 1", self.d0)));
        }
        if self.n_p < 64 || self.n_p % 2 != 0 {
            return Err(Error::Invalid(format!("grid size {} must be even and at least 64", self.n_p)));
        }
        Ok(())
    }
}

/// Half-cell-shifted periodic grid on `(-pi, pi)`.
fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + (i as f64 + 0.5) * 2.0 * PI / n as f64).collect()
}

/// Magnon contribution tabulated on the momentum grid: each grid cell
/// carries its velocity `v^{(j)}` and weight
/// `|e^{-i d0 (p1 - p2)} + S|^2 / (8 pi^2) dp^2`, sorted by velocity.
#[derive(Clone, Debug)]
pub struct MagnonTable {
    velocities: Vec<f64>,
    cumulative: Vec<f64>,
    /// Grid cells dropped because the scattering phase was singular there.
    pub singular_cells: usize,
}

impl MagnonTable {
    pub fn new(j: usize, input: &AsymptoticInput) -> Result<Self> {
        input.validate()?;
        if !(1..=2).contains(&j) {
            return Err(Error::Invalid(format!("impurity index {j} outside 1..=2")));
        }
        let p = grid(input.n_p);
        let dp2 = (2.0 * PI / input.n_p as f64).powi(2) / (8.0 * PI * PI);
        let mut cells = Vec::with_capacity(input.n_p * input.n_p);
        let mut singular = 0;
        for &p1 in &p {
            for &p2 in &p {
                let s = if input.trivial_phase {
                    Ok(Complex64::new(-1.0, 0.0))
                } else {
                    scattering_phase(p1, p2, input.delta, input.g)
                };
                let Ok(s) = s else {
                    singular += 1;
                    continue;
                };
                let a = Complex64::from_polar(1.0, -(input.d0 as f64) * (p1 - p2));
                let (v1, v2) = (group_velocity(p1), group_velocity(p2));
                let v = if j == 1 { v1.min(v2) } else { v1.max(v2) };
                cells.push((v, (a + s).norm_sqr() * dp2));
            }
        }
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(cells.len());
        let mut velocities = Vec::with_capacity(cells.len());
        for (v, w) in cells {
            acc += w;
            velocities.push(v);
            cumulative.push(acc);
        }
        Ok(Self { velocities, cumulative, singular_cells: singular })
    }

    /// `F_m^{(j)}(x/t)`: weight of cells with velocity strictly below `v`.
    pub fn eval(&self, v: f64) -> f64 {
        let k = self.velocities.partition_point(|&u| u < v);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Limit `x/t -> +infinity`.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// `F_m^{(j)}(x/t)` for a single point.
pub fn f_magnon(v: f64, j: usize, input: &AsymptoticInput) -> Result<f64> {
    Ok(MagnonTable::new(j, input)?.eval(v))
}

/// `1 + Re int d^2p / (2 pi)^2 e^{i d0 (p1 - p2)} S`, the large-`x/t` limit of
/// the magnon part, with the change under grid halving as error estimate.
pub fn magnon_limit(input: &AsymptoticInput) -> Result<(f64, f64)> {
    input.validate()?;
    let eval = |n: usize| -> Result<f64> {
        let p = grid(n);
        let mut rows = Vec::with_capacity(n);
        for &p1 in &p {
            let mut row = Vec::with_capacity(n);
            for &p2 in &p {
                let s = if input.trivial_phase {
                    Complex64::new(-1.0, 0.0)
                } else {
                    match scattering_phase(p1, p2, input.delta, input.g) {
                        Ok(s) => s,
                        Err(_) => continue,
                    }
                };
                row.push((Complex64::from_polar(1.0, input.d0 as f64 * (p1 - p2)) * s).re);
            }
            rows.push(pairwise_sum(&row));
        }
        Ok(1.0 + pairwise_sum(&rows) / (n * n) as f64)
    };
    let fine = eval(input.n_p)?;
    let coarse = eval(input.n_p / 2)?;
    let err = (fine - coarse).abs();
    if err > 1e-3 {
        return Err(Error::Convergence(format!("magnon limit changed by {err:e} under grid halving")));
    }
    Ok((fine, err))
}

/// Bound-state weight density
/// `max[((Delta + g cos p)/cos(p/2))^2 - 1, 0] (cos^2(p/2)/(Delta + g cos p)^2)^{d0} / (2 pi)`.
pub fn bound_weight(p: f64, delta: f64, g: f64, d0: i64) -> f64 {
    if !bound_state_exists(p, delta, g) {
        return 0.0;
    }
    let d = delta + g * p.cos();
    let x = (p / 2.0).cos().powi(2) / (d * d);
    // (1/x - 1) x^{d0} written to stay finite at cos(p/2) = 0.
    (x.powi(d0 as i32 - 1) - x.powi(d0 as i32)).max(0.0) / (2.0 * PI)
}

/// Momentum intervals in `(-pi, pi)` on which a bound state exists, from the
/// roots of `2 g^2 c^2 + (4 Delta g - 1) c + 2 Delta^2 - 1` in `c = cos p`.
pub fn existence_intervals(delta: f64, g: f64) -> Vec<(f64, f64)> {
    let (a, b, c) = (2.0 * g * g, 4.0 * delta * g - 1.0, 2.0 * delta * delta - 1.0);
    let mut cuts = vec![-PI, 0.0, PI];
    let mut roots = Vec::new();
    if a.abs() > 1e-300 {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            roots.push(q / a);
            if q != 0.0 {
                roots.push(c / q);
            }
        }
    } else if b != 0.0 {
        roots.push(-c / b);
    }
    for r in roots {
        if (-1.0..=1.0).contains(&r) {
            let p = r.acos();
            cuts.push(p);
            cuts.push(-p);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    cuts.windows(2)
        .filter(|w| w[1] - w[0] > 1e-15 && bound_state_exists(0.5 * (w[0] + w[1]), delta, g))
        .map(|w| (w[0], w[1]))
        .collect()
}

/// Sub-intervals of `[a, b]` where `E_2'(p) < v`, located by scanning and
/// bisection.
fn below_velocity(a: f64, b: f64, v: f64, delta: f64, g: f64) -> Vec<(f64, f64)> {
    let f = |p: f64| bound_state_velocity(p, delta, g) - v;
    let n = 2048;
    let h = (b - a) / n as f64;
    let mut cuts = vec![a];
    for i in 0..n {
        let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
        if f(x0).signum() != f(x1).signum() {
            let (mut lo, mut hi) = (x0, x1);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == f(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
    }
    cuts.push(b);
    cuts.windows(2)
        .filter(|w| f(0.5 * (w[0] + w[1])) < 0.0)
        .map(|w| (w[0], w[1]))
        .collect()
}

/// `F_b(x/t)`: Gauss-Legendre quadrature over the parts of the existence
/// region whose bound-state velocity lies below `v`. Pass `f64::INFINITY`
/// for the large-`x/t` limit.
pub fn f_bound(v: f64, input: &AsymptoticInput) -> Result<f64> {
    input.validate()?;
    let (delta, g, d0) = (input.delta, input.g, input.d0);
    let mut parts = Vec::new();
    for (a, b) in existence_intervals(delta, g) {
        let pieces = if v.is_infinite() && v > 0.0 { vec![(a, b)] } else { below_velocity(a, b, v, delta, g) };
        for (lo, hi) in pieces {
            let (x, w) = gauss_legendre(96, lo, hi);
            let vals: Vec<f64> = x.iter().zip(&w).map(|(&p, &wi)| wi * bound_weight(p, delta, g, d0)).collect();
            parts.push(pairwise_sum(&vals));
        }
    }
    Ok(pairwise_sum(&parts) + 0.0)
}

/// Lowest/highest energy of two free magnons with total momentum `k`.
pub fn two_magnon_band(k: f64, delta: f64) -> (f64, f64) {
    let w = 8.0 * (k / 2.0).cos().abs();
    (-8.0 * delta - w, -8.0 * delta + w)
}

/// Spectrum of the two-impurity symmetric model on a ring of `len` sites at
/// total momentum `k = 2 pi m / len`, from the relative-coordinate chain
/// `r = 1..len-1` restricted to states of reflection parity `(-1)^m`.
pub fn ring_block_spectrum(len: usize, m: i64, delta: f64, g: f64) -> Result<Vec<f64>> {
    if len < 4 {
        return Err(Error::Invalid(format!("ring of {len} sites too short")));
    }
    let k = 2.0 * PI * m as f64 / len as f64;
    let n = len - 1;
    let mut diag = vec![-8.0 * delta; n];
    let contact = 4.0 * delta + 4.0 * g * k.cos();
    diag[0] += contact;
    diag[n - 1] += contact;
    let off = vec![4.0 * (k / 2.0).cos(); n - 1];
    let h = tridiagonal(&diag, &off);
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    // Orthonormal basis of the parity subspace, indexed by r - 1.
    let mut cols = Vec::new();
    for i in 0..n {
        let j = n - 1 - i;
        if i < j {
            let mut c = vec![0.0; n];
            c[i] = std::f64::consts::FRAC_1_SQRT_2;
            c[j] = sign * std::f64::consts::FRAC_1_SQRT_2;
            cols.push(c);
        } else if i == j && sign > 0.0 {
            let mut c = vec![0.0; n];
            c[i] = 1.0;
            cols.push(c);
        }
    }
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    let p = nalgebra::DMatrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
    let reduced = p.transpose() * h * &p;
    Ok(symmetric_eigen(reduced).values)
}

/// Ring eigenvalues at momentum `2 pi m / len` outside the two-magnon band.
pub fn out_of_band(len: usize, m: i64, delta: f64, g: f64) -> Result<Vec<f64>> {
    let k = 2.0 * PI * m as f64 / len as f64;
    let (lo, hi) = two_magnon_band(k, delta);
    Ok(ring_block_spectrum(len, m, delta, g)?
        .into_iter()
        .filter(|&e| e < lo - 1e-9 || e > hi + 1e-9)
        .collect())
}
