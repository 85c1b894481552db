//! Numeric spectra, eigenvectors and degeneracy diagnostics.
//!
//! Eigenvalues are computed twice: by a simultaneous (Aberth) iteration on the
//! determinant evaluated through the tridiagonal recurrence, and by a complex
//! Schur decomposition of the dense matrix. The reported values come from the
//! Schur route; the two must agree.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::eplocate::EPCandidate;
use crate::lattice::{build_hamiltonian, Hamiltonian, HamiltonianSpec, LatticeError};
use crate::secular::secular_value;

/// Largest dimension accepted by [`eigen_solve`].
pub const MAX_EIGEN_N: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("N = {0} exceeds the eigensolver limit")]
    TooLarge(usize),
    #[error("eigenvalue routes disagree: |{a} - {b}| = {diff:e} > {allowed:e}")]
    CrossCheck {
        a: Complex64,
        b: Complex64,
        diff: f64,
        allowed: f64,
    },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("eigenvector residual {0:e} above 1e-8")]
    Residual(f64),
    #[error("requested {m} levels from an N = {n} spectrum")]
    LevelCount { m: usize, n: usize },
    #[error("splitting fit needs at least two perturbation sizes")]
    TooFewSizes,
    #[error("direction has length {got}, expected {expected}")]
    Direction { got: usize, expected: usize },
}

/// Tolerances for [`eigen_solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct EigenOptions {
    /// Relative agreement required between the two eigenvalue routes.
    pub cross_tol: f64,
    /// Absolute imaginary-part threshold; default `1e-9 * (1 + spectral radius)`.
    pub tol_imag: Option<f64>,
    /// Smallest admissible gap between real levels.
    pub tol_gap: f64,
    /// A known exceptional point `(params, order)`: within parameter distance
    /// 1e-3 of it the cross-check is relaxed to `cross_tol^(1/order)`.
    pub ep_hint: Option<(Vec<f64>, usize)>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            cross_tol: 1e-8,
            tol_imag: None,
            tol_gap: 1e-8,
            ep_hint: None,
        }
    }
}

impl EigenOptions {
    pub fn with_tol(tol: f64) -> Self {
        EigenOptions {
            cross_tol: tol,
            ..Default::default()
        }
    }

    pub fn near_ep(mut self, ep: &EPCandidate) -> Self {
        self.ep_hint = Some((ep.params.clone(), ep.order));
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub reality_flags: Vec<bool>,
    /// Smallest distance between two real eigenvalues (infinite if fewer than two).
    pub min_gap: f64,
    pub is_physical: bool,
    /// Largest distance between matched eigenvalues of the two routes.
    pub cross_discrepancy: f64,
}

impl SpectrumReport {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// CSV with columns `re,im,reality_flag`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,reality_flag\n");
        for (z, r) in self.eigenvalues.iter().zip(&self.reality_flags) {
            s.push_str(&format!("{:.15e},{:.15e},{}\n", z.re, z.im, r));
        }
        s
    }
}

fn sort_spectrum(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}

/// Eigenvalues from the complex Schur form of the dense matrix.
pub fn schur_eigenvalues(h: &Hamiltonian) -> Result<Vec<Complex64>, SpectraError> {
    let n = h.dim();
    if n == 1 {
        return Ok(vec![h.diag[0]]);
    }
    let dense = h.to_dense();
    // Retry on H + s*I if the QR iteration stalls (zero-diagonal N = 3 does).
    let mut ev = None;
    for s in [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.25), Complex64::new(-0.75, 0.5)] {
        let shifted = &dense + DMatrix::<Complex64>::identity(n, n) * s;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 100 * n) {
            let (_, t) = schur.unpack();
            ev = Some((0..n).map(|i| t[(i, i)] - s).collect::<Vec<_>>());
            break;
        }
    }
    let mut ev = ev.ok_or(SpectraError::NoConvergence("Schur iteration"))?;
    sort_spectrum(&mut ev);
    Ok(ev)
}

/// `p/p'` of the secular determinant, computed with rescaling so that large
/// N does not overflow.
fn newton_ratio(diag: &[Complex64], z: Complex64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let (mut p_prev, mut p, mut d_prev, mut d) = (zero, Complex64::new(1.0, 0.0), zero, zero);
    for &dk in diag {
        let np = (z - dk) * p - p_prev;
        let nd = p + (z - dk) * d - d_prev;
        p_prev = p;
        p = np;
        d_prev = d;
        d = nd;
        let m = p.norm().max(d.norm());
        if m > 1e150 {
            let s = 1.0 / m;
            p *= s;
            p_prev *= s;
            d *= s;
            d_prev *= s;
        }
    }
    if d.norm() == 0.0 {
        return if p.norm() == 0.0 { zero } else { Complex64::new(f64::INFINITY, 0.0) };
    }
    p / d
}

/// Roots of `det(z - H)` by Aberth iteration on the recurrence-evaluated
/// determinant.
pub fn aberth_eigenvalues(h: &Hamiltonian) -> Result<Vec<Complex64>, SpectraError> {
    let n = h.dim();
    let radius = 2.0 + h.diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..2000 {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let ratio = newton_ratio(&h.diag, z[k]);
            if ratio.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff.norm() > 0.0 {
                        sum += 1.0 / diff;
                    }
                }
            }
            let w = if ratio.re.is_finite() && ratio.im.is_finite() {
                ratio / (1.0 - ratio * sum)
            } else {
                // p' vanished away from a root: nudge.
                Complex64::new(1e-8 * (1.0 + z[k].norm()), 1e-8)
            };
            z[k] -= w;
            if w.norm() <= 4.0 * f64::EPSILON * (1.0 + z[k].norm()) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            sort_spectrum(&mut z);
            return Ok(z);
        }
    }
    // Multiple roots converge only linearly; the cross-check decides whether
    // the iterate is usable.
    sort_spectrum(&mut z);
    Ok(z)
}

/// Size of the near-degenerate cluster around `ev[i]` at the scale implied by
/// `tol`: the largest m with at least m eigenvalues within `tol^(1/m)`.
fn cluster_size(ev: &[Complex64], i: usize, tol: f64, scale: f64) -> usize {
    let mut best = 1;
    for m in 2..=ev.len() {
        let r = tol.powf(1.0 / m as f64) * scale;
        let count = ev.iter().filter(|z| (**z - ev[i]).norm() <= r).count();
        if count >= m {
            best = m;
        }
    }
    best
}

fn greedy_match(reference: &[Complex64], other: &[Complex64]) -> Vec<usize> {
    let mut used = vec![false; other.len()];
    let mut out = vec![0; reference.len()];
    // Match the most isolated pairs first by processing closest pairs globally.
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(reference.len() * other.len());
    for (i, a) in reference.iter().enumerate() {
        for (j, b) in other.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut assigned = vec![false; reference.len()];
    for (_, i, j) in pairs {
        if !assigned[i] && !used[j] {
            assigned[i] = true;
            used[j] = true;
            out[i] = j;
        }
    }
    out
}

fn param_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0);
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

/// Spectrum with reality and degeneracy classification.
pub fn eigen_solve(spec: &HamiltonianSpec, opts: &EigenOptions) -> Result<SpectrumReport, SpectraError> {
    if spec.n > MAX_EIGEN_N {
        return Err(SpectraError::TooLarge(spec.n));
    }
    let h = build_hamiltonian(spec)?;
    let schur = schur_eigenvalues(&h)?;
    let aberth = aberth_eigenvalues(&h)?;
    let radius = schur.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = 1.0 + radius;

    let near_ep_order = opts.ep_hint.as_ref().and_then(|(p, m)| {
        let mut shifted = spec.params.clone();
        if spec.center != 0.0 {
            shifted.push(spec.center);
        }
        (param_distance(&shifted, p) < 1e-3).then_some(*m)
    });

    let matching = greedy_match(&schur, &aberth);
    let mut worst = 0.0f64;
    for (i, &j) in matching.iter().enumerate() {
        let diff = (schur[i] - aberth[j]).norm();
        let mut m = cluster_size(&schur, i, opts.cross_tol, scale);
        if let Some(order) = near_ep_order {
            m = m.max(order);
        }
        let allowed = opts.cross_tol.powf(1.0 / m as f64) * (1.0 + schur[i].norm());
        if diff > allowed {
            return Err(SpectraError::CrossCheck {
                a: schur[i],
                b: aberth[j],
                diff,
                allowed,
            });
        }
        worst = worst.max(diff);
    }

    let tol_imag = opts.tol_imag.unwrap_or(1e-9 * scale);
    let reality_flags: Vec<bool> = schur.iter().map(|z| z.im.abs() <= tol_imag).collect();
    let mut reals: Vec<f64> = schur
        .iter()
        .zip(&reality_flags)
        .filter(|(_, r)| **r)
        .map(|(z, _)| z.re)
        .collect();
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_gap = reals
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let all_real = reality_flags.iter().all(|&r| r);
    Ok(SpectrumReport {
        eigenvalues: schur,
        reality_flags,
        min_gap,
        is_physical: all_real && min_gap > opts.tol_gap,
        cross_discrepancy: worst,
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn residual(h: &Hamiltonian, e: Complex64, v: &[Complex64]) -> f64 {
    norm(&h.apply_shifted(e, v)) / norm(v)
}

/// Solves `(H - z) x = b` by Gaussian elimination with partial pivoting on the
/// band. Returns `None` on an exactly singular pivot.
fn tridiagonal_solve(h: &Hamiltonian, z: Complex64, rhs: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = h.dim();
    let off = Complex64::new(Hamiltonian::OFF, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let a = vec![off; n]; // sub-diagonal, a[i] in row i
    let mut b: Vec<Complex64> = h.diag.iter().map(|x| x - z).collect();
    let mut c = vec![off; n]; // super-diagonal
    let mut e = vec![zero; n]; // second super-diagonal created by pivoting
    let mut r = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if b[i].norm() >= a[i + 1].norm() {
            if b[i].norm() == 0.0 {
                return None;
            }
            let f = a[i + 1] / b[i];
            b[i + 1] -= f * c[i];
            let ri = r[i];
            r[i + 1] -= f * ri;
        } else {
            let f = b[i] / a[i + 1];
            let (bi1, ci, ci1) = (b[i + 1], c[i], c[i + 1]);
            b[i] = a[i + 1];
            c[i] = bi1;
            b[i + 1] = ci - f * bi1;
            if i + 2 < n {
                e[i] = ci1;
                c[i + 1] = -f * ci1;
            }
            r.swap(i, i + 1);
            let ri = r[i];
            r[i + 1] -= f * ri;
        }
    }
    let mut x = vec![zero; n];
    for i in (0..n).rev() {
        let mut s = r[i];
        if i + 1 < n {
            s -= c[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= e[i] * x[i + 2];
        }
        if b[i].norm() == 0.0 {
            return None;
        }
        x[i] = s / b[i];
    }
    Some(x)
}

/// Normalised eigenvector for an (approximate) eigenvalue.
///
/// Uses the forward recursion `psi_{k+1} = (d_k - E) psi_k - psi_{k-1}` with
/// `psi_0 = 0`, `psi_1 = 1`; falls back to inverse iteration when the
/// recursion residual exceeds 1e-8.
pub fn eigenvector(spec: &HamiltonianSpec, eigenvalue: Complex64) -> Result<Vec<Complex64>, SpectraError> {
    let h = build_hamiltonian(spec)?;
    let n = h.dim();
    let mut psi = Vec::with_capacity(n);
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    psi.push(cur);
    for k in 0..n - 1 {
        let next = (h.diag[k] - eigenvalue) * cur - prev;
        prev = cur;
        cur = next;
        psi.push(cur);
    }
    let nrm = norm(&psi);
    if nrm.is_finite() && nrm > 0.0 {
        for z in psi.iter_mut() {
            *z /= nrm;
        }
        if residual(&h, eigenvalue, &psi) <= 1e-8 {
            return Ok(psi);
        }
    }
    // Inverse iteration with a slightly perturbed shift.
    let shift = eigenvalue + Complex64::new(1e-10, 1e-10) * (1.0 + eigenvalue.norm());
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64))
        .collect();
    let mut best = f64::INFINITY;
    let mut best_v = v.clone();
    for _ in 0..8 {
        let Some(x) = tridiagonal_solve(&h, shift, &v) else {
            break;
        };
        let nx = norm(&x);
        if !(nx.is_finite() && nx > 0.0) {
            break;
        }
        v = x.into_iter().map(|z| z / nx).collect();
        let r = residual(&h, eigenvalue, &v);
        if r < best {
            best = r;
            best_v = v.clone();
        }
        if r <= 1e-8 {
            return Ok(v);
        }
    }
    if best <= 1e-8 {
        Ok(best_v)
    } else {
        Err(SpectraError::Residual(best))
    }
}

/// Pairwise overlaps of the `m` eigenvectors whose eigenvalues are closest to 0.
#[derive(Clone, Debug, Serialize)]
pub struct OverlapDiagnostics {
    pub eigenvalues: Vec<Complex64>,
    /// `overlaps[a][b] = |<psi_a|psi_b>| / (|psi_a| |psi_b|)`.
    pub overlaps: Vec<Vec<f64>>,
}

impl OverlapDiagnostics {
    pub fn min_offdiagonal(&self) -> f64 {
        let mut m = f64::INFINITY;
        for (a, row) in self.overlaps.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if a != b {
                    m = m.min(v);
                }
            }
        }
        m
    }

    pub fn max_offdiagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (a, row) in self.overlaps.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if a != b {
                    m = m.max(v);
                }
            }
        }
        m
    }
}

pub fn overlap_matrix(spec: &HamiltonianSpec, m: usize) -> Result<OverlapDiagnostics, SpectraError> {
    if m > spec.n {
        return Err(SpectraError::LevelCount { m, n: spec.n });
    }
    let h = build_hamiltonian(spec)?;
    let mut ev = schur_eigenvalues(&h)?;
    ev.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    ev.truncate(m);
    sort_spectrum(&mut ev);
    let vecs: Vec<Vec<Complex64>> = ev
        .iter()
        .map(|&e| eigenvector(spec, e))
        .collect::<Result<_, _>>()?;
    let overlaps = vecs
        .iter()
        .map(|a| {
            vecs.iter()
                .map(|b| {
                    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                    (dot.norm() / (norm(a) * norm(b))).min(1.0)
                })
                .collect()
        })
        .collect();
    Ok(OverlapDiagnostics {
        eigenvalues: ev,
        overlaps,
    })
}

/// Result of a splitting-exponent fit.
#[derive(Clone, Debug, Serialize)]
pub struct SplittingFit {
    pub exponent: f64,
    pub eps: Vec<f64>,
    pub max_shift: Vec<f64>,
}

/// Fits the exponent of `max |E_n - E_EP| ~ eps^exponent` for the `order`
/// central eigenvalues as the parameters move from `ep` along `direction`.
///
/// `direction` has one entry per parameter, optionally followed by one entry
/// for a real potential on the middle site (odd N only). It is normalised.
pub fn splitting_exponent(
    ep: &EPCandidate,
    direction: &[f64],
    eps_list: &[f64],
) -> Result<SplittingFit, SpectraError> {
    if eps_list.len() < 2 {
        return Err(SpectraError::TooFewSizes);
    }
    let p = ep.params.len();
    if direction.len() != p && direction.len() != p + 1 {
        return Err(SpectraError::Direction {
            got: direction.len(),
            expected: p,
        });
    }
    let dn = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dir: Vec<f64> = direction.iter().map(|x| x / dn).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut shifts = Vec::new();
    for &eps in eps_list {
        let params: Vec<f64> = ep.params.iter().zip(&dir).map(|(a, d)| a + eps * d).collect();
        let mut spec = HamiltonianSpec::new(ep.n, params)?;
        if dir.len() == p + 1 {
            spec = spec.with_center(eps * dir[p])?;
        }
        let opts = EigenOptions::default().near_ep(ep);
        let rep = eigen_solve(&spec, &opts)?;
        let mut ev = rep.eigenvalues;
        ev.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        let shift = ev[..ep.order.min(ev.len())]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        xs.push(eps.ln());
        ys.push(shift.ln());
        shifts.push(shift);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(SplittingFit {
        exponent: sxy / sxx,
        eps: eps_list.to_vec(),
        max_shift: shifts,
    })
}

/// Numeric `det(E - H)` at a point, for cross-checks against the symbolic form.
pub fn secular_at(spec: &HamiltonianSpec, e: Complex64) -> Result<Complex64, SpectraError> {
    let h = build_hamiltonian(spec)?;
    Ok(secular_value(&h.diag, e).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, p: &[f64]) -> HamiltonianSpec {
        HamiltonianSpec::new(n, p.to_vec()).unwrap()
    }

    #[test]
    fn two_by_two_closed_form() {
        let r = eigen_solve(&spec(2, &[0.5]), &EigenOptions::default()).unwrap();
        let e = (1.0f64 - 0.25).sqrt();
        assert!((r.eigenvalues[0].re + e).abs() < 1e-12);
        assert!((r.eigenvalues[1].re - e).abs() < 1e-12);
        assert!(r.is_physical);
    }

    #[test]
    fn complex_pair_beyond_ep2() {
        let r = eigen_solve(&spec(2, &[1.5]), &EigenOptions::default()).unwrap();
        assert!(!r.is_physical);
        assert!(r.reality_flags.iter().all(|f| !f));
    }

    #[test]
    fn band_solver_matches_dense() {
        let s = spec(7, &[0.4, -1.3]);
        let h = build_hamiltonian(&s).unwrap();
        let z = Complex64::new(0.3, -0.2);
        let b: Vec<Complex64> = (0..7).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let x = tridiagonal_solve(&h, z, &b).unwrap();
        let back = h.apply_shifted(z, &x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_diagonal_vector() {
        let v = eigenvector(&spec(2, &[0.0]), Complex64::new(1.0, 0.0)).unwrap();
        assert!((v[0] + v[1]).norm() < 1e-12);
    }

    #[test]
    fn level_count_error() {
        assert!(matches!(
            overlap_matrix(&spec(4, &[0.1]), 5),
            Err(SpectraError::LevelCount { .. })
        ));
    }
}
