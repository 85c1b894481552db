//! Scans of the `(A, B)` plane: which points give a real, non-degenerate
//! spectrum, and where the boundary of that region runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eplocate::EPCandidate;
use crate::lattice::HamiltonianSpec;
use crate::spectra::{eigen_solve, EigenOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("resolution must be at least 16 per axis, got {0}")]
    Resolution(usize),
    #[error("empty or non-finite axis range [{0}, {1}]")]
    Range(f64, f64),
    #[error("N = {0} is too small for a two-parameter scan (need N >= 4)")]
    Dimension(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellClass {
    Physical,
    NonPhysical,
    /// The eigenvalue solver failed here.
    Unknown,
}

impl CellClass {
    pub fn flag(self) -> i8 {
        match self {
            CellClass::Physical => 1,
            CellClass::NonPhysical => 0,
            CellClass::Unknown => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub n: usize,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub resolution: (usize, usize),
    pub cross_tol: f64,
    pub tol_imag: Option<f64>,
    pub tol_gap: f64,
}

impl ScanSpec {
    /// Square scan of `[-2, 2]^2` with default spectral tolerances.
    pub fn square(n: usize, resolution: usize) -> Self {
        let d = EigenOptions::default();
        ScanSpec {
            n,
            a_range: (-2.0, 2.0),
            b_range: (-2.0, 2.0),
            resolution: (resolution, resolution),
            cross_tol: d.cross_tol,
            tol_imag: d.tol_imag,
            tol_gap: d.tol_gap,
        }
    }

    fn validate(&self) -> Result<(), DomainError> {
        if self.n < 4 {
            return Err(DomainError::Dimension(self.n));
        }
        for r in [self.resolution.0, self.resolution.1] {
            if r < 16 {
                return Err(DomainError::Resolution(r));
            }
        }
        for (lo, hi) in [self.a_range, self.b_range] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(DomainError::Range(lo, hi));
            }
        }
        Ok(())
    }
}

/// Classified grid. Samples sit at cell centres; `cells[j][i]` belongs to
/// `(a(i), b(j))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainGrid {
    pub spec: ScanSpec,
    pub cells: Vec<Vec<CellClass>>,
    /// Boundary polylines in `(A, B)` coordinates.
    pub boundary: Vec<Vec<[f64; 2]>>,
    pub unknown_count: usize,
}

fn axis(range: (f64, f64), n: usize, i: usize) -> f64 {
    range.0 + (i as f64 + 0.5) * (range.1 - range.0) / n as f64
}

impl DomainGrid {
    pub fn a(&self, i: usize) -> f64 {
        axis(self.spec.a_range, self.spec.resolution.0, i)
    }

    pub fn b(&self, j: usize) -> f64 {
        axis(self.spec.b_range, self.spec.resolution.1, j)
    }

    pub fn cell_size(&self) -> (f64, f64) {
        let (na, nb) = self.spec.resolution;
        (
            (self.spec.a_range.1 - self.spec.a_range.0) / na as f64,
            (self.spec.b_range.1 - self.spec.b_range.0) / nb as f64,
        )
    }

    /// Cell containing `(a, b)`, if inside the range.
    pub fn locate(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        let (ha, hb) = self.cell_size();
        let fi = (a - self.spec.a_range.0) / ha;
        let fj = (b - self.spec.b_range.0) / hb;
        let (na, nb) = self.spec.resolution;
        if fi < 0.0 || fj < 0.0 || fi >= na as f64 || fj >= nb as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    pub fn is_physical(&self, i: usize, j: usize) -> bool {
        self.cells[j][i] == CellClass::Physical
    }

    pub fn physical_count(&self) -> usize {
        self.cells
            .iter()
            .flatten()
            .filter(|c| **c == CellClass::Physical)
            .count()
    }

    /// Physical area of the cells whose centres satisfy `region`.
    pub fn physical_area_where(&self, region: impl Fn(f64, f64) -> bool) -> f64 {
        let (ha, hb) = self.cell_size();
        let mut count = 0usize;
        for (j, row) in self.cells.iter().enumerate() {
            for (i, c) in row.iter().enumerate() {
                if *c == CellClass::Physical && region(self.a(i), self.b(j)) {
                    count += 1;
                }
            }
        }
        count as f64 * ha * hb
    }

    pub fn physical_area(&self) -> f64 {
        self.physical_area_where(|_, _| true)
    }

    /// Fraction of physical cells whose straight segment to the origin stays
    /// in physical cells (1 for a star-shaped region about the origin).
    pub fn star_fraction(&self) -> f64 {
        let (ha, hb) = self.cell_size();
        let steps_for = |a: f64, b: f64| ((a / ha).abs().max((b / hb).abs()) * 2.0).ceil() as usize + 1;
        let mut total = 0usize;
        let mut visible = 0usize;
        for (j, row) in self.cells.iter().enumerate() {
            for (i, c) in row.iter().enumerate() {
                if *c != CellClass::Physical {
                    continue;
                }
                total += 1;
                let (a, b) = (self.a(i), self.b(j));
                let steps = steps_for(a, b);
                let ok = (0..=steps).all(|s| {
                    let t = s as f64 / steps as f64;
                    match self.locate(t * a, t * b) {
                        Some((ii, jj)) => self.is_physical(ii, jj),
                        None => false,
                    }
                });
                if ok {
                    visible += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            visible as f64 / total as f64
        }
    }

    /// CSV with columns `A,B,flag` (1 physical, 0 non-physical, -1 unknown).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("A,B,flag\n");
        for (j, row) in self.cells.iter().enumerate() {
            for (i, c) in row.iter().enumerate() {
                s.push_str(&format!("{:.10},{:.10},{}\n", self.a(i), self.b(j), c.flag()));
            }
        }
        s
    }

    /// Gnuplot `nonuniform matrix` text: first row holds the A axis, each
    /// following row starts with its B value.
    pub fn to_gnuplot(&self) -> String {
        let (na, _) = self.spec.resolution;
        let mut s = format!("{}", na);
        for i in 0..na {
            s.push_str(&format!(" {:.10}", self.a(i)));
        }
        s.push('\n');
        for (j, row) in self.cells.iter().enumerate() {
            s.push_str(&format!("{:.10}", self.b(j)));
            for c in row {
                s.push_str(&format!(" {}", c.flag()));
            }
            s.push('\n');
        }
        s
    }

    pub fn boundary_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.boundary).expect("polylines serialise")
    }

    /// Distance from `(a, b)` to the nearest boundary segment.
    pub fn distance_to_boundary(&self, a: f64, b: f64) -> Option<f64> {
        self.boundary
            .iter()
            .flat_map(|line| line.windows(2))
            .map(|w| segment_distance([a, b], w[0], w[1]))
            .min_by(|x, y| x.partial_cmp(y).unwrap())
    }
}

fn segment_distance(p: [f64; 2], u: [f64; 2], v: [f64; 2]) -> f64 {
    let d = [v[0] - u[0], v[1] - u[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - u[0]) * d[0] + (p[1] - u[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    let q = [u[0] + t * d[0], u[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn classify(spec: &ScanSpec, a: f64, b: f64) -> CellClass {
    let Ok(h) = HamiltonianSpec::new(spec.n, vec![a, b]) else {
        return CellClass::Unknown;
    };
    let opts = EigenOptions {
        cross_tol: spec.cross_tol,
        tol_imag: spec.tol_imag,
        tol_gap: spec.tol_gap,
        ep_hint: None,
    };
    match eigen_solve(&h, &opts) {
        Ok(r) if r.is_physical => CellClass::Physical,
        Ok(_) => CellClass::NonPhysical,
        Err(_) => CellClass::Unknown,
    }
}

/// Edge of the sample lattice, keyed so that shared edges compare equal:
/// `(i, j, false)` joins node (i,j) to (i+1,j); `(i, j, true)` joins (i,j) to (i,j+1).
type EdgeKey = (usize, usize, bool);

/// Marching squares on the boolean classification, segment endpoints at edge
/// midpoints, joined into polylines.
fn marching_squares(grid: &DomainGrid) -> Vec<Vec<[f64; 2]>> {
    let (na, nb) = grid.spec.resolution;
    let inside = |i: usize, j: usize| grid.cells[j][i] == CellClass::Physical;
    let mid = |e: EdgeKey| -> [f64; 2] {
        let (i, j, vertical) = e;
        if vertical {
            [grid.a(i), 0.5 * (grid.b(j) + grid.b(j + 1))]
        } else {
            [0.5 * (grid.a(i) + grid.a(i + 1)), grid.b(j)]
        }
    };
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..nb.saturating_sub(1) {
        for i in 0..na.saturating_sub(1) {
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let bottom = (i, j, false);
            let right = (i + 1, j, true);
            let top = (i, j + 1, false);
            let left = (i, j, true);
            let idx = c.iter().enumerate().fold(0u8, |m, (k, &v)| m | ((v as u8) << k));
            match idx {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    segments.push((left, bottom));
                    segments.push((right, top));
                }
                10 => {
                    segments.push((bottom, right));
                    segments.push((left, top));
                }
                _ => unreachable!(),
            }
        }
    }

    let mut by_edge: std::collections::HashMap<EdgeKey, Vec<usize>> = Default::default();
    for (k, (u, v)) in segments.iter().enumerate() {
        by_edge.entry(*u).or_default().push(k);
        by_edge.entry(*v).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (u, v) = segments[start];
        let mut chain = std::collections::VecDeque::from([u, v]);
        for forward in [true, false] {
            loop {
                let end = if forward { *chain.back().unwrap() } else { *chain.front().unwrap() };
                let next = by_edge[&end].iter().copied().find(|&k| !used[k]);
                let Some(k) = next else { break };
                used[k] = true;
                let (a, b) = segments[k];
                let other = if a == end { b } else { a };
                if forward {
                    chain.push_back(other);
                } else {
                    chain.push_front(other);
                }
            }
        }
        lines.push(chain.into_iter().map(mid).collect());
    }
    lines
}

/// Classifies every grid sample (in parallel) and extracts the boundary.
pub fn scan_domain(spec: &ScanSpec) -> Result<DomainGrid, DomainError> {
    spec.validate()?;
    let (na, nb) = spec.resolution;
    let cells: Vec<Vec<CellClass>> = (0..nb)
        .into_par_iter()
        .map(|j| {
            let b = axis(spec.b_range, nb, j);
            (0..na)
                .map(|i| classify(spec, axis(spec.a_range, na, i), b))
                .collect()
        })
        .collect();
    let unknown_count = cells.iter().flatten().filter(|c| **c == CellClass::Unknown).count();
    let mut grid = DomainGrid {
        spec: spec.clone(),
        cells,
        boundary: Vec::new(),
        unknown_count,
    };
    grid.boundary = marching_squares(&grid);
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum BoundaryStatus {
    Within,
    TooFar,
    OutOfRange,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryEntry {
    pub params: Vec<f64>,
    pub distance: Option<f64>,
    pub status: BoundaryStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    /// Band half-width used for the check.
    pub radius: f64,
    pub entries: Vec<BoundaryEntry>,
}

impl BoundaryReport {
    pub fn all_within(&self) -> bool {
        self.entries.iter().all(|e| e.status != BoundaryStatus::TooFar)
    }
}

/// Distance of each verified two-parameter candidate of the grid's N to the
/// extracted boundary.
pub fn boundary_ep_check(grid: &DomainGrid, candidates: &[EPCandidate], radius: f64) -> BoundaryReport {
    let entries = candidates
        .iter()
        .filter(|c| c.verified && c.n == grid.spec.n && c.params.len() == 2)
        .map(|c| {
            let (a, b) = (c.params[0], c.params[1]);
            if grid.locate(a, b).is_none() {
                return BoundaryEntry {
                    params: c.params.clone(),
                    distance: None,
                    status: BoundaryStatus::OutOfRange,
                };
            }
            let distance = grid.distance_to_boundary(a, b);
            let status = match distance {
                Some(d) if d <= radius => BoundaryStatus::Within,
                _ => BoundaryStatus::TooFar,
            };
            BoundaryEntry {
                params: c.params.clone(),
                distance,
                status,
            }
        })
        .collect();
    BoundaryReport { radius, entries }
}
