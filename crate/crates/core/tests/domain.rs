use std::collections::BTreeSet;

use epforge::domain::{scan_domain, CellClass, DomainError, DomainGrid, ScanSpec};

fn key(p: [f64; 2]) -> (i64, i64) {
    ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64)
}

/// Midpoints of all lattice edges whose end samples differ in physicality.
fn sign_change_midpoints(grid: &DomainGrid) -> BTreeSet<(i64, i64)> {
    let (na, nb) = grid.spec.resolution;
    let mut out = BTreeSet::new();
    for j in 0..nb {
        for i in 0..na {
            if i + 1 < na && grid.is_physical(i, j) != grid.is_physical(i + 1, j) {
                out.insert(key([0.5 * (grid.a(i) + grid.a(i + 1)), grid.b(j)]));
            }
            if j + 1 < nb && grid.is_physical(i, j) != grid.is_physical(i, j + 1) {
                out.insert(key([grid.a(i), 0.5 * (grid.b(j) + grid.b(j + 1))]));
            }
        }
    }
    out
}

#[test]
fn boundary_vertices_are_exactly_the_sign_changes() {
    for n in [4, 5, 6] {
        let grid = scan_domain(&ScanSpec::square(n, 96)).unwrap();
        let vertices: BTreeSet<(i64, i64)> = grid.boundary.iter().flatten().map(|p| key(*p)).collect();
        assert_eq!(vertices, sign_change_midpoints(&grid), "n={n}");
        for line in &grid.boundary {
            for w in line.windows(2) {
                let (ha, hb) = grid.cell_size();
                let d = ((w[0][0] - w[1][0]).abs(), (w[0][1] - w[1][1]).abs());
                assert!(d.0 <= ha + 1e-12 && d.1 <= hb + 1e-12 && d.0 + d.1 > 0.0);
            }
        }
    }
}

#[test]
fn domain_is_symmetric_under_joint_reflection() {
    for n in [4, 5, 6] {
        let res = 128;
        let grid = scan_domain(&ScanSpec::square(n, res)).unwrap();
        for j in 0..res {
            for i in 0..res {
                assert_eq!(
                    grid.is_physical(i, j),
                    grid.is_physical(res - 1 - i, res - 1 - j),
                    "n={n} ({i},{j})"
                );
            }
        }
        assert_eq!(grid.unknown_count, 0);
    }
}

#[test]
fn area_is_stable_under_refinement() {
    for n in [4, 5, 6] {
        let coarse = scan_domain(&ScanSpec::square(n, 128)).unwrap().physical_area();
        let fine = scan_domain(&ScanSpec::square(n, 256)).unwrap().physical_area();
        assert!(((fine - coarse) / fine).abs() < 0.02, "n={n}: {coarse} vs {fine}");
    }
}

#[test]
fn classification_is_stable_under_tighter_tolerances() {
    let base = ScanSpec::square(5, 96);
    let mut tight = base.clone();
    tight.tol_imag = Some(1e-10);
    tight.tol_gap = 1e-9;
    let a = scan_domain(&base).unwrap();
    let b = scan_domain(&tight).unwrap();
    let res = 96;
    let near_boundary = |i: usize, j: usize| {
        let lo_i = i.saturating_sub(2);
        let lo_j = j.saturating_sub(2);
        let p = a.is_physical(i, j);
        (lo_j..=(j + 2).min(res - 1)).any(|jj| (lo_i..=(i + 2).min(res - 1)).any(|ii| a.is_physical(ii, jj) != p))
    };
    let mut counted = 0;
    let mut changed = 0;
    for j in 0..res {
        for i in 0..res {
            if near_boundary(i, j) {
                continue;
            }
            counted += 1;
            if a.cells[j][i] != b.cells[j][i] {
                changed += 1;
            }
        }
    }
    assert!((changed as f64) < 0.01 * counted as f64, "{changed} of {counted}");
}

#[test]
fn domains_contain_the_origin_and_are_star_shaped() {
    for n in [4, 5] {
        let grid = scan_domain(&ScanSpec::square(n, 128)).unwrap();
        let (i, j) = grid.locate(0.0, 0.0).unwrap();
        assert!(grid.is_physical(i, j));
        assert!(grid.star_fraction() >= 0.95, "n={n}");
    }
    let upper_left = |a: f64, b: f64| a < 0.0 && b > 0.0;
    let four = scan_domain(&ScanSpec::square(4, 128)).unwrap().physical_area_where(upper_left);
    let five = scan_domain(&ScanSpec::square(5, 128)).unwrap().physical_area_where(upper_left);
    assert!(five > four);
}

#[test]
fn exports_cover_every_cell() {
    let grid = scan_domain(&ScanSpec::square(4, 16)).unwrap();
    assert_eq!(grid.to_csv().lines().count(), 1 + 16 * 16);
    let gp = grid.to_gnuplot();
    assert_eq!(gp.lines().count(), 17);
    assert!(gp.lines().all(|l| l.split_whitespace().count() == 17));
    assert_eq!(grid.physical_count(), grid.to_csv().lines().filter(|l| l.ends_with(",1")).count());
    assert!(grid.cells.iter().flatten().all(|c| *c != CellClass::Unknown));
}

#[test]
fn invalid_scans_are_rejected() {
    assert!(matches!(scan_domain(&ScanSpec::square(4, 4)), Err(DomainError::Resolution(4))));
    assert!(matches!(scan_domain(&ScanSpec::square(3, 32)), Err(DomainError::Dimension(3))));
    let mut s = ScanSpec::square(4, 32);
    s.a_range = (1.0, -1.0);
    assert!(matches!(scan_domain(&s), Err(DomainError::Range(..))));
}
