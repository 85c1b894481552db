//! Discrete kinetic matrices, the PT-symmetric tridiagonal Hamiltonians built
//! on them, and the analytic square-well spectrum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("dimension must be at least {min}, got {got}")]
    Dimension { min: usize, got: usize },
    #[error("{got} parameters exceed floor(N/2) = {max} for N = {n}")]
    TooManyParams { n: usize, max: usize, got: usize },
    #[error("a central-site potential needs odd N, got N = {0}")]
    CenterNeedsOddN(usize),
    #[error("non-finite parameter value")]
    NonFinite,
    #[error("level index must be >= 1")]
    LevelIndex,
    #[error("mesh and width must be positive")]
    Geometry,
}

/// Real tridiagonal matrix with constant off-diagonal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealTridiagonal {
    pub diag: Vec<f64>,
    pub off: f64,
}

impl RealTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i.abs_diff(j) == 1 {
                self.off
            } else {
                0.0
            }
        })
    }
}

/// Discrete Laplacian: diagonal 2, off-diagonals -1.
pub fn build_kinetic(n: usize) -> Result<RealTridiagonal, LatticeError> {
    if n < 1 {
        return Err(LatticeError::Dimension { min: 1, got: n });
    }
    Ok(RealTridiagonal {
        diag: vec![2.0; n],
        off: -1.0,
    })
}

/// Exact eigenvalues of the `n`-site Laplacian, `2 - 2 cos(k pi / (n + 1))`.
pub fn kinetic_eigenvalues(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
        .collect()
}

/// Parameters of one member of the Hamiltonian family.
///
/// `params[k]` sits at distance `k` from the ends of the diagonal, as
/// `-i*params[k]` on the left and `+i*params[k]` on the right. `center` is an
/// optional real potential on the middle site of odd chains; it keeps PT
/// symmetry and is used only as a perturbation direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub params: Vec<f64>,
    #[serde(default)]
    pub include_kinetic_shift: bool,
    #[serde(default)]
    pub center: f64,
}

impl HamiltonianSpec {
    pub fn new(n: usize, params: Vec<f64>) -> Result<Self, LatticeError> {
        let spec = HamiltonianSpec {
            n,
            params,
            include_kinetic_shift: false,
            center: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_kinetic_shift(mut self, on: bool) -> Self {
        self.include_kinetic_shift = on;
        self
    }

    pub fn with_center(mut self, v: f64) -> Result<Self, LatticeError> {
        self.center = v;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        if self.n < 2 {
            return Err(LatticeError::Dimension { min: 2, got: self.n });
        }
        let max = self.n / 2;
        if self.params.len() > max {
            return Err(LatticeError::TooManyParams {
                n: self.n,
                max,
                got: self.params.len(),
            });
        }
        if self.center != 0.0 && self.n % 2 == 0 {
            return Err(LatticeError::CenterNeedsOddN(self.n));
        }
        if !self.center.is_finite() || self.params.iter().any(|p| !p.is_finite()) {
            return Err(LatticeError::NonFinite);
        }
        Ok(())
    }

    /// The complex diagonal of the Hamiltonian.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let n = self.n;
        let shift = if self.include_kinetic_shift { 2.0 } else { 0.0 };
        let mut d = vec![Complex64::new(shift, 0.0); n];
        for (k, &a) in self.params.iter().enumerate() {
            d[k] += Complex64::new(0.0, -a);
            d[n - 1 - k] += Complex64::new(0.0, a);
        }
        if n % 2 == 1 {
            d[n / 2] += self.center;
        }
        d
    }
}

/// Complex tridiagonal Hamiltonian with off-diagonal entries -1, stored as its
/// three diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    pub diag: Vec<Complex64>,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub const OFF: f64 = -1.0;

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            self.diag[i]
        } else if i.abs_diff(j) == 1 {
            Complex64::new(Self::OFF, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// `(H - z) v`.
    pub fn apply_shifted(&self, z: Complex64, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = (self.diag[i] - z) * v[i];
                if i > 0 {
                    s += Self::OFF * v[i - 1];
                }
                if i + 1 < n {
                    s += Self::OFF * v[i + 1];
                }
                s
            })
            .collect()
    }
}

pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<Hamiltonian, LatticeError> {
    spec.validate()?;
    Ok(Hamiltonian {
        diag: spec.diagonal(),
    })
}

/// JSON export shape for matrices.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixExport {
    pub dimension: usize,
    pub diag_re: Vec<f64>,
    pub diag_im: Vec<f64>,
    pub offdiag: f64,
}

impl From<&Hamiltonian> for MatrixExport {
    fn from(h: &Hamiltonian) -> Self {
        MatrixExport {
            dimension: h.dim(),
            diag_re: h.diag.iter().map(|z| z.re).collect(),
            diag_im: h.diag.iter().map(|z| z.im).collect(),
            offdiag: Hamiltonian::OFF,
        }
    }
}

/// Lattice geometry: mesh `lambda` and well width `width`, in units with
/// hbar = 1 and mass 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareWellSpec {
    pub lambda: f64,
    pub width: f64,
}

impl SquareWellSpec {
    /// Width `n * lambda`.
    pub fn from_sites(n: usize, lambda: f64) -> Self {
        SquareWellSpec {
            lambda,
            width: n as f64 * lambda,
        }
    }
}

/// `(sin(pi n lambda / L) / lambda)^2`.
pub fn square_well_energy(n: usize, spec: &SquareWellSpec) -> Result<f64, LatticeError> {
    if n < 1 {
        return Err(LatticeError::LevelIndex);
    }
    if !(spec.lambda > 0.0 && spec.width > 0.0) {
        return Err(LatticeError::Geometry);
    }
    let s = (std::f64::consts::PI * n as f64 * spec.lambda / spec.width).sin() / spec.lambda;
    Ok(s * s)
}

/// Highest level index treated as reliable on an `n`-site lattice.
pub fn reliable_level_cutoff(n: usize) -> usize {
    n / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinetic_three_sites() {
        let t = build_kinetic(3).unwrap().to_dense();
        let expect = DMatrix::from_row_slice(3, 3, &[2., -1., 0., -1., 2., -1., 0., -1., 2.]);
        assert_eq!(t, expect);
        assert_eq!(build_kinetic(1).unwrap().to_dense(), DMatrix::from_element(1, 1, 2.0));
        assert!(build_kinetic(0).is_err());
    }

    #[test]
    fn kinetic_four_site_spectrum() {
        let t = build_kinetic(4).unwrap().to_dense();
        let mut ev: Vec<f64> = t.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect: Vec<f64> = (1..=4)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn six_site_hamiltonian_pattern() {
        let spec = HamiltonianSpec::new(6, vec![0.3, 0.7]).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let i = Complex64::i();
        let expect = [-0.3 * i, -0.7 * i, 0.0 * i, 0.0 * i, 0.7 * i, 0.3 * i];
        assert_eq!(h.diag, expect);
        let zero = build_hamiltonian(&HamiltonianSpec::new(6, vec![0.0, 0.0]).unwrap()).unwrap();
        assert!(zero.diag.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        let h7 = build_hamiltonian(&HamiltonianSpec::new(7, vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(h7.diag[3], Complex64::new(0.0, 0.0));
        assert_eq!(h7.diag[5], Complex64::new(0.0, 2.0));
        assert_eq!(h7.get(2, 3), Complex64::new(-1.0, 0.0));
        assert_eq!(h7.get(2, 4), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn too_many_params() {
        assert!(matches!(
            HamiltonianSpec::new(5, vec![1.0, 1.0, 1.0]),
            Err(LatticeError::TooManyParams { .. })
        ));
        assert!(HamiltonianSpec::new(6, vec![]).unwrap().with_center(0.1).is_err());
    }

    #[test]
    fn square_well_levels() {
        let lambda = 0.1;
        let n = 10;
        let spec = SquareWellSpec::from_sites(n, lambda);
        let central = square_well_energy(n / 2, &spec).unwrap();
        assert!((central - 1.0 / (lambda * lambda)).abs() < 1e-9);
        // Printed formula vanishes at the top level.
        assert!(square_well_energy(n, &spec).unwrap().abs() < 1e-20);
        // Continuum limit.
        let fine = SquareWellSpec { lambda: 1e-6, width: 1.0 };
        let e = square_well_energy(3, &fine).unwrap();
        let cont = (3.0 * std::f64::consts::PI).powi(2);
        assert!((e - cont).abs() / cont < 1e-9);
        assert!(square_well_energy(0, &spec).is_err());
    }

    #[test]
    fn level_cutoff() {
        assert_eq!(reliable_level_cutoff(9), 4);
        assert_eq!(reliable_level_cutoff(2), 1);
        assert_eq!(reliable_level_cutoff(100), 50);
    }
}
