use num_complex::Complex64;

use super::CMatrix;
use crate::{Error, Result};

const DEFAULT_MAX_DIM: usize = 256;

/// Truncation of the product space. Basis states are ordered
/// electronic ⊗ vibrational ⊗ cavity with the ground state first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertConfig {
    n_vib: usize,
    n_cav: usize,
    rotating_frame: bool,
    max_dim: usize,
}

impl Default for HilbertConfig {
    fn default() -> Self {
        Self {
            n_vib: 6,
            n_cav: 0,
            rotating_frame: true,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl HilbertConfig {
    /// `n_cav = 0` leaves the cavity out.
    pub fn new(n_vib: usize, n_cav: usize) -> Result<Self> {
        Self::default().with_levels(n_vib, n_cav)
    }

    pub fn with_levels(self, n_vib: usize, n_cav: usize) -> Result<Self> {
        if n_vib < 2 {
            return Err(Error::Dimension(format!(
                "n_vib = {n_vib}, need at least 2 levels"
            )));
        }
        if n_cav == 1 {
            return Err(Error::Dimension(
                "n_cav = 1 is a frozen vacuum; use 0 or >= 2".into(),
            ));
        }
        let next = Self {
            n_vib,
            n_cav,
            ..self
        };
        if next.dim() > next.max_dim {
            return Err(Error::Dimension(format!(
                "dimension {} exceeds the limit {}",
                next.dim(),
                next.max_dim
            )));
        }
        Ok(next)
    }

    /// Raises the dimension guard.
    pub fn with_max_dim(self, max_dim: usize) -> Self {
        Self { max_dim, ..self }
    }

    /// `false` works in the frame rotating at the bare electronic transition,
    /// where the probe stays time dependent.
    pub fn with_rotating_frame(self, rotating_frame: bool) -> Self {
        Self {
            rotating_frame,
            ..self
        }
    }

    pub fn n_vib(&self) -> usize {
        self.n_vib
    }

    pub fn n_cav(&self) -> usize {
        self.n_cav
    }

    pub fn has_cavity(&self) -> bool {
        self.n_cav > 0
    }

    pub fn rotating_frame(&self) -> bool {
        self.rotating_frame
    }

    pub fn dim(&self) -> usize {
        2 * self.n_vib * self.n_cav.max(1)
    }

    /// Index of `|electronic, vibron, photon>`.
    pub fn index(&self, excited: bool, vib: usize, cav: usize) -> usize {
        let nc = self.n_cav.max(1);
        (usize::from(excited) * self.n_vib + vib) * nc + cav
    }
}

fn annihilation(levels: usize) -> CMatrix {
    CMatrix::from_fn(levels, levels, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Operators embedded in the full space.
#[derive(Debug, Clone)]
pub struct Operators {
    /// Electronic lowering `|g><e|`.
    pub sigma: CMatrix,
    /// Excited-state projector.
    pub excited: CMatrix,
    pub b: CMatrix,
    /// Cavity annihilation, absent without a cavity.
    pub a: Option<CMatrix>,
}

impl Operators {
    pub fn new(hilbert: &HilbertConfig) -> Self {
        let nv = hilbert.n_vib();
        let nc = hilbert.n_cav().max(1);
        let one = Complex64::new(1.0, 0.0);
        let mut sigma = CMatrix::zeros(2, 2);
        sigma[(0, 1)] = one;
        let mut proj = CMatrix::zeros(2, 2);
        proj[(1, 1)] = one;
        let id2 = CMatrix::identity(2, 2);
        let idv = CMatrix::identity(nv, nv);
        let idc = CMatrix::identity(nc, nc);
        let embed = |e: &CMatrix, v: &CMatrix, c: &CMatrix| e.kronecker(v).kronecker(c);
        Self {
            sigma: embed(&sigma, &idv, &idc),
            excited: embed(&proj, &idv, &idc),
            b: embed(&id2, &annihilation(nv), &idc),
            a: hilbert
                .has_cavity()
                .then(|| embed(&id2, &idv, &annihilation(nc))),
        }
    }

    /// `i (b^dag - b) / sqrt 2`.
    pub fn momentum(&self) -> CMatrix {
        (self.b.adjoint() - &self.b) * Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2)
    }
}
