use num_complex::Complex64;

use super::hilbert::HilbertConfig;
use super::CMatrix;
use crate::{Error, Result};

/// Hermitian, unit-trace state on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity (1e-10), trace (1e-8) and positivity (-1e-8).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let rho = Self { matrix };
        let defect = rho.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::Domain(format!("not Hermitian (defect {defect:e})")));
        }
        let drift = (rho.trace() - 1.0).abs();
        if drift > 1e-8 {
            return Err(Error::Domain(format!("trace differs from 1 by {drift:e}")));
        }
        let min = rho.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::Domain(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Projector on `|electronic, vibron, photon>`.
    pub fn basis_state(
        hilbert: &HilbertConfig,
        excited: bool,
        vib: usize,
        cav: usize,
    ) -> Result<Self> {
        if vib >= hilbert.n_vib() || cav >= hilbert.n_cav().max(1) {
            return Err(Error::Dimension(format!(
                "state ({vib}, {cav}) outside the truncation"
            )));
        }
        let dim = hilbert.dim();
        let mut matrix = CMatrix::zeros(dim, dim);
        let i = hilbert.index(excited, vib, cav);
        matrix[(i, i)] = Complex64::new(1.0, 0.0);
        Ok(Self { matrix })
    }

    /// Electronic ground state with empty vibration and cavity.
    pub fn ground(hilbert: &HilbertConfig) -> Self {
        Self::basis_state(hilbert, false, 0, 0)
            .expect("ground state is always inside the truncation")
    }

    pub(crate) fn from_raw(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `max |rho - rho^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Replaces `rho` by `(rho + rho^dag) / 2`, returning the defect removed.
    pub(crate) fn symmetrize(matrix: &mut CMatrix) -> f64 {
        let n = matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let d = matrix[(i, i)];
            worst = worst.max(2.0 * d.im.abs());
            matrix[(i, i)] = Complex64::new(d.re, 0.0);
            for j in i + 1..n {
                let (u, l) = (matrix[(i, j)], matrix[(j, i)]);
                worst = worst.max((u - l.conj()).norm());
                let avg = (u + l.conj()) * 0.5;
                matrix[(i, j)] = avg;
                matrix[(j, i)] = avg.conj();
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `Tr(rho op)`.
    pub fn expect(&self, op: &CMatrix) -> Complex64 {
        self.matrix.component_mul(&op.transpose()).sum()
    }
}
