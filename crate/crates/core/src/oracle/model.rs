use num_complex::Complex64;

use super::hilbert::{HilbertConfig, Operators};
use super::CMatrix;
use crate::params::{CavityParams, DriveParams, MoleculeParams};
use crate::scalar::ensure_finite;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Probe amplitude and detuning `omega_p - omega_0` for one oracle run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub eta_p: f64,
    pub delta_p: f64,
}

impl Probe {
    pub fn new(eta_p: f64, delta_p: f64) -> Result<Self> {
        ensure_finite("eta_p", eta_p)?;
        ensure_finite("delta_p", delta_p)?;
        if eta_p < 0.0 {
            return Err(Error::Domain("eta_p must be >= 0".into()));
        }
        Ok(Self { eta_p, delta_p })
    }

    pub fn off() -> Self {
        Self {
            eta_p: 0.0,
            delta_p: 0.0,
        }
    }
}

/// Jump operator with at most one nonzero per row, stored as
/// `row -> (column, value)` so `c X c^dag` costs O(dim^2).
#[derive(Debug, Clone)]
struct Jump {
    rate: f64,
    entries: Vec<Option<(usize, f64)>>,
}

impl Jump {
    fn new(rate: f64, op: &CMatrix) -> Self {
        let entries = (0..op.nrows())
            .map(|i| {
                let mut hits = (0..op.ncols()).filter(|&j| op[(i, j)].norm() > 0.0);
                let first = hits.next().map(|j| (j, op[(i, j)].re));
                debug_assert!(hits.next().is_none(), "jump operator is not monomial");
                first
            })
            .collect();
        Self { rate, entries }
    }

    /// `out += 2 rate c X c^dag`.
    fn add_sandwich(&self, x: &CMatrix, out: &mut CMatrix) {
        let scale = 2.0 * self.rate;
        for (i, ei) in self.entries.iter().enumerate() {
            let Some((ki, ci)) = *ei else { continue };
            for (j, ej) in self.entries.iter().enumerate() {
                let Some((kj, cj)) = *ej else { continue };
                out[(i, j)] += x[(ki, kj)] * (scale * ci * cj);
            }
        }
    }
}

/// Nonzero entries `(row, col, value)` of a sparse operator.
#[derive(Debug, Clone, Default)]
struct Sparse(Vec<(usize, usize, Complex64)>);

impl Sparse {
    fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != Complex64::new(0.0, 0.0) {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self(entries)
    }

    /// `out += -i c A X`.
    fn left(&self, c: Complex64, x: &CMatrix, out: &mut CMatrix) {
        let n = x.ncols();
        for &(i, k, v) in &self.0 {
            let w = -I * c * v;
            for j in 0..n {
                out[(i, j)] += w * x[(k, j)];
            }
        }
    }

    /// `out += i X (c A)^dag`.
    fn right(&self, c: Complex64, x: &CMatrix, out: &mut CMatrix) {
        let n = x.nrows();
        for &(j, k, v) in &self.0 {
            let w = I * (c * v).conj();
            for i in 0..n {
                out[(i, j)] += w * x[(i, k)];
            }
        }
    }
}

/// Time-periodic Lindblad generator
/// `dX/dt = i [X, H(t)] + sum_c rate_c (2 c X c^dag - {c^dag c, X})`
/// with jumps `sigma` (gamma), `sigma^dag sigma` (gamma_phi), `b` (Gamma)
/// and `a` (kappa).
#[derive(Debug, Clone)]
pub struct MasterEquation {
    hilbert: HilbertConfig,
    ops: Operators,
    h_static: CMatrix,
    h_drive: CMatrix,
    omega_d: f64,
    /// `(P, delta)` adding `P e^{-i delta t} + h.c.` outside the rotating frame.
    h_probe: Option<(CMatrix, f64)>,
    /// `sum_c rate_c c^dag c`.
    decay: CMatrix,
    jumps: Vec<Jump>,
    /// Sparse `H_static - i decay`, drive and probe operators for the
    /// right-hand side.
    sparse_static: Sparse,
    sparse_drive: Sparse,
    sparse_probe: Option<(Sparse, Sparse, f64)>,
    max_frequency: f64,
    slowest_rate: f64,
}

impl MasterEquation {
    pub fn new(
        mol: &MoleculeParams<f64>,
        drive: &DriveParams<f64>,
        probe: Probe,
        cav: Option<&CavityParams<f64>>,
        hilbert: &HilbertConfig,
    ) -> Result<Self> {
        if cav.is_some() != hilbert.has_cavity() {
            return Err(Error::Dimension(
                "cavity parameters and cavity truncation must be given together".into(),
            ));
        }
        let ops = Operators::new(hilbert);
        let dim = hilbert.dim();
        let (lambda, nu) = (mol.lambda(), mol.nu());
        let b_dag = ops.b.adjoint();
        let x_vib = &ops.b + &b_dag;
        let pump = (ops.sigma.adjoint() - &ops.sigma) * re(probe.eta_p) * I;

        let shift = if hilbert.rotating_frame() {
            lambda * lambda * nu - probe.delta_p
        } else {
            lambda * lambda * nu
        };
        let mut h_static = &ops.excited * re(shift) + &b_dag * &ops.b * re(nu)
            - &x_vib * &ops.excited * re(lambda * nu);
        let h_probe = if hilbert.rotating_frame() {
            h_static += &pump;
            None
        } else {
            Some((ops.sigma.adjoint() * (I * probe.eta_p), probe.delta_p))
        };
        let mut h_drive = &x_vib * re(drive.eta_d());

        let mut decay = CMatrix::zeros(dim, dim);
        let mut jumps = Vec::new();
        let mut add_jump = |rate: f64, c: &CMatrix| {
            if rate > 0.0 {
                decay += c.adjoint() * c * re(rate);
                jumps.push(Jump::new(rate, c));
            }
        };
        add_jump(mol.gamma(), &ops.sigma);
        add_jump(mol.gamma_phi(), &ops.excited);
        add_jump(mol.big_gamma(), &ops.b);

        let mut max_frequency = nu.max(drive.omega_d());
        let mut rates = vec![mol.gamma(), mol.big_gamma()];
        if let (Some(cav), Some(a)) = (cav, ops.a.as_ref()) {
            let x_cav = a + a.adjoint();
            h_static += a.adjoint() * a * re(cav.omega_c()) + &x_cav * &x_vib * re(cav.g());
            h_drive += &x_cav * re(cav.eta_d_c());
            add_jump(cav.kappa(), a);
            max_frequency = max_frequency.max(cav.omega_c());
            rates.push(cav.kappa());
        }
        let slowest_rate = rates
            .into_iter()
            .filter(|&r| r > 0.0)
            .fold(f64::INFINITY, f64::min);

        let h_eff = &h_static - &decay * I;
        Ok(Self {
            sparse_static: Sparse::from_dense(&h_eff),
            sparse_drive: Sparse::from_dense(&h_drive),
            sparse_probe: h_probe
                .as_ref()
                .map(|(p, d)| (Sparse::from_dense(p), Sparse::from_dense(&p.adjoint()), *d)),
            hilbert: *hilbert,
            ops,
            h_static,
            h_drive,
            omega_d: drive.omega_d(),
            h_probe,
            decay,
            jumps,
            max_frequency,
            slowest_rate,
        })
    }

    pub fn hilbert(&self) -> &HilbertConfig {
        &self.hilbert
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn omega_d(&self) -> f64 {
        self.omega_d
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega_d
    }

    /// Largest of `nu`, `omega_d` and `omega_c`; the step must resolve it.
    pub fn max_frequency(&self) -> f64 {
        self.max_frequency
    }

    /// Smallest nonzero decay rate among `gamma`, `Gamma` and `kappa`
    /// (infinite if all vanish).
    pub fn slowest_rate(&self) -> f64 {
        self.slowest_rate
    }

    /// Bound on the spectral radius of the generator, for step-size checks.
    pub fn stiffness(&self) -> f64 {
        let norm1 = |m: &CMatrix| {
            (0..m.ncols())
                .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let probe = self.h_probe.as_ref().map_or(0.0, |(p, _)| 2.0 * norm1(p));
        2.0 * (norm1(&self.h_static) + norm1(&self.h_drive) + probe + norm1(&self.decay))
    }

    fn fill_hamiltonian(&self, t: f64, h: &mut CMatrix) {
        h.copy_from(&self.h_static);
        let c = (self.omega_d * t).cos();
        if c != 0.0 {
            h.zip_apply(&self.h_drive, |x, d| *x += d * c);
        }
        if let Some((p, delta)) = &self.h_probe {
            let phase = Complex64::from_polar(1.0, -delta * t);
            for i in 0..h.nrows() {
                for j in 0..h.ncols() {
                    h[(i, j)] += p[(i, j)] * phase + (p[(j, i)] * phase).conj();
                }
            }
        }
    }

    /// `H(t)`.
    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        let mut h = self.h_static.clone();
        self.fill_hamiltonian(t, &mut h);
        h
    }

    /// Writes the generator applied to `x` into `out`. With `hermitian`
    /// set, `x` must be Hermitian and only the left products are formed.
    pub(crate) fn rhs_into(&self, t: f64, x: &CMatrix, out: &mut CMatrix, hermitian: bool) {
        out.fill(re(0.0));
        let cos = re((self.omega_d * t).cos());
        let mut terms = vec![(&self.sparse_static, re(1.0)), (&self.sparse_drive, cos)];
        if let Some((p, p_dag, delta)) = &self.sparse_probe {
            let phase = Complex64::from_polar(1.0, -delta * t);
            terms.push((p, phase));
            terms.push((p_dag, phase.conj()));
        }
        for (op, c) in &terms {
            op.left(*c, x, out);
        }
        if hermitian {
            // -i H_eff X + i X H_eff^dag is A + A^dag with A = -i H_eff X.
            let n = out.nrows();
            for i in 0..n {
                out[(i, i)] = re(2.0 * out[(i, i)].re);
                for j in i + 1..n {
                    let sum = out[(i, j)] + out[(j, i)].conj();
                    out[(i, j)] = sum;
                    out[(j, i)] = sum.conj();
                }
            }
        } else {
            for (op, c) in &terms {
                op.right(*c, x, out);
            }
        }
        for jump in &self.jumps {
            jump.add_sandwich(x, out);
        }
    }

    /// Generator applied to an arbitrary operator `x` at time `t`.
    pub fn rhs(&self, t: f64, x: &CMatrix) -> Result<CMatrix> {
        let dim = self.hilbert.dim();
        if x.shape() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, model space has dimension {dim}",
                x.nrows(),
                x.ncols()
            )));
        }
        let mut out = CMatrix::zeros(dim, dim);
        self.rhs_into(t, x, &mut out, false);
        Ok(out)
    }
}

/// Hamiltonian at time `t`, probe-rotating frame unless the Hilbert config
/// says otherwise.
pub fn build_hamiltonian(
    t: f64,
    mol: &MoleculeParams<f64>,
    drive: &DriveParams<f64>,
    probe: Probe,
    cav: Option<&CavityParams<f64>>,
    hilbert: &HilbertConfig,
) -> Result<CMatrix> {
    ensure_finite("t", t)?;
    Ok(MasterEquation::new(mol, drive, probe, cav, hilbert)?.hamiltonian(t))
}

pub fn lindblad_rhs(rho: &CMatrix, t: f64, model: &MasterEquation) -> Result<CMatrix> {
    model.rhs(t, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mol(lambda: f64) -> MoleculeParams<f64> {
        MoleculeParams::new(lambda, 1.0, 0.02, 0.01, 0.1).unwrap()
    }

    fn dense_commutator_rhs(
        model: &MasterEquation,
        mol: &MoleculeParams<f64>,
        rho: &CMatrix,
        t: f64,
    ) -> CMatrix {
        let ops = model.operators();
        let h = model.hamiltonian(t);
        let mut out = (rho * &h - &h * rho) * I;
        let mut dissipate = |rate: f64, c: &CMatrix| {
            let cdc = c.adjoint() * c;
            out += (c * rho * c.adjoint() * re(2.0) - &cdc * rho - rho * &cdc) * re(rate);
        };
        dissipate(mol.gamma(), &ops.sigma);
        dissipate(mol.gamma_phi(), &ops.excited);
        dissipate(mol.big_gamma(), &ops.b);
        out
    }

    #[test]
    fn bare_hamiltonian_is_diagonal() {
        let h = HilbertConfig::new(4, 0).unwrap();
        let drive = DriveParams::undriven(1.0).unwrap();
        let ham = build_hamiltonian(
            0.3,
            &mol(0.0),
            &drive,
            Probe::new(0.0, 0.4).unwrap(),
            None,
            &h,
        )
        .unwrap();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                let expect = if i != j {
                    0.0
                } else {
                    let excited = i >= h.n_vib();
                    let n = (i % h.n_vib()) as f64;
                    n - if excited { 0.4 } else { 0.0 }
                };
                assert!((ham[(i, j)] - re(expect)).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn vibronic_block_is_position_operator() {
        let h = HilbertConfig::new(5, 0).unwrap();
        let drive = DriveParams::undriven(1.0).unwrap();
        let lambda = 0.3;
        let ham = build_hamiltonian(0.0, &mol(lambda), &drive, Probe::off(), None, &h).unwrap();
        // Independent assembly of -lambda nu (b + b^dag) on the excited block.
        for m in 0..5 {
            for n in 0..5 {
                let x = if m + 1 == n || n + 1 == m {
                    (m.max(n) as f64).sqrt()
                } else {
                    0.0
                };
                let got = ham[(h.index(true, m, 0), h.index(true, n, 0))];
                let diag = if m == n {
                    lambda * lambda + m as f64
                } else {
                    0.0
                };
                assert!((got - re(diag - lambda * x)).norm() < 1e-15);
                assert_eq!(ham[(h.index(false, m, 0), h.index(true, n, 0))], re(0.0));
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &rotating in &[true, false] {
            let h = HilbertConfig::new(4, 3)
                .unwrap()
                .with_rotating_frame(rotating);
            for _ in 0..20 {
                let m =
                    MoleculeParams::new(rng.random_range(0.0..1.0), 1.0, 0.01, 0.0, 0.05).unwrap();
                let d = DriveParams::new(rng.random_range(0.0..0.3), rng.random_range(0.5..1.5))
                    .unwrap();
                let c = CavityParams::new(0.01, 0.05, 1.0, rng.random_range(0.0..0.1)).unwrap();
                let p =
                    Probe::new(rng.random_range(0.0..0.1), rng.random_range(-2.0..2.0)).unwrap();
                let ham = build_hamiltonian(rng.random_range(0.0..100.0), &m, &d, p, Some(&c), &h)
                    .unwrap();
                assert!((&ham - ham.adjoint()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rhs_matches_dense_form() {
        let h = HilbertConfig::new(4, 0).unwrap();
        let m = mol(0.4);
        let d = DriveParams::new(0.1, 0.9).unwrap();
        let model = MasterEquation::new(&m, &d, Probe::new(0.05, 0.7).unwrap(), None, &h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = CMatrix::from_fn(h.dim(), h.dim(), |_, _| {
            Complex64::new(rng.random(), rng.random())
        });
        let fast = lindblad_rhs(&x, 1.3, &model).unwrap();
        let slow = dense_commutator_rhs(&model, &m, &x, 1.3);
        assert!((fast - slow).norm() < 1e-13);
        assert!(lindblad_rhs(&CMatrix::zeros(3, 3), 0.0, &model).is_err());
    }

    #[test]
    fn hermitian_shortcut_agrees() {
        let h = HilbertConfig::new(3, 2).unwrap().with_rotating_frame(false);
        let c = CavityParams::new(0.02, 0.05, 1.1, 0.03).unwrap();
        let d = DriveParams::new(0.1, 0.9).unwrap();
        let model =
            MasterEquation::new(&mol(0.4), &d, Probe::new(0.05, 0.7).unwrap(), Some(&c), &h)
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = CMatrix::from_fn(h.dim(), h.dim(), |_, _| {
            Complex64::new(rng.random(), rng.random())
        });
        let x = &a + a.adjoint();
        let mut full = CMatrix::zeros(h.dim(), h.dim());
        let mut short = full.clone();
        model.rhs_into(2.1, &x, &mut full, false);
        model.rhs_into(2.1, &x, &mut short, true);
        assert!((full - short).norm() < 1e-13);
    }

    #[test]
    fn trace_preserved_and_dark_state() {
        let h = HilbertConfig::new(3, 0).unwrap();
        let m = MoleculeParams::new(0.0, 1.0, 0.05, 0.0, 0.0).unwrap();
        let d = DriveParams::undriven(1.0).unwrap();
        let model = MasterEquation::new(&m, &d, Probe::off(), None, &h).unwrap();
        let mixed = CMatrix::identity(h.dim(), h.dim()) * re(1.0 / h.dim() as f64);
        let drho = lindblad_rhs(&mixed, 0.0, &model).unwrap();
        assert!(drho.trace().norm() < 1e-16);

        let m = mol(0.3);
        let d = DriveParams::new(0.0, 1.0).unwrap();
        let model = MasterEquation::new(&m, &d, Probe::off(), None, &h).unwrap();
        let mut ground = CMatrix::zeros(h.dim(), h.dim());
        ground[(0, 0)] = re(1.0);
        assert!(lindblad_rhs(&ground, 2.0, &model).unwrap().norm() < 1e-16);
    }

    #[test]
    fn cavity_requires_truncation() {
        let c = CavityParams::new(0.01, 0.05, 1.0, 0.0).unwrap();
        let d = DriveParams::undriven(1.0).unwrap();
        let no_cav = HilbertConfig::new(3, 0).unwrap();
        assert!(MasterEquation::new(&mol(0.1), &d, Probe::off(), Some(&c), &no_cav).is_err());
        let with_cav = HilbertConfig::new(3, 2).unwrap();
        assert!(MasterEquation::new(&mol(0.1), &d, Probe::off(), None, &with_cav).is_err());
    }
}
