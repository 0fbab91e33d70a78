//! Schrödinger cat states `N(|η⟩^{⊗n} + e^{imπ}|−η⟩^{⊗n})`, their reduced
//! `k`-qubit density matrices and a generic partial trace.
//!
//! Single-qubit coherent states are embedded as `|±η⟩ = a₊|0⟩ ± a₋|1⟩` with
//! `a± = √((1 ± p)/2)`, so every closed form depends only on the overlap
//! `p = ⟨η|−η⟩` and all matrix entries are real. Qubit 0 is the distinguished
//! qubit and basis indices are big-endian over qubits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible `|1 + pⁿ cos mπ|`.
pub const SINGULAR_EPS: f64 = 1e-9;

/// Largest `n` for which the full `2ⁿ` state vector is built.
pub const N_MAX_VECTOR: usize = 14;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of an arbitrary integer `m`.
    pub fn from_m(m: i64) -> Self {
        if m.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn m(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn cos_m_pi(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "0" => Ok(Parity::Even),
            "odd" | "1" => Ok(Parity::Odd),
            other => Err(Error::InvalidParameter(format!(
                "parity must be `even` or `odd`, got `{other}`"
            ))),
        }
    }
}

/// `p = (1 − η̄η)/(1 + η̄η)`, the overlap `⟨η|−η⟩` of two coherent states.
pub fn overlap_from_eta(eta: Complex64) -> f64 {
    let r2 = eta.norm_sqr();
    (1.0 - r2) / (1.0 + r2)
}

/// Dicke-basis amplitudes of the spin coherent state `|n, η⟩`:
/// `(1 + η̄η)^{−n/2} √C(n,k) ηᵏ` for `k = 0..=n`.
pub fn coherent_dicke_coefficients(n: usize, eta: Complex64) -> Vec<Complex64> {
    let norm = (1.0 + eta.norm_sqr()).powf(-(n as f64) / 2.0);
    let mut binom = 1.0_f64;
    let mut eta_pow = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            binom = binom * (n + 1 - k) as f64 / k as f64;
            eta_pow *= eta;
        }
        out.push(eta_pow * (norm * binom.sqrt()));
    }
    out
}

/// Parameters `(n, p, m)` of a cat state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSpec {
    n: usize,
    p: f64,
    parity: Parity,
    eta: Option<Complex64>,
}

impl CatSpec {
    pub fn new(n: usize, p: f64, parity: Parity) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !p.is_finite() || p.abs() > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "overlap p must lie in [-1, 1], got {p}"
            )));
        }
        let spec = CatSpec {
            n,
            p,
            parity,
            eta: None,
        };
        let value = spec.one_plus_pn_cos();
        if value.abs() <= SINGULAR_EPS {
            return Err(Error::SingularNormalization { n, p, value });
        }
        Ok(spec)
    }

    /// Builds the spec from a complex amplitude; `p` is derived from `η`.
    pub fn from_eta(n: usize, eta: Complex64, parity: Parity) -> Result<Self> {
        if !eta.re.is_finite() || !eta.im.is_finite() {
            return Err(Error::InvalidParameter("eta must be finite".into()));
        }
        let mut spec = CatSpec::new(n, overlap_from_eta(eta), parity)?;
        spec.eta = Some(eta);
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn eta(&self) -> Option<Complex64> {
        self.eta
    }

    pub fn cos_m_pi(&self) -> f64 {
        self.parity.cos_m_pi()
    }

    /// `p^e` for a non-negative integer exponent, with `0⁰ = 1`.
    pub fn p_pow(&self, e: usize) -> f64 {
        self.p.powi(e as i32)
    }

    fn one_plus_pn_cos(&self) -> f64 {
        1.0 + self.p_pow(self.n) * self.cos_m_pi()
    }

    /// `N² = 1/(2 + 2pⁿ cos mπ)`.
    pub fn norm_sq(&self) -> f64 {
        0.5 / self.one_plus_pn_cos()
    }

    pub fn a_plus(&self) -> f64 {
        ((1.0 + self.p) / 2.0).sqrt()
    }

    pub fn a_minus(&self) -> f64 {
        ((1.0 - self.p) / 2.0).sqrt()
    }

    /// `q_k = p^{n−k}`.
    pub fn q(&self, k: usize) -> f64 {
        self.p_pow(self.n - k)
    }

    /// `q_{k±} = 1 ± q_k cos mπ`.
    pub fn q_pm(&self, k: usize) -> (f64, f64) {
        let qc = self.q(k) * self.cos_m_pi();
        (1.0 + qc, 1.0 - qc)
    }

    /// Weights `½(1 ± p^{n−k}) N²/N²_{k±}` of the two eigenvectors of the
    /// rank-2 reduced state; they are its only non-zero eigenvalues.
    pub fn rank_two_weights(&self, k: usize) -> Result<(f64, f64)> {
        self.check_k(k)?;
        let q = self.q(k);
        let pkc = self.p_pow(k) * self.cos_m_pi();
        let d = self.one_plus_pn_cos();
        Ok((
            0.5 * (1.0 + q) * (1.0 + pkc) / d,
            0.5 * (1.0 - q) * (1.0 - pkc) / d,
        ))
    }

    pub(crate) fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n {
            return Err(Error::Dimension(format!(
                "k = {k} must satisfy 1 <= k <= n = {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Unit-norm state vector on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    n: usize,
    amplitudes: DVector<Complex64>,
}

impl PureStateVector {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let n = qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Invariant(format!("state norm² = {norm}, expected 1")));
        }
        Ok(PureStateVector { n, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }
}

/// Dense Hermitian unit-trace matrix on `k` qubits.
///
/// Construction checks hermiticity and trace. Positivity costs an
/// eigendecomposition and is checked on demand with [`DensityMatrix::min_eigenvalue`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    k: usize,
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "density matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let k = qubits_for_dim(m.nrows())?;
        let rho = DensityMatrix { k, m };
        let herm = rho.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::Invariant(format!("max |rho - rho^dagger| = {herm:e}")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Invariant(format!("trace = {tr}, expected 1")));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(k: usize, m: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(m.nrows(), 1 << k);
        DensityMatrix { k, m }
    }

    pub fn from_pure(psi: &PureStateVector) -> Self {
        let a = psi.amplitudes();
        DensityMatrix {
            k: psi.num_qubits(),
            m: a * a.adjoint(),
        }
    }

    pub fn maximally_mixed(k: usize) -> Self {
        let d = 1usize << k;
        DensityMatrix {
            k,
            m: DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0)),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.m.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude off the diagonal and antidiagonal.
    pub fn x_shape_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                if i != j && i + j != d - 1 {
                    worst = worst.max(self.m[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Norm of `[σ₃^{⊗k}, ρ]`, the parity commutator.
    pub fn parity_commutator_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let si = parity_sign(i);
                let sj = parity_sign(j);
                acc += ((si - sj) * self.m[(i, j)]).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

fn parity_sign(index: usize) -> f64 {
    if index.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "dimension {dim} is not a positive power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Amplitude `a₊^{k−w} a₋^{w}` of `|η⟩^{⊗k}` on a basis index of Hamming weight `w`.
fn product_amplitude(spec: &CatSpec, k: usize, index: usize) -> f64 {
    let w = index.count_ones() as i32;
    spec.a_plus().powi(k as i32 - w) * spec.a_minus().powi(w)
}

/// `N(|η⟩^{⊗n} + e^{imπ}|−η⟩^{⊗n})` as a `2ⁿ` amplitude vector.
pub fn cat_state_vector(spec: &CatSpec) -> Result<PureStateVector> {
    let n = spec.n();
    if n > N_MAX_VECTOR {
        return Err(Error::SizeLimit {
            what: "n for full state vector",
            got: n,
            max: N_MAX_VECTOR,
        });
    }
    let norm = spec.norm_sq().sqrt();
    let c = spec.cos_m_pi();
    let amplitudes = DVector::from_fn(1 << n, |b, _| {
        // |−η⟩^{⊗n} carries (−1)^w on weight-w basis states.
        let sign = parity_sign(b);
        Complex64::new(norm * product_amplitude(spec, n, b) * (1.0 + c * sign), 0.0)
    });
    PureStateVector::new(amplitudes)
}

/// Closed-form reduced state on the first `k` qubits.
///
/// Entry `(i, j)` is `2N² q_{k±} a₊^{2k−wᵢ−wⱼ} a₋^{wᵢ+wⱼ}` when the weights
/// `wᵢ, wⱼ` are both even (`q_{k+}`) or both odd (`q_{k−}`), and zero otherwise.
pub fn reduced_density(spec: &CatSpec, k: usize) -> Result<DensityMatrix> {
    spec.check_k(k)?;
    let two_n2 = 2.0 * spec.norm_sq();
    let (q_plus, q_minus) = spec.q_pm(k);
    let amps: Vec<f64> = (0..1usize << k)
        .map(|i| product_amplitude(spec, k, i))
        .collect();
    let m = DMatrix::from_fn(1 << k, 1 << k, |i, j| {
        let wi = i.count_ones() % 2;
        let wj = j.count_ones() % 2;
        if wi != wj {
            return ZERO;
        }
        let q = if wi == 0 { q_plus } else { q_minus };
        Complex64::new(two_n2 * q * amps[i] * amps[j], 0.0)
    });
    Ok(DensityMatrix::from_parts_unchecked(k, m))
}

/// States that admit a partial trace over a subset of their qubits.
pub trait PartialTrace {
    /// Keeps the listed qubits, in the listed order, and traces out the rest.
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix>;
}

/// Splits every full basis index into (kept index, environment index).
fn split_indices(n: usize, keep: &[usize]) -> Result<Vec<(usize, usize)>> {
    let mut seen = vec![false; n];
    for &q in keep {
        if q >= n {
            return Err(Error::Dimension(format!("qubit {q} out of range for {n} qubits")));
        }
        if seen[q] {
            return Err(Error::Dimension(format!("qubit {q} listed twice")));
        }
        seen[q] = true;
    }
    let env: Vec<usize> = (0..n).filter(|&q| !seen[q]).collect();
    let bit = |b: usize, q: usize| (b >> (n - 1 - q)) & 1;
    Ok((0..1usize << n)
        .map(|b| {
            let kept = keep.iter().fold(0, |acc, &q| (acc << 1) | bit(b, q));
            let rest = env.iter().fold(0, |acc, &q| (acc << 1) | bit(b, q));
            (kept, rest)
        })
        .collect())
}

impl PartialTrace for PureStateVector {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.num_qubits();
        let split = split_indices(n, keep)?;
        let dk = 1usize << keep.len();
        let de = 1usize << (n - keep.len());
        let mut amp = DMatrix::from_element(dk, de, ZERO);
        for (b, &(i, e)) in split.iter().enumerate() {
            amp[(i, e)] = self.amplitudes[b];
        }
        Ok(DensityMatrix::from_parts_unchecked(
            keep.len(),
            &amp * amp.adjoint(),
        ))
    }
}

impl PartialTrace for DensityMatrix {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.num_qubits();
        let split = split_indices(n, keep)?;
        let dk = 1usize << keep.len();
        let mut out = DMatrix::from_element(dk, dk, ZERO);
        for (b, &(i, e)) in split.iter().enumerate() {
            for (b2, &(j, e2)) in split.iter().enumerate() {
                if e == e2 {
                    out[(i, j)] += self.m[(b, b2)];
                }
            }
        }
        Ok(DensityMatrix::from_parts_unchecked(keep.len(), out))
    }
}

pub fn partial_trace<S: PartialTrace + ?Sized>(state: &S, keep: &[usize]) -> Result<DensityMatrix> {
    state.partial_trace(keep)
}
