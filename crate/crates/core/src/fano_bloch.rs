//! Fano-Bloch correlation tensors `T_{α₁…α_k} = Tr(ρ σ_{α₁}⊗…⊗σ_{α_k})`.
//!
//! Convention: `ρ = 2^{−k} Σ T_{α₁…α_k} σ_{α₁}⊗…⊗σ_{α_k}`, so `T_{0…0} = 1`.
//! Tensors are stored flat, base 4, with `α₁` the most significant digit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cat::{CatSpec, DensityMatrix};
use crate::error::{Error, Result};

/// Largest `k` for which the full `4^k` tensor is computed.
pub const K_MAX_TENSOR: usize = 8;

/// Imaginary residue tolerated (and dropped) when a trace must be real.
pub const IMAG_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliIndex(u8);

impl PauliIndex {
    pub const I: PauliIndex = PauliIndex(0);
    pub const X: PauliIndex = PauliIndex(1);
    pub const Y: PauliIndex = PauliIndex(2);
    pub const Z: PauliIndex = PauliIndex(3);

    pub fn new(value: u8) -> Result<Self> {
        if value > 3 {
            return Err(Error::InvalidParameter(format!(
                "Pauli index must be in 0..=3, got {value}"
            )));
        }
        Ok(PauliIndex(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// `true` for σ₁ and σ₂, the operators that flip the computational basis.
    pub fn flips(self) -> bool {
        self.0 == 1 || self.0 == 2
    }
}

/// Ordered Pauli indices `(α₁, …, α_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<PauliIndex>);

impl MultiIndex {
    pub fn new(indices: Vec<PauliIndex>) -> Self {
        MultiIndex(indices)
    }

    pub fn from_values(values: &[u8]) -> Result<Self> {
        values
            .iter()
            .map(|&v| PauliIndex::new(v))
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn from_flat(flat: usize, k: usize) -> Self {
        MultiIndex(
            (0..k)
                .map(|q| PauliIndex(((flat >> (2 * (k - 1 - q))) & 3) as u8))
                .collect(),
        )
    }

    pub fn to_flat(&self) -> usize {
        self.0.iter().fold(0, |acc, a| (acc << 2) | a.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[PauliIndex] {
        &self.0
    }

    /// Number of positions holding σ₁ or σ₂.
    pub fn flip_count(&self) -> usize {
        self.0.iter().filter(|a| a.flips()).count()
    }
}

/// Row-action of a Pauli string: `P[r, r ^ flip_mask] = phase(r)`, zero elsewhere.
#[derive(Debug, Clone, Copy)]
struct PauliString {
    flip_mask: usize,
    z_mask: usize,
    y_mask: usize,
    y_count: u32,
}

impl PauliString {
    fn from_flat(flat: usize, k: usize) -> Self {
        let mut s = PauliString {
            flip_mask: 0,
            z_mask: 0,
            y_mask: 0,
            y_count: 0,
        };
        for q in 0..k {
            let alpha = (flat >> (2 * (k - 1 - q))) & 3;
            let bit = 1 << (k - 1 - q);
            match alpha {
                1 => s.flip_mask |= bit,
                2 => {
                    s.flip_mask |= bit;
                    s.y_mask |= bit;
                    s.y_count += 1;
                }
                3 => s.z_mask |= bit,
                _ => {}
            }
        }
        s
    }

    /// `P[row, row ^ flip_mask]`. σ₂ contributes `−i` on a 0 bit and `+i` on a 1 bit.
    fn phase(&self, row: usize) -> Complex64 {
        let minus = (row & self.z_mask).count_ones() + (!row & self.y_mask).count_ones();
        let sign = if minus.is_multiple_of(2) { 1.0 } else { -1.0 };
        let ipow = match self.y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => I,
            2 => Complex64::new(-1.0, 0.0),
            _ => -I,
        };
        ipow * sign
    }

    fn trace_against(&self, m: &DMatrix<Complex64>) -> Complex64 {
        (0..m.nrows())
            .map(|r| m[(r ^ self.flip_mask, r)] * self.phase(r))
            .sum()
    }
}

fn check_index_len(k: usize, idx: &MultiIndex) -> Result<()> {
    if idx.len() != k {
        return Err(Error::Dimension(format!(
            "multi-index of length {} for a {k}-qubit state",
            idx.len()
        )));
    }
    Ok(())
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::Invariant(format!(
            "{what} has imaginary residue {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `Tr(ρ σ_{α₁}⊗…⊗σ_{α_k})`.
pub fn tensor_element(rho: &DensityMatrix, idx: &MultiIndex) -> Result<f64> {
    check_index_len(rho.num_qubits(), idx)?;
    let s = PauliString::from_flat(idx.to_flat(), idx.len());
    real_part(s.trace_against(rho.matrix()), "correlation tensor element")
}

/// All `4^k` complex traces `Tr(M σ_α)` of an arbitrary `2^k` square operator.
pub fn operator_tensor(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let k = qubits_of(m)?;
    if k > K_MAX_TENSOR {
        return Err(Error::SizeLimit {
            what: "k for full tensor",
            got: k,
            max: K_MAX_TENSOR,
        });
    }
    Ok((0..1usize << (2 * k))
        .into_par_iter()
        .map(|flat| PauliString::from_flat(flat, k).trace_against(m))
        .collect())
}

fn qubits_of(m: &DMatrix<Complex64>) -> Result<usize> {
    let d = m.nrows();
    if d != m.ncols() || d == 0 || !d.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "operator must be square of power-of-two size, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Real Fano-Bloch tensor of a `k`-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    k: usize,
    values: Vec<f64>,
}

impl CorrelationTensor {
    pub fn from_values(k: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << (2 * k) {
            return Err(Error::Dimension(format!(
                "{} values for a {k}-qubit tensor (expected {})",
                values.len(),
                1usize << (2 * k)
            )));
        }
        Ok(CorrelationTensor { k, values })
    }

    pub(crate) fn from_complex(k: usize, values: &[Complex64], what: &str) -> Result<Self> {
        let values = values
            .iter()
            .map(|&z| real_part(z, what))
            .collect::<Result<Vec<_>>>()?;
        CorrelationTensor::from_values(k, values)
    }

    pub fn num_qubits(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, idx: &MultiIndex) -> f64 {
        self.values[idx.to_flat()]
    }

    /// Element addressed by raw digits, e.g. `at(&[3, 0, 0])`.
    pub fn at(&self, digits: &[u8]) -> f64 {
        debug_assert_eq!(digits.len(), self.k);
        self.values[digits.iter().fold(0, |acc, &a| (acc << 2) | a as usize)]
    }

    /// Element with first index `first` and trailing flat index `rest`
    /// over the remaining `k − 1` qubits.
    pub fn split_at(&self, first: usize, rest: usize) -> f64 {
        self.values[(first << (2 * (self.k - 1))) | rest]
    }

    pub fn max_abs_diff(&self, other: &CorrelationTensor) -> f64 {
        if self.k != other.k {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn nonzero_count(&self, tol: f64) -> usize {
        self.values.iter().filter(|v| v.abs() > tol).count()
    }

    /// Largest magnitude among entries with an odd number of σ₁/σ₂ indices.
    pub fn parity_violation(&self) -> f64 {
        (0..self.values.len())
            .filter(|&f| MultiIndex::from_flat(f, self.k).flip_count() % 2 == 1)
            .map(|f| self.values[f].abs())
            .fold(0.0, f64::max)
    }

    /// Tensor with qubit positions reordered: result index `q` reads input index `perm[q]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<CorrelationTensor> {
        if perm.len() != self.k {
            return Err(Error::Dimension("permutation length mismatch".into()));
        }
        let mut out = vec![0.0; self.values.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = MultiIndex::from_flat(flat, self.k);
            let src = MultiIndex::new(perm.iter().map(|&p| idx.indices()[p]).collect());
            *slot = self.values[src.to_flat()];
        }
        CorrelationTensor::from_values(self.k, out)
    }

    /// Checks `T_{0…0} = 1`, `|T| ≤ 1` and the parity selection rule.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if (self.values[0] - 1.0).abs() > tol {
            return Err(Error::Invariant(format!("T_0..0 = {}", self.values[0])));
        }
        if let Some(v) = self.values.iter().find(|v| v.abs() > 1.0 + tol) {
            return Err(Error::Invariant(format!("|T| = {} exceeds 1", v.abs())));
        }
        let parity = self.parity_violation();
        if parity > tol {
            return Err(Error::Invariant(format!(
                "parity-odd tensor entry of size {parity:e}"
            )));
        }
        Ok(())
    }
}

/// Every element by direct trace.
pub fn full_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    let traces = operator_tensor(rho.matrix())?;
    CorrelationTensor::from_complex(rho.num_qubits(), &traces, "correlation tensor element")
}

/// `ρ = 2^{−k} Σ T_α σ_α`.
pub fn reconstruct_density(t: &CorrelationTensor) -> Result<DensityMatrix> {
    let k = t.num_qubits();
    let d = 1usize << k;
    let scale = 1.0 / d as f64;
    let mut m = DMatrix::from_element(d, d, ZERO);
    for (flat, &coeff) in t.values().iter().enumerate() {
        if coeff == 0.0 {
            continue;
        }
        let s = PauliString::from_flat(flat, k);
        for r in 0..d {
            m[(r, r ^ s.flip_mask)] += s.phase(r) * (coeff * scale);
        }
    }
    DensityMatrix::new(m)
}

/// `ρ = Σ_{r,s} ρ^{rs} ⊗ |r⟩⟨s|`, blocks taken over the last qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFamily {
    blocks: [[DMatrix<Complex64>; 2]; 2],
}

impl BlockFamily {
    pub fn block(&self, r: usize, s: usize) -> &DMatrix<Complex64> {
        &self.blocks[r][s]
    }

    pub fn reassemble(&self) -> DMatrix<Complex64> {
        let h = self.blocks[0][0].nrows();
        DMatrix::from_fn(2 * h, 2 * h, |i, j| self.blocks[i & 1][j & 1][(i >> 1, j >> 1)])
    }

    /// `max |ρ^{10} − (ρ^{01})†|`.
    pub fn adjoint_residual(&self) -> f64 {
        (&self.blocks[1][0] - self.blocks[0][1].adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

fn split_blocks(m: &DMatrix<Complex64>) -> [[DMatrix<Complex64>; 2]; 2] {
    let h = m.nrows() / 2;
    let block = |r: usize, s: usize| DMatrix::from_fn(h, h, |i, j| m[(2 * i + r, 2 * j + s)]);
    [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]]
}

pub fn block_decompose(rho: &DensityMatrix) -> Result<BlockFamily> {
    if rho.num_qubits() < 2 {
        return Err(Error::Dimension(
            "block decomposition needs at least two qubits".into(),
        ));
    }
    Ok(BlockFamily {
        blocks: split_blocks(rho.matrix()),
    })
}

/// Combines the four block tensors into the tensor of the parent operator:
/// `T_{…0} = T⁰⁰ + T¹¹`, `T_{…1} = T⁰¹ + T¹⁰`, `T_{…2} = iT⁰¹ − iT¹⁰`, `T_{…3} = T⁰⁰ − T¹¹`.
fn combine_blocks(t: [[Vec<Complex64>; 2]; 2]) -> Vec<Complex64> {
    let len = t[0][0].len();
    let mut out = vec![ZERO; 4 * len];
    for a in 0..len {
        out[4 * a] = t[0][0][a] + t[1][1][a];
        out[4 * a + 1] = t[0][1][a] + t[1][0][a];
        out[4 * a + 2] = I * t[0][1][a] - I * t[1][0][a];
        out[4 * a + 3] = t[0][0][a] - t[1][1][a];
    }
    out
}

fn single_qubit_traces(m: [[Complex64; 2]; 2]) -> Vec<Complex64> {
    vec![
        m[0][0] + m[1][1],
        m[0][1] + m[1][0],
        I * m[0][1] - I * m[1][0],
        m[0][0] - m[1][1],
    ]
}

/// Complex tensor of an arbitrary operator by recursive block decomposition.
pub fn tensor_by_blocks(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let k = qubits_of(m)?;
    if k > K_MAX_TENSOR {
        return Err(Error::SizeLimit {
            what: "k for full tensor",
            got: k,
            max: K_MAX_TENSOR,
        });
    }
    Ok(blocks_recursive(m))
}

fn blocks_recursive(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    if m.nrows() == 2 {
        return single_qubit_traces([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]);
    }
    let [[b00, b01], [b10, b11]] = split_blocks(m);
    combine_blocks([
        [blocks_recursive(&b00), blocks_recursive(&b01)],
        [blocks_recursive(&b10), blocks_recursive(&b11)],
    ])
}

/// `Σ_{u,v ∈ {+,−}} c_{uv} |u⟩⟨v|^{⊗j}` with `|±⟩ = a₊|0⟩ ± a₋|1⟩`.
///
/// Every reduced cat state has this form with `c₊₊ = c₋₋ = N²` and
/// `c₊₋ = c₋₊ = N² q_k cos mπ`, and the family is closed under taking
/// blocks over the last qubit.
#[derive(Debug, Clone, Copy)]
struct CatOperator {
    qubits: usize,
    coeffs: [[f64; 2]; 2],
    amp: [[f64; 2]; 2],
}

impl CatOperator {
    /// Block `(r, s)` over the last qubit: `c_{uv} ← c_{uv} ⟨r|u⟩⟨v|s⟩`.
    fn block(&self, r: usize, s: usize) -> CatOperator {
        let mut coeffs = [[0.0; 2]; 2];
        for (u, row) in coeffs.iter_mut().enumerate() {
            for (v, c) in row.iter_mut().enumerate() {
                // Grouped so that blocks (0, 1) and (1, 0) agree bitwise when u = v.
                *c = self.coeffs[u][v] * (self.amp[u][r] * self.amp[v][s]);
            }
        }
        CatOperator {
            qubits: self.qubits - 1,
            coeffs,
            amp: self.amp,
        }
    }

    fn single_qubit_matrix(&self) -> [[Complex64; 2]; 2] {
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for u in 0..2 {
                    for v in 0..2 {
                        acc += self.coeffs[u][v] * (self.amp[u][i] * self.amp[v][j]);
                    }
                }
                *x = Complex64::new(acc, 0.0);
            }
        }
        m
    }

    fn tensor(&self) -> Vec<Complex64> {
        if self.qubits == 1 {
            return single_qubit_traces(self.single_qubit_matrix());
        }
        combine_blocks([
            [self.block(0, 0).tensor(), self.block(0, 1).tensor()],
            [self.block(1, 0).tensor(), self.block(1, 1).tensor()],
        ])
    }
}

/// Tensor of the reduced `k`-qubit cat state built only from the recursion
/// relations, bottoming out at single-qubit Bloch vectors of 2×2 blocks.
pub fn recursive_tensor(spec: &CatSpec, k: usize) -> Result<CorrelationTensor> {
    spec.check_k(k)?;
    if k > K_MAX_TENSOR {
        return Err(Error::SizeLimit {
            what: "k for recursive tensor",
            got: k,
            max: K_MAX_TENSOR,
        });
    }
    let n2 = spec.norm_sq();
    let off = n2 * spec.q(k) * spec.cos_m_pi();
    let (ap, am) = (spec.a_plus(), spec.a_minus());
    let coeffs = [[n2, off], [off, n2]];
    // Each |u⟩⟨v|^{⊗k} is recursed separately and weighted at the end. Mixing
    // the weights inside the blocks would cancel 1 + q against 1 − q and lose
    // relative accuracy on entries of order q.
    let mut total = vec![ZERO; 1 << (2 * k)];
    for (u, row) in coeffs.iter().enumerate() {
        for (v, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut unit = [[0.0; 2]; 2];
            unit[u][v] = 1.0;
            let op = CatOperator {
                qubits: k,
                coeffs: unit,
                // amp[u][bit] = ⟨bit|u⟩ for u ∈ {+, −}
                amp: [[ap, am], [ap, -am]],
            };
            for (t, x) in total.iter_mut().zip(op.tensor()) {
                *t += c * x;
            }
        }
    }
    CorrelationTensor::from_complex(k, &total, "recursive tensor element")
}
