//! Geometric discord between qubit 1 and the remaining `k − 1` qubits.
//!
//! For a classical-quantum state `χ` measured along the unit axis `e` on
//! qubit 1, the squared Hilbert-Schmidt distance to `ρ` minimized over the
//! remaining parameters is `2^{−k}(‖x‖² + ‖T‖² − eᵗKe)` with
//! `K = x xᵗ + T Tᵗ`, `x_i = T_{i0…0}` and `T` the `3 × (4^{k−1} − 1)` block
//! of correlations `T_{iα₂…α_k}`. The discord is therefore
//! `2^{−k}(k₁ + k₂ + k₃ − k_max)`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::cat::{CatSpec, DensityMatrix};
use crate::eigen3::{symmetric_eigen, Eigen3};
use crate::encoding;
use crate::error::{Error, Result};
use crate::fano_bloch::{full_tensor, reconstruct_density, recursive_tensor, CorrelationTensor};
use crate::sphere;

/// Largest `k` accepted by the brute-force oracle.
pub const K_MAX_BRUTE: usize = 6;

/// Relative slack under which two eigenvalues of `K` count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// The 3×3 symmetric matrix `K = x xᵗ + T Tᵗ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMatrix(Matrix3<f64>);

impl KMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.0[(0, 0)], self.0[(1, 1)], self.0[(2, 2)]]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        [self.0[(0, 1)], self.0[(0, 2)], self.0[(1, 2)]]
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn symmetry_error(&self) -> f64 {
        (self.0 - self.0.transpose()).abs().max()
    }

    pub fn quadratic_form(&self, e: &Vector3<f64>) -> f64 {
        (e.transpose() * self.0 * e)[0]
    }

    pub fn eigen(&self) -> Eigen3 {
        symmetric_eigen(&self.0)
    }
}

fn require_bipartite(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Dimension(format!(
            "discord needs at least two qubits, got k = {k}"
        )));
    }
    Ok(())
}

/// `K_ij = x_i x_j + Σ_{β≠0} T_{iβ} T_{jβ}` for `i, j ∈ {1, 2, 3}`.
pub fn build_k(t: &CorrelationTensor) -> Result<KMatrix> {
    let k = t.num_qubits();
    require_bipartite(k)?;
    let rest = 1usize << (2 * (k - 1));
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            // β = 0 contributes x_i x_j.
            let v: f64 = (0..rest)
                .map(|beta| t.split_at(i + 1, beta) * t.split_at(j + 1, beta))
                .sum();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(KMatrix(m))
}

/// `(k₁, k₂, k₃)` from the explicit closed forms for `k ∈ {2, 3, 4}`.
pub fn closed_form_eigs(spec: &CatSpec, k: usize) -> Result<[f64; 3]> {
    spec.check_k(k)?;
    let p = spec.p();
    let c = spec.cos_m_pi();
    let pn_c = spec.p_pow(spec.n()) * c;
    let d2 = (1.0 + pn_c).powi(2);
    let tail = spec.p_pow(2 * (spec.n() - k));
    let p2 = p * p;
    match k {
        2 => {
            let k1 = (1.0 - p2).powi(2) / d2;
            let k3 = ((p2 + tail) * (1.0 + p2) + 4.0 * pn_c) / d2;
            Ok([k1, k1 * tail, k3])
        }
        3 => {
            let k1 = 2.0 * (1.0 - p2).powi(2) * (1.0 + p2) / d2;
            let k3 = 2.0 * ((p2 + tail) * (1.0 + p2 * p2) + 4.0 * pn_c) / d2;
            Ok([k1, k1 * tail, k3])
        }
        4 => {
            let n4 = 16.0 * spec.norm_sq().powi(2);
            let p6 = spec.p_pow(6);
            let k1 = n4 * (1.0 - p2) * (1.0 - p6);
            let k3 = n4 * ((1.0 + p6) * (p2 + tail) + 4.0 * pn_c);
            Ok([k1, k1 * tail, k3])
        }
        _ => Err(Error::Unsupported(format!(
            "explicit K spectrum is only tabulated for k in 2..=4, got {k}"
        ))),
    }
}

/// `2^{−k}(k₁ + k₂ + k₃ − k_max)`.
pub fn discord_from_eigs(eigs: [f64; 3], k: usize) -> f64 {
    let sum: f64 = eigs.iter().sum();
    let max = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (sum - max) / (1u64 << k) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscordMethod {
    /// Explicit spectra for `k ≤ 4`; `2^{k−2}(l₁, l₂, l₃)` of the logical
    /// encoding beyond.
    ClosedForm,
    /// Eigenvalues of `K` built from the recursive correlation tensor.
    KMatrix,
}

pub fn geometric_discord(spec: &CatSpec, k: usize, method: DiscordMethod) -> Result<f64> {
    spec.check_k(k)?;
    require_bipartite(k)?;
    let eigs = match method {
        DiscordMethod::ClosedForm => match k {
            2..=4 => closed_form_eigs(spec, k)?,
            _ => encoding::scaled_l_values(spec, k)?,
        },
        DiscordMethod::KMatrix => build_k(&recursive_tensor(spec, k)?)?.eigen().values,
    };
    Ok(discord_from_eigs(eigs, k))
}

/// Parameters of `χ = 2^{−k}[σ₀^{⊗k} + Σ t eᵢ σᵢ⊗σ₀… + Σ s₊ σ₀⊗σ_β + Σ eᵢ s₋ σᵢ⊗σ_β]`.
///
/// `s_plus` and `s_minus` are indexed by the flat index `β` of the last
/// `k − 1` qubits, skipping `β = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalStateSpec {
    pub e: Vector3<f64>,
    pub t: f64,
    pub s_plus: Vec<f64>,
    pub s_minus: Vec<f64>,
}

impl ClassicalStateSpec {
    pub fn new(e: Vector3<f64>, t: f64, s_plus: Vec<f64>, s_minus: Vec<f64>) -> Result<Self> {
        if (e.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "measurement axis must be a unit vector, |e| = {}",
                e.norm()
            )));
        }
        if t.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("|t| = {} exceeds 1", t.abs())));
        }
        let len = s_plus.len() + 1;
        if s_plus.len() != s_minus.len() || !len.is_power_of_two() || !len.trailing_zeros().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "s± must both have length 4^(k-1) - 1, got {} and {}",
                s_plus.len(),
                s_minus.len()
            )));
        }
        Ok(ClassicalStateSpec {
            e,
            t,
            s_plus,
            s_minus,
        })
    }

    /// All-zero parameters (χ = I/2^k) with the given axis.
    pub fn zero(e: Vector3<f64>, k: usize) -> Result<Self> {
        let len = (1usize << (2 * (k - 1))) - 1;
        ClassicalStateSpec::new(e, 0.0, vec![0.0; len], vec![0.0; len])
    }

    pub fn num_qubits(&self) -> usize {
        (self.s_plus.len() + 1).trailing_zeros() as usize / 2 + 1
    }

    /// Fano-Bloch tensor of the classical state.
    pub fn tensor(&self) -> CorrelationTensor {
        let k = self.num_qubits();
        let rest = 1usize << (2 * (k - 1));
        let mut values = vec![0.0; 4 * rest];
        values[0] = 1.0;
        for i in 0..3 {
            values[(i + 1) * rest] = self.t * self.e[i];
        }
        for beta in 1..rest {
            values[beta] = self.s_plus[beta - 1];
            for i in 0..3 {
                values[(i + 1) * rest + beta] = self.e[i] * self.s_minus[beta - 1];
            }
        }
        CorrelationTensor::from_values(k, values).expect("length fixed by construction")
    }
}

/// Stationary `(t, s₊, s₋)` for a fixed axis `e`:
/// `t = Σ eᵢ T_{i0…0}`, `s₊ = T_{0β}`, `s₋ = Σ eᵢ T_{iβ}`.
pub fn optimal_classical_params(t: &CorrelationTensor, e: &Vector3<f64>) -> Result<ClassicalStateSpec> {
    let k = t.num_qubits();
    require_bipartite(k)?;
    let rest = 1usize << (2 * (k - 1));
    let weight = (0..3).map(|i| e[i] * t.split_at(i + 1, 0)).sum();
    let s_plus = (1..rest).map(|beta| t.split_at(0, beta)).collect();
    let s_minus = (1..rest)
        .map(|beta| (0..3).map(|i| e[i] * t.split_at(i + 1, beta)).sum())
        .collect();
    ClassicalStateSpec::new(*e, weight, s_plus, s_minus)
}

/// Assembles `χ` from its parameters. Positivity is not enforced; check
/// [`DensityMatrix::min_eigenvalue`] on the result.
pub fn classical_state_matrix(params: &ClassicalStateSpec) -> Result<DensityMatrix> {
    reconstruct_density(&params.tensor())
}

/// `Tr[(a − b)†(a − b)]`.
pub fn hs_distance_sq(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "cannot compare {}x{} with {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    Ok(a.matrix()
        .iter()
        .zip(b.matrix().iter())
        .map(|(x, y): (&Complex64, &Complex64)| (x - y).norm_sqr())
        .sum())
}

/// `2^{−k} Σ (T_a − T_b)²`, equal to [`hs_distance_sq`] of the two states.
pub fn tensor_distance_sq(a: &CorrelationTensor, b: &CorrelationTensor) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::Dimension("tensor sizes differ".into()));
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    Ok(sum / (1u64 << a.num_qubits()) as f64)
}

/// Distance from `ρ` (given by its tensor) to the stationary classical
/// state along `e`, without materializing the parameters.
fn stationary_distance_sq(t: &CorrelationTensor, e: &Vector3<f64>) -> f64 {
    let k = t.num_qubits();
    let rest = 1usize << (2 * (k - 1));
    let mut acc = 0.0;
    // β = 0 column: T_{i0} against t eᵢ.
    let weight: f64 = (0..3).map(|i| e[i] * t.split_at(i + 1, 0)).sum();
    for i in 0..3 {
        acc += (t.split_at(i + 1, 0) - weight * e[i]).powi(2);
    }
    for beta in 1..rest {
        let s_minus: f64 = (0..3).map(|i| e[i] * t.split_at(i + 1, beta)).sum();
        for i in 0..3 {
            acc += (t.split_at(i + 1, beta) - e[i] * s_minus).powi(2);
        }
    }
    acc / (1u64 << k) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceOptions {
    pub grid_nodes: usize,
    /// Number of best grid nodes refined locally.
    pub starts: usize,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            grid_nodes: sphere::DEFAULT_GRID_NODES,
            starts: 3,
        }
    }
}

/// Minimum over measurement axes of the distance to the stationary classical
/// state, found by grid search plus golden-section refinement. Uses only the
/// directly traced tensor of `ρ`, never `K` or its spectrum.
pub fn brute_force_discord(rho: &DensityMatrix) -> Result<(f64, ClassicalStateSpec)> {
    brute_force_discord_with(rho, BruteForceOptions::default())
}

pub fn brute_force_discord_with(
    rho: &DensityMatrix,
    opts: BruteForceOptions,
) -> Result<(f64, ClassicalStateSpec)> {
    let k = rho.num_qubits();
    require_bipartite(k)?;
    if k > K_MAX_BRUTE {
        return Err(Error::SizeLimit {
            what: "k for brute-force discord",
            got: k,
            max: K_MAX_BRUTE,
        });
    }
    let t = full_tensor(rho)?;
    let best = sphere::minimize(|e| stationary_distance_sq(&t, e), opts.grid_nodes, opts.starts);
    let e = best.point.normalize();
    let params = optimal_classical_params(&t, &e)?;
    Ok((best.value, params))
}

/// Everything known about the discord of one reduced cat state.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscordReport {
    pub spec: CatSpec,
    pub k: usize,
    /// Eigenvalues of `K` in axis order `(x, y, z)`.
    pub eigenvalues: [f64; 3],
    pub d_g_closed: f64,
    pub d_g_recursive: f64,
    pub d_g_encoded: f64,
    pub d_g_brute: Option<f64>,
    /// Measurement axis of the closest classical state.
    pub axis: Vector3<f64>,
    /// `|hs_distance_sq(ρ, χ) − d_g_recursive|` for the assembled closest `χ`.
    pub chi_distance_check: f64,
    pub chi_min_eig: f64,
    pub max_method_diff: f64,
}

/// Computes every route for `(spec, k)`. The brute-force oracle runs only if
/// `brute` is set and `k ≤ 6`.
pub fn discord_report(spec: &CatSpec, k: usize, brute: Option<BruteForceOptions>) -> Result<DiscordReport> {
    spec.check_k(k)?;
    require_bipartite(k)?;
    let rho = crate::cat::reduced_density(spec, k)?;
    let t = recursive_tensor(spec, k)?;
    let kmat = build_k(&t)?;
    let eig = kmat.eigen();
    let d_g_recursive = discord_from_eigs(eig.values, k);
    let d_g_closed = geometric_discord(spec, k, DiscordMethod::ClosedForm)?;
    let d_g_encoded = encoding::discord_encoded(spec, k)?;
    let d_g_brute = match brute {
        Some(opts) if k <= K_MAX_BRUTE => Some(brute_force_discord_with(&rho, opts)?.0),
        _ => None,
    };
    let axis = eig.top_vector(TIE_TOL);
    let chi = classical_state_matrix(&optimal_classical_params(&t, &axis)?)?;
    let chi_distance_check = (hs_distance_sq(&rho, &chi)? - d_g_recursive).abs();
    let chi_min_eig = chi.min_eigenvalue();
    let mut values = vec![d_g_recursive, d_g_encoded, d_g_closed];
    values.extend(d_g_brute);
    let max_method_diff = max_pairwise_diff(&values);
    Ok(DiscordReport {
        spec: *spec,
        k,
        eigenvalues: eig.values,
        d_g_closed,
        d_g_recursive,
        d_g_encoded,
        d_g_brute,
        axis,
        chi_distance_check,
        chi_min_eig,
        max_method_diff,
    })
}

pub(crate) fn max_pairwise_diff(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}
