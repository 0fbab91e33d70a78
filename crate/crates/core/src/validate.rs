//! Self-validation: every structural identity of the library, checked over a
//! grid of cat states plus seeded random overlaps.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cat::{
    cat_state_vector, coherent_dicke_coefficients, partial_trace, reduced_density, CatSpec,
    DensityMatrix, Parity,
};
use crate::discord::{
    brute_force_discord, build_k, classical_state_matrix, closed_form_eigs, discord_from_eigs,
    hs_distance_sq, optimal_classical_params, TIE_TOL,
};
use crate::encoding::{discord_encoded, encode, l_values, r_tensor};
use crate::error::{Error, Result};
use crate::fano_bloch::{full_tensor, reconstruct_density, recursive_tensor};
use crate::sphere::golden_spiral;

pub const MAX_N_LIMIT: usize = 10;
pub const MAX_VIOLATIONS: usize = 10;

/// Overlaps checked for every `n`, in addition to the random draws.
pub const GRID_P: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.99];

/// Upper end of the random overlap draws. Closer to 1 the explicit odd-parity
/// spectra cancel `4pⁿ cos mπ` against a term near 4 and stop being accurate
/// references at the `1e−11` level.
pub const P_DRAW_MAX: f64 = 0.99;

/// Entrywise comparison tolerance for matrices and tensors.
const ENTRY_TOL: f64 = 1e-12;
/// Agreement between the brute-force oracle and the closed routes.
const ORACLE_TOL: f64 = 1e-8;
/// Relative tolerance of the explicit `K` spectra.
const SPECTRUM_REL_TOL: f64 = 1e-11;
/// Largest `k` for which full eigendecompositions of `ρ` are checked.
const K_MAX_EIGEN: usize = 7;
/// Largest `k` for the tensor checks.
const K_MAX_TENSOR_CHECKS: usize = 6;
/// Largest `k` for brute-force checks.
const K_MAX_ORACLE: usize = 5;
const VARIATIONAL_NODES: usize = 64;
const MAX_FORM_NODES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    pub max_n: usize,
    /// Tolerance of the identities that hold to roughly `1e−10`: Frobenius,
    /// trace identity, variational bound and the zero-discord fixed point.
    pub tol: f64,
    pub seed: u64,
    /// Random overlaps in `[0, P_DRAW_MAX)` drawn per `n`.
    pub random_draws: usize,
    /// Added to one entry of every recursive tensor before comparison.
    pub inject_fault: Option<f64>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            max_n: 8,
            tol: 1e-10,
            seed: 0,
            random_draws: 2,
            inject_fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub context: String,
    pub value: f64,
    pub tol: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}]: {:.3e} exceeds {:.1e}",
            self.check, self.context, self.value, self.tol
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub max_n: usize,
    pub tol: f64,
    pub seed: u64,
    pub checks: u64,
    pub failures: u64,
    pub by_check: BTreeMap<String, Tally>,
    /// The first violations in grid order.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "validate: max_n = {}, tol = {:e}, seed = {}",
            self.max_n, self.tol, self.seed
        )?;
        for (name, t) in &self.by_check {
            let status = if t.failed == 0 { "ok" } else { "FAIL" };
            writeln!(f, "  {status:<4} {name:<32} {:>6} passed {:>6} failed", t.passed, t.failed)?;
        }
        writeln!(f, "{} checks, {} failures", self.checks, self.failures)?;
        if !self.violations.is_empty() {
            writeln!(f, "first violations:")?;
            for v in &self.violations {
                writeln!(f, "  {v}")?;
            }
        }
        Ok(())
    }
}

/// Collects check outcomes for one unit of work.
#[derive(Default)]
struct Ledger {
    by_check: BTreeMap<&'static str, Tally>,
    violations: Vec<Violation>,
}

impl Ledger {
    /// Records `value ≤ tol`. NaN fails.
    fn le(&mut self, check: &'static str, context: &str, value: f64, tol: f64) {
        let tally = self.by_check.entry(check).or_default();
        if value <= tol {
            tally.passed += 1;
        } else {
            tally.failed += 1;
            self.violations.push(Violation {
                check: check.to_string(),
                context: context.to_string(),
                value,
                tol,
            });
        }
    }

    /// Records a fallible computation; errors count as failures.
    fn ok<T>(&mut self, check: &'static str, context: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.by_check.entry(check).or_default().failed += 1;
                self.violations.push(Violation {
                    check: check.to_string(),
                    context: format!("{context}: {e}"),
                    value: f64::NAN,
                    tol: 0.0,
                });
                None
            }
        }
    }

    fn merge(&mut self, other: Ledger) {
        for (k, t) in other.by_check {
            let e = self.by_check.entry(k).or_default();
            e.passed += t.passed;
            e.failed += t.failed;
        }
        self.violations.extend(other.violations);
    }
}

fn specs(opts: &ValidateOptions) -> Vec<CatSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    for n in 1..=opts.max_n {
        let mut ps: Vec<f64> = GRID_P.to_vec();
        ps.extend((0..opts.random_draws).map(|_| rng.random_range(0.0..P_DRAW_MAX)));
        for parity in [Parity::Even, Parity::Odd] {
            for &p in &ps {
                if let Ok(s) = CatSpec::new(n, p, parity) {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn relative(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn check_spec(spec: &CatSpec, opts: &ValidateOptions) -> Ledger {
    let mut l = Ledger::default();
    let n = spec.n();
    let ctx0 = format!("n={n} p={} m={}", spec.p(), spec.parity().m());
    let Some(psi) = l.ok("cat_state_vector", &ctx0, cat_state_vector(spec)) else {
        return l;
    };
    let norm: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum();
    l.le("cat_state_norm", &ctx0, (norm - 1.0).abs(), ENTRY_TOL);

    for k in 1..=n {
        let ctx = format!("{ctx0} k={k}");
        let Some(rho) = l.ok("reduced_density", &ctx, reduced_density(spec, k)) else {
            continue;
        };
        let first: Vec<usize> = (0..k).collect();
        if let Some(pt) = l.ok("partial_trace", &ctx, partial_trace(&psi, &first)) {
            l.le("partial_trace_oracle", &ctx, pt.max_abs_diff(&rho), ENTRY_TOL);
        }
        // Exchange symmetry: keep the last k qubits, and an interleaved subset.
        let last: Vec<usize> = (n - k..n).collect();
        if let Some(pt) = l.ok("partial_trace", &ctx, partial_trace(&psi, &last)) {
            l.le("exchange_symmetry", &ctx, pt.max_abs_diff(&rho), ENTRY_TOL);
        }
        let mut spread: Vec<usize> = (0..n).step_by(2).chain((1..n).step_by(2)).take(k).collect();
        spread.sort_unstable();
        if let Some(pt) = l.ok("partial_trace", &ctx, partial_trace(&psi, &spread)) {
            l.le("exchange_symmetry", &ctx, pt.max_abs_diff(&rho), ENTRY_TOL);
        }
        l.le("hermitian", &ctx, rho.hermiticity_error(), ENTRY_TOL);
        l.le("unit_trace", &ctx, (rho.trace() - 1.0).abs(), ENTRY_TOL);
        l.le("parity_commutator", &ctx, rho.parity_commutator_norm(), ENTRY_TOL);
        if k <= K_MAX_EIGEN {
            check_spectrum(&mut l, spec, k, &rho, &ctx);
        }
        if (2..=K_MAX_TENSOR_CHECKS).contains(&k) || k == 1 {
            check_tensors(&mut l, spec, k, &rho, opts, &ctx);
        }
        if (2..=K_MAX_TENSOR_CHECKS).contains(&k) {
            check_discord(&mut l, spec, k, &rho, opts, &ctx);
            check_encoding(&mut l, spec, k, &rho, &ctx);
        }
    }
    l
}

fn check_spectrum(l: &mut Ledger, spec: &CatSpec, k: usize, rho: &DensityMatrix, ctx: &str) {
    let eig = rho.eigenvalues();
    l.le("psd", ctx, -eig[eig.len() - 1], 1e-10);
    if eig.len() > 2 {
        l.le("rank_two", ctx, eig[2].abs(), 1e-10);
    }
    if k < spec.n() {
        if let Some((wp, wm)) = l.ok("rank_two_weights", ctx, spec.rank_two_weights(k)) {
            let (hi, lo) = (wp.max(wm), wp.min(wm));
            let err = (eig[0] - hi).abs().max((eig[1] - lo).abs());
            l.le("rank_two_weights", ctx, err, 1e-10);
        }
    } else {
        l.le("pure_projector", ctx, (rho.purity() - 1.0).abs(), 1e-10);
    }
}

fn check_tensors(
    l: &mut Ledger,
    spec: &CatSpec,
    k: usize,
    rho: &DensityMatrix,
    opts: &ValidateOptions,
    ctx: &str,
) {
    let Some(direct) = l.ok("full_tensor", ctx, full_tensor(rho)) else {
        return;
    };
    let Some(mut rec) = l.ok("recursive_tensor", ctx, recursive_tensor(spec, k)) else {
        return;
    };
    if let Some(eps) = opts.inject_fault {
        let last = rec.values().len() - 1;
        rec.values_mut()[last] += eps;
    }
    l.le("recursion_mismatch", ctx, rec.max_abs_diff(&direct), ENTRY_TOL);
    l.ok("tensor_invariants", ctx, direct.check_invariants(ENTRY_TOL));
    l.le("parity_selection", ctx, direct.parity_violation(), ENTRY_TOL);
    if k >= 2 {
        let mut cyclic: Vec<usize> = (1..k).collect();
        cyclic.push(0);
        for perm in [cyclic, (0..k).rev().collect()] {
            if let Some(t) = l.ok("permutation_symmetry", ctx, direct.permuted(&perm)) {
                l.le("permutation_symmetry", ctx, t.max_abs_diff(&direct), ENTRY_TOL);
            }
        }
    }
    if let Some(back) = l.ok("round_trip", ctx, reconstruct_density(&direct)) {
        l.le("round_trip", ctx, back.max_abs_diff(rho), ENTRY_TOL);
    }
    let frob = direct.sum_of_squares() / (1u64 << k) as f64;
    l.le("frobenius_identity", ctx, (frob - rho.purity()).abs(), opts.tol);
}

fn check_discord(
    l: &mut Ledger,
    spec: &CatSpec,
    k: usize,
    rho: &DensityMatrix,
    opts: &ValidateOptions,
    ctx: &str,
) {
    let Some(t) = l.ok("full_tensor", ctx, full_tensor(rho)) else {
        return;
    };
    let Some(kmat) = l.ok("build_k", ctx, build_k(&t)) else {
        return;
    };
    l.le("k_symmetric", ctx, kmat.symmetry_error(), 1e-14);
    l.le("k_diagonal", ctx, kmat.max_off_diagonal(), ENTRY_TOL);
    let eig = kmat.eigen();
    l.le("k_psd", ctx, -eig.sorted_values()[2], ENTRY_TOL);
    let d_g = discord_from_eigs(eig.values, k);
    l.le("discord_nonnegative", ctx, -d_g, ENTRY_TOL);

    let norm_sq = t.sum_of_squares() - 1.0 - (1..4usize.pow(k as u32 - 1)).map(|b| t.split_at(0, b).powi(2)).sum::<f64>();
    l.le("trace_identity", ctx, (kmat.trace() - norm_sq).abs(), opts.tol);
    if spec.p() >= 0.0 {
        let [k1, k2, _] = eig.values;
        l.le("ordering_k2_le_k1", ctx, k2 - k1, ENTRY_TOL);
    }
    if k <= 4 {
        let rec = recursive_tensor(spec, k).and_then(|t| build_k(&t)).map(|m| m.eigen().values);
        let closed = closed_form_eigs(spec, k);
        if let (Some(rec), Some(closed)) = (l.ok("build_k", ctx, rec), l.ok("closed_form_eigs", ctx, closed)) {
            let err = (0..3).map(|i| relative(rec[i], closed[i])).fold(0.0, f64::max);
            l.le("closed_form_spectrum", ctx, err, SPECTRUM_REL_TOL);
        }
    }

    // Variational bound over a coarse set of axes.
    let scale = (1u64 << k) as f64;
    let mut worst: f64 = 0.0;
    for e in golden_spiral(VARIATIONAL_NODES) {
        let d = (kmat.trace() - kmat.quadratic_form(&e)) / scale;
        worst = worst.max(d_g - d);
    }
    l.le("variational_bound", ctx, worst, opts.tol);

    // max eᵗKe over the grid approaches λ_max within the grid's resolution.
    let sorted = eig.sorted_values();
    let grid_max = golden_spiral(MAX_FORM_NODES)
        .iter()
        .map(|e| kmat.quadratic_form(e))
        .fold(f64::NEG_INFINITY, f64::max);
    let spacing_sq = 4.0 * std::f64::consts::PI / MAX_FORM_NODES as f64;
    let slack = (sorted[0] - sorted[2]) * spacing_sq + ENTRY_TOL;
    l.le("max_form", ctx, (sorted[0] - grid_max).max(grid_max - sorted[0] - ENTRY_TOL), slack);

    let axis = eig.top_vector(TIE_TOL);
    let chi = optimal_classical_params(&t, &axis).and_then(|p| classical_state_matrix(&p));
    let Some(chi) = l.ok("classical_state", ctx, chi) else {
        return;
    };
    if let Some(d) = l.ok("chi_distance", ctx, hs_distance_sq(rho, &chi)) {
        l.le("chi_distance", ctx, (d - d_g).abs(), 1e-9);
    }
    l.le("chi_unit_trace", ctx, (chi.trace() - 1.0).abs(), ENTRY_TOL);

    if k <= K_MAX_ORACLE {
        if let Some((brute, _)) = l.ok("brute_force", ctx, brute_force_discord(rho)) {
            l.le("oracle_agreement", ctx, (brute - d_g).abs(), ORACLE_TOL);
        }
        if let Some((fixed, _)) = l.ok("brute_force", ctx, brute_force_discord(&chi)) {
            l.le("zero_discord_fixed_point", ctx, fixed, opts.tol);
        }
    }
}

fn check_encoding(l: &mut Ledger, spec: &CatSpec, k: usize, rho: &DensityMatrix, ctx: &str) {
    let Some(enc) = l.ok("encode", ctx, encode(spec, k)) else {
        return;
    };
    l.le("encoded_b_norm", ctx, (enc.b_plus.powi(2) + enc.b_minus.powi(2) - 1.0).abs(), ENTRY_TOL);
    l.le("encoded_x_shape", ctx, enc.rho.x_shape_residual(), ENTRY_TOL);
    l.le("encoded_psd", ctx, -enc.rho.min_eigenvalue(), 1e-10);
    if k == 2 {
        l.le("encode_k2_identity", ctx, enc.rho.max_abs_diff(rho), ENTRY_TOL);
    }
    let Some(t) = l.ok("full_tensor", ctx, full_tensor(&enc.rho)) else {
        return;
    };
    if let Some(r) = l.ok("r_tensor", ctx, r_tensor(spec, k)) {
        let err = (0..16).map(|i| (t.values()[i] - r.at(i)).abs()).fold(0.0, f64::max);
        l.le("r_tensor_support", ctx, err, ENTRY_TOL);
    }
    if k <= 4 {
        let closed = closed_form_eigs(spec, k);
        let lv = l_values(spec, k);
        if let (Some(c), Some(lv)) = (l.ok("closed_form_eigs", ctx, closed), l.ok("l_values", ctx, lv)) {
            let scale = (1u64 << (k - 2)) as f64;
            let err = (0..3).map(|i| relative(scale * lv[i], c[i])).fold(0.0, f64::max);
            l.le("power_of_two_scaling", ctx, err, 1e-10);
        }
    }
    if k <= K_MAX_ORACLE {
        let d_enc = discord_encoded(spec, k);
        let brute = brute_force_discord(&enc.rho).map(|r| r.0);
        if let (Some(d), Some(b)) = (l.ok("discord_encoded", ctx, d_enc), l.ok("brute_force", ctx, brute)) {
            l.le("encoded_oracle", ctx, (d - b).abs(), ORACLE_TOL);
        }
    }
}

fn check_global(opts: &ValidateOptions) -> Ledger {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    for n in 1..=opts.max_n {
        for _ in 0..4 {
            let eta = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let c = coherent_dicke_coefficients(n, eta);
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            l.le("dicke_normalization", &format!("n={n} eta={eta}"), (norm - 1.0).abs(), ENTRY_TOL);
        }
    }
    // Classical states with random parameters have zero discord.
    for k in 2..=3 {
        let e = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.5).normalize();
        let rho = DensityMatrix::maximally_mixed(k);
        let t = full_tensor(&rho).expect("small k");
        let chi = optimal_classical_params(&t, &e).and_then(|p| classical_state_matrix(&p));
        if let Some(chi) = l.ok("classical_state", "maximally mixed", chi) {
            l.le("product_fixed_point", &format!("k={k}"), chi.max_abs_diff(&rho), ENTRY_TOL);
        }
    }
    l
}

/// Runs the whole suite. `max_n` above [`MAX_N_LIMIT`] is rejected.
pub fn run(opts: &ValidateOptions) -> Result<ValidationReport> {
    if opts.max_n == 0 || opts.max_n > MAX_N_LIMIT {
        return Err(Error::SizeLimit {
            what: "max-n",
            got: opts.max_n,
            max: MAX_N_LIMIT,
        });
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", opts.tol)));
    }
    let specs = specs(opts);
    let parts: Vec<Ledger> = specs.par_iter().map(|s| check_spec(s, opts)).collect();
    let mut all = check_global(opts);
    for part in parts {
        all.merge(part);
    }
    let checks = all.by_check.values().map(|t| t.passed + t.failed).sum();
    let failures = all.by_check.values().map(|t| t.failed).sum();
    all.violations.truncate(MAX_VIOLATIONS);
    Ok(ValidationReport {
        max_n: opts.max_n,
        tol: opts.tol,
        seed: opts.seed,
        checks,
        failures,
        by_check: all.by_check.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        violations: all.violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let r = run(&ValidateOptions {
            max_n: 4,
            ..Default::default()
        })
        .unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.checks > 500);
    }

    #[test]
    fn fault_injection_is_caught() {
        let r = run(&ValidateOptions {
            max_n: 3,
            inject_fault: Some(1e-6),
            ..Default::default()
        })
        .unwrap();
        assert!(!r.passed());
        assert_eq!(r.violations.len(), MAX_VIOLATIONS);
        assert!(r.violations.iter().all(|v| v.check == "recursion_mismatch"));
        assert!(r.by_check["recursion_mismatch"].failed > 0);
    }

    #[test]
    fn rejects_bad_options() {
        let too_big = ValidateOptions {
            max_n: 11,
            ..Default::default()
        };
        assert!(matches!(run(&too_big), Err(Error::SizeLimit { .. })));
        let bad_tol = ValidateOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert!(run(&bad_tol).is_err());
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let opts = ValidateOptions::default();
        assert_eq!(specs(&opts), specs(&opts));
        let other = ValidateOptions {
            seed: 7,
            ..Default::default()
        };
        assert_ne!(specs(&opts), specs(&other));
    }
}
