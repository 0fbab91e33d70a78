//! Two-logical-qubit encoding of the trailing `k − 1` qubits.
//!
//! The states `|±η⟩^{⊗(k−1)}` span a two-dimensional space; with
//! `b± = √((1 ± p^{k−1})/2)` they are written `b₊|0⟩ ± b₋|1⟩` in an
//! orthonormal logical basis, which turns `ρ_{12…k}` into a 4×4 X state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cat::{reduced_density, CatSpec, DensityMatrix};
use crate::discord::{self, brute_force_discord, DiscordMethod, K_MAX_BRUTE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedState {
    pub spec: CatSpec,
    pub k: usize,
    pub b_plus: f64,
    pub b_minus: f64,
    pub rho: DensityMatrix,
}

fn check_encodable(spec: &CatSpec, k: usize) -> Result<()> {
    spec.check_k(k)?;
    if k < 2 {
        return Err(Error::Dimension(format!(
            "encoding needs k >= 2, got {k}"
        )));
    }
    Ok(())
}

/// `(b₊, b₋)` for a block of `k − 1` qubits.
pub fn logical_amplitudes(spec: &CatSpec, k: usize) -> (f64, f64) {
    let pk = spec.p_pow(k - 1);
    (((1.0 + pk) / 2.0).sqrt(), ((1.0 - pk) / 2.0).max(0.0).sqrt())
}

pub fn encode(spec: &CatSpec, k: usize) -> Result<EncodedState> {
    check_encodable(spec, k)?;
    let (ap, am) = (spec.a_plus(), spec.a_minus());
    let (bp, bm) = logical_amplitudes(spec, k);
    let (qp, qm) = spec.q_pm(k);
    let two_n2 = 2.0 * spec.norm_sq();
    // Row amplitudes u_i of |η⟩|η_L⟩; |−η⟩|−η_L⟩ contributes ±u_i by parity.
    let u = [ap * bp, ap * bm, am * bp, am * bm];
    let even = |i: usize| i == 0 || i == 3;
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let w = match (even(i), even(j)) {
                (true, true) => qp,
                (false, false) => qm,
                _ => continue,
            };
            m[(i, j)] = Complex64::new(two_n2 * w * u[i] * u[j], 0.0);
        }
    }
    Ok(EncodedState {
        spec: *spec,
        k,
        b_plus: bp,
        b_minus: bm,
        rho: DensityMatrix::new(m)?,
    })
}

/// Nonvanishing correlations of the encoded state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTensor {
    pub r00: f64,
    pub r11: f64,
    pub r22: f64,
    pub r33: f64,
    pub r03: f64,
    pub r30: f64,
}

impl RTensor {
    /// `(l₁, l₂, l₃) = (R₁₁², R₂₂², R₃₀² + R₃₃²)`, the spectrum of the
    /// two-qubit `K` of the encoded state.
    pub fn l_values(&self) -> [f64; 3] {
        [
            self.r11 * self.r11,
            self.r22 * self.r22,
            self.r30 * self.r30 + self.r33 * self.r33,
        ]
    }

    /// Value at flat two-qubit index `4α + β`.
    pub fn at(&self, flat: usize) -> f64 {
        match flat {
            0 => self.r00,
            5 => self.r11,
            10 => self.r22,
            15 => self.r33,
            3 => self.r03,
            12 => self.r30,
            _ => 0.0,
        }
    }
}

pub fn r_tensor(spec: &CatSpec, k: usize) -> Result<RTensor> {
    check_encodable(spec, k)?;
    let n = spec.n();
    let p = spec.p();
    let c = spec.cos_m_pi();
    let two_n2 = 2.0 * spec.norm_sq();
    let r11 = two_n2 * ((1.0 - p * p) * (1.0 - spec.p_pow(2 * (k - 1)))).max(0.0).sqrt();
    Ok(RTensor {
        r00: 1.0,
        r11,
        r22: -r11 * spec.p_pow(n - k) * c,
        r33: two_n2 * (spec.p_pow(k) + spec.p_pow(n - k) * c),
        r03: two_n2 * (spec.p_pow(k - 1) + spec.p_pow(n - k + 1) * c),
        r30: two_n2 * (p + spec.p_pow(n - 1) * c),
    })
}

pub fn l_values(spec: &CatSpec, k: usize) -> Result<[f64; 3]> {
    Ok(r_tensor(spec, k)?.l_values())
}

/// `2^{k−2}(l₁, l₂, l₃)`, the `K` spectrum of the unencoded state.
pub fn scaled_l_values(spec: &CatSpec, k: usize) -> Result<[f64; 3]> {
    let scale = (1u64 << (k - 2)) as f64;
    Ok(l_values(spec, k)?.map(|l| scale * l))
}

/// `¼ min{l₁ + l₂, l₁ + l₃, l₂ + l₃}`.
pub fn discord_encoded(spec: &CatSpec, k: usize) -> Result<f64> {
    Ok(discord::discord_from_eigs(l_values(spec, k)?, 2))
}

/// Which scaling between the two discord routes the data supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `d_rec = d_enc`.
    Equal,
    /// `d_rec = 2^{k−2} d_enc`.
    PowerOfTwo,
    /// Both relations hold (`k = 2`, or both discords vanish).
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SchemeEquivalence {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub m: u8,
    pub d_rec: f64,
    pub d_enc: f64,
    pub d_brute: f64,
    /// `d_rec / d_enc`, undefined when both vanish.
    pub ratio: Option<f64>,
    pub relation: Relation,
    pub brute_matches_rec: bool,
    pub brute_matches_enc: bool,
}

/// Below this both discords count as zero and the ratio is undefined.
const ZERO_DISCORD: f64 = 1e-12;

/// Computes the unencoded, encoded and brute-force discords and classifies
/// their relation with tolerance `tol`.
pub fn scheme_equivalence_report(spec: &CatSpec, k: usize, tol: f64) -> Result<SchemeEquivalence> {
    check_encodable(spec, k)?;
    if k > K_MAX_BRUTE {
        return Err(Error::SizeLimit {
            what: "k for scheme equivalence",
            got: k,
            max: K_MAX_BRUTE,
        });
    }
    let d_rec = discord::geometric_discord(spec, k, DiscordMethod::KMatrix)?;
    let d_enc = discord_encoded(spec, k)?;
    let (d_brute, _) = brute_force_discord(&reduced_density(spec, k)?)?;
    let scale = (1u64 << (k - 2)) as f64;
    let both_zero = d_rec.abs() < ZERO_DISCORD && d_enc.abs() < ZERO_DISCORD;
    let ratio = (!both_zero).then(|| d_rec / d_enc);
    let equal = (d_rec - d_enc).abs() <= tol;
    let scaled = (d_rec - scale * d_enc).abs() <= tol;
    let relation = match (equal, scaled) {
        (true, true) => Relation::Both,
        (true, false) => Relation::Equal,
        (false, true) => Relation::PowerOfTwo,
        (false, false) => Relation::Neither,
    };
    Ok(SchemeEquivalence {
        n: spec.n(),
        k,
        p: spec.p(),
        m: spec.parity().m(),
        d_rec,
        d_enc,
        d_brute,
        ratio,
        relation,
        brute_matches_rec: (d_brute - d_rec).abs() <= tol,
        brute_matches_enc: (d_brute - d_enc).abs() <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::Parity;
    use crate::discord::{build_k, closed_form_eigs};
    use crate::fano_bloch::{full_tensor, recursive_tensor};
    use approx::assert_relative_eq;

    fn spec(n: usize, p: f64, parity: Parity) -> CatSpec {
        CatSpec::new(n, p, parity).unwrap()
    }

    #[test]
    fn two_qubits_encode_trivially() {
        for (n, p, par) in [(4, 0.5, Parity::Even), (5, 0.3, Parity::Odd), (2, 0.0, Parity::Even)] {
            let s = spec(n, p, par);
            let enc = encode(&s, 2).unwrap();
            assert!(enc.rho.max_abs_diff(&reduced_density(&s, 2).unwrap()) < 1e-15);
            assert_eq!((enc.b_plus, enc.b_minus), (s.a_plus(), s.a_minus()));
        }
    }

    #[test]
    fn encoded_corner_entry() {
        let enc = encode(&spec(4, 0.5, Parity::Even), 3).unwrap();
        assert_relative_eq!(enc.rho.get(0, 0).re, 45.0 / 68.0, epsilon = 1e-15);
        assert_relative_eq!(enc.b_plus * enc.b_plus, 5.0 / 8.0, epsilon = 1e-15);
        assert!(enc.rho.x_shape_residual() < 1e-15);
        assert!(enc.rho.min_eigenvalue() > -1e-14);
    }

    #[test]
    fn r_tensor_matches_trace() {
        for (n, k, p, par) in [(4, 3, 0.5, Parity::Even), (6, 4, 0.3, Parity::Odd), (7, 5, 0.8, Parity::Even)] {
            let s = spec(n, p, par);
            let r = r_tensor(&s, k).unwrap();
            let t = full_tensor(&encode(&s, k).unwrap().rho).unwrap();
            for flat in 0..16 {
                assert!((t.values()[flat] - r.at(flat)).abs() < 1e-14, "({n},{k}) flat {flat}");
            }
        }
        let r = r_tensor(&spec(4, 0.5, Parity::Even), 3).unwrap();
        assert_relative_eq!(r.r11, 16.0 / 17.0 * (0.75f64 * 0.9375).sqrt(), epsilon = 1e-15);
        assert!((r.r11 - 0.789200).abs() < 1e-6);
    }

    #[test]
    fn r_tensor_at_k2_is_the_two_qubit_tensor() {
        let s = spec(4, 0.5, Parity::Even);
        let r = r_tensor(&s, 2).unwrap();
        let t = recursive_tensor(&s, 2).unwrap();
        for flat in 0..16 {
            assert!((t.values()[flat] - r.at(flat)).abs() < 1e-15);
        }
        assert_relative_eq!(r.r03, r.r30, epsilon = 1e-16);
    }

    #[test]
    fn ghz_limit_keeps_only_r11() {
        let r = r_tensor(&spec(5, 0.0, Parity::Even), 3).unwrap();
        assert_eq!((r.r00, r.r11, r.r22, r.r33, r.r03, r.r30), (1.0, 1.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn encoded_discord_examples() {
        assert_relative_eq!(discord_encoded(&spec(2, 0.0, Parity::Even), 2).unwrap(), 0.5, epsilon = 1e-15);
        let d = discord_encoded(&spec(4, 0.5, Parity::Even), 3).unwrap();
        assert_relative_eq!(d, 225.0 / 1156.0, epsilon = 1e-15);
        for k in 2..5 {
            assert!(discord_encoded(&spec(5, 1.0, Parity::Even), k).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn encoded_state_brute_force() {
        let enc = encode(&spec(5, 0.6, Parity::Odd), 4).unwrap();
        let (d, _) = brute_force_discord(&enc.rho).unwrap();
        assert!((d - discord_encoded(&enc.spec, 4).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn spectra_scale_by_power_of_two() {
        let s = spec(6, 0.3, Parity::Even);
        for k in 2..=4 {
            let scaled = scaled_l_values(&s, k).unwrap();
            let closed = closed_form_eigs(&s, k).unwrap();
            let numeric = build_k(&recursive_tensor(&s, k).unwrap()).unwrap().eigen().values;
            for i in 0..3 {
                assert!((scaled[i] - closed[i]).abs() <= 1e-10 * closed[i].abs().max(1e-300));
                assert!((scaled[i] - numeric[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn equivalence_report() {
        let r2 = scheme_equivalence_report(&spec(4, 0.5, Parity::Even), 2, 1e-8).unwrap();
        assert_eq!(r2.relation, Relation::Both);
        assert_relative_eq!(r2.ratio.unwrap(), 1.0, epsilon = 1e-14);
        let r3 = scheme_equivalence_report(&spec(5, 0.6, Parity::Odd), 3, 1e-8).unwrap();
        assert_eq!(r3.relation, Relation::Equal);
        assert!(r3.brute_matches_rec && r3.brute_matches_enc);
        let ghz = scheme_equivalence_report(&spec(5, 0.0, Parity::Even), 3, 1e-8).unwrap();
        assert_eq!(ghz.ratio, None);
        assert!(scheme_equivalence_report(&spec(8, 0.5, Parity::Even), 7, 1e-8).is_err());
    }
}
