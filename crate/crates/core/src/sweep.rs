//! Parameter sweeps with byte-stable CSV and JSON output.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::cat::{CatSpec, Parity};
use crate::discord::{self, BruteForceOptions, K_MAX_BRUTE};
use crate::encoding;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "n,k,p,m,k1,k2,k3,dg_recursive,dg_encoded,dg_brute,max_method_diff,e1,e2,e3,chi_min_eig,flags";

/// Odd-parity points at or above this overlap are reported as singular.
pub const ODD_P_MAX: f64 = 1.0 - 1e-6;

/// `χ` counts as non-positive below this eigenvalue.
pub const CHI_PSD_TOL: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Method {
    Recursive,
    Encoded,
    Brute,
    All,
}

/// Which discord columns a row fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSet {
    pub recursive: bool,
    pub encoded: bool,
    pub brute: bool,
}

impl MethodSet {
    pub const ALL: MethodSet = MethodSet {
        recursive: true,
        encoded: true,
        brute: true,
    };

    pub fn from_methods(methods: &[Method]) -> MethodSet {
        let has = |m: Method| methods.contains(&m) || methods.contains(&Method::All);
        MethodSet {
            recursive: has(Method::Recursive),
            encoded: has(Method::Encoded),
            brute: has(Method::Brute),
        }
    }
}

/// Evenly spaced overlaps from `start` to `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl PGrid {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<PGrid> {
        if steps == 0 {
            return Err(Error::InvalidParameter("p grid needs at least one step".into()));
        }
        for p in [start, end] {
            if !p.is_finite() || p <= -1.0 || p > 1.0 {
                return Err(Error::InvalidParameter(format!("p = {p} outside (-1, 1]")));
            }
        }
        Ok(PGrid { start, end, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.end
                } else {
                    self.start + (self.end - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub p: PGrid,
    pub parities: Vec<Parity>,
    pub methods: MethodSet,
    /// Agreement tolerance between discord routes.
    pub tol: f64,
    pub brute: BruteForceOptions,
}

impl SweepConfig {
    /// Grid points in emission order: `n`, then `k`, then `m`, then ascending `p`.
    pub fn points(&self) -> Result<Vec<(usize, usize, f64, Parity)>> {
        if self.ns.is_empty() || self.ks.is_empty() || self.parities.is_empty() {
            return Err(Error::InvalidParameter("empty sweep grid".into()));
        }
        let mut ns = self.ns.clone();
        ns.sort_unstable();
        ns.dedup();
        let mut ks = self.ks.clone();
        ks.sort_unstable();
        ks.dedup();
        let mut parities = self.parities.clone();
        parities.sort_by_key(|p| p.m());
        parities.dedup();
        let mut ps = self.p.values();
        ps.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        for &n in &ns {
            for &k in ks.iter().filter(|&&k| k >= 2 && k <= n) {
                for &parity in &parities {
                    for &p in &ps {
                        out.push((n, k, p, parity));
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("no (n, k) pair with 2 <= k <= n".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub m: u8,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
    pub dg_recursive: Option<f64>,
    pub dg_encoded: Option<f64>,
    pub dg_brute: Option<f64>,
    pub max_method_diff: Option<f64>,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub e3: Option<f64>,
    pub chi_min_eig: Option<f64>,
    pub flags: String,
}

impl ResultRow {
    fn empty(n: usize, k: usize, p: f64, parity: Parity, flags: String) -> ResultRow {
        ResultRow {
            n,
            k,
            p,
            m: parity.m(),
            k1: None,
            k2: None,
            k3: None,
            dg_recursive: None,
            dg_encoded: None,
            dg_brute: None,
            max_method_diff: None,
            e1: None,
            e2: None,
            e3: None,
            chi_min_eig: None,
            flags,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.flags.split(';').any(|f| f == "singular")
    }

    pub fn has_error(&self) -> bool {
        self.flags.split(';').any(|f| f.starts_with("error:"))
    }

    pub fn to_csv_line(&self) -> String {
        let mut s = format!("{},{},{},{}", self.n, self.k, fmt_f64(self.p), self.m);
        for v in [
            self.k1,
            self.k2,
            self.k3,
            self.dg_recursive,
            self.dg_encoded,
            self.dg_brute,
            self.max_method_diff,
            self.e1,
            self.e2,
            self.e3,
            self.chi_min_eig,
        ] {
            s.push(',');
            if let Some(v) = v {
                s.push_str(&fmt_f64(v));
            }
        }
        s.push(',');
        s.push_str(&csv_field(&self.flags));
        s
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Evaluates one grid point. Per-point failures land in the flags column.
pub fn compute_row(n: usize, k: usize, p: f64, parity: Parity, cfg: &SweepConfig) -> ResultRow {
    if parity == Parity::Odd && p >= ODD_P_MAX {
        return ResultRow::empty(n, k, p, parity, "singular".into());
    }
    let spec = match CatSpec::new(n, p, parity) {
        Ok(s) => s,
        Err(Error::SingularNormalization { .. }) => {
            return ResultRow::empty(n, k, p, parity, "singular".into())
        }
        Err(e) => return ResultRow::empty(n, k, p, parity, format!("error:{e}")),
    };
    match fill_row(&spec, k, cfg) {
        Ok(row) => row,
        Err(e) => ResultRow::empty(n, k, p, parity, format!("error:{e}")),
    }
}

fn fill_row(spec: &CatSpec, k: usize, cfg: &SweepConfig) -> Result<ResultRow> {
    let mut row = ResultRow::empty(spec.n(), k, spec.p(), spec.parity(), String::new());
    let report = discord::discord_report(spec, k, None)?;
    let [k1, k2, k3] = report.eigenvalues;
    row.k1 = Some(k1);
    row.k2 = Some(k2);
    row.k3 = Some(k3);
    row.e1 = Some(report.axis.x);
    row.e2 = Some(report.axis.y);
    row.e3 = Some(report.axis.z);
    row.chi_min_eig = Some(report.chi_min_eig);
    let m = cfg.methods;
    if m.recursive {
        row.dg_recursive = Some(report.d_g_recursive);
    }
    if m.encoded {
        row.dg_encoded = Some(encoding::discord_encoded(spec, k)?);
    }
    if m.brute && k <= K_MAX_BRUTE {
        let rho = crate::cat::reduced_density(spec, k)?;
        row.dg_brute = Some(discord::brute_force_discord_with(&rho, cfg.brute)?.0);
    }
    let values: Vec<f64> = [row.dg_recursive, row.dg_encoded, row.dg_brute]
        .into_iter()
        .flatten()
        .collect();
    let diff = discord::max_pairwise_diff(&values);
    row.max_method_diff = Some(diff);
    let mut flags = Vec::new();
    if diff > cfg.tol {
        flags.push("mismatch".to_string());
    }
    if report.chi_min_eig < CHI_PSD_TOL {
        flags.push("chi_not_psd".to_string());
    }
    if m.brute && k > K_MAX_BRUTE {
        flags.push("brute_skipped".to_string());
    }
    row.flags = flags.join(";");
    Ok(row)
}

/// Evaluates every grid point on a pool of `jobs` threads (0 = all cores),
/// returning rows in grid order.
pub fn run_sweep(cfg: &SweepConfig, jobs: usize) -> Result<Vec<ResultRow>> {
    let points = cfg.points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|&(n, k, p, parity)| compute_row(n, k, p, parity, cfg))
            .collect()
    }))
}

pub fn write_csv(rows: &[ResultRow], mut w: impl Write) -> std::io::Result<()> {
    let mut buf = String::with_capacity(256 * (rows.len() + 1));
    buf.push_str(CSV_HEADER);
    buf.push('\n');
    for row in rows {
        let _ = writeln!(buf, "{}", row.to_csv_line());
    }
    w.write_all(buf.as_bytes())
}

pub fn write_json(rows: &[ResultRow], mut w: impl Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, rows)?;
    w.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(ns: Vec<usize>, ks: Vec<usize>, p: PGrid) -> SweepConfig {
        SweepConfig {
            ns,
            ks,
            p,
            parities: vec![Parity::Odd, Parity::Even],
            methods: MethodSet::ALL,
            tol: 1e-8,
            brute: BruteForceOptions::default(),
        }
    }

    #[test]
    fn p_grid_endpoints() {
        let g = PGrid::new(0.0, 1.0, 101).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 101);
        assert_eq!((v[0], v[50], v[100]), (0.0, 0.5, 1.0));
        assert_eq!(PGrid::new(0.3, 0.3, 1).unwrap().values(), vec![0.3]);
        assert!(PGrid::new(0.0, 1.5, 3).is_err());
        assert!(PGrid::new(-1.0, 0.5, 3).is_err());
        assert!(PGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn points_are_ordered() {
        let cfg = config(vec![4, 3], vec![3, 2, 5], PGrid::new(0.0, 1.0, 3).unwrap());
        let pts = cfg.points().unwrap();
        // (n=3: k=2,3) + (n=4: k=2,3) = 4 pairs × 2 parities × 3 p.
        assert_eq!(pts.len(), 24);
        assert_eq!(pts[0], (3, 2, 0.0, Parity::Even));
        assert_eq!(pts[3], (3, 2, 0.0, Parity::Odd));
        assert_eq!(pts[23], (4, 3, 1.0, Parity::Odd));
    }

    #[test]
    fn singular_points_are_flagged() {
        let cfg = config(vec![4], vec![2], PGrid::new(1.0, 1.0, 1).unwrap());
        let rows = run_sweep(&cfg, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].flags, "");
        assert!(rows[0].dg_recursive.unwrap().abs() < 1e-15);
        assert!(rows[1].is_singular());
        assert_eq!(rows[1].k1, None);
        assert_eq!(rows[1].to_csv_line(), "4,2,1.0000000000000000e0,1,,,,,,,,,,,,singular");
    }

    #[test]
    fn rows_match_known_values() {
        let cfg = config(vec![4], vec![2], PGrid::new(0.5, 0.5, 1).unwrap());
        let row = &run_sweep(&cfg, 1).unwrap()[0];
        assert!((row.dg_recursive.unwrap() - 9.0 / 68.0).abs() < 1e-14);
        assert!((row.dg_brute.unwrap() - 9.0 / 68.0).abs() < 1e-10);
        assert_eq!(row.flags, "");
        let e = [row.e1.unwrap(), row.e2.unwrap(), row.e3.unwrap()];
        assert!(e[0].abs() < 1e-15 && e[1].abs() < 1e-15 && e[2] == 1.0);
    }

    #[test]
    fn csv_layout() {
        let cfg = config(vec![2], vec![2], PGrid::new(0.0, 0.0, 1).unwrap());
        let rows = run_sweep(&cfg, 1).unwrap();
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
        assert!(lines[1].starts_with("2,2,0.0000000000000000e0,0,"));
        assert_eq!(lines[1].split(',').count(), 16);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn json_mirrors_fields() {
        let cfg = config(vec![3], vec![2], PGrid::new(0.2, 0.2, 1).unwrap());
        let rows = run_sweep(&cfg, 1).unwrap();
        let mut out = Vec::new();
        write_json(&rows, &mut out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        let obj = v.as_array().unwrap()[0].as_object().unwrap();
        let keys: Vec<&str> = CSV_HEADER.split(',').collect();
        assert_eq!(obj.len(), keys.len());
        for key in keys {
            assert!(obj.contains_key(key), "{key}");
        }
    }

    #[test]
    fn method_selection() {
        let mut cfg = config(vec![3], vec![3], PGrid::new(0.4, 0.4, 1).unwrap());
        cfg.methods = MethodSet::from_methods(&[Method::Encoded]);
        let row = &run_sweep(&cfg, 1).unwrap()[0];
        assert!(row.dg_recursive.is_none() && row.dg_brute.is_none());
        assert!(row.dg_encoded.is_some());
        assert_eq!(row.max_method_diff, Some(0.0));
        assert_eq!(MethodSet::from_methods(&[Method::All]), MethodSet::ALL);
    }

    #[test]
    fn csv_escapes_flags() {
        assert_eq!(csv_field("error:a, b"), "\"error:a, b\"");
        assert_eq!(csv_field("mismatch;chi_not_psd"), "mismatch;chi_not_psd");
    }
}
