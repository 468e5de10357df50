//! Evaluation rows for designed pairs, the reference-table loader, region
//! curves and fixture overlays.

use std::path::{Path, PathBuf};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    complexity_estimates, gs_region_point, inputs_for_rate, key_storage_ratio, pc_complexity, quantizer_converse_feasible,
    quantizer_rate_approx, ratio_to_f64, star,
};
use crate::design::{calibrate_crossover, Calibration, CalibrationConfig, NestedCodePair};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, STREAM_DESIGN, STREAM_DISTORTION, STREAM_END_TO_END, STREAM_FER};
use crate::sim::{simulate_distortion, simulate_end_to_end, simulate_fer, StopRule, TrialReport};
use crate::wava::WavaConfig;

/// List size assumed for polar-code complexity.
pub const PC_LIST_SIZE: usize = 8;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeFamily {
    Tbcc { m: usize, n: usize },
    Polar { list_size: usize },
}

/// One row of a designed-code parameter table. `r_w`, `helper_bits` and
/// `ratio` are always derived from `k_fec`, `k_vq` and `block_length`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationRow {
    pub label: String,
    pub family: CodeFamily,
    pub block_length: usize,
    pub k_fec: usize,
    pub k_vq: usize,
    pub p_c: f64,
    pub q_bar: f64,
    pub r_fec: f64,
    pub r_vq: f64,
    pub r_w: f64,
    pub helper_bits: usize,
    pub ratio: f64,
    pub complexity_fec_log2: f64,
    pub complexity_vq_log2: f64,
}

impl EvaluationRow {
    /// Row from dimensions. TBCC complexities take the cheapest trellis
    /// variant with `V` iterations; the quantizer uses all its inputs.
    pub fn from_dimensions(
        label: &str,
        family: CodeFamily,
        block_length: usize,
        k_fec: usize,
        k_vq: usize,
        vq_inputs: usize,
        p_c: f64,
        q_bar: f64,
        iterations: usize,
    ) -> Result<Self> {
        let ratio = key_storage_ratio(k_fec, k_vq)?;
        let (cf, cv) = match family {
            CodeFamily::Tbcc { m, n } => (
                complexity_estimates(block_length, n, 1, m, iterations)?.log2_min(),
                complexity_estimates(block_length, n, vq_inputs, m, iterations)?.log2_min(),
            ),
            CodeFamily::Polar { list_size } => {
                let c = pc_complexity(list_size, block_length).log2();
                (c, c)
            }
        };
        let n_len = block_length as f64;
        Ok(Self {
            label: label.to_string(),
            family,
            block_length,
            k_fec,
            k_vq,
            p_c,
            q_bar,
            r_fec: k_fec as f64 / n_len,
            r_vq: k_vq as f64 / n_len,
            r_w: (k_vq - k_fec) as f64 / n_len,
            helper_bits: k_vq - k_fec,
            ratio: ratio_to_f64(ratio),
            complexity_fec_log2: cf,
            complexity_vq_log2: cv,
        })
    }

    /// Row from printed rates; dimensions are the nearest integers to `N·R`.
    pub fn from_rates(
        label: &str,
        family: CodeFamily,
        block_length: usize,
        r_fec: f64,
        r_vq: f64,
        p_c: f64,
        q_bar: f64,
    ) -> Result<Self> {
        let k_fec = (r_fec * block_length as f64).round() as usize;
        let k_vq = (r_vq * block_length as f64).round() as usize;
        let vq_inputs = match family {
            CodeFamily::Tbcc { n, .. } => inputs_for_rate(n, r_vq),
            CodeFamily::Polar { .. } => 0,
        };
        Self::from_dimensions(label, family, block_length, k_fec, k_vq, vq_inputs, p_c, q_bar, WavaConfig::default().max_iterations)
    }

    pub fn csv_header() -> &'static str {
        "label,m,n,N,K_fec,K_vq,p_c,q_bar,R_fec,R_vq,R_w,helper_bits,ratio,complexity_fec_log2,complexity_vq_log2"
    }

    pub fn csv_line(&self) -> String {
        use crate::io::fmt_sig;
        let (m, n) = match self.family {
            CodeFamily::Tbcc { m, n } => (m.to_string(), n.to_string()),
            CodeFamily::Polar { .. } => (String::new(), String::new()),
        };
        format!(
            "{},{m},{n},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.label,
            self.block_length,
            self.k_fec,
            self.k_vq,
            fmt_sig(self.p_c),
            fmt_sig(self.q_bar),
            fmt_sig(self.r_fec),
            fmt_sig(self.r_vq),
            fmt_sig(self.r_w),
            self.helper_bits,
            fmt_sig(self.ratio),
            fmt_sig(self.complexity_fec_log2),
            fmt_sig(self.complexity_vq_log2),
        )
    }
}

/// A printed reference row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub code: String,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub block_length: usize,
    /// Written as a fraction, e.g. `1/3`.
    pub r_fec: String,
    pub p_c: f64,
    pub q_bar: f64,
    pub r_vq: f64,
    pub r_w: f64,
    pub helper_bits: usize,
    pub ratio: f64,
    pub complexity_fec_log2: f64,
    pub complexity_vq_log2: f64,
}

impl ReferenceRow {
    pub fn family(&self) -> Result<CodeFamily> {
        match (self.code.as_str(), self.m, self.n) {
            ("tbcc", Some(m), Some(n)) => Ok(CodeFamily::Tbcc { m, n }),
            ("pc", _, _) => Ok(CodeFamily::Polar { list_size: PC_LIST_SIZE }),
            _ => Err(Error::Parse(format!("unknown code family {:?} (m = {:?}, n = {:?})", self.code, self.m, self.n))),
        }
    }

    pub fn r_fec_value(&self) -> Result<f64> {
        let r: Ratio<i64> = self.r_fec.trim().parse().map_err(|e| Error::Parse(format!("rate {:?}: {e}", self.r_fec)))?;
        Ok(*r.numer() as f64 / *r.denom() as f64)
    }

    pub fn label(&self) -> String {
        match (self.m, self.n) {
            (Some(m), Some(n)) => format!("{}_m{m}_n{n}_N{}", self.code, self.block_length),
            _ => format!("{}_N{}", self.code, self.block_length),
        }
    }

    /// Recomputes the derived columns from `(N, R_fec, R_vq, p_c, q̄)`.
    pub fn recompute(&self) -> Result<EvaluationRow> {
        EvaluationRow::from_rates(&self.label(), self.family()?, self.block_length, self.r_fec_value()?, self.r_vq, self.p_c, self.q_bar)
    }
}

pub fn load_reference_rows(path: &Path) -> Result<Vec<ReferenceRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationConfig {
    pub p_a: f64,
    pub target_pb: f64,
    pub wava: WavaConfig,
    pub calibration: CalibrationConfig,
    pub distortion_blocks: u64,
    /// Stop rule for the artificial-channel and end-to-end checks; `None` skips them.
    pub check_stop: Option<StopRule>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub row: EvaluationRow,
    pub calibration: Calibration,
    pub distortion: TrialReport,
    /// Block error rate on a BSC with crossover `q̄ ∗ p_A`.
    pub artificial_channel: Option<TrialReport>,
    /// Key mismatch rate of the real pipeline.
    pub end_to_end: Option<TrialReport>,
}

/// Calibrates `p_c`, measures `q̄` and assembles the row for a designed pair.
pub fn evaluate(pair: &NestedCodePair, label: &str, cfg: &EvaluationConfig) -> Result<Evaluation> {
    if pair.k_vq() == pair.k_fec() {
        return Err(Error::InvalidInput("quantizer and error-correction codes coincide: no helper data, ratio undefined".into()));
    }
    let spec = pair.vq_code().spec();
    let calibration = calibrate_crossover(
        pair.fec_code(),
        cfg.target_pb,
        cfg.p_a,
        &cfg.wava,
        &cfg.calibration,
        derive_seed(cfg.seed, STREAM_DESIGN, 1),
    )?;
    let distortion =
        simulate_distortion(pair.vq_code(), &cfg.wava, cfg.distortion_blocks, derive_seed(cfg.seed, STREAM_DISTORTION, 0))?;
    let row = EvaluationRow::from_dimensions(
        label,
        CodeFamily::Tbcc { m: spec.memory(), n: spec.outputs() },
        pair.block_length(),
        pair.k_fec(),
        pair.k_vq(),
        spec.inputs(),
        calibration.p_c,
        distortion.estimate,
        cfg.wava.max_iterations,
    )?;
    let (artificial_channel, end_to_end) = match &cfg.check_stop {
        Some(stop) => {
            let p = star(distortion.estimate.min(0.5), cfg.p_a)?;
            let art = simulate_fer(pair.fec_code(), p, &cfg.wava, stop, derive_seed(cfg.seed, STREAM_FER, 0))?;
            let e2e = simulate_end_to_end(pair, cfg.p_a, &cfg.wava, stop, derive_seed(cfg.seed, STREAM_END_TO_END, 0))?;
            (Some(art), Some(e2e))
        }
        None => (None, None),
    };
    Ok(Evaluation { row, calibration, distortion, artificial_channel, end_to_end })
}

/// A boundary point of the generated-secret region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionRow {
    pub q: f64,
    pub r_s: f64,
    pub r_w: f64,
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..points).map(|i| 0.5 * i as f64 / (points - 1) as f64).collect(),
    }
}

pub fn region_curve(p_a: f64, q_grid: &[f64]) -> Result<Vec<RegionRow>> {
    q_grid
        .iter()
        .map(|&q| {
            let t = gs_region_point(p_a, q)?;
            Ok(RegionRow { q, r_s: t.r_s, r_w: t.r_w })
        })
        .collect()
}

pub fn region_csv(rows: &[RegionRow]) -> String {
    use crate::io::fmt_sig;
    let mut out = String::from("q,Rs,Rw\n");
    for r in rows {
        out += &format!("{},{},{}\n", fmt_sig(r.q), fmt_sig(r.r_s), fmt_sig(r.r_w));
    }
    out
}

/// A point of a named curve, for long-format CSV `series,x,y`.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlayPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

fn point(series: &str, x: f64, y: f64) -> OverlayPoint {
    OverlayPoint { series: series.to_string(), x, y }
}

/// Region boundary and reference curves in the `(R_w, R_s)` plane plus, per
/// block length, the quantizer rate approximation and sphere-covering limit
/// in the `(q, R_vq)` plane.
pub fn region_series(p_a: f64, q_grid: &[f64], block_lengths: &[usize]) -> Result<Vec<OverlayPoint>> {
    let mut out = Vec::new();
    for r in region_curve(p_a, q_grid)? {
        out.push(point("region_boundary", r.r_w, r.r_s));
    }
    // R_w + R_s = H(X) = 1
    out.push(point("entropy_line", 0.0, 1.0));
    out.push(point("entropy_line", 1.0, 0.0));
    for &n_len in block_lengths {
        for &q in q_grid.iter().filter(|&&q| q > 0.0) {
            out.push(point(&format!("vq_rate_approx_N{n_len}"), q, quantizer_rate_approx(n_len, q)?));
            out.push(point(&format!("vq_rate_converse_N{n_len}"), q, converse_rate(n_len, q)));
        }
    }
    Ok(out)
}

/// Smallest rate `K/N` on the `1/N` lattice that the covering converse allows at distortion `q`.
pub fn converse_rate(n_len: usize, q: f64) -> f64 {
    (0..=n_len)
        .map(|k| k as f64 / n_len as f64)
        .find(|&r| quantizer_converse_feasible(n_len, r, q))
        .unwrap_or(1.0)
}

/// Merges fixture files into long-format points. Series names are prefixed
/// with the file stem. Recognized headers: `p,mc,rcu`, `series,p,fer` and the
/// reference-table columns, whose rows become `(R_w, R_s)` points.
pub fn fixture_overlay(paths: &[PathBuf]) -> Result<Vec<OverlayPoint>> {
    let mut out = Vec::new();
    for path in paths {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("fixture").to_string();
        let mut reader = csv::Reader::from_path(path)?;
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{}: {s:?}: {e}", path.display())));
        match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["p", "mc", "rcu"] => {
                for rec in reader.records() {
                    let rec = rec?;
                    let p = num(&rec[0])?;
                    out.push(point(&format!("{stem}:mc"), p, num(&rec[1])?));
                    out.push(point(&format!("{stem}:rcu"), p, num(&rec[2])?));
                }
            }
            ["series", "p", "fer"] => {
                for rec in reader.records() {
                    let rec = rec?;
                    out.push(point(&format!("{stem}:{}", &rec[0]), num(&rec[1])?, num(&rec[2])?));
                }
            }
            h if h.first() == Some(&"code") => {
                for row in load_reference_rows(path)? {
                    out.push(point(&format!("{stem}:{}", row.code), row.r_w, row.r_fec_value()?));
                }
            }
            h => return Err(Error::Parse(format!("{}: unrecognized header {}", path.display(), h.join(",")))),
        }
    }
    Ok(out)
}

pub fn overlay_csv(points: &[OverlayPoint]) -> String {
    use crate::io::fmt_sig;
    let mut out = String::from("series,x,y\n");
    for p in points {
        out += &format!("{},{},{}\n", p.series, fmt_sig(p.x), fmt_sig(p.y));
    }
    out
}

pub fn default_fixtures() -> Vec<PathBuf> {
    ["channel_bounds_n384.csv", "channel_bounds_n512.csv", "fer_curves_n384.csv", "fer_curves_n512.csv", "table2_reference.csv"]
        .iter()
        .map(|f| fixtures_dir().join(f))
        .collect()
}
