//! Randomized design of nested tailbiting codes.
//!
//! The error-correction code is a rate `1/n` feedforward code whose observation
//! matrix is drawn at random and ranked by the crossover probability at which
//! its union bound meets the target block error rate. The quantizer code is
//! grown from it one input at a time: each new input column pair `(b, d)` is
//! drawn at random and ranked by free distance, then multiplicity. The last
//! added input may be frozen at evenly spaced time steps to trim the rate.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{distortion_limit, solve_crossover};
use crate::encoder::{EncoderSpec, FreezingSchedule, TailbitingCode};
use crate::error::{Error, Result};
use crate::gf2::{sample_uniform_matrix, BitMatrix, BitVector};
use crate::rng::{derive_seed, stream_rng, STREAM_DESIGN, STREAM_DISTORTION, STREAM_FEC_SEARCH, STREAM_VQ_SEARCH};
use crate::sim::{simulate_distortion, simulate_fer, StopRule, TrialReport};
use crate::spectrum::{build_trellis, free_distance, kernel_size, weight_enumerator, FreeDistanceReport, TailbitingTrellis, WeightSpectrum};
use crate::wava::WavaConfig;

/// Record of how a pair was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_pb: Option<f64>,
    /// Crossover where the union bound meets the target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_c_union_bound: Option<f64>,
    /// Crossover calibrated by simulation; enters the distortion budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_c_simulated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_bar_halfwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion_budget: Option<f64>,
    /// `(d, A_d)` for the first nonzero weights of the error-correction code.
    #[serde(default)]
    pub spectrum_head: Vec<(usize, String)>,
}

/// A quantizer code whose input 0 alone spans the error-correction subcode.
///
/// Message bits on input 0 form the key; all other unfrozen message bits are
/// helper data, both in the encoder's time-major order.
#[derive(Clone, Debug)]
pub struct NestedCodePair {
    vq: TailbitingCode,
    fec: TailbitingCode,
    vq_trellis: TailbitingTrellis,
    fec_trellis: TailbitingTrellis,
    pub provenance: Provenance,
}

impl PartialEq for NestedCodePair {
    fn eq(&self, other: &Self) -> bool {
        self.vq == other.vq && self.provenance == other.provenance
    }
}

impl NestedCodePair {
    pub fn new(vq: TailbitingCode) -> Result<Self> {
        Self::with_provenance(vq, Provenance::default())
    }

    pub fn with_provenance(vq: TailbitingCode, provenance: Provenance) -> Result<Self> {
        let fec = TailbitingCode::unfrozen(vq.spec().register_only(), vq.sections())?;
        let vq_trellis = build_trellis(&vq);
        let fec_trellis = build_trellis(&fec);
        Ok(Self { vq, fec, vq_trellis, fec_trellis, provenance })
    }

    pub fn vq_code(&self) -> &TailbitingCode {
        &self.vq
    }

    pub fn fec_code(&self) -> &TailbitingCode {
        &self.fec
    }

    pub fn vq_trellis(&self) -> &TailbitingTrellis {
        &self.vq_trellis
    }

    pub fn fec_trellis(&self) -> &TailbitingTrellis {
        &self.fec_trellis
    }

    pub fn block_length(&self) -> usize {
        self.vq.length()
    }

    pub fn k_fec(&self) -> usize {
        self.vq.sections()
    }

    pub fn k_vq(&self) -> usize {
        self.vq.dimension()
    }

    pub fn helper_len(&self) -> usize {
        self.k_vq() - self.k_fec()
    }

    /// Splits a quantizer message into (key bits, helper bits).
    pub fn split_message(&self, message: &BitVector) -> Result<(BitVector, BitVector)> {
        let inputs = self.vq.message_to_inputs(message)?;
        let key = BitVector::from_bools(inputs.iter().map(|&u| u & 1 == 1));
        let mut w = BitVector::zeros(0);
        for (t, &u) in inputs.iter().enumerate() {
            for i in 1..self.vq.spec().inputs() {
                if !self.vq.schedule().is_frozen(t, i) {
                    w.push((u >> i) & 1 == 1);
                }
            }
        }
        Ok((key, w))
    }

    /// Inverse of [`NestedCodePair::split_message`].
    pub fn merge_message(&self, key: &BitVector, helper: &BitVector) -> Result<BitVector> {
        if key.len() != self.k_fec() {
            return Err(Error::dimension("key length", self.k_fec(), key.len()));
        }
        if helper.len() != self.helper_len() {
            return Err(Error::dimension("helper data length", self.helper_len(), helper.len()));
        }
        let mut message = BitVector::zeros(0);
        let mut h = 0;
        for t in 0..self.vq.sections() {
            message.push(key.get(t));
            for i in 1..self.vq.spec().inputs() {
                if !self.vq.schedule().is_frozen(t, i) {
                    message.push(helper.get(h));
                    h += 1;
                }
            }
        }
        Ok(message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FecSearchConfig {
    pub n: usize,
    pub m: usize,
    pub k_fec: usize,
    pub target_pb: f64,
    pub w_max: usize,
    pub seed: u64,
    /// Spectrum truncation weight; `None` means `min(N, 4·m·n)`.
    pub d_max: Option<usize>,
}

impl FecSearchConfig {
    fn validate(&self) -> Result<()> {
        if self.w_max == 0 {
            return Err(Error::InvalidInput("W_max must be at least 1".into()));
        }
        if !(self.target_pb > 0.0 && self.target_pb < 1.0) {
            return Err(Error::OutOfRange { name: "target P_B", value: self.target_pb, range: "(0, 1)" });
        }
        if self.n == 0 || self.m == 0 || self.k_fec < self.m {
            return Err(Error::InvalidInput(format!(
                "need n >= 1, m >= 1 and K_fec >= m (got n = {}, m = {}, K_fec = {})",
                self.n, self.m, self.k_fec
            )));
        }
        Ok(())
    }

    pub fn block_length(&self) -> usize {
        self.n * self.k_fec
    }

    pub fn effective_d_max(&self) -> usize {
        self.d_max.unwrap_or(4 * self.m * self.n).min(self.block_length())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FecCandidate {
    pub index: usize,
    /// `None` for degenerate candidates (zero map, non-injective, or target unreachable).
    pub p_c: Option<f64>,
    pub d_min: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct FecSearchResult {
    pub observation: BitMatrix,
    pub p_c: f64,
    pub spectrum: WeightSpectrum,
    pub index: usize,
    pub log: Vec<FecCandidate>,
    /// Crossover recomputed with twice the truncation weight.
    pub p_c_recheck: f64,
    /// The recheck moved the crossover by more than 1%.
    pub truncation_sensitive: bool,
}

impl FecSearchResult {
    pub fn code(&self, ell: usize) -> Result<TailbitingCode> {
        TailbitingCode::unfrozen(EncoderSpec::feedforward(self.observation.clone())?, ell)
    }
}

fn evaluate_fec_candidate(cfg: &FecSearchConfig, c: &BitMatrix, d_max: usize) -> Result<Option<(f64, WeightSpectrum)>> {
    if c.is_zero() {
        return Ok(None);
    }
    let code = TailbitingCode::unfrozen(EncoderSpec::feedforward(c.clone())?, cfg.k_fec)?;
    let spectrum = weight_enumerator(&code, d_max)?;
    if spectrum.coefficient(0) != BigUint::from(1u32) || spectrum.d_min().is_none() {
        return Ok(None);
    }
    match solve_crossover(&spectrum, cfg.target_pb) {
        Ok(p) => Ok(Some((p, spectrum))),
        Err(Error::Unreachable { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Random search for the rate `1/n` code with the largest union-bound crossover.
/// Ties keep the later candidate.
pub fn search_fec(cfg: &FecSearchConfig) -> Result<FecSearchResult> {
    cfg.validate()?;
    let d_max = cfg.effective_d_max();
    let evaluated: Vec<(BitMatrix, Option<(f64, WeightSpectrum)>)> = (0..cfg.w_max)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, STREAM_FEC_SEARCH, i as u64);
            let c = sample_uniform_matrix(cfg.n, cfg.m, &mut rng);
            let outcome = evaluate_fec_candidate(cfg, &c, d_max)?;
            Ok((c, outcome))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<usize> = None;
    let mut log = Vec::with_capacity(cfg.w_max);
    for (i, (_, outcome)) in evaluated.iter().enumerate() {
        let p = outcome.as_ref().map(|o| o.0);
        log.push(FecCandidate { index: i, p_c: p, d_min: outcome.as_ref().and_then(|o| o.1.d_min()) });
        if let Some(p) = p {
            if best.map_or(true, |b| p >= evaluated[b].1.as_ref().expect("scored").0) {
                best = Some(i);
            }
        }
    }
    let Some(index) = best else {
        return Err(Error::DesignFailure(format!("all {} candidates were degenerate", cfg.w_max)));
    };
    let (observation, outcome) = evaluated.into_iter().nth(index).expect("index in range");
    let (p_c, spectrum) = outcome.expect("scored");
    let wide = (2 * d_max).min(cfg.block_length());
    let p_c_recheck = if wide > d_max {
        evaluate_fec_candidate(cfg, &observation, wide)?.map_or(p_c, |o| o.0)
    } else {
        p_c
    };
    let truncation_sensitive = (p_c_recheck - p_c).abs() > 0.01 * p_c;
    Ok(FecSearchResult { observation, p_c, spectrum, index, log, p_c_recheck, truncation_sensitive })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VqSearchConfig {
    /// The code being extended; `k_fec` is its input count.
    pub parent: EncoderSpec,
    pub k_vq: usize,
    pub w_max: usize,
    pub seed: u64,
    /// When set, extensions whose tailbiting code with this many sections is
    /// not injective are rejected.
    pub injective_at: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VqCandidate {
    pub index: usize,
    pub report: FreeDistanceReport,
    /// `None` when injectivity was not needed to settle the ranking.
    pub injective: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct VqSearchResult {
    pub b_ext: BitMatrix,
    pub d_ext: BitMatrix,
    pub spec: EncoderSpec,
    pub report: FreeDistanceReport,
    pub index: usize,
    pub log: Vec<VqCandidate>,
}

fn ranks_before(a: &FreeDistanceReport, ai: usize, b: &FreeDistanceReport, bi: usize) -> bool {
    a.better_than(b) || (!b.better_than(a) && ai < bi)
}

/// Random search for `k_vq − k` extra input columns maximizing free distance,
/// then minimizing its multiplicity. Full ties keep the earlier candidate.
pub fn search_vq_extension(cfg: &VqSearchConfig) -> Result<VqSearchResult> {
    let k = cfg.parent.inputs();
    if cfg.k_vq <= k {
        return Err(Error::InvalidInput(format!("k_vq = {} must exceed the parent's {k} inputs", cfg.k_vq)));
    }
    if cfg.w_max == 0 {
        return Err(Error::InvalidInput("W_max must be at least 1".into()));
    }
    let (m, n, extra) = (cfg.parent.memory(), cfg.parent.outputs(), cfg.k_vq - k);
    let candidates: Vec<(BitMatrix, BitMatrix, EncoderSpec, FreeDistanceReport)> = (0..cfg.w_max)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, STREAM_VQ_SEARCH, i as u64);
            let b = sample_uniform_matrix(m, extra, &mut rng);
            let d = sample_uniform_matrix(n, extra, &mut rng);
            let spec = cfg.parent.append_input_block(&b, &d)?;
            let report = free_distance(&spec);
            Ok((b, d, spec, report))
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&candidates[a].3, &candidates[b].3);
        if ranks_before(ra, a, rb, b) {
            std::cmp::Ordering::Less
        } else if ranks_before(rb, b, ra, a) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    let mut injective = vec![None; candidates.len()];
    let mut chosen = None;
    for &i in &order {
        let ok = match cfg.injective_at {
            Some(ell) => {
                let code = TailbitingCode::unfrozen(candidates[i].2.clone(), ell)?;
                let ok = kernel_size(&code) == BigUint::from(1u32);
                injective[i] = Some(ok);
                ok
            }
            None => true,
        };
        if ok {
            chosen = Some(i);
            break;
        }
    }
    let Some(index) = chosen else {
        return Err(Error::DesignFailure(format!("none of {} extensions gave an injective code", cfg.w_max)));
    };
    let log = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| VqCandidate { index: i, report: c.3.clone(), injective: injective[i] })
        .collect();
    let (b_ext, d_ext, spec, report) = candidates.into_iter().nth(index).expect("index in range");
    Ok(VqSearchResult { b_ext, d_ext, spec, report, index, log })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationConfig {
    pub max_trials: u64,
    pub target_errors: u64,
    /// Bisection steps on `[p_A, 0.5]`.
    pub steps: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { max_trials: 10_000_000, target_errors: 50, steps: 12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub p_c: f64,
    /// Simulation at `p_c`; `None` if no probe met the target.
    pub report: Option<TrialReport>,
    pub probes: Vec<(f64, TrialReport)>,
}

/// Largest probed crossover whose simulated block error rate is at most
/// `target_pb` with 95% confidence, by bisection on `[p_lo, 0.5]`.
pub fn calibrate_crossover(
    code: &TailbitingCode,
    target_pb: f64,
    p_lo: f64,
    wava: &WavaConfig,
    cal: &CalibrationConfig,
    seed: u64,
) -> Result<Calibration> {
    Error::check_probability("p_lo", p_lo, 0.0, 0.5, "[0, 0.5]")?;
    let stop = StopRule { max_trials: cal.max_trials, target_errors: cal.target_errors, decide_against: Some(target_pb) };
    let (mut lo, mut hi) = (p_lo, 0.5);
    let mut best = None;
    let mut probes = Vec::with_capacity(cal.steps);
    for step in 0..cal.steps {
        let mid = 0.5 * (lo + hi);
        let report = simulate_fer(code, mid, wava, &stop, derive_seed(seed, STREAM_DESIGN, step as u64))?;
        if report.upper95() <= target_pb {
            lo = mid;
            best = Some(report.clone());
        } else {
            hi = mid;
        }
        probes.push((mid, report));
    }
    Ok(Calibration { p_c: lo, report: best, probes })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NestedDesignConfig {
    pub p_a: f64,
    pub target_pb: f64,
    pub k_fec: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub w_max: usize,
    pub wava: WavaConfig,
    pub calibration: CalibrationConfig,
    /// Source words per distortion measurement.
    pub distortion_blocks: u64,
    pub d_max: Option<usize>,
}

impl NestedDesignConfig {
    pub fn new(p_a: f64, target_pb: f64, k_fec: usize, n: usize, m: usize, seed: u64, w_max: usize) -> Self {
        Self {
            p_a,
            target_pb,
            k_fec,
            n,
            m,
            seed,
            w_max,
            wava: WavaConfig::default(),
            calibration: CalibrationConfig::default(),
            distortion_blocks: 2000,
            d_max: None,
        }
    }
}

/// One quantizer stage with `inputs` unfrozen inputs per step.
#[derive(Clone, Debug, PartialEq)]
pub struct StageLog {
    pub inputs: usize,
    pub free_distance: FreeDistanceReport,
    pub distortion: TrialReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreezeProbe {
    pub frozen: usize,
    pub distortion: TrialReport,
    pub within_budget: bool,
}

#[derive(Clone, Debug)]
pub struct NestedDesign {
    pub pair: NestedCodePair,
    pub fec: FecSearchResult,
    pub calibration: Calibration,
    pub budget: f64,
    pub stages: Vec<StageLog>,
    pub freezing: Vec<FreezeProbe>,
    /// Frozen time steps on the last added input.
    pub frozen_times: Vec<usize>,
    pub distortion: TrialReport,
}

/// `count` time steps spread evenly over `ell`: `⌊j·ell/count⌋`.
pub fn spread_positions(ell: usize, count: usize) -> Vec<usize> {
    (0..count).map(|j| j * ell / count).collect()
}

/// Full nested design: code search, crossover calibration, distortion budget,
/// input-by-input quantizer growth and freezing of the last input.
pub fn design_nested(cfg: &NestedDesignConfig) -> Result<NestedDesign> {
    Error::check_probability("p_A", cfg.p_a, 0.0, 0.5, "[0, 0.5)")?;
    let fec = search_fec(&FecSearchConfig {
        n: cfg.n,
        m: cfg.m,
        k_fec: cfg.k_fec,
        target_pb: cfg.target_pb,
        w_max: cfg.w_max,
        seed: cfg.seed,
        d_max: cfg.d_max,
    })?;
    let ell = cfg.k_fec;
    let fec_code = fec.code(ell)?;
    let calibration =
        calibrate_crossover(&fec_code, cfg.target_pb, cfg.p_a, &cfg.wava, &cfg.calibration, derive_seed(cfg.seed, STREAM_DESIGN, 0))?;
    if calibration.report.is_none() {
        return Err(Error::DesignFailure(format!(
            "no simulated crossover above p_A = {} met P_B = {:e}",
            cfg.p_a, cfg.target_pb
        )));
    }
    let budget = distortion_limit(calibration.p_c, cfg.p_a)?;

    let mut probe = 0u64;
    let mut measure = |code: &TailbitingCode| {
        probe += 1;
        simulate_distortion(code, &cfg.wava, cfg.distortion_blocks, derive_seed(cfg.seed, STREAM_DISTORTION, probe))
    };

    let mut spec = fec_code.spec().clone();
    let mut stages = Vec::new();
    loop {
        if spec.inputs() == cfg.n {
            return Err(Error::DesignFailure(format!(
                "distortion budget {budget:.6} not met even at rate 1 (q = {:.6})",
                stages.last().map_or(f64::NAN, |s: &StageLog| s.distortion.estimate)
            )));
        }
        let ext = search_vq_extension(&VqSearchConfig {
            parent: spec.clone(),
            k_vq: spec.inputs() + 1,
            w_max: cfg.w_max,
            seed: derive_seed(cfg.seed, STREAM_VQ_SEARCH, spec.inputs() as u64),
            injective_at: Some(ell),
        })?;
        spec = ext.spec;
        let code = TailbitingCode::unfrozen(spec.clone(), ell)?;
        let distortion = measure(&code)?;
        let done = distortion.estimate <= budget;
        stages.push(StageLog { inputs: spec.inputs(), free_distance: ext.report, distortion });
        if done {
            break;
        }
    }

    // Largest number of frozen positions on the last input that keeps the budget.
    let last = spec.inputs() - 1;
    let frozen_code = |f: usize| {
        let sched = FreezingSchedule::none(ell, spec.inputs()).with_frozen(last, &spread_positions(ell, f))?;
        TailbitingCode::new(spec.clone(), sched)
    };
    let mut freezing = Vec::new();
    let (mut lo, mut hi) = (0usize, ell + 1);
    let mut best_report = stages.last().expect("one stage").distortion.clone();
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let report = measure(&frozen_code(mid)?)?;
        let ok = report.estimate <= budget;
        freezing.push(FreezeProbe { frozen: mid, distortion: report.clone(), within_budget: ok });
        if ok {
            lo = mid;
            best_report = report;
        } else {
            hi = mid;
        }
    }
    let frozen_times = spread_positions(ell, lo);
    let vq = frozen_code(lo)?;
    let provenance = Provenance {
        seed: Some(cfg.seed),
        w_max: Some(cfg.w_max),
        p_a: Some(cfg.p_a),
        target_pb: Some(cfg.target_pb),
        p_c_union_bound: Some(fec.p_c),
        p_c_simulated: Some(calibration.p_c),
        q_bar: Some(best_report.estimate),
        q_bar_halfwidth: Some(best_report.halfwidth),
        distortion_budget: Some(budget),
        spectrum_head: fec.spectrum.head(8),
    };
    let pair = NestedCodePair::with_provenance(vq, provenance)?;
    Ok(NestedDesign { pair, fec, calibration, budget, stages, freezing, frozen_times, distortion: best_report })
}
