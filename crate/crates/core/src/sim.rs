//! Seeded Monte Carlo experiments: block error rate over a BSC, quantizer
//! distortion of uniform sources and end-to-end key agreement reliability.
//!
//! Trial `i` always draws from the stream keyed by `(seed, kind, i)`. Trials run
//! in parallel chunks and are then scanned in index order, so a run stops at
//! exactly the same trial whatever the thread count.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::design::NestedCodePair;
use crate::encoder::TailbitingCode;
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::key_agreement::{enroll_with, reconstruct_with};
use crate::rng::{stream_rng, STREAM_DISTORTION, STREAM_END_TO_END, STREAM_FER};
use crate::spectrum::build_trellis;
use crate::wava::{ml_decode, wava_decode, WavaConfig};

const Z95: f64 = 1.959_963_984_540_054;

/// Outcome of a Monte Carlo run. Equality ignores `wallclock`.
#[derive(Clone, Debug)]
pub struct TrialReport {
    pub estimate: f64,
    /// Bernoulli trials behind `estimate` (bits for distortion runs).
    pub trials: u64,
    pub events: u64,
    /// Simulated blocks.
    pub blocks: u64,
    /// 95% confidence half-width.
    pub halfwidth: f64,
    pub seed: u64,
    pub wallclock: Duration,
}

impl PartialEq for TrialReport {
    fn eq(&self, o: &Self) -> bool {
        self.estimate == o.estimate
            && self.trials == o.trials
            && self.events == o.events
            && self.blocks == o.blocks
            && self.halfwidth == o.halfwidth
            && self.seed == o.seed
    }
}

impl TrialReport {
    fn bernoulli(trials: u64, events: u64, seed: u64, wallclock: Duration) -> Self {
        let estimate = events as f64 / trials as f64;
        let halfwidth = Z95 * (estimate * (1.0 - estimate) / trials as f64).sqrt();
        Self { estimate, trials, events, blocks: trials, halfwidth, seed, wallclock }
    }

    /// Upper end of the 95% interval; the rule of three when no event was seen.
    pub fn upper95(&self) -> f64 {
        if self.events == 0 {
            (3.0 / self.trials as f64).min(1.0)
        } else {
            self.estimate + self.halfwidth
        }
    }

    pub fn lower95(&self) -> f64 {
        (self.estimate - self.halfwidth).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    pub max_trials: u64,
    pub target_errors: u64,
    /// Also stop once the 95% interval lies entirely above or below this value.
    pub decide_against: Option<f64>,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_trials: 10_000_000, target_errors: 50, decide_against: None }
    }
}

impl StopRule {
    pub fn new(max_trials: u64, target_errors: u64) -> Self {
        Self { max_trials, target_errors, decide_against: None }
    }

    fn validate(&self) -> Result<()> {
        if self.max_trials == 0 || self.target_errors == 0 {
            return Err(Error::InvalidInput("stop rule needs max_trials >= 1 and target_errors >= 1".into()));
        }
        Ok(())
    }

    fn decided(&self, trials: u64, events: u64) -> bool {
        let Some(threshold) = self.decide_against else { return false };
        let r = TrialReport::bernoulli(trials, events, 0, Duration::ZERO);
        r.upper95() < threshold || (events > 0 && r.lower95() > threshold)
    }
}

/// Runs `trial(i)` for `i = 0, 1, ...` until the stop rule fires; returns (trials, events).
fn run_bernoulli<F>(stop: &StopRule, trial: F) -> Result<(u64, u64)>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    stop.validate()?;
    let (mut trials, mut events) = (0u64, 0u64);
    let mut chunk = 256u64;
    'outer: while trials < stop.max_trials {
        let end = (trials + chunk).min(stop.max_trials);
        let outcomes: Vec<bool> = (trials..end).into_par_iter().map(&trial).collect::<Result<_>>()?;
        for hit in outcomes {
            trials += 1;
            events += u64::from(hit);
            if events >= stop.target_errors {
                break 'outer;
            }
        }
        if stop.decided(trials, events) {
            break;
        }
        chunk = (chunk * 2).min(1 << 16);
    }
    Ok((trials, events))
}

/// I.i.d. Bernoulli(`p`) flip pattern.
pub fn bsc_sample<R: Rng + ?Sized>(n_bits: usize, p: f64, rng: &mut R) -> Result<BitVector> {
    Error::check_probability("p", p, 0.0, 1.0, "[0, 1]")?;
    Ok(if p == 0.0 {
        BitVector::zeros(n_bits)
    } else if p == 1.0 {
        BitVector::ones(n_bits)
    } else {
        BitVector::from_bools((0..n_bits).map(|_| rng.gen_bool(p)))
    })
}

pub fn random_bits<R: Rng + ?Sized>(n_bits: usize, rng: &mut R) -> BitVector {
    BitVector::from_bools((0..n_bits).map(|_| rng.gen::<bool>()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FerDecoder {
    Wava(WavaConfig),
    /// Exact minimum-distance decoding; one constrained Viterbi pass per state.
    MaximumLikelihood,
}

/// Block error rate of `code` over BSC(`p_c`) with WAVA decoding. Each trial
/// sends a random message and counts a message mismatch as an error.
pub fn simulate_fer(code: &TailbitingCode, p_c: f64, cfg: &WavaConfig, stop: &StopRule, seed: u64) -> Result<TrialReport> {
    simulate_fer_with(code, p_c, FerDecoder::Wava(*cfg), stop, seed)
}

pub fn simulate_fer_with(
    code: &TailbitingCode,
    p_c: f64,
    decoder: FerDecoder,
    stop: &StopRule,
    seed: u64,
) -> Result<TrialReport> {
    Error::check_probability("p_c", p_c, 0.0, 1.0, "[0, 1]")?;
    let started = Instant::now();
    let trellis = build_trellis(code);
    let (trials, events) = run_bernoulli(stop, |i| {
        let mut rng = stream_rng(seed, STREAM_FER, i);
        let message = random_bits(code.dimension(), &mut rng);
        let mut received = code.encode(&message)?;
        received.xor_assign(&bsc_sample(code.length(), p_c, &mut rng)?)?;
        let decoded = match decoder {
            FerDecoder::Wava(cfg) => wava_decode(&trellis, &received, &cfg)?,
            FerDecoder::MaximumLikelihood => ml_decode(&trellis, &received)?,
        };
        Ok(decoded.message != message)
    })?;
    Ok(TrialReport::bernoulli(trials, events, seed, started.elapsed()))
}

/// Average normalized quantization distortion over `blocks` uniform source words.
/// `trials` counts bits and `events` differing bits; the half-width uses the
/// spread of per-block distortions.
pub fn simulate_distortion(vq_code: &TailbitingCode, cfg: &WavaConfig, blocks: u64, seed: u64) -> Result<TrialReport> {
    if blocks == 0 {
        return Err(Error::InvalidInput("distortion simulation needs at least one block".into()));
    }
    let started = Instant::now();
    let trellis = build_trellis(vq_code);
    let n_len = vq_code.length();
    let distances: Vec<usize> = (0..blocks)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, STREAM_DISTORTION, i);
            let x = random_bits(n_len, &mut rng);
            wava_decode(&trellis, &x, cfg).map(|r| r.distance)
        })
        .collect::<Result<_>>()?;
    let events: u64 = distances.iter().map(|&d| d as u64).sum();
    let trials = blocks * n_len as u64;
    let estimate = events as f64 / trials as f64;
    let halfwidth = if blocks > 1 {
        let var = distances.iter().map(|&d| (d as f64 / n_len as f64 - estimate).powi(2)).sum::<f64>()
            / (blocks - 1) as f64;
        Z95 * (var / blocks as f64).sqrt()
    } else {
        0.0
    };
    Ok(TrialReport { estimate, trials, events, blocks, halfwidth, seed, wallclock: started.elapsed() })
}

/// Key mismatch rate of the full pipeline: uniform source, enrollment,
/// BSC(`p_a`) remeasurement and reconstruction.
pub fn simulate_end_to_end(pair: &NestedCodePair, p_a: f64, cfg: &WavaConfig, stop: &StopRule, seed: u64) -> Result<TrialReport> {
    Error::check_probability("p_A", p_a, 0.0, 0.5, "[0, 0.5]")?;
    let started = Instant::now();
    let n_len = pair.block_length();
    let (trials, events) = run_bernoulli(stop, |i| {
        let mut rng = stream_rng(seed, STREAM_END_TO_END, i);
        let x = random_bits(n_len, &mut rng);
        let record = enroll_with(pair, &x, cfg)?;
        let mut y = x;
        y.xor_assign(&bsc_sample(n_len, p_a, &mut rng)?)?;
        let key = reconstruct_with(pair, &y, &record.helper_data, cfg)?;
        Ok(key != record.secret_key)
    })?;
    Ok(TrialReport::bernoulli(trials, events, seed, started.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::EncoderSpec;
    use crate::gf2::BitMatrix;
    use crate::wava::exhaustive_decode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_code() -> TailbitingCode {
        let spec = EncoderSpec::feedforward(BitMatrix::from_rows(&[[1, 0], [1, 1], [1, 1]]).unwrap()).unwrap();
        TailbitingCode::unfrozen(spec, 5).unwrap()
    }

    #[test]
    fn bsc_extremes_and_concentration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(bsc_sample(100, 0.0, &mut rng).unwrap().is_zero());
        assert_eq!(bsc_sample(100, 1.0, &mut rng).unwrap().weight(), 100);
        let n = 10_000_000usize;
        let p = 0.0149;
        let w = bsc_sample(n, p, &mut rng).unwrap().weight() as f64 / n as f64;
        assert!((w - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt());
        assert!(bsc_sample(3, 1.5, &mut rng).is_err());
    }

    #[test]
    fn noiseless_fer_is_zero() {
        let r = simulate_fer(&toy_code(), 0.0, &WavaConfig::default(), &StopRule::new(500, 50), 3).unwrap();
        assert_eq!((r.trials, r.events, r.estimate), (500, 0, 0.0));
        assert!((r.upper95() - 3.0 / 500.0).abs() < 1e-15);
    }

    #[test]
    fn stops_exactly_at_target_errors() {
        let r = simulate_fer(&toy_code(), 0.3, &WavaConfig::default(), &StopRule::new(1_000_000, 17), 5).unwrap();
        assert_eq!(r.events, 17);
        assert!(r.trials < 1_000_000);
        let again = simulate_fer(&toy_code(), 0.3, &WavaConfig::default(), &StopRule::new(1_000_000, 17), 5).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let code = toy_code();
        let stop = StopRule::new(20_000, 40);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| simulate_fer(&code, 0.12, &WavaConfig::default(), &stop, 9).unwrap());
        let b = three.install(|| simulate_fer(&code, 0.12, &WavaConfig::default(), &stop, 9).unwrap());
        assert_eq!(a, b);
        let a = one.install(|| simulate_distortion(&code, &WavaConfig::default(), 300, 2).unwrap());
        let b = three.install(|| simulate_distortion(&code, &WavaConfig::default(), 300, 2).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn wava_fer_tracks_ml_fer() {
        let code = toy_code();
        let stop = StopRule::new(20_000, 1_000_000);
        let w = simulate_fer(&code, 0.05, &WavaConfig::default(), &stop, 11).unwrap();
        let m = simulate_fer_with(&code, 0.05, FerDecoder::MaximumLikelihood, &stop, 11).unwrap();
        assert!((w.estimate - m.estimate).abs() <= 3.0 * (w.halfwidth + m.halfwidth));
    }

    #[test]
    fn decision_stop_ends_early() {
        let mut stop = StopRule::new(10_000_000, 50);
        stop.decide_against = Some(0.5);
        let r = simulate_fer(&toy_code(), 0.01, &WavaConfig::default(), &stop, 4).unwrap();
        assert!(r.trials <= 512);
    }

    #[test]
    fn distortion_matches_exhaustive_mean() {
        let code = toy_code();
        let n_len = code.length();
        let exact = exact_mean_distortion(&code);
        let r = simulate_distortion(&code, &WavaConfig::default(), 5000, 21).unwrap();
        assert!((r.estimate - exact).abs() <= 1.5 * r.halfwidth, "{} vs {exact}", r.estimate);
        assert_eq!(r.trials, 5000 * n_len as u64);
    }

    #[test]
    fn rate_one_code_has_no_distortion() {
        // k = n = 2 with an invertible input-to-output map at every step
        let spec = EncoderSpec::new(
            BitMatrix::from_rows(&[[0]]).unwrap(),
            BitMatrix::from_rows(&[[1], [0]]).unwrap(),
            BitMatrix::from_rows(&[[0], [1]]).unwrap(),
        )
        .unwrap();
        let code = TailbitingCode::unfrozen(spec, 4).unwrap();
        let r = simulate_distortion(&code, &WavaConfig::default(), 200, 1).unwrap();
        assert_eq!(r.events, 0);
    }

    fn exact_mean_distortion(code: &TailbitingCode) -> f64 {
        let n_len = code.length();
        (0..1u64 << n_len)
            .map(|x| exhaustive_decode(code, &BitVector::from_u64(x, n_len)).unwrap().distance as f64)
            .sum::<f64>()
            / (n_len as f64 * (1u64 << n_len) as f64)
    }

    #[test]
    fn intervals_cover_the_exact_distortion() {
        let code = toy_code();
        let exact = exact_mean_distortion(&code);
        let covered = (0..100u64)
            .filter(|&seed| {
                let r = simulate_distortion(&code, &WavaConfig::default(), 200, 1000 + seed).unwrap();
                (r.estimate - exact).abs() <= r.halfwidth
            })
            .count();
        assert!(covered >= 90, "exact value inside the 95% interval in {covered}/100 runs");
    }

    #[test]
    fn fer_grows_with_crossover() {
        let code = toy_code();
        let stop = StopRule::new(20_000, 100);
        let grid = [0.01, 0.03, 0.05, 0.1, 0.15, 0.2];
        let runs: Vec<TrialReport> =
            grid.iter().map(|&p| simulate_fer(&code, p, &WavaConfig::default(), &stop, 17).unwrap()).collect();
        for a in 0..runs.len() {
            for b in a + 1..runs.len() {
                assert!(runs[a].estimate <= runs[b].estimate + 3.0 * (runs[a].halfwidth + runs[b].halfwidth));
            }
        }
    }

    #[test]
    fn measured_distortion_respects_covering_converse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let spec = EncoderSpec::new(
                BitMatrix::random(3, 1, &mut rng),
                BitMatrix::random(3, 3, &mut rng),
                BitMatrix::random(3, 1, &mut rng),
            )
            .unwrap();
            let code = TailbitingCode::unfrozen(spec, 8).unwrap();
            let rate = code.dimension() as f64 / code.length() as f64;
            let r = simulate_distortion(&code, &WavaConfig::default(), 400, 5).unwrap();
            assert!(crate::bounds::quantizer_converse_feasible(code.length(), rate, r.estimate + 3.0 * r.halfwidth));
        }
    }

    #[test]
    fn end_to_end_is_deterministic_and_below_artificial_channel_bound() {
        use crate::bounds::{star, union_bound_pb};
        use crate::design::{design_nested, CalibrationConfig, NestedDesignConfig};
        use crate::spectrum::weight_enumerator;

        let mut cfg = NestedDesignConfig::new(0.0149, 1e-2, 16, 3, 4, 31, 30);
        cfg.calibration = CalibrationConfig { max_trials: 20_000, target_errors: 50, steps: 6 };
        cfg.distortion_blocks = 400;
        let d = design_nested(&cfg).unwrap();
        let fec_spectrum = weight_enumerator(d.pair.fec_code(), d.pair.block_length()).unwrap();
        assert!(fec_spectrum.d_min().unwrap() >= 3);
        let stop = StopRule::new(5000, 50);
        let a = simulate_end_to_end(&d.pair, 0.0149, &WavaConfig::default(), &stop, 4).unwrap();
        let b = simulate_end_to_end(&d.pair, 0.0149, &WavaConfig::default(), &stop, 4).unwrap();
        assert_eq!(a, b);
        let ub = union_bound_pb(&fec_spectrum, star(d.distortion.estimate, 0.0149).unwrap()).unwrap().value;
        assert!(a.estimate <= ub + 3.0 * a.halfwidth, "{} vs bound {ub}", a.estimate);
    }
}
