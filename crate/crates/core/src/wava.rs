//! Wrap-around Viterbi decoding of tailbiting trellises with a Hamming metric.
//!
//! Every survivor carries the state it started from. A survivor whose end
//! state equals its origin is a tailbiting path, i.e. a valid codeword. The
//! first iteration starts all states with metric 0; each later iteration
//! starts from the final metrics of the previous one, so that a tailbiting
//! candidate's own distance is `final[s] - initial[s]`.

use crate::encoder::TailbitingCode;
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::spectrum::TailbitingTrellis;

/// Deterministic tie-breaking rule between equal-metric survivors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Smaller input tuple (little-endian integer), then smaller predecessor
    /// state; among tailbiting candidates, smaller state index.
    #[default]
    SmallestInput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WavaConfig {
    pub max_iterations: usize,
    pub tie_break: TieBreak,
}

impl Default for WavaConfig {
    fn default() -> Self {
        Self { max_iterations: 4, tie_break: TieBreak::SmallestInput }
    }
}

impl WavaConfig {
    pub fn with_iterations(max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::InvalidInput("WAVA needs at least one iteration".into()));
        }
        Ok(Self { max_iterations, ..Self::default() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub message: BitVector,
    pub codeword: BitVector,
    pub distance: usize,
    pub iterations_used: usize,
    /// A tailbiting path was the overall best survivor within the iteration budget.
    pub converged: bool,
}

impl DecodeResult {
    fn from_inputs(code: &TailbitingCode, r: &BitVector, inputs: &[u32], iterations_used: usize, converged: bool) -> Self {
        let message = code.inputs_to_message(inputs);
        let (codeword, _) = code.encode_inputs(inputs);
        let distance = codeword.hamming_distance(r).expect("decoder output has block length");
        Self { message, codeword, distance, iterations_used, converged }
    }

    /// `distance / N`.
    pub fn distortion(&self) -> f64 {
        self.distance as f64 / self.codeword.len() as f64
    }
}

const UNREACHED: u32 = u32::MAX;

/// Survivor decisions of one trellis pass, `ell × 2^m`.
struct Pass {
    metric: Vec<u32>,
    origin: Vec<u32>,
    prev: Vec<u32>,
    input: Vec<u32>,
}

fn received_sections(trellis: &TailbitingTrellis, r: &BitVector) -> Vec<u64> {
    let n = trellis.code().spec().outputs();
    (0..trellis.sections()).map(|t| r.get_bits(t * n, n)).collect()
}

/// One forward pass of add-compare-select. `initial[s] == UNREACHED` excludes `s`
/// as a start state.
fn forward(trellis: &TailbitingTrellis, sections: &[u64], initial: &[u32], pass: &mut Pass) {
    let states = trellis.num_states();
    let mut cur = initial.to_vec();
    let mut cur_origin: Vec<u32> = (0..states as u32).collect();
    let mut next = vec![UNREACHED; states];
    let mut next_origin = vec![0u32; states];
    for (t, &rt) in sections.iter().enumerate() {
        next.iter_mut().for_each(|x| *x = UNREACHED);
        let row = t * states;
        let last = t + 1 == sections.len();
        for s in 0..states {
            let ms = cur[s];
            if ms == UNREACHED {
                continue;
            }
            for e in trellis.out_edges(t, s as u32) {
                let cand = ms + (e.output ^ rt).count_ones();
                let v = e.next as usize;
                let slot = row + v;
                // (metric, closes loop in last section, input, prev) lexicographic
                let better = cand < next[v]
                    || (cand == next[v] && {
                        let closes = last && cur_origin[s] == e.next;
                        let held = last && next_origin[v] == e.next;
                        (closes && !held)
                            || (closes == held
                                && (e.input < pass.input[slot]
                                    || (e.input == pass.input[slot] && (s as u32) < pass.prev[slot])))
                    });
                if better {
                    next[v] = cand;
                    next_origin[v] = cur_origin[s];
                    pass.prev[slot] = s as u32;
                    pass.input[slot] = e.input;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        std::mem::swap(&mut cur_origin, &mut next_origin);
    }
    pass.metric = cur;
    pass.origin = cur_origin;
}

fn traceback(trellis: &TailbitingTrellis, pass: &Pass, end: u32) -> Vec<u32> {
    let states = trellis.num_states();
    let mut inputs = vec![0u32; trellis.sections()];
    let mut s = end as usize;
    for t in (0..trellis.sections()).rev() {
        let slot = t * states + s;
        inputs[t] = pass.input[slot];
        s = pass.prev[slot] as usize;
    }
    inputs
}

fn new_pass(trellis: &TailbitingTrellis) -> Pass {
    let size = trellis.sections() * trellis.num_states();
    Pass { metric: Vec::new(), origin: Vec::new(), prev: vec![UNREACHED; size], input: vec![UNREACHED; size] }
}

fn check_length(trellis: &TailbitingTrellis, r: &BitVector) -> Result<()> {
    let n_len = trellis.code().length();
    if r.len() != n_len {
        return Err(Error::dimension("received word length", n_len, r.len()));
    }
    Ok(())
}

/// Best path that starts and ends in `state`, with its distance.
pub fn constrained_viterbi(trellis: &TailbitingTrellis, r: &BitVector, state: u32) -> Result<(Vec<u32>, usize)> {
    check_length(trellis, r)?;
    let sections = received_sections(trellis, r);
    let mut initial = vec![UNREACHED; trellis.num_states()];
    initial[state as usize] = 0;
    let mut pass = new_pass(trellis);
    forward(trellis, &sections, &initial, &mut pass);
    // shift-register trellises reach every state after m ≤ ell sections
    let d = pass.metric[state as usize];
    debug_assert_ne!(d, UNREACHED);
    Ok((traceback(trellis, &pass, state), d as usize))
}

/// Exact maximum-likelihood (minimum Hamming distance) tailbiting decoding:
/// one constrained Viterbi pass per start state. Ties go to the smaller state.
pub fn ml_decode(trellis: &TailbitingTrellis, r: &BitVector) -> Result<DecodeResult> {
    check_length(trellis, r)?;
    let mut best: Option<(usize, Vec<u32>)> = None;
    for s in 0..trellis.num_states() as u32 {
        let (inputs, d) = constrained_viterbi(trellis, r, s)?;
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, inputs));
        }
    }
    let (_, inputs) = best.expect("at least one state");
    Ok(DecodeResult::from_inputs(trellis.code(), r, &inputs, trellis.num_states(), true))
}

struct Iterations {
    /// (own distance, inputs) of the best tailbiting candidate
    best: Option<(u32, Vec<u32>)>,
    converged: bool,
    used: usize,
    /// First-pass end metrics: lower bounds on any tailbiting path ending there.
    lower_bounds: Vec<u32>,
}

fn iterate(trellis: &TailbitingTrellis, sections: &[u64], max_iterations: usize) -> Iterations {
    let states = trellis.num_states();
    let mut initial = vec![0u32; states];
    let mut pass = new_pass(trellis);
    let mut out = Iterations { best: None, converged: false, used: 0, lower_bounds: Vec::new() };
    for _ in 0..max_iterations {
        out.used += 1;
        forward(trellis, sections, &initial, &mut pass);
        if out.used == 1 {
            out.lower_bounds = pass.metric.clone();
        }

        let mut tb_best: Option<(u32, u32)> = None;
        for s in 0..states {
            if pass.origin[s] as usize == s && pass.metric[s] != UNREACHED {
                let d = pass.metric[s] - initial[s];
                if tb_best.map_or(true, |(bd, _)| d < bd) {
                    tb_best = Some((d, s as u32));
                }
            }
        }
        if let Some((d, s)) = tb_best {
            if out.best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                out.best = Some((d, traceback(trellis, &pass, s)));
            }
        }

        // overall best survivor: smallest metric, then tailbiting, then smaller index
        let mut end = 0usize;
        for s in 1..states {
            let (ms, me) = (pass.metric[s], pass.metric[end]);
            let tb_s = pass.origin[s] as usize == s;
            let tb_e = pass.origin[end] == end as u32;
            if ms < me || (ms == me && tb_s && !tb_e) {
                end = s;
            }
        }
        if pass.origin[end] as usize == end {
            out.converged = true;
            break;
        }
        initial.copy_from_slice(&pass.metric);
    }
    out
}

/// Wrap-around Viterbi decoding. Stops as soon as the overall best survivor
/// is tailbiting. Otherwise, after `max_iterations`, the best candidate is
/// improved by constrained passes over the start states whose first-pass lower
/// bound can still beat it, so a valid codeword is always returned.
pub fn wava_decode(trellis: &TailbitingTrellis, r: &BitVector, cfg: &WavaConfig) -> Result<DecodeResult> {
    check_length(trellis, r)?;
    if cfg.max_iterations == 0 {
        return Err(Error::InvalidInput("WAVA needs at least one iteration".into()));
    }
    let sections = received_sections(trellis, r);
    let run = iterate(trellis, &sections, cfg.max_iterations);
    let inputs = if run.converged {
        run.best.expect("converged runs hold a candidate").1
    } else {
        let mut order: Vec<u32> = (0..trellis.num_states() as u32).collect();
        order.sort_by_key(|&s| (run.lower_bounds[s as usize], s));
        let mut best = run.best;
        for s in order {
            if best.as_ref().is_some_and(|(bd, _)| run.lower_bounds[s as usize] >= *bd) {
                break;
            }
            let (inputs, d) = constrained_viterbi(trellis, r, s)?;
            if best.as_ref().map_or(true, |(bd, _)| (d as u32) < *bd) {
                best = Some((d as u32, inputs));
            }
        }
        best.expect("some start state was searched").1
    };
    let result = DecodeResult::from_inputs(trellis.code(), r, &inputs, run.used, run.converged);
    debug_assert_eq!(trellis.code().encode(&result.message).ok().as_ref(), Some(&result.codeword));
    Ok(result)
}

/// Nearest-codeword vector quantization; `distance / N` is the distortion.
pub fn quantize(trellis: &TailbitingTrellis, x: &BitVector, cfg: &WavaConfig) -> Result<DecodeResult> {
    wava_decode(trellis, x, cfg)
}

/// Brute-force nearest codeword over all `2^K` messages (smallest message on ties).
pub fn exhaustive_decode(code: &TailbitingCode, r: &BitVector) -> Result<DecodeResult> {
    if r.len() != code.length() {
        return Err(Error::dimension("received word length", code.length(), r.len()));
    }
    let words = code.codewords()?;
    let (idx, d) = words
        .iter()
        .enumerate()
        .map(|(i, w)| (i, w.hamming_distance(r).expect("same length")))
        .min_by_key(|&(i, d)| (d, i))
        .expect("nonempty code");
    Ok(DecodeResult {
        message: BitVector::from_u64(idx as u64, code.dimension()),
        codeword: words[idx].clone(),
        distance: d,
        iterations_used: 0,
        converged: true,
    })
}
