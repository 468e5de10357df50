//! State-space convolutional encoder with a single shift register.
//!
//! One step of the encoder computes
//!
//! ```text
//! c_t     = s_t · Cᵀ + u_t · Dᵀ
//! s_{t+1} = s_t · Aᵀ + u_t · Bᵀ
//! ```
//!
//! where `A` is the `m × m` down-shift matrix, `B = (e₁ᵀ | B̃)` and
//! `D = (0 | D̃)`. Input 0 (input 1 in 1-based notation) always feeds the
//! register and never reaches the output directly.
//!
//! Internally states, inputs and outputs are packed into integers with element
//! `i` in bit `i`.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::gf2::{gf2_vec_mat, BitMatrix, BitVector};

pub const MAX_MEMORY: usize = 20;
pub const MAX_INPUTS: usize = 16;
pub const MAX_OUTPUTS: usize = 64;

/// Encoder described by `(B̃, C, D̃)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncoderSpec {
    m: usize,
    k: usize,
    n: usize,
    b_tilde: BitMatrix,
    c: BitMatrix,
    d_tilde: BitMatrix,
}

impl EncoderSpec {
    /// `b_tilde` is `m × (k−1)`, `c` is `n × m`, `d_tilde` is `n × (k−1)`.
    pub fn new(b_tilde: BitMatrix, c: BitMatrix, d_tilde: BitMatrix) -> Result<Self> {
        let n = c.rows();
        let m = c.cols();
        if m == 0 || m > MAX_MEMORY {
            return Err(Error::InvalidInput(format!("memory m = {m} must be in 1..={MAX_MEMORY}")));
        }
        if n == 0 || n > MAX_OUTPUTS {
            return Err(Error::InvalidInput(format!("n = {n} must be in 1..={MAX_OUTPUTS}")));
        }
        if b_tilde.rows() != m {
            return Err(Error::dimension("rows of B_tilde (must equal m)", m, b_tilde.rows()));
        }
        if d_tilde.rows() != n {
            return Err(Error::dimension("rows of D_tilde (must equal n)", n, d_tilde.rows()));
        }
        if b_tilde.cols() != d_tilde.cols() {
            return Err(Error::dimension("columns of D_tilde (must equal columns of B_tilde)", b_tilde.cols(), d_tilde.cols()));
        }
        let k = b_tilde.cols() + 1;
        if k > MAX_INPUTS {
            return Err(Error::InvalidInput(format!("k = {k} must be at most {MAX_INPUTS}")));
        }
        Ok(Self { m, k, n, b_tilde, c, d_tilde })
    }

    /// Rate `1/n` encoder `(0, C, 0)`.
    pub fn feedforward(c: BitMatrix) -> Result<Self> {
        let (n, m) = (c.rows(), c.cols());
        Self::new(BitMatrix::zeros(m, 0), c, BitMatrix::zeros(n, 0))
    }

    pub fn memory(&self) -> usize {
        self.m
    }

    pub fn inputs(&self) -> usize {
        self.k
    }

    pub fn outputs(&self) -> usize {
        self.n
    }

    pub fn b_tilde(&self) -> &BitMatrix {
        &self.b_tilde
    }

    pub fn observation(&self) -> &BitMatrix {
        &self.c
    }

    pub fn d_tilde(&self) -> &BitMatrix {
        &self.d_tilde
    }

    /// The shift matrix `A`: row 1 is zero, rows 2..m hold `I_{m−1}` in the first `m−1` columns.
    pub fn system_matrix(&self) -> BitMatrix {
        let mut a = BitMatrix::zeros(self.m, self.m);
        for i in 1..self.m {
            a.set(i, i - 1, true);
        }
        a
    }

    /// `B = (e₁ᵀ | B̃)`.
    pub fn control_matrix(&self) -> BitMatrix {
        let mut e1 = BitMatrix::zeros(self.m, 1);
        e1.set(0, 0, true);
        e1.hconcat(&self.b_tilde).expect("row counts agree")
    }

    /// `D = (0 | D̃)`.
    pub fn transition_matrix(&self) -> BitMatrix {
        BitMatrix::zeros(self.n, 1).hconcat(&self.d_tilde).expect("row counts agree")
    }

    /// One clock cycle, evaluated with the matrix products directly.
    pub fn step(&self, state: &BitVector, input: &BitVector) -> Result<(BitVector, BitVector)> {
        if state.len() != self.m {
            return Err(Error::dimension("encoder state length", self.m, state.len()));
        }
        if input.len() != self.k {
            return Err(Error::dimension("encoder input length", self.k, input.len()));
        }
        let mut out = gf2_vec_mat(state, &self.c.transpose())?;
        out.xor_assign(&gf2_vec_mat(input, &self.transition_matrix().transpose())?)?;
        let mut next = gf2_vec_mat(state, &self.system_matrix().transpose())?;
        next.xor_assign(&gf2_vec_mat(input, &self.control_matrix().transpose())?)?;
        Ok((out, next))
    }

    /// Drops input `i` (0-based, `1 ≤ i < k`) by removing column `i − 1` of `B̃` and `D̃`.
    /// The resulting code is the original restricted to `u^{(i)} ≡ 0`.
    pub fn remove_input_column(&self, i: usize) -> Result<Self> {
        if self.k < 2 {
            return Err(Error::InvalidInput("encoder has a single input; nothing to remove".into()));
        }
        if i == 0 {
            return Err(Error::InvalidInput("input 0 feeds the shift register and cannot be removed".into()));
        }
        if i >= self.k {
            return Err(Error::InvalidInput(format!("input index {i} out of range 1..{}", self.k)));
        }
        Self::new(self.b_tilde.remove_column(i - 1)?, self.c.clone(), self.d_tilde.remove_column(i - 1)?)
    }

    /// Adds a new last input with register column `b_col` and output column `d_col`.
    pub fn append_input_column(&self, b_col: &BitVector, d_col: &BitVector) -> Result<Self> {
        if b_col.len() != self.m {
            return Err(Error::dimension("appended B column length", self.m, b_col.len()));
        }
        if d_col.len() != self.n {
            return Err(Error::dimension("appended D column length", self.n, d_col.len()));
        }
        let b = self.b_tilde.hconcat(&BitMatrix::from_columns(std::slice::from_ref(b_col), self.m)?)?;
        let d = self.d_tilde.hconcat(&BitMatrix::from_columns(std::slice::from_ref(d_col), self.n)?)?;
        Self::new(b, self.c.clone(), d)
    }

    /// Appends a block of columns `(B̃ | B′)`, `(D̃ | D′)`.
    pub fn append_input_block(&self, b_block: &BitMatrix, d_block: &BitMatrix) -> Result<Self> {
        Self::new(self.b_tilde.hconcat(b_block)?, self.c.clone(), self.d_tilde.hconcat(d_block)?)
    }

    /// The rate `1/n` encoder obtained by removing every input but the first.
    pub fn register_only(&self) -> Self {
        Self::feedforward(self.c.clone()).expect("C already validated")
    }

    pub fn step_tables(&self) -> StepTables {
        StepTables::new(self)
    }
}

/// Packed lookup tables equivalent to [`EncoderSpec::step`].
#[derive(Clone, Debug)]
pub struct StepTables {
    m: usize,
    k: usize,
    n: usize,
    state_mask: u32,
    state_out: Vec<u64>,
    input_state: Vec<u32>,
    input_out: Vec<u64>,
}

impl StepTables {
    fn new(spec: &EncoderSpec) -> Self {
        let (m, k, n) = (spec.m, spec.k, spec.n);
        let columns_c: Vec<u64> = (0..m).map(|j| spec.c.column(j).to_u64()).collect();
        let mut state_out = vec![0u64; 1 << m];
        for s in 1..(1usize << m) {
            let low = s.trailing_zeros() as usize;
            state_out[s] = state_out[s & (s - 1)] ^ columns_c[low];
        }
        let b_cols: Vec<u32> = (0..k - 1).map(|j| spec.b_tilde.column(j).to_u64() as u32).collect();
        let d_cols: Vec<u64> = (0..k - 1).map(|j| spec.d_tilde.column(j).to_u64()).collect();
        let mut input_state = vec![0u32; 1 << k];
        let mut input_out = vec![0u64; 1 << k];
        for u in 0..(1usize << k) {
            let mut st = (u & 1) as u32;
            let mut out = 0u64;
            for i in 1..k {
                if (u >> i) & 1 == 1 {
                    st ^= b_cols[i - 1];
                    out ^= d_cols[i - 1];
                }
            }
            input_state[u] = st;
            input_out[u] = out;
        }
        Self { m, k, n, state_mask: ((1u64 << m) - 1) as u32, state_out, input_state, input_out }
    }

    #[inline]
    pub fn memory(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn inputs(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn outputs(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_states(&self) -> usize {
        1 << self.m
    }

    #[inline]
    pub fn next_state(&self, state: u32, input: u32) -> u32 {
        ((state << 1) & self.state_mask) ^ self.input_state[input as usize]
    }

    #[inline]
    pub fn output(&self, state: u32, input: u32) -> u64 {
        self.state_out[state as usize] ^ self.input_out[input as usize]
    }
}

/// Per-time-step sets of frozen inputs. Frozen inputs are pinned to 0.
///
/// Input indices are 0-based; input 0 carries the error-correction subcode and
/// is never frozen.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreezingSchedule {
    k: usize,
    masks: Vec<u32>,
}

impl FreezingSchedule {
    /// No frozen inputs over `ell` sections.
    pub fn none(ell: usize, k: usize) -> Self {
        Self { k, masks: vec![0; ell] }
    }

    pub fn from_sets(k: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(sets.len());
        for (t, set) in sets.iter().enumerate() {
            let mut mask = 0u32;
            for &i in set {
                if i == 0 {
                    return Err(Error::InvalidInput(format!("input 0 cannot be frozen (time step {t})")));
                }
                if i >= k {
                    return Err(Error::InvalidInput(format!("frozen input {i} out of range 1..{k} at time step {t}")));
                }
                mask |= 1 << i;
            }
            masks.push(mask);
        }
        Ok(Self { k, masks })
    }

    /// Freezes `input` at each listed time step.
    pub fn with_frozen(mut self, input: usize, times: &[usize]) -> Result<Self> {
        if input == 0 || input >= self.k {
            return Err(Error::InvalidInput(format!("cannot freeze input {input} of a {}-input encoder", self.k)));
        }
        for &t in times {
            if t >= self.masks.len() {
                return Err(Error::InvalidInput(format!("time step {t} out of range 0..{}", self.masks.len())));
            }
            self.masks[t] |= 1 << input;
        }
        Ok(self)
    }

    /// Freezes every input `1..k` at every step, leaving the rate `1/n` subcode.
    pub fn all_but_register(ell: usize, k: usize) -> Self {
        let mask = ((1u32 << k) - 1) & !1;
        Self { k, masks: vec![mask; ell] }
    }

    pub fn sections(&self) -> usize {
        self.masks.len()
    }

    pub fn inputs(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn frozen_mask(&self, t: usize) -> u32 {
        self.masks[t]
    }

    pub fn frozen_at(&self, t: usize) -> Vec<usize> {
        (1..self.k).filter(|&i| (self.masks[t] >> i) & 1 == 1).collect()
    }

    pub fn is_frozen(&self, t: usize, input: usize) -> bool {
        (self.masks[t] >> input) & 1 == 1
    }

    /// Number of unfrozen inputs at step `t`.
    pub fn free_count(&self, t: usize) -> usize {
        self.k - self.masks[t].count_ones() as usize
    }

    pub fn dimension(&self) -> usize {
        (0..self.masks.len()).map(|t| self.free_count(t)).sum()
    }

    pub fn frozen_total(&self) -> usize {
        self.masks.iter().map(|m| m.count_ones() as usize).sum()
    }

    /// True if every input frozen in `other` is also frozen here.
    pub fn freezes_at_least(&self, other: &FreezingSchedule) -> bool {
        self.masks.len() == other.masks.len() && self.masks.iter().zip(&other.masks).all(|(a, b)| a & b == *b)
    }

    /// All unfrozen input tuples at step `t`, in increasing integer order.
    pub fn admissible_inputs(&self, t: usize) -> Vec<u32> {
        let mask = self.masks[t];
        (0..(1u32 << self.k)).filter(|u| u & mask == 0).collect()
    }

    pub fn to_sets(&self) -> Vec<Vec<usize>> {
        (0..self.masks.len()).map(|t| self.frozen_at(t)).collect()
    }
}

/// A tailbiting block code of length `N = ell·n` from an encoder and a freezing schedule.
#[derive(Clone, Debug)]
pub struct TailbitingCode {
    spec: EncoderSpec,
    schedule: FreezingSchedule,
    tables: StepTables,
    dimension: usize,
}

impl PartialEq for TailbitingCode {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.schedule == other.schedule
    }
}

impl Eq for TailbitingCode {}

impl TailbitingCode {
    pub fn new(spec: EncoderSpec, schedule: FreezingSchedule) -> Result<Self> {
        if schedule.inputs() != spec.inputs() {
            return Err(Error::dimension("freezing schedule input count", spec.inputs(), schedule.inputs()));
        }
        let ell = schedule.sections();
        if ell < spec.memory() {
            return Err(Error::InvalidInput(format!(
                "tailbiting needs at least m = {} sections, got ell = {ell}",
                spec.memory()
            )));
        }
        let tables = spec.step_tables();
        let dimension = schedule.dimension();
        Ok(Self { spec, schedule, tables, dimension })
    }

    /// Code without frozen inputs.
    pub fn unfrozen(spec: EncoderSpec, ell: usize) -> Result<Self> {
        let k = spec.inputs();
        Self::new(spec, FreezingSchedule::none(ell, k))
    }

    pub fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    pub fn schedule(&self) -> &FreezingSchedule {
        &self.schedule
    }

    pub fn tables(&self) -> &StepTables {
        &self.tables
    }

    pub fn sections(&self) -> usize {
        self.schedule.sections()
    }

    /// Block length `N`.
    pub fn length(&self) -> usize {
        self.sections() * self.spec.outputs()
    }

    /// Dimension `K`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn effective_rate(&self) -> Ratio<usize> {
        effective_rate(self)
    }

    /// Scatters message bits into per-step input tuples. Bits fill unfrozen
    /// positions in time order, and within a step by increasing input index.
    pub fn message_to_inputs(&self, message: &BitVector) -> Result<Vec<u32>> {
        if message.len() != self.dimension {
            return Err(Error::dimension("message length", self.dimension, message.len()));
        }
        let k = self.spec.inputs();
        let mut pos = 0;
        let mut inputs = Vec::with_capacity(self.sections());
        for t in 0..self.sections() {
            let mask = self.schedule.frozen_mask(t);
            let mut u = 0u32;
            for i in 0..k {
                if (mask >> i) & 1 == 0 {
                    if message.get(pos) {
                        u |= 1 << i;
                    }
                    pos += 1;
                }
            }
            inputs.push(u);
        }
        Ok(inputs)
    }

    /// Inverse of [`TailbitingCode::message_to_inputs`]. Frozen positions are ignored.
    pub fn inputs_to_message(&self, inputs: &[u32]) -> BitVector {
        let k = self.spec.inputs();
        let mut msg = BitVector::zeros(self.dimension);
        let mut pos = 0;
        for (t, &u) in inputs.iter().enumerate() {
            let mask = self.schedule.frozen_mask(t);
            for i in 0..k {
                if (mask >> i) & 1 == 0 {
                    msg.set(pos, (u >> i) & 1 == 1);
                    pos += 1;
                }
            }
        }
        msg
    }

    /// State reached from the zero state; with `ell ≥ m` it does not depend on the start state.
    pub fn tailbiting_state(&self, inputs: &[u32]) -> u32 {
        let start = inputs.len().saturating_sub(self.spec.memory());
        inputs[start..].iter().fold(0u32, |s, &u| self.tables.next_state(s, u))
    }

    /// Encodes per-step input tuples and returns the codeword and the start state.
    pub fn encode_inputs(&self, inputs: &[u32]) -> (BitVector, u32) {
        let n = self.spec.outputs();
        let start = self.tailbiting_state(inputs);
        let mut state = start;
        let mut word = BitVector::zeros(self.length());
        for (t, &u) in inputs.iter().enumerate() {
            word.set_bits(t * n, n, self.tables.output(state, u));
            state = self.tables.next_state(state, u);
        }
        debug_assert_eq!(state, start, "tailbiting condition violated");
        (word, start)
    }

    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        encode_tailbiting(self, message)
    }

    /// Encodes and also returns the realized state sequence `s_1, ..., s_{ell+1}`.
    pub fn encode_with_states(&self, message: &BitVector) -> Result<(BitVector, Vec<u32>)> {
        let inputs = self.message_to_inputs(message)?;
        let (word, start) = self.encode_inputs(&inputs);
        let mut states = Vec::with_capacity(inputs.len() + 1);
        let mut s = start;
        states.push(s);
        for &u in &inputs {
            s = self.tables.next_state(s, u);
            states.push(s);
        }
        Ok((word, states))
    }

    /// All codewords, indexed by message integer. Only for small `K`.
    pub fn codewords(&self) -> Result<Vec<BitVector>> {
        if self.dimension > 24 {
            return Err(Error::InvalidInput(format!("exhaustive enumeration refused for K = {}", self.dimension)));
        }
        (0..(1u64 << self.dimension))
            .map(|x| self.encode(&BitVector::from_u64(x, self.dimension)))
            .collect()
    }
}

/// Two-pass tailbiting encoding: the first pass from the zero state yields the
/// final state, which is then used as the start state of the second pass.
pub fn encode_tailbiting(code: &TailbitingCode, message: &BitVector) -> Result<BitVector> {
    let inputs = code.message_to_inputs(message)?;
    Ok(code.encode_inputs(&inputs).0)
}

pub fn effective_rate(code: &TailbitingCode) -> Ratio<usize> {
    Ratio::new(code.dimension(), code.length())
}
