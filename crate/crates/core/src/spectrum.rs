//! Tailbiting trellises, weight enumerators and free distance.
//!
//! The weight enumerator of a tailbiting code is the trace of the time-ordered
//! product of per-section transfer matrices `T_t(X)`. Instead of forming the
//! `2^m × 2^m` product, the row `e_s` is propagated through the sections for
//! every start state `s` and the coefficient polynomial at `s` is read off.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::encoder::{EncoderSpec, TailbitingCode};
use crate::error::{Error, Result};

/// One trellis edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub input: u32,
    pub output: u64,
    pub next: u32,
}

/// The tailbiting trellis of a code with `ell` sections and `2^m` states.
///
/// Edges are shared between sections (the encoder is time invariant); each
/// section keeps only its list of admissible input tuples.
#[derive(Clone, Debug)]
pub struct TailbitingTrellis {
    code: TailbitingCode,
    edges: Vec<Edge>,
    section_inputs: Vec<Vec<u32>>,
}

impl TailbitingTrellis {
    pub fn code(&self) -> &TailbitingCode {
        &self.code
    }

    pub fn sections(&self) -> usize {
        self.section_inputs.len()
    }

    pub fn num_states(&self) -> usize {
        1 << self.code.spec().memory()
    }

    /// Admissible input tuples of section `t`, in increasing order.
    pub fn inputs(&self, t: usize) -> &[u32] {
        &self.section_inputs[t]
    }

    #[inline]
    pub fn edge(&self, state: u32, input: u32) -> Edge {
        self.edges[((state as usize) << self.code.spec().inputs()) | input as usize]
    }

    pub fn out_edges(&self, t: usize, state: u32) -> impl Iterator<Item = Edge> + '_ {
        self.section_inputs[t].iter().map(move |&u| self.edge(state, u))
    }

    pub fn out_degree(&self, t: usize) -> usize {
        self.section_inputs[t].len()
    }
}

pub fn build_trellis(code: &TailbitingCode) -> TailbitingTrellis {
    let tables = code.tables();
    let k = code.spec().inputs();
    let mut edges = Vec::with_capacity(tables.num_states() << k);
    for s in 0..tables.num_states() as u32 {
        for u in 0..(1u32 << k) {
            edges.push(Edge { input: u, output: tables.output(s, u), next: tables.next_state(s, u) });
        }
    }
    let section_inputs = (0..code.sections()).map(|t| code.schedule().admissible_inputs(t)).collect();
    TailbitingTrellis { code: code.clone(), edges, section_inputs }
}

/// Coefficients `A_d` for `d = 0..=d_max`.
///
/// `A_d` counts tailbiting paths (messages) with output weight `d`. When
/// `d_max = N` the counts are exact big integers; truncated spectra use
/// saturating 128-bit counters and set `saturated` on overflow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpectrum {
    coefficients: Vec<BigUint>,
    block_length: usize,
    saturated: bool,
}

impl WeightSpectrum {
    /// Builds a spectrum from explicit coefficients (index = weight).
    pub fn from_coefficients(coefficients: Vec<BigUint>, block_length: usize) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("spectrum needs at least the A_0 coefficient".into()));
        }
        if coefficients.len() > block_length + 1 {
            return Err(Error::InvalidInput(format!(
                "{} coefficients exceed block length {block_length}",
                coefficients.len()
            )));
        }
        Ok(Self { coefficients, block_length, saturated: false })
    }

    /// Sparse constructor from `(d, A_d)` pairs; `A_0` defaults to 1.
    pub fn from_pairs(pairs: &[(usize, u64)], block_length: usize) -> Result<Self> {
        let d_max = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let mut coefficients = vec![BigUint::zero(); d_max + 1];
        coefficients[0] = BigUint::from(1u32);
        for &(d, a) in pairs {
            coefficients[d] = BigUint::from(a);
        }
        Self::from_coefficients(coefficients, block_length)
    }

    pub fn d_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn is_truncated(&self) -> bool {
        self.d_max() < self.block_length
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn coefficient(&self, d: usize) -> BigUint {
        self.coefficients.get(d).cloned().unwrap_or_default()
    }

    pub fn coefficients(&self) -> &[BigUint] {
        &self.coefficients
    }

    pub fn coefficient_f64(&self, d: usize) -> f64 {
        self.coefficients.get(d).and_then(ToPrimitive::to_f64).unwrap_or(0.0)
    }

    /// Smallest `d ≥ 1` with `A_d > 0` within the computed range.
    pub fn d_min(&self) -> Option<usize> {
        (1..self.coefficients.len()).find(|&d| !self.coefficients[d].is_zero())
    }

    pub fn total(&self) -> BigUint {
        self.coefficients.iter().sum()
    }

    /// `(d, A_d)` for the first `count` nonzero weights `d ≥ 1`.
    pub fn head(&self, count: usize) -> Vec<(usize, String)> {
        (1..self.coefficients.len())
            .filter(|&d| !self.coefficients[d].is_zero())
            .take(count)
            .map(|d| (d, self.coefficients[d].to_string()))
            .collect()
    }
}

trait Count: Clone + Send + Sync {
    fn nil() -> Self;
    fn unit() -> Self;
    fn is_nil(&self) -> bool;
    /// Returns true on saturation.
    fn add_assign(&mut self, other: &Self) -> bool;
    fn into_big(self) -> BigUint;
}

impl Count for u128 {
    fn nil() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn add_assign(&mut self, other: &Self) -> bool {
        match self.checked_add(*other) {
            Some(v) => {
                *self = v;
                false
            }
            None => {
                *self = u128::MAX;
                true
            }
        }
    }
    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Count for BigUint {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        BigUint::from(1u32)
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) -> bool {
        *self += other;
        false
    }
    fn into_big(self) -> BigUint {
        self
    }
}

/// Truncated-polynomial row propagation for one start state. Returns the
/// coefficients of the diagonal entry `[Π_t T_t(X)]_{s,s}`.
fn diagonal_entry<C: Count>(trellis: &TailbitingTrellis, start: u32, d_max: usize) -> (Vec<C>, bool) {
    let states = trellis.num_states();
    let width = d_max + 1;
    let mut cur = vec![C::nil(); states * width];
    let mut next = vec![C::nil(); states * width];
    // highest nonzero degree + 1 per state, 0 if the entry is empty
    let mut cur_top = vec![0usize; states];
    let mut next_top = vec![0usize; states];
    cur[start as usize * width] = C::unit();
    cur_top[start as usize] = 1;
    let mut saturated = false;
    for t in 0..trellis.sections() {
        for v in next.iter_mut() {
            *v = C::nil();
        }
        next_top.iter_mut().for_each(|x| *x = 0);
        for s in 0..states {
            let top = cur_top[s];
            if top == 0 {
                continue;
            }
            for e in trellis.out_edges(t, s as u32) {
                let w = e.output.count_ones() as usize;
                if w > d_max {
                    continue;
                }
                let dst = e.next as usize;
                let limit = top.min(width - w);
                let (src_row, dst_row) = (s * width, dst * width);
                let mut any = false;
                for d in 0..limit {
                    let c = &cur[src_row + d];
                    if !c.is_nil() {
                        saturated |= next[dst_row + d + w].add_assign(c);
                        any = true;
                    }
                }
                if any {
                    next_top[dst] = next_top[dst].max(limit + w);
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        std::mem::swap(&mut cur_top, &mut next_top);
    }
    let row = start as usize * width;
    (cur[row..row + width].to_vec(), saturated)
}

fn enumerate<C: Count>(trellis: &TailbitingTrellis, d_max: usize) -> (Vec<BigUint>, bool) {
    let partials: Vec<(Vec<C>, bool)> = (0..trellis.num_states() as u32)
        .into_par_iter()
        .map(|s| diagonal_entry::<C>(trellis, s, d_max))
        .collect();
    let mut total = vec![C::nil(); d_max + 1];
    let mut saturated = false;
    for (row, sat) in partials {
        saturated |= sat;
        for (acc, v) in total.iter_mut().zip(&row) {
            saturated |= acc.add_assign(v);
        }
    }
    (total.into_iter().map(Count::into_big).collect(), saturated)
}

/// `A(X) = Tr(Π_t T_t(X))`, truncated at `d_max`.
pub fn weight_enumerator(code: &TailbitingCode, d_max: usize) -> Result<WeightSpectrum> {
    weight_enumerator_on(&build_trellis(code), d_max)
}

pub fn weight_enumerator_on(trellis: &TailbitingTrellis, d_max: usize) -> Result<WeightSpectrum> {
    let code = trellis.code();
    let n_len = code.length();
    if d_max > n_len {
        return Err(Error::InvalidInput(format!("d_max = {d_max} exceeds block length {n_len}")));
    }
    // Counts never exceed 2^K, so u128 is exact below K = 128.
    let (coefficients, saturated) = if d_max < n_len || code.dimension() < 127 {
        enumerate::<u128>(trellis, d_max)
    } else {
        enumerate::<BigUint>(trellis, d_max)
    };
    Ok(WeightSpectrum { coefficients, block_length: n_len, saturated })
}

/// Number of messages mapped to the all-zero word (`A_0`). The encoder map is
/// linear, so it is injective iff this is 1.
pub fn kernel_size(code: &TailbitingCode) -> BigUint {
    let trellis = build_trellis(code);
    let (coefficients, _) = if code.dimension() < 127 {
        enumerate::<u128>(&trellis, 0)
    } else {
        enumerate::<BigUint>(&trellis, 0)
    };
    coefficients.into_iter().next().unwrap_or_default()
}

pub fn is_injective(code: &TailbitingCode) -> bool {
    kernel_size(code) == BigUint::from(1u32)
}

/// Free distance and number of minimum-weight detours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeDistanceReport {
    pub d_free: usize,
    /// Saturates at `u128::MAX`; also set to `u128::MAX` when a zero-weight
    /// cycle lies on a minimum-weight detour (infinitely many detours).
    pub a_free: u128,
    /// Some nonzero input sequence leaves and re-merges with the zero state
    /// without producing output.
    pub degenerate: bool,
    pub catastrophic: bool,
}

impl FreeDistanceReport {
    /// Ordering key for "larger `d_free`, then smaller `A_free`".
    pub fn better_than(&self, other: &FreeDistanceReport) -> bool {
        self.d_free > other.d_free || (self.d_free == other.d_free && self.a_free < other.a_free)
    }
}

/// Free distance of the unterminated code.
///
/// A detour leaves state 0 with a nonzero input tuple and ends at its first
/// return to state 0. The minimum detour weight is found with a Dijkstra search
/// over the state diagram; the multiplicity is the number of shortest paths,
/// counted over the subgraph of tight edges.
pub fn free_distance(spec: &EncoderSpec) -> FreeDistanceReport {
    let tables = spec.step_tables();
    let states = tables.num_states();
    let inputs = 1u32 << spec.inputs();
    const INF: usize = usize::MAX;

    // dist over nonzero states (index 0 unused), `sink` for re-merging.
    let mut dist = vec![INF; states];
    let mut heap = BinaryHeap::new();
    let mut sink = INF;
    for u in 1..inputs {
        let w = tables.output(0, u).count_ones() as usize;
        let v = tables.next_state(0, u) as usize;
        if v == 0 {
            sink = sink.min(w);
        } else if w < dist[v] {
            dist[v] = w;
            heap.push(Reverse((w, v)));
        }
    }
    while let Some(Reverse((d, s))) = heap.pop() {
        if d > dist[s] || d >= sink {
            continue;
        }
        for u in 0..inputs {
            let nd = d + tables.output(s as u32, u).count_ones() as usize;
            let v = tables.next_state(s as u32, u) as usize;
            if v == 0 {
                sink = sink.min(nd);
            } else if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    if sink == INF {
        // Unreachable for shift-register encoders: zero inputs always flush.
        return FreeDistanceReport { d_free: 0, a_free: 0, degenerate: true, catastrophic: false };
    }
    let d_free = sink;

    // Nodes lying on some minimum-weight detour: dist[v] + (shortest v→sink) == d_free.
    // Compute shortest distance to sink backwards with Dijkstra on reversed edges.
    let mut to_sink = vec![INF; states];
    let mut rev: Vec<Vec<(usize, usize)>> = vec![Vec::new(); states];
    let mut heap = BinaryHeap::new();
    for s in 1..states {
        for u in 0..inputs {
            let w = tables.output(s as u32, u).count_ones() as usize;
            let v = tables.next_state(s as u32, u) as usize;
            if v == 0 {
                if w < to_sink[s] {
                    to_sink[s] = w;
                }
            } else {
                rev[v].push((s, w));
            }
        }
    }
    for s in 1..states {
        if to_sink[s] != INF {
            heap.push(Reverse((to_sink[s], s)));
        }
    }
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > to_sink[v] {
            continue;
        }
        for &(s, w) in &rev[v] {
            if d + w < to_sink[s] {
                to_sink[s] = d + w;
                heap.push(Reverse((d + w, s)));
            }
        }
    }
    let on_path = |v: usize| dist[v] != INF && to_sink[v] != INF && dist[v] + to_sink[v] == d_free;

    // Tight edges among on-path nodes; count paths in topological order.
    let mut indeg = vec![0usize; states];
    let mut tight: Vec<Vec<usize>> = vec![Vec::new(); states];
    for s in 1..states {
        if !on_path(s) {
            continue;
        }
        for u in 0..inputs {
            let w = tables.output(s as u32, u).count_ones() as usize;
            let v = tables.next_state(s as u32, u) as usize;
            if v != 0 && on_path(v) && dist[s] + w == dist[v] {
                tight[s].push(v);
                indeg[v] += 1;
            }
        }
    }
    let mut count = vec![0u128; states];
    for u in 1..inputs {
        let w = tables.output(0, u).count_ones() as usize;
        let v = tables.next_state(0, u) as usize;
        if v != 0 && on_path(v) && w == dist[v] {
            count[v] = count[v].saturating_add(1);
        }
    }
    let mut queue: Vec<usize> = (1..states).filter(|&v| on_path(v) && indeg[v] == 0).collect();
    let mut visited = 0usize;
    let on_path_total = (1..states).filter(|&v| on_path(v)).count();
    let mut head = 0;
    while head < queue.len() {
        let s = queue[head];
        head += 1;
        visited += 1;
        for &v in &tight[s] {
            count[v] = count[v].saturating_add(count[s]);
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    let catastrophic = visited < on_path_total;

    let mut a_free: u128 = 0;
    for u in 1..inputs {
        if tables.next_state(0, u) == 0 && tables.output(0, u).count_ones() as usize == d_free {
            a_free = a_free.saturating_add(1);
        }
    }
    for s in 1..states {
        if !on_path(s) {
            continue;
        }
        for u in 0..inputs {
            if tables.next_state(s as u32, u) == 0
                && dist[s] + tables.output(s as u32, u).count_ones() as usize == d_free
            {
                a_free = a_free.saturating_add(count[s]);
            }
        }
    }
    if catastrophic {
        a_free = u128::MAX;
    }
    FreeDistanceReport { d_free, a_free, degenerate: d_free == 0, catastrophic }
}
