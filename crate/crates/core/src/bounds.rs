//! Closed-form analysis: binary entropy, binary convolution, the union bound
//! on block error probability and its inverse, the generated-secret rate
//! region, finite-length quantizer bounds and decoder complexity estimates.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spectrum::WeightSpectrum;

/// Binary entropy in bits, with `H_b(0) = H_b(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    Error::check_probability("x", x, 0.0, 1.0, "[0, 1]")?;
    Ok(h2(x))
}

pub(crate) fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// Binary convolution `p(1−x) + (1−p)x`: crossover of two cascaded BSCs.
pub fn star(p: f64, x: f64) -> Result<f64> {
    Error::check_probability("p", p, 0.0, 1.0, "[0, 1]")?;
    Error::check_probability("x", x, 0.0, 1.0, "[0, 1]")?;
    Ok(star_unchecked(p, x))
}

pub(crate) fn star_unchecked(p: f64, x: f64) -> f64 {
    p * (1.0 - x) + (1.0 - p) * x
}

/// Natural logarithm of a big integer; `-inf` for zero.
pub fn ln_biguint(a: &BigUint) -> f64 {
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = a.bits();
    if bits <= 1000 {
        return a.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (a >> shift).to_u64().expect("64 leading bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `log2` of a big integer; `-inf` for zero.
pub fn log2_biguint(a: &BigUint) -> f64 {
    ln_biguint(a) / std::f64::consts::LN_2
}

/// `ln(j!)` for `j = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for j in 1..=n {
        acc += (j as f64).ln();
        table.push(acc);
    }
    table
}

/// Kahan-compensated sum.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnionBound {
    pub value: f64,
    /// The spectrum stops below the block length, so weights above `d_max`
    /// are missing from the sum.
    pub truncated: bool,
}

/// Union bound on maximum-likelihood block error probability over a BSC:
/// `Σ_d A_d · Pr[at least ⌈d/2⌉ of d bits flip]`, summed over `d ≥ d_min`.
/// Ties at `i = d/2` count in full.
pub fn union_bound_pb(spectrum: &WeightSpectrum, p: f64) -> Result<UnionBound> {
    Error::check_probability("p_c", p, 0.0, 0.5, "[0, 0.5]")?;
    let d_min = spectrum
        .d_min()
        .ok_or_else(|| Error::InvalidInput("spectrum has no nonzero weight within its range".into()))?;
    let truncated = spectrum.is_truncated();
    if p == 0.0 {
        return Ok(UnionBound { value: 0.0, truncated });
    }
    let ln_fact = ln_factorials(spectrum.d_max());
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut total = Compensated::default();
    for d in d_min..=spectrum.d_max() {
        let a = &spectrum.coefficients()[d];
        if a.is_zero() {
            continue;
        }
        let ln_a = ln_biguint(a);
        for i in d.div_ceil(2)..=d {
            let ln_c = ln_fact[d] - ln_fact[i] - ln_fact[d - i];
            total.add((ln_a + ln_c + i as f64 * lp + (d - i) as f64 * lq).exp());
        }
    }
    Ok(UnionBound { value: total.sum, truncated })
}

const SOLVER_REL_TOL: f64 = 1e-6;
const SOLVER_MAX_ITER: usize = 200;

/// Crossover probability at which the union bound equals `target_pb`.
///
/// The bound is increasing in `p`, so bisection on `[1e-9, 0.5]` applies; the
/// result is accurate to a relative `1e-6` in the bound.
pub fn solve_crossover(spectrum: &WeightSpectrum, target_pb: f64) -> Result<f64> {
    if !(target_pb > 0.0) || !target_pb.is_finite() {
        return Err(Error::OutOfRange { name: "target_pb", value: target_pb, range: "(0, UB(0.5)]" });
    }
    let bound = |p: f64| union_bound_pb(spectrum, p).map(|b| b.value);
    let at_upper = bound(0.5)?;
    if target_pb > at_upper * (1.0 + SOLVER_REL_TOL) {
        return Err(Error::Unreachable { target: target_pb, at_upper });
    }
    if target_pb >= at_upper {
        return Ok(0.5);
    }
    let mut lo = 1e-9;
    if bound(lo)? >= target_pb {
        lo = 0.0;
    }
    let mut hi = 0.5;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..SOLVER_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let v = bound(mid)?;
        if (v - target_pb).abs() <= SOLVER_REL_TOL * target_pb || hi - lo < 1e-15 {
            break;
        }
        if v < target_pb {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Largest average quantizer distortion `q` with `q ∗ p_A ≤ p_c`:
/// `(p_c − p_A) / (1 − 2 p_A)`.
pub fn distortion_limit(p_c: f64, p_a: f64) -> Result<f64> {
    Error::check_probability("p_A", p_a, 0.0, 0.5, "[0, 0.5)")?;
    if p_a >= 0.5 {
        return Err(Error::OutOfRange { name: "p_A", value: p_a, range: "[0, 0.5)" });
    }
    Error::check_probability("p_c", p_c, p_a, 0.5, "[p_A, 0.5]")?;
    Ok((p_c - p_a) / (1.0 - 2.0 * p_a))
}

/// Key, leakage and storage rates in bits per source symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateTuple {
    pub r_s: f64,
    pub r_l: f64,
    pub r_w: f64,
}

/// Boundary point of the binary generated-secret region for test channel `q`.
pub fn gs_region_point(p_a: f64, q: f64) -> Result<RateTuple> {
    Error::check_probability("p_A", p_a, 0.0, 0.5, "[0, 0.5]")?;
    Error::check_probability("q", q, 0.0, 0.5, "[0, 0.5]")?;
    let h = h2(star_unchecked(q, p_a));
    let r_w = (h - h2(q)).max(0.0);
    Ok(RateTuple { r_s: 1.0 - h, r_l: r_w, r_w })
}

/// `R_s / R_w = K_fec / (K_vq − K_fec)`, exactly.
pub fn key_storage_ratio(k_fec: usize, k_vq: usize) -> Result<Ratio<usize>> {
    if k_fec == 0 || k_vq <= k_fec {
        return Err(Error::InvalidInput(format!(
            "key/storage ratio needs K_vq > K_fec >= 1, got K_fec = {k_fec}, K_vq = {k_vq}"
        )));
    }
    Ok(Ratio::new(k_fec, k_vq - k_fec))
}

pub fn ratio_to_f64(r: Ratio<usize>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `1 − H_b(q) + log₂(N)/(2N)`: second-order rate of a length-`N` quantizer.
pub fn quantizer_rate_approx(n_len: usize, q: f64) -> Result<f64> {
    if n_len < 2 {
        return Err(Error::InvalidInput(format!("block length {n_len} < 2")));
    }
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::OutOfRange { name: "q", value: q, range: "(0, 0.5]" });
    }
    let n = n_len as f64;
    Ok(1.0 - h2(q) + n.log2() / (2.0 * n))
}

/// Sphere-covering converse: a rate-`R_q` length-`N` quantizer can reach
/// distortion `q` only if `Σ_{j ≤ ⌊Nq⌋} C(N, j) ≥ 2^{N(1−R_q)}`.
pub fn quantizer_converse_feasible(n_len: usize, r_q: f64, q: f64) -> bool {
    let radius = ((n_len as f64 * q * (1.0 + 1e-12)).floor().max(0.0) as usize).min(n_len);
    let mut ball = BigUint::one();
    let mut binom = BigUint::one();
    for j in 1..=radius {
        binom = binom * BigUint::from(n_len - j + 1) / BigUint::from(j);
        ball += &binom;
    }
    let exponent = n_len as f64 * (1.0 - r_q);
    if exponent <= 0.0 {
        return true;
    }
    let rounded = exponent.round();
    if (exponent - rounded).abs() <= 1e-9 * exponent.max(1.0) {
        return ball >= BigUint::one() << (rounded as u64);
    }
    log2_biguint(&ball) >= exponent
}

/// Decoding-complexity proportionality values of a WAVA decoder with `V`
/// iterations on a code with `k` inputs, `n` outputs and memory `m`: plain
/// trellis (`F`), trellis with precomputed branch outputs (`P`) and
/// minimal trellis (`M`). Only relative values are meaningful.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityEstimate {
    pub kappa_f: f64,
    pub kappa_p: f64,
    pub kappa_m: f64,
}

impl ComplexityEstimate {
    pub fn kappa_min(&self) -> f64 {
        self.kappa_f.min(self.kappa_p).min(self.kappa_m)
    }

    pub fn log2_f(&self) -> f64 {
        self.kappa_f.log2()
    }

    pub fn log2_p(&self) -> f64 {
        self.kappa_p.log2()
    }

    pub fn log2_m(&self) -> f64 {
        self.kappa_m.log2()
    }

    pub fn log2_min(&self) -> f64 {
        self.kappa_min().log2()
    }
}

pub fn complexity_estimates(n_len: usize, n: usize, k: usize, m: usize, v: usize) -> Result<ComplexityEstimate> {
    if n == 0 || k == 0 || v == 0 || n_len == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "complexity needs 1 <= k <= n, V >= 1, N >= 1 (got N = {n_len}, n = {n}, k = {k}, V = {v})"
        )));
    }
    let sections = n_len as f64 / n as f64;
    let v = v as f64;
    let full = 2f64.powi((k + m) as i32);
    let kappa_f = (n as f64 + v - 1.0) * sections * full;
    let kappa_p = sections * (v * full + 2f64.powi(n as i32));
    let kappa_m = v * n_len as f64 * 2f64.powi((k.min(n - k) + m) as i32);
    Ok(ComplexityEstimate { kappa_f, kappa_p, kappa_m })
}

/// `L · N · log₂ N` for successive-cancellation list decoding with list size `L`.
pub fn pc_complexity(list_size: usize, n_len: usize) -> f64 {
    list_size as f64 * n_len as f64 * (n_len as f64).log2()
}

/// Inputs per step needed to reach rate `r_vq` with `n` outputs: `⌈n·R_vq⌉`.
pub fn inputs_for_rate(n: usize, r_vq: f64) -> usize {
    (n as f64 * r_vq - 1e-9).ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec3() -> WeightSpectrum {
        WeightSpectrum::from_pairs(&[(3, 1)], 6).unwrap()
    }

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.0149).unwrap() - 0.1118).abs() < 1e-4);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn star_values() {
        assert_eq!(star(0.3, 0.0).unwrap(), 0.3);
        assert!((star(0.3, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((star(0.0408, 0.0149).unwrap() - 0.0545).abs() < 5e-4);
        assert!(star(1.2, 0.1).is_err());
    }

    #[test]
    fn union_bound_single_term() {
        let b = union_bound_pb(&spec3(), 0.1).unwrap();
        assert!((b.value - 0.028).abs() < 1e-12);
        assert!(b.truncated);
        assert_eq!(union_bound_pb(&spec3(), 0.0).unwrap().value, 0.0);
        assert!((union_bound_pb(&spec3(), 0.5).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn union_bound_counts_ties_in_full() {
        // d = 2: i ∈ {1, 2}: 2p(1−p) + p²
        let s = WeightSpectrum::from_pairs(&[(2, 1)], 4).unwrap();
        let p: f64 = 0.2;
        let want = 2.0 * p * (1.0 - p) + p * p;
        assert!((union_bound_pb(&s, p).unwrap().value - want).abs() < 1e-12);
    }

    #[test]
    fn union_bound_matches_direct_sum() {
        let s = WeightSpectrum::from_pairs(&[(5, 12), (6, 40), (8, 311), (11, 2048)], 24).unwrap();
        let p: f64 = 0.03;
        let mut want = 0.0;
        for (d, a) in [(5u64, 12.0), (6, 40.0), (8, 311.0), (11, 2048.0)] {
            for i in d.div_ceil(2)..=d {
                want += a * binom(d, i) * p.powi(i as i32) * (1.0 - p).powi((d - i) as i32);
            }
        }
        let got = union_bound_pb(&s, p).unwrap().value;
        assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn union_bound_rejects_empty_spectrum() {
        let s = WeightSpectrum::from_pairs(&[], 6).unwrap();
        assert!(union_bound_pb(&s, 0.1).is_err());
        assert!(union_bound_pb(&spec3(), 0.6).is_err());
    }

    #[test]
    fn huge_coefficients_stay_finite() {
        let a = BigUint::one() << 1100u32;
        let mut coeffs = vec![BigUint::zero(); 41];
        coeffs[0] = BigUint::one();
        coeffs[40] = a;
        let s = WeightSpectrum::from_coefficients(coeffs, 2048).unwrap();
        let v = union_bound_pb(&s, 1e-12).unwrap().value;
        let want = (1100.0 * std::f64::consts::LN_2 + binom(40, 20).ln() + 20.0 * 1e-12f64.ln()).exp();
        assert!(v.is_finite());
        assert!((v - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn solver_examples() {
        assert!((solve_crossover(&spec3(), 0.028).unwrap() - 0.1).abs() < 1e-4);
        assert_eq!(solve_crossover(&spec3(), 0.5).unwrap(), 0.5);
        assert!(matches!(solve_crossover(&spec3(), 0.6), Err(Error::Unreachable { .. })));
        assert!(solve_crossover(&spec3(), 0.0).is_err());
    }

    #[test]
    fn distortion_limit_values() {
        assert!((distortion_limit(0.0545, 0.0149).unwrap() - 0.0408).abs() < 1e-4);
        assert!((distortion_limit(0.0837, 0.0149).unwrap() - 0.0709).abs() < 1e-4);
        assert_eq!(distortion_limit(0.07, 0.0).unwrap(), 0.07);
        assert!(distortion_limit(0.01, 0.02).is_err());
        assert!(distortion_limit(0.6, 0.02).is_err());
    }

    #[test]
    fn region_points() {
        let r = gs_region_point(0.0149, 0.0).unwrap();
        assert!((r.r_s - 0.8882).abs() < 1e-4 && (r.r_w - 0.1118).abs() < 1e-4);
        let r = gs_region_point(0.0149, 0.5).unwrap();
        assert!(r.r_s.abs() < 1e-15 && r.r_w.abs() < 1e-15);
        let r = gs_region_point(0.0149, 0.0408).unwrap();
        let c = 0.0408 * (1.0 - 0.0149) + 0.9592 * 0.0149;
        let h = |x: f64| -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        assert!((r.r_s - (1.0 - h(c))).abs() < 1e-14);
        assert!((r.r_w - (h(c) - h(0.0408))).abs() < 1e-14);
        assert_eq!(r.r_l, r.r_w);
    }

    #[test]
    fn ratios() {
        assert!((ratio_to_f64(key_storage_ratio(128, 309).unwrap()) - 0.7072).abs() < 5e-4);
        assert_eq!(key_storage_ratio(128, 256).unwrap(), Ratio::new(1, 1));
        assert!((ratio_to_f64(key_storage_ratio(128, 381).unwrap()) - 0.5059).abs() < 5e-4);
        assert!(key_storage_ratio(128, 128).is_err());
        assert!(key_storage_ratio(0, 5).is_err());
    }

    #[test]
    fn quantizer_rate_values() {
        assert!((quantizer_rate_approx(512, 0.0648).unwrap() - 0.6626).abs() < 2e-3);
        let n = 1000usize;
        assert!((quantizer_rate_approx(n, 0.5).unwrap() - (n as f64).log2() / (2.0 * n as f64)).abs() < 1e-15);
        let q = 0.1;
        let big = quantizer_rate_approx(1 << 20, q).unwrap();
        assert!(big > 1.0 - h2(q) && big - (1.0 - h2(q)) < 1e-5);
        assert!(quantizer_rate_approx(1, 0.1).is_err());
        assert!(quantizer_rate_approx(10, 0.0).is_err());
    }

    #[test]
    fn converse_examples() {
        assert!(quantizer_converse_feasible(4, 0.5, 0.25));
        assert!(quantizer_converse_feasible(37, 1.0, 0.0));
        assert!(!quantizer_converse_feasible(4, 0.0, 0.0));
        // floor(Nq) jumps at q = j/N: the zigzag
        assert!(!quantizer_converse_feasible(10, 0.7, 0.099));
        assert!(quantizer_converse_feasible(10, 0.7, 0.1));
        assert!(!quantizer_converse_feasible(10, 0.5, 0.1));
    }

    #[test]
    fn converse_against_float_sum() {
        for n_len in [5usize, 17, 60] {
            for ri in 0..=10 {
                let r_q = ri as f64 / 10.0 + 0.013;
                for qi in 0..=20 {
                    let q = qi as f64 / 40.0 + 0.001;
                    let radius = (n_len as f64 * q).floor() as u64;
                    let ball: f64 = (0..=radius).map(|j| binom(n_len as u64, j)).sum();
                    let want = ball.log2() >= n_len as f64 * (1.0 - r_q);
                    assert_eq!(quantizer_converse_feasible(n_len, r_q, q), want, "N={n_len} R={r_q} q={q}");
                }
            }
        }
    }

    #[test]
    fn complexity_reference_values() {
        let fec = complexity_estimates(384, 3, 1, 11, 4).unwrap();
        assert_eq!(fec.kappa_p, 2_098_176.0);
        assert!((fec.log2_min() - 21.00).abs() < 0.01);
        let vq = complexity_estimates(384, 3, 3, 11, 4).unwrap();
        assert!((vq.log2_m() - 21.58).abs() < 0.01);
        assert_eq!(vq.kappa_min(), vq.kappa_m);
        assert_eq!(pc_complexity(8, 1024), 81_920.0);
        assert!((pc_complexity(8, 1024).log2() - 16.32).abs() < 0.01);
        assert!(complexity_estimates(384, 3, 4, 11, 4).is_err());
    }

    #[test]
    fn inputs_for_rate_rounds_up() {
        assert_eq!(inputs_for_rate(3, 0.8047), 3);
        assert_eq!(inputs_for_rate(4, 0.668), 3);
        assert_eq!(inputs_for_rate(3, 2.0 / 3.0), 2);
    }

    proptest! {
        #[test]
        fn star_algebra(p in 0.0..=0.5f64, x in 0.0..=0.5f64, y in 0.0..=0.5f64) {
            prop_assert!((star_unchecked(p, x) - star_unchecked(x, p)).abs() < 1e-15);
            let l = star_unchecked(p, star_unchecked(x, y));
            let r = star_unchecked(star_unchecked(p, x), y);
            prop_assert!((l - r).abs() < 1e-14);
            let s = star_unchecked(p, x);
            prop_assert!((0.0..=0.5 + 1e-15).contains(&s));
        }

        #[test]
        fn region_identity(q in 0.0..=0.5f64, pa in 0.0..=0.5f64) {
            let r = gs_region_point(pa, q).unwrap();
            prop_assert!((r.r_s + r.r_w - (1.0 - h2(q))).abs() < 1e-12);
        }

        #[test]
        fn union_bound_increasing(a in 1u64..1000, b in 0u64..1000, p1 in 0.001..0.49f64, dp in 1e-4..0.01f64) {
            let s = WeightSpectrum::from_pairs(&[(4, a), (7, b)], 16).unwrap();
            let p2 = (p1 + dp).min(0.5);
            prop_assert!(union_bound_pb(&s, p1).unwrap().value < union_bound_pb(&s, p2).unwrap().value);
        }

        #[test]
        fn solver_round_trip(a in 1u64..500, b in 0u64..5000, frac in 0.001..0.9f64) {
            let s = WeightSpectrum::from_pairs(&[(5, a), (8, b)], 30).unwrap();
            let target = frac * union_bound_pb(&s, 0.5).unwrap().value;
            let p = solve_crossover(&s, target).unwrap();
            let got = union_bound_pb(&s, p).unwrap().value;
            prop_assert!((got - target).abs() <= 1e-3 * target);
        }

        #[test]
        fn converse_monotone(n_len in 1usize..80, r in 0.0..1.0f64, q in 0.0..0.5f64, dr in 0.0..0.2f64, dq in 0.0..0.2f64) {
            if quantizer_converse_feasible(n_len, r, q) {
                prop_assert!(quantizer_converse_feasible(n_len, (r + dr).min(1.0), q));
                prop_assert!(quantizer_converse_feasible(n_len, r, (q + dq).min(1.0)));
            }
        }
    }
}
