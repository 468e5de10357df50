//! Secret-key agreement with a nested code pair.
//!
//! Enrollment quantizes the first measurement `x` to the nearest quantizer
//! codeword; its input-0 bits are the key and the remaining message bits are
//! public helper data. Reconstruction removes the helper-data contribution from
//! the second measurement `y` and decodes the remainder in the subcode.

use crate::design::NestedCodePair;
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::wava::{quantize, wava_decode, WavaConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnrollmentRecord {
    pub secret_key: BitVector,
    pub helper_data: BitVector,
    /// Hamming distance from `x` to the chosen quantizer codeword.
    pub distortion: usize,
}

/// Enrollment binding a caller-chosen key: helper data carries the generated
/// key masked by the chosen one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChosenKeyRecord {
    pub helper_data: BitVector,
    pub pad: BitVector,
    pub distortion: usize,
}

fn check_length(pair: &NestedCodePair, v: &BitVector, what: &str) -> Result<()> {
    if v.len() != pair.block_length() {
        return Err(Error::dimension(what, pair.block_length(), v.len()));
    }
    Ok(())
}

pub fn enroll(pair: &NestedCodePair, x: &BitVector) -> Result<EnrollmentRecord> {
    enroll_with(pair, x, &WavaConfig::default())
}

pub fn enroll_with(pair: &NestedCodePair, x: &BitVector, cfg: &WavaConfig) -> Result<EnrollmentRecord> {
    check_length(pair, x, "enrollment measurement length")?;
    let q = quantize(pair.vq_trellis(), x, cfg)?;
    let (secret_key, helper_data) = pair.split_message(&q.message)?;
    Ok(EnrollmentRecord { secret_key, helper_data, distortion: q.distance })
}

pub fn reconstruct(pair: &NestedCodePair, y: &BitVector, helper: &BitVector) -> Result<BitVector> {
    reconstruct_with(pair, y, helper, &WavaConfig::default())
}

pub fn reconstruct_with(pair: &NestedCodePair, y: &BitVector, helper: &BitVector, cfg: &WavaConfig) -> Result<BitVector> {
    check_length(pair, y, "reconstruction measurement length")?;
    let offset = pair.vq_code().encode(&pair.merge_message(&BitVector::zeros(pair.k_fec()), helper)?)?;
    let shifted = y.xor(&offset)?;
    Ok(wava_decode(pair.fec_trellis(), &shifted, cfg)?.message)
}

pub fn enroll_chosen(pair: &NestedCodePair, x: &BitVector, key: &BitVector, cfg: &WavaConfig) -> Result<ChosenKeyRecord> {
    if key.len() != pair.k_fec() {
        return Err(Error::dimension("chosen key length", pair.k_fec(), key.len()));
    }
    let rec = enroll_with(pair, x, cfg)?;
    Ok(ChosenKeyRecord { helper_data: rec.helper_data, pad: rec.secret_key.xor(key)?, distortion: rec.distortion })
}

pub fn reconstruct_chosen(
    pair: &NestedCodePair,
    y: &BitVector,
    helper: &BitVector,
    pad: &BitVector,
    cfg: &WavaConfig,
) -> Result<BitVector> {
    if pad.len() != pair.k_fec() {
        return Err(Error::dimension("key pad length", pair.k_fec(), pad.len()));
    }
    reconstruct_with(pair, y, helper, cfg)?.xor(pad)
}
