//! File formats: code-specification JSON, bit-sequence text files and the
//! fixed-column CSV outputs. Floating-point CSV fields use 6 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::UnionBound;
use crate::design::{NestedCodePair, Provenance};
use crate::encoder::{EncoderSpec, FreezingSchedule, TailbitingCode};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::spectrum::{FreeDistanceReport, WeightSpectrum};

/// On-disk code specification. Matrices are arrays of 0/1 rows; `frozen[t]`
/// lists the 0-based input indices pinned to zero at time step `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeFile {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "B_tilde")]
    pub b_tilde: Vec<Vec<u8>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<u8>>,
    #[serde(rename = "D_tilde")]
    pub d_tilde: Vec<Vec<u8>>,
    pub ell: usize,
    pub frozen: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn matrix(rows: &[Vec<u8>], r: usize, c: usize, what: &str) -> Result<BitMatrix> {
    if rows.len() != r {
        return Err(Error::dimension(what, r, rows.len()));
    }
    if rows.iter().any(|row| row.iter().any(|&b| b > 1)) {
        return Err(Error::InvalidInput(format!("{what} has entries other than 0/1")));
    }
    BitMatrix::from_rows_with_cols(rows, c)
}

impl CodeFile {
    pub fn from_code(code: &TailbitingCode) -> Self {
        let spec = code.spec();
        Self {
            m: spec.memory(),
            n: spec.outputs(),
            k: spec.inputs(),
            b_tilde: spec.b_tilde().to_rows(),
            c: spec.observation().to_rows(),
            d_tilde: spec.d_tilde().to_rows(),
            ell: code.sections(),
            frozen: code.schedule().to_sets(),
            provenance: None,
        }
    }

    pub fn from_pair(pair: &NestedCodePair) -> Self {
        let mut file = Self::from_code(pair.vq_code());
        if pair.provenance != Provenance::default() {
            file.provenance = Some(pair.provenance.clone());
        }
        file
    }

    pub fn to_code(&self) -> Result<TailbitingCode> {
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        let b = matrix(&self.b_tilde, self.m, self.k - 1, "B_tilde rows")?;
        let c = matrix(&self.c, self.n, self.m, "C rows")?;
        let d = matrix(&self.d_tilde, self.n, self.k - 1, "D_tilde rows")?;
        let spec = EncoderSpec::new(b, c, d)?;
        let frozen = if self.frozen.is_empty() { vec![Vec::new(); self.ell] } else { self.frozen.clone() };
        if frozen.len() != self.ell {
            return Err(Error::dimension("frozen list length", self.ell, frozen.len()));
        }
        TailbitingCode::new(spec, FreezingSchedule::from_sets(self.k, &frozen)?)
    }

    pub fn to_pair(&self) -> Result<NestedCodePair> {
        NestedCodePair::with_provenance(self.to_code()?, self.provenance.clone().unwrap_or_default())
    }

    pub fn read(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Pretty JSON with every innermost array on one line.
    pub fn to_json(&self) -> Result<String> {
        Ok(collapse_flat_arrays(&serde_json::to_string_pretty(self)?))
    }
}

fn collapse_flat_arrays(pretty: &str) -> String {
    let mut out = String::with_capacity(pretty.len());
    let mut rest = pretty;
    while let Some(open) = rest.find('[') {
        out.push_str(&rest[..=open]);
        rest = &rest[open + 1..];
        let close = rest.find(']').expect("balanced JSON");
        let inner = &rest[..close];
        if inner.contains(['[', '{']) {
            continue;
        }
        let items: Vec<&str> = inner.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
        out.push_str(&items.join(", "));
        out.push(']');
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

/// One sequence of '0'/'1' characters per line.
pub fn parse_bit_lines(text: &str) -> Result<Vec<BitVector>> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::parse).collect()
}

pub fn format_bit_lines(seqs: &[BitVector]) -> String {
    seqs.iter().map(|s| format!("{s}\n")).collect()
}

pub fn read_bit_file(path: &Path) -> Result<Vec<BitVector>> {
    parse_bit_lines(&read_text(path)?)
}

/// Reads a file, naming it in the error.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn write_bit_file(path: &Path, seqs: &[BitVector]) -> Result<()> {
    fs::write(path, format_bit_lines(seqs))?;
    Ok(())
}

/// `x` with 6 significant digits, without trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rows `d,A_d` for every stored weight with a nonzero count.
pub fn spectrum_csv(spectrum: &WeightSpectrum) -> String {
    let mut out = String::from("d,A_d\n");
    for (d, a) in spectrum.coefficients().iter().enumerate() {
        if *a != num_bigint::BigUint::default() {
            out += &format!("{d},{a}\n");
        }
    }
    out
}

pub fn parse_spectrum_csv(text: &str, block_length: usize) -> Result<WeightSpectrum> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["d", "A_d"] {
        return Err(Error::Parse(format!("spectrum CSV header must be d,A_d (got {})", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut coeffs: Vec<num_bigint::BigUint> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let d: usize = rec[0].trim().parse().map_err(|e| Error::Parse(format!("weight {:?}: {e}", &rec[0])))?;
        let a: num_bigint::BigUint = rec[1].trim().parse().map_err(|e| Error::Parse(format!("count {:?}: {e}", &rec[1])))?;
        if coeffs.len() <= d {
            coeffs.resize(d + 1, Default::default());
        }
        coeffs[d] = a;
    }
    if coeffs.is_empty() {
        coeffs.push(1u32.into());
    }
    WeightSpectrum::from_coefficients(coeffs, block_length)
}

pub fn dfree_csv(report: &FreeDistanceReport) -> String {
    let a = if report.catastrophic { "inf".to_string() } else { report.a_free.to_string() };
    format!("d_free,A_free\n{},{a}\n", report.d_free)
}

pub fn bound_csv(points: &[(f64, UnionBound)]) -> String {
    let mut out = String::from("pc,PB_UB\n");
    for (p, ub) in points {
        out += &format!("{},{}\n", fmt_sig(*p), fmt_sig(ub.value));
    }
    out
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
