//! Nested tailbiting convolutional codes for secret-key agreement with noisy
//! physical identifiers.
//!
//! A high-rate quantizer code and a low-rate error-correction code share one
//! shift register: the error-correction code is the quantizer code with every
//! input except the register input held at zero. Enrollment quantizes the
//! identifier to the nearest quantizer codeword; the register-input bits are
//! the key and the rest are public helper data. Reconstruction strips the
//! helper-data contribution from a fresh noisy reading and decodes in the
//! subcode.
//!
//! Layers, bottom up:
//!
//! - [`gf2`]: packed GF(2) vectors and matrices.
//! - [`encoder`]: encoder matrices, freezing schedules, tailbiting encoding.
//! - [`spectrum`]: trellis construction, weight enumerators, free distance.
//! - [`wava`]: wrap-around Viterbi decoding and quantization.
//! - [`bounds`]: union bound, crossover solver, rate region, complexity.
//! - [`design`]: randomized code search and the nested design procedure.
//! - [`key_agreement`]: enrollment and reconstruction.
//! - [`sim`]: seeded Monte Carlo estimates.
//! - [`report`], [`io`]: tables, curves and file formats.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```text
//! cargo run --release --example encode_and_spectrum
//! cargo run --release --example free_distance
//! cargo run --release --example wava_decoding
//! cargo run --release --example union_bound
//! cargo run --release --example fec_search
//! cargo run --release --example nested_design
//! cargo run --release --example key_agreement
//! cargo run --release --example fer_curve
//! cargo run --release --example rate_region
//! cargo run --release --example parameter_table
//! ```

pub mod bounds;
pub mod design;
pub mod encoder;
pub mod error;
pub mod gf2;
pub mod io;
pub mod key_agreement;
pub mod report;
pub mod rng;
pub mod sim;
pub mod spectrum;
pub mod wava;

pub use design::NestedCodePair;
pub use encoder::{EncoderSpec, FreezingSchedule, TailbitingCode};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use spectrum::{build_trellis, TailbitingTrellis, WeightSpectrum};
pub use wava::WavaConfig;
