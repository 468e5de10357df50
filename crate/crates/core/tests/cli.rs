//! Drives the `tbcc` binary through its file formats and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nested_tbcc::io::{read_bit_file, CodeFile};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tbcc-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn tbcc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbcc")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn design_spectrum_bound_chain() {
    let dir = scratch("chain");
    stdout(&tbcc(&dir, &["design-fec", "--n", "3", "--m", "4", "--k-fec", "16", "--target-pb", "1e-2", "--w-max", "20", "--seed", "5", "--out", "fec.json"]));
    let file = CodeFile::read(&dir.join("fec.json")).unwrap();
    assert_eq!((file.m, file.n, file.k, file.ell), (4, 3, 1, 16));
    let p_c = file.provenance.as_ref().unwrap().p_c_union_bound.unwrap();

    let spectrum = stdout(&tbcc(&dir, &["spectrum", "--code", "fec.json", "--out", "s.csv"]));
    assert!(spectrum.is_empty());
    let text = std::fs::read_to_string(dir.join("s.csv")).unwrap();
    assert!(text.starts_with("d,A_d\n0,1\n"));

    let bound = stdout(&tbcc(&dir, &["bound", "--spectrum", "s.csv", "--block-length", "48", "--p", &p_c.to_string()]));
    let mut lines = bound.lines();
    assert_eq!(lines.next(), Some("pc,PB_UB"));
    let value: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 1e-2).abs() < 1e-5, "bound at the designed crossover is {value}");

    let dfree = stdout(&tbcc(&dir, &["dfree", "--code", "fec.json"]));
    assert!(dfree.starts_with("d_free,A_free\n"));
}

#[test]
fn enroll_and_reconstruct_files() {
    let dir = scratch("keys");
    stdout(&tbcc(&dir, &[
        "design-nested", "--p-a", "0.0149", "--target-pb", "1e-2", "--k-fec", "16", "--n", "3", "--m", "4",
        "--w-max", "30", "--seed", "2", "--max-trials", "20000", "--calibration-steps", "6", "--distortion-blocks", "300",
        "--out", "pair.json",
    ]));
    let pair = CodeFile::read(&dir.join("pair.json")).unwrap().to_pair().unwrap();
    assert!(pair.provenance.p_c_simulated.is_some());

    let x = "011010101101001010101101000111001001110111010011\n110000101101001010101101000111001001110111010011\n";
    std::fs::write(dir.join("x.txt"), x).unwrap();
    stdout(&tbcc(&dir, &["enroll", "--pair", "pair.json", "--input", "x.txt", "--key-out", "k.txt", "--helper-out", "w.txt"]));
    let keys = read_bit_file(&dir.join("k.txt")).unwrap();
    let helpers = read_bit_file(&dir.join("w.txt")).unwrap();
    assert_eq!(keys.len(), 2);
    assert!(keys.iter().all(|k| k.len() == 16));
    assert!(helpers.iter().all(|w| w.len() == pair.helper_len()));

    let out = stdout(&tbcc(&dir, &["reconstruct", "--pair", "pair.json", "--input", "x.txt", "--helper", "w.txt"]));
    assert_eq!(out, std::fs::read_to_string(dir.join("k.txt")).unwrap());
}

#[test]
fn region_output() {
    let dir = scratch("region");
    let out = stdout(&tbcc(&dir, &["region", "--points", "2"]));
    assert_eq!(out, "q,Rs,Rw\n0,0.888243,0.111757\n0.5,0,0\n");
    let overlay = stdout(&tbcc(&dir, &["region", "--points", "3", "--overlay", "--block-lengths", "128"]));
    assert!(overlay.starts_with("series,x,y\n"));
    assert!(overlay.contains("vq_rate_converse_N128,"));
    assert!(overlay.contains("channel_bounds_n384:mc,0.098684,7.0334e-7"));
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    let bad = tbcc(&dir, &["design-fec", "--n", "3", "--m", "4", "--k-fec", "2", "--target-pb", "1e-2"]);
    assert_eq!(bad.status.code(), Some(2));
    let missing = tbcc(&dir, &["spectrum", "--code", "missing.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.json"));
    let infeasible = tbcc(&dir, &[
        "design-nested", "--p-a", "0.3", "--target-pb", "1e-6", "--k-fec", "8", "--n", "2", "--m", "2", "--w-max", "3",
        "--max-trials", "2000", "--calibration-steps", "3",
    ]);
    assert_eq!(infeasible.status.code(), Some(3));
}
