mod common;

use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use projektor::parser::parse_manifest;

#[test]
fn ten_thousand_inputs_without_a_crash() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut accepted = 0;
    for k in 0..10_000 {
        let text = common::input(&mut rng, k);
        assert!(common::survives(&text), "parser crashed on {text:?}");
        accepted += parse_manifest(&text).is_ok() as usize;
    }
    assert!(accepted > 0, "mutation never produced a valid manifest");
}

#[test]
fn binary_rejects_garbage_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..200 {
        let path = dir.path().join(format!("{k}.toml"));
        std::fs::write(&path, common::mutate(&mut rng)).unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_projektor"))
            .args(["compute", "--target", "scalar"])
            .arg(&path)
            .output()
            .unwrap();
        let code = o.status.code().expect("exited normally, not by signal");
        assert!(matches!(code, 0 | 2 | 3), "exit {code} on {}", std::fs::read_to_string(&path).unwrap());
    }
}
