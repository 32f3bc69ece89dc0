//! Seeded generators of near-miss parser inputs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SEED_MANIFEST: &str = include_str!("../../models/reissner.toml");

const FRAGMENTS: &[&str] = &[
    "[", "]", "=", "\"", "g[0][0]", "phi[1]", "(", ")", "^", "-", "/", "*", "+", "sin(", "r", "M", "2", "1/0", "#",
    "\n", "[metric]", "[scalars]", "J", "dim = 3", "coords = [\"a\"]", "free", "1/2", "pi", "é", "\t", "0^-1",
];

/// A random edit of a valid manifest: byte flips, deletions and spliced
/// fragments, so most inputs are near-misses rather than noise.
pub fn mutate(rng: &mut ChaCha8Rng) -> String {
    let mut s: Vec<char> = SEED_MANIFEST.chars().collect();
    for _ in 0..rng.gen_range(1..8) {
        let at = rng.gen_range(0..=s.len());
        match rng.gen_range(0..4) {
            0 if at < s.len() => {
                s.remove(at);
            }
            1 if at < s.len() => s[at] = char::from(rng.gen_range(0x20u8..0x7f)),
            2 => {
                let frag = FRAGMENTS.choose(rng).unwrap();
                for (k, c) in frag.chars().enumerate() {
                    s.insert(at + k, c);
                }
            }
            _ => {
                let end = (at + rng.gen_range(0..40)).min(s.len());
                s.drain(at..end);
            }
        }
    }
    s.into_iter().collect()
}

pub fn random_expr_text(rng: &mut ChaCha8Rng) -> String {
    (0..rng.gen_range(0..24)).map(|_| *FRAGMENTS.choose(rng).unwrap()).collect()
}

/// Input `k` of the standard fuzz stream: alternately a mutated manifest
/// and a random token soup.
pub fn input(rng: &mut ChaCha8Rng, k: usize) -> String {
    if k % 2 == 0 {
        mutate(rng)
    } else {
        random_expr_text(rng)
    }
}

/// Feed `text` to both parsers; `false` if either panics or reports an
/// offset past the end.
pub fn survives(text: &str) -> bool {
    std::panic::catch_unwind(|| {
        let _ = projektor::parser::parse_manifest(text);
        match projektor::parser::parse_expr(text) {
            Ok(_) => true,
            Err(e) => e.offset <= text.len(),
        }
    })
    .unwrap_or(false)
}
