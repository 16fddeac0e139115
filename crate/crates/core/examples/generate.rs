//! Builds one instance of every generator kind and prints its self-certification.
//!
//! ```text
//! cargo run --release --example generate -- [seed]
//! ```

use opclass::generators::{GenKind, GenSpec, KQuasiSpec, RrSpec};
use opclass::Classifier;

fn main() -> opclass::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let kinds = [
        GenKind::Unitary { dim: 4 },
        GenKind::Ginibre { dim: 4 },
        GenKind::Normal { dim: 4, eigenvalues: None },
        GenKind::Jordan { dim: 4, index: 3 },
        GenKind::Counterexample { dim_m: 2, dim_n: 2 },
        GenKind::ScalarRoot { dim: 4, n: 3, lambda: [8.0, 0.0] },
        GenKind::KQuasi(KQuasiSpec::new(2, 3, 2)),
        GenKind::Rr(RrSpec::default()),
    ];
    let clf = Classifier::with_seed(seed);
    for kind in kinds {
        let spec = GenSpec { kind, seed };
        let t = spec.generate()?;
        println!("{}", serde_json::to_string(&spec)?);
        for c in spec.certify(&t, &clf)? {
            let mark = if c.confirmed { "ok " } else { "BAD" };
            println!("  {mark} {:<22} expected {:?}, observed {:?}", c.property, c.expected, c.observed);
        }
    }
    Ok(())
}
