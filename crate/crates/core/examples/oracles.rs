//! Compares the pencil and sphere oracles on random matrices.
//!
//! ```text
//! cargo run --release --example oracles -- [count] [dim]
//! ```

use opclass::classes::PencilFamily;
use opclass::generators::ginibre;
use opclass::{Classifier, Error, Status};

fn main() -> opclass::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let count = args.first().copied().unwrap_or(50);
    let dim = args.get(1).copied().unwrap_or(5);
    let clf = Classifier::with_seed(3);
    for k in 0..3u32 {
        let mut families = vec![PencilFamily::KQuasi(k)];
        if k >= 1 {
            families.extend([PencilFamily::KParanormal(k), PencilFamily::AbsoluteK(k)]);
        }
        for family in families {
            let (mut agree, mut disagree, mut inconclusive, mut members) = (0, 0, 0, 0);
            for seed in 0..count as u64 {
                let d = match clf.dual(&ginibre(dim, seed), family) {
                    Ok(d) => d,
                    Err(Error::OracleDisagreement { .. }) => {
                        disagree += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                if d.pencil.status == Status::Inconclusive || d.sphere.status == Status::Inconclusive {
                    inconclusive += 1;
                } else if d.pencil.status == d.sphere.status {
                    agree += 1;
                    members += usize::from(d.pencil.status == Status::Member);
                } else {
                    disagree += 1;
                }
            }
            println!(
                "{family:?}: agree {agree} ({members} members), disagree {disagree}, inconclusive {inconclusive}"
            );
        }
    }
    Ok(())
}
