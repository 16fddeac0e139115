//! Classifies a few reference matrices and prints one status column per class.
//!
//! ```text
//! cargo run --release --example classify
//! ```

use opclass::classes::{class_list, DEFAULT_K_LIST, DEFAULT_P_LIST};
use opclass::generators::{ginibre, jordan_nilpotent, random_normal};
use opclass::{Classifier, ComplexMatrix};

fn main() -> opclass::Result<()> {
    let clf = Classifier::with_seed(1);
    let samples = [
        ("identity(3)", ComplexMatrix::identity(3)),
        ("J2", ComplexMatrix::jordan_block(2)),
        ("nilpotent index 3", jordan_nilpotent(4, 3, 5)?),
        ("random normal", random_normal(4, 2, None)?),
        ("ginibre", ginibre(4, 3)),
    ];
    for (name, t) in &samples {
        println!("{name}");
        let cl = clf.classify_all(t, &DEFAULT_K_LIST, &DEFAULT_P_LIST);
        for class in class_list(&DEFAULT_K_LIST, &DEFAULT_P_LIST) {
            match cl.get(&class) {
                Some(v) => println!("  {:<24} {:?} (defect {:+.3e})", class.to_string(), v.status, v.defect),
                None => println!("  {:<24} error", class.to_string()),
            }
        }
        for v in &cl.chain_violations {
            println!("  chain violation: {v}");
        }
    }
    Ok(())
}
