//! Splits constructed matrices into reducing blocks.
//!
//! ```text
//! cargo run --release --example decompose
//! ```

use opclass::decomposition::{nilpotent2_canonical, normal_pure_split, root_decompose, Decomposition};
use opclass::generators::{k_quasi_member, rr_instance, KQuasiSpec, RrSpec};
use opclass::{Classifier, ComplexMatrix};

fn show(name: &str, d: &Decomposition) {
    println!(
        "{name}: blocks {:?} {:?}, residuals reassembly {:.1e} normality {:.1e} nilpotency {:.1e}",
        d.labels, d.block_dims, d.residuals.reassembly, d.residuals.normality, d.residuals.nilpotency
    );
}

fn main() -> opclass::Result<()> {
    let clf = Classifier::default();

    let t = ComplexMatrix::from_real_diagonal(&[5.0]).direct_sum(&ComplexMatrix::jordan_block(2));
    show("diag(5) + J2, normal/pure", &normal_pure_split(&t, &clf.tol));

    let spec = KQuasiSpec::new(3, 3, 1);
    let t = k_quasi_member(&spec, 11)?;
    show("k-quasi member, n = 2, k = 1", &root_decompose(&t, 2, 1, &clf)?);

    let rr = rr_instance(&RrSpec { dim_a: 0, dim_b: 2, zero_b: true }, 4)?;
    let d = nilpotent2_canonical(&rr.matrix.direct_sum(&ComplexMatrix::zeros(1)), &clf.tol)?;
    show("index-2 nilpotent, canonical form", &d);
    if let Some(c) = &d.canonical_c {
        println!("  singular values of C: {:?}", c.singular_values());
    }

    match root_decompose(&ComplexMatrix::jordan_block(3), 3, 1, &clf) {
        Ok(_) => println!("J3 with k = 1: unexpectedly decomposed"),
        Err(e) => println!("J3 with k = 1: {e}"),
    }
    Ok(())
}
