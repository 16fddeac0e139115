//! The normaloid matrix whose square is normal but which is not normal itself.
//!
//! ```text
//! cargo run --release --example counterexample -- [seed]
//! ```

use opclass::generators::normaloid_counterexample;
use opclass::Classifier;

fn main() -> opclass::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let t = normaloid_counterexample(2, 2, seed)?;
    let clf = Classifier::with_seed(seed);
    println!("T = {t:?}");
    println!("‖T‖ = {:.12}, r(T) = {:.12}", t.operator_norm(), t.spectral_radius());
    println!("normaloid           {:?}", clf.is_normaloid(&t).status);
    println!("T^2 normal          {:?}", clf.is_power_normal(&t, 2).status);
    println!("T normal            {:?}", clf.is_normal(&t).status);
    println!("paranormal          {:?}", clf.is_paranormal(&t)?.status);
    println!("1-quasi-paranormal  {:?}", clf.is_k_quasi_paranormal(&t, 1)?.status);
    Ok(())
}
