//! Finite-difference variance against the leading-order prediction `eps / A`
//! as eps shrinks, next to the first-order prediction.
//!
//!     cargo run --release -p metapop-core --example variance_convergence

use metapop_core::compare::asymptotic_data;
use metapop_core::fd::{extract_numeric_moments, steady_state_solve, FdOptions};
use metapop_core::ModelParams;

fn main() -> Result<(), metapop_core::Error> {
    let p = ModelParams::symmetric(1.5, 0.5, 1.0, 1.2, 1.0);
    let (t, cs) = asymptotic_data(&p)?;
    // var / (eps / A) = 1 + eps (2 E / A + 12 C / A^2) + O(eps^2)
    let slope = 2.0 * cs.e[0] / t.a + 12.0 * t.c / (t.a * t.a);
    println!("A = {:.6}, C = {:.6}, E = {:.6}, slope = {slope:.4}", t.a, t.c, cs.e[0]);
    println!("{:>9} {:>12} {:>12} {:>12}", "eps", "fd ratio", "1st order", "deficit/eps");
    for eps in [0.1, 0.05, 0.025, 0.0125] {
        let s = steady_state_solve(&p, &FdOptions::new(&p, eps))?;
        let ratio = extract_numeric_moments(&s).variance[0] / (eps / t.a);
        println!("{eps:>9} {ratio:>12.5} {:>12.5} {:>12.3}", 1.0 + eps * slope, (1.0 - ratio) / eps);
    }
    Ok(())
}
