//! Threshold table for a 1024-bin grid at P_FA = 1e-6,
//! plus the union bound it achieves and the oracle threshold per size.
//!
//! cargo run --example calibrate_thresholds

use specdet::{calibrate_oracle, pfa_bound, ThresholdTable};

fn main() -> specdet::Result<()> {
    let (pfa, n) = (1e-6, 1024);
    let table = ThresholdTable::calibrate(pfa, n, ThresholdTable::dyadic_sizes(n))?;

    println!("{:>6} {:>10} {:>10} {:>10}", "ell", "u", "t", "oracle u0");
    for ell in ThresholdTable::dyadic_sizes(n) {
        let e = table.entry(ell)?;
        println!("{:>6} {:>10.4} {:>10.4} {:>10.4}", ell, e.u, e.t, calibrate_oracle(pfa, ell)?);
    }
    println!("union bound on P_FA: {:.3e}", pfa_bound(&table)?);
    Ok(())
}
