//! Monte-Carlo look at how the empirical operator concentrates around L_K.
//!
//! cargo run --release --example concentration

use dac_krr::operator_lab::concentration_check;
use dac_krr::{make_spectral, KernelSpec};

fn main() -> dac_krr::Result<()> {
    let spec = make_spectral(&KernelSpec::periodic_sobolev(1, 50)?)?;
    println!(
        "{:>7} {:>5} {:>10} {:>10} {:>10} {:>8} {:>8}",
        "lambda", "N", "E‖·‖²_HS", "exact", "bound", "viol(b)", "z(K_x)"
    );
    for lambda in [1e-1, 1e-2, 1e-3] {
        for n in [100, 400] {
            let rep = concentration_check(&spec, lambda, n, 200, 0.05, 7)?;
            println!(
                "{lambda:>7.0e} {n:>5} {:>10.4e} {:>10.4e} {:>10.4e} {:>8.3} {:>8.2}",
                rep.hs_sq_mean,
                rep.hs_sq_expected,
                rep.bound_a,
                rep.violation_rate_b(),
                rep.kx_norm_z()
            );
        }
    }
    Ok(())
}
