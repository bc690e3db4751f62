//! BMO_c norm of the sweep of the witness symbols, plus the split of the
//! pairing <b^* f, f> into its diagonal and off-diagonal parts.

use paralab::extremal::{pairing_decomposition_check, sweep_experiment, DEFAULT_POWER_BUDGET};

fn main() -> paralab::Result<()> {
    for row in sweep_experiment(&[2, 4, 8], DEFAULT_POWER_BUDGET)? {
        println!("n = {:>2}: ||S^2(b_n)||_bmo_c = {:.12}  ratio to log {:.4}", row.n, row.value, row.ratio_to_log);
    }
    let p = pairing_decomposition_check(3, 7)?;
    println!(
        "I = {:.6}, II = {:.6}, total = {:.6}, defect {:.1e}, diagonal bound holds: {}",
        p.i_term,
        p.ii_term,
        p.total,
        p.identity_defect(),
        p.diagonal_bound_holds()
    );
    Ok(())
}
