//! Lower bounds for the S^1 norm of triangular truncation on rank-one inputs,
//! compared with log(n + 1).

use paralab::extremal::triangle_growth;

fn main() -> paralab::Result<()> {
    println!("{:>4} {:>10} {:>10} {:>10}", "n", "search", "uniform", "/log(n+1)");
    for row in triangle_growth(&[2, 4, 8, 16, 32, 64], 4, 1)? {
        println!("{:>4} {:>10.6} {:>10.6} {:>10.4}", row.n, row.lower_bound, row.uniform, row.ratio_to_log);
    }
    Ok(())
}
