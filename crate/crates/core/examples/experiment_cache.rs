//! Runs an experiment through the CLI entry point twice; the second run is
//! served from the content-addressed cache.

use paralab::experiment::cli::main_with_args;

fn main() {
    let dir = std::env::temp_dir().join("paralab-example");
    let out = dir.to_str().expect("utf-8 temp dir");
    let args = ["paralab", "--out", out, "--plot", "growth-theorem11", "--mode", "pairing", "--n", "4,16,64"];
    for _ in 0..2 {
        let code = main_with_args(args);
        println!("exit code {code}");
    }
    println!("outputs in {}", dir.display());
}
