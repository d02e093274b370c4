//! Run the full verification battery and print one line per criterion.
use rmt_lab::verify;

fn main() {
    let t0 = std::time::Instant::now();
    for suite in verify::SUITES {
        let s0 = std::time::Instant::now();
        match verify::run_suite(suite, verify::DEFAULT_MASTER_SEED) {
            Ok(results) => {
                for r in results {
                    println!("{}", r.line());
                }
                eprintln!("[{suite}: {:.1?}]", s0.elapsed());
            }
            Err(e) => println!("ERROR {suite}: {e}"),
        }
    }
    eprintln!("total {:.1?}", t0.elapsed());
}
