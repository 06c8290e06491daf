use std::process::ExitCode;

fn main() -> ExitCode {
    let verdicts = polyvem_verification::run_all();
    for v in &verdicts {
        let status = if v.passed { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {} ({})", v.criterion, v.title, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
