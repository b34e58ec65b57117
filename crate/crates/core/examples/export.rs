//! Write a lift as JSON and SDPA, read both back and re-solve.
//!
//! ```bash
//! cargo run --example export
//! ```

use sdplift::fixtures::example3;
use sdplift::lift::{build_sparse_lift, json};
use sdplift::sdp::{sdpa, solve};

fn main() {
    let rep = build_sparse_lift(&example3(true));
    let text = json::to_json(&rep);
    println!("json: {} bytes", text.len());
    let back = json::from_json(&text).unwrap();
    let ell = [-1.0, 0.0];
    println!("min -x1: {:.10} (original), {:.10} (re-read)", rep.minimize(&ell).unwrap().value, back.minimize(&ell).unwrap().value);

    let lp = rep.to_problem(&[1.0, 0.0]);
    let dat = sdpa::write(&lp.problem);
    println!("{}", dat.lines().take(3).collect::<Vec<_>>().join("\n"));
    let r = solve(&sdpa::read(&dat).unwrap()).unwrap();
    println!("sdpa re-import: max x1 = {:.10} ({:?})", r.value, r.status);
}
