use eqsimp::gen::random_expr;
use eqsimp::simplifier::{preset, simplify};
use eqsimp::term::parse;
use std::time::{Duration, Instant};
fn main() {
    let mut cfg = preset("var5").unwrap();
    cfg.iteration_timeout = Duration::ZERO;
    let r = simplify(&parse("a + b + !b + c").unwrap(), &cfg);
    eprintln!("var5 trailing -> {}", r.simplified);
    let expr = random_expr(777, 5, 800).unwrap();
    for name in ["var5", "var12"] {
        let mut cfg = preset(name).unwrap();
        cfg.iteration_timeout = if name == "var12" { Duration::from_secs(20) } else { Duration::ZERO };
        let t = Instant::now();
        let r = simplify(&expr, &cfg);
        eprintln!("{name}: size {} in {:?} iters {}", r.final_size, t.elapsed(), r.iterations.len());
    }
}
