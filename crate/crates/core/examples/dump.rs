//! Print and discharge every VC of a source file:
//! `cargo run --example dump -- file.c [specs.spec] [--total]`

use wpdrv_core::logic::{vcgen, WpOptions};
use wpdrv_core::solver::{prove_vc, Budget};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let total = args.iter().any(|a| a == "--total");
    let files: Vec<&String> = args.iter().filter(|a| !a.starts_with("--")).collect();
    let src = std::fs::read_to_string(files[0]).unwrap();
    let specs: Vec<String> = files[1..].iter().map(|s| std::fs::read_to_string(s).unwrap()).collect();
    let refs: Vec<&str> = specs.iter().map(|s| s.as_str()).collect();
    let ast = wpdrv_core::frontend::load(&src, &refs).unwrap();
    let p = wpdrv_core::translator::translate(&ast, Default::default()).unwrap();
    let opts = WpOptions { total, ..Default::default() };
    for s in &p.specs {
        match vcgen(&p, s, opts) {
            Ok(vcs) => {
                for v in &vcs {
                    let t = std::time::Instant::now();
                    let r = prove_vc(v, &Budget::default());
                    println!("{v}  => {r} [{:?}]", t.elapsed());
                }
            }
            Err(e) => println!("ERR {e}"),
        }
    }
}
