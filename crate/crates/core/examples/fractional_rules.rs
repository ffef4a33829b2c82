//! Rules from the fractional basis {x^(k/3)} for g = x and g = x^(1/3).
//! The second set of nodes is cubed back onto [0, 1].

use opquad::cli::{build_rule, Experiment, FRACTIONAL_CONFIG};

fn main() -> opquad::Result<()> {
    let exp = Experiment::from_json(FRACTIONAL_CONFIG)?;
    let rules = exp.inner.iter().map(|f| build_rule(&exp, f)).collect::<opquad::Result<Vec<_>>>()?;

    for (f, rule) in exp.inner.iter().zip(&rules) {
        println!("g{} = {}", f.index, f.source);
        print!("{}", rule.to_csv());
    }

    println!("\n   y   error(g1)     error(g2)");
    for y in [0.5, 1.0, 1.5, 2.5, 4.0, 5.5, 6.5] {
        println!("{y:4}  {:+.3e}  {:+.3e}", rules[0].power_error(y), rules[1].power_error(y));
    }
    Ok(())
}
