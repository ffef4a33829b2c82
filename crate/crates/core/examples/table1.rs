//! Convergence of the corner [exp(M[xy]) log(I + M[x+y])]₀₀ towards
//! ∫∫ exp(xy) log(1+x+y) dx dy on the unit square.

use opquad::cli::{table, Experiment, TABLE1_CONFIG};

fn main() -> opquad::Result<()> {
    let exp = Experiment::from_json(TABLE1_CONFIG)?;
    let rows = table(&exp, 18)?;
    println!(" n  approximation        error");
    for row in rows {
        println!("{:2}  {:.16}  {:+.3e}", row.n, row.approximation, row.error.unwrap_or(f64::NAN));
    }
    Ok(())
}
