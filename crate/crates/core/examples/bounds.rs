//! Margins, margin moments and the three C-bound variants on a hand-made vote matrix.

use sewil::bounds::{cbound, cbound_beta, cbound_il, margin, margin_moments, MislabelingMatrix};
use sewil::forest::VoteMatrix;

fn main() -> sewil::Result<()> {
    let votes = VoteMatrix::from_rows(vec![
        vec![0.8, 0.1, 0.1],
        vec![0.6, 0.3, 0.1],
        vec![0.2, 0.7, 0.1],
        vec![0.1, 0.2, 0.7],
    ])?;
    println!("margin of row 1 for class 0: {:.2}", margin(votes.row(1), 0)?);

    // Votes double as class posteriors.
    let m = margin_moments(&votes, &votes)?;
    println!("mu1 = {:.4}, mu2 = {:.4} over {} rows", m.mu1, m.mu2, m.sample_count);

    let p = MislabelingMatrix::new(vec![
        vec![0.9, 0.1, 0.0],
        vec![0.1, 0.8, 0.1],
        vec![0.0, 0.1, 0.9],
    ])?;
    println!("beta = {:.2}, gamma = {:.2}", p.beta(), p.gamma());
    println!("C-bound           {:.4}", cbound(&m).value);
    println!("C-bound (beta)    {:.4}", cbound_beta(&m, p.beta())?.value);
    println!("C-bound (gamma)   {:.4}", cbound_il(&m, p.gamma())?.value);
    Ok(())
}
