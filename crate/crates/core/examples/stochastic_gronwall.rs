//! Tail bound of the stochastic Gronwall lemma on a lognormal family with a
//! closed-form oracle.

use spdekit::verify::{gronwall_harness, GronwallFamily, GronwallInstance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = GronwallInstance {
        family: GronwallFamily::Lognormal { x0: 1.0, rate: 0.2, sigma: 1.0 },
        c: 1.0,
        eta: 0.0,
        horizon: 1.0,
        steps: 64,
        gammas: vec![2.0, 8.0, 32.0],
        rs: vec![0.2, 0.4],
        spot_pairs: Vec::new(),
        required_slack: Some(2.0),
    };
    let rep = gronwall_harness(&inst, 20_000, 7)?;
    for r in &rep.rows {
        println!(
            "gamma {:>4}, R {}: P {:.5}, bound {:.4}, slack {:?}, oracle {:?}",
            r.gamma, r.r, r.empirical.p, r.rhs, r.slack, r.oracle
        );
    }
    println!("min slack {:?}, oracle {:?}: {:?}", rep.min_slack, rep.oracle_passed, rep.verdict);
    Ok(())
}
