//! kl, linear and user-supplied comparators on a regression-sized loss.
//!
//! cargo run --example linear_bound

use compress_cert::bounds::{
    generic_compression_bound, kl_inv, linear_compression_bound, linear_compression_bound_grid, maurer_sum,
    optimal_lambda, rescaled_kl_bound, BoundInputs, ComparatorSpec, LambdaGrid,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // mean absolute error 2.1 on 7700 complement points, loss range 90.6
    let loss_max = 90.6;
    let sigma = 37.75;
    let inputs = BoundInputs::new(7751, 51, 2.1, 0.01);

    let kl = rescaled_kl_bound(&inputs, loss_max)?;
    println!("kl (rescaled by {loss_max}): {:.4}", kl.bound_value);

    for lambda in [1e-3, 1e-2, 1e-1] {
        let c = linear_compression_bound(&inputs, lambda, sigma)?;
        println!("linear, lambda = {lambda:<6}: {:.4}", c.bound_value);
    }
    let (grid, lambda) = linear_compression_bound_grid(&inputs, sigma, &LambdaGrid::default())?;
    println!("linear, 20-point grid: {:.4} at lambda = {lambda:.3e}", grid.bound_value);
    println!("data-dependent optimum (not a certificate): lambda* = {:.3e}", optimal_lambda(&inputs, sigma)?);

    // The kl comparator with the exact Maurer moment instead of 2 sqrt(k).
    let unit = inputs.with_loss(2.1 / loss_max);
    let exact = ComparatorSpec::custom(
        compress_cert::bounds::kl_div,
        |k| maurer_sum(k).ln(),
    );
    let eps = generic_compression_bound(&unit, &exact)?;
    println!("kl with exact moment: {:.4}", loss_max * kl_inv(unit.loss_complement, eps));
    Ok(())
}
