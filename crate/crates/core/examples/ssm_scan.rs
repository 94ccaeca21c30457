//! Discretizes a diagonal state-space model and runs the recurrent scan on a
//! step input, with and without input-dependent projections.

use rangesr::nn::Tensor;
use rangesr::ssm::{
    discretize, scan_1d, selective_scan_1d, Discretization, SelectiveProjections, SsmParams,
};

fn main() -> rangesr::Result<()> {
    // one channel, two modes: fast and slow decay
    let p = SsmParams::new(
        1,
        2,
        vec![-4.0, -0.5],
        vec![1.0, 1.0],
        vec![0.5, 0.5],
        vec![0.0],
        vec![0.1],
    )?;
    p.validate()?;

    let zoh = discretize(&p, Discretization::Zoh);
    println!("zoh: a_bar {:?}, b_bar {:?}", zoh.a_bar, zoh.b_bar);
    let euler = discretize(&p, Discretization::SimplifiedEuler);
    println!("simplified: b_bar {:?}", euler.b_bar);

    let len = 40;
    let step = Tensor::new([1, len], vec![1.0; len])?;
    let y = scan_1d(&zoh, &step)?;
    for t in [0, 4, 9, 19, 39] {
        println!("t={t:>2}  y={:.4}", y.data()[t]);
    }
    // steady state of each mode is -b/a, weighted by c
    println!(
        "continuous steady state {:.4}",
        0.5 * (1.0 / 4.0 + 1.0 / 0.5)
    );

    let proj = SelectiveProjections::constant(&p)?;
    let sel = selective_scan_1d(&step, &proj)?;
    let lti = scan_1d(&euler, &step)?;
    println!(
        "selective scan with constant projections vs LTI: max diff {:.2e}",
        sel.max_abs_diff(&lti)
    );
    Ok(())
}
