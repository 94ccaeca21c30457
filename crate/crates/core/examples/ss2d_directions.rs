//! Shows the four traversal orders of the 2-D scan on a small grid and runs
//! the full four-direction scan on a feature map.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rangesr::nn::{BlockKind, BlockWeights, Tensor};
use rangesr::ssm::{ss2d, ScanDirection, SelectiveProjections};

fn main() -> rangesr::Result<()> {
    let (h, w) = (3, 4);
    for dir in ScanDirection::ALL {
        println!("{dir:?}: {:?}", dir.traversal(h, w));
    }

    let dim = 4;
    let state = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let block = BlockWeights::init(&BlockKind::Vss { dim, state }, &mut rng);
    let branch = |k: usize| -> rangesr::Result<SelectiveProjections> {
        let g = |s: &str| {
            block
                .get(&format!("ss2d.{k}.{s}"))
                .map(|t| t.data().to_vec())
        };
        Ok(SelectiveProjections {
            channels: dim,
            state,
            a: g("a")?,
            d: g("d")?,
            w_b: g("w_b")?,
            b_b: g("b_b")?,
            w_c: g("w_c")?,
            b_c: g("b_c")?,
            w_dt: g("w_dt")?,
            b_dt: g("b_dt")?,
        })
    };
    let branches = [branch(0)?, branch(1)?, branch(2)?, branch(3)?];

    // B and C are read from the input itself, so use a lit background and
    // look at how one brighter pixel changes the output everywhere
    let background = Tensor::full([dim, h, w], 0.5);
    let mut x = background.clone();
    x.data_mut()[w + 1] = 1.5;
    let base = ss2d(&background, &branches)?;
    let y = ss2d(&x, &branches)?;
    println!("channel 0 change from a bright pixel at (1, 1):");
    for r in 0..h {
        let row: Vec<String> = (0..w)
            .map(|c| format!("{:+.4}", y.data()[r * w + c] - base.data()[r * w + c]))
            .collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
