//! Trains on synthetic data shaped like MovieLens-1M and prints the test RMSE
//! after every epoch next to the bias baseline.
//!
//! ```text
//! cargo run --release -p cfn-core --example synthetic -- [users] [items] [ratings/user] [lr0] [orientation] [epochs]
//! ```

use std::time::Instant;

use cfn::data::{split, SplitSpec};
use cfn::eval::{bias_baseline, rmse};
use cfn::preprocess::Preprocessor;
use cfn::synth::{generate, SynthSpec};
use cfn::train::{train, CfnModel, CfnPredictor, Orientation, TrainConfig};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args()
        .nth(i)
        .map(|s| {
            s.parse()
                .unwrap_or_else(|_| panic!("bad argument {i}: {s}"))
        })
        .unwrap_or(default)
}

fn main() -> cfn::Result<()> {
    let spec = SynthSpec {
        n_users: arg(1, 6040),
        n_items: arg(2, 3706),
        mean_per_user: arg(3, 165),
        min_per_user: 20,
        ..SynthSpec::default()
    };
    let orientation: Orientation = arg(5, Orientation::ICfn);
    let config = TrainConfig {
        orientation,
        lr0: arg(4, 0.1),
        epochs: arg(6, 20),
        ..TrainConfig::default()
    };
    let data = generate(&spec)?;
    let m = &data.ratings.matrix;
    println!("{} ratings, density {:.4}", m.len(), m.density());
    let (tr, te) = split(m, SplitSpec::new(0.9, 1)?)?;
    let base = bias_baseline(&tr, orientation.axis(), data.ratings.scale)?;
    println!("bias baseline {:.4}", rmse(&base, &te)?);

    let pre = Preprocessor::fit(&tr, data.ratings.scale, orientation.axis())?;
    let start = Instant::now();
    let mut hook =
        |_: usize, model: &CfnModel| Ok(Some(rmse(&CfnPredictor::new(model, &tr, None)?, &te)?));
    let state = train(&tr, None, &config, &pre, Some(&mut hook))?;
    for r in &state.loss_curve {
        println!(
            "epoch {:2}  loss {:10.4}  rmse {:.4}",
            r.epoch,
            r.loss,
            r.rmse.unwrap_or(f64::NAN)
        );
    }
    println!("{orientation} trained in {:.1?}", start.elapsed());
    Ok(())
}
