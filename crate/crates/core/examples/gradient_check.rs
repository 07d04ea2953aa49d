//! Compare hand-derived gradients of both GAN losses with central finite
//! differences on a random small instance.
//!
//!     cargo run --example gradient_check [seed]

use coldgan::gan::{d_loss_and_grad, g_loss_and_grad, AdversarialForm, Discriminator, Generator};
use coldgan::nn::{grad_check, Activation};
use coldgan::seed;
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(3);
    let mut rng = seed::rng(root);
    let (n, hidden, users) = (8, 5, 4);
    let generator = Generator::new(n, hidden, Activation::Sigmoid, 5.0, &mut rng)?;
    let discriminator = Discriminator::new(n, hidden, Activation::Sigmoid, &mut rng)?;
    let warm: Vec<Vec<f64>> = (0..users)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        rng.gen_range(1..=5) as f64 / 5.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let cold: Vec<Vec<f64>> = warm
        .iter()
        .map(|w| w.iter().map(|&v| if rng.gen_bool(0.5) { v } else { 0.0 }).collect())
        .collect();
    let relevance: Vec<Vec<f64>> = warm
        .iter()
        .map(|w| w.iter().map(|&v| if v > 0.6 { 1.0 } else { 0.0 }).collect())
        .collect();
    let fake: Vec<Vec<f64>> = cold.iter().map(|c| generator.generate(c)).collect::<Result<_, _>>()?;

    let mut probe = discriminator.clone();
    let d_err = grad_check(
        |theta| {
            probe.net.load_flat(theta).expect("same shape");
            let (loss, grads) = d_loss_and_grad(&probe, &warm, &fake).expect("valid batch");
            (loss, grads.flatten())
        },
        &discriminator.net.flatten(),
        1e-5,
    );
    println!(
        "d_loss: {} parameters, max relative error {d_err:.2e}",
        discriminator.net.num_params()
    );

    for form in [AdversarialForm::Value, AdversarialForm::Log] {
        for weight in [0.0, 1.0] {
            let mut probe = generator.clone();
            let err = grad_check(
                |theta| {
                    probe.net.load_flat(theta).expect("same shape");
                    let (loss, grads) =
                        g_loss_and_grad(&discriminator, &probe, &cold, &relevance, weight, form).expect("valid batch");
                    (loss, grads.flatten())
                },
                &generator.net.flatten(),
                1e-5,
            );
            println!("g_loss ({form:?}, lambda={weight}): max relative error {err:.2e}");
        }
    }
    Ok(())
}
