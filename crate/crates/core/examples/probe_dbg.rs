use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satcast::model::aic_backward_eliminate;

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn main() {
    let mut retained_signal = 0;
    let mut all_noise_dropped = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 200;
        let x1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let noise: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = x1.iter().map(|v| 3.0 * v + 0.1 * standard_normal(&mut rng)).collect();
        let mut columns = vec![x1];
        columns.extend(noise);
        let names: Vec<String> = (0..6).map(|i| format!("x{i}")).collect();
        let sel = aic_backward_eliminate(&columns, &names, &y, 1.0).unwrap();
        if sel.kept.contains(&0) { retained_signal += 1; }
        if sel.kept == vec![0] { all_noise_dropped += 1; }
    }
    println!("signal retained {retained_signal}/100, all noise dropped {all_noise_dropped}/100");
}
