use std::time::Instant;
use vortexgas::dynamics::velocity_field;
use vortexgas::experiments::member_rng;
use vortexgas::spectral::{EwaldGreen, GreenEvaluator};
use vortexgas::vortex::{hamiltonian_split, sample_lambda, IntensityLaw};

fn main() {
    let mut rng = member_rng(1, 0);
    let c200 = sample_lambda(200, IntensityLaw::RademacherBalanced, &mut rng).unwrap();
    let c400 = sample_lambda(400, IntensityLaw::StandardGaussian, &mut rng).unwrap();
    for (s, z) in [(0.0013f64, 28.0f64), (0.0018, 28.0), (0.0022, 28.0), (0.0018, 40.0)] {
        let g = GreenEvaluator::ewald_with(s, z).unwrap();
        let t = Instant::now();
        let reps = 100;
        for _ in 0..reps { let _ = velocity_field(&c200, &g).unwrap(); }
        let per = t.elapsed().as_secs_f64() / reps as f64;
        if let GreenEvaluator::Ewald(e) = &g {
            println!("velocity n=200 s={s} z={z}: {:.3} ms/call (kcut {}, half modes {}, range {})",
                per*1e3, e.k_cut(), e.modes().len(), e.image_range());
        }
    }
    for (s, z) in [(0.0013f64, 28.0f64), (0.0018, 28.0)] {
        let e = EwaldGreen::with_params(s, z).unwrap();
        let t = Instant::now();
        let reps = 50;
        for _ in 0..reps { let _ = hamiltonian_split(&c400, &e).unwrap(); }
        println!("hamiltonian n=400 s={s}: {:.3} ms/call", t.elapsed().as_secs_f64()/reps as f64*1e3);
    }
    // point evals
    let g = GreenEvaluator::ewald();
    let t = Instant::now();
    let mut acc = 0.0;
    for i in 0..200_000 { acc += g.green([0.1 + (i % 977) as f64*4e-4, 0.33]).unwrap(); }
    println!("green point eval: {:.0} ns (checksum {acc:.3})", t.elapsed().as_secs_f64()/2e5*1e9);
}
