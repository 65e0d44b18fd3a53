//! Invariant suites behind `uhbf verify`. Each check draws its own seeded
//! random instances and compares against an independent computation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{butler_select, fc1_abstract, fc2_analog};
use crate::config::ExperimentConfig;
use crate::linalg::{frobenius_sq, semi_unitarity_error, ComplexMatrix};
use crate::network::{dft_mixer, NetworkSpec, PhaseConfig, Processor};
use crate::precoding::{closed_form_bb, fully_digital_mmse_with_alpha, mmse_bb_with_alpha};
use crate::programming::{score_and_gradient, subspace_score};
use crate::quantization::{delta_score, layer_partials, quantize_phases, refine_greedy, QuantizationSpec};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error and the tolerance it was held to.
    pub worst: f64,
    pub tolerance: f64,
}

fn check(name: &'static str, worst: f64, tolerance: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

fn orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    random_matrix(rows, cols, rng).qr().q()
}

fn random_network(rng: &mut ChaCha8Rng, max_n: usize) -> (Processor, PhaseConfig) {
    let n = rng.random_range(2..=max_n);
    let r = rng.random_range(1..=n.min(8));
    let depth = rng.random_range(0..=6);
    let processor = Processor::new(NetworkSpec::new(n, r, depth).expect("valid spec")).expect("valid spec");
    let phases = PhaseConfig::random(depth, n, rng);
    (processor, phases)
}

fn semi_unitarity(rng: &mut ChaCha8Rng, bits: Option<u32>) -> f64 {
    (0..30)
        .map(|_| {
            let (p, phases) = random_network(rng, 128);
            let phases = bits.map_or(phases.clone(), |b| quantize_phases(&phases, b));
            semi_unitarity_error(&p.analog_beamformer(&phases).expect("shapes match"))
        })
        .fold(0.0, f64::max)
}

fn power_preservation(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (p, phases) = random_network(rng, 128);
        let f = p.analog_beamformer(&phases).expect("shapes match");
        for _ in 0..20 {
            let x = random_matrix(f.ncols(), 1, rng);
            let nx = frobenius_sq(&x);
            worst = worst.max((frobenius_sq(&(&f * &x)) - nx).abs() / nx);
        }
    }
    worst
}

fn gradient(rng: &mut ChaCha8Rng) -> f64 {
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..6 {
        let n = [8, 16][rng.random_range(0..2)];
        let depth = rng.random_range(1..=4);
        let p = Processor::new(NetworkSpec::new(n, 2, depth).expect("valid spec")).expect("valid spec");
        let f_tar = orthonormal(n, 2, rng);
        let phases = PhaseConfig::random(depth, n, rng);
        let (_, grads) = score_and_gradient(&p, &phases, &f_tar).expect("shapes match");
        let score =
            |ph: &PhaseConfig| subspace_score(&f_tar, &p.analog_beamformer(ph).expect("shapes match")).expect("rows");
        for (k, layer) in grads.iter().enumerate() {
            for (e, &g) in layer.iter().enumerate() {
                if g.abs() <= 1e-8 {
                    continue;
                }
                let mut plus = phases.clone();
                plus.set(k, e, phases.get(k, e) + h);
                let mut minus = phases.clone();
                minus.set(k, e, phases.get(k, e) - h);
                let fd = -(score(&plus) - score(&minus)) / (2.0 * h);
                worst = worst.max((g - fd).abs() / g.abs());
            }
        }
    }
    worst
}

fn exact_recovery(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (p, phases) = random_network(rng, 64);
        let f_rf = p.analog_beamformer(&phases).expect("shapes match");
        let q = random_matrix(f_rf.ncols(), rng.random_range(1..=f_rf.ncols()), rng);
        let f_tar = &f_rf * q;
        let f_bb = closed_form_bb(&f_rf, &f_tar).expect("semi-unitary");
        worst = worst
            .max(frobenius_sq(&(&f_rf * &f_bb - &f_tar)).sqrt())
            .max((frobenius_sq(&f_bb) - frobenius_sq(&f_tar)).abs());
    }
    worst
}

fn mmse_equivalence(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(8..=48);
        let r = rng.random_range(2..=6);
        let s = rng.random_range(1..=r);
        let depth = rng.random_range(1..=4);
        let p = Processor::new(NetworkSpec::new(n, r, depth).expect("valid spec")).expect("valid spec");
        let f_rf = p
            .analog_beamformer(&PhaseConfig::random(depth, n, rng))
            .expect("shapes match");
        let h = &f_rf * random_matrix(r, s, rng);
        for alpha in [s as f64 * 1e-2, 0.37] {
            let fd = fully_digital_mmse_with_alpha(&h, alpha, 1.0).expect("nonzero channel");
            let bb = mmse_bb_with_alpha(&(h.adjoint() * &f_rf), alpha, 1.0).expect("nonzero channel");
            worst = worst.max((frobenius_sq(&(&f_rf * bb - &fd)) / frobenius_sq(&fd)).sqrt());
        }
    }
    worst
}

/// Worst of: incremental-vs-full score gap, and any decrease across
/// accepted moves (relative).
fn refinement(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..6 {
        let n = rng.random_range(4..=24);
        let depth = rng.random_range(1..=4);
        let p = Processor::new(NetworkSpec::new(n, 2, depth).expect("valid spec")).expect("valid spec");
        let f_tar = orthonormal(n, 2, rng);
        let phases = PhaseConfig::random(depth, n, rng);
        for _ in 0..10 {
            let layer = rng.random_range(0..depth);
            let entry = rng.random_range(0..n);
            let phi = rng.random::<f64>() * TAU;
            let partials = layer_partials(&p, &phases, &f_tar, layer).expect("fresh partials");
            let fast = delta_score(&partials, entry, phi).expect("entry in range");
            let mut moved = phases.clone();
            moved.set(layer, entry, phi);
            let full = subspace_score(&f_tar, &p.analog_beamformer(&moved).expect("shapes")).expect("rows");
            worst = worst.max((fast - full).abs() / full);
        }
        let qspec = QuantizationSpec::new(2, 4).expect("valid bits");
        let refined = refine_greedy(&p, &quantize_phases(&phases, 2), &f_tar, &qspec).expect("on grid");
        let mut prev = refined.initial_score;
        for &s in &refined.accepted_scores {
            worst = worst.max((prev - s).max(0.0) / prev);
            prev = s;
        }
    }
    worst
}

/// Score gap between greedy Butler selection and the best of all
/// three-beam subsets of an 8-point DFT.
fn butler_optimality(rng: &mut ChaCha8Rng) -> f64 {
    let n = 8;
    let w = dft_mixer(n).expect("n > 0");
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let f_tar = orthonormal(n, 2, rng);
        let greedy = butler_select(&f_tar, 3).expect("3 <= 8");
        let greedy_score = subspace_score(&f_tar, &greedy.analog).expect("rows");
        let mut best = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let sel = ComplexMatrix::from_fn(n, 3, |i, j| w[(i, [a, b, c][j])]);
                    best = best.max(subspace_score(&f_tar, &sel).expect("rows"));
                }
            }
        }
        worst = worst.max(best - greedy_score);
    }
    worst
}

fn fully_connected(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(4..=32);
        let s = rng.random_range(1..=3);
        let f_tar = orthonormal(n, s, rng);
        let (abs_rf, amps) = fc1_abstract(&f_tar).expect("nonzero columns");
        let mut bb = ComplexMatrix::zeros(2 * s, s);
        for (j, &a) in amps.iter().enumerate() {
            bb[(2 * j, j)] = Complex64::new(a, 0.0);
            bb[(2 * j + 1, j)] = Complex64::new(a, 0.0);
        }
        worst = worst.max(frobenius_sq(&(abs_rf * bb - &f_tar)).sqrt());
        let bound = 1.0 / ((n * s) as f64).sqrt();
        let fc2 = fc2_analog(&f_tar).expect("full rank");
        for col in fc2.analog.column_iter() {
            let peak = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            worst = worst.max((peak - bound).abs() / bound);
        }
    }
    worst
}

fn config_round_trip() -> f64 {
    [ExperimentConfig::desk(), ExperimentConfig::paper_scale()]
        .iter()
        .map(|cfg| match ExperimentConfig::from_json(&cfg.to_json()) {
            Ok(back) if back == *cfg => 0.0,
            _ => 1.0,
        })
        .fold(0.0, f64::max)
}

/// Runs every suite from `seed`.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = rng_from_seed(seed);
    let mut out = vec![
        check("semi-unitarity", semi_unitarity(&mut rng, None), 1e-9),
        check("power preservation", power_preservation(&mut rng), 1e-12),
        check("adjoint gradient", gradient(&mut rng), 1e-5),
        check("exact recovery", exact_recovery(&mut rng), 1e-10),
        check("MMSE equivalence", mmse_equivalence(&mut rng), 1e-8),
    ];
    for (bits, name) in [
        (1, "quantized semi-unitarity q=1"),
        (2, "quantized semi-unitarity q=2"),
        (4, "quantized semi-unitarity q=4"),
        (6, "quantized semi-unitarity q=6"),
    ] {
        out.push(check(name, semi_unitarity(&mut rng, Some(bits)), 1e-9));
    }
    out.push(check("greedy refinement", refinement(&mut rng), 1e-8));
    out.push(check("Butler subset optimality", butler_optimality(&mut rng), 1e-12));
    out.push(check("FC1 identity and FC2 bound", fully_connected(&mut rng), 1e-12));
    out.push(check("config round trip", config_round_trip(), 0.0));
    out
}
