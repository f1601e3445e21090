//! The SMO trainer must reach the dual maximum found by an independent
//! brute-force maximizer on small random problems, while keeping every
//! feasibility and KKT invariant.

use rand::Rng;

use phogsvm_core::svm::{
    self, dual_objective, kkt_violation, kernel_eval, train_smo, KernelSpec, TrainConfig,
};
use phogsvm_core::Label;
use phogsvm_testkit::qp_oracle::max_dual_objective;
use phogsvm_testkit::synth;

struct Problem {
    features: Vec<Vec<f64>>,
    labels: Vec<Label>,
    kernel: KernelSpec,
    c: f64,
}

fn random_problem(rng: &mut rand_chacha::ChaCha8Rng) -> Problem {
    let n = rng.gen_range(2..=8);
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
        .collect();
    let mut labels: Vec<Label> = (0..n)
        .map(|_| {
            if rng.gen_range(0..2) == 0 {
                Label::Positive
            } else {
                Label::Negative
            }
        })
        .collect();
    labels[0] = Label::Positive;
    labels[1] = Label::Negative;
    let kernel = match rng.gen_range(0..3) {
        0 => KernelSpec::Linear,
        1 => KernelSpec::Polynomial {
            degree: 2,
            coef0: 1.0,
        },
        _ => KernelSpec::Rbf {
            gamma: rng.gen_range(0.3..3.0),
        },
    };
    let c = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
    Problem {
        features,
        labels,
        kernel,
        c,
    }
}

#[test]
fn smo_matches_brute_force_maximum_on_100_problems() {
    let mut rng = synth::rng(4242);
    for trial in 0..100 {
        let p = random_problem(&mut rng);
        // Train well past the generic stopping point so the objective
        // comparison probes the solver, not the tolerance.
        let cfg = TrainConfig {
            c: p.c,
            tol: 1e-10,
            max_passes: Some(100_000),
            seed: trial,
        };
        let model = train_smo(&p.features, &p.labels, &p.kernel, &cfg).unwrap();

        let alphas = svm::alphas_for(&model, &p.features);
        let smo_obj = dual_objective(&alphas, &p.labels, &p.features, &p.kernel).unwrap();

        let y: Vec<f64> = p.labels.iter().map(|l| l.sign()).collect();
        let q: Vec<Vec<f64>> = (0..p.features.len())
            .map(|i| {
                (0..p.features.len())
                    .map(|j| {
                        y[i] * y[j] * kernel_eval(&p.kernel, &p.features[i], &p.features[j]).unwrap()
                    })
                    .collect()
            })
            .collect();
        let oracle = max_dual_objective(&q, &y, p.c);

        assert!(
            smo_obj >= oracle - 1e-6,
            "trial {trial}: smo {smo_obj} below oracle {oracle} (kernel {:?}, C {})",
            p.kernel,
            p.c
        );

        // Feasibility at the solution.
        let coef_sum: f64 = model.coefficients.iter().sum();
        assert!(coef_sum.abs() <= 1e-6, "trial {trial}: drift {coef_sum}");
        for a in &alphas {
            assert!((-1e-9..=p.c + 1e-9).contains(a), "trial {trial}: alpha {a}");
        }

        // KKT certification at the conventional tolerance.
        let worst = kkt_violation(&model, &p.features, &p.labels, &alphas, p.c).unwrap();
        assert!(worst <= 1e-3, "trial {trial}: kkt violation {worst}");
    }
}

#[test]
fn perturbing_the_solution_does_not_improve_the_objective() {
    let mut rng = synth::rng(9);
    let p = random_problem(&mut rng);
    let cfg = TrainConfig {
        c: p.c,
        tol: 1e-10,
        max_passes: Some(100_000),
        seed: 5,
    };
    let model = train_smo(&p.features, &p.labels, &p.kernel, &cfg).unwrap();
    let alphas = svm::alphas_for(&model, &p.features);
    let base = dual_objective(&alphas, &p.labels, &p.features, &p.kernel).unwrap();
    let alpha_sum: f64 = alphas.iter().sum();

    // Feasible pairwise perturbations: move mass between two samples of the
    // same class, or grow/shrink one of each class together.
    let n = alphas.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for step in [1e-4, -1e-4] {
                let mut cand = alphas.clone();
                if p.labels[i] == p.labels[j] {
                    cand[i] += step;
                    cand[j] -= step;
                } else {
                    cand[i] += step;
                    cand[j] += step;
                }
                if cand.iter().any(|a| *a < 0.0 || *a > p.c) {
                    continue;
                }
                let perturbed =
                    dual_objective(&cand, &p.labels, &p.features, &p.kernel).unwrap();
                assert!(
                    perturbed <= base + cfg.tol * alpha_sum.max(1.0),
                    "perturbation ({i},{j},{step}) improved {base} -> {perturbed}"
                );
            }
        }
    }
}
