//! Brute-force cross-checks of the fast code paths.
//!
//! Each oracle recomputes a quantity by an independent route and reports the
//! largest deviation it saw. The CLI `oracle` command runs them all.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::estimator::{self, circular_distance, DegeneratePolicy};
use crate::noise::poisson_cdf;
use crate::sim::{
    bright_probability, evolve_sequence, rotate, GateSpec, NoiseConfig, PlusPrep, QubitState,
    SequenceStart,
};

type M3 = Matrix3<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub evolution: f64,
    pub composition: f64,
    pub poisson: f64,
    pub exactness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            evolution: 1e-10,
            composition: 1e-12,
            poisson: 1e-12,
            exactness: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            evolution: tol,
            composition: tol,
            poisson: tol,
            exactness: tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleReport {
    fn new(name: &'static str, cases: usize, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name,
            cases,
            max_deviation,
            tolerance,
            passed: max_deviation.is_finite() && max_deviation <= tolerance,
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `|0⟩, |1⟩, |aux⟩` density matrix.
#[rustfmt::skip]
fn to_matrix(s: &QubitState) -> M3 {
    M3::new(
        c(s.rho00), s.rho01, c(0.0),
        s.rho01.conj(), c(s.rho11), c(0.0),
        c(0.0), c(0.0), c(s.leak),
    )
}

#[rustfmt::skip]
fn gate_unitary(theta: f64) -> M3 {
    // cos(θ/2) I − i sin(θ/2) σ_Y on the qubit block, identity on aux.
    let (s, co) = (theta / 2.0).sin_cos();
    let i = Complex64::i();
    let sigma_y = M3::new(
        c(0.0), -i, c(0.0),
        i, c(0.0), c(0.0),
        c(0.0), c(0.0), c(0.0),
    );
    let qubit_id = M3::from_diagonal(&nalgebra::Vector3::new(c(1.0), c(1.0), c(0.0)));
    let aux = M3::from_diagonal(&nalgebra::Vector3::new(c(0.0), c(0.0), c(1.0)));
    qubit_id * c(co) - sigma_y * (i * s) + aux
}

fn damp(rho: &M3, lambda: f64) -> M3 {
    let k0 = M3::from_diagonal(&nalgebra::Vector3::new(
        c(1.0),
        c((1.0 - lambda).sqrt()),
        c(1.0),
    ));
    let k1 = M3::from_diagonal(&nalgebra::Vector3::new(c(0.0), c(lambda.sqrt()), c(0.0)));
    k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint()
}

fn conjugate(u: &M3, rho: &M3) -> M3 {
    u * rho * u.adjoint()
}

fn max_entry_diff(a: &M3, b: &M3) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The full sequence, step by step, as 3×3 matrices.
fn brute_force_sequence(n: u64, start: SequenceStart, theta: f64, noise: &NoiseConfig) -> M3 {
    let u = gate_unitary(theta);
    let lambda = noise.phase_damping_per_gate;
    let eps = noise.prep_error;
    let mut rho = M3::from_diagonal(&nalgebra::Vector3::new(c(1.0 - eps), c(0.0), c(eps)));
    let step = |r: &M3| damp(&conjugate(&u, r), lambda);
    if start == SequenceStart::FromPlus {
        rho = match noise.plus_prep {
            PlusPrep::SelfPrep => step(&rho),
            PlusPrep::Ideal => conjugate(&gate_unitary(PI / 2.0), &rho),
        };
    }
    for _ in 0..n {
        rho = step(&rho);
    }
    rho
}

/// Simulator bright probability against explicit matrix evolution over
/// random `(θ, ε, λ, start, |+⟩ mode)` and every `n ≤ max_n`.
pub fn evolution_oracle(configs: usize, max_n: u64, tolerance: f64, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..configs {
        let theta = rng.random_range(1e-3..TAU - 1e-3);
        let noise = NoiseConfig {
            prep_error: rng.random_range(0.0..0.5),
            detector: None,
            phase_damping_per_gate: rng.random_range(0.0..0.3),
            plus_prep: if rng.random_bool(0.5) {
                PlusPrep::SelfPrep
            } else {
                PlusPrep::Ideal
            },
        };
        let gate = GateSpec {
            theta_actual: theta,
        };
        for start in [SequenceStart::FromZero, SequenceStart::FromPlus] {
            for n in 1..=max_n {
                let rho = brute_force_sequence(n, start, theta, &noise);
                let expected = rho[(1, 1)].re + rho[(2, 2)].re;
                let dev = match evolve_sequence(n, start, &gate, &noise) {
                    Ok(s) => (bright_probability(&s) - expected).abs(),
                    Err(_) => f64::INFINITY,
                };
                worst = worst.max(dev);
                cases += 1;
            }
        }
    }
    OracleReport::new("evolution", cases, worst, tolerance)
}

/// One gate application by `gate_action` against `U ρ U†` on random states,
/// comparing every matrix entry. `gate_action` is pluggable so a broken
/// rotation can be shown to fail.
pub fn composition_oracle<F>(
    gate_action: F,
    cases: usize,
    tolerance: f64,
    seed: u64,
) -> OracleReport
where
    F: Fn(&QubitState, f64) -> QubitState,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let state = random_state(&mut rng);
        let theta = rng.random_range(0.0..TAU);
        let got = to_matrix(&gate_action(&state, theta));
        let want = conjugate(&gate_unitary(theta), &to_matrix(&state));
        worst = worst.max(max_entry_diff(&got, &want));
    }
    OracleReport::new("composition", cases, worst, tolerance)
}

fn random_state(rng: &mut ChaCha8Rng) -> QubitState {
    // Mixed qubit block from a random Bloch vector of length <= 1.
    let leak = rng.random_range(0.0..0.5);
    let r = rng.random_range(0.0f64..1.0).cbrt();
    let cos_t = rng.random_range(-1.0f64..1.0);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let phi = rng.random_range(0.0..TAU);
    let (bx, by, bz) = (r * sin_t * phi.cos(), r * sin_t * phi.sin(), r * cos_t);
    let pop = 1.0 - leak;
    QubitState {
        rho00: pop * (1.0 + bz) / 2.0,
        rho11: pop * (1.0 - bz) / 2.0,
        rho01: Complex64::new(bx, -by) * (pop / 2.0),
        leak,
    }
}

/// `poisson_cdf` against plain forward summation of the pmf over
/// `k ≤ max_k` and a grid of means in `[0, max_mean]`.
pub fn poisson_oracle(max_k: i64, max_mean: f64, tolerance: f64) -> OracleReport {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let steps = (max_mean * 4.0).round() as usize;
    for i in 0..=steps {
        let mean = max_mean * i as f64 / steps as f64;
        let mut term = (-mean).exp();
        let mut sum = 0.0;
        for k in 0..=max_k {
            if k > 0 {
                term *= mean / k as f64;
            }
            sum += term;
            let dev = match poisson_cdf(k, mean) {
                Ok(v) => (v - sum).abs(),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(dev);
            cases += 1;
        }
    }
    OracleReport::new("poisson_cdf", cases, worst, tolerance)
}

/// Estimator on exact expected counts for random `θ ∈ (0.1, 2π − 0.1)`
/// with sequences up to `2^max_exponent`; deviation is the circular error.
pub fn exactness_oracle(
    count: usize,
    max_exponent: usize,
    tolerance: f64,
    seed: u64,
) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let theta = rng.random_range(0.1..TAU - 0.1);
        let obs = estimator::expected_observations(theta, 1.0, max_exponent + 1);
        let dev = match estimator::estimate(&obs, DegeneratePolicy::Flag) {
            Ok(r) => circular_distance(r.theta_est, theta),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(dev);
    }
    OracleReport::new("estimator_exactness", count, worst, tolerance)
}

/// Every oracle at its standard size.
pub fn run_all(tol: &Tolerances, seed: u64) -> Vec<OracleReport> {
    vec![
        evolution_oracle(50, 8, tol.evolution, seed),
        composition_oracle(rotate, 200, tol.composition, seed),
        poisson_oracle(60, 40.0, tol.poisson),
        exactness_oracle(1000, 10, tol.exactness, seed),
    ]
}
