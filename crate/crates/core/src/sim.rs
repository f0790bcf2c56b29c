//! Single-qubit density-matrix simulator with an inert leakage level.
//!
//! The qubit block is a 2×2 density matrix over `{|0⟩, |1⟩}`. A separate
//! population `leak` stands in for auxiliary levels that gates do not touch
//! and that always read out bright.
//!
//! Gate convention: `Y_θ = cos(θ/2)·I − i·sin(θ/2)·σ_Y`, which is the real
//! rotation `[[c, −s], [s, c]]`. With this sign `Y_{π/2}|0⟩ = |+⟩`, so a
//! single π/2 gate from `|0⟩` leaves `rho01 = +1/2`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Result, RpeError};

const STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub rho00: f64,
    pub rho11: f64,
    pub rho01: Complex64,
    pub leak: f64,
}

impl QubitState {
    pub fn ground() -> Self {
        Self {
            rho00: 1.0,
            rho11: 0.0,
            rho01: Complex64::new(0.0, 0.0),
            leak: 0.0,
        }
    }

    /// The ideal `|+⟩ = (|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        Self {
            rho00: 0.5,
            rho11: 0.5,
            rho01: Complex64::new(0.5, 0.0),
            leak: 0.0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho00 + self.rho11 + self.leak
    }

    /// Checks trace, non-negativity and positivity of the qubit block.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.rho00,
            self.rho11,
            self.leak,
            self.rho01.re,
            self.rho01.im,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(RpeError::InvalidState(format!(
                "non-finite entry in {self:?}"
            )));
        }
        if (self.trace() - 1.0).abs() > STATE_TOL {
            return Err(RpeError::InvalidState(format!(
                "trace {} differs from 1",
                self.trace()
            )));
        }
        if self.rho00 < -STATE_TOL || self.rho11 < -STATE_TOL || self.leak < -STATE_TOL {
            return Err(RpeError::InvalidState(format!(
                "negative population in {self:?}"
            )));
        }
        if self.rho01.norm_sqr() > self.rho00 * self.rho11 + STATE_TOL {
            return Err(RpeError::InvalidState(format!(
                "coherence |rho01|^2 = {} exceeds rho00*rho11 = {}",
                self.rho01.norm_sqr(),
                self.rho00 * self.rho11
            )));
        }
        Ok(())
    }
}

/// A Y-axis rotation by `theta_actual` radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub theta_actual: f64,
}

impl GateSpec {
    pub fn new(theta_actual: f64) -> Result<Self> {
        if theta_actual > 0.0 && theta_actual < std::f64::consts::TAU {
            Ok(Self { theta_actual })
        } else {
            Err(RpeError::InvalidArgument(format!(
                "gate angle must lie in (0, 2π), got {theta_actual}"
            )))
        }
    }
}

/// Photon-counting readout: Poissonian dark and bright distributions, a
/// fraction of bright events drawn from the dark distribution, and a
/// threshold (`count >= threshold` reads bright).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub dark_mean: f64,
    pub bright_mean: f64,
    pub bright_tail_fraction: f64,
    pub threshold: u32,
}

impl Default for DetectorModel {
    /// 0.1 dark / 19 bright photons with a 1.21 % dark-like bright tail,
    /// read at the optimal threshold of two photons.
    fn default() -> Self {
        Self {
            dark_mean: 0.1,
            bright_mean: 19.0,
            bright_tail_fraction: 0.0121,
            threshold: 2,
        }
    }
}

impl DetectorModel {
    pub fn with_threshold(self, threshold: u32) -> Self {
        Self { threshold, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dark_mean >= 0.0 && self.dark_mean.is_finite()) {
            return Err(RpeError::InvalidArgument(format!(
                "dark_mean must be finite and >= 0, got {}",
                self.dark_mean
            )));
        }
        if !(self.bright_mean > self.dark_mean && self.bright_mean.is_finite()) {
            return Err(RpeError::InvalidArgument(format!(
                "bright_mean ({}) must exceed dark_mean ({})",
                self.bright_mean, self.dark_mean
            )));
        }
        check_probability("bright_tail_fraction", self.bright_tail_fraction)
    }
}

/// How the `|+⟩` input of the y-sequences is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlusPrep {
    /// One extra application of the gate under test (and its damping).
    #[default]
    SelfPrep,
    /// Exact `|+⟩` on the qubit block, leakage kept as prepared.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub prep_error: f64,
    /// `None` reads the outcome directly without photon counting.
    pub detector: Option<DetectorModel>,
    pub phase_damping_per_gate: f64,
    pub plus_prep: PlusPrep,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            prep_error: 0.0,
            detector: None,
            phase_damping_per_gate: 0.0,
            plus_prep: PlusPrep::SelfPrep,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("prep_error", self.prep_error)?;
        check_probability("phase_damping_per_gate", self.phase_damping_per_gate)?;
        if let Some(d) = &self.detector {
            d.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceStart {
    FromZero,
    FromPlus,
}

/// Worst-case preparation: the missing ground-state population sits in the
/// always-bright leakage level.
pub fn prepare(prep_error: f64) -> Result<QubitState> {
    check_probability("prep_error", prep_error)?;
    Ok(QubitState {
        rho00: 1.0 - prep_error,
        rho11: 0.0,
        rho01: Complex64::new(0.0, 0.0),
        leak: prep_error,
    })
}

pub fn apply_gate(state: &QubitState, gate: &GateSpec) -> QubitState {
    rotate(state, gate.theta_actual)
}

/// Conjugates the qubit block by `Y_theta`; leakage is untouched.
pub fn rotate(state: &QubitState, theta: f64) -> QubitState {
    let (s, c) = (theta / 2.0).sin_cos();
    let (a, d, b) = (state.rho00, state.rho11, state.rho01);
    let cs = c * s;
    QubitState {
        rho00: c * c * a - 2.0 * cs * b.re + s * s * d,
        rho11: s * s * a + 2.0 * cs * b.re + c * c * d,
        rho01: cs * (a - d) + c * c * b - s * s * b.conj(),
        leak: state.leak,
    }
}

/// Phase-damping Kraus map `{diag(1, √(1−λ)), diag(0, √λ)}`.
pub fn apply_phase_damping(state: &QubitState, lambda: f64) -> Result<QubitState> {
    check_probability("phase damping", lambda)?;
    Ok(QubitState {
        rho01: state.rho01 * (1.0 - lambda).sqrt(),
        ..*state
    })
}

pub fn bright_probability(state: &QubitState) -> f64 {
    (state.rho11 + state.leak).clamp(0.0, 1.0)
}

/// Cached Poisson samplers for one detector.
#[derive(Debug, Clone, Copy)]
pub struct PhotonCounter {
    dark: Option<Poisson<f64>>,
    bright: Option<Poisson<f64>>,
    tail: f64,
}

impl PhotonCounter {
    pub fn new(detector: &DetectorModel) -> Result<Self> {
        detector.validate()?;
        let poisson = |mean: f64| -> Result<Option<Poisson<f64>>> {
            if mean == 0.0 {
                return Ok(None);
            }
            Poisson::new(mean)
                .map(Some)
                .map_err(|e| RpeError::InvalidArgument(format!("poisson mean {mean}: {e}")))
        };
        Ok(Self {
            dark: poisson(detector.dark_mean)?,
            bright: poisson(detector.bright_mean)?,
            tail: detector.bright_tail_fraction,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, outcome_is_bright: bool, rng: &mut R) -> u64 {
        let dist = if outcome_is_bright && !rng.random_bool(self.tail) {
            self.bright
        } else {
            self.dark
        };
        dist.map_or(0, |d| d.sample(rng) as u64)
    }
}

pub fn sample_photon_count<R: Rng + ?Sized>(
    outcome_is_bright: bool,
    detector: &DetectorModel,
    rng: &mut R,
) -> Result<u64> {
    Ok(PhotonCounter::new(detector)?.sample(outcome_is_bright, rng))
}

/// `true` means bright.
pub fn classify(count: u64, threshold: u32) -> bool {
    count >= u64::from(threshold)
}

/// State just before readout for one sequence: preparation, the optional
/// self-prepared `|+⟩`, then `repetitions` gates each followed by damping.
pub fn evolve_sequence(
    repetitions: u64,
    start: SequenceStart,
    gate: &GateSpec,
    noise: &NoiseConfig,
) -> Result<QubitState> {
    let lambda = noise.phase_damping_per_gate;
    let step = |s: &QubitState| apply_phase_damping(&apply_gate(s, gate), lambda);

    let mut state = prepare(noise.prep_error)?;
    if start == SequenceStart::FromPlus {
        state = match noise.plus_prep {
            PlusPrep::SelfPrep => step(&state)?,
            PlusPrep::Ideal => {
                let pop = 1.0 - state.leak;
                QubitState {
                    rho00: 0.5 * pop,
                    rho11: 0.5 * pop,
                    rho01: Complex64::new(0.5 * pop, 0.0),
                    leak: state.leak,
                }
            }
        };
    }
    for _ in 0..repetitions {
        state = step(&state)?;
    }
    Ok(state)
}

/// Runs `samples` shots of one sequence and returns how many read bright.
pub fn run_sequence<R: Rng + ?Sized>(
    repetitions: u64,
    start: SequenceStart,
    samples: u32,
    gate: &GateSpec,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<u32> {
    if repetitions == 0 || samples == 0 {
        return Err(RpeError::InvalidArgument(format!(
            "sequence needs n >= 1 and M >= 1, got n = {repetitions}, M = {samples}"
        )));
    }
    noise.validate()?;
    let state = evolve_sequence(repetitions, start, gate, noise)?;
    state.validate()?;
    let p = bright_probability(&state);

    let counter = noise
        .detector
        .as_ref()
        .map(PhotonCounter::new)
        .transpose()?;
    let threshold = noise.detector.map_or(0, |d| d.threshold);
    let mut bright = 0;
    for _ in 0..samples {
        let outcome = rng.random_bool(p);
        let reads_bright = match &counter {
            Some(c) => classify(c.sample(outcome, rng), threshold),
            None => outcome,
        };
        bright += u32::from(reads_bright);
    }
    Ok(bright)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn gate(theta: f64) -> GateSpec {
        GateSpec::new(theta).unwrap()
    }

    fn assert_state_eq(a: &QubitState, b: &QubitState, tol: f64) {
        assert_abs_diff_eq!(a.rho00, b.rho00, epsilon = tol);
        assert_abs_diff_eq!(a.rho11, b.rho11, epsilon = tol);
        assert_abs_diff_eq!(a.rho01.re, b.rho01.re, epsilon = tol);
        assert_abs_diff_eq!(a.rho01.im, b.rho01.im, epsilon = tol);
        assert_abs_diff_eq!(a.leak, b.leak, epsilon = tol);
    }

    #[test]
    fn prepare_examples() {
        assert_eq!(prepare(0.0).unwrap(), QubitState::ground());
        let s = prepare(0.357).unwrap();
        assert_abs_diff_eq!(s.rho00, 0.643, epsilon = 1e-15);
        assert_eq!(s.leak, 0.357);
        let all = prepare(1.0).unwrap();
        assert_eq!(bright_probability(&all), 1.0);
        assert!(prepare(-0.1).is_err());
        assert!(prepare(1.5).is_err());
    }

    #[test]
    fn bit_flip_and_superposition() {
        let flipped = apply_gate(&QubitState::ground(), &gate(PI));
        assert_abs_diff_eq!(flipped.rho11, 1.0, epsilon = 1e-15);

        let half = apply_gate(&QubitState::ground(), &gate(FRAC_PI_2));
        assert_abs_diff_eq!(half.rho00, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(half.rho11, 0.5, epsilon = 1e-15);
        // Sign convention: Y_{π/2}|0⟩ = |+⟩.
        assert_abs_diff_eq!(half.rho01.re, 0.5, epsilon = 1e-15);
        assert_eq!(half.rho01.im, 0.0);
        assert_abs_diff_eq!(bright_probability(&half), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn two_quarter_turns_equal_half_turn() {
        // Brute force: square the 2x2 rotation and apply it to |0⟩⟨0|.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = [[h, -h], [h, h]];
        let mut r2 = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r2[i][j] = r[i][0] * r[0][j] + r[i][1] * r[1][j];
            }
        }
        let psi = [r2[0][0], r2[1][0]];
        let expected = QubitState {
            rho00: psi[0] * psi[0],
            rho11: psi[1] * psi[1],
            rho01: Complex64::new(psi[0] * psi[1], 0.0),
            leak: 0.0,
        };
        let g = gate(FRAC_PI_2);
        let twice = apply_gate(&apply_gate(&QubitState::ground(), &g), &g);
        let once = apply_gate(&QubitState::ground(), &gate(PI));
        assert_state_eq(&twice, &once, 1e-12);
        assert_state_eq(&twice, &expected, 1e-12);
    }

    #[test]
    fn phase_damping_examples() {
        let s = QubitState::plus();
        assert_eq!(apply_phase_damping(&s, 0.0).unwrap(), s);
        assert_eq!(apply_phase_damping(&s, 1.0).unwrap().rho01.norm(), 0.0);
        let d = apply_phase_damping(&s, 0.19).unwrap();
        assert_abs_diff_eq!(d.rho01.re, 0.45, epsilon = 1e-15);
        assert_eq!(d.rho00, s.rho00);
        assert!(apply_phase_damping(&s, 1.01).is_err());
        assert!(apply_phase_damping(&s, -0.01).is_err());
    }

    #[test]
    fn bright_probability_examples() {
        assert_eq!(bright_probability(&QubitState::ground()), 0.0);
        assert_abs_diff_eq!(bright_probability(&prepare(0.3).unwrap()), 0.3);
    }

    #[test]
    fn classify_examples() {
        assert!(!classify(1, 2));
        assert!(classify(2, 2));
        assert!(classify(0, 0));
    }

    fn empirical_mean(bright: bool, d: &DetectorModel, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counter = PhotonCounter::new(d).unwrap();
        let n = 100_000;
        (0..n)
            .map(|_| counter.sample(bright, &mut rng) as f64)
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn photon_count_means() {
        let d = DetectorModel {
            bright_tail_fraction: 0.0,
            ..DetectorModel::default()
        };
        assert!((empirical_mean(false, &d, 1) - 0.1).abs() < 0.01);
        assert!((empirical_mean(true, &d, 2) - 19.0).abs() < 0.1);
    }

    #[test]
    fn full_tail_bright_matches_dark() {
        let d = DetectorModel {
            bright_tail_fraction: 1.0,
            ..DetectorModel::default()
        };
        let counter = PhotonCounter::new(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50_000;
        let mut hist = [[0u64; 4]; 2];
        for _ in 0..n {
            hist[0][counter.sample(false, &mut rng).min(3) as usize] += 1;
            hist[1][counter.sample(true, &mut rng).min(3) as usize] += 1;
        }
        // Two-sample chi-square over bins {0, 1, >=2}.
        let pooled: Vec<u64> = (0..3)
            .map(|k| {
                if k < 2 {
                    hist[0][k] + hist[1][k]
                } else {
                    hist[0][2..].iter().sum::<u64>() + hist[1][2..].iter().sum::<u64>()
                }
            })
            .collect();
        let mut chi2 = 0.0;
        for row in &hist {
            let obs = [row[0], row[1], row[2] + row[3]];
            for k in 0..3 {
                let expected = pooled[k] as f64 / 2.0;
                chi2 += (obs[k] as f64 - expected).powi(2) / expected;
            }
        }
        // 2 dof, 99.9th percentile is 13.8.
        assert!(chi2 < 13.8, "chi2 = {chi2}");
    }

    #[test]
    fn sequence_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = NoiseConfig::noiseless();
        let g = gate(FRAC_PI_2);
        let m = 10_000;
        let x = run_sequence(1, SequenceStart::FromZero, m, &g, &noise, &mut rng).unwrap();
        assert!((f64::from(x) / f64::from(m) - 0.5).abs() < 0.02);
        let y = run_sequence(1, SequenceStart::FromPlus, m, &g, &noise, &mut rng).unwrap();
        assert_eq!(y, m);
        let z = run_sequence(4, SequenceStart::FromZero, m, &g, &noise, &mut rng).unwrap();
        assert_eq!(z, 0);
        assert!(run_sequence(0, SequenceStart::FromZero, m, &g, &noise, &mut rng).is_err());
        assert!(run_sequence(1, SequenceStart::FromZero, 0, &g, &noise, &mut rng).is_err());
    }

    #[test]
    fn ideal_plus_matches_self_prep_at_quarter_turn() {
        let g = gate(FRAC_PI_2);
        let mut noise = NoiseConfig::noiseless();
        let a = evolve_sequence(3, SequenceStart::FromPlus, &g, &noise).unwrap();
        noise.plus_prep = PlusPrep::Ideal;
        let b = evolve_sequence(3, SequenceStart::FromPlus, &g, &noise).unwrap();
        assert_state_eq(&a, &b, 1e-12);
    }

    #[test]
    fn frequencies_match_ideal_sinusoid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pick = ChaCha8Rng::seed_from_u64(6);
        let noise = NoiseConfig {
            plus_prep: PlusPrep::Ideal,
            ..NoiseConfig::noiseless()
        };
        let m = 10_000u32;
        for _ in 0..20 {
            let n: u64 = pick.random_range(1..=64);
            let theta: f64 = pick.random_range(0.05..TAU - 0.05);
            let g = gate(theta);
            let nt = n as f64 * theta;
            for (start, p) in [
                (SequenceStart::FromZero, (1.0 - nt.cos()) / 2.0),
                (SequenceStart::FromPlus, (1.0 + nt.sin()) / 2.0),
            ] {
                let k = run_sequence(n, start, m, &g, &noise, &mut rng).unwrap();
                let sigma = (p * (1.0 - p) / f64::from(m)).sqrt();
                let dev = (f64::from(k) / f64::from(m) - p).abs();
                assert!(
                    dev <= 4.0 * sigma + 1e-12,
                    "n={n} θ={theta} {start:?}: dev {dev} σ {sigma}"
                );
            }
        }
    }

    fn arb_state() -> impl Strategy<Value = QubitState> {
        (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..TAU).prop_map(|(leak, frac, coh, phase)| {
            let pop = 1.0 - leak;
            let rho00 = pop * frac;
            let rho11 = pop - rho00;
            let mag = coh * (rho00 * rho11).sqrt();
            QubitState {
                rho00,
                rho11,
                rho01: Complex64::from_polar(mag, phase),
                leak,
            }
        })
    }

    proptest! {
        #[test]
        fn channel_chain_preserves_invariants(
            s in arb_state(),
            ops in prop::collection::vec((0.01..TAU - 0.01, 0.0..=1.0f64), 1..40),
        ) {
            let mut st = s;
            for (theta, lambda) in ops {
                st = apply_phase_damping(&apply_gate(&st, &gate(theta)), lambda).unwrap();
                prop_assert!((st.trace() - 1.0).abs() < 1e-12);
                prop_assert!(st.validate().is_ok(), "{:?}", st);
                prop_assert_eq!(st.leak, s.leak);
            }
        }

        #[test]
        fn real_coherence_stays_real(
            leak in 0.0..1.0f64,
            ops in prop::collection::vec((0.01..TAU - 0.01, 0.0..=1.0f64), 1..40),
        ) {
            let mut st = prepare(leak).unwrap();
            for (theta, lambda) in ops {
                st = apply_phase_damping(&apply_gate(&st, &gate(theta)), lambda).unwrap();
                prop_assert!(st.rho01.im.abs() < 1e-12);
            }
        }

        #[test]
        fn inverse_rotation_restores_state(s in arb_state(), theta in 0.01..TAU - 0.01) {
            let back = apply_gate(&apply_gate(&s, &gate(theta)), &gate(TAU - theta));
            prop_assert!((back.rho00 - s.rho00).abs() < 1e-10);
            prop_assert!((back.rho11 - s.rho11).abs() < 1e-10);
            prop_assert!((back.rho01 - s.rho01).norm() < 1e-10);
        }

        #[test]
        fn repeated_rotation_composes(s in arb_state(), theta in 0.01..TAU - 0.01, n in 1u32..64) {
            let g = gate(theta);
            let mut st = s;
            for _ in 0..n {
                st = apply_gate(&st, &g);
            }
            let once = rotate(&s, (f64::from(n) * theta).rem_euclid(TAU));
            prop_assert!((st.rho00 - once.rho00).abs() < 1e-10);
            prop_assert!((st.rho11 - once.rho11).abs() < 1e-10);
            prop_assert!((st.rho01 - once.rho01).norm() < 1e-10);
        }
    }
}
