//! Desk-scale period finding: the quantum Fourier transform pipeline, its
//! computational-basis dephasing, classical sampling, and factor recovery.
//!
//! The point of the module is that the dephased final state is a
//! zero-discord state whose samples still factor M — the same construction
//! as the dephased IQP* resource, applied to a textbook algorithm.

use rand::Rng;
use serde::Serialize;

use crate::bits;
use crate::discord::ZeroDiscordState;
use crate::dist::ClassicalDistribution;
use crate::error::{Error, Result};
use crate::rng;
use crate::state::{LocalProductBasis, PureState, PURE_QUBIT_CAP};

/// A factoring instance: odd composite M (not a prime power, at least 15)
/// and a base a coprime to it. The phase register width satisfies
/// M^2 <= 2^nu < 2 M^2 and the output register holds ceil(log2 M) bits.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShorInstance {
    pub m: u64,
    pub a: u64,
    pub nu: usize,
    pub n: usize,
}

impl ShorInstance {
    pub fn new(m: u64, a: u64) -> Result<Self> {
        if m < 15 {
            return Err(Error::invalid("M", "must be at least 15"));
        }
        if m % 2 == 0 {
            return Err(Error::invalid("M", "must be odd"));
        }
        if is_prime(m) {
            return Err(Error::invalid("M", "must be composite"));
        }
        if is_prime_power(m) {
            return Err(Error::invalid("M", "must not be a prime power"));
        }
        if a <= 1 || a >= m {
            return Err(Error::invalid("a", "require 1 < a < M"));
        }
        if gcd(a, m) != 1 {
            return Err(Error::invalid(
                "a",
                format!("gcd({a}, {m}) = {} is not 1", gcd(a, m)),
            ));
        }
        let m2 = m * m;
        let nu = (64 - (m2 - 1).leading_zeros()) as usize;
        debug_assert!((1u128 << nu) >= m2 as u128 && (1u128 << nu) < 2 * m2 as u128);
        let n = (64 - (m - 1).leading_zeros()) as usize;
        Ok(ShorInstance { m, a, nu, n })
    }

    pub fn num_qubits(&self) -> usize {
        self.nu + self.n
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn modpow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut result: u128 = 1;
    let mut b: u128 = (base % modulus) as u128;
    let m = modulus as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result as u64
}

/// Smallest t >= 1 with a^t = 1 mod m; requires gcd(a, m) = 1.
pub fn multiplicative_order(a: u64, m: u64) -> u64 {
    let mut t = 1u64;
    let mut acc = a % m;
    while acc != 1 {
        acc = (acc as u128 * a as u128 % m as u128) as u64;
        t += 1;
    }
    t
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn is_prime_power(m: u64) -> bool {
    for k in 2..=m.ilog2() {
        let c = (m as f64).powf(1.0 / f64::from(k)).round() as u64;
        for base in c.saturating_sub(1)..=c + 1 {
            if base >= 2 && base.checked_pow(k).map(|v| v == m).unwrap_or(false) {
                return true;
            }
        }
    }
    false
}

fn hadamard() -> [[num_complex::Complex64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        [
            num_complex::Complex64::new(h, 0.0),
            num_complex::Complex64::new(h, 0.0),
        ],
        [
            num_complex::Complex64::new(h, 0.0),
            num_complex::Complex64::new(-h, 0.0),
        ],
    ]
}

/// Exact QFT on qubits 1..=width: |x> -> N^{-1/2} sum_c e^{2 pi i x c / N} |c>.
/// Gate-level: Hadamards interleaved with controlled phases, then the
/// bit-reversal swaps.
pub fn qft_register(state: &PureState, width: usize) -> Result<PureState> {
    if width < 1 || width > state.num_qubits() {
        return Err(Error::invalid("width", "register exceeds the state"));
    }
    let mut s = state.clone();
    let had = hadamard();
    for i in (0..width).rev() {
        s = s.apply_single_qubit(i + 1, &had)?;
        for j in (0..i).rev() {
            let angle = std::f64::consts::PI / (1u64 << (i - j)) as f64;
            s = s.apply_controlled_phase(j + 1, i + 1, angle)?;
        }
    }
    for k in 0..width / 2 {
        s = s.apply_swap(k + 1, width - k)?;
    }
    Ok(s)
}

/// The pre-measurement state: uniform superposition over the phase
/// register, modular exponentiation a^x mod M into the output register,
/// then the QFT on the phase register. Requires nu + n <= 24; larger
/// instances go through [`analytic_phase_distribution`].
pub fn build_shor_state(inst: &ShorInstance) -> Result<PureState> {
    let r = inst.num_qubits();
    if r > PURE_QUBIT_CAP {
        return Err(Error::QubitCapExceeded {
            requested: r,
            cap: PURE_QUBIT_CAP,
        });
    }
    let big = 1usize << inst.nu;
    let amp = num_complex::Complex64::new((big as f64).sqrt().recip(), 0.0);
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << r];
    let mut f: u64 = 1 % inst.m;
    for x in 0..big as u64 {
        amps[(x | (f << inst.nu)) as usize] = amp;
        f = (f as u128 * inst.a as u128 % inst.m as u128) as u64;
    }
    qft_register(&PureState::from_raw(r, amps), inst.nu)
}

/// Dephase the final state in the computational basis over the full
/// register. Diagonal by construction; its table is the measurement
/// distribution.
pub fn dephase_final(state: &PureState, inst: &ShorInstance) -> Result<ZeroDiscordState> {
    if state.num_qubits() != inst.num_qubits() {
        return Err(Error::BitLengthMismatch {
            expected: inst.num_qubits(),
            actual: state.num_qubits(),
        });
    }
    crate::discord::dephase_pure(state, &LocalProductBasis::computational(state.num_qubits()))
}

/// Phase-register distribution: the dense pipeline when it fits, otherwise
/// the closed-form spectrum of the period structure (identical by the
/// geometric-sum analysis of the QFT of a periodic superposition).
pub fn phase_distribution(inst: &ShorInstance) -> Result<ClassicalDistribution> {
    if inst.num_qubits() <= PURE_QUBIT_CAP {
        let state = build_shor_state(inst)?;
        let zd = dephase_final(&state, inst)?;
        zd.table().marginal_low(inst.nu)
    } else {
        analytic_phase_distribution(inst)
    }
}

/// Closed form of the phase distribution. After the output register fixes a
/// residue x0, the phase register holds A(x0) equally spaced points with
/// spacing r0 = ord(a); the QFT maps that to the Dirichlet kernel
/// |sum_{k<A} e^{i k phi}|^2 with phi = 2 pi c r0 / N.
pub fn analytic_phase_distribution(inst: &ShorInstance) -> Result<ClassicalDistribution> {
    let r0 = multiplicative_order(inst.a, inst.m);
    let big = 1u64 << inst.nu;
    let q = big / r0;
    let s = big % r0;
    let norm = 1.0 / (big as f64 * big as f64);
    let kernel = |a_count: u64, phi: f64| -> f64 {
        let half = phi / 2.0;
        if half.sin().abs() < 1e-12 {
            (a_count as f64) * (a_count as f64)
        } else {
            let top = (a_count as f64 * half).sin();
            (top * top) / (half.sin() * half.sin())
        }
    };
    let entries = (0..big).map(|c| {
        let phi = std::f64::consts::TAU * (c as f64) * (r0 as f64) / (big as f64);
        let p = norm * (s as f64 * kernel(q + 1, phi) + (r0 - s) as f64 * kernel(q, phi));
        (c, p)
    });
    ClassicalDistribution::from_probabilities(inst.nu, entries)
}

/// Seeded generator for batch runs: a uniformly chosen valid modulus up to
/// `max_m` with a uniformly chosen coprime base.
pub fn random_shor_instance(max_m: u64, seed: u64) -> Result<ShorInstance> {
    let candidates: Vec<u64> = (15..=max_m)
        .step_by(2)
        .filter(|&m| !is_prime(m) && !is_prime_power(m))
        .collect();
    if candidates.is_empty() {
        return Err(Error::invalid("max_m", "no valid modulus at or below this bound"));
    }
    let mut stream = rng::seeded(seed);
    let m = candidates[stream.gen_range(0..candidates.len())];
    loop {
        let a = stream.gen_range(2..m);
        if gcd(a, m) == 1 {
            return ShorInstance::new(m, a);
        }
    }
}

/// A period estimate extracted from one measurement sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PeriodCandidate {
    pub sample: u64,
    pub period: u64,
    pub verified: bool,
}

/// Continued-fraction post-processing of a phase sample: scan the
/// convergent denominators of c / 2^nu (skipping the trivial zero
/// convergent, so c = 0 stays unverified) and test small multiples up to 4d
/// against a^t = 1 mod M. A verified multiple is reduced to the actual
/// multiplicative order so the factoring step sees the genuine period.
pub fn extract_period(c: u64, inst: &ShorInstance) -> PeriodCandidate {
    let big = 1u64 << inst.nu;
    debug_assert!(c < big);
    let mut best_denominator = 1u64;
    let (mut p, mut q) = (c as u128, big as u128);
    // Convergent recurrences seeded with h_{-2}/k_{-2} = 0/1, h_{-1}/k_{-1} = 1/0.
    let (mut h_prev, mut h) = (0u128, 1u128);
    let (mut k_prev, mut k) = (1u128, 0u128);
    while q != 0 {
        let a = p / q;
        (p, q) = (q, p - a * q);
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        if h == 0 {
            continue;
        }
        if k > inst.m as u128 {
            break;
        }
        let d = k as u64;
        best_denominator = d;
        for mult in 1..=4u64 {
            let t = d * mult;
            if t > 4 * inst.m {
                break;
            }
            if modpow(inst.a, t, inst.m) == 1 {
                return PeriodCandidate {
                    sample: c,
                    period: reduce_to_order(inst.a, inst.m, t),
                    verified: true,
                };
            }
        }
    }
    PeriodCandidate {
        sample: c,
        period: best_denominator,
        verified: false,
    }
}

/// Smallest divisor d of t with a^d = 1 mod m.
fn reduce_to_order(a: u64, m: u64, t: u64) -> u64 {
    for d in 1..=t {
        if t % d == 0 && modpow(a, d, m) == 1 {
            return d;
        }
    }
    t
}

/// What the classical factoring step produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FactorOutcome {
    Factors(u64, u64),
    /// Resample: odd period or a^(r/2) = ±1 mod M.
    Retry(String),
}

/// Turn a verified period into a factor pair, or signal a retry.
/// Rejects unverified periods.
pub fn factor_from_period(m: u64, a: u64, r: u64) -> Result<FactorOutcome> {
    if r == 0 || modpow(a, r, m) != 1 {
        return Err(Error::invalid(
            "period",
            format!("{a}^{r} mod {m} is not 1; the period is unverified"),
        ));
    }
    if r % 2 == 1 {
        return Ok(FactorOutcome::Retry(format!("period {r} is odd")));
    }
    let h = modpow(a, r / 2, m);
    if h == m - 1 {
        return Ok(FactorOutcome::Retry(format!(
            "{a}^({r}/2) = -1 mod {m}"
        )));
    }
    if h == 1 {
        return Ok(FactorOutcome::Retry(format!("{a}^({r}/2) = 1 mod {m}")));
    }
    let f1 = gcd(h - 1, m);
    let f2 = gcd(h + 1, m);
    if f1 <= 1 || f1 >= m || f2 <= 1 || f2 >= m {
        return Ok(FactorOutcome::Retry("trivial gcd".into()));
    }
    Ok(FactorOutcome::Factors(f1.min(f2), f1.max(f2)))
}

/// One sample record of a demo run.
#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub sample: String,
    pub candidate_period: u64,
    pub verified: bool,
    pub outcome: String,
}

/// Full run report: samples drawn, candidates, the verified period, and
/// the factors (when found).
#[derive(Clone, Debug, Serialize)]
pub struct ShorRunReport {
    pub m: u64,
    pub a: u64,
    pub nu: usize,
    pub n: usize,
    pub seed: u64,
    pub samples: Vec<SampleRecord>,
    pub period: Option<u64>,
    pub factors: Option<(u64, u64)>,
    pub succeeded: bool,
}

/// A prepared demo: the instance plus its phase distribution, so repeated
/// seeded trials share the state-construction work.
#[derive(Clone, Debug)]
pub struct ShorDemo {
    inst: ShorInstance,
    phase: ClassicalDistribution,
}

impl ShorDemo {
    pub fn prepare(inst: ShorInstance) -> Result<Self> {
        Ok(ShorDemo {
            inst,
            phase: phase_distribution(&inst)?,
        })
    }

    pub fn instance(&self) -> &ShorInstance {
        &self.inst
    }

    pub fn phase(&self) -> &ClassicalDistribution {
        &self.phase
    }

    /// Draw up to `max_samples` phase samples; each is pushed through the
    /// continued-fraction and factoring steps until a factor pair appears.
    pub fn run(&self, seed: u64, max_samples: usize) -> Result<ShorRunReport> {
        let mut stream = rng::seeded(seed);
        self.run_with(seed, max_samples, &mut stream)
    }

    pub fn run_with(
        &self,
        seed: u64,
        max_samples: usize,
        rng: &mut impl Rng,
    ) -> Result<ShorRunReport> {
        let inst = &self.inst;
        let mut samples = Vec::new();
        let mut period = None;
        let mut factors = None;
        for _ in 0..max_samples {
            let c = self.phase.sample(rng);
            let candidate = extract_period(c, inst);
            let outcome = if candidate.verified {
                match factor_from_period(inst.m, inst.a, candidate.period)? {
                    FactorOutcome::Factors(f1, f2) => {
                        period = Some(candidate.period);
                        factors = Some((f1, f2));
                        format!("factors ({f1}, {f2})")
                    }
                    FactorOutcome::Retry(reason) => format!("retry: {reason}"),
                }
            } else {
                "retry: no verified period from this sample".to_string()
            };
            samples.push(SampleRecord {
                sample: bits::format_bits(c, inst.nu),
                candidate_period: candidate.period,
                verified: candidate.verified,
                outcome,
            });
            if factors.is_some() {
                break;
            }
        }
        Ok(ShorRunReport {
            m: inst.m,
            a: inst.a,
            nu: inst.nu,
            n: inst.n,
            seed,
            samples,
            period,
            factors,
            succeeded: factors.is_some(),
        })
    }
}
