//! IQP* circuit instances and their exact output distributions.
//!
//! An instance is `(n, nu, gates)` where each gate is a pair of a nu-bit
//! string `z` and an angle `theta in (0, 2*pi]`, acting as
//! `exp(i theta X[z])` with `X[z]` the tensor product of Pauli-X on the
//! qubits where `z_j = 1`. All gates commute, the register starts in the
//! padded computational state |x̄>, and the output is a computational-basis
//! measurement of all nu qubits.

use num_complex::Complex64;
use rand::Rng;

use crate::bits;
use crate::dist::ClassicalDistribution;
use crate::error::{Error, Result};
use crate::format;
use crate::rng;
use crate::state::{PureState, PURE_QUBIT_CAP};

const TWO_PI: f64 = std::f64::consts::TAU;

/// One commuting gate `exp(i theta X[z])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IqpGate {
    pub z: u64,
    pub theta: f64,
}

/// A validated IQP* instance.
#[derive(Clone, Debug)]
pub struct IqpCircuit {
    n: usize,
    nu: usize,
    gates: Vec<IqpGate>,
}

impl IqpCircuit {
    pub fn new(n: usize, nu: usize, gates: Vec<IqpGate>) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("n", "input length must be at least 1"));
        }
        if nu < n {
            return Err(Error::invalid(
                "nu",
                format!("register width {nu} smaller than input length {n}"),
            ));
        }
        if nu > PURE_QUBIT_CAP {
            return Err(Error::QubitCapExceeded {
                requested: nu,
                cap: PURE_QUBIT_CAP,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for gate in &gates {
            if gate.z >= (1u64 << nu) {
                return Err(Error::BitLengthMismatch {
                    expected: nu,
                    actual: 64 - gate.z.leading_zeros() as usize,
                });
            }
            if !seen.insert(gate.z) {
                return Err(Error::DuplicateZ {
                    z: bits::format_bits(gate.z, nu),
                });
            }
            if !(gate.theta > 0.0 && gate.theta <= TWO_PI) {
                return Err(Error::AngleOutOfRange { theta: gate.theta });
            }
        }
        Ok(IqpCircuit { n, nu, gates })
    }

    /// Parse the JSON instance document (see the file-format docs).
    pub fn parse_instance(text: &str) -> Result<Self> {
        let file: format::InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        file.into_circuit()
    }

    pub fn to_instance_json(&self) -> String {
        format::InstanceFile::from_circuit(self).to_json()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn gates(&self) -> &[IqpGate] {
        &self.gates
    }

    pub fn zset(&self) -> Vec<u64> {
        self.gates.iter().map(|g| g.z).collect()
    }

    /// True iff the gate strings are linearly independent over GF(2).
    pub fn z_independent(&self) -> bool {
        bits::gf2_independent(&self.zset())
    }

    /// Statevector just before the final measurement.
    pub fn final_state(&self, x: &InputString) -> Result<PureState> {
        x.check_matches(self)?;
        let dim = 1usize << self.nu;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[x.padded() as usize] = Complex64::new(1.0, 0.0);
        for gate in &self.gates {
            apply_x_rotation(&mut amps, gate.z, gate.theta);
        }
        Ok(PureState::from_raw(self.nu, amps))
    }

    /// Exact output distribution P(.|x) over all nu-bit strings.
    pub fn simulate(&self, x: &InputString) -> Result<ClassicalDistribution> {
        let state = self.final_state(x)?;
        ClassicalDistribution::from_probabilities(
            self.nu,
            state
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(y, a)| (y as u64, a.norm_sqr())),
        )
    }

    /// One exact sample from P(.|x); deterministic given the seed.
    pub fn sample(&self, x: &InputString, seed: u64) -> Result<u64> {
        self.sample_with(x, &mut rng::seeded(seed))
    }

    /// Sampling variant for caller-managed substreams.
    pub fn sample_with(&self, x: &InputString, rng: &mut impl Rng) -> Result<u64> {
        let state = self.final_state(x)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (y, a) in state.amplitudes().iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                return Ok(y as u64);
            }
        }
        Ok(state.dim() as u64 - 1)
    }
}

/// `exp(i theta X[z])` mixes amplitude pairs (y, y^z):
/// `a_y <- cos t * a_y + i sin t * a_{y^z}`.
fn apply_x_rotation(amps: &mut [Complex64], z: u64, theta: f64) {
    let (s, c) = theta.sin_cos();
    let is = Complex64::new(0.0, s);
    if z == 0 {
        // X[0] is the identity, so the gate is a global phase.
        let phase = Complex64::new(c, s);
        for a in amps.iter_mut() {
            *a *= phase;
        }
        return;
    }
    let pivot = 1u64 << z.trailing_zeros();
    for y in 0..amps.len() as u64 {
        if y & pivot != 0 {
            continue;
        }
        let p = (y ^ z) as usize;
        let y = y as usize;
        let a = amps[y];
        let b = amps[p];
        amps[y] = c * a + is * b;
        amps[p] = c * b + is * a;
    }
}

/// An n-bit circuit input together with its nu-bit zero-padded form x̄.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputString {
    x: u64,
    n: usize,
    nu: usize,
}

impl InputString {
    pub fn new(x: u64, n: usize, nu: usize) -> Result<Self> {
        if nu < n || n < 1 {
            return Err(Error::invalid("n", "require nu >= n >= 1"));
        }
        if x >= (1u64 << n) {
            return Err(Error::BitLengthMismatch {
                expected: n,
                actual: 64 - x.leading_zeros() as usize,
            });
        }
        Ok(InputString { x, n, nu })
    }

    pub fn zero(n: usize, nu: usize) -> Result<Self> {
        Self::new(0, n, nu)
    }

    pub fn for_circuit(circuit: &IqpCircuit, x: u64) -> Result<Self> {
        Self::new(x, circuit.n(), circuit.nu())
    }

    pub fn value(&self) -> u64 {
        self.x
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The nu-bit padded string x̄; the padding bits are zero, so the
    /// integer value is unchanged.
    pub fn padded(&self) -> u64 {
        self.x
    }

    fn check_matches(&self, circuit: &IqpCircuit) -> Result<()> {
        if self.n != circuit.n || self.nu != circuit.nu {
            return Err(Error::invalid(
                "x",
                format!(
                    "input sized for (n={}, nu={}) used with circuit (n={}, nu={})",
                    self.n, self.nu, circuit.n, circuit.nu
                ),
            ));
        }
        Ok(())
    }
}

/// The shift identity P(m|x) = P(m ^ x̄ | 0): turn samples or distributions
/// for input 0 into ones for input x.
pub fn shift_by_input(
    dist0: &ClassicalDistribution,
    x: &InputString,
) -> Result<ClassicalDistribution> {
    if dist0.num_bits() != x.nu {
        return Err(Error::BitLengthMismatch {
            expected: x.nu,
            actual: dist0.num_bits(),
        });
    }
    dist0.xor_shift(x.padded())
}

/// Parse an angle literal: decimal (`"1.25"`), `"pi"`, `"pi/4"`, `"3*pi/5"`,
/// or `"2*pi"`. No domain restriction; gate construction enforces (0, 2*pi].
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    if t.is_empty() {
        return Err(Error::Malformed("empty angle".into()));
    }
    let bad = |why: &str| Error::Malformed(format!("bad angle {text:?}: {why}"));
    if let Some(idx) = t.find("pi") {
        let pre = t[..idx].trim();
        let post = t[idx + 2..].trim();
        let a = if pre.is_empty() {
            1.0
        } else {
            let stripped = pre.strip_suffix('*').ok_or_else(|| bad("expected a*pi"))?;
            stripped
                .trim()
                .parse::<f64>()
                .map_err(|_| bad("bad multiplier"))?
        };
        let b = if post.is_empty() {
            1.0
        } else {
            let stripped = post.strip_prefix('/').ok_or_else(|| bad("expected pi/b"))?;
            let d = stripped
                .trim()
                .parse::<f64>()
                .map_err(|_| bad("bad divisor"))?;
            if d == 0.0 {
                return Err(bad("division by zero"));
            }
            d
        };
        Ok(a * std::f64::consts::PI / b)
    } else {
        t.parse::<f64>().map_err(|_| bad("not a number"))
    }
}

/// Parameters for the seeded random-instance generator (the stand-in for a
/// uniform circuit family description).
#[derive(Clone, Debug)]
pub struct RandomInstanceSpec {
    pub n: usize,
    pub nu: usize,
    pub num_gates: usize,
    /// Candidate angles, drawn uniformly per gate.
    pub angles: Vec<f64>,
    /// Require the z strings to be linearly independent over GF(2)
    /// (needs `num_gates <= nu`).
    pub independent_z: bool,
}

/// Deterministically generate a random instance.
pub fn random_instance(spec: &RandomInstanceSpec, seed: u64) -> Result<IqpCircuit> {
    if spec.angles.is_empty() {
        return Err(Error::invalid("angles", "angle set must be nonempty"));
    }
    if spec.independent_z && spec.num_gates > spec.nu {
        return Err(Error::invalid(
            "num_gates",
            format!(
                "cannot pick {} independent strings of {} bits",
                spec.num_gates, spec.nu
            ),
        ));
    }
    if spec.num_gates >= (1usize << spec.nu) {
        return Err(Error::invalid(
            "num_gates",
            "more gates than distinct nonzero strings",
        ));
    }
    let mut rng = rng::seeded(seed);
    let mut zs: Vec<u64> = Vec::with_capacity(spec.num_gates);
    while zs.len() < spec.num_gates {
        let z = rng.gen_range(1..(1u64 << spec.nu));
        if zs.contains(&z) {
            continue;
        }
        if spec.independent_z {
            let mut candidate = zs.clone();
            candidate.push(z);
            if !bits::gf2_independent(&candidate) {
                continue;
            }
        }
        zs.push(z);
    }
    let gates = zs
        .into_iter()
        .map(|z| IqpGate {
            z,
            theta: spec.angles[rng.gen_range(0..spec.angles.len())],
        })
        .collect();
    IqpCircuit::new(spec.n, spec.nu, gates)
}
