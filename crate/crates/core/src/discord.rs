//! Dephasing channels, zero-discord (classical–classical) states, discord
//! detection, and the per-bit classical replacement of measurements on
//! discord-free states.
//!
//! A zero-discord state is stored as a local product basis plus a classical
//! probability table — never as a dense matrix. That representation is
//! exact: the state is a mixture of locally orthogonal product states, so a
//! stored sample plus per-bit stochastic post-processing reproduces every
//! measurement statistic. `densify` exists only for small-r verification.

use num_complex::Complex64;
use rand::Rng;

use crate::bits;
use crate::dist::ClassicalDistribution;
use crate::error::{Error, Result};
use crate::iqp::{InputString, IqpCircuit};
use crate::mbqc::{MbqcOutcome, MbqcRun, PostProcess, Schedule};
use crate::rng;
use crate::state::{DensityMatrix, LocalProductBasis, PureState, QubitBasis};

/// A state diagonal in a known local product basis: the basis plus the
/// classical distribution over its r-bit labels.
#[derive(Clone, Debug)]
pub struct ZeroDiscordState {
    basis: LocalProductBasis,
    table: ClassicalDistribution,
}

impl ZeroDiscordState {
    pub fn new(basis: LocalProductBasis, table: ClassicalDistribution) -> Result<Self> {
        if basis.len() != table.num_bits() {
            return Err(Error::BitLengthMismatch {
                expected: basis.len(),
                actual: table.num_bits(),
            });
        }
        Ok(ZeroDiscordState { basis, table })
    }

    pub fn num_qubits(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &LocalProductBasis {
        &self.basis
    }

    pub fn table(&self) -> &ClassicalDistribution {
        &self.table
    }

    /// Dense form sum_y P(y) |y_B><y_B|; requires r <= 11.
    pub fn densify(&self) -> Result<DensityMatrix> {
        let r = self.num_qubits();
        if r > crate::state::DENSE_QUBIT_CAP {
            return Err(Error::QubitCapExceeded {
                requested: r,
                cap: crate::state::DENSE_QUBIT_CAP,
            });
        }
        let dim = 1usize << r;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (y, p) in self.table.iter() {
            entries[(y as usize) * dim + y as usize] = Complex64::new(p, 0.0);
        }
        DensityMatrix::from_raw(r, entries).rotate_from_basis(&self.basis)
    }
}

/// Dephase a pure state in a product basis: keep only the Born diagonal.
pub fn dephase_pure(state: &PureState, basis: &LocalProductBasis) -> Result<ZeroDiscordState> {
    ZeroDiscordState::new(basis.clone(), state.exact_distribution(basis)?)
}

/// Dephase a dense state in a product basis.
pub fn dephase_dense(dm: &DensityMatrix, basis: &LocalProductBasis) -> Result<ZeroDiscordState> {
    ZeroDiscordState::new(basis.clone(), dm.exact_distribution(basis)?)
}

/// Dephase the final circuit state in the computational basis: the
/// zero-discord state whose table is exactly P(.|x).
pub fn dephase_circuit_final(circuit: &IqpCircuit, x: &InputString) -> Result<ZeroDiscordState> {
    ZeroDiscordState::new(
        LocalProductBasis::computational(circuit.nu()),
        circuit.simulate(x)?,
    )
}

/// Outcome of the zero-discord decision.
#[derive(Clone, Debug)]
pub enum DiscordVerdict {
    /// Diagonal in this product basis (within tolerance).
    ZeroDiscord(LocalProductBasis),
    /// Certified non-classical: the unique candidate basis leaves this much
    /// off-diagonal mass.
    Discordant { max_off_diagonal: f64 },
    Inconclusive(String),
}

impl DiscordVerdict {
    pub fn is_zero_discord(&self) -> bool {
        matches!(self, DiscordVerdict::ZeroDiscord(_))
    }
}

/// Decide whether `dm` is diagonal in some local product basis.
///
/// For each qubit, every 2x2 block of the matrix (indexed by the other
/// qubits) must be diagonalized by that qubit's basis, so the Hermitian
/// parts of all blocks must share a Bloch axis. The axis of the
/// largest-magnitude block is the only candidate; qubits whose blocks are
/// all scalar are unconstrained and default to the computational basis. The
/// verdict is certified by rotating into the candidate basis and measuring
/// the remaining off-diagonal mass.
pub fn is_zero_discord(dm: &DensityMatrix, tolerance: f64) -> Result<DiscordVerdict> {
    let r = dm.num_qubits();
    let dim = dm.dim();
    let mut bases = Vec::with_capacity(r);
    for bit in 0..r {
        let step = 1usize << bit;
        let mut best_norm2 = 0.0f64;
        let mut best = [0.0f64; 3];
        for a in 0..dim {
            if a & step != 0 {
                continue;
            }
            for b in 0..dim {
                if b & step != 0 {
                    continue;
                }
                let n00 = dm.entry(a, b);
                let n01 = dm.entry(a, b | step);
                let n10 = dm.entry(a | step, b);
                let n11 = dm.entry(a | step, b | step);
                // Hermitian part (N + N^†)/2.
                let h01 = (n01 + n10.conj()) * 0.5;
                let v1 = [h01.re, -h01.im, (n00.re - n11.re) * 0.5];
                // Skew part (N - N^†)/(2i), also Hermitian.
                let g01 = (n01 - n10.conj()) * Complex64::new(0.0, -0.5);
                let v2 = [g01.re, -g01.im, (n00.im - n11.im) * 0.5];
                for v in [v1, v2] {
                    let norm2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                    if norm2 > best_norm2 {
                        best_norm2 = norm2;
                        best = v;
                    }
                }
            }
        }
        if best_norm2.sqrt() <= tolerance {
            // Every block is scalar on this qubit: it is maximally mixed and
            // uncorrelated, so any basis serves.
            bases.push(QubitBasis::computational());
        } else {
            let n = best_norm2.sqrt();
            bases.push(QubitBasis::from_bloch_axis(
                best[0] / n,
                best[1] / n,
                best[2] / n,
            ));
        }
    }
    let basis = LocalProductBasis::new(bases);
    let off = dm.rotate_to_basis(&basis)?.max_off_diagonal();
    if off < tolerance {
        Ok(DiscordVerdict::ZeroDiscord(basis))
    } else {
        Ok(DiscordVerdict::Discordant {
            max_off_diagonal: off,
        })
    }
}

/// The stochastic map a stored bit induces on a requested measurement:
/// `rows[stored_bit][out] = |<target_out | stored_bit vector>|^2`.
#[derive(Clone, Debug)]
pub struct PerBitMap {
    pub qubit: usize,
    pub stored: QubitBasis,
    pub target: QubitBasis,
    pub rows: [[f64; 2]; 2],
}

impl PerBitMap {
    pub fn new(qubit: usize, stored: QubitBasis, target: QubitBasis) -> Self {
        let rows = perbit_map(&stored, &target);
        PerBitMap {
            qubit,
            stored,
            target,
            rows,
        }
    }
}

/// Row-stochastic 2x2 matrix p(out | stored bit).
pub fn perbit_map(stored: &QubitBasis, target: &QubitBasis) -> [[f64; 2]; 2] {
    let mut rows = [[0.0; 2]; 2];
    for stored_bit in 0..2u8 {
        rows[stored_bit as usize] = perbit_row(stored, stored_bit, target);
    }
    rows
}

/// One row of the per-bit map: the Born distribution of measuring the
/// stored basis vector in the target basis.
pub fn perbit_row(stored: &QubitBasis, stored_bit: u8, target: &QubitBasis) -> [f64; 2] {
    let v = stored.vector(stored_bit);
    let mut row = [0.0; 2];
    for out in 0..2u8 {
        let t = target.vector(out);
        let inner = t[0].conj() * v[0] + t[1].conj() * v[1];
        row[out as usize] = inner.norm_sqr();
    }
    row
}

fn check_replacement_shapes(
    zd: &ZeroDiscordState,
    schedule: &Schedule,
    post: &PostProcess,
) -> Result<()> {
    if schedule.num_qubits() != zd.num_qubits() {
        return Err(Error::invalid(
            "schedule",
            format!(
                "schedule covers {} qubits, state has {}",
                schedule.num_qubits(),
                zd.num_qubits()
            ),
        ));
    }
    post.check_width(zd.num_qubits())
}

/// Exact output of the classical replacement: draw m from the table, then
/// produce every scheduled outcome from the per-bit map of the stored bit,
/// summed over all branches.
pub fn classical_replacement_exact(
    zd: &ZeroDiscordState,
    schedule: &Schedule,
    post: &PostProcess,
) -> Result<MbqcRun> {
    check_replacement_shapes(zd, schedule, post)?;
    let r = zd.num_qubits();
    let mut acc: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
    for (m, pm) in zd.table().iter() {
        replacement_dfs(zd, schedule, m, 0, &mut String::new(), 0, pm, &mut acc)?;
    }
    let transcripts = ClassicalDistribution::from_probabilities(r, acc)?;
    let outputs = transcripts.pushforward(post.output_bits(), |y| post.apply(y))?;
    Ok(MbqcRun {
        transcripts,
        outputs,
    })
}

#[allow(clippy::too_many_arguments)]
fn replacement_dfs(
    zd: &ZeroDiscordState,
    schedule: &Schedule,
    m: u64,
    idx: usize,
    prefix: &mut String,
    transcript: u64,
    prob: f64,
    acc: &mut std::collections::BTreeMap<u64, f64>,
) -> Result<()> {
    let steps = schedule.steps();
    if idx == steps.len() {
        *acc.entry(transcript).or_insert(0.0) += prob;
        return Ok(());
    }
    let step = &steps[idx];
    let target = step.rule.resolve(prefix)?.clone();
    let stored_bit = bits::qubit_bit(m, step.qubit);
    let row = perbit_row(zd.basis().qubit(step.qubit), stored_bit, &target);
    for (outcome, p) in row.into_iter().enumerate() {
        let weight = prob * p;
        if weight <= 1e-18 {
            continue;
        }
        prefix.push(if outcome == 0 { '0' } else { '1' });
        let t = transcript | ((outcome as u64) << (step.qubit - 1));
        replacement_dfs(zd, schedule, m, idx + 1, prefix, t, weight, acc)?;
        prefix.pop();
    }
    Ok(())
}

/// One seeded replacement run. Each run consumes one fresh draw from the
/// table — a zero-discord state yields a single sample, never a sampling
/// oracle — then generates every scheduled outcome bit-locally. Adaptive
/// schedules are fine: a step's basis may depend on the outcome bits
/// already generated, and the per-bit rows are computed per step.
pub fn classical_replacement_run(
    zd: &ZeroDiscordState,
    schedule: &Schedule,
    post: &PostProcess,
    seed: u64,
) -> Result<MbqcOutcome> {
    classical_replacement_run_with(zd, schedule, post, &mut rng::seeded(seed))
}

/// Replacement run on a caller-managed stream.
pub fn classical_replacement_run_with(
    zd: &ZeroDiscordState,
    schedule: &Schedule,
    post: &PostProcess,
    rng: &mut impl Rng,
) -> Result<MbqcOutcome> {
    check_replacement_shapes(zd, schedule, post)?;
    let r = zd.num_qubits();
    let m = zd.table().sample(rng);
    let mut prefix = String::new();
    let mut transcript = 0u64;
    for step in schedule.steps() {
        let target = step.rule.resolve(&prefix)?.clone();
        let stored_bit = bits::qubit_bit(m, step.qubit);
        let row = perbit_row(zd.basis().qubit(step.qubit), stored_bit, &target);
        let draw: f64 = rng.gen();
        let outcome = u8::from(draw >= row[0]);
        transcript |= (outcome as u64) << (step.qubit - 1);
        prefix.push(if outcome == 0 { '0' } else { '1' });
    }
    let output = post.apply(transcript)?;
    Ok(MbqcOutcome {
        transcript,
        output,
        num_qubits: r,
        output_bits: post.output_bits(),
    })
}
