//! Graph states, compilation of IQP* circuits into MBQC programs, and exact
//! or sampled execution of MBQC programs, including adaptive schedules.
//!
//! A program is a pre-measurement state, a schedule measuring every qubit
//! exactly once, and a classical post-processing map from the full outcome
//! transcript to the declared output string. Adaptive steps pick their basis
//! from the outcomes of strictly earlier steps.

use std::collections::BTreeMap;

use rand::Rng;

use crate::bits;
use crate::discord::ZeroDiscordState;
use crate::dist::ClassicalDistribution;
use crate::error::{Error, Result};
use crate::iqp::{InputString, IqpCircuit};
use crate::rng;
use crate::state::{
    DensityMatrix, LocalProductBasis, PureState, QubitBasis, PURE_QUBIT_CAP,
};

/// Branches thinner than this are numerically zero and are pruned during
/// exact enumeration.
const PRUNE: f64 = 1e-18;

/// Compiled-program oracle validation is only attempted up to this size.
const VALIDATION_QUBIT_CAP: usize = 16;

/// A graph state |G> = prod CZ |+>^r with the IQP* layout: computational
/// qubits c_1..c_nu at positions 1..=nu, one ancilla per z string at
/// positions nu+1..=r (in z-set order), and an edge from the ancilla for z
/// to exactly the c_j with z_j = 1.
#[derive(Clone, Debug)]
pub struct GraphState {
    nu: usize,
    zset: Vec<u64>,
    state: PureState,
}

impl GraphState {
    pub fn build(zset: &[u64], nu: usize) -> Result<Self> {
        let r = nu + zset.len();
        if r > PURE_QUBIT_CAP {
            return Err(Error::QubitCapExceeded {
                requested: r,
                cap: PURE_QUBIT_CAP,
            });
        }
        for &z in zset {
            if z >= (1u64 << nu) {
                return Err(Error::BitLengthMismatch {
                    expected: nu,
                    actual: 64 - z.leading_zeros() as usize,
                });
            }
        }
        let mut state = PureState::plus_state(r)?;
        for (k, &z) in zset.iter().enumerate() {
            let ancilla = nu + k + 1;
            for j in 1..=nu {
                if (z >> (j - 1)) & 1 == 1 {
                    state = state.apply_cz(ancilla, j)?;
                }
            }
        }
        Ok(GraphState {
            nu,
            zset: zset.to_vec(),
            state,
        })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn zset(&self) -> &[u64] {
        &self.zset
    }

    pub fn num_qubits(&self) -> usize {
        self.nu + self.zset.len()
    }

    pub fn edge_count(&self) -> usize {
        self.zset.iter().map(|z| z.count_ones() as usize).sum()
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn into_state(self) -> PureState {
        self.state
    }
}

/// How a step picks its measurement basis.
#[derive(Clone, Debug)]
pub enum BasisRule {
    Fixed(QubitBasis),
    /// Basis chosen by the outcomes of all earlier steps, earliest first;
    /// the table must map every prefix that can occur.
    Adaptive(BTreeMap<String, QubitBasis>),
}

impl BasisRule {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, BasisRule::Adaptive(_))
    }

    /// Basis for a step given the outcomes of all earlier steps, earliest
    /// first.
    pub fn resolve(&self, prefix: &str) -> Result<&QubitBasis> {
        match self {
            BasisRule::Fixed(b) => Ok(b),
            BasisRule::Adaptive(table) => table.get(prefix).ok_or_else(|| {
                Error::invalid(
                    "schedule",
                    format!("adaptive rule has no entry for outcome prefix {prefix:?}"),
                )
            }),
        }
    }
}

/// One measurement in a schedule.
#[derive(Clone, Debug)]
pub struct MeasurementStep {
    pub qubit: usize,
    pub rule: BasisRule,
}

impl MeasurementStep {
    pub fn fixed(qubit: usize, basis: QubitBasis) -> Self {
        MeasurementStep {
            qubit,
            rule: BasisRule::Fixed(basis),
        }
    }
}

/// An ordered list of steps covering each qubit exactly once.
#[derive(Clone, Debug)]
pub struct Schedule {
    steps: Vec<MeasurementStep>,
}

impl Schedule {
    pub fn new(steps: Vec<MeasurementStep>, num_qubits: usize) -> Result<Self> {
        if steps.len() != num_qubits {
            return Err(Error::invalid(
                "schedule",
                format!(
                    "{} steps for a {num_qubits}-qubit state",
                    steps.len()
                ),
            ));
        }
        let mut seen = vec![false; num_qubits];
        for (idx, step) in steps.iter().enumerate() {
            if step.qubit < 1 || step.qubit > num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: step.qubit,
                    num_qubits,
                });
            }
            if seen[step.qubit - 1] {
                return Err(Error::invalid(
                    "schedule",
                    format!("qubit {} measured twice", step.qubit),
                ));
            }
            seen[step.qubit - 1] = true;
            if let BasisRule::Adaptive(table) = &step.rule {
                for key in table.keys() {
                    if key.len() != idx || key.chars().any(|c| c != '0' && c != '1') {
                        return Err(Error::invalid(
                            "schedule",
                            format!(
                                "step {idx} expects {idx}-bit outcome prefixes, got key {key:?}"
                            ),
                        ));
                    }
                }
            }
        }
        Ok(Schedule { steps })
    }

    /// Measure every qubit in the given product basis, in qubit order.
    pub fn from_product_basis(basis: &LocalProductBasis) -> Self {
        Schedule {
            steps: (1..=basis.len())
                .map(|j| MeasurementStep::fixed(j, basis.qubit(j).clone()))
                .collect(),
        }
    }

    pub fn steps(&self) -> &[MeasurementStep] {
        &self.steps
    }

    pub fn num_qubits(&self) -> usize {
        self.steps.len()
    }

    /// Derived adaptivity flag: true iff any step is outcome-dependent.
    pub fn is_adaptive(&self) -> bool {
        self.steps.iter().any(|s| s.rule.is_adaptive())
    }

    /// For non-adaptive schedules, the per-qubit bases in qubit order.
    pub fn fixed_basis_by_qubit(&self) -> Option<LocalProductBasis> {
        let mut bases: Vec<Option<QubitBasis>> = vec![None; self.steps.len()];
        for step in &self.steps {
            match &step.rule {
                BasisRule::Fixed(b) => bases[step.qubit - 1] = Some(b.clone()),
                BasisRule::Adaptive(_) => return None,
            }
        }
        Some(LocalProductBasis::new(
            bases.into_iter().map(|b| b.expect("coverage checked")).collect(),
        ))
    }
}

/// Classical post-processing from the r-bit transcript to the nu-bit output.
#[derive(Clone, Debug)]
pub enum PostProcess {
    /// `m_j = s_j ^ parity(masks_j & b) ^ offset_j`, where `s` is the
    /// outcomes of qubits 1..=nu and `b` the outcomes of the rest. The
    /// offset absorbs the input shift (output ^ x̄ families).
    Affine { masks: Vec<u64>, offset: u64 },
    /// Total lookup table from transcripts to outputs; only for r <= 16.
    Table {
        input_bits: usize,
        output_bits: usize,
        map: BTreeMap<u64, u64>,
    },
}

impl PostProcess {
    pub fn affine(masks: Vec<u64>, offset: u64) -> Result<Self> {
        let nu = masks.len();
        if nu == 0 || nu > 63 {
            return Err(Error::invalid("masks", "need 1..=63 output bits"));
        }
        if offset >= (1u64 << nu) {
            return Err(Error::BitLengthMismatch {
                expected: nu,
                actual: 64 - offset.leading_zeros() as usize,
            });
        }
        Ok(PostProcess::Affine { masks, offset })
    }

    /// m = s: zero masks and offset.
    pub fn identity(nu: usize) -> Self {
        PostProcess::Affine {
            masks: vec![0; nu],
            offset: 0,
        }
    }

    pub fn table(input_bits: usize, output_bits: usize, map: BTreeMap<u64, u64>) -> Result<Self> {
        if input_bits > 16 {
            return Err(Error::invalid(
                "table",
                "lookup post-processing is limited to 16 transcript bits",
            ));
        }
        if map.len() != 1usize << input_bits {
            return Err(Error::invalid(
                "table",
                format!(
                    "table must be total: expected {} entries, got {}",
                    1usize << input_bits,
                    map.len()
                ),
            ));
        }
        for (&y, &m) in &map {
            if y >= (1u64 << input_bits) || m >= (1u64 << output_bits) {
                return Err(Error::invalid("table", "entry out of range"));
            }
        }
        Ok(PostProcess::Table {
            input_bits,
            output_bits,
            map,
        })
    }

    pub fn output_bits(&self) -> usize {
        match self {
            PostProcess::Affine { masks, .. } => masks.len(),
            PostProcess::Table { output_bits, .. } => *output_bits,
        }
    }

    /// Validate against the transcript width of a program.
    pub(crate) fn check_width(&self, num_qubits: usize) -> Result<()> {
        match self {
            PostProcess::Affine { masks, .. } => {
                let nu = masks.len();
                if nu > num_qubits {
                    return Err(Error::invalid(
                        "post",
                        format!("{nu} output bits but only {num_qubits} qubits"),
                    ));
                }
                let ancillas = num_qubits - nu;
                for mask in masks {
                    if ancillas < 64 && *mask >= (1u64 << ancillas) {
                        return Err(Error::invalid(
                            "post",
                            format!("mask {mask:#b} addresses more than {ancillas} ancilla bits"),
                        ));
                    }
                }
                Ok(())
            }
            PostProcess::Table { input_bits, .. } => {
                if *input_bits != num_qubits {
                    return Err(Error::BitLengthMismatch {
                        expected: num_qubits,
                        actual: *input_bits,
                    });
                }
                Ok(())
            }
        }
    }

    /// Map a transcript to an output string.
    pub fn apply(&self, transcript: u64) -> Result<u64> {
        match self {
            PostProcess::Affine { masks, offset } => {
                let nu = masks.len();
                let s = transcript & ((1u64 << nu) - 1);
                let b = transcript >> nu;
                let mut m = 0u64;
                for (j, mask) in masks.iter().enumerate() {
                    let bit = ((s >> j) & 1) ^ bits::parity(mask & b) ^ ((offset >> j) & 1);
                    m |= bit << j;
                }
                Ok(m)
            }
            PostProcess::Table { map, .. } => map.get(&transcript).copied().ok_or_else(|| {
                Error::invalid("table", format!("transcript {transcript} not mapped"))
            }),
        }
    }
}

/// The state all measurements are performed on.
#[derive(Clone, Debug)]
pub enum PreState {
    Pure(PureState),
    Dense(DensityMatrix),
    Dephased(ZeroDiscordState),
}

impl PreState {
    pub fn num_qubits(&self) -> usize {
        match self {
            PreState::Pure(s) => s.num_qubits(),
            PreState::Dense(d) => d.num_qubits(),
            PreState::Dephased(z) => z.num_qubits(),
        }
    }

    /// Exact joint distribution of measuring every qubit in `basis`.
    ///
    /// For a dephased state measured in its own basis this is the stored
    /// table; otherwise the state is densified so the answer comes from the
    /// density-matrix route.
    pub fn distribution(&self, basis: &LocalProductBasis) -> Result<ClassicalDistribution> {
        match self {
            PreState::Pure(s) => s.exact_distribution(basis),
            PreState::Dense(d) => d.exact_distribution(basis),
            PreState::Dephased(z) => {
                if z.basis().same_up_to_phase(basis) {
                    Ok(z.table().clone())
                } else {
                    z.densify()?.exact_distribution(basis)
                }
            }
        }
    }
}

/// A complete MBQC program.
#[derive(Clone, Debug)]
pub struct MbqcProgram {
    pre_state: PreState,
    schedule: Schedule,
    post: PostProcess,
}

impl MbqcProgram {
    pub fn new(pre_state: PreState, schedule: Schedule, post: PostProcess) -> Result<Self> {
        let r = pre_state.num_qubits();
        if schedule.num_qubits() != r {
            return Err(Error::invalid(
                "schedule",
                format!(
                    "schedule covers {} qubits, state has {r}",
                    schedule.num_qubits()
                ),
            ));
        }
        post.check_width(r)?;
        Ok(MbqcProgram {
            pre_state,
            schedule,
            post,
        })
    }

    pub fn pre_state(&self) -> &PreState {
        &self.pre_state
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn post(&self) -> &PostProcess {
        &self.post
    }

    pub fn num_qubits(&self) -> usize {
        self.pre_state.num_qubits()
    }

    /// Declared output length.
    pub fn nu(&self) -> usize {
        self.post.output_bits()
    }

    pub fn with_post(&self, post: PostProcess) -> Result<Self> {
        MbqcProgram::new(self.pre_state.clone(), self.schedule.clone(), post)
    }
}

/// One sampled run: the full transcript y and the output m = post(y).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MbqcOutcome {
    pub transcript: u64,
    pub output: u64,
    pub num_qubits: usize,
    pub output_bits: usize,
}

/// Exact execution result: the transcript distribution and its pushforward
/// through the post-processing.
#[derive(Clone, Debug)]
pub struct MbqcRun {
    pub transcripts: ClassicalDistribution,
    pub outputs: ClassicalDistribution,
}

/// Compile an IQP* circuit (input 0) to its graph-state MBQC program: each
/// ancilla measured in the Z–X basis of its angle, the computational qubits
/// in X, and the affine correction `m_j = s_j ^ xor of b_z over z with
/// z_j = 1`.
pub fn compile_iqp_to_mbqc(circuit: &IqpCircuit) -> Result<MbqcProgram> {
    let nu = circuit.nu();
    let zset = circuit.zset();
    let graph = GraphState::build(&zset, nu)?;

    let mut steps = Vec::with_capacity(graph.num_qubits());
    for (k, gate) in circuit.gates().iter().enumerate() {
        steps.push(MeasurementStep::fixed(
            nu + k + 1,
            QubitBasis::zx_angle(gate.theta),
        ));
    }
    for j in 1..=nu {
        steps.push(MeasurementStep::fixed(j, QubitBasis::x()));
    }
    let schedule = Schedule::new(steps, graph.num_qubits())?;

    let masks: Vec<u64> = (1..=nu)
        .map(|j| {
            zset.iter()
                .enumerate()
                .filter(|(_, z)| (*z >> (j - 1)) & 1 == 1)
                .fold(0u64, |acc, (k, _)| acc | (1u64 << k))
        })
        .collect();
    let post = PostProcess::affine(masks, 0)?;

    MbqcProgram::new(PreState::Pure(graph.into_state()), schedule, post)
}

/// The product basis a compiled program measures in (ancillas in their
/// angle bases, computational qubits in X); also the dephasing basis of the
/// zero-discord construction.
pub fn compiled_measurement_basis(circuit: &IqpCircuit) -> LocalProductBasis {
    let mut bases: Vec<QubitBasis> = (0..circuit.nu()).map(|_| QubitBasis::x()).collect();
    bases.extend(
        circuit
            .gates()
            .iter()
            .map(|g| QubitBasis::zx_angle(g.theta)),
    );
    LocalProductBasis::new(bases)
}

/// Exact execution. Non-adaptive schedules use the closed-form product
/// measurement; adaptive ones enumerate the transcript tree.
pub fn run_mbqc_exact(program: &MbqcProgram) -> Result<MbqcRun> {
    let transcripts = match program.schedule.fixed_basis_by_qubit() {
        Some(basis) => program.pre_state.distribution(&basis)?,
        None => enumerate_transcripts(program)?,
    };
    finish_run(program, transcripts)
}

/// Reference path: always enumerate the transcript tree branch by branch,
/// regardless of adaptivity. Slower but independent of the closed-form
/// route, which makes it useful as a cross-check.
pub fn run_mbqc_exact_enumerated(program: &MbqcProgram) -> Result<MbqcRun> {
    let transcripts = enumerate_transcripts(program)?;
    finish_run(program, transcripts)
}

fn finish_run(program: &MbqcProgram, transcripts: ClassicalDistribution) -> Result<MbqcRun> {
    let outputs = transcripts.pushforward(program.nu(), |y| program.post.apply(y))?;
    Ok(MbqcRun {
        transcripts,
        outputs,
    })
}

fn enumerate_transcripts(program: &MbqcProgram) -> Result<ClassicalDistribution> {
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    match &program.pre_state {
        PreState::Pure(state) => {
            dfs_pure(state, program.schedule.steps(), 0, &mut String::new(), 0, 1.0, &mut acc)?;
        }
        PreState::Dense(dm) => {
            dfs_dense(dm, program.schedule.steps(), 0, &mut String::new(), 0, 1.0, &mut acc)?;
        }
        PreState::Dephased(zd) => {
            let dm = zd.densify()?;
            dfs_dense(&dm, program.schedule.steps(), 0, &mut String::new(), 0, 1.0, &mut acc)?;
        }
    }
    ClassicalDistribution::from_probabilities(program.num_qubits(), acc)
}

fn dfs_pure(
    state: &PureState,
    steps: &[MeasurementStep],
    idx: usize,
    prefix: &mut String,
    transcript: u64,
    prob: f64,
    acc: &mut BTreeMap<u64, f64>,
) -> Result<()> {
    if idx == steps.len() {
        *acc.entry(transcript).or_insert(0.0) += prob;
        return Ok(());
    }
    let step = &steps[idx];
    let basis = step.rule.resolve(prefix)?.clone();
    let branches = state.project_qubit(step.qubit, &basis)?;
    for (outcome, (p, branch)) in branches.into_iter().enumerate() {
        let weight = prob * p;
        if weight <= PRUNE {
            continue;
        }
        let branch = branch.expect("nonzero branch has a state");
        prefix.push(if outcome == 0 { '0' } else { '1' });
        let t = transcript | ((outcome as u64) << (step.qubit - 1));
        dfs_pure(&branch, steps, idx + 1, prefix, t, weight, acc)?;
        prefix.pop();
    }
    Ok(())
}

fn dfs_dense(
    dm: &DensityMatrix,
    steps: &[MeasurementStep],
    idx: usize,
    prefix: &mut String,
    transcript: u64,
    prob: f64,
    acc: &mut BTreeMap<u64, f64>,
) -> Result<()> {
    if idx == steps.len() {
        *acc.entry(transcript).or_insert(0.0) += prob;
        return Ok(());
    }
    let step = &steps[idx];
    let basis = step.rule.resolve(prefix)?.clone();
    let branches = dm.project_qubit(step.qubit, &basis)?;
    for (outcome, (p, branch)) in branches.into_iter().enumerate() {
        let weight = prob * p;
        if weight <= PRUNE {
            continue;
        }
        let branch = branch.expect("nonzero branch has a state");
        prefix.push(if outcome == 0 { '0' } else { '1' });
        let t = transcript | ((outcome as u64) << (step.qubit - 1));
        dfs_dense(&branch, steps, idx + 1, prefix, t, weight, acc)?;
        prefix.pop();
    }
    Ok(())
}

/// Sample one run with the seeded stream.
pub fn run_mbqc_sample(program: &MbqcProgram, seed: u64) -> Result<MbqcOutcome> {
    run_mbqc_sample_with(program, &mut rng::seeded(seed))
}

/// Sample one run, measuring sequentially in schedule order.
pub fn run_mbqc_sample_with(program: &MbqcProgram, rng: &mut impl Rng) -> Result<MbqcOutcome> {
    let r = program.num_qubits();
    let transcript = match &program.pre_state {
        PreState::Pure(state) => sample_pure(state, &program.schedule, rng)?,
        PreState::Dense(dm) => sample_dense(dm, &program.schedule, rng)?,
        PreState::Dephased(zd) => {
            // Measuring a diagonal state in its own basis just reveals the
            // stored string; other bases go through the dense route.
            if let Some(basis) = program.schedule.fixed_basis_by_qubit() {
                if zd.basis().same_up_to_phase(&basis) {
                    zd.table().sample(rng)
                } else {
                    sample_dense(&zd.densify()?, &program.schedule, rng)?
                }
            } else {
                sample_dense(&zd.densify()?, &program.schedule, rng)?
            }
        }
    };
    let output = program.post.apply(transcript)?;
    Ok(MbqcOutcome {
        transcript,
        output,
        num_qubits: r,
        output_bits: program.nu(),
    })
}

fn sample_pure(state: &PureState, schedule: &Schedule, rng: &mut impl Rng) -> Result<u64> {
    let mut current = state.clone();
    let mut prefix = String::new();
    let mut transcript = 0u64;
    for step in schedule.steps() {
        let basis = step.rule.resolve(&prefix)?.clone();
        let m = current.measure_qubit(step.qubit, &basis, rng.gen())?;
        transcript |= (m.outcome as u64) << (step.qubit - 1);
        prefix.push(if m.outcome == 0 { '0' } else { '1' });
        current = m.state;
    }
    Ok(transcript)
}

fn sample_dense(dm: &DensityMatrix, schedule: &Schedule, rng: &mut impl Rng) -> Result<u64> {
    let mut current = dm.clone();
    let mut prefix = String::new();
    let mut transcript = 0u64;
    for step in schedule.steps() {
        let basis = step.rule.resolve(&prefix)?.clone();
        let branches = current.project_qubit(step.qubit, &basis)?;
        let draw: f64 = rng.gen();
        let outcome = usize::from(draw >= branches[0].0);
        let (_, branch) = &branches[outcome];
        current = branch
            .clone()
            .ok_or_else(|| Error::invalid("sample", "selected a zero-probability branch"))?;
        transcript |= (outcome as u64) << (step.qubit - 1);
        prefix.push(if outcome == 0 { '0' } else { '1' });
    }
    Ok(transcript)
}

/// Result of checking a compiled program against the circuit oracle.
#[derive(Clone, Debug)]
pub struct CompiledValidation {
    pub z_independent: bool,
    /// tvd between the compiled program's output distribution and the
    /// circuit's distribution on input 0; `None` when validation was skipped
    /// because the program is too large to run exactly here.
    pub oracle_tvd: Option<f64>,
    pub equivalent: Option<bool>,
}

/// Compile and compare against `simulate` on input 0. The correction rule is
/// only guaranteed for z-sets that are linearly independent over GF(2); this
/// records the observed status either way.
pub fn validate_compiled(circuit: &IqpCircuit) -> Result<CompiledValidation> {
    let z_independent = circuit.z_independent();
    let r = circuit.nu() + circuit.gates().len();
    if r > VALIDATION_QUBIT_CAP {
        return Ok(CompiledValidation {
            z_independent,
            oracle_tvd: None,
            equivalent: None,
        });
    }
    let program = compile_iqp_to_mbqc(circuit)?;
    let run = run_mbqc_exact(&program)?;
    let zero = InputString::zero(circuit.n(), circuit.nu())?;
    let oracle = circuit.simulate(&zero)?;
    let tvd = run.outputs.tvd(&oracle)?;
    Ok(CompiledValidation {
        z_independent,
        oracle_tvd: Some(tvd),
        equivalent: Some(tvd < crate::tol::TOL),
    })
}
