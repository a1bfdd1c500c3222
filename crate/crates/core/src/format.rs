//! JSON file schemas: circuit instances, MBQC programs, MBQC sets,
//! zero-discord states, and raw state tables.
//!
//! Complex numbers are `[re, im]` pairs; a single-qubit basis is a 2x2
//! matrix in row order whose columns are the basis vectors; bit strings are
//! written most-significant-first. Named bases (`"x"`, `"computational"`,
//! `{"zx_angle": t}`, `{"xy_angle": a}`) are accepted anywhere a matrix is.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::discord::ZeroDiscordState;
use crate::dist::ClassicalDistribution;
use crate::error::{Error, Result};
use crate::iqp::{parse_angle, IqpCircuit, IqpGate};
use crate::mbqc::{
    BasisRule, GraphState, MbqcProgram, MeasurementStep, PostProcess, PreState, Schedule,
};
use crate::state::{DensityMatrix, LocalProductBasis, PureState, QubitBasis};

pub type ComplexPair = [f64; 2];
pub type MatrixSpec = [[ComplexPair; 2]; 2];

fn complex(pair: ComplexPair) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

/// Serialize with a stable layout (pretty, trailing newline).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

// ---------------------------------------------------------------------------
// Angles
// ---------------------------------------------------------------------------

/// An angle literal: a JSON number or a symbolic string like "3*pi/5".
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Number(f64),
    Symbolic(String),
}

impl AngleSpec {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            AngleSpec::Number(v) => Ok(*v),
            AngleSpec::Symbolic(s) => parse_angle(s),
        }
    }
}

// ---------------------------------------------------------------------------
// IQP* instance documents
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateSpec {
    pub z: String,
    pub theta: AngleSpec,
}

/// `{"n": .., "nu": .., "gates": [{"z": "0101", "theta": "pi/4"}, ..]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub nu: usize,
    pub gates: Vec<GateSpec>,
}

impl InstanceFile {
    pub fn into_circuit(self) -> Result<IqpCircuit> {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            gates.push(IqpGate {
                z: bits::parse_bits_exact(&g.z, self.nu)?,
                theta: g.theta.resolve()?,
            });
        }
        IqpCircuit::new(self.n, self.nu, gates)
    }

    pub fn from_circuit(circuit: &IqpCircuit) -> Self {
        InstanceFile {
            n: circuit.n(),
            nu: circuit.nu(),
            gates: circuit
                .gates()
                .iter()
                .map(|g| GateSpec {
                    z: bits::format_bits(g.z, circuit.nu()),
                    theta: AngleSpec::Number(g.theta),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        to_json_string(self).expect("instance serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Bases
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaggedBasisSpec {
    ZxAngle(AngleSpec),
    XyAngle(AngleSpec),
    Matrix(MatrixSpec),
    /// Adaptive rule: outcome prefix (earliest first) to basis.
    Table(BTreeMap<String, BasisSpec>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    Named(String),
    Tagged(TaggedBasisSpec),
}

impl BasisSpec {
    /// Resolve a non-adaptive basis.
    pub fn to_basis(&self) -> Result<QubitBasis> {
        match self {
            BasisSpec::Named(name) => match name.as_str() {
                "x" => Ok(QubitBasis::x()),
                "computational" => Ok(QubitBasis::computational()),
                other => Err(Error::invalid(
                    "basis",
                    format!("unknown basis name {other:?} (use \"x\" or \"computational\")"),
                )),
            },
            BasisSpec::Tagged(TaggedBasisSpec::ZxAngle(a)) => {
                Ok(QubitBasis::zx_angle(a.resolve()?))
            }
            BasisSpec::Tagged(TaggedBasisSpec::XyAngle(a)) => {
                Ok(QubitBasis::xy_angle(a.resolve()?))
            }
            BasisSpec::Tagged(TaggedBasisSpec::Matrix(m)) => QubitBasis::new(
                [complex(m[0][0]), complex(m[1][0])],
                [complex(m[0][1]), complex(m[1][1])],
            ),
            BasisSpec::Tagged(TaggedBasisSpec::Table(_)) => Err(Error::invalid(
                "basis",
                "adaptive table not allowed here",
            )),
        }
    }

    /// Recognize common bases for readable output; falls back to the raw
    /// matrix.
    pub fn from_basis(basis: &QubitBasis) -> Self {
        const EPS: f64 = 1e-12;
        let close = |a: &QubitBasis, b: &QubitBasis| -> bool {
            (0..2).all(|i| {
                (0..2).all(|k| (a.component(i, k) - b.component(i, k)).norm() < EPS)
            })
        };
        if close(basis, &QubitBasis::computational()) {
            return BasisSpec::Named("computational".into());
        }
        if close(basis, &QubitBasis::x()) {
            return BasisSpec::Named("x".into());
        }
        let v0 = basis.vector(0);
        if basis.matrix().iter().flatten().all(|z| z.im.abs() < EPS) {
            let theta = v0[1].re.atan2(v0[0].re);
            if close(basis, &QubitBasis::zx_angle(theta)) {
                return BasisSpec::Tagged(TaggedBasisSpec::ZxAngle(AngleSpec::Number(theta)));
            }
        }
        if (v0[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < EPS && v0[0].im.abs() < EPS {
            let alpha = v0[1].arg();
            if close(basis, &QubitBasis::xy_angle(alpha)) {
                return BasisSpec::Tagged(TaggedBasisSpec::XyAngle(AngleSpec::Number(alpha)));
            }
        }
        let m = basis.matrix();
        BasisSpec::Tagged(TaggedBasisSpec::Matrix([
            [pair(m[0][0]), pair(m[0][1])],
            [pair(m[1][0]), pair(m[1][1])],
        ]))
    }
}

fn matrix_spec(basis: &QubitBasis) -> MatrixSpec {
    let m = basis.matrix();
    [
        [pair(m[0][0]), pair(m[0][1])],
        [pair(m[1][0]), pair(m[1][1])],
    ]
}

fn basis_from_matrix_spec(m: &MatrixSpec) -> Result<QubitBasis> {
    QubitBasis::new(
        [complex(m[0][0]), complex(m[1][0])],
        [complex(m[0][1]), complex(m[1][1])],
    )
}

/// A product basis as a JSON array of 2x2 matrices (for verdict evidence
/// and zero-discord files).
pub fn product_basis_json(basis: &LocalProductBasis) -> serde_json::Value {
    serde_json::to_value(basis.iter().map(matrix_spec).collect::<Vec<_>>())
        .expect("matrix serialization cannot fail")
}

/// Inverse of [`product_basis_json`].
pub fn parse_product_basis(value: &serde_json::Value) -> Result<LocalProductBasis> {
    let specs: Vec<MatrixSpec> = serde_json::from_value(value.clone())?;
    let bases: Result<Vec<QubitBasis>> = specs.iter().map(basis_from_matrix_spec).collect();
    Ok(LocalProductBasis::new(bases?))
}

// ---------------------------------------------------------------------------
// MBQC programs and sets
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreStateSpec {
    /// Graph state from a z-set.
    Graph { nu: usize, zset: Vec<String> },
    /// The graph state dephased in its compiled measurement bases.
    Dephased {
        nu: usize,
        zset: Vec<String>,
        thetas: Vec<AngleSpec>,
    },
    /// Computational product state |bits>.
    Product(String),
    /// Path (relative to the referencing file) of a state file: amplitudes,
    /// a density matrix, or a zero-discord state.
    File(String),
}

impl PreStateSpec {
    pub fn to_pre_state(&self, base_dir: &Path) -> Result<PreState> {
        match self {
            PreStateSpec::Graph { nu, zset } => {
                let zs = parse_zset(zset, *nu)?;
                Ok(PreState::Pure(GraphState::build(&zs, *nu)?.into_state()))
            }
            PreStateSpec::Dephased { nu, zset, thetas } => {
                if thetas.len() != zset.len() {
                    return Err(Error::invalid(
                        "thetas",
                        format!("{} angles for {} z strings", thetas.len(), zset.len()),
                    ));
                }
                let zs = parse_zset(zset, *nu)?;
                let graph = GraphState::build(&zs, *nu)?;
                let mut bases: Vec<QubitBasis> = (0..*nu).map(|_| QubitBasis::x()).collect();
                for spec in thetas {
                    bases.push(QubitBasis::zx_angle(spec.resolve()?));
                }
                let basis = LocalProductBasis::new(bases);
                Ok(PreState::Dephased(crate::discord::dephase_pure(
                    graph.state(),
                    &basis,
                )?))
            }
            PreStateSpec::Product(bits_str) => {
                let (value, width) = bits::parse_bits(bits_str)?;
                Ok(PreState::Pure(PureState::computational(width, value)?))
            }
            PreStateSpec::File(rel) => {
                let path = base_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::invalid("file", format!("{}: {e}", path.display()))
                })?;
                load_state_input(&text)
            }
        }
    }
}

fn parse_zset(zset: &[String], nu: usize) -> Result<Vec<u64>> {
    zset.iter()
        .map(|z| bits::parse_bits_exact(z, nu))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepSpec {
    pub qubit: usize,
    pub basis: BasisSpec,
}

impl StepSpec {
    fn to_step(&self) -> Result<MeasurementStep> {
        let rule = match &self.basis {
            BasisSpec::Tagged(TaggedBasisSpec::Table(table)) => {
                let mut resolved = BTreeMap::new();
                for (prefix, spec) in table {
                    resolved.insert(prefix.clone(), spec.to_basis()?);
                }
                BasisRule::Adaptive(resolved)
            }
            other => BasisRule::Fixed(other.to_basis()?),
        };
        Ok(MeasurementStep {
            qubit: self.qubit,
            rule,
        })
    }

    fn from_step(step: &MeasurementStep) -> Self {
        let basis = match &step.rule {
            BasisRule::Fixed(b) => BasisSpec::from_basis(b),
            BasisRule::Adaptive(table) => BasisSpec::Tagged(TaggedBasisSpec::Table(
                table
                    .iter()
                    .map(|(prefix, b)| (prefix.clone(), BasisSpec::from_basis(b)))
                    .collect(),
            )),
        };
        StepSpec {
            qubit: step.qubit,
            basis,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostSpec {
    /// `m_j = s_j ^ parity(masks_j & b) ^ offset_j`; masks index the
    /// ancilla outcomes (qubits above the output block).
    Affine {
        masks: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<String>,
    },
    /// Total transcript-to-output table.
    Table(BTreeMap<String, String>),
}

impl PostSpec {
    fn to_post(&self) -> Result<PostProcess> {
        match self {
            PostSpec::Affine { masks, offset } => {
                let nu = masks.len();
                let mask_values: Result<Vec<u64>> =
                    masks.iter().map(|m| Ok(bits::parse_bits(m)?.0)).collect();
                let offset_value = match offset {
                    Some(o) => bits::parse_bits_exact(o, nu)?,
                    None => 0,
                };
                PostProcess::affine(mask_values?, offset_value)
            }
            PostSpec::Table(entries) => {
                let mut input_bits = None;
                let mut output_bits = None;
                let mut map = BTreeMap::new();
                for (y, m) in entries {
                    let (yv, yw) = bits::parse_bits(y)?;
                    let (mv, mw) = bits::parse_bits(m)?;
                    input_bits = Some(check_width_consistent(input_bits, yw)?);
                    output_bits = Some(check_width_consistent(output_bits, mw)?);
                    map.insert(yv, mv);
                }
                let input_bits =
                    input_bits.ok_or_else(|| Error::invalid("table", "empty table"))?;
                PostProcess::table(input_bits, output_bits.unwrap(), map)
            }
        }
    }

    fn from_post(post: &PostProcess, num_qubits: usize) -> Self {
        match post {
            PostProcess::Affine { masks, offset } => {
                let nu = masks.len();
                let ancillas = num_qubits - nu;
                PostSpec::Affine {
                    masks: masks
                        .iter()
                        .map(|m| bits::format_bits(*m, ancillas.max(1)))
                        .collect(),
                    offset: if *offset == 0 {
                        None
                    } else {
                        Some(bits::format_bits(*offset, nu))
                    },
                }
            }
            PostProcess::Table {
                input_bits,
                output_bits,
                map,
            } => PostSpec::Table(
                map.iter()
                    .map(|(&y, &m)| {
                        (
                            bits::format_bits(y, *input_bits),
                            bits::format_bits(m, *output_bits),
                        )
                    })
                    .collect(),
            ),
        }
    }
}

fn check_width_consistent(seen: Option<usize>, width: usize) -> Result<usize> {
    match seen {
        None => Ok(width),
        Some(w) if w == width => Ok(w),
        Some(w) => Err(Error::BitLengthMismatch {
            expected: w,
            actual: width,
        }),
    }
}

/// `{"pre_state": .., "schedule": [..], "post": ..}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProgramFile {
    pub pre_state: PreStateSpec,
    pub schedule: Vec<StepSpec>,
    pub post: PostSpec,
}

impl ProgramFile {
    pub fn to_program(&self, base_dir: &Path) -> Result<MbqcProgram> {
        let pre_state = self.pre_state.to_pre_state(base_dir)?;
        let steps: Result<Vec<MeasurementStep>> =
            self.schedule.iter().map(StepSpec::to_step).collect();
        let schedule = Schedule::new(steps?, pre_state.num_qubits())?;
        MbqcProgram::new(pre_state, schedule, self.post.to_post()?)
    }

    /// Program file for a compiled circuit, written with the graph-state
    /// pre-state so it stays compact and readable.
    pub fn from_compiled(circuit: &IqpCircuit, program: &MbqcProgram) -> Self {
        ProgramFile {
            pre_state: PreStateSpec::Graph {
                nu: circuit.nu(),
                zset: circuit
                    .zset()
                    .iter()
                    .map(|&z| bits::format_bits(z, circuit.nu()))
                    .collect(),
            },
            schedule: program.schedule().steps().iter().map(StepSpec::from_step).collect(),
            post: PostSpec::from_post(program.post(), program.num_qubits()),
        }
    }
}

pub fn load_program(path: &Path) -> Result<MbqcProgram> {
    let text = std::fs::read_to_string(path)?;
    let file: ProgramFile =
        serde_json::from_str(&text).map_err(|e| Error::Malformed(e.to_string()))?;
    file.to_program(path.parent().unwrap_or_else(|| Path::new(".")))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MemberSpec {
    pub schedule: Vec<StepSpec>,
    pub post: PostSpec,
}

/// `{"pre_state": .., "members": [{"schedule": .., "post": ..}, ..]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetFile {
    pub pre_state: PreStateSpec,
    pub members: Vec<MemberSpec>,
}

impl SetFile {
    pub fn to_set(&self, base_dir: &Path) -> Result<crate::criteria::MbqcSet> {
        let pre_state = self.pre_state.to_pre_state(base_dir)?;
        let r = pre_state.num_qubits();
        let mut members = Vec::with_capacity(self.members.len());
        for member in &self.members {
            let steps: Result<Vec<MeasurementStep>> =
                member.schedule.iter().map(StepSpec::to_step).collect();
            members.push(crate::criteria::MbqcMember {
                schedule: Schedule::new(steps?, r)?,
                post: member.post.to_post()?,
            });
        }
        crate::criteria::MbqcSet::new(pre_state, members)
    }
}

pub fn load_set(path: &Path) -> Result<crate::criteria::MbqcSet> {
    let text = std::fs::read_to_string(path)?;
    let file: SetFile =
        serde_json::from_str(&text).map_err(|e| Error::Malformed(e.to_string()))?;
    file.to_set(path.parent().unwrap_or_else(|| Path::new(".")))
}

// ---------------------------------------------------------------------------
// State files
// ---------------------------------------------------------------------------

/// `{"basis": [matrix, ..], "table": {"0101": p, ..}}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZdFile {
    pub basis: Vec<MatrixSpec>,
    pub table: BTreeMap<String, f64>,
}

impl ZdFile {
    pub fn to_state(&self) -> Result<ZeroDiscordState> {
        let bases: Result<Vec<QubitBasis>> =
            self.basis.iter().map(basis_from_matrix_spec).collect();
        let basis = LocalProductBasis::new(bases?);
        let r = basis.len();
        let entries: Result<Vec<(u64, f64)>> = self
            .table
            .iter()
            .map(|(k, &p)| Ok((bits::parse_bits_exact(k, r)?, p)))
            .collect();
        let table = ClassicalDistribution::from_probabilities(r, entries?)?;
        ZeroDiscordState::new(basis, table)
    }

    pub fn from_state(zd: &ZeroDiscordState) -> Self {
        ZdFile {
            basis: zd.basis().iter().map(matrix_spec).collect(),
            table: zd
                .table()
                .iter()
                .map(|(k, p)| (bits::format_bits(k, zd.num_qubits()), p))
                .collect(),
        }
    }
}

/// A state input for `discord-check` and `file` pre-states: amplitudes, a
/// dense matrix, or a zero-discord file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum StateInputFile {
    Amplitudes { amplitudes: Vec<ComplexPair> },
    Density { density: Vec<Vec<ComplexPair>> },
    Zd(ZdFile),
}

/// Parse a state input document into the matching pre-state kind.
pub fn load_state_input(text: &str) -> Result<PreState> {
    let file: StateInputFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    match file {
        StateInputFile::Amplitudes { amplitudes } => Ok(PreState::Pure(
            PureState::from_amplitudes(amplitudes.into_iter().map(complex).collect())?,
        )),
        StateInputFile::Density { density } => {
            let dim = density.len();
            if dim < 2 || !dim.is_power_of_two() {
                return Err(Error::invalid(
                    "density",
                    "dimension must be a power of two >= 2",
                ));
            }
            let mut entries = Vec::with_capacity(dim * dim);
            for row in &density {
                if row.len() != dim {
                    return Err(Error::invalid("density", "matrix must be square"));
                }
                entries.extend(row.iter().copied().map(complex));
            }
            Ok(PreState::Dense(DensityMatrix::from_entries(
                dim.trailing_zeros() as usize,
                entries,
            )?))
        }
        StateInputFile::Zd(zd) => Ok(PreState::Dephased(zd.to_state()?)),
    }
}

/// `{"m": 15, "a": 7}` for the factoring demo.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShorInput {
    pub m: u64,
    pub a: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbqc::{compile_iqp_to_mbqc, run_mbqc_exact};
    use crate::tol::TOL;
    use std::f64::consts::PI;

    #[test]
    fn basis_spec_round_trips() {
        let cases = [
            QubitBasis::computational(),
            QubitBasis::x(),
            QubitBasis::zx_angle(PI / 3.0),
            QubitBasis::zx_angle(3.0 * PI / 5.0),
            QubitBasis::xy_angle(1.1),
            QubitBasis::from_bloch_axis(0.36, 0.48, 0.8),
        ];
        for basis in cases {
            let spec = BasisSpec::from_basis(&basis);
            let text = serde_json::to_string(&spec).unwrap();
            let parsed: BasisSpec = serde_json::from_str(&text).unwrap();
            let back = parsed.to_basis().unwrap();
            assert!(basis.same_up_to_phase(&back), "{text}");
        }
    }

    #[test]
    fn named_bases_parse() {
        let spec: BasisSpec = serde_json::from_str("\"x\"").unwrap();
        assert!(spec.to_basis().unwrap().same_up_to_phase(&QubitBasis::x()));
        let spec: BasisSpec = serde_json::from_str(r#"{"zx_angle": "pi/3"}"#).unwrap();
        assert!(spec
            .to_basis()
            .unwrap()
            .same_up_to_phase(&QubitBasis::zx_angle(PI / 3.0)));
        let spec: BasisSpec = serde_json::from_str("\"hadamard\"").unwrap();
        assert!(spec.to_basis().is_err());
    }

    #[test]
    fn compiled_program_file_round_trips() {
        let circuit = IqpCircuit::new(
            2,
            2,
            vec![
                IqpGate { z: 0b01, theta: PI / 3.0 },
                IqpGate { z: 0b11, theta: PI / 8.0 },
            ],
        )
        .unwrap();
        let program = compile_iqp_to_mbqc(&circuit).unwrap();
        let file = ProgramFile::from_compiled(&circuit, &program);
        let text = to_json_string(&file).unwrap();
        let parsed: ProgramFile = serde_json::from_str(&text).unwrap();
        let back = parsed.to_program(Path::new(".")).unwrap();
        let a = run_mbqc_exact(&program).unwrap();
        let b = run_mbqc_exact(&back).unwrap();
        assert!(a.transcripts.tvd(&b.transcripts).unwrap() < TOL);
        assert!(a.outputs.tvd(&b.outputs).unwrap() < TOL);
    }

    #[test]
    fn dephased_pre_state_matches_manual_dephasing() {
        let text = r#"{
            "pre_state": {"dephased": {"nu": 1, "zset": ["1"], "thetas": ["pi/3"]}},
            "schedule": [
                {"qubit": 2, "basis": {"zx_angle": "pi/3"}},
                {"qubit": 1, "basis": "x"}
            ],
            "post": {"affine": {"masks": ["1"]}}
        }"#;
        let file: ProgramFile = serde_json::from_str(text).unwrap();
        let program = file.to_program(Path::new(".")).unwrap();
        let run = run_mbqc_exact(&program).unwrap();
        // Dephasing is idle for the compiled measurement: cos^2(pi/3) = 1/4.
        assert!((run.outputs.probability(0) - 0.25).abs() < TOL);
    }

    #[test]
    fn zd_file_round_trips() {
        let mut rng = crate::rng::seeded(2);
        let s = PureState::random(2, &mut rng).unwrap();
        let basis = LocalProductBasis::new(vec![
            QubitBasis::random(&mut rng),
            QubitBasis::random(&mut rng),
        ]);
        let zd = crate::discord::dephase_pure(&s, &basis).unwrap();
        let file = ZdFile::from_state(&zd);
        let text = to_json_string(&file).unwrap();
        let parsed: ZdFile = serde_json::from_str(&text).unwrap();
        let back = parsed.to_state().unwrap();
        assert!(back.basis().same_up_to_phase(zd.basis()));
        assert!(back.table().max_abs_diff(zd.table()) < 1e-15);
    }

    #[test]
    fn state_inputs_parse_all_three_kinds() {
        let amp = r#"{"amplitudes": [[0.7071067811865476, 0], [0, 0.7071067811865476]]}"#;
        assert!(matches!(
            load_state_input(amp).unwrap(),
            PreState::Pure(_)
        ));

        let den = r#"{"density": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}"#;
        assert!(matches!(
            load_state_input(den).unwrap(),
            PreState::Dense(_)
        ));

        let zd = r#"{
            "basis": [[[[1.0, 0], [0, 0]], [[0, 0], [1.0, 0]]]],
            "table": {"0": 0.5, "1": 0.5}
        }"#;
        assert!(matches!(
            load_state_input(zd).unwrap(),
            PreState::Dephased(_)
        ));

        assert!(load_state_input(r#"{"weird": 1}"#).is_err());
    }

    #[test]
    fn product_basis_evidence_round_trips() {
        let basis = LocalProductBasis::new(vec![
            QubitBasis::zx_angle(0.3),
            QubitBasis::xy_angle(2.0),
        ]);
        let value = product_basis_json(&basis);
        let back = parse_product_basis(&value).unwrap();
        assert!(basis.same_up_to_phase(&back));
    }
}
