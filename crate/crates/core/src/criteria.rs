//! Deciding whether a set of MBQCs is only superficially measurement-based.
//!
//! A set shares one pre-measurement state and contains one or more
//! computations (schedule + post-processing). Three increasingly permissive
//! checkers decide superficiality:
//!
//! 1. every member's measurement record is the same deterministic string;
//! 2. one fixed local basis serves every member, so the state can be
//!    measured ahead of time without knowing which computation will run;
//! 3. the state is zero-discord, so a stored sample plus independent
//!    per-bit randomization replaces the measurements.
//!
//! A firing verdict carries machine-checkable evidence, and its meaning is
//! deliberately one-sided: a set shown superficial cannot ground any claim
//! that its pre-measurement state is a resource for MBQC, while
//! `NOT_SHOWN_SUPERFICIAL` asserts nothing stronger — these are sufficient
//! conditions for superficiality, not a decision procedure for being
//! inherently measurement-based.
//!
//! The replacements considered here may use unbounded classical
//! computation. A stricter notion that also bounds the classical overhead
//! of the replacement (say, to linear) would rule out more sets; it is out
//! of scope for these checkers.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::discord::{
    classical_replacement_exact, dephase_dense, dephase_pure, is_zero_discord, DiscordVerdict,
    ZeroDiscordState,
};
use crate::error::{Error, Result};
use crate::format;
use crate::mbqc::{run_mbqc_exact, MbqcProgram, PostProcess, PreState, Schedule};
use crate::state::{format_outcome, LocalProductBasis};
use crate::tol::TOL;

/// One computation in a set: a schedule plus classical post-processing.
#[derive(Clone, Debug)]
pub struct MbqcMember {
    pub schedule: Schedule,
    pub post: PostProcess,
}

/// A set of MBQCs over a shared pre-measurement state.
#[derive(Clone, Debug)]
pub struct MbqcSet {
    pre_state: PreState,
    members: Vec<MbqcMember>,
}

impl MbqcSet {
    pub fn new(pre_state: PreState, members: Vec<MbqcMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("members", "a set needs at least one member"));
        }
        let r = pre_state.num_qubits();
        for member in &members {
            if member.schedule.num_qubits() != r {
                return Err(Error::invalid(
                    "members",
                    format!(
                        "member schedule covers {} qubits, state has {r}",
                        member.schedule.num_qubits()
                    ),
                ));
            }
            member.post.check_width(r)?;
        }
        Ok(MbqcSet { pre_state, members })
    }

    pub fn pre_state(&self) -> &PreState {
        &self.pre_state
    }

    pub fn members(&self) -> &[MbqcMember] {
        &self.members
    }

    pub fn member_program(&self, idx: usize) -> Result<MbqcProgram> {
        let member = &self.members[idx];
        MbqcProgram::new(
            self.pre_state.clone(),
            member.schedule.clone(),
            member.post.clone(),
        )
    }
}

/// Verdict status; serialized in the wire spelling used by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionStatus {
    #[serde(rename = "SUPERFICIAL_BY_C1")]
    SuperficialByC1,
    #[serde(rename = "SUPERFICIAL_BY_C2")]
    SuperficialByC2,
    #[serde(rename = "SUPERFICIAL_BY_C3")]
    SuperficialByC3,
    #[serde(rename = "NOT_SHOWN_SUPERFICIAL")]
    NotShownSuperficial,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

/// A status plus machine-readable justification (the common basis, the
/// deterministic transcript, per-member validation distances, or the
/// reasons nothing fired).
#[derive(Clone, Debug, Serialize)]
pub struct CriterionVerdict {
    pub status: CriterionStatus,
    pub evidence: serde_json::Value,
}

impl CriterionVerdict {
    fn not_shown(reason: impl Into<String>) -> Self {
        CriterionVerdict {
            status: CriterionStatus::NotShownSuperficial,
            evidence: json!({ "reasons": [reason.into()] }),
        }
    }

    fn inconclusive(reason: impl Into<String>) -> Self {
        CriterionVerdict {
            status: CriterionStatus::Inconclusive,
            evidence: json!({ "reasons": [reason.into()] }),
        }
    }

    pub fn fired(&self) -> bool {
        matches!(
            self.status,
            CriterionStatus::SuperficialByC1
                | CriterionStatus::SuperficialByC2
                | CriterionStatus::SuperficialByC3
        )
    }
}

/// Run a member exactly, converting cap violations into an inconclusive
/// reason instead of an error.
fn exact_member(
    set: &MbqcSet,
    idx: usize,
) -> Result<std::result::Result<crate::mbqc::MbqcRun, String>> {
    let program = set.member_program(idx)?;
    match run_mbqc_exact(&program) {
        Ok(run) => Ok(Ok(run)),
        Err(e) if e.is_cap_violation() => Ok(Err(format!("member {idx}: {e}"))),
        Err(e) => Err(e),
    }
}

/// Criterion 1: measuring the pre-measurement state always yields the same
/// classical string. Resolved as the same transcript across the whole set,
/// since a single stored string must serve every member; the evidence notes
/// that reading.
pub fn check_criterion1(set: &MbqcSet) -> Result<CriterionVerdict> {
    let r = set.pre_state().num_qubits();
    let mut common: Option<u64> = None;
    for idx in 0..set.members().len() {
        let run = match exact_member(set, idx)? {
            Ok(run) => run,
            Err(reason) => return Ok(CriterionVerdict::inconclusive(reason)),
        };
        match run.transcripts.is_point_mass() {
            None => {
                return Ok(CriterionVerdict::not_shown(format!(
                    "member {idx}: transcript distribution is not a point mass"
                )))
            }
            Some(y) => match common {
                None => common = Some(y),
                Some(m) if m != y => {
                    return Ok(CriterionVerdict::not_shown(format!(
                        "member {idx}: deterministic transcript {} differs from {}",
                        format_outcome(y, r),
                        format_outcome(m, r)
                    )))
                }
                _ => {}
            },
        }
    }
    let m = common.expect("members nonempty");
    Ok(CriterionVerdict {
        status: CriterionStatus::SuperficialByC1,
        evidence: json!({
            "criterion": 1,
            "transcript": format_outcome(m, r),
            "reading": "the same deterministic transcript is required across every member of the set",
        }),
    })
}

/// Criterion 2: the state can be measured locally ahead of time, without
/// regard to which computation will run. Fires iff every member is
/// non-adaptive and all members assign the same basis per qubit (up to
/// per-vector phase); flexible measurements block it. The evidenced basis
/// is validated by replaying every member's post-processing on the
/// ahead-of-time distribution.
pub fn check_criterion2(set: &MbqcSet) -> Result<CriterionVerdict> {
    let mut common: Option<LocalProductBasis> = None;
    for (idx, member) in set.members().iter().enumerate() {
        let basis = match member.schedule.fixed_basis_by_qubit() {
            Some(b) => b,
            None => {
                return Ok(CriterionVerdict::not_shown(format!(
                    "member {idx} is adaptive; its bases cannot be fixed ahead of time"
                )))
            }
        };
        match &common {
            None => common = Some(basis),
            Some(c) => {
                if !c.same_up_to_phase(&basis) {
                    return Ok(CriterionVerdict::not_shown(format!(
                        "member {idx} measures in a different basis (flexible measurements)"
                    )));
                }
            }
        }
    }
    let common = common.expect("members nonempty");

    // Replay validation: one ahead-of-time measurement, then each member's
    // classical post-processing, must reproduce each member's statistics.
    let ahead = match set.pre_state().distribution(&common) {
        Ok(d) => d,
        Err(e) if e.is_cap_violation() => {
            return Ok(CriterionVerdict::inconclusive(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let mut tvds = Vec::with_capacity(set.members().len());
    for (idx, member) in set.members().iter().enumerate() {
        let replay = ahead.pushforward(member.post.output_bits(), |y| member.post.apply(y))?;
        let quantum = match exact_member(set, idx)? {
            Ok(run) => run,
            Err(reason) => return Ok(CriterionVerdict::inconclusive(reason)),
        };
        let tvd = replay.tvd(&quantum.outputs)?;
        if tvd >= TOL {
            return Ok(CriterionVerdict::not_shown(format!(
                "member {idx}: ahead-of-time replay deviates (tvd {tvd:.3e})"
            )));
        }
        tvds.push(tvd);
    }
    Ok(CriterionVerdict {
        status: CriterionStatus::SuperficialByC2,
        evidence: json!({
            "criterion": 2,
            "common_basis": format::product_basis_json(&common),
            "per_member_replay_tvd": tvds,
        }),
    })
}

/// Criterion 3: a stored sample plus classical per-bit randomization
/// replaces the measurements. Sufficient-condition checker: obtain a
/// zero-discord certificate for the pre-measurement state, then validate
/// per member that the classical replacement reproduces the quantum output
/// distribution exactly.
///
/// "Each bit separately" is read as allowing a member's basis choices to
/// depend on previously generated outcome bits (the replacement simulates
/// the schedule sequentially), so adaptive members are in scope here even
/// though they block criterion 2.
pub fn check_criterion3(set: &MbqcSet) -> Result<CriterionVerdict> {
    let zd: ZeroDiscordState = match set.pre_state() {
        PreState::Dephased(zd) => zd.clone(),
        PreState::Pure(s) => {
            let dm = match s.density_matrix() {
                Ok(dm) => dm,
                Err(e) if e.is_cap_violation() => {
                    return Ok(CriterionVerdict::inconclusive(format!(
                        "pre-state too large to densify for discord detection: {e}"
                    )))
                }
                Err(e) => return Err(e),
            };
            match is_zero_discord(&dm, TOL)? {
                DiscordVerdict::ZeroDiscord(basis) => dephase_pure(s, &basis)?,
                DiscordVerdict::Discordant { .. } => {
                    return Ok(CriterionVerdict::not_shown("pre-state is discordant"))
                }
                DiscordVerdict::Inconclusive(reason) => {
                    return Ok(CriterionVerdict::inconclusive(reason))
                }
            }
        }
        PreState::Dense(dm) => match is_zero_discord(dm, TOL)? {
            DiscordVerdict::ZeroDiscord(basis) => dephase_dense(dm, &basis)?,
            DiscordVerdict::Discordant { .. } => {
                return Ok(CriterionVerdict::not_shown("pre-state is discordant"))
            }
            DiscordVerdict::Inconclusive(reason) => {
                return Ok(CriterionVerdict::inconclusive(reason))
            }
        },
    };

    let mut tvds = Vec::with_capacity(set.members().len());
    for (idx, member) in set.members().iter().enumerate() {
        let replacement = classical_replacement_exact(&zd, &member.schedule, &member.post)?;
        let quantum = match exact_member(set, idx)? {
            Ok(run) => run,
            Err(reason) => return Ok(CriterionVerdict::inconclusive(reason)),
        };
        let tvd = replacement.outputs.tvd(&quantum.outputs)?;
        if tvd >= TOL {
            return Ok(CriterionVerdict::not_shown(format!(
                "member {idx}: per-bit replacement deviates (tvd {tvd:.3e})"
            )));
        }
        tvds.push(tvd);
    }
    Ok(CriterionVerdict {
        status: CriterionStatus::SuperficialByC3,
        evidence: json!({
            "criterion": 3,
            "basis": format::product_basis_json(zd.basis()),
            "per_member_replacement_tvd": tvds,
        }),
    })
}

/// Run the checkers in order 1, 2, 3 and return the first firing verdict.
/// `NOT_SHOWN_SUPERFICIAL` only when no checker fires and none was
/// inconclusive.
pub fn classify_set(set: &MbqcSet) -> Result<CriterionVerdict> {
    let mut reasons: Vec<serde_json::Value> = Vec::new();
    let mut inconclusive = false;
    for (name, checker) in [
        ("criterion1", check_criterion1 as fn(&MbqcSet) -> Result<CriterionVerdict>),
        ("criterion2", check_criterion2),
        ("criterion3", check_criterion3),
    ] {
        let verdict = checker(set)?;
        if verdict.fired() {
            return Ok(verdict);
        }
        if verdict.status == CriterionStatus::Inconclusive {
            inconclusive = true;
        }
        reasons.push(json!({ "checker": name, "status": verdict.status, "evidence": verdict.evidence }));
    }
    Ok(CriterionVerdict {
        status: if inconclusive {
            CriterionStatus::Inconclusive
        } else {
            CriterionStatus::NotShownSuperficial
        },
        evidence: json!({ "checkers": reasons }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iqp::{IqpCircuit, IqpGate};
    use crate::mbqc::compile_iqp_to_mbqc;
    use crate::state::{PureState, QubitBasis};
    use std::f64::consts::PI;

    fn compiled_set_with_offsets(circuit: &IqpCircuit, offsets: &[u64]) -> MbqcSet {
        let program = compile_iqp_to_mbqc(circuit).unwrap();
        let masks = match program.post() {
            PostProcess::Affine { masks, .. } => masks.clone(),
            _ => unreachable!(),
        };
        let members = offsets
            .iter()
            .map(|&offset| MbqcMember {
                schedule: program.schedule().clone(),
                post: PostProcess::affine(masks.clone(), offset).unwrap(),
            })
            .collect();
        MbqcSet::new(program.pre_state().clone(), members).unwrap()
    }

    fn two_gate_circuit() -> IqpCircuit {
        IqpCircuit::new(
            2,
            2,
            vec![
                IqpGate { z: 0b01, theta: PI / 3.0 },
                IqpGate { z: 0b10, theta: PI / 8.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn point_mass_set_fires_c1() {
        let state = PureState::computational(2, 0b10).unwrap();
        let schedule = Schedule::from_product_basis(&LocalProductBasis::computational(2));
        let set = MbqcSet::new(
            PreState::Pure(state),
            vec![
                MbqcMember {
                    schedule: schedule.clone(),
                    post: PostProcess::identity(2),
                },
                MbqcMember {
                    schedule,
                    post: PostProcess::affine(vec![0, 0], 0b11).unwrap(),
                },
            ],
        )
        .unwrap();
        let verdict = check_criterion1(&set).unwrap();
        assert_eq!(verdict.status, CriterionStatus::SuperficialByC1);
        assert_eq!(verdict.evidence["transcript"], "10");
        // And the aggregate returns the first firing checker.
        assert_eq!(
            classify_set(&set).unwrap().status,
            CriterionStatus::SuperficialByC1
        );
    }

    #[test]
    fn plus_state_in_x_fires_c1_but_not_in_computational() {
        let plus = PureState::plus_state(1).unwrap();
        let member_x = MbqcMember {
            schedule: Schedule::from_product_basis(&LocalProductBasis::all_x(1)),
            post: PostProcess::identity(1),
        };
        let set = MbqcSet::new(PreState::Pure(plus.clone()), vec![member_x]).unwrap();
        assert_eq!(
            check_criterion1(&set).unwrap().status,
            CriterionStatus::SuperficialByC1
        );

        let member_z = MbqcMember {
            schedule: Schedule::from_product_basis(&LocalProductBasis::computational(1)),
            post: PostProcess::identity(1),
        };
        let set = MbqcSet::new(PreState::Pure(plus), vec![member_z]).unwrap();
        assert_eq!(
            check_criterion1(&set).unwrap().status,
            CriterionStatus::NotShownSuperficial
        );
    }

    #[test]
    fn dephased_set_fires_c2_and_c3_but_graph_set_does_not() {
        let circuit = two_gate_circuit();
        let program = compile_iqp_to_mbqc(&circuit).unwrap();
        let graph_state = match program.pre_state() {
            PreState::Pure(s) => s.clone(),
            _ => unreachable!(),
        };
        let basis = crate::mbqc::compiled_measurement_basis(&circuit);
        let zd = crate::discord::dephase_pure(&graph_state, &basis).unwrap();

        // Same schedule, varying output shifts: the x̄ family.
        let dephased = MbqcSet::new(
            PreState::Dephased(zd),
            compiled_set_with_offsets(&circuit, &[0b00, 0b01, 0b10, 0b11])
                .members()
                .to_vec(),
        )
        .unwrap();
        assert_eq!(
            check_criterion2(&dephased).unwrap().status,
            CriterionStatus::SuperficialByC2
        );
        assert_eq!(
            check_criterion3(&dephased).unwrap().status,
            CriterionStatus::SuperficialByC3
        );
        assert_eq!(
            classify_set(&dephased).unwrap().status,
            CriterionStatus::SuperficialByC2
        );

        // The graph state supports flexible angles: two distinct theta sets
        // prevent C2, and the entangled state prevents C3.
        let other = IqpCircuit::new(
            2,
            2,
            vec![
                IqpGate { z: 0b01, theta: PI / 2.0 },
                IqpGate { z: 0b10, theta: 3.0 * PI / 5.0 },
            ],
        )
        .unwrap();
        let program_b = compile_iqp_to_mbqc(&other).unwrap();
        let graph_set = MbqcSet::new(
            PreState::Pure(graph_state),
            vec![
                MbqcMember {
                    schedule: program.schedule().clone(),
                    post: program.post().clone(),
                },
                MbqcMember {
                    schedule: program_b.schedule().clone(),
                    post: program_b.post().clone(),
                },
            ],
        )
        .unwrap();
        let verdict = classify_set(&graph_set).unwrap();
        assert_eq!(verdict.status, CriterionStatus::NotShownSuperficial);
    }

    #[test]
    fn adaptive_member_blocks_c2() {
        let plus = PureState::plus_state(2).unwrap();
        let mut table = std::collections::BTreeMap::new();
        table.insert("0".to_string(), QubitBasis::x());
        table.insert("1".to_string(), QubitBasis::computational());
        let steps = vec![
            crate::mbqc::MeasurementStep::fixed(1, QubitBasis::x()),
            crate::mbqc::MeasurementStep {
                qubit: 2,
                rule: crate::mbqc::BasisRule::Adaptive(table),
            },
        ];
        let set = MbqcSet::new(
            PreState::Pure(plus),
            vec![MbqcMember {
                schedule: Schedule::new(steps, 2).unwrap(),
                post: PostProcess::identity(2),
            }],
        )
        .unwrap();
        assert_eq!(
            check_criterion2(&set).unwrap().status,
            CriterionStatus::NotShownSuperficial
        );
    }

    #[test]
    fn c3_fires_for_point_mass_with_arbitrary_bases() {
        // |m><m| is zero-discord, so C3 fires even with flexible bases.
        let state = PureState::computational(2, 0b01).unwrap();
        let set = MbqcSet::new(
            PreState::Pure(state),
            vec![
                MbqcMember {
                    schedule: Schedule::from_product_basis(&LocalProductBasis::all_x(2)),
                    post: PostProcess::identity(2),
                },
                MbqcMember {
                    schedule: Schedule::from_product_basis(&LocalProductBasis::new(vec![
                        QubitBasis::zx_angle(0.3),
                        QubitBasis::xy_angle(1.2),
                    ])),
                    post: PostProcess::identity(2),
                },
            ],
        )
        .unwrap();
        assert_eq!(
            check_criterion3(&set).unwrap().status,
            CriterionStatus::SuperficialByC3
        );
    }

    #[test]
    fn single_gate_graph_state_is_not_shown_by_c3() {
        let circuit = IqpCircuit::new(1, 1, vec![IqpGate { z: 1, theta: PI / 4.0 }]).unwrap();
        let program = compile_iqp_to_mbqc(&circuit).unwrap();
        let set = MbqcSet::new(
            program.pre_state().clone(),
            vec![MbqcMember {
                schedule: program.schedule().clone(),
                post: program.post().clone(),
            }],
        )
        .unwrap();
        let verdict = check_criterion3(&set).unwrap();
        assert_eq!(verdict.status, CriterionStatus::NotShownSuperficial);
    }

    #[test]
    fn c1_firing_point_mass_state_also_fires_c3() {
        // Monotonicity on constructed cases: a deterministic diagonal state
        // admits the zero-discord replacement.
        let state = PureState::computational(3, 0b101).unwrap();
        let set = MbqcSet::new(
            PreState::Pure(state),
            vec![MbqcMember {
                schedule: Schedule::from_product_basis(&LocalProductBasis::computational(3)),
                post: PostProcess::identity(3),
            }],
        )
        .unwrap();
        assert!(check_criterion1(&set).unwrap().fired());
        assert!(check_criterion3(&set).unwrap().fired());
    }
}
