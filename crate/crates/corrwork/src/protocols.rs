//! Declarative protocol engine for the canonical heat-to-work conversions.
//!
//! A protocol is a list of steps executed against a membrane network whose
//! species are two-qubit states. Work is extracted only at movable
//! semipermeable membranes during quasistatic mixing; unitary steps and
//! partition bookkeeping are free. Every step appends a ledger entry with
//! its work, heat, and total gas entropy change, and the run as a whole is
//! checked against W = kT N * (entropy defect consumed).

use crate::qmat::ComplexMatrix;
use crate::states::{
    bell, bell_vector, classical_full, defect_vs_equilibrium, orthogonal_supports,
    partial_entangled_vector, synthesize_unitary, u1_flip_b, u2_pair_swap, von_neumann_entropy,
    BellKind, CorrelationParam, Ensemble, StateError, TwoQubitState, Which,
};
use crate::thermo::{GasSpec, MembraneNetwork, PistonDisplacement, ThermoError};
use std::collections::BTreeMap;
use thiserror::Error;

/// Orthogonality gate for declaring a semipermeable membrane.
pub const MEMBRANE_ORTHOGONALITY_TOL: f64 = 1e-10;
/// Measurement branches below this weight are dropped.
pub const BRANCH_WEIGHT_EPS: f64 = 1e-12;
/// Default quadrature tolerance in units of NkT.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("semipermeable membrane requested between non-orthogonal states (Tr overlap {0:.3e})")]
    OrthogonalityViolation(f64),
    #[error("not a projector pair: {0}")]
    NotAProjectorPair(String),
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// Which molecules a unitary step acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionTarget {
    Left,
    Right,
    Whole,
}

/// Where a quasistatic mix stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixTarget {
    /// Run the pistons out to the solved pressure balance.
    Equilibrium,
    /// Stop at an explicit displacement (at or before equilibrium).
    Displacement(PistonDisplacement),
}

#[derive(Debug, Clone)]
pub enum ProtocolStep {
    /// Split the equilibrated vessel in half with a fixed wall; free.
    InsertPartition,
    /// Conjugate every species in the target region by a unitary.
    ApplyUnitary {
        target: RegionTarget,
        unitary: ComplexMatrix,
    },
    /// Swap the central wall for two movable membranes, the left one
    /// permeable to (the support of) the first state, the right one to the
    /// second. The two supports must be orthogonal.
    ReplaceWithSemipermeable {
        left_permeable_to: TwoQubitState,
        right_permeable_to: TwoQubitState,
    },
    /// Let the membranes be pushed apart quasistatically, extracting work.
    QuasistaticMix(MixTarget),
    /// Remove every wall and let the gases merge.
    RemovePartitions,
}

/// Per-step heat/work/entropy record.
///
/// Heat equals work at every step (isothermal ideal gas: internal energy is
/// unchanged). `gas_entropy_delta` is the change in the gas's total entropy,
/// configurational plus internal, in nats for the whole gas.
#[derive(Debug, Clone)]
pub struct LedgerEntry {
    pub step_index: usize,
    pub work_out: f64,
    pub heat_in: f64,
    pub gas_entropy_delta: f64,
    pub description: String,
}

#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub total_work: f64,
    /// Entropy defect consumed per molecule, in nats.
    pub total_entropy_defect_consumed: f64,
    pub final_state: TwoQubitState,
    pub ledger: Vec<LedgerEntry>,
    pub initial_state: TwoQubitState,
    /// Displacement reached by each quasistatic mix, in step order.
    pub mix_displacements: Vec<PistonDisplacement>,
    /// True when a mix found no pressure imbalance (the p = 1/2 case).
    pub degenerate: bool,
}

/// Pass/fail comparison of extracted work against the information measures.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub total_work: f64,
    /// kT N (S(final) - S(initial)).
    pub work_from_entropy_change: f64,
    /// kT N * defect of the initial state against equilibrium.
    pub work_from_initial_defect: f64,
    pub rel_err_entropy: f64,
    pub rel_err_defect: f64,
    pub pass: bool,
}

/// Projective measurement performed by a semipermeable membrane: splits a
/// state into its branches under two complementary support projectors.
///
/// Branch weights are Tr(P rho) and states P rho P / Tr(P rho); branches
/// lighter than 1e-12 are dropped.
pub fn membrane_measure(
    rho: &TwoQubitState,
    support_a: &ComplexMatrix,
    support_b: &ComplexMatrix,
) -> Result<Vec<(f64, TwoQubitState)>, ProtocolError> {
    for (name, p) in [("a", support_a), ("b", support_b)] {
        if p.dim() != 4 {
            return Err(ProtocolError::NotAProjectorPair(format!(
                "support {name} is not 4x4"
            )));
        }
        let herm = p.hermiticity_defect();
        if herm > 1e-8 {
            return Err(ProtocolError::NotAProjectorPair(format!(
                "support {name} is not Hermitian (defect {herm:.3e})"
            )));
        }
        let idem = p.matmul(p).max_abs_diff(p);
        if idem > 1e-8 {
            return Err(ProtocolError::NotAProjectorPair(format!(
                "support {name} is not idempotent (defect {idem:.3e})"
            )));
        }
    }
    let completeness = support_a
        .add(support_b)
        .max_abs_diff(&ComplexMatrix::identity(4));
    if completeness > 1e-10 {
        return Err(ProtocolError::NotAProjectorPair(format!(
            "supports do not sum to the identity (defect {completeness:.3e})"
        )));
    }
    Ok(decompose_against(rho, support_a, support_b)?)
}

/// Branches of `rho` under two orthogonal projectors, without requiring
/// completeness (the membrane may act inside a proper subspace).
fn decompose_against(
    rho: &TwoQubitState,
    support_a: &ComplexMatrix,
    support_b: &ComplexMatrix,
) -> Result<Vec<(f64, TwoQubitState)>, StateError> {
    let mut branches = Vec::new();
    for projector in [support_a, support_b] {
        let cut = rho.matrix().conjugate_by(projector);
        let weight = cut.trace().re;
        if weight < BRANCH_WEIGHT_EPS {
            continue;
        }
        branches.push((weight, TwoQubitState::new(cut.scale(1.0 / weight))?));
    }
    Ok(branches)
}

struct SpeciesEntry {
    label: String,
    state: TwoQubitState,
    entropy: f64,
}

struct Engine {
    net: MembraneNetwork,
    registry: Vec<SpeciesEntry>,
    spec: GasSpec,
    quad_tol_abs: f64,
    mix_displacements: Vec<PistonDisplacement>,
    degenerate: bool,
}

impl Engine {
    fn new(initial: &TwoQubitState, spec: GasSpec, quad_tol_nkt: f64) -> Result<Self, ProtocolError> {
        let mut engine = Engine {
            net: MembraneNetwork::single_region(2.0 * spec.half_volume, BTreeMap::new())?,
            registry: Vec::new(),
            spec,
            quad_tol_abs: quad_tol_nkt * spec.nkt(),
            mix_displacements: Vec::new(),
            degenerate: false,
        };
        let label = engine.intern(initial.clone());
        let mut counts = BTreeMap::new();
        counts.insert(label, spec.n_molecules);
        engine.net.replace_region_counts(0, counts);
        Ok(engine)
    }

    fn intern(&mut self, state: TwoQubitState) -> String {
        if let Some(entry) = self
            .registry
            .iter()
            .find(|e| e.state.max_abs_diff(&state) < 1e-9)
        {
            return entry.label.clone();
        }
        let label = format!("s{}", self.registry.len());
        let entropy = von_neumann_entropy(&state);
        self.registry.push(SpeciesEntry {
            label: label.clone(),
            state,
            entropy,
        });
        self.registry.last().expect("just pushed").label.clone()
    }

    fn state_of(&self, label: &str) -> &TwoQubitState {
        &self
            .registry
            .iter()
            .find(|e| e.label == label)
            .expect("label interned")
            .state
    }

    /// Total gas entropy: configurational plus internal, extensive, nats.
    fn total_entropy(&self) -> f64 {
        let internal: f64 = self
            .registry
            .iter()
            .map(|e| self.net.total_count(&e.label) * e.entropy)
            .sum();
        self.net.positional_entropy() + internal
    }

    fn target_regions(&self, target: RegionTarget) -> Result<Vec<usize>, ProtocolError> {
        match target {
            RegionTarget::Whole => Ok((0..self.net.regions().len()).collect()),
            RegionTarget::Left | RegionTarget::Right => {
                if self.net.regions().len() != 2 {
                    return Err(ProtocolError::InvalidStep(
                        "left/right targets require a single central partition".into(),
                    ));
                }
                Ok(vec![if target == RegionTarget::Left { 0 } else { 1 }])
            }
        }
    }

    fn apply_unitary(
        &mut self,
        target: RegionTarget,
        unitary: &ComplexMatrix,
    ) -> Result<(), ProtocolError> {
        if unitary.dim() != 4 || !unitary.is_unitary(1e-10) {
            return Err(ProtocolError::InvalidStep(
                "4x4 unitary required for molecular transformations".into(),
            ));
        }
        for region in self.target_regions(target)? {
            let old = self.net.regions()[region].counts().clone();
            let mut new_counts: BTreeMap<String, f64> = BTreeMap::new();
            for (label, count) in old {
                if count <= 0.0 {
                    continue;
                }
                let transformed = self.state_of(&label).apply_unitary(unitary)?;
                let new_label = self.intern(transformed);
                *new_counts.entry(new_label).or_insert(0.0) += count;
            }
            self.net.replace_region_counts(region, new_counts);
        }
        Ok(())
    }

    fn replace_with_semipermeable(
        &mut self,
        left_state: &TwoQubitState,
        right_state: &TwoQubitState,
    ) -> Result<(), ProtocolError> {
        let overlap = left_state
            .matrix()
            .matmul(right_state.matrix())
            .trace()
            .re;
        if !orthogonal_supports(left_state, right_state, MEMBRANE_ORTHOGONALITY_TOL) {
            return Err(ProtocolError::OrthogonalityViolation(overlap));
        }
        let mut support_left = left_state.support_projector();
        let mut support_right = right_state.support_projector();

        // The partition facing a gas is permeable to that gas: orient the
        // pair so each support matches the side it faces, which keeps the
        // canonical scripts valid for either input gas.
        if self.net.regions().len() == 2 {
            let alignment = |support: &ComplexMatrix, region: usize| -> f64 {
                let counts = self.net.regions()[region].counts().clone();
                let mut total = 0.0;
                let mut overlap = 0.0;
                for (label, count) in counts {
                    if count <= 0.0 {
                        continue;
                    }
                    total += count;
                    overlap += count
                        * self
                            .state_of(&label)
                            .matrix()
                            .conjugate_by(support)
                            .trace()
                            .re;
                }
                if total > 0.0 {
                    overlap / total
                } else {
                    0.0
                }
            };
            if alignment(&support_right, 0) > alignment(&support_left, 0) {
                std::mem::swap(&mut support_left, &mut support_right);
            }
        }

        // Each membrane measures every molecule that impinges on it: split
        // the resident species into branches aligned with the two supports.
        let mut branch_map: BTreeMap<String, Vec<(f64, String)>> = BTreeMap::new();
        for label in self.net.species_labels() {
            if self.net.total_count(&label) <= 0.0 {
                continue;
            }
            let rho = self.state_of(&label).clone();
            let branches = decompose_against(&rho, &support_left, &support_right)?;
            let covered: f64 = branches.iter().map(|(w, _)| w).sum();
            if covered < 1.0 - 1e-8 {
                return Err(ProtocolError::InvalidStep(format!(
                    "membrane resolves only {covered:.6} of species `{label}`"
                )));
            }
            let interned = branches
                .into_iter()
                .map(|(w, state)| (w, self.intern(state)))
                .collect();
            branch_map.insert(label, interned);
        }
        for region in 0..self.net.regions().len() {
            let old = self.net.regions()[region].counts().clone();
            let mut new_counts: BTreeMap<String, f64> = BTreeMap::new();
            for (label, count) in old {
                if count <= 0.0 {
                    continue;
                }
                for (weight, branch_label) in &branch_map[&label] {
                    *new_counts.entry(branch_label.clone()).or_insert(0.0) += count * weight;
                }
            }
            self.net.replace_region_counts(region, new_counts);
        }

        // Permeability is membership of a species' state in a support.
        let mut permeable_left = std::collections::BTreeSet::new();
        let mut permeable_right = std::collections::BTreeSet::new();
        for entry in &self.registry {
            let in_left = entry
                .state
                .matrix()
                .conjugate_by(&support_left)
                .trace()
                .re;
            if in_left >= 1.0 - 1e-9 {
                permeable_left.insert(entry.label.clone());
            }
            let in_right = entry
                .state
                .matrix()
                .conjugate_by(&support_right)
                .trace()
                .re;
            if in_right >= 1.0 - 1e-9 {
                permeable_right.insert(entry.label.clone());
            }
        }
        self.net
            .replace_center_with_semipermeable(permeable_left, permeable_right)?;
        Ok(())
    }

    fn quasistatic_mix(&mut self, target: MixTarget) -> Result<f64, ProtocolError> {
        let displacement = match target {
            MixTarget::Equilibrium => {
                let eq = self.net.equilibrium_displacement(&self.spec)?;
                if eq.degenerate {
                    self.degenerate = true;
                }
                eq.displacement
            }
            MixTarget::Displacement(d) => d,
        };
        let path = [PistonDisplacement::zero(), displacement];
        let work = self.net.quasistatic_work(&self.spec, &path, self.quad_tol_abs)?;
        self.net = self.net.with_displacement(displacement)?;
        self.mix_displacements.push(displacement);
        Ok(work)
    }

    /// Count-weighted mixture of every species in the vessel.
    fn vessel_state(&self) -> TwoQubitState {
        let mut total = 0.0;
        let mut matrix = crate::qmat::ComplexMatrix::zeros(4);
        for entry in &self.registry {
            let count = self.net.total_count(&entry.label);
            if count <= 0.0 {
                continue;
            }
            total += count;
            matrix = matrix.add(&entry.state.matrix().scale(count));
        }
        TwoQubitState::new(matrix.scale(1.0 / total))
            .expect("count-weighted mixture of valid states is valid")
    }
}

/// Execute a protocol with the default quadrature tolerance (1e-10 NkT).
pub fn run_protocol(
    initial: &TwoQubitState,
    spec: &GasSpec,
    steps: &[ProtocolStep],
) -> Result<ProtocolResult, ProtocolError> {
    run_protocol_with_tol(initial, spec, steps, DEFAULT_QUAD_TOL)
}

/// Execute a protocol, integrating mix work at `quad_tol_nkt * NkT` absolute
/// tolerance.
pub fn run_protocol_with_tol(
    initial: &TwoQubitState,
    spec: &GasSpec,
    steps: &[ProtocolStep],
    quad_tol_nkt: f64,
) -> Result<ProtocolResult, ProtocolError> {
    let mut engine = Engine::new(initial, *spec, quad_tol_nkt)?;
    let mut ledger = Vec::with_capacity(steps.len());
    for (step_index, step) in steps.iter().enumerate() {
        let entropy_before = engine.total_entropy();
        let (work, description) = match step {
            ProtocolStep::InsertPartition => {
                engine.net.insert_center_partition()?;
                (0.0, "insert central partition".to_string())
            }
            ProtocolStep::ApplyUnitary { target, unitary } => {
                engine.apply_unitary(*target, unitary)?;
                let side = match target {
                    RegionTarget::Left => "left half",
                    RegionTarget::Right => "right half",
                    RegionTarget::Whole => "whole vessel",
                };
                (0.0, format!("apply unitary to {side}"))
            }
            ProtocolStep::ReplaceWithSemipermeable {
                left_permeable_to,
                right_permeable_to,
            } => {
                engine.replace_with_semipermeable(left_permeable_to, right_permeable_to)?;
                (0.0, "replace partition with semipermeable pistons".to_string())
            }
            ProtocolStep::QuasistaticMix(target) => {
                let work = engine.quasistatic_mix(*target)?;
                let d = engine
                    .mix_displacements
                    .last()
                    .expect("mix just recorded");
                (
                    work,
                    format!("quasistatic mix to displacement ({:.6}, {:.6})", d.v1, d.v2),
                )
            }
            ProtocolStep::RemovePartitions => {
                engine.net.remove_all_walls();
                (0.0, "remove partitions".to_string())
            }
        };
        let gas_entropy_delta = engine.total_entropy() - entropy_before;
        ledger.push(LedgerEntry {
            step_index,
            work_out: work,
            heat_in: work,
            gas_entropy_delta,
            description,
        });
    }

    let final_state = engine.vessel_state();
    let total_work = ledger.iter().map(|e| e.work_out).sum();
    let total_entropy_defect_consumed =
        defect_vs_equilibrium(initial) - defect_vs_equilibrium(&final_state);
    Ok(ProtocolResult {
        total_work,
        total_entropy_defect_consumed,
        final_state,
        ledger,
        initial_state: initial.clone(),
        mix_displacements: engine.mix_displacements,
        degenerate: engine.degenerate,
    })
}

/// Check W = kT N dS and W = kT N I against the run, at 1e-6 relative error.
///
/// Relative errors use max(|prediction|, 1e-9 NkT) as denominator so that
/// zero-work degenerate runs compare 0 against 0 instead of dividing by it.
pub fn verify_equivalence(result: &ProtocolResult, spec: &GasSpec) -> EquivalenceReport {
    let scale = spec.kt() * spec.n_molecules;
    let ds = von_neumann_entropy(&result.final_state) - von_neumann_entropy(&result.initial_state);
    let from_entropy = scale * ds;
    let from_defect = scale * defect_vs_equilibrium(&result.initial_state);
    let floor = 1e-9 * spec.nkt();
    let rel = |prediction: f64| {
        (result.total_work - prediction).abs() / prediction.abs().max(floor)
    };
    let rel_err_entropy = rel(from_entropy);
    let rel_err_defect = rel(from_defect);
    EquivalenceReport {
        total_work: result.total_work,
        work_from_entropy_change: from_entropy,
        work_from_initial_defect: from_defect,
        rel_err_entropy,
        rel_err_defect,
        pass: rel_err_entropy <= 1e-6 && rel_err_defect <= 1e-6,
    }
}

/// Mixing protocol for maximally correlated classical molecules: worth
/// NkT ln 2 starting from rho_1.
pub fn protocol_classical_full() -> Vec<ProtocolStep> {
    vec![
        ProtocolStep::InsertPartition,
        ProtocolStep::ApplyUnitary {
            target: RegionTarget::Right,
            unitary: u1_flip_b(),
        },
        ProtocolStep::ReplaceWithSemipermeable {
            left_permeable_to: classical_full(Which::One),
            right_permeable_to: classical_full(Which::Two),
        },
        ProtocolStep::QuasistaticMix(MixTarget::Equilibrium),
        ProtocolStep::RemovePartitions,
    ]
}

/// Mixing protocol for partially correlated classical molecules: worth
/// NkT (ln 2 - h(p)) starting from rho_1p.
///
/// The step list does not depend on p: the membranes are the same rho_1/rho_2
/// pair (each acts as a measurement on the impinging mixture) and the mix
/// stops at the solved equilibrium, which lands at (2p - 1) V on its own. The
/// parameter documents the intended initial state and keeps the degenerate
/// p = 1/2 case explicit at the call site.
pub fn protocol_classical_partial(_p: CorrelationParam) -> Vec<ProtocolStep> {
    protocol_classical_full()
}

/// Two-stage mixing protocol for maximally entangled molecules: worth
/// 2 NkT ln 2 starting from any Bell state aligned with stage one
/// (canonically Phi+).
pub fn protocol_quantum_full() -> Vec<ProtocolStep> {
    let stage2_left = Ensemble::new(vec![
        (0.5, bell(BellKind::PhiPlus)),
        (0.5, bell(BellKind::PsiPlus)),
    ])
    .expect("half weights")
    .mixture();
    let stage2_right = Ensemble::new(vec![
        (0.5, bell(BellKind::PhiMinus)),
        (0.5, bell(BellKind::PsiMinus)),
    ])
    .expect("half weights")
    .mixture();
    vec![
        ProtocolStep::InsertPartition,
        ProtocolStep::ApplyUnitary {
            target: RegionTarget::Right,
            unitary: u1_flip_b(),
        },
        ProtocolStep::ReplaceWithSemipermeable {
            left_permeable_to: bell(BellKind::PhiPlus),
            right_permeable_to: bell(BellKind::PsiPlus),
        },
        ProtocolStep::QuasistaticMix(MixTarget::Equilibrium),
        ProtocolStep::RemovePartitions,
        ProtocolStep::InsertPartition,
        ProtocolStep::ApplyUnitary {
            target: RegionTarget::Right,
            unitary: u2_pair_swap(),
        },
        ProtocolStep::ReplaceWithSemipermeable {
            left_permeable_to: stage2_left,
            right_permeable_to: stage2_right,
        },
        ProtocolStep::QuasistaticMix(MixTarget::Equilibrium),
        ProtocolStep::RemovePartitions,
    ]
}

/// Protocol for a pure partially entangled gas: rotate psi(p, alpha, beta)
/// onto Phi+ with a synthesized unitary, then run the two-stage protocol.
/// Worth 2 NkT ln 2 independently of p.
pub fn protocol_quantum_partial(p: CorrelationParam, alpha: f64, beta: f64) -> Vec<ProtocolStep> {
    let psi = partial_entangled_vector(p, alpha, beta);
    let align = synthesize_unitary(&psi, &bell_vector(BellKind::PhiPlus))
        .expect("balance vector is unit norm");
    let mut steps = vec![ProtocolStep::ApplyUnitary {
        target: RegionTarget::Whole,
        unitary: align,
    }];
    steps.extend(protocol_quantum_full());
    steps
}
