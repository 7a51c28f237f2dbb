//! Canonical two-qubit states, information measures, and the protocol
//! unitaries.
//!
//! Every state constructor returns a validated [`TwoQubitState`] in the fixed
//! basis |00>, |01>, |10>, |11>. Entropies are in nats throughout.

use crate::qmat::{
    complete_to_unitary, sigma_x, Complex64, ComplexMatrix, ComplexVector, QmatError, Subsystem,
};
use thiserror::Error;

/// Trace tolerance for density-matrix validation.
pub const TRACE_TOL: f64 = 1e-12;
/// Hermiticity tolerance for density-matrix validation.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues above -PSD_TOL are accepted as non-negative.
pub const PSD_TOL: f64 = 1e-12;
/// Eigenvalues below this are clamped to zero before taking logarithms.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// 2 ln 2, the entropy of the two-qubit equilibrium state I/4.
pub const TWO_LN_2: f64 = 2.0 * std::f64::consts::LN_2;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("vector is not unit-norm (deviation {0:.3e})")]
    NotNormalized(f64),
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),
    #[error(transparent)]
    Qmat(#[from] QmatError),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Validated 4x4 two-qubit density matrix.
///
/// Construction enforces hermiticity within 1e-10, unit trace within 1e-12,
/// and eigenvalues above -1e-12; the stored matrix is symmetrized so later
/// eigendecompositions never re-reject it.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: ComplexMatrix,
}

impl TwoQubitState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, StateError> {
        if matrix.dim() != 4 {
            return Err(StateError::InvalidDensity(format!(
                "expected 4x4 matrix, got {0}x{0}",
                matrix.dim()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(StateError::InvalidDensity(format!(
                "hermiticity defect {defect:.3e}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(StateError::InvalidDensity(format!(
                "trace {} + {}i, expected 1",
                tr.re, tr.im
            )));
        }
        let matrix = matrix.symmetrized();
        let eigs = matrix.hermitian_eigenvalues(HERMITIAN_TOL)?;
        if let Some(&min) = eigs.first() {
            if min < -PSD_TOL {
                return Err(StateError::InvalidDensity(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    /// Pure state |psi><psi| from a unit vector.
    pub fn from_vector(psi: &ComplexVector) -> Result<Self, StateError> {
        let dev = (psi.norm() - 1.0).abs();
        if dev > HERMITIAN_TOL {
            return Err(StateError::NotNormalized(dev));
        }
        Self::new(psi.projector())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The equilibrium (maximum-entropy) state I/4.
    pub fn maximally_mixed() -> Self {
        Self {
            matrix: ComplexMatrix::identity(4).scale(0.25),
        }
    }

    /// Reduced one-qubit density matrix.
    pub fn marginal(&self, keep: Subsystem) -> ComplexMatrix {
        self.matrix.partial_trace(keep)
    }

    /// Tr(rho^2).
    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// U rho U^dagger.
    pub fn apply_unitary(&self, u: &ComplexMatrix) -> Result<Self, StateError> {
        Self::new(self.matrix.conjugate_by(u))
    }

    /// Entry-wise distance to another state in the max norm.
    pub fn max_abs_diff(&self, other: &TwoQubitState) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix
            .hermitian_eigenvalues(HERMITIAN_TOL)
            .expect("validated state stays Hermitian")
    }

    /// Projector onto the support (eigenvectors with eigenvalue > 1e-9).
    pub fn support_projector(&self) -> ComplexMatrix {
        let (values, vectors) = self
            .matrix
            .hermitian_eigen(HERMITIAN_TOL)
            .expect("validated state stays Hermitian");
        let mut proj = ComplexMatrix::zeros(4);
        for (k, &lambda) in values.iter().enumerate() {
            if lambda > 1e-9 {
                let col = ComplexVector::new((0..4).map(|i| vectors.get(i, k)).collect());
                proj = proj.add(&col.projector());
            }
        }
        proj
    }
}

/// Degree of classical or quantum correlation, 1/2 <= p <= 1.
///
/// p = 1/2 is the degenerate no-correlation point; constructors accept it and
/// protocols flag the resulting zero-work run as degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationParam(f64);

impl CorrelationParam {
    pub fn new(p: f64) -> Result<Self, StateError> {
        if !p.is_finite() || !(0.5..=1.0).contains(&p) {
            return Err(StateError::Domain(format!(
                "correlation parameter p = {p} outside [1/2, 1]"
            )));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True at p = 1/2, where the gas is already at equilibrium.
    pub fn is_degenerate(self) -> bool {
        self.0 <= 0.5
    }
}

/// Weighted ensemble of two-qubit states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, TwoQubitState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, TwoQubitState)>) -> Result<Self, StateError> {
        if members.is_empty() {
            return Err(StateError::Domain("ensemble must be non-empty".into()));
        }
        let mut total = 0.0;
        for (w, _) in &members {
            if !w.is_finite() || *w < 0.0 {
                return Err(StateError::Domain(format!("invalid ensemble weight {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(StateError::Domain(format!(
                "ensemble weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, TwoQubitState)] {
        &self.members
    }

    /// The average state sum_i w_i rho_i.
    pub fn mixture(&self) -> TwoQubitState {
        let mut m = ComplexMatrix::zeros(4);
        for (w, rho) in &self.members {
            m = m.add(&rho.matrix().scale(*w));
        }
        TwoQubitState::new(m).expect("mixture of valid states is valid")
    }
}

/// Which of the two complementary gases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    One,
    Two,
}

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        }
    }
}

/// Maximally correlated classical state: rho_1 = (|00><00| + |11><11|)/2 or
/// rho_2 = (|01><01| + |10><10|)/2.
pub fn classical_full(which: Which) -> TwoQubitState {
    let diag = match which {
        Which::One => [0.5, 0.0, 0.0, 0.5],
        Which::Two => [0.0, 0.5, 0.5, 0.0],
    };
    TwoQubitState::new(ComplexMatrix::diagonal(&diag)).expect("canonical state")
}

/// Partially correlated separable state with agreement probability p:
/// rho_1p = diag(p/2, (1-p)/2, (1-p)/2, p/2), and rho_2p with p <-> 1-p.
pub fn classical_partial(p: CorrelationParam, which: Which) -> TwoQubitState {
    let p = p.value();
    let (hi, lo) = (p / 2.0, (1.0 - p) / 2.0);
    let diag = match which {
        Which::One => [hi, lo, lo, hi],
        Which::Two => [lo, hi, hi, lo],
    };
    TwoQubitState::new(ComplexMatrix::diagonal(&diag)).expect("canonical state")
}

/// Unit vector of the requested Bell state.
pub fn bell_vector(kind: BellKind) -> ComplexVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match kind {
        BellKind::PhiPlus => [s, 0.0, 0.0, s],
        BellKind::PhiMinus => [s, 0.0, 0.0, -s],
        BellKind::PsiPlus => [0.0, s, s, 0.0],
        BellKind::PsiMinus => [0.0, s, -s, 0.0],
    };
    ComplexVector::from_real(&amps)
}

/// Projector onto the requested Bell state.
pub fn bell(kind: BellKind) -> TwoQubitState {
    TwoQubitState::from_vector(&bell_vector(kind)).expect("Bell vector is unit norm")
}

/// Unit vector of the pure partially entangled state
/// psi = a|00> + b|01> + c|10> + d|11> with |a|^2 = |d|^2 = p/2,
/// |b|^2 = |c|^2 = (1-p)/2, c = b*, d = -a*.
///
/// The balance conditions pin both one-qubit marginals to I/2 for every p.
pub fn partial_entangled_vector(p: CorrelationParam, alpha: f64, beta: f64) -> ComplexVector {
    let p = p.value();
    let ra = (p / 2.0).sqrt();
    let rb = ((1.0 - p) / 2.0).sqrt();
    let a = c(ra * alpha.cos(), ra * alpha.sin());
    let b = c(rb * beta.cos(), rb * beta.sin());
    ComplexVector::new(vec![a, b, b.conj(), -a.conj()])
}

/// Projector onto [`partial_entangled_vector`].
pub fn partial_entangled(p: CorrelationParam, alpha: f64, beta: f64) -> TwoQubitState {
    TwoQubitState::from_vector(&partial_entangled_vector(p, alpha, beta))
        .expect("balance amplitudes are unit norm")
}

/// S(rho) = -Tr rho ln rho in nats, with 0 ln 0 = 0.
pub fn von_neumann_entropy(rho: &TwoQubitState) -> f64 {
    rho.eigenvalues()
        .iter()
        .filter(|&&lambda| lambda >= EIGEN_CLAMP)
        .map(|&lambda| -lambda * lambda.ln())
        .sum()
}

/// Binary entropy h(p) = -p ln p - (1-p) ln(1-p) in nats.
pub fn binary_entropy(p: f64) -> Result<f64, StateError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(StateError::Domain(format!(
            "binary entropy argument {p} outside [0, 1]"
        )));
    }
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Entropy defect S(mixture) - sum_i w_i S(rho_i), the information in nats
/// associated with selecting a subensemble.
pub fn entropy_defect(ensemble: &Ensemble) -> f64 {
    let mixed = von_neumann_entropy(&ensemble.mixture());
    let average: f64 = ensemble
        .members()
        .iter()
        .map(|(w, rho)| w * von_neumann_entropy(rho))
        .sum();
    mixed - average
}

/// Entropy defect against the equilibrium state I/4: 2 ln 2 - S(rho).
pub fn defect_vs_equilibrium(rho: &TwoQubitState) -> f64 {
    TWO_LN_2 - von_neumann_entropy(rho)
}

/// Presentation helper: convert an entropy or defect from nats to bits.
/// Core quantities stay in nats everywhere.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// U_1 = I (x) sigma_x, flipping qubit B: swaps |x0> <-> |x1>.
pub fn u1_flip_b() -> ComplexMatrix {
    ComplexMatrix::identity(2).tensor(&sigma_x())
}

/// The unitary that swaps Phi+ <-> Phi- and Psi+ <-> Psi-.
///
/// Built as a change of basis to the Bell basis, a pairwise swap, and the
/// change back.
pub fn u2_pair_swap() -> ComplexMatrix {
    let mut bell_basis = ComplexMatrix::zeros(4);
    for (col, kind) in BellKind::ALL.iter().enumerate() {
        let v = bell_vector(*kind);
        for row in 0..4 {
            bell_basis.set(row, col, v.get(row));
        }
    }
    // Swap (Phi+, Phi-) and (Psi+, Psi-) in the Bell-ordered basis.
    let mut swap = ComplexMatrix::zeros(4);
    swap.set(0, 1, c(1.0, 0.0));
    swap.set(1, 0, c(1.0, 0.0));
    swap.set(2, 3, c(1.0, 0.0));
    swap.set(3, 2, c(1.0, 0.0));
    bell_basis.matmul(&swap).matmul(&bell_basis.adjoint())
}

/// A unitary mapping one pure state onto another.
///
/// Both vectors must be unit norm within 1e-10; the result satisfies
/// U from = to up to completion roundoff (~1e-15).
pub fn synthesize_unitary(
    from: &ComplexVector,
    to: &ComplexVector,
) -> Result<ComplexMatrix, StateError> {
    for v in [from, to] {
        let dev = (v.norm() - 1.0).abs();
        if dev > 1e-10 {
            return Err(StateError::NotNormalized(dev));
        }
    }
    let u_from = complete_to_unitary(from.dim(), std::slice::from_ref(from))?;
    let u_to = complete_to_unitary(to.dim(), std::slice::from_ref(to))?;
    Ok(u_to.matmul(&u_from.adjoint()))
}

/// True when Tr(rho_a rho_b) <= tol: the licensing check for declaring a
/// semipermeable membrane between the two states.
pub fn orthogonal_supports(rho_a: &TwoQubitState, rho_b: &TwoQubitState, tol: f64) -> bool {
    rho_a.matrix().matmul(rho_b.matrix()).trace().re <= tol
}
