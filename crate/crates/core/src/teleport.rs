//! Branch-explicit teleportation of a qubit through a damped resource, with
//! optional weak measurements and reversals.
//!
//! Register layout: qubit 0 is the input, qubits 1 and 2 are the resource
//! halves held by Alice and Bob. The Bell measurement acts on qubits 0 and 1.
//! Measurement outcomes are carried as unnormalized states; a branch's trace
//! is its joint probability.

use serde::{Deserialize, Serialize};

use crate::audit::optimize::{optimize_pr_numeric, Objective};
use crate::complexalg::{partial_trace, tensor, Matrix};
use crate::error::{Error, Result};
use crate::formulas::{self, PaperBloch, TwoSidedParams};
use crate::qfi::qfi_sld;
use crate::quantum::{
    ad_channel, apply_channel, apply_measurement, bell_state, bloch_of, input_state, partial_measurement,
    reversal_operator, BellState, BlochVector, DensityMatrix, MeasurementOperator, Pauli,
};
use crate::scalar::Real;

/// Branches lighter than this are dropped from the average.
pub const BRANCH_TRACE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Plain teleportation through the damped resource.
    #[serde(rename = "ad")]
    Ad,
    /// Weak measurement on Bob's qubit after the damping.
    #[serde(rename = "a")]
    A,
    /// Weak measurement before the damping, reversal after it.
    #[serde(rename = "b")]
    B,
    /// Scheme B on both resource qubits, each with its own damping.
    #[serde(rename = "two-sided")]
    TwoSided,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Ad => "ad",
            Scheme::A => "a",
            Scheme::B => "b",
            Scheme::TwoSided => "two-sided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrPolicy {
    Fixed,
    PaperOptimal,
    NumericOptimal,
}

/// Where Bob's post-damping operator acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// On the resource, before the Bell measurement.
    OnResource,
    /// On Bob's qubit after the Bell measurement, before the Pauli correction.
    PostBellPreCorrection,
    /// After the Pauli correction.
    PostBellPostCorrection,
}

/// One protocol run. Index 1 refers to the resource qubit Alice keeps and
/// index 2 to the one sent to Bob; the one-sided schemes read only the
/// index-2 fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig<T> {
    pub scheme: Scheme,
    pub theta: T,
    pub phi: T,
    pub gamma1: T,
    pub gamma2: T,
    pub p1: T,
    pub p2: T,
    pub pr1: T,
    pub pr2: T,
    pub pr_policy: PrPolicy,
    pub placement: Placement,
}

impl<T: Real> SchemeConfig<T> {
    /// Noise-free, measurement-free configuration.
    pub fn new(scheme: Scheme, theta: T, phi: T) -> Self {
        let z = T::zero();
        Self {
            scheme,
            theta,
            phi,
            gamma1: z,
            gamma2: z,
            p1: z,
            p2: z,
            pr1: z,
            pr2: z,
            pr_policy: PrPolicy::Fixed,
            placement: Placement::OnResource,
        }
    }

    /// Sets the damping of both resource qubits.
    pub fn gamma(mut self, gamma: T) -> Self {
        self.gamma1 = gamma;
        self.gamma2 = gamma;
        self
    }

    /// Sets the prior measurement strength on both resource qubits.
    pub fn p(mut self, p: T) -> Self {
        self.p1 = p;
        self.p2 = p;
        self
    }

    /// Sets the post-measurement/reversal strength on both resource qubits.
    pub fn pr(mut self, pr: T) -> Self {
        self.pr1 = pr;
        self.pr2 = pr;
        self
    }

    pub fn policy(mut self, policy: PrPolicy) -> Self {
        self.pr_policy = policy;
        self
    }

    pub fn placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn with_phi(mut self, phi: T) -> Self {
        self.phi = phi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta", self.theta), ("phi", self.phi)] {
            if !v.is_finite() {
                return Err(Error::Argument(format!("{name} must be finite")));
            }
        }
        for (name, v) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("p1", self.p1),
            ("p2", self.p2),
            ("pr1", self.pr1),
            ("pr2", self.pr2),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::Argument(format!("{name} = {} must lie in [0, 1]", v.as_f64())));
            }
        }
        if self.scheme == Scheme::Ad && self.pr_policy != PrPolicy::Fixed {
            return Err(Error::Config("scheme ad has no measurement strength to optimize".into()));
        }
        Ok(())
    }

    pub fn two_sided_params(&self) -> TwoSidedParams<T> {
        TwoSidedParams {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            p1: self.p1,
            p2: self.p2,
            pr1: self.pr1,
            pr2: self.pr2,
        }
    }
}

/// Pauli frame applied after each Bell outcome for a `(|00> + |11>)/sqrt(2)` resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Correction {
    I,
    Z,
    X,
    /// `Z X`: X first, then Z.
    ZX,
}

impl Correction {
    pub fn matrix<T: Real>(self) -> Matrix<T> {
        match self {
            Correction::I => Pauli::I.matrix(),
            Correction::Z => Pauli::Z.matrix(),
            Correction::X => Pauli::X.matrix(),
            Correction::ZX => &Pauli::Z.matrix() * &Pauli::X.matrix(),
        }
    }
}

/// Bell projectors on two qubits with their corrections, in the order
/// phi+, phi-, psi+, psi-.
pub fn bell_projectors_and_corrections<T: Real>() -> [(BellState, Matrix<T>, Correction); 4] {
    let corr = [Correction::I, Correction::Z, Correction::X, Correction::ZX];
    let mut i = 0;
    BellState::ALL.map(|b| {
        let c = corr[i];
        i += 1;
        (b, bell_state::<T>(b).into_matrix(), c)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome<T> {
    pub bell: BellState,
    pub bell_index: usize,
    /// Trace of `bob_state`.
    pub joint_probability: T,
    /// Bob's qubit, unnormalized.
    pub bob_state: DensityMatrix<T>,
    pub correction: Correction,
    pub corrected: bool,
}

impl<T: Real> BranchOutcome<T> {
    fn conjugate(&mut self, op: &Matrix<T>) -> Result<()> {
        self.bob_state = self.bob_state.conjugate_by(op)?;
        self.joint_probability = self.bob_state.trace();
        Ok(())
    }

    /// Applies the branch's Pauli correction.
    pub fn apply_correction(&mut self) -> Result<()> {
        if !self.corrected {
            self.conjugate(&self.correction.matrix())?;
            self.corrected = true;
        }
        Ok(())
    }

    /// Applies an operator (e.g. a weak measurement) to Bob's qubit.
    pub fn apply_operator(&mut self, op: &Matrix<T>) -> Result<()> {
        self.conjugate(op)
    }
}

/// Projects qubits 0 and 1 of `input ⊗ resource` onto each Bell state and
/// reduces to Bob's qubit. Corrections are not applied.
pub fn teleport_branches<T: Real>(
    input: &DensityMatrix<T>,
    resource: &DensityMatrix<T>,
) -> Result<[BranchOutcome<T>; 4]> {
    if input.n_qubits() != 1 || resource.n_qubits() != 2 {
        return Err(Error::Argument(format!(
            "teleportation needs a 1-qubit input and 2-qubit resource, got {} and {}",
            input.n_qubits(),
            resource.n_qubits()
        )));
    }
    let joint = tensor(input.matrix(), resource.matrix())?;
    let table = bell_projectors_and_corrections::<T>();
    let mut out = Vec::with_capacity(4);
    for (index, (bell, projector, correction)) in table.into_iter().enumerate() {
        let p = tensor(&projector, &Matrix::identity(2))?;
        let projected = p.sandwich(&joint)?;
        let bob = partial_trace(&projected, &[2], 3)?;
        let bob_state = DensityMatrix::new(bob)?;
        out.push(BranchOutcome {
            bell,
            bell_index: index,
            joint_probability: bob_state.trace(),
            bob_state,
            correction,
            corrected: false,
        });
    }
    Ok(out.try_into().expect("four Bell branches"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Averaged<T> {
    pub state: DensityMatrix<T>,
    pub success_probability: T,
    pub notes: Vec<String>,
}

/// Probability-weighted mixture of the given branches. Every branch is kept;
/// branches with trace below [`BRANCH_TRACE_FLOOR`] are skipped with a note.
pub fn averaged_output<T: Real>(branches: &[BranchOutcome<T>]) -> Result<Averaged<T>> {
    let floor = T::lit(BRANCH_TRACE_FLOOR);
    let mut sum = Matrix::zeros(2, 2);
    let mut success = T::zero();
    let mut notes = Vec::new();
    for b in branches {
        let tr = b.bob_state.trace();
        if tr < floor {
            notes.push(format!("branch {} dropped: trace {:e}", b.bell.label(), tr.as_f64()));
            continue;
        }
        sum = &sum + b.bob_state.matrix();
        success = success + tr;
    }
    if success <= T::zero() {
        return Err(Error::DegenerateRun("every Bell branch has zero probability".into()));
    }
    let state = DensityMatrix::new(sum.scale_real(T::one() / success))?;
    Ok(Averaged { state, success_probability: success, notes })
}

fn measure<T: Real>(rho: &DensityMatrix<T>, m: &MeasurementOperator<T>) -> Result<DensityMatrix<T>> {
    Ok(apply_measurement(rho, m)?.0)
}

/// Bob's post-damping operator as a bare 2x2 matrix: `M0(pr2)` for scheme A,
/// the reversal for B and the two-sided scheme.
fn bob_post_operator<T: Real>(cfg: &SchemeConfig<T>) -> Result<Option<Matrix<T>>> {
    Ok(match cfg.scheme {
        Scheme::Ad => None,
        Scheme::A => Some(partial_measurement(cfg.pr2, 0, 1)?.0.single_qubit().clone()),
        Scheme::B | Scheme::TwoSided => Some(reversal_operator(cfg.pr2, 0, 1)?.single_qubit().clone()),
    })
}

/// The shared two-qubit state right before the Bell measurement (unnormalized
/// when a weak measurement has been applied).
pub fn prepare_resource<T: Real>(cfg: &SchemeConfig<T>) -> Result<DensityMatrix<T>> {
    let mut rho = bell_state::<T>(BellState::PhiPlus);
    let on_resource = cfg.placement == Placement::OnResource;
    match cfg.scheme {
        Scheme::Ad => {
            rho = apply_channel(&rho, &ad_channel(cfg.gamma2, 1, 2)?)?;
        }
        Scheme::A => {
            rho = apply_channel(&rho, &ad_channel(cfg.gamma2, 1, 2)?)?;
            if on_resource {
                rho = measure(&rho, &partial_measurement(cfg.pr2, 1, 2)?.0)?;
            }
        }
        Scheme::B => {
            rho = measure(&rho, &partial_measurement(cfg.p2, 1, 2)?.0)?;
            rho = apply_channel(&rho, &ad_channel(cfg.gamma2, 1, 2)?)?;
            if on_resource {
                rho = measure(&rho, &reversal_operator(cfg.pr2, 1, 2)?)?;
            }
        }
        Scheme::TwoSided => {
            rho = measure(&rho, &partial_measurement(cfg.p1, 0, 2)?.0)?;
            rho = measure(&rho, &partial_measurement(cfg.p2, 1, 2)?.0)?;
            rho = apply_channel(&rho, &ad_channel(cfg.gamma1, 0, 2)?)?;
            rho = apply_channel(&rho, &ad_channel(cfg.gamma2, 1, 2)?)?;
            // Alice reverses before her Bell measurement whatever Bob does
            rho = measure(&rho, &reversal_operator(cfg.pr1, 0, 2)?)?;
            if on_resource {
                rho = measure(&rho, &reversal_operator(cfg.pr2, 1, 2)?)?;
            }
        }
    }
    Ok(rho)
}

/// Everything the circuit produces for one configuration, before any QFI work.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation<T> {
    pub resource: DensityMatrix<T>,
    /// Corrected branches.
    pub branches: [BranchOutcome<T>; 4],
    pub averaged: Averaged<T>,
}

/// Runs the circuit for a configuration whose strengths are already fixed
/// (the policy field is ignored).
pub fn simulate<T: Real>(cfg: &SchemeConfig<T>) -> Result<Simulation<T>> {
    cfg.validate_ranges()?;
    let resource = prepare_resource(cfg)?;
    let input = input_state(cfg.theta, cfg.phi);
    let mut branches = teleport_branches(&input, &resource)?;
    let post = if cfg.placement == Placement::OnResource { None } else { bob_post_operator(cfg)? };
    for b in branches.iter_mut() {
        if let (Some(op), Placement::PostBellPreCorrection) = (&post, cfg.placement) {
            b.apply_operator(op)?;
        }
        b.apply_correction()?;
        if let (Some(op), Placement::PostBellPostCorrection) = (&post, cfg.placement) {
            b.apply_operator(op)?;
        }
    }
    let averaged = averaged_output(&branches).map_err(|e| match e {
        Error::DegenerateRun(msg) => Error::DegenerateRun(format!(
            "{msg} (scheme {}, gamma2={}, p2={}, pr2={})",
            cfg.scheme.label(),
            cfg.gamma2.as_f64(),
            cfg.p2.as_f64(),
            cfg.pr2.as_f64()
        )),
        other => other,
    })?;
    Ok(Simulation { resource, branches, averaged })
}

impl<T: Real> SchemeConfig<T> {
    fn validate_ranges(&self) -> Result<()> {
        let mut relaxed = *self;
        relaxed.pr_policy = PrPolicy::Fixed;
        relaxed.validate()
    }
}

/// `phi -> averaged teleported state` for a fixed configuration.
pub fn output_family<T: Real>(cfg: SchemeConfig<T>) -> impl Fn(T) -> Result<DensityMatrix<T>> {
    move |phi| Ok(simulate(&cfg.with_phi(phi))?.averaged.state)
}

/// Published predictions for a configuration, where the literature gives one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperPrediction<T> {
    pub bloch: Option<PaperBloch<T>>,
    pub qfi: T,
    /// Only defined at the published optimal strength.
    pub success_probability: Option<T>,
}

/// Closed-form counterpart of `cfg`. Schemes A and B report their success
/// probability only under the paper-optimal policy.
pub fn paper_prediction<T: Real>(cfg: &SchemeConfig<T>) -> Result<PaperPrediction<T>> {
    let at_optimum = cfg.pr_policy == PrPolicy::PaperOptimal;
    Ok(match cfg.scheme {
        Scheme::Ad => PaperPrediction {
            bloch: None,
            qfi: formulas::f_ad(cfg.theta, cfg.gamma2),
            success_probability: Some(T::one()),
        },
        Scheme::A => {
            let (bloch, qfi) = formulas::scheme_a(cfg.theta, cfg.phi, cfg.gamma2, cfg.pr2)?;
            let success = at_optimum.then(|| formulas::scheme_a_probabilities(cfg.gamma2).p_qfi);
            PaperPrediction { bloch: Some(bloch), qfi, success_probability: success }
        }
        Scheme::B => {
            let (bloch, qfi) = formulas::scheme_b(cfg.theta, cfg.phi, cfg.gamma2, cfg.p2, cfg.pr2)?;
            let success = at_optimum.then(|| formulas::scheme_b_probabilities(cfg.gamma2, cfg.p2).p_qfi);
            PaperPrediction { bloch: Some(bloch), qfi, success_probability: success }
        }
        Scheme::TwoSided => {
            let (bloch, qfi) = formulas::two_sided(cfg.theta, cfg.phi, &cfg.two_sided_params())?;
            PaperPrediction { bloch: Some(bloch), qfi, success_probability: None }
        }
    })
}

/// Replaces the policy by a concrete strength.
pub fn resolve_policy<T: Real>(cfg: &SchemeConfig<T>) -> Result<SchemeConfig<T>> {
    cfg.validate()?;
    let mut out = *cfg;
    match cfg.pr_policy {
        PrPolicy::Fixed => {}
        PrPolicy::PaperOptimal => {
            let pr = match cfg.scheme {
                Scheme::Ad => unreachable!("rejected by validate"),
                Scheme::A => formulas::scheme_a_optimal(cfg.gamma2).0,
                Scheme::B => formulas::scheme_b_optimal(cfg.gamma2, cfg.p2).0,
                Scheme::TwoSided => {
                    if cfg.gamma1 != cfg.gamma2 || cfg.p1 != cfg.p2 {
                        return Err(Error::Config(
                            "the published two-sided optimum needs gamma1 = gamma2 and p1 = p2".into(),
                        ));
                    }
                    formulas::two_sided_symmetric_optimal(cfg.gamma2, cfg.p2).0
                }
            };
            out = out.pr(pr.max(T::zero()).min(T::one()));
        }
        PrPolicy::NumericOptimal => {
            let opt = optimize_pr_numeric(cfg, Objective::Simulation)?;
            out = out.pr(opt.x_star);
        }
    }
    if cfg.scheme != Scheme::TwoSided && cfg.pr_policy != PrPolicy::Fixed {
        // one-sided schemes only read pr2; keep pr1 as given
        out.pr1 = cfg.pr1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult<T> {
    /// Configuration with the policy resolved to a concrete strength.
    pub config: SchemeConfig<T>,
    pub branches: [BranchOutcome<T>; 4],
    pub averaged_state: DensityMatrix<T>,
    pub success_probability: T,
    pub bloch: BlochVector<T>,
    pub qfi_simulated: T,
    pub paper: Option<PaperPrediction<T>>,
    pub notes: Vec<String>,
}

impl<T: Real> SchemeResult<T> {
    pub fn qfi_paper(&self) -> Option<T> {
        self.paper.map(|p| p.qfi)
    }
}

/// Resolves the policy, simulates, and estimates the teleported QFI with the
/// SLD estimator.
pub fn run_scheme<T: Real>(cfg: &SchemeConfig<T>) -> Result<SchemeResult<T>> {
    let resolved = resolve_policy(cfg)?;
    let sim = simulate(&resolved)?;
    let bloch = bloch_of(&sim.averaged.state, true)?;
    let qfi = qfi_sld(&output_family(resolved), resolved.phi, T::fd_step())?;
    let mut notes = sim.averaged.notes.clone();
    let paper = match paper_prediction(&resolved) {
        Ok(p) => Some(p),
        Err(e) => {
            notes.push(format!("no closed form: {e}"));
            None
        }
    };
    Ok(SchemeResult {
        config: resolved,
        branches: sim.branches,
        averaged_state: sim.averaged.state,
        success_probability: sim.averaged.success_probability,
        bloch,
        qfi_simulated: qfi.value,
        paper,
        notes,
    })
}
