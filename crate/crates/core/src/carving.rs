//! Heralded state carving on a register of cavity-coupled (|1⟩) and
//! uncoupled (|0⟩) atoms.
//!
//! A detected reflected photon multiplies every basis component by the
//! reflection amplitude of the cavity loaded with exactly the coupled atoms of
//! that component, at their lattice positions. Uncoupled atoms are invisible
//! to the cavity. Repeating measurements at detunings where unwanted coupled
//! counts reflect weakly distils the Bell or W state.
//!
//! Basis index convention: atom 1 (lattice site 0) is the most significant
//! bit, so `|01⟩` (atom 2 coupled) has index 1.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::r_no_atoms;
use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};
use crate::solver::steady_state_at_sites;
use crate::spectrum::dip_detunings;

/// Largest register held densely.
pub const MAX_QUBITS: usize = 12;

/// Herald probabilities below this end the protocol.
pub const EXTINCTION_THRESHOLD: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitRegister {
    m: usize,
    amplitudes: Vec<Complex64>,
}

impl QubitRegister {
    /// |0…0⟩ on `m` atoms.
    pub fn ground(m: usize) -> Result<Self> {
        Self::basis(m, 0)
    }

    pub fn basis(m: usize, index: usize) -> Result<Self> {
        check_size(m)?;
        if index >= 1 << m {
            return Err(Error::InvalidRegister(format!("basis index {index} out of range for {m} qubits")));
        }
        let mut amplitudes = vec![ZERO; 1 << m];
        amplitudes[index] = ONE;
        Ok(QubitRegister { m, amplitudes })
    }

    /// Wraps raw amplitudes and normalizes them.
    pub fn from_amplitudes(m: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_size(m)?;
        if amplitudes.len() != 1 << m {
            return Err(Error::InvalidRegister(format!(
                "{} amplitudes given for {m} qubits",
                amplitudes.len()
            )));
        }
        let mut reg = QubitRegister { m, amplitudes };
        let norm = reg.norm_sqr();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidRegister("state has zero or non-finite norm".into()));
        }
        reg.scale(1.0 / norm.sqrt());
        Ok(reg)
    }

    /// (Σ_m |0…1_m…0⟩)/√M. For M = 2 this is the Bell state (|01⟩+|10⟩)/√2.
    pub fn w_state(m: usize) -> Result<Self> {
        check_size(m)?;
        let mut amplitudes = vec![ZERO; 1 << m];
        for k in 0..m {
            amplitudes[1 << k] = ONE;
        }
        Self::from_amplitudes(m, amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of a bit string such as `"0110"`, atom 1 first.
    pub fn amplitude(&self, bits: &str) -> Result<Complex64> {
        if bits.len() != self.m || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidRegister(format!("`{bits}` is not a {}-bit string", self.m)));
        }
        let index = usize::from_str_radix(bits, 2).expect("checked binary digits");
        Ok(self.amplitudes[index])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Total weight on basis states with exactly `count` coupled atoms.
    pub fn weight_with_coupled_count(&self, count: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() as usize == count)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            / self.norm_sqr()
    }

    /// Lattice sites of the coupled atoms in basis state `index`.
    pub fn coupled_sites(&self, index: usize) -> Vec<usize> {
        (0..self.m).filter(|&site| index >> (self.m - 1 - site) & 1 == 1).collect()
    }

    fn scale(&mut self, factor: f64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }
}

fn check_size(m: usize) -> Result<()> {
    if m == 0 || m > MAX_QUBITS {
        return Err(Error::InvalidRegister(format!("register size must be 1..={MAX_QUBITS}, got {m}")));
    }
    Ok(())
}

/// Applies the same single-qubit rotation to every atom:
///
/// ```text
/// |0⟩ → cos(θ/2)|0⟩ − e^{iφ} sin(θ/2)|1⟩
/// |1⟩ → e^{−iφ} sin(θ/2)|0⟩ + cos(θ/2)|1⟩
/// ```
///
/// so θ = π/2, φ = 0 takes |0⟩ to (|0⟩ − |1⟩)/√2.
pub fn global_rotation(state: &QubitRegister, theta: f64, phi: f64) -> QubitRegister {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    let u00 = c;
    let u01 = Complex64::from_polar(s, -phi);
    let u10 = -Complex64::from_polar(s, phi);
    let u11 = c;

    let mut amplitudes = state.amplitudes.clone();
    for site in 0..state.m {
        let bit = 1 << (state.m - 1 - site);
        for i in 0..amplitudes.len() {
            if i & bit == 0 {
                let (a0, a1) = (amplitudes[i], amplitudes[i | bit]);
                amplitudes[i] = u00 * a0 + u01 * a1;
                amplitudes[i | bit] = u10 * a0 + u11 * a1;
            }
        }
    }
    QubitRegister { m: state.m, amplitudes }
}

/// Reflection amplitude of the cavity holding only the atoms at `coupled_sites`.
pub fn component_reflection(coupled_sites: &[usize], template: &SystemParams, delta: f64) -> Result<Complex64> {
    if coupled_sites.is_empty() {
        return Ok(r_no_atoms(delta, template.kappa_wg(), template.kappa_sc()));
    }
    steady_state_at_sites(template, &DriveParams::new(delta), coupled_sites).map(|s| s.r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementOutcome {
    pub post_state: QubitRegister,
    pub herald_probability: f64,
    /// Reflection amplitude applied to each basis index.
    pub per_component_r: BTreeMap<usize, Complex64>,
}

/// One heralded reflection at probe detuning `delta`.
///
/// Components whose coupled atoms form the same geometry up to translation
/// share a single solve.
pub fn carving_measurement(state: &QubitRegister, template: &SystemParams, delta: f64) -> Result<MeasurementOutcome> {
    let template = template.validated()?;
    let mut by_geometry: HashMap<Vec<usize>, Complex64> = HashMap::new();
    let mut per_component_r = BTreeMap::new();
    let mut amplitudes = state.amplitudes.clone();
    for (index, amp) in amplitudes.iter_mut().enumerate() {
        let sites = state.coupled_sites(index);
        let origin = sites.first().copied().unwrap_or(0);
        let shape: Vec<usize> = sites.iter().map(|s| s - origin).collect();
        let r = match by_geometry.get(&shape) {
            Some(&r) => r,
            None => {
                let r = component_reflection(&shape, &template, delta)?;
                by_geometry.insert(shape, r);
                r
            }
        };
        per_component_r.insert(index, r);
        *amp *= r;
    }
    let herald_probability = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>() / state.norm_sqr();
    if !(herald_probability >= EXTINCTION_THRESHOLD) {
        return Err(Error::ProtocolExtinguished {
            probability: herald_probability,
            measurement: 1,
        });
    }
    let post_state = QubitRegister::from_amplitudes(state.m, amplitudes)?;
    Ok(MeasurementOutcome {
        post_state,
        herald_probability,
        per_component_r,
    })
}

/// |⟨target|state⟩|² for normalized registers.
pub fn fidelity(state: &QubitRegister, target: &QubitRegister) -> Result<f64> {
    if state.m != target.m {
        return Err(Error::DimensionMismatch {
            expected: target.m,
            found: state.m,
        });
    }
    let overlap: Complex64 = target
        .amplitudes
        .iter()
        .zip(&state.amplitudes)
        .map(|(t, s)| t.conj() * s)
        .sum();
    Ok(overlap.norm_sqr() / (state.norm_sqr() * target.norm_sqr()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    Bell,
    W(usize),
}

impl Target {
    pub fn for_register(m: usize) -> Self {
        if m == 2 {
            Target::Bell
        } else {
            Target::W(m)
        }
    }

    pub fn state(self) -> Result<QubitRegister> {
        match self {
            Target::Bell => QubitRegister::w_state(2),
            Target::W(m) => QubitRegister::w_state(m),
        }
    }
}

/// Which side of resonance to use when a dip comes in a ± pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum DipSide {
    #[default]
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolPlan {
    pub m: usize,
    pub target: Target,
    /// Probe detunings in order, units of γ.
    pub steps: Vec<f64>,
}

impl ProtocolPlan {
    /// M/2 for even M, (M+1)/2 for odd M.
    pub fn expected_steps(m: usize) -> usize {
        m.div_ceil(2)
    }
}

pub fn plan_protocol(m: usize, template: &SystemParams) -> Result<ProtocolPlan> {
    plan_protocol_with(m, template, DipSide::Positive)
}

/// First step on resonance, where every even coupled count reflects like the
/// empty cavity. Then, for each odd count n = 3, 5, …, M, the deepest dip of
/// the n-atom chain on the requested side of resonance.
pub fn plan_protocol_with(m: usize, template: &SystemParams, side: DipSide) -> Result<ProtocolPlan> {
    if m < 2 {
        return Err(Error::InvalidRegister(format!("carving needs M ≥ 2, got {m}")));
    }
    check_size(m)?;
    let template = template.validated()?;
    let mut steps = vec![0.0];
    for n in (3..=m).step_by(2) {
        let dips = dip_detunings(&template, n)?;
        let on_side = dips.into_iter().filter(|&d| match side {
            DipSide::Positive => d > 0.0,
            DipSide::Negative => d < 0.0,
        });
        let mut best: Option<(f64, f64)> = None;
        for d in on_side {
            let r = component_reflection(&(0..n).collect::<Vec<_>>(), &template, d)?.norm_sqr();
            if best.is_none_or(|(_, rb)| r < rb) {
                best = Some((d, r));
            }
        }
        steps.push(best.ok_or(Error::NoDipFound { n_coupled: n })?.0);
    }
    Ok(ProtocolPlan {
        m,
        target: Target::for_register(m),
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    /// Plan step, from 1.
    pub step: usize,
    /// Repetition within the step, from 1.
    pub repetition: usize,
    pub delta: f64,
    pub herald_probability: f64,
    pub cumulative_probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub plan: ProtocolPlan,
    pub final_state: QubitRegister,
    pub cumulative_herald_probability: f64,
    /// One record per measurement.
    pub trace: Vec<StepRecord>,
}

impl ProtocolRun {
    pub fn fidelity_vs_step(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.fidelity).collect()
    }
}

pub fn run_protocol(m: usize, template: &SystemParams, repetitions_per_step: usize) -> Result<ProtocolRun> {
    let plan = plan_protocol(m, template)?;
    run_plan(&plan, template, repetitions_per_step)
}

/// |0…0⟩ → global π/2 rotation → every plan step measured
/// `repetitions_per_step` times.
pub fn run_plan(plan: &ProtocolPlan, template: &SystemParams, repetitions_per_step: usize) -> Result<ProtocolRun> {
    if repetitions_per_step == 0 {
        return Err(Error::Domain("at least one repetition per step is required".into()));
    }
    let target = plan.target.state()?;
    let mut state = global_rotation(&QubitRegister::ground(plan.m)?, FRAC_PI_2, 0.0);
    let mut cumulative = 1.0;
    let mut trace = Vec::new();
    for (k, &delta) in plan.steps.iter().enumerate() {
        for rep in 1..=repetitions_per_step {
            let outcome = carving_measurement(&state, template, delta).map_err(|e| match e {
                Error::ProtocolExtinguished { probability, .. } => Error::ProtocolExtinguished {
                    probability: probability * cumulative,
                    measurement: trace.len() + 1,
                },
                other => other,
            })?;
            cumulative *= outcome.herald_probability;
            state = outcome.post_state;
            trace.push(StepRecord {
                step: k + 1,
                repetition: rep,
                delta,
                herald_probability: outcome.herald_probability,
                cumulative_probability: cumulative,
                fidelity: fidelity(&state, &target)?,
            });
        }
    }
    Ok(ProtocolRun {
        plan: plan.clone(),
        final_state: state,
        cumulative_herald_probability: cumulative,
        trace,
    })
}
