//! Preparing-sequence synthesis: the forward construction from the
//! completeness proof, σ-convex combination for mixed targets, the
//! time-reversal construction, concatenation of protocols, and the
//! constant-input protocol — with convergence traces over panels of
//! initial states.

use ndarray::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::linalg;
use crate::stationary;
use crate::tensor::{self, DensityState, DistanceMode, FactorDims};
use crate::transition::{ChainChannel, CouplingModel, KrausChannel};
use crate::{random, tol, Error, Result, C64};

/// One run of chain input: an explicit (possibly entangled) word on a
/// block of slots, or a repeated per-slot input.
#[derive(Clone, Debug)]
pub enum ChainSegment {
    Dense(DensityState),
    Power { base: DensityState, count: usize },
}

impl ChainSegment {
    pub fn n_slots(&self, d: usize) -> usize {
        match self {
            ChainSegment::Dense(s) => {
                debug_assert!(s.dims().chain_dims().iter().all(|&x| x == d));
                s.dims().n_chain()
            }
            ChainSegment::Power { count, .. } => *count,
        }
    }
}

/// Input word θ on C_n, stored as ordered segments (earliest slots
/// first). Constant protocols keep θ_n = input^{⊗n} in factored form so
/// chains far beyond the dense cap stay representable.
#[derive(Clone, Debug)]
pub struct ChainInput {
    pub segments: Vec<ChainSegment>,
}

impl ChainInput {
    pub fn dense(theta: DensityState) -> Self {
        ChainInput {
            segments: vec![ChainSegment::Dense(theta)],
        }
    }

    pub fn power(base: DensityState, count: usize) -> Self {
        ChainInput {
            segments: vec![ChainSegment::Power { base, count }],
        }
    }

    pub fn n_slots(&self, d: usize) -> usize {
        self.segments.iter().map(|s| s.n_slots(d)).sum()
    }

    /// θ' ⊗ (θ'')^{shifted}: the second word acts on the slots after
    /// the first.
    pub fn concat(&self, other: &ChainInput) -> ChainInput {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        ChainInput { segments }
    }

    /// The word read backwards: segment order reversed and every dense
    /// block reversed internally (the automorphism R_n).
    pub fn reversed(&self) -> Result<ChainInput> {
        let mut segments = Vec::with_capacity(self.segments.len());
        for s in self.segments.iter().rev() {
            segments.push(match s {
                ChainSegment::Dense(d) => ChainSegment::Dense(tensor::reverse_chain_state(d)?),
                ChainSegment::Power { base, count } => ChainSegment::Power {
                    base: base.clone(),
                    count: *count,
                },
            });
        }
        Ok(ChainInput { segments })
    }

    /// Dense density on C_n; guarded by the chain cap.
    pub fn to_dense(&self, m: &CouplingModel) -> Result<DensityState> {
        let n = self.n_slots(m.ancilla_dim());
        m.guard_joint_dim(n)?;
        let mut acc: Option<DensityState> = None;
        for seg in &self.segments {
            let next = match seg {
                ChainSegment::Dense(d) => d.clone(),
                ChainSegment::Power { base, count } => {
                    let mut mat = linalg::identity(1);
                    for _ in 0..*count {
                        mat = linalg::kron(&mat.view(), &base.matrix().view());
                    }
                    DensityState::on_chain(mat, m.ancilla_dim(), *count)?
                }
            };
            acc = Some(match acc {
                None => next,
                Some(prev) => {
                    let op = tensor::tensor_states(&prev, &next);
                    DensityState::new(op.matrix().clone(), op.dims().clone(), tol::STRUCTURAL)?
                }
            });
        }
        acc.ok_or_else(|| Error::Invalid("empty chain input".into()))
    }

    /// Spectral factorization (weight, chain vector) of the word; used
    /// by the matrix-free reverse construction. Fails when the retained
    /// rank would exceed `max_rank`.
    pub fn factorize(&self, max_rank: usize) -> Result<Vec<(f64, Array1<C64>)>> {
        let mut out: Vec<(f64, Array1<C64>)> = vec![(1.0, array![C64::new(1.0, 0.0)])];
        for seg in &self.segments {
            let factors: Vec<(f64, Array1<C64>)> = match seg {
                ChainSegment::Dense(d) => {
                    let (vals, vecs) = linalg::eigh(&linalg::hermitize(d.matrix()))?;
                    (0..d.side())
                        .filter(|&k| vals[k] > tol::KRAUS_DROP)
                        .map(|k| (vals[k], vecs.column(k).to_owned()))
                        .collect()
                }
                ChainSegment::Power { base, count } => {
                    let (vals, vecs) = linalg::eigh(&linalg::hermitize(base.matrix()))?;
                    let mut per: Vec<(f64, Array1<C64>)> =
                        vec![(1.0, array![C64::new(1.0, 0.0)])];
                    for _ in 0..*count {
                        let mut next = Vec::new();
                        for (w, v) in &per {
                            for k in 0..base.side() {
                                if vals[k] <= tol::KRAUS_DROP {
                                    continue;
                                }
                                let col = vecs.column(k);
                                let mut nv = Array1::zeros(v.len() * base.side());
                                for (i, &vi) in v.iter().enumerate() {
                                    for (j, &cj) in col.iter().enumerate() {
                                        nv[i * base.side() + j] = vi * cj;
                                    }
                                }
                                next.push((w * vals[k], nv));
                            }
                        }
                        if next.len() > max_rank {
                            return Err(Error::ChainDimExceeded {
                                required: next.len(),
                                cap: max_rank,
                            });
                        }
                        per = next;
                    }
                    per
                }
            };
            let mut next = Vec::with_capacity(out.len() * factors.len());
            for (w, v) in &out {
                for (w2, v2) in &factors {
                    let mut nv = Array1::zeros(v.len() * v2.len());
                    for (i, &vi) in v.iter().enumerate() {
                        for (j, &vj) in v2.iter().enumerate() {
                            nv[i * v2.len() + j] = vi * vj;
                        }
                    }
                    next.push((w * w2, nv));
                }
            }
            if next.len() > max_rank {
                return Err(Error::ChainDimExceeded {
                    required: next.len(),
                    cap: max_rank,
                });
            }
            out = next;
        }
        Ok(out)
    }

    /// Entanglement proxy: the largest von Neumann entropy over
    /// bipartite cuts of the word. Product segments contribute nothing
    /// across their boundaries, so only dense blocks are scanned.
    pub fn max_cut_entropy(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        for seg in &self.segments {
            if let ChainSegment::Dense(s) = seg {
                let n = s.dims().n_chain();
                for cut in 1..n {
                    let keep: Vec<usize> = (1..=cut).collect();
                    let reduced = tensor::partial_trace(s.operator(), &keep)?;
                    worst = worst.max(linalg::von_neumann_entropy(reduced.matrix())?);
                }
            }
        }
        Ok(worst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthMethod {
    Forward,
    Reverse,
    Convex,
    Constant,
    Concatenated,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub sigma_id: String,
    pub trace_distance: f64,
    pub fidelity: f64,
}

/// Per (initial σ, n) distances of the prepared state to the target.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn csv_header() -> Vec<String> {
        ["n", "sigma_id", "trace_distance", "fidelity"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.sigma_id.clone(),
                    format!("{:.17e}", r.trace_distance),
                    format!("{:.17e}", r.fidelity),
                ]
            })
            .collect()
    }

    pub fn rows_at(&self, n: usize) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }
}

/// A synthesized list of chain inputs θ_n together with construction
/// metadata and its convergence trace.
#[derive(Clone, Debug)]
pub struct PreparingSequence {
    pub thetas: Vec<ChainInput>,
    pub n_values: Vec<usize>,
    pub target: DensityState,
    pub method: SynthMethod,
    pub compatible_group: Option<String>,
    /// Forward synthesis: Tr(W_n ρ_{ψ_n} W_n) per retained n.
    pub normalizers: Vec<f64>,
    /// n at which the normalizer vanished and synthesis was skipped.
    pub skipped: Vec<usize>,
    /// Max bipartite cut entropy per θ_n.
    pub entanglement_proxy: Vec<f64>,
    pub trace: ConvergenceTrace,
}

/// Default panel: maximally mixed, 5 Haar-random mixed, 4 random pure
/// states; seeded. Universality reduces to faithful plus pure initial
/// states, which the panel covers.
pub fn default_panel(n: usize, seed: u64) -> Vec<(String, DensityState)> {
    use rand::SeedableRng;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut panel = vec![("mixed".to_string(), DensityState::maximally_mixed(n))];
    for k in 0..5 {
        panel.push((format!("rand-mixed-{k}"), random::random_density(n, &mut rng)));
    }
    for k in 0..4 {
        panel.push((format!("rand-pure-{k}"), random::random_pure(n, &mut rng)));
    }
    panel
}

enum SegmentOp {
    Chain(ChainChannel),
    Repeat(KrausChannel, usize),
}

fn segment_ops(m: &CouplingModel, input: &ChainInput) -> Result<Vec<SegmentOp>> {
    input
        .segments
        .iter()
        .map(|seg| match seg {
            ChainSegment::Dense(theta) => Ok(SegmentOp::Chain(ChainChannel::new(m, theta)?)),
            ChainSegment::Power { base, count } => Ok(SegmentOp::Repeat(
                m.transition_channel_with_input(base)?,
                *count,
            )),
        })
        .collect()
}

fn apply_segment_ops(ops: &[SegmentOp], sigma: &DensityState) -> Result<DensityState> {
    let mut state = sigma.clone();
    for op in ops {
        state = match op {
            SegmentOp::Chain(ch) => ch.apply(&state)?,
            SegmentOp::Repeat(ch, count) => {
                let mut s = state;
                for _ in 0..*count {
                    s = ch.apply_pre_state(&s)?;
                }
                s
            }
        };
    }
    Ok(state)
}

/// Density of (σ ⊗ θ)J_n for a segmented input word; segment staging is
/// the exact composition identity for chain words.
pub fn evolve_chain_input(
    m: &CouplingModel,
    sigma: &DensityState,
    input: &ChainInput,
) -> Result<DensityState> {
    let ops = segment_ops(m, input)?;
    apply_segment_ops(&ops, sigma)
}

/// Evaluates the sequence on a panel of initial states.
pub fn run_panel(
    m: &CouplingModel,
    seq: &PreparingSequence,
    panel: &[(String, DensityState)],
) -> Result<ConvergenceTrace> {
    let mut rows = Vec::new();
    for (idx, theta) in seq.thetas.iter().enumerate() {
        let n = seq.n_values[idx];
        let ops = segment_ops(m, theta)?;
        for (id, sigma) in panel {
            let prepared = apply_segment_ops(&ops, sigma)?;
            rows.push(TraceRow {
                n,
                sigma_id: id.clone(),
                trace_distance: tensor::state_distance(
                    &prepared,
                    &seq.target,
                    DistanceMode::Trace,
                )?,
                fidelity: tensor::state_distance(&prepared, &seq.target, DistanceMode::Fidelity)?,
            });
        }
    }
    Ok(ConvergenceTrace { rows })
}

/// W_n = Q_nJ_n(p_ξ), assembled matrix-free from the columns
/// U_n*(ξ⊗|c⟩).
fn forward_operator(m: &CouplingModel, xi: &ArrayView1<C64>, n: usize) -> Result<Array2<C64>> {
    let nn = m.system_dim();
    let chain = m.guard_joint_dim(n)? / nn;
    let mut y = Array2::<C64>::zeros((nn * chain, chain));
    for s in 0..nn {
        for c in 0..chain {
            y[[s * chain + c, c]] = xi[s];
        }
    }
    m.apply_chain_gates(&mut y, n, true)?;
    // Q_n(YY*) = Σ_t G_t·C_t* with G_s the system blocks of Y and
    // C_t = Σ_s conj(ρ_φ[s,t])·G_s.
    let rho = m.phi().matrix();
    let mut out = Array2::<C64>::zeros((chain, chain));
    for t in 0..nn {
        let mut c_t = Array2::<C64>::zeros((chain, chain));
        for s in 0..nn {
            let w = rho[[s, t]].conj();
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let g_s = y.slice(s![s * chain..(s + 1) * chain, ..]);
            c_t.zip_mut_with(&g_s, |o, &v| *o += w * v);
        }
        let g_t = y.slice(s![t * chain..(t + 1) * chain, ..]).to_owned();
        out += &g_t.dot(&linalg::adjoint(&c_t.view()));
    }
    Ok(linalg::hermitize(&out))
}

/// Forward synthesis of the vector-state target ω_ξ: θ_n is the
/// normalization of ψ_n(W_n · c · W_n) with W_n = Q_nJ_n(p_ξ). The same
/// sequence serves every initial state.
pub fn synth_forward(
    m: &CouplingModel,
    xi: &ArrayView1<C64>,
    n_max: usize,
    panel_seed: u64,
) -> Result<PreparingSequence> {
    let nn = m.system_dim();
    if xi.len() != nn {
        return Err(Error::DimMismatch("target vector".into()));
    }
    let norm: f64 = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol::STRUCTURAL {
        return Err(Error::Invalid(format!("‖ξ‖ = {norm} ≠ 1")));
    }
    let target = DensityState::pure(xi, FactorDims::system_only(nn))?;

    let mut thetas = Vec::new();
    let mut n_values = Vec::new();
    let mut normalizers = Vec::new();
    let mut skipped = Vec::new();
    let mut entanglement_proxy = Vec::new();
    for n in 1..=n_max {
        let w = forward_operator(m, xi, n)?;
        let psi_n = m.psi_chain_matrix(n);
        let theta_raw = w.dot(&psi_n).dot(&w);
        let normalizer = linalg::trace(&theta_raw.view()).re;
        if normalizer < 1e-14 {
            // The normalizer tends to φ(p_ξ) > 0; persistent vanishing
            // flags a modeling error.
            skipped.push(n);
            continue;
        }
        let theta = DensityState::on_chain(
            linalg::hermitize(&theta_raw.mapv(|z| z / normalizer)),
            m.ancilla_dim(),
            n,
        )?;
        let input = ChainInput::dense(theta);
        entanglement_proxy.push(input.max_cut_entropy()?);
        thetas.push(input);
        n_values.push(n);
        normalizers.push(normalizer);
    }
    if thetas.is_empty() {
        return Err(Error::VanishingNormalizer { n_max, tol: 1e-14 });
    }
    let mut seq = PreparingSequence {
        thetas,
        n_values,
        target,
        method: SynthMethod::Forward,
        compatible_group: Some(format!("forward-n1..{n_max}")),
        normalizers,
        skipped,
        entanglement_proxy,
        trace: ConvergenceTrace::default(),
    };
    seq.trace = run_panel(m, &seq, &default_panel(nn, panel_seed))?;
    Ok(seq)
}

/// σ-convex combination for a mixed target: eigendecompose ρ (weights
/// below 1e−12 dropped and renormalized), synthesize each vector state
/// — compatible by construction — and combine θ_n = Σ cᵢ θ_n^{(i)}.
pub fn synth_mixed(
    m: &CouplingModel,
    rho: &DensityState,
    n_max: usize,
    panel_seed: u64,
) -> Result<PreparingSequence> {
    let nn = m.system_dim();
    if rho.side() != nn {
        return Err(Error::DimMismatch("target state".into()));
    }
    let (vals, vecs) = linalg::eigh(&linalg::hermitize(rho.matrix()))?;
    let mut weights: Vec<(f64, usize)> = (0..nn)
        .filter(|&k| vals[k] > 1e-12)
        .map(|k| (vals[k], k))
        .collect();
    let total: f64 = weights.iter().map(|(w, _)| w).sum();
    weights.iter_mut().for_each(|(w, _)| *w /= total);

    let mut parts = Vec::new();
    for (w, k) in &weights {
        let xi = vecs.column(*k).to_owned();
        let seq = synth_forward(m, &xi.view(), n_max, panel_seed)?;
        parts.push((*w, seq));
    }
    // keep n retained by every component
    let common: Vec<usize> = parts[0]
        .1
        .n_values
        .iter()
        .cloned()
        .filter(|n| parts.iter().all(|(_, s)| s.n_values.contains(n)))
        .collect();
    let mut thetas = Vec::new();
    let mut entanglement_proxy = Vec::new();
    for &n in &common {
        let mix: Vec<(f64, DensityState)> = parts
            .iter()
            .map(|(w, s)| {
                let idx = s.n_values.iter().position(|&x| x == n).expect("common n");
                let dense = s.thetas[idx].to_dense(m)?;
                Ok((*w, dense))
            })
            .collect::<Result<_>>()?;
        let refs: Vec<(f64, &DensityState)> = mix.iter().map(|(w, s)| (*w, s)).collect();
        let combined = DensityState::convex(&refs)?;
        let input = ChainInput::dense(combined);
        entanglement_proxy.push(input.max_cut_entropy()?);
        thetas.push(input);
    }
    let skipped = (1..=n_max).filter(|n| !common.contains(n)).collect();
    let mut seq = PreparingSequence {
        thetas,
        n_values: common,
        target: rho.clone(),
        method: SynthMethod::Convex,
        compatible_group: Some(format!("forward-n1..{n_max}")),
        normalizers: Vec::new(),
        skipped,
        entanglement_proxy,
        trace: ConvergenceTrace::default(),
    };
    seq.trace = run_panel(m, &seq, &default_panel(nn, panel_seed))?;
    Ok(seq)
}

/// Time-reversal construction: given a sequence (θʳ_k) preparing the
/// vector state ω_ξ under the reverse transition, returns the sequence
/// θ_k(c) = (ρ ⊗ θ̂ʳ_k)(α_{n_k})⁻¹(1⊗c) preparing ρ from ω_ξ under the
/// forward transition, with θ̂ʳ_k the chain-reversed word. The density
/// on C_n is Tr_sys[U_n*(ρ_ρ ⊗ ρ_{θ̂ʳ_k})U_n] for the forward chain
/// unitary U_n: with α_n(z) = U_n* z U_n one has (α_n)⁻¹(1⊗c) =
/// U_n(1⊗c)U_n*, and the functional pairs against the conjugated
/// density.
pub fn synth_reverse(
    m: &CouplingModel,
    rho: &DensityState,
    reverse_seq: &PreparingSequence,
) -> Result<PreparingSequence> {
    let nn = m.system_dim();
    // the reverse sequence must target a vector state
    let purity = linalg::trace(
        &reverse_seq
            .target
            .matrix()
            .dot(reverse_seq.target.matrix())
            .view(),
    )
    .re;
    if (1.0 - purity).abs() > 1e-8 {
        return Err(Error::NotAVectorState {
            defect: (1.0 - purity).abs(),
        });
    }

    let (vals, vecs) = linalg::eigh(&linalg::hermitize(rho.matrix()))?;
    let sys_factors: Vec<(f64, Array1<C64>)> = (0..nn)
        .filter(|&k| vals[k] > tol::KRAUS_DROP)
        .map(|k| (vals[k], vecs.column(k).to_owned()))
        .collect();

    let mut thetas = Vec::new();
    let mut n_values = Vec::new();
    let mut entanglement_proxy = Vec::new();
    for (idx, theta_r) in reverse_seq.thetas.iter().enumerate() {
        let n = reverse_seq.n_values[idx];
        let joint = m.guard_joint_dim(n)?;
        let chain = joint / nn;
        let hatted = theta_r.reversed()?;
        let chain_factors = hatted.factorize(m.chain_cap())?;
        // columns √(w·μ)·(v ⊗ x), moved by U_n*
        let rank = sys_factors.len() * chain_factors.len();
        let mut cols = Array2::<C64>::zeros((joint, rank));
        let mut col = 0;
        for (w, v) in &sys_factors {
            for (mu, x) in &chain_factors {
                let scale = (w * mu).sqrt();
                for s in 0..nn {
                    for c in 0..chain {
                        cols[[s * chain + c, col]] = scale * v[s] * x[c];
                    }
                }
                col += 1;
            }
        }
        m.apply_chain_gates(&mut cols, n, true)?;
        // θ = Tr_sys[cols·cols*]
        let mut theta = Array2::<C64>::zeros((chain, chain));
        for s in 0..nn {
            let block = cols.slice(s![s * chain..(s + 1) * chain, ..]).to_owned();
            theta += &block.dot(&linalg::adjoint(&block.view()));
        }
        let tr = linalg::trace(&theta.view()).re;
        let state = DensityState::on_chain(
            linalg::hermitize(&theta.mapv(|z| z / tr)),
            m.ancilla_dim(),
            n,
        )?;
        let input = ChainInput::dense(state);
        entanglement_proxy.push(input.max_cut_entropy()?);
        thetas.push(input);
        n_values.push(n);
    }

    // trace: preparation of ρ from the vector state ω_ξ
    let xi_panel = vec![("omega_xi".to_string(), reverse_seq.target.clone())];
    let mut seq = PreparingSequence {
        thetas,
        n_values,
        target: rho.clone(),
        method: SynthMethod::Reverse,
        compatible_group: reverse_seq.compatible_group.clone(),
        normalizers: Vec::new(),
        skipped: Vec::new(),
        entanglement_proxy,
        trace: ConvergenceTrace::default(),
    };
    seq.trace = run_panel(m, &seq, &xi_panel)?;
    Ok(seq)
}

/// Two-stage protocol: θ = θ'_ℓ ⊗ (θ''_m)^{shifted} over the requested
/// index pairs; the composite inherits the second stage's target.
pub fn concatenate(
    m: &CouplingModel,
    first: &PreparingSequence,
    second: &PreparingSequence,
    pairing: &[(usize, usize)],
    panel_seed: u64,
) -> Result<PreparingSequence> {
    if second.thetas.is_empty() {
        let mut out = first.clone();
        out.method = SynthMethod::Concatenated;
        return Ok(out);
    }
    let d = m.ancilla_dim();
    let mut thetas = Vec::new();
    let mut n_values = Vec::new();
    let mut entanglement_proxy = Vec::new();
    for &(l, mi) in pairing {
        let a = first
            .thetas
            .get(l)
            .ok_or_else(|| Error::Invalid(format!("first index {l} out of range")))?;
        let b = second
            .thetas
            .get(mi)
            .ok_or_else(|| Error::Invalid(format!("second index {mi} out of range")))?;
        let joined = a.concat(b);
        n_values.push(joined.n_slots(d));
        entanglement_proxy.push(joined.max_cut_entropy()?);
        thetas.push(joined);
    }
    let mut seq = PreparingSequence {
        thetas,
        n_values,
        target: second.target.clone(),
        method: SynthMethod::Concatenated,
        compatible_group: None,
        normalizers: Vec::new(),
        skipped: Vec::new(),
        entanglement_proxy,
        trace: ConvergenceTrace::default(),
    };
    seq.trace = run_panel(m, &seq, &default_panel(m.system_dim(), panel_seed))?;
    Ok(seq)
}

/// Constant protocol θ_n = input^{⊗n}. The trace is taken against the
/// unique stationary state of T_input when the fixed space is trivial,
/// otherwise against the Cesàro representative.
pub fn constant_protocol(
    m: &CouplingModel,
    input: &DensityState,
    n_max: usize,
    panel_seed: u64,
) -> Result<PreparingSequence> {
    if input.side() != m.ancilla_dim() {
        return Err(Error::DimMismatch("ancilla input".into()));
    }
    let ch = m.transition_channel_with_input(input)?;
    let report = stationary::stationary_states(&ch)?;
    let target = report
        .stationary_densities
        .first()
        .cloned()
        .unwrap_or_else(|| DensityState::maximally_mixed(m.system_dim()));

    let thetas: Vec<ChainInput> = (1..=n_max)
        .map(|n| ChainInput::power(input.clone(), n))
        .collect();
    let n_values: Vec<usize> = (1..=n_max).collect();
    let entanglement_proxy = vec![0.0; thetas.len()];
    let mut seq = PreparingSequence {
        thetas,
        n_values,
        target,
        method: SynthMethod::Constant,
        compatible_group: Some("constant".to_string()),
        normalizers: Vec::new(),
        skipped: Vec::new(),
        entanglement_proxy,
        trace: ConvergenceTrace::default(),
    };
    seq.trace = run_panel(m, &seq, &default_panel(m.system_dim(), panel_seed))?;
    Ok(seq)
}

/// Largest pairwise trace distance among prepared states at one word —
/// the universality gap of the sequence.
pub fn panel_spread(
    m: &CouplingModel,
    theta: &ChainInput,
    panel: &[(String, DensityState)],
) -> Result<f64> {
    let ops = segment_ops(m, theta)?;
    let prepared: Vec<DensityState> = panel
        .iter()
        .map(|(_, s)| apply_segment_ops(&ops, s))
        .collect::<Result<_>>()?;
    let mut worst = 0.0_f64;
    for i in 0..prepared.len() {
        for j in i + 1..prepared.len() {
            worst = worst.max(tensor::state_distance(
                &prepared[i],
                &prepared[j],
                DistanceMode::Trace,
            )?);
        }
    }
    Ok(worst)
}

// --- serialization (External Interfaces) ---

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SegmentJson {
    Dense {
        n_slots: usize,
        matrix: Vec<[f64; 2]>,
    },
    Power {
        count: usize,
        base: Vec<[f64; 2]>,
    },
}

#[derive(Serialize)]
pub struct PreparingSequenceJson {
    pub method: SynthMethod,
    pub compatible_group: Option<String>,
    pub target: Vec<[f64; 2]>,
    pub n_values: Vec<usize>,
    pub thetas: Vec<Vec<SegmentJson>>,
    pub normalizers: Vec<f64>,
    pub skipped: Vec<usize>,
    pub entanglement_proxy: Vec<f64>,
}

impl PreparingSequence {
    pub fn to_json(&self) -> PreparingSequenceJson {
        PreparingSequenceJson {
            method: self.method,
            compatible_group: self.compatible_group.clone(),
            target: crate::transition::matrix_to_pairs(self.target.matrix()),
            n_values: self.n_values.clone(),
            thetas: self
                .thetas
                .iter()
                .map(|t| {
                    t.segments
                        .iter()
                        .map(|seg| match seg {
                            ChainSegment::Dense(s) => SegmentJson::Dense {
                                n_slots: s.dims().n_chain(),
                                matrix: crate::transition::matrix_to_pairs(s.matrix()),
                            },
                            ChainSegment::Power { base, count } => SegmentJson::Power {
                                count: *count,
                                base: crate::transition::matrix_to_pairs(base.matrix()),
                            },
                        })
                        .collect()
                })
                .collect(),
            normalizers: self.normalizers.clone(),
            skipped: self.skipped.clone(),
            entanglement_proxy: self.entanglement_proxy.clone(),
        }
    }
}
