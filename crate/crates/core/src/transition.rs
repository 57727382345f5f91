//! Transitions built from a coupling unitary: J, the chain iterates J_n,
//! the conditional expectations P_{ψ_n} and Q_n, the reduced Kraus
//! channel T_ψ, and Schrödinger-picture state evolution under chain
//! inputs.
//!
//! Conventions: J(a) = u*(a⊗1)u in the forward direction and
//! J^r(a) = u(a⊗1)u* in reverse; the chain unitary is
//! U_n = u_(n)·u_(n−1)·…·u_(1) with u_(j) acting on (system, slot j),
//! so that α_n(z) = U_n* z U_n and J_n(a) = U_n*(a⊗1)U_n.

use ndarray::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::tensor::{self, ComplexOperator, DensityState, FactorDims};
use crate::{tol, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

/// Coupling unitary on system ⊗ ancilla together with the reference
/// faithful pair (φ, ψ). Immutable after construction.
#[derive(Clone, Debug)]
pub struct CouplingModel {
    u: Array2<C64>,
    n_sys: usize,
    d_anc: usize,
    phi: DensityState,
    psi: DensityState,
    direction: Direction,
    chain_cap: usize,
}

impl CouplingModel {
    pub fn new(
        u: Array2<C64>,
        phi: DensityState,
        psi: DensityState,
        direction: Direction,
    ) -> Result<Self> {
        let n_sys = phi.side();
        let d_anc = psi.side();
        if u.nrows() != n_sys * d_anc || u.ncols() != n_sys * d_anc {
            return Err(Error::DimMismatch(format!(
                "coupling unitary is {}×{}, expected {}×{}",
                u.nrows(),
                u.ncols(),
                n_sys * d_anc,
                n_sys * d_anc
            )));
        }
        let defect = linalg::unitarity_defect(&u);
        if defect > tol::STRUCTURAL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(CouplingModel {
            u,
            n_sys,
            d_anc,
            phi,
            psi,
            direction,
            chain_cap: tol::CHAIN_DIM_CAP,
        })
    }

    pub fn with_chain_cap(mut self, cap: usize) -> Self {
        self.chain_cap = cap;
        self
    }

    pub fn system_dim(&self) -> usize {
        self.n_sys
    }

    pub fn ancilla_dim(&self) -> usize {
        self.d_anc
    }

    pub fn unitary(&self) -> &Array2<C64> {
        &self.u
    }

    pub fn phi(&self) -> &DensityState {
        &self.phi
    }

    pub fn psi(&self) -> &DensityState {
        &self.psi
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn chain_cap(&self) -> usize {
        self.chain_cap
    }

    /// Same coupling, time direction flipped.
    pub fn reversed(&self) -> CouplingModel {
        let mut m = self.clone();
        m.direction = m.direction.flipped();
        m
    }

    /// Same coupling and direction, different reference pair.
    pub fn with_states(&self, phi: DensityState, psi: DensityState) -> Result<CouplingModel> {
        CouplingModel::new(self.u.clone(), phi, psi, self.direction)
            .map(|m| m.with_chain_cap(self.chain_cap))
    }

    /// Effective coupling w with J(a) = w*(a⊗1)w for the configured
    /// direction (w = u forward, w = u* reverse).
    pub fn effective_coupling(&self) -> Array2<C64> {
        match self.direction {
            Direction::Forward => self.u.clone(),
            Direction::Reverse => linalg::adjoint(&self.u.view()),
        }
    }

    /// ‖u(ρ_φ⊗ρ_ψ)u* − ρ_φ⊗ρ_ψ‖₁ (the stationarity of φ⊗ψ for the
    /// coupling automorphism; identical for both directions).
    pub fn product_stationarity_defect(&self) -> Result<f64> {
        let rho = tensor::tensor_states(&self.phi, &self.psi);
        let moved = self
            .u
            .dot(rho.matrix())
            .dot(&linalg::adjoint(&self.u.view()));
        linalg::trace_norm(&(moved - rho.matrix()))
    }

    pub fn guard_joint_dim(&self, n: usize) -> Result<usize> {
        let mut joint: usize = self.n_sys;
        for _ in 0..n {
            joint = joint
                .checked_mul(self.d_anc)
                .ok_or(Error::ChainDimExceeded {
                    required: usize::MAX,
                    cap: self.chain_cap,
                })?;
            if joint > self.chain_cap {
                return Err(Error::ChainDimExceeded {
                    required: joint,
                    cap: self.chain_cap,
                });
            }
        }
        Ok(joint)
    }

    /// J(a) on [N, d]: w*(a⊗1)w.
    pub fn apply_j(&self, a: &ComplexOperator) -> Result<ComplexOperator> {
        if a.side() != self.n_sys {
            return Err(Error::DimMismatch("apply_j operand".into()));
        }
        let w = self.effective_coupling();
        let a1 = linalg::kron(&a.matrix().view(), &linalg::identity(self.d_anc).view());
        let out = linalg::adjoint(&w.view()).dot(&a1).dot(&w);
        ComplexOperator::new(out, FactorDims::joint(self.n_sys, self.d_anc, 1))
    }

    /// Applies the chain unitary U_n (or U_n* for `adjoint`) in place to
    /// a stack of column vectors of length N·dⁿ, gate by gate, without
    /// materializing U_n.
    pub fn apply_chain_gates(
        &self,
        cols: &mut Array2<C64>,
        n: usize,
        adjoint: bool,
    ) -> Result<()> {
        let joint = self.guard_joint_dim(n)?;
        if cols.nrows() != joint {
            return Err(Error::DimMismatch(format!(
                "column length {} vs joint dim {}",
                cols.nrows(),
                joint
            )));
        }
        let w = self.effective_coupling();
        let gate = if adjoint {
            linalg::adjoint(&w.view())
        } else {
            w
        };
        // U_n = w_(n)…w_(1): slot 1 acts first; the adjoint applies
        // slots in descending order.
        let order: Vec<usize> = if adjoint {
            (1..=n).rev().collect()
        } else {
            (1..=n).collect()
        };
        for j in order {
            self.apply_single_gate(cols, n, j, &gate);
        }
        Ok(())
    }

    /// Applies one copy of the (system, slot j) gate to all columns.
    fn apply_single_gate(&self, cols: &mut Array2<C64>, n: usize, j: usize, gate: &Array2<C64>) {
        let (nn, d) = (self.n_sys, self.d_anc);
        let before = d.pow((j - 1) as u32); // slots 1..j-1
        let after = d.pow((n - j) as u32); // slots j+1..n
        let ncols = cols.ncols();
        let sd = nn * d;
        let mut x = vec![C64::new(0.0, 0.0); sd];
        let mut y = vec![C64::new(0.0, 0.0); sd];
        // flat row index: ((s·before + a)·d + c)·after + b
        for a in 0..before {
            for b in 0..after {
                for col in 0..ncols {
                    for s in 0..nn {
                        for c in 0..d {
                            let row = ((s * before + a) * d + c) * after + b;
                            x[s * d + c] = cols[[row, col]];
                        }
                    }
                    for (i, yi) in y.iter_mut().enumerate() {
                        let mut acc = C64::new(0.0, 0.0);
                        for (k, xk) in x.iter().enumerate() {
                            acc += gate[[i, k]] * *xk;
                        }
                        *yi = acc;
                    }
                    for s in 0..nn {
                        for c in 0..d {
                            let row = ((s * before + a) * d + c) * after + b;
                            cols[[row, col]] = y[s * d + c];
                        }
                    }
                }
            }
        }
    }

    /// Dense U_n on dims [N, d, …, d] with α_n(z) = U_n* z U_n.
    pub fn chain_unitary(&self, n: usize) -> Result<ComplexOperator> {
        let joint = self.guard_joint_dim(n)?;
        let mut m = linalg::identity(joint);
        self.apply_chain_gates(&mut m, n, false)?;
        ComplexOperator::new(m, FactorDims::joint(self.n_sys, self.d_anc, n))
    }

    /// J_n(a) = U_n*(a⊗1)U_n on dims [N, d, …, d].
    pub fn apply_jn(&self, a: &ComplexOperator, n: usize) -> Result<ComplexOperator> {
        if a.side() != self.n_sys {
            return Err(Error::DimMismatch("apply_jn operand".into()));
        }
        let joint = self.guard_joint_dim(n)?;
        let chain = joint / self.n_sys;
        let un = self.chain_unitary(n)?;
        // (a⊗1)·U_n by contracting a into the system leg.
        let mut x = Array2::<C64>::zeros((joint, joint));
        for s in 0..self.n_sys {
            for t in 0..self.n_sys {
                let ast = a.matrix()[[s, t]];
                if ast == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = un
                    .matrix()
                    .slice(s![t * chain..(t + 1) * chain, ..])
                    .to_owned();
                let mut dst = x.slice_mut(s![s * chain..(s + 1) * chain, ..]);
                dst.zip_mut_with(&src, |o, &v| *o += ast * v);
            }
        }
        let mut out = x;
        self.apply_chain_gates(&mut out, n, true)?;
        ComplexOperator::new(out, FactorDims::joint(self.n_sys, self.d_anc, n))
    }

    /// Q_n(z) = Tr_sys[(ρ_φ⊗1)·z], the conditional expectation onto
    /// 1 ⊗ C_n determined by Q_n(a⊗c) = φ(a)·c.
    pub fn q_expectation(&self, z: &ComplexOperator) -> Result<ComplexOperator> {
        let n = self.expect_joint(z)?;
        let chain = z.side() / self.n_sys;
        let rho = self.phi.matrix();
        let m = z.matrix();
        let mut out = Array2::<C64>::zeros((chain, chain));
        for s in 0..self.n_sys {
            for t in 0..self.n_sys {
                let w = rho[[s, t]];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                let block = m.slice(s![t * chain..(t + 1) * chain, s * chain..(s + 1) * chain]);
                out.zip_mut_with(&block, |o, &v| *o += w * v);
            }
        }
        ComplexOperator::new(out, FactorDims::chain_only(self.d_anc, n))
    }

    /// P_{ψ_n}(z) = Tr_chain[(1⊗ρ_ψ^{⊗n})·z], the conditional
    /// expectation onto the system determined by P_ψ(x⊗y) = ψ(y)·x.
    pub fn p_expectation(&self, z: &ComplexOperator) -> Result<ComplexOperator> {
        let n = self.expect_joint(z)?;
        let chain = z.side() / self.n_sys;
        let wmat = self.psi_chain_matrix(n);
        let m = z.matrix();
        let mut out = Array2::<C64>::zeros((self.n_sys, self.n_sys));
        for s in 0..self.n_sys {
            for s2 in 0..self.n_sys {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..chain {
                    for e in 0..chain {
                        let w = wmat[[c, e]];
                        if w != C64::new(0.0, 0.0) {
                            acc += w * m[[s * chain + e, s2 * chain + c]];
                        }
                    }
                }
                out[[s, s2]] = acc;
            }
        }
        ComplexOperator::new(out, FactorDims::system_only(self.n_sys))
    }

    fn expect_joint(&self, z: &ComplexOperator) -> Result<usize> {
        let dims = z.dims();
        if dims.system_dim() != self.n_sys || dims.chain_dims().iter().any(|&d| d != self.d_anc) {
            return Err(Error::DimMismatch(format!(
                "expected dims [N={}, d×n], got {:?}",
                self.n_sys,
                dims.dims()
            )));
        }
        Ok(dims.n_chain())
    }

    /// ρ_ψ^{⊗n} as a dense chain matrix.
    pub fn psi_chain_matrix(&self, n: usize) -> Array2<C64> {
        let mut m = linalg::identity(1);
        for _ in 0..n {
            m = linalg::kron(&m.view(), &self.psi.matrix().view());
        }
        m
    }

    /// ψ^{⊗n} as a state on C_n.
    pub fn psi_chain_state(&self, n: usize) -> DensityState {
        DensityState::on_chain(self.psi_chain_matrix(n), self.d_anc, n).expect("psi chain")
    }

    /// Kraus family of T_ψ = P_ψ∘J from the eigenbasis of ρ_ψ;
    /// eigenvalues below `tol::KRAUS_DROP` are dropped.
    pub fn transition_channel(&self) -> Result<KrausChannel> {
        self.transition_channel_with_input(&self.psi.clone())
    }

    /// Kraus family of T_input = P_input∘J for an arbitrary ancilla
    /// input state.
    pub fn transition_channel_with_input(&self, input: &DensityState) -> Result<KrausChannel> {
        if input.side() != self.d_anc {
            return Err(Error::DimMismatch("ancilla input".into()));
        }
        let (vals, vecs) = linalg::eigh(&linalg::hermitize(input.matrix()))?;
        if vals.iter().any(|&v| v < -tol::STRUCTURAL) {
            return Err(Error::NotAState {
                reason: "ancilla input not PSD".into(),
                defect: -vals.iter().cloned().fold(f64::INFINITY, f64::min),
                tol: tol::STRUCTURAL,
            });
        }
        let w = self.effective_coupling();
        let (nn, d) = (self.n_sys, self.d_anc);
        let mut ops = Vec::new();
        for k in 0..d {
            let lam = vals[k];
            if lam <= tol::KRAUS_DROP {
                continue;
            }
            let ek = vecs.column(k);
            // w·(1⊗|e_k⟩): (N·d)×N
            let mut wek = Array2::<C64>::zeros((nn * d, nn));
            for row in 0..nn * d {
                for s in 0..nn {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..d {
                        acc += w[[row, s * d + c]] * ek[c];
                    }
                    wek[[row, s]] = acc;
                }
            }
            for l in 0..d {
                let mut m = Array2::<C64>::zeros((nn, nn));
                for s in 0..nn {
                    for t in 0..nn {
                        m[[s, t]] = lam.sqrt() * wek[[s * d + l, t]];
                    }
                }
                ops.push(m);
            }
        }
        Ok(KrausChannel {
            ops,
            dim: nn,
            source: Some(Box::new(self.clone())),
        })
    }

    /// Density of (σ⊗θ)J_n: Tr_chain[U_n(ρ_σ⊗ρ_θ)U_n*], evaluated
    /// through the Kraus family of the chain-input channel.
    pub fn evolve_state(&self, sigma: &DensityState, theta: &DensityState) -> Result<DensityState> {
        let ch = ChainChannel::new(self, theta)?;
        ch.apply(sigma)
    }

    /// Reference dense route for `evolve_state` (explicit U_n sandwich);
    /// kept as the oracle for the Kraus-block route.
    pub fn evolve_state_dense(
        &self,
        sigma: &DensityState,
        theta: &DensityState,
    ) -> Result<DensityState> {
        let n = self.chain_slots_of(theta)?;
        let un = self.chain_unitary(n)?;
        let joint = tensor::tensor_states(sigma, theta);
        let moved = un
            .matrix()
            .dot(joint.matrix())
            .dot(&linalg::adjoint(&un.matrix().view()));
        let op = ComplexOperator::new(moved, FactorDims::joint(self.n_sys, self.d_anc, n))?;
        let reduced = tensor::partial_trace(&op, &[0])?;
        DensityState::new(
            linalg::hermitize(reduced.matrix()),
            FactorDims::system_only(self.n_sys),
            tol::STRUCTURAL,
        )
    }

    pub fn chain_slots_of(&self, theta: &DensityState) -> Result<usize> {
        let dims = theta.dims();
        if dims.system_dim() != 1 || dims.chain_dims().iter().any(|&d| d != self.d_anc) {
            return Err(Error::DimMismatch(format!(
                "chain input must live on C_n with d = {}, got {:?}",
                self.d_anc,
                dims.dims()
            )));
        }
        Ok(dims.n_chain())
    }
}

/// Weighted Kraus family for T_ψ (Heisenberg) and its preadjoint.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<Array2<C64>>,
    dim: usize,
    source: Option<Box<CouplingModel>>,
}

impl KrausChannel {
    pub fn from_ops(ops: Vec<Array2<C64>>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Invalid("empty Kraus family".into()));
        }
        let dim = ops[0].nrows();
        if ops.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::DimMismatch("Kraus operator shapes".into()));
        }
        Ok(KrausChannel {
            ops,
            dim,
            source: None,
        })
    }

    pub fn ops(&self) -> &[Array2<C64>] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> Option<&CouplingModel> {
        self.source.as_deref()
    }

    /// Heisenberg action T(x) = Σ M* x M.
    pub fn apply(&self, x: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for m in &self.ops {
            out += &linalg::adjoint(&m.view()).dot(x).dot(m);
        }
        out
    }

    /// Schrödinger action T_*(ρ) = Σ M ρ M*.
    pub fn apply_pre(&self, rho: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for m in &self.ops {
            out += &m.dot(rho).dot(&linalg::adjoint(&m.view()));
        }
        out
    }

    pub fn apply_pre_state(&self, rho: &DensityState) -> Result<DensityState> {
        let moved = linalg::hermitize(&self.apply_pre(rho.matrix()));
        DensityState::new(moved, rho.dims().clone(), tol::STRUCTURAL)
    }

    /// ‖Σ M*M − 1‖ (unitality of the Heisenberg action).
    pub fn unitality_defect(&self) -> f64 {
        let mut s = Array2::<C64>::zeros((self.dim, self.dim));
        for m in &self.ops {
            s += &linalg::adjoint(&m.view()).dot(m);
        }
        linalg::frobenius(&(s - linalg::identity(self.dim)))
    }

    /// |Tr T_*(ρ) − Tr ρ| maximized over matrix units — equals the
    /// unitality defect in dual form; reported separately for the
    /// preadjoint contract.
    pub fn trace_preservation_defect(&self) -> f64 {
        self.unitality_defect()
    }
}

// --- serialization (External Interfaces) ---

/// Row-major [re, im] pairs.
pub fn matrix_to_pairs(m: &Array2<C64>) -> Vec<[f64; 2]> {
    m.iter().map(|z| [z.re, z.im]).collect()
}

pub fn matrix_from_pairs(pairs: &[[f64; 2]], side: usize) -> Result<Array2<C64>> {
    if pairs.len() != side * side {
        return Err(Error::DimMismatch(format!(
            "expected {} entries, got {}",
            side * side,
            pairs.len()
        )));
    }
    Ok(Array2::from_shape_vec(
        (side, side),
        pairs.iter().map(|p| C64::new(p[0], p[1])).collect(),
    )
    .expect("matrix shape"))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelJson {
    pub system_dim: usize,
    pub ancilla_dim: usize,
    pub unitary: Vec<[f64; 2]>,
    pub phi: Vec<[f64; 2]>,
    pub psi: Vec<[f64; 2]>,
    pub direction: Direction,
}

impl CouplingModel {
    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            system_dim: self.n_sys,
            ancilla_dim: self.d_anc,
            unitary: matrix_to_pairs(&self.u),
            phi: matrix_to_pairs(self.phi.matrix()),
            psi: matrix_to_pairs(self.psi.matrix()),
            direction: self.direction,
        }
    }

    pub fn from_json(j: &ModelJson) -> Result<Self> {
        let u = matrix_from_pairs(&j.unitary, j.system_dim * j.ancilla_dim)?;
        let phi = DensityState::on_system(matrix_from_pairs(&j.phi, j.system_dim)?)?;
        let psi = DensityState::on_system(matrix_from_pairs(&j.psi, j.ancilla_dim)?)?;
        CouplingModel::new(u, phi, psi, j.direction)
    }
}

/// Channel σ ↦ Tr_chain[U_n(σ⊗ρ_θ)U_n*] for a fixed chain input θ,
/// factored through the spectral decomposition of ρ_θ. Reusable across
/// panel members sharing the same input.
pub struct ChainChannel {
    /// (weight, Y_i = U_n·(1⊗|ξ_i⟩)) per retained eigenvector of ρ_θ.
    blocks: Vec<(f64, Array2<C64>)>,
    n_sys: usize,
    chain: usize,
}

impl ChainChannel {
    pub fn new(model: &CouplingModel, theta: &DensityState) -> Result<Self> {
        let n = model.chain_slots_of(theta)?;
        model.guard_joint_dim(n)?;
        let chain = theta.side();
        let (vals, vecs) = linalg::eigh(&linalg::hermitize(theta.matrix()))?;
        let mut blocks = Vec::new();
        for k in 0..chain {
            if vals[k] <= tol::KRAUS_DROP {
                continue;
            }
            let xi = vecs.column(k);
            // columns of (1⊗|ξ⟩): |s⟩ ↦ |s⟩⊗|ξ⟩
            let mut y = Array2::<C64>::zeros((model.system_dim() * chain, model.system_dim()));
            for s in 0..model.system_dim() {
                for c in 0..chain {
                    y[[s * chain + c, s]] = xi[c];
                }
            }
            model.apply_chain_gates(&mut y, n, false)?;
            blocks.push((vals[k], y));
        }
        Ok(ChainChannel {
            blocks,
            n_sys: model.system_dim(),
            chain,
        })
    }

    pub fn apply(&self, sigma: &DensityState) -> Result<DensityState> {
        if sigma.side() != self.n_sys {
            return Err(Error::DimMismatch("chain channel input".into()));
        }
        let out = self.apply_raw(sigma.matrix());
        DensityState::new(
            linalg::hermitize(&out),
            FactorDims::system_only(self.n_sys),
            tol::STRUCTURAL,
        )
    }

    pub fn apply_raw(&self, sigma: &Array2<C64>) -> Array2<C64> {
        let nn = self.n_sys;
        let mut out = Array2::<C64>::zeros((nn, nn));
        for (wgt, y) in &self.blocks {
            let z = y.dot(sigma); // (N·chain)×N
            for s in 0..nn {
                for s2 in 0..nn {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..self.chain {
                        for t in 0..nn {
                            acc += z[[s * self.chain + c, t]] * y[[s2 * self.chain + c, t]].conj();
                        }
                    }
                    out[[s, s2]] += *wgt * acc;
                }
            }
        }
        out
    }
}
