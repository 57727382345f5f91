//! Dense complex operator/tensor toolkit: tensor products, partial
//! traces, chain reordering, GNS-weighted norms and state distances.
//!
//! Index convention (fixed globally): the system factor is leftmost and
//! most significant, `index(|i₀,…,i_n⟩) = Σ i_k · (product of later
//! dims)`. States living on the chain algebra C_n alone carry a leading
//! trivial system factor, `dims = [1, d, …, d]`, so that factor 0 always
//! denotes the system slot and chain positions are factors 1…n.

use ndarray::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::{tol, Error, Result, C64};

/// Ordered tensor-factor dimensions; factor 0 is the system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDims(Vec<usize>);

impl FactorDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Invalid(format!(
                "factor dims must be nonempty and positive, got {dims:?}"
            )));
        }
        Ok(FactorDims(dims))
    }

    pub fn system_only(n: usize) -> Self {
        FactorDims(vec![n])
    }

    /// C_n carrier: leading trivial system factor plus n chain slots.
    pub fn chain_only(d: usize, slots: usize) -> Self {
        let mut v = vec![1];
        v.extend(std::iter::repeat_n(d, slots));
        FactorDims(v)
    }

    pub fn joint(n: usize, d: usize, slots: usize) -> Self {
        let mut v = vec![n];
        v.extend(std::iter::repeat_n(d, slots));
        FactorDims(v)
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn n_factors(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn system_dim(&self) -> usize {
        self.0[0]
    }

    pub fn chain_dims(&self) -> &[usize] {
        &self.0[1..]
    }

    pub fn n_chain(&self) -> usize {
        self.0.len() - 1
    }

    /// Concatenation used by `tensor_product`. Trivial (dim-1) factors at
    /// positions ≥ 1 are dropped so that chain words compose without
    /// accumulating placeholder slots; factor 0 is always kept.
    pub fn concat(&self, other: &FactorDims) -> FactorDims {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        let head = v[0];
        let mut out = vec![head];
        out.extend(v[1..].iter().copied().filter(|&d| d > 1));
        if out.len() == 1 && out[0] == 1 && v.iter().product::<usize>() == 1 {
            return FactorDims(vec![1]);
        }
        FactorDims(out)
    }

    fn strides(&self) -> Vec<usize> {
        let n = self.0.len();
        let mut s = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.0[k + 1];
        }
        s
    }
}

/// Dense complex square matrix with declared tensor-factor dimensions.
#[derive(Clone, Debug)]
pub struct ComplexOperator {
    matrix: Array2<C64>,
    dims: FactorDims,
}

impl ComplexOperator {
    pub fn new(matrix: Array2<C64>, dims: FactorDims) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimMismatch(format!(
                "matrix is {}×{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != dims.total() {
            return Err(Error::DimMismatch(format!(
                "side length {} does not match factor product {}",
                matrix.nrows(),
                dims.total()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("non-finite matrix entry".into()));
        }
        Ok(ComplexOperator { matrix, dims })
    }

    pub fn on_system(matrix: Array2<C64>) -> Result<Self> {
        let n = matrix.nrows();
        ComplexOperator::new(matrix, FactorDims::system_only(n))
    }

    pub fn identity(dims: FactorDims) -> Self {
        let n = dims.total();
        ComplexOperator {
            matrix: linalg::identity(n),
            dims,
        }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn dims(&self) -> &FactorDims {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> ComplexOperator {
        ComplexOperator {
            matrix: linalg::adjoint(&self.matrix.view()),
            dims: self.dims.clone(),
        }
    }

    pub fn dot(&self, other: &ComplexOperator) -> Result<ComplexOperator> {
        if self.side() != other.side() {
            return Err(Error::DimMismatch("operator product".into()));
        }
        Ok(ComplexOperator {
            matrix: self.matrix.dot(&other.matrix),
            dims: self.dims.clone(),
        })
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix.view())
    }
}

/// Density matrix with validation: hermitian within `tol`, eigenvalues
/// ≥ −`tol`, trace 1 within `tol`.
#[derive(Clone, Debug)]
pub struct DensityState {
    op: ComplexOperator,
    tol: f64,
}

impl DensityState {
    pub fn new(matrix: Array2<C64>, dims: FactorDims, tol: f64) -> Result<Self> {
        let op = ComplexOperator::new(matrix, dims)?;
        let adj = op.adjoint();
        let herm = linalg::frobenius(&(op.matrix() - adj.matrix()));
        if herm > tol {
            return Err(Error::NotAState {
                reason: "not hermitian".into(),
                defect: herm,
                tol,
            });
        }
        let tr = op.trace();
        let tr_defect = (tr.re - 1.0).abs() + tr.im.abs();
        if tr_defect > tol {
            return Err(Error::NotAState {
                reason: "trace not 1".into(),
                defect: tr_defect,
                tol,
            });
        }
        let min = linalg::min_eig(op.matrix())?;
        if min < -tol {
            return Err(Error::NotAState {
                reason: "negative eigenvalue".into(),
                defect: -min,
                tol,
            });
        }
        Ok(DensityState { op, tol })
    }

    pub fn on_system(matrix: Array2<C64>) -> Result<Self> {
        let n = matrix.nrows();
        DensityState::new(matrix, FactorDims::system_only(n), tol::STRUCTURAL)
    }

    /// State on C_n (leading trivial system factor).
    pub fn on_chain(matrix: Array2<C64>, d: usize, slots: usize) -> Result<Self> {
        DensityState::new(matrix, FactorDims::chain_only(d, slots), tol::STRUCTURAL)
    }

    pub fn pure(vector: &ArrayView1<C64>, dims: FactorDims) -> Result<Self> {
        let norm: f64 = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::Invalid(format!("vector norm {norm} ≠ 1")));
        }
        let n = vector.len();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = vector[i] * vector[j].conj();
            }
        }
        DensityState::new(m, dims, tol::STRUCTURAL)
    }

    pub fn basis_state(index: usize, dim: usize) -> Result<Self> {
        let mut v = Array1::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        DensityState::pure(&v.view(), FactorDims::system_only(dim))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = linalg::identity(dim).mapv(|z| z / dim as f64);
        DensityState {
            op: ComplexOperator::new(m, FactorDims::system_only(dim)).expect("mixed"),
            tol: tol::STRUCTURAL,
        }
    }

    pub fn diagonal(weights: &[f64], dims: FactorDims) -> Result<Self> {
        let n = weights.len();
        let mut m = Array2::zeros((n, n));
        for (i, &w) in weights.iter().enumerate() {
            m[[i, i]] = C64::new(w, 0.0);
        }
        DensityState::new(m, dims, tol::STRUCTURAL)
    }

    pub fn matrix(&self) -> &Array2<C64> {
        self.op.matrix()
    }

    pub fn operator(&self) -> &ComplexOperator {
        &self.op
    }

    pub fn dims(&self) -> &FactorDims {
        self.op.dims()
    }

    pub fn side(&self) -> usize {
        self.op.side()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eig(self.matrix()).unwrap_or(f64::NAN)
    }

    /// Faithful within the relative threshold of `tol::FAITHFUL_REL`.
    pub fn is_faithful(&self) -> bool {
        let vals = match linalg::eigh_values(&linalg::hermitize(self.matrix())) {
            Ok(v) => v,
            Err(_) => return false,
        };
        let max = vals.iter().cloned().fold(0.0_f64, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        min > tol::FAITHFUL_REL * max
    }

    pub fn expectation(&self, a: &ArrayView2<C64>) -> C64 {
        linalg::trace(&self.matrix().dot(a).view())
    }

    /// Convex combination Σ cᵢ ρᵢ; weights renormalized to 1.
    pub fn convex(parts: &[(f64, &DensityState)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Invalid("empty convex combination".into()));
        }
        let total: f64 = parts.iter().map(|(c, _)| c).sum();
        if total <= 0.0 {
            return Err(Error::Invalid("nonpositive convex weights".into()));
        }
        let dims = parts[0].1.dims().clone();
        let n = parts[0].1.side();
        let mut m = Array2::zeros((n, n));
        for (c, s) in parts {
            if s.side() != n {
                return Err(Error::DimMismatch("convex combination".into()));
            }
            m.zip_mut_with(s.matrix(), |o, &v| *o += (c / total) * v);
        }
        DensityState::new(m, dims, tol::STRUCTURAL)
    }
}

/// a ⊗ b with the leftmost factor most significant.
pub fn tensor_product(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    let m = linalg::kron(&a.matrix().view(), &b.matrix().view());
    let dims = a.dims().concat(b.dims());
    ComplexOperator::new(m, dims).expect("tensor product dims")
}

pub fn tensor_states(a: &DensityState, b: &DensityState) -> DensityState {
    let op = tensor_product(a.operator(), b.operator());
    DensityState {
        op,
        tol: a.tol().max(b.tol()),
    }
}

/// Raw partial trace with explicit factor dims; keeps the listed factors
/// (original order), traces out the rest.
pub fn partial_trace_raw(
    m: &ArrayView2<C64>,
    dims: &[usize],
    keep: &[usize],
) -> Result<Array2<C64>> {
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::FactorOutOfRange {
                index: k,
                nfactors: dims.len(),
            });
        }
    }
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimMismatch(format!(
            "partial trace: matrix {}×{} vs dims {:?}",
            m.nrows(),
            m.ncols(),
            dims
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !kept.contains(f)).collect();

    let strides = {
        let n = dims.len();
        let mut s = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * dims[k + 1];
        }
        s
    };
    let keep_total: usize = kept.iter().map(|&f| dims[f]).product();
    let trace_total: usize = traced.iter().map(|&f| dims[f]).product();

    // Offsets of each composite kept index / traced index into the flat
    // row index of the input matrix.
    let offsets = |factors: &[usize], count: usize| -> Vec<usize> {
        let mut out = vec![0usize; count];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut off = 0usize;
            for &f in factors {
                let d = dims[f];
                let block: usize = factors
                    .iter()
                    .skip_while(|&&g| g != f)
                    .skip(1)
                    .map(|&g| dims[g])
                    .product();
                let idx = (rem / block) % d;
                rem %= block;
                off += idx * strides[f];
            }
            *slot = off;
        }
        out
    };
    let keep_off = offsets(&kept, keep_total);
    let trace_off = offsets(&traced, trace_total);

    let mut out = Array2::zeros((keep_total, keep_total));
    for (i, &oi) in keep_off.iter().enumerate() {
        for (j, &oj) in keep_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &ot in &trace_off {
                acc += m[[oi + ot, oj + ot]];
            }
            out[[i, j]] = acc;
        }
    }
    Ok(out)
}

/// Traces out all factors not in `keep`; trace preserving.
pub fn partial_trace(z: &ComplexOperator, keep: &[usize]) -> Result<ComplexOperator> {
    let reduced = partial_trace_raw(&z.matrix().view(), z.dims().dims(), keep)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let kept_dims: Vec<usize> = kept.iter().map(|&f| z.dims().dims()[f]).collect();
    let dims = if kept.contains(&0) {
        FactorDims::new(kept_dims)?
    } else {
        // Result lives on chain factors only; tag with a trivial system.
        let mut v = vec![1];
        v.extend(kept_dims);
        FactorDims::new(v)?
    };
    ComplexOperator::new(reduced, dims)
}

/// Relabels tensor factors: `perm[k]` is the old position providing the
/// new factor k. Conjugation by the corresponding permutation unitary.
pub fn permute_factors(z: &ComplexOperator, perm: &[usize]) -> Result<ComplexOperator> {
    let dims = z.dims().dims();
    if perm.len() != dims.len() {
        return Err(Error::DimMismatch("factor permutation length".into()));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let old_strides = z.dims().strides();
    let new_fd = FactorDims::new(new_dims.clone())?;
    let new_strides = new_fd.strides();
    let total = z.side();
    // index map: new flat index -> old flat index
    let mut map = vec![0usize; total];
    for (new_flat, slot) in map.iter_mut().enumerate() {
        let mut old = 0usize;
        for (k, &p) in perm.iter().enumerate() {
            let idx = (new_flat / new_strides[k]) % new_dims[k];
            old += idx * old_strides[p];
        }
        *slot = old;
    }
    let m = z.matrix();
    let mut out = Array2::zeros((total, total));
    for i in 0..total {
        for j in 0..total {
            out[[i, j]] = m[[map[i], map[j]]];
        }
    }
    ComplexOperator::new(out, new_fd)
}

/// The automorphism R_n: factor 0 fixed, chain slots reversed by the
/// rule j ↔ n−j+1. An involution.
pub fn reverse_chain_order(z: &ComplexOperator) -> Result<ComplexOperator> {
    let n_chain = z.dims().n_chain();
    let chain = z.dims().chain_dims();
    if n_chain >= 2 {
        let d0 = chain[0];
        if chain.iter().any(|&d| d != d0) {
            return Err(Error::UnequalChainDims(chain.to_vec()));
        }
    }
    let mut perm = vec![0usize];
    perm.extend((1..=n_chain).rev());
    permute_factors(z, &perm)
}

pub fn reverse_chain_state(theta: &DensityState) -> Result<DensityState> {
    let op = reverse_chain_order(theta.operator())?;
    DensityState::new(op.matrix().clone(), op.dims().clone(), theta.tol())
}

/// GNS norm ‖a‖_w = √Tr(ρ_w · a*a).
pub fn weighted_norm(a: &ComplexOperator, weight: &DensityState) -> Result<f64> {
    if a.side() != weight.side() {
        return Err(Error::DimMismatch("weighted norm".into()));
    }
    let aa = a.adjoint().matrix.dot(a.matrix());
    let val = linalg::trace(&weight.matrix().dot(&aa).view());
    Ok(val.re.max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMode {
    Trace,
    Fidelity,
}

/// Trace distance ½‖σ−ρ‖₁ or Uhlmann fidelity (Tr√(√σ ρ √σ))².
pub fn state_distance(sigma: &DensityState, rho: &DensityState, mode: DistanceMode) -> Result<f64> {
    if sigma.side() != rho.side() {
        return Err(Error::DimMismatch("state distance".into()));
    }
    match mode {
        DistanceMode::Trace => {
            let diff = sigma.matrix() - rho.matrix();
            Ok(0.5 * linalg::trace_norm(&diff)?)
        }
        DistanceMode::Fidelity => {
            let rs = linalg::sqrtm_psd(sigma.matrix())?;
            let inner = rs.dot(rho.matrix()).dot(&rs);
            let root = linalg::sqrtm_psd(&linalg::hermitize(&inner))?;
            let t = linalg::trace(&root.view()).re;
            Ok((t * t).clamp(0.0, 1.0))
        }
    }
}

pub fn trace_distance(sigma: &DensityState, rho: &DensityState) -> Result<f64> {
    state_distance(sigma, rho, DistanceMode::Trace)
}

pub fn fidelity(sigma: &DensityState, rho: &DensityState) -> Result<f64> {
    state_distance(sigma, rho, DistanceMode::Fidelity)
}
