//! Seeded random generators for matrices, states, Haar unitaries and
//! product-stationary coupling models.

use ndarray::prelude::*;
use ndarray_linalg::QR;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg;
use crate::tensor::{DensityState, FactorDims};
use crate::transition::{CouplingModel, Direction};
use crate::{Result, C64};

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Complex Ginibre matrix.
pub fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |_| random_complex(rng))
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    let g = random_matrix(n, rng);
    linalg::hermitize(&g)
}

/// Hermitian with unit operator norm.
pub fn random_hermitian_unit<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    let h = random_hermitian(n, rng);
    let nrm = linalg::op_norm(&h).unwrap_or(1.0).max(f64::MIN_POSITIVE);
    h.mapv(|z| z / nrm)
}

pub fn random_psd<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    let g = random_matrix(n, rng);
    g.dot(&linalg::adjoint(&g.view()))
}

pub fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> Array1<C64> {
    let mut v = Array1::from_shape_fn(n, |_| random_complex(rng));
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / norm);
    v
}

/// Full-rank density from a Ginibre Wishart, trace-normalized.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> DensityState {
    let mut p = random_psd(n, rng);
    let tr = linalg::trace(&p.view()).re;
    p.mapv_inplace(|z| z / tr);
    DensityState::on_system(p).expect("random density")
}

/// As `random_density` but with a floor added so the spectrum stays
/// comfortably away from zero.
pub fn random_faithful_density<R: Rng>(n: usize, rng: &mut R) -> DensityState {
    let mut p = random_psd(n, rng);
    let tr = linalg::trace(&p.view()).re;
    p.mapv_inplace(|z| z / tr);
    let floor = 0.05 / n as f64;
    let mut m = p.mapv(|z| z * (1.0 - 0.05));
    for i in 0..n {
        m[[i, i]] += C64::new(floor, 0.0);
    }
    DensityState::on_system(m).expect("random faithful density")
}

pub fn random_pure<R: Rng>(n: usize, rng: &mut R) -> DensityState {
    let v = random_unit_vector(n, rng);
    DensityState::pure(&v.view(), FactorDims::system_only(n)).expect("random pure")
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// R's diagonal absorbed into Q.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    let g = random_matrix(n, rng);
    let (q, r) = g.qr().expect("qr");
    let mut u = q;
    for j in 0..n {
        let d = r[[j, j]];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        u.column_mut(j).mapv_inplace(|z| z * phase.conj());
    }
    u
}

/// Random coupling model with an exact faithful product-stationary pair
/// (φ, ψ), d = 2.
///
/// A Haar-generic unitary admits no faithful product-stationary pair at
/// all ([u, ρ_φ⊗ρ_ψ] = 0 forces u block-diagonal in the eigenbasis of
/// ρ_φ⊗ρ_ψ), so the generator fixes ladder-degenerate spectra first and
/// then draws Haar blocks inside each degeneracy subspace: system
/// weights geometric with ratio λ/(1−λ), ancilla weights (λ, 1−λ).
/// Degeneracies then pair (level k, excited) with (level k+1, ground),
/// giving N−1 Haar 2×2 blocks plus two free phases — the same block
/// shape as the generalized micromaser, with arbitrary block unitaries.
pub fn random_product_stationary_model<R: Rng>(n: usize, rng: &mut R) -> Result<CouplingModel> {
    let lambda: f64 = 0.08 + 0.34 * rng.random::<f64>();
    random_product_stationary_model_with_lambda(n, lambda, rng)
}

/// As above with the inversion parameter pinned.
pub fn random_product_stationary_model_with_lambda<R: Rng>(
    n: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<CouplingModel> {
    assert!(n >= 2, "system dimension must be at least 2");
    let ratio = lambda / (1.0 - lambda);

    // φ ∝ diag(ratio^k), ψ = diag(λ, 1−λ); factor index 0 = excited.
    let mut w: Vec<f64> = (0..n).map(|k| ratio.powi(k as i32)).collect();
    let norm: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= norm);
    let phi = DensityState::diagonal(&w, FactorDims::system_only(n))?;
    let psi = DensityState::diagonal(&[lambda, 1.0 - lambda], FactorDims::system_only(2))?;

    // Joint weights w_k·v_e collide exactly on {(k,0),(k+1,1)}.
    let nd = 2 * n;
    let mut u = Array2::<C64>::zeros((nd, nd));
    let idx = |k: usize, e: usize| 2 * k + e;
    let phase = |rng: &mut R| {
        let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        C64::new(t.cos(), t.sin())
    };
    // singletons: (0, ground) and (n−1, excited)
    let p0 = phase(rng);
    u[[idx(0, 1), idx(0, 1)]] = p0;
    let p1 = phase(rng);
    u[[idx(n - 1, 0), idx(n - 1, 0)]] = p1;
    for k in 0..n - 1 {
        let block = haar_unitary(2, rng);
        let b0 = idx(k, 0); // (level k, excited)
        let b1 = idx(k + 1, 1); // (level k+1, ground)
        u[[b0, b0]] = block[[0, 0]];
        u[[b0, b1]] = block[[0, 1]];
        u[[b1, b0]] = block[[1, 0]];
        u[[b1, b1]] = block[[1, 1]];
    }

    CouplingModel::new(u, phi, psi, Direction::Forward)
}
