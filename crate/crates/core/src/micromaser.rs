//! The generalized micromaser model family: block-diagonal coupling
//! unitaries from 2×2 coefficient blocks, the resonant Jaynes-Cummings
//! preset, λ-parametrized stationary pairs, the birth-death reduction of
//! T_{ψ_λ} to the diagonal algebra, and trapped-state scanning.
//!
//! Basis bookkeeping: system levels are Fock levels 0…N−1; the ancilla
//! index 0 is the excited state ε₁ and index 1 the ground state ε₀, so
//! that ρ_ψ = diag(λ, 1−λ). The joint space splits into the invariant
//! doublets H_n = span{δ_{n−1}⊗ε₁, δ_n⊗ε₀} for n = 1…N−1 plus the two
//! singletons δ₀⊗ε₀ (phase α₀) and the truncation orphan δ_{N−1}⊗ε₁,
//! which is held fixed (equivalently β_N = 0).

use ndarray::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::tensor::{DensityState, FactorDims};
use crate::transition::{CouplingModel, Direction};
use crate::{Error, Result, C64};

/// One unitary coefficient block (α⁺_n, β⁺_n; β_n, α_n).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CoefficientBlock {
    pub alpha_plus: C64,
    pub beta_plus: C64,
    pub beta: C64,
    pub alpha: C64,
}

impl CoefficientBlock {
    pub fn unitarity_defect(&self) -> f64 {
        let m = array![
            [self.alpha_plus, self.beta_plus],
            [self.beta, self.alpha]
        ];
        linalg::unitarity_defect(&m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MicromaserParams {
    /// Truncation level count: Fock levels 0…N−1.
    pub n_levels: usize,
    /// Blocks for doublets n = 1…N−1 (index n−1 in the vector).
    pub coeffs: Vec<CoefficientBlock>,
    /// Unimodular phase on the singleton δ₀⊗ε₀.
    pub alpha0: C64,
    /// Ancilla inversion parameter, λ ∈ [0, ½).
    pub lambda: f64,
}

impl MicromaserParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 2 || self.coeffs.len() != self.n_levels - 1 {
            return Err(Error::Invalid(format!(
                "expected {} coefficient blocks for N = {}, got {}",
                self.n_levels.saturating_sub(1),
                self.n_levels,
                self.coeffs.len()
            )));
        }
        if !(0.0..0.5).contains(&self.lambda) {
            return Err(Error::LambdaOutOfRange(self.lambda));
        }
        if (self.alpha0.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "alpha0 not unimodular: |α₀| = {}",
                self.alpha0.norm()
            )));
        }
        for (i, b) in self.coeffs.iter().enumerate() {
            let defect = b.unitarity_defect();
            if defect > 1e-12 {
                return Err(Error::BlockNotUnitary {
                    index: i + 1,
                    defect,
                });
            }
            // |α| = |α⁺| and |β| = |β⁺| follow from unitarity; asserted.
            debug_assert!((b.alpha.norm() - b.alpha_plus.norm()).abs() < 1e-10);
            debug_assert!((b.beta.norm() - b.beta_plus.norm()).abs() < 1e-10);
        }
        Ok(())
    }

    /// |β_n|² for n = 1…N−1.
    pub fn beta_sq(&self) -> Vec<f64> {
        self.coeffs.iter().map(|b| b.beta.norm_sqr()).collect()
    }

    /// |α_n|² for n = 1…N−1.
    pub fn alpha_sq(&self) -> Vec<f64> {
        self.coeffs.iter().map(|b| b.alpha.norm_sqr()).collect()
    }
}

/// Resonant Jaynes-Cummings preset: doublet n rotates by the angle
/// φ_n = √n · Ω₀T/2, with block (cos φ_n, −i sin φ_n; −i sin φ_n,
/// cos φ_n) and α₀ = 1.
pub fn jc_resonant(omega0_t: f64, n_levels: usize, lambda: f64) -> Result<MicromaserParams> {
    if n_levels < 2 {
        return Err(Error::Invalid("need at least 2 Fock levels".into()));
    }
    let coeffs = (1..n_levels)
        .map(|n| {
            let phi = (n as f64).sqrt() * omega0_t / 2.0;
            let (c, s) = (phi.cos(), phi.sin());
            CoefficientBlock {
                alpha_plus: C64::new(c, 0.0),
                beta_plus: C64::new(0.0, -s),
                beta: C64::new(0.0, -s),
                alpha: C64::new(c, 0.0),
            }
        })
        .collect();
    let p = MicromaserParams {
        n_levels,
        coeffs,
        alpha0: C64::new(1.0, 0.0),
        lambda,
    };
    p.validate()?;
    Ok(p)
}

/// Truncated-renormalized geometric ν_λ on the system and d_λ on the
/// ancilla; the exact stationary pair of the truncated model.
pub fn lambda_stationary(p: &MicromaserParams) -> Result<(DensityState, DensityState)> {
    if !(0.0..0.5).contains(&p.lambda) {
        return Err(Error::LambdaOutOfRange(p.lambda));
    }
    let ratio = p.lambda / (1.0 - p.lambda);
    let mut weights: Vec<f64> = (0..p.n_levels).map(|n| ratio.powi(n as i32)).collect();
    let norm: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= norm);
    let phi = DensityState::diagonal(&weights, FactorDims::system_only(p.n_levels))?;
    let psi = DensityState::diagonal(
        &[p.lambda, 1.0 - p.lambda],
        FactorDims::system_only(2),
    )?;
    Ok((phi, psi))
}

/// Builds the coupling model: u acts block-diagonally on the doublets,
/// with the reference pair (ν_λ, d_λ).
pub fn build_micromaser(p: &MicromaserParams) -> Result<CouplingModel> {
    p.validate()?;
    let n = p.n_levels;
    let idx = |level: usize, e: usize| 2 * level + e; // e = 0 ↔ ε₁, 1 ↔ ε₀
    let mut u = Array2::<C64>::zeros((2 * n, 2 * n));
    // singleton δ₀⊗ε₀: phase α₀
    u[[idx(0, 1), idx(0, 1)]] = p.alpha0;
    // truncation orphan δ_{N−1}⊗ε₁ held fixed (β_N = 0)
    u[[idx(n - 1, 0), idx(n - 1, 0)]] = C64::new(1.0, 0.0);
    // doublets H_n = span{δ_{n−1}⊗ε₁, δ_n⊗ε₀}
    for (k, b) in p.coeffs.iter().enumerate() {
        let up = idx(k, 0); // δ_{n−1}⊗ε₁ with n = k+1
        let dn = idx(k + 1, 1); // δ_n⊗ε₀
        u[[up, up]] = b.alpha_plus;
        u[[up, dn]] = b.beta_plus;
        u[[dn, up]] = b.beta;
        u[[dn, dn]] = b.alpha;
    }
    let (phi, psi) = lambda_stationary(p)?;
    CouplingModel::new(u, phi, psi, Direction::Forward)
}

/// Classical tridiagonal stochastic matrix: the restriction of T_{ψ_λ}
/// to the diagonal algebra, rows indexed by Fock level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BirthDeathMatrix {
    pub rows: Vec<Vec<f64>>,
}

impl BirthDeathMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row_sum_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// max |entry| off the three central diagonals.
    pub fn tridiagonality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, r) in self.rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if i.abs_diff(j) > 1 {
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// ‖νM − ν‖₁ for a left probability vector ν.
    pub fn left_residual(&self, nu: &[f64]) -> f64 {
        let n = self.n();
        let mut out = vec![0.0_f64; n];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                out[j] += nu[i] * v;
            }
        }
        out.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Restricts T_{ψ_λ} to the diagonal algebra, checking that the channel
/// preserves diagonals (off-diagonal leakage below `leak_tol`).
pub fn birth_death_reduction(m: &CouplingModel, leak_tol: f64) -> Result<BirthDeathMatrix> {
    let n = m.system_dim();
    let ch = m.transition_channel()?;
    let mut rows = vec![vec![0.0_f64; n]; n];
    for col in 0..n {
        let mut e = Array2::<C64>::zeros((n, n));
        e[[col, col]] = C64::new(1.0, 0.0);
        let t = ch.apply(&e);
        let mut leak = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    rows[i][col] = t[[i, i]].re;
                    leak = leak.max(t[[i, i]].im.abs());
                } else {
                    leak = leak.max(t[[i, j]].norm());
                }
            }
        }
        if leak > leak_tol {
            return Err(Error::DiagonalLeakage { leakage: leak });
        }
    }
    Ok(BirthDeathMatrix { rows })
}

/// The tridiagonal entries predicted by the coefficient moduli; used to
/// cross-check `birth_death_reduction` against the closed forms.
pub fn birth_death_formula(p: &MicromaserParams) -> BirthDeathMatrix {
    let n = p.n_levels;
    let lam = p.lambda;
    // |α_n|², |β_n|² for n = 1…N with the boundary β_N = 0, α_N = 1.
    let mut asq = vec![0.0_f64; n + 1];
    let mut bsq = vec![0.0_f64; n + 1];
    for k in 1..n {
        asq[k] = p.coeffs[k - 1].alpha.norm_sqr();
        bsq[k] = p.coeffs[k - 1].beta.norm_sqr();
    }
    asq[n] = 1.0;
    bsq[n] = 0.0;
    let mut rows = vec![vec![0.0_f64; n]; n];
    for level in 0..n {
        let k = level + 1; // doublet index of the level
        if level > 0 {
            rows[level][level - 1] = (1.0 - lam) * bsq[level];
        }
        let diag_lower = if level == 0 {
            1.0 - lam // |α₀|² = 1
        } else {
            (1.0 - lam) * asq[level]
        };
        rows[level][level] = diag_lower + lam * asq[k];
        if level + 1 < n {
            rows[level][level + 1] = lam * bsq[k];
        }
    }
    BirthDeathMatrix { rows }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrappedScan {
    /// Interior trapped levels: n ≤ N−1 with |β_n| < tol.
    pub interior: Vec<usize>,
    /// The synthetic boundary trap β_N = 0 imposed by truncation; always
    /// present and reported separately so it is never mistaken for a
    /// physical trapped state.
    pub boundary_artifact: usize,
}

pub fn trapped_scan(p: &MicromaserParams, tol: f64) -> TrappedScan {
    let interior = p
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, b)| b.beta.norm() < tol)
        .map(|(k, _)| k + 1)
        .collect();
    TrappedScan {
        interior,
        boundary_artifact: p.n_levels,
    }
}

/// Serialized form: either explicit blocks or the JC preset.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MicromaserJson {
    Preset {
        n_levels: usize,
        lambda: f64,
        omega0_t: f64,
    },
    Explicit {
        n_levels: usize,
        lambda: f64,
        alpha0: [f64; 2],
        /// per doublet: [[α⁺, β⁺], [β, α]] as [re, im] pairs
        blocks: Vec<[[[f64; 2]; 2]; 2]>,
    },
}

impl MicromaserJson {
    pub fn to_params(&self) -> Result<MicromaserParams> {
        match self {
            MicromaserJson::Preset {
                n_levels,
                lambda,
                omega0_t,
            } => jc_resonant(*omega0_t, *n_levels, *lambda),
            MicromaserJson::Explicit {
                n_levels,
                lambda,
                alpha0,
                blocks,
            } => {
                let coeffs = blocks
                    .iter()
                    .map(|b| CoefficientBlock {
                        alpha_plus: C64::new(b[0][0][0], b[0][0][1]),
                        beta_plus: C64::new(b[0][1][0], b[0][1][1]),
                        beta: C64::new(b[1][0][0], b[1][0][1]),
                        alpha: C64::new(b[1][1][0], b[1][1][1]),
                    })
                    .collect();
                let p = MicromaserParams {
                    n_levels: *n_levels,
                    coeffs,
                    alpha0: C64::new(alpha0[0], alpha0[1]),
                    lambda: *lambda,
                };
                p.validate()?;
                Ok(p)
            }
        }
    }

    pub fn from_params(p: &MicromaserParams) -> Self {
        MicromaserJson::Explicit {
            n_levels: p.n_levels,
            lambda: p.lambda,
            alpha0: [p.alpha0.re, p.alpha0.im],
            blocks: p
                .coeffs
                .iter()
                .map(|b| {
                    [
                        [
                            [b.alpha_plus.re, b.alpha_plus.im],
                            [b.beta_plus.re, b.beta_plus.im],
                        ],
                        [[b.beta.re, b.beta.im], [b.alpha.re, b.alpha.im]],
                    ]
                })
                .collect(),
        }
    }
}
