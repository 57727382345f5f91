//! Asymptotic-completeness certification: direct AC defects on the
//! chain, Z'-based defect profiles, the spectral verdict, the (d1)
//! injectivity criterion, and the observability dual of the reverse
//! transition.
//!
//! Verdicts are spectral — the stationarity of ω_Ω for Z' plus the
//! dimension of the Z'-fixed space — while the iteration profiles are
//! diagnostic corroboration only; a finite profile never certifies a
//! limit.

use ndarray::prelude::*;
use serde::Serialize;

use crate::gns::{build_extended, ExtendedTransition};
use crate::linalg;
use crate::stationary::{self, SuperOp};
use crate::tensor::{self, ComplexOperator, FactorDims};
use crate::transition::CouplingModel;
use crate::{random, tol, Result, C64};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AcVerdict {
    CertifiedComplete,
    CertifiedIncomplete,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct AcCertificate {
    pub verdict: AcVerdict,
    /// Dimension of the Z'-fixed space (dense mode) or the number of
    /// distinct Cesàro limits found (iterative mode).
    pub fixed_space_dim: usize,
    /// ‖Z'_*(p_Ω) − p_Ω‖₁.
    pub omega_stationarity_residual: f64,
    pub dense_mode: bool,
    /// Trace distance of a second Z'-stationary state to p_Ω, when one
    /// was exhibited.
    pub witness_distance: Option<f64>,
    /// Dimension of ker Σ_{k≤n} Z'ᵏ(p_Ω) at the certification horizon.
    pub kernel_dim: usize,
}

pub struct CertifyResult {
    pub certificate: AcCertificate,
    /// A second Z'-stationary density, for incomplete verdicts.
    pub witness_state: Option<Array2<C64>>,
    /// A GNS vector annihilated by every Z'ᵏ(p_Ω), for incomplete
    /// verdicts.
    pub kernel_witness: Option<Array1<C64>>,
}

/// Direct evaluation of the AC defect on the dense chain:
/// returns (‖Q_nJ_n(a) − J_n(a)‖_{φ⊗ψ_n}, ‖Q_nJ_n(a)‖_{ψ_n}).
pub fn ac_defect_direct(m: &CouplingModel, a: &ComplexOperator, n: usize) -> Result<(f64, f64)> {
    let jn = m.apply_jn(a, n)?;
    let q = m.q_expectation(&jn)?;
    let q_norm = tensor::weighted_norm(&q, &m.psi_chain_state(n))?;
    let embedded = tensor::tensor_product(
        &ComplexOperator::identity(FactorDims::system_only(m.system_dim())),
        &q,
    );
    let diff = ComplexOperator::new(
        embedded.matrix() - jn.matrix(),
        FactorDims::joint(m.system_dim(), m.ancilla_dim(), n),
    )?;
    let weight = tensor::tensor_states(m.phi(), &m.psi_chain_state(n));
    let defect = tensor::weighted_norm(&diff, &weight)?;
    Ok((defect, q_norm))
}

/// Default profile test set: the matrix-unit basis plus 10 seeded
/// Haar-random hermitian operators of unit operator norm. Matrix units
/// expose sparse kernels; the random operators guard against aligned
/// blind spots.
pub fn test_operator_set(n: usize, seed: u64) -> Vec<Array2<C64>> {
    let mut ops = Vec::with_capacity(n * n + 10);
    for i in 0..n {
        for j in 0..n {
            let mut e = Array2::<C64>::zeros((n, n));
            e[[i, j]] = C64::new(1.0, 0.0);
            ops.push(e);
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..10 {
        ops.push(random::random_hermitian_unit(n, &mut rng));
    }
    ops
}

#[derive(Clone, Debug, Serialize)]
pub struct AcProfile {
    pub n_values: Vec<usize>,
    /// defect[n][a] = ‖a‖²_φ − ⟨aΩ, Z'ⁿ(p_Ω) aΩ⟩.
    pub defect_per_basis: Vec<Vec<f64>>,
    /// min eigenvalue of Σ_{k≤n} Z'ᵏ(p_Ω).
    pub min_eig_sum: Vec<f64>,
    /// ‖Z'ⁿ(p_Ω) − 1‖ (operator norm).
    pub one_deviation: Vec<f64>,
    pub verdict: AcVerdict,
    pub certificate: AcCertificate,
}

impl AcProfile {
    pub fn max_defect_at(&self, idx: usize) -> f64 {
        self.defect_per_basis[idx]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rows (n, max defect, min-eig of the running sum, ‖Z'ⁿ(p_Ω)−1‖).
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.n_values
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                vec![
                    n.to_string(),
                    format!("{:.17e}", self.max_defect_at(i)),
                    format!("{:.17e}", self.min_eig_sum[i]),
                    format!("{:.17e}", self.one_deviation[i]),
                ]
            })
            .collect()
    }
}

/// Iterates x ← Z'(x) from p_Ω and records per-operator defects,
/// ‖Z'ⁿ(p_Ω) − 1‖ and the running-sum minimum eigenvalue. Cost is
/// polynomial in N with no chain blow-up.
pub fn ac_profile(
    et: &ExtendedTransition,
    n_max: usize,
    test_set: &[Array2<C64>],
) -> Result<AcProfile> {
    let nn = et.system_dim();
    let phi_norms: Vec<f64> = test_set
        .iter()
        .map(|a| {
            let va = et.gns.embed(&a.view());
            va.iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .collect();
    let eye = linalg::identity(nn * nn);
    let mut x = et.p_omega.clone();
    let mut running = et.p_omega.clone();
    let mut n_values = Vec::new();
    let mut defect_per_basis = Vec::new();
    let mut min_eig_sum = Vec::new();
    let mut one_deviation = Vec::new();
    for n in 1..=n_max {
        x = linalg::hermitize(&et.apply_zprime(&x)?);
        running += &x;
        n_values.push(n);
        let defects: Vec<f64> = test_set
            .iter()
            .zip(&phi_norms)
            .map(|(a, &na)| na - et.quadratic_form(&x, &a.view()).re)
            .collect();
        defect_per_basis.push(defects);
        min_eig_sum.push(linalg::min_eig(&running)?);
        one_deviation.push(linalg::op_norm(&(&x - &eye))?);
    }
    let cert = certify_extended(et)?;
    Ok(AcProfile {
        n_values,
        defect_per_basis,
        min_eig_sum,
        one_deviation,
        verdict: cert.certificate.verdict,
        certificate: cert.certificate,
    })
}

/// Spectral certification on an already-built extended transition.
pub fn certify_extended(et: &ExtendedTransition) -> Result<CertifyResult> {
    let nn = et.system_dim();
    let hdim = nn * nn;
    let omega_res = et.omega_stationarity_defect()?;
    let ch = et.zprime_channel();
    // Dense Z'-superoperator eigenanalysis while its (N⁴)² entries stay
    // within desk scale; beyond that the doubling-Cesàro limit decides
    // or the verdict degrades to undecided.
    let dense = (hdim * hdim) * (hdim * hdim) <= 17_000_000;
    let omega_ok = omega_res <= tol::STRUCTURAL;

    let (verdict, fixed_dim, report) = if dense {
        let report = stationary::stationary_of_superop(&SuperOp::schrodinger(&ch))?;
        if report.fixed_space_dim == 1 && omega_ok {
            (AcVerdict::CertifiedComplete, 1, Some(report))
        } else {
            let dim = report.fixed_space_dim;
            (AcVerdict::CertifiedIncomplete, dim, Some(report))
        }
    } else {
        // Iterative: distance of the Cesàro limit (maximally mixed
        // seed) to p_Ω separates ergodic from non-ergodic.
        let sop = SuperOp::schrodinger(&ch);
        let mm = linalg::identity(hdim).mapv(|z| z / hdim as f64);
        let limit = linalg::hermitize(&stationary::cesaro_limit(&sop, &mm, 1e-12, 45));
        let d = 0.5 * linalg::trace_norm(&(&limit - &et.p_omega))?;
        if omega_ok && d < 1e-6 {
            (AcVerdict::CertifiedComplete, 1, None)
        } else if d > 1e-3 || !omega_ok {
            (AcVerdict::CertifiedIncomplete, 2, None)
        } else {
            (AcVerdict::Undecided, 0, None)
        }
    };

    // Witnesses for incomplete verdicts: a second stationary density
    // and a kernel vector of the d1 partial sums.
    let mut witness_state = None;
    let mut witness_distance = None;
    let mut kernel_witness = None;
    let mut kernel_dim = 0;
    if verdict == AcVerdict::CertifiedIncomplete {
        if let Some(report) = &report {
            for cand in &report.stationary_densities {
                let d = 0.5 * linalg::trace_norm(&(cand.matrix() - &et.p_omega))?;
                if d > 1e-6 && witness_distance.is_none_or(|best| d > best) {
                    witness_distance = Some(d);
                    witness_state = Some(cand.matrix().clone());
                }
            }
        }
        if let Some((dim, vec)) = d1_kernel(et, 4 * hdim)? {
            kernel_dim = dim;
            kernel_witness = Some(vec);
        }
    }

    Ok(CertifyResult {
        certificate: AcCertificate {
            verdict,
            fixed_space_dim: fixed_dim,
            omega_stationarity_residual: omega_res,
            dense_mode: dense,
            witness_distance,
            kernel_dim,
        },
        witness_state,
        kernel_witness,
    })
}

/// certified_complete ⟺ ω_Ω stationary for Z' and the Z'-fixed space
/// one-dimensional.
pub fn certify_ac(m: &CouplingModel) -> Result<CertifyResult> {
    let et = build_extended(m)?;
    certify_extended(&et)
}

/// Kernel of S_n = Σ_{k≤n} Z'ᵏ(p_Ω) at horizon n_max, with a witness
/// vector; `None` if the sum turns positive definite earlier.
fn d1_kernel(
    et: &ExtendedTransition,
    n_max: usize,
) -> Result<Option<(usize, Array1<C64>)>> {
    let mut x = et.p_omega.clone();
    let mut running = et.p_omega.clone();
    for _ in 1..=n_max {
        x = linalg::hermitize(&et.apply_zprime(&x)?);
        running += &x;
        if linalg::min_eig(&running)? > tol::D1_POSITIVE {
            return Ok(None);
        }
    }
    let (vals, vecs) = linalg::eigh(&linalg::hermitize(&running))?;
    let kdim = vals.iter().filter(|&&v| v <= tol::D1_POSITIVE).count();
    let witness = vecs.column(0).to_owned();
    Ok(Some((kdim, witness)))
}

#[derive(Clone, Debug, Serialize)]
pub struct D1Report {
    pub irreducible: bool,
    /// min eigenvalue of Σ_{k=0}^{n} Z'ᵏ(p_Ω) per n = 0…n_max.
    pub min_eigs: Vec<f64>,
    /// First n at which the sum is positive definite.
    pub first_positive: Option<usize>,
    /// Injectivity of a ↦ (Q_kJ_k(a))_k. Decided at the
    /// linear-recurrence horizon dim B(H_φ)² when positivity is not
    /// reached earlier: for fixed ζ the scalars ⟨ζ, Z'ᵏ(p_Ω)ζ⟩ obey the
    /// characteristic recurrence of the Z'-superoperator, so a kernel
    /// vector surviving that many steps survives forever.
    pub injective: bool,
    pub kernel_dim: usize,
}

pub fn d1_check(m: &CouplingModel, n_max: usize) -> Result<D1Report> {
    let et = build_extended(m)?;
    d1_check_extended(m, &et, n_max)
}

pub fn d1_check_extended(
    m: &CouplingModel,
    et: &ExtendedTransition,
    n_max: usize,
) -> Result<D1Report> {
    let ch = m.transition_channel()?;
    let irreducible = stationary::is_irreducible(&ch)?.irreducible;

    let hdim = et.system_dim() * et.system_dim();
    let mut x = et.p_omega.clone();
    let mut running = et.p_omega.clone();
    let mut min_eigs = vec![linalg::min_eig(&running)?];
    let mut first_positive = if min_eigs[0] > tol::D1_POSITIVE {
        Some(0)
    } else {
        None
    };
    let horizon = n_max.max(hdim * hdim);
    let mut injective = first_positive.is_some();
    for n in 1..=horizon {
        x = linalg::hermitize(&et.apply_zprime(&x)?);
        running += &x;
        let me = linalg::min_eig(&running)?;
        if n <= n_max {
            min_eigs.push(me);
        }
        if me > tol::D1_POSITIVE && first_positive.is_none() {
            first_positive = Some(n);
            injective = true;
        }
        if injective && n >= n_max {
            break;
        }
    }
    let kernel_dim = if injective {
        0
    } else {
        let vals = linalg::eigh_values(&linalg::hermitize(&running))?;
        vals.iter().filter(|&&v| v <= tol::D1_POSITIVE).count()
    };
    Ok(D1Report {
        irreducible,
        min_eigs,
        first_positive,
        injective,
        kernel_dim,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservabilityReport {
    pub n_values: Vec<usize>,
    /// Rank of σ ↦ Tr_sys[Uʳ_n(ρ_σ⊗ρ_{ψ_n})Uʳ_n*] per n.
    pub ranks: Vec<usize>,
    pub full_rank_at: Option<usize>,
    pub singular_values: Vec<Vec<f64>>,
}

impl ObservabilityReport {
    pub fn full_rank(&self, n_sys: usize) -> bool {
        self.full_rank_at.is_some() || self.ranks.last() == Some(&(n_sys * n_sys))
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.n_values
            .iter()
            .zip(&self.ranks)
            .map(|(n, r)| vec![n.to_string(), r.to_string()])
            .collect()
    }
}

/// Product eigendecomposition of ρ_ψ^{⊗n}: (weight, vector) pairs.
fn psi_chain_eigs(m: &CouplingModel, n: usize) -> Result<Vec<(f64, Array1<C64>)>> {
    let (vals, vecs) = linalg::eigh(&linalg::hermitize(m.psi().matrix()))?;
    let d = m.ancilla_dim();
    let mut out: Vec<(f64, Array1<C64>)> = vec![(1.0, array![C64::new(1.0, 0.0)])];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * d);
        for (w, v) in &out {
            for k in 0..d {
                if vals[k] <= tol::KRAUS_DROP {
                    continue;
                }
                let col = vecs.column(k);
                let mut nv = Array1::zeros(v.len() * d);
                for (i, &vi) in v.iter().enumerate() {
                    for (j, &cj) in col.iter().enumerate() {
                        nv[i * d + j] = vi * cj;
                    }
                }
                next.push((w * vals[k], nv));
            }
        }
        out = next;
    }
    Ok(out)
}

/// The blocks Y_i = Uʳ_n(1⊗|ξ_i⟩) of the reverse-evolved joint state,
/// from which the observability map is assembled.
fn reverse_blocks(m: &CouplingModel, n: usize) -> Result<Vec<(f64, Array2<C64>)>> {
    let rev = m.reversed();
    let nn = m.system_dim();
    let chain = rev.guard_joint_dim(n)? / nn;
    let eigs = psi_chain_eigs(m, n)?;
    let mut blocks = Vec::with_capacity(eigs.len());
    for (w, xi) in eigs {
        let mut y = Array2::<C64>::zeros((nn * chain, nn));
        for s in 0..nn {
            for c in 0..chain {
                y[[s * chain + c, s]] = xi[c];
            }
        }
        rev.apply_chain_gates(&mut y, n, false)?;
        blocks.push((w, y));
    }
    Ok(blocks)
}

/// Chain marginal of the reverse-evolved σ ⊗ ψ_n for an arbitrary
/// (not necessarily hermitian) system matrix σ.
fn observability_image(
    blocks: &[(f64, Array2<C64>)],
    nn: usize,
    chain: usize,
    sigma: &Array2<C64>,
) -> Array2<C64> {
    let mut out = Array2::<C64>::zeros((chain, chain));
    for (w, y) in blocks {
        let z = y.dot(sigma);
        for c in 0..chain {
            for c2 in 0..chain {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..nn {
                    for t in 0..nn {
                        acc += z[[s * chain + c, t]] * y[[s * chain + c2, t]].conj();
                    }
                }
                out[[c, c2]] += *w * acc;
            }
        }
    }
    out
}

/// Rank growth of the observability map of the reverse transition;
/// full rank at some n together with irreducibility must match the
/// completeness verdict.
pub fn observability_check(m: &CouplingModel, n_max: usize) -> Result<ObservabilityReport> {
    let nn = m.system_dim();
    let mut n_values = Vec::new();
    let mut ranks = Vec::new();
    let mut singular_values = Vec::new();
    let mut full_rank_at = None;
    for n in 1..=n_max {
        let chain = m.guard_joint_dim(n)? / nn;
        let blocks = reverse_blocks(m, n)?;
        let mut map = Array2::<C64>::zeros((chain * chain, nn * nn));
        // matrix-unit inputs collapse one index of the image contraction:
        // O(E_jk)[c,c'] = Σ_i w_i Σ_s Y_i[(s,c),j]·conj(Y_i[(s,c'),k])
        for (w, y) in &blocks {
            for j in 0..nn {
                for k in 0..nn {
                    let col = j * nn + k;
                    for s in 0..nn {
                        for c in 0..chain {
                            let yj = y[[s * chain + c, j]];
                            if yj == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let contrib = *w * yj;
                            for c2 in 0..chain {
                                map[[c * chain + c2, col]] +=
                                    contrib * y[[s * chain + c2, k]].conj();
                            }
                        }
                    }
                }
            }
        }
        let sv = linalg::singular_values(&map)?;
        let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
        let rank = sv
            .iter()
            .filter(|&&s| s > tol::RANK_REL * smax.max(f64::MIN_POSITIVE))
            .count();
        n_values.push(n);
        ranks.push(rank);
        singular_values.push(sv.to_vec());
        if rank == nn * nn && full_rank_at.is_none() {
            full_rank_at = Some(n);
        }
        if full_rank_at.is_some() {
            break;
        }
    }
    Ok(ObservabilityReport {
        n_values,
        ranks,
        full_rank_at,
        singular_values,
    })
}

/// The ψ_n-weighted dual norm of the chain marginal of φ_a ⊗ ψ_n under
/// the reverse evolution — the sup side of the observability norm
/// identity ‖Q_nJ_n(a)‖_{ψ_n} = sup_{‖c‖_{ψ_n}=1} |…(1⊗c)|, evaluated
/// through the Riesz representer of c ↦ Tr(m·c).
pub fn observability_dual_norm(m: &CouplingModel, a: &Array2<C64>, n: usize) -> Result<f64> {
    let nn = m.system_dim();
    let chain = m.guard_joint_dim(n)? / nn;
    let blocks = reverse_blocks(m, n)?;
    let phi_a = m.phi().matrix().dot(a);
    let marginal = observability_image(&blocks, nn, chain, &phi_a);
    let psi_n = m.psi_chain_matrix(n);
    let psi_inv = linalg::inv_pd(&psi_n, 0.0)?;
    let val = linalg::trace(
        &marginal
            .dot(&linalg::adjoint(&marginal.view()))
            .dot(&psi_inv)
            .view(),
    );
    Ok(val.re.max(0.0).sqrt())
}

/// The twisted-flip coupling of the worked example: u|s,c⟩ = |c, s⊕c⟩
/// on two qubits with the tracial pair. J(a) = 1⊗a on diagonals and
/// σ_x⊗a on off-diagonals; not asymptotically complete.
pub fn twisted_flip_model() -> Result<CouplingModel> {
    let mut u = Array2::<C64>::zeros((4, 4));
    for s in 0..2usize {
        for c in 0..2usize {
            u[[c * 2 + (s ^ c), s * 2 + c]] = C64::new(1.0, 0.0);
        }
    }
    let tau = tensor::DensityState::maximally_mixed(2);
    CouplingModel::new(u, tau.clone(), tau, crate::transition::Direction::Forward)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::micromaser;
    use crate::tensor::DensityState;
    use crate::transition::Direction;

    fn swap_model() -> CouplingModel {
        let mut u = Array2::zeros((4, 4));
        for i in 0..2 {
            for j in 0..2 {
                u[[i * 2 + j, j * 2 + i]] = C64::new(1.0, 0.0);
            }
        }
        let mut rng = ChaCha12Rng::seed_from_u64(80);
        let psi = random::random_faithful_density(2, &mut rng);
        CouplingModel::new(u, psi.clone(), psi, Direction::Forward).unwrap()
    }

    fn identity_model() -> CouplingModel {
        let phi = DensityState::maximally_mixed(2);
        let psi = DensityState::maximally_mixed(2);
        CouplingModel::new(linalg::identity(4), phi, psi, Direction::Forward).unwrap()
    }

    #[test]
    fn swap_is_one_step_complete() {
        let m = swap_model();
        let mut rng = ChaCha12Rng::seed_from_u64(81);
        let a = ComplexOperator::on_system(random::random_matrix(2, &mut rng)).unwrap();
        let (defect, _) = ac_defect_direct(&m, &a, 1).unwrap();
        assert!(defect < 1e-12, "swap defect at n=1: {defect}");
        let res = certify_ac(&m).unwrap();
        assert_eq!(res.certificate.verdict, AcVerdict::CertifiedComplete);
    }

    #[test]
    fn identity_coupling_incomplete_with_analytic_defect() {
        let m = identity_model();
        let mut rng = ChaCha12Rng::seed_from_u64(82);
        for _ in 0..5 {
            let a = ComplexOperator::on_system(random::random_matrix(2, &mut rng)).unwrap();
            let (defect, qn) = ac_defect_direct(&m, &a, 2).unwrap();
            // Q_nJ_n(a) = φ(a)·1 ⇒ defect² = ‖a‖²_φ − |φ(a)|²
            let na = tensor::weighted_norm(&a, m.phi()).unwrap();
            let phi_a = m.phi().expectation(&a.matrix().view());
            let expect = (na * na - phi_a.norm_sqr()).max(0.0).sqrt();
            assert!((defect - expect).abs() < 1e-11);
            assert!((qn - phi_a.norm()).abs() < 1e-11);
        }
        let res = certify_ac(&m).unwrap();
        assert_eq!(res.certificate.verdict, AcVerdict::CertifiedIncomplete);
        assert!(res.witness_state.is_some());
    }

    #[test]
    fn twisted_flip_witness() {
        let m = twisted_flip_model().unwrap();
        // J_n(σ_x) = σ_x ⊗ σ_x^{⊗n}
        let sx = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let sxop = ComplexOperator::on_system(sx.clone()).unwrap();
        let j1 = m.apply_j(&sxop).unwrap();
        let expect = linalg::kron(&sx.view(), &sx.view());
        assert!(linalg::frobenius(&(j1.matrix() - &expect)) < 1e-13);
        for n in 1..=6usize {
            let q = m.q_expectation(&m.apply_jn(&sxop, n).unwrap()).unwrap();
            assert!(
                linalg::frobenius(q.matrix()) < 1e-12,
                "Q_nJ_n(σ_x) must vanish at n={n}"
            );
        }
        let res = certify_ac(&m).unwrap();
        assert_eq!(res.certificate.verdict, AcVerdict::CertifiedIncomplete);
        assert!(res.kernel_witness.is_some());
        assert!(res.certificate.kernel_dim > 0);
    }

    #[test]
    fn profile_two_route_agreement_and_monotonicity() {
        let mut rng = ChaCha12Rng::seed_from_u64(83);
        for _ in 0..3 {
            let m = random::random_product_stationary_model(2, &mut rng).unwrap();
            let et = build_extended(&m).unwrap();
            let ops = test_operator_set(2, 7);
            let profile = ac_profile(&et, 3, &ops).unwrap();
            for (i, &n) in profile.n_values.iter().enumerate() {
                for (j, a) in ops.iter().enumerate() {
                    let aop = ComplexOperator::on_system(a.clone()).unwrap();
                    let (_, qn) = ac_defect_direct(&m, &aop, n).unwrap();
                    let na = tensor::weighted_norm(&aop, m.phi()).unwrap();
                    let via_z = na * na - profile.defect_per_basis[i][j];
                    assert!(
                        (via_z - qn * qn).abs() < 1e-9,
                        "two-route mismatch at n={n}"
                    );
                    assert!(profile.defect_per_basis[i][j] > -1e-9);
                }
            }
            // monotone nonincreasing in n
            for j in 0..ops.len() {
                for i in 1..profile.n_values.len() {
                    assert!(
                        profile.defect_per_basis[i][j]
                            <= profile.defect_per_basis[i - 1][j] + 1e-10
                    );
                }
            }
        }
    }

    #[test]
    fn d1_swap_positive_at_one_step() {
        let m = swap_model();
        let rep = d1_check(&m, 3).unwrap();
        assert!(rep.irreducible);
        assert!(rep.injective);
        assert_eq!(rep.first_positive, Some(1));
    }

    #[test]
    fn d1_twisted_flip_kernel_persists() {
        let m = twisted_flip_model().unwrap();
        let rep = d1_check(&m, 8).unwrap();
        assert!(!rep.injective);
        assert!(rep.kernel_dim > 0);
        // σ_x stays in the kernel: its GNS vector is annihilated by all
        // Z'ᵏ(p_Ω)
        let et = build_extended(&m).unwrap();
        let sx = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let mut x = et.p_omega.clone();
        for _ in 0..6 {
            let form = et.quadratic_form(&x, &sx.view());
            assert!(form.norm() < 1e-12);
            x = et.apply_zprime(&x).unwrap();
        }
    }

    #[test]
    fn d1_direct_vs_zprime_kernel_dims() {
        // stacked Q_kJ_k maps vs kernel of Σ Z'ᵏ(p_Ω) for n ≤ 3
        let models: Vec<CouplingModel> = {
            let mut rng = ChaCha12Rng::seed_from_u64(84);
            let mut v = vec![twisted_flip_model().unwrap(), swap_model()];
            for _ in 0..3 {
                v.push(random::random_product_stationary_model(2, &mut rng).unwrap());
            }
            v
        };
        for m in &models {
            let et = build_extended(m).unwrap();
            let nn = m.system_dim();
            for n in 1..=3usize {
                let mut x = et.p_omega.clone();
                let mut running = et.p_omega.clone();
                for _ in 0..n {
                    x = linalg::hermitize(&et.apply_zprime(&x).unwrap());
                    running += &x;
                }
                let vals = linalg::eigh_values(&running).unwrap();
                let kdim_z = vals.iter().filter(|&&v| v <= 1e-10).count();
                // stacked map a ↦ (Q_kJ_k(a))_{k=0..n}
                let rows = 1 + (1..=n)
                    .map(|k| {
                        let c = m.ancilla_dim().pow(k as u32);
                        c * c
                    })
                    .sum::<usize>();
                let mut map = Array2::<C64>::zeros((rows, nn * nn));
                for j in 0..nn {
                    for kcol in 0..nn {
                        let mut e = Array2::<C64>::zeros((nn, nn));
                        e[[j, kcol]] = C64::new(1.0, 0.0);
                        let eop = ComplexOperator::on_system(e).unwrap();
                        let col = j * nn + kcol;
                        let mut row = 0;
                        map[[row, col]] = m.phi().expectation(&eop.matrix().view());
                        row += 1;
                        for k in 1..=n {
                            let q = m.q_expectation(&m.apply_jn(&eop, k).unwrap()).unwrap();
                            for v in q.matrix().iter() {
                                map[[row, col]] = *v;
                                row += 1;
                            }
                        }
                    }
                }
                let sv = linalg::singular_values(&map).unwrap();
                let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
                let rank = sv
                    .iter()
                    .filter(|&&s| s > 1e-10 * smax.max(1e-300))
                    .count();
                let kdim_direct = nn * nn - rank;
                assert_eq!(
                    kdim_z, kdim_direct,
                    "kernel dims disagree at n={n} for a corpus model"
                );
            }
        }
    }

    #[test]
    fn observability_swap_full_rank_at_one() {
        let m = swap_model();
        let rep = observability_check(&m, 2).unwrap();
        assert_eq!(rep.full_rank_at, Some(1));
        assert_eq!(rep.ranks[0], 4);
    }

    #[test]
    fn observability_ranks_nondecreasing_and_plateau_for_trapped() {
        let p = micromaser::jc_resonant(2.0 * std::f64::consts::PI, 4, 1.0 / 3.0).unwrap();
        let m = micromaser::build_micromaser(&p).unwrap();
        let rep = observability_check(&m, 4).unwrap();
        for w in rep.ranks.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(rep.full_rank_at.is_none(), "trapped model must plateau");
        assert!(*rep.ranks.last().unwrap() < 16);
    }

    #[test]
    fn observability_norm_identity() {
        // The sup over ‖c‖_{ψ_n} = 1 equals ‖Q_nJ_n(a*)‖_{ψ_n}: the
        // Riesz representer of c ↦ ψ_n(b·c) is b*, so the adjoint
        // appears unless a is hermitian. Checked for n ≤ 2.
        let mut rng = ChaCha12Rng::seed_from_u64(85);
        for _ in 0..3 {
            let m = random::random_product_stationary_model(2, &mut rng).unwrap();
            for k in 0..5 {
                let a = if k % 2 == 0 {
                    random::random_hermitian(2, &mut rng)
                } else {
                    random::random_matrix(2, &mut rng)
                };
                for n in 1..=2usize {
                    let astar = ComplexOperator::on_system(linalg::adjoint(&a.view())).unwrap();
                    let q = m.q_expectation(&m.apply_jn(&astar, n).unwrap()).unwrap();
                    let lhs = tensor::weighted_norm(&q, &m.psi_chain_state(n)).unwrap();
                    let rhs = observability_dual_norm(&m, &a, n).unwrap();
                    assert!(
                        (lhs - rhs).abs() < 1e-10,
                        "norm identity at n={n}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn consistency_triangle_small_corpus() {
        let mut models: Vec<(String, CouplingModel)> = vec![
            ("swap".into(), swap_model()),
            ("identity".into(), identity_model()),
            ("twisted-flip".into(), twisted_flip_model().unwrap()),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(86);
        for k in 0..2 {
            models.push((
                format!("ladder-{k}"),
                random::random_product_stationary_model(3, &mut rng).unwrap(),
            ));
        }
        for (name, m) in &models {
            let ac = certify_ac(m).unwrap().certificate.verdict == AcVerdict::CertifiedComplete;
            let d1 = d1_check(m, 6).unwrap();
            let d1_ok = d1.irreducible && d1.injective;
            let obs = observability_check(m, 4).unwrap();
            let obs_ok = d1.irreducible && obs.full_rank(m.system_dim());
            assert_eq!(ac, d1_ok, "triangle (ac vs d1) on {name}");
            assert_eq!(ac, obs_ok, "triangle (ac vs observability) on {name}");
        }
    }
}
