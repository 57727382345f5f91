//! GNS representation of (B(H), φ), the isometry v extending J, the
//! dual extended transition operator Z'(x) = v*(x⊗1)v, the φ-adjoint
//! channel T⁺ and the commutant restriction T'.
//!
//! H_φ is identified with Hilbert-Schmidt space through a ↦ vec(a·ρ^{1/2})
//! (row-major vec), with cyclic vector Ω = vec(ρ^{1/2}). The isometry is
//! assembled columnwise as v(vec X) = reorder(vec(J(Xρ^{−1/2})·
//! (ρ_φ^{1/2}⊗ρ_ψ^{1/2}))), where the reorder step maps HS(H⊗C) onto
//! HS(H)⊗HS(C) by |ik⟩⟨jl| ↦ E^H_{ij}⊗E^C_{kl}. Slicing v along the
//! HS(C) index yields the d² Kraus operators of Z'.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::prelude::*;

use crate::linalg;
use crate::stationary::SuperOp;
use crate::tensor::DensityState;
use crate::transition::{CouplingModel, KrausChannel};
use crate::{tol, Error, Result, C64};

/// GNS data of a faithful state: ρ^{1/2}, its inverse, and the cyclic
/// vector Ω = vec(ρ^{1/2}).
#[derive(Clone, Debug)]
pub struct GnsSpace {
    pub rho_half: Array2<C64>,
    pub rho_half_inv: Array2<C64>,
    pub omega: Array1<C64>,
    /// N² = dim H_φ.
    pub dim: usize,
    n: usize,
}

impl GnsSpace {
    pub fn system_dim(&self) -> usize {
        self.n
    }

    /// Image of a under the GNS embedding: vec(a·ρ^{1/2}).
    pub fn embed(&self, a: &ArrayView2<C64>) -> Array1<C64> {
        linalg::vec_of(&a.dot(&self.rho_half).view())
    }

    /// Left-multiplication operator L_a = a ⊗ 1 on HS(H).
    pub fn left_mul(&self, a: &ArrayView2<C64>) -> Array2<C64> {
        linalg::kron(a, &linalg::identity(self.n).view())
    }
}

/// GNS construction; rejects non-faithful φ with eigenvalue evidence.
pub fn build_gns(phi: &DensityState) -> Result<GnsSpace> {
    let (vals, _) = linalg::eigh(&linalg::hermitize(phi.matrix()))?;
    let max = vals.iter().cloned().fold(0.0_f64, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = tol::FAITHFUL_REL * max;
    if min <= threshold {
        return Err(Error::NotFaithful {
            min_eig: min,
            threshold,
        });
    }
    let rho_half = linalg::sqrtm_psd(phi.matrix())?;
    let rho_half_inv = linalg::func_psd(phi.matrix(), |x| 1.0 / x.max(threshold).sqrt())?;
    let omega = linalg::vec_of(&rho_half.view());
    let n = phi.side();
    Ok(GnsSpace {
        rho_half,
        rho_half_inv,
        omega,
        dim: n * n,
        n,
    })
}

/// Index permutation HS(H)⊗HS(C) ← HS(H⊗C), cached per (N, d); this is
/// the only index-gymnastics hot spot.
fn reorder_table(n: usize, d: usize) -> Arc<Vec<usize>> {
    type Cache = Mutex<HashMap<(usize, usize), Arc<Vec<usize>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("reorder cache lock");
    guard
        .entry((n, d))
        .or_insert_with(|| {
            let nd = n * d;
            let mut table = vec![0usize; nd * nd];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..d {
                        for l in 0..d {
                            let target = (i * n + j) * d * d + (k * d + l);
                            let source = (i * d + k) * nd + (j * d + l);
                            table[target] = source;
                        }
                    }
                }
            }
            Arc::new(table)
        })
        .clone()
}

/// The GNS isometry v and the dual extended transition Z'.
#[derive(Clone, Debug)]
pub struct ExtendedTransition {
    /// (N²·d²) × N².
    pub v: Array2<C64>,
    pub gns: GnsSpace,
    /// Rank-1 projection onto Ω.
    pub p_omega: Array2<C64>,
    /// Kraus family of Z': the d² HS(C)-slices of v.
    kraus: Vec<Array2<C64>>,
    n_sys: usize,
    d_anc: usize,
}

/// Builds v on the GNS spaces of (φ, ψ); requires both states faithful
/// and the product state stationary for the coupling. When several
/// faithful stationary pairs exist any passing pair is accepted — the
/// completeness verdict does not depend on the choice.
pub fn build_extended(m: &CouplingModel) -> Result<ExtendedTransition> {
    let stat = m.product_stationarity_defect()?;
    if stat > tol::PRODUCT_STATIONARY {
        return Err(Error::NotProductStationary {
            defect: stat,
            tol: tol::PRODUCT_STATIONARY,
        });
    }
    let gns = build_gns(m.phi())?;
    let psi_half = {
        // faithfulness of ψ checked the same way as φ
        let g = build_gns(m.psi())?;
        g.rho_half
    };
    let n = m.system_dim();
    let d = m.ancilla_dim();
    let table = reorder_table(n, d);
    let w = m.effective_coupling();
    let w_adj = linalg::adjoint(&w.view());
    let joint_half = linalg::kron(&gns.rho_half.view(), &psi_half.view());

    let mut v = Array2::<C64>::zeros((n * n * d * d, n * n));
    for i in 0..n {
        for j in 0..n {
            // a = E_ij ρ^{−1/2}: a_{st} = δ_si (ρ^{−1/2})_{jt}
            let mut a = Array2::<C64>::zeros((n, n));
            for t in 0..n {
                a[[i, t]] = gns.rho_half_inv[[j, t]];
            }
            let a1 = linalg::kron(&a.view(), &linalg::identity(d).view());
            let ja = w_adj.dot(&a1).dot(&w);
            let hs = ja.dot(&joint_half);
            let flat = linalg::vec_of(&hs.view());
            let col = i * n + j;
            for (target, &source) in table.iter().enumerate() {
                v[[target, col]] = flat[source];
            }
        }
    }

    let iso_defect = {
        let vv = linalg::adjoint(&v.view()).dot(&v);
        linalg::frobenius(&(vv - linalg::identity(n * n)))
    };
    if iso_defect > tol::STRUCTURAL {
        return Err(Error::Linalg(format!(
            "extended transition is not isometric: ‖v*v−1‖ = {iso_defect:.3e}"
        )));
    }

    let mut p_omega = Array2::<C64>::zeros((n * n, n * n));
    for a in 0..n * n {
        for b in 0..n * n {
            p_omega[[a, b]] = gns.omega[a] * gns.omega[b].conj();
        }
    }

    let dd = d * d;
    let kraus = (0..dd)
        .map(|k| {
            let mut vk = Array2::<C64>::zeros((n * n, n * n));
            for p in 0..n * n {
                for q in 0..n * n {
                    vk[[p, q]] = v[[p * dd + k, q]];
                }
            }
            vk
        })
        .collect();

    Ok(ExtendedTransition {
        v,
        gns,
        p_omega,
        kraus,
        n_sys: n,
        d_anc: d,
    })
}

impl ExtendedTransition {
    pub fn system_dim(&self) -> usize {
        self.n_sys
    }

    pub fn ancilla_dim(&self) -> usize {
        self.d_anc
    }

    pub fn isometry_defect(&self) -> f64 {
        let vv = linalg::adjoint(&self.v.view()).dot(&self.v);
        linalg::frobenius(&(vv - linalg::identity(self.n_sys * self.n_sys)))
    }

    /// Z'(x) = v*(x ⊗ 1_{d²})v, applied through the Kraus slices rather
    /// than materializing x ⊗ 1.
    pub fn apply_zprime(&self, x: &Array2<C64>) -> Result<Array2<C64>> {
        let dim = self.n_sys * self.n_sys;
        if x.nrows() != dim || x.ncols() != dim {
            return Err(Error::DimMismatch(format!(
                "Z' operand must be {dim}×{dim}"
            )));
        }
        let mut out = Array2::<C64>::zeros((dim, dim));
        for vk in &self.kraus {
            out += &linalg::adjoint(&vk.view()).dot(x).dot(vk);
        }
        Ok(out)
    }

    /// Z' packaged as a channel on H_φ (dimension N²); its stationary
    /// and absorbing structure decides asymptotic completeness.
    pub fn zprime_channel(&self) -> KrausChannel {
        KrausChannel::from_ops(self.kraus.clone()).expect("Z' Kraus family")
    }

    /// ‖Z'_*(p_Ω) − p_Ω‖₁, the stationarity of ω_Ω.
    pub fn omega_stationarity_defect(&self) -> Result<f64> {
        let ch = self.zprime_channel();
        let moved = ch.apply_pre(&self.p_omega);
        linalg::trace_norm(&(moved - &self.p_omega))
    }

    /// ⟨aΩ, x · aΩ⟩ for x on H_φ.
    pub fn quadratic_form(&self, x: &Array2<C64>, a: &ArrayView2<C64>) -> C64 {
        let va = self.gns.embed(a);
        let xa = x.dot(&va);
        va.iter().zip(xa.iter()).map(|(l, r)| l.conj() * r).sum()
    }
}

/// The φ-adjoint T⁺ of a channel: φ(T⁺(a)*·b) = φ(a*·T(b)); realized as
/// T⁺(a) = T_*(a·ρ_φ)·ρ_φ^{−1}. Unital and φ-stationary when φ is
/// stationary for T.
pub struct AdjointMap {
    channel: KrausChannel,
    rho: Array2<C64>,
    rho_inv: Array2<C64>,
    dim: usize,
}

pub fn adjoint_channel(ch: &KrausChannel, phi: &DensityState) -> Result<AdjointMap> {
    if phi.side() != ch.dim() {
        return Err(Error::DimMismatch("adjoint channel state".into()));
    }
    let res = linalg::trace_norm(&(ch.apply_pre(phi.matrix()) - phi.matrix()))?;
    if res > 1e-9 {
        return Err(Error::NotStationary { residual: res });
    }
    let gns = build_gns(phi)?;
    let rho_inv = gns.rho_half_inv.dot(&gns.rho_half_inv);
    Ok(AdjointMap {
        channel: ch.clone(),
        rho: phi.matrix().clone(),
        rho_inv,
        dim: ch.dim(),
    })
}

impl AdjointMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, a: &Array2<C64>) -> Array2<C64> {
        self.channel.apply_pre(&a.dot(&self.rho)).dot(&self.rho_inv)
    }

    /// |φ(T⁺(a)*b) − φ(a*T(b))| on a given pair.
    pub fn defining_relation_residual(&self, a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        let ta = self.apply(a);
        let lhs = linalg::trace(
            &self
                .rho
                .dot(&linalg::adjoint(&ta.view()))
                .dot(b)
                .view(),
        );
        let rhs = linalg::trace(
            &self
                .rho
                .dot(&linalg::adjoint(&a.view()))
                .dot(&self.channel.apply(b))
                .view(),
        );
        (lhs - rhs).norm()
    }
}

/// Z' restricted to the commutant A' = {1 ⊗ m} of the left
/// multiplications on HS(H); the restriction is the dual operator T'.
pub struct CommutantDual<'a> {
    et: &'a ExtendedTransition,
}

pub fn commutant_dual(et: &ExtendedTransition) -> CommutantDual<'_> {
    CommutantDual { et }
}

impl CommutantDual<'_> {
    /// Applies T' in the m-representation: Z'(1⊗m) = 1⊗T'(m). Returns
    /// the representative and the invariance defect ‖Z'(a') − 1⊗m̃‖.
    pub fn apply(&self, m: &Array2<C64>) -> Result<(Array2<C64>, f64)> {
        let n = self.et.n_sys;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimMismatch("commutant element".into()));
        }
        let a_prime = linalg::kron(&linalg::identity(n).view(), &m.view());
        let y = self.et.apply_zprime(&a_prime)?;
        // compress back: m̃ = (1/N)·Tr_1(Y)
        let mut mt = Array2::<C64>::zeros((n, n));
        for k in 0..n {
            for l in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..n {
                    acc += y[[s * n + k, s * n + l]];
                }
                mt[[k, l]] = acc / n as f64;
            }
        }
        let back = linalg::kron(&linalg::identity(n).view(), &mt.view());
        let defect = linalg::frobenius(&(&y - &back));
        if defect > tol::STRUCTURAL {
            return Err(Error::CommutantNotInvariant { defect });
        }
        Ok((mt, defect))
    }

    /// |⟨Ω, T(a)·a'·Ω⟩ − ⟨Ω, a·T'(a')·Ω⟩| for a on the system and a' in
    /// the m-representation, with T the transition channel of `ch`.
    pub fn duality_residual(
        &self,
        ch: &KrausChannel,
        a: &Array2<C64>,
        m: &Array2<C64>,
    ) -> Result<f64> {
        let n = self.et.n_sys;
        let omega = &self.et.gns.omega;
        let pair = |x: &Array2<C64>, mm: &Array2<C64>| -> C64 {
            // ⟨Ω, L_x (1⊗mm) Ω⟩
            let op = linalg::kron(&x.view(), &linalg::identity(n).view())
                .dot(&linalg::kron(&linalg::identity(n).view(), &mm.view()));
            let vo = op.dot(omega);
            omega.iter().zip(vo.iter()).map(|(l, r)| l.conj() * r).sum()
        };
        let lhs = pair(&ch.apply(a), m);
        let (tm, _) = self.apply(m)?;
        let rhs = pair(a, &tm);
        Ok((lhs - rhs).norm())
    }

    /// Heisenberg superoperator of T' in the m-representation.
    pub fn superop(&self) -> Result<SuperOp> {
        let n = self.et.n_sys;
        let failed = std::cell::RefCell::new(None::<Error>);
        let sop = SuperOp::from_map(n, |e| match self.apply(e) {
            Ok((m, _)) => m,
            Err(err) => {
                failed.borrow_mut().get_or_insert(err);
                Array2::zeros((n, n))
            }
        });
        match failed.into_inner() {
            Some(err) => Err(err),
            None => Ok(sop),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::stationary;
    use crate::tensor::{weighted_norm, ComplexOperator, DensityState};
    use crate::transition::Direction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gns_of_tracial_state() {
        let tau = DensityState::maximally_mixed(2);
        let g = build_gns(&tau).unwrap();
        let r = (0.5_f64).sqrt();
        assert!((g.omega[0].re - r).abs() < 1e-14);
        assert!(g.omega[1].norm() < 1e-14);
        assert!(g.omega[2].norm() < 1e-14);
        assert!((g.omega[3].re - r).abs() < 1e-14);
        let onorm: f64 = g.omega.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((onorm - 1.0).abs() < 1e-13);
        let prod = g.rho_half.dot(&g.rho_half_inv);
        assert!(linalg::frobenius(&(prod - linalg::identity(2))) < 1e-10);
    }

    #[test]
    fn gns_inner_product_matches_state() {
        let mut rng = ChaCha12Rng::seed_from_u64(60);
        let phi = random::random_faithful_density(3, &mut rng);
        let g = build_gns(&phi).unwrap();
        for _ in 0..10 {
            let a = random::random_matrix(3, &mut rng);
            let b = random::random_matrix(3, &mut rng);
            // ⟨vec(aρ^{1/2}), vec(bρ^{1/2})⟩ = φ(a*b)
            let va = g.embed(&a.view());
            let vb = g.embed(&b.view());
            let ip: C64 = va.iter().zip(vb.iter()).map(|(l, r)| l.conj() * r).sum();
            let expect = linalg::trace(
                &phi.matrix().dot(&linalg::adjoint(&a.view())).dot(&b).view(),
            );
            assert!((ip - expect).norm() < 1e-11);
            // ⟨Ω, L_a Ω⟩ = φ(a)
            let la = g.left_mul(&a.view());
            let lo = la.dot(&g.omega);
            let form: C64 = g.omega.iter().zip(lo.iter()).map(|(l, r)| l.conj() * r).sum();
            let phi_a = linalg::trace(&phi.matrix().dot(&a).view());
            assert!((form - phi_a).norm() < 1e-11);
            // GNS norm equals weighted_norm
            let op = ComplexOperator::on_system(a.clone()).unwrap();
            let wn = weighted_norm(&op, &phi).unwrap();
            let gn: f64 = va.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((wn - gn).abs() < 1e-11);
        }
    }

    #[test]
    fn gns_rejects_non_faithful() {
        let pure = DensityState::basis_state(0, 3).unwrap();
        assert!(matches!(build_gns(&pure), Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn identity_coupling_v_structure() {
        let mut rng = ChaCha12Rng::seed_from_u64(61);
        let phi = random::random_faithful_density(2, &mut rng);
        let psi = random::random_faithful_density(2, &mut rng);
        let m = crate::transition::CouplingModel::new(
            linalg::identity(4),
            phi.clone(),
            psi.clone(),
            Direction::Forward,
        )
        .unwrap();
        let et = build_extended(&m).unwrap();
        assert!(et.isometry_defect() < 1e-10);
        assert!(et.omega_stationarity_defect().unwrap() < 1e-10);
        // v(X) = X ⊗ vec(ρ_ψ^{1/2})
        let psi_half = linalg::sqrtm_psd(psi.matrix()).unwrap();
        let pv = linalg::vec_of(&psi_half.view());
        let x = random::random_matrix(2, &mut rng);
        let g = build_gns(&phi).unwrap();
        let vx = et.v.dot(&g.embed(&x.view()));
        // expected: embed(x) ⊗ pv under the HS(H)⊗HS(C) ordering
        let ex = g.embed(&x.view());
        for p in 0..4 {
            for k in 0..4 {
                let expect = ex[p] * pv[k];
                assert!((vx[p * 4 + k] - expect).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn isometry_and_stationarity_on_random_models() {
        let mut rng = ChaCha12Rng::seed_from_u64(62);
        for _ in 0..20 {
            let m = random::random_product_stationary_model(3, &mut rng).unwrap();
            let et = build_extended(&m).unwrap();
            assert!(et.isometry_defect() < 1e-10);
            assert!(et.omega_stationarity_defect().unwrap() < 1e-10);
        }
    }

    #[test]
    fn build_extended_rejects_non_stationary_pair() {
        let mut rng = ChaCha12Rng::seed_from_u64(63);
        let u = random::haar_unitary(4, &mut rng);
        let phi = random::random_faithful_density(2, &mut rng);
        let psi = random::random_faithful_density(2, &mut rng);
        let m = crate::transition::CouplingModel::new(u, phi, psi, Direction::Forward).unwrap();
        assert!(matches!(
            build_extended(&m),
            Err(Error::NotProductStationary { .. })
        ));
    }

    #[test]
    fn zprime_unital_positive_hermitian() {
        let mut rng = ChaCha12Rng::seed_from_u64(64);
        let m = random::random_product_stationary_model(3, &mut rng).unwrap();
        let et = build_extended(&m).unwrap();
        let dim = 9;
        let one = linalg::identity(dim);
        let z1 = et.apply_zprime(&one).unwrap();
        assert!(linalg::frobenius(&(z1 - one)) < 1e-12);
        for _ in 0..10 {
            let x = random::random_psd(dim, &mut rng);
            let zx = et.apply_zprime(&x).unwrap();
            assert!(linalg::min_eig(&zx).unwrap() >= -1e-12);
            let h = random::random_hermitian(dim, &mut rng);
            let zh = et.apply_zprime(&h).unwrap();
            let herm_defect = linalg::frobenius(&(&zh - &linalg::adjoint(&zh.view())));
            assert!(herm_defect < 1e-11);
        }
    }

    #[test]
    fn p_omega_subharmonic_for_zprime() {
        let mut rng = ChaCha12Rng::seed_from_u64(65);
        for _ in 0..5 {
            let m = random::random_product_stationary_model(2, &mut rng).unwrap();
            let et = build_extended(&m).unwrap();
            let zp = et.apply_zprime(&et.p_omega).unwrap();
            assert!(linalg::min_eig(&(&zp - &et.p_omega)).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn ac_z_identity_small_n() {
        // ⟨aΩ, Z'ⁿ(p_Ω) aΩ⟩ = ‖Q_n J_n(a)‖²_{ψ_n} for n ≤ 3
        let mut rng = ChaCha12Rng::seed_from_u64(66);
        for _ in 0..3 {
            let m = random::random_product_stationary_model(2, &mut rng).unwrap();
            let et = build_extended(&m).unwrap();
            for _ in 0..5 {
                let a = random::random_matrix(2, &mut rng);
                let mut x = et.p_omega.clone();
                for n in 1..=3usize {
                    x = et.apply_zprime(&x).unwrap();
                    let lhs = et.quadratic_form(&x, &a.view()).re;
                    let aop = ComplexOperator::on_system(a.clone()).unwrap();
                    let q = m.q_expectation(&m.apply_jn(&aop, n).unwrap()).unwrap();
                    let rhs = weighted_norm(&q, &m.psi_chain_state(n)).unwrap();
                    assert!(
                        (lhs - rhs * rhs).abs() < 1e-9,
                        "Z' quadratic-form identity at n={n}: {lhs} vs {}",
                        rhs * rhs
                    );
                }
            }
        }
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        let phi = DensityState::maximally_mixed(2);
        let psi = DensityState::maximally_mixed(2);
        let m = crate::transition::CouplingModel::new(
            linalg::identity(4),
            phi.clone(),
            psi,
            Direction::Forward,
        )
        .unwrap();
        let ch = m.transition_channel().unwrap();
        let adj = adjoint_channel(&ch, &phi).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(67);
        let a = random::random_matrix(2, &mut rng);
        assert!(linalg::frobenius(&(adj.apply(&a) - &a)) < 1e-12);
    }

    #[test]
    fn adjoint_defining_relation_and_unitality() {
        let mut rng = ChaCha12Rng::seed_from_u64(68);
        let m = random::random_product_stationary_model(3, &mut rng).unwrap();
        let ch = m.transition_channel().unwrap();
        let adj = adjoint_channel(&ch, m.phi()).unwrap();
        let one = linalg::identity(3);
        assert!(linalg::frobenius(&(adj.apply(&one) - &one)) < 1e-11);
        for _ in 0..50 {
            let a = random::random_matrix(3, &mut rng);
            let b = random::random_matrix(3, &mut rng);
            assert!(adj.defining_relation_residual(&a, &b) < 1e-10);
        }
        // φ-stationarity of T⁺
        let mut rng2 = ChaCha12Rng::seed_from_u64(69);
        let a = random::random_matrix(3, &mut rng2);
        let lhs = linalg::trace(&m.phi().matrix().dot(&adj.apply(&a)).view());
        let rhs = linalg::trace(&m.phi().matrix().dot(&a).view());
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn zprime_restricted_to_left_mults_is_adjoint() {
        let mut rng = ChaCha12Rng::seed_from_u64(70);
        let m = random::random_product_stationary_model(3, &mut rng).unwrap();
        let et = build_extended(&m).unwrap();
        let ch = m.transition_channel().unwrap();
        let adj = adjoint_channel(&ch, m.phi()).unwrap();
        for _ in 0..10 {
            let a = random::random_matrix(3, &mut rng);
            let la = et.gns.left_mul(&a.view());
            let z = et.apply_zprime(&la).unwrap();
            let expect = et.gns.left_mul(&adj.apply(&a).view());
            assert!(
                linalg::frobenius(&(&z - &expect)) < 1e-9,
                "Z'|_A = T⁺ residual {}",
                linalg::frobenius(&(&z - &expect))
            );
        }
    }

    #[test]
    fn commutant_identity_coupling() {
        let phi = DensityState::maximally_mixed(2);
        let psi = DensityState::maximally_mixed(2);
        let m = crate::transition::CouplingModel::new(
            linalg::identity(4),
            phi,
            psi,
            Direction::Forward,
        )
        .unwrap();
        let et = build_extended(&m).unwrap();
        let dual = commutant_dual(&et);
        let mut rng = ChaCha12Rng::seed_from_u64(71);
        let mm = random::random_matrix(2, &mut rng);
        let (tm, defect) = dual.apply(&mm).unwrap();
        assert!(defect < 1e-11);
        assert!(linalg::frobenius(&(tm - &mm)) < 1e-11);
    }

    #[test]
    fn commutant_duality_on_micromaser() {
        let p = crate::micromaser::jc_resonant(std::f64::consts::PI / 3.0, 4, 1.0 / 3.0).unwrap();
        let m = crate::micromaser::build_micromaser(&p).unwrap();
        let et = build_extended(&m).unwrap();
        let dual = commutant_dual(&et);
        let ch = m.transition_channel().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(72);
        for _ in 0..50 {
            let a = random::random_matrix(4, &mut rng);
            let mm = random::random_matrix(4, &mut rng);
            let res = dual.duality_residual(&ch, &a, &mm).unwrap();
            assert!(res < 1e-10, "duality residual {res}");
        }
    }

    #[test]
    fn dual_of_irreducible_is_irreducible() {
        let mut rng = ChaCha12Rng::seed_from_u64(73);
        let m = random::random_product_stationary_model(3, &mut rng).unwrap();
        let ch = m.transition_channel().unwrap();
        let cert = stationary::is_irreducible(&ch).unwrap();
        assert!(cert.irreducible);
        let et = build_extended(&m).unwrap();
        let dual = commutant_dual(&et);
        let sop = dual.superop().unwrap().trace_dual();
        let report = stationary::stationary_of_superop(&sop).unwrap();
        let cert_dual = stationary::irreducibility_from_report(&report).unwrap();
        assert!(cert_dual.irreducible, "T' must inherit irreducibility");
    }
}
