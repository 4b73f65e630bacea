//! Group datum (ambient group, involutions sigma/theta/delta/phi) with
//! validation of the standing assumptions, plus all eigenspace decompositions.

use crate::linalg::{
    self, cmat_identity, from_real, ip_frob, mat_dist, mat_exp, mat_norm_inf, nullspace,
    trace_form, AlgVec, C64, CMat, LieBasis, LinalgError, RMat, RVec, Tol,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// An involution of the ambient group: g -> J op(g) J^{-1}, where op is an
/// optional inverse-transpose and/or entrywise conjugation.
#[derive(Debug, Clone)]
pub struct InvolutionSpec {
    pub conj_matrix: CMat,
    pub use_inverse_transpose: bool,
    pub use_entrywise_conjugate: bool,
}

impl InvolutionSpec {
    pub fn conjugation(j: CMat) -> Self {
        InvolutionSpec { conj_matrix: j, use_inverse_transpose: false, use_entrywise_conjugate: false }
    }

    /// Apply to a group element.
    pub fn apply(&self, g: &CMat) -> CMat {
        let mut m = g.clone();
        if self.use_entrywise_conjugate {
            m = m.map(|z| z.conj());
        }
        if self.use_inverse_transpose {
            m = m
                .transpose()
                .try_inverse()
                .unwrap_or_else(|| CMat::zeros(g.nrows(), g.ncols()));
        }
        let ji = self.conj_matrix.clone().try_inverse().expect("conj matrix invertible");
        &self.conj_matrix * m * ji
    }

    /// Apply the differential to a Lie algebra element.
    pub fn apply_alg(&self, z: &CMat) -> CMat {
        let mut m = z.clone();
        if self.use_entrywise_conjugate {
            m = m.map(|w| w.conj());
        }
        if self.use_inverse_transpose {
            m = -m.transpose();
        }
        let ji = self.conj_matrix.clone().try_inverse().expect("conj matrix invertible");
        &self.conj_matrix * m * ji
    }
}

/// Named constraint tags checked for group membership of sampled matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipTag {
    DetOne,
    RealEntries,
    Unitary,
}

/// Raw group datum as supplied by a config.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    pub n: usize,
    pub algebra_basis: Vec<CMat>,
    pub sigma: InvolutionSpec,
    pub theta: InvolutionSpec,
    pub delta: InvolutionSpec,
    pub phi: InvolutionSpec,
    pub membership: Vec<MembershipTag>,
    /// representatives of component groups (e.g. of H/H0), verified at setup
    pub component_reps: Vec<CMat>,
    /// the standing decomposition assumption G = H G^0 K, recorded not verified
    pub assume_h_g0_k: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub note: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl ValidationReport {
    fn push(&mut self, name: &str, passed: bool, residual: f64, note: impl Into<String>) {
        self.checks.push(CheckResult { name: name.into(), passed, residual, note: note.into() });
        self.passed &= passed;
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SetupError {
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A coordinate subspace of the algebra: orthonormal basis vectors plus the
/// orthogonal projector onto their span.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub basis: Vec<RVec>,
    pub projector: RMat,
}

impl Subspace {
    pub fn from_basis(basis: Vec<RVec>, dim_ambient: usize) -> Subspace {
        let mut projector = RMat::zeros(dim_ambient, dim_ambient);
        for v in &basis {
            projector += v * v.transpose();
        }
        Subspace { basis, projector }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &RVec, tol: f64) -> bool {
        (&self.projector * v - v).norm() < tol * (1.0 + v.norm())
    }

    /// Projector distance to another subspace.
    pub fn distance(&self, other: &Subspace) -> f64 {
        (&self.projector - &other.projector).amax()
    }
}

/// Eigenspace decompositions of the algebra under the involutions.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// sigma = +1 (the subgroup H direction)
    pub h: Subspace,
    /// sigma = -1
    pub q: Subspace,
    /// theta = +1 (the subgroup K direction)
    pub k: Subspace,
    /// theta = -1
    pub p: Subspace,
    /// delta = +1 (compact part)
    pub g0: Subspace,
    /// delta = -1 (noncompact part)
    pub r0: Subspace,
    pub q_cap_r0: Subspace,
    pub h_cap_g0: Subspace,
    pub h_cap_r0: Subspace,
    pub p_cap_q: Subspace,
    /// orthonormal basis of the compact form of h: (h cap g0) + i (h cap r0)
    pub u_h: Vec<CMat>,
}

/// Validated group structure: the orthonormalized algebra basis, operator
/// matrices of the involutions, eigenspace data, and tolerances. Immutable
/// after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Structure {
    pub spec: GroupSpec,
    pub basis: LieBasis,
    pub tol: Tol,
    pub sigma_op: RMat,
    pub theta_op: RMat,
    pub delta_op: RMat,
    pub decomp: Decomposition,
    pub report: ValidationReport,
}

fn eigenspace(op: &RMat, sign: f64, rank_tol: f64) -> Vec<RVec> {
    let d = op.nrows();
    nullspace(&(op - RMat::identity(d, d) * sign), rank_tol)
}

fn intersection(a: &Subspace, b: &Subspace, dim: usize, rank_tol: f64) -> Vec<RVec> {
    let id = RMat::identity(dim, dim);
    let mut stacked = RMat::zeros(2 * dim, dim);
    stacked.view_mut((0, 0), (dim, dim)).copy_from(&(&id - &a.projector));
    stacked.view_mut((dim, 0), (dim, dim)).copy_from(&(&id - &b.projector));
    nullspace(&stacked, rank_tol)
}

/// Check membership constraint tags on a group element.
pub fn check_membership(tags: &[MembershipTag], g: &CMat, tol: &Tol) -> Result<(), String> {
    let scale = 1.0 + mat_norm_inf(g);
    for tag in tags {
        match tag {
            MembershipTag::DetOne => {
                let d = g.determinant();
                if (d - C64::new(1.0, 0.0)).norm() > 100.0 * tol.eq * scale {
                    return Err(format!("det = {d} not 1"));
                }
            }
            MembershipTag::RealEntries => {
                let worst = g.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                if worst > 100.0 * tol.eq * scale {
                    return Err(format!("imaginary part {worst:.3e}"));
                }
            }
            MembershipTag::Unitary => {
                let r = mat_dist(&(g * g.adjoint()), &cmat_identity(g.nrows()));
                if r > 100.0 * tol.eq * scale {
                    return Err(format!("unitarity residual {r:.3e}"));
                }
            }
        }
    }
    Ok(())
}

/// Apply an involution to a group element (thin convenience wrapper).
pub fn apply_involution(inv: &InvolutionSpec, g: &CMat) -> CMat {
    inv.apply(g)
}

pub fn validate_setup(spec: &GroupSpec, tol: &Tol) -> Result<(ValidationReport, LieBasis), SetupError> {
    let mut rep = ValidationReport { checks: Vec::new(), passed: true };
    let basis = LieBasis::orthonormalize(&spec.algebra_basis)
        .map_err(|e| SetupError::InvalidSetup(format!("algebra basis: {e}")))?;
    let dim = basis.dim();
    let slack = 100.0 * tol.eq;

    // basis entries finite
    let finite = spec.algebra_basis.iter().all(linalg::is_finite);
    rep.push("basis_finite", finite, 0.0, format!("dim g = {dim}"));

    // bracket closure: [b_i, b_j] projects back into the algebra
    let mut worst = 0.0f64;
    for (i, bi) in basis.mats().iter().enumerate() {
        for bj in basis.mats().iter().skip(i + 1) {
            let br = bi * bj - bj * bi;
            let c = basis.coords(&br);
            worst = worst.max(mat_dist(&basis.expand(&c), &br));
        }
    }
    rep.push("bracket_closure", worst < slack, worst, "structure-constant residual");

    // involutions preserve the algebra and square to the identity
    let invs: [(&str, &InvolutionSpec); 4] = [
        ("sigma", &spec.sigma),
        ("theta", &spec.theta),
        ("delta", &spec.delta),
        ("phi", &spec.phi),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e7); // fixed seed: validation sampling
    for (name, inv) in invs {
        let r = basis.op_residual(|z| inv.apply_alg(z));
        rep.push(&format!("{name}_preserves_algebra"), r < slack, r, "");
        let op = basis.op_matrix(|z| inv.apply_alg(z));
        let r2 = (&op * &op - RMat::identity(dim, dim)).amax();
        rep.push(&format!("{name}_squares_to_identity"), r2 < slack, r2, "on the algebra");
        // and on sampled group elements
        let mut worst_g = 0.0f64;
        for _ in 0..5 {
            let c = RVec::from_fn(dim, |_, _| rng.random::<f64>() - 0.5);
            let g = mat_exp(&basis.expand(&(c * 0.3)));
            let gg = inv.apply(&inv.apply(&g));
            worst_g = worst_g.max(mat_dist(&gg, &g));
        }
        rep.push(&format!("{name}_squares_on_group"), worst_g < slack, worst_g, "sampled exp elements");
    }

    // pairwise commutation on the algebra
    let ops: Vec<(&str, RMat)> = invs
        .iter()
        .map(|(n, i)| (*n, basis.op_matrix(|z| i.apply_alg(z))))
        .collect();
    for a in 0..ops.len() {
        for b in (a + 1)..ops.len() {
            let r = (&ops[a].1 * &ops[b].1 - &ops[b].1 * &ops[a].1).amax();
            rep.push(
                &format!("commute_{}_{}", ops[a].0, ops[b].0),
                r < slack,
                r,
                "",
            );
        }
    }

    // delta is a Cartan involution for the trace form: -B(X, delta X) > 0
    let mut gram = RMat::zeros(dim, dim);
    for (i, bi) in basis.mats().iter().enumerate() {
        for (j, bj) in basis.mats().iter().enumerate() {
            gram[(i, j)] = -trace_form(bi, &spec.delta.apply_alg(bj));
        }
    }
    let sym = (&gram + gram.transpose()) * 0.5;
    let eigs = sym.symmetric_eigen().eigenvalues;
    let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.push(
        "delta_cartan_positive",
        min_eig > tol.rank,
        min_eig,
        "min eigenvalue of -B(X, delta X)",
    );

    // the Frobenius inner product is sigma/theta/delta-invariant
    for (name, inv) in invs.iter().take(3) {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let x = basis.expand(&RVec::from_fn(dim, |_, _| rng.random::<f64>() - 0.5));
            let y = basis.expand(&RVec::from_fn(dim, |_, _| rng.random::<f64>() - 0.5));
            let d = (ip_frob(&inv.apply_alg(&x), &inv.apply_alg(&y)) - ip_frob(&x, &y)).abs()
                / (1.0 + ip_frob(&x, &x).sqrt() * ip_frob(&y, &y).sqrt());
            worst = worst.max(d);
        }
        rep.push(&format!("inner_product_{name}_invariant"), worst < slack, worst, "sampled pairs");
    }
    // and Ad(u)-invariant for u in the compact part
    {
        let delta_op = basis.op_matrix(|z| spec.delta.apply_alg(z));
        let g0 = Subspace::from_basis(eigenspace(&delta_op, 1.0, tol.rank), dim);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let mut c = RVec::zeros(dim);
            for v in &g0.basis {
                c += v * (rng.random::<f64>() - 0.5);
            }
            let u = mat_exp(&basis.expand(&c));
            let x = basis.expand(&RVec::from_fn(dim, |_, _| rng.random::<f64>() - 0.5));
            let y = basis.expand(&RVec::from_fn(dim, |_, _| rng.random::<f64>() - 0.5));
            let ui = u.clone().try_inverse().unwrap();
            let d = (ip_frob(&(&u * &x * &ui), &(&u * &y * &ui)) - ip_frob(&x, &y)).abs()
                / (1.0 + ip_frob(&x, &x).sqrt() * ip_frob(&y, &y).sqrt());
            worst = worst.max(d);
        }
        rep.push("inner_product_ad_invariant", worst < slack, worst, "sampled compact elements");
    }

    // center condition: sigma,theta generate a finite group on the center.
    // For a semisimple algebra the center is zero and the condition is vacuous.
    {
        let mut ad_stack = RMat::zeros(dim * dim, dim);
        for (j, bj) in basis.mats().iter().enumerate() {
            for (i, bi) in basis.mats().iter().enumerate() {
                let br = bj * bi - bi * bj;
                let c = basis.coords(&br);
                for k in 0..dim {
                    ad_stack[(i * dim + k, j)] = c[k];
                }
            }
        }
        let center = nullspace(&ad_stack, tol.rank);
        rep.push(
            "center_condition",
            center.is_empty(),
            center.len() as f64,
            if center.is_empty() { "satisfied: semisimple" } else { "nonzero center: supply finiteness flag" },
        );
    }

    // phi fixes sampled real-form elements; membership tags hold on them
    {
        let mut worst = 0.0f64;
        let mut tag_fail = String::new();
        for _ in 0..5 {
            let c = RVec::from_fn(dim, |_, _| rng.random::<f64>() - 0.5);
            let g = mat_exp(&basis.expand(&(c * 0.3)));
            worst = worst.max(mat_dist(&spec.phi.apply(&g), &g));
            if tag_fail.is_empty() {
                if let Err(e) = check_membership(&spec.membership, &g, tol) {
                    tag_fail = e;
                }
            }
        }
        rep.push("phi_fixes_group", worst < slack, worst, "sampled exp elements");
        rep.push("membership_tags_on_group", tag_fail.is_empty(), 0.0, tag_fail);
    }

    // component representatives lie in the fixed group of sigma
    for (i, h) in spec.component_reps.iter().enumerate() {
        let r = mat_dist(&spec.sigma.apply(h), h);
        rep.push(&format!("component_rep_{i}_sigma_fixed"), r < slack, r, "");
        let mem = check_membership(&spec.membership, h, tol);
        rep.push(
            &format!("component_rep_{i}_membership"),
            mem.is_ok(),
            0.0,
            mem.err().unwrap_or_default(),
        );
    }

    rep.push(
        "assumption_decomposition",
        true,
        0.0,
        if spec.assume_h_g0_k {
            "G = H G^0 K assumed (declared in config, not verified)"
        } else {
            "G = H G^0 K not declared"
        },
    );

    Ok((rep, basis))
}

/// Eigenspace projectors via nullspaces of (involution -/+ id).
pub fn decompose(basis: &LieBasis, sigma_op: &RMat, theta_op: &RMat, delta_op: &RMat, tol: &Tol) -> Decomposition {
    let dim = basis.dim();
    let sub = |vs: Vec<RVec>| Subspace::from_basis(vs, dim);
    let h = sub(eigenspace(sigma_op, 1.0, tol.rank));
    let q = sub(eigenspace(sigma_op, -1.0, tol.rank));
    let k = sub(eigenspace(theta_op, 1.0, tol.rank));
    let p = sub(eigenspace(theta_op, -1.0, tol.rank));
    let g0 = sub(eigenspace(delta_op, 1.0, tol.rank));
    let r0 = sub(eigenspace(delta_op, -1.0, tol.rank));
    let q_cap_r0 = sub(intersection(&q, &r0, dim, tol.rank));
    let h_cap_g0 = sub(intersection(&h, &g0, dim, tol.rank));
    let h_cap_r0 = sub(intersection(&h, &r0, dim, tol.rank));
    let p_cap_q = sub(intersection(&p, &q, dim, tol.rank));

    // compact form of h: (h cap g0) + i (h cap r0), re-orthonormalized
    let mut u_h_raw: Vec<CMat> = Vec::new();
    for v in &h_cap_g0.basis {
        u_h_raw.push(basis.expand(v));
    }
    for v in &h_cap_r0.basis {
        u_h_raw.push(basis.expand(v) * C64::new(0.0, 1.0));
    }
    let mut u_h: Vec<CMat> = Vec::new();
    for m in u_h_raw {
        let mut v = m;
        for b in &u_h {
            let c = ip_frob(&v, b);
            v -= b * C64::new(c, 0.0);
        }
        let norm = ip_frob(&v, &v).sqrt();
        if norm > 1e-12 {
            v /= C64::new(norm, 0.0);
            u_h.push(v);
        }
    }

    Decomposition { h, q, k, p, g0, r0, q_cap_r0, h_cap_g0, h_cap_r0, p_cap_q, u_h }
}

impl Structure {
    /// Validate the spec and build the full derived structure. Hard validation
    /// failures abort; the report is retained either way.
    pub fn new(spec: GroupSpec, tol: Tol) -> Result<Structure, SetupError> {
        let (report, basis) = validate_setup(&spec, &tol)?;
        if !report.passed {
            let first = report
                .checks
                .iter()
                .find(|c| !c.passed)
                .map(|c| format!("{} (residual {:.3e}) {}", c.name, c.residual, c.note))
                .unwrap_or_default();
            return Err(SetupError::InvalidSetup(first));
        }
        let sigma_op = basis.op_matrix(|z| spec.sigma.apply_alg(z));
        let theta_op = basis.op_matrix(|z| spec.theta.apply_alg(z));
        let delta_op = basis.op_matrix(|z| spec.delta.apply_alg(z));
        let decomp = decompose(&basis, &sigma_op, &theta_op, &delta_op, &tol);
        Ok(Structure { spec, basis, tol, sigma_op, theta_op, delta_op, decomp, report })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// dim X = dim g - dim k.
    pub fn dim_x(&self) -> usize {
        self.dim() - self.decomp.k.dim()
    }

    pub fn sigma_grp(&self, g: &CMat) -> CMat {
        self.spec.sigma.apply(g)
    }

    pub fn theta_grp(&self, g: &CMat) -> CMat {
        self.spec.theta.apply(g)
    }

    pub fn theta_alg(&self, z: &CMat) -> CMat {
        self.spec.theta.apply_alg(z)
    }

    pub fn sigma_alg(&self, z: &CMat) -> CMat {
        self.spec.sigma.apply_alg(z)
    }

    /// Matrix of Ad(g) on algebra coordinates.
    pub fn ad_op(&self, g: &CMat) -> RMat {
        let gi = g.clone().try_inverse().expect("Ad of singular matrix");
        self.basis.op_matrix(|z| g * z * &gi)
    }

    /// Matrix of the twisted involution theta_x = Ad(x) theta on coordinates.
    pub fn theta_x_op(&self, x: &CMat) -> RMat {
        self.ad_op(x) * &self.theta_op
    }

    /// Membership check for the configured constraint tags.
    pub fn in_group(&self, g: &CMat) -> Result<(), String> {
        check_membership(&self.spec.membership, g, &self.tol)
    }

    /// Random algebra element with coordinates in a subspace, seeded.
    pub fn random_in(&self, sub: &Subspace, rng: &mut ChaCha8Rng) -> RVec {
        let mut c = RVec::zeros(self.dim());
        for v in &sub.basis {
            c += v * (rng.random::<f64>() - 0.5);
        }
        c
    }

    pub fn expand(&self, coords: &RVec) -> CMat {
        self.basis.expand(coords)
    }

    pub fn vec(&self, coords: RVec) -> AlgVec {
        self.basis.vec(coords)
    }

    pub fn identity(&self) -> CMat {
        cmat_identity(self.spec.n)
    }
}

/// Build a GroupSpec from real basis matrices (test and fixture convenience).
pub fn spec_from_real_basis(
    n: usize,
    basis: Vec<RMat>,
    sigma: InvolutionSpec,
    theta: InvolutionSpec,
    delta: InvolutionSpec,
    phi: InvolutionSpec,
    membership: Vec<MembershipTag>,
    component_reps: Vec<CMat>,
) -> GroupSpec {
    GroupSpec {
        n,
        algebra_basis: basis.iter().map(from_real).collect(),
        sigma,
        theta,
        delta,
        phi,
        membership,
        component_reps,
        assume_h_g0_k: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sl2_validates_and_decomposes() {
        let st = fixtures::sl2_structure();
        assert!(st.report.passed);
        assert_eq!(st.dim(), 3);
        assert_eq!(st.decomp.h.dim(), 1);
        assert_eq!(st.decomp.q.dim(), 2);
        assert_eq!(st.decomp.k.dim(), 1);
        assert_eq!(st.decomp.p.dim(), 2);
        assert_eq!(st.decomp.g0.dim(), 1);
        assert_eq!(st.decomp.r0.dim(), 2);
        assert_eq!(st.decomp.u_h.len(), 1);
    }

    #[test]
    fn sl8_validates_and_decomposes() {
        let st = fixtures::sl8_structure();
        assert!(st.report.passed);
        assert_eq!(st.dim(), 63);
        assert_eq!(st.decomp.h.dim(), 31);
        assert_eq!(st.decomp.q.dim(), 32);
        assert_eq!(st.decomp.k.dim(), 36);
        assert_eq!(st.decomp.p.dim(), 27);
        assert_eq!(st.decomp.g0.dim(), 28);
        assert_eq!(st.decomp.r0.dim(), 35);
        // two skew-symmetric 4x4 blocks
        assert_eq!(st.decomp.p_cap_q.dim(), 12);
    }

    #[test]
    fn sl2_theta_on_diagonal_swaps() {
        let st = fixtures::sl2_structure();
        let lam = 2.3;
        let g = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(lam, 0.0),
            C64::new(1.0 / lam, 0.0),
        ]));
        let tg = st.theta_grp(&g);
        assert!((tg[(0, 0)].re - 1.0 / lam).abs() < 1e-12);
        assert!((tg[(1, 1)].re - lam).abs() < 1e-12);
    }

    #[test]
    fn involutions_fix_identity_and_square() {
        let st = fixtures::sl2_structure();
        let id = st.identity();
        for inv in [&st.spec.sigma, &st.spec.theta, &st.spec.delta, &st.spec.phi] {
            assert!(mat_dist(&inv.apply(&id), &id) < 1e-13);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let c = RVec::from_fn(st.dim(), |_, _| rng.random::<f64>() - 0.5);
            let g = mat_exp(&st.expand(&(c * 0.4)));
            let ss = st.sigma_grp(&st.sigma_grp(&g));
            assert!(mat_dist(&ss, &g) < 1e-10);
        }
    }

    #[test]
    fn projectors_are_idempotent_and_complementary() {
        let st = fixtures::sl2_structure();
        let d = st.dim();
        for (a, b) in [
            (&st.decomp.h, &st.decomp.q),
            (&st.decomp.k, &st.decomp.p),
            (&st.decomp.g0, &st.decomp.r0),
        ] {
            let pa = &a.projector;
            assert!((pa * pa - pa).amax() < 1e-10);
            assert!((pa + &b.projector - RMat::identity(d, d)).amax() < 1e-10);
            assert_eq!(a.dim() + b.dim(), d);
        }
    }

    #[test]
    fn projector_images_are_eigenvectors() {
        let st = fixtures::sl8_structure();
        for v in st.decomp.q.basis.iter().take(5) {
            let img = &st.sigma_op * v;
            assert!((img + v).norm() < 1e-9);
        }
        for v in st.decomp.k.basis.iter().take(5) {
            let img = &st.theta_op * v;
            assert!((img - v).norm() < 1e-9);
        }
    }

    #[test]
    fn sl8_delta_is_conjugate_inverse_transpose() {
        let st = fixtures::sl8_structure();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = RVec::from_fn(st.dim(), |_, _| rng.random::<f64>() - 0.5);
        let g = mat_exp(&st.expand(&(c * 0.2)));
        let expect = g.map(|z| z.conj()).transpose().try_inverse().unwrap();
        assert!(mat_dist(&st.spec.delta.apply(&g), &expect) < 1e-10);
    }

    #[test]
    fn forced_commutation_failure_is_caught() {
        // replace theta by conjugation with a matrix that does not commute with sigma
        let st = fixtures::sl2_structure();
        let mut spec = st.spec.clone();
        let mut j = CMat::zeros(2, 2);
        j[(0, 0)] = C64::new(1.0, 0.0);
        j[(0, 1)] = C64::new(1.0, 0.0);
        j[(1, 1)] = C64::new(1.0, 0.0);
        spec.theta = InvolutionSpec::conjugation(j); // not even an involution
        let (rep, _) = validate_setup(&spec, &Tol::default()).unwrap();
        assert!(!rep.passed);
        assert!(rep.checks.iter().any(|c| !c.passed && c.name.contains("theta")));
        assert!(Structure::new(spec, Tol::default()).is_err());
    }
}
