//! Dense complex matrix and Lie-algebra coordinate primitives.
//!
//! Everything downstream works either with `CMat` (an n x n complex matrix,
//! n <= 16) or with real coordinate vectors over a fixed orthonormalized
//! basis of the real Lie algebra, wrapped in [`AlgVec`] / [`LieBasis`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use std::sync::atomic::{AtomicU64, Ordering};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Absolute tolerances used across the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tol {
    /// entrywise equality tolerance
    pub eq: f64,
    /// singular-value threshold for rank decisions
    pub rank: f64,
    /// moment-map residual threshold
    pub mu: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { eq: 1e-9, rank: 1e-7, mu: 1e-7 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix not positive definite (eigenvalue {0:.3e} below rank threshold)")]
    NotPositiveDefinite(f64),
    #[error("matrix singular within rank tolerance")]
    Singular,
    #[error("algebra coordinate vectors built over different bases")]
    BasisMismatch,
    #[error("matrix does not lie in the algebra (projection residual {0:.3e})")]
    NotInAlgebra(f64),
    #[error("supplied basis matrices are linearly dependent")]
    DependentBasis,
}

pub fn cmat_zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn cmat_identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_real(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// max |entry| distance between two matrices
pub fn mat_dist(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn mat_norm_inf(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius pairing Re tr(x y^*); the invariant inner product on matrix space.
pub fn ip_frob(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a * b.conj()).re).sum()
}

/// Trace form Re tr(x y); indefinite, used for the Cartan-involution check.
pub fn trace_form(x: &CMat, y: &CMat) -> f64 {
    (x * y).trace().re
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

fn pade6_exp(a: &CMat) -> CMat {
    // [6/6] Pade approximant, valid for small norm
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let n = a.nrows();
    let mut num = CMat::identity(n, n) * C64::new(C[0], 0.0);
    let mut den = num.clone();
    let mut pow = CMat::identity(n, n);
    for (k, &c) in C.iter().enumerate().skip(1) {
        pow = &pow * a;
        num += &pow * C64::new(c, 0.0);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        den += &pow * C64::new(sign * c, 0.0);
    }
    den.lu().solve(&num).expect("Pade denominator singular")
}

/// Matrix exponential by scaling-and-squaring with a [6/6] Pade core.
/// Total on finite input; exp(0) = I exactly.
pub fn mat_exp(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>(); // cheap upper bound on the 1-norm
    if norm == 0.0 {
        return CMat::identity(n, n);
    }
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scaled = a * C64::new(0.5f64.powi(s as i32), 0.0);
    let mut e = pade6_exp(&scaled);
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(p: &CMat) -> (Vec<f64>, CMat) {
    let se = p.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let n = p.nrows();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Apply a real function to a Hermitian matrix through its eigendecomposition.
fn hermitian_map(p: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, v) = hermitian_eigen(p);
    let n = p.nrows();
    let d = CMat::from_diagonal(&DVector::from_iterator(
        n,
        vals.iter().map(|&x| C64::new(f(x), 0.0)),
    ));
    &v * d * v.adjoint()
}

/// Principal logarithm of a Hermitian positive-definite matrix.
pub fn mat_log_principal(p: &CMat, tol: &Tol) -> Result<CMat, LinalgError> {
    let (vals, v) = hermitian_eigen(p);
    if let Some(&min) = vals.first() {
        if min <= tol.rank {
            return Err(LinalgError::NotPositiveDefinite(min));
        }
    }
    let n = p.nrows();
    let d = CMat::from_diagonal(&DVector::from_iterator(
        n,
        vals.iter().map(|&x| C64::new(x.ln(), 0.0)),
    ));
    Ok(&v * d * v.adjoint())
}

/// Which side the positive factor sits on in a polar decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarSide {
    /// g = u exp(Y)
    Right,
    /// g = exp(Y) u
    Left,
}

/// Polar decomposition of an invertible matrix: unitary factor and the
/// Hermitian logarithm Y of the positive factor.
pub fn polar_decompose(g: &CMat, side: PolarSide) -> Result<(CMat, CMat), LinalgError> {
    if !is_finite(g) {
        return Err(LinalgError::Singular);
    }
    let h = match side {
        PolarSide::Right => g.adjoint() * g,
        PolarSide::Left => g * g.adjoint(),
    };
    let (vals, v) = hermitian_eigen(&h);
    if vals.first().copied().unwrap_or(0.0) <= 1e-14 * vals.last().copied().unwrap_or(1.0).max(1.0)
    {
        return Err(LinalgError::Singular);
    }
    let n = g.nrows();
    let y = {
        let d = CMat::from_diagonal(&DVector::from_iterator(
            n,
            vals.iter().map(|&x| C64::new(0.5 * x.ln(), 0.0)),
        ));
        &v * d * v.adjoint()
    };
    let p_inv = {
        let d = CMat::from_diagonal(&DVector::from_iterator(
            n,
            vals.iter().map(|&x| C64::new(1.0 / x.sqrt(), 0.0)),
        ));
        &v * d * v.adjoint()
    };
    let u = match side {
        PolarSide::Right => g * &p_inv,
        PolarSide::Left => &p_inv * g,
    };
    Ok((u, y))
}

/// Hermitian square root (for tests and snapping).
pub fn hermitian_sqrt(p: &CMat) -> CMat {
    hermitian_map(p, f64::sqrt)
}

/// Eigenvalues of a general complex matrix via its Schur form.
pub fn eigenvalues_complex(m: &CMat) -> Vec<C64> {
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Spectral radius of a complex matrix.
pub fn spectral_radius(m: &CMat) -> f64 {
    eigenvalues_complex(m).iter().map(|e| e.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of the kernel of a real linear map, rank decided by
/// singular values against `rank_tol`. Deterministic: vectors are ordered by
/// ascending singular value of the pair and sign-normalized so the entry of
/// largest magnitude is positive.
pub fn nullspace(linmap: &RMat, rank_tol: f64) -> Vec<RVec> {
    let ncols = linmap.ncols();
    if linmap.nrows() == 0 || ncols == 0 {
        return (0..ncols)
            .map(|i| {
                let mut v = RVec::zeros(ncols);
                v[i] = 1.0;
                v
            })
            .collect();
    }
    let svd = linmap.clone().svd(false, true);
    let v_t = svd.v_t.expect("SVD requested v_t");
    let sv = &svd.singular_values;
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap());
    let mut out = Vec::new();
    // v_t covers min(nrows, ncols) rows; any remaining directions of a wide
    // map are genuinely in the kernel complement handled below
    for &i in &idx {
        if sv[i] < rank_tol {
            out.push(normalize_sign(v_t.row(i).transpose()));
        }
    }
    if linmap.nrows() < ncols {
        // wide map: complete the kernel with the orthogonal complement of row space
        let mut all: Vec<RVec> = (0..v_t.nrows()).map(|i| v_t.row(i).transpose()).collect();
        for j in 0..ncols {
            let mut v = RVec::zeros(ncols);
            v[j] = 1.0;
            for b in &all {
                let c = v.dot(b);
                v -= b * c;
            }
            let n = v.norm();
            if n > 1e-10 {
                let v = v / n;
                // not in row space: check it is annihilated
                if (linmap * &v).norm() < rank_tol {
                    out.push(normalize_sign(v.clone()));
                }
                all.push(v);
            }
        }
    }
    // re-orthonormalize (SVD rows are orthonormal already; guard the wide path)
    let mut ortho: Vec<RVec> = Vec::with_capacity(out.len());
    for v in out {
        let mut v = v;
        for b in &ortho {
            let c = v.dot(b);
            v -= b * c;
        }
        let n = v.norm();
        if n > 1e-10 {
            ortho.push(normalize_sign(v / n));
        }
    }
    ortho
}

fn normalize_sign(v: RVec) -> RVec {
    let mut best = 0usize;
    let mut mag = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > mag + 1e-14 {
            mag = x.abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        -v
    } else {
        v
    }
}

static BASIS_COUNTER: AtomicU64 = AtomicU64::new(1);

/// Real coefficients over a fixed ordered orthonormal basis of the Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgVec {
    pub basis_id: u64,
    pub coords: RVec,
}

/// An orthonormalized ordered real basis of a matrix Lie algebra, viewed
/// inside n x n complex matrices. Orthonormal under `ip_frob`.
#[derive(Debug, Clone)]
pub struct LieBasis {
    pub id: u64,
    pub n: usize,
    mats: Vec<CMat>,
}

impl LieBasis {
    /// Orthonormalize the given matrices (deterministic Gram-Schmidt in the
    /// given order) and freeze them as the coordinate basis.
    pub fn orthonormalize(raw: &[CMat]) -> Result<LieBasis, LinalgError> {
        let n = raw.first().map(|m| m.nrows()).unwrap_or(0);
        let mut mats: Vec<CMat> = Vec::with_capacity(raw.len());
        for r in raw {
            let mut v = r.clone();
            for b in &mats {
                let c = ip_frob(&v, b);
                v -= b * C64::new(c, 0.0);
            }
            let norm = ip_frob(&v, &v).sqrt();
            if norm < 1e-10 {
                return Err(LinalgError::DependentBasis);
            }
            mats.push(v / C64::new(norm, 0.0));
        }
        Ok(LieBasis { id: BASIS_COUNTER.fetch_add(1, Ordering::Relaxed), n, mats })
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    /// Coordinates of a matrix assumed to lie in the algebra.
    pub fn coords(&self, m: &CMat) -> RVec {
        RVec::from_iterator(self.mats.len(), self.mats.iter().map(|b| ip_frob(m, b)))
    }

    /// Coordinates with a residual check that the matrix lies in the algebra.
    pub fn coords_checked(&self, m: &CMat, tol: &Tol) -> Result<RVec, LinalgError> {
        let c = self.coords(m);
        let r = mat_dist(&self.expand(&c), m);
        if r > 10.0 * tol.eq * (1.0 + mat_norm_inf(m)) {
            return Err(LinalgError::NotInAlgebra(r));
        }
        Ok(c)
    }

    pub fn expand(&self, coords: &RVec) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for (c, b) in coords.iter().zip(self.mats.iter()) {
            m += b * C64::new(*c, 0.0);
        }
        m
    }

    pub fn vec(&self, coords: RVec) -> AlgVec {
        AlgVec { basis_id: self.id, coords }
    }

    /// Matrix of a linear operator on the algebra in these coordinates.
    /// Panics in debug mode if the operator leaves the algebra badly; callers
    /// validate that during setup.
    pub fn op_matrix(&self, f: impl Fn(&CMat) -> CMat) -> RMat {
        let d = self.dim();
        let mut m = RMat::zeros(d, d);
        for (j, b) in self.mats.iter().enumerate() {
            let img = f(b);
            m.set_column(j, &self.coords(&img));
        }
        m
    }

    /// Residual of the worst basis image under `f` against its projection
    /// back into the algebra; zero when `f` preserves the algebra.
    pub fn op_residual(&self, f: impl Fn(&CMat) -> CMat) -> f64 {
        let mut worst: f64 = 0.0;
        for b in self.mats.iter() {
            let img = f(b);
            let c = self.coords(&img);
            worst = worst.max(mat_dist(&self.expand(&c), &img));
        }
        worst
    }
}

/// Symmetric positive-definite bilinear form on algebra coordinates; the
/// basis is orthonormal so this is the plain dot product.
pub fn inner_product(x: &AlgVec, y: &AlgVec) -> Result<f64, LinalgError> {
    if x.basis_id != y.basis_id {
        return Err(LinalgError::BasisMismatch);
    }
    Ok(x.coords.dot(&y.coords))
}

/// Coordinates of g x g^{-1}; errors if the conjugate leaves the algebra.
pub fn adjoint(g: &CMat, x: &AlgVec, basis: &LieBasis, tol: &Tol) -> Result<AlgVec, LinalgError> {
    if x.basis_id != basis.id {
        return Err(LinalgError::BasisMismatch);
    }
    let gi = g.clone().try_inverse().ok_or(LinalgError::Singular)?;
    let m = g * basis.expand(&x.coords) * gi;
    Ok(basis.vec(basis.coords_checked(&m, tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        m
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = cmat_zeros(3);
        assert_eq!(mat_exp(&z), cmat_identity(3));
    }

    #[test]
    fn exp_closed_form_hyperbolic() {
        // exp([[0,t],[t,0]]) = [[cosh t, sinh t],[sinh t, cosh t]]
        for &t in &[0.3, -1.2, 2.5] {
            let mut a = cmat_zeros(2);
            a[(0, 1)] = C64::new(t, 0.0);
            a[(1, 0)] = C64::new(t, 0.0);
            let e = mat_exp(&a);
            assert!((e[(0, 0)].re - t.cosh()).abs() < 1e-12, "t={t}");
            assert!((e[(0, 1)].re - t.sinh()).abs() < 1e-12);
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        let tol = Tol::default();
        let l = mat_log_principal(&cmat_identity(4), &tol).unwrap();
        assert!(mat_norm_inf(&l) < 1e-14);
    }

    #[test]
    fn log_diagonal_case() {
        let tol = Tol::default();
        let e = std::f64::consts::E;
        let p = CMat::from_diagonal(&DVector::from_vec(vec![
            C64::new(e, 0.0),
            C64::new(1.0 / e, 0.0),
        ]));
        let l = mat_log_principal(&p, &tol).unwrap();
        assert!((l[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((l[(1, 1)].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_rejects_semidefinite() {
        let tol = Tol::default();
        let p = CMat::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ]));
        assert!(matches!(
            mat_log_principal(&p, &tol),
            Err(LinalgError::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn exp_log_round_trip_against_eigen_oracle() {
        // oracle: rebuild exp(h) from the eigendecomposition of h directly
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = Tol::default();
        for _ in 0..20 {
            let h = random_hermitian(4, &mut rng);
            let (vals, v) = hermitian_eigen(&h);
            let d = CMat::from_diagonal(&DVector::from_iterator(
                4,
                vals.iter().map(|&x| C64::new(x.exp(), 0.0)),
            ));
            let oracle = &v * d * v.adjoint();
            let p = mat_exp(&h);
            assert!(mat_dist(&p, &oracle) < 1e-11, "exp disagrees with eigen oracle");
            let back = mat_log_principal(&p, &tol).unwrap();
            assert!(mat_dist(&back, &h) < 1e-10, "log(exp(h)) != h");
        }
    }

    #[test]
    fn polar_identity_and_diagonal() {
        let (u, y) = polar_decompose(&cmat_identity(2), PolarSide::Right).unwrap();
        assert!(mat_dist(&u, &cmat_identity(2)) < 1e-13);
        assert!(mat_norm_inf(&y) < 1e-13);

        let g = CMat::from_diagonal(&DVector::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(0.5, 0.0),
        ]));
        let (u, y) = polar_decompose(&g, PolarSide::Right).unwrap();
        assert!(mat_dist(&u, &cmat_identity(2)) < 1e-13);
        assert!((y[(0, 0)].re - 2.0f64.ln()).abs() < 1e-13);
        assert!((y[(1, 1)].re + 2.0f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn polar_rejects_singular() {
        let mut g = cmat_zeros(2);
        g[(0, 0)] = C64::new(1.0, 0.0);
        assert!(matches!(polar_decompose(&g, PolarSide::Right), Err(LinalgError::Singular)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn polar_recomposes(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3;
            let mut g = cmat_zeros(n);
            for i in 0..n { for j in 0..n {
                g[(i,j)] = C64::new(rng.random::<f64>()-0.5, rng.random::<f64>()-0.5);
            }}
            g += cmat_identity(n) * C64::new(2.0, 0.0); // keep well-conditioned
            for side in [PolarSide::Right, PolarSide::Left] {
                let (u, y) = polar_decompose(&g, side).unwrap();
                let e = mat_exp(&y);
                let re = match side { PolarSide::Right => &u * &e, PolarSide::Left => &e * &u };
                prop_assert!(mat_dist(&re, &g) < 1e-8);
                prop_assert!(mat_dist(&(&u * u.adjoint()), &cmat_identity(n)) < 1e-10);
                prop_assert!(mat_dist(&y, &y.adjoint()) < 1e-10);
            }
        }

        #[test]
        fn exp_log_round_trip_hermitian(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tol = Tol::default();
            let h = random_hermitian(3, &mut rng);
            let back = mat_log_principal(&mat_exp(&h), &tol).unwrap();
            prop_assert!(mat_dist(&back, &h) < 10.0 * tol.eq);
        }
    }

    #[test]
    fn nullspace_zero_and_identity() {
        let z = RMat::zeros(3, 3);
        assert_eq!(nullspace(&z, 1e-7).len(), 3);
        let id = RMat::identity(3, 3);
        assert!(nullspace(&id, 1e-7).is_empty());
    }

    #[test]
    fn nullspace_is_orthonormal_and_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // random rank-2 map on R^5
        let a = RMat::from_fn(2, 5, |_, _| rng.random::<f64>() - 0.5);
        let m = a.transpose() * &a;
        let ker = nullspace(&m, 1e-9);
        assert_eq!(ker.len(), 3);
        for (i, v) in ker.iter().enumerate() {
            assert!((v.norm() - 1.0).abs() < 1e-10);
            assert!((&m * v).norm() < 1e-8);
            for w in ker.iter().skip(i + 1) {
                assert!(v.dot(w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn basis_round_trip_and_inner_product() {
        // sl(2,R) basis
        let e = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let f = e.transpose();
        let h = CMat::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        let basis = LieBasis::orthonormalize(&[h.clone(), e.clone(), f.clone()]).unwrap();
        let tol = Tol::default();
        let m = &e * C64::new(0.7, 0.0) + &h * C64::new(-0.2, 0.0);
        let c = basis.coords_checked(&m, &tol).unwrap();
        assert!(mat_dist(&basis.expand(&c), &m) < 1e-12);

        let v = basis.vec(c);
        let ip = inner_product(&v, &v).unwrap();
        assert!(ip > 0.0);

        let other = LieBasis::orthonormalize(&[h, e, f]).unwrap();
        let w = other.vec(v.coords.clone());
        assert!(matches!(inner_product(&v, &w), Err(LinalgError::BasisMismatch)));
    }

    #[test]
    fn adjoint_weight_vector_and_round_trip() {
        let e = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let f = e.transpose();
        let h = CMat::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        let basis = LieBasis::orthonormalize(&[h, e.clone(), f]).unwrap();
        let tol = Tol::default();

        let lam = 1.7;
        let g = CMat::from_diagonal(&DVector::from_vec(vec![
            C64::new(lam, 0.0),
            C64::new(1.0 / lam, 0.0),
        ]));
        let x = basis.vec(basis.coords(&e));
        let gx = adjoint(&g, &x, &basis, &tol).unwrap();
        // diag(l,1/l) E diag(1/l,l) = l^2 E
        let expect = basis.coords(&(&e * C64::new(lam * lam, 0.0)));
        assert!((&gx.coords - &expect).norm() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let t = rng.random::<f64>() - 0.5;
            let g = mat_exp(&((&e - &e.transpose()) * C64::new(t, 0.0)));
            let gi = g.clone().try_inverse().unwrap();
            let back = adjoint(&g, &adjoint(&gi, &x, &basis, &tol).unwrap(), &basis, &tol).unwrap();
            assert!((&back.coords - &x.coords).norm() < 1e-9);
        }
    }

    #[test]
    fn identity_adjoint_fixes() {
        let e = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let basis = LieBasis::orthonormalize(&[e.clone()]).unwrap();
        let x = basis.vec(basis.coords(&e));
        let y = adjoint(&cmat_identity(2), &x, &basis, &Tol::default()).unwrap();
        assert!((&y.coords - &x.coords).norm() < 1e-14);
    }
}
