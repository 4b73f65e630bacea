//! Bundled fixtures: the split real forms SL(2,R) and SL(8,R) with their
//! standard involution pairs. Shipped as canonical JSON through the same
//! parser as user configs.

use crate::config::{
    mat_to_json, CandidatesBlock, Config, ConfigFile, GroupBlock, InvolutionJson, NumericsBlock,
    TorusBlock, CONFIG_SCHEMA,
};
use crate::linalg::{C64, CMat, RMat};
use crate::setup::{MembershipTag, Structure};
use once_cell::sync::Lazy;

fn rmat(n: usize, entries: &[(usize, usize, f64)]) -> CMat {
    let mut m = CMat::zeros(n, n);
    for &(i, j, x) in entries {
        m[(i, j)] = C64::new(x, 0.0);
    }
    m
}

fn real_to_cmat(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Basis of sl(n,R): elementary off-diagonal matrices then consecutive
/// diagonal differences.
fn sl_n_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(rmat(n, &[(i, j, 1.0)]));
            }
        }
    }
    for i in 0..n - 1 {
        out.push(rmat(n, &[(i, i, 1.0), (i + 1, i + 1, -1.0)]));
    }
    out
}

fn inv_json(conj: CMat, inverse_transpose: bool, entrywise_conjugate: bool) -> InvolutionJson {
    InvolutionJson { conj: mat_to_json(&conj), inverse_transpose, entrywise_conjugate }
}

pub fn sl2_config_file() -> ConfigFile {
    let n = 2;
    let id = CMat::identity(n, n);
    let j_sigma = rmat(n, &[(0, 0, 1.0), (1, 1, -1.0)]);
    let j_theta = rmat(n, &[(0, 1, 1.0), (1, 0, 1.0)]);
    let neg_id = rmat(n, &[(0, 0, -1.0), (1, 1, -1.0)]);
    let a0_gen = rmat(n, &[(0, 1, 1.0), (1, 0, -1.0)]);
    let split_gen = rmat(n, &[(0, 1, 1.0), (1, 0, 1.0)]);
    let mut complex_gen = CMat::zeros(n, n);
    complex_gen[(0, 0)] = C64::new(0.0, 1.0);
    complex_gen[(1, 1)] = C64::new(0.0, -1.0);

    ConfigFile {
        schema: CONFIG_SCHEMA.into(),
        group: GroupBlock {
            n,
            algebra_basis: sl_n_basis(n).iter().map(mat_to_json).collect(),
            sigma: inv_json(j_sigma, false, false),
            theta: inv_json(j_theta, false, false),
            delta: inv_json(id.clone(), true, true),
            phi: inv_json(id, false, true),
            membership: vec![MembershipTag::DetOne, MembershipTag::RealEntries],
            component_reps: vec![mat_to_json(&neg_id)],
            assume_h_g0_k: true,
        },
        torus: TorusBlock {
            a0_generators: vec![mat_to_json(&a0_gen)],
            fiber_t_hints: vec![mat_to_json(&split_gen)],
        },
        candidates: CandidatesBlock {
            weyl: vec![mat_to_json(&neg_id)],
            weyl_complex: vec![mat_to_json(&complex_gen)],
            fiber: vec![mat_to_json(&neg_id)],
            component_witnesses: vec![mat_to_json(&neg_id)],
        },
        numerics: NumericsBlock::default(),
    }
}

/// 2x2 building blocks used all over the SL(8) fixture.
fn blocks2() -> (RMat, RMat, RMat, RMat) {
    let i2 = RMat::identity(2, 2);
    let j = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let alpha = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let beta = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    (i2, j, alpha, beta)
}

/// Place 2x2 blocks into an 8x8 matrix at block positions (row, col).
fn place8(entries: &[(usize, usize, RMat)]) -> RMat {
    let mut m = RMat::zeros(8, 8);
    for (bi, bj, b) in entries {
        m.view_mut((bi * 2, bj * 2), (2, 2)).copy_from(b);
    }
    m
}

fn blockdiag8(d0: &RMat, d1: &RMat, d2: &RMat, d3: &RMat) -> RMat {
    place8(&[
        (0, 0, d0.clone()),
        (1, 1, d1.clone()),
        (2, 2, d2.clone()),
        (3, 3, d3.clone()),
    ])
}

pub fn sl8_config_file() -> ConfigFile {
    let n = 8;
    let (i2, j, alpha, beta) = blocks2();
    let id8 = CMat::identity(n, n);

    // sigma: conjugation with diag(I4, -I4)
    let j_sigma = real_to_cmat(&blockdiag8(&i2, &i2, &(-i2.clone()), &(-i2.clone())));
    // theta: conjugate-inverse-transpose followed by conjugation with [[0,I4],[-I4,0]]
    let j_theta = real_to_cmat(&place8(&[
        (0, 2, i2.clone()),
        (1, 3, i2.clone()),
        (2, 0, -i2.clone()),
        (3, 1, -i2.clone()),
    ]));

    // A0 chart generators
    let alpha1 = place8(&[(0, 2, j.clone()), (2, 0, j.clone())]);
    let alpha2 = place8(&[(1, 3, j.clone()), (3, 1, j.clone())]);

    // the five twisted-Weyl generators
    let p1 = blockdiag8(&alpha, &i2, &alpha, &i2);
    let g2 = blockdiag8(&j, &i2, &(-j.clone()), &i2);
    let p2 = blockdiag8(&i2, &alpha, &i2, &alpha);
    let q2 = blockdiag8(&i2, &j, &i2, &(-j.clone()));
    let swap4 = place8(&[(0, 1, i2.clone()), (1, 0, i2.clone()), (2, 3, i2.clone()), (3, 2, i2.clone())]);

    // extra little-Weyl candidates
    let p4 = blockdiag8(&i2, &(-i2.clone()), &i2, &(-i2.clone()));
    let p5 = blockdiag8(&i2, &beta, &i2, &beta);
    let p6 = blockdiag8(&i2, &(-i2.clone()), &i2, &i2);

    // fiber torus hints
    let t1 = place8(&[(0, 2, j.clone()), (2, 0, -j.clone())]);
    let t2 = place8(&[(1, 3, j.clone()), (3, 1, -j.clone())]);
    let x1 = place8(&[(0, 3, alpha.clone()), (3, 0, alpha.clone())]);
    let x2 = place8(&[(1, 2, alpha.clone()), (2, 1, alpha.clone())]);
    let xd = place8(&[
        (0, 3, alpha.clone()),
        (1, 2, -alpha.clone()),
        (3, 0, alpha.clone()),
        (2, 1, -alpha.clone()),
    ]);
    let w2 = place8(&[(1, 3, alpha.clone()), (3, 1, alpha.clone())]);

    // component witness: diag(D, D) with D = diag(-1,1,1,1)
    let d4 = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0, 1.0]));
    let witness = {
        let mut m = RMat::zeros(8, 8);
        m.view_mut((0, 0), (4, 4)).copy_from(&d4);
        m.view_mut((4, 4), (4, 4)).copy_from(&d4);
        m
    };

    let rm = |m: &RMat| mat_to_json(&real_to_cmat(m));
    ConfigFile {
        schema: CONFIG_SCHEMA.into(),
        group: GroupBlock {
            n,
            algebra_basis: sl_n_basis(n).iter().map(mat_to_json).collect(),
            sigma: inv_json(j_sigma, false, false),
            theta: inv_json(j_theta, true, true),
            delta: inv_json(id8.clone(), true, true),
            phi: inv_json(id8, false, true),
            membership: vec![MembershipTag::DetOne, MembershipTag::RealEntries],
            component_reps: vec![rm(&witness)],
            assume_h_g0_k: true,
        },
        torus: TorusBlock {
            a0_generators: vec![rm(&alpha1), rm(&alpha2)],
            fiber_t_hints: vec![rm(&t1), rm(&t2), rm(&x1), rm(&x2), rm(&xd), rm(&w2)],
        },
        candidates: CandidatesBlock {
            weyl: vec![rm(&p1), rm(&g2), rm(&p2), rm(&q2), rm(&swap4)],
            weyl_complex: vec![],
            fiber: vec![rm(&p1), rm(&p2), rm(&swap4), rm(&p4), rm(&p5), rm(&p6), rm(&q2)],
            component_witnesses: vec![rm(&witness)],
        },
        numerics: NumericsBlock::default(),
    }
}

static SL2_JSON: Lazy<String> = Lazy::new(|| {
    crate::report::to_canonical_json(&sl2_config_file()).expect("serialize sl2 fixture")
});
static SL8_JSON: Lazy<String> = Lazy::new(|| {
    crate::report::to_canonical_json(&sl8_config_file()).expect("serialize sl8 fixture")
});

/// Canonical JSON text of a bundled fixture ("sl2" or "sl8").
pub fn bundled_json(name: &str) -> Option<String> {
    match name {
        "sl2" => Some(SL2_JSON.clone()),
        "sl8" => Some(SL8_JSON.clone()),
        _ => None,
    }
}

pub fn bundled_config(name: &str) -> Option<Config> {
    bundled_json(name).map(|t| Config::from_str(&t).expect("bundled fixture parses"))
}

/// Validated structure for a bundled fixture; panics on internal error.
pub fn sl2_structure() -> Structure {
    bundled_config("sl2").unwrap().structure().expect("sl2 fixture validates")
}

pub fn sl8_structure() -> Structure {
    bundled_config("sl8").unwrap().structure().expect("sl8 fixture validates")
}

/// Point of the SL(2) coset manifold in hyperboloid coordinates
/// (x, y, z) with x^2 + y^2 = 1 + z^2: the matrix [[y+z, x], [-x, y-z]].
pub fn sl2_xyz(x: f64, y: f64, z: f64) -> CMat {
    rmat(2, &[(0, 0, y + z), (0, 1, x), (1, 0, -x), (1, 1, y - z)])
}

/// Inverse of [`sl2_xyz`].
pub fn sl2_coords(m: &CMat) -> (f64, f64, f64) {
    (
        m[(0, 1)].re,
        (m[(0, 0)].re + m[(1, 1)].re) / 2.0,
        (m[(0, 0)].re - m[(1, 1)].re) / 2.0,
    )
}

/// The distinguished element v = [[0,-1],[1,0]] of the SL(2) fixture.
pub fn sl2_v() -> CMat {
    rmat(2, &[(0, 1, -1.0), (1, 0, 1.0)])
}

/// SL(8) torus point a(eta1, eta2).
pub fn sl8_a0_point(e1: f64, e2: f64) -> CMat {
    let (i2, j, _, _) = blocks2();
    let (a, b) = (e1.cos(), e1.sin());
    let (ap, bp) = (e2.cos(), e2.sin());
    let m = place8(&[
        (0, 0, a * i2.clone()),
        (1, 1, ap * i2.clone()),
        (2, 2, a * i2.clone()),
        (3, 3, ap * i2),
        (0, 2, b * j.clone()),
        (2, 0, b * j.clone()),
        (1, 3, bp * j.clone()),
        (3, 1, bp * j),
    ]);
    real_to_cmat(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_dist, mat_exp};

    #[test]
    fn sl2_fixture_round_trips_through_parser() {
        let cfg = bundled_config("sl2").unwrap();
        let re = crate::report::to_canonical_json(&cfg.file).unwrap();
        assert_eq!(re, bundled_json("sl2").unwrap());
    }

    #[test]
    fn unknown_fixture_is_none() {
        assert!(bundled_json("sl3").is_none());
    }

    #[test]
    fn sl8_a0_point_is_exp_of_generators() {
        let st = sl8_structure();
        let cfg = bundled_config("sl8").unwrap();
        let gens = cfg.a0_generator_coords(&st).unwrap();
        let (e1, e2) = (0.3, 0.8);
        let z = st.expand(&(gens[0].clone() * e1)) + st.expand(&(gens[1].clone() * e2));
        let p = mat_exp(&z);
        assert!(mat_dist(&p, &sl8_a0_point(e1, e2)) < 1e-12);
    }

    #[test]
    fn sl2_xyz_on_hyperboloid() {
        let m = sl2_xyz(0.6, 1.0, 0.6);
        let (x, y, z) = sl2_coords(&m);
        assert!((x - 0.6).abs() < 1e-15 && (y - 1.0).abs() < 1e-15 && (z - 0.6).abs() < 1e-15);
    }
}
