//! Golden check suites for the bundled fixtures. The `example <name> --check`
//! command and the acceptance test target both run these.

use crate::atlas::{self, build_atlas, stratify_by_action, ChamberKind, GenKind, TorusChart};
use crate::config::Config;
use crate::coset::{self, beta, star_action, transversal, PointX};
use crate::fixtures::{self, sl2_coords, sl2_v, sl2_xyz, sl8_a0_point};
use crate::linalg::{ip_frob, mat_dist, mat_exp, C64, CMat, RMat, RVec};
use crate::moment::{
    self, gradient_flow, in_kempf_ness, is_orbit_closed, mu, rho, slice_rep_weights,
    ClosedVerdict, FlowOpts,
};
use crate::setup::{Structure, Subspace};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct GoldenCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub fixture: String,
    pub checks: Vec<GoldenCheck>,
    pub passed: bool,
    /// sampled zero-set point cloud (x, y, z) for the small fixture
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_cloud: Option<Vec<[f64; 3]>>,
}

fn check(checks: &mut Vec<GoldenCheck>, name: &str, passed: bool, detail: String) {
    checks.push(GoldenCheck { name: name.into(), passed, detail });
}

pub fn run_suite(name: &str) -> Option<SuiteResult> {
    match name {
        "sl2" => Some(sl2_suite()),
        "sl8" => Some(sl8_suite()),
        _ => None,
    }
}

fn sl2_atlas_inputs(cfg: &Config, st: &Structure) -> (TorusChart, Vec<CMat>, Vec<CMat>, Vec<CMat>, Vec<CMat>) {
    let gens = cfg.a0_generator_coords(st).expect("a0 generators");
    let chart = TorusChart {
        generators: gens.into_iter().map(|g| (g, GenKind::Compact)).collect(),
        base_point: st.identity(),
    };
    let weyl = cfg.mats(&cfg.file.candidates.weyl).unwrap();
    let hints = cfg.mats(&cfg.file.torus.fiber_t_hints).unwrap();
    let fiber = cfg.mats(&cfg.file.candidates.fiber).unwrap();
    let witnesses = cfg.mats(&cfg.file.candidates.component_witnesses).unwrap();
    (chart, weyl, hints, fiber, witnesses)
}

// -------------------------------------------------------------------------
// SL(2) suite
// -------------------------------------------------------------------------

pub fn sl2_suite() -> SuiteResult {
    let cfg = fixtures::bundled_config("sl2").unwrap();
    let st = cfg.structure().expect("sl2 validates");
    let mut checks = Vec::new();
    let mut cloud = Vec::new();

    // 1. Kempf-Ness membership agrees with the explicit zero set and with
    //    the moment-map norm on a 40 x 40 grid of the hyperboloid
    {
        let t0 = Instant::now();
        let mut ok = true;
        let mut worst = String::new();
        for i in 0..40 {
            let phi = 2.0 * PI * i as f64 / 40.0;
            for j in 0..40 {
                let z = -3.0 + 6.0 * j as f64 / 40.0;
                let r = (1.0 + z * z).sqrt();
                let (x, y) = (r * phi.cos(), r * phi.sin());
                let pt = PointX::from_matrix(&st, sl2_xyz(x, y, z)).unwrap();
                let member = in_kempf_ness(&st, &pt).unwrap().member;
                let expected = y.abs() < 1e-7 || z.abs() < 1e-7;
                let mu_small = mu(&st, &pt).norm() < 1e-7;
                if member != expected || member != mu_small {
                    ok = false;
                    worst = format!(
                        "mismatch at ({x:.3},{y:.3},{z:.3}): member={member} expected={expected} mu_small={mu_small}"
                    );
                }
                if member {
                    cloud.push([x, y, z]);
                }
            }
        }
        let dt = t0.elapsed().as_secs_f64();
        check(
            &mut checks,
            "kempf_ness_grid_agreement",
            ok && dt < 10.0,
            if ok { format!("1600 samples agree, {dt:.2}s") } else { worst },
        );
    }

    // 2a. flow from 50 random closed-orbit starts: converges to the branch
    //     point, preserving the first coordinate
    {
        let opts = FlowOpts::from_structure(&st);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.file.numerics.seed);
        let mut ok = true;
        let mut detail = String::new();
        let mut max_zdrift: f64 = 0.0;
        let mut max_xdrift: f64 = 0.0;
        for _ in 0..50 {
            let c = 1.9 * (rng.random::<f64>() - 0.5); // |c| < 0.95
            let z0 = 6.0 * (rng.random::<f64>() - 0.5);
            let y0 = (1.0 + z0 * z0 - c * c).sqrt();
            let x0 = PointX::from_matrix(&st, sl2_xyz(c, y0, z0)).unwrap();
            let tr = gradient_flow(&st, &x0, &opts).unwrap();
            let (xe, _, ze) = sl2_coords(&tr.end.mat);
            max_zdrift = max_zdrift.max(ze.abs());
            max_xdrift = max_xdrift.max((xe - c).abs());
            let mut mono = true;
            let mut prev = f64::INFINITY;
            for s in &tr.steps {
                if s.norm_sq > prev + 1e-11 {
                    mono = false;
                }
                prev = s.norm_sq;
            }
            if !(tr.converged && tr.residual < 1e-7 && ze.abs() < 1e-5 && (xe - c).abs() < 1e-9 && mono) {
                ok = false;
                detail = format!(
                    "start c={c:.4} z0={z0:.4}: converged={} residual={:.2e} z={ze:.2e} xdrift={:.2e} mono={mono}",
                    tr.converged,
                    tr.residual,
                    (xe - c).abs()
                );
                break;
            }
        }
        if ok {
            detail = format!("50 flows converged; max |z| = {max_zdrift:.2e}, max x drift = {max_xdrift:.2e}");
        }
        check(&mut checks, "flow_closed_orbits", ok, detail);
    }

    // 2b. the rays (1, s, s) are not closed
    {
        let opts = FlowOpts::from_structure(&st);
        let mut ok = true;
        let mut detail = String::new();
        for &s in &[0.5f64, 1.0, 2.0] {
            let x = PointX::from_matrix(&st, sl2_xyz(1.0, s, s)).unwrap();
            let rep = is_orbit_closed(&st, &x, &opts).unwrap();
            if rep.verdict != ClosedVerdict::NotClosed {
                ok = false;
                detail = format!("s={s}: verdict {:?}", rep.verdict);
                break;
            }
        }
        if ok {
            detail = "rays (1,s,s), s in {0.5,1,2}, all detected non-closed".into();
        }
        check(&mut checks, "non_closed_rays", ok, detail);
    }

    // 3. slice data at v: dimension 2, weights {+2,-2}; principality on the torus
    {
        let xv = PointX::from_matrix(&st, sl2_v()).unwrap();
        let tv = transversal(&st, &xv);
        let w = slice_rep_weights(&st, &xv);
        let weights_ok = w.len() == 2
            && (w[0].0 + 2.0).abs() < 1e-9
            && (w[1].0 - 2.0).abs() < 1e-9
            && w[0].1.abs() < 1e-9
            && w[1].1.abs() < 1e-9;
        let witnesses = vec![-st.identity()];
        let mut principal_ok = true;
        for &phi in &[0.3f64, 1.1, 2.4, 4.0, 5.5] {
            let u = PointX::from_matrix(&st, rot_point(&st, phi)).unwrap();
            let (p, _) = coset::is_principal(&st, &u, &witnesses);
            principal_ok &= p;
        }
        let (pv, _) = coset::is_principal(&st, &xv, &witnesses);
        let xmv = PointX::from_matrix(&st, -sl2_v()).unwrap();
        let (pmv, _) = coset::is_principal(&st, &xmv, &witnesses);
        let ok = tv.slice_basis.len() == 2 && weights_ok && principal_ok && !pv && !pmv;
        check(
            &mut checks,
            "slice_data_at_v",
            ok,
            format!(
                "dim slice = {}, weights = {:?}, principal on torus = {principal_ok}, at +-v = {pv}/{pmv}",
                tv.slice_basis.len(),
                w
            ),
        );
    }

    // 4. atlas: 4 strata, minimal collection {A0, Av, A(-v)}, trivial Weyl
    {
        let (chart, weyl, hints, fiber, witnesses) = sl2_atlas_inputs(&cfg, &st);
        let atlas = build_atlas(
            &st,
            chart,
            &weyl,
            &hints,
            &fiber,
            &witnesses,
            cfg.file.numerics.grid_n,
            cfg.file.numerics.max_group_order,
            cfg.file.numerics.seed,
        )
        .expect("sl2 atlas");
        let weyl_trivial = atlas.weyl.order() == 1;
        let four_strata = atlas.grid.strata.len() == 4;
        let three_tori = atlas.minimal_tori.len() == 3;
        // identify the charts
        let mut n_compact = 0;
        let mut split_bases = Vec::new();
        for t in &atlas.minimal_tori {
            if t.chart.compact_dim() == 1 && t.chart.split_dim() == 0 {
                n_compact += 1;
            } else if t.chart.compact_dim() == 0 && t.chart.split_dim() == 1 {
                split_bases.push(t.chart.base_point.clone());
            }
        }
        let v = sl2_v();
        let split_at_pm_v = split_bases.len() == 2
            && split_bases
                .iter()
                .any(|b| mat_dist(b, &v) < 1e-7)
            && split_bases
                .iter()
                .any(|b| mat_dist(b, &(-&v)) < 1e-7);
        let little_trivial = atlas.fibers.iter().all(|f| f.little_weyl.order() == 1);
        let covered = atlas.coverage.iter().all(|c| c.is_some());
        let ok = weyl_trivial && four_strata && three_tori && n_compact == 1 && split_at_pm_v
            && little_trivial && covered;
        check(
            &mut checks,
            "atlas_minimal_collection",
            ok,
            format!(
                "strata={} tori={} compact_charts={n_compact} split_at_pm_v={split_at_pm_v} weyl_order={} coverage_total={covered}",
                atlas.grid.strata.len(),
                atlas.minimal_tori.len(),
                atlas.weyl.order()
            ),
        );

        // complexified candidate table refines (equals) the isotropy strata
        let complex_cands = cfg.mats(&cfg.file.candidates.weyl_complex).unwrap();
        let (chart2, ..) = sl2_atlas_inputs(&cfg, &st);
        let ctable = atlas::weyl_generate(
            &st,
            &complex_cands,
            &chart2,
            cfg.file.numerics.max_group_order,
            false,
        )
        .expect("complex table");
        let action_parts = stratify_by_action(&st, &chart2, &ctable, cfg.file.numerics.grid_n);
        let mut iso_parts: Vec<Vec<usize>> = atlas
            .grid
            .strata
            .iter()
            .map(|s| {
                let mut v = s.node_indices.clone();
                v.sort();
                v
            })
            .collect();
        iso_parts.sort();
        let mut act_parts: Vec<Vec<usize>> = action_parts
            .into_iter()
            .map(|mut v| {
                v.sort();
                v
            })
            .collect();
        act_parts.sort();
        let ok2 = ctable.order() == 2 && iso_parts == act_parts;
        check(
            &mut checks,
            "complexified_table_strata",
            ok2,
            format!(
                "complex table order {} (expected 2); partitions equal: {}",
                ctable.order(),
                iso_parts == act_parts
            ),
        );
    }

    // 7 (sl2 parts): property suites at 100 samples
    property_suite(&st, &cfg, &mut checks, FixtureKind::Sl2);

    let passed = checks.iter().all(|c| c.passed);
    SuiteResult { fixture: "sl2".into(), checks, passed, point_cloud: Some(cloud) }
}

fn rot_point(st: &Structure, phi: f64) -> CMat {
    let gen = st.expand(&st.basis.coords(&{
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        m[(1, 0)] = C64::new(-1.0, 0.0);
        m
    }));
    mat_exp(&(gen * C64::new(phi, 0.0)))
}

// -------------------------------------------------------------------------
// SL(8) suite
// -------------------------------------------------------------------------

pub fn sl8_suite() -> SuiteResult {
    let cfg = fixtures::bundled_config("sl8").unwrap();
    let st = cfg.structure().expect("sl8 validates");
    let mut checks = Vec::new();

    let gens = cfg.a0_generator_coords(&st).expect("a0 generators");
    let chart = TorusChart {
        generators: gens.into_iter().map(|g| (g, GenKind::Compact)).collect(),
        base_point: st.identity(),
    };
    let weyl_cands = cfg.mats(&cfg.file.candidates.weyl).unwrap();

    // 5. the twisted Weyl group closes at order exactly 32 with 4 pure
    //    translations and the signed-permutation quotient of order 8
    {
        let table = atlas::weyl_generate(&st, &weyl_cands, &chart, 1024, true).expect("weyl table");
        let translations = table.pure_translation_count();
        let linear = table.linear_part_count();
        let signed = table.linear_parts_are_signed_permutations();
        let order2 = table
            .elements
            .iter()
            .filter(|e| e.action.is_pure_translation() && !e.action.is_identity())
            .all(|e| {
                let sq = e.action.compose(&e.action);
                sq.is_identity()
            });
        let ok = table.order() == 32 && translations == 4 && linear == 8 && signed && order2;
        check(
            &mut checks,
            "weyl_group_order",
            ok,
            format!(
                "order={} translations={translations} linear_parts={linear} signed_permutations={signed} translations_order_2={order2}",
                table.order()
            ),
        );
    }

    // 6. strata and fibers over the fundamental domain at grid 64
    {
        let t0 = Instant::now();
        let hints = cfg.mats(&cfg.file.torus.fiber_t_hints).unwrap();
        let fiber_cands = cfg.mats(&cfg.file.candidates.fiber).unwrap();
        let witnesses = cfg.mats(&cfg.file.candidates.component_witnesses).unwrap();
        let atlas = build_atlas(
            &st,
            chart.clone(),
            &weyl_cands,
            &hints,
            &fiber_cands,
            &witnesses,
            cfg.file.numerics.grid_n,
            cfg.file.numerics.max_group_order,
            cfg.file.numerics.seed,
        )
        .expect("sl8 atlas");
        let dt = t0.elapsed().as_secs_f64();

        let mut ok = atlas.grid.strata.len() == 7 && atlas.quotient_dim == 2;
        let mut notes: Vec<String> = vec![format!(
            "{} strata, quotient_dim {}, {:.1}s",
            atlas.grid.strata.len(),
            atlas.quotient_dim,
            dt
        )];
        ok &= dt < 300.0;

        // signature: (stratum dim, dim t, little weyl order, chamber kind)
        let mut sigs: Vec<(usize, usize, usize, ChamberKind)> = atlas
            .grid
            .strata
            .iter()
            .zip(atlas.fibers.iter())
            .map(|(s, f)| (s.dim, f.t_basis.len(), f.little_weyl.order(), f.chamber.kind))
            .collect();
        sigs.sort_by_key(|s| (s.0, s.1, s.2));
        let expected: Vec<(usize, usize, usize, ChamberKind)> = vec![
            (0, 2, 4, ChamberKind::Quadrant),
            (0, 2, 8, ChamberKind::SortedWedge),
            (0, 2, 8, ChamberKind::SortedWedge),
            (1, 1, 2, ChamberKind::Quadrant),
            (1, 1, 2, ChamberKind::Quadrant),
            (1, 1, 2, ChamberKind::Quadrant),
            (2, 0, 1, ChamberKind::Free),
        ];
        if sigs != expected {
            ok = false;
            notes.push(format!("signatures {sigs:?}"));
        }

        // pin the corner strata to their torus positions
        let mut corner_checks = 0;
        for (s, f) in atlas.grid.strata.iter().zip(atlas.fibers.iter()) {
            if s.dim == 0 {
                let r = &s.representative;
                let at = |a: f64, b: f64| {
                    atlas::circle_dist(r[0], a) < 1e-9 && atlas::circle_dist(r[1], b) < 1e-9
                };
                if at(0.0, 0.0) && f.little_weyl.order() == 8 && f.chamber.kind == ChamberKind::SortedWedge {
                    corner_checks += 1;
                } else if at(PI / 2.0, PI / 2.0) && f.little_weyl.order() == 8 {
                    corner_checks += 1;
                } else if at(0.0, PI / 2.0)
                    && f.little_weyl.order() == 4
                    && f.chamber.kind == ChamberKind::Quadrant
                {
                    corner_checks += 1;
                }
            }
            if s.dim == 1 && f.t_basis.len() == 1 {
                // diagonal stratum: representative has eta1 = eta2
                let r = &s.representative;
                if (r[0] - r[1]).abs() < 1e-9 && s.isotropy_dim == 10 {
                    corner_checks += 1;
                }
            }
        }
        if corner_checks != 4 {
            ok = false;
            notes.push(format!("positional checks matched {corner_checks}/4"));
        }

        // isotropy dimensions per stratum
        let mut dims: Vec<usize> = atlas.grid.strata.iter().map(|s| s.isotropy_dim).collect();
        dims.sort();
        if dims != vec![6, 7, 9, 10, 10, 16, 20] {
            ok = false;
            notes.push(format!("isotropy dims {dims:?}"));
        }

        check(&mut checks, "strata_and_fibers", ok, notes.join("; "));

        // minimal tori: the open stratum claims the reference torus
        let int_idx = atlas.grid.strata.iter().position(|s| s.dim == 2).unwrap();
        let ok2 = match atlas.coverage[int_idx] {
            Some(ti) => {
                let t = &atlas.minimal_tori[ti];
                t.chart.compact_dim() == 2 && t.chart.split_dim() == 0
            }
            None => false,
        } && atlas.coverage.iter().all(|c| c.is_some());
        check(
            &mut checks,
            "reference_torus_from_open_stratum",
            ok2,
            format!("{} minimal tori, full coverage {}", atlas.minimal_tori.len(), atlas.coverage.iter().all(|c| c.is_some())),
        );
    }

    // 7 (sl8 parts)
    property_suite(&st, &cfg, &mut checks, FixtureKind::Sl8);

    let passed = checks.iter().all(|c| c.passed);
    SuiteResult { fixture: "sl8".into(), checks, passed, point_cloud: None }
}

// -------------------------------------------------------------------------
// property suites (acceptance criterion 7)
// -------------------------------------------------------------------------

enum FixtureKind {
    Sl2,
    Sl8,
}

fn random_group_element(st: &Structure, rng: &mut ChaCha8Rng, scale: f64) -> CMat {
    let c = RVec::from_fn(st.dim(), |_, _| scale * (rng.random::<f64>() - 0.5));
    mat_exp(&st.expand(&c))
}

fn random_h_element(st: &Structure, rng: &mut ChaCha8Rng, scale: f64) -> CMat {
    let c = st.random_in(&st.decomp.h, rng) * scale;
    mat_exp(&st.expand(&c))
}

fn random_compact_element(st: &Structure, rng: &mut ChaCha8Rng, scale: f64) -> CMat {
    let c = st.random_in(&st.decomp.g0, rng) * scale;
    mat_exp(&st.expand(&c))
}

fn a0_sample(st: &Structure, cfg: &Config, rng: &mut ChaCha8Rng) -> CMat {
    let gens = cfg.a0_generator_coords(st).unwrap();
    let mut z = RVec::zeros(st.dim());
    for g in &gens {
        z += g * (rng.random::<f64>() * 2.0 * PI);
    }
    mat_exp(&st.expand(&z))
}

fn property_suite(st: &Structure, cfg: &Config, checks: &mut Vec<GoldenCheck>, kind: FixtureKind) {
    let seed = cfg.file.numerics.seed;
    let nsamp = 100;

    // theta(beta(g)) = beta(g)^{-1}
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x01);
        let mut worst = 0.0f64;
        for _ in 0..nsamp {
            let g = random_group_element(st, &mut rng, 0.6);
            let x = beta(st, &g).unwrap();
            let r = mat_dist(&(st.theta_grp(&x.mat) * &x.mat), &st.identity());
            worst = worst.max(r);
        }
        check(checks, "prop_beta_twisted_inverse", worst < 1e-7, format!("max residual {worst:.2e}"));
    }

    // lambda equivariance under the compact part
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x02);
        let mut worst = 0.0f64;
        for _ in 0..nsamp {
            let g = random_group_element(st, &mut rng, 0.5);
            let x = beta(st, &g).unwrap();
            let u = random_compact_element(st, &mut rng, 0.8);
            let ux = coset::star_action_unchecked(st, &u, &x).unwrap();
            let lam_ux = coset::lambda_projection(&ux);
            let lam_x = PointX::from_matrix(st, coset::lambda_projection(&x)).unwrap();
            let u_lam = coset::star_action_unchecked(st, &u, &lam_x).unwrap();
            worst = worst.max(mat_dist(&lam_ux, &u_lam.mat));
        }
        check(checks, "prop_lambda_equivariant", worst < 1e-7, format!("max residual {worst:.2e}"));
    }

    // slice transport: conj(h) S_x = S_{h*x}
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x03);
        let mut worst = 0.0f64;
        let reps = match kind {
            FixtureKind::Sl2 => nsamp,
            FixtureKind::Sl8 => nsamp,
        };
        for _ in 0..reps {
            let g = random_group_element(st, &mut rng, 0.4);
            let x = beta(st, &g).unwrap();
            let h = random_h_element(st, &mut rng, 0.5);
            let hx = star_action(st, &h, &x).unwrap();
            let tv_x = transversal(st, &x);
            let tv_hx = transversal(st, &hx);
            let hi = h.clone().try_inverse().unwrap();
            let mut moved: Vec<RVec> = Vec::new();
            for v in &tv_x.slice_basis {
                let mut w = st.basis.coords(&(&h * st.expand(v) * &hi));
                for b in &moved {
                    let c = w.dot(b);
                    w -= b * c;
                }
                let n = w.norm();
                if n > 1e-10 {
                    moved.push(w / n);
                }
            }
            let a = Subspace::from_basis(moved, st.dim());
            let b = tv_hx.slice_subspace(st.dim());
            worst = worst.max(a.distance(&b));
        }
        check(checks, "prop_slice_transport", worst < 1e-7, format!("max projector distance {worst:.2e}"));
    }

    // moment map matches the finite-difference oracle of the exhaustion
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04);
        let h = 1e-6;
        let mut worst = 0.0f64;
        let reps = match kind {
            FixtureKind::Sl2 => nsamp,
            FixtureKind::Sl8 => nsamp,
        };
        for _ in 0..reps {
            let g = random_group_element(st, &mut rng, 0.5);
            let x = beta(st, &g).unwrap();
            let m = mu(st, &x);
            for (j, xi) in st.decomp.u_h.iter().enumerate() {
                let txi = st.theta_alg(xi);
                let ap = mat_exp(&(xi * C64::new(0.0, -h)));
                let bp = mat_exp(&(&txi * C64::new(0.0, h)));
                let am = mat_exp(&(xi * C64::new(0.0, h)));
                let bm = mat_exp(&(&txi * C64::new(0.0, -h)));
                let fd = (rho(&(&ap * &x.mat * &bp)).unwrap() - rho(&(&am * &x.mat * &bm)).unwrap())
                    / (2.0 * h);
                worst = worst.max((m.coords[j] - fd).abs());
            }
        }
        check(checks, "prop_mu_finite_difference", worst < 1e-5, format!("max |mu - fd| = {worst:.2e}"));
    }

    // moment norm monotone along flows
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05);
        let mut opts = FlowOpts::from_structure(st);
        opts.max_iters = match kind {
            FixtureKind::Sl2 => 2000,
            FixtureKind::Sl8 => 40,
        };
        let mut mono = true;
        let flows = match kind {
            FixtureKind::Sl2 => 10,
            FixtureKind::Sl8 => 3,
        };
        let mut steps_total = 0usize;
        for _ in 0..flows {
            let g = random_group_element(st, &mut rng, 0.5);
            let x = beta(st, &g).unwrap();
            let tr = gradient_flow(st, &x, &opts).unwrap();
            let mut prev = f64::INFINITY;
            for s in &tr.steps {
                if s.norm_sq > prev + 1e-11 {
                    mono = false;
                }
                prev = s.norm_sq;
            }
            steps_total += tr.steps.len();
        }
        check(checks, "prop_flow_monotone", mono, format!("{flows} flows, {steps_total} accepted steps, all non-increasing"));
    }

    // tau_x diagonalizable at Kempf-Ness points
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x06);
        let reps = match kind {
            FixtureKind::Sl2 => nsamp,
            FixtureKind::Sl8 => 30,
        };
        let mut ok = true;
        let mut worst_defect = 0usize;
        for _ in 0..reps {
            let u = a0_sample(st, cfg, &mut rng);
            let slice = moment::slice_noncompact_at(st, &u);
            let mut z = RVec::zeros(st.dim());
            for v in &slice {
                z += v * (rng.random::<f64>() - 0.5);
            }
            let x = mat_exp(&st.expand(&z)) * &u;
            let t = coset::tau_x_op(st, &x);
            let defect = diagonalizability_defect(&t, st.tol.rank);
            if defect > 0 {
                ok = false;
                worst_defect = worst_defect.max(defect);
            }
        }
        check(
            checks,
            "prop_tau_semisimple_on_zero_set",
            ok,
            if ok { format!("{reps} points diagonalizable") } else { format!("defect {worst_defect}") },
        );
    }

    // Lie algebra of the reference torus sits inside every slice along it,
    // and exp(slice) translates stay in the zero set
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x07);
        let gens = cfg.a0_generator_coords(st).unwrap();
        let mut worst = 0.0f64;
        let mut member_ok = true;
        let mut lambda_ok = true;
        for _ in 0..nsamp {
            let u = a0_sample(st, cfg, &mut rng);
            for g in &gens {
                let gm = st.expand(g);
                let r1 = crate::linalg::mat_norm_inf(&(coset::theta_x_alg(st, &u, &gm) + &gm));
                let r2 = crate::linalg::mat_norm_inf(&(st.sigma_alg(&gm) + &gm));
                worst = worst.max(r1.max(r2));
            }
            let slice = moment::slice_noncompact_at(st, &u);
            if !slice.is_empty() {
                let mut z = RVec::zeros(st.dim());
                for v in &slice {
                    z += v * (rng.random::<f64>() - 0.5);
                }
                let xm = mat_exp(&st.expand(&z)) * &u;
                let x = PointX::from_matrix(st, xm).unwrap();
                let kn = in_kempf_ness(st, &x).unwrap();
                member_ok &= kn.member;
                lambda_ok &= mat_dist(&coset::lambda_projection(&x), &u) < 1e-6;
            }
        }
        check(
            checks,
            "prop_torus_algebra_in_slices",
            worst < 1e-7,
            format!("max split-condition residual {worst:.2e}"),
        );
        check(
            checks,
            "prop_slice_exponentials_in_zero_set",
            member_ok && lambda_ok,
            format!("members={member_ok} lambda_fixed={lambda_ok}"),
        );
    }

    // moment norm invariant under the compact symmetric subgroup
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x08);
        let mut worst = 0.0f64;
        for _ in 0..nsamp {
            let g = random_group_element(st, &mut rng, 0.5);
            let x = beta(st, &g).unwrap();
            // compact h: exp of (h cap g0)
            let mut c = RVec::zeros(st.dim());
            for v in &st.decomp.h_cap_g0.basis {
                c += v * (rng.random::<f64>() - 0.5);
            }
            let h0 = mat_exp(&st.expand(&c));
            let hx = star_action(st, &h0, &x).unwrap();
            worst = worst.max((mu(st, &x).norm() - mu(st, &hx).norm()).abs());
        }
        check(checks, "prop_mu_norm_compact_invariant", worst < 1e-7, format!("max deviation {worst:.2e}"));
    }
}

/// Sum over eigenvalue clusters of (algebraic multiplicity - kernel
/// dimension); zero exactly when the operator is diagonalizable.
pub fn diagonalizability_defect(t: &RMat, rank_tol: f64) -> usize {
    let n = t.nrows();
    let tc: nalgebra::DMatrix<C64> = t.map(|x| C64::new(x, 0.0));
    let eigs = crate::linalg::eigenvalues_complex(&tc);
    // cluster eigenvalues
    let mut remaining: Vec<C64> = eigs;
    let mut defect = 0usize;
    let cluster_tol = 1e-6;
    while let Some(&lam) = remaining.first() {
        let (cluster, rest): (Vec<C64>, Vec<C64>) =
            remaining.iter().partition(|e| (*e - lam).norm() < cluster_tol);
        remaining = rest;
        let mult = cluster.len();
        let mut shifted = tc.clone();
        for i in 0..n {
            shifted[(i, i)] -= lam;
        }
        let sv = shifted.svd(false, false).singular_values;
        let kernel = sv.iter().filter(|&&s| s < rank_tol.max(1e-8)).count();
        if kernel < mult {
            defect += mult - kernel;
        }
    }
    defect
}

/// Convert a suite result into a report payload.
pub fn suite_payload(result: &SuiteResult) -> serde_json::Value {
    serde_json::to_value(result).expect("suite serializes")
}

/// SL(8) torus point helper re-exported for tests.
pub fn sl8_point(e1: f64, e2: f64) -> CMat {
    sl8_a0_point(e1, e2)
}

/// Frobenius pairing re-export used by integration tests.
pub fn pairing(a: &CMat, b: &CMat) -> f64 {
    ip_frob(a, b)
}
