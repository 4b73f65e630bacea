//! The reference compact split torus, twisted Weyl groups, the isotropy
//! stratification of the torus, per-stratum fiber data, and the minimal
//! collection of translated tori covering the quotient.

use crate::coset;
use crate::linalg::{
    ip_frob, mat_dist, mat_exp, mat_norm_inf, nullspace, C64, CMat, RMat, RVec,
};
use crate::moment::slice_noncompact_at;
use crate::setup::{check_membership, Structure, Subspace};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error)]
pub enum AtlasError {
    #[error("candidate group did not close within {0} elements")]
    NotClosed(usize),
    #[error("chart is not standard: {0}")]
    NotStandard(String),
    #[error("invalid torus chart: {0}")]
    InvalidChart(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// closed circle direction, coordinate period 2 pi
    Compact,
    /// ray direction
    Split,
}

/// A commuting family of torus generators through a base point.
/// Generator coordinates are over the structure basis and deliberately kept
/// at their configured scale (not unit norm) so compact coordinates have
/// period exactly 2 pi.
#[derive(Debug, Clone)]
pub struct TorusChart {
    pub generators: Vec<(RVec, GenKind)>,
    pub base_point: CMat,
}

impl TorusChart {
    pub fn compact_dim(&self) -> usize {
        self.generators.iter().filter(|(_, k)| *k == GenKind::Compact).count()
    }

    pub fn split_dim(&self) -> usize {
        self.generators.len() - self.compact_dim()
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// exp(sum c_i gen_i) . base_point
    pub fn point(&self, st: &Structure, coords: &RVec) -> CMat {
        let mut z = RVec::zeros(st.dim());
        for ((g, _), &c) in self.generators.iter().zip(coords.iter()) {
            z += g * c;
        }
        mat_exp(&st.expand(&z)) * &self.base_point
    }

    /// Validate commutation, compactness periods, and split conditions
    /// relative to the twisted involution at the base point.
    pub fn validate(&self, st: &Structure) -> Result<(), AtlasError> {
        let gens: Vec<CMat> = self.generators.iter().map(|(c, _)| st.expand(c)).collect();
        for (i, a) in gens.iter().enumerate() {
            for b in gens.iter().skip(i + 1) {
                let br = a * b - b * a;
                if mat_norm_inf(&br) > 1e3 * st.tol.eq {
                    return Err(AtlasError::InvalidChart(format!(
                        "generators {i} do not commute (residual {:.2e})",
                        mat_norm_inf(&br)
                    )));
                }
            }
        }
        for ((_, kind), g) in self.generators.iter().zip(gens.iter()) {
            if *kind == GenKind::Compact {
                let circle = mat_exp(&(g * C64::new(2.0 * PI, 0.0)));
                let r = mat_dist(&circle, &st.identity());
                if r > 1e4 * st.tol.eq {
                    return Err(AtlasError::InvalidChart(format!(
                        "compact generator does not close at period 2 pi (residual {r:.2e})"
                    )));
                }
            }
            // split condition at the base point: sigma(g) = -g, theta_u(g) = -g
            let rs = mat_norm_inf(&(st.sigma_alg(g) + g));
            let rt = mat_norm_inf(&(coset::theta_x_alg(st, &self.base_point, g) + g));
            if rs > 1e3 * st.tol.eq || rt > 1e3 * st.tol.eq {
                return Err(AtlasError::InvalidChart(format!(
                    "generator not split at base point (sigma {rs:.2e}, theta_u {rt:.2e})"
                )));
            }
        }
        Ok(())
    }
}

/// Reconstruct torus coordinates of a matrix lying on a compact chart based
/// at the identity: returns tau with chart.point(tau) = b, or None.
///
/// Uses the common eigenbasis of the commuting anti-Hermitian generators,
/// then a coarse grid plus Newton polish on the phase mismatch.
pub fn chart_log(st: &Structure, chart: &TorusChart, b: &CMat) -> Option<RVec> {
    let k = chart.compact_dim();
    if chart.split_dim() != 0 {
        return None;
    }
    if k == 0 {
        return if mat_dist(b, &chart.base_point) < 1e3 * st.tol.eq { Some(RVec::zeros(0)) } else { None };
    }
    let n = st.n();
    let gens: Vec<CMat> = chart.generators.iter().map(|(c, _)| st.expand(c)).collect();
    // generic commuting combination; i*Z is Hermitian for anti-Hermitian Z
    let mut z = CMat::zeros(n, n);
    for (j, g) in gens.iter().enumerate() {
        z += g * C64::new(1.0 + (j as f64 + 1.0).sqrt(), 0.0);
    }
    if mat_dist(&(z.adjoint()), &(-&z)) > 1e3 * st.tol.eq {
        return None; // only anti-Hermitian compact charts supported
    }
    let herm = &z * C64::new(0.0, 1.0);
    let (_, v) = crate::linalg::hermitian_eigen(&herm);
    let vh = v.adjoint();
    // eigenphase matrix: gen_k diagonalized as i * lambda_{j,k}
    let mut lambda = RMat::zeros(n, k);
    for (kk, g) in gens.iter().enumerate() {
        let d = &vh * g * &v;
        for j in 0..n {
            lambda[(j, kk)] = d[(j, j)].im;
        }
        // off-diagonal residual must vanish for a common eigenbasis
        let mut off = 0.0f64;
        for i in 0..n {
            for jj in 0..n {
                if i != jj {
                    off = off.max(d[(i, jj)].norm());
                }
            }
        }
        if off > 1e-6 {
            return None;
        }
    }
    let target = b * chart.base_point.clone().try_inverse()?;
    let d = &vh * &target * &v;
    let mut phases = Vec::with_capacity(n);
    for j in 0..n {
        if (d[(j, j)].norm() - 1.0).abs() > 1e-6 {
            return None;
        }
        phases.push(d[(j, j)]);
    }
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(d[(i, j)].norm());
            }
        }
    }
    if off > 1e-6 {
        return None;
    }

    // objective: sum_j |e^{i (Lambda tau)_j} - phase_j|^2
    let obj = |tau: &RVec| -> f64 {
        let lt = &lambda * tau;
        (0..n)
            .map(|j| {
                let e = C64::new(0.0, lt[j]).exp() - phases[j];
                e.norm_sqr()
            })
            .sum()
    };
    let steps_per_dim: usize = match k {
        1 => 256,
        2 => 128,
        3 => 48,
        4 => 24,
        _ => return None,
    };
    let mut best = (f64::INFINITY, RVec::zeros(k));
    let mut idx = vec![0usize; k];
    loop {
        let tau = RVec::from_iterator(k, idx.iter().map(|&i| 2.0 * PI * i as f64 / steps_per_dim as f64));
        let f = obj(&tau);
        if f < best.0 {
            best = (f, tau);
        }
        // advance mixed-radix counter
        let mut pos = 0;
        loop {
            if pos == k {
                break;
            }
            idx[pos] += 1;
            if idx[pos] < steps_per_dim {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }
    // Newton polish on the smooth objective
    let mut tau = best.1;
    for _ in 0..60 {
        let lt = &lambda * &tau;
        let mut grad = RVec::zeros(k);
        let mut hess = RMat::zeros(k, k);
        for j in 0..n {
            let e = C64::new(0.0, lt[j]).exp();
            let diff = e - phases[j];
            // d/dtau_k |e - p|^2 = 2 Re(conj(diff) * i lambda_jk e)
            for a in 0..k {
                grad[a] += 2.0 * (diff.conj() * C64::new(0.0, lambda[(j, a)]) * e).re;
                for bb in 0..k {
                    hess[(a, bb)] += 2.0
                        * ((C64::new(0.0, lambda[(j, bb)]) * e).conj()
                            * C64::new(0.0, lambda[(j, a)])
                            * e)
                            .re
                        + 2.0 * (diff.conj() * C64::new(-lambda[(j, a)] * lambda[(j, bb)], 0.0) * e).re;
                }
            }
        }
        if grad.norm() < 1e-14 {
            break;
        }
        let step = hess
            .clone()
            .lu()
            .solve(&grad)
            .unwrap_or_else(|| grad.clone() * 0.1);
        tau -= step;
    }
    for t in tau.iter_mut() {
        *t = t.rem_euclid(2.0 * PI);
    }
    let re = chart.point(st, &tau);
    if mat_dist(&re, b) < 1e4 * st.tol.eq {
        Some(tau)
    } else {
        None
    }
}

/// Affine action on compact chart coordinates: coords -> linear . coords +
/// translation (mod 2 pi), with an integer linear part.
#[derive(Debug, Clone, Serialize)]
pub struct ChartAction {
    pub linear: Vec<Vec<i64>>,
    pub translation: Vec<f64>,
}

impl ChartAction {
    pub fn identity(k: usize) -> ChartAction {
        ChartAction {
            linear: (0..k)
                .map(|i| (0..k).map(|j| i64::from(i == j)).collect())
                .collect(),
            translation: vec![0.0; k],
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, coords: &RVec) -> RVec {
        let k = self.dim();
        RVec::from_fn(k, |i, _| {
            let mut acc = self.translation[i];
            for j in 0..k {
                acc += self.linear[i][j] as f64 * coords[j];
            }
            acc
        })
    }

    pub fn compose(&self, rhs: &ChartAction) -> ChartAction {
        let k = self.dim();
        let mut linear = vec![vec![0i64; k]; k];
        let mut translation = self.translation.clone();
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    linear[i][j] += self.linear[i][l] * rhs.linear[l][j];
                }
            }
            for l in 0..k {
                translation[i] += self.linear[i][l] as f64 * rhs.translation[l];
            }
            translation[i] = translation[i].rem_euclid(2.0 * PI);
        }
        ChartAction { linear, translation }
    }

    pub fn is_identity(&self) -> bool {
        self.is_pure_translation()
            && self.translation.iter().all(|t| circle_dist(*t, 0.0) < 1e-7)
    }

    pub fn is_pure_translation(&self) -> bool {
        let k = self.dim();
        (0..k).all(|i| (0..k).all(|j| self.linear[i][j] == i64::from(i == j)))
    }

    /// dedup key: integer linear part plus translation rounded on the circle
    fn key(&self) -> (Vec<i64>, Vec<i64>) {
        let lin = self.linear.iter().flatten().copied().collect();
        let tr = self
            .translation
            .iter()
            .map(|t| {
                let m = (t / (2.0 * PI) * 1_000_000.0).round() as i64;
                m.rem_euclid(1_000_000)
            })
            .collect();
        (lin, tr)
    }
}

pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Debug, Clone)]
pub struct WeylElement {
    pub representative: CMat,
    pub action: ChartAction,
}

#[derive(Debug, Clone, Serialize)]
pub struct RejectedCandidate {
    pub index: usize,
    pub reason: String,
}

/// Finite group of torus symmetries, closed under composition at the level
/// of chart actions.
#[derive(Debug, Clone)]
pub struct WeylGroupTable {
    pub elements: Vec<WeylElement>,
    pub identity_index: usize,
    /// generation completed below the order bound, so the table is the full
    /// group generated by the accepted candidates
    pub closed: bool,
    pub rejected: Vec<RejectedCandidate>,
}

impl WeylGroupTable {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn trivial(k: usize, identity: CMat) -> WeylGroupTable {
        WeylGroupTable {
            elements: vec![WeylElement { representative: identity, action: ChartAction::identity(k) }],
            identity_index: 0,
            closed: true,
            rejected: Vec::new(),
        }
    }

    pub fn pure_translation_count(&self) -> usize {
        self.elements.iter().filter(|e| e.action.is_pure_translation()).count()
    }

    /// Number of distinct linear parts (the translation-quotient order).
    pub fn linear_part_count(&self) -> usize {
        let mut keys: Vec<Vec<i64>> = self
            .elements
            .iter()
            .map(|e| e.action.linear.iter().flatten().copied().collect())
            .collect();
        keys.sort();
        keys.dedup();
        keys.len()
    }

    /// True when every linear part is a signed permutation matrix.
    pub fn linear_parts_are_signed_permutations(&self) -> bool {
        self.elements.iter().all(|e| is_signed_permutation(&e.action.linear))
    }
}

pub fn is_signed_permutation(m: &[Vec<i64>]) -> bool {
    let k = m.len();
    let mut seen_col = vec![false; k];
    for row in m {
        let nz: Vec<usize> = (0..k).filter(|&j| row[j] != 0).collect();
        if nz.len() != 1 || row[nz[0]].abs() != 1 || seen_col[nz[0]] {
            return false;
        }
        seen_col[nz[0]] = true;
    }
    true
}

/// Generate the Weyl table from candidate matrices.
///
/// Accepted candidates must normalize the chart torus under conjugation and
/// satisfy the membership criterion beta(h) in A0 (the twisted normalizer
/// condition); their induced affine chart actions are closed under
/// composition with dedup by action.
pub fn weyl_generate(
    st: &Structure,
    candidates: &[CMat],
    chart: &TorusChart,
    max_order: usize,
    require_real_membership: bool,
) -> Result<WeylGroupTable, AtlasError> {
    let k = chart.dim();
    let mut rejected = Vec::new();
    let mut seeds: Vec<WeylElement> = Vec::new();

    for (index, h) in candidates.iter().enumerate() {
        // sigma-fixed (lies in the symmetric subgroup, possibly complexified)
        let rs = mat_dist(&st.sigma_grp(h), h);
        if rs > 1e4 * st.tol.eq {
            rejected.push(RejectedCandidate { index, reason: format!("not sigma-fixed ({rs:.2e})") });
            continue;
        }
        if require_real_membership {
            if let Err(e) = check_membership(&st.spec.membership, h, &st.tol) {
                rejected.push(RejectedCandidate { index, reason: format!("membership: {e}") });
                continue;
            }
        }
        match candidate_action(st, h, chart) {
            Ok(action) => seeds.push(WeylElement { representative: h.clone(), action }),
            Err(reason) => rejected.push(RejectedCandidate { index, reason }),
        }
    }

    let mut table: Vec<WeylElement> = vec![WeylElement {
        representative: st.identity(),
        action: ChartAction::identity(k),
    }];
    let mut keys: Vec<(Vec<i64>, Vec<i64>)> = vec![table[0].action.key()];

    let mut frontier: Vec<usize> = Vec::new();
    for e in seeds {
        let key = e.action.key();
        if !keys.contains(&key) {
            keys.push(key);
            table.push(e);
            frontier.push(table.len() - 1);
        }
    }
    // close under composition
    let mut progress = true;
    while progress {
        progress = false;
        let len = table.len();
        for i in 0..len {
            for j in 0..len {
                let action = table[i].action.compose(&table[j].action);
                let key = action.key();
                if !keys.contains(&key) {
                    if table.len() >= max_order {
                        return Err(AtlasError::NotClosed(max_order));
                    }
                    let representative = &table[i].representative * &table[j].representative;
                    keys.push(key);
                    table.push(WeylElement { representative, action });
                    progress = true;
                }
            }
        }
    }

    Ok(WeylGroupTable { elements: table, identity_index: 0, closed: true, rejected })
}

/// Chart action of one candidate: linear part from conjugation on the
/// generators, translation part from the chart coordinates of beta(h).
fn candidate_action(st: &Structure, h: &CMat, chart: &TorusChart) -> Result<ChartAction, String> {
    let k = chart.dim();
    let hi = h
        .clone()
        .try_inverse()
        .ok_or_else(|| "candidate not invertible".to_string())?;
    let gens: Vec<CMat> = chart.generators.iter().map(|(c, _)| st.expand(c)).collect();
    // Gram matrix of the generators (they need not be orthonormal)
    let mut gram = RMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = ip_frob(&gens[i], &gens[j]);
        }
    }
    let gram_inv = gram.clone().try_inverse().ok_or("degenerate generator Gram matrix")?;
    let mut linear = vec![vec![0i64; k]; k];
    for (j, g) in gens.iter().enumerate() {
        let img = h * g * &hi;
        let rhs = RVec::from_iterator(k, gens.iter().map(|b| ip_frob(&img, b)));
        let c = &gram_inv * rhs;
        let mut re = CMat::zeros(st.n(), st.n());
        for (l, gl) in gens.iter().enumerate() {
            re += gl * C64::new(c[l], 0.0);
        }
        let resid = mat_dist(&re, &img);
        if resid > 1e4 * st.tol.eq {
            return Err(format!("does not normalize the torus (residual {resid:.2e})"));
        }
        for i in 0..k {
            let r = c[i].round();
            if (c[i] - r).abs() > 1e-6 {
                return Err(format!("non-integral action entry {:.6}", c[i]));
            }
            linear[i][j] = r as i64;
        }
    }
    // beta(h) must land on the torus
    let th = st.theta_grp(h);
    let thi = th.try_inverse().ok_or("theta(h) singular")?;
    let bh = h * thi;
    let tau = chart_log(st, chart, &bh)
        .ok_or_else(|| "beta(h) does not lie on the torus".to_string())?;
    Ok(ChartAction { linear, translation: tau.iter().copied().collect() })
}

/// Greedy maximal commuting chart at a base point: first a maximal abelian
/// subspace of the compact split part, then of the noncompact split part of
/// its centralizer. Compact generators are rescaled to unit spectral radius.
pub fn max_split_torus(st: &Structure, u: &CMat, seed: u64) -> TorusChart {
    let dim = st.dim();
    let id = RMat::identity(dim, dim);
    let tx = st.theta_x_op(u);
    let stack3 = |third: &RMat| {
        let mut s = RMat::zeros(3 * dim, dim);
        s.view_mut((0, 0), (dim, dim)).copy_from(&(&tx + &id));
        s.view_mut((dim, 0), (dim, dim)).copy_from(&(&st.sigma_op + &id));
        s.view_mut((2 * dim, 0), (dim, dim)).copy_from(third);
        s
    };
    let compact_part = nullspace(&stack3(&(&st.delta_op - &id)), st.tol.rank);
    let noncompact_part = nullspace(&stack3(&(&st.delta_op + &id)), st.tol.rank);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens: Vec<(RVec, GenKind)> = Vec::new();
    let b0 = greedy_max_abelian(st, &compact_part, &[], &mut rng);
    for c in &b0 {
        // rescale so the spectral radius is 1: generic circle coordinates
        let m = st.expand(c);
        let rho = crate::linalg::spectral_radius(&m);
        let scaled = if rho > st.tol.rank { c / rho } else { c.clone() };
        gens.push((scaled, GenKind::Compact));
    }
    let picked: Vec<RVec> = b0;
    let b1 = greedy_max_abelian(st, &noncompact_part, &picked, &mut rng);
    for c in b1 {
        gens.push((c, GenKind::Split));
    }
    TorusChart { generators: gens, base_point: u.clone() }
}

/// Greedy maximal abelian subspace of span(space) whose elements commute
/// with `constraints`: pick a random element, pass to its centralizer,
/// repeat until the centralizer is exhausted.
fn greedy_max_abelian(
    st: &Structure,
    space: &[RVec],
    constraints: &[RVec],
    rng: &mut ChaCha8Rng,
) -> Vec<RVec> {
    let dim = st.dim();
    let mut picked: Vec<RVec> = Vec::new();
    loop {
        // current admissible subspace: within span(space), commuting with
        // constraints and with everything picked so far
        let commute_with: Vec<CMat> = constraints
            .iter()
            .chain(picked.iter())
            .map(|c| st.expand(c))
            .collect();
        let mut incl = RMat::zeros(dim, space.len());
        for (j, v) in space.iter().enumerate() {
            incl.set_column(j, v);
        }
        let space_mats: Vec<CMat> = space.iter().map(|c| st.expand(c)).collect();
        let mut admissible: Vec<RVec> = if commute_with.is_empty() {
            space.to_vec()
        } else {
            let mut stacked = RMat::zeros(dim * commute_with.len(), space.len());
            for (ci, cm) in commute_with.iter().enumerate() {
                for (j, sm) in space_mats.iter().enumerate() {
                    let br = cm * sm - sm * cm;
                    let coords = st.basis.coords(&br);
                    for i in 0..dim {
                        stacked[(ci * dim + i, j)] = coords[i];
                    }
                }
            }
            nullspace(&stacked, st.tol.rank)
                .into_iter()
                .map(|c| &incl * c)
                .collect()
        };
        // remove directions already in span(constraints) + span(picked)
        let mut spanned: Vec<RVec> = Vec::new();
        for c in constraints.iter().chain(picked.iter()) {
            let mut w = c.clone();
            for b in &spanned {
                let d = w.dot(b);
                w -= b * d;
            }
            let n = w.norm();
            if n > 1e-10 {
                spanned.push(w / n);
            }
        }
        for p in &spanned {
            for v in admissible.iter_mut() {
                let c = v.dot(p);
                *v -= p * c;
            }
        }
        admissible.retain(|v| v.norm() > 1e-8);
        if admissible.is_empty() {
            return picked;
        }
        let mut pick = RVec::zeros(dim);
        for v in &admissible {
            pick += v * (rng.random::<f64>() - 0.5);
        }
        let n = pick.norm();
        if n < 1e-12 {
            return picked;
        }
        pick /= n;
        // re-orthonormalize against picked
        for p in &picked {
            let c = pick.dot(p);
            pick -= p * c;
        }
        let n = pick.norm();
        if n < 1e-8 {
            return picked;
        }
        picked.push(pick / n);
    }
}

/// Rectangular coordinate domain with optional ordering constraint,
/// representing a fundamental domain of the Weyl action on the torus.
#[derive(Debug, Clone, Serialize)]
pub struct Domain {
    /// per-coordinate [lo, hi]; wrap = the full circle with hi excluded
    pub ranges: Vec<(f64, f64)>,
    pub wraps: Vec<bool>,
    /// require coords sorted ascending (fundamental domain of a swap group)
    pub ordered: bool,
}

/// Rule-based fundamental domain for tables whose linear parts are signed
/// permutations and whose translations are multiples of pi. Falls back to
/// the full torus when the table does not match that shape.
pub fn derive_domain(table: &WeylGroupTable, k: usize) -> Domain {
    let full = Domain {
        ranges: vec![(0.0, 2.0 * PI); k],
        wraps: vec![true; k],
        ordered: false,
    };
    if table.order() == 1 {
        return full;
    }
    if !table.linear_parts_are_signed_permutations() {
        return full;
    }
    // translations must be multiples of pi
    for e in &table.elements {
        for &t in &e.action.translation {
            let m = t / PI;
            if (m - m.round()).abs() > 1e-7 {
                return full;
            }
        }
    }
    let mut has_flip = vec![false; k]; // eta -> -eta on coordinate i, others fixed
    let mut has_flip_pi = vec![false; k]; // eta -> -eta + pi
    let mut swap_any = false;
    let mut diag_count = 0usize;
    for e in &table.elements {
        let a = &e.action;
        let diag = (0..k).all(|i| (0..k).all(|j| i == j || a.linear[i][j] == 0));
        if diag {
            diag_count += 1;
            for i in 0..k {
                if a.linear[i][i] == -1 {
                    let others_fixed = (0..k).all(|j| {
                        j == i
                            || (a.linear[j][j] == 1 && circle_dist(a.translation[j], 0.0) < 1e-7)
                    });
                    if others_fixed {
                        let t = a.translation[i].rem_euclid(2.0 * PI);
                        if circle_dist(t, 0.0) < 1e-7 {
                            has_flip[i] = true;
                        } else if circle_dist(t, PI) < 1e-7 {
                            has_flip_pi[i] = true;
                        }
                    }
                }
            }
        } else {
            swap_any = true;
        }
    }
    let _ = diag_count;
    let mut ranges = Vec::with_capacity(k);
    let mut wraps = Vec::with_capacity(k);
    for i in 0..k {
        let (r, w) = match (has_flip[i], has_flip_pi[i]) {
            (true, true) => ((0.0, PI / 2.0), false),
            (true, false) => ((0.0, PI), false),
            (false, true) => ((-PI / 2.0, PI / 2.0), false),
            (false, false) => ((0.0, 2.0 * PI), true),
        };
        ranges.push(r);
        wraps.push(w);
    }
    Domain { ranges, wraps, ordered: swap_any }
}

/// One stratum of the torus: a connected constant-isotropy-dimension set of
/// grid nodes.
#[derive(Debug, Clone)]
pub struct Stratum {
    pub id: usize,
    pub isotropy_dim: usize,
    /// manifold dimension inferred from the node cloud
    pub dim: usize,
    pub node_indices: Vec<usize>,
    pub representative: RVec,
    pub representative_mat: CMat,
    /// indices of configured component witnesses fixing the representative
    pub witness_fixers: Vec<usize>,
    /// wall bracket width after dyadic refinement (0 when no walls)
    pub wall_resolution: f64,
}

#[derive(Debug, Clone)]
pub struct StratumGrid {
    pub domain: Domain,
    pub grid_n: usize,
    pub nodes: Vec<RVec>,
    pub node_dims: Vec<usize>,
    pub strata: Vec<Stratum>,
}

fn grid_nodes(domain: &Domain, grid_n: usize, k: usize) -> (Vec<RVec>, Vec<Vec<usize>>) {
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let (lo, hi) = domain.ranges[i];
        let pts: Vec<f64> = if domain.wraps[i] {
            (0..grid_n).map(|j| lo + (hi - lo) * j as f64 / grid_n as f64).collect()
        } else {
            (0..grid_n)
                .map(|j| lo + (hi - lo) * j as f64 / (grid_n - 1) as f64)
                .collect()
        };
        axes.push(pts);
    }
    let mut nodes = Vec::new();
    let mut keys = Vec::new();
    let mut idx = vec![0usize; k];
    if k == 0 {
        nodes.push(RVec::zeros(0));
        keys.push(Vec::new());
        return (nodes, keys);
    }
    loop {
        if !domain.ordered || idx.windows(2).all(|w| w[0] <= w[1]) {
            nodes.push(RVec::from_iterator(k, idx.iter().enumerate().map(|(a, &i)| axes[a][i])));
            keys.push(idx.clone());
        }
        let mut pos = 0;
        loop {
            if pos == k {
                break;
            }
            idx[pos] += 1;
            if idx[pos] < grid_n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }
    (nodes, keys)
}

/// Stratify the torus by the isotropy-algebra dimension of the symmetric
/// subgroup, over a fundamental domain of the Weyl action.
pub fn stratify(
    st: &Structure,
    chart: &TorusChart,
    table: &WeylGroupTable,
    grid_n: usize,
    witnesses: &[CMat],
) -> StratumGrid {
    let k = chart.dim();
    let domain = derive_domain(table, k);
    let (nodes, keys) = grid_nodes(&domain, grid_n, k);
    let node_dims: Vec<usize> = nodes
        .par_iter()
        .map(|c| coset::isotropy_dim(st, &chart.point(st, c)))
        .collect();

    // adjacency: +-1 per coordinate in grid-key space with wrap
    let key_index: std::collections::HashMap<Vec<usize>, usize> =
        keys.iter().cloned().zip(0..).collect();
    let neighbors = |ki: usize| -> Vec<usize> {
        let key = &keys[ki];
        let mut out = Vec::new();
        let mut offs = vec![-1i64; k];
        if k == 0 {
            return out;
        }
        loop {
            if offs.iter().any(|&o| o != 0) {
                let mut nk = Vec::with_capacity(k);
                let mut ok = true;
                for i in 0..k {
                    let v = key[i] as i64 + offs[i];
                    let v = if domain.wraps[i] {
                        v.rem_euclid(grid_n as i64)
                    } else if v < 0 || v >= grid_n as i64 {
                        ok = false;
                        0
                    } else {
                        v
                    };
                    nk.push(v as usize);
                }
                if ok {
                    if let Some(&j) = key_index.get(&nk) {
                        out.push(j);
                    }
                }
            }
            let mut pos = 0;
            loop {
                if pos == k {
                    break;
                }
                offs[pos] += 1;
                if offs[pos] <= 1 {
                    break;
                }
                offs[pos] = -1;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
        out
    };

    // connected components of constant dimension
    let mut comp = vec![usize::MAX; nodes.len()];
    let mut n_comp = 0usize;
    for start in 0..nodes.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let d = node_dims[start];
        let mut stack = vec![start];
        comp[start] = n_comp;
        while let Some(i) = stack.pop() {
            for j in neighbors(i) {
                if comp[j] == usize::MAX && node_dims[j] == d {
                    comp[j] = n_comp;
                    stack.push(j);
                }
            }
        }
        n_comp += 1;
    }

    // distance-to-wall per node (grid BFS from nodes adjacent to other dims)
    let mut dist = vec![usize::MAX; nodes.len()];
    let mut queue = std::collections::VecDeque::new();
    for i in 0..nodes.len() {
        if neighbors(i).iter().any(|&j| node_dims[j] != node_dims[i]) {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for j in neighbors(i) {
            if dist[j] == usize::MAX && node_dims[j] == node_dims[i] {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }

    // dyadic wall refinement: bisect one representative wall pair per
    // stratum boundary, 4 levels
    let h_axis: Vec<f64> = (0..k)
        .map(|i| {
            let (lo, hi) = domain.ranges[i];
            if domain.wraps[i] {
                (hi - lo) / grid_n as f64
            } else {
                (hi - lo) / (grid_n - 1) as f64
            }
        })
        .collect();
    let wall_res = h_axis.iter().cloned().fold(0.0f64, f64::max) / 16.0;
    let mut refined = vec![false; n_comp];
    for i in 0..nodes.len() {
        if refined[comp[i]] {
            continue;
        }
        if let Some(&j) = neighbors(i).iter().find(|&&j| node_dims[j] != node_dims[i]) {
            let mut lo = nodes[i].clone();
            let mut hi = nodes[j].clone();
            let d_lo = node_dims[i];
            for _ in 0..4 {
                let mid = (&lo + &hi) * 0.5;
                let dm = coset::isotropy_dim(st, &chart.point(st, &mid));
                if dm == d_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            refined[comp[i]] = true;
        }
    }

    // assemble strata ordered by smallest node index
    let mut order: Vec<usize> = (0..n_comp).collect();
    let first_node: Vec<usize> = (0..n_comp)
        .map(|c| (0..nodes.len()).find(|&i| comp[i] == c).unwrap())
        .collect();
    order.sort_by_key(|&c| first_node[c]);

    let mut strata = Vec::with_capacity(n_comp);
    for (new_id, &c) in order.iter().enumerate() {
        let node_indices: Vec<usize> = (0..nodes.len()).filter(|&i| comp[i] == c).collect();
        // representative: farthest from walls, lexicographic tie-break
        let rep_i = *node_indices
            .iter()
            .max_by(|&&a, &&b| {
                let da = if dist[a] == usize::MAX { nodes.len() } else { dist[a] };
                let db = if dist[b] == usize::MAX { nodes.len() } else { dist[b] };
                da.cmp(&db).then_with(|| {
                    // prefer smaller coordinates
                    for t in 0..k {
                        let o = nodes[b][t].partial_cmp(&nodes[a][t]).unwrap();
                        if o != std::cmp::Ordering::Equal {
                            return o;
                        }
                    }
                    std::cmp::Ordering::Equal
                })
            })
            .unwrap();
        let representative = nodes[rep_i].clone();
        let representative_mat = chart.point(st, &representative);
        // stratum manifold dimension: rank of node displacements
        let dim = if node_indices.len() <= 1 {
            0
        } else {
            let mut disp = RMat::zeros(k, node_indices.len());
            for (col, &i) in node_indices.iter().enumerate() {
                let mut dvec = &nodes[i] - &representative;
                for t in 0..k {
                    if domain.wraps[t] {
                        // fold displacement to the shorter arc
                        let w = domain.ranges[t].1 - domain.ranges[t].0;
                        if dvec[t] > w / 2.0 {
                            dvec[t] -= w;
                        } else if dvec[t] < -w / 2.0 {
                            dvec[t] += w;
                        }
                    }
                }
                disp.set_column(col, &dvec);
            }
            let sv = disp.svd(false, false).singular_values;
            sv.iter().filter(|&&s| s > h_axis.iter().cloned().fold(0.0, f64::max) / 4.0).count()
        };
        let witness_fixers: Vec<usize> = witnesses
            .iter()
            .enumerate()
            .filter(|(_, w)| {
                let th = st.theta_grp(w);
                th.try_inverse()
                    .map(|thi| mat_dist(&(*w * &representative_mat * thi), &representative_mat) < 1e4 * st.tol.eq)
                    .unwrap_or(false)
            })
            .map(|(i, _)| i)
            .collect();
        strata.push(Stratum {
            id: new_id,
            isotropy_dim: node_dims[node_indices[0]],
            dim,
            node_indices,
            representative,
            representative_mat,
            witness_fixers,
            wall_resolution: wall_res,
        });
    }

    StratumGrid { domain, grid_n, nodes, node_dims, strata }
}

/// Partition of the full torus by the stabilizer subgroup of the table
/// action at each grid node; used to compare a Weyl-action stratification
/// against the isotropy stratification.
pub fn stratify_by_action(
    _st: &Structure,
    chart: &TorusChart,
    table: &WeylGroupTable,
    grid_n: usize,
) -> Vec<Vec<usize>> {
    let k = chart.dim();
    let full = Domain { ranges: vec![(0.0, 2.0 * PI); k], wraps: vec![true; k], ordered: false };
    let (nodes, keys) = grid_nodes(&full, grid_n, k);
    let masks: Vec<u64> = nodes
        .iter()
        .map(|c| {
            let mut m = 0u64;
            for (ei, e) in table.elements.iter().enumerate() {
                let img = e.action.apply(c);
                let fixed = (0..k).all(|i| circle_dist(img[i], c[i]) < 1e-7);
                if fixed {
                    m |= 1 << ei;
                }
            }
            m
        })
        .collect();
    // connected components of constant mask (same adjacency as stratify)
    let key_index: std::collections::HashMap<Vec<usize>, usize> =
        keys.iter().cloned().zip(0..).collect();
    let mut comp = vec![usize::MAX; nodes.len()];
    let mut n_comp = 0usize;
    for start in 0..nodes.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = n_comp;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let key = &keys[i];
            let mut offs = vec![-1i64; k];
            loop {
                if offs.iter().any(|&o| o != 0) {
                    let nk: Vec<usize> = (0..k)
                        .map(|t| (key[t] as i64 + offs[t]).rem_euclid(grid_n as i64) as usize)
                        .collect();
                    if let Some(&j) = key_index.get(&nk) {
                        if comp[j] == usize::MAX && masks[j] == masks[i] {
                            comp[j] = n_comp;
                            stack.push(j);
                        }
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == k {
                        break;
                    }
                    offs[pos] += 1;
                    if offs[pos] <= 1 {
                        break;
                    }
                    offs[pos] = -1;
                    pos += 1;
                }
                if pos == k {
                    break;
                }
            }
        }
        n_comp += 1;
    }
    let mut out = vec![Vec::new(); n_comp];
    for (i, &c) in comp.iter().enumerate() {
        out[c].push(i);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChamberKind {
    /// no constraint: the whole coordinate space
    Free,
    /// sign changes on every coordinate: each ray coordinate >= 1
    Quadrant,
    /// full signed permutations: 1 <= r_1 <= ... <= r_k
    SortedWedge,
    /// group exists but not of the recognized signed-permutation shapes
    Other,
}

#[derive(Debug, Clone, Serialize)]
pub struct Chamber {
    pub kind: ChamberKind,
    pub inequalities: Vec<String>,
}

/// Fundamental chamber of the little Weyl action on ray coordinates,
/// detected from the signed-permutation structure of the action matrices.
pub fn detect_chamber(actions: &[RMat], dim_t: usize) -> Chamber {
    if dim_t == 0 || actions.len() <= 1 {
        return Chamber { kind: ChamberKind::Free, inequalities: vec![] };
    }
    let to_int = |m: &RMat| -> Option<Vec<Vec<i64>>> {
        let mut out = vec![vec![0i64; dim_t]; dim_t];
        for i in 0..dim_t {
            for j in 0..dim_t {
                let r = m[(i, j)].round();
                if (m[(i, j)] - r).abs() > 1e-6 {
                    return None;
                }
                out[i][j] = r as i64;
            }
        }
        Some(out)
    };
    let ints: Option<Vec<_>> = actions.iter().map(to_int).collect();
    let Some(ints) = ints else {
        return Chamber { kind: ChamberKind::Other, inequalities: vec![] };
    };
    if !ints.iter().all(|m| is_signed_permutation(m)) {
        return Chamber { kind: ChamberKind::Other, inequalities: vec![] };
    }
    let full_order = (1..=dim_t as u64).product::<u64>() * (1u64 << dim_t);
    let sign_order = 1u64 << dim_t;
    let order = actions.len() as u64;
    if order == full_order {
        let ineq = (1..=dim_t)
            .map(|i| format!("r{i}"))
            .collect::<Vec<_>>()
            .join(" <= ");
        return Chamber { kind: ChamberKind::SortedWedge, inequalities: vec![format!("1 <= {ineq}")] };
    }
    // pure sign-change group: all diagonal
    let all_diag = ints
        .iter()
        .all(|m| (0..dim_t).all(|i| (0..dim_t).all(|j| i == j || m[i][j] == 0)));
    if all_diag && order == sign_order {
        return Chamber {
            kind: ChamberKind::Quadrant,
            inequalities: (1..=dim_t).map(|i| format!("r{i} >= 1")).collect(),
        };
    }
    if all_diag && dim_t == 1 && order == 2 {
        return Chamber { kind: ChamberKind::Quadrant, inequalities: vec!["r1 >= 1".into()] };
    }
    Chamber { kind: ChamberKind::Other, inequalities: vec![] }
}

/// Little Weyl group on the fiber torus: action matrices on the t-basis
/// with matrix representatives.
#[derive(Debug, Clone)]
pub struct LittleWeyl {
    pub representatives: Vec<CMat>,
    pub actions: Vec<RMat>,
    pub closed: bool,
}

impl LittleWeyl {
    pub fn order(&self) -> usize {
        self.actions.len()
    }
}

/// Fiber data over a base point: the noncompact slice, a maximal abelian
/// subspace of it, the little Weyl group, and the quotient chamber.
#[derive(Debug, Clone)]
pub struct FiberData {
    pub slice_noncompact_basis: Vec<RVec>,
    pub t_basis: Vec<RVec>,
    pub little_weyl: LittleWeyl,
    pub chamber: Chamber,
}

/// Compute fiber data at a base point. Hint matrices (from the config) are
/// accepted in order when they lie in the slice and commute with what is
/// already kept; the result is completed greedily and checked maximal.
pub fn fiber_at(
    st: &Structure,
    u: &CMat,
    hints: &[CMat],
    candidates: &[CMat],
    max_order: usize,
    seed: u64,
) -> Result<FiberData, AtlasError> {
    let slice = slice_noncompact_at(st, u);
    let dim = st.dim();
    let slice_sub = Subspace::from_basis(slice.clone(), dim);

    let mut t_mats: Vec<CMat> = Vec::new();
    let mut t_coords: Vec<RVec> = Vec::new();
    for h in hints {
        let c = st.basis.coords(h);
        let scale = 1.0 + c.norm();
        if !slice_sub.contains(&c, 1e3 * st.tol.eq / scale) {
            continue;
        }
        if t_mats.iter().any(|m| mat_norm_inf(&(m * h - h * m)) > 1e3 * st.tol.eq) {
            continue;
        }
        // skip hints already in the span
        let mut r = c.clone();
        for b in &t_coords {
            let d = r.dot(b) / b.dot(b);
            r -= b * d;
        }
        if r.norm() < 1e-8 * scale {
            continue;
        }
        let norm = c.norm();
        t_mats.push(h.clone());
        t_coords.push(c / norm);
    }
    // greedy completion inside the slice
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let completion = greedy_max_abelian(st, &slice, &t_coords, &mut rng);
    for c in completion {
        t_mats.push(st.expand(&c));
        t_coords.push(c);
    }
    // maximality: centralizer of t within the slice equals span(t)
    if !t_coords.is_empty() {
        let mut stacked = RMat::zeros(dim * t_mats.len(), slice.len());
        let slice_mats: Vec<CMat> = slice.iter().map(|c| st.expand(c)).collect();
        for (ci, cm) in t_mats.iter().enumerate() {
            for (j, sm) in slice_mats.iter().enumerate() {
                let br = cm * sm - sm * cm;
                let coords = st.basis.coords(&br);
                for i in 0..dim {
                    stacked[(ci * dim + i, j)] = coords[i];
                }
            }
        }
        let centralizer = nullspace(&stacked, st.tol.rank);
        if centralizer.len() != t_coords.len() {
            return Err(AtlasError::InvalidChart(format!(
                "maximal abelian check failed: centralizer dim {} vs t dim {}",
                centralizer.len(),
                t_coords.len()
            )));
        }
    }

    // little Weyl group from filtered candidates; actions are computed on
    // the normalized t basis
    let k = t_coords.len();
    let t_basis_mats: Vec<CMat> = t_coords.iter().map(|c| st.expand(c)).collect();
    let mut reps: Vec<CMat> = vec![st.identity()];
    let mut actions: Vec<RMat> = vec![RMat::identity(k.max(1), k.max(1))];
    if k > 0 {
        let mut gram = RMat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = t_coords[i].dot(&t_coords[j]);
            }
        }
        let gram_inv = gram.try_inverse().expect("t basis independent");
        let mut seeds: Vec<(CMat, RMat)> = Vec::new();
        for h in candidates {
            // must be sigma-fixed, compact (unitary), and fix the base point
            if mat_dist(&st.sigma_grp(h), h) > 1e4 * st.tol.eq {
                continue;
            }
            if mat_dist(&(h * h.adjoint()), &st.identity()) > 1e4 * st.tol.eq {
                continue;
            }
            let th = st.theta_grp(h);
            let Some(thi) = th.try_inverse() else { continue };
            if mat_dist(&(h * u * thi), u) > 1e4 * st.tol.eq {
                continue;
            }
            // conjugation action on span(t)
            let Some(hi) = h.clone().try_inverse() else { continue };
            let mut a = RMat::zeros(k, k);
            let mut ok = true;
            for (j, tm) in t_basis_mats.iter().enumerate() {
                let img = h * tm * &hi;
                let imgc = st.basis.coords(&img);
                let rhs = RVec::from_iterator(k, t_coords.iter().map(|b| imgc.dot(b)));
                let c = &gram_inv * rhs;
                let mut re = RVec::zeros(dim);
                for (l, b) in t_coords.iter().enumerate() {
                    re += b * c[l];
                }
                if (&re - &imgc).norm() > 1e-6 * (1.0 + imgc.norm()) {
                    ok = false;
                    break;
                }
                a.set_column(j, &c);
            }
            if ok {
                seeds.push((h.clone(), a));
            }
        }
        let key = |a: &RMat| -> Vec<i64> {
            a.iter().map(|x| (x * 1e6).round() as i64).collect()
        };
        let mut keys: Vec<Vec<i64>> = vec![key(&actions[0])];
        for (h, a) in seeds {
            let kk = key(&a);
            if !keys.contains(&kk) {
                keys.push(kk);
                reps.push(h);
                actions.push(a);
            }
        }
        let mut progress = true;
        while progress {
            progress = false;
            let len = actions.len();
            for i in 0..len {
                for j in 0..len {
                    let a = &actions[i] * &actions[j];
                    let kk = key(&a);
                    if !keys.contains(&kk) {
                        if actions.len() >= max_order {
                            return Err(AtlasError::NotClosed(max_order));
                        }
                        let r = &reps[i] * &reps[j];
                        keys.push(kk);
                        actions.push(a);
                        reps.push(r);
                        progress = true;
                    }
                }
            }
        }
    }
    let chamber = detect_chamber(&actions, k);
    Ok(FiberData {
        slice_noncompact_basis: slice,
        t_basis: t_coords,
        little_weyl: LittleWeyl { representatives: reps, actions, closed: true },
        chamber,
    })
}

/// Result of an equivalence test between standard translated tori.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    /// equivalent via the table element at this index
    Equivalent(usize),
    /// the table is closed, so absence of a matching element is conclusive
    Inequivalent,
    /// the table was not verified closed; absence is not conclusive
    NotFoundWithinTable,
}

/// A standard translated torus emitted by the minimal-collection algorithm:
/// compact directions span a subtorus of the reference torus (in chart
/// coordinates) and split directions exponentiate the fiber.
#[derive(Debug, Clone)]
pub struct StandardTorus {
    pub chart: TorusChart,
    /// integer compact directions in reference-chart coordinates
    pub compact_dirs: Vec<Vec<i64>>,
    /// base point in reference-chart coordinates
    pub base_coords: RVec,
    /// id of the stratum this torus was built from
    pub stratum_id: usize,
}

/// Test whether the compact parts with translates match under some Weyl
/// element: w . (base_1 + span_1) = base_2 + span_2 modulo 2 pi.
pub fn equivalence_test(
    t1: &StandardTorus,
    t2: &StandardTorus,
    table: &WeylGroupTable,
) -> Equivalence {
    let k = t1.base_coords.len();
    let span_mat = |dirs: &[Vec<i64>]| -> RMat {
        let mut m = RMat::zeros(k, dirs.len().max(1));
        for (j, d) in dirs.iter().enumerate() {
            for i in 0..k {
                m[(i, j)] = d[i] as f64;
            }
        }
        m
    };
    let s2 = span_mat(&t2.compact_dirs);
    let p2 = if t2.compact_dirs.is_empty() {
        RMat::zeros(k, k)
    } else {
        // projector onto span via pseudo-inverse
        let g = s2.transpose() * &s2;
        match g.try_inverse() {
            Some(gi) => &s2 * gi * s2.transpose(),
            None => RMat::zeros(k, k),
        }
    };
    for (ei, e) in table.elements.iter().enumerate() {
        // linear part as a real matrix
        let mut lin = RMat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                lin[(i, j)] = e.action.linear[i][j] as f64;
            }
        }
        // spans must match
        let s1w = &lin * span_mat(&t1.compact_dirs);
        let mut spans_match = true;
        if t1.compact_dirs.len() != t2.compact_dirs.len() {
            spans_match = false;
        } else {
            for j in 0..t1.compact_dirs.len() {
                let col = s1w.column(j).into_owned();
                if (&col - &p2 * &col).norm() > 1e-7 * (1.0 + col.norm()) {
                    spans_match = false;
                    break;
                }
            }
        }
        if !spans_match {
            continue;
        }
        // translate match modulo span + 2 pi lattice
        let img = e.action.apply(&t1.base_coords);
        let mut v = &img - &t2.base_coords;
        for _ in 0..4 {
            for i in 0..k {
                v[i] -= 2.0 * PI * (v[i] / (2.0 * PI)).round();
            }
            let proj = &p2 * &v;
            v -= proj;
        }
        if v.norm() < 1e-6 {
            return Equivalence::Equivalent(ei);
        }
    }
    if table.closed {
        Equivalence::Inequivalent
    } else {
        Equivalence::NotFoundWithinTable
    }
}

/// A full atlas of the quotient: the reference torus, its Weyl table, the
/// strata with fiber data, and the minimal collection of translated tori.
#[derive(Debug, Clone)]
pub struct QuotientAtlas {
    pub a0: TorusChart,
    pub weyl: WeylGroupTable,
    pub grid: StratumGrid,
    pub fibers: Vec<FiberData>,
    pub minimal_tori: Vec<StandardTorus>,
    /// stratum id -> Some(index into minimal_tori) or None when sub-maximal
    pub coverage: Vec<Option<usize>>,
    pub quotient_dim: usize,
}

/// Integer tangent directions of a stratum at its representative, read off
/// from the node displacements divided by the grid step.
fn stratum_directions(grid: &StratumGrid, s: &Stratum, k: usize) -> Vec<Vec<i64>> {
    if s.dim == 0 || k == 0 {
        return Vec::new();
    }
    let h: Vec<f64> = (0..k)
        .map(|i| {
            let (lo, hi) = grid.domain.ranges[i];
            if grid.domain.wraps[i] {
                (hi - lo) / grid.grid_n as f64
            } else {
                (hi - lo) / (grid.grid_n - 1) as f64
            }
        })
        .collect();
    let mut dirs: Vec<Vec<i64>> = Vec::new();
    let mut have = RMat::zeros(k, 0);
    for &ni in &s.node_indices {
        let mut d = &grid.nodes[ni] - &s.representative;
        for i in 0..k {
            let (lo, hi) = grid.domain.ranges[i];
            if grid.domain.wraps[i] {
                let w = hi - lo;
                if d[i] > w / 2.0 {
                    d[i] -= w;
                } else if d[i] < -w / 2.0 {
                    d[i] += w;
                }
            }
        }
        let steps: Vec<f64> = (0..k).map(|i| d[i] / h[i]).collect();
        if steps.iter().all(|s| (s - s.round()).abs() < 1e-6) {
            let ints: Vec<i64> = steps.iter().map(|s| s.round() as i64).collect();
            let g = ints.iter().fold(0i64, |a, &b| gcd(a, b.abs()));
            if g > 0 {
                let prim: Vec<i64> = ints.iter().map(|v| v / g).collect();
                // linear independence over what we have
                let cand = RVec::from_iterator(k, prim.iter().map(|&v| v as f64));
                let mut resid = cand.clone();
                for j in 0..have.ncols() {
                    let col = have.column(j).into_owned();
                    let c = resid.dot(&col) / col.dot(&col);
                    resid -= col * c;
                }
                if resid.norm() > 1e-6 {
                    dirs.push(prim.clone());
                    let nc = have.ncols();
                    have = have.insert_column(nc, 0.0);
                    have.set_column(nc, &cand);
                    if dirs.len() == s.dim {
                        break;
                    }
                }
            }
        }
    }
    dirs
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Build the minimal collection: per stratum, when dim t + dim S equals the
/// quotient dimension, emit the standard torus generated by the stratum
/// directions (compact part) and the fiber torus (split part); then dedup
/// equivalent charts through the Weyl table.
#[allow(clippy::too_many_arguments)]
pub fn minimal_collection(
    st: &Structure,
    a0: &TorusChart,
    table: &WeylGroupTable,
    grid: &StratumGrid,
    fibers: &[FiberData],
    quotient_dim: usize,
) -> Result<(Vec<StandardTorus>, Vec<Option<usize>>), AtlasError> {
    let k = a0.dim();
    let mut emitted: Vec<StandardTorus> = Vec::new();
    let mut emitted_by_stratum: Vec<Option<usize>> = vec![None; grid.strata.len()];

    for (si, s) in grid.strata.iter().enumerate() {
        let fiber = &fibers[si];
        let dim_t = fiber.t_basis.len();
        if dim_t + s.dim != quotient_dim {
            continue;
        }
        let dirs = stratum_directions(grid, s, k);
        if dirs.len() != s.dim {
            return Err(AtlasError::InvalidChart(format!(
                "stratum {si}: found {} independent directions, expected {}",
                dirs.len(),
                s.dim
            )));
        }
        let mut gens: Vec<(RVec, GenKind)> = Vec::new();
        for d in &dirs {
            let mut c = RVec::zeros(st.dim());
            for (j, (g, _)) in a0.generators.iter().enumerate() {
                c += g * d[j] as f64;
            }
            gens.push((c, GenKind::Compact));
        }
        for tvec in &fiber.t_basis {
            gens.push((tvec.clone(), GenKind::Split));
        }
        let chart = TorusChart { generators: gens, base_point: s.representative_mat.clone() };
        chart.validate(st)?;
        // standardness: compact generators lie in the span of the reference
        // torus algebra by construction (integer combinations)
        let torus = StandardTorus {
            chart,
            compact_dirs: dirs,
            base_coords: s.representative.clone(),
            stratum_id: si,
        };
        emitted_by_stratum[si] = Some(emitted.len());
        emitted.push(torus);
    }

    // dedup by equivalence, keeping the lowest stratum id
    let mut keep: Vec<bool> = vec![true; emitted.len()];
    for i in 0..emitted.len() {
        if !keep[i] {
            continue;
        }
        for j in (i + 1)..emitted.len() {
            if !keep[j] {
                continue;
            }
            if let Equivalence::Equivalent(_) = equivalence_test(&emitted[j], &emitted[i], table) {
                keep[j] = false;
                // strata covered by j now point at i
                for cov in emitted_by_stratum.iter_mut() {
                    if *cov == Some(j) {
                        *cov = Some(i);
                    }
                }
            }
        }
    }
    let mut final_tori = Vec::new();
    let mut remap = vec![usize::MAX; emitted.len()];
    for (i, t) in emitted.into_iter().enumerate() {
        if keep[i] {
            remap[i] = final_tori.len();
            final_tori.push(t);
        }
    }
    let coverage: Vec<Option<usize>> = emitted_by_stratum
        .into_iter()
        .map(|o| o.map(|i| remap[i]))
        .collect();
    Ok((final_tori, coverage))
}

/// Assemble the full atlas for a configured structure.
pub fn build_atlas(
    st: &Structure,
    a0: TorusChart,
    weyl_candidates: &[CMat],
    fiber_hints: &[CMat],
    fiber_candidates: &[CMat],
    witnesses: &[CMat],
    grid_n: usize,
    max_order: usize,
    seed: u64,
) -> Result<QuotientAtlas, AtlasError> {
    a0.validate(st)?;
    let weyl = weyl_generate(st, weyl_candidates, &a0, max_order, true)?;
    let grid = stratify(st, &a0, &weyl, grid_n, witnesses);
    let fibers: Vec<FiberData> = grid
        .strata
        .iter()
        .map(|s| fiber_at(st, &s.representative_mat, fiber_hints, fiber_candidates, max_order, seed))
        .collect::<Result<_, _>>()?;
    let quotient_dim = max_split_torus(st, &st.identity(), seed).dim();
    let (minimal_tori, coverage) =
        minimal_collection(st, &a0, &weyl, &grid, &fibers, quotient_dim)?;
    Ok(QuotientAtlas { a0, weyl, grid, fibers, minimal_tori, coverage, quotient_dim })
}
