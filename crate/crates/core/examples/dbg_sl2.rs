use hgk_core::atlas::{self, GenKind, TorusChart};
use hgk_core::fixtures;

fn main() {
    let cfg = fixtures::bundled_config("sl2").unwrap();
    let st = cfg.structure().unwrap();
    let gens = cfg.a0_generator_coords(&st).unwrap();
    let chart = TorusChart {
        generators: gens.into_iter().map(|g| (g, GenKind::Compact)).collect(),
        base_point: st.identity(),
    };
    let weyl = cfg.mats(&cfg.file.candidates.weyl).unwrap();
    let hints = cfg.mats(&cfg.file.torus.fiber_t_hints).unwrap();
    let fiber = cfg.mats(&cfg.file.candidates.fiber).unwrap();
    let wit = cfg.mats(&cfg.file.candidates.component_witnesses).unwrap();
    let atlas = atlas::build_atlas(&st, chart, &weyl, &hints, &fiber, &wit, 64, 1024, 1).unwrap();
    for (s, f) in atlas.grid.strata.iter().zip(atlas.fibers.iter()) {
        println!(
            "stratum {}: d={} dim={} nodes={} rep={:?} | slice={} t={} weyl={} chamber={:?}",
            s.id, s.isotropy_dim, s.dim, s.node_indices.len(),
            s.representative.iter().copied().collect::<Vec<f64>>(),
            f.slice_noncompact_basis.len(), f.t_basis.len(), f.little_weyl.order(), f.chamber.kind
        );
    }
    for t in &atlas.minimal_tori {
        println!("torus from stratum {}: compact={} split={}", t.stratum_id, t.chart.compact_dim(), t.chart.split_dim());
    }
}
