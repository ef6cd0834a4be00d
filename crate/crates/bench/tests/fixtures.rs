use critnls_bench::{gaussian, ground_state, reference_spec, variational_grid};

#[test]
fn fixtures_are_usable() {
    let spec = reference_spec();
    assert_eq!(spec.dim(), 5);
    let g = variational_grid();
    let u = gaussian(&g, 1.0);
    assert_eq!(u.values().len(), g.len());
    let gs = ground_state();
    assert!(gs.m_omega > 0.0);
}
