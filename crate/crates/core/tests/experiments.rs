use tipsel_core::experiments::{heatmap_for_layout, Experiment, HeatmapParams};
use tipsel_core::network::{full_node_positions, Placement};

#[test]
fn decentralized_rates_track_the_adversary_ratio() {
    let r = Experiment::Decentralized
        .run_default(
            11,
            &[("n_values", "50,100,200"), ("m_values", "1,3,5"), ("p_values", "0.1,0.33"), ("transactions", "10000")],
        )
        .unwrap();
    for n in [50, 100, 200] {
        for m in [1, 3, 5] {
            let l = format!("N={n} M={m} p=0.1");
            assert!((r.value(&l, "analytic").unwrap() - 0.1).abs() < 1e-15, "{l}");
            let emp = r.row(&l, "empirical").unwrap();
            assert!((emp.value - 0.1).abs() < 0.01, "{l}: {}", emp.value);
        }
    }
    // C = round(0.33 N): 17/50, 33/100, 66/200.
    assert_eq!(r.value("N=50 M=3 p=0.33", "analytic"), Some(17.0 / 50.0));
    assert_eq!(r.value("N=100 M=3 p=0.33", "analytic"), Some(0.33));
    assert_eq!(r.value("N=200 M=5 p=0.33", "analytic"), Some(0.33));
    assert_eq!(r.value("summary", "all_within_tolerance"), Some(1.0));
}

#[test]
fn heatmap_estimates_are_stable_under_sample_doubling() {
    let positions = full_node_positions(&Placement::UniformRandom, 50, 10.0, 3).unwrap();
    let base = HeatmapParams::default();
    let a = heatmap_for_layout(&positions, &base, 8, None).unwrap();
    let b = heatmap_for_layout(&positions, &HeatmapParams { samples: 2000, ..base }, 8, None).unwrap();
    for cell in 0..a.cells() {
        let (Some(pa), Some(pb)) = (a.probability(cell), b.probability(cell)) else { continue };
        let se = a.std_error(cell).unwrap().hypot(b.std_error(cell).unwrap());
        assert!((pa - pb).abs() < 2.0 * se + 1e-12, "cell {cell}: {pa} vs {pb}");
    }
}

#[test]
fn evenly_filled_grid_has_flat_probabilities() {
    // 81 lattice points put exactly nine full nodes in every cell.
    let positions = full_node_positions(&Placement::UniformGrid, 81, 10.0, 0).unwrap();
    let params = HeatmapParams { adversaries: 8, require_adversary_in_cell: false, ..HeatmapParams::default() };
    let h = heatmap_for_layout(&positions, &params, 4, None).unwrap();
    assert_eq!(h.node_counts, vec![9; 9]);
    assert_eq!(h.layout_variance(), 0.0);
    let ratio = 8.0 / 81.0;
    let (lo, hi) = (h.min_probability().unwrap(), h.max_probability().unwrap());
    assert!((lo - ratio).abs() < 0.05 && (hi - ratio).abs() < 0.05, "[{lo}, {hi}]");
}

#[test]
fn variance_study_reports_every_run_and_both_readings() {
    let r = Experiment::Variance.run_default(5, &[("runs", "12"), ("samples", "300")]).unwrap();
    let runs = r.rows.iter().filter(|row| row.label.starts_with("run=") && row.metric == "variance").count();
    assert_eq!(runs, 12);
    for metric in ["min_probability", "max_probability", "sparsest_cell_probability"] {
        let rho = r.value(&format!("variance_vs={metric}"), "spearman_rho").unwrap();
        assert!((-1.0..=1.0).contains(&rho));
    }
    assert!(r.value("summary", "max_sparse_excess").unwrap() >= r.value("summary", "min_sparse_excess").unwrap());
}

#[test]
fn mitigations_table_mirrors_the_resistance_column() {
    let r = Experiment::Mitigations.run_default(17, &[("transactions", "20000")]).unwrap();
    assert_eq!(r.value("scenario=scaling", "full_nodes"), Some(1001.0));
    assert_eq!(r.value("scenario=direct", "link_rate"), Some(0.0));
    assert_eq!(r.value("scenario=proxy", "deanonymization_rate"), Some(0.0));
    assert_eq!(r.value("scenario=proxy", "anonymity_degree"), Some(1.0));
    assert_eq!(r.value("scenario=baseline", "anonymity_degree"), Some(0.0));
    let base = r.row("scenario=baseline", "link_rate").unwrap();
    assert!((base.value - 0.1).abs() < 4.0 * base.dispersion.unwrap());
}

#[test]
fn unknown_experiment_names_are_rejected() {
    let err = "sideways".parse::<Experiment>().unwrap_err();
    assert!(err.contains("decentralized"));
    for e in Experiment::ALL {
        assert_eq!(e.name().parse::<Experiment>(), Ok(e));
    }
}
