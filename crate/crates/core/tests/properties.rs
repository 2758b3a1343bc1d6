use onecopy_core::asymptotics::DEFAULT_SATURATION_EPS;
use onecopy_core::{
    classify_criticality, fit_log, geometric_grid, saturation_test, scan, ModelSpec, Quantity, DEFAULT_ABS_TOL,
};

const FLAT_SLOPE: f64 = 0.005;

fn gapped() -> Vec<ModelSpec> {
    vec![
        ModelSpec::xx(0.5).unwrap(),
        ModelSpec::xy(0.5, 0.5).unwrap(),
        ModelSpec::xy(1.5, 1.0).unwrap(),
        ModelSpec::xy(2.0, 0.5).unwrap(),
        ModelSpec::custom(vec![-1.0, 0.2, 0.1], vec![-0.2, 0.05]).unwrap(),
    ]
}

#[test]
fn flat_top_octave_means_saturated() {
    let grid = geometric_grid(32, 512, 2).unwrap();
    for model in gapped() {
        assert!(!classify_criticality(&model, 1e-10).unwrap().critical, "{model:?}");
        let series = scan(&model, &grid, DEFAULT_ABS_TOL).unwrap();
        for q in [Quantity::E1Cont, Quantity::Entropy] {
            let top = fit_log(&series, q, (256, 512)).unwrap();
            assert!(top.slope.abs() < FLAT_SLOPE, "{model:?} {q:?}: slope {}", top.slope);
            assert!(saturation_test(&series, q, DEFAULT_SATURATION_EPS).unwrap(), "{model:?} {q:?}");
        }
    }
}

#[test]
fn critical_chains_do_not_saturate() {
    let grid = geometric_grid(32, 512, 2).unwrap();
    for model in [ModelSpec::xx(2.0).unwrap(), ModelSpec::ising()] {
        let series = scan(&model, &grid, DEFAULT_ABS_TOL).unwrap();
        assert!(series.critical);
        assert!(!saturation_test(&series, Quantity::Entropy, DEFAULT_SATURATION_EPS).unwrap());
        let fit = fit_log(&series, Quantity::Entropy, (32, 512)).unwrap();
        assert!(fit.slope > 0.1, "{model:?}: {}", fit.slope);
    }
}

#[test]
fn scan_rows_agree_with_single_reports() {
    let model = ModelSpec::xy(0.5, 0.5).unwrap();
    let series = scan(&model, &[5, 17, 40], DEFAULT_ABS_TOL).unwrap();
    for row in &series.rows {
        let r = onecopy_core::report(&model, row.block_len, &Default::default()).unwrap();
        assert_eq!(r.e1_bits, row.e1_bits);
        assert!((r.entropy_bits - row.entropy_bits).abs() < 1e-12);
        assert!((r.e1_cont_bits - row.e1_cont_bits).abs() < 1e-12);
    }
}
