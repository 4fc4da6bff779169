//! Every example runs to completion at a reduced size.

#[path = "../examples/predict_ladder.rs"]
mod predict_ladder;
#[path = "../examples/stationary_point.rs"]
mod stationary_point;
#[path = "../examples/spiral_locus.rs"]
mod spiral_locus;
#[path = "../examples/eigenvector_profile.rs"]
mod eigenvector_profile;
#[path = "../examples/compare_spectra.rs"]
mod compare_spectra;
#[path = "../examples/bulk_edge.rs"]
mod bulk_edge;
#[path = "../examples/cavity_density.rs"]
mod cavity_density;
#[path = "../examples/poisson_atoms.rs"]
mod poisson_atoms;
#[path = "../examples/coarse_grain.rs"]
mod coarse_grain;
#[path = "../examples/special_values.rs"]
mod special_values;
#[path = "../examples/sample_graph.rs"]
mod sample_graph;

macro_rules! example {
    ($name:ident, $n:expr) => {
        #[test]
        fn $name() {
            $name::run($n).unwrap();
        }
    };
}

example!(predict_ladder, 10_000);
example!(stationary_point, 0);
example!(spiral_locus, 1_000);
example!(eigenvector_profile, 2_000);
example!(compare_spectra, 256);
example!(bulk_edge, 128);
example!(cavity_density, 128);
example!(poisson_atoms, 128);
example!(coarse_grain, 100);
example!(special_values, 0);
example!(sample_graph, 200);
