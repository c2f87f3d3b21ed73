//! Piecewise-affine maps on `[0,1)` built by cutting and stacking, their
//! bijective discretisations on the `N`-point lattice, and the spectral
//! analysis of the induced torus quantisations.
//!
//! The pipeline runs in five layers:
//!
//! 1. [`cutstack`] — exact-rational stacks, stage programs, and the shipped
//!    map builders (interval exchanges, rotation towers, a two-component
//!    map, a finite-stage full-shift model).
//! 2. [`discretize`] — internal orbit segments on the lattice `D_N`, gluing
//!    policies that close them into periodic orbits, the approximation
//!    quality `δ_N`, and the stage schedule `n(N)`.
//! 3. [`qmap`] — the quantised unitary `U_N` as a phase permutation, and its
//!    complete spectrum in closed form from the orbit decomposition.
//! 4. [`weyl`] — translation operators, Weyl quantisation of trigonometric
//!    polynomials, traces, Egorov defects, and the ergodicity variance.
//! 5. [`qlimits`] — orbit measures, distances to target invariant measures,
//!    orbit-density accounting, and the sweep experiment harness.
//!
//! [`hilbert`] holds the state space `H_N`, [`skew`] the observable algebra
//! on the torus, [`measure`] the target-measure descriptors, and [`dense`]
//! the small dense-matrix oracle used to pin conventions and verify spectra.

pub mod cutstack;
pub mod dense;
pub mod discretize;
pub mod error;
pub mod hilbert;
pub mod measure;
pub mod qlimits;
pub mod qmap;
pub mod skew;
pub mod util;
pub mod weyl;

pub use cutstack::{
    build_full_shift_program, build_iet, build_two_component, cut_stack, rotation_towers,
    stack_onto, ClassicalMap, CutStackProgram, FamilyMap, IetMap, IetSpec, IntervalQ, Stack,
    StackFamily, TwoComponentMap,
};
pub use dense::CMat;
pub use discretize::{
    ApproxSchedule,
    delta_n, epsilon_n, glue, good_stacks, internal_segments, min_lattice_count, schedule_n_of_n,
    BlendParams, BlendReport, DeltaReport, DiscreteMap, GlueOutcome, GluingPolicy, Provenance,
    SegmentIndex,
};
pub use error::{Error, Result};
pub use hilbert::{gaussian_state, inner_product, phase_e_n, PhaseRational, StateVector};
pub use measure::{kolmogorov, wasserstein1, MeasureTarget};
pub use qlimits::{
    density_report, measure_distance, orbit_measure, run_qlimit_experiment,
    run_qlimit_experiment_threads, wasserstein_distance, BuiltMap, DensityReport,
    ExperimentConfig, ExperimentReport, MapSpec, ObservableSpec, OrbitMeasure, PolicySpec,
    SelectionCount, SelectionSpec, TargetSpec,
};
pub use qmap::{
    apply_u, apply_u_adjoint, dense_matrix, eigenpairs_for_orbit, for_each_eigenpair,
    full_spectrum, orbit_action, orbit_decompose, write_spectrum_csv, EigenPair,
    OrbitDecomposition, UnitaryMap,
};
pub use skew::{
    bump_observable, eval_f, pullback_f1, pullback_f1_inv, BumpReport, FourierObservable,
    TorusPoint,
};
pub use weyl::{
    apply_op, apply_translation, egorov_defect, expectation, expectation_orbit, op_dense,
    op_trace, qe_variance, qe_variance_spectrum, write_matrix_elements_csv, EgorovReport,
    TranslationIndex,
};
