//! Flow-line constructions on smooth planar fields.

pub mod curve;
pub mod factor;
pub mod field;
pub mod stream;

pub use curve::{integrate_curve, Stop};
pub use factor::{factorize, Cutoff, FactorCheck, FactorizeOptions, FlowDecomposition, Node};
pub use field::{transverse_flow_pair, Bump, BumpField, Cones, PairParams, SmoothField, TransverseFlowPair};
pub use stream::{stream_function, stream_value, StreamFunction};
pub mod partition;
pub use partition::{build_partition, piecewise_approx, Partition, PiecewiseApprox, Region, Window};
pub mod goodset;
pub use goodset::{good_set, key_property, GoodSetMask, KeyPropertyReport};
pub mod split;
pub use split::{
    check_complement, check_complement_bis, check_complement_lattice, flow_box, FlowBox, check_g_est, elementary_lemma, f_min_split, sample_strip, FMinSplit, StripSamples,
};
pub mod corpus;
pub use corpus::{flow_case, raster_pair, rasterize, run_suite, seeded_pair, FlowCase, SuiteOptions, SuiteResult};
