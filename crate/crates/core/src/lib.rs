pub mod bench;
pub mod clusterer;
pub mod dbscan;
pub mod geo;
pub mod model;
pub mod pipeline;
pub mod solver;
