pub mod ff;
pub mod cyclo;
pub mod mat;
pub mod grp;
pub mod model;
pub mod checks;
pub mod pairing;
pub mod app;
