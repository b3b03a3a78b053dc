//! Higher arithmetic intersection pairings of higher Chow cycles on Spec F
//! for imaginary quadratic F, computed from explicit cubical cycles.

pub mod cubical;
pub mod field;
pub mod mp;
pub mod parse;
pub mod polylog;
pub mod deligne;
pub mod quadrature;
pub mod regulator;
pub mod k2;
pub mod pairing;
pub mod cli;
