//! Library for experiments with words in a pair of parameterized rotations:
//! quaternion word evaluation and derivatives, reduced-word combinatorics,
//! exact integer trigonometric polynomials, resultant elimination down to a
//! univariate certificate, sublevel-set measure estimation, and exhaustive
//! minimum-distance search.

pub mod elim;
pub mod measure;
pub mod quat;
pub mod search;
pub mod trigpoly;
pub mod word;

pub use quat::{Angles, UnitQuaternion};
pub use word::Word;
