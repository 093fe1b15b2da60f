//! Computation of p-adic L-functions of even Dirichlet characters.
//!
//! The library builds Iwasawa power-series approximations of L_p(chi, s)
//! from Stickelberger-type level sums, validates them against an exact
//! generalized-Bernoulli interpolation oracle, and analyzes their zeroes
//! through Weierstrass preparation, Newton polygons and Hensel lifting.
//! On top of that sit the verdict routines for the non-vanishing,
//! simple-roots, Gross order-of-vanishing and mu = 0 statements, Sinnott's
//! lambda formula, and the lambda statistics model.

pub mod arith;
pub mod bern;
pub mod conj;
pub mod dirichlet;
pub mod error;
pub mod fp;
pub mod iwasawa;
pub mod newton;
pub mod pipeline;
pub mod ring;
pub mod roots;
pub mod series;
pub mod snf;
pub mod weier;
pub mod zpoly;

pub use dirichlet::{ConjugacyClass, DirichletCharacter, UnitGroup, ZChar};
pub use error::{Error, Result};
pub use iwasawa::{GSeries, HPoly, LSetup};
pub use newton::{NewtonPolygon, Segment, TruncationInference};
pub use ring::{CyclotomicData, PadicElement, Ring, Val};
pub use roots::RootCertificate;
pub use series::SeriesApprox;
pub use weier::WeierstrassData;
