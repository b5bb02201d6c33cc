pub mod bundle;
pub mod dsl;
pub mod dvs;
pub mod error;
pub mod linalg;
pub mod metric;
pub mod pwpoly;
pub mod rat;
pub mod upoly;
pub mod verdict;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/orthant-polynomials.md")]
    pub struct OrthantPolynomials;
    #[doc = include_str!("../../../book/src/spaces.md")]
    pub struct Spaces;
    #[doc = include_str!("../../../book/src/bundles.md")]
    pub struct Bundles;
    #[doc = include_str!("../../../book/src/gluing.md")]
    pub struct Gluing;
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub struct Metrics;
    #[doc = include_str!("../../../book/src/documents.md")]
    pub struct Documents;
}
