//! E-polynomials of stratified varieties.
//!
//! - [`poly`]: bivariate integer polynomials.
//! - [`hodge`]: Hodge diamonds, sign conventions, Betti numbers from pure
//!   E-polynomials.
//! - [`spaces`]: cut-and-paste expressions and their evaluation.
//! - [`strat`]: semismall maps and intersection E-polynomials.
//! - [`dsl`]: the `.sx` language.
//! - [`genus2`]: the bundled genus-2 suites and their audit.
//! - [`cli`]: the `epoly` command.
//!
//! ```
//! use epoly::spaces::{eval_space, SpaceExpr};
//! use epoly::hodge::SignConvention;
//!
//! let k = eval_space(&SpaceExpr::KummerQuot(2), SignConvention::Signed).unwrap();
//! assert_eq!(k.to_string(), "u^2*v^2 + u^2 + 4*u*v + v^2 + 1");
//! ```

pub mod cli;
pub mod dsl;
pub mod genus2;
pub mod hodge;
pub mod poly;
pub mod spaces;
pub mod strat;

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    struct Intro;
    #[doc = include_str!("../../../book/src/polynomials.md")]
    struct Polynomials;
    #[doc = include_str!("../../../book/src/diamonds.md")]
    struct Diamonds;
    #[doc = include_str!("../../../book/src/spaces.md")]
    struct Spaces;
    #[doc = include_str!("../../../book/src/decomposition.md")]
    struct Decomposition;
    #[doc = include_str!("../../../book/src/dsl.md")]
    struct Dsl;
    #[doc = include_str!("../../../book/src/audit.md")]
    struct Audit;
}
