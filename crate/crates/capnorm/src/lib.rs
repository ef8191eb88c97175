//! Capitulation of p-class groups in cyclic p-extensions, decided with exact
//! arithmetic.

pub mod heuristics;
pub mod ingest;
pub mod linalg;
mod modarith;
pub mod normpoly;
pub mod padic;
pub mod pmodule;
pub mod tower;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/valuations.md")]
    mod valuations {}
    #[doc = include_str!("../../../book/src/norm-polynomial.md")]
    mod norm_polynomial {}
    #[doc = include_str!("../../../book/src/modules.md")]
    mod modules {}
    #[doc = include_str!("../../../book/src/transcripts.md")]
    mod transcripts {}
    #[doc = include_str!("../../../book/src/towers.md")]
    mod towers {}
    #[doc = include_str!("../../../book/src/heuristics.md")]
    mod heuristics {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
}
