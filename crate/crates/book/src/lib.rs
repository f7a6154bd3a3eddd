//! The guide in `book/` is plain mdbook, which cannot run listings that
//! depend on workspace crates. Each chapter is included here as module
//! documentation so `cargo test --doc` compiles and runs every snippet.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub mod $name {}
    };
}

chapter!(introduction, "introduction.md");
chapter!(payload, "payload.md");
chapter!(carriers, "carriers.md");
chapter!(phase, "phase.md");
chapter!(magnitude, "magnitude.md");
chapter!(verification, "verification.md");
chapter!(attacks, "attacks.md");
chapter!(benchmark, "benchmark.md");
chapter!(cli, "cli.md");
