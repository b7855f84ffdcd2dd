use thiserror::Error;

/// Errors raised while building or querying fractal chain structures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse rational from {0:?}")]
    RationalParse(String),

    #[error("cannot parse word from {0:?}")]
    WordParse(String),

    #[error("invalid word: letter {letter} outside alphabet 1..={alphabet}")]
    InvalidLetter { letter: u8, alphabet: usize },

    #[error("invalid scheme: {0}")]
    InvalidSpec(String),

    #[error("invalid mass distribution: {0}")]
    InvalidMasses(String),

    #[error("invalid equivalence rule: {0}")]
    InvalidRule(String),

    #[error("exact mode required: {0}")]
    ExactModeRequired(&'static str),

    #[error("q fast path refused: assumption (B2) fails at word {word} (depth {depth})")]
    B2Refused { word: String, depth: usize },

    #[error("kernel bridge refused: {0}")]
    BridgeRefused(String),

    #[error("chain tables built to depth {built}, request needs depth {needed}")]
    DepthExceeded { built: usize, needed: usize },

    #[error("empty pair list")]
    EmptyPairList,
}
