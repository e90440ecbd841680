use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// `Config` covers malformed parameters caught before any computation,
/// `Domain` covers arguments outside an operation's mathematical domain,
/// and `Resource` covers guards on combinatorial blowup.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
