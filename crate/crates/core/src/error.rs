use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// An item index does not exist in an `items`-item market.
    #[error("item {item} out of range for a market with {items} items")]
    ItemOutOfRange { item: usize, items: usize },

    /// Structurally invalid input (negative weights, mismatched lengths, ...).
    #[error("malformed input: {0}")]
    Malformed(String),

    /// A probability distribution that does not describe a valid prior.
    #[error("invalid prior for buyer {buyer}: {reason}")]
    InvalidPrior { buyer: usize, reason: String },

    /// An exhaustive search would exceed its configured size.
    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    /// The valuation class cannot answer the requested oracle query.
    #[error("{oracle} oracle is not available for {variant} valuations")]
    WrongOracle {
        oracle: &'static str,
        variant: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn capacity(what: &'static str, needed: u128, limit: u128) -> Self {
        Error::Capacity {
            what,
            needed,
            limit,
        }
    }
}
