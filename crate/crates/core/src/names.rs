//! Identifiers shared by both languages.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

/// Prefix reserved for generated names. The source parser rejects it.
pub const RESERVED_PREFIX: char = '%';

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(s: impl AsRef<str>) -> Self {
                $name(Arc::from(s.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            /// True for names produced by [`FreshNames`] or the simulators.
            pub fn is_reserved(&self) -> bool {
                self.0.starts_with(RESERVED_PREFIX) || self.0.starts_with('$')
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", &self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(Arc::from(s))
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

name_type!(
    /// A qubit variable.
    Var
);
name_type!(
    /// A qubit index: either a coupling-graph node or a quantified index
    /// variable of a target function type.
    Qidx
);
name_type!(
    /// A function name.
    FunName
);

/// 1-based line/column of a syntax node. `Span::default()` means "unknown"
/// (nodes built programmatically).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub const fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }

    pub fn is_known(&self) -> bool {
        self.line != 0
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Generator of names that cannot clash with parsed source names.
///
/// Each pass owns its own generator so that output is reproducible.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    vars: usize,
    qidxs: usize,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self) -> Var {
        let v = Var::from(format!("%v{}", self.vars));
        self.vars += 1;
        v
    }

    pub fn qidx(&mut self) -> Qidx {
        let q = Qidx::from(format!("%q{}", self.qidxs));
        self.qidxs += 1;
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_names_are_reserved_and_distinct() {
        let mut fresh = FreshNames::new();
        let a = fresh.var();
        let b = fresh.var();
        assert_ne!(a, b);
        assert!(a.is_reserved());
        assert_eq!(fresh.qidx().as_str(), "%q0");
        assert!(!Var::from("x").is_reserved());
    }
}
