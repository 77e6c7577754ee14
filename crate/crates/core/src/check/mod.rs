//! Type checkers for both languages.
//!
//! Both checkers are syntax directed: exactly one rule applies to each
//! constructor, and each successful check returns a derivation tree that
//! can be dumped with `Display`.

pub mod source;
pub mod target;

use core::fmt;

/// Indentation helper for derivation dumps.
pub(crate) struct Indent(pub usize);

impl fmt::Display for Indent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.0 {
            f.write_str("  ")?;
        }
        Ok(())
    }
}

pub(crate) fn write_set<'a, T: fmt::Display + 'a>(
    f: &mut fmt::Formatter<'_>,
    items: impl IntoIterator<Item = &'a T>,
) -> fmt::Result {
    f.write_str("{")?;
    for (i, x) in items.into_iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("}")
}
