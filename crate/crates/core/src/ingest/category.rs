use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::IngestError;

/// Benchmark vulnerability category, the join key shared by report and ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    PathTraversal,
    Hash,
    TrustBoundary,
    Crypto,
    CommandInjection,
    SqlInjection,
    WeakRandom,
    LdapInjection,
    Xss,
    SecureCookie,
    XpathInjection,
}

impl Category {
    pub const ALL: [Category; 11] = [
        Category::PathTraversal,
        Category::Hash,
        Category::TrustBoundary,
        Category::Crypto,
        Category::CommandInjection,
        Category::SqlInjection,
        Category::WeakRandom,
        Category::LdapInjection,
        Category::Xss,
        Category::SecureCookie,
        Category::XpathInjection,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Category::PathTraversal => "pathtraver",
            Category::Hash => "hash",
            Category::TrustBoundary => "trustbound",
            Category::Crypto => "crypto",
            Category::CommandInjection => "cmdi",
            Category::SqlInjection => "sqli",
            Category::WeakRandom => "weakrand",
            Category::LdapInjection => "ldapi",
            Category::Xss => "xss",
            Category::SecureCookie => "securecookie",
            Category::XpathInjection => "xpathi",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCategory(pub String);

impl fmt::Display for UnknownCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown category code `{}`", self.0)
    }
}

impl std::error::Error for UnknownCategory {}

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.code() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

const BUNDLED_TYPE_MAP: &str = include_str!("../../data/type_map.tsv");

/// Maps scanner bug type codes (e.g. `SQL_INJECTION_JDBC`) to categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeMap {
    entries: BTreeMap<String, Category>,
}

impl TypeMap {
    /// The table shipped in `data/type_map.tsv`.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TYPE_MAP).expect("bundled type map is valid")
    }

    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(ty), Some(cat), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(IngestError::TypeMap {
                    line: i + 1,
                    message: "expected `<TYPE> <category>`".into(),
                });
            };
            let cat = cat.parse::<Category>().map_err(|e| IngestError::TypeMap {
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.insert(ty.to_string(), cat);
        }
        Ok(TypeMap { entries })
    }

    pub fn category(&self, vuln_type: &str) -> Option<Category> {
        self.entries.get(vuln_type).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for TypeMap {
    fn default() -> Self {
        Self::bundled()
    }
}
