use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph_stream::Vertex;

/// A walk `(v_0, v_1, ..., v_L)`; its length in steps is `len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Walk(pub Vec<Vertex>);

impl Walk {
    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn steps(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn start(&self) -> Option<Vertex> {
        self.0.first().copied()
    }

    /// Consecutive `(v_{i-1}, v_i)` pairs.
    pub fn transitions(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

impl Borrow<[Vertex]> for Walk {
    fn borrow(&self) -> &[Vertex] {
        &self.0
    }
}

impl From<Vec<Vertex>> for Walk {
    fn from(v: Vec<Vertex>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Walk {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_ascii_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(Walk)
    }
}

impl Serialize for Walk {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Walk {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let w = Walk(vec![0, 1, 2, 0]);
        assert_eq!(w.to_string(), "0 1 2 0");
        assert_eq!("0 1 2 0".parse::<Walk>().unwrap(), w);
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"0 1 2 0\"");
        assert_eq!(w.steps(), 3);
        assert_eq!(w.transitions().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 0)]);
    }
}
