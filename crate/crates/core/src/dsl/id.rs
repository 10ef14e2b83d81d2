//! Container identifiers.
//!
//! An id is a dash-separated path rooted at `0`. Every further segment is
//! either a non-negative integer (a concrete container) or a single lowercase
//! letter (a template container standing for repeated instances).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::IdError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Index(u32),
    Template(char),
}

impl Segment {
    fn parse(s: &str) -> Option<Segment> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_lowercase() => Some(Segment::Template(c)),
            _ if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => {
                if s.len() > 1 && s.starts_with('0') {
                    return None;
                }
                s.parse().ok().map(Segment::Index)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Index(i) => write!(f, "{i}"),
            Segment::Template(c) => write!(f, "{c}"),
        }
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Segment::Index(a), Segment::Index(b)) => a.cmp(b),
            (Segment::Template(a), Segment::Template(b)) => a.cmp(b),
            (Segment::Index(_), Segment::Template(_)) => Ordering::Less,
            (Segment::Template(_), Segment::Index(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Identifier of one container, e.g. `0-1-2` or `0-a-0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContainerId {
    segments: Vec<Segment>,
}

impl ContainerId {
    pub fn root() -> Self {
        ContainerId { segments: vec![Segment::Index(0)] }
    }

    pub fn parse(s: &str) -> Result<Self, IdError> {
        let segments = s
            .split('-')
            .map(|part| Segment::parse(part).ok_or_else(|| IdError::Malformed(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if segments.first() != Some(&Segment::Index(0)) {
            return Err(IdError::NotRooted(s.to_string()));
        }
        Ok(ContainerId { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_root(&self) -> bool {
        self.segments.len() == 1
    }

    pub fn depth(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn last(&self) -> &Segment {
        self.segments.last().expect("ids are never empty")
    }

    /// Template ids end in a letter segment.
    pub fn is_template(&self) -> bool {
        matches!(self.last(), Segment::Template(_))
    }

    pub fn template_letter(&self) -> Option<char> {
        match self.last() {
            Segment::Template(c) => Some(*c),
            Segment::Index(_) => None,
        }
    }

    pub fn parent(&self) -> Option<ContainerId> {
        if self.is_root() {
            return None;
        }
        Some(ContainerId { segments: self.segments[..self.segments.len() - 1].to_vec() })
    }

    pub fn child(&self, segment: Segment) -> ContainerId {
        let mut segments = self.segments.clone();
        segments.push(segment);
        ContainerId { segments }
    }

    pub fn is_parent_of(&self, other: &ContainerId) -> bool {
        other.segments.len() == self.segments.len() + 1 && other.segments.starts_with(&self.segments)
    }

    /// True for `self` itself and every id below it.
    pub fn contains(&self, other: &ContainerId) -> bool {
        other.segments.starts_with(&self.segments)
    }

    /// Replaces the prefix `from` with `to`; `None` when `from` is not a prefix.
    pub fn rebase(&self, from: &ContainerId, to: &ContainerId) -> Option<ContainerId> {
        if !from.contains(self) {
            return None;
        }
        let mut segments = to.segments.clone();
        segments.extend_from_slice(&self.segments[from.segments.len()..]);
        Some(ContainerId { segments })
    }

    /// Ancestors from the root down to the parent, excluding `self`.
    pub fn ancestors(&self) -> impl Iterator<Item = ContainerId> + '_ {
        (1..self.segments.len()).map(|n| ContainerId { segments: self.segments[..n].to_vec() })
    }
}

impl Ord for ContainerId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.segments.cmp(&other.segments)
    }
}

impl PartialOrd for ContainerId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ContainerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{seg}")?;
        }
        Ok(())
    }
}

impl FromStr for ContainerId {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ContainerId::parse(s)
    }
}

impl Serialize for ContainerId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ContainerId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ContainerId::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A container id qualified with template instance indices, written with
/// bracketed indices on template segments: `0-a[2]-0` is leaf `0-a-0` inside
/// the third instance of template `0-a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScopedId {
    pub id: ContainerId,
    /// One index per template segment of `id`, outermost first. May be
    /// shorter than the number of template segments (unscoped tail).
    pub instances: Vec<usize>,
}

impl ScopedId {
    pub fn unscoped(id: ContainerId) -> Self {
        ScopedId { id, instances: Vec::new() }
    }

    pub fn parse(s: &str) -> Result<Self, IdError> {
        let mut plain = Vec::new();
        let mut instances = Vec::new();
        for part in s.split('-') {
            match part.split_once('[') {
                Some((seg, rest)) => {
                    let idx = rest
                        .strip_suffix(']')
                        .and_then(|n| n.parse::<usize>().ok())
                        .ok_or_else(|| IdError::Malformed(s.to_string()))?;
                    let is_letter = seg.len() == 1 && seg.as_bytes()[0].is_ascii_lowercase();
                    if !is_letter || instances.len() != template_count(&plain) {
                        return Err(IdError::Malformed(s.to_string()));
                    }
                    plain.push(seg.to_string());
                    instances.push(idx);
                }
                None => plain.push(part.to_string()),
            }
        }
        let id = ContainerId::parse(&plain.join("-"))?;
        Ok(ScopedId { id, instances })
    }

    /// The same id keeping only the first `n` instance indices.
    pub fn with_instances(&self, n: usize) -> ScopedId {
        ScopedId { id: self.id.clone(), instances: self.instances[..n.min(self.instances.len())].to_vec() }
    }
}

fn template_count(plain: &[String]) -> usize {
    plain.iter().filter(|p| p.len() == 1 && p.as_bytes()[0].is_ascii_lowercase()).count()
}

impl fmt::Display for ScopedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut inst = self.instances.iter();
        for (i, seg) in self.id.segments().iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{seg}")?;
            if matches!(seg, Segment::Template(_)) {
                if let Some(k) = inst.next() {
                    write!(f, "[{k}]")?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for ScopedId {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScopedId::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_and_template_ids() {
        let id = ContainerId::parse("0-a-1").unwrap();
        assert_eq!(id.to_string(), "0-a-1");
        assert!(!id.is_template());
        assert!(id.parent().unwrap().is_template());
        assert_eq!(id.parent().unwrap().template_letter(), Some('a'));
    }

    #[test]
    fn rejects_bad_ids() {
        assert!(ContainerId::parse("").is_err());
        assert!(ContainerId::parse("1-0").is_err());
        assert!(ContainerId::parse("0--1").is_err());
        assert!(ContainerId::parse("0-ab").is_err());
        assert!(ContainerId::parse("0-A").is_err());
        assert!(ContainerId::parse("0-01").is_err());
    }

    #[test]
    fn orders_numerically_then_letters() {
        let mut ids: Vec<ContainerId> =
            ["0-10", "0-a", "0-2", "0", "0-2-1"].iter().map(|s| s.parse().unwrap()).collect();
        ids.sort();
        let shown: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        assert_eq!(shown, ["0", "0-2", "0-2-1", "0-10", "0-a"]);
    }

    #[test]
    fn rebase_moves_subtree() {
        let id: ContainerId = "0-1-0".parse().unwrap();
        let from: ContainerId = "0-1".parse().unwrap();
        let to: ContainerId = "0-3".parse().unwrap();
        assert_eq!(id.rebase(&from, &to).unwrap().to_string(), "0-3-0");
        assert!(to.rebase(&from, &to).is_none());
    }

    #[test]
    fn scoped_ids_round_trip() {
        let s: ScopedId = "0-a[2]-0".parse().unwrap();
        assert_eq!(s.id.to_string(), "0-a-0");
        assert_eq!(s.instances, vec![2]);
        assert_eq!(s.to_string(), "0-a[2]-0");
        assert!(ScopedId::parse("0-1[2]").is_err());
        let plain: ScopedId = "0-a-0".parse().unwrap();
        assert!(plain.instances.is_empty());
    }
}
