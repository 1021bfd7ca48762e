use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Strictly increasing positions into a parent set of size `n`.
///
/// Stored 0-based; serialized 1-based as `{"n": .., "indices": [..]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexVector {
    indices: Vec<usize>,
    n: usize,
}

impl IndexVector {
    pub fn empty(n: usize) -> Self {
        Self { indices: Vec::new(), n }
    }

    /// Sorts and checks that the indices are distinct and below `n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self, String> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err("duplicate index".into());
        }
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(format!("index out of range for n = {n}"));
        }
        Ok(Self { indices, n })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn parent_size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n - self.indices.len());
        let mut it = self.indices.iter().peekable();
        for i in 0..self.n {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        out
    }

    pub(crate) fn insert_all(&mut self, new: &[usize]) {
        self.indices.extend_from_slice(new);
        self.indices.sort_unstable();
        debug_assert!(self.indices.windows(2).all(|w| w[0] < w[1]));
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    n: usize,
    indices: Vec<usize>,
}

impl Serialize for IndexVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            n: self.n,
            indices: self.indices.iter().map(|i| i + 1).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        if w.indices.contains(&0) {
            return Err(serde::de::Error::custom("indices are 1-based"));
        }
        IndexVector::new(w.indices.iter().map(|i| i - 1).collect(), w.n)
            .map_err(serde::de::Error::custom)
    }
}
