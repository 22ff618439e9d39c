//! Serde helper storing dense vectors as `(index, value)` pairs around a fill value.
//!
//! Means of sparse data are mostly zero and floored variances mostly equal
//! the floor, so each vector records its most common value once and lists
//! the rest.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct PackedVec {
    dim: usize,
    fill: f64,
    entries: Vec<(usize, f64)>,
}

impl PackedVec {
    fn pack(v: &[f64]) -> Self {
        let mut freq: BTreeMap<u64, usize> = BTreeMap::new();
        for x in v {
            *freq.entry(x.to_bits()).or_default() += 1;
        }
        // Most frequent bit pattern; ties go to the smallest pattern.
        let fill_bits = freq
            .iter()
            .fold(
                (0u64, 0usize),
                |best, (&bits, &n)| if n > best.1 { (bits, n) } else { best },
            )
            .0;
        let fill = f64::from_bits(fill_bits);
        let entries = v
            .iter()
            .enumerate()
            .filter(|(_, x)| x.to_bits() != fill_bits)
            .map(|(j, &x)| (j, x))
            .collect();
        PackedVec {
            dim: v.len(),
            fill,
            entries,
        }
    }

    fn unpack(self) -> Result<Vec<f64>, String> {
        let mut v = vec![self.fill; self.dim];
        for (j, x) in self.entries {
            *v.get_mut(j)
                .ok_or_else(|| format!("index {j} out of range for dim {}", self.dim))? = x;
        }
        Ok(v)
    }
}

pub(crate) fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
    let packed: Vec<PackedVec> = rows.iter().map(|r| PackedVec::pack(r)).collect();
    packed.serialize(s)
}

pub(crate) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
    let packed = Vec::<PackedVec>::deserialize(d)?;
    packed
        .into_iter()
        .map(|p| p.unpack().map_err(serde::de::Error::custom))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder(#[serde(with = "super")] Vec<Vec<f64>>);

    proptest! {
        #[test]
        fn round_trips_exactly(rows in proptest::collection::vec(
            proptest::collection::vec(prop_oneof![Just(0.0), Just(1e-6), -1e3f64..1e3], 0..30), 0..5)
        ) {
            let h = Holder(rows);
            let text = serde_json::to_string(&h).unwrap();
            let back: Holder = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, h);
        }
    }

    #[test]
    fn sparse_vectors_store_few_entries() {
        let text = serde_json::to_string(&Holder(vec![vec![0.0, 0.0, 0.5, 0.0]])).unwrap();
        assert_eq!(text, r#"[{"dim":4,"fill":0.0,"entries":[[2,0.5]]}]"#);
    }
}
