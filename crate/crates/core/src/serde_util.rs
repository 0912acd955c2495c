//! Small serde helpers shared across record types.

/// Serialize a `u128` as a decimal string. JSON numbers lose precision past
/// 2^53 and several downstream consumers read amounts as strings anyway.
pub mod u128_string {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse::<u128>()
            .map_err(|_| de::Error::custom(format!("invalid u128 amount {raw:?}")))
    }
}

/// `BTreeMap<String, u128>` with stringified values, same rationale.
pub mod u128_map {
    use std::collections::BTreeMap;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, u128>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k, v.to_string())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, u128>, D::Error> {
        let raw = BTreeMap::<String, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                let parsed = v
                    .parse::<u128>()
                    .map_err(|_| de::Error::custom(format!("invalid u128 amount {v:?}")))?;
                Ok((k, parsed))
            })
            .collect()
    }
}
