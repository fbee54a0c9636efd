//! Year-keyed maps that survive buffered deserialization, where integer map
//! keys arrive as strings.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::de::Error;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(map: &BTreeMap<i32, f64>, s: S) -> Result<S::Ok, S::Error> {
    map.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<i32, f64>, D::Error> {
    BTreeMap::<String, f64>::deserialize(d)?
        .into_iter()
        .map(|(k, v)| {
            k.parse()
                .map(|year| (year, v))
                .map_err(|_| D::Error::custom(alloc::format!("year key {k:?} is not an integer")))
        })
        .collect()
}
