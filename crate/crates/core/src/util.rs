//! Small shared helpers: canonical JSON, stable hashing, answer text
//! normalization.

/// FNV-1a 64-bit hash, hex-encoded. Stable across platforms and runs.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Compact canonical JSON of any serializable value. Object keys come out
/// sorted because `serde_json::Map` is ordered.
pub fn canonical_json<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value must serialize");
    sorted_value(&v).to_string()
}

fn sorted_value(v: &serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(map) => {
            let mut sorted: Vec<(&String, &serde_json::Value)> = map.iter().collect();
            sorted.sort_by_key(|(k, _)| k.as_str());
            serde_json::Value::Object(
                sorted.into_iter().map(|(k, val)| (k.clone(), sorted_value(val))).collect(),
            )
        }
        serde_json::Value::Array(items) => {
            serde_json::Value::Array(items.iter().map(sorted_value).collect())
        }
        other => other.clone(),
    }
}

/// Stable content hash of a serializable value.
pub fn stable_hash<T: serde::Serialize>(value: &T) -> String {
    fnv1a_hex(canonical_json(value).as_bytes())
}

/// Normalize an answer for comparison: lowercase, punctuation stripped,
/// whitespace collapsed, leading yes/no phrases reduced to the bare word.
pub fn normalize_answer(text: &str) -> String {
    let lowered: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '_' { c } else { ' ' })
        .collect();
    let collapsed = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    match collapsed.split(' ').next() {
        Some("yes") => "yes".to_string(),
        Some("no") => "no".to_string(),
        _ => collapsed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn fnv_is_stable() {
        assert_eq!(fnv1a_hex(b""), "cbf29ce484222325");
        assert_eq!(fnv1a_hex(b"a"), "af63dc4c8601ec8c");
        assert_eq!(fnv1a_hex(b"hello"), "a430d84680aabd0b");
    }

    #[test]
    fn canonical_json_sorts_keys_recursively() {
        let v = json!({"b": 1, "a": {"d": [ {"z": 0, "y": 1} ], "c": 2}});
        assert_eq!(canonical_json(&v), r#"{"a":{"c":2,"d":[{"y":1,"z":0}]},"b":1}"#);
    }

    #[test]
    fn normalization_handles_phrasing() {
        assert_eq!(normalize_answer("Yes."), "yes");
        assert_eq!(normalize_answer(" NO!!"), "no");
        assert_eq!(normalize_answer("Yes, it is."), "yes");
        assert_eq!(normalize_answer("Coffee   Machine"), "coffee machine");
        assert_eq!(normalize_answer("unknown"), "unknown");
    }
}
