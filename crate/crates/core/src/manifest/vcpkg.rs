//! `vcpkg.json`: the `dependencies` array, strings or `{"name": ...}` objects.

use serde_json::Value;

use super::DeclSink;

pub(crate) fn parse(content: &str, sink: &mut DeclSink) -> Result<(), String> {
    let root: Value = serde_json::from_str(content).map_err(|e| format!("invalid JSON: {e}"))?;
    let Value::Object(map) = root else {
        return Err("top-level value is not an object".to_string());
    };
    let deps = match map.get("dependencies") {
        None => return Ok(()),
        Some(Value::Array(deps)) => deps,
        Some(_) => return Err("`dependencies` is not an array".to_string()),
    };
    let anchor = content.find("\"dependencies\"").unwrap_or(0);
    let mut cursor = anchor;
    for dep in deps {
        let name = match dep {
            Value::String(s) => s.as_str(),
            Value::Object(obj) => match obj.get("name") {
                Some(Value::String(s)) => s.as_str(),
                _ => continue,
            },
            _ => continue,
        };
        let needle = format!("\"{name}\"");
        let pos = content[cursor..]
            .find(&needle)
            .map(|p| p + cursor)
            .or_else(|| content[anchor..].find(&needle).map(|p| p + anchor))
            .unwrap_or(anchor);
        cursor = pos.max(cursor);
        let line = content[..pos].matches('\n').count() + 1;
        sink.push(name, "dependencies", line);
    }
    Ok(())
}
