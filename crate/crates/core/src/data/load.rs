//! GeoJSON and delimited-text readers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{DataError, Feature, Geometry, PropertyValue};
use crate::geo::{GeoPoint, GeoPolygon, GeoPolyline};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct CsvOptions {
    pub lon_column: String,
    pub lat_column: String,
    /// Column holding feature ids; row index when absent from the header.
    pub id_column: String,
    pub name_column: String,
    pub delimiter: char,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            lon_column: "lon".into(),
            lat_column: "lat".into(),
            id_column: "id".into(),
            name_column: "name".into(),
            delimiter: ',',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataFormat {
    GeoJson,
    Csv(CsvOptions),
}

impl DataFormat {
    /// Guesses from the file extension; anything not delimited text is GeoJSON.
    pub fn from_path(path: &Path) -> Self {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        match ext.as_str() {
            "csv" => DataFormat::Csv(CsvOptions::default()),
            "tsv" => DataFormat::Csv(CsvOptions { delimiter: '\t', ..Default::default() }),
            _ => DataFormat::GeoJson,
        }
    }
}

pub fn load_features(text: &str, format: &DataFormat) -> Result<Vec<Feature>, DataError> {
    match format {
        DataFormat::GeoJson => load_geojson(text),
        DataFormat::Csv(opts) => load_csv(text, opts),
    }
}

/// Reads a FeatureCollection, a single Feature or a bare geometry.
pub fn load_geojson(text: &str) -> Result<Vec<Feature>, DataError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| DataError::Malformed(e.to_string()))?;
    let kind = doc.get("type").and_then(Value::as_str).unwrap_or("");
    let features: Vec<&Value> = match kind {
        "FeatureCollection" => doc
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| DataError::Malformed("FeatureCollection without a features array".into()))?
            .iter()
            .collect(),
        "Feature" => vec![&doc],
        "Point" | "LineString" | "Polygon" => {
            let geometry = parse_geometry(&doc, 1)?;
            return Ok(vec![Feature { id: "0".into(), geometry, properties: BTreeMap::new(), name: None }]);
        }
        other => return Err(DataError::Malformed(format!("unsupported GeoJSON type '{other}'"))),
    };

    let mut out = Vec::with_capacity(features.len());
    let mut seen = BTreeSet::new();
    for (i, f) in features.into_iter().enumerate() {
        let record = i + 1;
        if f.get("type").and_then(Value::as_str) != Some("Feature") {
            return Err(DataError::record(record, "expected a Feature"));
        }
        let geometry = match f.get("geometry") {
            Some(g) if !g.is_null() => parse_geometry(g, record)?,
            _ => return Err(DataError::record(record, "feature has no geometry")),
        };
        let id = match f.get("id") {
            None | Some(Value::Null) => i.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            Some(_) => return Err(DataError::record(record, "feature id must be a string or number")),
        };
        let mut properties = BTreeMap::new();
        if let Some(obj) = f.get("properties").and_then(Value::as_object) {
            for (k, v) in obj {
                properties.insert(k.clone(), scalar(v));
            }
        }
        let name = match properties.get("name") {
            Some(PropertyValue::Text(s)) => Some(s.clone()),
            _ => None,
        };
        if !seen.insert(id.clone()) {
            return Err(DataError::DuplicateId(id));
        }
        out.push(Feature { id, geometry, properties, name });
    }
    Ok(out)
}

fn scalar(v: &Value) -> PropertyValue {
    match v {
        Value::Null => PropertyValue::Null,
        Value::Bool(b) => PropertyValue::Bool(*b),
        Value::Number(n) => n.as_f64().map_or(PropertyValue::Text(n.to_string()), PropertyValue::Number),
        Value::String(s) => PropertyValue::Text(s.clone()),
        nested => PropertyValue::Text(nested.to_string()),
    }
}

fn parse_geometry(g: &Value, record: usize) -> Result<Geometry, DataError> {
    let kind = g.get("type").and_then(Value::as_str).unwrap_or("");
    let coords = g
        .get("coordinates")
        .ok_or_else(|| DataError::record(record, "geometry has no coordinates"))?;
    match kind {
        "Point" => Ok(Geometry::Point(position(coords, record)?)),
        "LineString" => {
            let pts = positions(coords, record)?;
            Ok(Geometry::LineString(GeoPolyline::new(pts).map_err(|e| DataError::at(record, e))?))
        }
        "Polygon" => {
            let rings = coords
                .as_array()
                .ok_or_else(|| DataError::record(record, "polygon coordinates must be an array of rings"))?;
            match rings.len() {
                0 => Err(DataError::record(record, "polygon has no rings")),
                1 => {
                    let ring = positions(&rings[0], record)?;
                    Ok(Geometry::Polygon(GeoPolygon::new(ring).map_err(|e| DataError::at(record, e))?))
                }
                _ => Err(DataError::record(record, "polygon holes are not supported")),
            }
        }
        other => Err(DataError::record(record, format!("unsupported geometry type '{other}'"))),
    }
}

fn position(v: &Value, record: usize) -> Result<GeoPoint, DataError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() >= 2)
        .ok_or_else(|| DataError::record(record, "position must be [lon, lat]"))?;
    let lon = arr[0].as_f64().ok_or_else(|| DataError::record(record, "longitude is not a number"))?;
    let lat = arr[1].as_f64().ok_or_else(|| DataError::record(record, "latitude is not a number"))?;
    GeoPoint::new(lon, lat).map_err(|e| DataError::at(record, e))
}

fn positions(v: &Value, record: usize) -> Result<Vec<GeoPoint>, DataError> {
    v.as_array()
        .ok_or_else(|| DataError::record(record, "expected an array of positions"))?
        .iter()
        .map(|p| position(p, record))
        .collect()
}

/// Reads delimited text with a header row. Records are numbered from 1 after
/// the header; other columns become properties.
pub fn load_csv(text: &str, opts: &CsvOptions) -> Result<Vec<Feature>, DataError> {
    let delimiter = u8::try_from(opts.delimiter)
        .map_err(|_| DataError::Malformed(format!("delimiter {:?} is not ASCII", opts.delimiter)))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| DataError::Malformed(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let lon_i = col(&opts.lon_column).ok_or_else(|| DataError::MissingColumn(opts.lon_column.clone()))?;
    let lat_i = col(&opts.lat_column).ok_or_else(|| DataError::MissingColumn(opts.lat_column.clone()))?;
    let id_i = col(&opts.id_column);
    let name_i = col(&opts.name_column);

    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in reader.records().enumerate() {
        let record = i + 1;
        let row = row.map_err(|e| DataError::record(record, format!("unreadable row ({e})")))?;
        let num = |idx: usize, what: &str| -> Result<f64, DataError> {
            let raw = row.get(idx).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| DataError::record(record, format!("{what} '{raw}' is not a number")))
        };
        let point = GeoPoint::new(num(lon_i, "longitude")?, num(lat_i, "latitude")?)
            .map_err(|e| DataError::at(record, e))?;
        let id = match id_i {
            Some(k) => row.get(k).unwrap_or("").to_string(),
            None => i.to_string(),
        };
        let name = name_i.and_then(|k| row.get(k)).filter(|s| !s.is_empty()).map(str::to_string);
        let mut properties = BTreeMap::new();
        for (k, (h, v)) in headers.iter().zip(row.iter()).enumerate() {
            if k == lon_i || k == lat_i || Some(k) == id_i {
                continue;
            }
            let value = match v.parse::<f64>() {
                Ok(x) if x.is_finite() => PropertyValue::Number(x),
                _ if v.is_empty() => PropertyValue::Null,
                _ => PropertyValue::Text(v.to_string()),
            };
            properties.insert(h.to_string(), value);
        }
        if !seen.insert(id.clone()) {
            return Err(DataError::DuplicateId(id));
        }
        out.push(Feature { id, geometry: Geometry::Point(point), properties, name });
    }
    Ok(out)
}
