//! City overlays for map tools: GeoJSON feature collections and KML
//! placemarks, sized by the logarithm of paper counts and colored by flag.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use super::{write_file, ReportError, Result};
use crate::inference::SignificanceFlag;
use crate::numeric::round_to;

pub const SIZE_MIN: f64 = 4.0;
pub const SIZE_MAX: f64 = 24.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GazetteerEntry {
    pub city: String,
    pub country: String,
    pub latitude: f64,
    pub longitude: f64,
}

/// Resolves a (city, country) pair to (latitude, longitude).
pub trait GeocodeLookup {
    fn locate(&self, city: &str, country: &str) -> Option<(f64, f64)>;
}

/// Local CSV gazetteer keyed exactly as the address parser emits cities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gazetteer {
    entries: BTreeMap<(String, String), (f64, f64)>,
}

impl Gazetteer {
    pub fn from_entries<I: IntoIterator<Item = GazetteerEntry>>(entries: I) -> Result<Self> {
        let mut g = Gazetteer::default();
        for (i, e) in entries.into_iter().enumerate() {
            g.insert(e, i + 1)?;
        }
        Ok(g)
    }

    fn insert(&mut self, e: GazetteerEntry, line: usize) -> Result<()> {
        let bad = |reason: String| ReportError::BadGazetteer { line, reason };
        if !(-90.0..=90.0).contains(&e.latitude) {
            return Err(bad(format!("latitude {} out of range", e.latitude)));
        }
        if !(-180.0..=180.0).contains(&e.longitude) {
            return Err(bad(format!("longitude {} out of range", e.longitude)));
        }
        let key = (e.city, e.country);
        if self.entries.contains_key(&key) {
            return Err(bad(format!("duplicate entry {}, {}", key.0, key.1)));
        }
        self.entries.insert(key, (e.latitude, e.longitude));
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(ReportError::GazetteerMissing(path.to_path_buf()));
        }
        let file = File::open(path).map_err(|source| ReportError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(["city", "country", "lat", "lon"]) {
            return Err(ReportError::BadGazetteer {
                line: 1,
                reason: "expected header city,country,lat,lon".into(),
            });
        }
        let mut g = Gazetteer::default();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let num = |k: usize, what: &str| -> Result<f64> {
                row.get(k).unwrap_or("").parse().map_err(|_| ReportError::BadGazetteer {
                    line,
                    reason: format!("{what} is not a number"),
                })
            };
            let entry = GazetteerEntry {
                city: row.get(0).unwrap_or("").to_string(),
                country: row.get(1).unwrap_or("").to_string(),
                latitude: num(2, "lat")?,
                longitude: num(3, "lon")?,
            };
            g.insert(entry, line)?;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl GeocodeLookup for Gazetteer {
    fn locate(&self, city: &str, country: &str) -> Option<(f64, f64)> {
        self.entries.get(&(city.to_string(), country.to_string())).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlayMode {
    /// z of the I3-versus-publications test.
    #[default]
    ZTest,
    /// z of the per-paper relative I3-rate; small cities are left out.
    Ri3r,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeoFormat {
    #[default]
    GeoJson,
    Kml,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CityResult {
    pub city: String,
    pub country: String,
    pub n_papers: f64,
    /// Absent when the unit was too small for the selected test.
    pub z: Option<f64>,
    pub flag: SignificanceFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapColor {
    Green,
    Red,
    Gray,
}

impl MapColor {
    pub fn of(flag: SignificanceFlag) -> Self {
        if flag.is_above() {
            MapColor::Green
        } else if flag.is_below() {
            MapColor::Red
        } else {
            MapColor::Gray
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MapColor::Green => "green",
            MapColor::Red => "red",
            MapColor::Gray => "gray",
        }
    }

    /// KML colors are aabbggrr.
    fn kml(&self) -> &'static str {
        match self {
            MapColor::Green => "ff00c000",
            MapColor::Red => "ff0000e0",
            MapColor::Gray => "ff909090",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapNode {
    pub city: String,
    pub country: String,
    pub latitude: f64,
    pub longitude: f64,
    pub n_papers: f64,
    pub z: f64,
    pub flag: SignificanceFlag,
    pub size: f64,
    pub color: MapColor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlaySkip {
    pub city: String,
    pub country: String,
    pub reason: String,
}

fn node_size(n: f64, n_max: f64) -> f64 {
    if n_max <= 0.0 {
        return SIZE_MIN;
    }
    SIZE_MIN + (SIZE_MAX - SIZE_MIN) * (1.0 + n).log10() / (1.0 + n_max).log10()
}

/// Geocodes city results and derives node size and color. Cities missing
/// from the lookup, or without a z (in RI3R mode, also those under `min_n`
/// papers) are returned as skips.
pub fn build_map_nodes(
    results: &[CityResult],
    lookup: &dyn GeocodeLookup,
    mode: OverlayMode,
    min_n: usize,
) -> (Vec<MapNode>, Vec<OverlaySkip>) {
    let mut skips = Vec::new();
    let mut kept = Vec::new();
    for r in results {
        let skip = |reason: &str| OverlaySkip {
            city: r.city.clone(),
            country: r.country.clone(),
            reason: reason.to_string(),
        };
        if mode == OverlayMode::Ri3r && r.n_papers < min_n as f64 {
            skips.push(skip(&format!("fewer than {min_n} papers")));
            continue;
        }
        let Some(z) = r.z else {
            skips.push(skip("no test statistic"));
            continue;
        };
        match lookup.locate(&r.city, &r.country) {
            Some(coords) => kept.push((r, z, coords)),
            None => skips.push(skip("not in gazetteer")),
        }
    }
    let n_max = kept.iter().map(|(r, _, _)| r.n_papers).fold(0.0, f64::max);
    let mut nodes: Vec<MapNode> = kept
        .into_iter()
        .map(|(r, z, (lat, lon))| MapNode {
            city: r.city.clone(),
            country: r.country.clone(),
            latitude: lat,
            longitude: lon,
            n_papers: r.n_papers,
            z,
            flag: r.flag,
            size: node_size(r.n_papers, n_max),
            color: MapColor::of(r.flag),
        })
        .collect();
    nodes.sort_by(|a, b| (&a.country, &a.city).cmp(&(&b.country, &b.city)));
    skips.sort_by(|a, b| (&a.country, &a.city).cmp(&(&b.country, &b.city)));
    (nodes, skips)
}

fn feature(node: &MapNode) -> Value {
    json!({
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [node.longitude, node.latitude],
        },
        "properties": {
            "city": node.city,
            "country": node.country,
            "n_papers": node.n_papers,
            "z": round_to(node.z, 3),
            "flag": node.flag.symbol(),
            "size": round_to(node.size, 3),
            "color": node.color.name(),
        },
    })
}

pub fn write_geojson<W: Write>(nodes: &[MapNode], out: &mut W) -> Result<()> {
    let collection = json!({
        "type": "FeatureCollection",
        "features": nodes.iter().map(feature).collect::<Vec<_>>(),
    });
    serde_json::to_writer_pretty(&mut *out, &collection)?;
    writeln!(out)?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn write_kml<W: Write>(nodes: &[MapNode], out: &mut W) -> Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<kml xmlns="http://www.opengis.net/kml/2.2">"#)?;
    writeln!(out, "<Document>")?;
    for n in nodes {
        writeln!(out, "  <Placemark>")?;
        writeln!(
            out,
            "    <name>{}, {}</name>",
            xml_escape(&n.city),
            xml_escape(&n.country)
        )?;
        writeln!(
            out,
            "    <description>n_papers={} z={:.3} flag={}</description>",
            n.n_papers,
            n.z,
            xml_escape(n.flag.symbol())
        )?;
        writeln!(out, "    <Style><IconStyle>")?;
        writeln!(out, "      <color>{}</color>", n.color.kml())?;
        writeln!(out, "      <scale>{:.3}</scale>", n.size / SIZE_MIN)?;
        writeln!(out, "    </IconStyle></Style>")?;
        writeln!(
            out,
            "    <Point><coordinates>{},{}</coordinates></Point>",
            n.longitude, n.latitude
        )?;
        writeln!(out, "  </Placemark>")?;
    }
    writeln!(out, "</Document>")?;
    writeln!(out, "</kml>")?;
    Ok(())
}

/// Writes the overlay and returns the cities that could not be placed.
pub fn emit_geo_overlay(
    results: &[CityResult],
    lookup: &dyn GeocodeLookup,
    mode: OverlayMode,
    min_n: usize,
    format: GeoFormat,
    path: &Path,
) -> Result<Vec<OverlaySkip>> {
    let (nodes, skips) = build_map_nodes(results, lookup, mode, min_n);
    write_file(path, |out| match format {
        GeoFormat::GeoJson => write_geojson(&nodes, out),
        GeoFormat::Kml => write_kml(&nodes, out),
    })?;
    Ok(skips)
}

const PROPERTIES: [&str; 7] = ["city", "country", "n_papers", "z", "flag", "size", "color"];

/// Structural check of a point FeatureCollection as written by [`write_geojson`].
pub fn validate_geojson(value: &Value) -> std::result::Result<(), String> {
    let obj = value.as_object().ok_or("root is not an object")?;
    if obj.get("type") != Some(&json!("FeatureCollection")) {
        return Err("root type is not FeatureCollection".into());
    }
    let features = obj
        .get("features")
        .and_then(Value::as_array)
        .ok_or("features is not an array")?;
    for (i, f) in features.iter().enumerate() {
        let f = f.as_object().ok_or(format!("feature {i} is not an object"))?;
        if f.get("type") != Some(&json!("Feature")) {
            return Err(format!("feature {i} type is not Feature"));
        }
        let geom = f
            .get("geometry")
            .and_then(Value::as_object)
            .ok_or(format!("feature {i} has no geometry"))?;
        if geom.get("type") != Some(&json!("Point")) {
            return Err(format!("feature {i} geometry is not a Point"));
        }
        let coords = geom
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or(format!("feature {i} has no coordinates"))?;
        let (lon, lat) = match coords.as_slice() {
            [lon, lat] => (lon.as_f64(), lat.as_f64()),
            _ => return Err(format!("feature {i} coordinates are not a pair")),
        };
        match (lon, lat) {
            (Some(lon), Some(lat)) if lon.abs() <= 180.0 && lat.abs() <= 90.0 => {}
            _ => return Err(format!("feature {i} coordinates out of range")),
        }
        let props: &Map<String, Value> = f
            .get("properties")
            .and_then(Value::as_object)
            .ok_or(format!("feature {i} has no properties"))?;
        for p in PROPERTIES {
            if !props.contains_key(p) {
                return Err(format!("feature {i} lacks property {p}"));
            }
        }
    }
    Ok(())
}
