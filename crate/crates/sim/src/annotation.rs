//! Line-oriented cluster annotation files.
//!
//! ```text
//! image 1280 720
//! cluster 7
//! v 612.5 300 0.71
//! v 640 288.25 nan
//! v 660 310 0.7
//! end
//! ```
//!
//! Depth `nan` or `0` marks an invalid reading. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use blossom_core::geometry::{Pixel, Polygon2};
use blossom_core::scene::{ClusterId, ClusterObservation, DepthPatch, ObservationSource};

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("line {line}, record {record}: {message}")]
    Parse { line: usize, record: usize, message: String },
    #[error("record {record} (cluster {id}): vertex ({u}, {v}) outside the {width}x{height} image")]
    Bounds { record: usize, id: u32, u: f64, v: f64, width: u32, height: u32 },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub width: u32,
    pub height: u32,
    pub observations: Vec<ClusterObservation>,
}

pub fn load_annotations(path: &Path) -> Result<AnnotationSet, AnnotationError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| AnnotationError::Io { path: path.display().to_string(), source })?;
    parse_annotations(&text)
}

struct Open {
    id: u32,
    record: usize,
    vertices: Vec<Pixel>,
    depth: Vec<f64>,
}

/// Records are numbered from 0 in file order.
pub fn parse_annotations(text: &str) -> Result<AnnotationSet, AnnotationError> {
    let mut size: Option<(u32, u32)> = None;
    let mut open: Option<Open> = None;
    let mut observations = Vec::new();
    let mut records = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let record = open.as_ref().map_or(records, |o| o.record);
        let err = |message: String| AnnotationError::Parse { line, record, message };
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "image" => {
                if size.is_some() {
                    return Err(err("duplicate image header".into()));
                }
                let [_, w, h] = fields[..] else {
                    return Err(err("expected `image <width> <height>`".into()));
                };
                let w: u32 = w.parse().map_err(|_| err(format!("bad width `{w}`")))?;
                let h: u32 = h.parse().map_err(|_| err(format!("bad height `{h}`")))?;
                if w == 0 || h == 0 {
                    return Err(err("image size must be positive".into()));
                }
                size = Some((w, h));
            }
            "cluster" => {
                if size.is_none() {
                    return Err(err("cluster before image header".into()));
                }
                if open.is_some() {
                    return Err(err("cluster opened before previous `end`".into()));
                }
                let [_, id] = fields[..] else {
                    return Err(err("expected `cluster <id>`".into()));
                };
                let id: u32 = id.parse().map_err(|_| err(format!("bad cluster id `{id}`")))?;
                if observations.iter().any(|o: &ClusterObservation| o.id.0 == id) {
                    return Err(err(format!("duplicate cluster id {id}")));
                }
                open = Some(Open { id, record: records, vertices: Vec::new(), depth: Vec::new() });
                records += 1;
            }
            "v" => {
                let Some(o) = open.as_mut() else {
                    return Err(err("vertex outside a cluster".into()));
                };
                let [_, u, v, d] = fields[..] else {
                    return Err(err("expected `v <u> <v> <depth>`".into()));
                };
                let parse = |s: &str, what: &str| s.parse::<f64>().map_err(|_| err(format!("bad {what} `{s}`")));
                let (u, v, d) = (parse(u, "u")?, parse(v, "v")?, parse(d, "depth")?);
                if !u.is_finite() || !v.is_finite() {
                    return Err(err("vertex coordinates must be finite".into()));
                }
                let (w, h) = size.expect("checked at cluster");
                if u < 0.0 || v < 0.0 || u > (w - 1) as f64 || v > (h - 1) as f64 {
                    return Err(AnnotationError::Bounds { record, id: o.id, u, v, width: w, height: h });
                }
                o.vertices.push(Pixel::new(u, v));
                o.depth.push(d);
            }
            "end" => {
                let Some(o) = open.take() else {
                    return Err(err("`end` without a cluster".into()));
                };
                let mask = Polygon2::new(o.vertices).map_err(|e| err(format!("cluster {}: {e}", o.id)))?;
                observations.push(ClusterObservation {
                    id: ClusterId(o.id),
                    mask,
                    vertex_depth: o.depth,
                    depth_patch: DepthPatch::empty(),
                    source: ObservationSource::Annotated,
                });
            }
            other => return Err(err(format!("unknown keyword `{other}`"))),
        }
    }
    if let Some(o) = open {
        return Err(AnnotationError::Parse {
            line: text.lines().count(),
            record: o.record,
            message: "missing `end`".into(),
        });
    }
    let (width, height) = size.unwrap_or((0, 0));
    Ok(AnnotationSet { width, height, observations })
}

fn depth_token(d: f64) -> String {
    if d.is_nan() {
        "nan".into()
    } else {
        format!("{d}")
    }
}

/// Writes `set` so that [`parse_annotations`] returns an identical value
/// (NaN depths come back as NaN).
pub fn write_annotations(set: &AnnotationSet) -> String {
    let mut out = String::new();
    writeln!(out, "image {} {}", set.width, set.height).unwrap();
    for o in &set.observations {
        writeln!(out, "cluster {}", o.id).unwrap();
        for (p, d) in o.mask.vertices().iter().zip(&o.vertex_depth) {
            writeln!(out, "v {} {} {}", p.u, p.v, depth_token(*d)).unwrap();
        }
        out.push_str("end\n");
    }
    out
}
