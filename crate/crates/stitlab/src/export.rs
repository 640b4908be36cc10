//! `stit-tess/1` JSON documents and SVG rendering of planar states.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use stitlab_core::engine::TessellationState;
use stitlab_core::geometry::{ConvexPolytope, Face};

pub const FORMAT: &str = "stit-tess/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TessDocument {
    pub format: String,
    pub config_hash: String,
    pub dimension: usize,
    pub time: f64,
    pub window: Vec<Vec<f64>>,
    pub cells: Vec<CellDoc>,
    pub maximal_faces: Vec<FaceDoc>,
    pub events: Vec<EventDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDoc {
    pub id: u64,
    pub vertices: Vec<Vec<f64>>,
    pub birth_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceDoc {
    pub id: usize,
    pub vertices: Vec<Vec<f64>>,
    pub birth_time: f64,
    pub internal_vertices: Vec<VertexDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub point: Vec<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventDoc {
    pub time: f64,
    pub cell_id: u64,
    pub normal: Vec<f64>,
    pub offset: f64,
    pub plus_id: u64,
    pub minus_id: u64,
}

pub fn document<P: ConvexPolytope<D>, const D: usize>(state: &TessellationState<P, D>, config_hash: &str) -> TessDocument {
    let pts = |v: &[[f64; D]]| v.iter().map(|p| p.to_vec()).collect::<Vec<_>>();
    TessDocument {
        format: FORMAT.to_owned(),
        config_hash: config_hash.to_owned(),
        dimension: D,
        time: state.time(),
        window: pts(state.window().vertices()),
        cells: state
            .cells()
            .iter()
            .map(|c| CellDoc { id: c.id, vertices: pts(c.polytope.vertices()), birth_time: c.birth_time })
            .collect(),
        maximal_faces: state
            .ledger()
            .iter()
            .map(|r| FaceDoc {
                id: r.id,
                vertices: pts(&r.face.vertices()),
                birth_time: r.birth_time,
                internal_vertices: r
                    .internal_vertices
                    .iter()
                    .map(|v| VertexDoc { point: v.point.to_vec(), time: v.time })
                    .collect(),
            })
            .collect(),
        events: state
            .events()
            .iter()
            .map(|e| EventDoc {
                time: e.time,
                cell_id: e.cell_id,
                normal: e.hyperplane.normal().to_vec(),
                offset: e.hyperplane.offset(),
                plus_id: e.plus_id,
                minus_id: e.minus_id,
            })
            .collect(),
    }
}

const SVG_SIZE: f64 = 800.0;
const SVG_MARGIN: f64 = 10.0;

/// Window outline and maximal segments as polylines; earlier faces are
/// drawn more opaque.
pub fn render_svg(doc: &TessDocument) -> Result<String, String> {
    if doc.format != FORMAT {
        return Err(format!("unsupported format {:?}", doc.format));
    }
    if doc.dimension != 2 {
        return Err("SVG output is planar only".into());
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &doc.window {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0);
    if !(span > 0.0 && span.is_finite()) {
        return Err("window has no extent".into());
    }
    let k = (SVG_SIZE - 2.0 * SVG_MARGIN) / span;
    let w = (x1 - x0) * k + 2.0 * SVG_MARGIN;
    let h = (y1 - y0) * k + 2.0 * SVG_MARGIN;
    let map = |p: &[f64]| format!("{:.3},{:.3}", SVG_MARGIN + (p[0] - x0) * k, h - SVG_MARGIN - (p[1] - y0) * k);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#).unwrap();
    let outline: Vec<String> = doc.window.iter().map(|p| map(p)).collect();
    writeln!(s, r#"<polygon points="{}" fill="white" stroke="black" stroke-width="1.5"/>"#, outline.join(" ")).unwrap();
    let horizon = if doc.time > 0.0 { doc.time } else { 1.0 };
    for f in &doc.maximal_faces {
        let opacity = 1.0 - 0.8 * (f.birth_time / horizon).clamp(0.0, 1.0);
        let pts: Vec<String> = f.vertices.iter().map(|p| map(p)).collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1" stroke-opacity="{opacity:.3}"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use stitlab_core::engine::Simulator;
    use stitlab_core::geometry::{Polygon, Polyhedron};
    use stitlab_core::measure::{DirectionalDistribution, HyperplaneMeasure};
    use stitlab_core::stream::stream;

    #[test]
    fn planar_round_trip_and_svg() {
        let sim = Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::axis_parallel()));
        let y = sim.run(Polygon::rectangle(0.0, 0.0, 4.0, 2.0).unwrap(), 3.0, &mut stream(1, "export", 0)).unwrap();
        let doc = document(&y, "abc");
        assert_eq!(doc.cells.len(), y.cells().len());
        assert_eq!(doc.maximal_faces.len(), y.ledger().len());
        assert_eq!(doc.events.len(), y.ledger().len());
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains(r#""format":"stit-tess/1""#));
        let back: TessDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        let svg = render_svg(&doc).unwrap();
        assert_eq!(svg.matches("<polyline").count(), doc.maximal_faces.len());
    }

    #[test]
    fn spatial_documents_have_no_svg() {
        let sim = Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::isotropic().unwrap()));
        let y = sim.run(Polyhedron::unit_cube(), 2.0, &mut stream(1, "export3", 0)).unwrap();
        let doc = document(&y, "");
        assert_eq!(doc.dimension, 3);
        assert!(doc.maximal_faces.iter().all(|f| f.vertices.iter().all(|v| v.len() == 3)));
        assert!(render_svg(&doc).is_err());
    }
}
