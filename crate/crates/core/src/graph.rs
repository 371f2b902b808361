//! Attributed relation graphs and their natural-language rendering.
//!
//! Segments become nodes attributed with their start/end pixel positions;
//! relations become labeled arcs (connection angles in degrees, intersection
//! locations, common slopes). One graph per relation kind. Every arc then
//! renders as a numbered sentence built from agent-verb-patient kernels, and
//! growth annotations contribute three-kernel sentences.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;
use crate::geom::{LineSegment, SegId};
use crate::ingest::AxisModel;
use crate::segment::{Duration, GrowthAnnotation, Magnitude, Relation, RelationKind, RelationValue};

/// Graph of one relation kind: nodes are the segments incident to its arcs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttributedGraph {
    pub kind: RelationKind,
    pub nodes: Vec<GraphNode>,
    pub arcs: Vec<GraphArc>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphNode {
    pub id: SegId,
    pub start: crate::geom::PointF,
    pub end: crate::geom::PointF,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphArc {
    pub a: SegId,
    pub b: SegId,
    pub label: RelationValue,
}

/// Split relations into the three attributed graphs (connection,
/// parallelism, intersection - in that order).
pub fn build_attributed_graphs(
    relations: &[Relation],
    segments: &[Vec<LineSegment>],
) -> Result<[AttributedGraph; 3]> {
    let mut lookup: BTreeMap<SegId, &LineSegment> = BTreeMap::new();
    for s in segments.iter().flatten() {
        lookup.insert(s.id, s);
    }
    let mut graphs = [
        AttributedGraph { kind: RelationKind::Connection, nodes: Vec::new(), arcs: Vec::new() },
        AttributedGraph { kind: RelationKind::Parallelism, nodes: Vec::new(), arcs: Vec::new() },
        AttributedGraph { kind: RelationKind::Intersection, nodes: Vec::new(), arcs: Vec::new() },
    ];
    for rel in relations {
        for id in [rel.a, rel.b] {
            if !lookup.contains_key(&id) {
                return Err(Error::UnknownSegment { id: format!("{id}") });
            }
        }
        let g = match rel.kind {
            RelationKind::Connection => &mut graphs[0],
            RelationKind::Parallelism => &mut graphs[1],
            RelationKind::Intersection => &mut graphs[2],
        };
        g.arcs.push(GraphArc {
            a: rel.a,
            b: rel.b,
            label: rel.value,
        });
    }
    for g in &mut graphs {
        g.arcs.sort_by_key(|a| (a.a, a.b));
        let mut ids: Vec<SegId> = g.arcs.iter().flat_map(|a| [a.a, a.b]).collect();
        ids.sort_unstable();
        ids.dedup();
        g.nodes = ids
            .into_iter()
            .map(|id| {
                let s = lookup[&id];
                GraphNode {
                    id,
                    start: s.start,
                    end: s.end,
                }
            })
            .collect();
    }
    Ok(graphs)
}

// ---------------------------------------------------------------------------
// Natural-language sentences
// ---------------------------------------------------------------------------

/// The fixed verb vocabulary of generated sentences.
pub const VERBS: [&str; 6] = [
    "is connected to",
    "is parallel to",
    "is intersecting with",
    "illustrates",
    "greater than",
    "during",
];

/// Agent-verb-patient triple underlying a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AvpKernel {
    pub agent: String,
    pub verb: String,
    pub patient: String,
}

impl AvpKernel {
    pub fn new(agent: impl Into<String>, verb: &str, patient: impl Into<String>) -> Self {
        assert!(VERBS.contains(&verb), "verb {verb:?} outside the fixed set");
        Self {
            agent: agent.into(),
            verb: String::from(verb),
            patient: patient.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SentenceSource {
    Relation(Relation),
    Growth(GrowthAnnotation),
}

/// One numbered natural-language sentence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NlSentence {
    /// "NLS<n>", numbered from 1 in generation order.
    pub id: String,
    pub number: u32,
    pub text: String,
    pub kernels: Vec<AvpKernel>,
    pub source: SentenceSource,
}

/// Trim trailing zeros off integral values ("15", "1", "34.5").
fn fmt_num(v: f64) -> String {
    if v == fmath::round(v) && fmath::abs(v) < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn the_segment(id: SegId) -> String {
    format!("the straight-line segment {id}")
}

fn magnitude_text(m: &Magnitude) -> String {
    match m {
        Magnitude::Percent(p) => format!("{} %", fmt_num(*p)),
        Magnitude::AxisDelta(d) => format!("{} units", fmt_num(*d)),
        Magnitude::PixelDelta(d) => format!("{} px", fmt_num(*d)),
    }
}

fn duration_text(d: &Duration, axis: &AxisModel) -> String {
    match d {
        Duration::AxisSpan { span, unit } => {
            let unit = unit
                .clone()
                .or_else(|| axis.x_label.clone())
                .unwrap_or_else(|| String::from("units"));
            format!("{} {}", fmt_num(*span), unit)
        }
        Duration::Pixels(n) => format!("{} pixels", fmt_num(*n)),
    }
}

/// Render every graph arc and growth annotation as a sentence, numbered
/// sequentially: connections first (by curve), then parallelisms, then
/// intersections, then growth.
pub fn graphs_to_sentences(
    graphs: &[AttributedGraph; 3],
    growth: &[GrowthAnnotation],
    axis: &AxisModel,
) -> Vec<NlSentence> {
    let mut out = Vec::new();
    let mut n = 0u32;
    let mut push = |text: String, kernels: Vec<AvpKernel>, source: SentenceSource, n: &mut u32| {
        *n += 1;
        out.push(NlSentence {
            id: format!("NLS{n}"),
            number: *n,
            text,
            kernels,
            source,
        });
    };

    for arc in &graphs[0].arcs {
        let RelationValue::AngleDeg(deg) = arc.label else { continue };
        let text = format!(
            "{} is connected with ({deg} degrees) to {}",
            the_segment(arc.a),
            the_segment(arc.b)
        );
        let kernels = alloc::vec![AvpKernel::new(
            arc.a.to_string(),
            "is connected to",
            arc.b.to_string()
        )];
        push(
            text,
            kernels,
            SentenceSource::Relation(Relation {
                kind: RelationKind::Connection,
                a: arc.a,
                b: arc.b,
                value: arc.label,
            }),
            &mut n,
        );
    }
    for arc in &graphs[1].arcs {
        let text = format!("{} is parallel to {}", the_segment(arc.a), the_segment(arc.b));
        let kernels = alloc::vec![AvpKernel::new(
            arc.a.to_string(),
            "is parallel to",
            arc.b.to_string()
        )];
        push(
            text,
            kernels,
            SentenceSource::Relation(Relation {
                kind: RelationKind::Parallelism,
                a: arc.a,
                b: arc.b,
                value: arc.label,
            }),
            &mut n,
        );
    }
    for arc in &graphs[2].arcs {
        let RelationValue::Point(p) = arc.label else { continue };
        let (x, y) = (fmath::round(p.x) as i64, fmath::round(p.y) as i64);
        let text = format!(
            "{} is intersecting in coordinates X={x} and Y={y} with {}",
            the_segment(arc.a),
            the_segment(arc.b)
        );
        let kernels = alloc::vec![AvpKernel::new(
            arc.a.to_string(),
            "is intersecting with",
            arc.b.to_string()
        )];
        push(
            text,
            kernels,
            SentenceSource::Relation(Relation {
                kind: RelationKind::Intersection,
                a: arc.a,
                b: arc.b,
                value: arc.label,
            }),
            &mut n,
        );
    }
    for ann in growth {
        let seg = SegId::new(ann.curve_id, ann.first_seg);
        let class = ann.class.phrase();
        let mag = magnitude_text(&ann.magnitude);
        let dur = duration_text(&ann.duration, axis);
        let text = format!(
            "{} illustrates {class} greater than {mag}) during {dur}",
            the_segment(seg)
        );
        let kernels = alloc::vec![
            AvpKernel::new(seg.to_string(), "illustrates", class),
            AvpKernel::new(class, "greater than", mag.clone()),
            AvpKernel::new(class, "during", dur.clone()),
        ];
        push(text, kernels, SentenceSource::Growth(ann.clone()), &mut n);
    }
    out
}

/// Recover the kernels of a generated sentence from its text. The templates
/// are injective, so this inverts `graphs_to_sentences` exactly; `None` means
/// the text matches no template.
pub fn extract_kernels(text: &str) -> Option<Vec<AvpKernel>> {
    const SEG: &str = "the straight-line segment ";
    let rest = text.strip_prefix(SEG)?;
    if let Some((a, tail)) = rest.split_once(" is connected with (") {
        let (_deg, tail) = tail.split_once(" degrees) to ")?;
        let b = tail.strip_prefix(SEG)?;
        return Some(alloc::vec![AvpKernel::new(a, "is connected to", b)]);
    }
    if let Some((a, tail)) = rest.split_once(" is parallel to ") {
        let b = tail.strip_prefix(SEG)?;
        return Some(alloc::vec![AvpKernel::new(a, "is parallel to", b)]);
    }
    if let Some((a, tail)) = rest.split_once(" is intersecting in coordinates X=") {
        let (_coords, tail) = tail.split_once(" with ")?;
        let b = tail.strip_prefix(SEG)?;
        return Some(alloc::vec![AvpKernel::new(a, "is intersecting with", b)]);
    }
    if let Some((a, tail)) = rest.split_once(" illustrates ") {
        let (class, tail) = tail.split_once(" greater than ")?;
        let (mag, dur) = tail.split_once(") during ")?;
        return Some(alloc::vec![
            AvpKernel::new(a, "illustrates", class),
            AvpKernel::new(class, "greater than", mag),
            AvpKernel::new(class, "during", dur),
        ]);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PointF;
    use crate::segment::GrowthClass;

    fn sid(c: u32, i: u32) -> SegId {
        SegId::new(c, i)
    }

    fn seg(c: u32, i: u32, x0: f64, y0: f64, x1: f64, y1: f64) -> LineSegment {
        LineSegment::new(sid(c, i), PointF::new(x0, y0), PointF::new(x1, y1))
    }

    fn sample_segments() -> Vec<Vec<LineSegment>> {
        alloc::vec![
            alloc::vec![
                seg(1, 0, 0.0, 0.0, 10.0, 10.0),
                seg(1, 1, 10.0, 10.0, 20.0, 0.0),
                seg(1, 2, 20.0, 0.0, 30.0, 10.0),
            ],
            alloc::vec![seg(2, 0, 0.0, 5.0, 30.0, 5.0)],
        ]
    }

    fn rel(kind: RelationKind, a: SegId, b: SegId, value: RelationValue) -> Relation {
        Relation { kind, a, b, value }
    }

    #[test]
    fn graphs_count_nodes_and_arcs_per_kind() {
        let segs = sample_segments();
        let relations = alloc::vec![
            rel(RelationKind::Connection, sid(1, 0), sid(1, 1), RelationValue::AngleDeg(90.0)),
            rel(RelationKind::Connection, sid(1, 1), sid(1, 2), RelationValue::AngleDeg(90.0)),
            rel(
                RelationKind::Intersection,
                sid(1, 0),
                sid(2, 0),
                RelationValue::Point(PointF::new(5.0, 5.0))
            ),
        ];
        let graphs = build_attributed_graphs(&relations, &segs).unwrap();
        assert_eq!(graphs[0].nodes.len(), 3);
        assert_eq!(graphs[0].arcs.len(), 2);
        assert_eq!(graphs[2].nodes.len(), 2);
        assert_eq!(graphs[2].arcs.len(), 1);
        assert_eq!(graphs[1].nodes.len(), 0);
        assert_eq!(graphs[1].arcs.len(), 0);
    }

    #[test]
    fn empty_relations_empty_graphs() {
        let segs = sample_segments();
        let graphs = build_attributed_graphs(&[], &segs).unwrap();
        for g in &graphs {
            assert!(g.nodes.is_empty() && g.arcs.is_empty());
        }
    }

    #[test]
    fn unknown_segment_is_rejected() {
        let segs = sample_segments();
        let relations = alloc::vec![rel(
            RelationKind::Parallelism,
            sid(1, 0),
            sid(7, 3),
            RelationValue::CommonSlope(1.0)
        )];
        assert!(matches!(
            build_attributed_graphs(&relations, &segs),
            Err(Error::UnknownSegment { .. })
        ));
    }

    #[test]
    fn parallel_arc_carries_common_slope() {
        let a = alloc::vec![seg(1, 0, 0.0, 0.0, 10.0, 10.0)];
        let b = alloc::vec![seg(2, 0, 0.0, 20.0, 10.0, 31.0)]; // slope 1.1
        let rels = crate::segment::find_parallelisms(&a, &b, 4, 4);
        assert_eq!(rels.len(), 1);
        let graphs = build_attributed_graphs(&rels, &[a, b]).unwrap();
        let RelationValue::CommonSlope(s) = graphs[1].arcs[0].label else { panic!() };
        assert!((s - 1.05).abs() < 1e-12, "label is the mean slope, got {s}");
    }

    #[test]
    fn connection_sentence_matches_template() {
        let segs = sample_segments();
        let relations = alloc::vec![rel(
            RelationKind::Connection,
            sid(1, 0),
            sid(1, 1),
            RelationValue::AngleDeg(34.513084935149756)
        )];
        let graphs = build_attributed_graphs(&relations, &segs).unwrap();
        let sentences = graphs_to_sentences(&graphs, &[], &AxisModel::default());
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].id, "NLS1");
        assert_eq!(
            sentences[0].text,
            "the straight-line segment L1S0 is connected with (34.513084935149756 degrees) to the straight-line segment L1S1"
        );
    }

    #[test]
    fn intersection_sentence_rounds_coordinates() {
        let segs = sample_segments();
        let relations = alloc::vec![rel(
            RelationKind::Intersection,
            sid(2, 0),
            sid(1, 2),
            RelationValue::Point(PointF::new(111.2, 125.7))
        )];
        let graphs = build_attributed_graphs(&relations, &segs).unwrap();
        let sentences = graphs_to_sentences(&graphs, &[], &AxisModel::default());
        assert_eq!(
            sentences[0].text,
            "the straight-line segment L2S0 is intersecting in coordinates X=111 and Y=126 with the straight-line segment L1S2"
        );
    }

    fn linear_growth_ann() -> GrowthAnnotation {
        GrowthAnnotation {
            curve_id: 1,
            first_seg: 2,
            last_seg: 2,
            class: GrowthClass::LinearGrowth,
            magnitude: Magnitude::Percent(15.0),
            duration: Duration::AxisSpan {
                span: 1.0,
                unit: Some(String::from("Semester")),
            },
        }
    }

    #[test]
    fn growth_sentence_has_three_kernels() {
        let graphs = build_attributed_graphs(&[], &sample_segments()).unwrap();
        let sentences = graphs_to_sentences(&graphs, &[linear_growth_ann()], &AxisModel::default());
        assert_eq!(sentences.len(), 1);
        assert_eq!(
            sentences[0].text,
            "the straight-line segment L1S2 illustrates linear growth greater than 15 %) during 1 Semester"
        );
        let k = &sentences[0].kernels;
        assert_eq!(k.len(), 3);
        assert_eq!((k[0].agent.as_str(), k[0].verb.as_str(), k[0].patient.as_str()),
                   ("L1S2", "illustrates", "linear growth"));
        assert_eq!((k[1].agent.as_str(), k[1].verb.as_str(), k[1].patient.as_str()),
                   ("linear growth", "greater than", "15 %"));
        assert_eq!((k[2].agent.as_str(), k[2].verb.as_str(), k[2].patient.as_str()),
                   ("linear growth", "during", "1 Semester"));
    }

    #[test]
    fn numbering_is_sequential_and_counts_match() {
        let segs = sample_segments();
        let relations = alloc::vec![
            rel(RelationKind::Connection, sid(1, 0), sid(1, 1), RelationValue::AngleDeg(90.0)),
            rel(RelationKind::Connection, sid(1, 1), sid(1, 2), RelationValue::AngleDeg(90.0)),
            rel(RelationKind::Parallelism, sid(1, 0), sid(2, 0), RelationValue::CommonSlope(0.5)),
            rel(
                RelationKind::Intersection,
                sid(1, 1),
                sid(2, 0),
                RelationValue::Point(PointF::new(12.0, 5.0))
            ),
        ];
        let graphs = build_attributed_graphs(&relations, &segs).unwrap();
        let sentences = graphs_to_sentences(&graphs, &[linear_growth_ann()], &AxisModel::default());
        let total_arcs: usize = graphs.iter().map(|g| g.arcs.len()).sum();
        assert_eq!(sentences.len(), total_arcs + 1);
        for (i, s) in sentences.iter().enumerate() {
            assert_eq!(s.number as usize, i + 1);
            assert_eq!(s.id, alloc::format!("NLS{}", i + 1));
        }
        // Order: connections, parallelism, intersection, growth.
        assert!(sentences[0].text.contains("is connected"));
        assert!(sentences[2].text.contains("is parallel"));
        assert!(sentences[3].text.contains("is intersecting"));
        assert!(sentences[4].text.contains("illustrates"));
    }

    #[test]
    fn kernels_recoverable_from_text() {
        let segs = sample_segments();
        let relations = alloc::vec![
            rel(RelationKind::Connection, sid(1, 0), sid(1, 1), RelationValue::AngleDeg(34.5)),
            rel(RelationKind::Parallelism, sid(1, 0), sid(2, 0), RelationValue::CommonSlope(0.5)),
            rel(
                RelationKind::Intersection,
                sid(1, 1),
                sid(2, 0),
                RelationValue::Point(PointF::new(12.0, 5.0))
            ),
        ];
        let graphs = build_attributed_graphs(&relations, &segs).unwrap();
        let sentences = graphs_to_sentences(&graphs, &[linear_growth_ann()], &AxisModel::default());
        for s in &sentences {
            let recovered = extract_kernels(&s.text).expect("template recognized");
            assert_eq!(recovered, s.kernels, "kernels of {:?}", s.text);
        }
    }
}
