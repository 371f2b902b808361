//! Stochastic Petri-net representation of an analyzed chart.
//!
//! Places stand for line segments (one per segment, colored by curve) and
//! carry the segment's start and end coordinates as tokens. Transitions stand
//! for the verbs of the generated sentences: connections and intersections
//! carry coordinate tokens, parallelism and growth transitions are token-free
//! and never gate replay. Firing rates are uniform (1.0) and replay is a
//! deterministic topological walk along each curve's connection chain, so a
//! net reconstructs the same curves every time; the rate field stays in the
//! model for stochastic simulation built on top.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{LineSegment, PointF, SegId};
use crate::graph::{NlSentence, SentenceSource};
use crate::raster::{Rgb, RgbRaster};
use crate::segment::{Duration, GrowthClass, Magnitude, RelationKind, RelationValue};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpnPlace {
    pub id: String,
    pub segment: SegId,
    pub color: Rgb,
    /// Segment start and end coordinates.
    pub tokens: Vec<PointF>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TransitionKind {
    Connection,
    Parallelism,
    Intersection,
    Growth,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TransitionPayload {
    AngleDeg(f64),
    CommonSlope(f64),
    Point(PointF),
    Growth {
        class: GrowthClass,
        magnitude: Magnitude,
        duration: Duration,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpnTransition {
    pub id: String,
    pub kind: TransitionKind,
    pub firing_rate: f64,
    /// Coordinate tokens; present exactly on connection and intersection
    /// transitions.
    pub tokens: Vec<PointF>,
    pub payload: TransitionPayload,
}

/// Directed arc between a place and a transition (either direction).
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpnArc {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpnGraph {
    pub places: Vec<SpnPlace>,
    pub transitions: Vec<SpnTransition>,
    pub arcs: Vec<SpnArc>,
    /// Place ids holding the initial marking: each curve's first place.
    pub initial_marking: Vec<String>,
}

pub fn place_id(seg: SegId) -> String {
    format!("P_{seg}")
}

fn parse_nl_id(text: &str) -> Option<SegId> {
    let rest = text.strip_prefix('L')?;
    let (curve, idx) = rest.split_once('S')?;
    Some(SegId::new(curve.parse().ok()?, idx.parse().ok()?))
}

/// Build the net from sentences: one place per stage segment, one transition
/// per sentence verb. Agents and patients that name segments become the
/// transition's input and output places; a growth sentence spans from the
/// first to the last segment of its range and its remaining kernels fold into
/// the payload.
pub fn kernels_to_spn(
    sentences: &[NlSentence],
    segments: &[Vec<LineSegment>],
    colors: &BTreeMap<u32, Rgb>,
) -> Result<SpnGraph> {
    let mut seg_index: BTreeMap<SegId, &LineSegment> = BTreeMap::new();
    for s in segments.iter().flatten() {
        seg_index.insert(s.id, s);
    }

    let mut places: Vec<SpnPlace> = seg_index
        .values()
        .map(|s| SpnPlace {
            id: place_id(s.id),
            segment: s.id,
            color: colors.get(&s.id.curve).copied().unwrap_or(Rgb::BLACK),
            tokens: alloc::vec![s.start, s.end],
        })
        .collect();
    places.sort_by_key(|p| p.segment);

    let lookup = |id: SegId| -> Result<&LineSegment> {
        seg_index.get(&id).copied().ok_or(Error::UnknownSegment {
            id: format!("{id}"),
        })
    };

    let mut transitions = Vec::new();
    let mut arcs = Vec::new();
    let push_transition =
        |transitions: &mut Vec<SpnTransition>,
         arcs: &mut Vec<SpnArc>,
         kind: TransitionKind,
         tokens: Vec<PointF>,
         payload: TransitionPayload,
         input: SegId,
         output: SegId| {
            let id = format!("T{}", transitions.len());
            arcs.push(SpnArc {
                from: place_id(input),
                to: id.clone(),
            });
            arcs.push(SpnArc {
                from: id.clone(),
                to: place_id(output),
            });
            transitions.push(SpnTransition {
                id,
                kind,
                firing_rate: 1.0,
                tokens,
                payload,
            });
        };

    for sentence in sentences {
        match &sentence.source {
            SentenceSource::Relation(rel) => {
                let kernel = sentence.kernels.first().ok_or(Error::Semantic {
                    position: 0,
                    message: String::from("sentence without kernels"),
                })?;
                let a = parse_nl_id(&kernel.agent).ok_or(Error::UnknownSegment {
                    id: kernel.agent.clone(),
                })?;
                let b = parse_nl_id(&kernel.patient).ok_or(Error::UnknownSegment {
                    id: kernel.patient.clone(),
                })?;
                let (_, seg_b) = (lookup(a)?, lookup(b)?);
                match (rel.kind, rel.value) {
                    (RelationKind::Connection, RelationValue::AngleDeg(deg)) => {
                        // The downstream segment's start point is the token
                        // that moves the marking across the junction.
                        push_transition(
                            &mut transitions,
                            &mut arcs,
                            TransitionKind::Connection,
                            alloc::vec![seg_b.start],
                            TransitionPayload::AngleDeg(deg),
                            a,
                            b,
                        );
                    }
                    (RelationKind::Parallelism, RelationValue::CommonSlope(s)) => {
                        push_transition(
                            &mut transitions,
                            &mut arcs,
                            TransitionKind::Parallelism,
                            Vec::new(),
                            TransitionPayload::CommonSlope(s),
                            a,
                            b,
                        );
                    }
                    (RelationKind::Intersection, RelationValue::Point(p)) => {
                        push_transition(
                            &mut transitions,
                            &mut arcs,
                            TransitionKind::Intersection,
                            alloc::vec![p],
                            TransitionPayload::Point(p),
                            a,
                            b,
                        );
                    }
                    _ => {}
                }
            }
            SentenceSource::Growth(ann) => {
                let first = SegId::new(ann.curve_id, ann.first_seg);
                let last = SegId::new(ann.curve_id, ann.last_seg);
                lookup(first)?;
                lookup(last)?;
                push_transition(
                    &mut transitions,
                    &mut arcs,
                    TransitionKind::Growth,
                    Vec::new(),
                    TransitionPayload::Growth {
                        class: ann.class,
                        magnitude: ann.magnitude,
                        duration: ann.duration.clone(),
                    },
                    first,
                    last,
                );
            }
        }
    }

    // Initial marking: each curve's leftmost place.
    let mut first_per_curve: BTreeMap<u32, SegId> = BTreeMap::new();
    for p in &places {
        first_per_curve.entry(p.segment.curve).or_insert(p.segment);
    }
    let initial_marking = first_per_curve.values().map(|s| place_id(*s)).collect();

    Ok(SpnGraph {
        places,
        transitions,
        arcs,
        initial_marking,
    })
}

impl SpnGraph {
    /// Arcs only ever join a place and a transition.
    pub fn is_bipartite(&self) -> bool {
        let place_ids: alloc::collections::BTreeSet<&str> =
            self.places.iter().map(|p| p.id.as_str()).collect();
        let transition_ids: alloc::collections::BTreeSet<&str> =
            self.transitions.iter().map(|t| t.id.as_str()).collect();
        self.arcs.iter().all(|a| {
            (place_ids.contains(a.from.as_str()) && transition_ids.contains(a.to.as_str()))
                || (transition_ids.contains(a.from.as_str()) && place_ids.contains(a.to.as_str()))
        })
    }

    fn connection_transitions(&self) -> impl Iterator<Item = &SpnTransition> {
        self.transitions
            .iter()
            .filter(|t| t.kind == TransitionKind::Connection)
    }

    fn transition_io(&self, tid: &str) -> (Option<SegId>, Option<SegId>) {
        let mut input = None;
        let mut output = None;
        for arc in &self.arcs {
            if arc.to == tid {
                input = self.places.iter().find(|p| p.id == arc.from).map(|p| p.segment);
            }
            if arc.from == tid {
                output = self.places.iter().find(|p| p.id == arc.to).map(|p| p.segment);
            }
        }
        (input, output)
    }

    /// The connection sub-net of one curve is a simple alternating path:
    /// exactly places-1 connection transitions, each place having at most one
    /// incoming and one outgoing connection arc.
    pub fn curve_chain_is_simple_path(&self, curve: u32) -> bool {
        let places: Vec<SegId> = self
            .places
            .iter()
            .filter(|p| p.segment.curve == curve)
            .map(|p| p.segment)
            .collect();
        let conns: Vec<(SegId, SegId)> = self
            .connection_transitions()
            .filter_map(|t| {
                let (i, o) = self.transition_io(&t.id);
                match (i, o) {
                    (Some(i), Some(o)) if i.curve == curve && o.curve == curve => Some((i, o)),
                    _ => None,
                }
            })
            .collect();
        if conns.len() + 1 != places.len() && !(places.is_empty() && conns.is_empty()) {
            return false;
        }
        let mut out_deg: BTreeMap<SegId, usize> = BTreeMap::new();
        let mut in_deg: BTreeMap<SegId, usize> = BTreeMap::new();
        for (i, o) in &conns {
            *out_deg.entry(*i).or_insert(0) += 1;
            *in_deg.entry(*o).or_insert(0) += 1;
        }
        places.iter().all(|p| {
            out_deg.get(p).copied().unwrap_or(0) <= 1 && in_deg.get(p).copied().unwrap_or(0) <= 1
        })
    }
}

/// Order in which transitions fired, with the per-curve place visit order the
/// reconstruction draws from.
#[derive(Debug, Clone, PartialEq)]
pub struct FiringSequence {
    /// Every fired transition id, in firing order.
    pub fired: Vec<String>,
    /// Connection transitions per curve, in chain order.
    pub per_curve: BTreeMap<u32, Vec<String>>,
    /// Visited places per curve, in chain order.
    pub place_order: BTreeMap<u32, Vec<SegId>>,
}

/// Deterministic topological replay: each curve's connection chain fires left
/// to right (all rates are equal), then cross-curve and growth transitions
/// fire once every incident place has been visited. A curve whose chain
/// cannot reach all of its places deadlocks.
pub fn replay(spn: &SpnGraph) -> Result<FiringSequence> {
    let mut fired = Vec::new();
    let mut per_curve: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    let mut place_order: BTreeMap<u32, Vec<SegId>> = BTreeMap::new();
    let mut visited: alloc::collections::BTreeSet<SegId> = alloc::collections::BTreeSet::new();

    let mut curves: Vec<u32> = spn.places.iter().map(|p| p.segment.curve).collect();
    curves.sort_unstable();
    curves.dedup();

    // Connection adjacency: input segment -> (transition id, output segment).
    let mut next_hop: BTreeMap<SegId, (String, SegId)> = BTreeMap::new();
    for t in spn.connection_transitions() {
        let (input, output) = spn.transition_io(&t.id);
        if let (Some(i), Some(o)) = (input, output) {
            next_hop.insert(i, (t.id.clone(), o));
        }
    }

    for curve in &curves {
        let mut curve_places: Vec<SegId> = spn
            .places
            .iter()
            .filter(|p| p.segment.curve == *curve)
            .map(|p| p.segment)
            .collect();
        curve_places.sort_unstable();
        let start = spn
            .initial_marking
            .iter()
            .find_map(|id| {
                spn.places
                    .iter()
                    .find(|p| &p.id == id && p.segment.curve == *curve)
                    .map(|p| p.segment)
            })
            .unwrap_or(curve_places[0]);

        let mut order = alloc::vec![start];
        visited.insert(start);
        let mut current = start;
        while let Some((tid, next)) = next_hop.get(&current) {
            fired.push(tid.clone());
            per_curve.entry(*curve).or_default().push(tid.clone());
            visited.insert(*next);
            order.push(*next);
            current = *next;
        }
        if order.len() != curve_places.len() {
            let marked = order.iter().map(|s| place_id(*s)).collect();
            let stuck = curve_places
                .iter()
                .filter(|s| !visited.contains(*s))
                .map(|s| place_id(*s))
                .collect();
            return Err(Error::Deadlock { marked, stuck });
        }
        place_order.insert(*curve, order);
        per_curve.entry(*curve).or_default();
    }

    // Cross-curve and growth transitions fire once their places are visited.
    for t in &spn.transitions {
        if t.kind == TransitionKind::Connection {
            continue;
        }
        let (i, o) = spn.transition_io(&t.id);
        let ready = [i, o]
            .into_iter()
            .flatten()
            .all(|seg| visited.contains(&seg));
        if ready {
            fired.push(t.id.clone());
        } else {
            return Err(Error::Deadlock {
                marked: visited.iter().map(|s| place_id(*s)).collect(),
                stuck: alloc::vec![t.id.clone()],
            });
        }
    }

    Ok(FiringSequence {
        fired,
        per_curve,
        place_order,
    })
}

/// Redraw the curves of a replayed net: one solid stroke per place between
/// its two coordinate tokens, in firing order, with the place color and the
/// curve's estimated width, on a white canvas.
pub fn reconstruct_curves(
    spn: &SpnGraph,
    canvas_w: usize,
    canvas_h: usize,
    widths: &BTreeMap<u32, u32>,
) -> Result<RgbRaster> {
    let seq = replay(spn)?;
    let mut canvas = RgbRaster::filled(canvas_w, canvas_h, Rgb::WHITE);
    let by_seg: BTreeMap<SegId, &SpnPlace> =
        spn.places.iter().map(|p| (p.segment, p)).collect();
    for (curve, order) in &seq.place_order {
        let width = widths.get(curve).copied().unwrap_or(1) as f64;
        for seg in order {
            let place = by_seg[seg];
            if place.tokens.len() < 2 {
                return Err(Error::MissingTokens {
                    place: place.id.clone(),
                });
            }
            canvas.draw_segment(place.tokens[0], place.tokens[1], width, place.color, false);
        }
    }
    Ok(canvas)
}
