//! Graph documents for `GET /models/{name}/graph`.
//!
//! Small models are returned whole. Models above [`PAGE_THRESHOLD`] nodes,
//! or any request naming an `anchor`, get a neighbourhood form: the entities
//! within `radius` relation hops of the anchor (relations taken as undirected),
//! ordered by distance then id and cut into pages of [`PAGE_SIZE`] nodes.
//! Each edge inside the neighbourhood is listed on its explanandum's page.

use std::collections::{BTreeMap, VecDeque};

use explainer_core::dialogue::EntityView;
use explainer_core::{EntityId, MentalModel, RelationId};
use serde::{Deserialize, Serialize};

pub const PAGE_THRESHOLD: usize = 5_000;
pub const PAGE_SIZE: usize = 5_000;
pub const DEFAULT_RADIUS: usize = 1;

#[derive(Debug, Clone, Default, Deserialize)]
pub struct GraphQuery {
    /// Entity id or entity name.
    pub anchor: Option<String>,
    pub radius: Option<usize>,
    /// Zero-based page number.
    pub page: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    pub id: RelationId,
    pub template: String,
    pub reason: String,
    pub priority: i64,
    pub explanan: EntityId,
    pub explanandum: EntityId,
}

#[derive(Debug, Clone, Serialize)]
pub struct Paging {
    pub anchor: EntityId,
    pub radius: usize,
    pub page: usize,
    pub page_count: usize,
    pub page_size: usize,
    /// Nodes in the whole neighbourhood, across pages.
    pub neighbourhood_size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphDocument {
    pub model: String,
    pub node_count: usize,
    pub edge_count: usize,
    pub root_output: Option<EntityId>,
    /// Present when the response is a neighbourhood page.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paging: Option<Paging>,
    pub nodes: Vec<EntityView>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    UnknownAnchor(String),
    NoAnchor,
    PageOutOfRange { page: usize, page_count: usize },
}

fn edge(mm: &MentalModel, id: RelationId) -> Edge {
    let r = mm.relation(id).expect("relation exists");
    let t = mm.template(r.template);
    Edge {
        id,
        template: t.name.clone(),
        reason: t.reason.clone(),
        priority: t.priority,
        explanan: r.explanan,
        explanandum: r.explanandum,
    }
}

fn resolve_anchor(mm: &MentalModel, anchor: &str) -> Option<EntityId> {
    if let Ok(n) = anchor.parse::<u32>() {
        return mm.entity(EntityId(n)).map(|e| e.id);
    }
    mm.entities().iter().find(|e| e.name == anchor).map(|e| e.id)
}

/// Entities within `radius` undirected hops of `anchor`, with their distance.
fn neighbourhood(mm: &MentalModel, anchor: EntityId, radius: usize) -> Vec<(usize, EntityId)> {
    let mut adjacent: Vec<Vec<EntityId>> = vec![Vec::new(); mm.entities().len()];
    for r in mm.relations() {
        adjacent[r.explanan.index()].push(r.explanandum);
        adjacent[r.explanandum.index()].push(r.explanan);
    }
    let mut distance: Vec<Option<usize>> = vec![None; mm.entities().len()];
    distance[anchor.index()] = Some(0);
    let mut queue = VecDeque::from([anchor]);
    while let Some(id) = queue.pop_front() {
        let d = distance[id.index()].expect("queued nodes have a distance");
        if d == radius {
            continue;
        }
        for &next in &adjacent[id.index()] {
            if distance[next.index()].is_none() {
                distance[next.index()] = Some(d + 1);
                queue.push_back(next);
            }
        }
    }
    let mut found: Vec<(usize, EntityId)> = distance
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.map(|d| (d, mm.entities()[i].id)))
        .collect();
    found.sort_unstable();
    found
}

pub fn graph_document(name: &str, mm: &MentalModel, query: &GraphQuery) -> Result<GraphDocument, GraphError> {
    let mut doc = GraphDocument {
        model: name.to_owned(),
        node_count: mm.entities().len(),
        edge_count: mm.relations().len(),
        root_output: mm.root_output(),
        paging: None,
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    if query.anchor.is_none() && mm.entities().len() <= PAGE_THRESHOLD {
        doc.nodes = mm.entities().iter().map(|e| EntityView::new(mm, e)).collect();
        doc.edges = mm.relations().iter().map(|r| edge(mm, r.id)).collect();
        return Ok(doc);
    }

    let anchor = match &query.anchor {
        Some(a) => resolve_anchor(mm, a).ok_or_else(|| GraphError::UnknownAnchor(a.clone()))?,
        None => mm.root_output().ok_or(GraphError::NoAnchor)?,
    };
    let radius = query.radius.unwrap_or(DEFAULT_RADIUS);
    let page = query.page.unwrap_or(0);
    let members = neighbourhood(mm, anchor, radius);
    let page_count = members.len().div_ceil(PAGE_SIZE);
    if page >= page_count {
        return Err(GraphError::PageOutOfRange { page, page_count });
    }
    // page of every neighbourhood member
    let page_of: BTreeMap<EntityId, usize> = members
        .iter()
        .enumerate()
        .map(|(i, &(_, id))| (id, i / PAGE_SIZE))
        .collect();
    doc.nodes = members
        .iter()
        .skip(page * PAGE_SIZE)
        .take(PAGE_SIZE)
        .map(|&(_, id)| EntityView::new(mm, mm.entity(id).expect("entity exists")))
        .collect();
    doc.edges = mm
        .relations()
        .iter()
        .filter(|r| page_of.contains_key(&r.explanan) && page_of.get(&r.explanandum) == Some(&page))
        .map(|r| edge(mm, r.id))
        .collect();
    doc.paging = Some(Paging {
        anchor,
        radius,
        page,
        page_count,
        page_size: PAGE_SIZE,
        neighbourhood_size: members.len(),
    });
    Ok(doc)
}
