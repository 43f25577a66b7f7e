//! Least-model computation and derivation extraction.
//!
//! The least model is computed by naive forward chaining. Every derived atom
//! remembers the round in which it first appeared (facts are round 0). A
//! derivation resolves an atom with `fact` when possible, and otherwise with
//! the first rule, in source order, whose body atoms were all derived in an
//! earlier round. Body atoms therefore always have a strictly smaller round
//! than their parent, which keeps the derivation finite on cyclic programs
//! and needs no backtracking.

use std::collections::HashMap;

use super::{Atom, Program};

/// Atoms of the least model with the forward-chaining round that first
/// derived each.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LeastModel {
    rounds: HashMap<Atom, usize>,
}

impl LeastModel {
    pub fn contains(&self, atom: &Atom) -> bool {
        self.rounds.contains_key(atom)
    }

    pub fn round(&self, atom: &Atom) -> Option<usize> {
        self.rounds.get(atom).copied()
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }
}

pub fn least_model(program: &Program) -> LeastModel {
    let mut rounds: HashMap<Atom, usize> = program.facts.iter().map(|f| (f.clone(), 0)).collect();
    for round in 1.. {
        let fresh: Vec<&Atom> = program
            .rules
            .iter()
            .filter(|r| !rounds.contains_key(&r.head))
            .filter(|r| r.body.iter().all(|b| rounds.get(b).is_some_and(|&k| k < round)))
            .map(|r| &r.head)
            .collect();
        if fresh.is_empty() {
            break;
        }
        for head in fresh {
            rounds.entry(head.clone()).or_insert(round);
        }
    }
    LeastModel { rounds }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// How a derivation node was resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Fact,
    /// Index into [`Program::rules`].
    Rule(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationNode {
    pub atom: Atom,
    pub resolution: Resolution,
    /// One child per body atom of the resolving rule, in body order.
    pub children: Vec<NodeId>,
}

/// Proof of a query. Each atom is resolved once; repeated occurrences of an
/// atom share its node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTree {
    pub nodes: Vec<DerivationNode>,
}

impl DerivationTree {
    pub fn root(&self) -> &DerivationNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &DerivationNode {
        &self.nodes[id.0]
    }

    /// Node ids in depth-first pre-order from the root, each once.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![NodeId(0)];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.0], true) {
                continue;
            }
            order.push(id);
            stack.extend(self.node(id).children.iter().rev());
        }
        order
    }

    /// Indices of the rules used anywhere in the derivation.
    pub fn used_rules(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n.resolution {
                Resolution::Rule(i) => Some(i),
                Resolution::Fact => None,
            })
            .collect();
        used.sort_unstable();
        used.dedup();
        used
    }
}

/// Derives `query`, or returns `None` when it is not in the least model.
pub fn solve(program: &Program, query: &Atom) -> Option<DerivationTree> {
    let model = least_model(program);
    model.round(query)?;
    let mut tree = DerivationTree { nodes: Vec::new() };
    let mut node_of: HashMap<Atom, NodeId> = HashMap::new();
    resolve(program, &model, query, &mut tree, &mut node_of);
    Some(tree)
}

fn resolve(
    program: &Program,
    model: &LeastModel,
    atom: &Atom,
    tree: &mut DerivationTree,
    node_of: &mut HashMap<Atom, NodeId>,
) -> NodeId {
    if let Some(&id) = node_of.get(atom) {
        return id;
    }
    let id = NodeId(tree.nodes.len());
    node_of.insert(atom.clone(), id);
    if program.is_fact(atom) {
        tree.nodes.push(DerivationNode {
            atom: atom.clone(),
            resolution: Resolution::Fact,
            children: Vec::new(),
        });
        return id;
    }
    let round = model.round(atom).expect("only derivable atoms are resolved");
    let (index, rule) = program
        .rules
        .iter()
        .enumerate()
        .find(|(_, r)| {
            r.head == *atom && r.body.iter().all(|b| model.round(b).is_some_and(|k| k < round))
        })
        .expect("a derived atom has a rule from earlier rounds");
    tree.nodes.push(DerivationNode {
        atom: atom.clone(),
        resolution: Resolution::Rule(index),
        children: Vec::new(),
    });
    let children = rule
        .body
        .iter()
        .map(|b| resolve(program, model, b, tree, node_of))
        .collect();
    tree.nodes[id.0].children = children;
    id
}
