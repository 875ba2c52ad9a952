//! Resource graphs built from uniform CP(φ) edges and their measurement schedules.
//!
//! Vertex ids are assigned in construction order: targets row-major, then for
//! every lattice edge (horizontal edges first, then vertical) and every line
//! the five-qubit part e1 a b c e2, the k left parts and the k right parts,
//! each part listed u1 m1..m5 u7.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::basis::{step_observables, StepObservable, WeightedBasis};
use crate::error::{Result, WgsError};
use crate::gadgets::{cz_bases, mep_bases, middle_pass, part_end_basis, EdgeRegisters, PartClass};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Target,
    Ancilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

/// Where a vertex sits in the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Position {
    Target { row: u32, col: u32 },
    /// Decorated-lattice chain qubit, index 0..3 from the lower-id target.
    Chain { edge: u32, index: u8 },
    /// Five-qubit part: slot 0 = e1, 1..=3 = a b c, 4 = e2.
    Cz { edge: u32, line: u32, slot: u8 },
    /// Seven-qubit part: slot 0 = u1, 1..=5 = m1..m5, 6 = u7.
    Part { edge: u32, line: u32, side: Side, part: u32, slot: u8 },
    /// Vertex of a custom graph.
    Free { index: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: u32,
    pub role: Role,
    pub pos: Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Lattice,
    /// m lines between two targets.
    EdgeGadget,
    Decorated,
    /// Arbitrary edges; no gadget layout.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub phi: f64,
}

/// Vertex ids of one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineLayout {
    /// e1, a, b, c, e2.
    pub cz: [u32; 5],
    pub left: Vec<[u32; 7]>,
    pub right: Vec<[u32; 7]>,
}

/// Targets and lines of one lattice edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLayout {
    pub t_l: u32,
    pub t_r: u32,
    pub lines: Vec<LineLayout>,
    /// Decorated lattice: the three chain qubits.
    pub chain: Option<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGraph {
    pub kind: GraphKind,
    pub params: Params,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub layout: Vec<EdgeLayout>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    version: u32,
    kind: GraphKind,
    params: Params,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// Lattice edges as (row, col) pairs, horizontal first.
fn lattice_edges(n: u32) -> Vec<((u32, u32), (u32, u32))> {
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n - 1 {
            out.push(((r, c), (r, c + 1)));
        }
    }
    for r in 0..n - 1 {
        for c in 0..n {
            out.push(((r, c), (r + 1, c)));
        }
    }
    out
}

struct Builder {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl Builder {
    fn add(&mut self, role: Role, pos: Position) -> u32 {
        let id = self.vertices.len() as u32;
        self.vertices.push(Vertex { id, role, pos });
        id
    }

    fn connect(&mut self, u: u32, v: u32) {
        self.edges.push(Edge { u, v, sign: 1 });
    }

    fn path(&mut self, ids: &[u32]) {
        for w in ids.windows(2) {
            self.connect(w[0], w[1]);
        }
    }

    fn targets(&mut self, rows: u32, cols: u32) {
        for row in 0..rows {
            for col in 0..cols {
                self.add(Role::Target, Position::Target { row, col });
            }
        }
    }
}

fn check(phi: f64, k: u32, m: u32) -> Result<()> {
    if k == 0 {
        return Err(WgsError::InvalidK(0));
    }
    if m == 0 || !phi.is_finite() || phi == 0.0 {
        return Err(WgsError::InvalidParams(format!("m={m} phi={phi}")));
    }
    Ok(())
}

fn add_lines(b: &mut Builder, edge: u32, t_l: u32, t_r: u32, k: u32, m: u32) {
    for line in 0..m {
        let cz: Vec<u32> = (0..5).map(|slot| b.add(Role::Ancilla, Position::Cz { edge, line, slot })).collect();
        b.path(&cz);
        for side in [Side::L, Side::R] {
            for part in 0..k {
                let ids: Vec<u32> =
                    (0..7).map(|slot| b.add(Role::Ancilla, Position::Part { edge, line, side, part, slot })).collect();
                b.path(&ids);
                match side {
                    Side::L => {
                        b.connect(t_l, ids[0]);
                        b.connect(ids[6], cz[0]);
                    }
                    Side::R => {
                        b.connect(cz[4], ids[0]);
                        b.connect(ids[6], t_r);
                    }
                }
            }
        }
    }
}

fn finish(kind: GraphKind, params: Params, b: Builder) -> Result<ResourceGraph> {
    let layout = derive_layout(kind, &params, &b.vertices, &b.edges)?;
    Ok(ResourceGraph { kind, params, vertices: b.vertices, edges: b.edges, layout })
}

/// One line (5 + 14k ancillas) between two targets.
pub fn build_line(k: u32, phi: f64) -> Result<ResourceGraph> {
    build_edge_gadget(k, 1, phi)
}

/// m parallel lines between two targets.
pub fn build_edge_gadget(k: u32, m: u32, phi: f64) -> Result<ResourceGraph> {
    check(phi, k, m)?;
    let mut b = Builder { vertices: Vec::new(), edges: Vec::new() };
    b.targets(1, 2);
    add_lines(&mut b, 0, 0, 1, k, m);
    finish(GraphKind::EdgeGadget, Params { n: 2, k, m, phi }, b)
}

/// n×n targets with every lattice edge replaced by an edge gadget.
pub fn build_lattice(n: u32, k: u32, m: u32, phi: f64) -> Result<ResourceGraph> {
    if n < 2 {
        return Err(WgsError::InvalidParams(format!("n={n} must be at least 2")));
    }
    check(phi, k, m)?;
    let mut b = Builder { vertices: Vec::new(), edges: Vec::new() };
    b.targets(n, n);
    for (e, ((r0, c0), (r1, c1))) in lattice_edges(n).into_iter().enumerate() {
        add_lines(&mut b, e as u32, r0 * n + c0, r1 * n + c1, k, m);
    }
    finish(GraphKind::Lattice, Params { n, k, m, phi }, b)
}

/// A graph from explicit roles and weighted edges (for tests and small gadgets).
pub fn build_custom(roles: &[Role], edges: &[(u32, u32)], phi: f64) -> Result<ResourceGraph> {
    let vertices = roles
        .iter()
        .enumerate()
        .map(|(i, &role)| Vertex { id: i as u32, role, pos: Position::Free { index: i as u32 } })
        .collect();
    let edges = edges.iter().map(|&(u, v)| Edge { u, v, sign: 1 }).collect();
    let b = Builder { vertices, edges };
    finish(GraphKind::Custom, Params { n: 0, k: 0, m: 0, phi }, b)
}

/// n×n targets with every lattice edge replaced by a three-qubit chain.
pub fn build_decorated_lattice(n: u32, phi: f64) -> Result<ResourceGraph> {
    if n < 2 {
        return Err(WgsError::InvalidParams(format!("n={n} must be at least 2")));
    }
    check(phi, 1, 1)?;
    let mut b = Builder { vertices: Vec::new(), edges: Vec::new() };
    b.targets(n, n);
    for (e, ((r0, c0), (r1, c1))) in lattice_edges(n).into_iter().enumerate() {
        let ids: Vec<u32> = (0..3).map(|index| b.add(Role::Ancilla, Position::Chain { edge: e as u32, index })).collect();
        b.path(&[r0 * n + c0, ids[0], ids[1], ids[2], r1 * n + c1]);
    }
    finish(GraphKind::Decorated, Params { n, k: 0, m: 0, phi }, b)
}

fn derive_layout(kind: GraphKind, params: &Params, vertices: &[Vertex], edges: &[Edge]) -> Result<Vec<EdgeLayout>> {
    let bad = |s: &str| WgsError::InvalidParams(s.to_string());
    if kind == GraphKind::Custom {
        for (i, v) in vertices.iter().enumerate() {
            if v.id as usize != i {
                return Err(bad("vertex ids must be 0..len in order"));
            }
        }
        if edges.iter().any(|e| e.u as usize >= vertices.len() || e.v as usize >= vertices.len() || e.u == e.v) {
            return Err(bad("bad edge endpoint"));
        }
        return Ok(Vec::new());
    }
    let (n, k, m) = (params.n, params.k as usize, params.m as usize);
    let pairs = match kind {
        GraphKind::EdgeGadget => vec![((0, 0), (0, 1))],
        _ => lattice_edges(n),
    };
    let mut target_id = std::collections::HashMap::new();
    for v in vertices {
        if let Position::Target { row, col } = v.pos {
            target_id.insert((row, col), v.id);
        }
    }
    let tid = |rc: (u32, u32)| target_id.get(&rc).copied().ok_or_else(|| bad("missing target"));
    let mut layout: Vec<EdgeLayout> = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        layout.push(EdgeLayout {
            t_l: tid(a)?,
            t_r: tid(b)?,
            lines: (0..if kind == GraphKind::Decorated { 0 } else { m })
                .map(|_| LineLayout { cz: [u32::MAX; 5], left: vec![[u32::MAX; 7]; k], right: vec![[u32::MAX; 7]; k] })
                .collect(),
            chain: (kind == GraphKind::Decorated).then_some([u32::MAX; 3]),
        });
    }
    for v in vertices {
        match v.pos {
            Position::Target { .. } => {}
            Position::Free { .. } => return Err(bad("free vertex in a structured graph")),
            Position::Chain { edge, index } => {
                let c = layout.get_mut(edge as usize).and_then(|e| e.chain.as_mut()).ok_or_else(|| bad("chain edge"))?;
                *c.get_mut(index as usize).ok_or_else(|| bad("chain index"))? = v.id;
            }
            Position::Cz { edge, line, slot } => {
                let l = layout.get_mut(edge as usize).and_then(|e| e.lines.get_mut(line as usize)).ok_or_else(|| bad("line"))?;
                *l.cz.get_mut(slot as usize).ok_or_else(|| bad("slot"))? = v.id;
            }
            Position::Part { edge, line, side, part, slot } => {
                let l = layout.get_mut(edge as usize).and_then(|e| e.lines.get_mut(line as usize)).ok_or_else(|| bad("line"))?;
                let parts = if side == Side::L { &mut l.left } else { &mut l.right };
                let p = parts.get_mut(part as usize).ok_or_else(|| bad("part"))?;
                *p.get_mut(slot as usize).ok_or_else(|| bad("slot"))? = v.id;
            }
        }
    }
    for e in &layout {
        let missing = e.chain.iter().flatten().any(|&x| x == u32::MAX)
            || e.lines.iter().any(|l| {
                l.cz.contains(&u32::MAX) || l.left.iter().chain(&l.right).any(|p| p.contains(&u32::MAX))
            });
        if missing {
            return Err(bad("incomplete layout"));
        }
    }
    for (i, v) in vertices.iter().enumerate() {
        if v.id as usize != i {
            return Err(bad("vertex ids must be 0..len in order"));
        }
    }
    if edges.iter().any(|e| e.u as usize >= vertices.len() || e.v as usize >= vertices.len()) {
        return Err(bad("edge endpoint out of range"));
    }
    Ok(layout)
}

impl ResourceGraph {
    pub fn num_qubits(&self) -> usize {
        self.vertices.len()
    }

    pub fn targets(&self) -> Vec<u32> {
        self.vertices.iter().filter(|v| v.role == Role::Target).map(|v| v.id).collect()
    }

    pub fn ancilla_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.role == Role::Ancilla).count()
    }

    pub fn degree(&self, id: u32) -> usize {
        self.edges.iter().filter(|e| e.u == id || e.v == id).count()
    }

    pub fn to_json(&self) -> String {
        let f = GraphFile {
            version: FORMAT_VERSION,
            kind: self.kind,
            params: self.params,
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&f).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(s).map_err(|e| WgsError::InvalidParams(e.to_string()))?;
        if f.version != FORMAT_VERSION {
            return Err(WgsError::InvalidParams(format!("unsupported version {}", f.version)));
        }
        let layout = derive_layout(f.kind, &f.params, &f.vertices, &f.edges)?;
        Ok(ResourceGraph { kind: f.kind, params: f.params, vertices: f.vertices, edges: f.edges, layout })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph wgs {\n");
        let _ = writeln!(s, "  graph [phi=\"{}\", n={}, k={}, m={}];", self.params.phi, self.params.n, self.params.k, self.params.m);
        for v in &self.vertices {
            let (color, shape) = match v.role {
                Role::Target => ("red", "doublecircle"),
                Role::Ancilla => ("gray", "circle"),
            };
            let _ = writeln!(s, "  q{} [role={:?}, color={color}, shape={shape}];", v.id, format!("{:?}", v.role).to_lowercase());
        }
        for e in &self.edges {
            let _ = writeln!(s, "  q{} -- q{} [weight=\"{}\"];", e.u, e.v, e.sign as f64 * self.params.phi);
        }
        s.push_str("}\n");
        s
    }

    /// Euler-formula planarity bound E ≤ 3V − 6 and the construction's own
    /// layout: each gadget is a set of internally disjoint paths between two
    /// lattice neighbours, which embeds in the face next to the lattice edge.
    pub fn is_planar_by_construction(&self) -> bool {
        let v = self.vertices.len();
        let paths_ok = self.vertices.iter().all(|x| x.role == Role::Target || self.degree(x.id) <= 2 + self.params.k as usize);
        v < 3 || (self.edges.len() <= 3 * v - 6 && paths_ok)
    }
}

// ---------------------------------------------------------------------------
// Schedule

/// Line-selection rule: a line is selected when its own CZ outcomes are all
/// −1 and every earlier line of the same edge failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub own: [u32; 3],
    pub earlier: Vec<[u32; 3]>,
}

impl Selection {
    fn qubits(&self) -> Vec<u32> {
        self.own.iter().chain(self.earlier.iter().flatten()).copied().collect()
    }

    pub fn selected(&self, out: &[Option<u8>]) -> Option<bool> {
        let ok = |q: &[u32; 3]| -> Option<bool> {
            let mut all = true;
            for &x in q {
                all &= out.get(x as usize).copied().flatten()? == 0;
            }
            Some(all)
        };
        let mut sel = ok(&self.own)?;
        for e in &self.earlier {
            sel &= !ok(e)?;
        }
        Some(sel)
    }
}

/// Basis of one scheduled measurement, possibly a function of earlier outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    Fixed(StepObservable<f64>),
    Explicit(WeightedBasis),
    /// Fifth MEP middle measurement, depends on the center outcome.
    MepLast { center: u32 },
    /// Part end: X_1 when the middle passes and the line is selected, else Z.
    PartEnd { middle: [u32; 5], selection: Selection },
    /// e1/e2: X_{n^z + (n+1)/2} over the adjacent side's parts, Z when unselected.
    Final { parts: Vec<([u32; 5], u32)>, selection: Selection },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledMeasurement {
    pub qubit: u32,
    pub basis: BasisSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSchedule {
    pub steps: Vec<Vec<ScheduledMeasurement>>,
}

fn bit(out: &[Option<u8>], q: u32) -> Result<u8> {
    out.get(q as usize)
        .copied()
        .flatten()
        .ok_or_else(|| WgsError::UnscheduledGraph(format!("outcome of qubit {q} not yet available")))
}

fn mid_bits(out: &[Option<u8>], mid: &[u32; 5]) -> Result<[u8; 5]> {
    let mut b = [0u8; 5];
    for (x, &q) in b.iter_mut().zip(mid) {
        *x = bit(out, q)?;
    }
    Ok(b)
}

fn selected(s: &Selection, out: &[Option<u8>]) -> Result<bool> {
    s.selected(out).ok_or_else(|| WgsError::UnscheduledGraph("line selection outcomes missing".into()))
}

impl BasisSpec {
    /// Qubits whose outcomes this basis depends on.
    pub fn depends_on(&self) -> Vec<u32> {
        match self {
            BasisSpec::Fixed(_) | BasisSpec::Explicit(_) => vec![],
            BasisSpec::MepLast { center } => vec![*center],
            BasisSpec::PartEnd { middle, selection } => {
                let mut v = middle.to_vec();
                v.extend(selection.qubits());
                v
            }
            BasisSpec::Final { parts, selection } => {
                let mut v: Vec<u32> = parts.iter().flat_map(|(m, e)| m.iter().copied().chain([*e])).collect();
                v.extend(selection.qubits());
                v
            }
        }
    }

    /// Resolve against recorded outcomes, indexed by qubit id.
    pub fn resolve(&self, phi: f64, out: &[Option<u8>]) -> Result<WeightedBasis> {
        Ok(match self {
            BasisSpec::Fixed(o) => step_observables(*o, phi),
            BasisSpec::Explicit(b) => *b,
            BasisSpec::MepLast { center } => mep_bases(phi, bit(out, *center)?)[4],
            BasisSpec::PartEnd { middle, selection } => {
                let pass = selected(selection, out)? && middle_pass(&mid_bits(out, middle)?).0;
                part_end_basis(phi, pass)
            }
            BasisSpec::Final { parts, selection } => {
                if !selected(selection, out)? {
                    return Ok(part_end_basis(phi, false));
                }
                let (mut n, mut nz) = (0.0, 0.0);
                for (mid, end) in parts {
                    if middle_pass(&mid_bits(out, mid)?).0 {
                        n += 1.0;
                    } else {
                        nz += (1 - bit(out, *end)?) as f64;
                    }
                }
                step_observables(StepObservable::X(nz + (n + 1.0) / 2.0), phi)
            }
        })
    }
}

fn selection(e: &EdgeLayout, line: usize) -> Selection {
    let abc = |l: &LineLayout| [l.cz[1], l.cz[2], l.cz[3]];
    Selection { own: abc(&e.lines[line]), earlier: e.lines[..line].iter().map(abc).collect() }
}

fn middle(p: &[u32; 7]) -> [u32; 5] {
    [p[1], p[2], p[3], p[4], p[5]]
}

/// The measurement schedule: one step for the decorated lattice, four otherwise.
pub fn schedule(g: &ResourceGraph) -> Result<MeasurementSchedule> {
    let fixed = |qubit: u32, o: StepObservable<f64>| ScheduledMeasurement { qubit, basis: BasisSpec::Fixed(o) };
    if g.kind == GraphKind::Custom {
        return Err(WgsError::UnscheduledGraph("custom graphs have no built-in schedule".into()));
    }
    if g.kind == GraphKind::Decorated {
        let bases = [StepObservable::XEta(-1, 1), StepObservable::Y(1), StepObservable::XEta(-1, -1)];
        let mut step = Vec::new();
        for e in &g.layout {
            let c = e.chain.ok_or_else(|| WgsError::UnscheduledGraph("decorated edge without chain".into()))?;
            step.extend(c.iter().zip(bases).map(|(&q, o)| fixed(q, o)));
        }
        step.sort_by_key(|s| s.qubit);
        return Ok(MeasurementSchedule { steps: vec![step] });
    }
    let mep = [StepObservable::XEta(1, -1), StepObservable::Y(-1), StepObservable::X(1.0), StepObservable::Y(1)];
    let cz = [StepObservable::XEta(-1, 1), StepObservable::Y(1), StepObservable::XEta(-1, -1)];
    let mut steps: Vec<Vec<ScheduledMeasurement>> = vec![Vec::new(); 4];
    for e in &g.layout {
        for (li, l) in e.lines.iter().enumerate() {
            let sel = selection(e, li);
            for (q, o) in l.cz[1..4].iter().zip(cz) {
                steps[0].push(fixed(*q, o));
            }
            for p in l.left.iter().chain(&l.right) {
                for (q, o) in p[1..5].iter().zip(mep) {
                    steps[0].push(fixed(*q, o));
                }
                steps[1].push(ScheduledMeasurement { qubit: p[5], basis: BasisSpec::MepLast { center: p[3] } });
                for end in [p[0], p[6]] {
                    steps[2].push(ScheduledMeasurement {
                        qubit: end,
                        basis: BasisSpec::PartEnd { middle: middle(p), selection: sel.clone() },
                    });
                }
            }
            let left_parts = l.left.iter().map(|p| (middle(p), p[6])).collect();
            let right_parts = l.right.iter().map(|p| (middle(p), p[0])).collect();
            steps[3].push(ScheduledMeasurement { qubit: l.cz[0], basis: BasisSpec::Final { parts: left_parts, selection: sel.clone() } });
            steps[3].push(ScheduledMeasurement { qubit: l.cz[4], basis: BasisSpec::Final { parts: right_parts, selection: sel } });
        }
    }
    for s in &mut steps {
        s.sort_by_key(|m| m.qubit);
    }
    let sched = MeasurementSchedule { steps };
    sched.validate(g)?;
    Ok(sched)
}

impl MeasurementSchedule {
    /// Every ancilla exactly once, no target, dependencies only on earlier steps.
    pub fn validate(&self, g: &ResourceGraph) -> Result<()> {
        let mut step_of = vec![None; g.num_qubits()];
        for (s, step) in self.steps.iter().enumerate() {
            for m in step {
                let slot = step_of
                    .get_mut(m.qubit as usize)
                    .ok_or_else(|| WgsError::UnscheduledGraph(format!("qubit {} not in graph", m.qubit)))?;
                if slot.is_some() {
                    return Err(WgsError::UnscheduledGraph(format!("qubit {} measured twice", m.qubit)));
                }
                *slot = Some(s);
            }
        }
        for v in &g.vertices {
            match (v.role, step_of[v.id as usize]) {
                (Role::Target, Some(_)) => return Err(WgsError::UnscheduledGraph(format!("target {} measured", v.id))),
                (Role::Ancilla, None) => return Err(WgsError::UnscheduledGraph(format!("ancilla {} unmeasured", v.id))),
                _ => {}
            }
        }
        for (s, step) in self.steps.iter().enumerate() {
            for m in step {
                for d in m.basis.depends_on() {
                    match step_of.get(d as usize).copied().flatten() {
                        Some(ds) if ds < s => {}
                        _ => {
                            return Err(WgsError::UnscheduledGraph(format!(
                                "qubit {} in step {} depends on qubit {d} not measured earlier",
                                m.qubit,
                                s + 1
                            )))
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measurements in execution order.
    pub fn flatten(&self) -> impl Iterator<Item = &ScheduledMeasurement> {
        self.steps.iter().flatten()
    }
}

fn part_class(out: &[Option<u8>], p: &[u32; 7]) -> Result<PartClass> {
    let (pass, sign) = middle_pass(&mid_bits(out, &middle(p))?);
    let (l, r) = (bit(out, p[0])?, bit(out, p[6])?);
    Ok(if pass { PartClass::Pass { sign, end_l: l, end_r: r } } else { PartClass::Fail { bz_l: 1 - l, bz_r: 1 - r } })
}

/// Registers of lattice edge `edge` from a complete outcome record; `line` is
/// None when no line was selected.
pub fn edge_registers(g: &ResourceGraph, edge: usize, out: &[Option<u8>]) -> Result<EdgeRegisters> {
    let e = g.layout.get(edge).ok_or_else(|| WgsError::InvalidParams(format!("edge {edge}")))?;
    let mut regs = EdgeRegisters::default();
    let mut sel = None;
    for li in 0..e.lines.len() {
        if selected(&selection(e, li), out)? {
            sel = Some(li);
        }
    }
    let Some(li) = sel else { return Ok(regs) };
    regs.line = Some(li as u32);
    let l = &e.lines[li];
    for p in &l.left {
        regs.left.push(&part_class(out, p)?);
    }
    for p in &l.right {
        regs.right.push(&part_class(out, p)?);
    }
    for (oi, o) in e.lines.iter().enumerate() {
        if oi == li {
            continue;
        }
        for p in &o.left {
            regs.nz_big_l += (1 - bit(out, p[0])?) as u32;
        }
        for p in &o.right {
            regs.nz_big_r += (1 - bit(out, p[6])?) as u32;
        }
    }
    regs.b_l = 1 - bit(out, l.cz[0])?;
    regs.b_r = 1 - bit(out, l.cz[4])?;
    regs.b_p = u8::from(regs.left.sign != regs.right.sign);
    Ok(regs)
}

/// Whether a complete record heralds success on this edge.
pub fn edge_success(g: &ResourceGraph, edge: usize, out: &[Option<u8>]) -> Result<bool> {
    let e = g.layout.get(edge).ok_or_else(|| WgsError::InvalidParams(format!("edge {edge}")))?;
    if let Some(c) = e.chain {
        return Ok(c.iter().all(|&q| out.get(q as usize).copied().flatten() == Some(0)));
    }
    let r = edge_registers(g, edge, out)?;
    Ok(r.line.is_some() && r.left.success() && r.right.success() && r.left.sign != 2 && r.right.sign != 2)
}

/// Fixed CZ_+ bases of a decorated chain, for reference.
pub fn decorated_bases(phi: f64) -> [WeightedBasis; 3] {
    cz_bases(1, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::qubit_count;

    #[test]
    fn counts() {
        assert_eq!(build_line(1, 1.0).unwrap().ancilla_count(), 19);
        assert_eq!(build_line(3, 1.0).unwrap().ancilla_count(), 47);
        assert_eq!(build_edge_gadget(3, 3, 1.0).unwrap().ancilla_count(), 141);
        let g = build_lattice(2, 1, 1, 1.0).unwrap();
        assert_eq!((g.targets().len(), g.ancilla_count()), (4, 76));
        assert_eq!(build_lattice(3, 3, 3, 1.0).unwrap().ancilla_count() as u64, qubit_count(3, 3, 3));
        assert_eq!(build_decorated_lattice(2, 1.0).unwrap().num_qubits(), 16);
    }

    #[test]
    fn schedules() {
        let g = build_lattice(2, 2, 2, 0.9).unwrap();
        let s = schedule(&g).unwrap();
        assert_eq!(s.steps.len(), 4);
        assert_eq!(s.len(), g.ancilla_count());
        let d = schedule(&build_decorated_lattice(2, 0.9).unwrap()).unwrap();
        assert_eq!(d.steps.len(), 1);
        assert!(d.flatten().all(|m| m.basis.depends_on().is_empty()));
    }

    #[test]
    fn json_roundtrip() {
        let g = build_edge_gadget(2, 2, 0.7).unwrap();
        let back = ResourceGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }
}
