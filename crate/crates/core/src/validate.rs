//! Constraint checking of complete plans and side-by-side cost reports.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::instance::{Instance, YardId};
use crate::pathgen::shortest_distances;
use crate::solution::{block_flows, compute_costs, CostBreakdown, TbspSolution};

/// Feasibility tolerance, scaled by `max(1, |rhs|)`.
pub const FEAS_TOL: f64 = 1e-6;

/// Labels of the checked constraint families.
pub const FAMILIES: [&str; 12] = [
    "Eq2-flow",
    "Eq3-link",
    "Eq4-detour",
    "Eq5-frequency",
    "Eq6-chain",
    "Eq7-yard",
    "Eq8-tracks",
    "Eq9-track-lower",
    "Eq10-track-upper",
    "Eq12-intree",
    "Eq13-provided",
    "Eq14-consistency",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: &'static str,
    pub index: Vec<YardId>,
    pub lhs: f64,
    pub rhs: f64,
    pub magnitude: f64,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}[", self.family)?;
        for (k, i) in self.index.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "]: lhs {} vs rhs {} (by {:e})", self.lhs, self.rhs, self.magnitude)
    }
}

/// The plan cannot be read against the instance at all.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructuralError {
    #[error("unknown yard {0}")]
    UnknownYard(YardId),
    #[error("({0},{1}) is not a shipment of the instance")]
    NotAShipment(YardId, YardId),
    #[error("shipment ({0},{1}) has no path")]
    MissingPath(YardId, YardId),
    #[error("shipment ({0},{1}) has no block sequence")]
    MissingSequence(YardId, YardId),
    #[error("shipment ({0},{1}) listed twice")]
    Duplicate(YardId, YardId),
    #[error("block ({0},{1}) listed twice")]
    DuplicateBlock(YardId, YardId),
    #[error("block ({0},{1}) has a non-finite frequency")]
    BadFrequency(YardId, YardId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Recomputed from the plan, never copied from it.
    pub costs: CostBreakdown,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Distinct families with at least one violation.
    pub fn families(&self) -> BTreeSet<&'static str> {
        self.violations.iter().map(|v| v.family).collect()
    }
}

struct Sink {
    out: Vec<Violation>,
}

impl Sink {
    /// Records `lhs <= rhs` when broken.
    fn le(&mut self, family: &'static str, index: &[YardId], lhs: f64, rhs: f64) {
        let magnitude = lhs - rhs;
        if magnitude > FEAS_TOL * rhs.abs().max(1.0) {
            self.push(family, index, lhs, rhs, magnitude);
        }
    }

    fn eq(&mut self, family: &'static str, index: &[YardId], lhs: f64, rhs: f64) {
        let magnitude = (lhs - rhs).abs();
        if magnitude > FEAS_TOL * rhs.abs().max(1.0) {
            self.push(family, index, lhs, rhs, magnitude);
        }
    }

    /// A condition with no natural numeric sides: reported as 0 vs 1.
    fn fail(&mut self, family: &'static str, index: &[YardId]) {
        self.push(family, index, 0.0, 1.0, 1.0);
    }

    fn push(&mut self, family: &'static str, index: &[YardId], lhs: f64, rhs: f64, magnitude: f64) {
        self.out.push(Violation {
            family,
            index: index.to_vec(),
            lhs,
            rhs,
            magnitude,
        });
    }
}

fn arcs(nodes: &[YardId]) -> BTreeSet<(YardId, YardId)> {
    nodes.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Checks a walk from `from` to `to`: endpoints, existing links, no
/// repeated yard. Returns the length of a valid walk.
fn check_walk(inst: &Instance, sink: &mut Sink, index: &[YardId], nodes: &[YardId], from: YardId, to: YardId) -> Option<f64> {
    let mut ok = nodes.len() >= 2 && nodes[0] == from && nodes[nodes.len() - 1] == to;
    let distinct: BTreeSet<_> = nodes.iter().collect();
    ok &= distinct.len() == nodes.len();
    let mut length = Some(0.0);
    for w in nodes.windows(2) {
        let link = inst
            .index_of(w[0])
            .zip(inst.index_of(w[1]))
            .and_then(|(i, j)| inst.link_between(i, j));
        match link {
            Some(e) => length = length.map(|l| l + inst.link(e).length),
            None => length = None,
        }
    }
    ok &= length.is_some();
    if !ok {
        sink.fail("Eq2-flow", index);
        return None;
    }
    length
}

fn known(inst: &Instance, id: YardId) -> Result<usize, StructuralError> {
    inst.index_of(id).ok_or(StructuralError::UnknownYard(id))
}

fn check_structure(inst: &Instance, sol: &TbspSolution) -> Result<(), StructuralError> {
    let demanded: BTreeSet<(YardId, YardId)> = inst
        .shipments()
        .iter()
        .map(|&(o, d, _)| (inst.yard_id(o), inst.yard_id(d)))
        .collect();
    let mut seen = BTreeSet::new();
    for p in &sol.paths {
        for &y in p.nodes.iter().chain([&p.o, &p.d]) {
            known(inst, y)?;
        }
        if !demanded.contains(&(p.o, p.d)) {
            return Err(StructuralError::NotAShipment(p.o, p.d));
        }
        if !seen.insert((p.o, p.d)) {
            return Err(StructuralError::Duplicate(p.o, p.d));
        }
    }
    let mut seen_seq = BTreeSet::new();
    for s in &sol.sequences {
        for &(a, b) in &s.blocks {
            known(inst, a)?;
            known(inst, b)?;
        }
        if !demanded.contains(&(s.o, s.d)) {
            return Err(StructuralError::NotAShipment(s.o, s.d));
        }
        if !seen_seq.insert((s.o, s.d)) {
            return Err(StructuralError::Duplicate(s.o, s.d));
        }
    }
    for &(o, d) in &demanded {
        if !seen.contains(&(o, d)) {
            return Err(StructuralError::MissingPath(o, d));
        }
        if !seen_seq.contains(&(o, d)) {
            return Err(StructuralError::MissingSequence(o, d));
        }
    }
    let mut blocks = BTreeSet::new();
    for b in &sol.blocks {
        known(inst, b.p)?;
        known(inst, b.q)?;
        for &y in &b.route {
            known(inst, y)?;
        }
        if !blocks.insert((b.p, b.q)) {
            return Err(StructuralError::DuplicateBlock(b.p, b.q));
        }
        if !b.z.is_finite() {
            return Err(StructuralError::BadFrequency(b.p, b.q));
        }
    }
    Ok(())
}

/// Checks `sol` against every constraint family of the integrated model
/// and recomputes its costs.
pub fn validate(inst: &Instance, sol: &TbspSolution) -> Result<ValidationReport, StructuralError> {
    check_structure(inst, sol)?;
    let params = inst.params();
    let dist = shortest_distances(inst);
    let ix = |y: YardId| inst.index_of(y).unwrap();
    let detour_bound = |a: YardId, b: YardId| dist.get(ix(a), ix(b)).map(|d| params.detour_ratio * d);
    let mut sink = Sink { out: Vec::new() };

    // Paths and block routes are simple walks within the detour bound.
    for p in &sol.paths {
        if let Some(len) = check_walk(inst, &mut sink, &[p.o, p.d], &p.nodes, p.o, p.d) {
            if let Some(bound) = detour_bound(p.o, p.d) {
                sink.le("Eq4-detour", &[p.o, p.d], len, bound);
            }
        }
    }
    for b in &sol.blocks {
        if let Some(len) = check_walk(inst, &mut sink, &[b.p, b.q], &b.route, b.p, b.q) {
            if let Some(bound) = detour_bound(b.p, b.q) {
                sink.le("Eq4-detour", &[b.p, b.q], len, bound);
            }
        }
    }

    let provided: BTreeMap<(YardId, YardId), usize> = sol.blocks.iter().enumerate().map(|(k, b)| ((b.p, b.q), k)).collect();
    let flows = block_flows(inst, &sol.sequences);

    // Train count per link.
    let mut trains: BTreeMap<(YardId, YardId), f64> = BTreeMap::new();
    for b in &sol.blocks {
        for a in arcs(&b.route) {
            *trains.entry(a).or_insert(0.0) += b.z;
        }
    }
    for l in inst.links() {
        let t = trains.get(&(l.tail, l.head)).copied().unwrap_or(0.0);
        sink.le("Eq3-link", &[l.tail, l.head], t, l.train_capacity());
    }

    // Frequencies and sort tracks of provided blocks.
    let gamma = params.track_capacity;
    let mut tracks = vec![0.0; inst.yard_count()];
    for b in &sol.blocks {
        let flow = flows.get(&(b.p, b.q)).copied().unwrap_or(0.0);
        sink.eq("Eq5-frequency", &[b.p, b.q], params.train_size * b.z, flow);
        let w = b.w as f64;
        sink.le("Eq9-track-lower", &[b.p, b.q], gamma * (w - 1.0) + 1.0, flow);
        sink.le("Eq10-track-upper", &[b.p, b.q], flow, gamma * w);
        tracks[ix(b.p)] += w;
    }
    for (i, y) in inst.yards().iter().enumerate() {
        sink.le("Eq8-tracks", &[y.id], tracks[i], y.sort_tracks as f64);
    }

    // Block chains, reclassification load, intree rule, provision and
    // route consistency.
    let mut reclass = vec![0.0; inst.yard_count()];
    let mut next: BTreeMap<(YardId, YardId), BTreeSet<YardId>> = BTreeMap::new();
    for s in &sol.sequences {
        let cars = inst.cars(ix(s.o), ix(s.d));
        let chained = !s.blocks.is_empty()
            && s.blocks[0].0 == s.o
            && s.blocks[s.blocks.len() - 1].1 == s.d
            && s.blocks.windows(2).all(|w| w[0].1 == w[1].0)
            && s.blocks.iter().all(|&(p, q)| p != q);
        if !chained {
            sink.fail("Eq6-chain", &[s.o, s.d]);
        }
        let path_arcs = sol.path_of(s.o, s.d).map(|p| arcs(&p.nodes)).unwrap_or_default();
        for &(p, q) in &s.blocks {
            if q != s.d {
                reclass[ix(q)] += cars;
            }
            next.entry((s.d, p)).or_default().insert(q);
            match provided.get(&(p, q)) {
                None => sink.fail("Eq13-provided", &[s.o, s.d, p, q]),
                Some(&k) => {
                    let route = arcs(&sol.blocks[k].route);
                    if !route.is_subset(&path_arcs) {
                        sink.fail("Eq14-consistency", &[s.o, s.d, p, q]);
                    }
                }
            }
        }
    }
    for (i, y) in inst.yards().iter().enumerate() {
        sink.le("Eq7-yard", &[y.id], reclass[i], y.class_capacity * y.capacity_ratio);
    }
    for ((d, p), qs) in &next {
        if qs.len() > 1 {
            sink.le("Eq12-intree", &[*d, *p], qs.len() as f64, 1.0);
        }
    }
    // A pair has one route: a provided block that is also a shipment runs
    // along the shipment's path.
    for b in &sol.blocks {
        if let Some(p) = sol.path_of(b.p, b.q) {
            if p.nodes != b.route {
                sink.fail("Eq14-consistency", &[b.p, b.q, b.p, b.q]);
            }
        }
    }

    Ok(ValidationReport {
        violations: sink.out,
        costs: compute_costs(inst, sol),
    })
}

/// One side of a cost comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunSummary {
    pub costs: CostBreakdown,
    /// Seconds, when known.
    pub time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub name: &'static str,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `(b - a) / a`; `None` when undefined.
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

/// `(b - a) / a`, undefined for `a == 0`.
pub fn relative_deviation(a: f64, b: f64) -> Option<f64> {
    if a == 0.0 {
        None
    } else {
        Some((b - a) / a)
    }
}

/// Percentage with two decimals and the sign kept; `-0.00%` prints as
/// `0.00%`.
pub fn format_percent(dev: Option<f64>) -> String {
    match dev {
        None => String::from("n/a"),
        Some(x) => {
            let s = format!("{:.2}%", 100.0 * x);
            if s == "-0.00%" {
                String::from("0.00%")
            } else {
                s
            }
        }
    }
}

/// Thousands-separated number; whole values print without decimals.
pub fn format_number(x: f64) -> String {
    let neg = x < 0.0;
    let r = libm::round(x.abs() * 100.0) / 100.0;
    let int = libm::floor(r);
    let frac = libm::round((r - int) * 100.0) as u64;
    let digits = format!("{}", int as u64);
    let mut out = String::new();
    if neg && r != 0.0 {
        out.push('-');
    }
    for (k, ch) in digits.chars().enumerate() {
        if k > 0 && (digits.len() - k) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if frac != 0 {
        let _ = write!(out, ".{frac:02}");
    }
    out
}

/// Row-by-row comparison of two runs on the same instance.
pub fn compare_reports(a: &RunSummary, b: &RunSummary) -> Comparison {
    let row = |name, x: Option<f64>, y: Option<f64>| ComparisonRow {
        name,
        a: x,
        b: y,
        deviation: match (x, y) {
            (Some(x), Some(y)) => relative_deviation(x, y),
            _ => None,
        },
    };
    Comparison {
        rows: vec![
            row("Car mile (car-km)", Some(a.costs.car_km), Some(b.costs.car_km)),
            row("Accumulation (car-hour)", Some(a.costs.accumulation), Some(b.costs.accumulation)),
            row("Classification cost (car-hour)", Some(a.costs.reclassification), Some(b.costs.reclassification)),
            row("Total cost (car-hour)", Some(a.costs.total), Some(b.costs.total)),
            row("Run time (second)", a.time, b.time),
        ],
    }
}

impl Comparison {
    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Plain-text table with columns A, B and relative deviation.
    pub fn render(&self, label_a: &str, label_b: &str) -> String {
        let cell = |x: Option<f64>| x.map_or_else(|| String::from("--"), format_number);
        let mut out = String::new();
        let _ = writeln!(out, "{:<32} {:>16} {:>16} {:>20}", "", label_a, label_b, "Relative deviation");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<32} {:>16} {:>16} {:>20}",
                r.name,
                cell(r.a),
                cell(r.b),
                format_percent(r.deviation)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_formatting() {
        assert_eq!(format_percent(relative_deviation(99_072.0, 98_632.0)), "-0.44%");
        assert_eq!(format_percent(relative_deviation(2_119_046.0, 2_119_046.0)), "0.00%");
        assert_eq!(format_percent(Some(-1e-7)), "0.00%");
        assert_eq!(format_percent(relative_deviation(0.0, 5.0)), "n/a");
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(2_119_046.0), "2,119,046");
        assert_eq!(format_number(236_233.6), "236,233.60");
        assert_eq!(format_number(999.0), "999");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-1234.5), "-1,234.50");
    }
}
