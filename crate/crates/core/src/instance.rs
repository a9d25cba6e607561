//! Problem data: yards, directed links, shipments and the scalar parameters.
//!
//! An [`Instance`] is immutable once constructed. Yards, links and demands
//! are stored sorted by their natural keys, so the dense index of a yard is
//! its rank in id order and lexicographic comparisons over dense indices
//! agree with comparisons over yard ids.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// External yard identifier, as written in instance files.
pub type YardId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Yard {
    pub id: YardId,
    /// Reclassification delay, hours per car.
    pub reclass_delay: f64,
    /// Original classification capacity, cars.
    pub class_capacity: f64,
    /// Number of sort tracks.
    pub sort_tracks: u32,
    /// Available ratio of the classification capacity.
    pub capacity_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub tail: YardId,
    pub head: YardId,
    /// Length in km.
    pub length: f64,
    /// Capacity in trains.
    pub capacity: f64,
    /// Remaining rate of the capacity.
    pub remaining_rate: f64,
}

impl Link {
    /// Usable train capacity `f * alpha`.
    pub fn train_capacity(&self) -> f64 {
        self.capacity * self.remaining_rate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    pub origin: YardId,
    pub destination: YardId,
    /// Number of cars.
    pub cars: f64,
}

/// Per-pair accumulation parameter overriding the global default.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationOverride {
    pub from: YardId,
    pub to: YardId,
    pub hours: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Train size `m`, cars.
    pub train_size: f64,
    /// Sort track capacity `gamma`, cars per track.
    pub track_capacity: f64,
    /// Detour ratio threshold `epsilon`.
    pub detour_ratio: f64,
    /// Car-km to car-hour conversion factor `lambda`.
    pub km_factor: f64,
    /// Accumulation parameter used for pairs without an override.
    pub accumulation_default: f64,
    pub accumulation_overrides: Vec<AccumulationOverride>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("duplicate yard id {0}")]
    DuplicateYard(YardId),
    #[error("yard {id}: {field} out of range ({value})")]
    YardField {
        id: YardId,
        field: &'static str,
        value: f64,
    },
    #[error("link ({tail},{head}): {reason}")]
    LinkField {
        tail: YardId,
        head: YardId,
        reason: &'static str,
    },
    #[error("link ({tail},{head}) references unknown yard {missing}")]
    LinkUnknownYard {
        tail: YardId,
        head: YardId,
        missing: YardId,
    },
    #[error("duplicate link ({0},{1})")]
    DuplicateLink(YardId, YardId),
    #[error("demand ({origin},{destination}): {reason}")]
    DemandField {
        origin: YardId,
        destination: YardId,
        reason: &'static str,
    },
    #[error("duplicate demand ({0},{1})")]
    DuplicateDemand(YardId, YardId),
    #[error("demand ({0},{1}) is not connected in the link graph")]
    Unreachable(YardId, YardId),
    #[error("parameter {field} out of range ({value})")]
    Param { field: &'static str, value: f64 },
    #[error("accumulation override ({from},{to}): {reason}")]
    Override {
        from: YardId,
        to: YardId,
        reason: &'static str,
    },
}

/// Aggregate counts reported by [`Instance::summarize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSummary {
    pub yards: usize,
    pub links: usize,
    pub demand_pairs: usize,
    pub total_cars: f64,
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    yards: Vec<Yard>,
    links: Vec<Link>,
    demands: Vec<Demand>,
    params: Params,
    yard_index: BTreeMap<YardId, usize>,
    // dense (tail, head) -> link index
    link_index: BTreeMap<(usize, usize), usize>,
    out_links: Vec<Vec<usize>>,
    in_links: Vec<Vec<usize>>,
    overrides: BTreeMap<(usize, usize), f64>,
}

fn is_integral(x: f64) -> bool {
    x.is_finite() && libm::floor(x) == x
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl Instance {
    /// Validates the raw data and builds the instance. Collections are
    /// normalized into sorted order.
    pub fn new(
        mut yards: Vec<Yard>,
        mut links: Vec<Link>,
        mut demands: Vec<Demand>,
        mut params: Params,
    ) -> Result<Self, InstanceError> {
        yards.sort_by_key(|y| y.id);
        links.sort_by_key(|l| (l.tail, l.head));
        demands.sort_by_key(|d| (d.origin, d.destination));
        params
            .accumulation_overrides
            .sort_by_key(|o| (o.from, o.to));

        let mut yard_index = BTreeMap::new();
        for (k, y) in yards.iter().enumerate() {
            if yard_index.insert(y.id, k).is_some() {
                return Err(InstanceError::DuplicateYard(y.id));
            }
            let bad = |field, value| InstanceError::YardField {
                id: y.id,
                field,
                value,
            };
            if !(y.reclass_delay >= 0.0 && y.reclass_delay.is_finite()) {
                return Err(bad("reclass_delay", y.reclass_delay));
            }
            if !(y.class_capacity >= 0.0) {
                return Err(bad("class_capacity", y.class_capacity));
            }
            if !in_unit(y.capacity_ratio) {
                return Err(bad("capacity_ratio", y.capacity_ratio));
            }
        }

        let p = &params;
        let param = |field, value| InstanceError::Param { field, value };
        if !(p.train_size > 0.0 && p.train_size.is_finite()) {
            return Err(param("train_size", p.train_size));
        }
        // Track rows add one car to the flow, so track capacity is a whole car count.
        if !(p.track_capacity >= 1.0 && is_integral(p.track_capacity)) {
            return Err(param("track_capacity", p.track_capacity));
        }
        if !(p.detour_ratio >= 1.0 && p.detour_ratio.is_finite()) {
            return Err(param("detour_ratio", p.detour_ratio));
        }
        if !(p.km_factor >= 0.0 && p.km_factor.is_finite()) {
            return Err(param("km_factor", p.km_factor));
        }
        if !(p.accumulation_default >= 0.0 && p.accumulation_default.is_finite()) {
            return Err(param("accumulation_default", p.accumulation_default));
        }

        let n = yards.len();
        let mut link_index = BTreeMap::new();
        let mut out_links = vec![Vec::new(); n];
        let mut in_links = vec![Vec::new(); n];
        for (e, l) in links.iter().enumerate() {
            let err = |reason| InstanceError::LinkField {
                tail: l.tail,
                head: l.head,
                reason,
            };
            let Some(&i) = yard_index.get(&l.tail) else {
                return Err(InstanceError::LinkUnknownYard {
                    tail: l.tail,
                    head: l.head,
                    missing: l.tail,
                });
            };
            let Some(&j) = yard_index.get(&l.head) else {
                return Err(InstanceError::LinkUnknownYard {
                    tail: l.tail,
                    head: l.head,
                    missing: l.head,
                });
            };
            if i == j {
                return Err(err("self loop"));
            }
            if !(l.length > 0.0 && l.length.is_finite()) {
                return Err(err("length must be positive"));
            }
            if !(l.capacity >= 0.0 && l.capacity.is_finite()) {
                return Err(err("capacity must be non-negative"));
            }
            if !in_unit(l.remaining_rate) {
                return Err(err("remaining_rate out of range"));
            }
            if link_index.insert((i, j), e).is_some() {
                return Err(InstanceError::DuplicateLink(l.tail, l.head));
            }
            out_links[i].push(e);
            in_links[j].push(e);
        }

        let mut overrides = BTreeMap::new();
        for o in &params.accumulation_overrides {
            let err = |reason| InstanceError::Override {
                from: o.from,
                to: o.to,
                reason,
            };
            let (Some(&a), Some(&b)) = (yard_index.get(&o.from), yard_index.get(&o.to)) else {
                return Err(err("unknown yard"));
            };
            if !(o.hours >= 0.0 && o.hours.is_finite()) {
                return Err(err("hours must be non-negative"));
            }
            if overrides.insert((a, b), o.hours).is_some() {
                return Err(err("duplicate override"));
            }
        }

        let inst = Instance {
            yards,
            links,
            demands,
            params,
            yard_index,
            link_index,
            out_links,
            in_links,
            overrides,
        };

        let mut seen = BTreeSet::new();
        for d in &inst.demands {
            let err = |reason| InstanceError::DemandField {
                origin: d.origin,
                destination: d.destination,
                reason,
            };
            let (Some(o), Some(t)) = (inst.index_of(d.origin), inst.index_of(d.destination)) else {
                return Err(err("unknown yard"));
            };
            if o == t {
                return Err(err("origin equals destination"));
            }
            if !(d.cars >= 0.0 && is_integral(d.cars)) {
                return Err(err("cars must be a non-negative whole number"));
            }
            if !seen.insert((o, t)) {
                return Err(InstanceError::DuplicateDemand(d.origin, d.destination));
            }
        }
        for d in &inst.demands {
            let o = inst.yard_index[&d.origin];
            let t = inst.yard_index[&d.destination];
            if !inst.reachable_from(o)[t] {
                return Err(InstanceError::Unreachable(d.origin, d.destination));
            }
        }
        Ok(inst)
    }

    pub fn yards(&self) -> &[Yard] {
        &self.yards
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn yard_count(&self) -> usize {
        self.yards.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Dense index of a yard id.
    pub fn index_of(&self, id: YardId) -> Option<usize> {
        self.yard_index.get(&id).copied()
    }

    /// Yard id of a dense index.
    pub fn yard_id(&self, index: usize) -> YardId {
        self.yards[index].id
    }

    pub fn yard(&self, index: usize) -> &Yard {
        &self.yards[index]
    }

    pub fn link(&self, e: usize) -> &Link {
        &self.links[e]
    }

    /// Dense `(tail, head)` of link `e`.
    pub fn link_ends(&self, e: usize) -> (usize, usize) {
        let l = &self.links[e];
        (self.yard_index[&l.tail], self.yard_index[&l.head])
    }

    /// Link index joining dense yards `i -> j`, if any.
    pub fn link_between(&self, i: usize, j: usize) -> Option<usize> {
        self.link_index.get(&(i, j)).copied()
    }

    pub fn out_links(&self, i: usize) -> &[usize] {
        &self.out_links[i]
    }

    pub fn in_links(&self, i: usize) -> &[usize] {
        &self.in_links[i]
    }

    /// Accumulation parameter `c_pq` for dense yards.
    pub fn accumulation(&self, p: usize, q: usize) -> f64 {
        self.overrides
            .get(&(p, q))
            .copied()
            .unwrap_or(self.params.accumulation_default)
    }

    /// Shipments with a positive number of cars, as dense `(o, d, cars)`.
    pub fn shipments(&self) -> Vec<(usize, usize, f64)> {
        self.demands
            .iter()
            .filter(|d| d.cars > 0.0)
            .map(|d| (self.yard_index[&d.origin], self.yard_index[&d.destination], d.cars))
            .collect()
    }

    /// Cars demanded on the dense pair, zero when absent.
    pub fn cars(&self, o: usize, d: usize) -> f64 {
        let (oi, di) = (self.yards[o].id, self.yards[d].id);
        self.demands
            .binary_search_by_key(&(oi, di), |x| (x.origin, x.destination))
            .map(|k| self.demands[k].cars)
            .unwrap_or(0.0)
    }

    pub fn total_cars(&self) -> f64 {
        self.demands.iter().map(|d| d.cars).sum()
    }

    /// Yards reachable from dense yard `o` along directed links.
    pub fn reachable_from(&self, o: usize) -> Vec<bool> {
        let mut seen = vec![false; self.yards.len()];
        let mut stack = vec![o];
        seen[o] = true;
        while let Some(i) = stack.pop() {
            for &e in &self.out_links[i] {
                let (_, j) = self.link_ends(e);
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    pub fn summarize(&self) -> InstanceSummary {
        InstanceSummary {
            yards: self.yards.len(),
            links: self.links.len(),
            demand_pairs: self.demands.len(),
            total_cars: self.total_cars(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::two_route_network as fig1;

    #[test]
    fn summary_counts() {
        let inst = fig1();
        let s = inst.summarize();
        assert_eq!((s.yards, s.links, s.demand_pairs, s.total_cars), (6, 6, 1, 100.0));
    }

    #[test]
    fn capacity_ratio_out_of_range() {
        let inst = fig1();
        let mut yards = inst.yards().to_vec();
        yards[2].capacity_ratio = 1.3;
        let err = Instance::new(
            yards,
            inst.links().to_vec(),
            inst.demands().to_vec(),
            inst.params().clone(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("capacity_ratio out of range"), "{err}");
    }

    #[test]
    fn empty_demands_are_valid() {
        let inst = fig1();
        let empty = Instance::new(
            inst.yards().to_vec(),
            inst.links().to_vec(),
            Vec::new(),
            inst.params().clone(),
        )
        .unwrap();
        assert_eq!(empty.summarize().total_cars, 0.0);
        assert!(empty.shipments().is_empty());
    }

    #[test]
    fn totals_sum_demands() {
        let inst = fig1();
        let mut demands = inst.demands().to_vec();
        demands.push(Demand {
            origin: 2,
            destination: 6,
            cars: 50.0,
        });
        let two = Instance::new(
            inst.yards().to_vec(),
            inst.links().to_vec(),
            demands,
            inst.params().clone(),
        )
        .unwrap();
        assert_eq!(two.summarize().total_cars, 150.0);
        assert_eq!(two.cars(1, 5), 50.0);
        assert_eq!(two.cars(0, 4), 100.0);
        assert_eq!(two.cars(4, 0), 0.0);
    }

    #[test]
    fn rejects_bad_structure() {
        let inst = fig1();
        let p = inst.params().clone();
        let y = inst.yards().to_vec();
        let mut links = inst.links().to_vec();
        links.push(links[0].clone());
        assert_eq!(
            Instance::new(y.clone(), links, vec![], p.clone()).unwrap_err(),
            InstanceError::DuplicateLink(1, 2)
        );

        let back = vec![Demand {
            origin: 6,
            destination: 1,
            cars: 1.0,
        }];
        assert_eq!(
            Instance::new(y.clone(), inst.links().to_vec(), back, p.clone()).unwrap_err(),
            InstanceError::Unreachable(6, 1)
        );

        let same = vec![Demand {
            origin: 2,
            destination: 2,
            cars: 1.0,
        }];
        assert!(matches!(
            Instance::new(y.clone(), inst.links().to_vec(), same, p.clone()),
            Err(InstanceError::DemandField { .. })
        ));

        let mut bad = p.clone();
        bad.detour_ratio = 0.9;
        assert!(matches!(
            Instance::new(y, inst.links().to_vec(), vec![], bad),
            Err(InstanceError::Param { field: "detour_ratio", .. })
        ));
    }

    #[test]
    fn links_are_directed() {
        let inst = fig1();
        assert!(inst.link_between(0, 1).is_some());
        assert!(inst.link_between(1, 0).is_none());
        assert!(!inst.reachable_from(5)[0]);
    }

    #[test]
    fn accumulation_overrides_apply_per_pair() {
        let inst = fig1();
        let mut p = inst.params().clone();
        p.accumulation_overrides.push(AccumulationOverride {
            from: 1,
            to: 5,
            hours: 3.5,
        });
        let inst = Instance::new(
            inst.yards().to_vec(),
            inst.links().to_vec(),
            inst.demands().to_vec(),
            p,
        )
        .unwrap();
        assert_eq!(inst.accumulation(0, 4), 3.5);
        assert_eq!(inst.accumulation(4, 0), 10.0);
    }
}
