//! Circuits as connected components of the system-wide pin configuration.
//!
//! Two partition sets are linked iff some slot `j` of a shared bond lies in
//! both. Components are rebuilt from scratch every round; configurations may
//! change arbitrarily between rounds.

use super::pins::PinConfig;
use super::Structure;

/// Union-find over flattened partition-set ids.
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    /// Union keeping the smaller root, so component ids are the smallest
    /// member under the flat total order.
    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
    }
}

/// The per-round circuit structure: a partition of all partition sets into
/// circuits, with the beep state of every circuit.
#[derive(Clone, Debug)]
pub struct CircuitGraph {
    /// Start of each amoebot's sets in the flat order.
    pub set_offsets: Vec<u32>,
    /// Component id (smallest flat member) per flat set.
    pub component_of: Vec<u32>,
    /// Flat ids of the component representatives, ascending.
    pub components: Vec<u32>,
    /// Beep flag per entry of `components`.
    pub beeped: Vec<bool>,
}

impl CircuitGraph {
    pub fn flat_id(&self, amoebot: usize, set: u8) -> u32 {
        self.set_offsets[amoebot] + set as u32
    }

    pub fn component(&self, amoebot: usize, set: u8) -> u32 {
        self.component_of[self.flat_id(amoebot, set) as usize]
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Beep bit per component in ascending component-id order.
    pub fn beep_bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.beeped.iter().copied()
    }
}

/// Compute the circuits of `configs` over the bonds of `st`.
pub fn compute_circuits(st: &Structure, configs: &[PinConfig]) -> CircuitGraph {
    let n = st.len();
    let mut set_offsets = Vec::with_capacity(n + 1);
    let mut total: u32 = 0;
    for c in configs {
        set_offsets.push(total);
        total += c.set_count() as u32;
    }
    set_offsets.push(total);

    let mut uf = UnionFind::new(total as usize);
    for bond in &st.bonds {
        let (u, v, d) = (bond.a as usize, bond.b as usize, bond.dir as usize);
        let dv = (d + 3) % 6;
        for slot in 0..st.k {
            if let (Some(su), Some(sv)) = (configs[u].set_of(d, slot), configs[v].set_of(dv, slot))
            {
                uf.union(set_offsets[u] + su as u32, set_offsets[v] + sv as u32);
            }
        }
    }

    let mut component_of = vec![0u32; total as usize];
    for i in 0..total {
        component_of[i as usize] = uf.find(i);
    }
    let mut components: Vec<u32> = Vec::new();
    for (i, &c) in component_of.iter().enumerate() {
        if c == i as u32 {
            components.push(c);
        }
    }
    let beeped = vec![false; components.len()];
    CircuitGraph {
        set_offsets,
        component_of,
        components,
        beeped,
    }
}

/// Mark beeps: `senders` holds per-amoebot beep masks over its set ids.
/// Afterwards `beeped` answers per component and per-set reception is
/// `beeped[rank(component_of[set])]`.
pub fn propagate(graph: &mut CircuitGraph, senders: &[u32]) {
    // Rank components by id for dense indexing.
    let rank = |graph: &CircuitGraph, comp: u32| -> usize {
        graph.components.binary_search(&comp).expect("component id")
    };
    for (a, &mask) in senders.iter().enumerate() {
        let mut m = mask;
        while m != 0 {
            let set = m.trailing_zeros() as u8;
            m &= m - 1;
            let comp = graph.component(a, set);
            let r = rank(graph, comp);
            graph.beeped[r] = true;
        }
    }
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use crate::grid::GridCoord;
    use proptest::prelude::*;

    /// Independent reachability oracle over the pin graph: two sets share a
    /// circuit iff some chain of per-slot links joins them.
    fn components_by_bfs(st: &Structure, configs: &[PinConfig]) -> Vec<Vec<(usize, u8)>> {
        let mut adj: std::collections::HashMap<(usize, u8), Vec<(usize, u8)>> = Default::default();
        for bond in &st.bonds {
            let (u, v, d) = (bond.a as usize, bond.b as usize, bond.dir as usize);
            let dv = (d + 3) % 6;
            for slot in 0..st.k {
                if let (Some(su), Some(sv)) =
                    (configs[u].set_of(d, slot), configs[v].set_of(dv, slot))
                {
                    adj.entry((u, su)).or_default().push((v, sv));
                    adj.entry((v, sv)).or_default().push((u, su));
                }
            }
        }
        let mut seen: std::collections::HashSet<(usize, u8)> = Default::default();
        let mut out = Vec::new();
        for (a, c) in configs.iter().enumerate() {
            for s in 0..c.set_count() as u8 {
                if seen.contains(&(a, s)) {
                    continue;
                }
                let mut comp = vec![(a, s)];
                let mut queue = vec![(a, s)];
                seen.insert((a, s));
                while let Some(x) = queue.pop() {
                    for &y in adj.get(&x).map(|v| v.as_slice()).unwrap_or(&[]) {
                        if seen.insert(y) {
                            comp.push(y);
                            queue.push(y);
                        }
                    }
                }
                comp.sort();
                out.push(comp);
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn beep_delivery_matches_reachability(
            labels in proptest::collection::vec(0u8..4, 7 * 48),
            senders in proptest::collection::vec(any::<bool>(), 7 * 8),
        ) {
            let cells: Vec<GridCoord> = [(0, 0), (1, 0), (0, 1), (1, -1), (-1, 1), (2, -1), (-1, 0)]
                .iter()
                .map(|&(q, r)| GridCoord::new(q, r))
                .collect();
            let st = Structure::new(cells, 2, 1).unwrap();
            let mut configs = Vec::new();
            for i in 0..st.len() {
                let nb = st.neighbor_mask(i);
                let mut cfg = PinConfig::empty();
                let mut map = [u8::MAX; 4];
                for d in 0..6 {
                    if !nb[d] {
                        continue;
                    }
                    for slot in 0..st.k {
                        let g = labels[i * 48 + d * 8 + slot] as usize;
                        if map[g] == u8::MAX {
                            map[g] = cfg.add_set();
                        }
                        cfg.assign(d, slot, map[g]);
                    }
                }
                if cfg.set_count() == 0 {
                    cfg.add_set();
                }
                configs.push(cfg);
            }
            let mut graph = compute_circuits(&st, &configs);
            let mut sender_masks = vec![0u32; st.len()];
            for (i, cfg) in configs.iter().enumerate() {
                for s in 0..cfg.set_count() as u8 {
                    if senders[i * 8 + s as usize % 8] && (s as usize) < 8 {
                        sender_masks[i] |= 1 << s;
                    }
                }
            }
            propagate(&mut graph, &sender_masks);
            // Oracle: a set hears iff its BFS component contains a sender.
            let comps = components_by_bfs(&st, &configs);
            for comp in comps {
                let any_sender = comp
                    .iter()
                    .any(|&(a, s)| sender_masks[a] & (1 << s) != 0);
                for &(a, s) in &comp {
                    let cid = graph.component(a, s);
                    let r = graph.components.binary_search(&cid).unwrap();
                    prop_assert_eq!(
                        graph.beeped[r],
                        any_sender,
                        "set ({}, {}) delivery",
                        a,
                        s
                    );
                }
            }
        }
    }
}
