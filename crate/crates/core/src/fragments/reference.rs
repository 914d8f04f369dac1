//! Central computation of the same partition as the distributed procedure.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use super::{colour_iterations, growth_phases, FragmentView, Mfc};
use crate::error::{Error, Result};
use crate::graph::{CandidateMarking, EdgeId, TieBrokenWeight, VertexId, WeightedGraph};

#[derive(Clone, Copy)]
struct Choice {
    conn: usize,
    land: usize,
    edge: EdgeId,
    target: VertexId,
}

/// A merge decided in one phase: fragment `frag` re-roots at `attach` and
/// hangs below `other` through `edge`, taking id `new_fid`.
struct Link {
    frag: VertexId,
    attach: usize,
    other: usize,
    edge: EdgeId,
    new_fid: VertexId,
}

pub fn dom_part_reference(g: &WeightedGraph, t: &CandidateMarking, k: u64) -> Result<Mfc> {
    t.check(g)?;
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let n = g.n();
    let key = |e: EdgeId| TieBrokenWeight::of_edge(g, t, e);
    let mut fid: Vec<VertexId> = g.ids().to_vec();
    let mut parent: Vec<Option<usize>> = alloc::vec![None; n];
    let mut tree: Vec<Vec<(usize, EdgeId)>> = alloc::vec![Vec::new(); n];

    for _ in 0..growth_phases(k) {
        let mut members: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            members.entry(fid[i]).or_default().push(i);
        }
        let active: BTreeMap<VertexId, bool> = members.iter().map(|(&f, m)| (f, m.len() as u64 <= k)).collect();

        let mut mwoe: BTreeMap<VertexId, Choice> = BTreeMap::new();
        for (&f, m) in &members {
            if !active[&f] {
                continue;
            }
            let best = m
                .iter()
                .flat_map(|&x| g.ports(x).iter().map(move |p| (x, p)))
                .filter(|(_, p)| fid[p.neighbor] != f)
                .min_by_key(|(_, p)| key(p.edge));
            if let Some((x, p)) = best {
                mwoe.insert(f, Choice { conn: x, land: p.neighbor, edge: p.edge, target: fid[p.neighbor] });
            }
        }

        let mut par: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut children: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for (&f, c) in &mwoe {
            let to = c.target;
            if !active[&to] {
                continue;
            }
            let mutual = mwoe.get(&to).is_some_and(|d| d.target == f);
            if !(mutual && f < to) {
                par.insert(f, to);
                children.entry(to).or_default().push(f);
            }
        }
        let actives: Vec<VertexId> = active.iter().filter(|(_, &a)| a).map(|(&f, _)| f).collect();

        let mut colour: BTreeMap<VertexId, u64> = actives.iter().map(|&f| (f, u64::from(f.0))).collect();
        for _ in 0..colour_iterations(g.widths().id) {
            colour = actives
                .iter()
                .map(|&f| {
                    let c = colour[&f];
                    let next = match par.get(&f) {
                        Some(p) => {
                            let i = u64::from((c ^ colour[p]).trailing_zeros());
                            2 * i + ((c >> i) & 1)
                        }
                        None => c & 1,
                    };
                    (f, next)
                })
                .collect();
        }

        let mut mis: BTreeSet<VertexId> = BTreeSet::new();
        for c in 0..6 {
            for &f in &actives {
                if colour[&f] != c {
                    continue;
                }
                let blocked = par.get(&f).is_some_and(|p| mis.contains(p))
                    || children.get(&f).is_some_and(|ch| ch.iter().any(|x| mis.contains(x)));
                if !blocked {
                    mis.insert(f);
                }
            }
        }

        let mut group: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut picked: BTreeSet<VertexId> = BTreeSet::new();
        let mut links: Vec<Link> = Vec::new();
        for &f in &actives {
            if mis.contains(&f) {
                group.insert(f, f);
            } else if let Some(&p) = par.get(&f).filter(|p| mis.contains(p)) {
                group.insert(f, p);
                let c = mwoe[&f];
                links.push(Link { frag: f, attach: c.conn, other: c.land, edge: c.edge, new_fid: p });
            } else {
                let c = children
                    .get(&f)
                    .and_then(|ch| ch.iter().filter(|x| mis.contains(x)).min().copied())
                    .ok_or_else(|| Error::Invalid("fragment without an MIS neighbor".into()))?;
                group.insert(f, c);
                picked.insert(c);
                let m = mwoe[&c];
                links.push(Link { frag: f, attach: m.land, other: m.conn, edge: m.edge, new_fid: c });
            }
        }
        for &f in &actives {
            let lonely = mis.contains(&f) && !children.contains_key(&f) && !picked.contains(&f);
            if !lonely {
                continue;
            }
            let Some(c) = mwoe.get(&f).copied() else { continue };
            let new_fid = match par.get(&f) {
                Some(p) => group[p],
                None => c.target,
            };
            links.push(Link { frag: f, attach: c.conn, other: c.land, edge: c.edge, new_fid });
        }

        let old = fid.clone();
        for l in links {
            // re-root the fragment's tree at the attach vertex
            let mut q = VecDeque::from([l.attach]);
            let mut seen = BTreeSet::from([l.attach]);
            parent[l.attach] = Some(l.other);
            while let Some(x) = q.pop_front() {
                fid[x] = l.new_fid;
                for &(y, _) in &tree[x] {
                    if old[y] == l.frag && seen.insert(y) {
                        parent[y] = Some(x);
                        q.push_back(y);
                    }
                }
            }
            tree[l.attach].push((l.other, l.edge));
            tree[l.other].push((l.attach, l.edge));
        }
    }

    // closing split
    let threshold = k + 1;
    let mut kids: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        match parent[i] {
            Some(p) => kids[p].push(i),
            None => {
                if g.id(i) != fid[i] {
                    return Err(Error::Invalid("fragment root is not its leader".into()));
                }
                order.push(i);
            }
        }
    }
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        order.extend(kids[x].iter().copied());
    }
    let mut residual = alloc::vec![0u64; n];
    let mut boundary: Vec<Option<VertexId>> = alloc::vec![None; n];
    let mut cut = alloc::vec![false; n];
    for &x in order.iter().rev() {
        let mut r = 1;
        let mut b: Option<VertexId> = None;
        for &c in &kids[x] {
            let cand = if cut[c] {
                Some(g.id(c))
            } else {
                r += residual[c];
                boundary[c]
            };
            b = match (b, cand) {
                (Some(a), Some(z)) => Some(a.min(z)),
                (a, z) => a.or(z),
            };
        }
        residual[x] = r;
        boundary[x] = b;
        cut[x] = parent[x].is_some() && r >= threshold;
    }
    let mut piece: Vec<VertexId> = alloc::vec![VertexId(0); n];
    for &x in &order {
        piece[x] = match parent[x] {
            None if residual[x] >= threshold => g.id(x),
            None => boundary[x].unwrap_or(g.id(x)),
            Some(_) if cut[x] => g.id(x),
            Some(p) => piece[p],
        };
    }
    let mut views: Vec<FragmentView> = (0..n).map(|i| FragmentView { fid: piece[i], ports: Vec::new() }).collect();
    for x in 0..n {
        let Some(p) = parent[x] else { continue };
        if cut[x] && piece[p] != g.id(x) {
            continue;
        }
        let e = tree[x].iter().find(|(y, _)| *y == p).map(|&(_, e)| e).ok_or(Error::NotATree)?;
        for (a, b) in [(x, p), (p, x)] {
            let port = g.ports(a).iter().position(|q| q.edge == e && q.neighbor == b).ok_or(Error::NotATree)?;
            views[a].ports.push(port);
        }
    }
    for v in &mut views {
        v.ports.sort_unstable();
    }
    Ok(Mfc::from_views(g, &views))
}
