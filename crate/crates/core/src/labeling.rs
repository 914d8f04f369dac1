//! Max-on-path labels from a centroid decomposition.
//!
//! A vertex stores, for each centroid above it in the decomposition, the
//! largest ω′ on its path to that centroid. Two vertices are separated by
//! their deepest common centroid, so the path maximum is the larger of the
//! two stored values for it.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::bits::{BitReader, Bits};
use crate::error::{Error, Result};
use crate::graph::{TieBrokenWeight, VertexId, Widths};
use crate::oracle::UnionFind;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MaxLabel {
    pub owner: VertexId,
    /// `(centroid, max ω′ to it)`, shallowest first. The last entry is the
    /// owner itself with [`TieBrokenWeight::SENTINEL`].
    pub entries: Vec<(VertexId, TieBrokenWeight)>,
}

/// Labels for every vertex of the tree given by `vertices` and `edges`.
pub fn encode(
    vertices: &[VertexId],
    edges: &[(VertexId, VertexId, TieBrokenWeight)],
) -> Result<BTreeMap<VertexId, MaxLabel>> {
    let n = vertices.len();
    let index: BTreeMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if index.len() != n || n == 0 || edges.len() + 1 != n {
        return Err(Error::NotATree);
    }
    let mut adj: Vec<Vec<(usize, TieBrokenWeight)>> = alloc::vec![Vec::new(); n];
    let mut uf = UnionFind::new(n);
    for &(a, b, w) in edges {
        let ia = *index.get(&a).ok_or(Error::UnknownVertex(a))?;
        let ib = *index.get(&b).ok_or(Error::UnknownVertex(b))?;
        if !uf.union(ia, ib) {
            return Err(Error::NotATree);
        }
        adj[ia].push((ib, w));
        adj[ib].push((ia, w));
    }
    let mut entries: Vec<Vec<(VertexId, TieBrokenWeight)>> = alloc::vec![Vec::new(); n];
    let mut removed = alloc::vec![false; n];
    let mut size = alloc::vec![0usize; n];
    let mut stack = alloc::vec![0usize];
    while let Some(start) = stack.pop() {
        // component of `start`, parents first
        let mut order = alloc::vec![start];
        let mut parent = BTreeMap::from([(start, usize::MAX)]);
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(y, _) in &adj[x] {
                if !removed[y] && !parent.contains_key(&y) {
                    parent.insert(y, x);
                    order.push(y);
                }
            }
        }
        for &x in order.iter().rev() {
            size[x] = 1 + adj[x].iter().filter(|(y, _)| !removed[*y] && parent.get(y) == Some(&x)).map(|(y, _)| size[*y]).sum::<usize>();
        }
        let total = order.len();
        let centroid = order
            .iter()
            .copied()
            .filter(|&x| {
                let up = total - size[x];
                let down = adj[x].iter().filter(|(y, _)| !removed[*y] && parent.get(y) == Some(&x)).map(|(y, _)| size[*y]);
                up <= total / 2 && down.into_iter().all(|s| s <= total / 2)
            })
            .min_by_key(|&x| vertices[x])
            .ok_or(Error::NotATree)?;
        // path maxima from the centroid
        let cid = vertices[centroid];
        entries[centroid].push((cid, TieBrokenWeight::SENTINEL));
        let mut walk: Vec<(usize, usize, Option<TieBrokenWeight>)> = alloc::vec![(centroid, usize::MAX, None)];
        while let Some((x, from, best)) = walk.pop() {
            for &(y, w) in &adj[x] {
                if y != from && !removed[y] {
                    let m = best.map_or(w, |b| b.max(w));
                    entries[y].push((cid, m));
                    walk.push((y, x, Some(m)));
                }
            }
        }
        removed[centroid] = true;
        for &(y, _) in &adj[centroid] {
            if !removed[y] {
                stack.push(y);
            }
        }
    }
    Ok(vertices.iter().zip(entries).map(|(&v, entries)| (v, MaxLabel { owner: v, entries })).collect())
}

/// Maximum ω′ on the tree path between the owners of two labels.
pub fn decode(lu: &MaxLabel, lv: &MaxLabel) -> Result<TieBrokenWeight> {
    if lu.owner == lv.owner {
        return Err(Error::SameVertex);
    }
    let common = lu.entries.iter().zip(&lv.entries).take_while(|(a, b)| a.0 == b.0).last();
    match common {
        Some((a, b)) => Ok(a.1.max(b.1)),
        None => Err(Error::ForeignLabels),
    }
}

impl MaxLabel {
    /// Wire form: 8-bit entry count, then per entry the centroid id and the
    /// ω′ tuple. The owner's own entry carries only its id.
    pub fn to_bits(&self, w: &Widths) -> Result<Bits> {
        let mut b = Bits::new();
        b.push_uint(self.entries.len() as u64, 8)?;
        let last = self.entries.len().saturating_sub(1);
        for (i, (c, m)) in self.entries.iter().enumerate() {
            b.push_uint(u64::from(c.0), w.id)?;
            if i != last {
                m.encode(w, &mut b)?;
            }
        }
        Ok(b)
    }

    pub fn from_bits(w: &Widths, r: &mut BitReader<'_>) -> Result<MaxLabel> {
        let count = r.read_uint(8)? as usize;
        if count == 0 {
            return Err(Error::Decode("empty label"));
        }
        let mut entries = Vec::with_capacity(count);
        for i in 0..count {
            let c = VertexId(r.read_uint(w.id)? as u32);
            let m = if i + 1 == count { TieBrokenWeight::SENTINEL } else { TieBrokenWeight::decode(w, r)? };
            entries.push((c, m));
        }
        Ok(MaxLabel { owner: entries[count - 1].0, entries })
    }
}

/// Exact length of [`MaxLabel::to_bits`].
pub fn label_bits(l: &MaxLabel, w: &Widths) -> usize {
    8 + l.entries.len() * w.id as usize + l.entries.len().saturating_sub(1) * w.tie_broken() as usize
}
