//! The partition procedure as a sequence of engine stages.
//!
//! Fragment-level decisions are taken at the fragment root using only what
//! reached it through convergecasts; every member learns them through a
//! broadcast over fragment edges.

use alloc::vec::Vec;

use super::{colour_iterations, growth_phases, FragmentView};
use crate::bits::{BitReader, Bits};
use crate::error::{Error, Result};
use crate::graph::{TieBrokenWeight, VertexId, Widths};
use crate::primitives::{broadcast, downward, exchange, upward, Forest};
use crate::sim::{LocalView, Network};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Mwoe {
    w: TieBrokenWeight,
    target: VertexId,
    target_active: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Role {
    Stay,
    /// Hang below the far end of the fragment's own chosen edge.
    AttachOwn,
    /// Hang below the given child fragment, through the edge it chose.
    AttachChild(VertexId),
}

#[derive(Clone, Debug)]
struct Node {
    id: VertexId,
    nbr: Vec<VertexId>,
    fid: VertexId,
    parent: Option<usize>,
    children: Vec<usize>,
    active: bool,
    nbr_fid: Vec<VertexId>,
    nbr_active: Vec<bool>,
    mwoe: Option<Mwoe>,
    conn: Option<usize>,
    chose_me: Vec<usize>,
    report: [bool; 2],
    up: Option<usize>,
    down: Vec<usize>,
    // decided at the fragment root
    has_par: bool,
    has_children: bool,
    colour: u64,
    mis: bool,
    par_mis: bool,
    min_mis_child: Option<VertexId>,
    group: VertexId,
    picked: Option<VertexId>,
    // known to all members
    role: Role,
    new_fid: VertexId,
    absorbed: bool,
}

fn put_id(b: &mut Bits, v: VertexId, w: &Widths) -> Result<()> {
    b.push_uint(u64::from(v.0), w.id)
}

fn get_id(r: &mut BitReader<'_>, w: &Widths) -> Result<VertexId> {
    Ok(VertexId(r.read_uint(w.id)? as u32))
}

fn put_opt_id(b: &mut Bits, v: Option<VertexId>, w: &Widths) -> Result<()> {
    b.push_bit(v.is_some());
    put_id(b, v.unwrap_or_default(), w)
}

fn get_opt_id(r: &mut BitReader<'_>, w: &Widths) -> Result<Option<VertexId>> {
    let some = r.read_bit()?;
    let v = get_id(r, w)?;
    Ok(some.then_some(v))
}

fn put_mwoe(b: &mut Bits, m: Option<Mwoe>, w: &Widths) -> Result<()> {
    b.push_bit(m.is_some());
    let m = m.unwrap_or(Mwoe { w: TieBrokenWeight::SENTINEL, target: VertexId(0), target_active: false });
    m.w.encode(w, b)?;
    put_id(b, m.target, w)?;
    b.push_bit(m.target_active);
    Ok(())
}

fn get_mwoe(r: &mut BitReader<'_>, w: &Widths) -> Result<Option<Mwoe>> {
    let some = r.read_bit()?;
    let m = Mwoe { w: TieBrokenWeight::decode(w, r)?, target: get_id(r, w)?, target_active: r.read_bit()? };
    Ok(some.then_some(m))
}

fn tie_broken(view: &LocalView, nbr: &[VertexId], p: usize) -> TieBrokenWeight {
    let port = view.ports[p];
    TieBrokenWeight::new(port.weight, port.marked, view.id, nbr[p])
}

fn forest_of(st: &[Node], include: impl Fn(&Node) -> bool) -> Forest {
    let mut f = Forest { parent: Vec::with_capacity(st.len()), children: Vec::with_capacity(st.len()) };
    for s in st {
        if include(s) {
            f.parent.push(s.parent);
            f.children.push(s.children.clone());
        } else {
            f.parent.push(None);
            f.children.push(Vec::new());
        }
    }
    f
}

/// What a fragment root heard from its forest neighbors in one exchange.
#[derive(Clone, Default)]
struct Heard {
    from_parent: Option<Bits>,
    child_min: Option<u64>,
}

/// Root value to all members, across the chosen edges (towards the parent
/// fragment if `up`, towards child fragments if `down`), then back up to
/// the root. Children's values are reduced to the minimum of `child_key`.
#[allow(clippy::too_many_arguments)]
fn frag_exchange(
    net: &mut Network<'_>,
    phase: &str,
    st: &[Node],
    value: impl Fn(&Node) -> Result<Bits>,
    vlen: usize,
    up: bool,
    down: bool,
    child_key: impl Fn(&Bits, VertexId) -> Result<Option<u64>>,
    kw: u32,
) -> Result<Vec<Heard>> {
    let forest = forest_of(st, |s| s.active);
    let start: Vec<Option<Bits>> = st
        .iter()
        .map(|s| if s.active && s.parent.is_none() { value(s).map(Some) } else { Ok(None) })
        .collect::<Result<_>>()?;
    let got = broadcast(net, phase, &forest, &start)?;
    let crossed = exchange(net, phase, |i| {
        let mut out = Vec::new();
        if let Some(v) = &got[i] {
            if up {
                if let Some(p) = st[i].up {
                    out.push((p, v.clone()));
                }
            }
            if down {
                out.extend(st[i].down.iter().map(|&q| (q, v.clone())));
            }
        }
        Ok(out)
    })?;
    let agg = upward(net, phase, &forest, |i, kids| {
        let s = &st[i];
        if !s.active {
            return Ok(Bits::new());
        }
        let mut par: Option<Bits> = s.up.and_then(|p| crossed[i][p].clone());
        let mut best: Option<u64> = None;
        for &q in &s.down {
            if let Some(m) = &crossed[i][q] {
                if let Some(key) = child_key(m, s.nbr_fid[q])? {
                    best = Some(best.map_or(key, |b| b.min(key)));
                }
            }
        }
        for (_, m) in kids {
            let mut r = m.reader();
            let has = r.read_bit()?;
            let v = r.read_bits(vlen)?;
            if has {
                par = Some(v);
            }
            let has_key = r.read_bit()?;
            let key = r.read_uint(kw)?;
            if has_key {
                best = Some(best.map_or(key, |b| b.min(key)));
            }
        }
        let mut b = Bits::new();
        b.push_bit(par.is_some());
        match &par {
            Some(v) => b.push_bits(v),
            None => b.push_bits(&Bits::from_bools(core::iter::repeat(false).take(vlen))),
        }
        b.push_bit(best.is_some());
        b.push_uint(best.unwrap_or(0), kw)?;
        Ok(b)
    })?;
    agg.iter()
        .zip(st)
        .map(|(m, s)| {
            if !s.active || s.parent.is_some() {
                return Ok(Heard::default());
            }
            let mut r = m.reader();
            let has = r.read_bit()?;
            let v = r.read_bits(vlen)?;
            let has_key = r.read_bit()?;
            let key = r.read_uint(kw)?;
            Ok(Heard { from_parent: has.then_some(v), child_min: has_key.then_some(key) })
        })
        .collect()
}

/// Distributed partition for parameter `k`. `nbr[i]` lists the ids behind
/// node `i`'s ports, as learned by an id exchange.
pub fn dom_part(net: &mut Network<'_>, phase: &str, nbr: &[Vec<VertexId>], k: u64) -> Result<Vec<FragmentView>> {
    let n = net.n();
    let w = net.widths();
    let views: Vec<LocalView> = net.views().to_vec();
    let mut st: Vec<Node> = views
        .iter()
        .zip(nbr)
        .map(|(v, nb)| Node {
            id: v.id,
            nbr: nb.clone(),
            fid: v.id,
            parent: None,
            children: Vec::new(),
            active: k >= 1,
            nbr_fid: Vec::new(),
            nbr_active: Vec::new(),
            mwoe: None,
            conn: None,
            chose_me: Vec::new(),
            report: [false; 2],
            up: None,
            down: Vec::new(),
            has_par: false,
            has_children: false,
            colour: 0,
            mis: false,
            par_mis: false,
            min_mis_child: None,
            group: v.id,
            picked: None,
            role: Role::Stay,
            new_fid: v.id,
            absorbed: false,
        })
        .collect();

    for _ in 0..growth_phases(k) {
        // announce fragment id and activity to all neighbors
        let got = exchange(net, phase, |i| {
            let mut b = Bits::new();
            put_id(&mut b, st[i].fid, &w)?;
            b.push_bit(st[i].active);
            Ok((0..views[i].ports.len()).map(|p| (p, b.clone())).collect())
        })?;
        for (s, ports) in st.iter_mut().zip(&got) {
            s.nbr_fid.clear();
            s.nbr_active.clear();
            for m in ports {
                let m = m.as_ref().ok_or(Error::Decode("missing announcement"))?;
                let mut r = m.reader();
                s.nbr_fid.push(get_id(&mut r, &w)?);
                s.nbr_active.push(r.read_bit()?);
            }
            s.mwoe = None;
            s.conn = None;
            s.chose_me.clear();
            s.up = None;
            s.down.clear();
            s.mis = false;
            s.role = Role::Stay;
            s.new_fid = s.fid;
            s.absorbed = false;
            s.picked = None;
        }

        // minimum outgoing edge of every active fragment
        let forest = forest_of(&st, |s| s.active);
        let best = upward(net, phase, &forest, |i, kids| {
            let s = &st[i];
            if !s.active {
                return Ok(Bits::new());
            }
            let mut best: Option<Mwoe> = (0..s.nbr.len())
                .filter(|&p| s.nbr_fid[p] != s.fid)
                .map(|p| Mwoe { w: tie_broken(&views[i], &s.nbr, p), target: s.nbr_fid[p], target_active: s.nbr_active[p] })
                .min_by_key(|m| m.w);
            for (_, m) in kids {
                if let Some(c) = get_mwoe(&mut m.reader(), &w)? {
                    if best.is_none_or(|b| c.w < b.w) {
                        best = Some(c);
                    }
                }
            }
            let mut b = Bits::new();
            put_mwoe(&mut b, best, &w)?;
            Ok(b)
        })?;
        let start: Vec<Option<Bits>> =
            (0..n).map(|i| (st[i].active && st[i].parent.is_none()).then(|| best[i].clone())).collect();
        let got = broadcast(net, phase, &forest, &start)?;
        for (i, s) in st.iter_mut().enumerate() {
            let Some(m) = &got[i] else { continue };
            s.mwoe = get_mwoe(&mut m.reader(), &w)?;
            if let Some(mw) = s.mwoe {
                s.conn = (0..s.nbr.len()).find(|&p| s.nbr_fid[p] != s.fid && tie_broken(&views[i], &s.nbr, p) == mw.w);
            }
        }

        // connectors announce the choice across the chosen edge
        let got = exchange(net, phase, |i| Ok(st[i].conn.map(|p| (p, Bits::from_bools([true]))).into_iter().collect()))?;
        for (s, ports) in st.iter_mut().zip(&got) {
            s.chose_me = (0..ports.len()).filter(|&p| ports[p].is_some()).collect();
            let mut mutual_root = false;
            let mut mutual_child = None;
            if let (Some(p), Some(mw)) = (s.conn, s.mwoe) {
                let mutual = s.chose_me.contains(&p);
                mutual_root = mutual && s.fid < mw.target;
                if mutual && !mutual_root {
                    mutual_child = Some(p);
                }
                if mw.target_active && !mutual_root {
                    s.up = Some(p);
                }
            }
            s.down = s.chose_me.iter().copied().filter(|&q| Some(q) != mutual_child).collect();
            s.report = [mutual_root, !s.down.is_empty()];
        }
        let report = upward(net, phase, &forest, |i, kids| {
            let s = &st[i];
            let [mut root, mut kid] = s.report;
            for (_, m) in kids {
                let mut r = m.reader();
                root |= r.read_bit()?;
                kid |= r.read_bit()?;
            }
            Ok(Bits::from_bools([root, kid]))
        })?;
        for (i, s) in st.iter_mut().enumerate() {
            if s.active && s.parent.is_none() {
                let mutual_root = report[i].get(0);
                s.has_children = report[i].get(1);
                s.has_par = s.mwoe.is_some_and(|m| m.target_active) && !mutual_root;
                s.colour = u64::from(s.fid.0);
            }
        }

        // Cole-Vishkin colouring of the fragment forest
        for _ in 0..colour_iterations(w.id) {
            let heard = frag_exchange(
                net,
                phase,
                &st,
                |s| {
                    let mut b = Bits::new();
                    b.push_uint(s.colour, w.id)?;
                    Ok(b)
                },
                w.id as usize,
                false,
                true,
                |_, _| Ok(None),
                1,
            )?;
            for (s, h) in st.iter_mut().zip(heard) {
                if !(s.active && s.parent.is_none()) {
                    continue;
                }
                let c = s.colour;
                s.colour = match h.from_parent.filter(|_| s.has_par) {
                    Some(pc) => {
                        let pc = pc.reader().read_uint(w.id)?;
                        let i = u64::from((c ^ pc).trailing_zeros());
                        2 * i + ((c >> i) & 1)
                    }
                    None => c & 1,
                };
            }
        }

        // maximal independent set, one colour class at a time
        let mis_exchange = |net: &mut Network<'_>, st: &[Node]| {
            frag_exchange(
                net,
                phase,
                st,
                |s| Ok(Bits::from_bools([s.mis])),
                1,
                true,
                true,
                |m, child| Ok(m.get(0).then_some(u64::from(child.0))),
                w.id,
            )
        };
        for c in 0..6u64 {
            if c > 0 {
                let heard = mis_exchange(net, &st)?;
                for (s, h) in st.iter_mut().zip(heard) {
                    s.par_mis = s.has_par && h.from_parent.is_some_and(|b| b.get(0));
                    s.min_mis_child = h.child_min.map(|x| VertexId(x as u32));
                }
            }
            for s in st.iter_mut() {
                if s.active && s.parent.is_none() && s.colour == c && !s.mis && !s.par_mis && s.min_mis_child.is_none() {
                    s.mis = true;
                }
            }
        }
        let heard = mis_exchange(net, &st)?;
        for (s, h) in st.iter_mut().zip(heard) {
            if !(s.active && s.parent.is_none()) {
                continue;
            }
            s.par_mis = s.has_par && h.from_parent.is_some_and(|b| b.get(0));
            s.min_mis_child = h.child_min.map(|x| VertexId(x as u32));
            if s.mis {
                s.group = s.fid;
            } else if s.par_mis {
                let target = s.mwoe.map(|m| m.target).ok_or(Error::Invalid("parent without chosen edge".into()))?;
                s.group = target;
                s.role = Role::AttachOwn;
                s.new_fid = target;
            } else {
                let c = s.min_mis_child.ok_or(Error::Invalid("fragment without an MIS neighbor".into()))?;
                s.group = c;
                s.picked = Some(c);
                s.role = Role::AttachChild(c);
                s.new_fid = c;
            }
        }

        // parents tell children their group and whom they picked
        let heard = frag_exchange(
            net,
            phase,
            &st,
            |s| {
                let mut b = Bits::new();
                put_id(&mut b, s.group, &w)?;
                put_opt_id(&mut b, s.picked, &w)?;
                Ok(b)
            },
            2 * w.id as usize + 1,
            false,
            true,
            |_, _| Ok(None),
            1,
        )?;
        for (s, h) in st.iter_mut().zip(heard) {
            if !(s.active && s.parent.is_none() && s.mis) {
                continue;
            }
            let from_parent = match h.from_parent.filter(|_| s.has_par) {
                Some(b) => {
                    let mut r = b.reader();
                    Some((get_id(&mut r, &w)?, get_opt_id(&mut r, &w)?))
                }
                None => None,
            };
            let picked_by_parent = from_parent.is_some_and(|(_, p)| p == Some(s.fid));
            if s.has_children || picked_by_parent {
                continue;
            }
            if let Some(mw) = s.mwoe {
                s.role = Role::AttachOwn;
                s.new_fid = match from_parent {
                    Some((g, _)) => g,
                    None => mw.target,
                };
                s.absorbed = !mw.target_active;
            }
        }

        // roots tell members their role
        let start: Vec<Option<Bits>> = st
            .iter()
            .map(|s| {
                if !(s.active && s.parent.is_none()) {
                    return Ok(None);
                }
                let mut b = Bits::new();
                let (tag, child) = match s.role {
                    Role::Stay => (0, None),
                    Role::AttachOwn => (1, None),
                    Role::AttachChild(c) => (2, Some(c)),
                };
                b.push_uint(tag, 2)?;
                put_id(&mut b, s.new_fid, &w)?;
                put_opt_id(&mut b, child, &w)?;
                b.push_bit(s.absorbed);
                Ok(Some(b))
            })
            .collect::<Result<_>>()?;
        let got = broadcast(net, phase, &forest, &start)?;
        for (s, m) in st.iter_mut().zip(&got) {
            let Some(m) = m else { continue };
            let mut r = m.reader();
            let tag = r.read_uint(2)?;
            s.new_fid = get_id(&mut r, &w)?;
            let child = get_opt_id(&mut r, &w)?;
            s.absorbed = r.read_bit()?;
            s.role = match (tag, child) {
                (1, _) => Role::AttachOwn,
                (2, Some(c)) => Role::AttachChild(c),
                _ => Role::Stay,
            };
        }

        // re-root merging fragments at their attach vertex
        let link: Vec<Option<usize>> = st
            .iter()
            .map(|s| match s.role {
                Role::Stay => None,
                Role::AttachOwn => s.conn,
                Role::AttachChild(c) => s.down.iter().copied().find(|&q| s.nbr_fid[q] == c),
            })
            .collect();
        let old_tree: Vec<Vec<usize>> = st
            .iter()
            .map(|s| {
                let mut t: Vec<usize> = s.parent.into_iter().chain(s.children.iter().copied()).collect();
                t.sort_unstable();
                t
            })
            .collect();
        let mut attached: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        let mut rerooted = alloc::vec![false; n];
        let awake: Vec<bool> = link.iter().map(Option::is_some).collect();
        net.run_link_stage(phase, &awake, |i, ctx| {
            let mut from: Option<usize> = None;
            if let Some(p) = link[i] {
                if !rerooted[i] {
                    from = Some(p);
                    ctx.send(p, &Bits::from_bools([true]))?;
                }
            }
            for (p, m) in ctx.inbox().iter().enumerate() {
                if m.is_none() {
                    continue;
                }
                if old_tree[i].binary_search(&p).is_ok() {
                    from = from.or(Some(p));
                } else {
                    attached[i].push(p);
                }
            }
            if let (Some(p), false) = (from, rerooted[i]) {
                rerooted[i] = true;
                let s = &mut st[i];
                s.parent = Some(p);
                s.children = old_tree[i].iter().copied().filter(|&q| q != p).collect();
                for &q in &s.children {
                    ctx.send(q, &Bits::from_bools([true]))?;
                }
            }
            ctx.halt();
            Ok(())
        })?;
        for (i, s) in st.iter_mut().enumerate() {
            s.children.extend(attached[i].iter().copied());
            s.children.sort_unstable();
            if s.active {
                s.fid = s.new_fid;
            }
        }

        // sizes of the merged fragments
        let participants = forest_of(&st, |s| s.active && !s.absorbed);
        let sizes = upward(net, phase, &participants, |i, kids| {
            let mut total = u64::from(st[i].active && !st[i].absorbed);
            for (_, m) in kids {
                total += m.reader().read_uint(w.id)?;
            }
            let mut b = Bits::new();
            b.push_uint(total, w.id)?;
            Ok(b)
        })?;
        let start: Vec<Option<Bits>> = (0..n)
            .map(|i| (st[i].active && !st[i].absorbed && st[i].parent.is_none()).then(|| sizes[i].clone()))
            .collect();
        let got = broadcast(net, phase, &participants, &start)?;
        for (s, m) in st.iter_mut().zip(&got) {
            if s.absorbed {
                s.active = false;
            } else if let Some(m) = m {
                s.active = m.reader().read_uint(w.id)? <= k;
            }
        }
    }

    // closing split into pieces of at least k + 1 vertices
    let threshold = k + 1;
    let forest = forest_of(&st, |_| true);
    let mut residual = alloc::vec![0u64; n];
    let mut boundary: Vec<Option<VertexId>> = alloc::vec![None; n];
    let mut cut = alloc::vec![false; n];
    let mut cut_child: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    upward(net, phase, &forest, |i, kids| {
        let mut r = 1u64;
        let mut b: Option<VertexId> = None;
        for (p, m) in kids {
            let mut rd = m.reader();
            let cand = if rd.read_bit()? {
                cut_child[i].push(*p);
                Some(st[i].nbr[*p])
            } else {
                r += rd.read_uint(w.id)?;
                get_opt_id(&mut rd, &w)?
            };
            b = match (b, cand) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
        }
        residual[i] = r;
        boundary[i] = b;
        cut[i] = st[i].parent.is_some() && r >= threshold;
        let mut out = Bits::new();
        out.push_bit(cut[i]);
        out.push_uint(if cut[i] { 0 } else { r }, w.id)?;
        put_opt_id(&mut out, if cut[i] { None } else { b }, &w)?;
        Ok(out)
    })?;
    let mut piece: Vec<VertexId> = st.iter().map(|s| s.id).collect();
    let mut ports: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    let start: Vec<Option<Bits>> = (0..n)
        .map(|i| {
            if st[i].parent.is_some() {
                return Ok(None);
            }
            let p = if residual[i] >= threshold { st[i].id } else { boundary[i].unwrap_or(st[i].id) };
            let mut b = Bits::new();
            put_id(&mut b, p, &w)?;
            Ok(Some(b))
        })
        .collect::<Result<_>>()?;
    downward(net, phase, &forest, &start, |i, m| {
        let got = get_id(&mut m.reader(), &w)?;
        let s = &st[i];
        match s.parent {
            None => piece[i] = got,
            Some(p) if cut[i] => {
                piece[i] = s.id;
                if got == s.id {
                    ports[i].push(p);
                }
            }
            Some(p) => {
                piece[i] = got;
                ports[i].push(p);
            }
        }
        let mut b = Bits::new();
        put_id(&mut b, piece[i], &w)?;
        let mut out = Vec::new();
        for &q in &s.children {
            if !cut_child[i].contains(&q) || s.nbr[q] == piece[i] {
                ports[i].push(q);
            }
            out.push((q, b.clone()));
        }
        Ok(out)
    })?;
    Ok(piece
        .into_iter()
        .zip(ports)
        .map(|(fid, mut ports)| {
            ports.sort_unstable();
            FragmentView { fid, ports }
        })
        .collect())
}

/// Every node sends its fragment id to all neighbors; returns the fragment
/// id behind each port.
pub fn exchange_fragment_ids(net: &mut Network<'_>, phase: &str, fv: &[FragmentView]) -> Result<Vec<Vec<VertexId>>> {
    let w = net.widths();
    let degrees: Vec<usize> = net.views().iter().map(|v| v.ports.len()).collect();
    let got = exchange(net, phase, |i| {
        let mut b = Bits::new();
        put_id(&mut b, fv[i].fid, &w)?;
        Ok((0..degrees[i]).map(|p| (p, b.clone())).collect())
    })?;
    got.iter()
        .map(|ports| {
            ports
                .iter()
                .map(|m| get_id(&mut m.as_ref().ok_or(Error::Decode("missing fragment id"))?.reader(), &w))
                .collect()
        })
        .collect()
}

/// Local test at each vertex: its fragment edges are exactly its marked
/// edges that stay inside its fragment.
pub fn internal_edges_ok(views: &[LocalView], fv: &[FragmentView], nbr_fid: &[Vec<VertexId>]) -> Vec<bool> {
    views
        .iter()
        .zip(fv)
        .zip(nbr_fid)
        .map(|((v, f), nf)| {
            let inside: Vec<usize> = (0..v.ports.len()).filter(|&p| v.ports[p].marked && nf[p] == f.fid).collect();
            inside == f.ports
        })
        .collect()
}

/// Fragment-id exchange followed by the local internal-edge test.
pub fn verify_internal_edges(net: &mut Network<'_>, phase: &str, fv: &[FragmentView]) -> Result<Vec<bool>> {
    let nbr_fid = exchange_fragment_ids(net, phase, fv)?;
    Ok(internal_edges_ok(net.views(), fv, &nbr_fid))
}
