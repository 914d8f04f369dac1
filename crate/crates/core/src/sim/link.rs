//! Framing of long payloads into `B`-bit chunks.
//!
//! Each chunk is a continuation bit followed by up to `B - 1` body bits.
//! Every port keeps a FIFO of chunks; one chunk leaves per round.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::{Ctx, LocalView, Network};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::graph::{VertexId, Widths};

/// Splits `data` into chunk payloads of at most `bits` bits each. Empty
/// data still yields one (header-only) chunk.
pub fn fragment_payload(data: &Bits, bits: u32) -> Result<Vec<Bits>> {
    if bits < 2 {
        return Err(Error::BudgetTooSmall { bits, required: 2 });
    }
    let body = bits as usize - 1;
    let mut chunks = Vec::with_capacity(data.len().div_ceil(body).max(1));
    let mut start = 0;
    loop {
        let end = (start + body).min(data.len());
        let mut c = Bits::new();
        c.push_bit(end < data.len());
        c.push_bits(&data.slice(start, end));
        chunks.push(c);
        if end == data.len() {
            return Ok(chunks);
        }
        start = end;
    }
}

/// Inverse of [`fragment_payload`].
pub fn reassemble(chunks: &[Bits]) -> Result<Bits> {
    let mut data = Bits::new();
    for (i, c) in chunks.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::Decode("empty chunk"));
        }
        let more = c.get(0);
        if more == (i + 1 == chunks.len()) {
            return Err(Error::Decode("continuation flag out of place"));
        }
        data.push_bits(&c.slice(1, c.len()));
    }
    if chunks.is_empty() {
        return Err(Error::Decode("no chunks"));
    }
    Ok(data)
}

/// Per-round interface for framed stages. Sends may be of any length and
/// any number per port; they are queued and delivered in order.
pub struct LinkCtx<'a> {
    round: u64,
    view: &'a LocalView,
    widths: Widths,
    bits: u32,
    inbox: &'a [Option<Bits>],
    queues: &'a mut [VecDeque<Bits>],
    halted: bool,
}

impl<'a> LinkCtx<'a> {
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn view(&self) -> &LocalView {
        self.view
    }

    pub fn id(&self) -> VertexId {
        self.view.id
    }

    pub fn degree(&self) -> usize {
        self.view.ports.len()
    }

    pub fn widths(&self) -> Widths {
        self.widths
    }

    pub fn budget(&self) -> u32 {
        self.bits
    }

    /// Messages whose last chunk arrived this round, indexed by port.
    pub fn inbox(&self) -> &[Option<Bits>] {
        self.inbox
    }

    pub fn send(&mut self, port: usize, data: &Bits) -> Result<()> {
        if port >= self.queues.len() {
            return Err(Error::NoSuchPort { vertex: self.view.id, port });
        }
        self.queues[port].extend(fragment_payload(data, self.bits)?);
        Ok(())
    }

    /// Chunks still queued on `port`.
    pub fn pending(&self, port: usize) -> usize {
        self.queues[port].len()
    }

    /// Number of chunks one message of `len` bits occupies.
    pub fn chunks_for(&self, len: usize) -> usize {
        len.div_ceil(self.bits as usize - 1).max(1)
    }

    pub fn halt(&mut self) {
        self.halted = true;
    }
}

pub(super) fn run_link_stage(
    net: &mut Network<'_>,
    phase: &str,
    awake: &[bool],
    mut step: impl FnMut(usize, &mut LinkCtx<'_>) -> Result<()>,
) -> Result<u64> {
    let n = net.n();
    let degrees: Vec<usize> = net.views.iter().map(|v| v.ports.len()).collect();
    let mut queues: Vec<Vec<VecDeque<Bits>>> = degrees.iter().map(|&d| alloc::vec![VecDeque::new(); d]).collect();
    let mut partial: Vec<Vec<Bits>> = degrees.iter().map(|&d| alloc::vec![Bits::new(); d]).collect();
    let mut inner_halted: Vec<bool> = (0..n).map(|i| !awake.get(i).copied().unwrap_or(false)).collect();
    let mut logical: Vec<Option<Bits>> = Vec::new();
    let views: Vec<LocalView> = net.views.clone();
    net.run_stage(phase, awake, |i, ctx: &mut Ctx<'_>| {
        logical.clear();
        logical.resize(degrees[i], None);
        let mut delivered = false;
        for (p, chunk) in ctx.inbox().iter().enumerate() {
            if let Some(c) = chunk {
                if c.is_empty() {
                    return Err(Error::Decode("empty chunk"));
                }
                partial[i][p].push_bits(&c.slice(1, c.len()));
                if !c.get(0) {
                    logical[p] = Some(core::mem::take(&mut partial[i][p]));
                    delivered = true;
                }
            }
        }
        if !inner_halted[i] || delivered {
            let mut lctx = LinkCtx {
                round: ctx.round(),
                view: &views[i],
                widths: ctx.widths(),
                bits: ctx.budget(),
                inbox: &logical,
                queues: &mut queues[i],
                halted: false,
            };
            step(i, &mut lctx)?;
            inner_halted[i] = lctx.halted;
        }
        let mut busy = false;
        for p in 0..degrees[i] {
            if let Some(c) = queues[i][p].pop_front() {
                ctx.send(p, c)?;
                busy |= !queues[i][p].is_empty();
            }
        }
        // A node with chunks still queued must be stepped next round.
        if inner_halted[i] && !busy {
            ctx.halt();
        }
        Ok(())
    })
}
