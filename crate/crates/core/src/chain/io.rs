//! Binary chain container.
//!
//! Layout, all integers little-endian: the 8-byte magic `LPLXCHN\0`, a `u32`
//! version, the payload, then an FNV-1a 64 checksum of the payload. The payload
//! holds the configuration, one block per level (graphs as edge arrays, tree
//! flags, elimination steps, sparsifier statistics) and the base graph with its
//! dense factor.

use std::io::{Read, Write};

use super::build::{ChainConfig, ChainLevel, LevelKind, PreconChain};
use super::elimination::{EliminationRecord, EliminationStep};
use crate::error::{LaplaxError, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::solver::direct::DirectSolver;
use crate::sparsify::SparsifyStats;

pub const MAGIC: &[u8; 8] = b"LPLXCHN\0";
pub const VERSION: u32 = 1;

fn fnv1a(data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn flags(&mut self, f: &[bool]) {
        self.usize(f.len());
        self.0.extend(f.iter().map(|&b| b as u8));
    }
    fn graph(&mut self, g: &WeightedGraph) {
        self.usize(g.n());
        self.usize(g.m());
        for e in g.edges() {
            self.usize(e.u);
            self.usize(e.v);
            self.f64(e.w);
        }
    }
}

struct Dec<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Dec<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < k {
            return Err(LaplaxError::Container(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.data[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| LaplaxError::Container("length overflows usize".into()))
    }
    /// A count of items that each occupy at least `unit` bytes.
    fn count(&mut self, unit: usize) -> Result<usize> {
        let k = self.usize()?;
        if k.saturating_mul(unit) > self.data.len() - self.pos {
            return Err(LaplaxError::Container(format!("count {k} exceeds remaining data")));
        }
        Ok(k)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn flags(&mut self) -> Result<Vec<bool>> {
        let k = self.count(1)?;
        self.take(k)?
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(LaplaxError::Container(format!("bad flag byte {b}"))),
            })
            .collect()
    }
    fn graph(&mut self) -> Result<WeightedGraph> {
        let n = self.usize()?;
        let m = self.count(24)?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let u = self.usize()?;
            let v = self.usize()?;
            let w = self.f64()?;
            edges.push(Edge::new(u, v, w));
        }
        WeightedGraph::new(n, edges)
    }
}

fn encode_stats(e: &mut Enc, s: &SparsifyStats) {
    e.u64(s.seed);
    for v in [s.kappa, s.c_s, s.xi, s.stretch, s.t_hat, s.t, s.log_t] {
        e.f64(v);
    }
    e.usize(s.q);
    e.usize(s.off_tree_draws);
    e.f64(s.threshold);
    e.u8(s.tree_branch as u8);
    match s.uniform_stretch {
        Some(u) => {
            e.u8(1);
            e.f64(u);
        }
        None => e.u8(0),
    }
}

fn decode_stats(d: &mut Dec) -> Result<SparsifyStats> {
    let seed = d.u64()?;
    let mut f = [0.0; 7];
    for v in &mut f {
        *v = d.f64()?;
    }
    let q = d.usize()?;
    let off_tree_draws = d.usize()?;
    let threshold = d.f64()?;
    let tree_branch = d.u8()? != 0;
    let uniform_stretch = if d.u8()? != 0 { Some(d.f64()?) } else { None };
    Ok(SparsifyStats {
        seed,
        kappa: f[0],
        c_s: f[1],
        xi: f[2],
        stretch: f[3],
        t_hat: f[4],
        t: f[5],
        log_t: f[6],
        q,
        off_tree_draws,
        threshold,
        tree_branch,
        uniform_stretch,
    })
}

fn encode_record(e: &mut Enc, r: &EliminationRecord) {
    e.usize(r.n);
    e.usize(r.steps.len());
    for s in &r.steps {
        match *s {
            EliminationStep::Degree1 { v, u, w } => {
                e.u8(1);
                e.usize(v);
                e.usize(u);
                e.f64(w);
            }
            EliminationStep::Degree2 { v, u1, u2, w1, w2, w_existing } => {
                e.u8(2);
                e.usize(v);
                e.usize(u1);
                e.usize(u2);
                e.f64(w1);
                e.f64(w2);
                e.f64(w_existing);
            }
        }
    }
    e.usize(r.kept.len());
    r.kept.iter().for_each(|&k| e.usize(k));
}

fn decode_record(d: &mut Dec) -> Result<EliminationRecord> {
    let n = d.usize()?;
    let k = d.count(25)?;
    let mut steps = Vec::with_capacity(k);
    let check = |v: usize| if v < n { Ok(v) } else { Err(LaplaxError::Container(format!("step vertex {v} out of range"))) };
    for _ in 0..k {
        let step = match d.u8()? {
            1 => EliminationStep::Degree1 { v: check(d.usize()?)?, u: check(d.usize()?)?, w: d.f64()? },
            2 => EliminationStep::Degree2 {
                v: check(d.usize()?)?,
                u1: check(d.usize()?)?,
                u2: check(d.usize()?)?,
                w1: d.f64()?,
                w2: d.f64()?,
                w_existing: d.f64()?,
            },
            t => return Err(LaplaxError::Container(format!("bad step tag {t}"))),
        };
        steps.push(step);
    }
    let kk = d.count(8)?;
    let kept = (0..kk).map(|_| d.usize().and_then(check)).collect::<Result<Vec<_>>>()?;
    Ok(EliminationRecord { n, steps, kept })
}

pub fn encode_chain(chain: &PreconChain) -> Vec<u8> {
    let mut e = Enc::default();
    let c = &chain.config;
    e.f64(c.c1);
    e.f64(c.kappa_c);
    e.usize(c.c_stop);
    e.usize(c.retries);
    e.f64(c.c_r);
    e.f64(c.c_s);
    e.f64(c.p);
    e.u64(c.seed);
    e.f64(chain.tree_stretch);
    e.usize(chain.levels.len());
    for l in &chain.levels {
        e.u8(match l.kind {
            LevelKind::ScaledTree => 0,
            LevelKind::Sampled => 1,
            LevelKind::TreeOnly => 2,
        });
        e.f64(l.kappa);
        e.usize(l.samples);
        e.usize(l.attempts);
        e.graph(&l.g);
        e.flags(&l.g_tree);
        e.graph(&l.h);
        e.flags(&l.h_tree);
        encode_record(&mut e, &l.elimination);
        match &l.stats {
            Some(s) => {
                e.u8(1);
                encode_stats(&mut e, s);
            }
            None => e.u8(0),
        }
    }
    e.graph(&chain.last);
    e.flags(&chain.last_tree);
    let factor = chain.direct.raw_factor();
    e.usize(factor.len());
    factor.iter().for_each(|&v| e.f64(v));

    let mut out = Vec::with_capacity(e.0.len() + 20);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&e.0);
    out.extend_from_slice(&fnv1a(&e.0).to_le_bytes());
    out
}

pub fn decode_chain(bytes: &[u8]) -> Result<PreconChain> {
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(LaplaxError::Container("not a chain container".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(LaplaxError::Container(format!("unsupported version {version}")));
    }
    let (payload, sum) = bytes[12..].split_at(bytes.len() - 20);
    if fnv1a(payload).to_le_bytes() != sum {
        return Err(LaplaxError::Container("checksum mismatch".into()));
    }
    let mut d = Dec { data: payload, pos: 0 };
    let config = ChainConfig {
        c1: d.f64()?,
        kappa_c: d.f64()?,
        c_stop: d.usize()?,
        retries: d.usize()?,
        c_r: d.f64()?,
        c_s: d.f64()?,
        p: d.f64()?,
        seed: d.u64()?,
    };
    config.validate()?;
    let tree_stretch = d.f64()?;
    let count = d.count(1)?;
    let mut levels = Vec::with_capacity(count);
    for _ in 0..count {
        let kind = match d.u8()? {
            0 => LevelKind::ScaledTree,
            1 => LevelKind::Sampled,
            2 => LevelKind::TreeOnly,
            t => return Err(LaplaxError::Container(format!("bad level kind {t}"))),
        };
        let kappa = d.f64()?;
        let samples = d.usize()?;
        let attempts = d.usize()?;
        let g = d.graph()?;
        let g_tree = d.flags()?;
        let h = d.graph()?;
        let h_tree = d.flags()?;
        let elimination = decode_record(&mut d)?;
        let stats = if d.u8()? != 0 { Some(decode_stats(&mut d)?) } else { None };
        if g_tree.len() != g.m() || h_tree.len() != h.m() || elimination.n != h.n() || g.n() != h.n() {
            return Err(LaplaxError::Container("level block sizes disagree".into()));
        }
        levels.push(ChainLevel { kind, g, g_tree, h, h_tree, samples, kappa, elimination, stats, attempts });
    }
    let last = d.graph()?;
    let last_tree = d.flags()?;
    let k = d.count(8)?;
    let factor = (0..k).map(|_| d.f64()).collect::<Result<Vec<_>>>()?;
    if d.pos != payload.len() {
        return Err(LaplaxError::Container("trailing bytes".into()));
    }
    if last_tree.len() != last.m() {
        return Err(LaplaxError::Container("base tree flags disagree with base graph".into()));
    }
    for (i, l) in levels.iter().enumerate() {
        let next_n = levels.get(i + 1).map_or(last.n(), |x| x.g.n());
        if l.elimination.kept.len() != next_n {
            return Err(LaplaxError::Container(format!("level {} elimination keeps the wrong vertex count", i + 1)));
        }
    }
    let direct = DirectSolver::from_raw(last.n(), factor)?;
    Ok(PreconChain { config, levels, last, last_tree, direct, tree_stretch })
}

pub fn write_chain<W: Write>(chain: &PreconChain, mut out: W) -> Result<()> {
    out.write_all(&encode_chain(chain))?;
    Ok(())
}

pub fn read_chain<R: Read>(mut input: R) -> Result<PreconChain> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    decode_chain(&bytes)
}
