use super::cuts::{ball_cut_with, cone_cut_with, Cut, CutCertificate, Scratch};
use super::dijkstra::{dijkstra_lengths, shortest_paths, LengthGraph, ShortestPaths};
use crate::error::{LaplaxError, Result};

/// Ball radius is searched in `[BALL_LO, BALL_HI) * radius`.
pub const BALL_LO: f64 = 0.5;
pub const BALL_HI: f64 = 2.0 / 3.0;
/// Cone radius is searched in `[0, CONE_WIDTH * radius)`.
pub const CONE_WIDTH: f64 = 1.0 / 6.0;

#[derive(Clone, Debug)]
pub struct StarPartition {
    /// `parts[0]` is the ball around the center; the rest are cones.
    pub parts: Vec<Vec<usize>>,
    /// `anchors[0]` is the center; `anchors[i]` is the apex of cone `i`.
    pub anchors: Vec<usize>,
    /// `bridges[i - 1]` is the edge joining cone `i` to an earlier part.
    pub bridges: Vec<usize>,
    /// Distance from the center to the farthest vertex.
    pub radius: f64,
    pub ball: CutCertificate,
    pub cones: Vec<CutCertificate>,
    /// Radius of each part around its anchor inside the part, when measured.
    pub part_radii: Vec<f64>,
}

impl StarPartition {
    pub fn max_part_radius(&self) -> f64 {
        self.part_radii.iter().cloned().fold(0.0, f64::max)
    }
}

/// Ball-and-cones partition of a connected graph around `center`.
pub fn star_partition(g: &LengthGraph, center: usize) -> Result<StarPartition> {
    let sp = shortest_paths(g, center)?;
    if sp.order.len() != g.n() {
        return Err(LaplaxError::Disconnected);
    }
    let mut scratch = Scratch::new(g.n());
    let mut p = partition(g, center, &sp, &mut scratch)?;
    p.part_radii = p.parts.iter().zip(&p.anchors).map(|(part, &a)| part_radius(g, part, a)).collect();
    Ok(p)
}

/// Radius of `part` around `anchor` using only edges inside `part`.
pub fn part_radius(g: &LengthGraph, part: &[usize], anchor: usize) -> f64 {
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in part.iter().enumerate() {
        local[v] = i;
    }
    let sp = dijkstra_lengths(
        part.len(),
        |i| g.neighbors(part[i]).iter().filter(|&&(w, _)| local[w] != usize::MAX).map(|&(w, e)| (local[w], e)).collect(),
        |e| g.length(e),
        local[anchor],
    );
    sp.dist.iter().cloned().fold(0.0, f64::max)
}

pub(crate) fn partition(g: &LengthGraph, center: usize, sp: &ShortestPaths, s: &mut Scratch) -> Result<StarPartition> {
    let n = g.n();
    let radius = sp.order.last().map(|&v| sp.dist[v]).unwrap_or(0.0);
    if n <= 2 || radius == 0.0 {
        return Ok(StarPartition {
            parts: vec![sp.order.clone()],
            anchors: vec![center],
            bridges: vec![],
            radius,
            ball: CutCertificate { cost: 0.0, bound: 0.0, holds: true },
            cones: vec![],
            part_radii: vec![],
        });
    }
    let ball: Cut = ball_cut_with(g, &sp.dist, &sp.order, BALL_LO * radius, BALL_HI * radius, s)?;
    const FREE: usize = usize::MAX;
    let mut owner = vec![FREE; n];
    for &v in &ball.vertices {
        owner[v] = 0;
    }
    let mut parts = vec![ball.vertices.clone()];
    let mut anchors = vec![center];
    let mut bridges = Vec::new();
    let mut cones = Vec::new();
    let width = CONE_WIDTH * radius;
    let m = g.m();
    let shell: Vec<usize> = sp
        .order
        .iter()
        .copied()
        .filter(|&v| owner[v] == FREE && sp.parent[v].is_some_and(|(p, _)| owner[p] == 0))
        .collect();
    let rest: Vec<usize> = sp.order.iter().copied().filter(|&v| owner[v] == FREE).collect();
    for &x in shell.iter().chain(rest.iter()) {
        if owner[x] != FREE {
            continue;
        }
        let (_, bridge) = sp.parent[x].expect("non-center vertex has a parent");
        let cut = {
            let active = |v: usize| owner[v] == FREE;
            cone_cut_with(g, &sp.dist, &active, &[x], 0.0, width, m, s)?
        };
        let id = parts.len();
        for &v in &cut.vertices {
            owner[v] = id;
        }
        parts.push(cut.vertices);
        anchors.push(x);
        bridges.push(bridge);
        cones.push(cut.certificate);
    }
    Ok(StarPartition { parts, anchors, bridges, radius, ball: ball.certificate, cones, part_radii: vec![] })
}
