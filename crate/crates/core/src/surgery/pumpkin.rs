use crate::graph::{GraphBuilder, MetricGraph};

/// A pumpkin chain obtained by gluing level sets of `dist(·; V_D)`.
#[derive(Debug, Clone)]
pub struct PumpkinChain {
    /// Vertex `p0` is the only Dirichlet vertex; bank `j` joins `p{j-1}` and `p{j}`.
    pub graph: MetricGraph,
    /// Number of parallel edges in each bank.
    pub banks: Vec<usize>,
    /// Distance levels `0 = t_0 < t_1 < … < t_m = Inr` of the chain vertices.
    pub levels: Vec<f64>,
    /// Total length of the peak stubs that were cut off.
    pub dropped_length: f64,
}

/// Reduces `g` to a pumpkin chain with one Dirichlet end, the same inradius,
/// no larger total length and no larger torsional rigidity.
///
/// Every edge splits into monotone pieces of the distance function; those
/// pieces are cut at the levels `{0} ∪ {dist(v) : v ∈ V_N} ∪ {Inr}` and each
/// level set is glued to one vertex. A peak strictly between two consecutive
/// levels leaves a closed stub hanging at the lower level, which is removed.
/// Gluing natural points and removing stubs never increase `T`, and the
/// geodesic to the inradius witness keeps every bank nonempty.
pub fn reduce_to_pumpkin_chain(g: &MetricGraph) -> PumpkinChain {
    let field = g.dirichlet_distances();
    let inr = g.inradius().value;
    let tol = 1e-12 * inr;

    let mut raw_levels: Vec<f64> = g.natural_vertices().map(|v| field.dist[v]).collect();
    raw_levels.push(0.0);
    raw_levels.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = Vec::new();
    for t in raw_levels {
        if levels.last().is_none_or(|&last| t - last > tol) {
            levels.push(t);
        }
    }
    if inr - levels.last().copied().unwrap_or(0.0) > tol {
        levels.push(inr);
    } else {
        *levels.last_mut().expect("nonempty") = inr;
    }

    let snap = |t: f64| levels.iter().position(|&s| (s - t).abs() <= tol);
    let below = |t: f64| levels.iter().rposition(|&s| s < t - tol).expect("0 lies below every peak");
    let mut banks = vec![0usize; levels.len() - 1];
    let mut dropped = 0.0;
    let mut add_piece = |lo: f64, hi: f64| {
        let a = snap(lo).expect("piece starts at a vertex level");
        let top = match snap(hi) {
            Some(b) => b,
            None => {
                let b = below(hi);
                dropped += hi - levels[b];
                b
            }
        };
        for bank in &mut banks[a..top] {
            *bank += 1;
        }
    };
    for e in g.edges() {
        let (du, dw, l) = (field.dist[e.tail], field.dist[e.head], e.length);
        let kink = (0.5 * (dw + l - du)).clamp(0.0, l);
        let peak = du + kink;
        if kink > tol {
            add_piece(du, peak);
        }
        if l - kink > tol {
            add_piece(dw, peak);
        }
    }

    let mut b = GraphBuilder::new().dirichlet("p0");
    for j in 1..levels.len() {
        b = b.natural(format!("p{j}"));
        let len = levels[j] - levels[j - 1];
        for i in 0..banks[j - 1] {
            b = b.edge(format!("b{j}.{i}"), &format!("p{}", j - 1), &format!("p{j}"), len);
        }
    }
    let graph = b.build().expect("each bank is crossed by the geodesic to the inradius witness");
    PumpkinChain { graph, banks, levels, dropped_length: dropped }
}
