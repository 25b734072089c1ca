use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, MetricGraph};

/// Named graph families. Unless stated otherwise, `lengths` holds either one
/// common length or one length per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Chain with a Dirichlet start and a natural end; one edge per length.
    PathDN,
    /// Chain with Dirichlet ends; one edge per length.
    PathDD,
    /// `k` edges from a natural centre to Dirichlet leaves.
    Star(usize),
    /// `k` loops at a single Dirichlet vertex.
    Flower(usize),
    /// Natural centre with `leaves` Dirichlet pendant edges and `petals` loops;
    /// per-edge lengths list leaves first.
    Stower { leaves: usize, petals: usize },
    /// Dirichlet pendant edge `ℓ₁` ending in a loop `ℓ₂`.
    Lasso,
    /// Banks of parallel edges with a Dirichlet first vertex; lengths are one
    /// common value, one per bank or one per edge.
    PumpkinChain(Vec<usize>),
    /// `k` banks of two equal edges with a Dirichlet first vertex; lengths are
    /// one common value or one per bank.
    Caterpillar(usize),
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadParameters(msg.into())
}

fn count(text: &str) -> Result<usize> {
    text.trim().parse::<usize>().ok().filter(|&k| k > 0).ok_or_else(|| bad(format!("`{text}` is not a positive count")))
}

fn need<'a>(name: &str, arg: Option<&'a str>) -> Result<&'a str> {
    arg.ok_or_else(|| bad(format!("family `{name}` needs a parameter")))
}

impl FromStr for Family {
    type Err = Error;

    /// Parses `path_DN`, `path_DD`, `star:K`, `flower:K`, `stower:L,P`, `lasso`,
    /// `pumpkin_chain:AxBxC` and `caterpillar:K`.
    fn from_str(spec: &str) -> Result<Self> {
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        Ok(match name {
            "path_DN" => Family::PathDN,
            "path_DD" => Family::PathDD,
            "lasso" => Family::Lasso,
            "star" => Family::Star(count(need(name, arg)?)?),
            "flower" => Family::Flower(count(need(name, arg)?)?),
            "caterpillar" => Family::Caterpillar(count(need(name, arg)?)?),
            "stower" => {
                let a = need(name, arg)?;
                let (l, p) = a.split_once(',').ok_or_else(|| bad("stower needs `L,P`"))?;
                let petals = p.trim().parse::<usize>().map_err(|_| bad(format!("bad petal count `{p}`")))?;
                Family::Stower { leaves: count(l)?, petals }
            }
            "pumpkin_chain" => {
                Family::PumpkinChain(need(name, arg)?.split('x').map(count).collect::<Result<Vec<_>>>()?)
            }
            other => return Err(bad(format!("unknown family `{other}`"))),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PathDN => write!(f, "path_DN"),
            Family::PathDD => write!(f, "path_DD"),
            Family::Star(k) => write!(f, "star:{k}"),
            Family::Flower(k) => write!(f, "flower:{k}"),
            Family::Stower { leaves, petals } => write!(f, "stower:{leaves},{petals}"),
            Family::Lasso => write!(f, "lasso"),
            Family::PumpkinChain(banks) => {
                let parts: Vec<String> = banks.iter().map(usize::to_string).collect();
                write!(f, "pumpkin_chain:{}", parts.join("x"))
            }
            Family::Caterpillar(k) => write!(f, "caterpillar:{k}"),
        }
    }
}

/// One length per edge from either a common value or a full list.
fn per_edge(lengths: &[f64], edges: usize, what: &str) -> Result<Vec<f64>> {
    match lengths.len() {
        0 => Ok(vec![1.0; edges]),
        1 => Ok(vec![lengths[0]; edges]),
        n if n == edges => Ok(lengths.to_vec()),
        n => Err(bad(format!("{what} takes 1 or {edges} lengths, got {n}"))),
    }
}

/// Builds a member of `family`. Empty `lengths` means unit lengths (for the
/// chains: a single unit edge).
pub fn family_generator(family: &Family, lengths: &[f64]) -> Result<MetricGraph> {
    let graph = match family {
        Family::PathDN | Family::PathDD => {
            let ls = if lengths.is_empty() { vec![1.0] } else { lengths.to_vec() };
            let mut b = GraphBuilder::new().dirichlet("v0");
            for (i, &l) in ls.iter().enumerate() {
                let last = i + 1 == ls.len();
                let id = format!("v{}", i + 1);
                b = if last && *family == Family::PathDD { b.dirichlet(id.clone()) } else { b.natural(id.clone()) };
                b = b.edge(format!("e{i}"), &format!("v{i}"), &id, l);
            }
            b.build()
        }
        Family::Star(k) => {
            let ls = per_edge(lengths, *k, "star")?;
            let mut b = GraphBuilder::new().natural("c");
            for (i, &l) in ls.iter().enumerate() {
                b = b.dirichlet(format!("l{i}")).edge(format!("e{i}"), "c", &format!("l{i}"), l);
            }
            b.build()
        }
        Family::Flower(k) => {
            let ls = per_edge(lengths, *k, "flower")?;
            let mut b = GraphBuilder::new().dirichlet("c");
            for (i, &l) in ls.iter().enumerate() {
                b = b.edge(format!("p{i}"), "c", "c", l);
            }
            b.build()
        }
        Family::Stower { leaves, petals } => {
            let ls = per_edge(lengths, leaves + petals, "stower")?;
            let mut b = GraphBuilder::new().natural("c");
            for (i, &l) in ls[..*leaves].iter().enumerate() {
                b = b.dirichlet(format!("l{i}")).edge(format!("e{i}"), "c", &format!("l{i}"), l);
            }
            for (i, &l) in ls[*leaves..].iter().enumerate() {
                b = b.edge(format!("p{i}"), "c", "c", l);
            }
            b.build()
        }
        Family::Lasso => {
            let ls = match lengths.len() {
                0 => vec![1.0, 1.0],
                2 => lengths.to_vec(),
                n => return Err(bad(format!("lasso takes 2 lengths, got {n}"))),
            };
            GraphBuilder::new()
                .dirichlet("d")
                .natural("p")
                .edge("pendant", "d", "p", ls[0])
                .edge("loop", "p", "p", ls[1])
                .build()
        }
        Family::PumpkinChain(banks) => return pumpkin_chain(banks, lengths),
        Family::Caterpillar(k) => {
            let per_bank = match lengths.len() {
                0 => vec![1.0; *k],
                1 => vec![lengths[0]; *k],
                n if n == *k => lengths.to_vec(),
                n => return Err(bad(format!("caterpillar takes 1 or {k} lengths, got {n}"))),
            };
            return pumpkin_chain(&vec![2; *k], &per_bank);
        }
    };
    Ok(graph?)
}

fn pumpkin_chain(banks: &[usize], lengths: &[f64]) -> Result<MetricGraph> {
    if banks.is_empty() {
        return Err(bad("pumpkin chain needs at least one bank"));
    }
    let edges: usize = banks.iter().sum();
    let per_edge_len: Vec<f64> = if lengths.len() == banks.len() && lengths.len() != edges {
        banks.iter().zip(lengths).flat_map(|(&n, &l)| std::iter::repeat_n(l, n)).collect()
    } else {
        per_edge(lengths, edges, "pumpkin chain")?
    };
    let mut b = GraphBuilder::new().dirichlet("v0");
    let mut next = per_edge_len.iter();
    for (j, &n) in banks.iter().enumerate() {
        let (from, to) = (format!("v{j}"), format!("v{}", j + 1));
        b = b.natural(to.clone());
        for i in 0..n {
            b = b.edge(format!("b{}.{i}", j + 1), &from, &to, *next.next().expect("sized above"));
        }
    }
    Ok(b.build()?)
}

/// A representative member of every family, for property sweeps.
pub fn family_zoo() -> Vec<(String, MetricGraph)> {
    let specs: [(&str, &[f64]); 16] = [
        ("path_DN", &[1.0]),
        ("path_DN", &[0.5, 1.5, 1.0]),
        ("path_DD", &[1.0]),
        ("path_DD", &[0.7, 1.3]),
        ("star:1", &[1.0]),
        ("star:3", &[1.0]),
        ("star:5", &[0.4, 0.8, 1.2, 1.6, 2.0]),
        ("flower:1", &[1.0]),
        ("flower:3", &[1.0]),
        ("stower:2,1", &[1.0]),
        ("stower:1,2", &[0.8, 1.0, 1.4]),
        ("lasso", &[1.0, 2.0]),
        ("lasso", &[1.0, 1.0]),
        ("pumpkin_chain:3x1x2", &[0.5, 1.0, 0.75]),
        ("caterpillar:4", &[1.0]),
        ("caterpillar:2", &[0.6, 1.1]),
    ];
    specs
        .iter()
        .map(|(spec, ls)| {
            let family: Family = spec.parse().expect("zoo specs parse");
            (format!("{spec} {ls:?}"), family_generator(&family, ls).expect("zoo specs are valid"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in ["path_DN", "path_DD", "star:3", "flower:2", "stower:3,2", "lasso", "pumpkin_chain:3x1x2", "caterpillar:4"] {
            let f: Family = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        for s in ["star", "star:0", "stower:1", "hexagon", "pumpkin_chain:2xq"] {
            assert!(matches!(s.parse::<Family>(), Err(Error::BadParameters(_))), "{s}");
        }
    }

    #[test]
    fn shapes() {
        let star = family_generator(&Family::Star(3), &[1.0]).unwrap();
        assert_eq!((star.num_vertices(), star.num_edges(), star.num_dirichlet()), (4, 3, 3));
        let lasso = family_generator(&Family::Lasso, &[1.0, 2.0]).unwrap();
        assert_eq!(lasso.total_length(), 3.0);
        assert!(lasso.edge(1).is_loop());
        let cat = family_generator(&Family::Caterpillar(4), &[1.0]).unwrap();
        assert_eq!((cat.num_vertices(), cat.num_edges(), cat.num_dirichlet()), (5, 8, 1));
        assert!(cat.is_doubly_connected_after_glue());
        let flower = family_generator(&Family::Flower(3), &[]).unwrap();
        assert_eq!((flower.num_vertices(), flower.num_edges()), (1, 3));
        let dd = family_generator(&Family::PathDD, &[0.5, 0.5]).unwrap();
        assert_eq!(dd.num_dirichlet(), 2);
        assert!(family_generator(&Family::Star(3), &[1.0, 2.0]).is_err());
        assert!(family_generator(&Family::Stower { leaves: 1, petals: 1 }, &[0.0]).is_err());
    }

    #[test]
    fn pumpkin_chain_lengths_per_bank_or_edge() {
        let per_bank = family_generator(&Family::PumpkinChain(vec![2, 1]), &[0.5, 2.0]).unwrap();
        assert_eq!(per_bank.lengths(), vec![0.5, 0.5, 2.0]);
        let per_edge = family_generator(&Family::PumpkinChain(vec![2, 1]), &[0.5, 0.6, 2.0]).unwrap();
        assert_eq!(per_edge.lengths(), vec![0.5, 0.6, 2.0]);
    }
}
