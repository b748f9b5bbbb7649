//! Flat network descriptions: links plus typed junctions.
//!
//! The simulator only sees [`Network`]; the builders below produce the DM,
//! (DM)^n, and beltway families.

use serde::{Deserialize, Serialize};

use super::DmSpec;
use crate::diagram::FundamentalDiagram;
use crate::error::{domain, Error, Result};

/// Diagram family and speeds shared by every link of a network. Jam
/// density follows from each link's capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramParams {
    #[serde(default)]
    pub shape: ShapeKind,
    #[serde(default = "one")]
    pub free_flow_speed: f64,
    #[serde(default = "half")]
    pub congested_wave_speed: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    #[default]
    Triangular,
    Greenshields,
}

impl Default for DiagramParams {
    fn default() -> Self {
        Self {
            shape: ShapeKind::Triangular,
            free_flow_speed: 1.0,
            congested_wave_speed: 0.5,
        }
    }
}

impl DiagramParams {
    pub fn diagram(&self, capacity: f64) -> Result<FundamentalDiagram> {
        match self.shape {
            ShapeKind::Triangular => FundamentalDiagram::triangular_from_capacity(
                capacity,
                self.free_flow_speed,
                self.congested_wave_speed,
            ),
            ShapeKind::Greenshields => {
                FundamentalDiagram::greenshields_from_capacity(capacity, self.free_flow_speed)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    pub length: f64,
    pub diagram: FundamentalDiagram,
}

impl Link {
    pub fn capacity(&self) -> f64 {
        self.diagram.capacity()
    }
}

/// How a diverge splits its inflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Split {
    /// Route-based: the first outbound link receives the commodity-1
    /// vehicles, so the split follows the upstream commodity fraction.
    Commodity,
    /// A fixed turning proportion towards the first outbound link.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Junction {
    Origin {
        link: usize,
        demand: f64,
        commodity1: f64,
    },
    Destination {
        link: usize,
        supply: f64,
    },
    /// FIFO diverge.
    Diverge {
        inbound: usize,
        outbound: [usize; 2],
        split: Split,
    },
    /// Priority merge; `priority` is the merging ratio of `inbound[0]`.
    Merge {
        inbound: [usize; 2],
        outbound: usize,
        priority: f64,
    },
}

/// Which builder produced a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "n")]
pub enum NetworkKind {
    Dm,
    Dmn(usize),
    Beltway(usize),
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub kind: NetworkKind,
    pub links: Vec<Link>,
    pub junctions: Vec<Junction>,
    /// Links whose downstream out-flux is recorded as a section.
    pub sections: Vec<usize>,
}

impl Network {
    /// Checks that each link has exactly one upstream and one downstream
    /// junction and that parameters are in range.
    pub fn validate(&self) -> Result<()> {
        let n = self.links.len();
        let mut up = vec![0usize; n];
        let mut down = vec![0usize; n];
        let check = |i: usize| -> Result<()> {
            if i < n {
                Ok(())
            } else {
                Err(Error::Config(format!("junction references missing link {i}")))
            }
        };
        let unit = |name: &str, p: f64| -> Result<()> {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} {p} outside [0, 1]")))
            }
        };
        for j in &self.junctions {
            match *j {
                Junction::Origin {
                    link,
                    demand,
                    commodity1,
                } => {
                    check(link)?;
                    unit("origin commodity fraction", commodity1)?;
                    if !(demand >= 0.0) {
                        return Err(Error::Config(format!("negative origin demand {demand}")));
                    }
                    up[link] += 1;
                }
                Junction::Destination { link, supply } => {
                    check(link)?;
                    if !(supply >= 0.0) {
                        return Err(Error::Config(format!("negative destination supply {supply}")));
                    }
                    down[link] += 1;
                }
                Junction::Diverge {
                    inbound,
                    outbound,
                    split,
                } => {
                    check(inbound)?;
                    outbound.iter().try_for_each(|&o| check(o))?;
                    if let Split::Fixed(p) = split {
                        unit("turning proportion", p)?;
                    }
                    down[inbound] += 1;
                    outbound.iter().for_each(|&o| up[o] += 1);
                }
                Junction::Merge {
                    inbound,
                    outbound,
                    priority,
                } => {
                    inbound.iter().try_for_each(|&i| check(i))?;
                    check(outbound)?;
                    unit("merge priority", priority)?;
                    inbound.iter().for_each(|&i| down[i] += 1);
                    up[outbound] += 1;
                }
            }
        }
        for (i, link) in self.links.iter().enumerate() {
            if up[i] != 1 || down[i] != 1 {
                return Err(Error::Config(format!(
                    "link {} has {} upstream and {} downstream junctions",
                    link.name, up[i], down[i]
                )));
            }
            if !(link.length > 0.0) {
                return Err(Error::Config(format!("link {} has non-positive length", link.name)));
            }
        }
        if let Some(&s) = self.sections.iter().find(|&&s| s >= n) {
            return Err(Error::Config(format!("section references missing link {s}")));
        }
        Ok(())
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }
}

fn link(name: impl Into<String>, capacity: f64, length: f64, params: &DiagramParams) -> Result<Link> {
    Ok(Link {
        name: name.into(),
        length,
        diagram: params.diagram(capacity)?,
    })
}

/// The DM network: links 0..=3, sections at the ends of links 1 and 2.
pub fn build_dm(spec: &DmSpec, params: &DiagramParams) -> Result<Network> {
    let c = spec.capacities();
    let links = (0..4)
        .map(|i| link(format!("link{i}"), c[i], spec.lengths[i], params))
        .collect::<Result<Vec<_>>>()?;
    let net = Network {
        kind: NetworkKind::Dm,
        links,
        junctions: vec![
            Junction::Origin {
                link: 0,
                demand: spec.c0,
                commodity1: spec.xi,
            },
            Junction::Diverge {
                inbound: 0,
                outbound: [1, 2],
                split: Split::Commodity,
            },
            Junction::Merge {
                inbound: [1, 2],
                outbound: 3,
                priority: spec.beta,
            },
            Junction::Destination {
                link: 3,
                supply: spec.c3,
            },
        ],
        sections: vec![1, 2],
    };
    net.validate()?;
    Ok(net)
}

/// Parameters of the symmetric (DM)^n family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmnParams {
    pub n: usize,
    pub xi: f64,
    /// Uniform scale on every capacity, demand, and supply.
    pub scale: f64,
    /// Merge priority of each congested link.
    pub priority: f64,
    pub length: f64,
}

impl DmnParams {
    /// The symmetric setup with unit scale. The congested-link priority
    /// 0.2 keeps the merge floor `2 * priority` below the cycle minimum
    /// `2 - (1 - xi) / xi` for xi >= 0.385.
    pub fn symmetric(n: usize, xi: f64) -> Self {
        Self {
            n,
            xi,
            scale: 1.0,
            priority: 0.2,
            length: 1.0,
        }
    }
}

/// A ring of `n` diverge-merge stages.
///
/// Stage `i` has an origin link `in{i}` (capacity 3, demand 3), a congested
/// link `a{i}` (capacity 1, route proportion xi) and an uncongested link
/// `b{i}` (capacity 2). The merge feeding `out{i}` (capacity 2, supply 2)
/// joins `a{i}` with `b{i-1}`, so the out-flux of `a{i}` depends on the
/// out-flux of `a{i-1}` through one diverge and one merge. All capacities
/// are multiplied by `scale`.
pub fn build_dmn(p: &DmnParams, params: &DiagramParams) -> Result<Network> {
    let n = p.n;
    if n == 0 {
        return domain("(DM)^n requires n >= 1");
    }
    if !(0.0..=1.0).contains(&p.xi) || !(0.0..=1.0).contains(&p.priority) {
        return domain(format!("xi {} / priority {} outside [0, 1]", p.xi, p.priority));
    }
    if !(p.scale > 0.0) {
        return domain(format!("scale must be positive, got {}", p.scale));
    }
    let s = p.scale;
    let mut links = Vec::with_capacity(4 * n);
    let mut junctions = Vec::with_capacity(5 * n);
    // Per stage: in = 4i, a = 4i + 1, b = 4i + 2, out = 4i + 3.
    for i in 0..n {
        links.push(link(format!("in{i}"), 3.0 * s, p.length, params)?);
        links.push(link(format!("a{i}"), s, p.length, params)?);
        links.push(link(format!("b{i}"), 2.0 * s, p.length, params)?);
        links.push(link(format!("out{i}"), 2.0 * s, p.length, params)?);
    }
    for i in 0..n {
        let prev = (i + n - 1) % n;
        junctions.push(Junction::Origin {
            link: 4 * i,
            demand: 3.0 * s,
            commodity1: p.xi,
        });
        junctions.push(Junction::Diverge {
            inbound: 4 * i,
            outbound: [4 * i + 1, 4 * i + 2],
            split: Split::Commodity,
        });
        junctions.push(Junction::Merge {
            inbound: [4 * i + 1, 4 * prev + 2],
            outbound: 4 * i + 3,
            priority: p.priority,
        });
        junctions.push(Junction::Destination {
            link: 4 * i + 3,
            supply: 2.0 * s,
        });
    }
    let net = Network {
        kind: NetworkKind::Dmn(n),
        links,
        junctions,
        sections: (0..n).map(|i| 4 * i + 1).collect(),
    };
    net.validate()?;
    Ok(net)
}

/// Parameters of a symmetric beltway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeltwayParams {
    pub n: usize,
    /// On-ramp merging ratio.
    pub beta: f64,
    /// Off-ramp turning proportion.
    pub xi: f64,
    pub capacity: f64,
    /// Length of each of the two mainline segments per ramp pair.
    pub segment_length: f64,
    pub ramp_length: f64,
}

impl BeltwayParams {
    pub fn new(n: usize, beta: f64, xi: f64) -> Self {
        Self {
            n,
            beta,
            xi,
            capacity: 1.0,
            segment_length: 1.0,
            ramp_length: 1.0,
        }
    }
}

/// A ring road with `n` alternating off-ramp / on-ramp pairs.
///
/// Pair `i`: mainline `m{i}a` ends at a FIFO diverge sending `xi` to the
/// off-ramp `off{i}` and the rest to mainline `m{i}b`; `m{i}b` and the
/// on-ramp `on{i}` merge (on-ramp ratio `beta`) into `m{i+1}a`. Sections
/// sit at the ends of the `m{i}b` segments, just upstream of each merge.
pub fn build_beltway(p: &BeltwayParams, params: &DiagramParams) -> Result<Network> {
    let n = p.n;
    if n == 0 {
        return domain("beltway requires at least one ramp pair");
    }
    for (name, v) in [("beta", p.beta), ("xi", p.xi)] {
        if !(0.0..=1.0).contains(&v) {
            return domain(format!("{name} must lie in [0, 1], got {v}"));
        }
    }
    let c = p.capacity;
    let mut links = Vec::with_capacity(4 * n);
    let mut junctions = Vec::with_capacity(5 * n);
    // Per pair: ma = 4i, mb = 4i + 1, off = 4i + 2, on = 4i + 3.
    for i in 0..n {
        links.push(link(format!("m{i}a"), c, p.segment_length, params)?);
        links.push(link(format!("m{i}b"), c, p.segment_length, params)?);
        links.push(link(format!("off{i}"), c, p.ramp_length, params)?);
        links.push(link(format!("on{i}"), c, p.ramp_length, params)?);
    }
    for i in 0..n {
        let next = (i + 1) % n;
        junctions.push(Junction::Diverge {
            inbound: 4 * i,
            outbound: [4 * i + 2, 4 * i + 1],
            split: Split::Fixed(p.xi),
        });
        junctions.push(Junction::Destination {
            link: 4 * i + 2,
            supply: c,
        });
        junctions.push(Junction::Origin {
            link: 4 * i + 3,
            demand: c,
            commodity1: 0.0,
        });
        junctions.push(Junction::Merge {
            inbound: [4 * i + 3, 4 * i + 1],
            outbound: 4 * next,
            priority: p.beta,
        });
    }
    let net = Network {
        kind: NetworkKind::Beltway(n),
        links,
        junctions,
        sections: (0..n).map(|i| 4 * i + 1).collect(),
    };
    net.validate()?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(net: &Network) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        for j in &net.junctions {
            match j {
                Junction::Origin { .. } => c.0 += 1,
                Junction::Destination { .. } => c.1 += 1,
                Junction::Diverge { .. } => c.2 += 1,
                Junction::Merge { .. } => c.3 += 1,
            }
        }
        c
    }

    #[test]
    fn dm_is_dmn_base_case() {
        let spec = DmSpec::new(3.0, 1.0, 2.0, 2.0, 0.2, 0.4).unwrap();
        let dm = build_dm(&spec, &DiagramParams::default()).unwrap();
        let d1 = build_dmn(&DmnParams::symmetric(1, 0.4), &DiagramParams::default()).unwrap();
        assert_eq!(count(&dm), count(&d1));
        let caps = |n: &Network| n.links.iter().map(Link::capacity).collect::<Vec<_>>();
        assert_eq!(caps(&dm), caps(&d1));
        match d1.junctions[2] {
            Junction::Merge { inbound, .. } => assert_eq!(inbound, [1, 2]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn dmn_counts() {
        let p = DiagramParams::default();
        let d2 = build_dmn(&DmnParams::symmetric(2, 0.4), &p).unwrap();
        let intermediate = |n: &Network| {
            n.links
                .iter()
                .filter(|l| l.name.starts_with('a') || l.name.starts_with('b'))
                .count()
        };
        assert_eq!(intermediate(&d2), 4);
        assert_eq!(count(&d2), (2, 2, 2, 2));
        let d3 = build_dmn(&DmnParams::symmetric(3, 0.4), &p).unwrap();
        assert_eq!(intermediate(&d3), 6);
        assert!(build_dmn(&DmnParams::symmetric(0, 0.4), &p).is_err());
    }

    #[test]
    fn beltway_topology() {
        let p = DiagramParams::default();
        let b1 = build_beltway(&BeltwayParams::new(1, 0.3, 0.2), &p).unwrap();
        assert_eq!(count(&b1), (1, 1, 1, 1));
        let b4 = build_beltway(&BeltwayParams::new(4, 0.3, 0.2), &p).unwrap();
        assert_eq!(count(&b4), (4, 4, 4, 4));
        assert_eq!(b4.links.len(), 16);
        let b0 = build_beltway(&BeltwayParams::new(2, 0.3, 0.0), &p).unwrap();
        assert!(matches!(
            b0.junctions[0],
            Junction::Diverge {
                split: Split::Fixed(x),
                ..
            } if x == 0.0
        ));
        assert!(build_beltway(&BeltwayParams::new(0, 0.3, 0.2), &p).is_err());
        assert!(build_beltway(&BeltwayParams::new(2, 1.3, 0.2), &p).is_err());
    }

    #[test]
    fn validate_catches_dangling_links() {
        let spec = DmSpec::new(3.0, 1.0, 2.0, 2.0, 0.2, 0.4).unwrap();
        let mut net = build_dm(&spec, &DiagramParams::default()).unwrap();
        net.junctions.pop();
        assert!(matches!(net.validate(), Err(Error::Config(_))));
    }
}
