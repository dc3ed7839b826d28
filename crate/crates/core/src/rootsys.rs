//! Root systems of types A..G, finite products, and parabolic subsystems.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{q, qf, qmat_inverse, to_f64, QMatrix, WeightVector, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        };
        write!(f, "{c}")
    }
}

/// Irreducible Cartan type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CartanType {
    pub family: Family,
    pub rank: usize,
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

impl CartanType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if !ok || rank > 8 {
            return Err(Error::Config(format!("unsupported type {family}{rank}")));
        }
        Ok(Self { family, rank })
    }

    /// Dimension of the compact simple group.
    pub fn group_dim(&self) -> usize {
        let r = self.rank;
        match self.family {
            Family::A => r * r + 2 * r,
            Family::B | Family::C => 2 * r * r + r,
            Family::D => 2 * r * r - r,
            Family::E => match r {
                6 => 78,
                7 => 133,
                _ => 248,
            },
            Family::F => 52,
            Family::G => 14,
        }
    }

    pub fn num_positive_roots(&self) -> usize {
        (self.group_dim() - self.rank) / 2
    }

    pub fn weyl_order(&self) -> u128 {
        let r = self.rank as u128;
        let fact = |n: u128| (1..=n).product::<u128>();
        match self.family {
            Family::A => fact(r + 1),
            Family::B | Family::C => (1u128 << r) * fact(r),
            Family::D => (1u128 << (r - 1)) * fact(r),
            Family::E => match r {
                6 => 51_840,
                7 => 2_903_040,
                _ => 696_729_600,
            },
            Family::F => 1152,
            Family::G => 12,
        }
    }

    /// Every supported irreducible type of rank at most `max_rank`.
    pub fn all_up_to(max_rank: usize) -> Vec<CartanType> {
        let mut out = Vec::new();
        for r in 1..=max_rank.min(8) {
            for fam in [Family::A, Family::B, Family::C, Family::D, Family::E, Family::F, Family::G] {
                if fam == Family::C && r == 2 {
                    continue;
                }
                if let Ok(t) = CartanType::new(fam, r) {
                    out.push(t);
                }
            }
        }
        out
    }
}

/// Abstract root data determined by the Gram matrix of a base.
///
/// Roots are stored as integer coefficient vectors with respect to the base.
#[derive(Clone, Debug)]
pub struct RootDatum {
    pub gram: QMatrix,
    pub cartan: Vec<Vec<i64>>,
    pub positive: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
}

impl RootDatum {
    pub fn from_gram(gram: QMatrix) -> Self {
        let r = gram.len();
        let cartan: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        let v = q(2) * gram[i][j] / gram[j][j];
                        assert!(v.is_integer(), "non-crystallographic Gram matrix");
                        v.to_integer()
                    })
                    .collect()
            })
            .collect();
        let positive = generate_positive_roots(&cartan);
        let index = positive.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        Self { gram, cartan, positive, index }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn root_index(&self, coeffs: &[i64]) -> Option<usize> {
        self.index.get(coeffs).copied()
    }

    /// Index of `±coeffs` among the positive roots with the sign.
    pub fn signed_root_index(&self, coeffs: &[i64]) -> Option<(usize, i64)> {
        if let Some(i) = self.root_index(coeffs) {
            return Some((i, 1));
        }
        let neg: Vec<i64> = coeffs.iter().map(|c| -c).collect();
        self.root_index(&neg).map(|i| (i, -1))
    }

    pub fn inner(&self, a: &[i64], b: &[i64]) -> Q {
        let mut s = Q::zero();
        for i in 0..a.len() {
            if a[i] == 0 {
                continue;
            }
            for j in 0..b.len() {
                if b[j] != 0 {
                    s += self.gram[i][j] * (a[i] * b[j]);
                }
            }
        }
        s
    }

    pub fn height(coeffs: &[i64]) -> i64 {
        coeffs.iter().sum()
    }

    /// Connected components of the Dynkin diagram, as sorted node lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let r = self.rank();
        let mut seen = vec![false; r];
        let mut comps = Vec::new();
        for s in 0..r {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            seen[s] = true;
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for w in 0..r {
                    if !seen[w] && self.cartan[v][w] != 0 {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Cartan types of the irreducible components, in component order.
    pub fn component_types(&self) -> Vec<CartanType> {
        self.components().iter().map(|c| self.identify_component(c)).collect()
    }

    fn identify_component(&self, nodes: &[usize]) -> CartanType {
        let k = nodes.len();
        let on: HashSet<usize> = nodes.iter().copied().collect();
        let mut lens: Vec<Q> = Vec::new();
        for root in &self.positive {
            let support: Vec<usize> = (0..root.len()).filter(|&i| root[i] != 0).collect();
            if support.iter().all(|i| on.contains(i)) {
                lens.push(self.inner(root, root));
            }
        }
        let npos = lens.len();
        let maxlen = lens.iter().max().copied().unwrap_or_else(Q::zero);
        let nlong = lens.iter().filter(|l| **l == maxlen).count();
        let nshort = npos - nlong;
        let fam = if nshort == 0 {
            if k == 1 || npos == k * (k + 1) / 2 {
                Family::A
            } else if npos == k * (k - 1) {
                Family::D
            } else {
                Family::E
            }
        } else if k == 2 && npos == 6 {
            Family::G
        } else if k == 4 && npos == 24 {
            Family::F
        } else if nlong == k * (k - 1) {
            Family::B
        } else {
            Family::C
        };
        CartanType { family: fam, rank: k }
    }

    /// Sum of positive roots (twice the Weyl vector), in base coordinates.
    pub fn two_rho(&self) -> Vec<i64> {
        let r = self.rank();
        let mut s = vec![0i64; r];
        for root in &self.positive {
            for i in 0..r {
                s[i] += root[i];
            }
        }
        s
    }

    /// `<beta, alpha_i^vee>` for every base index i.
    pub fn coroot_pairings(&self, beta: &[i64]) -> Vec<i64> {
        let r = self.rank();
        (0..r).map(|i| (0..r).map(|j| beta[j] * self.cartan[j][i]).sum()).collect()
    }

    pub fn inverse_cartan(&self) -> QMatrix {
        let a: QMatrix = self.cartan.iter().map(|row| row.iter().map(|&x| q(x)).collect()).collect();
        qmat_inverse(&a).expect("Cartan matrix is invertible")
    }

    /// Gram matrix of the fundamental weights.
    pub fn weight_gram(&self) -> QMatrix {
        let inv = self.inverse_cartan();
        let r = self.rank();
        (0..r)
            .map(|i| (0..r).map(|j| inv[i][j] * self.gram[j][j] / q(2)).collect())
            .collect()
    }
}

fn generate_positive_roots(cartan: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let r = cartan.len();
    let mut set: HashSet<Vec<i64>> = HashSet::new();
    let mut all: Vec<Vec<i64>> = Vec::new();
    let mut level: Vec<Vec<i64>> = (0..r)
        .map(|i| {
            let mut v = vec![0; r];
            v[i] = 1;
            v
        })
        .collect();
    for v in &level {
        set.insert(v.clone());
    }
    while !level.is_empty() {
        all.extend(level.iter().cloned());
        let mut next = Vec::new();
        for beta in &level {
            for i in 0..r {
                let pair: i64 = (0..r).map(|j| beta[j] * cartan[j][i]).sum();
                let mut p = 0;
                loop {
                    let mut down = beta.clone();
                    down[i] -= p + 1;
                    if down[i] < 0 || !set.contains(&down) {
                        break;
                    }
                    p += 1;
                }
                if p - pair > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if set.insert(up.clone()) {
                        next.push(up);
                    }
                }
            }
        }
        next.sort();
        level = next;
    }
    all
}

/// One irreducible factor of a root system.
#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub cartan_type: CartanType,
    /// Offset of the component's simple roots in the global numbering.
    pub offset: usize,
    pub marks: Vec<i64>,
    /// Global simple-root coefficients of the component's lowest root.
    pub lowest_coeffs: Vec<i64>,
}

/// Exact Euclidean realization of a root system.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub label: String,
    pub rank: usize,
    pub ambient_dim: usize,
    /// Diagonal of the ambient inner product.
    pub metric: Vec<Q>,
    pub simple_roots: Vec<WeightVector>,
    pub positive_roots: Vec<WeightVector>,
    pub lowest_root: WeightVector,
    pub weyl_vector: WeightVector,
    pub cartan_matrix: Vec<Vec<i64>>,
    pub marks: Vec<i64>,
    pub components: Vec<Component>,
    pub datum: RootDatum,
}

fn e(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn addv(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scalev(a: &[Q], s: Q) -> Vec<Q> {
    a.iter().map(|x| x * s).collect()
}

/// Ambient metric weight and simple roots of an irreducible type.
fn realize(t: CartanType) -> (Q, Vec<Vec<Q>>) {
    let r = t.rank;
    match t.family {
        Family::A => {
            let n = r + 1;
            (Q::one(), (0..r).map(|i| sub(&e(n, i), &e(n, i + 1))).collect())
        }
        Family::B => {
            let mut s: Vec<Vec<Q>> = (0..r - 1).map(|i| sub(&e(r, i), &e(r, i + 1))).collect();
            s.push(e(r, r - 1));
            (Q::one(), s)
        }
        Family::C => {
            let mut s: Vec<Vec<Q>> = (0..r - 1).map(|i| sub(&e(r, i), &e(r, i + 1))).collect();
            s.push(scalev(&e(r, r - 1), q(2)));
            (qf(1, 2), s)
        }
        Family::D => {
            let mut s: Vec<Vec<Q>> = (0..r - 1).map(|i| sub(&e(r, i), &e(r, i + 1))).collect();
            s.push(addv(&e(r, r - 2), &e(r, r - 1)));
            (Q::one(), s)
        }
        Family::E => {
            let n = 8;
            let h = qf(1, 2);
            let mut a1 = vec![-h; n];
            a1[0] = h;
            a1[7] = h;
            let mut s = vec![a1, addv(&e(n, 0), &e(n, 1))];
            for i in 0..6 {
                s.push(sub(&e(n, i + 1), &e(n, i)));
            }
            s.truncate(r);
            (Q::one(), s)
        }
        Family::F => {
            let n = 4;
            let h = qf(1, 2);
            (
                Q::one(),
                vec![
                    sub(&e(n, 1), &e(n, 2)),
                    sub(&e(n, 2), &e(n, 3)),
                    e(n, 3),
                    vec![h, -h, -h, -h],
                ],
            )
        }
        Family::G => (
            qf(1, 3),
            vec![vec![q(1), q(-1), q(0)], vec![q(-2), q(1), q(1)]],
        ),
    }
}

/// Parse labels such as `A2`, `G_2`, `A1xB2` or `A1×A1`.
pub fn parse_label(label: &str) -> Result<Vec<CartanType>> {
    let cleaned = label.replace('×', "x").replace('_', "").replace(' ', "");
    if cleaned.is_empty() {
        return Err(Error::Config("empty type label".into()));
    }
    let mut out = Vec::new();
    for part in cleaned.split(['x', 'X', '*']) {
        let mut chars = part.chars();
        let fam = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => Family::A,
            Some('B') => Family::B,
            Some('C') => Family::C,
            Some('D') => Family::D,
            Some('E') => Family::E,
            Some('F') => Family::F,
            Some('G') => Family::G,
            _ => return Err(Error::Config(format!("unsupported type label '{label}'"))),
        };
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| Error::Config(format!("unsupported type label '{label}'")))?;
        out.push(CartanType::new(fam, rank)?);
    }
    Ok(out)
}

impl RootSystem {
    pub fn build(label: &str) -> Result<Self> {
        let types = parse_label(label)?;
        Ok(Self::from_types(&types))
    }

    pub fn from_types(types: &[CartanType]) -> Self {
        let realized: Vec<(Q, Vec<Vec<Q>>)> = types.iter().map(|&t| realize(t)).collect();
        let ambient_dim: usize = realized.iter().map(|(_, s)| s[0].len()).sum();
        let mut metric = Vec::with_capacity(ambient_dim);
        let mut simple = Vec::new();
        let mut off = 0;
        for (w, roots) in &realized {
            let n = roots[0].len();
            metric.extend(std::iter::repeat(*w).take(n));
            for root in roots {
                let mut v = vec![Q::zero(); ambient_dim];
                v[off..off + n].clone_from_slice(root);
                simple.push(WeightVector { coords: v });
            }
            off += n;
        }
        let rank = simple.len();
        let inner = |a: &WeightVector, b: &WeightVector| -> Q {
            a.coords.iter().zip(&b.coords).zip(&metric).map(|((x, y), m)| x * y * m).sum()
        };
        let gram: QMatrix =
            (0..rank).map(|i| (0..rank).map(|j| inner(&simple[i], &simple[j])).collect()).collect();
        let datum = RootDatum::from_gram(gram);
        let to_ambient = |c: &[i64]| -> WeightVector {
            let mut v = WeightVector::zero(ambient_dim);
            for (i, &ci) in c.iter().enumerate() {
                if ci != 0 {
                    v = v.add_scaled(q(ci), &simple[i]);
                }
            }
            v
        };
        let positive_roots: Vec<WeightVector> = datum.positive.iter().map(|c| to_ambient(c)).collect();
        let mut weyl_vector = WeightVector::zero(ambient_dim);
        for p in &positive_roots {
            weyl_vector = weyl_vector.add_scaled(qf(1, 2), p);
        }

        let mut components = Vec::new();
        let mut marks = vec![0i64; rank];
        let mut offset = 0;
        for &t in types {
            let nodes: Vec<usize> = (offset..offset + t.rank).collect();
            let highest = datum
                .positive
                .iter()
                .filter(|c| {
                    c.iter().enumerate().all(|(i, &x)| x == 0 || nodes.contains(&i))
                })
                .max_by_key(|c| RootDatum::height(c))
                .expect("component has roots")
                .clone();
            let cm: Vec<i64> = nodes.iter().map(|&i| highest[i]).collect();
            for (k, &i) in nodes.iter().enumerate() {
                marks[i] = cm[k];
            }
            components.push(Component {
                cartan_type: t,
                offset,
                marks: cm,
                lowest_coeffs: highest.iter().map(|x| -x).collect(),
            });
            offset += t.rank;
        }
        let lowest_root = to_ambient(&components[0].lowest_coeffs);
        let label = types.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("x");
        RootSystem {
            label,
            rank,
            ambient_dim,
            metric,
            simple_roots: simple,
            positive_roots,
            lowest_root,
            weyl_vector,
            cartan_matrix: datum.cartan.clone(),
            marks,
            components,
            datum,
        }
    }

    pub fn is_irreducible(&self) -> bool {
        self.components.len() == 1
    }

    pub fn cartan_type(&self) -> Option<CartanType> {
        if self.is_irreducible() {
            Some(self.components[0].cartan_type)
        } else {
            None
        }
    }

    pub fn require_irreducible(&self, what: &str) -> Result<CartanType> {
        self.cartan_type()
            .ok_or_else(|| Error::Capability(format!("{what} needs an irreducible system, got {}", self.label)))
    }

    pub fn num_positive(&self) -> usize {
        self.datum.positive.len()
    }

    /// Group dimension d = r + 2|Σ^+|.
    pub fn group_dim(&self) -> usize {
        self.rank + 2 * self.num_positive()
    }

    pub fn weyl_order(&self) -> u128 {
        self.components.iter().map(|c| c.cartan_type.weyl_order()).product()
    }

    pub fn inner(&self, a: &WeightVector, b: &WeightVector) -> Q {
        a.coords.iter().zip(&b.coords).zip(&self.metric).map(|((x, y), m)| x * y * m).sum()
    }

    pub fn norm2(&self, a: &WeightVector) -> Q {
        self.inner(a, a)
    }

    pub fn coeffs_to_ambient(&self, c: &[i64]) -> WeightVector {
        let mut v = WeightVector::zero(self.ambient_dim);
        for (i, &ci) in c.iter().enumerate() {
            if ci != 0 {
                v = v.add_scaled(q(ci), &self.simple_roots[i]);
            }
        }
        v
    }

    /// Fundamental weights ω_i, dual to the simple coroots.
    pub fn fundamental_weights(&self) -> Vec<WeightVector> {
        let inv = self.datum.inverse_cartan();
        (0..self.rank)
            .map(|i| {
                let mut v = WeightVector::zero(self.ambient_dim);
                for k in 0..self.rank {
                    if !inv[i][k].is_zero() {
                        v = v.add_scaled(inv[i][k], &self.simple_roots[k]);
                    }
                }
                v
            })
            .collect()
    }

    /// Dynkin labels 2(λ,α_i)/(α_i,α_i); rational in general.
    pub fn dynkin_labels(&self, lambda: &WeightVector) -> Vec<Q> {
        self.simple_roots
            .iter()
            .map(|a| q(2) * self.inner(lambda, a) / self.inner(a, a))
            .collect()
    }

    /// Integer Dynkin labels, or a domain error when λ is not a weight.
    pub fn weight_labels(&self, lambda: &WeightVector) -> Result<Vec<i64>> {
        let l = self.dynkin_labels(lambda);
        if l.iter().all(|x| x.is_integer()) && self.in_root_span(lambda) {
            Ok(l.iter().map(|x| x.to_integer()).collect())
        } else {
            Err(Error::Domain(format!("{lambda} is not in the weight lattice")))
        }
    }

    fn in_root_span(&self, lambda: &WeightVector) -> bool {
        let labels = self.dynkin_labels(lambda);
        let back = self.labels_to_ambient_q(&labels);
        back == *lambda
    }

    pub fn labels_to_ambient(&self, labels: &[i64]) -> WeightVector {
        let ql: Vec<Q> = labels.iter().map(|&x| q(x)).collect();
        self.labels_to_ambient_q(&ql)
    }

    fn labels_to_ambient_q(&self, labels: &[Q]) -> WeightVector {
        let w = self.fundamental_weights();
        let mut v = WeightVector::zero(self.ambient_dim);
        for (i, l) in labels.iter().enumerate() {
            if !l.is_zero() {
                v = v.add_scaled(*l, &w[i]);
            }
        }
        v
    }

    /// Simple-root coefficients of a weight given by Dynkin labels.
    pub fn labels_to_coeffs(&self, labels: &[i64]) -> Vec<Q> {
        let inv = self.datum.inverse_cartan();
        (0..self.rank)
            .map(|k| (0..self.rank).map(|i| inv[i][k] * labels[i]).sum())
            .collect()
    }

    pub fn labels_to_coeffs_f64(&self, labels: &[i64]) -> Vec<f64> {
        self.labels_to_coeffs(labels).iter().map(to_f64).collect()
    }

    /// Inner product of two weights given by Dynkin labels.
    pub fn labels_inner(&self, a: &[i64], b: &[i64]) -> Q {
        let g = self.datum.weight_gram();
        let mut s = Q::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                if a[i] != 0 && b[j] != 0 {
                    s += g[i][j] * (a[i] * b[j]);
                }
            }
        }
        s
    }

    /// Global simple-root coefficients of the node-`j` root, with node 0 the lowest root.
    pub fn node_coeffs(&self, j: usize) -> Vec<i64> {
        if j == 0 {
            self.components[0].lowest_coeffs.clone()
        } else {
            let mut v = vec![0; self.rank];
            v[j - 1] = 1;
            v
        }
    }

    /// Mark of node j of the extended diagram (m_0 = 1).
    pub fn mark(&self, j: usize) -> i64 {
        if j == 0 {
            1
        } else {
            self.marks[j - 1]
        }
    }

    pub fn root_length2(&self, coeffs: &[i64]) -> Q {
        self.datum.inner(coeffs, coeffs)
    }

    /// `<λ, β^∨>` for λ in Dynkin labels and β in simple-root coefficients.
    pub fn coroot_pairing(&self, labels: &[i64], beta: &[i64]) -> i64 {
        let mut s = Q::zero();
        for k in 0..self.rank {
            if beta[k] != 0 && labels[k] != 0 {
                s += self.datum.gram[k][k] * (beta[k] * labels[k]);
            }
        }
        let v = s / self.root_length2(beta);
        debug_assert!(v.is_integer());
        v.to_integer()
    }

    pub fn parabolic_subsystem(&self, j: &[usize]) -> Result<Parabolic> {
        Parabolic::new(self, j)
    }
}

/// Parabolic subsystem Σ_J generated by the extended-diagram nodes in J.
#[derive(Clone, Debug)]
pub struct Parabolic {
    pub nodes: Vec<usize>,
    /// Global simple-root coefficients of α_j for j in `nodes`.
    pub base: Vec<Vec<i64>>,
    pub datum: RootDatum,
    /// Positive roots of Σ_J in the sense of Σ^+ ∩ Σ_J, as indices into the parent's positives.
    pub positive: Vec<usize>,
    /// Base-positive roots of Σ_J in global coordinates (negative when 0 ∈ J may occur).
    pub base_positive_global: Vec<Vec<i64>>,
    /// (-1)^(number of base-positive roots that are negative in Σ^+).
    pub sign: i64,
    pub types: Vec<CartanType>,
    pub weyl_order: u128,
    pub rho: WeightVector,
}

impl Parabolic {
    pub fn new(rs: &RootSystem, j: &[usize]) -> Result<Self> {
        rs.require_irreducible("parabolic subsystem")?;
        let mut nodes = j.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.iter().any(|&x| x > rs.rank) {
            return Err(Error::Config(format!("node index out of range in {j:?}")));
        }
        if nodes.len() == rs.rank + 1 {
            return Err(Error::NotProper(format!("{j:?} is the full node set")));
        }
        let base: Vec<Vec<i64>> = nodes.iter().map(|&n| rs.node_coeffs(n)).collect();
        let k = base.len();
        let gram: QMatrix =
            (0..k).map(|a| (0..k).map(|b| rs.datum.inner(&base[a], &base[b])).collect()).collect();
        let datum = RootDatum::from_gram(gram);
        let mut positive = Vec::new();
        let mut base_positive_global = Vec::new();
        let mut sign = 1;
        for c in &datum.positive {
            let mut g = vec![0i64; rs.rank];
            for (a, &ca) in c.iter().enumerate() {
                for i in 0..rs.rank {
                    g[i] += ca * base[a][i];
                }
            }
            let (idx, s) = rs.datum.signed_root_index(&g).expect("subsystem root is a root");
            positive.push(idx);
            if s < 0 {
                sign = -sign;
            }
            base_positive_global.push(g);
        }
        positive.sort_unstable();
        let types = if k == 0 { Vec::new() } else { datum.component_types() };
        let weyl_order = types.iter().map(|t| t.weyl_order()).product();
        let mut rho = WeightVector::zero(rs.ambient_dim);
        for &i in &positive {
            rho = rho.add_scaled(qf(1, 2), &rs.positive_roots[i]);
        }
        Ok(Self { nodes, base, datum, positive, base_positive_global, sign, types, weyl_order, rho })
    }

    pub fn label(&self) -> String {
        if self.types.is_empty() {
            return "trivial".into();
        }
        let mut t: Vec<String> = self.types.iter().map(|t| t.to_string()).collect();
        t.sort();
        t.join("x")
    }

    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    pub fn contains_root(&self, parent_index: usize) -> bool {
        self.positive.binary_search(&parent_index).is_ok()
    }
}

/// All nonempty subsets of {0..n-1} as sorted vectors, in order of increasing size.
pub fn subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..(1u32 << n))
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b: &Vec<usize>| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

pub fn abs_q(x: Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_root_counts_match_dimension_formula() {
        for t in CartanType::all_up_to(8) {
            let rs = RootSystem::from_types(&[t]);
            assert_eq!(rs.num_positive(), t.num_positive_roots(), "{t}");
            assert_eq!(rs.group_dim(), t.group_dim(), "{t}");
        }
    }

    #[test]
    fn long_roots_have_length_two() {
        for t in CartanType::all_up_to(8) {
            let rs = RootSystem::from_types(&[t]);
            let max = rs.positive_roots.iter().map(|r| rs.norm2(r)).max().unwrap();
            assert_eq!(max, q(2), "{t}");
        }
    }

    #[test]
    fn marks_table() {
        let cases: &[(&str, &[i64])] = &[
            ("A3", &[1, 1, 1]),
            ("B3", &[1, 2, 2]),
            ("C3", &[2, 2, 1]),
            ("D5", &[1, 2, 2, 1, 1]),
            ("E6", &[1, 2, 2, 3, 2, 1]),
            ("E7", &[2, 2, 3, 4, 3, 2, 1]),
            ("E8", &[2, 3, 4, 6, 5, 4, 3, 2]),
            ("F4", &[2, 3, 4, 2]),
            ("G2", &[3, 2]),
        ];
        for (label, marks) in cases {
            let rs = RootSystem::build(label).unwrap();
            assert_eq!(rs.marks, marks.to_vec(), "{label}");
        }
    }

    #[test]
    fn a2_positive_roots() {
        let rs = RootSystem::build("A2").unwrap();
        assert_eq!(rs.datum.positive, vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn b2_vertex_subsystem_is_a1xa1() {
        let rs = RootSystem::build("B2").unwrap();
        let p = rs.parabolic_subsystem(&[0, 1]).unwrap();
        assert_eq!(p.label(), "A1xA1");
        let p = rs.parabolic_subsystem(&[0, 2]).unwrap();
        assert_eq!(p.label(), "B2");
    }

    #[test]
    fn g2_vertex_subsystems() {
        let rs = RootSystem::build("G2").unwrap();
        let labels: Vec<String> =
            [[0, 1], [0, 2], [1, 2]].iter().map(|j| rs.parabolic_subsystem(j).unwrap().label()).collect();
        assert!(labels.contains(&"A2".to_string()));
        assert!(labels.contains(&"A1xA1".to_string()));
        assert!(labels.contains(&"G2".to_string()));
    }

    #[test]
    fn full_node_set_rejected() {
        let rs = RootSystem::build("A2").unwrap();
        assert!(matches!(rs.parabolic_subsystem(&[0, 1, 2]), Err(Error::NotProper(_))));
    }

    #[test]
    fn product_labels() {
        let rs = RootSystem::build("A1xA2").unwrap();
        assert_eq!(rs.rank, 3);
        assert_eq!(rs.num_positive(), 4);
        assert_eq!(rs.weyl_order(), 12);
        assert!(RootSystem::build("Q3").is_err());
        assert!(RootSystem::build("D3").is_err());
    }
}
