use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use super::GradedAlgebra;
use crate::error::{Error, Result};
use crate::free::{lyndon_words, standard_bracketing, Tensor, Word};
use crate::scalar::{qi, Rational};

/// Default bound on free-algebra workload (`d₁^k` words, `N^k` for tables).
pub const DEFAULT_WORK_CAP: u128 = 4096;

/// Workload cap, overridable through `CARNOT_CERT_CAP`.
pub fn work_cap() -> u128 {
    std::env::var("CARNOT_CERT_CAP").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_WORK_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Heisenberg(usize),
    Engel,
    FreeNilpotent { d: usize, k: usize },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Heisenberg(n) => write!(f, "heisenberg({n})"),
            Family::Engel => write!(f, "engel"),
            Family::FreeNilpotent { d, k } => write!(f, "free_nilpotent({d},{k})"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(|| Error::UnknownFamily(s.into()))?;
                let args: std::result::Result<Vec<usize>, _> =
                    inner.split(',').map(|a| a.trim().parse::<usize>()).collect();
                (name.trim(), args.map_err(|_| Error::UnsupportedParams(format!("bad parameters in `{s}`")))?)
            }
            None => (s, Vec::new()),
        };
        match (name, args.as_slice()) {
            ("heisenberg", []) => Ok(Family::Heisenberg(1)),
            ("heisenberg", [n]) => Ok(Family::Heisenberg(*n)),
            ("engel", []) => Ok(Family::Engel),
            ("free_nilpotent", [d, k]) => Ok(Family::FreeNilpotent { d: *d, k: *k }),
            ("heisenberg" | "engel" | "free_nilpotent", _) => {
                Err(Error::UnsupportedParams(format!("wrong number of parameters in `{s}`")))
            }
            _ => Err(Error::UnknownFamily(s.into())),
        }
    }
}

pub fn builtin_family(family: &Family) -> Result<GradedAlgebra> {
    let alg = match *family {
        Family::Heisenberg(n) => heisenberg(n)?,
        Family::Engel => engel()?,
        Family::FreeNilpotent { d, k } => free_nilpotent(d, k)?,
    };
    alg.validate()?;
    Ok(alg)
}

fn heisenberg(n: usize) -> Result<GradedAlgebra> {
    if n == 0 {
        return Err(Error::UnsupportedParams("heisenberg(n) needs n >= 1".into()));
    }
    let z = 2 * n;
    let table = (0..n).map(|a| ((a, a + n), BTreeMap::from([(z, qi(1))]))).collect();
    GradedAlgebra::from_structure(Family::Heisenberg(n).to_string(), vec![2 * n, 1], table)
}

fn engel() -> Result<GradedAlgebra> {
    let table = BTreeMap::from([((0, 1), BTreeMap::from([(2, qi(1))])), ((0, 2), BTreeMap::from([(3, qi(1))]))]);
    GradedAlgebra::from_structure("engel", vec![2, 1, 1], table)
}

/// `(1/l) Σ_{m | l} μ(m) d^{l/m}`.
pub fn witt_dimension(d: usize, l: usize) -> usize {
    let mut total: i128 = 0;
    for m in (1..=l).filter(|m| l % m == 0) {
        total += mobius(m) as i128 * (d as i128).pow((l / m) as u32);
    }
    (total / l as i128) as usize
}

fn mobius(mut n: usize) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Free nilpotent algebra on the Hall basis given by standard bracketings of
/// Lyndon words; structure constants come from expanding each bracket in
/// the free associative algebra and peeling off leading Lyndon words.
fn free_nilpotent(d: usize, k: usize) -> Result<GradedAlgebra> {
    if d < 2 || k < 1 {
        return Err(Error::UnsupportedParams("free_nilpotent(d, k) needs d >= 2 and k >= 1".into()));
    }
    let cap = work_cap();
    let work = (d as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if work > cap || d > u16::MAX as usize {
        return Err(Error::UnsupportedParams(format!("free_nilpotent({d},{k}) needs {d}^{k} words, above cap {cap}")));
    }
    let mut basis: Vec<Word> = lyndon_words(d as u16, k);
    basis.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let dims: Vec<usize> = (1..=k).map(|l| basis.iter().filter(|w| w.len() == l).count()).collect();
    for (l, &dl) in dims.iter().enumerate() {
        debug_assert_eq!(dl, witt_dimension(d, l + 1));
    }
    let index: BTreeMap<&Word, usize> = basis.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let polys: Vec<Tensor> = basis.iter().map(|w| standard_bracketing(w)).collect();
    let mut table = BTreeMap::new();
    for a in 0..basis.len() {
        for b in a + 1..basis.len() {
            let len = basis[a].len() + basis[b].len();
            if len > k {
                continue;
            }
            let mut rest = polys[a].commutator(&polys[b], len);
            let mut out = BTreeMap::new();
            while let Some((w, c)) = rest.terms.iter().next().map(|(w, c)| (w.clone(), c.clone())) {
                let &i = index.get(&w).expect("leading word of a Lie polynomial is Lyndon");
                rest.add_scaled(&-c.clone(), &polys[i]);
                out.insert(i, c);
            }
            out.retain(|_, c: &mut Rational| !c.is_zero());
            if !out.is_empty() {
                table.insert((a, b), out);
            }
        }
    }
    GradedAlgebra::from_structure(Family::FreeNilpotent { d, k }.to_string(), dims, table)
}
