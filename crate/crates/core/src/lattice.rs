//! Lattices given by a Malcev basis, their Popp covolume, short elements
//! and the systolic comparison `sys ≤ C·vol^{1/Q}`.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjust::LengthReport;
use crate::algebra::{builtin_family, load_algebra, Family, GVec, GradedAlgebra};
use crate::bch::bch_product;
use crate::certificates::BoxConstants;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::path::{certified_dcc_upper, dcc_lower_bound, DccCertificate};
use crate::popp::PoppMetric;
use crate::scalar::{format_f64, Rational, RationalInput};

/// Hard cap on the number of enumerated elements.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// Lattice document: `{"algebra", "generators", "malcev_basis"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub algebra: String,
    pub generators: Vec<Vec<RationalInput>>,
    pub malcev_basis: Vec<Vec<RationalInput>>,
}

/// A builtin family id, or a path to an algebra document (relative paths
/// resolve against `base`).
pub fn resolve_algebra(name: &str, base: Option<&Path>) -> Result<GradedAlgebra> {
    if let Ok(f) = name.parse::<Family>() {
        return builtin_family(&f);
    }
    let p = Path::new(name);
    let full = match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    };
    load_algebra(&std::fs::read_to_string(full)?)
}

impl LatticeSpec {
    pub fn parse(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn build(&self, base: Option<&Path>) -> Result<Lattice> {
        self.build_with(resolve_algebra(&self.algebra, base)?)
    }

    /// Builds over an already resolved algebra.
    pub fn build_with(&self, alg: GradedAlgebra) -> Result<Lattice> {
        let conv = |rows: &[Vec<RationalInput>]| -> Result<Vec<GVec>> {
            rows.iter()
                .map(|r| r.iter().map(RationalInput::to_rational).collect::<Result<Vec<_>>>().map(GVec))
                .collect()
        };
        Lattice::new(alg, conv(&self.generators)?, conv(&self.malcev_basis)?)
    }
}

/// `Γ = {exp(n₁b₁)⋯exp(n_n b_n) : n ∈ ℤⁿ}` for a filtration-adapted
/// Malcev basis `b`, with a generating set used for enumeration.
#[derive(Debug, Clone)]
pub struct Lattice {
    algebra: GradedAlgebra,
    generators: Vec<GVec>,
    basis: Vec<GVec>,
    basis_inv: Matrix<Rational>,
}

impl Lattice {
    pub fn new(algebra: GradedAlgebra, generators: Vec<GVec>, basis: Vec<GVec>) -> Result<Self> {
        for v in generators.iter().chain(&basis) {
            algebra.check(v)?;
        }
        if generators.is_empty() {
            return Err(Error::Parse("lattice needs at least one generator".into()));
        }
        check_filtration_adapted(&algebra, &basis)?;
        let cols: Vec<Vec<Rational>> = basis.iter().map(|b| b.0.clone()).collect();
        let basis_inv = Matrix::from_columns(&cols).inverse().ok_or(Error::SingularBasis)?;
        let lat = Lattice { algebra, generators, basis, basis_inv };
        for (i, g) in lat.generators.iter().enumerate() {
            if !lat.contains(g)? {
                return Err(Error::Parse(format!("generator {} is not in the lattice of the Malcev basis", i + 1)));
            }
        }
        Ok(lat)
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        &self.algebra
    }

    pub fn generators(&self) -> &[GVec] {
        &self.generators
    }

    pub fn malcev_basis(&self) -> &[GVec] {
        &self.basis
    }

    /// Exponents `n` with `x = exp(n₁b₁)⋯exp(n_n b_n)`. Since the basis is
    /// filtration-adapted, each tail span is an ideal of the previous one,
    /// so the `i`-th linear coordinate of the remainder is `n_i`.
    pub fn second_kind_coords(&self, x: &GVec) -> Result<Vec<Rational>> {
        self.algebra.check(x)?;
        let mut rest = x.clone();
        let mut out = Vec::with_capacity(self.basis.len());
        for (i, b) in self.basis.iter().enumerate() {
            let c: Rational = self.basis_inv.row(i).iter().zip(&rest.0).map(|(a, v)| a * v).sum();
            if !c.is_zero() {
                rest = bch_product(&self.algebra, &b.scale(&-c.clone()), &rest)?;
            }
            out.push(c);
        }
        debug_assert!(rest.is_zero());
        Ok(out)
    }

    pub fn contains(&self, x: &GVec) -> Result<bool> {
        Ok(self.second_kind_coords(x)?.iter().all(|c| c.is_integer()))
    }

    pub fn covolume(&self, popp: &PoppMetric) -> Result<f64> {
        popp.covolume(&self.basis)
    }

    /// `δ_t Γ`.
    pub fn dilated(&self, t: &Rational) -> Result<Self> {
        let d = |vs: &[GVec]| vs.iter().map(|v| self.algebra.dilate(t, v)).collect::<Result<Vec<_>>>();
        Lattice::new(self.algebra.clone(), d(&self.generators)?, d(&self.basis)?)
    }
}

/// Leading layers must be nondecreasing, layer `l` must lead exactly `d_l`
/// members, and their layer-`l` parts must be independent.
pub fn check_filtration_adapted(alg: &GradedAlgebra, basis: &[GVec]) -> Result<()> {
    if basis.len() != alg.dim() {
        return Err(Error::NotFiltrationAdapted(format!("{} basis vectors for dimension {}", basis.len(), alg.dim())));
    }
    let mut prev = 1;
    let mut by_layer: BTreeMap<usize, Vec<Vec<Rational>>> = BTreeMap::new();
    for (i, b) in basis.iter().enumerate() {
        let l = alg.leading_layer(b).ok_or(Error::SingularBasis)?;
        if l < prev {
            return Err(Error::NotFiltrationAdapted(format!(
                "basis vector {} leads in layer {l} after a layer-{prev} vector",
                i + 1
            )));
        }
        prev = l;
        by_layer.entry(l).or_default().push(alg.project_layer(b, l)?);
    }
    for l in 1..=alg.step() {
        let rows = by_layer.remove(&l).unwrap_or_default();
        let d = alg.dims()[l - 1];
        if rows.len() != d {
            return Err(Error::NotFiltrationAdapted(format!("{} vectors lead in layer {l} of dimension {d}", rows.len())));
        }
        if Matrix::from_rows(rows).rank() != d {
            return Err(Error::NotFiltrationAdapted(format!("layer-{l} leading parts are dependent")));
        }
    }
    Ok(())
}

/// A word in the generators: `(index, inverse)` letters, 1-based.
pub type Word = Vec<(usize, bool)>;

pub fn format_word(w: &Word) -> String {
    w.iter().map(|&(i, inv)| if inv { format!("g{i}^-1") } else { format!("g{i}") }).collect::<Vec<_>>().join(".")
}

/// Every nontrivial product of at most `r` generators and inverses, keyed
/// by exact coordinates, each with a shortest word.
pub fn enumerate_ball(lat: &Lattice, r: usize) -> Result<BTreeMap<Vec<Rational>, Word>> {
    enumerate_ball_capped(lat, r, ENUMERATION_CAP)
}

pub fn enumerate_ball_capped(lat: &Lattice, r: usize, cap: usize) -> Result<BTreeMap<Vec<Rational>, Word>> {
    if r == 0 {
        return Err(Error::NonpositiveRadius);
    }
    let alg = &lat.algebra;
    let letters: Vec<((usize, bool), GVec)> = lat
        .generators
        .iter()
        .enumerate()
        .flat_map(|(i, g)| [((i + 1, false), g.clone()), ((i + 1, true), g.neg())])
        .collect();
    let identity = alg.zero::<Rational>().0;
    let mut seen: BTreeMap<Vec<Rational>, Word> = BTreeMap::new();
    seen.insert(identity.clone(), Vec::new());
    let mut frontier = vec![(alg.zero::<Rational>(), Word::new())];
    for _ in 0..r {
        let mut next = Vec::new();
        for (x, w) in &frontier {
            for (letter, g) in &letters {
                let y = bch_product(alg, x, g)?;
                if seen.contains_key(&y.0) {
                    continue;
                }
                let mut wy = w.clone();
                wy.push(*letter);
                seen.insert(y.0.clone(), wy.clone());
                if seen.len() > cap + 1 {
                    return Err(Error::ExplosionGuard { cap });
                }
                next.push((y, wy));
            }
        }
        frontier = next;
    }
    seen.remove(&identity);
    Ok(seen)
}

/// One enumerated element with its two distance bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementRow {
    pub word: String,
    pub coords: Vec<String>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct SystoleBound {
    pub element: GVec,
    pub word: Word,
    pub certificate: DccCertificate,
    pub rows: Vec<ElementRow>,
}

impl SystoleBound {
    pub fn bound(&self) -> f64 {
        self.certificate.bound().value
    }
}

/// Minimum certified upper bound over the word ball of radius `r`; ties go
/// to the lexicographically largest coordinates.
pub fn systole_upper_bound(lat: &Lattice, popp: &PoppMetric, r: usize) -> Result<SystoleBound> {
    let ball = enumerate_ball(lat, r)?;
    let alg = &lat.algebra;
    let items: Vec<(&Vec<Rational>, &Word)> = ball.iter().collect();
    let certs: Vec<DccCertificate> = items
        .par_iter()
        .map(|(c, _)| certified_dcc_upper(alg, popp, &GVec((*c).clone())))
        .collect::<Result<_>>()?;
    let rows: Vec<ElementRow> = items
        .iter()
        .zip(&certs)
        .map(|((c, w), cert)| ElementRow {
            word: format_word(w),
            coords: GVec((*c).clone()).to_strings(),
            lower: dcc_lower_bound(alg, &GVec((*c).clone())).value,
            upper: cert.bound().value,
        })
        .collect();
    let best = certs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.bound().value.total_cmp(&b.bound().value).then(items[*j].0.cmp(items[*i].0)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Certificate("lattice ball has no nontrivial element".into()))?;
    Ok(SystoleBound {
        element: GVec(items[best].0.clone()),
        word: items[best].1.clone(),
        certificate: certs[best].clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystolicReport {
    pub radius: usize,
    pub elements: usize,
    pub minimizer: Vec<String>,
    pub minimizer_word: String,
    pub sys_ub: LengthReport,
    pub sys_lower: String,
    pub vol: String,
    pub hausdorff_dim: usize,
    pub c: String,
    pub rhs: String,
    pub ratio: String,
    pub satisfied: bool,
    #[serde(skip)]
    pub values: SystolicValues,
}

/// The report's numbers before formatting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SystolicValues {
    pub sys_ub: f64,
    pub sys_lower: f64,
    pub vol: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn check_systolic_inequality(
    lat: &Lattice,
    popp: &PoppMetric,
    constants: &BoxConstants,
    r: usize,
) -> Result<(SystolicReport, SystoleBound)> {
    if constants.dims != lat.algebra.dims() {
        return Err(Error::Parse(format!(
            "constants computed for dims {:?}, lattice has {:?}",
            constants.dims,
            lat.algebra.dims()
        )));
    }
    let sys = systole_upper_bound(lat, popp, r)?;
    let vol = lat.covolume(popp)?;
    let rhs = constants.c * vol.powf(1.0 / constants.hausdorff_dim as f64);
    let sys_lower = dcc_lower_bound(&lat.algebra, &sys.element).value;
    let values = SystolicValues { sys_ub: sys.bound(), sys_lower, vol, rhs, ratio: sys.bound() / rhs };
    let report = SystolicReport {
        radius: r,
        elements: sys.rows.len(),
        minimizer: sys.element.to_strings(),
        minimizer_word: format_word(&sys.word),
        sys_ub: sys.certificate.bound().report(),
        sys_lower: format_f64(sys_lower),
        vol: format_f64(vol),
        hausdorff_dim: constants.hausdorff_dim,
        c: format_f64(constants.c),
        rhs: format_f64(rhs),
        ratio: format_f64(values.ratio),
        satisfied: values.sys_ub <= rhs,
        values,
    };
    Ok((report, sys))
}

/// Integer Heisenberg lattice: generators `exp X₁, exp X₂`, Malcev basis
/// `X₁, X₂, X₃`.
pub fn integer_heisenberg() -> Result<Lattice> {
    let h = builtin_family(&Family::Heisenberg(1))?;
    let (x1, x2, x3) = (h.x(1), h.x(2), h.x(3));
    Lattice::new(h, vec![x1.clone(), x2.clone()], vec![x1, x2, x3])
}

/// Engel lattice generated by `exp X₁, exp X₂`, Malcev basis
/// `X₁, X₂, X₃, ½X₄`.
pub fn integer_engel() -> Result<Lattice> {
    let e = builtin_family(&Family::Engel)?;
    let half = Rational::one() / Rational::from_integer(2.into());
    let basis = vec![e.x(1), e.x(2), e.x(3), e.x(4).scale(&half)];
    Lattice::new(e.clone(), vec![e.x(1), e.x(2)], basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::box_constants;
    use crate::popp::build_popp;
    use crate::scalar::{q, qi};

    #[test]
    fn heisenberg_ball() {
        let lat = integer_heisenberg().unwrap();
        let b1 = enumerate_ball(&lat, 1).unwrap();
        assert_eq!(b1.len(), 4);
        let b2 = enumerate_ball(&lat, 2).unwrap();
        assert!(b2.contains_key(&vec![qi(1), qi(1), q(1, 2)]));
        assert!(!b2.contains_key(&vec![qi(0), qi(0), qi(0)]));
        assert!(b2.keys().all(|k| lat.contains(&GVec(k.clone())).unwrap()));
        assert_eq!(enumerate_ball(&lat, 0).unwrap_err(), Error::NonpositiveRadius);
        assert_eq!(enumerate_ball_capped(&lat, 3, 10).unwrap_err(), Error::ExplosionGuard { cap: 10 });
    }

    #[test]
    fn membership() {
        let lat = integer_heisenberg().unwrap();
        let h = lat.algebra();
        assert!(lat.contains(&GVec(vec![qi(1), qi(1), q(1, 2)])).unwrap());
        assert!(!lat.contains(&GVec(vec![qi(1), qi(1), qi(0)])).unwrap());
        assert!(!lat.contains(&h.x(3).scale(&q(1, 2))).unwrap());
        let e = integer_engel().unwrap();
        let ab = bch_product(e.algebra(), &e.generators()[0], &e.generators()[1]).unwrap();
        assert!(e.contains(&ab).unwrap());
    }

    #[test]
    fn filtration_checks() {
        let h = builtin_family(&Family::Heisenberg(1)).unwrap();
        let bad = vec![h.x(1), h.x(3), h.x(2)];
        assert!(matches!(check_filtration_adapted(&h, &bad), Err(Error::NotFiltrationAdapted(_))));
        let dep = vec![h.x(1), h.x(1).add(&h.x(3)), h.x(3)];
        assert!(matches!(check_filtration_adapted(&h, &dep), Err(Error::NotFiltrationAdapted(_))));
        let skew = vec![h.x(1).add(&h.x(3)), h.x(2), h.x(3)];
        assert!(check_filtration_adapted(&h, &skew).is_ok());
    }

    #[test]
    fn heisenberg_systole() {
        let lat = integer_heisenberg().unwrap();
        let p = build_popp(lat.algebra()).unwrap();
        assert!((lat.covolume(&p).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let s = systole_upper_bound(&lat, &p, 1).unwrap();
        assert_eq!(s.certificate.bound().exact, Some(qi(1)));
        assert_eq!(s.element, lat.algebra().x(1));
        let c = box_constants(&[2, 1]).unwrap();
        let (rep, _) = check_systolic_inequality(&lat, &p, &c, 2).unwrap();
        assert!(rep.satisfied);
        assert_eq!(rep.values.sys_ub, 1.0);
        assert!((rep.values.rhs - c.c * 0.5f64.powf(0.125)).abs() < 1e-12);
        let doubled = Lattice::new(
            lat.algebra().clone(),
            lat.generators().iter().map(|g| g.scale(&qi(2))).collect(),
            vec![lat.algebra().x(1).scale(&qi(2)), lat.algebra().x(2).scale(&qi(2)), lat.algebra().x(3)],
        )
        .unwrap();
        assert_eq!(systole_upper_bound(&doubled, &p, 1).unwrap().bound(), 2.0);
    }

    #[test]
    fn spec_round_trip() {
        let json = r#"{"algebra":"heisenberg(1)","generators":[["1","0","0"],["0","1","0"]],
            "malcev_basis":[["1","0","0"],["0","1","0"],["0","0","1"]]}"#;
        let lat = LatticeSpec::parse(json).unwrap().build(None).unwrap();
        assert_eq!(lat.malcev_basis().len(), 3);
        let bad = json.replace(r#"["0","1","0"]],"#, r#"["0","1/2","0"]],"#);
        assert!(LatticeSpec::parse(&bad).unwrap().build(None).is_err());
    }
}
