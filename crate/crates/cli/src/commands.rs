use std::path::{Path, PathBuf};

use carnot_core::adjust::{adjust_to_layer_vector, adjust_tuple, check_adjusted};
use carnot_core::algebra::builtin_family;
use carnot_core::bch::{beta_table, gamma_table};
use carnot_core::certificates::{box_constants, q_polynomials, BoxConstants};
use carnot_core::lattice::{check_systolic_inequality, LatticeSpec};
use carnot_core::path::{certified_dcc_upper, dcc_lower_bound, relative_error};
use carnot_core::popp::{build_popp, PoppMetric};
use carnot_core::scalar::{format_f64, format_rational, parse_rational};
use carnot_core::{Error, Family, GVec, GradedAlgebra, Rational, Result, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{AlgebraAction, BchAction, Cli, Command, Mode, TableKindArg};
use crate::report::{CsvTable, InputDigest};

/// What a command produced: the report payload and an optional table.
pub type CommandOutput = (Value, Option<CsvTable>);

/// Resolves inputs and records them in the digest.
pub struct Context<'a> {
    pub cli: &'a Cli,
    pub digest: InputDigest,
}

impl<'a> Context<'a> {
    pub fn new(cli: &'a Cli) -> Self {
        Context { cli, digest: InputDigest::default() }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.digest.add(&path.display().to_string(), text.as_bytes());
        Ok(text)
    }

    /// A builtin family id or a path to an algebra document.
    pub fn algebra_from(&mut self, name: &str, base: Option<&Path>) -> Result<GradedAlgebra> {
        if let Ok(f) = name.parse::<Family>() {
            self.digest.add(&format!("builtin:{f}"), &[]);
            return builtin_family(&f);
        }
        let p = PathBuf::from(name);
        let full = match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        };
        let text = self.read(&full)?;
        carnot_core::load_algebra(&text)
    }

    pub fn algebra(&mut self) -> Result<GradedAlgebra> {
        let name = self.cli.algebra.clone().ok_or_else(|| Error::Parse("--algebra is required".into()))?;
        self.algebra_from(&name, None)
    }
}

pub fn parse_coords(s: &str) -> Result<Vec<Rational>> {
    s.split(',').map(|t| parse_rational(t.trim())).collect()
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub fn dispatch(ctx: &mut Context) -> Result<CommandOutput> {
    match &ctx.cli.command {
        Command::Algebra { action: AlgebraAction::Check { spec } } => algebra_check(ctx, spec.clone()),
        Command::Popp { .. } => popp_gram(ctx),
        Command::Constants { dims } => constants(ctx, dims.clone()),
        Command::Adjust { layer, target } => adjust(ctx, *layer, target),
        Command::Path { target } => path(ctx, target),
        Command::BoxVerify { samples, bins } => box_verify(ctx, *samples, *bins as usize),
        Command::Systole { lattice, radius } => systole(ctx, lattice, *radius as usize),
        Command::Bch { action: BchAction::Tables { kind, arity, step } } => bch_tables(ctx, *kind, *arity, *step),
    }
}

fn algebra_check(ctx: &mut Context, spec: Option<String>) -> Result<CommandOutput> {
    let alg = match spec {
        Some(s) => ctx.algebra_from(&s, None)?,
        None => ctx.algebra()?,
    };
    let mut table = CsvTable::new(["a_layer", "a_idx", "b_layer", "b_idx", "out_layer", "out_idx", "coeff"]);
    let spec = alg.to_spec();
    for b in &spec.brackets {
        for o in &b.out {
            table.push(vec![
                b.a.0.to_string(),
                b.a.1.to_string(),
                b.b.0.to_string(),
                b.b.1.to_string(),
                o.layer.to_string(),
                o.idx.to_string(),
                o.coeff.to_rational().map(|c| format_rational(&c)).unwrap_or_default(),
            ]);
        }
    }
    let out = json!({
        "valid": true,
        "summary": alg.summary(),
        "checks": ["antisymmetry", "grading", "jacobi", "bracket_generating"],
        "brackets": spec.brackets.len(),
    });
    Ok((out, Some(table)))
}

fn popp_gram(ctx: &mut Context) -> Result<CommandOutput> {
    let alg = ctx.algebra()?;
    let popp = build_popp(&alg)?;
    let mut table = CsvTable::new(["layer", "row", "col", "gram"]);
    for i in 1..=alg.step() {
        let g = popp.gram(i)?;
        for r in 0..g.rows {
            for c in 0..g.cols {
                table.push(vec![i.to_string(), r.to_string(), c.to_string(), format_rational(&g[(r, c)])]);
            }
        }
    }
    Ok((json!({"algebra": alg.summary(), "popp": popp.to_json()}), Some(table)))
}

fn constants_json(c: &BoxConstants) -> Result<Value> {
    let mut v = c.to_json();
    if c.step() >= 2 {
        let q = q_polynomials(c.dims[0], c.step())?;
        v["theta"] = q.to_json()["theta"].clone();
    }
    Ok(v)
}

fn constants(ctx: &mut Context, dims: Option<Vec<usize>>) -> Result<CommandOutput> {
    let dims = match dims {
        Some(d) => {
            ctx.digest.add(&format!("dims:{d:?}"), &[]);
            d
        }
        None => ctx.algebra()?.dims().to_vec(),
    };
    let c = box_constants(&dims)?;
    let mut table = CsvTable::new(["level", "T", "eps_hat", "q_value", "prefix_bound", "residual"]);
    for t in &c.trace {
        table.push(vec![
            t.level.to_string(),
            format_f64(t.t),
            format_f64(t.eps_hat),
            format_f64(t.q_value),
            format_f64(t.prefix_bound),
            format_f64(t.residual),
        ]);
    }
    Ok((constants_json(&c)?, Some(table)))
}

fn set_rows(table: &mut CsvTable, alg: &GradedAlgebra, set: &carnot_core::adjust::HorizontalSet) {
    for (n, row) in set.rows.iter().enumerate() {
        for (i, x) in row.iter().enumerate() {
            let mut r = vec![set.layer.to_string(), n.to_string(), i.to_string()];
            r.extend(strings(&x.0[..alg.d1()]));
            table.push(r);
        }
    }
}

fn adjust(ctx: &mut Context, layer: Option<usize>, target: &str) -> Result<CommandOutput> {
    let alg = ctx.algebra()?;
    let popp = build_popp(&alg)?;
    let z = parse_coords(target)?;
    ctx.digest.add(&format!("target:{}", strings(&z).join(",")), &[]);
    let mut header = vec!["layer".to_string(), "row".into(), "factor".into()];
    header.extend((1..=alg.d1()).map(|i| format!("x{i}")));
    let mut table = CsvTable::new(header);
    let out = match layer {
        Some(j) => {
            let set = adjust_to_layer_vector(&alg, &popp, j, &z)?;
            let check = check_adjusted(&alg, &popp, &set, &z)?;
            set_rows(&mut table, &alg, &set);
            let errors: Vec<Value> = set
                .error_vectors(&alg)?
                .iter()
                .map(|(l, a)| {
                    json!({"layer": l, "coords": strings(a), "norm": format_f64(popp.layer_norm(*l, a).unwrap_or(f64::NAN))})
                })
                .collect();
            json!({"layer": j, "target": strings(&z), "set": set.report(&alg), "check": check, "error_vectors": errors})
        }
        None => {
            let point = GVec(z);
            let tuple = adjust_tuple(&alg, &popp, &point)?;
            let mut sets = Vec::new();
            for s in &tuple.sets {
                set_rows(&mut table, &alg, s);
                sets.push(s.report(&alg));
            }
            let mut b = Vec::new();
            for l in 2..=alg.step() {
                for j in 1..l {
                    let v = tuple.error_vector(&alg, l, j)?;
                    b.push(json!({"l": l, "j": j, "coords": strings(&v), "norm": format_f64(popp.layer_norm(l, &v)?)}));
                }
            }
            json!({
                "target": point.to_strings(),
                "sets": sets,
                "prefix_errors": b,
                "d_com_k": tuple.d_com_k(&alg).report(),
                "product_matches": tuple.product() == &point,
            })
        }
    };
    Ok((out, Some(table)))
}

fn path(ctx: &mut Context, target: &str) -> Result<CommandOutput> {
    let alg = ctx.algebra()?;
    let popp = build_popp(&alg)?;
    let z = GVec(parse_coords(target)?);
    ctx.digest.add(&format!("target:{}", z.to_strings().join(",")), &[]);
    let cert = certified_dcc_upper(&alg, &popp, &z)?;
    let mut header = vec!["segment".to_string(), "length".into()];
    header.extend((1..=alg.d1()).map(|i| format!("dx{i}")));
    header.extend((1..=alg.dim()).map(|i| format!("p{i}")));
    let mut table = CsvTable::new(header);
    for (n, (s, p)) in cert.path.segments.iter().zip(cert.path.waypoints(&alg)?).enumerate() {
        let len = carnot_core::adjust::horizontal_norm(&alg, s);
        let mut row = vec![(n + 1).to_string(), format_f64(len.value)];
        row.extend(strings(&s.0[..alg.d1()]));
        row.extend(p.to_strings());
        table.push(row);
    }
    let mut out = json!({
        "target": z.to_strings(),
        "certificate": cert.summary(),
        "lower_bound": dcc_lower_bound(&alg, &z).report(),
        "endpoint": cert.path.endpoint.to_strings(),
    });
    if ctx.cli.mode == Mode::Float {
        let f = cert.path.endpoint_f64(&alg)?;
        out["endpoint_f64"] = json!(f.0.iter().map(|x| format_f64(*x)).collect::<Vec<_>>());
        out["endpoint_f64_rel_error"] = json!(format_f64(relative_error(&f, &z)));
    }
    Ok((out, Some(table)))
}

/// Uniform point of `∏ B^{d_i}(ε_i)`: per layer a normalized Gaussian
/// direction in Popp-orthonormal coordinates times `ε_i U^{1/d_i}`.
pub fn sample_box(alg: &GradedAlgebra, popp: &PoppMetric, eps: &[f64], rng: &mut ChaCha8Rng) -> Result<GVec> {
    let mut coords = Vec::with_capacity(alg.dim());
    for (i, (&d, &e)) in alg.dims().iter().zip(eps).enumerate() {
        let dir: Vec<f64> = loop {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                break g.into_iter().map(|x| x / n).collect();
            }
        };
        let u: f64 = rng.random();
        let r = e * u.powf(1.0 / d as f64);
        let c: Vec<f64> = dir.iter().map(|x| x * r).collect();
        coords.extend(popp.from_frame_coords(i + 1, &c)?.into_iter().map(Rational::from_real));
    }
    Ok(GVec(coords))
}

fn box_verify(ctx: &mut Context, samples: usize, bins: usize) -> Result<CommandOutput> {
    let alg = ctx.algebra()?;
    let popp = build_popp(&alg)?;
    let c = box_constants(alg.dims())?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cli.seed);
    let targets: Vec<GVec> = (0..samples).map(|_| sample_box(&alg, &popp, &c.epsilon, &mut rng)).collect::<Result<_>>()?;
    let float = ctx.cli.mode == Mode::Float;
    let results: Vec<(f64, bool, f64)> = targets
        .par_iter()
        .map(|z| {
            let cert = certified_dcc_upper(&alg, &popp, z)?;
            let bound = cert.bound().value;
            if bound > 1.0 {
                return Err(Error::Certificate(format!(
                    "path length {bound} > 1 for box target [{}]",
                    z.to_strings().join(", ")
                )));
            }
            let rel = if float { relative_error(&cert.path.endpoint_f64(&alg)?, z) } else { 0.0 };
            Ok((bound, &cert.path.endpoint == z, rel))
        })
        .collect::<Result<_>>()?;
    let mut hist = vec![0usize; bins];
    let mut table = CsvTable::new(["sample", "bound", "coords"]);
    for (n, ((b, _, _), z)) in results.iter().zip(&targets).enumerate() {
        hist[((b * bins as f64) as usize).min(bins - 1)] += 1;
        let mut row = vec![n.to_string(), format_f64(*b)];
        row.extend(z.to_f64().0.iter().map(|x| format_f64(*x)));
        table.push(row);
    }
    let max = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let mean = if samples == 0 { 0.0 } else { results.iter().map(|r| r.0).sum::<f64>() / samples as f64 };
    let histogram: Vec<Value> = hist
        .iter()
        .enumerate()
        .map(|(i, n)| json!({"lo": format_f64(i as f64 / bins as f64), "hi": format_f64((i + 1) as f64 / bins as f64), "count": n}))
        .collect();
    let mut out = json!({
        "dims": alg.dims(),
        "epsilon": c.epsilon.iter().map(|x| format_f64(*x)).collect::<Vec<_>>(),
        "samples": samples,
        "max_bound": format_f64(max),
        "mean_bound": format_f64(mean),
        "all_within_unit_ball": max <= 1.0,
        "endpoints_exact": results.iter().all(|r| r.1),
        "histogram": histogram,
    });
    if float {
        out["max_endpoint_f64_rel_error"] = json!(format_f64(results.iter().map(|r| r.2).fold(0.0, f64::max)));
    }
    Ok((out, Some(table)))
}

fn systole(ctx: &mut Context, lattice: &Path, radius: usize) -> Result<CommandOutput> {
    let text = ctx.read(lattice)?;
    let spec = LatticeSpec::parse(&text)?;
    let alg = ctx.algebra_from(&spec.algebra, lattice.parent())?;
    let lat = spec.build_with(alg)?;
    let popp = build_popp(lat.algebra())?;
    let c = box_constants(lat.algebra().dims())?;
    let (report, sys) = check_systolic_inequality(&lat, &popp, &c, radius)?;
    let mut header = vec!["word".to_string(), "lower".into(), "upper".into()];
    header.extend((1..=lat.algebra().dim()).map(|i| format!("x{i}")));
    let mut table = CsvTable::new(header);
    for r in &sys.rows {
        let mut row = vec![r.word.clone(), format_f64(r.lower), format_f64(r.upper)];
        row.extend(r.coords.iter().cloned());
        table.push(row);
    }
    let out = json!({
        "algebra": lat.algebra().summary(),
        "report": report,
        "certificate": sys.certificate.summary(),
        "constants": constants_json(&c)?,
    });
    Ok((out, Some(table)))
}

fn bch_tables(ctx: &mut Context, kind: TableKindArg, arity: usize, step: Option<usize>) -> Result<CommandOutput> {
    let k = match step {
        Some(k) => {
            ctx.digest.add(&format!("step:{k}"), &[]);
            k
        }
        None => ctx.algebra()?.step(),
    };
    let table = match kind {
        TableKindArg::Beta => beta_table(arity, k)?,
        TableKindArg::Gamma => gamma_table(arity, k)?,
    };
    let mut csv = CsvTable::new(["index", "coeff"]);
    for (idx, c) in &table.entries {
        let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        csv.push(vec![idx.join(" "), format_rational(c)]);
    }
    Ok((table.to_json(), Some(csv)))
}
