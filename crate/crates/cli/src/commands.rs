use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use pitchforge::certify::{
    build_cover_certificate, full_interpolation_certificate, packing_certificate,
    symmetric_knapsack_certificate, verify_certificate, Certificate, Source,
};
use pitchforge::cgtools::{closure_experiment, ClosureParams};
use pitchforge::json::{
    certificate_to_json, instance_to_json, parse_certificate, parse_inequality, parse_instance,
    parse_poly,
};
use pitchforge::rat::{fmt_rat, parse_rat};
use pitchforge::relax::{build_sa_lp, RelaxationLP};
use pitchforge::simplex::LpStatus;
use pitchforge::spanning::{build_spanning_set, SpanningSet};
use pitchforge::textspec::{parse_gen_spec, parse_inequality_arg, parse_objective};
use pitchforge::{Error, Instance, Limits, LinearInequality, Rat, Result};
use serde_json::json;

use crate::{Format, Global, Mode};

pub fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::SizeGuard(_) => ExitCode::from(3),
        Error::Construction(_) | Error::Lp(_) | Error::NoCore => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn limits(g: &Global) -> Result<Limits> {
    let mut l = Limits::from_env()?;
    if let Some(n) = g.limit_n {
        l.hypercube = n.min(pitchforge::varset::MAX_VARS);
    }
    Ok(l)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .map_err(|e| Error::Invalid(format!("{}: {e}", p.display()))),
        None => print_stdout(text),
    }
}

/// A reader that went away (`| head`) is not an error.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Error::Invalid(format!("stdout: {e}")))
        }
        _ => Ok(()),
    }
}

/// An existing file is read as instance JSON; anything else is a generator spec.
fn load_instance(g: &Global, arg: &str) -> Result<Instance> {
    let path = Path::new(arg);
    if path.is_file() {
        parse_instance(&read(path)?)
    } else {
        parse_gen_spec(arg, g.seed)
    }
}

fn load_inequality(arg: &str, n: usize) -> Result<LinearInequality> {
    let path = Path::new(arg);
    let ineq = if path.is_file() {
        parse_inequality(&read(path)?)?
    } else {
        parse_inequality_arg(arg, n)?
    };
    if ineq.coeffs.len() != n {
        return Err(Error::NvarsMismatch(ineq.coeffs.len(), n));
    }
    Ok(ineq)
}

fn kind(inst: &Instance) -> String {
    match inst {
        Instance::Cover(c) => format!("cover n={} m={}", c.nvars(), c.num_rows()),
        Instance::Packing(p) => format!("packing n={} m={}", p.nvars(), p.num_rows()),
        Instance::Knapsack(k) => format!("knapsack n={} b={}", k.nvars(), fmt_rat(k.bound())),
    }
}

fn fmt_point(x: &[Rat]) -> String {
    x.iter().map(fmt_rat).collect::<Vec<_>>().join(" ")
}

pub fn gen(g: &Global, spec: &str) -> Result<ExitCode> {
    let inst = parse_gen_spec(spec, g.seed)?;
    emit(g, &instance_to_json(&inst))?;
    Ok(ExitCode::SUCCESS)
}

fn spanning_for(
    inst: &Instance,
    pi: Option<usize>,
    degree: Option<usize>,
    symmetric: bool,
    limits: &Limits,
) -> Result<(String, SpanningSet)> {
    let n = inst.nvars();
    match (pi, degree, symmetric) {
        (_, _, true) => Ok(("cardinality indicators".into(), SpanningSet::cardinality(n))),
        (_, Some(d), _) => Ok((
            format!("degree-{d} monomials"),
            SpanningSet::monomials(n, d),
        )),
        (Some(pi), _, _) => match inst {
            Instance::Cover(c) => Ok((format!("S_A({pi})"), build_spanning_set(c, pi, limits)?)),
            _ => Err(Error::Invalid(
                "--pi needs a cover instance; use --degree or --symmetric".into(),
            )),
        },
        _ => Err(Error::Invalid(
            "give one of --pi, --degree or --symmetric".into(),
        )),
    }
}

/// Packing problems maximize; everything else minimizes.
fn maximizes(inst: &Instance) -> bool {
    matches!(inst, Instance::Packing(_))
}

struct Solved {
    status: LpStatus,
    value: Option<Rat>,
    point: Option<Vec<Rat>>,
}

fn solve(lp: &RelaxationLP, inst: &Instance, c: &[Rat]) -> Result<Solved> {
    let max = maximizes(inst);
    let obj: Vec<Rat> = if max {
        c.iter().map(|v| -v).collect()
    } else {
        c.to_vec()
    };
    let out = lp.optimize(&obj)?;
    Ok(Solved {
        status: out.status,
        value: out.optimum.map(|v| if max { -v } else { v }),
        point: out.functional.map(|f| f.projected()),
    })
}

fn integer_optimum(inst: &Instance, c: &[Rat], limits: &Limits) -> Result<Option<Rat>> {
    let value = |p: u64| -> Rat {
        c.iter()
            .enumerate()
            .filter(|(j, _)| p >> j & 1 == 1)
            .map(|(_, v)| v.clone())
            .sum()
    };
    let values = inst
        .system()
        .feasible_points(limits)?
        .into_iter()
        .map(value);
    Ok(if maximizes(inst) {
        values.max()
    } else {
        values.min()
    })
}

fn fmt_value(s: &Solved) -> String {
    match (&s.status, &s.value) {
        (LpStatus::Optimal, Some(v)) => fmt_rat(v),
        (status, _) => format!("{status:?}").to_lowercase(),
    }
}

pub fn relax(
    g: &Global,
    instance: &str,
    pi: Option<usize>,
    degree: Option<usize>,
    symmetric: bool,
    objective: &str,
    lp_json: Option<&Path>,
) -> Result<ExitCode> {
    let limits = limits(g)?;
    let inst = load_instance(g, instance)?;
    let c = parse_objective(objective, inst.nvars())?;
    let (family, s) = spanning_for(&inst, pi, degree, symmetric, &limits)?;
    let members = s.len();
    let lp = build_sa_lp(inst.system(), &s, &limits)?;
    if let Some(p) = lp_json {
        std::fs::write(
            p,
            serde_json::to_string_pretty(&lp.to_json()).expect("serializable LP"),
        )
        .map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))?;
    }
    if g.format == Format::Lp {
        let obj: Vec<Rat> = if maximizes(&inst) {
            c.iter().map(|v| -v).collect()
        } else {
            c.clone()
        };
        emit(g, lp.to_lp_text(&obj).trim_end())?;
        return Ok(ExitCode::SUCCESS);
    }
    let solved = solve(&lp, &inst, &c)?;
    let sense = if maximizes(&inst) { "max" } else { "min" };
    let text = match g.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "instance": kind(&inst),
            "family": family,
            "members": members,
            "basis_rank": lp.basis.rank(),
            "rows": lp.rows.len(),
            "presolved_rows": lp.presolved_rows(),
            "sense": sense,
            "status": format!("{:?}", solved.status).to_lowercase(),
            "optimum": solved.value.as_ref().map(fmt_rat),
            "point": solved.point.as_ref().map(|x| x.iter().map(fmt_rat).collect::<Vec<_>>()),
        }))
        .expect("serializable report"),
        _ => {
            let mut t = format!(
                "instance       {}\nfamily         {family} ({members} members)\nbasis rank     {}\nLP rows        {} ({} after presolve)\n{sense}imum        {}\n",
                kind(&inst),
                lp.basis.rank(),
                lp.rows.len(),
                lp.presolved_rows(),
                fmt_value(&solved),
            );
            if let Some(x) = &solved.point {
                t.push_str(&format!("point          {}\n", fmt_point(x)));
            }
            t.trim_end().to_string()
        }
    };
    emit(g, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn source_tag(s: &Source) -> &'static str {
    match s {
        Source::Base => "base",
        Source::First { .. } => "first",
        Source::Second { .. } => "second",
        Source::Third { .. } => "third",
        Source::Cardinality { .. } => "cardinality",
        Source::Interpolation { .. } => "interpolation",
        Source::TruncatedDelta { .. } => "truncated-delta",
        Source::Residual { .. } => "residual",
    }
}

fn summary(cert: &Certificate, valid: bool, issues: &[String]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &cert.terms {
        *counts.entry(source_tag(&t.source)).or_default() += 1;
    }
    let mut s = format!("terms          {}\n", cert.terms.len());
    for (k, v) in counts {
        s.push_str(&format!("  {k:<13}{v}\n"));
    }
    s.push_str(&format!("degree bound   {}\n", cert.degree_bound));
    s.push_str(if valid {
        "verified       yes"
    } else {
        "verified       NO"
    });
    for i in issues {
        s.push_str(&format!("\n  {i}"));
    }
    s
}

pub fn certify(
    g: &Global,
    instance: &str,
    ineq: Option<&str>,
    poly: Option<&Path>,
    mode: Mode,
    pi: Option<usize>,
) -> Result<ExitCode> {
    let limits = limits(g)?;
    let inst = load_instance(g, instance)?;
    let n = inst.nvars();
    let need_ineq = || -> Result<LinearInequality> {
        load_inequality(
            ineq.ok_or_else(|| Error::Invalid("this mode needs --ineq".into()))?,
            n,
        )
    };
    let cert = match (mode, &inst) {
        (Mode::Cover, Instance::Cover(c)) => {
            let ineq = need_ineq()?;
            let pi = match pi {
                Some(p) => p,
                None => ineq.pitch()?,
            };
            build_cover_certificate(c, &ineq, pi, &limits)?
        }
        (Mode::Packing, Instance::Packing(p)) => packing_certificate(p, &need_ineq()?, &limits)?,
        (Mode::Symknap, Instance::Knapsack(k)) => symmetric_knapsack_certificate(n, k.bound())?,
        (Mode::Interpolate, _) => {
            let target = match (poly, ineq) {
                (Some(p), _) => parse_poly(&read(p)?)?,
                (None, Some(_)) => need_ineq()?.target_form(),
                (None, None) => {
                    return Err(Error::Invalid("interpolate needs --poly or --ineq".into()))
                }
            };
            full_interpolation_certificate(&inst, &target, &limits)?
        }
        (mode, inst) => {
            return Err(Error::Invalid(format!(
                "mode {mode:?} does not apply to a {} instance",
                kind(inst)
            )))
        }
    };
    let report = verify_certificate(&cert);
    let json = certificate_to_json(&cert);
    match (&g.out, g.format) {
        (Some(_), _) => {
            emit(g, &json)?;
            print_stdout(&summary(&cert, report.valid, &report.issues))?;
        }
        (None, Format::Json) => emit(g, &json)?,
        (None, _) => emit(g, &summary(&cert, report.valid, &report.issues))?,
    }
    Ok(if report.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn verify(g: &Global, path: &Path, instance: Option<&str>) -> Result<ExitCode> {
    let inst = instance.map(|i| load_instance(g, i)).transpose()?;
    let cert = parse_certificate(&read(path)?, inst.as_ref())?;
    let report = verify_certificate(&cert);
    let text = match g.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "valid": report.valid,
            "issues": report.issues,
            "terms": cert.terms.len(),
            "degree_bound": cert.degree_bound,
        }))
        .expect("serializable report"),
        _ => summary(&cert, report.valid, &report.issues),
    };
    emit(g, &text)?;
    Ok(if report.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn compare(
    g: &Global,
    instance: &str,
    pi: usize,
    degrees: &str,
    objective: &str,
) -> Result<ExitCode> {
    let limits = limits(g)?;
    let inst = load_instance(g, instance)?;
    let n = inst.nvars();
    let c = parse_objective(objective, n)?;
    let mut rows: Vec<(String, String)> = Vec::new();
    for d in degrees.split(',').map(str::trim).filter(|d| !d.is_empty()) {
        let d: usize = d
            .parse()
            .map_err(|_| Error::Parse(format!("degree {d:?} is not a count")))?;
        let label = if d == 0 {
            "plain LP".to_string()
        } else {
            format!("SA degree {d}")
        };
        let lp = build_sa_lp(inst.system(), &SpanningSet::monomials(n, d), &limits)?;
        rows.push((label, fmt_value(&solve(&lp, &inst, &c)?)));
    }
    let special = match &inst {
        Instance::Cover(cv) => Some((
            format!("S_A({pi}) SA"),
            build_spanning_set(cv, pi, &limits)?,
        )),
        Instance::Knapsack(_) => Some(("symmetric SA".to_string(), SpanningSet::cardinality(n))),
        Instance::Packing(_) => None,
    };
    if let Some((label, s)) = special {
        let lp = build_sa_lp(inst.system(), &s, &limits)?;
        rows.push((label, fmt_value(&solve(&lp, &inst, &c)?)));
    }
    let integer = integer_optimum(&inst, &c, &limits)?;
    rows.push((
        "integer".into(),
        integer
            .as_ref()
            .map(fmt_rat)
            .unwrap_or_else(|| "infeasible".into()),
    ));
    let text = match g.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "instance": kind(&inst),
            "sense": if maximizes(&inst) { "max" } else { "min" },
            "optima": rows.iter().map(|(k, v)| json!({"relaxation": k, "value": v})).collect::<Vec<_>>(),
        }))
        .expect("serializable table"),
        _ => {
            let mut t = format!("{}\n", kind(&inst));
            for (k, v) in &rows {
                t.push_str(&format!("{k:<16}{v}\n"));
            }
            t.trim_end().to_string()
        }
    };
    emit(g, &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn closure(
    g: &Global,
    instance: &str,
    objective: &str,
    t: u32,
    epsilon: &str,
    denominator: u32,
    coef_bound: u32,
) -> Result<ExitCode> {
    let limits = limits(g)?;
    let Instance::Packing(p) = load_instance(g, instance)? else {
        return Err(Error::Invalid(
            "closure experiments need a packing instance".into(),
        ));
    };
    let c = parse_objective(objective, p.nvars())?;
    let params = ClosureParams {
        t,
        epsilon: parse_rat(epsilon)?,
        denominator,
        coef_bound,
    };
    let report = closure_experiment(&p, &c, &params, &limits)?;
    let text = match g.format {
        Format::Json => report.to_json(),
        _ => report.to_table().trim_end().to_string(),
    };
    emit(g, &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn spanning(g: &Global, instance: &str, pi: usize) -> Result<ExitCode> {
    let limits = limits(g)?;
    let Instance::Cover(c) = load_instance(g, instance)? else {
        return Err(Error::Invalid(
            "S_A(pi) is defined for cover instances".into(),
        ));
    };
    let s = build_spanning_set(&c, pi, &limits)?;
    let text = match g.format {
        Format::Json => s.to_json(),
        _ => {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for m in &s.members {
                *counts.entry(m.provenance.tag()).or_default() += 1;
            }
            let mut t = format!(
                "S_A({pi}) for cover n={} m={}: {} members\n",
                c.nvars(),
                c.num_rows(),
                s.len()
            );
            for (k, v) in counts {
                t.push_str(&format!("  {k:<8}{v}\n"));
            }
            t.trim_end().to_string()
        }
    };
    emit(g, &text)?;
    Ok(ExitCode::SUCCESS)
}
