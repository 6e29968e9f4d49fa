//! Short command-line notations: generator specs (`fc:6`, `symknap:5:3/2`,
//! `random:6:5:0.5`, `randpack:5:3:4`), inline inequalities
//! (`sum>=2`, `1,2,0>=2`, `1 1 <= 1`) and objectives (`sum`, `1,0,2`).

use crate::error::{Error, Result};
use crate::instances::{
    gen_full_circulant, gen_random_cover, gen_random_packing, gen_symmetric_knapsack, Instance,
    LinearInequality, Sense,
};
use crate::rat::{int, parse_rat, Rat};
use crate::varset::MAX_VARS;

/// Largest row count a generator spec may ask for.
pub const MAX_GEN_ROWS: usize = 10_000;

fn count(field: &str, what: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what} must be a count, got {field:?}")))
}

/// Builds the instance a generator spec names; `seed` drives the random ones.
pub fn parse_gen_spec(spec: &str, seed: u64) -> Result<Instance> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let arity = |k: usize| -> Result<()> {
        if parts.len() == k {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "{:?} takes {} fields",
                parts[0],
                k - 1
            )))
        }
    };
    let nvars = |f: &str| -> Result<usize> {
        let n = count(f, "n")?;
        if n > MAX_VARS {
            return Err(Error::SizeGuard(format!(
                "at most {MAX_VARS} variables supported"
            )));
        }
        Ok(n)
    };
    let nrows = |f: &str| -> Result<usize> {
        let m = count(f, "m")?;
        if m > MAX_GEN_ROWS {
            return Err(Error::SizeGuard(format!(
                "generators produce at most {MAX_GEN_ROWS} rows"
            )));
        }
        Ok(m)
    };
    match parts[0] {
        "fc" => {
            arity(2)?;
            Ok(Instance::Cover(gen_full_circulant(nvars(parts[1])?)?))
        }
        "symknap" => {
            arity(3)?;
            Ok(Instance::Knapsack(gen_symmetric_knapsack(
                nvars(parts[1])?,
                parse_rat(parts[2])?,
            )?))
        }
        "random" => {
            arity(4)?;
            let density: f64 = parts[3]
                .trim()
                .parse()
                .ok()
                .filter(|d: &f64| (0.0..=1.0).contains(d))
                .ok_or_else(|| {
                    Error::Parse(format!("density must lie in [0, 1], got {:?}", parts[3]))
                })?;
            Ok(Instance::Cover(gen_random_cover(
                nvars(parts[1])?,
                nrows(parts[2])?,
                density,
                seed,
            )?))
        }
        "randpack" => {
            arity(4)?;
            let max_coef = count(parts[3], "max coefficient")?;
            let max_coef = u32::try_from(max_coef)
                .map_err(|_| Error::Parse("max coefficient too large".into()))?;
            Ok(Instance::Packing(gen_random_packing(
                nvars(parts[1])?,
                nrows(parts[2])?,
                max_coef,
                seed,
            )?))
        }
        other => Err(Error::Parse(format!(
            "unknown generator {other:?} (expected fc, symknap, random or randpack)"
        ))),
    }
}

fn parse_coefficients(s: &str, n: usize) -> Result<Vec<Rat>> {
    let s = s.trim();
    if s == "sum" {
        return Ok(vec![int(1); n]);
    }
    let coeffs: Vec<Rat> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_rat)
        .collect::<Result<_>>()?;
    if coeffs.len() != n {
        return Err(Error::NvarsMismatch(coeffs.len(), n));
    }
    Ok(coeffs)
}

/// `lhs >= rhs` or `lhs <= rhs` where `lhs` is `sum` or `n` coefficients.
pub fn parse_inequality_arg(s: &str, n: usize) -> Result<LinearInequality> {
    let (lhs, rhs, sense) = if let Some((l, r)) = s.split_once(">=") {
        (l, r, Sense::Covering)
    } else if let Some((l, r)) = s.split_once("<=") {
        (l, r, Sense::Packing)
    } else {
        return Err(Error::Parse(format!("inequality {s:?} needs >= or <=")));
    };
    Ok(LinearInequality {
        coeffs: parse_coefficients(lhs, n)?,
        rhs: parse_rat(rhs.trim())?,
        sense,
    })
}

/// `sum` or `n` coefficients.
pub fn parse_objective(s: &str, n: usize) -> Result<Vec<Rat>> {
    parse_coefficients(s, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    #[test]
    fn generator_specs() {
        assert_eq!(parse_gen_spec("fc:4", 0).unwrap().nvars(), 4);
        match parse_gen_spec("symknap:4:3/2", 0).unwrap() {
            Instance::Knapsack(k) => assert_eq!(k.bound(), &frac(3, 2)),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            parse_gen_spec("random:6:5:0.5", 7).unwrap(),
            parse_gen_spec("random:6:5:0.5", 7).unwrap()
        );
        assert!(matches!(
            parse_gen_spec("randpack:4:2:3", 1).unwrap(),
            Instance::Packing(_)
        ));
        for bad in [
            "",
            "fc",
            "fc:x",
            "fc:4:1",
            "random:4:2:2",
            "symknap:3",
            "nope:1",
            "fc:1000",
            "random:4:99999999:0.5",
        ] {
            assert!(parse_gen_spec(bad, 0).is_err(), "{bad}");
        }
    }

    #[test]
    fn inline_inequalities() {
        let i = parse_inequality_arg("sum>=2", 3).unwrap();
        assert_eq!(i, LinearInequality::covering(vec![int(1); 3], int(2)));
        let i = parse_inequality_arg("1, 2 0 <= 3/2", 3).unwrap();
        assert_eq!(
            i,
            LinearInequality::packing(vec![int(1), int(2), int(0)], frac(3, 2))
        );
        for bad in ["sum", "1,1>=1", "a,b,c>=1", "sum>=x"] {
            assert!(parse_inequality_arg(bad, 3).is_err(), "{bad}");
        }
        assert_eq!(parse_objective("sum", 2).unwrap(), vec![int(1); 2]);
    }
}
