//! Command-line front end. Reports are JSON with sorted keys on stdout; a
//! short summary goes to stderr.

use std::fmt::Display;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::cubical::FormalCycle;
use crate::deligne::DeligneClass;
use crate::field::{FieldElement, FieldSpec, DEFAULT_FACTOR_BOUND};
use crate::k2::{decompose, default_primes, parse_primes, K2Error, SteinbergDecomposition};
use crate::pairing::{group_shape, pair_11, pair_1_2_standard, weight3_reference, PairingConfig, PairingResult};
use crate::parse::{parse_cycle, parse_field_element};
use crate::polylog::{bloch_wigner, li, to_decimal, trilog_sv, PrecisionPolicy};
use crate::quadrature::QuadParams;
use crate::regulator::{wang_vanishing_check, regulator, RegulatorOptions};
use crate::cubical::Generator;

#[derive(Parser, Debug)]
#[command(name = "arith-chow", version, about = "Higher arithmetic intersection pairings over Spec F")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Number field, Q(i) or Q(sqrt(-d)).
    #[arg(long, global = true, default_value = "Q(i)")]
    pub field: String,
    /// Working precision in bits.
    #[arg(long, global = true, env = "ARITH_CHOW_PRECISION", default_value_t = 256)]
    pub precision: usize,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Maximum bisection depth of a quadrature cell.
    #[arg(long, global = true, default_value_t = 40)]
    pub max_depth: u32,
    /// Largest norm that will be factored.
    #[arg(long, global = true, default_value_t = DEFAULT_FACTOR_BOUND)]
    pub factor_bound: u64,
    /// Comma-separated Gaussian primes for the Steinberg search.
    #[arg(long, global = true)]
    pub primes: Option<String>,
    /// Coordinate bound for harvested S-units.
    #[arg(long, global = true, default_value_t = 8)]
    pub height: i64,
    /// Denominator bound for reduction modulo the regulator.
    #[arg(long, global = true, default_value_t = 144)]
    pub denom_bound: i64,
    /// Also write the JSON report here.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cubical boundary of a cycle.
    Boundary {
        #[arg(long)]
        cycle: String,
    },
    /// Regulator class of a cycle.
    Regulator {
        #[arg(long)]
        cycle: String,
        /// Integrate numerically even when a closed form is known.
        #[arg(long)]
        numeric: bool,
    },
    /// Li_n, Bloch-Wigner and single-valued trilogarithm at a field element.
    Polylog {
        #[arg(long)]
        z: String,
        #[arg(long, default_value_t = 2)]
        weight: u32,
    },
    /// Steinberg decomposition of alpha ^ beta.
    Decompose {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
    /// Intersection pairing (p, q).
    Pair {
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        /// The standard (i, Z_i) pairing.
        #[arg(long)]
        standard_zi: bool,
    },
    /// Group shapes for (p, n).
    Ranks {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
    },
    /// Checks: lemma19 (needs --curve), weight3.
    Verify {
        check: String,
        #[arg(long)]
        curve: Option<String>,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Math(String, Value),
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn math(e: impl Display) -> Failure {
    Failure::Math(e.to_string(), Value::Null)
}

pub fn num(value: f64, error: f64) -> Value {
    json!({ "value": value, "error": error })
}

pub fn sym(value: impl Display) -> Value {
    json!({ "value": value.to_string(), "exact": true })
}

pub fn class_json(c: &DeligneClass) -> Value {
    let emb: Vec<Value> = c.values.iter().zip(&c.errors).map(|(v, e)| num(*v, *e)).collect();
    json!({
        "twist": sym(c.twist),
        "unit": sym(format!("(2*pi*i)^{}", c.twist.saturating_sub(1))),
        "embeddings": emb,
    })
}

fn cycle_json(z: &FormalCycle) -> Value {
    let terms: Vec<Value> = z
        .terms()
        .map(|(g, m)| json!({ "generator": sym(g), "multiplicity": sym(m) }))
        .collect();
    json!({ "text": sym(z), "dim": sym(z.dim()), "codim": sym(z.codim()), "terms": terms })
}

fn decomposition_json(d: &SteinbergDecomposition) -> Value {
    let atoms: Vec<Value> =
        d.atoms.iter().map(|a| json!({ "gamma": sym(&a.gamma), "coefficient": sym(&a.coefficient) })).collect();
    json!({
        "N": sym(&d.n),
        "atoms": atoms,
        "candidates": sym(d.candidates),
        "certificate": {
            "identity": sym(format!("{}*(alpha^beta) = sum N*c*(gamma^(1-gamma))", d.n)),
            "n_alpha_wedge_beta": sym(&d.certificate),
            "verified": sym(true),
        }
    })
}

fn pairing_json(r: &PairingResult) -> Value {
    let mut v = json!({
        "p": sym(r.p),
        "q": sym(r.q),
        "raw": class_json(&r.raw),
        "generators": r.generators.iter().map(class_json).collect::<Vec<_>>(),
        "q_hat": r.reduction.q_hat.iter().map(sym).collect::<Vec<_>>(),
        "residue": class_json(&r.reduction.residue),
        "residue_norm": num(r.reduction.residue_norm(), r.reduction.residue.max_error()),
        "notes": r.notes.iter().map(sym).collect::<Vec<_>>(),
    });
    if let Some(d) = &r.decomposition {
        v["decomposition"] = decomposition_json(d);
    }
    if let Some(c) = &r.certificate {
        v["boundary_certificate"] = json!({
            "exact_match": sym(c.exact),
            "lhs": sym(&c.lhs),
            "rhs": sym(&c.rhs),
            "difference": c.difference.iter().map(sym).collect::<Vec<_>>(),
        });
    }
    if let Some(l) = &r.vanishing {
        v["xi_vanishing"] = json!({ "total": num(l.total, l.error), "residue_defect": num(l.residue_defect, l.error) });
    }
    v
}

impl RunConfig {
    fn spec(&self) -> Result<FieldSpec, Failure> {
        FieldSpec::parse_name(&self.field).ok_or_else(|| usage(format!("unknown field {}", self.field)))
    }

    fn policy(&self) -> PrecisionPolicy {
        PrecisionPolicy::with_bits(self.precision)
    }

    fn quad(&self) -> QuadParams {
        QuadParams { tol: self.tol, max_depth: self.max_depth, ..QuadParams::default() }
    }

    fn validate(&self) -> Result<(), Failure> {
        if !(self.tol > 0.0) || self.max_depth == 0 || self.factor_bound == 0 || self.height <= 0 || self.denom_bound <= 0 {
            return Err(usage("bounds must be positive"));
        }
        if self.precision < 64 {
            return Err(usage("precision must be at least 64 bits"));
        }
        Ok(())
    }

    fn pairing(&self, spec: FieldSpec) -> Result<PairingConfig, Failure> {
        Ok(PairingConfig {
            factor_bound: self.factor_bound,
            height: self.height,
            primes: self.primes.as_deref().map(|p| parse_primes(p, spec)).transpose().map_err(usage)?,
            denom_bound: self.denom_bound,
            policy: self.policy(),
            quad: self.quad(),
        })
    }

    fn echo(&self) -> Value {
        json!({
            "field": sym(&self.field),
            "precision": sym(self.precision),
            "tol": sym(self.tol),
            "max_depth": sym(self.max_depth),
            "factor_bound": sym(self.factor_bound),
            "primes": self.primes.as_ref().map(sym),
            "height": sym(self.height),
            "denom_bound": sym(self.denom_bound),
        })
    }
}

fn element(s: &str, spec: FieldSpec) -> Result<FieldElement, Failure> {
    parse_field_element(s, spec).map_err(usage)
}

fn k2_failure(e: K2Error) -> Failure {
    match e {
        K2Error::Field(f) => math(f),
        other => math(other),
    }
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<(Value, String), Failure> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    match cmd {
        Command::Boundary { cycle } => {
            let z = parse_cycle(cycle, spec).map_err(usage)?;
            let b = z.boundary().map_err(math)?;
            let nd = b.without_degenerate();
            let summary = format!("boundary: {nd}");
            Ok((
                json!({
                    "input": cycle_json(&z),
                    "boundary": cycle_json(&b),
                    "boundary_nondegenerate": cycle_json(&nd),
                    "normalized": sym(z.is_normalized().map_err(math)?),
                }),
                summary,
            ))
        }
        Command::Regulator { cycle, numeric } => {
            let z = parse_cycle(cycle, spec).map_err(usage)?;
            let opts = RegulatorOptions { quad: cfg.quad(), policy: cfg.policy(), closed_forms: !numeric };
            let r = regulator(&z, &opts).map_err(math)?;
            let summary = format!("regulator: {} ({:?})", r.class, r.provenance);
            Ok((
                json!({
                    "input": cycle_json(&z),
                    "class": class_json(&r.class),
                    "provenance": sym(serde_json::to_value(r.provenance).unwrap().as_str().unwrap()),
                    "notes": r.notes.iter().map(sym).collect::<Vec<_>>(),
                }),
                summary,
            ))
        }
        Command::Polylog { z, weight } => {
            let x = element(z, spec)?;
            let pol = cfg.policy();
            let p = pol.bits + pol.guard_bits;
            let w = &x.embed(p)[0];
            let digits = pol.claimed_digits();
            let err = pol.claimed_error();
            let l = li(*weight, w, &pol).map_err(math)?;
            let mut out = json!({
                "z": sym(&x),
                "weight": sym(weight),
                "digits": sym(digits),
                "li": {
                    "re": num(crate::mp::to_f64(&l.re), err),
                    "im": num(crate::mp::to_f64(&l.im), err),
                    "re_decimal": sym(to_decimal(&l.re, digits)),
                    "im_decimal": sym(to_decimal(&l.im, digits)),
                },
            });
            let sv = match weight {
                2 => Some(bloch_wigner(w, &pol)),
                3 => Some(trilog_sv(w, &pol)),
                _ => None,
            };
            if let Some(s) = &sv {
                out["single_valued"] = json!({
                    "value": crate::mp::to_f64(s),
                    "error": err,
                    "decimal": to_decimal(s, digits),
                });
            }
            Ok((out, format!("Li_{weight}({x}) computed to {digits} digits")))
        }
        Command::Decompose { alpha, beta } => {
            let (a, b) = (element(alpha, spec)?, element(beta, spec)?);
            let primes = match &cfg.primes {
                Some(p) => parse_primes(p, spec).map_err(usage)?,
                None => default_primes(&a, &b, cfg.factor_bound).map_err(k2_failure)?,
            };
            let d = decompose(&a, &b, &primes, cfg.height, cfg.factor_bound).map_err(k2_failure)?;
            let summary = format!("decomposition with N = {} and {} atoms", d.n, d.atoms.len());
            Ok((
                json!({
                    "alpha": sym(&a),
                    "beta": sym(&b),
                    "primes": primes.iter().map(sym).collect::<Vec<_>>(),
                    "decomposition": decomposition_json(&d),
                }),
                summary,
            ))
        }
        Command::Pair { p, q, alpha, beta, standard_zi } => {
            let pc = cfg.pairing(spec)?;
            let r = match (p, q) {
                (1, 2) if *standard_zi => pair_1_2_standard(&pc).map_err(math)?,
                (1, 1) => {
                    let (Some(a), Some(b)) = (alpha, beta) else {
                        return Err(usage("pair --p 1 --q 1 needs --alpha and --beta"));
                    };
                    pair_11(&element(a, spec)?, &element(b, spec)?, &pc).map_err(|e| match e {
                        crate::pairing::PairingError::K2(k) => k2_failure(k),
                        other => math(other),
                    })?
                }
                _ => return Err(usage("supported pairings: --p 1 --q 1 --alpha A --beta B, --p 1 --q 2 --standard-zi")),
            };
            let mut v = pairing_json(&r);
            if (*p, *q) == (1, 2) {
                v["reference"] = num(weight3_reference(&pc.policy), pc.policy.claimed_error());
            }
            let exact = r.certificate.as_ref().map_or(true, |c| c.exact);
            let summary = format!("pairing ({p},{q}): raw {} residue {:.3e}", r.raw, r.reduction.residue_norm());
            if !exact {
                return Err(Failure::Math("boundary identity does not hold term by term".into(), v));
            }
            Ok((v, summary))
        }
        Command::Ranks { p, n } => {
            let g = group_shape(*p, *n, spec);
            let mut v = serde_json::to_value(&g).unwrap();
            v["p"] = sym(p);
            v["n"] = sym(n);
            v["field"] = sym(&g.field);
            Ok((v, format!("CH^{p}(F,{n})_Q = {}", g.chow)))
        }
        Command::Verify { check, curve } => match check.as_str() {
            "lemma19" => {
                let c = curve.as_deref().ok_or_else(|| usage("verify lemma19 needs --curve"))?;
                let z = parse_cycle(c, spec).map_err(usage)?;
                let mut terms = z.terms();
                let (Some((Generator::Param(pc), 1)), None) = (terms.next(), terms.next()) else {
                    return Err(usage("--curve must be a single curve in the 2-cube"));
                };
                let rep = wang_vanishing_check(pc, &cfg.quad()).map_err(math)?;
                let ok = rep.total <= 1e-6 && rep.residue_defect <= 1e-6;
                let v = json!({
                    "curve": sym(pc),
                    "total": num(rep.total, rep.error),
                    "residue_defect": num(rep.residue_defect, rep.error),
                    "vanishes": sym(ok),
                });
                if !ok {
                    return Err(Failure::Math("W_2 does not vanish on the curve".into(), v));
                }
                Ok((v, format!("lemma19: total {:.3e}, residue defect {:.3e}", rep.total, rep.residue_defect)))
            }
            "weight3" => {
                let c = crate::pairing::weight3_boundary_certificate(&FieldElement::i()).map_err(math)?;
                let v = json!({
                    "exact_match": sym(c.exact),
                    "lhs": sym(&c.lhs),
                    "rhs": sym(&c.rhs),
                    "difference": c.difference.iter().map(sym).collect::<Vec<_>>(),
                });
                if !c.exact {
                    return Err(Failure::Math("boundary identity does not hold term by term".into(), v));
                }
                Ok((v, "weight3 boundary identity holds".into()))
            }
            other => Err(usage(format!("unknown check {other}; expected lemma19 or weight3"))),
        },
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Boundary { .. } => "boundary",
        Command::Regulator { .. } => "regulator",
        Command::Polylog { .. } => "polylog",
        Command::Decompose { .. } => "decompose",
        Command::Pair { .. } => "pair",
        Command::Ranks { .. } => "ranks",
        Command::Verify { .. } => "verify",
    }
}

/// Runs one command; returns the exit code, the JSON document and a summary.
pub fn run(cli: &Cli) -> (i32, String, String) {
    let (code, result, summary) = match execute(&cli.command, &cli.config) {
        Ok((v, s)) => (0, json!({ "status": "ok", "result": v }), s),
        Err(Failure::Usage(m)) => (1, json!({ "status": "usage_error", "error": m }), format!("usage error: {m}")),
        Err(Failure::Math(m, v)) => {
            (2, json!({ "status": "math_failure", "error": m, "result": v }), format!("mathematical failure: {m}"))
        }
    };
    let doc = json!({
        "command": command_name(&cli.command),
        "config": cli.config.echo(),
        "report": result,
    });
    let text = serde_json::to_string_pretty(&doc).expect("serializable");
    (code, text, summary)
}

/// Entry point for the binary: parses argv, prints, writes `--json-out`.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (code, text, summary) = run(&cli);
    {
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), "{text}");
        let _ = writeln!(std::io::stderr().lock(), "{summary}");
    }
    if let Some(path) = &cli.config.json_out {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("cannot write {}: {e}", path.display());
            return 1;
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> (i32, Value) {
        let cli = Cli::try_parse_from(std::iter::once("arith-chow").chain(args.iter().cloned())).unwrap();
        let (code, text, _) = run(&cli);
        (code, serde_json::from_str(&text).unwrap())
    }

    #[test]
    fn boundary_of_totaro() {
        let (code, v) = go(&["boundary", "--cycle", "(z; 1 - (2+3*i)*(z)^-1; 1 - z)"]);
        assert_eq!(code, 0);
        let t = &v["report"]["result"]["boundary_nondegenerate"]["terms"];
        assert_eq!(t.as_array().unwrap().len(), 1);
        assert_eq!(t[0]["generator"]["value"], "(2 + 3*i; -1 - 3*i)");
        assert_eq!(t[0]["generator"]["exact"], true);
    }

    #[test]
    fn verify_curve_and_ranks() {
        let (code, v) = go(&["verify", "lemma19", "--curve", "(z; (z-i)^4*(z-1)^-4)"]);
        assert_eq!(code, 0, "{v}");
        assert!(v["report"]["result"]["total"]["value"].as_f64().unwrap() <= 1e-6);
        let (code, v) = go(&["ranks", "--p", "2", "--n", "3"]);
        assert_eq!(code, 0);
        assert_eq!(v["report"]["result"]["chow"]["rank"], 1);
        assert_eq!(v["report"]["result"]["p"]["exact"], true);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(go(&["boundary", "--cycle", "(z; 1 - "]).0, 1);
        assert_eq!(go(&["decompose", "--alpha", "2+3*i", "--beta", "1-2*i", "--height", "1"]).0, 2);
        assert_eq!(go(&["pair", "--p", "2", "--q", "2"]).0, 1);
        assert_eq!(main_with_args(["arith-chow", "nonsense"]), 1);
    }

    #[test]
    fn deterministic_output() {
        let args = ["pair", "--alpha", "2+3*i", "--beta", "1-2*i"];
        let cli = Cli::try_parse_from(std::iter::once("arith-chow").chain(args.iter().cloned())).unwrap();
        assert_eq!(run(&cli).1, run(&cli).1);
    }
}
