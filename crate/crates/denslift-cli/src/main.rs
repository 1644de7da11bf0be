use std::collections::HashMap;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use denslift::equivariance::{
    ad_on_lifting, adx_variation_defect, classify_sdiff_map, satisfies_sdiff_relations, sdiff_equivariant_maps,
    LiftingHandle, SecondOrderMap,
};
use denslift::lift::{taylor_assemble, taylor_expand, VolLiftParams};
use denslift::operator::generic_field;
use denslift::proj::{
    full_symbol, proj_generators, quantize, schwarzian_cocycle_check, schwarzian_data, DiffeoJet1D, SymbolPoly,
};
use denslift::syntax::{parse_bindings, parse_lambda0, parse_operator, parse_symbol, parse_volume, to_json_value, SessionConfig};
use denslift::{DensityOperator, Error, Result, Scalar};

#[derive(Parser)]
#[command(name = "denslift", version, about = "Exact calculus of differential operators on densities")]
struct Cli {
    /// Dimension of the base space.
    #[arg(long, global = true, default_value_t = 1)]
    dim: usize,
    /// Weight of the densities Δ acts on: p/q or `symbolic`.
    #[arg(long, global = true, default_value = "symbolic")]
    lambda0: String,
    /// Volume form: `coordinate` or `generic`.
    #[arg(long, global = true, default_value = "coordinate")]
    volume: String,
    /// Parameter values k=v,… (b, c1, d1, … for vol; c for first; a1…c for sdiff-classify).
    #[arg(long, global = true, default_value = "")]
    params: String,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Formal adjoint, with L* = 1 - L.
    Adjoint { expr: String },
    /// Composition A∘B.
    Compose { a: String, b: String },
    /// Lift an operator on λ₀-densities to the whole algebra.
    Lift {
        #[arg(value_enum)]
        kind: LiftKind,
        expr: String,
    },
    /// Coefficients of the expansion in powers of (L - l0).
    Taylor { expr: String },
    /// Reassemble an operator from its expansion coefficients.
    Assemble { coeffs: Vec<String> },
    /// Projectively equivariant full symbol at weight λ₀.
    Symbol { expr: String },
    /// Quantize a polynomial in xi (xi1…xid) at weight λ₀.
    Quantize { symbol: String },
    /// The projective invariant S of a second-order operator on the line.
    Schwarzian { expr: String },
    /// Run one of the built-in identity checks.
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        expr: Option<String>,
        /// Lifting used by equivariance, variation, regular and selfadjoint.
        #[arg(long, value_enum, default_value = "canonical")]
        lift: LiftKind,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LiftKind {
    Canonical,
    Vol,
    Distinguished,
    First,
    Second,
    Proj,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    AdjointInvolution,
    Equivariance,
    Variation,
    SdiffClassify,
    Regular,
    Selfadjoint,
    Cocycle,
}

struct Session {
    cfg: SessionConfig,
    bindings: HashMap<String, Scalar>,
}

impl Session {
    fn from_cli(cli: &Cli) -> Result<Session> {
        let mut cfg = SessionConfig::new(cli.dim);
        if cli.dim == 0 {
            return Err(Error::DimensionTooSmall { found: 0, needed: 1 });
        }
        cfg.lambda0 = parse_lambda0(&cli.lambda0)?;
        cfg.volume = parse_volume(&cli.volume)?;
        cfg.json = cli.json;
        let bindings = parse_bindings(&cli.params, &cfg)?;
        Ok(Session { cfg, bindings })
    }

    fn operator(&self, src: &str) -> Result<DensityOperator> {
        parse_operator(&read_arg(src)?, &self.cfg)
    }

    fn param(&self, key: &str) -> Scalar {
        self.bindings.get(key).cloned().unwrap_or_else(Scalar::zero)
    }

    fn vol_params(&self) -> VolLiftParams {
        let series = |prefix: &str| {
            let n = (1..).take_while(|k| self.bindings.contains_key(&format!("{prefix}{k}"))).count();
            (1..=n).map(|k| self.param(&format!("{prefix}{k}"))).collect()
        };
        VolLiftParams { b: self.param("b"), c: series("c"), d: series("d") }
    }

    fn handle(&self, kind: LiftKind) -> Result<LiftingHandle> {
        let l0 = self.cfg.lambda0.clone();
        let rho = self.cfg.volume;
        Ok(match kind {
            LiftKind::Canonical => LiftingHandle::Canonical { l0, rho },
            LiftKind::Vol => LiftingHandle::Vol { l0, rho, params: self.vol_params() },
            LiftKind::Distinguished => LiftingHandle::Distinguished { l0, rho },
            LiftKind::First => LiftingHandle::FirstOrder { l0, c: self.param("c") },
            LiftKind::Second => LiftingHandle::SecondOrderCanonical { l0 },
            LiftKind::Proj => LiftingHandle::ProjLift { l0 },
        })
    }

    fn show(&self, op: &DensityOperator) -> String {
        if self.cfg.json {
            serde_json::to_string(&to_json_value(op)).expect("serializable")
        } else {
            op.render()
        }
    }

    fn show_symbol(&self, p: &SymbolPoly) -> String {
        if !self.cfg.json {
            return p.render();
        }
        let terms: Vec<_> = p.terms().map(|(b, c)| json!({"xi": b.to_vec(), "coeff": c.render()})).collect();
        json!({"schema": denslift::syntax::SCHEMA, "dim": p.dim(), "terms": terms}).to_string()
    }
}

fn read_arg(src: &str) -> Result<String> {
    if src != "-" {
        return Ok(src.to_string());
    }
    let mut s = String::new();
    std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Syntax { offset: 0, message: e.to_string() })?;
    Ok(s)
}

fn verdict(residual: &DensityOperator) -> String {
    match residual.leading_term() {
        None => "PASS".into(),
        Some(t) => format!("FAIL: {}", t.render()),
    }
}

fn missing(what: &str) -> Error {
    Error::Syntax { offset: 0, message: format!("missing {what}") }
}

fn run(cli: &Cli) -> Result<String> {
    let s = Session::from_cli(cli)?;
    let l0 = s.cfg.lambda0.clone();
    match &cli.command {
        Command::Adjoint { expr } => Ok(s.show(&s.operator(expr)?.adjoint())),
        Command::Compose { a, b } => Ok(s.show(&s.operator(a)?.compose(&s.operator(b)?)?)),
        Command::Lift { kind, expr } => Ok(s.show(&s.handle(*kind)?.apply(&s.operator(expr)?)?)),
        Command::Taylor { expr } => {
            let coeffs = taylor_expand(&s.operator(expr)?, &l0, &s.cfg.volume)?;
            Ok(coeffs.iter().enumerate().map(|(k, c)| format!("H{k} = {}", s.show(c))).collect::<Vec<_>>().join("\n"))
        }
        Command::Assemble { coeffs } => {
            let ops = coeffs.iter().map(|c| s.operator(c)).collect::<Result<Vec<_>>>()?;
            Ok(s.show(&taylor_assemble(&ops, &l0, &s.cfg.volume)?))
        }
        Command::Symbol { expr } => Ok(s.show_symbol(&full_symbol(&s.operator(expr)?, &l0)?)),
        Command::Quantize { symbol } => Ok(s.show(&quantize(&parse_symbol(&read_arg(symbol)?, &s.cfg)?, &l0))),
        Command::Schwarzian { expr } => Ok(schwarzian_data(&s.operator(expr)?, &l0)?.render()),
        Command::Check { what, expr, lift } => check(&s, *what, expr.as_deref(), *lift),
    }
}

fn check(s: &Session, what: CheckKind, expr: Option<&str>, lift: LiftKind) -> Result<String> {
    let d = s.cfg.dim;
    let l0 = s.cfg.lambda0.clone();
    let delta = || s.operator(expr.ok_or_else(|| missing("operator argument"))?);
    match what {
        CheckKind::AdjointInvolution => {
            let a = delta()?;
            Ok(verdict(&a.adjoint().adjoint().sub(&a)))
        }
        CheckKind::Equivariance => {
            let a = delta()?;
            let h = s.handle(lift)?;
            let fields = if lift == LiftKind::Proj { proj_generators(d) } else { vec![generic_field("X", d)] };
            for x in fields {
                let r = ad_on_lifting(&h, &a, &x)?;
                if !r.is_zero() {
                    return Ok(verdict(&r));
                }
            }
            Ok("PASS".into())
        }
        CheckKind::Variation => Ok(verdict(&adx_variation_defect(&s.handle(lift)?, &delta()?, &generic_field("X", d))?)),
        CheckKind::SdiffClassify => {
            let keys = ["a1", "a2", "a3", "b1", "b2", "c"];
            if keys.iter().any(|k| s.bindings.contains_key(*k)) {
                let map = SecondOrderMap(keys.map(|k| s.param(k)));
                return Ok(verdict(&classify_sdiff_map(&map, d)?));
            }
            let basis = sdiff_equivariant_maps(d)?;
            let ok = basis.len() == 4 && basis.iter().all(|v| satisfies_sdiff_relations(v));
            let mut out = vec![format!("kernel dimension {}", basis.len())];
            for v in &basis {
                let parts: Vec<String> = keys.iter().zip(v).map(|(k, x)| format!("{k}={x}")).collect();
                out.push(parts.join(" "));
            }
            out.push(if ok { "PASS".into() } else { "FAIL: kernel differs from b1=a1-a2, b2=-a3".into() });
            Ok(out.join("\n"))
        }
        CheckKind::Regular => {
            let a = delta()?;
            let n = a.total_order().unwrap_or(0);
            let h = s.handle(lift)?.apply(&a)?;
            let m = h.total_order().unwrap_or(0);
            Ok(if m <= n { "PASS".into() } else { format!("FAIL: lift has order {m} > {n}") })
        }
        CheckKind::Selfadjoint => {
            let a = delta()?;
            let n = a.total_order().unwrap_or(0);
            let h = s.handle(lift)?.apply(&a)?;
            let sign = Scalar::int(if n % 2 == 0 { 1 } else { -1 });
            Ok(verdict(&h.adjoint().scale(&sign).sub(&h)))
        }
        CheckKind::Cocycle => {
            let a = delta()?;
            if !schwarzian_cocycle_check(&a, &l0, &DiffeoJet1D::generic())? {
                return Ok("FAIL: generic change of coordinates".into());
            }
            let moved = schwarzian_cocycle_check(&a, &l0, &DiffeoJet1D::mobius())?;
            Ok(if moved && DiffeoJet1D::mobius().schwarzian().is_zero() {
                "PASS".into()
            } else {
                "FAIL: fractional linear change of coordinates".into()
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_syntax() { 2 } else { 1 })
        }
    }
}
