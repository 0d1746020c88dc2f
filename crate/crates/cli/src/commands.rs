use std::fmt::Write;

use cqoa::algebras::{parse_kappa, parse_selector, Selector};
use cqoa::brst::{BrstContext, BrstError};
use cqoa::coeff::Coefficient;
use cqoa::engine::{Engine, OpeResult};
use cqoa::expr::FieldExpr;
use cqoa::syntax::{parse_expr, render};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{BrstCommand, BvCommand, Cli, Command, Global};
use crate::report::Report;
use crate::UsageError;

type Result<T> = std::result::Result<T, UsageError>;

pub fn dispatch(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    let selector = selector(g)?;
    match &cli.command {
        Command::Brst(cmd) => brst(g, &Runner::brst(g, &selector)?, cmd),
        Command::Bv(cmd) => bv(g, &Runner::brst(g, &selector)?, cmd),
        cmd => general(g, &Runner::plain(g, &selector)?, cmd),
    }
}

fn selector(g: &Global) -> Result<Selector> {
    let s = parse_selector(&g.algebra)?;
    let Some(k) = &g.kappa else {
        return Ok(s);
    };
    if matches!(s, Selector::Bc(_)) {
        return Err(UsageError("--kappa does not apply to a bc algebra".into()));
    }
    Ok(s.with_kappa(Some(parse_kappa(k)?)))
}

/// The algebra a command runs in, with the BRST layer when available.
struct Runner {
    label: String,
    engine: Option<Engine>,
    brst: Option<BrstContext>,
    dump_states: bool,
}

impl Runner {
    fn plain(g: &Global, s: &Selector) -> Result<Runner> {
        let (alg, _) = s.build()?;
        Ok(Runner {
            label: s.to_string(),
            engine: Some(Engine::new(alg)?),
            brst: None,
            dump_states: g.dump_states,
        })
    }

    fn brst(g: &Global, s: &Selector) -> Result<Runner> {
        let Selector::Brst(kappa) = s else {
            return Err(UsageError(format!("BRST and BV commands need `--algebra brst`, not `{s}`")));
        };
        let ctx = BrstContext::new(kappa.clone().unwrap_or_else(Coefficient::kappa))?;
        Ok(Runner {
            label: s.to_string(),
            engine: None,
            brst: Some(ctx),
            dump_states: g.dump_states,
        })
    }

    fn ctx(&self) -> &BrstContext {
        self.brst.as_ref().expect("BRST runner")
    }

    fn engine(&self) -> &Engine {
        match (&self.engine, &self.brst) {
            (Some(e), _) => e,
            (None, Some(ctx)) => ctx.engine(),
            (None, None) => unreachable!("runner without an engine"),
        }
    }

    fn parse(&self, src: &str) -> Result<FieldExpr> {
        let e = self.engine();
        let x = parse_expr(src, e).map_err(|err| UsageError(format!("in `{src}`: {err}")))?;
        Ok(e.normal_form(&x)?)
    }

    fn show(&self, x: &FieldExpr) -> String {
        render(x, self.engine().algebra())
    }

    /// `{"expr": ...}` plus the state dump when requested.
    fn expr_value(&self, x: &FieldExpr) -> Result<Value> {
        let mut v = json!({ "expr": self.show(x) });
        if self.dump_states {
            v["states"] = self.states_value(x)?;
        }
        Ok(v)
    }

    fn expr_text(&self, x: &FieldExpr) -> Result<String> {
        let mut t = self.show(x);
        if self.dump_states {
            let space = self.engine().space();
            let state = space.state_of(x)?;
            t.push('\n');
            t.push_str(&space.dump(&state));
        }
        Ok(t)
    }

    fn states_value(&self, x: &FieldExpr) -> Result<Value> {
        let space = self.engine().space();
        let state = space.state_of(x)?;
        Ok(state
            .iter()
            .map(|(s, c)| json!({ "state": space.format_state(s), "coefficient": c.to_string() }))
            .collect())
    }

    fn ope_report(&self, ope: &OpeResult) -> Result<(Value, String)> {
        let mut singular = Vec::new();
        let mut text = String::new();
        for (n, x) in ope.singular.iter().rev() {
            let mut entry = json!({ "n": n, "expr": self.show(x) });
            if self.dump_states {
                entry["states"] = self.states_value(x)?;
            }
            singular.push(entry);
            let _ = writeln!(text, "{n}: {}", self.expr_text(x)?);
        }
        if ope.singular.is_empty() {
            text.push_str("regular\n");
        }
        let _ = write!(text, "locality_order: {}", ope.locality_order);
        Ok((json!({ "singular": singular, "locality_order": ope.locality_order }), text))
    }
}

fn brst_error(e: BrstError) -> UsageError {
    UsageError(e.to_string())
}

fn general(g: &Global, r: &Runner, cmd: &Command) -> Result<Report> {
    let e = r.engine();
    match cmd {
        Command::Ope { u, v } => {
            let ope = e.ope(&r.parse(u)?, &r.parse(v)?)?;
            let (json, text) = r.ope_report(&ope)?;
            Ok(Report::new(json, text))
        }
        Command::Circle { u, n, v } => {
            let x = e.circle(&r.parse(u)?, *n, &r.parse(v)?)?;
            let mut json = r.expr_value(&x)?;
            json["n"] = json!(n);
            Ok(Report::new(json, r.expr_text(&x)?))
        }
        Command::Nf { expr } => {
            let x = r.parse(expr)?;
            Ok(Report::new(r.expr_value(&x)?, r.expr_text(&x)?))
        }
        Command::Wick { u, v } => {
            let x = e.wick(&r.parse(u)?, &r.parse(v)?)?;
            Ok(Report::new(r.expr_value(&x)?, r.expr_text(&x)?))
        }
        Command::Basis { weight, ghost } => basis(g, r, *weight, *ghost),
        Command::CheckAxioms => {
            let max_weight = g.max_weight.unwrap_or(3);
            let n_floor = g.n_floor.unwrap_or(-3);
            let report = e.check_semi_infinite_axioms(max_weight, n_floor)?;
            let json = json!({
                "algebra": r.label,
                "max_weight": max_weight,
                "n_floor": n_floor,
                "monomials": report.monomials,
                "pairs": report.pairs,
                "checks": report.checks,
                "passed": report.passed(),
                "failure": report.failure,
            });
            let status = match &report.failure {
                None => "pass".to_string(),
                Some(f) => format!("FAIL: {f}"),
            };
            let text = format!(
                "{}: axioms to weight {max_weight}, n >= {n_floor}: {} monomials, {} pairs, {} checks\n{status}",
                r.label, report.monomials, report.pairs, report.checks
            );
            Ok(Report::checked(json, text, report.passed()))
        }
        Command::OracleCompare { u, v, n_max } => oracle_compare(g, r, u.as_deref(), v.as_deref(), n_max.unwrap_or(5)),
        Command::Brst(_) | Command::Bv(_) => unreachable!("dispatched separately"),
    }
}

fn basis(g: &Global, r: &Runner, weight: Option<i64>, ghost: Option<i64>) -> Result<Report> {
    let space = r.engine().space();
    let max = weight.unwrap_or_else(|| g.max_weight.unwrap_or(4));
    let ghosts = match ghost {
        Some(gh) => vec![gh],
        None => space.ghost_range(max),
    };
    let mut blocks = Vec::new();
    let mut text = String::new();
    for gh in ghosts {
        let Some(floor) = space.min_weight(gh) else {
            return Err(UsageError(format!("ghost number {gh} does not occur in {}", r.label)));
        };
        let weights: Vec<i64> = match weight {
            Some(w) => vec![w],
            None => (floor..=max).collect(),
        };
        for w in weights {
            let monos: Vec<String> = space
                .canonical_monomials(w, gh)
                .into_iter()
                .map(|m| r.show(&FieldExpr::monomial(Some(r.engine().algebra().key().clone()), m, Coefficient::one())))
                .collect();
            let states: Vec<String> = space.enumerate(w, gh).iter().map(|s| space.format_state(s)).collect();
            let _ = writeln!(text, "ghost {gh}, weight {w}: {} elements", monos.len());
            for m in &monos {
                let _ = writeln!(text, "  {m}");
            }
            if r.dump_states {
                for s in &states {
                    let _ = writeln!(text, "  {s}");
                }
            }
            let mut block = json!({ "ghost": gh, "weight": w, "count": monos.len(), "monomials": monos });
            if r.dump_states {
                block["states"] = json!(states);
            }
            blocks.push(block);
        }
    }
    Ok(Report::new(json!({ "algebra": r.label, "bidegrees": blocks }), text))
}

/// Index tuples over `n` items: every tuple, or `samples` seeded draws.
fn tuples(n: usize, arity: u32, samples: Option<usize>, seed: u64) -> Vec<Vec<usize>> {
    match samples {
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..k).map(|_| (0..arity).map(|_| rng.gen_range(0..n)).collect()).collect()
        }
        None => {
            let total = n.pow(arity);
            (0..total)
                .map(|mut i| {
                    let mut t = vec![0; arity as usize];
                    for slot in t.iter_mut().rev() {
                        *slot = i % n;
                        i /= n;
                    }
                    t
                })
                .collect()
        }
    }
}

fn oracle_compare(g: &Global, r: &Runner, u: Option<&str>, v: Option<&str>, n_max: i64) -> Result<Report> {
    let e = r.engine();
    let cutoff = g.cutoff.unwrap_or(6);
    let n_floor = g.n_floor.unwrap_or(-3);
    if n_max < n_floor {
        return Err(UsageError(format!("empty product range {n_floor}..={n_max}")));
    }
    let pairs: Vec<(FieldExpr, FieldExpr)> = match (u, v) {
        (Some(u), Some(v)) => vec![(r.parse(u)?, r.parse(v)?)],
        (None, None) => {
            let monos = e.canonical_monomials_up_to(g.max_weight.unwrap_or(2));
            if monos.is_empty() {
                return Err(UsageError("no monomials in range".into()));
            }
            tuples(monos.len(), 2, g.samples, g.seed)
                .into_iter()
                .map(|t| (monos[t[0]].clone(), monos[t[1]].clone()))
                .collect()
        }
        _ => return Err(UsageError("give both u and v, or neither for a sweep".into())),
    };
    let space = e.space();
    let mut disagreements = Vec::new();
    let mut text = String::new();
    for (x, y) in &pairs {
        for (n, states) in e.oracle_compare(x, y, n_floor..=n_max, cutoff)? {
            let shown: Vec<String> = states.iter().map(|(m, s)| format!("mode {m} on {}", space.format_state(s))).collect();
            let _ = writeln!(text, "{} ∘_{n} {} differs on {} matrix entries", r.show(x), r.show(y), shown.len());
            disagreements.push(json!({ "u": r.show(x), "v": r.show(y), "n": n, "entries": shown }));
        }
    }
    let passed = disagreements.is_empty();
    let _ = write!(
        text,
        "{}: {} pairs, n in {n_floor}..={n_max}, cutoff {cutoff}: {}",
        r.label,
        pairs.len(),
        if passed { "agree" } else { "FAIL" }
    );
    let json = json!({
        "algebra": r.label,
        "pairs": pairs.len(),
        "n_range": [n_floor, n_max],
        "cutoff": cutoff,
        "passed": passed,
        "disagreements": disagreements,
    });
    Ok(Report::checked(json, text, passed))
}

fn brst(_g: &Global, r: &Runner, cmd: &BrstCommand) -> Result<Report> {
    let ctx = r.ctx();
    match cmd {
        BrstCommand::Current => {
            let ope = ctx.cartan_ope().map_err(brst_error)?;
            let (cartan, cartan_text) = r.ope_report(&ope)?;
            let json = json!({
                "kappa": ctx.kappa().to_string(),
                "current": r.show(ctx.brst_current()),
                "stress_tensor": r.show(ctx.l_total()),
                "ope_j_b": cartan,
            });
            let text = format!(
                "J = {}\nL^C = {}\nJ(z) b(w):\n{cartan_text}",
                r.show(ctx.brst_current()),
                r.show(ctx.l_total())
            );
            Ok(Report::new(json, text))
        }
        BrstCommand::Dsquare { parts } => {
            let jj = ctx.j_square().map_err(brst_error)?;
            let (primitive, reduced) = ctx.split_mod_derivative(&jj).map_err(brst_error)?;
            let mut json = r.expr_value(&jj)?;
            json["kappa"] = json!(ctx.kappa().to_string());
            json["primitive"] = json!(r.show(&primitive));
            json["reduced"] = json!(r.show(&reduced));
            let mut text = r.expr_text(&jj)?;
            let _ = write!(text, "\n= d({}) + {}", r.show(&primitive), r.show(&reduced));
            if *parts {
                let p = ctx.j_square_parts().map_err(brst_error)?;
                let named = [
                    ("matter", &p.matter),
                    ("matter_ghost", &p.matter_ghost),
                    ("ghost_matter", &p.ghost_matter),
                    ("ghost", &p.ghost),
                ];
                let mut obj = serde_json::Map::new();
                for (label, (name, x)) in ["(i)", "(ii)", "(iii)", "(iv)"].iter().zip(named) {
                    obj.insert(name.to_string(), json!(r.show(x)));
                    let _ = write!(text, "\n{label} {name}: {}", r.show(x));
                }
                json["parts"] = Value::Object(obj);
            }
            Ok(Report::new(json, text))
        }
        BrstCommand::Nilpotency => {
            let jj = ctx.j_square().map_err(brst_error)?;
            let (primitive, reduced) = ctx.split_mod_derivative(&jj).map_err(brst_error)?;
            let nilpotent = reduced.is_zero();
            let json = json!({
                "kappa": ctx.kappa().to_string(),
                "j_square": r.show(&jj),
                "primitive": r.show(&primitive),
                "reduced": r.show(&reduced),
                "nilpotent": nilpotent,
            });
            let text = format!(
                "J∘0J = {}\n      = d({}) + {}\nQ^2 {} 0",
                r.show(&jj),
                r.show(&primitive),
                r.show(&reduced),
                if nilpotent { "=" } else { "!=" }
            );
            Ok(Report::new(json, text))
        }
        BrstCommand::Kernel { weight, ghost } => {
            let space = ctx.engine().space();
            if space.min_weight(*ghost).is_none() {
                return Err(UsageError(format!("ghost number {ghost} does not occur")));
            }
            let basis = ctx.q_closed_basis(*weight, *ghost).map_err(brst_error)?;
            let kernel: Vec<String> = basis.kernel.iter().map(|x| r.show(x)).collect();
            let mut text = format!(
                "ghost {ghost}, weight {weight}: kernel {}, image {}, cohomology {}",
                basis.kernel_dim,
                basis.image_dim,
                basis.kernel_dim - basis.image_dim
            );
            for k in &kernel {
                let _ = write!(text, "\n  {k}");
            }
            let json = json!({
                "weight": weight,
                "ghost": ghost,
                "kernel": kernel,
                "kernel_dim": basis.kernel_dim,
                "image_dim": basis.image_dim,
                "cohomology_dim": basis.kernel_dim - basis.image_dim,
            });
            Ok(Report::new(json, text))
        }
    }
}

fn bv(g: &Global, r: &Runner, cmd: &BvCommand) -> Result<Report> {
    let ctx = r.ctx();
    match cmd {
        BvCommand::Delta { u } => {
            let x = ctx.bv_delta(&r.parse(u)?).map_err(brst_error)?;
            Ok(Report::new(r.expr_value(&x)?, r.expr_text(&x)?))
        }
        BvCommand::Bracket { u, v } => {
            let x = ctx.bv_bracket(&r.parse(u)?, &r.parse(v)?).map_err(brst_error)?;
            Ok(Report::new(r.expr_value(&x)?, r.expr_text(&x)?))
        }
        BvCommand::SecondOrder { a, b, c } => {
            let triples: Vec<[FieldExpr; 3]> = match (a, b, c) {
                (Some(a), Some(b), Some(c)) => vec![[r.parse(a)?, r.parse(b)?, r.parse(c)?]],
                (None, None, None) => {
                    let monos = ctx.engine().canonical_monomials_up_to(g.max_weight.unwrap_or(2));
                    if monos.is_empty() {
                        return Err(UsageError("no monomials in range".into()));
                    }
                    tuples(monos.len(), 3, g.samples, g.seed)
                        .into_iter()
                        .map(|t| [monos[t[0]].clone(), monos[t[1]].clone(), monos[t[2]].clone()])
                        .collect()
                }
                _ => return Err(UsageError("give all of a, b, c, or none for a sweep".into())),
            };
            let mut failures = Vec::new();
            for [x, y, z] in &triples {
                if !ctx.second_order_identity_check(x, y, z).map_err(brst_error)? {
                    failures.push([r.show(x), r.show(y), r.show(z)]);
                }
            }
            let passed = failures.is_empty();
            let mut text = format!(
                "second-order identity on {} triples: {}",
                triples.len(),
                if passed { "pass" } else { "FAIL" }
            );
            for f in &failures {
                let _ = write!(text, "\n  fails on ({}, {}, {})", f[0], f[1], f[2]);
            }
            let json = json!({ "triples": triples.len(), "passed": passed, "failures": failures });
            Ok(Report::checked(json, text, passed))
        }
    }
}
