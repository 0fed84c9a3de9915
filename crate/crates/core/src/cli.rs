//! Command-line front end. [`run_command`] does all the work and returns the
//! exit code with the text to print, so it can be driven from tests.

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{field_of_order, Fe, FiniteField, Place, Poly, RationalFunction};
use crate::mwk::{mw_json, mw_normalize, mw_residue, Milnor, Mw, MwField, Term};
use crate::p1geom::{canonical_uniformizer, PlaceSet};
use crate::quadform::{
    describe_gw, gw_combine, gw_coordinates, GwElement, GwOp, QuadField, RationalFunctionField,
};
use crate::rscurve::{rebound, rs_cohomology, theta_class, BoundSpec, RsProblem};
use crate::svpic::{compare, relative_picard};

#[derive(Parser, Debug)]
#[command(
    name = "mwcurve",
    version,
    about = "Milnor-Witt K-theory and Rost-Schmid cohomology of P^1 over finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sum or product of rank-one forms in GW(F_q)
    Gw(GwArgs),
    /// Canonical Witt class of a diagonal form over F_q
    Witt(WittArgs),
    /// Normal form of a sum of Milnor-Witt terms
    MwNormalize(MwArgs),
    /// Residue at a place of an element over F_q(t)
    Residue(ResidueArgs),
    /// Cohomology of the relative Rost-Schmid complex of (P^1, D)
    RsCohom(RsArgs),
    /// Relative Picard group Pic(P^1, D)
    Picard(PicardArgs),
    /// Rank comparison from H^1 (l = 0) to Pic(P^1, D)
    Compare(PicardArgs),
    /// Class in H^1 (l = 0) of the unit form at a point
    Theta(ThetaArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("op").required(true).args(["add", "mul"])))]
struct GwArgs {
    #[arg(long)]
    q: u64,
    /// Comma-separated units; the result is the sum of their rank-one forms
    #[arg(long)]
    add: Option<String>,
    /// Comma-separated units; the result is the product of their rank-one forms
    #[arg(long)]
    mul: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct WittArgs {
    #[arg(long)]
    q: u64,
    /// Comma-separated diagonal entries
    #[arg(long)]
    form: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct MwArgs {
    #[arg(long)]
    q: u64,
    /// Work over F_q(t) instead of F_q
    #[arg(long)]
    function: bool,
    /// A term such as `2*eta*<3>*[t+1]*[t]`; repeat to add terms
    #[arg(long = "term", required = true)]
    terms: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ResidueArgs {
    #[arg(long)]
    q: u64,
    #[arg(long = "term", required = true)]
    terms: Vec<String>,
    #[arg(long, value_parser = parse_place_spec)]
    place: PlaceSpec,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("bounds").args(["bound", "auto"])))]
struct BoundArgs {
    /// Largest support degree to use
    #[arg(long)]
    bound: Option<u32>,
    /// Increase the bound until it stabilizes (the default)
    #[arg(long)]
    auto: bool,
}

impl BoundArgs {
    fn spec(&self) -> BoundSpec {
        match self.bound {
            Some(b) => BoundSpec::Cap(b),
            None => BoundSpec::Auto,
        }
    }
}

#[derive(Args, Debug)]
struct RsArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, default_value = "", value_parser = parse_place_list)]
    remove: PlaceList,
    #[arg(long, allow_hyphen_values = true)]
    l: i32,
    #[command(flatten)]
    bounds: BoundArgs,
    #[arg(long)]
    json: bool,
    /// Fail when stabilization is not certified
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct PicardArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, default_value = "", value_parser = parse_place_list)]
    remove: PlaceList,
    #[command(flatten)]
    bounds: BoundArgs,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct ThetaArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, default_value = "", value_parser = parse_place_list)]
    remove: PlaceList,
    #[arg(long, value_parser = parse_place_spec)]
    point: PlaceSpec,
    #[command(flatten)]
    bounds: BoundArgs,
    #[arg(long)]
    json: bool,
}

/// A place as typed, before the field is known.
#[derive(Clone, Debug)]
enum PlaceSpec {
    Zero,
    Infinity,
    Coefficients(Vec<u32>),
}

#[derive(Clone, Debug)]
struct PlaceList(Vec<PlaceSpec>);

fn parse_place_spec(s: &str) -> std::result::Result<PlaceSpec, String> {
    let s = s.trim();
    match s {
        "0" => Ok(PlaceSpec::Zero),
        "inf" => Ok(PlaceSpec::Infinity),
        _ => {
            let inner = s
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| format!("invalid place `{s}`: expected 0, inf or [c0,...,1]"))?;
            let coeffs = inner
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<u32>()
                        .map_err(|_| format!("invalid coefficient `{c}`"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(PlaceSpec::Coefficients(coeffs))
        }
    }
}

fn parse_place_list(s: &str) -> std::result::Result<PlaceList, String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    let bytes = s.as_bytes();
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced brackets".into());
    }
    if start < bytes.len() {
        out.push(&s[start..]);
    }
    let specs = out
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(parse_place_spec)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(PlaceList(specs))
}

fn resolve_place(spec: &PlaceSpec, f: &FiniteField) -> std::result::Result<Place, String> {
    match spec {
        PlaceSpec::Zero => Ok(Place::zero()),
        PlaceSpec::Infinity => Ok(Place::Infinity),
        PlaceSpec::Coefficients(c) => {
            if c.iter().any(|x| *x >= f.order()) {
                return Err(format!("coefficients must lie in [0, {})", f.order()));
            }
            let p = Poly::from_codes(c);
            let shown = p.display();
            Place::finite(p, f)
                .ok_or_else(|| format!("`{shown}` is not monic irreducible over {}", f.name()))
        }
    }
}

/// Outcome of a command: exit code and the text for stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Computation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Computation(e.to_string())
    }
}

type Outcome = std::result::Result<(String, bool), Failure>;

/// `run_command`: parses `argv` (without the program name) and dispatches.
/// Exit code 0 on success, 2 on usage errors, 1 on computation errors.
pub fn run_command<I, S>(argv: I) -> CommandOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("mwcurve"))
        .chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandOutput {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => CommandOutput {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match dispatch(cli.command) {
        Ok((stdout, failed)) => CommandOutput {
            code: failed as i32,
            stdout,
            stderr: if failed {
                "error: stabilization not certified\n".to_string()
            } else {
                String::new()
            },
        },
        Err(Failure::Usage(m)) => CommandOutput {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {m}\n"),
        },
        Err(Failure::Computation(m)) => CommandOutput {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {m}\n"),
        },
    }
}

fn base_field(q: u64) -> std::result::Result<std::sync::Arc<FiniteField>, Failure> {
    let f = field_of_order(q).map_err(|e| Failure::Usage(e.to_string()))?;
    if f.characteristic() == 2 {
        return Err(Failure::Usage(format!("q = {q} must be odd")));
    }
    Ok(f)
}

fn places(list: &PlaceList, f: &FiniteField) -> std::result::Result<PlaceSet, Failure> {
    let set = list
        .0
        .iter()
        .map(|s| resolve_place(s, f))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(Failure::Usage)?;
    Ok(PlaceSet::new(set))
}

fn render(value: &Value, text: String, as_json: bool) -> String {
    if as_json {
        format!(
            "{}\n",
            serde_json::to_string(value).expect("json values serialize")
        )
    } else {
        text
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Gw(a) => run_gw(a),
        Command::Witt(a) => run_witt(a),
        Command::MwNormalize(a) => run_mw(a),
        Command::Residue(a) => run_residue(a),
        Command::RsCohom(a) => run_rs(a),
        Command::Picard(a) => run_picard(a),
        Command::Compare(a) => run_compare(a),
        Command::Theta(a) => run_theta(a),
    }
}

fn parse_fe(s: &str, f: &FiniteField) -> std::result::Result<Fe, Failure> {
    let s = s.trim();
    let v = s
        .parse::<i64>()
        .map_err(|_| Failure::Usage(format!("invalid element `{s}` of {}", f.name())))?;
    if v < 0 {
        return Ok(f.neg(f.from_int(-v)));
    }
    if v as u64 >= f.order() as u64 {
        return Err(Failure::Usage(format!(
            "element code {v} out of range for {}",
            f.name()
        )));
    }
    Ok(Fe(v as u32))
}

fn parse_fe_list(s: &str, f: &FiniteField) -> std::result::Result<Vec<Fe>, Failure> {
    s.split(',').map(|x| parse_fe(x, f)).collect()
}

fn gw_json(f: &FiniteField, g: &GwElement<crate::quadform::FiniteWitt>) -> Value {
    let (rank, bit) = gw_coordinates(f, g);
    let disc = if bit { f.least_nonsquare() } else { Fe(1) };
    let entries: Vec<u32> = g.witt.representative(f).iter().map(|a| a.0).collect();
    json!({
        "field": f.name(),
        "rank": rank,
        "disc": disc.0,
        "witt": {"field": f.name(), "entries": entries},
        "description": describe_gw(f, g),
    })
}

fn run_gw(a: GwArgs) -> Outcome {
    let f = base_field(a.q)?;
    let (op, list) = match (&a.add, &a.mul) {
        (Some(l), _) => (GwOp::Add, l),
        (_, Some(l)) => (GwOp::Multiply, l),
        _ => unreachable!("clap enforces the group"),
    };
    let units = parse_fe_list(list, &f)?;
    let forms = units
        .iter()
        .map(|u| GwElement::from_form(&*f, std::slice::from_ref(u)))
        .collect::<Result<Vec<_>>>()?;
    let start = match op {
        GwOp::Add => GwElement::integer(&*f, 0),
        GwOp::Multiply => GwElement::integer(&*f, 1),
    };
    let g = forms
        .iter()
        .fold(start, |acc, x| gw_combine(&*f, op, &acc, x));
    Ok((
        render(
            &gw_json(&f, &g),
            format!("{}\n", describe_gw(&f, &g)),
            a.json,
        ),
        false,
    ))
}

fn run_witt(a: WittArgs) -> Outcome {
    let f = base_field(a.q)?;
    let entries = parse_fe_list(&a.form, &f)?;
    let w = crate::quadform::witt_class_normalize(&*f, &entries)?;
    let rep: Vec<u32> = w.representative(&f).iter().map(|x| x.0).collect();
    let shown = if rep.is_empty() {
        "0".to_string()
    } else {
        crate::quadform::format_form(&rep.iter().map(|x| x.to_string()).collect::<Vec<_>>())
    };
    let disc = f.signed_discriminant(&entries);
    let value = json!({
        "field": f.name(),
        "entries": rep,
        "rank_parity": entries.len() % 2,
        "signed_disc": f.square_class_rep(disc).0,
    });
    let text = format!(
        "{shown}; rank parity {}, signed disc {}\n",
        entries.len() % 2,
        f.square_class_rep(disc)
    );
    Ok((render(&value, text, a.json), false))
}

/// `c0 + c1 t + ... ` written as e.g. `2t^2 + t + 1`; coefficients are
/// element codes.
fn parse_poly(s: &str, f: &FiniteField) -> std::result::Result<Poly, Failure> {
    let bad = || Failure::Usage(format!("invalid polynomial `{s}`"));
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad());
    }
    let mut coeffs: Vec<Fe> = Vec::new();
    let mut monomials = Vec::new();
    let mut current = String::new();
    for c in compact.chars() {
        if (c == '+' || c == '-') && !current.is_empty() {
            monomials.push(std::mem::take(&mut current));
        }
        current.push(c);
    }
    monomials.push(current);
    for m in monomials {
        let (negative, body) = match m.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, m.strip_prefix('+').unwrap_or(&m)),
        };
        let (coef, power) = match body.find('t') {
            None => (body, 0usize),
            Some(i) => {
                let rest = &body[i + 1..];
                let power = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .and_then(|e| e.parse().ok())
                        .ok_or_else(bad)?
                };
                (&body[..i], power)
            }
        };
        let c = if coef.is_empty() {
            Fe(1)
        } else {
            parse_fe(coef, f).map_err(|_| bad())?
        };
        let c = if negative { f.neg(c) } else { c };
        if coeffs.len() <= power {
            coeffs.resize(power + 1, Fe(0));
        }
        coeffs[power] = f.add(coeffs[power], c);
    }
    Ok(Poly::new(coeffs))
}

fn parse_function(s: &str, f: &FiniteField) -> std::result::Result<RationalFunction, Failure> {
    let strip = |x: &str| {
        let x = x.trim();
        x.strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(x)
            .to_string()
    };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (parse_poly(&strip(n), f)?, parse_poly(&strip(d), f)?),
        None => (parse_poly(&strip(s), f)?, Poly::one()),
    };
    Ok(RationalFunction::from_fraction(&num, &den, f)?)
}

/// A term is a `*`-separated product of an integer, `eta` or `eta^k`, at
/// most one `<u>` and up to two symbols `[a]`.
fn parse_term<E>(
    s: &str,
    parse_elem: &dyn Fn(&str) -> std::result::Result<E, Failure>,
) -> std::result::Result<Term<E>, Failure> {
    let mut term = Term {
        coef: 1,
        eta_power: 0,
        unit: None,
        symbols: Vec::new(),
    };
    for factor in s.split('*').map(str::trim) {
        if let Some(e) = factor.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
            if term.unit.is_some() {
                return Err(Failure::Usage(format!("more than one unit in `{s}`")));
            }
            term.unit = Some(parse_elem(e)?);
        } else if let Some(e) = factor.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            term.symbols.push(parse_elem(e)?);
        } else if factor == "eta" {
            term.eta_power += 1;
        } else if let Some(k) = factor.strip_prefix("eta^") {
            term.eta_power += k
                .parse::<u32>()
                .map_err(|_| Failure::Usage(format!("invalid power in `{factor}`")))?;
        } else if let Ok(n) = factor.parse::<i64>() {
            term.coef *= n;
        } else {
            return Err(Failure::Usage(format!("cannot read factor `{factor}`")));
        }
    }
    Ok(term)
}

fn mw_text<F: MwField>(field: &F, x: &Mw<F>) -> String {
    let milnor = match &x.milnor {
        Milnor::None => "-".to_string(),
        Milnor::Int(n) => n.to_string(),
        Milnor::Unit(u) => field.display_elem(u),
        Milnor::K2(k) => field.k2_json(k).to_string(),
    };
    let rep = field.witt_representative(&x.witt);
    let witt = if rep.is_empty() {
        "0".to_string()
    } else {
        crate::quadform::format_form(
            &rep.iter()
                .map(|e| field.display_elem(e))
                .collect::<Vec<_>>(),
        )
    };
    format!("degree {}; milnor {milnor}; witt {witt}\n", x.degree)
}

fn run_mw(a: MwArgs) -> Outcome {
    let f = base_field(a.q)?;
    if a.function {
        let k = RationalFunctionField::new(f.clone());
        let parse = |s: &str| parse_function(s, &f);
        let terms = a
            .terms
            .iter()
            .map(|t| parse_term(t, &parse))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let x = mw_normalize(&k, &terms)?;
        Ok((render(&mw_json(&k, &x), mw_text(&k, &x), a.json), false))
    } else {
        let parse = |s: &str| parse_fe(s, &f);
        let terms = a
            .terms
            .iter()
            .map(|t| parse_term(t, &parse))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let x = mw_normalize(&*f, &terms)?;
        Ok((render(&mw_json(&*f, &x), mw_text(&*f, &x), a.json), false))
    }
}

fn run_residue(a: ResidueArgs) -> Outcome {
    let f = base_field(a.q)?;
    let k = RationalFunctionField::new(f.clone());
    let place = resolve_place(&a.place, &f).map_err(Failure::Usage)?;
    let parse = |s: &str| parse_function(s, &f);
    let terms = a
        .terms
        .iter()
        .map(|t| parse_term(t, &parse))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let x = mw_normalize(&k, &terms)?;
    let r = mw_residue(&k, &x, &place, &canonical_uniformizer(&place))?;
    let big = r.residue_field.field().clone();
    let value = json!({
        "place": place,
        "residue_field": big.name(),
        "value": mw_json(&*big, &r.value),
    });
    let text = format!(
        "residue at {place} in {}: {}",
        big.name(),
        mw_text(&*big, &r.value)
    );
    Ok((render(&value, text, a.json), false))
}

fn stabilized_text(s: Option<u32>) -> String {
    match s {
        Some(b) => format!("stabilized at B = {b}"),
        None => "not certified".to_string(),
    }
}

fn run_rs(a: RsArgs) -> Outcome {
    let f = base_field(a.q)?;
    let removed = places(&a.remove, &f)?;
    let problem = RsProblem::new(a.q, removed.clone(), a.l, a.bounds.spec())
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let comp = rs_cohomology(&problem)?;
    let r = &comp.result;
    let text = format!(
        "(P^1, {}) over {}, l = {}\nH^0 = {}\nH^1 = {}\n{} (data at B = {}, {} generators)\n",
        removed.display(),
        f.name(),
        a.l,
        r.h0,
        r.h1,
        stabilized_text(r.stabilized_at),
        r.bound,
        r.generators_used
    );
    let value = serde_json::to_value(r).expect("result serializes");
    let failed = a.strict && r.stabilized_at.is_none();
    Ok((render(&value, text, a.json), failed))
}

fn run_picard(a: PicardArgs) -> Outcome {
    let f = base_field(a.q)?;
    let removed = places(&a.remove, &f)?;
    let comp = relative_picard(a.q, &removed, a.bounds.spec()).map_err(|e| match e {
        Error::BoundTooSmall { .. } => Failure::Usage(e.to_string()),
        e => Failure::Computation(e.to_string()),
    })?;
    let r = &comp.result;
    let mut text = format!(
        "Pic(P^1, {}) over {} = {}\n{} (data at B = {})\n",
        removed.display(),
        f.name(),
        r.invariants,
        stabilized_text(r.stabilized_at),
        r.bound
    );
    if let Some(d) = &r.degree_map_coordinates {
        text.push_str(&format!("degree of generators: {d:?}\n"));
    }
    let value = serde_json::to_value(r).expect("result serializes");
    let failed = a.strict && r.stabilized_at.is_none();
    Ok((render(&value, text, a.json), failed))
}

fn run_compare(a: PicardArgs) -> Outcome {
    let f = base_field(a.q)?;
    let removed = places(&a.remove, &f)?;
    let (rs, pic, cmp) = compare(a.q, &removed, a.bounds.spec()).map_err(|e| match e {
        Error::BoundTooSmall { .. } => Failure::Usage(e.to_string()),
        e => Failure::Computation(e.to_string()),
    })?;
    let certified = rs.result.stabilized_at.is_some() && pic.result.stabilized_at.is_some();
    let text = format!(
        "rank: H^1 = {} -> Pic = {}\nmatrix {:?}\nsurjective: {}\nkernel: {}\n{}\n",
        cmp.source,
        cmp.target,
        cmp.matrix,
        cmp.surjective,
        cmp.kernel,
        if certified {
            "both sides stabilized"
        } else {
            "not certified"
        }
    );
    let value = json!({
        "q": a.q,
        "remove": removed,
        "bound": rs.result.bound,
        "certified": certified,
        "source": cmp.source,
        "target": cmp.target,
        "matrix": cmp.matrix,
        "surjective": cmp.surjective,
        "kernel": cmp.kernel,
    });
    Ok((render(&value, text, a.json), a.strict && !certified))
}

fn run_theta(a: ThetaArgs) -> Outcome {
    let f = base_field(a.q)?;
    let removed = places(&a.remove, &f)?;
    let point = resolve_place(&a.point, &f).map_err(Failure::Usage)?;
    if removed.contains(&point) {
        return Err(Failure::Usage(
            Error::PlaceInD(point.to_string()).to_string(),
        ));
    }
    let problem = RsProblem::new(a.q, removed.clone(), 0, a.bounds.spec())
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let comp = rs_cohomology(&problem)?;
    let comp = rebound(comp, point.degree())?;
    let class = theta_class(&comp, &point)?;
    let value = json!({
        "q": a.q,
        "remove": removed,
        "point": point,
        "h1": comp.result.h1,
        "class": class,
    });
    let text = format!(
        "theta({point}) in H^1 = {}: torsion {:?}, free {:?}\n",
        comp.result.h1, class.torsion, class.free
    );
    Ok((render(&value, text, a.json), false))
}
