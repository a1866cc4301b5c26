use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use lipfree::diametral::{annuli_battery, verify_separated_annuli};
use lipfree::free::{all_molecules, molecule_distance_formula, molecules_in_slice};
use lipfree::io::{
    function_to_json, parse_space_json, read_element, read_function, read_partial, read_space,
    space_from_json_unchecked, space_to_json,
};
use lipfree::lip::{
    daugavet_recursive_construction, delta_hat_family, mcshane_extend, nearest_point_function, Direction,
};
use lipfree::metric::{build_hat_space, AnnulusPair};
use lipfree::repro::{
    nested_annuli_pairs, scan_dichotomy, verify_daugavet_recursion, verify_delta_existence, verify_example1,
    verify_example2, verify_two_anchor_daugavet, DeltaInput, Example2Params,
};
use lipfree::{free_dist, free_norm, CertificateReport, FiniteMetricSpace, LipFunction, Scalar};

use crate::{AnnuliSource, Certify, Cli, Command, Construct, Format, Side};

/// What a command produced.
pub struct Output {
    pub body: String,
    /// Name of the first failing check, if any.
    pub failure: Option<String>,
    /// One-line description printed on success.
    pub summary: Option<String>,
}

impl Output {
    fn data(body: String) -> Self {
        Self {
            body,
            failure: None,
            summary: None,
        }
    }
}

/// 1 for failed certificates and broken preconditions, 2 for bad input.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<lipfree::Error>() {
        Some(lipfree::Error::Precondition { .. } | lipfree::Error::Certificate(_)) => 1,
        _ => 2,
    }
}

pub fn emit(cli: &Cli, body: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        lipfree::Error::Input {
            location: path.display().to_string(),
            message: e.to_string(),
        }
        .into()
    })
}

fn scalar<S: Scalar>(text: &str, flag: &str) -> Result<S> {
    S::parse_scalar(text).map_err(|e| {
        lipfree::Error::Input {
            location: flag.to_string(),
            message: e.to_string(),
        }
        .into()
    })
}

fn scalars<S: Scalar>(texts: &[String], flag: &str) -> Result<Vec<S>> {
    texts.iter().map(|t| scalar(t, flag)).collect()
}

fn load_space<S: Scalar>(path: &Path) -> Result<Arc<FiniteMetricSpace<S>>> {
    Ok(Arc::new(read_space(&read(path)?)?))
}

fn load_function<S: Scalar>(function: &Path, space: Option<&Path>) -> Result<LipFunction<S>> {
    let known = space.map(load_space::<S>).transpose()?;
    Ok(read_function(&read(function)?, known.as_ref())?)
}

fn label_point<S>(space: &FiniteMetricSpace<S>, label: &str, location: &str) -> Result<usize>
where
    S: Scalar,
{
    space.index_of(label).ok_or_else(|| {
        lipfree::Error::Input {
            location: location.to_string(),
            message: format!("unknown point label {label:?}"),
        }
        .into()
    })
}

fn labelled<S: Scalar>(space: &FiniteMetricSpace<S>, values: &[S]) -> Value {
    Value::Object(
        values
            .iter()
            .enumerate()
            .map(|(p, v)| (space.label(p).to_string(), Value::String(v.render())))
            .collect(),
    )
}

fn pair<S: Scalar>(space: &FiniteMetricSpace<S>, u: usize, v: usize) -> Value {
    json!([space.label(u), space.label(v)])
}

/// Adds the numeric mode, the seed and (in float mode) the tolerance.
fn envelope<S: Scalar>(cli: &Cli, command: &str, mut body: Map<String, Value>) -> String {
    body.insert("command".into(), json!(command));
    body.insert("mode".into(), json!(S::MODE));
    body.insert("seed".into(), json!(cli.seed));
    if !S::EXACT {
        body.insert("tolerance".into(), json!(format!("{:e}", S::tolerance())));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(body)).expect("json serializes");
    text.push('\n');
    text
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        other => Map::from_iter([("result".to_string(), other)]),
    }
}

fn csv_header<S: Scalar>(cli: &Cli) -> String {
    if S::EXACT {
        format!("# mode={} seed={}\n", S::MODE, cli.seed)
    } else {
        format!("# mode={} tolerance={:e} seed={}\n", S::MODE, S::tolerance(), cli.seed)
    }
}

fn certificate(cli: &Cli, mut report: CertificateReport) -> Output {
    report.seed.get_or_insert(cli.seed);
    let failure = report.failures().next().map(|c| {
        format!("{}: {} {} {}", c.description, c.lhs, c.relation, c.rhs)
            .trim_end()
            .to_string()
    });
    let failure = match failure {
        None if !report.verified => Some(format!("{}: no checks recorded", report.claim)),
        other => other,
    };
    let mut body = report.to_json();
    body.push('\n');
    Output {
        summary: Some(format!("{} ({} checks)", report.claim, report.checks.len())),
        body,
        failure,
    }
}

#[derive(Deserialize)]
struct PairJson {
    u: String,
    v: String,
    set: Vec<String>,
}

fn annuli_source<S: Scalar>(source: &AnnuliSource) -> Result<(Arc<FiniteMetricSpace<S>>, Vec<AnnulusPair>)> {
    let (Some(space_path), Some(pairs_path)) = (&source.space, &source.pairs) else {
        return Ok(nested_annuli_pairs(source.stages)?);
    };
    let space = load_space::<S>(space_path)?;
    let text = read(pairs_path)?;
    let raw: Vec<PairJson> = serde_json::from_str(&text).map_err(|e| lipfree::Error::Input {
        location: format!("{} line {} column {}", pairs_path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    let pairs = raw
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let loc = format!("pairs[{i}]");
            Ok(AnnulusPair {
                u: label_point(&space, &p.u, &loc)?,
                v: label_point(&space, &p.v, &loc)?,
                set: p
                    .set
                    .iter()
                    .map(|l| label_point(&space, l, &loc))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((space, pairs))
}

pub fn run<S: Scalar>(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Validate { space } => validate::<S>(cli, space),
        Command::Lipnorm { function, space } => {
            let f = load_function::<S>(function, space.as_deref())?;
            let s = f.space();
            let norming = f.norming_pair().map(|(u, v)| pair(s, u, v)).unwrap_or(Value::Null);
            let body = json!({"norm": f.norm().render(), "norming_pair": norming});
            Ok(Output::data(envelope::<S>(cli, "lipnorm", object(body))))
        }
        Command::Freenorm { space, element } => {
            let s = load_space::<S>(space)?;
            let mu = read_element(&read(element)?, &s)?;
            let norm = free_norm(&mu)?;
            let plan: Vec<Value> = norm
                .plan
                .flow
                .iter()
                .map(|(&(p, q), m)| json!({"from": s.label(p), "to": s.label(q), "mass": m.render()}))
                .collect();
            let body = json!({
                "value": norm.value.render(),
                "witness": labelled(&s, norm.witness.values()),
                "plan": plan,
                "plan_cost": norm.plan.cost.render(),
            });
            Ok(Output::data(envelope::<S>(cli, "freenorm", object(body))))
        }
        Command::Dist {
            space,
            a,
            b,
            molecule_table,
        } => {
            let s = load_space::<S>(space)?;
            if *molecule_table {
                return molecule_table_csv(cli, &s);
            }
            let (a, b) = (
                a.as_deref().expect("clap requires a"),
                b.as_deref().expect("clap requires b"),
            );
            let mu = read_element(&read(a)?, &s)?;
            let nu = read_element(&read(b)?, &s)?;
            let body = json!({"distance": free_dist(&mu, &nu)?.render()});
            Ok(Output::data(envelope::<S>(cli, "dist", object(body))))
        }
        Command::Extend {
            space,
            partial,
            lip,
            direction,
        } => {
            let s = load_space::<S>(space)?;
            let (subset, values) = read_partial::<S>(&read(partial)?, &s)?;
            let l = match lip {
                Some(t) => scalar::<S>(t, "--lip")?,
                None => partial_constant(&s, &subset, &values),
            };
            let dir = match direction {
                Side::Lower => Direction::Lower,
                Side::Upper => Direction::Upper,
            };
            let g = mcshane_extend(&s, &subset, &values, &l, dir)?;
            let body = json!({
                "direction": format!("{direction:?}").to_lowercase(),
                "lip": l.render(),
                "lip_constant": g.lip_constant().render(),
                "values": labelled(&s, g.values()),
            });
            Ok(Output::data(envelope::<S>(cli, "extend", object(body))))
        }
        Command::Slice { function, space, alpha } => {
            let f = load_function::<S>(function, space.as_deref())?;
            let alpha = scalar::<S>(alpha, "--alpha")?;
            let s = f.space();
            let mols: Vec<Value> = molecules_in_slice(&f, &alpha)?
                .iter()
                .map(|m| json!({"u": s.label(m.u), "v": s.label(m.v), "value": f.eval_molecule(m).render()}))
                .collect();
            let body = json!({"alpha": alpha.render(), "count": mols.len(), "molecules": mols});
            Ok(Output::data(envelope::<S>(cli, "slice", object(body))))
        }
        Command::Construct(c) => construct::<S>(cli, c),
        Command::Certify(c) => certify::<S>(cli, c),
        Command::ScanDichotomy {
            function,
            space,
            eps,
            radius,
            format,
        } => {
            let f = load_function::<S>(function, space.as_deref())?;
            let grid = scalars::<S>(eps, "--eps")?;
            let radius = scalar::<S>(radius, "--radius")?;
            let scan = scan_dichotomy(&f, &grid, &radius)?;
            let body = match format {
                Format::Csv => format!("{}{}", csv_header::<S>(cli), scan.to_csv()),
                Format::Json => envelope::<S>(cli, "scan-dichotomy", object(serde_json::to_value(&scan)?)),
            };
            Ok(Output::data(body))
        }
    }
}

/// Largest slope of the partial data; 1 when all values coincide.
fn partial_constant<S: Scalar>(space: &FiniteMetricSpace<S>, subset: &[usize], values: &[S]) -> S {
    let mut best = S::zero();
    for (i, &p) in subset.iter().enumerate() {
        for (j, &q) in subset.iter().enumerate().skip(i + 1) {
            let slope = (values[i].clone() - values[j].clone()).abs() / space.dist(p, q).clone();
            best = best.max_of(slope);
        }
    }
    if best.is_positive() {
        best
    } else {
        S::one()
    }
}

fn validate<S: Scalar>(cli: &Cli, path: &Path) -> Result<Output> {
    let raw = parse_space_json(&read(path)?)?;
    let space: FiniteMetricSpace<S> = space_from_json_unchecked(&raw)?;
    let report = space.validate();
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| {
            json!({
                "kind": v.kind,
                "points": v.indices.iter().map(|&p| space.label(p)).collect::<Vec<_>>(),
                "slack": v.slack.render(),
            })
        })
        .collect();
    let failure = report.violations.first().map(|v| {
        let pts: Vec<&str> = v.indices.iter().map(|&p| space.label(p)).collect();
        format!("metric axiom {:?} at {}", v.kind, pts.join(","))
    });
    let body = json!({"ok": report.ok, "points": space.len(), "violations": violations});
    Ok(Output {
        body: envelope::<S>(cli, "validate", object(body)),
        failure,
        summary: Some(format!("metric on {} points", space.len())),
    })
}

fn molecule_table_csv<S: Scalar>(cli: &Cli, s: &Arc<FiniteMetricSpace<S>>) -> Result<Output> {
    let mols = all_molecules(s);
    let mut out = csv_header::<S>(cli);
    out.push_str("u,v,p,q,distance,formula\n");
    for (i, m1) in mols.iter().enumerate() {
        for m2 in &mols[i + 1..] {
            let d = free_dist(&m1.to_element(s), &m2.to_element(s))?;
            let formula = molecule_distance_formula(s, *m1, *m2);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.label(m1.u),
                s.label(m1.v),
                s.label(m2.u),
                s.label(m2.v),
                d.render(),
                formula.render()
            ));
        }
    }
    Ok(Output::data(out))
}

/// Function JSON with the space inline, so the output feeds other commands.
fn function_body<S: Scalar>(f: &LipFunction<S>) -> Map<String, Value> {
    object(serde_json::to_value(function_to_json(f, true)).expect("function serializes"))
}

fn construct<S: Scalar>(cli: &Cli, c: &Construct) -> Result<Output> {
    match c {
        Construct::Daugavet(source) => {
            let (space, pairs) = annuli_source::<S>(source)?;
            let built = daugavet_recursive_construction(&space, &pairs)?;
            let mut body = function_body(&built.f);
            let stages: Vec<Value> = built
                .stages
                .iter()
                .map(|st| {
                    json!({
                        "stage": st.stage,
                        "pair": pair(&space, st.u, st.v),
                        "lip_constant": st.lip_constant.render(),
                        "lip_bound": st.lip_bound.render(),
                        "molecule_value": st.molecule_value.render(),
                        "molecule_bound": st.molecule_bound.render(),
                    })
                })
                .collect();
            body.insert("stages".into(), Value::Array(stages));
            body.insert("rescale".into(), json!(built.rescale.render()));
            Ok(Output::data(envelope::<S>(cli, "construct daugavet", body)))
        }
        Construct::DeltaHat { k, a, extra } => {
            let a = scalar::<S>(a, "--a")?;
            let hat = build_hat_space(*k, a, *extra)?;
            let space = Arc::new(hat.space);
            let fam = delta_hat_family(&space, &hat.pairs, &hat.a)?;
            let mut body = function_body(&fam.f);
            let pairs: Vec<Value> = fam.pairs.iter().map(|&(u, v)| pair(&space, u, v)).collect();
            body.insert("pairs".into(), Value::Array(pairs));
            body.insert("a".into(), json!(fam.a.render()));
            body.insert("scale".into(), json!(fam.scale.render()));
            Ok(Output::data(envelope::<S>(cli, "construct delta-hat", body)))
        }
        Construct::Nearest { space, sites } => {
            let s = load_space::<S>(space)?;
            let mut idx = vec![s.base()];
            for l in sites {
                let p = label_point(&s, l, "--sites")?;
                if !idx.contains(&p) {
                    idx.push(p);
                }
            }
            let f = nearest_point_function(&s, &idx)?;
            let mut body = function_body(&f);
            body.insert(
                "sites".into(),
                json!(idx.iter().map(|&p| s.label(p)).collect::<Vec<_>>()),
            );
            Ok(Output::data(envelope::<S>(cli, "construct nearest", body)))
        }
    }
}

fn certify<S: Scalar>(cli: &Cli, c: &Certify) -> Result<Output> {
    let report = match c {
        Certify::Example1 {
            big_n,
            n,
            samples,
            function,
        } => {
            let f = function.as_deref().map(|p| load_function::<S>(p, None)).transpose()?;
            verify_example1::<S>(*big_n, *n, f.as_ref(), *samples, cli.seed)?
        }
        Certify::Example2 {
            big_n,
            n,
            alpha,
            eps,
            samples,
        } => verify_example2(&Example2Params {
            big_n: big_n.unwrap_or(n + 1),
            n: *n,
            alphas: scalars::<S>(alpha, "--alpha")?,
            eps: scalars::<S>(eps, "--eps")?,
            samples: *samples,
            seed: cli.seed,
        })?,
        Certify::DeltaExist {
            k,
            a,
            space,
            extract_tol,
        } => {
            let input = match space {
                Some(p) => DeltaInput::Space {
                    space: load_space::<S>(p)?,
                    tolerance: scalar::<S>(extract_tol, "--extract-tol")?,
                },
                None => DeltaInput::Generated {
                    a: scalar::<S>(a, "--a")?,
                },
            };
            verify_delta_existence(&input, *k)?
        }
        Certify::DaugRec { source, battery } => {
            let (space, pairs) = annuli_source::<S>(source)?;
            verify_daugavet_recursion(&space, &pairs, pairs.len(), *battery, cli.seed)?
        }
        Certify::TwoAnchor { big_n, delta } => {
            verify_two_anchor_daugavet::<S>(*big_n, &scalars::<S>(delta, "--delta")?)?
        }
        Certify::Annuli { source, eps, battery } => {
            let (space, pairs) = annuli_source::<S>(source)?;
            let eps = scalar::<S>(eps, "--eps")?;
            let elements = annuli_battery(&space, &pairs, *battery, cli.seed)?;
            let mut report = verify_separated_annuli(&space, &pairs, &eps, &elements)?;
            report.param("points", space.len()).param("pairs", pairs.len());
            report.witness("space", space_to_json(&space));
            report
        }
    };
    Ok(certificate(cli, report))
}
