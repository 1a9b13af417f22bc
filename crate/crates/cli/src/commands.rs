use std::fs;
use std::io::{self, Write};
use std::path::Path;

use pamm_core::discrete::{discrete_curve_of_state, discrete_redeem};
use pamm_core::dynamics::{apply_path, check_path_deficiency, check_split, TradeKind};
use pamm_core::io::{
    curve_to_json, load_thresholds, params_hash, parse_path_script, parse_statics, quote_to_json, thresholds_to_json,
    write_curve_csv, write_quote_csv, write_trace_csv,
};
use pamm_core::numeric::measure;
use pamm_core::reconstruct::{quote_curve, redeem};
use pamm_core::region::precompute;
use pamm_core::suites::{run_suite, SuiteOutcome, SUITES};
use pamm_core::{
    AnchorPoint, Counted, CurvePoint, CurveSpec, DiscreteSpec, FeeConfig, Fixed18, NumericMode, PrecomputedThresholds,
    Scalar, StaticParams, SystemState, Triviality,
};

use crate::failure::Failure;
use crate::{Check, Cli, Command, Format, StateArgs, Variant};

type Outcome = Result<(), Failure>;

pub fn run(cli: &Cli) -> Outcome {
    match cli.mode {
        NumericMode::Float => run_in::<f64>(cli),
        NumericMode::Fixed => run_in::<Fixed18>(cli),
    }
}

fn run_in<S: Scalar>(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Quote {
            state,
            amount,
            variant,
            thresholds,
        } => quote::<S>(cli, state, amount, *variant, thresholds.as_deref()),
        Command::Curve {
            x,
            b,
            y,
            ba,
            ya,
            family,
            out_dir,
            samples,
            variant,
        } => {
            if let Some(ratios) = family {
                return curve_family::<S>(cli, ratios, out_dir, *samples, *variant);
            }
            let points = match (x, b, y, ba) {
                (Some(x), Some(b), Some(y), None) => {
                    let s = parse_state::<S>(x, b, y)?;
                    let p = load_params::<S>(cli)?;
                    match variant {
                        Variant::Continuous => quote_curve(&s, &p, &precompute(&p)?, *samples)?,
                        Variant::Discrete => discrete_curve_of_state(&s, &p)?.sample(s.x, *samples)?,
                    }
                }
                (None, None, None, Some(ba)) => {
                    let anchor = AnchorPoint::new(S::parse_decimal(ba)?, S::parse_decimal(ya)?)?;
                    anchor_curve(&anchor, &load_params::<S>(cli)?, *samples, *variant)?
                }
                _ => {
                    return Err(Failure::Usage(
                        "curve needs a state (--x --b --y), an anchor (--ba [--ya]) or --family".into(),
                    ))
                }
            };
            emit_curve(cli.format, &points)
        }
        Command::Precompute { out } => {
            let p = load_params::<S>(cli)?;
            let text = thresholds_to_json(&p, &precompute(&p)?);
            match out {
                Some(path) => fs::write(path, text + "\n").map_err(|e| Failure::io(path, e)),
                None => {
                    println!("{text}");
                    Ok(())
                }
            }
        }
        Command::Verify { thresholds } => verify::<S>(cli, thresholds),
        Command::Simulate {
            script,
            state,
            redeem_fee,
            mint_price,
            check,
        } => simulate(cli, script, state, redeem_fee, mint_price, *check),
        Command::Fuzz { suites, cases } => fuzz(cli, suites, *cases),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn load_params<S: Scalar>(cli: &Cli) -> Result<StaticParams<S>, Failure> {
    let path = cli
        .params
        .as_deref()
        .ok_or_else(|| Failure::Usage("no static parameters: pass --params or set PAMM_PARAMS".into()))?;
    Ok(parse_statics(&read(path)?)?)
}

fn parse_state<S: Scalar>(x: &str, b: &str, y: &str) -> Result<SystemState<S>, Failure> {
    Ok(SystemState::new(
        S::parse_decimal(x)?,
        S::parse_decimal(b)?,
        S::parse_decimal(y)?,
    )?)
}

fn state_of<S: Scalar>(a: &StateArgs) -> Result<SystemState<S>, Failure> {
    parse_state(&a.x, &a.b, &a.y)
}

fn thresholds_for<S: Scalar>(p: &StaticParams<S>, file: Option<&Path>) -> Result<PrecomputedThresholds<S>, Failure> {
    Ok(match file {
        Some(path) => load_thresholds(&read(path)?, p)?,
        None => precompute(p)?,
    })
}

fn quote<S: Scalar>(cli: &Cli, state: &StateArgs, amount: &str, variant: Variant, thresholds: Option<&Path>) -> Outcome {
    let p = load_params::<S>(cli)?;
    let s = state_of::<S>(state)?;
    let amount = S::parse_decimal(amount)?;
    let q = match variant {
        Variant::Continuous => redeem(&s, amount, &p, &thresholds_for(&p, thresholds)?)?,
        Variant::Discrete => discrete_redeem(&s, amount, &p)?,
    };
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => println!("{}", quote_to_json(&q)),
        Format::Csv => write_quote_csv(io::stdout().lock(), &q)?,
    }
    Ok(())
}

fn anchor_curve<S: Scalar>(
    anchor: &AnchorPoint<S>,
    p: &StaticParams<S>,
    samples: usize,
    variant: Variant,
) -> Result<Vec<CurvePoint<S>>, Failure> {
    Ok(match variant {
        Variant::Continuous => CurveSpec::new(*anchor, *p)?.sample(S::zero(), samples)?,
        Variant::Discrete => DiscreteSpec::new(*anchor, p).sample(S::zero(), samples)?,
    })
}

fn emit_curve<S: Scalar>(format: Option<Format>, points: &[CurvePoint<S>]) -> Outcome {
    match format.unwrap_or(Format::Csv) {
        Format::Csv => write_curve_csv(io::stdout().lock(), points)?,
        Format::Json => println!("{}", curve_to_json(points)),
    }
    Ok(())
}

/// One curve file per anchor ratio, plus a summary table on stdout.
fn curve_family<S: Scalar>(cli: &Cli, ratios: &[String], out_dir: &Path, samples: usize, variant: Variant) -> Outcome {
    let p = load_params::<S>(cli)?;
    fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir, e))?;
    let mut summary = csv::Writer::from_writer(io::stdout().lock());
    let csv_err = |e: csv::Error| Failure::Io(e.to_string());
    summary
        .write_record(["r_a", "shape", "x_u", "x_l", "r_l", "file"])
        .map_err(csv_err)?;
    for raw in ratios {
        let r_a = S::parse_decimal(raw.trim())?;
        let anchor = AnchorPoint::new(r_a, S::one())?;
        let points = anchor_curve(&anchor, &p, samples, variant)?;
        let (shape, x_u, x_l, r_l) = match variant {
            Variant::Continuous => {
                let spec = CurveSpec::new(anchor, p)?;
                match (spec.shape.case(), spec.params()) {
                    (Some(case), Some(d)) => (case.label().to_string(), d.x_u, d.x_l, d.r_l),
                    _ => {
                        let flat = spec.price_at(S::zero())?;
                        (triviality_label(spec.triviality()), S::one(), S::one(), flat)
                    }
                }
            }
            Variant::Discrete => {
                let spec = DiscreteSpec::new(anchor, &p);
                ("discrete".into(), spec.x_u, spec.x_u, spec.r_u)
            }
        };
        let path = out_dir.join(format!("curve_ra_{}.csv", r_a.to_decimal()));
        let file = fs::File::create(&path).map_err(|e| Failure::io(&path, e))?;
        write_curve_csv(io::BufWriter::new(file), &points)?;
        summary
            .write_record([
                r_a.to_decimal(),
                shape,
                x_u.to_decimal(),
                x_l.to_decimal(),
                r_l.to_decimal(),
                path.display().to_string(),
            ])
            .map_err(csv_err)?;
    }
    summary.flush()?;
    Ok(())
}

fn triviality_label(t: Triviality) -> String {
    match t {
        Triviality::OverReserved => "over-reserved",
        Triviality::UnderFloor => "under-floor",
        Triviality::Regular => "regular",
    }
    .into()
}

fn verify<S: Scalar>(cli: &Cli, path: &Path) -> Outcome {
    let text = read(path)?;
    let p = load_params::<Counted<S>>(cli)?;
    let (checked, ops) = measure(|| load_thresholds(&text, &p));
    checked?;
    println!(
        "{}",
        serde_json::json!({
            "verified": true,
            "params_hash": params_hash(&p),
            "ops": ops,
        })
    );
    Ok(())
}

fn simulate(
    cli: &Cli,
    script: &Path,
    state: &StateArgs,
    redeem_fee: &str,
    mint_price: &str,
    check: Option<Check>,
) -> Outcome {
    if cli.format == Some(Format::Json) {
        return Err(Failure::Usage("simulate emits a CSV trace".into()));
    }
    let p = load_params::<f64>(cli)?;
    let s = state_of::<f64>(state)?;
    let actions = parse_path_script(&read(script)?)?;
    let eps: f64 = f64::parse_decimal(redeem_fee)?;
    let phi: f64 = f64::parse_decimal(mint_price)?;
    let fees = FeeConfig::proportional(eps, phi)?;
    let trace = apply_path(&s, &actions, &fees, &p);
    let mut out = io::stdout().lock();
    write_trace_csv(&mut out, &trace)?;
    if let Some(e) = &trace.halted {
        out.flush()?;
        return Err(e.clone().into());
    }
    let Some(check) = check else {
        return Ok(());
    };
    let ok = match check {
        Check::Independence => {
            if actions.iter().any(|a| a.kind == TradeKind::Mint) {
                return Err(Failure::Usage("the independence check takes a pure redemption script".into()));
            }
            if eps == 0.0 {
                let chunks: Vec<f64> = actions.iter().map(|a| a.amount).collect();
                let r = check_split(&s, &chunks, &p)?;
                writeln!(out, "# independence single_payout={} split_payout={}", r.single_payout, r.split_payout)?;
                writeln!(
                    out,
                    "# payout_deviation={:e} state_deviation={:e} tolerance={:e}",
                    r.payout_deviation, r.state_deviation, r.tolerance
                )?;
                r.passed()
            } else {
                let r = check_path_deficiency(&s, &actions, &fees, &p)?;
                let single = r.single_shot.unwrap_or(f64::NAN);
                let dev = r.fee_path_deviation.unwrap_or(f64::NAN);
                writeln!(out, "# independence single_payout={single} split_payout={}", trace.total_payout())?;
                writeln!(out, "# payout_deviation={dev:e}")?;
                r.passed()
            }
        }
        Check::Deficiency => {
            let r = check_path_deficiency(&s, &actions, &fees, &p)?;
            writeln!(
                out,
                "# deficiency max_anchor_drop={:e} final_ratio={} reference_ratio={}",
                r.max_anchor_drop, r.final_ratio, r.reference_ratio
            )?;
            let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| v.to_string());
            writeln!(
                out,
                "# trader_net={} single_shot={} fee_path_deviation={}",
                r.trader_net,
                opt(r.single_shot),
                opt(r.fee_path_deviation)
            )?;
            for v in &r.violations {
                writeln!(out, "# violation: {v}")?;
            }
            r.passed()
        }
    };
    out.flush()?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{check:?} check failed").to_lowercase()))
    }
}

fn fuzz(cli: &Cli, names: &[String], cases: Option<usize>) -> Outcome {
    let selected: Vec<&str> = if names.is_empty() {
        SUITES.iter().map(|(n, _)| *n).collect()
    } else {
        names.iter().map(String::as_str).collect()
    };
    if let Some(bad) = selected.iter().find(|n| !SUITES.iter().any(|(s, _)| s == *n)) {
        let known: Vec<&str> = SUITES.iter().map(|(n, _)| *n).collect();
        return Err(Failure::Usage(format!("unknown suite {bad:?}; known: {}", known.join(", "))));
    }
    let seed = cli.seed;
    let results: Vec<Result<SuiteOutcome, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|name| scope.spawn(move || run_suite(name, seed, cases)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .map_err(|_| Failure::Violation("suite panicked".into()))?
                    .map_err(Failure::from)
            })
            .collect()
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut out = io::stdout().lock();
    match cli.format {
        Some(Format::Json) => {
            for o in &outcomes {
                writeln!(out, "{}", serde_json::to_string(o).expect("plain struct serializes"))?;
            }
        }
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(&mut out);
            let csv_err = |e: csv::Error| Failure::Io(e.to_string());
            w.write_record(["suite", "passed", "cases", "skipped", "failures", "worst", "first_failure"])
                .map_err(csv_err)?;
            for o in &outcomes {
                w.write_record([
                    o.name.to_string(),
                    o.passed().to_string(),
                    o.cases.to_string(),
                    o.skipped.to_string(),
                    o.failures.to_string(),
                    format!("{:e}", o.worst),
                    o.first_failure.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
        None => {
            for o in &outcomes {
                let verdict = if o.passed() { "PASS" } else { "FAIL" };
                writeln!(
                    out,
                    "{verdict} {:<13} cases={} skipped={} failures={} worst={:e}",
                    o.name, o.cases, o.skipped, o.failures, o.worst
                )?;
                if let Some(f) = &o.first_failure {
                    writeln!(out, "     first failure: {f}")?;
                }
            }
        }
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("suites failed: {}", failed.join(", "))))
    }
}
