use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ivauction::clock::{consistent_strategy, ConsistentStrategy, Strategy};
use ivauction::generators::{gen_chain_family, gen_random, gen_weighted_family, FamilyInstance, RandomFamily};
use ivauction::model::{parse_instance, serialize_instance, value};
use ivauction::money::{format_money, parse_money};
use ivauction::verification::{
    check_allocation_table, check_clock_equivalence, check_expost_ic, check_oxp,
    check_transcript_invariants, check_universal_icir, expectation_table, expected_outcome,
    parse_designated, ratio_over, reports_to_csv, verify_lb_certificate, write_designated,
    Budgets, Check, EvalMode, Evaluation, IcMode, Objective, Report, Witness,
};
use ivauction::{Auction, CoinRealization, Error, Instance, Mechanism, MechanismKind, Pricing, Result, SignalProfile};

#[derive(Parser)]
#[command(name = "ivauction", version, about = "Clock auctions for interdependent values, with exact verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one auction for one coin realization.
    Run(RunArgs),
    /// Exact (or sampled) expected welfare, revenue and ratios.
    Evaluate(EvaluateArgs),
    /// Run verification checks; exit 1 on any violation.
    Verify(VerifyArgs),
    /// Write a generated instance file.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct MechArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    mechanism: MechanismKind,
    #[arg(long, default_value = "welfare")]
    pricing: Pricing,
    #[command(flatten)]
    budgets: BudgetArgs,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = Budgets::default().max_binary_n)]
    max_binary_n: usize,
    #[arg(long, default_value_t = Budgets::default().max_kary_n)]
    max_kary_n: usize,
    #[arg(long, default_value_t = Budgets::default().max_kary_k)]
    max_kary_k: u32,
    #[arg(long, default_value_t = Budgets::default().max_profiles)]
    max_profiles: u64,
    #[arg(long, default_value_t = Budgets::default().max_runs)]
    max_runs: u64,
    #[arg(long, default_value_t = Budgets::default().oxp_max_n)]
    oxp_max_n: usize,
    #[arg(long, default_value_t = Budgets::default().oxp_max_k)]
    oxp_max_k: u32,
}

impl BudgetArgs {
    fn budgets(&self) -> Budgets {
        Budgets {
            max_binary_n: self.max_binary_n,
            max_kary_n: self.max_kary_n,
            max_kary_k: self.max_kary_k,
            max_profiles: self.max_profiles,
            max_runs: self.max_runs,
            oxp_max_n: self.oxp_max_n,
            oxp_max_k: self.oxp_max_k,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    mech: MechArgs,
    #[arg(long)]
    signals: SignalProfile,
    /// Expanded into a coin realization; ignored when --coin is given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit realization, e.g. "order=1,0 m=0 g=0 u=0".
    #[arg(long)]
    coin: Option<CoinRealization>,
    /// Append the discovery transcript.
    #[arg(long)]
    trace: bool,
    /// Also run the clock auction with consistent bidding.
    #[arg(long)]
    clock: bool,
    /// Print the general mechanism's allocation table.
    #[arg(long)]
    dump_table: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    mech: MechArgs,
    /// One truthful profile; every profile when omitted.
    #[arg(long)]
    signals: Option<SignalProfile>,
    /// Monte Carlo estimate from this many sampled coins.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum CheckArg {
    Icir,
    Oxp,
    Feasibility,
    Rstar,
    Equivalence,
    Certificate,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    mech: MechArgs,
    #[arg(long, value_enum, default_value = "all")]
    check: CheckArg,
    /// Defaults to universal for welfare pricing, expectation for revenue.
    #[arg(long)]
    mode: Option<IcMode>,
    /// Designated pairs file for --check certificate.
    #[arg(long)]
    designated: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FamilyArg {
    #[value(name = "thm11", alias = "chain")]
    Chain,
    #[value(name = "thm6", alias = "weighted")]
    Weighted,
    Random,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Bidders, for the random family.
    #[arg(long)]
    n: Option<usize>,
    /// Value scale of the chain family.
    #[arg(long = "M", default_value = "100")]
    m: String,
    /// Value scale of the weighted family.
    #[arg(long = "H", default_value = "100")]
    h: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Valuation model of the random family.
    #[arg(long, default_value = "shared")]
    model: RandomFamily,
    #[arg(long)]
    out: PathBuf,
}

fn load(args: &MechArgs) -> Result<(Auction, Budgets)> {
    let text = fs::read_to_string(&args.instance)?;
    let inst = parse_instance(&text)?;
    let inst = match inst.name() {
        Some(_) => inst,
        None => {
            let stem = args.instance.file_stem().map(|s| s.to_string_lossy().into_owned());
            inst.with_name(stem.unwrap_or_else(|| "instance".into()))
        }
    };
    let budgets = args.budgets.budgets();
    let auction = Auction::with_budget(inst, args.mechanism, args.pricing, budgets.max_profiles)?;
    Ok((auction, budgets))
}

fn cmd_run(args: &RunArgs) -> Result<u8> {
    let (a, _) = load(&args.mech)?;
    let inst = a.instance();
    let axes = a.coin_axes();
    let coin = args.coin.clone().unwrap_or_else(|| axes.from_seed(args.seed));
    if !axes.contains(&coin) {
        return Err(Error::InvalidInput(format!("coin [{coin}] is outside this mechanism's space")));
    }
    let (outcome, transcript) = a.run_traced(&args.signals, &coin)?;
    let welfare = match outcome.winner {
        Some(w) => value(w, &args.signals, inst)?,
        None => Default::default(),
    };
    let mut out = format!("coin {coin}\n{outcome} welfare={}\n", format_money(&welfare));
    if args.trace {
        match transcript {
            Some(t) => out.push_str(&t.to_text()),
            None => out.push_str("# no discovery transcript for this mechanism\n"),
        }
    }
    if args.clock {
        let strategies: Vec<ConsistentStrategy> =
            args.signals.signals().iter().map(|&v| consistent_strategy(v)).collect();
        let refs: Vec<&dyn Strategy> = strategies.iter().map(|s| s as &dyn Strategy).collect();
        let (_, ct) = a.run_clock(&refs, &coin)?;
        out.push_str(&ct.to_text());
    }
    if args.dump_table {
        let table = a
            .table()
            .ok_or_else(|| Error::InvalidInput("--dump-table needs the general mechanism".into()))?;
        out.push_str(&table.dump());
    }
    print!("{out}");
    Ok(0)
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<u8> {
    let (a, budgets) = load(&args.mech)?;
    let inst = a.instance();
    let head = [inst.label(), a.label(), a.pricing().to_string()];
    let profiles: Vec<SignalProfile> = match &args.signals {
        Some(s) => vec![s.clone()],
        None => budgets.profiles(inst)?,
    };
    if let Some(samples) = args.samples {
        let mode = EvalMode::MonteCarlo {
            samples,
            seed: args.seed,
        };
        let mut rows = Vec::new();
        for s in &profiles {
            let Evaluation::Sampled { optimum, estimate: e } = expected_outcome(&a, s, mode, &budgets)? else {
                unreachable!("sampling mode returns estimates")
            };
            let mut row = head.to_vec();
            row.extend([
                s.to_string(),
                format_money(&optimum),
                e.samples.to_string(),
                format!("{:.6}", e.welfare),
                format!("{:.6}", e.welfare_se),
                format!("{:.6}", e.revenue),
                format!("{:.6}", e.revenue_se),
                format!("{:.6}", e.p_optimal),
                format!("{:.6}", e.p_optimal_se),
            ]);
            rows.push(row);
        }
        let header = [
            "instance", "mechanism", "pricing", "profile", "opt", "samples", "e_welfare", "se_welfare",
            "e_revenue", "se_revenue", "p_optimal", "se_p_optimal",
        ];
        print!("{}", csv_text(&header, &rows));
        return Ok(0);
    }
    let table = match &args.signals {
        Some(s) => match expected_outcome(&a, s, EvalMode::Exact, &budgets)? {
            Evaluation::Exact(e) => vec![(s.clone(), e)],
            Evaluation::Sampled { .. } => unreachable!("exact mode"),
        },
        None => expectation_table(&a, &budgets)?,
    };
    let ratio = |opt: &ivauction::Money, e: &ivauction::Money| {
        if opt == &Default::default() {
            "-".to_string()
        } else if e == &Default::default() {
            "inf".to_string()
        } else {
            format_money(&(opt / e))
        }
    };
    let mut rows: Vec<Vec<String>> = table
        .iter()
        .map(|(s, e)| {
            let mut row = head.to_vec();
            row.extend([
                s.to_string(),
                format_money(&e.optimum),
                format_money(&e.welfare),
                format_money(&e.revenue),
                format_money(&e.p_optimal),
                ratio(&e.optimum, &e.welfare),
                ratio(&e.optimum, &e.revenue),
            ]);
            row
        })
        .collect();
    let worst = |o: Objective| ratio_over(&table, o).map(|r| r.ratio_text()).unwrap_or_else(|_| "-".into());
    let mut row = head.to_vec();
    row.extend(["worst", "-", "-", "-", "-"].map(String::from));
    row.extend([worst(Objective::Welfare), worst(Objective::Revenue)]);
    rows.push(row);
    let header = [
        "instance", "mechanism", "pricing", "profile", "opt", "e_welfare", "e_revenue", "p_optimal",
        "welfare_ratio", "revenue_ratio",
    ];
    print!("{}", csv_text(&header, &rows));
    Ok(0)
}

fn certificate_report(a: &Auction, path: &Path) -> Result<Report> {
    let pairs = parse_designated(&fs::read_to_string(path)?)?;
    let inst = a.instance();
    let (passed, quantity, witness) = match verify_lb_certificate(inst, &pairs) {
        Ok(c) => (true, format!("bound={}", format_money(&c.bound)), None),
        Err(Error::CertificateInvalid(detail)) => (
            false,
            "-".into(),
            Some(Witness {
                profile: SignalProfile::new(Vec::new()),
                bidder: None,
                deviation: None,
                coin: None,
                detail,
            }),
        ),
        Err(e) => return Err(e),
    };
    Ok(Report {
        check: Check::Certificate,
        instance: inst.label(),
        mechanism: "-".into(),
        pricing: None,
        passed,
        quantity,
        witness,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let (a, budgets) = load(&args.mech)?;
    let mode = args.mode.unwrap_or(match a.pricing() {
        Pricing::Welfare => IcMode::Universal,
        Pricing::Revenue => IcMode::Expectation,
    });
    let icir = |a: &Auction| match mode {
        IcMode::Universal => check_universal_icir(a, &budgets),
        IcMode::Expectation => check_expost_ic(a, &budgets),
    };
    let feasibility = |a: &Auction| {
        let table = a
            .table()
            .ok_or_else(|| Error::InvalidInput(format!("{} has no allocation table", a.kind())))?;
        check_allocation_table(table, a.instance())
    };
    let reports: Vec<Report> = match args.check {
        CheckArg::Icir => vec![icir(&a)?],
        CheckArg::Oxp => vec![check_oxp(&a, &budgets)?],
        CheckArg::Feasibility => vec![feasibility(&a)?],
        CheckArg::Rstar => vec![check_transcript_invariants(&a, &budgets)?],
        CheckArg::Equivalence => vec![check_clock_equivalence(&a, &budgets)?],
        CheckArg::Certificate => {
            let path = args
                .designated
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("--check certificate needs --designated".into()))?;
            vec![certificate_report(&a, path)?]
        }
        CheckArg::All => {
            let mut r = vec![icir(&a)?];
            if a.table().is_some() {
                r.push(feasibility(&a)?);
            } else {
                r.push(check_transcript_invariants(&a, &budgets)?);
            }
            if a.has_clock() {
                r.push(check_clock_equivalence(&a, &budgets)?);
                if budgets.check_oxp_size(a.instance()).is_ok() {
                    r.push(check_oxp(&a, &budgets)?);
                }
            }
            if let Some(path) = &args.designated {
                r.push(certificate_report(&a, path)?);
            }
            r
        }
    };
    print!("{}", reports_to_csv(&reports));
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("designated")
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    let family: Option<FamilyInstance> = match args.family {
        FamilyArg::Chain => Some(gen_chain_family(args.l, args.k, parse_money(&args.m)?)?),
        FamilyArg::Weighted => Some(gen_weighted_family(args.l, args.k, parse_money(&args.h)?)?),
        FamilyArg::Random => None,
    };
    let inst: Instance = match &family {
        Some(f) => f.instance.clone(),
        None => {
            let n = args
                .n
                .ok_or_else(|| Error::InvalidInput("--family random needs --n".into()))?;
            gen_random(n, args.k, args.l, args.model, args.seed)?
        }
    };
    fs::write(&args.out, serialize_instance(&inst))?;
    let mut out = format!("bidders={}\ninstance={}\n", inst.n(), args.out.display());
    if let Some(f) = &family {
        let side = sidecar_path(&args.out);
        fs::write(&side, write_designated(&f.designated))?;
        out.push_str(&format!("designated={}\n", side.display()));
    }
    print!("{out}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
