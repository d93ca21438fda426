//! Batch command-line front end: fragment checks, translation, model
//! checking, sampling, construction, decision, and finite search over the
//! `.fol` / `.sst` / `.prof` / `.fin` formats.
//!
//! Exit codes: 0 = valid / sat / member / model found, 1 = the negative
//! verdict, 2 = unknown, 3 = input or usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use symstruct::construct::{atom_universe, construct, extract_profile, parse_profile, print_profile};
use symstruct::decide::{decide, finite_model_search, Budgets, Verdict};
use symstruct::finite::FiniteStructure;
use symstruct::fol::{parse_file, print_formula, print_signature, FolFile, Formula};
use symstruct::fragments::{
    build_axiom, check_osc, check_osc_star, check_sf, translate_to_osc_star, Flavor,
    FragmentReport,
};
use symstruct::symbolic::{explicate_sample, model_check, parse_sst, print_sst};

#[derive(Parser)]
#[command(name = "symstruct", about = "symbolic-structure satisfiability toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FragmentName {
    Sf,
    Osc,
    OscStar,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorName {
    Tot,
    TotProsucc,
    TotRegpred,
    Pref,
    PrefProsucc,
    PrefRegpred,
}

impl FlavorName {
    fn flavor(self) -> Flavor {
        match self {
            FlavorName::Tot => Flavor::Tot,
            FlavorName::TotProsucc => Flavor::TotProsucc,
            FlavorName::TotRegpred => Flavor::TotRegpred,
            FlavorName::Pref => Flavor::Pref,
            FlavorName::PrefProsucc => Flavor::PrefProsucc,
            FlavorName::PrefRegpred => Flavor::PrefRegpred,
        }
    }
}

#[derive(Args)]
struct OutputArg {
    /// Write the result here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check membership of a sentence in a fragment
    CheckFragment {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "osc-star")]
        fragment: FragmentName,
    },
    /// Translate an ordered self-cycle sentence to single-sorted star form
    Translate {
        file: PathBuf,
        /// Case budget for the translation
        #[arg(long, default_value_t = 4096)]
        budget: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Check well-definedness of a symbolic structure
    Wf { file: PathBuf },
    /// Model-check a sentence against a symbolic structure
    Mc { structure: PathBuf, sentence: PathBuf },
    /// Explicate a bounded sample of a symbolic structure
    Explicate {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        bound: usize,
    },
    /// Extract the atom profile of a finite structure
    Profile {
        /// Finite structure in `.fin` format
        structure: PathBuf,
        /// Signature declarations in `.fol` format
        signature: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Build a symbolic structure from an atom profile
    Construct {
        /// Signature declarations in `.fol` format
        signature: PathBuf,
        /// Atom profile in `.prof` format
        profile: PathBuf,
        #[arg(long, value_enum)]
        flavor: FlavorName,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Decide satisfiability under an order flavor
    Decide {
        file: PathBuf,
        #[arg(long, value_enum)]
        flavor: FlavorName,
        #[arg(long, default_value_t = 2)]
        max_classes: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Search for a finite model up to a domain-size bound
    FiniteSearch {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        bound: usize,
        /// Conjoin the flavor's order axiom before searching
        #[arg(long, value_enum)]
        flavor: Option<FlavorName>,
        #[command(flatten)]
        out: OutputArg,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_fol(path: &Path) -> Result<FolFile> {
    Ok(parse_file(&read(path)?)?)
}

fn emit(out: &OutputArg, text: &str) -> Result<()> {
    match &out.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn report_verdict(report: &FragmentReport) -> u8 {
    if report.member {
        println!("member");
        0
    } else {
        for f in &report.findings {
            println!("not a member: {f}");
        }
        1
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::CheckFragment { file, fragment } => {
            let f = read_fol(&file)?;
            let phi = f.formula();
            let report = match fragment {
                FragmentName::Sf => check_sf(&phi, &f.signature),
                FragmentName::Osc => check_osc(&phi, &f.signature),
                FragmentName::OscStar => check_osc_star(&phi, &f.signature),
            };
            Ok(report_verdict(&report))
        }
        Command::Translate { file, budget, out } => {
            let f = read_fol(&file)?;
            let t = translate_to_osc_star(&f.formula(), &f.signature, budget)?;
            let mut text = print_signature(&t.signature);
            text.push_str(&print_formula(&t.formula));
            text.push('\n');
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Wf { file } => {
            let s = parse_sst(&read(&file)?, file.parent())?;
            let problems = s.check_well_defined()?;
            if problems.is_empty() {
                println!("well-defined");
                Ok(0)
            } else {
                for p in &problems {
                    println!("ill-defined: {p}");
                }
                Ok(1)
            }
        }
        Command::Mc { structure, sentence } => {
            let s = parse_sst(&read(&structure)?, structure.parent())?;
            let f = read_fol(&sentence)?;
            if model_check(&s, &f.formula())? {
                println!("valid");
                Ok(0)
            } else {
                println!("invalid");
                Ok(1)
            }
        }
        Command::Explicate { file, bound } => {
            let s = parse_sst(&read(&file)?, file.parent())?;
            let sample = explicate_sample(&s, bound)?;
            for (i, (node, e)) in sample.elements.iter().enumerate() {
                println!("{i}: {node} {e}");
            }
            Ok(0)
        }
        Command::Profile { structure, signature, out } => {
            let sig = read_fol(&signature)?.signature;
            let m = FiniteStructure::parse(&read(&structure)?, &sig)?;
            let u = atom_universe(&sig)?;
            let p = extract_profile(&m, &u)?;
            emit(&out, &print_profile(&p))?;
            Ok(0)
        }
        Command::Construct { signature, profile, flavor, out } => {
            let sig = read_fol(&signature)?.signature;
            let u = atom_universe(&sig)?;
            let p = parse_profile(&read(&profile)?, &u)?;
            let s = construct(&p, flavor.flavor(), &u)?;
            emit(&out, &print_sst(&s))?;
            Ok(0)
        }
        Command::Decide { file, flavor, max_classes, depth, out } => {
            let f = read_fol(&file)?;
            let budgets = Budgets { max_classes, max_depth: depth, ..Budgets::default() };
            let outcome = decide(&f.formula(), &f.signature, flavor.flavor(), budgets)?;
            println!("{}", outcome.verdict.name());
            match outcome.verdict {
                Verdict::Sat => {
                    if let Some(w) = outcome.witness {
                        emit(&out, &print_sst(&w))?;
                    }
                    Ok(0)
                }
                Verdict::Unsat => Ok(1),
                Verdict::Unknown => Ok(2),
            }
        }
        Command::FiniteSearch { file, bound, flavor, out } => {
            let f = read_fol(&file)?;
            let phi = match flavor {
                Some(fl) => Formula::and(vec![
                    build_axiom(fl.flavor(), &f.signature)?,
                    f.formula(),
                ]),
                None => f.formula(),
            };
            match finite_model_search(&phi, &f.signature, bound)? {
                Some(m) => {
                    println!("model found");
                    emit(&out, &m.to_text())?;
                    Ok(0)
                }
                None => {
                    println!("no model up to size {bound}");
                    Ok(1)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
