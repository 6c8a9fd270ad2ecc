//! Command line front end for the mod-2 cohomology toolkit. Parses classes
//! over F2(t1..tK)(x), runs residue, transfer, reciprocity, and vanishing
//! commands through a seeded session, and prints either a plain summary or
//! the full JSON report.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use kmc_core::session::{Command, Session};

#[derive(Parser)]
#[command(
    name = "kmc",
    about = "Residues, transfers, and vanishing decisions for mod-2 cohomology classes over F2(t1..tK)(x)",
    version
)]
struct Cli {
    /// Number of ground variables t1..tK.
    #[arg(long, global = true, default_value_t = 1)]
    tower: usize,
    /// Seed for the self-test generators, echoed in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Work budget for zero decisions and place certification.
    #[arg(long, global = true)]
    bound: Option<usize>,
    /// Truncation depth for Teichmuller computations.
    #[arg(long, global = true)]
    teich_depth: Option<usize>,
    /// Print the full JSON report instead of the plain summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Residue of a class at a place, as a local normal form.
    Residue {
        /// Class text; read from stdin when omitted.
        class: Option<String>,
        /// Monic irreducible place polynomial, or "inf".
        #[arg(long)]
        place: String,
    },
    /// Residue plus the materialized representative and its round trip.
    Normalform {
        /// Class text; read from stdin when omitted.
        class: Option<String>,
        /// Monic irreducible place polynomial, or "inf".
        #[arg(long)]
        place: String,
    },
    /// Transferred residue of a class at a place, over the ground field.
    Transfer {
        /// Class text; read from stdin when omitted.
        class: Option<String>,
        /// Monic irreducible place polynomial, or "inf".
        #[arg(long)]
        place: String,
    },
    /// Sum of transferred residues over the support places.
    Reciprocity {
        /// Class text; read from stdin when omitted.
        class: Option<String>,
    },
    /// Decide whether a class vanishes; prints a witness when it does.
    Iszero {
        /// Class text; read from stdin when omitted.
        class: Option<String>,
    },
    /// Division remainder sequence gamma_0..gamma_count of a finite place.
    Gamma {
        /// Monic irreducible place polynomial.
        #[arg(long)]
        place: String,
        /// Largest index to report.
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// Classify a monic polynomial: degree, separability, irreducibility.
    Classify {
        /// Polynomial in t1..tK and x.
        #[arg(long)]
        poly: String,
    },
    /// Run the seeded self-test suites.
    Selftest {
        /// Suite name: reciprocity, roundtrip, witt, gamma, or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

fn read_class(arg: Option<String>) -> String {
    match arg {
        Some(s) => s,
        None => {
            let mut buf = String::new();
            if std::io::stdin().read_to_string(&mut buf).is_err() {
                return String::new();
            }
            buf.trim().to_string()
        }
    }
}

fn to_command(cmd: Cmd) -> Command {
    match cmd {
        Cmd::Residue { class, place } => Command::Residue {
            class: read_class(class),
            place,
        },
        Cmd::Normalform { class, place } => Command::NormalForm {
            class: read_class(class),
            place,
        },
        Cmd::Transfer { class, place } => Command::Transfer {
            class: read_class(class),
            place,
        },
        Cmd::Reciprocity { class } => Command::Reciprocity {
            class: read_class(class),
        },
        Cmd::Iszero { class } => Command::IsZero {
            class: read_class(class),
        },
        Cmd::Gamma { place, count } => Command::Gamma { place, count },
        Cmd::Classify { poly } => Command::Classify { poly },
        Cmd::Selftest { suite } => Command::SelfTest { suite },
    }
}

fn str_of(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}

fn push_kv(out: &mut String, key: &str, val: String) {
    out.push_str(key);
    out.push_str(": ");
    out.push_str(&val);
    out.push('\n');
}

fn render_slots(v: &Value) -> String {
    let parts: Vec<String> = v
        .as_array()
        .map(|a| a.iter().map(str_of).collect())
        .unwrap_or_default();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("^")
    }
}

fn render_w1(out: &mut String, w1: &Value) {
    push_kv(
        out,
        "normal form at",
        format!("{} (degree {})", str_of(&w1["place"]), w1["degree"]),
    );
    for (table, label) in [(&w1["u"], "u"), (&w1["v"], "v")] {
        for entry in table.as_array().into_iter().flatten() {
            out.push_str(&format!(
                "  {}[r={}, slots={}, pattern={}] = {}\n",
                label,
                entry["r"],
                render_slots(&entry["slots"]),
                render_slots(&entry["pattern"]),
                str_of(&entry["value"]),
            ));
        }
    }
    for entry in w1["phi"].as_array().into_iter().flatten() {
        out.push_str(&format!(
            "  phi[slots={}] = {}\n",
            render_slots(&entry["slots"]),
            str_of(&entry["value"]),
        ));
    }
    if w1["zero"] == Value::Bool(true) {
        out.push_str("  (structurally zero)\n");
    }
}

fn render_decision(out: &mut String, d: &Value) {
    push_kv(out, "reason", str_of(&d["reason"]));
    if let Some(w) = d.get("witness").filter(|w| !w.is_null()) {
        push_kv(out, "witness exact part", str_of(&w["exact_part"]));
        push_kv(
            out,
            "witness artin-schreier part",
            str_of(&w["artin_schreier_part"]),
        );
    }
}

fn render_human(report: &Value) -> String {
    let mut out = String::new();
    if let Some(err) = report.get("error") {
        let mut line = format!("error[{}]: {}", str_of(&err["kind"]), str_of(&err["message"]));
        if let Some(pos) = err.get("position") {
            line.push_str(&format!(" (at position {})", pos));
        }
        line.push('\n');
        return line;
    }
    for key in ["class", "place", "poly"] {
        if let Some(v) = report.get(key) {
            push_kv(&mut out, key, str_of(v));
        }
    }
    if let Some(v) = report.get("verdict") {
        push_kv(&mut out, "verdict", str_of(v));
    }
    if let Some(w1) = report.get("w1") {
        render_w1(&mut out, w1);
    }
    for key in ["materialized", "roundtrip", "transfer", "total"] {
        if let Some(v) = report.get(key) {
            push_kv(&mut out, key, str_of(v));
        }
    }
    if let Some(terms) = report.get("terms").and_then(Value::as_array) {
        out.push_str("terms:\n");
        for t in terms {
            out.push_str(&format!(
                "  at {}: {}\n",
                str_of(&t["place"]),
                str_of(&t["transfer"])
            ));
        }
    }
    if let Some(d) = report.get("decision") {
        render_decision(&mut out, d);
    }
    if let Some(g) = report.get("gammas").and_then(Value::as_array) {
        let parts: Vec<String> = g.iter().map(str_of).collect();
        push_kv(&mut out, "gammas", parts.join(", "));
    }
    for key in ["degree", "separable", "insep_index", "certificate"] {
        if let Some(v) = report.get(key) {
            push_kv(&mut out, key, str_of(v));
        }
    }
    if let Some(suites) = report.get("suites").and_then(Value::as_array) {
        for s in suites {
            out.push_str(&format!(
                "suite {}: {}/{} passed\n",
                str_of(&s["suite"]),
                s["passed"],
                s["cases"]
            ));
            for f in s["failures"].as_array().into_iter().flatten() {
                out.push_str(&format!("  failure: {}\n", str_of(f)));
            }
        }
    }
    if out.is_empty() {
        out = report.to_string();
        out.push('\n');
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut session = Session {
        ground_vars: cli.tower,
        seed: cli.seed,
        ..Session::default()
    };
    if let Some(b) = cli.bound {
        session.budget = b;
    }
    if let Some(d) = cli.teich_depth {
        session.teich_depth = d;
    }
    let cmd = to_command(cli.command);
    let (report, code) = session.run(&cmd);
    if cli.json {
        match serde_json::to_string_pretty(&report) {
            Ok(s) => println!("{}", s),
            Err(_) => println!("{}", report),
        }
    } else {
        print!("{}", render_human(&report));
    }
    ExitCode::from(code.clamp(0, u8::MAX as i32) as u8)
}
