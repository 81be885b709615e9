use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use basenp_core::eval::{freq_recall, render_report_table, score, FreqTable, ReportFormat};
use basenp_core::ruledsl::{apply_rule_list, parse_rule_list};
use basenp_core::service::SessionManager;
use basenp_core::tbl::{
    apply_tbl, learn, parse_tbl_rules, parse_templates, write_tbl_rules, BaselineMap, LearnOutcome, Template,
};
use basenp_core::{Corpus, CorpusFormat, LearnerConfig};
use serde::Serialize;

use crate::{Cli, CliError, Command, Input, Output};

pub(crate) const BASELINE_FILE: &str = "baseline.tsv";
pub(crate) const RULES_FILE: &str = "rules.tbl";

fn data_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| data_err(Path::new("<stdin>"), e))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| data_err(path, e))
    }
}

fn load(path: &Path, format: Option<CorpusFormat>) -> Result<(Corpus, CorpusFormat), CliError> {
    let format = format.unwrap_or_else(|| CorpusFormat::from_path(path));
    let label = path.display().to_string();
    let corpus = format.parse(&read_text(path)?, &label).map_err(|e| data_err(path, e))?;
    Ok((corpus, format))
}

fn load_input(input: &Input) -> Result<(Corpus, CorpusFormat), CliError> {
    load(&input.input, input.from)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| data_err(path, e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| data_err(Path::new("<stdout>"), e))
        }
    }
}

fn write_corpus(output: &Output, input_format: CorpusFormat, corpus: &Corpus) -> Result<(), CliError> {
    let format = output.to.unwrap_or(input_format);
    let text = format
        .write(corpus)
        .map_err(|e| CliError::Data(format!("cannot write {format}: {e}")))?;
    emit(output.output.as_deref(), &text)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct LearnedRuleRow {
    rule: String,
    gain: u32,
    errors_before: usize,
    errors_after: usize,
}

#[derive(Serialize)]
struct LearnSummary {
    baseline_errors: usize,
    final_errors: usize,
    rules: Vec<LearnedRuleRow>,
}

fn learn_summary(outcome: &LearnOutcome) -> LearnSummary {
    LearnSummary {
        baseline_errors: outcome.baseline_errors,
        final_errors: outcome.rules.last().map_or(outcome.baseline_errors, |r| r.errors_after),
        rules: outcome
            .rules
            .iter()
            .map(|r| LearnedRuleRow {
                rule: r.rule.to_string(),
                gain: r.gain,
                errors_before: r.errors_before,
                errors_after: r.errors_after,
            })
            .collect(),
    }
}

fn learn_table(summary: &LearnSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "rules learned:   {}", summary.rules.len());
    let _ = writeln!(out, "baseline errors: {}", summary.baseline_errors);
    let _ = writeln!(out, "final errors:    {}", summary.final_errors);
    if !summary.rules.is_empty() {
        let _ = writeln!(out, "\n{:>4}  {:>5}  rule", "#", "gain");
        for (i, r) in summary.rules.iter().enumerate() {
            let _ = writeln!(out, "{:>4}  {:>5}  {}", i + 1, r.gain, r.rule);
        }
    }
    out
}

fn freq_table(table: &FreqTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>11}  {:>8}  {:>8}  {:>7}",
        "train_count", "test_nps", "recalled", "recall"
    );
    for b in &table.buckets {
        let _ = writeln!(
            out,
            "{:>11}  {:>8}  {:>8}  {:>6.2}%",
            b.train_count, b.test_nps, b.recalled, b.recall
        );
    }
    let overall = table.overall();
    let _ = writeln!(out);
    for (name, agg) in [
        (format!("< {}", table.threshold), table.below),
        (format!(">= {}", table.threshold), table.at_or_above),
        ("all".to_string(), overall),
    ] {
        let _ = writeln!(
            out,
            "{:>11}  {:>8}  {:>8}  {:>6.2}%",
            name, agg.test_nps, agg.recalled, agg.recall
        );
    }
    out
}

fn load_templates(path: &Path) -> Result<Vec<Template>, CliError> {
    parse_templates(&read_text(path)?).map_err(|e| data_err(path, e))
}

pub(crate) fn execute(cli: Cli) -> Result<(), CliError> {
    let format = cli.format;
    match cli.command {
        Command::Convert { input, output } => {
            let (corpus, fmt) = load_input(&input)?;
            write_corpus(&output, fmt, &corpus)
        }
        Command::Strip { input, output } => {
            let (corpus, fmt) = load_input(&input)?;
            write_corpus(&output, fmt, &corpus.stripped())
        }
        Command::Apply { rules, input, output } => {
            let list = parse_rule_list(&read_text(&rules)?).map_err(|e| data_err(&rules, e))?;
            let (corpus, fmt) = load_input(&input)?;
            write_corpus(&output, fmt, &apply_rule_list(&list, &corpus))
        }
        Command::Learn {
            input,
            out,
            min_gain,
            max_rules,
            templates,
        } => {
            let (train, _) = load_input(&input)?;
            let cfg = LearnerConfig {
                min_gain,
                max_rules,
                templates: match &templates {
                    Some(path) => load_templates(path)?,
                    None => Template::default_set(),
                },
            };
            let outcome = learn(&train, &cfg).map_err(|e| data_err(&input.input, e))?;
            fs::create_dir_all(&out).map_err(|e| data_err(&out, e))?;
            let baseline = out.join(BASELINE_FILE);
            fs::write(&baseline, outcome.baseline.to_text()).map_err(|e| data_err(&baseline, e))?;
            let rules = out.join(RULES_FILE);
            fs::write(&rules, write_tbl_rules(&outcome.rules)).map_err(|e| data_err(&rules, e))?;
            let summary = learn_summary(&outcome);
            emit(
                None,
                &match format {
                    ReportFormat::Table => learn_table(&summary),
                    ReportFormat::Json => json(&summary),
                },
            )
        }
        Command::Tag { model, input, output } => {
            let baseline_path = model.join(BASELINE_FILE);
            let rules_path = model.join(RULES_FILE);
            let baseline =
                BaselineMap::from_text(&read_text(&baseline_path)?).map_err(|e| data_err(&baseline_path, e))?;
            let rules = parse_tbl_rules(&read_text(&rules_path)?).map_err(|e| data_err(&rules_path, e))?;
            let (corpus, fmt) = load_input(&input)?;
            write_corpus(&output, fmt, &apply_tbl(&rules, &baseline, &corpus.stripped()))
        }
        Command::Eval { truth, predicted } => {
            let (t, _) = load(&truth, None)?;
            let (p, _) = load(&predicted, None)?;
            let report = score(&t, &p).map_err(|e| data_err(&predicted, e))?;
            emit(
                None,
                &match format {
                    ReportFormat::Table => render_report_table(&[(&predicted.display().to_string(), &report)]),
                    ReportFormat::Json => json(&report),
                },
            )
        }
        Command::Freq { train, test, predicted } => {
            let (train_c, _) = load(&train, None)?;
            let (test_c, _) = load(&test, None)?;
            let (pred_c, _) = load(&predicted, None)?;
            let table = freq_recall(&train_c, &test_c, &pred_c).map_err(|e| data_err(&predicted, e))?;
            emit(
                None,
                &match format {
                    ReportFormat::Table => freq_table(&table),
                    ReportFormat::Json => json(&table),
                },
            )
        }
        Command::CompileRule { rules } => {
            let list = parse_rule_list(&read_text(&rules)?).map_err(|e| data_err(&rules, e))?;
            let compiled = list
                .rules
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    r.compile_flat()
                        .map_err(|e| data_err(&rules, format!("rule {}: {e}", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            emit(
                None,
                &match format {
                    ReportFormat::Table => compiled.iter().map(|c| format!("{c}\n")).collect(),
                    ReportFormat::Json => json(&compiled),
                },
            )
        }
        Command::Serve { root, addr } => {
            let manager = SessionManager::open(&root).map_err(|e| data_err(&root, e))?;
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| CliError::Data(format!("cannot start runtime: {e}")))?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .map_err(|e| CliError::Usage(format!("cannot listen on {addr}: {e}")))?;
                let local = listener
                    .local_addr()
                    .map_err(|e| CliError::Data(format!("cannot listen on {addr}: {e}")))?;
                println!("listening on http://{local}");
                crate::server::serve(listener, manager)
                    .await
                    .map_err(|e| CliError::Data(format!("server: {e}")))
            })
        }
    }
}
