use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use super::{EvalReport, IntentAccuracy, LatencyReport};

pub const REPORT_TXT: &str = "report.txt";
pub const REPORT_JSON: &str = "report.json";

/// Utterances from the published accuracy table, shown when present in the
/// dataset.
const TABLE3_PROBES: [&str; 10] = [
    "Sunlight",
    "Mumbai",
    "Delhi",
    "John",
    "Suresh",
    "99 Problems",
    "Sachin",
    "New York",
    "Stan",
    "Paris",
];

/// Plain-text grid with a header rule; columns after the first are
/// right-aligned.
fn table(out: &mut String, caption: &str, header: &[&str], rows: &[Vec<String>]) {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate().take(cols) {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            let pad = widths[i] - c.chars().count();
            if i == 0 {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str(" | ");
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            }
        }
        s.trim_end().to_string()
    };
    let _ = writeln!(out, "{caption}");
    let head: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    let head_line = line(&head);
    let _ = writeln!(out, "{head_line}");
    let _ = writeln!(out, "{}", "-".repeat(head_line.chars().count()));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
    let _ = writeln!(out);
}

fn ms(v: f64) -> String {
    format!("{v:.2}")
}

fn latency(out: &mut String, l: &LatencyReport) {
    let rows: Vec<Vec<String>> = l
        .by_action
        .iter()
        .map(|r| vec![r.key.caption().to_string(), ms(r.mean_ms), r.samples.to_string()])
        .collect();
    table(
        out,
        &format!("Table 1. Average response times of the bot for each type of action (N = {})", l.repetitions),
        &["Type of Action", "Avg Response Time (ms)", "Turns"],
        &rows,
    );
    let rows: Vec<Vec<String>> = l
        .by_module
        .iter()
        .map(|r| vec![r.key.caption().to_string(), ms(r.mean_ms), r.samples.to_string()])
        .collect();
    table(
        out,
        &format!("Table 2. Average response times of the bot for each module (N = {})", l.repetitions),
        &["Module", "Avg Response Time (ms)", "Turns"],
        &rows,
    );
    let _ = writeln!(
        out,
        "Action-type ordering held in {} of {} repetitions.\n",
        l.ordered_repetitions, l.repetitions
    );
}

fn accuracy(out: &mut String, a: &IntentAccuracy) {
    let _ = writeln!(
        out,
        "Intent accuracy: {} / {} = {:.2}%\n",
        a.correct_count,
        a.total_count,
        a.accuracy * 100.0
    );
    let probe_rows: Vec<Vec<String>> = TABLE3_PROBES
        .iter()
        .filter_map(|t| a.predictions.iter().find(|p| p.text == *t))
        .map(|p| {
            vec![
                p.text.clone(),
                p.predicted.clone(),
                p.expected.clone(),
                if p.is_correct() { "Y" } else { "N" }.to_string(),
            ]
        })
        .collect();
    if !probe_rows.is_empty() {
        table(
            out,
            "Table 3. Accuracy of identifying intents",
            &["Utterance", "Identified Intent", "Correct Intent", "Result (Y/N)"],
            &probe_rows,
        );
    }
    let wrong: Vec<Vec<String>> = a
        .misclassified()
        .map(|p| vec![p.text.clone(), p.predicted.clone(), p.expected.clone()])
        .collect();
    if !wrong.is_empty() {
        table(
            out,
            "Misclassified utterances",
            &["Utterance", "Identified Intent", "Correct Intent"],
            &wrong,
        );
    }
    // Confusion grid: rows expected, columns predicted (by row number).
    let _ = writeln!(out, "Confusion matrix (rows: expected, columns: predicted)");
    let name_w = a.labels.iter().map(|l| l.len()).max().unwrap_or(0) + 4;
    let cell_w = a
        .confusion
        .iter()
        .flatten()
        .map(|c| c.to_string().len())
        .max()
        .unwrap_or(1)
        .max(a.labels.len().to_string().len())
        + 1;
    let mut head = " ".repeat(name_w);
    for j in 0..a.labels.len() {
        let _ = write!(head, "{:>cell_w$}", j + 1);
    }
    let _ = writeln!(out, "{}", head.trim_end());
    for (i, row) in a.confusion.iter().enumerate() {
        let mut line = format!("{:>2}. {:<w$}", i + 1, a.labels[i], w = name_w - 4);
        for c in row {
            let _ = write!(line, "{c:>cell_w$}");
        }
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out);
}

/// Human-readable report: latency tables, accuracy table and confusion grid
/// for whichever sections are present.
pub fn render_report(report: &EvalReport) -> String {
    let mut out = String::new();
    if let Some(l) = &report.latency {
        latency(&mut out, l);
    }
    if let Some(t) = report.training_accuracy {
        let _ = writeln!(out, "Training-set accuracy: {:.2}%\n", t * 100.0);
    }
    if let Some(a) = &report.intents {
        accuracy(&mut out, a);
    }
    if out.is_empty() {
        out.push_str("Empty report.\n");
    }
    out
}

/// Writes `report.txt` and `report.json` into `dir`.
pub fn write_report(report: &EvalReport, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(REPORT_TXT), render_report(report))?;
    fs::write(dir.join(REPORT_JSON), report.to_json() + "\n")?;
    Ok(())
}
