use std::io::{self, BufRead, Write};

use super::Assistant;

/// Slash commands understood by the terminal channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplCommand {
    Quit,
    Reset,
}

impl ReplCommand {
    pub fn parse(line: &str) -> Option<Self> {
        match line.trim() {
            "/quit" => Some(ReplCommand::Quit),
            "/reset" => Some(ReplCommand::Reset),
            _ => None,
        }
    }
}

/// Reads one utterance per line and prints every bot message on its own
/// line (media references on a following indented line). Returns on
/// `/quit` or end of input.
pub fn run_repl(assistant: &Assistant, sender: &str, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        match ReplCommand::parse(&line) {
            Some(ReplCommand::Quit) => break,
            Some(ReplCommand::Reset) => {
                assistant.reset(sender).map_err(io::Error::other)?;
                writeln!(output, "(conversation reset)")?;
                continue;
            }
            None => {}
        }
        let responses = assistant.handle(sender, line.trim_end_matches('\r')).map_err(io::Error::other)?;
        for r in responses {
            writeln!(output, "{}", r.text)?;
            if let Some(m) = r.media {
                let kind = serde_json::to_value(m.kind).ok();
                let kind = kind.as_ref().and_then(|v| v.as_str()).unwrap_or("media");
                writeln!(output, "  [{kind}: {}]", m.reference)?;
            }
        }
        output.flush()?;
    }
    Ok(())
}
