//! Terminal dialogue: reads questions line by line, prints answers as text.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use explainer_core::dialogue::{Answer, EntityView, RelationView, Session, TurnRecord};

const HELP: &str = "\
questions:
  why <entity>.<attribute>   relations explaining an attribute value, highest priority first
  how rel:<n>                models explaining a presented relation
  reset                      forget presented relations; `why` starts over
  help                       this text
  quit | exit                leave";

fn entity_line(entity: &EntityView) -> String {
    let attributes: Vec<String> = entity
        .attributes
        .iter()
        .filter(|(k, _)| k.as_str() != "name")
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    format!("{} ({}): {}", entity.name, entity.kind, attributes.join(", "))
}

fn relation_lines(out: &mut String, r: &RelationView) {
    let _ = writeln!(
        out,
        "  {}  {}: {} -> {}  [priority {}]\n      {}",
        r.label, r.template, r.explanan.name, r.explanandum.name, r.priority, r.reason
    );
}

/// Plain-text rendering of one turn's answer.
pub fn render(turn: &TurnRecord) -> String {
    let mut out = String::new();
    match &turn.answer {
        Answer::Presentation { entity } => {
            let _ = writeln!(out, "output: {}", entity_line(entity));
        }
        Answer::Tier {
            entity,
            attribute,
            relations,
        } => {
            let _ = writeln!(out, "{}.{} is explained by:", entity.name, attribute);
            for r in relations {
                relation_lines(&mut out, r);
            }
        }
        Answer::Models { relation, models } => {
            let _ = writeln!(out, "{relation} follows from:");
            for m in models {
                let _ = writeln!(out, "  {}: {}", m.name, m.story);
            }
        }
        Answer::NoMatchingModel { relation } => {
            let _ = writeln!(out, "no model explains {relation}");
        }
        Answer::Exhausted { entity, attribute } => {
            let _ = writeln!(
                out,
                "nothing more explains {}.{} (`reset` to hear it again)",
                entity.name, attribute
            );
        }
        Answer::Acknowledgement { message } => {
            let _ = writeln!(out, "{message}");
        }
    }
    out
}

/// What the next question may target.
pub fn targets_line(session: &Session) -> String {
    let entities: Vec<&str> = session
        .addressable_entities()
        .into_iter()
        .map(|e| e.name.as_str())
        .collect();
    let labels: Vec<String> = session.labelled_relations().map(|(n, _)| format!("rel:{n}")).collect();
    let mut line = format!("targets: {}", entities.join(", "));
    if !labels.is_empty() {
        line.push_str(&format!(" | {}", labels.join(", ")));
    }
    line
}

/// Runs the dialogue until `quit`, `exit` or end of input.
pub fn run(session: &mut Session, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    write!(output, "{}", render(&session.history()[0]))?;
    writeln!(output, "{}", targets_line(session))?;
    write!(output, "> ")?;
    output.flush()?;
    for line in input.lines() {
        let line = line?;
        match line.trim() {
            "" => {}
            "quit" | "exit" => break,
            "help" => writeln!(output, "{HELP}")?,
            text => match session.ask(text) {
                Ok(turn) => {
                    let rendered = render(turn);
                    write!(output, "{rendered}")?;
                    writeln!(output, "{}", targets_line(session))?;
                }
                Err(e) => writeln!(output, "error: {e}")?,
            },
        }
        write!(output, "> ")?;
        output.flush()?;
    }
    writeln!(output)?;
    Ok(())
}
