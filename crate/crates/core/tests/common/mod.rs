//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::ffi::OsStr;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hierarch_core::agents::RoundFeedback;
use hierarch_core::games::understanding::catalog;
use hierarch_core::games::Condition;
use hierarch_core::harness::{render_prompt, system_prompt, understanding_prompt};

pub fn fixture_dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(sub)
}

/// Every rendered prompt, keyed by its golden file stem.
pub fn rendered_prompts() -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    out.insert("system-one-shot".into(), system_prompt(Condition::PbcgBaseline).to_string());
    out.insert("system-repeated".into(), system_prompt(Condition::PbcgRepeatedTwoThirds).to_string());
    out.insert("system-gg".into(), system_prompt(Condition::Gg).to_string());
    for c in Condition::ALL {
        if c.rounds() == 1 {
            out.insert(c.to_string(), only(render_prompt(c, 1, None).unwrap()));
        }
    }
    for c in [Condition::PbcgRepeatedTwoThirds, Condition::PbcgRepeatedFourThirds] {
        out.insert(format!("{c}-round1"), only(render_prompt(c, 1, None).unwrap()));
    }
    let fb = RoundFeedback { round: 1, average: 30.0, target: 40.0, won: true };
    let second = render_prompt(Condition::PbcgRepeatedFourThirds, 2, Some(&fb)).unwrap();
    assert_eq!(second.len(), 2);
    out.insert("pbcg-repeated-feedback-example".into(), second[0].content.clone());
    out.insert("pbcg-repeated-round2".into(), second[1].content.clone());
    out.insert("gg-round1".into(), only(render_prompt(Condition::Gg, 1, None).unwrap()));
    out.insert("gg-round2".into(), only(render_prompt(Condition::Gg, 2, None).unwrap()));
    for q in catalog() {
        let name = format!("understanding-{}", q.id.replace('/', "-"));
        out.insert(name, understanding_prompt(&q.id).unwrap().content);
    }
    out
}

fn only(mut msgs: Vec<hierarch_core::harness::Message>) -> String {
    assert_eq!(msgs.len(), 1);
    msgs.remove(0).content
}

/// Golden files that differ from, or are missing in, the rendered set.
pub fn prompt_mismatches() -> Vec<String> {
    let rendered = rendered_prompts();
    let mut bad = Vec::new();
    let mut seen = 0;
    for entry in std::fs::read_dir(fixture_dir("prompts")).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_string_lossy().to_string();
        let golden = std::fs::read_to_string(&path).unwrap();
        seen += 1;
        match rendered.get(&stem) {
            Some(text) if *text == golden => {}
            Some(_) => bad.push(format!("{stem}: differs")),
            None => bad.push(format!("{stem}: not rendered")),
        }
    }
    if seen != rendered.len() {
        bad.push(format!("{} goldens for {} rendered prompts", seen, rendered.len()));
    }
    bad
}

pub fn hierarch<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_hierarch")).args(args).output().expect("run hierarch")
}

fn checked(out: Output, what: &str) -> Result<Output, String> {
    if out.status.success() {
        Ok(out)
    } else {
        Err(format!("{what} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)))
    }
}

/// Replays the checked-in transcripts through `collect`, fits the result
/// with `estimate`, and compares against the stored fit byte for byte.
pub fn replay_roundtrip(work: &Path) -> Result<(), String> {
    let replay = fixture_dir("replay");
    let out_dir = work.join("collected");
    checked(
        hierarch([
            OsStr::new("collect"),
            OsStr::new("--provider"),
            OsStr::new("replay"),
            OsStr::new("--replay-dir"),
            replay.join("transcripts").as_os_str(),
            OsStr::new("--plan"),
            replay.join("plan.json").as_os_str(),
            OsStr::new("--out-dir"),
            out_dir.as_os_str(),
        ]),
        "collect",
    )?;
    let fit = checked(
        hierarch([
            OsStr::new("estimate"),
            OsStr::new("--input"),
            out_dir.join("responses.csv").as_os_str(),
            OsStr::new("--model"),
            OsStr::new("ch"),
            OsStr::new("--bootstrap"),
            OsStr::new("200"),
            OsStr::new("--seed"),
            OsStr::new("7"),
            OsStr::new("--quiet"),
        ]),
        "estimate",
    )?;
    let expected = std::fs::read(replay.join("expected_fit.json")).map_err(|e| e.to_string())?;
    if fit.stdout == expected {
        Ok(())
    } else {
        Err("estimate output differs from expected_fit.json".into())
    }
}
