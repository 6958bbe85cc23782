//! Scripted classroom feed standing in for a live platform: modules of
//! slides, each with the teacher and classmate messages shown alongside it.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::SpeakerRole;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptMessage {
    pub role: SpeakerRole,
    #[serde(default)]
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slide {
    pub id: String,
    pub content: String,
    #[serde(default)]
    pub messages: Vec<ScriptMessage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Module {
    pub id: String,
    pub title: String,
    pub slides: Vec<Slide>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentScript {
    pub modules: Vec<Module>,
}

impl EnvironmentScript {
    pub fn validate(&self) -> Result<()> {
        if self.modules.is_empty() {
            return Err(CoreError::Empty("environment script"));
        }
        let mut ids = BTreeSet::new();
        for m in &self.modules {
            if !ids.insert(m.id.as_str()) {
                return Err(CoreError::invalid("environment script", format!("duplicate module `{}`", m.id)));
            }
            if m.slides.is_empty() {
                return Err(CoreError::invalid("environment script", format!("module `{}` has no slides", m.id)));
            }
            for s in &m.slides {
                if s.content.trim().is_empty() {
                    return Err(CoreError::invalid(
                        "environment script",
                        format!("slide `{}` in `{}` is empty", s.id, m.id),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        let script: Self =
            serde_json::from_str(&text).map_err(|e| CoreError::json(path.display().to_string(), e))?;
        script.validate()?;
        Ok(script)
    }

    /// The module taught in period `t`; the script repeats when it runs out.
    pub fn module_for(&self, t: u32) -> &Module {
        &self.modules[t as usize % self.modules.len()]
    }
}

pub fn render_message(m: &ScriptMessage) -> String {
    let who = match (m.role, m.speaker.trim()) {
        (_, name) if !name.is_empty() => name.to_string(),
        (SpeakerRole::Teacher, _) => "Teacher".into(),
        (SpeakerRole::Peer, _) => "Classmate".into(),
        (SpeakerRole::Student, _) => "You".into(),
    };
    format!("{who}: {}", m.text.trim())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script(n: usize) -> EnvironmentScript {
        EnvironmentScript {
            modules: (0..n)
                .map(|i| Module {
                    id: format!("m{i}"),
                    title: format!("Module {i}"),
                    slides: vec![Slide {
                        id: "s1".into(),
                        content: "Intro".into(),
                        messages: vec![],
                    }],
                })
                .collect(),
        }
    }

    #[test]
    fn modules_cycle() {
        let s = script(2);
        assert_eq!(s.module_for(0).id, "m0");
        assert_eq!(s.module_for(3).id, "m1");
    }

    #[test]
    fn validation() {
        assert!(script(0).validate().is_err());
        let mut s = script(1);
        s.modules[0].slides[0].content = " ".into();
        assert!(s.validate().is_err());
        script(3).validate().unwrap();
    }

    #[test]
    fn message_speakers() {
        let m = ScriptMessage {
            role: SpeakerRole::Peer,
            speaker: String::new(),
            text: "hi ".into(),
        };
        assert_eq!(render_message(&m), "Classmate: hi");
        let m = ScriptMessage {
            role: SpeakerRole::Teacher,
            speaker: "AI Teacher".into(),
            text: "Welcome".into(),
        };
        assert_eq!(render_message(&m), "AI Teacher: Welcome");
    }
}
