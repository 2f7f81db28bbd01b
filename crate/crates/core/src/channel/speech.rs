//! Seam where speech-to-text and text-to-speech engines plug in. The
//! shipped adapter is a text passthrough.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("transcription failed: {0}")]
pub struct TranscriptionError(pub String);

/// Output voice settings.
#[derive(Debug, Clone, PartialEq)]
pub struct VoiceProperties {
    pub voice: String,
    /// Words per minute.
    pub rate: u32,
    /// 0.0 ..= 1.0
    pub volume: f32,
}

impl Default for VoiceProperties {
    fn default() -> Self {
        VoiceProperties {
            voice: "default".to_string(),
            rate: 170,
            volume: 1.0,
        }
    }
}

pub trait SpeechAdapter: Send + Sync {
    fn transcribe(&self, audio: &[u8]) -> Result<String, TranscriptionError>;
    fn synthesize(&self, text: &str) -> Vec<u8>;
    fn properties(&self) -> &VoiceProperties;
}

/// Treats "audio" as UTF-8 text in both directions.
#[derive(Debug, Clone, Default)]
pub struct PassthroughSpeech {
    pub properties: VoiceProperties,
}

impl SpeechAdapter for PassthroughSpeech {
    fn transcribe(&self, audio: &[u8]) -> Result<String, TranscriptionError> {
        String::from_utf8(audio.to_vec()).map_err(|e| TranscriptionError(e.to_string()))
    }

    fn synthesize(&self, text: &str) -> Vec<u8> {
        text.as_bytes().to_vec()
    }

    fn properties(&self) -> &VoiceProperties {
        &self.properties
    }
}

/// A failed transcription becomes an empty utterance, which the NLU
/// pipeline treats as a fallback.
pub fn transcript_or_empty(result: Result<String, TranscriptionError>) -> String {
    result.unwrap_or_else(|e| {
        tracing::warn!(error = %e, "transcription failed");
        String::new()
    })
}
