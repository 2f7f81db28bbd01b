//! Deterministic fixture-backed providers. Every call sleeps for an
//! injectable delay first so benches can model slow services.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::Deserialize;

use super::providers::{
    Contact, Forecast, Headline, MusicProvider, NavigationProvider, NewsProvider, PhoneProvider, Place,
    ProviderError, ProviderRegistry, Route, Track, WeatherProvider,
};

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid fixture {file}: {source}")]
    Json {
        file: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid fixture {file}: {message}")]
    Invalid { file: String, message: String },
}

/// Raw contents of the five fixture files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureSet {
    pub news: String,
    pub weather: String,
    pub routes: String,
    pub tracks: String,
    pub contacts: String,
}

impl FixtureSet {
    pub const FILES: [&'static str; 5] = ["news.json", "weather.json", "routes.json", "tracks.json", "contacts.json"];

    pub fn read_dir(dir: &Path) -> Result<Self, FixtureError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|source| FixtureError::Io { path, source })
        };
        Ok(FixtureSet {
            news: read("news.json")?,
            weather: read("weather.json")?,
            routes: read("routes.json")?,
            tracks: read("tracks.json")?,
            contacts: read("contacts.json")?,
        })
    }
}

fn parse<T: for<'de> Deserialize<'de>>(file: &str, text: &str) -> Result<T, FixtureError> {
    serde_json::from_str(text).map_err(|source| FixtureError::Json {
        file: file.to_string(),
        source,
    })
}

fn key(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Debug, Clone)]
struct Delay(Duration);

impl Delay {
    fn wait(&self) {
        if !self.0.is_zero() {
            thread::sleep(self.0);
        }
    }
}

#[derive(Debug)]
pub struct MockNews {
    headlines: Vec<Headline>,
    delay: Delay,
}

impl NewsProvider for MockNews {
    fn headlines(&self, page: usize, page_size: usize) -> Result<Vec<Headline>, ProviderError> {
        self.delay.wait();
        let start = page.saturating_sub(1).saturating_mul(page_size);
        Ok(self.headlines.iter().skip(start).take(page_size).cloned().collect())
    }
}

#[derive(Debug)]
pub struct MockWeather {
    forecasts: BTreeMap<String, Forecast>,
    delay: Delay,
}

impl WeatherProvider for MockWeather {
    fn forecast(&self, location: &str) -> Result<Forecast, ProviderError> {
        self.delay.wait();
        self.forecasts
            .get(&key(location))
            .cloned()
            .ok_or_else(|| ProviderError::NotFound(location.to_string()))
    }
}

#[derive(Debug)]
pub struct MockNavigation {
    routes: BTreeMap<String, Route>,
    delay: Delay,
}

impl NavigationProvider for MockNavigation {
    fn route(&self, _origin: &Place, destination: &str) -> Result<Route, ProviderError> {
        self.delay.wait();
        self.routes
            .get(&key(destination))
            .cloned()
            .ok_or_else(|| ProviderError::NotFound(destination.to_string()))
    }
}

#[derive(Debug)]
pub struct MockMusic {
    tracks: Vec<Track>,
    delay: Delay,
}

impl MusicProvider for MockMusic {
    fn resolve(&self, query: &str) -> Result<Track, ProviderError> {
        self.delay.wait();
        let q = key(query);
        self.tracks
            .iter()
            .find(|t| key(&t.title) == q)
            .cloned()
            .ok_or_else(|| ProviderError::NotFound(query.to_string()))
    }
}

/// Contact book mock; dialing only records the number.
#[derive(Debug)]
pub struct MockPhone {
    contacts: BTreeMap<String, Contact>,
    dialed: Mutex<Vec<String>>,
    delay: Delay,
}

impl MockPhone {
    pub fn dialed(&self) -> Vec<String> {
        self.dialed.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

impl PhoneProvider for MockPhone {
    fn lookup(&self, name: &str) -> Result<Contact, ProviderError> {
        self.delay.wait();
        self.contacts
            .get(&key(name))
            .cloned()
            .ok_or_else(|| ProviderError::NotFound(name.to_string()))
    }

    fn dial(&self, contact: &Contact) -> Result<(), ProviderError> {
        tracing::debug!(name = %contact.name, number = %contact.number, "mock dial");
        self.dialed.lock().unwrap_or_else(|e| e.into_inner()).push(contact.number.clone());
        Ok(())
    }
}

#[derive(Deserialize)]
struct NewsFile {
    headlines: Vec<Headline>,
}

#[derive(Deserialize)]
struct RoutesFile {
    origin: Place,
    routes: Vec<Route>,
}

#[derive(Deserialize)]
struct TracksFile {
    tracks: Vec<Track>,
}

/// Builds a registry of mocks from fixture texts; `delay` is applied to
/// every provider call.
pub fn mock_registry(fixtures: &FixtureSet, delay: Duration) -> Result<ProviderRegistry, FixtureError> {
    let news: NewsFile = parse("news.json", &fixtures.news)?;
    let weather: BTreeMap<String, Forecast> = parse("weather.json", &fixtures.weather)?;
    for (name, f) in &weather {
        if !f.current.is_valid() || !f.next.is_valid() {
            return Err(FixtureError::Invalid {
                file: "weather.json".into(),
                message: format!("percentage out of range for {name}"),
            });
        }
    }
    let routes: RoutesFile = parse("routes.json", &fixtures.routes)?;
    let tracks: TracksFile = parse("tracks.json", &fixtures.tracks)?;
    let contacts: BTreeMap<String, String> = parse("contacts.json", &fixtures.contacts)?;
    let delay = Delay(delay);
    Ok(ProviderRegistry {
        news: Arc::new(MockNews {
            headlines: news.headlines,
            delay: delay.clone(),
        }),
        weather: Arc::new(MockWeather {
            forecasts: weather.into_iter().map(|(k, v)| (key(&k), v)).collect(),
            delay: delay.clone(),
        }),
        nav: Arc::new(MockNavigation {
            routes: routes.routes.into_iter().map(|r| (key(&r.destination), r)).collect(),
            delay: delay.clone(),
        }),
        music: Arc::new(MockMusic {
            tracks: tracks.tracks,
            delay: delay.clone(),
        }),
        phone: Arc::new(MockPhone {
            contacts: contacts
                .into_iter()
                .map(|(name, number)| (key(&name), Contact { name, number }))
                .collect(),
            dialed: Mutex::new(Vec::new()),
            delay,
        }),
        origin: routes.origin,
    })
}
