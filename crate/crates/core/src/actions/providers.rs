//! External-service seams. Every provider is an object-safe trait so the
//! engine can run against fixture mocks or live adapters interchangeably.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("service unavailable: {0}")]
    Unavailable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Headline {
    pub title: String,
    pub source: String,
}

pub trait NewsProvider: Send + Sync {
    /// Headlines on 1-based `page` of `page_size`; an empty page means the
    /// feed is exhausted.
    fn headlines(&self, page: usize, page_size: usize) -> Result<Vec<Headline>, ProviderError>;
}

/// The 16-point compass rose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Compass {
    N,
    NNE,
    NE,
    ENE,
    E,
    ESE,
    SE,
    SSE,
    S,
    SSW,
    SW,
    WSW,
    W,
    WNW,
    NW,
    NNW,
}

impl Compass {
    pub const ALL: [Compass; 16] = [
        Compass::N,
        Compass::NNE,
        Compass::NE,
        Compass::ENE,
        Compass::E,
        Compass::ESE,
        Compass::SE,
        Compass::SSE,
        Compass::S,
        Compass::SSW,
        Compass::SW,
        Compass::WSW,
        Compass::W,
        Compass::WNW,
        Compass::NW,
        Compass::NNW,
    ];

    /// Nearest point for a bearing in degrees (any real value).
    pub fn from_degrees(degrees: f64) -> Compass {
        let normalized = degrees.rem_euclid(360.0);
        let index = (normalized / 22.5).round() as usize % 16;
        Compass::ALL[index]
    }

    pub fn as_str(self) -> &'static str {
        const NAMES: [&str; 16] = [
            "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW",
        ];
        NAMES[self as usize]
    }
}

impl fmt::Display for Compass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Day {
    Current,
    Next,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherReport {
    pub location: String,
    pub temperature_c: f64,
    pub humidity_pct: u8,
    pub pressure_hpa: f64,
    pub wind_kmh: f64,
    pub wind_direction: Compass,
    pub cloud_cover_pct: u8,
    pub day: Day,
}

impl WeatherReport {
    pub fn is_valid(&self) -> bool {
        self.humidity_pct <= 100 && self.cloud_cover_pct <= 100
    }

    /// One spoken-style sentence.
    pub fn render(&self) -> String {
        let lead = match self.day {
            Day::Current => format!("Right now in {} it is", self.location),
            Day::Next => format!("Tomorrow in {} expect", self.location),
        };
        format!(
            "{lead} {}°C with {}% humidity, pressure {} hPa, wind {} km/h from the {} and {}% cloud cover.",
            fmt_num(self.temperature_c),
            self.humidity_pct,
            fmt_num(self.pressure_hpa),
            fmt_num(self.wind_kmh),
            self.wind_direction,
            self.cloud_cover_pct
        )
    }
}

/// Prints whole numbers without a fractional part.
pub(crate) fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub current: WeatherReport,
    pub next: WeatherReport,
}

pub trait WeatherProvider: Send + Sync {
    fn forecast(&self, location: &str) -> Result<Forecast, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Place {
    pub label: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub destination: String,
    pub distance_km: f64,
    pub duration_min: u32,
    /// Opaque reference the UI resolves to a map image or view.
    pub map_ref: String,
}

pub trait NavigationProvider: Send + Sync {
    fn route(&self, origin: &Place, destination: &str) -> Result<Route, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Track {
    pub id: String,
    pub title: String,
    pub artist: String,
    pub duration_s: u32,
}

pub trait MusicProvider: Send + Sync {
    fn resolve(&self, query: &str) -> Result<Track, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contact {
    pub name: String,
    pub number: String,
}

pub trait PhoneProvider: Send + Sync {
    fn lookup(&self, name: &str) -> Result<Contact, ProviderError>;
    fn dial(&self, contact: &Contact) -> Result<(), ProviderError>;
}

/// All providers the custom actions need, plus the vehicle's configured
/// current location used as the navigation origin.
#[derive(Clone)]
pub struct ProviderRegistry {
    pub news: Arc<dyn NewsProvider>,
    pub weather: Arc<dyn WeatherProvider>,
    pub nav: Arc<dyn NavigationProvider>,
    pub music: Arc<dyn MusicProvider>,
    pub phone: Arc<dyn PhoneProvider>,
    pub origin: Place,
}

impl fmt::Debug for ProviderRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProviderRegistry").field("origin", &self.origin).finish_non_exhaustive()
    }
}
