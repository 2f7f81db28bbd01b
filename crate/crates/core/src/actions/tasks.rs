//! The five provider-backed vehicle actions.

use super::providers::{fmt_num, ProviderError};
use super::{ActionContext, ActionError, ActionResponse, ActionResult, CustomAction};
use crate::dialogue::{Media, MediaKind};

pub const NEWS_PAGE_SIZE: usize = 5;

fn missing_slot(action: &str, slot: &str) -> ActionError {
    ActionError::Failed(action.to_string(), format!("slot `{slot}` is not set"))
}

/// Reads a page of headlines and offers the next one.
#[derive(Debug, Clone, Copy, Default)]
pub struct FetchNews;

impl CustomAction for FetchNews {
    fn name(&self) -> &str {
        "action_fetch_news"
    }

    fn run(&self, ctx: &ActionContext) -> Result<ActionResult, ActionError> {
        let page = ctx
            .slot_text("news_page")
            .and_then(|p| p.parse::<usize>().ok())
            .filter(|p| *p >= 1)
            .unwrap_or(1);
        let headlines = match ctx.providers.news.headlines(page, NEWS_PAGE_SIZE) {
            Ok(h) => h,
            Err(_) => {
                return Ok(ActionResult::default().say(ActionResponse::text("Sorry, I couldn't fetch the news right now.")))
            }
        };
        if headlines.is_empty() {
            return Ok(ActionResult::default()
                .say(ActionResponse::text("That's all the headlines for now."))
                .set_slot("news_page", None));
        }
        let first = (page - 1) * NEWS_PAGE_SIZE + 1;
        let items: Vec<String> = headlines
            .iter()
            .enumerate()
            .map(|(i, h)| format!("{}. {} ({})", first + i, h.title, h.source))
            .collect();
        let lead = if page == 1 {
            "Here are the latest headlines"
        } else {
            "Here are more headlines"
        };
        Ok(ActionResult::default()
            .say(ActionResponse::text(format!("{lead}: {}", items.join(" "))))
            .say(ActionResponse::text("Would you like to hear more headlines?").labelled("utter_confirm_more_news"))
            .set_slot("news_page", Some(&(page + 1).to_string())))
    }
}

/// Current conditions plus the next-day forecast for the `location` slot.
#[derive(Debug, Clone, Copy, Default)]
pub struct FetchWeather;

impl CustomAction for FetchWeather {
    fn name(&self) -> &str {
        "action_fetch_weather"
    }

    fn run(&self, ctx: &ActionContext) -> Result<ActionResult, ActionError> {
        let location = ctx.slot_text("location").ok_or_else(|| missing_slot(self.name(), "location"))?;
        match ctx.providers.weather.forecast(location) {
            Ok(f) => Ok(ActionResult::default()
                .say(ActionResponse::text(f.current.render()))
                .say(ActionResponse::text(f.next.render()))),
            Err(ProviderError::NotFound(_)) => Ok(ActionResult::default()
                .say(ActionResponse::text(format!(
                    "I couldn't find weather for {location}. Please ask again with another location."
                )))
                .set_slot("location", None)),
            Err(ProviderError::Unavailable(_)) => Ok(ActionResult::default()
                .say(ActionResponse::text("Sorry, the weather service is unavailable right now."))),
        }
    }
}

/// Route from the configured origin to the `destination` slot.
#[derive(Debug, Clone, Copy, Default)]
pub struct Navigate;

impl CustomAction for Navigate {
    fn name(&self) -> &str {
        "action_navigate"
    }

    fn run(&self, ctx: &ActionContext) -> Result<ActionResult, ActionError> {
        let destination = ctx
            .slot_text("destination")
            .ok_or_else(|| missing_slot(self.name(), "destination"))?;
        let origin = &ctx.providers.origin;
        if destination.trim().eq_ignore_ascii_case(origin.label.trim()) {
            return Ok(ActionResult::default().say(ActionResponse::text(format!(
                "You are already there: {} is 0 km away.",
                origin.label
            ))));
        }
        match ctx.providers.nav.route(origin, destination) {
            Ok(route) => Ok(ActionResult::default().say(
                ActionResponse::text(format!(
                    "Route to {} from {}: {} km, about {} min.",
                    route.destination,
                    origin.label,
                    fmt_num(route.distance_km),
                    route.duration_min
                ))
                .with_media(Media {
                    kind: MediaKind::Route,
                    reference: route.map_ref,
                }),
            )),
            Err(ProviderError::NotFound(_)) => Ok(ActionResult::default()
                .say(ActionResponse::text(format!("Sorry, I couldn't find a route to {destination}.")))
                .set_slot("destination", None)),
            Err(ProviderError::Unavailable(_)) => Ok(ActionResult::default()
                .say(ActionResponse::text("Sorry, navigation is unavailable right now."))),
        }
    }
}

/// Resolves the `song` slot to a track and starts playback.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlayMusic;

impl CustomAction for PlayMusic {
    fn name(&self) -> &str {
        "action_play_music"
    }

    fn run(&self, ctx: &ActionContext) -> Result<ActionResult, ActionError> {
        let song = ctx.slot_text("song").ok_or_else(|| missing_slot(self.name(), "song"))?;
        match ctx.providers.music.resolve(song) {
            Ok(track) => Ok(ActionResult::default()
                .say(
                    ActionResponse::text(format!("Now playing {} by {}.", track.title, track.artist)).with_media(
                        Media {
                            kind: MediaKind::Track,
                            reference: track.id.clone(),
                        },
                    ),
                )
                .set_slot("now_playing", Some(&track.title))),
            Err(ProviderError::NotFound(_)) => Ok(ActionResult::default()
                .say(ActionResponse::text("Sorry, I couldn't find that song."))
                .set_slot("song", None)),
            Err(ProviderError::Unavailable(_)) => Ok(ActionResult::default()
                .say(ActionResponse::text("Sorry, the music service is unavailable right now."))),
        }
    }
}

/// Looks up the `contact` slot in the contact book and dials it.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlaceCall;

impl CustomAction for PlaceCall {
    fn name(&self) -> &str {
        "action_place_call"
    }

    fn run(&self, ctx: &ActionContext) -> Result<ActionResult, ActionError> {
        let name = ctx.slot_text("contact").ok_or_else(|| missing_slot(self.name(), "contact"))?;
        let phone = &ctx.providers.phone;
        match phone.lookup(name).and_then(|c| phone.dial(&c).map(|()| c)) {
            Ok(contact) => Ok(ActionResult::default().say(ActionResponse::text(format!("Calling {}…", contact.name)))),
            Err(ProviderError::NotFound(_)) => Ok(ActionResult::default()
                .say(ActionResponse::text(format!("There is no contact named {name}.")))
                .set_slot("contact", None)),
            Err(ProviderError::Unavailable(_)) => {
                Ok(ActionResult::default().say(ActionResponse::text("Sorry, I couldn't place the call right now.")))
            }
        }
    }
}
