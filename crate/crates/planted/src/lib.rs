//! Synthetic 90-day lifelog with planted events, near-duplicates and
//! question/answer pairs, together with the scripted-backend fixtures that
//! describe its content and a ground-truth manifest.
//!
//! Generation is a pure function of [`SEED`]; the copy shipped under
//! `fixtures/planted` is checked against a fresh build by the tests.

mod scenes;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use chrono::{DateTime, Days, NaiveDate, SecondsFormat, TimeZone, Utc};
use image::{ImageEncoder, Rgb, RgbImage};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use memq_core::embedding::{fnv1a64, hashed_embedding};
use memq_core::eval::QueryCategory;
use memq_core::gateway::schema::AtomicContextsResponse;
use memq_core::gateway::scripted::{EventRule, FixtureEntry, HabitRule, MediaFixture, Rules};
use memq_core::gateway::SchemaId;
use memq_core::ingest::{encode_frame_strip, MANIFEST_FILE};
use memq_core::model::{MediaKind, SidecarRecord};

use scenes::*;

pub const SEED: u64 = 20_240_318;
pub const REFERENCE_TIME: &str = "2024-06-12T20:00:00Z";
/// Dimension the planted cosine guarantees are checked at.
pub const EMBEDDING_DIM: usize = 256;
pub const DEDUP_THRESHOLD: f64 = 0.85;

pub const CORPUS_DIR: &str = "corpus";
pub const SCRIPTED_DIR: &str = "scripted";
pub const TRUTH_FILE: &str = "truth.json";

fn date(month: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, month, day).expect("valid date")
}

pub fn first_day() -> NaiveDate {
    date(3, 18)
}

pub fn last_day() -> NaiveDate {
    date(6, 15)
}

pub fn reference_time() -> DateTime<Utc> {
    REFERENCE_TIME.parse().expect("valid reference time")
}

fn at(day: NaiveDate, hour: u32, minute: u32, second: u32) -> DateTime<Utc> {
    Utc.from_utc_datetime(&day.and_hms_opt(hour, minute, second).expect("valid time"))
}

fn plus(day: NaiveDate, n: i64) -> NaiveDate {
    day.checked_add_days(Days::new(n as u64)).expect("in range")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEvent {
    pub tag: String,
    pub name: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub location: Option<String>,
    pub importance: u8,
    /// Every memory that belongs to the event, explicit mentions included,
    /// in time order.
    pub memory_ids: Vec<String>,
    /// Memories that only mention the event.
    pub mention_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPair {
    /// The earlier capture.
    pub first: String,
    pub second: String,
    pub first_tags: usize,
    pub second_tags: usize,
    pub shared_tags: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedDedup {
    /// Pairs above the threshold; `second` must end up a duplicate of `first`.
    pub merged: Vec<PlantedPair>,
    /// Similar pairs at or below the threshold; both stay.
    pub kept: Vec<PlantedPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedKnowledge {
    pub statement: String,
    pub memory_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedQuery {
    pub query: String,
    pub category: QueryCategory,
    /// Whether the evidence is reachable only through a mined event.
    pub composite_dependent: bool,
    /// Memories a correct answer cites, in time order.
    pub evidence: Vec<String>,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub seed: u64,
    pub reference_time: DateTime<Utc>,
    pub first_day: NaiveDate,
    pub last_day: NaiveDate,
    pub memory_count: usize,
    /// Named memories, for tests that need a specific one.
    pub handles: BTreeMap<String, String>,
    pub events: Vec<PlantedEvent>,
    pub dedup: PlantedDedup,
    pub knowledge: Vec<PlantedKnowledge>,
    pub queries: Vec<PlantedQuery>,
}

impl Truth {
    pub fn load(dir: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(dir.join(TRUTH_FILE))?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn id(&self, handle: &str) -> &str {
        self.handles
            .get(handle)
            .unwrap_or_else(|| panic!("no planted memory named {handle}"))
    }

    pub fn event(&self, tag: &str) -> &PlantedEvent {
        self.events
            .iter()
            .find(|e| e.tag == tag)
            .unwrap_or_else(|| panic!("no planted event {tag}"))
    }
}

#[derive(Debug, Clone)]
struct Item {
    handle: String,
    time: DateTime<Utc>,
    kind: MediaKind,
    place: Option<Place>,
    shot: Shot,
    visible_text: Option<String>,
    transcript: Option<String>,
    mentions: Vec<&'static str>,
    event: Option<&'static str>,
    habits: Vec<&'static str>,
    tags: Option<Vec<String>>,
}

impl Item {
    fn new(handle: impl Into<String>, time: DateTime<Utc>, shot: Shot) -> Self {
        Self {
            handle: handle.into(),
            time,
            kind: MediaKind::Photo,
            place: None,
            shot,
            visible_text: None,
            transcript: None,
            mentions: Vec::new(),
            event: None,
            habits: Vec::new(),
            tags: None,
        }
    }

    fn kind(mut self, kind: MediaKind) -> Self {
        self.kind = kind;
        self
    }

    fn place(mut self, place: Place) -> Self {
        self.place = Some(place);
        self
    }

    fn text(mut self, text: &str) -> Self {
        self.visible_text = Some(text.to_string());
        self
    }

    fn transcript(mut self, text: &str) -> Self {
        self.transcript = Some(text.to_string());
        self
    }

    fn mention(mut self, name: &'static str) -> Self {
        self.mentions.push(name);
        self
    }

    fn event(mut self, tag: &'static str) -> Self {
        self.event = Some(tag);
        self
    }

    fn habit(mut self, tag: &'static str) -> Self {
        self.habits.push(tag);
        self
    }

    fn tags(mut self, tags: &[&str]) -> Self {
        self.tags = Some(tags.iter().map(|t| t.to_string()).collect());
        self
    }
}

struct EventSpec {
    tag: &'static str,
    name: &'static str,
    location: &'static str,
    importance: u8,
    start: NaiveDate,
    end: NaiveDate,
}

fn event_specs() -> [EventSpec; 6] {
    [
        EventSpec {
            tag: "lab_retreat",
            name: "Lab retreat",
            location: "South Lake Tahoe, CA",
            importance: 2,
            start: date(3, 22),
            end: date(3, 24),
        },
        EventSpec {
            tag: "maya_birthday",
            name: "Maya's birthday",
            location: "Oakland, CA",
            importance: 1,
            start: date(4, 5),
            end: date(4, 5),
        },
        EventSpec {
            tag: "hawaii_trip",
            name: "Trip to Hawaii",
            location: "Hawaii",
            importance: 3,
            start: date(4, 13),
            end: date(4, 28),
        },
        EventSpec {
            tag: "chi",
            name: "CHI 2024",
            location: "Honolulu, HI",
            importance: 3,
            start: date(5, 11),
            end: date(5, 16),
        },
        EventSpec {
            tag: "yosemite",
            name: "Yosemite camping",
            location: "Yosemite Valley, CA",
            importance: 2,
            start: date(5, 31),
            end: date(6, 2),
        },
        EventSpec {
            tag: "graduation",
            name: "Graduation",
            location: "Berkeley, CA",
            importance: 3,
            start: date(6, 8),
            end: date(6, 8),
        },
    ]
}

const GYM_STATEMENT: &str = "The user works out on the stairmaster at the gym about twice a week.";
const BOBA_STATEMENT: &str = "The user regularly drinks boba milk tea.";
const BIRTHDAY_STATEMENT: &str = "Maya's birthday is on April 5.";

const GYM_DAYS: [(u32, u32); 18] = [
    (3, 19), (3, 26), (3, 29), (4, 2), (4, 9), (4, 12), (4, 30), (5, 3), (5, 7),
    (5, 10), (5, 17), (5, 21), (5, 24), (5, 28), (6, 4), (6, 7), (6, 11), (6, 14),
];
const GYM_MINUTES: [u32; 6] = [30, 25, 35, 30, 40, 20];
const BOBA_DAYS: [(u32, u32); 6] = [(3, 27), (4, 10), (5, 22), (6, 4), (6, 7), (6, 11)];

const TURTLE_TAGS: [&str; 10] = [
    "sea turtle", "black sand", "beach", "shoreline", "waves", "basalt rock", "sunlight",
    "seaweed", "footprints", "driftwood",
];
const ACAI_TAGS: [&str; 12] = [
    "acai bowl", "granola", "banana slices", "blueberries", "coconut flakes", "honey drizzle",
    "wooden spoon", "ceramic bowl", "marble counter", "morning light", "linen napkin", "mint leaf",
];
const HALF_DOME_TAGS: [&str; 10] = [
    "half dome", "granite", "sunrise", "pine trees", "sky", "valley", "alpenglow", "clouds",
    "cliff face", "ridge",
];
const MEADOW_TAGS: [&str; 4] = ["meadow", "grass", "river", "deer"];

fn planted_items(rng: &mut ChaCha8Rng) -> Vec<Item> {
    let specs = event_specs();
    let mut items = Vec::new();

    for (d, shots) in LAB_RETREAT.iter().enumerate() {
        let day = plus(specs[0].start, d as i64);
        for (i, s) in shots.iter().enumerate() {
            items.push(
                Item::new(format!("lab-{d}-{i}"), at(day, 15 + 2 * i as u32, 10 + d as u32, 0), *s)
                    .place(TAHOE)
                    .event("lab_retreat"),
            );
        }
    }

    let bday = specs[1].start;
    items.push(
        Item::new("bday-cake", at(bday, 22, 5, 0), BIRTHDAY_CAKE)
            .place(OAKLAND)
            .text("Happy Birthday Maya")
            .event("maya_birthday")
            .habit("birthday"),
    );
    for (i, s) in BIRTHDAY.iter().enumerate() {
        items.push(
            Item::new(format!("bday-{i}"), at(bday, 21, 5 + 8 * i as u32, 0), *s)
                .place(OAKLAND)
                .event("maya_birthday"),
        );
    }

    let trip = specs[2].start;
    let mut sights = HAWAII_SIGHTS.iter().cycle();
    for d in 0..16i64 {
        let day = plus(trip, d);
        let place = match d {
            0..=6 => KONA,
            7..=9 => VOLCANO,
            _ => PAIA,
        };
        let mut slots: Vec<Item> = Vec::new();
        if let Some((_, s)) = HAWAII_FOOD.iter().find(|(o, _)| *o == d) {
            slots.push(Item::new(format!("hawaii-food-{d}"), at(day, 22, 30, 0), *s));
        }
        if d == 4 {
            let tags = &TURTLE_TAGS;
            slots.push(Item::new("turtle", at(day, 19, 12, 0), SEA_TURTLE).tags(tags));
            slots.push(Item::new("turtle-burst", at(day, 19, 12, 3), SEA_TURTLE).tags(&tags[..9]));
        }
        let hours = [18, 20, 23];
        let mut i = 0;
        while slots.iter().filter(|s| s.handle != "turtle-burst").count() < 3 {
            let s = sights.next().expect("cycled");
            slots.push(Item::new(format!("hawaii-{d}-{i}"), at(day, hours[i], 40, 0), *s));
            i += 1;
        }
        for item in slots {
            items.push(item.place(place).event("hawaii_trip"));
        }
    }

    let chi = specs[3].start;
    let mut sessions = CHI_SESSIONS.iter().cycle();
    for d in 0..6i64 {
        let day = plus(chi, d);
        let mut slots = Vec::new();
        if let Some((_, s)) = CHI_SOCIAL.iter().find(|(o, _)| *o == d) {
            slots.push(Item::new(format!("chi-social-{d}"), at(day, 23, 45, 0), *s));
        }
        if d == 1 {
            slots.push(
                Item::new("chi-wifi", at(day, 18, 20, 0), CHI_WIFI)
                    .text("CHI 2024 Wi-Fi\nNetwork: CHI2024\nPassword: honolulu24")
                    .mention("CHI 2024"),
            );
            slots.push(
                Item::new("chi-keynote", at(day, 19, 5, 0), CHI_KEYNOTE)
                    .kind(MediaKind::Video)
                    .transcript(
                        "Aloha and welcome to CHI 2024. This year more than four thousand \
                         of you have joined us here in Honolulu.",
                    ),
            );
        }
        let mut i = 0;
        while slots.len() < 5 {
            let s = sessions.next().expect("cycled");
            slots.push(Item::new(format!("chi-{d}-{i}"), at(day, 17 + i as u32, 15, 0), *s));
            i += 1;
        }
        for item in slots {
            items.push(item.place(CONVENTION_CENTER).event("chi"));
        }
    }

    let camp = specs[4].start;
    for (d, shots) in YOSEMITE_DAYS.iter().enumerate() {
        let day = plus(camp, d as i64);
        for (i, s) in shots.iter().enumerate() {
            let handle = match (d, i) {
                (1, 0) => "halfdome".to_string(),
                (1, 1) => "halfdome-meadow".to_string(),
                _ => format!("yosemite-{d}-{i}"),
            };
            let mut item = Item::new(handle, at(day, 15 + 2 * i as u32, 30, 0), *s)
                .place(YOSEMITE)
                .event("yosemite");
            if (d, i) == (1, 0) {
                item = item.tags(&HALF_DOME_TAGS);
            } else if (d, i) == (1, 1) {
                let tags: Vec<&str> = HALF_DOME_TAGS[..6].iter().chain(&MEADOW_TAGS).copied().collect();
                item = item.tags(&tags);
            }
            items.push(item);
        }
    }

    let grad = specs[5].start;
    for (i, s) in GRADUATION.iter().enumerate() {
        items.push(
            Item::new(format!("grad-{i}"), at(grad, 16 + i as u32, 0, 0), *s)
                .place(GREEK_THEATRE)
                .event("graduation"),
        );
    }

    for (n, &(m, d)) in GYM_DAYS.iter().enumerate() {
        let minutes = GYM_MINUTES[n % GYM_MINUTES.len()];
        let floors = minutes * 4 + (n as u32 % 5) * 3;
        items.push(
            Item::new(format!("gym-{n:02}"), at(date(m, d), 15, 5 + n as u32, 0), STAIRMASTER)
                .place(GYM)
                .text(&format!("TIME {minutes}:00  FLOORS {floors}  WORKOUT COMPLETE"))
                .habit("gym"),
        );
    }
    for (n, &(m, d)) in BOBA_DAYS.iter().enumerate() {
        items.push(
            Item::new(format!("boba-{n}"), at(date(m, d), 22, 15, 0), BOBA[n % BOBA.len()])
                .place(BERKELEY)
                .habit("boba"),
        );
    }
    items.push(
        Item::new("license", at(date(3, 19), 23, 40, 0), LICENSE)
            .text("CALIFORNIA DRIVER LICENSE\nDL Y4821937\nEXP 08/14/2027\nLN RIVERA\nFN ALEX"),
    );
    items.push(
        Item::new("receipt", at(date(5, 3), 17, 50, 0), RECEIPT)
            .place(BERKELEY)
            .text("Blue Bottle Coffee\nNew Orleans Iced 6.25\nKyoto Cold Brew 5.25\nTotal $11.50"),
    );
    items.push(Item::new("acai", at(date(4, 9), 16, 0, 0), ACAI).place(BERKELEY).tags(&ACAI_TAGS));
    let acai_burst: Vec<&str> = ACAI_TAGS[..11].iter().copied().chain(["chia seeds"]).collect();
    items.push(
        Item::new("acai-burst", at(date(4, 9), 16, 1, 0), ACAI)
            .place(BERKELEY)
            .tags(&acai_burst),
    );
    items.push(Item::new("blank-wall", at(date(3, 29), 20, 0, 0), BLANK_WALL));
    items.push(
        Item::new("timelapse", at(date(3, 30), 23, 0, 0), TIMELAPSE)
            .kind(MediaKind::Video)
            .place(BERKELEY)
            .transcript("Thank you for watching."),
    );
    items.push(
        Item::new("registration", at(date(4, 2), 18, 30, 0), REGISTRATION)
            .kind(MediaKind::Screenshot)
            .text(
                "Registration confirmed: CHI 2024, May 11-16, Honolulu, Hawai'i. \
                 Pick up your badge at the registration desk.",
            )
            .mention("CHI 2024"),
    );
    items.push(
        Item::new("rehearsal", at(date(5, 28), 21, 0, 0), REHEARSAL)
            .kind(MediaKind::Video)
            .place(BERKELEY)
            .transcript(
                "Okay, practice run. The title of my talk is Memory Lanes: Visualizing \
                 Personal Timelines, and I will be presenting it at CHI 2024 in Honolulu.",
            )
            .mention("CHI 2024"),
    );

    // Everyday life on days without an event.
    let busy: BTreeSet<NaiveDate> = specs
        .iter()
        .flat_map(|s| s.start.iter_days().take_while(move |d| *d <= s.end))
        .collect();
    for day in first_day().iter_days().take_while(|d| *d <= last_day()) {
        if busy.contains(&day) {
            continue;
        }
        let n = rng.random_range(2..=3);
        for (i, t) in sample(rng, EVERYDAY.len(), n).into_iter().enumerate() {
            let hour = 15 + 3 * i as u32 + rng.random_range(0..3);
            let time = at(day, hour, rng.random_range(0..60), rng.random_range(0..60));
            let mut item = Item::new(format!("life-{day}-{i}"), time, EVERYDAY[t]);
            if rng.random_bool(0.8) {
                item = item.place(BERKELEY);
            }
            items.push(item);
        }
    }
    items
}

/// Tags hashed into the scripted image embedding of a still.
fn visual_tags(item: &Item, id: &str) -> Vec<String> {
    if let Some(tags) = &item.tags {
        return tags.clone();
    }
    item.shot
        .visual
        .iter()
        .chain(item.shot.environment)
        .map(|t| t.to_string())
        // Unique per-memory tags, spelled as hashes so their buckets are
        // independent of each other.
        .chain((0..8).map(|k| format!("{:016x}", fnv1a64(format!("{id}#{k}").as_bytes()))))
        .collect()
}

fn image_vector(tags: &[String]) -> memq_core::Vector {
    let lowered: Vec<String> = tags.iter().map(|t| t.to_lowercase()).collect();
    hashed_embedding(lowered.iter().map(String::as_str), EMBEDDING_DIM)
}

fn color(seed: u64) -> Rgb<u8> {
    let b = seed.to_le_bytes();
    Rgb([64 + b[0] / 2, 64 + b[1] / 2, 64 + b[2] / 2])
}

/// A small PNG: a scene-coloured field crossed by a memory-coloured band.
fn thumbnail(scene: &str, id: &str) -> Vec<u8> {
    let (w, h) = (32u32, 24u32);
    let field = color(fnv1a64(scene.as_bytes()));
    let band = color(fnv1a64(id.as_bytes()));
    let img = RgbImage::from_fn(w, h, |x, y| {
        if (x + 2 * y) % 16 < 4 {
            band
        } else {
            field
        }
    });
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(img.as_raw(), w, h, image::ExtendedColorType::Rgb8)
        .expect("encoding to memory");
    out
}

fn video(scene: &str, id: &str, duration_ms: u32) -> Vec<u8> {
    let frames: Vec<(u32, Vec<u8>)> = (0..4)
        .map(|k| (k * duration_ms / 4, thumbnail(scene, &format!("{id}/{k}"))))
        .collect();
    encode_frame_strip(duration_ms, &frames)
}

struct QuerySpec {
    query: &'static str,
    category: QueryCategory,
    composite_dependent: bool,
    augmentation: Value,
    strictness: Option<(&'static str, bool)>,
    evidence: Box<dyn Fn(&Item) -> bool>,
    answer: &'static str,
    explanation: &'static str,
}

fn query_specs() -> Vec<QuerySpec> {
    let handle = |h: &'static str| -> Box<dyn Fn(&Item) -> bool> { Box::new(move |i| i.handle == h) };
    let prefix = |p: &'static str| -> Box<dyn Fn(&Item) -> bool> {
        Box::new(move |i| i.handle.starts_with(p))
    };
    vec![
        QuerySpec {
            query: "What is my driver's license number?",
            category: QueryCategory::DirectContent,
            composite_dependent: false,
            augmentation: json!({
                "declarative": "My driver's license number",
                "atomic_contexts": [{"category": "visual_elements", "value": "driver license"}]
            }),
            strictness: None,
            evidence: handle("license"),
            answer: "Your driver's license number is Y4821937.",
            explanation: "Read from the photo of your California driver license.",
        },
        QuerySpec {
            query: "How much did I spend at Blue Bottle Coffee?",
            category: QueryCategory::DirectContent,
            composite_dependent: false,
            augmentation: json!({
                "declarative": "The amount I spent at Blue Bottle Coffee",
                "atomic_contexts": [{"category": "visual_elements", "value": "receipt"}]
            }),
            strictness: None,
            evidence: handle("receipt"),
            answer: "You spent $11.50 at Blue Bottle Coffee.",
            explanation: "The receipt lists a New Orleans Iced and a Kyoto Cold Brew, total $11.50.",
        },
        QuerySpec {
            query: "What was the Wi-Fi password at the conference?",
            category: QueryCategory::DirectContent,
            composite_dependent: false,
            augmentation: json!({
                "declarative": "The Wi-Fi password at the conference",
                "atomic_contexts": [{"category": "visual_elements", "value": "wi-fi sign"}]
            }),
            strictness: None,
            evidence: handle("chi-wifi"),
            answer: "The conference Wi-Fi password was honolulu24.",
            explanation: "A sign at the convention center shows network CHI2024 with that password.",
        },
        QuerySpec {
            query: "How many times did I do cardio at the gym?",
            category: QueryCategory::Hybrid,
            composite_dependent: false,
            augmentation: json!({
                "declarative": "The times I did cardio at the gym",
                "atomic_contexts": [{"category": "environment", "value": "gym"}],
                "inferred_contexts": [
                    {"category": "activities", "value": "stairmaster workout"},
                    {"category": "visual_elements", "value": "stairmaster"}
                ]
            }),
            strictness: None,
            evidence: prefix("gym-"),
            answer: "You did cardio at the gym 18 times, each time on the stairmaster.",
            explanation: "Each session left a photo of the stairmaster console.",
        },
        QuerySpec {
            query: "What boba tea did I drink last week?",
            category: QueryCategory::ContextualFilter,
            composite_dependent: false,
            augmentation: json!({
                "declarative": "The boba tea I drank last week",
                "atomic_contexts": [{"category": "visual_elements", "value": "boba tea"}],
                "temporal_phrase": "last week"
            }),
            strictness: None,
            evidence: Box::new(|i| {
                i.habits.contains(&"boba")
                    && (date(6, 3)..=date(6, 9)).contains(&i.time.date_naive())
            }),
            answer: "Last week you had a brown sugar boba milk tea on June 4 and a taro milk tea with boba on June 7.",
            explanation: "Two boba photos fall between June 3 and June 9.",
        },
        QuerySpec {
            query: "What social events did I attend during CHI 2024?",
            category: QueryCategory::ContextualFilter,
            composite_dependent: true,
            augmentation: json!({
                "declarative": "The social events I attended during CHI 2024",
                "composite_contexts": [{"name": "CHI 2024", "phrase": "during CHI 2024"}],
                "inferred_contexts": [{"category": "activities", "value": "socializing"}]
            }),
            strictness: Some(("during CHI 2024", true)),
            evidence: prefix("chi-social-"),
            answer: "During CHI 2024 you went to the welcome reception, a seafood dinner with colleagues, a karaoke night and the closing party.",
            explanation: "Four of the conference photos show social gatherings.",
        },
        QuerySpec {
            query: "Show me photos from the lab retreat.",
            category: QueryCategory::ContextualFilter,
            composite_dependent: true,
            augmentation: json!({
                "declarative": "Photos from the lab retreat",
                "composite_contexts": [{"name": "Lab retreat", "phrase": "from the lab retreat"}]
            }),
            strictness: Some(("from the lab retreat", true)),
            evidence: prefix("lab-"),
            answer: "Here are the 15 photos from the lab retreat at Lake Tahoe, March 22 to 24.",
            explanation: "All photos of the lab retreat event.",
        },
        QuerySpec {
            query: "What did I eat on my trip to Hawaii?",
            category: QueryCategory::Hybrid,
            composite_dependent: true,
            augmentation: json!({
                "declarative": "The food I ate on my trip to Hawaii",
                "composite_contexts": [{"name": "Trip to Hawaii", "phrase": "on my trip to Hawaii"}],
                "inferred_contexts": [
                    {"category": "visual_elements", "value": "food"},
                    {"category": "activities", "value": "eating"}
                ]
            }),
            strictness: Some(("on my trip to Hawaii", true)),
            evidence: prefix("hawaii-food-"),
            answer: "On your trip to Hawaii you ate poke, rainbow shave ice, loco moco, malasadas, fish tacos and a kalua pork plate lunch.",
            explanation: "Six food photos were taken during the trip.",
        },
        QuerySpec {
            query: "What did I do to prepare for CHI 2024?",
            category: QueryCategory::ContextualFilter,
            composite_dependent: true,
            augmentation: json!({
                "declarative": "What I did to prepare for CHI 2024",
                "composite_contexts": [{"name": "CHI 2024", "phrase": "to prepare for CHI 2024"}]
            }),
            strictness: Some(("to prepare for CHI 2024", false)),
            evidence: Box::new(|i| i.handle == "registration" || i.handle == "rehearsal"),
            answer: "You registered for CHI 2024 on April 2 and rehearsed your talk on May 28.",
            explanation: "A registration email and a rehearsal video both mention the conference.",
        },
        QuerySpec {
            query: "Where did I go camping in June?",
            category: QueryCategory::ContextualFilter,
            composite_dependent: false,
            augmentation: json!({
                "declarative": "Where I went camping in June",
                "atomic_contexts": [{"category": "activities", "value": "camping"}],
                "temporal_phrase": "in June"
            }),
            strictness: None,
            evidence: Box::new(|i| {
                i.event == Some("yosemite") && i.time.date_naive() >= date(6, 1)
            }),
            answer: "In June you went camping in Yosemite Valley.",
            explanation: "The camping photos from June 1 and 2 are geotagged in Yosemite Valley.",
        },
        QuerySpec {
            query: "When is Maya's birthday?",
            category: QueryCategory::Hybrid,
            composite_dependent: false,
            augmentation: json!({
                "declarative": "The date of Maya's birthday",
                "atomic_contexts": [{"category": "people", "value": "Maya"}]
            }),
            strictness: None,
            evidence: handle("bday-cake"),
            answer: "Maya's birthday is on April 5.",
            explanation: "The cake reading Happy Birthday Maya was photographed on April 5.",
        },
        QuerySpec {
            query: "What was the title of the talk I rehearsed?",
            category: QueryCategory::DirectContent,
            composite_dependent: false,
            augmentation: json!({
                "declarative": "The title of the talk I rehearsed",
                "inferred_contexts": [{"category": "activities", "value": "rehearsing a talk"}]
            }),
            strictness: None,
            evidence: handle("rehearsal"),
            answer: "The talk you rehearsed is titled \"Memory Lanes: Visualizing Personal Timelines\".",
            explanation: "Heard in the rehearsal video.",
        },
    ]
}

fn pair(ids: &BTreeMap<&str, String>, items: &BTreeMap<&str, &Item>, a: &str, b: &str) -> PlantedPair {
    let tags = |h: &str| items[h].tags.clone().expect("pair members carry explicit tags");
    let (ta, tb) = (tags(a), tags(b));
    PlantedPair {
        first: ids[a].clone(),
        second: ids[b].clone(),
        first_tags: ta.len(),
        second_tags: tb.len(),
        shared_tags: ta.iter().filter(|t| tb.contains(t)).count(),
    }
}

/// Everything the generator produces, in memory.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub records: Vec<SidecarRecord>,
    /// Path relative to the corpus root → bytes.
    pub files: BTreeMap<String, Vec<u8>>,
    pub media: BTreeMap<String, MediaFixture>,
    pub rules: Rules,
    pub chat_fixtures: BTreeMap<SchemaId, Vec<FixtureEntry>>,
    pub truth: Truth,
}

pub fn build() -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut items = planted_items(&mut rng);
    items.sort_by(|a, b| (a.time, &a.handle).cmp(&(b.time, &b.handle)));

    let ids: BTreeMap<&str, String> = items
        .iter()
        .enumerate()
        .map(|(n, item)| {
            let prefix = match item.kind {
                MediaKind::Photo => "P",
                MediaKind::Screenshot => "S",
                MediaKind::Video => "V",
            };
            (item.handle.as_str(), format!("{prefix}-{:03}", n + 1))
        })
        .collect();
    assert_eq!(ids.len(), items.len(), "planted handles must be unique");
    let by_handle: BTreeMap<&str, &Item> = items.iter().map(|i| (i.handle.as_str(), i)).collect();

    let mut records = Vec::new();
    let mut files = BTreeMap::new();
    let mut media = BTreeMap::new();
    let mut vectors = Vec::new();
    for item in &items {
        let id = &ids[item.handle.as_str()];
        let (ext, bytes) = match item.kind {
            MediaKind::Video => ("mqv", video(item.shot.caption, id, 30_000)),
            _ => ("png", thumbnail(item.shot.caption, id)),
        };
        let media_path = format!("media/{id}.{ext}");
        files.insert(media_path.clone(), bytes);
        records.push(SidecarRecord {
            id: id.clone(),
            kind: item.kind,
            media_path,
            capture_time: Some(item.time.to_rfc3339_opts(SecondsFormat::Secs, true)),
            lat: item.place.map(|p| p.lat),
            lon: item.place.map(|p| p.lon),
            address: item.place.map(|p| p.address.to_string()),
            caption: None,
            visible_text: None,
            transcript: None,
        });
        let tags = if item.kind.is_still() {
            visual_tags(item, id)
        } else {
            Vec::new()
        };
        if item.kind.is_still() {
            vectors.push((item.handle.as_str(), image_vector(&tags)));
        }
        let strings = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        media.insert(
            id.clone(),
            MediaFixture {
                caption: Some(item.shot.caption.to_string()),
                visible_text: item.visible_text.clone(),
                transcript: item.transcript.clone(),
                visual_tags: tags,
                annotation: Some(AtomicContextsResponse {
                    people: strings(item.shot.people),
                    visual_elements: strings(item.shot.visual),
                    environment: strings(item.shot.environment),
                    activities: strings(item.shot.activities),
                    composite_mentions: strings(&item.mentions),
                }),
                event: item.event.map(str::to_string),
                habits: strings(&item.habits),
            },
        );
    }

    // The planted pairs must sit on the intended side of the threshold and
    // nothing else may come close.
    let planted = [("turtle", "turtle-burst", true), ("acai", "acai-burst", true), ("halfdome", "halfdome-meadow", false)];
    for (i, (ha, va)) in vectors.iter().enumerate() {
        for (hb, vb) in &vectors[i + 1..] {
            let cos = va.cosine(vb);
            match planted.iter().find(|(a, b, _)| (a, b) == (ha, hb) || (a, b) == (hb, ha)) {
                Some((_, _, merge)) => assert_eq!(cos > DEDUP_THRESHOLD, *merge, "{ha}/{hb}: {cos}"),
                None => assert!(cos <= 0.8, "accidental near-duplicate {ha}/{hb}: {cos}"),
            }
        }
    }
    let duplicates: BTreeSet<&str> = planted
        .iter()
        .filter(|p| p.2)
        .map(|p| p.1)
        .collect();

    let specs = event_specs();
    let rules = Rules {
        events: specs
            .iter()
            .map(|s| {
                (
                    s.tag.to_string(),
                    EventRule {
                        name: s.name.to_string(),
                        location: Some(s.location.to_string()),
                        importance: i64::from(s.importance),
                    },
                )
            })
            .collect(),
        habits: [("gym", GYM_STATEMENT), ("boba", BOBA_STATEMENT), ("birthday", BIRTHDAY_STATEMENT)]
            .into_iter()
            .map(|(tag, statement)| {
                (
                    tag.to_string(),
                    HabitRule {
                        statement: statement.to_string(),
                        min_support: 1,
                    },
                )
            })
            .collect(),
    };

    let live = |i: &&Item| !duplicates.contains(i.handle.as_str());
    let events = specs
        .iter()
        .map(|s| {
            let members: Vec<String> = items
                .iter()
                .filter(live)
                .filter(|i| i.event == Some(s.tag) || i.mentions.contains(&s.name))
                .map(|i| ids[i.handle.as_str()].clone())
                .collect();
            let mention_ids = items
                .iter()
                .filter(|i| i.event != Some(s.tag) && i.mentions.contains(&s.name))
                .map(|i| ids[i.handle.as_str()].clone())
                .collect();
            PlantedEvent {
                tag: s.tag.to_string(),
                name: s.name.to_string(),
                start_date: s.start,
                end_date: s.end,
                location: Some(s.location.to_string()),
                importance: s.importance,
                memory_ids: members,
                mention_ids,
            }
        })
        .collect();

    let knowledge = [("gym", GYM_STATEMENT), ("boba", BOBA_STATEMENT), ("birthday", BIRTHDAY_STATEMENT)]
        .into_iter()
        .map(|(tag, statement)| PlantedKnowledge {
            statement: statement.to_string(),
            memory_ids: items
                .iter()
                .filter(live)
                .filter(|i| i.habits.contains(&tag))
                .map(|i| ids[i.handle.as_str()].clone())
                .collect(),
        })
        .collect();

    let mut chat_fixtures: BTreeMap<SchemaId, Vec<FixtureEntry>> = BTreeMap::new();
    let mut entry = |schema: SchemaId, key: &str, response: Value| {
        chat_fixtures.entry(schema).or_default().push(FixtureEntry {
            key: Some(key.to_string()),
            payload: None,
            response,
        });
    };
    let timelapse = by_handle["timelapse"];
    entry(
        SchemaId::TranscriptValidation,
        &format!(
            "{}\n{}",
            timelapse.shot.caption,
            timelapse.transcript.as_deref().unwrap_or_default()
        ),
        json!({"keep": false}),
    );
    let mut queries = Vec::new();
    for spec in query_specs() {
        let evidence: Vec<String> = items
            .iter()
            .filter(live)
            .filter(|i| (spec.evidence)(i))
            .map(|i| ids[i.handle.as_str()].clone())
            .collect();
        assert!(!evidence.is_empty(), "query {:?} has no evidence", spec.query);
        entry(SchemaId::QueryAugmentation, spec.query, spec.augmentation.clone());
        if let Some((phrase, strict)) = spec.strictness {
            entry(SchemaId::TemporalStrictness, phrase, json!({"strict": strict}));
        }
        entry(
            SchemaId::Answer,
            spec.query,
            json!({"answer": spec.answer, "explanation": spec.explanation, "memory_ids": evidence}),
        );
        queries.push(PlantedQuery {
            query: spec.query.to_string(),
            category: spec.category,
            composite_dependent: spec.composite_dependent,
            evidence,
            answer: spec.answer.to_string(),
        });
    }

    let handles = items
        .iter()
        .filter(|i| !i.handle.starts_with("life-"))
        .map(|i| (i.handle.clone(), ids[i.handle.as_str()].clone()))
        .collect();
    let truth = Truth {
        seed: SEED,
        reference_time: reference_time(),
        first_day: first_day(),
        last_day: last_day(),
        memory_count: items.len(),
        handles,
        events,
        dedup: PlantedDedup {
            merged: vec![
                pair(&ids, &by_handle, "turtle", "turtle-burst"),
                pair(&ids, &by_handle, "acai", "acai-burst"),
            ],
            kept: vec![pair(&ids, &by_handle, "halfdome", "halfdome-meadow")],
        },
        knowledge,
        queries,
    };

    PlantedCorpus {
        records,
        files,
        media,
        rules,
        chat_fixtures,
        truth,
    }
}

fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("fixtures serialize");
    s.push('\n');
    s
}

impl PlantedCorpus {
    /// Writes `corpus/` (manifest and media), `scripted/` (backend
    /// fixtures) and `truth.json` under `out`.
    pub fn write(&self, out: &Path) -> io::Result<()> {
        let corpus = out.join(CORPUS_DIR);
        let scripted = out.join(SCRIPTED_DIR);
        fs::create_dir_all(corpus.join("media"))?;
        fs::create_dir_all(&scripted)?;
        let mut manifest = String::new();
        for r in &self.records {
            manifest.push_str(&serde_json::to_string(r).expect("records serialize"));
            manifest.push('\n');
        }
        fs::write(corpus.join(MANIFEST_FILE), manifest)?;
        for (path, bytes) in &self.files {
            fs::write(corpus.join(path), bytes)?;
        }
        fs::write(scripted.join("media.json"), pretty(&self.media))?;
        fs::write(scripted.join("rules.json"), pretty(&self.rules))?;
        for (schema, entries) in &self.chat_fixtures {
            fs::write(scripted.join(format!("{}.json", schema.as_str())), pretty(entries))?;
        }
        fs::write(out.join(TRUTH_FILE), pretty(&self.truth))
    }
}

/// Builds the corpus and writes it under `out`.
pub fn generate(out: &Path) -> io::Result<Truth> {
    let corpus = build();
    corpus.write(out)?;
    Ok(corpus.truth)
}
