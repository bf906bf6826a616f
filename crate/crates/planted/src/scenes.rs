//! Content tables for the planted corpus.

/// What a still shows, as the scripted caption and annotation models
/// will report it.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    pub caption: &'static str,
    pub people: &'static [&'static str],
    pub visual: &'static [&'static str],
    pub environment: &'static [&'static str],
    pub activities: &'static [&'static str],
}

const fn shot(
    caption: &'static str,
    people: &'static [&'static str],
    visual: &'static [&'static str],
    environment: &'static [&'static str],
    activities: &'static [&'static str],
) -> Shot {
    Shot {
        caption,
        people,
        visual,
        environment,
        activities,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Place {
    pub address: &'static str,
    pub lat: f64,
    pub lon: f64,
}

pub const BERKELEY: Place = Place {
    address: "Berkeley, CA",
    lat: 37.8716,
    lon: -122.2727,
};
pub const GYM: Place = Place {
    address: "Recreational Sports Facility, Berkeley, CA",
    lat: 37.8685,
    lon: -122.2625,
};
pub const TAHOE: Place = Place {
    address: "South Lake Tahoe, CA",
    lat: 38.9399,
    lon: -119.9772,
};
pub const OAKLAND: Place = Place {
    address: "Oakland, CA",
    lat: 37.8044,
    lon: -122.2712,
};
pub const KONA: Place = Place {
    address: "Kailua-Kona, HI",
    lat: 19.6400,
    lon: -155.9969,
};
pub const VOLCANO: Place = Place {
    address: "Volcano, HI",
    lat: 19.4194,
    lon: -155.2885,
};
pub const PAIA: Place = Place {
    address: "Paia, HI",
    lat: 20.9036,
    lon: -156.3694,
};
pub const CONVENTION_CENTER: Place = Place {
    address: "Hawai'i Convention Center, Honolulu, HI",
    lat: 21.2903,
    lon: -157.8375,
};
pub const YOSEMITE: Place = Place {
    address: "Yosemite Valley, CA",
    lat: 37.7456,
    lon: -119.5936,
};
pub const GREEK_THEATRE: Place = Place {
    address: "Greek Theatre, Berkeley, CA",
    lat: 37.8736,
    lon: -122.2544,
};

pub const EVERYDAY: [Shot; 15] = [
    shot("A latte with leaf art on a cafe table", &[], &["latte", "cafe table"], &["cafe", "indoor"], &["drinking coffee"]),
    shot("A laptop and a notebook on a desk", &[], &["laptop", "notebook"], &["office", "indoor"], &["working"]),
    shot("A tree-lined street with parked cars", &[], &["trees", "parked cars"], &["street", "outdoor"], &["walking"]),
    shot("A golden retriever chasing a ball in a park", &[], &["dog", "ball"], &["park", "outdoor"], &["playing fetch"]),
    shot("A bowl of pasta with tomato sauce", &[], &["pasta", "tomato sauce"], &["kitchen", "indoor"], &["cooking"]),
    shot("A whiteboard covered in diagrams", &[], &["whiteboard", "diagrams"], &["meeting room", "indoor"], &["brainstorming"]),
    shot("A bicycle locked to a rack", &[], &["bicycle", "bike rack"], &["sidewalk", "outdoor"], &["commuting"]),
    shot("Shelves of used books in a bookstore", &[], &["books", "shelves"], &["bookstore", "indoor"], &["browsing books"]),
    shot("Crates of strawberries at a farmers market", &[], &["strawberries", "crates"], &["market", "outdoor"], &["shopping"]),
    shot("A potted monstera by a sunny window", &[], &["monstera", "window"], &["apartment", "indoor"], &[]),
    shot("Fog rolling over the hills at dusk", &[], &["fog", "hills"], &["hillside", "outdoor"], &["sightseeing"]),
    shot("Friends playing a board game at a kitchen table", &["friends"], &["board game", "cards"], &["apartment", "indoor"], &["playing games"]),
    shot("A slice of pepperoni pizza on a paper plate", &[], &["pizza", "paper plate"], &["pizzeria", "indoor"], &["eating"]),
    shot("Sailboats moored at the marina", &[], &["sailboats", "docks"], &["marina", "outdoor"], &["walking"]),
    shot("A shopping cart full of groceries", &[], &["groceries", "shopping cart"], &["supermarket", "indoor"], &["grocery shopping"]),
];

pub const LAB_RETREAT: [[Shot; 5]; 3] = [
    [
        shot("Lab members unloading bags at a lakeside cabin", &["lab members"], &["cabin", "duffel bags"], &["lakeside", "outdoor"], &["arriving"]),
        shot("A snowy pine forest along the shoreline", &[], &["pine trees", "snow"], &["forest", "outdoor"], &["sightseeing"]),
        shot("A cabin living room with a lit fireplace", &[], &["fireplace", "sofa"], &["cabin", "indoor"], &["relaxing"]),
        shot("Lab members cooking chili in the cabin kitchen", &["lab members"], &["chili pot", "stove"], &["cabin kitchen", "indoor"], &["cooking"]),
        shot("A whiteboard listing research goals for the quarter", &[], &["whiteboard", "goal list"], &["cabin", "indoor"], &["planning research"]),
    ],
    [
        shot("Lab members snowshoeing across a frozen meadow", &["lab members"], &["snowshoes", "meadow"], &["mountains", "outdoor"], &["snowshoeing"]),
        shot("A group photo of the lab in front of Emerald Bay", &["lab members"], &["bay", "group"], &["lakeside", "outdoor"], &["posing for a photo"]),
        shot("Sunlight on the granite peaks above the lake", &[], &["granite peaks", "lake"], &["mountains", "outdoor"], &["sightseeing"]),
        shot("A brainstorming session with sticky notes on the wall", &["lab members"], &["sticky notes", "wall"], &["cabin", "indoor"], &["brainstorming"]),
        shot("Lab members roasting marshmallows around a fire pit", &["lab members"], &["marshmallows", "fire pit"], &["campfire", "outdoor"], &["roasting marshmallows"]),
    ],
    [
        shot("Clear blue water at the edge of the lake", &[], &["clear water", "pebbles"], &["lakeside", "outdoor"], &["sightseeing"]),
        shot("Lab members packing the cars in the morning", &["lab members"], &["cars", "luggage"], &["driveway", "outdoor"], &["packing"]),
        shot("A pancake breakfast on the cabin table", &[], &["pancakes", "maple syrup"], &["cabin", "indoor"], &["having breakfast"]),
        shot("A paddleboard leaning against the dock", &[], &["paddleboard", "dock"], &["lakeside", "outdoor"], &[]),
        shot("A last group selfie by the lake", &["lab members"], &["selfie", "lake"], &["lakeside", "outdoor"], &["posing for a photo"]),
    ],
];

pub const BIRTHDAY_CAKE: Shot = shot(
    "A chocolate cake with lit candles",
    &["Maya"],
    &["chocolate cake", "candles"],
    &["backyard", "outdoor"],
    &["celebrating a birthday"],
);

pub const BIRTHDAY: [Shot; 6] = [
    shot("Maya blowing out her birthday candles", &["Maya"], &["candles", "cake"], &["backyard", "outdoor"], &["celebrating a birthday"]),
    shot("Friends toasting with glasses of wine", &["Maya", "friends"], &["wine glasses"], &["backyard", "outdoor"], &["toasting"]),
    shot("A table of wrapped presents", &[], &["presents", "ribbons"], &["backyard", "outdoor"], &["celebrating a birthday"]),
    shot("Maya opening a gift of a watercolor set", &["Maya"], &["watercolor set", "wrapping paper"], &["backyard", "outdoor"], &["opening presents"]),
    shot("String lights over a backyard patio", &[], &["string lights", "patio"], &["backyard", "outdoor"], &[]),
    shot("A group photo of everyone at the party", &["Maya", "friends"], &["group", "balloons"], &["backyard", "outdoor"], &["posing for a photo"]),
];

pub const HAWAII_SIGHTS: [Shot; 14] = [
    shot("A view of the ocean from a hotel lanai", &[], &["ocean", "lanai"], &["hotel", "outdoor"], &["relaxing"]),
    shot("Snorkeling above a coral reef", &[], &["coral reef", "fish"], &["ocean", "underwater"], &["snorkeling"]),
    shot("A lava field stretching to the horizon", &[], &["lava field"], &["volcanic landscape", "outdoor"], &["hiking"]),
    shot("Palm trees along a white sand beach", &[], &["palm trees", "white sand"], &["beach", "outdoor"], &["walking"]),
    shot("A rainbow over green cliffs", &[], &["rainbow", "cliffs"], &["coast", "outdoor"], &["sightseeing"]),
    shot("Steam rising from a volcanic crater", &[], &["steam", "crater"], &["volcanic landscape", "outdoor"], &["hiking"]),
    shot("Surfers waiting for a wave", &[], &["surfers", "waves"], &["beach", "outdoor"], &["watching surfers"]),
    shot("A waterfall in a rainforest", &[], &["waterfall", "ferns"], &["rainforest", "outdoor"], &["hiking"]),
    shot("A sunset over the Pacific with sailboats", &[], &["sunset", "sailboats"], &["coast", "outdoor"], &["watching the sunset"]),
    shot("A winding coastal road through the jungle", &[], &["road", "jungle"], &["coast", "outdoor"], &["driving"]),
    shot("Tide pools on a rocky shore", &[], &["tide pools", "rocks"], &["coast", "outdoor"], &["exploring"]),
    shot("A hammock between two palm trees", &[], &["hammock", "palm trees"], &["beach", "outdoor"], &["relaxing"]),
    shot("A telescope dome under a starry sky", &[], &["telescope dome", "stars"], &["summit", "outdoor"], &["stargazing"]),
    shot("A rental jeep parked at a scenic lookout", &[], &["jeep", "lookout"], &["coast", "outdoor"], &["driving"]),
];

/// The trip's food photos, by day offset from the first day of the trip.
pub const HAWAII_FOOD: [(i64, Shot); 6] = [
    (1, shot("A plate of poke with rice and seaweed salad", &[], &["food", "poke", "rice"], &["restaurant", "outdoor"], &["eating"])),
    (3, shot("Shave ice in rainbow flavors", &[], &["food", "shave ice"], &["beach", "outdoor"], &["eating"])),
    (6, shot("Loco moco with a fried egg and gravy", &[], &["food", "loco moco", "fried egg"], &["diner", "indoor"], &["eating"])),
    (8, shot("Fresh malasadas in a paper bag", &[], &["food", "malasadas"], &["bakery", "indoor"], &["eating"])),
    (11, shot("Fish tacos with mango salsa", &[], &["food", "fish tacos"], &["food truck", "outdoor"], &["eating"])),
    (14, shot("A kalua pork plate lunch with macaroni salad", &[], &["food", "kalua pork", "macaroni salad"], &["restaurant", "outdoor"], &["eating"])),
];

pub const SEA_TURTLE: Shot = shot(
    "A sea turtle resting on a black sand beach",
    &[],
    &["sea turtle", "black sand"],
    &["beach", "outdoor"],
    &["wildlife watching"],
);

/// Social events, by day offset from the first conference day.
pub const CHI_SOCIAL: [(i64, Shot); 4] = [
    (0, shot("Researchers mingling at the welcome reception", &["colleagues"], &["name badges", "drinks"], &["ballroom", "indoor"], &["socializing"])),
    (2, shot("A long dinner table with colleagues at a seafood restaurant", &["colleagues"], &["seafood", "dinner table"], &["restaurant", "indoor"], &["socializing", "having dinner"])),
    (3, shot("Colleagues singing at a karaoke night", &["colleagues"], &["microphone", "lyrics screen"], &["karaoke bar", "indoor"], &["socializing", "singing karaoke"])),
    (5, shot("A dance floor at the closing party", &["colleagues"], &["dance floor", "disco lights"], &["ballroom", "indoor"], &["socializing", "dancing"])),
];

pub const CHI_SESSIONS: [Shot; 12] = [
    shot("A packed lecture hall during a paper session", &["attendees"], &["lecture hall", "projector screen"], &["convention center", "indoor"], &["attending a talk"]),
    shot("A poster hall with rows of research posters", &["attendees"], &["posters"], &["exhibit hall", "indoor"], &["viewing posters"]),
    shot("A conference badge on a lanyard", &[], &["badge", "lanyard"], &["convention center", "indoor"], &[]),
    shot("A demo booth with a virtual reality headset", &["attendees"], &["vr headset", "demo booth"], &["exhibit hall", "indoor"], &["trying a demo"]),
    shot("A coffee break crowd in the convention center lobby", &["attendees"], &["coffee cups", "crowd"], &["lobby", "indoor"], &["networking"]),
    shot("Slides about accessible interfaces projected on a screen", &[], &["slides", "projector screen"], &["lecture hall", "indoor"], &["attending a talk"]),
    shot("The convention center rooftop garden", &[], &["rooftop garden", "palm trees"], &["rooftop", "outdoor"], &[]),
    shot("A program booklet open to the schedule", &[], &["program booklet"], &["convention center", "indoor"], &["planning the day"]),
    shot("A student volunteer table stacked with t-shirts", &["student volunteers"], &["t-shirts", "table"], &["convention center", "indoor"], &[]),
    shot("A panel of researchers on stage", &["panelists"], &["stage", "microphones"], &["auditorium", "indoor"], &["attending a panel"]),
    shot("A hallway conversation by the escalators", &["colleagues"], &["escalators"], &["convention center", "indoor"], &["chatting"]),
    shot("Sunset over Waikiki after the sessions", &[], &["sunset", "skyline"], &["beach", "outdoor"], &["watching the sunset"]),
];

pub const CHI_WIFI: Shot = shot(
    "A sign with the conference Wi-Fi details",
    &[],
    &["wi-fi sign", "easel"],
    &["convention center", "indoor"],
    &[],
);

pub const CHI_KEYNOTE: Shot = shot(
    "A speaker giving the opening keynote on a large stage",
    &["keynote speaker"],
    &["stage", "large screen"],
    &["auditorium", "indoor"],
    &["attending a keynote"],
);

pub const YOSEMITE_DAYS: [[Shot; 5]; 3] = [
    [
        shot("A tent pitched under tall pines", &[], &["tent", "pine trees"], &["campground", "outdoor"], &["camping", "pitching a tent"]),
        shot("A campfire with a pot of beans", &[], &["campfire", "cooking pot"], &["campground", "outdoor"], &["camping", "cooking"]),
        shot("A picnic table at the campsite", &[], &["picnic table", "lantern"], &["campground", "outdoor"], &["camping"]),
        shot("El Capitan glowing at dusk", &[], &["el capitan", "granite wall"], &["valley", "outdoor"], &["camping", "sightseeing"]),
        shot("Stars over the valley walls", &[], &["stars", "cliffs"], &["valley", "outdoor"], &["camping", "stargazing"]),
    ],
    [
        // Slots 0 and 1 are the two Half Dome shots.
        shot("Half Dome at sunrise", &[], &["half dome", "sunrise"], &["valley", "outdoor"], &["camping", "sightseeing"]),
        shot("Half Dome at sunrise from the meadow", &[], &["half dome", "meadow"], &["valley", "outdoor"], &["camping", "sightseeing"]),
        shot("A trail winding up to Vernal Fall", &[], &["trail", "waterfall"], &["forest", "outdoor"], &["camping", "hiking"]),
        shot("Mist from the waterfall over stone stairs", &[], &["mist", "stone stairs"], &["forest", "outdoor"], &["camping", "hiking"]),
        shot("Hikers resting on a granite ledge", &["hikers"], &["granite ledge", "backpacks"], &["mountains", "outdoor"], &["camping", "hiking"]),
    ],
    [
        shot("Packing up the tent in the morning", &[], &["tent", "sleeping bags"], &["campground", "outdoor"], &["camping", "packing"]),
        shot("A black bear crossing the meadow", &[], &["black bear", "meadow"], &["valley", "outdoor"], &["camping", "wildlife watching"]),
        shot("Cliffs reflected in the Merced River", &[], &["river", "reflection"], &["valley", "outdoor"], &["camping", "sightseeing"]),
        shot("A cup of camp coffee on a log", &[], &["enamel mug", "log"], &["campground", "outdoor"], &["camping", "drinking coffee"]),
        shot("The valley seen from Tunnel View", &[], &["valley view", "waterfall"], &["lookout", "outdoor"], &["camping", "sightseeing"]),
    ],
];

pub const GRADUATION: [Shot; 8] = [
    shot("Graduates in caps and gowns lining up", &["graduates"], &["caps", "gowns"], &["campus", "outdoor"], &["attending a graduation"]),
    shot("A diploma in a blue folder", &[], &["diploma", "folder"], &["campus", "outdoor"], &[]),
    shot("Family posing with the graduate", &["family"], &["gown", "flowers"], &["campus", "outdoor"], &["posing for a photo"]),
    shot("Caps tossed into the air", &["graduates"], &["caps", "sky"], &["amphitheater", "outdoor"], &["celebrating"]),
    shot("The stage at the Greek Theatre", &[], &["stage", "banners"], &["amphitheater", "outdoor"], &["attending a graduation"]),
    shot("A bouquet of sunflowers", &[], &["sunflowers", "bouquet"], &["campus", "outdoor"], &[]),
    shot("Celebration lunch with family", &["family"], &["lunch", "champagne"], &["restaurant", "indoor"], &["celebrating", "having lunch"]),
    shot("A selfie in cap and gown", &[], &["selfie", "cap"], &["campus", "outdoor"], &["posing for a photo"]),
];

pub const STAIRMASTER: Shot = shot(
    "A stairmaster console after a workout",
    &[],
    &["stairmaster", "console display"],
    &["gym", "indoor"],
    &["stairmaster workout"],
);

pub const BOBA: [Shot; 3] = [
    shot("A cup of brown sugar boba milk tea", &[], &["boba milk tea", "plastic cup"], &["tea shop", "indoor"], &["drinking boba"]),
    shot("A taro milk tea with boba pearls", &[], &["boba milk tea", "plastic cup"], &["tea shop", "indoor"], &["drinking boba"]),
    shot("A jasmine green milk tea with boba", &[], &["boba milk tea", "plastic cup"], &["tea shop", "indoor"], &["drinking boba"]),
];

pub const LICENSE: Shot = shot(
    "A California driver license lying on a wooden table",
    &[],
    &["driver license", "wooden table"],
    &["home", "indoor"],
    &[],
);

pub const RECEIPT: Shot = shot(
    "A paper receipt next to an iced coffee",
    &[],
    &["receipt", "iced coffee"],
    &["cafe", "indoor"],
    &["buying coffee"],
);

pub const ACAI: Shot = shot(
    "A bowl of acai topped with granola and banana",
    &[],
    &["acai bowl", "granola"],
    &["kitchen", "indoor"],
    &["having breakfast"],
);

pub const BLANK_WALL: Shot = shot("A blank white wall", &[], &[], &[], &[]);

pub const TIMELAPSE: Shot = shot(
    "A timelapse of clouds drifting over the bay",
    &[],
    &["clouds", "bay"],
    &["waterfront", "outdoor"],
    &[],
);

pub const REGISTRATION: Shot = shot(
    "A screenshot of a registration confirmation email",
    &[],
    &["email", "phone screen"],
    &[],
    &["registering for a conference"],
);

pub const REHEARSAL: Shot = shot(
    "A person rehearsing a talk in front of projected slides",
    &[],
    &["slides", "projector"],
    &["office", "indoor"],
    &["rehearsing a talk"],
);
