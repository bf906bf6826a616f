//! System instructions for each chat schema. The JSON keys named here are
//! the contract the schema types in [`super::schema`] parse.

pub const ATOMIC_CONTEXTS: &str = "\
You annotate one captured memory (a photo, screenshot or video) using its caption, \
visible text and transcript. List the people present as short role descriptions \
(for example \"me\", \"a man in a red shirt\"), the notable visual elements as short \
noun phrases, the environment the user is most likely in, and the activities the \
user is most likely doing. Separately list any phrases that name a multi-memory \
event such as a conference, a trip or a ceremony (for example \"CHI 2024\"); a \
single action like \"a workout session\" is an activity, not an event. Do not infer \
emotions. Output a JSON object with the keys 'people', 'visual_elements', \
'environment', 'activities' and 'composite_mentions', each a list of strings.";

pub const COMPOSITE_CONTEXTS: &str = "\
You receive the structured memories captured within one time window. Identify \
composite contexts: named events that combine time, place, people, objects, \
environment and activities across several memories. Evidence can be explicit \
(text announcing an event) or implicit (a run of photos in a new city suggests \
travel). Prefer significant events such as trips, conferences, ceremonies and \
important meetings over trivial moments. Link each event to the memory ids that \
belong to it by time, by place, or because they mention it. Rate importance 1 to 3: \
3 for major or multi-day events, 2 for moderately important ones, 1 for minor ones.\n\
Examples of event names: \"An academic conference\", \"Trip to Salt Lake City\", \
\"Location changed from Seattle to Irvine\", \"Camping trip\", \"Birthday celebration\", \
\"Graduation ceremony\".\n\
Output a JSON object with the key 'composite_context' holding a list of objects with \
the keys 'event_name' (specific and short), 'memory_ids' (list), 'start_date' and \
'end_date' (YYYY-MM-DD, equal for single-day events), 'location', 'is_multi_days' \
and 'importance'.";

pub const KNOWLEDGE: &str = "\
You receive the structured memories of one time window together with the composite \
contexts found in it. Infer durable facts about the user: habits, preferences, \
relationships, recurring dates. Skip details that only describe a single photo. \
Each statement must be a complete sentence that makes sense on its own without \
the media. For every statement, list the ids of the memories that best support it. \
Output a JSON object with the key 'knowledge' holding a list of objects with the keys \
'knowledge' and 'memory_ids' (list).";

pub const QUERY_AUGMENTATION: &str = "\
You prepare a question about the user's own photos, screenshots and videos for \
retrieval. (1) Rewrite it as a declarative phrase. (2) Extract the contextual \
filters it states explicitly: atomic contexts (temporal, geographical, people, \
visual_elements, environment, activities) and composite contexts (named events). \
Only explicit relative times such as \"last week\" or \"in April\" count as the \
temporal phrase; \"during CHI 2024\" refers to an event and is a composite context. \
(3) Infer related atomic contexts that are not stated but would help find relevant \
memories. Output a JSON object with the keys 'declarative', 'atomic_contexts' and \
'inferred_contexts' (lists of {'category', 'value'}), 'composite_contexts' (list of \
{'name', 'phrase'} where phrase is the query wording around the event) and \
'temporal_phrase' (string or null).";

pub const TEMPORAL_STRICTNESS: &str = "\
Decide whether the phrase restricts results to the time the named event took place \
(\"during CHI 2024\", \"at my graduation\") or merely asks for things related to the \
event wherever they fall in time (\"photos related to CHI 2024\"). Output a JSON \
object with the boolean key 'strict'.";

pub const TRANSCRIPT_VALIDATION: &str = "\
Speech-to-text models sometimes invent phrases for clips without speech. Given the \
caption of a video and its transcript, decide whether the transcript plausibly \
reflects real speech in that clip. Output a JSON object with the boolean key 'keep'.";

pub const ANSWER: &str = "\
Answer the user's question using the retrieved personal knowledge and memories. \
Reason step by step over the memories, which are ordered by capture time, and \
identify the ones that serve as evidence. When the memories do not state the answer \
directly, make a reasonable inference and say so. Output a JSON object with the keys \
'answer' (string), 'explanation' (string) and 'memory_ids' (list of the evidence \
memory ids).";
