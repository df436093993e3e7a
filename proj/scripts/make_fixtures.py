#!/usr/bin/env python3
"""Regenerates the bundled fixture data under data/.

Everything is seeded, so reruns reproduce the committed files byte for byte.
The golden outputs under data/golden/ are produced separately by running the
pipeline over these fixtures (see README).
"""

import hashlib
import json
import random
from datetime import datetime, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
FIXTURES = DATA / "fixtures"

SEED = 20250809


# ---------------------------------------------------------------------------
# Taxonomy: 27 top-level categories with representative leaves.

TAXONOMY = {
    "Adult": ["Adult Content"],
    "Arts & Entertainment": ["Music", "Movies", "Comics & Animation", "Performing Arts",
                             "TV Shows & Programs"],
    "Autos & Vehicles": ["Motor Vehicles", "Bicycles & Accessories", "Vehicle Repair"],
    "Beauty & Fitness": ["Fitness", "Hair Care", "Spas & Wellness"],
    "Books & Literature": ["E-Books", "Poetry", "Writers Resources"],
    "Business & Industrial": ["Advertising & Marketing", "Small Business", "Manufacturing"],
    "Computers & Electronics": ["Programming", "Programming/Java", "Programming/Python",
                                "Web Development", "Development Tools", "Scripting Languages",
                                "Open Source", "Database Management", "Operating Systems",
                                "Network Security", "Hacking & Cracking", "Machine Learning",
                                "Business Software", "Consumer Electronics"],
    "Finance": ["Investing", "Banking", "Insurance"],
    "Food & Drink": ["Cooking & Recipes", "Coffee & Tea", "Restaurants"],
    "Games": ["Board Games", "Board Games/Chess", "Video Games", "Puzzles & Brainteasers",
              "Tabletop Role-Playing"],
    "Health": ["Nutrition", "Mental Health", "Public Health"],
    "Hobbies & Leisure": ["Crafts", "Photography", "Birdwatching", "Model Trains"],
    "Home & Garden": ["Gardening", "Home Improvement", "Interior Decor"],
    "Internet & Telecom": ["Cloud Services", "Web Services", "Email & Messaging",
                           "Mobile & Wireless", "Search Engines"],
    "Jobs & Education": ["Colleges & Universities", "Jobs", "Distance Learning",
                         "Professional Training"],
    "Law & Government": ["Courts & Judiciary", "Public Policy", "Visa & Immigration"],
    "News": ["Business News", "Technology News", "Local News"],
    "Online Communities": ["Forums", "Social Networks", "Blogging Resources",
                           "Photo & Video Sharing"],
    "People & Society": ["Family & Relationships", "Social Sciences", "Seniors & Retirement"],
    "Pets & Animals": ["Dogs", "Cats", "Aquaria"],
    "Real Estate": ["Apartments & Rentals", "Home Buying"],
    "Reference": ["Dictionaries & Encyclopedias", "Maps", "How-To, DIY, & Expert Content"],
    "Science": ["Astronomy", "Physics", "Biology", "Mathematics", "Engineering"],
    "Sensitive Subjects": ["Emergency Services"],
    "Shopping": ["Coupons & Discounts", "Consumer Reviews"],
    "Sports": ["Team Sports", "Running & Walking", "Cycling", "Climbing & Mountaineering"],
    "Travel": ["Outdoor Recreation", "Air Travel", "Hotels & Accommodations", "City Guides"],
}

LEXICON = {
    # professional
    "compiler": "/Computers & Electronics/Programming",
    "refactoring": "/Computers & Electronics/Programming",
    "java": "/Computers & Electronics/Programming/Java",
    "jvm": "/Computers & Electronics/Programming/Java",
    "python": "/Computers & Electronics/Programming/Python",
    "frontend": "/Computers & Electronics/Web Development",
    "webpack": "/Computers & Electronics/Web Development",
    "css": "/Computers & Electronics/Web Development",
    "debugger": "/Computers & Electronics/Development Tools",
    "profiler": "/Computers & Electronics/Development Tools",
    "toolchain": "/Computers & Electronics/Development Tools",
    "bash": "/Computers & Electronics/Scripting Languages",
    "scripting": "/Computers & Electronics/Scripting Languages",
    "open source": "/Computers & Electronics/Open Source",
    "license": "/Computers & Electronics/Open Source",
    "database": "/Computers & Electronics/Database Management",
    "sql": "/Computers & Electronics/Database Management",
    "linux": "/Computers & Electronics/Operating Systems",
    "kernel": "/Computers & Electronics/Operating Systems",
    "firewall": "/Computers & Electronics/Network Security",
    "encryption": "/Computers & Electronics/Network Security",
    "pentest": "/Computers & Electronics/Hacking & Cracking",
    "exploit": "/Computers & Electronics/Hacking & Cracking",
    "neural": "/Computers & Electronics/Machine Learning",
    "training run": "/Computers & Electronics/Machine Learning",
    "crm": "/Computers & Electronics/Business Software",
    "kubernetes": "/Internet & Telecom/Cloud Services",
    "cloud": "/Internet & Telecom/Cloud Services",
    "api gateway": "/Internet & Telecom/Web Services",
    "webhooks": "/Internet & Telecom/Web Services",
    "newsletter": "/Internet & Telecom/Email & Messaging",
    # personal
    "chess": "/Games/Board Games/Chess",
    "board games": "/Games/Board Games",
    "speedrun": "/Games/Video Games",
    "crossword": "/Games/Puzzles & Brainteasers",
    "hiking": "/Travel/Outdoor Recreation",
    "campsite": "/Travel/Outdoor Recreation",
    "flight deals": "/Travel/Air Travel",
    "guitar": "/Arts & Entertainment/Music",
    "vinyl": "/Arts & Entertainment/Music",
    "anime": "/Arts & Entertainment/Comics & Animation",
    "movie night": "/Arts & Entertainment/Movies",
    "espresso": "/Food & Drink/Coffee & Tea",
    "sourdough": "/Food & Drink/Cooking & Recipes",
    "recipe": "/Food & Drink/Cooking & Recipes",
    "marathon": "/Sports/Running & Walking",
    "football": "/Sports/Team Sports",
    "bouldering": "/Sports/Climbing & Mountaineering",
    "telescope": "/Science/Astronomy",
    "stargazing": "/Science/Astronomy",
    "calculus": "/Science/Mathematics",
    "forum thread": "/Online Communities/Forums",
    "meetup": "/Online Communities/Social Networks",
    "photo dump": "/Online Communities/Photo & Video Sharing",
    "university": "/Jobs & Education/Colleges & Universities",
    "hiring": "/Jobs & Education/Jobs",
    "job posting": "/Jobs & Education/Jobs",
    "workshop": "/Jobs & Education/Professional Training",
    "gardening": "/Home & Garden/Gardening",
    "birdwatching": "/Hobbies & Leisure/Birdwatching",
    "photography": "/Hobbies & Leisure/Photography",
    "puppy": "/Pets & Animals/Dogs",
}

TRIGGERS = {
    "nitwit": "insult",
    "blockhead": "insult",
    "dingus": "insult",
    "garbage take": "toxicity",
    "dumpster fire": "toxicity",
    "utterly vile": "severe_toxicity",
    "you people": "identity_attack",
    "flipping": "profanity",
    "dang": "profanity",
    "clobber you": "threat",
    "stomp you": "threat",
}

PRO_TEMPLATES = [
    "Excited to share our new {kw} work with the team",
    "Hiring again: we need folks who enjoy {kw} problems",
    "Wrote a long post about {kw} performance tuning",
    "Our {kw} migration finally shipped today",
    "Speaking about {kw} at the community meetup next month",
    "Weekly notes: mostly {kw} and code review",
    "A {kw} bug took three days to track down, worth it",
]

PERSONAL_TEMPLATES = [
    "Weekend {kw} session was exactly what I needed",
    "Anyone else completely hooked on {kw} lately?",
    "Spent the whole evening on {kw} again",
    "Quick {kw} break between meetings",
    "My {kw} obsession is getting out of hand",
    "Sunday plans: {kw} and nothing else",
]

PRO_KEYWORDS = [
    "compiler", "java", "python", "frontend", "webpack", "debugger", "toolchain", "bash",
    "open source", "database", "sql", "linux", "kernel", "firewall", "encryption", "neural",
    "kubernetes", "cloud", "api gateway", "webhooks", "hiring", "workshop", "crm", "profiler",
]
PERSONAL_KEYWORDS = [
    "chess", "board games", "speedrun", "crossword", "hiking", "campsite", "guitar", "vinyl",
    "anime", "movie night", "espresso", "sourdough", "recipe", "marathon", "football",
    "bouldering", "telescope", "stargazing", "forum thread", "meetup", "photo dump",
    "gardening", "birdwatching", "photography", "puppy", "university",
]

OFFENSIVE_USERS = ["u002", "u013", "u027", "u041", "u058", "u066", "u073", "u088"]
OFFENSIVE_LINES = [
    "That is a garbage take and you are a nitwit for posting it",
    "What a dumpster fire of a thread, honestly flipping ridiculous",
    "Only a blockhead would deploy that on a Friday, dang",
    "Keep it up and I will clobber you in the next ranked match, dingus",
]


def iso(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def random_timestamp(rng: random.Random, year_lo=2010, year_hi=2024) -> str:
    year = rng.randint(year_lo, year_hi)
    month = rng.randint(1, 12)
    day = rng.randint(1, 28)
    return iso(datetime(year, month, day, rng.randint(0, 23), rng.randint(0, 59),
                        rng.randint(0, 59), tzinfo=timezone.utc))


def make_identities_and_posts():
    rng = random.Random(SEED)
    identities = []
    posts = []

    def add_posts(user, platform, texts):
        for text in texts:
            posts.append({
                "user_key": user,
                "platform": platform,
                "posted_at": random_timestamp(rng),
                "text": text,
            })

    def pro_post():
        return rng.choice(PRO_TEMPLATES).format(kw=rng.choice(PRO_KEYWORDS))

    def personal_post():
        return rng.choice(PERSONAL_TEMPLATES).format(kw=rng.choice(PERSONAL_KEYWORDS))

    # u001..u088: linked on both platforms.
    for i in range(1, 89):
        user = f"u{i:03d}"
        links = {"linkedin": f"in-{user}", "x": f"@{user}"}
        if rng.random() < 0.5:
            links["github"] = user
        identities.append({"user_key": user, "links": links})

        n_li = rng.randint(2, 7)
        n_x = rng.randint(3, 11)
        li_posts = [pro_post() for _ in range(n_li)]
        # Tech users also mention work on x, plus personal content.
        x_posts = [personal_post() if rng.random() < 0.7 else pro_post() for _ in range(n_x)]
        if user in OFFENSIVE_USERS:
            x_posts.append(rng.choice(OFFENSIVE_LINES))
        add_posts(user, "linkedin", li_posts)
        add_posts(user, "x", x_posts)

    # Special cases (all within u001..u088 so they are likely sampled):
    #   u005: single linkedin post (min_posts filter)
    posts = [p for p in posts if not (p["user_key"] == "u005" and p["platform"] == "linkedin")]
    add_posts("u005", "linkedin", [pro_post()])
    #   u009: x corpus holds only an empty bio (never verifies on x)
    posts = [p for p in posts if not (p["user_key"] == "u009" and p["platform"] == "x")]
    posts.append({"user_key": "u009", "platform": "x", "text": "", "kind": "bio"})
    #   u012: no linkedin corpus at all
    posts = [p for p in posts if not (p["user_key"] == "u012" and p["platform"] == "linkedin")]
    #   u017: manual override forces linkedin inactive despite content
    identities[16]["manual_verified"] = {"linkedin": False}
    #   u018: manual override claims x active, but no x corpus exists
    posts = [p for p in posts if not (p["user_key"] == "u018" and p["platform"] == "x")]
    identities[17]["manual_verified"] = {"x": True}

    # u089..u096: x only.
    for i in range(89, 97):
        user = f"u{i:03d}"
        identities.append({"user_key": user, "links": {"x": f"@{user}"}})
        add_posts(user, "x", [personal_post() for _ in range(rng.randint(3, 9))])

    # u097..u100: linkedin only.
    for i in range(97, 101):
        user = f"u{i:03d}"
        identities.append({"user_key": user, "links": {"linkedin": f"in-{user}"}})
        add_posts(user, "linkedin", [pro_post() for _ in range(rng.randint(2, 6))])

    # u101..u106: both platforms (so the match count exceeds the sample size).
    for i in range(101, 107):
        user = f"u{i:03d}"
        identities.append({"user_key": user,
                           "links": {"linkedin": f"in-{user}", "x": f"@{user}"}})
        add_posts(user, "linkedin", [pro_post() for _ in range(rng.randint(2, 5))])
        add_posts(user, "x", [personal_post() for _ in range(rng.randint(3, 8))])

    # u107..u112: no overlap with the study platforms.
    for i in range(107, 113):
        user = f"u{i:03d}"
        identities.append({"user_key": user, "links": {"mastodon": f"@{user}@example.social"}})

    return identities, posts


def make_labeled():
    rng = random.Random(SEED + 1)
    users = []
    for i in range(1, 7):
        n_posts = rng.randint(2, 8)
        texts = []
        for _ in range(n_posts):
            template = rng.choice(PRO_TEMPLATES + PERSONAL_TEMPLATES)
            kw = rng.choice(PRO_KEYWORDS + PERSONAL_KEYWORDS)
            texts.append(template.format(kw=kw))
        users.append({
            "user_key": f"label{i:02d}",
            "true_traits": [round(rng.uniform(1.5, 4.8), 1) for _ in range(5)],
            "posts": [{"text": t, "posted_at": random_timestamp(rng)} for t in texts],
        })
    return users


# ---------------------------------------------------------------------------
# Replay cache fixture: recorded personality scores for one fixed corpus.

REPLAY_POSTS = [
    "Refactored the parser today; tests finally green.",
    "Long weekend of board games and espresso.",
    "Thinking about silhouette scores more than I should.",
]
REPLAY_RUNS = {
    1: [3.0, 3.5, 4.0, 4.5, 3.0, 3.5, 4.0, 4.5, 3.0, 4.0],  # mean 3.7, pstd sqrt(0.31)
    2: [4.0] * 10,                                            # mean 4.0, pstd 0
    3: [1.0, 5.0] * 5,                                        # mean 3.0, pstd 2
    4: [2.0] * 5 + [3.0] * 5,                                 # mean 2.5, pstd 0.5
    5: [1.5, 2.5] * 5,                                        # mean 2.0, pstd 0.5
}


# Offense replay fixture: five posts with recorded attribute scores. The
# expected per-attribute maxima, read off the table by inspection:
#   toxicity 0.66, severe_toxicity 0.07, identity_attack 0.03,
#   insult 0.72, profanity 0.08, threat 0.12
OFFENSE_REPLAY_POSTS = {
    "The build is green again.":
        {"toxicity": 0.05, "severe_toxicity": 0.01, "identity_attack": 0.00,
         "insult": 0.02, "profanity": 0.01, "threat": 0.00},
    "This meeting could have been an email.":
        {"toxicity": 0.22, "severe_toxicity": 0.02, "identity_attack": 0.01,
         "insult": 0.18, "profanity": 0.03, "threat": 0.01},
    "Your bracket style is a crime against taste.":
        {"toxicity": 0.55, "severe_toxicity": 0.07, "identity_attack": 0.02,
         "insult": 0.61, "profanity": 0.02, "threat": 0.00},
    "I said what I said; deal with it.":
        {"toxicity": 0.41, "severe_toxicity": 0.03, "identity_attack": 0.01,
         "insult": 0.33, "profanity": 0.04, "threat": 0.12},
    "Absolute rubbish patch, do better.":
        {"toxicity": 0.66, "severe_toxicity": 0.05, "identity_attack": 0.03,
         "insult": 0.72, "profanity": 0.08, "threat": 0.02},
}


def request_hash(kind: str, trait: int, run: int, text: str) -> str:
    preimage = f"{kind}\x1f{trait}\x1f{run}\x1f{text}".encode("utf-8")
    return hashlib.sha256(preimage).hexdigest()


def write_record(directory: Path, h: str, kind: str, meta: dict, response: dict):
    record = {
        "hash": h,
        "kind": kind,
        "request_meta": meta,
        "response": response,
        "recorded_at": "2025-08-09T00:00:00Z",
    }
    (directory / f"{h}.json").write_text(json.dumps(record, indent=2) + "\n")


def make_replay_cache(directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    text = "\n---\n".join(REPLAY_POSTS)
    for trait, runs in REPLAY_RUNS.items():
        for run, score in enumerate(runs):
            h = request_hash("personality", trait, run, text)
            meta = {
                "trait_index": trait,
                "run_index": run,
                "text_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
                "text_chars": len(text),
            }
            write_record(directory, h, "personality", meta, {"score": score})

    for post, scores in OFFENSE_REPLAY_POSTS.items():
        h = request_hash("offense", 0, 0, post)
        meta = {
            "text_sha256": hashlib.sha256(post.encode("utf-8")).hexdigest(),
            "text_chars": len(post),
        }
        write_record(directory, h, "offense", meta, {"attributes": scores})


GOLDEN_CONFIG = {
    "platforms": ["linkedin", "x"],
    "seed": 20250809,
    "workers": 1,
    "out_dir": "out",
    "inputs": {
        "identities": "../fixtures/identities.jsonl",
        "corpora": "../fixtures/posts.jsonl",
        "labeled": "../fixtures/labeled.jsonl",
    },
    "match": {"require_all": False, "sample_size": 100},
    "inference": {
        "runs": 10,
        "stddev_threshold": 1.4,
        "min_posts": 2,
        "max_posts": 200,
        "retries": 3,
        "retry_backoff_ms": 0,
    },
    "interests": {
        "taxonomy": "../taxonomy.json",
        "professional_roots": ["Computers & Electronics", "Internet & Telecom"],
        "confidence_floor": 0.0,
    },
    "offense": {"threshold": 0.8},
    "cluster": {"k_min": 2, "k_max": 20, "repeats": 10},
    "integrate": {"from": "linkedin", "to": "x"},
    "providers": {
        "mode": "mock",
        "lexicon": "../lexicon.json",
        "triggers": "../offense_triggers.json",
    },
}


def write_jsonl(path: Path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as out:
        for row in rows:
            out.write(json.dumps(row, ensure_ascii=False) + "\n")


def main():
    (DATA / "configs").mkdir(parents=True, exist_ok=True)
    FIXTURES.mkdir(parents=True, exist_ok=True)

    (DATA / "taxonomy.json").write_text(
        json.dumps({"version": 1, "categories": TAXONOMY}, indent=2, ensure_ascii=False) + "\n")
    (DATA / "lexicon.json").write_text(
        json.dumps(LEXICON, indent=2, ensure_ascii=False, sort_keys=True) + "\n")
    (DATA / "offense_triggers.json").write_text(
        json.dumps(TRIGGERS, indent=2, ensure_ascii=False, sort_keys=True) + "\n")
    (DATA / "reference_rmse.csv").write_text(
        "trait,rmse\nopenness,1.266\nconscientiousness,1.319\nextraversion,1.009\n"
        "agreeableness,0.894\nneuroticism,1.015\n")

    identities, posts = make_identities_and_posts()
    write_jsonl(FIXTURES / "identities.jsonl", identities)
    write_jsonl(FIXTURES / "posts.jsonl", posts)
    write_jsonl(FIXTURES / "labeled.jsonl", make_labeled())
    make_replay_cache(FIXTURES / "replay_cache")

    (DATA / "configs" / "golden.json").write_text(
        json.dumps(GOLDEN_CONFIG, indent=2) + "\n")

    n_leaves = sum(len(v) for v in TAXONOMY.values())
    print(f"taxonomy: {len(TAXONOMY)} roots, {n_leaves} leaf paths")
    print(f"identities: {len(identities)}, posts: {len(posts)}")


if __name__ == "__main__":
    main()
