#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the bundled scripted-backend fixtures in fixtures/.

Every channel file holds one JSON string per line. Output is deterministic.
"""

import argparse
import json
import random
from pathlib import Path

PERSONAS = ["p1", "p2", "p3", "p4"]
NAMES = {"p1": "Ana", "p2": "Bruno", "p3": "Chen", "p4": "Dalia"}
ROUNDS = 400

PLAN = """Warm-up | Get to know how participants use their phones day to day | 3
Screen-time habits | Understand when and why screen time grows | 5
Coping strategies | Collect the tactics participants use to cut back | 5
Wishes for tools | Hear which features would actually help | 4
"""

INTROS = [
    "Welcome, everyone. To start us off, could each of you describe a typical day with your phone, from the moment you wake up?",
    "Let's talk about screen-time habits. When during the day do you notice yourself on your phone the most, and what pulls you there?",
    "Now I'd like to hear about coping strategies. What have you tried to reduce your screen time, and how did it go?",
    "For our last topic, imagine an ideal tool for managing screen time. What would it do for you?",
    "Let's move on. What surprised you most in what the others have said so far?",
    "To open this part, what is one habit you would like to change?",
]

SUBJECTS = [
    "notifications", "social feeds", "video apps", "messaging", "news alerts", "mobile games",
    "work email", "podcasts", "maps", "music streaming", "photo sharing", "online shopping",
]
CONTEXTS = [
    "in the morning", "on the commute", "during lunch", "late at night", "between meetings",
    "while cooking", "on weekends", "before bed", "while studying", "at family dinners",
]
FEELINGS = [
    "honestly it drains me", "it feels relaxing at first", "I lose track of time",
    "it helps me stay in touch", "I feel a bit guilty afterwards", "it is mostly out of habit",
    "I end up more stressed", "it fills the boring gaps", "it keeps me informed",
]
TACTICS = [
    "app timers", "grayscale mode", "leaving the phone in another room", "a paper notebook",
    "turning off badges", "a strict bedtime", "focus modes", "deleting apps for a week",
    "a basic alarm clock", "scheduled check-ins",
]

QUESTION_OPENERS = [
    "Could you say more about", "What makes", "How do you feel about", "When did you first notice",
    "Who else is affected by", "What would change if you gave up", "Why do you think people keep",
    "In what situations do you avoid", "How would you explain to a friend", "What is the hardest part of",
]


def response(rng: random.Random, persona: str, k: int) -> str:
    subj = rng.choice(SUBJECTS)
    ctx = rng.choice(CONTEXTS)
    feel = rng.choice(FEELINGS)
    tactic = rng.choice(TACTICS)
    other = NAMES[rng.choice([p for p in PERSONAS if p != persona])]
    forms = [
        f"For me it is mostly {subj} {ctx}, and {feel}. I tried {tactic} for a while, which helped a little, but I slipped back after a few weeks.",
        f"I agree with {other} to some extent. {subj.capitalize()} take over {ctx}. Lately I rely on {tactic}, and {feel}, if I am being honest with myself.",
        f"Something I noticed is that {ctx} I reach for {subj} without thinking. {feel.capitalize()}. A friend suggested {tactic}, so I might give that a proper try.",
        f"I see it differently. {subj.capitalize()} are useful {ctx}, and {feel}. What works for me is {tactic}, combined with telling people I will reply later.",
    ]
    return forms[k % len(forms)]


def question(rng: random.Random, seen: set) -> str:
    while True:
        text = (f"{rng.choice(QUESTION_OPENERS)} {rng.choice(SUBJECTS)} {rng.choice(CONTEXTS)}, "
                f"compared with {rng.choice(TACTICS)}?")
        if text not in seen:
            seen.add(text)
            return text


def engagement_rounds(rng: random.Random):
    formats = ["{}", "{}", "Score: {}", "{}/10", "I'd say {}.", "{} - I have a thought"]
    rounds = []
    idle_before = False
    for r in range(ROUNDS):
        idle = (not idle_before) and r > 0 and rng.random() < 0.08
        scores = {}
        for p in PERSONAS:
            scores[p] = rng.randint(0, 4) if idle else rng.randint(1, 10)
        if not idle and max(scores.values()) < 5:
            scores[rng.choice(PERSONAS)] = rng.randint(5, 10)
        rounds.append({p: rng.choice(formats).format(v) for p, v in scores.items()})
        idle_before = idle
    return rounds


def write_channel(out: Path, name: str, items) -> None:
    with open(out / f"{name}.jsonl", "w", encoding="utf-8") as f:
        for item in items:
            f.write(json.dumps(item, ensure_ascii=False) + "\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "fixtures")
    args = parser.parse_args()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240601)

    write_channel(out, "plan", [PLAN])
    write_channel(out, "new_stage", INTROS)
    seen = set(INTROS)
    write_channel(out, "insights", [question(rng, seen) for _ in range(300)])
    write_channel(out, "inactive_participant",
                  ["We have not heard much from everyone yet. " + question(rng, seen) for _ in range(300)])
    write_channel(out, "rephrase", [question(rng, seen) for _ in range(50)])

    rounds = engagement_rounds(rng)
    for p in PERSONAS:
        write_channel(out, f"engagement.{p}", [r[p] for r in rounds])
        write_channel(out, f"participant_response.{p}", [response(rng, p, k) for k in range(ROUNDS)])

    reflections = [
        "Participants described checking their phones first thing in the morning. Ana mentioned notifications as the main trigger, and others agreed habits form early in the day.",
        "The group linked screen time to boredom and stress. Bruno and Chen both pointed to late-night scrolling, while the rest stressed work messages.",
        "Several coping strategies came up, from app timers to leaving the phone in another room. Most found them helpful but hard to keep up.",
        "Participants wished for tools that respect context, such as quiet periods and summaries instead of constant alerts. Dalia asked for gentler reminders.",
        "The discussion kept returning to habit and social pressure as the drivers of screen time.",
        "Participants agreed that small, concrete changes were easier to sustain than strict rules.",
    ]
    write_channel(out, "reflection", reflections)
    write_channel(out, "anonymize", [
        "Participants described checking their phones first thing in the morning. One participant mentioned notifications as the main trigger, and others agreed habits form early in the day.",
        "The group linked screen time to boredom and stress. Two participants pointed to late-night scrolling, while the rest stressed work messages.",
        "Participants wished for tools that respect context, such as quiet periods and summaries instead of constant alerts. Dalia asked for gentler reminders.",
        "Participants agreed on the main points of this stage.",
    ])
    write_channel(out, "shorten", [question(rng, seen) for _ in range(20)])


if __name__ == "__main__":
    main()
